use firegrid_lp::{solve_lp, solve_lp_with, LinearProgram, LpStatus, Relation, Sense, SimplexOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds an LP whose optimum is known by construction: pick a point, pick
/// row duals and reduced costs satisfying complementary slackness there,
/// and set the cost vector to `Aᵀy + d`.
fn constructed(seed: u64, n: usize, m: usize, sense: Sense) -> (LinearProgram, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = LinearProgram::new(sense);
    let mut x = vec![0.0; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let l: f64 = rng.gen_range(-5.0..0.0);
        let u: f64 = l + rng.gen_range(0.5..8.0);
        let kind = rng.gen_range(0..4);
        let (lo, up) = match kind {
            0 => (l, u),
            1 => (l, f64::INFINITY),
            2 => (f64::NEG_INFINITY, u),
            _ => (l, u),
        };
        lp.add_var(lo, up, 0.0);
        // Decide where x sits and the sign of its reduced cost (min form).
        match rng.gen_range(0..3) {
            0 if lo.is_finite() => {
                x[j] = lo;
                d[j] = rng.gen_range(0.0..3.0);
            }
            1 if up.is_finite() => {
                x[j] = up;
                d[j] = -rng.gen_range(0.0..3.0);
            }
            _ => {
                let a = if lo.is_finite() { lo } else { up - 4.0 };
                let b = if up.is_finite() { up } else { lo + 4.0 };
                x[j] = rng.gen_range(a..=b);
                if x[j] > lo && x[j] < up {
                    d[j] = 0.0;
                } else if x[j] <= lo {
                    d[j] = rng.gen_range(0.0..1.0);
                } else {
                    d[j] = -rng.gen_range(0.0..1.0);
                }
            }
        }
    }
    let mut y = vec![0.0; m];
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.5) {
                let a: f64 = rng.gen_range(-4.0..4.0);
                coeffs.push((j, (a * 4.0).round() / 4.0));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        let (rel, rhs) = match rng.gen_range(0..5) {
            0 => {
                y[i] = rng.gen_range(0.0..2.0);
                (Relation::Ge, act)
            }
            1 => {
                y[i] = -rng.gen_range(0.0..2.0);
                (Relation::Le, act)
            }
            2 => {
                y[i] = rng.gen_range(-2.0..2.0);
                (Relation::Eq, act)
            }
            3 => (Relation::Ge, act - rng.gen_range(0.1..3.0)),
            _ => (Relation::Le, act + rng.gen_range(0.1..3.0)),
        };
        lp.add_row(coeffs, rel, rhs);
    }
    // A redundant row: sum of two existing rows with slack.
    if m >= 2 {
        let mut c = lp.rows[0].coeffs.clone();
        c.extend(lp.rows[1].coeffs.iter().copied());
        let act: f64 = c.iter().map(|&(j, a)| a * x[j]).sum();
        lp.add_row(c, Relation::Le, act + 50.0);
        y.push(0.0);
    }
    let mut cost = d.clone();
    for (row, yi) in lp.rows.iter().zip(&y) {
        for &(j, a) in &row.coeffs {
            cost[j] += a * yi;
        }
    }
    let sign = if sense == Sense::Min { 1.0 } else { -1.0 };
    lp.objective = cost.iter().map(|c| sign * c).collect();
    let obj = lp.objective_value(&x);
    (lp, obj)
}

fn check_optimal(lp: &LinearProgram, expected: Option<f64>) {
    let sol = solve_lp(lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    if let Some(e) = expected {
        assert!((sol.objective - e).abs() <= 1e-6 * (1.0 + e.abs()), "{} vs {e}", sol.objective);
    }
    assert!(lp.primal_residual(&sol.x) <= 1e-7, "residual {}", lp.primal_residual(&sol.x));
    let dual = lp.dual_objective(&sol.duals, &sol.reduced_costs);
    assert!(
        (sol.objective - dual).abs() <= 1e-6 * (1.0 + sol.objective.abs()),
        "primal {} dual {dual}",
        sol.objective
    );
    let cs = lp.complementary_slackness_residual(&sol.x, &sol.duals, &sol.reduced_costs);
    assert!(cs <= 1e-6, "complementary slackness {cs}");
    // c = Aᵀy + d
    let mut g = sol.reduced_costs.clone();
    for (row, y) in lp.rows.iter().zip(&sol.duals) {
        for &(j, a) in &row.coeffs {
            g[j] += a * y;
        }
    }
    for (gj, cj) in g.iter().zip(&lp.objective) {
        assert!((gj - cj).abs() <= 1e-6 * (1.0 + cj.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recovers_constructed_optimum(seed in any::<u64>(), n in 1usize..12, m in 0usize..10, max in any::<bool>()) {
        let sense = if max { Sense::Max } else { Sense::Min };
        let (lp, obj) = constructed(seed, n, m, sense);
        check_optimal(&lp, Some(obj));
    }

    #[test]
    fn infeasible_programs_carry_certificates(seed in any::<u64>(), n in 1usize..8, m in 1usize..8) {
        let (mut lp, _) = constructed(seed, n, m, Sense::Min);
        // Contradict the first row with a copy shifted beyond it.
        let row = lp.rows[0].clone();
        let act = row.rhs;
        match row.relation {
            Relation::Ge | Relation::Eq => lp.add_row(row.coeffs.clone(), Relation::Le, act - 1.0),
            Relation::Le => lp.add_row(row.coeffs.clone(), Relation::Ge, act + 1.0),
        };
        if row.coeffs.is_empty() {
            return Ok(());
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Infeasible);
        let ray = sol.farkas.unwrap();
        prop_assert!(lp.farkas_supremum(&ray) < -1e-7);
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>(), n in 1usize..10, m in 0usize..8) {
        let (lp, _) = constructed(seed, n, m, Sense::Min);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn warm_start_matches_cold(seed in any::<u64>(), n in 2usize..10, m in 1usize..8, k in 0usize..10) {
        let (mut lp, _) = constructed(seed, n, m, Sense::Min);
        let first = solve_lp(&lp).unwrap();
        let j = k % n;
        let mid = if lp.lower[j].is_finite() && lp.upper[j].is_finite() {
            0.5 * (lp.lower[j] + lp.upper[j])
        } else {
            first.x[j]
        };
        lp.upper[j] = mid.max(lp.lower[j]);
        let cold = solve_lp(&lp).unwrap();
        let warm = solve_lp_with(&lp, &SimplexOptions::default(), first.basis.as_ref()).unwrap();
        prop_assert_eq!(cold.status, warm.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((cold.objective - warm.objective).abs() <= 1e-6 * (1.0 + cold.objective.abs()));
            check_optimal(&lp, Some(cold.objective));
        }
    }
}

/// A transportation problem big enough to cross several refactorizations.
#[test]
fn transportation_problem_with_refactorization() {
    let (s, t) = (30, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lp = LinearProgram::new(Sense::Min);
    let mut var = vec![vec![0; t]; s];
    for row in var.iter_mut() {
        for v in row.iter_mut() {
            *v = lp.add_var(0.0, f64::INFINITY, rng.gen_range(1.0..20.0));
        }
    }
    let supply: Vec<f64> = (0..s).map(|_| rng.gen_range(50.0..100.0)).collect();
    let total: f64 = supply.iter().sum();
    let demand: Vec<f64> = (0..t).map(|_| 0.9 * total / t as f64).collect();
    for i in 0..s {
        lp.add_row((0..t).map(|k| (var[i][k], 1.0)).collect(), Relation::Le, supply[i]);
    }
    for k in 0..t {
        lp.add_row((0..s).map(|i| (var[i][k], 1.0)).collect(), Relation::Ge, demand[k]);
    }
    check_optimal(&lp, None);
    let sol = solve_lp(&lp).unwrap();
    assert!(sol.iterations > 100);
}
