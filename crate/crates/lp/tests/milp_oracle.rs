use firegrid_lp::{
    solve_lp, solve_milp, solve_milp_linked, LinearProgram, LpStatus, MilpOptions, MilpStatus,
    MixedIntegerProgram, Relation, Sense,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive oracle: fix every binary assignment and solve the residual LP.
fn enumerate(mip: &MixedIntegerProgram) -> Option<f64> {
    let nb = mip.binaries.len();
    let max = mip.lp.sense == Sense::Max;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << nb) {
        let mut lp = mip.lp.clone();
        for (k, &j) in mip.binaries.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let sol = solve_lp(&lp).unwrap();
        if sol.status == LpStatus::Optimal {
            let better = match best {
                None => true,
                Some(b) => (max && sol.objective > b) || (!max && sol.objective < b),
            };
            if better {
                best = Some(sol.objective);
            }
        }
    }
    best
}

fn random_mip(seed: u64) -> MixedIntegerProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.gen_range(1..=12);
    let nc = rng.gen_range(0..=4);
    let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
    let mut lp = LinearProgram::new(sense);
    let mut bins = Vec::new();
    let mut point = Vec::new();
    for _ in 0..nb {
        bins.push(lp.add_var(0.0, 1.0, rng.gen_range(-10.0..10.0f64).round()));
        point.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    for _ in 0..nc {
        let u = rng.gen_range(1.0..10.0f64).round();
        lp.add_var(0.0, u, rng.gen_range(-5.0..5.0f64).round());
        point.push(rng.gen_range(0.0..u));
    }
    let rows = rng.gen_range(1..=8);
    for _ in 0..rows {
        let mut coeffs = Vec::new();
        for j in 0..nb + nc {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-9.0..9.0f64).round()));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        // Mostly satisfiable at the planted point; occasionally tight.
        let slack = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..6.0f64).round() };
        if rng.gen_bool(0.5) {
            lp.add_row(coeffs, Relation::Le, act + slack);
        } else {
            lp.add_row(coeffs, Relation::Ge, act - slack);
        }
    }
    if rng.gen_bool(0.1) {
        // Some instances are infeasible.
        let c: Vec<(usize, f64)> = (0..nb).map(|j| (j, 1.0)).collect();
        lp.add_row(c, Relation::Ge, nb as f64 + 1.0);
    }
    MixedIntegerProgram::new(lp, bins)
}

#[test]
fn matches_enumeration_on_seeded_instances() {
    let opts = MilpOptions::with_gap(0.0);
    let mut feasible = 0;
    for seed in 0..100u64 {
        let mip = random_mip(seed);
        let sol = solve_milp(&mip, &opts).unwrap();
        match enumerate(&mip) {
            Some(best) => {
                feasible += 1;
                assert_eq!(sol.status, MilpStatus::Optimal, "seed {seed}");
                assert!(
                    (sol.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "seed {seed}: {} vs {best}",
                    sol.objective
                );
                assert!(mip.lp.primal_residual(&sol.x) <= 1e-6);
                for &j in &mip.binaries {
                    assert!(sol.x[j] == 0.0 || sol.x[j] == 1.0);
                }
                for w in sol.bound_history.windows(2) {
                    assert!(w[1] >= w[0], "seed {seed}: bound decreased {w:?}");
                }
                let sign = if mip.lp.sense == Sense::Min { 1.0 } else { -1.0 };
                for w in sol.incumbent_history.windows(2) {
                    assert!(sign * w[1] < sign * w[0]);
                }
            }
            None => assert_eq!(sol.status, MilpStatus::Infeasible, "seed {seed}"),
        }
    }
    assert!(feasible >= 80);
}

#[test]
fn knapsack_picks_the_better_item() {
    let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Max), Vec::new());
    let x = mip.add_binary("x", 3.0);
    let y = mip.add_binary("y", 2.0);
    mip.lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    let sol = solve_milp(&mip, &MilpOptions::default()).unwrap();
    assert_eq!(sol.status, MilpStatus::Optimal);
    assert_eq!(sol.objective, 3.0);
    assert_eq!(sol.x, vec![1.0, 0.0]);
}

#[test]
fn integral_relaxation_needs_only_the_root() {
    let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Min), Vec::new());
    let x = mip.add_binary("x", 1.0);
    let y = mip.add_binary("y", 1.0);
    mip.lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.0);
    let sol = solve_milp(&mip, &MilpOptions::default()).unwrap();
    assert_eq!(sol.status, MilpStatus::Optimal);
    assert_eq!(sol.nodes, 1);
    assert_eq!(sol.objective, 1.0);
}

#[test]
fn node_limit_is_never_reported_optimal() {
    // Odd-cycle style covering problem with a fractional relaxation.
    let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Min), Vec::new());
    let n = 11;
    let v: Vec<usize> = (0..n).map(|k| mip.add_binary(format!("v{k}"), 1.0 + 0.01 * k as f64)).collect();
    for k in 0..n {
        mip.lp.add_row(vec![(v[k], 1.0), (v[(k + 1) % n], 1.0)], Relation::Ge, 1.0);
    }
    let opts = MilpOptions {
        node_limit: 2,
        gap: 0.0,
        ..Default::default()
    };
    let sol = solve_milp(&mip, &opts).unwrap();
    assert!(matches!(sol.status, MilpStatus::GapNotProven | MilpStatus::NoSolution));
    let full = solve_milp(&mip, &MilpOptions::with_gap(0.0)).unwrap();
    assert_eq!(full.status, MilpStatus::Optimal);
    assert_eq!(Some(full.objective), enumerate(&mip));
}

#[test]
fn search_is_deterministic() {
    for seed in 0..20 {
        let mip = random_mip(1000 + seed);
        let a = solve_milp(&mip, &MilpOptions::default()).unwrap();
        let b = solve_milp(&mip, &MilpOptions::default()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

/// Blocks of coupled binaries plus a budget row `Σ link ≤ E` across blocks.
fn linked_instance(seed: u64) -> (MixedIntegerProgram, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = LinearProgram::new(Sense::Max);
    let mut bins = Vec::new();
    let mut links = Vec::new();
    let blocks = rng.gen_range(1..=4);
    for _ in 0..blocks {
        let u1 = lp.add_var(0.0, 1.0, rng.gen_range(0.0..6.0f64).round());
        let u2 = lp.add_var(0.0, 1.0, rng.gen_range(0.0..6.0f64).round());
        let y = lp.add_var(0.0, 10.0, rng.gen_range(-1.0..3.0f64).round());
        bins.extend([u1, u2]);
        links.extend([u1, u2]);
        lp.add_row(vec![(y, 1.0), (u1, -4.0), (u2, -3.0)], Relation::Le, 2.0);
        if rng.gen_bool(0.5) {
            lp.add_row(vec![(u1, 1.0), (u2, 1.0)], Relation::Le, 1.0);
        }
    }
    // A free-standing variable not touched by any row.
    lp.add_var(0.0, 2.0, 1.0);
    let budget = rng.gen_range(0..=3) as f64;
    let link = lp.add_row(links.iter().map(|&j| (j, 1.0)).collect(), Relation::Le, budget);
    (MixedIntegerProgram::new(lp, bins), link)
}

#[test]
fn linked_decomposition_matches_monolithic_search() {
    let opts = MilpOptions::with_gap(0.0);
    for seed in 0..60 {
        let (mip, link) = linked_instance(seed);
        let whole = solve_milp(&mip, &opts).unwrap();
        let split = solve_milp_linked(&mip, link, &opts).unwrap();
        assert_eq!(whole.status, MilpStatus::Optimal);
        assert_eq!(split.status, MilpStatus::Optimal);
        assert!((whole.objective - split.objective).abs() < 1e-7, "seed {seed}");
        assert!(mip.lp.primal_residual(&split.x) <= 1e-6);
        assert!((mip.lp.objective_value(&split.x) - split.objective).abs() < 1e-9);
    }
}

#[test]
fn linked_falls_back_when_row_is_not_a_budget() {
    let (mut mip, link) = linked_instance(3);
    mip.lp.rows[link].coeffs[0].1 = 2.0;
    let a = solve_milp_linked(&mip, link, &MilpOptions::default()).unwrap();
    let b = solve_milp(&mip, &MilpOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);
}
