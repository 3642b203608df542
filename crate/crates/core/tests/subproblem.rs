mod common;

use firegrid_core::cases::{six_bus_score_config, six_bus_with_solar_for_g3, truncate_horizon};
use firegrid_core::dispatch::solve_recourse;
use firegrid_core::subproblem::{build_with_m, DualTag};
use firegrid_core::*;
use proptest::prelude::*;

use common::{close, toy_case, ToyLimits};

fn one_bus(budget: u32) -> NetworkCase {
    NetworkCase {
        base_mva: 100.0,
        horizon: 1,
        buses: vec![Bus {
            label: "1".into(),
            reference: true,
        }],
        lines: vec![],
        generators: vec![Generator {
            label: "g".into(),
            bus: 0,
            p_min: 0.0,
            p_max: 100.0,
            segments: vec![Segment {
                width: 100.0,
                marginal_cost: 20.0,
            }],
        }],
        solar: vec![],
        demands: vec![DemandPoint {
            bus: 0,
            nominal: vec![50.0],
            deviation: vec![10.0],
        }],
        fire_scores: FireScores::zeros(0, 1),
        params: RobustParams {
            budget,
            shed_penalty: 1000.0,
            ..Default::default()
        },
    }
}

fn all_on(case: &NetworkCase) -> Vec<Vec<bool>> {
    vec![vec![true; case.lines.len()]; case.horizon]
}

/// A random plan that keeps each line with probability one half.
fn random_plan(case: &NetworkCase, seed: u64) -> Vec<Vec<bool>> {
    (0..case.horizon)
        .map(|t| {
            (0..case.lines.len())
                .map(|l| (seed.wrapping_mul(2654435761) >> ((t * 7 + l) % 31)) & 1 == 1)
                .collect()
        })
        .collect()
}

#[test]
fn one_bus_budget_one_adds_the_deviation_cost() {
    let c = one_bus(1);
    let wc = worst_case(&c, &[vec![]]).unwrap();
    assert!((wc.cost - 1200.0).abs() < 1e-6, "{}", wc.cost);
    assert!((wc.dual_objective - 1200.0).abs() < 1e-6);
    assert!(wc.realization.demand_up[0][0]);
    assert_eq!(wc.realization.demand[0][0], 60.0);
}

#[test]
fn zero_budget_returns_nominal() {
    let c = one_bus(0);
    let wc = worst_case(&c, &[vec![]]).unwrap();
    assert_eq!(wc.realization, UncertaintyRealization::nominal(&c));
    assert!((wc.cost - 1000.0).abs() < 1e-6);

    let mut six = six_bus_with_solar_for_g3(100.0);
    six.set_deviation_fraction(0.2);
    let six = truncate_horizon(&six, 3);
    let plan = all_on(&six);
    let wc = worst_case(&six, &plan).unwrap();
    let nominal = solve_recourse(&six, &plan, &UncertaintyRealization::nominal(&six)).unwrap();
    assert_eq!(wc.realization.budget_used(), 0);
    assert!(close(wc.cost, nominal.cost, 1e-9));
}

#[test]
fn wrong_plan_shape_is_rejected() {
    let c = build_6bus_case();
    assert!(matches!(
        build_dual_subproblem(&c, &[vec![true; 7]], 1),
        Err(SolveError::PlanShape(_))
    ));
}

#[test]
fn shortage_makes_deviations_cost_the_penalty() {
    // G1 and G2 at most 320 MW against 360 MW: every extra MW is shed.
    let mut c = truncate_horizon(&build_6bus_case(), 1);
    remove_first(&mut c, "G3");
    c.set_deviation_fraction(0.1);
    c.params.budget = 1;
    let plan = all_on(&c);
    let base = solve_recourse(&c, &plan, &UncertaintyRealization::nominal(&c)).unwrap().cost;
    let wc = worst_case(&c, &plan).unwrap();
    // The largest deviation is 14.4 MW.
    assert!(close(wc.cost - base, 14.4 * 1000.0, 1e-9), "{}", wc.cost - base);
}

fn remove_first(c: &mut NetworkCase, label: &str) {
    firegrid_core::cases::remove_generator(c, label);
}

fn check_dual(case: &NetworkCase, plan: &[Vec<bool>]) -> Result<(), TestCaseError> {
    let sp = build_dual_subproblem(case, plan, case.params.budget).unwrap();
    let wc = solve_subproblem(case, &sp).unwrap();
    let x = &wc.x;
    let lp = &sp.mip.lp;
    prop_assert!(lp.primal_residual(x) <= 1e-6, "dual feasibility residual {}", lp.primal_residual(x));
    for (j, tag) in sp.tags.iter().enumerate() {
        if matches!(tag, DualTag::Lower(_) | DualTag::Upper(_) | DualTag::Phi(_) | DualTag::Psi(_)) {
            prop_assert!(x[j] >= -1e-9, "{:?} = {}", tag, x[j]);
        }
    }
    for &(b, phi, psi, u) in &sp.products {
        prop_assert!((x[b] - x[phi] - x[psi]).abs() <= 1e-6);
        // Φ carries β exactly when the indicator is on.
        prop_assert!((x[phi] - x[u] * x[b]).abs() <= 1e-6 * (1.0 + x[b]));
    }
    let used = sp.indicators.iter().filter(|&&(j, _)| x[j] > 0.5).count();
    prop_assert!(used <= case.params.budget as usize);
    prop_assert_eq!(used, wc.realization.budget_used());
    // The dual value equals the primal cost of the realization it picks.
    prop_assert!(close(wc.dual_objective, wc.cost, 1e-6), "dual {} primal {}", wc.dual_objective, wc.cost);
    Ok(())
}

fn check_oracle(case: &NetworkCase, plan: &[Vec<bool>]) -> Result<(), TestCaseError> {
    let wc = worst_case(case, plan).unwrap();
    let (r, cost) = brute_force_worst_case(case, plan).unwrap();
    prop_assert!(close(wc.cost, cost, 1e-6), "subproblem {} oracle {}", wc.cost, cost);
    // Ties are allowed to pick different vertices, but not different costs.
    let again = solve_recourse(case, plan, &r).unwrap().cost;
    prop_assert!(close(again, cost, 1e-9));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dual_solution_is_consistent(seed in 0u64..100_000) {
        let case = toy_case(seed, &ToyLimits::default());
        check_dual(&case, &random_plan(&case, seed))?;
    }

    #[test]
    fn subproblem_matches_enumeration(seed in 0u64..100_000) {
        let case = toy_case(seed, &ToyLimits::default());
        check_oracle(&case, &random_plan(&case, seed))?;
    }

    #[test]
    fn worst_cost_grows_with_budget(seed in 0u64..100_000) {
        let mut case = toy_case(seed, &ToyLimits::default());
        let plan = random_plan(&case, seed);
        let mut last = f64::NEG_INFINITY;
        for e in 0..=4 {
            case.params.budget = e;
            let c = worst_case(&case, &plan).unwrap().cost;
            prop_assert!(c >= last - 1e-6 * (1.0 + last.abs()), "E={e}: {c} < {last}");
            last = c;
        }
    }

    #[test]
    fn dropping_an_active_deviation_never_costs_more(seed in 0u64..100_000) {
        let case = toy_case(seed, &ToyLimits::default());
        let plan = random_plan(&case, seed);
        let wc = worst_case(&case, &plan).unwrap();
        let r = &wc.realization;
        for t in 0..case.horizon {
            for d in 0..case.demands.len() {
                if r.demand_up[t][d] {
                    let mut up = r.demand_up.clone();
                    up[t][d] = false;
                    let alt = UncertaintyRealization::from_indicators(&case, up, r.solar_down.clone());
                    let c = solve_recourse(&case, &plan, &alt).unwrap().cost;
                    prop_assert!(c <= wc.cost + 1e-6 * (1.0 + wc.cost));
                }
            }
            for s in 0..case.solar.len() {
                if r.solar_down[t][s] {
                    let mut down = r.solar_down.clone();
                    down[t][s] = false;
                    let alt = UncertaintyRealization::from_indicators(&case, r.demand_up.clone(), down);
                    let c = solve_recourse(&case, &plan, &alt).unwrap().cost;
                    prop_assert!(c <= wc.cost + 1e-6 * (1.0 + wc.cost));
                }
            }
        }
    }
}

#[test]
fn six_bus_dual_is_consistent() {
    let mut c = six_bus_with_solar_for_g3(100.0);
    c.fire_scores = generate_synthetic_scores(&c, &six_bus_score_config(2));
    c.set_deviation_fraction(0.1);
    c.params.budget = 3;
    let c = truncate_horizon(&c, 12);
    let mut plan = all_on(&c);
    for row in &mut plan {
        row[5] = false;
    }
    check_dual(&c, &plan).unwrap();
}

#[test]
fn small_linearization_constant_is_raised() {
    let c = one_bus(1);
    // With M = 1 the true multiplier (K = 1000) does not fit.
    let sp = build_with_m(&c, &[vec![]], 1, 1.0).unwrap();
    let wc = solve_subproblem(&c, &sp).unwrap();
    assert!(firegrid_core::subproblem::hits_big_m(&sp, &wc.x));
    let mut tight = c.clone();
    tight.params.big_m = 1.0;
    let wc = worst_case(&tight, &[vec![]]).unwrap();
    assert!((wc.cost - 1200.0).abs() < 1e-6);
}
