mod common;

use common::random_day;
use hems_core::{
    build_problem, demo_parameters, demo_scenario, naive_decisions, optimize, simulate, solve,
    validate, HemsModel, DEFAULT_TOLERANCE,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn solver_output_is_feasible_and_beats_naive(seed in any::<u64>(), half_hour in any::<bool>()) {
        let dt = if half_hour { 0.5 } else { 1.0 };
        let inst = random_day(seed, dt);
        let problem = build_problem(&inst.params, &inst.model, &inst.scenario).unwrap();
        let schedule = solve(&problem, DEFAULT_TOLERANCE).unwrap();
        let report = validate(&schedule, &problem.horizon, DEFAULT_TOLERANCE);
        prop_assert!(report.is_empty(), "{}", report);

        let naive = simulate(&problem.horizon, &naive_decisions(&problem.horizon));
        prop_assert!(validate(&naive, &problem.horizon, DEFAULT_TOLERANCE).is_empty());
        prop_assert!(schedule.total_cost <= naive.total_cost + 1e-9,
            "optimized {} > naive {}", schedule.total_cost, naive.total_cost);

        // re-simulating the schedule's own decisions is bitwise identical
        let again = simulate(&problem.horizon, &schedule.decisions());
        prop_assert_eq!(&again.t_house, &schedule.t_house);
        prop_assert_eq!(&again.e_ev, &schedule.e_ev);

        for k in 0..schedule.steps() {
            if inst.scenario.pi_s[k] < inst.scenario.pi_e[k] {
                prop_assert_eq!(schedule.grid_import[k] * schedule.grid_export[k], 0.0);
            }
        }
    }

    #[test]
    fn doubling_prices_keeps_the_argmin(seed in any::<u64>()) {
        let inst = random_day(seed, 1.0);
        let base = solve(&build_problem(&inst.params, &inst.model, &inst.scenario).unwrap(), 1e-6).unwrap();
        for factor in [2.0, 0.5, 4.0] {
            let mut scaled = inst.scenario.clone();
            scaled.scale_prices(factor);
            let s = solve(&build_problem(&inst.params, &inst.model, &scaled).unwrap(), 1e-6).unwrap();
            prop_assert_eq!(&s.p_heat, &base.p_heat);
            prop_assert_eq!(&s.p_ev, &base.p_ev);
        }
    }
}

#[test]
fn economy7_week_beats_naive() {
    let params = demo_parameters();
    let scenario = demo_scenario(42);
    let cmp = optimize(&params, &HemsModel::default(), &scenario, DEFAULT_TOLERANCE).unwrap();
    let reduction = cmp.percent_reduction();
    println!(
        "optimized £{:.2}, naive £{:.2}, reduction {reduction:.1}%",
        cmp.optimized.total_cost, cmp.naive.total_cost
    );
    assert!(cmp.optimized.total_cost < cmp.naive.total_cost);
    assert!(reduction > 0.0);

    // naive charging on arrival runs in peak hours; the optimizer charges off-peak
    let h = &cmp.horizon;
    let peak_ev = |p_ev: &[f64]| -> f64 {
        p_ev.iter()
            .zip(&h.scenario.pi_e)
            .filter(|(_, price)| **price > 0.2)
            .map(|(p, _)| p)
            .sum()
    };
    assert!(peak_ev(&cmp.naive.p_ev) > 0.0);
    assert!(peak_ev(&cmp.optimized.p_ev) < 1e-6);
}

#[test]
fn zero_import_price_still_dominates() {
    let mut inst = random_day(11, 1.0);
    inst.scenario.pi_e.iter_mut().for_each(|p| *p = 0.0);
    inst.scenario.pi_s.iter_mut().for_each(|p| *p = 0.0);
    let problem = build_problem(&inst.params, &inst.model, &inst.scenario).unwrap();
    let s = solve(&problem, 1e-6).unwrap();
    let naive = simulate(&problem.horizon, &naive_decisions(&problem.horizon));
    assert_eq!(naive.total_cost, 0.0);
    assert!(s.total_cost.abs() < 1e-12);
    assert!(s.total_cost <= naive.total_cost + 1e-9);
}
