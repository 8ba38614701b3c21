use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{HemsError, InfeasibilityClass, Result};
use crate::horizon::Horizon;
use crate::problem::{OptimizationProblem, Relation};
use crate::simulate::{simulate, Decisions, Schedule};
use crate::validate::validate;

/// Optimal schedule plus the LP objective it was derived from.
#[derive(Debug, Clone)]
pub struct Solution {
    pub schedule: Schedule,
    pub lp_objective: f64,
}

/// Solves the LP and returns the optimal schedule.
///
/// The state trajectories and cost of the returned schedule come from
/// [`simulate`] on the optimal decisions, so they are bitwise reproducible.
pub fn solve(problem: &OptimizationProblem, tolerance: f64) -> Result<Schedule> {
    solve_detailed(problem, tolerance).map(|s| s.schedule)
}

pub fn solve_detailed(problem: &OptimizationProblem, tolerance: f64) -> Result<Solution> {
    let lp = &problem.lp;
    let mut model = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = lp
        .variables
        .iter()
        .map(|v| model.add_var(v.cost, (v.lower, v.upper)))
        .collect();
    for c in &lp.constraints {
        let terms: Vec<_> = c.terms.iter().map(|(i, a)| (vars[*i], *a)).collect();
        let op = match c.relation {
            Relation::Eq => ComparisonOp::Eq,
            Relation::Le => ComparisonOp::Le,
            Relation::Ge => ComparisonOp::Ge,
        };
        model.add_constraint(terms.as_slice(), op, c.rhs);
    }

    let outcome = match model.solve() {
        Ok(o) => o,
        Err(microlp::Error::Infeasible) => return Err(diagnose(&problem.horizon)),
        Err(e) => return Err(HemsError::Solver(e.to_string())),
    };
    let solution = outcome
        .into_solution()
        .map_err(|_| HemsError::Solver("solve interrupted before a solution was found".into()))?;

    let values: Vec<f64> = vars.iter().map(|v| solution.var_value(*v)).collect();
    let layout = &problem.layout;
    let n = problem.horizon.steps();
    let clamp = |idx: usize| {
        let v = &lp.variables[idx];
        values[idx].clamp(v.lower, v.upper)
    };
    let decisions = Decisions {
        p_heat: layout.p_heat.iter().map(|&i| clamp(i)).collect(),
        p_ev: if layout.p_ev.is_empty() {
            vec![0.0; n]
        } else {
            layout.p_ev.iter().map(|&i| clamp(i)).collect()
        },
    };
    let schedule = simulate(&problem.horizon, &decisions);
    let lp_objective = solution.objective();

    let report = validate(&schedule, &problem.horizon, tolerance);
    if !report.is_empty() {
        return Err(HemsError::Solver(format!(
            "solver output violates constraints: {report}"
        )));
    }
    let gap = (schedule.total_cost - lp_objective).abs();
    if gap > tolerance * lp_objective.abs().max(1.0) {
        return Err(HemsError::Solver(format!(
            "simulated cost {} differs from LP objective {lp_objective}",
            schedule.total_cost
        )));
    }
    Ok(Solution {
        schedule,
        lp_objective,
    })
}

/// Names the first constraint family that makes the problem infeasible.
fn diagnose(horizon: &Horizon) -> HemsError {
    if let Err(e) = horizon.check_ev_windows() {
        return e;
    }
    if let Err(e) = horizon.check_temperature_reachability() {
        return e;
    }
    HemsError::infeasible(
        InfeasibilityClass::Bounds,
        "no schedule satisfies the variable bounds",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{HemsModel, HemsParameters};
    use crate::problem::build_problem;
    use crate::scenario::ScenarioSeries;
    use chrono::{NaiveDate, NaiveTime};

    fn params(ev_count: u32) -> HemsParameters {
        let start = NaiveDate::from_ymd_opt(2024, 9, 16).unwrap();
        HemsParameters {
            date_start: start,
            date_end: start,
            ev_count,
            city: "Bath".into(),
            ev_arrival_time: NaiveTime::from_hms_opt(19, 0, 0).unwrap(),
            ev_departure_time: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            t_min: 18.0,
            t_max: 21.0,
        }
    }

    fn scenario(t_ext: f64) -> ScenarioSeries {
        let n = 48;
        let start = NaiveDate::from_ymd_opt(2024, 9, 16)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        ScenarioSeries::new(
            0.5,
            ScenarioSeries::grid(start, n, 0.5),
            vec![0.2; n],
            vec![0.05; n],
            vec![0.0; n],
            vec![0.3; n],
            vec![t_ext; n],
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_needs_no_heating() {
        let p = build_problem(&params(0), &HemsModel::default(), &scenario(18.0)).unwrap();
        let s = solve(&p, 1e-6).unwrap();
        assert!(s.p_heat.iter().all(|p| p.abs() < 1e-9), "{:?}", s.p_heat);
        assert!(s.t_house.iter().all(|t| (t - 18.0).abs() < 1e-9));
    }

    #[test]
    fn cold_day_heats_just_enough() {
        let p = build_problem(&params(0), &HemsModel::default(), &scenario(8.0)).unwrap();
        let s = solve(&p, 1e-6).unwrap();
        // holding 18 °C against 8 °C outside: alpha*(18-8)/beta = 1 kW
        for p in &s.p_heat {
            assert!((p - 1.0).abs() < 1e-7, "{p}");
        }
    }

    #[test]
    fn weak_heater_reports_temperature_class() {
        let model = HemsModel {
            heater_rating_kw: 0.2,
            ..Default::default()
        };
        let p = build_problem(&params(0), &model, &scenario(0.0)).unwrap();
        let err = solve(&p, 1e-6).unwrap_err();
        assert!(
            matches!(
                err,
                HemsError::Infeasible {
                    class: InfeasibilityClass::Temperature,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn charges_to_full_before_departure() {
        let p = build_problem(&params(1), &HemsModel::default(), &scenario(12.0)).unwrap();
        let s = solve(&p, 1e-6).unwrap();
        assert!((s.e_ev[18] - 40.0).abs() < 1e-6);
    }
}
