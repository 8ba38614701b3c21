//! Linear-programming formulation of the household scheduling problem.
//!
//! Decision variables per step: heating power, EV charging power, grid import
//! and grid export. State variables per boundary: house temperature and EV
//! energy. The piecewise import/export price becomes linear by splitting the
//! net grid exchange into two non-negative parts; with `pi_s <= pi_e` buying
//! and selling in the same step never pays, so the split is exact at the
//! optimum.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::horizon::Horizon;
use crate::params::{HemsModel, HemsParameters};
use crate::scenario::ScenarioSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// Constraint families, used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    PowerBalance,
    EvDynamics,
    EvStart,
    EvEnd,
    TempDynamics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpVariable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub kind: ConstraintKind,
    /// Step or boundary index the row belongs to.
    pub index: usize,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<LpVariable>,
    pub constraints: Vec<LpConstraint>,
}

impl LinearProgram {
    fn var(&mut self, name: String, lower: f64, upper: f64, cost: f64) -> usize {
        self.variables.push(LpVariable {
            name,
            lower,
            upper,
            cost,
        });
        self.variables.len() - 1
    }

    fn row(
        &mut self,
        kind: ConstraintKind,
        index: usize,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(LpConstraint {
            kind,
            index,
            terms,
            relation,
            rhs,
        });
    }

    /// Objective value of an assignment.
    pub fn objective(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.cost * x)
            .sum()
    }
}

/// Column indices of each variable family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VarLayout {
    pub p_heat: Vec<usize>,
    /// Empty when there are no vehicles.
    pub p_ev: Vec<usize>,
    pub grid_import: Vec<usize>,
    pub grid_export: Vec<usize>,
    pub t_house: Vec<usize>,
    /// Empty when there are no vehicles.
    pub e_ev: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub horizon: Horizon,
    pub lp: LinearProgram,
    pub layout: VarLayout,
}

/// Formulates the scheduling LP.
///
/// Fails on invalid inputs, a scenario that does not cover the requested
/// days, or a vehicle stay too short to reach full charge.
pub fn build_problem(
    params: &HemsParameters,
    model: &HemsModel,
    scenario: &ScenarioSeries,
) -> Result<OptimizationProblem> {
    let horizon = Horizon::new(params, model, scenario)?;
    horizon.check_ev_windows()?;
    Ok(formulate(horizon))
}

/// Like [`build_problem`] but over every step of `scenario` as given,
/// without selecting the days named in `params`.
pub fn build_problem_over(
    params: &HemsParameters,
    model: &HemsModel,
    scenario: &ScenarioSeries,
) -> Result<OptimizationProblem> {
    let horizon = Horizon::over_scenario(params, model, scenario.clone())?;
    horizon.check_ev_windows()?;
    Ok(formulate(horizon))
}

pub(crate) fn formulate(horizon: Horizon) -> OptimizationProblem {
    let n = horizon.steps();
    let s = &horizon.scenario;
    let dt = s.dt;
    let thermal = horizon.model.thermal;
    let (alpha, beta) = (thermal.alpha(), thermal.beta());
    let (t_min, t_max) = (horizon.params.t_min, horizon.params.t_max);
    let with_ev = horizon.has_ev();
    let p_ev_max = horizon.p_ev_max();
    let e_full = horizon.e_full();

    let mut lp = LinearProgram::default();
    let mut layout = VarLayout::default();

    for k in 0..n {
        layout.p_heat.push(lp.var(
            format!("p_heat[{k}]"),
            0.0,
            horizon.model.heater_rating_kw,
            0.0,
        ));
        if with_ev {
            let upper = if horizon.occupancy[k] { p_ev_max } else { 0.0 };
            layout
                .p_ev
                .push(lp.var(format!("p_ev[{k}]"), 0.0, upper, 0.0));
        }
        layout.grid_import.push(lp.var(
            format!("grid_import[{k}]"),
            0.0,
            f64::INFINITY,
            s.pi_e[k] * dt,
        ));
        layout.grid_export.push(lp.var(
            format!("grid_export[{k}]"),
            0.0,
            f64::INFINITY,
            -s.pi_s[k] * dt,
        ));
    }
    for k in 0..=n {
        let (lo, hi) = if k == 0 {
            (horizon.initial_temperature, horizon.initial_temperature)
        } else {
            (t_min, t_max)
        };
        layout
            .t_house
            .push(lp.var(format!("t_house[{k}]"), lo, hi, 0.0));
        if with_ev {
            layout
                .e_ev
                .push(lp.var(format!("e_ev[{k}]"), 0.0, e_full, 0.0));
        }
    }

    for k in 0..n {
        // import - export - heat - ev = other - solar
        let mut terms = vec![
            (layout.grid_import[k], 1.0),
            (layout.grid_export[k], -1.0),
            (layout.p_heat[k], -1.0),
        ];
        if with_ev {
            terms.push((layout.p_ev[k], -1.0));
        }
        lp.row(
            ConstraintKind::PowerBalance,
            k,
            terms,
            Relation::Eq,
            s.p_other[k] - s.p_solar[k],
        );

        // T[k+1] - (1 - dt*alpha) T[k] - dt*beta*p_heat[k] = dt*alpha*T_ext[k]
        lp.row(
            ConstraintKind::TempDynamics,
            k,
            vec![
                (layout.t_house[k + 1], 1.0),
                (layout.t_house[k], -(1.0 - dt * alpha)),
                (layout.p_heat[k], -dt * beta),
            ],
            Relation::Eq,
            dt * alpha * s.t_ext[k],
        );
    }

    if with_ev {
        let e_init = horizon.e_init();
        lp.row(
            if horizon.occupancy[0] {
                ConstraintKind::EvStart
            } else {
                ConstraintKind::EvDynamics
            },
            0,
            vec![(layout.e_ev[0], 1.0)],
            Relation::Eq,
            horizon.initial_energy(),
        );
        for k in 0..n {
            if horizon.is_arrival(k + 1) {
                lp.row(
                    ConstraintKind::EvStart,
                    k + 1,
                    vec![(layout.e_ev[k + 1], 1.0)],
                    Relation::Eq,
                    e_init,
                );
            } else {
                lp.row(
                    ConstraintKind::EvDynamics,
                    k,
                    vec![
                        (layout.e_ev[k + 1], 1.0),
                        (layout.e_ev[k], -1.0),
                        (layout.p_ev[k], -dt),
                    ],
                    Relation::Eq,
                    0.0,
                );
            }
        }
        for w in &horizon.windows {
            if let Some(depart) = w.depart {
                lp.row(
                    ConstraintKind::EvEnd,
                    depart,
                    vec![(layout.e_ev[depart], 1.0)],
                    Relation::Eq,
                    e_full,
                );
            }
        }
    }

    OptimizationProblem {
        horizon,
        lp,
        layout,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{HemsError, InfeasibilityClass};
    use chrono::{NaiveDate, NaiveTime};

    fn inputs(ev_count: u32) -> (HemsParameters, ScenarioSeries) {
        let start = NaiveDate::from_ymd_opt(2024, 9, 16).unwrap();
        let n = 48;
        let scenario = ScenarioSeries::new(
            0.5,
            ScenarioSeries::grid(start.and_hms_opt(0, 0, 0).unwrap(), n, 0.5),
            vec![0.2; n],
            vec![0.05; n],
            vec![0.0; n],
            vec![0.4; n],
            vec![12.0; n],
        )
        .unwrap();
        let params = HemsParameters {
            date_start: start,
            date_end: start,
            ev_count,
            city: "York".into(),
            ev_arrival_time: NaiveTime::from_hms_opt(19, 0, 0).unwrap(),
            ev_departure_time: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            t_min: 18.0,
            t_max: 20.0,
        };
        (params, scenario)
    }

    #[test]
    fn empty_fleet_has_no_ev_columns_or_rows() {
        let (params, scenario) = inputs(0);
        let p = build_problem(&params, &HemsModel::default(), &scenario).unwrap();
        assert!(p.layout.p_ev.is_empty());
        assert!(p.layout.e_ev.is_empty());
        assert!(p
            .lp
            .variables
            .iter()
            .all(|v| !v.name.starts_with("p_ev") && !v.name.starts_with("e_ev")));
        assert!(p.lp.constraints.iter().all(|c| !matches!(
            c.kind,
            ConstraintKind::EvDynamics | ConstraintKind::EvStart | ConstraintKind::EvEnd
        )));
        // heat, import, export per step plus temperature per boundary
        assert_eq!(p.lp.variables.len(), 3 * 48 + 49);
    }

    #[test]
    fn away_steps_pin_charging_to_zero() {
        let (params, scenario) = inputs(1);
        let p = build_problem(&params, &HemsModel::default(), &scenario).unwrap();
        for k in 0..48 {
            let v = &p.lp.variables[p.layout.p_ev[k]];
            if p.horizon.occupancy[k] {
                assert_eq!(v.upper, 7.0);
            } else {
                assert_eq!(v.upper, 0.0);
            }
        }
        let ends: Vec<_> =
            p.lp.constraints
                .iter()
                .filter(|c| c.kind == ConstraintKind::EvEnd)
                .map(|c| (c.index, c.rhs))
                .collect();
        assert_eq!(ends, vec![(18, 40.0)]);
    }

    #[test]
    fn short_stay_is_an_ev_boundary_error() {
        let (mut params, scenario) = inputs(2);
        params.ev_arrival_time = NaiveTime::from_hms_opt(8, 0, 0).unwrap();
        params.ev_departure_time = NaiveTime::from_hms_opt(9, 0, 0).unwrap();
        let err = build_problem(&params, &HemsModel::default(), &scenario).unwrap_err();
        assert!(matches!(
            err,
            HemsError::Infeasible {
                class: InfeasibilityClass::EvBoundary,
                ..
            }
        ));
    }

    #[test]
    fn objective_integrates_price_times_power() {
        let (params, scenario) = inputs(0);
        let p = build_problem(&params, &HemsModel::default(), &scenario).unwrap();
        let imp = &p.lp.variables[p.layout.grid_import[0]];
        let exp = &p.lp.variables[p.layout.grid_export[0]];
        assert!((imp.cost - 0.1).abs() < 1e-15);
        assert!((exp.cost + 0.025).abs() < 1e-15);
    }
}
