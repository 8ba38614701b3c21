use serde::{Deserialize, Serialize};

use crate::horizon::Horizon;

/// The controllable inputs: heating and charging power per step, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decisions {
    pub p_heat: Vec<f64>,
    pub p_ev: Vec<f64>,
}

impl Decisions {
    pub fn zeros(steps: usize) -> Self {
        Self {
            p_heat: vec![0.0; steps],
            p_ev: vec![0.0; steps],
        }
    }
}

/// Decision and state trajectories over a horizon.
///
/// Per-step series have `T` entries; `e_ev` and `t_house` live on the `T + 1`
/// step boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub p_heat: Vec<f64>,
    pub p_ev: Vec<f64>,
    pub p_total: Vec<f64>,
    pub e_ev: Vec<f64>,
    pub t_house: Vec<f64>,
    pub grid_import: Vec<f64>,
    pub grid_export: Vec<f64>,
    /// £ over the horizon.
    pub total_cost: f64,
}

impl Schedule {
    pub fn steps(&self) -> usize {
        self.p_heat.len()
    }

    pub fn decisions(&self) -> Decisions {
        Decisions {
            p_heat: self.p_heat.clone(),
            p_ev: self.p_ev.clone(),
        }
    }
}

/// Forward-integrates the house temperature and EV energy for the given
/// decisions and prices the resulting grid exchange.
///
/// Import is billed at `pi_e` and export paid at `pi_s`, i.e. the import price
/// applies whenever consumption is at least the solar output.
///
/// # Panics
///
/// If the decision series do not have one entry per horizon step.
pub fn simulate(horizon: &Horizon, decisions: &Decisions) -> Schedule {
    let n = horizon.steps();
    assert_eq!(
        decisions.p_heat.len(),
        n,
        "p_heat length must match the horizon"
    );
    assert_eq!(
        decisions.p_ev.len(),
        n,
        "p_ev length must match the horizon"
    );

    let s = &horizon.scenario;
    let dt = s.dt;
    let thermal = horizon.model.thermal;

    let mut t_house = Vec::with_capacity(n + 1);
    let mut e_ev = Vec::with_capacity(n + 1);
    t_house.push(horizon.initial_temperature);
    e_ev.push(horizon.initial_energy());

    let mut p_total = Vec::with_capacity(n);
    let mut grid_import = Vec::with_capacity(n);
    let mut grid_export = Vec::with_capacity(n);
    let mut total_cost = 0.0;

    for k in 0..n {
        let p_heat = decisions.p_heat[k];
        let p_ev = decisions.p_ev[k];

        t_house.push(thermal.step(t_house[k], s.t_ext[k], p_heat, dt));
        let next_e = if horizon.is_arrival(k + 1) {
            horizon.e_init()
        } else {
            e_ev[k] + p_ev * dt
        };
        e_ev.push(next_e);

        let total = p_heat + p_ev + s.p_other[k];
        let net = total - s.p_solar[k];
        let (import, export) = if net >= 0.0 { (net, 0.0) } else { (0.0, -net) };
        total_cost += (s.pi_e[k] * import - s.pi_s[k] * export) * dt;

        p_total.push(total);
        grid_import.push(import);
        grid_export.push(export);
    }

    Schedule {
        p_heat: decisions.p_heat.clone(),
        p_ev: decisions.p_ev.clone(),
        p_total,
        e_ev,
        t_house,
        grid_import,
        grid_export,
        total_cost,
    }
}
