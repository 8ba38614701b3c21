//! Household energy scheduling.
//!
//! Given the user's eight parameters ([`HemsParameters`]), a house model
//! ([`HemsModel`]) and exogenous series ([`ScenarioSeries`]), [`build_problem`]
//! formulates a linear program over a discretized horizon and [`solve`]
//! returns the cost-minimal heating and EV charging [`Schedule`].
//! [`naive_schedule`] gives the price-blind baseline it is compared against.

pub mod csvio;
pub mod error;
pub mod horizon;
pub mod naive;
pub mod params;
pub mod problem;
pub mod scenario;
pub mod simulate;
pub mod solve;
pub mod synth;
pub mod validate;

use chrono::{NaiveDate, NaiveTime};

pub use error::{HemsError, InfeasibilityClass, Result};
pub use horizon::{EvWindow, Horizon};
pub use naive::{naive_decisions, naive_schedule, percent_reduction};
pub use params::{EvModel, HemsModel, HemsParameters, ThermalModel};
pub use problem::{build_problem, build_problem_over, LinearProgram, OptimizationProblem};
pub use scenario::ScenarioSeries;
pub use simulate::{simulate, Decisions, Schedule};
pub use solve::{solve, solve_detailed, Solution};
pub use synth::{economy7_prices, synth_scenario, synth_weather_solar_load, TariffSpec};
pub use validate::{validate, Violation, ViolationReport};

/// Default feasibility tolerance for solver output.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Optimized schedule next to the naive baseline on the same horizon.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub horizon: Horizon,
    pub optimized: Schedule,
    pub naive: Schedule,
}

impl Comparison {
    pub fn percent_reduction(&self) -> f64 {
        percent_reduction(self.optimized.total_cost, self.naive.total_cost)
    }
}

/// Solves the problem and simulates the naive policy for comparison.
pub fn optimize(
    params: &HemsParameters,
    model: &HemsModel,
    scenario: &ScenarioSeries,
    tolerance: f64,
) -> Result<Comparison> {
    let problem = build_problem(params, model, scenario)?;
    let optimized = solve(&problem, tolerance)?;
    let naive = simulate(&problem.horizon, &naive_decisions(&problem.horizon));
    Ok(Comparison {
        horizon: problem.horizon,
        optimized,
        naive,
    })
}

/// The household of the worked dialogue: London, one week from 16 September
/// 2024, two vehicles home 19:00 to 09:00, comfort band 18 to 20 °C.
pub fn demo_parameters() -> HemsParameters {
    HemsParameters {
        date_start: NaiveDate::from_ymd_opt(2024, 9, 16).expect("valid date"),
        date_end: NaiveDate::from_ymd_opt(2024, 9, 22).expect("valid date"),
        ev_count: 2,
        city: "London".into(),
        ev_arrival_time: NaiveTime::from_hms_opt(19, 0, 0).expect("valid time"),
        ev_departure_time: NaiveTime::from_hms_opt(9, 0, 0).expect("valid time"),
        t_min: 18.0,
        t_max: 20.0,
    }
}

/// Synthetic Economy-7 week for [`demo_parameters`].
pub fn demo_scenario(seed: u64) -> ScenarioSeries {
    let p = demo_parameters();
    synth_scenario(
        &p.city,
        p.date_start,
        p.date_end,
        0.5,
        &TariffSpec::default(),
        seed,
    )
    .expect("demo inputs are valid")
}
