//! Discretized planning horizon: which steps the vehicles are home, and where
//! the charging boundary conditions apply.
//!
//! Step `k` covers `[timestamps[k], timestamps[k] + dt)`. Boundary `k` is the
//! instant at the start of step `k`, so a horizon of `T` steps has `T + 1`
//! boundaries. State series (house temperature, EV energy) live on boundaries.

use chrono::{NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{HemsError, InfeasibilityClass, Result};
use crate::params::{HemsModel, HemsParameters};
use crate::scenario::ScenarioSeries;

const MINUTES_PER_DAY: u32 = 24 * 60;

/// One stay of the vehicles at home.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvWindow {
    /// Boundary at which the vehicles arrive (energy reset to the arrival level).
    pub arrive: usize,
    /// Boundary at which they leave full; `None` when the horizon ends first.
    pub depart: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Horizon {
    pub params: HemsParameters,
    pub model: HemsModel,
    /// The scenario restricted to the simulated days.
    pub scenario: ScenarioSeries,
    /// Per step: are the user and vehicles at home.
    pub occupancy: Vec<bool>,
    pub windows: Vec<EvWindow>,
    /// Arrival and departure after snapping to the step grid, minutes after midnight.
    pub arrival_minute: u32,
    pub departure_minute: u32,
    pub initial_temperature: f64,
}

/// Snaps a time of day to the step grid; exact halves round later in the day.
pub fn snap_to_grid(time: NaiveTime, step_minutes: u32) -> u32 {
    let m = time.hour() * 60 + time.minute();
    let snapped = (2 * m + step_minutes) / (2 * step_minutes) * step_minutes;
    snapped % MINUTES_PER_DAY
}

fn minute_of_day(t: chrono::NaiveDateTime) -> u32 {
    t.hour() * 60 + t.minute()
}

fn is_home(minute: u32, arrival: u32, departure: u32) -> bool {
    if arrival < departure {
        (arrival..departure).contains(&minute)
    } else {
        minute >= arrival || minute < departure
    }
}

impl Horizon {
    /// Horizon covering the whole days `date_start ..= date_end` of `params`.
    pub fn new(
        params: &HemsParameters,
        model: &HemsModel,
        scenario: &ScenarioSeries,
    ) -> Result<Self> {
        scenario.validate()?;
        let window = scenario.window_for_dates(params.date_start, params.date_end)?;
        Self::over_scenario(params, model, window)
    }

    /// Horizon spanning every step of `scenario`, ignoring the dates in
    /// `params`. Useful for short synthetic instances.
    pub fn over_scenario(
        params: &HemsParameters,
        model: &HemsModel,
        window: ScenarioSeries,
    ) -> Result<Self> {
        params.validate()?;
        model.validate()?;
        window.validate()?;

        let step_minutes_f = window.dt * 60.0;
        if (step_minutes_f - step_minutes_f.round()).abs() > 1e-9 || step_minutes_f < 1.0 {
            return Err(HemsError::scenario(
                format!("dt of {} h is not a whole number of minutes", window.dt),
                None,
            ));
        }
        let step_minutes = step_minutes_f.round() as u32;

        let arrival_minute = snap_to_grid(params.ev_arrival_time, step_minutes);
        let departure_minute = snap_to_grid(params.ev_departure_time, step_minutes);
        if arrival_minute == departure_minute {
            return Err(HemsError::InvalidParameters(
                "arrival and departure coincide after snapping to the time grid".into(),
            ));
        }

        let occupancy: Vec<bool> = window
            .timestamps
            .iter()
            .map(|t| is_home(minute_of_day(*t), arrival_minute, departure_minute))
            .collect();
        let n = occupancy.len();
        let end_instant = window.timestamps[n - 1] + window.step_duration();
        let home_after_end = is_home(minute_of_day(end_instant), arrival_minute, departure_minute);

        let mut windows = Vec::new();
        let mut open: Option<usize> = None;
        for k in 0..=n {
            let here = if k < n { occupancy[k] } else { home_after_end };
            let before = k > 0 && occupancy[k - 1];
            if k < n && here && !before {
                open = Some(k);
            }
            if k > 0 && before && !here {
                if let Some(arrive) = open.take() {
                    windows.push(EvWindow {
                        arrive,
                        depart: Some(k),
                    });
                }
            }
        }
        if let Some(arrive) = open {
            windows.push(EvWindow {
                arrive,
                depart: None,
            });
        }

        let initial_temperature = model.initial_temperature.unwrap_or(params.t_min);
        if initial_temperature < params.t_min || initial_temperature > params.t_max {
            return Err(HemsError::infeasible(
                InfeasibilityClass::Temperature,
                format!(
                    "initial temperature {initial_temperature} outside [{}, {}]",
                    params.t_min, params.t_max
                ),
            ));
        }

        Ok(Self {
            params: params.clone(),
            model: *model,
            scenario: window,
            occupancy,
            windows,
            arrival_minute,
            departure_minute,
            initial_temperature,
        })
    }

    pub fn steps(&self) -> usize {
        self.occupancy.len()
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt
    }

    pub fn has_ev(&self) -> bool {
        self.params.ev_count > 0
    }

    pub fn e_full(&self) -> f64 {
        self.model.ev.full_energy(self.params.ev_count)
    }

    pub fn e_init(&self) -> f64 {
        self.model.ev.initial_energy(self.params.ev_count)
    }

    pub fn p_ev_max(&self) -> f64 {
        self.model.ev.max_power(self.params.ev_count)
    }

    /// Vehicles arrive (and their energy is reset) at boundary `k`.
    pub fn is_arrival(&self, k: usize) -> bool {
        self.windows.iter().any(|w| w.arrive == k)
    }

    pub fn is_departure(&self, k: usize) -> bool {
        self.windows.iter().any(|w| w.depart == Some(k))
    }

    /// EV energy at boundary 0: the arrival level when the vehicles are home,
    /// otherwise full (they left charged).
    pub fn initial_energy(&self) -> f64 {
        if self.occupancy.first().copied().unwrap_or(false) {
            self.e_init()
        } else {
            self.e_full()
        }
    }

    /// Fails with an EV-boundary infeasibility when some stay is too short to
    /// charge the fleet from the arrival level to full.
    pub fn check_ev_windows(&self) -> Result<()> {
        if !self.has_ev() {
            return Ok(());
        }
        let needed = self.e_full() - self.e_init();
        for w in &self.windows {
            if let Some(depart) = w.depart {
                let dwell_h = (depart - w.arrive) as f64 * self.dt();
                let deliverable = dwell_h * self.p_ev_max();
                if needed > deliverable * (1.0 + 1e-12) + 1e-9 {
                    return Err(HemsError::infeasible(
                        InfeasibilityClass::EvBoundary,
                        format!(
                            "stay from boundary {} to {} ({dwell_h} h) delivers at most {deliverable} kWh, {needed} kWh needed",
                            w.arrive, depart
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fails with a temperature infeasibility when the comfort band cannot be
    /// held. Uses the reachable interval `[coolest, warmest]` propagated with
    /// zero and full heating; exact because the recursion is monotone in both
    /// temperature and heating power whenever `dt * alpha < 1`.
    pub fn check_temperature_reachability(&self) -> Result<()> {
        let thermal = self.model.thermal;
        let dt = self.dt();
        let (t_min, t_max) = (self.params.t_min, self.params.t_max);
        let mut lo = self.initial_temperature;
        let mut hi = self.initial_temperature;
        for k in 0..self.steps() {
            let t_ext = self.scenario.t_ext[k];
            let next_lo = thermal.step(lo, t_ext, 0.0, dt);
            let next_hi = thermal.step(hi, t_ext, self.model.heater_rating_kw, dt);
            let slack = 1e-9 * (1.0 + t_max.abs());
            if next_hi < t_min - slack {
                return Err(HemsError::infeasible(
                    InfeasibilityClass::Temperature,
                    format!(
                        "at step {k} full heating only reaches {next_hi:.3} °C, below t_min {t_min}"
                    ),
                ));
            }
            if next_lo > t_max + slack {
                return Err(HemsError::infeasible(
                    InfeasibilityClass::Temperature,
                    format!(
                        "at step {k} the house warms to {next_lo:.3} °C without heating, above t_max {t_max}"
                    ),
                ));
            }
            lo = next_lo.max(t_min);
            hi = next_hi.min(t_max);
        }
        Ok(())
    }
}
