//! Household parameters and the physical models they configure.

use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{HemsError, Result};

/// The eight user-supplied values that configure one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HemsParameters {
    pub date_start: NaiveDate,
    pub date_end: NaiveDate,
    pub ev_count: u32,
    pub city: String,
    /// Time of day the user (and their vehicles) come home.
    pub ev_arrival_time: NaiveTime,
    /// Time of day the user leaves; vehicles must be full by then.
    pub ev_departure_time: NaiveTime,
    pub t_min: f64,
    pub t_max: f64,
}

impl HemsParameters {
    pub fn validate(&self) -> Result<()> {
        if self.date_start > self.date_end {
            return Err(HemsError::InvalidParameters(format!(
                "date_start ({}) must not be after date_end ({})",
                self.date_start, self.date_end
            )));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(HemsError::InvalidParameters(
                "t_min and t_max must be finite".into(),
            ));
        }
        if self.t_min >= self.t_max {
            return Err(HemsError::InvalidParameters(format!(
                "t_min ({}) must be below t_max ({})",
                self.t_min, self.t_max
            )));
        }
        if self.ev_arrival_time == self.ev_departure_time {
            return Err(HemsError::InvalidParameters(
                "ev_arrival_time must differ from ev_departure_time".into(),
            ));
        }
        Ok(())
    }

    /// Number of whole days covered by `[date_start, date_end]`.
    pub fn days(&self) -> i64 {
        (self.date_end - self.date_start).num_days() + 1
    }
}

/// First-order RC model of the house.
///
/// `alpha` and `beta` are always derived from the three stored constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalModel {
    /// Thermal capacitance, kWh/°C.
    pub c_th: f64,
    /// Thermal resistance, °C/kW.
    pub r_th: f64,
    /// Coefficient of performance of the heater.
    pub eta: f64,
}

impl Default for ThermalModel {
    fn default() -> Self {
        Self {
            c_th: 2.0,
            r_th: 10.0,
            eta: 1.0,
        }
    }
}

impl ThermalModel {
    pub fn new(c_th: f64, r_th: f64, eta: f64) -> Result<Self> {
        let model = Self { c_th, r_th, eta };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_th", self.c_th), ("r_th", self.r_th), ("eta", self.eta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HemsError::InvalidModel(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Heat-loss rate, 1/h.
    pub fn alpha(&self) -> f64 {
        1.0 / (self.r_th * self.c_th)
    }

    /// Temperature gain per kWh of heating, °C/kWh.
    pub fn beta(&self) -> f64 {
        self.eta / self.c_th
    }

    /// One step of the house temperature recursion.
    ///
    /// The evaluation order is fixed so that every caller reproduces the same
    /// bits for the same inputs.
    #[inline]
    pub fn step(&self, t_house: f64, t_ext: f64, p_heat: f64, dt: f64) -> f64 {
        dt * (self.beta() * p_heat + self.alpha() * (t_ext - t_house)) + t_house
    }
}

/// Per-vehicle battery data. Several vehicles are aggregated into one battery
/// whose capacity and charger rating scale with the fleet size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvModel {
    pub battery_capacity_kwh: f64,
    /// State of charge on arrival, as a fraction of capacity.
    pub e_init_fraction: f64,
    pub p_charge_max_kw: f64,
    /// Always zero: vehicles never discharge into the house.
    pub p_charge_min_kw: f64,
}

impl Default for EvModel {
    fn default() -> Self {
        Self {
            battery_capacity_kwh: 40.0,
            e_init_fraction: 0.2,
            p_charge_max_kw: 7.0,
            p_charge_min_kw: 0.0,
        }
    }
}

impl EvModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.battery_capacity_kwh.is_finite() && self.battery_capacity_kwh > 0.0) {
            return Err(HemsError::InvalidModel(
                "battery_capacity_kwh must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.e_init_fraction) {
            return Err(HemsError::InvalidModel(
                "e_init_fraction must lie in [0, 1)".into(),
            ));
        }
        if !(self.p_charge_max_kw.is_finite() && self.p_charge_max_kw > 0.0) {
            return Err(HemsError::InvalidModel(
                "p_charge_max_kw must be positive".into(),
            ));
        }
        if self.p_charge_min_kw != 0.0 {
            return Err(HemsError::InvalidModel(
                "p_charge_min_kw must be zero (no vehicle-to-grid)".into(),
            ));
        }
        Ok(())
    }

    pub fn full_energy(&self, ev_count: u32) -> f64 {
        f64::from(ev_count) * self.battery_capacity_kwh
    }

    pub fn initial_energy(&self, ev_count: u32) -> f64 {
        self.e_init_fraction * self.full_energy(ev_count)
    }

    pub fn max_power(&self, ev_count: u32) -> f64 {
        f64::from(ev_count) * self.p_charge_max_kw
    }
}

/// Everything about the house that is not asked from the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HemsModel {
    pub thermal: ThermalModel,
    pub ev: EvModel,
    /// Upper bound on heating power, kW.
    pub heater_rating_kw: f64,
    /// House temperature at the start of the horizon; `t_min` when unset.
    pub initial_temperature: Option<f64>,
}

impl Default for HemsModel {
    fn default() -> Self {
        Self {
            thermal: ThermalModel::default(),
            ev: EvModel::default(),
            heater_rating_kw: 5.0,
            initial_temperature: None,
        }
    }
}

impl HemsModel {
    pub fn validate(&self) -> Result<()> {
        self.thermal.validate()?;
        self.ev.validate()?;
        if !(self.heater_rating_kw.is_finite() && self.heater_rating_kw >= 0.0) {
            return Err(HemsError::InvalidModel(
                "heater_rating_kw must be non-negative".into(),
            ));
        }
        if let Some(t) = self.initial_temperature {
            if !t.is_finite() {
                return Err(HemsError::InvalidModel(
                    "initial_temperature must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}
