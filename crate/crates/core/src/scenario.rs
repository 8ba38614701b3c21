//! Time-aligned exogenous series: prices, solar, baseline load, weather.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{HemsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSeries {
    /// Step length in hours.
    pub dt: f64,
    /// Start instant of each step.
    pub timestamps: Vec<NaiveDateTime>,
    /// Import price, £/kWh.
    pub pi_e: Vec<f64>,
    /// Feed-in price, £/kWh.
    pub pi_s: Vec<f64>,
    /// Solar generation, kW.
    pub p_solar: Vec<f64>,
    /// Non-flexible household load, kW.
    pub p_other: Vec<f64>,
    /// Outdoor temperature, °C.
    pub t_ext: Vec<f64>,
}

impl ScenarioSeries {
    pub fn new(
        dt: f64,
        timestamps: Vec<NaiveDateTime>,
        pi_e: Vec<f64>,
        pi_s: Vec<f64>,
        p_solar: Vec<f64>,
        p_other: Vec<f64>,
        t_ext: Vec<f64>,
    ) -> Result<Self> {
        let s = Self {
            dt,
            timestamps,
            pi_e,
            pi_s,
            p_solar,
            p_other,
            t_ext,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn step_duration(&self) -> Duration {
        Duration::milliseconds((self.dt * 3_600_000.0).round() as i64)
    }

    /// Checks every series invariant. The first violation wins.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(HemsError::scenario("dt must be positive", None));
        }
        let n = self.timestamps.len();
        if n == 0 {
            return Err(HemsError::scenario("scenario is empty", None));
        }
        for (name, len) in [
            ("pi_e", self.pi_e.len()),
            ("pi_s", self.pi_s.len()),
            ("p_solar", self.p_solar.len()),
            ("p_other", self.p_other.len()),
            ("t_ext", self.t_ext.len()),
        ] {
            if len != n {
                return Err(HemsError::scenario(
                    format!("series {name} has length {len}, expected {n}"),
                    None,
                ));
            }
        }
        for k in 1..n {
            if self.timestamps[k] <= self.timestamps[k - 1] {
                return Err(HemsError::scenario(
                    "timestamps must be strictly increasing",
                    Some(k),
                ));
            }
        }
        for k in 0..n {
            let values = [
                self.pi_e[k],
                self.pi_s[k],
                self.p_solar[k],
                self.p_other[k],
                self.t_ext[k],
            ];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(HemsError::scenario("non-finite value", Some(k)));
            }
            if self.pi_s[k] > self.pi_e[k] {
                return Err(HemsError::scenario("feed-in exceeds import price", Some(k)));
            }
            if self.p_solar[k] < 0.0 {
                return Err(HemsError::scenario("p_solar must be non-negative", Some(k)));
            }
            if self.p_other[k] < 0.0 {
                return Err(HemsError::scenario("p_other must be non-negative", Some(k)));
            }
        }
        Ok(())
    }

    /// Steps `[from, to)` as a new scenario.
    pub fn slice(&self, from: usize, to: usize) -> Self {
        Self {
            dt: self.dt,
            timestamps: self.timestamps[from..to].to_vec(),
            pi_e: self.pi_e[from..to].to_vec(),
            pi_s: self.pi_s[from..to].to_vec(),
            p_solar: self.p_solar[from..to].to_vec(),
            p_other: self.p_other[from..to].to_vec(),
            t_ext: self.t_ext[from..to].to_vec(),
        }
    }

    /// The steps covering whole days `date_start ..= date_end`.
    ///
    /// Fails unless the scenario has a step starting at midnight of
    /// `date_start` and contiguous steps through the end of `date_end`.
    pub fn window_for_dates(&self, date_start: NaiveDate, date_end: NaiveDate) -> Result<Self> {
        let begin = date_start.and_hms_opt(0, 0, 0).expect("midnight");
        let end = (date_end + Duration::days(1))
            .and_hms_opt(0, 0, 0)
            .expect("midnight");
        let Some(from) = self.timestamps.iter().position(|t| *t == begin) else {
            return Err(HemsError::HorizonNotCovered(format!(
                "no step starts at {begin}"
            )));
        };
        let to = self
            .timestamps
            .iter()
            .position(|t| *t >= end)
            .unwrap_or(self.timestamps.len());
        let last_end = self.timestamps[to - 1] + self.step_duration();
        if last_end < end {
            return Err(HemsError::HorizonNotCovered(format!(
                "series ends at {last_end}, horizon needs {end}"
            )));
        }
        Ok(self.slice(from, to))
    }

    /// Uniform time grid of `steps` steps starting at `start`.
    pub fn grid(start: NaiveDateTime, steps: usize, dt: f64) -> Vec<NaiveDateTime> {
        let step = Duration::milliseconds((dt * 3_600_000.0).round() as i64);
        (0..steps).map(|k| start + step * k as i32).collect()
    }

    /// Number of steps of length `dt` hours that cover `days` days.
    pub fn steps_for_days(days: i64, dt: f64) -> usize {
        ((days as f64) * 24.0 / dt).round() as usize
    }

    /// Multiplies both price series by `factor`.
    pub fn scale_prices(&mut self, factor: f64) {
        self.pi_e.iter_mut().for_each(|p| *p *= factor);
        self.pi_s.iter_mut().for_each(|p| *p *= factor);
    }
}
