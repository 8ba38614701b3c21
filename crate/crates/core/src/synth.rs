//! Synthetic exogenous data: a two-rate tariff, weather, solar output and a
//! baseline household load. All generators are pure functions of their
//! arguments.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HemsError, Result};
use crate::scenario::ScenarioSeries;

/// Two-level time-of-use tariff with a cheap window, e.g. Economy 7.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TariffSpec {
    pub offpeak_start: NaiveTime,
    pub offpeak_end: NaiveTime,
    pub offpeak_price: f64,
    pub peak_price: f64,
    pub feedin_price: f64,
}

impl Default for TariffSpec {
    fn default() -> Self {
        Self {
            offpeak_start: NaiveTime::from_hms_opt(0, 30, 0).expect("valid"),
            offpeak_end: NaiveTime::from_hms_opt(7, 30, 0).expect("valid"),
            offpeak_price: 0.13,
            peak_price: 0.30,
            feedin_price: 0.05,
        }
    }
}

impl TariffSpec {
    pub fn flat(price: f64, feedin_price: f64) -> Self {
        Self {
            offpeak_price: price,
            peak_price: price,
            feedin_price,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.feedin_price <= self.offpeak_price && self.offpeak_price <= self.peak_price) {
            return Err(HemsError::InvalidModel(format!(
                "tariff must satisfy feed-in ({}) <= off-peak ({}) <= peak ({})",
                self.feedin_price, self.offpeak_price, self.peak_price
            )));
        }
        Ok(())
    }

    /// Whether a time of day falls in the cheap window (wrapping past midnight).
    pub fn is_offpeak(&self, t: NaiveTime) -> bool {
        let (a, b) = (self.offpeak_start, self.offpeak_end);
        if a <= b {
            t >= a && t < b
        } else {
            t >= a || t < b
        }
    }
}

/// Import and feed-in prices for each step start.
pub fn economy7_prices(spec: &TariffSpec, timestamps: &[NaiveDateTime]) -> (Vec<f64>, Vec<f64>) {
    let pi_e = timestamps
        .iter()
        .map(|t| {
            if spec.is_offpeak(t.time()) {
                spec.offpeak_price
            } else {
                spec.peak_price
            }
        })
        .collect();
    (pi_e, vec![spec.feedin_price; timestamps.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub t_ext: Vec<f64>,
    pub p_solar: Vec<f64>,
    pub p_other: Vec<f64>,
}

/// FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic climate offset in [-2, 2) °C for a city name.
pub fn city_offset(city: &str) -> f64 {
    let h = fnv1a(city.trim().to_lowercase().as_bytes());
    (h % 4000) as f64 / 1000.0 - 2.0
}

// Typical UK monthly mean outdoor temperature, °C.
const MONTHLY_MEAN: [f64; 12] = [
    4.5, 4.8, 6.5, 8.5, 11.5, 14.0, 16.0, 15.8, 13.5, 10.5, 7.0, 5.0,
];

const DIURNAL_AMPLITUDE: f64 = 3.0;
const SOLAR_PEAK_KW: f64 = 3.5;

fn hour_of_day(t: &NaiveDateTime) -> f64 {
    f64::from(t.hour()) + f64::from(t.minute()) / 60.0 + f64::from(t.second()) / 3600.0
}

/// Weather, solar output and baseline load on the step grid covering
/// `date_start ..= date_end`.
pub fn synth_weather_solar_load(
    city: &str,
    date_start: NaiveDate,
    date_end: NaiveDate,
    dt: f64,
    seed: u64,
) -> WeatherSeries {
    let days = (date_end - date_start).num_days() + 1;
    let steps = ScenarioSeries::steps_for_days(days.max(0), dt);
    let start = date_start.and_hms_opt(0, 0, 0).expect("midnight");
    let timestamps = ScenarioSeries::grid(start, steps, dt);
    synth_on_grid(city, &timestamps, seed)
}

fn synth_on_grid(city: &str, timestamps: &[NaiveDateTime], seed: u64) -> WeatherSeries {
    let offset = city_offset(city);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(city.as_bytes()));

    let mut t_ext = Vec::with_capacity(timestamps.len());
    let mut p_solar = Vec::with_capacity(timestamps.len());
    let mut p_other = Vec::with_capacity(timestamps.len());

    let mut current_day = None;
    let (mut anomaly, mut cloud) = (0.0, 1.0);
    for t in timestamps {
        if current_day != Some(t.date()) {
            current_day = Some(t.date());
            anomaly = rng.gen_range(-1.5..1.5);
            cloud = rng.gen_range(0.3..1.0);
        }
        let h = hour_of_day(t);
        let month = t.month0() as usize;
        let doy = f64::from(t.ordinal());

        let diurnal = DIURNAL_AMPLITUDE * (2.0 * PI * (h - 9.0) / 24.0).sin();
        t_ext.push(MONTHLY_MEAN[month] + offset + anomaly + diurnal + rng.gen_range(-0.2..0.2));

        let day_length = 12.0 + 4.5 * (2.0 * PI * (doy - 172.0) / 365.0).cos();
        let sunrise = 12.5 - day_length / 2.0;
        let season = 0.7 + 0.3 * (2.0 * PI * (doy - 172.0) / 365.0).cos();
        let x = (h - sunrise) / day_length;
        let solar = if (0.0..=1.0).contains(&x) {
            SOLAR_PEAK_KW * season * cloud * (PI * x).sin()
        } else {
            0.0
        };
        p_solar.push(solar.max(0.0));

        let morning = 0.6 * (-((h - 7.5) / 1.0).powi(2)).exp();
        let evening = 1.2 * (-((h - 18.5) / 1.5).powi(2)).exp();
        p_other.push(0.25 + morning + evening + rng.gen_range(0.0..0.1));
    }
    WeatherSeries {
        t_ext,
        p_solar,
        p_other,
    }
}

/// Full synthetic scenario for a city and date range.
pub fn synth_scenario(
    city: &str,
    date_start: NaiveDate,
    date_end: NaiveDate,
    dt: f64,
    tariff: &TariffSpec,
    seed: u64,
) -> Result<ScenarioSeries> {
    tariff.validate()?;
    if date_start > date_end {
        return Err(HemsError::InvalidParameters(
            "date_start must not be after date_end".into(),
        ));
    }
    let days = (date_end - date_start).num_days() + 1;
    let steps = ScenarioSeries::steps_for_days(days, dt);
    let timestamps = ScenarioSeries::grid(
        date_start.and_hms_opt(0, 0, 0).expect("midnight"),
        steps,
        dt,
    );
    let (pi_e, pi_s) = economy7_prices(tariff, &timestamps);
    let w = synth_on_grid(city, &timestamps, seed);
    ScenarioSeries::new(dt, timestamps, pi_e, pi_s, w.p_solar, w.p_other, w.t_ext)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 9, 16).unwrap()
    }

    fn grid(days: usize, dt: f64) -> Vec<NaiveDateTime> {
        ScenarioSeries::grid(
            day().and_hms_opt(0, 0, 0).unwrap(),
            ScenarioSeries::steps_for_days(days as i64, dt),
            dt,
        )
    }

    #[test]
    fn default_tariff_has_seven_cheap_hours() {
        let spec = TariffSpec::default();
        let (pi_e, pi_s) = economy7_prices(&spec, &grid(3, 0.5));
        let cheap = pi_e.iter().filter(|p| **p == spec.offpeak_price).count();
        assert_eq!(cheap as f64 * 0.5, 7.0 * 3.0);
        assert!(pi_s.iter().all(|p| *p == 0.05));
    }

    #[test]
    fn equal_levels_give_flat_tariff() {
        let spec = TariffSpec::flat(0.2, 0.05);
        let (pi_e, _) = economy7_prices(&spec, &grid(1, 0.5));
        assert!(pi_e.iter().all(|p| *p == 0.2));
    }

    #[test]
    fn window_wrapping_midnight() {
        let spec = TariffSpec {
            offpeak_start: NaiveTime::from_hms_opt(23, 0, 0).unwrap(),
            offpeak_end: NaiveTime::from_hms_opt(6, 0, 0).unwrap(),
            ..TariffSpec::default()
        };
        let g = grid(1, 1.0);
        let (pi_e, _) = economy7_prices(&spec, &g);
        let cheap: Vec<u32> = g
            .iter()
            .zip(&pi_e)
            .filter(|(_, p)| **p == spec.offpeak_price)
            .map(|(t, _)| t.hour())
            .collect();
        assert_eq!(cheap, vec![0, 1, 2, 3, 4, 5, 23]);
    }

    #[test]
    fn tariff_ordering_is_enforced() {
        let spec = TariffSpec {
            feedin_price: 0.5,
            ..TariffSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn no_sun_at_midnight_and_deterministic() {
        let a = synth_weather_solar_load("London", day(), day() + chrono::Days::new(6), 0.5, 7);
        let b = synth_weather_solar_load("London", day(), day() + chrono::Days::new(6), 0.5, 7);
        assert_eq!(a, b);
        assert_eq!(a.t_ext.len(), 336);
        for d in 0..7 {
            assert_eq!(a.p_solar[d * 48], 0.0);
        }
        assert!(a.p_solar.iter().any(|p| *p > 0.5));
        assert!(a.p_other.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn cities_differ_deterministically() {
        let end = day() + chrono::Days::new(6);
        let mean = |w: &WeatherSeries| w.t_ext.iter().sum::<f64>() / w.t_ext.len() as f64;
        let london = synth_weather_solar_load("London", day(), end, 0.5, 1);
        let oxford = synth_weather_solar_load("Oxford", day(), end, 0.5, 1);
        assert_ne!(city_offset("London"), city_offset("Oxford"));
        assert!((mean(&london) - mean(&oxford)).abs() > 1e-6);
    }

    #[test]
    fn generated_scenario_satisfies_invariants() {
        for seed in 0..20 {
            let s = synth_scenario(
                "Manchester",
                day(),
                day() + chrono::Days::new(2),
                0.25,
                &TariffSpec::default(),
                seed,
            )
            .unwrap();
            assert!(s.validate().is_ok());
            assert_eq!(s.len(), 3 * 96);
        }
    }
}
