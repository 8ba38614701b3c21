#![allow(dead_code)]

use chrono::{NaiveDate, NaiveTime};
use hems_core::{EvModel, HemsModel, HemsParameters, ScenarioSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 9, 16).unwrap()
}

pub fn hm(h: u32, m: u32) -> NaiveTime {
    NaiveTime::from_hms_opt(h, m, 0).unwrap()
}

pub struct Instance {
    pub params: HemsParameters,
    pub model: HemsModel,
    pub scenario: ScenarioSeries,
}

/// Random one-day instance that is feasible by construction: outdoor
/// temperature stays below the band, the heater can hold `t_min`, and every
/// stay is at least eight hours.
pub fn random_day(seed: u64, dt: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ScenarioSeries::steps_for_days(1, dt);
    let t_min = rng.gen_range(16.0..20.0);
    let t_max = t_min + rng.gen_range(1.0..4.0);
    let mut pi_e = Vec::with_capacity(n);
    let mut pi_s = Vec::with_capacity(n);
    let mut p_solar = Vec::with_capacity(n);
    let mut p_other = Vec::with_capacity(n);
    let mut t_ext = Vec::with_capacity(n);
    for k in 0..n {
        let h = k as f64 * dt;
        let e = rng.gen_range(0.05..0.4);
        pi_e.push(e);
        pi_s.push(rng.gen_range(0.0..=e));
        p_solar.push(if (7.0..19.0).contains(&h) {
            rng.gen_range(0.0..3.0)
        } else {
            0.0
        });
        p_other.push(rng.gen_range(0.1..2.0));
        t_ext.push(t_min - rng.gen_range(1.0..15.0));
    }
    let scenario = ScenarioSeries::new(
        dt,
        ScenarioSeries::grid(day().and_hms_opt(0, 0, 0).unwrap(), n, dt),
        pi_e,
        pi_s,
        p_solar,
        p_other,
        t_ext,
    )
    .unwrap();
    let params = HemsParameters {
        date_start: day(),
        date_end: day(),
        ev_count: rng.gen_range(0..=3),
        city: "Testville".into(),
        ev_arrival_time: hm(rng.gen_range(16..=22), 0),
        ev_departure_time: hm(rng.gen_range(6..=9), 0),
        t_min,
        t_max,
    };
    let model = HemsModel {
        ev: EvModel::default(),
        heater_rating_kw: 5.0,
        ..HemsModel::default()
    };
    Instance {
        params,
        model,
        scenario,
    }
}
