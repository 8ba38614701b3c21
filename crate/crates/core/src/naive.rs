//! Price-blind reference policy used as the cost baseline.

use crate::error::Result;
use crate::horizon::Horizon;
use crate::params::{HemsModel, HemsParameters};
use crate::scenario::ScenarioSeries;
use crate::simulate::{simulate, Decisions, Schedule};

/// Thermostat held at `t_max` within the heater rating; vehicles charge at
/// full power from arrival until full. Ignores prices entirely.
pub fn naive_schedule(
    params: &HemsParameters,
    model: &HemsModel,
    scenario: &ScenarioSeries,
) -> Result<Schedule> {
    let horizon = Horizon::new(params, model, scenario)?;
    horizon.check_ev_windows()?;
    Ok(simulate(&horizon, &naive_decisions(&horizon)))
}

pub fn naive_decisions(horizon: &Horizon) -> Decisions {
    let n = horizon.steps();
    let s = &horizon.scenario;
    let dt = s.dt;
    let thermal = horizon.model.thermal;
    let (alpha, beta) = (thermal.alpha(), thermal.beta());
    let rating = horizon.model.heater_rating_kw;
    let set_point = horizon.params.t_max;
    let (e_full, p_max) = (horizon.e_full(), horizon.p_ev_max());

    let mut d = Decisions::zeros(n);
    let mut t = horizon.initial_temperature;
    let mut e = horizon.initial_energy();
    for k in 0..n {
        // heating that lands exactly on the set-point, clipped to the rating
        let wanted = (set_point - t - dt * alpha * (s.t_ext[k] - t)) / (dt * beta);
        d.p_heat[k] = wanted.clamp(0.0, rating);
        t = thermal.step(t, s.t_ext[k], d.p_heat[k], dt);

        if horizon.has_ev() && horizon.occupancy[k] {
            d.p_ev[k] = ((e_full - e) / dt).clamp(0.0, p_max);
        }
        e = if horizon.is_arrival(k + 1) {
            horizon.e_init()
        } else {
            e + d.p_ev[k] * dt
        };
    }
    d
}

/// Percent saving of `optimized` relative to `naive`; zero when the naive
/// cost is not positive.
pub fn percent_reduction(optimized: f64, naive: f64) -> f64 {
    if naive > 0.0 {
        100.0 * (naive - optimized) / naive
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, NaiveTime};

    fn inputs(t_ext: f64, ev_count: u32) -> (HemsParameters, ScenarioSeries) {
        let n = 48;
        let start = NaiveDate::from_ymd_opt(2024, 9, 16).unwrap();
        let scenario = ScenarioSeries::new(
            0.5,
            ScenarioSeries::grid(start.and_hms_opt(0, 0, 0).unwrap(), n, 0.5),
            vec![0.2; n],
            vec![0.05; n],
            vec![0.0; n],
            vec![0.3; n],
            vec![t_ext; n],
        )
        .unwrap();
        let params = HemsParameters {
            date_start: start,
            date_end: start,
            ev_count,
            city: "Leeds".into(),
            ev_arrival_time: NaiveTime::from_hms_opt(19, 0, 0).unwrap(),
            ev_departure_time: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            t_min: 18.0,
            t_max: 20.0,
        };
        (params, scenario)
    }

    #[test]
    fn equilibrium_at_set_point_costs_baseline_only() {
        let (params, scenario) = inputs(20.0, 0);
        let model = HemsModel {
            initial_temperature: Some(20.0),
            ..Default::default()
        };
        let s = naive_schedule(&params, &model, &scenario).unwrap();
        assert!(s.p_heat.iter().all(|p| *p == 0.0));
        assert!((s.total_cost - 0.3 * 0.2 * 0.5 * 48.0).abs() < 1e-12);
    }

    #[test]
    fn charges_immediately_at_full_power() {
        let (params, scenario) = inputs(10.0, 1);
        let s = naive_schedule(&params, &HemsModel::default(), &scenario).unwrap();
        // home at midnight with 8 kWh: 3.5 kWh per half hour for nine steps,
        // the last 0.5 kWh at 1 kW, then idle
        assert!(s.p_ev[..9].iter().all(|p| *p == 7.0));
        assert_eq!(s.p_ev[9], 1.0);
        assert_eq!(s.p_ev[10], 0.0);
        assert_eq!(s.e_ev[10], 40.0);
        // arrival at 19:00 resets to 8 kWh and charging restarts
        assert_eq!(s.p_ev[38], 7.0);
    }

    #[test]
    fn holds_set_point() {
        let (params, scenario) = inputs(5.0, 0);
        let s = naive_schedule(&params, &HemsModel::default(), &scenario).unwrap();
        // 5 kW needs three steps to lift the house from 18 °C to 20 °C
        assert!(s.t_house[2] < 20.0);
        for t in &s.t_house[3..] {
            assert!((t - 20.0).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn reduction_formula() {
        assert!((percent_reduction(16.0, 31.0) - 48.387).abs() < 1e-3);
        assert_eq!(percent_reduction(1.0, 0.0), 0.0);
    }
}
