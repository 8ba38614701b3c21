use std::fmt;

use serde::Serialize;

use crate::horizon::Horizon;
use crate::simulate::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub step: usize,
    pub constraint: &'static str,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn by_constraint<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.constraint == id)
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} at {} by {:.3e}", v.constraint, v.step, v.magnitude)?;
        }
        Ok(())
    }
}

struct Checker {
    tolerance: f64,
    report: ViolationReport,
}

impl Checker {
    /// Records `magnitude` when it exceeds the tolerance relative to `scale`.
    fn check(&mut self, constraint: &'static str, step: usize, magnitude: f64, scale: f64) {
        let limit = self.tolerance * scale.abs().max(1.0);
        if magnitude > limit || magnitude.is_nan() {
            self.report.violations.push(Violation {
                step,
                constraint,
                magnitude,
            });
        }
    }
}

/// Lists every constraint a schedule violates. Empty iff the schedule is
/// feasible within `tolerance` (relative to each constraint's scale).
pub fn validate(schedule: &Schedule, horizon: &Horizon, tolerance: f64) -> ViolationReport {
    let mut c = Checker {
        tolerance,
        report: ViolationReport::default(),
    };
    let n = horizon.steps();
    let per_step = [
        schedule.p_heat.len(),
        schedule.p_ev.len(),
        schedule.p_total.len(),
        schedule.grid_import.len(),
        schedule.grid_export.len(),
    ];
    if per_step.iter().any(|l| *l != n)
        || schedule.t_house.len() != n + 1
        || schedule.e_ev.len() != n + 1
    {
        c.report.violations.push(Violation {
            step: 0,
            constraint: "length",
            magnitude: f64::INFINITY,
        });
        return c.report;
    }

    let s = &horizon.scenario;
    let dt = s.dt;
    let thermal = horizon.model.thermal;
    let rating = horizon.model.heater_rating_kw;
    let (t_min, t_max) = (horizon.params.t_min, horizon.params.t_max);
    let t_scale = t_max.abs().max(t_min.abs());
    let has_ev = horizon.has_ev();
    let e_full = horizon.e_full();
    let e_scale = e_full.max(1.0);
    let p_ev_max = horizon.p_ev_max();

    let mut cost = 0.0;
    for k in 0..n {
        let (heat, ev) = (schedule.p_heat[k], schedule.p_ev[k]);
        let total = heat + ev + s.p_other[k];
        c.check(
            "power_balance",
            k,
            (schedule.p_total[k] - total).abs(),
            total,
        );

        let (imp, exp) = (schedule.grid_import[k], schedule.grid_export[k]);
        let net = schedule.p_total[k] - s.p_solar[k];
        c.check("grid_split", k, (imp - exp - net).abs(), net);
        c.check("grid_nonneg", k, (-imp).max(-exp).max(0.0), 1.0);
        cost += (s.pi_e[k] * imp - s.pi_s[k] * exp) * dt;

        c.check("heat_lower", k, (-heat).max(0.0), rating);
        c.check("heat_upper", k, (heat - rating).max(0.0), rating);

        c.check("ev_lower", k, (-ev).max(0.0), p_ev_max);
        if has_ev && horizon.occupancy[k] {
            c.check("ev_upper", k, (ev - p_ev_max).max(0.0), p_ev_max);
        } else {
            c.check("ev_away", k, ev.abs(), p_ev_max);
        }

        let t_next = thermal.step(schedule.t_house[k], s.t_ext[k], heat, dt);
        c.check(
            "temp_dynamics",
            k,
            (schedule.t_house[k + 1] - t_next).abs(),
            t_scale,
        );
    }

    c.check(
        "temp_initial",
        0,
        (schedule.t_house[0] - horizon.initial_temperature).abs(),
        t_scale,
    );
    for k in 1..=n {
        let t = schedule.t_house[k];
        c.check("temp_lower", k, (t_min - t).max(0.0), t_scale);
        c.check("temp_upper", k, (t - t_max).max(0.0), t_scale);
    }

    if has_ev {
        let e = &schedule.e_ev;
        let id = if horizon.occupancy[0] {
            "ev_start"
        } else {
            "ev_initial"
        };
        c.check(id, 0, (e[0] - horizon.initial_energy()).abs(), e_scale);
        for k in 0..n {
            if horizon.is_arrival(k + 1) {
                c.check(
                    "ev_start",
                    k + 1,
                    (e[k + 1] - horizon.e_init()).abs(),
                    e_scale,
                );
            } else {
                let expected = e[k] + schedule.p_ev[k] * dt;
                c.check("ev_dynamics", k, (e[k + 1] - expected).abs(), e_scale);
            }
        }
        for (k, &ek) in e.iter().enumerate().take(n + 1) {
            c.check("ev_capacity", k, (ek - e_full).max(-ek).max(0.0), e_scale);
        }
        for w in &horizon.windows {
            if let Some(depart) = w.depart {
                c.check("ev_end", depart, (e[depart] - e_full).abs(), e_scale);
            }
        }
    }

    c.check("cost", 0, (schedule.total_cost - cost).abs(), cost.abs());
    c.report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{HemsModel, HemsParameters};
    use crate::scenario::ScenarioSeries;
    use crate::simulate::{simulate, Decisions};
    use chrono::{NaiveDate, NaiveTime};

    fn horizon(ev_count: u32, t_ext: f64) -> Horizon {
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
        let model = HemsModel {
            heater_rating_kw: 50.0,
            ..Default::default()
        };
        Horizon::new(&params, &model, &scenario).unwrap()
    }

    #[test]
    fn single_upper_temperature_violation() {
        // hold 18 °C against 18 °C outside, then overheat in the last step so
        // only the final boundary leaves the band.
        let h = horizon(0, 18.0);
        let n = h.steps();
        let mut d = Decisions::zeros(n);
        let thermal = h.model.thermal;
        let (dt, t) = (h.dt(), 18.0);
        let target = h.params.t_max + 0.5;
        d.p_heat[n - 1] = (target - t - dt * thermal.alpha() * (18.0 - t)) / (dt * thermal.beta());
        let s = simulate(&h, &d);
        let report = validate(&s, &h, 1e-6);
        assert_eq!(report.len(), 1, "{report}");
        let v = &report.violations[0];
        assert_eq!(v.constraint, "temp_upper");
        assert_eq!(v.step, n);
        assert!((v.magnitude - 0.5).abs() < 1e-9);
    }

    #[test]
    fn missing_charge_is_caught_at_departure() {
        let h = horizon(1, 18.0);
        let s = simulate(&h, &Decisions::zeros(h.steps()));
        let report = validate(&s, &h, 1e-6);
        let ends: Vec<_> = report.by_constraint("ev_end").collect();
        assert_eq!(ends.len(), 1);
        assert_eq!(ends[0].step, 18);
        assert!((ends[0].magnitude - 32.0).abs() < 1e-9);
    }

    #[test]
    fn tampered_series_are_reported() {
        let h = horizon(1, 18.0);
        let mut d = Decisions::zeros(h.steps());
        for k in 0..16 {
            d.p_ev[k] = 4.0;
        }
        let mut s = simulate(&h, &d);
        assert!(validate(&s, &h, 1e-6).is_empty());

        s.p_ev[30] = 1.0; // away at 15:00
        s.grid_import[2] += 1.0;
        s.total_cost += 1.0;
        let report = validate(&s, &h, 1e-6);
        for id in ["ev_away", "grid_split", "cost", "power_balance"] {
            assert!(report.by_constraint(id).next().is_some(), "{id}: {report}");
        }
    }

    #[test]
    fn wrong_lengths_short_circuit() {
        let h = horizon(0, 18.0);
        let mut s = simulate(&h, &Decisions::zeros(h.steps()));
        s.t_house.pop();
        let report = validate(&s, &h, 1e-6);
        assert_eq!(report.violations[0].constraint, "length");
    }
}
