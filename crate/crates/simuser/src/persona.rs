use chrono::{Datelike, Days, NaiveDate, NaiveTime, Timelike};
use hems_agent::{ParamValue, ParameterId};
use hems_core::HemsParameters;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mode::DifficultyMode;

pub const CITIES: [&str; 20] = [
    "London",
    "Oxford",
    "Manchester",
    "Birmingham",
    "Leeds",
    "Bristol",
    "Liverpool",
    "Sheffield",
    "Newcastle",
    "Nottingham",
    "Cambridge",
    "York",
    "Brighton",
    "Leicester",
    "Southampton",
    "Norwich",
    "Exeter",
    "Bath",
    "Coventry",
    "Reading",
];

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// What the simulated user knows about their household.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaGroundTruth {
    pub city: String,
    pub ev: u32,
    pub t_min: f64,
    pub t_max: f64,
    /// Arrival home in the afternoon or evening.
    pub arrival: NaiveTime,
    /// Departure in the morning.
    pub leaving: NaiveTime,
    pub date1: NaiveDate,
    pub date2: NaiveDate,
}

/// Draws a persona from fixed ranges: a city from [`CITIES`], 1 to 3
/// vehicles, a minimum of 16 to 19 °C with a band of 1 to 4 °C, arrival
/// between 16:00 and 21:30, departure between 06:00 and 09:30 (half hours),
/// and a 1 to 14 day period starting in 2024.
pub fn randomize_truth(seed: u64) -> PersonaGroundTruth {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let city = CITIES[rng.gen_range(0..CITIES.len())].to_owned();
    let ev = rng.gen_range(1..=3);
    let t_min = f64::from(rng.gen_range(16..=19));
    let t_max = t_min + f64::from(rng.gen_range(1..=4));
    let half_hour = |rng: &mut ChaCha8Rng, from: u32, slots: u32| {
        let m = from * 60 + 30 * rng.gen_range(0..slots);
        NaiveTime::from_hms_opt(m / 60, m % 60, 0).expect("within a day")
    };
    let arrival = half_hour(&mut rng, 16, 12);
    let leaving = half_hour(&mut rng, 6, 8);
    let first = NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date");
    let date1 = first + Days::new(rng.gen_range(0..366));
    let date2 = date1 + Days::new(rng.gen_range(1..=14));
    PersonaGroundTruth {
        city,
        ev,
        t_min,
        t_max,
        arrival,
        leaving,
        date1,
        date2,
    }
}

fn ordinal(day: u32) -> String {
    let suffix = match (day % 10, day % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{day}{suffix}")
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        x.to_string()
    }
}

/// 12-hour clock reading without the AM/PM marker: `7`, `7:30`.
fn twelve_hour(t: NaiveTime) -> String {
    let h = match t.hour() % 12 {
        0 => 12,
        h => h,
    };
    match t.minute() {
        0 => h.to_string(),
        m => format!("{h}:{m:02}"),
    }
}

fn meridiem(t: NaiveTime) -> &'static str {
    if t.hour() < 12 {
        "AM"
    } else {
        "PM"
    }
}

impl PersonaGroundTruth {
    pub fn from_parameters(p: &HemsParameters) -> Self {
        Self {
            city: p.city.clone(),
            ev: p.ev_count,
            t_min: p.t_min,
            t_max: p.t_max,
            arrival: p.ev_arrival_time,
            leaving: p.ev_departure_time,
            date1: p.date_start,
            date2: p.date_end,
        }
    }

    pub fn to_parameters(&self) -> HemsParameters {
        HemsParameters {
            date_start: self.date1,
            date_end: self.date2,
            ev_count: self.ev,
            city: self.city.clone(),
            ev_arrival_time: self.arrival,
            ev_departure_time: self.leaving,
            t_min: self.t_min,
            t_max: self.t_max,
        }
    }

    /// Consistency of the persona itself.
    pub fn check(&self) -> Result<(), String> {
        if self.t_min.is_nan() || self.t_max.is_nan() || self.t_min >= self.t_max {
            return Err(format!(
                "t_min {} is not below t_max {}",
                self.t_min, self.t_max
            ));
        }
        if self.date1 > self.date2 {
            return Err(format!(
                "date1 {} is after date2 {}",
                self.date1, self.date2
            ));
        }
        Ok(())
    }

    /// The value the agent should store for `p`.
    pub fn expected(&self, p: ParameterId) -> ParamValue {
        match p {
            ParameterId::City => ParamValue::Text(self.city.clone()),
            ParameterId::DateStart => ParamValue::Date(self.date1),
            ParameterId::DateEnd => ParamValue::Date(self.date2),
            ParameterId::Ev => ParamValue::Int(i64::from(self.ev)),
            ParameterId::EvArrivalTime => ParamValue::Time(self.arrival),
            ParameterId::EvDepartureTime => ParamValue::Time(self.leaving),
            ParameterId::TMin => ParamValue::Float(self.t_min),
            ParameterId::TMax => ParamValue::Float(self.t_max),
        }
    }

    fn date(&self, p: ParameterId) -> NaiveDate {
        if p == ParameterId::DateStart {
            self.date1
        } else {
            self.date2
        }
    }

    fn time(&self, p: ParameterId) -> NaiveTime {
        if p == ParameterId::EvArrivalTime {
            self.arrival
        } else {
            self.leaving
        }
    }

    /// Text substituted for the parameter's placeholder in the persona
    /// prompt. Medium and hard templates carry the AM/PM marker themselves.
    pub fn placeholder_value(&self, mode: DifficultyMode, p: ParameterId) -> String {
        use DifficultyMode::*;
        match p {
            ParameterId::City => self.city.clone(),
            ParameterId::Ev => self.ev.to_string(),
            ParameterId::TMin => number(self.t_min),
            ParameterId::TMax => number(self.t_max),
            ParameterId::EvArrivalTime | ParameterId::EvDepartureTime => match mode {
                Easy => self.time(p).format("%H:%M").to_string(),
                Medium | Hard => twelve_hour(self.time(p)),
            },
            ParameterId::DateStart | ParameterId::DateEnd => {
                let d = self.date(p);
                match mode {
                    Easy => d.format("%Y/%m/%d").to_string(),
                    Medium => d.format("%d-%m-%Y").to_string(),
                    Hard => format!(
                        "{}, {}, {}",
                        MONTHS[d.month0() as usize],
                        ordinal(d.day()),
                        d.year()
                    ),
                }
            }
        }
    }

    /// How the value is written inside an answer in `mode`.
    pub fn surface(&self, mode: DifficultyMode, p: ParameterId) -> String {
        let v = self.placeholder_value(mode, p);
        match (mode, p) {
            (
                DifficultyMode::Medium | DifficultyMode::Hard,
                ParameterId::EvArrivalTime | ParameterId::EvDepartureTime,
            ) => {
                format!("{v} {}", meridiem(self.time(p)))
            }
            _ => v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals() {
        let got: Vec<_> = [1, 2, 3, 4, 11, 12, 13, 21, 22, 23, 31].map(ordinal).into();
        assert_eq!(
            got,
            ["1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd", "23rd", "31st"]
        );
    }

    #[test]
    fn twelve_hour_readings() {
        let t = |h, m| NaiveTime::from_hms_opt(h, m, 0).unwrap();
        assert_eq!(twelve_hour(t(19, 0)), "7");
        assert_eq!(twelve_hour(t(21, 30)), "9:30");
        assert_eq!(twelve_hour(t(12, 0)), "12");
        assert_eq!(meridiem(t(9, 0)), "AM");
    }

    #[test]
    fn surfaces_of_the_demo_household() {
        let p = PersonaGroundTruth::from_parameters(&hems_core::demo_parameters());
        assert_eq!(
            p.surface(DifficultyMode::Easy, ParameterId::DateStart),
            "2024/09/16"
        );
        assert_eq!(
            p.surface(DifficultyMode::Medium, ParameterId::DateEnd),
            "22-09-2024"
        );
        assert_eq!(
            p.surface(DifficultyMode::Hard, ParameterId::DateEnd),
            "September, 22nd, 2024"
        );
        assert_eq!(
            p.surface(DifficultyMode::Medium, ParameterId::EvArrivalTime),
            "7 PM"
        );
        assert_eq!(
            p.surface(DifficultyMode::Easy, ParameterId::EvDepartureTime),
            "09:00"
        );
        assert_eq!(p.surface(DifficultyMode::Hard, ParameterId::TMax), "20");
        assert_eq!(p.to_parameters(), hems_core::demo_parameters());
    }

    #[test]
    fn same_seed_same_persona() {
        assert_eq!(randomize_truth(42), randomize_truth(42));
    }
}
