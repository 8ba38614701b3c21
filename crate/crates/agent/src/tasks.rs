//! The eight household parameters, their retrieval tasks and the `store`
//! validation that turns raw tool input into canonical values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveTime};
use hems_core::{HemsError, HemsParameters};
use serde::{Deserialize, Serialize, Serializer};

use crate::parser::ActionInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterId {
    City,
    DateStart,
    DateEnd,
    #[serde(rename = "ev_count")]
    Ev,
    EvArrivalTime,
    EvDepartureTime,
    TMin,
    TMax,
}

impl ParameterId {
    /// In dialogue order.
    pub const ALL: [ParameterId; 8] = [
        Self::City,
        Self::DateStart,
        Self::DateEnd,
        Self::Ev,
        Self::EvArrivalTime,
        Self::EvDepartureTime,
        Self::TMin,
        Self::TMax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::City => "city",
            Self::DateStart => "date_start",
            Self::DateEnd => "date_end",
            Self::Ev => "ev_count",
            Self::EvArrivalTime => "ev_arrival_time",
            Self::EvDepartureTime => "ev_departure_time",
            Self::TMin => "t_min",
            Self::TMax => "t_max",
        }
    }

    pub fn format(self) -> ExpectedFormat {
        match self {
            Self::City => ExpectedFormat::String,
            Self::DateStart | Self::DateEnd => ExpectedFormat::Datetime,
            Self::Ev => ExpectedFormat::Int,
            Self::EvArrivalTime | Self::EvDepartureTime => ExpectedFormat::Time,
            Self::TMin | Self::TMax => ExpectedFormat::Float,
        }
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedFormat {
    Datetime,
    Int,
    String,
    Time,
    Float,
}

impl ExpectedFormat {
    pub fn pattern(self) -> &'static str {
        match self {
            Self::Datetime => "YYYY/MM/DD",
            Self::Int => "integer",
            Self::String => "non-empty string",
            Self::Time => "HH:MM",
            Self::Float => "decimal number",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Self::Datetime => "a date string in the format YYYY/MM/DD",
            Self::Int => "an integer",
            Self::String => "a non-empty string",
            Self::Time => "a time string in the 24-hour format HH:MM",
            Self::Float => "a number",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTask {
    pub parameter: ParameterId,
    pub text: String,
    pub format: ExpectedFormat,
    pub pattern: String,
}

impl ParameterTask {
    pub fn new(parameter: ParameterId, text: impl Into<String>) -> Self {
        let format = parameter.format();
        Self {
            parameter,
            text: text.into(),
            format,
            pattern: format.pattern().into(),
        }
    }
}

/// One task per parameter, in dialogue order.
pub fn standard_tasks() -> Vec<ParameterTask> {
    use ParameterId::*;
    vec![
        ParameterTask::new(City, "Find the user's city in the United Kingdom and store it (city must be a string)."),
        ParameterTask::new(DateStart, "Find the date when the user wants the simulation to start and store it (date must be a string in the format YYYY/MM/DD)."),
        ParameterTask::new(DateEnd, "Find the date when the user wants the simulation to end and store it (date must be a string in the format YYYY/MM/DD)."),
        ParameterTask::new(Ev, "Find the user's number of electric vehicles and store it (number must be an integer)."),
        ParameterTask::new(EvArrivalTime, "Find the time when the user comes back home and store it (time must be a string in the format HH:MM)."),
        ParameterTask::new(EvDepartureTime, "Find the time when the user leaves the house and store it (time must be a string in the format HH:MM)."),
        ParameterTask::new(TMin, "Find the user's minimum house comfort temperature and store it (temperature must be a float in degrees Celsius)."),
        ParameterTask::new(TMax, "Find the user's maximum house comfort temperature and store it (temperature must be a float in degrees Celsius)."),
    ]
}

/// A validated parameter value. Serializes to its canonical form: dates as
/// `YYYY/MM/DD`, times as `HH:MM`, numbers as JSON numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Date(NaiveDate),
    Time(NaiveTime),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn canonical(&self) -> String {
        match self {
            Self::Date(d) => d.format("%Y/%m/%d").to_string(),
            Self::Time(t) => t.format("%H:%M").to_string(),
            Self::Int(i) => i.to_string(),
            Self::Float(f) => f.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Int(i) => s.serialize_i64(*i),
            Self::Float(f) => s.serialize_f64(*f),
            other => s.serialize_str(&other.canonical()),
        }
    }
}

pub const STORE_SUCCESS: &str = "The value was correctly assigned. The task is done";

#[derive(Debug, Clone, PartialEq)]
pub enum StoreOutcome {
    Stored(ParamValue),
    Rejected(String),
}

impl StoreOutcome {
    /// Text returned to the agent as the observation.
    pub fn observation(&self, format: ExpectedFormat) -> String {
        match self {
            Self::Stored(_) => STORE_SUCCESS.to_owned(),
            Self::Rejected(reason) => format!(
                "The value could not be assigned: {reason}. The value must be {}.",
                format.describe()
            ),
        }
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let parts: Vec<&str> = s.split('/').collect();
    let ok = parts.len() == 3
        && parts[0].len() == 4
        && parts[1..].iter().all(|p| (1..=2).contains(&p.len()))
        && parts.iter().all(|p| p.bytes().all(|b| b.is_ascii_digit()));
    if !ok {
        return None;
    }
    NaiveDate::from_ymd_opt(
        parts[0].parse().ok()?,
        parts[1].parse().ok()?,
        parts[2].parse().ok()?,
    )
}

fn parse_time(s: &str) -> Option<NaiveTime> {
    let (h, m) = s.split_once(':')?;
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !(digits(h) && h.len() <= 2 && digits(m) && m.len() == 2) {
        return None;
    }
    NaiveTime::from_hms_opt(h.parse().ok()?, m.parse().ok()?, 0)
}

/// Coerces `raw` to the task's format.
pub fn store_validate(task: &ParameterTask, raw: &ActionInput) -> StoreOutcome {
    use ActionInput as A;
    let reject = |why: String| StoreOutcome::Rejected(why);
    match (task.format, raw) {
        (_, A::List(_)) => reject("a list was given".into()),
        (ExpectedFormat::String, A::Text(s)) => {
            let s = s.trim();
            if s.is_empty() {
                reject("the string is empty".into())
            } else {
                StoreOutcome::Stored(ParamValue::Text(s.to_owned()))
            }
        }
        (ExpectedFormat::String, other) => reject(format!("{} is not a string", other.render())),
        (ExpectedFormat::Datetime, A::Text(s)) => match parse_date(s.trim()) {
            Some(d) => StoreOutcome::Stored(ParamValue::Date(d)),
            None => reject(format!("\"{s}\" is not a valid YYYY/MM/DD date")),
        },
        (ExpectedFormat::Time, A::Text(s)) => match parse_time(s.trim()) {
            Some(t) => StoreOutcome::Stored(ParamValue::Time(t)),
            None => reject(format!("\"{s}\" is not a valid HH:MM time")),
        },
        (ExpectedFormat::Datetime | ExpectedFormat::Time, other) => {
            reject(format!("{} is not a string", other.render()))
        }
        (ExpectedFormat::Int, input) => {
            let value = match input {
                A::Int(i) => Some(*i),
                A::Float(f) if f.fract() == 0.0 && f.abs() < 9e15 => Some(*f as i64),
                A::Text(s) => s.trim().parse::<i64>().ok(),
                _ => None,
            };
            match value {
                Some(i) if task.parameter == ParameterId::Ev && i < 0 => {
                    reject(format!("{i} is negative"))
                }
                Some(i) => StoreOutcome::Stored(ParamValue::Int(i)),
                None => reject(format!("{} is not an integer", input.render())),
            }
        }
        (ExpectedFormat::Float, input) => {
            let value = match input {
                A::Int(i) => Some(*i as f64),
                A::Float(f) => Some(*f),
                A::Text(s) => s.trim().parse::<f64>().ok(),
                _ => None,
            };
            match value.filter(|f| f.is_finite()) {
                Some(f) => StoreOutcome::Stored(ParamValue::Float(f)),
                None => reject(format!("{} is not a number", input.render())),
            }
        }
    }
}

/// Builds the optimizer inputs from a complete set of stored values.
pub fn assemble_parameters(
    stored: &BTreeMap<ParameterId, ParamValue>,
) -> Result<HemsParameters, HemsError> {
    let get = |id: ParameterId| {
        stored
            .get(&id)
            .ok_or_else(|| HemsError::InvalidParameters(format!("{id} was not retrieved")))
    };
    let wrong = |id: ParameterId, v: &ParamValue| {
        HemsError::InvalidParameters(format!(
            "{id} holds `{v}`, expected {}",
            id.format().pattern()
        ))
    };
    let date = |id| match get(id)? {
        ParamValue::Date(d) => Ok(*d),
        v => Err(wrong(id, v)),
    };
    let time = |id| match get(id)? {
        ParamValue::Time(t) => Ok(*t),
        v => Err(wrong(id, v)),
    };
    let float = |id| match get(id)? {
        ParamValue::Float(f) => Ok(*f),
        ParamValue::Int(i) => Ok(*i as f64),
        v => Err(wrong(id, v)),
    };
    let ev_count = match get(ParameterId::Ev)? {
        ParamValue::Int(i) => u32::try_from(*i)
            .map_err(|_| HemsError::InvalidParameters(format!("ev_count {i} out of range")))?,
        v => return Err(wrong(ParameterId::Ev, v)),
    };
    let city = match get(ParameterId::City)? {
        ParamValue::Text(s) => s.clone(),
        v => return Err(wrong(ParameterId::City, v)),
    };
    let params = HemsParameters {
        date_start: date(ParameterId::DateStart)?,
        date_end: date(ParameterId::DateEnd)?,
        ev_count,
        city,
        ev_arrival_time: time(ParameterId::EvArrivalTime)?,
        ev_departure_time: time(ParameterId::EvDepartureTime)?,
        t_min: float(ParameterId::TMin)?,
        t_max: float(ParameterId::TMax)?,
    };
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: ParameterId) -> ParameterTask {
        standard_tasks()
            .into_iter()
            .find(|t| t.parameter == id)
            .unwrap()
    }

    fn text(s: &str) -> ActionInput {
        ActionInput::Text(s.into())
    }

    #[test]
    fn city_is_stored_verbatim() {
        let out = store_validate(&task(ParameterId::City), &text("Oxford"));
        assert_eq!(out, StoreOutcome::Stored(ParamValue::Text("Oxford".into())));
        assert_eq!(
            out.observation(ExpectedFormat::String),
            "The value was correctly assigned. The task is done"
        );
        assert!(matches!(
            store_validate(&task(ParameterId::City), &text("  ")),
            StoreOutcome::Rejected(_)
        ));
    }

    #[test]
    fn ev_requires_an_integer() {
        let t = task(ParameterId::Ev);
        let out = store_validate(&t, &text("two"));
        assert!(matches!(out, StoreOutcome::Rejected(_)));
        assert!(out.observation(t.format).contains("must be an integer"));
        assert_eq!(
            store_validate(&t, &ActionInput::Int(2)),
            StoreOutcome::Stored(ParamValue::Int(2))
        );
        assert_eq!(
            store_validate(&t, &text(" 2 ")),
            StoreOutcome::Stored(ParamValue::Int(2))
        );
        assert_eq!(
            store_validate(&t, &ActionInput::Float(2.0)),
            StoreOutcome::Stored(ParamValue::Int(2))
        );
        assert!(matches!(
            store_validate(&t, &ActionInput::Float(2.5)),
            StoreOutcome::Rejected(_)
        ));
        assert!(matches!(
            store_validate(&t, &ActionInput::Int(-1)),
            StoreOutcome::Rejected(_)
        ));
    }

    #[test]
    fn dates_must_be_year_first() {
        let t = task(ParameterId::DateStart);
        assert!(matches!(
            store_validate(&t, &text("16/09/2024")),
            StoreOutcome::Rejected(_)
        ));
        assert!(matches!(
            store_validate(&t, &text("2024-09-16")),
            StoreOutcome::Rejected(_)
        ));
        assert!(matches!(
            store_validate(&t, &text("2024/02/30")),
            StoreOutcome::Rejected(_)
        ));
        let ok = store_validate(&t, &text("2024/09/16"));
        assert_eq!(
            ok,
            StoreOutcome::Stored(ParamValue::Date(
                NaiveDate::from_ymd_opt(2024, 9, 16).unwrap()
            ))
        );
        assert_eq!(
            store_validate(&t, &text("2024/9/6")),
            StoreOutcome::Stored(ParamValue::Date(
                NaiveDate::from_ymd_opt(2024, 9, 6).unwrap()
            ))
        );
    }

    #[test]
    fn times_accept_one_or_two_hour_digits() {
        let t = task(ParameterId::EvDepartureTime);
        let nine =
            StoreOutcome::Stored(ParamValue::Time(NaiveTime::from_hms_opt(9, 0, 0).unwrap()));
        assert_eq!(store_validate(&t, &text("9:00")), nine);
        assert_eq!(store_validate(&t, &text("09:00")), nine);
        for bad in ["9 AM", "24:00", "9:0", "19:00:00", "nine"] {
            assert!(
                matches!(store_validate(&t, &text(bad)), StoreOutcome::Rejected(_)),
                "{bad}"
            );
        }
        if let StoreOutcome::Stored(v) = nine {
            assert_eq!(v.canonical(), "09:00");
        }
    }

    #[test]
    fn floats_accept_numeric_strings() {
        let t = task(ParameterId::TMin);
        assert_eq!(
            store_validate(&t, &ActionInput::Int(18)),
            StoreOutcome::Stored(ParamValue::Float(18.0))
        );
        assert_eq!(
            store_validate(&t, &text("18.5")),
            StoreOutcome::Stored(ParamValue::Float(18.5))
        );
        assert!(matches!(
            store_validate(&t, &text("18 degrees")),
            StoreOutcome::Rejected(_)
        ));
        assert!(matches!(
            store_validate(&t, &text("NaN")),
            StoreOutcome::Rejected(_)
        ));
    }

    #[test]
    fn canonical_serialization() {
        let v = serde_json::to_string(&[
            ParamValue::Date(NaiveDate::from_ymd_opt(2024, 9, 16).unwrap()),
            ParamValue::Time(NaiveTime::from_hms_opt(9, 0, 0).unwrap()),
            ParamValue::Int(2),
            ParamValue::Float(18.0),
            ParamValue::Text("London".into()),
        ])
        .unwrap();
        assert_eq!(v, r#"["2024/09/16","09:00",2,18.0,"London"]"#);
    }

    #[test]
    fn parameter_ids_parse() {
        for id in ParameterId::ALL {
            assert_eq!(id.as_str().parse::<ParameterId>().unwrap(), id);
        }
        assert_eq!(standard_tasks().len(), 8);
    }
}
