//! Canonical forms for comparing stored values with the ground truth.

use chrono::{NaiveDate, NaiveTime};
use hems_agent::ExpectedFormat;

fn date(raw: &str) -> Option<NaiveDate> {
    ["%Y/%m/%d", "%Y-%m-%d", "%d-%m-%Y", "%d/%m/%Y", "%d.%m.%Y"]
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(raw, f).ok())
}

fn time(raw: &str) -> Option<NaiveTime> {
    let compact = raw.replace(' ', "").to_ascii_uppercase();
    let (clock, offset) = match compact
        .strip_suffix("PM")
        .or_else(|| compact.strip_suffix("AM"))
    {
        Some(c) => (c, if compact.ends_with("PM") { 12 } else { 0 }),
        None => {
            return ["%H:%M", "%H:%M:%S"]
                .iter()
                .find_map(|f| NaiveTime::parse_from_str(&compact, f).ok())
        }
    };
    let (h, m) = clock.split_once(':').unwrap_or((clock, "0"));
    let (h, m): (u32, u32) = (h.parse().ok()?, m.parse().ok()?);
    if !(1..=12).contains(&h) {
        return None;
    }
    NaiveTime::from_hms_opt(h % 12 + offset, m, 0)
}

/// The canonical spelling of `raw` for `format`: `YYYY/MM/DD` dates,
/// `HH:MM` times, shortest round-trip numbers, trimmed strings. `None` when
/// `raw` cannot be read as that format.
pub fn canonicalize(format: ExpectedFormat, raw: &str) -> Option<String> {
    let raw = raw.trim();
    match format {
        ExpectedFormat::Datetime => date(raw).map(|d| d.format("%Y/%m/%d").to_string()),
        ExpectedFormat::Time => time(raw).map(|t| t.format("%H:%M").to_string()),
        ExpectedFormat::Int | ExpectedFormat::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(|x| if x == 0.0 { 0.0 } else { x }.to_string()),
        ExpectedFormat::String => (!raw.is_empty()).then(|| raw.to_owned()),
    }
}

/// Whether a stored value counts as the expected one. Strings are compared
/// case-sensitively in both modes; `strict` also skips canonicalization.
pub fn values_match(format: ExpectedFormat, expected: &str, stored: &str, strict: bool) -> bool {
    if strict {
        return expected == stored;
    }
    match (canonicalize(format, expected), canonicalize(format, stored)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_matters_for_cities() {
        assert!(!values_match(
            ExpectedFormat::String,
            "Oxford",
            "OXFORD",
            false
        ));
        assert!(values_match(
            ExpectedFormat::String,
            "Oxford",
            " Oxford",
            false
        ));
    }

    #[test]
    fn equivalent_dates_match_unless_strict() {
        assert!(values_match(
            ExpectedFormat::Datetime,
            "16-09-2024",
            "2024/09/16",
            false
        ));
        assert!(!values_match(
            ExpectedFormat::Datetime,
            "16-09-2024",
            "2024/09/16",
            true
        ));
        assert!(!values_match(
            ExpectedFormat::Datetime,
            "2024/09/17",
            "2024/09/16",
            false
        ));
    }

    #[test]
    fn times_and_numbers() {
        assert!(values_match(ExpectedFormat::Time, "19:00", "7 PM", false));
        assert!(values_match(ExpectedFormat::Time, "09:00", "9:00", false));
        assert!(values_match(ExpectedFormat::Float, "18", "18.0", false));
        assert!(values_match(ExpectedFormat::Int, "2", "2.0", false));
        assert!(!values_match(ExpectedFormat::Int, "2", "two", false));
    }
}
