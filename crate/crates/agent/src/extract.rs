//! Value spotting in free-form answers, used by the rule-based agent.

use std::sync::LazyLock;

use chrono::{NaiveDate, NaiveTime};
use regex::Regex;

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn month_number(name: &str) -> Option<u32> {
    let name = name.to_ascii_lowercase();
    MONTHS
        .iter()
        .position(|m| *m == name || (name.len() >= 3 && m.starts_with(name.as_str())))
        .map(|i| i as u32 + 1)
}

static MONTH: &str = r"(January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)";

static YMD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{4})[/-](\d{1,2})[/-](\d{1,2})\b").unwrap());
static DMY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{1,2})[/.-](\d{1,2})[/.-](\d{4})\b").unwrap());
static MONTH_FIRST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)\b{MONTH},?\s+(\d{{1,2}})(?:st|nd|rd|th)?(?:,?\s+(\d{{4}}))?\b"
    ))
    .unwrap()
});
static DAY_FIRST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+(?:of\s+)?{MONTH},?(?:\s+(\d{{4}}))?\b"
    ))
    .unwrap()
});
static CLOCK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(\d{1,2})(?::(\d{2}))?\s*(a\.?m\.?|p\.?m\.?)(?:[^a-z]|$)|\b(\d{1,2}):(\d{2})\b",
    )
    .unwrap()
});
static NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:^|[^\w.:/-])(-?\d+(?:\.\d+)?)(?:[^\w:/-]|\.(?:\D|$)|$)").unwrap()
});
static CITY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:in|from|at)\s+([A-Z][\w'’-]*(?:\s+(?:upon\s+)?[A-Z][\w'’-]*)*)").unwrap()
});

/// A date found in text with the exact span it was written as.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateMention {
    pub date: NaiveDate,
    pub raw: String,
    pub start: usize,
}

/// Dates in order of appearance. Day-month spellings without a year take
/// `default_year`.
pub fn dates(text: &str, default_year: i32) -> Vec<DateMention> {
    let mut found: Vec<DateMention> = Vec::new();
    let mut add = |start: usize, raw: &str, y: i32, m: u32, d: u32| {
        if let Some(date) = NaiveDate::from_ymd_opt(y, m, d) {
            if !found
                .iter()
                .any(|f| start < f.start + f.raw.len() && f.start < start + raw.len())
            {
                found.push(DateMention {
                    date,
                    raw: raw.to_owned(),
                    start,
                });
            }
        }
    };
    for c in YMD.captures_iter(text) {
        let m = c.get(0).unwrap();
        add(
            m.start(),
            m.as_str(),
            c[1].parse().unwrap_or(0),
            c[2].parse().unwrap_or(0),
            c[3].parse().unwrap_or(0),
        );
    }
    for c in DMY.captures_iter(text) {
        let m = c.get(0).unwrap();
        add(
            m.start(),
            m.as_str(),
            c[3].parse().unwrap_or(0),
            c[2].parse().unwrap_or(0),
            c[1].parse().unwrap_or(0),
        );
    }
    for c in MONTH_FIRST.captures_iter(text) {
        let m = c.get(0).unwrap();
        let year = c
            .get(3)
            .and_then(|y| y.as_str().parse().ok())
            .unwrap_or(default_year);
        if let Some(month) = month_number(&c[1]) {
            add(
                m.start(),
                m.as_str(),
                year,
                month,
                c[2].parse().unwrap_or(0),
            );
        }
    }
    for c in DAY_FIRST.captures_iter(text) {
        let m = c.get(0).unwrap();
        let year = c
            .get(3)
            .and_then(|y| y.as_str().parse().ok())
            .unwrap_or(default_year);
        if let Some(month) = month_number(&c[2]) {
            add(
                m.start(),
                m.as_str(),
                year,
                month,
                c[1].parse().unwrap_or(0),
            );
        }
    }
    found.sort_by_key(|f| f.start);
    found
}

/// Clock times in order of appearance, 12-hour forms converted.
pub fn times(text: &str) -> Vec<NaiveTime> {
    CLOCK
        .captures_iter(text)
        .filter_map(|c| {
            if let Some(h) = c.get(1) {
                let mut hour: u32 = h.as_str().parse().ok()?;
                let minute: u32 = c.get(2).map_or(Some(0), |m| m.as_str().parse().ok())?;
                let pm = c[3].to_ascii_lowercase().starts_with('p');
                if !(1..=12).contains(&hour) {
                    return None;
                }
                hour %= 12;
                if pm {
                    hour += 12;
                }
                NaiveTime::from_hms_opt(hour, minute, 0)
            } else {
                NaiveTime::from_hms_opt(c[4].parse().ok()?, c[5].parse().ok()?, 0)
            }
        })
        .collect()
}

/// Standalone numbers, skipping digits glued to letters (`XC40`) and parts
/// of dates or clock times.
pub fn numbers(text: &str) -> Vec<f64> {
    let mut out = Vec::new();
    let mut at = 0;
    while let Some(c) = NUMBER.captures_at(text, at) {
        let m = c.get(1).unwrap();
        if let Ok(v) = m.as_str().parse() {
            out.push(v);
        }
        at = m.end();
    }
    out
}

const NUMBER_WORDS: [&str; 11] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];

/// The first count in the text, as digits or a small number word.
pub fn first_count(text: &str) -> Option<i64> {
    let digits = numbers(text)
        .into_iter()
        .find(|v| v.fract() == 0.0 && *v >= 0.0)
        .map(|v| v as i64);
    digits.or_else(|| {
        text.split(|c: char| !c.is_alphabetic())
            .find_map(|w| NUMBER_WORDS.iter().position(|n| n.eq_ignore_ascii_case(w)))
            .map(|i| i as i64)
    })
}

const NOT_CITIES: [&str; 8] = [
    "England", "Scotland", "Wales", "Northern", "United", "UK", "Britain", "Great",
];

/// The first capitalised place name after "in", "from" or "at".
pub fn city(text: &str) -> Option<String> {
    CITY.captures_iter(text)
        .map(|c| c[1].trim_end_matches(['\'', '’']).to_owned())
        .find(|name| !NOT_CITIES.iter().any(|n| name.starts_with(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn date_spellings() {
        let cases = [
            (
                "I want the simulation to start on the 2024/09/16.",
                ymd(2024, 9, 16),
                "2024/09/16",
            ),
            ("on the 16-09-2024.", ymd(2024, 9, 16), "16-09-2024"),
            ("on 16/09/2024", ymd(2024, 9, 16), "16/09/2024"),
            (
                "between September, 16th, 2024 and",
                ymd(2024, 9, 16),
                "September, 16th, 2024",
            ),
            (
                "on the 22th of September.",
                ymd(2024, 9, 22),
                "22th of September",
            ),
            (
                "October 3, 2025 please",
                ymd(2025, 10, 3),
                "October 3, 2025",
            ),
        ];
        for (text, date, raw) in cases {
            let found = dates(text, 2024);
            assert_eq!(found.len(), 1, "{text}: {found:?}");
            assert_eq!(found[0].date, date, "{text}");
            assert_eq!(found[0].raw, raw, "{text}");
        }
        let two = dates(
            "between September, 16th, 2024 and September, 22nd, 2024.",
            2000,
        );
        assert_eq!(
            two.iter().map(|d| d.date).collect::<Vec<_>>(),
            vec![ymd(2024, 9, 16), ymd(2024, 9, 22)]
        );
    }

    #[test]
    fn clock_times() {
        let t = |h, m| NaiveTime::from_hms_opt(h, m, 0).unwrap();
        assert_eq!(times("I return at 7 PM (UK time)"), vec![t(19, 0)]);
        assert_eq!(times("I leave my house at 9 AM."), vec![t(9, 0)]);
        assert_eq!(times("back by 7:30 p.m. usually"), vec![t(19, 30)]);
        assert_eq!(times("I come back at 19:00."), vec![t(19, 0)]);
        assert_eq!(times("at 12 AM"), vec![t(0, 0)]);
        assert!(times("I own 2 cars").is_empty());
    }

    #[test]
    fn numbers_skip_model_names() {
        assert_eq!(
            numbers("I own 2 volvo XC40 and one diesel pickup truck."),
            vec![2.0]
        );
        assert_eq!(
            numbers("between 18 and 20 degrees Celsius."),
            vec![18.0, 20.0]
        );
        assert_eq!(numbers("is 18.5 °C."), vec![18.5]);
        assert_eq!(numbers("on 2024/09/16 at 19:00"), Vec::<f64>::new());
        assert_eq!(first_count("I have two cars"), Some(2));
        assert_eq!(first_count("I own 2 electric vehicles."), Some(2));
    }

    #[test]
    fn city_names() {
        assert_eq!(
            city("I live in Oxford on Banbury Rd.").as_deref(),
            Some("Oxford")
        );
        assert_eq!(
            city("I live in London in England, in a house.").as_deref(),
            Some("London")
        );
        assert_eq!(
            city("I live in Milton Keynes.").as_deref(),
            Some("Milton Keynes")
        );
        assert_eq!(
            city("I live in England, in Newcastle upon Tyne.").as_deref(),
            Some("Newcastle upon Tyne")
        );
        assert_eq!(city("I don't understand the question."), None);
    }
}
