//! Scenario ingestion and schedule export.
//!
//! Scenario files carry the header `timestamp,pi_e,pi_s,p_solar,p_other,t_ext`
//! with ISO-8601 timestamps. The step length is inferred from the timestamps
//! and must be uniform.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::error::{HemsError, Result};
use crate::horizon::Horizon;
use crate::scenario::ScenarioSeries;
use crate::simulate::Schedule;

pub const SCENARIO_HEADER: [&str; 6] = ["timestamp", "pi_e", "pi_s", "p_solar", "p_other", "t_ext"];

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|t| t.naive_local())
}

pub fn load_scenario_csv(path: impl AsRef<Path>) -> Result<ScenarioSeries> {
    let file = std::fs::File::open(path)?;
    read_scenario_csv(file)
}

pub fn read_scenario_csv<R: Read>(reader: R) -> Result<ScenarioSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
        None => {
            return Err(HemsError::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let got: Vec<&str> = header.iter().collect();
    if got != SCENARIO_HEADER {
        let missing: Vec<_> = SCENARIO_HEADER
            .iter()
            .filter(|c| !got.contains(c))
            .collect();
        return Err(HemsError::Parse {
            line: 1,
            message: if missing.is_empty() {
                format!("header must be `{}`", SCENARIO_HEADER.join(","))
            } else {
                format!("missing columns: {missing:?}")
            },
        });
    }

    let mut timestamps = Vec::new();
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_error(e, line))?;
        if rec.len() != 6 {
            return Err(HemsError::Parse {
                line,
                message: format!("expected 6 fields, found {}", rec.len()),
            });
        }
        let ts = parse_timestamp(&rec[0]).ok_or_else(|| HemsError::Parse {
            line,
            message: format!("invalid timestamp `{}`", &rec[0]),
        })?;
        if let Some(prev) = timestamps.last() {
            if ts == *prev {
                return Err(HemsError::Parse {
                    line,
                    message: format!("duplicated timestamp {ts}"),
                });
            }
            if ts < *prev {
                return Err(HemsError::Parse {
                    line,
                    message: format!("timestamp {ts} is earlier than the previous row"),
                });
            }
        }
        timestamps.push(ts);
        for (c, col) in cols.iter_mut().enumerate() {
            let field = &rec[c + 1];
            let v: f64 = field.parse().map_err(|_| HemsError::Parse {
                line,
                message: format!(
                    "column {} is not a number: `{field}`",
                    SCENARIO_HEADER[c + 1]
                ),
            })?;
            col.push(v);
        }
    }

    if timestamps.len() < 2 {
        return Err(HemsError::Parse {
            line: timestamps.len() + 1,
            message: "at least two rows are needed to infer the step length".into(),
        });
    }
    let step = timestamps[1] - timestamps[0];
    for k in 2..timestamps.len() {
        if timestamps[k] - timestamps[k - 1] != step {
            return Err(HemsError::Parse {
                line: k + 2,
                message: "timestamps are not evenly spaced".into(),
            });
        }
    }
    let dt = step.num_milliseconds() as f64 / 3_600_000.0;

    let [pi_e, pi_s, p_solar, p_other, t_ext] = cols;
    ScenarioSeries::new(dt, timestamps, pi_e, pi_s, p_solar, p_other, t_ext)
}

fn csv_error(e: csv::Error, line: usize) -> HemsError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(line);
    HemsError::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn write_scenario_csv<W: Write>(scenario: &ScenarioSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCENARIO_HEADER).map_err(io_err)?;
    for k in 0..scenario.len() {
        w.write_record([
            scenario.timestamps[k]
                .format("%Y-%m-%dT%H:%M:%S")
                .to_string(),
            scenario.pi_e[k].to_string(),
            scenario.pi_s[k].to_string(),
            scenario.p_solar[k].to_string(),
            scenario.p_other[k].to_string(),
            scenario.t_ext[k].to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub const SCHEDULE_HEADER: [&str; 14] = [
    "timestamp",
    "pi_e",
    "pi_s",
    "p_solar",
    "p_other",
    "t_ext",
    "home",
    "p_heat",
    "p_ev",
    "p_total",
    "grid_import",
    "grid_export",
    "e_ev",
    "t_house",
];

/// One row per step (state columns at the step start) and a trailing
/// `total_cost,<£>` line.
pub fn write_schedule_csv<W: Write>(
    horizon: &Horizon,
    schedule: &Schedule,
    mut writer: W,
) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut writer);
        w.write_record(SCHEDULE_HEADER).map_err(io_err)?;
        let s = &horizon.scenario;
        for k in 0..schedule.steps() {
            w.write_record([
                s.timestamps[k].format("%Y-%m-%dT%H:%M:%S").to_string(),
                s.pi_e[k].to_string(),
                s.pi_s[k].to_string(),
                s.p_solar[k].to_string(),
                s.p_other[k].to_string(),
                s.t_ext[k].to_string(),
                u8::from(horizon.occupancy[k]).to_string(),
                schedule.p_heat[k].to_string(),
                schedule.p_ev[k].to_string(),
                schedule.p_total[k].to_string(),
                schedule.grid_import[k].to_string(),
                schedule.grid_export[k].to_string(),
                schedule.e_ev[k].to_string(),
                schedule.t_house[k].to_string(),
            ])
            .map_err(io_err)?;
        }
        w.flush()?;
    }
    writeln!(writer, "total_cost,{}", schedule.total_cost)?;
    Ok(())
}

fn io_err(e: csv::Error) -> HemsError {
    HemsError::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> String {
        let mut s = String::from("timestamp,pi_e,pi_s,p_solar,p_other,t_ext\n");
        for k in 0..n {
            s.push_str(&format!(
                "2024-09-16T{:02}:{:02}:00,0.3,0.05,0,0.4,11.5\n",
                k / 2,
                (k % 2) * 30
            ));
        }
        s
    }

    #[test]
    fn reads_a_day_at_half_hour_steps() {
        let s = read_scenario_csv(rows(48).as_bytes()).unwrap();
        assert_eq!(s.len(), 48);
        assert_eq!(s.dt, 0.5);
    }

    #[test]
    fn rejects_feed_in_above_import() {
        let text = rows(4).replace(
            "2024-09-16T01:00:00,0.3,0.05",
            "2024-09-16T01:00:00,0.3,0.4",
        );
        let err = read_scenario_csv(text.as_bytes()).unwrap_err();
        assert!(
            err.to_string().contains("feed-in exceeds import price"),
            "{err}"
        );
    }

    #[test]
    fn duplicated_timestamp_cites_row() {
        let mut text = rows(3);
        text.push_str("2024-09-16T01:00:00,0.3,0.05,0,0.4,11.5\n");
        match read_scenario_csv(text.as_bytes()).unwrap_err() {
            HemsError::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("duplicated"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rejects_missing_column_and_garbage() {
        let err =
            read_scenario_csv("timestamp,pi_e,pi_s,p_solar,p_other\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("t_ext"), "{err}");

        let text = rows(3).replace("11.5\n2024-09-16T00:30", "abc\n2024-09-16T00:30");
        assert!(matches!(
            read_scenario_csv(text.as_bytes()),
            Err(HemsError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn unsorted_rows_are_rejected() {
        let text = "timestamp,pi_e,pi_s,p_solar,p_other,t_ext\n\
                    2024-09-16T01:00:00,0.3,0.05,0,0.4,11\n\
                    2024-09-16T00:30:00,0.3,0.05,0,0.4,11\n";
        assert!(matches!(
            read_scenario_csv(text.as_bytes()),
            Err(HemsError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn accepts_offsets_and_round_trips() {
        let text = "timestamp,pi_e,pi_s,p_solar,p_other,t_ext\n\
                    2024-09-16T00:00:00+01:00,0.3,0.05,0,0.4,11\n\
                    2024-09-16T01:00:00+01:00,0.3,0.05,0,0.4,11\n";
        let s = read_scenario_csv(text.as_bytes()).unwrap();
        assert_eq!(s.dt, 1.0);
        let mut out = Vec::new();
        write_scenario_csv(&s, &mut out).unwrap();
        let back = read_scenario_csv(out.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
