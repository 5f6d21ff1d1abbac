use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::MonitorRecord;
use crate::error::{Error, Result};

/// Exported columns, in order.
pub const COLUMNS: [&str; 13] = [
    "t",
    "besov_u_p",
    "besov_b_inf",
    "besov_omega_p",
    "besov_J_p",
    "hs_modified",
    "integral_1_8",
    "integral_1_9",
    "envelope_4_8",
    "envelope_4_15",
    "envelope_4_18",
    "grad_inf",
    "logsob_rhs",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    Csv,
    Jsonl,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Jsonl => "jsonl",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::param(format!("unknown export format '{other}' (expected csv or jsonl)"))),
        }
    }
}

fn values(r: &MonitorRecord) -> [f64; 13] {
    [
        r.t,
        r.besov_u_p,
        r.besov_b_inf,
        r.besov_omega_p,
        r.besov_j_p,
        r.hs_modified,
        r.integral_1_8,
        r.integral_1_9,
        r.envelope_4_8,
        r.envelope_4_15,
        r.envelope_4_18,
        r.grad_inf,
        r.logsob_rhs,
    ]
}

fn from_values(v: [f64; 13]) -> MonitorRecord {
    MonitorRecord {
        t: v[0],
        besov_u_p: v[1],
        besov_b_inf: v[2],
        besov_omega_p: v[3],
        besov_j_p: v[4],
        hs_modified: v[5],
        integral_1_8: v[6],
        integral_1_9: v[7],
        envelope_4_8: v[8],
        envelope_4_15: v[9],
        envelope_4_18: v[10],
        grad_inf: v[11],
        logsob_rhs: v[12],
        ..MonitorRecord::default()
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus one row per record. Non-finite values print as NaN, inf, -inf.
pub fn write_csv(records: &[MonitorRecord]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let row: Vec<String> = values(r)
            .iter()
            .map(|&x| if x.is_finite() { number(x) } else { format!("{x}") })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One JSON object per line with the CSV keys; non-finite values are null.
pub fn write_jsonl(records: &[MonitorRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('{');
        for (i, (k, x)) in COLUMNS.iter().zip(values(r)).enumerate() {
            if i > 0 {
                out.push(',');
            }
            let v = if x.is_finite() { number(x) } else { "null".to_string() };
            let _ = write!(out, "\"{k}\":{v}");
        }
        out.push_str("}\n");
    }
    out
}

pub fn export(records: &[MonitorRecord], path: &Path, format: ExportFormat) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => write_csv(records),
        ExportFormat::Jsonl => write_jsonl(records),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<MonitorRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
    if header != COLUMNS.join(",") {
        return Err(Error::Format(format!("unexpected CSV header '{header}'")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != COLUMNS.len() {
                return Err(Error::Format(format!("row {}: expected {} cells", i + 1, COLUMNS.len())));
            }
            let mut v = [0.0; 13];
            for (slot, cell) in v.iter_mut().zip(cells) {
                *slot = cell
                    .parse()
                    .map_err(|_| Error::Format(format!("row {}: bad number '{cell}'", i + 1)))?;
            }
            Ok(from_values(v))
        })
        .collect()
}

pub fn parse_jsonl(text: &str) -> Result<Vec<MonitorRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let obj: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(line).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
            let mut v = [0.0; 13];
            for (slot, key) in v.iter_mut().zip(COLUMNS) {
                *slot = match obj.get(key) {
                    Some(serde_json::Value::Null) => f64::NAN,
                    Some(x) => x
                        .as_f64()
                        .ok_or_else(|| Error::Format(format!("line {}: '{key}' is not a number", i + 1)))?,
                    None => return Err(Error::Format(format!("line {}: missing key '{key}'", i + 1))),
                };
            }
            Ok(from_values(v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: f64) -> MonitorRecord {
        let mut v = [0.0; 13];
        for (i, x) in v.iter_mut().enumerate() {
            *x = (seed + i as f64).sin() * 10f64.powi(i as i32 - 6) + 1.0 / 3.0;
        }
        from_values(v)
    }

    #[test]
    fn empty_csv_is_header_only() {
        let text = write_csv(&[]);
        assert_eq!(text, format!("{}\n", COLUMNS.join(",")));
        assert!(parse_csv(&text).unwrap().is_empty());
        assert_eq!(write_jsonl(&[]), "");
    }

    #[test]
    fn one_record_one_row() {
        let text = write_csv(&[record(1.0)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 13);
    }

    #[test]
    fn round_trips_are_bit_exact() {
        let recs: Vec<MonitorRecord> = (0..5).map(|i| record(i as f64 * 0.7)).collect();
        let back = parse_jsonl(&write_jsonl(&recs)).unwrap();
        for (a, b) in recs.iter().zip(&back) {
            for (x, y) in values(a).iter().zip(values(b)) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let back = parse_csv(&write_csv(&recs)).unwrap();
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(values(a).map(f64::to_bits), values(b).map(f64::to_bits));
        }
    }

    #[test]
    fn non_finite_values() {
        let mut r = record(0.0);
        r.envelope_4_18 = f64::INFINITY;
        r.grad_inf = f64::NAN;
        let back = parse_csv(&write_csv(std::slice::from_ref(&r))).unwrap();
        assert_eq!(back[0].envelope_4_18, f64::INFINITY);
        assert!(back[0].grad_inf.is_nan());
        let line = write_jsonl(std::slice::from_ref(&r));
        assert!(line.contains("\"grad_inf\":null"));
        assert!(parse_jsonl(&line).unwrap()[0].grad_inf.is_nan());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = std::env::temp_dir().join(format!("tfmhd-export-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let blocker = dir.join("file");
        fs::write(&blocker, "x").unwrap();
        let err = export(&[], &blocker.join("out.csv"), ExportFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("file"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
