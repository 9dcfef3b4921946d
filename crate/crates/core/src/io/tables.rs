use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harness::{RegretTrace, Summary};
use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 5] = ["algorithm", "epsilon", "run_id", "t", "cum_regret"];

/// One checkpoint of one run, as stored in `traces.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFileRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub run_id: u32,
    pub t: u64,
    pub cum_regret: f64,
}

/// Formats a real with 17 significant digits, `%.17g` style: fixed notation
/// for exponents in `[-5, 17)`, otherwise scientific; trailing zeros dropped.
/// Parsing the output gives back the same bits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `algorithm,epsilon,run_id,t,cum_regret`, one row per checkpoint.
pub fn write_traces(traces: &[RegretTrace], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for tr in traces {
        let eps = format_real(tr.epsilon);
        let run = tr.run_id.to_string();
        for &(t, regret) in &tr.checkpoints {
            w.write_record([
                tr.algorithm.as_str(),
                &eps,
                &run,
                &t.to_string(),
                &format_real(regret),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_traces(path: impl AsRef<Path>) -> Result<Vec<TraceFileRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::InvalidInput(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(csv_err(path)))
        .collect()
}

/// Regroups rows into traces, preserving file order.
pub fn traces_from_rows(rows: &[TraceFileRow]) -> Vec<RegretTrace> {
    let mut out: Vec<RegretTrace> = Vec::new();
    for row in rows {
        let same = out.last().is_some_and(|tr| {
            tr.algorithm == row.algorithm
                && tr.epsilon.to_bits() == row.epsilon.to_bits()
                && tr.run_id == row.run_id
        });
        if !same {
            out.push(RegretTrace {
                run_id: row.run_id,
                algorithm: row.algorithm.clone(),
                epsilon: row.epsilon,
                checkpoints: Vec::new(),
            });
        }
        out.last_mut()
            .unwrap()
            .checkpoints
            .push((row.t, row.cum_regret));
    }
    out
}

pub fn write_summary(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record([
        "algorithm",
        "epsilon",
        "runs",
        "t",
        "mean",
        "sd",
        "min",
        "max",
    ])
    .map_err(csv_err(path))?;
    for row in &summary.rows {
        for c in &row.checkpoints {
            w.write_record([
                row.algorithm.clone(),
                format_real(row.epsilon),
                row.runs.to_string(),
                c.t.to_string(),
                format_real(c.mean),
                format_real(c.sd),
                format_real(c.min),
                format_real(c.max),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a flat key/value JSON object.
pub fn write_manifest(entries: &[(&str, serde_json::Value)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let map: serde_json::Map<String, serde_json::Value> = entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .expect("JSON values serialize");
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(alg: &str, run: u32, points: &[(u64, f64)]) -> RegretTrace {
        RegretTrace {
            run_id: run,
            algorithm: alg.into(),
            epsilon: 0.25,
            checkpoints: points.to_vec(),
        }
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(15.0), "15");
        assert_eq!(format_real(0.25), "0.25");
        assert_eq!(format_real(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_real(1e20), "1e+20");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(0.0), "0");
    }

    #[test]
    fn empty_trace_list_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_traces(&[], &p).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "algorithm,epsilon,run_id,t,cum_regret\n"
        );
        assert!(read_traces(&p).unwrap().is_empty());
    }

    #[test]
    fn one_trace_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_traces(&[trace("alucb", 2, &[(1, 0.0), (2, 0.05), (4, 0.1)])], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        assert_eq!(
            text.lines().nth(2).unwrap(),
            "alucb,0.25,2,2,0.050000000000000003"
        );
    }

    #[test]
    fn awkward_names_are_quoted() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let tr = trace("odd,\"name\"", 0, &[(1, 1.0)]);
        write_traces(std::slice::from_ref(&tr), &p).unwrap();
        assert!(std::fs::read_to_string(&p)
            .unwrap()
            .contains("\"odd,\"\"name\"\"\""));
        assert_eq!(traces_from_rows(&read_traces(&p).unwrap()), vec![tr]);
    }

    #[test]
    fn write_to_missing_directory_names_path() {
        let err = write_traces(&[], "/nonexistent/dir/t.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/t.csv"));
    }

    proptest! {
        #[test]
        fn format_real_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_real(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn csv_round_trip_is_bit_exact(
            values in proptest::collection::vec(0.0f64..1e7, 1..20),
            eps in 1e-3f64..200.0,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("t.csv");
            let tr = RegretTrace {
                run_id: 7,
                algorithm: "hybrid".into(),
                epsilon: eps,
                checkpoints: values.iter().enumerate().map(|(i, &v)| (1u64 << i, v)).collect(),
            };
            write_traces(std::slice::from_ref(&tr), &p).unwrap();
            let back = traces_from_rows(&read_traces(&p).unwrap());
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(back[0].epsilon.to_bits(), eps.to_bits());
            for (a, b) in back[0].checkpoints.iter().zip(&tr.checkpoints) {
                prop_assert_eq!(a.0, b.0);
                prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
            }
        }
    }
}
