//! CSV formats shared between the library and the command line tool.
//!
//! All files use '.' decimal separators, '\n' line endings, and floats
//! rendered with 17 significant digits so values round-trip bit-exactly and
//! output is locale-independent.

use thiserror::Error;

use crate::censor::{CurrentStatusData, IntervalCensoredData};
use crate::dist::{DistError, ModelKind, ObservationSet};
use crate::mc::{RateDiagnostics, VarianceCurve};
use crate::step::StepDistribution;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// 17-significant-digit float rendering (1 digit + 16 decimals in
/// scientific notation); parses back to the identical f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_field(s: &str, line: usize) -> Result<f64, IoError> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| IoError::Malformed { line, reason: format!("bad number `{s}`: {e}") })
}

/// Renders a sample: one `s` column for the fixed model, `e,s` for mixed.
pub fn write_sample(obs: &ObservationSet) -> String {
    let mut out = String::new();
    match obs.kind() {
        ModelKind::Fixed => {
            out.push_str("s\n");
            for &s in obs.s_values() {
                out.push_str(&fmt_float(s));
                out.push('\n');
            }
        }
        ModelKind::Mixed => {
            out.push_str("e,s\n");
            for (&e, &s) in obs.e_values().iter().zip(obs.s_values()) {
                out.push_str(&fmt_float(e));
                out.push(',');
                out.push_str(&fmt_float(s));
                out.push('\n');
            }
        }
    }
    out
}

/// Parses a sample CSV, detecting the model from the header line.
pub fn parse_sample(text: &str) -> Result<ObservationSet, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(IoError::Malformed { line: 1, reason: "empty file".to_string() })?;
    let header = header.trim();
    match header {
        "s" => {
            let mut s = Vec::new();
            for (idx, row) in lines {
                let row = row.trim();
                if row.is_empty() {
                    continue;
                }
                s.push(parse_field(row, idx + 1)?);
            }
            Ok(ObservationSet::fixed(s)?)
        }
        "e,s" => {
            let mut e = Vec::new();
            let mut s = Vec::new();
            for (idx, row) in lines {
                let row = row.trim();
                if row.is_empty() {
                    continue;
                }
                let (a, b) = row.split_once(',').ok_or(IoError::Malformed {
                    line: idx + 1,
                    reason: "expected two comma-separated fields".to_string(),
                })?;
                e.push(parse_field(a, idx + 1)?);
                s.push(parse_field(b, idx + 1)?);
            }
            Ok(ObservationSet::mixed(e, s)?)
        }
        other => Err(IoError::Malformed {
            line: 1,
            reason: format!("unrecognized header `{other}` (expected `s` or `e,s`)"),
        }),
    }
}

/// `y,delta` rows of a current-status transform.
pub fn write_current_status(data: &CurrentStatusData) -> String {
    let mut out = String::from("y,delta\n");
    for (&y, &d) in data.y().iter().zip(data.delta()) {
        out.push_str(&fmt_float(y));
        out.push(',');
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

/// `y1,bucket` rows of a case-m interval censoring transform.
pub fn write_interval_censored(data: &IntervalCensoredData) -> String {
    let mut out = String::from("y1,bucket\n");
    for (&y, &b) in data.y1().iter().zip(data.bucket()) {
        out.push_str(&fmt_float(y));
        out.push(',');
        out.push_str(&b.to_string());
        out.push('\n');
    }
    out
}

/// `point,value` rows of a step estimator.
pub fn write_step(step: &StepDistribution) -> String {
    let mut out = String::from("point,value\n");
    for (&p, &v) in step.points().iter().zip(step.values()) {
        out.push_str(&fmt_float(p));
        out.push(',');
        out.push_str(&fmt_float(v));
        out.push('\n');
    }
    out
}

/// `t,empirical,theory_conjecture,theory_mixed,failures` rows of a variance
/// curve; the run-level failure count repeats on every row.
pub fn write_variance_curve(curve: &VarianceCurve) -> String {
    let mut out = String::from("t,empirical,theory_conjecture,theory_mixed,failures\n");
    for i in 0..curve.t.len() {
        out.push_str(&fmt_float(curve.t[i]));
        out.push(',');
        out.push_str(&fmt_float(curve.empirical_scaled_var[i]));
        out.push(',');
        out.push_str(&fmt_float(curve.theory_conjecture[i]));
        out.push(',');
        out.push_str(&fmt_float(curve.theory_mixed[i]));
        out.push(',');
        out.push_str(&curve.failures.to_string());
        out.push('\n');
    }
    out
}

/// `n,median_abs_An,median_abs_Bn` rows with the fitted log-log slopes in a
/// footer comment line.
pub fn write_rate_diagnostics(diag: &RateDiagnostics) -> String {
    let mut out = String::from("n,median_abs_An,median_abs_Bn\n");
    for i in 0..diag.n_values.len() {
        out.push_str(&diag.n_values[i].to_string());
        out.push(',');
        out.push_str(&fmt_float(diag.median_abs_an[i]));
        out.push(',');
        out.push_str(&fmt_float(diag.median_abs_bn[i]));
        out.push('\n');
    }
    out.push_str(&format!(
        "# fitted_slope_An={},fitted_slope_Bn={}\n",
        fmt_float(diag.fitted_slope_an),
        fmt_float(diag.fitted_slope_bn)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_round_trip_fixed() {
        let obs = ObservationSet::fixed(vec![0.1, 1.7, 2.3]).unwrap();
        let text = write_sample(&obs);
        assert!(text.starts_with("s\n"));
        assert_eq!(parse_sample(&text).unwrap(), obs);
    }

    #[test]
    fn sample_round_trip_mixed() {
        let obs = ObservationSet::mixed(vec![0.5, 1.5], vec![0.1, 2.3]).unwrap();
        let text = write_sample(&obs);
        assert!(text.starts_with("e,s\n"));
        assert_eq!(parse_sample(&text).unwrap(), obs);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let err = parse_sample("s\n0.5\nnot-a-number\n").unwrap_err();
        match err {
            IoError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_sample("w\n1.0\n").is_err());
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
        let x = 0.1f64;
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    proptest! {
        #[test]
        fn float_rendering_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
