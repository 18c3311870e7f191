use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutputFormat};
use super::sweep::SweepPointResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "policy",
    "sweep_var",
    "sweep_value",
    "p_align",
    "ci95",
    "spectral_eff_bps_hz",
    "iterations",
    "seed",
];

/// JSON output: the resolved config alongside the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub config: ExperimentConfig,
    pub results: Vec<SweepPointResult>,
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into an extra digit (e.g. 9.999999999 -> 10.0000000)
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        return s;
    }
    let s = format!("{x:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}e{exp}")
}

pub fn write_csv<W: Write>(results: &[SweepPointResult], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    out.write_record(CSV_HEADER).map_err(ser)?;
    for r in results {
        out.write_record([
            r.policy.clone(),
            r.sweep_var.column_name().to_string(),
            format_sig9(r.sweep_value),
            format_sig9(r.p_align),
            format_sig9(r.p_align_ci95),
            format_sig9(r.spectral_efficiency),
            r.iterations.to_string(),
            r.seed.to_string(),
        ])
        .map_err(ser)?;
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn to_json(config: &ExperimentConfig, results: &[SweepPointResult]) -> Result<String> {
    let doc = ResultsDocument {
        config: config.clone(),
        results: results.to_vec(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes results to `path`. Nothing is created when `results` is empty.
pub fn emit_results(
    results: &[SweepPointResult],
    config: &ExperimentConfig,
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut writer = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(results, &mut writer)?,
        OutputFormat::Json => {
            writer
                .write_all(to_json(config, results)?.as_bytes())
                .map_err(io)?;
            writer.write_all(b"\n").map_err(io)?;
        }
    }
    writer.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(32.0), "32");
        assert_eq!(format_sig9(12.345678912345), "12.3456789");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(format_sig9(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig9(0.000123456789012), "0.000123456789");
    }
}
