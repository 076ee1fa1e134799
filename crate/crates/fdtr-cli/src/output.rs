//! Result tables and their CSV / JSON encodings. CSV carries linear values
//! under a fixed header; JSON repeats each value in dB and echoes the spec.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use fdtr::link::Position;
use serde::Serialize;

use crate::spec::{ExperimentSpec, Failure, OutputFormat};

pub const SWEEP_HEADER: [&str; 8] = [
    "snr_db",
    "u",
    "n_t",
    "position",
    "mc_nmse",
    "mc_ci95",
    "closed_form",
    "integral_oracle",
];

#[derive(Debug, Clone)]
pub struct Row {
    pub snr_db: f64,
    pub u: usize,
    pub n_t: usize,
    pub position: Position,
    pub mc_nmse: f64,
    pub mc_ci95: f64,
    pub closed_form: f64,
    pub integral_oracle: f64,
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("cannot write output: {e}"))
}

pub fn write_rows(spec: &ExperimentSpec, rows: &[Row]) -> Result<(), Failure> {
    let out = open_output(spec.output_path.as_deref())?;
    match spec.output_format {
        OutputFormat::Csv => write_rows_csv(out, rows),
        OutputFormat::Json => write_rows_json(out, spec, rows),
    }
}

fn write_rows_csv(out: Box<dyn Write>, rows: &[Row]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(io_failure)?;
    for r in rows {
        w.write_record([
            format!("{}", r.snr_db),
            format!("{}", r.u),
            format!("{}", r.n_t),
            r.position.to_string(),
            format!("{}", r.mc_nmse),
            format!("{}", r.mc_ci95),
            format!("{}", r.closed_form),
            format!("{}", r.integral_oracle),
        ])
        .map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)
}

#[derive(Serialize)]
struct JsonRow {
    snr_db: f64,
    u: usize,
    n_t: usize,
    position: String,
    mc_nmse: f64,
    mc_nmse_db: f64,
    mc_ci95: f64,
    closed_form: f64,
    closed_form_db: f64,
    integral_oracle: f64,
    integral_oracle_db: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    spec: &'a ExperimentSpec,
    rows: Vec<JsonRow>,
}

fn write_rows_json(
    mut out: Box<dyn Write>,
    spec: &ExperimentSpec,
    rows: &[Row],
) -> Result<(), Failure> {
    let report = JsonReport {
        spec,
        rows: rows
            .iter()
            .map(|r| JsonRow {
                snr_db: r.snr_db,
                u: r.u,
                n_t: r.n_t,
                position: r.position.to_string(),
                mc_nmse: r.mc_nmse,
                mc_nmse_db: db(r.mc_nmse),
                mc_ci95: r.mc_ci95,
                closed_form: r.closed_form,
                closed_form_db: db(r.closed_form),
                integral_oracle: r.integral_oracle,
                integral_oracle_db: db(r.integral_oracle),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &report).map_err(io_failure)?;
    writeln!(out).map_err(io_failure)
}

#[derive(Debug, Clone, Serialize)]
pub struct PdfBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub empirical_density: f64,
    pub envelope_density: f64,
}

#[derive(Serialize)]
struct PdfReport<'a> {
    spec: &'a ExperimentSpec,
    ks_statistic: f64,
    bins: &'a [PdfBin],
}

/// Writes the histogram table; for CSV output the KS statistic goes to
/// stdout (or stderr when the table itself occupies stdout), for JSON it is
/// part of the document.
pub fn write_pdf_table(spec: &ExperimentSpec, ks: f64, bins: &[PdfBin]) -> Result<(), Failure> {
    let out = open_output(spec.output_path.as_deref())?;
    match spec.output_format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["bin_lo", "bin_hi", "empirical_density", "envelope_density"])
                .map_err(io_failure)?;
            for b in bins {
                w.write_record([
                    format!("{}", b.bin_lo),
                    format!("{}", b.bin_hi),
                    format!("{}", b.empirical_density),
                    format!("{}", b.envelope_density),
                ])
                .map_err(io_failure)?;
            }
            w.flush().map_err(io_failure)?;
            if spec.output_path.is_some() {
                println!("ks_statistic = {ks}");
            } else {
                eprintln!("ks_statistic = {ks}");
            }
            Ok(())
        }
        OutputFormat::Json => {
            let mut out = out;
            let report = PdfReport {
                spec,
                ks_statistic: ks,
                bins,
            };
            serde_json::to_writer_pretty(&mut out, &report).map_err(io_failure)?;
            writeln!(out).map_err(io_failure)
        }
    }
}
