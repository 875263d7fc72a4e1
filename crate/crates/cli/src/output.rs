//! CSV writers for metrics, oracle costs and fields.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dvec_core::geometry::ScalarField2D;
use dvec_core::sim::RunMetrics;
use serde::Deserialize;

use crate::driver::{ExperimentResult, OracleRecord, RunRecord};

pub const METRICS_HEADER: [&str; 10] = [
    "density_id",
    "mode",
    "seed",
    "iteration",
    "error",
    "regret",
    "team_cumulative_transfers",
    "mean_per_robot_transfers",
    "inner_loop_steps",
    "warn_flags",
];

/// One metrics CSV row as read back from disk.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct MetricsRow {
    pub density_id: String,
    pub mode: String,
    pub seed: u64,
    pub iteration: usize,
    pub error: f64,
    pub regret: f64,
    pub team_cumulative_transfers: usize,
    pub mean_per_robot_transfers: f64,
    pub inner_loop_steps: usize,
    pub warn_flags: String,
}

/// `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn metrics_records<'a>(density_id: &str, m: &'a RunMetrics<f64>) -> impl Iterator<Item = [String; 10]> + 'a {
    let density_id = density_id.to_string();
    m.iterations.iter().map(move |it| {
        [
            density_id.clone(),
            m.mode.label().to_string(),
            m.seed.to_string(),
            it.iteration.to_string(),
            format_sig(it.error),
            format_sig(it.regret),
            it.team_cumulative_transfers.to_string(),
            format_sig(it.mean_per_robot_transfers),
            it.inner_loop_steps.to_string(),
            it.warn.to_string(),
        ]
    })
}

/// Writes the header and one row per iteration of each run, in the given order.
pub fn write_metrics<W: Write>(out: W, runs: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in runs {
        for rec in metrics_records(&r.density_id, &r.metrics) {
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> csv::Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect()
}

pub fn write_oracles<W: Write>(out: W, oracles: &[OracleRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["density_id", "restart", "cost", "best_cost"])?;
    for o in oracles {
        for (k, c) in o.result.restart_costs.iter().enumerate() {
            w.write_record([o.density_id.clone(), k.to_string(), format_sig(*c), format_sig(o.result.best_cost)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `x,y,value` at every grid point, in grid order.
pub fn write_field<W: Write>(out: W, field: &ScalarField2D<f64>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value"])?;
    for (q, v) in field.domain().grid_points().iter().zip(field.values()) {
        w.write_record([format_sig(q.x), format_sig(q.y), format_sig(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,y,value` CSV.
pub fn read_field(path: &Path) -> csv::Result<Vec<(f64, f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect()
}

/// Directory holding the field CSVs of one run.
pub fn field_dir(output_dir: &Path, density_id: &str, mode: &str, seed: u64) -> PathBuf {
    output_dir.join("fields").join(format!("{density_id}_{mode}_seed{seed}"))
}

fn create(path: &Path) -> io::Result<io::BufWriter<fs::File>> {
    fs::File::create(path).map(io::BufWriter::new)
}

fn to_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_oracle_file(output_dir: &Path, oracles: &[OracleRecord]) -> io::Result<PathBuf> {
    fs::create_dir_all(output_dir)?;
    let path = output_dir.join("oracle.csv");
    write_oracles(create(&path)?, oracles).map_err(to_io)?;
    Ok(path)
}

/// Writes `metrics.csv`, `oracle.csv` and any exported fields under `output_dir`.
pub fn write_experiment(output_dir: &Path, result: &ExperimentResult) -> io::Result<()> {
    fs::create_dir_all(output_dir)?;
    write_metrics(create(&output_dir.join("metrics.csv"))?, &result.runs).map_err(to_io)?;
    write_oracle_file(output_dir, &result.oracles)?;
    for r in &result.runs {
        let Some(f) = &r.fields else { continue };
        let dir = field_dir(output_dir, &r.density_id, r.metrics.mode.label(), r.metrics.seed);
        fs::create_dir_all(&dir)?;
        for (i, robot) in f.robots.iter().enumerate() {
            write_field(create(&dir.join(format!("robot_{i}.csv")))?, robot).map_err(to_io)?;
        }
        write_field(create(&dir.join("composite.csv"))?, &f.composite).map_err(to_io)?;
        write_field(create(&dir.join("truth.csv"))?, &f.truth).map_err(to_io)?;
    }
    Ok(())
}
