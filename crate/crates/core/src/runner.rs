//! Sweep orchestration and CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{reference_dirac, reference_holographic, sweep, SweepAxis, SweepResult};
use crate::config::{ConfigError, RunConfig};
use crate::lattice::ModelSpec;

pub const CSV_HEADER: &str = "swept_param,l,d,x,l_over_d,S_A,S_B,S_AB,I,I_dirac,I_holo_c1,filling";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ORACLE_MISMATCH: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure {0}")]
    Numerical(#[from] crate::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => EXIT_IO,
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Formats a float with `digits` significant digits.
pub fn format_float(value: f64, digits: usize) -> String {
    if value.is_nan() {
        "nan".into()
    } else if value.is_infinite() {
        if value > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", digits - 1, value)
    }
}

/// CSV text for a finished sweep. Rows follow the sorted sweep points.
pub fn render_csv(result: &SweepResult, precision: usize, holographic_c: f64) -> String {
    let f = |v: f64| format_float(v, precision);
    let mut out = String::with_capacity(128 * (result.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let r = &p.record;
        // Both references diverge for adjacent blocks (x = 1).
        let dirac = reference_dirac(r.x).unwrap_or(f64::INFINITY);
        let holo = reference_holographic(r.x, holographic_c).unwrap_or(f64::INFINITY);
        let param = match result.axis {
            SweepAxis::Distance | SweepAxis::SubsystemSize => format!("{}", p.param),
            SweepAxis::Mu | SweepAxis::Alpha => f(p.param),
        };
        out.push_str(&format!(
            "{param},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.l,
            r.d,
            f(r.x),
            f(r.l_over_d),
            f(r.s_a),
            f(r.s_b),
            f(r.s_ab),
            f(r.mi),
            f(dirac),
            f(holo),
            f(p.filling),
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    engine_version: &'static str,
    config_digest: &'a str,
    timestamp_unix: u64,
    model: &'a ModelSpec,
    axis: SweepAxis,
    rows: usize,
    entropy_units: &'static str,
    holographic_c: f64,
    gapless_shifted_params: Vec<f64>,
    skipped: &'a [crate::analysis::SkippedPoint],
}

pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_atomically(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_error(path))
}

#[derive(Debug)]
pub struct RunSummary {
    pub output: PathBuf,
    pub rows: usize,
    pub skipped: usize,
    pub flagged: usize,
}

/// Evaluates the sweep described by `config` on a pool of `workers` threads.
pub fn execute(config: &RunConfig, workers: usize) -> Result<SweepResult, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    let values = config.sweep_values();
    let result = pool.install(|| {
        sweep(
            &config.model,
            config.axis,
            &values,
            config.l,
            config.d,
            config.a_start,
        )
    })?;
    Ok(result)
}

/// Loads `config_path`, runs the sweep and writes the CSV plus a JSON
/// metadata sidecar next to it. Nothing is left at the output path on failure.
pub fn run(config_path: &Path, workers_override: Option<usize>) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(config_path).map_err(io_error(config_path))?;
    let config: RunConfig = text.parse()?;
    let output = match config.output.is_absolute() {
        true => config.output.clone(),
        false => config_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(&config.output),
    };
    let workers = workers_override
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    log::info!(
        "{} sweep over {} values on {} sites with {workers} worker(s)",
        config.axis.name(),
        config.sweep_values().len(),
        config.model.n_sites()
    );

    let result = execute(&config, workers)?;
    let csv = render_csv(&result, config.precision, config.holographic_c);
    write_atomically(&output, csv.as_bytes())?;

    let meta = Metadata {
        engine_version: env!("CARGO_PKG_VERSION"),
        config_digest: &config.digest,
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        model: &result.model,
        axis: result.axis,
        rows: result.points.len(),
        entropy_units: "nats",
        holographic_c: config.holographic_c,
        gapless_shifted_params: result
            .points
            .iter()
            .filter(|p| p.flagged)
            .map(|p| p.param)
            .collect(),
        skipped: &result.skipped,
    };
    let json = serde_json::to_vec_pretty(&meta).expect("metadata serialises");
    let meta_path = metadata_path(&output);
    if let Err(e) = write_atomically(&meta_path, &json) {
        let _ = fs::remove_file(&output);
        return Err(e);
    }

    Ok(RunSummary {
        output,
        rows: result.points.len(),
        skipped: result.skipped.len(),
        flagged: result.points.iter().filter(|p| p.flagged).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.25, 12), "2.50000000000e-1");
        assert_eq!(format_float(f64::INFINITY, 12), "inf");
        assert_eq!(format_float(-1.0 / 3.0, 3), "-3.33e-1");
    }

    #[test]
    fn metadata_sits_next_to_csv() {
        assert_eq!(metadata_path(Path::new("/a/b.csv")), PathBuf::from("/a/b.csv.meta.json"));
    }
}
