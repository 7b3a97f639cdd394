//! The four runs behind the `hilfer-relax` binary. Each writes its outputs
//! into one directory and closes with `manifest.json`, which lists every
//! other file written together with its size and SHA-256.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use hilfer_relax::mild::{apriori_bounds, Solver};
use hilfer_relax::optimal::{bound_compliance, Ledger, RelaxationReport};
use hilfer_relax::relax::{relaxed_rhs, GapPoint};
use hilfer_relax::scenario::ScenarioConfig;
use hilfer_relax::verify::{
    batch_sweep, chattering_study, contraction_certificate, relaxation_ledger, relaxation_study,
    verify_suites, BatchRow, SWEEP_MU, SWEEP_NU,
};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] hilfer_relax::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// The configuration failed a cross-field clause; the ledger names it.
    #[error("configuration rejected:\n{}", .0.render())]
    Validation(Ledger),
    #[error("thread pool: {0}")]
    Threads(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mesh_n: Option<usize>,
    pub modes: Option<usize>,
    pub tol: Option<f64>,
}

/// Reads the configuration (the default benchmark when `path` is `None`),
/// applies `overrides` and re-checks every cross-field clause.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ScenarioConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            ScenarioConfig::from_json(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        config.search.seed = seed;
    }
    if let Some(n) = overrides.mesh_n {
        config.mesh.nodes_per_interval = n;
    }
    if let Some(k) = overrides.modes {
        config.modes = k;
    }
    if let Some(tol) = overrides.tol {
        config.tolerances.picard = tol;
    }
    let ledger = config.validate()?;
    if !ledger.passed() {
        return Err(CliError::Validation(ledger));
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub started: String,
    pub finished: String,
    pub files: Vec<FileEntry>,
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// RFC 3339 time, pinned by `SOURCE_DATE_EPOCH` when it is set so that
/// the manifest too is reproducible.
fn timestamp() -> String {
    use time::format_description::well_known::Rfc3339;
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| time::OffsetDateTime::from_unix_timestamp(s).ok())
        .unwrap_or_else(time::OffsetDateTime::now_utc);
    at.format(&Rfc3339).unwrap_or_default()
}

/// An output directory that records what it receives.
pub struct Run {
    dir: PathBuf,
    command: String,
    config_sha256: String,
    started: String,
    files: Vec<FileEntry>,
}

impl Run {
    /// Creates `dir` and writes the effective configuration as `config.json`.
    pub fn start(dir: &Path, command: &str, config: &ScenarioConfig) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let text = serde_json::to_vec_pretty(config)?;
        let mut run = Self {
            dir: dir.to_path_buf(),
            command: command.into(),
            config_sha256: hex(&text),
            started: timestamp(),
            files: Vec::new(),
        };
        run.write("config.json", &text)?;
        Ok(run)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.files.push(FileEntry {
            path: name.into(),
            bytes: bytes.len() as u64,
            sha256: hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        self.write(name, &bytes)
    }

    /// Writes the manifest and returns it.
    pub fn finish(self) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: "hilfer-relax".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            config_sha256: self.config_sha256,
            started: self.started,
            finished: timestamp(),
            files: self.files,
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        Ok(manifest)
    }
}

#[derive(Serialize)]
struct BoundsFile<'a> {
    bounds: hilfer_relax::mild::AprioriBounds,
    interval_sups: Vec<f64>,
    ledger: &'a Ledger,
}

/// Solves the benchmark under its study control: `trajectory.csv` and
/// `bounds.json` (the a priori bounds and their checks).
pub fn run_solve(config: &ScenarioConfig, out: &Path) -> Result<Ledger> {
    let sc = config.build()?;
    let mut run = Run::start(out, "solve", config)?;
    let v = sc.study_control()?;
    let spec = sc.mesh().refined_by(v.breakpoints());
    let traj = Solver::new(&sc.problem, &spec)?.solve(&relaxed_rhs(&sc.problem, &sc.grid, &v)?)?;
    let mut ledger = bound_compliance(&sc.problem, &traj, "study control")?;
    ledger.extend(contraction_certificate(&traj, "study control"));
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    run.write("trajectory.csv", &csv)?;
    run.write_json(
        "bounds.json",
        &BoundsFile {
            bounds: apriori_bounds(&sc.problem)?,
            interval_sups: traj.interval_sups(),
            ledger: &ledger,
        },
    )?;
    run.finish()?;
    Ok(ledger)
}

/// `P`, `P/2`, … down to 2 (or `P` alone when it is below 2), increasing.
pub fn doubling_ladder(pieces: usize) -> Vec<usize> {
    let mut out = vec![pieces];
    while out[out.len() - 1] % 2 == 0 && out[out.len() - 1] / 2 >= 2 {
        out.push(out[out.len() - 1] / 2);
    }
    out.reverse();
    out
}

#[derive(Serialize)]
struct DoublingRow {
    pieces: usize,
    m_o: f64,
    m_r: f64,
    gap: f64,
    m_o_pieces: f64,
    m_o_chattered: f64,
    m_r_search: f64,
    certified_enumeration: bool,
    evaluations: usize,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    control: &'a str,
    n_cells: usize,
    pc_gap: f64,
    weak_star_gap: f64,
    relaxed_norm: f64,
}

impl<'a> CurveRow<'a> {
    fn new(control: &'a str, p: &GapPoint) -> Self {
        Self {
            control,
            n_cells: p.n_cells,
            pc_gap: p.pc_gap,
            weak_star_gap: p.weak_star_gap,
            relaxed_norm: p.relaxed_norm,
        }
    }
}

/// The doubling study over `P`: `report.json` (every report), `doubling.csv`,
/// `chattering.csv` (the relaxed minimizer's curve, then the study control's)
/// and `ledger.json`.
pub fn run_relaxation(config: &ScenarioConfig, out: &Path) -> Result<Ledger> {
    let sc = config.build()?;
    let mut run = Run::start(out, "relax", config)?;
    let reports: Vec<RelaxationReport> =
        relaxation_study(&sc, &doubling_ladder(config.search.pieces))?;
    let mut ledger = relaxation_ledger(&reports, config.search.tol);
    let (study, study_curve) = chattering_study(&sc, config.search.n_cells)?;
    ledger.extend(study);
    let rows: Vec<DoublingRow> = reports
        .iter()
        .map(|r| DoublingRow {
            pieces: r.search.pieces,
            m_o: r.m_o,
            m_r: r.m_r,
            gap: r.gap,
            m_o_pieces: r.m_o_pieces,
            m_o_chattered: r.m_o_chattered,
            m_r_search: r.m_r_search,
            certified_enumeration: r.certified_enumeration,
            evaluations: r.evaluations,
        })
        .collect();
    let mut curve: Vec<CurveRow> = Vec::new();
    if let Some(last) = reports.last() {
        curve.extend(
            last.chattering_curve
                .iter()
                .map(|p| CurveRow::new("relaxed minimizer", p)),
        );
    }
    curve.extend(
        study_curve
            .iter()
            .map(|p| CurveRow::new("study control", p)),
    );
    run.write_json("report.json", &reports)?;
    run.write_csv("doubling.csv", &rows)?;
    run.write_csv("chattering.csv", &curve)?;
    run.write_json("ledger.json", &ledger)?;
    run.finish()?;
    Ok(ledger)
}

#[derive(Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub ledger: Ledger,
}

/// Every suite the configuration engages: `verify.json`.
pub fn run_verify(config: &ScenarioConfig, out: &Path, seed: u64) -> Result<Vec<SuiteResult>> {
    let sc = config.build()?;
    let mut run = Run::start(out, "verify", config)?;
    let results: Vec<SuiteResult> = verify_suites(&sc, seed)?
        .into_iter()
        .map(|(suite, ledger)| SuiteResult {
            suite: suite.into(),
            passed: ledger.passed(),
            ledger,
        })
        .collect();
    run.write_json("verify.json", &results)?;
    run.finish()?;
    Ok(results)
}

#[derive(Serialize)]
struct BatchEntry<'a> {
    row: &'a BatchRow,
    ledger: &'a Ledger,
}

/// Benchmark trajectories over the `(μ, ν)` sweep: `batch.csv` and `batch.json`.
pub fn run_batch(config: &ScenarioConfig, out: &Path) -> Result<Ledger> {
    let mut run = Run::start(out, "batch", config)?;
    let results = batch_sweep(config, &SWEEP_MU, &SWEEP_NU)?;
    let rows: Vec<&BatchRow> = results.iter().map(|(r, _)| r).collect();
    let entries: Vec<BatchEntry> = results
        .iter()
        .map(|(row, ledger)| BatchEntry { row, ledger })
        .collect();
    run.write_csv("batch.csv", &rows)?;
    run.write_json("batch.json", &entries)?;
    run.finish()?;
    let mut ledger = Ledger::default();
    for (_, l) in results {
        ledger.extend(l);
    }
    Ok(ledger)
}

/// Caps the global rayon pool at `threads`.
pub fn cap_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_ladder_halves_to_two() {
        assert_eq!(doubling_ladder(8), vec![2, 4, 8]);
        assert_eq!(doubling_ladder(6), vec![3, 6]);
        assert_eq!(doubling_ladder(1), vec![1]);
    }

    #[test]
    fn overrides_are_applied_and_revalidated() {
        let ov = Overrides {
            seed: Some(3),
            mesh_n: Some(16),
            modes: Some(4),
            tol: Some(1e-9),
        };
        let c = load_config(None, &ov).unwrap();
        assert_eq!(
            (c.search.seed, c.mesh.nodes_per_interval, c.modes),
            (3, 16, 4)
        );
        assert_eq!(c.tolerances.picard, 1e-9);
    }
}
