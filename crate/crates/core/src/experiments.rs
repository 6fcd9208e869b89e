//! Experiment drivers behind the command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentConfig, OutputFormat};
use crate::diagnostics::{error_vs_reference, order_of_accuracy, DiagnosticsReport, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::evolution::{run, EvolutionConfig, HermiteState, HermiteSystem, Model};
use crate::grid::{FieldLine, Grid};
use crate::potential::PotentialModel;
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<ArtifactFile>,
    pub summary_path: Option<PathBuf>,
    pub summary: serde_json::Value,
}

fn build_system(cfg: &ExperimentConfig, grid: &Grid, n: usize, evo: &EvolutionConfig) -> Result<HermiteSystem> {
    match (cfg.quad_order, evo.model) {
        (Some(q), Model::VonNeumann) if !cfg.potential.is_quadratic() => {
            let coupling = crate::coupling::assemble_coupling_quadrature(
                &cfg.potential,
                evo.hbar,
                n,
                grid,
                Some(q),
            )?;
            HermiteSystem::with_coupling(grid.clone(), cfg.potential.clone(), evo.model, evo.hbar, coupling)
        }
        _ => HermiteSystem::new(grid.clone(), cfg.potential.clone(), evo.model, evo.hbar, n),
    }
}

/// Runs `n` modes under `evo`, calling `observe` at the snapshot cadence.
fn march<F>(cfg: &ExperimentConfig, grid: &Grid, n: usize, evo: &EvolutionConfig, mut observe: F) -> Result<HermiteState>
where
    F: FnMut(&HermiteState) -> Result<()>,
{
    let system = build_system(cfg, grid, n, evo)?;
    let initial = cfg.initial_data().build(grid, n)?;
    let mut failure = None;
    let out = run(&system, initial, evo, cfg.snapshot_every, |s| {
        if failure.is_none() {
            if let Err(e) = observe(s) {
                failure = Some(e);
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Diagnostics time series and final state.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(DiagnosticsReport, HermiteState)> {
    let grid = Grid::new(cfg.grid.clone())?;
    let mut report = DiagnosticsReport::new(cfg.snapshot_every);
    let fin = march(cfg, &grid, cfg.n_modes, &cfg.evolution, |s| {
        report.push(DiagnosticsRow::observe(s, &grid, cfg.with_nm)?)
    })?;
    Ok((report, fin))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub n: usize,
    pub error: f64,
    /// Against the previous row; `None` on the first.
    pub order: Option<f64>,
}

/// Pairwise orders for a table of `(N, E(N))`.
pub fn order_table(errors: &[(usize, f64)]) -> Result<Vec<ConvergeRow>> {
    let mut rows = Vec::with_capacity(errors.len());
    for (i, &(n, e)) in errors.iter().enumerate() {
        let order = if i == 0 {
            None
        } else {
            let (pn, pe) = errors[i - 1];
            Some(order_of_accuracy(pe, pn as f64, e, n as f64)?)
        };
        rows.push(ConvergeRow { n, error: e, order });
    }
    Ok(rows)
}

/// Reference snapshots: in memory, or streamed from a cache directory.
enum Reference {
    Memory(Vec<HermiteState>),
    Disk { dir: PathBuf, count: usize },
}

impl Reference {
    fn len(&self) -> usize {
        match self {
            Self::Memory(v) => v.len(),
            Self::Disk { count, .. } => *count,
        }
    }

    fn get(&self, i: usize) -> Result<HermiteState> {
        match self {
            Self::Memory(v) => v
                .get(i)
                .cloned()
                .ok_or_else(|| Error::TimeMismatch(format!("no reference snapshot #{i}"))),
            Self::Disk { dir, count } => {
                if i >= *count {
                    return Err(Error::TimeMismatch(format!("no reference snapshot #{i}")));
                }
                Ok(Snapshot::load(&snapshot_path(dir, i))?.state)
            }
        }
    }
}

fn snapshot_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("ref_{i:06}.snap"))
}

/// Checksum of everything that determines the reference trajectory.
pub fn reference_checksum(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.mode_list.clear();
    c.n_modes = cfg.reference_modes;
    c.experiment = Experiment::Converge;
    c.with_nm = false;
    c.hbar_list.clear();
    hex::encode(Sha256::digest(c.canonical().as_bytes()))
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
struct CacheManifest {
    checksum: String,
    snapshots: usize,
}

fn load_or_build_reference(cfg: &ExperimentConfig, grid: &Grid, cache: Option<&Path>) -> Result<(Reference, bool)> {
    let nref = cfg.reference_modes;
    let Some(root) = cache else {
        // only the modes that any test run compares against are kept
        let keep = *cfg.mode_list.last().unwrap_or(&nref);
        let mut v = Vec::new();
        march(cfg, grid, nref, &cfg.evolution, |s| {
            v.push(s.with_cutoff(keep.min(nref)));
            Ok(())
        })?;
        return Ok((Reference::Memory(v), false));
    };
    let checksum = reference_checksum(cfg);
    let dir = root.join(&checksum);
    let manifest = dir.join("manifest.json");
    if manifest.exists() {
        let m: serde_json::Value = serde_json::from_reader(File::open(&manifest)?)?;
        let stored = m["checksum"].as_str().unwrap_or_default();
        if stored != checksum {
            return Err(Error::CacheMismatch(format!(
                "{} holds checksum {stored}, expected {checksum}",
                dir.display()
            )));
        }
        let count = m["snapshots"].as_u64().unwrap_or(0) as usize;
        log::info!("reusing cached reference {}", dir.display());
        return Ok((Reference::Disk { dir, count }, true));
    }
    fs::create_dir_all(&dir)?;
    let mut count = 0;
    march(cfg, grid, nref, &cfg.evolution, |s| {
        Snapshot {
            x_min: cfg.grid.x_min,
            x_max: cfg.grid.x_max,
            hbar: cfg.evolution.hbar,
            model: cfg.evolution.model,
            state: s.clone(),
        }
        .save(&snapshot_path(&dir, count))?;
        count += 1;
        Ok(())
    })?;
    // manifest last, so an interrupted build is never mistaken for a cache hit
    let m = CacheManifest {
        checksum,
        snapshots: count,
    };
    serde_json::to_writer_pretty(File::create(&manifest)?, &m)?;
    Ok((Reference::Disk { dir, count }, false))
}

#[derive(Debug, Clone)]
pub struct ConvergeOutcome {
    pub rows: Vec<ConvergeRow>,
    pub cache_hit: bool,
}

/// `E(N)` for every `N` in the mode list against a reference run.
pub fn convergence_study(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<ConvergeOutcome> {
    if cfg.mode_list.iter().any(|&n| n >= cfg.reference_modes) {
        return Err(crate::error::invalid(
            "mode_list",
            "every entry must be below reference_modes",
        ));
    }
    let grid = Grid::new(cfg.grid.clone())?;
    let (reference, cache_hit) = load_or_build_reference(cfg, &grid, cache)?;
    let mut errors = Vec::new();
    for &n in &cfg.mode_list {
        let mut idx = 0;
        let mut worst: f64 = 0.0;
        march(cfg, &grid, n, &cfg.evolution, |s| {
            let r = reference.get(idx)?;
            idx += 1;
            worst = worst.max(error_vs_reference(
                std::slice::from_ref(s),
                std::slice::from_ref(&r),
                n,
                &grid,
            )?);
            Ok(())
        })?;
        if idx != reference.len() {
            return Err(Error::TimeMismatch(format!(
                "run produced {idx} snapshots, reference has {}",
                reference.len()
            )));
        }
        log::info!("N = {n}: E = {worst:.4e}");
        errors.push((n, worst));
    }
    Ok(ConvergeOutcome {
        rows: order_table(&errors)?,
        cache_hit,
    })
}

fn field_distance(a: &[FieldLine], b: &[FieldLine], grid: &Grid) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d: FieldLine = x.iter().zip(y).map(|(p, q)| p - q).collect();
            grid.norm_sqr(&d)
        })
        .sum::<f64>()
        .sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(crate::error::invalid("points", "need ≥ 2 strictly positive pairs"));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    /// `(ħ, ‖R^ħ − R‖)` at the comparison time.
    pub points: Vec<(f64, f64)>,
    /// `None` when some difference vanishes (quadratic potentials).
    pub slope: Option<f64>,
}

/// von Neumann against semiclassical at every `ħ` of the sweep.
pub fn hbar_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let grid = Grid::new(cfg.grid.clone())?;
    let base = EvolutionConfig {
        t_final: cfg.sweep_t_final,
        ..cfg.evolution
    };
    let sc_cfg = EvolutionConfig {
        model: Model::Semiclassical,
        ..base
    };
    let limit = march(cfg, &grid, cfg.n_modes, &sc_cfg, |_| Ok(()))?;
    let mut points = Vec::new();
    for &hbar in &cfg.hbar_list {
        let vn_cfg = EvolutionConfig {
            model: Model::VonNeumann,
            hbar,
            ..base
        };
        let s = march(cfg, &grid, cfg.n_modes, &vn_cfg, |_| Ok(()))?;
        let d = field_distance(&s.modes, &limit.modes, &grid);
        log::info!("ħ = {hbar}: ‖R^ħ − R‖ = {d:.4e}");
        points.push((hbar, d));
    }
    let slope = if points.iter().all(|p| p.1 > 0.0) {
        Some(loglog_slope(&points)?)
    } else {
        None
    };
    Ok(SweepOutcome { points, slope })
}

/// `‖R(T) − R(0)‖ / ‖R(0)‖` for the harmonic oscillator.
pub fn periodicity(cfg: &ExperimentConfig) -> Result<f64> {
    if !matches!(cfg.potential, PotentialModel::Harmonic) {
        return Err(crate::error::invalid("potential", "periodicity requires the harmonic potential"));
    }
    let grid = Grid::new(cfg.grid.clone())?;
    let initial = cfg.initial_data().build(&grid, cfg.n_modes)?;
    let fin = march(cfg, &grid, cfg.n_modes, &cfg.evolution, |_| Ok(()))?;
    let zero = HermiteState::zeros(cfg.n_modes, grid.len());
    Ok(field_distance(&fin.modes, &initial.modes, &grid) / field_distance(&initial.modes, &zero.modes, &grid))
}

struct Collector {
    dir: PathBuf,
    files: Vec<ArtifactFile>,
}

impl Collector {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn emit(&mut self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        {
            let mut w = BufWriter::new(File::create(&path)?);
            write(&mut w)?;
            w.flush()?;
        }
        let sha256 = hex::encode(Sha256::digest(fs::read(&path)?));
        self.files.push(ArtifactFile { path, sha256 });
        Ok(())
    }

    fn finish(self, cfg: &ExperimentConfig, results: serde_json::Value) -> Result<RunArtifacts> {
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let summary = json!({
            "experiment": cfg.experiment.name(),
            "config_checksum": cfg.checksum(),
            "config": cfg.canonical(),
            "results": results,
            "files": self.files,
            "metadata": { "created_unix": created, "version": env!("CARGO_PKG_VERSION") },
        });
        let path = self.dir.join("summary.json");
        if cfg.wants(OutputFormat::Json) {
            fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
        }
        Ok(RunArtifacts {
            files: self.files,
            summary_path: cfg.wants(OutputFormat::Json).then_some(path),
            summary,
        })
    }
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let (report, fin) = simulate(cfg)?;
    let mut out = Collector::new(&cfg.output_dir)?;
    if cfg.wants(OutputFormat::Csv) {
        out.emit("diagnostics.csv", |w| report.write_csv(w))?;
    }
    if cfg.wants(OutputFormat::Dat) {
        out.emit("diagnostics.dat", |w| {
            writeln!(w, "# t l2_norm trace_re parity_residual")?;
            for r in &report.rows {
                writeln!(w, "{:.17e} {:.17e} {:.17e} {:.17e}", r.t, r.l2_norm, r.trace.re, r.parity_residual)?;
            }
            Ok(())
        })?;
    }
    if cfg.wants(OutputFormat::Snapshot) {
        let snap = Snapshot {
            x_min: cfg.grid.x_min,
            x_max: cfg.grid.x_max,
            hbar: cfg.evolution.hbar,
            model: cfg.evolution.model,
            state: fin.clone(),
        };
        out.emit("final.snap", |w| snap.write_to(w))?;
    }
    let first = report.rows.first();
    let last = report.rows.last();
    let drift = match (first, last) {
        (Some(a), Some(b)) => (b.l2_norm - a.l2_norm).abs() / a.l2_norm.max(f64::MIN_POSITIVE),
        _ => 0.0,
    };
    let results = json!({
        "final_time": fin.time,
        "rows": report.rows.len(),
        "snapshot_every": report.cadence,
        "l2_relative_drift": drift,
        "final_trace_re": last.map(|r| r.trace.re),
        "final_parity_residual": last.map(|r| r.parity_residual),
        "max_boundary_mass": report.rows.iter().map(|r| r.boundary_mass).fold(0.0, f64::max),
    });
    out.finish(cfg, results)
}

/// Writes the `N, error, order` table; order is blank on the first row.
pub fn write_converge_csv<W: Write>(rows: &[ConvergeRow], mut w: W) -> Result<()> {
    writeln!(w, "N,error,order")?;
    for r in rows {
        match r.order {
            Some(o) => writeln!(w, "{},{:.6e},{:.4}", r.n, r.error, o)?,
            None => writeln!(w, "{},{:.6e},", r.n, r.error)?,
        }
    }
    Ok(())
}

pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let cache = cfg.output_dir.join("cache");
    let outcome = convergence_study(cfg, Some(&cache))?;
    let rows = &outcome.rows;
    let mut out = Collector::new(&cfg.output_dir)?;
    if cfg.wants(OutputFormat::Csv) {
        out.emit("converge.csv", |w| write_converge_csv(rows, w))?;
    }
    if cfg.wants(OutputFormat::Dat) {
        out.emit("converge.dat", |w| {
            writeln!(w, "# N log10_error")?;
            for r in rows {
                writeln!(w, "{} {:.10}", r.n, r.error.log10())?;
            }
            Ok(())
        })?;
    }
    let decreasing = rows.windows(2).all(|p| p[1].error < p[0].error);
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let orders_non_decreasing = orders.windows(2).all(|p| p[1] >= p[0]);
    let results = json!({
        "rows": rows,
        "reference_modes": cfg.reference_modes,
        "reference_checksum": reference_checksum(cfg),
        "cache_hit": outcome.cache_hit,
        "snapshot_every": cfg.snapshot_every,
        "strictly_decreasing": decreasing,
        "orders_non_decreasing": orders_non_decreasing,
    });
    out.finish(cfg, results)
}

pub fn cmd_hbar_sweep(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let outcome = hbar_sweep(cfg)?;
    let mut out = Collector::new(&cfg.output_dir)?;
    if cfg.wants(OutputFormat::Csv) {
        out.emit("hbar_sweep.csv", |w| {
            writeln!(w, "hbar,difference")?;
            for (h, d) in &outcome.points {
                writeln!(w, "{h:.6e},{d:.10e}")?;
            }
            Ok(())
        })?;
    }
    if cfg.wants(OutputFormat::Dat) {
        out.emit("hbar_sweep.dat", |w| {
            writeln!(w, "# log10_hbar log10_difference")?;
            for (h, d) in &outcome.points {
                writeln!(w, "{:.10} {:.10}", h.log10(), d.log10())?;
            }
            Ok(())
        })?;
    }
    let results = json!({
        "points": outcome.points,
        "slope": outcome.slope,
        "slope_in_range": outcome.slope.map(|s| (1.8..=2.2).contains(&s)),
        "t_final": cfg.sweep_t_final,
    });
    out.finish(cfg, results)
}

pub fn cmd_periodicity(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let err = periodicity(cfg)?;
    let mut out = Collector::new(&cfg.output_dir)?;
    if cfg.wants(OutputFormat::Csv) {
        out.emit("periodicity.csv", |w| {
            writeln!(w, "t_final,return_error")?;
            writeln!(w, "{:.17e},{err:.10e}", cfg.evolution.t_final)?;
            Ok(())
        })?;
    }
    out.finish(
        cfg,
        json!({ "t_final": cfg.evolution.t_final, "return_error": err }),
    )
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    match cfg.experiment {
        Experiment::Simulate => cmd_simulate(cfg),
        Experiment::Converge => cmd_converge(cfg),
        Experiment::HbarSweep => cmd_hbar_sweep(cfg),
        Experiment::Periodicity => cmd_periodicity(cfg),
    }
}
