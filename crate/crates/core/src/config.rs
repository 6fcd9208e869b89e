//! Line-oriented experiment configuration: `section.key = value`, `#`
//! comments, comma-separated lists, `true`/`false` booleans.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, InitialData, Model, TimeScheme};
use crate::grid::{DerivativeScheme, GridSpec};
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Converge,
    HbarSweep,
    Periodicity,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Converge => "converge",
            Self::HbarSweep => "hbar_sweep",
            Self::Periodicity => "periodicity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "simulate" => Some(Self::Simulate),
            "converge" => Some(Self::Converge),
            "hbar_sweep" | "hbar-sweep" => Some(Self::HbarSweep),
            "periodicity" => Some(Self::Periodicity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Dat,
    Json,
    Snapshot,
}

/// Every accepted key with its default (`None` = no default).
const KEYS: &[(&str, Option<&str>)] = &[
    ("experiment.kind", None),
    ("potential.kind", None),
    ("potential.chi", Some("0.5")),
    ("grid.x_min", Some("-4")),
    ("grid.x_max", Some("4")),
    ("grid.nx", Some("512")),
    ("grid.scheme", Some("central4")),
    ("basis.n_modes", None),
    ("basis.quad_order", None),
    ("evolution.model", Some("von_neumann")),
    ("evolution.scheme", Some("rk4")),
    ("evolution.dt", Some("5e-4")),
    ("evolution.t_final", Some("6.283185307179586")),
    ("evolution.hbar", None),
    ("evolution.snapshot_every", Some("100")),
    ("evolution.safety_factor", Some("0.5")),
    ("evolution.solver_tol", Some("1e-12")),
    ("evolution.allow_unstable", Some("false")),
    ("initial.kind", Some("coherent")),
    ("initial.sigma_x", Some("0.6")),
    ("output.directory", Some("out")),
    ("output.formats", Some("csv,dat,json,snapshot")),
    ("output.nm", Some("false")),
    ("converge.mode_list", Some("8,16,24,32,40")),
    ("converge.reference_modes", Some("100")),
    ("sweep.hbar_list", None),
    ("sweep.t_final", Some("1")),
];

/// Keys that must be given explicitly, per experiment.
pub fn required_keys(exp: Experiment) -> &'static [&'static str] {
    match exp {
        Experiment::Simulate | Experiment::Periodicity => &["potential.kind", "basis.n_modes"],
        Experiment::Converge => &["potential.kind"],
        Experiment::HbarSweep => &["potential.kind", "basis.n_modes", "sweep.hbar_list"],
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub potential: PotentialModel,
    pub grid: GridSpec,
    pub n_modes: usize,
    pub quad_order: Option<usize>,
    pub evolution: EvolutionConfig,
    pub snapshot_every: usize,
    pub sigma_x: f64,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub with_nm: bool,
    pub mode_list: Vec<usize>,
    pub reference_modes: usize,
    pub hbar_list: Vec<f64>,
    pub sweep_t_final: f64,
}

struct Entry {
    value: String,
    line: usize,
}

struct Raw {
    entries: BTreeMap<String, Entry>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `section.key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !key.contains('.') {
                return Err(Error::Config {
                    line,
                    message: format!("key `{key}` is not of the form section.key"),
                });
            }
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("`{key}` has an empty value"),
                });
            }
            let prev = entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
            if let Some(p) = prev {
                return Err(Error::Config {
                    line,
                    message: format!("`{key}` already set on line {}", p.line),
                });
            }
        }
        Ok(Self { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn text(&self, key: &str) -> Result<String> {
        if let Some(e) = self.entries.get(key) {
            return Ok(e.value.clone());
        }
        KEYS.iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| d.map(str::to_string))
            .ok_or_else(|| Error::ConfigValue(format!("missing required key `{key}`")))
    }

    fn error(&self, key: &str, message: impl Into<String>) -> Error {
        let message = format!("`{key}`: {}", message.into());
        match self.line(key) {
            0 => Error::ConfigValue(message),
            line => Error::Config { line, message },
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let s = self.text(key)?;
        s.parse()
            .map_err(|_| self.error(key, format!("cannot parse `{s}` as {}", std::any::type_name::<T>())))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let s = self.text(key)?;
        s.split(',')
            .map(|v| {
                let v = v.trim();
                v.parse()
                    .map_err(|_| self.error(key, format!("cannot parse list element `{v}`")))
            })
            .collect()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.text(key)?.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.error(key, format!("expected true or false, got `{other}`"))),
        }
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v: f64 = self.get(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.error(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }
}

impl ExperimentConfig {
    /// `experiment` comes from the command line; a conflicting
    /// `experiment.kind` in the file is an error.
    pub fn parse_str(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let raw = Raw::parse(text)?;
        let from_file = if raw.has("experiment.kind") {
            let s = raw.text("experiment.kind")?;
            Some(Experiment::parse(&s).ok_or_else(|| raw.error("experiment.kind", format!("unknown experiment `{s}`")))?)
        } else {
            None
        };
        let experiment = match (experiment, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(raw.error(
                    "experiment.kind",
                    format!("file says {} but {} was requested", b.name(), a.name()),
                ))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => {
                return Err(Error::ConfigValue("missing required key `experiment.kind`".into()))
            }
        };
        for key in required_keys(experiment) {
            if !raw.has(key) {
                return Err(Error::ConfigValue(format!(
                    "missing required key `{key}` for {}",
                    experiment.name()
                )));
            }
        }

        let kind = raw.text("potential.kind")?;
        let potential = match kind.as_str() {
            "harmonic" => PotentialModel::Harmonic,
            "quartic" => PotentialModel::quartic(raw.get("potential.chi")?)
                .map_err(|e| raw.error("potential.chi", e.to_string()))?,
            other => return Err(raw.error("potential.kind", format!("unknown potential `{other}`"))),
        };

        let nx: usize = raw.get("grid.nx")?;
        if nx == 0 {
            return Err(raw.error("grid.nx", "must be positive"));
        }
        let scheme_s = raw.text("grid.scheme")?;
        let scheme = DerivativeScheme::parse(&scheme_s)
            .ok_or_else(|| raw.error("grid.scheme", format!("unknown scheme `{scheme_s}`")))?;
        let grid = GridSpec::new(raw.get("grid.x_min")?, raw.get("grid.x_max")?, nx, scheme)
            .map_err(|e| raw.error("grid.nx", e.to_string()))?;

        let model_s = raw.text("evolution.model")?;
        let model = Model::parse(&model_s)
            .ok_or_else(|| raw.error("evolution.model", format!("unknown model `{model_s}`")))?;
        let tscheme_s = raw.text("evolution.scheme")?;
        let tscheme = TimeScheme::parse(&tscheme_s)
            .ok_or_else(|| raw.error("evolution.scheme", format!("unknown scheme `{tscheme_s}`")))?;
        let needs_hbar = model == Model::VonNeumann && experiment != Experiment::HbarSweep;
        if needs_hbar && !raw.has("evolution.hbar") {
            return Err(Error::ConfigValue(
                "missing required key `evolution.hbar` for the von_neumann model".into(),
            ));
        }
        let hbar = if raw.has("evolution.hbar") {
            let h = raw.positive("evolution.hbar")?;
            if h > 2.0 {
                return Err(raw.error("evolution.hbar", "must lie in (0, 2]"));
            }
            h
        } else {
            0.1
        };
        let t_final: f64 = raw.get("evolution.t_final")?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(raw.error("evolution.t_final", "must be ≥ 0"));
        }
        let evolution = EvolutionConfig {
            model,
            scheme: tscheme,
            dt: raw.positive("evolution.dt")?,
            t_final,
            hbar,
            safety_factor: raw.positive("evolution.safety_factor")?,
            solver_tol: raw.positive("evolution.solver_tol")?,
            max_solver_iters: EvolutionConfig::default().max_solver_iters,
            enforce_stability: !raw.flag("evolution.allow_unstable")?,
        };
        evolution
            .validate()
            .map_err(|e| raw.error("evolution.dt", e.to_string()))?;
        let snapshot_every: usize = raw.get("evolution.snapshot_every")?;
        if snapshot_every == 0 {
            return Err(raw.error("evolution.snapshot_every", "must be positive"));
        }

        let initial_kind = raw.text("initial.kind")?;
        if initial_kind != "coherent" {
            return Err(raw.error("initial.kind", format!("unknown initial datum `{initial_kind}`")));
        }
        let sigma_x = raw.positive("initial.sigma_x")?;

        let n_modes: usize = if raw.has("basis.n_modes") {
            raw.get("basis.n_modes")?
        } else {
            40
        };
        let quad_order = if raw.has("basis.quad_order") {
            Some(raw.get("basis.quad_order")?)
        } else {
            None
        };

        let mode_list: Vec<usize> = raw.list("converge.mode_list")?;
        if mode_list.is_empty() || mode_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(raw.error("converge.mode_list", "must be strictly increasing"));
        }
        let reference_modes: usize = raw.get("converge.reference_modes")?;
        if experiment == Experiment::Converge && reference_modes <= *mode_list.last().unwrap() {
            return Err(raw.error(
                "converge.reference_modes",
                format!("must exceed every entry of converge.mode_list, got {reference_modes}"),
            ));
        }

        let hbar_list: Vec<f64> = if raw.has("sweep.hbar_list") {
            raw.list("sweep.hbar_list")?
        } else {
            Vec::new()
        };
        if experiment == Experiment::HbarSweep {
            if hbar_list.len() < 3 {
                return Err(raw.error("sweep.hbar_list", "need at least three values"));
            }
            if hbar_list.iter().any(|h| !(*h > 0.0 && *h <= 2.0)) {
                return Err(raw.error("sweep.hbar_list", "values must lie in (0, 2]"));
            }
        }
        let sweep_t_final = raw.positive("sweep.t_final")?;

        let mut formats = Vec::new();
        for f in raw.list::<String>("output.formats")? {
            formats.push(match f.as_str() {
                "csv" => OutputFormat::Csv,
                "dat" => OutputFormat::Dat,
                "json" => OutputFormat::Json,
                "snapshot" => OutputFormat::Snapshot,
                other => return Err(raw.error("output.formats", format!("unknown format `{other}`"))),
            });
        }

        if experiment == Experiment::Periodicity && !matches!(potential, PotentialModel::Harmonic) {
            return Err(raw.error("potential.kind", "periodicity requires the harmonic potential"));
        }

        Ok(Self {
            experiment,
            potential,
            grid,
            n_modes,
            quad_order,
            evolution,
            snapshot_every,
            sigma_x,
            output_dir: PathBuf::from(raw.text("output.directory")?),
            formats,
            with_nm: raw.flag("output.nm")?,
            mode_list,
            reference_modes,
            hbar_list,
            sweep_t_final,
        })
    }

    pub fn load(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?, experiment)
    }

    /// Full publication resolution: `Nx = 8000`, `dt = 1e-4`, reference `N = 500`,
    /// modes 20..70.
    pub fn apply_full_scale(&mut self) {
        let spacing = 1e-3;
        self.grid.n_points = (self.grid.length() / spacing).round() as usize;
        self.evolution.dt = 1e-4;
        self.reference_modes = 500;
        self.mode_list = vec![20, 30, 40, 50, 60, 70];
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData::CoherentState {
            sigma_x: self.sigma_x,
        }
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Canonical text of every field that influences numbers; the output
    /// directory and formats are excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let pot = match &self.potential {
            PotentialModel::Harmonic => "harmonic".to_string(),
            PotentialModel::Quartic { chi } => format!("quartic chi={chi:?}"),
            PotentialModel::Callable(c) => format!("{c:?}"),
        };
        let e = &self.evolution;
        let _ = writeln!(s, "experiment={}", self.experiment.name());
        let _ = writeln!(s, "potential={pot}");
        let _ = writeln!(
            s,
            "grid={:?},{:?},{},{}",
            self.grid.x_min,
            self.grid.x_max,
            self.grid.n_points,
            self.grid.scheme.name()
        );
        let _ = writeln!(s, "basis={},{:?}", self.n_modes, self.quad_order);
        let _ = writeln!(
            s,
            "evolution={},{},{:?},{:?},{:?},{:?},{:?},{}",
            e.model.name(),
            e.scheme.name(),
            e.dt,
            e.t_final,
            e.hbar,
            e.safety_factor,
            e.solver_tol,
            e.enforce_stability
        );
        let _ = writeln!(s, "snapshot_every={}", self.snapshot_every);
        let _ = writeln!(s, "initial=coherent,{:?}", self.sigma_x);
        let _ = writeln!(s, "nm={}", self.with_nm);
        let _ = writeln!(s, "converge={:?},{}", self.mode_list, self.reference_modes);
        let _ = writeln!(s, "sweep={:?},{:?}", self.hbar_list, self.sweep_t_final);
        s
    }

    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
