//! Truncated Hermite–Galerkin systems and their time integration.
//!
//! For modes `k = 0..=N`, with `R_{-1} = R_{N+1} = 0`,
//!
//! ```text
//! ∂_t R_k = −i [ √(k/2) D R_{k−1} + √((k+1)/2) D* R_{k+1} ] − i Σ_l E_{k,l} R_l
//! ```
//!
//! The semiclassical system drops the coupling sum. The generator is `−i`
//! times a Hermitian operator on the discrete `L²` space, which is what the
//! implicit midpoint solver relies on.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coupling::{assemble_coupling, CouplingMatrix};
use crate::error::{invalid, Error, Result};
use crate::grid::{FieldLine, Grid};
use crate::hermite::project_function;
use crate::potential::PotentialModel;

/// Imaginary-axis extent of the RK4 stability region, rounded down.
pub const RK4_IMAG_EXTENT: f64 = 2.8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[inline]
fn times_minus_i(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    #[default]
    VonNeumann,
    Semiclassical,
}

impl Model {
    pub fn tag(self) -> u8 {
        match self {
            Self::VonNeumann => 0,
            Self::Semiclassical => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Self::VonNeumann),
            1 => Some(Self::Semiclassical),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::VonNeumann => "von_neumann",
            Self::Semiclassical => "semiclassical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "von_neumann" => Some(Self::VonNeumann),
            "semiclassical" => Some(Self::Semiclassical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

impl TimeScheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::ImplicitMidpoint => "implicit_midpoint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(Self::Rk4),
            "implicit_midpoint" | "midpoint" => Some(Self::ImplicitMidpoint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub model: Model,
    pub scheme: TimeScheme,
    pub dt: f64,
    pub t_final: f64,
    /// Ignored by the semiclassical model.
    pub hbar: f64,
    pub safety_factor: f64,
    /// Relative residual target of the implicit midpoint solve.
    pub solver_tol: f64,
    pub max_solver_iters: usize,
    /// Reject rk4 steps above `safety_factor × stable_dt_estimate`.
    pub enforce_stability: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            model: Model::VonNeumann,
            scheme: TimeScheme::Rk4,
            dt: 1e-3,
            t_final: 1.0,
            hbar: 0.1,
            safety_factor: 0.5,
            solver_tol: 1e-12,
            max_solver_iters: 500,
            enforce_stability: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", "must be ≥ 0"));
        }
        if self.model == Model::VonNeumann && !(self.hbar > 0.0 && self.hbar <= 2.0) {
            return Err(invalid("hbar", format!("must lie in (0, 2], got {}", self.hbar)));
        }
        if !(self.safety_factor > 0.0 && self.safety_factor <= 1.0) {
            return Err(invalid("safety_factor", "must lie in (0, 1]"));
        }
        if !(self.solver_tol > 0.0) {
            return Err(invalid("solver_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Mode-major coefficient field `R_k(x_j)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteState {
    pub time: f64,
    pub modes: Vec<FieldLine>,
}

impl HermiteState {
    pub fn zeros(n_modes: usize, n_points: usize) -> Self {
        Self {
            time: 0.0,
            modes: vec![vec![ZERO; n_points]; n_modes + 1],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn n_points(&self) -> usize {
        self.modes[0].len()
    }

    pub fn is_finite(&self) -> bool {
        self.modes
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Same field with the mode cutoff changed: extra modes are zero,
    /// dropped modes are discarded.
    pub fn with_cutoff(&self, n_modes: usize) -> Self {
        let nx = self.n_points();
        let modes = (0..=n_modes)
            .map(|k| self.modes.get(k).cloned().unwrap_or_else(|| vec![ZERO; nx]))
            .collect();
        Self {
            time: self.time,
            modes,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            time: self.time,
            modes: self
                .modes
                .iter()
                .map(|m| m.iter().map(|z| z * c).collect())
                .collect(),
        }
    }
}

pub type InitialFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum InitialData {
    /// `R_in(x,y) = (√(2π) σ_x)^{-1} exp(−(x²/σ_x² + y²)/2)`, which is
    /// `π^{1/4} / (√(2π) σ_x) e^{−x²/(2σ_x²)}` in mode 0 and zero elsewhere.
    CoherentState { sigma_x: f64 },
    /// Projected onto the Hermite modes at every grid node.
    Custom { f: InitialFn, quad_order: usize },
    CoefficientTable(Vec<FieldLine>),
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CoherentState { sigma_x } => write!(f, "CoherentState(σ_x = {sigma_x})"),
            Self::Custom { quad_order, .. } => write!(f, "Custom(Q = {quad_order})"),
            Self::CoefficientTable(t) => write!(f, "CoefficientTable({} modes)", t.len()),
        }
    }
}

impl InitialData {
    pub fn build(&self, grid: &Grid, n_modes: usize) -> Result<HermiteState> {
        let nx = grid.len();
        match self {
            Self::CoherentState { sigma_x } => {
                if !(*sigma_x > 0.0) {
                    return Err(invalid("sigma_x", "must be positive"));
                }
                let mut state = HermiteState::zeros(n_modes, nx);
                let amp = std::f64::consts::PI.powf(0.25)
                    / ((2.0 * std::f64::consts::PI).sqrt() * sigma_x);
                state.modes[0] = grid.sample(|x| {
                    Complex64::new(amp * (-x * x / (2.0 * sigma_x * sigma_x)).exp(), 0.0)
                });
                Ok(state)
            }
            Self::Custom { f, quad_order } => {
                let mut state = HermiteState::zeros(n_modes, nx);
                for (j, &x) in grid.nodes().iter().enumerate() {
                    let c = project_function(|y| f(x, y), n_modes, *quad_order, 1e-10)?;
                    for (k, z) in c.as_slice().iter().enumerate() {
                        state.modes[k][j] = *z;
                    }
                }
                Ok(state)
            }
            Self::CoefficientTable(t) => {
                if t.is_empty() || t.iter().any(|m| m.len() != nx) {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient table must hold lines of length {nx}"
                    )));
                }
                Ok(HermiteState {
                    time: 0.0,
                    modes: t.clone(),
                }
                .with_cutoff(n_modes))
            }
        }
    }
}

/// Everything needed to evaluate the right-hand side.
#[derive(Debug, Clone)]
pub struct HermiteSystem {
    grid: Grid,
    potential: PotentialModel,
    model: Model,
    hbar: f64,
    n_modes: usize,
    coupling: CouplingMatrix,
    force: Vec<f64>,
}

impl HermiteSystem {
    /// Assembles the coupling for the von Neumann model; the semiclassical
    /// model carries a zero coupling.
    pub fn new(
        grid: Grid,
        potential: PotentialModel,
        model: Model,
        hbar: f64,
        n_modes: usize,
    ) -> Result<Self> {
        let coupling = match model {
            Model::VonNeumann => assemble_coupling(&potential, hbar, n_modes, &grid)?,
            Model::Semiclassical => CouplingMatrix::Zero { n_modes },
        };
        Self::with_coupling(grid, potential, model, hbar, coupling)
    }

    pub fn with_coupling(
        grid: Grid,
        potential: PotentialModel,
        model: Model,
        hbar: f64,
        coupling: CouplingMatrix,
    ) -> Result<Self> {
        if let CouplingMatrix::Banded { profile, .. } = &coupling {
            if profile.len() != grid.len() {
                return Err(Error::DimensionMismatch("coupling grid differs from system grid".into()));
            }
        }
        if let CouplingMatrix::Dense { n_points, .. } = &coupling {
            if *n_points != grid.len() {
                return Err(Error::DimensionMismatch("coupling grid differs from system grid".into()));
            }
        }
        let n_modes = coupling.n_modes();
        if n_modes % 2 == 1 {
            log::warn!("odd mode cutoff N = {n_modes}: the discrete trace is not conserved");
        }
        let force = grid.nodes().iter().map(|&x| potential.force(x)).collect();
        Ok(Self {
            grid,
            potential,
            model,
            hbar,
            n_modes,
            coupling,
            force,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialModel {
        &self.potential
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    fn check_shape(&self, modes: &[FieldLine]) -> Result<()> {
        if modes.len() != self.n_modes + 1 || modes.iter().any(|m| m.len() != self.grid.len()) {
            return Err(Error::DimensionMismatch(format!(
                "state has {} modes, system expects {} modes on {} points",
                modes.len(),
                self.n_modes + 1,
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Time derivative of `modes` written into `out`; `derivs` is scratch.
    fn rhs_into(&self, modes: &[FieldLine], out: &mut [FieldLine], derivs: &mut [FieldLine]) {
        let n = self.n_modes;
        for (m, d) in modes.iter().zip(derivs.iter_mut()) {
            self.grid.ddx_into(m, d);
        }
        for k in 0..=n {
            let out_k = &mut out[k];
            out_k.iter_mut().for_each(|z| *z = ZERO);
            if k >= 1 {
                let a = (k as f64 / 2.0).sqrt();
                let (r, d) = (&modes[k - 1], &derivs[k - 1]);
                for j in 0..out_k.len() {
                    out_k[j] += (d[j] + r[j] * self.force[j]) * a;
                }
            }
            if k < n {
                let a = ((k + 1) as f64 / 2.0).sqrt();
                let (r, d) = (&modes[k + 1], &derivs[k + 1]);
                for j in 0..out_k.len() {
                    out_k[j] += (r[j] * self.force[j] - d[j]) * a;
                }
            }
            out_k.iter_mut().for_each(|z| *z = times_minus_i(*z));
        }
        if self.model == Model::VonNeumann {
            self.coupling.accumulate(modes, out, Complex64::new(0.0, -1.0));
        }
    }

    pub fn rhs(&self, state: &HermiteState) -> Result<Vec<FieldLine>> {
        self.check_shape(&state.modes)?;
        let shape = vec![vec![ZERO; self.grid.len()]; self.n_modes + 1];
        let mut out = shape.clone();
        let mut derivs = shape;
        self.rhs_into(&state.modes, &mut out, &mut derivs);
        Ok(out)
    }

    /// `dt_max = 2.8 / ρ̂` with
    /// `ρ̂ = √((N+1)/2) (|symbol|_max + max|V'|) + max_{j,k} Σ_l |E_{k,l}(x_j)|`.
    pub fn stable_dt_estimate(&self) -> f64 {
        let fmax = self.force.iter().fold(0.0_f64, |a, f| a.max(f.abs()));
        let ladder = ((self.n_modes + 1) as f64 / 2.0).sqrt()
            * (self.grid.derivative_symbol_max() + fmax);
        let coupling = match self.model {
            Model::VonNeumann => self.coupling.max_row_sum(),
            Model::Semiclassical => 0.0,
        };
        RK4_IMAG_EXTENT / (ladder + coupling)
    }
}

/// Right-hand side of the truncated von Neumann system.
pub fn rhs_von_neumann(
    state: &HermiteState,
    grid: &Grid,
    pot: &PotentialModel,
    hbar: f64,
    coupling: &CouplingMatrix,
) -> Result<Vec<FieldLine>> {
    if coupling.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "coupling built for N = {}, state has N = {}",
            coupling.n_modes(),
            state.n_modes()
        )));
    }
    let system = HermiteSystem::with_coupling(
        grid.clone(),
        pot.clone(),
        Model::VonNeumann,
        hbar,
        coupling.clone(),
    )?;
    system.rhs(state)
}

/// Right-hand side of the truncated semiclassical system.
pub fn rhs_semiclassical(
    state: &HermiteState,
    grid: &Grid,
    pot: &PotentialModel,
) -> Result<Vec<FieldLine>> {
    let system = HermiteSystem::with_coupling(
        grid.clone(),
        pot.clone(),
        Model::Semiclassical,
        1.0,
        CouplingMatrix::Zero {
            n_modes: state.n_modes(),
        },
    )?;
    system.rhs(state)
}

fn axpy(y: &mut [FieldLine], a: Complex64, x: &[FieldLine]) {
    for (yl, xl) in y.iter_mut().zip(x) {
        for (yv, xv) in yl.iter_mut().zip(xl) {
            *yv += a * xv;
        }
    }
}

fn field_norm_sqr(x: &[FieldLine]) -> f64 {
    x.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// Fixed-step integrator with preallocated work arrays.
pub struct Stepper<'a> {
    system: &'a HermiteSystem,
    config: EvolutionConfig,
    work: Vec<Vec<FieldLine>>,
    derivs: Vec<FieldLine>,
    /// Iterations used by the last implicit solve.
    pub last_iterations: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(system: &'a HermiteSystem, config: EvolutionConfig) -> Result<Self> {
        config.validate()?;
        if config.model != system.model {
            return Err(invalid("model", "config and system disagree on the model"));
        }
        let shape = vec![vec![ZERO; system.grid.len()]; system.n_modes + 1];
        Ok(Self {
            system,
            config,
            work: vec![shape.clone(); 6],
            derivs: shape,
            last_iterations: 0,
        })
    }

    /// Advances `state` in place by `dt`.
    pub fn step(&mut self, state: &mut HermiteState, dt: f64) -> Result<()> {
        self.system.check_shape(&state.modes)?;
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        match self.config.scheme {
            TimeScheme::Rk4 => self.rk4(state, dt),
            TimeScheme::ImplicitMidpoint => self.midpoint(state, dt)?,
        }
        state.time += dt;
        Ok(())
    }

    fn rk4(&mut self, state: &mut HermiteState, dt: f64) {
        let sys = self.system;
        let [k1, k2, k3, k4, tmp, _] = &mut self.work[..] else {
            unreachable!()
        };
        let u = &mut state.modes;
        let half = Complex64::new(0.5 * dt, 0.0);
        sys.rhs_into(u, k1, &mut self.derivs);
        copy_field(tmp, u);
        axpy(tmp, half, k1);
        sys.rhs_into(tmp, k2, &mut self.derivs);
        copy_field(tmp, u);
        axpy(tmp, half, k2);
        sys.rhs_into(tmp, k3, &mut self.derivs);
        copy_field(tmp, u);
        axpy(tmp, Complex64::new(dt, 0.0), k3);
        sys.rhs_into(tmp, k4, &mut self.derivs);
        let c1 = dt / 6.0;
        let c2 = dt / 3.0;
        for k in 0..u.len() {
            for j in 0..u[k].len() {
                u[k][j] += k1[k][j] * c1 + k2[k][j] * c2 + k3[k][j] * c2 + k4[k][j] * c1;
            }
        }
    }

    /// Solves `(I − αL) u' = (I + αL) u`, `α = dt/2`, by conjugate gradients
    /// on the normal equations. `L` is skew-adjoint, so `(I − αL)* = I + αL`
    /// and every singular value of the system matrix is at least one.
    fn midpoint(&mut self, state: &mut HermiteState, dt: f64) -> Result<()> {
        let sys = self.system;
        let alpha = Complex64::new(0.5 * dt, 0.0);
        let [b, x, r, s, p, q] = &mut self.work[..] else {
            unreachable!()
        };
        let derivs = &mut self.derivs;
        let u = &mut state.modes;

        // b = u + αLu
        sys.rhs_into(u, q, derivs);
        copy_field(b, u);
        axpy(b, alpha, q);
        let b_norm = field_norm_sqr(b).sqrt();
        if b_norm == 0.0 {
            return Ok(());
        }
        // initial guess x = b + αLb, second order accurate
        sys.rhs_into(b, q, derivs);
        copy_field(x, b);
        axpy(x, alpha, q);

        // r = b − (x − αLx)
        sys.rhs_into(x, q, derivs);
        copy_field(r, b);
        axpy(r, Complex64::new(-1.0, 0.0), x);
        axpy(r, alpha, q);
        // s = r + αLr
        sys.rhs_into(r, q, derivs);
        copy_field(s, r);
        axpy(s, alpha, q);
        copy_field(p, s);
        let mut gamma = field_norm_sqr(s);
        let mut res = field_norm_sqr(r).sqrt() / b_norm;
        let mut iters = 0;
        while res > self.config.solver_tol {
            if iters >= self.config.max_solver_iters {
                return Err(Error::SolverNotConverged {
                    iterations: iters,
                    residual: res,
                });
            }
            iters += 1;
            // q = p − αLp
            sys.rhs_into(p, q, derivs);
            for (ql, pl) in q.iter_mut().zip(p.iter()) {
                for (qv, pv) in ql.iter_mut().zip(pl) {
                    *qv = pv - alpha * *qv;
                }
            }
            let qq = field_norm_sqr(q);
            if qq == 0.0 {
                break;
            }
            let a = Complex64::new(gamma / qq, 0.0);
            axpy(x, a, p);
            axpy(r, -a, q);
            // s = r + αLr
            sys.rhs_into(r, q, derivs);
            copy_field(s, r);
            axpy(s, alpha, q);
            let gamma_new = field_norm_sqr(s);
            let beta = gamma_new / gamma;
            gamma = gamma_new;
            for (pl, sl) in p.iter_mut().zip(s.iter()) {
                for (pv, sv) in pl.iter_mut().zip(sl) {
                    *pv = sv + *pv * beta;
                }
            }
            res = field_norm_sqr(r).sqrt() / b_norm;
        }
        self.last_iterations = iters;
        copy_field(u, x);
        Ok(())
    }
}

fn copy_field(dst: &mut [FieldLine], src: &[FieldLine]) {
    for (d, s) in dst.iter_mut().zip(src) {
        d.copy_from_slice(s);
    }
}

/// One step of size `config.dt`.
pub fn step(system: &HermiteSystem, state: &HermiteState, config: &EvolutionConfig) -> Result<HermiteState> {
    let mut stepper = Stepper::new(system, *config)?;
    let mut next = state.clone();
    stepper.step(&mut next, config.dt)?;
    Ok(next)
}

/// Builds the system described by `config` and the initial state.
pub fn prepare(
    grid: Grid,
    potential: PotentialModel,
    n_modes: usize,
    config: &EvolutionConfig,
    initial: &InitialData,
) -> Result<(HermiteSystem, HermiteState)> {
    config.validate()?;
    let state = initial.build(&grid, n_modes)?;
    let system = HermiteSystem::new(grid, potential, config.model, config.hbar, n_modes)?;
    Ok((system, state))
}

/// Fixed-step march from `state.time` to `config.t_final`, the last step
/// shortened to land exactly. `observer` sees the initial state, every
/// `observe_every`-th step, and the final state.
pub fn run<F>(
    system: &HermiteSystem,
    mut state: HermiteState,
    config: &EvolutionConfig,
    observe_every: usize,
    mut observer: F,
) -> Result<HermiteState>
where
    F: FnMut(&HermiteState),
{
    config.validate()?;
    system.check_shape(&state.modes)?;
    if config.scheme == TimeScheme::Rk4 && config.enforce_stability {
        let limit = config.safety_factor * system.stable_dt_estimate();
        if config.dt > limit {
            return Err(Error::UnstableTimeStep {
                dt: config.dt,
                limit,
            });
        }
    }
    let every = observe_every.max(1);
    let t0 = state.time;
    let span = config.t_final - t0;
    observer(&state);
    if span <= 0.0 {
        return Ok(state);
    }
    let full = (span / config.dt * (1.0 + 1e-12)).floor() as usize;
    let rem = span - full as f64 * config.dt;
    let extra = rem > 1e-12 * span.max(1.0);
    let total = full + usize::from(extra);

    let mut stepper = Stepper::new(system, *config)?;
    for n in 1..=total {
        let dt = if n <= full { config.dt } else { rem };
        stepper.step(&mut state, dt)?;
        state.time = if n == total {
            config.t_final
        } else {
            t0 + n as f64 * config.dt
        };
        if !state.is_finite() {
            return Err(Error::Blowup {
                step: n,
                time: state.time,
            });
        }
        if n % every == 0 || n == total {
            observer(&state);
        }
    }
    Ok(state)
}
