//! Observables, error functionals and the Wigner-slice reconstruction.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::evolution::HermiteState;
use crate::grid::{FieldLine, Grid};
use crate::hermite::{phi_all, phi_at_zero};

pub const NM_MAX_ORDER: u32 = 6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn check_grid(state: &HermiteState, grid: &Grid) -> Result<()> {
    if state.modes.iter().any(|m| m.len() != grid.len()) {
        return Err(Error::DimensionMismatch(format!(
            "state lines do not match a grid of {} points",
            grid.len()
        )));
    }
    Ok(())
}

fn field_norm(modes: &[FieldLine], grid: &Grid) -> f64 {
    modes.iter().map(|m| grid.norm_sqr(m)).sum::<f64>().sqrt()
}

/// `(Σ_k ‖R_k‖²)^{1/2}` with the grid rule.
pub fn l2_norm(state: &HermiteState, grid: &Grid) -> Result<f64> {
    check_grid(state, grid)?;
    Ok(field_norm(&state.modes, grid))
}

/// `Σ_k Φ_k(0) Δx Σ_j R_k(x_j)`. The imaginary part vanishes for
/// parity-symmetric states and is kept as a health metric.
pub fn trace(state: &HermiteState, grid: &Grid) -> Result<Complex64> {
    check_grid(state, grid)?;
    let phi0 = phi_at_zero(state.n_modes());
    let mut acc = ZERO;
    for (k, m) in state.modes.iter().enumerate() {
        if phi0[k] != 0.0 {
            acc += m.iter().sum::<Complex64>() * phi0[k];
        }
    }
    Ok(acc * grid.dx())
}

/// `max_k ‖R_k − (−1)^k conj(R_k)‖ / ‖R‖`.
pub fn parity_residual(state: &HermiteState, grid: &Grid) -> Result<f64> {
    check_grid(state, grid)?;
    let norm = field_norm(&state.modes, grid).max(f64::MIN_POSITIVE);
    let worst = state
        .modes
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let d: FieldLine = m.iter().map(|z| z - z.conj() * sign).collect();
            grid.norm_sqr(&d).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(worst / norm)
}

/// Fraction of `‖R‖²` carried by the outer 10% of nodes on each side.
/// Large values mean the periodic wrap is being felt.
pub fn boundary_mass(state: &HermiteState, grid: &Grid) -> Result<f64> {
    check_grid(state, grid)?;
    let mut edge = 0.0;
    let mut total = 0.0;
    for m in &state.modes {
        for (j, z) in m.iter().enumerate() {
            let w = z.norm_sqr();
            total += w;
            if grid.is_boundary_node(j) {
                edge += w;
            }
        }
    }
    Ok(if total > 0.0 { edge / total } else { 0.0 })
}

/// `y` acting on a mode-major field, output padded to `out_len` modes.
fn field_y(modes: &[FieldLine], out_len: usize, derivative: bool) -> Vec<FieldLine> {
    let nx = modes[0].len();
    let sign = if derivative { -1.0 } else { 1.0 };
    (0..out_len)
        .map(|k| {
            let mut line = vec![ZERO; nx];
            if k >= 1 && k - 1 < modes.len() {
                let a = sign * (k as f64 / 2.0).sqrt();
                line.iter_mut().zip(&modes[k - 1]).for_each(|(o, r)| *o += r * a);
            }
            if k + 1 < modes.len() {
                let a = ((k + 1) as f64 / 2.0).sqrt();
                line.iter_mut().zip(&modes[k + 1]).for_each(|(o, r)| *o += r * a);
            }
            line
        })
        .collect()
}

/// `Σ_{a+b+α+β ≤ m} ‖x^a ∂_x^b y^α ∂_y^β R‖`.
///
/// `y`-ladders run on a copy padded to `N + m` so that every term is exact
/// for the given (band-limited) coefficients.
pub fn nm_functional(state: &HermiteState, grid: &Grid, m: u32) -> Result<f64> {
    check_grid(state, grid)?;
    if m > NM_MAX_ORDER {
        return Err(invalid("m", format!("at most {NM_MAX_ORDER}, got {m}")));
    }
    let m = m as usize;
    let len = state.n_modes() + 1 + m;
    let padded = state.with_cutoff(len - 1).modes;
    let xs = grid.nodes();
    let mut total = 0.0;

    let mut dy_pow = padded;
    for beta in 0..=m {
        let mut y_pow = dy_pow.clone();
        for alpha in 0..=m - beta {
            let mut dx_pow = y_pow.clone();
            for b in 0..=m - beta - alpha {
                let mut x_pow = dx_pow.clone();
                for a in 0..=m - beta - alpha - b {
                    total += field_norm(&x_pow, grid);
                    if a < m - beta - alpha - b {
                        for line in x_pow.iter_mut() {
                            line.iter_mut().zip(xs).for_each(|(z, &x)| *z *= x);
                        }
                    }
                }
                if b < m - beta - alpha {
                    dx_pow = dx_pow.iter().map(|l| grid.ddx(l)).collect();
                }
            }
            if alpha < m - beta {
                y_pow = field_y(&y_pow, len, false);
            }
        }
        if beta < m {
            dy_pow = field_y(&dy_pow, len, true);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCertificate {
    /// `(Σ_{k>N} |c_k|²)^{1/2}`
    pub tail: f64,
    /// `(2N+3)^{−p} (Σ_k (2k+1)^{2p} |c_k|²)^{1/2}`
    pub bound: f64,
}

impl TailCertificate {
    pub fn holds(&self) -> bool {
        self.tail <= self.bound * (1.0 + 4.0 * f64::EPSILON)
    }
}

/// Projection-tail estimate for a coefficient vector of length `M > N`.
pub fn projection_tail_certificate(c: &[Complex64], n: usize, p: u32) -> Result<TailCertificate> {
    if c.len() <= n + 1 {
        return Err(invalid("c", format!("need more than N+1 = {} coefficients", n + 1)));
    }
    let tail = c[n + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // weights (2k+1)^p/(2N+3)^p, folded in before squaring to avoid overflow
    let scale = (2 * n + 3) as f64;
    let bound = c
        .iter()
        .enumerate()
        .map(|(k, z)| (((2 * k + 1) as f64 / scale).powi(p as i32) * z.norm()).powi(2))
        .sum::<f64>()
        .sqrt();
    let cert = TailCertificate { tail, bound };
    debug_assert!(cert.holds(), "{cert:?}");
    Ok(cert)
}

/// `max_t (Σ_{k≤N} ‖R_k(t) − R_ref,k(t)‖²)^{1/2}` over the shared snapshot
/// times, using the first `N+1` reference modes.
pub fn error_vs_reference(
    run: &[HermiteState],
    reference: &[HermiteState],
    n: usize,
    grid: &Grid,
) -> Result<f64> {
    if run.len() != reference.len() || run.is_empty() {
        return Err(Error::TimeMismatch(format!(
            "{} run snapshots vs {} reference snapshots",
            run.len(),
            reference.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (a, r) in run.iter().zip(reference) {
        if (a.time - r.time).abs() > 1e-9 * a.time.abs().max(1.0) {
            return Err(Error::TimeMismatch(format!("t = {} vs t = {}", a.time, r.time)));
        }
        check_grid(a, grid)?;
        check_grid(r, grid)?;
        if a.n_modes() < n || r.n_modes() < n {
            return Err(Error::DimensionMismatch(format!(
                "need N = {n} modes, run has {}, reference has {}",
                a.n_modes(),
                r.n_modes()
            )));
        }
        let sq: f64 = (0..=n)
            .map(|k| {
                let d: FieldLine = a.modes[k].iter().zip(&r.modes[k]).map(|(x, y)| x - y).collect();
                grid.norm_sqr(&d)
            })
            .sum();
        worst = worst.max(sq.sqrt());
    }
    Ok(worst)
}

/// `ln(E1/E2) / ln(N2/N1)`.
pub fn order_of_accuracy(e1: f64, n1: f64, e2: f64, n2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(invalid("error", "errors must be positive"));
    }
    if !(n1 > 0.0 && n2 > n1) {
        return Err(invalid("N", "need 0 < N1 < N2"));
    }
    Ok((e1 / e2).ln() / (n2 / n1).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerSlice {
    pub xi: Vec<f64>,
    /// `values[i][j] = W(x_j, ξ_i)`
    pub values: Vec<Vec<f64>>,
    /// `max |Im W| / max |W|`
    pub imag_residue: f64,
}

/// `W(x, ξ) = (2π)^{−1/2} Σ_k (−i)^k R_k(x) Φ_k(ξ)`.
pub fn wigner_slice(state: &HermiteState, xi: &[f64]) -> Result<WignerSlice> {
    let n = state.n_modes();
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let norm = (2.0 * PI).sqrt().recip();
    let mut values = Vec::with_capacity(xi.len());
    let (mut max_re, mut max_im) = (0.0_f64, 0.0_f64);
    for &s in xi {
        let phi = phi_all(n, s)?;
        let mut row = vec![ZERO; state.n_points()];
        for (k, m) in state.modes.iter().enumerate() {
            let c = phase[k % 4] * phi[k] * norm;
            row.iter_mut().zip(m).for_each(|(w, r)| *w += r * c);
        }
        for w in &row {
            max_re = max_re.max(w.re.abs());
            max_im = max_im.max(w.im.abs());
        }
        values.push(row.iter().map(|w| w.re).collect());
    }
    let imag_residue = if max_re > 0.0 { max_im / max_re } else { max_im };
    Ok(WignerSlice {
        xi: xi.to_vec(),
        values,
        imag_residue,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l2_norm: f64,
    pub trace: Complex64,
    pub parity_residual: f64,
    pub boundary_mass: f64,
    /// `N_1, N_2, N_3` when requested.
    pub nm: Vec<f64>,
}

impl DiagnosticsRow {
    pub fn observe(state: &HermiteState, grid: &Grid, with_nm: bool) -> Result<Self> {
        let nm = if with_nm {
            (1..=3).map(|m| nm_functional(state, grid, m)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            t: state.time,
            l2_norm: l2_norm(state, grid)?,
            trace: trace(state, grid)?,
            parity_residual: parity_residual(state, grid)?,
            boundary_mass: boundary_mass(state, grid)?,
            nm,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    /// Steps between rows.
    pub cadence: usize,
    pub max_error: Option<f64>,
    pub orders: Vec<f64>,
}

impl DiagnosticsReport {
    pub fn new(cadence: usize) -> Self {
        Self {
            cadence,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: DiagnosticsRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::TimeMismatch(format!(
                    "row at t = {} does not follow t = {}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let with_nm = self.rows.iter().any(|r| !r.nm.is_empty());
        write!(w, "t,l2_norm,trace_re,trace_im,parity_residual,boundary_mass")?;
        if with_nm {
            write!(w, ",n1,n2,n3")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.t, r.l2_norm, r.trace.re, r.trace.im, r.parity_residual, r.boundary_mass
            )?;
            for v in &r.nm {
                write!(w, ",{v:.17e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
