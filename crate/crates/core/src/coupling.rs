//! Coupling matrices `E_{k,l}(x) = ∫ E^ħ(x,y) Φ_k(y) Φ_l(y) dy`.
//!
//! Two assembly paths exist: Gauss–Hermite quadrature for any potential, and
//! the closed form `χħ²x/4 · ⟨Φ_k, y³ Φ_l⟩` for the quartic potential.
//! Either way the matrix is real, symmetric, and zero whenever `k + l` is even.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::{FieldLine, Grid};
use crate::hermite::{self, gauss_hermite_rule, phi_table};
use crate::potential::PotentialModel;

const ADAPTIVE_TOL: f64 = 1e-12;
const ADAPTIVE_MAX_Q: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingMatrix {
    Zero {
        n_modes: usize,
    },
    /// `E_{k,l}(x_j) = profile[j] · ⟨Φ_k, y³ Φ_l⟩`.
    Banded {
        n_modes: usize,
        profile: Vec<f64>,
    },
    /// One `(N+1)²` block per grid node, row-major.
    Dense {
        n_modes: usize,
        n_points: usize,
        entries: Vec<f64>,
        /// Largest `|E_{k,l}|` with `k + l` even before those entries were zeroed.
        parity_defect: f64,
        quad_order: usize,
    },
}

impl CouplingMatrix {
    pub fn n_modes(&self) -> usize {
        match self {
            Self::Zero { n_modes } | Self::Banded { n_modes, .. } | Self::Dense { n_modes, .. } => {
                *n_modes
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero { .. })
    }

    /// `E_{k,l}(x_j)`.
    pub fn entry(&self, j: usize, k: usize, l: usize) -> f64 {
        match self {
            Self::Zero { .. } => 0.0,
            Self::Banded { profile, .. } => profile[j] * hermite::y3_element(k, l),
            Self::Dense {
                n_modes, entries, ..
            } => {
                let m = n_modes + 1;
                entries[j * m * m + k * m + l]
            }
        }
    }

    /// `Σ_l E_{k,l}(x_j) v_l` at one grid node.
    pub fn apply_at(&self, j: usize, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.n_modes() + 1;
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "coupling has {m} modes, vector has {}",
                v.len()
            )));
        }
        Ok((0..m)
            .map(|k| (0..m).map(|l| v[l] * self.entry(j, k, l)).sum())
            .collect())
    }

    /// `out_k += factor · Σ_l E_{k,l} R_l` over all grid nodes.
    pub fn accumulate(&self, modes: &[FieldLine], out: &mut [FieldLine], factor: Complex64) {
        match self {
            Self::Zero { .. } => {}
            Self::Banded { n_modes, profile } => {
                let n = *n_modes;
                for (k, out_k) in out.iter_mut().enumerate().take(n + 1) {
                    let partners = [k.wrapping_sub(3), k.wrapping_sub(1), k + 1, k + 3];
                    for l in partners {
                        if l > n {
                            continue;
                        }
                        let c = factor * hermite::y3_element(k, l);
                        for ((o, &r), &p) in out_k.iter_mut().zip(&modes[l]).zip(profile) {
                            *o += c * (r * p);
                        }
                    }
                }
            }
            Self::Dense {
                n_modes,
                n_points,
                entries,
                ..
            } => {
                let m = n_modes + 1;
                let mut gathered = vec![Complex64::new(0.0, 0.0); m];
                for j in 0..*n_points {
                    for (l, g) in gathered.iter_mut().enumerate() {
                        *g = modes[l][j];
                    }
                    let block = &entries[j * m * m..(j + 1) * m * m];
                    for k in 0..m {
                        let row = &block[k * m..(k + 1) * m];
                        let s: Complex64 = row.iter().zip(&gathered).map(|(&e, &g)| g * e).sum();
                        out[k][j] += factor * s;
                    }
                }
            }
        }
    }

    /// `max_{j,k} Σ_l |E_{k,l}(x_j)|`.
    pub fn max_row_sum(&self) -> f64 {
        match self {
            Self::Zero { .. } => 0.0,
            Self::Banded { n_modes, profile } => {
                let pmax = profile.iter().fold(0.0_f64, |a, p| a.max(p.abs()));
                let n = *n_modes;
                (0..=n)
                    .map(|k| (0..=n).map(|l| hermite::y3_element(k, l)).sum::<f64>())
                    .fold(0.0, f64::max)
                    * pmax
            }
            Self::Dense {
                n_modes,
                entries,
                ..
            } => {
                let m = n_modes + 1;
                entries
                    .chunks(m)
                    .map(|row| row.iter().map(|e| e.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Smallest exact quadrature order for a polynomial potential of degree `d`.
fn minimum_quadrature(n_modes: usize, degree: usize) -> usize {
    n_modes + 1 + (degree - 1).div_ceil(2)
}

/// Default quadrature order `N + ⌈d/2⌉ + 2`.
pub fn default_quadrature(n_modes: usize, degree: usize) -> usize {
    n_modes + degree.div_ceil(2) + 2
}

fn assemble_dense(
    pot: &PotentialModel,
    hbar: f64,
    n_modes: usize,
    grid: &Grid,
    q: usize,
) -> Result<(Vec<f64>, f64)> {
    let rule = gauss_hermite_rule(q)?;
    let table = phi_table(n_modes, &rule.nodes);
    let m = n_modes + 1;
    let mut entries = vec![0.0; grid.len() * m * m];
    let mut parity_defect: f64 = 0.0;
    let mut e_vals = vec![0.0; q];
    for (j, &x) in grid.nodes().iter().enumerate() {
        for (e, &y) in e_vals.iter_mut().zip(&rule.nodes) {
            *e = pot.e_remainder(hbar, x, y);
        }
        let block = &mut entries[j * m * m..(j + 1) * m * m];
        for k in 0..m {
            for l in k..m {
                let term = |i: usize| rule.scaled_weights[i] * e_vals[i] * table[i][k] * table[i][l];
                // mirror nodes are summed pairwise so odd integrands cancel exactly
                let mut s = 0.0;
                for i in 0..q / 2 {
                    s += term(i) + term(q - 1 - i);
                }
                if q % 2 == 1 {
                    s += term(q / 2);
                }
                if (k + l) % 2 == 0 {
                    parity_defect = parity_defect.max(s.abs());
                    s = 0.0;
                }
                block[k * m + l] = s;
                block[l * m + k] = s;
            }
        }
    }
    Ok((entries, parity_defect))
}

/// Dense assembly by Gauss–Hermite quadrature.
///
/// For polynomial potentials `quad_order` defaults to `N + ⌈d/2⌉ + 2` and must
/// be at least `N + 1 + ⌈(d−1)/2⌉`. For callables the order is doubled from
/// `quad_order` (default `N + 8`) until no entry moves by more than `1e-12`.
pub fn assemble_coupling_quadrature(
    pot: &PotentialModel,
    hbar: f64,
    n_modes: usize,
    grid: &Grid,
    quad_order: Option<usize>,
) -> Result<CouplingMatrix> {
    if !(hbar > 0.0) {
        return Err(invalid("hbar", "must be positive"));
    }
    if pot.is_quadratic() {
        return Ok(CouplingMatrix::Zero { n_modes });
    }
    let (entries, parity_defect, q) = match pot.polynomial_degree() {
        Some(d) => {
            let q = quad_order.unwrap_or_else(|| default_quadrature(n_modes, d));
            let need = minimum_quadrature(n_modes, d);
            if q < need {
                return Err(invalid(
                    "quad_order",
                    format!("{q} is below the exactness threshold {need}"),
                ));
            }
            let (e, p) = assemble_dense(pot, hbar, n_modes, grid, q)?;
            (e, p, q)
        }
        None => {
            let mut q = quad_order.unwrap_or(n_modes + 8);
            let (mut prev, _) = assemble_dense(pot, hbar, n_modes, grid, q)?;
            let mut p;
            loop {
                let next_q = 2 * q;
                let (next, next_p) = assemble_dense(pot, hbar, n_modes, grid, next_q)?;
                let change = prev
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                prev = next;
                p = next_p;
                q = next_q;
                if change < ADAPTIVE_TOL {
                    break;
                }
                if 2 * q > ADAPTIVE_MAX_Q {
                    return Err(Error::QuadratureNotConverged {
                        residual: change,
                        quad_order: q,
                    });
                }
            }
            (prev, p, q)
        }
    };
    log::debug!("coupling quadrature Q = {q}, parity defect before zeroing {parity_defect:.3e}");
    Ok(CouplingMatrix::Dense {
        n_modes,
        n_points: grid.len(),
        entries,
        parity_defect,
        quad_order: q,
    })
}

/// Closed-form banded coupling for `V = x²/2 + χx⁴/4`.
pub fn assemble_coupling_quartic(
    chi: f64,
    hbar: f64,
    n_modes: usize,
    grid: &Grid,
) -> Result<CouplingMatrix> {
    if !(chi.is_finite() && chi >= 0.0) {
        return Err(invalid("chi", "must be finite and ≥ 0"));
    }
    if chi == 0.0 {
        return Ok(CouplingMatrix::Zero { n_modes });
    }
    let scale = 0.25 * chi * hbar * hbar;
    Ok(CouplingMatrix::Banded {
        n_modes,
        profile: grid.nodes().iter().map(|&x| scale * x).collect(),
    })
}

/// Picks the cheapest exact representation for the potential.
pub fn assemble_coupling(
    pot: &PotentialModel,
    hbar: f64,
    n_modes: usize,
    grid: &Grid,
) -> Result<CouplingMatrix> {
    match pot {
        PotentialModel::Harmonic => Ok(CouplingMatrix::Zero { n_modes }),
        PotentialModel::Quartic { chi } => assemble_coupling_quartic(*chi, hbar, n_modes, grid),
        PotentialModel::Callable(_) => assemble_coupling_quadrature(pot, hbar, n_modes, grid, None),
    }
}
