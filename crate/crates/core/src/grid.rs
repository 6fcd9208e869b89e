//! Uniform periodic grid in `x` and the transport operators `D`, `D*`.
//!
//! All three derivative schemes are skew-adjoint with respect to
//! [`Grid::inner_product`], so `D = ∂_x + V'` and `D* = −∂_x + V'` form an
//! exact discrete adjoint pair.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::potential::PotentialModel;

pub type FieldLine = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    Central2,
    #[default]
    Central4,
    SpectralFourier,
}

impl DerivativeScheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Central2 => "central2",
            Self::Central4 => "central4",
            Self::SpectralFourier => "spectral_fourier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "central2" => Some(Self::Central2),
            "central4" => Some(Self::Central4),
            "spectral_fourier" | "spectral" => Some(Self::SpectralFourier),
            _ => None,
        }
    }
}

/// Periodic grid on `[x_min, x_max)` with `n_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub scheme: DerivativeScheme,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, scheme: DerivativeScheme) -> Result<Self> {
        let spec = Self {
            x_min,
            x_max,
            n_points,
            scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(invalid("grid", "need finite x_min < x_max"));
        }
        if self.n_points < 8 {
            return Err(invalid("grid.nx", format!("need at least 8 points, got {}", self.n_points)));
        }
        if self.scheme == DerivativeScheme::SpectralFourier && self.n_points % 2 != 0 {
            return Err(invalid("grid.nx", "spectral_fourier needs an even point count"));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }
}

#[derive(Clone)]
struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // i k_m / Nx, Nyquist entry zeroed
    symbol: Vec<Complex64>,
}

/// A [`GridSpec`] with its nodes and, for the spectral scheme, FFT plans.
#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<f64>,
    spectral: Option<SpectralPlan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_points;
        let dx = spec.dx();
        let nodes = (0..n).map(|j| spec.x_min + j as f64 * dx).collect();
        let spectral = (spec.scheme == DerivativeScheme::SpectralFourier).then(|| {
            let mut planner = FftPlanner::new();
            let base = 2.0 * std::f64::consts::PI / spec.length();
            let symbol = (0..n)
                .map(|m| {
                    let k = if m < n / 2 {
                        m as f64
                    } else if m == n / 2 {
                        0.0
                    } else {
                        m as f64 - n as f64
                    };
                    Complex64::new(0.0, base * k / n as f64)
                })
                .collect();
            SpectralPlan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                symbol,
            }
        });
        Ok(Self {
            spec,
            nodes,
            spectral,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> FieldLine {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Largest modulus of the derivative's Fourier symbol over the grid's
    /// wavenumbers, in units of 1/length.
    pub fn derivative_symbol_max(&self) -> f64 {
        let n = self.len();
        let dx = self.dx();
        match self.spec.scheme {
            DerivativeScheme::SpectralFourier => {
                2.0 * std::f64::consts::PI / self.spec.length() * (n / 2 - 1) as f64
            }
            DerivativeScheme::Central2 | DerivativeScheme::Central4 => (0..n)
                .map(|m| {
                    let theta = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
                    let s = if self.spec.scheme == DerivativeScheme::Central2 {
                        theta.sin()
                    } else {
                        (8.0 * theta.sin() - (2.0 * theta).sin()) / 6.0
                    };
                    s.abs() / dx
                })
                .fold(0.0, f64::max),
        }
    }

    /// Periodic `∂_x f` written into `out`.
    pub fn ddx_into(&self, f: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(f.len(), n);
        debug_assert_eq!(out.len(), n);
        let inv_dx = 1.0 / self.dx();
        match self.spec.scheme {
            DerivativeScheme::Central2 => {
                let c = 0.5 * inv_dx;
                for j in 0..n {
                    let jp = if j + 1 == n { 0 } else { j + 1 };
                    let jm = if j == 0 { n - 1 } else { j - 1 };
                    out[j] = (f[jp] - f[jm]) * c;
                }
            }
            DerivativeScheme::Central4 => {
                let c = inv_dx / 12.0;
                for j in 0..n {
                    let jp1 = (j + 1) % n;
                    let jp2 = (j + 2) % n;
                    let jm1 = (j + n - 1) % n;
                    let jm2 = (j + n - 2) % n;
                    out[j] = ((f[jp1] - f[jm1]) * 8.0 - (f[jp2] - f[jm2])) * c;
                }
            }
            DerivativeScheme::SpectralFourier => {
                let plan = self.spectral.as_ref().expect("spectral plan");
                out.copy_from_slice(f);
                plan.forward.process(out);
                for (z, s) in out.iter_mut().zip(&plan.symbol) {
                    *z *= s;
                }
                plan.inverse.process(out);
            }
        }
    }

    pub fn ddx(&self, f: &[Complex64]) -> FieldLine {
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        self.ddx_into(f, &mut out);
        out
    }

    /// `D f = ∂_x f + V'(x) f`.
    pub fn apply_d(&self, pot: &PotentialModel, f: &[Complex64]) -> FieldLine {
        let mut out = self.ddx(f);
        for ((o, &x), &v) in out.iter_mut().zip(&self.nodes).zip(f) {
            *o += v * pot.force(x);
        }
        out
    }

    /// `D* f = −∂_x f + V'(x) f`.
    pub fn apply_dstar(&self, pot: &PotentialModel, f: &[Complex64]) -> FieldLine {
        let mut out = self.ddx(f);
        for ((o, &x), &v) in out.iter_mut().zip(&self.nodes).zip(f) {
            *o = v * pot.force(x) - *o;
        }
        out
    }

    /// `Δx Σ_j f_j conj(g_j)`.
    pub fn inner_product(&self, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of lengths {} and {}",
                f.len(),
                g.len()
            )));
        }
        Ok(dot(f, g) * self.dx())
    }

    pub fn norm_sqr(&self, f: &[Complex64]) -> f64 {
        f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx()
    }

    /// Indicator of the outer 10% of the domain at either end.
    pub fn is_boundary_node(&self, j: usize) -> bool {
        let band = 0.1 * self.len() as f64;
        (j as f64) < band || (j as f64) >= self.len() as f64 - band
    }
}

/// `Σ f_j conj(g_j)` in fixed order.
pub(crate) fn dot(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
}
