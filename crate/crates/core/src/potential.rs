//! Potentials `V(x)`, the Weyl difference quotient and its Taylor remainder.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied potential: `derivs[n]` is `V^{(n)}`, `derivs[0]` is `V`.
#[derive(Clone)]
pub struct CallablePotential {
    derivs: Vec<ScalarFn>,
}

impl CallablePotential {
    /// At least `V` and `V'` are required.
    pub fn new(derivs: Vec<ScalarFn>) -> Result<Self> {
        if derivs.len() < 2 {
            return Err(invalid("derivs", "need at least V and V'"));
        }
        if derivs.len() > 5 {
            return Err(invalid("derivs", "at most V..V'''' are used"));
        }
        log::warn!("callable potential: confinement V(x) → +∞ is not checked");
        Ok(Self { derivs })
    }

    pub fn max_derivative(&self) -> usize {
        self.derivs.len() - 1
    }
}

impl fmt::Debug for CallablePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CallablePotential(V..V^({}))", self.max_derivative())
    }
}

#[derive(Debug, Clone)]
pub enum PotentialModel {
    /// `V(x) = x²/2`.
    Harmonic,
    /// `V(x) = x²/2 + χ x⁴/4`.
    Quartic { chi: f64 },
    Callable(CallablePotential),
}

impl PotentialModel {
    pub fn quartic(chi: f64) -> Result<Self> {
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(invalid("chi", format!("must be finite and ≥ 0, got {chi}")));
        }
        Ok(Self::Quartic { chi })
    }

    /// Degree in `x` for polynomial kinds.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Self::Harmonic => Some(2),
            Self::Quartic { chi } if *chi == 0.0 => Some(2),
            Self::Quartic { .. } => Some(4),
            Self::Callable(_) => None,
        }
    }

    /// True when the remainder vanishes identically.
    pub fn is_quadratic(&self) -> bool {
        self.polynomial_degree() == Some(2)
    }

    pub fn v_eval(&self, x: f64) -> f64 {
        match self {
            Self::Harmonic => 0.5 * x * x,
            Self::Quartic { chi } => 0.5 * x * x + 0.25 * chi * x.powi(4),
            Self::Callable(c) => (c.derivs[0])(x),
        }
    }

    /// `V^{(n)}(x)` for `n = 1..=4`.
    pub fn v_deriv(&self, x: f64, n: usize) -> Result<f64> {
        if !(1..=4).contains(&n) {
            return Err(invalid("n", format!("derivative order must be in 1..=4, got {n}")));
        }
        Ok(match self {
            Self::Harmonic => match n {
                1 => x,
                2 => 1.0,
                _ => 0.0,
            },
            Self::Quartic { chi } => match n {
                1 => x + chi * x * x * x,
                2 => 1.0 + 3.0 * chi * x * x,
                3 => 6.0 * chi * x,
                _ => 6.0 * chi,
            },
            Self::Callable(c) => {
                let f = c.derivs.get(n).ok_or(Error::DerivativeUnavailable {
                    requested: n,
                    available: c.max_derivative(),
                })?;
                f(x)
            }
        })
    }

    /// `V'(x)`, always available.
    pub fn force(&self, x: f64) -> f64 {
        match self {
            Self::Harmonic => x,
            Self::Quartic { chi } => x + chi * x * x * x,
            Self::Callable(c) => (c.derivs[1])(x),
        }
    }

    /// `(V(x + ħy/2) − V(x − ħy/2)) / ħ`.
    pub fn weyl_quotient(&self, hbar: f64, x: f64, y: f64) -> f64 {
        match self {
            Self::Harmonic => x * y,
            Self::Quartic { chi } => {
                (x + chi * x * x * x) * y + 0.25 * chi * hbar * hbar * x * y * y * y
            }
            Self::Callable(c) => {
                let h = 0.5 * hbar * y;
                ((c.derivs[0])(x + h) - (c.derivs[0])(x - h)) / hbar
            }
        }
    }

    /// `E^ħ(x, y)`: the quotient minus its semiclassical limit `V'(x) y`.
    pub fn e_remainder(&self, hbar: f64, x: f64, y: f64) -> f64 {
        match self {
            Self::Harmonic => 0.0,
            Self::Quartic { chi } => 0.25 * chi * hbar * hbar * x * y * y * y,
            Self::Callable(_) => self.weyl_quotient(hbar, x, y) - self.force(x) * y,
        }
    }

    /// `sup |V'''|` over `[-r, r]`. Sampled on 4097 points for callables.
    pub fn e_bound_coefficient(&self, domain_radius: f64) -> Result<f64> {
        if !(domain_radius > 0.0) {
            return Err(invalid("domain_radius", "must be positive"));
        }
        match self {
            Self::Harmonic => Ok(0.0),
            Self::Quartic { chi } => Ok(6.0 * chi * domain_radius),
            Self::Callable(_) => {
                let samples = 4096;
                let mut sup: f64 = 0.0;
                for i in 0..=samples {
                    let x = -domain_radius + 2.0 * domain_radius * i as f64 / samples as f64;
                    sup = sup.max(self.v_deriv(x, 3)?.abs());
                }
                Ok(sup)
            }
        }
    }
}

/// Reduced Planck constant in `(0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HbarValue(f64);

impl HbarValue {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar <= 2.0) {
            return Err(invalid("hbar", format!("must lie in (0, 2], got {hbar}")));
        }
        Ok(Self(hbar))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}
