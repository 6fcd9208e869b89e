//! Hermite functions, Gauss–Hermite quadrature and coefficient-space operators.
//!
//! The basis is the orthonormal family
//! `Φ_k(y) = ω(y) H_k(y) / √(2^k k!)` with `ω(y) = π^{-1/4} e^{-y²/2}`.
//! Everything here works directly with the normalized three-term recurrence,
//! so neither `H_k` nor `2^k k!` is ever formed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;
// Mantissa rescaling threshold for the recurrence.
const RESCALE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_107_1; // 150 ln 10

/// Highest retained mode and quadrature size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub n_modes: usize,
    pub quad_order: usize,
}

impl BasisSpec {
    pub fn new(n_modes: usize, quad_order: usize) -> Result<Self> {
        if quad_order == 0 {
            return Err(invalid("quad_order", "must be at least 1"));
        }
        Ok(Self {
            n_modes,
            quad_order,
        })
    }

    /// `Q = N + 8`, enough for an exact Gram matrix of modes `0..=N`.
    pub fn with_default_quadrature(n_modes: usize) -> Self {
        Self {
            n_modes,
            quad_order: n_modes + 8,
        }
    }

    pub fn len(&self) -> usize {
        self.n_modes + 1
    }
}

/// Runs the normalized recurrence from a seed `Φ_0 = exp(log_seed)` and calls
/// `visit(k, mantissa, log_scale)` for every `k = 0..=n`. The true value is
/// `mantissa * exp(log_scale)`. Returns the mantissas of the last two entries
/// and their shared log scale.
fn run_recurrence(
    n: usize,
    y: f64,
    log_seed: f64,
    mut visit: impl FnMut(usize, f64, f64),
) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = log_seed;
    visit(0, cur, log_scale);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += LN_RESCALE;
        }
        visit(k + 1, cur, log_scale);
    }
    (cur, prev, log_scale)
}

/// `Φ_0(y), …, Φ_N(y)`.
pub fn phi_all(n: usize, y: f64) -> Result<Vec<f64>> {
    if !y.is_finite() {
        return Err(Error::NonFinite("y"));
    }
    let mut out = vec![0.0; n + 1];
    run_recurrence(n, y, -0.5 * y * y - 0.25 * LN_PI, |k, m, s| {
        out[k] = m * s.exp();
    });
    Ok(out)
}

/// Same as [`phi_all`] for a finite `y` known in advance; used on quadrature
/// nodes and grid points.
pub(crate) fn phi_all_unchecked(n: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    run_recurrence(n, y, -0.5 * y * y - 0.25 * LN_PI, |k, m, s| {
        out[k] = m * s.exp();
    });
    out
}

/// `Φ_k(0)` for `k = 0..=n`. Odd entries are exactly zero.
pub fn phi_at_zero(n: usize) -> Vec<f64> {
    phi_all_unchecked(n, 0.0)
}

/// Returns mantissas of `P_n(y)` and `P_{n-1}(y)` with their shared log scale,
/// where `P_k = Φ_k e^{y²/2}` is the polynomial part.
fn polynomial_tail(n: usize, y: f64) -> (f64, f64, f64) {
    run_recurrence(n, y, -0.25 * LN_PI, |_, _, _| {})
}

/// Gauss–Hermite rule for the weight `e^{-y²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `w_i e^{y_i²}`, evaluated in log form so that it keeps full relative
    /// accuracy at the outer nodes.
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫ f(y) e^{-y²} dy`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }

    /// `∫ g(y) dy` for integrands that carry their own Gaussian decay.
    pub fn integrate_unweighted(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&y, &w)| w * g(y))
            .sum()
    }
}

/// Golub–Welsch eigenvalues of the Jacobi matrix, polished by Newton on
/// `Φ_Q`, with weights from `w_i = 1 / (Q P_{Q-1}(y_i)²)`.
pub fn gauss_hermite_rule(q: usize) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(invalid("Q", "node count must be at least 1"));
    }
    let jacobi = DMatrix::from_fn(q, q, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let two_q_sqrt = (2.0 * q as f64).sqrt();
    for y in nodes.iter_mut() {
        for _ in 0..8 {
            let (pn, pnm1, _) = polynomial_tail(q, *y);
            let denom = two_q_sqrt * pnm1 - *y * pn;
            if denom == 0.0 {
                break;
            }
            let delta = pn / denom;
            *y -= delta;
            if delta.abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
                break;
            }
        }
    }

    for i in 0..q / 2 {
        let a = 0.5 * (nodes[q - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[q - 1 - i] = a;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }

    let mut weights = Vec::with_capacity(q);
    let mut scaled_weights = Vec::with_capacity(q);
    for &y in &nodes {
        let (pn, _, s) = polynomial_tail(q - 1, y);
        let ln_w = -(q as f64).ln() - 2.0 * (pn.abs().ln() + s);
        weights.push(ln_w.exp());
        scaled_weights.push((ln_w + y * y).exp());
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
    })
}

/// Table `Φ_k(y_i)`, indexed `[i][k]`.
pub fn phi_table(n: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
    nodes.iter().map(|&y| phi_all_unchecked(n, y)).collect()
}

/// Hermite coefficients `c_0..c_N` of `G = Σ c_k Φ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(Vec<Complex64>);

impl CoefficientVector {
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        if c.is_empty() {
            return Err(invalid("c", "at least one coefficient required"));
        }
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("coefficient"));
        }
        Ok(Self(c))
    }

    pub fn from_real(c: &[f64]) -> Result<Self> {
        Self::new(c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n_modes + 1])
    }

    /// `e_k` in a space with highest mode `n_modes`.
    pub fn unit(n_modes: usize, k: usize) -> Self {
        let mut v = Self::zeros(n_modes);
        if k <= n_modes {
            v.0[k] = Complex64::new(1.0, 0.0);
        }
        v
    }

    pub fn n_modes(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for CoefficientVector {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

fn ladder(c: &[Complex64], out_len: usize, down_sign: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    (0..out_len)
        .map(|k| {
            let kf = k as f64;
            let from_below = if k >= 1 {
                c.get(k - 1).copied().unwrap_or(zero) * (down_sign * (kf / 2.0).sqrt())
            } else {
                zero
            };
            let from_above = c.get(k + 1).copied().unwrap_or(zero) * ((kf + 1.0) / 2.0).sqrt();
            from_below + from_above
        })
        .collect()
}

/// Multiplication by `y`, keeping `out_len` modes.
pub fn apply_y_padded(c: &[Complex64], out_len: usize) -> Vec<Complex64> {
    ladder(c, out_len, 1.0)
}

/// `d/dy`, keeping `out_len` modes.
pub fn apply_dy_padded(c: &[Complex64], out_len: usize) -> Vec<Complex64> {
    ladder(c, out_len, -1.0)
}

pub fn apply_y(c: &CoefficientVector) -> CoefficientVector {
    CoefficientVector(apply_y_padded(&c.0, c.0.len()))
}

pub fn apply_dy(c: &CoefficientVector) -> CoefficientVector {
    CoefficientVector(apply_dy_padded(&c.0, c.0.len()))
}

pub fn alpha(k: usize) -> f64 {
    let k = k as f64;
    ((k + 1.0) * (k + 2.0) * (k + 3.0) / 8.0).sqrt()
}

pub fn beta(k: usize) -> f64 {
    let k = k as f64;
    1.5 * (k + 1.0) * ((k + 1.0) / 2.0).sqrt()
}

pub fn gamma(k: usize) -> f64 {
    let k = k as f64;
    1.5 * k * (k / 2.0).sqrt()
}

pub fn tau(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let k = k as f64;
    (k * (k - 1.0) * (k - 2.0) / 8.0).sqrt()
}

/// Matrix element `⟨Φ_k, y³ Φ_l⟩`. Symmetric, nonzero only for `|k-l| ∈ {1,3}`.
pub fn y3_element(k: usize, l: usize) -> f64 {
    let (lo, hi) = if k <= l { (k, l) } else { (l, k) };
    match hi - lo {
        1 => beta(lo),
        3 => alpha(lo),
        _ => 0.0,
    }
}

/// Multiplication by `y³` through the four-band recurrence.
pub fn apply_y3_padded(c: &[Complex64], out_len: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let at = |i: isize| -> Complex64 {
        if i < 0 {
            zero
        } else {
            c.get(i as usize).copied().unwrap_or(zero)
        }
    };
    (0..out_len)
        .map(|m| {
            let mi = m as isize;
            let mut acc = zero;
            if m >= 3 {
                acc += at(mi - 3) * alpha(m - 3);
            }
            if m >= 1 {
                acc += at(mi - 1) * beta(m - 1);
            }
            acc += at(mi + 1) * gamma(m + 1);
            acc += at(mi + 3) * tau(m + 3);
            acc
        })
        .collect()
}

pub fn apply_y3(c: &CoefficientVector) -> CoefficientVector {
    CoefficientVector(apply_y3_padded(&c.0, c.0.len()))
}

/// `(y² − d²/dy²)^p`, diagonal with eigenvalues `(2k+1)^p`.
pub fn number_op_pow(c: &CoefficientVector, p: u32) -> CoefficientVector {
    CoefficientVector(
        c.0.iter()
            .enumerate()
            .map(|(k, &z)| z * ((2 * k + 1) as f64).powi(p as i32))
            .collect(),
    )
}

/// Eigenvalue `(-i)^k` of `Φ_k` under `ĝ(ξ) = (2π)^{-1/2} ∫ g(y) e^{-iyξ} dy`.
pub fn fourier_eigen_multiplier(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn project_with_rule<F>(f: &F, n: usize, rule: &QuadratureRule) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for (&y, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let fy = f(y) * w;
        for (ck, phi) in c.iter_mut().zip(phi_all_unchecked(n, y)) {
            *ck += fy * phi;
        }
    }
    c
}

/// Orthogonal projection onto modes `0..=N` by `Q`-point quadrature of
/// `∫ f Φ_k dy`. A warning is logged when repeating the projection with `2Q`
/// nodes moves some coefficient by more than `tol`.
pub fn project_function<F>(f: F, n: usize, q: usize, tol: f64) -> Result<CoefficientVector>
where
    F: Fn(f64) -> Complex64,
{
    let rule = gauss_hermite_rule(q)?;
    let coarse = project_with_rule(&f, n, &rule);
    let fine = project_with_rule(&f, n, &gauss_hermite_rule(2 * q)?);
    let change = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if change > tol {
        log::warn!(
            "projection onto {} modes with Q = {q} is under-resolved: doubling Q moves a coefficient by {change:.3e}",
            n + 1
        );
    }
    CoefficientVector::new(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    // Explicit physicists' Hermite polynomials, only usable for small k.
    fn phi_explicit(k: usize, y: f64) -> f64 {
        let mut h = vec![1.0, 2.0 * y];
        for j in 1..k {
            let next = 2.0 * y * h[j] - 2.0 * j as f64 * h[j - 1];
            h.push(next);
        }
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        (-0.5 * y * y).exp() * std::f64::consts::PI.powf(-0.25) * h[k]
            / (2f64.powi(k as i32) * fact).sqrt()
    }

    #[test]
    fn phi_values_at_origin() {
        let v = phi_all(2, 0.0).unwrap();
        assert_abs_diff_eq!(v[0], 0.751_125_544_464_942_5, epsilon = 1e-15);
        assert_eq!(v[1], 0.0);
        assert_abs_diff_eq!(v[2], -0.531_125_966_013_598_4, epsilon = 1e-15);
        let v = phi_all(0, 1.0).unwrap();
        assert_abs_diff_eq!(v[0], 0.455_580_672_011_332_57, epsilon = 1e-15);
    }

    #[test]
    fn phi_matches_explicit_polynomials() {
        for &y in &[-2.3, -0.4, 0.0, 0.7, 3.1] {
            let v = phi_all(12, y).unwrap();
            for k in 0..=12 {
                assert_abs_diff_eq!(v[k], phi_explicit(k, y), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn phi_rejects_non_finite() {
        assert!(phi_all(3, f64::NAN).is_err());
        assert!(phi_all(3, f64::INFINITY).is_err());
    }

    #[test]
    fn phi_stays_finite_for_large_order() {
        let v = phi_all(10_000, 50.0).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        // y = 50 sits inside the oscillatory region of Φ_10000 (turning point ≈ 141)
        assert!(v[10_000].abs() > 1e-4 && v[10_000].abs() < 1.0);
        let v = phi_all(10_000, -50.0).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn quadrature_small_orders() {
        let r = gauss_hermite_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_abs_diff_eq!(r.weights[0], std::f64::consts::PI.sqrt(), epsilon = 1e-15);

        let r = gauss_hermite_rule(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes[1], s, epsilon = 1e-15);
        for w in &r.weights {
            assert_abs_diff_eq!(*w, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-15);
        }
        assert!(gauss_hermite_rule(0).is_err());
    }

    #[test]
    fn quadrature_moments() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for q in [1, 3, 7, 20, 41, 80, 150] {
            let r = gauss_hermite_rule(q).unwrap();
            let total: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(total, sqrt_pi, epsilon = 1e-14);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for i in 0..q {
                assert_eq!(r.nodes[i], -r.nodes[q - 1 - i]);
            }
            // ∫ y^{2m} e^{-y²} = Γ(m+1/2), exact up to 2m ≤ 2Q-1
            let m = (q.min(8) as i32) - 1;
            let gamma_half: f64 = (0..m).map(|j| j as f64 + 0.5).product::<f64>() * sqrt_pi;
            let moment = r.integrate(|y| y.powi(2 * m));
            assert!((moment - gamma_half).abs() <= 1e-12 * gamma_half, "q={q}");
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for n in [0, 5, 20, 40, 60] {
            let r = gauss_hermite_rule(n + 8).unwrap();
            let table = phi_table(n, &r.nodes);
            for j in 0..=n {
                for k in 0..=n {
                    let g: f64 = (0..r.order())
                        .map(|i| r.scaled_weights[i] * table[i][j] * table[i][k])
                        .sum();
                    let expect = if j == k { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() <= 1e-10, "n={n} j={j} k={k} g={g}");
                }
            }
        }
    }

    #[test]
    fn ladder_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let y0 = apply_y(&CoefficientVector::unit(4, 0));
        assert_abs_diff_eq!(y0[1].re, s, epsilon = 1e-15);
        let y1 = apply_y(&CoefficientVector::unit(4, 1));
        assert_abs_diff_eq!(y1[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(y1[2].re, 1.0, epsilon = 1e-15);
        assert_eq!(apply_y(&CoefficientVector::zeros(3)), CoefficientVector::zeros(3));

        let d0 = apply_dy(&CoefficientVector::unit(4, 0));
        assert_abs_diff_eq!(d0[1].re, -s, epsilon = 1e-15);
        let d1 = apply_dy(&CoefficientVector::unit(4, 1));
        assert_abs_diff_eq!(d1[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(d1[2].re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn ladder_sum_and_difference() {
        let n = 9;
        for k in 0..=n {
            let e = CoefficientVector::unit(n, k);
            let sum: Vec<_> = apply_y(&e)
                .as_slice()
                .iter()
                .zip(apply_dy(&e).as_slice())
                .map(|(a, b)| a + b)
                .collect();
            let diff: Vec<_> = apply_y(&e)
                .as_slice()
                .iter()
                .zip(apply_dy(&e).as_slice())
                .map(|(a, b)| a - b)
                .collect();
            for j in 0..=n {
                let want_sum = if k >= 1 && j == k - 1 { 2.0 * (k as f64 / 2.0).sqrt() } else { 0.0 };
                let want_diff = if k < n && j == k + 1 { 2.0 * ((k as f64 + 1.0) / 2.0).sqrt() } else { 0.0 };
                assert_abs_diff_eq!(sum[j].re, want_sum, epsilon = 1e-14);
                assert_abs_diff_eq!(diff[j].re, want_diff, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn y3_examples() {
        let r0 = apply_y3(&CoefficientVector::unit(8, 0));
        assert_abs_diff_eq!(r0[3].re, 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_abs_diff_eq!(r0[1].re, 1.060_660_171_779_821_3, epsilon = 1e-15);

        let r3 = apply_y3(&CoefficientVector::unit(8, 3));
        let expected = [
            (6, 15f64.sqrt()),
            (4, 6.0 * 2f64.sqrt()),
            (2, 4.5 * 1.5f64.sqrt()),
            (0, 0.75f64.sqrt()),
        ];
        for (k, v) in expected {
            assert_abs_diff_eq!(r3[k].re, v, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(r3[6].re, 3.872_983, epsilon = 1e-6);
        assert_abs_diff_eq!(r3[4].re, 8.485_281, epsilon = 1e-6);
        assert_abs_diff_eq!(r3[2].re, 5.511_352, epsilon = 1e-6);
    }

    #[test]
    fn y3_equals_padded_triple_y() {
        let n = 12;
        let v: Vec<Complex64> = (0..=n)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let once = apply_y_padded(&v, n + 3);
        let twice = apply_y_padded(&once, n + 3);
        let thrice = apply_y_padded(&twice, n + 1);
        let direct = apply_y3_padded(&v, n + 1);
        for k in 0..=n {
            assert!((thrice[k] - direct[k]).norm() <= 1e-13);
        }
    }

    #[test]
    fn number_operator() {
        let e3 = CoefficientVector::unit(5, 3);
        assert_eq!(number_op_pow(&e3, 1)[3], c(7.0));
        assert_eq!(number_op_pow(&CoefficientVector::unit(5, 2), 2)[2], c(25.0));
        let v = CoefficientVector::new(vec![c(1.0), c(-2.0), Complex64::new(0.5, 0.25)]).unwrap();
        assert_eq!(number_op_pow(&v, 0), v);
        assert_eq!(number_op_pow(&v, 2), number_op_pow(&number_op_pow(&v, 1), 1));
    }

    #[test]
    fn fourier_multipliers() {
        assert_eq!(fourier_eigen_multiplier(0), c(1.0));
        assert_eq!(fourier_eigen_multiplier(1), Complex64::new(0.0, -1.0));
        assert_eq!(fourier_eigen_multiplier(4), c(1.0));
    }

    #[test]
    fn fourier_eigenvalue_of_phi1_by_direct_integral() {
        // ĝ(ξ) = (2π)^{-1/2} ∫ Φ_1(y) e^{-iyξ} dy by a fine trapezoid rule
        let xi = 0.8;
        let h = 1e-3;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut y = -20.0;
        while y <= 20.0 {
            acc += Complex64::from_polar(1.0, -y * xi) * phi_all(1, y).unwrap()[1] * h;
            y += h;
        }
        acc /= (2.0 * std::f64::consts::PI).sqrt();
        let want = fourier_eigen_multiplier(1) * phi_all(1, xi).unwrap()[1];
        assert!((acc - want).norm() < 1e-10);
    }

    #[test]
    fn projections() {
        let p5 = |y: f64| c(phi_all(5, y).unwrap()[5]);
        let v = project_function(p5, 8, 16, 1e-12).unwrap();
        for k in 0..=8 {
            let want = if k == 5 { 1.0 } else { 0.0 };
            assert!((v[k] - c(want)).norm() < 1e-13);
        }
        let v = project_function(p5, 4, 16, 1e-12).unwrap();
        assert!(v.norm() < 1e-13);

        let g = |y: f64| c((-0.5 * y * y).exp());
        let v = project_function(g, 6, 14, 1e-12).unwrap();
        assert_abs_diff_eq!(v[0].re, 1.331_335_363_800_389_7, epsilon = 1e-13);
        assert!(v.as_slice()[1..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn parity_of_phi() {
        for &y in &[0.3, 1.7, 4.2, 11.0] {
            let p = phi_all(60, y).unwrap();
            let m = phi_all(60, -y).unwrap();
            for k in 0..=60 {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((m[k] - s * p[k]).abs() <= 1e-13);
            }
        }
    }
}
