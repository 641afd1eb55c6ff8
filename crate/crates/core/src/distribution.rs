//! Finite-size tests for spectral and singular-value distributions.
//!
//! The primary statistic is `d'` between the eigenvalues (or singular values) and an
//! equally sized sample of the symbol; a fixed family of hat test functions gives a
//! second, weak-convergence flavoured gap. Both are compared with [`tau`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::glt::{Domain, MatrixFamily, SymbolFn};
use crate::matching::d_prime;
use crate::spectral::{self, C64};

/// Uniform probability measure on a finite multiset of complex points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<C64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empirical measure needs at least one point".into()));
        }
        if let Some(z) = points.iter().find(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("measure point {z}")));
        }
        Ok(Self { points })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(1/n) sum F(z_i)`.
    pub fn mean(&self, f: impl Fn(C64) -> f64) -> f64 {
        self.points.iter().map(|&z| f(z)).sum::<f64>() / self.points.len() as f64
    }
}

/// Acceptance threshold `max(0.1, 5 / sqrt(n))`.
pub fn tau(n: usize) -> f64 {
    (5.0 / (n as f64).sqrt()).max(0.1)
}

fn sample_at(k: &SymbolFn, x: f64, theta: f64, dx: f64, dt: f64) -> Result<C64> {
    let v = k.eval(x, theta);
    if v.is_finite() {
        return Ok(v);
    }
    // isolated singularities: nudge inside the cell
    for shift in [1e-6, -1e-6, 1e-3, -1e-3] {
        let v = k.eval(x + shift * dx, theta + shift * dt);
        if v.is_finite() {
            return Ok(v);
        }
    }
    Err(Error::NonFinite(format!("symbol `{}` at ({x}, {theta})", k.label())))
}

/// Symbol values at the midpoints of `n` equal cells of its domain; the product domain
/// uses an `m x m` grid and needs `n = m^2`.
pub fn sample_symbol(k: &SymbolFn, n: usize) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let mut points = Vec::with_capacity(n);
    match k.domain() {
        Domain::X => {
            let h = 1.0 / n as f64;
            for j in 0..n {
                points.push(sample_at(k, (j as f64 + 0.5) * h, 0.0, h, 0.0)?);
            }
        }
        Domain::Theta => {
            let h = 2.0 * PI / n as f64;
            for j in 0..n {
                points.push(sample_at(k, 0.0, -PI + (j as f64 + 0.5) * h, 0.0, h)?);
            }
        }
        Domain::XTheta => {
            let m = (n as f64).sqrt().round() as usize;
            if m * m != n {
                return Err(Error::Config(format!(
                    "two-dimensional symbol needs a square sample size, got {n}"
                )));
            }
            let hx = 1.0 / m as f64;
            let ht = 2.0 * PI / m as f64;
            for a in 0..m {
                let x = (a as f64 + 0.5) * hx;
                for b in 0..m {
                    points.push(sample_at(k, x, -PI + (b as f64 + 0.5) * ht, hx, ht)?);
                }
            }
        }
    }
    EmpiricalMeasure::new(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVerdict {
    pub n: usize,
    pub dprime_value: f64,
    pub test_functional_gap: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n_used: usize,
}

fn hat(s: f64) -> f64 {
    (1.0 - s.abs()).max(0.0)
}

/// Largest discrepancy of the 81 tensor hat functions centred on a 9 x 9 grid over
/// the common bounding box.
pub fn test_functional_gap(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let all = a.points().iter().chain(b.points());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let diag = (x1 - x0).hypot(y1 - y0);
    let width = if diag > 0.0 { 2.0 * diag / 8.0 } else { 1.0 };
    let mut gap: f64 = 0.0;
    for a_idx in 0..9 {
        let cx = x0 + (x1 - x0) * a_idx as f64 / 8.0;
        for b_idx in 0..9 {
            let cy = y0 + (y1 - y0) * b_idx as f64 / 8.0;
            let f = |z: C64| hat((z.re - cx) / width) * hat((z.im - cy) / width);
            gap = gap.max((a.mean(f) - b.mean(f)).abs());
        }
    }
    gap
}

/// Verdict for two equally sized point sets at size `n`.
pub fn verdict_from_points(n: usize, spectrum: &EmpiricalMeasure, symbol: &EmpiricalMeasure) -> Result<DistributionVerdict> {
    let dprime_value = d_prime(spectrum.points(), symbol.points())?.value;
    let test_functional_gap = test_functional_gap(spectrum, symbol);
    let threshold = tau(n);
    Ok(DistributionVerdict {
        n,
        dprime_value,
        test_functional_gap,
        threshold,
        pass: dprime_value <= threshold && test_functional_gap <= threshold,
        n_used: spectrum.len(),
    })
}

/// Eigenvalue distribution test of `family` against `k` at each size.
pub fn check_lambda(family: &dyn MatrixFamily, k: &SymbolFn, n_list: &[usize]) -> Result<Vec<DistributionVerdict>> {
    n_list
        .iter()
        .map(|&n| {
            let samples = sample_symbol(k, n)?;
            let eig = EmpiricalMeasure::new(spectral::eigenvalues(&family.matrix(n)?)?)?;
            verdict_from_points(n, &eig, &samples)
        })
        .collect()
}

/// Singular value distribution test of `family` against `|k|` at each size.
pub fn check_sigma(family: &dyn MatrixFamily, k: &SymbolFn, n_list: &[usize]) -> Result<Vec<DistributionVerdict>> {
    n_list
        .iter()
        .map(|&n| {
            let samples = sample_symbol(&k.modulus(), n)?;
            let sv = EmpiricalMeasure::from_real(&spectral::singular_values(&family.matrix(n)?)?)?;
            verdict_from_points(n, &sv, &samples)
        })
        .collect()
}

/// Whether `h` and `k` sample to `d'`-close multisets; returns the verdict and `d'`.
pub fn is_rearrangement(h: &SymbolFn, k: &SymbolFn, n: usize) -> Result<(bool, f64)> {
    let gap = d_prime(sample_symbol(h, n)?.points(), sample_symbol(k, n)?.points())?.value;
    Ok((gap <= tau(n), gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDistributedPoint {
    pub n: usize,
    /// Fraction of singular values above `eps`.
    pub fraction: f64,
    /// `(1/n) ||Z_n||_1`.
    pub trace_norm_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDistributedReport {
    pub trace: Vec<ZeroDistributedPoint>,
    pub pass: bool,
}

pub const ZERO_DIST_EPS: f64 = 0.05;
pub const ZERO_DIST_ETA: f64 = 0.05;

/// Decay of the fraction of non-negligible singular values; decided at the largest size.
pub fn zero_distributed_check(family: &dyn MatrixFamily, n_list: &[usize]) -> Result<ZeroDistributedReport> {
    zero_distributed_check_with(family, n_list, ZERO_DIST_EPS, ZERO_DIST_ETA)
}

pub fn zero_distributed_check_with(
    family: &dyn MatrixFamily,
    n_list: &[usize],
    eps: f64,
    eta: f64,
) -> Result<ZeroDistributedReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("no sizes given".into()));
    }
    let mut trace = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let s = spectral::singular_values(&family.matrix(n)?)?;
        trace.push(ZeroDistributedPoint {
            n,
            fraction: s.iter().filter(|&&x| x > eps).count() as f64 / n as f64,
            trace_norm_ratio: s.iter().sum::<f64>() / n as f64,
        });
    }
    let largest = trace.iter().max_by_key(|p| p.n).expect("non-empty");
    let pass = largest.fraction <= eta;
    Ok(ZeroDistributedReport { trace, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{corner, Corner, FourierSpec};
    use crate::glt::SeqExpr;
    use crate::spectral::{ComplexMatrix, ONE, ZERO};

    #[test]
    fn midpoint_samples() {
        let k = SymbolFn::of_x("x", |x| C64::new(x, 0.0));
        let s = sample_symbol(&k, 4).unwrap();
        let want = [0.125, 0.375, 0.625, 0.875];
        for (z, w) in s.points().iter().zip(want) {
            assert_eq!(z.re, w);
        }
        let c = sample_symbol(&SymbolFn::constant(C64::new(2.0, 1.0)), 5).unwrap();
        assert!(c.points().iter().all(|z| *z == C64::new(2.0, 1.0)));
        let e = SymbolFn::of_x("2e^{2pi i x}", |x| C64::from_polar(2.0, 2.0 * PI * x));
        let s = sample_symbol(&e, 16).unwrap();
        assert!(s.points().iter().all(|z| (z.norm() - 2.0).abs() < 1e-15));
        let xt = SymbolFn::of_x_theta("x cos t", |x, t| C64::new(x * t.cos(), 0.0));
        assert!(matches!(sample_symbol(&xt, 10), Err(Error::Config(_))));
        assert_eq!(sample_symbol(&xt, 16).unwrap().len(), 16);
    }

    #[test]
    fn singular_symbol_is_resampled() {
        let k = SymbolFn::of_x("1/(x-0.5)", |x| C64::new(1.0 / (x - 0.5), 0.0));
        let s = sample_symbol(&k, 1).unwrap();
        assert!(s.points()[0].is_finite());
    }

    #[test]
    fn thresholds() {
        assert_eq!(tau(2500), 0.1);
        assert!((tau(100) - 0.5).abs() < 1e-15);
        assert!(tau(1024) < 0.16);
    }

    #[test]
    fn tridiagonal_toeplitz_passes() {
        let e = SeqExpr::toeplitz(FourierSpec::two_cos());
        let k = e.symbol().unwrap().clone();
        let v = check_lambda(&e, &k, &[256]).unwrap();
        assert!(v[0].pass, "{v:?}");
        assert!(v[0].dprime_value <= 0.1);
    }

    #[test]
    fn shift_singular_values() {
        let e = SeqExpr::toeplitz(FourierSpec::exp_i());
        let k = e.symbol().unwrap().clone();
        let v = check_sigma(&e, &k, &[64]).unwrap();
        assert!(v[0].pass);
        assert!((v[0].dprime_value - 1.0 / 64.0).abs() < 1e-12);
        let zero = |n: usize| Ok(ComplexMatrix::zeros(n));
        let v = check_sigma(&zero, &SymbolFn::constant(ZERO), &[32]).unwrap();
        assert!(v[0].pass && v[0].dprime_value == 0.0);
    }

    #[test]
    fn rearrangements() {
        let x = SymbolFn::of_x("x", |x| C64::new(x, 0.0));
        let flip = SymbolFn::of_x("1-x", |x| C64::new(1.0 - x, 0.0));
        let half = SymbolFn::of_x("x/2", |x| C64::new(x / 2.0, 0.0));
        for n in [64, 256, 1024] {
            let (ok, gap) = is_rearrangement(&x, &flip, n).unwrap();
            assert!(ok && gap < 1e-12);
        }
        assert_eq!(is_rearrangement(&x, &x, 100).unwrap(), (true, 0.0));
        let (ok, gap) = is_rearrangement(&x, &half, 1024).unwrap();
        assert!(!ok && gap > 0.2);
    }

    #[test]
    fn zero_distribution() {
        let sizes = [16, 32, 64];
        let zero = |n: usize| Ok(ComplexMatrix::zeros(n));
        let r = zero_distributed_check(&zero, &sizes).unwrap();
        assert!(r.pass && r.trace.iter().all(|p| p.fraction == 0.0));
        let giant = |n: usize| corner(n, C64::new((n as f64).powi(n as i32 - 1), 0.0), Corner::BottomLeft);
        let r = zero_distributed_check(&giant, &sizes).unwrap();
        assert!(r.pass);
        assert_eq!(r.trace[2].fraction, 1.0 / 64.0);
        let id = |n: usize| Ok(ComplexMatrix::identity(n));
        let r = zero_distributed_check(&id, &sizes).unwrap();
        assert!(!r.pass && r.trace[2].fraction == 1.0);
        let _ = ONE;
    }

    #[test]
    fn own_eigenvalues_as_symbol() {
        let m = crate::generators::complex_gaussian_matrix(20, 4);
        let eig = spectral::eigenvalues(&m).unwrap();
        let k = SymbolFn::piecewise(eig.clone());
        let fam = move |_: usize| Ok(m.clone());
        let v = check_lambda(&fam, &k, &[20]).unwrap();
        assert!(v[0].dprime_value < 1e-12);
    }
}
