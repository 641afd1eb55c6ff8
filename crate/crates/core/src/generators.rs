//! Concrete matrix families: Toeplitz matrices from Fourier data, diagonal sampling,
//! Jordan blocks, rank-one corners, the three counterexample pairs, seeded random
//! perturbations with prescribed norm growth and the banded cycle layout.
//!
//! Orientation: `T_n(f) = [f_{i-j}]`, so `f_1` sits on the subdiagonal and
//! `T_n(e^{i theta})` equals the nilpotent Jordan block `J_n` (ones at `(i+1, i)`).
//! The entry closing the cycle of `J_n` is then the top-right corner `(1, n)`; the
//! counterexamples place their corner there, which is what makes `J_n + corner` a
//! circulant shift.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{self, ComplexMatrix, C64, ONE, ZERO};
use crate::symbolic::Formula;

pub type ThetaFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
pub type XFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Quadrature size used when none is configured: `max(4096, 8 n)`.
pub fn default_quadrature(n: usize) -> usize {
    4096.max(8 * n)
}

/// Fourier data of a Toeplitz generator.
#[derive(Clone)]
pub enum FourierSpec {
    /// Explicit coefficients `f_k`; absent indices are zero.
    Coefficients(BTreeMap<i64, C64>),
    /// Symbol on `[-pi, pi]`, integrated on a uniform grid of `quadrature` points.
    Symbol {
        f: ThetaFn,
        quadrature: Option<usize>,
        label: String,
    },
}

impl fmt::Debug for FourierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Coefficients(c) => f.debug_tuple("Coefficients").field(c).finish(),
            Self::Symbol { quadrature, label, .. } => f
                .debug_struct("Symbol")
                .field("label", label)
                .field("quadrature", quadrature)
                .finish(),
        }
    }
}

impl FourierSpec {
    pub fn coefficients(pairs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in pairs {
            *map.entry(k).or_insert(ZERO) += c;
        }
        Self::Coefficients(map)
    }

    pub fn symbol(label: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::Symbol {
            f: Arc::new(f),
            quadrature: None,
            label: label.into(),
        }
    }

    /// Symbol given as a formula in `t`.
    pub fn formula(formula: Formula) -> Self {
        let label = formula.source().to_string();
        Self::symbol(label, move |theta| {
            formula.eval(crate::symbolic::Vars {
                theta,
                ..Default::default()
            })
        })
    }

    pub fn with_quadrature(self, m: usize) -> Self {
        match self {
            Self::Symbol { f, label, .. } => Self::Symbol {
                f,
                quadrature: Some(m),
                label,
            },
            other => other,
        }
    }

    /// `2 cos(theta)`: `f_{-1} = f_1 = 1`.
    pub fn two_cos() -> Self {
        Self::coefficients([(-1, ONE), (1, ONE)])
    }

    /// `e^{i theta}`: `f_1 = 1`.
    pub fn exp_i() -> Self {
        Self::coefficients([(1, ONE)])
    }

    /// `2 i sin(theta) = e^{i theta} - e^{-i theta}`.
    pub fn two_i_sin() -> Self {
        Self::coefficients([(1, ONE), (-1, -ONE)])
    }

    /// The symbol `f(theta)` itself.
    pub fn value(&self, theta: f64) -> C64 {
        match self {
            Self::Coefficients(map) => map
                .iter()
                .map(|(&k, &c)| c * C64::from_polar(1.0, k as f64 * theta))
                .sum(),
            Self::Symbol { f, .. } => f(theta),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Coefficients(map) => {
                let terms: Vec<String> = map.iter().map(|(k, c)| format!("{c}*e^(i{k}t)")).collect();
                terms.join(" + ")
            }
            Self::Symbol { label, .. } => label.clone(),
        }
    }

    /// Coefficients `f_k` for `k = -(n-1) ..= n-1`, indexed by `k + n - 1`.
    pub fn coefficient_table(&self, n: usize) -> Result<Vec<C64>> {
        let width = 2 * n - 1;
        match self {
            Self::Coefficients(map) => {
                let mut out = vec![ZERO; width];
                for (&k, &c) in map.range(-(n as i64 - 1)..=(n as i64 - 1)) {
                    out[(k + n as i64 - 1) as usize] = c;
                }
                Ok(out)
            }
            Self::Symbol { f, quadrature, label } => {
                let m = quadrature.unwrap_or_else(|| default_quadrature(n));
                if m < 4 * n {
                    return Err(Error::Config(format!(
                        "quadrature size {m} too small for n = {n} (need at least {})",
                        4 * n
                    )));
                }
                let step = 2.0 * PI / m as f64;
                let mut out = vec![ZERO; width];
                for j in 0..m {
                    let theta = -PI + step * j as f64;
                    let mut value = f(theta);
                    if !value.is_finite() {
                        value = f(theta + 1e-9 * step);
                    }
                    if !value.is_finite() {
                        return Err(Error::NonFinite(format!("symbol `{label}` at theta = {theta}")));
                    }
                    // accumulate value * e^{-ik theta} for k = 0..n-1 and its mirror
                    let w = C64::from_polar(1.0, -theta);
                    let mut pos = value;
                    let mut neg = value;
                    out[n - 1] += value;
                    for k in 1..n {
                        pos *= w;
                        neg *= w.conj();
                        out[n - 1 + k] += pos;
                        out[n - 1 - k] += neg;
                    }
                }
                for c in &mut out {
                    *c /= m as f64;
                }
                Ok(out)
            }
        }
    }
}

/// `T_n(f)`, entry `(i, j) = f_{i-j}`.
pub fn toeplitz(spec: &FourierSpec, n: usize) -> Result<ComplexMatrix> {
    require_positive(n)?;
    let table = spec.coefficient_table(n)?;
    ComplexMatrix::from_fn(n, |i, j| table[i + n - 1 - j])
}

/// `D_n(a) = diag(a(1/n), ..., a(n/n))`.
pub fn diag_sampling(a: &dyn Fn(f64) -> C64, n: usize) -> Result<ComplexMatrix> {
    require_positive(n)?;
    let mut diag = Vec::with_capacity(n);
    for i in 1..=n {
        let x = i as f64 / n as f64;
        let v = a(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("diagonal sample a({x}) = {v}")));
        }
        diag.push(v);
    }
    ComplexMatrix::from_diag(&diag)
}

/// `lambda` on the diagonal, ones on the subdiagonal.
pub fn jordan_block(n: usize, lambda: C64) -> Result<ComplexMatrix> {
    require_positive(n)?;
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            lambda
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    /// Entry `(n, 1)`, the matrix `e_n e_1^T`.
    BottomLeft,
    /// Entry `(1, n)`, the matrix `e_1 e_n^T`; closes the cycle of [`jordan_block`].
    TopRight,
}

impl Corner {
    /// The corner completing `J_n` to a cycle under this crate's orientation.
    pub const CYCLE: Corner = Corner::TopRight;

    fn position(self, n: usize) -> (usize, usize) {
        match self {
            Corner::BottomLeft => (n - 1, 0),
            Corner::TopRight => (0, n - 1),
        }
    }
}

/// Matrix with the single non-zero entry `c` in the given corner.
pub fn corner(n: usize, c: C64, which: Corner) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput("corner matrices need n >= 2".into()));
    }
    let mut m = ComplexMatrix::zeros(n);
    let (i, j) = which.position(n);
    m.set(i, j, c);
    Ok(m)
}

/// Members of the three counterexample pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Counterexample {
    /// `(1/n) T_n(2 cos) + n^{n-1}` on both anti-diagonal corners.
    Ce1X,
    /// `(1/n) T_n(2i sin) + n^{n-1}` corners of opposite sign, skew-symmetric.
    Ce1Y,
    /// `J_n + (1/n)^n` cycle corner.
    Ce2X,
    /// `(1/n)` cycle corner.
    Ce2Y,
    /// `J_n +` unit cycle corner (the circulant shift).
    Ce3X,
    /// minus the unit cycle corner.
    Ce3Y,
}

impl Counterexample {
    pub const ALL: [Counterexample; 6] = [
        Self::Ce1X,
        Self::Ce1Y,
        Self::Ce2X,
        Self::Ce2Y,
        Self::Ce3X,
        Self::Ce3Y,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ce1X => "ce1-X",
            Self::Ce1Y => "ce1-Y",
            Self::Ce2X => "ce2-X",
            Self::Ce2Y => "ce2-Y",
            Self::Ce3X => "ce3-X",
            Self::Ce3Y => "ce3-Y",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Largest admissible corner weight of the first counterexample.
pub const CE1_MAGNITUDE_LIMIT: f64 = 1e300;

/// `n^{n-1}`, rejected once it exceeds [`CE1_MAGNITUDE_LIMIT`].
pub fn ce1_corner_weight(n: usize) -> Result<f64> {
    let w = (n as f64).powi(n as i32 - 1);
    if !w.is_finite() || w > CE1_MAGNITUDE_LIMIT {
        return Err(Error::Overflow(format!("n^(n-1) for n = {n} exceeds {CE1_MAGNITUDE_LIMIT:e}")));
    }
    Ok(w)
}

pub fn counterexample(id: Counterexample, n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput("counterexamples need n >= 2".into()));
    }
    let inv_n = 1.0 / n as f64;
    let cycle = |c: f64| corner(n, C64::new(c, 0.0), Corner::CYCLE);
    let other = |c: f64| corner(n, C64::new(c, 0.0), Corner::BottomLeft);
    Ok(match id {
        Counterexample::Ce1X => {
            let w = ce1_corner_weight(n)?;
            toeplitz(&FourierSpec::two_cos(), n)?.scale_real(inv_n) + cycle(w)? + other(w)?
        }
        Counterexample::Ce1Y => {
            let w = ce1_corner_weight(n)?;
            toeplitz(&FourierSpec::two_i_sin(), n)?.scale_real(inv_n) + cycle(w)? - other(w)?
        }
        Counterexample::Ce2X => jordan_block(n, ZERO)? + cycle(inv_n.powi(n as i32))?,
        Counterexample::Ce2Y => cycle(inv_n)?,
        Counterexample::Ce3X => jordan_block(n, ZERO)? + cycle(1.0)?,
        Counterexample::Ce3Y => cycle(-1.0)?,
    })
}

/// Eigenvalues of a weighted cycle, read off from its characteristic polynomial.
///
/// Applies when the only non-zero entries of `m` are the subdiagonal and the cycle
/// corner: then `lambda^n = prod(weights)` and the eigenvalues are the n-th roots of
/// that product, computed in log space so huge corner weights stay finite.
pub fn cycle_oracle_eigenvalues(m: &ComplexMatrix) -> Option<Vec<C64>> {
    let n = m.n();
    if n < 2 {
        return None;
    }
    let (ci, cj) = Corner::CYCLE.position(n);
    let mut log_modulus = 0.0;
    let mut phase = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            let on_cycle = i == j + 1 || (i, j) == (ci, cj);
            if on_cycle {
                if z == ZERO {
                    return None;
                }
                log_modulus += z.norm().ln();
                phase += z.arg();
            } else if z != ZERO {
                return None;
            }
        }
    }
    let radius = (log_modulus / n as f64).exp();
    Some(
        (0..n)
            .map(|k| C64::from_polar(radius, (phase + 2.0 * PI * k as f64) / n as f64))
            .collect(),
    )
}

/// Interleaved layout `1, n, 2, n-1, 3, ...` as a position array: `position[i]` is the
/// slot of index `i`. Adjacent cycle indices end up at most two slots apart.
pub fn cycle_band_permutation(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidInput("cycle layout needs n >= 2".into()));
    }
    let mut position = vec![0; n];
    let (mut lo, mut hi) = (0, n - 1);
    let mut slot = 0;
    while lo <= hi {
        position[lo] = slot;
        slot += 1;
        if lo != hi {
            position[hi] = slot;
            slot += 1;
        }
        lo += 1;
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    Ok(position)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// Independent standard complex Gaussian entries.
    Dense,
    DiagonalReal,
    SkewHermitian,
    /// Gaussian `r x r` block in the bottom-left corner.
    RankCorner(usize),
    /// Product of two Gaussian `n x r` factors.
    RankRandom(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Schatten(f64),
    Operator,
}

impl NormKind {
    pub fn exponent(self) -> f64 {
        match self {
            NormKind::Schatten(p) => p,
            NormKind::Operator => f64::INFINITY,
        }
    }

    pub fn measure(self, m: &ComplexMatrix) -> Result<f64> {
        spectral::schatten_norm(m, self.exponent())
    }
}

/// Target norm as a function of the matrix size.
#[derive(Clone)]
pub struct MagnitudeLaw {
    f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    label: String,
}

impl fmt::Debug for MagnitudeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MagnitudeLaw({})", self.label)
    }
}

impl MagnitudeLaw {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("{c}"), move |_| c)
    }

    /// `scale * n^exponent`.
    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::from_fn(format!("{scale}*n^{exponent}"), move |n| scale * (n as f64).powf(exponent))
    }

    pub fn formula(formula: Formula) -> Self {
        let label = formula.source().to_string();
        Self::from_fn(label, move |n| {
            formula
                .eval(crate::symbolic::Vars {
                    n: n as f64,
                    ..Default::default()
                })
                .re
        })
    }

    pub fn at(&self, n: usize) -> f64 {
        (self.f)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub structure: Structure,
    pub norm: NormKind,
    pub law: MagnitudeLaw,
    pub seed: u64,
}

/// Per-size seed so that each `n` sees an independent, reproducible stream.
pub fn derive_seed(seed: u64, n: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, |_, _| gaussian(&mut rng)).expect("gaussian entries are finite")
}

/// Haar-distributed unitary matrix from the QR factorisation of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    require_positive(n)?;
    let g = complex_gaussian_matrix(n, seed).to_faer();
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    // fix the phases so the distribution is Haar rather than QR-convention dependent
    ComplexMatrix::from_fn(n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q[(i, j)] * phase
    })
}

/// Gaussian matrix with prescribed singular-value spread, `V = U diag(s) W^H`.
pub fn random_with_condition(n: usize, cond: f64, seed: u64) -> Result<ComplexMatrix> {
    require_positive(n)?;
    if !(cond >= 1.0) {
        return Err(Error::InvalidInput(format!("condition number must be >= 1, got {cond}")));
    }
    let u = random_unitary(n, seed)?;
    let w = random_unitary(n, seed.wrapping_add(1))?;
    let s: Vec<C64> = (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            C64::new(cond.powf(-t), 0.0)
        })
        .collect();
    let d = ComplexMatrix::from_diag(&s)?;
    Ok(&(&u * &d) * &w.adjoint())
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    spectral::cond2(m)?;
    let inv = m.to_faer().partial_piv_lu().inverse();
    ComplexMatrix::from_faer(inv.as_ref())
}

/// Seeded perturbation rescaled so that its requested norm equals `law(n)`.
pub fn random_perturbation(spec: &PerturbationSpec, n: usize) -> Result<ComplexMatrix> {
    require_positive(n)?;
    if let NormKind::Schatten(p) = spec.norm {
        if !(p >= 1.0) {
            return Err(Error::Config(format!("Schatten exponent must be >= 1, got {p}")));
        }
    }
    let target = spec.law.at(n);
    if !target.is_finite() || target < 0.0 {
        return Err(Error::Config(format!(
            "magnitude law `{}` gives {target} at n = {n}",
            spec.law.label()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, n));
    let raw = match spec.structure {
        Structure::Dense => ComplexMatrix::from_fn(n, |_, _| gaussian(&mut rng))?,
        Structure::DiagonalReal => {
            let d: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), 0.0))
                .collect();
            ComplexMatrix::from_diag(&d)?
        }
        Structure::SkewHermitian => {
            let mut m = ComplexMatrix::zeros(n);
            for i in 0..n {
                m.set(i, i, C64::new(0.0, rng.sample::<f64, _>(StandardNormal)));
                for j in i + 1..n {
                    let g = gaussian(&mut rng);
                    m.set(i, j, g);
                    m.set(j, i, -g.conj());
                }
            }
            m
        }
        Structure::RankCorner(r) => {
            check_rank(r, n)?;
            let mut m = ComplexMatrix::zeros(n);
            for i in n - r..n {
                for j in 0..r {
                    m.set(i, j, gaussian(&mut rng));
                }
            }
            m
        }
        Structure::RankRandom(r) => {
            check_rank(r, n)?;
            let left: Vec<C64> = (0..n * r).map(|_| gaussian(&mut rng)).collect();
            let right: Vec<C64> = (0..n * r).map(|_| gaussian(&mut rng)).collect();
            ComplexMatrix::from_fn(n, |i, j| {
                (0..r).map(|k| left[i * r + k] * right[j * r + k].conj()).sum()
            })?
        }
    };
    if target == 0.0 {
        return Ok(ComplexMatrix::zeros(n));
    }
    let current = spec.norm.measure(&raw)?;
    if current == 0.0 {
        return Err(Error::Config("degenerate random draw with zero norm".into()));
    }
    Ok(raw.scale_real(target / current))
}

fn check_rank(r: usize, n: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::Config(format!("rank {r} impossible for n = {n}")));
    }
    Ok(())
}

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("matrix size must be positive".into()));
    }
    Ok(())
}
