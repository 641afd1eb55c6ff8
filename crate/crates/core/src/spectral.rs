//! Dense complex matrices, their spectra and the norms built on singular values.
//!
//! Every other module consumes [`ComplexMatrix`] and the solvers here. The eigen and
//! singular value decompositions are delegated to `faer`; this module owns the
//! pre-processing (triangular and Hermitian detection, diagonal balancing) and the
//! tolerance policy shared by the rest of the crate.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{ensure_same_dim, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense `n x n` complex matrix stored row-major. Entries are always finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        if self.n <= 8 {
            for i in 0..self.n {
                let row: Vec<String> = (0..self.n)
                    .map(|j| {
                        let z = self[(i, j)];
                        format!("{:.4}{:+.4}i", z.re, z.im)
                    })
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry ({}, {}) = {}",
                pos / n,
                pos % n,
                data[pos]
            )));
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::new(n, data)
    }

    pub fn from_diag(diag: &[C64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        let mut data = vec![ZERO; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(n, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            ensure_same_dim(n, row.len())?;
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(n, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// Sets one entry. Panics on a non-finite value so the invariant cannot be broken.
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        assert!(value.is_finite(), "non-finite entry {value} at ({i}, {j})");
        self.data[i * self.n + j] = value;
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { n, data }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.n, other.n)?;
        if self.is_diagonal() {
            let n = self.n;
            let mut out = other.clone();
            for i in 0..n {
                let d = self.data[i * n + i];
                for z in &mut out.data[i * n..(i + 1) * n] {
                    *z *= d;
                }
            }
            return Ok(out);
        }
        let prod = self.to_faer() * other.to_faer();
        Self::from_faer(prod.as_ref())
    }

    /// Frobenius norm; an upper bound for the operator norm used by tolerance rules.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermitian symmetry, `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Frobenius norm of the commutator `M M^H - M^H M`.
    pub fn normality_defect(&self) -> f64 {
        let a = self.to_faer();
        let ah = a.adjoint().to_owned();
        let c = &a * &ah - &ah * &a;
        c.norm_l2()
    }

    pub fn is_normal(&self, tol: f64) -> bool {
        self.normality_defect() <= tol
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j] == ZERO))
    }

    pub fn is_lower_triangular(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| self.data[i * n + j] == ZERO))
    }

    pub fn is_upper_triangular(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..i).all(|j| self.data[i * n + j] == ZERO))
    }

    /// Largest `|i - j|` over non-zero entries.
    pub fn bandwidth(&self) -> usize {
        let n = self.n;
        let mut bw = 0;
        for i in 0..n {
            for j in 0..n {
                if self.data[i * n + j] != ZERO {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        bw
    }

    /// Returns `P M P^T` for the permutation sending index `i` to position `position[i]`.
    pub fn permuted(&self, position: &[usize]) -> Result<Self> {
        ensure_same_dim(self.n, position.len())?;
        check_permutation(position)?;
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[position[i] * n + position[j]] = self.data[i * n + j];
            }
        }
        Ok(Self { n, data })
    }

    pub fn to_faer(&self) -> Mat<C64> {
        let n = self.n;
        Mat::from_fn(n, n, |i, j| self.data[i * n + j])
    }

    pub fn from_faer(m: faer::MatRef<'_, C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                self.$checked(rhs).expect("matrix dimensions must agree")
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}
impl_binop!(Add, add, try_add);
impl_binop!(Sub, sub, try_sub);
impl_binop!(Mul, mul, try_matmul);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

pub(crate) fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::InvalidInput(format!("not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Uniform "equal/zero" tolerance `64 n eps ||M||_F`.
pub fn tolerance(m: &ComplexMatrix) -> f64 {
    64.0 * m.n() as f64 * f64::EPSILON * m.frobenius_norm()
}

/// Eigenvalues (unordered) and non-increasing singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub singular_values: Vec<f64>,
}

pub fn spectrum(m: &ComplexMatrix) -> Result<Spectrum> {
    Ok(Spectrum {
        eigenvalues: eigenvalues(m)?,
        singular_values: singular_values(m)?,
    })
}

/// Eigenvalues of `m` in no particular order.
///
/// Triangular inputs return their diagonal. Inputs Hermitian within [`tolerance`] go
/// through the self-adjoint solver and yield real eigenvalues. Everything else is
/// balanced by a diagonal similarity and handed to the dense Schur solver.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if m.is_lower_triangular() || m.is_upper_triangular() {
        return Ok(m.diagonal());
    }
    let tol = tolerance(m);
    if m.hermitian_defect() <= tol {
        let vals = hermitian_eigenvalues(m)?;
        return Ok(vals.into_iter().map(|x| C64::new(x, 0.0)).collect());
    }
    let balanced = balance(m);
    let vals = balanced
        .to_faer()
        .eigenvalues()
        .map_err(|e| Error::NonConvergence(format!("{e:?}")))?;
    if vals.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonConvergence("eigen solver produced non-finite values".into()));
    }
    Ok(vals)
}

/// Real eigenvalues (non-decreasing) of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (re, _) = hermitian_parts(m);
    let vals = re
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NonConvergence(format!("{e:?}")))?;
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence("self-adjoint solver produced non-finite values".into()));
    }
    Ok(vals)
}

/// Entry moduli padded with zeros when every row and column holds at most one
/// non-zero (scaled partial permutations, including diagonals): then they are exactly
/// the singular values.
fn monomial_moduli(m: &ComplexMatrix) -> Option<Vec<f64>> {
    let n = m.n;
    let mut col_used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row_entry = None;
        for j in 0..n {
            let z = m.data[i * n + j];
            if z != ZERO {
                if row_entry.is_some() || col_used[j] {
                    return None;
                }
                col_used[j] = true;
                row_entry = Some(z.norm());
            }
        }
        out.push(row_entry.unwrap_or(0.0));
    }
    Some(out)
}

/// Singular values sorted non-increasing.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = if let Some(moduli) = monomial_moduli(m) {
        moduli
    } else {
        m.to_faer()
            .singular_values()
            .map_err(|e| Error::NonConvergence(format!("{e:?}")))?
    };
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence("SVD produced non-finite values".into()));
    }
    for x in &mut s {
        *x = x.max(0.0);
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Full SVD `M = U diag(s) V^H` with `s` non-increasing.
pub struct Svd {
    pub u: Mat<C64>,
    pub s: Vec<f64>,
    pub v: Mat<C64>,
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let dec = m
        .to_faer()
        .svd()
        .map_err(|e| Error::NonConvergence(format!("{e:?}")))?;
    let s: Vec<f64> = dec.S().column_vector().iter().map(|z| z.re.max(0.0)).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence("SVD produced non-finite values".into()));
    }
    Ok(Svd {
        u: dec.U().to_owned(),
        s,
        v: dec.V().to_owned(),
    })
}

/// Schatten p-norm `(sum sigma_i^p)^(1/p)`; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    let s = singular_values(m)?;
    schatten_from_singular_values(&s, p)
}

pub fn schatten_from_singular_values(s: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidInput(format!("Schatten exponent must be >= 1, got {p}")));
    }
    let top = s.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    if p == 1.0 {
        return Ok(s.iter().sum());
    }
    let acc: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
    Ok(top * acc.powf(1.0 / p))
}

pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Spectral condition number `sigma_1 / sigma_n`.
pub fn cond2(v: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(v)?;
    let top = s[0];
    let bottom = *s.last().unwrap();
    let threshold = v.n() as f64 * f64::EPSILON * top;
    if top == 0.0 || bottom <= threshold {
        return Err(Error::Singular {
            sigma_min: bottom,
            threshold,
        });
    }
    Ok(top / bottom)
}

/// Numerical rank: number of singular values above `n eps sigma_1`.
pub fn numerical_rank(s: &[f64]) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    let threshold = s.len() as f64 * f64::EPSILON * top;
    s.iter().filter(|&&x| x > threshold).count()
}

/// Hermitian and skew parts: `re = (M + M^H)/2`, `im = (M - M^H)/(2i)`.
pub fn hermitian_parts(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.n();
    let mut re = vec![ZERO; n * n];
    let mut im = vec![ZERO; n * n];
    let half_over_i = C64::new(0.0, -0.5);
    for i in 0..n {
        for j in 0..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            re[i * n + j] = (a + b) * 0.5;
            im[i * n + j] = (a - b) * half_over_i;
        }
    }
    (
        ComplexMatrix { n, data: re },
        ComplexMatrix { n, data: im },
    )
}

/// Osborne balancing `D^{-1} M D` with exact (non-radix) scale factors.
///
/// Row and column off-diagonal 2-norms are equalised until every scale factor of a
/// sweep is within 1% of one, or the work budget runs out. Weighted cycles such as
/// the Jordan corner constructions need many sweeps; dense matrices converge in a few.
pub fn balance(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.n();
    let mut a = m.data.clone();
    if n < 2 {
        return m.clone();
    }
    let budget = 2.0e8 / (n as f64 * n as f64);
    let max_sweeps = budget.clamp(32.0, 200_000.0) as usize;
    for _ in 0..max_sweeps {
        let mut changed = false;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for k in 0..n {
                if k != i {
                    r += a[i * n + k].norm_sqr();
                    c += a[k * n + i].norm_sqr();
                }
            }
            if r == 0.0 || c == 0.0 {
                continue;
            }
            let f = (r / c).sqrt().sqrt();
            if !(f.is_finite() && f > 0.0) || (f - 1.0).abs() <= 0.01 {
                continue;
            }
            changed = true;
            let inv = 1.0 / f;
            for k in 0..n {
                if k != i {
                    a[i * n + k] *= inv;
                    a[k * n + i] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    ComplexMatrix { n, data: a }
}
