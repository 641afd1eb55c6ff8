//! Eigenvalue perturbation bounds checked on explicit instances.
//!
//! Jordan data is supplied by the caller through [`JordanSpec`]; it is never recovered
//! from a numeric matrix. Each check measures the matching distance between the exact
//! eigenvalues of `A` and the computed eigenvalues of `A + N` and compares it with the
//! Bauer-Fike type bound.

use crate::error::{ensure_same_dim, Error, Result};
use crate::generators::{self, derive_seed, inverse};
use crate::matching::{bottleneck_distance, d_prime, transport_matching};
use crate::spectral::{self, ComplexMatrix, C64, ONE};

/// `A = V J V^{-1}` with `J` built from Jordan blocks (ones on the subdiagonal).
#[derive(Debug, Clone)]
pub struct JordanSpec {
    blocks: Vec<(C64, usize)>,
    v: ComplexMatrix,
    m: usize,
    delta: f64,
}

impl JordanSpec {
    pub fn new(blocks: Vec<(C64, usize)>, v: ComplexMatrix) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&(_, s)| s == 0) {
            return Err(Error::InvalidInput("Jordan blocks must be non-empty with positive sizes".into()));
        }
        if let Some((z, _)) = blocks.iter().find(|(z, _)| !z.is_finite()) {
            return Err(Error::NonFinite(format!("Jordan eigenvalue {z}")));
        }
        let total: usize = blocks.iter().map(|&(_, s)| s).sum();
        ensure_same_dim(total, v.n())?;
        spectral::cond2(&v)?;
        let m = blocks.iter().map(|&(_, s)| s).max().unwrap_or(1);
        let mut delta = f64::INFINITY;
        for (a, &(x, _)) in blocks.iter().enumerate() {
            for &(y, _) in &blocks[a + 1..] {
                if x != y {
                    delta = delta.min(0.5 * (x - y).norm());
                }
            }
        }
        Ok(Self { blocks, v, m, delta })
    }

    /// Diagonalizable `V diag(values) V^{-1}`.
    pub fn diagonal(values: &[C64], v: ComplexMatrix) -> Result<Self> {
        Self::new(values.iter().map(|&z| (z, 1)).collect(), v)
    }

    pub fn blocks(&self) -> &[(C64, usize)] {
        &self.blocks
    }

    pub fn similarity(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    /// Largest block size.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Half the smallest gap between distinct eigenvalues, `+inf` if there is one.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.m == 1
    }

    pub fn cond(&self) -> f64 {
        spectral::cond2(&self.v).expect("checked at construction")
    }

    pub fn jordan_matrix(&self) -> ComplexMatrix {
        let mut j = ComplexMatrix::zeros(self.n());
        let mut offset = 0;
        for &(lambda, size) in &self.blocks {
            for k in 0..size {
                j.set(offset + k, offset + k, lambda);
                if k + 1 < size {
                    j.set(offset + k + 1, offset + k, ONE);
                }
            }
            offset += size;
        }
        j
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let j = self.jordan_matrix();
        if self.v == ComplexMatrix::identity(self.n()) {
            return Ok(j);
        }
        Ok(&(&self.v * &j) * &inverse(&self.v)?)
    }

    /// Exact eigenvalues with algebraic multiplicity.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.blocks
            .iter()
            .flat_map(|&(z, s)| std::iter::repeat_n(z, s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub premise_ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl BoundReport {
    fn new(premise_ok: bool, lhs: f64, rhs: f64) -> Self {
        Self {
            premise_ok,
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }
}

fn perturbed_eigenvalues(a: &ComplexMatrix, n: &ComplexMatrix) -> Result<Vec<C64>> {
    spectral::eigenvalues(&a.try_add(n)?)
}

fn matching_distance(spec: &JordanSpec, n: &ComplexMatrix) -> Result<f64> {
    let a = spec.matrix()?;
    let mu = perturbed_eigenvalues(&a, n)?;
    Ok(bottleneck_distance(&spec.eigenvalues(), &mu)?.value)
}

/// `||N|| < delta / k(V)  =>  d(A, A+N) <= k(V) ||N||` for diagonalizable `A`.
pub fn bf_check(spec: &JordanSpec, n: &ComplexMatrix) -> Result<BoundReport> {
    if !spec.is_diagonalizable() {
        return Err(Error::InvalidInput("Bauer-Fike check needs a diagonalizable Jordan spec".into()));
    }
    bf2_check(spec, n)
}

/// `||N|| < delta^m / (2^{m-1} k(V))  =>  d(A, A+N) <= (2^{m-1} k(V) ||N||)^{1/m}`.
pub fn bf2_check(spec: &JordanSpec, n: &ComplexMatrix) -> Result<BoundReport> {
    ensure_same_dim(spec.n(), n.n())?;
    let kappa = spec.cond();
    let norm = spectral::operator_norm(n)?;
    let m = spec.m();
    let scale = 2f64.powi(m as i32 - 1) * kappa;
    let premise_ok = norm < spec.delta().powi(m as i32) / scale;
    let rhs = if m == 1 { kappa * norm } else { (scale * norm).powf(1.0 / m as f64) };
    Ok(BoundReport::new(premise_ok, matching_distance(spec, n)?, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBound {
    pub mu: C64,
    /// Distance from `mu` to the nearest eigenvalue of `A`.
    pub distance: f64,
    /// `2^{m-1} k(V) ||N||`, the bound on `distance^m`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfGenReport {
    pub premise_ok: bool,
    pub per_eigenvalue: Vec<EigenBound>,
    pub all_hold: bool,
}

/// Per-eigenvalue bound `k(V)||N|| <= 2^{1-m}  =>  |lambda - mu|^m <= 2^{m-1} k(V)||N||`.
pub fn bf_gen_check(spec: &JordanSpec, n: &ComplexMatrix) -> Result<BfGenReport> {
    bf_gen_check_tol(spec, n, 1e-8)
}

/// As [`bf_gen_check`], accepting `distance^m <= bound + tol * max(1, bound)`.
pub fn bf_gen_check_tol(spec: &JordanSpec, n: &ComplexMatrix, tol: f64) -> Result<BfGenReport> {
    ensure_same_dim(spec.n(), n.n())?;
    let kappa = spec.cond();
    let norm = spectral::operator_norm(n)?;
    let m = spec.m() as i32;
    let premise_ok = kappa * norm <= 2f64.powi(1 - m);
    let bound = 2f64.powi(m - 1) * kappa * norm;
    let lambdas = spec.eigenvalues();
    let a = spec.matrix()?;
    let per_eigenvalue: Vec<EigenBound> = perturbed_eigenvalues(&a, n)?
        .into_iter()
        .map(|mu| {
            let distance = lambdas.iter().map(|l| (l - mu).norm()).fold(f64::INFINITY, f64::min);
            EigenBound {
                mu,
                distance,
                bound,
                holds: distance.powi(m) <= bound + tol * bound.max(1.0),
            }
        })
        .collect();
    let all_hold = per_eigenvalue.iter().all(|e| e.holds);
    Ok(BfGenReport {
        premise_ok,
        per_eigenvalue,
        all_hold,
    })
}

/// `min(delta^m, eps^m) / (2^{m-1} k(V))`: any `||N||` below it moves the spectrum by
/// at most `eps` in matching distance.
pub fn pert_delta(spec: &JordanSpec, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let m = spec.m() as i32;
    Ok(spec.delta().powi(m).min(eps.powi(m)) / (2f64.powi(m - 1) * spec.cond()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PertVerification {
    pub delta: f64,
    pub trials: usize,
    pub worst_distance: f64,
    pub all_within: bool,
}

/// Draws `trials` Gaussian perturbations with `||N|| = u delta`, `u` uniform in
/// `(0, 1)`, and checks `d(A, A+N) <= eps` up to `tol`.
pub fn verify_pert_delta(spec: &JordanSpec, eps: f64, trials: usize, seed: u64, tol: f64) -> Result<PertVerification> {
    use rand::{Rng, SeedableRng};
    let delta = pert_delta(spec, eps)?;
    let n = spec.n();
    let a = spec.matrix()?;
    let lambdas = spec.eigenvalues();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let g = generators::complex_gaussian_matrix(n, derive_seed(seed, t));
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let pert = g.scale_real(u * delta / spectral::operator_norm(&g)?);
        let mu = perturbed_eigenvalues(&a, &pert)?;
        worst = worst.max(bottleneck_distance(&lambdas, &mu)?.value);
    }
    Ok(PertVerification {
        delta,
        trials,
        worst_distance: worst,
        all_within: worst <= eps + tol,
    })
}

/// Hypotheses on `Y` under which a normal `X` keeps its spectral distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalCondition {
    /// `Y` zero distributed and `X + Y` normal.
    ZeroDistributedNormalSum,
    /// `||Y||_p = o(1)` for some `1 <= p <= 2`; checked in the `p = 2` form.
    SmallSchatten(f64),
    /// `||Y||_p = o(n^{2/p - 1})` for some `2 <= p < inf`.
    GrowingSchatten(f64),
    /// `||Y|| = o(1/n)`.
    SmallOperator,
}

impl NormalCondition {
    pub fn index(self) -> u8 {
        match self {
            Self::ZeroDistributedNormalSum => 1,
            Self::SmallSchatten(_) => 2,
            Self::GrowingSchatten(_) => 3,
            Self::SmallOperator => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalPertReport {
    pub condition: NormalCondition,
    /// Number of matched pairs farther apart than `eps`.
    pub k_n: usize,
    /// Right-hand side of the bound on `k_n / n` (condition 4: on the largest mismatch).
    pub bound: f64,
    pub bound_ok: bool,
    /// Largest distance in the matching used.
    pub max_mismatch: f64,
    /// `d'(eig X, eig(X + Y))`.
    pub dprime: f64,
    /// Condition 1: normality defect of `X + Y`; otherwise the measured norm of `Y`.
    pub witness: f64,
}

/// Count of mismatches under the optimal matching and the bound on it that the
/// normal-perturbation argument yields.
pub fn normal_pert_check(x: &ComplexMatrix, y: &ComplexMatrix, condition: NormalCondition, eps: f64) -> Result<NormalPertReport> {
    ensure_same_dim(x.n(), y.n())?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let tol = 64.0 * x.n() as f64 * f64::EPSILON * x.frobenius_norm().powi(2).max(1.0);
    if x.normality_defect() > tol {
        return Err(Error::InvalidInput(format!(
            "X is not normal (defect {:e})",
            x.normality_defect()
        )));
    }
    let n = x.n();
    let nf = n as f64;
    let sum = x.try_add(y)?;
    let lambda = spectral::eigenvalues(x)?;
    let mu = spectral::eigenvalues(&sum)?;
    let dprime = d_prime(&lambda, &mu)?.value;
    let mismatches = |pairs: &[(usize, usize)]| -> (usize, f64) {
        let mut k = 0;
        let mut worst: f64 = 0.0;
        for &(i, j) in pairs {
            let d = (lambda[i] - mu[j]).norm();
            worst = worst.max(d);
            if d > eps {
                k += 1;
            }
        }
        (k, worst)
    };
    let transport_pairs = |p: f64| -> Result<Vec<(usize, usize)>> {
        let (_, sigma) = transport_matching(&lambda, &mu, p)?;
        Ok(sigma.into_iter().enumerate().collect())
    };
    let slack = 1e-10;
    let report = match condition {
        NormalCondition::ZeroDistributedNormalSum => {
            let defect = sum.normality_defect();
            let (k_n, max_mismatch) = mismatches(&transport_pairs(2.0)?);
            let sum_tol = 64.0 * nf * f64::EPSILON * sum.frobenius_norm().powi(2).max(1.0);
            NormalPertReport {
                condition,
                k_n,
                bound: sum_tol,
                bound_ok: defect <= sum_tol,
                max_mismatch,
                dprime,
                witness: defect,
            }
        }
        NormalCondition::SmallSchatten(p) | NormalCondition::GrowingSchatten(p) => {
            let (q, valid) = match condition {
                NormalCondition::SmallSchatten(_) => (2.0, (1.0..=2.0).contains(&p)),
                _ => (p, p >= 2.0 && p.is_finite()),
            };
            if !valid {
                return Err(Error::InvalidInput(format!("exponent {p} outside the range of condition {}", condition.index())));
            }
            let norm = spectral::schatten_norm(y, q)?;
            let bound = (norm / (eps * nf.powf(2.0 / q - 1.0))).powf(q);
            let (k_n, max_mismatch) = mismatches(&transport_pairs(q)?);
            NormalPertReport {
                condition,
                k_n,
                bound,
                bound_ok: k_n as f64 / nf <= bound * (1.0 + slack) + slack,
                max_mismatch,
                dprime,
                witness: spectral::schatten_norm(y, p)?,
            }
        }
        NormalCondition::SmallOperator => {
            let norm = spectral::operator_norm(y)?;
            let pairs = bottleneck_distance(&lambda, &mu)?.matching;
            let (k_n, max_mismatch) = mismatches(&pairs);
            let bound = nf * norm;
            NormalPertReport {
                condition,
                k_n,
                bound,
                bound_ok: max_mismatch <= bound * (1.0 + slack) + slack,
                max_mismatch,
                dprime,
                witness: norm,
            }
        }
    };
    Ok(report)
}

/// `(transport_cost(eig A, eig B, 2), sqrt(n) ||A - B||_2)` for normal `A`.
pub fn hoffman_wielandt_sides(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, f64)> {
    ensure_same_dim(a.n(), b.n())?;
    let lhs = transport_matching(&spectral::eigenvalues(a)?, &spectral::eigenvalues(b)?, 2.0)?.0;
    let rhs = (a.n() as f64).sqrt() * a.try_sub(b)?.frobenius_norm();
    Ok((lhs, rhs))
}

/// Normal matrix `U diag(values) U^H` with a seeded Haar unitary `U`.
pub fn random_normal(values: &[C64], seed: u64) -> Result<ComplexMatrix> {
    let u = generators::random_unitary(values.len(), seed)?;
    let d = ComplexMatrix::from_diag(values)?;
    Ok(&(&u * &d) * &u.adjoint())
}
