//! Expression algebra over matrix-sequence generators with symbol tracking.
//!
//! A [`SeqExpr`] is an immutable DAG whose leaves are Toeplitz, diagonal-sampling,
//! zero-distributed or raw generators. Whenever every leaf is one of the first three
//! kinds the expression carries a GLT symbol, computed once at construction by the
//! pointwise algebra `S(A + B) = S(A) + S(B)`, `S(AB) = S(A) S(B)`, `S(cA) = c S(A)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_same_dim, Result};
use crate::generators::{self, FourierSpec};
use crate::spectral::{ComplexMatrix, C64, ONE, ZERO};
use crate::symbolic::{Formula, Vars};

/// Domain of a symbol: `[0,1]`, `[-pi,pi]` or their product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    X,
    Theta,
    XTheta,
}

impl Domain {
    fn from_flags(x: bool, theta: bool) -> Self {
        match (x, theta) {
            (true, true) => Domain::XTheta,
            (false, true) => Domain::Theta,
            _ => Domain::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::X => "x",
            Domain::Theta => "theta",
            Domain::XTheta => "x-theta",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "x" | "X" => Some(Domain::X),
            "theta" | "t" | "THETA" => Some(Domain::Theta),
            "x-theta" | "xtheta" | "XTHETA" => Some(Domain::XTheta),
            _ => None,
        }
    }
}

type Eval = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// Measurable function on a [`Domain`], always evaluated as `k(x, theta)`; the
/// coordinate outside the domain is ignored.
#[derive(Clone)]
pub struct SymbolFn {
    uses_x: bool,
    uses_theta: bool,
    eval: Eval,
    label: String,
}

impl fmt::Debug for SymbolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolFn[{}]({})", self.domain().name(), self.label)
    }
}

impl SymbolFn {
    pub fn constant(c: C64) -> Self {
        Self {
            uses_x: false,
            uses_theta: false,
            eval: Arc::new(move |_, _| c),
            label: format!("{c}"),
        }
    }

    pub fn of_x(label: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            uses_x: true,
            uses_theta: false,
            eval: Arc::new(move |x, _| f(x)),
            label: label.into(),
        }
    }

    pub fn of_theta(label: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            uses_x: false,
            uses_theta: true,
            eval: Arc::new(move |_, t| f(t)),
            label: label.into(),
        }
    }

    pub fn of_x_theta(label: impl Into<String>, f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            uses_x: true,
            uses_theta: true,
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    /// Symbol from a formula in `x` and `t`; the domain follows the variables used.
    pub fn formula(formula: &Formula) -> Self {
        use crate::symbolic::Var;
        let f = formula.clone();
        Self {
            uses_x: formula.uses(Var::X),
            uses_theta: formula.uses(Var::Theta),
            eval: Arc::new(move |x, theta| f.eval(Vars { x, theta, n: 0.0 })),
            label: formula.source().to_string(),
        }
    }

    /// Formula symbol forced onto a given domain.
    pub fn formula_on(formula: &Formula, domain: Domain) -> Self {
        let mut s = Self::formula(formula);
        match domain {
            Domain::X => s.uses_x = true,
            Domain::Theta => s.uses_theta = true,
            Domain::XTheta => {
                s.uses_x = true;
                s.uses_theta = true;
            }
        }
        s
    }

    /// Piecewise-constant function on `[0,1]` taking `values[j]` on `[j/m, (j+1)/m)`.
    pub fn piecewise(values: Vec<C64>) -> Self {
        let m = values.len();
        let values = Arc::new(values);
        Self {
            uses_x: true,
            uses_theta: false,
            label: format!("piecewise[{m}]"),
            eval: Arc::new(move |x, _| {
                if m == 0 {
                    return ZERO;
                }
                let j = ((x * m as f64).floor() as isize).clamp(0, m as isize - 1) as usize;
                values[j]
            }),
        }
    }

    pub fn domain(&self) -> Domain {
        Domain::from_flags(self.uses_x, self.uses_theta)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64, theta: f64) -> C64 {
        (self.eval)(x, theta)
    }

    pub fn add(&self, other: &SymbolFn) -> SymbolFn {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        SymbolFn {
            uses_x: self.uses_x || other.uses_x,
            uses_theta: self.uses_theta || other.uses_theta,
            eval: Arc::new(move |x, t| a(x, t) + b(x, t)),
            label: format!("({} + {})", self.label, other.label),
        }
    }

    pub fn mul(&self, other: &SymbolFn) -> SymbolFn {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        SymbolFn {
            uses_x: self.uses_x || other.uses_x,
            uses_theta: self.uses_theta || other.uses_theta,
            eval: Arc::new(move |x, t| a(x, t) * b(x, t)),
            label: format!("({} * {})", self.label, other.label),
        }
    }

    pub fn scale(&self, c: C64) -> SymbolFn {
        let a = self.eval.clone();
        SymbolFn {
            uses_x: self.uses_x,
            uses_theta: self.uses_theta,
            eval: Arc::new(move |x, t| c * a(x, t)),
            label: format!("{c}*{}", self.label),
        }
    }

    /// Pointwise modulus, the singular-value symbol.
    pub fn modulus(&self) -> SymbolFn {
        let a = self.eval.clone();
        SymbolFn {
            uses_x: self.uses_x,
            uses_theta: self.uses_theta,
            eval: Arc::new(move |x, t| C64::new(a(x, t).norm(), 0.0)),
            label: format!("|{}|", self.label),
        }
    }
}

/// Anything producing one `n x n` matrix per size.
pub trait MatrixFamily: Send + Sync {
    fn matrix(&self, n: usize) -> Result<ComplexMatrix>;
}

impl<F> MatrixFamily for F
where
    F: Fn(usize) -> Result<ComplexMatrix> + Send + Sync,
{
    fn matrix(&self, n: usize) -> Result<ComplexMatrix> {
        self(n)
    }
}

pub type Generator = Arc<dyn Fn(usize) -> Result<ComplexMatrix> + Send + Sync>;

#[derive(Clone)]
pub enum Node {
    Toeplitz(FourierSpec),
    Diag {
        label: String,
        a: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    },
    /// Zero-distributed generator; its symbol is `0`.
    Zero { label: String, generator: Generator },
    /// Arbitrary generator; no symbol is claimed.
    Raw { label: String, generator: Generator },
    Sum(SeqExpr, SeqExpr),
    Product(SeqExpr, SeqExpr),
    Scalar(C64, SeqExpr),
}

/// Immutable expression over matrix sequences with its cached symbol.
#[derive(Clone)]
pub struct SeqExpr {
    node: Arc<Node>,
    symbol: Option<SymbolFn>,
}

impl fmt::Debug for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeqExpr({self})")
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Toeplitz(spec) => write!(f, "(toeplitz \"{}\")", spec.label()),
            Node::Diag { label, .. } => write!(f, "(diag \"{label}\")"),
            Node::Zero { label, .. } => f.write_str(label),
            Node::Raw { label, .. } => f.write_str(label),
            Node::Sum(a, b) => write!(f, "(+ {a} {b})"),
            Node::Product(a, b) => write!(f, "(* {a} {b})"),
            Node::Scalar(c, a) => write!(f, "(scalar {c} {a})"),
        }
    }
}

impl SeqExpr {
    fn from_node(node: Node) -> Self {
        let symbol = match &node {
            Node::Toeplitz(spec) => {
                let spec = spec.clone();
                Some(SymbolFn::of_theta(spec.label(), move |t| spec.value(t)))
            }
            Node::Diag { label, a } => {
                let a = a.clone();
                Some(SymbolFn::of_x(label.clone(), move |x| a(x)))
            }
            Node::Zero { .. } => Some(SymbolFn::constant(ZERO)),
            Node::Raw { .. } => None,
            Node::Sum(a, b) => a.symbol.as_ref().zip(b.symbol.as_ref()).map(|(k, h)| k.add(h)),
            Node::Product(a, b) => a.symbol.as_ref().zip(b.symbol.as_ref()).map(|(k, h)| k.mul(h)),
            Node::Scalar(c, a) => a.symbol.as_ref().map(|k| k.scale(*c)),
        };
        Self {
            node: Arc::new(node),
            symbol,
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn toeplitz(spec: FourierSpec) -> Self {
        Self::from_node(Node::Toeplitz(spec))
    }

    pub fn diag(label: impl Into<String>, a: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::from_node(Node::Diag {
            label: label.into(),
            a: Arc::new(a),
        })
    }

    /// Diagonal sampling of a formula in `x`.
    pub fn diag_formula(formula: Formula) -> Self {
        let label = formula.source().to_string();
        Self::diag(label, move |x| formula.eval(Vars { x, ..Default::default() }))
    }

    /// Default zero-distributed leaf: identity block of rank `floor(sqrt(n))` in the
    /// top-left corner, so `||Z_n|| = 1` and `||Z_n||_1 = o(n)`.
    pub fn zero() -> Self {
        Self::zero_with("(zero)", |n| Ok(zero_block(n)))
    }

    pub fn zero_with(
        label: impl Into<String>,
        generator: impl Fn(usize) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self::from_node(Node::Zero {
            label: label.into(),
            generator: Arc::new(generator),
        })
    }

    pub fn raw(
        label: impl Into<String>,
        generator: impl Fn(usize) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self::from_node(Node::Raw {
            label: label.into(),
            generator: Arc::new(generator),
        })
    }

    pub fn sum(a: SeqExpr, b: SeqExpr) -> Self {
        Self::from_node(Node::Sum(a, b))
    }

    pub fn product(a: SeqExpr, b: SeqExpr) -> Self {
        Self::from_node(Node::Product(a, b))
    }

    pub fn scalar(c: C64, a: SeqExpr) -> Self {
        Self::from_node(Node::Scalar(c, a))
    }

    pub fn symbol(&self) -> Option<&SymbolFn> {
        self.symbol.as_ref()
    }

    pub fn build(&self, n: usize) -> Result<ComplexMatrix> {
        build(self, n)
    }
}

impl std::ops::Add for SeqExpr {
    type Output = SeqExpr;
    fn add(self, rhs: SeqExpr) -> SeqExpr {
        SeqExpr::sum(self, rhs)
    }
}

impl std::ops::Mul for SeqExpr {
    type Output = SeqExpr;
    fn mul(self, rhs: SeqExpr) -> SeqExpr {
        SeqExpr::product(self, rhs)
    }
}

impl MatrixFamily for SeqExpr {
    fn matrix(&self, n: usize) -> Result<ComplexMatrix> {
        build(self, n)
    }
}

pub(crate) fn zero_block(n: usize) -> ComplexMatrix {
    let r = (n as f64).sqrt().floor() as usize;
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..r {
        m.set(i, i, ONE);
    }
    m
}

pub fn build(e: &SeqExpr, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(crate::error::Error::InvalidInput("matrix size must be positive".into()));
    }
    let m = match &*e.node {
        Node::Toeplitz(spec) => generators::toeplitz(spec, n)?,
        Node::Diag { a, .. } => generators::diag_sampling(a.as_ref(), n)?,
        Node::Zero { generator, .. } | Node::Raw { generator, .. } => generator(n)?,
        Node::Sum(a, b) => build(a, n)?.try_add(&build(b, n)?)?,
        Node::Product(a, b) => build(a, n)?.try_matmul(&build(b, n)?)?,
        Node::Scalar(c, a) => {
            if *c == ZERO {
                ComplexMatrix::zeros(n)
            } else {
                build(a, n)?.scale(*c)
            }
        }
    };
    ensure_same_dim(n, m.n())?;
    Ok(m)
}

pub fn symbol_of(e: &SeqExpr) -> Option<SymbolFn> {
    e.symbol.clone()
}

/// True iff every probe instance is Hermitian up to the crate tolerance.
pub fn is_hermitian_seq(e: &SeqExpr, n_probe: &[usize]) -> bool {
    n_probe.iter().all(|&n| match build(e, n) {
        Ok(m) => m.is_hermitian(crate::spectral::tolerance(&m)),
        Err(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::I;
    use std::f64::consts::PI;

    fn two_cos() -> SeqExpr {
        SeqExpr::toeplitz(FourierSpec::two_cos())
    }

    #[test]
    fn build_composes_leaves() {
        let e = two_cos() + SeqExpr::scalar(I, SeqExpr::zero());
        let n = 9;
        let want = generators::toeplitz(&FourierSpec::two_cos(), n).unwrap() + zero_block(n).scale(I);
        assert_eq!(build(&e, n).unwrap(), want);

        let x = two_cos();
        let one = SeqExpr::diag("1", |_| ONE);
        assert_eq!(build(&(one * x.clone()), n).unwrap(), build(&x, n).unwrap());
        assert_eq!(build(&SeqExpr::scalar(ZERO, x), n).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn symbols_of_leaves() {
        let s = symbol_of(&two_cos()).unwrap();
        assert_eq!(s.domain(), Domain::Theta);
        for t in [-3.0, -1.0, 0.0, 0.7, 2.5] {
            assert!((s.eval(0.3, t) - C64::new(2.0 * f64::cos(t), 0.0)).norm() < 1e-15);
        }
        let z = symbol_of(&SeqExpr::zero()).unwrap();
        assert_eq!(z.eval(0.5, 1.0), ZERO);
        let raw = SeqExpr::raw("raw", |n| Ok(ComplexMatrix::identity(n)));
        assert!(symbol_of(&raw).is_none());
        assert!(symbol_of(&(raw + two_cos())).is_none());
    }

    #[test]
    fn product_symbol_promotes_domain() {
        let e = SeqExpr::diag("x", |x| C64::new(x, 0.0)) * two_cos();
        let s = symbol_of(&e).unwrap();
        assert_eq!(s.domain(), Domain::XTheta);
        for (x, t) in [(0.1, 0.2), (0.9, -2.0), (0.5, PI)] {
            assert!((s.eval(x, t).re - 2.0 * x * t.cos()).abs() < 1e-15);
        }
        let zero_plus = SeqExpr::zero() + two_cos();
        assert_eq!(symbol_of(&zero_plus).unwrap().domain(), Domain::Theta);
    }

    #[test]
    fn reassociation_keeps_symbol() {
        let a = two_cos();
        let b = SeqExpr::diag("x^2", |x| C64::new(x * x, 0.0));
        let c = SeqExpr::toeplitz(FourierSpec::exp_i());
        let left = symbol_of(&((a.clone() + b.clone()) + c.clone())).unwrap();
        let right = symbol_of(&(a + (b + c))).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let x = (i as f64 + 0.5) / 64.0;
                let t = -PI + 2.0 * PI * (j as f64 + 0.5) / 64.0;
                assert!((left.eval(x, t) - right.eval(x, t)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hermitian_probe() {
        let probes = [8, 17, 32];
        assert!(is_hermitian_seq(&two_cos(), &probes));
        assert!(!is_hermitian_seq(&SeqExpr::toeplitz(FourierSpec::exp_i()), &probes));
        let e = SeqExpr::diag("x", |x| C64::new(x, 0.0)) + two_cos();
        assert!(is_hermitian_seq(&e, &probes));
    }

    #[test]
    fn zero_leaf_has_small_trace_norm() {
        for n in [16, 100, 1024] {
            let z = zero_block(n);
            let ones = z.diagonal().iter().filter(|v| **v == ONE).count();
            assert_eq!(ones, (n as f64).sqrt() as usize);
        }
    }

    #[test]
    fn piecewise_symbol() {
        let s = SymbolFn::piecewise(vec![ONE, I]);
        assert_eq!(s.eval(0.2, 0.0), ONE);
        assert_eq!(s.eval(0.7, 0.0), I);
        assert_eq!(s.eval(1.0, 0.0), I);
    }
}
