//! Scenario files: TOML documents binding a sequence, an optional perturbation and a
//! list of checks evaluated at every size.
//!
//! ```toml
//! id = "toeplitz-lambda"
//! description = "Eigenvalues of T_n(2cos) follow 2cos"
//! anchor = "toeplitz-eigenvalue-distribution"
//! seed = 1
//! n_list = [64, 256, 1024]
//! sequence = '(toeplitz "2*cos(t)")'
//!
//! [[check]]
//! metric = "check_lambda"
//! symbol = "2*cos(t)"
//! ```

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Deserialize;
use spectral_lab::generators::{MagnitudeLaw, NormKind, Structure};
use spectral_lab::glt::{symbol_of, Domain};
use spectral_lab::notation::parse_expr;
use spectral_lab::perturbation::NormalCondition;
use spectral_lab::symbolic::{Formula, Vars};
use spectral_lab::{SeqExpr, SymbolFn};
use toml::Spanned;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    P,
    DAcs,
    D,
    DPrime,
    DN,
    DR,
    DH,
    CheckLambda,
    CheckSigma,
    ZeroCheck,
    Bf,
    Bf2,
    BfGen,
    NormalPert,
    EigModulus,
}

impl Metric {
    pub const ALL: [Metric; 15] = [
        Metric::P,
        Metric::DAcs,
        Metric::D,
        Metric::DPrime,
        Metric::DN,
        Metric::DR,
        Metric::DH,
        Metric::CheckLambda,
        Metric::CheckSigma,
        Metric::ZeroCheck,
        Metric::Bf,
        Metric::Bf2,
        Metric::BfGen,
        Metric::NormalPert,
        Metric::EigModulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::P => "p",
            Metric::DAcs => "d_acs",
            Metric::D => "d",
            Metric::DPrime => "d_prime",
            Metric::DN => "d_N",
            Metric::DR => "d_R",
            Metric::DH => "d_H",
            Metric::CheckLambda => "check_lambda",
            Metric::CheckSigma => "check_sigma",
            Metric::ZeroCheck => "zero_check",
            Metric::Bf => "bf",
            Metric::Bf2 => "bf2",
            Metric::BfGen => "bf_gen",
            Metric::NormalPert => "normal_pert",
            Metric::EigModulus => "eig_modulus",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Metrics comparing two matrices.
    pub fn is_pair(self) -> bool {
        matches!(
            self,
            Metric::DAcs | Metric::D | Metric::DPrime | Metric::DN | Metric::DR | Metric::DH
        )
    }

    fn needs_symbol(self) -> bool {
        matches!(self, Metric::CheckLambda | Metric::CheckSigma)
    }

    fn needs_jordan(self) -> bool {
        matches!(self, Metric::Bf | Metric::Bf2 | Metric::BfGen)
    }

    fn uses_eigenvalues(self) -> bool {
        matches!(self, Metric::D | Metric::DPrime | Metric::CheckLambda | Metric::EigModulus)
    }
}

/// Which matrix of a cell a check looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    Base,
    Perturbed,
    Compare,
}

impl Subject {
    pub fn name(self) -> &'static str {
        match self {
            Subject::Base => "base",
            Subject::Perturbed => "perturbed",
            Subject::Compare => "compare",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "base" => Some(Subject::Base),
            "perturbed" => Some(Subject::Perturbed),
            "compare" => Some(Subject::Compare),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenPath {
    Numeric,
    /// Roots of the cycle weight product; exact for subdiagonal-plus-corner matrices.
    CycleOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    NonIncreasing,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub metric: Metric,
    pub subject: Subject,
    pub against: Option<Subject>,
    pub symbol: Option<SymbolFn>,
    pub eigen: EigenPath,
    /// Target modulus for `eig_modulus`, a formula in `n`.
    pub target: Option<Formula>,
    /// Required outcome of the metric's own verdict.
    pub expect: Option<bool>,
    pub max: Option<f64>,
    pub min: Option<f64>,
    pub equals: Option<Formula>,
    pub tol: f64,
    pub trend: Option<Trend>,
    pub n_range: Option<(usize, usize)>,
    pub condition: Option<NormalCondition>,
    pub eps: f64,
    /// Slack allowed on theorem margins.
    pub margin_tol: f64,
}

impl Check {
    pub fn applies_to(&self, n: usize) -> bool {
        self.n_range.is_none_or(|(lo, hi)| lo <= n && n <= hi)
    }

    /// True when the record carries a pass/fail verdict rather than `info`.
    pub fn is_judged(&self) -> bool {
        self.has_natural_verdict() || self.max.is_some() || self.min.is_some() || self.equals.is_some()
    }

    pub fn has_natural_verdict(&self) -> bool {
        matches!(
            self.metric,
            Metric::CheckLambda
                | Metric::CheckSigma
                | Metric::ZeroCheck
                | Metric::Bf
                | Metric::Bf2
                | Metric::BfGen
                | Metric::NormalPert
        )
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationTemplate {
    pub structure: Structure,
    pub norm: NormKind,
    pub law: MagnitudeLaw,
    pub seed_offset: u64,
}

#[derive(Debug, Clone)]
pub struct JordanTemplate {
    /// Eigenvalue of block `k`, a formula in `x = (k + 1/2) / blocks` and `n`.
    pub eigenvalues: Formula,
    pub block_size: usize,
    /// Condition number of the random similarity; 1 means the identity.
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub description: String,
    pub anchor: String,
    pub seed: u64,
    pub n_list: Vec<usize>,
    pub sequence: Option<SeqExpr>,
    pub compare: Option<SeqExpr>,
    pub perturbation: Option<PerturbationTemplate>,
    pub jordan: Option<JordanTemplate>,
    pub checks: Vec<Check>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Resolver { text }.resolve(raw)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_nmax(mut self, nmax: usize) -> Self {
        self.n_list.retain(|&n| n <= nmax);
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    anchor: String,
    #[serde(default)]
    seed: u64,
    n_list: Vec<usize>,
    sequence: Option<Spanned<String>>,
    compare: Option<Spanned<String>>,
    symbol: Option<Spanned<String>>,
    domain: Option<Spanned<String>>,
    eps: Option<f64>,
    #[serde(default)]
    metrics: Vec<Spanned<String>>,
    perturbation: Option<RawPerturbation>,
    jordan: Option<RawJordan>,
    #[serde(default, rename = "check")]
    checks: Vec<RawCheck>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    structure: Spanned<String>,
    rank: Option<usize>,
    #[serde(default = "default_norm")]
    norm: Spanned<String>,
    p: Option<f64>,
    law: Spanned<String>,
    #[serde(default)]
    seed_offset: u64,
}

fn default_norm() -> Spanned<String> {
    Spanned::new(0..0, "schatten".to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJordan {
    eigenvalues: Spanned<String>,
    #[serde(default = "one")]
    block_size: usize,
    #[serde(default = "unit")]
    condition: f64,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    label: Option<String>,
    metric: Spanned<String>,
    subject: Option<Spanned<String>>,
    against: Option<Spanned<String>>,
    symbol: Option<Spanned<String>>,
    domain: Option<Spanned<String>>,
    eigen: Option<Spanned<String>>,
    target: Option<Spanned<String>>,
    expect: Option<Spanned<String>>,
    max: Option<f64>,
    min: Option<f64>,
    equals: Option<Spanned<String>>,
    #[serde(default)]
    tol: f64,
    trend: Option<Spanned<String>>,
    n_range: Option<[usize; 2]>,
    condition: Option<u8>,
    p: Option<f64>,
    eps: Option<f64>,
    margin_tol: Option<f64>,
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn location(&self, pos: usize) -> String {
        let pos = pos.min(self.text.len());
        let before = &self.text[..pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        format!("line {line}, column {column}")
    }

    fn error(&self, span: Range<usize>, message: impl std::fmt::Display) -> CliError {
        if span.is_empty() && span.start == 0 {
            return CliError::Config(message.to_string());
        }
        CliError::Config(format!("{}: {message}", self.location(span.start)))
    }

    /// Maps an offset inside a string value back to the document.
    fn inner_error(&self, value: &Spanned<String>, err: spectral_lab::Error) -> CliError {
        match err {
            spectral_lab::Error::Parse { offset, message } => {
                let span = value.span();
                let quote = usize::from(span.end > span.start);
                CliError::Config(format!(
                    "{}: parse error: {message}",
                    self.location(span.start + quote + offset)
                ))
            }
            other => self.error(value.span(), other),
        }
    }

    fn expr(&self, value: &Spanned<String>) -> Result<SeqExpr, CliError> {
        parse_expr(value.get_ref()).map_err(|e| self.inner_error(value, e))
    }

    fn formula(&self, value: &Spanned<String>) -> Result<Formula, CliError> {
        Formula::parse(value.get_ref()).map_err(|e| self.inner_error(value, e))
    }

    fn domain(&self, value: &Option<Spanned<String>>) -> Result<Option<Domain>, CliError> {
        value
            .as_ref()
            .map(|d| Domain::from_name(d.get_ref()).ok_or_else(|| self.error(d.span(), format!("unknown domain `{}`", d.get_ref()))))
            .transpose()
    }

    fn symbol(&self, value: &Spanned<String>, domain: Option<Domain>) -> Result<SymbolKind, CliError> {
        if value.get_ref() == "auto" {
            return Ok(SymbolKind::Auto);
        }
        let f = self.formula(value)?;
        Ok(SymbolKind::Given(match domain {
            Some(d) => SymbolFn::formula_on(&f, d),
            None => SymbolFn::formula(&f),
        }))
    }

    fn resolve(&self, raw: RawScenario) -> Result<Scenario, CliError> {
        if raw.id.trim().is_empty() {
            return Err(CliError::Config("scenario id must not be empty".into()));
        }
        if raw.n_list.contains(&0) {
            return Err(CliError::Config("n_list entries must be positive".into()));
        }
        if raw.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("n_list must be strictly increasing".into()));
        }
        let sequence = raw.sequence.as_ref().map(|s| self.expr(s)).transpose()?;
        let compare = raw.compare.as_ref().map(|s| self.expr(s)).transpose()?;
        let perturbation = raw.perturbation.as_ref().map(|p| self.perturbation(p)).transpose()?;
        let jordan = raw.jordan.as_ref().map(|j| self.jordan(j)).transpose()?;
        if sequence.is_none() && jordan.is_none() {
            return Err(CliError::Config("a scenario needs `sequence` or a [jordan] table".into()));
        }
        let top_domain = self.domain(&raw.domain)?;
        let top_symbol = raw.symbol.as_ref().map(|s| self.symbol(s, top_domain)).transpose()?;
        let eps = raw.eps.unwrap_or(0.1);

        let ctx = Context {
            sequence: sequence.as_ref(),
            compare: compare.as_ref(),
            perturbed: perturbation.is_some(),
            jordan: jordan.is_some(),
            symbol: top_symbol.as_ref(),
            eps,
        };
        let mut checks = Vec::new();
        for m in &raw.metrics {
            let metric = Metric::from_name(m.get_ref()).ok_or_else(|| self.error(m.span(), format!("unknown metric `{}`", m.get_ref())))?;
            checks.push(self.shorthand(metric, m.span(), &ctx)?);
        }
        for c in &raw.checks {
            checks.push(self.check(c, &ctx)?);
        }
        let mut seen = BTreeSet::new();
        for c in &checks {
            if !seen.insert(c.label.clone()) {
                return Err(CliError::Config(format!("duplicate check label `{}`", c.label)));
            }
        }
        Ok(Scenario {
            id: raw.id,
            description: raw.description,
            anchor: raw.anchor,
            seed: raw.seed,
            n_list: raw.n_list,
            sequence,
            compare,
            perturbation,
            jordan,
            checks,
        })
    }

    fn perturbation(&self, p: &RawPerturbation) -> Result<PerturbationTemplate, CliError> {
        let rank = || {
            p.rank
                .filter(|&r| r > 0)
                .ok_or_else(|| self.error(p.structure.span(), "rank structures need a positive `rank`"))
        };
        let structure = match p.structure.get_ref().as_str() {
            "dense" => Structure::Dense,
            "diagonal-real" => Structure::DiagonalReal,
            "skew-hermitian" => Structure::SkewHermitian,
            "rank-corner" => Structure::RankCorner(rank()?),
            "rank-random" => Structure::RankRandom(rank()?),
            other => return Err(self.error(p.structure.span(), format!("unknown structure `{other}`"))),
        };
        let norm = match p.norm.get_ref().as_str() {
            "schatten" => {
                let exp = p.p.unwrap_or(1.0);
                if !(exp >= 1.0) {
                    return Err(self.error(p.norm.span(), format!("Schatten exponent must be >= 1, got {exp}")));
                }
                NormKind::Schatten(exp)
            }
            "operator" => NormKind::Operator,
            other => return Err(self.error(p.norm.span(), format!("unknown norm `{other}`"))),
        };
        let law = MagnitudeLaw::formula(self.formula(&p.law)?);
        Ok(PerturbationTemplate {
            structure,
            norm,
            law,
            seed_offset: p.seed_offset,
        })
    }

    fn jordan(&self, j: &RawJordan) -> Result<JordanTemplate, CliError> {
        if j.block_size == 0 {
            return Err(self.error(j.eigenvalues.span(), "block_size must be positive"));
        }
        if !(j.condition >= 1.0) {
            return Err(self.error(j.eigenvalues.span(), format!("condition must be >= 1, got {}", j.condition)));
        }
        Ok(JordanTemplate {
            eigenvalues: self.formula(&j.eigenvalues)?,
            block_size: j.block_size,
            condition: j.condition,
        })
    }

    fn shorthand(&self, metric: Metric, span: Range<usize>, ctx: &Context) -> Result<Check, CliError> {
        let against = metric.is_pair().then(|| ctx.default_against()).flatten();
        let check = Check {
            label: metric.name().to_string(),
            metric,
            subject: Subject::Base,
            against,
            symbol: None,
            eigen: EigenPath::Numeric,
            target: None,
            expect: None,
            max: None,
            min: None,
            equals: None,
            tol: 0.0,
            trend: None,
            n_range: None,
            condition: (metric == Metric::NormalPert).then_some(NormalCondition::SmallSchatten(2.0)),
            eps: ctx.eps,
            margin_tol: 1e-8,
        };
        self.finish(check, None, span, ctx)
    }

    fn check(&self, c: &RawCheck, ctx: &Context) -> Result<Check, CliError> {
        let span = c.metric.span();
        let metric = Metric::from_name(c.metric.get_ref()).ok_or_else(|| self.error(span.clone(), format!("unknown metric `{}`", c.metric.get_ref())))?;
        let subject_of = |s: &Spanned<String>| {
            Subject::from_name(s.get_ref()).ok_or_else(|| self.error(s.span(), format!("unknown subject `{}`", s.get_ref())))
        };
        let subject = c.subject.as_ref().map(subject_of).transpose()?.unwrap_or(Subject::Base);
        let against = match &c.against {
            Some(s) => Some(subject_of(s)?),
            None if metric.is_pair() => ctx.default_against(),
            None => None,
        };
        let eigen = match c.eigen.as_ref().map(|e| e.get_ref().as_str()) {
            None | Some("numeric") => EigenPath::Numeric,
            Some("cycle-oracle") => EigenPath::CycleOracle,
            Some(other) => return Err(self.error(c.eigen.as_ref().unwrap().span(), format!("unknown eigen path `{other}`"))),
        };
        let expect = match &c.expect {
            None => None,
            Some(e) => match e.get_ref().as_str() {
                "pass" => Some(true),
                "fail" => Some(false),
                other => return Err(self.error(e.span(), format!("expect must be `pass` or `fail`, got `{other}`"))),
            },
        };
        let trend = match &c.trend {
            None => None,
            Some(t) if t.get_ref() == "non-increasing" => Some(Trend::NonIncreasing),
            Some(t) => return Err(self.error(t.span(), format!("unknown trend `{}`", t.get_ref()))),
        };
        let n_range = match c.n_range {
            Some([lo, hi]) if lo > hi => return Err(self.error(span, "n_range must be [lo, hi] with lo <= hi")),
            Some([lo, hi]) => Some((lo, hi)),
            None => None,
        };
        let condition = match (metric, c.condition) {
            (Metric::NormalPert, cond) => Some(self.condition(cond.unwrap_or(2), c.p, span.clone())?),
            (_, None) => None,
            (_, Some(_)) => return Err(self.error(span, "`condition` only applies to normal_pert")),
        };
        let symbol = match &c.symbol {
            Some(s) => Some(self.symbol(s, self.domain(&c.domain)?)?),
            None => None,
        };
        let formula = |v: &Option<Spanned<String>>| v.as_ref().map(|f| self.formula(f)).transpose();
        let check = Check {
            label: c.label.clone().unwrap_or_else(|| metric.name().to_string()),
            metric,
            subject,
            against,
            symbol: None,
            eigen,
            target: formula(&c.target)?,
            expect,
            max: c.max,
            min: c.min,
            equals: formula(&c.equals)?,
            tol: c.tol,
            trend,
            n_range,
            condition,
            eps: c.eps.unwrap_or(ctx.eps),
            margin_tol: c.margin_tol.unwrap_or(1e-8),
        };
        self.finish(check, symbol, span, ctx)
    }

    fn condition(&self, index: u8, p: Option<f64>, span: Range<usize>) -> Result<NormalCondition, CliError> {
        Ok(match index {
            1 => NormalCondition::ZeroDistributedNormalSum,
            2 => NormalCondition::SmallSchatten(p.unwrap_or(2.0)),
            3 => NormalCondition::GrowingSchatten(p.ok_or_else(|| self.error(span.clone(), "condition 3 needs `p`"))?),
            4 => NormalCondition::SmallOperator,
            other => return Err(self.error(span, format!("normal_pert condition must be 1..4, got {other}"))),
        })
    }

    /// Resolves the symbol and verifies that every input the metric reads exists.
    fn finish(&self, mut check: Check, symbol: Option<SymbolKind>, span: Range<usize>, ctx: &Context) -> Result<Check, CliError> {
        let label = check.label.clone();
        let fail = |msg: String| self.error(span.clone(), format!("check `{label}`: {msg}"));
        for s in std::iter::once(check.subject).chain(check.against) {
            match s {
                Subject::Perturbed if !ctx.perturbed => return Err(fail("`perturbed` needs a [perturbation] table".into())),
                Subject::Compare if ctx.compare.is_none() => return Err(fail("`compare` needs a `compare` expression".into())),
                _ => {}
            }
        }
        if check.metric.is_pair() && check.against.is_none() {
            return Err(fail(format!("{} needs a second matrix (`compare`, a perturbation or `against`)", check.metric.name())));
        }
        if !check.metric.is_pair() && check.against.is_some() {
            return Err(fail(format!("{} takes no `against`", check.metric.name())));
        }
        if check.metric.needs_jordan() && !(ctx.jordan && ctx.perturbed) {
            return Err(fail("Bauer-Fike checks need [jordan] and [perturbation] tables".into()));
        }
        if check.metric == Metric::NormalPert && !ctx.perturbed {
            return Err(fail("normal_pert needs a [perturbation] table".into()));
        }
        if check.metric == Metric::EigModulus && check.target.is_none() {
            return Err(fail("eig_modulus needs a `target` modulus".into()));
        }
        if check.eigen == EigenPath::CycleOracle && !check.metric.uses_eigenvalues() {
            return Err(fail("the cycle oracle only applies to eigenvalue metrics".into()));
        }
        if check.target.is_some() && check.metric != Metric::EigModulus {
            return Err(fail("`target` only applies to eig_modulus".into()));
        }
        if check.expect.is_some() && !check.has_natural_verdict() {
            return Err(fail(format!("{} has no verdict of its own; use max/min/equals", check.metric.name())));
        }
        if !(check.tol >= 0.0) || !(check.eps > 0.0) {
            return Err(fail("`tol` must be >= 0 and `eps` > 0".into()));
        }
        if check.metric.needs_symbol() {
            let kind = symbol.or_else(|| ctx.symbol.cloned()).unwrap_or(SymbolKind::Auto);
            let resolved = match kind {
                SymbolKind::Given(s) => s,
                SymbolKind::Auto => {
                    let expr = match check.subject {
                        Subject::Base | Subject::Perturbed => ctx.sequence,
                        Subject::Compare => ctx.compare,
                    };
                    expr.and_then(symbol_of).ok_or_else(|| fail("no symbol given and none derivable from the expression".into()))?
                }
            };
            check.symbol = Some(resolved);
        } else if symbol.is_some() {
            return Err(fail("`symbol` only applies to check_lambda and check_sigma".into()));
        }
        Ok(check)
    }
}

#[derive(Clone)]
enum SymbolKind {
    Auto,
    Given(SymbolFn),
}

struct Context<'a> {
    sequence: Option<&'a SeqExpr>,
    compare: Option<&'a SeqExpr>,
    perturbed: bool,
    jordan: bool,
    symbol: Option<&'a SymbolKind>,
    eps: f64,
}

impl Context<'_> {
    fn default_against(&self) -> Option<Subject> {
        if self.compare.is_some() {
            Some(Subject::Compare)
        } else if self.perturbed {
            Some(Subject::Perturbed)
        } else {
            None
        }
    }
}

/// Evaluates a formula in `n` to a real number.
pub fn eval_in_n(f: &Formula, n: usize) -> f64 {
    f.eval_real(Vars {
        n: n as f64,
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
id = "t"
n_list = [4, 8]
sequence = '(toeplitz "2*cos(t)")'
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::parse(BASE).unwrap();
        assert_eq!(s.n_list, vec![4, 8]);
        assert!(s.checks.is_empty());
    }

    #[test]
    fn n_list_must_increase() {
        let text = BASE.replace("[4, 8]", "[8, 8]");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("strictly increasing"), "{err}");
    }

    #[test]
    fn expression_errors_report_line_and_column() {
        let text = BASE.replace("(toeplitz \"2*cos(t)\")", "(toeplitz \"2*cos(t)\" bogus)");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("line 4, column"), "{err}");
    }

    #[test]
    fn toml_errors_report_line_and_column() {
        let err = Scenario::parse("id = \nn_list = [1]").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn pair_metric_without_partner_is_rejected() {
        let text = format!("{BASE}metrics = [\"d_prime\"]\n");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("second matrix"), "{err}");
    }

    #[test]
    fn auto_symbol_is_derived_from_the_expression() {
        let text = format!("{BASE}metrics = [\"check_lambda\"]\n");
        let s = Scenario::parse(&text).unwrap();
        let sym = s.checks[0].symbol.as_ref().unwrap();
        assert!((sym.eval(0.0, 0.0).re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_metric_is_rejected() {
        let text = format!("{BASE}metrics = [\"entropy\"]\n");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("unknown metric `entropy`") && err.contains("line 5"), "{err}");
    }

    #[test]
    fn nmax_filters_sizes() {
        let s = Scenario::parse(BASE).unwrap().with_nmax(5);
        assert_eq!(s.n_list, vec![4]);
    }
}
