//! Evaluation of a scenario: one cell per size, every check evaluated inside the cell.

use std::cell::OnceCell;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use spectral_lab::distribution::{sample_symbol, verdict_from_points, EmpiricalMeasure, ZERO_DIST_EPS, ZERO_DIST_ETA};
use spectral_lab::generators::{cycle_oracle_eigenvalues, derive_seed, random_perturbation, random_with_condition, PerturbationSpec};
use spectral_lab::matching::{bottleneck_distance, d_acs_finite, d_h_finite, d_n_finite, d_prime, d_r_finite, limsup_estimate, p_func};
use spectral_lab::perturbation::{bf2_check, bf_check, bf_gen_check, normal_pert_check, JordanSpec};
use spectral_lab::spectral::{eigenvalues, singular_values};
use spectral_lab::symbolic::Vars;
use spectral_lab::{ComplexMatrix, C64};

use crate::scenario::{eval_in_n, Check, EigenPath, Metric, Scenario, Subject, Trend};
use crate::CliError;

const JORDAN_SALT: u64 = 0x4a6f_7264_616e_5631;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
            Verdict::Error => "error",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Fail | Verdict::Error)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub scenario: String,
    /// Check label.
    pub id: String,
    pub n: usize,
    pub metric: String,
    pub value: f64,
    pub aux: String,
    pub verdict: Verdict,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendSummary {
    pub kind: &'static str,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub label: String,
    pub metric: &'static str,
    pub trace: Vec<(usize, f64)>,
    pub limsup_estimate: Option<f64>,
    pub trend: Option<TrendSummary>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub info: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub description: String,
    pub anchor: String,
    pub seed: u64,
    pub n_list: Vec<usize>,
    pub passed: bool,
    pub counts: Counts,
    pub checks: Vec<CheckSummary>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<ResultRecord>,
    pub summary: Summary,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

/// Runs every (n, check) cell; cells of different sizes run concurrently on up to
/// `workers` threads, and records come back in scenario order.
pub fn run(scenario: &Scenario, workers: Option<usize>) -> Result<RunReport, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let per_cell: Vec<Vec<ResultRecord>> = if scenario.checks.is_empty() {
        Vec::new()
    } else {
        pool.install(|| scenario.n_list.par_iter().map(|&n| Cell::new(scenario, n).evaluate()).collect())
    };
    let records: Vec<ResultRecord> = per_cell.into_iter().flatten().collect();
    let summary = summarize(scenario, &records);
    Ok(RunReport { records, summary })
}

fn summarize(scenario: &Scenario, records: &[ResultRecord]) -> Summary {
    let mut counts = Counts::default();
    for r in records {
        match r.verdict {
            Verdict::Pass => counts.pass += 1,
            Verdict::Fail => counts.fail += 1,
            Verdict::Info => counts.info += 1,
            Verdict::Error => counts.error += 1,
        }
    }
    let checks: Vec<CheckSummary> = scenario
        .checks
        .iter()
        .map(|c| {
            let mine: Vec<&ResultRecord> = records.iter().filter(|r| r.id == c.label).collect();
            let trace: Vec<(usize, f64)> = mine
                .iter()
                .filter(|r| r.verdict != Verdict::Error)
                .map(|r| (r.n, r.value))
                .collect();
            let trend = c.trend.map(|t| match t {
                Trend::NonIncreasing => TrendSummary {
                    kind: "non-increasing",
                    ok: mine.iter().all(|r| r.verdict != Verdict::Error) && trace.windows(2).all(|w| w[1].1 <= w[0].1 + c.tol),
                },
            });
            CheckSummary {
                label: c.label.clone(),
                metric: c.metric.name(),
                limsup_estimate: limsup_estimate(&trace).ok(),
                trace,
                trend,
                verdicts: mine.iter().map(|r| r.verdict).collect(),
            }
        })
        .collect();
    let passed = counts.fail == 0 && counts.error == 0 && checks.iter().all(|c| c.trend.as_ref().is_none_or(|t| t.ok));
    Summary {
        scenario: scenario.id.clone(),
        description: scenario.description.clone(),
        anchor: scenario.anchor.clone(),
        seed: scenario.seed,
        n_list: scenario.n_list.clone(),
        passed,
        counts,
        checks,
    }
}

type Shared<T> = OnceCell<Result<T, String>>;

fn shared<T>(cell: &Shared<T>, f: impl FnOnce() -> spectral_lab::Result<T>) -> Result<&T, String> {
    cell.get_or_init(|| f().map_err(|e| e.to_string())).as_ref().map_err(Clone::clone)
}

struct Outcome {
    value: f64,
    aux: String,
    natural: Option<bool>,
}

impl Outcome {
    fn plain(value: f64) -> Self {
        Self {
            value,
            aux: String::new(),
            natural: None,
        }
    }
}

/// Matrices and spectra of one size, built on first use.
struct Cell<'a> {
    scenario: &'a Scenario,
    n: usize,
    jordan: Shared<JordanSpec>,
    base: Shared<ComplexMatrix>,
    noise: Shared<ComplexMatrix>,
    perturbed: Shared<ComplexMatrix>,
    compare: Shared<ComplexMatrix>,
    eig: [Shared<Vec<C64>>; 6],
    sv: [Shared<Vec<f64>>; 3],
}

fn slot(s: Subject) -> usize {
    match s {
        Subject::Base => 0,
        Subject::Perturbed => 1,
        Subject::Compare => 2,
    }
}

impl<'a> Cell<'a> {
    fn new(scenario: &'a Scenario, n: usize) -> Self {
        Self {
            scenario,
            n,
            jordan: OnceCell::new(),
            base: OnceCell::new(),
            noise: OnceCell::new(),
            perturbed: OnceCell::new(),
            compare: OnceCell::new(),
            eig: Default::default(),
            sv: Default::default(),
        }
    }

    fn evaluate(&self) -> Vec<ResultRecord> {
        self.scenario
            .checks
            .iter()
            .filter(|c| c.applies_to(self.n))
            .map(|c| {
                let start = Instant::now();
                let outcome = self.outcome(c);
                let seconds = start.elapsed().as_secs_f64();
                let (value, aux, verdict) = match outcome {
                    Ok(o) => {
                        let verdict = judge(c, self.n, &o);
                        (o.value, o.aux, verdict)
                    }
                    Err(e) => (f64::NAN, e, Verdict::Error),
                };
                ResultRecord {
                    scenario: self.scenario.id.clone(),
                    id: c.label.clone(),
                    n: self.n,
                    metric: c.metric.name().to_string(),
                    value,
                    aux,
                    verdict,
                    seconds,
                }
            })
            .collect()
    }

    fn jordan(&self) -> Result<&JordanSpec, String> {
        shared(&self.jordan, || {
            let t = self.scenario.jordan.as_ref().expect("validated: jordan table present");
            let n = self.n;
            if !n.is_multiple_of(t.block_size) {
                return Err(spectral_lab::Error::Config(format!("n = {n} is not a multiple of block_size {}", t.block_size)));
            }
            let blocks = n / t.block_size;
            let values = (0..blocks)
                .map(|k| {
                    let z = t.eigenvalues.eval(Vars {
                        x: (k as f64 + 0.5) / blocks as f64,
                        n: n as f64,
                        ..Default::default()
                    });
                    (z, t.block_size)
                })
                .collect();
            let v = if t.condition == 1.0 {
                ComplexMatrix::identity(n)
            } else {
                random_with_condition(n, t.condition, derive_seed(self.scenario.seed ^ JORDAN_SALT, n))?
            };
            JordanSpec::new(values, v)
        })
    }

    fn base(&self) -> Result<&ComplexMatrix, String> {
        shared(&self.base, || match &self.scenario.sequence {
            Some(e) => e.build(self.n),
            None => self.jordan().map_err(spectral_lab::Error::InvalidInput)?.matrix(),
        })
    }

    fn noise(&self) -> Result<&ComplexMatrix, String> {
        shared(&self.noise, || {
            let t = self.scenario.perturbation.as_ref().expect("validated: perturbation table present");
            let spec = PerturbationSpec {
                structure: t.structure,
                norm: t.norm,
                law: t.law.clone(),
                seed: self.scenario.seed.wrapping_add(t.seed_offset),
            };
            random_perturbation(&spec, self.n)
        })
    }

    fn matrix(&self, s: Subject) -> Result<&ComplexMatrix, String> {
        match s {
            Subject::Base => self.base(),
            Subject::Perturbed => {
                let (b, y) = (self.base()?, self.noise()?);
                shared(&self.perturbed, || b.try_add(y))
            }
            Subject::Compare => shared(&self.compare, || {
                self.scenario.compare.as_ref().expect("validated: compare present").build(self.n)
            }),
        }
    }

    fn eigenvalues(&self, s: Subject, path: EigenPath) -> Result<&Vec<C64>, String> {
        let m = self.matrix(s)?;
        let idx = 2 * slot(s) + usize::from(path == EigenPath::CycleOracle);
        shared(&self.eig[idx], || match path {
            EigenPath::Numeric => eigenvalues(m),
            EigenPath::CycleOracle => cycle_oracle_eigenvalues(m).ok_or_else(|| {
                spectral_lab::Error::InvalidInput("cycle oracle needs a subdiagonal-plus-corner matrix".into())
            }),
        })
    }

    fn singular_values(&self, s: Subject) -> Result<&Vec<f64>, String> {
        let m = self.matrix(s)?;
        shared(&self.sv[slot(s)], || singular_values(m))
    }

    fn outcome(&self, c: &Check) -> Result<Outcome, String> {
        let core = |r: spectral_lab::Result<f64>| r.map(Outcome::plain).map_err(|e| e.to_string());
        let pair = || -> Result<(&ComplexMatrix, &ComplexMatrix), String> {
            Ok((self.matrix(c.subject)?, self.matrix(c.against.expect("validated: pair metric"))?))
        };
        let eig_pair = || -> Result<(&Vec<C64>, &Vec<C64>), String> {
            Ok((
                self.eigenvalues(c.subject, c.eigen)?,
                self.eigenvalues(c.against.expect("validated: pair metric"), c.eigen)?,
            ))
        };
        let n = self.n;
        match c.metric {
            Metric::P => {
                let (v, i) = p_func(self.matrix(c.subject)?).map_err(|e| e.to_string())?;
                Ok(Outcome {
                    value: v,
                    aux: format!("index={i}"),
                    natural: None,
                })
            }
            Metric::DAcs => pair().and_then(|(a, b)| core(d_acs_finite(a, b))),
            Metric::DN => pair().and_then(|(a, b)| core(d_n_finite(a, b))),
            Metric::DR => pair().and_then(|(a, b)| core(d_r_finite(a, b))),
            Metric::DH => pair().and_then(|(a, b)| core(d_h_finite(a, b))),
            Metric::D => eig_pair().and_then(|(v, w)| core(bottleneck_distance(v, w).map(|m| m.value))),
            Metric::DPrime => {
                let (v, w) = eig_pair()?;
                let m = d_prime(v, w).map_err(|e| e.to_string())?;
                Ok(Outcome {
                    value: m.value,
                    aux: format!("cut={}", m.cut_index),
                    natural: None,
                })
            }
            Metric::CheckLambda | Metric::CheckSigma => {
                let sym = c.symbol.as_ref().expect("validated: symbol present");
                let (spectrum, target) = if c.metric == Metric::CheckLambda {
                    let eig = self.eigenvalues(c.subject, c.eigen)?;
                    (EmpiricalMeasure::new(eig.clone()), sample_symbol(sym, n))
                } else {
                    let sv = self.singular_values(c.subject)?;
                    (EmpiricalMeasure::from_real(sv), sample_symbol(&sym.modulus(), n))
                };
                let v = verdict_from_points(n, &spectrum.map_err(|e| e.to_string())?, &target.map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                Ok(Outcome {
                    value: v.dprime_value,
                    aux: format!("gap={:?};tau={:?};n_used={}", v.test_functional_gap, v.threshold, v.n_used),
                    natural: Some(v.pass),
                })
            }
            Metric::ZeroCheck => {
                let sv = self.singular_values(c.subject)?;
                let nf = sv.len().max(1) as f64;
                let fraction = sv.iter().filter(|&&s| s > ZERO_DIST_EPS).count() as f64 / nf;
                let ratio = sv.iter().sum::<f64>() / nf;
                Ok(Outcome {
                    value: fraction,
                    aux: format!("trace_norm_ratio={ratio:?}"),
                    natural: Some(fraction <= ZERO_DIST_ETA),
                })
            }
            Metric::Bf | Metric::Bf2 => {
                let (spec, y) = (self.jordan()?, self.noise()?);
                let r = if c.metric == Metric::Bf { bf_check(spec, y) } else { bf2_check(spec, y) }.map_err(|e| e.to_string())?;
                Ok(Outcome {
                    value: r.margin,
                    aux: format!("lhs={:?};rhs={:?};premise={}", r.lhs, r.rhs, r.premise_ok),
                    natural: Some(!r.premise_ok || r.margin >= -c.margin_tol),
                })
            }
            Metric::BfGen => {
                let (spec, y) = (self.jordan()?, self.noise()?);
                let r = bf_gen_check(spec, y).map_err(|e| e.to_string())?;
                let m = spec.m() as i32;
                let worst = r
                    .per_eigenvalue
                    .iter()
                    .map(|e| e.bound - e.distance.powi(m))
                    .fold(f64::INFINITY, f64::min);
                Ok(Outcome {
                    value: worst,
                    aux: format!("premise={};all_hold={}", r.premise_ok, r.all_hold),
                    natural: Some(!r.premise_ok || r.all_hold),
                })
            }
            Metric::NormalPert => {
                let (x, y) = (self.matrix(c.subject)?, self.noise()?);
                let cond = c.condition.expect("validated: condition present");
                let r = normal_pert_check(x, y, cond, c.eps).map_err(|e| e.to_string())?;
                Ok(Outcome {
                    value: r.dprime,
                    aux: format!(
                        "condition={};k_n={};bound={:?};max_mismatch={:?};witness={:?}",
                        cond.index(),
                        r.k_n,
                        r.bound,
                        r.max_mismatch,
                        r.witness
                    ),
                    natural: Some(r.bound_ok),
                })
            }
            Metric::EigModulus => {
                let target = eval_in_n(c.target.as_ref().expect("validated: target present"), n);
                if !(target > 0.0 && target.is_finite()) {
                    return Err(format!("target modulus must be positive and finite, got {target}"));
                }
                let eig = self.eigenvalues(c.subject, c.eigen)?;
                let dev = eig.iter().map(|z| (z.norm() / target - 1.0).abs()).fold(0.0, f64::max);
                Ok(Outcome {
                    value: dev,
                    aux: format!("target={target:?}"),
                    natural: None,
                })
            }
        }
    }
}

fn judge(c: &Check, n: usize, o: &Outcome) -> Verdict {
    if !c.is_judged() {
        return Verdict::Info;
    }
    let v = o.value;
    let mut ok = match o.natural {
        Some(natural) => natural == c.expect.unwrap_or(true),
        None => true,
    };
    if let Some(max) = c.max {
        ok &= v <= max;
    }
    if let Some(min) = c.min {
        ok &= v >= min;
    }
    if let Some(f) = &c.equals {
        ok &= (v - eval_in_n(f, n)).abs() <= c.tol;
    }
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(extra: &str) -> Scenario {
        let text = format!(
            "id = \"unit\"\nseed = 3\nn_list = [8, 16, 32, 64]\nsequence = '(toeplitz \"2*cos(t)\")'\n{extra}"
        );
        Scenario::parse(&text).unwrap()
    }

    #[test]
    fn empty_check_list_gives_no_records_and_passes() {
        let r = run(&scenario(""), Some(2)).unwrap();
        assert!(r.records.is_empty());
        assert!(r.passed());
    }

    #[test]
    fn records_follow_size_then_check_order() {
        let s = scenario("[[check]]\nmetric = \"p\"\n[[check]]\nmetric = \"zero_check\"\nlabel = \"z\"\nexpect = \"fail\"\n");
        let r = run(&s, Some(4)).unwrap();
        let keys: Vec<(usize, &str)> = r.records.iter().map(|x| (x.n, x.id.as_str())).collect();
        assert_eq!(keys[..4], [(8, "p"), (8, "z"), (16, "p"), (16, "z")]);
        assert!(r.passed(), "{:?}", r.records);
        assert!(r.summary.checks[0].limsup_estimate.is_some());
    }

    #[test]
    fn failing_bound_fails_the_run() {
        let s = scenario("[[check]]\nmetric = \"p\"\nmax = 0.5\n");
        let r = run(&s, Some(1)).unwrap();
        assert!(!r.passed());
        assert!(r.records.iter().all(|x| x.verdict == Verdict::Fail));
    }

    #[test]
    fn cell_errors_are_recorded_and_the_run_continues() {
        let text = "id = \"e\"\nn_list = [3, 4]\nsequence = '(counterexample ce1-X)'\n[[check]]\nmetric = \"eig_modulus\"\ntarget = \"2\"\neigen = \"cycle-oracle\"\n";
        let r = run(&Scenario::parse(text).unwrap(), None).unwrap();
        assert_eq!(r.records.len(), 2);
        assert!(r.records.iter().all(|x| x.verdict == Verdict::Error));
        assert!(!r.passed());
    }

    #[test]
    fn trend_violation_fails() {
        // |lambda| reaches 2 while the target is 1/n, so the deviation grows like 2n.
        let s = scenario("[[check]]\nmetric = \"eig_modulus\"\ntarget = \"1/n\"\ntrend = \"non-increasing\"\n");
        let r = run(&s, None).unwrap();
        assert!(!r.passed());
        assert_eq!(r.summary.checks[0].trend.as_ref().map(|t| t.ok), Some(false));
    }
}
