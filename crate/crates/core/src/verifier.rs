//! Pole-avoiding sampling, suite execution and reports.
//!
//! Every check is an independent job. Jobs are listed in a fixed order
//! (suite, grid cell, trial) and results are collected in that order, so a
//! [`Report`] is the same whether the jobs ran on one thread or many. Each
//! trial draws from its own ChaCha stream selected by `(seed, trial_index)`.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::identities::{
    self, cauchy_polynomial, identity1_lhs_terms, identity1_rice_function, identity2_lhs_terms,
    identity2_rice_function, DilcherMethod, EvalMode, Side, SideValue,
};
use crate::qprim::{self, rising_product_rewrite, QPoint};
use crate::rational::Rational;
use crate::series::{TruncSeries, WPoly};

const REJECTION_BUDGET: usize = 10_000;

/// Which evaluation modes the identity suites run in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelect {
    Exact,
    Series,
    Both,
}

impl ModeSelect {
    fn exact(self) -> bool {
        matches!(self, ModeSelect::Exact | ModeSelect::Both)
    }
    fn series(self) -> bool {
        matches!(self, ModeSelect::Series | ModeSelect::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_max: usize,
    pub m_max: usize,
    /// Series truncation order `Q`.
    pub order: usize,
    pub denominator_bound: u64,
    pub mode: ModeSelect,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 42,
            trials: 5,
            n_max: 8,
            m_max: 4,
            order: 30,
            denominator_bound: 16,
            mode: ModeSelect::Both,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.n_max == 0 || self.m_max == 0 {
            return bad("n_max and m_max must be at least 1");
        }
        if self.order == 0 {
            return bad("series order must be at least 1");
        }
        if self.denominator_bound < 2 {
            // q = p/r with 0 < p < r needs r >= 2.
            return bad("denominator bound must be at least 2");
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, trial_index: usize, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial_index as u64);
    rng
}

fn sample_rational(rng: &mut ChaCha8Rng, bound: u64) -> Rational {
    let b = bound as i64;
    let num = rng.gen_range(-b..=b);
    let den = rng.gen_range(1..=b);
    Rational::frac(num, den)
}

/// A pole-free point for every check with `n <= n_max` at series order
/// `config.order`, determined by `(config.seed, trial_index)` alone.
pub fn sample_qpoint(config: &SampleConfig, trial_index: usize) -> Result<QPoint> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, trial_index, 0);
    let bound = config.denominator_bound as i64;
    for _ in 0..REJECTION_BUDGET {
        let den = rng.gen_range(2..=bound);
        let num = rng.gen_range(1..den);
        let q = Rational::frac(num, den);
        let x = sample_rational(&mut rng, config.denominator_bound);
        let t = sample_rational(&mut rng, config.denominator_bound);
        if let Ok(point) = QPoint::new(q, x, t, config.n_max, config.order) {
            return Ok(point);
        }
    }
    Err(Error::Sampling { attempts: REJECTION_BUDGET })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identity1,
    Identity2,
    Dilcher,
    ProductLemma,
    Telescoping,
    Cauchy,
    QriceConsistency,
    /// Residue rewrite of identity 1 in series mode against the series-mode
    /// left side.
    CrossMode,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Identity1,
        Suite::Identity2,
        Suite::Dilcher,
        Suite::ProductLemma,
        Suite::Telescoping,
        Suite::Cauchy,
        Suite::QriceConsistency,
        Suite::CrossMode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity1 => "identity1",
            Suite::Identity2 => "identity2",
            Suite::Dilcher => "dilcher",
            Suite::ProductLemma => "product_lemma",
            Suite::Telescoping => "telescoping",
            Suite::Cauchy => "cauchy",
            Suite::QriceConsistency => "qrice_consistency",
            Suite::CrossMode => "cross_mode",
            Suite::All => "all",
        }
    }

    /// Concrete suites this selector stands for. `All` includes the
    /// cross-mode check only when both modes are enabled.
    pub fn expand(self, mode: ModeSelect) -> Vec<Suite> {
        match self {
            Suite::All => {
                Suite::EACH.into_iter().filter(|s| *s != Suite::CrossMode || mode == ModeSelect::Both).collect()
            }
            other => vec![other],
        }
    }
}

pub type TelescopingFn = fn(&[Rational], &Rational, &Rational, usize) -> Result<(Rational, Rational)>;
pub type RiceTermsFn = fn(&dyn Fn(&Rational) -> Result<Rational>, usize, &Rational, usize) -> Result<Vec<Rational>>;

/// Evaluator table used by the suites. Tests swap entries for corrupted
/// versions to confirm the suites can fail.
#[derive(Clone, Copy)]
pub struct Evaluators {
    pub identity1: fn(Side, usize, usize, &QPoint, EvalMode) -> Result<SideValue>,
    pub identity2: fn(Side, usize, &QPoint, EvalMode) -> Result<SideValue>,
    pub dilcher: fn(usize, usize, &QPoint, DilcherMethod) -> Result<Rational>,
    pub product_expansion: fn(Side, usize, usize, &Rational) -> Result<WPoly>,
    pub w2_chain: fn(usize, &Rational) -> Result<Vec<TruncSeries>>,
    pub telescoping: TelescopingFn,
    pub telescoping_generating: TelescopingFn,
    pub cauchy: fn(Side, &Rational, &Rational, usize) -> Result<TruncSeries>,
    pub rice_terms: RiceTermsFn,
    pub identity2_residue: fn(usize, &QPoint) -> Result<Rational>,
    pub identity1_residue: fn(usize, usize, &QPoint) -> Result<Rational>,
    pub w_extraction: fn(usize, usize, &Rational, usize) -> Result<TruncSeries>,
    pub w_extraction_truncated: fn(usize, usize, &Rational, usize) -> Result<TruncSeries>,
}

impl Default for Evaluators {
    fn default() -> Self {
        Evaluators {
            identity1: identities::identity1_side,
            identity2: identities::identity2_side,
            dilcher: identities::dilcher_coefficient,
            product_expansion: identities::product_expansion_side,
            w2_chain: identities::w2_coefficient_chain,
            telescoping: identities::telescoping_sides,
            telescoping_generating: identities::telescoping_generating_sides,
            cauchy: identities::cauchy_side,
            rice_terms: |f, n, q, start| qprim::alt_q_rice_terms(f, n, q, start),
            identity2_residue: identities::identity2_residue_value,
            identity1_residue: identities::identity1_residue_exact,
            w_extraction: identities::identity1_w_extraction,
            w_extraction_truncated: identities::identity1_w_extraction_truncated,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub w_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub point: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: SampleConfig,
    pub suites: Vec<Suite>,
    pub results: Vec<CheckResult>,
    pub pass_count: usize,
    pub fail_count: usize,
    pub overall: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a SampleConfig,
    suites: &'a [Suite],
    pass_count: usize,
    fail_count: usize,
    overall: bool,
}

impl Report {
    fn assemble(config: &SampleConfig, suites: Vec<Suite>, results: Vec<CheckResult>) -> Report {
        let pass_count = results.iter().filter(|r| r.equal).count();
        let fail_count = results.len() - pass_count;
        Report { config: config.clone(), suites, results, pass_count, fail_count, overall: fail_count == 0 }
    }

    /// One JSON object per check, then `{"summary": ...}`, newline-delimited.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.results {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        let summary = Summary {
            config: &self.config,
            suites: &self.suites,
            pass_count: self.pass_count,
            fail_count: self.fail_count,
            overall: self.overall,
        };
        serde_json::to_writer(&mut out, &json!({ "summary": summary }))?;
        out.write_all(b"\n")
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// The same report with every timing field zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.results {
            c.elapsed_us = 0;
        }
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.equal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon thread pool; identical to `Sequential` without the `parallel`
    /// feature.
    Parallel,
}

/// What a job produced before timing and bookkeeping are attached.
struct Outcome {
    point: Value,
    lhs: Value,
    rhs: Value,
    equal: bool,
}

impl Outcome {
    fn compare<T: Serialize + PartialEq>(point: Value, lhs: T, rhs: T) -> Outcome {
        let equal = lhs == rhs;
        Outcome { point, lhs: to_value(&lhs), rhs: to_value(&rhs), equal }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("values serialize to JSON")
}

type JobFn = Box<dyn Fn(&SampleConfig, &Evaluators) -> Result<Outcome> + Send + Sync>;

struct Job {
    suite: Suite,
    check: &'static str,
    params: Params,
    trial: Option<usize>,
    run: JobFn,
}

impl Job {
    fn new<F>(suite: Suite, check: &'static str, params: Params, trial: Option<usize>, run: F) -> Job
    where
        F: Fn(&SampleConfig, &Evaluators) -> Result<Outcome> + Send + Sync + 'static,
    {
        Job { suite, check, params, trial, run: Box::new(run) }
    }

    fn execute(&self, config: &SampleConfig, eval: &Evaluators) -> CheckResult {
        let start = Instant::now();
        let outcome = (self.run)(config, eval);
        let elapsed_us = start.elapsed().as_micros() as u64;
        let (point, lhs, rhs, equal, error) = match outcome {
            Ok(o) => (o.point, o.lhs, o.rhs, o.equal, None),
            Err(e) => (Value::Null, Value::Null, Value::Null, false, Some(e.to_string())),
        };
        CheckResult {
            suite: self.suite.name().to_string(),
            check: self.check.to_string(),
            params: self.params.clone(),
            trial: self.trial,
            point,
            lhs,
            rhs,
            equal,
            error,
            elapsed_us,
        }
    }
}

fn point_value(p: &QPoint) -> Value {
    to_value(p)
}

/// Side values for the configured modes: a bare value for a single mode,
/// `{"exact": .., "series": ..}` for both.
fn moded<F>(mode: ModeSelect, order: usize, eval: F) -> Result<(Value, Value, bool)>
where
    F: Fn(Side, EvalMode) -> Result<SideValue>,
{
    let mut lhs = serde_json::Map::new();
    let mut rhs = serde_json::Map::new();
    let mut equal = true;
    let mut run = |key: &str, m: EvalMode| -> Result<()> {
        let (l, r) = (eval(Side::Lhs, m)?, eval(Side::Rhs, m)?);
        if !l.matches(m) || !r.matches(m) {
            return Err(Error::Shape(format!("{key} evaluation returned a value of the wrong mode")));
        }
        equal &= l == r;
        lhs.insert(key.to_string(), to_value(&l));
        rhs.insert(key.to_string(), to_value(&r));
        Ok(())
    };
    if mode.exact() {
        run("exact", EvalMode::Exact)?;
    }
    if mode.series() {
        run("series", EvalMode::QSeries(order))?;
    }
    let unwrap = |m: serde_json::Map<String, Value>| {
        if m.len() == 1 {
            m.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null)
        } else {
            Value::Object(m)
        }
    };
    Ok((unwrap(lhs), unwrap(rhs), equal))
}

const PRODUCT_LEMMA_XS: [(i64, i64); 3] = [(1, 1), (1, 2), (-2, 3)];

fn jobs_for(suite: Suite, config: &SampleConfig) -> Vec<Job> {
    let trials = 0..config.trials;
    let q_order = config.order;
    let mut jobs = Vec::new();
    match suite {
        Suite::All => {
            for s in suite.expand(config.mode) {
                jobs.extend(jobs_for(s, config));
            }
        }
        Suite::Identity1 => {
            for n in 1..=config.n_max {
                for m in 1..=config.m_max {
                    for trial in trials.clone() {
                        let params = Params {
                            n: Some(n),
                            m: Some(m),
                            order: config.mode.series().then_some(q_order),
                            ..Params::default()
                        };
                        jobs.push(Job::new(suite, "sides", params, Some(trial), move |cfg, ev| {
                            let p = sample_qpoint(cfg, trial)?;
                            let (lhs, rhs, equal) =
                                moded(cfg.mode, cfg.order, |side, mode| (ev.identity1)(side, n, m, &p, mode))?;
                            Ok(Outcome { point: point_value(&p), lhs, rhs, equal })
                        }));
                    }
                }
            }
        }
        Suite::Identity2 => {
            for n in 0..=config.n_max {
                for trial in trials.clone() {
                    let params =
                        Params { n: Some(n), order: config.mode.series().then_some(q_order), ..Params::default() };
                    jobs.push(Job::new(suite, "sides", params, Some(trial), move |cfg, ev| {
                        let p = sample_qpoint(cfg, trial)?;
                        let (lhs, rhs, equal) =
                            moded(cfg.mode, cfg.order, |side, mode| (ev.identity2)(side, n, &p, mode))?;
                        Ok(Outcome { point: point_value(&p), lhs, rhs, equal })
                    }));
                }
            }
        }
        Suite::Dilcher => {
            for n in 1..=config.n_max {
                for m in 1..=config.m_max {
                    for trial in trials.clone() {
                        let params = Params { n: Some(n), m: Some(m), ..Params::default() };
                        jobs.push(Job::new(suite, "methods", params, Some(trial), move |cfg, ev| {
                            let p = sample_qpoint(cfg, trial)?;
                            let w = (ev.dilcher)(n, m, &p, DilcherMethod::WExtraction)?;
                            let nested = (ev.dilcher)(n, m, &p, DilcherMethod::NestedSum)?;
                            Ok(Outcome::compare(point_value(&p), w, nested))
                        }));
                    }
                }
            }
        }
        Suite::ProductLemma => {
            let cap = config.m_max;
            let fixed = PRODUCT_LEMMA_XS.iter().map(|&(a, b)| (None, Some(Rational::frac(a, b))));
            let sampled = trials.clone().map(|t| (Some(t), None));
            for (trial, fixed_x) in fixed.chain(sampled) {
                let pick_x = move |cfg: &SampleConfig| -> Result<Rational> {
                    match (&fixed_x, trial) {
                        (Some(x), _) => Ok(x.clone()),
                        (None, Some(t)) => Ok(sample_qpoint(cfg, t)?.x().clone()),
                        (None, None) => unreachable!(),
                    }
                };
                let pick = pick_x.clone();
                let params = Params { order: Some(q_order), w_cap: Some(cap), ..Params::default() };
                jobs.push(Job::new(suite, "sides", params, trial, move |cfg, ev| {
                    let x = pick(cfg)?;
                    let lhs = (ev.product_expansion)(Side::Lhs, cap, cfg.order, &x)?;
                    let rhs = (ev.product_expansion)(Side::Rhs, cap, cfg.order, &x)?;
                    let ser = |p: &WPoly| p.coeffs().iter().map(|s| SideValue::Series(s.clone())).collect::<Vec<_>>();
                    Ok(Outcome::compare(json!({ "x": x }), ser(&lhs), ser(&rhs)))
                }));
                let params = Params { order: Some(q_order), w_cap: Some(2), ..Params::default() };
                jobs.push(Job::new(suite, "w2_chain", params, trial, move |cfg, ev| {
                    let x = pick_x(cfg)?;
                    let lhs = (ev.product_expansion)(Side::Lhs, 2, cfg.order, &x)?;
                    let rhs = (ev.product_expansion)(Side::Rhs, 2, cfg.order, &x)?;
                    let target = lhs.coefficient_of_w(2)?.clone();
                    let mut chain = (ev.w2_chain)(cfg.order, &x)?;
                    chain.push(rhs.coefficient_of_w(2)?.clone());
                    let expected = vec![SideValue::Series(target); chain.len()];
                    let got: Vec<SideValue> = chain.into_iter().map(SideValue::Series).collect();
                    Ok(Outcome::compare(json!({ "x": x }), expected, got))
                }));
            }
        }
        Suite::Telescoping => {
            let n = config.n_max;
            for upper in 1..=n {
                for trial in trials.clone() {
                    let params = Params { n: Some(n), m: Some(upper), ..Params::default() };
                    for (check, generating) in [("cleared", false), ("generating", true)] {
                        jobs.push(Job::new(suite, check, params.clone(), Some(trial), move |cfg, ev| {
                            let (a, x, w) = sample_telescoping(cfg, trial, n)?;
                            let f = if generating { ev.telescoping_generating } else { ev.telescoping };
                            let (lhs, rhs) = f(&a, &x, &w, upper)?;
                            Ok(Outcome::compare(json!({ "a": a, "x": x, "w": w }), lhs, rhs))
                        }));
                    }
                }
            }
        }
        Suite::Cauchy => {
            for trial in trials.clone() {
                for (check, fixed_z) in [("sampled", None), ("z_zero", Some(0)), ("z_one", Some(1))] {
                    let params = Params { order: Some(q_order), ..Params::default() };
                    jobs.push(Job::new(suite, check, params, Some(trial), move |cfg, ev| {
                        let p = sample_qpoint(cfg, trial)?;
                        let z = fixed_z.map(Rational::from).unwrap_or_else(|| p.t().clone());
                        let lhs = (ev.cauchy)(Side::Lhs, &z, p.x(), cfg.order)?;
                        let rhs = (ev.cauchy)(Side::Rhs, &z, p.x(), cfg.order)?;
                        let point = json!({ "z": z, "x": p.x() });
                        Ok(Outcome::compare(point, SideValue::Series(lhs), SideValue::Series(rhs)))
                    }));
                }
            }
        }
        Suite::QriceConsistency => {
            for n in 1..=config.n_max {
                for trial in trials.clone() {
                    let params = Params { n: Some(n), ..Params::default() };
                    jobs.push(Job::new(suite, "unit_function", params.clone(), Some(trial), move |cfg, ev| {
                        let p = sample_qpoint(cfg, trial)?;
                        let one = |_: &Rational| Ok(Rational::one());
                        let from_one: Rational = (ev.rice_terms)(&one, n, p.q(), 1)?.into_iter().sum();
                        let from_zero: Rational = (ev.rice_terms)(&one, n, p.q(), 0)?.into_iter().sum();
                        Ok(Outcome::compare(
                            point_value(&p),
                            vec![from_one, from_zero],
                            vec![Rational::one(), Rational::zero()],
                        ))
                    }));
                    jobs.push(Job::new(suite, "product_rewrite", params.clone(), Some(trial), move |cfg, _| {
                        let p = sample_qpoint(cfg, trial)?;
                        let (q, x) = (p.q(), p.x());
                        let mut lhs = Vec::new();
                        let mut rhs = Vec::new();
                        for i in 0..=n {
                            lhs.push(cauchy_polynomial(&q.pow(-(i as i64))?, x, q, n)?);
                            rhs.push(rising_product_rewrite(x, q, i)?);
                        }
                        Ok(Outcome::compare(point_value(&p), lhs, rhs))
                    }));
                    for m in 1..=config.m_max {
                        let params = Params { n: Some(n), m: Some(m), ..Params::default() };
                        jobs.push(Job::new(
                            suite,
                            "identity1_summands",
                            params.clone(),
                            Some(trial),
                            move |cfg, ev| {
                                let p = sample_qpoint(cfg, trial)?;
                                let f = identity1_rice_function(n, m, &p);
                                let lhs = (ev.rice_terms)(&f, n, p.q(), 1)?;
                                let rhs = identity1_lhs_terms(n, m, p.q(), p.x())?;
                                Ok(Outcome::compare(point_value(&p), lhs, rhs))
                            },
                        ));
                        jobs.push(Job::new(suite, "identity1_residue", params, Some(trial), move |cfg, ev| {
                            let p = sample_qpoint(cfg, trial)?;
                            let lhs = (ev.identity1_residue)(n, m, &p)?;
                            let rhs = (ev.identity1)(Side::Lhs, n, m, &p, EvalMode::Exact)?;
                            Ok(Outcome::compare(point_value(&p), SideValue::Exact(lhs), rhs))
                        }));
                    }
                    jobs.push(Job::new(suite, "identity2_summands", params.clone(), Some(trial), move |cfg, ev| {
                        let p = sample_qpoint(cfg, trial)?;
                        let f = identity2_rice_function(n, &p);
                        let lhs = (ev.rice_terms)(&f, n, p.q(), 0)?;
                        let rhs = identity2_lhs_terms(n, p.q(), p.x(), p.t())?;
                        Ok(Outcome::compare(point_value(&p), lhs, rhs))
                    }));
                    jobs.push(Job::new(suite, "identity2_residue", params, Some(trial), move |cfg, ev| {
                        let p = sample_qpoint(cfg, trial)?;
                        let residue = (ev.identity2_residue)(n, &p)?;
                        let lhs = (ev.identity2)(Side::Lhs, n, &p, EvalMode::Exact)?;
                        let rhs = (ev.identity2)(Side::Rhs, n, &p, EvalMode::Exact)?;
                        let ours = SideValue::Exact(residue);
                        Ok(Outcome::compare(point_value(&p), vec![ours.clone(), ours], vec![lhs, rhs]))
                    }));
                }
            }
        }
        Suite::CrossMode => {
            for n in 1..=config.n_max {
                for m in 1..=config.m_max {
                    for trial in trials.clone() {
                        let params = Params { n: Some(n), m: Some(m), order: Some(q_order), ..Params::default() };
                        for (check, truncated) in [("w_extraction", false), ("w_extraction_truncated", true)] {
                            jobs.push(Job::new(suite, check, params.clone(), Some(trial), move |cfg, ev| {
                                let p = sample_qpoint(cfg, trial)?;
                                let f = if truncated { ev.w_extraction_truncated } else { ev.w_extraction };
                                let lhs = SideValue::Series(f(n, m, p.x(), cfg.order)?);
                                let rhs = (ev.identity1)(Side::Lhs, n, m, &p, EvalMode::QSeries(cfg.order))?;
                                Ok(Outcome::compare(json!({ "x": p.x() }), lhs, rhs))
                            }));
                        }
                    }
                }
            }
        }
    }
    jobs
}

/// Generic `a_1..a_n`, `x` and `w` for the telescoping identity, with
/// `w a_h != 1`.
fn sample_telescoping(config: &SampleConfig, trial: usize, n: usize) -> Result<(Vec<Rational>, Rational, Rational)> {
    let mut rng = trial_rng(config.seed, trial, 1);
    let bound = config.denominator_bound;
    for _ in 0..REJECTION_BUDGET {
        let a: Vec<Rational> = (0..n).map(|_| sample_rational(&mut rng, bound)).collect();
        let x = sample_rational(&mut rng, bound);
        let w = sample_rational(&mut rng, bound);
        if a.iter().all(|ah| !(&w * ah).is_one()) {
            return Ok((a, x, w));
        }
    }
    Err(Error::Sampling { attempts: REJECTION_BUDGET })
}

fn execute(jobs: &[Job], config: &SampleConfig, eval: &Evaluators, exec: Execution) -> Vec<CheckResult> {
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(|j| j.execute(config, eval)).collect()
        }
        _ => jobs.iter().map(|j| j.execute(config, eval)).collect(),
    }
}

/// Runs the selected suites with explicit evaluators and execution strategy.
pub fn run_suites_with(which: &[Suite], config: &SampleConfig, eval: &Evaluators, exec: Execution) -> Result<Report> {
    config.validate()?;
    let mut suites: Vec<Suite> = Vec::new();
    for s in which.iter().flat_map(|s| s.expand(config.mode)) {
        if !suites.contains(&s) {
            suites.push(s);
        }
    }
    let jobs: Vec<Job> = suites.iter().flat_map(|s| jobs_for(*s, config)).collect();
    let results = execute(&jobs, config, eval, exec);
    Ok(Report::assemble(config, suites, results))
}

pub fn run_suite(which: Suite, config: &SampleConfig) -> Result<Report> {
    run_suites_with(&[which], config, &Evaluators::default(), Execution::Parallel)
}

pub fn run_suite_sequential(which: Suite, config: &SampleConfig) -> Result<Report> {
    run_suites_with(&[which], config, &Evaluators::default(), Execution::Sequential)
}
