//! Slowdown and speedup extensions of submultiplicative functions and the
//! family of pairwise incomparable functions built from them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pwl::{check_submultiplicative, PwlError, PwlFunction};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubmultError {
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error("slope {eps} must lie strictly between 0 and {eps0}")]
    SlopeOutOfRange { eps: Rational, eps0: Rational },
    #[error("target {target} must exceed the current domain end {end}")]
    TargetNotBeyondEnd { target: Rational, end: Rational },
    #[error("growth budget must be positive, got {0}")]
    NonPositiveBudget(Rational),
    #[error("speedup needs S(n0) >= 2, got {0}")]
    ValueBelowTwo(Rational),
    #[error("family needs at least 2 members, got {0}")]
    TooFewMembers(usize),
    #[error("request {served} of {total} (A = {subset:?}, N = {bound}) needs breakpoints above the {limit}-bit budget ({bits} bits reached)")]
    BudgetExceeded {
        served: usize,
        total: usize,
        subset: Vec<usize>,
        bound: u64,
        bits: u64,
        limit: u64,
    },
    #[error("witness check failed for A = {subset:?}, N = {bound}: {reason}")]
    WitnessFailed { subset: Vec<usize>, bound: u64, reason: String },
    #[error("io: {0}")]
    Io(String),
}

/// `min(c / n0, S(n0) / n0^2)` where `c` is the final slope.
pub fn slowdown_epsilon0(f: &PwlFunction) -> Result<Rational, SubmultError> {
    f.validate()?;
    Ok(epsilon0_unchecked(f))
}

fn epsilon0_unchecked(f: &PwlFunction) -> Rational {
    let n0 = f.domain_end();
    let a = f.final_slope() / n0;
    let b = f.value_at_end() / &(n0 * n0);
    a.min(b)
}

/// Appends one segment of slope `eps` from `n0` to `n0^2`.
pub fn extend_slow(f: &PwlFunction, eps: &Rational) -> Result<PwlFunction, SubmultError> {
    let eps0 = slowdown_epsilon0(f)?;
    if !eps.is_positive() || *eps >= eps0 {
        return Err(SubmultError::SlopeOutOfRange { eps: eps.clone(), eps0 });
    }
    let n0 = f.domain_end().clone();
    Ok(append_segment(f, &(&n0 * &n0), eps))
}

fn append_segment(f: &PwlFunction, to: &Rational, slope: &Rational) -> PwlFunction {
    let mut g = f.clone();
    let y = g.value_at_end() + slope * &(to - g.domain_end());
    g.push_segment(to.clone(), y, slope.clone());
    g
}

/// One squaring step of [`extend_slow_to`].
#[derive(Debug, Clone, Serialize)]
pub struct SlowStep {
    pub from: Rational,
    pub to: Rational,
    pub slope: Rational,
    pub growth: Rational,
}

#[derive(Debug, Clone)]
pub struct SlowExtension {
    pub function: PwlFunction,
    pub steps: Vec<SlowStep>,
}

impl SlowExtension {
    pub fn total_growth(&self) -> Rational {
        self.steps.iter().map(|s| &s.growth).sum()
    }
}

/// Extends to `[1, target]` with total growth strictly below `eps`.
///
/// Step `k` (from 1) runs from `n` to `min(n^2, target)` with slope
/// `min(eps0_k / 2, (eps / 2^k) / len)`, `len` being the segment length.
/// When the `eps0_k / 2` cap binds on operands above a few hundred bits,
/// the step's growth is rounded down to a 62-bit dyadic so breakpoint values
/// stay short; the slope then sits just below the cap.
pub fn extend_slow_to(f: &PwlFunction, target: &Rational, eps: &Rational) -> Result<SlowExtension, SubmultError> {
    f.validate()?;
    if target <= f.domain_end() {
        return Err(SubmultError::TargetNotBeyondEnd { target: target.clone(), end: f.domain_end().clone() });
    }
    if !eps.is_positive() {
        return Err(SubmultError::NonPositiveBudget(eps.clone()));
    }
    let two = Rational::from_int(2);
    let mut g = f.clone();
    let mut steps = Vec::new();
    let mut budget = eps / &two;
    loop {
        let n = g.domain_end().clone();
        let square = &n * &n;
        let to = if square < *target { square } else { target.clone() };
        let len = &to - &n;
        let cap = HalfCap::new(&g);
        let by_budget = &budget / &len;
        let (slope, growth) = if cap.admits(&by_budget) { (by_budget, budget.clone()) } else { capped_step(&cap, &len) };
        let y = g.value_at_end() + &growth;
        g.push_segment(to.clone(), y, slope.clone());
        steps.push(SlowStep { from: n, to: to.clone(), slope, growth });
        if to == *target {
            break;
        }
        budget = budget / &two;
    }
    Ok(SlowExtension { function: g, steps })
}

const EXACT_STEP_BITS: u64 = 512;

/// Above this estimated size the cap is only formed when magnitudes cannot
/// settle a comparison.
const LAZY_CAP_BITS: u64 = 4096;

/// `log2_abs` is off by at most a few ulp of the exponent, far below this.
const LOG2_SLACK: f64 = 1e-6;

/// `epsilon0 / 2` of a function.
struct HalfCap<'a> {
    f: &'a PwlFunction,
    log2: f64,
    size: u64,
    exact: std::cell::OnceCell<Rational>,
}

impl<'a> HalfCap<'a> {
    fn new(f: &'a PwlFunction) -> Self {
        let (n, s, v) = (f.domain_end(), f.final_slope(), f.value_at_end());
        let ln = n.log2_abs();
        let log2 = (s.log2_abs() - ln).min(v.log2_abs() - 2.0 * ln) - 1.0;
        let size = (s.bits() + n.bits()).max(v.bits() + 2 * n.bits()) + 2;
        let cap = HalfCap { f, log2, size, exact: std::cell::OnceCell::new() };
        if size <= LAZY_CAP_BITS {
            cap.exact();
        }
        cap
    }

    fn exact(&self) -> &Rational {
        self.exact.get_or_init(|| epsilon0_unchecked(self.f) / &Rational::from_int(2))
    }

    fn bits(&self) -> u64 {
        self.exact.get().map_or(self.size, Rational::bits)
    }

    fn log2(&self) -> f64 {
        self.exact.get().map_or(self.log2, Rational::log2_abs)
    }

    /// Whether `x <= cap`.
    fn admits(&self, x: &Rational) -> bool {
        if let Some(c) = self.exact.get() {
            return x <= c;
        }
        let lx = x.log2_abs();
        if lx < self.log2 - LOG2_SLACK {
            true
        } else if lx > self.log2 + LOG2_SLACK {
            false
        } else {
            x <= self.exact()
        }
    }
}

/// Slope at most `cap` over a segment of length `len`, with its growth.
fn capped_step(cap: &HalfCap, len: &Rational) -> (Rational, Rational) {
    if cap.bits() + len.bits() <= EXACT_STEP_BITS {
        let c = cap.exact();
        return (c.clone(), c * len);
    }
    let l = cap.log2() + len.log2_abs();
    let e = 62 - l.ceil() as i64;
    let mut m = ((l + e as f64).exp2() * (1.0 - 1e-6)).floor() as i64;
    loop {
        let growth = Rational::from_int(m) * Rational::pow2(-e);
        let slope = &growth / len;
        if cap.admits(&slope) {
            return (slope, growth);
        }
        m /= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastBranch {
    /// The slope segment already reached `3K/2` at `2 n1`; stopped there.
    EarlyStop,
    /// Continued to the abscissa where the value is exactly `3K/2`.
    ExactTarget,
}

#[derive(Debug, Clone)]
pub struct FastExtension {
    pub function: PwlFunction,
    pub branch: FastBranch,
    /// `S(n0)` of the input.
    pub k: Rational,
    /// `n0^2`.
    pub n1: Rational,
    /// Slope of the final segment.
    pub eps: Rational,
    /// Whether `K / eps >= N0` holds on the output.
    pub guard_holds: bool,
}

/// Extends so that the final value is at least `3K/2`, `K = S(n0)`.
pub fn extend_fast(f: &PwlFunction) -> Result<FastExtension, SubmultError> {
    f.validate()?;
    extend_fast_unchecked(f)
}

fn extend_fast_unchecked(f: &PwlFunction) -> Result<FastExtension, SubmultError> {
    let k = f.value_at_end().clone();
    let two = Rational::from_int(2);
    if k < two {
        return Err(SubmultError::ValueBelowTwo(k));
    }
    let n0 = f.domain_end();
    let n1 = n0 * n0;
    let (first, growth) = capped_step(&HalfCap::new(f), &(&n1 - n0));
    let mut g = f.clone();
    g.push_segment(n1, &k + &growth, first);
    let n1 = g.domain_end().clone();
    let s1 = g.value_at_end().clone();
    let eps = epsilon0_unchecked(&g) / &two;
    let target = &k * &Rational::new(3, 2);

    let at_double = &s1 + &(&eps * &n1);
    let (function, branch) = if at_double >= target {
        let mut h = g;
        h.push_segment(&n1 * &two, at_double, eps.clone());
        (h, FastBranch::EarlyStop)
    } else {
        let n0 = &n1 + &((&target - &s1) / &eps);
        let mut h = g;
        h.push_segment(n0, target, eps.clone());
        (h, FastBranch::ExactTarget)
    };
    let guard_holds = &k / &eps >= *function.domain_end();
    Ok(FastExtension { function, branch, k, n1, eps, guard_holds })
}

#[derive(Debug, Clone)]
pub struct FastToExtension {
    pub function: PwlFunction,
    pub branches: Vec<FastBranch>,
}

impl FastToExtension {
    pub fn iterations(&self) -> usize {
        self.branches.len()
    }
}

/// Upper bound `ceil(log_{3/2}(M/K)) + 1` on the iterations of
/// [`extend_fast_to`], computed exactly.
pub fn fast_iteration_bound(k: &Rational, m: &Rational) -> usize {
    let growth = Rational::new(3, 2);
    let mut t = 0;
    let mut v = k.clone();
    while v < *m {
        v *= &growth;
        t += 1;
    }
    t + 1
}

/// Repeats [`extend_fast`] until the final value exceeds `m`.
pub fn extend_fast_to(f: &PwlFunction, m: &Rational) -> Result<FastToExtension, SubmultError> {
    extend_fast_to_within(f, m, None).map_err(|e| match e {
        FastToError::Submult(e) => e,
        FastToError::Budget { .. } => unreachable!("no budget given"),
    })
}

#[derive(Debug)]
pub enum FastToError {
    Submult(SubmultError),
    Budget { bits: u64 },
}

/// [`extend_fast_to`] that gives up once a breakpoint needs more than
/// `max_bits` bits.
pub fn extend_fast_to_within(
    f: &PwlFunction,
    m: &Rational,
    max_bits: Option<u64>,
) -> Result<FastToExtension, FastToError> {
    f.validate().map_err(|e| FastToError::Submult(e.into()))?;
    let mut g = f.clone();
    let mut branches = Vec::new();
    while g.value_at_end() <= m {
        let step = extend_fast_unchecked(&g).map_err(FastToError::Submult)?;
        g = step.function;
        branches.push(step.branch);
        if let Some(limit) = max_bits {
            let bits = g.max_bits();
            if bits > limit {
                return Err(FastToError::Budget { bits });
            }
        }
    }
    Ok(FastToExtension { function: g, branches })
}

/// One served request of the family construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServedRequest {
    /// The slow set `A`, 1-based member indices.
    #[serde(rename = "A")]
    pub subset: Vec<usize>,
    #[serde(rename = "N")]
    pub bound: u64,
    /// Integer abscissa where every `j` outside `A` beats `N * max_A S_i`.
    pub witness_n: Rational,
    /// `min_{j not in A} S_j(n) / max_{i in A} S_i(n)` at the witness.
    pub ratio: Rational,
    /// False when the condition already held at the previous domain end.
    pub extended: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct FamilyConfig {
    pub members: usize,
    pub request_bound: u64,
    /// Abort once any breakpoint needs more bits than this.
    pub max_bits: Option<u64>,
    /// Run the submultiplicativity checker on every member after each request.
    pub verify_each_request: bool,
}

impl FamilyConfig {
    pub fn new(members: usize, request_bound: u64) -> Self {
        FamilyConfig { members, request_bound, max_bits: Some(1 << 24), verify_each_request: false }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyState {
    functions: Vec<PwlFunction>,
    request_log: Vec<ServedRequest>,
}

/// All `(A, N)` with `A` a nonempty proper subset of `{1..m}` and
/// `1 <= N <= request_bound`, ordered by `N`, then `|A|`, then
/// lexicographically.
pub fn enumerate_requests(m: usize, request_bound: u64) -> Vec<(Vec<usize>, u64)> {
    let mut subsets: Vec<Vec<usize>> = (1u64..(1u64 << m) - 1)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect())
        .collect();
    subsets.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    (1..=request_bound)
        .flat_map(|n| subsets.iter().map(move |a| (a.clone(), n)))
        .collect()
}

pub fn build_incomparable_family(m: usize, request_bound: u64) -> Result<FamilyState, SubmultError> {
    build_incomparable_family_with(FamilyConfig::new(m, request_bound))
}

pub fn build_incomparable_family_with(config: FamilyConfig) -> Result<FamilyState, SubmultError> {
    if config.members < 2 {
        return Err(SubmultError::TooFewMembers(config.members));
    }
    let mut state = FamilyState {
        functions: vec![PwlFunction::identity(); config.members],
        request_log: Vec::new(),
    };
    let requests = enumerate_requests(config.members, config.request_bound);
    let total = requests.len();
    for (served, (subset, bound)) in requests.into_iter().enumerate() {
        state
            .serve(&subset, bound, config.max_bits)
            .map_err(|e| match e {
                FastToError::Submult(e) => e,
                FastToError::Budget { bits } => SubmultError::BudgetExceeded {
                    served,
                    total,
                    subset: subset.clone(),
                    bound,
                    bits,
                    limit: config.max_bits.unwrap_or(u64::MAX),
                },
            })?;
        if config.verify_each_request {
            for (i, f) in state.functions.iter().enumerate() {
                let report = check_submultiplicative(f);
                if !report.is_ok() {
                    return Err(SubmultError::WitnessFailed {
                        subset,
                        bound,
                        reason: format!("S_{} fails submultiplicativity at {:?}", i + 1, report.violations[0]),
                    });
                }
            }
        }
    }
    Ok(state)
}

impl FamilyState {
    pub fn functions(&self) -> &[PwlFunction] {
        &self.functions
    }

    /// Member `i`, 1-based.
    pub fn member(&self, i: usize) -> &PwlFunction {
        &self.functions[i - 1]
    }

    pub fn request_log(&self) -> &[ServedRequest] {
        &self.request_log
    }

    pub fn domain_end(&self) -> &Rational {
        self.functions[0].domain_end()
    }

    /// `max_{i in set} S_i(n)`.
    pub fn max_over(&self, set: &[usize], n: &Rational) -> Result<Rational, SubmultError> {
        let mut best: Option<Rational> = None;
        for &i in set {
            let v = self.member(i).eval(n)?;
            best = Some(match best {
                Some(b) => b.max(v),
                None => v,
            });
        }
        Ok(best.expect("nonempty set"))
    }

    /// `min_{j not in A} S_j(n) / max_{i in A} S_i(n)`.
    pub fn ratio_at(&self, subset: &[usize], n: &Rational) -> Result<Rational, SubmultError> {
        let denom = self.max_over(subset, n)?;
        let mut best: Option<Rational> = None;
        for j in 1..=self.functions.len() {
            if subset.contains(&j) {
                continue;
            }
            let v = self.member(j).eval(n)?;
            best = Some(match best {
                Some(b) => b.min(v),
                None => v,
            });
        }
        Ok(best.expect("proper subset") / denom)
    }

    /// First logged request matching `(A, N)`.
    pub fn witness_for(&self, subset: &[usize], bound: u64) -> Option<&ServedRequest> {
        self.request_log.iter().find(|r| r.subset == subset && r.bound == bound)
    }

    fn serve(&mut self, subset: &[usize], bound: u64, max_bits: Option<u64>) -> Result<(), FastToError> {
        let sub = |e: SubmultError| FastToError::Submult(e);
        let n0 = self.domain_end().clone();
        let ratio = self.ratio_at(subset, &n0).map_err(sub)?;
        let n_big = Rational::from(bound);
        if ratio > n_big {
            self.request_log.push(ServedRequest {
                subset: subset.to_vec(),
                bound,
                witness_n: n0,
                ratio,
                extended: false,
            });
            return Ok(());
        }

        let slow_max = self.max_over(subset, &n0).map_err(sub)?;
        let target_value = &n_big * &(slow_max + Rational::one());
        let m = self.functions.len();
        let mut fast: Vec<Option<PwlFunction>> = vec![None; m];
        for (j, slot) in fast.iter_mut().enumerate() {
            if !subset.contains(&(j + 1)) {
                *slot = Some(extend_fast_to_within(&self.functions[j], &target_value, max_bits)?.function);
            }
        }
        let far = fast
            .iter()
            .flatten()
            .map(|f| f.domain_end().clone())
            .max()
            .expect("proper subset leaves a fast member");
        let end = far.ceil();
        let one = Rational::one();
        for (j, f) in self.functions.iter_mut().enumerate() {
            let base = fast[j].take().unwrap_or_else(|| f.clone());
            *f = if base.domain_end() < &end {
                extend_slow_to(&base, &end, &one).map_err(sub)?.function
            } else {
                base
            };
        }
        let ratio = self.ratio_at(subset, &end).map_err(sub)?;
        if ratio <= n_big {
            return Err(sub(SubmultError::WitnessFailed {
                subset: subset.to_vec(),
                bound,
                reason: format!("ratio {ratio:?} at {end:?} does not exceed N"),
            }));
        }
        self.request_log.push(ServedRequest { subset: subset.to_vec(), bound, witness_n: end, ratio, extended: true });
        Ok(())
    }

    /// Re-evaluates every logged witness from scratch.
    pub fn verify_log(&self) -> Result<(), SubmultError> {
        for r in &self.request_log {
            let fail = |reason: String| SubmultError::WitnessFailed { subset: r.subset.clone(), bound: r.bound, reason };
            if !r.witness_n.is_integer() {
                return Err(fail("witness is not an integer".into()));
            }
            let ratio = self.ratio_at(&r.subset, &r.witness_n)?;
            if ratio != r.ratio {
                return Err(fail("logged ratio differs from recomputed ratio".into()));
            }
            if ratio <= Rational::from(r.bound) {
                return Err(fail(format!("ratio {ratio:?} does not exceed N")));
            }
        }
        Ok(())
    }

    /// Writes `S_<i>.csv` per member and `requests.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<(), SubmultError> {
        let io = |e: std::io::Error| SubmultError::Io(e.to_string());
        fs::create_dir_all(dir).map_err(io)?;
        for (i, f) in self.functions.iter().enumerate() {
            let file = fs::File::create(dir.join(format!("S_{}.csv", i + 1))).map_err(io)?;
            f.write_csv(std::io::BufWriter::new(file))?;
        }
        let log = serde_json::to_string_pretty(&self.request_log).map_err(|e| SubmultError::Io(e.to_string()))?;
        fs::write(dir.join("requests.json"), log).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn f124() -> PwlFunction {
        PwlFunction::new(vec![q(1, 1), q(2, 1), q(4, 1)], vec![q(1, 1), q(2, 1), q(5, 2)]).unwrap()
    }

    #[test]
    fn epsilon0_examples() {
        assert_eq!(slowdown_epsilon0(&PwlFunction::identity()).unwrap(), q(1, 2));
        assert_eq!(slowdown_epsilon0(&f124()).unwrap(), q(1, 16));
    }

    #[test]
    fn extend_slow_examples() {
        let g = extend_slow(&PwlFunction::identity(), &q(1, 4)).unwrap();
        assert_eq!(g, f124());
        assert!(matches!(
            extend_slow(&PwlFunction::identity(), &q(1, 2)),
            Err(SubmultError::SlopeOutOfRange { .. })
        ));
        assert!(extend_slow(&PwlFunction::identity(), &Rational::zero()).is_err());
    }

    #[test]
    fn extend_slow_to_sixteen() {
        let ext = extend_slow_to(&PwlFunction::identity(), &q(16, 1), &q(1, 1)).unwrap();
        let f = &ext.function;
        // step 1: slope min(1/4, (1/2)/2) = 1/4 on [2,4]
        // step 2: eps0 = min((1/4)/4, (5/2)/16) = 1/16, slope min(1/32, (1/4)/12) = 1/48 on [4,16]
        assert_eq!(f.breakpoints(), &[q(1, 1), q(2, 1), q(4, 1), q(16, 1)]);
        assert_eq!(f.values(), &[q(1, 1), q(2, 1), q(5, 2), q(11, 4)]);
        assert!(f.value_at_end() < &q(3, 1));
        assert_eq!(ext.total_growth(), q(3, 4));
        assert!(check_submultiplicative(f).is_ok());
    }

    #[test]
    fn extend_slow_to_rejects_short_target() {
        let err = extend_slow_to(&PwlFunction::identity(), &q(2, 1), &q(1, 1)).unwrap_err();
        assert!(matches!(err, SubmultError::TargetNotBeyondEnd { .. }));
    }

    #[test]
    fn extend_fast_from_identity() {
        let ext = extend_fast(&PwlFunction::identity()).unwrap();
        assert_eq!(ext.function.breakpoints(), &[q(1, 1), q(2, 1), q(4, 1), q(20, 1)]);
        assert_eq!(ext.function.values(), &[q(1, 1), q(2, 1), q(5, 2), q(3, 1)]);
        assert_eq!(ext.branch, FastBranch::ExactTarget);
        assert_eq!(ext.eps, q(1, 32));
        assert!(ext.guard_holds);
        assert!(check_submultiplicative(&ext.function).is_ok());
    }

    #[test]
    fn extend_fast_needs_value_two() {
        let f = PwlFunction::new(vec![q(1, 1), q(3, 2), q(2, 1)], vec![q(1, 1), q(3, 2), q(7, 4)]).unwrap();
        assert!(matches!(extend_fast(&f), Err(SubmultError::ValueBelowTwo(_))));
    }

    #[test]
    fn extend_fast_to_examples() {
        let one = extend_fast_to(&PwlFunction::identity(), &q(2, 1)).unwrap();
        assert_eq!(one.iterations(), 1);
        assert_eq!(one.function.value_at_end(), &q(3, 1));
        assert_eq!(fast_iteration_bound(&q(2, 1), &q(100, 1)), 11);
        let big = extend_fast_to(&PwlFunction::identity(), &q(10, 1)).unwrap();
        assert!(big.function.value_at_end() > &q(10, 1));
        assert!(big.iterations() <= fast_iteration_bound(&q(2, 1), &q(10, 1)));
    }

    #[test]
    fn request_order() {
        let r = enumerate_requests(3, 2);
        let firsts: Vec<_> = r.iter().take(6).map(|(a, _)| a.clone()).collect();
        assert_eq!(firsts, vec![vec![1], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(r.len(), 12);
        assert!(r[..6].iter().all(|(_, n)| *n == 1));
        assert!(r[6..].iter().all(|(_, n)| *n == 2));
    }

    #[test]
    fn two_member_family() {
        let fam = build_incomparable_family_with(FamilyConfig {
            verify_each_request: true,
            ..FamilyConfig::new(2, 1)
        })
        .unwrap();
        assert_eq!(fam.request_log().len(), 2);
        fam.verify_log().unwrap();
        let w1 = fam.witness_for(&[1], 1).unwrap();
        let w2 = fam.witness_for(&[2], 1).unwrap();
        assert!(fam.member(2).eval(&w1.witness_n).unwrap() > fam.member(1).eval(&w1.witness_n).unwrap());
        assert!(fam.member(1).eval(&w2.witness_n).unwrap() > fam.member(2).eval(&w2.witness_n).unwrap());
        assert!(fam.functions().iter().all(|f| f.domain_end() == fam.domain_end() && f.is_normalized()));
    }

    #[test]
    fn too_few_members() {
        assert!(matches!(build_incomparable_family(1, 1), Err(SubmultError::TooFewMembers(1))));
    }

    #[test]
    fn budget_is_reported() {
        let err = build_incomparable_family_with(FamilyConfig { max_bits: Some(64), ..FamilyConfig::new(3, 1) })
            .unwrap_err();
        assert!(matches!(err, SubmultError::BudgetExceeded { total: 6, .. }));
    }
}
