//! Symmetric sequence norms and their combinators, domination estimates,
//! and the classification of l_p-sums of such norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domination::{Bound, DominationMatrix, Relation};
use crate::encoder::EncoderState;
use crate::lorentz::{weights_from_fundamental, LorentzError, WeightSeq};
use crate::orlicz::{ones_sign_witnesses, pointwise_compare, OrliczError, OrliczFunction};
use crate::pwl::PwlFunction;
use crate::rational::Rational;

/// Equivalence constant between the max of two spreading-model norms and a
/// spreading model realizing it; carried as metadata only.
pub const MAX_COMBO_EQUIVALENCE: f64 = 2.0;

/// Tolerance on `sum c_j^p = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Default residual tolerance for Orlicz norms.
pub const LUXEMBURG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("exponent {0} must be at least 1")]
    BadExponent(f64),
    #[error("constants fail sum 1/C_n <= 1 (sum is {0})")]
    WeightCondition(f64),
    #[error("coefficients fail sum c^p = 1 (sum is {0})")]
    Normalization(f64),
    #[error("coefficient list has {got} entries, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("exponent list must increase strictly")]
    NotIncreasing,
    #[error("all coefficients vanish")]
    NoSupport,
    #[error("min-ones gives {min_ones:?}, join gives {join}")]
    Disagreement { min_ones: Option<usize>, join: usize },
    #[error(transparent)]
    Lorentz(#[from] LorentzError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymNorm {
    /// `(sum |a_i|^q)^(1/q)`.
    Lp(f64),
    Lorentz(WeightSeq),
    /// `d(w, p)` with `w(n) = S(n) - S(n-1)` read off a fundamental function.
    LorentzPwl { f: PwlFunction, p: Rational },
    Orlicz(OrliczFunction),
    Max(Vec<SymNorm>),
    /// `sum_n C_n^(-1) |a|_n`.
    WeightedSum { constants: Vec<f64>, norms: Vec<SymNorm> },
    /// `[sum_j c_j^p |a|_j^p + c0^p sum |a_i|^p]^(1/p)`.
    LpSum { c: Vec<f64>, norms: Vec<SymNorm>, p: f64, c0: f64 },
}

fn lp(a: &[f64], q: f64) -> f64 {
    let top = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return a.iter().map(|x| x.abs()).sum();
    }
    top * a.iter().map(|x| (x.abs() / top).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `(sum t_j^p)^(1/p)` scaled by the largest term, so that a single term
/// comes back unchanged.
fn lp_of_terms(terms: &[f64], p: f64) -> f64 {
    let top = terms.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    top * terms.iter().map(|t| (t / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

impl SymNorm {
    pub fn lp(q: f64) -> Result<SymNorm, CalculusError> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(CalculusError::BadExponent(q));
        }
        Ok(SymNorm::Lp(q))
    }

    pub fn eval(&self, a: &[f64]) -> Result<f64, CalculusError> {
        Ok(match self {
            SymNorm::Lp(q) => lp(a, *q),
            SymNorm::Lorentz(w) => w.lorentz_norm(a)?,
            SymNorm::LorentzPwl { f, p } => {
                let support = a.iter().filter(|x| **x != 0.0).count();
                if support == 0 {
                    return Ok(0.0);
                }
                weights_from_fundamental(f, support)?.with_exponent(p.clone())?.lorentz_norm(a)?
            }
            SymNorm::Orlicz(m) => {
                if a.iter().all(|x| *x == 0.0) {
                    return Ok(0.0);
                }
                m.luxemburg_norm(a, LUXEMBURG_TOL)?
            }
            SymNorm::Max(ns) => {
                let mut best = 0.0f64;
                for n in ns {
                    best = best.max(n.eval(a)?);
                }
                best
            }
            SymNorm::WeightedSum { constants, norms } => {
                let mut s = 0.0;
                for (c, n) in constants.iter().zip(norms) {
                    s += n.eval(a)? / c;
                }
                s
            }
            SymNorm::LpSum { c, norms, p, c0 } => {
                let mut terms = Vec::with_capacity(norms.len() + 1);
                for (cj, n) in c.iter().zip(norms) {
                    if *cj != 0.0 {
                        terms.push(cj * n.eval(a)?);
                    }
                }
                if *c0 != 0.0 {
                    terms.push(c0 * lp(a, *p));
                }
                lp_of_terms(&terms, *p)
            }
        })
    }

    /// `log2 |1^m|` for a block of `m` ones, where it can be computed
    /// without materializing the block.
    pub fn block_log2(&self, m: &Rational) -> Option<f64> {
        match self {
            SymNorm::Lp(q) => Some(m.log2_abs() / q),
            SymNorm::Lorentz(w) => {
                let n = m.to_u64()? as usize;
                Some(w.fundamental(n)?.log2_abs() / w.p().to_f64())
            }
            SymNorm::LorentzPwl { f, p } => {
                if !m.is_integer() || *m > *f.domain_end() || *m < Rational::one() {
                    return None;
                }
                Some(f.eval(m).ok()?.log2_abs() / p.to_f64())
            }
            SymNorm::Orlicz(_) => {
                let n = m.to_u64().filter(|&n| n <= 1 << 16)? as usize;
                Some(self.eval(&vec![1.0; n]).ok()?.log2())
            }
            SymNorm::Max(ns) => ns.iter().map(|n| n.block_log2(m)).try_fold(f64::NEG_INFINITY, |acc, x| Some(acc.max(x?))),
            SymNorm::WeightedSum { constants, norms } => {
                let logs: Option<Vec<f64>> =
                    constants.iter().zip(norms).map(|(c, n)| n.block_log2(m).map(|l| l - c.log2())).collect();
                Some(log2_sum_exp2(&logs?))
            }
            SymNorm::LpSum { c, norms, p, c0 } => {
                let mut logs = Vec::new();
                for (cj, n) in c.iter().zip(norms) {
                    if *cj != 0.0 {
                        logs.push(p * (cj.log2() + n.block_log2(m)?));
                    }
                }
                if *c0 != 0.0 {
                    logs.push(p * c0.log2() + m.log2_abs());
                }
                Some(log2_sum_exp2(&logs) / p)
            }
        }
    }
}

fn log2_sum_exp2(logs: &[f64]) -> f64 {
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2()
}

/// Pointwise maximum of the norms.
pub fn max_combo(norms: Vec<SymNorm>) -> SymNorm {
    SymNorm::Max(norms)
}

/// `W = sum_n C_n^(-1) |.|_n`, requiring `sum C_n^(-1) <= 1`; then
/// `|a|_n <= C_n W(a)` for every `n`.
pub fn weighted_sum_combo(constants: Vec<f64>, norms: Vec<SymNorm>) -> Result<SymNorm, CalculusError> {
    if constants.len() != norms.len() {
        return Err(CalculusError::Length { got: constants.len(), expected: norms.len() });
    }
    let s: f64 = constants.iter().map(|c| 1.0 / c).sum();
    if constants.iter().any(|c| !(*c > 0.0)) || s > 1.0 + NORMALIZATION_TOL {
        return Err(CalculusError::WeightCondition(s));
    }
    Ok(SymNorm::WeightedSum { constants, norms })
}

/// `R_A = sup_{alpha in A} |.|_alpha` over a finite subfamily.
pub fn sup_family_norm(norms: &[SymNorm], subset: &[usize]) -> SymNorm {
    SymNorm::Max(subset.iter().map(|&i| norms[i].clone()).collect())
}

/// `[sum c_j^p |.|_j^p + c0^p |.|_p^p]^(1/p)` with `sum c_j^p + c0^p = 1`.
pub fn lp_sum_combine(c: Vec<f64>, norms: Vec<SymNorm>, p: f64, c0: f64) -> Result<SymNorm, CalculusError> {
    if !(p >= 1.0) {
        return Err(CalculusError::BadExponent(p));
    }
    if c.len() != norms.len() {
        return Err(CalculusError::Length { got: c.len(), expected: norms.len() });
    }
    let s: f64 = c.iter().map(|x| x.powf(p)).sum::<f64>() + c0.powf(p);
    if c.iter().any(|x| *x < 0.0) || c0 < 0.0 || (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(CalculusError::Normalization(s));
    }
    Ok(SymNorm::LpSum { c, norms, p, c0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    /// Block length: the witness is `1^m / R_F(1^m)`.
    pub m: Rational,
    pub ratio: f64,
}

impl GapWitness {
    /// The normalized vector, when `m` is small enough to write out.
    pub fn vector(&self, norms: &[SymNorm], subset: &[usize]) -> Option<Vec<f64>> {
        let n = self.m.to_u64().filter(|&n| n <= 1 << 20)? as usize;
        let scale = sup_family_norm(norms, subset).eval(&vec![1.0; n]).ok()?;
        Some(vec![1.0 / scale; n])
    }
}

/// First `m` in `candidates` with `R_all(1^m) / R_F(1^m) > threshold`.
pub fn find_gap_witness_among<'a>(
    norms: &[SymNorm],
    subset: &[usize],
    threshold: f64,
    candidates: impl IntoIterator<Item = &'a Rational>,
) -> Option<GapWitness> {
    let all: Vec<usize> = (0..norms.len()).collect();
    let r_all = sup_family_norm(norms, &all);
    let r_f = sup_family_norm(norms, subset);
    let t = threshold.log2();
    for m in candidates {
        let (Some(a), Some(f)) = (r_all.block_log2(m), r_f.block_log2(m)) else { continue };
        if a - f > t {
            return Some(GapWitness { m: m.clone(), ratio: (a - f).exp2() });
        }
    }
    None
}

/// Searches blocks `1^m` for `m = 1..=horizon`.
pub fn find_gap_witness(norms: &[SymNorm], subset: &[usize], threshold: f64, horizon: u64) -> Option<GapWitness> {
    let ms: Vec<Rational> = (1..=horizon).map(Rational::from).collect();
    find_gap_witness_among(norms, subset, threshold, &ms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Length of block and geometric samples and of random vectors.
    pub len: usize,
    pub random_count: usize,
    pub seed: u64,
    /// Ratios above this count as divergence.
    pub cap: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { len: 64, random_count: 200, seed: 0, cap: 1e6 }
    }
}

/// Blocks `1^n` for `n <= len`, geometric `q^i` for `q` in `{1/2, 3/4}`,
/// then seeded random vectors with entries uniform in `[-1, 1]`.
pub fn sample_vectors(cfg: &SamplerConfig) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (1..=cfg.len).map(|n| vec![1.0; n]).collect();
    for q in [0.5f64, 0.75] {
        out.push((0..cfg.len).map(|i| q.powi(i as i32)).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_count {
        out.push((0..cfg.len).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Block { m: Rational, ratio: f64 },
    Breakpoint { k: Rational, ratio: f64 },
    Vector { v: Vec<f64>, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DominationEstimate {
    /// `|a|_lower <= C |a|_upper`; exact when decided analytically,
    /// otherwise the largest sampled ratio (a lower bound for the best C).
    Dominated { constant: Bound, exact: bool },
    NotDominated { witness: Witness },
}

impl DominationEstimate {
    pub fn is_dominated(&self) -> bool {
        matches!(self, DominationEstimate::Dominated { .. })
    }

    fn relation(&self, lower: usize, upper: usize) -> Relation {
        match self {
            DominationEstimate::Dominated { constant, .. } => Relation::dominated(lower, upper, constant.clone()),
            DominationEstimate::NotDominated { witness } => match witness {
                Witness::Block { m, ratio } => Relation::block_witness(lower, upper, m.clone(), Bound::Estimate(*ratio)),
                Witness::Breakpoint { k, ratio } => {
                    Relation::breakpoint_witness(lower, upper, k.clone(), Bound::Estimate(*ratio))
                }
                Witness::Vector { v, ratio } => Relation::vector_witness(lower, upper, v.clone(), Bound::Estimate(*ratio)),
            },
        }
    }
}

/// Whether `lower` is dominated by `upper`: `|a|_lower <= C |a|_upper`.
pub fn estimate_domination(lower: &SymNorm, upper: &SymNorm, cfg: &SamplerConfig) -> Result<DominationEstimate, CalculusError> {
    match (lower, upper) {
        (SymNorm::Lp(qa), SymNorm::Lp(qb)) => {
            if qa >= qb {
                return Ok(DominationEstimate::Dominated { constant: Bound::Exact(Rational::one()), exact: true });
            }
            // |1^m|_qa / |1^m|_qb = m^(1/qa - 1/qb)
            let e = 1.0 / qa - 1.0 / qb;
            let log_m = (cfg.cap.log2() / e).floor() + 1.0;
            let m = Rational::pow2(log_m as i64);
            return Ok(DominationEstimate::NotDominated {
                witness: Witness::Block { m, ratio: (e * log_m).exp2() },
            });
        }
        (SymNorm::Orlicz(ma), SymNorm::Orlicz(mb))
            if ma.params() == mb.params() && ma.pattern().horizon() == mb.pattern().horizon() =>
        {
            if pointwise_compare(ma, mb)?.is_le() {
                return Ok(DominationEstimate::Dominated { constant: Bound::Exact(Rational::one()), exact: true });
            }
            let (above, _) = ones_sign_witnesses(ma.pattern(), mb.pattern());
            let k = above.expect("not below somewhere");
            let gap = crate::orlicz::ratio_gap(ma, mb, &k)?;
            let ratio = (gap.to_f64() * ma.params().tau.log2_abs()).exp2();
            return Ok(DominationEstimate::NotDominated { witness: Witness::Breakpoint { k: Rational::from(&k), ratio } });
        }
        _ => {}
    }
    let mut best = 0.0f64;
    for v in sample_vectors(cfg) {
        let den = upper.eval(&v)?;
        let num = lower.eval(&v)?;
        let ratio = if den == 0.0 { f64::INFINITY } else { num / den };
        if ratio > cfg.cap {
            return Ok(DominationEstimate::NotDominated { witness: Witness::Vector { v, ratio } });
        }
        best = best.max(ratio);
    }
    Ok(DominationEstimate::Dominated { constant: Bound::Estimate(best), exact: false })
}

/// Pairwise estimates over labelled norms, computed in parallel and
/// stored in row-major order.
pub fn domination_matrix(nodes: &[(String, SymNorm)], cfg: &SamplerConfig) -> Result<DominationMatrix, CalculusError> {
    let n = nodes.len();
    let relations: Vec<Relation> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            estimate_domination(&nodes[i].1, &nodes[j].1, cfg).map(|e| e.relation(i, j))
        })
        .collect::<Result<_, _>>()?;
    Ok(DominationMatrix::new(nodes.iter().map(|(s, _)| s.clone()).collect(), relations).expect("complete"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpClass {
    pub index: usize,
    pub exponent: f64,
    /// `lower |a|_{p_beta} <= combined(a) <= upper |a|_{p_beta}`.
    pub lower: f64,
    pub upper: f64,
}

/// For the l_{p_0}-sum of `l_{p_beta}` (increasing `p_beta`) with
/// coefficients `c_beta`, the least supported index: the combined norm is
/// squeezed between `c_beta |.|_{p_beta}` and `|.|_{p_beta}` since
/// `|.|_q <= |.|_p` for `p <= q`.
pub fn classify_lp_sum(c: &[f64], p_list: &[f64]) -> Result<LpClass, CalculusError> {
    if c.len() != p_list.len() {
        return Err(CalculusError::Length { got: c.len(), expected: p_list.len() });
    }
    if p_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CalculusError::NotIncreasing);
    }
    let outer = *p_list.first().ok_or(CalculusError::NoSupport)?;
    let s: f64 = c.iter().map(|x| x.powf(outer)).sum();
    if (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(CalculusError::Normalization(s));
    }
    let index = c.iter().position(|x| *x != 0.0).ok_or(CalculusError::NoSupport)?;
    Ok(LpClass { index, exponent: p_list[index], lower: c[index], upper: 1.0 })
}

/// The l_{p_0}-sum norm of `classify_lp_sum` as a [`SymNorm`].
pub fn lp_sum_norm(c: &[f64], p_list: &[f64]) -> Result<SymNorm, CalculusError> {
    let norms = p_list.iter().map(|&q| SymNorm::lp(q)).collect::<Result<Vec<_>, _>>()?;
    lp_sum_combine(c.to_vec(), norms, p_list[0], 0.0)
}

/// Per-component input: whether the component spreading model is
/// equivalent to the unit vector basis of its own space (with a lower
/// equivalence constant) or to that of l_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentKind {
    BasisEquivalent { lower: f64 },
    LpCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumClass {
    /// Lattice element whose unit vector basis the sum is equivalent to.
    pub element: usize,
    pub b_set: Vec<usize>,
    pub via_min_ones: usize,
    pub via_join: usize,
    /// `tau^(-2p) (sum_B c_j^p)^(1/p)`.
    pub upper: f64,
    /// Coefficient of `sum |a_i|^p` in the upper bound.
    pub k: f64,
    /// `c / |F|` with `F = B`.
    pub lower: f64,
}

/// Classifies `[sum_j c_j^p |a|_j^p + c_tail^p |a|_p^p]^(1/p)` over the
/// components `l_{M_j}` of an encoder run (`c` indexed by lattice
/// element). `B` collects the non-minimum `j` with `c_j != 0` whose
/// component is basis-equivalent; the answer is the minimum element when
/// `B` is empty, otherwise the element with the pointwise smallest ones
/// table over `B`, which must equal `join(B)`.
pub fn classify_sum_spreading_model(
    state: &EncoderState,
    c: &[f64],
    c_tail: f64,
    kinds: &[ComponentKind],
) -> Result<SumClass, CalculusError> {
    let lat = state.lattice();
    let n = lat.len();
    if c.len() != n {
        return Err(CalculusError::Length { got: c.len(), expected: n });
    }
    if kinds.len() != n {
        return Err(CalculusError::Length { got: kinds.len(), expected: n });
    }
    let p = state.params().p.to_f64();
    let s: f64 = c.iter().map(|x| x.powf(p)).sum::<f64>() + c_tail.powf(p);
    if c.iter().any(|x| *x < 0.0) || (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(CalculusError::Normalization(s));
    }
    let min = lat.minimum();
    let b_set: Vec<usize> = (0..n)
        .filter(|&j| j != min && c[j] != 0.0 && matches!(kinds[j], ComponentKind::BasisEquivalent { .. }))
        .collect();
    let tau = state.params().tau.to_f64();
    let lp_part: f64 = (0..n)
        .filter(|j| !b_set.contains(j) && c[*j] != 0.0)
        .map(|j| c[j].powf(p) * tau.powf(-5.0 * p * p))
        .sum::<f64>()
        + c_tail.powf(p);
    if b_set.is_empty() {
        return Ok(SumClass {
            element: min,
            b_set,
            via_min_ones: min,
            via_join: min,
            upper: 0.0,
            k: lp_part,
            lower: 1.0,
        });
    }
    let via_min_ones = state.min_ones_element(&b_set);
    let via_join = lat.join_all(&b_set).expect("nonempty");
    if via_min_ones != Some(via_join) {
        return Err(CalculusError::Disagreement { min_ones: via_min_ones, join: via_join });
    }
    let sum_b: f64 = b_set.iter().map(|&j| c[j].powf(p)).sum();
    let c_low = b_set
        .iter()
        .map(|&j| match kinds[j] {
            ComponentKind::BasisEquivalent { lower } => c[j] * lower,
            ComponentKind::LpCase => unreachable!("B holds basis-equivalent components"),
        })
        .fold(f64::INFINITY, f64::min);
    Ok(SumClass {
        element: via_join,
        via_min_ones: via_join,
        via_join,
        upper: tau.powf(-2.0 * p) * sum_b.powf(1.0 / p),
        k: lp_part,
        lower: c_low / b_set.len() as f64,
        b_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FiniteLattice;
    use crate::orlicz::{OrliczParams, Pattern};
    use crate::rational::q;

    #[test]
    fn eval_examples() {
        assert_eq!(SymNorm::Lp(2.0).eval(&[3.0, 4.0]).unwrap(), 5.0);
        let mx = max_combo(vec![SymNorm::Lp(1.0), SymNorm::Lp(2.0)]);
        assert_eq!(mx.eval(&[1.0, 1.0]).unwrap(), 2.0);
        let one = lp_sum_combine(vec![1.0], vec![SymNorm::Lp(3.0)], 2.0, 0.0).unwrap();
        let v = [0.3, -1.7, 2.2];
        assert_eq!(one.eval(&v).unwrap(), SymNorm::Lp(3.0).eval(&v).unwrap());
        let base = lp_sum_combine(vec![], vec![], 2.0, 1.0).unwrap();
        assert_eq!(base.eval(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn lp_sum_half_half() {
        let p = 2.5f64;
        let c = 0.5f64.powf(1.0 / p);
        let w = WeightSeq::new(vec![q(1, 1), q(1, 2)], q(1, 1)).unwrap();
        let n = lp_sum_combine(vec![c], vec![SymNorm::Lorentz(w)], p, c).unwrap();
        let want = (0.5 * 1.0f64.powf(p) + 0.5).powf(1.0 / p);
        assert!((n.eval(&[1.0]).unwrap() - want).abs() < 1e-12);
        assert!(lp_sum_combine(vec![0.5], vec![SymNorm::Lp(2.0)], 2.0, 0.5).is_err());
    }

    #[test]
    fn weighted_sum() {
        let w = weighted_sum_combo(vec![2.0, 4.0], vec![SymNorm::Lp(1.0), SymNorm::Lp(2.0)]).unwrap();
        assert_eq!(w.eval(&[1.0]).unwrap(), 0.75);
        let v = [0.2, -0.9, 0.4];
        assert!(SymNorm::Lp(2.0).eval(&v).unwrap() <= 4.0 * w.eval(&v).unwrap());
        assert!(weighted_sum_combo(vec![1.0, 2.0], vec![SymNorm::Lp(1.0), SymNorm::Lp(2.0)]).is_err());
        let single = weighted_sum_combo(vec![1.0], vec![SymNorm::Lp(2.0)]).unwrap();
        assert_eq!(single.eval(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn gap_witnesses() {
        let norms = [SymNorm::Lp(1.0), SymNorm::Lp(2.0)];
        let w = find_gap_witness(&norms, &[1], 3.0, 100).unwrap();
        assert_eq!(w.m, q(10, 1));
        assert!(w.ratio > 3.0);
        assert_eq!(w.vector(&norms, &[1]).unwrap().len(), 10);
        assert!(find_gap_witness(&norms, &[0, 1], 1.0, 100).is_none());
    }

    #[test]
    fn lp_domination_exact() {
        let cfg = SamplerConfig::default();
        let d = estimate_domination(&SymNorm::Lp(3.0), &SymNorm::Lp(2.0), &cfg).unwrap();
        assert!(d.is_dominated());
        match estimate_domination(&SymNorm::Lp(2.0), &SymNorm::Lp(3.0), &cfg).unwrap() {
            DominationEstimate::NotDominated { witness: Witness::Block { ratio, .. } } => assert!(ratio > cfg.cap),
            e => panic!("{e:?}"),
        }
        let s = estimate_domination(&SymNorm::Lp(2.0), &max_combo(vec![SymNorm::Lp(2.0), SymNorm::Lp(1.0)]), &cfg).unwrap();
        match s {
            DominationEstimate::Dominated { constant: Bound::Estimate(c), exact: false } => assert!(c <= 1.0),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn orlicz_route() {
        let pr = OrliczParams::default();
        let a = OrliczFunction::new(pr.clone(), Pattern::from_bits(&[1, 1, 1, 1]).unwrap());
        let b = OrliczFunction::new(pr, Pattern::from_bits(&[0, 0, 0, 1]).unwrap());
        let cfg = SamplerConfig::default();
        assert!(estimate_domination(&SymNorm::Orlicz(a.clone()), &SymNorm::Orlicz(b.clone()), &cfg).unwrap().is_dominated());
        assert!(!estimate_domination(&SymNorm::Orlicz(b), &SymNorm::Orlicz(a), &cfg).unwrap().is_dominated());
    }

    #[test]
    fn lp_classes() {
        let ps = [2.0, 2.25, 2.5, 2.75, 3.0];
        let h = 0.5f64.sqrt();
        let c = [0.0, h, 0.0, 0.0, h];
        let cls = classify_lp_sum(&c, &ps).unwrap();
        assert_eq!(cls.index, 1);
        assert_eq!(cls.lower, h);
        assert_eq!(classify_lp_sum(&[1.0, 0.0, 0.0, 0.0, 0.0], &ps).unwrap().index, 0);
        assert!(classify_lp_sum(&[0.0; 5], &ps).is_err());
        assert!(classify_lp_sum(&c, &[2.0, 2.0, 3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn sum_classification_m3() {
        let st = EncoderState::run(FiniteLattice::m3(), OrliczParams::default(), 6).unwrap();
        let kinds = [ComponentKind::BasisEquivalent { lower: 1.0 }; 5];
        let p = 2.5f64;
        let half = 0.5f64.powf(1.0 / p);
        let c = [0.0, half, half, 0.0, 0.0];
        let cls = classify_sum_spreading_model(&st, &c, 0.0, &kinds).unwrap();
        assert_eq!(cls.element, 4);
        assert_eq!(cls.b_set, vec![1, 2]);
        let none = classify_sum_spreading_model(&st, &[1.0, 0.0, 0.0, 0.0, 0.0], 0.0, &kinds).unwrap();
        assert_eq!(none.element, 0);
        let single = classify_sum_spreading_model(&st, &[0.0, 0.0, 0.0, 1.0, 0.0], 0.0, &kinds).unwrap();
        assert_eq!(single.element, 3);
        let lp_only = [ComponentKind::LpCase; 5];
        assert_eq!(classify_sum_spreading_model(&st, &c, 0.0, &lp_only).unwrap().element, 0);
    }
}
