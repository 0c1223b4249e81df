//! Lorentz sequence norms `d(w, p)` and the power-set domination diagrams
//! built from an incomparable family.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domination::{order_counterexample, Bound, DominationMatrix, Relation};
use crate::pwl::{PwlError, PwlFunction};
use crate::rational::Rational;
use crate::submult::{FamilyState, SubmultError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LorentzError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("exponent p = {0} must be at least 1")]
    BadExponent(Rational),
    #[error("vector has {support} nonzero entries but the weights stop at {horizon}")]
    SupportExceedsHorizon { support: usize, horizon: usize },
    #[error("horizon {horizon} lies beyond the domain end {end}")]
    HorizonBeyondDomain { horizon: usize, end: Rational },
    #[error("exact evaluation needs p = 1, got {0}")]
    NotExact(Rational),
    #[error("family has {members} members, diagram needs {needed}")]
    FamilyTooSmall { members: usize, needed: usize },
    #[error("family log has no request for A = {subset:?}, N = {bound}")]
    InsufficientWitness { subset: Vec<usize>, bound: u64 },
    #[error("no power of two up to the domain end separates l_p from {subset:?}")]
    NoTopWitness { subset: Vec<usize> },
    #[error("diagram disagrees with the reference order at nodes ({0}, {1})")]
    NotIsomorphic(String, String),
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Submult(#[from] SubmultError),
}

/// Nonincreasing weights `w(1) = 1 >= w(2) >= ... > 0` with exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSeqDoc", into = "WeightSeqDoc")]
pub struct WeightSeq {
    weights: Vec<Rational>,
    partial: Vec<Rational>,
    weights_f64: Vec<f64>,
    p: Rational,
}

#[derive(Serialize, Deserialize)]
struct WeightSeqDoc {
    weights: Vec<Rational>,
    #[serde(default = "Rational::one")]
    p: Rational,
}

impl TryFrom<WeightSeqDoc> for WeightSeq {
    type Error = LorentzError;
    fn try_from(d: WeightSeqDoc) -> Result<Self, LorentzError> {
        WeightSeq::new(d.weights, d.p)
    }
}

impl From<WeightSeq> for WeightSeqDoc {
    fn from(w: WeightSeq) -> Self {
        WeightSeqDoc { weights: w.weights, p: w.p }
    }
}

impl WeightSeq {
    pub fn new(weights: Vec<Rational>, p: Rational) -> Result<Self, LorentzError> {
        if weights.is_empty() {
            return Err(LorentzError::InvalidWeights("empty sequence".into()));
        }
        if weights[0] != Rational::one() {
            return Err(LorentzError::InvalidWeights(format!("w(1) = {} instead of 1", weights[0])));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                return Err(LorentzError::InvalidWeights(format!("w({}) = {w} is not positive", i + 1)));
            }
            if i > 0 && *w > weights[i - 1] {
                return Err(LorentzError::InvalidWeights(format!("w({}) = {w} exceeds w({})", i + 1, i)));
            }
        }
        if p < Rational::one() {
            return Err(LorentzError::BadExponent(p));
        }
        let mut partial = Vec::with_capacity(weights.len());
        let mut acc = Rational::zero();
        for w in &weights {
            acc += w;
            partial.push(acc.clone());
        }
        let weights_f64 = weights.iter().map(Rational::to_f64).collect();
        Ok(WeightSeq { weights, partial, weights_f64, p })
    }

    pub fn with_exponent(self, p: Rational) -> Result<Self, LorentzError> {
        WeightSeq::new(self.weights, p)
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn horizon(&self) -> usize {
        self.weights.len()
    }

    /// `S(n) = w(1) + ... + w(n)`, with `S(0) = 0`.
    pub fn fundamental(&self, n: usize) -> Option<Rational> {
        match n {
            0 => Some(Rational::zero()),
            n => self.partial.get(n - 1).cloned(),
        }
    }

    /// `(sum a*_n^p w(n))^(1/p)` in floating point.
    pub fn lorentz_norm(&self, a: &[f64]) -> Result<f64, LorentzError> {
        let mut mags: Vec<f64> = a.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        if mags.len() > self.horizon() {
            return Err(LorentzError::SupportExceedsHorizon { support: mags.len(), horizon: self.horizon() });
        }
        mags.sort_by(|x, y| y.total_cmp(x));
        let Some(&top) = mags.first() else { return Ok(0.0) };
        if self.p == Rational::one() {
            return Ok(mags.iter().zip(&self.weights_f64).map(|(x, w)| x * w).sum());
        }
        let p = self.p.to_f64();
        let s: f64 = mags.iter().zip(&self.weights_f64).map(|(x, w)| (x / top).powf(p) * w).sum();
        Ok(top * s.powf(1.0 / p))
    }

    /// Exact `sum a*_n w(n)` for `p = 1`.
    pub fn lorentz_norm_exact(&self, a: &[Rational]) -> Result<Rational, LorentzError> {
        if self.p != Rational::one() {
            return Err(LorentzError::NotExact(self.p.clone()));
        }
        let mut mags: Vec<Rational> = a.iter().filter(|x| !x.is_zero()).map(Rational::abs).collect();
        if mags.len() > self.horizon() {
            return Err(LorentzError::SupportExceedsHorizon { support: mags.len(), horizon: self.horizon() });
        }
        mags.sort_by(|x, y| y.cmp(x));
        Ok(mags.iter().zip(&self.weights).map(|(x, w)| x * w).sum())
    }

    /// Table `n,w(n),S(n)` with exact `p/q` entries.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LorentzError> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| LorentzError::InvalidWeights(e.to_string());
        wr.write_record(["n", "w(n)", "S(n)"]).map_err(err)?;
        for (i, (w, s)) in self.weights.iter().zip(&self.partial).enumerate() {
            wr.write_record([(i + 1).to_string(), w.to_fraction_string(), s.to_fraction_string()]).map_err(err)?;
        }
        wr.flush().map_err(|e| LorentzError::InvalidWeights(e.to_string()))
    }
}

/// `w(n) = S(n) - S(n-1)` for `n = 1..=horizon`, with `S(0) = 0` and `p = 1`.
pub fn weights_from_fundamental(f: &PwlFunction, horizon: usize) -> Result<WeightSeq, LorentzError> {
    f.validate()?;
    if Rational::from(horizon) > *f.domain_end() {
        return Err(LorentzError::HorizonBeyondDomain { horizon, end: f.domain_end().clone() });
    }
    let mut prev = Rational::zero();
    let mut weights = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let s = f.eval(&Rational::from(n))?;
        weights.push(&s - &prev);
        prev = s;
    }
    WeightSeq::new(weights, Rational::one())
}

/// Label such as `{1,3}`.
pub fn subset_label(set: &[usize]) -> String {
    let inner: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// Nonempty subsets of `{1..n}` ordered by size, then lexicographically.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u64..(1u64 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Subset order on the nonempty subsets of `{1..n}` (in
/// [`nonempty_subsets`] order), with an extra top element when `with_top`.
pub fn powerset_reference_order(n: usize, with_top: bool) -> Vec<Vec<bool>> {
    let masks: Vec<u64> = nonempty_subsets(n)
        .iter()
        .map(|s| s.iter().fold(0u64, |m, &i| m | 1 << (i - 1)))
        .collect();
    let size = masks.len() + usize::from(with_top);
    (0..size)
        .map(|i| {
            (0..size)
                .map(|j| match (masks.get(i), masks.get(j)) {
                    (Some(a), Some(b)) => a & !b == 0,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => true,
                })
                .collect()
        })
        .collect()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Domination diagram of the norms `max_{i in A} d(w_i, p)` over nonempty
/// `A` in `{1..n}`, plus an `l_p` node on top when `p > 1`.
///
/// `A` inside `B` is recorded with constant 1. Otherwise the family's
/// request `(B, threshold)` supplies a block length `m` with
/// `max_A S_i(m) / max_B S_i(m) > threshold`. The `l_p` node beats every
/// `A` at a power of two `m` with `(m / max_A S_i(m))^(1/p) > threshold`.
/// The result is checked against the subset order before returning.
pub fn powerset_diagram(
    family: &FamilyState,
    n: usize,
    p: &Rational,
    threshold: u64,
) -> Result<DominationMatrix, LorentzError> {
    if p < &Rational::one() {
        return Err(LorentzError::BadExponent(p.clone()));
    }
    let members = family.functions().len();
    if members < n || n == 0 {
        return Err(LorentzError::FamilyTooSmall { members, needed: n });
    }
    let (pa, pb) = exponent_parts(p)?;
    let subsets = nonempty_subsets(n);
    let with_top = *p > Rational::one();
    let mut nodes: Vec<String> = subsets.iter().map(|s| subset_label(s)).collect();
    if with_top {
        nodes.push(format!("l_{p}"));
    }
    let top = subsets.len();
    let one = || Bound::Exact(Rational::one());
    let t = Rational::from(threshold);

    // S_i at the witness of each B, evaluated once per member
    let mut at_witness: Vec<Option<(Rational, Vec<Rational>)>> = Vec::with_capacity(subsets.len());
    for b in &subsets {
        at_witness.push(match family.witness_for(b, threshold) {
            Some(served) => {
                let m = served.witness_n.clone();
                let vals = (1..=n).map(|i| family.member(i).eval(&m)).collect::<Result<Vec<_>, _>>()?;
                Some((m, vals))
            }
            None => None,
        });
    }
    let max_of = |set: &[usize], vals: &[Rational]| -> Rational {
        set.iter().map(|&i| vals[i - 1].clone()).reduce(Rational::max).expect("nonempty")
    };

    let mut relations = Vec::with_capacity(nodes.len() * nodes.len());
    for (i, a) in subsets.iter().enumerate() {
        for (j, b) in subsets.iter().enumerate() {
            if is_subset(a, b) {
                relations.push(Relation::dominated(i, j, one()));
                continue;
            }
            let (m, vals) = at_witness[j]
                .as_ref()
                .ok_or_else(|| LorentzError::InsufficientWitness { subset: b.clone(), bound: threshold })?;
            let (top_a, top_b) = (max_of(a, vals), max_of(b, vals));
            if !root_exceeds(&top_a, &top_b, pa, pb, &t) {
                return Err(LorentzError::InsufficientWitness { subset: b.clone(), bound: threshold });
            }
            relations.push(Relation::block_witness(i, j, m.clone(), norm_ratio(&top_a, &top_b, p)));
        }
        if with_top {
            relations.push(Relation::dominated(i, top, one()));
        }
    }
    if with_top {
        for (j, b) in subsets.iter().enumerate() {
            let (m, s) = top_witness(family, b, pa, pb, &t)?;
            let bound = norm_ratio(&m, &s, p);
            relations.push(Relation::block_witness(top, j, m, bound));
        }
        relations.push(Relation::dominated(top, top, one()));
    }
    let matrix = DominationMatrix::new(nodes, relations).expect("complete by construction");
    let reference = powerset_reference_order(n, with_top);
    let identity: Vec<usize> = (0..matrix.len()).collect();
    if let Some((i, j)) = order_counterexample(&reference, &matrix, &identity).expect("sizes agree") {
        return Err(LorentzError::NotIsomorphic(matrix.nodes()[i].clone(), matrix.nodes()[j].clone()));
    }
    Ok(matrix)
}

fn exponent_parts(p: &Rational) -> Result<(u64, u64), LorentzError> {
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(LorentzError::BadExponent(p.clone())),
    }
}

/// `(num / den)^(1/p) > t` for `p = a/b`, decided exactly as
/// `num^b > t^a den^b` so that no gcd of the (possibly huge) operands is taken.
fn root_exceeds(num: &Rational, den: &Rational, a: u64, b: u64, t: &Rational) -> bool {
    num.pow(b) > t.pow(a) * den.pow(b)
}

/// Ratios whose operands together exceed this many bits are recorded as
/// float estimates.
const EXACT_RATIO_BITS: u64 = 4096;

/// The norm ratio `(num / den)^(1/p)` of the blocks `1^m`: exact for
/// `p = 1` and moderate operand sizes.
fn norm_ratio(num: &Rational, den: &Rational, p: &Rational) -> Bound {
    if *p == Rational::one() && num.bits() + den.bits() <= EXACT_RATIO_BITS {
        Bound::Exact(num / den)
    } else {
        Bound::Estimate(((num.log2_abs() - den.log2_abs()) / p.to_f64()).exp2())
    }
}

/// Smallest `m = 2^k` with `(m / max_B S_i(m))^(1/p) > t`; returns `m` and
/// `max_B S_i(m)`.
fn top_witness(
    family: &FamilyState,
    b: &[usize],
    pa: u64,
    pb: u64,
    t: &Rational,
) -> Result<(Rational, Rational), LorentzError> {
    let end = family.domain_end().clone();
    let mut m = Rational::from_int(2);
    while m <= end {
        let s = family.max_over(b, &m)?;
        if root_exceeds(&m, &s, pa, pb, t) {
            return Ok((m, s));
        }
        m *= Rational::from_int(2);
    }
    Err(LorentzError::NoTopWitness { subset: b.to_vec() })
}
