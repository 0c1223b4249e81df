//! Orlicz functions `M_eta` coded by 0/1 patterns, with exact exponent
//! arithmetic at the breakpoints `tau^k` and a float Luxemburg norm.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrliczError {
    #[error("need 0 < tau < 1 and 1 < r < p, got tau = {tau}, r = {r}, p = {p}")]
    BadParams { tau: Rational, r: Rational, p: Rational },
    #[error("parameters fail the convexity conditions ({0:?})")]
    NotConvex(ParamVerdict),
    #[error("position {0} lies beyond the pattern horizon {1}")]
    BeyondHorizon(BigUint, BigUint),
    #[error("t = {0} is below the resolved range of the pattern")]
    BelowRange(f64),
    #[error("t = {0} must lie in (0, 1]")]
    OutOfUnit(f64),
    #[error("bad pattern: {0}")]
    BadPattern(String),
    #[error("gap sequence must start at 1 with strictly increasing gaps (fails at index {0})")]
    BadGaps(usize),
    #[error("shift inequality fails for k = {k}, n = {n}")]
    ShiftViolation { k: BigUint, n: BigUint },
    #[error("patterns differ in parameters or horizon")]
    Mismatch,
    #[error("the zero vector has no normalization")]
    ZeroVector,
    #[error("epsilon = {0} must lie in (0, 1)")]
    BadEpsilon(Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamVerdict {
    Valid,
    Invalid,
    Indeterminate,
}

/// Margin band used by [`OrliczParams::validate`].
pub const PARAM_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrliczParams {
    pub tau: Rational,
    pub r: Rational,
    pub p: Rational,
}

impl Default for OrliczParams {
    fn default() -> Self {
        OrliczParams { tau: Rational::new(1, 2), r: Rational::from_int(2), p: Rational::new(5, 2) }
    }
}

impl OrliczParams {
    /// Checks the ranges only; see [`OrliczParams::validated`] for convexity.
    pub fn new(tau: Rational, r: Rational, p: Rational) -> Result<Self, OrliczError> {
        let one = Rational::one();
        if !tau.is_positive() || tau >= one || r <= one || p <= r {
            return Err(OrliczError::BadParams { tau, r, p });
        }
        Ok(OrliczParams { tau, r, p })
    }

    pub fn validated(tau: Rational, r: Rational, p: Rational) -> Result<Self, OrliczError> {
        let params = OrliczParams::new(tau, r, p)?;
        match params.validate() {
            ParamVerdict::Valid => Ok(params),
            v => Err(OrliczError::NotConvex(v)),
        }
    }

    /// Slack of `tau^(r-1)(1 - tau^p) <= 1 - tau^r` and
    /// `tau^(p-1)(1 - tau^r) <= 1 - tau^p` (right side minus left side).
    pub fn convexity_margins(&self) -> (f64, f64) {
        let t = self.tau.to_f64();
        let (r, p) = (self.r.to_f64(), self.p.to_f64());
        let first = (1.0 - t.powf(r)) - t.powf(r - 1.0) * (1.0 - t.powf(p));
        let second = (1.0 - t.powf(p)) - t.powf(p - 1.0) * (1.0 - t.powf(r));
        (first, second)
    }

    pub fn validate(&self) -> ParamVerdict {
        let (a, b) = self.convexity_margins();
        if a >= PARAM_MARGIN && b >= PARAM_MARGIN {
            ParamVerdict::Valid
        } else if a <= -PARAM_MARGIN || b <= -PARAM_MARGIN {
            ParamVerdict::Invalid
        } else {
            ParamVerdict::Indeterminate
        }
    }

    pub fn gap(&self) -> Rational {
        &self.p - &self.r
    }

    /// Least `d >= 1` with `tau^((p - r) d) < eps`, decided exactly.
    pub fn zero_count_for(&self, eps: &Rational) -> Result<u64, OrliczError> {
        if !eps.is_positive() || *eps >= Rational::one() {
            return Err(OrliczError::BadEpsilon(eps.clone()));
        }
        let gap = self.gap();
        let holds = |d: u64| tau_pow_lt(&self.tau, &(&gap * &Rational::from(d)), eps);
        let guess = eps.log2_abs() / (gap.to_f64() * self.tau.log2_abs());
        let mut d = if guess.is_finite() && guess > 0.0 { guess.floor() as u64 + 1 } else { 1 };
        d = d.max(1);
        while d > 1 && holds(d - 1) {
            d -= 1;
        }
        while !holds(d) {
            d += 1;
        }
        Ok(d)
    }
}

/// `tau^e < x` for rational `e` and `x > 0`, exactly: with `e = s/t`,
/// compares `tau^s` against `x^t`.
pub fn tau_pow_lt(tau: &Rational, e: &Rational, x: &Rational) -> bool {
    let s = e.numer();
    let t = e.denom().to_u64().expect("exponent denominator fits in u64");
    let xt = x.pow(t);
    let s_abs = s.abs().to_u64().expect("exponent numerator fits in u64");
    if s.is_negative() {
        Rational::one() < xt * tau.pow(s_abs)
    } else {
        tau.pow(s_abs) < xt
    }
}

/// A 0/1 sequence on `[1, horizon]`, stored by its zero positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    horizon: BigUint,
    zeros: Vec<BigUint>,
}

impl Pattern {
    pub fn new(zeros: Vec<BigUint>, horizon: BigUint) -> Result<Self, OrliczError> {
        for (i, z) in zeros.iter().enumerate() {
            if z.is_zero() || *z > horizon {
                return Err(OrliczError::BadPattern(format!("zero position {z} outside [1, {horizon}]")));
            }
            if i > 0 && zeros[i - 1] >= *z {
                return Err(OrliczError::BadPattern("zero positions not strictly increasing".into()));
            }
        }
        Ok(Pattern { horizon, zeros })
    }

    pub fn all_ones(horizon: BigUint) -> Self {
        Pattern { horizon, zeros: Vec::new() }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, OrliczError> {
        let mut zeros = Vec::new();
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => zeros.push(BigUint::from(i + 1)),
                1 => {}
                _ => return Err(OrliczError::BadPattern(format!("entry {b} is not a bit"))),
            }
        }
        Ok(Pattern { horizon: BigUint::from(bits.len()), zeros })
    }

    pub fn horizon(&self) -> &BigUint {
        &self.horizon
    }

    pub fn zero_positions(&self) -> &[BigUint] {
        &self.zeros
    }

    /// Number of zeros in `[1, k]`.
    pub fn zeros_upto(&self, k: &BigUint) -> usize {
        self.zeros.partition_point(|z| z <= k)
    }

    fn check(&self, k: &BigUint) -> Result<(), OrliczError> {
        if *k > self.horizon {
            return Err(OrliczError::BeyondHorizon(k.clone(), self.horizon.clone()));
        }
        Ok(())
    }

    /// `eta(1) + ... + eta(k)`.
    pub fn ones(&self, k: &BigUint) -> Result<BigUint, OrliczError> {
        self.check(k)?;
        Ok(k - BigUint::from(self.zeros_upto(k)))
    }

    pub fn bit(&self, k: &BigUint) -> Result<u8, OrliczError> {
        self.check(k)?;
        if k.is_zero() {
            return Err(OrliczError::BadPattern("positions start at 1".into()));
        }
        Ok(u8::from(self.zeros.binary_search(k).is_err()))
    }

    /// Appends `zeros` (all beyond the current horizon) and moves the
    /// horizon to `new_horizon`; the other new positions are ones.
    pub fn extend(&mut self, zeros: &[BigUint], new_horizon: BigUint) -> Result<(), OrliczError> {
        let mut last = self.horizon.clone();
        for z in zeros {
            if *z <= last || *z > new_horizon {
                return Err(OrliczError::BadPattern(format!("zero {z} not in ({last}, {new_horizon}]")));
            }
            last = z.clone();
        }
        if new_horizon < self.horizon {
            return Err(OrliczError::BadPattern("horizon cannot shrink".into()));
        }
        self.zeros.extend_from_slice(zeros);
        self.horizon = new_horizon;
        Ok(())
    }

    /// Maximal runs `(bit, length)` covering `[1, horizon]`.
    pub fn runs(&self) -> Vec<(u8, BigUint)> {
        let mut out: Vec<(u8, BigUint)> = Vec::new();
        let push = |bit: u8, len: BigUint, out: &mut Vec<(u8, BigUint)>| {
            if len.is_zero() {
                return;
            }
            match out.last_mut() {
                Some((b, l)) if *b == bit => *l += len,
                _ => out.push((bit, len)),
            }
        };
        let mut pos = BigUint::zero();
        for z in &self.zeros {
            push(1, z - &pos - 1u32, &mut out);
            push(0, BigUint::one(), &mut out);
            pos = z.clone();
        }
        push(1, &self.horizon - &pos, &mut out);
        out
    }

    /// `<bit>x<count>,...`, empty for horizon 0.
    pub fn to_rle(&self) -> String {
        self.runs().iter().map(|(b, l)| format!("{b}x{l}")).collect::<Vec<_>>().join(",")
    }

    pub fn from_rle(s: &str) -> Result<Self, OrliczError> {
        let bad = |m: &str| OrliczError::BadPattern(format!("rle: {m}"));
        let mut pos = BigUint::zero();
        let mut zeros = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (bit, count) = tok.split_once('x').ok_or_else(|| bad(tok))?;
            let count: BigUint = count.parse().map_err(|_| bad(tok))?;
            match bit {
                "1" => pos += count,
                "0" => {
                    let end = &pos + &count;
                    let mut z = pos + 1u32;
                    while z <= end {
                        zeros.push(z.clone());
                        z += 1u32;
                    }
                    pos = end;
                }
                _ => return Err(bad(tok)),
            }
        }
        Ok(Pattern { horizon: pos, zeros })
    }

    /// Sorted union of the zero positions of `self` and `other`.
    pub fn events<'a>(&'a self, other: &'a Pattern) -> Vec<&'a BigUint> {
        let mut ev: Vec<&BigUint> = self.zeros.iter().chain(&other.zeros).collect();
        ev.sort();
        ev.dedup();
        ev
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rle())
    }
}

impl FromStr for Pattern {
    type Err = OrliczError;
    fn from_str(s: &str) -> Result<Self, OrliczError> {
        Pattern::from_rle(s)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    rle: String,
    horizon: String,
    zero_positions: Vec<String>,
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PatternDoc {
            rle: self.to_rle(),
            horizon: self.horizon.to_string(),
            zero_positions: self.zeros.iter().map(BigUint::to_string).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = PatternDoc::deserialize(d)?;
        let horizon: BigUint = doc.horizon.parse().map_err(D::Error::custom)?;
        let zeros = doc
            .zero_positions
            .iter()
            .map(|z| z.parse::<BigUint>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let p = Pattern::new(zeros, horizon).map_err(D::Error::custom)?;
        // rle of a huge horizon can be long to expand; compare runs instead
        if p.to_rle() != doc.rle.replace(' ', "") {
            return Err(D::Error::custom("rle disagrees with zero_positions"));
        }
        Ok(p)
    }
}

/// Breakpoints resolved by the float table stop once `tau^k` drops below this.
const TABLE_FLOOR: f64 = 1e-300;

/// `M_eta` for given parameters: piecewise linear with `M(0) = 0`, `M(1) = 1`
/// and `M(tau^k) = tau^(r k + (p - r) ones(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczFunction {
    params: OrliczParams,
    pattern: Pattern,
    tau_pows: Vec<f64>,
    values: Vec<f64>,
}

impl OrliczFunction {
    pub fn new(params: OrliczParams, pattern: Pattern) -> Self {
        let tau = params.tau.to_f64();
        let log_tau = params.tau.log2_abs();
        let (r, gap) = (params.r.to_f64(), params.gap().to_f64());
        let limit = pattern.horizon.to_u64().map_or(usize::MAX, |h| h as usize);
        let mut tau_pows = vec![1.0];
        let mut values = vec![1.0];
        let mut zeros = pattern.zeros.iter().peekable();
        let mut ones = 0u64;
        let mut k = 0usize;
        while k < limit && tau_pows[k] >= TABLE_FLOOR {
            k += 1;
            let pos = BigUint::from(k);
            if zeros.peek().is_some_and(|z| **z == pos) {
                zeros.next();
            } else {
                ones += 1;
            }
            tau_pows.push(tau_pows[k - 1] * tau);
            values.push(((r * k as f64 + gap * ones as f64) * log_tau).exp2());
        }
        OrliczFunction { params, pattern, tau_pows, values }
    }

    pub fn params(&self) -> &OrliczParams {
        &self.params
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// `r k + (p - r) ones(k)`.
    pub fn exponent_at(&self, k: &BigUint) -> Result<Rational, OrliczError> {
        let ones = self.pattern.ones(k)?;
        Ok(&self.params.r * &Rational::from(k) + self.params.gap() * Rational::from(&ones))
    }

    /// Float value at `t` in `(0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64, OrliczError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(OrliczError::OutOfUnit(t));
        }
        let last = self.tau_pows.len() - 1;
        if t < self.tau_pows[last] {
            let resolved_all = self.pattern.horizon.to_u64().is_some_and(|h| h as usize == last);
            if resolved_all {
                return Err(OrliczError::BelowRange(t));
            }
            // below float range: chord to the origin
            return Ok(t * self.values[last] / self.tau_pows[last]);
        }
        let k = self.tau_pows.partition_point(|&x| x > t);
        if k == 0 || self.tau_pows[k] == t {
            return Ok(self.values[k]);
        }
        let (x0, x1) = (self.tau_pows[k], self.tau_pows[k - 1]);
        let (y0, y1) = (self.values[k], self.values[k - 1]);
        Ok(y0 + (t - x0) * (y1 - y0) / (x1 - x0))
    }

    fn modular(&self, mags: &[f64], rho: f64) -> Result<f64, OrliczError> {
        mags.iter().map(|&x| self.eval((x / rho).min(1.0))).sum()
    }

    /// `inf { rho > 0 : sum M(|a_n| / rho) <= 1 }` by bisection on
    /// `[max |a_n|, sum |a_n|]`, returning `rho` with residual at most `tol`.
    pub fn luxemburg_norm(&self, a: &[f64], tol: f64) -> Result<f64, OrliczError> {
        let mags: Vec<f64> = a.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        if mags.is_empty() {
            return Err(OrliczError::ZeroVector);
        }
        let mut lo = mags.iter().cloned().fold(0.0, f64::max);
        let mut hi: f64 = mags.iter().sum();
        let f_lo = self.modular(&mags, lo)?;
        if (f_lo - 1.0).abs() <= tol {
            return Ok(lo);
        }
        let f_hi = self.modular(&mags, hi)?;
        if (f_hi - 1.0).abs() <= tol {
            return Ok(hi);
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..2000 {
            mid = 0.5 * (lo + hi);
            let f = self.modular(&mags, mid)?;
            if (f - 1.0).abs() <= tol {
                return Ok(mid);
            }
            if f > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(mid)
    }

    /// `sum M(|a_n| / rho)`.
    pub fn modular_at(&self, a: &[f64], rho: f64) -> Result<f64, OrliczError> {
        let mags: Vec<f64> = a.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        self.modular(&mags, rho)
    }

    /// Breakpoint table `(tau^k, M(tau^k))` resolved in floating point.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.tau_pows.iter().cloned().zip(self.values.iter().cloned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "lowercase")]
pub enum Comparison {
    Eq,
    /// `M_i <= M_j` everywhere, strictly somewhere (witness `k`).
    Le { strict_at: BigUintStr },
    Ge { strict_at: BigUintStr },
    /// `M_i > M_j` at `tau^above` and `M_i < M_j` at `tau^below`.
    Incomparable { above: BigUintStr, below: BigUintStr },
}

impl Comparison {
    /// `M_i <= M_j` at every breakpoint.
    pub fn is_le(&self) -> bool {
        matches!(self, Comparison::Eq | Comparison::Le { .. })
    }
}

/// A `BigUint` carried as a decimal string in JSON.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigUintStr(pub BigUint);

impl Serialize for BigUintStr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for BigUintStr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(BigUintStr).map_err(serde::de::Error::custom)
    }
}

fn same_frame(a: &OrliczFunction, b: &OrliczFunction) -> Result<(), OrliczError> {
    if a.params != b.params || a.pattern.horizon != b.pattern.horizon {
        return Err(OrliczError::Mismatch);
    }
    Ok(())
}

/// First positions where `ones_a - ones_b` is negative and positive.
/// The difference only moves at zero positions, so the sweep visits those.
pub fn ones_sign_witnesses(a: &Pattern, b: &Pattern) -> (Option<BigUint>, Option<BigUint>) {
    let (mut neg, mut pos) = (None, None);
    for e in a.events(b) {
        let (za, zb) = (a.zeros_upto(e), b.zeros_upto(e));
        match za.cmp(&zb) {
            Ordering::Greater if neg.is_none() => neg = Some(e.clone()),
            Ordering::Less if pos.is_none() => pos = Some(e.clone()),
            _ => {}
        }
        if neg.is_some() && pos.is_some() {
            break;
        }
    }
    (neg, pos)
}

/// Order of `M_i` and `M_j` at the common breakpoints, which decides the
/// order everywhere on the resolved range since both are linear between them.
pub fn pointwise_compare(mi: &OrliczFunction, mj: &OrliczFunction) -> Result<Comparison, OrliczError> {
    same_frame(mi, mj)?;
    // fewer ones gives the larger function
    let (i_above, i_below) = ones_sign_witnesses(&mi.pattern, &mj.pattern);
    Ok(match (i_above, i_below) {
        (None, None) => Comparison::Eq,
        (None, Some(k)) => Comparison::Le { strict_at: BigUintStr(k) },
        (Some(k), None) => Comparison::Ge { strict_at: BigUintStr(k) },
        (Some(a), Some(b)) => Comparison::Incomparable { above: BigUintStr(a), below: BigUintStr(b) },
    })
}

/// Exponent gap `(p - r)(ones_i(k) - ones_j(k))`, so that
/// `M_i(tau^k) / M_j(tau^k) = tau^gap`.
pub fn ratio_gap(mi: &OrliczFunction, mj: &OrliczFunction, k: &BigUint) -> Result<Rational, OrliczError> {
    same_frame(mi, mj)?;
    let oi = Rational::from(&mi.pattern.ones(k)?);
    let oj = Rational::from(&mj.pattern.ones(k)?);
    Ok(mi.params.gap() * (oi - oj))
}

/// Whether `M_i(tau^k) / M_j(tau^k) < eps`, exactly.
pub fn ratio_below(mi: &OrliczFunction, mj: &OrliczFunction, k: &BigUint, eps: &Rational) -> Result<bool, OrliczError> {
    let gap = ratio_gap(mi, mj, k)?;
    Ok(tau_pow_lt(&mi.params.tau, &gap, eps))
}

/// Pattern with zeros exactly at `n_1 = 1 < n_2 < ...` (those up to the
/// horizon), after checking that the gaps increase strictly and that the
/// shift inequality holds.
pub fn single_space_pattern(ns: &[BigUint], horizon: BigUint) -> Result<Pattern, OrliczError> {
    if ns.first().is_none_or(|n| !n.is_one()) {
        return Err(OrliczError::BadGaps(0));
    }
    for i in 2..ns.len() {
        if ns[i] <= ns[i - 1] || &ns[i] - &ns[i - 1] <= &ns[i - 1] - &ns[i - 2] {
            return Err(OrliczError::BadGaps(i));
        }
    }
    if ns.len() == 2 && ns[1] <= ns[0] {
        return Err(OrliczError::BadGaps(1));
    }
    let zeros: Vec<BigUint> = ns.iter().filter(|n| **n <= horizon).cloned().collect();
    let p = Pattern::new(zeros, horizon)?;
    check_shift_minimal(&p)?;
    Ok(p)
}

/// `sum_{i<=n} eta(i) <= sum_{i=k+1}^{k+n} eta(i)` for all `k >= 1` and
/// `k + n <= horizon`. A window holding `c` zeros starting at `z_i` is
/// shortest when it ends at `z_{i+c-1}`, so it suffices that
/// `z_{i+c-1} - z_i + 1 >= z_c` whenever `z_i >= 2`.
pub fn check_shift_minimal(p: &Pattern) -> Result<(), OrliczError> {
    let z = &p.zeros;
    for i in 0..z.len() {
        if z[i] < BigUint::from(2u32) {
            continue;
        }
        for c in 1..=(z.len() - i) {
            let len = &z[i + c - 1] - &z[i] + 1u32;
            if len < z[c - 1] {
                return Err(OrliczError::ShiftViolation { k: &z[i] - 1u32, n: len });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta2Report {
    /// Largest `e(k) - e(k-1)` over the horizon.
    pub max_step: Rational,
    pub min_step: Rational,
    /// Bound on `sup M(2t) / M(t)` implied by `max_step`.
    pub constant_bound: f64,
}

/// Exponent steps `e(k) - e(k-1) = r + (p - r) eta(k)` and the implied
/// bound `2 tau^(-s max_step)`, where `s` steps of `tau` cover a factor 2.
pub fn delta2_check(m: &OrliczFunction) -> Delta2Report {
    let pr = &m.params;
    let n_zeros = m.pattern.zeros.len();
    let has_one = m.pattern.horizon > BigUint::from(n_zeros);
    let max_step = if has_one { pr.p.clone() } else { pr.r.clone() };
    let min_step = if n_zeros > 0 { pr.r.clone() } else { pr.p.clone() };
    let inv = 1.0 / pr.tau.to_f64();
    let steps = (2f64.ln() / inv.ln()).ceil().max(1.0);
    let constant_bound = 2.0 * inv.powf(max_step.to_f64() * steps);
    Delta2Report { max_step, min_step, constant_bound }
}
