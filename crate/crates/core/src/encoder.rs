//! Pattern families `rho_0 .. rho_m` realizing a finite lattice through
//! repeated `(eps, A)`-domination steps, and exact checks of the resulting
//! order structure.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domination::{Bound, DominationMatrix, Relation};
use crate::lattice::{FiniteLattice, LatticeDoc, LatticeError};
use crate::orlicz::{
    check_shift_minimal, ones_sign_witnesses, tau_pow_lt, BigUintStr, OrliczError, OrliczFunction, OrliczParams,
    ParamVerdict, Pattern,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncoderError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error("parameters are {0:?} for the convexity conditions")]
    Params(ParamVerdict),
    #[error("epsilon = {0} must lie in (0, 1)")]
    BadEpsilon(Rational),
    #[error("{0:?} is not a down-set")]
    NotDownSet(Vec<usize>),
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("postcondition failed after request {index}: {reason}")]
    Postcondition { index: usize, reason: String },
    #[error("bundle: {0}")]
    Bundle(String),
}

/// `(eps = 2^-k, A = down_set(j))` in scheduled order, as `(k, j)`.
/// Pairs with `k + t <= depth + 1`, where `t` is the 1-based position of
/// `j` among the non-minimum elements; diagonals ascending, then `k`
/// ascending within a diagonal.
pub fn request_schedule(lattice: &FiniteLattice, depth: u32) -> Result<Vec<(u32, usize)>, EncoderError> {
    if depth == 0 {
        return Err(EncoderError::BadDepth);
    }
    let elems = lattice.non_minimum();
    let mut out = Vec::new();
    for s in 2..=(depth + 1) {
        for k in 1..s {
            let t = (s - k) as usize;
            if let Some(&j) = elems.get(t - 1) {
                out.push((k, j));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub eps: Rational,
    /// Element whose down-set is `A`; `None` for requests given by set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    /// `A` as element indices, minimum excluded.
    pub subset: Vec<usize>,
    pub trivial: bool,
    pub zero_count: u64,
    /// Position where the separation is read off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<BigUintStr>,
    pub n1: BigUintStr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    lattice: FiniteLattice,
    params: OrliczParams,
    /// Element for each slot; slot 0 is the minimum.
    slots: Vec<usize>,
    patterns: Vec<Pattern>,
    checkpoints: Vec<BigUint>,
    request_log: Vec<RequestRecord>,
}

fn next_power_of_two_above(n: &BigUint) -> BigUint {
    BigUint::one() << n.bits()
}

fn is_power_of_two(n: &BigUint) -> bool {
    n.count_ones() == 1
}

impl EncoderState {
    /// Horizon 1 with `rho_0(1) = 1` and `rho_j(1) = 0` for `j >= 1`.
    pub fn init(lattice: FiniteLattice, params: OrliczParams) -> Result<Self, EncoderError> {
        match params.validate() {
            ParamVerdict::Valid => {}
            v => return Err(EncoderError::Params(v)),
        }
        let mut slots = vec![lattice.minimum()];
        slots.extend(lattice.non_minimum());
        let one = BigUint::one();
        let patterns = (0..slots.len())
            .map(|s| {
                if s == 0 {
                    Pattern::all_ones(one.clone())
                } else {
                    Pattern::new(vec![one.clone()], one.clone()).expect("single zero")
                }
            })
            .collect();
        Ok(EncoderState { lattice, params, slots, patterns, checkpoints: vec![one], request_log: Vec::new() })
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn params(&self) -> &OrliczParams {
        &self.params
    }

    pub fn horizon(&self) -> &BigUint {
        self.patterns[0].horizon()
    }

    pub fn checkpoints(&self) -> &[BigUint] {
        &self.checkpoints
    }

    pub fn request_log(&self) -> &[RequestRecord] {
        &self.request_log
    }

    /// Slot order: minimum first, then the other elements as listed.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn slot_of(&self, element: usize) -> usize {
        self.slots.iter().position(|&e| e == element).expect("element index in range")
    }

    /// Pattern of lattice element `element`.
    pub fn pattern(&self, element: usize) -> &Pattern {
        &self.patterns[self.slot_of(element)]
    }

    pub fn function(&self, element: usize) -> OrliczFunction {
        OrliczFunction::new(self.params.clone(), self.pattern(element).clone())
    }

    /// `(eps, A)`-domination for a down-set `A` of element indices.
    pub fn apply_domination(&mut self, eps: &Rational, subset: &[usize]) -> Result<&RequestRecord, EncoderError> {
        self.apply(eps, subset, None)
    }

    /// `(eps, down_set(j))`-domination.
    pub fn apply_for_element(&mut self, eps: &Rational, j: usize) -> Result<&RequestRecord, EncoderError> {
        let a = self.lattice.down_set(j);
        self.apply(eps, &a, Some(j))
    }

    fn apply(&mut self, eps: &Rational, subset: &[usize], target: Option<usize>) -> Result<&RequestRecord, EncoderError> {
        if !eps.is_positive() || *eps >= Rational::one() {
            return Err(EncoderError::BadEpsilon(eps.clone()));
        }
        if !self.lattice.is_down_set(subset) {
            return Err(EncoderError::NotDownSet(subset.to_vec()));
        }
        let n = self.horizon().clone();
        let in_a: Vec<bool> = self.slots.iter().map(|e| subset.contains(e)).collect();
        let a_count = in_a.iter().skip(1).filter(|&&x| x).count();
        let mut members: Vec<usize> = subset.iter().copied().filter(|&e| e != self.lattice.minimum()).collect();
        members.sort_unstable();

        let record = if a_count == 0 || a_count == self.slots.len() - 1 {
            let n1 = &n + 1u32;
            for p in &mut self.patterns {
                p.extend(&[], n1.clone())?;
            }
            RequestRecord {
                eps: eps.clone(),
                target,
                subset: members,
                trivial: true,
                zero_count: 0,
                m: None,
                n1: BigUintStr(n1),
            }
        } else {
            let d = self.params.zero_count_for(eps)?;
            let start = next_power_of_two_above(&n);
            let first: Vec<BigUint> = (0..d).map(|i| &start << i).collect();
            let second: Vec<BigUint> = (d..2 * d).map(|i| &start << i).collect();
            let m = first.last().expect("d >= 1").clone();
            let n1 = &start << (2 * d);
            for (s, p) in self.patterns.iter_mut().enumerate() {
                let zeros: &[BigUint] = match (s, in_a[s]) {
                    (0, _) => &[],
                    (_, true) => &second,
                    (_, false) => &first,
                };
                p.extend(zeros, n1.clone())?;
            }
            RequestRecord {
                eps: eps.clone(),
                target,
                subset: members,
                trivial: false,
                zero_count: d,
                m: Some(BigUintStr(m)),
                n1: BigUintStr(n1),
            }
        };
        self.checkpoints.push(record.n1.0.clone());
        self.request_log.push(record);
        let index = self.request_log.len() - 1;
        self.check_request(index)?;
        Ok(&self.request_log[index])
    }

    fn check_request(&self, index: usize) -> Result<(), EncoderError> {
        let rec = &self.request_log[index];
        let fail = |reason: String| EncoderError::Postcondition { index, reason };
        if !self.balanced_at(&rec.n1.0)? {
            return Err(fail(format!("not balanced at {}", rec.n1.0)));
        }
        if let Some(m) = &rec.m {
            for &j in &rec.subset {
                for &k in self.slots.iter().skip(1) {
                    if rec.subset.contains(&k) {
                        continue;
                    }
                    if !self.ratio_below(j, k, &m.0, &rec.eps)? {
                        return Err(fail(format!("ratio for ({j}, {k}) not below {}", rec.eps)));
                    }
                }
            }
        }
        Ok(())
    }

    /// `M_i(tau^k) / M_j(tau^k) < eps` for elements `i`, `j`, exactly.
    pub fn ratio_below(&self, i: usize, j: usize, k: &BigUint, eps: &Rational) -> Result<bool, EncoderError> {
        let oi = Rational::from(&self.pattern(i).ones(k)?);
        let oj = Rational::from(&self.pattern(j).ones(k)?);
        let gap = self.params.gap() * (oi - oj);
        Ok(tau_pow_lt(&self.params.tau, &gap, eps))
    }

    /// Whether all `rho_j`, `j >= 1`, have the same number of ones on `[1, k]`.
    pub fn balanced_at(&self, k: &BigUint) -> Result<bool, EncoderError> {
        let mut it = self.patterns.iter().skip(1);
        let Some(first) = it.next() else { return Ok(true) };
        let o = first.ones(k)?;
        for p in it {
            if p.ones(k)? != o {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `init` followed by every scheduled request.
    pub fn run(lattice: FiniteLattice, params: OrliczParams, depth: u32) -> Result<Self, EncoderError> {
        let schedule = request_schedule(&lattice, depth)?;
        let mut state = EncoderState::init(lattice, params)?;
        for (k, j) in schedule {
            state.apply_for_element(&Rational::pow2(-(k as i64)), j)?;
        }
        Ok(state)
    }

    pub fn to_bundle(&self) -> EncoderBundle {
        EncoderBundle {
            lattice: self.lattice.to_doc(),
            params: self.params.clone(),
            patterns: self
                .slots
                .iter()
                .zip(&self.patterns)
                .map(|(&e, p)| NamedPattern { element: self.lattice.name(e).to_string(), pattern: p.clone() })
                .collect(),
            checkpoints: self.checkpoints.iter().cloned().map(BigUintStr).collect(),
            request_log: self.request_log.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_bundle()).expect("bundle serializes")
    }

    pub fn from_bundle(b: EncoderBundle) -> Result<Self, EncoderError> {
        let lattice = FiniteLattice::from_doc(&b.lattice)?;
        let mut state = EncoderState::init(lattice, b.params)?;
        if b.patterns.len() != state.slots.len() {
            return Err(EncoderError::Bundle(format!("{} patterns for {} elements", b.patterns.len(), state.slots.len())));
        }
        let mut patterns = Vec::with_capacity(b.patterns.len());
        for (s, &e) in state.slots.iter().enumerate() {
            let np = &b.patterns[s];
            if np.element != state.lattice.name(e) {
                return Err(EncoderError::Bundle(format!("slot {s} holds {:?}, expected {:?}", np.element, state.lattice.name(e))));
            }
            if s > 0 && np.pattern.horizon() != b.patterns[0].pattern.horizon() {
                return Err(EncoderError::Bundle("patterns disagree on the horizon".into()));
            }
            patterns.push(np.pattern.clone());
        }
        state.patterns = patterns;
        state.checkpoints = b.checkpoints.into_iter().map(|c| c.0).collect();
        state.request_log = b.request_log;
        Ok(state)
    }

    pub fn from_json(s: &str) -> Result<Self, EncoderError> {
        let b: EncoderBundle = serde_json::from_str(s).map_err(|e| EncoderError::Bundle(e.to_string()))?;
        Self::from_bundle(b)
    }

    /// Element whose ones table is the pointwise minimum of the tables of
    /// `set` (equivalently whose `M` is the pointwise maximum), if any.
    pub fn min_ones_element(&self, set: &[usize]) -> Option<usize> {
        if set.is_empty() {
            return None;
        }
        let (events, counts) = self.event_table();
        let slots: Vec<usize> = set.iter().map(|&e| self.slot_of(e)).collect();
        let max_zeros: Vec<usize> =
            (0..events.len()).map(|e| slots.iter().map(|&s| counts[s][e]).max().expect("nonempty")).collect();
        (0..self.slots.len()).find(|&s| counts[s] == max_zeros).map(|s| self.slots[s])
    }

    /// Zero-count table over the union of all zero positions:
    /// `counts[slot][e]` zeros of that slot in `[1, events[e]]`.
    fn event_table(&self) -> (Vec<BigUint>, Vec<Vec<usize>>) {
        let mut events: Vec<BigUint> = self.patterns.iter().flat_map(|p| p.zero_positions().iter().cloned()).collect();
        events.sort();
        events.dedup();
        let counts = self
            .patterns
            .iter()
            .map(|p| {
                let z = p.zero_positions();
                let mut c = 0usize;
                events
                    .iter()
                    .map(|e| {
                        while c < z.len() && z[c] <= *e {
                            c += 1;
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        (events, counts)
    }

    /// Order relation between the `M_j`, indexed by lattice element, with
    /// constant 1 or a breakpoint witness `k` for each pair.
    pub fn domination_matrix(&self) -> DominationMatrix {
        let n = self.lattice.len();
        let mut relations = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (above, _) = ones_sign_witnesses(self.pattern(i), self.pattern(j));
                match above {
                    None => relations.push(Relation::dominated(i, j, Bound::Exact(Rational::one()))),
                    Some(k) => {
                        let oi = Rational::from(&self.pattern(i).ones(&k).expect("k within horizon"));
                        let oj = Rational::from(&self.pattern(j).ones(&k).expect("k within horizon"));
                        let gap = self.params.gap() * (oj - oi);
                        let ratio = (gap.to_f64() * self.params.tau.log2_abs()).exp2();
                        relations.push(Relation::breakpoint_witness(i, j, Rational::from(&k), Bound::Estimate(ratio)));
                    }
                }
            }
        }
        DominationMatrix::new(self.lattice.names().to_vec(), relations).expect("complete by construction")
    }

    pub fn verify_properties(&self) -> PropertyReport {
        let (events, counts) = self.event_table();
        let mut report = PropertyReport {
            horizon: BigUintStr(self.horizon().clone()),
            requests: self.request_log.len(),
            ..PropertyReport::default()
        };

        // (i): rho_0 has no zeros, so its exponent is p k at every k
        report.i = match self.patterns[0].zero_positions().first() {
            None => {
                let h = self.horizon();
                let ok = self.function(self.slots[0]).exponent_at(h).map(|e| e == &self.params.p * &Rational::from(h));
                if ok.unwrap_or(false) {
                    Check::pass()
                } else {
                    Check::fail(format!("exponent of rho_0 differs from p k at {h}"))
                }
            }
            Some(k) => Check::fail(format!("rho_0 has a zero at {k}")),
        };

        // (ii): order at breakpoints against the lattice, plus divergence
        let matrix = self.domination_matrix();
        report.ii = Check::pass();
        'pairs: for i in 0..self.lattice.len() {
            for j in 0..self.lattice.len() {
                if matrix.dominates(i, j) != self.lattice.leq(i, j) {
                    report.ii = Check::fail(format!(
                        "M_{} <= M_{} is {} but the lattice says {}",
                        self.lattice.name(i),
                        self.lattice.name(j),
                        matrix.dominates(i, j),
                        self.lattice.leq(i, j)
                    ));
                    break 'pairs;
                }
            }
        }
        if report.ii.pass {
            match self.check_divergence() {
                Ok(n) => report.divergence_witnesses = n,
                Err(msg) => report.ii = Check::fail(msg),
            }
        }

        // (iii) and (iv): min of ones tables over F is the table of join(F)
        let n_slots = self.slots.len();
        report.iii = Check::pass();
        report.iv = Check::pass();
        for mask in 1u64..(1u64 << n_slots) {
            let f: Vec<usize> = (0..n_slots).filter(|s| mask >> s & 1 == 1).collect();
            let elems: Vec<usize> = f.iter().map(|&s| self.slots[s]).collect();
            let j0 = self.slot_of(self.lattice.join_all(&elems).expect("nonempty"));
            let mut attaining = vec![false; n_slots];
            for (e, pos) in events.iter().enumerate() {
                let mx = f.iter().map(|&s| counts[s][e]).max().expect("nonempty");
                if mx != counts[j0][e] && report.iii.pass {
                    report.iii = Check::fail(format!(
                        "F = {:?}: min ones differs from join {} at k = {pos}",
                        self.names_of(&elems),
                        self.lattice.name(self.slots[j0])
                    ));
                }
                for &s in &f {
                    if counts[s][e] == mx {
                        attaining[s] = true;
                    }
                }
            }
            // F' = members attaining the max somewhere already give the max
            let f_small: Vec<usize> = f.iter().copied().filter(|&s| attaining[s] || events.is_empty()).collect();
            let f_small = if f_small.is_empty() { vec![f[0]] } else { f_small };
            for e in 0..events.len() {
                let full = f.iter().map(|&s| counts[s][e]).max();
                let part = f_small.iter().map(|&s| counts[s][e]).max();
                if full != part && report.iv.pass {
                    report.iv = Check::fail(format!("B = {:?}: no finite subset attains the max", self.names_of(&elems)));
                }
            }
            report.iv_max_subset = report.iv_max_subset.max(f_small.len());
            report.subsets_checked += 1;
        }

        report.balance = Check::pass();
        for c in &self.checkpoints {
            match self.balanced_at(c) {
                Ok(true) => {}
                Ok(false) => {
                    report.balance = Check::fail(format!("ones tables differ at checkpoint {c}"));
                    break;
                }
                Err(e) => {
                    report.balance = Check::fail(e.to_string());
                    break;
                }
            }
        }

        report.shift = Check::pass();
        for (s, p) in self.patterns.iter().enumerate() {
            let name = self.lattice.name(self.slots[s]);
            if let Some(z) = p.zero_positions().iter().find(|z| !is_power_of_two(z)) {
                report.shift = Check::fail(format!("rho for {name} has a zero at {z}, not a power of two"));
                break;
            }
            if let Err(e) = check_shift_minimal(p) {
                report.shift = Check::fail(format!("rho for {name}: {e}"));
                break;
            }
        }

        let identity: Vec<usize> = (0..self.lattice.len()).collect();
        report.order_isomorphic = matches!(self.lattice.is_order_isomorphic(&matrix, &identity), Ok(None));
        report
    }

    fn names_of(&self, elems: &[usize]) -> Vec<String> {
        elems.iter().map(|&e| self.lattice.name(e).to_string()).collect()
    }

    /// For `e_i` not below `e_j`: every logged request for `down_set(j)`
    /// must show `M_j(tau^m) / M_i(tau^m) < eps` at its `m`. For the
    /// minimum `j` (no requests) some logged `m` must do so for every
    /// served `eps`. Returns the number of witnesses checked.
    fn check_divergence(&self) -> Result<usize, String> {
        let min = self.lattice.minimum();
        let mut served: Vec<&Rational> = self.request_log.iter().filter(|r| !r.trivial).map(|r| &r.eps).collect();
        served.sort();
        served.dedup();
        let positions: Vec<&BigUint> = self.request_log.iter().filter_map(|r| r.m.as_ref().map(|m| &m.0)).collect();
        let mut checked = 0;
        for i in 0..self.lattice.len() {
            for j in 0..self.lattice.len() {
                if self.lattice.leq(i, j) {
                    continue;
                }
                let (ni, nj) = (self.lattice.name(i), self.lattice.name(j));
                if j == min {
                    for eps in &served {
                        let mut found = false;
                        for m in &positions {
                            if self.ratio_below(j, i, m, eps).map_err(|e| e.to_string())? {
                                found = true;
                                break;
                            }
                        }
                        if !found {
                            return Err(format!("no logged position separates M_{nj} below eps = {eps} times M_{ni}"));
                        }
                        checked += 1;
                    }
                    continue;
                }
                for rec in self.request_log.iter().filter(|r| r.target == Some(j) && !r.trivial) {
                    let m = &rec.m.as_ref().expect("nontrivial request has m").0;
                    if !self.ratio_below(j, i, m, &rec.eps).map_err(|e| e.to_string())? {
                        return Err(format!("request (eps = {}, {nj}) leaves M_{nj}/M_{ni} >= eps at {m}", rec.eps));
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPattern {
    pub element: String,
    pub pattern: Pattern,
}

/// State export: lattice, parameters, patterns in slot order, checkpoints
/// and the request log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderBundle {
    pub lattice: LatticeDoc,
    pub params: OrliczParams,
    pub patterns: Vec<NamedPattern>,
    pub checkpoints: Vec<BigUintStr>,
    pub request_log: Vec<RequestRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl Check {
    pub fn pass() -> Self {
        Check { pass: true, failure: None }
    }

    pub fn fail(msg: String) -> Self {
        Check { pass: false, failure: Some(msg) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub horizon: BigUintStr,
    pub requests: usize,
    pub i: Check,
    pub ii: Check,
    pub iii: Check,
    pub iv: Check,
    pub balance: Check,
    pub shift: Check,
    pub order_isomorphic: bool,
    pub divergence_witnesses: usize,
    pub subsets_checked: usize,
    pub iv_max_subset: usize,
}

impl Default for PropertyReport {
    fn default() -> Self {
        PropertyReport {
            horizon: BigUintStr(BigUint::default()),
            requests: 0,
            i: Check::default(),
            ii: Check::default(),
            iii: Check::default(),
            iv: Check::default(),
            balance: Check::default(),
            shift: Check::default(),
            order_isomorphic: false,
            divergence_witnesses: 0,
            subsets_checked: 0,
            iv_max_subset: 0,
        }
    }
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.i.pass && self.ii.pass && self.iii.pass && self.iv.pass && self.balance.pass && self.shift.pass && self.order_isomorphic
    }

    pub fn failures(&self) -> Vec<(&'static str, &str)> {
        [("i", &self.i), ("ii", &self.ii), ("iii", &self.iii), ("iv", &self.iv), ("balance", &self.balance), ("shift", &self.shift)]
            .into_iter()
            .filter_map(|(name, c)| c.failure.as_deref().map(|f| (name, f)))
            .collect()
    }
}
