//! Acceptance run: one PASS/FAIL line per criterion. Every check pairs the
//! library result with a route computed here from raw data.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spreading_core::calculus::{
    classify_lp_sum, classify_sum_spreading_model, domination_matrix, lp_sum_combine, lp_sum_norm, ComponentKind,
    SymNorm,
};
use spreading_core::encoder::EncoderState;
use spreading_core::lattice::FiniteLattice;
use spreading_core::lorentz::{nonempty_subsets, powerset_diagram, WeightSeq};
use spreading_core::orlicz::{check_shift_minimal, OrliczFunction, OrliczParams, Pattern};
use spreading_core::pwl::{check_submultiplicative, PwlFunction};
use spreading_core::submult::{
    build_incomparable_family, enumerate_requests, extend_fast, extend_fast_to, extend_slow, extend_slow_to,
    slowdown_epsilon0, FamilyState, FastBranch,
};
use spreading_core::{q, Rational};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------- exact piecewise-linear evaluation ----------

fn interp(f: &PwlFunction, x: &Rational) -> Rational {
    let xs = f.breakpoints();
    let ys = f.values();
    let i = xs.partition_point(|b| b < x);
    if i < xs.len() && xs[i] == *x {
        return ys[i].clone();
    }
    assert!(i > 0 && i < xs.len(), "outside the domain");
    let (x0, x1, y0, y1) = (&xs[i - 1], &xs[i], &ys[i - 1], &ys[i]);
    y0 + &((y1 - y0) * (x - x0) / (x1 - x0))
}

/// A dyadic close to `2^e`, for exponents far beyond the f64 range.
fn pow2_real(e: f64) -> Rational {
    let whole = e.floor();
    Rational::pow2(whole as i64) * Rational::from_f64_dyadic((e - whole).exp2(), 20).expect("finite")
}

/// Submultiplicativity on breakpoint pairs plus random rational pairs.
fn oracle_submult(f: &PwlFunction, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let end = f.domain_end().clone();
    let mut pairs: Vec<(Rational, Rational)> = Vec::new();
    let xs = f.breakpoints();
    for a in xs {
        for b in xs {
            if a <= b && &(a * b) <= &end {
                pairs.push((a.clone(), b.clone()));
            }
        }
        // the partner that lands exactly on the end
        pairs.push((a.clone(), &end / a));
    }
    let log_end = end.log2_abs();
    for _ in 0..200 {
        let u: f64 = rng.random_range(0.0..1.0);
        let v: f64 = rng.random_range(0.0..1.0 - u);
        let (x, y) = (pow2_real(u * log_end), pow2_real(v * log_end));
        if x >= Rational::one() && y >= Rational::one() && &(&x * &y) <= &end {
            pairs.push((x, y));
        }
    }
    for (x, y) in &pairs {
        let lhs = interp(f, &(x * y));
        let rhs = interp(f, x) * interp(f, y);
        if lhs > rhs {
            return Err(format!("S({x:?} * {y:?}) > S(x) S(y)"));
        }
    }
    Ok(pairs.len())
}

fn both_checks(f: &PwlFunction, rng: &mut ChaCha8Rng, what: &str) -> Result<(), String> {
    let r = check_submultiplicative(f);
    ensure(r.is_ok(), || format!("{what}: checker found {} violations", r.violations.len()))?;
    oracle_submult(f, rng).map(|_| ()).map_err(|e| format!("{what}: oracle: {e}"))
}

fn ac1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut early, mut exact) = (0, 0);
    let id = PwlFunction::identity();
    let eps0 = slowdown_epsilon0(&id).map_err(|e| e.to_string())?;
    for run in 0..50 {
        let eps = q(rng.random_range(1..32), 64);
        ensure(eps < eps0, || "slope sampler out of range".into())?;
        let s1 = extend_slow(&id, &eps).map_err(|e| e.to_string())?;
        ensure(*s1.value_at_end() == q(2, 1) + &eps * &q(2, 1), || format!("run {run}: slow value"))?;
        both_checks(&s1, &mut rng, &format!("run {run} slow"))?;

        let target = Rational::from_int(rng.random_range(3..=1_000_000));
        let budget = q(1, rng.random_range(2..=1000));
        let s2 = extend_slow_to(&id, &target, &budget).map_err(|e| e.to_string())?;
        let growth = s2.function.value_at_end() - id.value_at_end();
        ensure(growth < budget && growth == s2.total_growth(), || {
            format!("run {run}: growth {growth:?} vs budget {budget}")
        })?;
        ensure(s2.function.domain_end() == &target, || format!("run {run}: slow_to missed its target"))?;
        both_checks(&s2.function, &mut rng, &format!("run {run} slow_to"))?;

        // speed up the seeded slowdown
        let kk = s1.value_at_end().clone();
        let fast = extend_fast(&s1).map_err(|e| e.to_string())?;
        let goal = &kk * &q(3, 2);
        let v = fast.function.value_at_end();
        match fast.branch {
            FastBranch::ExactTarget => {
                exact += 1;
                ensure(*v == goal, || format!("run {run}: fast value {v:?} != 3K/2"))?
            }
            FastBranch::EarlyStop => {
                early += 1;
                ensure(*v >= goal, || format!("run {run}: early stop below 3K/2"))?
            }
        }
        both_checks(&fast.function, &mut rng, &format!("run {run} fast"))?;

        let m = Rational::from_int(rng.random_range(3..=20));
        let to = extend_fast_to(&id, &m).map_err(|e| e.to_string())?;
        ensure(to.function.value_at_end() > &m, || format!("run {run}: fast_to stopped at or below M"))?;
        both_checks(&to.function, &mut rng, &format!("run {run} fast_to"))?;
    }
    Ok(format!("50 runs, 200 functions checked; speedup branches exact={exact} early={early}"))
}

// ---------- incomparable family ----------

fn ac2() -> Verdict {
    let fam = build_incomparable_family(4, 100).map_err(|e| e.to_string())?;
    let scaled = |v: &(Rational, Rational), k: i64| (&v.0 * &Rational::from_int(k), v.1.clone());
    for (a, n) in enumerate_requests(4, 100) {
        let w = fam.witness_for(&a, n).ok_or_else(|| format!("no witness for {a:?}, {n}"))?;
        let vals = values_at(&fam, 4, &w.witness_n);
        let top_a = scaled(max_split(&vals, &a), n as i64);
        for j in (1..=4).filter(|j| !a.contains(j)) {
            ensure(split_gt(&vals[j - 1], &top_a), || format!("witness for {a:?}, {n} fails at member {j}"))?;
        }
    }
    for i in 1..=4 {
        let w = fam.witness_for(&[i], 100).ok_or_else(|| format!("no witness for {{{i}}}"))?;
        let vals = values_at(&fam, 4, &w.witness_n);
        for j in (1..=4).filter(|&j| j != i) {
            ensure(split_gt(&vals[j - 1], &scaled(&vals[i - 1], 100)), || {
                format!("S_{j} / S_{i} <= 100 at the witness")
            })?;
        }
    }
    Ok(format!("{} requests, 6 pairs incomparable both ways", fam.request_log().len()))
}

// ---------- power-set diagrams ----------

fn mask(s: &[usize]) -> u32 {
    s.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

/// `S(x)` as an unreduced pair `(num, den)`, `den > 0`, by interpolation
/// between the neighbouring breakpoints. Avoids the gcds of canonical
/// arithmetic on operands of millions of bits.
fn interp_split(f: &PwlFunction, x: &Rational) -> (Rational, Rational) {
    let xs = f.breakpoints();
    let ys = f.values();
    let i = xs.partition_point(|b| b < x);
    if i < xs.len() && xs[i] == *x {
        return (ys[i].numer(), ys[i].denom());
    }
    assert!(i > 0 && i < xs.len(), "outside the domain");
    let nd = |r: &Rational| (r.numer(), r.denom());
    let ((x0n, x0d), (x1n, x1d), (y0n, y0d), (y1n, y1d), (xn, xd)) =
        (nd(&xs[i - 1]), nd(&xs[i]), nd(&ys[i - 1]), nd(&ys[i]), nd(x));
    // y0 + (y1 - y0) (x - x0) / (x1 - x0)
    let dy_n = &(&y1n * &y0d) - &(&y0n * &y1d);
    let dy_d = &y0d * &y1d;
    let dx_n = &(&xn * &x0d) - &(&x0n * &xd);
    let dx_d = &xd * &x0d;
    let w_n = &(&x1n * &x0d) - &(&x0n * &x1d);
    let w_d = &x1d * &x0d;
    // fraction (dy_n dx_n w_d) / (dy_d dx_d w_n), w_n > 0
    let t_n = &(&dy_n * &dx_n) * &w_d;
    let t_d = &(&dy_d * &dx_d) * &w_n;
    (&(&y0n * &t_d) + &(&t_n * &y0d), &y0d * &t_d)
}

fn split_gt(a: &(Rational, Rational), b: &(Rational, Rational)) -> bool {
    &a.0 * &b.1 > &b.0 * &a.1
}

/// `S_i(m)` for members `1..=n` at one block length.
fn values_at(fam: &FamilyState, n: usize, m: &Rational) -> Vec<(Rational, Rational)> {
    (1..=n).map(|i| interp_split(fam.member(i), m)).collect()
}

fn max_split<'a>(vals: &'a [(Rational, Rational)], set: &[usize]) -> &'a (Rational, Rational) {
    set.iter().map(|&i| &vals[i - 1]).reduce(|x, y| if split_gt(y, x) { y } else { x }).expect("nonempty")
}

fn check_subset_block(fam: &FamilyState, n: usize, m: &spreading_core::DominationMatrix) -> Result<(), String> {
    let subsets = nonempty_subsets(n);
    let mut cache: Vec<(Rational, Vec<(Rational, Rational)>)> = Vec::new();
    for (i, a) in subsets.iter().enumerate() {
        for (j, b) in subsets.iter().enumerate() {
            let expect = mask(a) & !mask(b) == 0;
            ensure(m.dominates(i, j) == expect, || format!("{a:?} vs {b:?}: expected {expect}"))?;
            if !expect {
                let w = m.relation(i, j).witness_m.clone().ok_or_else(|| format!("{a:?} vs {b:?}: no witness"))?;
                if !cache.iter().any(|(x, _)| *x == w) {
                    let vals = values_at(fam, n, &w);
                    cache.push((w.clone(), vals));
                }
                let vals = &cache.iter().find(|(x, _)| *x == w).expect("cached").1;
                ensure(split_gt(max_split(vals, a), max_split(vals, b)), || {
                    format!("{a:?} vs {b:?}: witness ratio <= 1")
                })?;
            }
        }
    }
    Ok(())
}

fn ac3() -> Verdict {
    let f3 = build_incomparable_family(3, 1).map_err(|e| e.to_string())?;
    let d3 = powerset_diagram(&f3, 3, &Rational::one(), 1).map_err(|e| e.to_string())?;
    ensure(d3.len() == 7, || format!("{} nodes", d3.len()))?;
    check_subset_block(&f3, 3, &d3)?;

    let f2 = build_incomparable_family(2, 1).map_err(|e| e.to_string())?;
    let d2 = powerset_diagram(&f2, 2, &Rational::from_int(2), 1).map_err(|e| e.to_string())?;
    ensure(d2.len() == 4, || format!("{} nodes", d2.len()))?;
    check_subset_block(&f2, 2, &d2)?;
    let top = 3;
    for (j, b) in nonempty_subsets(2).iter().enumerate() {
        ensure(d2.dominates(j, top), || format!("{b:?} not below l_2"))?;
        ensure(!d2.dominates(top, j), || format!("l_2 below {b:?}"))?;
        let m = d2.relation(top, j).witness_m.clone().ok_or("top witness missing")?;
        // (m / max_B S(m))^(1/2) > 1
        let vals = values_at(&f2, 2, &m);
        ensure(split_gt(&(m.clone(), Rational::one()), max_split(&vals, b)), || {
            format!("top witness fails against {b:?}")
        })?;
    }
    Ok("P(3) minus empty set: 49 pairs match; l_2 strictly on top of P(2) minus empty set".into())
}

// ---------- lattice encoder ----------

/// `ones(k)` at each event, counted from the raw zero positions.
fn ones_table(p: &Pattern, events: &[BigUint]) -> Vec<BigUint> {
    let z = p.zero_positions();
    events.iter().map(|e| e - BigUint::from(z.iter().filter(|x| *x <= e).count())).collect()
}

fn all_events(st: &EncoderState) -> Vec<BigUint> {
    let n = st.lattice().len();
    let mut ev: Vec<BigUint> = (0..n).flat_map(|j| st.pattern(j).zero_positions().to_vec()).collect();
    ev.extend(st.checkpoints().iter().cloned());
    ev.push(st.horizon().clone());
    ev.sort();
    ev.dedup();
    ev
}

fn brute_join(lat: &FiniteLattice, set: &[usize]) -> usize {
    let n = lat.len();
    let ups: Vec<usize> = (0..n).filter(|&u| set.iter().all(|&b| lat.leq_matrix()[b][u])).collect();
    *ups.iter().find(|&&u| ups.iter().all(|&v| lat.leq_matrix()[u][v])).expect("lattice")
}

fn oracle_encoder(st: &EncoderState) -> Result<usize, String> {
    let lat = st.lattice();
    let n = lat.len();
    let ev = all_events(st);
    let tables: Vec<Vec<BigUint>> = (0..n).map(|j| ones_table(st.pattern(j), &ev)).collect();
    let min = lat.minimum();
    ensure(st.pattern(min).zero_positions().is_empty(), || "minimum pattern has zeros".into())?;
    let p = &st.params().p;
    for k in &ev {
        let e = st.function(min).exponent_at(k).map_err(|e| e.to_string())?;
        ensure(e == p * &Rational::from(k), || format!("rho_0 exponent at {k}"))?;
    }
    for i in 0..n {
        for j in 0..n {
            let below = tables[i].iter().zip(&tables[j]).all(|(a, b)| a >= b);
            ensure(below == lat.leq_matrix()[i][j], || format!("order of {} and {}", lat.name(i), lat.name(j)))?;
        }
    }
    let mut subsets = 0;
    for m in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
        let join = brute_join(lat, &set);
        let mins: Vec<&BigUint> = (0..ev.len()).map(|e| set.iter().map(|&s| &tables[s][e]).min().unwrap()).collect();
        ensure(tables[join].iter().collect::<Vec<_>>() == mins, || format!("min ones over {set:?} is not join"))?;
        subsets += 1;
    }
    Ok(subsets)
}

fn ac4(states: &mut Vec<(String, EncoderState)>) -> Verdict {
    let cases = [
        ("chain(4)", FiniteLattice::chain(4)),
        ("P(2)", FiniteLattice::power_set(2)),
        ("M3", FiniteLattice::m3()),
        ("N5", FiniteLattice::n5()),
    ];
    let mut notes = Vec::new();
    for (name, lat) in cases {
        let t = Instant::now();
        let st = EncoderState::run(lat, OrliczParams::default(), 6).map_err(|e| format!("{name}: {e}"))?;
        let rep = st.verify_properties();
        let el = t.elapsed();
        ensure(rep.all_pass(), || format!("{name}: {:?}", rep.failures()))?;
        ensure(el < Duration::from_secs(60), || format!("{name}: {el:?}"))?;
        let subsets = oracle_encoder(&st).map_err(|e| format!("{name}: oracle: {e}"))?;
        notes.push(format!("{name} {} requests {subsets} subsets {} witnesses", rep.requests, rep.divergence_witnesses));
        states.push((name.to_string(), st));
    }
    Ok(notes.join("; "))
}

// ---------- Orlicz norms ----------

struct MOracle {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl MOracle {
    fn new(params: &OrliczParams, p: &Pattern) -> Self {
        let tau = params.tau.to_f64();
        let (r, pp) = (params.r.to_f64(), params.p.to_f64());
        let z = p.zero_positions();
        let mut xs = vec![1.0];
        let mut ys = vec![1.0];
        let mut zeros = 0usize;
        let mut k = 0u64;
        while *xs.last().unwrap() > 1e-200 && BigUint::from(k) < *p.horizon() {
            k += 1;
            if z.get(zeros).is_some_and(|x| *x == BigUint::from(k)) {
                zeros += 1;
            }
            let ones = (k as usize - zeros) as f64;
            xs.push(tau.powi(k as i32));
            ys.push(tau.powf(r * k as f64 + (pp - r) * ones));
        }
        MOracle { xs, ys }
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.xs.iter().position(|&x| x <= t).expect("table reaches below the samples");
        if k == 0 {
            return 1.0;
        }
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k - 1], self.ys[k], self.ys[k - 1]);
        y0 + (t - x0) / (x1 - x0) * (y1 - y0)
    }

    fn modular(&self, a: &[f64], rho: f64) -> f64 {
        a.iter().filter(|x| **x != 0.0).map(|x| self.eval((x.abs() / rho).min(1.0))).sum()
    }

    /// Refines a uniform grid around the level crossing until it is
    /// narrower than `1e-12` relative.
    fn norm(&self, a: &[f64]) -> f64 {
        let mut lo = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut hi: f64 = a.iter().map(|x| x.abs()).sum();
        while hi - lo > 1e-12 * hi {
            let g: Vec<f64> = (0..=64).map(|i| lo + (hi - lo) * i as f64 / 64.0).collect();
            let i = g.iter().position(|&r| self.modular(a, r) <= 1.0).unwrap_or(64).max(1);
            (lo, hi) = (g[i - 1], g[i]);
        }
        0.5 * (lo + hi)
    }
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = rng.random_range(1..=20);
    (0..len).map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-1.0..=1.0) }).collect()
}

fn ac5(states: &[(String, EncoderState)]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_res, mut worst_hom, mut worst_or) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for (name, st) in states {
        for j in 0..st.lattice().len() {
            let m = st.function(j);
            let oracle = MOracle::new(st.params(), st.pattern(j));
            let tag = format!("{name}/{}", st.lattice().name(j));
            for e in [vec![1.0], vec![0.0, 0.0, 1.0], vec![0.0, -1.0]] {
                let v = m.luxemburg_norm(&e, 1e-9).map_err(|e| e.to_string())?;
                ensure(v == 1.0, || format!("{tag}: unit vector norm {v}"))?;
            }
            for _ in 0..1000 {
                let mut a = random_vec(&mut rng);
                if a.iter().all(|x| *x == 0.0) {
                    a[0] = 0.5;
                }
                let v = m.luxemburg_norm(&a, 1e-9).map_err(|e| e.to_string())?;
                let res = (m.modular_at(&a, v).map_err(|e| e.to_string())? - 1.0).abs();
                worst_res = worst_res.max(res);
                let lam: f64 = rng.random_range(0.1..10.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                let scaled: Vec<f64> = a.iter().map(|x| lam * x).collect();
                let vs = m.luxemburg_norm(&scaled, 1e-9).map_err(|e| e.to_string())?;
                worst_hom = worst_hom.max((vs - lam.abs() * v).abs() / (lam.abs() * v));
                worst_or = worst_or.max((v - oracle.norm(&a)).abs());
                count += 1;
            }
        }
    }
    ensure(worst_res <= 1e-9, || format!("residual {worst_res:e}"))?;
    ensure(worst_hom <= 1e-9, || format!("homogeneity {worst_hom:e}"))?;
    ensure(worst_or <= 1e-7, || format!("grid oracle gap {worst_or:e}"))?;
    Ok(format!(
        "{count} evaluations; max residual {worst_res:.2e}, homogeneity {worst_hom:.2e}, oracle gap {worst_or:.2e}"
    ))
}

// ---------- l_p-sum calculus ----------

fn ac6(states: &mut Vec<(String, EncoderState)>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w = WeightSeq::new((1..=40).map(|n| q(1, n)).collect(), Rational::one()).map_err(|e| e.to_string())?;
    let mut comps = vec![SymNorm::Lp(3.0), SymNorm::Lorentz(w)];
    comps.extend(states.iter().flat_map(|(_, st)| (0..st.lattice().len()).map(|j| SymNorm::Orlicz(st.function(j)))));
    for i in 0..1000 {
        let comp = comps[i % comps.len()].clone();
        let combined = lp_sum_combine(vec![1.0], vec![comp.clone()], 2.5, 0.0).map_err(|e| e.to_string())?;
        let a = random_vec(&mut rng);
        let (x, y) = (combined.eval(&a).map_err(|e| e.to_string())?, comp.eval(&a).map_err(|e| e.to_string())?);
        ensure(x.to_bits() == y.to_bits(), || format!("vector {i}: {x} vs {y}"))?;
    }

    for (name, lat) in [("P(3)", FiniteLattice::power_set(3)), ("chain(8)", FiniteLattice::chain(8))] {
        let st = EncoderState::run(lat, OrliczParams::default(), 6).map_err(|e| format!("{name}: {e}"))?;
        states.push((name.to_string(), st));
    }
    let mut checked = 0;
    for (name, st) in states.iter() {
        let lat = st.lattice();
        let n = lat.len();
        let p = st.params().p.to_f64();
        let ev = all_events(st);
        let tables: Vec<Vec<BigUint>> = (0..n).map(|j| ones_table(st.pattern(j), &ev)).collect();
        let kinds = vec![ComponentKind::BasisEquivalent { lower: 1.0 }; n];
        for m in 1u32..(1 << n) {
            let support: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            let c_val = (1.0 / support.len() as f64).powf(1.0 / p);
            let c: Vec<f64> = (0..n).map(|i| if m >> i & 1 == 1 { c_val } else { 0.0 }).collect();
            let cls = classify_sum_spreading_model(st, &c, 0.0, &kinds).map_err(|e| format!("{name}: {e}"))?;
            let b: Vec<usize> = support.iter().copied().filter(|&j| j != lat.minimum()).collect();
            let expect = if b.is_empty() {
                lat.minimum()
            } else {
                let mins: Vec<&BigUint> =
                    (0..ev.len()).map(|e| b.iter().map(|&s| &tables[s][e]).min().unwrap()).collect();
                let by_table = (0..n)
                    .find(|&j| tables[j].iter().collect::<Vec<_>>() == mins)
                    .ok_or_else(|| format!("{name}: no element has the min table of {b:?}"))?;
                ensure(by_table == brute_join(lat, &b), || format!("{name}: {b:?} min table is not the join"))?;
                by_table
            };
            ensure(cls.element == expect, || format!("{name}: support {support:?} gives {}", cls.element))?;
            checked += 1;
        }
    }
    Ok(format!("1000 single-component sums bit-exact; {checked} supports over {} lattices", states.len()))
}

// ---------- finite chains of l_p ----------

fn lp_norm(a: &[f64], p: f64) -> f64 {
    a.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn ac7() -> Verdict {
    let ps = [2.0, 2.25, 2.5, 2.75, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1u32..32 {
        let support: Vec<usize> = (0..5).filter(|i| m >> i & 1 == 1).collect();
        let cv = (1.0 / support.len() as f64).powf(1.0 / ps[0]);
        let c: Vec<f64> = (0..5).map(|i| if m >> i & 1 == 1 { cv } else { 0.0 }).collect();
        let cls = classify_lp_sum(&c, &ps).map_err(|e| e.to_string())?;
        ensure(cls.index == support[0], || format!("support {support:?}: index {}", cls.index))?;
        ensure(cls.lower == cv && cls.upper == 1.0, || format!("support {support:?}: sandwich"))?;
        let norm = lp_sum_norm(&c, &ps).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let a = random_vec(&mut rng);
            let direct = support.iter().map(|&b| (cv * lp_norm(&a, ps[b])).powf(ps[0])).sum::<f64>().powf(1.0 / ps[0]);
            let via = norm.eval(&a).map_err(|e| e.to_string())?;
            ensure((direct - via).abs() <= 1e-12 * direct.max(1e-300), || format!("{support:?}: {direct} vs {via}"))?;
            let base = lp_norm(&a, ps[cls.index]);
            let tol = 1e-12 * base;
            ensure(cv * base <= direct + tol && direct <= base + tol, || format!("{support:?}: sandwich fails"))?;
        }
    }
    let nodes: Vec<(String, SymNorm)> = ps.iter().map(|&p| (format!("l_{p}"), SymNorm::Lp(p))).collect();
    let mat = domination_matrix(&nodes, &Default::default()).map_err(|e| e.to_string())?;
    for i in 0..5 {
        for j in 0..5 {
            ensure(mat.dominates(i, j) == (i >= j), || format!("l_{} vs l_{}", ps[i], ps[j]))?;
        }
    }
    Ok("31 supports; sandwich c_beta <= . <= 1 holds on 1550 vectors; order is the reversed chain".into())
}

// ---------- shift minimality ----------

/// Every window `[k+1, k+n]` holds at most as many zeros as `[1, n]`.
/// The binding windows start and end on zeros, so all zero pairs suffice.
fn oracle_shift(p: &Pattern) -> Result<(), String> {
    let z = p.zero_positions();
    let prefix_zeros = |n: &BigUint| z.partition_point(|x| x <= n);
    for a in 0..z.len() {
        if z[a] == BigUint::from(1u32) {
            continue;
        }
        for b in a..z.len() {
            let len = &z[b] - &z[a] + 1u32;
            if prefix_zeros(&len) < b - a + 1 {
                return Err(format!("window [{}, {}]", z[a], z[b]));
            }
        }
    }
    Ok(())
}

/// Direct sums over all windows inside the first `limit` positions.
fn brute_shift_prefix(p: &Pattern, limit: usize) -> Result<(), String> {
    let h = p.horizon().to_string().parse::<usize>().map_or(limit, |h| h.min(limit));
    let mut ones = vec![0usize; h + 1];
    for i in 1..=h {
        let bit = p.bit(&BigUint::from(i)).map_err(|e| e.to_string())? as usize;
        ones[i] = ones[i - 1] + bit;
    }
    for n in 1..=h {
        for k in 1..=h - n {
            if ones[n] > ones[k + n] - ones[k] {
                return Err(format!("k = {k}, n = {n}"));
            }
        }
    }
    Ok(())
}

fn ac8(states: &[(String, EncoderState)]) -> Verdict {
    let mut patterns = 0;
    for (name, st) in states {
        for j in 0..st.lattice().len() {
            let p = st.pattern(j);
            let tag = format!("{name}/{}", st.lattice().name(j));
            check_shift_minimal(p).map_err(|e| format!("{tag}: {e}"))?;
            oracle_shift(p).map_err(|e| format!("{tag}: oracle: {e}"))?;
            brute_shift_prefix(p, 2048).map_err(|e| format!("{tag}: prefix: {e}"))?;
            let probe = OrliczFunction::new(st.params().clone(), p.clone());
            ensure(probe.pattern() == p, || tag.clone())?;
            patterns += 1;
        }
    }
    Ok(format!("{patterns} patterns pass the validator, the zero-pair oracle and a 2048-position brute force"))
}

fn main() {
    let mut failed = 0;
    let mut line = |id: &str, what: &str, limit: Option<Duration>, t: Instant, v: Verdict| {
        let el = t.elapsed();
        let v = match (v, limit) {
            (Ok(_), Some(l)) if el > l => Err(format!("took {el:.1?}, limit {l:?}")),
            (v, _) => v,
        };
        match v {
            Ok(msg) => println!("PASS {id} {what}: {msg} ({:.2} s)", el.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id} {what}: {msg} ({:.2} s)", el.as_secs_f64())
            }
        }
    };
    let mut states = Vec::new();

    let t = Instant::now();
    line("AC1", "submultiplicative extensions", Some(Duration::from_secs(30)), t, ac1());
    let t = Instant::now();
    line("AC2", "incomparable family m=4 N<=100", Some(Duration::from_secs(60)), t, ac2());
    let t = Instant::now();
    line("AC3", "power-set diagrams", Some(Duration::from_secs(10)), t, ac3());
    let t = Instant::now();
    line("AC4", "lattice encoder pipeline", None, t, ac4(&mut states));
    let t = Instant::now();
    line("AC5", "Orlicz norms", None, t, ac5(&states));
    let t = Instant::now();
    line("AC6", "l_p-sum calculus", None, t, ac6(&mut states));
    let t = Instant::now();
    line("AC7", "finite chain of l_p", None, t, ac7());
    let t = Instant::now();
    line("AC8", "shift minimality of encoder patterns", None, t, ac8(&states));

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
