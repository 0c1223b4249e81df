//! Piecewise-linear, concave, strictly increasing functions on `[1, n0]`
//! with exact rational breakpoints, and the submultiplicativity checker.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwlError {
    #[error("a function needs at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("{breakpoints} breakpoints but {values} values")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("first breakpoint must be 1, got {0}")]
    BadStart(Rational),
    #[error("breakpoints not strictly increasing at index {0}")]
    AbscissaeNotIncreasing(usize),
    #[error("values not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("slopes increase at breakpoint index {0}, so the function is not concave")]
    NotConcave(usize),
    #[error("domain end {0} is below 2")]
    DomainTooShort(Rational),
    #[error("{x} lies outside the domain [1, {end}]")]
    OutOfDomain { x: Rational, end: Rational },
    #[error("function is not the identity on [1, 2]")]
    NotNormalized,
    #[error("csv: {0}")]
    Csv(String),
}

/// A piecewise-linear function given by its breakpoints `(x_i, S(x_i))`.
#[derive(Clone, PartialEq, Eq)]
pub struct PwlFunction {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    slopes: Vec<Rational>,
}

impl std::fmt::Debug for PwlFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(self.xs.iter().zip(&self.ys))
            .finish()
    }
}

impl PwlFunction {
    /// Builds and fully validates: start at 1, strictly increasing abscissae
    /// and values, nonincreasing slopes, domain end at least 2.
    pub fn new(xs: Vec<Rational>, ys: Vec<Rational>) -> Result<Self, PwlError> {
        let f = Self::from_breakpoints_unchecked(xs, ys)?;
        f.validate()?;
        Ok(f)
    }

    /// Only checks what evaluation needs: matching lengths and strictly
    /// increasing abscissae.
    pub fn from_breakpoints_unchecked(xs: Vec<Rational>, ys: Vec<Rational>) -> Result<Self, PwlError> {
        if xs.len() != ys.len() {
            return Err(PwlError::LengthMismatch { breakpoints: xs.len(), values: ys.len() });
        }
        if xs.len() < 2 {
            return Err(PwlError::TooFewBreakpoints(xs.len()));
        }
        for i in 1..xs.len() {
            if xs[i] <= xs[i - 1] {
                return Err(PwlError::AbscissaeNotIncreasing(i));
            }
        }
        let slopes = (1..xs.len())
            .map(|i| (&ys[i] - &ys[i - 1]) / (&xs[i] - &xs[i - 1]))
            .collect();
        Ok(PwlFunction { xs, ys, slopes })
    }

    pub fn from_points(points: &[(Rational, Rational)]) -> Result<Self, PwlError> {
        let (xs, ys) = points.iter().cloned().unzip();
        Self::new(xs, ys)
    }

    /// `S(x) = x` on `[1, 2]`.
    pub fn identity() -> Self {
        Self::new(vec![1.into(), 2.into()], vec![1.into(), 2.into()]).expect("identity is valid")
    }

    pub fn validate(&self) -> Result<(), PwlError> {
        if self.xs[0] != Rational::one() {
            return Err(PwlError::BadStart(self.xs[0].clone()));
        }
        for i in 1..self.ys.len() {
            if self.ys[i] <= self.ys[i - 1] {
                return Err(PwlError::NotIncreasing(i));
            }
        }
        for i in 1..self.slopes.len() {
            if self.slopes[i] > self.slopes[i - 1] {
                return Err(PwlError::NotConcave(i));
            }
        }
        if *self.domain_end() < Rational::from_int(2) {
            return Err(PwlError::DomainTooShort(self.domain_end().clone()));
        }
        Ok(())
    }

    /// `S(1) = 1` and `S(x) = x` on `[1, 2]`.
    pub fn is_normalized(&self) -> bool {
        let two = Rational::from_int(2);
        if self.xs[0] != Rational::one() || self.ys[0] != Rational::one() || *self.domain_end() < two {
            return false;
        }
        for (x, y) in self.xs.iter().zip(&self.ys) {
            if *x > two {
                break;
            }
            if x != y {
                return false;
            }
        }
        self.eval(&two).map(|v| v == two).unwrap_or(false)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.ys
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain_end(&self) -> &Rational {
        self.xs.last().expect("at least two breakpoints")
    }

    pub fn value_at_end(&self) -> &Rational {
        self.ys.last().expect("at least two breakpoints")
    }

    /// Largest numerator or denominator size over all breakpoints, in bits.
    pub fn max_bits(&self) -> u64 {
        self.xs.iter().chain(&self.ys).map(Rational::bits).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, PwlError> {
        if *x < self.xs[0] || x > self.domain_end() {
            return Err(PwlError::OutOfDomain { x: x.clone(), end: self.domain_end().clone() });
        }
        Ok(self.eval_in_domain(x))
    }

    fn eval_in_domain(&self, x: &Rational) -> Rational {
        // index of the segment [xs[i], xs[i+1]] containing x
        let i = self.xs.partition_point(|b| b <= x).saturating_sub(1);
        if self.xs[i] == *x {
            return self.ys[i].clone();
        }
        &self.ys[i] + &self.slopes[i] * (x - &self.xs[i])
    }

    /// Slope of the last segment, i.e. the best `c` with
    /// `S(x) >= S(x - h) + c h` once concavity is confirmed.
    pub fn final_slope(&self) -> &Rational {
        self.slopes.last().expect("at least one segment")
    }

    pub fn min_final_slope(&self) -> Result<Rational, PwlError> {
        for i in 1..self.ys.len() {
            if self.ys[i] <= self.ys[i - 1] {
                return Err(PwlError::NotIncreasing(i));
            }
        }
        for i in 1..self.slopes.len() {
            if self.slopes[i] > self.slopes[i - 1] {
                return Err(PwlError::NotConcave(i));
            }
        }
        Ok(self.final_slope().clone())
    }

    /// Restriction to `[1, end]`, adding a breakpoint at `end` if needed.
    pub fn restrict_to(&self, end: &Rational) -> Result<PwlFunction, PwlError> {
        let value = self.eval(end)?;
        let keep = self.xs.partition_point(|b| b < end);
        let mut xs: Vec<Rational> = self.xs[..keep].to_vec();
        let mut ys: Vec<Rational> = self.ys[..keep].to_vec();
        xs.push(end.clone());
        ys.push(value);
        Self::from_breakpoints_unchecked(xs, ys)
    }

    /// Appends the segment from the current end to `(x, y)` with the given
    /// slope. Callers are responsible for consistency and concavity.
    pub(crate) fn push_segment(&mut self, x: Rational, y: Rational, slope: Rational) {
        // a segment with the same slope as the previous one just moves the end
        if self.slopes.last() == Some(&slope) && self.xs.len() > 2 {
            self.xs.pop();
            self.ys.pop();
        } else {
            self.slopes.push(slope);
        }
        self.xs.push(x);
        self.ys.push(y);
    }

    /// Writes the table with header `x,S(x)`, every entry as `p/q`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PwlError> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| PwlError::Csv(e.to_string());
        wr.write_record(["x", "S(x)"]).map_err(io)?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            wr.write_record([x.to_fraction_string(), y.to_fraction_string()]).map_err(io)?;
        }
        wr.flush().map_err(|e| PwlError::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a table written by [`write_csv`](Self::write_csv) and validates it.
    pub fn read_csv<R: Read>(r: R) -> Result<PwlFunction, PwlError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers().map_err(|e| PwlError::Csv(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "S(x)" {
            return Err(PwlError::Csv(format!("expected header `x,S(x)`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| PwlError::Csv(e.to_string()))?;
            let parse = |s: &str| {
                s.parse::<Rational>()
                    .map_err(|e| PwlError::Csv(format!("row {}: {e}", line + 2)))
            };
            xs.push(parse(&rec[0])?);
            ys.push(parse(&rec[1])?);
        }
        PwlFunction::new(xs, ys)
    }

    pub fn from_csv_str(s: &str) -> Result<PwlFunction, PwlError> {
        Self::read_csv(s.as_bytes())
    }
}

/// A sampled pair where `S(xy) > S(x) S(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub x: Rational,
    pub y: Rational,
    /// `S(xy)`
    pub lhs: Rational,
    /// `S(x) S(y)`
    pub rhs: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmultReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl SubmultReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    /// Points per axis of the log-uniform grid.
    pub grid_resolution: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { grid_resolution: 256 }
    }
}

pub fn check_submultiplicative(f: &PwlFunction) -> SubmultReport {
    check_submultiplicative_with(f, CheckConfig::default())
}

/// Tests `S(xy) <= S(x) S(y)` exactly on the critical pairs and on a
/// log-uniform grid.
///
/// Critical pairs have one coordinate at a breakpoint and the other at a
/// breakpoint, a quotient `b/b'` of breakpoints or a quotient `b/S(b')`.
/// Violations come back sorted by `(x, y)`.
pub fn check_submultiplicative_with(f: &PwlFunction, config: CheckConfig) -> SubmultReport {
    let one = Rational::one();
    let end = f.domain_end().clone();
    let xs = f.breakpoints();

    let mut candidates: Vec<Rational> = xs.to_vec();
    for b in xs {
        for d in xs.iter().chain(f.values()) {
            if d <= b {
                let r = b / d;
                if r >= one && r <= end {
                    candidates.push(r);
                }
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let grid = log_grid(&end, config.grid_resolution);

    // Canonical rationals pay a gcd per operation, which dominates once
    // breakpoints run to thousands of bits; the comparisons only need
    // cross-multiplication, so large inputs go through unreduced fractions.
    if f.max_bits() <= SPLIT_BITS {
        check_pairs(f, &candidates, &grid, |x: &Rational| f.eval_in_domain(x))
    } else {
        let table = FracTable::new(f);
        check_pairs(f, &candidates, &grid, |x: &Frac| table.eval(x))
    }
}

const SPLIT_BITS: u64 = 512;

trait Exact: Sized + Send + Sync {
    fn of(x: &Rational) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn gt(&self, o: &Self) -> bool;
    fn to_rational(&self) -> Rational;
}

impl Exact for Rational {
    fn of(x: &Rational) -> Self {
        x.clone()
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn gt(&self, o: &Self) -> bool {
        self > o
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

fn check_pairs<T: Exact>(
    f: &PwlFunction,
    candidates: &[Rational],
    grid: &[Rational],
    eval: impl Fn(&T) -> T + Sync,
) -> SubmultReport {
    let end = f.domain_end();
    let end_t = T::of(end);
    let xs = f.breakpoints();
    let lift = |v: &[Rational]| -> Vec<T> { v.iter().map(T::of).collect() };
    let with_values = |v: &[Rational]| -> (Vec<T>, Vec<T>) {
        let pts = lift(v);
        let vals = pts.iter().map(&eval).collect();
        (pts, vals)
    };
    let (cand, cand_vals) = with_values(candidates);
    let (grid_t, grid_vals) = with_values(grid);
    let (xs_t, bp_vals) = (lift(xs), lift(f.values()));

    let check = |x: &T, sx: &T, y: &T, sy: &T| -> Option<Violation> {
        let xy = x.mul(y);
        if xy.gt(&end_t) {
            return None;
        }
        let lhs = eval(&xy);
        let rhs = sx.mul(sy);
        lhs.gt(&rhs).then(|| {
            let (x, y) = (x.to_rational(), y.to_rational());
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            Violation { x, y, lhs: lhs.to_rational(), rhs: rhs.to_rational() }
        })
    };

    let critical: Vec<(usize, Vec<Violation>)> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut n = 0;
            for (k, (c, sc)) in cand.iter().zip(&cand_vals).enumerate() {
                if &(&xs[i] * &candidates[k]) > end {
                    break;
                }
                n += 1;
                out.extend(check(&xs_t[i], &bp_vals[i], c, sc));
            }
            (n, out)
        })
        .collect();

    let sampled: Vec<(usize, Vec<Violation>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut n = 0;
            for j in i..grid.len() {
                if &(&grid[i] * &grid[j]) > end {
                    break;
                }
                n += 1;
                out.extend(check(&grid_t[i], &grid_vals[i], &grid_t[j], &grid_vals[j]));
            }
            (n, out)
        })
        .collect();

    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    for (n, v) in critical.into_iter().chain(sampled) {
        pairs_checked += n;
        violations.extend(v);
    }
    violations.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
    violations.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    SubmultReport { pairs_checked, violations }
}

/// Unreduced fraction `n / d` of integers, `d > 0`.
struct Frac {
    n: Rational,
    d: Rational,
}

impl Exact for Frac {
    fn of(x: &Rational) -> Frac {
        Frac { n: x.numer(), d: x.denom() }
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac { n: &self.n * &o.n, d: &self.d * &o.d }
    }

    fn gt(&self, o: &Frac) -> bool {
        &self.n * &o.d > &o.n * &self.d
    }

    fn to_rational(&self) -> Rational {
        &self.n / &self.d
    }
}

/// Segment data of a [`PwlFunction`] with each value split into numerator
/// and denominator, and the products needed per evaluation precomputed.
struct FracTable {
    xs: Vec<Frac>,
    /// `(y.n s.d, y.d s.n, y.d s.d)` per breakpoint.
    coef: Vec<(Rational, Rational, Rational)>,
}

impl FracTable {
    fn new(f: &PwlFunction) -> Self {
        let coef = (0..f.xs.len())
            .map(|i| {
                let y = Frac::of(&f.ys[i]);
                let s = Frac::of(&f.slopes[i.min(f.slopes.len() - 1)]);
                (&y.n * &s.d, &y.d * &s.n, &y.d * &s.d)
            })
            .collect();
        FracTable { xs: f.xs.iter().map(Frac::of).collect(), coef }
    }

    /// Same value as [`PwlFunction::eval_in_domain`], unreduced.
    fn eval(&self, x: &Frac) -> Frac {
        let i = self.xs.partition_point(|b| !b.gt(x)).saturating_sub(1);
        let b = &self.xs[i];
        let (a, c, d) = &self.coef[i];
        // y + s (x - b) = (a dx_d + c dx_n) / (d dx_d)
        let dx_n = &(&x.n * &b.d) - &(&b.n * &x.d);
        let dx_d = &x.d * &b.d;
        Frac { n: &(a * &dx_d) + &(c * &dx_n), d: d * &dx_d }
    }
}

/// `n` dyadic points spread log-uniformly over `[1, end]`, both ends included.
pub fn log_grid(end: &Rational, n: usize) -> Vec<Rational> {
    const FRAC_BITS: i64 = 40;
    let one = Rational::one();
    if n < 2 {
        return vec![one];
    }
    let span = end.log2_abs();
    let mut pts: Vec<Rational> = (0..n)
        .map(|i| {
            if i == 0 {
                return one.clone();
            }
            if i == n - 1 {
                return end.clone();
            }
            let t = span * i as f64 / (n - 1) as f64;
            let whole = t.floor();
            let mantissa = ((t - whole).exp2() * (FRAC_BITS as f64).exp2()).round() as i64;
            let x = Rational::from_int(mantissa) * Rational::pow2(whole as i64 - FRAC_BITS);
            x.max(one.clone()).min(end.clone())
        })
        .collect();
    pts.sort();
    pts.dedup();
    pts
}
