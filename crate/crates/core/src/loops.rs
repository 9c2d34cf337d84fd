//! Loop schemas: Markov shifts given by a multiset of first-return loops at a
//! single base vertex, with a closed-form tail.
//!
//! The first-return generating function `Phi(x) = sum c_n x^n` decides
//! everything: its radius `R` fixes the entropy when `Phi(R) < 1` (transient),
//! otherwise the root of `Phi(r) = 1` does, and `r < R` gives positive
//! recurrence.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::entropy::ExtendedEntropy;
use crate::error::{invalid, Error, Result};
use crate::interval::{Interval, Side};

/// Tail terms beyond this size are bracketed instead of computed exactly.
const EXACT_TERM_BOUND: f64 = 1.152921504606847e18; // 2^60
/// Hard cap on the number of tail terms summed individually.
const MAX_TERMS: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailKind {
    /// `c = floor(a k^j)`
    Geometric,
    /// `c = floor(a k^j / j^d)`
    Damped(u32),
}

/// Closed-form family of loop counts on lengths `n = step * j`, `n >= n0`.
///
/// With `step = 1` this is `c_n = floor(a k^n)` or `floor(a k^n / n^d)`.
/// A larger step spreads the family over multiples of `step`, with `j = n/step`
/// playing the role of `n` in the formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub kind: TailKind,
    pub a: BigRational,
    pub k: BigRational,
    pub n0: u64,
    pub step: u64,
}

impl Tail {
    pub fn geometric(a: BigRational, k: BigRational, n0: u64) -> Tail {
        Tail { kind: TailKind::Geometric, a, k, n0, step: 1 }
    }

    pub fn damped(a: BigRational, k: BigRational, d: u32, n0: u64) -> Tail {
        Tail { kind: TailKind::Damped(d), a, k, n0, step: 1 }
    }

    pub fn with_step(mut self, step: u64) -> Tail {
        self.step = step;
        self
    }

    fn d(&self) -> u32 {
        match self.kind {
            TailKind::Geometric => 0,
            TailKind::Damped(d) => d,
        }
    }

    /// First index `j` covered by the tail.
    pub fn first_j(&self) -> u64 {
        self.n0.div_ceil(self.step).max(1)
    }

    pub fn covers(&self, n: u64) -> bool {
        n % self.step == 0 && n / self.step >= self.first_j()
    }

    /// Exact `floor(a k^j / j^d)`.
    pub fn term(&self, j: u64) -> BigInt {
        let kj = pow_rational(&self.k, j);
        let jd = BigInt::from(j).pow(self.d());
        let v = &self.a * kj / BigRational::from_integer(jd);
        v.floor().to_integer()
    }

    fn a_interval(&self) -> Interval {
        Interval::from_rational(&self.a)
    }
}

fn pow_rational(q: &BigRational, e: u64) -> BigRational {
    BigRational::new(q.numer().pow(e as u32), q.denom().pow(e as u32))
}

/// A loop schema with base vertex name, explicit counts and optional tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSchema {
    base: String,
    explicit: BTreeMap<u64, u64>,
    tail: Option<Tail>,
}

/// Value of the generating function: a certified enclosure, or divergence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiValue {
    Finite(Interval),
    Infinity,
}

impl PhiValue {
    pub fn side_of_one(&self) -> Side {
        match self {
            PhiValue::Infinity => Side::Above,
            PhiValue::Finite(i) => i.compare_to(1.0),
        }
    }
}

impl fmt::Display for PhiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiValue::Infinity => write!(f, "inf"),
            PhiValue::Finite(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Recurrence {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Recurrence::PositiveRecurrent => "positive-recurrent",
            Recurrence::NullRecurrent => "null-recurrent",
            Recurrence::Transient => "transient",
        };
        f.write_str(s)
    }
}

/// Certified data behind a recurrence verdict.
#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    /// Radius of convergence; `None` when `Phi` is a polynomial.
    pub radius: Option<Interval>,
    /// Least positive root of `Phi(x) = 1`, when there is one.
    pub root: Option<Interval>,
    pub phi_at_radius: Option<PhiValue>,
    /// `x Phi'(x)` at the root.
    pub mean_return: Option<PhiValue>,
}

/// Outcome of classifying a loop schema.
#[derive(Clone, Debug)]
pub struct Classification {
    pub entropy: ExtendedEntropy,
    pub recurrence: Recurrence,
    pub period: u64,
    pub mme: bool,
    pub report: RecurrenceReport,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Weight {
    One,
    Length,
}

impl LoopSchema {
    pub fn new(base: impl Into<String>, explicit: BTreeMap<u64, u64>, tail: Option<Tail>) -> Result<LoopSchema> {
        let explicit: BTreeMap<u64, u64> = explicit.into_iter().filter(|&(_, c)| c > 0).collect();
        if explicit.contains_key(&0) {
            return invalid("loop lengths must be positive");
        }
        if let Some(t) = &tail {
            if !t.a.is_positive() {
                return invalid("tail coefficient a must be positive");
            }
            if t.k <= BigRational::one() {
                return invalid("tail ratio k must exceed 1");
            }
            if t.step == 0 || t.n0 == 0 {
                return invalid("tail start and step must be positive");
            }
            if let Some((&n, _)) = explicit.iter().find(|(&n, _)| t.covers(n)) {
                return invalid(format!("explicit count at length {n} overlaps the tail range"));
            }
        } else if explicit.is_empty() {
            return invalid("loop schema has no loops");
        }
        Ok(LoopSchema { base: base.into(), explicit, tail })
    }

    /// Finitely many explicit loops and no tail.
    pub fn finite(base: impl Into<String>, counts: &[(u64, u64)]) -> Result<LoopSchema> {
        LoopSchema::new(base, counts.iter().copied().collect(), None)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn explicit(&self) -> &BTreeMap<u64, u64> {
        &self.explicit
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn with_base(&self, base: impl Into<String>) -> LoopSchema {
        LoopSchema { base: base.into(), ..self.clone() }
    }

    /// Number of first-return loops of length `n`.
    pub fn count(&self, n: u64) -> BigInt {
        if let Some(&c) = self.explicit.get(&n) {
            return BigInt::from(c);
        }
        match &self.tail {
            Some(t) if t.covers(n) => t.term(n / t.step),
            _ => BigInt::zero(),
        }
    }

    /// Total number of loops when finite.
    pub fn total_loops(&self) -> Option<u64> {
        if self.tail.is_some() {
            None
        } else {
            Some(self.explicit.values().sum())
        }
    }

    /// The schema keeps only tail terms with `n <= n_max`, as explicit counts.
    pub fn truncate(&self, n_max: u64) -> LoopSchema {
        let mut explicit = self.explicit.clone();
        explicit.retain(|&n, _| n <= n_max);
        if let Some(t) = &self.tail {
            let mut j = t.first_j();
            while j * t.step <= n_max {
                if let Some(c) = t.term(j).to_u64() {
                    if c > 0 {
                        explicit.insert(j * t.step, c);
                    }
                }
                j += 1;
            }
        }
        LoopSchema { base: self.base.clone(), explicit, tail: None }
    }

    /// gcd of the lengths carrying at least one loop.
    pub fn period(&self) -> u64 {
        let mut g = 0u64;
        for &n in self.explicit.keys() {
            g = g.gcd(&n);
        }
        if let Some(t) = &self.tail {
            // Tail counts grow without bound, so consecutive j's are eventually
            // all in the support and contribute exactly `step`.
            g = g.gcd(&t.step);
            let mut j = t.first_j();
            while t.term(j).is_zero() {
                j += 1;
            }
            g = g.gcd(&(j * t.step));
        }
        g
    }

    /// Radius of convergence of `Phi`, or `None` when there is no tail.
    pub fn radius(&self) -> Option<Interval> {
        let t = self.tail.as_ref()?;
        let lnk = Interval::from_rational(&t.k).ln();
        Some((-(lnk / Interval::from_u64(t.step))).exp())
    }

    /// Certified enclosure of `Phi(x)` for rational `x > 0`.
    pub fn phi(&self, x: &BigRational) -> PhiValue {
        self.eval(x, Weight::One)
    }

    /// Certified enclosure of `x Phi'(x) = sum n c_n x^n`.
    pub fn phi_weighted(&self, x: &BigRational) -> PhiValue {
        self.eval(x, Weight::Length)
    }

    fn explicit_part(&self, x: Interval, weight: Weight) -> Interval {
        let mut s = Interval::ZERO;
        for (&n, &c) in &self.explicit {
            let mut term = Interval::from_u64(c) * x.powi(n);
            if weight == Weight::Length {
                term = term * Interval::from_u64(n);
            }
            s = s + term;
        }
        s
    }

    fn eval(&self, x: &BigRational, weight: Weight) -> PhiValue {
        assert!(x.is_positive(), "generating function evaluated at non-positive x");
        let xi = Interval::from_rational(x);
        let mut total = self.explicit_part(xi, weight);
        let Some(t) = &self.tail else {
            return PhiValue::Finite(total);
        };
        let w_exact = pow_rational(x, t.step);
        let z_exact = &w_exact * &t.k;
        match z_exact.cmp(&BigRational::one()) {
            std::cmp::Ordering::Greater => return PhiValue::Infinity,
            std::cmp::Ordering::Equal => return self.eval_at_radius(weight, Some(xi)),
            std::cmp::Ordering::Less => {}
        }
        let w = Interval::from_rational(&w_exact);
        let z = Interval::from_rational(&z_exact);
        let (exact, next_j) = exact_prefix(t, |j| w.powi(j), weight);
        total = total + exact;
        total = total + bracketed_tail(t, z, w, next_j, weight);
        PhiValue::Finite(total)
    }

    /// `Phi` (or `x Phi'`) at the radius of convergence.
    pub fn phi_at_radius(&self) -> Option<PhiValue> {
        self.tail.as_ref()?;
        Some(self.eval_at_radius(Weight::One, None))
    }

    fn eval_at_radius(&self, weight: Weight, x: Option<Interval>) -> PhiValue {
        let t = self.tail.as_ref().expect("radius needs a tail");
        let d = t.d();
        let needed = if weight == Weight::One { 2 } else { 3 };
        if d < needed {
            return PhiValue::Infinity;
        }
        let x = x.unwrap_or_else(|| self.radius().unwrap());
        let mut total = self.explicit_part(x, weight);
        // At the radius w = 1/k exactly, so the exact prefix is rational.
        let kinv = BigRational::one() / &t.k;
        let (exact, next_j) = exact_prefix(t, |j| Interval::from_rational(&pow_rational(&kinv, j)), weight);
        total = total + exact;
        // Remaining terms lie in [a s^e / j^(d-e) - k^-j s^e j^e, a s^e / j^(d-e)]
        // with e = 0 or 1 according to the weight.
        let e = if weight == Weight::Length { 1 } else { 0 };
        let dd = d - e;
        let a = t.a_interval();
        let s = if e == 1 { Interval::from_u64(t.step) } else { Interval::ONE };
        let mut j_end = next_j.max(1000);
        loop {
            let mut sum = Interval::ZERO;
            for j in next_j..=j_end {
                sum = sum + Interval::from_u64(j).powi(dd as u64).recip();
            }
            // Integral bounds on sum_{j > J} j^-dd.
            let ddm1 = Interval::from_u64(dd as u64 - 1);
            let upper_rem = (ddm1 * Interval::from_u64(j_end).powi(dd as u64 - 1)).recip();
            let lower_rem = (ddm1 * Interval::from_u64(j_end + 1).powi(dd as u64 - 1)).recip();
            let main = a * s * sum;
            let hi = main + a * s * upper_rem;
            let lo = main + a * s * lower_rem;
            // Floor errors: at most k^-j per term (times n for the weighted sum).
            let kin = Interval::from_rational(&kinv);
            let floor_err = floor_error_bound(kin, next_j, t.step, weight);
            let lo = (lo - floor_err).clamp_nonneg();
            let enclosure = total + lo.hull(&hi);
            let decided = enclosure.compare_to(1.0) != Side::Straddles;
            if decided || j_end >= MAX_TERMS || weight == Weight::Length {
                return PhiValue::Finite(enclosure);
            }
            j_end = (j_end * 10).min(MAX_TERMS);
        }
    }

    /// Decide the recurrence class and entropy.
    pub fn classify(&self) -> Result<Classification> {
        let period = self.period();
        if self.total_loops() == Some(1) {
            let n = *self.explicit.keys().next().unwrap();
            let x = Interval::ONE;
            return Ok(Classification {
                entropy: ExtendedEntropy::Zero,
                recurrence: Recurrence::PositiveRecurrent,
                period,
                mme: false,
                report: RecurrenceReport {
                    radius: None,
                    root: Some(x),
                    phi_at_radius: None,
                    mean_return: Some(PhiValue::Finite(Interval::from_u64(n))),
                },
            });
        }
        let radius = self.radius();
        let phi_r = self.phi_at_radius();
        if let Some(pr) = phi_r {
            match pr.side_of_one() {
                Side::Below => {
                    let t = self.tail.as_ref().unwrap();
                    // Entropy is pinned by the radius: ln(k) / step.
                    let entropy = ExtendedEntropy::IntervalApprox(
                        Interval::from_rational(&t.k).ln() / Interval::from_u64(t.step),
                    );
                    return Ok(Classification {
                        entropy,
                        recurrence: Recurrence::Transient,
                        period,
                        mme: false,
                        report: RecurrenceReport { radius, root: None, phi_at_radius: phi_r, mean_return: None },
                    });
                }
                Side::Straddles => {
                    return Err(Error::Undecidable(format!(
                        "Phi at the radius encloses 1: {pr}"
                    )));
                }
                Side::Above => {}
            }
        }
        // Phi(R) > 1 (or no tail): the root r of Phi = 1 lies strictly inside.
        let root = self.find_root(radius)?;
        let entropy = ExtendedEntropy::IntervalApprox(-(root.ln()));
        let lo = BigRational::from_float(root.lo()).unwrap();
        let hi = BigRational::from_float(root.hi()).unwrap();
        let mean_return = match (self.phi_weighted(&lo), self.phi_weighted(&hi)) {
            (PhiValue::Finite(a), PhiValue::Finite(b)) => PhiValue::Finite(a.hull(&b)),
            _ => PhiValue::Infinity,
        };
        Ok(Classification {
            entropy,
            recurrence: Recurrence::PositiveRecurrent,
            period,
            mme: true,
            report: RecurrenceReport { radius, root: Some(root), phi_at_radius: phi_r, mean_return: Some(mean_return) },
        })
    }

    /// Bisection for the least positive root of `Phi(x) = 1`.
    fn find_root(&self, radius: Option<Interval>) -> Result<Interval> {
        let side = |x: f64| -> Side {
            let q = BigRational::from_float(x).unwrap();
            self.phi(&q).side_of_one()
        };
        let mut lo = 0.0f64;
        let mut hi = match radius {
            Some(r) => r.hi(),
            None => 1.0,
        };
        // With no tail Phi(1) is the number of loops, at least 2 here.
        if side(hi) != Side::Above {
            return Err(Error::Undecidable("no certified upper bracket for Phi = 1".into()));
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match side(mid) {
                Side::Below => lo = mid,
                Side::Above => hi = mid,
                Side::Straddles => {
                    // The enclosure of Phi is the limiting factor; tighten
                    // each end separately as far as certification allows.
                    let (a, b) = (lo, mid);
                    lo = tighten(&side, a, b, Side::Below, true);
                    let (a, b) = (mid, hi);
                    hi = tighten(&side, a, b, Side::Above, false);
                    break;
                }
            }
        }
        if lo <= 0.0 {
            return Err(Error::Undecidable("root of Phi = 1 not separated from 0".into()));
        }
        Ok(Interval::new(lo, hi))
    }
}

/// Move a certified endpoint as close as possible to the uncertain region.
fn tighten(side: &impl Fn(f64) -> Side, mut good: f64, mut bad: f64, want: Side, is_low: bool) -> f64 {
    if !is_low {
        std::mem::swap(&mut good, &mut bad);
    }
    for _ in 0..60 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if side(mid) == want {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Sum of the exactly computed tail terms, and the first index not covered.
fn exact_prefix(t: &Tail, wpow: impl Fn(u64) -> Interval, weight: Weight) -> (Interval, u64) {
    let mut sum = Interval::ZERO;
    let mut j = t.first_j();
    let d = t.d();
    let mut kj = pow_rational(&t.k, j);
    loop {
        let v = &t.a * &kj / BigRational::from_integer(BigInt::from(j).pow(d));
        let f = v.floor().to_integer();
        let fi = Interval::from_bigint(&f);
        let mut term = fi * wpow(j);
        if weight == Weight::Length {
            term = term * Interval::from_u64(j * t.step);
        }
        sum = sum + term;
        j += 1;
        kj *= &t.k;
        if fi.lo() > EXACT_TERM_BOUND || j - t.first_j() > 4096 {
            break;
        }
    }
    (sum, j)
}

/// Sum over `j >= start` of the floored tail terms times `w^j` (times `n` for
/// the weighted sum), for `z = w k < 1`.
fn bracketed_tail(t: &Tail, z: Interval, w: Interval, start: u64, weight: Weight) -> Interval {
    let a = t.a_interval();
    let d = t.d() as u64;
    let step = Interval::from_u64(t.step);
    let mut sum = Interval::ZERO;
    let mut zj = z.powi(start);
    let mut j = start;
    let one_minus_z = Interval::ONE - z;
    loop {
        let mut term = a * zj / Interval::from_u64(j).powi(d);
        if weight == Weight::Length {
            term = term * step * Interval::from_u64(j);
        }
        sum = sum + term;
        j += 1;
        if (j - start) % 64 == 0 {
            zj = z.powi(j);
        } else {
            zj = zj * z;
        }
        // Remainder bound for terms j, j+1, ...
        let rem = remainder_bound(a, z, zj, one_minus_z, j, d, step, weight);
        if rem.hi() <= 1e-18 * sum.lo().max(1e-300) || j - start >= MAX_TERMS || zj.hi() == 0.0 {
            let upper = sum + rem;
            let lower = (sum - floor_error_bound(w, start, t.step, weight)).clamp_nonneg();
            return Interval::new(lower.lo(), upper.hi());
        }
    }
}

/// Upper bound on `sum_{i >= j} a z^i / i^d` (times `s i` when weighted),
/// given `zj = z^j`.
#[allow(clippy::too_many_arguments)]
fn remainder_bound(
    a: Interval,
    z: Interval,
    zj: Interval,
    one_minus_z: Interval,
    j: u64,
    d: u64,
    step: Interval,
    weight: Weight,
) -> Interval {
    let ji = Interval::from_u64(j);
    match weight {
        Weight::One => {
            // i^-d <= j^-d for i >= j.
            a * zj / (ji.powi(d) * one_minus_z)
        }
        Weight::Length => {
            if d >= 1 {
                // i^(1-d) <= j^(1-d)
                a * step * zj / (ji.powi(d - 1) * one_minus_z)
            } else {
                // sum_{i>=j} i z^i = z^j (j - (j-1) z) / (1-z)^2
                let num = ji - (ji - Interval::ONE) * z;
                a * step * zj * num / one_minus_z.sqr()
            }
        }
    }
}

/// Bound on the total floor error `sum_{j >= start} w^j` (times `s j`).
fn floor_error_bound(w: Interval, start: u64, step: u64, weight: Weight) -> Interval {
    let one_minus_w = Interval::ONE - w;
    let wj = w.powi(start);
    match weight {
        Weight::One => wj / one_minus_w,
        Weight::Length => {
            let ji = Interval::from_u64(start);
            Interval::from_u64(step) * wj * (ji - (ji - Interval::ONE) * w) / one_minus_w.sqr()
        }
    }
}

/// One row of a loop-count table.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopCount {
    pub n: u64,
    pub count: BigUint,
    /// `(1/n) ln count`, absent when the count is zero.
    pub rate: Option<f64>,
}

/// Natural logarithm of a big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Loop counts `L(n)` from first-return counts `f(m)`: `L(n) = sum f(m) L(n-m)`.
pub fn loops_from_first_returns(first: &[BigUint], l_max: usize) -> Vec<LoopCount> {
    let mut l = vec![BigUint::zero(); l_max + 1];
    l[0] = BigUint::one();
    for n in 1..=l_max {
        let mut s = BigUint::zero();
        for m in 1..=n {
            if m < first.len() && !first[m].is_zero() && !l[n - m].is_zero() {
                s += &first[m] * &l[n - m];
            }
        }
        l[n] = s;
    }
    to_rows(l)
}

pub(crate) fn to_rows(l: Vec<BigUint>) -> Vec<LoopCount> {
    l.into_iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| {
            let rate = if c.is_zero() { None } else { Some(ln_biguint(&c) / n as f64) };
            LoopCount { n: n as u64, count: c, rate }
        })
        .collect()
}

/// Loop counts at the base of a schema for lengths `1..=l_max`.
pub fn schema_loop_counts(s: &LoopSchema, l_max: usize) -> Vec<LoopCount> {
    let mut first = vec![BigUint::zero(); l_max + 1];
    for (n, f) in first.iter_mut().enumerate().skip(1) {
        *f = s.count(n as u64).to_biguint().unwrap_or_default();
    }
    loops_from_first_returns(&first, l_max)
}

/// Growth-rate estimate from a loop-count table: the log-ratio of the last two
/// nonzero counts that are `period` apart, divided by `period`.
pub fn loop_growth_estimate(rows: &[LoopCount], period: u64) -> Option<f64> {
    let p = period.max(1) as usize;
    for i in (p..rows.len()).rev() {
        let (a, b) = (&rows[i], &rows[i - p]);
        if !a.count.is_zero() && !b.count.is_zero() {
            return Some((ln_biguint(&a.count) - ln_biguint(&b.count)) / p as f64);
        }
    }
    None
}

impl fmt::Display for LoopSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "at {}", self.base)?;
        for (n, c) in &self.explicit {
            writeln!(f, "count {n} {c}")?;
        }
        if let Some(t) = &self.tail {
            match t.kind {
                TailKind::Geometric => write!(f, "tail geometric {} {} from {}", t.a, t.k, t.n0)?,
                TailKind::Damped(d) => write!(f, "tail damped {} {} {} from {}", t.a, t.k, d, t.n0)?,
            }
            if t.step != 1 {
                write!(f, " step {}", t.step)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn geometric_example() -> LoopSchema {
        LoopSchema::new("v", BTreeMap::new(), Some(Tail::geometric(q(1, 2), q(2, 1), 1))).unwrap()
    }

    fn damped_example() -> LoopSchema {
        LoopSchema::new("v", BTreeMap::new(), Some(Tail::damped(q(1, 3), q(2, 1), 2, 1))).unwrap()
    }

    #[test]
    fn counts_follow_the_formula() {
        let g = geometric_example();
        for n in 1..10 {
            assert_eq!(g.count(n), BigInt::from(1u64 << (n - 1)));
        }
        let d = damped_example();
        assert_eq!(d.count(1), BigInt::zero());
        assert_eq!(d.count(10), BigInt::from(1024 / 300));
    }

    #[test]
    fn single_loop_evaluation() {
        let s = LoopSchema::finite("v", &[(1, 1)]).unwrap();
        match s.phi(&q(1, 2)) {
            PhiValue::Finite(i) => assert!(i.contains(0.5) && i.width() < 1e-15),
            _ => panic!(),
        }
    }

    #[test]
    fn geometric_closed_form() {
        let g = geometric_example();
        // x / (1 - 2x) at x = 1/3 is 1.
        match g.phi(&q(1, 3)) {
            PhiValue::Finite(i) => assert!(i.contains(1.0) && i.width() < 1e-12, "{i}"),
            _ => panic!(),
        }
        assert_eq!(g.phi(&q(1, 2)), PhiValue::Infinity);
        assert_eq!(g.phi(&q(3, 4)), PhiValue::Infinity);
    }

    #[test]
    fn phi_is_increasing() {
        let d = damped_example();
        let a = match d.phi(&q(2, 5)) {
            PhiValue::Finite(i) => i,
            _ => panic!(),
        };
        let b = match d.phi(&q(9, 20)) {
            PhiValue::Finite(i) => i,
            _ => panic!(),
        };
        assert!(a.hi() < b.lo());
    }

    #[test]
    fn classify_examples() {
        let c = LoopSchema::finite("v", &[(1, 1)]).unwrap().classify().unwrap();
        assert!(c.entropy.is_zero());
        assert_eq!(c.recurrence, Recurrence::PositiveRecurrent);
        assert_eq!(c.period, 1);

        let c = geometric_example().classify().unwrap();
        assert_eq!(c.recurrence, Recurrence::PositiveRecurrent);
        assert!(c.mme);
        let e = c.entropy.enclosure().unwrap();
        assert!((e.mid() - 3f64.ln()).abs() < 1e-9, "{e}");
        assert!(e.width() < 1e-12, "{e}");

        let c = damped_example().classify().unwrap();
        assert_eq!(c.recurrence, Recurrence::Transient);
        assert!(!c.mme);
        let e = c.entropy.enclosure().unwrap();
        assert!((e.mid() - 2f64.ln()).abs() < 1e-9);
        match c.report.phi_at_radius.unwrap() {
            PhiValue::Finite(i) => assert!(i.hi() < 0.548 + 1e-3, "{i}"),
            _ => panic!(),
        }
    }

    #[test]
    fn periods() {
        assert_eq!(LoopSchema::finite("v", &[(4, 1), (6, 2)]).unwrap().period(), 2);
        let t = Tail::damped(q(1, 3), q(9, 1), 2, 3).with_step(3);
        let s = LoopSchema::new("v", BTreeMap::new(), Some(t)).unwrap();
        assert_eq!(s.period(), 3);
    }

    #[test]
    fn overlap_rejected() {
        let t = Tail::geometric(q(1, 2), q(2, 1), 3);
        assert!(LoopSchema::new("v", [(5, 1)].into_iter().collect(), Some(t.clone())).is_err());
        assert!(LoopSchema::new("v", [(2, 1)].into_iter().collect(), Some(t)).is_ok());
    }

    #[test]
    fn loop_counts_match_growth() {
        let rows = schema_loop_counts(&geometric_example(), 60);
        // L(n) = 3^(n-1) for c_n = 2^(n-1).
        assert_eq!(rows[4].count, BigUint::from(81u32));
        let est = loop_growth_estimate(&rows, 1).unwrap();
        assert!((est - 3f64.ln()).abs() < 1e-9);
    }
}
