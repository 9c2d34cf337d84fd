//! The classification invariants: for every period `p`, the supremum `u(p)` of
//! component entropies over periods dividing `p`, and the number `eta(p)` of
//! components with a measure of maximal entropy attaining `(u(p), p)`.
//!
//! Two Markov shifts are almost-Borel isomorphic exactly when these agree.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::entropy::{EntropyOrdering, ExtendedEntropy};
use crate::error::{Error, Result};
use crate::loops::{LoopSchema, Tail};
use crate::presentation::{ComponentSummary, ShiftPresentation};

/// How many components attain a generator's entropy with an MME.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenCount {
    Count(u64),
    /// The supremum is approached by infinitely many components, never attained.
    Unattained,
}

impl GenCount {
    pub fn value(&self) -> u64 {
        match self {
            GenCount::Count(n) => *n,
            GenCount::Unattained => 0,
        }
    }
}

impl fmt::Display for GenCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenCount::Count(n) => write!(f, "{n}"),
            GenCount::Unattained => write!(f, "unattained"),
        }
    }
}

/// `u(q) >= h` for every multiple `q` of `p`, with `count` MME components at
/// exactly `(h, p)`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub p: u64,
    pub h: ExtendedEntropy,
    pub count: GenCount,
}

/// Canonical finite description of the invariant sequences.
#[derive(Clone, Debug, Default)]
pub struct InvariantPair {
    generators: Vec<Generator>,
}

/// Verdict of the isomorphism test.
#[derive(Clone, Debug)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    pub witness: Option<Witness>,
}

/// A period where the invariants differ.
#[derive(Clone, Debug)]
pub struct Witness {
    pub p: u64,
    pub u_a: ExtendedEntropy,
    pub eta_a: u64,
    pub u_b: ExtendedEntropy,
    pub eta_b: u64,
}

/// Outcome of the admissibility check, with the offending periods.
#[derive(Clone, Debug)]
pub struct Admissibility {
    pub admissible: bool,
    pub violations: Vec<(u64, String)>,
}

fn cmp(a: &ExtendedEntropy, b: &ExtendedEntropy, tol: f64) -> Result<EntropyOrdering> {
    match a.compare(b, tol) {
        EntropyOrdering::Inconclusive => Err(Error::Inconclusive {
            tol,
            detail: format!("cannot order entropies {} and {}", a.to_doc(), b.to_doc()),
        }),
        o => Ok(o),
    }
}

impl InvariantPair {
    pub fn empty() -> InvariantPair {
        InvariantPair::default()
    }

    /// Canonicalize an arbitrary list of generators.
    ///
    /// Generators at the same period are merged (the largest entropy wins and
    /// counts at that entropy add up); a generator is dropped when a proper
    /// divisor carries a larger entropy, or an equal one and it has no count.
    pub fn from_generators(gens: Vec<Generator>, tol: f64) -> Result<InvariantPair> {
        for g in &gens {
            if g.p == 0 {
                return Err(Error::Invalid("generator period must be positive".into()));
            }
        }
        let periods: BTreeSet<u64> = gens.iter().map(|g| g.p).collect();
        let mut merged: Vec<Generator> = Vec::new();
        for &p in &periods {
            let at_p: Vec<&Generator> = gens.iter().filter(|g| g.p == p).collect();
            let mut best = at_p[0].h.clone();
            for g in &at_p[1..] {
                if cmp(&g.h, &best, tol)? == EntropyOrdering::Greater {
                    best = g.h.clone();
                }
            }
            let mut count = 0u64;
            let mut attained = false;
            for g in &at_p {
                if cmp(&g.h, &best, tol)? == EntropyOrdering::Equal {
                    match g.count {
                        GenCount::Count(n) => {
                            count += n;
                            attained = true;
                        }
                        GenCount::Unattained => {}
                    }
                }
            }
            let count = if attained { GenCount::Count(count) } else { GenCount::Unattained };
            merged.push(Generator { p, h: best, count });
        }
        let mut keep = Vec::new();
        'outer: for g in &merged {
            for d in &merged {
                if d.p == g.p || g.p % d.p != 0 {
                    continue;
                }
                match cmp(&d.h, &g.h, tol)? {
                    EntropyOrdering::Greater => continue 'outer,
                    EntropyOrdering::Equal if g.count.value() == 0 => continue 'outer,
                    _ => {}
                }
            }
            if g.h.is_zero() && g.count.value() == 0 {
                continue;
            }
            keep.push(g.clone());
        }
        keep.sort_by(|a, b| a.p.cmp(&b.p).then(a.h.approx().total_cmp(&b.h.approx())));
        Ok(InvariantPair { generators: keep })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn periods(&self) -> Vec<u64> {
        self.generators.iter().map(|g| g.p).collect()
    }

    /// `u(p)`: the largest generator entropy over divisors of `p`, or zero.
    pub fn u_bar(&self, p: u64, tol: f64) -> Result<ExtendedEntropy> {
        let mut best = ExtendedEntropy::Zero;
        for g in &self.generators {
            if p % g.p == 0 && cmp(&g.h, &best, tol)? == EntropyOrdering::Greater {
                best = g.h.clone();
            }
        }
        Ok(best)
    }

    /// `eta(p)`: the count carried by the generator at exactly `p`.
    pub fn eta_bar(&self, p: u64) -> u64 {
        self.generators.iter().filter(|g| g.p == p).map(|g| g.count.value()).sum()
    }
}

/// The invariant pair of a disjoint union of components.
pub fn compute_u_eta(summaries: &[ComponentSummary], tol: f64) -> Result<InvariantPair> {
    let gens = summaries
        .iter()
        .map(|s| {
            if s.entropy.is_infinite() {
                return Err(Error::Invalid(format!("component {} has infinite entropy", s.source)));
            }
            let count = if s.limit {
                GenCount::Unattained
            } else {
                GenCount::Count(u64::from(s.mme))
            };
            Ok(Generator { p: s.period, h: s.entropy.clone(), count })
        })
        .collect::<Result<Vec<_>>>()?;
    InvariantPair::from_generators(gens, tol)
}

/// A generator asserting infinite `u` with a positive count is impossible.
pub fn check_admissible(pair: &InvariantPair) -> Admissibility {
    let mut violations = Vec::new();
    for g in pair.generators() {
        if g.h.is_infinite() && g.count.value() > 0 {
            violations.push((g.p, format!("u({}) is infinite but eta({}) = {}", g.p, g.p, g.count)));
        }
    }
    Admissibility { admissible: violations.is_empty(), violations }
}

/// Every lcm of a nonempty subset of `periods`.
fn lcm_closure(periods: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut out: BTreeSet<u64> = BTreeSet::new();
    for &p in periods {
        let mut add = vec![p];
        for &s in &out {
            add.push(s.lcm(&p));
        }
        out.extend(add);
    }
    out
}

/// Decide almost-Borel isomorphism from the invariants.
pub fn decide_almost_borel_iso(a: &InvariantPair, b: &InvariantPair, tol: f64) -> Result<IsoVerdict> {
    let periods: BTreeSet<u64> = a.periods().into_iter().chain(b.periods()).collect();
    let witness = |p: u64| -> Result<IsoVerdict> {
        Ok(IsoVerdict {
            isomorphic: false,
            witness: Some(Witness { p, u_a: a.u_bar(p, tol)?, eta_a: a.eta_bar(p), u_b: b.u_bar(p, tol)?, eta_b: b.eta_bar(p) }),
        })
    };
    let mut check: Vec<u64> = lcm_closure(&periods).into_iter().collect();
    check.sort_unstable();
    for p in check {
        let ua = a.u_bar(p, tol)?;
        let ub = b.u_bar(p, tol)?;
        if cmp(&ua, &ub, tol)? != EntropyOrdering::Equal {
            return witness(p);
        }
        if periods.contains(&p) && a.eta_bar(p) != b.eta_bar(p) {
            return witness(p);
        }
    }
    Ok(IsoVerdict { isomorphic: true, witness: None })
}

/// Best rational approximation with denominator at most `max_den`.
fn rational_approx(x: f64, max_den: u64) -> BigRational {
    let exact = BigRational::from_float(x).expect("finite value");
    // Continued-fraction convergents of the exact binary value.
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut r = exact.clone();
    let limit = BigInt::from(max_den);
    loop {
        let a = r.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > limit {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &r - BigRational::from_integer(a);
        if frac == BigRational::from_integer(0.into()) {
            break;
        }
        r = BigRational::one() / frac;
    }
    BigRational::new(h1, k1)
}

/// `e^(h p)` as an exact integer when `h = ln K`, else a close rational.
fn growth_per_period(h: &ExtendedEntropy, p: u64) -> Result<(BigRational, bool)> {
    if let ExtendedEntropy::ExactAlgebraic(lambda) = h {
        if let Some(q) = lambda.as_rational() {
            let qp = BigRational::new(q.numer().pow(p as u32), q.denom().pow(p as u32));
            return Ok((qp, true));
        }
    }
    let hv = h.approx();
    let v = (hv * p as f64).exp();
    if !v.is_finite() || v > 1e15 {
        return Err(Error::Unrealizable(format!("growth factor e^(h p) = {v:e} is out of range")));
    }
    Ok((rational_approx(v, 10_000_000), false))
}

/// Transient schema with entropy `h` and period `p`: damped tail with
/// `a = 1/3`, `d = 2`, ratio `e^(h p)` on multiples of `p`. Then
/// `Phi(R) <= (1/3) pi^2/6 < 1`.
pub fn transient_schema(h: &ExtendedEntropy, p: u64, base: &str) -> Result<LoopSchema> {
    let (k, _) = growth_per_period(h, p)?;
    if k <= BigRational::one() {
        return Err(Error::Unrealizable(format!("entropy {} too small to realize", h.to_doc())));
    }
    let tail = Tail::damped(BigRational::new(1.into(), 3.into()), k, 2, p).with_step(p);
    LoopSchema::new(base, Default::default(), Some(tail))
}

/// Positive-recurrent schema with entropy `h`, period `p` and an MME.
///
/// With `y = e^(-h p)` the loop counts `c_{jp}` are greedy digits of 1 in base
/// `y`, so `Phi(e^-h) = 1` up to a final rounding correction. When `e^(h p)`
/// is an integer `K` the schema `c_p = K - 1`, `c_{2p} = K` is exact.
pub fn recurrent_schema(h: &ExtendedEntropy, p: u64, base: &str) -> Result<LoopSchema> {
    let (k, exact) = growth_per_period(h, p)?;
    if exact && k.is_integer() {
        let kk = k.to_integer().to_u64().ok_or_else(|| Error::Unrealizable("growth factor too large".into()))?;
        if kk < 2 {
            return Err(Error::Unrealizable(format!("entropy {} too small to realize", h.to_doc())));
        }
        return LoopSchema::finite(base, &[(p, kk - 1), (2 * p, kk)]);
    }
    let y = 1.0 / k.to_f64().unwrap();
    let mut counts = Vec::new();
    let mut rem = 1.0f64;
    let mut yj = 1.0f64;
    for j in 1..=200u64 {
        yj *= y;
        if rem < 1e-16 || yj < 1e-300 {
            break;
        }
        let digit = if yj < 1e-16 {
            // Closing correction: round the last digit to the nearest.
            (rem / yj).round()
        } else {
            (rem / yj).floor()
        };
        if digit > 0.0 {
            if digit > 1e15 {
                return Err(Error::Unrealizable("loop count overflow".into()));
            }
            counts.push((j * p, digit as u64));
            rem -= digit * yj;
        }
        if yj < 1e-16 {
            break;
        }
    }
    if counts.iter().map(|c| c.1).sum::<u64>() < 2 {
        return Err(Error::Unrealizable(format!("entropy {} too small to realize", h.to_doc())));
    }
    LoopSchema::finite(base, &counts)
}

/// Presentations whose union realizes an admissible pair.
pub fn realize_invariants(pair: &InvariantPair) -> Result<Vec<ShiftPresentation>> {
    let adm = check_admissible(pair);
    if !adm.admissible {
        return Err(Error::PreconditionViolated(format!("pair is not admissible: {}", adm.violations[0].1)));
    }
    let mut out = Vec::new();
    for (gi, g) in pair.generators().iter().enumerate() {
        if g.h.is_infinite() {
            return Err(Error::Unrealizable(format!("infinite entropy at period {}", g.p)));
        }
        let base = format!("g{gi}p{}", g.p);
        match g.count {
            GenCount::Unattained => {
                out.push(ShiftPresentation::Family(transient_schema(&g.h, g.p, &base)?));
            }
            GenCount::Count(n) => {
                out.push(ShiftPresentation::LoopSchema(transient_schema(&g.h, g.p, &base)?));
                for i in 0..n {
                    let s = recurrent_schema(&g.h, g.p, &format!("{base}m{i}"))?;
                    out.push(ShiftPresentation::LoopSchema(s));
                }
            }
        }
    }
    Ok(out)
}
