//! Integer polynomials, Sturm sequences and real algebraic numbers.
//!
//! Only what exact entropy comparison needs: the largest real root of a
//! characteristic polynomial is isolated by Sturm counting and compared with
//! other roots through polynomial gcds, so equality is decided exactly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::interval::Interval;

/// Polynomial with integer coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    c: Vec<BigInt>,
}

impl Poly {
    pub fn new(mut c: Vec<BigInt>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_i64(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// `den * x - num`, whose only root is `num/den`.
    pub fn linear_root(q: &BigRational) -> Poly {
        Poly::new(vec![-q.numer().clone(), q.denom().clone()])
    }

    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> BigInt {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.c.iter().enumerate().skip(1).map(|(i, a)| a * BigInt::from(i)).collect())
    }

    /// Sign of the value at a rational point.
    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        // p(n/d) * d^deg, evaluated by Horner; d > 0 so the sign is preserved.
        let n = x.numer();
        let d = x.denom();
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for a in self.c.iter().rev() {
            acc = acc * n + a * &dpow;
            dpow *= d;
        }
        acc.sign().into_ordering()
    }

    pub fn eval_interval(&self, x: Interval) -> Interval {
        let mut acc = Interval::ZERO;
        for a in self.c.iter().rev() {
            acc = acc * x + Interval::from_bigint(a);
        }
        acc
    }

    fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for a in &self.c {
            g = g.gcd(a);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide by the (positive) content; the sign of the polynomial is kept.
    pub fn primitive(&self) -> Poly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        Poly::new(self.c.iter().map(|a| a / &g).collect())
    }

    /// Pseudo-division by `b` using only positive scalings.
    /// Returns `(q, r)` with `s * self = q * b + r` for some `s > 0`.
    fn pseudo_divmod(&self, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_zero(), "division by zero polynomial");
        let db = b.degree();
        let lb = b.lead();
        let lb_abs = lb.abs();
        let lb_neg = lb.is_negative();
        let mut r = self.c.clone();
        let mut q: Vec<BigInt> = vec![BigInt::zero(); self.c.len().saturating_sub(db).max(1)];
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            let shift = dr - db;
            for x in r.iter_mut() {
                *x *= &lb_abs;
            }
            for x in q.iter_mut() {
                *x *= &lb_abs;
            }
            let f = if lb_neg { -lr } else { lr };
            q[shift] += &f;
            for (i, bc) in b.c.iter().enumerate() {
                r[shift + i] -= &f * bc;
            }
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    /// A positive multiple of the remainder of `self` modulo `b`, made primitive.
    pub fn rem_pos(&self, b: &Poly) -> Poly {
        self.pseudo_divmod(b).1.primitive()
    }

    /// Quotient of an exact division, up to a positive constant factor.
    pub fn div_exact(&self, b: &Poly) -> Poly {
        let (q, r) = self.pseudo_divmod(b);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q.primitive()
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.rem_pos(&b);
            a = b;
            b = r;
        }
        if a.lead().is_negative() {
            a = Poly::new(a.c.into_iter().map(|x| -x).collect());
        }
        a
    }

    /// Product of the distinct irreducible factors (up to a constant).
    pub fn squarefree(&self) -> Poly {
        let d = self.derivative();
        if d.is_zero() {
            return self.primitive();
        }
        let g = self.gcd(&d);
        if g.degree() == 0 {
            self.primitive()
        } else {
            self.div_exact(&g)
        }
    }

    /// Sturm sequence of a squarefree polynomial.
    pub fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone()];
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d.primitive());
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem_pos(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(Poly::new(r.c.into_iter().map(|x| -x).collect()));
        }
        seq
    }
}

fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut last = Ordering::Equal;
    let mut n = 0;
    for s in signs {
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots(sturm: &[Poly], a: &BigRational, b: &BigRational) -> usize {
    let va = sign_changes(sturm.iter().map(|p| p.sign_at(a)));
    let vb = sign_changes(sturm.iter().map(|p| p.sign_at(b)));
    va.saturating_sub(vb)
}

trait SignOrd {
    fn into_ordering(self) -> Ordering;
}

impl SignOrd for num_bigint::Sign {
    fn into_ordering(self) -> Ordering {
        match self {
            num_bigint::Sign::Minus => Ordering::Less,
            num_bigint::Sign::NoSign => Ordering::Equal,
            num_bigint::Sign::Plus => Ordering::Greater,
        }
    }
}

/// A real algebraic number: the unique root of a squarefree integer
/// polynomial inside an isolating interval.
///
/// When `lo == hi` the number is exactly that rational. Otherwise it lies in
/// the open interval `(lo, hi)` and neither endpoint is a root.
#[derive(Clone, Debug)]
pub struct AlgebraicReal {
    poly: Poly,
    lo: BigRational,
    hi: BigRational,
}

impl AlgebraicReal {
    pub fn rational(q: BigRational) -> AlgebraicReal {
        AlgebraicReal { poly: Poly::linear_root(&q), lo: q.clone(), hi: q }
    }

    pub fn integer(n: i64) -> AlgebraicReal {
        AlgebraicReal::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Isolate the unique root of `poly` in `(lo, hi]`. Returns `None` unless
    /// there is exactly one distinct root there.
    pub fn isolate(poly: &Poly, lo: BigRational, hi: BigRational) -> Option<AlgebraicReal> {
        if poly.degree() == 0 || lo >= hi {
            return None;
        }
        let p = poly.squarefree();
        let sturm = p.sturm();
        if count_roots(&sturm, &lo, &hi) != 1 {
            return None;
        }
        let mut a = AlgebraicReal { poly: p, lo, hi };
        if a.poly.sign_at(&a.hi) == Ordering::Equal {
            let h = a.hi.clone();
            return Some(AlgebraicReal::rational(h));
        }
        // Move the lower endpoint off a root (a root there is not ours).
        while a.poly.sign_at(&a.lo) == Ordering::Equal {
            let mid = (&a.lo + &a.hi) / BigRational::from_integer(2.into());
            match a.poly.sign_at(&mid) {
                Ordering::Equal => {
                    if count_roots(&sturm, &mid, &a.hi) == 0 {
                        return Some(AlgebraicReal::rational(mid));
                    }
                    a.lo = mid;
                }
                _ => {
                    if count_roots(&sturm, &mid, &a.hi) == 1 {
                        a.lo = mid;
                    } else {
                        a.hi = mid;
                    }
                }
            }
        }
        a.normalize_rational();
        Some(a)
    }

    /// Largest real root of a polynomial known to lie in `(lo, hi]`.
    pub fn largest_root_in(poly: &Poly, lo: BigRational, hi: BigRational) -> Option<AlgebraicReal> {
        let p = poly.squarefree();
        let sturm = p.sturm();
        if p.sign_at(&hi) == Ordering::Equal {
            return Some(AlgebraicReal::rational(hi));
        }
        let (mut lo, mut hi) = (lo, hi);
        let total = count_roots(&sturm, &lo, &hi);
        if total == 0 {
            return None;
        }
        let two = BigRational::from_integer(2.into());
        loop {
            let n = count_roots(&sturm, &lo, &hi);
            if n == 1 && p.sign_at(&lo) != Ordering::Equal {
                break;
            }
            let mid = (&lo + &hi) / &two;
            let upper = count_roots(&sturm, &mid, &hi);
            if upper == 0 {
                if p.sign_at(&mid) == Ordering::Equal {
                    return Some(AlgebraicReal::rational(mid));
                }
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut a = AlgebraicReal { poly: p, lo, hi };
        a.normalize_rational();
        Some(a)
    }

    /// Collapse to an exact rational when the root is one. Rational roots have
    /// the form m/lead, so the candidates in the interval are checked directly
    /// when there are few of them.
    fn normalize_rational(&mut self) {
        if self.lo == self.hi {
            return;
        }
        if self.poly.degree() == 1 {
            let q = BigRational::new(-self.poly.c[0].clone(), self.poly.c[1].clone());
            *self = AlgebraicReal::rational(q);
            return;
        }
        let lead = BigRational::from_integer(self.poly.lead().abs());
        let lo_m = (&self.lo * &lead).floor().to_integer();
        let hi_m = (&self.hi * &lead).ceil().to_integer();
        if &hi_m - &lo_m > BigInt::from(4096) {
            return;
        }
        let mut m = lo_m;
        while m <= hi_m {
            let cand = BigRational::from_integer(m.clone()) / &lead;
            if cand > self.lo && cand < self.hi && self.poly.sign_at(&cand) == Ordering::Equal {
                *self = AlgebraicReal::rational(cand);
                return;
            }
            m += 1;
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn bounds(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    /// Halve the isolating interval once.
    pub fn refine(&mut self) {
        if self.lo == self.hi {
            return;
        }
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        let sm = self.poly.sign_at(&mid);
        if sm == Ordering::Equal {
            self.lo = mid.clone();
            self.hi = mid;
            self.poly = Poly::linear_root(&self.lo);
            return;
        }
        if self.poly.sign_at(&self.lo) == sm {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    /// Refine until the isolating interval is narrower than `width`.
    pub fn refine_to(&mut self, width: &BigRational) {
        while &(&self.hi - &self.lo) > width {
            self.refine();
        }
    }

    /// Enclosure with relative width around 1e-15.
    pub fn enclosure(&self) -> Interval {
        let mut a = self.clone();
        let scale = a.hi.abs().max(BigRational::one());
        let width = scale * BigRational::new(BigInt::one(), BigInt::from(1u64) << 56);
        a.refine_to(&width);
        let lo = Interval::from_rational(&a.lo);
        let hi = Interval::from_rational(&a.hi);
        lo.hull(&hi)
    }

    /// Exact comparison.
    pub fn cmp_exact(&self, other: &AlgebraicReal) -> Ordering {
        if let (Some(a), Some(b)) = (self.as_rational(), other.as_rational()) {
            return a.cmp(b);
        }
        if self.equals(other) {
            return Ordering::Equal;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        loop {
            if a.hi <= b.lo {
                return Ordering::Less;
            }
            if b.hi <= a.lo {
                return Ordering::Greater;
            }
            if (&a.hi - &a.lo) >= (&b.hi - &b.lo) {
                a.refine();
            } else {
                b.refine();
            }
        }
    }

    fn equals(&self, other: &AlgebraicReal) -> bool {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        if lo > hi {
            return false;
        }
        let g = self.poly.gcd(&other.poly);
        if g.degree() == 0 {
            return false;
        }
        if g.sign_at(&lo) == Ordering::Equal {
            return true;
        }
        if lo == hi {
            return false;
        }
        count_roots(&g.sturm(), &lo, &hi) > 0
    }

    /// Is this number exactly the integer `n`?
    pub fn is_integer(&self, n: i64) -> bool {
        self.as_rational().is_some_and(|q| q == &BigRational::from_integer(n.into()))
    }
}

impl PartialEq for AlgebraicReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        write!(f, "poly")?;
        for a in self.poly.c.iter().rev() {
            write!(f, " {a}")?;
        }
        write!(f, " root-in {} {}", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sign_evaluation() {
        let p = Poly::from_i64(&[-1, -1, 1]); // x^2 - x - 1
        assert_eq!(p.sign_at(&q(2, 1)), Ordering::Greater);
        assert_eq!(p.sign_at(&q(3, 2)), Ordering::Less);
        assert_eq!(p.sign_at(&q(-1, 2)), Ordering::Less);
        assert_eq!(p.sign_at(&q(-1, 1)), Ordering::Greater);
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^2 (x+2)
        let p = Poly::from_i64(&[2, -3, 0, 1]);
        let s = p.squarefree();
        assert_eq!(s.degree(), 2);
        assert_eq!(s.sign_at(&q(1, 1)), Ordering::Equal);
        assert_eq!(s.sign_at(&q(-2, 1)), Ordering::Equal);
        let g = Poly::from_i64(&[-1, 1]).gcd(&Poly::from_i64(&[1, 0, -1]));
        assert_eq!(g.degree(), 1);
    }

    #[test]
    fn sturm_counts() {
        let p = Poly::from_i64(&[0, -2, 0, 1]); // x^3 - 2x: roots 0, +-sqrt 2
        let s = p.sturm();
        assert_eq!(count_roots(&s, &q(-10, 1), &q(10, 1)), 3);
        assert_eq!(count_roots(&s, &q(0, 1), &q(10, 1)), 1);
        assert_eq!(count_roots(&s, &q(-1, 1), &q(0, 1)), 1);
    }

    #[test]
    fn golden_ratio_isolation() {
        let p = Poly::from_i64(&[-1, -1, 1]);
        let phi = AlgebraicReal::largest_root_in(&p, q(0, 1), q(2, 1)).unwrap();
        let e = phi.enclosure();
        assert!(e.contains((1.0 + 5f64.sqrt()) / 2.0));
        assert!(e.width() < 1e-14);
    }

    #[test]
    fn exact_comparisons() {
        let phi = AlgebraicReal::largest_root_in(&Poly::from_i64(&[-1, -1, 1]), q(0, 1), q(2, 1)).unwrap();
        // Same number from a different polynomial: (x^2 - x - 1)(x - 5).
        let p2 = Poly::from_i64(&[5, 4, -6, 1]);
        let phi2 = AlgebraicReal::isolate(&p2, q(1, 1), q(2, 1)).unwrap();
        assert_eq!(phi.cmp_exact(&phi2), Ordering::Equal);
        let sqrt2 = AlgebraicReal::isolate(&Poly::from_i64(&[-2, 0, 1]), q(1, 1), q(2, 1)).unwrap();
        assert_eq!(sqrt2.cmp_exact(&phi), Ordering::Less);
        assert_eq!(AlgebraicReal::integer(2).cmp_exact(&phi), Ordering::Greater);
    }

    #[test]
    fn rational_roots_collapse() {
        let p = Poly::from_i64(&[0, -2, 1]); // x^2 - 2x
        let r = AlgebraicReal::largest_root_in(&p, q(1, 1), q(2, 1)).unwrap();
        assert!(r.is_integer(2));
        let r = AlgebraicReal::largest_root_in(&p, q(1, 1), q(3, 1)).unwrap();
        assert!(r.is_integer(2));
    }
}
