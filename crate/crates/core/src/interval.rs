//! Closed intervals of `f64` with outward rounding.
//!
//! Every arithmetic result is widened by one ulp on each side, which keeps the
//! true value inside the enclosure regardless of the rounding mode used by the
//! hardware. Transcendental functions are widened by two ulps since the
//! platform `ln`/`exp` are only faithfully rounded.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Where an interval sits relative to a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
    Straddles,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    fn widened(lo: f64, hi: f64) -> Self {
        let lo = if lo.is_nan() { f64::NEG_INFINITY } else { lo };
        let hi = if hi.is_nan() { f64::INFINITY } else { hi };
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn compare_to(&self, threshold: f64) -> Side {
        if self.hi < threshold {
            Side::Below
        } else if self.lo > threshold {
            Side::Above
        } else {
            Side::Straddles
        }
    }

    /// Enclosure of an exact rational.
    pub fn from_rational(q: &BigRational) -> Interval {
        if q.is_zero() {
            return Interval::ZERO;
        }
        match q.to_f64() {
            Some(x) if x.is_finite() && x != 0.0 => Interval::widened(x, x),
            _ => {
                // Conversion over/underflowed; fall back to a scaled quotient.
                let n = bigint_to_interval(q.numer());
                let d = bigint_to_interval(q.denom());
                n / d
            }
        }
    }

    pub fn from_bigint(n: &BigInt) -> Interval {
        bigint_to_interval(n)
    }

    /// Enclosure of an integer given as `u64`; exact below 2^53.
    pub fn from_u64(n: u64) -> Interval {
        if n < (1u64 << 53) {
            Interval::point(n as f64)
        } else {
            let x = n as f64;
            Interval::widened(x, x)
        }
    }

    pub fn sqr(self) -> Interval {
        self * self
    }

    /// Integer power of a nonnegative interval.
    pub fn powi(self, mut n: u64) -> Interval {
        assert!(self.lo >= 0.0, "powi of interval with negative part");
        let mut base = self;
        let mut acc = Interval::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn ln(self) -> Interval {
        assert!(self.lo > 0.0, "ln of non-positive interval");
        let lo = self.lo.ln().next_down().next_down();
        let hi = self.hi.ln().next_up().next_up();
        Interval { lo, hi }
    }

    pub fn exp(self) -> Interval {
        let lo = self.lo.exp().next_down().next_down().max(0.0);
        let hi = self.hi.exp().next_up().next_up();
        Interval { lo, hi }
    }

    pub fn recip(self) -> Interval {
        Interval::ONE / self
    }

    /// Clamp the lower end at zero (for quantities known to be nonnegative).
    pub fn clamp_nonneg(self) -> Interval {
        Interval { lo: self.lo.max(0.0), hi: self.hi.max(0.0) }
    }
}

fn bigint_to_interval(n: &BigInt) -> Interval {
    if n.is_zero() {
        return Interval::ZERO;
    }
    let bits = n.bits();
    if bits <= 53 {
        return Interval::point(n.to_f64().unwrap());
    }
    if bits < 1000 {
        let x = n.to_f64().unwrap();
        if x.is_finite() {
            return Interval::widened(x, x).widen_ulps(1);
        }
    }
    // Scale down to keep the mantissa, then rescale.
    let shift = bits - 60;
    let top: BigInt = n.abs() >> shift;
    let m = top.to_f64().unwrap();
    let scale = Interval::point(2.0).powi(shift);
    let mag = Interval::new(m, m + 1.0) * scale;
    if n.is_negative() {
        -mag
    } else {
        mag
    }
}

impl Interval {
    fn widen_ulps(self, n: u32) -> Interval {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..n {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::widened(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::widened(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

fn mul_end(a: f64, b: f64) -> f64 {
    // 0 * inf is taken as 0: every factor here is a finite quantity or a bound.
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            return Interval::widened(mul_end(self.lo, rhs.lo), mul_end(self.hi, rhs.hi))
                .clamp_nonneg();
        }
        let c = [
            mul_end(self.lo, rhs.lo),
            mul_end(self.lo, rhs.hi),
            mul_end(self.hi, rhs.lo),
            mul_end(self.hi, rhs.hi),
        ];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::widened(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        assert!(rhs.lo > 0.0 || rhs.hi < 0.0, "division by interval containing zero");
        let c = [self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out = Interval::widened(lo, hi);
        if self.lo >= 0.0 && rhs.lo > 0.0 {
            out.clamp_nonneg()
        } else {
            out
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn arithmetic_encloses() {
        let third = Interval::ONE / Interval::point(3.0);
        assert!(third.contains(1.0 / 3.0));
        let sum = third + third + third;
        assert!(sum.contains(1.0));
        assert!(sum.width() < 1e-15);
    }

    #[test]
    fn rational_conversion() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let i = Interval::from_rational(&q);
        assert!(i.lo() < 1.0 / 3.0 + 1e-16 && i.hi() > 1.0 / 3.0 - 1e-16);
        let huge = BigInt::from(3).pow(2000u32);
        let h = Interval::from_bigint(&huge);
        assert!(h.hi().is_infinite() || h.lo() > 1e300);
    }

    #[test]
    fn powers_and_logs() {
        let x = Interval::point(0.5).powi(10);
        assert!(x.contains(1.0 / 1024.0));
        let l = Interval::point(2.0).ln();
        assert!(l.contains(std::f64::consts::LN_2));
        assert!(l.width() < 1e-15);
    }

    #[test]
    fn side_of_threshold() {
        assert_eq!(Interval::new(0.1, 0.2).compare_to(1.0), Side::Below);
        assert_eq!(Interval::new(1.1, 1.2).compare_to(1.0), Side::Above);
        assert_eq!(Interval::new(0.9, 1.2).compare_to(1.0), Side::Straddles);
    }
}
