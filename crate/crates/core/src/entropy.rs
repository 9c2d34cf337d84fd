//! Entropy values that may be exact, certified approximations, zero or infinite.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::interval::Interval;
use crate::poly::{AlgebraicReal, Poly};

/// Default tolerance for comparing entropies that are only known approximately.
pub const DEFAULT_TOL: f64 = 1e-9;

/// An entropy in nats.
#[derive(Clone, Debug)]
pub enum ExtendedEntropy {
    Zero,
    /// `ln(lambda)` for an algebraic growth rate `lambda > 1`.
    ExactAlgebraic(AlgebraicReal),
    /// Certified enclosure of the entropy itself.
    IntervalApprox(Interval),
    Infinity,
}

/// Result of comparing two entropies at a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyOrdering {
    Less,
    Equal,
    Greater,
    Inconclusive,
}

impl EntropyOrdering {
    fn from_ord(o: Ordering) -> Self {
        match o {
            Ordering::Less => EntropyOrdering::Less,
            Ordering::Equal => EntropyOrdering::Equal,
            Ordering::Greater => EntropyOrdering::Greater,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            EntropyOrdering::Less => EntropyOrdering::Greater,
            EntropyOrdering::Greater => EntropyOrdering::Less,
            o => o,
        }
    }
}

impl ExtendedEntropy {
    /// `ln k` for an integer `k >= 1`.
    pub fn log_int(k: u64) -> ExtendedEntropy {
        assert!(k >= 1);
        if k == 1 {
            return ExtendedEntropy::Zero;
        }
        ExtendedEntropy::ExactAlgebraic(AlgebraicReal::integer(k as i64))
    }

    /// `ln(lambda)` for an algebraic growth rate; rates of at most 1 give zero.
    pub fn from_growth(lambda: AlgebraicReal) -> ExtendedEntropy {
        match lambda.cmp_exact(&AlgebraicReal::integer(1)) {
            Ordering::Greater => ExtendedEntropy::ExactAlgebraic(lambda),
            _ => ExtendedEntropy::Zero,
        }
    }

    /// `(1/s) ln(q)` for rational `q > 1`: the positive root of `den x^s - num`.
    pub fn log_rational_root(q: &BigRational, s: u32) -> ExtendedEntropy {
        assert!(s >= 1);
        if q <= &BigRational::one() {
            return ExtendedEntropy::Zero;
        }
        let mut c = vec![BigInt::zero(); s as usize + 1];
        c[0] = -q.numer().clone();
        c[s as usize] = q.denom().clone();
        let poly = Poly::new(c);
        // The root lies in (1, q] since q > 1.
        let hi = q.clone();
        let root = AlgebraicReal::isolate(&poly, BigRational::one(), hi)
            .expect("x^s = q has exactly one root in (1, q]");
        ExtendedEntropy::ExactAlgebraic(root)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedEntropy::Zero)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedEntropy::Infinity)
    }

    /// Enclosure of the value in nats; `None` for infinity.
    pub fn enclosure(&self) -> Option<Interval> {
        match self {
            ExtendedEntropy::Zero => Some(Interval::ZERO),
            ExtendedEntropy::ExactAlgebraic(a) => Some(a.enclosure().ln()),
            ExtendedEntropy::IntervalApprox(i) => Some(*i),
            ExtendedEntropy::Infinity => None,
        }
    }

    /// Midpoint estimate, for display.
    pub fn approx(&self) -> f64 {
        match self.enclosure() {
            Some(i) => i.mid(),
            None => f64::INFINITY,
        }
    }

    /// Compare two entropies. Exact values are compared exactly; otherwise the
    /// values are declared equal when the hull of both enclosures is at most
    /// `tol` wide, ordered when the enclosures are disjoint, and inconclusive
    /// in between.
    pub fn compare(&self, other: &ExtendedEntropy, tol: f64) -> EntropyOrdering {
        use ExtendedEntropy::*;
        match (self, other) {
            (Infinity, Infinity) => return EntropyOrdering::Equal,
            (Infinity, _) => return EntropyOrdering::Greater,
            (_, Infinity) => return EntropyOrdering::Less,
            (Zero, Zero) => return EntropyOrdering::Equal,
            (ExactAlgebraic(a), ExactAlgebraic(b)) => {
                return EntropyOrdering::from_ord(a.cmp_exact(b));
            }
            (Zero, ExactAlgebraic(_)) => return EntropyOrdering::Less,
            (ExactAlgebraic(_), Zero) => return EntropyOrdering::Greater,
            _ => {}
        }
        let a = self.enclosure().unwrap();
        let b = other.enclosure().unwrap();
        if a.hull(&b).width() <= tol {
            EntropyOrdering::Equal
        } else if a.hi() < b.lo() {
            EntropyOrdering::Less
        } else if b.hi() < a.lo() {
            EntropyOrdering::Greater
        } else {
            EntropyOrdering::Inconclusive
        }
    }

    /// Document form: `log k`, `poly ... root-in lo hi` (growth rate), `lo hi`,
    /// `0` or `inf`.
    pub fn to_doc(&self) -> String {
        match self {
            ExtendedEntropy::Zero => "0".to_string(),
            ExtendedEntropy::Infinity => "inf".to_string(),
            ExtendedEntropy::IntervalApprox(i) => format!("{:e} {:e}", i.lo(), i.hi()),
            ExtendedEntropy::ExactAlgebraic(a) => match a.as_rational() {
                Some(q) if q.is_integer() => format!("log {}", q.numer()),
                Some(q) => format!("poly {} {} root-in {} {}", q.denom(), -q.numer(), q, q),
                None => a.to_string(),
            },
        }
    }
}

impl fmt::Display for ExtendedEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedEntropy::Zero => write!(f, "0"),
            ExtendedEntropy::Infinity => write!(f, "inf"),
            ExtendedEntropy::ExactAlgebraic(a) => match a.as_rational() {
                Some(q) if q.is_integer() => write!(f, "log {}", q.numer()),
                _ => write!(f, "{:.12}", self.approx()),
            },
            ExtendedEntropy::IntervalApprox(_) => write!(f, "{:.12}", self.approx()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_logs() {
        let two = ExtendedEntropy::log_int(2);
        assert!(two.enclosure().unwrap().contains(std::f64::consts::LN_2));
        assert_eq!(two.compare(&ExtendedEntropy::log_int(2), 0.0), EntropyOrdering::Equal);
        assert_eq!(two.compare(&ExtendedEntropy::log_int(3), 0.0), EntropyOrdering::Less);
        assert!(ExtendedEntropy::log_int(1).is_zero());
    }

    #[test]
    fn rational_roots() {
        // (1/2) ln 4 = ln 2, decided exactly.
        let a = ExtendedEntropy::log_rational_root(&BigRational::from_integer(4.into()), 2);
        assert_eq!(a.compare(&ExtendedEntropy::log_int(2), 0.0), EntropyOrdering::Equal);
        let b = ExtendedEntropy::log_rational_root(&BigRational::new(7.into(), 2.into()), 1);
        assert!(b.enclosure().unwrap().contains(3.5f64.ln()));
    }

    #[test]
    fn interval_comparisons() {
        let ln2 = std::f64::consts::LN_2;
        let close = ExtendedEntropy::IntervalApprox(Interval::new(ln2 - 1e-13, ln2 + 1e-13));
        let two = ExtendedEntropy::log_int(2);
        assert_eq!(close.compare(&two, 1e-9), EntropyOrdering::Equal);
        let wide = ExtendedEntropy::IntervalApprox(Interval::new(0.6, 0.8));
        assert_eq!(wide.compare(&two, 1e-9), EntropyOrdering::Inconclusive);
        let low = ExtendedEntropy::IntervalApprox(Interval::new(0.1, 0.2));
        assert_eq!(low.compare(&two, 1e-9), EntropyOrdering::Less);
        assert_eq!(ExtendedEntropy::Infinity.compare(&two, 1e-9), EntropyOrdering::Greater);
    }
}
