//! Perron roots of irreducible finite graphs.
//!
//! Small graphs get an exact answer: the characteristic polynomial is computed
//! over the integers and its largest real root isolated by Sturm counting.
//! Larger graphs are handled through a feedback vertex set: the matrix of
//! first-return path generating functions between feedback vertices has
//! spectral radius one exactly at `x = 1/lambda`, which bisection locates with
//! certified M-matrix tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::entropy::ExtendedEntropy;
use crate::graph::FiniteGraph;
use crate::interval::{Interval, Side};
use crate::poly::{AlgebraicReal, Poly};

/// Graphs up to this many vertices get an exact algebraic entropy.
pub const EXACT_LIMIT: usize = 24;

/// Characteristic polynomial `det(xI - A)` by Faddeev–LeVerrier.
pub fn char_poly(a: &[Vec<u64>]) -> Poly {
    let n = a.len();
    let am: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for (l, ail) in am[i].iter().enumerate() {
                if ail.is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !m[l][j].is_zero() {
                        next[i][j] += ail * &m[l][j];
                    }
                }
            }
            next[i][i] += &c[n - k + 1];
        }
        m = next;
        // c_{n-k} = -tr(A M_k) / k
        let mut tr = BigInt::zero();
        for i in 0..n {
            for l in 0..n {
                if !am[i][l].is_zero() && !m[l][i].is_zero() {
                    tr += &am[i][l] * &m[l][i];
                }
            }
        }
        c[n - k] = -(tr / BigInt::from(k as u64));
    }
    Poly::new(c)
}

/// Exact Perron root of a nonnegative irreducible integer matrix.
pub fn perron_root_exact(a: &[Vec<u64>]) -> AlgebraicReal {
    let rows: Vec<u64> = a.iter().map(|r| r.iter().sum()).collect();
    let lo = *rows.iter().min().unwrap();
    let hi = *rows.iter().max().unwrap();
    if lo == hi {
        return AlgebraicReal::integer(lo as i64);
    }
    let p = char_poly(a);
    // The Perron root lies in [min row sum, max row sum] and dominates every
    // other real eigenvalue, so it is the largest root in that window.
    let lo_q = BigRational::from_integer(BigInt::from(lo)) - BigRational::new(BigInt::one(), BigInt::from(2));
    let hi_q = BigRational::from_integer(BigInt::from(hi));
    AlgebraicReal::largest_root_in(&p, lo_q, hi_q).expect("Perron root inside the row-sum window")
}

/// Entropy of an irreducible finite graph, with edge multiplicities.
pub fn perron_entropy(c: &FiniteGraph) -> ExtendedEntropy {
    if c.vertex_count() == 0 || c.edge_count() == 0 {
        return ExtendedEntropy::Zero;
    }
    if c.edge_count() == c.vertex_count() && c.is_irreducible() {
        return ExtendedEntropy::Zero;
    }
    let a = c.adjacency();
    if c.vertex_count() <= EXACT_LIMIT {
        return ExtendedEntropy::from_growth(perron_root_exact(&a));
    }
    let rows: Vec<u64> = a.iter().map(|r| r.iter().sum()).collect();
    let lo = *rows.iter().min().unwrap();
    let hi = *rows.iter().max().unwrap();
    if lo == hi {
        return ExtendedEntropy::log_int(lo);
    }
    ExtendedEntropy::IntervalApprox(perron_entropy_interval(c, 1e-13))
}

/// Heads of back edges in a depth-first search: every cycle meets this set.
pub fn feedback_vertices(g: &FiniteGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let succ = g.successors();
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut fvs = vec![false; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < succ[u].len() {
                let v = succ[u][*i];
                *i += 1;
                match state[v] {
                    0 => {
                        state[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => fvs[v] = true,
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    (0..n).filter(|&v| fvs[v]).collect()
}

/// Matrix of path generating functions between feedback vertices, with no
/// feedback vertex in the interior of a path, evaluated at `x`.
fn return_matrix(g: &FiniteGraph, fvs: &[usize], order: &[usize], x: Interval) -> Vec<Vec<Interval>> {
    let n = g.vertex_count();
    let k = fvs.len();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in fvs.iter().enumerate() {
        slot[v] = i;
    }
    let out = g.successors();
    let mut m = vec![vec![Interval::ZERO; k]; k];
    // order: non-feedback vertices in topological order of the acyclic rest.
    let mut val = vec![Interval::ZERO; n];
    for (si, &s) in fvs.iter().enumerate() {
        for v in val.iter_mut() {
            *v = Interval::ZERO;
        }
        for &w in &out[s] {
            if slot[w] != usize::MAX {
                m[si][slot[w]] = m[si][slot[w]] + x;
            } else {
                val[w] = val[w] + x;
            }
        }
        for &u in order {
            let vu = val[u];
            if vu == Interval::ZERO {
                continue;
            }
            for &w in &out[u] {
                let add = vu * x;
                if slot[w] != usize::MAX {
                    m[si][slot[w]] = m[si][slot[w]] + add;
                } else {
                    val[w] = val[w] + add;
                }
            }
        }
    }
    m
}

/// Is `I - M` certifiably a nonsingular M-matrix (`Below`), certifiably not
/// (`Above`), or unclear? Uses the positivity of leading principal pivots.
fn spectral_side(m: &[Vec<Interval>]) -> Side {
    let k = m.len();
    let mut a: Vec<Vec<Interval>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Interval::ONE - m[i][j] } else { -m[i][j] }).collect())
        .collect();
    for p in 0..k {
        let piv = a[p][p];
        if piv.hi() <= 0.0 {
            return Side::Above;
        }
        if piv.lo() <= 0.0 || !piv.is_finite() {
            return Side::Straddles;
        }
        for i in p + 1..k {
            if a[i][p] == Interval::ZERO {
                continue;
            }
            let f = a[i][p] / piv;
            for j in p + 1..k {
                a[i][j] = a[i][j] - f * a[p][j];
            }
            a[i][p] = Interval::ZERO;
        }
    }
    Side::Below
}

/// Certified enclosure of `ln(lambda)` for an irreducible graph of any size.
pub fn perron_entropy_interval(c: &FiniteGraph, width: f64) -> Interval {
    let a = c.adjacency();
    let rows: Vec<u64> = a.iter().map(|r| r.iter().sum()).collect();
    let lo = *rows.iter().min().unwrap() as f64;
    let hi = *rows.iter().max().unwrap() as f64;
    let fvs = feedback_vertices(c);
    let mut is_fvs = vec![false; c.vertex_count()];
    for &v in &fvs {
        is_fvs[v] = true;
    }
    let order = topo_order_without(c, &is_fvs);
    // x = 1/lambda lies in [1/hi, 1/lo].
    let mut x_lo = 1.0 / hi * (1.0 - 1e-15);
    let mut x_hi = if lo > 0.0 { (1.0 / lo) * (1.0 + 1e-15) } else { 1.0 };
    let side = |x: f64| spectral_side(&return_matrix(c, &fvs, &order, Interval::point(x)));
    // Make sure the bracket is certified on both ends.
    while side(x_lo) != Side::Below {
        x_lo *= 0.5;
    }
    while side(x_hi) != Side::Above {
        x_hi *= 2.0;
    }
    for _ in 0..200 {
        let ent = Interval::new(x_lo, x_hi).ln();
        if ent.width() <= width {
            break;
        }
        let mid = 0.5 * (x_lo + x_hi);
        if mid <= x_lo || mid >= x_hi {
            break;
        }
        match side(mid) {
            Side::Below => x_lo = mid,
            Side::Above => x_hi = mid,
            Side::Straddles => break,
        }
    }
    -(Interval::new(x_lo, x_hi).ln())
}

fn topo_order_without(g: &FiniteGraph, removed: &[bool]) -> Vec<usize> {
    let n = g.vertex_count();
    let mut indeg = vec![0usize; n];
    for e in g.edges() {
        if !removed[e.from] && !removed[e.to] {
            indeg[e.to] += 1;
        }
    }
    let succ = g.successors();
    let mut queue: Vec<usize> = (0..n).filter(|&v| !removed[v] && indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop() {
        order.push(u);
        for &w in &succ[u] {
            if !removed[w] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
    }
    debug_assert_eq!(order.len() + removed.iter().filter(|&&r| r).count(), n);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyOrdering;

    fn golden() -> FiniteGraph {
        FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")])
    }

    #[test]
    fn char_poly_of_golden_mean() {
        let p = char_poly(&golden().adjacency());
        assert_eq!(p, Poly::from_i64(&[-1, -1, 1]));
    }

    #[test]
    fn exact_entropies() {
        let e = perron_entropy(&golden());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(e.enclosure().unwrap().contains(phi.ln()));
        let full2 = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]);
        let e2 = perron_entropy(&full2);
        assert_eq!(e2.compare(&ExtendedEntropy::log_int(2), 0.0), EntropyOrdering::Equal);
        let c3 = FiniteGraph::from_named_edges(&[("a", "b"), ("b", "c"), ("c", "a")]);
        assert!(perron_entropy(&c3).is_zero());
    }

    #[test]
    fn interval_method_agrees_with_exact() {
        let g = golden();
        let i = perron_entropy_interval(&g, 1e-13);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(i.contains(phi.ln()), "{i}");
        assert!(i.width() < 1e-12);
        // A graph with a larger feedback set.
        let g = FiniteGraph::from_named_edges(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("b", "a"),
            ("c", "c"),
            ("a", "a"),
        ]);
        let exact = perron_entropy(&g).enclosure().unwrap();
        let approx = perron_entropy_interval(&g, 1e-13);
        assert!(exact.intersects(&approx), "{exact} vs {approx}");
        assert!(approx.width() < 1e-12);
    }
}
