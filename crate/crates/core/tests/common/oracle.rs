//! Brute-force cone oracle sharing no code with the cone engine:
//! Carathéodory enumeration over linearly independent subsets with a private
//! Gaussian elimination.

use mra_core::{QVec, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

type Q = BigRational;

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Unique solution of `sum λ_k cols[k] = g`, if the columns are independent
/// and `g` is in their span.
fn solve_unique(cols: &[Vec<i64>], g: &[i64]) -> Option<Vec<Q>> {
    let d = g.len();
    let n = cols.len();
    let mut m: Vec<Vec<Q>> = (0..d)
        .map(|i| {
            let mut row: Vec<Q> = cols.iter().map(|c| q(c[i])).collect();
            row.push(q(g[i]));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..=n {
        let Some(p) = (r..d).find(|&i| !m[i][c].is_zero()) else { continue };
        if c == n {
            return None;
        }
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &pv;
        }
        for i in 0..d {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != n {
        return None;
    }
    Some((0..n).map(|k| m[k][n].clone()).collect())
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() <= max)
        .collect()
}

pub fn oracle_contains(gens: &[Vec<i64>], v: &[i64]) -> bool {
    if v.iter().all(|&x| x == 0) {
        return true;
    }
    subsets(gens.len(), v.len()).into_iter().any(|s| {
        let cols: Vec<Vec<i64>> = s.iter().map(|&i| gens[i].clone()).collect();
        solve_unique(&cols, v).is_some_and(|l| l.iter().all(|x| !num_traits::Signed::is_negative(x)))
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0, |acc, &x| gcd(acc, x));
    v.iter().map(|&x| x / g).collect()
}

pub fn oracle_extreme(gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = gens.iter().map(|g| primitive(g)).collect();
    u.sort();
    u.dedup();
    let mut out: Vec<Vec<i64>> = (0..u.len())
        .filter(|&i| {
            let others: Vec<Vec<i64>> = (0..u.len()).filter(|&j| j != i).map(|j| u[j].clone()).collect();
            !oracle_contains(&others, &u[i])
        })
        .map(|i| u[i].clone())
        .collect();
    out.sort();
    out
}

pub fn to_ints(v: &QVec) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("primitive integer ray")).collect()
}

pub fn qv(v: &[i64]) -> QVec {
    QVec::from_i64s(v)
}

pub fn dot(a: &QVec, b: &QVec) -> Rat {
    a.dot(b).unwrap()
}

/// Generators made pointed by flipping each into the open half-space of a
/// random functional; vectors on the hyperplane are dropped.
pub fn pointed_cone() -> impl Strategy<Value = (usize, Vec<Vec<i64>>, Vec<i64>)> {
    (1usize..=5).prop_flat_map(|d| {
        (
            Just(d),
            prop::collection::vec(prop::collection::vec(-4i64..=4, d), 1..=8),
            prop::collection::vec(-3i64..=3, d),
            prop::collection::vec(-4i64..=4, d),
        )
            .prop_filter_map("no generator off the hyperplane", |(d, raw, f, probe)| {
                let gens: Vec<Vec<i64>> = raw
                    .into_iter()
                    .filter_map(|v| {
                        let s: i64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
                        match s.signum() {
                            1 => Some(v),
                            -1 => Some(v.iter().map(|x| -x).collect()),
                            _ => None,
                        }
                    })
                    .collect();
                (!gens.is_empty()).then_some((d, gens, probe))
            })
    })
}
