//! Exact feasibility LP with Farkas certificates.
//!
//! Phase-one simplex on `A λ = b, λ ≥ 0` over the rationals, using Bland's
//! rule so the pivot sequence is deterministic and cycling cannot occur.

use crate::linalg::{QMat, QVec};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Farkas {
    /// `λ ≥ 0` with `A λ = b`.
    Feasible(QVec),
    /// `y` with `yᵀA ≥ 0` componentwise and `yᵀb < 0`.
    Infeasible(QVec),
}

impl Farkas {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Farkas::Feasible(_))
    }
}

/// Decides whether `b` lies in the cone spanned by the columns of `a`.
///
/// Panics if `a.rows() != b.dim()`; callers validate dimensions.
pub fn farkas_solve(a: &QMat, b: &QVec) -> Farkas {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(m, b.dim(), "farkas_solve: row count must match rhs");

    // Columns: 0..n structural, n..n+m artificial, n+m rhs.
    let width = n + m + 1;
    let rhs = n + m;
    let sign: Vec<bool> = (0..m).map(|i| b[i].is_negative()).collect();
    let mut t = vec![vec![Rat::zero(); width]; m];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().take(n).enumerate() {
            let v = a.get(i, j).clone();
            *cell = if sign[i] { -v } else { v };
        }
        row[n + i] = Rat::one();
        row[rhs] = b[i].abs();
    }
    // Reduced costs of the phase-one objective (sum of artificials).
    let mut z = vec![Rat::zero(); width];
    for row in &t {
        for j in 0..n {
            z[j] -= &row[j];
        }
        z[rhs] -= &row[rhs];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| z[j].is_negative()) {
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for i in 0..m {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / &t[i][enter];
            let better = match &best {
                None => true,
                Some(r) => ratio < *r || (ratio == *r && basis[i] < basis[leave.unwrap()]),
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        // Phase one is bounded below by zero, so some row always qualifies.
        let r = leave.expect("phase-one objective is bounded");
        pivot(&mut t, &mut z, r, enter);
        basis[r] = enter;
    }

    if z[rhs].is_zero() {
        let mut lambda = vec![Rat::zero(); n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                lambda[bv] = t[i][rhs].clone();
            }
        }
        Farkas::Feasible(QVec::from(lambda))
    } else {
        // Simplex multipliers are y'_i = 1 - z[n+i]; undo the row sign flips
        // and negate so the certificate pairs negatively with b.
        let y = (0..m)
            .map(|i| {
                let yi = Rat::one() - &z[n + i];
                if sign[i] {
                    yi
                } else {
                    -yi
                }
            })
            .collect::<Vec<_>>();
        Farkas::Infeasible(QVec::from(y))
    }
}

fn pivot(t: &mut [Vec<Rat>], z: &mut [Rat], r: usize, c: usize) {
    let inv = t[r][c].recip().expect("pivot entry is positive");
    for v in t[r].iter_mut() {
        *v *= &inv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, p) in row.iter_mut().zip(&prow) {
            *v -= &(&f * p);
        }
    }
    if !z[c].is_zero() {
        let f = z[c].clone();
        for (v, p) in z.iter_mut().zip(&prow) {
            *v -= &(&f * p);
        }
    }
}

/// Re-checks a certificate by direct arithmetic.
pub fn verify_farkas(a: &QMat, b: &QVec, cert: &Farkas) -> bool {
    match cert {
        Farkas::Feasible(l) => {
            l.iter().all(|x| !x.is_negative()) && a.mul_vec(l).is_ok_and(|v| &v == b)
        }
        Farkas::Infeasible(y) => {
            let at = a.transpose();
            let ya = match at.mul_vec(y) {
                Ok(v) => v,
                Err(_) => return false,
            };
            ya.iter().all(|x| !x.is_negative()) && y.dot(b).is_ok_and(|v| v.is_negative())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadrant() {
        let a = QMat::identity(2);
        let inside = farkas_solve(&a, &QVec::from_i64s(&[2, 3]));
        assert_eq!(inside, Farkas::Feasible(QVec::from_i64s(&[2, 3])));
        let outside = farkas_solve(&a, &QVec::from_i64s(&[-1, 0]));
        assert!(!outside.is_feasible());
        assert!(verify_farkas(&a, &QVec::from_i64s(&[-1, 0]), &outside));
    }

    #[test]
    fn degenerate_and_empty() {
        let a = QMat::zeros(2, 0);
        let zero = QVec::from_i64s(&[0, 0]);
        assert!(farkas_solve(&a, &zero).is_feasible());
        let c = farkas_solve(&a, &QVec::from_i64s(&[0, -2]));
        assert!(verify_farkas(&a, &QVec::from_i64s(&[0, -2]), &c));
        assert!(!c.is_feasible());
    }

    proptest! {
        #[test]
        fn certificates_verify(
            (rows, cols, data, rhs) in (1usize..=5, 0usize..=7).prop_flat_map(|(r, c)| (
                Just(r), Just(c),
                proptest::collection::vec(-4i64..=4, r * c),
                proptest::collection::vec(-4i64..=4, r),
            ))
        ) {
            let mut a = QMat::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a.set(i, j, Rat::from(data[i * cols + j]));
                }
            }
            let b = QVec::from_i64s(&rhs);
            let cert = farkas_solve(&a, &b);
            prop_assert!(verify_farkas(&a, &b, &cert));
        }
    }
}
