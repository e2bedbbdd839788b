//! Small dense linear algebra over any [`Scalar`].

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use crate::scalar::Scalar;

/// Relative determinant threshold for declaring a matrix degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Gauss-Jordan inverse with partial pivoting on the real part.
pub fn inverse<S: Scalar>(a: &Array2<S>) -> Option<Array2<S>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut inv = Array2::from_shape_fn((n, n), |(i, j)| if i == j { S::one() } else { S::zero() });
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| {
            m[[p, col]]
                .re()
                .abs()
                .partial_cmp(&m[[q, col]].re().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[[pivot, col]].re() == 0.0 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap([pivot, j], [col, j]);
                inv.swap([pivot, j], [col, j]);
            }
        }
        let p = m[[col, col]].recip();
        for j in 0..n {
            m[[col, j]] = m[[col, j]].clone() * p.clone();
            inv[[col, j]] = inv[[col, j]].clone() * p.clone();
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]].clone();
            if f.re() == 0.0 && f.is_zero() {
                continue;
            }
            for j in 0..n {
                m[[r, j]] = m[[r, j]].clone() - f.clone() * m[[col, j]].clone();
                inv[[r, j]] = inv[[r, j]].clone() - f.clone() * inv[[col, j]].clone();
            }
        }
    }
    Some(inv)
}

/// Solve `a x = b` for one right-hand side.
pub fn solve<S: Scalar>(a: &Array2<S>, b: &[S]) -> Option<Vec<S>> {
    let inv = inverse(a)?;
    let n = b.len();
    Some(
        (0..n)
            .map(|i| (0..n).fold(S::zero(), |acc, j| acc + inv[[i, j]].clone() * b[j].clone()))
            .collect(),
    )
}

/// Determinant of the real parts.
pub fn det_re<S: Scalar>(a: &Array2<S>) -> f64 {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| a[[i, j]].re());
    m.determinant()
}

/// `|det a| < 1e-12 · ‖a‖_max^n`.
pub fn is_degenerate<S: Scalar>(a: &Array2<S>) -> bool {
    let n = a.nrows() as i32;
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.re().abs()));
    if scale == 0.0 {
        return true;
    }
    det_re(a).abs() < DEGENERACY_RTOL * scale.powi(n)
}

/// `(negative, positive)` eigenvalue counts of a symmetric matrix.
pub fn inertia(a: &Array2<f64>) -> (usize, usize) {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]]));
    let eig = SymmetricEigen::new(m);
    let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let pos = eig.eigenvalues.iter().filter(|&&v| v > 0.0).count();
    (neg, pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;
    use ndarray::array;

    #[test]
    fn inverse_of_indefinite_matrix() {
        let a = array![[0.0f64, 2.0, 1.0], [2.0, -1.0, 0.5], [1.0, 0.5, 3.0]];
        let inv = inverse(&a).unwrap();
        let prod = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inverse_differentiates_through_jets() {
        // d/dt (1/(2+t)) at t=0 via a 1x1 jet matrix
        let t = Jet::seed_values(&[0.0f64], 2).unwrap().remove(0);
        let a = Array2::from_elem((1, 1), t + Jet::constant(2.0));
        let inv = inverse(&a).unwrap();
        assert!((inv[[0, 0]].d(0) + 0.25).abs() < 1e-15);
        assert!((inv[[0, 0]].d2(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degeneracy_and_inertia() {
        assert!(is_degenerate(&array![[1.0, 2.0], [2.0, 4.0]]));
        assert!(!is_degenerate(&array![[1e-3, 0.0], [0.0, 1e-3]]));
        assert_eq!(inertia(&array![[-1.0, 0.0], [0.0, 1.0]]), (1, 1));
        assert_eq!(inertia(&array![[2.0, 0.1], [0.1, 1.0]]), (0, 2));
    }
}
