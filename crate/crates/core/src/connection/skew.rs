//! Prescribed skew tensors `S^k_ij` and `T^k_ij`.

use ndarray::Array3;
use rand::Rng;

use super::ConnectionError;
use crate::expr::Expr;
use crate::metric::{ChartPoint, GeometryError};
use crate::scalar::Scalar;

/// Tolerance on `|A^k_ij + A^k_ji|` for expression-valued tensors.
pub const SKEW_TOL: f64 = 1e-12;

/// A type (1,2) tensor skew in its lower indices, stored as `[k, i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub enum SkewTensor {
    Zero,
    Constant(Array3<f64>),
    Expression(Array3<Expr>),
}

impl SkewTensor {
    /// Validates exact skew-symmetry; `name` is used in the error ("S" or "T").
    pub fn constant(name: &str, a: Array3<f64>) -> Result<Self, ConnectionError> {
        let (m0, m1, m2) = a.dim();
        if m0 != m1 || m1 != m2 {
            return Err(ConnectionError::Invalid(format!(
                "{name} must be an m×m×m array, got {m0}×{m1}×{m2}"
            )));
        }
        for ((k, i, j), v) in a.indexed_iter() {
            if *v != -a[[k, j, i]] {
                return Err(ConnectionError::Skew {
                    name: name.to_string(),
                    k: k + 1,
                    i: i + 1,
                    j: j + 1,
                });
            }
        }
        Ok(SkewTensor::Constant(a))
    }

    /// Expression components; skew-symmetry is checked when evaluated and at
    /// the probe points given here.
    pub fn expression(
        name: &str,
        a: Array3<Expr>,
        probes: &[ChartPoint],
    ) -> Result<Self, ConnectionError> {
        let t = SkewTensor::Expression(a);
        for p in probes {
            t.eval_checked(name, p)?;
        }
        Ok(t)
    }

    /// Uniform entries in `[-scale, scale]` above the diagonal, mirrored exactly.
    pub fn random(dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut a = Array3::zeros((dim, dim, dim));
        for k in 0..dim {
            for i in 0..dim {
                for j in i + 1..dim {
                    let v = rng.random_range(-scale..=scale);
                    a[[k, i, j]] = v;
                    a[[k, j, i]] = -v;
                }
            }
        }
        SkewTensor::Constant(a)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SkewTensor::Zero => true,
            SkewTensor::Constant(a) => a.iter().all(|v| *v == 0.0),
            SkewTensor::Expression(_) => false,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SkewTensor::Zero => None,
            SkewTensor::Constant(a) => Some(a.dim().0),
            SkewTensor::Expression(a) => Some(a.dim().0),
        }
    }

    /// Components at a point.
    pub fn eval<S: Scalar>(&self, p: &ChartPoint<S>) -> Result<Array3<S>, ConnectionError> {
        let m = p.dim();
        if let Some(d) = self.dim() {
            if d != m {
                return Err(GeometryError::Dimension(format!(
                    "torsion tensor has dimension {d}, point has {m}"
                ))
                .into());
            }
        }
        Ok(match self {
            SkewTensor::Zero => Array3::from_elem((m, m, m), S::zero()),
            SkewTensor::Constant(a) => a.mapv(S::from_f64),
            SkewTensor::Expression(a) => {
                let mut out = Vec::with_capacity(m * m * m);
                for e in a.iter() {
                    out.push(e.eval(&p.x, &p.y).map_err(GeometryError::from)?);
                }
                Array3::from_shape_vec((m, m, m), out).expect("shape")
            }
        })
    }

    /// [`eval`](Self::eval) plus a skew check to [`SKEW_TOL`].
    pub fn eval_checked<S: Scalar>(
        &self,
        name: &str,
        p: &ChartPoint<S>,
    ) -> Result<Array3<S>, ConnectionError> {
        let a = self.eval(p)?;
        if let SkewTensor::Expression(_) = self {
            for ((k, i, j), v) in a.indexed_iter() {
                if (v.re() + a[[k, j, i]].re()).abs() > SKEW_TOL {
                    return Err(ConnectionError::Skew {
                        name: name.to_string(),
                        k: k + 1,
                        i: i + 1,
                        j: j + 1,
                    });
                }
            }
        }
        Ok(a)
    }
}

/// The pair `(S, T)` prescribing the vertical and horizontal torsion.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionInputs {
    pub s: SkewTensor,
    pub t: SkewTensor,
}

impl Default for TorsionInputs {
    fn default() -> Self {
        TorsionInputs {
            s: SkewTensor::Zero,
            t: SkewTensor::Zero,
        }
    }
}

impl TorsionInputs {
    pub fn new(s: SkewTensor, t: SkewTensor) -> Self {
        TorsionInputs { s, t }
    }

    pub fn eval<S: Scalar>(
        &self,
        p: &ChartPoint<S>,
    ) -> Result<(Array3<S>, Array3<S>), ConnectionError> {
        Ok((self.s.eval_checked("S", p)?, self.t.eval_checked("T", p)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_diagonal_entry_is_rejected_with_one_based_index() {
        let mut a = Array3::zeros((2, 2, 2));
        a[[0, 0, 0]] = 1.0;
        let err = SkewTensor::constant("S", a).unwrap_err().to_string();
        assert!(
            err.starts_with("S violates skew-symmetry at (k,i,j)=(1,1,1)"),
            "{err}"
        );
    }

    #[test]
    fn random_tensors_are_exactly_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let SkewTensor::Constant(a) = SkewTensor::random(4, 0.5, &mut rng) else {
            panic!()
        };
        assert!(SkewTensor::constant("T", a.clone()).is_ok());
        assert!(a.iter().any(|v| *v != 0.0));
        assert!(a.iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn expression_skew_checked_at_points() {
        let e = |s: &str| parse(s, 2).unwrap();
        let mut good = Array3::from_elem((2, 2, 2), e("0"));
        good[[1, 0, 1]] = e("x1*y2");
        good[[1, 1, 0]] = e("-x1*y2");
        let p = ChartPoint::new(vec![0.3, 0.1], vec![1.0, 2.0]).unwrap();
        let t = SkewTensor::expression("T", good.clone(), std::slice::from_ref(&p)).unwrap();
        let v: Array3<f64> = t.eval(&p).unwrap();
        assert_eq!(v[[1, 0, 1]], 0.6);
        let mut bad = good;
        bad[[1, 1, 0]] = e("x1*y1");
        let err = SkewTensor::expression("T", bad, &[p])
            .unwrap_err()
            .to_string();
        assert!(err.contains("(k,i,j)=(2,1,2)"), "{err}");
    }
}
