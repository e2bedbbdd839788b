//! Expression language for user-supplied energies and connection components.
//!
//! The grammar is documented in `docs/expression-grammar.md`.

mod ast;
mod parser;

pub(crate) use ast::checked_sqrt;
pub use ast::{BinOp, DomainError, EvalError, Expr, Func, Node, SINGULAR_EPS};
pub use parser::{parse, ExprError};

/// Grammar version accepted by [`parse`].
pub const GRAMMAR_VERSION: u32 = 1;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_jet_sum_of_squares() {
        let e = parse("y1^2+y2^2", 2).unwrap();
        let j = e.eval_jet(&[0.0, 0.0], &[3.0, 4.0], 2).unwrap();
        assert_eq!(*j.value(), 25.0);
        assert_eq!(j.partial(&[2, 2]).unwrap(), 2.0);
        assert_eq!(j.partial(&[2, 3]).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_squared_matches_polynomial() {
        let a = parse("sqrt(y1^2+y2^2)^2", 2).unwrap();
        let b = parse("y1^2+y2^2", 2).unwrap();
        let ja = a.eval_jet(&[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        let jb = b.eval_jet(&[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        for (u, v) in ja.coeffs().iter().zip(jb.coeffs()) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn log_of_negative_is_domain_error() {
        let e = parse("log(y1)", 2).unwrap();
        let err = e.eval_jet(&[0.0, 0.0], &[-1.0, 1.0], 1).unwrap_err();
        assert!(matches!(err, EvalError::Domain(DomainError::Log(_))));
    }

    #[test]
    fn division_near_zero_is_domain_error() {
        let e = parse("y1 / (y2 - 1)", 2).unwrap();
        assert!(matches!(
            e.eval::<f64>(&[0.0, 0.0], &[1.0, 1.0]),
            Err(DomainError::DivisionByZero(_))
        ));
        let e = parse("sqrt(y1 - 1)", 1).unwrap();
        assert!(matches!(
            e.eval::<f64>(&[0.0], &[1.0]),
            Err(DomainError::Sqrt(_))
        ));
    }

    #[test]
    fn order_zero_is_plain_arithmetic() {
        let e = parse("exp(x1)*sin(y1) + cos(x1*y1)/(1+y1^2)", 1).unwrap();
        let (x, y): (f64, f64) = (0.3, -1.2);
        let plain = x.exp() * y.sin() + (x * y).cos() / (1.0 + y * y);
        let j = e.eval_jet(&[x], &[y], 0).unwrap();
        assert_relative_eq!(*j.value(), plain, max_relative = 1e-15);
    }

    #[test]
    fn f32_evaluation() {
        let e = parse("y1^2 + 2*y2^2", 2).unwrap();
        let v: f32 = e.eval(&[0.0f32, 0.0], &[1.5f32, 0.5]).unwrap();
        assert_eq!(v, 2.75);
    }
}
