use std::fmt;

use thiserror::Error;

use crate::jet::{seed_point, Jet, VarIndex};
use crate::scalar::Scalar;

/// Magnitude below which a denominator, radicand or logarithm argument is
/// treated as singular.
pub const SINGULAR_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("division by (near) zero: denominator {0:e}")]
    DivisionByZero(f64),
    #[error("sqrt of non-positive value {0:e}")]
    Sqrt(f64),
    #[error("log of non-positive value {0:e}")]
    Log(f64),
    #[error("non-integer power of non-positive base {0:e}")]
    Power(f64),
    #[error("{0}")]
    Guard(String),
}

pub(crate) fn checked_div<S: Scalar>(a: S, b: S) -> Result<S, DomainError> {
    let d = b.re();
    if d.abs() <= SINGULAR_EPS || !d.is_finite() {
        return Err(DomainError::DivisionByZero(d));
    }
    Ok(a / b)
}

pub(crate) fn checked_sqrt<S: Scalar>(a: S) -> Result<S, DomainError> {
    let v = a.re();
    if v <= SINGULAR_EPS || !v.is_finite() {
        return Err(DomainError::Sqrt(v));
    }
    Ok(a.sqrt())
}

pub(crate) fn checked_ln<S: Scalar>(a: S) -> Result<S, DomainError> {
    let v = a.re();
    if v <= SINGULAR_EPS || !v.is_finite() {
        return Err(DomainError::Log(v));
    }
    Ok(a.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(VarIndex),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    /// Value of a subtree that contains no variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Var(_) => None,
            Node::Neg(a) => a.constant_value().map(|v| -v),
            _ => {
                if self.has_vars() {
                    None
                } else {
                    self.eval::<f64>(&[], &[]).ok()
                }
            }
        }
    }

    pub fn has_vars(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |_| found = true);
        found
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(VarIndex)) {
        match self {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Neg(a) | Node::Call(_, a) => a.visit_vars(f),
            Node::Binary(_, a, b) | Node::Pow(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, DomainError> {
        Ok(match self {
            Node::Const(c) => S::from_f64(*c),
            Node::Var(VarIndex::Base(i)) => x[*i].clone(),
            Node::Var(VarIndex::Fiber(i)) => y[*i].clone(),
            Node::Neg(a) => -a.eval(x, y)?,
            Node::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, y)?, b.eval(x, y)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => checked_div(a, b)?,
                }
            }
            Node::Pow(base, exponent) => {
                let b = base.eval(x, y)?;
                match exponent.constant_value() {
                    Some(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => {
                        if c < 0.0 && b.re().abs() <= SINGULAR_EPS {
                            return Err(DomainError::DivisionByZero(b.re()));
                        }
                        b.powi(c as i32)
                    }
                    Some(c) => {
                        if b.re() <= SINGULAR_EPS {
                            return Err(DomainError::Power(b.re()));
                        }
                        b.powf(c)
                    }
                    None => {
                        let e = exponent.eval(x, y)?;
                        if b.re() <= SINGULAR_EPS {
                            return Err(DomainError::Power(b.re()));
                        }
                        (e * b.ln()).exp()
                    }
                }
            }
            Node::Call(func, a) => {
                let a = a.eval(x, y)?;
                match func {
                    Func::Sqrt => checked_sqrt(a)?,
                    Func::Exp => a.exp(),
                    Func::Log => checked_ln(a)?,
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        })
    }
}

/// Fully parenthesized rendering; reparses to an equivalent tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Pow(a, b) => write!(f, "({a}^{b})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression over `x1..xm, y1..ym`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    dim: usize,
    root: Node,
}

impl Expr {
    pub(crate) fn new(dim: usize, root: Node) -> Self {
        Expr { dim, root }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn uses_base(&self) -> bool {
        let mut found = false;
        self.root
            .visit_vars(&mut |v| found |= matches!(v, VarIndex::Base(_)));
        found
    }

    pub fn uses_fiber(&self) -> bool {
        let mut found = false;
        self.root
            .visit_vars(&mut |v| found |= matches!(v, VarIndex::Fiber(_)));
        found
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, DomainError> {
        assert_eq!(x.len(), self.dim, "base dimension mismatch");
        assert_eq!(y.len(), self.dim, "fiber dimension mismatch");
        self.root.eval(x, y)
    }

    /// Jet of the expression at `(x, y)` with derivatives up to `order` (0..=3).
    pub fn eval_jet(&self, x: &[f64], y: &[f64], order: usize) -> Result<Jet<f64>, EvalError> {
        if order == 0 {
            return Ok(Jet::constant(self.eval(x, y)?));
        }
        let vars = seed_point(x, y, order)?;
        let (jx, jy) = vars.split_at(self.dim);
        Ok(self.eval(jx, jy)?)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Jet(#[from] crate::jet::JetError),
}
