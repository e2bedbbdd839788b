//! Forward-mode automatic differentiation on truncated multivariate jets.
//!
//! A [`Jet`] carries the value of a function and every mixed partial derivative
//! of total order up to 3 in the `2m` chart variables `(x¹..xᵐ, y¹..yᵐ)`. Entries
//! are plain derivatives (not Taylor coefficients), stored densely in graded
//! order: the value, then `∂_a`, then `∂_a∂_b` for `a ≤ b`, then `∂_a∂_b∂_c` for
//! `a ≤ b ≤ c`.
//!
//! A jet is itself a [`Scalar`], so `Jet<Jet<f64>>` differentiates derivatives.
//! That nesting is how fourth derivatives of the energy (needed for `δN/δx`)
//! are obtained while each level stays at order ≤ 3.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Scalar;

pub const MAX_ORDER: usize = 3;
/// Largest supported variable count (`m ≤ 8` fiber dimensions).
pub const MAX_VARS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("derivative order {0} out of range (expected 1..=3)")]
    OrderOutOfRange(usize),
    #[error("point not in M': fiber coordinates are zero")]
    ZeroFiber,
    #[error("requested derivative of order {requested} but the jet carries order {carried}")]
    OrderExceeded { requested: usize, carried: usize },
    #[error("variable index {index} out of range for {vars} variables")]
    VariableOutOfRange { index: usize, vars: usize },
    #[error("too many variables: {0} (at most {MAX_VARS})")]
    TooManyVariables(usize),
}

/// One chart variable: a base coordinate `xⁱ` or a fiber coordinate `yⁱ`.
///
/// Indices are zero-based; `Display` prints the one-based names used by the
/// expression language (`x1`, `y2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarIndex {
    Base(usize),
    Fiber(usize),
}

impl VarIndex {
    /// Flat position among the `2m` jet variables (base first, then fiber).
    pub fn flat(self, dim: usize) -> usize {
        match self {
            VarIndex::Base(i) => i,
            VarIndex::Fiber(i) => dim + i,
        }
    }

    pub fn index(self) -> usize {
        match self {
            VarIndex::Base(i) | VarIndex::Fiber(i) => i,
        }
    }
}

impl fmt::Display for VarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarIndex::Base(i) => write!(f, "x{}", i + 1),
            VarIndex::Fiber(i) => write!(f, "y{}", i + 1),
        }
    }
}

/// Multi-index bookkeeping and the Leibniz product table for a given
/// `(variables, order)` pair. Shared between all jets of the same shape.
#[derive(Debug)]
pub struct Layout {
    vars: usize,
    order: usize,
    /// Sorted variable tuples, one per stored entry.
    indices: Vec<Vec<u8>>,
    pos2: Vec<u32>,
    pos3: Vec<u32>,
    /// `(out, lhs, rhs, weight)`: `∂^γ(fg) += w ∂^α f ∂^β g` with `α + β = γ`.
    products: Vec<(u32, u32, u32, f64)>,
}

impl Layout {
    fn build(vars: usize, order: usize) -> Layout {
        fn extend(prefix: &mut Vec<u8>, len: usize, vars: usize, out: &mut Vec<Vec<u8>>) {
            if prefix.len() == len {
                out.push(prefix.clone());
                return;
            }
            let start = prefix.last().copied().unwrap_or(0);
            for v in start..vars as u8 {
                prefix.push(v);
                extend(prefix, len, vars, out);
                prefix.pop();
            }
        }
        let mut indices: Vec<Vec<u8>> = vec![vec![]];
        for k in 1..=order {
            extend(&mut Vec::with_capacity(k), k, vars, &mut indices);
        }
        let mut pos2 = vec![u32::MAX; if order >= 2 { vars * vars } else { 0 }];
        let mut pos3 = vec![u32::MAX; if order >= 3 { vars * vars * vars } else { 0 }];
        for (p, idx) in indices.iter().enumerate() {
            match idx.len() {
                2 => pos2[idx[0] as usize * vars + idx[1] as usize] = p as u32,
                3 => {
                    pos3[(idx[0] as usize * vars + idx[1] as usize) * vars + idx[2] as usize] =
                        p as u32
                }
                _ => {}
            }
        }
        let mut layout = Layout {
            vars,
            order,
            indices,
            pos2,
            pos3,
            products: Vec::new(),
        };
        layout.products = layout.product_table();
        layout
    }

    fn product_table(&self) -> Vec<(u32, u32, u32, f64)> {
        let mut out = Vec::new();
        for (g, gamma) in self.indices.iter().enumerate() {
            // distinct sub-multisets of gamma via per-variable multiplicities
            let mut counts: Vec<(u8, usize)> = Vec::new();
            for &v in gamma {
                match counts.last_mut() {
                    Some((w, c)) if *w == v => *c += 1,
                    _ => counts.push((v, 1)),
                }
            }
            let mut choice = vec![0usize; counts.len()];
            loop {
                let mut alpha = Vec::new();
                let mut beta = Vec::new();
                let mut weight = 1.0;
                for (slot, &(v, c)) in counts.iter().enumerate() {
                    let a = choice[slot];
                    alpha.extend(std::iter::repeat_n(v, a));
                    beta.extend(std::iter::repeat_n(v, c - a));
                    weight *= binomial(c, a);
                }
                out.push((
                    g as u32,
                    self.position(&alpha) as u32,
                    self.position(&beta) as u32,
                    weight,
                ));
                let mut slot = 0;
                loop {
                    if slot == counts.len() {
                        break;
                    }
                    if choice[slot] < counts[slot].1 {
                        choice[slot] += 1;
                        break;
                    }
                    choice[slot] = 0;
                    slot += 1;
                }
                if slot == counts.len() {
                    break;
                }
            }
        }
        out
    }

    fn position(&self, sorted: &[u8]) -> usize {
        let n = self.vars;
        match sorted.len() {
            0 => 0,
            1 => 1 + sorted[0] as usize,
            2 => self.pos2[sorted[0] as usize * n + sorted[1] as usize] as usize,
            3 => {
                self.pos3[(sorted[0] as usize * n + sorted[1] as usize) * n + sorted[2] as usize]
                    as usize
            }
            _ => unreachable!("order above 3"),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sorted variable tuple of each stored entry, in storage order.
    pub fn multi_indices(&self) -> &[Vec<u8>] {
        &self.indices
    }

    /// Storage slot of a multi-index given as a list of flat variables (any order).
    pub fn slot(&self, vars: &[usize]) -> Result<usize, JetError> {
        if vars.len() > self.order {
            return Err(JetError::OrderExceeded {
                requested: vars.len(),
                carried: self.order,
            });
        }
        let mut sorted = [0u8; MAX_ORDER];
        for (s, &v) in sorted.iter_mut().zip(vars) {
            if v >= self.vars {
                return Err(JetError::VariableOutOfRange {
                    index: v,
                    vars: self.vars,
                });
            }
            *s = v as u8;
        }
        let sorted = &mut sorted[..vars.len()];
        sorted.sort_unstable();
        Ok(self.position(sorted))
    }

    /// Shared layout for `vars` variables at the given order.
    pub fn shared(vars: usize, order: usize) -> Arc<Layout> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((vars, order))
            .or_insert_with(|| Arc::new(Layout::build(vars, order)))
            .clone()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Truncated jet over scalar `T`.
///
/// A jet without a layout is a constant: it broadcasts against any other jet.
#[derive(Clone, Debug)]
pub struct Jet<T> {
    layout: Option<Arc<Layout>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T) -> Self {
        Jet {
            layout: None,
            coeffs: vec![value],
        }
    }

    /// The independent variable `var` (flat index) with the given value.
    pub fn variable(value: T, var: usize, layout: &Arc<Layout>) -> Self {
        let mut coeffs = vec![T::zero(); layout.len()];
        coeffs[0] = value;
        if layout.order >= 1 {
            coeffs[1 + var] = T::one();
        }
        Jet {
            layout: Some(layout.clone()),
            coeffs,
        }
    }

    /// Assemble a jet from a value and its entries in storage order.
    pub fn from_parts(layout: &Arc<Layout>, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        Jet {
            layout: Some(layout.clone()),
            coeffs,
        }
    }

    /// Seed one jet per variable, variables ordered as given. `order` may be 0..=3.
    pub fn seed_values(values: &[T], order: usize) -> Result<Vec<Self>, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderOutOfRange(order));
        }
        if values.len() > MAX_VARS {
            return Err(JetError::TooManyVariables(values.len()));
        }
        let layout = Layout::shared(values.len(), order);
        Ok(values
            .iter()
            .enumerate()
            .map(|(i, v)| Jet::variable(v.clone(), i, &layout))
            .collect())
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    pub fn layout(&self) -> Option<&Arc<Layout>> {
        self.layout.as_ref()
    }

    pub fn order(&self) -> usize {
        self.layout.as_ref().map_or(0, |l| l.order)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.layout.is_none()
    }

    /// Mixed partial derivative over the listed flat variables (plain derivative).
    ///
    /// Constants return zero for every non-empty index.
    pub fn partial(&self, vars: &[usize]) -> Result<T, JetError> {
        match &self.layout {
            None => {
                if vars.is_empty() {
                    Ok(self.coeffs[0].clone())
                } else {
                    Ok(T::zero())
                }
            }
            Some(l) => Ok(self.coeffs[l.slot(vars)?].clone()),
        }
    }

    /// First partial along a flat variable; zero for constants.
    pub fn d(&self, var: usize) -> T {
        match &self.layout {
            Some(l) if l.order >= 1 => self.coeffs[1 + var].clone(),
            _ => T::zero(),
        }
    }

    /// `∂²/∂a∂b`, panicking when the jet does not carry order 2.
    pub fn d2(&self, a: usize, b: usize) -> T {
        self.partial(&[a, b]).expect("jet order too low for d2")
    }

    pub fn d3(&self, a: usize, b: usize, c: usize) -> T {
        self.partial(&[a, b, c]).expect("jet order too low for d3")
    }

    fn shape_of(a: &Self, b: &Self) -> Option<Arc<Layout>> {
        match (&a.layout, &b.layout) {
            (Some(x), Some(y)) => {
                assert!(
                    Arc::ptr_eq(x, y) || (x.vars == y.vars && x.order == y.order),
                    "mixing jets of different shapes"
                );
                Some(x.clone())
            }
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }

    fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// `f(self)` from the derivatives `f(u₀), f'(u₀), f''(u₀), f'''(u₀)`.
    ///
    /// Exact in the truncated algebra because `u − u₀` is nilpotent of degree
    /// `order + 1`.
    fn compose(&self, derivs: impl Fn(usize) -> T) -> Self {
        let order = self.order();
        let Some(layout) = &self.layout else {
            return Jet::constant(derivs(0));
        };
        let mut du = self.clone();
        du.coeffs[0] = T::zero();
        let mut acc = Jet::constant(derivs(0));
        let mut power = du.clone();
        let mut factorial = 1.0;
        for k in 1..=order {
            factorial *= k as f64;
            let c = derivs(k).scale(1.0 / factorial);
            acc = acc + power.map(|v| v.clone() * c.clone());
            if k < order {
                power = power * du.clone();
            }
        }
        debug_assert!(acc.layout.is_some() || layout.order == 0);
        acc
    }
}

impl<T: Scalar> From<T> for Jet<T> {
    fn from(v: T) -> Self {
        Jet::constant(v)
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Self {
        match (&self.layout, &rhs.layout) {
            (_, None) => {
                let mut out = self;
                out.coeffs[0] = out.coeffs[0].clone() + rhs.coeffs[0].clone();
                out
            }
            (None, _) => {
                let mut out = rhs;
                out.coeffs[0] = self.coeffs[0].clone() + out.coeffs[0].clone();
                out
            }
            _ => {
                let layout = Jet::shape_of(&self, &rhs);
                Jet {
                    layout,
                    coeffs: self
                        .coeffs
                        .into_iter()
                        .zip(rhs.coeffs)
                        .map(|(a, b)| a + b)
                        .collect(),
                }
            }
        }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Self {
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.into_iter().map(|v| -v).collect(),
        }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Self {
        match (&self.layout, &rhs.layout) {
            (_, None) => {
                let c = rhs.coeffs[0].clone();
                self.map(|v| v.clone() * c.clone())
            }
            (None, _) => {
                let c = self.coeffs[0].clone();
                rhs.map(|v| c.clone() * v.clone())
            }
            _ => {
                let layout = Jet::shape_of(&self, &rhs).expect("non-constant");
                let mut coeffs = vec![T::zero(); layout.len()];
                for &(out, a, b, w) in &layout.products {
                    let term = self.coeffs[a as usize].clone() * rhs.coeffs[b as usize].clone();
                    let term = if w == 1.0 { term } else { term.scale(w) };
                    let slot = &mut coeffs[out as usize];
                    *slot = slot.clone() + term;
                }
                Jet {
                    layout: Some(layout),
                    coeffs,
                }
            }
        }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Jet<T>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        if rhs.layout.is_none() {
            let c = rhs.coeffs[0].clone().recip();
            return self.map(|v| v.clone() * c.clone());
        }
        self * rhs.recip()
    }
}

impl<T: Scalar> Zero for Jet<T> {
    fn zero() -> Self {
        Jet::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl<T: Scalar> One for Jet<T> {
    fn one() -> Self {
        Jet::constant(T::one())
    }
}

fn falling(c: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (c - i as f64))
}

impl<T: Scalar> Scalar for Jet<T> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(T::from_f64(v))
    }

    fn re(&self) -> f64 {
        self.coeffs[0].re()
    }

    fn scale(&self, c: f64) -> Self {
        self.map(|v| v.scale(c))
    }

    fn sqrt(&self) -> Self {
        let u = self.value().clone();
        let s = u.sqrt();
        self.compose(|k| match k {
            0 => s.clone(),
            1 => s.recip().scale(0.5),
            2 => (s.clone() * u.clone()).recip().scale(-0.25),
            _ => (s.clone() * u.clone() * u.clone()).recip().scale(0.375),
        })
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(|_| e.clone())
    }

    fn ln(&self) -> Self {
        let u = self.value().clone();
        self.compose(|k| match k {
            0 => u.ln(),
            1 => u.recip(),
            2 => -(u.clone() * u.clone()).recip(),
            _ => (u.clone() * u.clone() * u.clone()).recip().scale(2.0),
        })
    }

    fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        self.compose(|k| match k % 4 {
            0 => s.clone(),
            1 => c.clone(),
            2 => -s.clone(),
            _ => -c.clone(),
        })
    }

    fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        self.compose(|k| match k % 4 {
            0 => c.clone(),
            1 => -s.clone(),
            2 => -c.clone(),
            _ => s.clone(),
        })
    }

    fn powi(&self, n: i32) -> Self {
        let u = self.value().clone();
        self.compose(|k| {
            let ff = falling(n as f64, k);
            if ff == 0.0 {
                T::zero()
            } else {
                u.powi(n - k as i32).scale(ff)
            }
        })
    }

    fn powf(&self, c: f64) -> Self {
        let u = self.value().clone();
        self.compose(|k| {
            let ff = falling(c, k);
            if ff == 0.0 {
                T::zero()
            } else {
                u.powf(c - k as f64).scale(ff)
            }
        })
    }

    fn recip(&self) -> Self {
        let u = self.value().clone();
        let inv = u.recip();
        self.compose(|k| {
            // (1/u)^(k) = (-1)^k k! / u^(k+1)
            let mut p = inv.clone();
            for _ in 0..k {
                p = p * inv.clone();
            }
            p.scale(falling(-1.0, k))
        })
    }
}

/// Seed the `2m` chart variables `(x, y)` at `order`, rejecting the zero section.
pub fn seed(x: &[f64], y: &[f64], order: usize) -> Result<Vec<Jet<f64>>, JetError> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(JetError::OrderOutOfRange(order));
    }
    seed_point(x, y, order)
}

/// Like [`seed`] but generic over the scalar and allowing `order = 0`.
pub fn seed_point<T: Scalar>(x: &[T], y: &[T], order: usize) -> Result<Vec<Jet<T>>, JetError> {
    if y.iter().all(|v| v.re() == 0.0) {
        return Err(JetError::ZeroFiber);
    }
    let values: Vec<T> = x.iter().chain(y).cloned().collect();
    Jet::seed_values(&values, order)
}
