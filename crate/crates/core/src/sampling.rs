//! Reproducible sample points and random probe fields.
//!
//! Every point index owns its own ChaCha8 stream, so the sample set does not
//! depend on evaluation order or thread count.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::connection::{AdaptedField, AdaptedVector};
use crate::jet::{Jet, Layout};
use crate::metric::{ChartPoint, GeometryError};

/// Where sample points are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePlan {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Each base coordinate is uniform in `[x_box[0], x_box[1]]`.
    #[serde(default = "default_box")]
    pub x_box: [f64; 2],
    /// `|y|` is log-uniform in `[fiber_radius[0], fiber_radius[1]]`.
    #[serde(default = "default_radius")]
    pub fiber_radius: [f64; 2],
}

fn default_count() -> usize {
    200
}

fn default_seed() -> u64 {
    1
}

fn default_box() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_radius() -> [f64; 2] {
    [0.1, 10.0]
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: default_count(),
            seed: default_seed(),
            x_box: default_box(),
            fiber_radius: default_radius(),
        }
    }
}

impl SamplePlan {
    /// The first invalid field and what is wrong with it.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.count == 0 {
            return Err(("samples.count", "must be at least 1".into()));
        }
        let [lo, hi] = self.x_box;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err((
                "samples.x_box",
                format!("must satisfy lo < hi, got [{lo}, {hi}]"),
            ));
        }
        let [r0, r1] = self.fiber_radius;
        if !(r0.is_finite() && r1.is_finite() && 0.0 < r0 && r0 <= r1) {
            return Err((
                "samples.fiber_radius",
                format!("must satisfy 0 < lo <= hi, got [{r0}, {r1}]"),
            ));
        }
        Ok(())
    }

    /// Generator for point `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Sample point `index` and the generator positioned just after it, for
    /// drawing probes tied to that point.
    pub fn point(
        &self,
        dim: usize,
        index: usize,
    ) -> Result<(ChartPoint, ChaCha8Rng), GeometryError> {
        let mut rng = self.rng(index);
        let [lo, hi] = self.x_box;
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
        let y = fiber_vector(dim, self.fiber_radius, &mut rng);
        Ok((ChartPoint::new(x, y)?, rng))
    }

    pub fn points(&self, dim: usize) -> Result<Vec<ChartPoint>, GeometryError> {
        (0..self.count)
            .map(|i| self.point(dim, i).map(|(p, _)| p))
            .collect()
    }
}

/// `r·u` with `u` uniform on the unit sphere and `log r` uniform.
fn fiber_vector(dim: usize, [r0, r1]: [f64; 2], rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        let r = if r0 == r1 {
            r0
        } else {
            rng.random_range(r0.ln()..r1.ln()).exp()
        };
        return u.into_iter().map(|v| r * v / norm).collect();
    }
}

/// Standard-normal adapted vector.
pub fn random_vector(dim: usize, rng: &mut impl Rng) -> AdaptedVector {
    let mut draw = || -> Vec<f64> { (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect() };
    let h = draw();
    let v = draw();
    AdaptedVector::new(h, v)
}

/// Adapted field whose components are affine in the chart variables with
/// standard-normal values and gradients.
pub fn random_field(dim: usize, rng: &mut impl Rng) -> AdaptedField {
    let layout: Arc<Layout> = Layout::shared(2 * dim, 1);
    let mut component = || {
        let coeffs: Vec<f64> = (0..=2 * dim)
            .map(|_| StandardNormal.sample(&mut *rng))
            .collect();
        Jet::from_parts(&layout, coeffs)
    };
    let h = (0..dim).map(|_| component()).collect();
    let v = (0..dim).map(|_| component()).collect();
    AdaptedField::new(h, v)
}
