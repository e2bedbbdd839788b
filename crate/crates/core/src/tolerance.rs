use serde::{Deserialize, Serialize};

/// Mixed absolute/relative tolerance: `|a − b| ≤ atol + rtol · scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            atol: 1e-12,
            rtol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

/// An observed difference together with the magnitude it should be judged against.
///
/// For two-route comparisons the scale is `max(|a|, |b|)`; for identities that
/// should cancel to zero it is the sum of the absolute values of the terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Discrepancy {
    pub diff: f64,
    pub scale: f64,
}

impl Discrepancy {
    pub fn between(a: f64, b: f64) -> Self {
        Discrepancy {
            diff: (a - b).abs(),
            scale: a.abs().max(b.abs()),
        }
    }

    /// Two routes to the same tensor: largest entrywise difference, judged
    /// against the largest entry of either side.
    pub fn arrays<'a>(
        a: impl IntoIterator<Item = &'a f64>,
        b: impl IntoIterator<Item = &'a f64>,
    ) -> Self {
        a.into_iter()
            .zip(b)
            .fold(Discrepancy::default(), |acc, (x, y)| Discrepancy {
                diff: acc.diff.max((x - y).abs()),
                scale: acc.scale.max(x.abs()).max(y.abs()),
            })
    }

    /// Largest entry of a tensor that should vanish, judged against `scale`.
    pub fn vanishing<'a>(values: impl IntoIterator<Item = &'a f64>, scale: f64) -> Self {
        Discrepancy {
            diff: values.into_iter().fold(0.0, |acc, v| acc.max(v.abs())),
            scale,
        }
    }

    pub fn residual(value: f64, scale: f64) -> Self {
        Discrepancy {
            diff: value.abs(),
            scale,
        }
    }

    /// `diff / (atol + rtol·scale)`; at most 1 means within tolerance.
    pub fn ratio(&self, tol: &Tolerance) -> f64 {
        let t = tol.threshold(self.scale);
        if self.diff.is_nan() {
            f64::INFINITY
        } else if t == 0.0 {
            if self.diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.diff / t
        }
    }

    pub fn within(&self, tol: &Tolerance) -> bool {
        self.ratio(tol) <= 1.0
    }

    /// The worse of two discrepancies under `tol`.
    pub fn worst(self, other: Discrepancy, tol: &Tolerance) -> Discrepancy {
        if other.ratio(tol) > self.ratio(tol) {
            other
        } else {
            self
        }
    }
}

/// Worst entry of a collection of discrepancies.
pub fn worst_of(items: impl IntoIterator<Item = Discrepancy>, tol: &Tolerance) -> Discrepancy {
    items
        .into_iter()
        .fold(Discrepancy::default(), |acc, d| acc.worst(d, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_threshold() {
        let tol = Tolerance::default();
        assert!(Discrepancy::between(1.0, 1.0 + 5e-9).within(&tol));
        assert!(!Discrepancy::between(1.0, 1.0 + 5e-8).within(&tol));
        assert!(Discrepancy::between(0.0, 5e-13).within(&tol));
        assert!(!Discrepancy::between(0.0, 5e-12).within(&tol));
        assert!(!Discrepancy::residual(f64::NAN, 1.0).within(&tol));
    }

    #[test]
    fn array_scale_is_global() {
        let d = Discrepancy::arrays(&[100.0, 1e-3], &[100.0, 1e-3 + 1e-7]);
        assert_eq!(d.scale, 100.0);
        assert!(d.within(&Tolerance::default()));
        let v = Discrepancy::vanishing(&[1e-13, -3e-13], 0.0);
        assert_eq!(v.diff, 3e-13);
    }

    #[test]
    fn partial_table_keeps_defaults() {
        let t: Tolerance = toml::from_str("rtol = 1e-6").unwrap();
        assert_eq!(
            t,
            Tolerance {
                atol: 1e-12,
                rtol: 1e-6
            }
        );
    }
}
