//! Metrics that may be discontinuous across triangles.

use crate::tensor::{AnalyticMetric, GeometryError, MetricSample};

/// A metric evaluated from within a given triangle.
///
/// Smooth metrics ignore the triangle; Regge metrics use it to pick the
/// polynomial piece, which matters on edges and at vertices.
pub trait PiecewiseMetric: Sync {
    fn sample_in(&self, triangle: usize, p: [f64; 2]) -> Result<MetricSample, GeometryError>;

    fn label(&self) -> String;
}

impl<M: AnalyticMetric> PiecewiseMetric for M {
    fn sample_in(&self, _triangle: usize, p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        self.sample(p)
    }

    fn label(&self) -> String {
        self.name().to_string()
    }
}

/// `a·first + b·second`, evaluated piece by piece.
///
/// With `a = 1, b = −1` this is a difference of metrics, which need not be
/// positive definite; consumers that need a metric should check.
pub struct Combination<'a> {
    pub a: f64,
    pub first: &'a dyn PiecewiseMetric,
    pub b: f64,
    pub second: &'a dyn PiecewiseMetric,
}

impl<'a> Combination<'a> {
    /// `t·first + (1 − t)·second`.
    pub fn interpolate(t: f64, first: &'a dyn PiecewiseMetric, second: &'a dyn PiecewiseMetric) -> Self {
        Combination {
            a: t,
            first,
            b: 1.0 - t,
            second,
        }
    }

    pub fn difference(first: &'a dyn PiecewiseMetric, second: &'a dyn PiecewiseMetric) -> Self {
        Combination {
            a: 1.0,
            first,
            b: -1.0,
            second,
        }
    }
}

impl PiecewiseMetric for Combination<'_> {
    fn sample_in(&self, triangle: usize, p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        let x = self.first.sample_in(triangle, p)?;
        let y = self.second.sample_in(triangle, p)?;
        Ok(x.combine(self.a, &y, self.b))
    }

    fn label(&self) -> String {
        format!("{}*({}) + {}*({})", self.a, self.first.label(), self.b, self.second.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{FlatMetric, SphericalCap, SymMat2};

    #[test]
    fn combination_is_linear() {
        let cap = SphericalCap;
        let flat = FlatMetric;
        let mid = Combination::interpolate(0.25, &cap, &flat);
        let p = [0.1, -0.2];
        let s = mid.sample_in(0, p).unwrap();
        let c = cap.sample(p).unwrap();
        let expect = c.g.scale(0.25).add(&SymMat2::IDENTITY.scale(0.75));
        assert!(s.g.sub(&expect).max_abs() < 1e-15);
        assert!(s.dg[0].sub(&c.dg[0].scale(0.25)).max_abs() < 1e-15);
        let diff = Combination::difference(&cap, &cap);
        assert_eq!(diff.sample_in(3, p).unwrap().g.max_abs(), 0.0);
    }
}
