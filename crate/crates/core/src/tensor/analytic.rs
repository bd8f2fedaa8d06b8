//! Closed-form metrics on a chart, with optional orthonormal frames.

use std::fmt;
use std::sync::Arc;

use super::{Covector, GeometryError, MetricSample, SymMat2};

/// Orthonormal frame `(e₁, e₂)` at a point, optionally with its chart Jacobian.
///
/// `de1[k]` is `∂_k e₁` (and likewise for `de2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: [f64; 2],
    pub e2: [f64; 2],
    pub de1: Option<[[f64; 2]; 2]>,
    pub de2: Option<[[f64; 2]; 2]>,
}

impl Frame {
    pub fn standard() -> Self {
        Frame {
            e1: [1.0, 0.0],
            e2: [0.0, 1.0],
            de1: Some([[0.0; 2]; 2]),
            de2: Some([[0.0; 2]; 2]),
        }
    }

    /// Largest deviation of `⟨e_i, e_j⟩_G` from `δ_ij`.
    pub fn orthonormality_defect(&self, g: &SymMat2) -> f64 {
        let a = (g.quadratic(self.e1) - 1.0).abs();
        let b = (g.quadratic(self.e2) - 1.0).abs();
        let c = g.bilinear(self.e1, self.e2).abs();
        a.max(b).max(c)
    }
}

/// A smooth metric given in closed form on (part of) the chart.
pub trait AnalyticMetric: Send + Sync {
    /// Metric value and derivatives through second order.
    fn sample(&self, p: [f64; 2]) -> Result<MetricSample, GeometryError>;

    /// Positively oriented orthonormal frame, when the metric carries one.
    fn frame(&self, _p: [f64; 2]) -> Option<Frame> {
        None
    }

    /// Connection 1-form `⟨∇e₂, e₁⟩` of the frame, when known in closed form.
    fn connection_form(&self, _p: [f64; 2]) -> Option<Covector> {
        None
    }

    fn name(&self) -> &str;
}

/// Euclidean metric with the standard frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatMetric;

impl AnalyticMetric for FlatMetric {
    fn sample(&self, _p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        Ok(MetricSample::constant(SymMat2::IDENTITY))
    }

    fn frame(&self, _p: [f64; 2]) -> Option<Frame> {
        Some(Frame::standard())
    }

    fn connection_form(&self, _p: [f64; 2]) -> Option<Covector> {
        Some(Covector([0.0, 0.0]))
    }

    fn name(&self) -> &str {
        "flat"
    }
}

/// A constant SPD metric; its frame is the Cholesky-orthonormalized coordinate basis.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMetric(pub SymMat2);

impl AnalyticMetric for ConstantMetric {
    fn sample(&self, _p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        self.0.check_spd()?;
        Ok(MetricSample::constant(self.0))
    }

    fn frame(&self, _p: [f64; 2]) -> Option<Frame> {
        let g = self.0;
        if !g.is_positive_definite() {
            return None;
        }
        // Gram-Schmidt of ∂x, ∂y in G
        let e1 = [1.0 / g.xx.sqrt(), 0.0];
        let w = [-g.xy / g.xx, 1.0];
        let nw = g.quadratic(w).sqrt();
        let e2 = [w[0] / nw, w[1] / nw];
        Some(Frame {
            e1,
            e2,
            de1: Some([[0.0; 2]; 2]),
            de2: Some([[0.0; 2]; 2]),
        })
    }

    fn connection_form(&self, _p: [f64; 2]) -> Option<Covector> {
        Some(Covector([0.0, 0.0]))
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// Orthographic chart `(x, y) ↦ (x, y, √(1 − x² − y²))` of the unit sphere.
///
/// `G = [1 − y², xy; xy, 1 − x²] / (1 − x² − y²)`, defined for `x² + y² < 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SphericalCap;

impl SphericalCap {
    fn check(p: [f64; 2]) -> Result<f64, GeometryError> {
        let w = 1.0 - p[0] * p[0] - p[1] * p[1];
        if w <= 0.0 || !w.is_finite() {
            return Err(GeometryError::OutsideDomain { x: p[0], y: p[1] });
        }
        Ok(w)
    }

    /// The exact connection form of the benchmark frame.
    pub fn alpha(p: [f64; 2]) -> Covector {
        let (x, y) = (p[0], p[1]);
        let w = 1.0 - x * x - y * y;
        let s = -1.0 / w.sqrt();
        Covector([s * y, s * x * y * y / (1.0 - y * y)])
    }
}

impl AnalyticMetric for SphericalCap {
    fn sample(&self, p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        let w = Self::check(p)?;
        let (x, y) = (p[0], p[1]);
        // G = N / w with N = [1 − y², xy; xy, 1 − x²]
        let n = SymMat2::new(1.0 - y * y, x * y, 1.0 - x * x);
        let dn = [SymMat2::new(0.0, y, -2.0 * x), SymMat2::new(-2.0 * y, x, 0.0)];
        let d2n = [
            SymMat2::new(0.0, 0.0, -2.0),
            SymMat2::new(0.0, 1.0, 0.0),
            SymMat2::new(-2.0, 0.0, 0.0),
        ];
        let dw = [-2.0 * x, -2.0 * y];
        // ∂_a∂_b w = −2 δ_ab
        let d2w = |a: usize, b: usize| if a == b { -2.0 } else { 0.0 };
        let g = n.scale(1.0 / w);
        let dg = [
            dn[0].scale(1.0 / w).sub(&n.scale(dw[0] / (w * w))),
            dn[1].scale(1.0 / w).sub(&n.scale(dw[1] / (w * w))),
        ];
        let second = |a: usize, b: usize, d2: &SymMat2| {
            d2.scale(1.0 / w)
                .sub(&dn[a].scale(dw[b] / (w * w)))
                .sub(&dn[b].scale(dw[a] / (w * w)))
                .sub(&n.scale(d2w(a, b) / (w * w)))
                .add(&n.scale(2.0 * dw[a] * dw[b] / (w * w * w)))
        };
        let d2g = [second(0, 0, &d2n[0]), second(0, 1, &d2n[1]), second(1, 1, &d2n[2])];
        Ok(MetricSample {
            g,
            dg,
            d2g: Some(d2g),
        })
    }

    fn frame(&self, p: [f64; 2]) -> Option<Frame> {
        let w = Self::check(p).ok()?;
        let (x, y) = (p[0], p[1]);
        let q = 1.0 - y * y;
        let sq = q.sqrt();
        let e1x = (w / q).sqrt();
        let de1x = [-x / (q * e1x), -y * x * x / (q * q * e1x)];
        let e2x = -x * y / sq;
        let de2x = [-y / sq, -x / (q * sq)];
        let e2y = sq;
        let de2y = [0.0, -y / sq];
        Some(Frame {
            e1: [e1x, 0.0],
            e2: [e2x, e2y],
            de1: Some([[de1x[0], 0.0], [de1x[1], 0.0]]),
            de2: Some([[de2x[0], de2y[0]], [de2x[1], de2y[1]]]),
        })
    }

    fn connection_form(&self, p: [f64; 2]) -> Option<Covector> {
        Self::check(p).ok()?;
        Some(Self::alpha(p))
    }

    fn name(&self) -> &str {
        "spherical-cap"
    }
}

type SampleFn = dyn Fn([f64; 2]) -> Result<MetricSample, GeometryError> + Send + Sync;
type FrameFn = dyn Fn([f64; 2]) -> Option<Frame> + Send + Sync;

/// Metric defined by closures; handy for polynomial test fields.
#[derive(Clone)]
pub struct FnMetric {
    name: String,
    sample: Arc<SampleFn>,
    frame: Option<Arc<FrameFn>>,
}

impl FnMetric {
    pub fn new(
        name: impl Into<String>,
        sample: impl Fn([f64; 2]) -> Result<MetricSample, GeometryError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            sample: Arc::new(sample),
            frame: None,
        }
    }

    pub fn with_frame(
        mut self,
        frame: impl Fn([f64; 2]) -> Option<Frame> + Send + Sync + 'static,
    ) -> Self {
        self.frame = Some(Arc::new(frame));
        self
    }
}

impl fmt::Debug for FnMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMetric").field("name", &self.name).finish()
    }
}

impl AnalyticMetric for FnMetric {
    fn sample(&self, p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        (self.sample)(p)
    }

    fn frame(&self, p: [f64; 2]) -> Option<Frame> {
        self.frame.as_ref().and_then(|f| f(p))
    }

    fn name(&self) -> &str {
        &self.name
    }
}

impl<M: AnalyticMetric + ?Sized> AnalyticMetric for &M {
    fn sample(&self, p: [f64; 2]) -> Result<MetricSample, GeometryError> {
        (**self).sample(p)
    }
    fn frame(&self, p: [f64; 2]) -> Option<Frame> {
        (**self).frame(p)
    }
    fn connection_form(&self, p: [f64; 2]) -> Option<Covector> {
        (**self).connection_form(p)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}
