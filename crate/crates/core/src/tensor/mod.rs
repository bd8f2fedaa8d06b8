//! Pointwise Riemannian algebra on a 2D chart.
//!
//! Everything here works on explicit chart components: a metric value is a
//! [`SymMat2`], derivative data travels in a [`MetricSample`], and vectors and
//! covectors are plain component pairs. Curvature quantities are computed from
//! the sample alone, so piecewise-polynomial and closed-form metrics share one
//! code path.

mod analytic;

pub use analytic::{
    AnalyticMetric, ConstantMetric, FlatMetric, FnMetric, Frame, SphericalCap,
};

use thiserror::Error;

/// Failures of pointwise metric algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("metric is singular (det = {det:e})")]
    Singular { det: f64 },
    #[error("metric is not positive definite (g11 = {g11:e}, det = {det:e})")]
    NotPositiveDefinite { g11: f64, det: f64 },
    #[error("point ({x}, {y}) lies outside the metric's domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("second derivatives of the metric are required but were not supplied")]
    MissingSecondDerivatives,
}

/// Symmetric 2x2 matrix holding the chart components of a bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: SymMat2 = SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn scaled_identity(c: f64) -> Self {
        Self::new(c, 0.0, c)
    }

    /// Component `(i, j)` with `i, j ∈ {0, 1}`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn from_array(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }

    /// Errors unless the matrix can serve as a metric value.
    pub fn check_spd(&self) -> Result<(), GeometryError> {
        if self.is_positive_definite() && self.xx.is_finite() && self.det().is_finite() {
            Ok(())
        } else {
            Err(GeometryError::NotPositiveDefinite {
                g11: self.xx,
                det: self.det(),
            })
        }
    }

    pub fn inverse(&self) -> Result<SymMat2, GeometryError> {
        let det = self.det();
        let scale = self.xx.abs().max(self.yy.abs()).max(self.xy.abs());
        if !(det.abs() > 1e-300 && det.abs() > 1e-14 * scale * scale) || !det.is_finite() {
            return Err(GeometryError::Singular { det });
        }
        Ok(SymMat2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// Bilinear form `aᵀ M b`.
    #[inline]
    pub fn bilinear(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mb = self.apply(b);
        a[0] * mb[0] + a[1] * mb[1]
    }

    #[inline]
    pub fn quadratic(&self, a: [f64; 2]) -> f64 {
        self.bilinear(a, a)
    }

    pub fn add(&self, o: &SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    pub fn sub(&self, o: &SymMat2) -> SymMat2 {
        SymMat2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }

    pub fn scale(&self, c: f64) -> SymMat2 {
        SymMat2::new(c * self.xx, c * self.xy, c * self.yy)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let diff = 0.5 * (self.xx - self.yy);
        let rad = diff.hypot(self.xy);
        [mean - rad, mean + rad]
    }
}

/// Tangent vector in chart components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector(pub [f64; 2]);

/// Covector (1-form value) in chart components `a dx + b dy`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covector(pub [f64; 2]);

impl Covector {
    pub fn apply(&self, v: Vector) -> f64 {
        self.0[0] * v.0[0] + self.0[1] * v.0[1]
    }

    pub fn sub(&self, o: &Covector) -> Covector {
        Covector([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }

    pub fn scale(&self, c: f64) -> Covector {
        Covector([c * self.0[0], c * self.0[1]])
    }
}

/// Metric value together with its chart derivatives at one point.
///
/// `dg[k]` is `∂_k G`; `d2g` holds `∂_xx G`, `∂_xy G`, `∂_yy G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub g: SymMat2,
    pub dg: [SymMat2; 2],
    pub d2g: Option<[SymMat2; 3]>,
}

impl MetricSample {
    pub fn constant(g: SymMat2) -> Self {
        Self {
            g,
            dg: [SymMat2::ZERO; 2],
            d2g: Some([SymMat2::ZERO; 3]),
        }
    }

    /// `∂_a ∂_b G` for `a, b ∈ {0, 1}`.
    pub fn second(&self, a: usize, b: usize) -> Result<SymMat2, GeometryError> {
        let d2 = self.d2g.ok_or(GeometryError::MissingSecondDerivatives)?;
        Ok(match (a, b) {
            (0, 0) => d2[0],
            (1, 1) => d2[2],
            _ => d2[1],
        })
    }

    /// Linear combination `a·self + b·other`, derivatives included.
    pub fn combine(&self, a: f64, other: &MetricSample, b: f64) -> MetricSample {
        let lin = |x: &SymMat2, y: &SymMat2| x.scale(a).add(&y.scale(b));
        MetricSample {
            g: lin(&self.g, &other.g),
            dg: [lin(&self.dg[0], &other.dg[0]), lin(&self.dg[1], &other.dg[1])],
            d2g: match (self.d2g, other.d2g) {
                (Some(x), Some(y)) => Some([lin(&x[0], &y[0]), lin(&x[1], &y[1]), lin(&x[2], &y[2])]),
                _ => None,
            },
        }
    }
}

/// Christoffel symbols of the second kind, indexed `[i][j][k]` for `Γ^i_{jk}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    /// `Γ(u, w)^i = Γ^i_{jk} u^j w^k`.
    pub fn contract(&self, u: [f64; 2], w: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    *o += self.0[i][j][k] * u[j] * w[k];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn first_kind(dg: &[SymMat2; 2], l: usize, j: usize, k: usize) -> f64 {
    0.5 * (dg[k].get(l, j) + dg[j].get(l, k) - dg[l].get(j, k))
}

/// `Γ^i_{jk} = ½ G^{il}(G_{lj,k} + G_{lk,j} − G_{jk,l})`.
pub fn christoffel(sample: &MetricSample) -> Result<Christoffel, GeometryError> {
    let ginv = sample.g.inverse()?;
    let mut gam = [[[0.0; 2]; 2]; 2];
    for (i, gi) in gam.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                gi[j][k] = (0..2)
                    .map(|l| ginv.get(i, l) * first_kind(&sample.dg, l, j, k))
                    .sum();
            }
        }
    }
    Ok(Christoffel(gam))
}

/// Coordinate derivatives `∂_m Γ^i_{jk}`, indexed `[m][i][j][k]`.
pub fn christoffel_derivatives(
    sample: &MetricSample,
) -> Result<[[[[f64; 2]; 2]; 2]; 2], GeometryError> {
    let ginv = sample.g.inverse()?;
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for (m, om) in out.iter_mut().enumerate() {
        // ∂_m G⁻¹ = −G⁻¹ (∂_m G) G⁻¹
        let dgm = sample.dg[m].to_array();
        let gi = ginv.to_array();
        let mut dginv = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for c in 0..2 {
                    for d in 0..2 {
                        s -= gi[a][c] * dgm[c][d] * gi[d][b];
                    }
                }
                dginv[a][b] = s;
            }
        }
        for (i, omi) in om.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        let d_first = 0.5
                            * (sample.second(m, k)?.get(l, j) + sample.second(m, j)?.get(l, k)
                                - sample.second(m, l)?.get(j, k));
                        s += dginv[i][l] * first_kind(&sample.dg, l, j, k) + gi[i][l] * d_first;
                    }
                    omi[j][k] = s;
                }
            }
        }
    }
    Ok(out)
}

/// Gauss curvature from `R_{1212} / det G`.
pub fn gauss_curvature(sample: &MetricSample) -> Result<f64, GeometryError> {
    let gam = christoffel(sample)?.0;
    let dgam = christoffel_derivatives(sample)?;
    // R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}
    let riemann = |rho: usize, sigma: usize, mu: usize, nu: usize| {
        let mut r = dgam[mu][rho][nu][sigma] - dgam[nu][rho][mu][sigma];
        for lam in 0..2 {
            r += gam[rho][mu][lam] * gam[lam][nu][sigma] - gam[rho][nu][lam] * gam[lam][mu][sigma];
        }
        r
    };
    let r_lower: f64 = (0..2).map(|rho| sample.g.get(0, rho) * riemann(rho, 1, 0, 1)).sum();
    Ok(r_lower / sample.g.det())
}

/// `√det G`, the coefficient of the volume form in `dx ∧ dy`.
pub fn volume_density(g: &SymMat2) -> f64 {
    g.det().sqrt()
}

/// Hodge star on 1-forms: the covector `⋆α` with `β ∧ ⋆α = ⟨β, α⟩ dV` for all `β`.
pub fn hodge_star_1(g: &SymMat2, alpha: Covector) -> Result<Covector, GeometryError> {
    g.check_spd()?;
    let raised = g.inverse()?.apply(alpha.0);
    let vol = volume_density(g);
    Ok(Covector([-vol * raised[1], vol * raised[0]]))
}

/// Inverse of [`hodge_star_1`]; on 1-forms in two dimensions it is `−⋆`.
pub fn hodge_star_1_inverse(g: &SymMat2, alpha: Covector) -> Result<Covector, GeometryError> {
    Ok(hodge_star_1(g, alpha)?.scale(-1.0))
}

/// `‖v‖_G`.
pub fn norm(g: &SymMat2, v: Vector) -> f64 {
    g.quadratic(v.0).sqrt()
}

/// Dual norm of a covector: `√(αᵀ G⁻¹ α)`.
pub fn conorm(g: &SymMat2, alpha: Covector) -> Result<f64, GeometryError> {
    Ok(g.inverse()?.quadratic(alpha.0).sqrt())
}

/// `⟨α, β⟩_G` on covectors.
pub fn co_inner(g: &SymMat2, a: Covector, b: Covector) -> Result<f64, GeometryError> {
    Ok(g.inverse()?.bilinear(a.0, b.0))
}

/// Vector dual to a covector under `G` (index raising).
pub fn sharp(g: &SymMat2, alpha: Covector) -> Result<Vector, GeometryError> {
    Ok(Vector(g.inverse()?.apply(alpha.0)))
}

/// Generalized eigenvalues of the pencil `(a, b)`: roots of `det(a − λ b) = 0`, ascending.
pub fn generalized_eigenvalues(a: &SymMat2, b: &SymMat2) -> Result<[f64; 2], GeometryError> {
    b.check_spd()?;
    // det(a − λb) = det(b) λ² − (a_xx b_yy + a_yy b_xx − 2 a_xy b_xy) λ + det(a)
    let qa = b.det();
    let qb = -(a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy);
    let qc = a.det();
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    // numerically stable root pair
    let q = -0.5 * (qb + qb.signum() * disc);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / qa, qc / q)
    };
    Ok(if r1 <= r2 { [r1, r2] } else { [r2, r1] })
}

/// `sup_{v≠0} ‖v‖_{G1} / ‖v‖_{G2} = √λ_max(G2⁻¹ G1)`.
pub fn quasi_iso_pointwise(g1: &SymMat2, g2: &SymMat2) -> Result<f64, GeometryError> {
    g1.check_spd()?;
    let ev = generalized_eigenvalues(g1, g2)?;
    Ok(ev[1].max(0.0).sqrt())
}

/// `sup` over covectors of `‖α‖_{G1} / ‖α‖_{G2}` (dual norms).
pub fn quasi_iso_pointwise_dual(g1: &SymMat2, g2: &SymMat2) -> Result<f64, GeometryError> {
    quasi_iso_pointwise(&g1.inverse()?, &g2.inverse()?)
}

/// Pointwise `‖A‖_{L∞(G)} = sup |A(V,W)| / (‖V‖_G ‖W‖_G)`, the spectral radius of `G⁻¹A`.
pub fn relative_tensor_norm(a: &SymMat2, g: &SymMat2) -> Result<f64, GeometryError> {
    let ev = generalized_eigenvalues(a, g)?;
    Ok(ev[0].abs().max(ev[1].abs()))
}

/// Angle between two chart vectors as measured by `G`, from the `(sin, cos)` pair.
pub fn angle_between(g: &SymMat2, a: [f64; 2], b: [f64; 2]) -> f64 {
    let cos_part = g.bilinear(a, b);
    let sin_part = volume_density(g) * (a[0] * b[1] - a[1] * b[0]).abs();
    sin_part.atan2(cos_part)
}

/// Trace of a bilinear form with respect to a metric: `G^{ij} σ_ij`.
pub fn metric_trace(g: &SymMat2, sigma: &SymMat2) -> Result<f64, GeometryError> {
    let gi = g.inverse()?;
    Ok(gi.xx * sigma.xx + 2.0 * gi.xy * sigma.xy + gi.yy * sigma.yy)
}

/// Full contraction `⟨A, B⟩_G = G^{ia} G^{jb} A_ij B_ab` of two bilinear forms.
pub fn tensor_inner(g: &SymMat2, a: &SymMat2, b: &SymMat2) -> Result<f64, GeometryError> {
    let gi = g.inverse()?.to_array();
    let aa = a.to_array();
    let bb = b.to_array();
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    s += gi[i][p] * gi[j][q] * aa[i][j] * bb[p][q];
                }
            }
        }
    }
    Ok(s)
}
