//! Empirical trace and inverse inequality ratios over Lagrange basis functions.

use crate::fem::LagrangeSpace;
use crate::metric::PiecewiseMetric;
use crate::quadrature::{LineRule, TriangleRule};
use crate::tensor::volume_density;
use crate::Result;

use super::quality::QualityReport;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    /// Per triangle, max over local basis functions.
    pub per_triangle: Vec<f64>,
    pub max: f64,
}

struct Norms {
    l2: f64,
    grad: f64,
    boundary: f64,
}

fn basis_norms(space: &LagrangeSpace, gh: &dyn PiecewiseMetric, t: usize, degree: usize) -> Result<Vec<Norms>> {
    let mesh = space.mesh();
    let map = mesh.affine_map(t);
    let jac = map.det();
    let n = space.local_size();
    let mut out: Vec<Norms> = (0..n).map(|_| Norms { l2: 0.0, grad: 0.0, boundary: 0.0 }).collect();
    for (xi, w) in TriangleRule::with_degree(degree).iter() {
        let p = map.apply(xi);
        let g = gh.sample_in(t, p)?.g;
        let gi = g.inverse()?;
        let dv = volume_density(&g) * w * jac;
        for (o, j) in out.iter_mut().zip(space.physical_basis(&map, xi)) {
            o.l2 += j.value * j.value * dv;
            o.grad += gi.quadratic(j.grad) * dv;
        }
    }
    let line = LineRule::with_degree(degree);
    for i in 0..3 {
        let [a, b] = mesh.local_edge_vertices(t, i).map(|v| mesh.vertex(v));
        let d = [b[0] - a[0], b[1] - a[1]];
        for (s, w) in line.iter() {
            let p = [a[0] + s * d[0], a[1] + s * d[1]];
            let g = gh.sample_in(t, p)?.g;
            let ds = g.quadratic(d).sqrt() * w;
            for (o, j) in out.iter_mut().zip(space.reference_basis(map.inverse_apply(p))) {
                o.boundary += j.value * j.value * ds;
            }
        }
    }
    for o in &mut out {
        o.l2 = o.l2.sqrt();
        o.grad = o.grad.sqrt();
        o.boundary = o.boundary.sqrt();
    }
    Ok(out)
}

/// `‖φ‖_{L²(∂T)} / (ρ_T^{−1/2} ‖φ‖_{L²(T)} + h_T^{1/2} ‖dφ‖_{L²(T)})`, all in `g_h`.
pub fn trace_ratio_report(space: &LagrangeSpace, gh: &dyn PiecewiseMetric, quality: &QualityReport) -> Result<RatioReport> {
    let degree = 2 * space.degree() + 6;
    let mut per_triangle = Vec::with_capacity(quality.triangles.len());
    for (t, q) in quality.triangles.iter().enumerate() {
        let worst = basis_norms(space, gh, t, degree)?
            .iter()
            .map(|n| n.boundary / (n.l2 / q.rho_t.sqrt() + q.h_t.sqrt() * n.grad))
            .fold(0.0, f64::max);
        per_triangle.push(worst);
    }
    let max = per_triangle.iter().copied().fold(0.0, f64::max);
    Ok(RatioReport { per_triangle, max })
}

/// `ρ_T ‖dφ‖_{L²(T)} / ‖φ‖_{L²(T)}`, all in `g_h`.
pub fn inverse_ratio_report(space: &LagrangeSpace, gh: &dyn PiecewiseMetric, quality: &QualityReport) -> Result<RatioReport> {
    let degree = 2 * space.degree() + 6;
    let mut per_triangle = Vec::with_capacity(quality.triangles.len());
    for (t, q) in quality.triangles.iter().enumerate() {
        let worst = basis_norms(space, gh, t, degree)?
            .iter()
            .map(|n| q.rho_t * n.grad / n.l2)
            .fold(0.0, f64::max);
        per_triangle.push(worst);
    }
    let max = per_triangle.iter().copied().fold(0.0, f64::max);
    Ok(RatioReport { per_triangle, max })
}
