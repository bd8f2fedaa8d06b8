//! Regge elements: piecewise-polynomial symmetric tensors with tangential-tangential
//! continuity across edges.
//!
//! On each triangle a field is a symmetric matrix whose three components are
//! polynomials of degree `≤ r` in `((x − x_c)/s, (y − y_c)/s)`, with `x_c` the
//! centroid and `s` the triangle diameter. The degrees of freedom are
//!
//! * per edge: `∫₀¹ σ(τ, τ) P_k(2s − 1) ds`, `k = 0..=r`, where `τ` is the unit
//!   chart tangent from the lower to the higher vertex index and `s` the
//!   normalized arclength;
//! * per triangle: `|T|⁻¹ ∫_T σ_c q` for each component `c` and each monomial
//!   `q` of degree `≤ r − 1`.

use std::cell::RefCell;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::mesh::Mesh;
use crate::metric::PiecewiseMetric;
use crate::poly::{monomial_exponents, monomial_jet, monomial_value};
use crate::quadrature::{legendre, LineRule, TriangleRule};
use crate::tensor::{GeometryError, MetricSample, SymMat2};
use crate::{Error, Result};

/// Degree-`r` Regge space on a mesh, with the local interpolation matrices.
#[derive(Debug, Clone)]
pub struct ReggeSpace<'m> {
    mesh: &'m Mesh,
    order: usize,
    exponents: Vec<(usize, usize)>,
    centers: Vec<[f64; 2]>,
    scales: Vec<f64>,
    /// Inverse of the local dof-by-basis matrix, per triangle.
    local_inverse: Vec<DMatrix<f64>>,
    /// Unit chart tangent of each edge (lower to higher vertex).
    tangents: Vec<[f64; 2]>,
}

fn tt(sigma: &SymMat2, tau: [f64; 2]) -> f64 {
    sigma.quadratic(tau)
}

fn component(c: usize) -> SymMat2 {
    match c {
        0 => SymMat2::new(1.0, 0.0, 0.0),
        1 => SymMat2::new(0.0, 1.0, 0.0),
        _ => SymMat2::new(0.0, 0.0, 1.0),
    }
}

impl<'m> ReggeSpace<'m> {
    pub fn new(mesh: &'m Mesh, order: usize) -> Result<Self> {
        let exponents = monomial_exponents(order);
        let m = exponents.len();
        let tangents = mesh
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]));
                let d = [b[0] - a[0], b[1] - a[1]];
                let len = d[0].hypot(d[1]);
                [d[0] / len, d[1] / len]
            })
            .collect();
        let mut space = ReggeSpace {
            mesh,
            order,
            exponents,
            centers: (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).collect(),
            scales: (0..mesh.num_triangles()).map(|t| mesh.diameter(t)).collect(),
            local_inverse: Vec::with_capacity(mesh.num_triangles()),
            tangents,
        };
        // exact for the polynomial basis: degree 2r on triangles and edges
        let line = LineRule::with_degree(2 * order);
        let tri = TriangleRule::with_degree(2 * order);
        for t in 0..mesh.num_triangles() {
            let mut mat = DMatrix::zeros(3 * m, 3 * m);
            for c in 0..3 {
                for (k, &(a, b)) in space.exponents.iter().enumerate() {
                    let col = c * m + k;
                    let basis = |p: [f64; 2]| component(c).scale(monomial_value(a, b, space.local_coords(t, p)));
                    let dofs = space.local_dofs_of(t, &basis, &line, &tri);
                    for (row, v) in dofs.iter().enumerate() {
                        mat[(row, col)] = *v;
                    }
                }
            }
            let inv = mat
                .try_inverse()
                .ok_or_else(|| Error::Regge(format!("local interpolation matrix of triangle {t} is singular")))?;
            space.local_inverse.push(inv);
        }
        Ok(space)
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dofs_per_edge(&self) -> usize {
        self.order + 1
    }

    pub fn dofs_per_triangle(&self) -> usize {
        3 * self.order * (self.order + 1) / 2
    }

    /// `(r + 1)·E + 3r(r + 1)/2·T`.
    pub fn ndof(&self) -> usize {
        self.dofs_per_edge() * self.mesh.num_edges() + self.dofs_per_triangle() * self.mesh.num_triangles()
    }

    pub fn edge_tangent(&self, e: usize) -> [f64; 2] {
        self.tangents[e]
    }

    fn local_coords(&self, t: usize, p: [f64; 2]) -> [f64; 2] {
        let c = self.centers[t];
        let s = self.scales[t];
        [(p[0] - c[0]) / s, (p[1] - c[1]) / s]
    }

    fn edge_moments(&self, e: usize, f: &dyn Fn([f64; 2]) -> SymMat2, line: &LineRule) -> Vec<f64> {
        let edge = self.mesh.edge(e);
        let (a, b) = (self.mesh.vertex(edge.vertices[0]), self.mesh.vertex(edge.vertices[1]));
        let tau = self.tangents[e];
        let mut out = vec![0.0; self.order + 1];
        for (s, w) in line.iter() {
            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let v = tt(&f(p), tau);
            for (k, o) in out.iter_mut().enumerate() {
                *o += w * v * legendre(k, 2.0 * s - 1.0);
            }
        }
        out
    }

    fn interior_moments(&self, t: usize, f: &dyn Fn([f64; 2]) -> SymMat2, tri: &TriangleRule) -> Vec<f64> {
        if self.order == 0 {
            return Vec::new();
        }
        let inner = monomial_exponents(self.order - 1);
        let map = self.mesh.affine_map(t);
        // |T|⁻¹ ∫_T = 2 Σ w (reference weights sum to ½)
        let mut out = vec![0.0; 3 * inner.len()];
        for (xi, w) in tri.iter() {
            let p = map.apply(xi);
            let u = self.local_coords(t, p);
            let v = f(p);
            let comps = [v.xx, v.xy, v.yy];
            for (k, &(a, b)) in inner.iter().enumerate() {
                let q = monomial_value(a, b, u);
                for c in 0..3 {
                    out[c * inner.len() + k] += 2.0 * w * comps[c] * q;
                }
            }
        }
        out
    }

    /// Local dof vector of a field on triangle `t` (edges in local order, then interior).
    fn local_dofs_of(
        &self,
        t: usize,
        f: &dyn Fn([f64; 2]) -> SymMat2,
        line: &LineRule,
        tri: &TriangleRule,
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.exponents.len());
        for e in self.mesh.triangle_edges(t) {
            out.extend(self.edge_moments(e, f, line));
        }
        out.extend(self.interior_moments(t, f, tri));
        out
    }

    /// Canonical interpolant of a smooth symmetric tensor field.
    ///
    /// `extra_degree` raises the quadrature used for the moments above the
    /// default headroom for non-polynomial data.
    pub fn interpolate(
        &self,
        field: &dyn Fn([f64; 2]) -> std::result::Result<SymMat2, GeometryError>,
        extra_degree: usize,
    ) -> Result<ReggeMetric<'_, 'm>> {
        let line = LineRule::with_degree(2 * self.order + 12 + extra_degree);
        let tri = TriangleRule::with_degree(2 * self.order + 10 + extra_degree);
        let r1 = self.order + 1;
        let nint = self.dofs_per_triangle();
        let mut dofs = vec![0.0; self.ndof()];

        // remember the first evaluation error rather than panicking inside the moment loops
        let first_err: RefCell<Option<GeometryError>> = RefCell::new(None);
        let safe = |p: [f64; 2]| match field(p) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                SymMat2::IDENTITY
            }
        };
        for e in 0..self.mesh.num_edges() {
            let m = self.edge_moments(e, &safe, &line);
            dofs[e * r1..(e + 1) * r1].copy_from_slice(&m);
        }
        let off = self.mesh.num_edges() * r1;
        for t in 0..self.mesh.num_triangles() {
            let m = self.interior_moments(t, &safe, &tri);
            dofs[off + t * nint..off + (t + 1) * nint].copy_from_slice(&m);
        }
        if let Some(e) = first_err.into_inner() {
            return Err(e.into());
        }
        self.from_dofs(dofs)
    }

    /// Interpolant of a metric, using its value only.
    pub fn interpolate_metric(&self, metric: &dyn PiecewiseMetric, extra_degree: usize) -> Result<ReggeMetric<'_, 'm>> {
        self.interpolate(&|p| metric.sample_in(0, p).map(|s| s.g), extra_degree)
    }

    /// Builds the field with the given global dof vector.
    pub fn from_dofs(&self, dofs: Vec<f64>) -> Result<ReggeMetric<'_, 'm>> {
        if dofs.len() != self.ndof() {
            return Err(Error::Regge(format!("expected {} dofs, got {}", self.ndof(), dofs.len())));
        }
        let r1 = self.order + 1;
        let nint = self.dofs_per_triangle();
        let off = self.mesh.num_edges() * r1;
        let mut coefficients = Vec::with_capacity(self.mesh.num_triangles());
        for t in 0..self.mesh.num_triangles() {
            let mut local = Vec::with_capacity(3 * self.exponents.len());
            for e in self.mesh.triangle_edges(t) {
                local.extend_from_slice(&dofs[e * r1..(e + 1) * r1]);
            }
            local.extend_from_slice(&dofs[off + t * nint..off + (t + 1) * nint]);
            let c = &self.local_inverse[t] * DVector::from_vec(local);
            coefficients.push(c.as_slice().to_vec());
        }
        Ok(ReggeMetric {
            space: self,
            dofs,
            coefficients,
        })
    }
}

/// A Regge field on a [`ReggeSpace`].
#[derive(Debug, Clone)]
pub struct ReggeMetric<'s, 'm> {
    space: &'s ReggeSpace<'m>,
    dofs: Vec<f64>,
    /// Per triangle: component-major monomial coefficients (`xx`, `xy`, `yy`).
    coefficients: Vec<Vec<f64>>,
}

/// Edges whose two sides disagree on `σ(τ, τ)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContinuityReport {
    pub max_mismatch: f64,
    pub violations: Vec<(usize, f64)>,
}

/// Sample points where the field fails to be positive definite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub violations: Vec<(usize, [f64; 2])>,
}

impl<'s, 'm> ReggeMetric<'s, 'm> {
    pub fn space(&self) -> &'s ReggeSpace<'m> {
        self.space
    }

    pub fn dofs(&self) -> &[f64] {
        &self.dofs
    }

    pub fn coefficients(&self, t: usize) -> &[f64] {
        &self.coefficients[t]
    }

    /// Direct access for tests that corrupt a single piece.
    pub fn coefficients_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.coefficients[t]
    }

    /// Value and derivatives up to `order` (0, 1 or 2) on triangle `t`.
    pub fn eval(&self, t: usize, p: [f64; 2], order: usize) -> Result<MetricSample> {
        if order > 2 {
            return Err(Error::Regge(format!("derivative order {order} is not available (max 2)")));
        }
        let sp = self.space;
        let u = sp.local_coords(t, p);
        let s = sp.scales[t];
        let m = sp.exponents.len();
        let coef = &self.coefficients[t];
        let mut val = [0.0; 3];
        let mut grad = [[0.0; 3]; 2];
        let mut hess = [[0.0; 3]; 3];
        for (k, &(a, b)) in sp.exponents.iter().enumerate() {
            let j = monomial_jet(a, b, u);
            for c in 0..3 {
                let w = coef[c * m + k];
                val[c] += w * j.value;
                if order >= 1 {
                    grad[0][c] += w * j.grad[0] / s;
                    grad[1][c] += w * j.grad[1] / s;
                }
                if order >= 2 {
                    for (h, jh) in hess.iter_mut().zip(j.hess) {
                        h[c] += w * jh / (s * s);
                    }
                }
            }
        }
        let mk = |v: [f64; 3]| SymMat2::new(v[0], v[1], v[2]);
        Ok(MetricSample {
            g: mk(val),
            dg: [mk(grad[0]), mk(grad[1])],
            d2g: (order >= 2).then(|| [mk(hess[0]), mk(hess[1]), mk(hess[2])]),
        })
    }

    /// Compares `σ(τ, τ)` from both sides of every interior edge at ten points.
    pub fn check_tt_continuity(&self, tol: f64) -> Result<ContinuityReport> {
        let mesh = self.space.mesh;
        let mut report = ContinuityReport::default();
        for (ei, e) in mesh.edges().iter().enumerate().filter(|(_, e)| !e.is_boundary()) {
            let (a, b) = (mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]));
            let tau = self.space.tangents[ei];
            let mut worst = 0.0f64;
            for i in 0..10 {
                let s = (i as f64 + 0.5) / 10.0;
                let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let v0 = tt(&self.eval(e.triangles[0], p, 0)?.g, tau);
                let v1 = tt(&self.eval(e.triangles[1], p, 0)?.g, tau);
                let scale = v0.abs().max(v1.abs()).max(1.0);
                worst = worst.max((v0 - v1).abs() / scale);
            }
            report.max_mismatch = report.max_mismatch.max(worst);
            if worst > tol {
                report.violations.push((ei, worst));
            }
        }
        Ok(report)
    }

    /// Smallest eigenvalue over a degree-10 rule plus vertices of every triangle.
    pub fn check_positivity(&self) -> Result<PositivityReport> {
        let mesh = self.space.mesh;
        let rule = TriangleRule::with_degree(10);
        let mut pts: Vec<[f64; 2]> = rule.points.clone();
        pts.extend([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let mut report = PositivityReport {
            min_eigenvalue: f64::INFINITY,
            violations: Vec::new(),
        };
        for t in 0..mesh.num_triangles() {
            let map = mesh.affine_map(t);
            for xi in &pts {
                let p = map.apply(*xi);
                let lam = self.eval(t, p, 0)?.g.eigenvalues()[0];
                report.min_eigenvalue = report.min_eigenvalue.min(lam);
                if !(lam > 0.0) {
                    report.violations.push((t, p));
                }
            }
        }
        Ok(report)
    }

    /// One row per (triangle, monomial, component), comment-prefixed header.
    pub fn to_csv(&self, tag: &str) -> String {
        let mut s = String::from("# triangle,center_x,center_y,scale,exp_x,exp_y,component,coefficient,config\n");
        let sp = self.space;
        let m = sp.exponents.len();
        let names = ["xx", "xy", "yy"];
        for (t, coef) in self.coefficients.iter().enumerate() {
            for (k, &(a, b)) in sp.exponents.iter().enumerate() {
                for (c, name) in names.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{t},{:?},{:?},{:?},{a},{b},{name},{:?},{tag}",
                        sp.centers[t][0],
                        sp.centers[t][1],
                        sp.scales[t],
                        coef[c * m + k]
                    );
                }
            }
        }
        s
    }
}

impl PiecewiseMetric for ReggeMetric<'_, '_> {
    fn sample_in(&self, triangle: usize, p: [f64; 2]) -> std::result::Result<MetricSample, GeometryError> {
        self.eval(triangle, p, 2)
            .map_err(|_| GeometryError::MissingSecondDerivatives)
    }

    fn label(&self) -> String {
        format!("regge(r={})", self.space.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, generate_perturbed_grid, Rect};

    #[test]
    fn dof_counts() {
        let one = build_topology(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert_eq!(ReggeSpace::new(&one, 0).unwrap().ndof(), 3);
        assert_eq!(ReggeSpace::new(&one, 1).unwrap().ndof(), 9);
        let grid = generate_perturbed_grid(Rect::square(0.25), 0.25, 0.0, 0).unwrap();
        assert_eq!(ReggeSpace::new(&grid, 0).unwrap().ndof(), 16);
    }

    #[test]
    fn constant_metric_reproduced_with_zero_derivatives() {
        let mesh = generate_perturbed_grid(Rect::square(0.25), 0.125, 0.2, 1).unwrap();
        let g = SymMat2::new(2.0, 0.3, 1.5);
        for r in 0..=3 {
            let space = ReggeSpace::new(&mesh, r).unwrap();
            let gh = space.interpolate(&|_| Ok(g), 0).unwrap();
            for t in 0..mesh.num_triangles() {
                let s = gh.eval(t, mesh.centroid(t), 2).unwrap();
                assert!(s.g.sub(&g).max_abs() < 1e-12, "r={r}");
                assert!(s.dg[0].max_abs() < 1e-10 && s.dg[1].max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_high_derivative_order() {
        let mesh = build_topology(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let space = ReggeSpace::new(&mesh, 1).unwrap();
        let gh = space.interpolate(&|_| Ok(SymMat2::IDENTITY), 0).unwrap();
        assert!(gh.eval(0, [0.2, 0.2], 3).is_err());
    }
}
