//! Distributional curvature of a piecewise metric and the right-hand side
//! `F = α_dist − KdA_dist` of the connection-form problem.
//!
//! Sign conventions:
//!
//! * `k_T` is the geodesic curvature of a side of `T` as part of `∂T`, positive
//!   where `T` is locally convex. For a straight chart segment `a + s·d` with
//!   outward conormal `ν`, `k ds_h = −ν(Γ(d, d)) / (|ν|_{G⁻¹} |d|_G) ds`.
//!   Interior edges contribute the sum over both sides.
//! * `μ` is the oriented angle from `e₁` to the outward unit normal `n`, so
//!   `n = cos μ e₁ + sin μ e₂` and `μ = atan2(ν(e₂), ν(e₁))`. It increases by
//!   `2π` once around the boundary.
//! * `[[μ]]_p = μ_out − μ_in` in `(−π, π]`, taken along the counterclockwise loop.
//!
//! With these, `F(1) = 0` by the Gauss–Bonnet theorem on each triangle.

use std::f64::consts::PI;

use crate::fem::{tabulate, LagrangeSpace};
use crate::mesh::Mesh;
use crate::metric::PiecewiseMetric;
use crate::quadrature::{LineRule, TriangleRule};
use crate::tensor::{angle_between, christoffel, gauss_curvature, volume_density, AnalyticMetric, Frame};
use crate::{Error, Result};

/// Largest frame orthonormality defect accepted by [`boundary_frame_angle`].
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOptions {
    /// Exactness degree of the triangle rule.
    pub triangle_degree: usize,
    /// Gauss–Legendre points per edge.
    pub edge_points: usize,
    /// Test hook: negate the interior-edge geodesic curvature terms.
    pub flip_edge_jumps: bool,
}

impl CurvatureOptions {
    /// Defaults for Lagrange degree `p` and Regge degree `r`.
    pub fn for_degrees(p: usize, r: usize, boost: usize) -> Self {
        CurvatureOptions {
            triangle_degree: 2 * p + 2 * r + 6 + boost,
            edge_points: (2 * p + 2 * r + 4).max(8) + boost,
            flip_edge_jumps: false,
        }
    }
}

/// `F` over the Lagrange dofs, kept per source.
///
/// The first three parts make up `KdA_dist`, the last two `α_dist`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFunctional {
    pub triangle: Vec<f64>,
    pub interior_edge: Vec<f64>,
    pub interior_vertex: Vec<f64>,
    pub boundary_edge: Vec<f64>,
    pub boundary_vertex: Vec<f64>,
}

impl CurvatureFunctional {
    pub fn zeros(n: usize) -> Self {
        CurvatureFunctional {
            triangle: vec![0.0; n],
            interior_edge: vec![0.0; n],
            interior_vertex: vec![0.0; n],
            boundary_edge: vec![0.0; n],
            boundary_vertex: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.triangle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangle.is_empty()
    }

    pub fn kda(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.triangle[i] + self.interior_edge[i] + self.interior_vertex[i])
            .collect()
    }

    pub fn alpha(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.boundary_edge[i] + self.boundary_vertex[i]).collect()
    }

    /// `α_dist − KdA_dist`.
    pub fn total(&self) -> Vec<f64> {
        let (a, k) = (self.alpha(), self.kda());
        a.iter().zip(&k).map(|(x, y)| x - y).collect()
    }

    pub fn pair(&self, v: &[f64]) -> f64 {
        self.total().iter().zip(v).map(|(f, x)| f * x).sum()
    }

    /// Rows `(dof, triangle, interior_edge, interior_vertex, boundary_edge, boundary_vertex)`.
    pub fn to_csv(&self, tag: &str) -> String {
        use std::fmt::Write as _;
        let mut s = String::from(
            "# dof,triangle_part,interior_edge_part,interior_vertex_part,boundary_edge_part,boundary_vertex_part,config\n",
        );
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{i},{:?},{:?},{:?},{:?},{:?},{tag}",
                self.triangle[i], self.interior_edge[i], self.interior_vertex[i], self.boundary_edge[i], self.boundary_vertex[i]
            );
        }
        s
    }
}

/// Interior angle of triangle `t` at `vertex`, measured in the metric of `t` at that vertex.
pub fn interior_angle(mesh: &Mesh, metric: &dyn PiecewiseMetric, t: usize, vertex: usize) -> Result<f64> {
    let local = mesh
        .local_vertex(t, vertex)
        .ok_or_else(|| Error::Config(format!("vertex {vertex} is not a corner of triangle {t}")))?;
    let tri = mesh.triangle(t);
    let p = mesh.vertex(vertex);
    let a = mesh.vertex(tri[(local + 1) % 3]);
    let b = mesh.vertex(tri[(local + 2) % 3]);
    let t1 = [a[0] - p[0], a[1] - p[1]];
    let t2 = [b[0] - p[0], b[1] - p[1]];
    let g = metric.sample_in(t, p)?.g;
    g.check_spd()?;
    Ok(angle_between(&g, t1, t2))
}

/// `Σ_{T∋p} θ_T(p)`.
pub fn angle_sum(mesh: &Mesh, metric: &dyn PiecewiseMetric, vertex: usize) -> Result<f64> {
    mesh.vertex_triangles(vertex)
        .iter()
        .map(|&t| interior_angle(mesh, metric, t, vertex))
        .sum()
}

/// `2π − Σ θ_T(p)` at an interior vertex.
pub fn vertex_defect(mesh: &Mesh, metric: &dyn PiecewiseMetric, vertex: usize) -> Result<f64> {
    if mesh.is_boundary_vertex(vertex) {
        return Err(Error::Config(format!("vertex {vertex} lies on the boundary")));
    }
    Ok(2.0 * PI - angle_sum(mesh, metric, vertex)?)
}

/// Chart data of local edge `i` of `t`: start point, direction, outward conormal.
fn side(mesh: &Mesh, t: usize, i: usize) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let [a, b] = mesh.local_edge_vertices(t, i).map(|v| mesh.vertex(v));
    let d = [b[0] - a[0], b[1] - a[1]];
    (a, d, [d[1], -d[0]])
}

/// `k_T ds_h / ds` at parameter `s ∈ [0, 1]` of local edge `i`, traversed counterclockwise.
fn k_ds(metric: &dyn PiecewiseMetric, t: usize, a: [f64; 2], d: [f64; 2], nu: [f64; 2], s: f64) -> Result<f64> {
    let p = [a[0] + s * d[0], a[1] + s * d[1]];
    let sample = metric.sample_in(t, p)?;
    sample.g.check_spd()?;
    let gam = christoffel(&sample)?;
    let acc = gam.contract(d, d);
    let nu_norm = sample.g.inverse()?.quadratic(nu).sqrt();
    let d_norm = sample.g.quadratic(d).sqrt();
    Ok(-(nu[0] * acc[0] + nu[1] * acc[1]) / (nu_norm * d_norm))
}

/// Geodesic curvature of local edge `i` of `t` at parameter `s`, as part of `∂t`.
pub fn geodesic_curvature(mesh: &Mesh, metric: &dyn PiecewiseMetric, t: usize, i: usize, s: f64) -> Result<f64> {
    let (a, d, nu) = side(mesh, t, i);
    let p = [a[0] + s * d[0], a[1] + s * d[1]];
    let g = metric.sample_in(t, p)?.g;
    Ok(k_ds(metric, t, a, d, nu, s)? / g.quadratic(d).sqrt())
}

/// Accumulates `∫ v k_T ds_h` over one side of `t` into `out`.
fn add_side_integral(
    space: &LagrangeSpace,
    metric: &dyn PiecewiseMetric,
    t: usize,
    i: usize,
    line: &LineRule,
    scale: f64,
    out: &mut [f64],
) -> Result<()> {
    let mesh = space.mesh();
    let map = mesh.affine_map(t);
    let (a, d, nu) = side(mesh, t, i);
    let dofs = space.local_dofs(t);
    for (s, w) in line.iter() {
        let kds = k_ds(metric, t, a, d, nu, s)?;
        let p = [a[0] + s * d[0], a[1] + s * d[1]];
        let basis = space.reference_basis(map.inverse_apply(p));
        for (j, &g) in basis.iter().zip(dofs) {
            out[g] += scale * w * kds * j.value;
        }
    }
    Ok(())
}

/// Triangle, interior-edge and interior-vertex parts of `KdA_dist`.
pub fn kda_dist(space: &LagrangeSpace, metric: &dyn PiecewiseMetric, opts: &CurvatureOptions) -> Result<CurvatureFunctional> {
    let mesh = space.mesh();
    let n = space.ndof();
    let mut out = CurvatureFunctional::zeros(n);

    let rule = TriangleRule::with_degree(opts.triangle_degree);
    let table = tabulate(space, &rule);
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        let dofs = space.local_dofs(t);
        for ((xi, w), basis) in rule.iter().zip(&table) {
            let sample = metric.sample_in(t, map.apply(xi))?;
            sample.g.check_spd()?;
            let k = gauss_curvature(&sample)?;
            let da = volume_density(&sample.g) * w * jac;
            for (j, &g) in basis.iter().zip(dofs) {
                out.triangle[g] += k * da * j.value;
            }
        }
    }

    let line = LineRule::gauss_legendre(opts.edge_points);
    let sign = if opts.flip_edge_jumps { -1.0 } else { 1.0 };
    for (ei, e) in mesh.edges().iter().enumerate().filter(|(_, e)| !e.is_boundary()) {
        for &t in e.adjacent() {
            let i = mesh.local_edge(t, ei).expect("edge belongs to adjacent triangle");
            add_side_integral(space, metric, t, i, &line, sign, &mut out.interior_edge)?;
        }
    }

    for v in 0..mesh.num_vertices() {
        if !mesh.is_boundary_vertex(v) {
            // vertex dofs are numbered by vertex
            out.interior_vertex[v] += vertex_defect(mesh, metric, v)?;
        }
    }
    Ok(out)
}

/// `μ` along one boundary edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFrameAngle {
    pub edge: usize,
    pub triangle: usize,
    pub local_edge: usize,
    /// `(s, μ(s), dμ/ds)` at the quadrature points, `μ` unwrapped.
    pub samples: Vec<(f64, f64, f64)>,
    pub weights: Vec<f64>,
    pub mu_start: f64,
    pub mu_end: f64,
}

/// Frame angle data on the whole boundary, in counterclockwise loop order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrameAngle {
    pub edges: Vec<EdgeFrameAngle>,
    /// `(vertex, [[μ]])` for every boundary vertex.
    pub jumps: Vec<(usize, f64)>,
}

impl BoundaryFrameAngle {
    /// `Σ ∫ dμ + Σ [[μ]]`, which is `2π` for a disc.
    pub fn total_turning(&self) -> f64 {
        let edges: f64 = self
            .edges
            .iter()
            .map(|e| e.samples.iter().zip(&e.weights).map(|(s, w)| s.2 * w).sum::<f64>())
            .sum();
        edges + self.jumps.iter().map(|j| j.1).sum::<f64>()
    }

    pub fn jump_at(&self, vertex: usize) -> Option<f64> {
        self.jumps.iter().find(|j| j.0 == vertex).map(|j| j.1)
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn reduce_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn frame_at(g: &dyn AnalyticMetric, p: [f64; 2]) -> Result<Frame> {
    let frame = g
        .frame(p)
        .ok_or_else(|| Error::Frame(format!("metric `{}` provides no frame", g.name())))?;
    let sample = g.sample(p)?;
    let defect = frame.orthonormality_defect(&sample.g);
    if !(defect <= FRAME_TOL) {
        return Err(Error::Frame(format!(
            "frame is not orthonormal at ({}, {}): defect {defect:e}",
            p[0], p[1]
        )));
    }
    Ok(frame)
}

fn raw_mu(frame: &Frame, nu: [f64; 2]) -> (f64, f64) {
    let c = nu[0] * frame.e1[0] + nu[1] * frame.e1[1];
    let s = nu[0] * frame.e2[0] + nu[1] * frame.e2[1];
    (c, s)
}

/// `μ` and `dμ/ds` at `p = a + s·d` for the covector `ν`.
fn mu_and_derivative(g: &dyn AnalyticMetric, a: [f64; 2], d: [f64; 2], nu: [f64; 2], s: f64) -> Result<(f64, f64)> {
    let p = [a[0] + s * d[0], a[1] + s * d[1]];
    let frame = frame_at(g, p)?;
    let (c, sn) = raw_mu(&frame, nu);
    let mu = sn.atan2(c);
    let deriv = match (frame.de1, frame.de2) {
        (Some(de1), Some(de2)) => {
            let dir = |de: [[f64; 2]; 2]| {
                [de[0][0] * d[0] + de[1][0] * d[1], de[0][1] * d[0] + de[1][1] * d[1]]
            };
            let (v1, v2) = (dir(de1), dir(de2));
            let dc = nu[0] * v1[0] + nu[1] * v1[1];
            let ds = nu[0] * v2[0] + nu[1] * v2[1];
            (c * ds - sn * dc) / (c * c + sn * sn)
        }
        _ => {
            // centered difference with step 1e−6 of the edge length, unwrapped
            let h = 1e-6;
            let at = |s: f64| -> Result<f64> {
                let q = [a[0] + s * d[0], a[1] + s * d[1]];
                let f = frame_at(g, q)?;
                let (c, sn) = raw_mu(&f, nu);
                Ok(sn.atan2(c))
            };
            let plus = mu + reduce_angle(at(s + h)? - mu);
            let minus = mu + reduce_angle(at(s - h)? - mu);
            (plus - minus) / (2.0 * h)
        }
    };
    Ok((mu, deriv))
}

/// Samples `μ` on every boundary edge and records the jumps at boundary vertices.
pub fn boundary_frame_angle(mesh: &Mesh, g: &dyn AnalyticMetric, edge_points: usize) -> Result<BoundaryFrameAngle> {
    let line = LineRule::gauss_legendre(edge_points);
    let mut edges = Vec::new();
    for (e, t, i) in mesh.boundary_loop() {
        let (a, d, nu) = side(mesh, t, i);
        let (mu0, _) = mu_and_derivative(g, a, d, nu, 0.0)?;
        let mut prev = mu0;
        let mut samples = Vec::with_capacity(line.len());
        for (s, _) in line.iter() {
            let (mu, dmu) = mu_and_derivative(g, a, d, nu, s)?;
            let step = reduce_angle(mu - prev);
            if step.abs() >= PI - 1e-9 {
                return Err(Error::Branch(format!("μ jumps by {step} within boundary edge {e}")));
            }
            prev += step;
            samples.push((s, prev, dmu));
        }
        let (mu1, _) = mu_and_derivative(g, a, d, nu, 1.0)?;
        let step = reduce_angle(mu1 - prev);
        if step.abs() >= PI - 1e-9 {
            return Err(Error::Branch(format!("μ jumps by {step} at the end of boundary edge {e}")));
        }
        edges.push(EdgeFrameAngle {
            edge: e,
            triangle: t,
            local_edge: i,
            samples,
            weights: line.weights.clone(),
            mu_start: mu0,
            mu_end: prev + step,
        });
    }
    let mut jumps = Vec::with_capacity(edges.len());
    for k in 0..edges.len() {
        let incoming = &edges[(k + edges.len() - 1) % edges.len()];
        let outgoing = &edges[k];
        let v = mesh.local_edge_vertices(outgoing.triangle, outgoing.local_edge)[0];
        jumps.push((v, reduce_angle(outgoing.mu_start - incoming.mu_end)));
    }
    Ok(BoundaryFrameAngle { edges, jumps })
}

/// Boundary-edge and boundary-vertex parts of `α_dist`.
pub fn alpha_dist(
    space: &LagrangeSpace,
    metric: &dyn PiecewiseMetric,
    frame_angle: &BoundaryFrameAngle,
    opts: &CurvatureOptions,
) -> Result<CurvatureFunctional> {
    let mesh = space.mesh();
    let mut out = CurvatureFunctional::zeros(space.ndof());
    let line = LineRule::gauss_legendre(opts.edge_points);
    for be in &frame_angle.edges {
        let (t, i) = (be.triangle, be.local_edge);
        let map = mesh.affine_map(t);
        let (a, d, _) = side(mesh, t, i);
        let dofs = space.local_dofs(t);
        for ((s, _, dmu), w) in be.samples.iter().zip(&be.weights) {
            let p = [a[0] + s * d[0], a[1] + s * d[1]];
            let basis = space.reference_basis(map.inverse_apply(p));
            for (j, &g) in basis.iter().zip(dofs) {
                out.boundary_edge[g] += w * dmu * j.value;
            }
        }
        add_side_integral(space, metric, t, i, &line, -1.0, &mut out.boundary_edge)?;
    }
    for &(v, jump) in &frame_angle.jumps {
        let theta = angle_sum(mesh, metric, v)?;
        out.boundary_vertex[v] -= PI - jump - theta;
    }
    Ok(out)
}

/// `F = α_dist − KdA_dist` with the per-source breakdown.
pub fn rhs_functional(
    space: &LagrangeSpace,
    metric: &dyn PiecewiseMetric,
    frame_angle: &BoundaryFrameAngle,
    opts: &CurvatureOptions,
) -> Result<CurvatureFunctional> {
    let k = kda_dist(space, metric, opts)?;
    let a = alpha_dist(space, metric, frame_angle, opts)?;
    Ok(CurvatureFunctional {
        triangle: k.triangle,
        interior_edge: k.interior_edge,
        interior_vertex: k.interior_vertex,
        boundary_edge: a.boundary_edge,
        boundary_vertex: a.boundary_vertex,
    })
}
