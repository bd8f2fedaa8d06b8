//! The bilinear form `b_h` and the finite-difference check of `dF/dt = −½ b_h`.

use crate::curvature::{rhs_functional, BoundaryFrameAngle, CurvatureOptions};
use crate::fem::{LagrangeSpace, ScalarField};
use crate::metric::{Combination, PiecewiseMetric};
use crate::quadrature::{LineRule, TriangleRule};
use crate::tensor::{christoffel, metric_trace, tensor_inner, volume_density, SymMat2};
use crate::Result;

/// `b_h(g; σ, v) = Σ_T ∫_T ⟨𝕊σ, ∇∇v⟩ dV − Σ_e ∫_e (𝕊σ)(n, n) dv([[n]]) ds`, with
/// `𝕊σ = σ − tr(σ) g` and everything measured in `g`.
///
/// On an edge `(𝕊σ)(n, n) = −σ(τ, τ)`; `dv([[n]])` sums the outward normal
/// derivatives from each adjacent triangle (one on the boundary).
pub fn assemble_bh(
    g: &dyn PiecewiseMetric,
    sigma: &dyn PiecewiseMetric,
    v: &ScalarField,
    triangle_degree: usize,
    edge_points: usize,
) -> Result<f64> {
    let space = v.space();
    let mesh = space.mesh();
    let rule = TriangleRule::with_degree(triangle_degree);
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        for (xi, w) in rule.iter() {
            let p = map.apply(xi);
            let gs = g.sample_in(t, p)?;
            gs.g.check_spd()?;
            let s = sigma.sample_in(t, p)?.g;
            let j = v.jet(t, p);
            let gam = christoffel(&gs)?.0;
            // ∇∇v = ∂²v − Γ^k_ij ∂_k v
            let h = |a: usize, b: usize| {
                let raw = match (a, b) {
                    (0, 0) => j.hess[0],
                    (1, 1) => j.hess[2],
                    _ => j.hess[1],
                };
                raw - gam[0][a][b] * j.grad[0] - gam[1][a][b] * j.grad[1]
            };
            let hess = SymMat2::new(h(0, 0), h(0, 1), h(1, 1));
            let ss = s.sub(&gs.g.scale(metric_trace(&gs.g, &s)?));
            total += tensor_inner(&gs.g, &ss, &hess)? * volume_density(&gs.g) * w * jac;
        }
    }
    let line = LineRule::gauss_legendre(edge_points);
    for (ei, e) in mesh.edges().iter().enumerate() {
        let t0 = e.triangles[0];
        let (a, b) = (mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]));
        let d = [b[0] - a[0], b[1] - a[1]];
        for (s, w) in line.iter() {
            let p = [a[0] + s * d[0], a[1] + s * d[1]];
            let g0 = g.sample_in(t0, p)?.g;
            let len = g0.quadratic(d).sqrt();
            let stt = sigma.sample_in(t0, p)?.g.quadratic(d) / (len * len);
            let mut jump = 0.0;
            for &t in e.adjacent() {
                let gt = g.sample_in(t, p)?.g;
                let i = mesh.local_edge(t, ei).expect("edge in triangle");
                let [la, lb] = mesh.local_edge_vertices(t, i).map(|x| mesh.vertex(x));
                let nu = [lb[1] - la[1], -(lb[0] - la[0])];
                let ginv = gt.inverse()?;
                let n = ginv.apply(nu);
                let nn = ginv.quadratic(nu).sqrt();
                let dv = v.jet(t, p).grad;
                jump += (dv[0] * n[0] + dv[1] * n[1]) / nn;
            }
            // minus (𝕊σ)(n,n) = +σ(τ,τ)
            total += stt * jump * len * w;
        }
    }
    Ok(total)
}

/// Outcome of one finite-difference consistency check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCheck {
    pub t: f64,
    pub dt: f64,
    /// `(F(t + dt) − F(t − dt)) / 2dt`.
    pub fd_derivative: f64,
    pub bh: f64,
    /// `|fd_derivative + ½ b_h|`.
    pub residual: f64,
}

/// Evaluates `F(g(t))(v)` along `g(t) = t·g_h + (1 − t)·g` with the frame angle held fixed.
pub fn family_functional(
    space: &LagrangeSpace,
    g: &dyn PiecewiseMetric,
    gh: &dyn PiecewiseMetric,
    frame_angle: &BoundaryFrameAngle,
    opts: &CurvatureOptions,
    t: f64,
    v: &[f64],
) -> Result<f64> {
    let gt = Combination::interpolate(t, gh, g);
    Ok(rhs_functional(space, &gt, frame_angle, opts)?.pair(v))
}

/// `|(F(t+dt) − F(t−dt))/(2dt) + ½ b_h(g(t); g_h − g, v)|`.
#[allow(clippy::too_many_arguments)]
pub fn shape_derivative_check(
    g: &dyn PiecewiseMetric,
    gh: &dyn PiecewiseMetric,
    v: &ScalarField,
    frame_angle: &BoundaryFrameAngle,
    opts: &CurvatureOptions,
    t: f64,
    dt: f64,
) -> Result<ShapeCheck> {
    let space = v.space();
    let coeffs = v.coefficients();
    let fp = family_functional(space, g, gh, frame_angle, opts, t + dt, coeffs)?;
    let fm = family_functional(space, g, gh, frame_angle, opts, t - dt, coeffs)?;
    let fd = (fp - fm) / (2.0 * dt);
    let gt = Combination::interpolate(t, gh, g);
    let sigma = Combination::difference(gh, g);
    let bh = assemble_bh(&gt, &sigma, v, opts.triangle_degree, opts.edge_points)?;
    Ok(ShapeCheck {
        t,
        dt,
        fd_derivative: fd,
        bh,
        residual: (fd + 0.5 * bh).abs(),
    })
}
