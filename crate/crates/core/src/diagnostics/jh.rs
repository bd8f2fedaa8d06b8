//! `J_h = ⋆_h⁻¹ ⋆`, the pointwise map with `⟨u, v⟩_g dV_g = ⟨u, J_h v⟩_{g_h} dV_{g_h}`.
//!
//! On covector components `J_h = √(det G / det G_h) · G_h G⁻¹`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Mesh;
use crate::metric::PiecewiseMetric;
use crate::quadrature::TriangleRule;
use crate::tensor::{volume_density, SymMat2};
use crate::Result;

use super::quality::sample_points;

/// `J_h` as a row-major 2×2 matrix acting on covector components.
pub fn jh_matrix(g: &SymMat2, gh: &SymMat2) -> Result<[[f64; 2]; 2]> {
    let gi = g.inverse()?.to_array();
    let h = gh.to_array();
    let c = (g.det() / gh.det()).sqrt();
    let mut m = [[0.0; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = c * (h[i][0] * gi[0][j] + h[i][1] * gi[1][j]);
        }
    }
    Ok(m)
}

/// Operator norm of `M` on covectors normed by `G_h⁻¹`: `σ_max(C⁻¹ M C)` with `G_h = C Cᵀ`.
pub fn covector_operator_norm(m: [[f64; 2]; 2], gh: &SymMat2) -> Result<f64> {
    gh.check_spd()?;
    let l11 = gh.xx.sqrt();
    let l21 = gh.xy / l11;
    let l22 = (gh.yy - l21 * l21).sqrt();
    let c = [[l11, 0.0], [l21, l22]];
    let ci = [[1.0 / l11, 0.0], [-l21 / (l11 * l22), 1.0 / l22]];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut o = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        o
    };
    let n = mul(mul(ci, m), c);
    // largest singular value from NᵀN
    let ntn = SymMat2::new(
        n[0][0] * n[0][0] + n[1][0] * n[1][0],
        n[0][0] * n[0][1] + n[1][0] * n[1][1],
        n[0][1] * n[0][1] + n[1][1] * n[1][1],
    );
    Ok(ntn.eigenvalues()[1].max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JhReport {
    /// Sampled `sup ‖Id − J_h‖`.
    pub sup_deviation: f64,
    /// Largest `|⟨u, v⟩_{L²(g)} − ⟨u, J_h v⟩_{L²(g_h)}|` over random piecewise-linear pairs.
    pub adjointness_residual: f64,
}

pub fn jh_report(mesh: &Mesh, g: &dyn PiecewiseMetric, gh: &dyn PiecewiseMetric, pairs: usize, seed: u64) -> Result<JhReport> {
    let pts = sample_points();
    let mut sup = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        for xi in &pts {
            let p = map.apply(*xi);
            let gv = g.sample_in(t, p)?.g;
            let hv = gh.sample_in(t, p)?.g;
            let j = jh_matrix(&gv, &hv)?;
            let dev = [[1.0 - j[0][0], -j[0][1]], [-j[1][0], 1.0 - j[1][1]]];
            sup = sup.max(covector_operator_norm(dev, &hv)?);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule = TriangleRule::with_degree(8);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        // u, v: covector fields, affine on each triangle
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for t in 0..mesh.num_triangles() {
            let map = mesh.affine_map(t);
            let jac = map.det();
            let mut coef = [[0.0f64; 6]; 2];
            for c in coef.iter_mut() {
                for x in c.iter_mut() {
                    *x = rng.gen_range(-1.0..1.0);
                }
            }
            let field = |c: &[f64; 6], xi: [f64; 2]| {
                [c[0] + c[1] * xi[0] + c[2] * xi[1], c[3] + c[4] * xi[0] + c[5] * xi[1]]
            };
            for (xi, w) in rule.iter() {
                let p = map.apply(xi);
                let gv = g.sample_in(t, p)?.g;
                let hv = gh.sample_in(t, p)?.g;
                let u = field(&coef[0], xi);
                let v = field(&coef[1], xi);
                lhs += gv.inverse()?.bilinear(u, v) * volume_density(&gv) * w * jac;
                let j = jh_matrix(&gv, &hv)?;
                let jv = [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]];
                rhs += hv.inverse()?.bilinear(u, jv) * volume_density(&hv) * w * jac;
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(JhReport {
        sup_deviation: sup,
        adjointness_residual: worst,
    })
}
