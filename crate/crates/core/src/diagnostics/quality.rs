//! Quasi-isometry constants and Riemannian shape regularity.
//!
//! Essential suprema are replaced by maxima over a degree-10 rule plus the
//! vertices and edge midpoints of each triangle, so reported values are lower
//! bounds on the true suprema.

use std::fmt::Write as _;

use crate::mesh::Mesh;
use crate::metric::PiecewiseMetric;
use crate::quadrature::TriangleRule;
use crate::tensor::{quasi_iso_pointwise, relative_tensor_norm, SymMat2};
use crate::Result;

/// Reference-triangle sample points used for every sampled supremum.
pub fn sample_points() -> Vec<[f64; 2]> {
    let mut pts = TriangleRule::with_degree(10).points;
    pts.extend([
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.0],
        [0.5, 0.5],
        [0.0, 0.5],
    ]);
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleQuality {
    /// `C_{g_h, δ̂}(T)`.
    pub h_t: f64,
    /// `1 / C_{δ̂, g_h}(T)`.
    pub rho_t: f64,
    pub ratio: f64,
    /// `C_{g, g_h}(T)`.
    pub c_g_gh: f64,
    /// `C_{g_h, g}(T)`.
    pub c_gh_g: f64,
    /// `D_{g_h, δ̂}(T) · D_{δ̂, g_h}(T)`.
    pub kv_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub triangles: Vec<TriangleQuality>,
    /// `max_T h_T / ρ_T`.
    pub k: f64,
    /// `max_T h / ρ_T` with `h = max_T h_T`.
    pub k_prime: f64,
    pub k_v: f64,
    pub h: f64,
    pub c_g_gh: f64,
    pub c_gh_g: f64,
    /// `D_{g, g_h}`: sampled max of `√(det G / det G_h)`.
    pub d_g_gh: f64,
    pub d_gh_g: f64,
    /// Sampled `‖g − g_h‖_{L∞(g)}`.
    pub metric_error: f64,
}

fn det_ratio(a: &SymMat2, b: &SymMat2) -> f64 {
    (a.det() / b.det()).sqrt()
}

pub fn quality_report(mesh: &Mesh, g: &dyn PiecewiseMetric, gh: &dyn PiecewiseMetric) -> Result<QualityReport> {
    let pts = sample_points();
    let mut triangles = Vec::with_capacity(mesh.num_triangles());
    let (mut d_g_gh, mut d_gh_g, mut metric_error) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let dhat = map.reference_metric();
        let mut q = TriangleQuality {
            h_t: 0.0,
            rho_t: 0.0,
            ratio: 0.0,
            c_g_gh: 0.0,
            c_gh_g: 0.0,
            kv_t: 0.0,
        };
        let mut c_hat_gh = 0.0f64;
        let (mut vmax, mut vmin) = (0.0f64, f64::INFINITY);
        for xi in &pts {
            let p = map.apply(*xi);
            let gv = g.sample_in(t, p)?.g;
            let hv = gh.sample_in(t, p)?.g;
            gv.check_spd()?;
            hv.check_spd()?;
            q.h_t = q.h_t.max(quasi_iso_pointwise(&hv, &dhat)?);
            c_hat_gh = c_hat_gh.max(quasi_iso_pointwise(&dhat, &hv)?);
            q.c_g_gh = q.c_g_gh.max(quasi_iso_pointwise(&gv, &hv)?);
            q.c_gh_g = q.c_gh_g.max(quasi_iso_pointwise(&hv, &gv)?);
            let v = det_ratio(&hv, &dhat);
            vmax = vmax.max(v);
            vmin = vmin.min(v);
            d_g_gh = d_g_gh.max(det_ratio(&gv, &hv));
            d_gh_g = d_gh_g.max(det_ratio(&hv, &gv));
            metric_error = metric_error.max(relative_tensor_norm(&hv.sub(&gv), &gv)?);
        }
        q.rho_t = 1.0 / c_hat_gh;
        q.ratio = q.h_t / q.rho_t;
        q.kv_t = vmax / vmin;
        triangles.push(q);
    }
    let h = triangles.iter().map(|q| q.h_t).fold(0.0, f64::max);
    Ok(QualityReport {
        k: triangles.iter().map(|q| q.ratio).fold(0.0, f64::max),
        k_prime: triangles.iter().map(|q| h / q.rho_t).fold(0.0, f64::max),
        k_v: triangles.iter().map(|q| q.kv_t).fold(0.0, f64::max),
        h,
        c_g_gh: triangles.iter().map(|q| q.c_g_gh).fold(0.0, f64::max),
        c_gh_g: triangles.iter().map(|q| q.c_gh_g).fold(0.0, f64::max),
        d_g_gh,
        d_gh_g,
        metric_error,
        triangles,
    })
}

impl QualityReport {
    /// Per-triangle rows followed by a `summary` row.
    pub fn to_csv(&self, tag: &str) -> String {
        let mut s = String::from("# tri_id,h_T,rho_T,ratio,C_g_gh,C_gh_g,Kv_T,config\n");
        for (i, q) in self.triangles.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{:e},{:e},{:e},{:e},{:e},{:e},{tag}",
                q.h_t, q.rho_t, q.ratio, q.c_g_gh, q.c_gh_g, q.kv_t
            );
        }
        let _ = writeln!(
            s,
            "# summary: h,K,K_prime,K_V,C_g_gh,C_gh_g,D_g_gh,D_gh_g,metric_error_linf,config"
        );
        let _ = writeln!(
            s,
            "summary,{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{tag}",
            self.h, self.k, self.k_prime, self.k_v, self.c_g_gh, self.c_gh_g, self.d_g_gh, self.d_gh_g, self.metric_error
        );
        s
    }

    /// `ρ_T ≤ h_T` on every triangle.
    pub fn rho_bounded_by_h(&self) -> bool {
        self.triangles.iter().all(|q| q.rho_t <= q.h_t * (1.0 + 1e-12))
    }
}
