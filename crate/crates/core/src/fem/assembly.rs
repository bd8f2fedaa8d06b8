//! Metric-weighted assembly over a Lagrange space.

use crate::metric::PiecewiseMetric;
use crate::poly::MonomialJet;
use crate::quadrature::TriangleRule;
use crate::tensor::{hodge_star_1, volume_density, Covector};
use crate::Result;

use super::lagrange::{LagrangeSpace, ScalarField};
use super::sparse::CsrMatrix;

/// Reference basis jets at every point of a rule.
pub(crate) fn tabulate(space: &LagrangeSpace, rule: &TriangleRule) -> Vec<Vec<MonomialJet>> {
    rule.points.iter().map(|&xi| space.reference_basis(xi)).collect()
}

/// `A_ij = ∫ ⟨dφ_i, dφ_j⟩_g dV_g`, integrand `∇φ_iᵀ G⁻¹ ∇φ_j √det G`.
pub fn assemble_stiffness(space: &LagrangeSpace, metric: &dyn PiecewiseMetric, rule: &TriangleRule) -> Result<CsrMatrix> {
    let mesh = space.mesh();
    let table = tabulate(space, rule);
    let nloc = space.local_size();
    let mut trip = Vec::with_capacity(mesh.num_triangles() * nloc * nloc);
    let mut local = vec![0.0; nloc * nloc];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        local.iter_mut().for_each(|v| *v = 0.0);
        for ((xi, w), basis) in rule.iter().zip(&table) {
            let p = map.apply(xi);
            let g = metric.sample_in(t, p)?.g;
            g.check_spd()?;
            let coef = g.inverse()?.scale(volume_density(&g) * w * jac);
            let grads: Vec<[f64; 2]> = basis.iter().map(|j| map.push_gradient(j.grad)).collect();
            for i in 0..nloc {
                let gi = coef.apply(grads[i]);
                for j in i..nloc {
                    local[i * nloc + j] += gi[0] * grads[j][0] + gi[1] * grads[j][1];
                }
            }
        }
        let dofs = space.local_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                let v = if j >= i { local[i * nloc + j] } else { local[j * nloc + i] };
                trip.push((dofs[i], dofs[j], v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(space.ndof(), &trip))
}

/// `m_i = ∫ φ_i dV_g`.
pub fn assemble_volume_functional(
    space: &LagrangeSpace,
    metric: &dyn PiecewiseMetric,
    rule: &TriangleRule,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let table = tabulate(space, rule);
    let mut m = vec![0.0; space.ndof()];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        let dofs = space.local_dofs(t);
        for ((xi, w), basis) in rule.iter().zip(&table) {
            let g = metric.sample_in(t, map.apply(xi))?.g;
            g.check_spd()?;
            let dv = volume_density(&g) * w * jac;
            for (j, &d) in basis.iter().zip(dofs) {
                m[d] += j.value * dv;
            }
        }
    }
    Ok(m)
}

/// `∫ f v dV_g` for every basis function, with `f` given per triangle.
pub fn assemble_load(
    space: &LagrangeSpace,
    metric: &dyn PiecewiseMetric,
    f: &dyn Fn(usize, [f64; 2]) -> f64,
    rule: &TriangleRule,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let table = tabulate(space, rule);
    let mut out = vec![0.0; space.ndof()];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        let dofs = space.local_dofs(t);
        for ((xi, w), basis) in rule.iter().zip(&table) {
            let p = map.apply(xi);
            let g = metric.sample_in(t, p)?.g;
            let val = f(t, p) * volume_density(&g) * w * jac;
            for (j, &d) in basis.iter().zip(dofs) {
                out[d] += j.value * val;
            }
        }
    }
    Ok(out)
}

/// Gradient error against an exact connection form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientError {
    /// `‖du_h + ⋆α‖_{L²(g)}`.
    pub absolute: f64,
    /// `‖α‖_{L²(g)}`.
    pub reference: f64,
    /// `absolute / reference`, absent when the reference vanishes.
    pub relative: Option<f64>,
}

/// Compares `du_h` with `−⋆α`, the gradient the connection form determines
/// (`α = ⋆du` and `⋆⋆ = −1` on 1-forms in two dimensions).
pub fn l2_error_grad(
    u: &ScalarField,
    alpha: &dyn Fn([f64; 2]) -> Covector,
    g: &dyn PiecewiseMetric,
    rule: &TriangleRule,
) -> Result<GradientError> {
    let space = u.space();
    let mesh = space.mesh();
    let table = tabulate(space, rule);
    let coeffs = u.coefficients();
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det();
        let dofs = space.local_dofs(t);
        for ((xi, w), basis) in rule.iter().zip(&table) {
            let p = map.apply(xi);
            let gs = g.sample_in(t, p)?.g;
            let ginv = gs.inverse()?;
            let mut du = [0.0; 2];
            for (j, &d) in basis.iter().zip(dofs) {
                let gr = map.push_gradient(j.grad);
                du[0] += coeffs[d] * gr[0];
                du[1] += coeffs[d] * gr[1];
            }
            let a = alpha(p);
            let star = hodge_star_1(&gs, a)?;
            let diff = [du[0] + star.0[0], du[1] + star.0[1]];
            let dv = volume_density(&gs) * w * jac;
            err2 += ginv.quadratic(diff) * dv;
            ref2 += ginv.quadratic(a.0) * dv;
        }
    }
    let absolute = err2.sqrt();
    let reference = ref2.sqrt();
    Ok(GradientError {
        absolute,
        reference,
        relative: (reference > 0.0).then(|| absolute / reference),
    })
}
