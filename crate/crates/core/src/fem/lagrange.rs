//! Continuous degree-`p` Lagrange elements with equispaced nodes.
//!
//! Global numbering: vertices first, then `p − 1` nodes per edge running from
//! the lower to the higher vertex index, then interior nodes triangle by triangle.

use nalgebra::DMatrix;

use crate::mesh::{AffineMap, Mesh};
use crate::poly::{monomial_exponents, monomial_jet, MonomialJet};
use crate::tensor::Covector;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LagrangeSpace<'m> {
    mesh: &'m Mesh,
    degree: usize,
    exponents: Vec<(usize, usize)>,
    /// `coeffs[(k, n)]`: coefficient of monomial `k` in local basis function `n`.
    coeffs: DMatrix<f64>,
    reference_nodes: Vec<[f64; 2]>,
    local_to_global: Vec<Vec<usize>>,
    ndof: usize,
}

/// Equispaced nodes on the reference triangle in local order.
fn reference_nodes(p: usize) -> Vec<[f64; 2]> {
    let pf = p as f64;
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut nodes = corners.to_vec();
    for i in 0..3 {
        let (a, b) = (corners[(i + 1) % 3], corners[(i + 2) % 3]);
        for k in 1..p {
            let s = k as f64 / pf;
            nodes.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    for j in 1..p {
        for i in 1..p {
            if i + j < p {
                nodes.push([i as f64 / pf, j as f64 / pf]);
            }
        }
    }
    nodes
}

impl<'m> LagrangeSpace<'m> {
    pub fn new(mesh: &'m Mesh, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("Lagrange degree must be at least 1".into()));
        }
        let p = degree;
        let exponents = monomial_exponents(p);
        let nodes = reference_nodes(p);
        let n = nodes.len();
        let vander = DMatrix::from_fn(n, n, |i, k| {
            let (a, b) = exponents[k];
            nodes[i][0].powi(a as i32) * nodes[i][1].powi(b as i32)
        });
        let coeffs = vander
            .try_inverse()
            .ok_or_else(|| Error::Config(format!("Lagrange nodes of degree {p} are not unisolvent")))?;

        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let per_edge = p - 1;
        let per_tri = if p >= 3 { (p - 1) * (p - 2) / 2 } else { 0 };
        let ndof = nv + per_edge * ne + per_tri * mesh.num_triangles();
        let mut local_to_global = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let mut dofs: Vec<usize> = mesh.triangle(t).to_vec();
            let edges = mesh.triangle_edges(t);
            for (i, &e) in edges.iter().enumerate() {
                let agrees = mesh.local_edge_agrees(t, i);
                for k in 0..per_edge {
                    let kk = if agrees { k } else { per_edge - 1 - k };
                    dofs.push(nv + e * per_edge + kk);
                }
            }
            for k in 0..per_tri {
                dofs.push(nv + per_edge * ne + t * per_tri + k);
            }
            local_to_global.push(dofs);
        }
        Ok(LagrangeSpace {
            mesh,
            degree,
            exponents,
            coeffs,
            reference_nodes: nodes,
            local_to_global,
            ndof,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn local_size(&self) -> usize {
        self.reference_nodes.len()
    }

    pub fn local_dofs(&self, t: usize) -> &[usize] {
        &self.local_to_global[t]
    }

    pub fn reference_nodes(&self) -> &[[f64; 2]] {
        &self.reference_nodes
    }

    /// Chart coordinates of every global dof.
    pub fn dof_coordinates(&self) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.ndof];
        for t in 0..self.mesh.num_triangles() {
            let map = self.mesh.affine_map(t);
            for (n, &g) in self.local_to_global[t].iter().enumerate() {
                out[g] = map.apply(self.reference_nodes[n]);
            }
        }
        out
    }

    /// Reference-element basis jets (value, ξ-gradient, ξ-Hessian) at `xi`.
    pub fn reference_basis(&self, xi: [f64; 2]) -> Vec<MonomialJet> {
        let n = self.local_size();
        let monos: Vec<MonomialJet> = self.exponents.iter().map(|&(a, b)| monomial_jet(a, b, xi)).collect();
        (0..n)
            .map(|f| {
                let mut j = MonomialJet::default();
                for (k, m) in monos.iter().enumerate() {
                    let c = self.coeffs[(k, f)];
                    j.value += c * m.value;
                    for d in 0..2 {
                        j.grad[d] += c * m.grad[d];
                    }
                    for d in 0..3 {
                        j.hess[d] += c * m.hess[d];
                    }
                }
                j
            })
            .collect()
    }

    /// Basis jets pushed to chart coordinates on the triangle with map `map`.
    pub fn physical_basis(&self, map: &AffineMap, xi: [f64; 2]) -> Vec<MonomialJet> {
        self.reference_basis(xi)
            .into_iter()
            .map(|j| MonomialJet {
                value: j.value,
                grad: map.push_gradient(j.grad),
                hess: map.push_hessian(j.hess),
            })
            .collect()
    }

    /// Nodal interpolant of a function.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField<'_, 'm> {
        let coeffs = self.dof_coordinates().into_iter().map(f).collect();
        ScalarField { space: self, coeffs }
    }

    pub fn field(&self, coeffs: Vec<f64>) -> Result<ScalarField<'_, 'm>> {
        if coeffs.len() != self.ndof {
            return Err(Error::Config(format!(
                "field has {} coefficients, space has {} dofs",
                coeffs.len(),
                self.ndof
            )));
        }
        Ok(ScalarField { space: self, coeffs })
    }

    pub fn zero(&self) -> ScalarField<'_, 'm> {
        ScalarField {
            space: self,
            coeffs: vec![0.0; self.ndof],
        }
    }
}

/// A function in a [`LagrangeSpace`].
#[derive(Debug, Clone)]
pub struct ScalarField<'s, 'm> {
    space: &'s LagrangeSpace<'m>,
    coeffs: Vec<f64>,
}

impl<'s, 'm> ScalarField<'s, 'm> {
    pub fn space(&self) -> &'s LagrangeSpace<'m> {
        self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value, chart gradient and chart Hessian on triangle `t` at chart point `p`.
    pub fn jet(&self, t: usize, p: [f64; 2]) -> MonomialJet {
        let map = self.space.mesh.affine_map(t);
        let xi = map.inverse_apply(p);
        let mut out = MonomialJet::default();
        for (j, &g) in self.space.physical_basis(&map, xi).iter().zip(self.space.local_dofs(t)) {
            let c = self.coeffs[g];
            out.value += c * j.value;
            for d in 0..2 {
                out.grad[d] += c * j.grad[d];
            }
            for d in 0..3 {
                out.hess[d] += c * j.hess[d];
            }
        }
        out
    }

    pub fn eval(&self, t: usize, p: [f64; 2]) -> f64 {
        self.jet(t, p).value
    }

    /// `du` in chart components.
    pub fn eval_grad(&self, t: usize, p: [f64; 2]) -> Covector {
        Covector(self.jet(t, p).grad)
    }

    /// CSV rows `(dof, x, y, u)` with a comment header.
    pub fn to_csv(&self, tag: &str) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("# dof,x,y,u,config\n");
        for (i, (p, u)) in self.space.dof_coordinates().iter().zip(&self.coeffs).enumerate() {
            let _ = writeln!(s, "{i},{:?},{:?},{:?},{tag}", p[0], p[1], u);
        }
        s
    }
}
