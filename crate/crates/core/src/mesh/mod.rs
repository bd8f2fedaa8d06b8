//! Oriented triangulations of a planar chart.
//!
//! A [`Mesh`] is immutable once built. Triangles are stored counterclockwise;
//! local edge `i` of a triangle is the side opposite local vertex `i`, running
//! from local vertex `i + 1` to `i + 2`. Global edges store their endpoints in
//! ascending order, which fixes the orientation of per-edge degrees of freedom.

mod generate;
mod io;

pub use generate::{generate_perturbed_grid, Rect};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {vertex}, but only {count} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },
    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },
    #[error("triangles {first} and {second} are duplicates")]
    DuplicateTriangle { first: usize, second: usize },
    #[error("triangle {triangle} has zero area")]
    DegenerateTriangle { triangle: usize },
    #[error("edge ({a}, {b}) is shared by {count} triangles (non-manifold)")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("vertex {vertex} belongs to no triangle")]
    IsolatedVertex { vertex: usize },
    #[error("mesh has no triangles")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("perturbation still inverts triangles after {retries} retries")]
    InvertedAfterRetries { retries: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Mesh edge with its (one or two) adjacent triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints in ascending index order.
    pub vertices: [usize; 2],
    pub triangles: [usize; 2],
    pub triangle_count: u8,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangle_count == 1
    }

    pub fn adjacent(&self) -> &[usize] {
        &self.triangles[..self.triangle_count as usize]
    }
}

/// Affine map `x = B ξ + b` from the reference triangle onto a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    /// Column-major linear part: `b_mat[c]` is column `c`.
    pub linear: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl AffineMap {
    pub fn det(&self) -> f64 {
        let [c0, c1] = self.linear;
        c0[0] * c1[1] - c1[0] * c0[1]
    }

    pub fn apply(&self, xi: [f64; 2]) -> [f64; 2] {
        let [c0, c1] = self.linear;
        [
            self.offset[0] + c0[0] * xi[0] + c1[0] * xi[1],
            self.offset[1] + c0[1] * xi[0] + c1[1] * xi[1],
        ]
    }

    /// Reference coordinates of a chart point.
    pub fn inverse_apply(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.offset[0], x[1] - self.offset[1]];
        let inv = self.inverse_linear();
        [
            inv[0][0] * d[0] + inv[0][1] * d[1],
            inv[1][0] * d[0] + inv[1][1] * d[1],
        ]
    }

    /// Row-major `B⁻¹`.
    pub fn inverse_linear(&self) -> [[f64; 2]; 2] {
        let [c0, c1] = self.linear;
        let det = self.det();
        [[c1[1] / det, -c1[0] / det], [-c0[1] / det, c0[0] / det]]
    }

    /// Chart gradient from a reference gradient: `∇ₓ = B⁻ᵀ ∇_ξ`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let inv = self.inverse_linear();
        [
            inv[0][0] * g[0] + inv[1][0] * g[1],
            inv[0][1] * g[0] + inv[1][1] * g[1],
        ]
    }

    /// Chart Hessian (`[xx, xy, yy]`) from a reference Hessian: `B⁻ᵀ H B⁻¹`.
    pub fn push_hessian(&self, h: [f64; 3]) -> [f64; 3] {
        let inv = self.inverse_linear();
        let hm = [[h[0], h[1]], [h[1], h[2]]];
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        *o += inv[a][i] * hm[a][b] * inv[b][j];
                    }
                }
            }
        }
        [out[0][0], 0.5 * (out[0][1] + out[1][0]), out[1][1]]
    }

    /// Chart components of the flat metric `δ̂` induced by the map: `B⁻ᵀ B⁻¹`.
    pub fn reference_metric(&self) -> crate::tensor::SymMat2 {
        let inv = self.inverse_linear();
        let xx = inv[0][0] * inv[0][0] + inv[1][0] * inv[1][0];
        let xy = inv[0][0] * inv[0][1] + inv[1][0] * inv[1][1];
        let yy = inv[0][1] * inv[0][1] + inv[1][1] * inv[1][1];
        crate::tensor::SymMat2::new(xx, xy, yy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    corner: Vec<bool>,
    vertex_triangles: Vec<Vec<usize>>,
}

fn signed_double_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

/// Builds edges, adjacency, and boundary data; repairs clockwise triangles.
pub fn build_topology(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
    if triangles.is_empty() {
        return Err(MeshError::Empty);
    }
    let nv = vertices.len();
    let mut tris = Vec::with_capacity(triangles.len());
    let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
    for (ti, &t) in triangles.iter().enumerate() {
        for &v in &t {
            if v >= nv {
                return Err(MeshError::IndexOutOfRange {
                    triangle: ti,
                    vertex: v,
                    count: nv,
                });
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(MeshError::RepeatedVertex { triangle: ti });
        }
        let mut key = t;
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            return Err(MeshError::DuplicateTriangle { first, second: ti });
        }
        seen.insert(key, ti);
        let area = signed_double_area(&vertices, t);
        let scale = {
            let d = |i: usize, j: usize| {
                let (p, q) = (vertices[t[i]], vertices[t[j]]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            };
            d(0, 1).max(d(1, 2)).max(d(0, 2))
        };
        if !(area.abs() > 1e-14 * scale * scale) {
            return Err(MeshError::DegenerateTriangle { triangle: ti });
        }
        tris.push(if area < 0.0 { [t[0], t[2], t[1]] } else { t });
    }

    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut triangle_edges = vec![[0usize; 3]; tris.len()];
    for (ti, t) in tris.iter().enumerate() {
        for i in 0..3 {
            let a = t[(i + 1) % 3];
            let b = t[(i + 2) % 3];
            let key = if a < b { [a, b] } else { [b, a] };
            let ei = *edge_index.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    vertices: key,
                    triangles: [usize::MAX; 2],
                    triangle_count: 0,
                });
                edges.len() - 1
            });
            let e = &mut edges[ei];
            if e.triangle_count >= 2 {
                return Err(MeshError::NonManifoldEdge {
                    a: key[0],
                    b: key[1],
                    count: 3,
                });
            }
            e.triangles[e.triangle_count as usize] = ti;
            e.triangle_count += 1;
            triangle_edges[ti][i] = ei;
        }
    }

    let mut vertex_triangles = vec![Vec::new(); nv];
    for (ti, t) in tris.iter().enumerate() {
        for &v in t {
            vertex_triangles[v].push(ti);
        }
    }
    if let Some(v) = vertex_triangles.iter().position(|l| l.is_empty()) {
        return Err(MeshError::IsolatedVertex { vertex: v });
    }

    let mut boundary_vertex = vec![false; nv];
    // outgoing boundary direction (counterclockwise traversal) per vertex
    let mut out_dir: Vec<Option<[f64; 2]>> = vec![None; nv];
    let mut in_dir: Vec<Option<[f64; 2]>> = vec![None; nv];
    for e in edges.iter().filter(|e| e.is_boundary()) {
        let t = tris[e.triangles[0]];
        let local = (0..3)
            .find(|&i| {
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                (a == e.vertices[0] && b == e.vertices[1]) || (a == e.vertices[1] && b == e.vertices[0])
            })
            .expect("edge belongs to its triangle");
        let a = t[(local + 1) % 3];
        let b = t[(local + 2) % 3];
        boundary_vertex[a] = true;
        boundary_vertex[b] = true;
        let d = [vertices[b][0] - vertices[a][0], vertices[b][1] - vertices[a][1]];
        let len = d[0].hypot(d[1]);
        let d = [d[0] / len, d[1] / len];
        out_dir[a] = Some(d);
        in_dir[b] = Some(d);
    }
    let corner = (0..nv)
        .map(|v| match (in_dir[v], out_dir[v]) {
            (Some(i), Some(o)) => (i[0] * o[1] - i[1] * o[0]).abs() > 1e-10 || i[0] * o[0] + i[1] * o[1] < 0.0,
            _ => false,
        })
        .collect();

    Ok(Mesh {
        vertices,
        triangles: tris,
        edges,
        triangle_edges,
        boundary_vertex,
        corner,
        vertex_triangles,
    })
}

impl Mesh {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// `V − E + T`.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Global edge ids of local edges `0, 1, 2` (opposite local vertices).
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].is_boundary()
    }

    pub fn is_corner(&self, v: usize) -> bool {
        self.corner[v]
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn corner_flags(&self) -> &[bool] {
        &self.corner
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    /// Local index of `vertex` within triangle `t`.
    pub fn local_vertex(&self, t: usize, vertex: usize) -> Option<usize> {
        self.triangles[t].iter().position(|&v| v == vertex)
    }

    /// Local index of global edge `e` within triangle `t`.
    pub fn local_edge(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    /// Endpoints of local edge `i` of `t` in the triangle's counterclockwise order.
    pub fn local_edge_vertices(&self, t: usize, i: usize) -> [usize; 2] {
        let tri = self.triangles[t];
        [tri[(i + 1) % 3], tri[(i + 2) % 3]]
    }

    /// Whether local edge `i` of `t` runs in the global (ascending) edge direction.
    pub fn local_edge_agrees(&self, t: usize, i: usize) -> bool {
        let [a, b] = self.local_edge_vertices(t, i);
        a < b
    }

    pub fn affine_map(&self, t: usize) -> AffineMap {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        AffineMap {
            linear: [[b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]],
            offset: a,
        }
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Longest Euclidean side of `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let d = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
        d(a, b).max(d(b, c)).max(d(a, c))
    }

    /// Largest triangle diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Boundary edges as `(edge, triangle, local edge)` in counterclockwise order
    /// of the boundary loop starting from the lowest-numbered boundary vertex.
    pub fn boundary_loop(&self) -> Vec<(usize, usize, usize)> {
        let mut next: HashMap<usize, (usize, usize, usize)> = HashMap::new();
        for (ei, e) in self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary()) {
            let t = e.triangles[0];
            let i = self.local_edge(t, ei).expect("edge in triangle");
            let [a, _] = self.local_edge_vertices(t, i);
            next.insert(a, (ei, t, i));
        }
        let Some(&start) = next.keys().min() else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(next.len());
        let mut v = start;
        while let Some(&(ei, t, i)) = next.get(&v) {
            out.push((ei, t, i));
            v = self.local_edge_vertices(t, i)[1];
            if v == start || out.len() > next.len() {
                break;
            }
        }
        out
    }
}
