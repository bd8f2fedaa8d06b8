//! Intrinsic finite element computations on surfaces described by a chart and a metric.
//!
//! The crate approximates the connection 1-form of an orthonormal frame from
//! distributional curvature of a piecewise-polynomial (Regge) metric, and
//! measures how well it does.

pub mod curvature;
pub mod diagnostics;
pub mod fem;
pub mod mesh;
pub mod pipeline;
pub mod metric;
pub mod poly;
pub mod quadrature;
pub mod regge;
pub mod tensor;

use thiserror::Error;

pub use mesh::MeshError;
pub use tensor::GeometryError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("regge interpolation: {0}")]
    Regge(String),
    #[error("linear solve: {0}")]
    Solve(String),
    #[error("right-hand side violates compatibility: |F·1| = {residual:e}, ‖F‖₁ = {scale:e}")]
    Compatibility { residual: f64, scale: f64 },
    #[error("frame: {0}")]
    Frame(String),
    #[error("angle branch: {0}")]
    Branch(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
