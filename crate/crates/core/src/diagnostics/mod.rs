//! Intrinsic mesh quality, the `J_h` operator, and shape-derivative checks.

mod jh;
mod quality;
mod ratios;
mod shape;

pub use jh::{covector_operator_norm, jh_matrix, jh_report, JhReport};
pub use quality::{quality_report, sample_points, QualityReport, TriangleQuality};
pub use ratios::{inverse_ratio_report, trace_ratio_report, RatioReport};
pub use shape::{assemble_bh, family_functional, shape_derivative_check, ShapeCheck};
