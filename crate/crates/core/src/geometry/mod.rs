//! Planar domains, boundary polygonization, triangulation, quadrature and
//! domain metrics.
//!
//! Every domain is described in a body frame (centred shapes, or the
//! polygon's own coordinates) together with a rigid placement. Meshes and
//! polylines are generated in the body frame and then placed, so rotating
//! or translating a domain moves its mesh exactly.

pub mod boundary;
pub mod domain;
pub mod integrate;
pub mod mesh;
pub mod metrics;
pub mod quadrature;

use thiserror::Error;

pub use boundary::{boundary_polyline, Polyline};
pub use domain::{Domain, Placement, Shape};
pub use integrate::{integrate, integrate_mesh, integrate_mesh_with_error, DomainRule};
pub use mesh::{triangulate, Mesh};
pub use metrics::{convex_hull, domain_metrics, DomainMetrics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension `{name}` must be finite and positive, got {value}")]
    Dimension { name: &'static str, value: f64 },
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("polygon has zero area")]
    Degenerate,
    #[error("superellipse exponent must be at least 2, got {0}")]
    Exponent(f64),
    #[error("boundary spacing {h} too coarse: only {segments:.1} segments fit the boundary")]
    TooCoarse { h: f64, segments: f64 },
    #[error("mesh refinement did not converge; worst triangle {triangle} has minimum angle {angle_deg:.2} deg")]
    Refinement { triangle: usize, angle_deg: f64 },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("non-finite integrand value at ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("no quadrature rule of degree {0}; the maximum is 7")]
    RuleDegree(usize),
    #[error("cannot parse domain spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("mesh text line {line}: {reason}")]
    MeshFormat { line: usize, reason: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub type Point = [f64; 2];
