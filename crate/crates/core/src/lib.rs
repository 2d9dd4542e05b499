//! Plug flows for aperiodic dynamics: the 3-D and n-D Wilson plugs, the
//! Kuperberg self-inserted plug realized as a chart-switching quotient flow,
//! and the torus/Reeb obstruction computations that force closed orbits in
//! dimension two.
//!
//! The crate is organized around evaluable vector fields (`wilson`,
//! `kuperberg`), the scalar profiles that define them (`profiles`), the
//! insertion geometry with its radius certificates (`insertion`), a shared
//! event-detecting adaptive integrator with orbit scans (`integrate`), the
//! degree/rotation-number machinery (`obstruction`), and named verification
//! suites (`verify`).

pub mod geom;
pub mod insertion;
pub mod integrate;
pub mod kuperberg;
pub mod obstruction;
pub mod profiles;
pub mod verify;
pub mod wilson;

pub use geom::{Coord, Event, EventKind, PointW3, PointWNd, Tangent, Terminal, TolerancePolicy, Trajectory};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum PlugError {
    #[error("point outside domain: {0}")]
    Domain(String),
    #[error("coordinate schema mismatch: {0}")]
    Schema(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("profile constraint violated: {0}")]
    Profile(String),
    #[error("inconclusive at this resolution: {0}")]
    Inconclusive(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PlugError>;
