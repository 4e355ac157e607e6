//! Finite-volume discretization on masked uniform grids.

mod domain;
mod functional;
mod raster;

pub use domain::{min_enclosing_circle, BoundaryEdge, Dim, GridDomain, InteriorEdge};
pub use functional::{
    coarea_tv, jump_cost, level_perimeter, measure_pairing, phi_avg, phi_hat, set_perimeter, truncate, tv_interior,
    tv_phi, DiscreteMeasure, EdgeAtom, GridFunction, Representative,
};
pub use raster::{
    add_atoms, capped_density, cell_average, circle_atoms, inv_r_density, inv_r_rect, segment_atoms, staircase_edges,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("mask has no active cells")]
    EmptyMask,
    #[error("mask is not 4-connected ({reached} of {cells} cells reachable)")]
    Disconnected { reached: usize, cells: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("{0}")]
    Invalid(String),
}
