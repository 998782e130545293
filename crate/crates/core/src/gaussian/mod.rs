//! Exact Gaussian pure-state calculus on complex graphs.

pub mod covariance;
pub mod graph;
pub mod hgraph;
pub mod linalg;
pub mod symplectic;

pub use covariance::{
    condition_on_q, covariance_from_history, graph_from_covariance, nullifier_residual,
    CovarianceState,
};
pub use graph::{
    measure_q, measure_q_many, vacuum_graph, validate_matrix, wavefunction_eval, Color, ExactGraph,
    NodeId, ValidationReport, Violation,
};
pub use hgraph::{
    bipartite_form_state, cluster_closed_form, fourier_first_partition, fourier_white,
    hgraph_state, selfinverse_hgraph_state, HGraph,
};
pub use linalg::CMatrix;
pub use symplectic::{
    apply_local, apply_symplectic, measure_q_rotated, omega, symplectic_check, symplectic_defect,
    LocalOp, SymplecticOp,
};
