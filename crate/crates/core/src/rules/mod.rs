//! Sign-weighted graphs and their rewrite rules.

pub mod analysis;
pub mod graph;
pub mod ops;
pub mod render;

pub use analysis::{
    degree_rule_check, graphs_equivalent_mod_inversion, DegreeException, DegreeReport,
};
pub use graph::{BsArrow, Edge, Magnitude, Sign, SimplifiedGraph, Squeezing};
pub use ops::{rule_beamsplit, rule_invert, rule_measure_q};
pub use render::{cluster_render, to_cluster_exact, to_exact, to_hgraph};
