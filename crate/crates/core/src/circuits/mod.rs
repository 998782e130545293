//! Temporal-mode optical pipelines: wiring, streaming replay and post-processing.

pub mod model;
pub mod pipeline;
pub mod run;

pub use model::{
    build_lattice_circuit, build_wire_circuit, Circuit, Component, ComponentKind, Construction,
    DetectorBasis, LaneOrigin, Layout, Rail,
};
pub use pipeline::{
    clip_startup, live_mode_bound, periodic_reference, project_lattice, project_wire,
    unfold_cylinder, StartupClip,
};
pub use run::{
    run, DualState, Engines, Event, EventKind, Frame, RunOptions, RunOutput, RunTrace, Snapshot,
};
