//! JSON graph documents and Graphviz export.

pub mod document;
pub mod dot;

pub use document::{
    load_graph, save_graph, ComplexValue, EdgeRecord, GraphDocument, NodeRecord, Provenance,
    SCHEMA_VERSION,
};
pub use dot::{export_dot, write_dot, NEGATIVE_COLOR, POSITIVE_COLOR};

/// Environment variable naming the default directory for output files.
pub const OUT_DIR_ENV: &str = "CVCLUSTER_OUT_DIR";

/// Resolves a relative output path against `CVCLUSTER_OUT_DIR` when it is set.
pub fn output_path(path: &std::path::Path) -> std::path::PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => std::path::Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
