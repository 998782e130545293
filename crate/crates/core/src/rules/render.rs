//! Rendering simplified graphs to dense complex matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;

use super::graph::{SimplifiedGraph, Squeezing};
use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, Color, ExactGraph, HGraph, NodeId};
use crate::scalar::Real;

/// Dense `Z`: diagonal `i cosh2α` (or `i e^{±2α}` for pending singles), edges `−i·(±𝒞)·sinh2α`.
/// Nodes appear in id order.
pub fn to_exact<T: Real>(g: &SimplifiedGraph<T>) -> Result<ExactGraph<T>> {
    let ids = g.ids();
    if ids.is_empty() {
        return Err(Error::EmptyState);
    }
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let two_a = g.alpha() + g.alpha();
    let (ch, sh) = (two_a.cosh(), two_a.sinh());
    let n = ids.len();
    let mut z = CMatrix::<T>::zeros(n, n);
    let mut colors = Vec::with_capacity(n);
    for (i, id) in ids.iter().enumerate() {
        let diag = match g.pending().get(id) {
            None => ch,
            Some(Squeezing::Q) => two_a.exp(),
            Some(Squeezing::P) => (-two_a).exp(),
        };
        z[(i, i)] = Complex::new(T::zero(), diag);
        colors.push(g.nodes().get(id).copied().unwrap_or(Color::Black));
    }
    for (&(a, b), e) in g.edges() {
        let w = Complex::new(T::zero(), -T::lit(e.coefficient()) * sh);
        let (i, j) = (index[&a], index[&b]);
        z[(i, j)] = w;
        z[(j, i)] = w;
    }
    ExactGraph::with_metadata(z, ids, colors)
}

/// Edge weights `±𝒞·tanh2α` of the phase-shifted graph `Z′`; with `limit` set, the
/// infinite-squeezing values `±𝒞`.
pub fn cluster_render<T: Real>(
    g: &SimplifiedGraph<T>,
    limit: bool,
) -> BTreeMap<(NodeId, NodeId), T> {
    let th = if limit {
        T::one()
    } else {
        (g.alpha() + g.alpha()).tanh()
    };
    g.edges()
        .iter()
        .map(|(&k, e)| (k, T::lit(e.coefficient()) * th))
        .collect()
}

/// Dense `Z′ = i sech2α·I + tanh2α·(signed 𝒞)`, the cluster-state form the simplified graph
/// stands for after the white-node Fourier transforms.
pub fn to_cluster_exact<T: Real>(g: &SimplifiedGraph<T>) -> Result<ExactGraph<T>> {
    if !g.pending().is_empty() {
        return Err(Error::Precondition(
            "pending single modes have no cluster form".into(),
        ));
    }
    let ids = g.ids();
    if ids.is_empty() {
        return Err(Error::EmptyState);
    }
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    let sech = T::one() / (g.alpha() + g.alpha()).cosh();
    let mut z = CMatrix::<T>::from_diagonal_element(n, n, Complex::new(T::zero(), sech));
    for (&(a, b), w) in &cluster_render(g, false) {
        let (i, j) = (index[&a], index[&b]);
        z[(i, j)] = Complex::new(*w, T::zero());
        z[(j, i)] = Complex::new(*w, T::zero());
    }
    let colors = ids.iter().map(|id| g.nodes()[id]).collect();
    ExactGraph::with_metadata(z, ids, colors)
}

/// Real generator `G` with white nodes first (each set in id order). Requires a bipartite
/// coloring and no pending singles. Returns the generator and the node order.
pub fn to_hgraph<T: Real>(g: &SimplifiedGraph<T>) -> Result<(HGraph<T>, Vec<NodeId>)> {
    if !g.pending().is_empty() {
        return Err(Error::Precondition(
            "pending single modes have no generator".into(),
        ));
    }
    if let Some((a, b)) = g.bipartite_violations().first() {
        return Err(Error::Precondition(format!(
            "edge {a}-{b} joins nodes of one color"
        )));
    }
    let whites: Vec<NodeId> = g
        .nodes()
        .iter()
        .filter(|(_, c)| **c == Color::White)
        .map(|(id, _)| *id)
        .collect();
    let blacks: Vec<NodeId> = g
        .nodes()
        .iter()
        .filter(|(_, c)| **c == Color::Black)
        .map(|(id, _)| *id)
        .collect();
    let wi: BTreeMap<NodeId, usize> = whites.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let bi: BTreeMap<NodeId, usize> = blacks.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut g0 = DMatrix::zeros(blacks.len(), whites.len());
    for (&(a, b), e) in g.edges() {
        let (w, k) = if wi.contains_key(&a) { (a, b) } else { (b, a) };
        g0[(bi[&k], wi[&w])] = T::lit(e.coefficient());
    }
    let mut order = whites;
    order.extend(blacks);
    Ok((HGraph::bipartite(&g0), order))
}
