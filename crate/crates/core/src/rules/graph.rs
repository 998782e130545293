use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Color, NodeId};
use crate::scalar::Real;

/// Edge color. `Plus` renders to `−i𝒞 sinh2α` in `Z` and `+𝒞 tanh2α` in `Z′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// `𝒞 = mantissa · 2^{−half_powers/2}`. Beamsplitter halvings only bump the exponent, so
/// repeated duplication stays exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Magnitude {
    pub mantissa: f64,
    pub half_powers: u32,
}

impl Magnitude {
    pub const ONE: Magnitude = Magnitude {
        mantissa: 1.0,
        half_powers: 0,
    };

    pub fn new(value: f64) -> Self {
        Self {
            mantissa: value,
            half_powers: 0,
        }
    }

    pub fn value(self) -> f64 {
        let whole = 2f64.powi(-((self.half_powers / 2) as i32));
        let m = self.mantissa * whole;
        if self.half_powers % 2 == 1 {
            m * std::f64::consts::FRAC_1_SQRT_2
        } else {
            m
        }
    }

    pub fn halved(self) -> Self {
        Self {
            mantissa: self.mantissa,
            half_powers: self.half_powers + 1,
        }
    }

    /// Same value, written over a larger exponent.
    fn rescaled(self, half_powers: u32) -> f64 {
        let extra = half_powers - self.half_powers;
        let mut m = self.mantissa * 2f64.powi((extra / 2) as i32);
        if extra % 2 == 1 {
            m *= std::f64::consts::SQRT_2;
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub sign: Sign,
    pub magnitude: Magnitude,
}

impl Edge {
    pub fn new(sign: Sign, coefficient: f64) -> Self {
        Self {
            sign,
            magnitude: Magnitude::new(coefficient),
        }
    }

    /// Signed coefficient `±𝒞`.
    pub fn coefficient(&self) -> f64 {
        self.sign.factor() * self.magnitude.value()
    }

    /// Signed addition in the rendered domain; `None` on exact cancellation.
    fn combine(self, other: Edge) -> Option<Edge> {
        let k = self.magnitude.half_powers.max(other.magnitude.half_powers);
        let sum = self.sign.factor() * self.magnitude.rescaled(k)
            + other.sign.factor() * other.magnitude.rescaled(k);
        if sum == 0.0 {
            return None;
        }
        let sign = if sum > 0.0 { Sign::Plus } else { Sign::Minus };
        Some(Edge {
            sign,
            magnitude: Magnitude {
                mantissa: sum.abs(),
                half_powers: k,
            },
        })
    }
}

/// Single-mode squeezed input not yet entangled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Squeezing {
    /// Graph entry `i e^{2α}`.
    Q,
    /// Graph entry `i e^{−2α}`.
    P,
}

/// Ordered pair of beamsplitter inputs: `tail` is input 1, `head` input 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BsArrow {
    pub tail: NodeId,
    pub head: NodeId,
}

impl BsArrow {
    pub fn new(tail: NodeId, head: NodeId) -> Result<Self> {
        if tail == head {
            return Err(Error::InvalidWiring(format!(
                "beamsplitter arrow from {tail} to itself"
            )));
        }
        Ok(Self { tail, head })
    }
}

pub(crate) fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sign-weighted graph with implicit uniform self-loops `i cosh2α`.
///
/// Modes that are still single squeezed inputs are kept apart in `pending`; they have no
/// edges and carry their own self-loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplifiedGraph<T: Real = f64> {
    alpha: T,
    nodes: BTreeMap<NodeId, Color>,
    edges: BTreeMap<(NodeId, NodeId), Edge>,
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pending: BTreeMap<NodeId, Squeezing>,
}

impl<T: Real> SimplifiedGraph<T> {
    pub fn new(alpha: T) -> Self {
        Self {
            alpha,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            pending: BTreeMap::new(),
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.nodes.len() + self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, Color> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(NodeId, NodeId), Edge> {
        &self.edges
    }

    pub fn pending(&self) -> &BTreeMap<NodeId, Squeezing> {
        &self.pending
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id) || self.pending.contains_key(&id)
    }

    /// Every mode in id order, graph nodes and pending singles together.
    pub fn ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .nodes
            .keys()
            .chain(self.pending.keys())
            .copied()
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn edge(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        self.edges.get(&key(a, b))
    }

    pub fn add_node(&mut self, id: NodeId, color: Color) -> Result<()> {
        if self.contains(id) {
            return Err(Error::InvalidWiring(format!("mode {id} already exists")));
        }
        self.nodes.insert(id, color);
        Ok(())
    }

    pub fn add_pending(&mut self, id: NodeId, squeezing: Squeezing) -> Result<()> {
        if self.contains(id) {
            return Err(Error::InvalidWiring(format!("mode {id} already exists")));
        }
        self.pending.insert(id, squeezing);
        Ok(())
    }

    pub fn set_edge(&mut self, a: NodeId, b: NodeId, edge: Edge) -> Result<()> {
        if a == b {
            return Err(Error::Precondition(format!("self-edge on {a}")));
        }
        for id in [a, b] {
            if !self.nodes.contains_key(&id) {
                return Err(Error::UnknownNode(id));
            }
        }
        self.insert_edge(a, b, edge);
        Ok(())
    }

    pub fn set_color(&mut self, id: NodeId, color: Color) -> Result<()> {
        match self.nodes.get_mut(&id) {
            Some(c) => {
                *c = color;
                Ok(())
            }
            None => Err(Error::UnknownNode(id)),
        }
    }

    pub fn neighbors(&self, id: NodeId) -> Vec<(NodeId, Edge)> {
        self.adjacency
            .get(&id)
            .map(|set| set.iter().map(|&j| (j, self.edges[&key(id, j)])).collect())
            .unwrap_or_default()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency.get(&id).map_or(0, BTreeSet::len)
    }

    fn insert_edge(&mut self, a: NodeId, b: NodeId, edge: Edge) {
        self.edges.insert(key(a, b), edge);
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    fn remove_edge(&mut self, a: NodeId, b: NodeId) -> Option<Edge> {
        let e = self.edges.remove(&key(a, b))?;
        for (x, y) in [(a, b), (b, a)] {
            if let Some(set) = self.adjacency.get_mut(&x) {
                set.remove(&y);
                if set.is_empty() {
                    self.adjacency.remove(&x);
                }
            }
        }
        Some(e)
    }

    /// Edges whose endpoints share a color.
    pub fn bipartite_violations(&self) -> Vec<(NodeId, NodeId)> {
        self.edges
            .keys()
            .filter(|(a, b)| self.nodes.get(a) == self.nodes.get(b))
            .copied()
            .collect()
    }

    pub(crate) fn remove(&mut self, id: NodeId) -> Result<()> {
        if self.pending.remove(&id).is_some() {
            return Ok(());
        }
        if self.nodes.remove(&id).is_none() {
            return Err(Error::UnknownNode(id));
        }
        self.take_incident(id);
        Ok(())
    }

    pub(crate) fn take_incident(&mut self, id: NodeId) -> Vec<(NodeId, Edge)> {
        let out = self.neighbors(id);
        for &(j, _) in &out {
            self.remove_edge(id, j);
        }
        out
    }

    pub(crate) fn accumulate(&mut self, a: NodeId, b: NodeId, edge: Edge) {
        match self.remove_edge(a, b) {
            None => self.insert_edge(a, b, edge),
            Some(prev) => {
                if let Some(sum) = prev.combine(edge) {
                    self.insert_edge(a, b, sum);
                }
            }
        }
    }

    /// Flips the sign of every edge at `id`.
    pub(crate) fn flip_incident(&mut self, id: NodeId) {
        if let Some(set) = self.adjacency.get(&id) {
            for &j in set {
                if let Some(e) = self.edges.get_mut(&key(id, j)) {
                    e.sign = e.sign.flip();
                }
            }
        }
    }

    pub(crate) fn take_pending(&mut self, id: NodeId) -> Option<Squeezing> {
        self.pending.remove(&id)
    }

    pub(crate) fn is_pending(&self, id: NodeId) -> bool {
        self.pending.contains_key(&id)
    }
}
