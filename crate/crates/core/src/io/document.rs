use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuits::{Construction, DualState, Engines, Frame, Layout};
use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, Color, ExactGraph, NodeId};
use crate::rules::{Sign, SimplifiedGraph, Squeezing};
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance for the sign/coefficient/weight consistency check on load.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl<T: Real> From<Complex<T>> for ComplexValue {
    fn from(z: Complex<T>) -> Self {
        Self {
            re: z.re.as_f64(),
            im: z.im.as_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub color: Color,
    pub self_loop: ComplexValue,
    /// Macronode index, when the node comes from a circuit run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macronode: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: ComplexValue,
    /// Rule-engine documents carry the sign and `𝒞` alongside the rendered weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ticks: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    /// Pipeline stages applied after the run, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<String>,
}

impl Provenance {
    pub fn for_run(layout: &Layout, ticks: u32, engine: Engines) -> Self {
        let (construction, m) = match layout.construction {
            Construction::Wire => ("wire", None),
            Construction::Lattice { m } => ("lattice", Some(m)),
            Construction::Custom => ("custom", None),
        };
        let engine = match engine {
            Engines::Rules => "rules",
            Engines::Exact => "exact",
            Engines::Both => "both",
        };
        Self {
            construction: Some(construction.into()),
            ticks: Some(ticks),
            m,
            engine: Some(engine.into()),
            stages: Vec::new(),
        }
    }
}

/// Serializable snapshot of one graph, in either frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: u32,
    pub alpha: f64,
    pub frame: Frame,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub provenance: Provenance,
}

fn rendered_weight(coefficient: f64, alpha: f64, frame: Frame) -> ComplexValue {
    let two_a = 2.0 * alpha;
    match frame {
        Frame::Z => ComplexValue {
            re: 0.0,
            im: -coefficient * two_a.sinh(),
        },
        Frame::ZPrime => ComplexValue {
            re: coefficient * two_a.tanh(),
            im: 0.0,
        },
    }
}

impl GraphDocument {
    /// Document of a rule-engine graph rendered in `frame`. Pending single modes only exist
    /// in the `Z` frame.
    pub fn from_simplified<T: Real>(
        g: &SimplifiedGraph<T>,
        frame: Frame,
        layout: Option<&Layout>,
        provenance: Provenance,
    ) -> Result<Self> {
        let alpha = g.alpha().as_f64();
        let two_a = 2.0 * alpha;
        if frame == Frame::ZPrime && !g.pending().is_empty() {
            return Err(Error::Precondition(
                "pending single modes have no cluster form".into(),
            ));
        }
        let nodes = g
            .ids()
            .into_iter()
            .map(|id| {
                let u = match (frame, g.pending().get(&id)) {
                    (Frame::ZPrime, _) => 1.0 / two_a.cosh(),
                    (Frame::Z, None) => two_a.cosh(),
                    (Frame::Z, Some(Squeezing::Q)) => two_a.exp(),
                    (Frame::Z, Some(Squeezing::P)) => (-two_a).exp(),
                };
                NodeRecord {
                    id,
                    color: g.nodes().get(&id).copied().unwrap_or_default(),
                    self_loop: ComplexValue { re: 0.0, im: u },
                    macronode: layout.map(|l| l.macronode(id)),
                }
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .map(|(&(a, b), e)| EdgeRecord {
                a,
                b,
                weight: rendered_weight(e.coefficient(), alpha, frame),
                sign: Some(e.sign),
                coefficient: Some(e.magnitude.value()),
            })
            .collect();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            alpha,
            frame,
            nodes,
            edges,
            provenance,
        })
    }

    /// Document of a dense graph; every nonzero off-diagonal entry becomes an edge.
    pub fn from_exact<T: Real>(
        g: &ExactGraph<T>,
        alpha: T,
        frame: Frame,
        layout: Option<&Layout>,
        provenance: Provenance,
    ) -> Self {
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.sort_by_key(|&i| g.labels()[i]);
        let nodes = order
            .iter()
            .map(|&i| NodeRecord {
                id: g.labels()[i],
                color: g.colors()[i],
                self_loop: g.entry(i, i).into(),
                macronode: layout.map(|l| l.macronode(g.labels()[i])),
            })
            .collect();
        let mut edges = Vec::new();
        for (x, &i) in order.iter().enumerate() {
            for &j in &order[x + 1..] {
                let w = g.entry(i, j);
                if w.re != T::zero() || w.im != T::zero() {
                    edges.push(EdgeRecord {
                        a: g.labels()[i],
                        b: g.labels()[j],
                        weight: w.into(),
                        sign: None,
                        coefficient: None,
                    });
                }
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            alpha: alpha.as_f64(),
            frame,
            nodes,
            edges,
            provenance,
        }
    }

    /// Prefers the rule engine when it is live, since its document carries `(sign, 𝒞)`.
    pub fn from_state<T: Real>(state: &DualState<T>, provenance: Provenance) -> Result<Self> {
        if let Some(s) = &state.simplified {
            return Self::from_simplified(s, state.frame, Some(&state.layout), provenance);
        }
        match state.exact_sorted() {
            Some(g) => Ok(Self::from_exact(
                &g?,
                state.alpha,
                state.frame,
                Some(&state.layout),
                provenance,
            )),
            None => Ok(Self {
                schema_version: SCHEMA_VERSION,
                alpha: state.alpha.as_f64(),
                frame: state.frame,
                nodes: Vec::new(),
                edges: Vec::new(),
                provenance,
            }),
        }
    }

    /// Structural checks: ids unique, endpoints present, and for rule-engine edges the weight
    /// agrees with the rendering of `(sign, 𝒞, α)` in the document's frame.
    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Document("alpha: not a finite number".into()));
        }
        let mut ids = BTreeSet::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if !ids.insert(n.id) {
                return Err(Error::Document(format!(
                    "nodes[{k}].id: duplicate id {}",
                    n.id
                )));
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            for (field, id) in [("a", e.a), ("b", e.b)] {
                if !ids.contains(&id) {
                    return Err(Error::Document(format!(
                        "edges[{k}].{field}: unknown node {id}"
                    )));
                }
            }
            if e.a == e.b {
                return Err(Error::Document(format!(
                    "edges[{k}]: self-loop {} listed as an edge",
                    e.a
                )));
            }
            match (e.sign, e.coefficient) {
                (None, None) => {}
                (Some(sign), Some(c)) => {
                    let want = rendered_weight(sign.factor() * c, self.alpha, self.frame);
                    let scale = want.re.abs().max(want.im.abs()).max(1.0);
                    let gap = (want.re - e.weight.re)
                        .abs()
                        .max((want.im - e.weight.im).abs());
                    if !(c > 0.0) || !(gap <= WEIGHT_TOL * scale) {
                        return Err(Error::Document(format!(
                            "edges[{k}]: weight ({}, {}) disagrees with sign {sign} and coefficient {c}",
                            e.weight.re, e.weight.im
                        )));
                    }
                }
                _ => {
                    return Err(Error::Document(format!(
                        "edges[{k}]: sign and coefficient must appear together"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Dense graph in the document's frame, nodes in document order.
    pub fn to_exact(&self) -> Result<ExactGraph<f64>> {
        self.check()?;
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::EmptyState);
        }
        let index = |id: NodeId| self.nodes.iter().position(|r| r.id == id).expect("checked");
        let mut z = CMatrix::<f64>::zeros(n, n);
        for (i, r) in self.nodes.iter().enumerate() {
            z[(i, i)] = Complex::new(r.self_loop.re, r.self_loop.im);
        }
        for e in &self.edges {
            let (i, j) = (index(e.a), index(e.b));
            let w = Complex::new(e.weight.re, e.weight.im);
            z[(i, j)] = w;
            z[(j, i)] = w;
        }
        ExactGraph::with_metadata(
            z,
            self.nodes.iter().map(|r| r.id).collect(),
            self.nodes.iter().map(|r| r.color).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Document(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and checks a document. Syntax errors name the byte offset; schema errors name
    /// the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            Error::Document(format!(
                "parse error at byte offset {}: {e}",
                byte_offset(text, e.line(), e.column())
            ))
        })?;
        match value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
        {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Document(format!(
                    "schema version {v} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => {
                return Err(Error::Document(
                    "schema_version: missing or not an integer".into(),
                ))
            }
        }
        let doc: GraphDocument = serde_json::from_value(value)
            .map_err(|e| Error::Document(format!("malformed document: {e}")))?;
        doc.check()?;
        Ok(doc)
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (before + column.saturating_sub(1)).min(text.len())
}

pub fn save_graph(doc: &GraphDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, doc.to_json()?).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<GraphDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
    GraphDocument::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::vacuum_graph;
    use crate::rules::Edge;

    fn pair() -> SimplifiedGraph<f64> {
        let mut g = SimplifiedGraph::new(0.5);
        g.add_node(NodeId::seq(0), Color::White).unwrap();
        g.add_node(NodeId::seq(1), Color::Black).unwrap();
        g.set_edge(NodeId::seq(0), NodeId::seq(1), Edge::new(Sign::Minus, 0.5))
            .unwrap();
        g
    }

    #[test]
    fn vacuum_round_trip() {
        let g = vacuum_graph::<f64>(2).unwrap();
        let doc = GraphDocument::from_exact(&g, 0.0, Frame::Z, None, Provenance::default());
        assert!(doc.edges.is_empty());
        let back = GraphDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_exact().unwrap().z(), g.z());
    }

    #[test]
    fn rule_document_renders_both_frames() {
        let g = pair();
        let z = GraphDocument::from_simplified(&g, Frame::Z, None, Provenance::default()).unwrap();
        assert_eq!(
            z.edges[0].weight,
            ComplexValue {
                re: 0.0,
                im: 0.5 * 1f64.sinh()
            }
        );
        assert_eq!(
            z.to_exact().unwrap().z(),
            crate::rules::to_exact(&g).unwrap().z()
        );
        let zp =
            GraphDocument::from_simplified(&g, Frame::ZPrime, None, Provenance::default()).unwrap();
        assert_eq!(
            zp.edges[0].weight,
            ComplexValue {
                re: -0.5 * 1f64.tanh(),
                im: 0.0
            }
        );
    }

    #[test]
    fn tampered_weight_is_rejected() {
        let mut doc =
            GraphDocument::from_simplified(&pair(), Frame::Z, None, Provenance::default()).unwrap();
        doc.edges[0].weight.im *= 1.01;
        let err = GraphDocument::from_json(&doc.to_json().unwrap()).unwrap_err();
        assert!(err.to_string().contains("edges[0]"), "{err}");
    }

    #[test]
    fn schema_and_syntax_errors() {
        let doc =
            GraphDocument::from_simplified(&pair(), Frame::Z, None, Provenance::default()).unwrap();
        let text = doc.to_json().unwrap();
        let err = GraphDocument::from_json(&text[..40])
            .unwrap_err()
            .to_string();
        assert!(err.contains("byte offset"), "{err}");
        let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
        let err = GraphDocument::from_json(&bumped).unwrap_err().to_string();
        assert!(err.contains("schema version 9"), "{err}");
        let missing = text.replacen("\"alpha\"", "\"beta\"", 1);
        let err = GraphDocument::from_json(&missing).unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let mut doc =
            GraphDocument::from_simplified(&pair(), Frame::Z, None, Provenance::default()).unwrap();
        doc.nodes.pop();
        assert!(doc.check().unwrap_err().to_string().contains("edges[0].b"));
    }

    #[test]
    fn byte_offsets() {
        assert_eq!(byte_offset("ab\ncd", 2, 2), 4);
        assert_eq!(byte_offset("ab", 1, 1), 0);
    }
}
