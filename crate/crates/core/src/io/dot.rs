use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::document::GraphDocument;
use crate::circuits::Frame;
use crate::error::{Error, Result};
use crate::gaussian::Color;
use crate::rules::Sign;

pub const POSITIVE_COLOR: &str = "firebrick";
pub const NEGATIVE_COLOR: &str = "royalblue";

/// Horizontal and vertical spacing of the layout hints, in inches.
const SPACING: f64 = 1.2;

/// Graphviz text for `doc`. Rule-engine documents are rendered in `mode` (edge labels
/// `−𝒞 sinh2α` as the imaginary part of `Z`, or `𝒞 tanh2α` in `Z′`); dense documents
/// carry no `(sign, 𝒞)` and are labelled with their stored weights whatever the mode.
/// Nodes with a macronode index get pinned `pos` hints: macronode across, rail down.
pub fn export_dot(doc: &GraphDocument, mode: Frame) -> String {
    let mut out = String::from("graph cvcluster {\n");
    let pinned = doc.nodes.iter().any(|n| n.macronode.is_some());
    if pinned {
        out.push_str("  layout=neato;\n");
    }
    for n in &doc.nodes {
        let style = match n.color {
            Color::White => "shape=circle, style=filled, fillcolor=white",
            Color::Black => "shape=circle, style=filled, fillcolor=black, fontcolor=white",
        };
        let _ = write!(out, "  \"{}\" [{style}", n.id);
        if let Some(k) = n.macronode {
            let (x, y) = (k as f64 * SPACING, -(n.id.rail as f64) * SPACING + 0.0);
            let _ = write!(out, ", pos=\"{x:.2},{y:.2}!\"");
        }
        out.push_str("];\n");
    }
    let two_a = 2.0 * doc.alpha;
    for e in &doc.edges {
        let (sign, label) = match (e.sign, e.coefficient) {
            (Some(s), Some(c)) => {
                let label = match mode {
                    Frame::Z => format!("{:.4}i", -s.factor() * c * two_a.sinh()),
                    Frame::ZPrime => format!("{:.4}", s.factor() * c * two_a.tanh()),
                };
                (s, label)
            }
            _ => {
                let positive = match doc.frame {
                    Frame::Z => e.weight.im <= 0.0,
                    Frame::ZPrime => e.weight.re >= 0.0,
                };
                let sign = if positive { Sign::Plus } else { Sign::Minus };
                (sign, format!("{:.4}{:+.4}i", e.weight.re, e.weight.im))
            }
        };
        let color = match sign {
            Sign::Plus => POSITIVE_COLOR,
            Sign::Minus => NEGATIVE_COLOR,
        };
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [sign=\"{sign}\", color={color}, label=\"{label}\"];",
            e.a, e.b
        );
    }
    out.push_str("}\n");
    out
}

pub fn write_dot(doc: &GraphDocument, mode: Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, export_dot(doc, mode))
        .map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}
