//! Diagnostics on simplified graphs: the degree rule and sign equivalence under π inversions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::graph::{key, SimplifiedGraph};
use crate::gaussian::NodeId;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeException {
    pub a: NodeId,
    pub b: NodeId,
    pub coefficient: f64,
    pub expected: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DegreeReport {
    pub checked: usize,
    pub exceptions: Vec<DegreeException>,
}

impl DegreeReport {
    pub fn holds(&self) -> bool {
        self.exceptions.is_empty()
    }
}

/// Checks `𝒞 = max(d₁, d₂)^{−1/2}` on every edge with both ends in `interior`.
pub fn degree_rule_check<T: Real>(
    g: &SimplifiedGraph<T>,
    interior: &BTreeSet<NodeId>,
) -> DegreeReport {
    let mut report = DegreeReport::default();
    for (&(a, b), e) in g.edges() {
        if !(interior.contains(&a) && interior.contains(&b)) {
            continue;
        }
        report.checked += 1;
        let d = g.degree(a).max(g.degree(b)) as f64;
        let expected = d.powf(-0.5);
        let c = e.magnitude.value();
        if (c - expected).abs() >= 1e-12 {
            report.exceptions.push(DegreeException {
                a,
                b,
                coefficient: c,
                expected,
            });
        }
    }
    report
}

/// Finds a node set whose inversion turns the signs of `g1` into those of `g2`.
///
/// Each edge gives `x_a ⊕ x_b = [signs differ]` over GF(2); the system is solved by
/// propagation over each connected component. Of the two solutions per component the
/// smaller one is returned. `None` when node sets, edge sets or magnitudes differ, or the
/// system is inconsistent.
pub fn graphs_equivalent_mod_inversion<T: Real>(
    g1: &SimplifiedGraph<T>,
    g2: &SimplifiedGraph<T>,
) -> Option<BTreeSet<NodeId>> {
    if g1.ids() != g2.ids() || g1.edges().len() != g2.edges().len() {
        return None;
    }
    let mut parity: BTreeMap<(NodeId, NodeId), bool> = BTreeMap::new();
    for (&k, e1) in g1.edges() {
        let e2 = g2.edges().get(&k)?;
        let (m1, m2) = (e1.magnitude.value(), e2.magnitude.value());
        if (m1 - m2).abs() > 1e-12 * m1.max(m2).max(1.0) {
            return None;
        }
        parity.insert(k, e1.sign != e2.sign);
    }

    let mut assignment: BTreeMap<NodeId, bool> = BTreeMap::new();
    let mut flipped = BTreeSet::new();
    for root in g1.ids() {
        if assignment.contains_key(&root) {
            continue;
        }
        let mut component = vec![root];
        assignment.insert(root, false);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let xu = assignment[&u];
            for (v, _) in g1.neighbors(u) {
                let want = xu ^ parity[&key(u, v)];
                match assignment.get(&v) {
                    Some(&xv) if xv != want => return None,
                    Some(_) => {}
                    None => {
                        assignment.insert(v, want);
                        component.push(v);
                        queue.push_back(v);
                    }
                }
            }
        }
        let ones: Vec<NodeId> = component
            .iter()
            .copied()
            .filter(|id| assignment[id])
            .collect();
        if 2 * ones.len() <= component.len() {
            flipped.extend(ones);
        } else {
            flipped.extend(component.into_iter().filter(|id| !assignment[id]));
        }
    }
    Some(flipped)
}
