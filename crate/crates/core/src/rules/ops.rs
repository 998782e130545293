//! The three rewrite rules: q deletion, π inversion, 50:50 beamsplitter.

use super::graph::{BsArrow, Edge, Magnitude, Sign, SimplifiedGraph, Squeezing};
use crate::error::{Error, Result};
use crate::gaussian::{Color, NodeId};
use crate::scalar::Real;

impl<T: Real> SimplifiedGraph<T> {
    pub fn measure_q_mut(&mut self, node: NodeId) -> Result<()> {
        self.remove(node)
    }

    pub fn invert_mut(&mut self, node: NodeId) -> Result<()> {
        if !self.contains(node) {
            return Err(Error::UnknownNode(node));
        }
        self.flip_incident(node);
        Ok(())
    }

    pub fn beamsplit_mut(&mut self, arrow: BsArrow) -> Result<()> {
        let BsArrow { tail, head } = arrow;
        for id in [tail, head] {
            if !self.contains(id) {
                return Err(Error::UnknownNode(id));
            }
        }
        match (self.is_pending(tail), self.is_pending(head)) {
            (true, true) => return self.pair_singles(tail, head),
            (false, false) => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "beamsplitter {tail}->{head} mixes a single squeezed mode with a graph node"
                )))
            }
        }
        if self.edge(tail, head).is_some() {
            return Err(Error::Precondition(format!(
                "link between interfered nodes {tail} and {head}"
            )));
        }
        let from_tail = self.take_incident(tail);
        let from_head = self.take_incident(head);
        for (j, e) in from_tail {
            let half = Edge {
                sign: e.sign,
                magnitude: e.magnitude.halved(),
            };
            self.accumulate(j, tail, half);
            self.accumulate(j, head, half);
        }
        for (j, e) in from_head {
            let half = Edge {
                sign: e.sign,
                magnitude: e.magnitude.halved(),
            };
            self.accumulate(j, head, half);
            self.accumulate(
                j,
                tail,
                Edge {
                    sign: e.sign.flip(),
                    ..half
                },
            );
        }
        Ok(())
    }

    /// Two opposite single squeezers through the beamsplitter form a two-mode squeezed pair
    /// with `𝒞 = 1`; the sign is `+` when the tail is p-squeezed.
    fn pair_singles(&mut self, tail: NodeId, head: NodeId) -> Result<()> {
        let sign = match (self.pending()[&tail], self.pending()[&head]) {
            (Squeezing::P, Squeezing::Q) => Sign::Plus,
            (Squeezing::Q, Squeezing::P) => Sign::Minus,
            _ => {
                return Err(Error::Precondition(format!(
                    "beamsplitter {tail}->{head} on equally squeezed singles"
                )))
            }
        };
        self.take_pending(tail);
        self.take_pending(head);
        self.add_node(tail, Color::Black)?;
        self.add_node(head, Color::Black)?;
        self.set_edge(
            tail,
            head,
            Edge {
                sign,
                magnitude: Magnitude::ONE,
            },
        )
    }
}

/// Deletes the node and its links; surviving weights are untouched.
pub fn rule_measure_q<T: Real>(g: &SimplifiedGraph<T>, node: NodeId) -> Result<SimplifiedGraph<T>> {
    let mut out = g.clone();
    out.measure_q_mut(node)?;
    Ok(out)
}

/// Flips the sign of every edge at the node.
pub fn rule_invert<T: Real>(g: &SimplifiedGraph<T>, node: NodeId) -> Result<SimplifiedGraph<T>> {
    let mut out = g.clone();
    out.invert_mut(node)?;
    Ok(out)
}

/// Duplicates each link at the interfered pair with a factor `1/√2`; copies against the
/// arrow flip sign.
pub fn rule_beamsplit<T: Real>(
    g: &SimplifiedGraph<T>,
    arrow: BsArrow,
) -> Result<SimplifiedGraph<T>> {
    let mut out = g.clone();
    out.beamsplit_mut(arrow)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(i: usize) -> NodeId {
        NodeId::seq(i)
    }

    fn star(sign: Sign) -> SimplifiedGraph {
        let mut g = SimplifiedGraph::new(1.0);
        for i in 0..3 {
            g.add_node(id(i), Color::Black).unwrap();
        }
        g.set_edge(id(0), id(1), Edge::new(sign, 1.0)).unwrap();
        g
    }

    #[test]
    fn copy_along_arrow_keeps_sign() {
        let g = rule_beamsplit(&star(Sign::Plus), BsArrow::new(id(1), id(2)).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(g.edge(id(0), id(1)).unwrap().coefficient(), h);
        assert_eq!(g.edge(id(0), id(2)).unwrap().coefficient(), h);
    }

    #[test]
    fn copy_against_arrow_flips_sign() {
        let g = rule_beamsplit(&star(Sign::Plus), BsArrow::new(id(2), id(1)).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(g.edge(id(0), id(1)).unwrap().coefficient(), h);
        assert_eq!(g.edge(id(0), id(2)).unwrap().coefficient(), -h);
    }

    #[test]
    fn linked_pair_is_refused() {
        let err =
            rule_beamsplit(&star(Sign::Plus), BsArrow::new(id(0), id(1)).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn inversion_is_an_involution() {
        let g = star(Sign::Plus);
        let once = rule_invert(&g, id(1)).unwrap();
        assert_eq!(once.edge(id(0), id(1)).unwrap().sign, Sign::Minus);
        assert_eq!(rule_invert(&once, id(1)).unwrap(), g);
        assert_eq!(rule_invert(&g, id(2)).unwrap(), g);
        assert_eq!(rule_invert(&g, id(9)), Err(Error::UnknownNode(id(9))));
    }

    #[test]
    fn deletion_drops_links() {
        let g = rule_measure_q(&star(Sign::Minus), id(1)).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.len(), 2);
        let g = rule_measure_q(&g, id(2)).unwrap();
        assert_eq!(g.len(), 1);
        assert!(rule_measure_q(&g, id(2)).is_err());
    }

    #[test]
    fn singles_pair_up() {
        let mut g = SimplifiedGraph::<f64>::new(0.5);
        g.add_pending(id(0), Squeezing::P).unwrap();
        g.add_pending(id(1), Squeezing::Q).unwrap();
        g.add_pending(id(2), Squeezing::Q).unwrap();
        g.add_pending(id(3), Squeezing::P).unwrap();
        g.beamsplit_mut(BsArrow::new(id(0), id(1)).unwrap())
            .unwrap();
        g.beamsplit_mut(BsArrow::new(id(2), id(3)).unwrap())
            .unwrap();
        assert_eq!(g.edge(id(0), id(1)).unwrap().coefficient(), 1.0);
        assert_eq!(g.edge(id(2), id(3)).unwrap().coefficient(), -1.0);
        assert!(g.pending().is_empty());
        g.add_pending(id(4), Squeezing::Q).unwrap();
        assert!(g
            .beamsplit_mut(BsArrow::new(id(4), id(0)).unwrap())
            .is_err());
    }
}
