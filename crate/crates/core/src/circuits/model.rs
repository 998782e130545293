//! Optical components, their wiring, and the two pipeline layouts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Color, NodeId};
use crate::rules::Squeezing;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorBasis {
    Q,
    QAfterFourier,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentKind {
    /// Emits one pulse per tick.
    Squeezer {
        squeezing: Squeezing,
        output: String,
    },
    /// Mode identity follows the port: `tail_in → tail_out`, `head_in → head_out`.
    Beamsplitter {
        tail_in: String,
        head_in: String,
        tail_out: String,
        head_out: String,
    },
    Delay {
        input: String,
        output: String,
        ticks: u32,
    },
    Detector {
        input: String,
        basis: DetectorBasis,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub kind: ComponentKind,
    pub enabled: bool,
}

impl Component {
    pub fn squeezer(name: &str, squeezing: Squeezing, output: &str) -> Self {
        Self::new(
            name,
            ComponentKind::Squeezer {
                squeezing,
                output: output.into(),
            },
        )
    }

    pub fn beamsplitter(name: &str, ins: (&str, &str), outs: (&str, &str)) -> Self {
        Self::new(
            name,
            ComponentKind::Beamsplitter {
                tail_in: ins.0.into(),
                head_in: ins.1.into(),
                tail_out: outs.0.into(),
                head_out: outs.1.into(),
            },
        )
    }

    pub fn delay(name: &str, input: &str, output: &str, ticks: u32) -> Self {
        Self::new(
            name,
            ComponentKind::Delay {
                input: input.into(),
                output: output.into(),
                ticks,
            },
        )
    }

    pub fn detector(name: &str, input: &str, basis: DetectorBasis) -> Self {
        Self::new(
            name,
            ComponentKind::Detector {
                input: input.into(),
                basis,
            },
        )
    }

    fn new(name: &str, kind: ComponentKind) -> Self {
        Self {
            name: name.into(),
            kind,
            enabled: true,
        }
    }

    fn inputs(&self) -> Vec<&str> {
        match &self.kind {
            ComponentKind::Squeezer { .. } => vec![],
            ComponentKind::Beamsplitter {
                tail_in, head_in, ..
            } => vec![tail_in, head_in],
            ComponentKind::Delay { input, .. } | ComponentKind::Detector { input, .. } => {
                vec![input]
            }
        }
    }

    fn outputs(&self) -> Vec<&str> {
        match &self.kind {
            ComponentKind::Squeezer { output, .. } | ComponentKind::Delay { output, .. } => {
                vec![output]
            }
            ComponentKind::Beamsplitter {
                tail_out, head_out, ..
            } => vec![tail_out, head_out],
            ComponentKind::Detector { .. } => vec![],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Construction {
    Wire,
    Lattice { m: u32 },
    Custom,
}

/// Where a lane's pulse came from: the emitting rail and the ticks spent in delays so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneOrigin {
    pub rail: u16,
    pub offset: u32,
}

/// Static per-rail data: every pulse of a rail meets the same components.
#[derive(Clone, Debug, PartialEq)]
pub struct Rail {
    pub source: String,
    pub squeezing: Squeezing,
    /// Total delay along the rail's path; macronode = emission tick + this.
    pub path_delay: u32,
}

/// Mode metadata shared by runs and states.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub construction: Construction,
    pub rails: Vec<Rail>,
}

impl Layout {
    pub fn macronode(&self, id: NodeId) -> u64 {
        id.tick as u64 + self.rails[id.rail as usize].path_delay as u64
    }

    /// Even macronodes are white and form the first (phase-shifted) set.
    pub fn color(&self, id: NodeId) -> Color {
        if self.macronode(id) % 2 == 0 {
            Color::White
        } else {
            Color::Black
        }
    }

    /// Macronodes affected by the open start and end of a run of `ticks`: the first and last
    /// `max(1, m)` are excluded from interior checks.
    pub fn transient_width(&self) -> u64 {
        match self.construction {
            Construction::Lattice { m } => m.max(1) as u64,
            _ => 1,
        }
    }

    pub fn is_interior(&self, id: NodeId, ticks: u32) -> bool {
        let k = self.macronode(id);
        let w = self.transient_width();
        k >= w && k + w <= ticks as u64
    }
}

/// Validated wiring with a fixed per-tick processing order.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T: Real = f64> {
    alpha: T,
    components: Vec<Component>,
    order: Vec<usize>,
    lanes: BTreeMap<String, LaneOrigin>,
    layout: Layout,
}

impl<T: Real> Circuit<T> {
    pub fn new(alpha: T, construction: Construction, components: Vec<Component>) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::Precondition("alpha must be positive".into()));
        }
        let mut writer: BTreeMap<&str, usize> = BTreeMap::new();
        let mut reader: BTreeMap<&str, usize> = BTreeMap::new();
        let mut names = BTreeSet::new();
        for (i, c) in components.iter().enumerate() {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidWiring(format!(
                    "duplicate component name {}",
                    c.name
                )));
            }
            match &c.kind {
                ComponentKind::Delay { ticks: 0, .. } => {
                    return Err(Error::InvalidWiring(format!(
                        "delay {} has zero ticks",
                        c.name
                    )))
                }
                ComponentKind::Beamsplitter {
                    tail_in, head_in, ..
                } if tail_in == head_in => {
                    return Err(Error::InvalidWiring(format!(
                        "beamsplitter {} has one input twice",
                        c.name
                    )))
                }
                _ => {}
            }
            for lane in c.outputs() {
                if writer.insert(lane, i).is_some() {
                    return Err(Error::InvalidWiring(format!("lane {lane} has two writers")));
                }
            }
            for lane in c.inputs() {
                if reader.insert(lane, i).is_some() {
                    return Err(Error::InvalidWiring(format!("lane {lane} has two readers")));
                }
            }
        }
        if let Some(lane) = reader.keys().find(|l| !writer.contains_key(*l)) {
            return Err(Error::InvalidWiring(format!(
                "lane {lane} is read but never written"
            )));
        }

        // Within a tick, a delay's output is available from the start, so delays cut
        // same-tick dependencies. Static origins need the full dependency order instead.
        let same_tick = topo_order(&components, &writer, true)?;
        let all = topo_order(&components, &writer, false)
            .map_err(|_| Error::InvalidWiring("feedback loops are not supported".into()))?;

        let mut lanes: BTreeMap<String, LaneOrigin> = BTreeMap::new();
        let mut rails = Vec::new();
        for &i in &all {
            let c = &components[i];
            match &c.kind {
                ComponentKind::Squeezer { squeezing, output } => {
                    let rail = u16::try_from(rails.len())
                        .map_err(|_| Error::InvalidWiring("too many sources".into()))?;
                    rails.push(Rail {
                        source: c.name.clone(),
                        squeezing: *squeezing,
                        path_delay: 0,
                    });
                    lanes.insert(output.clone(), LaneOrigin { rail, offset: 0 });
                }
                ComponentKind::Beamsplitter {
                    tail_in,
                    head_in,
                    tail_out,
                    head_out,
                } => {
                    let t = lanes[tail_in];
                    let h = lanes[head_in];
                    lanes.insert(tail_out.clone(), t);
                    lanes.insert(head_out.clone(), h);
                }
                ComponentKind::Delay {
                    input,
                    output,
                    ticks,
                } => {
                    let o = lanes[input];
                    lanes.insert(
                        output.clone(),
                        LaneOrigin {
                            rail: o.rail,
                            offset: o.offset + ticks,
                        },
                    );
                }
                ComponentKind::Detector { .. } => {}
            }
        }
        // A rail's path ends at the lane nobody forwards: a detector input or an open output.
        let mut terminal_seen = vec![false; rails.len()];
        for (lane, origin) in &lanes {
            let forwarded = match reader.get(lane.as_str()) {
                Some(&r) => !matches!(components[r].kind, ComponentKind::Detector { .. }),
                None => false,
            };
            if !forwarded {
                let r = origin.rail as usize;
                if terminal_seen[r] {
                    return Err(Error::InvalidWiring(format!(
                        "rail {} ends twice",
                        rails[r].source
                    )));
                }
                terminal_seen[r] = true;
                rails[r].path_delay = origin.offset;
            }
        }
        Ok(Self {
            alpha,
            components,
            order: same_tick,
            lanes,
            layout: Layout {
                construction,
                rails,
            },
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Component indices in per-tick processing order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn lane(&self, name: &str) -> Option<LaneOrigin> {
        self.lanes.get(name).copied()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Turns a beamsplitter into a pass-through (diagnostic).
    pub fn disable(&mut self, name: &str) -> Result<()> {
        let c = self
            .components
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::InvalidWiring(format!("no component named {name}")))?;
        if !matches!(c.kind, ComponentKind::Beamsplitter { .. }) {
            return Err(Error::InvalidWiring(format!(
                "{name} is not a beamsplitter"
            )));
        }
        c.enabled = false;
        Ok(())
    }
}

fn topo_order(
    components: &[Component],
    writer: &BTreeMap<&str, usize>,
    cut_delays: bool,
) -> Result<Vec<usize>> {
    let n = components.len();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, c) in components.iter().enumerate() {
        for lane in c.inputs() {
            let w = writer[lane];
            if cut_delays && matches!(components[w].kind, ComponentKind::Delay { .. }) {
                continue;
            }
            deps[i].insert(w);
        }
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // Lowest ready index first keeps the order deterministic and close to declaration order.
        let next = (0..n).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => return Err(Error::InvalidWiring("wiring has a same-tick cycle".into())),
        }
    }
    Ok(order)
}

/// Quantum wire: S₁ (p-squeezed) and S₂ (q-squeezed) pair on B₁; S₂'s output waits one tick
/// and meets the next S₁ pulse on B₂.
pub fn build_wire_circuit<T: Real>(alpha: T) -> Result<Circuit<T>> {
    let components = vec![
        Component::squeezer("S1", Squeezing::P, "s1"),
        Component::squeezer("S2", Squeezing::Q, "s2"),
        Component::beamsplitter("B1", ("s1", "s2"), ("top", "bottom")),
        Component::delay("delay", "bottom", "bottom_late", 1),
        Component::beamsplitter("B2", ("top", "bottom_late"), ("out1", "out2")),
        Component::detector("D1", "out1", DetectorBasis::Q),
        Component::detector("D2", "out2", DetectorBasis::Q),
    ];
    Circuit::new(alpha, Construction::Wire, components)
}

/// Square-lattice cylinder of circumference `m`: two wires, the lower one with an `m`-tick
/// delay, coupled by B₅ and B₆.
pub fn build_lattice_circuit<T: Real>(alpha: T, m: u32) -> Result<Circuit<T>> {
    if m % 2 == 0 {
        return Err(Error::Precondition(format!("M must be odd, got {m}")));
    }
    if m < 3 {
        return Err(Error::Precondition(format!(
            "M must be at least 3, got {m}"
        )));
    }
    let components = vec![
        Component::squeezer("S1", Squeezing::P, "s1"),
        Component::squeezer("S2", Squeezing::Q, "s2"),
        Component::squeezer("S3", Squeezing::P, "s3"),
        Component::squeezer("S4", Squeezing::Q, "s4"),
        Component::beamsplitter("B1", ("s1", "s2"), ("a0", "b0")),
        Component::beamsplitter("B2", ("s3", "s4"), ("c0", "d0")),
        Component::delay("short", "b0", "b1", 1),
        Component::delay("long", "d0", "d1", m),
        Component::beamsplitter("B3", ("a0", "b1"), ("a1", "b2")),
        Component::beamsplitter("B4", ("c0", "d1"), ("c1", "d2")),
        Component::beamsplitter("B5", ("a1", "c1"), ("a2", "c2")),
        Component::beamsplitter("B6", ("b2", "d2"), ("b3", "d3")),
        Component::detector("D1", "a2", DetectorBasis::Q),
        Component::detector("D2", "b3", DetectorBasis::Q),
        Component::detector("D3", "c2", DetectorBasis::Q),
        Component::detector("D4", "d3", DetectorBasis::Q),
    ];
    Circuit::new(alpha, Construction::Lattice { m }, components)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_layout() {
        let c = build_wire_circuit(1.0).unwrap();
        let l = c.layout();
        assert_eq!(l.rails.len(), 2);
        assert_eq!(l.rails[0].path_delay, 0);
        assert_eq!(l.rails[1].path_delay, 1);
        assert_eq!(l.macronode(NodeId::new(3, 1)), 4);
        assert_eq!(l.color(NodeId::new(4, 0)), Color::White);
        assert_eq!(
            c.lane("bottom_late"),
            Some(LaneOrigin { rail: 1, offset: 1 })
        );
    }

    #[test]
    fn lattice_layout_and_oddness() {
        let c = build_lattice_circuit(1.0, 5).unwrap();
        let delays: Vec<u32> = c.layout().rails.iter().map(|r| r.path_delay).collect();
        assert_eq!(delays, vec![0, 1, 0, 5]);
        assert!(build_lattice_circuit(1.0, 4).is_err());
        assert!(build_lattice_circuit(1.0, 1).is_err());
    }

    #[test]
    fn wiring_errors() {
        let twice = vec![
            Component::squeezer("S", Squeezing::Q, "x"),
            Component::detector("D", "x", DetectorBasis::Q),
            Component::detector("E", "x", DetectorBasis::Q),
        ];
        assert!(Circuit::new(1.0, Construction::Custom, twice).is_err());
        let dangling = vec![Component::detector("D", "nowhere", DetectorBasis::Q)];
        assert!(Circuit::new(1.0, Construction::Custom, dangling).is_err());
        let zero = vec![
            Component::squeezer("S", Squeezing::Q, "x"),
            Component::delay("L", "x", "y", 0),
        ];
        assert!(Circuit::new(1.0, Construction::Custom, zero).is_err());
        assert!(build_wire_circuit(0.0).is_err());
    }

    #[test]
    fn disabling_needs_a_beamsplitter() {
        let mut c = build_wire_circuit(1.0).unwrap();
        c.disable("B2").unwrap();
        assert!(c.disable("D1").is_err());
        assert!(c.disable("B9").is_err());
    }
}
