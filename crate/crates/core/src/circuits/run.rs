//! Tick-by-tick replay of a circuit on one or both engines.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::model::{Circuit, ComponentKind, DetectorBasis, Layout};
use crate::error::{Error, Result};
use crate::gaussian::linalg::max_abs_c;
use crate::gaussian::symplectic::apply_local_streaming;
use crate::gaussian::{
    measure_q_many, measure_q_rotated, CMatrix, Color, ExactGraph, LocalOp, NodeId,
};
use crate::rules::{to_cluster_exact, to_exact, BsArrow, SimplifiedGraph, Squeezing};
use crate::scalar::{modulus, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engines {
    Rules,
    Exact,
    Both,
}

impl Engines {
    fn rules(self) -> bool {
        matches!(self, Engines::Rules | Engines::Both)
    }

    fn exact(self) -> bool {
        matches!(self, Engines::Exact | Engines::Both)
    }
}

/// `Z` is the graph as produced; `Z′` has every white node Fourier transformed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Z,
    ZPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum EventKind {
    Emit {
        mode: NodeId,
        squeezing: Squeezing,
    },
    Interact {
        tail: NodeId,
        head: NodeId,
        component: String,
    },
    Detect {
        mode: NodeId,
        basis: DetectorBasis,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub tick: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub tick: u32,
    pub modes: usize,
    /// `‖to_exact(rules) − exact‖` entrywise, when both engines are live.
    pub equivalence_defect: Option<f64>,
    /// Exact-engine physicality (symmetric, positive `Im Z`).
    pub physical: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub ticks: u32,
    pub events: Vec<Event>,
    pub snapshots: Vec<Snapshot>,
    /// Live modes at the end of each tick.
    pub live_per_tick: Vec<usize>,
    /// Largest number of simultaneously live modes at any point.
    pub max_live: usize,
    /// Tick at which the exact engine stopped because of the node cap.
    pub exact_dropped_at: Option<u32>,
}

impl RunTrace {
    pub fn worst_equivalence_defect(&self) -> Option<f64> {
        self.snapshots
            .iter()
            .filter_map(|s| s.equivalence_defect)
            .reduce(f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub ticks: u32,
    pub engines: Engines,
    pub eager_detection: bool,
    /// Ticks between snapshots; `None` picks 1 for runs up to 50 ticks and 10 beyond.
    pub snapshot_every: Option<u32>,
    /// Largest exact-engine state; beyond it only the rule engine continues.
    pub exact_cap: usize,
}

impl RunOptions {
    pub const DEFAULT_EXACT_CAP: usize = 400;

    pub fn new(ticks: u32, engines: Engines) -> Self {
        Self {
            ticks,
            engines,
            eager_detection: false,
            snapshot_every: None,
            exact_cap: Self::DEFAULT_EXACT_CAP,
        }
    }

    pub fn eager(mut self, eager: bool) -> Self {
        self.eager_detection = eager;
        self
    }

    fn cadence(&self) -> u32 {
        self.snapshot_every
            .unwrap_or(if self.ticks <= 50 { 1 } else { 10 })
            .max(1)
    }
}

/// The two engines side by side, with the mode metadata they share.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState<T: Real = f64> {
    pub alpha: T,
    pub simplified: Option<SimplifiedGraph<T>>,
    pub exact: Option<ExactGraph<T>>,
    pub frame: Frame,
    pub layout: Layout,
    /// Set once boundary contamination is removed; enables full `Z′` comparisons.
    pub clean: bool,
}

impl<T: Real> DualState<T> {
    pub fn new(alpha: T, engines: Engines, layout: Layout) -> Self {
        Self {
            alpha,
            simplified: engines.rules().then(|| SimplifiedGraph::new(alpha)),
            exact: None,
            frame: Frame::Z,
            layout,
            clean: false,
        }
    }

    /// Mode ids in sorted order, from whichever engine is live.
    pub fn ids(&self) -> Vec<NodeId> {
        if let Some(s) = &self.simplified {
            return s.ids();
        }
        let mut ids = self
            .exact
            .as_ref()
            .map(|g| g.labels().to_vec())
            .unwrap_or_default();
        ids.sort_unstable();
        ids
    }

    pub fn len(&self) -> usize {
        match (&self.simplified, &self.exact) {
            (Some(s), _) => s.len(),
            (None, Some(g)) => g.n(),
            (None, None) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds a single squeezed mode; the exact engine only sees it when `with_exact` is set.
    pub fn emit(&mut self, id: NodeId, squeezing: Squeezing, with_exact: bool) -> Result<()> {
        if let Some(s) = &mut self.simplified {
            s.add_pending(id, squeezing)?;
        }
        if with_exact {
            let two_a = self.alpha + self.alpha;
            let u = match squeezing {
                Squeezing::Q => two_a.exp(),
                Squeezing::P => (-two_a).exp(),
            };
            let z = CMatrix::from_element(1, 1, Complex::new(T::zero(), u));
            let single = ExactGraph::with_metadata(z, vec![id], vec![self.layout.color(id)])?;
            self.exact = Some(match &self.exact {
                None => single,
                Some(g) => g.direct_sum(&single),
            });
        }
        Ok(())
    }

    /// 50:50 beamsplitter from `tail` to `head` on every live engine.
    pub fn interact(&mut self, tail: NodeId, head: NodeId) -> Result<()> {
        if let Some(s) = &mut self.simplified {
            let fresh = s.pending().contains_key(&tail);
            s.beamsplit_mut(BsArrow::new(tail, head)?)?;
            if fresh {
                s.set_color(tail, self.layout.color(tail))?;
                s.set_color(head, self.layout.color(head))?;
            }
        }
        if let Some(g) = &self.exact {
            let op = LocalOp::beamsplitter(g.index_of(tail)?, g.index_of(head)?)?;
            self.exact = Some(apply_local_streaming(g, &op)?);
        }
        Ok(())
    }

    pub fn detect(&mut self, id: NodeId, basis: DetectorBasis) -> Result<()> {
        if let Some(s) = &mut self.simplified {
            if basis == DetectorBasis::QAfterFourier && !s.pending().contains_key(&id) {
                return Err(Error::EngineMismatch(format!(
                    "rule engine cannot detect {id} after a Fourier transform"
                )));
            }
            s.measure_q_mut(id)?;
        }
        if let Some(g) = &self.exact {
            let idx = g.index_of(id)?;
            self.exact = if g.n() == 1 {
                None
            } else {
                let theta = match basis {
                    DetectorBasis::Q => T::zero(),
                    DetectorBasis::QAfterFourier => -T::frac_pi_2(),
                };
                Some(measure_q_rotated(g, idx, theta)?)
            };
        }
        Ok(())
    }

    /// q-deletes `ids` on both engines in the current frame.
    pub fn delete(&mut self, ids: &[NodeId]) -> Result<()> {
        if ids.is_empty() {
            return Ok(());
        }
        if let Some(s) = &mut self.simplified {
            for &id in ids {
                s.measure_q_mut(id)?;
            }
        }
        if let Some(g) = &self.exact {
            let idx = ids
                .iter()
                .map(|&id| g.index_of(id))
                .collect::<Result<Vec<_>>>()?;
            self.exact = Some(measure_q_many(g, &idx)?);
        }
        Ok(())
    }

    /// Exact engine reordered by node id.
    pub fn exact_sorted(&self) -> Option<Result<ExactGraph<T>>> {
        let g = self.exact.as_ref()?;
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.sort_by_key(|&i| g.labels()[i]);
        Some(g.permuted(&order))
    }

    /// Largest entrywise gap between the rendered rule-engine state and the exact engine.
    /// In the `Z′` frame the black–black block is compared only once the state is clean,
    /// since boundary contamination legitimately lives there.
    pub fn equivalence_defect(&self) -> Option<Result<T>> {
        let s = self.simplified.as_ref()?;
        let exact = match self.exact_sorted()? {
            Ok(g) => g,
            Err(e) => return Some(Err(e)),
        };
        Some(compare(s, &exact, self.frame, self.clean))
    }
}

fn compare<T: Real>(
    s: &SimplifiedGraph<T>,
    exact: &ExactGraph<T>,
    frame: Frame,
    clean: bool,
) -> Result<T> {
    if s.ids() != exact.labels() {
        return Err(Error::EngineMismatch("engines hold different modes".into()));
    }
    let rendered = match frame {
        Frame::Z => to_exact(s)?,
        Frame::ZPrime => to_cluster_exact(s)?,
    };
    let diff = rendered.z() - exact.z();
    if frame == Frame::Z || clean {
        return Ok(max_abs_c(&diff));
    }
    let colors = exact.colors();
    let mut worst = T::zero();
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            if colors[i] == Color::Black && colors[j] == Color::Black {
                continue;
            }
            worst = worst.max(modulus(diff[(i, j)]));
        }
    }
    Ok(worst)
}

/// Result of a run: the trace and the final dual state.
#[derive(Clone, Debug)]
pub struct RunOutput<T: Real = f64> {
    pub trace: RunTrace,
    pub state: DualState<T>,
}

/// Replays `circuit` for `opts.ticks` ticks. Pulses enter lanes as sources fire; a beamsplitter
/// acts only when both inputs hold a pulse, otherwise a lone pulse passes through.
pub fn run<T: Real>(circuit: &Circuit<T>, opts: &RunOptions) -> Result<RunOutput<T>> {
    if opts.ticks == 0 {
        return Err(Error::Precondition("a run needs at least one tick".into()));
    }
    let comps = circuit.components();
    let mut state = DualState::new(circuit.alpha(), opts.engines, circuit.layout().clone());
    let mut exact_on = opts.engines.exact();
    let mut trace = RunTrace {
        ticks: opts.ticks,
        events: Vec::new(),
        snapshots: Vec::new(),
        live_per_tick: Vec::with_capacity(opts.ticks as usize),
        max_live: 0,
        exact_dropped_at: None,
    };
    let mut queues: BTreeMap<usize, VecDeque<(u32, NodeId)>> = BTreeMap::new();
    let cadence = opts.cadence();

    for t in 0..opts.ticks {
        let mut lanes: BTreeMap<&str, NodeId> = BTreeMap::new();
        for (&i, q) in queues.iter_mut() {
            if let ComponentKind::Delay { output, .. } = &comps[i].kind {
                while q.front().is_some_and(|(due, _)| *due == t) {
                    let (_, id) = q.pop_front().expect("front checked");
                    lanes.insert(output.as_str(), id);
                }
            }
        }
        for &i in circuit.order() {
            let c = &comps[i];
            match &c.kind {
                ComponentKind::Squeezer { squeezing, output } => {
                    let rail = circuit.lane(output).expect("validated lane").rail;
                    let id = NodeId::new(t, rail);
                    if exact_on && state.exact.as_ref().map_or(0, ExactGraph::n) >= opts.exact_cap {
                        exact_on = false;
                        state.exact = None;
                        trace.exact_dropped_at = Some(t);
                    }
                    state.emit(id, *squeezing, exact_on)?;
                    trace.events.push(Event {
                        tick: t,
                        kind: EventKind::Emit {
                            mode: id,
                            squeezing: *squeezing,
                        },
                    });
                    lanes.insert(output.as_str(), id);
                    trace.max_live = trace.max_live.max(state.len());
                }
                ComponentKind::Beamsplitter {
                    tail_in,
                    head_in,
                    tail_out,
                    head_out,
                } => {
                    let tail = lanes.remove(tail_in.as_str());
                    let head = lanes.remove(head_in.as_str());
                    if let (true, Some(a), Some(b)) = (c.enabled, tail, head) {
                        state.interact(a, b).map_err(|e| match e {
                            Error::Precondition(msg) => {
                                Error::InvalidWiring(format!("{} at tick {t}: {msg}", c.name))
                            }
                            other => other,
                        })?;
                        trace.events.push(Event {
                            tick: t,
                            kind: EventKind::Interact {
                                tail: a,
                                head: b,
                                component: c.name.clone(),
                            },
                        });
                    }
                    if let Some(a) = tail {
                        lanes.insert(tail_out.as_str(), a);
                    }
                    if let Some(b) = head {
                        lanes.insert(head_out.as_str(), b);
                    }
                }
                ComponentKind::Delay { input, ticks, .. } => {
                    if let Some(id) = lanes.remove(input.as_str()) {
                        queues.entry(i).or_default().push_back((t + ticks, id));
                    }
                }
                ComponentKind::Detector { input, basis } => {
                    if let Some(id) = lanes.remove(input.as_str()) {
                        if opts.eager_detection {
                            state.detect(id, *basis)?;
                            trace.events.push(Event {
                                tick: t,
                                kind: EventKind::Detect {
                                    mode: id,
                                    basis: *basis,
                                },
                            });
                        }
                    }
                }
            }
        }
        trace.live_per_tick.push(state.len());
        if (t + 1) % cadence == 0 || t + 1 == opts.ticks {
            trace.snapshots.push(snapshot(&state, t)?);
        }
    }
    Ok(RunOutput { trace, state })
}

fn snapshot<T: Real>(state: &DualState<T>, tick: u32) -> Result<Snapshot> {
    let equivalence_defect = match state.equivalence_defect() {
        None => None,
        Some(r) => Some(r?.as_f64()),
    };
    Ok(Snapshot {
        tick,
        modes: state.len(),
        equivalence_defect,
        physical: state.exact.as_ref().map(|g| g.validate().is_valid()),
    })
}
