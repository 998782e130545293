//! Post-processing of a run: startup clipping, macronode projection and cylinder unfolding.

use std::collections::BTreeMap;

use super::model::{Circuit, ComponentKind, Construction};
use super::run::{DualState, Frame, RunTrace};
use crate::boundary::{clip, ClipPlan};
use crate::error::{Error, Result};
use crate::gaussian::{fourier_first_partition, fourier_white, NodeId};
use crate::rules::{to_hgraph, BsArrow, SimplifiedGraph};
use crate::scalar::Real;

/// The construction replayed on a ring of `ticks` slots: every delay wraps modulo `ticks`,
/// every beamsplitter fires, and stages run one after another over all slots. Its generator
/// is the self-inverse reference for clipping. `ticks` must be even so colors match the
/// open run.
pub fn periodic_reference<T: Real>(circuit: &Circuit<T>, ticks: u32) -> Result<SimplifiedGraph<T>> {
    if ticks < 2 || ticks % 2 != 0 {
        return Err(Error::Precondition(format!(
            "periodic reference needs an even tick count, got {ticks}"
        )));
    }
    let layout = circuit.layout();
    let mut g = SimplifiedGraph::new(circuit.alpha());
    for t in 0..ticks {
        for (r, rail) in layout.rails.iter().enumerate() {
            g.add_pending(NodeId::new(t, r as u16), rail.squeezing)?;
        }
    }
    let slot = |lane: &str, t: u32| -> NodeId {
        let o = circuit.lane(lane).expect("validated lane");
        let back = o.offset % ticks;
        NodeId::new((t + ticks - back) % ticks, o.rail)
    };
    for &i in circuit.order() {
        let c = &circuit.components()[i];
        if let (
            true,
            ComponentKind::Beamsplitter {
                tail_in, head_in, ..
            },
        ) = (c.enabled, &c.kind)
        {
            for t in 0..ticks {
                g.beamsplit_mut(BsArrow::new(slot(tail_in, t), slot(head_in, t))?)?;
            }
        }
    }
    if !g.pending().is_empty() {
        return Err(Error::InvalidWiring(
            "some sources never meet a partner on the ring".into(),
        ));
    }
    for id in g.ids() {
        g.set_color(id, layout.color(id))?;
    }
    Ok(g)
}

/// Outcome of [`clip_startup`].
#[derive(Clone, Debug)]
pub struct StartupClip<T: Real = f64> {
    pub state: DualState<T>,
    pub removed: Vec<NodeId>,
    /// Conjugation route against the clean closed form, when the exact engine ran.
    pub closed_form_defect: Option<T>,
    /// Conjugation route against q-deletion, when the exact engine ran.
    pub route_defect: Option<T>,
}

/// Removes the black nodes whose links differ from the periodic reference. On the exact engine
/// the clip is also carried out by `P` conjugation of `Z′` and checked against deletion.
pub fn clip_startup<T: Real>(
    state: &DualState<T>,
    circuit: &Circuit<T>,
    ticks: u32,
) -> Result<StartupClip<T>> {
    if state.frame != Frame::Z {
        return Err(Error::Precondition("clip before projecting".into()));
    }
    let simplified = state.simplified.as_ref().ok_or_else(|| {
        Error::Precondition("clipping reads the generator from the rule engine".into())
    })?;
    let reference = periodic_reference(circuit, ticks)?;
    if reference.ids() != simplified.ids() {
        return Err(Error::Precondition(
            "clipping needs every mode of the run (no eager detection)".into(),
        ));
    }
    let (open, order) = to_hgraph(simplified)?;
    let (bar, bar_order) = to_hgraph(&reference)?;
    if order != bar_order {
        return Err(Error::EngineMismatch(
            "run and reference disagree on colors".into(),
        ));
    }
    let plan = ClipPlan::new(
        open.g0().expect("partitioned"),
        bar.g0().expect("partitioned"),
    )?;
    let n1 = plan.first_size();
    let removed: Vec<NodeId> = plan.removed_rows.iter().map(|&r| order[n1 + r]).collect();

    let (mut closed_form_defect, mut route_defect) = (None, None);
    if let Some(exact) = &state.exact {
        let index: BTreeMap<NodeId, usize> = exact
            .labels()
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let perm: Vec<usize> = order.iter().map(|id| index[id]).collect();
        let zprime = fourier_first_partition(&exact.permuted(&perm)?, n1)?;
        let clipped = clip(&zprime, &plan, state.alpha)?;
        closed_form_defect = Some(clipped.closed_form_defect);
        route_defect = Some(clipped.route_defect);
    }

    let mut out = state.clone();
    out.delete(&removed)?;
    out.clean = true;
    Ok(StartupClip {
        state: out,
        removed,
        closed_form_defect,
        route_defect,
    })
}

fn to_zprime<T: Real>(state: &DualState<T>) -> Result<DualState<T>> {
    let mut out = state.clone();
    if out.frame == Frame::Z {
        if let Some(g) = &out.exact {
            out.exact = Some(fourier_white(g)?);
        }
        out.frame = Frame::ZPrime;
    }
    Ok(out)
}

fn project_keeping_rail<T: Real>(state: &DualState<T>, keep: u16) -> Result<DualState<T>> {
    let mut out = to_zprime(state)?;
    let measured: Vec<NodeId> = out.ids().into_iter().filter(|id| id.rail != keep).collect();
    out.delete(&measured)?;
    Ok(out)
}

/// Measures the S₂ node of every wire macronode (in the `Z′` frame, i.e. q for black and
/// q after a Fourier transform for white), leaving the S₁ chain.
pub fn project_wire<T: Real>(state: &DualState<T>) -> Result<DualState<T>> {
    if state.layout.construction != Construction::Wire {
        return Err(Error::Precondition(
            "project_wire needs a wire state".into(),
        ));
    }
    project_keeping_rail(state, 0)
}

/// Measures three of the four micronodes of every lattice macronode, leaving the S₁ nodes.
pub fn project_lattice<T: Real>(state: &DualState<T>) -> Result<DualState<T>> {
    if !matches!(state.layout.construction, Construction::Lattice { .. }) {
        return Err(Error::Precondition(
            "project_lattice needs a lattice state".into(),
        ));
    }
    project_keeping_rail(state, 0)
}

/// Deletes every node whose macronode index is a multiple of `m`, cutting the sheared
/// cylinder open into a planar grid of height `m − 1`.
pub fn unfold_cylinder<T: Real>(state: &DualState<T>, m: u32) -> Result<DualState<T>> {
    if state.frame != Frame::ZPrime {
        return Err(Error::Precondition("unfold a projected state".into()));
    }
    if state.layout.construction != (Construction::Lattice { m }) {
        return Err(Error::Precondition(format!(
            "state is not a width-{m} lattice"
        )));
    }
    let mut out = state.clone();
    let cut: Vec<NodeId> = out
        .ids()
        .into_iter()
        .filter(|&id| out.layout.macronode(id) % m as u64 == 0)
        .collect();
    out.delete(&cut)?;
    Ok(out)
}

/// Largest number of simultaneously live modes during the run.
pub fn live_mode_bound(trace: &RunTrace) -> usize {
    trace.max_live
}
