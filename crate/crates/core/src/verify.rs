//! Self-checks behind `cvcluster verify`: each check reports a defect against a tolerance.
//! Randomized checks draw from a ChaCha stream seeded by the run seed and the check name,
//! so a check gives the same numbers whether it runs alone or inside `all`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{cluster_form, deviation_support, graph_distances};
use crate::circuits::{
    build_lattice_circuit, build_wire_circuit, clip_startup, project_lattice, project_wire, run,
    unfold_cylinder, Construction, DetectorBasis, DualState, Engines, Layout, Rail, RunOptions,
};
use crate::error::{Error, Result};
use crate::gaussian::linalg::max_abs_c;
use crate::gaussian::{
    apply_local, apply_symplectic, bipartite_form_state, cluster_closed_form, condition_on_q,
    covariance_from_history, fourier_first_partition, graph_from_covariance, hgraph_state,
    measure_q, nullifier_residual, selfinverse_hgraph_state, vacuum_graph, HGraph, NodeId,
    SymplecticOp,
};
use crate::rules::{degree_rule_check, SimplifiedGraph, Squeezing};
use crate::samples::{hadamard_design, random_history, random_local_op, selfinverse_block};

pub const ALPHAS: [f64; 4] = [0.1, 0.5, 1.2, 3.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Rules,
    Boundary,
    Pipelines,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub suite: Suite,
    pub status: Status,
    /// `None` when the check could not be evaluated; `detail` then holds the error.
    pub defect: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub suite: Suite,
    pub seed: u64,
    pub trials: u32,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }
}

/// Defect, tolerance and a short note. A check passes when `defect ≤ tolerance`.
struct Outcome {
    defect: f64,
    tolerance: f64,
    detail: String,
}

impl Outcome {
    fn new(defect: f64, tolerance: f64) -> Self {
        Self {
            defect,
            tolerance,
            detail: String::new(),
        }
    }

    fn note(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

type Check = fn(&mut ChaCha8Rng, u32) -> Result<Outcome>;

const CHECKS: &[(&str, Suite, Check)] = &[
    ("exponential-identity", Suite::Core, exponential_identity),
    ("fourier-selfinverse", Suite::Core, fourier_selfinverse),
    ("fourier-defective", Suite::Core, fourier_defective),
    (
        "symplectic-composition",
        Suite::Core,
        symplectic_composition,
    ),
    ("covariance-graph", Suite::Core, covariance_graph),
    ("nullifier-residual", Suite::Core, nullifier),
    ("conditioning", Suite::Core, conditioning),
    (
        "rule-exact-equivalence",
        Suite::Rules,
        rule_exact_equivalence,
    ),
    ("degree-law-wire", Suite::Rules, degree_law_wire),
    ("clip-wire", Suite::Boundary, clip_wire),
    ("clip-lattice", Suite::Boundary, clip_lattice),
    (
        "contamination-locality",
        Suite::Boundary,
        contamination_locality,
    ),
    (
        "pipeline-equivalence",
        Suite::Pipelines,
        pipeline_equivalence,
    ),
    ("wire-targets", Suite::Pipelines, wire_targets),
    ("lattice-targets", Suite::Pipelines, lattice_targets),
    ("oddness-bipartite", Suite::Pipelines, oddness),
    ("bounded-memory", Suite::Pipelines, bounded_memory),
];

fn check_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name, mixed with the run seed.
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs every check of `suite`. `trials` sets the number of random instances per
/// randomized check.
pub fn verify(suite: Suite, seed: u64, trials: u32) -> VerificationReport {
    let trials = trials.max(1);
    let mut checks = Vec::new();
    for &(name, s, f) in CHECKS {
        if !suite.includes(s) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(check_seed(seed, name));
        let (status, defect, tolerance, detail) = match f(&mut rng, trials) {
            Ok(o) => {
                let ok = o.defect <= o.tolerance;
                (
                    if ok { Status::Pass } else { Status::Fail },
                    Some(o.defect),
                    o.tolerance,
                    o.detail,
                )
            }
            Err(e) => (Status::Fail, None, 0.0, e.to_string()),
        };
        checks.push(CheckResult {
            name: name.into(),
            suite: s,
            status,
            defect,
            tolerance,
            detail,
        });
    }
    VerificationReport {
        version: env!("CARGO_PKG_VERSION").into(),
        suite,
        seed,
        trials,
        passed: checks.iter().all(|c| c.status == Status::Pass),
        checks,
    }
}

fn random_selfinverse(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n1 = rng.random_range(1..=12);
    selfinverse_block(rng, n1, 3)
}

fn exponential_identity(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let h = HGraph::bipartite(&random_selfinverse(rng));
        for alpha in ALPHAS {
            let a = hgraph_state(&h, alpha)?;
            let b = selfinverse_hgraph_state(&h, alpha)?;
            worst = worst.max(max_abs_c(&(a.z() - b.z())));
        }
    }
    Ok(Outcome::new(worst, 1e-10))
}

fn fourier_selfinverse(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let g0 = random_selfinverse(rng);
        let h = HGraph::bipartite(&g0);
        for alpha in ALPHAS {
            let zp = fourier_first_partition(&selfinverse_hgraph_state(&h, alpha)?, g0.ncols())?;
            let clean = cluster_form(h.matrix(), alpha);
            worst = worst.max(max_abs_c(&(zp.z() - &clean)));
            worst = worst.max(max_abs_c(&(cluster_closed_form(&g0, alpha) - &clean)));
        }
    }
    Ok(Outcome::new(worst, 1e-10))
}

fn fourier_defective(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut g0 = random_selfinverse(rng);
        let rows = g0.nrows();
        for _ in 0..rng.random_range(1..=rows.min(3)) {
            let r = rng.random_range(0..rows);
            let factor = rng.random_range(0.0..0.9);
            g0.row_mut(r).scale_mut(factor);
        }
        let h = HGraph::bipartite(&g0);
        for alpha in ALPHAS {
            let zp = fourier_first_partition(&bipartite_form_state(&h, alpha)?, g0.ncols())?;
            worst = worst.max(max_abs_c(&(zp.z() - cluster_closed_form(&g0, alpha))));
        }
    }
    Ok(Outcome::new(worst, 1e-10))
}

fn random_state(
    rng: &mut ChaCha8Rng,
    n: usize,
    len: usize,
) -> Result<crate::gaussian::ExactGraph<f64>> {
    random_history(rng, n, len)
        .iter()
        .try_fold(vacuum_graph(n)?, |g, op| apply_local(&g, op))
}

fn symplectic_composition(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(1..=6);
        let g = random_state(rng, n, 6)?;
        let s1 = random_local_op::<f64, _>(rng, n).embed(n)?;
        let s2 = random_local_op::<f64, _>(rng, n).embed(n)?;
        let stepwise = apply_symplectic(&apply_symplectic(&g, &s1)?, &s2)?;
        let composed = apply_symplectic(&g, &s1.then(&s2)?)?;
        worst = worst.max(max_abs_c(&(stepwise.z() - composed.z())));
    }
    Ok(Outcome::new(worst, 1e-9))
}

/// Random history replayed on both descriptions: the graph chain and the covariance.
fn oracle_pair(
    rng: &mut ChaCha8Rng,
) -> Result<(
    crate::gaussian::ExactGraph<f64>,
    crate::gaussian::CovarianceState<f64>,
)> {
    let n = rng.random_range(1..=8);
    let len = rng.random_range(1..=20);
    let ops: Vec<SymplecticOp<f64>> = random_history(rng, n, len)
        .iter()
        .map(|op| op.embed(n))
        .collect::<Result<_>>()?;
    let chain = ops
        .iter()
        .try_fold(vacuum_graph(n)?, |g, s| apply_symplectic(&g, s))?;
    Ok((chain, covariance_from_history(n, &ops)?))
}

fn covariance_graph(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (chain, cov) = oracle_pair(rng)?;
        worst = worst.max(max_abs_c(&(graph_from_covariance(&cov)?.z() - chain.z())));
    }
    Ok(Outcome::new(worst, 1e-9))
}

fn nullifier(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (chain, cov) = oracle_pair(rng)?;
        worst = worst.max(nullifier_residual(&chain, &cov)?);
    }
    Ok(Outcome::new(worst, 1e-10))
}

fn conditioning(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < trials {
        let (chain, cov) = oracle_pair(rng)?;
        if chain.n() < 2 {
            continue;
        }
        let k = rng.random_range(0..chain.n());
        let via_cov = graph_from_covariance(&condition_on_q(&cov, k)?)?;
        worst = worst.max(max_abs_c(&(via_cov.z() - measure_q(&chain, k)?.z())));
        done += 1;
    }
    Ok(Outcome::new(worst, 1e-9))
}

fn single_rail_layout() -> Layout {
    Layout {
        construction: Construction::Custom,
        rails: vec![Rail {
            source: "S".into(),
            squeezing: Squeezing::Q,
            path_delay: 0,
        }],
    }
}

/// Random emit / beamsplit / measure sequence on both engines, up to `max_live` modes.
/// Beamsplits the rule engine rejects are skipped. Returns the worst snapshot defect and the
/// number of applied events.
pub fn random_rule_sequence<R: Rng>(
    rng: &mut R,
    alpha: f64,
    max_live: usize,
    len: usize,
) -> Result<(f64, usize)> {
    let mut state = DualState::new(alpha, Engines::Both, single_rail_layout());
    let mut next = 0u32;
    let mut worst: f64 = 0.0;
    let mut applied = 0;
    for _ in 0..len {
        let ids = state.ids();
        let roll: f64 = rng.random();
        if ids.len() < 2 || (ids.len() < max_live && roll < 0.35) {
            let sq = if rng.random_bool(0.5) {
                Squeezing::Q
            } else {
                Squeezing::P
            };
            state.emit(NodeId::seq(next as usize), sq, true)?;
            next += 1;
        } else if roll < 0.85 {
            let a = ids[rng.random_range(0..ids.len())];
            let b = ids[rng.random_range(0..ids.len())];
            if a == b {
                continue;
            }
            let mut trial = state.simplified.clone().expect("rule engine live");
            if trial
                .beamsplit_mut(crate::rules::BsArrow::new(a, b)?)
                .is_err()
            {
                continue;
            }
            state.interact(a, b)?;
        } else {
            let a = ids[rng.random_range(0..ids.len())];
            state.detect(a, DetectorBasis::Q)?;
        }
        applied += 1;
        if let Some(d) = state.equivalence_defect() {
            worst = worst.max(d?);
        }
    }
    Ok((worst, applied))
}

fn rule_exact_equivalence(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut events = 0;
    for _ in 0..trials * 4 {
        let alpha = rng.random_range(0.2..1.5);
        let (w, n) = random_rule_sequence(rng, alpha, 10, 40)?;
        worst = worst.max(w);
        events += n;
    }
    Ok(Outcome::new(worst, 1e-9).note(format!("{} sequences, {events} events", trials * 4)))
}

fn interior_ids(g: &SimplifiedGraph<f64>, layout: &Layout, ticks: u32) -> BTreeSet<NodeId> {
    g.ids()
        .into_iter()
        .filter(|&id| layout.is_interior(id, ticks))
        .collect()
}

fn degree_law_wire(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let wire = build_wire_circuit(1.0)?;
    let out = run(&wire, &RunOptions::new(20, Engines::Rules))?;
    let g = out.state.simplified.as_ref().expect("rule engine");
    let report = degree_rule_check(g, &interior_ids(g, wire.layout(), 20));
    Ok(Outcome::new(report.exceptions.len() as f64, 0.0)
        .note(format!("{} interior edges", report.checked)))
}

fn clip_defect(lattice: Option<u32>, ticks: u32) -> Result<Outcome> {
    let circuit = match lattice {
        None => build_wire_circuit(1.0)?,
        Some(m) => build_lattice_circuit(1.0, m)?,
    };
    let out = run(&circuit, &RunOptions::new(ticks, Engines::Both))?;
    let c = clip_startup(&out.state, &circuit, ticks)?;
    let worst = c
        .closed_form_defect
        .unwrap_or(f64::INFINITY)
        .max(c.route_defect.unwrap_or(f64::INFINITY));
    Ok(Outcome::new(worst, 1e-10).note(format!("{} nodes removed", c.removed.len())))
}

fn clip_wire(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    clip_defect(None, 20)
}

fn clip_lattice(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    clip_defect(Some(3), 30)
}

/// Count of deviation entries (of the lower block of the phase-shifted closed form from the
/// clean form) lying beyond graph distance 2 from a single damaged row, plus any numeric
/// deviation outside the exact support.
pub fn locality_violations(
    g0_bar: &DMatrix<f64>,
    row: usize,
    factor: f64,
    alpha: f64,
) -> (usize, f64) {
    let mut g0 = g0_bar.clone();
    g0.row_mut(row).scale_mut(factor);
    let n1 = g0.ncols();
    let h = HGraph::bipartite(&g0);
    let dist = graph_distances(h.matrix(), &[n1 + row]);
    let support = deviation_support(&g0);
    let far = support
        .iter()
        .filter(|&&(i, j)| {
            !(dist[n1 + i].is_some_and(|d| d <= 2) && dist[n1 + j].is_some_and(|d| d <= 2))
        })
        .count();
    let dev = cluster_closed_form(&g0, alpha) - cluster_form(h.matrix(), alpha);
    let mut outside: f64 = 0.0;
    for i in 0..dev.nrows() {
        for j in 0..dev.ncols() {
            let inside = i >= n1 && j >= n1 && support.contains(&(i - n1, j - n1));
            if !inside {
                outside = outside.max(dev[(i, j)].norm());
            }
        }
    }
    (far, outside)
}

fn contamination_locality(rng: &mut ChaCha8Rng, trials: u32) -> Result<Outcome> {
    let mut far = 0;
    let mut outside: f64 = 0.0;
    for _ in 0..trials {
        let n1 = 4 * rng.random_range(1..=4);
        let levels = if rng.random_bool(0.5) { 0 } else { 2 };
        let bar = hadamard_design(rng, n1, levels);
        let row = rng.random_range(0..n1);
        let factor = [0.0, 0.25, 0.5][rng.random_range(0..3)];
        let (f, o) = locality_violations(&bar, row, factor, 1.0);
        far += f;
        outside = outside.max(o);
    }
    if outside > 1e-12 {
        return Err(Error::EngineMismatch(format!(
            "deviation of {outside:e} outside the exact support"
        )));
    }
    Ok(Outcome::new(far as f64, 0.0))
}

fn pipeline_equivalence(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let wire = build_wire_circuit(1.0)?;
    let out = run(&wire, &RunOptions::new(20, Engines::Both))?;
    worst = worst.max(
        out.trace
            .worst_equivalence_defect()
            .unwrap_or(f64::INFINITY),
    );
    let clipped = clip_startup(&out.state, &wire, 20)?;
    worst = worst.max(
        project_wire(&clipped.state)?
            .equivalence_defect()
            .unwrap_or(Ok(f64::INFINITY))?,
    );
    let lattice = build_lattice_circuit(1.0, 3)?;
    let out = run(&lattice, &RunOptions::new(30, Engines::Both))?;
    worst = worst.max(
        out.trace
            .worst_equivalence_defect()
            .unwrap_or(f64::INFINITY),
    );
    let clipped = clip_startup(&out.state, &lattice, 30)?;
    let projected = project_lattice(&clipped.state)?;
    worst = worst.max(
        projected
            .equivalence_defect()
            .unwrap_or(Ok(f64::INFINITY))?,
    );
    let unfolded = unfold_cylinder(&projected, 3)?;
    worst = worst.max(unfolded.equivalence_defect().unwrap_or(Ok(f64::INFINITY))?);
    Ok(Outcome::new(worst, 1e-9))
}

/// Largest gap between interior rule-engine coefficients and `target`, and between the
/// matching exact-engine `Z` entries and `target·sinh2α`.
fn interior_weight_gap(state: &DualState<f64>, ticks: u32, target: f64) -> Result<f64> {
    let g = state.simplified.as_ref().expect("rule engine");
    let exact = state.exact_sorted().ok_or(Error::EmptyState)??;
    let interior = interior_ids(g, &state.layout, ticks);
    let sh = (2.0 * state.alpha).sinh();
    let mut worst: f64 = 0.0;
    for (&(a, b), e) in g.edges() {
        if interior.contains(&a) && interior.contains(&b) {
            worst = worst.max((e.magnitude.value() - target).abs());
            let z = exact.entry(exact.index_of(a)?, exact.index_of(b)?);
            worst = worst.max((z.norm() - target * sh).abs());
        }
    }
    Ok(worst)
}

fn wire_targets(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let wire = build_wire_circuit(1.0)?;
    let out = run(&wire, &RunOptions::new(20, Engines::Both))?;
    let mut worst = interior_weight_gap(&out.state, 20, 0.5)?;
    let projected = project_wire(&clip_startup(&out.state, &wire, 20)?.state)?;
    let (miss, w) = chain_mismatch(&projected, &[1], 0.5)?;
    worst = worst.max(w).max(miss as f64);
    Ok(Outcome::new(worst, 1e-12))
}

/// Compares a projected state with the chain graph linking macronodes `distances` apart,
/// induced on the nodes present. Returns the number of edges in one graph but not the other,
/// and the largest gap of a rule-engine or exact `Z′` weight from `±coefficient·tanh2α`.
pub fn chain_mismatch(
    state: &DualState<f64>,
    distances: &[u64],
    coefficient: f64,
) -> Result<(usize, f64)> {
    let g = state.simplified.as_ref().ok_or(Error::EmptyState)?;
    let chain: BTreeSet<u64> = g
        .ids()
        .iter()
        .map(|&id| state.layout.macronode(id))
        .collect();
    let mut want = BTreeSet::new();
    for &k in &chain {
        for &d in distances {
            if chain.contains(&(k + d)) {
                want.insert((k, k + d));
            }
        }
    }
    let th = (2.0 * state.alpha).tanh();
    let target = coefficient * th;
    let exact = state.exact_sorted().transpose()?;
    let mut have = BTreeSet::new();
    let mut worst: f64 = 0.0;
    for (&(a, b), e) in g.edges() {
        let (x, y) = (state.layout.macronode(a), state.layout.macronode(b));
        have.insert((x.min(y), x.max(y)));
        worst = worst.max((e.magnitude.value() * th - target).abs());
        if let Some(z) = &exact {
            worst = worst.max((z.entry(z.index_of(a)?, z.index_of(b)?).norm() - target).abs());
        }
    }
    Ok((want.symmetric_difference(&have).count(), worst))
}

fn lattice_targets(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let m = 3;
    let lattice = build_lattice_circuit(1.0, m)?;
    let out = run(&lattice, &RunOptions::new(30, Engines::Both))?;
    let mut worst = interior_weight_gap(&out.state, 30, 0.25)?;
    let projected = project_lattice(&clip_startup(&out.state, &lattice, 30)?.state)?;
    let (miss, w) = chain_mismatch(&projected, &[1, m as u64], 0.25)?;
    worst = worst.max(w).max(miss as f64);
    let unfolded = unfold_cylinder(&projected, m)?;
    let (miss, w) = chain_mismatch(&unfolded, &[1, m as u64], 0.25)?;
    worst = worst.max(w).max(miss as f64);
    let rows: BTreeSet<u64> = unfolded
        .ids()
        .iter()
        .map(|&id| unfolded.layout.macronode(id) % m as u64)
        .collect();
    if rows.len() != m as usize - 1 {
        return Err(Error::EngineMismatch(format!(
            "unfolded grid has {} rows",
            rows.len()
        )));
    }
    Ok(Outcome::new(worst, 1e-12))
}

fn oddness(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let mut bad = 0;
    for m in [2, 4, 6] {
        if build_lattice_circuit(1.0, m).is_ok() {
            bad += 1;
        }
    }
    for m in [3, 5, 7] {
        let c = build_lattice_circuit(1.0, m)?;
        let out = run(&c, &RunOptions::new(4 * m + 6, Engines::Rules))?;
        bad += out
            .state
            .simplified
            .as_ref()
            .expect("rule engine")
            .bipartite_violations()
            .len();
    }
    Ok(Outcome::new(bad as f64, 0.0))
}

fn bounded_memory(_: &mut ChaCha8Rng, _: u32) -> Result<Outcome> {
    let mut excess: i64 = i64::MIN;
    let mut seen = Vec::new();
    for ticks in [30, 300] {
        let wire = build_wire_circuit(1.0)?;
        let w = run(&wire, &RunOptions::new(ticks, Engines::Rules).eager(true))?
            .trace
            .max_live;
        excess = excess.max(w as i64 - 6);
        let m = 3;
        let lattice = build_lattice_circuit(1.0, m)?;
        let l = run(
            &lattice,
            &RunOptions::new(ticks, Engines::Rules).eager(true),
        )?
        .trace
        .max_live;
        excess = excess.max(l as i64 - (4 * m as i64 + 8));
        seen.push(format!("{ticks} ticks: wire {w}, lattice {l}"));
    }
    Ok(Outcome::new(excess.max(0) as f64, 0.0).note(seen.join("; ")))
}
