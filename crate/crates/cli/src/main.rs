use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cvcluster::circuits::{
    build_lattice_circuit, build_wire_circuit, clip_startup, project_lattice, project_wire, run,
    unfold_cylinder, Circuit, DualState, Engines, RunOptions,
};
use cvcluster::gaussian::NodeId;
use cvcluster::io::{load_graph, output_path, save_graph, write_dot, GraphDocument, Provenance};
use cvcluster::verify::{verify, Suite};

/// Engine-equivalence and clipping tolerance applied to every run.
const EQUIVALENCE_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "cvcluster",
    version,
    about = "Temporal-mode CV cluster-state simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum-wire pipeline.
    Wire(WireArgs),
    /// Square-lattice (sheared cylinder) pipeline.
    Lattice(LatticeArgs),
    /// Run the built-in verification suites.
    Verify(VerifyArgs),
    /// Summarize a saved graph document.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Rules,
    Exact,
    Both,
}

impl From<EngineArg> for Engines {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Rules => Engines::Rules,
            EngineArg::Exact => Engines::Exact,
            EngineArg::Both => Engines::Both,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    ticks: u32,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Remove startup-contaminated nodes before anything else.
    #[arg(long)]
    clip: bool,
    /// Measure out all but one node per macronode.
    #[arg(long)]
    project: bool,
    #[arg(long, value_enum, default_value = "both")]
    engine: EngineArg,
    /// Write the final graph as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final graph as Graphviz.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct WireArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct LatticeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Cylinder circumference M (odd, at least 3).
    #[arg(long)]
    width: u32,
    /// Delete every M-th chain node of the projected cylinder.
    #[arg(long, requires = "project")]
    unfold: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Core,
    Rules,
    Boundary,
    Pipelines,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Core => Suite::Core,
            SuiteArg::Rules => Suite::Rules,
            SuiteArg::Boundary => Suite::Boundary,
            SuiteArg::Pipelines => Suite::Pipelines,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    file: PathBuf,
    /// Histogram of edge weights.
    #[arg(long)]
    weights: bool,
    /// Compare each coefficient with max(d₁, d₂)^(−1/2).
    #[arg(long)]
    degree_check: bool,
}

#[derive(Serialize)]
struct ClipSummary {
    removed: Vec<NodeId>,
    closed_form_defect: Option<f64>,
    route_defect: Option<f64>,
}

#[derive(Serialize)]
struct RunSummary {
    construction: String,
    ticks: u32,
    alpha: f64,
    engine: Engines,
    stages: Vec<String>,
    modes: usize,
    edges: usize,
    max_live: usize,
    snapshots: usize,
    /// Worst engine gap over the run snapshots and every later stage.
    equivalence_defect: Option<f64>,
    physical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_dropped_at: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clip: Option<ClipSummary>,
    passed: bool,
}

fn edge_count(state: &DualState) -> usize {
    if let Some(s) = &state.simplified {
        return s.edges().len();
    }
    let Some(g) = &state.exact else { return 0 };
    let mut count = 0;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if g.entry(i, j).norm() > 0.0 {
                count += 1;
            }
        }
    }
    count
}

fn worst(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn stage_defect(state: &DualState) -> Result<Option<f64>> {
    Ok(state.equivalence_defect().transpose()?)
}

fn run_pipeline(
    circuit: &Circuit,
    args: &RunArgs,
    lattice: Option<(u32, bool)>,
) -> Result<ExitCode> {
    if args.ticks == 0 {
        bail!("--ticks must be at least 1");
    }
    let engine = Engines::from(args.engine);
    let out = run(circuit, &RunOptions::new(args.ticks, engine))?;
    let mut defect = out.trace.worst_equivalence_defect();
    let mut physical = out
        .trace
        .snapshots
        .iter()
        .all(|s| s.physical != Some(false));
    let mut state = out.state;
    let mut stages = Vec::new();
    let mut clip = None;
    if args.clip {
        let c = clip_startup(&state, circuit, args.ticks)?;
        clip = Some(ClipSummary {
            removed: c.removed.clone(),
            closed_form_defect: c.closed_form_defect,
            route_defect: c.route_defect,
        });
        defect = worst(defect, worst(c.closed_form_defect, c.route_defect));
        state = c.state;
        stages.push("clip".to_string());
        defect = worst(defect, stage_defect(&state)?);
    }
    if args.project {
        state = match lattice {
            None => project_wire(&state)?,
            Some(_) => project_lattice(&state)?,
        };
        stages.push("project".to_string());
        defect = worst(defect, stage_defect(&state)?);
    }
    if let Some((m, true)) = lattice {
        state = unfold_cylinder(&state, m)?;
        stages.push("unfold".to_string());
        defect = worst(defect, stage_defect(&state)?);
    }
    if let Some(g) = &state.exact {
        physical &= g.validate().is_valid();
    }

    let mut provenance = Provenance::for_run(&state.layout, args.ticks, engine);
    provenance.stages = stages.clone();
    let summary = RunSummary {
        construction: provenance.construction.clone().unwrap_or_default(),
        ticks: args.ticks,
        alpha: args.alpha,
        engine,
        stages,
        modes: state.len(),
        edges: edge_count(&state),
        max_live: out.trace.max_live,
        snapshots: out.trace.snapshots.len(),
        equivalence_defect: defect,
        physical,
        exact_dropped_at: out.trace.exact_dropped_at,
        clip,
        passed: physical && defect.is_none_or(|d| d < EQUIVALENCE_TOL),
    };
    if args.out.is_some() || args.dot.is_some() {
        let doc = GraphDocument::from_state(&state, provenance)?;
        if let Some(path) = &args.out {
            let path = output_path(path);
            save_graph(&doc, &path).with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(path) = &args.dot {
            let path = output_path(path);
            write_dot(&doc, state.frame, &path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if summary.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn lattice(args: &LatticeArgs) -> Result<ExitCode> {
    if args.width % 2 == 0 {
        bail!("width must be odd (got {})", args.width);
    }
    let circuit = build_lattice_circuit(args.run.alpha, args.width)?;
    run_pipeline(&circuit, &args.run, Some((args.width, args.unfold)))
}

fn verify_cmd(args: &VerifyArgs) -> Result<ExitCode> {
    let report = verify(args.suite.into(), args.seed, args.trials);
    let json = report.to_json();
    if let Some(path) = &args.out {
        let path = output_path(path);
        std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{json}");
    for c in report
        .checks
        .iter()
        .filter(|c| c.status == cvcluster::verify::Status::Fail)
    {
        eprintln!(
            "FAIL {}: defect {:?} > {:e} {}",
            c.name, c.defect, c.tolerance, c.detail
        );
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Coefficient `𝒞` of an edge: stored for rule-engine documents, otherwise read back from
/// the weight in the document's frame.
fn coefficient(doc: &GraphDocument, e: &cvcluster::io::EdgeRecord) -> f64 {
    if let Some(c) = e.coefficient {
        return c;
    }
    let two_a = 2.0 * doc.alpha;
    let w = e.weight.re.hypot(e.weight.im);
    match doc.frame {
        cvcluster::circuits::Frame::Z => w / two_a.sinh(),
        cvcluster::circuits::Frame::ZPrime => w / two_a.tanh(),
    }
}

fn inspect(args: &InspectArgs) -> Result<ExitCode> {
    let doc = load_graph(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let mut degree: BTreeMap<NodeId, usize> = doc.nodes.iter().map(|n| (n.id, 0)).collect();
    for e in &doc.edges {
        *degree.get_mut(&e.a).expect("checked on load") += 1;
        *degree.get_mut(&e.b).expect("checked on load") += 1;
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in degree.values() {
        *hist.entry(*d).or_default() += 1;
    }
    let whites = doc
        .nodes
        .iter()
        .filter(|n| n.color == cvcluster::gaussian::Color::White)
        .count();
    println!("file: {}", args.file.display());
    println!(
        "frame: {}",
        serde_json::to_string(&doc.frame)?.trim_matches('"')
    );
    println!("alpha: {}", doc.alpha);
    if let Some(c) = &doc.provenance.construction {
        let p = &doc.provenance;
        let m = p.m.map(|m| format!(", m {m}")).unwrap_or_default();
        let ticks = p.ticks.map(|t| format!(", {t} ticks")).unwrap_or_default();
        let engine = p
            .engine
            .as_deref()
            .map(|e| format!(", engine {e}"))
            .unwrap_or_default();
        let stages = if p.stages.is_empty() {
            String::new()
        } else {
            format!(", stages {}", p.stages.join("+"))
        };
        println!("provenance: {c}{m}{ticks}{engine}{stages}");
    }
    println!(
        "nodes: {} ({whites} white, {} black)",
        doc.nodes.len(),
        doc.nodes.len() - whites
    );
    println!("edges: {}", doc.edges.len());
    println!(
        "degrees: {}",
        hist.iter()
            .map(|(d, c)| format!("{d}×{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    );

    if args.weights {
        let mut w: BTreeMap<String, usize> = BTreeMap::new();
        for e in &doc.edges {
            *w.entry(format!("{:+.6} {:+.6}i", e.weight.re, e.weight.im))
                .or_default() += 1;
        }
        println!("weights:");
        for (k, c) in w {
            println!("  {k}  ×{c}");
        }
    }
    if args.degree_check {
        let interior = interior_nodes(&doc);
        let mut checked = 0;
        let mut exceptions = Vec::new();
        for e in &doc.edges {
            if !(interior.contains(&e.a) && interior.contains(&e.b)) {
                continue;
            }
            checked += 1;
            let d = degree[&e.a].max(degree[&e.b]) as f64;
            let (c, want) = (coefficient(&doc, e), d.powf(-0.5));
            if (c - want).abs() >= 1e-9 {
                exceptions.push(format!(
                    "  {}-{}: C = {c:.6}, max degree {d} predicts {want:.6}",
                    e.a, e.b
                ));
            }
        }
        println!(
            "degree rule: {checked} interior edges, {} exceptions",
            exceptions.len()
        );
        for line in &exceptions {
            println!("{line}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Nodes away from the open ends of the run, when the document records macronodes and the
/// run length; otherwise every node.
fn interior_nodes(doc: &GraphDocument) -> BTreeSet<NodeId> {
    let width = doc.provenance.m.unwrap_or(1).max(1) as u64;
    doc.nodes
        .iter()
        .filter(|n| match (n.macronode, doc.provenance.ticks) {
            (Some(k), Some(t)) => k >= width && k + width <= t as u64,
            _ => true,
        })
        .map(|n| n.id)
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Wire(a) => build_wire_circuit(a.run.alpha)
            .map_err(anyhow::Error::from)
            .and_then(|c| run_pipeline(&c, &a.run, None)),
        Command::Lattice(a) => lattice(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
