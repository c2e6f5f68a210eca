//! Command-line front end for the local-invertibility decision pipeline.
//!
//! Subcommands: `check` (full pipeline, JSON verdict), `graph` (coupling
//! graph criteria), `order` (quantum orders and z-rotation solvers),
//! `cartan` (involution membership table), `corpus` (built-in example
//! membership table), `trace` (flow trajectory CSV export).
//!
//! Exit codes: 0 = type1, 2 = type2, 3 = self_inverse,
//! 4 = certified_not_type1, 5 = no_witness_found, 1 = usage or parse error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use locinv::algebraic::{
    self, BipartiteMechanism, BipartiteVerdict, Involution, Membership,
};
use locinv::flows::{self, Classification, Decision, FlowConfig, FlowVerdict, Witness};
use locinv::pauli::{self, CouplingGraph, HamiltonianSpec};
use locinv::typeii;
use locinv::{OperatorMatrix, WeylIndex};

#[derive(Parser)]
#[command(name = "locinv", about = "Decide local invertibility of multi-qubit interaction evolutions", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct HamiltonianArgs {
    /// Hamiltonian expression, e.g. "zz+z1+1x" or "xxx + 2 yyy + 3 zzz"
    #[arg(long = "h")]
    hamiltonian: Option<String>,
    /// Read the Hamiltonian expression from a file instead
    #[arg(long)]
    file: Option<String>,
    /// Qubit count
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Clone)]
struct FlowArgs {
    /// RNG seed; fixes all stochastic output
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multistart restarts
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Iteration cap per restart
    #[arg(long = "max-iter", default_value_t = 5000)]
    max_iter: usize,
    /// Convergence tolerance on the overlap gap
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl FlowArgs {
    fn config(&self) -> FlowConfig {
        FlowConfig {
            max_iters: self.max_iter,
            convergence_tol: self.tol,
            restarts: self.restarts,
            rng_seed: self.seed,
            ..FlowConfig::default()
        }
    }
}

#[derive(Args, Clone)]
struct TauArgs {
    /// Inversion time τ in radians
    #[arg(long)]
    tau: Option<f64>,
    /// τ as a fraction of π, e.g. "1/4" for π/4
    #[arg(long = "tau-pi-frac")]
    tau_pi_frac: Option<String>,
}

impl TauArgs {
    fn resolve(&self) -> Result<Option<f64>, String> {
        match (&self.tau, &self.tau_pi_frac) {
            (Some(_), Some(_)) => Err("--tau and --tau-pi-frac are mutually exclusive".into()),
            (Some(t), None) => Ok(Some(*t)),
            (None, Some(frac)) => {
                let parts: Vec<&str> = frac.split('/').collect();
                let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| e.to_string());
                match parts.as_slice() {
                    [p] => Ok(Some(PI * parse(p)?)),
                    [p, q] => {
                        let q = parse(q)?;
                        if q == 0.0 {
                            return Err("zero denominator in --tau-pi-frac".into());
                        }
                        Ok(Some(PI * parse(p)? / q))
                    }
                    _ => Err(format!("cannot parse '{}' as p/q", frac)),
                }
            }
            (None, None) => Ok(None),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full decision pipeline on a Hamiltonian
    Check {
        #[command(flatten)]
        ham: HamiltonianArgs,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        flow: FlowArgs,
        /// Write the flow trace CSV here
        #[arg(long)]
        trace: Option<String>,
    },
    /// Decide a coupling-graph Hamiltonian via the two-coloring criteria
    Graph {
        /// Graph file: lines "k l kind J", kind in zz|xx|xy:<κ>|xmx
        #[arg(long)]
        file: String,
        /// Cross-check the verdict with the type-I flow
        #[arg(long)]
        flow: bool,
        #[command(flatten)]
        flow_args: FlowArgs,
    },
    /// Quantum orders: Weyl element E_ij or order rows of a Hamiltonian
    Order {
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[command(flatten)]
        ham: HamiltonianArgs,
        #[arg(long)]
        json: bool,
    },
    /// Membership under the four Cartan-like involutions plus the type-I verdict
    Cartan {
        #[command(flatten)]
        ham: HamiltonianArgs,
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in interaction corpus through the simple criteria
    Corpus {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run a flow and export its trajectory as CSV
    Trace {
        #[command(flatten)]
        ham: HamiltonianArgs,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        flow: FlowArgs,
        /// Output CSV path
        #[arg(long)]
        out: String,
    },
}

// ---------------------------------------------------------------------------
// JSON verdict schema

#[derive(Serialize)]
struct FactorJson {
    qubit: usize,
    axis: [f64; 3],
    angle: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum WitnessJson {
    Single(Vec<FactorJson>),
    Pair { k1: Vec<FactorJson>, k2: Vec<FactorJson> },
}

#[derive(Serialize)]
struct VerdictJson {
    schema: u32,
    classification: String,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coloring: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    odd_cycle: Option<Vec<usize>>,
}

fn factors_json(k: &flows::LocalUnitary) -> Vec<FactorJson> {
    k.to_axis_angles()
        .into_iter()
        .enumerate()
        .map(|(qubit, (axis, angle))| FactorJson { qubit: qubit + 1, axis, angle })
        .collect()
}

fn witness_json(w: &Witness) -> WitnessJson {
    match w {
        Witness::Single(k) => WitnessJson::Single(factors_json(k)),
        Witness::Pair { k1, k2 } => {
            WitnessJson::Pair { k1: factors_json(k1), k2: factors_json(k2) }
        }
    }
}

fn exit_code_for(c: Classification) -> u8 {
    match c {
        Classification::Type1 => 0,
        Classification::Type2 => 2,
        Classification::SelfInverse => 3,
        Classification::CertifiedNotType1 => 4,
        Classification::NoWitnessFound => 5,
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(1)
}

fn load_hamiltonian(args: &HamiltonianArgs) -> Result<HamiltonianSpec, String> {
    let text = match (&args.hamiltonian, &args.file) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| e.to_string())?,
        _ => return Err("provide exactly one of --h or --file".into()),
    };
    let n = args.n.ok_or("missing --n")?;
    pauli::parse_hamiltonian(text.trim(), n).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage errors share exit code 1 with parse errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Check { ham, tau, flow, trace } => cmd_check(ham, tau, flow, trace),
        Command::Graph { file, flow, flow_args } => cmd_graph(file, flow, flow_args),
        Command::Order { i, j, ham, json } => cmd_order(i, j, ham, json),
        Command::Cartan { ham, flow, json } => cmd_cartan(ham, flow, json),
        Command::Corpus { flow, json } => cmd_corpus(flow, json),
        Command::Trace { ham, tau, flow, out } => cmd_trace(ham, tau, flow, out),
    }
}

// ---------------------------------------------------------------------------
// check

fn decision_to_json(d: &Decision) -> VerdictJson {
    VerdictJson {
        schema: 1,
        classification: d.classification.label().to_string(),
        method: d.method.clone(),
        witness: d.witness.as_ref().map(witness_json),
        best_overlap: d.best_overlap,
        residual: d.residual,
        diagnostics: d.diagnostics.clone(),
        coloring: None,
        odd_cycle: None,
    }
}

fn cmd_check(ham: HamiltonianArgs, tau: TauArgs, flow: FlowArgs, trace: Option<String>) -> ExitCode {
    let spec = match load_hamiltonian(&ham) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let tau = match tau.resolve() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let cfg = flow.config();
    let decision = match flows::decide(&spec, tau, &cfg) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    if let Some(path) = trace {
        if let Some(f) = &decision.flow {
            if let Err(e) = std::fs::write(&path, f.trace_csv()) {
                return fail(e);
            }
        } else {
            eprintln!("note: verdict was purely algebraic; no flow trace written");
        }
    }
    let json = decision_to_json(&decision);
    println!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
    ExitCode::from(exit_code_for(decision.classification))
}

// ---------------------------------------------------------------------------
// graph

fn cmd_graph(file: String, cross_check: bool, flow_args: FlowArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let graph = match CouplingGraph::parse(&text) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let spec = pauli::graph_to_hamiltonian(&graph);
    let hm = pauli::build_matrix(&spec);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("vertices".into(), graph.n as f64);
    diagnostics.insert("edges".into(), graph.edges.len() as f64);

    let verdict = match algebraic::bipartite_invertibility(&graph) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };

    let (classification, method, witness, residual, coloring, odd_cycle) = match &verdict {
        BipartiteVerdict::Invertible { witness, mechanism, residual } => {
            let (method, coloring) = match mechanism {
                BipartiteMechanism::Coloring(c) => ("bipartite_coloring", Some(c.clone())),
                BipartiteMechanism::JointHalfPi => ("joint_z_half_pi", None),
            };
            (
                Classification::Type1,
                method.to_string(),
                Some(Witness::Single(witness.clone())),
                Some(*residual),
                coloring,
                None,
            )
        }
        BipartiteVerdict::NotInvertible { odd_cycle } => (
            Classification::CertifiedNotType1,
            "bipartite_odd_cycle".to_string(),
            None,
            None,
            None,
            Some(odd_cycle.clone()),
        ),
    };

    if cross_check {
        let flow = match flows::type1_flow(&hm, &flow_args.config()) {
            Ok(f) => f,
            Err(e) => return fail(e),
        };
        diagnostics.insert("flow_best_overlap".into(), flow.best_overlap);
        let agree = matches!(
            (&verdict, flow.verdict),
            (BipartiteVerdict::Invertible { .. }, FlowVerdict::WitnessFound)
                | (BipartiteVerdict::NotInvertible { .. }, FlowVerdict::NoWitnessFound)
        );
        diagnostics.insert("flow_agrees".into(), if agree { 1.0 } else { 0.0 });
    }

    let json = VerdictJson {
        schema: 1,
        classification: classification.label().to_string(),
        method,
        witness: witness.as_ref().map(witness_json),
        best_overlap: None,
        residual,
        diagnostics,
        coloring,
        odd_cycle,
    };
    println!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
    ExitCode::from(exit_code_for(classification))
}

// ---------------------------------------------------------------------------
// order

#[derive(Serialize)]
struct WeylOrderJson {
    schema: u32,
    i: usize,
    j: usize,
    n: usize,
    order: i64,
    joint_z_invertible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced_angle: Option<f64>,
    individually_z_invertible: bool,
}

#[derive(Serialize)]
struct OrderRowsJson {
    schema: u32,
    rows: Vec<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    individual_angles: Option<Vec<f64>>,
}

fn cmd_order(i: Option<usize>, j: Option<usize>, ham: HamiltonianArgs, json: bool) -> ExitCode {
    match (i, j) {
        (Some(i), Some(j)) => {
            let n = match ham.n {
                Some(n) => n,
                None => return fail("missing --n"),
            };
            let idx = match WeylIndex::new(i, j, n) {
                Ok(x) => x,
                Err(e) => return fail(e),
            };
            let p = match algebraic::weyl_order(&idx) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let joint = algebraic::weyl_joint_z_angle(p);
            let reduced = algebraic::reduced_joint_z_angle(p);
            if json {
                let out = WeylOrderJson {
                    schema: 1,
                    i,
                    j,
                    n,
                    order: p,
                    joint_z_invertible: p != 0,
                    joint_angle: joint,
                    reduced_angle: reduced,
                    individually_z_invertible: true,
                };
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            } else {
                println!("E_{{{},{}}} at n = {}: quantum order p = {}", i, j, n, p);
                match joint {
                    Some(phi) => println!(
                        "joint-z sign-invertible: phi = pi/{} = {:.17} (reduced: {:.17})",
                        p.unsigned_abs(),
                        phi,
                        reduced.unwrap()
                    ),
                    None => println!("not joint-z invertible; individually z-invertible"),
                }
            }
            ExitCode::SUCCESS
        }
        (None, None) => {
            let spec = match load_hamiltonian(&ham) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let rows = algebraic::pauli_order_rows(&spec);
            let joint = match algebraic::joint_z_inversion(&spec) {
                Ok(j) => j,
                Err(e) => return fail(e),
            };
            let individual = match algebraic::individual_z_inversion(&spec) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            if json {
                let out = OrderRowsJson {
                    schema: 1,
                    rows: rows.iter().map(|r| r.orders.clone()).collect(),
                    joint_angle: joint,
                    individual_angles: individual.as_ref().map(|s| s.angles.clone()),
                };
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            } else {
                println!("order rows (per-qubit p):");
                for r in &rows {
                    println!(
                        "  {:?}  amplitude {:+.4}{:+.4}i",
                        r.orders, r.amplitude.re, r.amplitude.im
                    );
                }
                match joint {
                    Some(phi) => println!("joint z solution: phi = {:.17}", phi),
                    None => println!("no joint z solution"),
                }
                match &individual {
                    Some(sol) => println!("individual z solution: {:?}", sol.angles),
                    None => println!("no individual z solution"),
                }
            }
            ExitCode::SUCCESS
        }
        _ => fail("provide both --i and --j, or neither"),
    }
}

// ---------------------------------------------------------------------------
// cartan

#[derive(Serialize)]
struct CartanJson {
    schema: u32,
    hamiltonian: String,
    cc: String,
    ai: String,
    aii: String,
    aiii: String,
    type1: String,
}

fn cartan_row(hm: &OperatorMatrix) -> Result<[Membership; 4], String> {
    let mut out = [Membership::Mixed; 4];
    for (slot, inv) in out.iter_mut().zip(Involution::ALL) {
        *slot = algebraic::cartan_classify(hm, inv).map_err(|e| e.to_string())?.membership;
    }
    Ok(out)
}

fn cmd_cartan(ham: HamiltonianArgs, flow: FlowArgs, json: bool) -> ExitCode {
    let spec = match load_hamiltonian(&ham) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let hm = pauli::build_matrix(&spec);
    let labels = match cartan_row(&hm) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let decision = match flows::decide(&spec, None, &flow.config()) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let type1 = match decision.classification {
        Classification::Type1 => "+",
        Classification::CertifiedNotType1 => "-",
        _ => "?",
    };
    if json {
        let out = CartanJson {
            schema: 1,
            hamiltonian: spec.render(),
            cc: labels[0].label().into(),
            ai: labels[1].label().into(),
            aii: labels[2].label().into(),
            aiii: labels[3].label().into(),
            type1: type1.into(),
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    } else {
        println!("H = {}", spec.render());
        println!(
            "CC: {}   AI: {}   AII: {}   AIII: {}   type-I: {}",
            labels[0].label(),
            labels[1].label(),
            labels[2].label(),
            labels[3].label(),
            type1
        );
    }
    ExitCode::SUCCESS
}

// ---------------------------------------------------------------------------
// corpus

/// The built-in pair/multi-qubit interaction corpus.
pub const CORPUS: [(&str, usize); 11] = [
    ("zz", 2),
    ("xx+yy", 2),
    ("xx1-yy1+x1x-y1y+1xx-1yy", 3),
    ("xx11-yy11-1xxx+1yxy+1yyx+1xyy-x1xx+y1xy+y1yx+x1yy", 4),
    ("xx11-yy11+x111-1xxx+1yxy+1yyx+1xyy-x1xx+y1xy+y1yx+x1yy", 4),
    ("z11-xxx+xyy+yxy+yyx", 3),
    ("xx1+yy1+zz1-1xx-1yy-1zz", 3),
    ("xx1+yy1+x1x+y1y+1xx+1yy", 3),
    ("zz1+z1z+1zz", 3),
    ("zz+z1+1x", 2),
    ("zz+z1+1z", 2),
];

#[derive(Serialize)]
struct CorpusRowJson {
    example: usize,
    hamiltonian: String,
    n: usize,
    spectrum_paired: bool,
    double_commutator: bool,
    local_orthocomplement: bool,
    flow_found: bool,
    flow_best_overlap: f64,
}

fn cmd_corpus(flow: FlowArgs, json: bool) -> ExitCode {
    let cfg = flow.config();
    let mut rows = Vec::new();
    for (idx, (text, n)) in CORPUS.iter().enumerate() {
        let spec = match pauli::parse_hamiltonian(text, *n) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let hm = pauli::build_matrix(&spec);
        let paired = match algebraic::spectrum_pairing_check(&hm) {
            Ok((p, _)) => p,
            Err(e) => return fail(e),
        };
        let dc = match algebraic::find_single_pauli_double_commutator(&hm) {
            Ok(v) => v.is_some(),
            Err(e) => return fail(e),
        };
        let orth = match algebraic::invariant_subspace_check(&hm) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let f = match flows::type1_flow(&hm, &cfg) {
            Ok(f) => f,
            Err(e) => return fail(e),
        };
        rows.push(CorpusRowJson {
            example: idx + 1,
            hamiltonian: text.to_string(),
            n: *n,
            spectrum_paired: paired,
            double_commutator: dc,
            local_orthocomplement: orth,
            flow_found: f.verdict == FlowVerdict::WitnessFound,
            flow_best_overlap: f.best_overlap,
        });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        println!("{:<3} {:<55} {:>7} {:>7} {:>7} {:>6} {:>10}", "#", "Hamiltonian", "paired", "dblcom", "orthcmp", "flow", "overlap");
        for r in &rows {
            println!(
                "{:<3} {:<55} {:>7} {:>7} {:>7} {:>6} {:>10.6}",
                r.example,
                r.hamiltonian,
                r.spectrum_paired,
                r.double_commutator,
                r.local_orthocomplement,
                r.flow_found,
                r.flow_best_overlap
            );
        }
        let counts = typeii::subtype_counts(2);
        println!("\n(two-qubit pointwise classes: {} subtypes x {} sign patterns)", counts.0, counts.1);
    }
    ExitCode::SUCCESS
}

// ---------------------------------------------------------------------------
// trace

fn cmd_trace(ham: HamiltonianArgs, tau: TauArgs, flow: FlowArgs, out: String) -> ExitCode {
    let spec = match load_hamiltonian(&ham) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let tau = match tau.resolve() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let cfg = flow.config();
    let hm = pauli::build_matrix(&spec);
    let result = match tau {
        None => flows::type1_flow(&hm, &cfg),
        Some(t) => {
            let g = OperatorMatrix {
                mat: &hm.mat * locinv::linalg::C64::new(0.0, -t),
                role: locinv::RoleTag::SkewHermitian,
            };
            match locinv::linalg::expm_skew(&g) {
                Ok(u) => flows::type2_flow(&u, &cfg),
                Err(e) => return fail(e),
            }
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::write(&out, result.trace_csv()) {
        return fail(e);
    }
    println!(
        "{} restarts, best overlap {:.12}, verdict {:?}; trace written to {}",
        result.restarts_used, result.best_overlap, result.verdict, out
    );
    ExitCode::SUCCESS
}
