//! Batch front-end for the assortativity rewiring toolkit.
//!
//! Subcommands cover the pipeline stages individually (`generate`,
//! `measure`, `bounds`, `target`, `rewire`) and as a replicated batch
//! (`pipeline`). All stochastic work derives from `--seed`; replicate `i`
//! of a batch uses seed + i, so every run is reproducible byte for byte.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 unreadable or
//! inconsistent input data, 4 infeasible target constraints, 5 solver or
//! sweep stall, 1 anything else.

use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use assortnet::assortativity::assortativity_all;
use assortnet::generators::{ErConfig, GenerateError, PaConfig};
use assortnet::graph::{
    read_edge_list_csv, write_edge_list_csv, GraphError, StrengthKind, WeightedDigraph,
};
use assortnet::lp::LpError;
use assortnet::mps::{export_mip, import_solution};
use assortnet::pipeline::{
    self, histogram_l1, mean_trace, weight_histogram, GeneratorSpec, PipelineError,
    ReplicateResult, RunPlan,
};
use assortnet::rewire::{
    read_trace_quads, replay_with_trace, sweep, write_record_csv, write_trace_csv, RewireError,
};
use assortnet::target::{
    all_bounds, default_kappa, solve_target, solve_with_adaptive_floor, Objective, SupportMode,
    TargetError, TargetProblem,
    Targets,
};

#[derive(Parser)]
#[command(
    name = "assortnet",
    version,
    about = "Rewire weighted directed networks to prescribed assortativity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed; replicate i uses seed + i.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for replicate batches (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for produced files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write random networks as edge-list CSVs.
    Generate {
        #[command(subcommand)]
        model: ModelArgs,
    },
    /// Print a network's coefficients and strength summary as JSON.
    Measure {
        /// Edge-list CSV (`src,dst,weight`).
        input: PathBuf,
    },
    /// Print the attainable interval of each coefficient as JSON.
    Bounds {
        input: PathBuf,
        #[command(flatten)]
        kappa: KappaArgs,
        #[arg(long, value_enum, default_value_t = SupportArg::Fixed)]
        support: SupportArg,
    },
    /// Solve for a target matrix with prescribed coefficients.
    #[command(allow_negative_numbers = true)]
    Target {
        input: PathBuf,
        #[command(flatten)]
        targets: TargetArgs,
        #[command(flatten)]
        kappa: KappaArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Zero)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = SupportArg::Fixed)]
        support: SupportArg,
        /// Where to write the target edge list (default `<out-dir>/target.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Free support: write the mixed-integer model here instead of solving.
        #[arg(long)]
        export_mps: Option<PathBuf>,
        /// Free support: verify an external solver's `<var> <value>` file.
        #[arg(long)]
        import_solution: Option<PathBuf>,
    },
    /// Transform a network into a target matrix, recording every transfer.
    Rewire {
        input: PathBuf,
        /// Target edge list; must share margins with the input.
        target: PathBuf,
        /// Skip the row/column magnitude reordering pass.
        #[arg(long)]
        no_reorder: bool,
        /// Trace sampling interval in steps.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        record_out: Option<PathBuf>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Replicated end-to-end batch with per-replicate artifacts and aggregates.
    Pipeline {
        #[command(subcommand)]
        model: PipelineModelArgs,
    },
}

#[derive(Subcommand)]
enum ModelArgs {
    /// Independent-edge random graph (self-loops allowed).
    Er(ErArgs),
    /// Strength-preferential growth from a seed edge.
    Pa(PaArgs),
}

#[derive(Subcommand)]
enum PipelineModelArgs {
    #[command(allow_negative_numbers = true)]
    Er {
        #[command(flatten)]
        model: ErArgs,
        #[command(flatten)]
        run: PipelineRunArgs,
    },
    #[command(allow_negative_numbers = true)]
    Pa {
        #[command(flatten)]
        model: PaArgs,
        #[command(flatten)]
        run: PipelineRunArgs,
    },
}

#[derive(Args, Clone)]
struct ErArgs {
    /// Node count before isolated nodes are dropped.
    #[arg(long)]
    n: usize,
    /// Edge probability per ordered pair.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 5.0)]
    weight_shape: f64,
    #[arg(long, default_value_t = 0.2)]
    weight_scale: f64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
}

#[derive(Args, Clone)]
struct PaArgs {
    /// Growth steps (edges added).
    #[arg(long)]
    steps: usize,
    /// New-source probability; defaults to (1 - beta) / 2.
    #[arg(long)]
    alpha: Option<f64>,
    /// Internal-edge probability.
    #[arg(long)]
    beta: f64,
    /// New-target probability; defaults to (1 - beta) / 2.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta_out: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_in: f64,
    #[arg(long, default_value_t = 5.0)]
    weight_shape: f64,
    #[arg(long, default_value_t = 0.2)]
    weight_scale: f64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
}

#[derive(Args, Clone, Copy)]
struct KappaArgs {
    /// Weight floor for present edges; defaults to half the smallest weight.
    #[arg(long)]
    kappa_lo: Option<f64>,
    /// Weight cap; defaults to twice the largest weight.
    #[arg(long)]
    kappa_hi: Option<f64>,
}

#[derive(Args, Clone, Copy)]
struct TargetArgs {
    /// Desired out-out coefficient.
    #[arg(long)]
    r11: Option<f64>,
    /// Desired out-in coefficient.
    #[arg(long)]
    r12: Option<f64>,
    /// Desired in-out coefficient.
    #[arg(long)]
    r21: Option<f64>,
    /// Desired in-in coefficient.
    #[arg(long)]
    r22: Option<f64>,
}

impl TargetArgs {
    fn to_targets(self) -> Targets<f64> {
        use StrengthKind::{In, Out};
        let mut t = Targets::new();
        if let Some(v) = self.r11 {
            t.set(Out, Out, v);
        }
        if let Some(v) = self.r12 {
            t.set(Out, In, v);
        }
        if let Some(v) = self.r21 {
            t.set(In, Out, v);
        }
        if let Some(v) = self.r22 {
            t.set(In, In, v);
        }
        t
    }
}

#[derive(Args, Clone)]
struct PipelineRunArgs {
    #[command(flatten)]
    targets: TargetArgs,
    #[command(flatten)]
    kappa: KappaArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Zero)]
    objective: ObjectiveArg,
    /// Clamp requests into this fraction of the attainable interval.
    #[arg(long, default_value_t = 0.8)]
    clip: f64,
    #[arg(long)]
    no_reorder: bool,
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Any feasible matrix.
    Zero,
    /// Least total weight movement from the input.
    L1,
}

impl ObjectiveArg {
    fn to_objective(self) -> Objective {
        match self {
            ObjectiveArg::Zero => Objective::Zero,
            ObjectiveArg::L1 => Objective::L1ToW,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SupportArg {
    /// Target keeps the input's edge set.
    Fixed,
    /// Target may choose its own edge set (export-only).
    Free,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new(1, format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(1, format!("json error: {e}"))
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::IterationLimit => CliError::new(5, e.to_string()),
            other => CliError::new(1, other.to_string()),
        }
    }
}

impl From<TargetError<f64>> for CliError {
    fn from(e: TargetError<f64>) -> Self {
        match e {
            TargetError::Infeasible => CliError::new(4, e.to_string()),
            TargetError::BadKappa(_) | TargetError::FreeSupportNeedsExport => {
                CliError::usage(e.to_string())
            }
            TargetError::Undefined { .. } => CliError::usage(e.to_string()),
            TargetError::Lp(lp) => lp.into(),
            TargetError::EmptyGraph | TargetError::GraphMismatch(_) => {
                CliError::input(e.to_string())
            }
            other => CliError::new(1, other.to_string()),
        }
    }
}

impl From<RewireError<f64>> for CliError {
    fn from(e: RewireError<f64>) -> Self {
        match e {
            RewireError::Stalled { .. } => CliError::new(5, e.to_string()),
            RewireError::ShapeMismatch(_)
            | RewireError::MarginMismatch { .. }
            | RewireError::CorruptRecord { .. }
            | RewireError::BadRow { .. }
            | RewireError::Graph(_) => CliError::input(e.to_string()),
            RewireError::Io(io) => io.into(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Generate(g) => g.into(),
            PipelineError::Target(t) => t.into(),
            PipelineError::Rewire(r) => r.into(),
            PipelineError::Assortativity(a) => CliError::input(a.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| CliError::new(1, format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Generate { model } => cmd_generate(&model, cli.seed, &cli.out_dir),
        Command::Measure { input } => cmd_measure(&input),
        Command::Bounds {
            input,
            kappa,
            support,
        } => cmd_bounds(&input, kappa, support),
        Command::Target {
            input,
            targets,
            kappa,
            objective,
            support,
            out,
            export_mps,
            import_solution,
        } => cmd_target(
            &input,
            targets,
            kappa,
            objective,
            support,
            out.unwrap_or_else(|| cli.out_dir.join("target.csv")),
            export_mps,
            import_solution,
            &cli.out_dir,
        ),
        Command::Rewire {
            input,
            target,
            no_reorder,
            stride,
            out,
            record_out,
            trace_out,
        } => cmd_rewire(
            &input,
            &target,
            !no_reorder,
            stride,
            out.unwrap_or_else(|| cli.out_dir.join("rewired.csv")),
            record_out.unwrap_or_else(|| cli.out_dir.join("record.csv")),
            trace_out.unwrap_or_else(|| cli.out_dir.join("trace.csv")),
            &cli.out_dir,
        ),
        Command::Pipeline { model } => {
            let (spec, run_args, replicates) = match model {
                PipelineModelArgs::Er { model, run } => {
                    let reps = model.replicates;
                    (er_spec(&model, cli.seed)?, run, reps)
                }
                PipelineModelArgs::Pa { model, run } => {
                    let reps = model.replicates;
                    (pa_spec(&model, cli.seed)?, run, reps)
                }
            };
            cmd_pipeline(spec, &run_args, replicates, cli.seed, &cli.out_dir)
        }
    }
}

fn er_spec(args: &ErArgs, seed: u64) -> Result<GeneratorSpec, CliError> {
    let config = ErConfig {
        n: args.n,
        p: args.p,
        weight_shape: args.weight_shape,
        weight_scale: args.weight_scale,
        seed,
    };
    config.validate()?;
    Ok(GeneratorSpec::Er(config))
}

fn pa_spec(args: &PaArgs, seed: u64) -> Result<GeneratorSpec, CliError> {
    let side = (1.0 - args.beta) / 2.0;
    let config = PaConfig {
        steps: args.steps,
        alpha: args.alpha.unwrap_or(side),
        beta: args.beta,
        gamma: args.gamma.unwrap_or(side),
        delta_out: args.delta_out,
        delta_in: args.delta_in,
        weight_shape: args.weight_shape,
        weight_scale: args.weight_scale,
        seed_edges: PaConfig::default_seed_edges(),
        seed,
    };
    config.validate()?;
    Ok(GeneratorSpec::Pa(config))
}

fn load_graph(path: &Path) -> Result<WeightedDigraph<f64>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    let g = read_edge_list_csv(BufReader::new(file))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(g)
}

fn write_graph(path: &Path, g: &WeightedDigraph<f64>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_edge_list_csv(g, &mut out, 0.0)?;
    out.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, value)?;
    lock.write_all(b"\n")?;
    Ok(())
}

fn graph_meta(spec: &GeneratorSpec, replicate: usize, g: &WeightedDigraph<f64>) -> serde_json::Value {
    json!({
        "replicate": replicate,
        "seed": spec.seed(),
        "config": spec,
        "nodes": g.n(),
        "edges": g.nnz(),
        "total_weight": g.total_weight(),
    })
}

fn cmd_generate(model: &ModelArgs, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    let (base, replicates, prefix) = match model {
        ModelArgs::Er(args) => (er_spec(args, seed)?, args.replicates, "er"),
        ModelArgs::Pa(args) => (pa_spec(args, seed)?, args.replicates, "pa"),
    };
    if replicates == 0 {
        return Err(CliError::usage("replicate count must be at least 1"));
    }
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for rep in 0..replicates {
        let spec = base.with_seed(seed + rep as u64);
        let g = spec.generate()?;
        let csv = out_dir.join(format!("{prefix}_rep{rep:03}.csv"));
        let meta = out_dir.join(format!("{prefix}_rep{rep:03}.meta.json"));
        write_graph(&csv, &g)?;
        write_json(&meta, &graph_meta(&spec, rep, &g))?;
        files.push(csv.display().to_string());
    }
    print_json(&json!({ "written": files }))
}

fn cmd_measure(input: &Path) -> Result<(), CliError> {
    let g = load_graph(input)?;
    let quad = assortativity_all(&g).map_err(|e| CliError::input(e.to_string()))?;
    let profile = g
        .strength_profile()
        .map_err(|e| CliError::input(e.to_string()))?;
    let summary = |v: &[f64]| {
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(0.0f64, f64::max);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        json!({ "min": min, "mean": mean, "max": max })
    };
    print_json(&json!({
        "nodes": g.n(),
        "edges": g.nnz(),
        "total_weight": profile.tau(),
        "coefficients": quad,
        "out_strength": summary(profile.out()),
        "in_strength": summary(profile.r#in()),
    }))
}

fn resolve_kappa(
    g: &WeightedDigraph<f64>,
    kappa: KappaArgs,
) -> Result<(f64, f64), CliError> {
    let (dlo, dhi) = default_kappa(g)?;
    Ok((kappa.kappa_lo.unwrap_or(dlo), kappa.kappa_hi.unwrap_or(dhi)))
}

fn cmd_bounds(input: &Path, kappa: KappaArgs, support: SupportArg) -> Result<(), CliError> {
    if support == SupportArg::Free {
        return Err(CliError::usage(
            "free-support bounds are a mixed-integer problem; export the model \
             with `target --support free --export-mps` and bound externally",
        ));
    }
    let g = load_graph(input)?;
    let (lo, hi) = resolve_kappa(&g, kappa)?;
    let bounds = all_bounds(&g, lo, hi, SupportMode::Fixed)?;
    print_json(&json!({
        "kappa_lo": lo,
        "kappa_hi": hi,
        "bounds": bounds,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_target(
    input: &Path,
    targets: TargetArgs,
    kappa: KappaArgs,
    objective: ObjectiveArg,
    support: SupportArg,
    out: PathBuf,
    export_mps: Option<PathBuf>,
    import: Option<PathBuf>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let g = load_graph(input)?;
    let explicit_box = kappa.kappa_lo.is_some() || kappa.kappa_hi.is_some();
    let (klo, khi) = resolve_kappa(&g, kappa)?;
    let tp = TargetProblem {
        graph: &g,
        targets: targets.to_targets(),
        kappa_lo: klo,
        kappa_hi: khi,
        objective: objective.to_objective(),
        support: match support {
            SupportArg::Fixed => SupportMode::Fixed,
            SupportArg::Free => SupportMode::Free,
        },
    };
    match support {
        SupportArg::Fixed => {
            if export_mps.is_some() || import.is_some() {
                return Err(CliError::usage(
                    "--export-mps / --import-solution apply to --support free only",
                ));
            }
            // A fully defaulted box may lower its floor to admit the
            // requested coefficients; any explicit bound pins the box.
            let (solved, used) = if explicit_box {
                (solve_target(&tp)?, (klo, khi))
            } else {
                solve_with_adaptive_floor(&g, tp.targets, tp.objective, SupportMode::Fixed)?
            };
            write_graph(&out, &solved.lambda)?;
            print_json(&json!({
                "status": solved.status,
                "achieved": solved.achieved,
                "kappa_lo": used.0,
                "kappa_hi": used.1,
                "target_csv": out.display().to_string(),
            }))
        }
        SupportArg::Free => {
            if let Some(solution) = import {
                let file = fs::File::open(&solution).map_err(|e| {
                    CliError::input(format!("cannot open {}: {e}", solution.display()))
                })?;
                let imported = import_solution(BufReader::new(file), &tp)?;
                write_graph(&out, &imported.lambda)?;
                return print_json(&json!({
                    "status": imported.status,
                    "achieved": imported.achieved,
                    "target_csv": out.display().to_string(),
                }));
            }
            let path = export_mps.unwrap_or_else(|| out_dir.join("target.mps"));
            let doc = export_mip(&tp)?;
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            let mut file = BufWriter::new(fs::File::create(&path)?);
            doc.write_to(&mut file)?;
            file.flush()?;
            print_json(&json!({
                "status": "exported",
                "mps": path.display().to_string(),
                "variables": doc.columns.len(),
                "rows": doc.rows.len(),
            }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_rewire(
    input: &Path,
    target: &Path,
    reorder: bool,
    stride: usize,
    out: PathBuf,
    record_out: PathBuf,
    trace_out: PathBuf,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let w = load_graph(input)?;
    let lambda = load_graph(target)?;
    let record = sweep(&w, &lambda, reorder, assortnet::SWEEP_ZERO_TOL, assortnet::MARGIN_TOL)?;
    let (final_graph, trace) = replay_with_trace(&w, &record, stride, assortnet::EPS_EDGE)?;
    write_graph(&out, &final_graph)?;
    if let Some(dir) = record_out.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut rec_file = BufWriter::new(fs::File::create(&record_out)?);
    write_record_csv(&mut rec_file, w.labels(), &record)?;
    rec_file.flush()?;
    let mut trace_file = BufWriter::new(fs::File::create(&trace_out)?);
    write_trace_csv(&mut trace_file, w.labels(), &trace)?;
    trace_file.flush()?;
    let achieved = assortativity_all(&final_graph).map_err(|e| CliError::input(e.to_string()))?;
    print_json(&json!({
        "steps": record.len(),
        "achieved": achieved,
        "rewired_csv": out.display().to_string(),
        "record_csv": record_out.display().to_string(),
        "trace_csv": trace_out.display().to_string(),
    }))
}

fn replicate_dir(out_dir: &Path, rep: usize) -> PathBuf {
    out_dir.join(format!("rep{rep:03}"))
}

/// Names of the files a finished replicate leaves behind; the summary is
/// written last, so its presence marks the replicate as complete.
const REP_INITIAL: &str = "initial.csv";
const REP_META: &str = "meta.json";
const REP_BOUNDS: &str = "bounds.json";
const REP_TARGET: &str = "target.csv";
const REP_RECORD: &str = "record.csv";
const REP_TRACE: &str = "trace.csv";
const REP_REWIRED: &str = "rewired.csv";
const REP_SUMMARY: &str = "summary.json";

fn run_one_replicate(
    spec: &GeneratorSpec,
    plan: &RunPlan,
    rep: usize,
    dir: &Path,
) -> Result<(), CliError> {
    let graph = spec.generate()?;
    let result: ReplicateResult = pipeline::run_replicate(graph, plan)?;
    fs::create_dir_all(dir)?;
    write_graph(&dir.join(REP_INITIAL), &result.graph)?;
    write_json(&dir.join(REP_META), &graph_meta(spec, rep, &result.graph))?;
    write_json(
        &dir.join(REP_BOUNDS),
        &json!({
            "kappa_lo": result.kappa.0,
            "kappa_hi": result.kappa.1,
            "bounds": result.bounds,
        }),
    )?;
    write_graph(&dir.join(REP_TARGET), &result.target.lambda)?;
    let mut rec = BufWriter::new(fs::File::create(dir.join(REP_RECORD))?);
    write_record_csv(&mut rec, result.graph.labels(), &result.record)?;
    rec.flush()?;
    let mut trc = BufWriter::new(fs::File::create(dir.join(REP_TRACE))?);
    write_trace_csv(&mut trc, result.graph.labels(), &result.trace)?;
    trc.flush()?;
    write_graph(&dir.join(REP_REWIRED), &result.final_graph)?;
    let requested: serde_json::Value = {
        use StrengthKind::{In, Out};
        let get = |a, b| {
            result
                .requested
                .get(a, b)
                .map(|v| json!(v))
                .unwrap_or(serde_json::Value::Null)
        };
        json!({
            "r11": get(Out, Out),
            "r12": get(Out, In),
            "r21": get(In, Out),
            "r22": get(In, In),
        })
    };
    write_json(
        &dir.join(REP_SUMMARY),
        &json!({
            "replicate": rep,
            "seed": spec.seed(),
            "record_steps": result.record.len(),
            "initial": result.initial,
            "requested": requested,
            "adjustments": result.adjustments,
            "achieved": result.achieved,
        }),
    )?;
    Ok(())
}

fn cmd_pipeline(
    base: GeneratorSpec,
    args: &PipelineRunArgs,
    replicates: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    if replicates == 0 {
        return Err(CliError::usage("replicate count must be at least 1"));
    }
    if !(args.clip > 0.0 && args.clip <= 1.0) {
        return Err(CliError::usage(format!(
            "clip fraction must lie in (0, 1], got {}",
            args.clip
        )));
    }
    let plan = RunPlan {
        targets: args.targets.to_targets(),
        clip_fraction: Some(args.clip),
        objective: args.objective.to_objective(),
        kappa: match (args.kappa.kappa_lo, args.kappa.kappa_hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => {
                return Err(CliError::usage(
                    "--kappa-lo and --kappa-hi must be given together",
                ))
            }
        },
        reorder: !args.no_reorder,
        stride: args.stride.max(1),
    };
    fs::create_dir_all(out_dir)?;

    // Replicates whose summary already exists are left untouched, so an
    // interrupted batch resumes where it stopped.
    let pending: Vec<usize> = (0..replicates)
        .filter(|&rep| !replicate_dir(out_dir, rep).join(REP_SUMMARY).exists())
        .collect();
    let results: Vec<Result<(), CliError>> = pending
        .par_iter()
        .map(|&rep| {
            let spec = base.with_seed(seed + rep as u64);
            run_one_replicate(&spec, &plan, rep, &replicate_dir(out_dir, rep))
        })
        .collect();
    for result in results {
        result?;
    }
    aggregate(out_dir, replicates, plan.stride)
}

/// Rebuild every aggregate purely from the per-replicate files, so the
/// same summaries can be recomputed offline or after a partial rerun.
fn aggregate(out_dir: &Path, replicates: usize, stride: usize) -> Result<(), CliError> {
    let mut traces = Vec::with_capacity(replicates);
    let mut initial_graphs = Vec::with_capacity(replicates);
    let mut final_graphs = Vec::with_capacity(replicates);
    let mut summaries = Vec::with_capacity(replicates);
    for rep in 0..replicates {
        let dir = replicate_dir(out_dir, rep);
        let trace_file = fs::File::open(dir.join(REP_TRACE))
            .map_err(|e| CliError::input(format!("replicate {rep} trace: {e}")))?;
        traces.push(
            read_trace_quads::<f64, _>(BufReader::new(trace_file))
                .map_err(|e| CliError::input(format!("replicate {rep}: {e}")))?,
        );
        initial_graphs.push(load_graph(&dir.join(REP_INITIAL))?);
        final_graphs.push(load_graph(&dir.join(REP_REWIRED))?);
        let text = fs::read_to_string(dir.join(REP_SUMMARY))?;
        summaries.push(serde_json::from_str::<serde_json::Value>(&text)?);
    }

    let mean = mean_trace(&traces);
    let mut out = String::from("row,step,r11,r12,r21,r22,padded\n");
    for row in &mean {
        out.push_str(&format!("{},{}", row.row, row.step));
        for slot in row.mean {
            match slot {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push_str(&format!(",{}\n", row.padded));
    }
    fs::write(out_dir.join("mean_trace.csv"), out)?;

    // Shared binning across every graph keeps densities comparable.
    let max_w = initial_graphs
        .iter()
        .chain(&final_graphs)
        .flat_map(|g| g.edges().map(|(_, _, w)| w))
        .fold(0.0f64, f64::max);
    let bins = 64;
    let mut hist = String::from("bin_lo,bin_hi,initial,final\n");
    let mut initial_total = vec![0usize; bins];
    let mut final_total = vec![0usize; bins];
    for g in &initial_graphs {
        for (cell, count) in weight_histogram(g, bins, max_w).into_iter().enumerate() {
            initial_total[cell] += count;
        }
    }
    for g in &final_graphs {
        for (cell, count) in weight_histogram(g, bins, max_w).into_iter().enumerate() {
            final_total[cell] += count;
        }
    }
    for cell in 0..bins {
        let lo = max_w * cell as f64 / bins as f64;
        let hi = max_w * (cell + 1) as f64 / bins as f64;
        hist.push_str(&format!(
            "{lo},{hi},{},{}\n",
            initial_total[cell], final_total[cell]
        ));
    }
    fs::write(out_dir.join("weight_hist.csv"), hist)?;

    let final_rows = mean.last();
    write_json(
        &out_dir.join("aggregate.json"),
        &json!({
            "replicates": summaries,
            "trace_rows": mean.len(),
            "stride": stride,
            "histogram_shift": histogram_l1(&initial_total, &final_total),
            "mean_final": final_rows.map(|row| json!({
                "step": row.step,
                "r11": row.mean[0],
                "r12": row.mean[1],
                "r21": row.mean[2],
                "r22": row.mean[3],
            })),
        }),
    )?;
    print_json(&json!({
        "out_dir": out_dir.display().to_string(),
        "replicates": replicates,
        "aggregate": out_dir.join("aggregate.json").display().to_string(),
    }))
}
