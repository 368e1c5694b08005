//! One-replicate orchestration and cross-replicate aggregation.
//!
//! A replicate runs the full chain on one generated (or loaded) network:
//! measure, compute attainable bounds, clip the requested coefficients
//! into those bounds, solve for the target matrix, sweep out the transfer
//! record, and replay it with a coefficient trace. Everything a caller
//! needs to report or verify comes back in one bundle; nothing is written
//! to disk here, so the orchestration is equally usable from the command
//! line, from tests, and from batch drivers.
//!
//! Aggregation helpers turn per-replicate traces into a mean trajectory
//! (padding shorter records by repeating their final values, with the
//! padding count reported per row) and edge-weight histograms into
//! comparable densities.

use std::error::Error;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assortativity::{
    assortativity_all, AssortativityError, AssortativityQuad,
};
use crate::generators::{
    erdos_renyi, preferential_attachment, ErConfig, GenerateError, PaConfig,
};
use crate::graph::WeightedDigraph;
use crate::rewire::{replay_with_trace, sweep, RewireError, RewiringRecord, TraceRow};
use crate::target::{
    all_bounds, default_kappa, solve_target, solve_with_adaptive_floor, BoundsQuad, Objective,
    SupportMode, TargetError, TargetMatrix, TargetProblem, Targets,
};

#[derive(Debug)]
pub enum PipelineError {
    Generate(GenerateError),
    Target(TargetError<f64>),
    Rewire(RewireError<f64>),
    Assortativity(AssortativityError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Generate(e) => write!(f, "{e}"),
            PipelineError::Target(e) => write!(f, "{e}"),
            PipelineError::Rewire(e) => write!(f, "{e}"),
            PipelineError::Assortativity(e) => write!(f, "{e}"),
        }
    }
}

impl Error for PipelineError {}

impl From<GenerateError> for PipelineError {
    fn from(e: GenerateError) -> Self {
        PipelineError::Generate(e)
    }
}

impl From<TargetError<f64>> for PipelineError {
    fn from(e: TargetError<f64>) -> Self {
        PipelineError::Target(e)
    }
}

impl From<RewireError<f64>> for PipelineError {
    fn from(e: RewireError<f64>) -> Self {
        PipelineError::Rewire(e)
    }
}

impl From<AssortativityError> for PipelineError {
    fn from(e: AssortativityError) -> Self {
        PipelineError::Assortativity(e)
    }
}

/// Which random model produces the replicate inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Er(ErConfig),
    Pa(PaConfig),
}

impl GeneratorSpec {
    pub fn seed(&self) -> u64 {
        match self {
            GeneratorSpec::Er(c) => c.seed,
            GeneratorSpec::Pa(c) => c.seed,
        }
    }

    /// Same model with a different stream; replicate `i` of a batch uses
    /// base seed + i.
    pub fn with_seed(&self, seed: u64) -> GeneratorSpec {
        let mut spec = self.clone();
        match &mut spec {
            GeneratorSpec::Er(c) => c.seed = seed,
            GeneratorSpec::Pa(c) => c.seed = seed,
        }
        spec
    }

    pub fn generate(&self) -> Result<WeightedDigraph<f64>, GenerateError> {
        match self {
            GeneratorSpec::Er(c) => erdos_renyi(c),
            GeneratorSpec::Pa(c) => preferential_attachment(c),
        }
    }
}

/// What to do with a replicate once its network exists.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub targets: Targets<f64>,
    /// Shrink requested values into `fraction x` the attainable interval
    /// when they fall outside it; `None` requests exactly what was given.
    pub clip_fraction: Option<f64>,
    pub objective: Objective,
    /// Weight box override; defaults to the graph-derived box.
    pub kappa: Option<(f64, f64)>,
    pub reorder: bool,
    /// Trace sampling interval in steps.
    pub stride: usize,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            targets: Targets::default(),
            clip_fraction: Some(0.8),
            objective: Objective::Zero,
            kappa: None,
            reorder: true,
            stride: 1,
        }
    }
}

/// Everything produced by one replicate, ready for reporting.
#[derive(Debug)]
pub struct ReplicateResult {
    pub graph: WeightedDigraph<f64>,
    pub initial: AssortativityQuad<f64>,
    pub bounds: BoundsQuad<f64>,
    /// Requested coefficients after clipping; what the solver saw.
    pub requested: Targets<f64>,
    /// Coefficient names whose request was moved or dropped, with why.
    pub adjustments: Vec<String>,
    pub kappa: (f64, f64),
    pub target: TargetMatrix<f64>,
    pub record: RewiringRecord<f64>,
    pub trace: Vec<TraceRow<f64>>,
    pub final_graph: WeightedDigraph<f64>,
    pub achieved: AssortativityQuad<f64>,
}

/// Clamp requested coefficients into `fraction x [lo, hi]`. Requests for
/// coefficients whose bounds are undefined (degenerate strength spread)
/// are dropped — no equality row could hold them. Returns the adjusted
/// request set and a human-readable note per change.
pub fn clip_targets(
    requested: &Targets<f64>,
    bounds: &BoundsQuad<f64>,
    fraction: f64,
) -> (Targets<f64>, Vec<String>) {
    let mut out = Targets::default();
    let mut notes = Vec::new();
    for (a, b, want) in requested.iter() {
        let name = crate::assortativity::coefficient_name(a, b);
        match bounds.get(a, b) {
            Ok((lo, hi)) => {
                let (flo, fhi) = (fraction * lo, fraction * hi);
                let clipped = want.clamp(flo.min(fhi), fhi.max(flo));
                if clipped != want {
                    notes.push(format!(
                        "{name}: request {want} clipped to {clipped} (attainable [{lo}, {hi}])"
                    ));
                }
                out.set(a, b, clipped);
            }
            Err(reason) => {
                notes.push(format!("{name}: dropped, {reason}"));
            }
        }
    }
    (out, notes)
}

/// Run the full chain on one network.
pub fn run_replicate(
    graph: WeightedDigraph<f64>,
    plan: &RunPlan,
) -> Result<ReplicateResult, PipelineError> {
    let initial = assortativity_all(&graph)?;
    let nominal = match plan.kappa {
        Some(k) => k,
        None => default_kappa(&graph)?,
    };
    let bounds = all_bounds(&graph, nominal.0, nominal.1, SupportMode::Fixed)?;
    let (requested, mut adjustments) = match plan.clip_fraction {
        Some(f) => clip_targets(&plan.targets, &bounds, f),
        None => (plan.targets, Vec::new()),
    };
    let (target, kappa) = match plan.kappa {
        // An explicit box is a hard constraint: report infeasibility as-is.
        Some(k) => {
            let tp = TargetProblem {
                graph: &graph,
                targets: requested,
                kappa_lo: k.0,
                kappa_hi: k.1,
                objective: plan.objective,
                support: SupportMode::Fixed,
            };
            (solve_target(&tp)?, k)
        }
        None => {
            let (target, used) =
                solve_with_adaptive_floor(&graph, requested, plan.objective, SupportMode::Fixed)?;
            if used.0 != nominal.0 {
                adjustments.push(format!(
                    "weight floor lowered from {} to {} to admit the requested coefficients",
                    nominal.0, used.0
                ));
            }
            (target, used)
        }
    };
    let record = sweep(&graph, &target.lambda, plan.reorder, 1e-9, 1e-7)?;
    let (final_graph, trace) = replay_with_trace(&graph, &record, plan.stride, 1e-9)?;
    let achieved = assortativity_all(&final_graph)?;
    Ok(ReplicateResult {
        graph,
        initial,
        bounds,
        requested,
        adjustments,
        kappa,
        target,
        record,
        trace,
        final_graph,
        achieved,
    })
}

/// Counts of nonzero edge weights over `bins` equal cells of `[0, max]`;
/// weights at or beyond `max` land in the last bin.
pub fn weight_histogram(g: &WeightedDigraph<f64>, bins: usize, max: f64) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    if bins == 0 || !(max > 0.0) {
        return counts;
    }
    for (_, _, w) in g.edges() {
        let cell = ((w / max) * bins as f64) as usize;
        counts[cell.min(bins - 1)] += 1;
    }
    counts
}

/// L1 distance between the two histograms' densities (each normalized to
/// total mass 1; the distance lies in [0, 2]). Empty histograms count as
/// the zero density.
pub fn histogram_l1(a: &[usize], b: &[usize]) -> f64 {
    let (ta, tb) = (
        a.iter().sum::<usize>() as f64,
        b.iter().sum::<usize>() as f64,
    );
    let norm = |v: usize, t: f64| if t > 0.0 { v as f64 / t } else { 0.0 };
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (norm(x, ta) - norm(y, tb)).abs())
        .sum()
}

/// One row of the cross-replicate mean trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTraceRow {
    /// Row index on the shared grid (row 0 is the initial state).
    pub row: usize,
    /// Largest step count any contributing replicate had reached here.
    pub step: usize,
    /// Per-coefficient mean over the replicates where it is defined.
    pub mean: [Option<f64>; 4],
    /// How many replicates were past their record end (value repeated).
    pub padded: usize,
}

/// Average traces row-by-row across replicates. Shorter traces are padded
/// by repeating their final row so every replicate contributes to every
/// row; the `padded` count says how many of them were repeats.
pub fn mean_trace(traces: &[Vec<(usize, [Option<f64>; 4])>]) -> Vec<MeanTraceRow> {
    let rows = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    let mut out = Vec::with_capacity(rows);
    for row in 0..rows {
        let mut sums = [0.0f64; 4];
        let mut counts = [0usize; 4];
        let mut padded = 0usize;
        let mut step = 0usize;
        for trace in traces {
            if trace.is_empty() {
                continue;
            }
            let (s, quad) = if row < trace.len() {
                trace[row]
            } else {
                padded += 1;
                *trace.last().unwrap()
            };
            step = step.max(s);
            for slot in 0..4 {
                if let Some(v) = quad[slot] {
                    sums[slot] += v;
                    counts[slot] += 1;
                }
            }
        }
        let mut mean = [None; 4];
        for slot in 0..4 {
            if counts[slot] > 0 {
                mean[slot] = Some(sums[slot] / counts[slot] as f64);
            }
        }
        out.push(MeanTraceRow {
            row,
            step,
            mean,
            padded,
        });
    }
    out
}

/// Strip trace rows down to the form the aggregators consume.
pub fn trace_to_quads(trace: &[TraceRow<f64>]) -> Vec<(usize, [Option<f64>; 4])> {
    trace
        .iter()
        .map(|row| {
            let q = [
                row.quad.r11().ok(),
                row.quad.r12().ok(),
                row.quad.r21().ok(),
                row.quad.r22().ok(),
            ];
            (row.step, q)
        })
        .collect()
}
