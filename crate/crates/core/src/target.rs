//! Target-matrix construction: find a nonnegative matrix Λ that keeps a
//! graph's row sums, column sums, and edge count while hitting prescribed
//! assortativity values, by solving a linear program over the edge weights.
//!
//! The key observation is that with margins fixed, every strength — and so
//! every deviation from the weighted strength means — is a constant of the
//! problem. An assortativity coefficient is then a *linear* functional of
//! the weight matrix: `r(a, b) = sum_e lambda_e dev_e / (tau sigma sigma)`.
//! Prescribing a coefficient adds one equality row; minimizing or
//! maximizing the same functional yields the attainable range.
//!
//! Only fixed support is solved in-repo (the free-support variant is a
//! mixed-integer program and goes through the MPS export instead), which
//! keeps every decision variable boxed between the weight floor and cap.

use std::error::Error;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::assortativity::{
    assortativity_all_with_profile, coefficient_name, AssortativityQuad, UndefinedCoefficient,
    COEFFICIENT_PAIRS,
};
use crate::graph::{GraphError, StrengthKind, StrengthProfile, WeightedDigraph};
use crate::lp::{solve_lp, LinearProgram, LpError, LpOutcome, SimplexOptions};
use crate::num::Real;

/// What the LP minimizes once the hard constraints are in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Pure feasibility: any matrix satisfying the constraints.
    Zero,
    /// Least total weight movement: minimize `sum |w_e - lambda_e|`.
    L1ToW,
    /// Smallest attainable value of coefficient `(a, b)`.
    BoundMin(StrengthKind, StrengthKind),
    /// Largest attainable value of coefficient `(a, b)`.
    BoundMax(StrengthKind, StrengthKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportMode {
    /// Λ may only place weight where the input graph has an edge.
    Fixed,
    /// Λ may choose any support of the same size; export-only.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetStatus {
    /// Solved in-repo to LP optimality and verified.
    Optimal,
    /// Imported from an external solver and verified.
    Feasible,
    /// The constraint system admits no matrix.
    Infeasible,
    /// Written out as an MPS model; no matrix produced.
    Exported,
}

/// Requested coefficient values, one optional slot per `(a, b)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets<T> {
    vals: [Option<T>; 4],
}

impl<T> Default for Targets<T> {
    fn default() -> Self {
        Targets {
            vals: [None, None, None, None],
        }
    }
}

impl<T: Copy> Targets<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, a: StrengthKind, b: StrengthKind, value: T) -> Self {
        self.set(a, b, value);
        self
    }

    pub fn set(&mut self, a: StrengthKind, b: StrengthKind, value: T) {
        self.vals[a.index() * 2 + b.index()] = Some(value);
    }

    pub fn get(&self, a: StrengthKind, b: StrengthKind) -> Option<T> {
        self.vals[a.index() * 2 + b.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.vals.iter().all(|v| v.is_none())
    }

    /// Requested pairs in report order.
    pub fn iter(&self) -> impl Iterator<Item = (StrengthKind, StrengthKind, T)> + '_ {
        COEFFICIENT_PAIRS
            .into_iter()
            .filter_map(move |(a, b)| self.get(a, b).map(|v| (a, b, v)))
    }
}

/// A full problem statement against one input graph.
#[derive(Debug, Clone)]
pub struct TargetProblem<'g, T> {
    pub graph: &'g WeightedDigraph<T>,
    pub targets: Targets<T>,
    /// Weight floor for present edges; must be positive and at most the
    /// smallest input weight so the input itself stays feasible.
    pub kappa_lo: T,
    /// Weight cap; at least the largest input weight.
    pub kappa_hi: T,
    pub objective: Objective,
    pub support: SupportMode,
}

impl<'g, T: Real> TargetProblem<'g, T> {
    /// Problem with default box (`half the smallest weight`, `twice the
    /// largest`), feasibility objective, and fixed support.
    pub fn new(graph: &'g WeightedDigraph<T>) -> Result<Self, TargetError<T>> {
        let (kappa_lo, kappa_hi) = default_kappa(graph)?;
        Ok(TargetProblem {
            graph,
            targets: Targets::default(),
            kappa_lo,
            kappa_hi,
            objective: Objective::Zero,
            support: SupportMode::Fixed,
        })
    }
}

/// Solved or imported target matrix with its verified coefficients.
#[derive(Debug, Clone)]
pub struct TargetMatrix<T> {
    pub lambda: WeightedDigraph<T>,
    pub status: TargetStatus,
    pub achieved: AssortativityQuad<T>,
}

/// Attainable `[lo, hi]` interval per coefficient; undefined where the
/// relevant strength deviation vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsQuad<T> {
    entries: [Result<(T, T), UndefinedCoefficient>; 4],
}

impl<T: Copy> BoundsQuad<T> {
    pub fn get(&self, a: StrengthKind, b: StrengthKind) -> Result<(T, T), UndefinedCoefficient> {
        self.entries[a.index() * 2 + b.index()]
    }

    pub fn defined(&self) -> impl Iterator<Item = (StrengthKind, StrengthKind, (T, T))> + '_ {
        COEFFICIENT_PAIRS
            .into_iter()
            .filter_map(move |(a, b)| self.get(a, b).ok().map(|v| (a, b, v)))
    }
}

impl<T: Copy + Serialize> Serialize for BoundsQuad<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Interval<T> {
            lo: T,
            hi: T,
        }
        let mut st = serializer.serialize_struct("BoundsQuad", 4)?;
        let names = ["r11", "r12", "r21", "r22"];
        for ((a, b), name) in COEFFICIENT_PAIRS.into_iter().zip(names) {
            match self.get(a, b) {
                Ok((lo, hi)) => st.serialize_field(name, &Interval { lo, hi })?,
                Err(_) => st.serialize_field(name, "undefined")?,
            }
        }
        st.end()
    }
}

/// One violated requirement found by the independent checker.
#[derive(Debug, Clone)]
pub enum ConditionViolation<T> {
    Negative { src: u64, dst: u64, value: T },
    RowSum { label: u64, got: T, want: T },
    ColSum { label: u64, got: T, want: T },
    EdgeCount { got: usize, want: usize },
    Coefficient { name: String, got: Option<T>, want: T },
}

impl<T: fmt::Display> fmt::Display for ConditionViolation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionViolation::Negative { src, dst, value } => {
                write!(f, "entry {src} -> {dst} is negative ({value})")
            }
            ConditionViolation::RowSum { label, got, want } => {
                write!(f, "out-strength of node {label} is {got}, expected {want}")
            }
            ConditionViolation::ColSum { label, got, want } => {
                write!(f, "in-strength of node {label} is {got}, expected {want}")
            }
            ConditionViolation::EdgeCount { got, want } => {
                write!(f, "edge count {got}, expected {want}")
            }
            ConditionViolation::Coefficient { name, got, want } => match got {
                Some(v) => write!(f, "{name} is {v}, expected {want}"),
                None => write!(f, "{name} is undefined, expected {want}"),
            },
        }
    }
}

#[derive(Debug)]
pub enum TargetError<T> {
    /// The requested coefficient cannot be constrained: its denominator
    /// vanishes on this graph.
    Undefined {
        a: StrengthKind,
        b: StrengthKind,
        reason: UndefinedCoefficient,
    },
    /// No matrix satisfies margins, box, and requested coefficients.
    Infeasible,
    BadKappa(String),
    EmptyGraph,
    /// Free-support problems are not solved in-repo.
    FreeSupportNeedsExport,
    /// A solution failed the independent condition check.
    Verification(ConditionViolation<T>),
    /// Node set of a candidate matrix does not match the input graph.
    GraphMismatch(String),
    Lp(LpError),
}

impl<T: fmt::Display + fmt::Debug> fmt::Display for TargetError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetError::Undefined { a, b, reason } => {
                write!(f, "cannot constrain {}: {reason}", coefficient_name(*a, *b))
            }
            TargetError::Infeasible => write!(f, "target constraints are infeasible"),
            TargetError::BadKappa(msg) => write!(f, "bad weight box: {msg}"),
            TargetError::EmptyGraph => write!(f, "graph has no edges"),
            TargetError::FreeSupportNeedsExport => {
                write!(f, "free-support problems must be exported, not solved in-repo")
            }
            TargetError::Verification(v) => write!(f, "solution check failed: {v}"),
            TargetError::GraphMismatch(msg) => write!(f, "graph mismatch: {msg}"),
            TargetError::Lp(e) => write!(f, "{e}"),
        }
    }
}

impl<T: fmt::Display + fmt::Debug> Error for TargetError<T> {}

impl<T> From<LpError> for TargetError<T> {
    fn from(e: LpError) -> Self {
        TargetError::Lp(e)
    }
}

impl<T> From<GraphError> for TargetError<T> {
    fn from(_: GraphError) -> Self {
        TargetError::EmptyGraph
    }
}

/// Default weight box: half the smallest edge weight up to twice the
/// largest, so the input graph is always an interior feasible point.
pub fn default_kappa<T: Real>(g: &WeightedDigraph<T>) -> Result<(T, T), TargetError<T>> {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for (_, _, w) in g.edges() {
        lo = lo.min(w);
        hi = hi.max(w);
    }
    if !(hi > T::zero()) {
        return Err(TargetError::EmptyGraph);
    }
    Ok((lo * T::c(0.5), hi * T::c(2.0)))
}

fn check_kappa<T: Real>(g: &WeightedDigraph<T>, lo: T, hi: T) -> Result<(), TargetError<T>> {
    if !(lo > T::zero()) {
        return Err(TargetError::BadKappa(format!(
            "weight floor must be positive, got {lo}"
        )));
    }
    if !(lo <= hi) {
        return Err(TargetError::BadKappa(format!(
            "weight floor {lo} exceeds cap {hi}"
        )));
    }
    for (i, j, w) in g.edges() {
        if w < lo || w > hi {
            return Err(TargetError::BadKappa(format!(
                "edge ({}, {}) weight {w} lies outside [{lo}, {hi}]",
                g.label_of(i),
                g.label_of(j)
            )));
        }
    }
    Ok(())
}

/// Coefficients and right-hand side of the equality row that pins
/// `r(a, b)` to `r_star` on the given support cells:
/// `sum_e coeff_e lambda_e = r_star tau sigma_src sigma_trg`.
pub fn linearized_row<T: Real>(
    profile: &StrengthProfile<T>,
    support: &[(usize, usize)],
    a: StrengthKind,
    b: StrengthKind,
    r_star: T,
) -> Result<(Vec<T>, T), TargetError<T>> {
    let denom = coefficient_denom(profile, a, b)?;
    let coeffs = support
        .iter()
        .map(|&(i, j)| profile.src_dev(a, i) * profile.trg_dev(b, j))
        .collect();
    Ok((coeffs, r_star * denom))
}

fn coefficient_denom<T: Real>(
    p: &StrengthProfile<T>,
    a: StrengthKind,
    b: StrengthKind,
) -> Result<T, TargetError<T>> {
    let undefined = |reason| TargetError::Undefined { a, b, reason };
    let sd_src = p.src_sd(a);
    if StrengthProfile::sd_is_zero(sd_src, p.src_mean(a)) {
        return Err(undefined(UndefinedCoefficient::ZeroSourceSd(a)));
    }
    let sd_trg = p.trg_sd(b);
    if StrengthProfile::sd_is_zero(sd_trg, p.trg_mean(b)) {
        return Err(undefined(UndefinedCoefficient::ZeroTargetSd(b)));
    }
    Ok(p.tau() * sd_src * sd_trg)
}

/// How LP variables map back onto support cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// One variable per cell, the weight itself.
    Direct,
    /// Two variables per cell: `lambda_e = w_e + pos_e - neg_e`. Used for
    /// the least-movement objective so the cost stays linear.
    Shifted,
}

/// The assembled LP plus the bookkeeping needed to read a solution back.
#[derive(Debug, Clone)]
pub struct BuiltProblem<T> {
    pub lp: LinearProgram<T>,
    pub support: Vec<(usize, usize)>,
    pub encoding: Encoding,
}

impl<T: Real> BuiltProblem<T> {
    /// Map an LP solution vector to per-cell weights.
    pub fn cell_values(&self, x: &[T], w: &WeightedDigraph<T>) -> Vec<T> {
        match self.encoding {
            Encoding::Direct => x.to_vec(),
            Encoding::Shifted => self
                .support
                .iter()
                .enumerate()
                .map(|(e, &(i, j))| w.weight(i, j) + x[2 * e] - x[2 * e + 1])
                .collect(),
        }
    }
}

/// Assemble the LP for a fixed-support problem.
///
/// Rows: one per node with outgoing support (its out-strength), one per node
/// with incoming support except the largest-index such node (column sums are
/// linearly dependent given the row sums, so one is dropped), and one per
/// requested coefficient.
pub fn build_problem<T: Real>(tp: &TargetProblem<'_, T>) -> Result<BuiltProblem<T>, TargetError<T>> {
    if tp.support == SupportMode::Free {
        return Err(TargetError::FreeSupportNeedsExport);
    }
    check_kappa(tp.graph, tp.kappa_lo, tp.kappa_hi)?;
    let g = tp.graph;
    let profile = g.strength_profile()?;
    let support: Vec<(usize, usize)> = g.edges().map(|(i, j, _)| (i, j)).collect();
    let ne = support.len();
    let encoding = match tp.objective {
        Objective::L1ToW => Encoding::Shifted,
        _ => Encoding::Direct,
    };
    let vars_per_cell = match encoding {
        Encoding::Direct => 1,
        Encoding::Shifted => 2,
    };
    let nv = ne * vars_per_cell;

    let mut lower = vec![T::zero(); nv];
    let mut upper = vec![T::zero(); nv];
    for (e, &(i, j)) in support.iter().enumerate() {
        match encoding {
            Encoding::Direct => {
                lower[e] = tp.kappa_lo;
                upper[e] = tp.kappa_hi;
            }
            Encoding::Shifted => {
                let w = g.weight(i, j);
                lower[2 * e] = T::zero();
                upper[2 * e] = tp.kappa_hi - w;
                lower[2 * e + 1] = T::zero();
                upper[2 * e + 1] = w - tp.kappa_lo;
            }
        }
    }

    let mut objective = vec![T::zero(); nv];
    match tp.objective {
        Objective::Zero => {}
        Objective::L1ToW => {
            for c in objective.iter_mut() {
                *c = T::one();
            }
        }
        Objective::BoundMin(a, b) | Objective::BoundMax(a, b) => {
            let sign = if matches!(tp.objective, Objective::BoundMin(_, _)) {
                T::one()
            } else {
                -T::one()
            };
            // Fail early if the coefficient is undefined on this graph.
            coefficient_denom(&profile, a, b)?;
            for (e, &(i, j)) in support.iter().enumerate() {
                objective[e] = sign * profile.src_dev(a, i) * profile.trg_dev(b, j);
            }
        }
    }

    // Push one cell-level coefficient into the row system under the active
    // encoding; shifted variables carry +c on pos and -c on neg.
    let add_cell = |row: &mut Vec<(usize, T)>, e: usize, c: T| match encoding {
        Encoding::Direct => row.push((e, c)),
        Encoding::Shifted => {
            row.push((2 * e, c));
            row.push((2 * e + 1, -c));
        }
    };

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let n = g.n();
    // Row-sum rows.
    for i in 0..n {
        let cells: Vec<usize> = support
            .iter()
            .enumerate()
            .filter(|(_, &(r, _))| r == i)
            .map(|(e, _)| e)
            .collect();
        if cells.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for e in cells {
            add_cell(&mut row, e, T::one());
        }
        rows.push(row);
        rhs.push(match encoding {
            Encoding::Direct => profile.out()[i],
            Encoding::Shifted => T::zero(),
        });
    }
    // Column-sum rows, dropping the last nonempty column as redundant.
    let nonempty_cols: Vec<usize> = (0..n)
        .filter(|&j| support.iter().any(|&(_, c)| c == j))
        .collect();
    for &j in nonempty_cols.iter().take(nonempty_cols.len().saturating_sub(1)) {
        let mut row = Vec::new();
        for (e, &(_, c)) in support.iter().enumerate() {
            if c == j {
                add_cell(&mut row, e, T::one());
            }
        }
        rows.push(row);
        rhs.push(match encoding {
            Encoding::Direct => profile.r#in()[j],
            Encoding::Shifted => T::zero(),
        });
    }
    // Coefficient rows. Bound objectives ignore requested targets: they
    // explore the whole margin polytope.
    let constrain_targets = !matches!(
        tp.objective,
        Objective::BoundMin(_, _) | Objective::BoundMax(_, _)
    );
    if constrain_targets {
        for (a, b, r_star) in tp.targets.iter() {
            let (coeffs, full_rhs) = linearized_row(&profile, &support, a, b, r_star)?;
            let mut row = Vec::new();
            let mut base = T::zero();
            for (e, (&(i, j), &c)) in support.iter().zip(&coeffs).enumerate() {
                if c != T::zero() {
                    add_cell(&mut row, e, c);
                }
                if encoding == Encoding::Shifted {
                    base = base + g.weight(i, j) * c;
                }
            }
            rows.push(row);
            rhs.push(match encoding {
                Encoding::Direct => full_rhs,
                // Variables measure movement away from W, so the input
                // graph's own numerator shifts to the right-hand side.
                Encoding::Shifted => full_rhs - base,
            });
        }
    }

    Ok(BuiltProblem {
        lp: LinearProgram {
            objective,
            rows,
            rhs,
            lower,
            upper,
        },
        support,
        encoding,
    })
}

/// Tolerances for the independent solution check.
#[derive(Debug, Clone, Copy)]
pub struct VerifyTolerances<T> {
    /// Allowed drift in each row/column sum.
    pub margin: T,
    /// Allowed miss per requested coefficient.
    pub assort: T,
    /// Magnitude below which an entry counts as an absent edge.
    pub edge: T,
}

impl<T: Real> Default for VerifyTolerances<T> {
    fn default() -> Self {
        VerifyTolerances {
            margin: T::c(1e-7),
            assort: T::c(1e-6),
            edge: T::c(1e-9),
        }
    }
}

/// Check a candidate matrix against the input graph from scratch:
/// nonnegativity, margins, edge count, and every requested coefficient are
/// all recomputed here rather than trusted from the solver. Returns the
/// achieved coefficients on success.
pub fn verify_conditions<T: Real>(
    w: &WeightedDigraph<T>,
    lambda: &WeightedDigraph<T>,
    targets: &Targets<T>,
    tol: &VerifyTolerances<T>,
) -> Result<AssortativityQuad<T>, TargetError<T>> {
    if lambda.n() != w.n() || lambda.labels() != w.labels() {
        return Err(TargetError::GraphMismatch(
            "candidate matrix is over a different node set".into(),
        ));
    }
    let n = w.n();
    for i in 0..n {
        for j in 0..n {
            let v = lambda.weight(i, j);
            if v < -tol.edge {
                return Err(TargetError::Verification(ConditionViolation::Negative {
                    src: w.label_of(i),
                    dst: w.label_of(j),
                    value: v,
                }));
            }
        }
    }
    let (want_out, want_in) = (w.out_strengths(), w.in_strengths());
    let (got_out, got_in) = (lambda.out_strengths(), lambda.in_strengths());
    for i in 0..n {
        if (got_out[i] - want_out[i]).abs_val() > tol.margin {
            return Err(TargetError::Verification(ConditionViolation::RowSum {
                label: w.label_of(i),
                got: got_out[i],
                want: want_out[i],
            }));
        }
        if (got_in[i] - want_in[i]).abs_val() > tol.margin {
            return Err(TargetError::Verification(ConditionViolation::ColSum {
                label: w.label_of(i),
                got: got_in[i],
                want: want_in[i],
            }));
        }
    }
    let (got_nnz, want_nnz) = (lambda.nnz_tol(tol.edge), w.nnz_tol(tol.edge));
    if got_nnz != want_nnz {
        return Err(TargetError::Verification(ConditionViolation::EdgeCount {
            got: got_nnz,
            want: want_nnz,
        }));
    }
    let profile = lambda.strength_profile()?;
    let achieved = assortativity_all_with_profile(lambda, &profile);
    for (a, b, want) in targets.iter() {
        let got = achieved.get(a, b);
        let ok = matches!(got, Ok(v) if (v - want).abs_val() <= tol.assort);
        if !ok {
            return Err(TargetError::Verification(ConditionViolation::Coefficient {
                name: coefficient_name(a, b),
                got: got.ok(),
                want,
            }));
        }
    }
    Ok(achieved)
}

/// Solve a fixed-support problem end to end: build the LP, run the simplex,
/// assemble Λ, and verify it independently.
pub fn solve_target<T: Real>(tp: &TargetProblem<'_, T>) -> Result<TargetMatrix<T>, TargetError<T>> {
    let built = build_problem(tp)?;
    let outcome = solve_lp(&built.lp, &SimplexOptions::default())?;
    let x = match outcome {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible => return Err(TargetError::Infeasible),
    };
    let values = built.cell_values(&x, tp.graph);
    let lambda = assemble_matrix(tp.graph, &built.support, &values)?;
    let achieved = verify_conditions(
        tp.graph,
        &lambda,
        &tp.targets,
        &VerifyTolerances::default(),
    )?;
    Ok(TargetMatrix {
        lambda,
        status: TargetStatus::Optimal,
        achieved,
    })
}

/// Solve under the default weight box, relaxing its floor when necessary.
///
/// The nominal floor (half the smallest input weight) can make a set of
/// requested coefficients jointly unreachable even when each one fits its
/// own attainable interval: forcing every edge to carry at least the floor
/// reserves weight that the correlations may need concentrated elsewhere.
/// When that happens the floor is lowered by factors of ten until the
/// system admits a solution or the floor becomes numerically meaningless;
/// the cap never moves. Returns the solved matrix together with the box
/// that was actually used.
pub fn solve_with_adaptive_floor<T: Real>(
    g: &WeightedDigraph<T>,
    targets: Targets<T>,
    objective: Objective,
    support: SupportMode,
) -> Result<(TargetMatrix<T>, (T, T)), TargetError<T>> {
    const FLOOR_STEPS: u32 = 12;
    let (mut lo, hi) = default_kappa(g)?;
    let mut step = 0;
    loop {
        let tp = TargetProblem {
            graph: g,
            targets,
            kappa_lo: lo,
            kappa_hi: hi,
            objective,
            support,
        };
        match solve_target(&tp) {
            Ok(m) => return Ok((m, (lo, hi))),
            Err(TargetError::Infeasible) if step < FLOOR_STEPS && !targets.is_empty() => {
                step += 1;
                lo = lo / T::c(10.0);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Place per-cell values on the graph's node set; tiny negative residues
/// are clamped, anything clearly negative is a hard error upstream.
pub fn assemble_matrix<T: Real>(
    g: &WeightedDigraph<T>,
    support: &[(usize, usize)],
    values: &[T],
) -> Result<WeightedDigraph<T>, TargetError<T>> {
    let n = g.n();
    let mut w = vec![T::zero(); n * n];
    for (&(i, j), &v) in support.iter().zip(values) {
        if v < -T::c(1e-9) {
            return Err(TargetError::Verification(ConditionViolation::Negative {
                src: g.label_of(i),
                dst: g.label_of(j),
                value: v,
            }));
        }
        w[i * n + j] = v.max(T::zero());
    }
    WeightedDigraph::from_dense(g.labels().to_vec(), w)
        .map_err(|e| TargetError::GraphMismatch(e.to_string()))
}

/// Attainable range `[lo, hi]` of one coefficient over all matrices with
/// the graph's margins, support, and weight box.
pub fn assortativity_bounds<T: Real>(
    g: &WeightedDigraph<T>,
    a: StrengthKind,
    b: StrengthKind,
    kappa_lo: T,
    kappa_hi: T,
    support: SupportMode,
) -> Result<(T, T), TargetError<T>> {
    if support == SupportMode::Free {
        return Err(TargetError::FreeSupportNeedsExport);
    }
    let profile = g.strength_profile()?;
    let denom = coefficient_denom(&profile, a, b)?;
    let objective_value = |obj: Objective| -> Result<T, TargetError<T>> {
        let tp = TargetProblem {
            graph: g,
            targets: Targets::default(),
            kappa_lo,
            kappa_hi,
            objective: obj,
            support: SupportMode::Fixed,
        };
        let built = build_problem(&tp)?;
        match solve_lp(&built.lp, &SimplexOptions::default())? {
            LpOutcome::Optimal { objective, .. } => Ok(objective),
            LpOutcome::Infeasible => Err(TargetError::Infeasible),
        }
    };
    let lo = objective_value(Objective::BoundMin(a, b))? / denom;
    let hi = -objective_value(Objective::BoundMax(a, b))? / denom;
    Ok((lo, hi))
}

/// Bounds for all four coefficients; undefined ones are reported as such
/// rather than failing the whole call.
pub fn all_bounds<T: Real>(
    g: &WeightedDigraph<T>,
    kappa_lo: T,
    kappa_hi: T,
    support: SupportMode,
) -> Result<BoundsQuad<T>, TargetError<T>> {
    let mut entries = [Err(UndefinedCoefficient::ZeroSourceSd(StrengthKind::Out)); 4];
    for (a, b) in COEFFICIENT_PAIRS {
        let slot = a.index() * 2 + b.index();
        entries[slot] = match assortativity_bounds(g, a, b, kappa_lo, kappa_hi, support) {
            Ok(interval) => Ok(interval),
            Err(TargetError::Undefined { reason, .. }) => Err(reason),
            Err(e) => return Err(e),
        };
    }
    Ok(BoundsQuad { entries })
}
