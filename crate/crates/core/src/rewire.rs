//! Sweep rewiring: turn one weight matrix into another with the same
//! margins through a finite sequence of four-cell transfers.
//!
//! With Ψ = W − Λ, every row and column of Ψ sums to zero. The sweep walks
//! cells in order; at cell `(i, j)` it looks for partner cells strictly
//! below and to the right and moves weight so that ψ_ij reaches zero:
//! positive surplus drains into a positive ψ_kl partner, negative deficit is
//! filled from positive ψ_il and ψ_kj partners. Zero margins guarantee each
//! cell can always be cleared, so after sweeping the first n−1 rows and
//! columns the final row and column vanish automatically.
//!
//! Everything here is generic over the scalar: integer matrices rewire
//! bit-exactly, float matrices clear to within a small residual threshold.
//!
//! The optional reorder pass fronts large-magnitude rows and columns before
//! each row is swept, which empirically shortens the record; it never
//! changes the final matrix.

use std::error::Error;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use crate::assortativity::{AssortativityQuad, TrajectoryTracker};
use crate::graph::{GraphError, RewiringStep, WeightedDigraph};
use crate::num::{Real, Weight};

#[derive(Debug)]
pub enum RewireError<T> {
    /// The two graphs do not share a node set.
    ShapeMismatch(String),
    /// A row or column sum differs between the two matrices.
    MarginMismatch {
        label: u64,
        /// True for a row (out-strength) mismatch, false for a column.
        out: bool,
        difference: T,
    },
    /// A cell could not be cleared; indicates margins were violated.
    Stalled { src: u64, dst: u64, residual: T },
    /// A recorded step cannot be applied at its position in the record.
    CorruptRecord { step: usize, source: GraphError },
    /// Malformed CSV input.
    BadRow { row: usize, reason: String },
    Graph(GraphError),
    Io(io::Error),
}

impl<T: fmt::Display> fmt::Display for RewireError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewireError::ShapeMismatch(msg) => write!(f, "graph mismatch: {msg}"),
            RewireError::MarginMismatch {
                label,
                out,
                difference,
            } => {
                let side = if *out { "out" } else { "in" };
                write!(
                    f,
                    "{side}-strength of node {label} differs by {difference} between the matrices"
                )
            }
            RewireError::Stalled { src, dst, residual } => write!(
                f,
                "sweep stalled at cell {src} -> {dst} with residual {residual}"
            ),
            RewireError::CorruptRecord { step, source } => {
                write!(f, "record step {step} cannot be applied: {source}")
            }
            RewireError::BadRow { row, reason } => write!(f, "row {row}: {reason}"),
            RewireError::Graph(e) => write!(f, "{e}"),
            RewireError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl<T: fmt::Display + fmt::Debug> Error for RewireError<T> {}

impl<T> From<GraphError> for RewireError<T> {
    fn from(e: GraphError) -> Self {
        RewireError::Graph(e)
    }
}

impl<T> From<io::Error> for RewireError<T> {
    fn from(e: io::Error) -> Self {
        RewireError::Io(e)
    }
}

/// Transfer size for clearing cell `(i, j)` against partners `(k, l)`:
/// a positive surplus moves up to the partner's positive surplus; a
/// negative deficit pulls back weight available on the two cross cells.
/// Returns zero when nothing can move.
pub fn delta_w<T: Weight>(psi_ij: T, psi_kl: T, psi_il: T, psi_kj: T) -> T {
    let zero = T::zero();
    if psi_ij > zero {
        let avail = if psi_kl > zero { psi_kl } else { zero };
        if psi_ij < avail {
            psi_ij
        } else {
            avail
        }
    } else if psi_ij < zero {
        let a = if psi_il > zero { zero - psi_il } else { zero };
        let b = if psi_kj > zero { zero - psi_kj } else { zero };
        let mut m = psi_ij;
        if a > m {
            m = a;
        }
        if b > m {
            m = b;
        }
        m
    } else {
        zero
    }
}

/// The evolving difference matrix Ψ = W − Λ plus the row/column
/// permutations introduced by reordering. Entries are stored in original
/// index space; the permutations only affect sweep order, and recorded
/// steps always refer to original indices.
#[derive(Debug, Clone)]
pub struct DifferenceMatrix<T> {
    n: usize,
    psi: Vec<T>,
    labels: Vec<u64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
}

impl<T: Weight> DifferenceMatrix<T> {
    /// Ψ = W − Λ. The graphs must share their node set and margins
    /// (within `margin_tol`); Λ entries are nonnegative by construction.
    pub fn new(
        w: &WeightedDigraph<T>,
        lambda: &WeightedDigraph<T>,
        margin_tol: T,
    ) -> Result<Self, RewireError<T>> {
        if w.n() != lambda.n() || w.labels() != lambda.labels() {
            return Err(RewireError::ShapeMismatch(
                "matrices are over different node sets".into(),
            ));
        }
        let n = w.n();
        let psi: Vec<T> = w
            .weights()
            .iter()
            .zip(lambda.weights())
            .map(|(&a, &b)| a - b)
            .collect();
        for i in 0..n {
            let row_sum = (0..n).fold(T::zero(), |acc, j| acc + psi[i * n + j]);
            if row_sum.abs_val() > margin_tol {
                return Err(RewireError::MarginMismatch {
                    label: w.label_of(i),
                    out: true,
                    difference: row_sum,
                });
            }
            let col_sum = (0..n).fold(T::zero(), |acc, r| acc + psi[r * n + i]);
            if col_sum.abs_val() > margin_tol {
                return Err(RewireError::MarginMismatch {
                    label: w.label_of(i),
                    out: false,
                    difference: col_sum,
                });
            }
        }
        Ok(DifferenceMatrix {
            n,
            psi,
            labels: w.labels().to_vec(),
            row_perm: (0..n).collect(),
            col_perm: (0..n).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// Entry at original indices.
    pub fn psi(&self, i: usize, j: usize) -> T {
        self.psi[i * self.n + j]
    }

    fn at(&self, pi: usize, pj: usize) -> T {
        self.psi[self.row_perm[pi] * self.n + self.col_perm[pj]]
    }

    fn add_at(&mut self, pi: usize, pj: usize, v: T) {
        let idx = self.row_perm[pi] * self.n + self.col_perm[pj];
        self.psi[idx] += v;
    }

    pub fn max_abs(&self) -> T {
        self.psi
            .iter()
            .fold(T::zero(), |acc, &v| if v.abs_val() > acc { v.abs_val() } else { acc })
    }

    /// Reorder before sweeping position row `pi`: among remaining sweepable
    /// rows, front the one with the largest L1 mass over sweepable columns,
    /// then sort those columns by the fronted row's magnitudes, descending.
    /// Ties keep their current order, so a flat matrix is left untouched.
    pub fn reorder_row(&mut self, pi: usize) {
        let n = self.n;
        if n < 2 || pi + 1 >= n {
            return;
        }
        let sweep_cols = n - 1;
        let mut best = pi;
        let mut best_norm = T::zero();
        for cand in pi..n - 1 {
            let norm = (0..sweep_cols).fold(T::zero(), |acc, pj| {
                acc + self.at(cand, pj).abs_val()
            });
            if norm > best_norm {
                best_norm = norm;
                best = cand;
            }
        }
        self.row_perm.swap(pi, best);
        let row = self.row_perm[pi];
        let mut cols: Vec<usize> = self.col_perm[..sweep_cols].to_vec();
        cols.sort_by(|&ca, &cb| {
            let ma = self.psi[row * n + ca].abs_val();
            let mb = self.psi[row * n + cb].abs_val();
            mb.partial_cmp(&ma).unwrap_or(std::cmp::Ordering::Equal)
        });
        self.col_perm[..sweep_cols].copy_from_slice(&cols);
    }

    /// Clear position cell `(pi, pj)` against partners below and to the
    /// right, appending each executed transfer to `steps` in original
    /// indices. Transfers with negative sign are recorded with their cell
    /// pairs relabeled so the stored amount is always positive.
    pub fn rewire_cell(
        &mut self,
        pi: usize,
        pj: usize,
        zero_tol: T,
        steps: &mut Vec<RewiringStep<T>>,
    ) -> Result<(), RewireError<T>> {
        let n = self.n;
        'partners: for pk in pi + 1..n {
            for pl in pj + 1..n {
                let current = self.at(pi, pj);
                if current.abs_val() <= zero_tol {
                    break 'partners;
                }
                let dw = delta_w(current, self.at(pk, pl), self.at(pi, pl), self.at(pk, pj));
                if dw == T::zero() {
                    continue;
                }
                self.add_at(pi, pj, T::zero() - dw);
                self.add_at(pk, pl, T::zero() - dw);
                self.add_at(pi, pl, dw);
                self.add_at(pk, pj, dw);
                let (oi, oj) = (self.row_perm[pi], self.col_perm[pj]);
                let (ok, ol) = (self.row_perm[pk], self.col_perm[pl]);
                if dw > T::zero() {
                    steps.push(RewiringStep::new(oi, oj, ok, ol, dw));
                } else {
                    steps.push(RewiringStep::new(oi, ol, ok, oj, T::zero() - dw));
                }
            }
        }
        let residual = self.at(pi, pj);
        if residual.abs_val() > zero_tol {
            return Err(RewireError::Stalled {
                src: self.labels[self.row_perm[pi]],
                dst: self.labels[self.col_perm[pj]],
                residual,
            });
        }
        Ok(())
    }
}

/// Ordered list of transfers produced by a sweep; replaying them onto the
/// source graph reproduces the target matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RewiringRecord<T> {
    pub steps: Vec<RewiringStep<T>>,
}

impl<T> RewiringRecord<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Compute the transfer sequence turning `w` into `lambda`.
///
/// Sweeps the first n−1 rows and columns (the last ones are forced by the
/// zero margins); with `reorder` set, rows and columns are magnitude-
/// fronted before each row. On success every Ψ entry is within `zero_tol`
/// of zero.
pub fn sweep<T: Weight>(
    w: &WeightedDigraph<T>,
    lambda: &WeightedDigraph<T>,
    reorder: bool,
    zero_tol: T,
    margin_tol: T,
) -> Result<RewiringRecord<T>, RewireError<T>> {
    let mut dm = DifferenceMatrix::new(w, lambda, margin_tol)?;
    let n = dm.n();
    let mut steps = Vec::new();
    if n > 1 {
        for pi in 0..n - 1 {
            if reorder {
                dm.reorder_row(pi);
            }
            for pj in 0..n - 1 {
                dm.rewire_cell(pi, pj, zero_tol, &mut steps)?;
            }
        }
    }
    // The final row and column must have vanished along with everything
    // else; a residual here means the margin precondition was broken.
    let worst = dm.max_abs();
    if worst > zero_tol {
        for i in 0..n {
            for j in 0..n {
                if dm.psi(i, j).abs_val() > zero_tol {
                    return Err(RewireError::Stalled {
                        src: w.label_of(i),
                        dst: w.label_of(j),
                        residual: dm.psi(i, j),
                    });
                }
            }
        }
    }
    Ok(RewiringRecord { steps })
}

/// Apply a record to a graph. `step_tol` is the donor-cell slack allowed
/// per step (zero for integer records, the edge threshold for floats).
pub fn replay<T: Weight>(
    w: &WeightedDigraph<T>,
    record: &RewiringRecord<T>,
    step_tol: T,
) -> Result<WeightedDigraph<T>, RewireError<T>> {
    let mut g = w.clone();
    for (idx, step) in record.steps.iter().enumerate() {
        g.apply_step(step, step_tol)
            .map_err(|e| RewireError::CorruptRecord { step: idx, source: e })?;
    }
    Ok(g)
}

/// One logged point of a rewiring trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    /// Number of steps applied so far (0 for the initial state).
    pub step: usize,
    /// The most recent transfer, absent on the initial row.
    pub entry: Option<RewiringStep<T>>,
    pub quad: AssortativityQuad<T>,
}

/// Replay while logging the four coefficients every `stride` steps (plus
/// the initial state and the final step). Coefficients advance through the
/// O(1) incremental update, not by recomputation.
pub fn replay_with_trace<T: Real>(
    w: &WeightedDigraph<T>,
    record: &RewiringRecord<T>,
    stride: usize,
    step_tol: T,
) -> Result<(WeightedDigraph<T>, Vec<TraceRow<T>>), RewireError<T>> {
    let stride = stride.max(1);
    let mut g = w.clone();
    let mut tracker = TrajectoryTracker::new(&g).map_err(|_| RewireError::Graph(GraphError::EmptyGraph))?;
    let mut rows = vec![TraceRow {
        step: 0,
        entry: None,
        quad: tracker.quad(),
    }];
    let total = record.steps.len();
    for (idx, step) in record.steps.iter().enumerate() {
        g.apply_step(step, step_tol)
            .map_err(|e| RewireError::CorruptRecord { step: idx, source: e })?;
        tracker.apply(step);
        let count = idx + 1;
        if count % stride == 0 || count == total {
            rows.push(TraceRow {
                step: count,
                entry: Some(*step),
                quad: tracker.quad(),
            });
        }
    }
    Ok((g, rows))
}

/// Record CSV (`step,i,j,k,l,dw`), node columns in original labels.
pub fn write_record_csv<T: Weight, W: Write>(
    out: &mut W,
    labels: &[u64],
    record: &RewiringRecord<T>,
) -> io::Result<()> {
    writeln!(out, "step,i,j,k,l,dw")?;
    for (idx, s) in record.steps.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            idx + 1,
            labels[s.i],
            labels[s.j],
            labels[s.k],
            labels[s.l],
            s.dw
        )?;
    }
    Ok(())
}

/// Read a record CSV back against the graph it was produced for.
pub fn read_record_csv<T, R: BufRead>(
    input: R,
    g: &WeightedDigraph<T>,
) -> Result<RewiringRecord<T>, RewireError<T>>
where
    T: Weight + FromStr,
{
    let mut steps = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "step,i,j,k,l,dw" {
                return Err(RewireError::BadRow {
                    row,
                    reason: format!("expected header 'step,i,j,k,l,dw', got '{trimmed}'"),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 6 {
            return Err(RewireError::BadRow {
                row,
                reason: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let node = |field: &str| -> Result<usize, RewireError<T>> {
            let label: u64 = field.trim().parse().map_err(|_| RewireError::BadRow {
                row,
                reason: format!("bad node label '{field}'"),
            })?;
            g.index_of(label).ok_or_else(|| RewireError::BadRow {
                row,
                reason: format!("unknown node label {label}"),
            })
        };
        let (i, j, k, l) = (
            node(fields[1])?,
            node(fields[2])?,
            node(fields[3])?,
            node(fields[4])?,
        );
        let dw: T = fields[5].trim().parse().map_err(|_| RewireError::BadRow {
            row,
            reason: format!("bad transfer amount '{}'", fields[5]),
        })?;
        if !(dw > T::zero()) {
            return Err(RewireError::BadRow {
                row,
                reason: "transfer amount must be positive".into(),
            });
        }
        steps.push(RewiringStep::new(i, j, k, l, dw));
    }
    Ok(RewiringRecord { steps })
}

/// Trace CSV (`step,i,j,k,l,dw,r11,r12,r21,r22`); undefined coefficients
/// and the initial row's step fields are left empty.
pub fn write_trace_csv<T: Real, W: Write>(
    out: &mut W,
    labels: &[u64],
    rows: &[TraceRow<T>],
) -> io::Result<()> {
    writeln!(out, "step,i,j,k,l,dw,r11,r12,r21,r22")?;
    for row in rows {
        match &row.entry {
            Some(s) => write!(
                out,
                "{},{},{},{},{},{}",
                row.step, labels[s.i], labels[s.j], labels[s.k], labels[s.l], s.dw
            )?,
            None => write!(out, "{},,,,,", row.step)?,
        }
        for r in [row.quad.r11(), row.quad.r12(), row.quad.r21(), row.quad.r22()] {
            match r {
                Ok(v) => write!(out, ",{v}")?,
                Err(_) => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read back the step counts and coefficient columns of a trace CSV
/// (step fields are skipped; absent coefficients come back as `None`).
pub fn read_trace_quads<T, R: BufRead>(
    input: R,
) -> Result<Vec<(usize, [Option<T>; 4])>, RewireError<T>>
where
    T: Real + FromStr,
{
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        let trimmed = line.trim_end();
        if idx == 0 {
            if trimmed != "step,i,j,k,l,dw,r11,r12,r21,r22" {
                return Err(RewireError::BadRow {
                    row,
                    reason: "unexpected trace header".into(),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 10 {
            return Err(RewireError::BadRow {
                row,
                reason: format!("expected 10 fields, got {}", fields.len()),
            });
        }
        let step: usize = fields[0].parse().map_err(|_| RewireError::BadRow {
            row,
            reason: format!("bad step count '{}'", fields[0]),
        })?;
        let mut quad = [None, None, None, None];
        for (slot, field) in fields[6..].iter().enumerate() {
            if !field.is_empty() {
                let v: T = field.parse().map_err(|_| RewireError::BadRow {
                    row,
                    reason: format!("bad coefficient '{field}'"),
                })?;
                quad[slot] = Some(v);
            }
        }
        rows.push((step, quad));
    }
    Ok(rows)
}
