//! Dense weighted directed graphs, node strengths, and the four-cell weight
//! transfer that all rewiring is built from.
//!
//! Storage is a row-major `n x n` matrix: the toolkit targets networks of at
//! most a few thousand nodes where the optimization and rewiring passes touch
//! most cells anyway, so adjacency lists would only add indirection. Node
//! identities (`u64` labels) exist purely at the boundary — files and reports
//! speak labels, everything internal speaks matrix indices.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use crate::num::{Real, Weight};

/// Which strength a node contributes: `Out` is row sums (type 1 in reports),
/// `In` is column sums (type 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrengthKind {
    Out,
    In,
}

impl StrengthKind {
    pub const BOTH: [StrengthKind; 2] = [StrengthKind::Out, StrengthKind::In];

    /// 0 for `Out`, 1 for `In`; used to index per-kind arrays.
    pub fn index(self) -> usize {
        match self {
            StrengthKind::Out => 0,
            StrengthKind::In => 1,
        }
    }

    /// Numeric code used in coefficient names (`r11` … `r22`): 1 = out, 2 = in.
    pub fn code(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(StrengthKind::Out),
            2 => Some(StrengthKind::In),
            _ => None,
        }
    }
}

impl fmt::Display for StrengthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrengthKind::Out => write!(f, "out"),
            StrengthKind::In => write!(f, "in"),
        }
    }
}

#[derive(Debug)]
pub enum GraphError {
    /// Edge list entry with weight <= 0. `row` is 1-based (file line for CSV
    /// input, list position otherwise).
    NonpositiveWeight { row: usize },
    /// Unparseable CSV line.
    MalformedRow { row: usize, reason: String },
    /// Label list passed to `from_dense` repeats a node id.
    DuplicateLabel { label: u64 },
    /// Label count does not match the matrix dimension.
    LabelMismatch { labels: usize, nodes: usize },
    /// Dense matrix entry below zero.
    NegativeEntry { i: usize, j: usize },
    /// No edges: total weight is zero, so strengths are undefined.
    EmptyGraph,
    /// Applying a rewiring step would push a cell negative; reported by label.
    NegativeStep { src: u64, dst: u64 },
    /// Step indices fall outside the matrix.
    StepOutOfRange { index: usize, nodes: usize },
    Io(io::Error),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::NonpositiveWeight { row } => {
                write!(f, "row {row}: edge weight must be positive")
            }
            GraphError::MalformedRow { row, reason } => {
                write!(f, "row {row}: {reason}")
            }
            GraphError::DuplicateLabel { label } => {
                write!(f, "duplicate node label {label}")
            }
            GraphError::LabelMismatch { labels, nodes } => {
                write!(f, "{labels} labels for a {nodes}-node matrix")
            }
            GraphError::NegativeEntry { i, j } => {
                write!(f, "matrix entry ({i}, {j}) is negative")
            }
            GraphError::EmptyGraph => write!(f, "graph has no edges"),
            GraphError::NegativeStep { src, dst } => {
                write!(f, "step would make edge {src} -> {dst} negative")
            }
            GraphError::StepOutOfRange { index, nodes } => {
                write!(f, "step index {index} out of range for {nodes} nodes")
            }
            GraphError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl Error for GraphError {}

impl From<io::Error> for GraphError {
    fn from(e: io::Error) -> Self {
        GraphError::Io(e)
    }
}

/// One four-cell weight transfer: move `dw` from edges `(i, j)` and `(k, l)`
/// onto `(i, l)` and `(k, j)`. Indices are matrix positions, not labels.
/// Row sums and column sums are unchanged by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewiringStep<T> {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub dw: T,
}

impl<T: Weight> RewiringStep<T> {
    pub fn new(i: usize, j: usize, k: usize, l: usize, dw: T) -> Self {
        RewiringStep { i, j, k, l, dw }
    }
}

/// Weighted directed graph on `n` nodes with dense nonnegative weights.
///
/// Values are immutable after construction except through [`apply_step`],
/// which is the only mutation the rewiring machinery needs.
///
/// [`apply_step`]: WeightedDigraph::apply_step
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph<T> {
    n: usize,
    w: Vec<T>,
    labels: Vec<u64>,
}

impl<T: Weight> WeightedDigraph<T> {
    /// Build from `(src, dst, weight)` triples. Labels may appear in any
    /// order; repeated pairs accumulate weight; self-loops are allowed.
    /// Node labels end up sorted ascending.
    pub fn from_edge_list(rows: &[(u64, u64, T)]) -> Result<Self, GraphError> {
        let mut index: BTreeMap<u64, usize> = BTreeMap::new();
        for &(src, dst, _) in rows {
            index.entry(src).or_insert(0);
            index.entry(dst).or_insert(0);
        }
        let labels: Vec<u64> = index.keys().copied().collect();
        for (pos, label) in labels.iter().enumerate() {
            index.insert(*label, pos);
        }
        let n = labels.len();
        let mut w = vec![T::zero(); n * n];
        for (pos, &(src, dst, weight)) in rows.iter().enumerate() {
            if !(weight > T::zero()) {
                return Err(GraphError::NonpositiveWeight { row: pos + 1 });
            }
            let i = index[&src];
            let j = index[&dst];
            w[i * n + j] += weight;
        }
        Ok(WeightedDigraph { n, w, labels })
    }

    /// Wrap an existing row-major matrix. Entries must be nonnegative and
    /// `labels` must be distinct with one label per row.
    pub fn from_dense(labels: Vec<u64>, w: Vec<T>) -> Result<Self, GraphError> {
        let n = labels.len();
        if w.len() != n * n {
            return Err(GraphError::LabelMismatch {
                labels: n,
                nodes: (w.len() as f64).sqrt() as usize,
            });
        }
        let mut seen = BTreeMap::new();
        for &label in &labels {
            if seen.insert(label, ()).is_some() {
                return Err(GraphError::DuplicateLabel { label });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if w[i * n + j] < T::zero() {
                    return Err(GraphError::NegativeEntry { i, j });
                }
            }
        }
        Ok(WeightedDigraph { n, w, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn label_of(&self, index: usize) -> u64 {
        self.labels[index]
    }

    pub fn index_of(&self, label: u64) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.w[i * self.n + j]
    }

    /// Full row-major weight matrix.
    pub fn weights(&self) -> &[T] {
        &self.w
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn out_strengths(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, &v| acc + v))
            .collect()
    }

    pub fn in_strengths(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                s[j] += self.w[i * self.n + j];
            }
        }
        s
    }

    pub fn total_weight(&self) -> T {
        self.w.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    /// Edge count with strictly positive weight. Use [`nnz_tol`] after
    /// floating-point arithmetic has touched the matrix.
    ///
    /// [`nnz_tol`]: WeightedDigraph::nnz_tol
    pub fn nnz(&self) -> usize {
        self.w.iter().filter(|&&v| v > T::zero()).count()
    }

    /// Edge count treating magnitudes at most `tol` as absent.
    pub fn nnz_tol(&self, tol: T) -> usize {
        self.w.iter().filter(|&&v| v > tol).count()
    }

    /// Iterate strictly positive cells as `(i, j, w)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            (0..self.n).filter_map(move |j| {
                let v = self.w[i * self.n + j];
                (v > T::zero()).then_some((i, j, v))
            })
        })
    }

    /// Labelled edge triples sorted by `(src, dst)` label, dropping cells
    /// with weight at most `tol`.
    pub fn to_edge_list(&self, tol: T) -> Vec<(u64, u64, T)> {
        let mut rows: Vec<(u64, u64, T)> = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.w[i * self.n + j];
                if v > tol {
                    rows.push((self.labels[i], self.labels[j], v));
                }
            }
        }
        rows.sort_by_key(|&(s, d, _)| (s, d));
        rows
    }

    /// Apply one weight transfer in place. `dw = 0` is a no-op. The two
    /// donor cells must hold at least `dw - tol`; otherwise the offending
    /// cell is reported by label and the graph is left untouched.
    pub fn apply_step(&mut self, step: &RewiringStep<T>, tol: T) -> Result<(), GraphError> {
        let n = self.n;
        for &idx in &[step.i, step.j, step.k, step.l] {
            if idx >= n {
                return Err(GraphError::StepOutOfRange { index: idx, nodes: n });
            }
        }
        if step.dw == T::zero() {
            return Ok(());
        }
        for (r, c) in [(step.i, step.j), (step.k, step.l)] {
            if self.w[r * n + c] + tol < step.dw {
                return Err(GraphError::NegativeStep {
                    src: self.labels[r],
                    dst: self.labels[c],
                });
            }
        }
        self.w[step.i * n + step.j] -= step.dw;
        self.w[step.k * n + step.l] -= step.dw;
        self.w[step.i * n + step.l] += step.dw;
        self.w[step.k * n + step.j] += step.dw;
        // Clamp donor cells that dipped below zero within the tolerance, so
        // downstream nonnegativity invariants hold exactly.
        for (r, c) in [(step.i, step.j), (step.k, step.l)] {
            if self.w[r * n + c] < T::zero() {
                self.w[r * n + c] = T::zero();
            }
        }
        Ok(())
    }

    /// Copy without nodes whose out- and in-strength are both zero.
    /// Surviving nodes keep their labels.
    pub fn remove_isolated_nodes(&self) -> Self {
        let s_out = self.out_strengths();
        let s_in = self.in_strengths();
        let keep: Vec<usize> = (0..self.n)
            .filter(|&i| s_out[i] > T::zero() || s_in[i] > T::zero())
            .collect();
        let m = keep.len();
        let mut w = vec![T::zero(); m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                w[a * m + b] = self.w[i * self.n + j];
            }
        }
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        WeightedDigraph { n: m, w, labels }
    }
}

impl<T: Real> WeightedDigraph<T> {
    /// Strength vectors plus the weighted means and standard deviations that
    /// the assortativity formulas are built from.
    pub fn strength_profile(&self) -> Result<StrengthProfile<T>, GraphError> {
        StrengthProfile::new(self)
    }
}

/// Node strengths together with edge-weighted summary statistics.
///
/// Every edge `(i, j, w)` contributes `w` to the total `tau`. Averaging the
/// source-side strength of type `a` over edges collapses to a single sum
/// weighted by out-strength, because node `i` appears as a source with total
/// weight `s_out[i]`; target-side statistics collapse the same way onto
/// in-strengths. Standard deviations are the matching weighted second
/// moments.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthProfile<T> {
    s_out: Vec<T>,
    s_in: Vec<T>,
    tau: T,
    src_mean: [T; 2],
    trg_mean: [T; 2],
    src_sd: [T; 2],
    trg_sd: [T; 2],
}

impl<T: Real> StrengthProfile<T> {
    fn new(g: &WeightedDigraph<T>) -> Result<Self, GraphError> {
        let s_out = g.out_strengths();
        let s_in = g.in_strengths();
        let tau = s_out.iter().fold(T::zero(), |acc, &v| acc + v);
        if !(tau > T::zero()) {
            return Err(GraphError::EmptyGraph);
        }
        let strengths = [&s_out, &s_in];
        let mut src_mean = [T::zero(); 2];
        let mut trg_mean = [T::zero(); 2];
        let mut src_sd = [T::zero(); 2];
        let mut trg_sd = [T::zero(); 2];
        for kind in 0..2 {
            let s = strengths[kind];
            let mut m_src = T::zero();
            let mut m_trg = T::zero();
            for i in 0..s.len() {
                m_src = m_src + s_out[i] * s[i];
                m_trg = m_trg + s_in[i] * s[i];
            }
            m_src = m_src / tau;
            m_trg = m_trg / tau;
            let mut v_src = T::zero();
            let mut v_trg = T::zero();
            for i in 0..s.len() {
                let d_src = s[i] - m_src;
                let d_trg = s[i] - m_trg;
                v_src = v_src + s_out[i] * d_src * d_src;
                v_trg = v_trg + s_in[i] * d_trg * d_trg;
            }
            src_mean[kind] = m_src;
            trg_mean[kind] = m_trg;
            src_sd[kind] = (v_src / tau).sqrt();
            trg_sd[kind] = (v_trg / tau).sqrt();
        }
        Ok(StrengthProfile {
            s_out,
            s_in,
            tau,
            src_mean,
            trg_mean,
            src_sd,
            trg_sd,
        })
    }

    pub fn n(&self) -> usize {
        self.s_out.len()
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn out(&self) -> &[T] {
        &self.s_out
    }

    pub fn r#in(&self) -> &[T] {
        &self.s_in
    }

    pub fn strengths(&self, kind: StrengthKind) -> &[T] {
        match kind {
            StrengthKind::Out => &self.s_out,
            StrengthKind::In => &self.s_in,
        }
    }

    pub fn strength(&self, kind: StrengthKind, node: usize) -> T {
        self.strengths(kind)[node]
    }

    /// Edge-weighted mean of type-`kind` strength over edge sources.
    pub fn src_mean(&self, kind: StrengthKind) -> T {
        self.src_mean[kind.index()]
    }

    /// Edge-weighted mean of type-`kind` strength over edge targets.
    pub fn trg_mean(&self, kind: StrengthKind) -> T {
        self.trg_mean[kind.index()]
    }

    pub fn src_sd(&self, kind: StrengthKind) -> T {
        self.src_sd[kind.index()]
    }

    pub fn trg_sd(&self, kind: StrengthKind) -> T {
        self.trg_sd[kind.index()]
    }

    /// Deviation of node `i`'s type-`kind` strength from the source-side mean.
    pub fn src_dev(&self, kind: StrengthKind, i: usize) -> T {
        self.strength(kind, i) - self.src_mean(kind)
    }

    pub fn trg_dev(&self, kind: StrengthKind, j: usize) -> T {
        self.strength(kind, j) - self.trg_mean(kind)
    }

    /// A standard deviation is treated as zero when it is negligible against
    /// the matching mean; exact-degenerate cases (all contributing strengths
    /// equal) produce an exact zero anyway, the scale factor only guards
    /// against rounding in near-degenerate ones.
    pub fn sd_is_zero(sd: T, mean: T) -> bool {
        sd <= T::c(1e-12) * (T::one() + mean.abs_val())
    }
}

/// Write `g` as a `src,dst,weight` CSV, rows sorted by `(src, dst)` label,
/// skipping cells with weight at most `tol`.
pub fn write_edge_list_csv<T: Weight, W: Write>(
    g: &WeightedDigraph<T>,
    out: &mut W,
    tol: T,
) -> io::Result<()> {
    writeln!(out, "src,dst,weight")?;
    for (src, dst, w) in g.to_edge_list(tol) {
        writeln!(out, "{src},{dst},{w}")?;
    }
    Ok(())
}

/// Read a `src,dst,weight` CSV. Malformed or nonpositive rows are rejected
/// with their 1-based file line number (the header is line 1).
pub fn read_edge_list_csv<T, R: BufRead>(input: R) -> Result<WeightedDigraph<T>, GraphError>
where
    T: Weight + FromStr,
{
    let mut rows: Vec<(u64, u64, T)> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "src,dst,weight" {
                return Err(GraphError::MalformedRow {
                    row,
                    reason: format!("expected header 'src,dst,weight', got '{trimmed}'"),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(GraphError::MalformedRow {
                row,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let src: u64 = fields[0].trim().parse().map_err(|_| GraphError::MalformedRow {
            row,
            reason: format!("bad source id '{}'", fields[0]),
        })?;
        let dst: u64 = fields[1].trim().parse().map_err(|_| GraphError::MalformedRow {
            row,
            reason: format!("bad target id '{}'", fields[1]),
        })?;
        let w: T = fields[2].trim().parse().map_err(|_| GraphError::MalformedRow {
            row,
            reason: format!("bad weight '{}'", fields[2]),
        })?;
        if !(w > T::zero()) {
            return Err(GraphError::NonpositiveWeight { row });
        }
        rows.push((src, dst, w));
    }
    if rows.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    Ok(WeightedDigraph::from_edge_list(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> WeightedDigraph<f64> {
        WeightedDigraph::from_edge_list(&[(1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn single_edge_matrix() {
        let g = WeightedDigraph::from_edge_list(&[(7, 3, 2.5)]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.labels(), &[3, 7]);
        assert_eq!(g.weight(1, 0), 2.5);
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.nnz(), 1);
    }

    #[test]
    fn duplicate_rows_accumulate() {
        let g = WeightedDigraph::from_edge_list(&[(1, 2, 1.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(g.weight(0, 1), 1.5);
        assert_eq!(g.nnz(), 1);
    }

    #[test]
    fn self_loop_counts_both_strengths() {
        let g = WeightedDigraph::from_edge_list(&[(4, 4, 2.0), (4, 5, 1.0)]).unwrap();
        assert_eq!(g.out_strengths(), vec![3.0, 0.0]);
        assert_eq!(g.in_strengths(), vec![2.0, 1.0]);
        assert_eq!(g.total_weight(), 3.0);
    }

    #[test]
    fn nonpositive_weight_reports_row() {
        let err = WeightedDigraph::from_edge_list(&[(1, 2, 1.0), (2, 3, 0.0)]).unwrap_err();
        match err {
            GraphError::NonpositiveWeight { row } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn chain_profile_by_hand() {
        // Edges 1->2 and 2->3, unit weights. s_out = (1,1,0), s_in = (0,1,1),
        // tau = 2. Source-side out-strength mean: (1*1 + 1*1)/2 = 1, sd 0.
        // Source-side in-strength mean: (1*0 + 1*1)/2 = 0.5, sd 0.5.
        let p = chain().strength_profile().unwrap();
        assert_eq!(p.tau(), 2.0);
        assert_eq!(p.out(), &[1.0, 1.0, 0.0]);
        assert_eq!(p.r#in(), &[0.0, 1.0, 1.0]);
        assert_eq!(p.src_mean(StrengthKind::Out), 1.0);
        assert_eq!(p.src_sd(StrengthKind::Out), 0.0);
        assert_eq!(p.src_mean(StrengthKind::In), 0.5);
        assert_eq!(p.src_sd(StrengthKind::In), 0.5);
        assert_eq!(p.trg_mean(StrengthKind::Out), 0.5);
        assert_eq!(p.trg_sd(StrengthKind::Out), 0.5);
        assert_eq!(p.trg_mean(StrengthKind::In), 1.0);
        assert_eq!(p.trg_sd(StrengthKind::In), 0.0);
    }

    #[test]
    fn self_loop_only_profile() {
        // One self-loop of weight 3: every statistic concentrates on it.
        let g = WeightedDigraph::from_edge_list(&[(9, 9, 3.0)]).unwrap();
        let p = g.strength_profile().unwrap();
        assert_eq!(p.tau(), 3.0);
        for kind in StrengthKind::BOTH {
            assert_eq!(p.src_mean(kind), 3.0);
            assert_eq!(p.trg_mean(kind), 3.0);
            assert_eq!(p.src_sd(kind), 0.0);
            assert_eq!(p.trg_sd(kind), 0.0);
        }
    }

    #[test]
    fn profile_sums_match_total() {
        let rows: Vec<(u64, u64, f64)> = (0..40)
            .map(|k| (k % 7, (3 * k + 1) % 11, 0.25 + (k as f64) * 0.1))
            .collect();
        let g = WeightedDigraph::from_edge_list(&rows).unwrap();
        let p = g.strength_profile().unwrap();
        let out_sum: f64 = p.out().iter().sum();
        let in_sum: f64 = p.r#in().iter().sum();
        assert!((out_sum - p.tau()).abs() < 1e-12);
        assert!((in_sum - p.tau()).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_has_no_profile() {
        let g: WeightedDigraph<f64> = WeightedDigraph::from_edge_list(&[]).unwrap();
        assert!(matches!(g.strength_profile(), Err(GraphError::EmptyGraph)));
    }

    #[test]
    fn apply_step_swaps_edges_entirely() {
        // dw equals both donor weights, so the donor edges vanish and the two
        // diagonal cells appear: edge count is preserved here.
        let mut g =
            WeightedDigraph::from_edge_list(&[(1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        let before = g.nnz();
        g.apply_step(&RewiringStep::new(0, 1, 2, 3, 1.0), 0.0).unwrap();
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(2, 3), 0.0);
        assert_eq!(g.weight(0, 3), 1.0);
        assert_eq!(g.weight(2, 1), 1.0);
        assert_eq!(g.nnz(), before);
    }

    #[test]
    fn apply_step_zero_is_identity() {
        let mut g = chain();
        let copy = g.clone();
        g.apply_step(&RewiringStep::new(0, 1, 1, 2, 0.0), 0.0).unwrap();
        assert_eq!(g, copy);
    }

    #[test]
    fn apply_step_preserves_strengths() {
        let mut g: WeightedDigraph<f64> = WeightedDigraph::from_edge_list(&[
            (1, 2, 2.0),
            (2, 3, 1.5),
            (3, 1, 0.5),
            (1, 3, 1.0),
        ])
        .unwrap();
        let s_out = g.out_strengths();
        let s_in = g.in_strengths();
        g.apply_step(&RewiringStep::new(0, 1, 1, 2, 0.75), 0.0).unwrap();
        let s_out2 = g.out_strengths();
        let s_in2 = g.in_strengths();
        for i in 0..g.n() {
            assert!((s_out[i] - s_out2[i]).abs() < 1e-12);
            assert!((s_in[i] - s_in2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_step_rejects_overdraw_by_label() {
        let mut g = chain();
        let err = g
            .apply_step(&RewiringStep::new(0, 1, 1, 2, 1.5), 0.0)
            .unwrap_err();
        match err {
            GraphError::NegativeStep { src, dst } => {
                assert_eq!((src, dst), (1, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
        // Failed step must leave the graph untouched.
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 2), 1.0);
    }

    #[test]
    fn integer_steps_stay_exact() {
        let mut g: WeightedDigraph<i64> =
            WeightedDigraph::from_edge_list(&[(1, 2, 5), (3, 4, 2)]).unwrap();
        g.apply_step(&RewiringStep::new(0, 1, 2, 3, 2), 0).unwrap();
        assert_eq!(g.weight(0, 1), 3);
        assert_eq!(g.weight(2, 3), 0);
        assert_eq!(g.weight(0, 3), 2);
        assert_eq!(g.weight(2, 1), 2);
    }

    #[test]
    fn isolated_nodes_dropped_labels_kept() {
        let mut w = vec![0.0; 9];
        w[0 * 3 + 2] = 1.0; // 10 -> 30; node 20 isolated
        let g = WeightedDigraph::from_dense(vec![10, 20, 30], w).unwrap();
        let h = g.remove_isolated_nodes();
        assert_eq!(h.n(), 2);
        assert_eq!(h.labels(), &[10, 30]);
        assert_eq!(h.weight(0, 1), 1.0);
    }

    #[test]
    fn remove_isolated_is_identity_when_all_active() {
        let g = chain();
        assert_eq!(g.remove_isolated_nodes(), g);
    }

    #[test]
    fn csv_roundtrip_and_sorting() {
        let g = WeightedDigraph::from_edge_list(&[
            (5, 1, 0.5),
            (1, 5, 1.25),
            (1, 1, 2.0),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_edge_list_csv(&g, &mut buf, 0.0).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("src,dst,weight"));
        assert_eq!(lines.next(), Some("1,1,2"));
        assert_eq!(lines.next(), Some("1,5,1.25"));
        assert_eq!(lines.next(), Some("5,1,0.5"));
        let back: WeightedDigraph<f64> = read_edge_list_csv(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "src,dst,weight\n1,2,1.0\n3,oops,2.0\n";
        let err = read_edge_list_csv::<f64, _>(text.as_bytes()).unwrap_err();
        match err {
            GraphError::MalformedRow { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected error {other:?}"),
        }
        let text2 = "src,dst,weight\n1,2,-1.0\n";
        let err2 = read_edge_list_csv::<f64, _>(text2.as_bytes()).unwrap_err();
        match err2 {
            GraphError::NonpositiveWeight { row } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let text = "source,target,w\n1,2,1.0\n";
        let err = read_edge_list_csv::<f64, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::MalformedRow { row: 1, .. }));
    }

    #[test]
    fn edge_list_tolerance_hides_residue() {
        let mut w = vec![0.0; 4];
        w[1] = 1.0;
        w[2] = 5e-10; // numerical residue, below the absence threshold
        let g = WeightedDigraph::from_dense(vec![1, 2], w).unwrap();
        assert_eq!(g.to_edge_list(1e-9).len(), 1);
        assert_eq!(g.nnz_tol(1e-9), 1);
        assert_eq!(g.nnz(), 2);
    }
}
