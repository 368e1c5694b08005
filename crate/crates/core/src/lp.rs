//! Dense two-phase simplex for equality-constrained problems with finite
//! variable bounds:
//!
//! ```text
//! minimize    c . x
//! subject to  A x = b,   l <= x <= u   (l, u finite)
//! ```
//!
//! This shape is exactly what the target-matrix construction produces:
//! margin and correlation rows are equalities, and every weight variable is
//! boxed. The solver keeps an explicit basis inverse, prices with the
//! steepest reduced cost, and falls back to Bland's rule after a run of
//! degenerate pivots so it cannot cycle. All tie-breaks are by lowest index,
//! making the returned solution a deterministic function of the input.

use std::error::Error;
use std::fmt;

use crate::num::Real;

/// Equality rows are sparse `(column, coefficient)` lists; bounds are dense
/// and must be finite with `lower <= upper` (equal bounds pin a variable).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub rows: Vec<Vec<(usize, T)>>,
    pub rhs: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> LinearProgram<T> {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Invalid(format!(
                "bounds cover {} / {} variables, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.rhs.len() != self.rows.len() {
            return Err(LpError::Invalid(format!(
                "{} right-hand sides for {} rows",
                self.rhs.len(),
                self.rows.len()
            )));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(LpError::Invalid(format!("variable {j} has non-finite bounds")));
            }
            if !(self.lower[j] <= self.upper[j]) {
                return Err(LpError::Invalid(format!(
                    "variable {j} has empty bound interval"
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                if j >= n {
                    return Err(LpError::Invalid(format!(
                        "row {r} references variable {j} of {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions<T> {
    /// Residual level below which the phase-1 optimum counts as feasible.
    pub feas_tol: T,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: T,
    pub max_iter: usize,
    /// Rebuild the basis inverse after this many pivots.
    pub refactor_every: usize,
    /// Consecutive non-improving iterations before switching to Bland's rule.
    pub stall_window: usize,
}

impl<T: Real> Default for SimplexOptions<T> {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: T::c(1e-7),
            opt_tol: T::c(1e-9),
            max_iter: 1_000_000,
            refactor_every: 128,
            stall_window: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, objective: T },
    Infeasible,
}

#[derive(Debug)]
pub enum LpError {
    Invalid(String),
    /// Iteration cap exhausted without reaching an optimum.
    IterationLimit,
    Numerical(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Invalid(msg) => write!(f, "invalid linear program: {msg}"),
            LpError::IterationLimit => write!(f, "simplex stalled: iteration cap exceeded"),
            LpError::Numerical(msg) => write!(f, "simplex numerical failure: {msg}"),
        }
    }
}

impl Error for LpError {}

pub fn solve_lp<T: Real>(
    lp: &LinearProgram<T>,
    opts: &SimplexOptions<T>,
) -> Result<LpOutcome<T>, LpError> {
    lp.validate()?;
    Simplex::new(lp, *opts).run()
}

const UNBASIC: usize = usize::MAX;

struct Simplex<'a, T> {
    lp: &'a LinearProgram<T>,
    opts: SimplexOptions<T>,
    n: usize,
    m: usize,
    /// Column-major copy of the structural matrix.
    cols: Vec<Vec<(usize, T)>>,
    /// Bounds over structural variables then artificials.
    lower: Vec<T>,
    upper: Vec<T>,
    /// +1/-1 diagonal coefficient of each artificial.
    art_sign: Vec<T>,
    x: Vec<T>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    /// Dense m x m basis inverse, row-major.
    binv: Vec<T>,
    pivots: usize,
    iterations: usize,
}

impl<'a, T: Real> Simplex<'a, T> {
    fn new(lp: &'a LinearProgram<T>, opts: SimplexOptions<T>) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut cols = vec![Vec::new(); n];
        for (r, row) in lp.rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((r, v));
            }
        }
        Simplex {
            lp,
            opts,
            n,
            m,
            cols,
            lower: Vec::new(),
            upper: Vec::new(),
            art_sign: vec![T::one(); m],
            x: vec![T::zero(); n + m],
            at_upper: vec![false; n + m],
            basis: Vec::new(),
            basic_row: vec![UNBASIC; n + m],
            binv: vec![T::zero(); m * m],
            pivots: 0,
            iterations: 0,
        }
    }

    fn run(&mut self) -> Result<LpOutcome<T>, LpError> {
        self.init_phase1_basis();
        let mut costs1 = vec![T::zero(); self.n + self.m];
        for c in costs1.iter_mut().skip(self.n) {
            *c = T::one();
        }
        self.iterate(&costs1)?;
        self.refactor()?;
        self.recompute_basic();
        let infeas = (self.n..self.n + self.m)
            .map(|a| if self.x[a] > T::zero() { self.x[a] } else { T::zero() })
            .fold(T::zero(), |acc, v| acc + v);
        if infeas > self.opts.feas_tol {
            return Ok(LpOutcome::Infeasible);
        }
        self.drive_out_artificials()?;
        // Freeze every artificial at zero for phase 2.
        for a in self.n..self.n + self.m {
            self.upper[a] = T::zero();
            if self.basic_row[a] == UNBASIC {
                self.x[a] = T::zero();
            }
        }
        let mut costs2 = vec![T::zero(); self.n + self.m];
        costs2[..self.n].copy_from_slice(&self.lp.objective);
        self.iterate(&costs2)?;
        self.polish()?;
        let x: Vec<T> = self.x[..self.n].to_vec();
        let objective = x
            .iter()
            .zip(&self.lp.objective)
            .fold(T::zero(), |acc, (&xi, &ci)| acc + xi * ci);
        Ok(LpOutcome::Optimal { x, objective })
    }

    fn init_phase1_basis(&mut self) {
        self.lower = self.lp.lower.clone();
        self.upper = self.lp.upper.clone();
        self.lower.extend(std::iter::repeat(T::zero()).take(self.m));
        self.upper
            .extend(std::iter::repeat(T::infinity()).take(self.m));
        for j in 0..self.n {
            self.x[j] = self.lower[j];
            self.at_upper[j] = false;
        }
        self.basis.clear();
        for r in 0..self.m {
            let mut resid = self.lp.rhs[r];
            for &(j, v) in &self.lp.rows[r] {
                resid = resid - v * self.x[j];
            }
            self.art_sign[r] = if resid < T::zero() { -T::one() } else { T::one() };
            let a = self.n + r;
            self.x[a] = resid.abs_val();
            self.basis.push(a);
            self.basic_row[a] = r;
        }
        // B is the +/-1 diagonal of artificial signs, so B^-1 equals it.
        for v in self.binv.iter_mut() {
            *v = T::zero();
        }
        for r in 0..self.m {
            self.binv[r * self.m + r] = self.art_sign[r];
        }
        self.pivots = 0;
    }

    /// d = B^-1 A_j for a structural or artificial column.
    fn ftran(&self, j: usize) -> Vec<T> {
        let mut d = vec![T::zero(); self.m];
        if j < self.n {
            for &(r, v) in &self.cols[j] {
                for i in 0..self.m {
                    d[i] = d[i] + self.binv[i * self.m + r] * v;
                }
            }
        } else {
            let r = j - self.n;
            for i in 0..self.m {
                d[i] = self.binv[i * self.m + r] * self.art_sign[r];
            }
        }
        d
    }

    fn duals(&self, costs: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.m];
        for r in 0..self.m {
            let cb = costs[self.basis[r]];
            if cb != T::zero() {
                for i in 0..self.m {
                    y[i] = y[i] + cb * self.binv[r * self.m + i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[T], costs: &[T]) -> T {
        let mut rc = costs[j];
        for &(r, v) in &self.cols[j] {
            rc = rc - y[r] * v;
        }
        rc
    }

    fn iterate(&mut self, costs: &[T]) -> Result<(), LpError> {
        let mut bland = false;
        let mut stalled = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.opts.max_iter {
                return Err(LpError::IterationLimit);
            }
            if self.pivots >= self.opts.refactor_every {
                self.refactor()?;
                self.recompute_basic();
            }
            let y = self.duals(costs);
            // Price structural columns only; artificials never re-enter.
            let mut entering: Option<(usize, T)> = None;
            for j in 0..self.n {
                if self.basic_row[j] != UNBASIC || !(self.upper[j] > self.lower[j]) {
                    continue;
                }
                let rc = self.reduced_cost(j, &y, costs);
                let gain = if self.at_upper[j] { rc } else { -rc };
                if gain > self.opts.opt_tol {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    match entering {
                        Some((_, best)) => {
                            let best_gain = best.abs_val();
                            if gain > best_gain {
                                entering = Some((j, rc));
                            }
                        }
                        None => entering = Some((j, rc)),
                    }
                }
            }
            let Some((j, _rc)) = entering else {
                return Ok(());
            };
            let from_upper = self.at_upper[j];
            let d = self.ftran(j);
            let span = self.upper[j] - self.lower[j];
            let pivot_tol = T::c(1e-10);
            // t >= 0 is how far the entering variable travels away from its
            // current bound; basic variable r moves at rate dir_r = -s d_r.
            // A row limits t when its basic variable would cross a bound.
            let row_limit = |r: usize| -> Option<(T, bool)> {
                let dir = if from_upper { d[r] } else { -d[r] };
                let bvar = self.basis[r];
                if dir < -pivot_tol {
                    let ratio = (self.x[bvar] - self.lower[bvar]) / -dir;
                    Some((ratio.max(T::zero()), false))
                } else if dir > pivot_tol && self.upper[bvar].is_finite() {
                    let ratio = (self.upper[bvar] - self.x[bvar]) / dir;
                    Some((ratio.max(T::zero()), true))
                } else {
                    None
                }
            };
            let mut t_min = span;
            for r in 0..self.m {
                if let Some((ratio, _)) = row_limit(r) {
                    t_min = t_min.min(ratio);
                }
            }
            let tie = T::c(1e-10) * (T::one() + t_min);
            // Prefer the bound flip when it is as tight as any row limit.
            let mut leaving: Option<(usize, bool)> = None;
            if span > t_min + tie {
                for r in 0..self.m {
                    let Some((ratio, hits_upper)) = row_limit(r) else {
                        continue;
                    };
                    if ratio > t_min + tie {
                        continue;
                    }
                    let better = match leaving {
                        None => true,
                        Some((prev, _)) => {
                            if bland {
                                self.basis[r] < self.basis[prev]
                            } else {
                                d[r].abs_val() > d[prev].abs_val()
                            }
                        }
                    };
                    if better {
                        leaving = Some((r, hits_upper));
                    }
                }
            }
            let t = t_min;
            if t > self.opts.opt_tol {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled > self.opts.stall_window {
                    bland = true;
                }
            }
            // Move every basic variable, then place the entering one.
            for r in 0..self.m {
                let dir = if from_upper { d[r] } else { -d[r] };
                let bvar = self.basis[r];
                self.x[bvar] = self.x[bvar] + dir * t;
            }
            match leaving {
                Some((r, hits_upper)) => {
                    self.x[j] = if from_upper {
                        self.upper[j] - t
                    } else {
                        self.lower[j] + t
                    };
                    let out = self.basis[r];
                    self.x[out] = if hits_upper {
                        self.upper[out]
                    } else {
                        self.lower[out]
                    };
                    self.at_upper[out] = hits_upper;
                    self.basic_row[out] = UNBASIC;
                    self.basis[r] = j;
                    self.basic_row[j] = r;
                    self.at_upper[j] = false;
                    self.pivot_update(&d, r)?;
                }
                None => {
                    // Bound flip: the entering variable crosses its whole
                    // span with no basis change.
                    self.at_upper[j] = !from_upper;
                    self.x[j] = if from_upper { self.lower[j] } else { self.upper[j] };
                }
            }
        }
    }

    fn pivot_update(&mut self, d: &[T], r: usize) -> Result<(), LpError> {
        let piv = d[r];
        if piv.abs_val() < T::c(1e-12) {
            return Err(LpError::Numerical("pivot element vanished".into()));
        }
        for c in 0..self.m {
            self.binv[r * self.m + c] = self.binv[r * self.m + c] / piv;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = d[i];
            if factor != T::zero() {
                for c in 0..self.m {
                    let delta = factor * self.binv[r * self.m + c];
                    self.binv[i * self.m + c] = self.binv[i * self.m + c] - delta;
                }
            }
        }
        self.pivots += 1;
        Ok(())
    }

    /// Rebuild the basis inverse from scratch by Gauss-Jordan elimination
    /// with partial pivoting.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        if m == 0 {
            self.pivots = 0;
            return Ok(());
        }
        let mut aug = vec![T::zero(); m * 2 * m];
        for (r, &bvar) in self.basis.iter().enumerate() {
            if bvar < self.n {
                for &(row, v) in &self.cols[bvar] {
                    aug[row * 2 * m + r] = v;
                }
            } else {
                let row = bvar - self.n;
                aug[row * 2 * m + r] = self.art_sign[row];
            }
        }
        for r in 0..m {
            aug[r * 2 * m + m + r] = T::one();
        }
        for col in 0..m {
            let mut best = col;
            for r in col + 1..m {
                if aug[r * 2 * m + col].abs_val() > aug[best * 2 * m + col].abs_val() {
                    best = r;
                }
            }
            if aug[best * 2 * m + col].abs_val() < T::c(1e-12) {
                return Err(LpError::Numerical("singular basis".into()));
            }
            if best != col {
                for c in 0..2 * m {
                    aug.swap(col * 2 * m + c, best * 2 * m + c);
                }
            }
            let piv = aug[col * 2 * m + col];
            for c in 0..2 * m {
                aug[col * 2 * m + c] = aug[col * 2 * m + c] / piv;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let factor = aug[r * 2 * m + col];
                if factor != T::zero() {
                    for c in 0..2 * m {
                        let delta = factor * aug[col * 2 * m + c];
                        aug[r * 2 * m + c] = aug[r * 2 * m + c] - delta;
                    }
                }
            }
        }
        for r in 0..m {
            for c in 0..m {
                self.binv[r * m + c] = aug[r * 2 * m + m + c];
            }
        }
        self.pivots = 0;
        Ok(())
    }

    /// Recompute basic values from nonbasic bounds through the fresh inverse.
    fn recompute_basic(&mut self) {
        let mut rhs = self.lp.rhs.clone();
        for j in 0..self.n {
            if self.basic_row[j] == UNBASIC && self.x[j] != T::zero() {
                for &(r, v) in &self.cols[j] {
                    rhs[r] = rhs[r] - v * self.x[j];
                }
            }
        }
        for a in self.n..self.n + self.m {
            if self.basic_row[a] == UNBASIC && self.x[a] != T::zero() {
                rhs[a - self.n] = rhs[a - self.n] - self.art_sign[a - self.n] * self.x[a];
            }
        }
        for r in 0..self.m {
            let mut v = T::zero();
            for c in 0..self.m {
                v = v + self.binv[r * self.m + c] * rhs[c];
            }
            self.x[self.basis[r]] = v;
        }
    }

    /// Replace basic artificials by structural columns where possible;
    /// rows that admit no pivot are redundant and keep a zero-locked
    /// artificial.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let mut found = None;
            for j in 0..self.n {
                if self.basic_row[j] != UNBASIC {
                    continue;
                }
                let mut dr = T::zero();
                for &(row, v) in &self.cols[j] {
                    dr = dr + self.binv[r * self.m + row] * v;
                }
                if dr.abs_val() > T::c(1e-7) {
                    found = Some(j);
                    break;
                }
            }
            if let Some(j) = found {
                let d = self.ftran(j);
                let out = self.basis[r];
                self.basic_row[out] = UNBASIC;
                self.x[out] = T::zero();
                self.at_upper[out] = false;
                self.basis[r] = j;
                self.basic_row[j] = r;
                // Degenerate exchange: the entering variable keeps its bound
                // value, so only the inverse changes.
                self.pivot_update(&d, r)?;
                self.recompute_basic();
            }
        }
        Ok(())
    }

    /// Final accuracy pass: refactor, recompute, then one step of iterative
    /// refinement so equality residuals drop to machine level.
    fn polish(&mut self) -> Result<(), LpError> {
        self.refactor()?;
        self.recompute_basic();
        let mut resid = vec![T::zero(); self.m];
        for r in 0..self.m {
            let mut v = self.lp.rhs[r];
            for &(j, coef) in &self.lp.rows[r] {
                v = v - coef * self.x[j];
            }
            v = v - self.art_sign[r] * self.x[self.n + r];
            resid[r] = v;
        }
        for r in 0..self.m {
            let mut dx = T::zero();
            for c in 0..self.m {
                dx = dx + self.binv[r * self.m + c] * resid[c];
            }
            let bvar = self.basis[r];
            self.x[bvar] = self.x[bvar] + dx;
        }
        // Snap structural values that drifted marginally outside their box.
        for j in 0..self.n {
            if self.x[j] < self.lp.lower[j] {
                if self.lp.lower[j] - self.x[j] > self.opts.feas_tol {
                    return Err(LpError::Numerical(format!(
                        "variable {j} left its bounds"
                    )));
                }
                self.x[j] = self.lp.lower[j];
            } else if self.x[j] > self.lp.upper[j] {
                if self.x[j] - self.lp.upper[j] > self.opts.feas_tol {
                    return Err(LpError::Numerical(format!(
                        "variable {j} left its bounds"
                    )));
                }
                self.x[j] = self.lp.upper[j];
            }
        }
        Ok(())
    }
}
