//! MPS model export for free-support problems and solution import.
//!
//! When the target matrix may choose its own edge set, the problem becomes
//! a mixed-integer program: one binary per cell decides whether the cell
//! hosts an edge, linked to the cell's weight by box rows. That is out of
//! reach for the in-repo simplex, so the model is written in MPS text form
//! for any external MIP solver, and the solver's answer is read back and
//! re-verified from scratch before it is trusted.
//!
//! Variable naming is stable and uses node labels: `L_<src>_<dst>` for the
//! cell weight, `Z_<src>_<dst>` for its edge indicator, `T_<src>_<dst>`
//! for the movement-cost helper under the least-movement objective. Names
//! exceed the historical 8-character limit, so files are written in the
//! whitespace-separated ("free") MPS dialect all current solvers accept.
//!
//! Model rows per exported problem:
//!  - `OUT_<label>` / `IN_<label>`: margin equalities for every node;
//!  - `CAP_<i>_<j>`: `lambda - kappa_hi z <= 0` (no weight without edge);
//!  - `FLR_<i>_<j>`: `lambda - kappa_lo z >= 0` (present edges respect the floor);
//!  - `CARD`: `sum z = |E|` keeps the edge count;
//!  - `R<a><b>`: one linearized coefficient row per requested value;
//!  - `TA_`/`TB_` pairs defining `t >= |w - lambda|` when that is minimized.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::graph::WeightedDigraph;
use crate::num::Real;
use crate::target::{
    Objective, SupportMode, TargetError, TargetMatrix, TargetProblem, TargetStatus,
    VerifyTolerances, verify_conditions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `N`: the objective row.
    Objective,
    /// `E`: equality.
    Eq,
    /// `L`: at most.
    Le,
    /// `G`: at least.
    Ge,
}

impl RowKind {
    fn tag(self) -> &'static str {
        match self {
            RowKind::Objective => "N",
            RowKind::Eq => "E",
            RowKind::Le => "L",
            RowKind::Ge => "G",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "N" => Some(RowKind::Objective),
            "E" => Some(RowKind::Eq),
            "L" => Some(RowKind::Le),
            "G" => Some(RowKind::Ge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsRow {
    pub kind: RowKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsColumn {
    pub name: String,
    pub integer: bool,
    /// `(row name, coefficient)` pairs.
    pub entries: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `UP`: upper bound (lower stays at the default 0).
    Upper,
    /// `BV`: binary variable.
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsBound {
    pub kind: BoundKind,
    pub column: String,
    /// Ignored for binaries.
    pub value: f64,
}

/// An MPS model: ordered rows, columns with their nonzeros, right-hand
/// sides, and variable bounds. Rendering and parsing round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsDocument {
    pub name: String,
    pub rows: Vec<MpsRow>,
    pub columns: Vec<MpsColumn>,
    pub rhs: Vec<(String, f64)>,
    pub bounds: Vec<MpsBound>,
}

impl MpsDocument {
    /// Render as free-format MPS text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME {}", self.name);
        let _ = writeln!(out, "ROWS");
        for row in &self.rows {
            let _ = writeln!(out, " {}  {}", row.kind.tag(), row.name);
        }
        let _ = writeln!(out, "COLUMNS");
        let mut in_integer = false;
        let mut marker = 0usize;
        for col in &self.columns {
            if col.integer != in_integer {
                let tag = if col.integer { "'INTORG'" } else { "'INTEND'" };
                let _ = writeln!(out, "    MARK{marker}  'MARKER'  {tag}");
                marker += 1;
                in_integer = col.integer;
            }
            for pair in col.entries.chunks(2) {
                let mut line = format!("    {}", col.name);
                for (row, coeff) in pair {
                    let _ = write!(line, "  {row}  {coeff}");
                }
                let _ = writeln!(out, "{line}");
            }
        }
        if in_integer {
            let _ = writeln!(out, "    MARK{marker}  'MARKER'  'INTEND'");
        }
        let _ = writeln!(out, "RHS");
        for pair in self.rhs.chunks(2) {
            let mut line = "    RHS".to_string();
            for (row, value) in pair {
                let _ = write!(line, "  {row}  {value}");
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out, "BOUNDS");
        for bound in &self.bounds {
            match bound.kind {
                BoundKind::Upper => {
                    let _ = writeln!(out, " UP BND  {}  {}", bound.column, bound.value);
                }
                BoundKind::Binary => {
                    let _ = writeln!(out, " BV BND  {}", bound.column);
                }
            }
        }
        let _ = writeln!(out, "ENDATA");
        out
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(self.render().as_bytes())
    }

    /// Parse free-format MPS text produced by `render` (sections NAME,
    /// ROWS, COLUMNS with integrality markers, RHS, BOUNDS, ENDATA).
    pub fn parse(text: &str) -> Result<MpsDocument, MpsParseError> {
        #[derive(PartialEq)]
        enum Section {
            Start,
            Rows,
            Columns,
            Rhs,
            Bounds,
            Done,
        }
        let mut doc = MpsDocument {
            name: String::new(),
            rows: Vec::new(),
            columns: Vec::new(),
            rhs: Vec::new(),
            bounds: Vec::new(),
        };
        let mut section = Section::Start;
        let mut integer = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('*') {
                continue;
            }
            let err = |reason: String| MpsParseError {
                line: lineno,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !raw.starts_with(' ') {
                match fields[0] {
                    "NAME" => {
                        doc.name = fields.get(1).unwrap_or(&"").to_string();
                        section = Section::Start;
                    }
                    "ROWS" => section = Section::Rows,
                    "COLUMNS" => section = Section::Columns,
                    "RHS" => section = Section::Rhs,
                    "BOUNDS" => section = Section::Bounds,
                    "ENDATA" => section = Section::Done,
                    other => return Err(err(format!("unknown section '{other}'"))),
                }
                continue;
            }
            match section {
                Section::Rows => {
                    if fields.len() != 2 {
                        return Err(err("expected '<kind> <name>'".into()));
                    }
                    let kind = RowKind::from_tag(fields[0])
                        .ok_or_else(|| err(format!("unknown row kind '{}'", fields[0])))?;
                    doc.rows.push(MpsRow {
                        kind,
                        name: fields[1].to_string(),
                    });
                }
                Section::Columns => {
                    if fields.len() == 3 && fields[1] == "'MARKER'" {
                        match fields[2] {
                            "'INTORG'" => integer = true,
                            "'INTEND'" => integer = false,
                            other => return Err(err(format!("unknown marker '{other}'"))),
                        }
                        continue;
                    }
                    if fields.len() != 3 && fields.len() != 5 {
                        return Err(err("expected '<col> <row> <value> [<row> <value>]'".into()));
                    }
                    let name = fields[0];
                    if doc.columns.last().map(|c| c.name.as_str()) != Some(name) {
                        doc.columns.push(MpsColumn {
                            name: name.to_string(),
                            integer,
                            entries: Vec::new(),
                        });
                    }
                    let col = doc.columns.last_mut().unwrap();
                    for pair in fields[1..].chunks(2) {
                        let value: f64 = pair[1]
                            .parse()
                            .map_err(|_| err(format!("bad coefficient '{}'", pair[1])))?;
                        col.entries.push((pair[0].to_string(), value));
                    }
                }
                Section::Rhs => {
                    if fields.len() != 3 && fields.len() != 5 {
                        return Err(err("expected 'RHS <row> <value> [<row> <value>]'".into()));
                    }
                    for pair in fields[1..].chunks(2) {
                        let value: f64 = pair[1]
                            .parse()
                            .map_err(|_| err(format!("bad value '{}'", pair[1])))?;
                        doc.rhs.push((pair[0].to_string(), value));
                    }
                }
                Section::Bounds => match fields[0] {
                    "UP" => {
                        if fields.len() != 4 {
                            return Err(err("expected 'UP BND <col> <value>'".into()));
                        }
                        let value: f64 = fields[3]
                            .parse()
                            .map_err(|_| err(format!("bad bound '{}'", fields[3])))?;
                        doc.bounds.push(MpsBound {
                            kind: BoundKind::Upper,
                            column: fields[2].to_string(),
                            value,
                        });
                    }
                    "BV" => {
                        if fields.len() != 3 {
                            return Err(err("expected 'BV BND <col>'".into()));
                        }
                        doc.bounds.push(MpsBound {
                            kind: BoundKind::Binary,
                            column: fields[2].to_string(),
                            value: 0.0,
                        });
                    }
                    other => return Err(err(format!("unsupported bound kind '{other}'"))),
                },
                Section::Start | Section::Done => {
                    return Err(err("data outside any section".into()));
                }
            }
        }
        if section != Section::Done {
            return Err(MpsParseError {
                line: text.lines().count(),
                reason: "missing ENDATA".into(),
            });
        }
        Ok(doc)
    }
}

#[derive(Debug)]
pub struct MpsParseError {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for MpsParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "mps line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for MpsParseError {}

fn weight_name(src: u64, dst: u64) -> String {
    format!("L_{src}_{dst}")
}

fn indicator_name(src: u64, dst: u64) -> String {
    format!("Z_{src}_{dst}")
}

fn movement_name(src: u64, dst: u64) -> String {
    format!("T_{src}_{dst}")
}

/// Build the free-support model as an MPS document.
///
/// Every ordered node pair (self-loops included) gets a weight variable in
/// `[0, kappa_hi]` and an edge indicator linked by cap and floor rows, the
/// indicator total is pinned to the input's edge count, margins are pinned
/// per node, and each requested coefficient adds its linearized equality.
pub fn export_mip<T: Real>(tp: &TargetProblem<'_, T>) -> Result<MpsDocument, TargetError<T>> {
    if tp.support != SupportMode::Free {
        return Err(TargetError::GraphMismatch(
            "only free-support problems are exported; fixed support solves in-repo".into(),
        ));
    }
    if !(tp.kappa_lo > T::zero()) || tp.kappa_lo > tp.kappa_hi {
        return Err(TargetError::BadKappa(format!(
            "weight box [{}, {}] must be positive and ordered",
            tp.kappa_lo, tp.kappa_hi
        )));
    }
    let g = tp.graph;
    let profile = g.strength_profile()?;
    let n = g.n();
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);

    let mut rows = vec![MpsRow {
        kind: RowKind::Objective,
        name: "COST".into(),
    }];
    let mut rhs: Vec<(String, f64)> = Vec::new();

    let s_out = g.out_strengths();
    let s_in = g.in_strengths();
    for i in 0..n {
        let label = g.label_of(i);
        rows.push(MpsRow {
            kind: RowKind::Eq,
            name: format!("OUT_{label}"),
        });
        rhs.push((format!("OUT_{label}"), f(s_out[i])));
    }
    for j in 0..n {
        let label = g.label_of(j);
        rows.push(MpsRow {
            kind: RowKind::Eq,
            name: format!("IN_{label}"),
        });
        rhs.push((format!("IN_{label}"), f(s_in[j])));
    }
    rows.push(MpsRow {
        kind: RowKind::Eq,
        name: "CARD".into(),
    });
    rhs.push(("CARD".into(), g.nnz() as f64));

    let l1 = tp.objective == Objective::L1ToW;
    for i in 0..n {
        for j in 0..n {
            let (src, dst) = (g.label_of(i), g.label_of(j));
            rows.push(MpsRow {
                kind: RowKind::Le,
                name: format!("CAP_{src}_{dst}"),
            });
            rows.push(MpsRow {
                kind: RowKind::Ge,
                name: format!("FLR_{src}_{dst}"),
            });
            if l1 {
                // t - lambda >= -w  and  t + lambda >= w.
                let w = f(g.weight(i, j));
                rows.push(MpsRow {
                    kind: RowKind::Ge,
                    name: format!("TA_{src}_{dst}"),
                });
                rhs.push((format!("TA_{src}_{dst}"), -w));
                rows.push(MpsRow {
                    kind: RowKind::Ge,
                    name: format!("TB_{src}_{dst}"),
                });
                rhs.push((format!("TB_{src}_{dst}"), w));
            }
        }
    }

    // One equality per requested coefficient; deviation products double as
    // the bound objectives.
    let mut target_rows: Vec<(String, Vec<f64>, f64)> = Vec::new();
    for (a, b, r_star) in tp.targets.iter() {
        let all_cells: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .collect();
        let (coeffs, rhs_val) =
            crate::target::linearized_row(&profile, &all_cells, a, b, r_star)?;
        let name = format!("R{}{}", a.code(), b.code());
        rows.push(MpsRow {
            kind: RowKind::Eq,
            name: name.clone(),
        });
        rhs.push((name.clone(), f(rhs_val)));
        target_rows.push((name, coeffs.iter().map(|&c| f(c)).collect(), f(rhs_val)));
    }

    let mut bound_objective: Option<Vec<f64>> = None;
    match tp.objective {
        Objective::BoundMin(a, b) | Objective::BoundMax(a, b) => {
            if !tp.targets.is_empty() {
                return Err(TargetError::GraphMismatch(
                    "bound objectives take no coefficient targets".into(),
                ));
            }
            let all_cells: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .collect();
            let (coeffs, _) = crate::target::linearized_row(&profile, &all_cells, a, b, T::zero())?;
            let sign = if matches!(tp.objective, Objective::BoundMax(_, _)) {
                -1.0
            } else {
                1.0
            };
            bound_objective = Some(coeffs.iter().map(|&c| sign * f(c)).collect());
        }
        _ => {}
    }

    let mut columns = Vec::new();
    let mut bounds = Vec::new();
    // Indicators first so they sit in a single INTORG/INTEND block.
    for i in 0..n {
        for j in 0..n {
            let (src, dst) = (g.label_of(i), g.label_of(j));
            let name = indicator_name(src, dst);
            columns.push(MpsColumn {
                name: name.clone(),
                integer: true,
                entries: vec![
                    ("CARD".into(), 1.0),
                    (format!("CAP_{src}_{dst}"), -f(tp.kappa_hi)),
                    (format!("FLR_{src}_{dst}"), -f(tp.kappa_lo)),
                ],
            });
            bounds.push(MpsBound {
                kind: BoundKind::Binary,
                column: name,
                value: 0.0,
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (src, dst) = (g.label_of(i), g.label_of(j));
            let cell = i * n + j;
            let name = weight_name(src, dst);
            let mut entries = vec![
                (format!("OUT_{src}"), 1.0),
                (format!("IN_{dst}"), 1.0),
                (format!("CAP_{src}_{dst}"), 1.0),
                (format!("FLR_{src}_{dst}"), 1.0),
            ];
            if l1 {
                entries.push((format!("TA_{src}_{dst}"), -1.0));
                entries.push((format!("TB_{src}_{dst}"), 1.0));
            }
            for (row_name, coeffs, _) in &target_rows {
                if coeffs[cell] != 0.0 {
                    entries.push((row_name.clone(), coeffs[cell]));
                }
            }
            if let Some(costs) = &bound_objective {
                if costs[cell] != 0.0 {
                    entries.push(("COST".into(), costs[cell]));
                }
            }
            columns.push(MpsColumn {
                name: name.clone(),
                integer: false,
                entries,
            });
            bounds.push(MpsBound {
                kind: BoundKind::Upper,
                column: name,
                value: f(tp.kappa_hi),
            });
        }
    }
    if l1 {
        for i in 0..n {
            for j in 0..n {
                let (src, dst) = (g.label_of(i), g.label_of(j));
                columns.push(MpsColumn {
                    name: movement_name(src, dst),
                    integer: false,
                    entries: vec![
                        ("COST".into(), 1.0),
                        (format!("TA_{src}_{dst}"), 1.0),
                        (format!("TB_{src}_{dst}"), 1.0),
                    ],
                });
            }
        }
    }

    Ok(MpsDocument {
        name: "TARGET".into(),
        rows,
        columns,
        rhs,
        bounds,
    })
}

/// Read an external solver's answer: whitespace-separated
/// `<variable> <value>` lines (unknown variables and the Z/T helpers are
/// skipped). The resulting matrix is verified against the problem from
/// scratch; only then does it come back with status `Feasible`.
pub fn import_solution<T: Real, R: BufRead>(
    input: R,
    tp: &TargetProblem<'_, T>,
) -> Result<TargetMatrix<T>, TargetError<T>> {
    let g = tp.graph;
    let n = g.n();
    let mut cells = vec![T::zero(); n * n];
    for line in input.lines() {
        let line = line.map_err(|e| TargetError::GraphMismatch(format!("solution read: {e}")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 || !fields[0].starts_with("L_") {
            continue;
        }
        let mut parts = fields[0].split('_');
        parts.next();
        let src: u64 = match parts.next().and_then(|s| s.parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        let dst: u64 = match parts.next().and_then(|s| s.parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        let (i, j) = match (g.index_of(src), g.index_of(dst)) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(TargetError::GraphMismatch(format!(
                    "solution names node pair ({src}, {dst}) outside the graph"
                )))
            }
        };
        let value: f64 = fields[1].parse().map_err(|_| {
            TargetError::GraphMismatch(format!("bad solution value '{}'", fields[1]))
        })?;
        cells[i * n + j] = T::c(value);
    }
    let lambda = WeightedDigraph::from_dense(g.labels().to_vec(), cells)
        .map_err(|e| TargetError::GraphMismatch(e.to_string()))?;
    let achieved = verify_conditions(g, &lambda, &tp.targets, &VerifyTolerances::default())?;
    Ok(TargetMatrix {
        lambda,
        status: TargetStatus::Feasible,
        achieved,
    })
}
