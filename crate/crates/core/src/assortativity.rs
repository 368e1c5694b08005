//! Directed weighted assortativity coefficients and their incremental
//! updates along a rewiring trajectory.
//!
//! A coefficient pairs a strength type on the source side with one on the
//! target side: `r(a, b)` is the edge-weighted Pearson correlation between
//! the type-`a` strength of an edge's source and the type-`b` strength of
//! its target. With out- and in-strengths this gives four coefficients,
//! reported as `r11`, `r12`, `r21`, `r22` (1 = out, 2 = in).
//!
//! A coefficient is undefined when the relevant weighted standard deviation
//! vanishes (for example, every edge source has the same out-strength). That
//! case is carried explicitly through every result type here; it is never
//! collapsed into a NaN.

use std::error::Error;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::graph::{GraphError, RewiringStep, StrengthKind, StrengthProfile, WeightedDigraph};
use crate::num::Real;

/// Why a coefficient has no value: the named standard deviation is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UndefinedCoefficient {
    ZeroSourceSd(StrengthKind),
    ZeroTargetSd(StrengthKind),
}

impl fmt::Display for UndefinedCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UndefinedCoefficient::ZeroSourceSd(k) => {
                write!(f, "source-side {k}-strength deviation is zero")
            }
            UndefinedCoefficient::ZeroTargetSd(k) => {
                write!(f, "target-side {k}-strength deviation is zero")
            }
        }
    }
}

#[derive(Debug)]
pub enum AssortativityError {
    EmptyGraph,
    Undefined(UndefinedCoefficient),
}

impl fmt::Display for AssortativityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssortativityError::EmptyGraph => write!(f, "graph has no edges"),
            AssortativityError::Undefined(u) => write!(f, "coefficient undefined: {u}"),
        }
    }
}

impl Error for AssortativityError {}

impl From<GraphError> for AssortativityError {
    fn from(_: GraphError) -> Self {
        AssortativityError::EmptyGraph
    }
}

/// All four coefficients of one graph, each either a value or the reason it
/// is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssortativityQuad<T> {
    entries: [Result<T, UndefinedCoefficient>; 4],
}

/// The four `(source kind, target kind)` pairs in report order
/// (`r11`, `r12`, `r21`, `r22`).
pub const COEFFICIENT_PAIRS: [(StrengthKind, StrengthKind); 4] = [
    (StrengthKind::Out, StrengthKind::Out),
    (StrengthKind::Out, StrengthKind::In),
    (StrengthKind::In, StrengthKind::Out),
    (StrengthKind::In, StrengthKind::In),
];

fn slot(a: StrengthKind, b: StrengthKind) -> usize {
    a.index() * 2 + b.index()
}

/// Short name of a coefficient, e.g. `r21` for (in, out).
pub fn coefficient_name(a: StrengthKind, b: StrengthKind) -> String {
    format!("r{}{}", a.code(), b.code())
}

impl<T: Copy> AssortativityQuad<T> {
    pub fn from_fn(
        mut f: impl FnMut(StrengthKind, StrengthKind) -> Result<T, UndefinedCoefficient>,
    ) -> Self {
        let mut entries = [Err(UndefinedCoefficient::ZeroSourceSd(StrengthKind::Out)); 4];
        for (a, b) in COEFFICIENT_PAIRS {
            entries[slot(a, b)] = f(a, b);
        }
        AssortativityQuad { entries }
    }

    pub fn get(&self, a: StrengthKind, b: StrengthKind) -> Result<T, UndefinedCoefficient> {
        self.entries[slot(a, b)]
    }

    pub fn r11(&self) -> Result<T, UndefinedCoefficient> {
        self.get(StrengthKind::Out, StrengthKind::Out)
    }

    pub fn r12(&self) -> Result<T, UndefinedCoefficient> {
        self.get(StrengthKind::Out, StrengthKind::In)
    }

    pub fn r21(&self) -> Result<T, UndefinedCoefficient> {
        self.get(StrengthKind::In, StrengthKind::Out)
    }

    pub fn r22(&self) -> Result<T, UndefinedCoefficient> {
        self.get(StrengthKind::In, StrengthKind::In)
    }

    /// Iterate the defined coefficients only.
    pub fn defined(&self) -> impl Iterator<Item = (StrengthKind, StrengthKind, T)> + '_ {
        COEFFICIENT_PAIRS
            .into_iter()
            .filter_map(move |(a, b)| self.get(a, b).ok().map(|v| (a, b, v)))
    }
}

impl<T: Copy + Serialize> Serialize for AssortativityQuad<T> {
    /// Defined entries serialize as numbers, undefined ones as the string
    /// `"undefined"` so reports never smuggle a NaN.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AssortativityQuad", 4)?;
        let names = ["r11", "r12", "r21", "r22"];
        for ((a, b), name) in COEFFICIENT_PAIRS.into_iter().zip(names) {
            match self.get(a, b) {
                Ok(v) => st.serialize_field(name, &v)?,
                Err(_) => st.serialize_field(name, "undefined")?,
            }
        }
        st.end()
    }
}

fn coefficient_denominator<T: Real>(
    p: &StrengthProfile<T>,
    a: StrengthKind,
    b: StrengthKind,
) -> Result<T, UndefinedCoefficient> {
    let sd_src = p.src_sd(a);
    if StrengthProfile::sd_is_zero(sd_src, p.src_mean(a)) {
        return Err(UndefinedCoefficient::ZeroSourceSd(a));
    }
    let sd_trg = p.trg_sd(b);
    if StrengthProfile::sd_is_zero(sd_trg, p.trg_mean(b)) {
        return Err(UndefinedCoefficient::ZeroTargetSd(b));
    }
    Ok(p.tau() * sd_src * sd_trg)
}

/// One coefficient given a precomputed profile of the same graph.
pub fn assortativity_with_profile<T: Real>(
    g: &WeightedDigraph<T>,
    p: &StrengthProfile<T>,
    a: StrengthKind,
    b: StrengthKind,
) -> Result<T, UndefinedCoefficient> {
    let denom = coefficient_denominator(p, a, b)?;
    let mut num = T::zero();
    for (i, j, w) in g.edges() {
        num = num + w * p.src_dev(a, i) * p.trg_dev(b, j);
    }
    Ok(num / denom)
}

/// Coefficient `r(a, b)` of `g`, computing the strength profile internally.
pub fn assortativity<T: Real>(
    g: &WeightedDigraph<T>,
    a: StrengthKind,
    b: StrengthKind,
) -> Result<T, AssortativityError> {
    let p = g.strength_profile()?;
    assortativity_with_profile(g, &p, a, b).map_err(AssortativityError::Undefined)
}

/// All four coefficients in one pass over the edges.
pub fn assortativity_all<T: Real>(
    g: &WeightedDigraph<T>,
) -> Result<AssortativityQuad<T>, AssortativityError> {
    let p = g.strength_profile()?;
    Ok(assortativity_all_with_profile(g, &p))
}

pub fn assortativity_all_with_profile<T: Real>(
    g: &WeightedDigraph<T>,
    p: &StrengthProfile<T>,
) -> AssortativityQuad<T> {
    // Accumulate the four numerators in a single sweep; the deviation
    // products differ only in which strength vector each side reads.
    let mut nums = [T::zero(); 4];
    for (i, j, w) in g.edges() {
        for (a, b) in COEFFICIENT_PAIRS {
            nums[slot(a, b)] = nums[slot(a, b)] + w * p.src_dev(a, i) * p.trg_dev(b, j);
        }
    }
    AssortativityQuad::from_fn(|a, b| {
        coefficient_denominator(p, a, b).map(|denom| nums[slot(a, b)] / denom)
    })
}

/// Exact change of `r(a, b)` caused by one weight transfer, in O(1).
///
/// Margins are invariant under a transfer, so only four numerator terms
/// move; they factor into a product of two deviation differences.
pub fn assortativity_delta<T: Real>(
    p: &StrengthProfile<T>,
    step: &RewiringStep<T>,
    a: StrengthKind,
    b: StrengthKind,
) -> Result<T, UndefinedCoefficient> {
    let denom = coefficient_denominator(p, a, b)?;
    let d_src = p.src_dev(a, step.i) - p.src_dev(a, step.k);
    let d_trg = p.trg_dev(b, step.l) - p.trg_dev(b, step.j);
    Ok(step.dw * d_src * d_trg / denom)
}

/// Tracks all four coefficients across a rewiring trajectory without
/// recomputing edge sums: deviation vectors and denominators are cached once
/// (margins never change), and each step adjusts the numerators in O(1).
#[derive(Debug, Clone)]
pub struct TrajectoryTracker<T> {
    dev_src: [Vec<T>; 2],
    dev_trg: [Vec<T>; 2],
    inv_denom: [Option<T>; 4],
    current: [Result<T, UndefinedCoefficient>; 4],
}

impl<T: Real> TrajectoryTracker<T> {
    pub fn new(g: &WeightedDigraph<T>) -> Result<Self, AssortativityError> {
        let p = g.strength_profile()?;
        let quad = assortativity_all_with_profile(g, &p);
        let n = g.n();
        let mut dev_src = [vec![T::zero(); n], vec![T::zero(); n]];
        let mut dev_trg = [vec![T::zero(); n], vec![T::zero(); n]];
        for kind in StrengthKind::BOTH {
            for i in 0..n {
                dev_src[kind.index()][i] = p.src_dev(kind, i);
                dev_trg[kind.index()][i] = p.trg_dev(kind, i);
            }
        }
        let mut inv_denom = [None; 4];
        let current = quad.entries;
        for (a, b) in COEFFICIENT_PAIRS {
            if let Ok(denom) = coefficient_denominator(&p, a, b) {
                inv_denom[slot(a, b)] = Some(T::one() / denom);
            }
        }
        // Keep current consistent with the denominators we cached.
        for s in 0..4 {
            if inv_denom[s].is_none() {
                debug_assert!(current[s].is_err());
            }
        }
        Ok(TrajectoryTracker {
            dev_src,
            dev_trg,
            inv_denom,
            current,
        })
    }

    /// Advance past one applied step.
    pub fn apply(&mut self, step: &RewiringStep<T>) {
        for (a, b) in COEFFICIENT_PAIRS {
            let s = slot(a, b);
            if let (Some(inv), Ok(value)) = (self.inv_denom[s], self.current[s]) {
                let d_src = self.dev_src[a.index()][step.i] - self.dev_src[a.index()][step.k];
                let d_trg = self.dev_trg[b.index()][step.l] - self.dev_trg[b.index()][step.j];
                self.current[s] = Ok(value + step.dw * d_src * d_trg * inv);
            }
        }
    }

    pub fn quad(&self) -> AssortativityQuad<T> {
        AssortativityQuad {
            entries: self.current,
        }
    }
}
