//! Random network generators used for benchmarking and calibration: a dense
//! Erdős–Rényi-style model and a weighted preferential-attachment growth
//! model. Both draw edge weights from a gamma distribution and are fully
//! reproducible from a 64-bit seed (ChaCha8 streams).

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, WeightedDigraph};

#[derive(Debug)]
pub enum GenerateError {
    InvalidParameter(String),
    Graph(GraphError),
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            GenerateError::Graph(e) => write!(f, "generated graph rejected: {e}"),
        }
    }
}

impl Error for GenerateError {}

impl From<GraphError> for GenerateError {
    fn from(e: GraphError) -> Self {
        GenerateError::Graph(e)
    }
}

/// Independent-edge model: every ordered node pair, self-loops included,
/// carries an edge with probability `p`; edge weights are gamma draws.
/// Nodes left without any edge are dropped from the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErConfig {
    pub n: usize,
    pub p: f64,
    pub weight_shape: f64,
    pub weight_scale: f64,
    pub seed: u64,
}

impl ErConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(GenerateError::InvalidParameter(format!(
                "edge probability must lie in [0, 1], got {}",
                self.p
            )));
        }
        check_weight_params(self.weight_shape, self.weight_scale)
    }
}

/// Growth model: starting from a seed graph, each step adds one edge by one
/// of three scenarios. With probability `alpha` a new node connects to an
/// existing target chosen by in-strength (shifted by `delta_in`); with
/// probability `beta` an existing source (by out-strength, shifted by
/// `delta_out`) connects to an existing target (by in-strength), self-loops
/// allowed; with probability `gamma` an existing source connects to a new
/// node. Repeated pairs accumulate weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaConfig {
    pub steps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_out: f64,
    pub delta_in: f64,
    pub weight_shape: f64,
    pub weight_scale: f64,
    /// Initial edges; defaults to a single unit edge 1 -> 2.
    #[serde(default = "PaConfig::default_seed_edges")]
    pub seed_edges: Vec<(u64, u64, f64)>,
    pub seed: u64,
}

impl PaConfig {
    pub fn default_seed_edges() -> Vec<(u64, u64, f64)> {
        vec![(1, 2, 1.0)]
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GenerateError::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        let total = self.alpha + self.beta + self.gamma;
        if (total - 1.0).abs() > 1e-12 {
            return Err(GenerateError::InvalidParameter(format!(
                "scenario probabilities must sum to 1, got {total}"
            )));
        }
        if self.delta_out < 0.0 || self.delta_in < 0.0 {
            return Err(GenerateError::InvalidParameter(
                "strength offsets must be nonnegative".into(),
            ));
        }
        if self.seed_edges.is_empty() {
            return Err(GenerateError::InvalidParameter(
                "seed graph needs at least one edge".into(),
            ));
        }
        for &(_, _, w) in &self.seed_edges {
            if !(w > 0.0) {
                return Err(GenerateError::InvalidParameter(
                    "seed edge weights must be positive".into(),
                ));
            }
        }
        check_weight_params(self.weight_shape, self.weight_scale)
    }
}

fn check_weight_params(shape: f64, scale: f64) -> Result<(), GenerateError> {
    if !(shape > 0.0 && scale > 0.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "gamma weight parameters must be positive, got shape {shape}, scale {scale}"
        )));
    }
    Ok(())
}

fn weight_dist(shape: f64, scale: f64) -> Result<Gamma<f64>, GenerateError> {
    Gamma::new(shape, scale)
        .map_err(|e| GenerateError::InvalidParameter(format!("gamma parameters rejected: {e}")))
}

/// One positive gamma-distributed edge weight.
pub fn sample_gamma<R: Rng>(shape: f64, scale: f64, rng: &mut R) -> Result<f64, GenerateError> {
    check_weight_params(shape, scale)?;
    Ok(weight_dist(shape, scale)?.sample(rng))
}

/// Draw an index proportionally to `mass`. The caller guarantees a positive
/// total; the final index absorbs any cumulative rounding slack.
fn sample_proportional<R: Rng>(mass: &[f64], total: f64, rng: &mut R) -> usize {
    let t = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (idx, &m) in mass.iter().enumerate() {
        acc += m;
        if t < acc {
            return idx;
        }
    }
    mass.len() - 1
}

pub fn erdos_renyi(config: &ErConfig) -> Result<WeightedDigraph<f64>, GenerateError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights = weight_dist(config.weight_shape, config.weight_scale)?;
    let n = config.n;
    let mut w = vec![0.0; n * n];
    for cell in w.iter_mut() {
        if rng.random::<f64>() < config.p {
            *cell = weights.sample(&mut rng);
        }
    }
    let labels = (1..=n as u64).collect();
    let g = WeightedDigraph::from_dense(labels, w)?;
    Ok(g.remove_isolated_nodes())
}

pub fn preferential_attachment(config: &PaConfig) -> Result<WeightedDigraph<f64>, GenerateError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights = weight_dist(config.weight_shape, config.weight_scale)?;

    // Node state in creation order; seed nodes first, sorted by label.
    let mut labels: Vec<u64> = {
        let mut set: Vec<u64> = config
            .seed_edges
            .iter()
            .flat_map(|&(s, d, _)| [s, d])
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    };
    let mut next_label = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut s_out = vec![0.0; labels.len()];
    let mut s_in = vec![0.0; labels.len()];
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    {
        let index: BTreeMap<u64, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        for &(s, d, w) in &config.seed_edges {
            let (i, j) = (index[&s], index[&d]);
            *cells.entry((i, j)).or_insert(0.0) += w;
            s_out[i] += w;
            s_in[j] += w;
        }
    }

    for _ in 0..config.steps {
        let u = rng.random::<f64>();
        let n_now = labels.len();
        let pick_source = |rng: &mut ChaCha8Rng, s_out: &[f64]| {
            let total: f64 = s_out.iter().sum::<f64>() + config.delta_out * n_now as f64;
            let mass: Vec<f64> = s_out.iter().map(|&s| s + config.delta_out).collect();
            sample_proportional(&mass, total, rng)
        };
        let pick_target = |rng: &mut ChaCha8Rng, s_in: &[f64]| {
            let total: f64 = s_in.iter().sum::<f64>() + config.delta_in * n_now as f64;
            let mass: Vec<f64> = s_in.iter().map(|&s| s + config.delta_in).collect();
            sample_proportional(&mass, total, rng)
        };
        let (i, j) = if u < config.alpha {
            // New source node attaches to an existing target.
            let j = pick_target(&mut rng, &s_in);
            labels.push(next_label);
            next_label += 1;
            s_out.push(0.0);
            s_in.push(0.0);
            (labels.len() - 1, j)
        } else if u < config.alpha + config.beta {
            let i = pick_source(&mut rng, &s_out);
            let j = pick_target(&mut rng, &s_in);
            (i, j)
        } else {
            // Existing source attaches to a new target node.
            let i = pick_source(&mut rng, &s_out);
            labels.push(next_label);
            next_label += 1;
            s_out.push(0.0);
            s_in.push(0.0);
            (i, labels.len() - 1)
        };
        let h = weights.sample(&mut rng);
        *cells.entry((i, j)).or_insert(0.0) += h;
        s_out[i] += h;
        s_in[j] += h;
    }

    let n = labels.len();
    let mut w = vec![0.0; n * n];
    for (&(i, j), &v) in &cells {
        w[i * n + j] = v;
    }
    Ok(WeightedDigraph::from_dense(labels, w)?)
}
