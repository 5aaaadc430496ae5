//! Seeded generators for the binary pairwise model families used in the experiments.
//!
//! All families use the spin encoding `state 0 <-> x = -1`, `state 1 <-> x = +1`
//! with `psi_ij(x_i, x_j) = exp(W_ij x_i x_j)` and `psi_i(x_i) = exp(alpha_i x_i)`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`),
//! a counter-based generator whose output stream is fixed across platforms.
//! Draw order: unary weights in variable order, then pairwise weights in edge
//! order, then (if enabled) one inclusion bit per variable for the cluster boost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Factor, FactorGraph};
use crate::error::{Error, Result};

/// Bumped whenever the draw order or table layout changes.
pub const GENERATOR_VERSION: &str = "chacha8-spin-v1";

/// Uniform weight ranges `[0, w_max]` (edges) and `[0, a_max]` (nodes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub w_max: f64,
    pub a_max: f64,
    /// Doubles the weights of nodes, and of edges with both ends, inside a random node subset.
    pub cluster_boost: bool,
}

impl WeightParams {
    pub fn new(w_max: f64, a_max: f64) -> Self {
        WeightParams {
            w_max,
            a_max,
            cluster_boost: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    Grid {
        n: usize,
        m: usize,
        weights: WeightParams,
    },
    FullyConnected {
        n: usize,
        weights: WeightParams,
    },
    /// Single cycle with Gaussian log-domain weights.
    Loop { n: usize, w_std: f64, msg_std: f64 },
    /// Random tree with weights uniform in `[-w_max, w_max]` and `[-a_max, a_max]`.
    Tree { n: usize, w_max: f64, a_max: f64 },
}

/// Provenance written next to generated model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub model: ModelFamily,
    pub seed: u64,
    pub generator_version: String,
    pub num_vars: usize,
    pub num_factors: usize,
}

pub fn generate(family: &ModelFamily, seed: u64) -> Result<FactorGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *family {
        ModelFamily::Grid { n, m, weights } => {
            if n < 2 || m < 2 {
                return Err(Error::InvalidParameter(format!("grid needs n, m >= 2, got {n}x{m}")));
            }
            let mut edges = Vec::new();
            for r in 0..n {
                for c in 0..m {
                    let v = r * m + c;
                    if c + 1 < m {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < n {
                        edges.push((v, v + m));
                    }
                }
            }
            uniform_spin_model(n * m, &edges, weights, &mut rng)
        }
        ModelFamily::FullyConnected { n, weights } => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!("fully connected model needs n >= 3, got {n}")));
            }
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect();
            uniform_spin_model(n, &edges, weights, &mut rng)
        }
        ModelFamily::Loop { n, w_std, msg_std } => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!("loop needs n >= 3, got {n}")));
            }
            check_nonneg("w_std", w_std)?;
            check_nonneg("msg_std", msg_std)?;
            let alpha: Vec<f64> = (0..n)
                .map(|_| msg_std * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let edges: Vec<(usize, usize)> = (0..n).map(|i| sorted_pair(i, (i + 1) % n)).collect();
            let w: Vec<f64> = edges
                .iter()
                .map(|_| w_std * rng.sample::<f64, _>(StandardNormal))
                .collect();
            spin_model(n, &alpha, &edges, &w)
        }
        ModelFamily::Tree { n, w_max, a_max } => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("tree needs n >= 2, got {n}")));
            }
            check_nonneg("w_max", w_max)?;
            check_nonneg("a_max", a_max)?;
            let alpha: Vec<f64> = (0..n).map(|_| a_max * (2.0 * rng.random::<f64>() - 1.0)).collect();
            let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
            let w: Vec<f64> = edges
                .iter()
                .map(|_| w_max * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            spin_model(n, &alpha, &edges, &w)
        }
    }
}

/// `n x m` square grid with one unary factor per node and one pairwise factor per grid edge.
pub fn gen_grid(n: usize, m: usize, w_max: f64, a_max: f64, seed: u64) -> Result<FactorGraph> {
    generate(
        &ModelFamily::Grid {
            n,
            m,
            weights: WeightParams::new(w_max, a_max),
        },
        seed,
    )
}

/// Complete graph on `n` binary nodes: `n` unary and `n(n-1)/2` pairwise factors.
pub fn gen_fully_connected(n: usize, w_max: f64, a_max: f64, seed: u64) -> Result<FactorGraph> {
    generate(
        &ModelFamily::FullyConnected {
            n,
            weights: WeightParams::new(w_max, a_max),
        },
        seed,
    )
}

pub fn gen_loop(n: usize, w_std: f64, msg_std: f64, seed: u64) -> Result<FactorGraph> {
    generate(&ModelFamily::Loop { n, w_std, msg_std }, seed)
}

pub fn gen_tree(n: usize, w_max: f64, a_max: f64, seed: u64) -> Result<FactorGraph> {
    generate(&ModelFamily::Tree { n, w_max, a_max }, seed)
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn uniform_spin_model(
    n: usize,
    edges: &[(usize, usize)],
    weights: WeightParams,
    rng: &mut ChaCha8Rng,
) -> Result<FactorGraph> {
    check_nonneg("w_max", weights.w_max)?;
    check_nonneg("a_max", weights.a_max)?;
    let mut alpha: Vec<f64> = (0..n).map(|_| weights.a_max * rng.random::<f64>()).collect();
    let mut w: Vec<f64> = edges.iter().map(|_| weights.w_max * rng.random::<f64>()).collect();
    if weights.cluster_boost {
        let inside: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        for (a, flag) in alpha.iter_mut().zip(&inside) {
            if *flag {
                *a *= 2.0;
            }
        }
        for (wij, &(i, j)) in w.iter_mut().zip(edges) {
            if inside[i] && inside[j] {
                *wij *= 2.0;
            }
        }
    }
    spin_model(n, &alpha, edges, &w)
}

/// Unary factors first (ids `0..n`), then pairwise factors in edge order.
fn spin_model(n: usize, alpha: &[f64], edges: &[(usize, usize)], w: &[f64]) -> Result<FactorGraph> {
    let mut factors = Vec::with_capacity(n + edges.len());
    for (i, &a) in alpha.iter().enumerate() {
        factors.push(Factor {
            id: i,
            scope: vec![i],
            log_table: vec![-a, a],
        });
    }
    for (k, (&(i, j), &wij)) in edges.iter().zip(w).enumerate() {
        debug_assert!(i < j);
        factors.push(Factor {
            id: n + k,
            scope: vec![i, j],
            log_table: vec![wij, -wij, -wij, wij],
        });
    }
    FactorGraph::from_log_factors(vec![2; n], factors)
}
