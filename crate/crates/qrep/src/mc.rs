//! Haar-measure Monte Carlo over the representation space: partition-function
//! estimation and Wilson-loop expectation values.
//!
//! Haar measure is normalized to total mass 1 per edge factor, so the
//! partition estimate is a normalized average per network summed over
//! networks; `f ≡ 0` gives exactly the network count.
//!
//! Determinism: each (network, sample) pair draws from its own counter-derived
//! RNG stream, samples are materialized in index order, and the Welford merge
//! runs sequentially — estimates are bit-identical across thread counts.

use serde_json::{json, Value};

use crate::dirac::{spectral_action, ActionPolynomial, SymWeights};
use crate::error::{Error, Result};
use crate::nct::{enumerate_networks, BratteliNetwork, DEFAULT_NETWORK_BUDGET};
use crate::parallel;
use crate::quiver::{Path, Quiver};
use crate::repcat::random_representation;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub f: ActionPolynomial,
    /// Restrict to one network; `None` sums over all networks for `N`.
    pub network: Option<BratteliNetwork>,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64, f: ActionPolynomial) -> Result<McConfig> {
        if samples < 1 {
            return Err(Error::validation("samples must be >= 1"));
        }
        Ok(McConfig { samples, seed, f, network: None })
    }

    pub fn with_network(mut self, net: BratteliNetwork) -> McConfig {
        self.network = Some(net);
        self
    }
}

#[derive(Clone, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples_used: usize,
    /// Per-network (mean, std_error), in enumeration order.
    pub per_network: Vec<(f64, f64)>,
    pub note: Option<String>,
}

impl McEstimate {
    pub fn to_json(&self) -> Value {
        let per: Vec<Value> = self
            .per_network
            .iter()
            .enumerate()
            .map(|(i, &(m, se))| json!({"network": i, "mean": m, "std_error": se}))
            .collect();
        let mut obj = json!({
            "mean": self.mean,
            "std_error": self.std_error,
            "samples": self.samples_used,
            "per_network": per,
        });
        if let Some(note) = &self.note {
            obj["note"] = json!(note);
        }
        obj
    }
}

/// Derived per-(network, sample) seed: a splitmix64 step over the base seed
/// and the pair counter, so adjacent counters give unrelated streams.
fn derived_seed(base: u64, network: usize, sample: usize) -> u64 {
    let mut z = base
        .wrapping_add(((network as u64) << 32) | sample as u64)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sequential Welford pass over samples in index order; returns
/// `(mean, std_error)` with `std_error = sample_std/√n`.
fn welford(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let n = (i + 1) as f64;
        let delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }
    let n = values.len() as f64;
    let se = if values.len() > 1 {
        (m2 / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    (mean, se)
}

fn networks_for(q: &Quiver, n: usize, cfg: &McConfig) -> Result<Vec<BratteliNetwork>> {
    match &cfg.network {
        Some(net) => {
            net.validate(q)?;
            Ok(vec![net.clone()])
        }
        None => enumerate_networks(q, n, DEFAULT_NETWORK_BUDGET),
    }
}

/// Monte Carlo estimate of `Z^f_N(Q) = Σ_networks ∫ exp(−Tr f(D/Λ)) dμ_Haar`.
pub fn estimate_partition(q: &Quiver, n: usize, cfg: &McConfig) -> Result<McEstimate> {
    let networks = networks_for(q, n, cfg)?;
    if networks.is_empty() {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
            samples_used: 0,
            per_network: Vec::new(),
            note: Some(format!("no Bratteli networks exist for N = {n}: Z = 0")),
        });
    }
    let mut per_network = Vec::with_capacity(networks.len());
    for (idx, net) in networks.iter().enumerate() {
        let values: Vec<Result<f64>> = parallel::map_range(cfg.samples, |s| {
            let rep = random_representation(q, net, derived_seed(cfg.seed, idx, s))?;
            Ok((-spectral_action(&rep, &cfg.f)?).exp())
        });
        let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
        per_network.push(welford(&values));
    }
    let mean = per_network.iter().map(|&(m, _)| m).sum();
    let std_error = per_network
        .iter()
        .map(|&(_, se)| se * se)
        .sum::<f64>()
        .sqrt();
    Ok(McEstimate {
        mean,
        std_error,
        samples_used: cfg.samples * networks.len(),
        per_network,
        note: None,
    })
}

/// Monte Carlo mean of `Re 𝒲(loop)` under the pure Haar ensemble; `loop`
/// lives in the augmented quiver `Q*` and is evaluated with unit weights
/// (reversed edges act by the adjoint).
pub fn wilson_expectation(q: &Quiver, n: usize, p: &Path, cfg: &McConfig) -> Result<McEstimate> {
    let aug = q.augment();
    if !p.is_loop(&aug) {
        return Err(Error::validation("wilson_expectation requires a loop in Q*"));
    }
    let networks = networks_for(q, n, cfg)?;
    if networks.is_empty() {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
            samples_used: 0,
            per_network: Vec::new(),
            note: Some(format!("no Bratteli networks exist for N = {n}")),
        });
    }
    let mut per_network = Vec::with_capacity(networks.len());
    for (idx, net) in networks.iter().enumerate() {
        let values: Vec<Result<f64>> = parallel::map_range(cfg.samples, |s| {
            let rep = random_representation(q, net, derived_seed(cfg.seed, idx, s))?;
            let sw = SymWeights::from_representation(&rep, false);
            Ok(sw.wilson_loop(p)?.re)
        });
        let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
        per_network.push(welford(&values));
    }
    // expectation averaged over networks with equal weight
    let count = per_network.len() as f64;
    let mean = per_network.iter().map(|&(m, _)| m).sum::<f64>() / count;
    let std_error = per_network
        .iter()
        .map(|&(_, se)| se * se)
        .sum::<f64>()
        .sqrt()
        / count;
    Ok(McEstimate {
        mean,
        std_error,
        samples_used: cfg.samples * per_network.len(),
        per_network,
        note: None,
    })
}
