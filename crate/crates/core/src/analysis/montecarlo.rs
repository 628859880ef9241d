use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::denial::{denial_predicate, LayerModel, RoleSets, ScenarioParams};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub hits: u64,
    pub mean: f64,
    /// Three standard errors of the mean.
    pub half_width: f64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        Self {
            trials,
            hits,
            mean,
            half_width: 3.0 * (mean * (1.0 - mean) / trials as f64).sqrt(),
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }
}

fn check(p: &ScenarioParams, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one trial"));
    }
    if p.attacked > p.nodes {
        return Err(Error::invalid(format!(
            "attacked ({}) exceeds nodes ({})",
            p.attacked, p.nodes
        )));
    }
    Ok(())
}

fn count_hits<R: Rng + ?Sized>(
    p: &ScenarioParams,
    roles: &RoleSets,
    model: LayerModel,
    trials: u64,
    rng: &mut R,
) -> u64 {
    let layers = roles.layers(model);
    let mut attacked = vec![false; p.nodes];
    let mut hits = 0;
    for _ in 0..trials {
        let chosen = index::sample(rng, p.nodes, p.attacked);
        for i in chosen.iter() {
            attacked[i] = true;
        }
        if denial_predicate(&layers, &attacked) {
            hits += 1;
        }
        for i in chosen.iter() {
            attacked[i] = false;
        }
    }
    hits
}

/// Draws `trials` uniform attacked sets of size `p.attacked` and counts denials.
pub fn montecarlo_denial<R: Rng + ?Sized>(
    p: &ScenarioParams,
    roles: &RoleSets,
    model: LayerModel,
    trials: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    check(p, trials)?;
    Ok(McEstimate::from_counts(
        count_hits(p, roles, model, trials, rng),
        trials,
    ))
}

/// Splits the trials into `partitions` slices, each with its own seed stream.
/// The result depends only on `(seed, partitions)`, so running the slices
/// in parallel gives the same answer as running them one after another.
pub fn montecarlo_partitioned(
    p: &ScenarioParams,
    roles: &RoleSets,
    model: LayerModel,
    trials: u64,
    partitions: usize,
    root_seed: u64,
    parallel: bool,
) -> Result<McEstimate> {
    check(p, trials)?;
    let parts = partitions.max(1) as u64;
    let run = |i: u64| {
        let share = trials / parts + u64::from(i < trials % parts);
        let mut rng = seed::stream(root_seed, &format!("montecarlo/{i}"));
        count_hits(p, roles, model, share, &mut rng)
    };
    let hits: u64 = if parallel {
        (0..parts).into_par_iter().map(run).sum()
    } else {
        (0..parts).map(run).sum()
    };
    Ok(McEstimate::from_counts(hits, trials))
}
