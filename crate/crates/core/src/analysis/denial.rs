use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::exact::{binomial, containment_probability, ratio, to_f64};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Sizes of the role layers seen by one user and the number of nodes the
/// attacker floods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub nodes: usize,
    pub soaps_per_user: usize,
    pub beacons: usize,
    pub servlets: usize,
    pub attacked: usize,
    pub disjoint: bool,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.attacked > self.nodes {
            return Err(Error::invalid(format!(
                "attacked ({}) exceeds nodes ({})",
                self.attacked, self.nodes
            )));
        }
        let layers = [self.soaps_per_user, self.beacons, self.servlets];
        if self.disjoint && layers.iter().sum::<usize>() > self.nodes {
            return Err(Error::invalid("disjoint role layers do not fit in the overlay"));
        }
        if layers.iter().any(|&l| l > self.nodes) {
            return Err(Error::invalid("a role layer is larger than the overlay"));
        }
        Ok(())
    }
}

/// Which role layers count toward denial. The two-layer model drops the
/// beacon layer, since beacons are re-derived on failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerModel {
    #[default]
    Three,
    Two,
}

/// Explicit node indices (in `0..nodes`) holding each role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSets {
    pub soaps: Vec<usize>,
    pub beacons: Vec<usize>,
    pub servlets: Vec<usize>,
}

impl RoleSets {
    /// Disjoint params get consecutive blocks; overlapping params stack
    /// every layer from node 0.
    pub fn canonical(p: &ScenarioParams) -> Self {
        let block = |start: usize, len: usize| (start..start + len).collect::<Vec<_>>();
        if p.disjoint {
            Self {
                soaps: block(0, p.soaps_per_user),
                beacons: block(p.soaps_per_user, p.beacons),
                servlets: block(p.soaps_per_user + p.beacons, p.servlets),
            }
        } else {
            Self {
                soaps: block(0, p.soaps_per_user),
                beacons: block(0, p.beacons),
                servlets: block(0, p.servlets),
            }
        }
    }

    pub fn layers(&self, model: LayerModel) -> Vec<&[usize]> {
        match model {
            LayerModel::Three => vec![&self.soaps, &self.beacons, &self.servlets],
            LayerModel::Two => vec![&self.soaps, &self.servlets],
        }
    }

    fn check(&self, nodes: usize) -> Result<()> {
        let all = self.soaps.iter().chain(&self.beacons).chain(&self.servlets);
        if let Some(bad) = all.into_iter().find(|&&i| i >= nodes) {
            return Err(Error::invalid(format!("role node {bad} outside 0..{nodes}")));
        }
        Ok(())
    }
}

/// Communication fails iff some counted layer is entirely attacked.
pub fn denial_predicate(layers: &[&[usize]], attacked: &[bool]) -> bool {
    layers.iter().any(|layer| layer.iter().all(|&n| attacked[n]))
}

fn layer_sizes(p: &ScenarioParams, model: LayerModel) -> Vec<u64> {
    let mut sizes = vec![p.soaps_per_user as u64];
    if model == LayerModel::Three {
        sizes.push(p.beacons as u64);
    }
    sizes.push(p.servlets as u64);
    sizes
}

/// Closed-form denial probability for disjoint layers, by inclusion-exclusion
/// over the layers with hypergeometric containment terms.
pub fn analytic_denial_exact(p: &ScenarioParams, model: LayerModel) -> Result<BigRational> {
    p.validate()?;
    if !p.disjoint {
        return Err(Error::Unsupported(
            "closed form needs disjoint role layers; use enumeration or Monte Carlo".into(),
        ));
    }
    let sizes = layer_sizes(p, model);
    let (n, k) = (p.nodes as u64, p.attacked as u64);
    let mut total = BigRational::zero();
    for mask in 1u32..(1 << sizes.len()) {
        let union: u64 = sizes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s)
            .sum();
        let term = containment_probability(n, k, union);
        if mask.count_ones() % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    debug_assert!(total >= BigRational::zero() && total <= BigRational::one());
    Ok(total)
}

pub fn analytic_denial_probability(p: &ScenarioParams, model: LayerModel) -> Result<f64> {
    analytic_denial_exact(p, model).map(|r| to_f64(&r))
}

/// Brute force over every `k`-subset of nodes. Works for overlapping roles.
pub fn enumerate_denial_exact(
    p: &ScenarioParams,
    roles: &RoleSets,
    model: LayerModel,
    cap: u64,
) -> Result<BigRational> {
    if p.attacked > p.nodes {
        return Err(Error::invalid(format!(
            "attacked ({}) exceeds nodes ({})",
            p.attacked, p.nodes
        )));
    }
    roles.check(p.nodes)?;
    let (n, k) = (p.nodes, p.attacked);
    let count = binomial(n as u64, k as u64);
    if count > cap.into() {
        return Err(Error::TooLarge {
            count: count.to_string(),
            cap,
        });
    }

    let layers = roles.layers(model);
    let mut attacked = vec![false; n];
    let mut combo: Vec<usize> = (0..k).collect();
    for &i in &combo {
        attacked[i] = true;
    }
    let mut hits: u64 = 0;
    loop {
        if denial_predicate(&layers, &attacked) {
            hits += 1;
        }
        // Advance to the next combination in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            break;
        };
        for &i in &combo[pos..] {
            attacked[i] = false;
        }
        combo[pos] += 1;
        for i in pos + 1..k {
            combo[i] = combo[i - 1] + 1;
        }
        for &i in &combo[pos..] {
            attacked[i] = true;
        }
    }
    Ok(ratio(hits.into(), count))
}

pub fn enumerate_denial_oracle(p: &ScenarioParams, roles: &RoleSets, model: LayerModel, cap: u64) -> Result<f64> {
    enumerate_denial_exact(p, roles, model, cap).map(|r| to_f64(&r))
}
