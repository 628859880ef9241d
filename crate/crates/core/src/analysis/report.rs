use serde::{Deserialize, Serialize};

use super::denial::{analytic_denial_probability, enumerate_denial_oracle, LayerModel, RoleSets, ScenarioParams};
use super::montecarlo::{montecarlo_partitioned, McEstimate};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Default agreement required between the closed form and the enumeration.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub model: LayerModel,
    pub trials: u64,
    pub partitions: usize,
    pub enumeration_cap: u64,
    /// Allowed gap between the closed form and the enumeration.
    pub tolerance: f64,
}

/// Every estimate available for one scenario. Fields are `None` when the
/// method does not apply (overlapping roles for the closed form, too many
/// subsets for enumeration, zero trials for Monte Carlo).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenialEstimate {
    pub params: ScenarioParams,
    pub analytic: Option<f64>,
    pub enumerated: Option<f64>,
    pub montecarlo: Option<McEstimate>,
}

impl DenialEstimate {
    pub fn compute(p: &ScenarioParams, opts: &EstimateOptions, seed: u64) -> Result<Self> {
        p.validate()?;
        let roles = RoleSets::canonical(p);
        let analytic = match analytic_denial_probability(p, opts.model) {
            Ok(v) => Some(v),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        let enumerated = match enumerate_denial_oracle(p, &roles, opts.model, opts.enumeration_cap) {
            Ok(v) => Some(v),
            Err(Error::TooLarge { .. }) => None,
            Err(e) => return Err(e),
        };
        let montecarlo = if opts.trials == 0 {
            None
        } else {
            Some(montecarlo_partitioned(
                p,
                &roles,
                opts.model,
                opts.trials,
                opts.partitions,
                seed,
                true,
            )?)
        };
        Ok(Self {
            params: *p,
            analytic,
            enumerated,
            montecarlo,
        })
    }

    /// Best exact value on hand: the closed form, else the enumeration.
    pub fn reference(&self) -> Option<f64> {
        self.analytic.or(self.enumerated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub k: usize,
    pub analytic: Option<f64>,
    pub enumerated: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_halfwidth: Option<f64>,
    pub gap: Option<f64>,
    pub pass: bool,
}

impl ComparisonRow {
    /// A row passes when the exact methods agree within `tolerance` and the
    /// Monte Carlo interval covers the exact value.
    pub fn from_estimate(scenario: impl Into<String>, est: &DenialEstimate, tolerance: f64) -> Self {
        let exact_ok = match (est.analytic, est.enumerated) {
            (Some(a), Some(e)) => (a - e).abs() <= tolerance,
            _ => true,
        };
        let gap = match (est.reference(), &est.montecarlo) {
            (Some(r), Some(mc)) => Some((r - mc.mean).abs()),
            _ => None,
        };
        let mc_ok = match (gap, &est.montecarlo) {
            (Some(g), Some(mc)) => g <= mc.half_width,
            _ => true,
        };
        Self {
            scenario: scenario.into(),
            nodes: est.params.nodes,
            k: est.params.attacked,
            analytic: est.analytic,
            enumerated: est.enumerated,
            mc_mean: est.montecarlo.as_ref().map(|m| m.mean),
            mc_halfwidth: est.montecarlo.as_ref().map(|m| m.half_width),
            gap,
            pass: exact_ok && mc_ok,
        }
    }
}

/// One row per named scenario; each scenario gets its own seed stream.
pub fn compare_report(
    scenarios: &[(String, ScenarioParams)],
    opts: &EstimateOptions,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if scenarios.is_empty() {
        return Err(Error::invalid("comparison needs at least one scenario"));
    }
    scenarios
        .iter()
        .map(|(name, p)| {
            let est = DenialEstimate::compute(p, opts, derive_seed(seed, &format!("compare/{name}")))?;
            Ok(ComparisonRow::from_estimate(name.clone(), &est, opts.tolerance))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub nodes: usize,
    pub analytic: Option<f64>,
    pub mc_mean: Option<f64>,
}

/// Re-evaluates `base` at each overlay size in `sizes`, holding roles and
/// attack size fixed.
pub fn node_sweep(
    base: &ScenarioParams,
    sizes: &[usize],
    opts: &EstimateOptions,
    seed: u64,
) -> Result<Vec<(SweepPoint, DenialEstimate)>> {
    if sizes.is_empty() {
        return Err(Error::invalid("sweep needs at least one overlay size"));
    }
    sizes
        .iter()
        .map(|&n| {
            let p = ScenarioParams { nodes: n, ..*base };
            let est = DenialEstimate::compute(&p, opts, derive_seed(seed, &format!("sweep/{n}")))?;
            let point = SweepPoint {
                nodes: n,
                analytic: est.analytic,
                mc_mean: est.montecarlo.as_ref().map(|m| m.mean),
            };
            Ok((point, est))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(trials: u64) -> EstimateOptions {
        EstimateOptions {
            model: LayerModel::Three,
            trials,
            partitions: 4,
            enumeration_cap: 1_000_000,
            tolerance: EXACT_TOLERANCE,
        }
    }

    fn base() -> ScenarioParams {
        ScenarioParams {
            nodes: 10,
            soaps_per_user: 3,
            beacons: 3,
            servlets: 3,
            attacked: 6,
            disjoint: true,
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(compare_report(&[], &opts(10), 1).is_err());
        assert!(node_sweep(&base(), &[], &opts(10), 1).is_err());
    }

    #[test]
    fn compare_rows_agree() {
        let rows = compare_report(
            &[
                ("a".into(), base()),
                ("b".into(), ScenarioParams { nodes: 20, ..base() }),
            ],
            &opts(100_000),
            9,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.pass, "{row:?}");
            assert!((row.analytic.unwrap() - row.enumerated.unwrap()).abs() <= EXACT_TOLERANCE);
        }
    }

    #[test]
    fn overlapping_roles_skip_closed_form() {
        let p = ScenarioParams {
            disjoint: false,
            ..base()
        };
        let est = DenialEstimate::compute(&p, &opts(1000), 3).unwrap();
        assert!(est.analytic.is_none());
        assert!(est.enumerated.is_some());
    }

    #[test]
    fn sweep_decreases_with_overlay_size() {
        let points = node_sweep(&base(), &[10, 20, 40, 80], &opts(0), 1).unwrap();
        let values: Vec<f64> = points.iter().map(|(p, _)| p.analytic.unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(points[3].1.enumerated.is_none(), "C(80,6) exceeds the cap");
    }
}
