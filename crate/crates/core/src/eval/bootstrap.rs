use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{EvalError, ItemResult, Metric};
use crate::agent::Tool;

/// Stratified resampling: each resample draws `per_stratum` items with
/// replacement from each target tool's results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub per_stratum: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { resamples: 12, per_stratum: 10, alpha: 0.05, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub df: usize,
    pub t_critical: f64,
    pub margin_of_error: f64,
    pub resample_means: Vec<f64>,
}

/// Item subset a summary is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Kg,
    Vs,
    Overall,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Kg, Scope::Vs, Scope::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Kg => "kg",
            Scope::Vs => "vs",
            Scope::Overall => "overall",
        }
    }

    fn contains(self, tool: Tool) -> bool {
        match self {
            Scope::Kg => tool == Tool::Graph,
            Scope::Vs => tool == Tool::Vector,
            Scope::Overall => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub config: BootstrapConfig,
    pub scopes: BTreeMap<Scope, BTreeMap<Metric, MetricSummary>>,
}

/// Two-sided critical value `t` with P(|T| <= t) = 1 - alpha.
pub fn student_t_quantile(df: usize, alpha: f64) -> Result<f64, EvalError> {
    let dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
    Ok(dist.inverse_cdf(1.0 - alpha / 2.0))
}

/// Mean and sample standard deviation; values are shifted by the first one
/// so identical inputs give exactly zero spread.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let shift = xs[0];
    let n = xs.len() as f64;
    let d_mean = xs.iter().map(|x| x - shift).sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - shift - d_mean).powi(2)).sum::<f64>();
    let std = if xs.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
    (shift + d_mean, std)
}

pub fn bootstrap(results: &[ItemResult], config: &BootstrapConfig) -> Result<BootstrapReport, EvalError> {
    if config.resamples < 2 || config.per_stratum == 0 || !(0.0..1.0).contains(&config.alpha) || config.alpha == 0.0 {
        return Err(EvalError::InvalidConfig(format!("{config:?}")));
    }
    let strata: Vec<(Tool, Vec<&ItemResult>)> = [Tool::Graph, Tool::Vector]
        .into_iter()
        .map(|t| (t, results.iter().filter(|r| r.target_tool == t).collect()))
        .collect();
    for (tool, items) in &strata {
        if items.len() < config.per_stratum {
            return Err(EvalError::InsufficientResults {
                tool: tool.to_string(),
                needed: config.per_stratum,
                available: items.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut per_metric: BTreeMap<(Scope, Metric), Vec<f64>> = BTreeMap::new();
    for _ in 0..config.resamples {
        let mut drawn: Vec<&ItemResult> = Vec::with_capacity(config.per_stratum * strata.len());
        for (_, items) in &strata {
            for _ in 0..config.per_stratum {
                drawn.push(items[rng.random_range(0..items.len())]);
            }
        }
        for scope in Scope::ALL {
            for metric in Metric::ALL {
                let present: Vec<f64> = drawn
                    .iter()
                    .filter(|r| scope.contains(r.target_tool))
                    .filter_map(|r| r.scores.get(metric))
                    .collect();
                if !present.is_empty() {
                    let mean = present.iter().sum::<f64>() / present.len() as f64;
                    per_metric.entry((scope, metric)).or_default().push(mean);
                }
            }
        }
    }

    let mut scopes: BTreeMap<Scope, BTreeMap<Metric, MetricSummary>> = BTreeMap::new();
    for ((scope, metric), means) in per_metric {
        if means.len() < 2 {
            continue;
        }
        let (mean, std) = mean_std(&means);
        let df = means.len() - 1;
        let t = student_t_quantile(df, config.alpha)?;
        scopes.entry(scope).or_default().insert(
            metric,
            MetricSummary {
                mean,
                std,
                df,
                t_critical: t,
                margin_of_error: t * std / (means.len() as f64).sqrt(),
                resample_means: means,
            },
        );
    }
    Ok(BootstrapReport { config: *config, scopes })
}
