//! Project configuration: one JSON file carrying the cost model, decision
//! policy knobs, and network hyperparameters for every subcommand.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use srgm_core::decision::{CategoryThresholds, PriorityCategory};
use srgm_core::nhpp::ModelKind;
use srgm_core::release::CostParams;
use srgm_core::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub costs: CostParams,
    /// Limiting-factor level above which a category's work is rejected.
    #[serde(default = "default_stringency")]
    pub stringency: f64,
    /// Odds in favor of cost when blending the two deviations.
    #[serde(default = "default_cost_odds")]
    pub cost_odds: f64,
    #[serde(default)]
    pub category_thresholds: CategoryThresholds,
    /// Faults tolerated per category name; unlisted categories tolerate none.
    #[serde(default)]
    pub fault_tolerances: BTreeMap<String, u64>,
    #[serde(default)]
    pub network: NetworkConfig,
    /// Default model family for `fit` when `--model` is not passed.
    #[serde(default)]
    pub model: Option<ModelKind>,
    /// Modules that already went through testing; their dependents get no
    /// priority promotion from them.
    #[serde(default)]
    pub tested_modules: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default = "default_hidden_units")]
    pub hidden_units: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_stringency() -> f64 {
    0.3
}

fn default_cost_odds() -> f64 {
    0.5
}

fn default_hidden_units() -> usize {
    8
}

fn default_theta() -> f64 {
    1.0
}

fn default_learning_rate() -> f64 {
    0.5
}

fn default_epochs() -> usize {
    5000
}

fn default_seed() -> u64 {
    42
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden_units: default_hidden_units(),
            theta: default_theta(),
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            seed: default_seed(),
        }
    }
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let config: ProjectConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.costs.validate()?;
        if !self.stringency.is_finite() || self.stringency < 0.0 {
            return Err(Error::Input(format!(
                "stringency must be finite and nonnegative, got {}",
                self.stringency
            )));
        }
        if !self.cost_odds.is_finite() || !(0.0..=1.0).contains(&self.cost_odds) {
            return Err(Error::Input(format!(
                "cost_odds must lie in [0, 1], got {}",
                self.cost_odds
            )));
        }
        self.category_thresholds.validate()?;
        for name in self.fault_tolerances.keys() {
            name.parse::<PriorityCategory>()?;
        }
        let net = &self.network;
        if net.hidden_units == 0 {
            return Err(Error::Input("network.hidden_units must be positive".to_string()));
        }
        if !net.theta.is_finite() || net.theta <= 0.0 {
            return Err(Error::Input(format!(
                "network.theta must be finite and positive, got {}",
                net.theta
            )));
        }
        if !net.learning_rate.is_finite() || net.learning_rate < 0.0 {
            return Err(Error::Input(format!(
                "network.learning_rate must be finite and nonnegative, got {}",
                net.learning_rate
            )));
        }
        Ok(())
    }

    /// Fault tolerance for one category, defaulting to zero.
    pub fn tolerance_for(&self, category: PriorityCategory) -> u64 {
        self.fault_tolerances
            .get(category.as_str())
            .copied()
            .unwrap_or(0)
    }
}
