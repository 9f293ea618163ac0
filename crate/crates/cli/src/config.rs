//! JSON run configuration. Every field has a default, so `{}` (or no file at
//! all) is the reference setup: `x = 100`, `mu = 5`, `alpha = 10`,
//! `lambda = 1`, `a = Q = 50`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use reorder_core::{
    CostParams, ExperimentConfig, OrderingMode, PolicyParams, ProcessParams, RenewalSeriesConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 20.0,
            steps: 200,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        reorder_core::cost::linear_grid(self.t_start, self.t_end, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub base_seed: u64,
    /// Horizon of the `simulate` command.
    pub horizon: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            base_seed: 1,
            horizon: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_list: Vec<f64>,
    pub q_list: Vec<f64>,
    pub c_o_list: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a_list: vec![30.0, 40.0, 50.0, 60.0],
            q_list: vec![50.0, 60.0, 110.0, 120.0],
            c_o_list: vec![1.0, 5.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub times: Vec<f64>,
    /// Negative-control hook: scales `lambda` on the analytical side only.
    pub analytical_lambda_scale: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            times: vec![2.0, 5.0, 10.0],
            analytical_lambda_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FptDiagConfig {
    pub n_max: usize,
    pub grid: GridSpec,
}

impl Default for FptDiagConfig {
    fn default() -> Self {
        Self {
            n_max: 5,
            grid: GridSpec {
                t_start: 0.0,
                t_end: 25.0,
                steps: 100,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub process: ProcessParams,
    pub policy: PolicyParams,
    pub costs: CostParams,
    pub grid: GridSpec,
    pub series: RenewalSeriesConfig,
    pub mc: McConfig,
    pub sweep: SweepConfig,
    pub validate: ValidateConfig,
    pub fpt: FptDiagConfig,
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            process: ProcessParams::default(),
            policy: PolicyParams::default(),
            costs: CostParams::default(),
            grid: GridSpec::default(),
            series: RenewalSeriesConfig::default(),
            mc: McConfig::default(),
            sweep: SweepConfig::default(),
            validate: ValidateConfig::default(),
            fpt: FptDiagConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub mode: Option<OrderingMode>,
    pub series: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    /// `--mode` applies to the analytical costs and the experiment alike.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.mc.base_seed = seed;
            self.experiment.base_seed = seed;
        }
        if let Some(paths) = o.paths {
            self.mc.n_paths = paths;
        }
        if let Some(mode) = o.mode {
            self.costs.ordering_mode = mode;
            self.experiment.costs.ordering_mode = mode;
        }
        if let Some(n) = o.series {
            self.experiment.n_series = n;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        self.policy.validate()?;
        self.costs.validate()?;
        self.series.validate()?;
        self.experiment.validate()?;
        if self.grid.t_start < 0.0 {
            bail!("grid must start at t >= 0");
        }
        if self.mc.n_paths < 2 {
            bail!("mc.n_paths must be at least 2");
        }
        if !(self.mc.horizon > 0.0) {
            bail!("mc.horizon must be positive");
        }
        Ok(())
    }
}
