use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::core_num::QuadConfig;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentSpec, ModelSpec, Reference, TestFunction};
use crate::model::{DriftSpec, SigmaSpec};
use crate::parametrix_continuous::SeriesConfig;
use crate::scheme::DiscreteSeriesConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Density,
    RateFunctional,
    RateDensity,
    Bounds,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Density => "density",
            Command::RateFunctional => "rate-functional",
            Command::RateDensity => "rate-density",
            Command::Bounds => "bounds",
            Command::Validate => "validate",
        }
    }
}

/// `[model]`: either `name` alone or the full inline coefficient set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl ModelSection {
    pub fn spec(&self) -> Result<ModelSpec> {
        let inline = [self.alpha, self.eta, self.l_bound, self.lambda];
        let any_inline = self.drift.is_some() || self.sigma.is_some() || inline.iter().any(Option::is_some);
        match &self.name {
            Some(name) if any_inline => Err(Error::Config(format!("model: give either name = \"{name}\" or inline coefficients, not both"))),
            Some(name) => Ok(ModelSpec::Catalog { name: name.clone() }),
            None => {
                let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::Config(format!("model: missing field '{key}'")));
                Ok(ModelSpec::Inline {
                    drift: self.drift.clone().ok_or_else(|| Error::Config("model: missing table 'drift'".into()))?,
                    sigma: self.sigma.clone().ok_or_else(|| Error::Config("model: missing table 'sigma'".into()))?,
                    alpha: need(self.alpha, "alpha")?,
                    eta: need(self.eta, "eta")?,
                    l_bound: need(self.l_bound, "L")?,
                    lambda: need(self.lambda, "lambda")?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "N_list", skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub n_paths: u64,
    /// Directory receiving `<command>.csv` and `<command>.json`.
    pub output: PathBuf,
    pub x0: f64,
    pub lattice: Vec<f64>,
    pub test_function: TestFunction,
    pub reference: Reference,
    /// Kernel bandwidth; enables the Monte Carlo column of `density`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    pub hybrid_order: usize,
    /// Replaces the quadrature layout of both series when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadConfig>,
    pub series: SeriesConfig,
    pub discrete: DiscreteSeriesConfig,
}

impl Default for RunSection {
    fn default() -> Self {
        let e = ExperimentSpec::default();
        Self {
            seed: e.seed,
            n_paths: 1000,
            output: PathBuf::from("out"),
            x0: e.x0,
            lattice: Vec::new(),
            test_function: e.test_function,
            reference: e.reference,
            bandwidth: None,
            hybrid_order: e.hybrid_order,
            quad: None,
            series: e.series,
            discrete: e.discrete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub command: Command,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Step counts: `N_list` when given, otherwise `[N]`.
    pub fn n_list(&self) -> Vec<usize> {
        match (&self.grid.n_list, self.grid.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    /// The single step count of per-grid commands.
    pub fn n(&self) -> Result<usize> {
        match (self.grid.n, &self.grid.n_list) {
            (Some(n), _) => Ok(n),
            (None, Some(list)) if !list.is_empty() => Ok(*list.last().unwrap()),
            _ => Err(Error::Config("grid: missing field 'N'".into())),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let r = &self.run;
        let mut series = r.series;
        let mut discrete = r.discrete;
        if let Some(q) = r.quad {
            series.quad = q;
            discrete.quad = q;
        }
        Ok(ExperimentSpec {
            model: self.model.spec()?,
            t_end: self.grid.t_end,
            n_list: self.n_list(),
            x0: r.x0,
            test_function: r.test_function,
            lattice: r.lattice.clone(),
            n_paths: r.n_paths,
            seed: r.seed,
            reference: r.reference,
            series,
            discrete,
            hybrid_order: r.hybrid_order,
        })
    }

    fn check(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("{field}: {why}")));
        if self.threads == Some(0) {
            return bad("threads", "must be at least 1");
        }
        if !(self.grid.t_end.is_finite() && self.grid.t_end > 0.0) {
            return bad("grid.T", "must be positive and finite");
        }
        if self.grid.n.is_none() && self.grid.n_list.is_none() {
            return bad("grid", "needs N or N_list");
        }
        if self.grid.n == Some(0) || self.grid.n_list.as_ref().is_some_and(|l| l.is_empty() || l.contains(&0)) {
            return bad("grid", "step counts must be positive");
        }
        if !self.run.x0.is_finite() || self.run.lattice.iter().any(|y| !y.is_finite()) {
            return bad("run", "x0 and lattice must be finite");
        }
        if self.run.bandwidth.is_some_and(|b| !(b.is_finite() && b > 0.0)) {
            return bad("run.bandwidth", "must be positive and finite");
        }
        if self.run.output.as_os_str().is_empty() {
            return bad("run.output", "must not be empty");
        }
        let model = self.model.spec()?;
        if let ModelSpec::Inline { alpha, eta, l_bound, lambda, .. } = &model {
            if [*alpha, *eta, *l_bound, *lambda].iter().any(|v| !v.is_finite()) {
                return bad("model", "all numeric fields must be finite");
            }
        }
        let spec = self.experiment()?;
        let checked = match self.command {
            Command::RateFunctional | Command::RateDensity => spec.validate_rate(),
            _ => spec.validate(),
        };
        checked.map_err(|e| match e {
            Error::Domain(msg) => Error::Config(msg),
            other => other,
        })
    }
}
