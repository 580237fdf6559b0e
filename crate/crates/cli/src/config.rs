//! JSON configuration document shared by all commands.

use std::path::Path;

use pareto_acq::bo::{DensitySpec, GridSpec, Mode, RunConfig, WeightSpec};
use pareto_acq::geometry::Orientation;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default)]
    pub orientation: Orientation,
    pub reference: Option<Vec<f64>>,
    pub utopian: Option<Vec<f64>>,
    pub weights: Option<WeightSpec>,
    pub rho: Option<DensitySpec>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub mode: Option<Mode>,
    pub n_initial: Option<usize>,
    pub search_budget: Option<usize>,
    pub problem: Option<String>,
    pub grid: Option<GridSpec>,
}

impl ConfigDocument {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let doc: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<(), CliError> {
        if let (Some(r), Some(z)) = (&self.reference, &self.utopian) {
            if r.len() != z.len() {
                return Err(CliError::dimension(format!(
                    "reference has {} coordinates but utopian has {}",
                    r.len(),
                    z.len()
                )));
            }
        }
        if let (Some(WeightSpec::Explicit(ws)), Some(r)) = (&self.weights, self.reference.as_ref().or(self.utopian.as_ref())) {
            if let Some(w) = ws.iter().find(|w| w.dim() != r.len()) {
                return Err(CliError::dimension(format!("weight {:?} does not have {} entries", w.as_slice(), r.len())));
            }
        }
        Ok(())
    }

    /// Reference point in minimization orientation.
    pub fn reference_min(&self, m: usize) -> Result<Vec<f64>, CliError> {
        let r = self.reference.as_ref().ok_or_else(|| CliError::parse("config needs `reference`"))?;
        check_len("reference", r, m)?;
        Ok(self.orientation.to_min(r))
    }

    /// Utopian point in minimization orientation; zeros when absent.
    pub fn utopian_min(&self, m: usize) -> Result<Vec<f64>, CliError> {
        match &self.utopian {
            Some(z) => {
                check_len("utopian", z, m)?;
                Ok(self.orientation.to_min(z))
            }
            None => Ok(vec![0.0; m]),
        }
    }

    pub fn to_run_config(&self, seed_override: Option<u64>, threads: usize) -> Result<RunConfig, CliError> {
        if self.orientation != Orientation::Minimize {
            return Err(CliError::parse("`run` optimizes minimization problems; set orientation to \"min\""));
        }
        let mode = self.mode.ok_or_else(|| CliError::parse("config needs `mode`"))?;
        let budget = self.budget.ok_or_else(|| CliError::parse("config needs `budget`"))?;
        let reference = self.reference.clone().ok_or_else(|| CliError::parse("config needs `reference`"))?;
        let m = reference.len();
        let mut cfg = RunConfig::benchmark(mode, budget, seed_override.or(self.seed).unwrap_or(0));
        cfg.reference = reference;
        cfg.utopian = self.utopian.clone().unwrap_or_else(|| vec![0.0; m]);
        if let Some(w) = &self.weights {
            cfg.weights = w.clone();
        }
        if let Some(r) = &self.rho {
            cfg.rho = r.clone();
        }
        if let Some(n) = self.n_initial {
            cfg.n_initial = n;
        }
        if let Some(n) = self.search_budget {
            cfg.search_budget = n;
        }
        if let Some(g) = &self.grid {
            cfg.grid = g.clone();
        }
        cfg.threads = threads;
        Ok(cfg)
    }
}

fn check_len(name: &str, v: &[f64], m: usize) -> Result<(), CliError> {
    if v.len() != m {
        return Err(CliError::dimension(format!("{name} has {} coordinates, points have {m}", v.len())));
    }
    Ok(())
}
