//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use mcwave_core::model::AnalyticModel;
use mcwave_core::FilterFamily;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

/// Environment variable that overrides `[sweep] seed`.
pub const SEED_ENV: &str = "MCWAVE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub time: f64,
    pub truncation: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            time: 0.1,
            truncation: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    /// Family name, e.g. `landweber`, `landweber:0.1`, `dyadic`, `iter-tikhonov:3`.
    pub family: String,
    /// Eigenvalue drop threshold; defaults to `1e-12 · λ̂_max`.
    pub drop_threshold: Option<f64>,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            family: "landweber".into(),
            drop_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// `f = T^α h` with `‖h‖_H = 1`.
    Source,
    /// `f = K(·, x_1)` at the first sample of each trial.
    Section,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalSection {
    pub kind: SignalKind,
    pub alpha: f64,
    /// Smoothness used by the Besov schedule; defaults to `alpha`.
    pub s: Option<f64>,
    /// Explicit coefficients of `h` in the model basis; drawn at random when absent.
    pub h: Option<Vec<f64>>,
    /// Seed for the random `h`; defaults to the sweep seed.
    pub h_seed: Option<u64>,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            kind: SignalKind::Source,
            alpha: 1.0,
            s: None,
            h: None,
            h_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Sobolev,
    Besov,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Feature covariance when the kernel has a finite feature map.
    Auto,
    Dense,
    Features,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n: Vec<usize>,
    pub trials: usize,
    pub schedule: Schedule,
    /// Resolution for the fixed schedule.
    pub tau: Option<u32>,
    pub seed: u64,
    /// Central mass of the reported quantile band.
    pub confidence: f64,
    pub route: Route,
    /// Worker threads; `0` uses the rayon default.
    pub threads: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n: vec![64, 128, 256, 512, 1024, 2048],
            trials: 20,
            schedule: Schedule::Sobolev,
            tau: None,
            seed: 1,
            confidence: 0.8,
            route: Route::Auto,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub rows: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub filter: FilterSection,
    pub signal: SignalSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> AppResult<Self> {
        toml::from_str(text).map_err(|source| AppError::Toml {
            path: origin.to_path_buf(),
            source,
        })
    }

    /// Reads, applies the `MCWAVE_SEED` override and validates.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> AppResult<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.sweep.seed = v
                .trim()
                .parse()
                .map_err(|_| AppError::Config(format!("{SEED_ENV}={v:?} is not a u64")))?;
        }
        Ok(())
    }

    pub fn model(&self) -> AppResult<AnalyticModel> {
        AnalyticModel::new(self.model.time, self.model.truncation)
            .map_err(|e| AppError::Config(e.to_string()))
    }

    pub fn family(&self) -> AppResult<FilterFamily> {
        let model = self.model()?;
        FilterFamily::parse(&self.filter.family, model.kappa_sq())
            .map_err(|e| AppError::Config(e.to_string()))
    }

    pub fn besov_s(&self) -> f64 {
        self.signal.s.unwrap_or(self.signal.alpha)
    }

    pub fn validate(&self) -> AppResult<()> {
        let fail = |m: String| Err(AppError::Config(m));
        self.model()?;
        self.family()?;
        if self.sweep.n.is_empty() {
            return fail("sweep.n is empty".into());
        }
        if self.sweep.n.windows(2).any(|w| w[0] >= w[1]) || self.sweep.n[0] == 0 {
            return fail(format!(
                "sweep.n must be positive and strictly ascending, got {:?}",
                self.sweep.n
            ));
        }
        if self.sweep.trials == 0 {
            return fail("sweep.trials must be at least 1".into());
        }
        if !(self.signal.alpha > 0.0) {
            return fail(format!(
                "signal.alpha must be positive, got {}",
                self.signal.alpha
            ));
        }
        if !(self.besov_s() > 0.0) {
            return fail(format!("signal.s must be positive, got {}", self.besov_s()));
        }
        if let Some(h) = &self.signal.h {
            let dim = 2 * self.model.truncation + 1;
            if h.len() != dim {
                return fail(format!(
                    "signal.h has {} coefficients, model needs {dim}",
                    h.len()
                ));
            }
        }
        if !(self.sweep.confidence > 0.0 && self.sweep.confidence < 1.0) {
            return fail(format!(
                "sweep.confidence must lie in (0, 1), got {}",
                self.sweep.confidence
            ));
        }
        if self.sweep.schedule == Schedule::Fixed && self.sweep.tau.is_none() {
            return fail("sweep.schedule = \"fixed\" needs sweep.tau".into());
        }
        if self.sweep.route == Route::Features && self.model.truncation == 0 {
            return fail("feature route needs a finite feature map".into());
        }
        Ok(())
    }
}
