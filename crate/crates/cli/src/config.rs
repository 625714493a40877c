//! Run configuration: serializable to/from TOML, resolved into the core
//! pipeline options. Every fit and benchmark writes a manifest embedding the
//! full resolved configuration, and a manifest can be fed back through
//! `--config` to reproduce the run.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use coclust_core::cluster::KmeansParams;
use coclust_core::pipeline::{Calibration, FitOptions, MatrixTreatment, TextWeight};
use coclust_core::seeding::derive_seed;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// plain | center | scale | tfidf
    pub scaling: String,
    /// graph | combined | text | all-one
    pub h_mode: String,
    /// Text weight in calibrated units (combined mode).
    pub h: f64,
    /// none | first | second: which singular value the text part is matched
    /// on before `h` applies.
    pub calibration: String,
    /// Threshold tail fraction.
    pub alpha: f64,
    pub k_c: usize,
    pub k_p: usize,
    /// Master seed; SVD and k-means seeds derive from it.
    pub seed: u64,
    pub svd: SvdConfig,
    pub kmeans: KmeansConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SvdConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub oversample: usize,
    pub power_iters: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct KmeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scaling: "center".to_string(),
            h_mode: "combined".to_string(),
            h: 0.035,
            calibration: "second".to_string(),
            alpha: 0.05,
            k_c: 4,
            k_p: 4,
            seed: 0,
            svd: SvdConfig::default(),
            kmeans: KmeansConfig::default(),
        }
    }
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            tol: 1e-9,
            max_iter: 200,
            oversample: 10,
            power_iters: 4,
        }
    }
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            restarts: 50,
            max_iter: 300,
            tol: 1e-9,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.scaling.as_str() {
            "plain" | "center" | "scale" | "tfidf" => {}
            other => bail!("unknown scaling `{other}` (plain|center|scale|tfidf)"),
        }
        match self.h_mode.as_str() {
            "graph" | "combined" | "text" | "all-one" => {}
            other => bail!("unknown h_mode `{other}` (graph|combined|text|all-one)"),
        }
        match self.calibration.as_str() {
            "none" | "first" | "second" => {}
            other => bail!("unknown calibration `{other}` (none|first|second)"),
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            bail!("alpha must lie in (0, 1], got {}", self.alpha);
        }
        if self.h < 0.0 || !self.h.is_finite() {
            bail!("h must be a finite nonnegative real, got {}", self.h);
        }
        if self.k_c == 0 || self.k_p == 0 {
            bail!("k_c and k_p must be at least 1");
        }
        Ok(())
    }

    pub fn uses_tfidf_matrices(&self) -> bool {
        self.scaling == "tfidf"
    }

    /// Resolves into pipeline options.
    pub fn to_fit_options(&self) -> Result<FitOptions> {
        self.validate()?;
        let mut opts = FitOptions::new(self.k_c, self.k_p, self.seed);
        opts.treatment = match self.scaling.as_str() {
            "plain" => MatrixTreatment::Plain,
            // TF-IDF swaps the input matrices upstream, then centers.
            "center" | "tfidf" => MatrixTreatment::Center,
            "scale" => MatrixTreatment::ScaleThenCenter,
            _ => unreachable!(),
        };
        opts.weight = match self.h_mode.as_str() {
            "graph" => TextWeight::GraphOnly,
            "combined" => TextWeight::Value(self.h),
            "text" => TextWeight::TextOnly,
            "all-one" => TextWeight::AllOne,
            _ => unreachable!(),
        };
        opts.calibration = match self.calibration.as_str() {
            "none" => Calibration::None,
            "first" => Calibration::SingularValue(0),
            "second" => Calibration::SingularValue(1),
            _ => unreachable!(),
        };
        opts.alpha = self.alpha;
        opts.svd.seed = derive_seed(self.seed, &[1]);
        opts.svd.tol = self.svd.tol;
        opts.svd.max_iter = self.svd.max_iter;
        opts.svd.oversample = self.svd.oversample;
        opts.svd.power_iters = self.svd.power_iters;
        opts.kmeans = KmeansParams {
            restarts: self.kmeans.restarts,
            seed: derive_seed(self.seed, &[2]),
            max_iter: self.kmeans.max_iter,
            tol: self.kmeans.tol,
        };
        Ok(opts)
    }
}

/// The manifest written next to every fit: the resolved config plus
/// provenance. A manifest file parses as a config through `load_config`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
}

impl Manifest {
    pub fn new(config: RunConfig, command: &str) -> Manifest {
        Manifest {
            config,
            provenance: Provenance {
                tool: "coclust".to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
            },
        }
    }
}

/// Reads either a bare `RunConfig` or a manifest (whose `[config]` table is
/// used), so a manifest is always sufficient to re-run.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    if let Ok(manifest) = toml::from_str::<Manifest>(&text) {
        return Ok(manifest.config);
    }
    let config: RunConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_stable() {
        let config = RunConfig {
            h: 0.2,
            seed: 9,
            ..RunConfig::default()
        };
        let text = toml::to_string_pretty(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, back);
        let text2 = toml::to_string_pretty(&back).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn manifest_parses_as_config() {
        let manifest = Manifest::new(RunConfig::default(), "fit");
        let text = toml::to_string_pretty(&manifest).unwrap();
        let dir = std::env::temp_dir().join("coclust-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.toml");
        std::fs::write(&path, text).unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(config, RunConfig::default());
    }

    #[test]
    fn bad_values_rejected() {
        let mut config = RunConfig::default();
        config.alpha = 0.0;
        assert!(config.validate().is_err());
        config = RunConfig::default();
        config.scaling = "bogus".to_string();
        assert!(config.validate().is_err());
    }
}
