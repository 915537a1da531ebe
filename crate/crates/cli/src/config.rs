//! TOML run configuration.
//!
//! ```toml
//! alpha = 2.0
//! beta = 2.0
//! replicates = 200
//! master_seed = 20240601
//!
//! [step_law]
//! name = "lazy_simple"
//! hold_prob = 0.5
//!
//! [scenery_law]
//! name = "rademacher"
//!
//! [kernel]
//! name = "product_plus_sum"
//!
//! [n_grid]
//! min = 1024
//! max = 131072
//! per_octave = 1
//! ```

use std::path::Path;

use rwrs_core::stable::{LatticeStepLaw, SceneryLaw};
use rwrs_core::ustat::{H1Mode, KernelKind, KernelSpec};
use rwrs_core::verify::{geometric_grid, Discretization, ExperimentConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SEED_ENV: &str = "RWRS_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepLawConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_cut: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneryLawConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub name: String,
    #[serde(default = "default_h1_mode")]
    pub h1_mode: H1Mode,
    #[serde(default = "default_h1_samples")]
    pub h1_samples: usize,
}

fn default_h1_mode() -> H1Mode {
    H1Mode::Analytic
}

fn default_h1_samples() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_octave: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSettings {
    /// Smallest grid point entering the exponent fit.
    pub fit_n_min: u64,
    pub quantile: f64,
    pub bootstrap: usize,
    /// Accepted slope interval; `target -+ band_halfwidth` when absent.
    pub band: Option<[f64; 2]>,
    pub band_halfwidth: f64,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        Self {
            fit_n_min: 4096,
            quantile: 0.5,
            bootstrap: 200,
            band: None,
            band_halfwidth: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitSettings {
    pub n_star: u64,
    pub replicates: u64,
    pub delta_draws: u64,
    pub ks_threshold: f64,
    pub refinement_draws: u64,
    pub refinement_tolerance: f64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        Self {
            n_star: 1 << 16,
            replicates: 2000,
            delta_draws: 2000,
            ks_threshold: 0.1,
            refinement_draws: 10_000,
            refinement_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LilSettings {
    pub k_min: u64,
    pub n_max: u64,
    pub replicates: u64,
    pub ks_threshold: f64,
}

impl Default for LilSettings {
    fn default() -> Self {
        Self {
            k_min: 10_000,
            n_max: 1_000_000,
            replicates: 2000,
            ks_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfIntSettings {
    /// Smallest grid point entering the moment fits.
    pub n_min: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemainderSettings {
    pub n_min: u64,
}

impl Default for RemainderSettings {
    fn default() -> Self {
        Self { n_min: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub scaling: ScalingSettings,
    pub limit: LimitSettings,
    pub lil: LilSettings,
    pub selfint: SelfIntSettings,
    pub remainder: RemainderSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateBSettings {
    pub horizon: u64,
    pub replicates: u64,
}

impl Default for EstimateBSettings {
    fn default() -> Self {
        Self {
            horizon: 200_000,
            replicates: 1000,
        }
    }
}

/// The configuration file, with every default resolved after loading; its
/// JSON form is what the manifest echoes and hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub replicates: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub beta_prime: Option<f64>,
    pub step_law: StepLawConfig,
    pub scenery_law: SceneryLawConfig,
    pub kernel: KernelConfig,
    pub n_grid: GridConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub estimate_b: EstimateBSettings,
}

/// Validated configuration plus the core experiment it describes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub experiment: ExperimentConfig,
    /// `"config"` or the name of the overriding environment variable.
    pub seed_source: String,
}

impl LoadedConfig {
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.run).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| invalid(field, "missing"))
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let seed = std::env::var(SEED_ENV).ok();
    parse_config(&text, seed.as_deref()).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parse and validate; `seed_override` replaces `master_seed`.
pub fn parse_config(text: &str, seed_override: Option<&str>) -> Result<LoadedConfig, CliError> {
    let mut run: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut seed_source = "config".to_string();
    if let Some(s) = seed_override {
        run.master_seed = s
            .trim()
            .parse()
            .map_err(|_| invalid(SEED_ENV, format!("`{s}` is not a 64-bit unsigned integer")))?;
        seed_source = SEED_ENV.to_string();
    }
    run.beta_prime = Some(run.beta_prime.unwrap_or(run.beta + 0.5));
    resolve_laws(&mut run);
    let experiment = build_experiment(&run)?;
    validate_settings(&run)?;
    Ok(LoadedConfig {
        run,
        experiment,
        seed_source,
    })
}

fn resolve_laws(run: &mut RunConfig) {
    let step = &mut run.step_law;
    match step.name.as_str() {
        "lazy_simple" => {
            step.hold_prob.get_or_insert(0.5);
            step.index.get_or_insert(2.0);
        }
        "sym_pareto" => {
            step.hold_prob.get_or_insert(0.2);
            step.index.get_or_insert(run.alpha);
        }
        _ => {}
    }
    let scenery = &mut run.scenery_law;
    match scenery.name.as_str() {
        "rademacher" | "gaussian" => {
            scenery.scale.get_or_insert(1.0);
            scenery.index.get_or_insert(2.0);
        }
        "sym_pareto_real" => {
            scenery.scale.get_or_insert(1.0);
            scenery.index.get_or_insert(run.beta);
        }
        _ => {}
    }
}

fn build_experiment(run: &RunConfig) -> Result<ExperimentConfig, CliError> {
    let step = &run.step_law;
    let step_law = match step.name.as_str() {
        "lazy_simple" => {
            if step.index != Some(2.0) {
                return Err(invalid("step_law.index", "lazy_simple has index 2"));
            }
            if step.tail_cut.is_some() {
                return Err(invalid(
                    "step_law.tail_cut",
                    "only sym_pareto takes a tail cut",
                ));
            }
            LatticeStepLaw::lazy_simple(step.hold_prob.unwrap_or(0.5))
                .map_err(|e| invalid("step_law.hold_prob", e))?
        }
        "sym_pareto" => LatticeStepLaw::symmetric_pareto(
            require(step.index, "step_law.index")?,
            step.hold_prob.unwrap_or(0.2),
            step.tail_cut,
        )
        .map_err(|e| invalid("step_law", e))?,
        other => {
            return Err(invalid(
                "step_law.name",
                format!("unknown step law `{other}` (lazy_simple, sym_pareto)"),
            ))
        }
    };
    let sc = &run.scenery_law;
    let scale = sc.scale.unwrap_or(1.0);
    let scenery_law = match sc.name.as_str() {
        "rademacher" => {
            if scale != 1.0 || sc.index != Some(2.0) {
                return Err(invalid(
                    "scenery_law",
                    "rademacher takes values +-1 and has index 2",
                ));
            }
            SceneryLaw::rademacher()
        }
        "gaussian" => {
            if sc.index != Some(2.0) {
                return Err(invalid("scenery_law.index", "gaussian has index 2"));
            }
            SceneryLaw::gaussian(scale).map_err(|e| invalid("scenery_law.scale", e))?
        }
        "sym_pareto_real" => {
            SceneryLaw::symmetric_pareto_real(require(sc.index, "scenery_law.index")?, scale)
                .map_err(|e| invalid("scenery_law", e))?
        }
        other => {
            return Err(invalid(
                "scenery_law.name",
                format!("unknown scenery law `{other}` (rademacher, gaussian, sym_pareto_real)"),
            ))
        }
    };
    let kind = KernelKind::from_name(&run.kernel.name).ok_or_else(|| {
        invalid(
            "kernel.name",
            format!("unknown kernel `{}`", run.kernel.name),
        )
    })?;
    let kernel = KernelSpec::centered(
        kind,
        run.kernel.h1_mode,
        run.kernel.h1_samples,
        &scenery_law,
    )
    .map_err(|e| invalid("kernel.h1_samples", e))?;
    let n_grid = match (&run.n_grid.points, run.n_grid.min, run.n_grid.max) {
        (Some(points), None, None) => points.clone(),
        (None, Some(min), Some(max)) => {
            geometric_grid(min, max, run.n_grid.per_octave.unwrap_or(1)).map_err(|e| {
                CliError::Config(e.to_string().replace("parameter out of domain: ", ""))
            })?
        }
        _ => {
            return Err(invalid(
                "n_grid",
                "give either `points` or both `min` and `max`",
            ))
        }
    };
    let experiment = ExperimentConfig {
        alpha: run.alpha,
        beta: run.beta,
        step_law,
        scenery_law,
        kernel,
        n_grid,
        replicates: run.replicates,
        master_seed: run.master_seed,
        beta_prime: run.beta_prime.expect("resolved"),
        discretization: Discretization {
            dt: run.discretization.dt,
            dx: run.discretization.dx,
        },
    };
    experiment
        .validate()
        .map_err(|e| CliError::Config(e.to_string().replace("parameter out of domain: ", "")))?;
    Ok(experiment)
}

fn validate_settings(run: &RunConfig) -> Result<(), CliError> {
    let v = &run.verify;
    if !(v.scaling.quantile > 0.0 && v.scaling.quantile < 1.0) {
        return Err(invalid("verify.scaling.quantile", "must be in (0, 1)"));
    }
    if let Some([lo, hi]) = v.scaling.band {
        if !(lo < hi) {
            return Err(invalid("verify.scaling.band", "needs lo < hi"));
        }
    }
    if v.limit.n_star == 0 || v.limit.replicates == 0 {
        return Err(invalid(
            "verify.limit",
            "n_star and replicates must be positive",
        ));
    }
    if v.lil.k_min < 16 {
        return Err(invalid(
            "verify.lil.k_min",
            "must be >= 16 so that log log k > 0",
        ));
    }
    if v.lil.n_max < v.lil.k_min {
        return Err(invalid("verify.lil.n_max", "must be >= k_min"));
    }
    if v.lil.replicates == 0 {
        return Err(invalid("verify.lil.replicates", "must be at least 1"));
    }
    if run.estimate_b.horizon < 2 || run.estimate_b.replicates < 2 {
        return Err(invalid("estimate_b", "horizon and replicates must be >= 2"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
alpha = 2.0
beta = 2.0
replicates = 2
master_seed = 7

[step_law]
name = "lazy_simple"

[scenery_law]
name = "rademacher"

[kernel]
name = "product_plus_sum"

[n_grid]
points = [16, 32]
"#;

    #[test]
    fn minimal_config_resolves_defaults() {
        let c = parse_config(MINIMAL, None).unwrap();
        assert_eq!(c.run.beta_prime, Some(2.5));
        assert_eq!(c.run.step_law.hold_prob, Some(0.5));
        assert_eq!(c.experiment.n_grid, vec![16, 32]);
        assert_eq!(c.seed_source, "config");
        assert_eq!(c.hash(), parse_config(MINIMAL, None).unwrap().hash());
    }

    #[test]
    fn seed_override_changes_hash() {
        let a = parse_config(MINIMAL, None).unwrap();
        let b = parse_config(MINIMAL, Some("99")).unwrap();
        assert_eq!(b.experiment.master_seed, 99);
        assert_eq!(b.seed_source, SEED_ENV);
        assert_ne!(a.hash(), b.hash());
        assert!(parse_config(MINIMAL, Some("x")).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let zero = MINIMAL.replace("replicates = 2", "replicates = 0");
        let err = parse_config(&zero, None).unwrap_err().to_string();
        assert!(err.contains("replicates"), "{err}");
        let bad = MINIMAL.replace("product_plus_sum", "cubic");
        assert!(parse_config(&bad, None)
            .unwrap_err()
            .to_string()
            .contains("kernel.name"));
        let typo = MINIMAL.replace("master_seed", "master_sed");
        let err = parse_config(&typo, None).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let mismatch = MINIMAL.replace("alpha = 2.0", "alpha = 1.5");
        assert!(parse_config(&mismatch, None)
            .unwrap_err()
            .to_string()
            .contains("step_law"));
    }

    #[test]
    fn geometric_grid_and_pareto_laws() {
        let text = MINIMAL
            .replace("points = [16, 32]", "min = 1024\nmax = 8192")
            .replace("alpha = 2.0", "alpha = 0.8")
            .replace("name = \"lazy_simple\"", "name = \"sym_pareto\"");
        let c = parse_config(&text, None).unwrap();
        assert_eq!(c.experiment.n_grid, vec![1024, 2048, 4096, 8192]);
        assert_eq!(c.experiment.step_law.index, 0.8);
        assert_eq!(c.run.step_law.hold_prob, Some(0.2));
    }
}
