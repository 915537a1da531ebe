use crate::error::{Error, Result};
use crate::stable::{LatticeStepLaw, SceneryLaw};
use crate::ustat::KernelSpec;

/// Optional overrides of the `Delta_t` discretization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Discretization {
    pub dt: Option<f64>,
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub step_law: LatticeStepLaw,
    pub scenery_law: SceneryLaw,
    pub kernel: KernelSpec,
    pub n_grid: Vec<u64>,
    pub replicates: u64,
    pub master_seed: u64,
    pub beta_prime: f64,
    pub discretization: Discretization,
}

fn field(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Domain(format!("{name}: {msg}"))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(field("n_grid", "must contain at least one point"));
        }
        if self.n_grid[0] == 0 {
            return Err(field("n_grid", "points must be positive"));
        }
        if let Some(w) = self.n_grid.windows(2).find(|w| w[0] >= w[1]) {
            return Err(field(
                "n_grid",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(field("alpha", format!("{} not in (0, 2]", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return Err(field("beta", format!("{} not in (0, 2]", self.beta)));
        }
        if self.step_law.index != self.alpha {
            return Err(field(
                "step_law",
                format!(
                    "law has index {} but alpha = {}",
                    self.step_law.index, self.alpha
                ),
            ));
        }
        if self.scenery_law.index != self.beta {
            return Err(field(
                "scenery_law",
                format!(
                    "law has index {} but beta = {}",
                    self.scenery_law.index, self.beta
                ),
            ));
        }
        if !(self.beta_prime > self.beta) {
            return Err(field(
                "beta_prime",
                format!("{} must exceed beta = {}", self.beta_prime, self.beta),
            ));
        }
        for (name, v) in [
            ("discretization.dt", self.discretization.dt),
            ("discretization.dx", self.discretization.dx),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(field(name, format!("{v} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// `alpha' = max(1, alpha)`.
    pub fn alpha_prime(&self) -> f64 {
        self.alpha.max(1.0)
    }

    pub fn n_max(&self) -> u64 {
        *self.n_grid.last().expect("validated grid")
    }
}

/// Geometric grid `min, ..., max` with `per_octave` points per doubling,
/// rounded to integers and deduplicated.
pub fn geometric_grid(min: u64, max: u64, per_octave: u32) -> Result<Vec<u64>> {
    if min == 0 || max < min {
        return Err(field(
            "n_grid",
            format!("need 0 < min <= max, got {min}..{max}"),
        ));
    }
    if per_octave == 0 {
        return Err(field("n_grid.per_octave", "must be positive"));
    }
    let octaves = (max as f64 / min as f64).log2();
    let steps = (octaves * per_octave as f64).round() as u64;
    let mut grid: Vec<u64> = (0..=steps)
        .map(|i| (min as f64 * 2f64.powf(i as f64 / per_octave as f64)).round() as u64)
        .map(|n| n.min(max))
        .collect();
    grid.dedup();
    if *grid.last().expect("non-empty") != max {
        grid.push(max);
    }
    Ok(grid)
}
