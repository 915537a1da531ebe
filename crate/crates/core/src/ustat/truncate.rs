//! Level-`l` truncation of a kernel and its Hoeffding parts:
//! `h0l = h 1{|h| <= a_l}`, `h1l(x) = E h0l(x, xi)`,
//! `h2l = h0l - h1l(x) - h1l(y)` with `a_l = 2^{l (1 + beta') / (alpha' beta')}`.

use crate::error::{Error, Result};
use crate::stable::SceneryLaw;

use super::kernel::{H1Mode, KernelKind, KernelSpec, LawMeasure};

/// `a_l`.
pub fn truncation_threshold(level: u32, alpha_prime: f64, beta_prime: f64) -> f64 {
    2f64.powf(level as f64 * (1.0 + beta_prime) / (alpha_prime * beta_prime))
}

/// `eta = 2 beta' / (1 + beta')`.
pub fn moment_exponent(beta_prime: f64) -> f64 {
    2.0 * beta_prime / (1.0 + beta_prime)
}

#[derive(Debug, Clone, PartialEq)]
enum TruncatedLinear {
    Zero,
    /// closed form for kernels affine in the second argument
    Affine(SceneryLaw),
    Average(LawMeasure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedKernel {
    pub level: u32,
    pub threshold: f64,
    pub base: KernelSpec,
    h1l: TruncatedLinear,
}

impl TruncatedKernel {
    #[inline]
    pub fn h0l(&self, x: f64, y: f64) -> f64 {
        let v = self.base.eval(x, y);
        if v.abs() <= self.threshold {
            v
        } else {
            0.0
        }
    }

    pub fn h1l(&self, x: f64) -> f64 {
        match &self.h1l {
            TruncatedLinear::Zero => 0.0,
            TruncatedLinear::Affine(law) => {
                let (p, q) = self.base.affine_in_second(x).expect("affine kernel");
                truncated_affine_mean(law, p, q, self.threshold)
            }
            TruncatedLinear::Average(m) => m.expect(|y| self.h0l(x, y)),
        }
    }

    pub fn h2l(&self, x: f64, y: f64) -> f64 {
        self.h0l(x, y) - self.h1l(x) - self.h1l(y)
    }

    /// Truncation never bites: `sup |h| <= a_l`.
    pub fn is_inactive(&self) -> bool {
        self.base
            .kind
            .sup_bound()
            .is_some_and(|b| b <= self.threshold)
    }
}

/// `E[(p xi + q) 1{|p xi + q| <= a}]`.
pub fn truncated_affine_mean(law: &SceneryLaw, p: f64, q: f64, a: f64) -> f64 {
    if p == 0.0 {
        return if q.abs() <= a { q } else { 0.0 };
    }
    let (e1, e2) = ((-a - q) / p, (a - q) / p);
    let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    let (prob, first) = law.interval_moments(lo, hi);
    p * first + q * prob
}

/// Build the level-`level` truncated kernel. `alpha_prime = max(1, alpha)` and
/// `beta_prime` must exceed the scenery index `beta`.
pub fn truncate_kernel(
    base: &KernelSpec,
    law: &SceneryLaw,
    level: u32,
    alpha_prime: f64,
    beta_prime: f64,
) -> Result<TruncatedKernel> {
    if level == 0 {
        return Err(Error::Domain("truncation level must be positive".into()));
    }
    if !(beta_prime > law.index) {
        return Err(Error::Domain(format!(
            "beta' = {beta_prime} must exceed beta = {}",
            law.index
        )));
    }
    if !(alpha_prime >= 1.0 && alpha_prime <= 2.0) {
        return Err(Error::Domain(format!(
            "alpha' = {alpha_prime} must be max(1, alpha) in [1, 2]"
        )));
    }
    let threshold = truncation_threshold(level, alpha_prime, beta_prime);
    let h1l = match base.h1_mode {
        H1Mode::Analytic => match base.kind {
            KernelKind::Sum | KernelKind::Product | KernelKind::ProductPlusSum => {
                TruncatedLinear::Affine(*law)
            }
            // sign(x y) 1{1 <= a}: E sign(xi) = 0 for a symmetric law
            KernelKind::BoundedSignProduct => TruncatedLinear::Zero,
            KernelKind::Custom(def) => {
                if law.atoms().is_none() {
                    return Err(Error::Unsupported(format!(
                        "custom kernel `{}` has no closed-form truncated h1 under a continuous scenery",
                        def.name
                    )));
                }
                TruncatedLinear::Average(LawMeasure::exact(law))
            }
        },
        H1Mode::MonteCarloEstimated => {
            TruncatedLinear::Average(LawMeasure::frozen_draws(law, base.h1_samples))
        }
    };
    Ok(TruncatedKernel {
        level,
        threshold,
        base: base.clone(),
        h1l,
    })
}

/// Monte Carlo sides of the tail bound
/// `E|h - h0l| <= a_l^{1 - eta} E|h|^eta`, over the same pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBound {
    pub mean_excess: f64,
    pub bound: f64,
    pub mean_abs_pow_eta: f64,
}

pub fn truncation_bound_check(
    trunc: &TruncatedKernel,
    eta: f64,
    pairs: &[(f64, f64)],
) -> TruncationBound {
    let n = pairs.len() as f64;
    let mut excess = 0.0;
    let mut moment = 0.0;
    for &(x, y) in pairs {
        let h = trunc.base.eval(x, y);
        excess += (h - trunc.h0l(x, y)).abs();
        moment += h.abs().powf(eta);
    }
    let mean_abs_pow_eta = moment / n;
    TruncationBound {
        mean_excess: excess / n,
        bound: trunc.threshold.powf(1.0 - eta) * mean_abs_pow_eta,
        mean_abs_pow_eta,
    }
}
