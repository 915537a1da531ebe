use crate::error::{Error, Result};
use crate::stable::SceneryLaw;

use super::kernel::{H1Mode, KernelKind, KernelSpec, LawMeasure};

/// Below this many auxiliary draws the estimated `h1` is too noisy: its error
/// is pushed into `R_n`.
pub const MIN_H1_SAMPLES: usize = 1000;

/// `h1(x) = E h(x, xi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearPart {
    Zero,
    Identity,
    /// Expectation against a finite measure (exact atoms or frozen draws).
    Average(LawMeasure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingParts {
    pub kernel: KernelSpec,
    pub h1: LinearPart,
    pub warnings: Vec<String>,
}

impl HoeffdingParts {
    #[inline]
    pub fn h1(&self, x: f64) -> f64 {
        match &self.h1 {
            LinearPart::Zero => 0.0,
            LinearPart::Identity => x,
            LinearPart::Average(m) => m.expect(|y| self.kernel.eval(x, y)),
        }
    }

    #[inline]
    pub fn h2(&self, x: f64, y: f64) -> f64 {
        self.kernel.eval(x, y) - self.h1(x) - self.h1(y)
    }

    /// `h1` needs more than a couple of flops per call.
    pub fn h1_is_costly(&self) -> bool {
        matches!(self.h1, LinearPart::Average(_))
    }

    pub fn linear_part_vanishes(&self) -> bool {
        self.h1 == LinearPart::Zero
    }

    /// `h2 = 0` identically, known in closed form.
    pub fn remainder_vanishes(&self) -> bool {
        self.kernel.kind == KernelKind::Sum
            && self.kernel.centering == 0.0
            && self.h1 == LinearPart::Identity
    }

    /// `var h1(xi)`; `None` when infinite.
    pub fn h1_variance(&self, law: &SceneryLaw) -> Option<f64> {
        match &self.h1 {
            LinearPart::Zero => Some(0.0),
            LinearPart::Identity => law.variance(),
            LinearPart::Average(_) => {
                let m = LawMeasure::for_law(law, self.kernel.h1_samples);
                let mean = m.expect(|x| self.h1(x));
                Some(m.expect(|x| (self.h1(x) - mean).powi(2)))
            }
        }
    }
}

/// Split `h` into its linear part `h1` and degenerate part `h2`.
pub fn hoeffding_split(kernel: &KernelSpec, law: &SceneryLaw) -> Result<HoeffdingParts> {
    let mut warnings = Vec::new();
    let h1 = match kernel.h1_mode {
        H1Mode::Analytic => match kernel.kind {
            // E xi = 0 for every configured scenery law
            KernelKind::Sum | KernelKind::ProductPlusSum => LinearPart::Identity,
            KernelKind::Product | KernelKind::BoundedSignProduct => LinearPart::Zero,
            KernelKind::Custom(def) => {
                if law.atoms().is_none() {
                    return Err(Error::Unsupported(format!(
                        "custom kernel `{}` has no closed-form h1 under a continuous scenery; use monte_carlo_estimated",
                        def.name
                    )));
                }
                LinearPart::Average(LawMeasure::exact(law))
            }
        },
        H1Mode::MonteCarloEstimated => {
            if kernel.h1_samples < MIN_H1_SAMPLES {
                let msg = format!(
                    "h1_samples = {} < {MIN_H1_SAMPLES}: estimator noise of order {:.3} enters R_n",
                    kernel.h1_samples,
                    1.0 / (kernel.h1_samples as f64).sqrt()
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
            LinearPart::Average(LawMeasure::frozen_draws(law, kernel.h1_samples))
        }
    };
    Ok(HoeffdingParts {
        kernel: kernel.clone(),
        h1,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ustat::kernel::CUSTOM_KERNELS;

    #[test]
    fn sum_kernel_rademacher() {
        let law = SceneryLaw::rademacher();
        let p = hoeffding_split(&KernelSpec::preset(KernelKind::Sum), &law).unwrap();
        for x in [-1.0, 1.0, 0.3] {
            assert_eq!(p.h1(x), x);
            assert_eq!(p.h2(x, -0.7), 0.0);
        }
        assert!(p.remainder_vanishes());
    }

    #[test]
    fn product_kernel_is_fully_degenerate() {
        let law = SceneryLaw::rademacher();
        let p = hoeffding_split(&KernelSpec::preset(KernelKind::Product), &law).unwrap();
        assert_eq!(p.h1(1.0), 0.0);
        assert_eq!(p.h1(-1.0), 0.0);
        assert!(p.linear_part_vanishes());
        assert!(!p.remainder_vanishes());
    }

    #[test]
    fn sign_kernel_rademacher_by_enumeration() {
        // exact expectation over the two-point law, computed independently
        let law = SceneryLaw::rademacher();
        let k = KernelSpec::preset(KernelKind::BoundedSignProduct);
        let p = hoeffding_split(&k, &law).unwrap();
        for x in [-1.0, 1.0] {
            let e: f64 = [-1.0, 1.0]
                .iter()
                .map(|y: &f64| 0.5 * (x * y).signum())
                .sum();
            assert_eq!(p.h1(x), e);
            for y in [-1.0, 1.0] {
                assert_eq!(p.h2(x, y), (x * y).signum());
            }
        }
    }

    #[test]
    fn product_plus_sum_centered() {
        let law = SceneryLaw::gaussian(1.0).unwrap();
        let p = hoeffding_split(&KernelSpec::preset(KernelKind::ProductPlusSum), &law).unwrap();
        assert_eq!(p.h1(2.5), 2.5);
        assert_eq!(p.h2(2.0, 3.0), 6.0);
    }

    #[test]
    fn estimated_h1_close_to_analytic() {
        let law = SceneryLaw::gaussian(1.0).unwrap();
        let mut k = KernelSpec::preset(KernelKind::ProductPlusSum);
        k.h1_mode = H1Mode::MonteCarloEstimated;
        k.h1_samples = 20_000;
        let p = hoeffding_split(&k, &law).unwrap();
        assert!(p.warnings.is_empty());
        for x in [-2.0, 0.0, 1.5] {
            assert!((p.h1(x) - x).abs() < 0.05 * (1.0 + x.abs()));
        }
        // frozen auxiliary seed: deterministic
        let again = hoeffding_split(&k, &law).unwrap();
        assert_eq!(p.h1(0.77), again.h1(0.77));
    }

    #[test]
    fn too_few_samples_warns() {
        let law = SceneryLaw::gaussian(1.0).unwrap();
        let mut k = KernelSpec::preset(KernelKind::Sum);
        k.h1_mode = H1Mode::MonteCarloEstimated;
        k.h1_samples = 100;
        let p = hoeffding_split(&k, &law).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn custom_kernel_needs_estimation_under_continuous_law() {
        let max = KernelKind::Custom(&CUSTOM_KERNELS[0]);
        let law = SceneryLaw::gaussian(1.0).unwrap();
        let k = KernelSpec::centered(max, H1Mode::Analytic, 2000, &law).unwrap();
        assert!(matches!(
            hoeffding_split(&k, &law),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn h2_is_degenerate() {
        // E h2(x, xi) = 0 for each fixed x
        let rad = SceneryLaw::rademacher();
        let max = KernelKind::Custom(&CUSTOM_KERNELS[0]);
        let kinds = [
            KernelKind::Sum,
            KernelKind::Product,
            KernelKind::ProductPlusSum,
            KernelKind::BoundedSignProduct,
            max,
        ];
        for kind in kinds {
            let k = KernelSpec::centered(kind, H1Mode::Analytic, 1000, &rad).unwrap();
            let p = hoeffding_split(&k, &rad).unwrap();
            let m = LawMeasure::exact(&rad);
            for x in [-1.0, 1.0] {
                assert!(m.expect(|y| p.h2(x, y)).abs() < 1e-15, "{kind:?}");
            }
        }
        let gauss = SceneryLaw::gaussian(1.0).unwrap();
        let k = KernelSpec::centered(max, H1Mode::MonteCarloEstimated, 2000, &gauss).unwrap();
        let p = hoeffding_split(&k, &gauss).unwrap();
        // against the same frozen measure the estimate is exactly degenerate
        let m = LawMeasure::frozen_draws(&gauss, 2000);
        let e_h1 = m.expect(|y| p.h1(y));
        for x in [-1.0, 0.2, 2.0] {
            assert!((m.expect(|y| p.h2(x, y)) + e_h1).abs() < 1e-12);
        }
        assert!(e_h1.abs() < 1e-12);
    }

    #[test]
    fn h1_variance_matches_law() {
        let rad = SceneryLaw::rademacher();
        let p = hoeffding_split(&KernelSpec::preset(KernelKind::ProductPlusSum), &rad).unwrap();
        assert_eq!(p.h1_variance(&rad), Some(1.0));
        let pareto = SceneryLaw::symmetric_pareto_real(1.5, 1.0).unwrap();
        assert_eq!(p.h1_variance(&pareto), None);
    }
}
