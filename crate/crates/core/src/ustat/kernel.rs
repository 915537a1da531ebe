use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stable::SceneryLaw;

/// Seed of the frozen auxiliary draws used by Monte Carlo estimated parts, so
/// every estimated `h1` is a deterministic function.
pub const AUX_SEED: u64 = 0x6831_5f61_7578_0001;

/// Compile-time registered kernel outside the preset family.
pub struct CustomKernelDef {
    pub name: &'static str,
    pub eval: fn(f64, f64) -> f64,
}

impl fmt::Debug for CustomKernelDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

pub static CUSTOM_KERNELS: &[CustomKernelDef] = &[
    CustomKernelDef {
        name: "max",
        eval: |x, y| x.max(y),
    },
    CustomKernelDef {
        name: "abs_diff",
        eval: |x, y| (x - y).abs(),
    },
];

#[derive(Debug, Clone, Copy)]
pub enum KernelKind {
    /// `x + y`
    Sum,
    /// `x y`
    Product,
    /// `x y + x + y`
    ProductPlusSum,
    /// `sign(x y)`
    BoundedSignProduct,
    Custom(&'static CustomKernelDef),
}

impl PartialEq for KernelKind {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl KernelKind {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sum" => Some(Self::Sum),
            "product" => Some(Self::Product),
            "product_plus_sum" => Some(Self::ProductPlusSum),
            "bounded_sign_product" => Some(Self::BoundedSignProduct),
            other => CUSTOM_KERNELS
                .iter()
                .find(|k| k.name == other)
                .map(Self::Custom),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sum => "sum",
            Self::Product => "product",
            Self::ProductPlusSum => "product_plus_sum",
            Self::BoundedSignProduct => "bounded_sign_product",
            Self::Custom(def) => def.name,
        }
    }

    pub fn is_preset(&self) -> bool {
        !matches!(self, Self::Custom(_))
    }

    #[inline]
    pub fn raw(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Sum => x + y,
            Self::Product => x * y,
            Self::ProductPlusSum => x * y + (x + y),
            Self::BoundedSignProduct => sign(x * y),
            Self::Custom(def) => (def.eval)(x, y),
        }
    }

    /// `sup |h|` when the kernel is bounded.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Self::BoundedSignProduct => Some(1.0),
            _ => None,
        }
    }

    /// Odd kernels (`h(-x,-y) = -h(x,y)`) turn a symmetric scenery into a
    /// symmetric law of `U_n`.
    pub fn is_odd(&self) -> bool {
        matches!(self, Self::Sum)
    }
}

#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H1Mode {
    Analytic,
    MonteCarloEstimated,
}

/// Feature map `phi(x) = (1, x, sign x)`; every preset is `phi(x)' M phi(y)`.
#[inline]
pub fn features(x: f64) -> [f64; 3] {
    [1.0, x, sign(x)]
}

static SATURATION_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub h1_mode: H1Mode,
    pub h1_samples: usize,
    /// Subtracted from the raw kernel so that `E h(xi1, xi2) = 0`.
    pub centering: f64,
}

impl KernelSpec {
    /// Preset kernel for a centered symmetric scenery: centering is exactly 0.
    pub fn preset(kind: KernelKind) -> Self {
        Self {
            kind,
            h1_mode: H1Mode::Analytic,
            h1_samples: 4096,
            centering: 0.0,
        }
    }

    /// Kernel centered under `law`. Presets are centered analytically; custom
    /// kernels exactly for discrete sceneries and by the frozen auxiliary
    /// draws otherwise.
    pub fn centered(
        kind: KernelKind,
        h1_mode: H1Mode,
        h1_samples: usize,
        law: &SceneryLaw,
    ) -> Result<Self> {
        if h1_samples == 0 {
            return Err(Error::Domain("h1_samples must be positive".into()));
        }
        let centering = if kind.is_preset() {
            0.0
        } else {
            let m = LawMeasure::for_law(law, h1_samples);
            m.expect(|x| m.expect(|y| kind.raw(x, y)))
        };
        Ok(Self {
            kind,
            h1_mode,
            h1_samples,
            centering,
        })
    }

    /// Centered kernel value; non-finite values saturate to +-f64::MAX.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let v = self.kind.raw(x, y) - self.centering;
        if v.is_finite() {
            v
        } else {
            saturate(v)
        }
    }

    /// Matrix `M` with `h(x, y) = phi(x)' M phi(y)`, when one exists.
    pub fn feature_form(&self) -> Option<[[f64; 3]; 3]> {
        let mut m = [[0.0; 3]; 3];
        match self.kind {
            KernelKind::Sum => {
                m[0][1] = 1.0;
                m[1][0] = 1.0;
            }
            KernelKind::Product => m[1][1] = 1.0,
            KernelKind::ProductPlusSum => {
                m[1][1] = 1.0;
                m[0][1] = 1.0;
                m[1][0] = 1.0;
            }
            KernelKind::BoundedSignProduct => m[2][2] = 1.0,
            KernelKind::Custom(_) => return None,
        }
        m[0][0] -= self.centering;
        Some(m)
    }

    /// `h(x, .)` is affine for presets other than the sign kernel:
    /// `h(x, y) = p(x) y + q(x)`.
    pub fn affine_in_second(&self, x: f64) -> Option<(f64, f64)> {
        let c = self.centering;
        match self.kind {
            KernelKind::Sum => Some((1.0, x - c)),
            KernelKind::Product => Some((x, -c)),
            KernelKind::ProductPlusSum => Some((x + 1.0, x - c)),
            _ => None,
        }
    }
}

fn saturate(v: f64) -> f64 {
    if !SATURATION_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("kernel value overflowed; saturating to +-f64::MAX");
    }
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

/// Finite measure used for expectations over the scenery law: the exact atoms
/// of a discrete law, or equally weighted frozen draws otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LawMeasure {
    points: Arc<Vec<f64>>,
    weights: Arc<Vec<f64>>,
    exact: bool,
}

impl LawMeasure {
    pub fn for_law(law: &SceneryLaw, samples: usize) -> Self {
        if law.atoms().is_some() {
            Self::exact(law)
        } else {
            Self::frozen_draws(law, samples)
        }
    }

    pub fn exact(law: &SceneryLaw) -> Self {
        let atoms = law.atoms().expect("discrete law");
        Self {
            points: Arc::new(atoms.iter().map(|a| a.0).collect()),
            weights: Arc::new(atoms.iter().map(|a| a.1).collect()),
            exact: true,
        }
    }

    pub fn frozen_draws(law: &SceneryLaw, samples: usize) -> Self {
        let mut s = Stream::new(AUX_SEED);
        let points: Vec<f64> = (0..samples).map(|_| law.sample(&mut s)).collect();
        let w = 1.0 / samples as f64;
        Self {
            weights: Arc::new(vec![w; samples]),
            points: Arc::new(points),
            exact: false,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_kinds() -> Vec<KernelKind> {
        let mut v = vec![
            KernelKind::Sum,
            KernelKind::Product,
            KernelKind::ProductPlusSum,
            KernelKind::BoundedSignProduct,
        ];
        v.extend(CUSTOM_KERNELS.iter().map(KernelKind::Custom));
        v
    }

    #[test]
    fn names_round_trip() {
        for k in all_kinds() {
            assert_eq!(KernelKind::from_name(k.name()), Some(k));
        }
        assert_eq!(KernelKind::from_name("nope"), None);
    }

    #[test]
    fn feature_form_reproduces_presets() {
        for k in all_kinds().into_iter().filter(|k| k.is_preset()) {
            let spec = KernelSpec::preset(k);
            let m = spec.feature_form().unwrap();
            for &(x, y) in &[(0.3, -2.0), (-1.0, 1.0), (5.0, 0.0), (-0.7, -0.2)] {
                let (px, py) = (features(x), features(y));
                let mut v = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        v += px[a] * m[a][b] * py[b];
                    }
                }
                assert!((v - spec.eval(x, y)).abs() < 1e-12, "{k:?}");
            }
        }
    }

    #[test]
    fn custom_kernel_centering_is_exact_for_rademacher() {
        let law = SceneryLaw::rademacher();
        let max = KernelKind::from_name("max").unwrap();
        let spec = KernelSpec::centered(max, H1Mode::Analytic, 1000, &law).unwrap();
        // E max(xi1, xi2) = 3/4 - 1/4
        assert_eq!(spec.centering, 0.5);
    }

    #[test]
    fn overflow_saturates() {
        let spec = KernelSpec::preset(KernelKind::Product);
        assert_eq!(spec.eval(1e200, 1e200), f64::MAX);
        assert_eq!(spec.eval(-1e200, 1e200), -f64::MAX);
    }

    proptest! {
        #[test]
        fn kernels_are_symmetric(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            for k in all_kinds() {
                let spec = KernelSpec::preset(k);
                prop_assert_eq!(spec.eval(x, y), spec.eval(y, x));
            }
        }
    }
}
