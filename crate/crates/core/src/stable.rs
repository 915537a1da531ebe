//! Stable variates, lattice step laws and scenery laws.
//!
//! Stable laws use the `S(index, scale, skewness, shift)` parameterization
//! with characteristic function
//! `exp(-|scale t|^index (1 - i skew sign(t) tan(pi index / 2)) + i shift t)`
//! for `index != 1` (and the usual logarithmic form at `index = 1`). At
//! `index = 2` this is `Normal(shift, 2 scale^2)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub index: f64,
    pub skewness: f64,
    pub scale: f64,
    pub shift: f64,
}

impl StableParams {
    pub fn new(index: f64, skewness: f64, scale: f64, shift: f64) -> Result<Self> {
        if !(index > 0.0 && index <= 2.0) {
            return Err(domain(format!("stable index {index} not in (0, 2]")));
        }
        if !(skewness.abs() <= 1.0) {
            return Err(domain(format!("stable skewness {skewness} not in [-1, 1]")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("stable scale {scale} must be positive")));
        }
        if !shift.is_finite() {
            return Err(domain("stable shift must be finite"));
        }
        let skewness = if index == 2.0 { 0.0 } else { skewness };
        Ok(Self {
            index,
            skewness,
            scale,
            shift,
        })
    }

    /// Symmetric, centered law of the given index and scale.
    pub fn symmetric(index: f64, scale: f64) -> Result<Self> {
        Self::new(index, 0.0, scale, 0.0)
    }

    /// Scale such that the `index = 2` law has the given variance.
    pub fn gaussian_with_variance(variance: f64) -> Result<Self> {
        Self::symmetric(2.0, (variance / 2.0).sqrt())
    }

    pub fn characteristic_modulus(&self, t: f64) -> f64 {
        (-(self.scale * t).abs().powf(self.index)).exp()
    }
}

/// One stable variate. Gaussian draws at index 2, Chambers-Mallows-Stuck
/// otherwise.
pub fn sample_stable<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    if params.index == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return params.shift + params.scale * std::f64::consts::SQRT_2 * z;
    }
    chambers_mallows_stuck(params, rng)
}

/// The polar (uniform angle, exponential radius) transformation, valid for
/// every index including 2.
pub fn chambers_mallows_stuck<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    let a = params.index;
    let skew = params.skewness;
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = loop {
        let w: f64 = Exp1.sample(rng);
        if w > 0.0 {
            break w;
        }
    };

    if a == 1.0 {
        if skew == 0.0 {
            return params.shift + params.scale * v.tan();
        }
        let half = FRAC_PI_2 + skew * v;
        let x = (half * v.tan() - skew * ((FRAC_PI_2 * w * v.cos()) / half).ln()) / FRAC_PI_2;
        return params.scale * x
            + skew * params.scale * params.scale.ln() / FRAC_PI_2
            + params.shift;
    }

    let x = if skew == 0.0 {
        (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
    } else {
        let t = skew * (FRAC_PI_2 * a).tan();
        let b = t.atan() / a;
        let s = (1.0 + t * t).powf(1.0 / (2.0 * a));
        s * (a * (v + b)).sin() / v.cos().powf(1.0 / a)
            * ((v - a * (v + b)).cos() / w).powf((1.0 - a) / a)
    };
    params.scale * x + params.shift
}

// ---------------------------------------------------------------------------
// Lattice step laws
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    LazySimple,
    SymmetricPareto,
}

/// Anything that produces iid integer increments with a declared stable index.
pub trait StepSource: Send + Sync {
    fn index(&self) -> f64;
    fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> i64;
}

/// Magnitudes `1..=TABLE_LEN` are drawn by inverse CDF; larger ones by an exact
/// rejection sampler against a discretized continuous Pareto proposal.
const TABLE_LEN: usize = 1 << 16;
/// Single increments are kept below this magnitude so positions stay in i64.
const MAX_STEP: f64 = 4_611_686_018_427_387_904.0; // 2^62

#[derive(Debug)]
struct ParetoTable {
    exponent: f64,
    /// cumulative weights sum_{j <= m} j^{-1-alpha}
    cumulative: Vec<f64>,
    total: f64,
    tail_start: u64,
    tail_end: u64,
    tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct LatticeStepLaw {
    pub kind: StepKind,
    pub index: f64,
    pub hold_prob: f64,
    pub tail_cut: Option<u64>,
    table: Option<Arc<ParetoTable>>,
}

impl PartialEq for LatticeStepLaw {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.index == other.index
            && self.hold_prob == other.hold_prob
            && self.tail_cut == other.tail_cut
    }
}

fn check_hold(hold_prob: f64) -> Result<()> {
    if hold_prob > 0.0 && hold_prob < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("hold_prob {hold_prob} not in (0, 1)")))
    }
}

/// `sum_{k > from} k^{-s}` by Euler-Maclaurin, accurate to ~from^{-s-5}.
pub(crate) fn power_tail_sum(s: f64, from: u64) -> f64 {
    let k = from as f64;
    k.powf(1.0 - s) / (s - 1.0) - 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    let head: f64 = (1..=64u64).map(|k| (k as f64).powf(-s)).sum();
    head + power_tail_sum(s, 64)
}

impl LatticeStepLaw {
    pub fn lazy_simple(hold_prob: f64) -> Result<Self> {
        check_hold(hold_prob)?;
        Ok(Self {
            kind: StepKind::LazySimple,
            index: 2.0,
            hold_prob,
            tail_cut: None,
            table: None,
        })
    }

    pub fn symmetric_pareto(index: f64, hold_prob: f64, tail_cut: Option<u64>) -> Result<Self> {
        check_hold(hold_prob)?;
        if !(index > 0.0 && index <= 2.0) {
            return Err(domain(format!("step index {index} not in (0, 2]")));
        }
        if tail_cut == Some(0) {
            return Err(domain("tail_cut must be a positive integer"));
        }
        let exponent = 1.0 + index;
        let head_len = tail_cut.map_or(TABLE_LEN, |c| (c as usize).min(TABLE_LEN));
        let mut cumulative = Vec::with_capacity(head_len);
        let mut acc = 0.0;
        for m in 1..=head_len {
            acc += (m as f64).powf(-exponent);
            cumulative.push(acc);
        }
        let tail_start = head_len as u64 + 1;
        let tail_end = tail_cut.unwrap_or(u64::MAX);
        let tail_mass = if tail_start > tail_end {
            0.0
        } else {
            let upper = if tail_end == u64::MAX {
                0.0
            } else {
                power_tail_sum(exponent, tail_end)
            };
            power_tail_sum(exponent, head_len as u64) - upper
        };
        let table = ParetoTable {
            exponent,
            total: acc + tail_mass,
            cumulative,
            tail_start,
            tail_end,
            tail_bound: Self::rejection_ratio(index, tail_start),
        };
        Ok(Self {
            kind: StepKind::SymmetricPareto,
            index,
            hold_prob,
            tail_cut,
            table: Some(Arc::new(table)),
        })
    }

    /// `m^{-1-a} / (m^{-a} - (m+1)^{-a})`, up to the common factor `m^{-a}`.
    fn rejection_ratio(index: f64, m: u64) -> f64 {
        let m = m as f64;
        (1.0 / m) / (-(-index * (1.0 / m).ln_1p()).exp_m1())
    }

    /// `P(X = k)`.
    pub fn point_mass(&self, k: i64) -> f64 {
        if k == 0 {
            return self.hold_prob;
        }
        match self.kind {
            StepKind::LazySimple => {
                if k.abs() == 1 {
                    (1.0 - self.hold_prob) / 2.0
                } else {
                    0.0
                }
            }
            StepKind::SymmetricPareto => {
                let t = self.table.as_ref().expect("pareto table");
                let m = k.unsigned_abs();
                if m > t.tail_end {
                    return 0.0;
                }
                self.per_side_constant() * (m as f64).powf(-t.exponent)
            }
        }
    }

    /// `c` in `P(X = +-k) = c k^{-1-index}`.
    pub fn per_side_constant(&self) -> f64 {
        match &self.table {
            Some(t) => (1.0 - self.hold_prob) / (2.0 * t.total),
            None => (1.0 - self.hold_prob) / 2.0,
        }
    }

    /// `C` in `P(|X| >= k) ~ C k^{-index}` (untruncated Pareto law).
    pub fn tail_constant(&self) -> f64 {
        2.0 * self.per_side_constant() / self.index
    }

    /// Cauchy scale `a` of the limit of `S_n / n` for the index-1 Pareto law.
    pub fn cauchy_scale(&self) -> Result<f64> {
        if self.kind != StepKind::SymmetricPareto || self.index != 1.0 || self.tail_cut.is_some() {
            return Err(domain(
                "cauchy scale needs an untruncated index-1 symmetric Pareto law",
            ));
        }
        Ok(PI * self.per_side_constant())
    }

    /// Finite variance, when it exists.
    pub fn variance(&self) -> Option<f64> {
        match self.kind {
            StepKind::LazySimple => Some(1.0 - self.hold_prob),
            StepKind::SymmetricPareto => None,
        }
    }

    fn sample_magnitude<R: Rng + ?Sized>(&self, t: &ParetoTable, rng: &mut R) -> u64 {
        let target = rng.random::<f64>() * t.total;
        let head_total = *t.cumulative.last().expect("non-empty table");
        if target < head_total || t.tail_start > t.tail_end {
            let idx = t.cumulative.partition_point(|&c| c <= target);
            return (idx.min(t.cumulative.len() - 1) + 1) as u64;
        }
        let start = t.tail_start as f64;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let y = start * u.powf(-1.0 / self.index);
            if !(y < MAX_STEP) {
                continue;
            }
            let m = y.floor() as u64;
            if m > t.tail_end {
                continue;
            }
            let accept = Self::rejection_ratio(self.index, m) / t.tail_bound;
            if rng.random::<f64>() < accept {
                return m;
            }
        }
    }
}

impl StepSource for LatticeStepLaw {
    fn index(&self) -> f64 {
        self.index
    }

    #[inline]
    fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self.kind {
            StepKind::LazySimple => {
                let u = rng.random::<f64>();
                if u < self.hold_prob {
                    0
                } else if u < self.hold_prob + (1.0 - self.hold_prob) / 2.0 {
                    1
                } else {
                    -1
                }
            }
            StepKind::SymmetricPareto => {
                let t = self.table.as_ref().expect("pareto table");
                let u = rng.random::<f64>();
                if u < self.hold_prob {
                    return 0;
                }
                let m = self.sample_magnitude(t, rng) as i64;
                if u < self.hold_prob + (1.0 - self.hold_prob) / 2.0 {
                    m
                } else {
                    -m
                }
            }
        }
    }
}

/// One lattice increment.
pub fn sample_step<R: Rng + ?Sized>(law: &LatticeStepLaw, rng: &mut R) -> i64 {
    law.sample_step(rng)
}

// ---------------------------------------------------------------------------
// Scenery laws
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneryKind {
    Rademacher,
    Gaussian,
    SymmetricParetoReal,
}

/// Centered, symmetric scenery law. `scale` multiplies the standard form:
/// `+-scale`, `Normal(0, scale^2)`, or density `(index/2) scale^index |x|^{-1-index}`
/// on `|x| >= scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneryLaw {
    pub kind: SceneryKind,
    pub index: f64,
    pub scale: f64,
}

impl SceneryLaw {
    pub fn rademacher() -> Self {
        Self {
            kind: SceneryKind::Rademacher,
            index: 2.0,
            scale: 1.0,
        }
    }

    pub fn gaussian(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("scenery scale {scale} must be positive")));
        }
        Ok(Self {
            kind: SceneryKind::Gaussian,
            index: 2.0,
            scale,
        })
    }

    pub fn symmetric_pareto_real(index: f64, scale: f64) -> Result<Self> {
        if !(index > 0.0 && index < 2.0) {
            return Err(domain(format!(
                "pareto scenery index {index} not in (0, 2)"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("scenery scale {scale} must be positive")));
        }
        Ok(Self {
            kind: SceneryKind::SymmetricParetoReal,
            index,
            scale,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SceneryKind::Rademacher => {
                if rng.next_u64() >> 63 == 1 {
                    self.scale
                } else {
                    -self.scale
                }
            }
            SceneryKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale * z
            }
            SceneryKind::SymmetricParetoReal => {
                let bits = rng.next_u64();
                let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
                let m = self.scale * u.powf(-1.0 / self.index);
                if bits & 1 == 1 {
                    m
                } else {
                    -m
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> Option<f64> {
        match self.kind {
            SceneryKind::Rademacher | SceneryKind::Gaussian => Some(self.scale * self.scale),
            SceneryKind::SymmetricParetoReal => None,
        }
    }

    /// Atoms of a discrete law, `None` for continuous laws.
    pub fn atoms(&self) -> Option<[(f64, f64); 2]> {
        match self.kind {
            SceneryKind::Rademacher => Some([(-self.scale, 0.5), (self.scale, 0.5)]),
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            SceneryKind::Rademacher => {
                if x < -self.scale {
                    0.0
                } else if x < self.scale {
                    0.5
                } else {
                    1.0
                }
            }
            SceneryKind::Gaussian => normal_cdf(x / self.scale),
            SceneryKind::SymmetricParetoReal => {
                if x <= -self.scale {
                    0.5 * (self.scale / -x).powf(self.index)
                } else if x < self.scale {
                    0.5
                } else {
                    1.0 - 0.5 * (self.scale / x).powf(self.index)
                }
            }
        }
    }

    /// `P(lo <= xi <= hi)` and `E[xi; lo <= xi <= hi]`.
    pub fn interval_moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        if !(lo <= hi) {
            return (0.0, 0.0);
        }
        match self.kind {
            SceneryKind::Rademacher => {
                let mut p = 0.0;
                let mut m = 0.0;
                for (x, w) in self.atoms().expect("discrete") {
                    if x >= lo && x <= hi {
                        p += w;
                        m += w * x;
                    }
                }
                (p, m)
            }
            SceneryKind::Gaussian => {
                let s = self.scale;
                let p = normal_cdf(hi / s) - normal_cdf(lo / s);
                let m = s * (normal_pdf(lo / s) - normal_pdf(hi / s));
                (p, m)
            }
            SceneryKind::SymmetricParetoReal => {
                let (pp, mp) = self.positive_interval(lo.max(self.scale), hi);
                let (pn, mn) = self.positive_interval((-hi).max(self.scale), -lo);
                (pp + pn, mp - mn)
            }
        }
    }

    /// Probability and first moment of `[a, b]` with `scale <= a`.
    fn positive_interval(&self, a: f64, b: f64) -> (f64, f64) {
        if !(a < b) {
            return (0.0, 0.0);
        }
        let (beta, s) = (self.index, self.scale);
        let surv = |x: f64| {
            if x.is_infinite() {
                0.0
            } else {
                (s / x).powf(beta)
            }
        };
        let p = 0.5 * (surv(a) - surv(b));
        // (beta/2) s^beta int_a^b x^{-beta} dx
        let m = if beta == 1.0 {
            0.5 * s * (b / a).ln()
        } else {
            // infinite first moment when beta < 1
            let prim = |x: f64| match (x.is_infinite(), beta > 1.0) {
                (false, _) => x * surv(x),
                (true, true) => 0.0,
                (true, false) => f64::INFINITY,
            };
            0.5 * beta / (beta - 1.0) * (prim(a) - prim(b))
        };
        (p, m)
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn params_validation() {
        assert!(StableParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 1.2, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 0.0, 0.0).is_err());
        assert_eq!(StableParams::new(2.0, 0.7, 1.0, 0.0).unwrap().skewness, 0.0);
    }

    #[test]
    fn zeta_matches_closed_forms() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-10);
    }

    #[test]
    fn index_two_is_gaussian_with_variance_two_scale_squared() {
        let p = StableParams::symmetric(2.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let mut s = Stream::new(3);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_stable(&p, &mut s)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.015);
    }

    #[test]
    fn index_one_symmetric_is_cauchy() {
        let p = StableParams::symmetric(1.0, 1.0).unwrap();
        let mut s = Stream::new(4);
        let n = 100_000;
        let inside = (0..n)
            .filter(|_| sample_stable(&p, &mut s).abs() <= 1.0)
            .count();
        // P(|C| <= 1) = 1/2 for the standard Cauchy
        assert!((inside as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn skewed_branch_stays_finite() {
        let mut s = Stream::new(5);
        for &(a, b) in &[(0.7, 0.5), (1.0, -0.3), (1.5, 1.0)] {
            let p = StableParams::new(a, b, 1.0, 0.0).unwrap();
            for _ in 0..10_000 {
                assert!(sample_stable(&p, &mut s).is_finite());
            }
        }
    }

    #[test]
    fn lazy_simple_mass() {
        let law = LatticeStepLaw::lazy_simple(0.5).unwrap();
        assert_eq!(law.point_mass(0), 0.5);
        assert_eq!(law.point_mass(1), 0.25);
        assert_eq!(law.point_mass(-1), 0.25);
        assert_eq!(law.point_mass(2), 0.0);
        assert_eq!(law.variance(), Some(0.5));
        assert!(LatticeStepLaw::lazy_simple(0.0).is_err());
        assert!(LatticeStepLaw::lazy_simple(1.0).is_err());
    }

    #[test]
    fn pareto_mass_sums_to_one() {
        let law = LatticeStepLaw::symmetric_pareto(1.5, 0.2, None).unwrap();
        let head: f64 = (-100_000i64..=100_000).map(|k| law.point_mass(k)).sum();
        let tail = 2.0 * law.per_side_constant() * power_tail_sum(2.5, 100_000);
        assert!((head + tail - 1.0).abs() < 1e-12);

        let cut = LatticeStepLaw::symmetric_pareto(0.5, 0.3, Some(50)).unwrap();
        let total: f64 = (-60i64..=60).map(|k| cut.point_mass(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_pareto_respects_cut() {
        let mut s = Stream::new(8);
        for cut in [3u64, 100, 100_000] {
            let law = LatticeStepLaw::symmetric_pareto(0.3, 0.2, Some(cut)).unwrap();
            for _ in 0..50_000 {
                assert!(law.sample_step(&mut s).unsigned_abs() <= cut);
            }
        }
    }

    #[test]
    fn heavy_tail_sampler_never_overflows() {
        let law = LatticeStepLaw::symmetric_pareto(0.15, 0.2, None).unwrap();
        let mut s = Stream::new(10);
        for _ in 0..100_000 {
            let x = law.sample_step(&mut s);
            assert!((x.unsigned_abs() as f64) < MAX_STEP);
        }
    }

    #[test]
    fn cauchy_scale_of_index_one_law() {
        let law = LatticeStepLaw::symmetric_pareto(1.0, 0.2, None).unwrap();
        let c = 0.8 / (2.0 * PI * PI / 6.0);
        assert!((law.cauchy_scale().unwrap() - PI * c).abs() < 1e-12);
        assert!(LatticeStepLaw::lazy_simple(0.5)
            .unwrap()
            .cauchy_scale()
            .is_err());
    }

    #[test]
    fn scenery_validation() {
        assert!(SceneryLaw::gaussian(0.0).is_err());
        assert!(SceneryLaw::symmetric_pareto_real(2.0, 1.0).is_err());
        assert!(SceneryLaw::symmetric_pareto_real(1.5, -1.0).is_err());
    }

    #[test]
    fn interval_moments_cover_the_whole_line() {
        let inf = f64::INFINITY;
        for law in [
            SceneryLaw::rademacher(),
            SceneryLaw::gaussian(1.3).unwrap(),
            SceneryLaw::symmetric_pareto_real(1.5, 2.0).unwrap(),
        ] {
            let (p, m) = law.interval_moments(-inf, inf);
            assert!((p - 1.0).abs() < 1e-12, "{law:?}");
            assert!(m.abs() < 1e-12, "{law:?}");
        }
        // E[xi; xi >= 1] for Pareto(1.5, 1): (1/2) * 1.5 / 0.5 = 1.5
        let law = SceneryLaw::symmetric_pareto_real(1.5, 1.0).unwrap();
        let (p, m) = law.interval_moments(0.0, inf);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((m - 1.5).abs() < 1e-12);
    }
}
