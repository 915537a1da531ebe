use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::{KestenSpitzer, LimitSample};
use crate::rng::Stream;
use crate::stable::{LatticeStepLaw, StableParams};
use crate::stats::{ks_two_sample, median, ols, quantile, quantile_sorted};
use crate::ustat::HoeffdingParts;

use super::replicate::{GridRecord, ReplicateResult};

/// Closed interval a measured value is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn around(target: f64, below: f64, above: f64) -> Self {
        Self {
            lo: target - below,
            hi: target + above,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Growth exponent of `U_n`: `2 - 1/alpha + 1/(alpha beta)` for `alpha > 1`,
/// `1 + 1/beta` for `alpha <= 1`.
pub fn theorem1_exponent(alpha: f64, beta: f64) -> f64 {
    if alpha > 1.0 {
        2.0 - 1.0 / alpha + 1.0 / (alpha * beta)
    } else {
        1.0 + 1.0 / beta
    }
}

/// `2 - 1/alpha' + 1/(alpha' beta)` with `alpha' = max(1, alpha)`.
pub fn remainder_exponent(alpha: f64, beta: f64) -> f64 {
    let a = alpha.max(1.0);
    2.0 - 1.0 / a + 1.0 / (a * beta)
}

/// `2^{1/4} var(xi)^{1/2} / (3 var(X)^{1/4})`.
pub fn theorem2_constant(var_xi: f64, var_x: f64) -> f64 {
    2f64.powf(0.25) * var_xi.sqrt() / (3.0 * var_x.powf(0.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    U,
    L,
    R,
    V,
}

impl Statistic {
    pub fn of(self, rec: &GridRecord) -> f64 {
        match self {
            Self::U => rec.u,
            Self::L => rec.l,
            Self::R => rec.r,
            Self::V => rec.v as f64,
        }
    }
}

pub const MIN_FIT_REPLICATES: usize = 50;
pub const MIN_BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub statistic: Statistic,
    pub quantile: f64,
    pub slope: f64,
    pub intercept: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub resamples: usize,
    pub grid: Vec<u64>,
    /// Empirical `quantile` of `|statistic|` at each grid point.
    pub quantiles: Vec<f64>,
}

/// Grid points shared by every replicate, from `n_min` on.
fn common_grid(results: &[ReplicateResult], n_min: u64) -> Vec<u64> {
    let first = match results.first() {
        Some(r) => r,
        None => return Vec::new(),
    };
    first
        .records
        .iter()
        .map(|r| r.n)
        .filter(|&n| n >= n_min && results.iter().all(|res| res.record_at(n).is_some()))
        .collect()
}

/// `values[g][i]`: statistic of replicate `i` at grid point `g`.
fn column_values(
    results: &[ReplicateResult],
    grid: &[u64],
    f: impl Fn(&GridRecord) -> f64,
) -> Vec<Vec<f64>> {
    grid.iter()
        .map(|&n| {
            results
                .iter()
                .map(|res| f(res.record_at(n).expect("common grid")))
                .collect()
        })
        .collect()
}

fn log2_slope(grid: &[u64], ys: &[f64]) -> Result<(f64, f64)> {
    let x: Vec<f64> = grid.iter().map(|&n| (n as f64).log2()).collect();
    let y: Vec<f64> = ys.iter().map(|v| v.log2()).collect();
    let fit = ols(&x, &y)?;
    Ok((fit.slope, fit.intercept))
}

/// OLS of `log2 q_p(|stat|)` on `log2 n` over grid points `n >= n_min`, with a
/// percentile bootstrap CI over replicates.
pub fn fit_scaling_exponent(
    results: &[ReplicateResult],
    statistic: Statistic,
    p: f64,
    n_min: u64,
    resamples: usize,
    stream: &Stream,
) -> Result<ScalingFit> {
    if results.len() < MIN_FIT_REPLICATES {
        return Err(Error::Insufficient(format!(
            "exponent fit needs >= {MIN_FIT_REPLICATES} replicates, got {}",
            results.len()
        )));
    }
    let grid = common_grid(results, n_min);
    if grid.len() < 3 {
        return Err(Error::Insufficient(format!(
            "exponent fit needs >= 3 grid points >= {n_min}, got {}",
            grid.len()
        )));
    }
    let cols = column_values(results, &grid, |r| statistic.of(r).abs());
    let reference = cols
        .iter()
        .flatten()
        .chain(
            column_values(results, &grid, |r| r.u.abs())
                .iter()
                .flatten(),
        )
        .fold(0.0f64, |m, &v| m.max(v));
    let largest = cols.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    if largest == 0.0 || largest <= 1e-9 * reference {
        return Err(Error::Degenerate(format!(
            "{statistic:?} vanishes on every replicate; slope undefined"
        )));
    }
    let quantiles: Vec<f64> = cols.iter().map(|c| quantile(c, p)).collect();
    if let Some(g) = quantiles.iter().position(|&q| q <= 0.0) {
        return Err(Error::Degenerate(format!(
            "quantile {p} of |{statistic:?}| is zero at n = {}",
            grid[g]
        )));
    }
    let (slope, intercept) = log2_slope(&grid, &quantiles)?;

    let resamples = resamples.max(MIN_BOOTSTRAP);
    let mut rng = stream.clone();
    let r = results.len();
    let mut slopes = Vec::with_capacity(resamples);
    let mut idx = vec![0usize; r];
    let mut buf = vec![0.0; r];
    for _ in 0..resamples {
        for i in idx.iter_mut() {
            *i = (rng.next() % r as u64) as usize;
        }
        let qs: Vec<f64> = cols
            .iter()
            .map(|c| {
                for (b, &i) in buf.iter_mut().zip(&idx) {
                    *b = c[i];
                }
                buf.sort_by(f64::total_cmp);
                quantile_sorted(&buf, p)
            })
            .collect();
        if qs.iter().all(|&q| q > 0.0) {
            slopes.push(log2_slope(&grid, &qs)?.0);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let (ci_lo, ci_hi) = if slopes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            quantile_sorted(&slopes, 0.025),
            quantile_sorted(&slopes, 0.975),
        )
    };
    Ok(ScalingFit {
        statistic,
        quantile: p,
        slope,
        intercept,
        ci_lo,
        ci_hi,
        resamples,
        grid,
        quantiles,
    })
}

/// Unit-time law of the limiting walk and unit-length law of the scenery
/// noise for `alpha = beta = 2`: Gaussian with variances `var X` and
/// `var h1(xi)`.
pub fn delta_laws(
    step_law: &LatticeStepLaw,
    parts: &HoeffdingParts,
    scenery: &crate::stable::SceneryLaw,
) -> Result<(StableParams, StableParams)> {
    let regime = || {
        Error::Regime("the Delta_t comparison needs alpha = beta = 2 with finite variances".into())
    };
    if step_law.index != 2.0 || scenery.index != 2.0 {
        return Err(regime());
    }
    let var_x = step_law.variance().ok_or_else(regime)?;
    let var_h1 = parts.h1_variance(scenery).ok_or_else(regime)?;
    if var_h1 <= 0.0 {
        return Err(Error::Degenerate(
            "h1 vanishes: the linear part has no Delta_t limit".into(),
        ));
    }
    Ok((
        StableParams::gaussian_with_variance(var_x)?,
        StableParams::gaussian_with_variance(var_h1)?,
    ))
}

pub const MIN_LIMIT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub n_star: u64,
    pub exponent: f64,
    pub ks: f64,
    pub threshold: f64,
    pub simulated: usize,
    pub limit_draws: usize,
    pub pass: bool,
}

/// Two-sample KS between `U_{n*} / n*^{exponent}` and the limit draws.
pub fn compare_limit_distribution(
    results: &[ReplicateResult],
    limit_samples: &[LimitSample],
    n_star: u64,
    exponent: f64,
    threshold: f64,
) -> Result<LimitComparison> {
    let scaled: Vec<f64> = results
        .iter()
        .filter_map(|r| r.record_at(n_star))
        .map(|rec| rec.u / (n_star as f64).powf(exponent))
        .collect();
    if scaled.len() < MIN_LIMIT_SAMPLES || limit_samples.len() < MIN_LIMIT_SAMPLES {
        return Err(Error::Insufficient(format!(
            "limit comparison needs >= {MIN_LIMIT_SAMPLES} values per side, got {} at n = {n_star} and {} limit draws",
            scaled.len(),
            limit_samples.len()
        )));
    }
    let limit: Vec<f64> = limit_samples.iter().map(|s| s.value).collect();
    let ks = ks_two_sample(&scaled, &limit);
    Ok(LimitComparison {
        n_star,
        exponent,
        ks,
        threshold,
        simulated: scaled.len(),
        limit_draws: limit.len(),
        pass: ks < threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub quantile: f64,
    pub coarse: f64,
    pub fine: f64,
    pub relative_shift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Draws of `Delta_t` for replicates `0..draws` under `stream`.
pub fn delta_draws(
    sampler: &KestenSpitzer,
    t: f64,
    draws: u64,
    stream: &Stream,
) -> Result<Vec<LimitSample>> {
    (0..draws)
        .map(|i| sampler.sample(t, &stream.split(i)))
        .collect()
}

/// Halved `dt` and `dx`.
pub fn refined(sampler: &KestenSpitzer) -> KestenSpitzer {
    KestenSpitzer {
        dt: sampler.dt / 2.0,
        dx: sampler.dx / 2.0,
        ..*sampler
    }
}

/// Relative shift of the 0.9-quantile of `Delta_t` between draws at the
/// configured discretization and draws at the [`refined`] one.
pub fn refinement_check(coarse: &[f64], fine: &[f64], tolerance: f64) -> RefinementCheck {
    let coarse = quantile(coarse, 0.9);
    let fine = quantile(fine, 0.9);
    let relative_shift = (coarse / fine - 1.0).abs();
    RefinementCheck {
        quantile: 0.9,
        coarse,
        fine,
        relative_shift,
        tolerance,
        pass: relative_shift < tolerance,
    }
}

pub const MIN_LIL_REPLICATES: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilBand {
    pub c: f64,
    pub replicates: usize,
    pub median_m_plus: f64,
    pub median_neg_m_minus: f64,
    pub band: Band,
    pub band_pass: bool,
    /// KS between `M+` and `-M-` of `U_k`.
    pub ks_u: f64,
    /// KS between the same extremes of the linear part `(k - 1) L_k`;
    /// diagnostic only.
    pub ks_linear: f64,
    pub ks_threshold: f64,
    pub symmetry_pass: bool,
    pub pass: bool,
}

/// Band statistics of the LIL tracks. The symmetry verdict reads `U_k`; the
/// linear-part distance shows how much of any asymmetry comes from `R_k`.
pub fn lil_track(
    results: &[ReplicateResult],
    alpha: f64,
    beta: f64,
    var_xi: f64,
    var_x: f64,
    ks_threshold: f64,
) -> Result<LilBand> {
    if alpha != 2.0 || beta != 2.0 {
        return Err(Error::Regime(format!(
            "the LIL constant needs alpha = beta = 2, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let tracks: Vec<_> = results.iter().filter_map(|r| r.lil.as_ref()).collect();
    if tracks.len() < MIN_LIL_REPLICATES {
        return Err(Error::Insufficient(format!(
            "LIL band needs >= {MIN_LIL_REPLICATES} tracked replicates, got {}",
            tracks.len()
        )));
    }
    let c = theorem2_constant(var_xi, var_x);
    let plus: Vec<f64> = tracks.iter().map(|t| t.m_plus).collect();
    let neg_minus: Vec<f64> = tracks.iter().map(|t| -t.m_minus).collect();
    let lin_plus: Vec<f64> = tracks.iter().map(|t| t.linear_plus).collect();
    let lin_neg_minus: Vec<f64> = tracks.iter().map(|t| -t.linear_minus).collect();
    let band = Band::new(0.3 * c, 3.0 * c);
    let median_m_plus = median(&plus);
    let ks_u = ks_two_sample(&plus, &neg_minus);
    let ks_linear = ks_two_sample(&lin_plus, &lin_neg_minus);
    let band_pass = band.contains(median_m_plus);
    let symmetry_pass = ks_u < ks_threshold;
    Ok(LilBand {
        c,
        replicates: tracks.len(),
        median_m_plus,
        median_neg_m_minus: median(&neg_minus),
        band,
        band_pass,
        ks_u,
        ks_linear,
        ks_threshold,
        symmetry_pass,
        pass: band_pass && symmetry_pass,
    })
}

pub const MIN_REMAINDER_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderDecay {
    pub exponent: f64,
    /// `"r"`, or `"u"` when `h1` vanishes and `R_n = U_n`.
    pub statistic: String,
    pub grid: Vec<u64>,
    pub medians: Vec<f64>,
    /// Grid points `n` where the median rose, with the relative rise.
    pub inversions: Vec<(u64, f64)>,
    pub max_inversion: f64,
    pub pass: bool,
}

/// Median over replicates of `max_{k <= n, k in grid} |R_k| / n^{e}` at each
/// grid `n >= n_min`; passes when nonincreasing up to one rise of at most 5%.
pub fn remainder_decay_check(
    results: &[ReplicateResult],
    parts: &HoeffdingParts,
    alpha: f64,
    beta: f64,
    n_min: u64,
) -> Result<RemainderDecay> {
    if parts.remainder_vanishes() {
        return Err(Error::Degenerate(format!(
            "kernel `{}` has h2 = 0: R_n vanishes identically",
            parts.kernel.kind.name()
        )));
    }
    if results.len() < MIN_REMAINDER_REPLICATES {
        return Err(Error::Insufficient(format!(
            "remainder decay needs >= {MIN_REMAINDER_REPLICATES} replicates, got {}",
            results.len()
        )));
    }
    let all = common_grid(results, 0);
    let grid: Vec<u64> = all.iter().copied().filter(|&n| n >= n_min).collect();
    if grid.len() < 2 {
        return Err(Error::Insufficient(format!(
            "remainder decay needs >= 2 grid points >= {n_min}"
        )));
    }
    let exponent = remainder_exponent(alpha, beta);
    let statistic = if parts.linear_part_vanishes() {
        "u"
    } else {
        "r"
    };
    let pick = |rec: &GridRecord| {
        if parts.linear_part_vanishes() {
            rec.u
        } else {
            rec.r
        }
    };
    let medians: Vec<f64> = grid
        .iter()
        .map(|&n| {
            let ratios: Vec<f64> = results
                .iter()
                .map(|res| {
                    let running = all
                        .iter()
                        .take_while(|&&k| k <= n)
                        .map(|&k| pick(res.record_at(k).expect("common grid")).abs())
                        .fold(0.0f64, f64::max);
                    running / (n as f64).powf(exponent)
                })
                .collect();
            median(&ratios)
        })
        .collect();
    let inversions: Vec<(u64, f64)> = medians
        .windows(2)
        .zip(&grid[1..])
        .filter(|(w, _)| w[1] > w[0])
        .map(|(w, &n)| (n, w[1] / w[0] - 1.0))
        .collect();
    let max_inversion = inversions.iter().map(|i| i.1).fold(0.0, f64::max);
    let pass = inversions.is_empty() || (inversions.len() == 1 && max_inversion <= 0.05);
    Ok(RemainderDecay {
        exponent,
        statistic: statistic.into(),
        grid,
        medians,
        inversions,
        max_inversion,
        pass,
    })
}

pub const MIN_VN_REPLICATES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnMoments {
    pub alpha_prime: f64,
    pub grid: Vec<u64>,
    pub first_slope: f64,
    pub first_band: Band,
    pub second_slope: f64,
    pub second_band: Band,
    pub pass: bool,
}

/// Slopes of `log2 E V_n` and `log2 E V_n^2` against `log2 n`.
pub fn vn_moment_check(results: &[ReplicateResult], alpha: f64, n_min: u64) -> Result<VnMoments> {
    if results.len() < MIN_VN_REPLICATES {
        return Err(Error::Insufficient(format!(
            "V_n moments need >= {MIN_VN_REPLICATES} replicates, got {}",
            results.len()
        )));
    }
    let grid = common_grid(results, n_min);
    if grid.len() < 2 {
        return Err(Error::Insufficient(format!(
            "V_n moments need >= 2 grid points >= {n_min}"
        )));
    }
    let cols = column_values(results, &grid, |r| r.v as f64);
    let m1: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let m2: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64)
        .collect();
    let a = alpha.max(1.0);
    let first_band = Band::around(2.0 - 1.0 / a, 0.1, 0.15);
    let second_band = Band::around(4.0 - 2.0 / a, 0.2, 0.3);
    let (first_slope, _) = log2_slope(&grid, &m1)?;
    let (second_slope, _) = log2_slope(&grid, &m2)?;
    Ok(VnMoments {
        alpha_prime: a,
        grid,
        first_slope,
        first_band,
        second_slope,
        second_band,
        pass: first_band.contains(first_slope) && second_band.contains(second_slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::Regime;
    use crate::stable::SceneryLaw;
    use crate::ustat::{hoeffding_split, KernelKind, KernelSpec};
    use crate::verify::replicate::LilTrack;

    fn synthetic(reps: u64, f: impl Fn(u64, u64) -> f64) -> Vec<ReplicateResult> {
        (0..reps)
            .map(|i| ReplicateResult {
                replicate: i,
                records: (10..=17)
                    .map(|k| {
                        let n = 1u64 << k;
                        let u = f(i, n);
                        GridRecord {
                            n,
                            u,
                            l: 0.0,
                            r: u,
                            v: n,
                            range: 1,
                        }
                    })
                    .collect(),
                lil: None,
            })
            .collect()
    }

    #[test]
    fn exponents() {
        assert_eq!(theorem1_exponent(2.0, 2.0), 1.75);
        assert!((theorem1_exponent(2.0, 1.5) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(theorem1_exponent(0.8, 2.0), 1.5);
        assert_eq!(theorem1_exponent(1.0, 2.0), 1.5);
        assert_eq!(remainder_exponent(0.5, 2.0), 1.5);
        assert!((theorem2_constant(1.0, 0.5) - 2f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_pure_power_law() {
        let res = synthetic(60, |i, n| (1.0 + i as f64) * (n as f64).powf(1.75));
        let fit = fit_scaling_exponent(&res, Statistic::U, 0.5, 0, 200, &Stream::new(0)).unwrap();
        assert!((fit.slope - 1.75).abs() < 1e-6);
        assert!(fit.ci_lo <= fit.slope && fit.slope <= fit.ci_hi);
        assert_eq!(fit.grid.len(), 8);
        let again = fit_scaling_exponent(&res, Statistic::U, 0.5, 0, 200, &Stream::new(0)).unwrap();
        assert_eq!(fit, again);
    }

    #[test]
    fn fit_flags_degenerate_and_small_inputs() {
        let res = synthetic(60, |_, n| n as f64);
        assert!(matches!(
            fit_scaling_exponent(&res, Statistic::L, 0.5, 0, 200, &Stream::new(0)),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            fit_scaling_exponent(&res[..10], Statistic::U, 0.5, 0, 200, &Stream::new(0)),
            Err(Error::Insufficient(_))
        ));
        assert!(matches!(
            fit_scaling_exponent(&res, Statistic::U, 0.5, 1 << 16, 200, &Stream::new(0)),
            Err(Error::Insufficient(_))
        ));
    }

    fn samples(xs: &[f64]) -> Vec<LimitSample> {
        xs.iter()
            .map(|&value| LimitSample {
                t: 1.0,
                value,
                regime: Regime::KestenSpitzer,
            })
            .collect()
    }

    #[test]
    fn limit_comparison_of_identical_sets_is_zero() {
        let res = synthetic(1000, |i, n| (i as f64 - 500.0) * (n as f64).powf(1.75));
        let n = 1 << 12;
        let same: Vec<f64> = res
            .iter()
            .map(|r| r.record_at(n).unwrap().u / (n as f64).powf(1.75))
            .collect();
        let cmp = compare_limit_distribution(&res, &samples(&same), n, 1.75, 0.1).unwrap();
        assert_eq!(cmp.ks, 0.0);
        assert!(cmp.pass);
        assert!(matches!(
            compare_limit_distribution(&res[..999], &samples(&same), n, 1.75, 0.1),
            Err(Error::Insufficient(_))
        ));
    }

    #[test]
    fn remainder_check_refuses_sum_kernel_and_accepts_decay() {
        let law = SceneryLaw::rademacher();
        let sum = hoeffding_split(&KernelSpec::preset(KernelKind::Sum), &law).unwrap();
        let res = synthetic(100, |i, n| (1.0 + i as f64) * (n as f64).powf(1.5));
        assert!(matches!(
            remainder_decay_check(&res, &sum, 2.0, 2.0, 0),
            Err(Error::Degenerate(_))
        ));
        let product = hoeffding_split(&KernelSpec::preset(KernelKind::Product), &law).unwrap();
        let d = remainder_decay_check(&res, &product, 2.0, 2.0, 1 << 12).unwrap();
        assert_eq!(d.statistic, "u");
        assert!(d.pass && d.inversions.is_empty());
        let growing = synthetic(100, |i, n| (1.0 + i as f64) * (n as f64).powf(2.0));
        assert!(
            !remainder_decay_check(&growing, &product, 2.0, 2.0, 1 << 12)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn vn_slopes_of_synthetic_power() {
        let mut res = synthetic(200, |_, n| n as f64);
        for r in &mut res {
            for rec in &mut r.records {
                rec.v = (rec.n as f64).powf(1.5).round() as u64;
            }
        }
        let m = vn_moment_check(&res, 2.0, 0).unwrap();
        assert!((m.first_slope - 1.5).abs() < 1e-6);
        assert!((m.second_slope - 3.0).abs() < 1e-6);
        assert!(m.pass);
        assert!(!vn_moment_check(&res, 0.8, 0).unwrap().pass);
        assert!(vn_moment_check(&res[..100], 2.0, 0).is_err());
    }

    #[test]
    fn lil_band_regime_and_symmetry() {
        let res: Vec<ReplicateResult> = (0..40)
            .map(|i| {
                let x = 0.3 + 0.01 * i as f64;
                ReplicateResult {
                    replicate: i,
                    records: vec![],
                    lil: Some(LilTrack {
                        m_plus: x,
                        m_minus: -x,
                        linear_plus: x,
                        linear_minus: -x,
                        checkpoints: vec![],
                    }),
                }
            })
            .collect();
        assert!(matches!(
            lil_track(&res, 2.0, 1.5, 1.0, 0.5, 0.05),
            Err(Error::Regime(_))
        ));
        let band = lil_track(&res, 2.0, 2.0, 1.0, 0.5, 0.05).unwrap();
        assert_eq!(band.ks_u, 0.0);
        assert!(band.pass);
        assert!(lil_track(&res[..20], 2.0, 2.0, 1.0, 0.5, 0.05).is_err());
    }
}
