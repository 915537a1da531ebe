//! Limit objects: the stable Lévy path, its binned local time, the
//! Kesten-Spitzer variable `Delta_t`, the stable Lévy process `Y_t` and the
//! constants of the `alpha = 1` and `alpha < 1` regimes.
//!
//! `Delta_t` is approximated by `sum_b T_t(x_b) dZ(x_b)` over space bins of
//! width `dx`, where `dZ(x_b)` are iid stable(beta) increments of scale
//! `sigma_Z dx^{1/beta}`. Bins `b >= 0` (the bin holding `x = 0` included)
//! read the `Z_+` noise, bins `b < 0` the independent `Z_-` noise. Noise
//! values are counter-based per bin, so refining the path while keeping `dx`
//! fixed reuses the same noise.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::rng::Stream;
use crate::stable::{sample_stable, StableParams, StepSource};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct LevyPathGrid {
    pub time_step: f64,
    pub horizon: f64,
    /// `S*` at times `min(k dt, horizon)`, starting with `S*_0 = 0`.
    pub values: Vec<f64>,
}

impl LevyPathGrid {
    pub fn time(&self, k: usize) -> f64 {
        (k as f64 * self.time_step).min(self.horizon)
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }
}

fn step_count(t_max: f64, dt: f64) -> usize {
    let k = (t_max / dt).ceil();
    // a horizon that is a whole number of steps up to rounding
    if k > 0.0 && ((k - 1.0) * dt - t_max).abs() <= 1e-9 * t_max {
        (k - 1.0) as usize
    } else {
        k as usize
    }
}

/// Grid path of the stable Lévy process with unit-time law `params`; the
/// increment over a step of length `s` has scale `params.scale * s^{1/alpha}`.
pub fn simulate_levy_path(
    params: &StableParams,
    t_max: f64,
    dt: f64,
    stream: &mut Stream,
) -> Result<LevyPathGrid> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain(format!("time step {dt} must be positive")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(domain(format!("horizon {t_max} must be nonnegative")));
    }
    let steps = step_count(t_max, dt);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    let full = StableParams {
        scale: params.scale * dt.powf(1.0 / params.index),
        ..*params
    };
    let mut x = 0.0;
    for k in 0..steps {
        let len = ((k + 1) as f64 * dt).min(t_max) - k as f64 * dt;
        let inc = if len < dt {
            let last = StableParams {
                scale: params.scale * len.powf(1.0 / params.index),
                ..*params
            };
            sample_stable(&last, stream)
        } else {
            sample_stable(&full, stream)
        };
        x += inc;
        values.push(x);
    }
    Ok(LevyPathGrid {
        time_step: dt,
        horizon: t_max,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeGrid {
    pub space_step: f64,
    /// Index of the first bin; bin `b` covers `[b dx, (b + 1) dx)`.
    pub first_bin: i64,
    pub t: f64,
    pub values: Vec<f64>,
}

impl LocalTimeGrid {
    pub fn window(&self) -> (f64, f64) {
        let dx = self.space_step;
        (
            self.first_bin as f64 * dx,
            (self.first_bin + self.values.len() as i64) as f64 * dx,
        )
    }

    pub fn bins(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.first_bin + i as i64, v))
    }

    /// `dx * sum_b T_t(x_b)`.
    pub fn mass(&self) -> f64 {
        self.space_step * self.values.iter().sum::<f64>()
    }
}

/// Binned occupation density of the grid path up to time `t` (left-point rule).
pub fn local_time(path: &LevyPathGrid, t: f64, dx: f64) -> Result<LocalTimeGrid> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(domain(format!("space step {dx} must be positive")));
    }
    if !(t >= 0.0) || t > path.horizon * (1.0 + 1e-12) {
        return Err(domain(format!("time {t} outside [0, {}]", path.horizon)));
    }
    let bin = |x: f64| (x / dx).floor() as i64;
    let steps = path.steps().min(step_count(t, path.time_step));
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for &x in &path.values[..steps.max(1)] {
        let b = bin(x);
        lo = lo.min(b);
        hi = hi.max(b);
    }
    let width = (hi - lo + 1) as usize;
    let mut full = vec![0u64; width];
    let mut partial = vec![0.0; width];
    let dt = path.time_step;
    for k in 0..steps {
        let len = ((k + 1) as f64 * dt).min(t) - k as f64 * dt;
        let i = (bin(path.values[k]) - lo) as usize;
        if len >= dt {
            full[i] += 1;
        } else {
            partial[i] += len;
        }
    }
    let values = full
        .iter()
        .zip(&partial)
        .map(|(&c, &p)| (c as f64 * dt + p) / dx)
        .collect();
    Ok(LocalTimeGrid {
        space_step: dx,
        first_bin: lo,
        t,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    KestenSpitzer,
    AlphaOne,
    AlphaBelowOne,
}

impl Regime {
    pub fn of(alpha: f64) -> Self {
        if alpha > 1.0 {
            Self::KestenSpitzer
        } else if alpha == 1.0 {
            Self::AlphaOne
        } else {
            Self::AlphaBelowOne
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub t: f64,
    pub value: f64,
    pub regime: Regime,
}

/// Laws and discretization of the `Delta_t` approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KestenSpitzer {
    /// Unit-time law of the limiting walk `S*`.
    pub path: StableParams,
    /// Unit-length law of the noises `Z_+`, `Z_-`.
    pub noise: StableParams,
    pub dt: f64,
    pub dx: f64,
}

impl KestenSpitzer {
    /// Default steps for horizon `t`: `dt = 1e-4 t` and `dx` such that the
    /// expected range of `S*` covers about 1000 bins.
    pub fn with_defaults(path: StableParams, noise: StableParams, t: f64) -> Self {
        Self {
            path,
            noise,
            dt: default_dt(t),
            dx: default_dx(&path, t),
        }
    }

    pub fn sample(&self, t: f64, stream: &Stream) -> Result<LimitSample> {
        kesten_spitzer_sample(&self.path, &self.noise, t, self.dt, self.dx, stream)
    }
}

pub fn default_dt(t_max: f64) -> f64 {
    1e-4 * t_max
}

/// `E range(S*_{[0,t]}) / 1000`, with the Brownian range constant
/// `2 sqrt(2/pi)` applied to the scale `sqrt(2) scale t^{1/alpha}`.
pub fn default_dx(path: &StableParams, t: f64) -> f64 {
    let spread = 2.0 * (2.0 / std::f64::consts::PI).sqrt() * std::f64::consts::SQRT_2;
    spread * path.scale * t.powf(1.0 / path.index) / 1000.0
}

/// Stream of the noise value in bin `b`, keyed by the side.
fn noise_stream(stream: &Stream, bin: i64) -> Stream {
    if bin >= 0 {
        stream.split_label("z_plus").split(bin as u64)
    } else {
        stream.split_label("z_minus").split((-bin) as u64)
    }
}

/// One draw of `Delta_t`. The stream is not advanced; sub-streams for the
/// path and the two noises are derived from it.
pub fn kesten_spitzer_sample(
    path_law: &StableParams,
    noise_law: &StableParams,
    t: f64,
    dt: f64,
    dx: f64,
    stream: &Stream,
) -> Result<LimitSample> {
    if !(path_law.index > 1.0) {
        return Err(Error::Regime(format!(
            "Delta_t needs alpha > 1, got {}",
            path_law.index
        )));
    }
    if !(noise_law.index > 1.0) {
        return Err(domain(format!(
            "Delta_t needs beta in (1, 2], got {}",
            noise_law.index
        )));
    }
    let regime = Regime::KestenSpitzer;
    if t == 0.0 {
        return Ok(LimitSample {
            t,
            value: 0.0,
            regime,
        });
    }
    let mut ps = stream.split_label("path");
    let path = simulate_levy_path(path_law, t, dt, &mut ps)?;
    let lt = local_time(&path, t, dx)?;
    let bin_noise = StableParams {
        scale: noise_law.scale * dx.powf(1.0 / noise_law.index),
        ..*noise_law
    };
    let mut value = 0.0;
    for (b, tb) in lt.bins() {
        if tb != 0.0 {
            value += tb * sample_stable(&bin_noise, &mut noise_stream(stream, b));
        }
    }
    Ok(LimitSample { t, value, regime })
}

/// One draw of `Y_t` for the unit-time law `noise`: stable of scale
/// `noise.scale * t^{1/beta}`.
pub fn beta_levy_sample(noise: &StableParams, t: f64, stream: &mut Stream) -> Result<LimitSample> {
    if !(noise.index > 1.0) {
        return Err(domain(format!("beta = {} not in (1, 2]", noise.index)));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("time {t} must be nonnegative")));
    }
    let regime = Regime::AlphaBelowOne;
    if t == 0.0 {
        return Ok(LimitSample {
            t,
            value: 0.0,
            regime,
        });
    }
    let p = StableParams {
        scale: noise.scale * t.powf(1.0 / noise.index),
        ..*noise
    };
    Ok(LimitSample {
        t,
        value: sample_stable(&p, stream),
        regime,
    })
}

/// `Gamma(beta + 1) / (a pi)^{beta - 1}`, the constant in front of `Y_t` when
/// `alpha = 1` and the step law is attracted to `a` times a standard Cauchy.
pub fn alpha_one_constant(beta: f64, a: f64) -> Result<f64> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(domain(format!("beta = {beta} not in (1, 2]")));
    }
    if !(a > 0.0) {
        return Err(domain(format!("Cauchy scale {a} must be positive")));
    }
    Ok(gamma(beta + 1.0) / (a * std::f64::consts::PI).powf(beta - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEstimate {
    /// `(E c^{beta - 1})^{1/beta}` with `c` the returns to 0 up to the horizon.
    pub estimate: f64,
    pub standard_error: f64,
    pub horizon: u64,
    pub replicates: u64,
    /// Same estimator with the returns counted up to `horizon / 2`.
    pub half_horizon_estimate: f64,
    pub half_horizon_standard_error: f64,
    pub mean_returns: f64,
    /// Fraction of walks still returning between `horizon / 2` and `horizon`.
    pub late_return_fraction: f64,
}

const B_BOOTSTRAP: usize = 400;

fn b_statistic(counts: &[u64], beta: f64) -> f64 {
    let m = counts
        .iter()
        .map(|&c| (c as f64).powf(beta - 1.0))
        .sum::<f64>()
        / counts.len() as f64;
    m.powf(1.0 / beta)
}

fn bootstrap_se(counts: &[u64], beta: f64, stream: &mut Stream) -> f64 {
    let n = counts.len();
    let mut draws = Vec::with_capacity(B_BOOTSTRAP);
    let mut buf = vec![0u64; n];
    for _ in 0..B_BOOTSTRAP {
        for slot in buf.iter_mut() {
            *slot = counts[(stream.next() % n as u64) as usize];
        }
        draws.push(b_statistic(&buf, beta));
    }
    stats::variance(&draws).sqrt()
}

/// Monte Carlo estimate of `b = (E |sum_{i>=1} 1{S_i = 0}|^{beta-1})^{1/beta}`
/// with the sum truncated at `horizon`.
pub fn estimate_b_constant<S: StepSource>(
    step: &S,
    beta: f64,
    horizon: u64,
    replicates: u64,
    stream: &Stream,
) -> Result<BEstimate> {
    if !(step.index() < 1.0) {
        return Err(Error::Regime(format!(
            "b needs a transient walk with alpha < 1, got alpha = {}",
            step.index()
        )));
    }
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(domain(format!("beta = {beta} not in (1, 2]")));
    }
    if horizon < 2 || replicates < 2 {
        return Err(Error::Insufficient(
            "estimate_b needs horizon >= 2 and replicates >= 2".into(),
        ));
    }
    let half = horizon / 2;
    let mut full_counts = Vec::with_capacity(replicates as usize);
    let mut half_counts = Vec::with_capacity(replicates as usize);
    for r in 0..replicates {
        let mut rng = stream.split_label("walk").split(r);
        let (mut pos, mut at_half, mut c) = (0i64, 0u64, 0u64);
        for i in 1..=horizon {
            pos = pos.wrapping_add(step.sample_step(&mut rng));
            if pos == 0 {
                c += 1;
            }
            if i == half {
                at_half = c;
            }
        }
        full_counts.push(c);
        half_counts.push(at_half);
    }
    let mut boot = stream.split_label("bootstrap");
    let late = full_counts
        .iter()
        .zip(&half_counts)
        .filter(|(f, h)| f > h)
        .count();
    Ok(BEstimate {
        estimate: b_statistic(&full_counts, beta),
        standard_error: bootstrap_se(&full_counts, beta, &mut boot),
        horizon,
        replicates,
        half_horizon_estimate: b_statistic(&half_counts, beta),
        half_horizon_standard_error: bootstrap_se(&half_counts, beta, &mut boot),
        mean_returns: full_counts.iter().sum::<u64>() as f64 / replicates as f64,
        late_return_fraction: late as f64 / replicates as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::LatticeStepLaw;
    use crate::stats::{ks_two_sample, kurtosis, quantile, variance};
    use rand::Rng;

    fn brownian(scale: f64) -> StableParams {
        StableParams::symmetric(2.0, scale).unwrap()
    }

    #[test]
    fn zero_horizon_is_single_point() {
        let p = simulate_levy_path(&brownian(1.0), 0.0, 0.01, &mut Stream::new(1)).unwrap();
        assert_eq!(p.values, vec![0.0]);
        assert!(simulate_levy_path(&brownian(1.0), 1.0, 0.0, &mut Stream::new(1)).is_err());
    }

    #[test]
    fn brownian_endpoint_variance() {
        let scale = 0.5;
        let ends: Vec<f64> = (0..4000)
            .map(|i| {
                let p =
                    simulate_levy_path(&brownian(scale), 1.0, 0.01, &mut Stream::new(i)).unwrap();
                *p.values.last().unwrap()
            })
            .collect();
        let target = 2.0 * scale * scale;
        // standard error of the sample variance is sqrt(2 / n) relative
        assert!((variance(&ends) / target - 1.0).abs() < 4.0 * (2.0 / 4000f64).sqrt());
    }

    #[test]
    fn stable_path_is_self_similar() {
        let p = StableParams::symmetric(1.5, 1.0).unwrap();
        let mut one = Vec::new();
        let mut two = Vec::new();
        for i in 0..10_000u64 {
            let a = simulate_levy_path(&p, 1.0, 0.05, &mut Stream::new(2 * i)).unwrap();
            let b = simulate_levy_path(&p, 2.0, 0.05, &mut Stream::new(2 * i + 1)).unwrap();
            one.push(2f64.powf(1.0 / 1.5) * a.values.last().unwrap());
            two.push(*b.values.last().unwrap());
        }
        assert!(ks_two_sample(&one, &two) < 0.02);
    }

    #[test]
    fn local_time_mass_and_window() {
        let p = StableParams::symmetric(1.7, 0.8).unwrap();
        for seed in 0..20 {
            let path = simulate_levy_path(&p, 1.3, 1.3e-3 * 0.77, &mut Stream::new(seed)).unwrap();
            for t in [1.3, 0.61] {
                let lt = local_time(&path, t, 0.013).unwrap();
                assert!((lt.mass() / t - 1.0).abs() < 1e-12, "{}", lt.mass());
                assert!(lt.values.iter().all(|&v| v >= 0.0));
                let (lo, hi) = lt.window();
                let k = step_count(t, path.time_step).min(path.steps());
                assert!(path.values[..k].iter().all(|&x| x >= lo && x < hi));
            }
        }
        let path = simulate_levy_path(&p, 1.0, 0.1, &mut Stream::new(0)).unwrap();
        assert!(local_time(&path, 1.5, 0.1).is_err());
    }

    #[test]
    fn constant_path_has_one_bin() {
        let path = LevyPathGrid {
            time_step: 0.1,
            horizon: 1.0,
            values: vec![0.0; 11],
        };
        let lt = local_time(&path, 1.0, 0.05).unwrap();
        assert_eq!(lt.values.len(), 1);
        assert!((lt.values[0] - 1.0 / 0.05).abs() < 1e-9);
    }

    #[test]
    fn brownian_local_time_at_origin() {
        // E T_1(0) = 1 / sqrt(2 pi) * int_0^1 s^{-1/2} ds / sigma = sqrt(2 / pi) / sigma
        let scale = 0.5;
        let sigma = (2.0f64).sqrt() * scale;
        let exact = (2.0 / std::f64::consts::PI).sqrt() / sigma;
        let dx = 0.02;
        let mut acc = 0.0;
        let reps = 4000;
        for i in 0..reps {
            let path =
                simulate_levy_path(&brownian(scale), 1.0, 1e-4, &mut Stream::new(i)).unwrap();
            let lt = local_time(&path, 1.0, dx).unwrap();
            // bins [-dx, 0) and [0, dx) straddle the origin
            acc += lt
                .bins()
                .filter(|&(b, _)| b == -1 || b == 0)
                .map(|(_, v)| v)
                .sum::<f64>()
                / 2.0;
        }
        let est = acc / reps as f64;
        assert!((est / exact - 1.0).abs() < 0.1, "{est} vs {exact}");
    }

    fn delta_draws(t: f64, n: u64, dt: f64, dx: f64, salt: &str) -> Vec<f64> {
        let path = brownian(0.5);
        let noise = StableParams::gaussian_with_variance(1.0).unwrap();
        let root = Stream::new(77).split_label(salt);
        (0..n)
            .map(|i| {
                kesten_spitzer_sample(&path, &noise, t, dt, dx, &root.split(i))
                    .unwrap()
                    .value
            })
            .collect()
    }

    #[test]
    fn delta_is_leptokurtic_and_zero_at_origin() {
        let d = delta_draws(1.0, 10_000, 1e-3, 0.01, "kurt");
        assert!(kurtosis(&d) > 3.0);
        let path = brownian(0.5);
        let noise = StableParams::gaussian_with_variance(1.0).unwrap();
        let z = kesten_spitzer_sample(&path, &noise, 0.0, 1e-3, 0.01, &Stream::new(0)).unwrap();
        assert_eq!(z.value, 0.0);
        let slow = StableParams::symmetric(0.8, 1.0).unwrap();
        assert!(matches!(
            kesten_spitzer_sample(&slow, &noise, 1.0, 1e-3, 0.01, &Stream::new(0)),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn delta_self_similarity() {
        let d1 = delta_draws(1.0, 10_000, 1e-3, 1e-2, "one");
        let d2 = delta_draws(2.0, 10_000, 2e-3, 1e-2 * 2f64.sqrt(), "two");
        let target = 2f64.powf(0.75);
        for p in [0.75, 0.9] {
            let ratio = quantile(&d2, p) / quantile(&d1, p);
            assert!((ratio / target - 1.0).abs() < 0.1, "p = {p}: {ratio}");
        }
    }

    #[test]
    fn delta_refinement_is_stable() {
        let coarse = delta_draws(1.0, 10_000, 2e-3, 2e-2, "refine");
        let fine = delta_draws(1.0, 10_000, 1e-3, 1e-2, "refine");
        let (a, b) = (quantile(&coarse, 0.9), quantile(&fine, 0.9));
        assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn beta_levy_reduces_to_gaussian_and_vanishes_at_zero() {
        let noise = StableParams::gaussian_with_variance(1.0).unwrap();
        let mut s = Stream::new(4);
        assert_eq!(beta_levy_sample(&noise, 0.0, &mut s).unwrap().value, 0.0);
        let xs: Vec<f64> = (0..50_000)
            .map(|_| beta_levy_sample(&noise, 2.0, &mut s).unwrap().value)
            .collect();
        assert!((variance(&xs) / 2.0 - 1.0).abs() < 0.03);
        // characteristic function of Y_t: exp(-t |scale u|^beta)
        let p = StableParams::symmetric(1.5, 1.0).unwrap();
        let ys: Vec<f64> = (0..100_000)
            .map(|_| beta_levy_sample(&p, 0.5, &mut s).unwrap().value)
            .collect();
        for u in [0.5, 1.0, 2.0] {
            let ecf = ys.iter().map(|y| (u * y).cos()).sum::<f64>() / ys.len() as f64;
            assert!((ecf - (-0.5 * u.powf(1.5)).exp()).abs() < 0.02);
        }
    }

    #[test]
    fn alpha_one_constant_values() {
        assert!((alpha_one_constant(2.0, 1.0).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((alpha_one_constant(1.5, 2.0).unwrap() - 0.5303).abs() < 1e-4);
        assert!((alpha_one_constant(1.0 + 1e-12, 3.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(alpha_one_constant(2.5, 1.0).is_err());
    }

    struct Escape;

    impl StepSource for Escape {
        fn index(&self) -> f64 {
            0.5
        }

        fn sample_step<R: Rng + ?Sized>(&self, _rng: &mut R) -> i64 {
            1
        }
    }

    #[test]
    fn b_is_zero_without_returns() {
        let b = estimate_b_constant(&Escape, 1.5, 1000, 20, &Stream::new(0)).unwrap();
        assert_eq!(b.estimate, 0.0);
        assert_eq!(b.mean_returns, 0.0);
    }

    #[test]
    fn b_refuses_recurrent_walks() {
        let law = LatticeStepLaw::lazy_simple(0.5).unwrap();
        assert!(matches!(
            estimate_b_constant(&law, 2.0, 100, 10, &Stream::new(0)),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn b_for_beta_two_is_root_mean_returns() {
        let law = LatticeStepLaw::symmetric_pareto(0.8, 0.2, None).unwrap();
        let b = estimate_b_constant(&law, 2.0, 20_000, 400, &Stream::new(9)).unwrap();
        assert!((b.estimate - b.mean_returns.sqrt()).abs() < 1e-12);
        assert!(b.standard_error > 0.0);
        assert!(
            (b.estimate - b.half_horizon_estimate).abs()
                < 2.0 * (b.standard_error + b.half_horizon_standard_error)
        );
    }
}
