//! Evaluation of `U_n`, `L_n` and `R_n` along a path.
//!
//! Appending position `S_{n+1} = y` adds `sum_x N_n(x) h(xi(x), xi(y))` to
//! `U_n` (the current site included with its count before the visit), which
//! is the increment of
//! `U_n = sum_{x<y} N(x) N(y) h(xi(x), xi(y)) + sum_x C(N(x), 2) h(xi(x), xi(x))`.
//! The site engine evaluates that sum over the visited sites, O(range) per
//! step. Kernels with a feature form `h(x, y) = phi(x)' M phi(y)` use the
//! factored engine instead: the sum collapses to `F' M phi(xi(y))` with
//! `F = sum_{i<=n} phi(xi(S_i))`, O(1) per step.

use rustc_hash::FxHashMap;

use crate::scenery::SceneryStore;
use crate::walk::WalkState;

use super::hoeffding::HoeffdingParts;
use super::kernel::{features, KernelKind, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStatRecord {
    pub n: u64,
    pub u: f64,
    pub l: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Sites,
    Factored,
}

#[derive(Debug, Clone)]
enum State {
    Sites {
        slots: FxHashMap<i64, usize>,
        counts: Vec<f64>,
        values: Vec<f64>,
    },
    Factored {
        form: [[f64; 3]; 3],
        sums: [f64; 3],
    },
}

#[derive(Debug, Clone)]
pub struct UStatAccumulator<'p> {
    parts: &'p HoeffdingParts,
    state: State,
    h1_cache: Option<FxHashMap<i64, f64>>,
    n: u64,
    u: f64,
    l: f64,
}

impl<'p> UStatAccumulator<'p> {
    /// Factored engine when the kernel admits it, site engine otherwise.
    pub fn new(parts: &'p HoeffdingParts) -> Self {
        let engine = if parts.kernel.feature_form().is_some() {
            Engine::Factored
        } else {
            Engine::Sites
        };
        Self::with_engine(parts, engine)
    }

    pub fn with_engine(parts: &'p HoeffdingParts, engine: Engine) -> Self {
        let state = match (engine, parts.kernel.feature_form()) {
            (Engine::Factored, Some(form)) => State::Factored {
                form,
                sums: [0.0; 3],
            },
            _ => State::Sites {
                slots: FxHashMap::default(),
                counts: Vec::new(),
                values: Vec::new(),
            },
        };
        let h1_cache = parts.h1_is_costly().then(FxHashMap::default);
        Self {
            parts,
            state,
            h1_cache,
            n: 0,
            u: 0.0,
            l: 0.0,
        }
    }

    pub fn engine(&self) -> Engine {
        match self.state {
            State::Sites { .. } => Engine::Sites,
            State::Factored { .. } => Engine::Factored,
        }
    }

    /// Append the next position `site` with scenery value `xi`.
    #[inline]
    pub fn push(&mut self, site: i64, xi: f64) {
        let kernel = &self.parts.kernel;
        let delta = match &mut self.state {
            State::Factored { form, sums } => {
                let phi = features(xi);
                let mut d = 0.0;
                for a in 0..3 {
                    if sums[a] != 0.0 {
                        d += sums[a]
                            * (form[a][0] * phi[0] + form[a][1] * phi[1] + form[a][2] * phi[2]);
                    }
                }
                for a in 0..3 {
                    sums[a] += phi[a];
                }
                d
            }
            State::Sites {
                slots,
                counts,
                values,
            } => {
                let d = weighted_kernel_sum(kernel, counts, values, xi);
                let next = counts.len();
                let slot = *slots.entry(site).or_insert(next);
                if slot == next {
                    counts.push(0.0);
                    values.push(xi);
                }
                counts[slot] += 1.0;
                d
            }
        };
        self.u += delta;
        let h1 = match &mut self.h1_cache {
            Some(cache) => *cache.entry(site).or_insert_with(|| self.parts.h1(xi)),
            None => self.parts.h1(xi),
        };
        self.l += h1;
        self.n += 1;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Snapshot; `r` is defined as `u - (n - 1) l`.
    pub fn record(&self) -> UStatRecord {
        let r = if self.n == 0 {
            self.u
        } else {
            self.u - (self.n - 1) as f64 * self.l
        };
        UStatRecord {
            n: self.n,
            u: self.u,
            l: self.l,
            r,
        }
    }
}

/// `sum_k counts[k] h(values[k], y)`, with the kernel dispatch hoisted out of
/// the loop.
fn weighted_kernel_sum(kernel: &KernelSpec, counts: &[f64], values: &[f64], y: f64) -> f64 {
    let c = kernel.centering;
    let pairs = counts.iter().zip(values);
    let s: f64 = match kernel.kind {
        KernelKind::Sum => pairs.map(|(n, x)| n * (x + y - c)).sum(),
        KernelKind::Product => pairs.map(|(n, x)| n * (x * y - c)).sum(),
        KernelKind::ProductPlusSum => pairs.map(|(n, x)| n * (x * y + (x + y) - c)).sum(),
        _ => pairs.map(|(n, x)| n * kernel.eval(*x, y)).sum(),
    };
    if s.is_finite() {
        s
    } else {
        counts
            .iter()
            .zip(values)
            .map(|(n, x)| n * kernel.eval(*x, y))
            .sum()
    }
}

fn path_values(scenery: &mut SceneryStore, path: &WalkState) -> Vec<f64> {
    path.positions().iter().map(|&s| scenery.value(s)).collect()
}

/// `U_n` by the double loop over `i < j`. O(n^2); reference only.
pub fn u_statistic_naive(kernel: &KernelSpec, scenery: &mut SceneryStore, path: &WalkState) -> f64 {
    let xs = path_values(scenery, path);
    let mut u = 0.0;
    for j in 1..xs.len() {
        for i in 0..j {
            u += kernel.eval(xs[i], xs[j]);
        }
    }
    u
}

/// `U_n`, `L_n`, `R_n` by the site-indexed incremental algorithm.
pub fn u_statistic_by_sites(
    parts: &HoeffdingParts,
    scenery: &mut SceneryStore,
    path: &WalkState,
) -> UStatRecord {
    run_engine(parts, scenery, path, Engine::Sites)
}

/// Same quantities via the factored engine (falls back to sites for kernels
/// without a feature form).
pub fn u_statistic_factored(
    parts: &HoeffdingParts,
    scenery: &mut SceneryStore,
    path: &WalkState,
) -> UStatRecord {
    run_engine(parts, scenery, path, Engine::Factored)
}

fn run_engine(
    parts: &HoeffdingParts,
    scenery: &mut SceneryStore,
    path: &WalkState,
    engine: Engine,
) -> UStatRecord {
    let mut acc = UStatAccumulator::with_engine(parts, engine);
    for &site in path.positions() {
        let xi = scenery.value(site);
        acc.push(site, xi);
    }
    acc.record()
}
