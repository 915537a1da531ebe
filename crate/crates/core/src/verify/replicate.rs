use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_key, label_tag, Stream};
use crate::scenery::SceneryStore;
use crate::stable::StepSource;
use crate::ustat::{HoeffdingParts, UStatAccumulator};
use crate::walk::WalkState;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub n: u64,
    pub u: f64,
    pub l: f64,
    pub r: f64,
    pub v: u64,
    pub range: u64,
}

/// Running extremes of `U_k / (k^{7/4} (log log k)^{3/4})` over
/// `k_min <= k <= n_max`, and of the same ratio for the linear part
/// `(k - 1) L_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilTrack {
    pub m_plus: f64,
    pub m_minus: f64,
    pub linear_plus: f64,
    pub linear_minus: f64,
    /// `(k, U_k / normalizer)` on a geometric set of `k`, for plotting.
    pub checkpoints: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: u64,
    pub records: Vec<GridRecord>,
    pub lil: Option<LilTrack>,
}

impl ReplicateResult {
    pub fn record_at(&self, n: u64) -> Option<&GridRecord> {
        self.records.iter().find(|r| r.n == n)
    }
}

/// `k^{7/4} (log log k)^{3/4}`.
pub fn lil_normalizer(k: u64) -> f64 {
    let k = k as f64;
    k.powf(1.75) * k.ln().ln().powf(0.75)
}

/// Per-step tracking window; the reciprocal normalizers are computed once and
/// shared by every replicate.
#[derive(Debug, Clone)]
pub struct LilSpec {
    pub k_min: u64,
    pub n_max: u64,
    inverse: Arc<Vec<f64>>,
    checkpoints: Arc<Vec<u64>>,
}

const CHECKPOINTS_PER_DECADE: f64 = 40.0;

impl LilSpec {
    pub fn new(k_min: u64, n_max: u64) -> Result<Self> {
        if k_min < 16 {
            return Err(Error::Domain(format!(
                "lil k_min = {k_min} must be >= 16 so that log log k > 0"
            )));
        }
        if n_max < k_min {
            return Err(Error::Domain(format!(
                "lil n_max = {n_max} below k_min = {k_min}"
            )));
        }
        let inverse = (k_min..=n_max).map(|k| 1.0 / lil_normalizer(k)).collect();
        let decades = (n_max as f64 / k_min as f64).log10();
        let count = (decades * CHECKPOINTS_PER_DECADE).ceil() as u64;
        let mut checkpoints: Vec<u64> = (0..=count)
            .map(|i| (k_min as f64 * 10f64.powf(i as f64 / CHECKPOINTS_PER_DECADE)).round() as u64)
            .map(|k| k.min(n_max))
            .collect();
        checkpoints.dedup();
        Ok(Self {
            k_min,
            n_max,
            inverse: Arc::new(inverse),
            checkpoints: Arc::new(checkpoints),
        })
    }
}

/// Seeds of replicate `i`: one for the walk, one for the scenery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSeeds {
    pub walk: u64,
    pub scenery: u64,
}

pub fn replicate_seeds(master_seed: u64, replicate: u64) -> ReplicateSeeds {
    ReplicateSeeds {
        walk: derive_key(derive_key(master_seed, label_tag("walk")), replicate),
        scenery: derive_key(derive_key(master_seed, label_tag("scenery")), replicate),
    }
}

/// One replicate: a single growing path, snapshotted at every grid point, and
/// optionally tracked step by step for the LIL statistics.
pub fn simulate_replicate(
    cfg: &ExperimentConfig,
    parts: &HoeffdingParts,
    replicate: u64,
    lil: Option<&LilSpec>,
) -> ReplicateResult {
    let seeds = replicate_seeds(cfg.master_seed, replicate);
    let mut rng = Stream::new(seeds.walk);
    let mut scenery = SceneryStore::new(cfg.scenery_law, seeds.scenery);
    let mut walk = WalkState::new();
    let mut acc = UStatAccumulator::new(parts);
    let horizon = cfg.n_max().max(lil.map_or(0, |s| s.n_max));
    let mut records = Vec::with_capacity(cfg.n_grid.len());
    let mut next_grid = cfg.n_grid.iter().copied().peekable();
    let mut track = lil.map(|_| LilTrack {
        m_plus: f64::NEG_INFINITY,
        m_minus: f64::INFINITY,
        linear_plus: f64::NEG_INFINITY,
        linear_minus: f64::INFINITY,
        checkpoints: Vec::new(),
    });
    let mut next_checkpoint = 0usize;

    for k in 1..=horizon {
        let visit = walk.push_increment(cfg.step_law.sample_step(&mut rng));
        let xi = scenery.value(visit.site);
        acc.push(visit.site, xi);
        if next_grid.peek() == Some(&k) {
            next_grid.next();
            let rec = acc.record();
            records.push(GridRecord {
                n: k,
                u: rec.u,
                l: rec.l,
                r: rec.r,
                v: walk.v(),
                range: walk.range(),
            });
        }
        if let (Some(spec), Some(t)) = (lil, track.as_mut()) {
            if k >= spec.k_min && k <= spec.n_max {
                let inv = spec.inverse[(k - spec.k_min) as usize];
                let s = acc.u() * inv;
                let lin = (k - 1) as f64 * acc.l() * inv;
                t.m_plus = t.m_plus.max(s);
                t.m_minus = t.m_minus.min(s);
                t.linear_plus = t.linear_plus.max(lin);
                t.linear_minus = t.linear_minus.min(lin);
                if spec.checkpoints.get(next_checkpoint) == Some(&k) {
                    t.checkpoints.push((k, s));
                    next_checkpoint += 1;
                }
            }
        }
    }
    ReplicateResult {
        replicate,
        records,
        lil: track,
    }
}

/// Replicates `0..cfg.replicates`, in order.
pub fn simulate_replicates(
    cfg: &ExperimentConfig,
    parts: &HoeffdingParts,
    lil: Option<&LilSpec>,
) -> Vec<ReplicateResult> {
    (0..cfg.replicates)
        .map(|i| simulate_replicate(cfg, parts, i, lil))
        .collect()
}
