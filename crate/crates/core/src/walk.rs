//! Lattice walk with incrementally maintained occupation counts `N_n(x)`,
//! self-intersection functional `V_n = sum_x N_n(x)^2` and range.

use std::collections::BTreeMap;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::stable::StepSource;

/// Result of appending one position: the site and its count before the visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Visit {
    pub site: i64,
    pub prior_count: u64,
}

#[derive(Debug, Clone, Default)]
pub struct WalkState {
    positions: Vec<i64>,
    occupation: FxHashMap<i64, u64>,
    v: u64,
}

impl WalkState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Walk whose positions are the partial sums of `increments`.
    pub fn from_increments(increments: &[i64]) -> Self {
        let mut w = Self::new();
        for &x in increments {
            w.push_increment(x);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Current position `S_n` (`S_0 = 0`).
    pub fn position(&self) -> i64 {
        self.positions.last().copied().unwrap_or(0)
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// `V_n`, maintained in O(1) per step.
    pub fn v(&self) -> u64 {
        self.v
    }

    /// Number of distinct visited sites.
    pub fn range(&self) -> u64 {
        self.occupation.len() as u64
    }

    pub fn occupation(&self, site: i64) -> u64 {
        self.occupation.get(&site).copied().unwrap_or(0)
    }

    /// `#{(i, j): i < j, S_i = S_j}`.
    pub fn self_intersections(&self) -> u64 {
        (self.v - self.len() as u64) / 2
    }

    /// Positions wrap on overflow; increments are bounded well inside i64.
    #[inline]
    pub fn push_increment(&mut self, increment: i64) -> Visit {
        let site = self.position().wrapping_add(increment);
        self.positions.push(site);
        let count = self.occupation.entry(site).or_insert(0);
        let prior_count = *count;
        *count += 1;
        self.v += 2 * prior_count + 1;
        Visit { site, prior_count }
    }

    /// `sum_x N(x)^2` from the raw positions, independent of the running value.
    pub fn recompute_v(&self) -> u64 {
        let mut counts: FxHashMap<i64, u64> = FxHashMap::default();
        for &s in &self.positions {
            *counts.entry(s).or_insert(0) += 1;
        }
        counts.values().map(|c| c * c).sum()
    }

    pub(crate) fn occupied_sites(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.occupation.iter().map(|(&s, &c)| (s, c))
    }
}

/// Advance the walk by `steps` increments drawn from `law`.
pub fn extend_walk<S, R>(state: &mut WalkState, law: &S, steps: u64, rng: &mut R)
where
    S: StepSource + ?Sized,
    R: Rng + ?Sized,
{
    state.positions.reserve(steps as usize);
    for _ in 0..steps {
        let x = law.sample_step(rng);
        state.push_increment(x);
    }
}

/// Read-only copy of `N_n(.)`, ordered by site.
pub fn occupation_snapshot(state: &WalkState) -> BTreeMap<i64, u64> {
    state.occupied_sites().collect()
}
