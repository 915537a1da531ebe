//! Lazy iid scenery. `xi(site)` is drawn from a stream keyed by
//! `derive_key(master_seed, site)`, so the value at a site is a pure function
//! of `(master_seed, site)` regardless of query order or caching.

use rustc_hash::FxHashMap;

use crate::rng::{derive_key, Stream};
use crate::stable::SceneryLaw;

#[derive(Debug, Clone)]
pub struct SceneryStore {
    law: SceneryLaw,
    master_seed: u64,
    cache: Option<FxHashMap<i64, f64>>,
}

impl SceneryStore {
    pub fn new(law: SceneryLaw, master_seed: u64) -> Self {
        Self {
            law,
            master_seed,
            cache: Some(FxHashMap::default()),
        }
    }

    pub fn uncached(law: SceneryLaw, master_seed: u64) -> Self {
        Self {
            law,
            master_seed,
            cache: None,
        }
    }

    pub fn law(&self) -> &SceneryLaw {
        &self.law
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Stream dedicated to one site.
    pub fn site_stream(master_seed: u64, site: i64) -> Stream {
        Stream::new(derive_key(master_seed, site as u64))
    }

    /// Pure evaluation, never touches the cache.
    pub fn compute(&self, site: i64) -> f64 {
        self.law
            .sample(&mut Self::site_stream(self.master_seed, site))
    }

    /// Memoized evaluation.
    #[inline]
    pub fn value(&mut self, site: i64) -> f64 {
        let (law, seed) = (self.law, self.master_seed);
        match &mut self.cache {
            Some(cache) => *cache
                .entry(site)
                .or_insert_with(|| law.sample(&mut Self::site_stream(seed, site))),
            None => self.compute(site),
        }
    }

    pub fn cached_sites(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.len())
    }
}

/// Scenery value at `site`.
pub fn scenery_value(store: &mut SceneryStore, site: i64) -> f64 {
    store.value(site)
}
