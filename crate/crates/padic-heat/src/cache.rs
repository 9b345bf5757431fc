//! Kernel slices shared between threads.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use padic_heat_core::kernel::{KernelParams, KernelSlice, KernelSource};
use padic_heat_core::Result;

/// Memoizes `KernelSlice`s by the bit pattern of `t`.
#[derive(Debug)]
pub struct KernelCache {
    params: KernelParams,
    slices: RwLock<HashMap<u64, Arc<KernelSlice>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl KernelCache {
    pub fn new(params: KernelParams) -> Self {
        KernelCache {
            params,
            slices: RwLock::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.slices.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` so far.
    pub fn stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}

impl KernelSource for KernelCache {
    fn params(&self) -> &KernelParams {
        &self.params
    }

    fn slice(&self, t: f64) -> Result<Arc<KernelSlice>> {
        let key = t.to_bits();
        if let Some(s) = self.slices.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(s.clone());
        }
        // built outside the lock; a racing thread may build the same slice,
        // first insert wins
        let s = Arc::new(KernelSlice::new(&self.params, t)?);
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mut map = self.slices.write().unwrap_or_else(|e| e.into_inner());
        Ok(map.entry(key).or_insert(s).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use padic_heat_core::Radius;

    #[test]
    fn hits_after_first_build() {
        let cache = KernelCache::new(KernelParams::new(3, 1, 1.0, 1.0).unwrap());
        let a = cache.slice(0.5).unwrap();
        let b = cache.slice(0.5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.stats(), (1, 1));
        assert_eq!(a.value(Radius::Origin), KernelSlice::new(cache.params(), 0.5).unwrap().value(Radius::Origin));
        assert!(cache.slice(0.0).is_err());
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn shared_across_threads() {
        let cache = Arc::new(KernelCache::new(KernelParams::new(2, 2, 0.5, 1.0).unwrap()));
        std::thread::scope(|s| {
            for _ in 0..4 {
                let c = cache.clone();
                s.spawn(move || {
                    for t in [0.1, 0.2, 0.3] {
                        c.slice(t).unwrap();
                    }
                });
            }
        });
        assert_eq!(cache.len(), 3);
        let (h, m) = cache.stats();
        assert_eq!(h + m, 12);
    }
}
