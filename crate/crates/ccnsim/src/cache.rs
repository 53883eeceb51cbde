//! Bounded per-router content store with runtime-switchable replacement
//! policies.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// A cacheable unit: one chunk of one named content.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkId {
    pub content: String,
    pub index: u32,
}

impl ChunkId {
    pub fn new(content: impl Into<String>, index: u32) -> Self {
        ChunkId {
            content: content.into(),
            index,
        }
    }
}

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.content, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Lru,
    Fifo,
    Lfu,
    Random,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Lru => "lru",
            Policy::Fifo => "fifo",
            Policy::Lfu => "lfu",
            Policy::Random => "random",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "lru" => Ok(Policy::Lru),
            "fifo" => Ok(Policy::Fifo),
            "lfu" => Ok(Policy::Lfu),
            "random" => Ok(Policy::Random),
            other => Err(SimError::Config(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CacheEntry {
    inserted_at: u64,
    last_access: u64,
    access_count: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub insertions: u64,
    pub evictions: u64,
}

/// Fixed-capacity chunk cache. Eviction keys are policy-specific entry
/// metadata; ties always fall to the smallest ChunkId so runs are
/// reproducible.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    policy: Policy,
    entries: BTreeMap<ChunkId, CacheEntry>,
    rng: ChaCha8Rng,
    pub stats: CacheStats,
}

impl ContentStore {
    pub fn new(capacity: usize, policy: Policy, rng_seed: u64) -> Self {
        assert!(capacity > 0, "cache capacity must be positive");
        ContentStore {
            capacity,
            policy,
            entries: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
            stats: CacheStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn contains(&self, chunk: &ChunkId) -> bool {
        self.entries.contains_key(chunk)
    }

    pub fn chunks(&self) -> impl Iterator<Item = &ChunkId> {
        self.entries.keys()
    }

    /// On a hit, refreshes recency and frequency metadata.
    pub fn lookup(&mut self, chunk: &ChunkId, now: u64) -> bool {
        match self.entries.get_mut(chunk) {
            Some(entry) => {
                entry.last_access = now;
                entry.access_count += 1;
                self.stats.hits += 1;
                true
            }
            None => {
                self.stats.misses += 1;
                false
            }
        }
    }

    /// Inserts a chunk that is not present, evicting one entry first when
    /// full. Returns the evicted chunk, if any.
    pub fn insert(&mut self, chunk: ChunkId, now: u64) -> Result<Option<ChunkId>, SimError> {
        if self.entries.contains_key(&chunk) {
            return Err(SimError::DuplicateInsert(chunk.to_string()));
        }
        let evicted = if self.entries.len() == self.capacity {
            let victim = self.pick_victim();
            self.entries.remove(&victim);
            self.stats.evictions += 1;
            Some(victim)
        } else {
            None
        };
        self.entries.insert(
            chunk,
            CacheEntry {
                inserted_at: now,
                last_access: now,
                access_count: 1,
            },
        );
        self.stats.insertions += 1;
        Ok(evicted)
    }

    fn pick_victim(&mut self) -> ChunkId {
        debug_assert!(!self.entries.is_empty());
        match self.policy {
            // BTreeMap iteration is ordered by ChunkId, and min_by_key
            // keeps the first minimum, so ties fall to the smallest id.
            Policy::Lru => self.min_by(|e| e.last_access),
            Policy::Fifo => self.min_by(|e| e.inserted_at),
            Policy::Lfu => self.min_by(|e| e.access_count),
            Policy::Random => {
                let i = self.rng.gen_range(0..self.entries.len());
                self.entries.keys().nth(i).expect("index in range").clone()
            }
        }
    }

    fn min_by(&self, key: impl Fn(&CacheEntry) -> u64) -> ChunkId {
        self.entries
            .iter()
            .min_by_key(|(id, e)| (key(e), (*id).clone()))
            .map(|(id, _)| id.clone())
            .expect("store not empty")
    }

    /// Switches the replacement policy in place. Cached chunks are kept;
    /// recency and frequency metadata restart from `now` so the new policy
    /// is not driven by bookkeeping of the old one. Insertion times are
    /// preserved.
    pub fn switch_policy(&mut self, new: Policy, now: u64) {
        for entry in self.entries.values_mut() {
            entry.last_access = now;
            entry.access_count = 1;
        }
        self.policy = new;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chunk(name: &str) -> ChunkId {
        ChunkId::new(name, 0)
    }

    #[test]
    fn empty_store_misses() {
        let mut cs = ContentStore::new(4, Policy::Lru, 0);
        assert!(!cs.lookup(&chunk("a"), 1));
        assert_eq!(cs.stats.misses, 1);
    }

    #[test]
    fn insertion_counts_as_first_access() {
        let mut cs = ContentStore::new(4, Policy::Lfu, 0);
        cs.insert(chunk("a"), 1).unwrap();
        assert!(cs.lookup(&chunk("a"), 2));
        assert_eq!(cs.entries[&chunk("a")].access_count, 2);
    }

    #[test]
    fn capacity_one_evicts_under_every_policy() {
        for policy in [Policy::Lru, Policy::Fifo, Policy::Lfu, Policy::Random] {
            let mut cs = ContentStore::new(1, policy, 7);
            cs.insert(chunk("a"), 1).unwrap();
            let evicted = cs.insert(chunk("b"), 2).unwrap();
            assert_eq!(evicted, Some(chunk("a")), "{policy}");
            assert!(!cs.lookup(&chunk("a"), 3), "{policy}");
        }
    }

    #[test]
    fn lru_evicts_least_recently_used() {
        let mut cs = ContentStore::new(2, Policy::Lru, 0);
        cs.insert(chunk("a"), 1).unwrap();
        cs.insert(chunk("b"), 2).unwrap();
        assert!(cs.lookup(&chunk("a"), 3));
        assert_eq!(cs.insert(chunk("c"), 4).unwrap(), Some(chunk("b")));
    }

    #[test]
    fn fifo_evicts_earliest_inserted() {
        let mut cs = ContentStore::new(2, Policy::Fifo, 0);
        cs.insert(chunk("a"), 1).unwrap();
        cs.insert(chunk("b"), 2).unwrap();
        assert!(cs.lookup(&chunk("a"), 3));
        assert_eq!(cs.insert(chunk("c"), 4).unwrap(), Some(chunk("a")));
    }

    #[test]
    fn lfu_evicts_smallest_count() {
        let mut cs = ContentStore::new(2, Policy::Lfu, 0);
        cs.insert(chunk("a"), 1).unwrap();
        cs.lookup(&chunk("a"), 1);
        cs.lookup(&chunk("a"), 2);
        cs.insert(chunk("b"), 2).unwrap();
        assert_eq!(cs.insert(chunk("c"), 3).unwrap(), Some(chunk("b")));
    }

    #[test]
    fn duplicate_insert_is_an_error() {
        let mut cs = ContentStore::new(2, Policy::Lru, 0);
        cs.insert(chunk("a"), 1).unwrap();
        assert!(cs.insert(chunk("a"), 2).is_err());
    }

    #[test]
    fn ties_fall_to_smallest_chunk_id() {
        let mut cs = ContentStore::new(3, Policy::Lru, 0);
        // all three share last_access = 5
        cs.insert(ChunkId::new("v", 2), 5).unwrap();
        cs.insert(ChunkId::new("v", 1), 5).unwrap();
        cs.insert(ChunkId::new("u", 9), 5).unwrap();
        assert_eq!(cs.insert(chunk("w"), 6).unwrap(), Some(ChunkId::new("u", 9)));
    }

    #[test]
    fn switch_policy_keeps_contents_and_resets_metadata() {
        let mut cs = ContentStore::new(3, Policy::Lfu, 0);
        cs.insert(chunk("a"), 1).unwrap();
        cs.lookup(&chunk("a"), 2);
        cs.lookup(&chunk("a"), 3);
        cs.insert(chunk("b"), 4).unwrap();
        let before: Vec<_> = cs.chunks().cloned().collect();
        cs.switch_policy(Policy::Lfu, 10);
        assert_eq!(cs.chunks().cloned().collect::<Vec<_>>(), before);
        // after the reset, the count-1 tie falls to the smallest id,
        // regardless of the pre-switch frequency of "a"
        cs.insert(chunk("c"), 11).unwrap();
        assert_eq!(cs.insert(chunk("d"), 12).unwrap(), Some(chunk("a")));
    }

    #[test]
    fn random_is_seed_deterministic() {
        let trace = |seed: u64| {
            let mut cs = ContentStore::new(4, Policy::Random, seed);
            let mut evictions = Vec::new();
            for i in 0..64u32 {
                if let Some(e) = cs.insert(ChunkId::new("v", i), i as u64).unwrap() {
                    evictions.push(e);
                }
            }
            evictions
        };
        assert_eq!(trace(42), trace(42));
        assert_ne!(trace(42), trace(43));
    }
}
