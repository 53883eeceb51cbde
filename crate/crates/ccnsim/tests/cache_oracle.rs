//! Replays long random access traces against simple reference models of
//! each deterministic replacement policy and requires identical behavior,
//! operation by operation.

use std::collections::VecDeque;

use ccnsim::{ChunkId, ContentStore, Policy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAPACITY: usize = 16;
const OPS: usize = 10_000;

/// What one access did: whether it hit, and what got evicted if it missed.
type Outcome = (bool, Option<ChunkId>);

/// CCN-style access: look the chunk up; on a miss, insert it.
fn access_store(cs: &mut ContentStore, chunk: &ChunkId, now: u64) -> Outcome {
    if cs.lookup(chunk, now) {
        (true, None)
    } else {
        (false, cs.insert(chunk.clone(), now).unwrap())
    }
}

trait RefPolicy {
    fn access(&mut self, chunk: &ChunkId) -> Outcome;
    fn contents(&self) -> Vec<ChunkId>;
}

/// LRU as an explicit recency list: front is the coldest entry.
struct RefLru(VecDeque<ChunkId>);

impl RefPolicy for RefLru {
    fn access(&mut self, chunk: &ChunkId) -> Outcome {
        if let Some(pos) = self.0.iter().position(|c| c == chunk) {
            let c = self.0.remove(pos).unwrap();
            self.0.push_back(c);
            return (true, None);
        }
        let evicted = (self.0.len() == CAPACITY).then(|| self.0.pop_front().unwrap());
        self.0.push_back(chunk.clone());
        (false, evicted)
    }

    fn contents(&self) -> Vec<ChunkId> {
        self.0.iter().cloned().collect()
    }
}

/// FIFO as an arrival queue; hits do not reorder anything.
struct RefFifo(VecDeque<ChunkId>);

impl RefPolicy for RefFifo {
    fn access(&mut self, chunk: &ChunkId) -> Outcome {
        if self.0.contains(chunk) {
            return (true, None);
        }
        let evicted = (self.0.len() == CAPACITY).then(|| self.0.pop_front().unwrap());
        self.0.push_back(chunk.clone());
        (false, evicted)
    }

    fn contents(&self) -> Vec<ChunkId> {
        self.0.iter().cloned().collect()
    }
}

/// LFU as a sorted count table; ties go to the smallest chunk id.
struct RefLfu(Vec<(ChunkId, u64)>);

impl RefPolicy for RefLfu {
    fn access(&mut self, chunk: &ChunkId) -> Outcome {
        if let Some(entry) = self.0.iter_mut().find(|(c, _)| c == chunk) {
            entry.1 += 1;
            return (true, None);
        }
        let evicted = (self.0.len() == CAPACITY).then(|| {
            let victim = self
                .0
                .iter()
                .min_by_key(|(c, n)| (*n, c.clone()))
                .unwrap()
                .0
                .clone();
            self.0.retain(|(c, _)| *c != victim);
            victim
        });
        self.0.push((chunk.clone(), 1));
        (false, evicted)
    }

    fn contents(&self) -> Vec<ChunkId> {
        self.0.iter().map(|(c, _)| c.clone()).collect()
    }
}

fn random_trace(seed: u64) -> Vec<ChunkId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..OPS)
        .map(|_| ChunkId::new(format!("c{}", rng.gen_range(0..24)), rng.gen_range(0..3)))
        .collect()
}

fn check_against_reference(policy: Policy, reference: &mut dyn RefPolicy, seed: u64) {
    let mut cs = ContentStore::new(CAPACITY, policy, 0);
    for (i, chunk) in random_trace(seed).iter().enumerate() {
        let got = access_store(&mut cs, chunk, i as u64);
        let want = reference.access(chunk);
        assert_eq!(got, want, "{policy} diverged at op {i} on {chunk}");
    }
    let mut want = reference.contents();
    want.sort();
    assert_eq!(cs.chunks().cloned().collect::<Vec<_>>(), want, "{policy}");
}

#[test]
fn lru_matches_reference_over_long_traces() {
    for seed in 0..3 {
        check_against_reference(Policy::Lru, &mut RefLru(VecDeque::new()), seed);
    }
}

#[test]
fn fifo_matches_reference_over_long_traces() {
    for seed in 0..3 {
        check_against_reference(Policy::Fifo, &mut RefFifo(VecDeque::new()), seed);
    }
}

#[test]
fn lfu_matches_reference_over_long_traces() {
    for seed in 0..3 {
        check_against_reference(Policy::Lfu, &mut RefLfu(Vec::new()), seed);
    }
}

#[test]
fn random_eviction_depends_only_on_the_seed() {
    let outcomes = |cache_seed: u64| {
        let mut cs = ContentStore::new(CAPACITY, Policy::Random, cache_seed);
        random_trace(9)
            .iter()
            .enumerate()
            .map(|(i, c)| access_store(&mut cs, c, i as u64))
            .collect::<Vec<_>>()
    };
    assert_eq!(outcomes(1), outcomes(1));
    assert_ne!(outcomes(1), outcomes(2));
}

proptest! {
    /// Under arbitrary access sequences, capacities, and mid-trace policy
    /// switches, occupancy never exceeds capacity and evictions happen
    /// exactly when a miss lands in a full store.
    #[test]
    fn occupancy_never_exceeds_capacity(
        capacity in 1usize..12,
        ops in prop::collection::vec((0u32..40, 0u8..4), 1..300),
    ) {
        let policies = [Policy::Lru, Policy::Fifo, Policy::Lfu, Policy::Random];
        let mut cs = ContentStore::new(capacity, Policy::Lru, 5);
        for (i, &(key, switch)) in ops.iter().enumerate() {
            if switch == 0 {
                let before: Vec<ChunkId> = cs.chunks().cloned().collect();
                cs.switch_policy(policies[key as usize % 4], i as u64);
                prop_assert_eq!(cs.chunks().cloned().collect::<Vec<ChunkId>>(), before);
            }
            let chunk = ChunkId::new("c", key);
            let full = cs.len() == capacity;
            let (hit, evicted) = access_store(&mut cs, &chunk, i as u64);
            prop_assert_eq!(evicted.is_some(), !hit && full);
            prop_assert!(cs.len() <= capacity);
            prop_assert!(cs.contains(&chunk));
        }
    }
}
