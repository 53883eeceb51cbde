//! The deterministic discrete-event engine: Interest/Data forwarding over
//! the topology with per-router content store, PIT and FIB, policy
//! switching by strategy, and metrics collection.
//!
//! Determinism: all randomness flows from the scenario seed through
//! per-purpose generators, and simultaneous events are ordered by a fixed
//! kind priority, then by insertion sequence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{decide, estimate_alpha, DecisionConfig, EventDB};
use crate::cache::{ChunkId, ContentStore, Policy};
use crate::error::SimError;
use crate::metrics::{MetricsReport, PolicyChange, SecondRow};
use crate::scenario::{admin_policy, Resolved, ScenarioConfig, Strategy};
use crate::topology::NodeId;
use crate::workload::{place_consumers, requests, schedule, Request};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Face {
    Consumer(usize),
    Router(NodeId),
}

#[derive(Debug, Clone)]
enum Packet {
    Interest {
        chunk: ChunkId,
        realtime: bool,
        from: Face,
    },
    Data {
        chunk: ChunkId,
        hops: u32,
    },
}

#[derive(Debug, Clone)]
enum EventKind {
    PhaseChange,
    AdminSwitch(Policy),
    ProgramSwap(usize),
    Arrival { node: NodeId, packet: Packet },
    Request(usize),
    ReasonerTick,
    StatsTick,
}

impl EventKind {
    fn priority(&self) -> u8 {
        match self {
            EventKind::PhaseChange => 0,
            EventKind::AdminSwitch(_) => 1,
            EventKind::ProgramSwap(_) => 2,
            EventKind::Arrival { .. } => 3,
            EventKind::Request(_) => 4,
            EventKind::ReasonerTick => 5,
            EventKind::StatsTick => 6,
        }
    }
}

#[derive(Debug)]
struct Event {
    at_ms: u64,
    prio: u8,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed so the BinaryHeap pops the earliest event first
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at_ms, other.prio, other.seq).cmp(&(self.at_ms, self.prio, self.seq))
    }
}

#[derive(Debug)]
struct PitEntry {
    faces: Vec<Face>,
    expiry_ms: u64,
}

struct Router {
    store: ContentStore,
    pit: BTreeMap<ChunkId, PitEntry>,
    fib_next: Option<NodeId>,
    /// (arrival ms, content name, realtime) per forwarded Interest.
    interest_log: VecDeque<(u64, String, bool)>,
    db: EventDB,
    policy_log: Vec<PolicyChange>,
}

impl Router {
    fn set_policy(&mut self, policy: Policy, now: u64) {
        if self.store.policy() != policy {
            self.store.switch_policy(policy, now);
            self.policy_log.push(PolicyChange { at_ms: now, policy });
        }
    }
}

struct Sim {
    routers: Vec<Router>,
    heap: BinaryHeap<Event>,
    seq: u64,
    link_delay_ms: u64,
    pit_expiry_ms: u64,
    requests: Vec<Request>,
    decision: DecisionConfig,
    using_default_program: bool,
    program_swaps: Vec<(u64, lars::Program)>,
    // per-second accumulators and totals
    bucket_requests: Vec<u64>,
    bucket_hits: Vec<u64>,
    issued: u64,
    satisfied: u64,
    expired: u64,
    stray_data: u64,
    distance_sum: u64,
    deliveries: u64,
    decision_failures: u64,
}

impl Sim {
    fn push(&mut self, at_ms: u64, kind: EventKind) {
        self.seq += 1;
        let prio = kind.priority();
        self.heap.push(Event { at_ms, prio, seq: self.seq, kind });
    }

    /// Sends one Data copy toward a face: consumers take delivery here
    /// (the access link does not count as a hop); routers get it after
    /// one link delay with the hop count bumped.
    fn deliver(&mut self, to: Face, chunk: &ChunkId, hops: u32, now: u64) {
        match to {
            Face::Consumer(_) => {
                self.satisfied += 1;
                self.deliveries += 1;
                self.distance_sum += hops as u64;
            }
            Face::Router(p) => {
                self.push(
                    now + self.link_delay_ms,
                    EventKind::Arrival {
                        node: p,
                        packet: Packet::Data { chunk: chunk.clone(), hops: hops + 1 },
                    },
                );
            }
        }
    }

    fn process_interest(
        &mut self,
        node: NodeId,
        chunk: ChunkId,
        realtime: bool,
        from: Face,
        now: u64,
    ) {
        self.routers[node]
            .interest_log
            .push_back((now, chunk.content.clone(), realtime));

        if self.routers[node].store.lookup(&chunk, now) {
            self.bucket_hits[(now / 1000) as usize] += 1;
            self.deliver(from, &chunk, 0, now);
            return;
        }

        // drop an expired entry before consulting the PIT
        let expired_faces = match self.routers[node].pit.get(&chunk) {
            Some(entry) if entry.expiry_ms < now => {
                self.routers[node].pit.remove(&chunk).map(|e| e.faces)
            }
            _ => None,
        };
        if let Some(faces) = expired_faces {
            self.count_expired(&faces);
        }

        if let Some(entry) = self.routers[node].pit.get_mut(&chunk) {
            // aggregation: remember the face, forward nothing
            if matches!(from, Face::Consumer(_)) || !entry.faces.contains(&from) {
                entry.faces.push(from);
            }
            return;
        }

        self.routers[node].pit.insert(
            chunk.clone(),
            PitEntry { faces: vec![from], expiry_ms: now + self.pit_expiry_ms },
        );
        match self.routers[node].fib_next {
            Some(next) => self.push(
                now + self.link_delay_ms,
                EventKind::Arrival {
                    node: next,
                    packet: Packet::Interest { chunk, realtime, from: Face::Router(node) },
                },
            ),
            None => {
                // the producer behind this router always has the chunk
                self.push(
                    now + self.link_delay_ms,
                    EventKind::Arrival { node, packet: Packet::Data { chunk, hops: 0 } },
                );
            }
        }
    }

    fn process_data(&mut self, node: NodeId, chunk: ChunkId, hops: u32, now: u64) {
        let Some(entry) = self.routers[node].pit.remove(&chunk) else {
            self.stray_data += 1;
            return;
        };
        if entry.expiry_ms < now {
            self.count_expired(&entry.faces);
            self.stray_data += 1;
            return;
        }
        if !self.routers[node].store.contains(&chunk) {
            self.routers[node]
                .store
                .insert(chunk.clone(), now)
                .expect("checked absent");
        }
        for face in entry.faces {
            self.deliver(face, &chunk, hops, now);
        }
    }

    fn count_expired(&mut self, faces: &[Face]) {
        self.expired += faces
            .iter()
            .filter(|f| matches!(f, Face::Consumer(_)))
            .count() as u64;
    }

    fn sweep_pits(&mut self, now: u64) {
        for node in 0..self.routers.len() {
            let dead: Vec<ChunkId> = self.routers[node]
                .pit
                .iter()
                .filter(|(_, e)| e.expiry_ms < now)
                .map(|(c, _)| c.clone())
                .collect();
            for chunk in dead {
                let entry = self.routers[node].pit.remove(&chunk).unwrap();
                self.count_expired(&entry.faces);
            }
        }
    }

    /// Records the just-completed second into every router's event DB:
    /// the popularity estimate over the trailing estimation window and
    /// the realtime-majority flag for that second.
    fn record_observations(&mut self, second: u64, now: u64) {
        let window_ms = self.decision.estimation_window_s * 1000;
        let min_interests = self.decision.min_interests;
        for router in &mut self.routers {
            while let Some(front) = router.interest_log.front() {
                if front.0 + window_ms + 2000 <= now {
                    router.interest_log.pop_front();
                } else {
                    break;
                }
            }
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            let (mut rt_total, mut rt_hits) = (0u64, 0u64);
            for (t, content, realtime) in router.interest_log.iter() {
                if *t + window_ms >= now && *t < now {
                    *counts.entry(content.clone()).or_default() += 1;
                }
                if *t >= second * 1000 && *t < now {
                    rt_total += 1;
                    rt_hits += u64::from(*realtime);
                }
            }
            // too little fresh data to re-estimate: hold the last estimate
            let alpha10 =
                estimate_alpha(&counts, min_interests).or_else(|| router.db.latest_alpha());
            let rtm50 = rt_total > 0 && rt_hits * 2 >= rt_total;
            router
                .db
                .record_tick(second, alpha10, rtm50)
                .expect("stats ticks are ordered");
        }
    }

    fn reasoner_tick(&mut self, now: u64) {
        for node in 0..self.routers.len() {
            match decide(&self.routers[node].db, now / 1000, &self.decision) {
                Ok(d) => {
                    if self.using_default_program {
                        assert_eq!(
                            d.derived.len(),
                            1,
                            "default rules must derive exactly one use(_)"
                        );
                    }
                    self.routers[node].set_policy(d.policy, now);
                }
                Err(_) => {
                    // a broken custom program leaves the policy as is
                    self.decision_failures += 1;
                }
            }
        }
    }
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer over seed + salt
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run(cfg: &ScenarioConfig) -> Result<MetricsReport, SimError> {
    let resolved = cfg.resolve()?;
    let Resolved {
        topology,
        producer,
        catalog,
        phases,
        cache_capacity,
        decision,
        program_swaps,
        horizon_s,
    } = resolved;
    let seed = cfg.seed;
    let horizon_ms = horizon_s * 1000;
    let n = topology.len();
    let fib = topology.build_fib(producer);

    let mut wl_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
    let placement = place_consumers(cfg.consumers, n, &mut wl_rng);
    let downloads = schedule(&phases, &catalog, &placement, &mut wl_rng);
    let reqs = requests(&downloads, &catalog, horizon_ms);

    let mut active = vec![0u64; horizon_s as usize];
    for d in &downloads {
        let end_ms = (d.start_ms + catalog.download_duration_ms()).min(horizon_ms);
        for s in d.start_ms / 1000..end_ms.div_ceil(1000).min(horizon_s) {
            active[s as usize] += 1;
        }
    }

    let initial_policy = match cfg.strategy {
        Strategy::Admin => admin_policy(phases[0].alpha),
        Strategy::Ica => decision.initial_policy,
        stat => stat.static_policy().expect("static strategy"),
    };
    let retention = crate::agent::max_window_s(&decision.program) + 10;
    let routers: Vec<Router> = (0..n)
        .map(|i| Router {
            store: ContentStore::new(cache_capacity, initial_policy, mix_seed(seed, 100 + i as u64)),
            pit: BTreeMap::new(),
            fib_next: fib[i],
            interest_log: VecDeque::new(),
            db: EventDB::new(retention),
            policy_log: vec![PolicyChange { at_ms: 0, policy: initial_policy }],
        })
        .collect();

    let mut sim = Sim {
        routers,
        heap: BinaryHeap::new(),
        seq: 0,
        link_delay_ms: cfg.link_delay_ms,
        pit_expiry_ms: cfg.pit_expiry_ms,
        requests: reqs,
        decision,
        using_default_program: cfg.program.is_none(),
        program_swaps,
        bucket_requests: vec![0; horizon_s as usize],
        bucket_hits: vec![0; horizon_s as usize],
        issued: 0,
        satisfied: 0,
        expired: 0,
        stray_data: 0,
        distance_sum: 0,
        deliveries: 0,
        decision_failures: 0,
    };

    for phase in &phases[1..] {
        sim.push(phase.start_s * 1000, EventKind::PhaseChange);
        if cfg.strategy == Strategy::Admin {
            sim.push(
                phase.start_s * 1000,
                EventKind::AdminSwitch(admin_policy(phase.alpha)),
            );
        }
    }
    let swap_times: Vec<u64> = sim.program_swaps.iter().map(|(s, _)| s * 1000).collect();
    for (i, at_ms) in swap_times.into_iter().enumerate() {
        sim.push(at_ms, EventKind::ProgramSwap(i));
    }
    for i in 0..sim.requests.len() {
        let at_ms = sim.requests[i].at_ms;
        sim.push(at_ms, EventKind::Request(i));
    }
    if cfg.strategy == Strategy::Ica {
        let period_ms = cfg.reasoner_period_s * 1000;
        let mut t = period_ms;
        while t < horizon_ms {
            sim.push(t, EventKind::ReasonerTick);
            t += period_ms;
        }
    }
    for s in 1..=horizon_s {
        sim.push(s * 1000, EventKind::StatsTick);
    }

    let mut rows: Vec<SecondRow> = Vec::with_capacity(horizon_s as usize);
    // policies in effect at the start of the bucket being accumulated
    let mut policy_snapshot: Vec<Policy> = sim.routers.iter().map(|r| r.store.policy()).collect();

    while let Some(event) = sim.heap.pop() {
        let now = event.at_ms;
        if now > horizon_ms || (now == horizon_ms && !matches!(event.kind, EventKind::StatsTick)) {
            continue;
        }
        match event.kind {
            EventKind::PhaseChange => {}
            EventKind::AdminSwitch(policy) => {
                for node in 0..n {
                    sim.routers[node].set_policy(policy, now);
                }
            }
            EventKind::ProgramSwap(i) => {
                sim.decision.program = sim.program_swaps[i].1.clone();
                sim.using_default_program = false;
            }
            EventKind::Request(i) => {
                let rq = sim.requests[i].clone();
                sim.issued += 1;
                sim.bucket_requests[(now / 1000) as usize] += 1;
                sim.process_interest(
                    rq.access_router,
                    rq.chunk,
                    rq.realtime,
                    Face::Consumer(rq.consumer),
                    now,
                );
            }
            EventKind::Arrival { node, packet } => match packet {
                Packet::Interest { chunk, realtime, from } => {
                    sim.process_interest(node, chunk, realtime, from, now)
                }
                Packet::Data { chunk, hops } => sim.process_data(node, chunk, hops, now),
            },
            EventKind::ReasonerTick => sim.reasoner_tick(now),
            EventKind::StatsTick => {
                let second = now / 1000 - 1;
                rows.push(SecondRow {
                    second,
                    requests: sim.bucket_requests[second as usize],
                    hits: sim.bucket_hits[second as usize],
                    active_downloads: active[second as usize],
                    policies: policy_snapshot.clone(),
                });
                policy_snapshot = sim.routers.iter().map(|r| r.store.policy()).collect();
                sim.sweep_pits(now);
                if cfg.strategy == Strategy::Ica {
                    sim.record_observations(second, now);
                }
            }
        }
    }

    // whatever is still pending at the horizon never got an answer
    let leftover: Vec<Vec<Face>> = sim
        .routers
        .iter_mut()
        .flat_map(|r| std::mem::take(&mut r.pit).into_values().map(|e| e.faces))
        .collect();
    for faces in leftover {
        sim.count_expired(&faces);
    }
    assert_eq!(
        sim.issued,
        sim.satisfied + sim.expired,
        "every issued Interest is satisfied or expired"
    );

    let total_requests: u64 = sim.bucket_requests.iter().sum();
    let total_hits: u64 = sim.bucket_hits.iter().sum();
    Ok(MetricsReport {
        seed,
        horizon_s,
        router_names: (0..n).map(|i| topology.name(i).to_string()).collect(),
        rows,
        policy_logs: sim.routers.iter().map(|r| r.policy_log.clone()).collect(),
        total_requests,
        total_hits,
        satisfied: sim.satisfied,
        expired: sim.expired,
        stray_data: sim.stray_data,
        distance_sum: sim.distance_sum,
        deliveries: sim.deliveries,
        decision_failures: sim.decision_failures,
    })
}
