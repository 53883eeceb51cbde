//! Scenario configuration: a TOML schema, built-in scenarios, validation,
//! and resolution into ready-to-run pieces.

use std::collections::BTreeSet;
use std::fmt;

use lars::{parse_program, Program};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{default_program, DecisionConfig};
use crate::cache::Policy;
use crate::error::SimError;
use crate::topology::{NodeId, Topology};
use crate::workload::{Catalog, PopularityPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Lru,
    Fifo,
    Lfu,
    Admin,
    Ica,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Random,
        Strategy::Lru,
        Strategy::Fifo,
        Strategy::Lfu,
        Strategy::Admin,
        Strategy::Ica,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Lru => "lru",
            Strategy::Fifo => "fifo",
            Strategy::Lfu => "lfu",
            Strategy::Admin => "admin",
            Strategy::Ica => "ica",
        }
    }

    /// The fixed policy of a static strategy; None for Admin and ICA.
    pub fn static_policy(self) -> Option<Policy> {
        match self {
            Strategy::Random => Some(Policy::Random),
            Strategy::Lru => Some(Policy::Lru),
            Strategy::Fifo => Some(Policy::Fifo),
            Strategy::Lfu => Some(Policy::Lfu),
            Strategy::Admin | Strategy::Ica => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown strategy {s:?}")))
    }
}

/// Scenario file schema (TOML). Required keys: `topology`, `strategy`,
/// `phases`, `consumers`, `videos`, `chunks_per_video`; cache sizing via
/// `cache_chunks` or `cache_percent` (default 1%). Everything else has
/// defaults. Phases are `[start_s, end_s, alpha]` triples partitioning
/// `[0, horizon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: String,
    pub strategy: Strategy,
    pub phases: Vec<(u64, u64, f64)>,
    pub consumers: usize,
    pub videos: usize,
    pub chunks_per_video: u32,
    #[serde(default = "default_chunk_size_kb")]
    pub chunk_size_kb: u64,
    #[serde(default)]
    pub cache_chunks: Option<usize>,
    #[serde(default)]
    pub cache_percent: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_producer")]
    pub producer_node: String,
    /// 1-based video ranks treated as real-time content.
    #[serde(default)]
    pub realtime_videos: Vec<usize>,
    #[serde(default = "default_bit_rate_kbps")]
    pub bit_rate_kbps: u64,
    #[serde(default = "default_link_delay_ms")]
    pub link_delay_ms: u64,
    #[serde(default = "default_pit_expiry_ms")]
    pub pit_expiry_ms: u64,
    #[serde(default = "default_reasoner_period_s")]
    pub reasoner_period_s: u64,
    #[serde(default = "default_min_interests")]
    pub min_interests: u64,
    /// Seconds of Interest history behind each popularity estimate.
    #[serde(default = "default_estimation_window_s")]
    pub estimation_window_s: u64,
    /// Optional replacement for the built-in decision rules.
    #[serde(default)]
    pub program: Option<String>,
    /// Mid-run rule replacements: `[at_s, program_path]` pairs.
    #[serde(default)]
    pub program_swaps: Vec<(u64, String)>,
}

fn default_chunk_size_kb() -> u64 {
    10
}
fn default_seed() -> u64 {
    1
}
fn default_producer() -> String {
    "n0".into()
}
fn default_bit_rate_kbps() -> u64 {
    1330
}
fn default_link_delay_ms() -> u64 {
    10
}
fn default_pit_expiry_ms() -> u64 {
    4000
}
fn default_reasoner_period_s() -> u64 {
    10
}
fn default_min_interests() -> u64 {
    50
}
fn default_estimation_window_s() -> u64 {
    30
}

/// A validated scenario, ready for the event loop.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub topology: Topology,
    pub producer: NodeId,
    pub catalog: Catalog,
    pub phases: Vec<PopularityPhase>,
    pub cache_capacity: usize,
    pub decision: DecisionConfig,
    pub program_swaps: Vec<(u64, Program)>,
    pub horizon_s: u64,
}

impl ScenarioConfig {
    /// Built-in scenarios. The `*-desk` pair runs the three-phase
    /// popularity switch on the 11-router backbone at a scale where a
    /// multi-seed batch finishes in minutes; the `*-paper` pair uses the
    /// full-scale parameters (1000 consumers, 50 videos of 1000 chunks).
    pub fn builtin(name: &str) -> Option<ScenarioConfig> {
        let (alphas, desk): (&[f64; 3], bool) = match name {
            "lhl-desk" => (&[0.4, 2.5, 0.4], true),
            "hlh-desk" => (&[2.5, 0.4, 2.5], true),
            "lhl-paper" => (&[0.4, 2.5, 0.4], false),
            "hlh-paper" => (&[2.5, 0.4, 2.5], false),
            _ => return None,
        };
        let phase_s = if desk { 200 } else { 600 };
        let phases = alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| (i as u64 * phase_s, (i as u64 + 1) * phase_s, a))
            .collect();
        Some(ScenarioConfig {
            topology: "abilene".into(),
            strategy: Strategy::Ica,
            phases,
            consumers: if desk { 100 } else { 1000 },
            videos: if desk { 20 } else { 50 },
            chunks_per_video: if desk { 100 } else { 1000 },
            chunk_size_kb: 10,
            cache_chunks: None,
            cache_percent: Some(1.0),
            seed: 1,
            producer_node: "n0".into(),
            realtime_videos: Vec::new(),
            bit_rate_kbps: 1330,
            link_delay_ms: 10,
            pit_expiry_ms: 4000,
            reasoner_period_s: 10,
            min_interests: 50,
            // desk traffic is sparse per router, so estimates pool a
            // longer history to see enough distinct contents
            estimation_window_s: if desk { 60 } else { 30 },
            program: None,
            program_swaps: Vec::new(),
        })
    }

    /// Loads a scenario by built-in name or TOML file path.
    pub fn load(name_or_path: &str) -> Result<ScenarioConfig, SimError> {
        if let Some(cfg) = ScenarioConfig::builtin(name_or_path) {
            return Ok(cfg);
        }
        let text = std::fs::read_to_string(name_or_path).map_err(|source| SimError::Io {
            path: name_or_path.to_string(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| SimError::Config(format!("{name_or_path}: {e}")))
    }

    pub fn horizon_s(&self) -> u64 {
        self.phases.last().map(|&(_, end, _)| end).unwrap_or(0)
    }

    /// Validates every field and loads referenced files.
    pub fn resolve(&self) -> Result<Resolved, SimError> {
        let fail = |m: String| Err(SimError::Config(m));
        if self.phases.is_empty() {
            return fail("phases must be nonempty".into());
        }
        let mut cursor = 0;
        for &(start, end, alpha) in &self.phases {
            if start != cursor {
                return fail(format!(
                    "phases must partition the horizon: expected start {cursor}, got {start}"
                ));
            }
            if end <= start {
                return fail(format!("phase [{start},{end}) is empty"));
            }
            if !(alpha >= 0.0) {
                return fail(format!("phase alpha {alpha} must be >= 0"));
            }
            cursor = end;
        }
        if self.videos == 0 || self.videos > 999 {
            return fail("videos must be in 1..=999".into());
        }
        if self.chunks_per_video == 0 {
            return fail("chunks_per_video must be >= 1".into());
        }
        if self.chunk_size_kb == 0 || self.bit_rate_kbps == 0 {
            return fail("chunk_size_kb and bit_rate_kbps must be positive".into());
        }
        if self.reasoner_period_s == 0 {
            return fail("reasoner_period_s must be >= 1".into());
        }
        if self.estimation_window_s == 0 {
            return fail("estimation_window_s must be >= 1".into());
        }
        let realtime: BTreeSet<usize> = self.realtime_videos.iter().copied().collect();
        if let Some(&bad) = realtime.iter().find(|&&r| r < 1 || r > self.videos) {
            return fail(format!("realtime video rank {bad} outside 1..={}", self.videos));
        }

        let topology = match self.topology.as_str() {
            "abilene" => Topology::abilene(),
            path => Topology::load(path)?,
        };
        let producer = topology.node(&self.producer_node).ok_or_else(|| {
            SimError::Config(format!(
                "producer_node {:?} is not in the topology",
                self.producer_node
            ))
        })?;

        let catalog = Catalog {
            videos: self.videos,
            chunks_per_video: self.chunks_per_video,
            chunk_size_bytes: self.chunk_size_kb * 1000,
            bit_rate_bps: self.bit_rate_kbps * 1000,
            realtime_videos: realtime,
        };

        let cache_capacity = match (self.cache_chunks, self.cache_percent) {
            (Some(_), Some(_)) => {
                return fail("give cache_chunks or cache_percent, not both".into())
            }
            (Some(n), None) if n >= 1 => n,
            (Some(n), None) => return fail(format!("cache_chunks {n} must be >= 1")),
            (None, pct) => {
                let pct = pct.unwrap_or(1.0);
                if !(pct > 0.0) {
                    return fail(format!("cache_percent {pct} must be > 0"));
                }
                ((pct / 100.0 * catalog.total_chunks() as f64).ceil() as usize).max(1)
            }
        };

        let program = match &self.program {
            None => default_program(),
            Some(path) => load_program(path)?,
        };
        let mut program_swaps = Vec::new();
        for (at_s, path) in &self.program_swaps {
            if *at_s >= self.horizon_s() {
                return fail(format!("program swap at {at_s}s is past the horizon"));
            }
            program_swaps.push((*at_s, load_program(path)?));
        }

        Ok(Resolved {
            topology,
            producer,
            catalog,
            phases: self
                .phases
                .iter()
                .map(|&(start_s, end_s, alpha)| PopularityPhase { start_s, end_s, alpha })
                .collect(),
            cache_capacity,
            decision: DecisionConfig {
                program,
                reasoner_period_s: self.reasoner_period_s,
                estimation_window_s: self.estimation_window_s,
                min_interests: self.min_interests,
                initial_policy: Policy::Lfu,
            },
            program_swaps,
            horizon_s: self.horizon_s(),
        })
    }

    /// Hash over everything but the seed and strategy, identifying the
    /// scenario shape across a batch.
    pub fn scenario_hash(&self) -> String {
        let mut keyless = self.clone();
        keyless.seed = 0;
        keyless.strategy = Strategy::Random;
        let canonical = toml::to_string(&keyless).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

fn load_program(path: &str) -> Result<Program, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_string(),
        source,
    })?;
    Ok(parse_program(&text)?)
}

/// The policy an all-knowing administrator assigns for a phase: the same
/// exponent bands the decision rules use, without the real-time case.
pub fn admin_policy(alpha: f64) -> Policy {
    if alpha >= 1.8 {
        Policy::Lfu
    } else if alpha >= 1.2 {
        Policy::Lru
    } else {
        Policy::Random
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for name in ["lhl-desk", "hlh-desk", "lhl-paper", "hlh-paper"] {
            let cfg = ScenarioConfig::builtin(name).unwrap();
            let r = cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(r.topology.len(), 11);
            assert_eq!(r.phases.len(), 3);
        }
        assert!(ScenarioConfig::builtin("nope").is_none());
        let desk = ScenarioConfig::builtin("lhl-desk").unwrap().resolve().unwrap();
        assert_eq!(desk.cache_capacity, 20); // 1% of 20 videos x 100 chunks
        assert_eq!(desk.horizon_s, 600);
        let paper = ScenarioConfig::builtin("lhl-paper").unwrap().resolve().unwrap();
        assert_eq!(paper.cache_capacity, 500); // 1% of 50,000 chunks
    }

    #[test]
    fn toml_schema_round_trip() {
        let text = r#"
topology = "abilene"
strategy = "admin"
phases = [[0, 600, 0.4], [600, 1200, 2.5], [1200, 1800, 0.4]]
consumers = 1000
videos = 50
chunks_per_video = 1000
chunk_size_kb = 10
cache_percent = 1.0
seed = 3
producer_node = "n0"
realtime_videos = [2]
"#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.strategy, Strategy::Admin);
        assert_eq!(cfg.horizon_s(), 1800);
        let r = cfg.resolve().unwrap();
        assert!(r.catalog.is_realtime(2));
        assert_eq!(r.catalog.chunk_interval_ms(), 60);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let base = ScenarioConfig::builtin("lhl-desk").unwrap();
        let mut gap = base.clone();
        gap.phases = vec![(0, 100, 0.4), (150, 300, 2.5)];
        assert!(gap.resolve().is_err());

        let mut producer = base.clone();
        producer.producer_node = "n99".into();
        assert!(producer.resolve().is_err());

        let mut both = base.clone();
        both.cache_chunks = Some(10);
        both.cache_percent = Some(1.0);
        assert!(both.resolve().is_err());

        let mut rt = base.clone();
        rt.realtime_videos = vec![21];
        assert!(rt.resolve().is_err());
    }

    #[test]
    fn hash_ignores_seed_but_not_shape() {
        let a = ScenarioConfig::builtin("lhl-desk").unwrap();
        let mut b = a.clone();
        b.seed = 99;
        assert_eq!(a.scenario_hash(), b.scenario_hash());
        let mut c = a.clone();
        c.consumers = 101;
        assert_ne!(a.scenario_hash(), c.scenario_hash());
    }

    #[test]
    fn admin_bands() {
        assert_eq!(admin_policy(2.5), Policy::Lfu);
        assert_eq!(admin_policy(1.5), Policy::Lru);
        assert_eq!(admin_policy(0.4), Policy::Random);
    }
}
