//! Deterministic discrete-event simulator of content-centric routers whose
//! cache replacement policies can be switched at runtime, per router, by an
//! embedded rule-based decision agent reasoning over the locally observed
//! request stream.

pub mod agent;
pub mod cache;
pub mod error;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod topology;
pub mod workload;

pub use cache::{CacheStats, ChunkId, ContentStore, Policy};
pub use error::SimError;
pub use metrics::{MetricsReport, RunRecord};
pub use scenario::{ScenarioConfig, Strategy};
pub use sim::run;
