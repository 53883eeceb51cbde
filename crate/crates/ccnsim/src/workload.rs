//! Request-workload generation: a Zipf popularity model over a video
//! catalog, popularity phases that change the exponent over time, and
//! per-consumer download schedules.

use std::collections::BTreeSet;

use rand::Rng;

use crate::cache::ChunkId;
use crate::error::SimError;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub videos: usize,
    pub chunks_per_video: u32,
    pub chunk_size_bytes: u64,
    pub bit_rate_bps: u64,
    /// Video ranks (1-based) flagged as real-time content.
    pub realtime_videos: BTreeSet<usize>,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog {
            videos: 50,
            chunks_per_video: 1000,
            chunk_size_bytes: 10_000,
            bit_rate_bps: 1_330_000,
            realtime_videos: BTreeSet::new(),
        }
    }
}

impl Catalog {
    /// Name of the video at a 1-based popularity rank. Videos are
    /// numbered v001..vNNN with the most popular content carrying the
    /// highest number, mirroring catalogs where the newest uploads are
    /// the ones trending.
    pub fn video_name(&self, rank: usize) -> String {
        assert!((1..=self.videos).contains(&rank));
        format!("v{:03}", self.videos + 1 - rank)
    }

    /// Milliseconds between consecutive chunk requests of one download.
    pub fn chunk_interval_ms(&self) -> u64 {
        (self.chunk_size_bytes * 8 * 1000 / self.bit_rate_bps).max(1)
    }

    pub fn download_duration_ms(&self) -> u64 {
        self.chunk_interval_ms() * self.chunks_per_video as u64
    }

    pub fn total_chunks(&self) -> u64 {
        self.videos as u64 * self.chunks_per_video as u64
    }

    pub fn is_realtime(&self, rank: usize) -> bool {
        self.realtime_videos.contains(&rank)
    }
}

/// One span of constant popularity exponent. Phases partition the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityPhase {
    pub start_s: u64,
    pub end_s: u64,
    pub alpha: f64,
}

/// P(rank = i) = (1/i^alpha) / sum_j 1/j^alpha, ranks 1..=c.
pub fn zipf_pmf(alpha: f64, c: usize, i: usize) -> Result<f64, SimError> {
    if i < 1 || i > c {
        return Err(SimError::ZipfRank { rank: i, count: c });
    }
    let norm: f64 = (1..=c).map(|j| (j as f64).powf(-alpha)).sum();
    Ok((i as f64).powf(-alpha) / norm)
}

/// Inverse-CDF sampler for the Zipf distribution, with the cumulative
/// table precomputed once.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(alpha: f64, c: usize) -> Self {
        assert!(c >= 1 && alpha >= 0.0);
        let mut cdf = Vec::with_capacity(c);
        let mut acc = 0.0;
        for j in 1..=c {
            acc += (j as f64).powf(-alpha);
            cdf.push(acc);
        }
        let norm = acc;
        for p in &mut cdf {
            *p /= norm;
        }
        ZipfSampler { cdf }
    }

    /// Returns a 1-based rank.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&p| p < u) + 1
    }
}

/// One consumer fetching one video, chunk by chunk at the catalog's
/// constant rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Download {
    pub consumer: usize,
    pub access_router: NodeId,
    pub video_rank: usize,
    pub start_ms: u64,
}

/// One chunk request as it enters the consumer's access router.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub at_ms: u64,
    pub consumer: usize,
    pub access_router: NodeId,
    pub chunk: ChunkId,
    pub realtime: bool,
}

/// Attaches each consumer to a uniformly random router.
pub fn place_consumers(consumers: usize, routers: usize, rng: &mut impl Rng) -> Vec<NodeId> {
    (0..consumers).map(|_| rng.gen_range(0..routers)).collect()
}

/// Per consumer and phase: one video sampled at the phase's exponent, one
/// start time uniform over the phase. Downloads run to completion across
/// phase boundaries; only the overall horizon truncates them.
pub fn schedule(
    phases: &[PopularityPhase],
    catalog: &Catalog,
    placement: &[NodeId],
    rng: &mut impl Rng,
) -> Vec<Download> {
    let mut downloads = Vec::with_capacity(phases.len() * placement.len());
    for phase in phases {
        let sampler = ZipfSampler::new(phase.alpha, catalog.videos);
        for (consumer, &access_router) in placement.iter().enumerate() {
            let video_rank = sampler.sample(rng);
            let start_ms = rng.gen_range(phase.start_s * 1000..phase.end_s * 1000);
            downloads.push(Download {
                consumer,
                access_router,
                video_rank,
                start_ms,
            });
        }
    }
    downloads.sort_by_key(|d| (d.start_ms, d.consumer));
    downloads
}

/// Expands downloads into chunk requests, ascending indices at the
/// catalog rate, dropping requests past the horizon.
pub fn requests(downloads: &[Download], catalog: &Catalog, horizon_ms: u64) -> Vec<Request> {
    let step = catalog.chunk_interval_ms();
    let mut out = Vec::new();
    for d in downloads {
        let name = catalog.video_name(d.video_rank);
        let realtime = catalog.is_realtime(d.video_rank);
        for index in 0..catalog.chunks_per_video {
            let at_ms = d.start_ms + index as u64 * step;
            if at_ms >= horizon_ms {
                break;
            }
            out.push(Request {
                at_ms,
                consumer: d.consumer,
                access_router: d.access_router,
                chunk: ChunkId::new(name.clone(), index),
                realtime,
            });
        }
    }
    out.sort_by_key(|r| (r.at_ms, r.consumer, r.chunk.index));
    out
}
