//! Statistical checks of the workload model: the Zipf sampler against its
//! own distribution, and the popularity estimator against the exponents
//! that generated the traffic.

use std::collections::BTreeMap;

use ccnsim::agent::estimate_alpha;
use ccnsim::workload::{zipf_pmf, ZipfSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const CONTENTS: usize = 50;

/// Pearson chi-square goodness-of-fit with 10^5 draws, at the 99%
/// confidence level. Low-expectation tail ranks are pooled into one bin so
/// the chi-square approximation stays valid.
fn chi_square_fits(alpha: f64, seed: u64) {
    let draws = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = ZipfSampler::new(alpha, CONTENTS);
    let mut observed = vec![0u64; CONTENTS];
    for _ in 0..draws {
        observed[sampler.sample(&mut rng) - 1] += 1;
    }

    let expected: Vec<f64> = (1..=CONTENTS)
        .map(|i| zipf_pmf(alpha, CONTENTS, i).unwrap() * draws as f64)
        .collect();
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut tail_obs, mut tail_exp) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        if *e >= 5.0 {
            stat += (*o as f64 - e).powi(2) / e;
            bins += 1;
        } else {
            tail_obs += *o as f64;
            tail_exp += e;
        }
    }
    if tail_exp > 0.0 {
        stat += (tail_obs - tail_exp).powi(2) / tail_exp;
        bins += 1;
    }
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(
        stat < critical,
        "alpha={alpha}: chi-square {stat:.2} over {bins} bins exceeds {critical:.2}"
    );
}

#[test]
fn sampler_passes_chi_square_uniform() {
    chi_square_fits(0.0, 11);
}

#[test]
fn sampler_passes_chi_square_skewed() {
    chi_square_fits(2.5, 12);
}

/// The estimator recovers the generating exponent within 0.15 in at least
/// 95 of 100 seeded trials, for flat, medium, and heavy skew.
#[test]
fn estimator_recovers_generating_exponent() {
    for (alpha, base_seed) in [(0.4, 1000u64), (1.5, 2000), (2.5, 3000)] {
        let sampler = ZipfSampler::new(alpha, CONTENTS);
        let mut good = 0;
        for trial in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed + trial);
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for _ in 0..10_000 {
                *counts
                    .entry(format!("c{}", sampler.sample(&mut rng)))
                    .or_default() += 1;
            }
            let a10 = estimate_alpha(&counts, 50).expect("ample traffic");
            if (a10 as f64 / 10.0 - alpha).abs() <= 0.15 {
                good += 1;
            }
        }
        assert!(good >= 95, "alpha={alpha}: only {good}/100 within 0.15");
    }
}

/// Too little traffic, or traffic concentrated on a single content, gives
/// no estimate rather than a wild one.
#[test]
fn estimator_withholds_on_thin_data() {
    let mut counts = BTreeMap::new();
    counts.insert("a".to_string(), 30u64);
    counts.insert("b".to_string(), 10);
    assert_eq!(estimate_alpha(&counts, 50), None);

    let mut single = BTreeMap::new();
    single.insert("a".to_string(), 500u64);
    assert_eq!(estimate_alpha(&single, 50), None);
}
