//! Reaction bound of the decision agent: after the popularity band of the
//! observed traffic steps at time T, the decided policy settles on the new
//! band's policy within estimation_window + reasoner_period seconds.

use std::collections::{BTreeMap, VecDeque};

use ccnsim::agent::{decide, estimate_alpha, DecisionConfig, EventDB};
use ccnsim::workload::ZipfSampler;
use ccnsim::Policy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STEP_S: u64 = 60;
const HORIZON_S: u64 = 140;
const RATE: usize = 10; // interests per second

#[test]
fn policy_settles_within_window_plus_period_after_band_step() {
    let cfg = DecisionConfig::default();
    let deadline = STEP_S + cfg.estimation_window_s + cfg.reasoner_period_s;

    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let high = ZipfSampler::new(2.5, 50);
        let low = ZipfSampler::new(0.4, 50);
        let mut db = EventDB::new(2 * cfg.estimation_window_s);
        let mut log: VecDeque<(u64, usize)> = VecDeque::new();
        let mut settled_high = false;

        for second in 0..=HORIZON_S {
            let sampler = if second < STEP_S { &high } else { &low };
            for _ in 0..RATE {
                log.push_back((second, sampler.sample(&mut rng)));
            }
            while log.front().is_some_and(|&(s, _)| s + cfg.estimation_window_s <= second) {
                log.pop_front();
            }
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for &(_, rank) in &log {
                *counts.entry(format!("c{rank}")).or_default() += 1;
            }
            db.record_tick(second, estimate_alpha(&counts, cfg.min_interests), false)
                .unwrap();

            if second > 0 && second % cfg.reasoner_period_s == 0 {
                let policy = decide(&db, second, &cfg).unwrap().policy;
                // warmed-up steady state before the step: the high band's policy
                if second == STEP_S {
                    assert_eq!(policy, Policy::Lfu, "seed {seed} not high before step");
                    settled_high = true;
                }
                // at most window + period later: the low band's policy, and
                // it stays there
                if second >= deadline {
                    assert_eq!(
                        policy,
                        Policy::Random,
                        "seed {seed} second {second}: not settled on the low band"
                    );
                }
            }
        }
        assert!(settled_high, "seed {seed} never reached the pre-step band");
    }
}
