//! Run metrics: per-second series, run totals, and their CSV form.

use std::fmt::Write as _;

use crate::cache::Policy;

/// One second of the run. `policies` holds the policy each router used
/// during this second, indexed like the topology's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondRow {
    pub second: u64,
    pub requests: u64,
    pub hits: u64,
    pub active_downloads: u64,
    pub policies: Vec<Policy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyChange {
    pub at_ms: u64,
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub seed: u64,
    pub horizon_s: u64,
    pub router_names: Vec<String>,
    pub rows: Vec<SecondRow>,
    pub policy_logs: Vec<Vec<PolicyChange>>,
    pub total_requests: u64,
    pub total_hits: u64,
    pub satisfied: u64,
    pub expired: u64,
    pub stray_data: u64,
    /// Router-hop distances summed over consumer deliveries.
    pub distance_sum: u64,
    pub deliveries: u64,
    /// Solver failures from a broken custom decision program.
    pub decision_failures: u64,
}

impl MetricsReport {
    /// Hits per request; 0 when there were no requests.
    pub fn hit_ratio(&self) -> f64 {
        ratio(self.total_hits, self.total_requests)
    }

    /// Hits per request over seconds [start_s, end_s).
    pub fn hit_ratio_interval(&self, start_s: u64, end_s: u64) -> f64 {
        let (mut hits, mut requests) = (0, 0);
        for row in &self.rows {
            if (start_s..end_s).contains(&row.second) {
                hits += row.hits;
                requests += row.requests;
            }
        }
        ratio(hits, requests)
    }

    /// Mean router hops from the answering node to the consumer's access
    /// router; absent when nothing was delivered.
    pub fn mean_hit_distance(&self) -> Option<f64> {
        (self.deliveries > 0).then(|| self.distance_sum as f64 / self.deliveries as f64)
    }

    /// Per-second CSV: one row per simulated second plus a policy column
    /// per router.
    pub fn run_csv(&self) -> String {
        let mut out = String::from("second,requests,hits,active_downloads");
        for name in &self.router_names {
            let _ = write!(out, ",policy_{name}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{}",
                row.second, row.requests, row.hits, row.active_downloads
            );
            for p in &row.policies {
                let _ = write!(out, ",{p}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_csv_header() -> &'static str {
        "scenario,strategy,seed,requests,hits,hit_ratio,hit_distance,satisfied,expired,stray_data\n"
    }

    pub fn summary_csv_row(&self, scenario_hash: &str, strategy: &str) -> String {
        let distance = self
            .mean_hit_distance()
            .map(|d| format!("{d:.6}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.6},{},{},{},{}\n",
            scenario_hash,
            strategy,
            self.seed,
            self.total_requests,
            self.total_hits,
            self.hit_ratio(),
            distance,
            self.satisfied,
            self.expired,
            self.stray_data,
        )
    }
}

/// One run in a batch: the report plus the identifiers that place it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario_hash: String,
    pub strategy: String,
    pub report: MetricsReport,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> MetricsReport {
        MetricsReport {
            seed: 7,
            horizon_s: 2,
            router_names: vec!["a".into(), "b".into()],
            rows: vec![
                SecondRow {
                    second: 0,
                    requests: 100,
                    hits: 0,
                    active_downloads: 3,
                    policies: vec![Policy::Lfu, Policy::Random],
                },
                SecondRow {
                    second: 1,
                    requests: 100,
                    hits: 50,
                    active_downloads: 2,
                    policies: vec![Policy::Lru, Policy::Random],
                },
            ],
            policy_logs: vec![Vec::new(), Vec::new()],
            total_requests: 200,
            total_hits: 50,
            satisfied: 198,
            expired: 2,
            stray_data: 0,
            distance_sum: 8,
            deliveries: 4,
            decision_failures: 0,
        }
    }

    #[test]
    fn ratios_and_distance() {
        let r = report();
        assert_eq!(r.hit_ratio(), 0.25);
        assert_eq!(r.hit_ratio_interval(0, 1), 0.0);
        assert_eq!(r.hit_ratio_interval(1, 2), 0.5);
        assert_eq!(r.mean_hit_distance(), Some(2.0));

        let empty = MetricsReport {
            total_requests: 0,
            total_hits: 0,
            deliveries: 0,
            distance_sum: 0,
            ..r
        };
        assert_eq!(empty.hit_ratio(), 0.0);
        assert_eq!(empty.mean_hit_distance(), None);
    }

    #[test]
    fn csv_shapes() {
        let r = report();
        let csv = r.run_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "second,requests,hits,active_downloads,policy_a,policy_b"
        );
        assert_eq!(lines.next().unwrap(), "0,100,0,3,lfu,random");
        assert_eq!(lines.next().unwrap(), "1,100,50,2,lru,random");
        assert_eq!(lines.next(), None);

        let row = r.summary_csv_row("abc123", "ica");
        assert_eq!(row, "abc123,ica,7,200,50,0.250000,2.000000,198,2,0\n");
    }
}
