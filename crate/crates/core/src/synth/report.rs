use std::collections::BTreeMap;

use serde::Serialize;

use crate::format::{csv_row, round_json, sig};

/// Version string embedded in every report.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Result of one `(seed, n)` trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub seed: u64,
    /// The experiment's primary total variation.
    pub tv: f64,
    /// Further per-trial measurements, by name.
    pub metrics: BTreeMap<String, f64>,
    /// Codebook index counts, named by the report's `count_names`.
    pub index_counts: Vec<u64>,
}

/// Seed statistics of the primary TV at one block length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSummary {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    /// Standard error of the mean; zero for a single trial.
    pub stderr: f64,
    pub median: f64,
    pub best: f64,
    pub best_seed: u64,
    pub median_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    /// Rates used, `[R0, R1, ..]` or the experiment's own layout.
    pub rates: Vec<f64>,
    /// The rate floors the rates should exceed, in the same layout.
    pub rate_floors: Vec<f64>,
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<BlockSummary>,
    pub notes: Vec<String>,
    pub config: serde_json::Value,
    /// Elapsed seconds; left out of files unless requested.
    pub wall_clock_seconds: Option<f64>,
    pub count_names: Vec<String>,
}

impl ExperimentReport {
    pub fn new(
        experiment: &str,
        rates: Vec<f64>,
        rate_floors: Vec<f64>,
        count_names: Vec<String>,
        records: Vec<TrialRecord>,
    ) -> Self {
        let mut n_list: Vec<usize> = records.iter().map(|r| r.n).collect();
        n_list.dedup();
        n_list.sort_unstable();
        n_list.dedup();
        let mut seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let summary = n_list.iter().map(|&n| summarize(n, &records)).collect();
        Self {
            experiment: experiment.into(),
            version: VERSION.into(),
            rates,
            rate_floors,
            n_list,
            seeds,
            records,
            summary,
            notes: Vec::new(),
            config: serde_json::Value::Null,
            wall_clock_seconds: None,
            count_names,
        }
    }

    pub fn summary_for(&self, n: usize) -> Option<&BlockSummary> {
        self.summary.iter().find(|s| s.n == n)
    }

    /// Seed means in `n_list` order.
    pub fn means(&self) -> Vec<f64> {
        self.summary.iter().map(|s| s.mean).collect()
    }

    /// Full report as pretty JSON. Every real outside the config echo is
    /// rounded to 12 significant digits; the echo is kept verbatim.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        let config = v.get_mut("config").map(serde_json::Value::take);
        round_json(&mut v);
        if let Some(c) = config {
            v["config"] = c;
        }
        let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One row per `(seed, n)`.
    pub fn to_csv(&self) -> String {
        let metrics: Vec<&String> = self
            .records
            .first()
            .map(|r| r.metrics.keys().collect())
            .unwrap_or_default();
        let mut header = vec!["experiment".to_string(), "n".into(), "seed".into(), "tv".into()];
        header.extend(metrics.iter().map(|m| m.to_string()));
        header.extend(self.count_names.iter().cloned());
        let mut out = csv_row(&header);
        for r in &self.records {
            let mut row = vec![self.experiment.clone(), r.n.to_string(), r.seed.to_string(), sig(r.tv)];
            row.extend(metrics.iter().map(|m| r.metrics.get(*m).map(|v| sig(*v)).unwrap_or_default()));
            row.extend(
                (0..self.count_names.len()).map(|i| r.index_counts.get(i).map(u64::to_string).unwrap_or_default()),
            );
            out.push_str(&csv_row(&row));
        }
        out
    }
}

fn summarize(n: usize, records: &[TrialRecord]) -> BlockSummary {
    let mut rows: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
    let k = rows.len() as f64;
    let mean = rows.iter().map(|r| r.tv).sum::<f64>() / k;
    let var = if rows.len() > 1 {
        rows.iter().map(|r| (r.tv - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    rows.sort_by(|a, b| a.tv.total_cmp(&b.tv).then(a.seed.cmp(&b.seed)));
    let mid = rows[(rows.len() - 1) / 2];
    let median = if rows.len() % 2 == 1 {
        mid.tv
    } else {
        0.5 * (rows[rows.len() / 2 - 1].tv + rows[rows.len() / 2].tv)
    };
    BlockSummary {
        n,
        trials: rows.len(),
        mean,
        stderr: (var / k).sqrt(),
        median,
        best: rows[0].tv,
        best_seed: rows[0].seed,
        median_seed: mid.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, seed: u64, tv: f64) -> TrialRecord {
        TrialRecord {
            n,
            seed,
            tv,
            metrics: BTreeMap::new(),
            index_counts: vec![1, 2],
        }
    }

    #[test]
    fn summary_statistics() {
        let r = ExperimentReport::new("t", vec![], vec![], vec![], vec![rec(1, 0, 0.2), rec(1, 1, 0.4), rec(1, 2, 0.3)]);
        let s = r.summary_for(1).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-12);
        assert!((s.median - 0.3).abs() < 1e-12);
        assert_eq!(s.best_seed, 0);
        assert_eq!(s.median_seed, 2);
        assert!((s.stderr - 0.1 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = ExperimentReport::new("t", vec![], vec![], vec!["N_K".into(), "N_1".into()], vec![rec(2, 5, 0.5)]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines[0], "experiment,n,seed,tv,N_K,N_1");
        assert_eq!(lines[1], "t,2,5,0.500000000000,1,2");
    }
}
