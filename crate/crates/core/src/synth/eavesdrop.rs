//! A G-test of independence between messages and synthesized sequences.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

use super::system::CascadeSample;

/// Outcome of [`eavesdropper_independence_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceTest {
    pub samples: usize,
    /// Nonempty message values and sequence tuples in the table.
    pub rows: usize,
    pub cols: usize,
    /// `G = 2 Σ O ln(O / E)`.
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub significance: f64,
    pub reject: bool,
    /// Set when the table has fewer than two rows or columns; the decision
    /// is then "do not reject" and carries no evidence.
    pub inconclusive: bool,
}

/// G-test of independence between the first message and the tuple of all
/// sequences, on plug-in counts from operational draws.
pub fn eavesdropper_independence_test(samples: &[CascadeSample], significance: f64) -> Result<IndependenceTest> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::Argument(format!("significance {significance} is not in (0, 1)")));
    }
    let mut table: BTreeMap<(u64, &[u64]), f64> = BTreeMap::new();
    let mut row_sum: BTreeMap<u64, f64> = BTreeMap::new();
    let mut col_sum: BTreeMap<&[u64], f64> = BTreeMap::new();
    for s in samples {
        *table.entry((s.message, s.sequences.as_slice())).or_insert(0.0) += 1.0;
        *row_sum.entry(s.message).or_insert(0.0) += 1.0;
        *col_sum.entry(s.sequences.as_slice()).or_insert(0.0) += 1.0;
    }
    let (r, c) = (row_sum.len(), col_sum.len());
    let total = samples.len() as f64;
    if samples.len() < 2 || r < 2 || c < 2 {
        return Ok(IndependenceTest {
            samples: samples.len(),
            rows: r,
            cols: c,
            statistic: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
            significance,
            reject: false,
            inconclusive: true,
        });
    }
    let statistic = 2.0
        * table
            .iter()
            .map(|((m, s), &o)| {
                let e = row_sum[m] * col_sum[s] / total;
                o * (o / e).ln()
            })
            .sum::<f64>();
    let statistic = statistic.max(0.0);
    let df = (r - 1) * (c - 1);
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Argument(e.to_string()))?;
    let p_value = chi.sf(statistic);
    Ok(IndependenceTest {
        samples: samples.len(),
        rows: r,
        cols: c,
        statistic,
        degrees_of_freedom: df,
        p_value,
        significance,
        reject: p_value < significance,
        inconclusive: false,
    })
}
