//! Risk bins fixed from the first cycle's cross-section.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BinError {
    #[error("need at least {needed} risk values, got {got}")]
    TooFewRisks { needed: usize, got: usize },
    #[error("all first-cycle risks are equal")]
    DegenerateRisks,
    #[error("non-finite risk value {0}")]
    NonFinite(f64),
}

/// Bin `0` is `(-inf, edges[1]]`; bin `i > 0` is `(edges[i], edges[i+1]]`.
/// The last `extra_high_bins` bins lie above the first cycle's maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub edges: Vec<f64>,
    pub extra_high_bins: usize,
}

impl BinSpec {
    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn interior_bins(&self) -> usize {
        self.bin_count() - self.extra_high_bins
    }

    /// Bin midpoints, used as the bins' risk values.
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bin holding `risk`, or `None` above the top edge.
    pub fn assign(&self, risk: f64) -> Option<usize> {
        if !(risk <= *self.edges.last().expect("edges")) {
            return None;
        }
        // First edge at or above `risk`, counted from edges[1].
        let above = self.edges[1..].partition_point(|&e| e < risk);
        Some(above)
    }
}

/// Quantile edges giving about `target_per_bin` first-cycle members per
/// bin, plus `extra_high_bins` bins of equal width above the maximum.
pub fn build_bins(first_cycle_risks: &[f64], target_per_bin: usize, extra_high_bins: usize) -> Result<BinSpec, BinError> {
    let needed = 3 * target_per_bin;
    if first_cycle_risks.len() < needed {
        return Err(BinError::TooFewRisks {
            needed,
            got: first_cycle_risks.len(),
        });
    }
    if let Some(&bad) = first_cycle_risks.iter().find(|r| !r.is_finite()) {
        return Err(BinError::NonFinite(bad));
    }
    let mut sorted = first_cycle_risks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    if min == max {
        return Err(BinError::DegenerateRisks);
    }
    let k = n / target_per_bin;
    let mut edges = vec![min];
    for i in 1..k {
        let j = ((i * n) as f64 / k as f64).round() as usize;
        let edge = 0.5 * (sorted[j - 1] + sorted[j]);
        // Ties can repeat an edge; merged bins keep edges strictly ascending.
        if edge > *edges.last().unwrap() && edge < max {
            edges.push(edge);
        }
    }
    edges.push(max);
    let width = (max - min) / (edges.len() - 1) as f64;
    for i in 1..=extra_high_bins {
        edges.push(max + i as f64 * width);
    }
    Ok(BinSpec { edges, extra_high_bins })
}
