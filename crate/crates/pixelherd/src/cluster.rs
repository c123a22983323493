//! Intensity-gap clustering of the final colour field.
//!
//! The quantized image is summarised by sorting all intensities and
//! starting a new cluster wherever two consecutive values are more than
//! `gap` apart. Clustering happens in colour space, not image space:
//! spatially disconnected regions of the same grey level count as one
//! cluster.

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub mean: f64,
    pub count: usize,
}

/// Clusters in ascending order of mean intensity; counts sum to the
/// pixel total.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    clusters: Vec<Cluster>,
}

impl ClusterReport {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }
}

pub fn cluster_count(c: &ScalarField, gap: f64) -> Result<ClusterReport> {
    if !gap.is_finite() || gap <= 0.0 {
        return Err(Error::InvalidParam {
            name: "gap",
            requirement: "finite and positive",
            value: gap,
        });
    }
    let mut sorted: Vec<f64> = c.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("intensities are finite"));

    let mut clusters = Vec::new();
    let mut start = 0usize;
    for idx in 1..=sorted.len() {
        let boundary = idx == sorted.len() || sorted[idx] - sorted[idx - 1] > gap;
        if boundary {
            let members = &sorted[start..idx];
            clusters.push(Cluster {
                mean: members.iter().sum::<f64>() / members.len() as f64,
                count: members.len(),
            });
            start = idx;
        }
    }
    Ok(ClusterReport { clusters })
}
