use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zeta::{pit_transform, DegreesOfFreedom};

/// Per-site t-scores sharing one degrees-of-freedom value, with the z-scores
/// obtained from them by the probability integral transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScorePanel {
    site_ids: Vec<String>,
    scores: Vec<f64>,
    z_scores: Vec<f64>,
    k: DegreesOfFreedom,
}

impl ScorePanel {
    /// Builds a panel, rejecting non-finite scores and mismatched lengths.
    pub fn new(site_ids: Vec<String>, scores: Vec<f64>, k: DegreesOfFreedom) -> Result<Self> {
        if site_ids.len() != scores.len() {
            return Err(Error::Input(format!(
                "{} site ids for {} scores",
                site_ids.len(),
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|t| !t.is_finite()) {
            return Err(Error::Input(format!("score for site {} is not finite: {}", site_ids[i], scores[i])));
        }
        let z_scores = scores.par_iter().map(|&t| pit_transform(t, k)).collect();
        Ok(ScorePanel { site_ids, scores, z_scores, k })
    }

    /// Panel with site ids 1..n.
    pub fn from_scores(scores: Vec<f64>, k: DegreesOfFreedom) -> Result<Self> {
        let ids = (1..=scores.len()).map(|i| i.to_string()).collect();
        ScorePanel::new(ids, scores, k)
    }

    pub fn site_ids(&self) -> &[String] {
        &self.site_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// g(t_i) = Φ⁻¹(F_0(t_i; k)) for every site.
    pub fn z_scores(&self) -> &[f64] {
        &self.z_scores
    }

    pub fn k(&self) -> DegreesOfFreedom {
        self.k
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Keeps the sites for which `keep` returns true.
    pub fn filter<F: Fn(usize) -> bool>(&self, keep: F) -> ScorePanel {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        ScorePanel {
            site_ids: idx.iter().map(|&i| self.site_ids[i].clone()).collect(),
            scores: idx.iter().map(|&i| self.scores[i]).collect(),
            z_scores: idx.iter().map(|&i| self.z_scores[i]).collect(),
            k: self.k,
        }
    }
}
