use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pipeline::ScorePanel;
use crate::specfun::ln_t_sf;

/// Two-sided p-values 2·P(T > |t_i|) under the panel's Student-t null.
pub fn two_sided_pvalues(panel: &ScorePanel) -> Vec<f64> {
    let k = panel.k().value();
    panel
        .scores()
        .par_iter()
        .map(|&t| (std::f64::consts::LN_2 + ln_t_sf(t.abs(), k)).exp().min(1.0))
        .collect()
}

/// Benjamini–Hochberg step-up rule at level α. Returns the rejected indices in
/// increasing order: every i with p_i ≤ p_(k*), k* = max{k : p_(k) ≤ αk/n}.
pub fn bh_reject(pvalues: &[f64], alpha: f64) -> Result<Vec<usize>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Input(format!("p-value {p} outside [0, 1]")));
    }
    let n = pvalues.len();
    let mut sorted: Vec<f64> = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = (1..=n)
        .rev()
        .find(|&k| sorted[k - 1] <= alpha * k as f64 / n as f64)
        .map(|k| sorted[k - 1]);
    Ok(match threshold {
        Some(cut) => (0..n).filter(|&i| pvalues[i] <= cut).collect(),
        None => Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(bh_reject(&[0.5; 10], 0.1).unwrap().is_empty());
        assert_eq!(bh_reject(&[0.01, 0.02, 0.9], 0.1).unwrap(), vec![0, 1]);
        assert!(bh_reject(&[0.01], 0.0).is_err());
        assert!(bh_reject(&[0.01], 1.0).is_err());
        assert!(bh_reject(&[], 0.1).unwrap().is_empty());
    }

    #[test]
    fn ties_at_threshold_are_all_rejected() {
        assert_eq!(bh_reject(&[0.04, 0.04, 0.04, 0.9], 0.1).unwrap(), vec![0, 1, 2]);
    }
}
