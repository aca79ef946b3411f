use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::PowerIndex;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::pipeline::{bh_reject, two_sided_pvalues, ScorePanel};
use crate::twogroups::{lfdr_from_ln_zeta, NullKind};
use crate::zeta::{ln_zeta_inf_tol, ln_zeta_k_tol};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteRecord {
    pub site_id: String,
    pub t: f64,
    pub z: f64,
    pub lfdr_t: f64,
    pub lfdr_z: f64,
    /// lfdr_z / lfdr_t.
    pub ratio: f64,
    pub p_value: f64,
    pub bh_rejected: bool,
}

/// Minimum, mean and maximum of an lfdr column over the BH rejection set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LfdrSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl LfdrSummary {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return None;
        }
        Some(LfdrSummary {
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LfdrReport {
    pub df: f64,
    pub alpha: f64,
    pub n_sites: usize,
    pub n_rejected: usize,
    pub fit_t: FitResult,
    pub fit_z: FitResult,
    /// lfdr_t over the BH set; absent when nothing is rejected.
    pub bh_lfdr_t: Option<LfdrSummary>,
    pub bh_lfdr_z: Option<LfdrSummary>,
    pub sites: Vec<SiteRecord>,
}

impl LfdrReport {
    /// The `n` sites with the largest |t|, most extreme first; ties keep input order.
    pub fn top(&self, n: usize) -> Vec<&SiteRecord> {
        let mut order: Vec<&SiteRecord> = self.sites.iter().collect();
        order.sort_by(|a, b| b.t.abs().total_cmp(&a.t.abs()));
        order.truncate(n);
        order
    }
}

fn check_fit(panel: &ScorePanel, fit: &FitResult, expected: NullKind) -> Result<()> {
    if fit.null_kind != expected {
        return Err(Error::Consistency(format!(
            "expected a {}-null fit, got a {}-null fit",
            expected.name(),
            fit.null_kind.name()
        )));
    }
    if fit.n_sites != panel.len() || fit.df != panel.k().value() {
        return Err(Error::Consistency(format!(
            "{}-null fit describes {} sites on {} df, panel has {} sites on {} df",
            expected.name(),
            fit.n_sites,
            fit.df,
            panel.len(),
            panel.k().value()
        )));
    }
    Ok(())
}

/// Per-site lfdr under both nulls at the fitted parameters, BH flags at α, and
/// lfdr summaries over the BH rejection set.
pub fn build_report(
    panel: &ScorePanel,
    fit_t: &FitResult,
    fit_z: &FitResult,
    alpha: f64,
    series_tol: f64,
) -> Result<LfdrReport> {
    check_fit(panel, fit_t, NullKind::T)?;
    check_fit(panel, fit_z, NullKind::Z)?;
    let k = panel.k();
    let pvalues = two_sided_pvalues(panel);
    let rejected = bh_reject(&pvalues, alpha)?;
    let mut flags = vec![false; panel.len()];
    for &i in &rejected {
        flags[i] = true;
    }
    let d_t = PowerIndex::new(fit_t.d_hat)?;
    let d_z = PowerIndex::new(fit_z.d_hat)?;
    let sites: Vec<SiteRecord> = (0..panel.len())
        .into_par_iter()
        .map(|i| {
            let t = panel.scores()[i];
            let z = panel.z_scores()[i];
            let lfdr_t = lfdr_from_ln_zeta(fit_t.rho_hat, ln_zeta_k_tol(t, k, d_t, series_tol));
            let lfdr_z = lfdr_from_ln_zeta(fit_z.rho_hat, ln_zeta_inf_tol(z, d_z, series_tol));
            SiteRecord {
                site_id: panel.site_ids()[i].clone(),
                t,
                z,
                lfdr_t,
                lfdr_z,
                ratio: lfdr_z / lfdr_t,
                p_value: pvalues[i],
                bh_rejected: flags[i],
            }
        })
        .collect();
    let bh_lfdr_t = LfdrSummary::of(rejected.iter().map(|&i| sites[i].lfdr_t));
    let bh_lfdr_z = LfdrSummary::of(rejected.iter().map(|&i| sites[i].lfdr_z));
    Ok(LfdrReport {
        df: k.value(),
        alpha,
        n_sites: panel.len(),
        n_rejected: rejected.len(),
        fit_t: *fit_t,
        fit_z: *fit_z,
        bh_lfdr_t,
        bh_lfdr_z,
        sites,
    })
}
