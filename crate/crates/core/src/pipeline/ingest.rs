use crate::error::{Error, Result};
use crate::pipeline::ScorePanel;
use crate::zeta::DegreesOfFreedom;

/// A panel built from replicate data, with any sites dropped for zero variance.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub panel: ScorePanel,
    pub dropped: Vec<String>,
}

fn mean_and_ss(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss)
}

fn check_rows(rows: &[Vec<f64>], site_ids: &[String], width: usize) -> Result<()> {
    if rows.len() != site_ids.len() {
        return Err(Error::Input(format!("{} site ids for {} rows", site_ids.len(), rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Input(format!(
                "row {} (site {}) has {} values, expected {width}",
                i + 1,
                site_ids[i],
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "row {} (site {}), column {}: value {} is not finite",
                i + 1,
                site_ids[i],
                j + 1,
                row[j]
            )));
        }
    }
    Ok(())
}

fn finish(
    site_ids: &[String],
    scores: Vec<Option<f64>>,
    k: f64,
    drop_degenerate: bool,
) -> Result<Ingested> {
    let dropped: Vec<String> = scores
        .iter()
        .zip(site_ids)
        .filter(|(t, _)| t.is_none())
        .map(|(_, id)| id.clone())
        .collect();
    if !dropped.is_empty() && !drop_degenerate {
        return Err(Error::DegenerateSites(dropped));
    }
    let mut ids = Vec::with_capacity(scores.len());
    let mut kept = Vec::with_capacity(scores.len());
    for (t, id) in scores.into_iter().zip(site_ids) {
        if let Some(t) = t {
            ids.push(id.clone());
            kept.push(t);
        }
    }
    let panel = ScorePanel::new(ids, kept, DegreesOfFreedom::new(k)?)?;
    Ok(Ingested { panel, dropped })
}

/// Two-sample pooled-variance t-scores. `groups[j]` is true when column j
/// belongs to the first group. k = m₁ + m₂ − 2.
pub fn ingest_two_sample(
    rows: &[Vec<f64>],
    site_ids: &[String],
    groups: &[bool],
    drop_degenerate: bool,
) -> Result<Ingested> {
    let m1 = groups.iter().filter(|&&g| g).count();
    let m2 = groups.len() - m1;
    if m1 < 2 || m2 < 2 {
        return Err(Error::Input(format!("each group needs at least 2 samples, got {m1} and {m2}")));
    }
    check_rows(rows, site_ids, groups.len())?;
    let k = (m1 + m2 - 2) as f64;
    let scale = (1.0 / m1 as f64 + 1.0 / m2 as f64).sqrt();
    let mut a = Vec::with_capacity(m1);
    let mut b = Vec::with_capacity(m2);
    let scores = rows
        .iter()
        .map(|row| {
            a.clear();
            b.clear();
            for (&v, &g) in row.iter().zip(groups) {
                if g {
                    a.push(v);
                } else {
                    b.push(v);
                }
            }
            let (ma, ssa) = mean_and_ss(&a);
            let (mb, ssb) = mean_and_ss(&b);
            let pooled = (ssa + ssb) / k;
            (pooled > 0.0).then(|| (ma - mb) / (pooled.sqrt() * scale))
        })
        .collect();
    finish(site_ids, scores, k, drop_degenerate)
}

/// One-sample t-scores √m·ȳ/s with k = m − 1.
pub fn ingest_one_sample(rows: &[Vec<f64>], site_ids: &[String], drop_degenerate: bool) -> Result<Ingested> {
    let m = rows.first().map_or(0, Vec::len);
    if m < 2 {
        return Err(Error::Input(format!("one-sample scores need at least 2 replicates, got {m}")));
    }
    check_rows(rows, site_ids, m)?;
    let k = (m - 1) as f64;
    let scores = rows
        .iter()
        .map(|row| {
            let (mean, ss) = mean_and_ss(row);
            let var = ss / k;
            (var > 0.0).then(|| (m as f64).sqrt() * mean / var.sqrt())
        })
        .collect();
    finish(site_ids, scores, k, drop_degenerate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn two_sample_hand_value() {
        let rows = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]];
        let groups = [true, true, true, false, false, false];
        let out = ingest_two_sample(&rows, &ids(1), &groups, false).unwrap();
        assert_eq!(out.panel.k().value(), 4.0);
        let expected = -3.0 / (2.0f64 / 3.0).sqrt();
        assert!((out.panel.scores()[0] - expected).abs() < 1e-14);
        assert!((expected + 3.674).abs() < 1e-3);
    }

    #[test]
    fn four_by_four_has_six_df() {
        let rows = vec![vec![0.1, 0.5, 0.2, 0.9, 1.0, 1.3, 0.7, 1.1]];
        let groups = [true, true, true, true, false, false, false, false];
        assert_eq!(ingest_two_sample(&rows, &ids(1), &groups, false).unwrap().panel.k().value(), 6.0);
    }

    #[test]
    fn degenerate_sites_are_reported_or_dropped() {
        let rows = vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0, 5.0], vec![2.0, 2.0, 2.0, 2.0]];
        let groups = [true, true, false, false];
        match ingest_two_sample(&rows, &ids(3), &groups, false) {
            Err(Error::DegenerateSites(s)) => assert_eq!(s, vec!["g1", "g3"]),
            other => panic!("expected degenerate sites, got {other:?}"),
        }
        let out = ingest_two_sample(&rows, &ids(3), &groups, true).unwrap();
        assert_eq!(out.panel.len(), 1);
        assert_eq!(out.dropped, vec!["g1", "g3"]);
    }

    #[test]
    fn one_sample_examples() {
        let out = ingest_one_sample(&[vec![1.0, 2.0, 3.0, 4.0]], &ids(1), false).unwrap();
        assert_eq!(out.panel.k().value(), 3.0);
        assert!((out.panel.scores()[0] - 2.0 * 2.5 / (5.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let out = ingest_one_sample(&[vec![-1.0, 1.0]], &ids(1), false).unwrap();
        assert_eq!(out.panel.scores()[0], 0.0);
        assert_eq!(out.panel.k().value(), 1.0);
        assert!(matches!(
            ingest_one_sample(&[vec![1.0, 1.0, 1.0]], &ids(1), false),
            Err(Error::DegenerateSites(_))
        ));
    }

    #[test]
    fn malformed_input() {
        assert!(ingest_two_sample(&[vec![1.0, 2.0, 3.0]], &ids(1), &[true, false, false], false).is_err());
        assert!(ingest_one_sample(&[vec![1.0, 2.0], vec![1.0]], &ids(2), false).is_err());
        assert!(ingest_one_sample(&[vec![1.0, f64::NAN]], &ids(1), false).is_err());
        assert!(ingest_one_sample(&[vec![1.0]], &ids(1), false).is_err());
    }
}
