//! CSV input and output.
//!
//! Replicate matrices have one row per site. The first row is a header when
//! any of its cells is not a number; a header whose first cell is `site_id`
//! marks the first column as site labels, and the remaining header cells are
//! group labels. One distinct label (or no header) means one-sample data, two
//! distinct labels mean a two-sample design whose first group is the label
//! seen first. Without a header, sites are numbered from 1.
//!
//! Score files hold `site_id,t` with an optional `z` column and an optional
//! header row. A supplied `z` must agree with the transform of `t`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::pipeline::{ingest_one_sample, ingest_two_sample, Ingested, ScorePanel};
use crate::zeta::DegreesOfFreedom;

/// Parsed replicate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub site_ids: Vec<String>,
    /// Group labels from the header, one per data column; empty without a header.
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Matrix {
    /// First-group membership per column, or None for a one-sample design.
    pub fn groups(&self) -> Result<Option<Vec<bool>>> {
        let Some(first) = self.labels.first() else {
            return Ok(None);
        };
        let mut distinct: Vec<&String> = Vec::new();
        for l in &self.labels {
            if !distinct.contains(&l) {
                distinct.push(l);
            }
        }
        match distinct.len() {
            1 => Ok(None),
            2 => Ok(Some(self.labels.iter().map(|l| l == first).collect())),
            n => Err(Error::Input(format!("header has {n} distinct group labels, expected 1 or 2"))),
        }
    }

    /// Scores for the design implied by the header.
    pub fn ingest(&self, drop_degenerate: bool) -> Result<Ingested> {
        match self.groups()? {
            Some(groups) => ingest_two_sample(&self.rows, &self.site_ids, &groups, drop_degenerate),
            None => ingest_one_sample(&self.rows, &self.site_ids, drop_degenerate),
        }
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    if cell.is_empty() {
        return Err(Error::Input(format!("row {row}, column {col}: missing value")));
    }
    cell.parse::<f64>()
        .map_err(|_| Error::Input(format!("row {row}, column {col}: '{cell}' is not a number")))
}

fn is_number(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// Reads a replicate matrix.
pub fn read_matrix<R: Read>(input: R) -> Result<Matrix> {
    let mut records = Vec::new();
    for rec in reader(input).records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    let Some(first) = records.first() else {
        return Err(Error::Input("empty matrix".into()));
    };
    let has_header = first.iter().any(|c| !is_number(c));
    let has_ids = has_header && first.get(0).is_some_and(|c| c.eq_ignore_ascii_case("site_id"));
    let skip = usize::from(has_ids);
    let labels: Vec<String> = if has_header { first.iter().skip(skip).map(String::from).collect() } else { Vec::new() };
    let body = if has_header { &records[1..] } else { &records[..] };
    let mut site_ids = Vec::with_capacity(body.len());
    let mut rows = Vec::with_capacity(body.len());
    for (i, rec) in body.iter().enumerate() {
        let line = i + 1 + usize::from(has_header);
        if has_ids {
            site_ids.push(rec.get(0).unwrap_or_default().to_string());
        } else {
            site_ids.push((i + 1).to_string());
        }
        let row = rec
            .iter()
            .enumerate()
            .skip(skip)
            .map(|(j, c)| parse_cell(c, line, j + 1))
            .collect::<Result<Vec<f64>>>()?;
        if has_header && row.len() != labels.len() {
            return Err(Error::Input(format!(
                "row {line} has {} values, header has {} group labels",
                row.len(),
                labels.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Input("matrix has no data rows".into()));
    }
    Ok(Matrix { site_ids, labels, rows })
}

/// Reads a score file on k degrees of freedom.
pub fn read_scores<R: Read>(input: R, k: DegreesOfFreedom) -> Result<ScorePanel> {
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    let mut supplied_z = Vec::new();
    for (i, rec) in reader(input).records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && !rec.get(1).is_some_and(is_number) {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 {
            return Err(Error::Input(format!("row {line}: expected site_id,t[,z], got {} fields", rec.len())));
        }
        ids.push(rec[0].to_string());
        scores.push(parse_cell(&rec[1], line, 2)?);
        if rec.len() == 3 {
            supplied_z.push((line, parse_cell(&rec[2], line, 3)?));
        }
    }
    if scores.is_empty() {
        return Err(Error::Input("score file has no data rows".into()));
    }
    if !supplied_z.is_empty() && supplied_z.len() != scores.len() {
        return Err(Error::Input("z column present on some rows only".into()));
    }
    let panel = ScorePanel::new(ids, scores, k)?;
    for (i, &(line, z)) in supplied_z.iter().enumerate() {
        let g = panel.z_scores()[i];
        if (z - g).abs() > 1e-9 * (1.0 + g.abs()) {
            return Err(Error::Input(format!(
                "row {line}: z = {z} does not match the transform of t ({g}) on {} df",
                k.value()
            )));
        }
    }
    Ok(panel)
}

/// Writes `site_id,t,z` with shortest round-trip formatting.
pub fn write_scores<W: Write>(panel: &ScorePanel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["site_id", "t", "z"])?;
    for i in 0..panel.len() {
        w.write_record([
            panel.site_ids()[i].clone(),
            format!("{:?}", panel.scores()[i]),
            format!("{:?}", panel.z_scores()[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
