use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::pair::WordPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub word: String,
    pub role: Role,
    pub pc1: f64,
    pub pc2: f64,
    pub pair_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPoint {
    pub pair_id: usize,
    pub source_pc1: f64,
    pub target_pc1: f64,
}

/// First two principal components of a relation's source and target words.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Sources first (pair order), then targets.
    pub rows: Vec<DiagnosticRow>,
    pub pairs: Vec<PairPoint>,
}

impl Diagnostics {
    /// Least-squares slope of `target_pc1` against `source_pc1`; `None` when
    /// the source coordinates do not vary.
    pub fn slope(&self) -> Option<f64> {
        let n = self.pairs.len() as f64;
        let mx = self.pairs.iter().map(|p| p.source_pc1).sum::<f64>() / n;
        let my = self.pairs.iter().map(|p| p.target_pc1).sum::<f64>() / n;
        let sxx: f64 = self.pairs.iter().map(|p| (p.source_pc1 - mx).powi(2)).sum();
        let sxy: f64 = self.pairs.iter().map(|p| (p.source_pc1 - mx) * (p.target_pc1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

pub fn compute_diagnostics(pairs: &[WordPair], emb: &WordEmbedding) -> Result<Diagnostics> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("diagnostics need at least 2 pairs, got {n}")));
    }
    let words: Vec<&str> = pairs
        .iter()
        .map(|p| p.source.as_str())
        .chain(pairs.iter().map(|p| p.target.as_str()))
        .collect();
    let vectors = emb.lookup_all(words.iter().copied())?;
    let m = emb.dim();
    let mut x = DMatrix::from_fn(2 * n, m, |r, c| vectors[r][c]);
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let component = |j: usize| -> Option<Vec<f64>> {
        let row = v_t.row(*order.get(j)?);
        let mut v: Vec<f64> = row.iter().copied().collect();
        let lead = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Some(v)
    };
    let project = |r: usize, v: &Option<Vec<f64>>| -> f64 {
        v.as_ref().map_or(0.0, |v| x.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
    };
    let (c1, c2) = (component(0), component(1));
    let rows: Vec<DiagnosticRow> = (0..2 * n)
        .map(|r| DiagnosticRow {
            word: words[r].to_string(),
            role: if r < n { Role::Source } else { Role::Target },
            pc1: project(r, &c1),
            pc2: project(r, &c2),
            pair_id: r % n,
        })
        .collect();
    let points = (0..n)
        .map(|i| PairPoint {
            pair_id: i,
            source_pc1: rows[i].pc1,
            target_pc1: rows[n + i].pc1,
        })
        .collect();
    Ok(Diagnostics { rows, pairs: points })
}

/// Companion file holding the per-pair points: `<stem>.pairs.csv`.
pub fn pairs_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("diagnostics");
    out.with_file_name(format!("{stem}.pairs.csv"))
}

pub fn write_rows<W: Write>(d: &Diagnostics, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in &d.rows {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_pairs<W: Write>(d: &Diagnostics, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in &d.pairs {
        out.serialize(p).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv output failed: {other:?}")),
    }
}

/// Writes the component rows to `out` and the per-pair points next to it.
pub fn export_diagnostics(pairs: &[WordPair], emb: &WordEmbedding, out: &Path) -> Result<Diagnostics> {
    let d = compute_diagnostics(pairs, emb)?;
    write_rows(&d, File::create(out)?)?;
    write_pairs(&d, File::create(pairs_path(out))?)?;
    Ok(d)
}
