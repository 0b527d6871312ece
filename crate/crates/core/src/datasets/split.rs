//! Real-valued view of a dataset for real-only baselines.
//!
//! Complex features and regression targets become two columns, real part
//! first. Features that were real to begin with keep a single column, since
//! their imaginary channel carries nothing.

use super::{Dataset, FeatureMeta, Targets};
use crate::error::{CvkanError, Result};
use crate::numerics::{ComplexBatch, ComplexScalar};

#[derive(Debug, Clone, PartialEq)]
pub enum RealTargets {
    /// Row-major `n × cols`.
    Regression { values: Vec<f64>, cols: usize },
    Classification { labels: Vec<usize>, classes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDataset {
    pub id: String,
    pub rows: usize,
    pub columns: Vec<String>,
    /// Row-major `rows × columns.len()`.
    pub features: Vec<f64>,
    pub targets: RealTargets,
}

/// Number of real columns the split view of these features has.
pub fn split_width(meta: &[FeatureMeta]) -> usize {
    meta.iter().map(|m| if m.originally_real { 1 } else { 2 }).sum()
}

fn split_row(row: &[ComplexScalar], meta: &[FeatureMeta], out: &mut Vec<f64>) {
    for (z, m) in row.iter().zip(meta) {
        out.push(z.re);
        if !m.originally_real {
            out.push(z.im);
        }
    }
}

/// Split features as a complex batch with zero imaginary parts, the input
/// format of real-edge models.
pub fn split_features(features: &ComplexBatch, meta: &[FeatureMeta]) -> Result<ComplexBatch> {
    if meta.len() != features.cols() {
        return Err(CvkanError::Shape(format!(
            "{} feature columns but {} metadata entries",
            features.cols(),
            meta.len()
        )));
    }
    let width = split_width(meta);
    let mut reals = Vec::with_capacity(features.rows() * width);
    for s in 0..features.rows() {
        split_row(features.row(s), meta, &mut reals);
    }
    ComplexBatch::new(
        features.rows(),
        width,
        reals.into_iter().map(|v| ComplexScalar::new(v, 0.0)).collect(),
    )
}

pub fn to_split_real(d: &Dataset) -> RealDataset {
    let mut columns = Vec::new();
    for m in &d.feature_meta {
        if m.originally_real {
            columns.push(m.name.clone());
        } else {
            columns.push(format!("{}_re", m.name));
            columns.push(format!("{}_im", m.name));
        }
    }
    let mut features = Vec::with_capacity(d.len() * columns.len());
    for s in 0..d.len() {
        split_row(d.features.row(s), &d.feature_meta, &mut features);
    }
    let targets = match &d.targets {
        Targets::Regression(t) => RealTargets::Regression {
            values: t.data().iter().flat_map(|z| [z.re, z.im]).collect(),
            cols: 2 * t.cols(),
        },
        Targets::Classification { labels, classes } => RealTargets::Classification {
            labels: labels.clone(),
            classes: *classes,
        },
    };
    RealDataset {
        id: d.id.clone(),
        rows: d.len(),
        columns,
        features,
        targets,
    }
}

/// Inverse of [`to_split_real`] given the original feature metadata.
pub fn from_split_real(r: &RealDataset, meta: &[FeatureMeta]) -> Result<Dataset> {
    let width = split_width(meta);
    if width != r.columns.len() || r.features.len() != r.rows * width {
        return Err(CvkanError::Shape(format!(
            "metadata implies {width} real columns, dataset has {}",
            r.columns.len()
        )));
    }
    let mut features = Vec::with_capacity(r.rows * meta.len());
    for row in r.features.chunks(width) {
        let mut it = row.iter();
        for m in meta {
            let re = *it.next().unwrap();
            let im = if m.originally_real { 0.0 } else { *it.next().unwrap() };
            features.push(ComplexScalar::new(re, im));
        }
    }
    let targets = match &r.targets {
        RealTargets::Regression { values, cols } => {
            if cols % 2 != 0 {
                return Err(CvkanError::Shape("odd number of real target columns".into()));
            }
            let data = values.chunks(2).map(|p| ComplexScalar::new(p[0], p[1])).collect();
            Targets::Regression(ComplexBatch::new(r.rows, cols / 2, data)?)
        }
        RealTargets::Classification { labels, classes } => Targets::Classification {
            labels: labels.clone(),
            classes: *classes,
        },
    };
    Dataset::new(
        r.id.clone(),
        ComplexBatch::new(r.rows, meta.len(), features)?,
        targets,
        meta.to_vec(),
    )
}
