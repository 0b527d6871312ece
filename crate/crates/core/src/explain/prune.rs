use serde::{Deserialize, Serialize};

use super::relevance::RelevanceReport;
use crate::datasets::{Dataset, FeatureMeta};
use crate::error::{CvkanError, Result};

pub const PRUNING_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneMode {
    KeepTopK,
    DropTopK,
}

/// Relevance of each dataset feature. With split-real inputs a feature owns
/// one or two input vertices and its score is their sum.
pub fn feature_scores(report: &RelevanceReport, meta: &[FeatureMeta], split: bool) -> Result<Vec<f64>> {
    let inputs = report.input_scores();
    if !split {
        if inputs.len() != meta.len() {
            return Err(CvkanError::Shape(format!("{} input scores for {} features", inputs.len(), meta.len())));
        }
        return Ok(inputs.to_vec());
    }
    let mut scores = Vec::with_capacity(meta.len());
    let mut at = 0;
    for m in meta {
        let n = if m.originally_real { 1 } else { 2 };
        let slice = inputs
            .get(at..at + n)
            .ok_or_else(|| CvkanError::Shape("fewer input scores than split columns".into()))?;
        scores.push(slice.iter().sum());
        at += n;
    }
    Ok(scores)
}

/// Feature indices by descending score; ties go to the lower index.
pub fn rank_features(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

fn chosen_columns(scores: &[f64], mode: PruneMode, k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(CvkanError::Config(format!("k = {k} exceeds {} features", scores.len())));
    }
    let ranked = rank_features(scores);
    let mut cols = match mode {
        PruneMode::KeepTopK => ranked[..k].to_vec(),
        PruneMode::DropTopK => ranked[k..].to_vec(),
    };
    cols.sort_unstable();
    Ok(cols)
}

/// Restricts the dataset to, or removes, the `k` highest-scoring features.
/// Surviving columns keep their original order.
pub fn prune_features(d: &Dataset, scores: &[f64], mode: PruneMode, k: usize) -> Result<Dataset> {
    if scores.len() != d.n_features() {
        return Err(CvkanError::Shape(format!("{} scores for {} features", scores.len(), d.n_features())));
    }
    d.select_features(&chosen_columns(scores, mode, k)?)
}

/// Feature selection exchanged with the viewer: the names of the features to
/// keep, decided from a relevance ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruningFragment {
    pub version: u32,
    pub mode: PruneMode,
    pub k: usize,
    /// Features that remain after pruning, in dataset order.
    pub keep: Vec<String>,
}

impl PruningFragment {
    pub fn from_scores(names: &[String], scores: &[f64], mode: PruneMode, k: usize) -> Result<Self> {
        if names.len() != scores.len() {
            return Err(CvkanError::Shape(format!("{} names for {} scores", names.len(), scores.len())));
        }
        Ok(Self {
            version: PRUNING_FORMAT_VERSION,
            mode,
            k,
            keep: chosen_columns(scores, mode, k)?.into_iter().map(|c| names[c].clone()).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != PRUNING_FORMAT_VERSION {
            return Err(CvkanError::Version {
                expected: PRUNING_FORMAT_VERSION,
                found: self.version,
            });
        }
        if self.keep.is_empty() {
            return Err(CvkanError::Config("pruning keeps no features".into()));
        }
        if self.mode == PruneMode::KeepTopK && self.keep.len() != self.k {
            return Err(CvkanError::Config(format!(
                "keep_top_k with k = {} lists {} features",
                self.k,
                self.keep.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = self.keep.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(CvkanError::Config(format!("feature `{dup}` listed twice")));
        }
        Ok(())
    }

    /// Selects the kept features by name; unknown names are an error.
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        self.validate()?;
        let names = d.feature_names();
        let mut cols = self
            .keep
            .iter()
            .map(|k| {
                names
                    .iter()
                    .position(|n| n == k)
                    .ok_or_else(|| CvkanError::Dataset(format!("pruning names unknown feature `{k}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        cols.sort_unstable();
        d.select_features(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Targets;
    use crate::numerics::{ComplexBatch, ComplexScalar};

    fn dataset(d: usize) -> Dataset {
        let data = (0..3 * d).map(|i| ComplexScalar::new(i as f64, 0.5)).collect();
        Dataset::new(
            "t",
            ComplexBatch::new(3, d, data).unwrap(),
            Targets::Classification { labels: vec![0, 1, 0], classes: 2 },
            (0..d).map(|i| FeatureMeta::complex(format!("x{i}"))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(rank_features(&[0.2, 0.5, 0.2, 0.9]), vec![3, 1, 0, 2]);
    }

    #[test]
    fn keep_all_is_identity() {
        let d = dataset(5);
        let scores = [0.1, 0.4, 0.3, 0.0, 0.2];
        assert_eq!(prune_features(&d, &scores, PruneMode::KeepTopK, 5).unwrap().features, d.features);
    }

    #[test]
    fn keep_and_drop_partition() {
        let d = dataset(6);
        let scores = [0.1, 0.4, 0.3, 0.0, 0.2, 0.4];
        let keep = prune_features(&d, &scores, PruneMode::KeepTopK, 3).unwrap().feature_names();
        let drop = prune_features(&d, &scores, PruneMode::DropTopK, 3).unwrap().feature_names();
        assert_eq!(keep, vec!["x1", "x2", "x5"]);
        assert_eq!(drop, vec!["x0", "x3", "x4"]);
        assert!(prune_features(&d, &scores, PruneMode::KeepTopK, 7).is_err());
    }

    #[test]
    fn fragment_applies_by_name() {
        let d = dataset(4);
        let f = PruningFragment::from_scores(&d.feature_names(), &[0.0, 3.0, 1.0, 2.0], PruneMode::DropTopK, 2).unwrap();
        assert_eq!(f.keep, vec!["x0", "x2"]);
        assert_eq!(f.apply(&d).unwrap().feature_names(), vec!["x0", "x2"]);
        let bad = PruningFragment { keep: vec!["nope".into()], ..f };
        assert!(bad.apply(&d).is_err());
    }
}
