//! C4.5-style decision trees over numeric attributes.
//!
//! Binary `value <= threshold` splits are chosen by gain ratio with the
//! above-average-gain prefilter, every split keeps at least `min_leaf`
//! rows on each side, and the grown tree is pruned bottom-up by replacing
//! subtrees with leaves when the binomial error bound does not get worse.

mod format;
mod prune;
mod split;

use serde::{Deserialize, Serialize};

pub use format::{parse, render, serialize, FORMAT_HEADER};
pub use prune::{binomial_cdf, pessimistic_error, prune};
pub use split::{best_split, entropy, split_candidates, SplitCandidate, SCORE_EPS};

use crate::dataset::{ClassCounts, CompanyRecord, Dataset, SolvencyClass, N_CLASSES};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerParams {
    pub confidence_factor: f64,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            confidence_factor: 0.25,
            min_leaf: 2,
            max_depth: None,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence_factor > 0.0 && self.confidence_factor <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "confidence factor must lie in (0, 0.5], got {}",
                self.confidence_factor
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Split {
        /// Index into the model schema.
        attribute: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class_counts: ClassCounts,
    },
}

/// Index of the largest count; the earlier class wins ties.
pub fn majority(counts: &ClassCounts) -> SolvencyClass {
    let mut best = 0;
    for c in 1..N_CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    SolvencyClass::ALL[best]
}

impl TreeNode {
    /// Training counts routed to this node (sum over its leaves).
    pub fn class_counts(&self) -> ClassCounts {
        match self {
            TreeNode::Leaf { class_counts } => *class_counts,
            TreeNode::Split { left, right, .. } => {
                let (l, r) = (left.class_counts(), right.class_counts());
                std::array::from_fn(|c| l[c] + r[c])
            }
        }
    }

    pub fn predicted(&self) -> SolvencyClass {
        majority(&self.class_counts())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// The leaf reached by `values`.
    pub fn route(&self, values: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split { attribute, threshold, left, right } = node {
            node = if values[*attribute] <= *threshold { left } else { right };
        }
        node
    }

    fn max_attribute(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { attribute, left, right, .. } => [Some(*attribute), left.max_attribute(), right.max_attribute()]
                .into_iter()
                .flatten()
                .max(),
        }
    }
}

/// Record count and class counts of the training data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingFingerprint {
    pub n_records: usize,
    pub class_counts: ClassCounts,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeModel {
    pub root: TreeNode,
    pub params: LearnerParams,
    pub schema: Vec<String>,
    pub training: TrainingFingerprint,
}

impl TreeModel {
    pub fn new(root: TreeNode, params: LearnerParams, schema: Vec<String>, training: TrainingFingerprint) -> Result<Self> {
        if let Some(a) = root.max_attribute() {
            if a >= schema.len() {
                return Err(Error::InvalidArgument(format!(
                    "split on attribute index {a} but schema has {} attributes",
                    schema.len()
                )));
            }
        }
        Ok(TreeModel { root, params, schema, training })
    }

    /// Class and relative leaf frequencies for schema-aligned `values`.
    pub fn predict_values(&self, values: &[f64]) -> Result<(SolvencyClass, [f64; N_CLASSES])> {
        if values.len() != self.schema.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} attribute values, got {}",
                self.schema.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("attribute values must be finite".into()));
        }
        let counts = self.root.route(values).class_counts();
        let total: usize = counts.iter().sum();
        let probs = std::array::from_fn(|c| counts[c] as f64 / total as f64);
        Ok((majority(&counts), probs))
    }

    /// Maps each model attribute to its column in `schema`.
    pub fn column_map(&self, schema: &[String]) -> Result<Vec<usize>> {
        self.schema
            .iter()
            .map(|name| {
                schema
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| Error::InvalidArgument(format!("attribute {name} missing from input schema")))
            })
            .collect()
    }

    /// Predicts a record laid out under `schema`.
    pub fn predict(&self, record: &CompanyRecord, schema: &[String]) -> Result<(SolvencyClass, [f64; N_CLASSES])> {
        let map = self.column_map(schema)?;
        let values: Vec<f64> = map.iter().map(|&j| record.values[j]).collect();
        self.predict_values(&values)
    }

    /// Predicts every record of `ds`.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<(SolvencyClass, [f64; N_CLASSES])>> {
        let map = self.column_map(ds.schema())?;
        ds.records()
            .iter()
            .map(|r| {
                let values: Vec<f64> = map.iter().map(|&j| r.values[j]).collect();
                self.predict_values(&values)
            })
            .collect()
    }
}

fn build(rows: &[&[f64]], labels: &[SolvencyClass], idx: Vec<usize>, depth: usize, params: &LearnerParams) -> TreeNode {
    let node_labels: Vec<SolvencyClass> = idx.iter().map(|&i| labels[i]).collect();
    let leaf = || TreeNode::Leaf { class_counts: split::tally(&node_labels) };
    if params.max_depth.is_some_and(|d| depth >= d) {
        return leaf();
    }
    let node_rows: Vec<&[f64]> = idx.iter().map(|&i| rows[i]).collect();
    let Some(cand) = best_split(&node_rows, &node_labels, params) else {
        return leaf();
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][cand.attribute] <= cand.threshold);
    TreeNode::Split {
        attribute: cand.attribute,
        threshold: cand.threshold,
        left: Box::new(build(rows, labels, l, depth + 1, params)),
        right: Box::new(build(rows, labels, r, depth + 1, params)),
    }
}

/// Grows the full tree without pruning.
pub fn grow_unpruned(ds: &Dataset, params: &LearnerParams) -> Result<TreeModel> {
    params.validate()?;
    if ds.is_empty() {
        return Err(Error::InvalidArgument("cannot grow a tree on an empty dataset".into()));
    }
    let labels = ds.labels()?;
    let rows: Vec<&[f64]> = ds.records().iter().map(|r| r.values.as_slice()).collect();
    let root = build(&rows, &labels, (0..ds.len()).collect(), 0, params);
    TreeModel::new(
        root,
        params.clone(),
        ds.schema().to_vec(),
        TrainingFingerprint {
            n_records: ds.len(),
            class_counts: ds.class_distribution()?,
        },
    )
}

/// Grows and prunes a tree with `params`.
pub fn grow(ds: &Dataset, params: &LearnerParams) -> Result<TreeModel> {
    let mut model = grow_unpruned(ds, params)?;
    model.root = prune(&model.root, params.confidence_factor)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CompanyRecord;
    use SolvencyClass::*;

    fn ds_1d(points: &[(f64, SolvencyClass)]) -> Dataset {
        let records = points
            .iter()
            .enumerate()
            .map(|(i, (v, c))| CompanyRecord {
                company_id: Some(format!("r{i}")),
                year: Some(2002),
                tca: None,
                tcr: None,
                car: None,
                values: vec![*v],
                label: Some(*c),
            })
            .collect();
        Dataset::new(vec!["V1".into()], records).unwrap()
    }

    fn accuracy(model: &TreeModel, ds: &Dataset) -> f64 {
        let preds = model.predict_dataset(ds).unwrap();
        let labels = ds.labels().unwrap();
        preds.iter().zip(&labels).filter(|((p, _), l)| p == *l).count() as f64 / ds.len() as f64
    }

    #[test]
    fn single_record() {
        let ds = ds_1d(&[(3.0, Weak)]);
        let m = grow(&ds, &LearnerParams::default()).unwrap();
        assert_eq!(m.root, TreeNode::Leaf { class_counts: [0, 1, 0, 0] });
        assert_eq!(m.predict_values(&[100.0]).unwrap().0, Weak);
    }

    #[test]
    fn empty_dataset_rejected() {
        let ds = ds_1d(&[]);
        assert!(matches!(grow(&ds, &LearnerParams::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn separable_fit_is_perfect() {
        let pts: Vec<(f64, SolvencyClass)> = (0..20).map(|i| (i as f64, if i < 10 { Insolvency } else { Strong })).collect();
        let ds = ds_1d(&pts);
        let m = grow_unpruned(&ds, &LearnerParams::default()).unwrap();
        assert_eq!(accuracy(&m, &ds), 1.0);
        let pruned = grow(&ds, &LearnerParams::default()).unwrap();
        assert_eq!(accuracy(&pruned, &ds), 1.0);
        assert_eq!(pruned.predict_values(&[4.0]).unwrap(), (Insolvency, [1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn single_leaf_probabilities() {
        let m = TreeModel::new(
            TreeNode::Leaf { class_counts: [0, 0, 0, 9] },
            LearnerParams::default(),
            vec!["V1".into()],
            TrainingFingerprint { n_records: 9, class_counts: [0, 0, 0, 9] },
        )
        .unwrap();
        assert_eq!(m.predict_values(&[0.0]).unwrap(), (Strong, [0.0, 0.0, 0.0, 1.0]));
        assert!(m.predict_values(&[]).is_err());
        assert!(m.predict_values(&[f64::NAN]).is_err());
    }

    #[test]
    fn majority_tie_breaks_by_alphabet() {
        assert_eq!(majority(&[0, 3, 3, 1]), Weak);
        assert_eq!(majority(&[0, 0, 0, 0]), Insolvency);
    }

    #[test]
    fn max_depth_limits_growth() {
        let pts: Vec<(f64, SolvencyClass)> = (0..40).map(|i| (i as f64, SolvencyClass::ALL[i / 10])).collect();
        let ds = ds_1d(&pts);
        let params = LearnerParams { max_depth: Some(1), ..LearnerParams::default() };
        assert!(grow_unpruned(&ds, &params).unwrap().root.depth() <= 1);
        let full = grow_unpruned(&ds, &LearnerParams::default()).unwrap();
        assert_eq!(full.root.leaf_count(), 4);
    }

    #[test]
    fn params_validation() {
        let ds = ds_1d(&[(1.0, Weak)]);
        for p in [
            LearnerParams { confidence_factor: 0.0, ..LearnerParams::default() },
            LearnerParams { confidence_factor: 0.6, ..LearnerParams::default() },
            LearnerParams { min_leaf: 0, ..LearnerParams::default() },
        ] {
            assert!(grow(&ds, &p).is_err());
        }
    }

    #[test]
    fn schema_mismatch_on_dataset_prediction() {
        let ds = ds_1d(&[(1.0, Weak), (2.0, Weak)]);
        let m = grow(&ds, &LearnerParams::default()).unwrap();
        let other = Dataset::new(vec!["V2".into()], vec![]).unwrap();
        assert!(m.predict_dataset(&other).is_err());
    }
}
