//! Stratified cross-validation, supplied-test-set evaluation, confusion
//! matrices and probability-based MAE/RMSE.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::balance::{BalanceMode, BalanceTargets};
use crate::dataset::{ClassCounts, Dataset, SolvencyClass, N_CLASSES};
use crate::error::{Error, Result};
use crate::tree::{grow, LearnerParams, TreeModel};

pub type Probabilities = [f64; N_CLASSES];

/// Rows are actual classes, columns predicted classes, both in
/// class-alphabet order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub cells: [[usize; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn add(&mut self, actual: SolvencyClass, predicted: SolvencyClass) {
        self.cells[actual.index()][predicted.index()] += 1;
    }

    pub fn row_sum(&self, actual: SolvencyClass) -> usize {
        self.cells[actual.index()].iter().sum()
    }

    pub fn row_sums(&self) -> ClassCounts {
        std::array::from_fn(|c| self.cells[c].iter().sum())
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..N_CLASSES).map(|c| self.cells[c][c]).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    /// `None` for classes with no actual instances.
    pub per_class_recall: [Option<f64>; N_CLASSES],
    pub overall_accuracy: f64,
    pub mae: f64,
    pub rmse: f64,
    pub n: usize,
    pub warnings: Vec<String>,
}

fn check_inputs(probs: &[Probabilities], actual: &[SolvencyClass]) -> Result<()> {
    if probs.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "{} probability vectors for {} labels",
            probs.len(),
            actual.len()
        )));
    }
    for (i, p) in probs.iter().enumerate() {
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("probability vector {i} sums to {s}")));
        }
    }
    Ok(())
}

fn residuals<'a>(probs: &'a [Probabilities], actual: &'a [SolvencyClass]) -> impl Iterator<Item = f64> + 'a {
    probs.iter().zip(actual).flat_map(|(p, a)| {
        (0..N_CLASSES).map(move |j| p[j] - if j == a.index() { 1.0 } else { 0.0 })
    })
}

/// Mean absolute difference between predicted class probabilities and the
/// one-hot actual class, over all `n * 4` terms.
pub fn mae(probs: &[Probabilities], actual: &[SolvencyClass]) -> Result<f64> {
    check_inputs(probs, actual)?;
    if probs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = residuals(probs, actual).map(f64::abs).sum();
    Ok(total / (probs.len() * N_CLASSES) as f64)
}

/// Root mean squared probability residual over all `n * 4` terms.
pub fn rmse(probs: &[Probabilities], actual: &[SolvencyClass]) -> Result<f64> {
    check_inputs(probs, actual)?;
    if probs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = residuals(probs, actual).map(|r| r * r).sum();
    Ok((total / (probs.len() * N_CLASSES) as f64).sqrt())
}

impl EvalReport {
    pub fn from_predictions(actual: &[SolvencyClass], predictions: &[(SolvencyClass, Probabilities)]) -> Result<Self> {
        let probs: Vec<Probabilities> = predictions.iter().map(|(_, p)| *p).collect();
        let mae = mae(&probs, actual)?;
        let rmse = rmse(&probs, actual)?;
        let mut matrix = ConfusionMatrix::default();
        for (a, (p, _)) in actual.iter().zip(predictions) {
            matrix.add(*a, *p);
        }
        let n = actual.len();
        let rows = matrix.row_sums();
        let per_class_recall =
            std::array::from_fn(|c| (rows[c] > 0).then(|| matrix.cells[c][c] as f64 / rows[c] as f64));
        let overall_accuracy = if n == 0 { 0.0 } else { matrix.trace() as f64 / n as f64 };
        Ok(EvalReport {
            matrix,
            per_class_recall,
            overall_accuracy,
            mae,
            rmse,
            n,
            warnings: Vec::new(),
        })
    }

    /// Confusion table with per-row counts, totals and percent correct,
    /// followed by the accuracy/MAE/RMSE summary.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<15}{:>8}{:>8}{:>8}{:>8}{:>8}{:>14}",
            "Classification", "I", "W", "M", "S", "Total", "Correct (%)"
        );
        for class in SolvencyClass::ALL {
            let row = &self.matrix.cells[class.index()];
            let _ = write!(out, "{:<15}", class.code());
            for v in row {
                let _ = write!(out, "{v:>8}");
            }
            let pct = match self.per_class_recall[class.index()] {
                Some(r) => format!("{:.1}%", 100.0 * r),
                None => "-".into(),
            };
            let _ = writeln!(out, "{:>8}{:>14}", self.matrix.row_sum(class), pct);
        }
        let _ = writeln!(
            out,
            "{:<15}{:>32}{:>8}{:>14}",
            "Total",
            "",
            self.n,
            format!("{:.1}%", 100.0 * self.overall_accuracy)
        );
        out.push('\n');
        let _ = writeln!(out, "I = insolvency, W = weak, M = moderate, S = strong");
        out.push('\n');
        let _ = writeln!(out, "Correctly classified  {} of {}", self.matrix.trace(), self.n);
        let _ = writeln!(out, "Accuracy              {:.4}", self.overall_accuracy);
        let _ = writeln!(out, "MAE                   {:.4}", self.mae);
        let _ = writeln!(out, "RMSE                  {:.4}", self.rmse);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// `key=value` lines for scripts.
    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "correct={}", self.matrix.trace());
        let _ = writeln!(out, "accuracy={}", self.overall_accuracy);
        let _ = writeln!(out, "mae={}", self.mae);
        let _ = writeln!(out, "rmse={}", self.rmse);
        for class in SolvencyClass::ALL {
            let recall = self.per_class_recall[class.index()]
                .map(|r| r.to_string())
                .unwrap_or_else(|| "nan".into());
            let _ = writeln!(out, "recall_{class}={recall}");
        }
        for class in SolvencyClass::ALL {
            let row = self.matrix.cells[class.index()].map(|v| v.to_string()).join(",");
            let _ = writeln!(out, "matrix_{class}={row}");
        }
        let _ = writeln!(out, "warnings={}", self.warnings.len());
        out
    }
}

/// Deals records into `k` folds: classes in alphabet order, each class's
/// members shuffled by the seed, then assigned round-robin with the fold
/// counter carried across classes. Each fold lists indices ascending.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    if k > ds.len() {
        return Err(Error::InvalidArgument(format!("{k} folds for {} records", ds.len())));
    }
    let labels = ds.labels()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in SolvencyClass::ALL {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add((fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Adapts balancing targets to one fold's training portion.
fn fold_balance(targets: &BalanceTargets, train: &Dataset, full_len: usize, fold: usize, warnings: &mut Vec<String>) -> Result<BalanceTargets> {
    let mut t = targets.clone();
    t.seed = fold_seed(targets.seed, fold);
    if t.mode == BalanceMode::Smote {
        let counts = train.class_distribution()?;
        let scale = train.len() as f64 / full_len as f64;
        for class in SolvencyClass::ALL {
            let c = class.index();
            let want = ((targets.target_counts[c] as f64 * scale).round() as usize).max(counts[c]);
            t.target_counts[c] = if want > counts[c] && counts[c] < 2 {
                warnings.push(format!(
                    "fold {}: class {class} has {} training record(s); not oversampled",
                    fold + 1,
                    counts[c]
                ));
                counts[c]
            } else {
                want
            };
        }
    }
    Ok(t)
}

/// k-fold stratified cross-validation with optional balancing applied to
/// each fold's training portion only. Held-out predictions are pooled in
/// fold order.
pub fn cross_validate(
    ds: &Dataset,
    k: usize,
    params: &LearnerParams,
    balance: Option<&BalanceTargets>,
    seed: u64,
) -> Result<EvalReport> {
    let folds = stratified_folds(ds, k, seed)?;
    let labels = ds.labels()?;
    let present = ds.class_distribution()?;
    let mut warnings = Vec::new();
    let mut actual = Vec::with_capacity(ds.len());
    let mut predictions = Vec::with_capacity(ds.len());
    let mut held_out = vec![false; ds.len()];

    for (f, fold) in folds.iter().enumerate() {
        held_out.iter_mut().for_each(|h| *h = false);
        for &i in fold {
            held_out[i] = true;
        }
        let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| !held_out[i]).collect();
        let mut train = ds.select(&train_idx);
        let train_counts = train.class_distribution()?;
        for class in SolvencyClass::ALL {
            if present[class.index()] > 0 && train_counts[class.index()] == 0 {
                warnings.push(format!("fold {}: training portion has no {class} records", f + 1));
            }
        }
        if let Some(targets) = balance {
            let mut t = fold_balance(targets, &train, ds.len(), f, &mut warnings)?;
            if t.mode == BalanceMode::Resample && t.bias_to_uniform > 0.0 && train_counts.contains(&0) {
                // classes absent from this fold cannot be drawn
                t.bias_to_uniform = 0.0;
                warnings.push(format!("fold {}: class missing from training; resampled without bias", f + 1));
            }
            train = t.apply(&train)?;
        }
        let model = grow(&train, params)?;
        let test = ds.select(fold);
        predictions.extend(model.predict_dataset(&test)?);
        actual.extend(fold.iter().map(|&i| labels[i]));
    }

    let mut report = EvalReport::from_predictions(&actual, &predictions)?;
    report.warnings = warnings;
    Ok(report)
}

/// Scores a trained model on a labeled test set without retraining.
pub fn evaluate_on(model: &TreeModel, test: &Dataset) -> Result<EvalReport> {
    let actual = test.labels()?;
    let predictions = model.predict_dataset(test)?;
    EvalReport::from_predictions(&actual, &predictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CompanyRecord;
    use SolvencyClass::*;

    fn labeled(counts: ClassCounts) -> Dataset {
        let mut records = Vec::new();
        for class in SolvencyClass::ALL {
            for i in 0..counts[class.index()] {
                records.push(CompanyRecord {
                    company_id: Some(format!("{class}{i}")),
                    year: Some(2008),
                    tca: None,
                    tcr: None,
                    car: None,
                    values: vec![class.index() as f64 * 5.0 + (i % 3) as f64 * 0.1],
                    label: Some(class),
                });
            }
        }
        Dataset::new(vec!["V1".into()], records).unwrap()
    }

    #[test]
    fn metric_hand_values() {
        let one_hot = [[0.0, 0.0, 0.0, 1.0]];
        assert_eq!(mae(&one_hot, &[Strong]).unwrap(), 0.0);
        assert_eq!(rmse(&one_hot, &[Strong]).unwrap(), 0.0);
        assert_eq!(mae(&one_hot, &[Weak]).unwrap(), 0.5);
        assert!((rmse(&one_hot, &[Weak]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let uniform = [[0.25; 4]];
        assert_eq!(mae(&uniform, &[Moderate]).unwrap(), 0.375);
        assert!(mae(&uniform, &[]).is_err());
        assert!(mae(&[[0.5, 0.0, 0.0, 0.0]], &[Weak]).is_err());
    }

    #[test]
    fn fold_sizes_and_loo() {
        let ds = labeled([44, 13, 16, 543]);
        let folds = stratified_folds(&ds, 10, 3).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [61, 61, 61, 61, 62, 62, 62, 62, 62, 62]);

        let small = labeled([2, 1, 1, 3]);
        let loo = stratified_folds(&small, 7, 0).unwrap();
        assert!(loo.iter().all(|f| f.len() == 1));
        assert!(stratified_folds(&small, 8, 0).is_err());
        assert!(stratified_folds(&small, 1, 0).is_err());
    }

    #[test]
    fn constant_label_cv() {
        let ds = labeled([0, 0, 0, 12]);
        let r = cross_validate(&ds, 4, &LearnerParams::default(), None, 1).unwrap();
        assert_eq!(r.overall_accuracy, 1.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.matrix.total(), 12);
        assert_eq!(r.per_class_recall[0], None);
    }

    #[test]
    fn supplied_test_set_accuracy() {
        // six insolvent, one weak, one moderate, 57 strong; 59 of 65 correct
        let mut m = ConfusionMatrix::default();
        let rows = [[4, 0, 1, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 2, 1, 53]];
        let mut actual = Vec::new();
        let mut preds = Vec::new();
        for (a, row) in rows.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    m.add(SolvencyClass::ALL[a], SolvencyClass::ALL[p]);
                    actual.push(SolvencyClass::ALL[a]);
                    let mut probs = [0.0; 4];
                    probs[p] = 1.0;
                    preds.push((SolvencyClass::ALL[p], probs));
                }
            }
        }
        let r = EvalReport::from_predictions(&actual, &preds).unwrap();
        assert_eq!(r.matrix, m);
        assert_eq!(r.n, 65);
        assert!((r.overall_accuracy - 59.0 / 65.0).abs() < 1e-15);
        assert!(r.render_table().contains("90.8%"));
    }

    #[test]
    fn table_layout() {
        let ds = labeled([5, 5, 5, 5]);
        let r = cross_validate(&ds, 5, &LearnerParams::default(), None, 9).unwrap();
        let t = r.render_table();
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("Classification"));
        for (line, code) in lines[1..5].iter().zip(["I", "W", "M", "S"]) {
            assert!(line.starts_with(code));
            assert!(line.ends_with('%'));
            assert_eq!(line.split_whitespace().count(), 7);
        }
        assert!(lines[5].starts_with("Total"));
        assert!(t.contains("MAE "));
        assert!(r.render_summary().contains("matrix_weak="));
    }
}
