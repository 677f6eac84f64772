//! Correlation-based feature subset selection.
//!
//! Attributes are discretized into equal-frequency bins, pairwise
//! association is measured by symmetric uncertainty, and subsets are scored
//! with the CFS merit
//!
//! ```text
//! merit(S) = k * mean_rcf / sqrt(k + k(k-1) * mean_rff)
//! ```
//!
//! A forward greedy search adds one attribute at a time while the merit
//! strictly improves.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10;

/// Per-attribute bin assignments for every record.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedView {
    /// `bins[j][i]` is the bin of record `i` on attribute `j`.
    pub bins: Vec<Vec<usize>>,
    pub n_bins: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSubset {
    pub selected: Vec<String>,
    pub merit: f64,
    /// Merit after each forward step; non-decreasing.
    pub trace: Vec<f64>,
}

/// Equal-frequency binning by rank. Tied values share the bin of their
/// lowest rank, so a constant column collapses to a single bin.
pub fn equal_frequency_bins(values: &[f64], n_bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0; n];
    let mut rank = 0;
    while rank < n {
        let start = rank;
        let v = values[order[start]];
        while rank < n && values[order[rank]] == v {
            rank += 1;
        }
        let bin = start * n_bins / n;
        for &i in &order[start..rank] {
            out[i] = bin;
        }
    }
    out
}

impl DiscretizedView {
    pub fn new(ds: &Dataset, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidArgument(format!("n_bins must be >= 2, got {n_bins}")));
        }
        let bins = (0..ds.schema().len())
            .map(|j| equal_frequency_bins(&ds.column(j), n_bins))
            .collect();
        Ok(DiscretizedView { bins, n_bins })
    }
}

fn entropy_of<K: Ord>(items: impl Iterator<Item = K>) -> f64 {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    let mut n = 0usize;
    for k in items {
        *counts.entry(k).or_default() += 1;
        n += 1;
    }
    let n = n as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `2 * IG(x; y) / (H(x) + H(y))`, or 0 when both entropies vanish.
pub fn symmetric_uncertainty(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("symmetric uncertainty of empty sequences".into()));
    }
    let hx = entropy_of(x.iter().copied());
    let hy = entropy_of(y.iter().copied());
    let denom = hx + hy;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let hxy = entropy_of(x.iter().copied().zip(y.iter().copied()));
    let gain = hx + hy - hxy;
    Ok((2.0 * gain / denom).clamp(0.0, 1.0))
}

/// Class and attribute correlations, cached for repeated merit queries.
struct Correlations {
    class: Vec<f64>,
    pair: Vec<Vec<Option<f64>>>,
}

impl Correlations {
    fn new(view: &DiscretizedView, classes: &[usize]) -> Result<Self> {
        let m = view.bins.len();
        let class = view
            .bins
            .iter()
            .map(|b| symmetric_uncertainty(b, classes))
            .collect::<Result<_>>()?;
        Ok(Correlations {
            class,
            pair: vec![vec![None; m]; m],
        })
    }

    fn pair(&mut self, view: &DiscretizedView, a: usize, b: usize) -> Result<f64> {
        if let Some(v) = self.pair[a][b] {
            return Ok(v);
        }
        let v = symmetric_uncertainty(&view.bins[a], &view.bins[b])?;
        self.pair[a][b] = Some(v);
        self.pair[b][a] = Some(v);
        Ok(v)
    }

    fn merit(&mut self, view: &DiscretizedView, subset: &[usize]) -> Result<f64> {
        let k = subset.len() as f64;
        let rcf = subset.iter().map(|&j| self.class[j]).sum::<f64>() / k;
        let mut rff = 0.0;
        if subset.len() > 1 {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for (x, &a) in subset.iter().enumerate() {
                for &b in &subset[x + 1..] {
                    total += self.pair(view, a, b)?;
                    pairs += 1;
                }
            }
            rff = total / pairs as f64;
        }
        Ok(merit_formula(subset.len(), rcf, rff))
    }
}

/// CFS merit from the subset size and mean correlations.
pub fn merit_formula(k: usize, mean_class_corr: f64, mean_inter_corr: f64) -> f64 {
    let k = k as f64;
    let denom = (k + k * (k - 1.0) * mean_inter_corr).sqrt();
    if denom <= 0.0 {
        0.0
    } else {
        k * mean_class_corr / denom
    }
}

fn class_codes(ds: &Dataset) -> Result<Vec<usize>> {
    Ok(ds.labels()?.into_iter().map(|c| c.index()).collect())
}

fn resolve(ds: &Dataset, subset: &[String]) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|name| {
            ds.attribute_index(name)
                .ok_or_else(|| Error::InvalidArgument(format!("attribute {name} is not in the schema")))
        })
        .collect()
}

/// Merit of a named attribute subset.
pub fn cfs_merit(subset: &[String], ds: &Dataset, view: &DiscretizedView) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty attribute subset".into()));
    }
    let idx = resolve(ds, subset)?;
    let classes = class_codes(ds)?;
    Correlations::new(view, &classes)?.merit(view, &idx)
}

/// Forward selection from the empty set. The best singleton is always
/// admitted; afterwards an attribute is added only if it strictly raises
/// the merit. Ties go to the earlier schema attribute.
pub fn greedy_stepwise(ds: &Dataset, n_bins: usize) -> Result<FeatureSubset> {
    let view = DiscretizedView::new(ds, n_bins)?;
    let classes = class_codes(ds)?;
    let mut corr = Correlations::new(&view, &classes)?;
    let m = ds.schema().len();

    let mut chosen: Vec<usize> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    loop {
        let mut step: Option<(usize, f64)> = None;
        for j in (0..m).filter(|j| !chosen.contains(j)) {
            let mut cand = chosen.clone();
            cand.push(j);
            let merit = corr.merit(&view, &cand)?;
            if step.is_none_or(|(_, s)| merit > s + 1e-12) {
                step = Some((j, merit));
            }
        }
        match step {
            Some((j, merit)) if chosen.is_empty() || merit > best + 1e-12 => {
                chosen.push(j);
                best = merit;
                trace.push(merit);
            }
            _ => break,
        }
    }

    Ok(FeatureSubset {
        selected: chosen.iter().map(|&j| ds.schema()[j].clone()).collect(),
        merit: best,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CompanyRecord, SolvencyClass};

    fn dataset(columns: &[Vec<f64>], labels: &[usize]) -> Dataset {
        let schema = (1..=columns.len()).map(|j| format!("V{j}")).collect();
        let records = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| CompanyRecord {
                company_id: Some(format!("r{i}")),
                year: Some(2000),
                tca: None,
                tcr: None,
                car: None,
                values: columns.iter().map(|col| col[i]).collect(),
                label: SolvencyClass::from_index(c),
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn su_identity_and_independence() {
        let x = [0, 1, 2, 0, 1, 2];
        assert!((symmetric_uncertainty(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(symmetric_uncertainty(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        // full 3x2 product design
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 1, 0, 1, 0, 1];
        assert!(symmetric_uncertainty(&a, &b).unwrap().abs() < 1e-12);
        assert_eq!(symmetric_uncertainty(&[3, 3], &[1, 1]).unwrap(), 0.0);
        assert!(symmetric_uncertainty(&[0, 1], &[0]).is_err());
        assert!(symmetric_uncertainty(&[], &[]).is_err());
    }

    #[test]
    fn bins_equal_frequency() {
        let v: Vec<f64> = (0..23).map(|i| (i * 7 % 23) as f64).collect();
        let b = equal_frequency_bins(&v, 10);
        let mut sizes = [0usize; 10];
        for &x in &b {
            sizes[x] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1, "{sizes:?}");
        assert!(equal_frequency_bins(&[4.0; 7], 3).iter().all(|&x| x == 0));
    }

    #[test]
    fn merit_formula_values() {
        assert!((merit_formula(2, 0.5, 0.0) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(merit_formula(1, 0.3, 0.9), 0.3);
    }

    #[test]
    fn singleton_merit_is_class_correlation() {
        let labels = [0, 0, 1, 1, 2, 2, 3, 3];
        let col: Vec<f64> = labels.iter().map(|&c| c as f64).collect();
        let noise = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let ds = dataset(&[col, noise], &labels);
        let view = DiscretizedView::new(&ds, 4).unwrap();
        let m = cfs_merit(&["V1".into()], &ds, &view).unwrap();
        let su = symmetric_uncertainty(&view.bins[0], &labels).unwrap();
        assert_eq!(m, su);
        assert!(cfs_merit(&[], &ds, &view).is_err());
    }

    #[test]
    fn redundant_pair_scores_below_singleton() {
        // V1 partially predicts the class; V2 is an exact copy.
        let labels = [0, 0, 0, 1, 1, 1, 0, 1];
        let v1 = vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        let ds = dataset(&[v1.clone(), v1], &labels);
        let view = DiscretizedView::new(&ds, 4).unwrap();
        let single = cfs_merit(&["V1".into()], &ds, &view).unwrap();
        let pair = cfs_merit(&["V1".into(), "V2".into()], &ds, &view).unwrap();
        assert!(single > 0.0);
        // rff = 1 gives 2r / sqrt(2 + 2) = r: no gain, so greedy stops
        assert!((pair - single).abs() < 1e-12);
        let sel = greedy_stepwise(&ds, 4).unwrap();
        assert_eq!(sel.selected, ["V1"]);
    }

    #[test]
    fn constant_attributes() {
        let labels = [0, 1, 2, 3, 0, 1];
        let ds = dataset(&[vec![5.0; 6], vec![5.0; 6], vec![1.0; 6]], &labels);
        let sel = greedy_stepwise(&ds, 10).unwrap();
        assert_eq!(sel.selected, ["V1"]);
        assert_eq!(sel.merit, 0.0);
    }
}
