//! Entropy and gain-ratio split selection over numeric attributes.

use crate::dataset::{ClassCounts, SolvencyClass, N_CLASSES};
use crate::error::{Error, Result};
use crate::tree::LearnerParams;

/// Slack used when comparing gains and gain ratios.
pub const SCORE_EPS: f64 = 1e-12;

/// Shannon entropy in bits of a count vector.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("entropy of all-zero counts".into()));
    }
    Ok(entropy_unchecked(counts, n))
}

pub(crate) fn entropy_unchecked(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// A binary partition `value <= threshold` (left) vs `> threshold` (right).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitCandidate {
    pub attribute: usize,
    pub threshold: f64,
    pub gain: f64,
    pub gain_ratio: f64,
}

pub(crate) fn tally(labels: &[SolvencyClass]) -> ClassCounts {
    let mut counts = [0; N_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Every admissible threshold, in (attribute, threshold) order.
///
/// Thresholds are the distinct attribute values except the largest; a
/// candidate is admissible when both sides hold at least `min_leaf` rows.
pub fn split_candidates(rows: &[&[f64]], labels: &[SolvencyClass], min_leaf: usize) -> Vec<SplitCandidate> {
    let n = rows.len();
    if n < 2 {
        return Vec::new();
    }
    let counts = tally(labels);
    let parent = entropy_unchecked(&counts, n);
    let n_attrs = rows[0].len();
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();

    #[allow(clippy::needless_range_loop)]
    for a in 0..n_attrs {
        order.sort_by(|&x, &y| rows[x][a].total_cmp(&rows[y][a]).then(x.cmp(&y)));
        let mut left = [0usize; N_CLASSES];
        for pos in 0..n - 1 {
            left[labels[order[pos]].index()] += 1;
            let value = rows[order[pos]][a];
            if value == rows[order[pos + 1]][a] {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right: ClassCounts = std::array::from_fn(|c| counts[c] - left[c]);
            let gain = parent
                - (nl as f64 / n as f64) * entropy_unchecked(&left, nl)
                - (nr as f64 / n as f64) * entropy_unchecked(&right, nr);
            let split_info = entropy_unchecked(&[nl, nr], n);
            out.push(SplitCandidate {
                attribute: a,
                threshold: value,
                gain,
                gain_ratio: gain / split_info,
            });
        }
    }
    out
}

/// Chooses the split for a node.
///
/// Among candidates whose gain is at least the mean candidate gain, the
/// highest gain ratio wins; ties go to the earlier attribute, then the
/// smaller threshold. Returns `None` for pure nodes, when no threshold
/// satisfies `min_leaf`, or when the winner carries no information gain.
pub fn best_split(rows: &[&[f64]], labels: &[SolvencyClass], params: &LearnerParams) -> Option<SplitCandidate> {
    debug_assert_eq!(rows.len(), labels.len());
    let counts = tally(labels);
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return None;
    }
    let cands = split_candidates(rows, labels, params.min_leaf.max(1));
    if cands.is_empty() {
        return None;
    }
    let mean_gain = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let mut best: Option<SplitCandidate> = None;
    for c in cands.iter().filter(|c| c.gain >= mean_gain - SCORE_EPS) {
        if best.is_none_or(|b| c.gain_ratio > b.gain_ratio + SCORE_EPS) {
            best = Some(*c);
        }
    }
    best.filter(|b| b.gain > SCORE_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SolvencyClass::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[5, 5]).unwrap(), 1.0);
        assert_eq!(entropy(&[10, 0]).unwrap(), 0.0);
        // -(1/3)log2(1/3) - (2/3)log2(2/3)
        assert!((entropy(&[2, 4]).unwrap() - 0.918_295_834_054_489_6).abs() < 1e-12);
        assert!(entropy(&[0, 0]).is_err());
    }

    #[test]
    fn midpoint_split_on_four_points() {
        let data = [[1.0], [2.0], [3.0], [4.0]];
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let labels = [Insolvency, Insolvency, Weak, Weak];
        let params = LearnerParams::default();
        let all = split_candidates(&rows, &labels, 1);
        assert_eq!(all.len(), 3);
        let admissible = split_candidates(&rows, &labels, 2);
        assert_eq!(admissible.len(), 1);
        let best = best_split(&rows, &labels, &params).unwrap();
        assert_eq!(best.attribute, 0);
        assert_eq!(best.threshold, 2.0);
        assert_eq!(best.gain, 1.0);
        assert_eq!(best.gain_ratio, 1.0);
    }

    #[test]
    fn pure_and_too_small() {
        let data = [[1.0], [2.0], [3.0]];
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        assert!(best_split(&rows, &[Strong, Strong, Strong], &LearnerParams::default()).is_none());
        assert!(best_split(&rows, &[Strong, Weak, Strong], &LearnerParams::default()).is_none());
    }

    #[test]
    fn constant_attribute_gives_no_split() {
        let data = [[1.0], [1.0], [1.0], [1.0]];
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        assert!(best_split(&rows, &[Strong, Weak, Strong, Weak], &LearnerParams::default()).is_none());
    }
}
