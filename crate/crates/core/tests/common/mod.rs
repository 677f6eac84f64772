#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvency::dataset::{CompanyRecord, Dataset, SolvencyClass};
use solvency::tree::TreeNode;

pub fn record(i: usize, values: Vec<f64>, label: SolvencyClass) -> CompanyRecord {
    CompanyRecord {
        company_id: Some(format!("T{i:04}")),
        year: Some(2000 + (i % 10) as i32),
        tca: None,
        tcr: None,
        car: None,
        values,
        label: Some(label),
    }
}

pub fn dataset(rows: &[Vec<f64>], labels: &[SolvencyClass]) -> Dataset {
    let dims = rows.first().map_or(1, Vec::len);
    let schema = (1..=dims).map(|j| format!("V{j}")).collect();
    let records = rows
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (r, &l))| record(i, r.clone(), l))
        .collect();
    Dataset::new(schema, records).unwrap()
}

/// Small random dataset with heavy value ties: `n` rows, `d` attributes,
/// labels drawn from the first `n_classes` classes.
pub fn random_small(rng: &mut ChaCha8Rng, n: usize, d: usize, n_classes: usize) -> (Vec<Vec<f64>>, Vec<SolvencyClass>) {
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0..6) as f64 * 0.5).collect())
        .collect();
    let labels = (0..n)
        .map(|_| SolvencyClass::ALL[rng.random_range(0..n_classes)])
        .collect();
    (rows, labels)
}

/// Base-2 entropy written as `log2 n - sum(c log2 c) / n`.
pub fn oracle_entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let s: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64).log2())
        .sum();
    (n.log2() - s / n).max(0.0)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleSplit {
    pub attribute: usize,
    pub threshold: f64,
    pub gain: f64,
    pub gain_ratio: f64,
}

fn counts_of(labels: impl Iterator<Item = SolvencyClass>) -> [usize; 4] {
    let mut c = [0; 4];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

/// Brute force over every (attribute, occurring value) pair.
///
/// A threshold qualifies when both sides of `value <= threshold` hold at
/// least `min_leaf` rows. Candidates with below-average gain are dropped,
/// the maximum gain ratio wins, and equal ratios go to the lowest
/// attribute and then the lowest threshold.
pub fn oracle_best_split(rows: &[Vec<f64>], labels: &[SolvencyClass], min_leaf: usize) -> Option<OracleSplit> {
    let n = rows.len();
    let parent = counts_of(labels.iter().copied());
    if parent.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let h = oracle_entropy(&parent);
    let d = rows[0].len();
    let mut cands = Vec::new();
    for a in 0..d {
        let mut values: Vec<f64> = rows.iter().map(|r| r[a]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &t in &values {
            let left = counts_of((0..n).filter(|&i| rows[i][a] <= t).map(|i| labels[i]));
            let right = counts_of((0..n).filter(|&i| rows[i][a] > t).map(|i| labels[i]));
            let nl: usize = left.iter().sum();
            let nr: usize = right.iter().sum();
            if nl < min_leaf || nr < min_leaf || nr == 0 {
                continue;
            }
            let gain = h - nl as f64 / n as f64 * oracle_entropy(&left) - nr as f64 / n as f64 * oracle_entropy(&right);
            let info = oracle_entropy(&[nl, nr]);
            cands.push(OracleSplit {
                attribute: a,
                threshold: t,
                gain,
                gain_ratio: gain / info,
            });
        }
    }
    if cands.is_empty() {
        return None;
    }
    let mean = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let kept: Vec<&OracleSplit> = cands.iter().filter(|c| c.gain >= mean - 1e-9).collect();
    let top = kept.iter().map(|c| c.gain_ratio).fold(f64::NEG_INFINITY, f64::max);
    let best = kept
        .into_iter()
        .filter(|c| c.gain_ratio >= top - 1e-9)
        .min_by(|x, y| x.attribute.cmp(&y.attribute).then(x.threshold.total_cmp(&y.threshold)))?;
    (best.gain > 1e-9).then_some(*best)
}

/// Visits every split with the number of training rows routed to each side.
pub fn split_sizes(node: &TreeNode, rows: &[&[f64]], out: &mut Vec<(usize, usize)>) {
    if let TreeNode::Split { attribute, threshold, left, right } = node {
        let (l, r): (Vec<&[f64]>, Vec<&[f64]>) = rows.iter().partition(|v| v[*attribute] <= *threshold);
        out.push((l.len(), r.len()));
        split_sizes(left, &l, out);
        split_sizes(right, &r, out);
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Replaces every run of digits, signs and decimal points with `#` and
/// collapses whitespace, leaving only the layout of a report.
pub fn layout(text: &str) -> String {
    let mut out = String::new();
    let mut in_num = false;
    for ch in text.chars() {
        if ch.is_ascii_digit() || ch == '.' || ch == '-' && in_num {
            if !in_num {
                out.push('#');
                in_num = true;
            }
        } else {
            in_num = false;
            out.push(ch);
        }
    }
    out.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}
