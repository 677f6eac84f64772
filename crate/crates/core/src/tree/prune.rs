//! Error-based pruning with the binomial upper confidence limit.

use crate::error::{Error, Result};
use crate::tree::TreeNode;

/// `P[Binomial(n, p) <= e]`, summed in log space.
pub fn binomial_cdf(e: u64, n: u64, p: f64) -> f64 {
    if e >= n || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_choose = 0.0;
    let mut terms = Vec::with_capacity(e as usize + 1);
    for k in 0..=e {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        terms.push(ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// Upper confidence limit on the error rate of a node that misclassifies
/// `e` of `n` training rows: the `p` solving `P[Binomial(n, p) <= e] = cf`.
///
/// Solved by bisection to well below 1e-9. With `e == n` no solution
/// exists below 1 and the bound is 1.
pub fn pessimistic_error(e: u64, n: u64, cf: f64) -> Result<f64> {
    if !(cf > 0.0 && cf < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence factor must lie in (0, 1), got {cf}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("pessimistic error of an empty node".into()));
    }
    if e > n {
        return Err(Error::InvalidArgument(format!("{e} errors exceed {n} rows")));
    }
    if e == n {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(e, n, mid) > cf {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Estimated error count of a leaf holding `counts`: `n * U(e, n, cf)`.
fn leaf_error(counts: &[usize], cf: f64) -> Result<f64> {
    let n: usize = counts.iter().sum();
    let majority = counts.iter().copied().max().unwrap_or(0);
    let e = n - majority;
    Ok(n as f64 * pessimistic_error(e as u64, n as u64, cf)?)
}

fn subtree_error(node: &TreeNode, cf: f64) -> Result<f64> {
    match node {
        TreeNode::Leaf { class_counts } => leaf_error(class_counts, cf),
        TreeNode::Split { left, right, .. } => Ok(subtree_error(left, cf)? + subtree_error(right, cf)?),
    }
}

/// Bottom-up leaf replacement: a split collapses to a leaf with its pooled
/// counts whenever the leaf's estimated errors do not exceed the summed
/// estimates of the (already pruned) subtree's leaves.
pub fn prune(root: &TreeNode, cf: f64) -> Result<TreeNode> {
    if !(cf > 0.0 && cf < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence factor must lie in (0, 1), got {cf}")));
    }
    prune_node(root, cf)
}

fn prune_node(node: &TreeNode, cf: f64) -> Result<TreeNode> {
    let TreeNode::Split { attribute, threshold, left, right } = node else {
        return Ok(node.clone());
    };
    let left = prune_node(left, cf)?;
    let right = prune_node(right, cf)?;
    let pruned = TreeNode::Split {
        attribute: *attribute,
        threshold: *threshold,
        left: Box::new(left),
        right: Box::new(right),
    };
    let counts = pruned.class_counts();
    let as_leaf = leaf_error(&counts, cf)?;
    let as_tree = subtree_error(&pruned, cf)?;
    if as_leaf <= as_tree + 1e-9 {
        Ok(TreeNode::Leaf { class_counts: counts })
    } else {
        Ok(pruned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(c: [usize; 4]) -> Box<TreeNode> {
        Box::new(TreeNode::Leaf { class_counts: c })
    }

    #[test]
    fn closed_form_at_zero_errors() {
        assert!((pessimistic_error(0, 1, 0.25).unwrap() - 0.75).abs() < 1e-9);
        let want = 1.0 - 0.25f64.powf(0.25);
        assert!((pessimistic_error(0, 4, 0.25).unwrap() - want).abs() < 1e-9);
        assert!((want - 0.2929).abs() < 1e-4);
    }

    #[test]
    fn cdf_small_case() {
        // n=3, e=1: (1-p)^3 + 3p(1-p)^2 at p=0.5 -> 0.5
        assert!((binomial_cdf(1, 3, 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(binomial_cdf(3, 3, 0.9), 1.0);
    }

    #[test]
    fn bad_arguments() {
        assert!(pessimistic_error(0, 1, 0.0).is_err());
        assert!(pessimistic_error(0, 1, 1.0).is_err());
        assert!(pessimistic_error(0, 0, 0.25).is_err());
        assert!(pessimistic_error(3, 2, 0.25).is_err());
        assert_eq!(pessimistic_error(2, 2, 0.25).unwrap(), 1.0);
    }

    #[test]
    fn same_class_children_collapse() {
        let t = TreeNode::Split {
            attribute: 0,
            threshold: 1.0,
            left: leaf([1, 0, 0, 5]),
            right: leaf([1, 0, 0, 5]),
        };
        assert_eq!(prune(&t, 0.25).unwrap(), TreeNode::Leaf { class_counts: [2, 0, 0, 10] });
    }

    #[test]
    fn informative_split_survives() {
        let t = TreeNode::Split {
            attribute: 0,
            threshold: 1.0,
            left: leaf([50, 0, 0, 0]),
            right: leaf([0, 0, 0, 50]),
        };
        assert_eq!(prune(&t, 0.25).unwrap(), t);
        assert!(prune(&t, 1.5).is_err());
    }
}
