//! Line-oriented model files and indented text rendering.
//!
//! ```text
//! c45-tree 1
//! confidence_factor 0.25
//! min_leaf 2
//! max_depth none
//! schema V1 V2 V5
//! training 616 44 13 16 543
//! split V2 1.5000000000000000e0
//! leaf 40 1 0 0
//! leaf 4 12 16 543
//! ```
//!
//! Nodes follow in pre-order; a `split` line is followed by its left
//! (`<=`) subtree, then its right subtree.

use std::fmt::Write as _;

use crate::dataset::{SolvencyClass, N_CLASSES};
use crate::error::{Error, Result};
use crate::tree::{majority, LearnerParams, TrainingFingerprint, TreeModel, TreeNode};

pub const FORMAT_HEADER: &str = "c45-tree 1";

fn counts_text(counts: &[usize]) -> String {
    counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

pub fn serialize(model: &TreeModel) -> String {
    let mut out = String::new();
    let p = &model.params;
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "confidence_factor {}", p.confidence_factor);
    let _ = writeln!(out, "min_leaf {}", p.min_leaf);
    match p.max_depth {
        Some(d) => {
            let _ = writeln!(out, "max_depth {d}");
        }
        None => {
            let _ = writeln!(out, "max_depth none");
        }
    }
    let _ = writeln!(out, "schema {}", model.schema.join(" "));
    let _ = writeln!(
        out,
        "training {} {}",
        model.training.n_records,
        counts_text(&model.training.class_counts)
    );
    write_node(&model.root, &model.schema, &mut out);
    out
}

fn write_node(node: &TreeNode, schema: &[String], out: &mut String) {
    match node {
        TreeNode::Leaf { class_counts } => {
            let _ = writeln!(out, "leaf {}", counts_text(class_counts));
        }
        TreeNode::Split { attribute, threshold, left, right } => {
            let _ = writeln!(out, "split {} {:.16e}", schema[*attribute], threshold);
            write_node(left, schema, out);
            write_node(right, schema, out);
        }
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((i, l)) if l.trim().is_empty() => self.last = i + 1,
                Some((i, l)) => {
                    self.last = i + 1;
                    return Ok((i + 1, l.trim()));
                }
                None => {
                    return Err(Error::ModelParse {
                        line: self.last + 1,
                        message: "unexpected end of model".into(),
                    })
                }
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.next()?;
        match text.split_once(' ') {
            Some((k, rest)) if k == key => Ok((line, rest.trim())),
            _ if text == key => Ok((line, "")),
            _ => Err(err(line, format!("expected '{key}' line, found '{text}'"))),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelParse { line, message: message.into() }
}

fn parse_counts(line: usize, fields: &[&str]) -> Result<[usize; N_CLASSES]> {
    if fields.len() != N_CLASSES {
        return Err(err(line, format!("expected {N_CLASSES} class counts, found {}", fields.len())));
    }
    let mut out = [0; N_CLASSES];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| err(line, format!("bad count '{f}'")))?;
    }
    Ok(out)
}

fn parse_node(lines: &mut Lines<'_>, schema: &[String], depth: usize) -> Result<TreeNode> {
    let (line, text) = lines.next()?;
    if depth > 10_000 {
        return Err(err(line, "tree nesting too deep"));
    }
    let fields: Vec<&str> = text.split_whitespace().collect();
    match fields.first().copied() {
        Some("leaf") => {
            let class_counts = parse_counts(line, &fields[1..])?;
            if class_counts.iter().sum::<usize>() == 0 {
                return Err(err(line, "leaf with no training rows"));
            }
            Ok(TreeNode::Leaf { class_counts })
        }
        Some("split") => {
            if fields.len() != 3 {
                return Err(err(line, "split needs an attribute and a threshold"));
            }
            let attribute = schema
                .iter()
                .position(|s| s == fields[1])
                .ok_or_else(|| err(line, format!("attribute '{}' not in schema", fields[1])))?;
            let threshold: f64 = fields[2]
                .parse()
                .map_err(|_| err(line, format!("bad threshold '{}'", fields[2])))?;
            if !threshold.is_finite() {
                return Err(err(line, "threshold must be finite"));
            }
            let left = parse_node(lines, schema, depth + 1)?;
            let right = parse_node(lines, schema, depth + 1)?;
            Ok(TreeNode::Split {
                attribute,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        _ => Err(err(line, format!("expected 'split' or 'leaf', found '{text}'"))),
    }
}

pub fn parse(text: &str) -> Result<TreeModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
        last: 0,
    };
    let (line, header) = lines.next()?;
    if header != FORMAT_HEADER {
        return Err(err(line, format!("unsupported header '{header}'")));
    }
    let (line, cf) = lines.keyed("confidence_factor")?;
    let confidence_factor: f64 = cf.parse().map_err(|_| err(line, format!("bad confidence factor '{cf}'")))?;
    let (line, ml) = lines.keyed("min_leaf")?;
    let min_leaf: usize = ml.parse().map_err(|_| err(line, format!("bad min_leaf '{ml}'")))?;
    let (line, md) = lines.keyed("max_depth")?;
    let max_depth = match md {
        "none" => None,
        d => Some(d.parse().map_err(|_| err(line, format!("bad max_depth '{d}'")))?),
    };
    let params = LearnerParams { confidence_factor, min_leaf, max_depth };
    params.validate().map_err(|e| err(line, e.to_string()))?;

    let (line, schema_text) = lines.keyed("schema")?;
    let schema: Vec<String> = schema_text.split_whitespace().map(str::to_owned).collect();
    if schema.is_empty() {
        return Err(err(line, "empty schema"));
    }
    let (line, training) = lines.keyed("training")?;
    let fields: Vec<&str> = training.split_whitespace().collect();
    if fields.is_empty() {
        return Err(err(line, "missing training record count"));
    }
    let n_records = fields[0].parse().map_err(|_| err(line, format!("bad record count '{}'", fields[0])))?;
    let class_counts = parse_counts(line, &fields[1..])?;

    let root = parse_node(&mut lines, &schema, 0)?;
    if let Some((i, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(i + 1, format!("trailing content '{}'", extra.trim())));
    }
    TreeModel::new(root, params, schema, TrainingFingerprint { n_records, class_counts })
        .map_err(|e| err(line, e.to_string()))
}

/// Shortest decimal form with at most six fractional digits.
fn short_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn leaf_label(counts: &[usize; N_CLASSES]) -> String {
    let class: SolvencyClass = majority(counts);
    let n: usize = counts.iter().sum();
    format!(
        "{} ({}/{})  [{}]",
        class,
        n,
        n - counts[class.index()],
        counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
    )
}

/// Indented `attr <= threshold` rendering, one line per branch. Leaves show
/// the predicted class, `(rows/misclassified)`, and per-class counts.
pub fn render(model: &TreeModel) -> String {
    let mut out = String::new();
    match &model.root {
        TreeNode::Leaf { class_counts } => {
            let _ = writeln!(out, "{}", leaf_label(class_counts));
        }
        node => render_branches(node, &model.schema, 0, &mut out),
    }
    out
}

fn render_branches(node: &TreeNode, schema: &[String], depth: usize, out: &mut String) {
    let TreeNode::Split { attribute, threshold, left, right } = node else {
        return;
    };
    let indent = "|   ".repeat(depth);
    let t = short_number(*threshold);
    for (op, child) in [("<=", left), (">", right)] {
        let _ = write!(out, "{indent}{} {op} {t}", schema[*attribute]);
        match child.as_ref() {
            TreeNode::Leaf { class_counts } => {
                let _ = writeln!(out, ": {}", leaf_label(class_counts));
            }
            split => {
                out.push('\n');
                render_branches(split, schema, depth + 1, out);
            }
        }
    }
}
