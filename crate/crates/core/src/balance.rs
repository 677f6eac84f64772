//! Class-imbalance correction: bias-to-uniform resampling with replacement
//! and SMOTE oversampling to absolute per-class targets.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassCounts, CompanyRecord, Dataset, SolvencyClass, N_CLASSES};
use crate::error::{Error, Result};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceMode {
    Resample,
    Smote,
}

/// Parameters for either balancing transform. Fields that do not apply to
/// `mode` are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceTargets {
    pub mode: BalanceMode,
    pub bias_to_uniform: f64,
    pub sample_size_percent: f64,
    pub target_counts: ClassCounts,
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for BalanceTargets {
    fn default() -> Self {
        BalanceTargets {
            mode: BalanceMode::Resample,
            bias_to_uniform: 1.0,
            sample_size_percent: 100.0,
            target_counts: [0; N_CLASSES],
            k_neighbors: DEFAULT_K_NEIGHBORS,
            seed: 0,
        }
    }
}

impl BalanceTargets {
    pub fn resample(bias_to_uniform: f64, sample_size_percent: f64, seed: u64) -> Self {
        BalanceTargets {
            mode: BalanceMode::Resample,
            bias_to_uniform,
            sample_size_percent,
            seed,
            ..Self::default()
        }
    }

    pub fn smote(target_counts: ClassCounts, k_neighbors: usize, seed: u64) -> Self {
        BalanceTargets {
            mode: BalanceMode::Smote,
            target_counts,
            k_neighbors,
            seed,
            ..Self::default()
        }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        match self.mode {
            BalanceMode::Resample => resample(ds, self.bias_to_uniform, self.sample_size_percent, self.seed),
            BalanceMode::Smote => smote(ds, self.target_counts, self.k_neighbors, self.seed),
        }
    }
}

/// Draw probabilities `(1 - B) * n_c / N + B / C` for each class.
pub fn class_draw_probabilities(counts: &ClassCounts, bias_to_uniform: f64) -> [f64; N_CLASSES] {
    let total: usize = counts.iter().sum();
    let mut p = [0.0; N_CLASSES];
    for (c, &n) in counts.iter().enumerate() {
        let empirical = if total == 0 { 0.0 } else { n as f64 / total as f64 };
        p[c] = (1.0 - bias_to_uniform) * empirical + bias_to_uniform / N_CLASSES as f64;
    }
    p
}

/// Samples `round(percent/100 * |ds|)` records with replacement: first a
/// class from [`class_draw_probabilities`], then a uniform member of it.
pub fn resample(ds: &Dataset, bias_to_uniform: f64, sample_size_percent: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&bias_to_uniform) {
        return Err(Error::InvalidArgument(format!(
            "bias_to_uniform must lie in [0, 1], got {bias_to_uniform}"
        )));
    }
    if !(sample_size_percent.is_finite() && sample_size_percent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample_size_percent must be > 0, got {sample_size_percent}"
        )));
    }
    let labels = ds.labels()?;
    let mut members: [Vec<usize>; N_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        members[l.index()].push(i);
    }
    let counts: ClassCounts = std::array::from_fn(|c| members[c].len());
    let probs = class_draw_probabilities(&counts, bias_to_uniform);
    for class in SolvencyClass::ALL {
        if probs[class.index()] > 0.0 && counts[class.index()] == 0 {
            return Err(Error::Sampling {
                class,
                message: format!("draw probability {} but no members", probs[class.index()]),
            });
        }
    }

    let n_out = (sample_size_percent / 100.0 * ds.len() as f64).round() as usize;
    if n_out == 0 {
        return ds.with_records(Vec::new());
    }
    let picker = WeightedIndex::new(probs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n_out)
        .map(|_| {
            let pool = &members[picker.sample(&mut rng)];
            ds.records()[pool[rng.random_range(0..pool.len())]].clone()
        })
        .collect();
    ds.with_records(records)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices into `pool` of the `k` points nearest to `query` (Euclidean),
/// nearest first; equal distances keep pool order.
pub fn nearest_neighbors(query: &[f64], pool: &[&[f64]], k: usize) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("nearest neighbors of an empty pool".into()));
    }
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(query, p), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Random stream for one class, derived from the base seed and class index.
fn class_rng(seed: u64, class: SolvencyClass) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(class.index() as u64 + 1);
    rng
}

/// Oversamples each class up to `target_counts` with synthetic records.
///
/// Originals are kept in input order; synthetic records follow, grouped by
/// class. Seeds cycle round-robin over the class members in dataset order,
/// each paired with a random one of its `k` nearest same-class neighbors.
pub fn smote(ds: &Dataset, target_counts: ClassCounts, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    if k_neighbors == 0 {
        return Err(Error::InvalidArgument("k_neighbors must be >= 1".into()));
    }
    let labels = ds.labels()?;
    let counts = ds.class_distribution()?;
    for class in SolvencyClass::ALL {
        let (have, want) = (counts[class.index()], target_counts[class.index()]);
        if want < have {
            return Err(Error::InvalidArgument(format!(
                "target {want} for class {class} is below its current count {have}"
            )));
        }
        if want > have && have < 2 {
            return Err(Error::InsufficientClass { class, count: have });
        }
    }

    let mut records = ds.records().to_vec();
    for class in SolvencyClass::ALL {
        let deficit = target_counts[class.index()] - counts[class.index()];
        if deficit == 0 {
            continue;
        }
        let members: Vec<&[f64]> = labels
            .iter()
            .zip(ds.records())
            .filter(|(l, _)| **l == class)
            .map(|(_, r)| r.values.as_slice())
            .collect();
        let mut neighbor_cache: Vec<Option<Vec<usize>>> = vec![None; members.len()];
        let mut rng = class_rng(seed, class);

        for s in 0..deficit {
            let m = s % members.len();
            if neighbor_cache[m].is_none() {
                let others: Vec<usize> = (0..members.len()).filter(|&o| o != m).collect();
                let pool: Vec<&[f64]> = others.iter().map(|&o| members[o]).collect();
                let nn = nearest_neighbors(members[m], &pool, k_neighbors)?;
                neighbor_cache[m] = Some(nn.into_iter().map(|i| others[i]).collect());
            }
            let neighbors = neighbor_cache[m].as_deref().unwrap_or_default();
            let partner = members[neighbors[rng.random_range(0..neighbors.len())]];
            let base = members[m];
            let u: f64 = rng.random();
            let values = base
                .iter()
                .zip(partner)
                .map(|(&a, &b)| (a + u * (b - a)).clamp(a.min(b), a.max(b)))
                .collect();
            records.push(CompanyRecord::synthetic(values, class));
        }
    }
    ds.with_records(records)
}
