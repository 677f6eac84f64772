//! Seeded synthetic insurer datasets with controllable class separation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{label_from_car, ClassCounts, CompanyRecord, Dataset, SolvencyClass, ATTRIBUTE_NAMES, N_CLASSES};
use crate::error::{Error, Result};

/// Within-class draws are truncated at this many standard deviations.
pub const TRUNCATION_SD: f64 = 3.0;

/// CAR ranges (percent) sampled for each class, half-open `[lo, hi)`.
pub const CAR_BANDS: [(f64, f64); N_CLASSES] = [(40.0, 100.0), (100.0, 120.0), (120.0, 150.0), (150.0, 400.0)];

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub class_counts: ClassCounts,
    /// Distance between adjacent class means, in within-class standard deviations.
    pub separation: f64,
    pub n_attributes: usize,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            class_counts: [44, 13, 16, 543],
            separation: 6.0,
            n_attributes: 11,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.separation.is_finite() || self.separation < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "separation must be finite and >= 0, got {}",
                self.separation
            )));
        }
        if !(1..=ATTRIBUTE_NAMES.len()).contains(&self.n_attributes) {
            return Err(Error::InvalidArgument(format!(
                "n_attributes must lie in 1..=11, got {}",
                self.n_attributes
            )));
        }
        Ok(())
    }

    /// Attributes whose class means differ: the first `ceil(n/2)`.
    pub fn n_informative(&self) -> usize {
        self.n_attributes.div_ceil(2)
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() < TRUNCATION_SD {
            return z;
        }
    }
}

/// Draws a labeled dataset.
///
/// Attribute `j < n_informative` of class `c` is `c * separation + z`, the
/// rest are pure noise `z`, with `z` a standard normal truncated at
/// [`TRUNCATION_SD`]. CAR is uniform inside the class band. Records are
/// shuffled so classes are interleaved.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let informative = spec.n_informative();
    let schema: Vec<String> = ATTRIBUTE_NAMES[..spec.n_attributes].iter().map(|s| s.to_string()).collect();

    let mut rows: Vec<(SolvencyClass, f64, Vec<f64>)> = Vec::with_capacity(spec.class_counts.iter().sum());
    for class in SolvencyClass::ALL {
        let (lo, hi) = CAR_BANDS[class.index()];
        let mean = class.index() as f64 * spec.separation;
        for _ in 0..spec.class_counts[class.index()] {
            let car = rng.random_range(lo..hi);
            let values = (0..spec.n_attributes)
                .map(|j| {
                    let z = truncated_normal(&mut rng);
                    if j < informative {
                        mean + z
                    } else {
                        z
                    }
                })
                .collect();
            rows.push((class, car, values));
        }
    }
    rows.shuffle(&mut rng);

    let records = rows
        .into_iter()
        .enumerate()
        .map(|(i, (class, car, values))| {
            debug_assert_eq!(label_from_car(car).ok(), Some(class));
            CompanyRecord {
                company_id: Some(format!("INS{:04}", i + 1)),
                year: Some(2000 + (i % 9) as i32),
                tca: None,
                tcr: None,
                car: Some(car),
                values,
                label: Some(class),
            }
        })
        .collect();
    Dataset::new(schema, records)
}
