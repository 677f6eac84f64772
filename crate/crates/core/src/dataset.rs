//! Insurer-year records, CAR labeling and CSV ingestion.
//!
//! A [`Dataset`] pairs an ordered attribute schema (a subset of `V1..V11`)
//! with a list of [`CompanyRecord`]s. The class alphabet is fixed to
//! `[Insolvency, Weak, Moderate, Strong]` and every per-class array in the
//! crate follows that order.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const N_CLASSES: usize = 4;

/// Canonical names of the eleven financial-ratio attributes.
pub const ATTRIBUTE_NAMES: [&str; 11] = [
    "V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9", "V10", "V11",
];

/// Human-readable descriptions of `V1..V11`, index-aligned with [`ATTRIBUTE_NAMES`].
pub const ATTRIBUTE_DESCRIPTIONS: [&str; 11] = [
    "Net premiums written / policyholders' surplus",
    "Solvency margin to minimum required solvency margin",
    "Policyholders' surplus & technical reserve to net written premium",
    "Claims incurred to policyholders' surplus & technical reserve",
    "Gross agent's balance to policyholders' surplus",
    "Change in policyholders' surplus",
    "Investment yield",
    "Investment assets to policyholders' surplus",
    "Return on total assets (ROA)",
    "Loan & other investment to policyholders' surplus",
    "Loss reserve & unpaid losses to policyholders' surplus",
];

/// Per-class tallies in class-alphabet order.
pub type ClassCounts = [usize; N_CLASSES];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolvencyClass {
    Insolvency,
    Weak,
    Moderate,
    Strong,
}

/// Regulator response attached to each solvency position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionLevel {
    NoAction,
    CompanyAction,
    RegulatoryAction,
    AuthorizedControl,
}

impl SolvencyClass {
    /// The fixed class alphabet.
    pub const ALL: [SolvencyClass; N_CLASSES] = [
        SolvencyClass::Insolvency,
        SolvencyClass::Weak,
        SolvencyClass::Moderate,
        SolvencyClass::Strong,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn action_level(self) -> ActionLevel {
        match self {
            SolvencyClass::Strong => ActionLevel::NoAction,
            SolvencyClass::Moderate => ActionLevel::CompanyAction,
            SolvencyClass::Weak => ActionLevel::RegulatoryAction,
            SolvencyClass::Insolvency => ActionLevel::AuthorizedControl,
        }
    }

    /// Lowercase name used in CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            SolvencyClass::Insolvency => "insolvency",
            SolvencyClass::Weak => "weak",
            SolvencyClass::Moderate => "moderate",
            SolvencyClass::Strong => "strong",
        }
    }

    /// One-letter code used in report tables.
    pub fn code(self) -> &'static str {
        match self {
            SolvencyClass::Insolvency => "I",
            SolvencyClass::Weak => "W",
            SolvencyClass::Moderate => "M",
            SolvencyClass::Strong => "S",
        }
    }
}

impl fmt::Display for SolvencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolvencyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "insolvency" => Ok(SolvencyClass::Insolvency),
            "weak" => Ok(SolvencyClass::Weak),
            "moderate" => Ok(SolvencyClass::Moderate),
            "strong" => Ok(SolvencyClass::Strong),
            other => Err(Error::InvalidValue(format!("unknown class label '{other}'"))),
        }
    }
}

/// Maps a capital adequacy ratio (percent) to its solvency band.
///
/// Bands are lower-inclusive: `[150, inf)` Strong, `[120, 150)` Moderate,
/// `[100, 120)` Weak, and everything below 100 Insolvency.
pub fn label_from_car(car: f64) -> Result<SolvencyClass> {
    if !car.is_finite() {
        return Err(Error::InvalidValue(format!("CAR must be finite, got {car}")));
    }
    Ok(if car >= 150.0 {
        SolvencyClass::Strong
    } else if car >= 120.0 {
        SolvencyClass::Moderate
    } else if car >= 100.0 {
        SolvencyClass::Weak
    } else {
        SolvencyClass::Insolvency
    })
}

/// One insurer-year.
///
/// Records produced by oversampling have neither `company_id` nor `year`;
/// see [`CompanyRecord::is_synthetic`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompanyRecord {
    pub company_id: Option<String>,
    pub year: Option<i32>,
    pub tca: Option<f64>,
    pub tcr: Option<f64>,
    pub car: Option<f64>,
    /// Attribute values aligned with the owning dataset's schema.
    pub values: Vec<f64>,
    pub label: Option<SolvencyClass>,
}

impl CompanyRecord {
    pub fn is_synthetic(&self) -> bool {
        self.company_id.is_none() && self.year.is_none()
    }

    /// A synthetic record carrying only attribute values and a label.
    pub fn synthetic(values: Vec<f64>, label: SolvencyClass) -> Self {
        CompanyRecord {
            company_id: None,
            year: None,
            tca: None,
            tcr: None,
            car: None,
            values,
            label: Some(label),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Vec<String>,
    records: Vec<CompanyRecord>,
}

impl Dataset {
    /// Builds a dataset, checking that the schema names are distinct members
    /// of `V1..V11` and that every record carries one finite value per
    /// schema attribute.
    pub fn new(schema: Vec<String>, records: Vec<CompanyRecord>) -> Result<Self> {
        validate_schema(&schema)?;
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != schema.len() {
                return Err(Error::InvalidArgument(format!(
                    "record {i} has {} values, schema has {}",
                    r.values.len(),
                    schema.len()
                )));
            }
            if let Some(j) = r.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "record {i} attribute {} is not finite",
                    schema[j]
                )));
            }
        }
        Ok(Dataset { schema, records })
    }

    pub fn empty(schema: Vec<String>) -> Result<Self> {
        Self::new(schema, Vec::new())
    }

    /// Schema containing all eleven attributes.
    pub fn full_schema() -> Vec<String> {
        ATTRIBUTE_NAMES.iter().map(|s| s.to_string()).collect()
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn records(&self) -> &[CompanyRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<CompanyRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_alphabet(&self) -> [SolvencyClass; N_CLASSES] {
        SolvencyClass::ALL
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }

    /// Values of attribute `j` across all records.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.values[j]).collect()
    }

    /// Labels of all records, failing on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<SolvencyClass>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.label
                    .ok_or_else(|| Error::State(format!("record {i} is unlabeled")))
            })
            .collect()
    }

    pub fn class_distribution(&self) -> Result<ClassCounts> {
        let mut counts = [0; N_CLASSES];
        for label in self.labels()? {
            counts[label.index()] += 1;
        }
        Ok(counts)
    }

    /// Records at `indices`, in the given order, under the same schema.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    /// Same schema, different records. Value lengths are re-checked.
    pub fn with_records(&self, records: Vec<CompanyRecord>) -> Result<Dataset> {
        Dataset::new(self.schema.clone(), records)
    }

    /// Restricts the schema to `names`, keeping their canonical `V1..V11` order.
    pub fn project(&self, names: &[String]) -> Result<Dataset> {
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let j = self.attribute_index(name).ok_or_else(|| {
                Error::InvalidArgument(format!("attribute {name} is not in the schema"))
            })?;
            cols.push(j);
        }
        cols.sort_by_key(|&j| canonical_position(&self.schema[j]));
        cols.dedup();
        let schema = cols.iter().map(|&j| self.schema[j].clone()).collect();
        let records = self
            .records
            .iter()
            .map(|r| CompanyRecord {
                values: cols.iter().map(|&j| r.values[j]).collect(),
                ..r.clone()
            })
            .collect();
        Dataset::new(schema, records)
    }

    /// Overwrites every label with `label_from_car(car)`.
    pub fn relabel_from_car(&mut self) -> Result<()> {
        for (i, r) in self.records.iter_mut().enumerate() {
            let car = r
                .car
                .ok_or_else(|| Error::State(format!("record {i} has no CAR to label from")))?;
            r.label = Some(label_from_car(car)?);
        }
        Ok(())
    }
}

fn canonical_position(name: &str) -> usize {
    ATTRIBUTE_NAMES
        .iter()
        .position(|n| *n == name)
        .unwrap_or(usize::MAX)
}

fn validate_schema(schema: &[String]) -> Result<()> {
    if schema.is_empty() {
        return Err(Error::InvalidArgument("schema has no attributes".into()));
    }
    let mut seen = HashSet::new();
    for name in schema {
        if canonical_position(name) == usize::MAX {
            return Err(Error::InvalidArgument(format!(
                "unknown attribute '{name}' (expected V1..V11)"
            )));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate attribute '{name}'")));
        }
    }
    Ok(())
}

/// Ingestion switches for [`load_csv_with`].
#[derive(Clone, Copy, Debug)]
pub struct CsvOptions {
    /// Derive missing labels from CAR, and fail if that is impossible.
    pub expect_labels: bool,
    /// Accept repeated `(company_id, year)` keys, as produced by resampling
    /// with replacement.
    pub allow_duplicates: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            expect_labels: true,
            allow_duplicates: false,
        }
    }
}

/// Reads a dataset CSV, rejecting duplicate `(company_id, year)` keys.
pub fn load_csv<R: Read>(source: R, expect_labels: bool) -> Result<Dataset> {
    load_csv_with(
        source,
        CsvOptions {
            expect_labels,
            ..CsvOptions::default()
        },
    )
}

struct Columns {
    company_id: usize,
    year: usize,
    tca: Option<usize>,
    tcr: Option<usize>,
    car: Option<usize>,
    attrs: Vec<(String, usize)>,
    class: Option<usize>,
}

fn map_header(header: &csv::StringRecord) -> Result<Columns> {
    let mut seen = HashSet::new();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    for h in header.iter() {
        let h = h.trim();
        if !seen.insert(h.to_owned()) {
            return Err(Error::csv(1, Some(h), "duplicate column"));
        }
        let known = matches!(h, "company_id" | "year" | "tca" | "tcr" | "car" | "class")
            || canonical_position(h) != usize::MAX;
        if !known {
            return Err(Error::csv(1, Some(h), "unexpected column"));
        }
    }
    let company_id = find("company_id").ok_or_else(|| Error::csv(1, Some("company_id"), "missing column"))?;
    let year = find("year").ok_or_else(|| Error::csv(1, Some("year"), "missing column"))?;
    let tca = find("tca");
    let tcr = find("tcr");
    let car = find("car");
    if car.is_none() && (tca.is_none() || tcr.is_none()) {
        let missing = if tca.is_none() { "tca" } else { "tcr" };
        return Err(Error::csv(1, Some(missing), "missing column (need car or both tca and tcr)"));
    }
    let mut attrs: Vec<(String, usize)> = ATTRIBUTE_NAMES
        .iter()
        .filter_map(|n| find(n).map(|i| (n.to_string(), i)))
        .collect();
    if attrs.is_empty() {
        return Err(Error::csv(1, Some("V1"), "missing column (no attribute columns)"));
    }
    attrs.sort_by_key(|(n, _)| canonical_position(n));
    Ok(Columns {
        company_id,
        year,
        tca,
        tcr,
        car,
        attrs,
        class: find("class"),
    })
}

fn cell(rec: &csv::StringRecord, idx: Option<usize>) -> Option<&str> {
    idx.and_then(|i| rec.get(i))
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn number(row: usize, column: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| Error::csv(row, Some(column), format!("non-numeric value '{text}'")))?;
    if !v.is_finite() {
        return Err(Error::csv(row, Some(column), format!("non-finite value '{text}'")));
    }
    Ok(v)
}

/// Reads a dataset CSV.
///
/// Required columns are `company_id`, `year`, at least one of `car` or
/// `tca`+`tcr`, and one or more of `V1..V11`; `class` is optional. The
/// schema is the set of attribute columns present, in canonical order.
pub fn load_csv_with<R: Read>(source: R, opts: CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| Error::csv(1, None, e.to_string()))?
        .clone();
    let cols = map_header(&header)?;
    let schema: Vec<String> = cols.attrs.iter().map(|(n, _)| n.clone()).collect();
    let mut keys = HashSet::new();
    let mut records = Vec::new();

    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(row);
            Error::csv(row, None, e.to_string())
        })?;
        if rec.len() != header.len() {
            return Err(Error::csv(
                row,
                None,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }

        let company_id = cell(&rec, Some(cols.company_id)).map(str::to_owned);
        let year = cell(&rec, Some(cols.year))
            .map(|y| {
                y.parse::<i32>()
                    .map_err(|_| Error::csv(row, Some("year"), format!("non-integer year '{y}'")))
            })
            .transpose()?;
        if company_id.is_some() != year.is_some() {
            let col = if company_id.is_none() { "company_id" } else { "year" };
            return Err(Error::csv(row, Some(col), "missing value"));
        }

        let tca = cell(&rec, cols.tca).map(|t| number(row, "tca", t)).transpose()?;
        let tcr = cell(&rec, cols.tcr).map(|t| number(row, "tcr", t)).transpose()?;
        let mut car = cell(&rec, cols.car).map(|t| number(row, "car", t)).transpose()?;
        match (tca, tcr) {
            (Some(a), Some(r)) => {
                if a < 0.0 {
                    return Err(Error::csv(row, Some("tca"), "total capital available must be >= 0"));
                }
                if r <= 0.0 {
                    return Err(Error::csv(row, Some("tcr"), "total capital required must be > 0"));
                }
                let computed = 100.0 * a / r;
                match car {
                    Some(c) if (c - computed).abs() > 1e-9 * computed.abs().max(c.abs()) => {
                        return Err(Error::csv(
                            row,
                            Some("car"),
                            format!("car {c} disagrees with 100*tca/tcr = {computed}"),
                        ));
                    }
                    Some(_) => {}
                    None => car = Some(computed),
                }
            }
            (Some(_), None) => return Err(Error::csv(row, Some("tcr"), "missing value")),
            (None, Some(_)) => return Err(Error::csv(row, Some("tca"), "missing value")),
            (None, None) => {}
        }

        let mut values = Vec::with_capacity(cols.attrs.len());
        for (name, idx) in &cols.attrs {
            let text = cell(&rec, Some(*idx)).ok_or_else(|| Error::csv(row, Some(name), "missing value"))?;
            values.push(number(row, name, text)?);
        }

        let mut label = cell(&rec, cols.class)
            .map(|c| c.parse::<SolvencyClass>().map_err(|e| Error::csv(row, Some("class"), e.to_string())))
            .transpose()?;
        if label.is_none() && opts.expect_labels {
            let c = car.ok_or_else(|| Error::csv(row, Some("car"), "missing value (needed to derive class)"))?;
            label = Some(label_from_car(c).map_err(|e| Error::csv(row, Some("car"), e.to_string()))?);
        }
        if let (Some(id), Some(y)) = (&company_id, year) {
            if !opts.allow_duplicates && !keys.insert((id.clone(), y)) {
                return Err(Error::csv(row, Some("company_id"), format!("duplicate record ({id}, {y})")));
            }
        }

        records.push(CompanyRecord {
            company_id,
            year,
            tca,
            tcr,
            car,
            values,
            label,
        });
    }

    Dataset::new(schema, records)
}

/// Writes `company_id,year,tca,tcr,car,<schema>,class`. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(ds: &Dataset, sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    let mut header = vec!["company_id", "year", "tca", "tcr", "car"];
    header.extend(ds.schema.iter().map(String::as_str));
    header.push("class");
    w.write_record(&header).map_err(csv_io)?;

    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &ds.records {
        let mut row = Vec::with_capacity(header.len());
        row.push(r.company_id.clone().unwrap_or_default());
        row.push(r.year.map(|y| y.to_string()).unwrap_or_default());
        row.push(opt(r.tca));
        row.push(opt(r.tcr));
        row.push(opt(r.car));
        row.extend(r.values.iter().map(f64::to_string));
        row.push(r.label.map(|l| l.as_str().to_owned()).unwrap_or_default());
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Rounds per-class train sizes; exact halves alternate up/down in class
/// order, starting with up.
fn split_sizes(counts: &ClassCounts, fraction: f64) -> ClassCounts {
    let mut out = [0; N_CLASSES];
    let mut round_up_next = true;
    for (c, &n) in counts.iter().enumerate() {
        let exact = fraction * n as f64;
        let floor = exact.floor();
        let rem = exact - floor;
        let up = if (rem - 0.5).abs() < 1e-12 {
            let up = round_up_next;
            round_up_next = !round_up_next;
            up
        } else {
            rem > 0.5
        };
        out[c] = (floor as usize + usize::from(up)).min(n);
    }
    out
}

/// Per-class stratified train/test partition.
///
/// Class `c` contributes `round(fraction * n_c)` records to the training
/// side, chosen by a seeded shuffle. Both outputs keep input order.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let labels = ds.labels()?;
    let counts = ds.class_distribution()?;
    let sizes = split_sizes(&counts, train_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; ds.len()];
    for class in SolvencyClass::ALL {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for &i in &members[..sizes[class.index()]] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_train[i]);
    Ok((ds.select(&train), ds.select(&test)))
}
