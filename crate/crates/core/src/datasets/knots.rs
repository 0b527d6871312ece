//! Ingestion of the knot-invariant table.
//!
//! Layout: a header row, then one column per real invariant, complex
//! invariants as adjacent `<name>_re`/`<name>_im` pairs, and a final integer
//! `signature` column. Every channel is min-max mapped onto the grid range;
//! signatures become class indices in ascending order.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureMeta, Targets};
use crate::error::{CvkanError, Result};
use crate::layers::GridSpec;
use crate::numerics::{ComplexBatch, ComplexScalar};

/// Column names of the real and complex invariants, as written by the surrogate.
pub struct KnotSchema {
    pub real: [&'static str; 13],
    pub complex: [&'static str; 2],
}

pub const KNOT_SCHEMA: KnotSchema = KnotSchema {
    real: [
        "chern_simons",
        "cusp_volume",
        "adjoint_torsion_degree",
        "torsion_degree",
        "injectivity_radius",
        "longitudinal_translation",
        "volume",
        "symmetry_0",
        "symmetry_d3",
        "symmetry_d4",
        "symmetry_d6",
        "symmetry_d8",
        "symmetry_z2z2",
    ],
    complex: ["merid_translat_c", "short_geodesic_c"],
};

const LABEL_COLUMN: &str = "signature";

/// Observed range of one real channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScaling {
    pub min: f64,
    pub max: f64,
}

impl ChannelScaling {
    fn observe(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        Self { min, max }
    }

    pub fn is_degenerate(&self) -> bool {
        self.max <= self.min
    }

    /// Maps `[min, max]` onto `[lo, hi]`; a constant channel goes to the grid
    /// center. Values outside the observed range are clamped to the grid.
    pub fn apply(&self, v: f64, grid: &GridSpec) -> f64 {
        if self.is_degenerate() {
            return grid.center();
        }
        let t = (v - self.min) / (self.max - self.min);
        (grid.lo + t * (grid.hi - grid.lo)).clamp(grid.lo, grid.hi)
    }
}

/// Everything needed to encode further rows exactly like the training table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotEncoding {
    pub grid: GridSpec,
    pub feature_names: Vec<String>,
    pub originally_real: Vec<bool>,
    /// `(re, im)` scaling per feature; `im` is absent for real features.
    pub scalings: Vec<(ChannelScaling, Option<ChannelScaling>)>,
    /// Signature value of each class index.
    pub class_values: Vec<i64>,
}

#[derive(Debug, Clone, Copy)]
enum Column {
    Real(usize),
    Complex(usize, usize),
}

struct RawTable {
    names: Vec<String>,
    columns: Vec<Column>,
    rows: Vec<Vec<f64>>,
    signatures: Vec<i64>,
}

fn parse_layout(header: &csv::StringRecord) -> Result<(Vec<String>, Vec<Column>, usize)> {
    let cells: Vec<&str> = header.iter().map(str::trim).collect();
    let label = cells
        .iter()
        .position(|&c| c == LABEL_COLUMN)
        .ok_or_else(|| CvkanError::Dataset(format!("missing `{LABEL_COLUMN}` column")))?;
    if label != cells.len() - 1 {
        return Err(CvkanError::Dataset(format!("`{LABEL_COLUMN}` must be the last column")));
    }
    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut i = 0;
    while i < label {
        let cell = cells[i];
        if let Some(stem) = cell.strip_suffix("_re") {
            let partner = format!("{stem}_im");
            if cells.get(i + 1) != Some(&partner.as_str()) || i + 1 >= label {
                return Err(CvkanError::Dataset(format!("column `{cell}` lacks its `{partner}` partner")));
            }
            names.push(stem.to_string());
            columns.push(Column::Complex(i, i + 1));
            i += 2;
        } else if cell.ends_with("_im") {
            return Err(CvkanError::Dataset(format!("column `{cell}` lacks its `_re` partner")));
        } else {
            names.push(cell.to_string());
            columns.push(Column::Real(i));
            i += 1;
        }
    }
    Ok((names, columns, label))
}

fn read_table(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader.headers()?.clone();
    let records = reader.records().map(|r| r.map_err(CvkanError::from));
    let table = build_table(&header, records)?;
    if table.rows.is_empty() {
        return Err(CvkanError::Dataset(format!("{} has no data rows", path.display())));
    }
    Ok(table)
}

fn build_table(
    header: &csv::StringRecord,
    records: impl Iterator<Item = Result<csv::StringRecord>>,
) -> Result<RawTable> {
    let (names, columns, label) = parse_layout(header)?;
    let n_real = columns.iter().filter(|c| matches!(c, Column::Real(_))).count();
    let n_complex = columns.len() - n_real;
    if n_real != KNOT_SCHEMA.real.len() || n_complex != KNOT_SCHEMA.complex.len() {
        return Err(CvkanError::Dataset(format!(
            "expected {} real and {} complex invariants, found {n_real} and {n_complex}",
            KNOT_SCHEMA.real.len(),
            KNOT_SCHEMA.complex.len()
        )));
    }
    let mut rows = Vec::new();
    let mut signatures = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record?;
        let line = r + 2;
        if record.len() != label + 1 {
            return Err(CvkanError::Dataset(format!(
                "line {line}: {} cells, expected {}",
                record.len(),
                label + 1
            )));
        }
        let mut values = Vec::with_capacity(label);
        for (c, cell) in record.iter().take(label).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CvkanError::Dataset(format!("line {line}, column {}: `{cell}` is not numeric", c + 1))
            })?;
            if !v.is_finite() {
                return Err(CvkanError::Dataset(format!("line {line}, column {}: non-finite value", c + 1)));
            }
            values.push(v);
        }
        let cell = record[label].trim();
        let sig: f64 = cell
            .parse()
            .map_err(|_| CvkanError::Dataset(format!("line {line}: signature `{cell}` is not numeric")))?;
        if sig.fract() != 0.0 || !sig.is_finite() {
            return Err(CvkanError::Dataset(format!("line {line}: signature `{cell}` is not an integer")));
        }
        rows.push(values);
        signatures.push(sig as i64);
    }
    if rows.is_empty() {
        return Err(CvkanError::Dataset("table has no data rows".into()));
    }
    Ok(RawTable {
        names,
        columns,
        rows,
        signatures,
    })
}

/// Loads the table and fits a fresh encoding to it.
pub fn load_knots(path: &Path, grid: &GridSpec) -> Result<Dataset> {
    grid.validate()?;
    fit_and_encode(read_table(path)?, grid)
}

/// Same as [`load_knots`] for a table already in memory: `header` in file
/// layout, `rows` holding every column but the signature.
pub fn knots_from_rows(header: &[String], rows: &[Vec<f64>], signatures: &[i64], grid: &GridSpec) -> Result<Dataset> {
    grid.validate()?;
    if rows.len() != signatures.len() {
        return Err(CvkanError::Shape(format!("{} rows but {} signatures", rows.len(), signatures.len())));
    }
    let header = csv::StringRecord::from(header.to_vec());
    let records = rows.iter().zip(signatures).map(|(row, sig)| {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(sig.to_string());
        Ok(csv::StringRecord::from(cells))
    });
    fit_and_encode(build_table(&header, records)?, grid)
}

fn fit_and_encode(table: RawTable, grid: &GridSpec) -> Result<Dataset> {
    let channel = |i: usize| ChannelScaling::observe(table.rows.iter().map(|r| r[i]));
    let mut scalings = Vec::with_capacity(table.columns.len());
    let mut originally_real = Vec::with_capacity(table.columns.len());
    for (name, col) in table.names.iter().zip(&table.columns) {
        let s = match *col {
            Column::Real(i) => (channel(i), None),
            Column::Complex(re, im) => (channel(re), Some(channel(im))),
        };
        if s.0.is_degenerate() || s.1.is_some_and(|c| c.is_degenerate()) {
            log::warn!("feature `{name}` has a constant channel; mapped to the grid center");
        }
        originally_real.push(s.1.is_none());
        scalings.push(s);
    }
    let class_values: Vec<i64> = table
        .signatures
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let encoding = KnotEncoding {
        grid: *grid,
        feature_names: table.names.clone(),
        originally_real,
        scalings,
        class_values,
    };
    encode(table, encoding)
}

/// Loads rows with an existing encoding, e.g. a held-out file.
pub fn load_knots_with(path: &Path, encoding: &KnotEncoding) -> Result<Dataset> {
    let table = read_table(path)?;
    if table.names != encoding.feature_names {
        return Err(CvkanError::Dataset("column names differ from the encoding".into()));
    }
    encode(table, encoding.clone())
}

fn encode(table: RawTable, encoding: KnotEncoding) -> Result<Dataset> {
    let grid = encoding.grid;
    let n = table.rows.len();
    let d = table.columns.len();
    let mut features = Vec::with_capacity(n * d);
    for row in &table.rows {
        for (col, (s_re, s_im)) in table.columns.iter().zip(&encoding.scalings) {
            features.push(match (*col, s_im) {
                (Column::Real(i), _) => ComplexScalar::new(s_re.apply(row[i], &grid), 0.0),
                (Column::Complex(re, im), Some(s_im)) => {
                    ComplexScalar::new(s_re.apply(row[re], &grid), s_im.apply(row[im], &grid))
                }
                (Column::Complex(..), None) => {
                    return Err(CvkanError::Dataset("complex column encoded as real".into()))
                }
            });
        }
    }
    let labels = table
        .signatures
        .iter()
        .map(|s| {
            encoding
                .class_values
                .binary_search(s)
                .map_err(|_| CvkanError::Dataset(format!("signature {s} was not seen during training")))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = table
        .names
        .iter()
        .zip(&encoding.originally_real)
        .map(|(name, &real)| if real { FeatureMeta::real(name) } else { FeatureMeta::complex(name) })
        .collect();
    let mut dataset = Dataset::new(
        "knots",
        ComplexBatch::new(n, d, features)?,
        Targets::Classification {
            labels,
            classes: encoding.class_values.len(),
        },
        meta,
    )?;
    dataset.encoding = Some(encoding);
    Ok(dataset)
}
