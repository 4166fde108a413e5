//! The block-classification domain: three shapes, three colors, a
//! shape-by-color count table and everything sampled from it.
//!
//! Counts stay integral; probabilities are derived on demand in `f64`.

use std::fmt;
use std::io::Read;
use std::ops::Index;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Tolerance for "sums to one" checks on derived distributions.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("contingency table has no blocks")]
    EmptyTable,
    #[error("no blocks of shape {0}; its color distribution is undefined")]
    DegenerateEvidence(Shape),
    #[error("no blocks of color {0}; its shape distribution is undefined")]
    DegenerateHypothesis(Color),
    #[error("bag size must be at least 1")]
    EmptyBag,
    #[error("declared {what} total {declared} does not match cell sum {actual}")]
    TotalsMismatch {
        what: String,
        declared: u64,
        actual: u64,
    },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("table csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("cannot read table file {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square = 0,
    Circle = 1,
    Triangle = 2,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Square, Shape::Circle, Shape::Triangle];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Shape> {
        Shape::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
            Shape::Triangle => "triangle",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown shape `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green = 0,
    Red = 1,
    Gold = 2,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Green, Color::Red, Color::Gold];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Color> {
        Color::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Green => "green",
            Color::Red => "red",
            Color::Gold => "gold",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|color| color.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

fn check_distribution(p: &[f64; 3], tolerance: f64) -> Result<(), DomainError> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(DomainError::InvalidDistribution(format!(
            "negative or non-finite entry in {p:?}"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(DomainError::InvalidDistribution(format!(
            "entries {p:?} sum to {sum}"
        )));
    }
    Ok(())
}

/// Normalize non-negative weights; `None` if they are all zero.
pub(crate) fn normalize3(w: [f64; 3]) -> Option<[f64; 3]> {
    let sum: f64 = w.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return None;
    }
    Some(w.map(|x| x / sum))
}

/// A probability distribution over colors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution3 {
    p: [f64; 3],
}

impl Distribution3 {
    pub fn new(p: [f64; 3]) -> Result<Self, DomainError> {
        Self::with_tolerance(p, SUM_TOLERANCE)
    }

    pub fn with_tolerance(p: [f64; 3], tolerance: f64) -> Result<Self, DomainError> {
        check_distribution(&p, tolerance)?;
        Ok(Self { p })
    }

    /// Rescale non-negative weights to sum to one.
    pub fn normalized(weights: [f64; 3]) -> Result<Self, DomainError> {
        if weights.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(DomainError::InvalidDistribution(format!(
                "cannot normalize {weights:?}"
            )));
        }
        normalize3(weights)
            .map(|p| Self { p })
            .ok_or_else(|| DomainError::InvalidDistribution("all weights are zero".into()))
    }

    pub fn uniform() -> Self {
        Self { p: [1.0 / 3.0; 3] }
    }

    pub fn probs(&self) -> [f64; 3] {
        self.p
    }
}

impl Index<Color> for Distribution3 {
    type Output = f64;

    fn index(&self, c: Color) -> &f64 {
        &self.p[c.index()]
    }
}

/// A probability distribution over shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeDistribution {
    p: [f64; 3],
}

impl ShapeDistribution {
    pub fn new(p: [f64; 3]) -> Result<Self, DomainError> {
        Self::with_tolerance(p, SUM_TOLERANCE)
    }

    pub fn with_tolerance(p: [f64; 3], tolerance: f64) -> Result<Self, DomainError> {
        check_distribution(&p, tolerance)?;
        Ok(Self { p })
    }

    pub fn normalized(weights: [f64; 3]) -> Result<Self, DomainError> {
        Distribution3::normalized(weights).map(|d| Self { p: d.p })
    }

    pub fn uniform() -> Self {
        Self { p: [1.0 / 3.0; 3] }
    }

    pub fn probs(&self) -> [f64; 3] {
        self.p
    }
}

impl Index<Shape> for ShapeDistribution {
    type Output = f64;

    fn index(&self, s: Shape) -> &f64 {
        &self.p[s.index()]
    }
}

/// Shape-by-color block counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    counts: [[u64; 3]; 3],
    /// Column totals as written in a loaded file's `total` row, if any.
    declared_col_totals: Option<[u64; 3]>,
}

impl ContingencyTable {
    /// `counts[shape][color]`.
    pub fn new(counts: [[u64; 3]; 3]) -> Result<Self, DomainError> {
        let table = Self {
            counts,
            declared_col_totals: None,
        };
        if table.grand_total() == 0 {
            return Err(DomainError::EmptyTable);
        }
        Ok(table)
    }

    /// The block counts of the original shape experiment.
    pub fn default_table() -> Self {
        Self::new([[0, 48, 24], [96, 16, 32], [36, 36, 36]]).expect("built-in table is non-empty")
    }

    pub fn uniform(per_cell: u64) -> Self {
        Self::new([[per_cell; 3]; 3]).expect("per_cell must be positive")
    }

    pub fn count(&self, shape: Shape, color: Color) -> u64 {
        self.counts[shape.index()][color.index()]
    }

    pub fn counts(&self) -> [[u64; 3]; 3] {
        self.counts
    }

    pub fn row_total(&self, shape: Shape) -> u64 {
        self.counts[shape.index()].iter().sum()
    }

    pub fn col_total(&self, color: Color) -> u64 {
        self.counts.iter().map(|row| row[color.index()]).sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn declared_col_totals(&self) -> Option<[u64; 3]> {
        self.declared_col_totals
    }

    /// Check declared totals (from a loaded `total` row) against the cells.
    pub fn verify_totals(&self) -> Result<(), DomainError> {
        if let Some(declared) = self.declared_col_totals {
            for color in Color::ALL {
                let actual = self.col_total(color);
                if declared[color.index()] != actual {
                    return Err(DomainError::TotalsMismatch {
                        what: format!("{color} column"),
                        declared: declared[color.index()],
                        actual,
                    });
                }
            }
        }
        Ok(())
    }

    /// P(color | shape).
    pub fn color_given_shape(&self, shape: Shape) -> Result<Distribution3, DomainError> {
        let total = self.row_total(shape);
        if total == 0 {
            return Err(DomainError::DegenerateEvidence(shape));
        }
        let row = self.counts[shape.index()];
        Ok(Distribution3 {
            p: row.map(|k| k as f64 / total as f64),
        })
    }

    /// P(shape | color).
    pub fn shape_given_color(&self, color: Color) -> Result<ShapeDistribution, DomainError> {
        let total = self.col_total(color);
        if total == 0 {
            return Err(DomainError::DegenerateHypothesis(color));
        }
        Ok(ShapeDistribution {
            p: Shape::ALL.map(|s| self.count(s, color) as f64 / total as f64),
        })
    }

    /// P(color), the column marginal.
    pub fn color_prior(&self) -> Distribution3 {
        let grand = self.grand_total() as f64;
        Distribution3 {
            p: Color::ALL.map(|c| self.col_total(c) as f64 / grand),
        }
    }

    /// P(shape), the row marginal.
    pub fn shape_marginal(&self) -> ShapeDistribution {
        let grand = self.grand_total() as f64;
        ShapeDistribution {
            p: Shape::ALL.map(|s| self.row_total(s) as f64 / grand),
        }
    }

    /// Draw one block with replacement.
    pub fn sample_block(&self, stream: &mut RandomStream) -> (Shape, Color) {
        let flat: Vec<u64> = self.counts.iter().flatten().copied().collect();
        let cell = stream
            .weighted_index(&flat)
            .expect("table invariant: grand total > 0");
        (Shape::ALL[cell / 3], Color::ALL[cell % 3])
    }

    /// Draw `n` numbered trials with replacement.
    pub fn sample_session(&self, n: usize, stream: &mut RandomStream) -> Vec<TrialRecord> {
        (1..=n)
            .map(|index| {
                let (shape, color) = self.sample_block(stream);
                TrialRecord {
                    index,
                    shape,
                    color,
                }
            })
            .collect()
    }

    /// Draw a bag color, then `size` shapes i.i.d. from that color's column.
    pub fn sample_bag(
        &self,
        size: usize,
        prior_mode: PriorMode,
        stream: &mut RandomStream,
    ) -> Result<BagScenario, DomainError> {
        if size == 0 {
            return Err(DomainError::EmptyBag);
        }
        let true_color = match prior_mode {
            PriorMode::Marginal => {
                let totals = Color::ALL.map(|c| self.col_total(c));
                Color::ALL[stream
                    .weighted_index(&totals)
                    .expect("table invariant: grand total > 0")]
            }
            PriorMode::Uniform => Color::ALL[stream.below(3) as usize],
        };
        let column = Shape::ALL.map(|s| self.count(s, true_color));
        let mut shapes = Vec::with_capacity(size);
        for _ in 0..size {
            let i = stream
                .weighted_index(&column)
                .ok_or(DomainError::DegenerateHypothesis(true_color))?;
            shapes.push(Shape::ALL[i]);
        }
        Ok(BagScenario { true_color, shapes })
    }

    /// Parse the `shape,green,red,gold` CSV layout. Rows may come in any
    /// order but each shape must appear exactly once; an optional `total`
    /// row records declared column totals.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DomainError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header_err = |message: String| DomainError::Csv { line: 1, message };
        let headers = rdr
            .headers()
            .map_err(|e| header_err(e.to_string()))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect::<Vec<_>>();
        if headers != ["shape", "green", "red", "gold"] {
            return Err(header_err(format!(
                "expected header `shape,green,red,gold`, found `{}`",
                headers.join(",")
            )));
        }

        let mut rows: [Option<[u64; 3]>; 3] = [None; 3];
        let mut declared = None;
        for record in rdr.records() {
            let record = record.map_err(|e| DomainError::Csv {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let err = |message: String| DomainError::Csv { line, message };
            let mut values = [0u64; 3];
            for (i, v) in values.iter_mut().enumerate() {
                let field = &record[i + 1];
                *v = field
                    .parse()
                    .map_err(|_| err(format!("`{field}` is not a non-negative integer")))?;
            }
            let label = &record[0];
            if label.eq_ignore_ascii_case("total") {
                if declared.replace(values).is_some() {
                    return Err(err("duplicate total row".into()));
                }
                continue;
            }
            let shape: Shape = label.parse().map_err(err)?;
            if rows[shape.index()].replace(values).is_some() {
                return Err(err(format!("duplicate row for {shape}")));
            }
        }
        let mut counts = [[0u64; 3]; 3];
        for shape in Shape::ALL {
            counts[shape.index()] = rows[shape.index()].ok_or_else(|| DomainError::Csv {
                line: 0,
                message: format!("missing row for {shape}"),
            })?;
        }
        let mut table = Self::new(counts)?;
        table.declared_col_totals = declared;
        Ok(table)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DomainError> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let file = std::fs::File::open(path).map_err(|e| DomainError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("shape,green,red,gold\n");
        for shape in Shape::ALL {
            let row = self.counts[shape.index()];
            out.push_str(&format!("{shape},{},{},{}\n", row[0], row[1], row[2]));
        }
        out
    }
}

/// How the bag color is drawn in the bag experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    /// Proportional to the table's column totals.
    #[default]
    Marginal,
    Uniform,
}

impl FromStr for PriorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "marginal" => Ok(PriorMode::Marginal),
            "uniform" => Ok(PriorMode::Uniform),
            other => Err(format!("unknown prior mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based.
    pub index: usize,
    pub shape: Shape,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagScenario {
    pub true_color: Color,
    pub shapes: Vec<Shape>,
}
