//! Long-format result CSV.
//!
//! Columns: `comparator,calculus,expert_model,shape_or_size,metric,value,
//! std,replications,seed,conflicts,checkpoint,status,config_checksum`.
//! Reals are written with six significant digits, counts in full.

use super::HarnessError;

pub const RESULT_HEADER: [&str; 13] = [
    "comparator",
    "calculus",
    "expert_model",
    "shape_or_size",
    "metric",
    "value",
    "std",
    "replications",
    "seed",
    "conflicts",
    "checkpoint",
    "status",
    "config_checksum",
];

/// Six significant digits, positional notation, `.` decimal separator.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // Scientific formatting rounds the mantissa correctly; its exponent
    // then fixes the number of decimals.
    let sci = format!("{x:.5e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("rust scientific format has an exponent");
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
}

impl Value {
    fn render(self) -> String {
        match self {
            Value::Real(x) => fmt_sig(x),
            Value::Count(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub comparator: String,
    pub calculus: String,
    pub expert_model: String,
    pub shape_or_size: String,
    pub metric: String,
    pub value: Option<Value>,
    pub std: Option<f64>,
    pub replications: Option<usize>,
    pub conflicts: Option<usize>,
    pub checkpoint: Option<usize>,
    pub status: String,
}

impl ResultRow {
    pub fn new(comparator: &str, calculus: &str, expert_model: &str) -> Self {
        Self {
            comparator: comparator.into(),
            calculus: calculus.into(),
            expert_model: expert_model.into(),
            shape_or_size: String::new(),
            metric: String::new(),
            value: None,
            std: None,
            replications: None,
            conflicts: None,
            checkpoint: None,
            status: "ok".into(),
        }
    }

    pub fn at(mut self, shape_or_size: impl ToString) -> Self {
        self.shape_or_size = shape_or_size.to_string();
        self
    }

    pub fn metric(mut self, metric: &str, value: Value) -> Self {
        self.metric = metric.into();
        self.value = Some(value);
        self
    }

    pub fn std(mut self, std: f64) -> Self {
        self.std = Some(std);
        self
    }

    pub fn replications(mut self, n: Option<usize>) -> Self {
        self.replications = n;
        self
    }

    pub fn conflicts(mut self, n: usize) -> Self {
        self.conflicts = Some(n);
        self
    }

    pub fn checkpoint(mut self, cp: Option<usize>) -> Self {
        self.checkpoint = cp;
        self
    }

    pub fn failed(mut self, metric: &str, err: impl std::fmt::Display) -> Self {
        self.metric = metric.into();
        self.status = format!("error: {err}");
        self
    }
}

/// Render rows to CSV text with the header.
pub fn render_csv(rows: &[ResultRow], seed: u64, checksum: &str) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Io(e.to_string());
    w.write_record(RESULT_HEADER).map_err(io)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.comparator.clone(),
            r.calculus.clone(),
            r.expert_model.clone(),
            r.shape_or_size.clone(),
            r.metric.clone(),
            opt(r.value.map(Value::render)),
            opt(r.std.map(fmt_sig)),
            opt(r.replications.map(|n| n.to_string())),
            seed.to_string(),
            opt(r.conflicts.map(|n| n.to_string())),
            opt(r.checkpoint.map(|n| n.to_string())),
            r.status.clone(),
            checksum.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}
