//! Plain-text layout for parameter sets.
//!
//! One row per (calculus, color, shape) under the header
//! `calculus,color,shape,v1,v2`:
//!
//! | calculus      | shape   | v1         | v2    |
//! |---------------|---------|------------|-------|
//! | `bayes-prior` | (empty) | P(color)   | empty |
//! | `bayes`       | shape   | P(shape \| color) | empty |
//! | `cf`          | shape   | CF         | empty |
//! | `ds`          | shape   | lower      | upper |
//!
//! Values are written in shortest round-trip form, so reading a file back
//! reproduces the parameters bit for bit.

use std::collections::BTreeMap;

use super::{
    BayesParams, BeliefInterval, Calculus, CalculusError, CalculusParams, CfParams, DsParams,
};
use crate::blockworld::{Color, Shape};

pub const PARAMS_HEADER: &str = "calculus,color,shape,v1,v2";

/// Rows for one parameter set, without header, each prefixed by `prefix`.
pub(crate) fn param_rows(params: &CalculusParams, prefix: &str) -> Vec<String> {
    let mut rows = Vec::new();
    match params {
        CalculusParams::Bayes(p) => {
            for c in Color::ALL {
                rows.push(format!("{prefix}bayes-prior,{c},,{},", p.prior()[c]));
            }
            for c in Color::ALL {
                for s in Shape::ALL {
                    rows.push(format!("{prefix}bayes,{c},{s},{},", p.likelihood(c)[s]));
                }
            }
        }
        CalculusParams::Cf(p) => {
            for c in Color::ALL {
                for s in Shape::ALL {
                    rows.push(format!("{prefix}cf,{c},{s},{},", p.get(c, s).value()));
                }
            }
        }
        CalculusParams::Ds(p) => {
            for c in Color::ALL {
                for s in Shape::ALL {
                    let iv = p.get(c, s);
                    rows.push(format!("{prefix}ds,{c},{s},{},{}", iv.lower(), iv.upper()));
                }
            }
        }
    }
    rows
}

pub fn write_params_csv(params: &[CalculusParams]) -> String {
    let mut out = String::from(PARAMS_HEADER);
    out.push('\n');
    for p in params {
        for row in param_rows(p, "") {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

#[derive(Default)]
pub(crate) struct ParamAccumulator {
    prior: [Option<f64>; 3],
    bayes: [[Option<f64>; 3]; 3],
    cf: [[Option<f64>; 3]; 3],
    ds: [[Option<(f64, f64)>; 3]; 3],
    seen: BTreeMap<Calculus, ()>,
}

fn bad(line: usize, msg: impl Into<String>) -> CalculusError {
    CalculusError::InvalidParams(format!("params csv line {line}: {}", msg.into()))
}

impl ParamAccumulator {
    /// Consume `calculus,color,shape,v1,v2` fields.
    pub(crate) fn push(&mut self, line: usize, fields: &[&str]) -> Result<(), CalculusError> {
        if fields.len() != 5 {
            return Err(bad(line, format!("expected 5 fields, found {}", fields.len())));
        }
        let color: Color = fields[1].parse().map_err(|e: String| bad(line, e))?;
        let num = |f: &str| -> Result<f64, CalculusError> {
            f.trim()
                .parse::<f64>()
                .map_err(|_| bad(line, format!("`{f}` is not a number")))
        };
        let slot_err = || bad(line, "duplicate entry");
        if fields[0] == "bayes-prior" {
            self.seen.insert(Calculus::Bayes, ());
            if self.prior[color.index()].replace(num(fields[3])?).is_some() {
                return Err(slot_err());
            }
            return Ok(());
        }
        let calculus: Calculus = fields[0].parse().map_err(|e: String| bad(line, e))?;
        let shape: Shape = fields[2].parse().map_err(|e: String| bad(line, e))?;
        let (c, s) = (color.index(), shape.index());
        self.seen.insert(calculus, ());
        let dup = match calculus {
            Calculus::Bayes => self.bayes[c][s].replace(num(fields[3])?).is_some(),
            Calculus::Cf => self.cf[c][s].replace(num(fields[3])?).is_some(),
            Calculus::Ds => self.ds[c][s]
                .replace((num(fields[3])?, num(fields[4])?))
                .is_some(),
        };
        if dup {
            return Err(slot_err());
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<Vec<CalculusParams>, CalculusError> {
        let missing = |what: &str| CalculusError::InvalidParams(format!("missing {what} entries"));
        let mut out = Vec::new();
        for calculus in self.seen.keys() {
            match calculus {
                Calculus::Bayes => {
                    let prior = fill(self.prior).ok_or_else(|| missing("bayes-prior"))?;
                    let lik = fill2(self.bayes).ok_or_else(|| missing("bayes"))?;
                    out.push(CalculusParams::Bayes(BayesParams::new(prior, lik)?));
                }
                Calculus::Cf => {
                    let cf = fill2(self.cf).ok_or_else(|| missing("cf"))?;
                    out.push(CalculusParams::Cf(CfParams::from_values(cf)?));
                }
                Calculus::Ds => {
                    let ds = fill2(self.ds).ok_or_else(|| missing("ds"))?;
                    let mut ivs = [[BeliefInterval::new(0.0, 1.0)?; 3]; 3];
                    for (row, vals) in ivs.iter_mut().zip(ds) {
                        for (slot, (l, u)) in row.iter_mut().zip(vals) {
                            *slot = BeliefInterval::new(l, u)?;
                        }
                    }
                    out.push(CalculusParams::Ds(DsParams::new(ivs)?));
                }
            }
        }
        Ok(out)
    }
}

fn fill<T: Copy>(xs: [Option<T>; 3]) -> Option<[T; 3]> {
    Some([xs[0]?, xs[1]?, xs[2]?])
}

fn fill2<T: Copy>(xs: [[Option<T>; 3]; 3]) -> Option<[[T; 3]; 3]> {
    Some([fill(xs[0])?, fill(xs[1])?, fill(xs[2])?])
}

/// Parse a parameter file; returns one entry per calculus present, in
/// bayes, cf, ds order.
pub fn read_params_csv(text: &str) -> Result<Vec<CalculusParams>, CalculusError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == PARAMS_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{PARAMS_HEADER}`"))),
    }
    let mut acc = ParamAccumulator::default();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        acc.push(i + 1, &fields)?;
    }
    acc.finish()
}
