//! The three evidence representation and aggregation engines plus the
//! ranking layer every comparator decides with.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockworld::{Color, Distribution3};

pub mod bayes;
pub mod cf;
pub mod ds;
pub mod params_csv;
pub mod ranking;

pub use bayes::{bayes_posterior, BayesParams};
pub use cf::{cf_aggregate, cf_combine, cf_from_probabilities, CfParams, CfValue};
pub use ds::{
    dempster_combine, ds_aggregate, mass_from_intervals, BeliefInterval, ColorSet, DsParams,
    IntervalMode, MassFunction,
};
pub use params_csv::{read_params_csv, write_params_csv, PARAMS_HEADER};
pub use ranking::{rank_bayes, rank_cf, rank_ds, Ranking};

/// Absolute tolerance for float comparisons in the engines.
pub const TOLERANCE: f64 = 1e-12;

/// Tolerance on elicited parameter sums.
pub const PARAM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("evidence has zero probability under every color")]
    ImpossibleEvidence { prior: Distribution3 },
    #[error("cannot combine certainty factors +1 and -1")]
    Contradiction,
    #[error("certainty factor undefined for prior {prior} and posterior {posterior}")]
    UndefinedCf { prior: f64, posterior: f64 },
    #[error("certainty factor {0} outside [-1, 1]")]
    CfOutOfRange(f64),
    #[error("invalid belief interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("invalid elicitation for {color}: {reason}")]
    InvalidElicitation { color: Color, reason: String },
    #[error("invalid mass function: {0}")]
    InvalidMass(String),
    #[error("total conflict between mass functions (K = {conflict})")]
    TotalConflict { conflict: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Bayes,
    Cf,
    Ds,
}

impl Calculus {
    pub const ALL: [Calculus; 3] = [Calculus::Bayes, Calculus::Cf, Calculus::Ds];

    pub fn name(self) -> &'static str {
        match self {
            Calculus::Bayes => "bayes",
            Calculus::Cf => "cf",
            Calculus::Ds => "ds",
        }
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Calculus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bayes" | "bayesian" => Ok(Calculus::Bayes),
            "cf" | "mycin" => Ok(Calculus::Cf),
            "ds" | "dempster-shafer" | "dempster" => Ok(Calculus::Ds),
            other => Err(format!("unknown calculus `{other}`")),
        }
    }
}

/// One calculus's elicited parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "calculus", rename_all = "lowercase")]
pub enum CalculusParams {
    Bayes(BayesParams),
    Cf(CfParams),
    Ds(DsParams),
}

impl CalculusParams {
    pub fn calculus(&self) -> Calculus {
        match self {
            CalculusParams::Bayes(_) => Calculus::Bayes,
            CalculusParams::Cf(_) => Calculus::Cf,
            CalculusParams::Ds(_) => Calculus::Ds,
        }
    }
}
