//! Classical Bayesian fusion under conditional independence of shapes
//! given color.

use serde::{Deserialize, Serialize};

use super::{CalculusError, PARAM_TOLERANCE};
use crate::blockworld::{
    normalize3, Color, ContingencyTable, Distribution3, DomainError, Shape, ShapeDistribution,
};

/// Prior over colors and per-color shape likelihoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesParams {
    prior: Distribution3,
    likelihood: [ShapeDistribution; 3],
}

fn invalid(e: DomainError) -> CalculusError {
    CalculusError::InvalidParams(e.to_string())
}

impl BayesParams {
    /// Validates that the prior and every likelihood sum to one within 1e-9.
    pub fn new(prior: [f64; 3], likelihood: [[f64; 3]; 3]) -> Result<Self, CalculusError> {
        let prior = Distribution3::with_tolerance(prior, PARAM_TOLERANCE).map_err(invalid)?;
        let mut lik = [ShapeDistribution::uniform(); 3];
        for (slot, row) in lik.iter_mut().zip(likelihood) {
            *slot = ShapeDistribution::with_tolerance(row, PARAM_TOLERANCE).map_err(invalid)?;
        }
        Ok(Self {
            prior,
            likelihood: lik,
        })
    }

    /// Rescales non-summing estimates. A likelihood row with no mass at all
    /// is replaced by the uniform distribution.
    pub fn repaired(prior: [f64; 3], likelihood: [[f64; 3]; 3]) -> Result<Self, CalculusError> {
        let prior = Distribution3::normalized(prior).map_err(invalid)?;
        let mut lik = [ShapeDistribution::uniform(); 3];
        for (slot, row) in lik.iter_mut().zip(likelihood) {
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(CalculusError::InvalidParams(format!(
                    "negative likelihood in {row:?}"
                )));
            }
            if let Some(p) = normalize3(row) {
                *slot = ShapeDistribution::new(p).map_err(invalid)?;
            }
        }
        Ok(Self {
            prior,
            likelihood: lik,
        })
    }

    /// Exact parameters read off a table.
    pub fn from_table(table: &ContingencyTable) -> Result<Self, CalculusError> {
        let mut lik = [ShapeDistribution::uniform(); 3];
        for c in Color::ALL {
            lik[c.index()] = table.shape_given_color(c).map_err(invalid)?;
        }
        Ok(Self {
            prior: table.color_prior(),
            likelihood: lik,
        })
    }

    pub fn prior(&self) -> &Distribution3 {
        &self.prior
    }

    /// Estimated P(shape | color).
    pub fn likelihood(&self, color: Color) -> &ShapeDistribution {
        &self.likelihood[color.index()]
    }

    pub fn likelihood_rows(&self) -> [[f64; 3]; 3] {
        self.likelihood.map(|d| d.probs())
    }
}

/// Posterior over colors after observing `evidence`. The running posterior
/// is renormalized after every observation so long samples never underflow.
pub fn bayes_posterior(
    params: &BayesParams,
    evidence: &[Shape],
) -> Result<Distribution3, CalculusError> {
    let mut post = params.prior.probs();
    for &shape in evidence {
        let weights = Color::ALL.map(|c| post[c.index()] * params.likelihood(c)[shape]);
        post = normalize3(weights).ok_or(CalculusError::ImpossibleEvidence {
            prior: params.prior,
        })?;
    }
    Distribution3::with_tolerance(post, PARAM_TOLERANCE).map_err(invalid)
}
