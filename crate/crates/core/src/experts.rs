//! Simulated experts standing in for human subjects.
//!
//! Every expert holds a set of probability estimates (prior, P(shape|color)
//! and P(color|shape)) and reports all three calculi's parameters from that
//! one state. Distortions act on the probabilities; certainty factors and
//! intervals are derived from the distorted values afterwards.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockworld::{
    normalize3, Color, ContingencyTable, DomainError, Shape, TrialRecord,
};
use crate::calculi::{
    cf_from_probabilities, BayesParams, BeliefInterval, CalculusError, CalculusParams, CfParams,
    CfValue, DsParams, Ranking,
};
use crate::rng::RandomStream;

/// Trials in one training block; also the window scored by
/// [`simulate_training_performance`].
pub const TRIALS_PER_SET: usize = 81;

/// Default elicitation checkpoints over a 324-trial session.
pub const DEFAULT_CHECKPOINTS: [usize; 4] = [81, 162, 243, 324];

/// Probabilities are clamped into `[CLAMP, 1 - CLAMP]` before the logit.
pub const LOGIT_CLAMP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExpertError {
    #[error("invalid expert configuration: {0}")]
    InvalidConfig(String),
    #[error("frequency learner has no observed trials")]
    NoObservations,
    #[error("invalid checkpoints: {0}")]
    InvalidCheckpoints(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpertModel {
    /// Reports the table's exact values.
    Oracle,
    /// Gaussian noise of standard deviation `sigma` in logit space.
    Noisy { sigma: f64 },
    /// Shrinks conditionals toward uniform: `lambda * p + (1 - lambda) / 3`.
    Conservative { lambda: f64 },
    /// Empirical frequencies from observed trials; intervals from the
    /// imprecise Dirichlet model with prior strength `strength`.
    FrequencyLearner {
        strength: f64,
        observed: Vec<TrialRecord>,
    },
}

impl ExpertModel {
    pub fn noisy(sigma: f64) -> Result<Self, ExpertError> {
        let m = ExpertModel::Noisy { sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn conservative(lambda: f64) -> Result<Self, ExpertError> {
        let m = ExpertModel::Conservative { lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn learner(strength: f64, observed: Vec<TrialRecord>) -> Result<Self, ExpertError> {
        let m = ExpertModel::FrequencyLearner { strength, observed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ExpertError> {
        match *self {
            ExpertModel::Oracle => Ok(()),
            ExpertModel::Noisy { sigma } if sigma.is_finite() && sigma >= 0.0 => Ok(()),
            ExpertModel::Noisy { sigma } => Err(ExpertError::InvalidConfig(format!(
                "noise sigma must be >= 0, got {sigma}"
            ))),
            ExpertModel::Conservative { lambda } if (0.0..=1.0).contains(&lambda) => Ok(()),
            ExpertModel::Conservative { lambda } => Err(ExpertError::InvalidConfig(format!(
                "shrinkage lambda must lie in [0, 1], got {lambda}"
            ))),
            ExpertModel::FrequencyLearner { strength, .. } if strength > 0.0 && strength.is_finite() => Ok(()),
            ExpertModel::FrequencyLearner { strength, .. } => Err(ExpertError::InvalidConfig(
                format!("learner strength must be > 0, got {strength}"),
            )),
        }
    }
}

/// Parameters elicited from one expert state.
#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationReport {
    /// Trials seen by a learner; `None` for table-derived experts.
    pub checkpoint: Option<usize>,
    pub bayes: BayesParams,
    pub cf: CfParams,
    pub ds: DsParams,
}

impl ElicitationReport {
    pub fn params(&self) -> [CalculusParams; 3] {
        [
            CalculusParams::Bayes(self.bayes.clone()),
            CalculusParams::Cf(self.cf.clone()),
            CalculusParams::Ds(self.ds.clone()),
        ]
    }
}

/// Serialize reports in the parameter layout with a leading `checkpoint`
/// column (empty for table-derived experts).
pub fn reports_to_csv(reports: &[ElicitationReport]) -> String {
    let mut out = format!("checkpoint,{}\n", crate::calculi::PARAMS_HEADER);
    for r in reports {
        let prefix = match r.checkpoint {
            Some(n) => format!("{n},"),
            None => ",".to_string(),
        };
        for p in r.params() {
            for row in crate::calculi::params_csv::param_rows(&p, &prefix) {
                out.push_str(&row);
                out.push('\n');
            }
        }
    }
    out
}

/// An expert's internal probability estimates.
#[derive(Debug, Clone, PartialEq)]
struct Estimates {
    prior: [f64; 3],
    /// `[color][shape]`, P(shape | color).
    likelihood: [[f64; 3]; 3],
    /// `[shape][color]`, P(color | shape).
    conditional: [[f64; 3]; 3],
}

impl Estimates {
    fn from_table(table: &ContingencyTable) -> Result<Self, DomainError> {
        let mut likelihood = [[0.0; 3]; 3];
        for c in Color::ALL {
            likelihood[c.index()] = table.shape_given_color(c)?.probs();
        }
        let mut conditional = [[0.0; 3]; 3];
        for s in Shape::ALL {
            conditional[s.index()] = table.color_given_shape(s)?.probs();
        }
        Ok(Self {
            prior: table.color_prior().probs(),
            likelihood,
            conditional,
        })
    }

    fn bayes(&self) -> Result<BayesParams, CalculusError> {
        BayesParams::repaired(self.prior, self.likelihood)
    }

    fn cf(&self) -> Result<CfParams, CalculusError> {
        let mut cf = [[CfValue::ZERO; 3]; 3];
        for c in Color::ALL {
            for s in Shape::ALL {
                cf[c.index()][s.index()] = cf_from_probabilities(
                    self.prior[c.index()],
                    self.conditional[s.index()][c.index()],
                )?;
            }
        }
        Ok(CfParams::new(cf))
    }

    fn point_intervals(&self) -> Result<DsParams, CalculusError> {
        let mut p = [[0.0; 3]; 3];
        for c in Color::ALL {
            for s in Shape::ALL {
                p[c.index()][s.index()] = self.conditional[s.index()][c.index()];
            }
        }
        DsParams::from_points(p)
    }

    fn report(&self, checkpoint: Option<usize>, ds: DsParams) -> Result<ElicitationReport, ExpertError> {
        Ok(ElicitationReport {
            checkpoint,
            bayes: self.bayes()?,
            cf: self.cf()?,
            ds,
        })
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logit-space perturbation of one distribution. Exact zeros stay zero.
fn perturb(p: [f64; 3], noise: &Normal<f64>, stream: &mut RandomStream) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, &x) in out.iter_mut().zip(&p) {
        // Draw unconditionally so the stream position does not depend on the table.
        let z = noise.sample(stream);
        if x > 0.0 {
            *o = logistic(logit(x.clamp(LOGIT_CLAMP, 1.0 - LOGIT_CLAMP)) + z);
        }
    }
    normalize3(out).unwrap_or(p)
}

fn shrink(p: [f64; 3], lambda: f64) -> [f64; 3] {
    p.map(|x| lambda * x + (1.0 - lambda) / 3.0)
}

/// Elicit all three parameter sets from `expert`.
///
/// Only the noisy expert draws from `stream`; the frequency learner ignores
/// `table` and reads its own observations.
pub fn elicit(
    expert: &ExpertModel,
    table: &ContingencyTable,
    stream: &mut RandomStream,
) -> Result<ElicitationReport, ExpertError> {
    expert.validate()?;
    match expert {
        ExpertModel::Oracle => {
            let est = Estimates::from_table(table)?;
            let ds = est.point_intervals()?;
            est.report(None, ds)
        }
        ExpertModel::Noisy { sigma } => {
            let mut est = Estimates::from_table(table)?;
            if *sigma > 0.0 {
                let noise = Normal::new(0.0, *sigma)
                    .map_err(|e| ExpertError::InvalidConfig(e.to_string()))?;
                est.prior = perturb(est.prior, &noise, stream);
                for row in est.likelihood.iter_mut() {
                    *row = perturb(*row, &noise, stream);
                }
                for row in est.conditional.iter_mut() {
                    *row = perturb(*row, &noise, stream);
                }
            }
            let ds = est.point_intervals()?;
            est.report(None, ds)
        }
        ExpertModel::Conservative { lambda } => {
            let mut est = Estimates::from_table(table)?;
            for row in est.likelihood.iter_mut() {
                *row = shrink(*row, *lambda);
            }
            for row in est.conditional.iter_mut() {
                *row = shrink(*row, *lambda);
            }
            let ds = est.point_intervals()?;
            est.report(None, ds)
        }
        ExpertModel::FrequencyLearner { strength, observed } => {
            learner_report(*strength, observed)
        }
    }
}

fn learner_report(strength: f64, observed: &[TrialRecord]) -> Result<ElicitationReport, ExpertError> {
    if observed.is_empty() {
        return Err(ExpertError::NoObservations);
    }
    let mut counts = [[0u64; 3]; 3];
    for t in observed {
        counts[t.shape.index()][t.color.index()] += 1;
    }
    let n = observed.len() as f64;
    let col = Color::ALL.map(|c| counts.iter().map(|row| row[c.index()]).sum::<u64>());
    let row = Shape::ALL.map(|s| counts[s.index()].iter().sum::<u64>());

    let prior = col.map(|k| k as f64 / n);
    let mut likelihood = [[0.0; 3]; 3];
    for c in Color::ALL {
        if col[c.index()] > 0 {
            for s in Shape::ALL {
                likelihood[c.index()][s.index()] =
                    counts[s.index()][c.index()] as f64 / col[c.index()] as f64;
            }
        }
    }
    let mut conditional = [prior; 3];
    for s in Shape::ALL {
        if row[s.index()] > 0 {
            conditional[s.index()] =
                counts[s.index()].map(|k| k as f64 / row[s.index()] as f64);
        }
    }
    let est = Estimates {
        prior,
        likelihood,
        conditional,
    };

    let placeholder = BeliefInterval::new(0.0, 1.0)?;
    let mut intervals = [[placeholder; 3]; 3];
    for c in Color::ALL {
        for s in Shape::ALL {
            let k = counts[s.index()][c.index()] as f64;
            let denom = row[s.index()] as f64 + strength;
            intervals[c.index()][s.index()] = BeliefInterval::new(k / denom, (k + strength) / denom)?;
        }
    }
    est.report(Some(observed.len()), DsParams::new(intervals)?)
}

/// Run a training session of `n_trials` blocks and elicit the learner at
/// each checkpoint. The learner sees every trial's true color.
pub fn train_learner(
    table: &ContingencyTable,
    n_trials: usize,
    checkpoints: &[usize],
    strength: f64,
    stream: &mut RandomStream,
) -> Result<Vec<ElicitationReport>, ExpertError> {
    if n_trials == 0 {
        return Err(ExpertError::InvalidCheckpoints("n_trials must be positive".into()));
    }
    if checkpoints.is_empty() {
        return Err(ExpertError::InvalidCheckpoints("no checkpoints given".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExpertError::InvalidCheckpoints(format!(
            "{checkpoints:?} is not strictly increasing"
        )));
    }
    if checkpoints[0] == 0 || *checkpoints.last().unwrap() > n_trials {
        return Err(ExpertError::InvalidCheckpoints(format!(
            "{checkpoints:?} must lie in 1..={n_trials}"
        )));
    }
    ExpertModel::learner(strength, Vec::new())?;
    let session = table.sample_session(n_trials, stream);
    checkpoints
        .iter()
        .map(|&cp| learner_report(strength, &session[..cp]))
        .collect()
}

/// Mean guesses per shape over the last 81 trials of a guess-until-correct
/// session in which the guesser orders colors by its running counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPerformance {
    /// `None` when the shape never came up in the scored window.
    pub mean: [Option<f64>; 3],
    pub trials: [usize; 3],
}

impl TrainingPerformance {
    pub fn mean_for(&self, shape: Shape) -> Option<f64> {
        self.mean[shape.index()]
    }
}

pub fn simulate_training_performance(
    table: &ContingencyTable,
    n_trials: usize,
    stream: &mut RandomStream,
) -> Result<TrainingPerformance, ExpertError> {
    if n_trials < TRIALS_PER_SET {
        return Err(ExpertError::InvalidConfig(format!(
            "need at least {TRIALS_PER_SET} trials, got {n_trials}"
        )));
    }
    let scored_from = n_trials - TRIALS_PER_SET + 1;
    let mut counts = [[0u64; 3]; 3];
    let mut sums = [0usize; 3];
    let mut trials = [0usize; 3];
    for t in table.sample_session(n_trials, stream) {
        let s = t.shape.index();
        let ranking = Ranking::from_scores(counts[s].map(|k| k as f64));
        if t.index >= scored_from {
            sums[s] += ranking.position(t.color);
            trials[s] += 1;
        }
        counts[s][t.color.index()] += 1;
    }
    let mean = [0, 1, 2].map(|s| (trials[s] > 0).then(|| sums[s] as f64 / trials[s] as f64));
    Ok(TrainingPerformance { mean, trials })
}

/// Textual expert spec used in configs and output rows:
/// `oracle`, `noisy:<sigma>`, `conservative:<lambda>`, `learner:<strength>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExpertSpec {
    Oracle,
    Noisy { sigma: f64 },
    Conservative { lambda: f64 },
    Learner { strength: f64 },
}

impl ExpertSpec {
    /// Configured model, with an empty observation list for learners.
    pub fn model(&self) -> Result<ExpertModel, ExpertError> {
        match *self {
            ExpertSpec::Oracle => Ok(ExpertModel::Oracle),
            ExpertSpec::Noisy { sigma } => ExpertModel::noisy(sigma),
            ExpertSpec::Conservative { lambda } => ExpertModel::conservative(lambda),
            ExpertSpec::Learner { strength } => {
                ExpertModel::learner(strength, Vec::new())
            }
        }
    }
}

impl fmt::Display for ExpertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpertSpec::Oracle => write!(f, "oracle"),
            ExpertSpec::Noisy { sigma } => write!(f, "noisy:{sigma}"),
            ExpertSpec::Conservative { lambda } => write!(f, "conservative:{lambda}"),
            ExpertSpec::Learner { strength } => write!(f, "learner:{strength}"),
        }
    }
}

impl FromStr for ExpertSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let num = |default: Option<f64>| -> Result<f64, String> {
            match arg {
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| format!("`{a}` is not a number in expert `{s}`")),
                None => default.ok_or_else(|| format!("expert `{s}` needs a parameter")),
            }
        };
        let spec = match kind.to_ascii_lowercase().as_str() {
            "oracle" => ExpertSpec::Oracle,
            "noisy" => ExpertSpec::Noisy { sigma: num(None)? },
            "conservative" => ExpertSpec::Conservative { lambda: num(None)? },
            "learner" => ExpertSpec::Learner {
                strength: num(Some(1.0))?,
            },
            other => return Err(format!("unknown expert kind `{other}`")),
        };
        spec.model().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}
