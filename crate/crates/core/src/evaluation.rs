//! Comparators run against expert systems: pairwise reversal questions,
//! single-block guessing, and bag diagnosis from growing shape samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockworld::{Color, ContingencyTable, Distribution3, DomainError, PriorMode, Shape};
use crate::calculi::{
    bayes_posterior, cf_aggregate, ds_aggregate, rank_bayes, rank_cf, rank_ds, Calculus,
    CalculusError, CalculusParams, Ranking,
};
use crate::experts::ElicitationReport;
use crate::rng::RandomStream;

/// True conditionals closer than this are a tie and are not asked about.
pub const REVERSAL_TIE_TOLERANCE: f64 = 1e-9;

/// Default number of bags per (system, sample size).
pub const DEFAULT_REPLICATIONS: usize = 10_000;

/// Sample sizes of the bag-diagnosis experiment.
pub const DEFAULT_BAG_SIZES: [usize; 9] = [2, 3, 4, 5, 7, 10, 20, 40, 80];

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no simulated blocks of shape {0}; raise the replication count")]
    NoSamples(Shape),
}

/// An elicited parameter set wired to its calculus's aggregation and
/// ranking rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSystem {
    params: CalculusParams,
}

impl ExpertSystem {
    pub fn new(params: CalculusParams) -> Self {
        Self { params }
    }

    pub fn from_report(report: &ElicitationReport, calculus: Calculus) -> Self {
        let params = match calculus {
            Calculus::Bayes => CalculusParams::Bayes(report.bayes.clone()),
            Calculus::Cf => CalculusParams::Cf(report.cf.clone()),
            Calculus::Ds => CalculusParams::Ds(report.ds.clone()),
        };
        Self { params }
    }

    pub fn calculus(&self) -> Calculus {
        self.params.calculus()
    }

    pub fn params(&self) -> &CalculusParams {
        &self.params
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemDecision {
    pub ranking: Ranking,
    /// Set when Bayesian evidence was impossible under every color and the
    /// ranking fell back to the prior.
    pub impossible_evidence: bool,
}

pub fn system_ranking(
    system: &ExpertSystem,
    evidence: &[Shape],
) -> Result<SystemDecision, CalculusError> {
    let decided = |ranking| SystemDecision {
        ranking,
        impossible_evidence: false,
    };
    match &system.params {
        CalculusParams::Bayes(p) => match bayes_posterior(p, evidence) {
            Ok(post) => Ok(decided(rank_bayes(&post))),
            Err(CalculusError::ImpossibleEvidence { prior }) => Ok(SystemDecision {
                ranking: rank_bayes(&prior),
                impossible_evidence: true,
            }),
            Err(e) => Err(e),
        },
        CalculusParams::Cf(p) => Ok(decided(rank_cf(&cf_aggregate(p, evidence)?))),
        CalculusParams::Ds(p) => Ok(decided(rank_ds(&ds_aggregate(p, evidence)?))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReversalScore {
    /// Non-tied questions.
    pub asked: usize,
    pub correct: usize,
    /// Questions skipped because the true probabilities tie.
    pub ties: usize,
}

impl ReversalScore {
    /// `correct / asked`; `None` when nothing was asked.
    pub fn fraction(&self) -> Option<f64> {
        (self.asked > 0).then(|| self.correct as f64 / self.asked as f64)
    }

    /// Counts tied questions too, each worth half a point.
    pub fn fraction_including_ties(&self) -> Option<f64> {
        let total = self.asked + self.ties;
        (total > 0).then(|| (self.correct as f64 + 0.5 * self.ties as f64) / total as f64)
    }
}

/// Ask "given this shape, is color x more likely than color y?" for every
/// shape and color pair, answering from the system's single-evidence ranking.
pub fn reversal_test(
    system: &ExpertSystem,
    truth: &ContingencyTable,
) -> Result<ReversalScore, EvaluationError> {
    let mut score = ReversalScore::default();
    for shape in Shape::ALL {
        if truth.row_total(shape) == 0 {
            continue;
        }
        let p = truth.color_given_shape(shape)?;
        let ranking = system_ranking(system, &[shape])?.ranking;
        for (i, &a) in Color::ALL.iter().enumerate() {
            for &b in &Color::ALL[i + 1..] {
                let diff = p[a] - p[b];
                if diff.abs() <= REVERSAL_TIE_TOLERANCE {
                    score.ties += 1;
                    continue;
                }
                score.asked += 1;
                let (likelier, other) = if diff > 0.0 { (a, b) } else { (b, a) };
                if ranking.prefers(likelier, other) {
                    score.correct += 1;
                }
            }
        }
    }
    Ok(score)
}

/// Expected number of guesses to name a color drawn from `truth` when
/// guessing in `ranking` order.
pub fn expected_guesses(ranking: &Ranking, truth: &Distribution3) -> f64 {
    Color::ALL
        .iter()
        .map(|&c| truth[c] * ranking.position(c) as f64)
        .sum()
}

fn guess_std(ranking: &Ranking, truth: &Distribution3) -> f64 {
    let mean = expected_guesses(ranking, truth);
    let second: f64 = Color::ALL
        .iter()
        .map(|&c| truth[c] * (ranking.position(c) as f64).powi(2))
        .sum();
    (second - mean * mean).max(0.0).sqrt()
}

/// Mean and spread of guesses for one shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessStat {
    pub mean: f64,
    /// Per-block standard deviation of the guess count.
    pub std: f64,
    /// Simulated blocks; `None` for analytic values.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessingReport {
    pub per_shape: [GuessStat; 3],
}

impl GuessingReport {
    pub fn get(&self, shape: Shape) -> GuessStat {
        self.per_shape[shape.index()]
    }

    pub fn means(&self) -> [f64; 3] {
        self.per_shape.map(|s| s.mean)
    }
}

/// The best possible guessing: each shape's colors in true-probability order.
pub fn optimal_guessing(truth: &ContingencyTable) -> Result<GuessingReport, EvaluationError> {
    let mut per_shape = [GuessStat {
        mean: 0.0,
        std: 0.0,
        samples: None,
    }; 3];
    for shape in Shape::ALL {
        let p = truth.color_given_shape(shape)?;
        let ranking = rank_bayes(&p);
        per_shape[shape.index()] = GuessStat {
            mean: expected_guesses(&ranking, &p),
            std: guess_std(&ranking, &p),
            samples: None,
        };
    }
    Ok(GuessingReport { per_shape })
}

pub enum GuessingMode<'a> {
    Analytic,
    MonteCarlo {
        replications: usize,
        stream: &'a mut RandomStream,
    },
}

/// Guess-until-correct on single blocks, either in expectation against the
/// true conditionals or by simulating `replications` blocks.
pub fn guessing_task(
    system: &ExpertSystem,
    truth: &ContingencyTable,
    mode: GuessingMode<'_>,
) -> Result<GuessingReport, EvaluationError> {
    let mut rankings = Vec::with_capacity(3);
    for shape in Shape::ALL {
        rankings.push(system_ranking(system, &[shape])?.ranking);
    }
    let mut per_shape = [GuessStat {
        mean: 0.0,
        std: 0.0,
        samples: None,
    }; 3];
    match mode {
        GuessingMode::Analytic => {
            for shape in Shape::ALL {
                let p = truth.color_given_shape(shape)?;
                let r = &rankings[shape.index()];
                per_shape[shape.index()] = GuessStat {
                    mean: expected_guesses(r, &p),
                    std: guess_std(r, &p),
                    samples: None,
                };
            }
        }
        GuessingMode::MonteCarlo {
            replications,
            stream,
        } => {
            if replications == 0 {
                return Err(EvaluationError::InvalidArgument(
                    "replications must be at least 1".into(),
                ));
            }
            let mut sum = [0u64; 3];
            let mut sum_sq = [0u64; 3];
            let mut n = [0usize; 3];
            for _ in 0..replications {
                let (shape, color) = truth.sample_block(stream);
                let g = rankings[shape.index()].position(color) as u64;
                sum[shape.index()] += g;
                sum_sq[shape.index()] += g * g;
                n[shape.index()] += 1;
            }
            for shape in Shape::ALL {
                let i = shape.index();
                if n[i] == 0 {
                    return Err(EvaluationError::NoSamples(shape));
                }
                per_shape[i] = sample_stat(sum[i], sum_sq[i], n[i]);
            }
        }
    }
    Ok(GuessingReport { per_shape })
}

fn sample_stat(sum: u64, sum_sq: u64, n: usize) -> GuessStat {
    let nf = n as f64;
    let mean = sum as f64 / nf;
    let var = if n > 1 {
        ((sum_sq as f64 - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    GuessStat {
        mean,
        std: var.sqrt(),
        samples: Some(n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BagCurvePoint {
    pub sample_size: usize,
    pub mean_guesses: f64,
    /// Per-bag standard deviation of the guess count.
    pub std_guesses: f64,
    pub replications: usize,
    /// Bags whose aggregation hit total conflict (Dempster) or a +1/−1
    /// contradiction (certainty factors) and fell back to the fixed order.
    pub conflicts: usize,
    /// Bags whose Bayesian evidence was impossible and fell back to the prior.
    pub impossible: usize,
}

impl BagCurvePoint {
    /// Monte Carlo standard error of `mean_guesses`.
    pub fn standard_error(&self) -> f64 {
        self.std_guesses / (self.replications as f64).sqrt()
    }
}

struct BagOutcome {
    guesses: u8,
    conflict: bool,
    impossible: bool,
}

/// Diagnose bags from shape samples of each size. The guess count of a bag
/// is the position of its true color in the system's final ranking.
///
/// Bag `r` of size `k` draws from `stream.derive_path(&[k, r])`, so results
/// do not depend on thread scheduling or on which other sizes are run.
pub fn bag_experiment(
    system: &ExpertSystem,
    truth: &ContingencyTable,
    sizes: &[usize],
    replications: usize,
    prior_mode: PriorMode,
    stream: &RandomStream,
) -> Result<Vec<BagCurvePoint>, EvaluationError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(EvaluationError::InvalidArgument(format!(
            "sample sizes must be non-empty and positive, got {sizes:?}"
        )));
    }
    if replications == 0 {
        return Err(EvaluationError::InvalidArgument(
            "replications must be at least 1".into(),
        ));
    }
    sizes
        .iter()
        .map(|&size| {
            let outcomes = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let mut s = stream.derive_path(&[size as u64, r as u64]);
                    let bag = truth.sample_bag(size, prior_mode, &mut s)?;
                    let outcome = match system_ranking(system, &bag.shapes) {
                        Ok(d) => BagOutcome {
                            guesses: d.ranking.position(bag.true_color) as u8,
                            conflict: false,
                            impossible: d.impossible_evidence,
                        },
                        Err(CalculusError::TotalConflict { .. } | CalculusError::Contradiction) => {
                            BagOutcome {
                                guesses: Ranking::from_scores([0.0; 3]).position(bag.true_color)
                                    as u8,
                                conflict: true,
                                impossible: false,
                            }
                        }
                        Err(e) => return Err(EvaluationError::from(e)),
                    };
                    Ok(outcome)
                })
                .collect::<Result<Vec<_>, EvaluationError>>()?;

            let (mut sum, mut sum_sq, mut conflicts, mut impossible) = (0u64, 0u64, 0, 0);
            for o in &outcomes {
                let g = o.guesses as u64;
                sum += g;
                sum_sq += g * g;
                conflicts += o.conflict as usize;
                impossible += o.impossible as usize;
            }
            let stat = sample_stat(sum, sum_sq, replications);
            Ok(BagCurvePoint {
                sample_size: size,
                mean_guesses: stat.mean,
                std_guesses: stat.std,
                replications,
                conflicts,
                impossible,
            })
        })
        .collect()
}

/// Expected guesses when the three colors are tried in random order.
pub fn chance_baseline() -> f64 {
    (1.0 + 2.0 + 3.0) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::{BayesParams, CfParams, DsParams};
    use crate::experts::{elicit, ExpertModel};
    use Color::*;

    fn table() -> ContingencyTable {
        ContingencyTable::default_table()
    }

    fn oracle_systems() -> Vec<ExpertSystem> {
        let report = elicit(&ExpertModel::Oracle, &table(), &mut RandomStream::new(0)).unwrap();
        Calculus::ALL
            .iter()
            .map(|&c| ExpertSystem::from_report(&report, c))
            .collect()
    }

    #[test]
    fn oracle_rankings_per_calculus() {
        let systems = oracle_systems();
        let bayes = system_ranking(&systems[0], &[Shape::Circle]).unwrap();
        assert_eq!(bayes.ranking.order(), [Green, Gold, Red]);
        assert!(!bayes.impossible_evidence);

        let ds = system_ranking(&systems[2], &[Shape::Square]).unwrap();
        assert_eq!(ds.ranking.order(), [Red, Gold, Green]);

        // Triangles leave the posterior at 1/3 each, but against unequal
        // priors that is a belief change: down for green, up for red and gold.
        let cf = system_ranking(&systems[1], &[Shape::Triangle]).unwrap();
        let scores = cf.ranking.scores();
        assert!(scores[0] < 0.0 && scores[1] > 0.0 && scores[2] > scores[1]);
        assert_eq!(cf.ranking.order(), [Gold, Red, Green]);
    }

    #[test]
    fn zero_cf_params_rank_in_color_order() {
        let sys = ExpertSystem::new(CalculusParams::Cf(
            CfParams::from_values([[0.0; 3]; 3]).unwrap(),
        ));
        let r = system_ranking(&sys, &[Shape::Triangle]).unwrap().ranking;
        assert_eq!(r.order(), [Green, Red, Gold]);
        assert_eq!(r.scores(), [0.0; 3]);
    }

    #[test]
    fn oracle_reversal_is_perfect() {
        for sys in oracle_systems() {
            let s = reversal_test(&sys, &table()).unwrap();
            assert_eq!((s.asked, s.correct, s.ties), (6, 6, 3), "{:?}", sys.calculus());
            assert_eq!(s.fraction(), Some(1.0));
            assert_eq!(s.fraction_including_ties(), Some((6.0 + 1.5) / 9.0));
        }
    }

    #[test]
    fn ignorant_system_reversal_is_deterministic() {
        // Uniform params rank every shape green, red, gold.
        let sys = ExpertSystem::new(CalculusParams::Ds(
            DsParams::from_points([[1.0 / 3.0; 3]; 3]).unwrap(),
        ));
        let s = reversal_test(&sys, &table()).unwrap();
        // Square: R>G wrong, G<D wrong, R>D right. Circle: G>R right, G>D right, D>R wrong.
        assert_eq!((s.asked, s.correct), (6, 3));
        assert_eq!(reversal_test(&sys, &table()).unwrap(), s);
    }

    #[test]
    fn expected_guess_arithmetic() {
        let square = table().color_given_shape(Shape::Square).unwrap();
        let best = Ranking::from_scores([0.0, 1.0, 0.5]);
        assert_eq!(best.order(), [Red, Gold, Green]);
        assert!((expected_guesses(&best, &square) - 4.0 / 3.0).abs() < 1e-12);
        let worst = Ranking::from_scores([1.0, 0.0, 0.5]);
        assert!((expected_guesses(&worst, &square) - 8.0 / 3.0).abs() < 1e-12);
        let uniform = Distribution3::uniform();
        assert!((expected_guesses(&worst, &uniform) - 2.0).abs() < 1e-12);
        assert_eq!(chance_baseline(), 2.0);
    }

    #[test]
    fn optimal_for_special_tables() {
        let u = optimal_guessing(&ContingencyTable::uniform(4)).unwrap();
        assert!(u.means().iter().all(|m| (m - 2.0).abs() < 1e-12));
        let det = ContingencyTable::new([[0, 5, 0], [3, 0, 0], [0, 0, 9]]).unwrap();
        let d = optimal_guessing(&det).unwrap();
        assert_eq!(d.means(), [1.0; 3]);
        assert!(d.per_shape.iter().all(|s| s.std == 0.0));
    }

    #[test]
    fn circle_ranking_green_gold_red_is_optimal() {
        let circle = table().color_given_shape(Shape::Circle).unwrap();
        let r = Ranking::from_scores([3.0, 1.0, 2.0]);
        assert!((expected_guesses(&r, &circle) - 13.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn truth_sorted_ranking_is_minimal_over_permutations() {
        let perms = [
            [0.0, 1.0, 2.0],
            [0.0, 2.0, 1.0],
            [1.0, 0.0, 2.0],
            [1.0, 2.0, 0.0],
            [2.0, 0.0, 1.0],
            [2.0, 1.0, 0.0],
        ];
        let opt = optimal_guessing(&table()).unwrap();
        for shape in Shape::ALL {
            let p = table().color_given_shape(shape).unwrap();
            for perm in perms {
                let e = expected_guesses(&Ranking::from_scores(perm), &p);
                assert!((1.0..=3.0).contains(&e));
                assert!(opt.get(shape).mean <= e + 1e-12);
            }
        }
    }

    #[test]
    fn impossible_bayes_evidence_falls_back_to_prior() {
        let p = BayesParams::new(
            [0.2, 0.5, 0.3],
            [[0.0, 0.5, 0.5], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]],
        )
        .unwrap();
        let sys = ExpertSystem::new(CalculusParams::Bayes(p));
        let d = system_ranking(&sys, &[Shape::Square]).unwrap();
        assert!(d.impossible_evidence);
        assert_eq!(d.ranking.order(), [Red, Gold, Green]);
    }

    #[test]
    fn cf_contradiction_counts_as_conflict_in_bags() {
        // +1 for red on circles, -1 for red on squares.
        let mut v = [[0.0; 3]; 3];
        v[Red.index()][Shape::Circle.index()] = 1.0;
        v[Red.index()][Shape::Square.index()] = -1.0;
        let sys = ExpertSystem::new(CalculusParams::Cf(CfParams::from_values(v).unwrap()));
        let pts = bag_experiment(&sys, &table(), &[20], 200, PriorMode::Marginal, &RandomStream::new(1)).unwrap();
        assert!(pts[0].conflicts > 0);
    }

    #[test]
    fn bag_arguments_are_validated() {
        let sys = &oracle_systems()[0];
        let s = RandomStream::new(0);
        assert!(bag_experiment(sys, &table(), &[], 10, PriorMode::Marginal, &s).is_err());
        assert!(bag_experiment(sys, &table(), &[0], 10, PriorMode::Marginal, &s).is_err());
        assert!(bag_experiment(sys, &table(), &[1], 0, PriorMode::Marginal, &s).is_err());
    }

    #[test]
    fn bag_sizes_are_independent_of_the_size_list() {
        let sys = &oracle_systems()[1];
        let s = RandomStream::new(9);
        let alone = bag_experiment(sys, &table(), &[5], 500, PriorMode::Marginal, &s).unwrap();
        let mixed = bag_experiment(sys, &table(), &[2, 5], 500, PriorMode::Marginal, &s).unwrap();
        assert_eq!(alone[0], mixed[1]);
    }
}
