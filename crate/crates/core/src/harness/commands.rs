//! The `optimal`, `evaluate` and `curve` commands.
//!
//! Random streams are addressed from the base seed by path, so every cell
//! of a sweep is reproducible on its own:
//!
//! | path               | use                                           |
//! |--------------------|-----------------------------------------------|
//! | `[1, e]`           | expert `e`'s elicitation or training session  |
//! | `[2, e, k, c]`     | Monte Carlo guessing, report `k`, calculus `c`|
//! | `[3, e, c]`        | bag experiment for expert `e`, calculus `c`   |

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use super::config::{Comparator, ExperimentConfig, GuessingMethod};
use super::manifest::{sha256_hex, RunManifest};
use super::report::{render_csv, ResultRow, Value};
use super::HarnessError;
use crate::blockworld::{ContingencyTable, Shape};
use crate::calculi::Calculus;
use crate::evaluation::{
    bag_experiment, chance_baseline, guessing_task, optimal_guessing, reversal_test,
    BagCurvePoint, ExpertSystem, GuessingMode,
};
use crate::experts::{
    elicit, simulate_training_performance, train_learner, ElicitationReport, ExpertError,
    ExpertSpec,
};
use crate::rng::RandomStream;

/// What a command produced.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub csv_path: PathBuf,
    pub csv: String,
    pub manifest: RunManifest,
    /// Human-readable remarks printed after the run; never asserted on.
    pub notes: Vec<String>,
}

pub(crate) fn load_table(cfg: &ExperimentConfig) -> Result<ContingencyTable, HarnessError> {
    let table = cfg.table.load()?;
    table
        .verify_totals()
        .map_err(|e| HarnessError::Input(format!("table {}: {e}", cfg.table)))?;
    Ok(table)
}

fn finish(
    command: &str,
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    notes: Vec<String>,
    started: Instant,
) -> Result<CommandOutput, HarnessError> {
    let checksum = cfg.checksum();
    let csv = render_csv(rows, cfg.base_seed, &checksum)?;
    fs::create_dir_all(&cfg.output).map_err(|e| {
        HarnessError::Io(format!("cannot create {}: {e}", cfg.output.display()))
    })?;
    let name = format!("{command}.csv");
    let csv_path = cfg.output.join(&name);
    fs::write(&csv_path, &csv)
        .map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: cfg.base_seed,
        config_checksum: checksum,
        config: cfg.echo(),
        outputs: [(name, sha256_hex(csv.as_bytes()))].into_iter().collect(),
        duration_ms: started.elapsed().as_millis(),
    };
    manifest.write(&cfg.output)?;
    Ok(CommandOutput {
        csv_path,
        csv,
        manifest,
        notes,
    })
}

pub fn optimal_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let table = load_table(cfg)?;
    let report = optimal_guessing(&table)
        .map_err(|e| HarnessError::Input(format!("table {}: {e}", cfg.table)))?;
    let mut rows: Vec<ResultRow> = Shape::ALL
        .iter()
        .map(|&s| {
            let stat = report.get(s);
            ResultRow::new("optimal", "truth", "table")
                .at(s)
                .metric("mean_guesses", Value::Real(stat.mean))
                .std(stat.std)
        })
        .collect();
    rows.push(
        ResultRow::new("chance", "none", "random")
            .at("all")
            .metric("mean_guesses", Value::Real(chance_baseline())),
    );
    Ok(rows)
}

/// Analytic optimum for the configured table.
pub fn cmd_optimal(cfg: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let started = Instant::now();
    let rows = optimal_rows(cfg)?;
    finish("optimal", cfg, &rows, Vec::new(), started)
}

fn expert_reports(
    cfg: &ExperimentConfig,
    table: &ContingencyTable,
    spec: &ExpertSpec,
    stream: &mut RandomStream,
) -> Result<Vec<ElicitationReport>, ExpertError> {
    match spec {
        ExpertSpec::Learner { strength } => {
            train_learner(table, cfg.trials, &cfg.checkpoints, *strength, stream)
        }
        other => Ok(vec![elicit(&other.model()?, table, stream)?]),
    }
}

fn calculus_index(c: Calculus) -> u64 {
    c as u64
}

pub fn evaluate_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let table = load_table(cfg)?;
    let root = RandomStream::new(cfg.base_seed);
    let mut rows = Vec::new();
    for (e, spec) in cfg.experts.iter().enumerate() {
        let label = spec.to_string();
        let expert_path = [1, e as u64];

        if cfg.comparators.contains(&Comparator::Training) {
            if let ExpertSpec::Learner { .. } = spec {
                // Same stream as the learner's session, so this is the same
                // simulated subject.
                let mut s = root.derive_path(&expert_path);
                match simulate_training_performance(&table, cfg.trials, &mut s) {
                    Ok(perf) => {
                        for shape in Shape::ALL {
                            let row = ResultRow::new("training", "none", &label)
                                .at(shape)
                                .checkpoint(Some(cfg.trials))
                                .replications(Some(perf.trials[shape.index()]));
                            rows.push(match perf.mean_for(shape) {
                                Some(m) => row.metric("mean_guesses_last_set", Value::Real(m)),
                                None => row.failed("mean_guesses_last_set", "shape not seen in last set"),
                            });
                        }
                    }
                    Err(err) => rows.push(
                        ResultRow::new("training", "none", &label).failed("mean_guesses_last_set", err),
                    ),
                }
            }
        }

        let reports = match expert_reports(cfg, &table, spec, &mut root.derive_path(&expert_path)) {
            Ok(r) => r,
            Err(err) => {
                for &c in &cfg.calculi {
                    rows.push(ResultRow::new("elicitation", c.name(), &label).failed("elicit", &err));
                }
                continue;
            }
        };
        for (k, report) in reports.iter().enumerate() {
            for &calculus in &cfg.calculi {
                let system = ExpertSystem::from_report(report, calculus);
                let base = |comparator: &str| {
                    ResultRow::new(comparator, calculus.name(), &label).checkpoint(report.checkpoint)
                };
                if cfg.comparators.contains(&Comparator::Reversal) {
                    match reversal_test(&system, &table) {
                        Ok(score) => {
                            let row = base("reversal").at("all");
                            rows.push(match score.fraction() {
                                Some(f) => row.metric("fraction_correct", Value::Real(f)),
                                None => row.failed("fraction_correct", "no untied questions"),
                            });
                            rows.push(
                                base("reversal")
                                    .at("all")
                                    .metric("correct", Value::Count(score.correct as u64)),
                            );
                            rows.push(
                                base("reversal")
                                    .at("all")
                                    .metric("asked", Value::Count(score.asked as u64)),
                            );
                            if let Some(f) = score.fraction_including_ties() {
                                rows.push(
                                    base("reversal")
                                        .at("all")
                                        .metric("fraction_correct_including_ties", Value::Real(f)),
                                );
                            }
                        }
                        Err(err) => rows.push(base("reversal").at("all").failed("fraction_correct", err)),
                    }
                }
                if cfg.comparators.contains(&Comparator::Guessing) {
                    let mut mc_stream = root.derive_path(&[2, e as u64, k as u64, calculus_index(calculus)]);
                    let mode = match cfg.guessing {
                        GuessingMethod::Analytic => GuessingMode::Analytic,
                        GuessingMethod::MonteCarlo => GuessingMode::MonteCarlo {
                            replications: cfg.guessing_replications,
                            stream: &mut mc_stream,
                        },
                    };
                    match guessing_task(&system, &table, mode) {
                        Ok(report) => {
                            for shape in Shape::ALL {
                                let stat = report.get(shape);
                                rows.push(
                                    base("guessing")
                                        .at(shape)
                                        .metric("mean_guesses", Value::Real(stat.mean))
                                        .std(stat.std)
                                        .replications(stat.samples),
                                );
                            }
                        }
                        Err(err) => rows.push(base("guessing").failed("mean_guesses", err)),
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Reversal and single-block guessing for every (expert, checkpoint, calculus).
pub fn cmd_evaluate(cfg: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let started = Instant::now();
    let rows = evaluate_rows(cfg)?;
    finish("evaluate", cfg, &rows, Vec::new(), started)
}

/// Bag-diagnosis curve points for one expert and calculus.
pub type CurveCell = (ExpertSpec, Calculus, Vec<BagCurvePoint>);

pub fn curve_cells(
    cfg: &ExperimentConfig,
) -> Result<(Vec<ResultRow>, Vec<CurveCell>), HarnessError> {
    let table = load_table(cfg)?;
    let root = RandomStream::new(cfg.base_seed);
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (e, spec) in cfg.experts.iter().enumerate() {
        let label = spec.to_string();
        let report = match expert_reports(cfg, &table, spec, &mut root.derive_path(&[1, e as u64])) {
            Ok(mut r) => r.pop().expect("at least one report"),
            Err(err) => {
                for &c in &cfg.calculi {
                    rows.push(ResultRow::new("bag", c.name(), &label).failed("mean_guesses", &err));
                }
                continue;
            }
        };
        for &calculus in &cfg.calculi {
            let system = ExpertSystem::from_report(&report, calculus);
            let stream = root.derive_path(&[3, e as u64, calculus_index(calculus)]);
            match bag_experiment(
                &system,
                &table,
                &cfg.sizes,
                cfg.replications,
                cfg.prior_mode,
                &stream,
            ) {
                Ok(points) => {
                    for p in &points {
                        rows.push(
                            ResultRow::new("bag", calculus.name(), &label)
                                .at(p.sample_size)
                                .metric("mean_guesses", Value::Real(p.mean_guesses))
                                .std(p.std_guesses)
                                .replications(Some(p.replications))
                                .conflicts(p.conflicts)
                                .checkpoint(report.checkpoint),
                        );
                    }
                    cells.push((*spec, calculus, points));
                }
                Err(err) => rows.push(
                    ResultRow::new("bag", calculus.name(), &label)
                        .checkpoint(report.checkpoint)
                        .failed("mean_guesses", err),
                ),
            }
        }
    }
    Ok((rows, cells))
}

/// Qualitative remarks on a finished curve: does Bayes beat CF at the
/// largest sample, and does CF stop improving after five blocks?
pub fn curve_notes(cells: &[CurveCell]) -> Vec<String> {
    let mut notes = Vec::new();
    let find = |spec: &ExpertSpec, calculus: Calculus| {
        cells
            .iter()
            .find(|(s, c, _)| s == spec && *c == calculus)
            .map(|(_, _, p)| p)
    };
    let mut specs: Vec<ExpertSpec> = Vec::new();
    for (s, _, _) in cells {
        if !specs.contains(s) {
            specs.push(*s);
        }
    }
    for spec in &specs {
        if let (Some(bayes), Some(cf)) = (find(spec, Calculus::Bayes), find(spec, Calculus::Cf)) {
            if let (Some(b), Some(c)) = (bayes.last(), cf.last()) {
                notes.push(format!(
                    "{spec}: at size {} bayes {:.4} vs cf {:.4} -> {}",
                    b.sample_size,
                    b.mean_guesses,
                    c.mean_guesses,
                    if b.mean_guesses < c.mean_guesses {
                        "bayes ahead"
                    } else {
                        "bayes not ahead"
                    }
                ));
            }
            let at5 = cf.iter().find(|p| p.sample_size == 5);
            if let (Some(five), Some(last)) = (at5, cf.last()) {
                if last.sample_size > 5 {
                    let se = (five.standard_error().powi(2) + last.standard_error().powi(2)).sqrt();
                    let gain = five.mean_guesses - last.mean_guesses;
                    notes.push(format!(
                        "{spec}: cf improvement from size 5 to {} is {:.4} ({} 2 standard errors)",
                        last.sample_size,
                        gain,
                        if gain <= 2.0 * se { "within" } else { "beyond" }
                    ));
                }
            }
        }
    }
    notes
}

/// Bag-diagnosis curve, one row per (calculus, expert, size).
pub fn cmd_curve(cfg: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let started = Instant::now();
    let (rows, cells) = curve_cells(cfg)?;
    finish("curve", cfg, &rows, curve_notes(&cells), started)
}
