//! Built-in invariant checks run by the `selftest` command.
//!
//! Each check recomputes its quantity a second, independent way where one
//! exists. Dempster's rule is compared against a direct set-intersection
//! double loop rather than the commonality route used by the engine.

use std::fmt::Write as _;

use super::commands::optimal_rows;
use super::config::{ExperimentConfig, TableSource};
use super::HarnessError;
use crate::blockworld::{Color, ContingencyTable, Shape};
use crate::calculi::{
    bayes_posterior, cf_combine, dempster_combine, BayesParams, CalculusError, CfValue,
    MassFunction,
};
use crate::evaluation::{guessing_task, optimal_guessing, ExpertSystem, GuessingMode};
use crate::experts::{elicit, ExpertModel};
use crate::rng::RandomStream;

pub const DEMPSTER_PAIRS: usize = 1000;
pub const CF_TRIPLES: usize = 10_000;
/// Reference optimum for the built-in table, with its allowed deviation.
pub const BUILTIN_OPTIMUM: [f64; 3] = [1.33, 1.44, 2.00];
pub const BUILTIN_OPTIMUM_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {}  {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        out
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// Set-based Dempster combination: every pair of focal sets, intersected.
pub fn dempster_brute_force(m1: &[f64; 8], m2: &[f64; 8]) -> Option<[f64; 8]> {
    let mut out = [0.0; 8];
    for a in 0..8 {
        for b in 0..8 {
            out[a & b] += m1[a] * m2[b];
        }
    }
    let k = out[0];
    if 1.0 - k <= 1e-12 {
        return None;
    }
    out[0] = 0.0;
    for x in &mut out[1..] {
        *x /= 1.0 - k;
    }
    Some(out)
}

/// A random mass function on up to four random nonempty focal sets.
pub fn random_mass(stream: &mut RandomStream) -> [f64; 8] {
    let mut m = [0.0; 8];
    let focal = 1 + stream.below(4) as usize;
    for _ in 0..focal {
        let set = 1 + stream.below(7) as usize;
        m[set] += stream.unit() + 1e-3;
    }
    let total: f64 = m.iter().sum();
    for x in &mut m {
        *x /= total;
    }
    m
}

/// A random certainty factor, with the endpoints and zero drawn often.
pub fn random_cf(stream: &mut RandomStream) -> f64 {
    match stream.below(20) {
        0 => 0.0,
        1 => 1.0,
        2 => -1.0,
        _ => 2.0 * stream.unit() - 1.0,
    }
}

fn check_totals(table: &ContingencyTable) -> CheckResult {
    match table.verify_totals() {
        Ok(()) => check(
            "contingency-totals",
            true,
            format!(
                "columns {:?}, grand total {}",
                Color::ALL.map(|c| table.col_total(c)),
                table.grand_total()
            ),
        ),
        Err(e) => check("contingency-totals", false, e.to_string()),
    }
}

fn check_conditionals(table: &ContingencyTable) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for shape in Shape::ALL {
        match table.color_given_shape(shape) {
            Ok(d) => worst = worst.max((d.probs().iter().sum::<f64>() - 1.0).abs()),
            Err(e) => problems.push(e.to_string()),
        }
    }
    for color in Color::ALL {
        match table.shape_given_color(color) {
            Ok(d) => worst = worst.max((d.probs().iter().sum::<f64>() - 1.0).abs()),
            Err(e) => problems.push(e.to_string()),
        }
    }
    if problems.is_empty() {
        check("conditionals-sum", worst <= 1e-12, format!("max |sum - 1| = {worst:.3e}"))
    } else {
        check("conditionals-sum", false, problems.join("; "))
    }
}

fn check_bayes_identity(table: &ContingencyTable) -> CheckResult {
    let params = match BayesParams::from_table(table) {
        Ok(p) => p,
        Err(e) => return check("bayes-vs-table", false, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    for shape in Shape::ALL {
        let direct = match table.color_given_shape(shape) {
            Ok(d) => d.probs(),
            Err(e) => return check("bayes-vs-table", false, e.to_string()),
        };
        let post = match bayes_posterior(&params, &[shape]) {
            Ok(p) => p.probs(),
            Err(e) => return check("bayes-vs-table", false, e.to_string()),
        };
        for c in 0..3 {
            worst = worst.max((direct[c] - post[c]).abs());
        }
    }
    check("bayes-vs-table", worst <= 1e-12, format!("max deviation {worst:.3e}"))
}

fn check_dempster(seed: u64) -> CheckResult {
    let mut stream = RandomStream::new(seed).derive(0xD5);
    let mut worst: f64 = 0.0;
    let mut conflicts = 0;
    let mut disagreements = 0;
    for _ in 0..DEMPSTER_PAIRS {
        let (a, b) = (random_mass(&mut stream), random_mass(&mut stream));
        let expected = dempster_brute_force(&a, &b);
        let actual = dempster_combine(
            &MassFunction::new(a).expect("valid random mass"),
            &MassFunction::new(b).expect("valid random mass"),
        );
        match (expected, actual) {
            (Some(e), Ok(m)) => {
                let got = m.masses();
                for i in 0..8 {
                    worst = worst.max((e[i] - got[i]).abs());
                }
            }
            (None, Err(CalculusError::TotalConflict { .. })) => conflicts += 1,
            _ => disagreements += 1,
        }
    }
    // Identity and total conflict.
    let probe = MassFunction::new(random_mass(&mut stream)).expect("valid random mass");
    let identity_ok = dempster_combine(&probe, &MassFunction::vacuous())
        .map(|m| {
            m.masses()
                .iter()
                .zip(probe.masses())
                .all(|(x, y)| (x - y).abs() <= 1e-12)
        })
        .unwrap_or(false);
    let mut red = [0.0; 8];
    red[1 << Color::Red.index()] = 1.0;
    let mut gold = [0.0; 8];
    gold[1 << Color::Gold.index()] = 1.0;
    let conflict_ok = matches!(
        dempster_combine(&MassFunction::new(red).unwrap(), &MassFunction::new(gold).unwrap()),
        Err(CalculusError::TotalConflict { .. })
    );
    check(
        "dempster-double-loop",
        worst < 1e-12 && disagreements == 0 && identity_ok && conflict_ok,
        format!(
            "{DEMPSTER_PAIRS} pairs, max deviation {worst:.3e}, {conflicts} total conflicts, \
             {disagreements} disagreements, identity {identity_ok}, conflict {conflict_ok}"
        ),
    )
}

fn check_cf(seed: u64) -> CheckResult {
    let mut stream = RandomStream::new(seed).derive(0xCF);
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    let cf = |x: f64| CfValue::new(x).expect("cf in range");
    for _ in 0..CF_TRIPLES {
        let (x, y, z) = (
            cf(random_cf(&mut stream)),
            cf(random_cf(&mut stream)),
            cf(random_cf(&mut stream)),
        );
        match (cf_combine(x, y), cf_combine(y, x)) {
            (Ok(a), Ok(b)) if a.value() == b.value() => {}
            (Err(_), Err(_)) => {}
            _ => failures.push(format!("commutativity at ({}, {})", x.value(), y.value())),
        }
        let left = cf_combine(x, y).and_then(|xy| cf_combine(xy, z));
        let right = cf_combine(y, z).and_then(|yz| cf_combine(x, yz));
        match (left, right) {
            (Ok(l), Ok(r)) => {
                worst = worst.max((l.value() - r.value()).abs());
                if !(-1.0..=1.0).contains(&l.value()) {
                    failures.push(format!("range at {}", l.value()));
                }
            }
            _ => skipped += 1,
        }
        match cf_combine(x, CfValue::ZERO) {
            Ok(v) if v.value() == x.value() => {}
            _ => failures.push(format!("identity at {}", x.value())),
        }
    }
    failures.truncate(3);
    check(
        "cf-associativity",
        worst <= 1e-12 && failures.is_empty(),
        format!(
            "{CF_TRIPLES} triples, max deviation {worst:.3e}, {skipped} contradictions skipped{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", {}", failures.join("; "))
            }
        ),
    )
}

fn check_optimal(cfg: &ExperimentConfig, table: &ContingencyTable) -> CheckResult {
    let optimum = match optimal_guessing(table) {
        Ok(r) => r.means(),
        Err(e) => return check("optimal-column", false, e.to_string()),
    };
    let mut detail = format!(
        "optimum {:.4}/{:.4}/{:.4}",
        optimum[0], optimum[1], optimum[2]
    );
    let mut passed = true;
    if cfg.table == TableSource::Builtin {
        let close = optimum
            .iter()
            .zip(BUILTIN_OPTIMUM)
            .all(|(x, r)| (x - r).abs() <= BUILTIN_OPTIMUM_TOLERANCE);
        passed &= close;
        let _ = write!(detail, ", reference {BUILTIN_OPTIMUM:?} {}", if close { "met" } else { "missed" });
    }
    // Oracle experts in every calculus reproduce the optimum.
    let mut stream = RandomStream::new(cfg.base_seed);
    match elicit(&ExpertModel::Oracle, table, &mut stream) {
        Ok(report) => {
            let mut worst: f64 = 0.0;
            for calculus in crate::calculi::Calculus::ALL {
                let system = ExpertSystem::from_report(&report, calculus);
                match guessing_task(&system, table, GuessingMode::Analytic) {
                    Ok(r) => {
                        for (a, b) in r.means().iter().zip(optimum) {
                            worst = worst.max((a - b).abs());
                        }
                    }
                    Err(_) => worst = f64::INFINITY,
                }
            }
            passed &= worst <= 1e-9;
            let _ = write!(detail, ", oracle systems deviate by {worst:.3e}");
        }
        Err(e) => {
            passed = false;
            let _ = write!(detail, ", oracle elicitation failed: {e}");
        }
    }
    check("optimal-column", passed, detail)
}

/// Run every check. Fails only when the table itself cannot be read.
pub fn cmd_selftest(cfg: &ExperimentConfig) -> Result<SelftestReport, HarnessError> {
    let table = cfg.table.load()?;
    let mut checks = vec![
        check_totals(&table),
        check_conditionals(&table),
        check_bayes_identity(&table),
        check_dempster(cfg.base_seed),
        check_cf(cfg.base_seed),
        check_optimal(cfg, &table),
    ];
    if checks[0].passed {
        // The optimal command must also run end to end on this table.
        if let Err(e) = optimal_rows(cfg) {
            checks.push(check("optimal-command", false, e.to_string()));
        }
    }
    Ok(SelftestReport { checks })
}
