use std::path::Path;
use std::process::{Command, Output};

use evidence_testbed::harness::RunManifest;

const BIN: &str = env!("CARGO_BIN_EXE_evidence-testbed");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

/// Data rows of a result CSV, header skipped.
fn rows(csv_text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(csv_text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn optimal_prints_the_reference_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["optimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    for v in ["1.33333", "1.44444", "2.00000"] {
        assert!(stdout.contains(v), "{stdout}");
    }
    assert!(dir.path().join("results/optimal.csv").exists());
    assert!(dir.path().join("results/optimal.manifest.json").exists());
}

#[test]
fn uniform_table_gives_chance_rows() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "flat.csv",
        "shape,green,red,gold\nsquare,4,4,4\ncircle,4,4,4\ntriangle,4,4,4\n",
    );
    write(dir.path(), "flat.ini", "[table]\nsource = flat.csv\n");
    let out = run(dir.path(), &["--config", "flat.ini", "optimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    for row in rows(&text(&out.stdout)) {
        assert_eq!(row[5], "2.00000");
    }
}

#[test]
fn missing_table_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--table", "no-such-table.csv", "optimal"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("no-such-table.csv"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.ini", "[curve]\nsizes = 2, 3\nspeed = fast\n");
    let out = run(dir.path(), &["--config", "bad.ini", "curve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("speed"));

    let out = run(dir.path(), &["--config", "absent.ini", "curve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("absent.ini"));

    write(dir.path(), "zero.ini", "[curve]\nreplications = 0\n");
    assert_eq!(run(dir.path(), &["--config", "zero.ini", "curve"]).status.code(), Some(2));
}

#[test]
fn corrupted_totals_fail_selftest_by_name() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.csv",
        "shape,green,red,gold\nsquare,0,48,24\ncircle,96,16,32\ntriangle,36,36,36\ntotal,132,100,93\n",
    );
    let out = run(dir.path(), &["--table", "bad.csv", "selftest"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = text(&out.stdout);
    let line = stdout
        .lines()
        .find(|l| l.starts_with("contingency-totals"))
        .expect("check listed");
    assert!(line.contains("FAIL"), "{stdout}");

    // The same table is refused as input by the experiment commands.
    assert_eq!(run(dir.path(), &["--table", "bad.csv", "optimal"]).status.code(), Some(2));
}

#[test]
fn selftest_passes_on_the_builtin_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(!text(&out.stdout).contains("FAIL"));
}

#[test]
fn evaluate_is_deterministic_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "eval.ini",
        "[experts]\nmodels = oracle, noisy:1.0, learner\n\n[evaluate]\ncomparators = reversal, guessing, training\nguessing = montecarlo\nguessing_replications = 5000\n",
    );
    for out_dir in ["a", "b"] {
        let out = run(dir.path(), &["--config", "eval.ini", "--seed", "9", "--out", out_dir, "evaluate"]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a/evaluate.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/evaluate.csv")).unwrap();
    assert_eq!(a, b);
    let manifest = RunManifest::read(&dir.path().join("a/evaluate.manifest.json")).unwrap();
    assert!(manifest.mismatches(&dir.path().join("a")).is_empty());
    assert_eq!(manifest.base_seed, 9);

    let table = rows(&text(&a));
    assert!(table.iter().all(|r| r[8] == "9" && r[12] == manifest.config_checksum));
    for r in table.iter().filter(|r| r[2] == "oracle" && r[4] == "fraction_correct") {
        assert_eq!(r[5], "1.00000", "{r:?}");
    }
    assert!(table.iter().any(|r| r[0] == "training" && r[2] == "learner:1"));
    // Learner rows carry all four checkpoints.
    let mut cps: Vec<&str> = table
        .iter()
        .filter(|r| r[0] == "reversal" && r[2] == "learner:1")
        .map(|r| r[10].as_str())
        .collect();
    cps.dedup();
    assert_eq!(cps, ["81", "162", "243", "324"]);

    let other = run(dir.path(), &["--config", "eval.ini", "--seed", "10", "--out", "c", "evaluate"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(std::fs::read(dir.path().join("c/evaluate.csv")).unwrap(), a);
}

#[test]
fn engine_errors_become_status_rows() {
    let dir = tempfile::tempdir().unwrap();
    // No green blocks at all: green's shape likelihood is undefined.
    write(
        dir.path(),
        "nogreen.csv",
        "shape,green,red,gold\nsquare,0,48,24\ncircle,0,16,32\ntriangle,0,36,36\n",
    );
    write(dir.path(), "run.ini", "[table]\nsource = nogreen.csv\n[experts]\nmodels = oracle, learner\n");
    let out = run(dir.path(), &["--config", "run.ini", "evaluate"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let table = rows(&std::fs::read_to_string(dir.path().join("results/evaluate.csv")).unwrap());
    assert!(table.iter().any(|r| r[2] == "oracle" && r[11].starts_with("error:")));
    assert!(table.iter().any(|r| r[2] == "learner:1" && r[11] == "ok"));
}

#[test]
fn single_block_curve_matches_evaluate_guessing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "one.ini", "[curve]\nsizes = 1\nreplications = 40000\n");
    for cmd in ["evaluate", "curve"] {
        let out = run(dir.path(), &["--config", "one.ini", cmd]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    }
    let eval = rows(&std::fs::read_to_string(dir.path().join("results/evaluate.csv")).unwrap());
    let curve = rows(&std::fs::read_to_string(dir.path().join("results/curve.csv")).unwrap());
    let weight = |shape: &str| match shape {
        "square" => 72.0 / 324.0,
        "circle" => 144.0 / 324.0,
        _ => 108.0 / 324.0,
    };
    for calculus in ["bayes", "cf", "ds"] {
        let expected: f64 = eval
            .iter()
            .filter(|r| r[0] == "guessing" && r[1] == calculus)
            .map(|r| weight(&r[3]) * r[5].parse::<f64>().unwrap())
            .sum();
        let point = curve.iter().find(|r| r[1] == calculus).unwrap();
        let (mean, std, n): (f64, f64, f64) =
            (point[5].parse().unwrap(), point[6].parse().unwrap(), point[7].parse().unwrap());
        assert!((mean - expected).abs() <= 4.0 * std / n.sqrt(), "{calculus}: {mean} vs {expected}");
    }
}

#[test]
fn shipped_config_runs() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/full.ini");
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--config", config.to_str().unwrap(), "--out", "r", "optimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("1.44444"));
    let out = run(dir.path(), &["--config", config.to_str().unwrap(), "selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
}
