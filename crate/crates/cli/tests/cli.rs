use std::fs;
use std::process::Command;

fn qzo() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qzo"));
    c.env_remove("QZO_SEEDS").env_remove("QZO_WDBC");
    c
}

fn stdout(c: &mut Command) -> (bool, String, i32) {
    let out = c.output().unwrap();
    let code = out.status.code().unwrap_or(-1);
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), code)
}

#[test]
fn tune_prints_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("consts.txt");
    fs::write(&path, "l1 = 1\ngamma = 1\nn = 1\nr = 1\neps = 0.1\n").unwrap();
    let (ok, text, _) = stdout(qzo().args(["tune", "qc-unconstrained", "--constants"]).arg(&path));
    assert!(ok, "{text}");
    assert!(text.contains("n_min = 199"), "{text}");
    let mu: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mu_max = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu - (0.1f64 / 25.15).sqrt()).abs() < 1e-12);
}

#[test]
fn tune_rejects_batches_in_unconstrained_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("consts.txt");
    fs::write(&path, "l1 = 1\ngamma = 1\nn = 1\nr = 1\neps = 0.1\nt = 4\n").unwrap();
    let (ok, _, code) = stdout(qzo().args(["tune", "qc-unconstrained", "--constants"]).arg(&path));
    assert!(!ok);
    assert_eq!(code, 2);
}

#[test]
fn run_writes_traces_and_summary_and_honours_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let (ok, text, _) = stdout(
        qzo()
            .env("QZO_SEEDS", "7,8")
            .args(["run", "quick_quadratic_rm", "--out"])
            .arg(&out),
    );
    assert!(ok, "{text}");
    assert!(out.join("trace_seed7.csv").is_file());
    assert!(out.join("trace_seed8.csv").is_file());
    assert!(!out.join("trace_seed0.csv").exists());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("seed,final_f,best_f,decay_rate,wall_ms,flagged,metric\n"));
    assert_eq!(summary.lines().count(), 1 + 2 + 4);
}

#[test]
fn run_reports_config_errors_with_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(
        &path,
        "name = x\nproblem = quadratic\nproblem.dim = 2\nmethod = rm\niterations = 5\nstep = fixed\nstep.h = -1\nseeds = 0\n",
    )
    .unwrap();
    let out = qzo().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("step.h"), "{err}");
}

#[test]
fn check_finds_a_witness_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dw.cfg");
    fs::write(
        &path,
        "name = dw\nproblem = double_well\nmethod = rm\niterations = 1\nstep = fixed\nstep.h = 0.1\nseeds = 0\n",
    )
    .unwrap();
    let (ok, text, code) =
        stdout(qzo().args(["check", "quasar"]).arg(&path).args(["--gamma", "0.5", "--trials", "500"]));
    assert!(!ok);
    assert_eq!(code, 1);
    assert!(text.contains("passed = false") && text.contains("witness = "), "{text}");

    let (ok, text, _) = stdout(qzo().args(["check", "quasar", "quick_hard_rm", "--gamma", "0.5", "--trials", "500"]));
    assert!(ok, "{text}");
}

#[test]
fn list_and_show() {
    let (ok, text, _) = stdout(qzo().arg("list"));
    assert!(ok);
    assert!(text.lines().any(|l| l.starts_with("svm_rm ")));
    let (ok, text, _) = stdout(qzo().args(["show", "radial_t10_mu1e-10"]));
    assert!(ok);
    assert!(text.contains("batch = 10\n") && text.contains("set = l1\n"), "{text}");
    let (ok, _, code) = stdout(qzo().args(["show", "missing"]));
    assert!(!ok && code == 2);
}

#[test]
fn bench_quick_suite() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, text, _) = stdout(qzo().env("QZO_SEEDS", "1").args(["bench", "quick", "--out"]).arg(dir.path()));
    assert!(ok, "{text}");
    assert!(dir.path().join("quick_svm_rm").join("summary.csv").is_file());
}
