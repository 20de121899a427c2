//! Dataset loading and experiment artifacts through the file system.

use std::fs;
use std::io::Write;

use quasar_zo::harness::io::{parse_trace, render_trace, TRACE_HEADER};
use quasar_zo::harness::{load_labeled_csv, run_experiment, CsvSchema, ExperimentConfig};
use quasar_zo::Error;

fn wdbc_line(id: usize, token: &str) -> String {
    let mut s = format!("{id},{token}");
    for j in 0..30 {
        s.push_str(&format!(",{}", (id * 31 + j) as f64 / 7.0));
    }
    s
}

#[test]
fn wdbc_file_drives_an_svm_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wdbc.data");
    let mut f = fs::File::create(&path).unwrap();
    for i in 0..40 {
        writeln!(f, "{}", wdbc_line(i, if i % 3 == 0 { "M" } else { "B" })).unwrap();
    }
    drop(f);
    let data = load_labeled_csv(&path, &CsvSchema::Wdbc).unwrap();
    assert_eq!((data.len(), data.dim()), (40, 30));
    assert_eq!(data.labels()[0], 1.0);
    assert_eq!(data.labels()[1], -1.0);

    let text = format!(
        "name = svm_file\nproblem = svm\nproblem.alpha = 0.5\nproblem.standardize = true\n\
         problem.data = wdbc\nproblem.path = {}\nmethod = gd\niterations = 30\nstep = fixed\n\
         step.h = 1e-3\nseeds = 1,2",
        path.display()
    );
    let c = ExperimentConfig::parse(&text).unwrap();
    let out = dir.path().join("out");
    let (summary, written) = run_experiment(&c, Some(&out)).unwrap();
    assert_eq!(written, out);
    assert!(summary.runs.iter().all(|r| r.final_f < r.trace.initial_f()));
    let trace = fs::read_to_string(out.join("trace_seed1.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER);
    assert_eq!(parse_trace(&trace).unwrap(), summary.runs[0].trace.records);
    assert_eq!(render_trace(&summary.runs[0].trace.records), trace);
}

#[test]
fn malformed_wdbc_reports_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.data");
    let short = wdbc_line(2, "B").rsplit_once(',').unwrap().0.to_string();
    fs::write(&path, format!("{}\n{}\n", wdbc_line(1, "M"), short)).unwrap();
    match load_labeled_csv(&path, &CsvSchema::Wdbc) {
        Err(Error::Parse { row, message }) => {
            assert_eq!(row, 2);
            assert!(message.contains("31"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn missing_wdbc_with_auto_falls_back_to_synthetic() {
    let text = "name = auto\nproblem = svm\nproblem.alpha = 0.5\nproblem.data = auto\n\
                problem.path = /nonexistent/wdbc.data\nproblem.samples = 50\nproblem.dim = 4\n\
                method = rm\niterations = 5\nstep = fixed\nstep.h = 1e-4\nseeds = 0";
    let c = ExperimentConfig::parse(text).unwrap();
    let p = c.build_problem().unwrap();
    assert_eq!(quasar_zo::Objective::dim(&p), 4);
}
