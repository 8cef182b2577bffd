use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use periodic_timetable::instances::{connection_conflict_micro, micro_suite, to_json_string, CS1_JSON};
use periodic_timetable::model::Instance;
use pttab::experiment::{aggregate, parse_detail_csv};

fn pttab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pttab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_instance(dir: &Path, name: &str, inst: &Instance) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_json_string(inst)).unwrap();
    path
}

fn cs1(dir: &Path) -> String {
    let path = dir.join("cs1.json");
    std::fs::write(&path, CS1_JSON).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&pttab(&[])), 64);
    assert_eq!(code(&pttab(&["solve"])), 64);
    assert_eq!(code(&pttab(&["solve", "--instance", "x.json", "--pop", "many"])), 64);
    assert_eq!(code(&pttab(&["experiment", "--instance", "x.json", "--max-evals", "10", "--weights", "w_q=3"])), 64);
    assert_eq!(code(&pttab(&["--help"])), 0);
}

#[test]
fn unreadable_or_invalid_instances_exit_65() {
    let out = pttab(&["solve", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"period": 60, "stations": [], "trains": []}"#).unwrap();
    assert_eq!(code(&pttab(&["solve", "--instance", bad.to_str().unwrap()])), 65);

    // Weights that rank connections above headways fail validation.
    let p = cs1(dir.path());
    let out = pttab(&["solve", "--instance", &p, "--weights", "w_h=1,w_c=5"]);
    assert_eq!(code(&out), 65);
}

#[test]
fn bad_ga_settings_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = cs1(dir.path());
    assert_eq!(code(&pttab(&["solve", "--instance", &p, "--pop", "1"])), 64);
    assert_eq!(code(&pttab(&["solve", "--instance", &p, "--max-evals", "10"])), 64);
    assert_eq!(code(&pttab(&["experiment", "--instance", &p, "--max-evals", "1000", "--runs", "0"])), 64);
}

#[test]
fn unsatisfiable_transfer_exits_1_and_names_the_connection() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_instance(dir.path(), "conflict.json", &connection_conflict_micro());
    let out = pttab(&["solve", "--instance", p.to_str().unwrap(), "--max-evals", "20000"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("violated connection"), "{text}");
    assert!(text.contains("train i"));
}

#[test]
fn hard_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let saturated = micro_suite().remove(3);
    let p = write_instance(dir.path(), "saturated.json", &saturated);
    assert_eq!(code(&pttab(&["solve", "--instance", p.to_str().unwrap()])), 2);
}

#[test]
fn solve_then_expand() {
    let dir = tempfile::tempdir().unwrap();
    let p = cs1(dir.path());
    let tt = dir.path().join("tt.json");
    let out = pttab(&[
        "solve", "--instance", &p, "--max-evals", "200000", "--seed", "3",
        "--timetable-out", tt.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = pttab(&[
        "expand", "--instance", &p, "--timetable", tt.to_str().unwrap(), "--k", "3", "--epoch", "06:00",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 24);
    assert!(lines[0].starts_with("Train"));
    assert!(lines[1].contains(" 6:") || lines[1].contains(" 7:"));

    let missing = dir.path().join("missing.json");
    std::fs::write(&missing, r#"{"period": 60, "events": []}"#).unwrap();
    let out = pttab(&["expand", "--instance", &p, "--timetable", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
}

#[test]
fn generate_reproduces_bundled_instance() {
    let out = pttab(&["generate", "cs1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), CS1_JSON);
}

fn run_experiment(dir: &Path, p: &str, tag: &str, extra: &[&str]) -> (String, String) {
    let detail = dir.join(format!("detail-{tag}.csv"));
    let mut args = vec![
        "experiment", "--instance", p, "--pop", "20,40", "--max-evals", "400,2000",
        "--runs", "3", "--seed", "17", "--detail-csv", detail.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = pttab(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (stdout(&out), std::fs::read_to_string(detail).unwrap())
}

fn without_last_column(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_owned())
        .collect()
}

#[test]
fn experiments_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let p = cs1(dir.path());
    let (agg1, det1) = run_experiment(dir.path(), &p, "a", &["--workers", "1"]);
    let (agg2, det2) = run_experiment(dir.path(), &p, "b", &["--workers", "4"]);
    assert_eq!(without_last_column(&agg1), without_last_column(&agg2));
    assert_eq!(without_last_column(&det1), without_last_column(&det2));
    assert_eq!(
        agg1.lines().next().unwrap(),
        "max_evals,avg_hard,avg_soft,pct_feasible,pct_feasible_conn,avg_time_s"
    );
    assert_eq!(agg1.lines().count(), 3);
    assert_eq!(det1.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn aggregate_is_the_mean_of_the_detail_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = cs1(dir.path());
    for per_size in [false, true] {
        let extra: &[&str] = if per_size { &["--per-size"] } else { &[] };
        let (agg, det) = run_experiment(dir.path(), &p, "m", extra);
        let records = parse_detail_csv(&det).unwrap();
        let expected = aggregate(&records, per_size);
        let rows: Vec<Vec<f64>> = agg
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), expected.len());
        let offset = usize::from(per_size);
        for (row, e) in rows.iter().zip(&expected) {
            assert_eq!(row[0], e.max_evaluations as f64);
            if per_size {
                assert_eq!(row[1], e.pop_size.unwrap() as f64);
            }
            let close = |a: f64, b: f64, tol: f64| assert!((a - b).abs() <= tol, "{a} vs {b}");
            close(row[1 + offset], e.avg_hard_violations, 5e-5);
            close(row[2 + offset], e.avg_soft_violations, 5e-5);
            close(row[3 + offset], e.pct_feasible, 5e-3);
            close(row[4 + offset], e.pct_feasible_and_connections, 5e-3);
            close(row[5 + offset], e.avg_time_seconds, 5e-4);
            // Pooled rows average over every population size.
            let n = records
                .iter()
                .filter(|r| r.max_evals == e.max_evaluations && e.pop_size.is_none_or(|p| p == r.pop_size))
                .count();
            assert_eq!(n, if per_size { 3 } else { 6 });
        }
    }
}

#[test]
fn single_run_row_equals_that_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = cs1(dir.path());
    let detail = dir.path().join("one.csv");
    let out = pttab(&[
        "experiment", "--instance", &p, "--pop", "50", "--max-evals", "1000", "--runs", "1",
        "--seed", "4", "--detail-csv", detail.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rec = &parse_detail_csv(&std::fs::read_to_string(detail).unwrap()).unwrap()[0];
    assert_eq!(rec.seed, 4);
    let row = stdout(&out).lines().nth(1).unwrap().to_owned();
    let f: Vec<&str> = row.split(',').collect();
    assert_eq!(f[0], "1000");
    assert_eq!(f[1], format!("{}.0000", rec.hard));
    assert_eq!(f[2], format!("{}.0000", rec.soft));
    let pct = |ok: bool| if ok { "100.00" } else { "0.00" };
    assert_eq!(f[3], pct(rec.hard == 0));
    assert_eq!(f[4], pct(rec.hard == 0 && rec.soft == 0));
}
