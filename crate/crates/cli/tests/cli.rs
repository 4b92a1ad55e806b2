use std::path::Path;
use std::process::{Command, Output};

use acgm_core::bench::{pgm_write, synth_test_image};
use tempfile::TempDir;

fn acgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acgm"))
        .args(args)
        .env_remove("ACGM_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

const QUAD: &[&str] = &["--problem", "quadratic_l1_known", "--size", "20"];

#[test]
fn run_writes_one_row_per_record() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let o = acgm(&[&["run", "--solver", "acgm_ex", "--budget-iters", "50", "--output", out.to_str().unwrap()], QUAD].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,wtu,F,L,A,backtracks");
    assert_eq!(lines.len(), 52);
    let last: Vec<&str> = lines[51].split(',').collect();
    assert_eq!(last[0], "50");
    // at least 15 significant digits
    assert!(last[2].split('e').next().unwrap().len() >= 17, "{}", last[2]);
}

#[test]
fn runs_are_byte_identical() {
    let args = [&["run", "--solver", "amgs", "--budget-wtu", "80", "--seed", "7"], QUAD].concat();
    let (a, b) = (acgm(&args), acgm(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_directory_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_acgm"))
        .args([&["run", "--solver", "fista", "--budget-iters", "3"], QUAD].concat())
        .env("ACGM_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(read(&dir.path().join("quadratic_l1_known_fista.csv")).lines().count(), 5);
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "quadratic_l1_known", "size": 10, "solver": "acgm_es", "budget_iters": 10, "L0": 0.5}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = acgm(&["run", "--config", c]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(stdout(&from_file).lines().count(), 12);
    assert!(stdout(&from_file).lines().nth(1).unwrap().contains(",5.000000000000000e-1,"));

    let overridden = acgm(&["run", "--config", c, "--budget-wtu", "4", "--solver", "fista"]);
    let text = stdout(&overridden);
    let last = text.lines().last().unwrap();
    assert!(last.split(',').nth(1).unwrap().parse::<u64>().unwrap() <= 4);

    std::fs::write(&cfg, r#"{"problem": "deblur", "colour": 3}"#).unwrap();
    assert!(!acgm(&["run", "--config", c, "--solver", "acgm_ex"]).status.success());
}

#[test]
fn invalid_settings_fail() {
    assert!(!acgm(&[&["run", "--solver", "acgm_ex", "--r-d", "1.5"], QUAD].concat()).status.success());
    assert!(!acgm(&[&["run", "--solver", "nope"], QUAD].concat()).status.success());
    assert!(!acgm(&["run", "--solver", "acgm_ex"]).status.success());
    assert!(!acgm(&[&["run", "--solver", "fgm", "--budget-iters", "2"], QUAD].concat()).status.success());
}

#[test]
fn aborted_line_search_leaves_a_partial_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let o = acgm(
        &[&["run", "--solver", "acgm_ex", "--L0", "1e-12", "--r-u", "1.000001", "--output", out.to_str().unwrap()], QUAD]
            .concat(),
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("aborted"));
    assert_eq!(read(&out).lines().count(), 2);
}

#[test]
fn compare_of_one_solver_matches_run() {
    let base = [&["--solver", "acgm_ex", "--budget-iters", "20"], QUAD].concat();
    let single = stdout(&acgm(&[&["run"], base.as_slice()].concat()));
    let args = [&["compare", "--solvers", "acgm_ex", "--budget-iters", "20"], QUAD].concat();
    let combined = stdout(&acgm(&args));
    let expected: Vec<String> = single
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("solver,{l}") } else { format!("acgm_ex,{l}") })
        .collect();
    assert_eq!(combined.lines().collect::<Vec<_>>(), expected);
}

#[test]
fn compare_groups_rows_by_solver() {
    let o = acgm(&[&["compare", "--solvers", "acgm_ex,fista_cp,amgs,fista", "--budget-wtu", "30"], QUAD].concat());
    assert!(o.status.success());
    let text = stdout(&o);
    let names: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let mut order = names.clone();
    order.dedup();
    assert_eq!(order, vec!["acgm_ex", "fista_cp", "amgs", "fista"]);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap() <= 30));
}

#[test]
fn image_backed_problems() {
    let dir = TempDir::new().unwrap();
    let img = dir.path().join("img.pgm");
    pgm_write(&synth_test_image(16, 16, 2).unwrap(), &img).unwrap();
    for problem in ["deblur", "huber_rof_dual"] {
        let o = acgm(&["run", "--problem", problem, "--image", img.to_str().unwrap(), "--solver", "acgm_ex", "--budget-iters", "3"]);
        assert!(o.status.success(), "{problem}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).lines().count(), 5);
    }
}

#[test]
fn bounds_tables() {
    let o = acgm(&["bounds", "--L-u", "4", "--iterations", "10"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "k,floor_A,envelope_F_gap");
    for (k, line) in text.lines().skip(1).enumerate() {
        let k = k as f64 + 1.0;
        let floor: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((floor - (k + 1.0).powi(2) / 16.0).abs() <= 1e-14 * floor);
    }

    let geo = stdout(&acgm(&["bounds", "--L-u", "4", "--mu-f", "0.25", "--iterations", "6"]));
    let floors: Vec<f64> = geo.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let ratio = 1.0 / (1.0 - (0.25f64 / 4.0).sqrt());
    for w in floors.windows(2) {
        assert!((w[1] / w[0] - ratio).abs() <= 1e-12);
    }

    assert_eq!(stdout(&acgm(&["bounds", "--L-u", "4", "--iterations", "0"])), "k,floor_A,envelope_F_gap\n");
    assert!(!acgm(&["bounds", "--L-u", "1", "--mu-f", "2"]).status.success());
}

#[test]
fn verify_reports_each_check() {
    let ok = acgm(&["verify"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("6/6 checks passed"));

    let bad = acgm(&["verify", "--inject-fault"]);
    assert!(!bad.status.success());
    assert!(stdout(&bad).contains("FAIL gap monotonicity"));
}
