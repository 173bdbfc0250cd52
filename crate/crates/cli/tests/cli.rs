use std::path::PathBuf;
use std::process::{Command, Output};

fn fibcube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibcube")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fibcube-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

// Parity of a permutation in cycle notation: an l-cycle is odd iff l is even.
fn is_even(cycles: &str) -> bool {
    cycles
        .split(')')
        .filter(|c| c.contains('('))
        .map(|c| c.trim_start_matches('(').split_whitespace().count())
        .filter(|l| *l > 0 && l % 2 == 0)
        .count()
        % 2
        == 0
}

#[test]
fn sample_matches_golden() {
    let o = fibcube(&["sample", "--group", "A5", "--algo", "fibcube", "--t", "20", "--n", "3", "--seed", "7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out, include_str!("golden/sample_a5.txt"));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[..3].iter().all(|l| is_even(l)));
    assert!(lines[3].starts_with("# 3 samples"));
}

#[test]
fn zero_samples_prints_footer_only() {
    let o = fibcube(&["sample", "--group", "A5", "--t", "20", "--n", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("# 0 samples"));
}

#[test]
fn input_errors_exit_two() {
    let o = fibcube(&["sample", "--group", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    assert_eq!(fibcube(&["experiment", "--group", "S5", "--algo", "cube"]).status.code(), Some(2));
    assert_eq!(fibcube(&["sample", "--group", "X9"]).status.code(), Some(2));
    assert_eq!(fibcube(&["sample", "--group", "S4", "--abc", "1,2"]).status.code(), Some(2));
    assert_eq!(fibcube(&["experiment", "--group", "Q8", "--samples", "100"]).status.code(), Some(2));
}

#[test]
fn experiment_formats_agree() {
    let base = ["experiment", "--group", "S5", "--t", "20", "--samples", "2000", "--seed", "3"];
    let table = fibcube(&base);
    assert!(table.status.success());
    let json = fibcube(&[&base[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let r = &v[0];
    let chi = r["chi_square"]["statistic"].as_f64().unwrap();
    let row = stdout(&table).lines().nth(1).unwrap().to_string();
    assert!(row.contains(&format!("{chi:.1}")));
    assert!(row.contains(&format!("20/{}", r["precompute_ops"]["multiplies"].as_u64().unwrap()
        + r["precompute_ops"]["inverses"].as_u64().unwrap())));
    let csv = fibcube(&[&base[..], &["--format", "csv"]].concat());
    let line = stdout(&csv).lines().nth(1).unwrap().to_string();
    assert!(line.contains(&format!("{chi:.6}")));
}

#[test]
fn identical_flags_give_identical_output() {
    let args = ["experiment", "--group", "A6", "--algo", "fibcube+boost", "--t", "20", "--samples", "300", "--format", "json"];
    assert_eq!(fibcube(&args).stdout, fibcube(&args).stdout);
    let args = ["sample", "--group", "S6", "--algo", "pr-classic", "--n", "5", "--seed", "11"];
    assert_eq!(fibcube(&args).stdout, fibcube(&args).stdout);
}

#[test]
fn verify_single_invariant_and_fault() {
    let o = fibcube(&["verify", "--group", "S4", "--only", "norm-monotone"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("norm-monotone")).count(), 1);
    assert!(out.contains("1/1 passed"));

    let o = fibcube(&["verify", "--group", "S4", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"));
    assert_eq!(fibcube(&["verify", "--only", "nonsense"]).status.code(), Some(2));
}

#[test]
fn saved_cube_reproduces_samples() {
    let path = scratch("a6.cube.json");
    let p = path.to_str().unwrap();
    assert!(fibcube(&["build", "--group", "A6", "--t", "25", "--seed", "5", "--out", p]).status.success());
    let fresh = fibcube(&["sample", "--group", "A6", "--t", "25", "--seed", "5", "--n", "6"]);
    let saved = fibcube(&["sample", "--group", "A6", "--seed", "5", "--n", "6", "--cube", p]);
    assert!(saved.status.success());
    assert_eq!(stdout(&fresh), stdout(&saved));
}

#[test]
fn generator_file_with_enumerated_partition() {
    let path = scratch("s4.txt");
    std::fs::write(&path, "permutation degree=4\n(1 2)\n(1 2 3 4)\n").unwrap();
    let o = fibcube(&["experiment", "--group", path.to_str().unwrap(), "--enumerate", "--samples", "1000", "--t", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("s4"));
    let table = scratch("s4-expected.csv");
    std::fs::write(&table, "# label, expected\n4,6\n2+2,3\n3+1,8\n2+1+1,6\n1+1+1+1,1\n").unwrap();
    let o = fibcube(&["experiment", "--group", path.to_str().unwrap(), "--partition", table.to_str().unwrap(), "--samples", "1000", "--t", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
