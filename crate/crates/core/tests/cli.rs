use std::path::PathBuf;
use std::process::{Command, Output};

fn cheshire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheshire")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap()
}

const HEADER: &str = "scenario,mode,observable,weak_value_re,weak_value_im,estimate,std_error,abs_error,postselection_probability,acceptance_rate,g,seed,samples";

#[test]
fn exact_single_cat_golden() {
    let o = cheshire(&["run", "single-cat"]);
    assert!(o.status.success());
    let want = format!(
        "{HEADER}\n\
         single-cat,exact,Pi_L,1.0,0.0,,,,0.25,,,,\n\
         single-cat,exact,Pi_R,0.0,0.0,,,,0.25,,,,\n\
         single-cat,exact,sigma_z^L,0.0,0.0,,,,0.25,,,,\n\
         single-cat,exact,sigma_z^R,1.0,0.0,,,,0.25,,,,\n"
    );
    assert_eq!(stdout(&o), want);
}

#[test]
fn fixture_path_matches_builtin() {
    let a = stdout(&cheshire(&["run", "grin-swap"]));
    let b = stdout(&cheshire(&["run", &fixture("grin_swap.qcc")]));
    assert_eq!(a, b);
}

#[test]
fn json_and_csv_agree() {
    let csv = csv_rows(&stdout(&cheshire(&["run", "grin-swap", "--mode", "pointer"])));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&cheshire(&["run", "grin-swap", "--mode", "pointer", "--format", "json"])))
            .unwrap();
    let records = json.as_array().unwrap();
    assert_eq!(records.len(), csv.len() - 1);
    for (row, rec) in csv[1..].iter().zip(records) {
        for (h, cell) in csv[0].iter().zip(row) {
            let v = &rec[h.as_str()];
            match v {
                serde_json::Value::Null => assert_eq!(cell, "", "{h}"),
                serde_json::Value::String(s) => assert_eq!(cell, s, "{h}"),
                serde_json::Value::Number(n) => {
                    assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{h}")
                }
                other => panic!("{h}: {other}"),
            }
        }
    }
}

#[test]
fn montecarlo_is_byte_deterministic() {
    let args = ["montecarlo", "single-cat", "--samples", "20000", "--seed", "5", "--g", "0.05"];
    let a = cheshire(&args);
    let b = cheshire(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = cheshire(&["montecarlo", "single-cat", "--samples", "20000", "--seed", "6", "--g", "0.05"]);
    assert_ne!(a.stdout, c.stdout);
    // run --mode montecarlo is the same computation
    let d = cheshire(&["run", "single-cat", "--mode", "montecarlo", "--samples", "20000", "--seed", "5", "--g", "0.05"]);
    assert_eq!(a.stdout, d.stdout);
}

#[test]
fn observable_filter_keeps_rows_identical() {
    let all = csv_rows(&stdout(&cheshire(&["montecarlo", "grin-swap", "--samples", "20000", "--g", "0.05"])));
    let one = csv_rows(&stdout(&cheshire(&[
        "montecarlo", "grin-swap", "--samples", "20000", "--g", "0.05", "--observable", "sigma_z^R",
    ])));
    assert_eq!(one.len(), 2);
    let obs = column(&all, "observable");
    let row = all.iter().find(|r| r[obs] == "sigma_z^R").unwrap();
    assert_eq!(&one[1], row);
}

#[test]
fn grin_swap_acceptance_rate() {
    let o = cheshire(&["montecarlo", "grin-swap", "--samples", "100000", "--seed", "42"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let k = column(&rows, "acceptance_rate");
    let p: f64 = 0.0625;
    let sd = (p * (1.0 - p) / 1e5).sqrt();
    for r in &rows[1..] {
        let rate: f64 = r[k].parse().unwrap();
        assert!((rate - p).abs() <= 4.0 * sd, "{rate}");
    }
    assert_eq!(rows[1][column(&rows, "samples")], "100000");
    assert_eq!(rows[1][column(&rows, "seed")], "42");
}

#[test]
fn sweep_rows_equal_pointer_runs() {
    let sweep = csv_rows(&stdout(&cheshire(&["sweep", "single-cat", "--observable", "sigma_z^R", "--g", "0.1,0.05"])));
    assert_eq!(sweep.len(), 3);
    for (row, g) in sweep[1..].iter().zip(["0.1", "0.05"]) {
        let run = csv_rows(&stdout(&cheshire(&[
            "run", "single-cat", "--mode", "pointer", "--g", g, "--observable", "sigma_z^R",
        ])));
        assert_eq!(&run[1], row);
    }
    let e = column(&sweep, "abs_error");
    let errs: Vec<f64> = sweep[1..].iter().map(|r| r[e].parse().unwrap()).collect();
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn grid_flags() {
    let o = cheshire(&["run", "single-cat", "--mode", "pointer", "--grid-points", "2048", "--sigma", "2"]);
    assert!(o.status.success());
    let o = cheshire(&["run", "single-cat", "--mode", "pointer", "--grid-points", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let o = cheshire(&["run", "missing.qcc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.qcc"));
    assert!(o.stdout.is_empty());

    assert_eq!(cheshire(&["run", "no-such-scenario"]).status.code(), Some(2));
    assert_eq!(cheshire(&["run", "single-cat", "--observable", "Pi_X"]).status.code(), Some(2));
    assert_eq!(cheshire(&["run", "single-cat", "--samples", "10"]).status.code(), Some(2));
    assert_eq!(cheshire(&["sweep", "single-cat", "--observable", "Pi_L", "--g", ""]).status.code(), Some(2));
    assert_eq!(cheshire(&["run", "single-cat", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(cheshire(&[]).status.code(), Some(2));

    // no trial survives postselection
    let o = cheshire(&["montecarlo", "grin-swap", "--samples", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = cheshire(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("montecarlo"));
}

#[test]
fn parse_error_names_file() {
    let dir = std::env::temp_dir().join(format!("cheshire_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.qcc");
    std::fs::write(&path, "modes:\n  path path L R\npre: |X>\npost: |L>\n").unwrap();
    let o = cheshire(&["run", path.to_str().unwrap()]);
    let _ = std::fs::remove_dir_all(&dir);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.qcc") && err.contains("3:6"), "{err}");
}
