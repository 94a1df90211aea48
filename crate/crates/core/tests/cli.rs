use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_interlab");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(BIN).args(args).output().expect("spawn interlab");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Splits CSV output into `(name, header, rows)` per table.
fn tables(text: &str) -> Vec<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut out: Vec<(String, Vec<String>, Vec<Vec<String>>)> = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        if let Some(name) = line.strip_prefix("# ") {
            out.push((name.to_string(), Vec::new(), Vec::new()));
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        let t = out.last_mut().expect("row before table name");
        if t.1.is_empty() {
            t.1 = cells;
        } else {
            t.2.push(cells);
        }
    }
    out
}

fn cell<'a>(t: &'a (String, Vec<String>, Vec<Vec<String>>), row: usize, col: &str) -> &'a str {
    let j = t.1.iter().position(|c| c == col).unwrap_or_else(|| panic!("no column {col}"));
    &t.2[row][j]
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

#[test]
fn manganese_case_study_values() {
    let r = run(&[
        "analyze",
        "--input",
        data("manganese.csv").to_str().unwrap(),
        "--scale",
        "1e7",
        "--schemes",
        "boot-i",
        "--boot",
        "200",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = tables(&r.stdout);
    assert_eq!(t[0].0, "point estimates");
    assert_eq!(cell(&t[0], 0, "estimator"), "ANOVA");
    for (col, want, tol) in [
        ("r", 10.77, 0.01),
        ("L", 42.73, 0.01),
        ("R", 53.51, 0.01),
        ("r_se", 2.47, 0.02),
        ("L_se", 17.83, 0.02),
        ("R_se", 17.91, 0.02),
    ] {
        let got = num(cell(&t[0], 0, col));
        assert!((got - want).abs() <= tol, "{col}: {got}");
    }
    let approx = &t[1];
    assert_eq!(cell(approx, 0, "flavor"), "approx");
    for (col, want) in [
        ("r_lower", 7.13),
        ("r_upper", 18.18),
        ("L_lower", 20.05),
        ("L_upper", 128.30),
        ("R_lower", 29.25),
        ("R_upper", 127.60),
    ] {
        let got = num(cell(approx, 0, col));
        assert!((got - want).abs() <= 0.05, "{col}: {got}");
    }
}

#[test]
fn wide_and_long_inputs_agree() {
    let common = ["--boot", "100", "--seed", "3", "--scale", "1e7"];
    let mut a = vec!["analyze", "--input"];
    let long = data("manganese.csv");
    a.push(long.to_str().unwrap());
    a.extend(common);
    let mut b = vec!["analyze", "--wide", "--input"];
    let wide = data("manganese_wide.csv");
    b.push(wide.to_str().unwrap());
    b.extend(common);
    let (ra, rb) = (run(&a), run(&b));
    assert_eq!(ra.code, 0, "{}", ra.stderr);
    assert_eq!(ra.stdout, rb.stdout);
}

#[test]
fn simulation_output_is_reproducible() {
    let args = [
        "simulate", "--grid", "quick", "--seed", "42", "--boot", "60", "--reps", "30",
        "--schemes", "boot-j_r,boot-ij_r",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other[4] = "43";
    assert_ne!(run(&other).stdout, a.stdout);
}

/// Numbers printed as CSV re-parse to the full-precision JSON values.
#[test]
fn csv_round_trips_against_json() {
    let input = data("manganese.csv");
    let base = ["analyze", "--input", input.to_str().unwrap(), "--boot", "100", "--seed", "5"];
    let csv = run(&base);
    let mut j = base.to_vec();
    j.extend(["--format", "json"]);
    let json = run(&j);
    assert_eq!(json.code, 0, "{}", json.stderr);
    let doc: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    let csv_tables = tables(&csv.stdout);
    let arr = doc.as_array().unwrap();
    assert_eq!(arr.len(), csv_tables.len());
    let mut checked = 0;
    for (jt, ct) in arr.iter().zip(&csv_tables) {
        assert_eq!(jt["schema_version"], 1);
        assert_eq!(jt["name"].as_str().unwrap(), ct.0);
        let rows = jt["rows"].as_array().unwrap();
        assert_eq!(rows.len(), ct.2.len());
        for (jr, cr) in rows.iter().zip(&ct.2) {
            for (col, text) in ct.1.iter().zip(cr) {
                if let Some(v) = jr[col].as_f64() {
                    let printed = num(text);
                    assert!((printed - v).abs() <= 1e-11 * v.abs(), "{col}: {text} vs {v}");
                    assert_eq!(format!("{:.11e}", printed), format!("{:.11e}", v));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 50);
}

/// Analyzing c·Y with scale s matches analyzing Y with scale s·c².
#[test]
fn scaling_data_matches_scaling_output() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(data("manganese.csv")).unwrap();
    let c = 1000.0;
    let mut scaled = String::from("lab,replicate,value\n");
    for line in src.lines().skip(1) {
        let mut p = line.split(',');
        let (lab, rep, v) = (p.next().unwrap(), p.next().unwrap(), num(p.next().unwrap()));
        scaled.push_str(&format!("{lab},{rep},{:?}\n", v * c));
    }
    let path = dir.path().join("scaled.csv");
    std::fs::write(&path, scaled).unwrap();

    let common = ["--boot", "300", "--seed", "11"];
    let mut a = vec!["analyze", "--input", path.to_str().unwrap(), "--scale", "1"];
    a.extend(common);
    let orig = data("manganese.csv");
    let mut b = vec!["analyze", "--input", orig.to_str().unwrap(), "--scale", "1e6"];
    b.extend(common);
    let (ra, rb) = (run(&a), run(&b));
    assert_eq!(ra.code, 0, "{}", ra.stderr);
    let (ta, tb) = (tables(&ra.stdout), tables(&rb.stdout));
    assert_eq!(ta.len(), tb.len());
    let mut checked = 0;
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(x.1, y.1);
        for (rx, ry) in x.2.iter().zip(&y.2) {
            for (u, v) in rx.iter().zip(ry) {
                match (u.parse::<f64>(), v.parse::<f64>()) {
                    (Ok(u), Ok(v)) => {
                        assert!((u - v).abs() <= 1e-8 * v.abs().max(1e-6), "{u} vs {v}");
                        checked += 1;
                    }
                    _ => assert_eq!(u, v),
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };

    let empty_grid = write("grid.csv", "mu,sigma_r2,ratio,k,n,m_boot,r_mc,alpha,seed\n");
    let r = run(&["simulate", "--input", empty_grid.to_str().unwrap()]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.starts_with("error:"));

    let r = run(&["simulate", "--grid", "quick", "--cell", "7,7,9"]);
    assert_eq!(r.code, 2);

    let bad = write("bad.csv", "lab,replicate,value\n1,1,0.5\n1,2,abc\n2,1,0.1\n2,2,0.2\n");
    let r = run(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(r.code, 3, "{}", r.stderr);

    let unbalanced = write("unb.csv", "lab,replicate,value\n1,1,0.5\n1,2,0.6\n2,1,0.1\n");
    assert_eq!(run(&["analyze", "--input", unbalanced.to_str().unwrap()]).code, 3);

    let one_lab = write("one.csv", "lab,replicate,value\n1,1,0.5\n1,2,0.6\n");
    assert_eq!(run(&["analyze", "--input", one_lab.to_str().unwrap()]).code, 3);

    let missing = dir.path().join("nope.csv");
    assert_ne!(run(&["analyze", "--input", missing.to_str().unwrap()]).code, 0);

    let input = data("manganese.csv");
    let input = input.to_str().unwrap();
    assert_eq!(run(&["analyze", "--input", input, "--schemes", "boot-x"]).code, 2);
    assert_eq!(run(&["analyze", "--input", input, "--alpha", "1.5"]).code, 2);
    assert_eq!(run(&["analyze", "--input", input, "--format", "xml"]).code, 2);
}

#[test]
fn out_flag_and_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.md");
    let input = data("manganese.csv");
    let r = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "50",
        "--format",
        "markdown",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("### point estimates"));
    assert!(text.contains("| ANOVA"));
}
