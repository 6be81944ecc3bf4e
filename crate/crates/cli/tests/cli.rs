#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use common::{close, left_profile, sr_saliency, OracleParams};

const TOL: f64 = 1e-9;

fn omp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omp"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run_with_stdin(cmd: &mut Command, input: &[u8]) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

/// Values of a `timestamp,value,label` file.
fn fixture_values(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[derive(Debug, PartialEq)]
struct Row {
    timestamp: i64,
    mp: Option<f64>,
    mp_index: Option<usize>,
    ds: Option<f64>,
    decision: bool,
    decided_by: String,
}

fn opt<T: std::str::FromStr>(s: &str) -> Option<T> {
    (!s.is_empty()).then(|| s.parse().ok().unwrap())
}

/// Parses `detect` CSV output, checking the column header on the way.
fn parse_rows(text: &str) -> Vec<Row> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("timestamp,value,mp,mp_index,ds,decision,decided_by"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 7, "{l}");
            Row {
                timestamp: f[0].parse().unwrap(),
                mp: opt(f[2]),
                mp_index: opt(f[3]),
                ds: opt(f[4]),
                decision: f[5] == "1",
                decided_by: f[6].to_string(),
            }
        })
        .collect()
}

/// Golden rows: `mp,mp_index,ds,decision` from the brute-force oracle with
/// the hourly parameters.
fn oracle_golden(values: &[f64]) -> String {
    let rows = left_profile(values, &OracleParams::new(48, Some(240), 48, 0.35));
    let mut out = String::from("mp,mp_index,ds,decision\n");
    for r in rows {
        let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let idx = r.mp_index.map(|i| i.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", f(r.mp), idx, f(r.ds), u8::from(r.decision)));
    }
    out
}

#[test]
fn golden_file_is_the_oracle_output() {
    let values = fixture_values(&data("spike.csv"));
    let expected = oracle_golden(&values);
    let golden = data("spike_golden.csv");
    if std::env::var_os("OMP_BLESS").is_some() {
        fs::write(&golden, &expected).unwrap();
    }
    assert_eq!(
        fs::read_to_string(golden).unwrap(),
        expected,
        "rerun with OMP_BLESS=1 to regenerate"
    );
}

#[test]
fn detect_matches_the_golden_file() {
    let rows = parse_rows(&run_ok(omp().arg("detect").arg(data("spike.csv"))));
    let golden = fs::read_to_string(data("spike_golden.csv")).unwrap();
    let golden: Vec<Vec<&str>> = golden.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), golden.len());
    for (t, (row, g)) in rows.iter().zip(&golden).enumerate() {
        let mp: Option<f64> = opt(g[0]);
        match (row.mp, mp) {
            (None, None) => {}
            (Some(a), Some(b)) => assert!(close(a, b, TOL), "mp at {t}: {a} vs {b}"),
            other => panic!("profile presence at {t}: {other:?}"),
        }
        assert_eq!(row.mp_index, opt(g[1]), "neighbour at {t}");
        if let (Some(a), Some(b)) = (row.ds, opt::<f64>(g[2])) {
            assert!(close(a, b, TOL), "ds at {t}: {a} vs {b}");
        }
        // With a single spike no neighbour ends on an anomaly, so the
        // spectral fallback never runs and decisions are the oracle's.
        assert_ne!(row.decided_by, "sr");
        assert_eq!(row.decision, g[3] == "1", "decision at {t}");
    }
    let alarms: Vec<usize> = (0..rows.len()).filter(|&t| rows[t].decision).collect();
    assert_eq!(alarms, vec![300]);
    assert_eq!(rows[300].timestamp, 1_601_078_400);
}

#[test]
fn sr_only_mode_reports_spectral_decisions() {
    let path = data("spike.csv");
    let values = fixture_values(&path);
    let rows = parse_rows(&run_ok(omp().args(["detect", "--mode", "sr-only"]).arg(&path)));
    let (m, z) = (48, 21);
    let mut alarms = Vec::new();
    for (t, row) in rows.iter().enumerate() {
        assert_eq!((row.mp, row.mp_index, row.ds), (None, None, None));
        if t + 1 < m {
            assert_eq!(row.decided_by, "warmup");
            continue;
        }
        assert_eq!(row.decided_by, "sr");
        let s = sr_saliency(&values[t + 1 - m..=t], 5, 3, 1e-8);
        let mean = s[m - 1 - z..m - 1].iter().sum::<f64>() / z as f64;
        let score = (s[m - 1] - mean) / (mean + 1e-8);
        if (score - 3.0).abs() > 1e-6 {
            assert_eq!(row.decision, score > 3.0, "decision at {t}, score {score}");
        }
        if row.decision {
            alarms.push(t);
        }
    }
    assert!(alarms.contains(&300), "SR flags the spike");
}

#[test]
fn empty_input_is_an_error() {
    let out = run_with_stdin(omp().arg("detect"), b"");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "timestamp,value,label\n").unwrap();
    let out = omp().arg("detect").arg(&empty).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
}

#[test]
fn malformed_row_names_its_line() {
    let out = run_with_stdin(omp().arg("detect"), b"timestamp,value\n0,1.0\n3600,abc\n");
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:") && err.contains("abc"), "{err}");
}

#[test]
fn output_is_byte_identical_across_runs() {
    for mode in [
        "omp",
        "mp-znorm",
        "mp-star",
        "mp-star-cache",
        "mp-star-cache-ds",
        "sr-only",
    ] {
        let run = || {
            run_ok(
                omp()
                    .args(["detect", "--mode", mode, "--output-format", "ndjson"])
                    .arg(data("spike.csv")),
            )
        };
        let first = run();
        assert_eq!(first, run(), "mode {mode}");
        assert!(first.contains(&format!("\"mode\":\"{mode}\"")));
        assert_eq!(first.lines().filter(|l| !l.starts_with('#')).count(), 480);
    }
}

#[test]
fn ndjson_records_carry_every_field() {
    let text = run_ok(
        omp()
            .args(["detect", "--output-format", "ndjson"])
            .arg(data("spike.csv")),
    );
    let rec: serde_json::Value =
        serde_json::from_str(text.lines().find(|l| l.contains("1601078400")).unwrap()).unwrap();
    for key in ["timestamp", "value", "mp", "mp_index", "ds", "decision", "decided_by"] {
        assert!(rec.get(key).is_some(), "missing {key}");
    }
    assert_eq!(rec["decision"], 1);
    assert_eq!(rec["decided_by"], "ds");
    let first: serde_json::Value = serde_json::from_str(text.lines().find(|l| !l.starts_with('#')).unwrap()).unwrap();
    assert!(first["mp"].is_null());
}

#[test]
fn streamed_input_matches_file_input() {
    let path = data("spike.csv");
    let from_file = run_ok(omp().arg("detect").arg(&path));
    let out = run_with_stdin(omp().arg("detect"), &fs::read(&path).unwrap());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), from_file);
}

#[test]
fn streamed_gaps_are_filled_like_file_gaps() {
    let text = fs::read_to_string(data("spike.csv")).unwrap();
    // Drop one row and blank another.
    let holed: String = text
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != 101)
        .map(|(i, l)| {
            if i == 201 {
                let ts = l.split(',').next().unwrap();
                format!("{ts},,0\n")
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("holed.csv");
    fs::write(&path, &holed).unwrap();
    let from_file = run_ok(omp().arg("detect").arg(&path));
    let out = run_with_stdin(omp().arg("detect"), holed.as_bytes());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), from_file);
    assert_eq!(parse_rows(&from_file).len(), 480);
}

#[test]
fn snapshot_resume_continues_the_stream() {
    let text = fs::read_to_string(data("spike.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let snap = dir.path().join("state.json");
    fs::write(&first, lines[..=250].join("\n")).unwrap();
    fs::write(&second, format!("{}\n{}", lines[0], lines[251..].join("\n"))).unwrap();

    run_ok(omp().arg("detect").arg(&first).arg("--save").arg(&snap));
    let snapshot: serde_json::Value = serde_json::from_str(&fs::read_to_string(&snap).unwrap()).unwrap();
    assert_eq!(snapshot["format"], "omp-detector");
    assert_eq!(snapshot["version"], 1);

    let resumed = parse_rows(&run_ok(omp().arg("detect").arg(&second).arg("--resume").arg(&snap)));
    let whole = parse_rows(&run_ok(omp().arg("detect").arg(data("spike.csv"))));
    assert_eq!(resumed.len(), 230);
    assert_eq!(resumed[..], whole[250..]);
}

#[test]
fn directory_input_runs_each_series() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let output = dir.path().join("out");
    run_ok(
        omp()
            .args(["synth", "--suite", "4", "--seed", "9", "--out-dir"])
            .arg(&input),
    );
    run_ok(
        omp()
            .arg("detect")
            .arg(&input)
            .arg("-o")
            .arg(&output)
            .args(["--jobs", "2"]),
    );
    let mut names: Vec<String> = fs::read_dir(&output)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        let single = run_ok(omp().arg("detect").arg(input.join(&name)));
        assert_eq!(fs::read_to_string(output.join(&name)).unwrap(), single, "{name}");
    }

    let err = omp().arg("detect").arg(&input).output().unwrap();
    assert!(!err.status.success(), "a directory needs --output");
}

#[test]
fn eval_reports_each_series_and_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        omp()
            .args(["synth", "--suite", "4", "--seed", "1000", "--out-dir"])
            .arg(dir.path()),
    );
    let text = run_ok(omp().arg("eval").arg(dir.path()).args(["--jobs", "2"]));
    let reports: Vec<serde_json::Value> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 5);
    let keys = [
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
        "f1",
        "q",
        "wall_time_total",
        "time_per_timestamp",
        "timestamps",
    ];
    for r in &reports {
        for k in keys {
            assert!(r.get(k).is_some(), "missing {k} in {r}");
        }
        assert_eq!(r["q"], 3);
    }
    let pooled = &reports[4];
    assert_eq!(pooled["series"], "aggregate");
    let sum = |k: &str| reports[..4].iter().map(|r| r[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(pooled["tp"].as_u64().unwrap(), sum("tp"));
    assert_eq!(pooled["timestamps"].as_u64().unwrap(), 4 * 720);
    assert!(pooled["f1"].as_f64().unwrap() > 0.9);

    let halves = run_ok(omp().arg("eval").arg(dir.path()).args(["--split", "halves", "-q", "1"]));
    let last: serde_json::Value = serde_json::from_str(halves.lines().last().unwrap()).unwrap();
    assert_eq!(last["q"], 1);
}

#[test]
fn engine_flags_reach_the_header() {
    let text = run_ok(
        omp()
            .args([
                "detect",
                "-m",
                "24",
                "-c",
                "unbounded",
                "-l",
                "12",
                "-t",
                "0.4",
                "--exclusion",
                "6",
                "--mode",
                "mp-star-cache-ds",
            ])
            .arg(data("spike.csv")),
    );
    let config = text.lines().find_map(|l| l.strip_prefix("# config ")).unwrap();
    let config: serde_json::Value = serde_json::from_str(config).unwrap();
    let engine = &config["engine"];
    assert_eq!(engine["window"], 24);
    assert_eq!(engine["cache"], "unbounded");
    assert_eq!(engine["ds_window"], 12);
    assert_eq!(engine["threshold"], 0.4);
    assert_eq!(engine["exclusion"], 6);
    assert_eq!(engine["judge"], "ds");

    let bad = omp()
        .args(["detect", "-m", "48", "-c", "50"])
        .arg(data("spike.csv"))
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("cache"));
}

#[test]
fn synth_is_deterministic_and_labels_spikes() {
    let args = [
        "synth", "--length", "100", "--noise", "0.1", "--seed", "5", "--spike", "40:3", "--spike", "70:-2",
    ];
    let a = run_ok(omp().args(args));
    assert_eq!(a, run_ok(omp().args(args)));
    let labelled: Vec<usize> = a
        .lines()
        .skip(1)
        .enumerate()
        .filter(|(_, l)| l.ends_with(",1"))
        .map(|(i, _)| i)
        .collect();
    assert_eq!(labelled, vec![40, 70]);
    let family = run_ok(omp().args([
        "synth",
        "--family",
        "amplitude-varying",
        "--seed",
        "2",
        "--format",
        "ndjson",
    ]));
    assert_eq!(family.lines().count(), 720);
}

#[test]
fn bench_prints_one_row_per_length() {
    let text = run_ok(omp().args(["bench", "--lengths", "400,600", "-m", "24", "-c", "120"]));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "length,cached_s,unbounded_s,speedup,cached_us_per_point,unbounded_us_per_point"
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("400,") && rows[2].starts_with("600,"));
}
