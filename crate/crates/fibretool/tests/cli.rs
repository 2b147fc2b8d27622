//! End-to-end tests of the installed binary: golden envelopes, exit codes,
//! config precedence, schema conformance, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn fibretool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibretool"))
        .args(args)
        .env_remove("FIBRETOOL_THREADS")
        .output()
        .expect("binary should run")
}

fn fibretool_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibretool"))
        .args(args)
        .env("FIBRETOOL_THREADS", threads)
        .output()
        .expect("binary should run")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn surgery_envelope_matches_golden() {
    let out = fibretool(&["surgery", "--p", "2", "--q", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    assert_eq!(
        out.stdout.as_slice(),
        include_bytes!("golden/surgery_p2_q1.json"),
    );
}

#[test]
fn construct_envelope_matches_golden() {
    let out = fibretool(&["construct", "--kind", "multiple-fiber", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    assert_eq!(
        out.stdout.as_slice(),
        include_bytes!("golden/construct_multiple_fiber_p3.json"),
    );
}

#[test]
fn blf_envelope_and_svg_match_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("out.svg");
    let out = fibretool(&[
        "blf",
        "--n",
        "1",
        "--p",
        "2",
        "--q",
        "3",
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    assert_eq!(out.stdout.as_slice(), include_bytes!("golden/blf_e1_23.json"));
    let svg = std::fs::read(&svg_path).unwrap();
    assert_eq!(svg.as_slice(), include_bytes!("golden/e1_23.svg"));
    let text = String::from_utf8(svg).unwrap();
    assert_eq!(text.matches("class=\"lefschetz\"").count(), 12);
    assert_eq!(text.matches("<circle").count(), 6);
}

#[test]
fn construct_reports_expected_counts() {
    let out = fibretool(&["construct", "--kind", "multiple-fiber", "--p", "3"]);
    let envelope: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(envelope["result"]["base_diagram"].as_array().unwrap().len(), 4);
    let regions = envelope["result"]["region_fibers"].as_array().unwrap();
    let innermost = regions.last().unwrap()["components"].as_array().unwrap();
    assert_eq!(innermost.len(), 3);
    assert_eq!(envelope["validation"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn help_and_version_exit_zero() {
    let help = fibretool(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout_str(&help).contains("Usage"));
    let version = fibretool(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
    assert!(stdout_str(&version).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_one() {
    let unknown_flag = fibretool(&["surgery", "--p", "2", "--q", "1", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(1));
    assert!(unknown_flag.stdout.is_empty());

    let no_subcommand = fibretool(&[]);
    assert_eq!(no_subcommand.status.code(), Some(1));

    let bad_value = fibretool(&["surgery", "--p", "two", "--q", "1"]);
    assert_eq!(bad_value.status.code(), Some(1));
}

#[test]
fn domain_errors_exit_one_with_message() {
    let not_coprime = fibretool(&["blf", "--n", "1", "--p", "2", "--q", "4"]);
    assert_eq!(not_coprime.status.code(), Some(1));
    assert!(stderr_str(&not_coprime).contains("factor"));
    assert!(not_coprime.stdout.is_empty());

    let bad_surgery = fibretool(&["surgery", "--p", "4", "--q", "2"]);
    assert_eq!(bad_surgery.status.code(), Some(1));
    assert!(stderr_str(&bad_surgery).contains("coprime"));
}

#[test]
fn config_supplies_delta_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, "{\"delta\": 0.125}").unwrap();
    let base = [
        "fiber",
        "--map",
        "seifert",
        "--p",
        "2",
        "--q",
        "1",
        "--grid",
        "32,32,32",
    ];

    let mut with_config = base.to_vec();
    with_config.extend(["--config", config_path.to_str().unwrap()]);
    let out = fibretool(&with_config);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    assert!(
        stdout_str(&out).contains("\"delta\":1.2500000000000000e-1"),
        "config delta should be echoed"
    );

    let mut with_flag = with_config.clone();
    with_flag.extend(["--delta", "0.1875"]);
    let out = fibretool(&with_flag);
    assert!(
        stdout_str(&out).contains("\"delta\":1.8750000000000000e-1"),
        "flag should beat config"
    );

    // Without either, the adaptive policy is echoed as a null delta.
    let out = fibretool(&base);
    assert!(stdout_str(&out).contains("\"delta\":null"));
    assert!(stdout_str(&out).contains("\"adaptive\""));

    // A delta far below the cell size marks nothing, which is a domain
    // error, not a silent empty result.
    let mut too_small = with_config.clone();
    too_small.extend(["--delta", "1e-6"]);
    let out = fibretool(&too_small);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("no grid cell matched"));
}

#[test]
fn malformed_config_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("broken.json");
    std::fs::write(&config_path, "{\"delta\": }").unwrap();
    let out = fibretool(&[
        "surgery",
        "--p",
        "2",
        "--q",
        "1",
        "--config",
        config_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // serde_json reports line and column of the parse failure.
    assert!(stderr_str(&out).contains("line"), "{}", stderr_str(&out));

    let unknown_key = dir.path().join("unknown.json");
    std::fs::write(&unknown_key, "{\"tolerancy\": 1e-8}").unwrap();
    let out = fibretool(&[
        "surgery",
        "--p",
        "2",
        "--q",
        "1",
        "--config",
        unknown_key.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("tolerancy"));
}

#[test]
fn invalid_thread_env_exits_one() {
    let out = fibretool_with_threads(&["surgery", "--p", "2", "--q", "1"], "lots");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("FIBRETOOL_THREADS"));
}

#[test]
fn envelopes_validate_against_published_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/envelope.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    let invocations: &[&[&str]] = &[
        &["surgery", "--p", "3", "--q", "2"],
        &["scan", "--map", "fold-chart", "--signs", "+-", "--grid", "16,16,16"],
        &[
            "fiber", "--map", "seifert", "--p", "2", "--q", "1", "--grid", "16,16,16",
        ],
        &["construct", "--kind", "exceptional", "--p", "4"],
        &["blf", "--n", "1", "--p", "2", "--q", "3"],
        &["surgery", "--p", "2", "--q", "1", "--timing"],
    ];
    for args in invocations {
        let out = fibretool(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr_str(&out));
        let envelope: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        if let Err(err) = validator.validate(&envelope) {
            panic!("{args:?} emitted a schema-invalid envelope: {err}");
        }
    }
}

#[test]
fn timing_flag_adds_wall_time() {
    let out = fibretool(&["surgery", "--p", "2", "--q", "1", "--timing"]);
    assert!(stdout_str(&out).contains("\"wall_time_ms\":"));
    let out = fibretool(&["surgery", "--p", "2", "--q", "1"]);
    assert!(!stdout_str(&out).contains("wall_time_ms"));
}

#[test]
fn fiber_csv_is_written_atomically_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("cells.csv");
    let out = fibretool(&[
        "fiber",
        "--map",
        "seifert",
        "--p",
        "2",
        "--q",
        "1",
        "--grid",
        "16,16,16",
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("c0,c1,c2,component"));
    let body: Vec<&str> = lines.collect();
    assert!(!body.is_empty());
    assert!(body.iter().all(|l| l.split(',').count() == 4));

    let envelope: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let marked = envelope["result"]["marked_cell_count"].as_u64().unwrap();
    assert_eq!(body.len() as u64, marked);
}

#[test]
fn fiber_reports_multiplicity_and_winding() {
    let out = fibretool(&[
        "fiber", "--map", "seifert", "--p", "3", "--q", "2", "--grid", "32,32,32",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let envelope: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let stats = &envelope["result"]["stats"];
    assert_eq!(stats["component_count"], 1);
    assert_eq!(stats["slice_multiplicity_total"], 3);
    assert_eq!(stats["core_winding"], 3);
}

#[test]
fn scan_stdout_is_identical_across_thread_counts() {
    let args = ["scan", "--map", "multiple-fiber", "--p", "2", "--k", "1"];
    let one = fibretool_with_threads(&args, "1");
    let eight = fibretool_with_threads(&args, "8");
    assert_eq!(one.status.code(), Some(0), "{}", stderr_str(&one));
    assert_eq!(one.stdout, eight.stdout);
}
