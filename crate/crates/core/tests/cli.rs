mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn planrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planrec"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn explain_xyz() {
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("xyz.kb")),
        "--demo",
        path(&fixture("xyz.demo")),
        "--check",
        "--format",
        "sexp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "(explanation (intent Z (span 0 3)))\n");
}

#[test]
fn explain_replace_with_spare_has_six_intents() {
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("battery.kb")),
        "--demo",
        path(&fixture("tasks/replace-red-with-spare-1.demo")),
        "--check",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches("(intent ").count(), 6);
    assert!(out.ends_with(")\n") && !out.ends_with("\n\n"));
}

#[test]
fn long_demo_skips_check_with_note() {
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("battery.kb")),
        "--demo",
        path(&fixture("tasks/toy-blocks-um.demo")),
        "--check",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("check skipped"));
}

#[test]
fn malformed_kb_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("bad.kb");
    std::fs::write(&kb, "(primitive a 0)\n(schema (cause x ()\n").unwrap();
    let o = planrec(&[
        "explain",
        "--kb",
        path(&kb),
        "--demo",
        path(&fixture("xyz.demo")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2:"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn demo_with_undeclared_action_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let demo = dir.path().join("d.demo");
    std::fs::write(&demo, "(init)\n(step (action Q) (changes))\n").unwrap();
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("xyz.kb")),
        "--demo",
        path(&demo),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`Q`"));
}

#[test]
fn missing_file_is_input_error() {
    let o = planrec(&["validate-kb", "--kb", "/nonexistent/x.kb"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metrics_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m");
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("xyz.kb")),
        "--demo",
        path(&fixture("xyz.demo")),
        "--metrics",
        path(&m),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let curve = std::fs::read_to_string(m.join("curve.csv")).unwrap();
    let spans = std::fs::read_to_string(m.join("lifespans.csv")).unwrap();
    assert!(curve.starts_with("tick,living,total\n"));
    assert!(spans.starts_with("nodeId,kind,birth,death\n"));
    // nothing is alive once the run is over
    assert_eq!(curve.lines().last().unwrap().split(',').nth(1), Some("0"));
}

#[test]
fn validate_kb_codes() {
    let o = planrec(&["validate-kb", "--kb", path(&fixture("battery.kb"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok:"));

    let dir = tempfile::tempdir().unwrap();
    let cyc = dir.path().join("cycle.kb");
    std::fs::write(
        &cyc,
        "(primitive p 0) (abstract a 0) (abstract b 0)
         (schema (cause a ()) (vars) (effects (b)))
         (schema (cause b ()) (vars) (effects (a)))
         (schema (cause a ()) (vars) (effects (p)))",
    )
    .unwrap();
    let o = planrec(&["validate-kb", "--kb", path(&cyc)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unit cycle"));

    let warn = dir.path().join("warn.kb");
    std::fs::write(
        &warn,
        "(primitive p 0) (abstract a 0) (schema (cause a ()) (vars) (effects (p) (ghost)))",
    )
    .unwrap();
    let o = planrec(&["validate-kb", "--kb", path(&warn)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert!(stderr(&o).contains("ghost"));
}

#[test]
fn gen_demo_relocate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.demo");
    let o = planrec(&[
        "gen-demo",
        "--kb",
        path(&fixture("relocate.kb")),
        "--seed",
        "1",
        "--n-top",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let demo = std::fs::read_to_string(&out).unwrap();
    assert_eq!(demo.matches("(step ").count(), 3);
    let truth = std::fs::read_to_string(dir.path().join("r.demo.truth")).unwrap();
    assert!(truth.starts_with("(ground-truth (intent relocate "));

    // the generated transcript explains back to its ground truth
    let o = planrec(&[
        "explain",
        "--kb",
        path(&fixture("relocate.kb")),
        "--demo",
        path(&out),
        "--check",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(intent relocate "));
}

#[test]
fn gen_demo_zero_is_init_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.demo");
    let o = planrec(&[
        "gen-demo",
        "--kb",
        path(&fixture("relocate.kb")),
        "--seed",
        "9",
        "--n-top",
        "0",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let demo = std::fs::read_to_string(&out).unwrap();
    assert!(demo.starts_with("(init"));
    assert!(!demo.contains("(step"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("z.demo.truth")).unwrap(),
        "(ground-truth)\n"
    );
}

#[test]
fn gen_demo_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("k.kb");
    let world = dir.path().join("k.world");
    std::fs::write(
        &kb,
        "(primitive poke 1) (abstract paint 1)
         (schema (cause paint (o)) (vars o) (effects (poke o)) (constraints (prop-at start o colour purple)))",
    )
    .unwrap();
    std::fs::write(&world, "(init (object a (colour red)))").unwrap();
    let o = planrec(&[
        "gen-demo",
        "--kb",
        path(&kb),
        "--seed",
        "1",
        "--n-top",
        "1",
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("schema 0"), "{}", stderr(&o));
}

#[test]
fn bench_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = planrec(&[
        "bench",
        "--kb",
        path(&fixture("battery.kb")),
        "--min",
        "5",
        "--max",
        "40",
        "--step",
        "5",
        "--seed",
        "2",
        "--out",
        path(&out),
        "--seeds-per-length",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(
        rows[0],
        "length,seed,total_created,peak_living,peak_ratio,pass"
    );
    assert_eq!(rows.len(), 9);
    assert_eq!(std::fs::read_dir(out.join("curves")).unwrap().count(), 8);
    assert!(stdout(&o).contains("r2="));
}

#[test]
fn bench_wall_time_adds_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = planrec(&[
        "bench",
        "--kb",
        path(&fixture("battery.kb")),
        "--min",
        "5",
        "--max",
        "5",
        "--step",
        "1",
        "--seed",
        "2",
        "--out",
        path(&out),
        "--seeds-per-length",
        "1",
        "--wall-time",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("length,seed,total_created,peak_living,peak_ratio,pass,wall_ms\n"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(planrec(&[]).status.code(), Some(1));
    assert_eq!(planrec(&["explain", "--kb", "x"]).status.code(), Some(1));
    assert_eq!(planrec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        planrec(&[
            "bench", "--kb", "x", "--min", "5", "--max", "1", "--step", "1", "--seed", "1",
            "--out", "o"
        ])
        .status
        .code(),
        Some(1)
    );
    let help = planrec(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("explain"));
}
