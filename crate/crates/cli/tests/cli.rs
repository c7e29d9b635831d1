use std::path::Path;
use std::process::{Command, Output};

use peskine_core::io::load_trivector;
use peskine_core::report::{read_reports, Status};

fn peskine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peskine"))
        .args(args)
        .env_remove("PESKINE_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_writes_a_loadable_trivector() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let out = peskine(&[
        "sample",
        "--kind",
        "D3_3_10",
        "--p",
        "11",
        "--seed",
        "5",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sigma = load_trivector(&file).unwrap();
    assert_eq!(sigma.field().p(), 11);
    assert_eq!(sigma.n(), 10);
    // same seed, same file
    let again = peskine(&["sample", "--kind", "d3_3_10", "--p", "11", "--seed", "5"]);
    assert_eq!(
        String::from_utf8(again.stdout).unwrap(),
        std::fs::read_to_string(&file).unwrap()
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&peskine(&["verify", "lem-9.9"])), 2);
    assert_eq!(
        code(&peskine(&["sample", "--kind", "D2_2_2", "--p", "7"])),
        2
    );
    assert_eq!(code(&peskine(&["sample", "--p", "9"])), 2);
    assert_eq!(
        code(&peskine(&["scan", "--locus", "nowhere", "--p", "7"])),
        2
    );
    assert_eq!(code(&peskine(&["scan", "--locus", "o2"])), 2);
    assert_eq!(code(&peskine(&["--frobnicate"])), 2);
    assert_eq!(code(&peskine(&["verify", "pfaffian", "--threads", "0"])), 2);
}

#[test]
fn budget_overrun_exits_three() {
    let out = peskine(&[
        "scan",
        "--locus",
        "peskine-8",
        "--p",
        "7",
        "--budget",
        "100",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn verify_writes_an_aggregate_and_thread_count_is_invisible() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    let four = dir.path().join("four.json");
    let base = [
        "verify",
        "pencil-cubics",
        "--seed",
        "3",
        "--trials",
        "5",
        "--out",
    ];
    let a = peskine(&[&base[..], &[path(&one), "--threads", "1"]].concat());
    let b = Command::new(env!("CARGO_BIN_EXE_peskine"))
        .args([&base[..], &[path(&four)]].concat())
        .env("PESKINE_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let text = std::fs::read_to_string(&one).unwrap();
    assert_eq!(text, std::fs::read_to_string(&four).unwrap());
    let reports = read_reports(&text).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].status, Status::Pass);
    assert_eq!(reports[0].seed, 3);
    assert!(!text.contains("runtime_ms"));
    assert!(String::from_utf8(a.stdout).unwrap().contains("PASS 1"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("peskine.toml");
    let out = dir.path().join("r.json");
    std::fs::write(
        &cfg,
        format!(
            "seed = 9\ntrials = 4\ntimings = true\nout = \"{}\"\n",
            path(&out)
        ),
    )
    .unwrap();
    let run = peskine(&["--config", path(&cfg), "verify", "pfaffian", "--seed", "2"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let reports = read_reports(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(reports[0].seed, 2);
    assert_eq!(reports[0].params["trials"], 4);
    assert!(reports[0].runtime_ms.is_some());

    std::fs::write(&cfg, "sead = 9\n").unwrap();
    assert_eq!(
        code(&peskine(&["--config", path(&cfg), "verify", "pfaffian"])),
        2
    );
}

#[test]
fn report_merges_and_signals_failure() {
    let dir = tempfile::tempdir().unwrap();
    let pass = dir.path().join("pass.json");
    let fail = dir.path().join("fail.json");
    let merged = dir.path().join("merged.json");
    assert_eq!(
        code(&peskine(&[
            "verify",
            "pfaffian",
            "--trials",
            "3",
            "--out",
            path(&pass)
        ])),
        0
    );
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&pass).unwrap()).unwrap();
    doc["reports"][0]["check_id"] = "zzz".into();
    doc["reports"][0]["status"] = "FAIL".into();
    std::fs::write(&fail, doc.to_string()).unwrap();

    let ok = peskine(&["report", "--in", path(&pass), "--out", path(&merged)]);
    assert_eq!(code(&ok), 0);
    let bad = peskine(&[
        "report",
        "--in",
        path(&pass),
        path(&fail),
        "--out",
        path(&merged),
    ]);
    assert_eq!(code(&bad), 1);
    let reports = read_reports(&std::fs::read_to_string(&merged).unwrap()).unwrap();
    let ids: Vec<_> = reports.iter().map(|r| r.check_id.as_str()).collect();
    assert_eq!(ids, ["pfaffian", "zzz"]);
    assert_eq!(
        code(&peskine(&[
            "report",
            "--in",
            path(&dir.path().join("missing.json"))
        ])),
        2
    );
}

#[test]
fn scan_uses_a_stored_trivector() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    assert_eq!(
        code(&peskine(&[
            "sample",
            "--kind",
            "D1_6_10",
            "--p",
            "3",
            "--seed",
            "1",
            "--out",
            path(&file)
        ])),
        0
    );
    let out = dir.path().join("scan.json");
    let run = peskine(&[
        "scan",
        "--locus",
        "rank4",
        "--sigma",
        path(&file),
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let r = &read_reports(&std::fs::read_to_string(&out).unwrap()).unwrap()[0];
    assert_eq!(r.status, Status::ReportOnly);
    assert_eq!(r.p, vec![3]);
    // the witness point is always on the locus
    assert!(r.metrics["count"].as_u64().unwrap() >= 1);
    assert_eq!(
        code(&peskine(&[
            "scan",
            "--locus",
            "rank4",
            "--sigma",
            path(&file),
            "--p",
            "5"
        ])),
        2
    );
}

#[test]
fn estimate_dim_reports_a_dimension() {
    let run = peskine(&[
        "estimate-dim",
        "--locus",
        "o2",
        "--p",
        "5",
        "--trials",
        "10",
    ]);
    assert_eq!(code(&run), 0);
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(
        stdout.contains("o2 over F_5: estimated dimension 18"),
        "{stdout}"
    );
}
