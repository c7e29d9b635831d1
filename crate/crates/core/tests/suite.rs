use peskine_core::checks::{run_check, CheckConfig, CHECK_IDS};
use peskine_core::report::{emit_report, read_reports, Status};

fn quick(seed: u64) -> CheckConfig {
    CheckConfig {
        seed,
        trials: Some(1),
        ..CheckConfig::default()
    }
}

#[test]
fn aggregate_holds_every_check_once() {
    let reports: Vec<_> = CHECK_IDS
        .iter()
        .filter(|&&id| id != "determinism")
        .map(|id| run_check(id, &quick(5)).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("all.json");
    let agg = emit_report(reports, Some(&path)).unwrap();
    let ids: Vec<_> = agg.reports.iter().map(|r| r.check_id.as_str()).collect();
    let expected: Vec<_> = CHECK_IDS
        .iter()
        .copied()
        .filter(|&id| id != "determinism")
        .collect();
    assert_eq!(ids, expected);
    let s = &agg.summary;
    assert_eq!(
        s.pass + s.fail + s.report_only + s.ambiguous,
        expected.len()
    );
    assert_eq!(
        read_reports(&std::fs::read_to_string(&path).unwrap()).unwrap(),
        agg.reports
    );
    for r in &agg.reports {
        assert_eq!(r.seed, 5);
        assert!(r.runtime_ms.is_none());
        assert!(r.params.contains_key("budget"), "{}", r.check_id);
    }
}

#[test]
fn orbit_dimensions_at_default_size() {
    let r = run_check("lem-3.13", &CheckConfig::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    for p in ["5", "7"] {
        assert_eq!(r.metrics["dim_O2"][p], 18);
        assert_eq!(r.metrics["dim_SingO2"][p], 15);
    }
}

#[test]
fn probes_never_assert() {
    for seed in 0..3 {
        assert_eq!(
            run_check("rem-3.5", &quick(seed)).unwrap().status,
            Status::ReportOnly
        );
    }
}

#[test]
fn prime_override_is_recorded() {
    let r = run_check(
        "pfaffian",
        &CheckConfig {
            p: Some(13),
            trials: Some(10),
            ..CheckConfig::default()
        },
    )
    .unwrap();
    assert_eq!(r.p, vec![13]);
    assert_eq!(r.status, Status::Pass);
}
