use std::process::Command;

use hyperschur::providers::{ProviderKind, ProviderSpec};
use hyperschur_cli::{cmd_norms, cmd_profile, cmd_verify, exit, output, RunConfig, Task};
use num_complex::Complex64;
use proptest::prelude::*;

fn config(task: Task, kind: ProviderKind) -> RunConfig {
    RunConfig::new(task, ProviderSpec::new(kind))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperschur"))
}

/// Brute-force thinness of the cycle C_n: every triangle, every choice of
/// geodesic on each side, and every point on one side against the nearer of
/// the other two.
fn cycle_thin_delta(n: i64) -> i64 {
    let d = |a: i64, b: i64| {
        let t = (a - b).rem_euclid(n);
        t.min(n - t)
    };
    let geodesics = |a: i64, b: i64| -> Vec<Vec<i64>> {
        let len = d(a, b);
        let fwd: Vec<i64> = (0..=len).map(|s| (a + s).rem_euclid(n)).collect();
        let bwd: Vec<i64> = (0..=len).map(|s| (a - s).rem_euclid(n)).collect();
        let mut out = Vec::new();
        if *fwd.last().unwrap() == b {
            out.push(fwd);
        }
        if *bwd.last().unwrap() == b && len > 0 {
            out.push(bwd);
        }
        out.dedup();
        out
    };
    let mut worst = 0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for s0 in geodesics(x, y) {
                    for s1 in geodesics(y, z) {
                        for s2 in geodesics(z, x) {
                            let sides = [&s0, &s1, &s2];
                            for i in 0..3 {
                                for &q in sides[i] {
                                    let near = |s: &Vec<i64>| s.iter().map(|&v| d(q, v)).min().unwrap();
                                    let m = near(sides[(i + 1) % 3]).min(near(sides[(i + 2) % 3]));
                                    worst = worst.max(m);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    worst
}

/// Gromov four-point constant of C_n by brute force.
fn cycle_four_point(n: i64) -> f64 {
    let d = |a: i64, b: i64| {
        let t = (a - b).rem_euclid(n);
        t.min(n - t)
    };
    let mut worst = 0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
                    s.sort();
                    worst = worst.max(s[2] - s[1]);
                }
            }
        }
    }
    worst as f64 / 2.0
}

#[test]
fn profile_of_cycle_matches_brute_force() {
    let out = cmd_profile(&config(Task::Profile, ProviderKind::Cycle { n: 12 })).unwrap();
    let delta = &out.report.graph.delta;
    assert!(!delta.sampled);
    assert_eq!(delta.delta_thin, cycle_thin_delta(12) as f64);
    assert_eq!(delta.delta_four_point, cycle_four_point(12));
    assert_eq!(out.report.exit_code, exit::PASS);
    assert!(out.report.verify.is_none() && out.report.norms.is_none());
}

#[test]
fn profile_of_trees_is_zero() {
    for kind in [ProviderKind::RegularTree { branching: 3, depth: 3 }, ProviderKind::FreeGroup { rank: 2, radius: 5 }] {
        let out = cmd_profile(&config(Task::Profile, kind)).unwrap();
        assert_eq!(out.report.graph.delta.delta_thin, 0.0);
        assert!(out.report.graph.is_tree);
        assert_eq!(out.report.exit_code, exit::PASS);
    }
}

#[test]
fn verify_passes_on_line_and_free_group() {
    for kind in [ProviderKind::Line { n: 20 }, ProviderKind::FreeGroup { rank: 2, radius: 5 }] {
        let out = cmd_verify(&config(Task::Verify, kind)).unwrap();
        let r = &out.report;
        assert!(r.passed(), "{:?}", r.verdicts);
        assert_eq!(r.exit_code, exit::PASS);
        let v = r.verify.as_ref().unwrap();
        assert_eq!(v.partition.pairs_checked, r.graph.core_size * r.graph.core_size);
        assert_eq!(v.binomial.pairs_checked, 65536);
        assert!(r.verdicts.iter().all(|v| !v.domain.is_empty()));
    }
}

#[test]
fn shrunken_width_reports_covering_violation() {
    let mut cfg = config(Task::Verify, ProviderKind::FreeGroup { rank: 2, radius: 3 });
    let minimal = cmd_verify(&cfg).unwrap().report.constants.empirical.params.rho;
    cfg.rho = Some(minimal / 4.0);
    let out = cmd_verify(&cfg).unwrap();
    assert_eq!(out.report.exit_code, exit::IDENTITY_VIOLATION);
    let covering = &out.report.verify.as_ref().unwrap().covering;
    assert!(covering.violation_count > 0);
}

#[test]
fn norms_on_real_grid_stay_below_twice_c0() {
    let out = cmd_norms(&config(Task::Norms, ProviderKind::FreeGroup { rank: 2, radius: 3 })).unwrap();
    let r = &out.report;
    assert_eq!(r.exit_code, exit::PASS, "{:?}", r.verdicts.iter().filter(|v| !v.passed).collect::<Vec<_>>());
    let norms = r.norms.as_ref().unwrap();
    for t in &norms.theta {
        assert!(t.bound <= t.constants.c);
    }
    assert_eq!(norms.sphere.len(), 6);
    assert_eq!(norms.witnesses.len(), 4);
    assert_eq!(out.tables.theta.len(), 3);
    assert_eq!(out.tables.witness.len(), 4 * r.graph.core_size);
    for s in &norms.sandwich {
        assert!(s.report.ordered && !s.report.sdp.inconclusive, "{}", s.name);
    }
}

#[test]
fn paper_constants_are_reported_alongside() {
    let out = cmd_verify(&config(Task::Verify, ProviderKind::Line { n: 12 })).unwrap();
    let c = &out.report.constants;
    assert_eq!(c.paper.params.rho, 100.0 * out.report.graph.delta.delta_impl);
    assert_eq!(c.paper.params.r1, 2 * c.paper.params.r0);
    assert!(c.paper.constants.c0_log2 >= c.empirical.constants.c0_log2);
}

#[test]
fn repeated_runs_are_identical_modulo_timings() {
    let cfg = config(Task::Verify, ProviderKind::FreeGroup { rank: 2, radius: 3 });
    let a = cmd_verify(&cfg).unwrap().report.to_value_without_timings();
    let b = cmd_verify(&cfg).unwrap().report.to_value_without_timings();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn binary_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["all", "--line", "12", "--z", "0.5,-0.7", "--n", "0,1,2", "--schedule", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(exit::PASS));
    for f in ["report.json", "theta.csv", "sphere.csv", "schedule.csv", "witness.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1.0");
    assert_eq!(report["command"], "all");
    let theta = std::fs::read_to_string(dir.path().join("theta.csv")).unwrap();
    assert!(theta.starts_with("z_re,z_im,modulus,bound_log2"));
    assert_eq!(theta.lines().count(), 3);
    let kernels = std::fs::read_dir(dir.path().join("kernels")).unwrap().count();
    assert_eq!(kernels, 2 * (2 + 3));
}

#[test]
fn binary_stdout_is_deterministic() {
    let run = || {
        let out = bin().args(["norms", "--free-group", "2", "2", "--seed", "7"]).output().unwrap();
        assert_eq!(out.status.code(), Some(exit::PASS));
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn bad_input_exits_with_input_error() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["verify", "--line", "5", "--z", "1.5"]), Some(exit::INPUT_ERROR));
    assert_eq!(code(&["verify", "--input", "/nonexistent/graph.txt"]), Some(exit::INPUT_ERROR));
    assert_eq!(code(&["verify"]), Some(exit::INPUT_ERROR));
    assert_eq!(code(&["verify", "--line", "5", "--tol", "0"]), Some(exit::INPUT_ERROR));
    assert_eq!(code(&["--help"]), Some(exit::PASS));
}

#[test]
fn edge_list_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c6.txt");
    std::fs::write(&path, "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n").unwrap();
    let out = bin().args(["profile", "--input"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::PASS));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["graph"]["vertices"], 6);
    assert_eq!(v["graph"]["delta"]["delta_thin"].as_f64().unwrap(), cycle_thin_delta(6) as f64);
}

#[test]
fn report_json_ends_with_newline() {
    let out = cmd_profile(&config(Task::Profile, ProviderKind::Line { n: 4 })).unwrap();
    assert!(output::report_json(&out).unwrap().ends_with("}\n"));
}

proptest! {
    #[test]
    fn complex_parse_round_trip(re in -0.99f64..0.99, im in -0.99f64..0.99) {
        let text = format!("{re:?}{}{:?}i", if im < 0.0 { "" } else { "+" }, im);
        let z = hyperschur_cli::config::parse_complex(&text).unwrap();
        prop_assert_eq!(z, Complex64::new(re, im));
    }

    #[test]
    fn polar_parse(r in 0.0f64..0.99, deg in -360.0f64..360.0) {
        let z = hyperschur_cli::config::parse_complex(&format!("{r}@{deg}")).unwrap();
        prop_assert!((z.norm() - r).abs() < 1e-12);
    }
}
