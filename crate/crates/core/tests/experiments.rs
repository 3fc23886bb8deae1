//! End-to-end runs of the study drivers on reduced configurations.

use std::fs;
use std::path::Path;

use discharge_core::experiment::*;

fn small(text: &str) -> ExperimentConfig {
    let base = "n_cells = 128\ntau = 0.004\nk_range = 0..4\nfit_k = 2..4\nb_values = 0, -1\npaths = 2000\n";
    parse_config(&format!("{base}{text}")).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn convergence_outputs_are_complete_and_reproducible() {
    let cfg = small("experiment = convergence");
    let study = run_convergence_study(&cfg).unwrap();
    assert_eq!(study.cells.len(), 2 * 5);
    assert_eq!(study.failures(), 0);
    for c in &study.cells {
        for q in Quantity::ALL {
            let v = c.get(q).unwrap();
            assert!(v.is_finite() && v >= 0.0);
        }
    }

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    study.write(&cfg, a.path()).unwrap();
    run_convergence_study(&cfg)
        .unwrap()
        .write(&cfg, b.path())
        .unwrap();
    let table1 = read(a.path(), "table1.csv");
    assert!(table1.starts_with("quantity,b,R_or_alpha,A_or_beta,residual\n"));
    assert_eq!(table1.lines().count(), 1 + 2 * Quantity::ALL.len());
    for name in [
        "table1.csv",
        "discrepancies.csv",
        "convergence_f_b0.csv",
        "convergence_N0_b-1.csv",
        CONFIG_ECHO,
    ] {
        assert_eq!(
            read(a.path(), name),
            read(b.path(), name),
            "{name} differs between runs"
        );
    }
    assert_eq!(parse_config(&read(a.path(), CONFIG_ECHO)).unwrap(), cfg);
    let report = read(a.path(), "convergence_f_b0.csv");
    assert!(report.starts_with("delta,D,in_fit_window\n1,"));
    assert_eq!(report.matches(",true").count(), 3);
}

#[test]
fn failing_cells_are_marked_not_dropped() {
    // strong excitatory coupling blows up; the b = 0 row must survive
    let cfg = small("b_values = 0, 10");
    let study = run_convergence_study(&cfg).unwrap();
    assert_eq!(study.cells.len(), 10);
    assert!(study
        .cells
        .iter()
        .filter(|c| c.b == 0.0)
        .all(|c| c.values.is_ok()));
    assert!(study
        .cells
        .iter()
        .filter(|c| c.b == 10.0)
        .all(|c| c.values.is_err()));
    let dir = tempfile::tempdir().unwrap();
    study.write(&cfg, dir.path()).unwrap();
    let disc = read(dir.path(), "discrepancies.csv");
    assert_eq!(disc.lines().count(), 1 + 10 * Quantity::ALL.len());
    assert!(disc
        .lines()
        .filter(|l| l.starts_with("10,"))
        .all(|l| l.ends_with(FAILED)));
    assert!(read(dir.path(), "table1.csv").contains(&format!("f,10,{FAILED}")));
    assert!(dir.path().join("failures.txt").exists());
}

#[test]
fn self_similar_outputs() {
    let cfg = small("experiment = selfsim");
    let study = run_self_similar_study(&cfg).unwrap();
    assert_eq!(study.fits.len(), 4);
    let dir = tempfile::tempdir().unwrap();
    study.write(&cfg, dir.path()).unwrap();
    let t2 = read(dir.path(), "table2.csv");
    assert!(t2.starts_with("quantity,b,R_or_alpha,A_or_beta,residual,collapse_error\ndischarge,0,"));
    let profile = read(dir.path(), "profile_killed_b-1.csv");
    let mut lines = profile.lines();
    assert_eq!(lines.next(), Some("delta,z,psi"));
    for l in lines {
        let z: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(z >= 0.0);
    }
}

#[test]
fn validation_rows_carry_verdicts() {
    let cfg = small("experiment = validate\nn_cells = 512\ntau = 0.001");
    let report = run_validation_suite(&cfg).unwrap();
    assert_eq!(report.checks.len(), 13);
    assert!(report.checks.iter().all(|c| c.error.is_none()));
    assert_eq!(report.get("coupling_ordering_rate").unwrap().value, 1.0);
    let dir = tempfile::tempdir().unwrap();
    report.write(&cfg, dir.path()).unwrap();
    let csv = read(dir.path(), "validation.csv");
    assert!(csv.starts_with("check,value,tolerance,pass\ncoupling_ordering_rate,1,1,true\n"));
}

#[test]
fn simulate_and_solve_outputs() {
    let cfg = small("paths = 50\nsample_dt = 0.5\nb = 0.5\nprocess = discharge");
    let run = run_simulate(&cfg).unwrap();
    assert_eq!(run.paths.len(), 50);
    let dir = tempfile::tempdir().unwrap();
    run.write(&cfg, dir.path()).unwrap();
    assert!(read(dir.path(), "paths.csv").starts_with("path_id,event,t,x\n0,sample,0,"));
    assert!(read(dir.path(), "firing.csv").starts_with("t_bin,N_hat,stderr\n"));
    assert!(read(dir.path(), "summary.csv").contains("paths,50"));

    let cfg = small("mode = hard-wall-killed\nsample_dt = 0.25");
    let out = run_solve(&cfg).unwrap();
    assert_eq!(out.snapshots.len(), 5);
    let dir = tempfile::tempdir().unwrap();
    write_solve(&out, &cfg, dir.path()).unwrap();
    let density = read(dir.path(), "density.csv");
    assert_eq!(density.lines().count(), 1 + 5 * out.grid().len());
    let firing = read(dir.path(), "firing.csv");
    assert_eq!(firing.lines().count(), 1 + out.firing.len());
}
