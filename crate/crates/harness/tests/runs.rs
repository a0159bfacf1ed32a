use std::process::Command;

use captension_harness::output::parse_csv;
use captension_harness::runner::fit_rows;
use captension_harness::{run_pair, run_single, run_sweep, ExperimentConfig, InitialFlow};

fn quick() -> ExperimentConfig {
    ExperimentConfig {
        t_final: 0.02,
        output_cadence: 0.005,
        k_list: vec![100.0],
        ..ExperimentConfig::default()
    }
}

#[test]
fn rest_gives_zero_gaps() {
    let cfg = ExperimentConfig {
        initial_flow: InitialFlow::Rest,
        ..quick()
    };
    let r = run_single(&cfg, 100.0).unwrap();
    assert!(r.row.converged);
    // roundoff from the reprojection after each step
    assert!(r.row.sup_eta_gap[1] < 1e-14);
    assert!(r.row.sup_etadot_gap_h1 < 1e-14);
    assert!(r.row.sup_nabla_f[0] < 1e-14);
}

#[test]
fn rotation_is_k_independent() {
    let cfg = ExperimentConfig {
        initial_flow: InitialFlow::Rotation,
        amplitude: 1.0,
        ..quick()
    };
    for k in [10.0, 1000.0] {
        let r = run_single(&cfg, k).unwrap();
        assert!(r.row.sup_eta_gap[1] < 1e-6, "{k}: {:?}", r.row);
        assert!(r.row.sup_nabla_f[0] < 1e-7);
    }
}

#[test]
fn every_model_pairs_with_fixed_euler() {
    let cfg = ExperimentConfig {
        t_final: 0.01,
        ..quick()
    };
    for m in captension_harness::MODEL_NAMES {
        let r = run_pair(&cfg, 100.0, m, "fixed-euler").unwrap();
        assert!(r.row.converged, "{m}");
        assert!(r.row.sup_eta_gap[1] < 1e-4, "{m}: {:?}", r.row);
        assert_eq!(r.samples.len(), 3);
    }
}

#[test]
fn single_k_sweep_has_no_fits() {
    let res = run_sweep(&quick()).unwrap();
    assert_eq!(res.rows.len(), 1);
    assert!(res.fits.is_empty());
    assert!(fit_rows(&[]).is_empty());
}

#[test]
fn stream_sweep_decreases_in_k() {
    let cfg = ExperimentConfig {
        t_final: 0.03,
        k_list: vec![100.0, 200.0, 400.0],
        ..ExperimentConfig::default()
    };
    let res = run_sweep(&cfg).unwrap();
    let ks: Vec<f64> = res.rows.iter().map(|r| r.k).collect();
    assert_eq!(ks, cfg.k_list);
    assert!(res.rows.windows(2).all(|w| w[1].sup_nabla_f[0] < w[0].sup_nabla_f[0]));
    let eta = res.fits.iter().find(|(q, _)| *q == "sup_eta_gap_H1").unwrap().1;
    assert!(eta.slope > 0.0);
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_captension")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    std::fs::write(p("bad.cfg"), "n_theta = 32\nwhat = 1\n").unwrap();
    std::fs::write(p("ok.cfg"), "t_final = 0.01\noutput_cadence = 0.005\nk_list = 100, 200, 400\n").unwrap();
    assert_eq!(cli(&["run", "--config", &p("bad.cfg"), "--k", "100"]).0, 3);
    assert_eq!(cli(&["run", "--config", &p("missing.cfg"), "--k", "100"]).0, 3);
    assert_eq!(cli(&["run", "--config", &p("ok.cfg"), "--k", "100", "--n-theta", "7"]).0, 3);

    let (code, _) = cli(&["run", "--config", &p("ok.cfg"), "--k", "100", "--out-dir", &p("r")]);
    assert_eq!(code, 0);
    let rows = parse_csv(&std::fs::read_to_string(dir.path().join("r/run_k100.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);

    let (code, _) = cli(&["sweep", "--config", &p("ok.cfg"), "--out-dir", &p("s"), "--t-final", "0.005"]);
    assert_eq!(code, 0);
    let rows = parse_csv(&std::fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    let svg = std::fs::read_to_string(dir.path().join("s/sup_nabla_f_L2.svg")).unwrap();
    assert!(svg.contains("slope"));

    let (code, out) = cli(&["oracle-compare", "--config", &p("ok.cfg"), "--out-dir", &p("o")]);
    assert_eq!(code, 0);
    assert!(out.contains("split-as-printed,100,"));
    assert!(dir.path().join("o/oracle_compare.csv").exists());
}
