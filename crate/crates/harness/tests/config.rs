use captension_harness::{ExperimentConfig, HarnessError, InitialFlow};

#[test]
fn parses_keys_and_comments() {
    let c = ExperimentConfig::parse(
        "# comment\n n_theta = 16 \nn_r=8\nk_list = 10, 20.5,40 # trailing\ninitial_flow = rotation\n\
         reference_model = vorticity-oracle\ntol_l1 = 1e-10\nout_dir = /tmp/x\n",
    )
    .unwrap();
    assert_eq!(c.n_theta, 16);
    assert_eq!(c.n_r, 8);
    assert_eq!(c.k_list, vec![10.0, 20.5, 40.0]);
    assert_eq!(c.initial_flow, InitialFlow::Rotation);
    assert_eq!(c.reference_model, "vorticity-oracle");
    assert_eq!(c.tolerances.tol_l1, 1e-10);
    assert_eq!(c.out_dir.to_str(), Some("/tmp/x"));
}

#[test]
fn empty_text_gives_defaults() {
    assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
}

#[test]
fn rejects_malformed_input() {
    for (text, code) in [
        ("n_theta 16", 3),
        ("bogus = 1", 3),
        ("n_theta = x", 3),
        ("k_list = 200, 100", 3),
        ("k_list = -1", 3),
        ("t_final = 0", 3),
        ("n_theta = 15", 3),
        ("free_boundary_model = nope", 3),
        ("initial_flow = swirl", 3),
    ] {
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.exit_code(), code, "{text}: {e}");
    }
    assert!(matches!(
        ExperimentConfig::parse("\n\nbogus = 1"),
        Err(HarnessError::ConfigLine { line: 3, .. })
    ));
}
