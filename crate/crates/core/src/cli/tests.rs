use super::*;

fn cli_for(cmd: Command, out: &Path) -> Cli {
    Cli { command: cmd, config: None, out: out.to_path_buf(), seed: None, threads: Some(2), backend: None }
}

fn read_envelope(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_config_round_trips() {
    let cfg = RunConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
}

#[test]
fn partial_config_fills_defaults() {
    let cfg = RunConfig::from_json(r#"{"seed": 7, "scaling": {"eta": [100, 200, 400, 800, 1600]}}"#).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.scaling.eta.values(), vec![100.0, 200.0, 400.0, 800.0, 1600.0]);
    assert_eq!(cfg.params, RunConfig::default().params);
    let r = RunConfig::from_json(r#"{"sede": 7}"#).unwrap_err();
    assert!(matches!(r, Error::Config(_)));
}

#[test]
fn grid_forms() {
    let g: Grid = serde_json::from_str(r#"{"lo": 1, "hi": 100, "n": 3, "log": true}"#).unwrap();
    assert_eq!(g.values().len(), 3);
    assert!((g.values()[1] - 10.0).abs() < 1e-12);
    let g: Grid = serde_json::from_str(r#"{"lo": 0, "hi": 1, "n": 5}"#).unwrap();
    assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn overrides_reach_the_ensemble_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cli = cli_for(Command::Langevin, dir.path());
    cli.seed = Some(99);
    cli.backend = Some(Backend::Ensemble);
    let cfg = RunConfig::default().resolve(&cli);
    assert_eq!(cfg.seed, 99);
    assert_eq!(cfg.langevin.ensemble.seed, 99);
    assert_eq!(cfg.backend_config.ensemble.seed, 99);
    assert_eq!(cfg.backend, Backend::Ensemble);
}

#[test]
fn steady_vacuum_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.params = ModelParams::normalized(100.0, 0.0, 0.0, 1.0, 0.1).unwrap();
    cfg.steady.n_c = Some(12);
    let files = run_config(Command::Steady, &cfg, dir.path()).unwrap();
    assert_eq!(files, vec![dir.path().join("steady.json")]);
    let v = read_envelope(&files[0]);
    let echoed: RunConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
    assert!(v["result"]["observables"]["n"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn malformed_eta_list_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = RunConfig::default();
    cfg.scaling.eta = Grid::List(vec![1e3, -5.0, 1e5]);
    let e = run_config(Command::Scaling, &cfg, &out).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(!out.exists());
    cfg.scaling.eta = Grid::List(vec![1e3, 2e3]);
    assert_eq!(run_config(Command::Scaling, &cfg, &out).unwrap_err().exit_code(), 2);
    assert!(!out.exists());
}

#[test]
fn solver_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.params = cfg.params.with_mu(1.0);
    cfg.wigner.numeric = false;
    let e = run_config(Command::Wigner, &cfg, dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 1);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn zero_threads_is_a_config_error() {
    let mut cfg = RunConfig::default();
    cfg.threads = Some(0);
    assert_eq!(run_config(Command::Steady, &cfg, Path::new("unused")).unwrap_err().exit_code(), 2);
}

#[test]
fn phase_diagram_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.params = ModelParams::normalized(100.0, 2.0, 0.0, 1.0, 2.0).unwrap();
    cfg.phase_diagram = PhaseDiagramConfig { mu: Grid::List(vec![0.0, 2.0]), g: Grid::List(vec![0.5, 2.5]) };
    run_config(Command::PhaseDiagram, &cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("phase_diagram.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("mu,g,phase_minus,phase_plus"));
    assert_eq!(lines.count(), 4);
    let v = read_envelope(&dir.path().join("phase_diagram.json"));
    assert_eq!(v["result"]["nodes"], 4);
}

#[test]
fn scaling_quadrature_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.params = ModelParams::normalized(1e3, 2.0, 1.0, 1.0, 3.0).unwrap();
    cfg.scaling.eta = Grid::Range { lo: 1e3, hi: 1e5, n: 7, log: true };
    run_config(Command::Scaling, &cfg, dir.path()).unwrap();
    let v = read_envelope(&dir.path().join("scaling.json"));
    let slope = v["result"]["zeta"]["Ok"]["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.1, "{slope}");
    assert_eq!(v["result"]["failed_samples"], 0);
}
