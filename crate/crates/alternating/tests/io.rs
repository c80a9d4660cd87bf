use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use alternating::config::ExperimentConfig;
use alternating::formats::{self, PerStreamRow};
use alternating::runner;
use alternating::snapshot;
use alternating::Error;
use alternating_core::controller::run_stream;
use alternating_core::drift_sim::{DriftKind, NoiseParams, StreamSpec};
use alternating_core::elm::ElmModel;
use alternating_core::feature_map::{Activation, HiddenLayer, LayerSpec};
use alternating_core::linear::LinearModel;
use alternating_core::monitor::{PairedRegistration, Policy};
use alternating_core::oselm::OselmState;
use alternating_core::{Algorithm, ControllerConfig, Matrix, Stream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.corpus.n_abrupt = 1;
    cfg.corpus.n_gradual = 1;
    cfg.corpus.length = 500;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alternating"))
}

#[test]
fn default_config_round_trips_through_toml() {
    let cfg = ExperimentConfig::default();
    let text = cfg.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    let mut paired = cfg.clone();
    paired.controller.policy = Policy::Paired(PairedRegistration::ShortBetterUnacceptable);
    assert_eq!(ExperimentConfig::from_toml(&paired.to_toml().unwrap()).unwrap(), paired);
}

#[test]
fn file_keys_override_flags_and_leave_the_rest() {
    let mut flags = ExperimentConfig::default();
    flags.controller.window = 40;
    flags.controller.delta = 0.3;
    flags.corpus.n_abrupt = 5;
    let merged = flags.overlay_file("[controller]\nwindow = 30\n\n[corpus]\nbase_seed = 99\n").unwrap();
    assert_eq!(merged.controller.window, 30);
    assert_eq!(merged.controller.delta, 0.3);
    assert_eq!(merged.corpus.n_abrupt, 5);
    assert_eq!(merged.corpus.base_seed, 99);
    assert_eq!(flags.overlay_file("").unwrap(), flags);
}

#[test]
fn bad_configs_are_config_errors() {
    let base = ExperimentConfig::default();
    for text in [
        "nonsense = 1",
        "[controller]\ndelta = 1.5",
        "[controller]\nleast_wait = 50",
        "[controller]\nlambda = 0.0",
        "version = 2",
        "algorithms = []",
        "algorithms = [\"oselm\", \"oselm\"]",
        "algorithms = [\"perceptron\"]",
        "[corpus]\nn_abrupt = 0\nn_gradual = 0",
        "[corpus]\nlength = 100",
        "[sweep]\ndeltas = []",
        "[sweep]\nwindows = [0]",
        "[controller]\nwindow = \"twenty\"",
    ] {
        let err = base.overlay_file(text).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        assert_eq!(err.exit_code(), 2, "{text}");
    }
}

#[test]
fn exit_codes_by_error_kind() {
    use alternating_core::Error as E;
    assert_eq!(Error::Core(E::Singular).exit_code(), 3);
    assert_eq!(Error::Core(E::NumericalBreakdown).exit_code(), 3);
    assert_eq!(Error::Core(E::NearZeroTarget { index: 0, value: 0.0 }).exit_code(), 3);
    assert_eq!(Error::Core(E::InvalidConfig("x")).exit_code(), 2);
    assert_eq!(Error::Core(E::InsufficientData { needed: 2, got: 1 }).exit_code(), 2);
    assert_eq!(Error::Format { path: "f".into(), msg: "m".into() }.exit_code(), 1);
}

#[test]
fn stream_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = StreamSpec::draw(0, DriftKind::Abrupt, 300, &NoiseParams::default(), &mut rng).unwrap().generate().unwrap();
    let path = dir.path().join("s.csv");
    formats::write_stream(&path, &d.stream, Some(&d.oracle.eta)).unwrap();
    let (back, eta) = formats::read_stream(&path).unwrap();
    assert_eq!(back, d.stream);
    assert_eq!(eta.unwrap(), d.oracle.eta);

    let multi = Stream::new(Matrix::from_fn(4, 2, |i, j| (i + j) as f64 * 0.1), Matrix::from_fn(4, 3, |i, j| 1.0 + (i * j) as f64)).unwrap();
    formats::write_stream(&path, &multi, None).unwrap();
    assert_eq!(formats::read_stream(&path).unwrap(), (multi, None));
}

#[test]
fn malformed_stream_csvs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    for text in ["a,b\n1,2\n", "x1,y\n1,abc\n", "x1,y\n1\n"] {
        std::fs::write(&path, text).unwrap();
        let err = formats::read_stream(&path).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{text:?}: {err}");
    }
    std::fs::write(&path, "x1,x2,y\n").unwrap();
    assert!(formats::read_stream(&path).is_err(), "empty stream accepted");
}

#[test]
fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = StreamSpec::draw(0, DriftKind::Gradual, 400, &NoiseParams::default(), &mut rng).unwrap().generate().unwrap().stream;
    let records = run_stream(&ControllerConfig::default(), &s).unwrap();
    let path = dir.path().join("r.csv");
    formats::write_records(&path, &records).unwrap();
    let rows = formats::read_records(&path).unwrap();
    assert_eq!(rows.len(), records.len());
    for (r, row) in records.iter().zip(&rows) {
        assert_eq!((r.index, &r.y_true, &r.y_pred, r.reset, r.selector), (row.index, &row.y_true, &row.y_pred, row.reset, row.selector));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("index,y_true,y_pred,err_L,err_S,q_bit,reset,selector\n"));
}

#[test]
fn per_stream_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let rows = vec![
        PerStreamRow { algorithm: "oselm".into(), stream_id: "s000".into(), kind: "abrupt".into(), mean_mape: 1.5, reset_indices: vec![] },
        PerStreamRow { algorithm: "alternating_learners".into(), stream_id: "s000".into(), kind: "abrupt".into(), mean_mape: 0.25, reset_indices: vec![120, 480] },
    ];
    formats::write_per_stream(&path, &rows).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "algorithm,stream_id,kind,mean_mape,n_resets,reset_indices\noselm,s000,abrupt,1.5,0,\nalternating_learners,s000,abrupt,0.25,2,120;480\n"
    );
}

#[test]
fn snapshots_round_trip_and_check_kind() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Matrix::from_fn(50, 3, |_, _| rng.random_range(-1.0..1.0));
    let y = Matrix::from_fn(50, 1, |i, _| x.row(i)[0] - 2.0 * x.row(i)[2]);
    let layer = Arc::new(HiddenLayer::new(LayerSpec { input_dim: 3, width: 8, seed: 5, activation: Activation::Tanh }).unwrap());

    let elm = ElmModel::train(layer.clone(), &x, &y, 1e-6).unwrap();
    let path = dir.path().join("elm.json");
    snapshot::save(&path, &elm).unwrap();
    assert_eq!(snapshot::load::<ElmModel>(&path).unwrap(), elm);

    let mut os = OselmState::init(layer.clone(), &x.slice_rows(0, 20), &y.slice_rows(0, 20), 1e-6).unwrap();
    os.update(&x.slice_rows(20, 50), &y.slice_rows(20, 50)).unwrap();
    let back: OselmState = snapshot::from_json(&snapshot::to_json(&os).unwrap()).unwrap();
    assert_eq!(back, os);

    let lin = LinearModel::fit(&x, &y, 1e-6).unwrap();
    assert_eq!(snapshot::from_json::<LinearModel>(&snapshot::to_json(&lin).unwrap()).unwrap(), lin);
    assert_eq!(snapshot::from_json::<HiddenLayer>(&snapshot::to_json(layer.as_ref()).unwrap()).unwrap(), *layer);

    let cfg = ControllerConfig { window: 30, policy: Policy::Paired(PairedRegistration::ShortBetter), ..ControllerConfig::default() };
    assert_eq!(snapshot::from_json::<ControllerConfig>(&snapshot::to_json(&cfg).unwrap()).unwrap(), cfg);
    let spec = StreamSpec::draw(2, DriftKind::Abrupt, 2000, &NoiseParams::default(), &mut rng).unwrap();
    assert_eq!(snapshot::from_json::<StreamSpec>(&snapshot::to_json(&spec).unwrap()).unwrap(), spec);

    let err = snapshot::load::<OselmState>(&path).unwrap_err();
    assert!(err.to_string().contains("elm_model"), "{err}");
    let v2 = snapshot::to_json(&elm).unwrap().replace("\"version\": 1", "\"version\": 2");
    assert!(snapshot::from_json::<ElmModel>(&v2).is_err());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = small_config(&dir.path().join("a"));
    a.threads = 1;
    let mut b = small_config(&dir.path().join("b"));
    b.threads = 4;
    runner::run_experiment(&a).unwrap();
    runner::run_experiment(&b).unwrap();
    for f in ["summary.csv", "per_stream.csv", "manifest.json", "records/alternating_learners/s001.csv"] {
        assert_eq!(std::fs::read(a.output_dir.join(f)).unwrap(), std::fs::read(b.output_dir.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn algorithms_share_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    runner::run_experiment(&cfg).unwrap();
    let reference = formats::read_records(&runner::records_path(dir.path(), Algorithm::StaticElm, "s000")).unwrap();
    for a in Algorithm::ALL {
        let rows = formats::read_records(&runner::records_path(dir.path(), a, "s000")).unwrap();
        let labels: Vec<_> = rows.iter().map(|r| &r.y_true).collect();
        assert_eq!(labels, reference.iter().map(|r| &r.y_true).collect::<Vec<_>>(), "{}", a.name());
    }
}

#[test]
fn summarize_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.algorithms = vec![Algorithm::AlternatingLearners, Algorithm::StaticElm];
    let report = runner::run_experiment(&cfg).unwrap();
    let summary = std::fs::read(dir.path().join("summary.csv")).unwrap();
    let per_stream = std::fs::read(dir.path().join("per_stream.csv")).unwrap();
    std::fs::remove_file(dir.path().join("summary.csv")).unwrap();
    let again = runner::summarize_dir(dir.path()).unwrap();
    assert_eq!(again, report.results);
    assert_eq!(std::fs::read(dir.path().join("summary.csv")).unwrap(), summary);
    assert_eq!(std::fs::read(dir.path().join("per_stream.csv")).unwrap(), per_stream);
}

#[test]
fn manifest_regenerates_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let corpus = runner::generate(&cfg).unwrap();
    let manifest = runner::Manifest::load(dir.path()).unwrap();
    assert_eq!(manifest.streams.len(), 2);
    assert!(manifest.outputs.contains(&"streams/s001.csv".to_string()));
    for (m, e) in manifest.streams.iter().zip(&corpus) {
        let regenerated = m.spec.as_ref().unwrap().generate().unwrap().stream;
        let (from_csv, _) = formats::read_stream(&dir.path().join("streams").join(format!("{}.csv", m.id))).unwrap();
        assert_eq!(regenerated, e.stream);
        assert_eq!(from_csv, e.stream);
    }
}

#[test]
fn external_stream_csv_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = Matrix::from_fn(300, 2, |_, _| rng.random_range(0.0..1.0));
    let y = Matrix::from_fn(300, 1, |i, _| 50.0 + 10.0 * x.row(i)[0] + if i > 200 { 20.0 } else { 0.0 });
    let csv_path = dir.path().join("plant.csv");
    formats::write_stream(&csv_path, &Stream::new(x, y).unwrap(), None).unwrap();
    let mut cfg = small_config(&dir.path().join("out"));
    cfg.stream_csv = Some(csv_path);
    let report = runner::run_experiment(&cfg).unwrap();
    assert_eq!(report.results.per_stream.len(), 4);
    assert!(report.results.per_stream.iter().all(|r| r.stream_id == "plant" && r.kind == "external"));
}

#[test]
fn cli_runs_and_reports_errors_by_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, "[corpus]\nlength = 400\n").unwrap();
    let status = bin()
        .args(["run", "--n-abrupt", "1", "--n-gradual", "1", "--length", "2000", "--window", "30", "--no-records"])
        .arg("--config")
        .arg(&cfg_path)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let echoed = ExperimentConfig::from_toml(&std::fs::read_to_string(out.join("config.toml")).unwrap()).unwrap();
    assert_eq!(echoed.corpus.length, 400);
    assert_eq!(echoed.controller.window, 30);
    assert!(!out.join("records").exists());

    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["run", "--delta", "0", "-o", out.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["run", "--stream-csv", "/nonexistent/stream.csv"]), Some(1));
    assert_eq!(code(&["summarize", dir.path().to_str().unwrap()]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn near_zero_targets_exit_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let x = Matrix::from_fn(200, 1, |i, _| i as f64);
    let y = Matrix::from_fn(200, 1, |i, _| if i == 150 { 0.0 } else { 1.0 });
    let path = dir.path().join("z.csv");
    formats::write_stream(&path, &Stream::new(x, y).unwrap(), None).unwrap();
    let out = bin()
        .args(["run", "--algorithms", "static-elm", "--no-records", "--stream-csv"])
        .arg(&path)
        .arg("-o")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
