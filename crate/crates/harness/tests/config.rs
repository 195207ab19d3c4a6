use fmm_harness::config::{Experiment, RunConfig, SweepParameter};
use fmm_harness::plot::{plot_rows, Chart};
use fmm_harness::report::{read_csv, write_csv, RowTemplate};
use fmm_harness::HarnessError;

const ALL: [Experiment; 5] =
    [Experiment::AnalyzeSnr, Experiment::HipassAblation, Experiment::FmmRun, Experiment::Sweep, Experiment::CompareWeighting];

#[test]
fn defaults_round_trip_through_toml() {
    for e in ALL {
        let cfg = RunConfig::for_experiment(e);
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
        assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn partial_file_merges_over_experiment_defaults() {
    let cfg = RunConfig::from_toml("experiment = \"hipass-ablation\"\nseed_count = 7\n[filter]\ncutoffs = [0.3]\n").unwrap();
    assert_eq!(cfg.experiment, Experiment::HipassAblation);
    assert_eq!(cfg.num_steps, 15);
    assert_eq!(cfg.seed_list(), (0..7).collect::<Vec<_>>());
    assert_eq!(cfg.filter.cutoffs, vec![0.3]);
    let cfg = RunConfig::from_toml_as("seeds = [4, 2]\n[sweep]\nparameter = \"sigma\"\n", Experiment::Sweep).unwrap();
    assert_eq!(cfg.seed_list(), vec![4, 2]);
    assert_eq!(cfg.sweep.parameter, SweepParameter::Sigma);
    assert!(RunConfig::from_toml_as("experiment = \"sweep\"\n", Experiment::FmmRun).is_err());
}

#[test]
fn unknown_keys_are_errors() {
    for text in ["seed_cuont = 3\n", "[weights]\nalpah = 0.2\n", "[nope]\nx = 1\n", "experiment = \"fmm\"\n"] {
        let err = RunConfig::from_toml(text).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{text}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn validation_rejects_bad_values() {
    let reject = |text: &str, e: Experiment| {
        let cfg = RunConfig::from_toml_as(text, e).unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text}: {err}");
    };
    reject("seeds = []\n", Experiment::AnalyzeSnr);
    reject("seed_count = 0\n", Experiment::FmmRun);
    reject("num_steps = 16\n", Experiment::HipassAblation);
    reject("[sweep]\nvalues = [0.1, 0.2]\n", Experiment::Sweep);
    reject("[weights]\nalpha = 0.0\n", Experiment::FmmRun);
    reject("[grid]\nheight = 1\n", Experiment::FmmRun);
    reject("[snr]\ntimesteps = [0]\n", Experiment::AnalyzeSnr);
    reject("num_steps = 2000\n", Experiment::FmmRun);
    reject("[metrics]\nband_cutoff = 1.5\n", Experiment::FmmRun);
}

#[test]
fn hash_tracks_everything_but_the_output_directory() {
    let a = RunConfig::default();
    let mut b = a.clone();
    b.out_dir = "elsewhere".into();
    assert_eq!(a.hash(), b.hash());
    b.weights.alpha = 0.25;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn plot_stage_rejects_foreign_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    let other = RunConfig { seed_count: 3, ..cfg.clone() };
    let rows = vec![
        RowTemplate::new("fmm-run", &cfg.hash()).row("x", 1.0),
        RowTemplate::new("fmm-run", &other.hash()).row("x", 2.0),
    ];
    let csv = dir.path().join("r.csv");
    write_csv(&csv, &rows).unwrap();
    let back = read_csv(&csv).unwrap();
    assert_eq!(back, rows);
    let chart = |_: &[fmm_harness::report::ReportRow]| Chart {
        title: "t".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        log_y: false,
        series: vec![],
    };
    let err = plot_rows(&dir.path().join("p.svg"), &back, &cfg.hash(), chart).unwrap_err();
    assert!(matches!(err, HarnessError::Report(_)));
    plot_rows(&dir.path().join("p.svg"), &back[..1], &cfg.hash(), chart).unwrap();
    assert!(std::fs::read_to_string(dir.path().join("p.svg")).unwrap().starts_with("<svg"));
}
