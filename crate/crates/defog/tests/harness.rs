use std::fs;
use std::path::Path;

use defog::config::{load_plan, PlanFile};
use defog::harness::CSV_COLUMNS;
use defog::{
    emit_report, run_noreference_experiment, run_reference_experiment, save_image, DefogError, ExperimentKind,
    ExperimentPlan, InputRef, Method,
};
use defog_core::PlanarImage;

fn builtin(name: &str) -> InputRef {
    InputRef::Builtin(name.to_string())
}

fn count_files(dir: &Path) -> usize {
    fs::read_dir(dir).map(|d| d.count()).unwrap_or(0)
}

#[test]
fn reference_sweep_has_one_record_per_combination() {
    let out = tempfile::tempdir().unwrap();
    let plan = ExperimentPlan::new(vec![builtin("meadow")], out.path());
    let outcome = run_reference_experiment(&plan).unwrap();
    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.records.len(), 6);
    assert_eq!(count_files(&out.path().join("restored")), 6);
    for r in &outcome.records {
        assert!(r.report.mse.is_some() && r.report.ssim.is_some());
        match r.method {
            Method::Dcp => assert_eq!(r.iterations, 0),
            Method::Proposed => {
                assert!(r.converged && r.iterations > 0);
                assert!(r.final_rel_err.unwrap() < plan.config.toll);
            }
            Method::Foggy => panic!("no baseline rows in reference runs"),
        }
    }
    let levels: Vec<_> = outcome.records.iter().map(|r| (r.fog_level.unwrap(), r.method)).collect();
    assert_eq!(levels[0], (0.1, Method::Dcp));
    assert_eq!(levels[5], (0.3, Method::Proposed));

    emit_report(&outcome.records, out.path(), false).unwrap();
    let csv = fs::read_to_string(out.path().join("report.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 6);
}

#[test]
fn zero_fog_without_noise_leaves_a_dark_scene_alone() {
    // One channel at zero everywhere puts the dark channel at zero, so the
    // estimated transmission is one and recovery is the identity.
    let dir = tempfile::tempdir().unwrap();
    let img = PlanarImage::from_fn(20, 20, 3, |i, j, c| if c == 2 { 0.0 } else { 0.2 + 0.03 * ((i + j) % 7) as f64 })
        .unwrap();
    let path = dir.path().join("dark.png");
    save_image(&img, &path).unwrap();
    let mut plan = ExperimentPlan::new(vec![InputRef::File(path)], dir.path().join("out"));
    plan.fog_levels = vec![0.0];
    plan.methods = vec![Method::Dcp];
    plan.noise_sigma = 0.0;
    let outcome = run_reference_experiment(&plan).unwrap();
    assert_eq!(outcome.records.len(), 1);
    assert!(outcome.records[0].report.mse.unwrap() < 1e-12);
}

#[test]
fn noreference_run_adds_a_baseline_row() {
    let dir = tempfile::tempdir().unwrap();
    let extra = dir.path().join("capture.png");
    save_image(&defog::corpus::foggy_scene("misty-quarry").unwrap(), &extra).unwrap();
    let inputs = vec![builtin("misty-harbor"), builtin("misty-quarry"), InputRef::File(extra), builtin("misty-harbor")];
    let plan = ExperimentPlan::new(inputs, dir.path().join("out"));
    let outcome = run_noreference_experiment(&plan).unwrap();
    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.records.len(), 12);
    let baseline = &outcome.records[0];
    assert_eq!(baseline.method, Method::Foggy);
    assert_eq!(baseline.report.cri, 1.0);
    assert!(baseline.report.mse.is_none() && baseline.fog_level.is_none());
    // The file input is the PNG round trip of a quantized scene, so it scores
    // exactly like the builtin one.
    assert_eq!(outcome.records[3].report, outcome.records[6].report);
}

#[test]
fn failures_are_collected_without_stopping_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = vec![builtin("harbor"), InputRef::File(dir.path().join("missing.png"))];
    let mut plan = ExperimentPlan::new(inputs, dir.path().join("out"));
    plan.fog_levels = vec![0.2];
    let outcome = run_reference_experiment(&plan).unwrap();
    assert_eq!(outcome.records.len(), 2);
    assert_eq!(outcome.failures.len(), 1);
    assert!(outcome.failures[0].message.contains("missing.png"));
}

#[test]
fn invalid_plans_are_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = ExperimentPlan::new(vec![builtin("harbor")], dir.path());
    plan.fog_levels = vec![1.0];
    assert!(matches!(run_reference_experiment(&plan), Err(DefogError::Plan(_))));
    let mut plan = ExperimentPlan::new(vec![builtin("harbor")], dir.path());
    plan.config.tau = -1.0;
    assert!(run_reference_experiment(&plan).is_err());
    assert!(run_reference_experiment(&ExperimentPlan::new(vec![], dir.path())).is_err());
}

#[test]
fn report_needs_records_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_report(&[], dir.path(), false).is_err());

    let mut plan = ExperimentPlan::new(vec![builtin("harbor")], dir.path().join("run"));
    plan.fog_levels = vec![0.2];
    let records = run_reference_experiment(&plan).unwrap().records;
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    emit_report(&records, &a, true).unwrap();
    emit_report(&records, &b, true).unwrap();
    for name in ["report.csv", "report.json", "traces/harbor_proposed_f20.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let trace = fs::read_to_string(a.join("traces/harbor_proposed_f20.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "iter,rel_err,g_max,clamped_fraction");
    assert_eq!(trace.lines().count(), records[1].iterations + 1);
}

#[test]
fn inputs_are_never_touched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clean.png");
    save_image(&defog::corpus::clean_scene("harbor").unwrap(), &path).unwrap();
    let before = fs::read(&path).unwrap();
    let mut plan = ExperimentPlan::new(vec![InputRef::File(path.clone())], dir.path().join("out"));
    plan.fog_levels = vec![0.3];
    run_reference_experiment(&plan).unwrap();
    assert_eq!(fs::read(&path).unwrap(), before);
}

#[test]
fn plan_files_resolve_against_their_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("plan.toml"),
        "[plan]\ninputs = [\"builtin:harbor\", \"pics/a.png\"]\nfog_levels = [0.15]\noutput_dir = \"out\"\n\n[pde]\ntau = 0.04\n",
    )
    .unwrap();
    let plan = load_plan(dir.path().join("plan.toml"), ExperimentKind::Reference).unwrap();
    assert_eq!(plan.inputs[0], builtin("harbor"));
    assert_eq!(plan.inputs[1], InputRef::File(dir.path().join("pics/a.png")));
    assert_eq!(plan.output_dir, dir.path().join("out"));
    assert_eq!(plan.config.tau, 0.04);

    let empty = PlanFile::parse("").unwrap().into_plan(ExperimentKind::NoReference, dir.path()).unwrap();
    assert_eq!(empty.inputs.len(), defog::corpus::FOGGY_SCENES.len());
    assert!(PlanFile::parse("[plan]\nbogus = 1\n").is_err());
}
