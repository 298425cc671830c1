use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn defog(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defog")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn corpus_synth_and_single_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(defog(&["corpus", "scenes"], d).status.success());
    assert!(d.join("scenes/harbor.png").exists() && d.join("scenes/misty-quarry.png").exists());

    let out =
        defog(&["synth", "scenes/meadow.png", "fog.png", "--level", "0.2", "--noise-sigma", "0.04", "--seed", "3"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = defog(&["single", "fog.png", "clear.png", "--trace", "trace.csv", "--max_iters", "400"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("converged=true"), "{stdout}");
    assert_eq!(defog::load_image(d.join("clear.png")).unwrap().width(), 64);
    assert!(fs::read_to_string(d.join("trace.csv")).unwrap().starts_with("iter,rel_err"));

    let out = defog(&["single", "fog.png", "dcp.png", "--method", "dcp", "--patch-radius", "3"], d);
    assert!(out.status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.toml"), "[plan]\nfog_levels = [1.5]\n").unwrap();
    assert_eq!(defog(&["bench-ref", "bad.toml"], d).status.code(), Some(2));
    fs::write(d.join("bad_tau.toml"), "[pde]\ntau = 0\n").unwrap();
    assert_eq!(defog(&["bench-ref", "bad_tau.toml"], d).status.code(), Some(2));

    fs::write(
        d.join("partial.toml"),
        "[plan]\ninputs = [\"builtin:harbor\", \"nowhere.png\"]\nfog_levels = [0.2]\noutput_dir = \"out\"\n",
    )
    .unwrap();
    let out = defog(&["bench-ref", "partial.toml"], d);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_to_string(d.join("out/report.csv")).unwrap().lines().count(), 3);

    fs::write(d.join("ok.toml"), "[plan]\nfog_levels = [0.2]\noutput_dir = \"ok\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_defog"))
        .args(["bench-ref", "ok.toml"])
        .current_dir(d)
        .env("DEFOG_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(defog(&["single", "nowhere.png", "x.png"], d).status.code(), Some(1));
}
