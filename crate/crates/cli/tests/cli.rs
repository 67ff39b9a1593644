use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semirender")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CONFIG: &str = "[dataset]\npoint_count = 60\nimage_size = 16\nunlabeled_2d = 30\nunlabeled_3d = 30\n\
paired_train = 10\npaired_test = 4\n[experiment]\nk_2d = 8\nk_3d = 6\nmlp_hidden = [5]\n\
[experiment.schedule]\nphases = [[0.001, 20]]\nbatch_size = 8\n";

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("c.toml");
    fs::write(&config, CONFIG).unwrap();
    let (data, models, eval) = (root.join("data"), root.join("models"), root.join("eval"));

    ok(&["gen", "--config", s(&config), "--out", s(&data)]);
    ok(&["pretrain", "--config", s(&config), "--data", s(&data), "--out", s(&models)]);
    for method in ["lowdim", "direct", "mlp"] {
        ok(&["fit", "--config", s(&config), "--data", s(&data), "--out", s(&models), "--method", method]);
        let line = ok(&[
            "eval", "--config", s(&config), "--data", s(&data), "--models", s(&models), "--out", s(&eval), "--method",
            method,
        ]);
        assert!(line.starts_with(&format!("{method} test average_rmse=")), "{line}");
        let csv = fs::read_to_string(eval.join(format!("eval_{method}_test.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 1 + 4 * 3);
    }

    let preds: Vec<_> = fs::read_dir(eval.join("predictions_lowdim_test")).unwrap().collect();
    assert_eq!(preds.len(), 4 * 3);
    let pred = preds[0].as_ref().unwrap().path();
    let stem = pred.file_stem().unwrap().to_str().unwrap();
    let truth = data.join("shapes").join(format!("{}.ply", stem.split("_p").next().unwrap()));
    let hm = root.join("hm.ply");
    let line = ok(&["heatmap", "--prediction", s(&pred), "--truth", s(&truth), "--out", s(&hm)]);
    assert!(line.starts_with("mode=corresponded points=60"), "{line}");
    assert!(ok(&["inspect", s(&hm)]).contains("error:"));

    let img = root.join("r.pgm");
    ok(&["render", "--input", s(&truth), "--yaw", "-45", "--size", "20", "--out", s(&img)]);
    assert!(ok(&["inspect", s(&img)]).contains("size:   20x20"));
    assert!(ok(&["inspect", s(&models.join("image.ssm"))]).contains("dim:             256"));
    assert!(ok(&["inspect", s(&models.join("map_mlp.map"))]).contains("[8, 5, 6]"));
    assert!(ok(&["inspect", s(&data)]).contains("paired_train  30"));

    let cmp = root.join("cmp");
    let csv = ok(&["compare", "--config", s(&config), "--data", s(&data), "--out", s(&cmp)]);
    assert!(csv.starts_with("method,k_2d,k_3d,train_rmse,test_rmse\nlowdim,"));
    assert_eq!(fs::read_to_string(cmp.join("comparison.csv")).unwrap(), csv);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let junk = root.join("junk.bin");
    fs::write(&junk, b"hello").unwrap();
    let out = run(&["inspect", s(&junk)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown file format"));

    let trunc = root.join("t.ssm");
    fs::write(&trunc, b"{\"dim\":4,\"k\":1,\"format_version\":1}\n\x00\x00").unwrap();
    let out = run(&["inspect", s(&trunc)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unexpected end of file"));

    let missing = root.join("missing.ply");
    let out = run(&["render", "--input", s(&missing), "--out", s(&root.join("x.pgm"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.ply"));

    let bad = root.join("bad.toml");
    fs::write(&bad, "[dataset]\nbogus = 1\n").unwrap();
    let out = run(&["gen", "--config", s(&bad), "--out", s(&root.join("d"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: invalid config"));
}

#[test]
fn mismatched_models_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("c.toml");
    fs::write(&config, CONFIG).unwrap();
    let other = root.join("other.toml");
    fs::write(&other, CONFIG.replace("image_size = 16", "image_size = 12")).unwrap();
    let (data, data2, models) = (root.join("data"), root.join("data2"), root.join("models"));
    ok(&["gen", "--config", s(&config), "--out", s(&data)]);
    ok(&["gen", "--config", s(&other), "--out", s(&data2)]);
    ok(&["pretrain", "--config", s(&config), "--data", s(&data), "--out", s(&models)]);
    ok(&["fit", "--config", s(&config), "--data", s(&data), "--out", s(&models), "--method", "lowdim"]);
    let out = run(&[
        "eval", "--data", s(&data2), "--models", s(&models), "--out", s(&root.join("e")), "--method", "lowdim",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("expected 256, got 144"), "{err}");
}

#[test]
fn divergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("c.toml");
    fs::write(&config, CONFIG.replace("phases = [[0.001, 20]]", "phases = [[1e12, 20]]")).unwrap();
    let (data, models) = (root.join("data"), root.join("models"));
    ok(&["gen", "--config", s(&config), "--out", s(&data)]);
    ok(&["pretrain", "--config", s(&config), "--data", s(&data), "--out", s(&models)]);
    let out = run(&["fit", "--config", s(&config), "--data", s(&data), "--out", s(&models), "--method", "mlp"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(run(&["fit", "--data", "x", "--out", "y", "--method", "cnn"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
