use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nrm-aug"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) -> PathBuf {
    let root = dir.join("scene");
    ok(&["synth", "--size", "12", "--train-views", "4", "--test-views", "2", "--out", s(&root)]);
    root
}

fn pngs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    v.sort();
    v
}

const TINY: &str = r#"
[train]
iterations = 6
batch_rays = 16
log_interval = 2
val_interval = 3
checkpoint_interval = 3

[train.quadrature]
samples_per_ray = 6

[train.field]
pe_levels_position = 2
pe_levels_direction = 1
mlp1_widths = [8]
latent_dim = 4
mlp2_widths = [8]
embed_dim = 3
"#;

#[test]
fn synth_writes_train_and_test_scenes() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    assert_eq!(pngs(&root.join("train")).len(), 4);
    assert_eq!(pngs(&root.join("test")).len(), 2);
    assert!(root.join("train/transforms.json").is_file());
    assert!(root.join("spec.toml").is_file());
}

#[test]
fn augment_writes_six_replicas_per_image() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let out = dir.path().join("sia");
    ok(&["augment", s(&root.join("train")), "--out", s(&out)]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sia_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["replicas"].as_object().unwrap().len(), 24);
    for kind in ["identity", "brightness", "contrast", "saturation", "hue", "sharpness"] {
        assert_eq!(pngs(&out.join(kind)).len(), 4, "{kind}");
    }
    assert!(out.join("spec.toml").is_file());

    let snapshot = |dir: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((p.clone(), std::fs::read(&p).unwrap()));
                }
            }
        }
        files.sort();
        files
    };
    let first = snapshot(&out);
    ok(&["augment", s(&root.join("train")), "--out", s(&out)]);
    assert_eq!(snapshot(&out), first);
}

#[test]
fn degrade_and_subsample() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let out = dir.path().join("noisy");
    ok(&["degrade", s(&root.join("train")), "--noise", "salt_pepper", "--q", "0.05", "--seed", "3", "--out", s(&out)]);
    assert_eq!(pngs(&out).len(), 4);
    let spec = std::fs::read_to_string(out.join("spec.toml")).unwrap();
    assert!(spec.contains("salt_pepper"), "{spec}");

    let sub = dir.path().join("sub");
    ok(&["subsample", s(&root.join("train")), "--percent", "50", "--out", s(&sub)]);
    assert_eq!(pngs(&sub).len(), 2);
}

#[test]
fn unknown_noise_is_a_usage_error_listing_the_kinds() {
    let out = run(&["degrade", "x", "--noise", "blurry", "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for kind in ["gaussian", "poisson", "salt_pepper", "speckle", "motion_blur"] {
        assert!(err.contains(kind), "{err}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // missing scene: data error
    let out = run(&["augment", s(&dir.path().join("nope")), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    // no output directory: usage
    let out = run(&["augment", "anything"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown config key: usage
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = run(&["augment", "x", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    // out-of-range subsample percentage: usage
    let root = synth(dir.path());
    let out = run(&["subsample", s(&root.join("train")), "--percent", "0", "--out", s(&dir.path().join("z"))]);
    assert_eq!(out.status.code(), Some(2));
    // bad clap flag: usage
    assert_eq!(run(&["render", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn train_render_eval_extract_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let run_dir = dir.path().join("run");
    ok(&[
        "train",
        s(&root.join("train")),
        "--val",
        s(&root.join("test")),
        "--mode",
        "SIA",
        "--config",
        s(&cfg),
        "--out",
        s(&run_dir),
    ]);
    let log = std::fs::read_to_string(run_dir.join("log.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.iter().map(|l| l["iteration"].as_u64().unwrap()).collect::<Vec<_>>(), [2, 3, 4, 6]);
    assert!(lines[1]["val_psnr"].is_number());
    assert!(lines[0]["val_psnr"].is_null());
    assert!(run_dir.join("checkpoint.json").is_file());
    assert!(run_dir.join("checkpoints/iter_0000003.json").is_file());
    let spec = std::fs::read_to_string(run_dir.join("spec.toml")).unwrap();
    assert!(spec.contains("mode = \"sia\""), "{spec}");

    let ckpt = run_dir.join("checkpoint.json");
    let default = dir.path().join("render_default");
    let explicit = dir.path().join("render_explicit");
    let test = root.join("test");
    ok(&["render", s(&test), "--checkpoint", s(&ckpt), "--samples", "8", "--out", s(&default)]);
    ok(&[
        "render",
        s(&test),
        "--checkpoint",
        s(&ckpt),
        "--samples",
        "8",
        "--manipulation",
        "identity",
        "--intensity",
        "0",
        "--out",
        s(&explicit),
    ]);
    let a = pngs(&default);
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(pngs(&explicit)) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(&y).unwrap());
    }
    let hue = dir.path().join("render_hue");
    ok(&["render", s(&test), "--checkpoint", s(&ckpt), "--samples", "8", "--manipulation", "hue", "--intensity", "-0.2", "--out", s(&hue)]);
    assert_eq!(pngs(&hue).len(), 2);

    let metrics_dir = dir.path().join("metrics");
    let stdout = ok(&["eval", "--rendered", s(&default), "--reference", s(&test), "--out", s(&metrics_dir)]);
    let records: Vec<serde_json::Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.iter().any(|r| r["metric"] == "psnr"));
    assert!(records.iter().any(|r| r["metric"] == "ssim"));
    assert!(metrics_dir.join("metrics.jsonl").is_file());
    assert!(metrics_dir.join("spec.toml").is_file());

    // self-comparison reports infinite PSNR as a string
    let stdout = ok(&["eval", "--rendered", s(&test), "--reference", s(&test)]);
    let records: Vec<serde_json::Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let per_image = |metric: &str| records.iter().filter(|r| r["metric"] == metric).map(|r| r["value"].clone()).collect::<Vec<_>>();
    assert_eq!(per_image("psnr"), vec![serde_json::json!("inf"); 2]);
    assert_eq!(per_image("ssim"), vec![serde_json::json!(1.0); 2]);

    let ext = dir.path().join("extract");
    ok(&["extract", "--checkpoint", s(&ckpt), "--threshold", "0.5", "--resolution", "8", "--out", s(&ext)]);
    assert!(ext.join("points.xyz").is_file());
}

#[test]
fn chamfer_of_cloud_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.xyz");
    let b = dir.path().join("b.xyz");
    std::fs::write(&a, "0 0 0\n1 0 0\n").unwrap();
    std::fs::write(&b, "0 0 1\n").unwrap();
    let stdout = ok(&["eval", "--clouds", s(&a), s(&b)]);
    let r: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(r["metric"], "chamfer_sum");
    // a->b: (1 + sqrt 2)/2, b->a: 1
    let expected = (1.0 + 2f64.sqrt()) / 2.0 + 1.0;
    assert!((r["value"].as_f64().unwrap() - expected).abs() < 1e-12);

    std::fs::write(&b, "").unwrap();
    assert_eq!(run(&["eval", "--clouds", s(&a), s(&b)]).status.code(), Some(2));
}
