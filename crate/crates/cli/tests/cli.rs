use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use molescan::eval::{dice, load_mask};
use molescan::imaging::{load_image, save_png, RgbImage};
use molescan::learn::Label;
use molescan::segmentation::BinaryMask;
use molescan::synth::{synth_lesion, write_synth_dataset};

fn molescan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molescan"))
        .args(args)
        .env_remove("MOLESCAN_CONFIG")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn disk_mask(w: usize, h: usize, r: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| (x as f64 - w as f64 / 2.0).hypot(y as f64 - h as f64 / 2.0) <= r)
}

fn disk_image(dir: &Path) -> PathBuf {
    let m = disk_mask(160, 120, 30.0);
    let img = RgbImage::from_fn(160, 120, |x, y| if m.get(x, y) { [90, 50, 20] } else { [222, 172, 150] });
    let p = dir.join("disk.png");
    save_png(&img, &p).unwrap();
    p
}

#[test]
fn default_config_round_trips_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    let o = molescan(&["default-config"]);
    assert!(o.status.success());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, &o.stdout).unwrap();
    let disk = disk_image(dir.path());
    let o = molescan(&["--config", s(&cfg), "segment", s(&disk), "--out-dir", s(dir.path())]);
    assert!(o.status.success(), "{}", text(&o));
}

#[test]
fn segment_disk_matches_the_analytic_mask() {
    let dir = tempfile::tempdir().unwrap();
    let disk = disk_image(dir.path());
    let o = molescan(&["segment", s(&disk), "--snapshots", "--out-dir", s(dir.path())]);
    assert!(o.status.success(), "{}", text(&o));
    let mask = load_mask(dir.path().join("disk_mask.png")).unwrap();
    let d = dice(&mask, &disk_mask(160, 120, 30.0)).unwrap();
    assert!(d >= 0.95, "dice {d}");
    // the disk converges early, so every snapshot is the final curve and
    // the last colour drawn covers the others
    let snaps = load_image(dir.path().join("disk_snapshots.png")).unwrap();
    let final_ring = snaps.pixels().chunks(3).filter(|p| *p == [0, 0, 255]).count();
    assert!(final_ring > 100, "{final_ring}");
    assert!(text(&o).contains("repeat the final curve"), "{}", text(&o));
}

#[test]
fn features_writes_vector_and_renderings() {
    let dir = tempfile::tempdir().unwrap();
    let disk = disk_image(dir.path());
    let o = molescan(&["features", s(&disk), "--out-dir", s(dir.path())]);
    assert!(o.status.success(), "{}", text(&o));
    for f in ["disk_features.json", "disk_aligned_mask.png", "disk_xor_h.png", "disk_xor_v.png", "disk_colors.png"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("disk_features.json")).unwrap()).unwrap();
    assert_eq!(v["features"].as_array().unwrap().len(), 11);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn train_then_classify_sets_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let manifest = write_synth_dataset(&data, 16, 8, 200, 150, 100).unwrap();
    let out = dir.path().join("out");
    let o = molescan(&["train", s(&manifest), "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("after SMOTE:  16 benign, 16 melanoma"), "{}", text(&o));
    let model = out.join("model.json");

    for (label, seed, code) in [(Label::Benign, 900, 0), (Label::Melanoma, 901, 2)] {
        let l = synth_lesion(200, 150, label, seed);
        let p = dir.path().join(format!("{label}.png"));
        save_png(&l.image, &p).unwrap();
        let o = molescan(&["classify", s(&p), "--model", s(&model), "--out-dir", s(&out)]);
        assert_eq!(o.status.code(), Some(code), "{}", text(&o));
        assert!(text(&o).contains(label.name()));
        let json = std::fs::read_to_string(out.join(format!("{label}_classify.json"))).unwrap();
        assert!(json.contains("\"verdict\""));
    }
}

#[test]
fn errors_exit_one_and_name_the_cause() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.png");
    let o = molescan(&["segment", s(&missing), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("nowhere.png"), "{}", text(&o));

    let flat = dir.path().join("flat.png");
    save_png(&RgbImage::filled(64, 48, [120, 100, 90]), &flat).unwrap();
    let o = molescan(&["segment", s(&flat), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("stage `segment`"), "{}", text(&o));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[svm]\nc = 1.0\nmax_passes = 0\n").unwrap();
    let o = molescan(&["--config", s(&bad), "default-config"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("bad.toml:3"), "{}", text(&o));

    let o = molescan(&["classify", s(&flat), "--model", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_rejects_empty_and_single_class_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "image,label,mask,colors\n").unwrap();
    let o = molescan(&["train", s(&empty), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));

    let manifest = write_synth_dataset(&dir.path().join("d"), 3, 0, 96, 72, 1).unwrap();
    let o = molescan(&["train", s(&manifest), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("both classes"), "{}", text(&o));
}

#[test]
fn eval_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_synth_dataset(&dir.path().join("d"), 12, 6, 160, 120, 5).unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = molescan(&[
            "eval",
            s(&manifest),
            "--out-dir",
            s(&out),
            "--seed",
            "3",
            "--set",
            "experiment.repeats=3",
            "--set",
            "experiment.kernels=[\"rbf\"]",
        ]);
        assert!(o.status.success(), "{}", text(&o));
        assert!(out.join("report.metadata.json").is_file());
        std::fs::read(out.join("report.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn environment_variable_selects_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("env.toml");
    std::fs::write(&cfg, "[output]\nout_dir = \"from-env\"\n").unwrap();
    let disk = disk_image(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_molescan"))
        .args(["segment", s(&disk)])
        .current_dir(dir.path())
        .env("MOLESCAN_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o));
    assert!(dir.path().join("from-env/disk_mask.png").is_file());
}
