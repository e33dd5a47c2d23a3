use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrom::benchmark::{cell_seed, image_label, stored_image, BenchmarkConfig, Recognizer};
use qrom::formats::write_pgm_ascii;
use qrom::persist::{memory_from_json, state_from_json, state_to_json, Memory};
use qrom_core::rng::derive_seed;
use qrom_core::{
    apply_noise, build_filter, center_and_normalize, embed, random_unit_vector, ray_equal,
    recognize_argmax, FilterBank, RawImage,
};
use tempfile::TempDir;

fn qrom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Deterministic pseudo-random 8-bit picture.
fn picture(width: usize, height: usize, seed: u64) -> RawImage {
    let v = random_unit_vector(width * height, seed).unwrap();
    let scale = v.components().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let pixels = v
        .components()
        .iter()
        .map(|c| (127.5 * (1.0 + c / scale)).round() as u32)
        .collect();
    RawImage::new(width, height, 255, pixels).unwrap()
}

fn write_pgm(dir: &Path, name: &str, img: &RawImage) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, write_pgm_ascii(img)).unwrap();
    p
}

fn write_pictures(dir: &Path, count: usize, side: usize) -> Vec<PathBuf> {
    (0..count)
        .map(|i| write_pgm(dir, &format!("pic{i}.pgm"), &picture(side, side, 100 + i as u64)))
        .collect()
}

#[test]
fn encode_constant_picture() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("flat.pgm");
    std::fs::write(&p, "P2\n2 2\n255\n7 7\n7 7\n").unwrap();
    let out = qrom(&["encode", s(&p)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dim"], 4);
    for x in v["re"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn encode_csv_and_zero_picture() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("img.csv");
    std::fs::write(&csv, "1,2\n3,4\n").unwrap();
    assert!(qrom(&["encode", s(&csv)]).status.success());

    let zero = dir.path().join("zero.csv");
    std::fs::write(&zero, "0,0\n0,0\n").unwrap();
    let out = qrom(&["encode", s(&zero), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zero vector after centering"));

    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, "P2 3 3 255 1 2 3 4 5 6 7 8").unwrap();
    let out = qrom(&["encode", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("truncated payload"));
}

#[test]
fn encode_round_trip_preserves_the_ray() {
    let dir = TempDir::new().unwrap();
    let img = picture(5, 4, 7);
    let p = write_pgm(dir.path(), "a.pgm", &img);
    let out = qrom(&["encode", s(&p)]);
    let decoded = state_from_json(&stdout(&out)).unwrap();
    let direct = embed(&center_and_normalize(&img).unwrap());
    assert!(ray_equal(&decoded, &direct, 1e-9).unwrap());
}

#[test]
fn store_ortho_memory_passes_invariants() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 8, 8);
    let mem_path = dir.path().join("mem.json");
    let mut args = vec!["store"];
    args.extend(pics.iter().map(|p| s(p)));
    args.extend(["--mode", "ortho", "--out", s(&mem_path)]);
    let out = qrom(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("stored 8 image(s), dim 64, mode ortho"));
    assert!(stdout(&out).contains("pic7: fidelity with orthogonalized image"));

    let text = std::fs::read_to_string(&mem_path).unwrap();
    let Memory::Ortho(mem) = memory_from_json(&text).unwrap() else {
        panic!("expected ortho memory");
    };
    mem.validate().unwrap();
    assert_eq!(mem.labels()[3], "pic3");
    assert!(mem.rotation().unitarity_residual() <= 1e-10);
    // store -> load -> store
    assert_eq!(qrom::persist::memory_to_json(&Memory::Ortho(mem)), text);
}

#[test]
fn duplicates_fail_only_in_ortho_mode() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 2, 4);
    let out_path = dir.path().join("m.json");
    let files = [s(&pics[0]), s(&pics[1]), s(&pics[0])];

    let mut args = vec!["store"];
    args.extend(files);
    args.extend(["--mode", "ortho", "--out", s(&out_path)]);
    let out = qrom(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("image 2"), "{}", stderr(&out));

    let mut args = vec!["store"];
    args.extend(files);
    args.extend(["--mode", "beam", "--out", s(&out_path)]);
    assert!(qrom(&args).status.success());
}

#[test]
fn store_rejects_mixed_dimensions() {
    let dir = TempDir::new().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", &picture(4, 4, 1));
    let b = write_pgm(dir.path(), "b.pgm", &picture(3, 4, 2));
    let out = qrom(&["store", s(&a), s(&b), "--mode", "beam", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

fn store(dir: &Path, pics: &[PathBuf], mode: &str) -> PathBuf {
    let path = dir.join(format!("{mode}.json"));
    let mut args = vec!["store"];
    args.extend(pics.iter().map(|p| s(p)));
    args.extend(["--mode", mode, "--out", s(&path)]);
    let out = qrom(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

fn recognize(memory: &Path, query: &Path, extra: &[&str]) -> (serde_json::Value, Output) {
    let mut args = vec!["recognize", s(memory), s(query)];
    args.extend(extra);
    let out = qrom(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    (serde_json::from_str(&stdout(&out)).unwrap(), out)
}

#[test]
fn stored_images_are_recognized_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 4, 8);

    let beam = store(dir.path(), &pics, "beam");
    for (i, p) in pics.iter().enumerate() {
        let (v, out) = recognize(&beam, p, &["--seed", "3"]);
        assert_eq!(v["label"], format!("pic{i}"));
        assert_eq!(v["accepted"], true);
        assert_eq!(v["mode"], "beam");
        assert_eq!(v["rates"].as_array().unwrap().len(), 4);
        assert!(stderr(&out).contains(&format!("recognized pic{i}")));
    }

    let ortho = store(dir.path(), &pics, "ortho");
    // the first image is untouched by orthogonalization
    let (v, _) = recognize(&ortho, &pics[0], &[]);
    assert_eq!((v["label"].as_str(), v["accepted"].as_bool()), (Some("pic0"), Some(true)));
    assert!(v["epsilon"].is_null());
    assert_eq!(v["probabilities"].as_array().unwrap().len(), 64);

    let Memory::Ortho(mem) = memory_from_json(&std::fs::read_to_string(&ortho).unwrap()).unwrap() else {
        panic!()
    };
    for (j, state) in mem.ortho_states().iter().enumerate() {
        let q = dir.path().join(format!("ortho{j}.json"));
        std::fs::write(&q, state_to_json(state)).unwrap();
        for seed in ["0", "1", "2"] {
            let (v, _) = recognize(&ortho, &q, &["--seed", seed]);
            assert_eq!(v["label"], format!("pic{j}"));
            assert_eq!(v["accepted"], true);
            assert!((v["score"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn random_queries_are_rejected_by_the_beam() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 8, 8);
    let beam = store(dir.path(), &pics, "beam");
    let q = dir.path().join("random.json");
    // far from every stored picture: fidelities near 1/64 once the shared
    // offset left by half-mean centering is accounted for
    std::fs::write(&q, state_to_json(&embed(&random_unit_vector(64, 4242).unwrap()))).unwrap();
    let (v, out) = recognize(&beam, &q, &[]);
    assert_eq!(v["accepted"], false);
    assert!(v["rates"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() < 0.9));
    assert!(stderr(&out).contains("rejected"));
}

#[test]
fn recognize_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 3, 6);
    let query = write_pgm(dir.path(), "q.pgm", &picture(6, 6, 999));
    for mode in ["beam", "ortho"] {
        let mem = store(dir.path(), &pics, mode);
        let a = qrom(&["recognize", s(&mem), s(&query), "--seed", "17"]);
        let b = qrom(&["recognize", s(&mem), s(&query), "--seed", "17"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn recognize_errors() {
    let dir = TempDir::new().unwrap();
    let pics = write_pictures(dir.path(), 2, 4);
    let mem = store(dir.path(), &pics, "beam");
    let wrong = write_pgm(dir.path(), "w.pgm", &picture(3, 3, 1));
    assert_eq!(qrom(&["recognize", s(&mem), s(&wrong)]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(qrom(&["recognize", s(&missing), s(&wrong)]).status.code(), Some(1));
    std::fs::write(&missing, "{\"filters\": 3}").unwrap();
    assert_eq!(qrom(&["recognize", s(&missing), s(&wrong)]).status.code(), Some(1));
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

const SWEEP: &str = r#"{
  "dim": 64, "image_count": 8,
  "noise": [{"kind": "gaussian", "sigma": 0.0},
            {"kind": "gaussian", "sigma": 0.05},
            {"kind": "gaussian", "sigma": 0.1}],
  "shots_per_arm": 1000, "trials": 200, "epsilon": 0.1, "seed": 2024,
  "recognizer": "both"
}"#;

#[test]
fn benchmark_sweep() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out_dir = dir.path().join("out");
    let started = std::time::Instant::now();
    let out = qrom(&["benchmark", s(&cfg), "--out-dir", s(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(started.elapsed().as_secs_f64() < 60.0);

    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert_eq!(csv, stdout(&out));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let ortho_clean = rows.iter().find(|r| r[0] == "ortho" && r[2] == "0").unwrap();
    assert_eq!(ortho_clean[4], "1");
    for r in &rows {
        for field in &r[4..7] {
            assert!((0.0..=1.0).contains(&field.parse::<f64>().unwrap()));
        }
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let scaled: Vec<f64> = report["concentration"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["scaled"].as_f64().unwrap())
        .collect();
    assert_eq!(scaled.len(), 3);
    let mean = scaled.iter().sum::<f64>() / 3.0;
    let spread = scaled.iter().fold(0.0f64, |m, x| m.max(*x)) - scaled.iter().fold(f64::MAX, |m, x| m.min(*x));
    assert!(spread / mean < 0.2);
    assert!(std::fs::read_to_string(out_dir.join("concentration.csv")).unwrap().starts_with("dim,"));
}

#[test]
fn benchmark_config_errors_are_listed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"dim": 4, "image_count": 9, "noise": [], "trials": 0, "seed": 1, "recognizer": "ortho"}"#,
    );
    let out = qrom(&["benchmark", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for field in ["image_count", "noise", "trials"] {
        assert!(err.contains(field), "{err}");
    }
}

/// Recomputes one report cell through core-library calls, following the
/// documented seed derivation.
#[test]
fn benchmark_cell_matches_direct_library_calls() {
    let dir = TempDir::new().unwrap();
    let json = r#"{
      "dim": 32, "image_count": 5,
      "noise": [{"kind": "gaussian", "sigma": 0.1}, {"kind": "dropout", "dropout_fraction": 0.5}],
      "shots_per_arm": 300, "trials": 40, "epsilon": 0.2, "seed": 77,
      "recognizer": "beam", "concentration_dims": [8]
    }"#;
    let cfg_path = write_config(dir.path(), json);
    let out = qrom(&["benchmark", s(&cfg_path), "--out-dir", s(&dir.path().join("o"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cli_row = stdout(&out).lines().nth(2).unwrap().to_owned();

    let cfg = BenchmarkConfig::from_json(json).unwrap();
    let originals: Vec<_> = (0..5).map(|j| stored_image(&cfg, j).unwrap()).collect();
    let bank = FilterBank::new(
        originals.iter().enumerate().map(|(j, v)| build_filter(&embed(v), image_label(j))).collect(),
        1.0,
    )
    .unwrap();
    let noise = qrom_core::NoiseSpec::dropout(0.5).unwrap();
    let seed = cell_seed(&cfg, 1, Recognizer::Beam);
    let (mut correct, mut false_accepts, mut score) = (0, 0, 0.0);
    for t in 0..40u64 {
        let trial = derive_seed(seed, t);
        let j = t as usize % 5;
        let q = embed(&apply_noise(&originals[j], &noise, derive_seed(trial, 0)).unwrap());
        let counts = bank.run_beam_trials(&q, 300, derive_seed(trial, 1)).unwrap();
        let r = recognize_argmax(&counts.rates(), 0.2).unwrap();
        correct += usize::from(r.best_index == Some(j));
        score += r.score;
        let probe = embed(&random_unit_vector(32, derive_seed(trial, 2)).unwrap());
        let counts = bank.run_beam_trials(&probe, 300, derive_seed(trial, 3)).unwrap();
        false_accepts += usize::from(recognize_argmax(&counts.rates(), 0.2).unwrap().accepted);
    }
    let direct = format!(
        "beam,dropout,0.5,40,{},{},{},0",
        correct as f64 / 40.0,
        false_accepts as f64 / 40.0,
        score / 40.0
    );
    assert_eq!(cli_row, direct);
}
