use image::DynamicImage;
use medial_salience::ingest::BinaryContourImage;
use medial_salience::output::{encode_png, mask_image};
use medial_salience::synth;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn medsal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medsal"))
        .args(args)
        .env_remove("MEDSAL_OUTPUT")
        .env("RUST_LOG", "info")
        .output()
        .expect("medsal runs")
}

fn write_drawing(dir: &Path, name: &str, img: &BinaryContourImage) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, encode_png(&DynamicImage::ImageLuma8(mask_image(img, false))).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn small_batch(dir: &Path) -> Vec<PathBuf> {
    vec![
        write_drawing(dir, "slab.png", &synth::slab(64, 33, 8, 16)),
        write_drawing(dir, "rect.png", &synth::rectangle(30, 16, 6)),
        write_drawing(dir, "scene.png", &synth::multi_region_drawing(96, 72, 4)),
    ]
}

#[test]
fn slab_skeleton_has_one_branch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let input = write_drawing(dir.path(), "slab.png", &synth::slab(120, 41, 10, 20));
    let run = medsal(&["skeletonize", s(&input), "--no-frame", "-o", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("slab.skeleton.png").exists());
    let graph = json(&out.join("slab.graph.json"));
    let branches: usize = graph["regions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["graph"]["branches"].as_array().unwrap().len())
        .sum();
    assert_eq!(branches, 1);
}

#[test]
fn corrupt_file_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let inputs = dir.path().join("in");
    std::fs::create_dir(&inputs).unwrap();
    small_batch(&inputs);
    std::fs::write(inputs.join("broken.png"), b"\x89PNG\r\n\x1a\nnot really").unwrap();
    let run = medsal(&["skeletonize", s(&inputs), "-o", s(&out)]);
    assert_eq!(run.status.code(), Some(1));
    let log = String::from_utf8_lossy(&run.stderr);
    assert!(log.lines().any(|l| l.contains("ERROR") && l.contains("broken.png")), "{log}");
    for stem in ["slab", "rect", "scene"] {
        assert!(out.join(format!("{stem}.graph.json")).exists());
    }
    assert!(!out.join("broken.graph.json").exists());
}

#[test]
fn all_failures_and_config_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.png");
    std::fs::write(&bad, b"nothing").unwrap();
    assert_eq!(medsal(&["salience", s(&bad), "-o", s(&out)]).status.code(), Some(2));
    let missing = dir.path().join("missing.png");
    assert_eq!(medsal(&["salience", s(&missing), "-o", s(&out)]).status.code(), Some(2));

    let good = write_drawing(dir.path(), "slab.png", &synth::slab(40, 21, 5, 10));
    assert_eq!(medsal(&["salience", s(&good), "--tau", "0.9", "-o", s(&out)]).status.code(), Some(3));
    assert_eq!(medsal(&["salience", s(&good), "--jobs", "0", "-o", s(&out)]).status.code(), Some(3));
    assert_eq!(medsal(&["compose", s(&good), "--channels", "contours,red,zero", "-o", s(&out)]).status.code(), Some(3));
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "windw = 4\n").unwrap();
    assert_eq!(medsal(&["salience", s(&good), "--config", s(&cfg), "-o", s(&out)]).status.code(), Some(3));
    let pattern = dir.path().join("*.pgm");
    assert_eq!(medsal(&["salience", s(&pattern), "-o", s(&out)]).status.code(), Some(3));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = small_batch(dir.path());
    let mut runs = Vec::new();
    for jobs in ["1", "8"] {
        let out = dir.path().join(format!("out{jobs}"));
        let mut args = vec!["salience", "--csv", "--jobs", jobs, "-o", s(&out)];
        args.extend(inputs.iter().map(|p| s(p)));
        assert!(medsal(&args).status.success());
        runs.push(files(&out));
    }
    assert_eq!(runs[0].keys().collect::<Vec<_>>(), runs[1].keys().collect::<Vec<_>>());
    for (name, bytes) in &runs[0] {
        assert!(runs[1][name] == *bytes, "{name} differs between 1 and 8 jobs");
    }
    assert!(runs[0].contains_key("batch.stats.json"));
    assert!(runs[0].contains_key("scene.salience.taper.png"));
    assert!(runs[0].contains_key("scene.hot.ribbon.png"));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = small_batch(dir.path());
    let out = dir.path().join("out");
    let run = |_: usize| {
        let mut args = vec!["compose", "--channels", "contours,ribbon,separation", "--channels", "ribbon,taper,separation", "-o", s(&out)];
        args.extend(inputs.iter().map(|p| s(p)));
        assert!(medsal(&args).status.success());
        files(&out)
    };
    let first = run(0);
    assert!(first.contains_key("rect.compose.contours-ribbon-separation.png"));
    assert!(first.contains_key("rect.compose.ribbon-taper-separation.png"));
    assert_eq!(first, run(1));
}

#[test]
fn compose_reuses_matching_salience_cache() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_drawing(dir.path(), "rect.png", &synth::rectangle(30, 16, 6));
    let fresh = dir.path().join("fresh");
    let cached = dir.path().join("cached");
    assert!(medsal(&["compose", s(&input), "-o", s(&fresh)]).status.success());
    assert!(medsal(&["salience", s(&input), "-o", s(&cached)]).status.success());
    assert!(medsal(&["compose", s(&input), "-o", s(&cached)]).status.success());
    let name = "rect.compose.contours-ribbon-separation.png";
    assert_eq!(std::fs::read(fresh.join(name)).unwrap(), std::fs::read(cached.join(name)).unwrap());

    // Zero the cached planes: compose must pick them up while the settings match.
    let cache = cached.join("rect.salience.json");
    let mut value = json(&cache);
    for plane in value["map"]["planes"].as_array_mut().unwrap() {
        for v in plane.as_array_mut().unwrap() {
            *v = serde_json::json!(0.0);
        }
    }
    std::fs::write(&cache, serde_json::to_string(&value).unwrap()).unwrap();
    assert!(medsal(&["compose", s(&input), "-o", s(&cached)]).status.success());
    let rgb = image::open(cached.join(name)).unwrap().into_rgb8();
    assert!(rgb.pixels().all(|p| p.0[1] == 0 && p.0[2] == 0));
    assert!(rgb.pixels().any(|p| p.0[0] == 255));

    // Different settings invalidate the cache.
    assert!(medsal(&["compose", s(&input), "--window", "4", "-o", s(&cached)]).status.success());
    let rgb = image::open(cached.join(name)).unwrap().into_rgb8();
    assert!(rgb.pixels().any(|p| p.0[1] > 0));
}

#[test]
fn split_halves_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_drawing(dir.path(), "scene.png", &synth::multi_region_drawing(96, 72, 7));
    let out = dir.path().join("out");
    let run = medsal(&["split", s(&input), "--measures", "ribbon", "--fraction", "0.5", "--fraction", "0.25", "-o", s(&out)]);
    assert!(run.status.success());
    let contours = |name: &str| {
        image::open(out.join(name)).unwrap().into_luma8().pixels().filter(|p| p.0[0] < 128).count()
    };
    let total = contours("scene.top50.ribbon.png") + contours("scene.bottom50.ribbon.png");
    let top = contours("scene.top50.ribbon.png") as f64;
    assert!((top - 0.5 * total as f64).abs() <= 1.0);
    let quarter = contours("scene.top25.ribbon.png") as f64;
    assert!((quarter - 0.25 * total as f64).abs() <= 1.0);
    let echo = std::fs::read_to_string(out.join("medsal.config.toml")).unwrap();
    assert!(echo.contains("command = \"split\""));
    assert!(echo.contains("fractions = [0.5, 0.25]"));
    assert!(echo.contains("window = 5"));
}

#[test]
fn parallel_ribbon_is_fully_salient() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_drawing(dir.path(), "slab.png", &synth::slab(120, 41, 10, 20));
    let out = dir.path().join("out");
    assert!(medsal(&["salience", s(&input), "--no-frame", "--measures", "ribbon", "-o", s(&out)]).status.success());
    let img = image::open(out.join("slab.salience.ribbon.png")).unwrap().into_luma8();
    for (x, y, p) in img.enumerate_pixels() {
        let contour = y == 10 || y == 30;
        assert_eq!(p.0[0], if contour { 255 } else { 0 }, "({x}, {y})");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_drawing(dir.path(), "rect.png", &synth::rectangle(20, 12, 4));
    let out = dir.path().join("env-out");
    let run = Command::new(env!("CARGO_BIN_EXE_medsal"))
        .args(["reconstruct", s(&input)])
        .env("MEDSAL_OUTPUT", &out)
        .output()
        .unwrap();
    assert!(run.status.success());
    let report = json(&out.join("rect.reconstruction.json"));
    assert!(report["fidelity_2px"].as_f64().unwrap() > 0.9);
    assert!(out.join("rect.reconstruction.png").exists());
}

#[test]
fn debug_and_sixteen_bit_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_drawing(dir.path(), "rect.png", &synth::rectangle(20, 12, 4));
    let out = dir.path().join("out");
    assert!(medsal(&["salience", s(&input), "--debug", "--sixteen-bit", "-o", s(&out)]).status.success());
    for name in ["rect.distance.png", "rect.aof.png", "rect.skeleton.png", "rect.reconstruction.png", "rect.branches.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let sal = image::open(out.join("rect.salience.separation.png")).unwrap();
    assert!(matches!(sal, DynamicImage::ImageLuma16(_)));
}
