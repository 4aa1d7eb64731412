use crate::config::RunConfig;
use medial_salience::ingest::{load_line_drawing, prepare_line_drawing, BinaryContourImage};
use medial_salience::output::{
    artifact_name, branch_csv, compose_planes, encode_png, export_stats, mask_image, render_aof, render_colormap,
    render_distance, render_reconstruction, render_skeleton, salience_image, split_by_salience, BatchRecord, GraphReport,
};
use medial_salience::pipeline::{analyze, Analysis, SalienceMap};
use medial_salience::salience::{Coverage, Measure};
use image::DynamicImage;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Skeletonize,
    Salience,
    Split,
    Compose,
    Reconstruct,
    Stats,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Skeletonize => "skeletonize",
            Command::Salience => "salience",
            Command::Split => "split",
            Command::Compose => "compose",
            Command::Reconstruct => "reconstruct",
            Command::Stats => "stats",
        }
    }
}

/// What one image produced.
pub struct ImageOutput {
    pub files: Vec<String>,
    pub record: Option<BatchRecord>,
}

type Failure = String;

/// Salience planes written by `salience` and reused by `compose` when the
/// fingerprint of image and settings still matches.
#[derive(Serialize, Deserialize)]
struct CachedSalience {
    fingerprint: String,
    map: SalienceMap,
}

struct Job<'a> {
    cfg: &'a RunConfig,
    stem: &'a str,
    files: Vec<String>,
}

impl Job<'_> {
    fn write(&mut self, artifact: &str, measure: Option<&str>, ext: &str, bytes: &[u8]) -> Result<(), Failure> {
        let name = artifact_name(self.stem, artifact, measure, ext);
        let path = self.cfg.output.join(&name);
        std::fs::write(&path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.files.push(name);
        Ok(())
    }

    fn png(&mut self, artifact: &str, measure: Option<&str>, img: DynamicImage) -> Result<(), Failure> {
        let bytes = encode_png(&img).map_err(|e| e.to_string())?;
        self.write(artifact, measure, "png", &bytes)
    }
}

pub fn stem_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn load(cfg: &RunConfig, path: &Path) -> Result<BinaryContourImage, Failure> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read: {e}"))?;
    let img = load_line_drawing(&bytes, cfg.threshold.0).map_err(|e| e.to_string())?;
    prepare_line_drawing(&img, cfg.contour_sigma).map_err(|e| e.to_string())
}

fn run_analysis(cfg: &RunConfig, img: &BinaryContourImage, measures: Vec<Measure>) -> Result<Analysis, Failure> {
    let mut pipeline = cfg.pipeline();
    pipeline.salience.measures = measures;
    analyze(img, &pipeline).map_err(|e| e.to_string())
}

/// Hash of the working image and every setting that shapes the salience
/// values. The measure list is left out: measures do not affect each other.
fn fingerprint(cfg: &RunConfig, img: &BinaryContourImage) -> String {
    let mut pipeline = cfg.pipeline();
    pipeline.salience.measures.clear();
    let mut h = Sha256::new();
    h.update((img.width() as u64).to_le_bytes());
    h.update((img.height() as u64).to_le_bytes());
    h.update(img.mask().iter().map(|&b| b as u8).collect::<Vec<u8>>());
    h.update(serde_json::to_vec(&pipeline).expect("pipeline config serializes"));
    h.update(cfg.threshold.to_string());
    h.update(cfg.contour_sigma.to_le_bytes());
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn cache_path(cfg: &RunConfig, stem: &str) -> PathBuf {
    cfg.output.join(artifact_name(stem, "salience", None, "json"))
}

fn read_cache(cfg: &RunConfig, stem: &str, img: &BinaryContourImage, needed: &[Measure]) -> Option<SalienceMap> {
    let text = std::fs::read_to_string(cache_path(cfg, stem)).ok()?;
    let cached: CachedSalience = serde_json::from_str(&text).ok()?;
    let usable = cached.fingerprint == fingerprint(cfg, img) && needed.iter().all(|m| cached.map.plane(*m).is_some());
    usable.then_some(cached.map)
}

fn debug_artifacts(job: &mut Job<'_>, a: &Analysis) -> Result<(), Failure> {
    job.png("distance", None, render_distance(a))?;
    job.png("aof", None, DynamicImage::ImageRgb8(render_aof(a)))?;
    job.png("skeleton", None, DynamicImage::ImageRgb8(render_skeleton(a)))?;
    job.png("reconstruction", None, DynamicImage::ImageRgb8(render_reconstruction(a)))?;
    job.write("branches", None, "csv", branch_csv(a).as_bytes())
}

/// `0.5` becomes `50`, `0.333` becomes `33p3`.
fn percent_label(fraction: f64) -> String {
    let p = format!("{:.1}", fraction * 100.0);
    p.trim_end_matches('0').trim_end_matches('.').replace('.', "p")
}

#[derive(Serialize)]
struct ReconstructionReport {
    points: usize,
    skipped: usize,
    fidelity_1px: f64,
    fidelity_2px: f64,
}

pub fn process(command: Command, cfg: &RunConfig, path: &Path) -> Result<ImageOutput, Failure> {
    let stem = stem_of(path);
    let img = load(cfg, path)?;
    let mut job = Job { cfg, stem: &stem, files: Vec::new() };
    let mut record = None;
    match command {
        Command::Compose => {
            let needed: Vec<Measure> = {
                let mut v = Vec::new();
                for m in cfg.channels.iter().flat_map(|s| s.measures()) {
                    if !v.contains(&m) {
                        v.push(m);
                    }
                }
                v
            };
            let map = match read_cache(cfg, &stem, &img, &needed) {
                Some(map) if !cfg.debug => {
                    log::debug!("{}: using cached salience", path.display());
                    map
                }
                _ if needed.is_empty() && !cfg.debug => SalienceMap {
                    width: img.width(),
                    height: img.height(),
                    measures: Vec::new(),
                    planes: Vec::new(),
                    coverage: Coverage::default(),
                },
                _ => {
                    let a = run_analysis(cfg, &img, if needed.is_empty() { cfg.measures.clone() } else { needed })?;
                    if cfg.debug {
                        debug_artifacts(&mut job, &a)?;
                    }
                    a.salience
                }
            };
            for spec in &cfg.channels {
                let planes = compose_planes(spec, &img, &map).map_err(|e| e.to_string())?;
                let out = if cfg.sixteen_bit {
                    DynamicImage::ImageRgb16(planes.to_rgb16(cfg.invert_polarity))
                } else {
                    DynamicImage::ImageRgb8(planes.to_rgb8(cfg.invert_polarity))
                };
                job.png("compose", Some(&spec.slug()), out)?;
            }
        }
        _ => {
            let a = run_analysis(cfg, &img, cfg.measures.clone())?;
            if cfg.debug {
                debug_artifacts(&mut job, &a)?;
            } else if cfg.csv {
                job.write("branches", None, "csv", branch_csv(&a).as_bytes())?;
            }
            match command {
                Command::Skeletonize => {
                    if !cfg.debug {
                        job.png("skeleton", None, DynamicImage::ImageRgb8(render_skeleton(&a)))?;
                    }
                    job.write("graph", None, "json", GraphReport::new(&a).to_json().as_bytes())?;
                }
                Command::Salience | Command::Stats => {
                    if command == Command::Salience {
                        for &m in &a.salience.measures {
                            let plane = a.salience.plane(m).expect("requested measure");
                            job.png("salience", Some(m.name()), salience_image(plane, &img, cfg.bit_depth()))?;
                            let render = render_colormap(plane, &img, cfg.colormap(), cfg.legend);
                            job.png(&cfg.colormap, Some(m.name()), DynamicImage::ImageRgb8(render))?;
                        }
                        let cached = CachedSalience {
                            fingerprint: fingerprint(cfg, &img),
                            map: a.salience.clone(),
                        };
                        let text = serde_json::to_string(&cached).expect("salience serializes");
                        job.write("salience", None, "json", text.as_bytes())?;
                    }
                    let stats = export_stats(&a, cfg.timings);
                    job.write("stats", None, "json", stats.to_json().as_bytes())?;
                    record = Some(BatchRecord { name: stem.clone(), stats });
                }
                Command::Split => {
                    for &m in &a.salience.measures {
                        let plane = a.salience.plane(m).expect("requested measure");
                        for &f in &cfg.fractions {
                            let split = split_by_salience(plane, &img, m, f).map_err(|e| e.to_string())?;
                            let label = percent_label(f);
                            let top = mask_image(&split.top, cfg.invert_polarity);
                            let bottom = mask_image(&split.bottom, cfg.invert_polarity);
                            job.png(&format!("top{label}"), Some(m.name()), DynamicImage::ImageLuma8(top))?;
                            job.png(&format!("bottom{label}"), Some(m.name()), DynamicImage::ImageLuma8(bottom))?;
                        }
                    }
                }
                Command::Reconstruct => {
                    if !cfg.debug {
                        job.png("reconstruction", None, DynamicImage::ImageRgb8(render_reconstruction(&a)))?;
                    }
                    let rec = a.reconstruction();
                    let report = ReconstructionReport {
                        points: rec.points.len(),
                        skipped: rec.skipped,
                        fidelity_1px: a.reconstruction_fidelity(1.0),
                        fidelity_2px: a.reconstruction_fidelity(2.0),
                    };
                    let text = serde_json::to_string_pretty(&report).expect("report serializes");
                    job.write("reconstruction", None, "json", text.as_bytes())?;
                }
                Command::Compose => unreachable!(),
            }
        }
    }
    Ok(ImageOutput { files: job.files, record })
}
