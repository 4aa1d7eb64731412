//! End-to-end analysis of one line drawing: regions, distance fields, flux
//! skeletons, branch graphs, salience and projection onto the contours.

use crate::aof::{compute_aof, extract_skeleton, spoke_tips, AofMap, Reconstruction, SkeletonPoint};
use crate::distance::{ContourGeometry, DistanceField, DistanceMap};
use crate::error::Result;
use crate::graph::{spoke_axes, classify_points, partition_branches, resample_branch, smooth_branch, MedialBranch, SkeletonGraph};
use crate::ingest::{label_regions, BinaryContourImage, Connectivity, RegionMap};
use crate::salience::{project_to_contours, windowed_salience, Coverage, MedialSample, Measure, SalienceConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Everything that controls one analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub salience: SalienceConfig,
    pub connectivity: Connectivity,
    /// Treat the image border as a contour.
    pub frame: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            salience: SalienceConfig::default(),
            connectivity: Connectivity::Four,
            frame: true,
        }
    }
}

/// A smoothed, unit-spaced branch with its spoke axes (see
/// [`spoke_axes`](crate::graph::spoke_axes)) and per-point salience
/// (`values[i][m]` is measure `m` at point `i`, in the configured measure order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedBranch {
    pub branch: MedialBranch,
    pub tangents: Vec<Option<[f64; 2]>>,
    pub values: Vec<Vec<f64>>,
}

impl ProcessedBranch {
    pub fn measure_values(&self, m: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[m]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RegionResult {
    pub region: u32,
    pub aof: AofMap,
    pub skeleton: Vec<SkeletonPoint>,
    pub graph: SkeletonGraph,
    pub branches: Vec<ProcessedBranch>,
}

/// Wall-clock time per stage, in seconds. Summed over regions for the
/// per-region stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub regions: f64,
    pub distance: f64,
    pub flux: f64,
    pub graph: f64,
    pub salience: f64,
    pub projection: f64,
    pub total: f64,
}

/// Per-contour-pixel salience, one row-major plane per measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceMap {
    pub width: usize,
    pub height: usize,
    pub measures: Vec<Measure>,
    pub planes: Vec<Vec<f64>>,
    pub coverage: Coverage,
}

impl SalienceMap {
    pub fn plane(&self, m: Measure) -> Option<&[f64]> {
        self.measures.iter().position(|&x| x == m).map(|k| self.planes[k].as_slice())
    }

    pub fn get(&self, m: Measure, x: usize, y: usize) -> Option<f64> {
        self.plane(m).map(|p| p[y * self.width + x])
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub image: BinaryContourImage,
    pub regions: RegionMap,
    pub distance: DistanceMap,
    pub results: Vec<RegionResult>,
    pub salience: SalienceMap,
    pub timings: Timings,
}

impl Analysis {
    pub fn skeleton_point_count(&self) -> usize {
        self.results.iter().map(|r| r.skeleton.len()).sum()
    }

    pub fn branches(&self) -> impl Iterator<Item = (u32, &ProcessedBranch)> {
        self.results.iter().flat_map(|r| r.branches.iter().map(move |b| (r.region, b)))
    }

    /// Spoke tips of every processed branch point.
    pub fn reconstruction(&self) -> Reconstruction {
        let mut out = Reconstruction::default();
        for (_, pb) in self.branches() {
            for (p, t) in pb.branch.points.iter().zip(&pb.tangents) {
                match t {
                    Some(t) => out.points.extend(spoke_tips(p.x, p.y, p.radius, p.object_angle, *t)),
                    None => out.skipped += 1,
                }
            }
        }
        out
    }

    /// Fraction of contour pixels within `tol` pixels of a reconstructed point.
    pub fn reconstruction_fidelity(&self, tol: f64) -> f64 {
        reconstruction_fidelity(&self.image, &self.reconstruction().points, tol)
    }
}

/// Fraction of contour pixels with a point of `points` within `tol` pixels.
pub fn reconstruction_fidelity(img: &BinaryContourImage, points: &[[f64; 2]], tol: f64) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut near = vec![false; w * h];
    let r = tol.ceil() as i64;
    for p in points {
        let (cx, cy) = (p[0].round() as i64, p[1].round() as i64);
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && (x as f64 - p[0]).hypot(y as f64 - p[1]) <= tol {
                    near[y as usize * w + x as usize] = true;
                }
            }
        }
    }
    let total = img.count();
    if total == 0 {
        return 1.0;
    }
    img.contour_pixels().filter(|&(x, y)| near[y * w + x]).count() as f64 / total as f64
}

struct RegionTimes {
    distance: f64,
    flux: f64,
    graph: f64,
    salience: f64,
}

fn process_region(
    map: &DistanceMap,
    geometry: &Arc<ContourGeometry>,
    regions: &RegionMap,
    img: &BinaryContourImage,
    id: u32,
    cfg: &SalienceConfig,
) -> Result<(RegionResult, RegionTimes)> {
    let t0 = Instant::now();
    let field = DistanceField::from_map(map, regions, img, id)?.with_geometry(Arc::clone(geometry));
    let t1 = Instant::now();
    let aof = compute_aof(&field, cfg.disk_radius, cfg.samples)?;
    let skeleton = extract_skeleton(&aof, &field, cfg.tau)?;
    let t2 = Instant::now();
    let labels = classify_points(&skeleton);
    let graph = partition_branches(&skeleton, &labels);
    let mut branches = Vec::with_capacity(graph.branches.len());
    for b in &graph.branches {
        let mut b = b.clone();
        for p in &mut b.points {
            p.radius = field.stroke_radius(p.x as i64, p.y as i64);
        }
        let b = resample_branch(&smooth_branch(&b, cfg.sigma)?, 1.0)?;
        let tangents = spoke_axes(&b);
        branches.push((b, tangents));
    }
    let t3 = Instant::now();
    let branches = branches
        .into_iter()
        .map(|(branch, tangents)| {
            let per_measure: Vec<Vec<f64>> = cfg.measures.iter().map(|&m| windowed_salience(&branch, cfg.window, m)).collect();
            let values = (0..branch.len()).map(|i| per_measure.iter().map(|v| v[i]).collect()).collect();
            ProcessedBranch { branch, tangents, values }
        })
        .collect();
    let t4 = Instant::now();
    Ok((
        RegionResult {
            region: id,
            aof,
            skeleton,
            graph,
            branches,
        },
        RegionTimes {
            distance: (t1 - t0).as_secs_f64(),
            flux: (t2 - t1).as_secs_f64(),
            graph: (t3 - t2).as_secs_f64(),
            salience: (t4 - t3).as_secs_f64(),
        },
    ))
}

/// Runs the full analysis. Regions are processed in parallel on the current
/// rayon pool; results are kept in region order, so the output does not
/// depend on the number of workers.
pub fn analyze(img: &BinaryContourImage, cfg: &PipelineConfig) -> Result<Analysis> {
    cfg.salience.validate()?;
    let start = Instant::now();
    let regions = label_regions(img, cfg.connectivity);
    let t_regions = start.elapsed().as_secs_f64();
    let t = Instant::now();
    let map = DistanceMap::compute(img, cfg.frame);
    let geometry = Arc::new(ContourGeometry::new(img, cfg.salience.stroke_sigma));
    let shared_distance = t.elapsed().as_secs_f64();

    let ids: Vec<u32> = regions.ids().collect();
    let per_region: Vec<(RegionResult, RegionTimes)> = ids
        .par_iter()
        .map(|&id| process_region(&map, &geometry, &regions, img, id, &cfg.salience))
        .collect::<Result<_>>()?;

    let mut timings = Timings {
        regions: t_regions,
        distance: shared_distance,
        ..Timings::default()
    };
    let mut results = Vec::with_capacity(per_region.len());
    for (r, t) in per_region {
        timings.distance += t.distance;
        timings.flux += t.flux;
        timings.graph += t.graph;
        timings.salience += t.salience;
        results.push(r);
    }

    let t = Instant::now();
    let samples: Vec<MedialSample<'_>> = results
        .iter()
        .flat_map(|r| {
            r.branches.iter().flat_map(move |pb| {
                pb.branch.points.iter().enumerate().map(move |(i, p)| MedialSample {
                    region: r.region,
                    point: *p,
                    tangent: pb.tangents[i],
                    values: &pb.values[i],
                })
            })
        })
        .collect();
    let projected = project_to_contours(&samples, cfg.salience.measures.len(), img, &regions, cfg.salience.projection);
    timings.projection = t.elapsed().as_secs_f64();
    timings.total = start.elapsed().as_secs_f64();

    Ok(Analysis {
        image: img.clone(),
        salience: SalienceMap {
            width: img.width(),
            height: img.height(),
            measures: cfg.salience.measures.clone(),
            planes: projected.values,
            coverage: projected.coverage,
        },
        regions,
        distance: map,
        results,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn slab_boundary_gets_centerline_separation() {
        let img = synth::slab(200, 41, 10, 20);
        let a = analyze(&img, &PipelineConfig::default()).unwrap();
        let sep = a.salience.plane(Measure::Separation).unwrap();
        // Away from the image sides the casts come from the straight centerline.
        for x in 60..140 {
            assert!((sep[10 * 200 + x] - 0.9).abs() < 1e-9, "x = {x}: {}", sep[10 * 200 + x]);
            assert!((sep[30 * 200 + x] - 0.9).abs() < 1e-9);
        }
        assert_eq!(a.salience.coverage.defaulted, 0);
    }

    #[test]
    fn empty_image_is_valid() {
        let img = BinaryContourImage::new(32, 24).unwrap();
        let a = analyze(&img, &PipelineConfig::default()).unwrap();
        assert_eq!(a.salience.coverage.contour_pixels, 0);
        assert!(a.salience.planes.iter().all(|p| p.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = PipelineConfig::default();
        cfg.salience.tau = 0.3;
        cfg.connectivity = Connectivity::Eight;
        cfg.frame = false;
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
        let partial: PipelineConfig = serde_json::from_str(r#"{"window": 3}"#).unwrap();
        assert_eq!(partial.salience.window, 3);
        assert!(partial.frame);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.salience.tau = 2.0;
        assert!(analyze(&synth::slab(20, 20, 5, 8), &cfg).is_err());
    }
}
