use crate::pipeline::{Analysis, Timings};
use crate::salience::{Coverage, Measure};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const HISTOGRAM_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl ValueSummary {
    /// `None` for an empty sequence.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| ValueSummary {
            mean: sum / n as f64,
            min,
            max,
        })
    }
}

/// Distribution of one measure over the contour pixels. Bin `k` counts
/// values in `[k / 32, (k + 1) / 32)`; the last bin also takes 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureStats {
    pub measure: Measure,
    pub histogram: Vec<u64>,
    pub summary: Option<ValueSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStats {
    pub region: u32,
    pub branch: usize,
    pub points: usize,
    pub length: f64,
    pub radius: Option<ValueSummary>,
    pub salience: BTreeMap<Measure, ValueSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageStats {
    pub width: usize,
    pub height: usize,
    pub region_count: usize,
    pub skeleton_points: usize,
    pub branch_count: usize,
    pub coverage: Coverage,
    pub coverage_fraction: f64,
    pub measures: Vec<MeasureStats>,
    pub branches: Vec<BranchStats>,
    /// Wall-clock times vary run to run, so they are only included on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn bin(v: f64) -> usize {
    ((v.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
}

/// Summarizes one analysis.
pub fn export_stats(analysis: &Analysis, with_timings: bool) -> ImageStats {
    let img = &analysis.image;
    let map = &analysis.salience;
    let w = img.width();
    let measures = map
        .measures
        .iter()
        .zip(&map.planes)
        .map(|(&measure, plane)| {
            let mut histogram = vec![0u64; HISTOGRAM_BINS];
            let values: Vec<f64> = img.contour_pixels().map(|(x, y)| plane[y * w + x]).collect();
            for &v in &values {
                histogram[bin(v)] += 1;
            }
            MeasureStats {
                measure,
                histogram,
                summary: ValueSummary::of(values),
            }
        })
        .collect();
    let mut branches = Vec::new();
    for r in &analysis.results {
        for (k, pb) in r.branches.iter().enumerate() {
            let salience = map
                .measures
                .iter()
                .enumerate()
                .filter_map(|(m, &measure)| ValueSummary::of(pb.values.iter().map(|v| v[m])).map(|s| (measure, s)))
                .collect();
            branches.push(BranchStats {
                region: r.region,
                branch: k,
                points: pb.branch.len(),
                length: pb.branch.length(),
                radius: ValueSummary::of(pb.branch.points.iter().map(|p| p.radius)),
                salience,
            });
        }
    }
    ImageStats {
        width: w,
        height: img.height(),
        region_count: analysis.regions.region_count(),
        skeleton_points: analysis.skeleton_point_count(),
        branch_count: branches.len(),
        coverage: map.coverage,
        coverage_fraction: map.coverage.fraction(),
        measures,
        branches,
        timings: with_timings.then_some(analysis.timings),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub name: String,
    pub stats: ImageStats,
}

/// Totals over a batch. `mean_salience[m]` is the mean of the per-image
/// means of measure `m`, over the images that have contour pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub images: usize,
    pub contour_pixels: usize,
    pub skeleton_points: usize,
    pub branch_count: usize,
    pub mean_salience: BTreeMap<Measure, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub records: Vec<BatchRecord>,
    pub aggregate: AggregateStats,
}

impl BatchReport {
    /// Sorts the records by name, so the report does not depend on the order
    /// in which images finished.
    pub fn new(mut records: Vec<BatchRecord>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let mut per_measure: BTreeMap<Measure, Vec<f64>> = BTreeMap::new();
        for r in &records {
            for m in &r.stats.measures {
                if let Some(s) = m.summary {
                    per_measure.entry(m.measure).or_default().push(s.mean);
                }
            }
        }
        let aggregate = AggregateStats {
            images: records.len(),
            contour_pixels: records.iter().map(|r| r.stats.coverage.contour_pixels).sum(),
            skeleton_points: records.iter().map(|r| r.stats.skeleton_points).sum(),
            branch_count: records.iter().map(|r| r.stats.branch_count).sum(),
            mean_salience: per_measure
                .into_iter()
                .map(|(m, v)| (m, v.iter().sum::<f64>() / v.len() as f64))
                .collect(),
        };
        Self { records, aggregate }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl ImageStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}
