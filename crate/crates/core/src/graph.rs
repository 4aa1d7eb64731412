//! Skeleton graph: point classification, branch partitioning and arc-length
//! parameterization of medial branches.

use crate::aof::SkeletonPoint;
use crate::error::{param, Result};
use crate::ingest::{smooth_cyclic, smooth_series};
use crate::topology::OFFSETS;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Topological role of a skeleton pixel, from its 8-neighbor skeleton degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    End,
    Regular,
    Junction,
}

/// A sample along a medial branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub object_angle: f64,
}

impl From<&SkeletonPoint> for BranchPoint {
    fn from(p: &SkeletonPoint) -> Self {
        Self {
            x: p.x as f64,
            y: p.y as f64,
            radius: p.radius,
            object_angle: p.object_angle,
        }
    }
}

/// Ordered medial curve with cumulative arc length from its first point.
/// `closed` marks a cycle that was cut open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedialBranch {
    pub points: Vec<BranchPoint>,
    pub arc_length: Vec<f64>,
    pub closed: bool,
}

impl MedialBranch {
    pub fn new(points: Vec<BranchPoint>, closed: bool) -> Self {
        let arc_length = cumulative_length(&points);
        Self {
            points,
            arc_length,
            closed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.arc_length.last().copied().unwrap_or(0.0)
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self::new(points, self.closed)
    }

    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.radius).collect()
    }
}

fn cumulative_length(points: &[BranchPoint]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            let q = &points[i - 1];
            acc += (p.x - q.x).hypot(p.y - q.y);
        }
        out.push(acc);
    }
    out
}

/// Branches plus the junction and end pixels of one skeleton. Each junction
/// is one 8-connected cluster of junction pixels, reported by its member
/// closest to the cluster centroid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub branches: Vec<MedialBranch>,
    pub junctions: Vec<[usize; 2]>,
    pub endpoints: Vec<[usize; 2]>,
}

impl SkeletonGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}

struct PixelIndex {
    at: HashMap<(i64, i64), usize>,
}

impl PixelIndex {
    fn new(points: &[SkeletonPoint]) -> Self {
        Self {
            at: points.iter().enumerate().map(|(i, p)| ((p.x as i64, p.y as i64), i)).collect(),
        }
    }

    /// Skeleton neighbors of point `i`, in fixed E, NE, N, ... order.
    fn neighbors(&self, points: &[SkeletonPoint], i: usize) -> Vec<usize> {
        let (x, y) = (points[i].x as i64, points[i].y as i64);
        OFFSETS.iter().filter_map(|&(dx, dy)| self.at.get(&(x + dx, y + dy)).copied()).collect()
    }
}

/// Labels each skeleton point by its neighbor count: one or none is an end,
/// two is regular, three or more is a junction.
pub fn classify_points(skeleton: &[SkeletonPoint]) -> Vec<PointLabel> {
    let index = PixelIndex::new(skeleton);
    (0..skeleton.len())
        .map(|i| match index.neighbors(skeleton, i).len() {
            0 | 1 => PointLabel::End,
            2 => PointLabel::Regular,
            _ => PointLabel::Junction,
        })
        .collect()
}

/// Splits the skeleton into branches running between end and junction
/// pixels, which are kept as the branch terminals. Cycles of regular points
/// are cut open at their minimum-radius point.
pub fn partition_branches(skeleton: &[SkeletonPoint], labels: &[PointLabel]) -> SkeletonGraph {
    let index = PixelIndex::new(skeleton);
    let n = skeleton.len();
    let nbrs: Vec<Vec<usize>> = (0..n).map(|i| index.neighbors(skeleton, i)).collect();
    let mut used = vec![false; n];
    let mut chains: Vec<(Vec<usize>, bool)> = Vec::new();
    let terminal = |i: usize| labels[i] != PointLabel::Regular;

    for t in (0..n).filter(|&t| terminal(t)) {
        if nbrs[t].is_empty() {
            chains.push((vec![t], false));
            continue;
        }
        for &first in &nbrs[t] {
            if terminal(first) {
                // Direct terminal-to-terminal step; junction clusters yield no branch.
                let both_junctions = labels[t] == PointLabel::Junction && labels[first] == PointLabel::Junction;
                if t < first && !both_junctions {
                    chains.push((vec![t, first], false));
                }
                continue;
            }
            if used[first] {
                continue;
            }
            let mut chain = vec![t, first];
            used[first] = true;
            let (mut prev, mut cur) = (t, first);
            loop {
                let Some(&next) = nbrs[cur].iter().find(|&&m| m != prev && !(used[m] && !terminal(m))) else {
                    break;
                };
                chain.push(next);
                if terminal(next) {
                    break;
                }
                used[next] = true;
                prev = cur;
                cur = next;
            }
            chains.push((chain, false));
        }
    }

    for start in 0..n {
        if used[start] || terminal(start) {
            continue;
        }
        let mut cycle = vec![start];
        used[start] = true;
        let mut cur = start;
        while let Some(&next) = nbrs[cur].iter().find(|&&m| !used[m]) {
            used[next] = true;
            cycle.push(next);
            cur = next;
        }
        let cut = (0..cycle.len())
            .min_by(|&a, &b| skeleton[cycle[a]].radius.total_cmp(&skeleton[cycle[b]].radius).then(a.cmp(&b)))
            .unwrap_or(0);
        cycle.rotate_left(cut);
        chains.push((cycle, true));
    }

    let branches = chains
        .into_iter()
        .map(|(c, closed)| MedialBranch::new(c.iter().map(|&i| BranchPoint::from(&skeleton[i])).collect(), closed))
        .collect();

    let endpoints = (0..n)
        .filter(|&i| labels[i] == PointLabel::End)
        .map(|i| [skeleton[i].x, skeleton[i].y])
        .collect();
    SkeletonGraph {
        branches,
        junctions: junction_clusters(skeleton, labels, &nbrs),
        endpoints,
    }
}

fn junction_clusters(skeleton: &[SkeletonPoint], labels: &[PointLabel], nbrs: &[Vec<usize>]) -> Vec<[usize; 2]> {
    let n = skeleton.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || labels[s] != PointLabel::Junction {
            continue;
        }
        let mut members = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < members.len() {
            for &m in &nbrs[members[k]] {
                if !seen[m] && labels[m] == PointLabel::Junction {
                    seen[m] = true;
                    members.push(m);
                }
            }
            k += 1;
        }
        let cx = members.iter().map(|&i| skeleton[i].x as f64).sum::<f64>() / members.len() as f64;
        let cy = members.iter().map(|&i| skeleton[i].y as f64).sum::<f64>() / members.len() as f64;
        let rep = members
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = (skeleton[a].x as f64 - cx).hypot(skeleton[a].y as f64 - cy);
                let db = (skeleton[b].x as f64 - cx).hypot(skeleton[b].y as f64 - cy);
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("cluster is non-empty");
        out.push([skeleton[rep].x, skeleton[rep].y]);
    }
    out
}

/// Gaussian smoothing of a branch's coordinates and radius (end points
/// pinned on open branches, wrap-around on cycles).
pub fn smooth_branch(branch: &MedialBranch, sigma: f64) -> Result<MedialBranch> {
    if !(sigma >= 0.0) {
        return Err(param("sigma", format!("must be non-negative, got {sigma}")));
    }
    let channel = |f: fn(&BranchPoint) -> f64| -> Vec<f64> {
        let v: Vec<f64> = branch.points.iter().map(f).collect();
        if branch.closed {
            smooth_cyclic(&v, sigma)
        } else {
            smooth_series(&v, sigma)
        }
    };
    let (xs, ys, rs) = (channel(|p| p.x), channel(|p| p.y), channel(|p| p.radius));
    let points = branch
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| BranchPoint {
            x: xs[i],
            y: ys[i],
            radius: rs[i],
            object_angle: p.object_angle,
        })
        .collect();
    Ok(MedialBranch::new(points, branch.closed))
}

/// Resamples a branch at uniform arc-length steps by linear interpolation of
/// position, radius and object angle. The step is the total length divided
/// by `round(length / spacing)`, so both ends are kept. Cycles include their
/// closing segment.
pub fn resample_branch(branch: &MedialBranch, spacing: f64) -> Result<MedialBranch> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(param("spacing", format!("must be positive, got {spacing}")));
    }
    let mut pts = branch.points.clone();
    if branch.closed && pts.len() > 2 {
        pts.push(pts[0]);
    }
    let arc = cumulative_length(&pts);
    let total = arc.last().copied().unwrap_or(0.0);
    if pts.len() < 2 || total <= 0.0 {
        return Ok(branch.clone());
    }
    let segments = ((total / spacing).round() as usize).max(1);
    let step = total / segments as f64;
    let mut out = Vec::with_capacity(segments + 1);
    let mut j = 0;
    for k in 0..=segments {
        let s = if k == segments { total } else { k as f64 * step };
        while j + 2 < pts.len() && arc[j + 1] < s {
            j += 1;
        }
        let span = arc[j + 1] - arc[j];
        let t = if span > 0.0 { ((s - arc[j]) / span).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (&pts[j], &pts[j + 1]);
        let lerp = |u: f64, v: f64| u + t * (v - u);
        out.push(BranchPoint {
            x: lerp(a.x, b.x),
            y: lerp(a.y, b.y),
            radius: lerp(a.radius, b.radius),
            object_angle: lerp(a.object_angle, b.object_angle),
        });
    }
    if branch.closed && out.len() > 2 {
        out.pop();
    }
    let mut resampled = MedialBranch::new(out, branch.closed);
    // Interpolated positions can drift from k * step by rounding; keep the grid exact.
    if !branch.closed {
        resampled.arc_length = (0..resampled.len()).map(|k| k as f64 * step).collect();
    }
    Ok(resampled)
}

/// Unit tangents by central differences (one-sided at the ends). `None`
/// where the neighbors coincide or the branch has a single point.
pub fn branch_tangents(branch: &MedialBranch) -> Vec<Option<[f64; 2]>> {
    let p = &branch.points;
    let n = p.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return None;
            }
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let d = [p[b].x - p[a].x, p[b].y - p[a].y];
            let len = d[0].hypot(d[1]);
            (len > 1e-12).then(|| [d[0] / len, d[1] / len])
        })
        .collect()
}

/// Tangents turned to point where the radius shrinks. Spokes lean toward
/// that side: with object angle `theta`, both spokes make the angle `theta`
/// with this direction.
pub fn spoke_axes(branch: &MedialBranch) -> Vec<Option<[f64; 2]>> {
    let p = &branch.points;
    let n = p.len();
    branch_tangents(branch)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let [tx, ty] = t?;
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            Some(if p[b].radius > p[a].radius { [-tx, -ty] } else { [tx, ty] })
        })
        .collect()
}
