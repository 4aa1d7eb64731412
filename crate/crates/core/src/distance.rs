//! Exact Euclidean distance transform with nearest-site (feature) tracking,
//! and per-region distance fields with gradient sampling.

use crate::error::{Error, Result};
use crate::ingest::{smooth_cyclic, smooth_series, trace_pixel_chains, BinaryContourImage, RegionMap};
use std::sync::Arc;

/// Whole-image distance transform: for every pixel, the squared distance to
/// the nearest contour pixel center and the coordinates of that pixel.
///
/// With `frame` enabled, the ring of virtual pixels just outside the image
/// (`x = -1`, `x = width`, `y = -1`, `y = height`) also counts as contour, so
/// regions touching the image border are bounded by it.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    frame: bool,
    dist2: Vec<i64>,
    feature: Vec<[i32; 2]>,
}

const FAR: i64 = i64::MAX / 4;

impl DistanceMap {
    pub fn compute(img: &BinaryContourImage, frame: bool) -> Self {
        let (w, h) = (img.width(), img.height());
        let pad = usize::from(frame);
        let (pw, ph) = (w + 2 * pad, h + 2 * pad);
        let sites: Vec<bool> = (0..pw * ph)
            .map(|i| {
                let (x, y) = (i % pw, i / pw);
                if frame && (x == 0 || y == 0 || x + 1 == pw || y + 1 == ph) {
                    return true;
                }
                img.get(x - pad, y - pad)
            })
            .collect();
        let (d2, feat) = edt_with_features(&sites, pw, ph);
        let mut dist2 = Vec::with_capacity(w * h);
        let mut feature = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let i = (y + pad) * pw + x + pad;
                dist2.push(d2[i]);
                let f = feat[i];
                feature.push(if f == u32::MAX {
                    [i32::MIN, i32::MIN]
                } else {
                    [(f as usize % pw) as i32 - pad as i32, (f as usize / pw) as i32 - pad as i32]
                });
            }
        }
        Self {
            width: w,
            height: h,
            frame,
            dist2,
            feature,
        }
    }

    pub fn frame(&self) -> bool {
        self.frame
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Squared distance at `(x, y)`; `None` when the image has no contour pixel at all.
    pub fn dist2(&self, x: usize, y: usize) -> Option<i64> {
        let d = self.dist2[y * self.width + x];
        (d < FAR).then_some(d)
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist2(x, y).map_or(f64::INFINITY, |d| (d as f64).sqrt())
    }

    /// Coordinates of the nearest contour pixel (possibly a virtual frame pixel).
    pub fn feature(&self, x: usize, y: usize) -> Option<[i32; 2]> {
        self.dist2(x, y).map(|_| self.feature[y * self.width + x])
    }
}

/// Two-pass lower-envelope transform over a row-major site mask. Returns the
/// squared distance and the row-major index of the nearest site (`u32::MAX`
/// when there is none).
fn edt_with_features(sites: &[bool], w: usize, h: usize) -> (Vec<i64>, Vec<u32>) {
    // Column pass: nearest site in the same column.
    let mut col_d = vec![FAR; w * h];
    let mut col_y = vec![u32::MAX; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if sites[y * w + x] {
                last = Some(y);
            }
            if let Some(s) = last {
                col_d[y * w + x] = (y - s) as i64;
                col_y[y * w + x] = s as u32;
            }
        }
        let mut last: Option<usize> = None;
        for y in (0..h).rev() {
            if sites[y * w + x] {
                last = Some(y);
            }
            if let Some(s) = last {
                let d = (s - y) as i64;
                if d < col_d[y * w + x] {
                    col_d[y * w + x] = d;
                    col_y[y * w + x] = s as u32;
                }
            }
        }
    }

    // Row pass: lower envelope of the parabolas (x - q)^2 + g(q)^2.
    let mut dist2 = vec![FAR; w * h];
    let mut feature = vec![u32::MAX; w * h];
    let mut v: Vec<usize> = Vec::with_capacity(w);
    let mut z: Vec<f64> = Vec::with_capacity(w + 1);
    for y in 0..h {
        let row = y * w;
        let f = |q: usize| col_d[row + q] * col_d[row + q];
        v.clear();
        z.clear();
        for q in 0..w {
            if col_d[row + q] >= FAR {
                continue;
            }
            loop {
                match v.last() {
                    None => {
                        v.push(q);
                        z.push(f64::NEG_INFINITY);
                        break;
                    }
                    Some(&p) => {
                        let s = ((f(q) + (q * q) as i64) - (f(p) + (p * p) as i64)) as f64 / (2 * (q - p)) as f64;
                        if s <= *z.last().unwrap() {
                            v.pop();
                            z.pop();
                        } else {
                            v.push(q);
                            z.push(s);
                            break;
                        }
                    }
                }
            }
        }
        if v.is_empty() {
            continue;
        }
        let mut k = 0;
        for x in 0..w {
            while k + 1 < v.len() && z[k + 1] < x as f64 {
                k += 1;
            }
            let q = v[k];
            let dx = x as i64 - q as i64;
            dist2[row + x] = dx * dx + f(q);
            feature[row + x] = col_y[row + q] * w as u32 + q as u32;
        }
    }
    (dist2, feature)
}

/// Smoothed subpixel geometry of the contour strokes.
///
/// Each contour pixel keeps its place in a traced pixel chain; the chains are
/// Gaussian-smoothed so that the local shape of a stroke follows the drawn
/// curve rather than its pixel staircase. Used to orient distance gradients.
#[derive(Debug, Clone)]
pub struct ContourGeometry {
    width: usize,
    height: usize,
    sigma: f64,
    chains: Vec<Chain>,
    owner: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
struct Chain {
    points: Vec<[f64; 2]>,
    closed: bool,
}

const NO_OWNER: (u32, u32) = (u32::MAX, u32::MAX);

impl ContourGeometry {
    pub fn new(img: &BinaryContourImage, sigma: f64) -> Self {
        let (w, h) = (img.width(), img.height());
        let mut owner = vec![NO_OWNER; w * h];
        let mut chains = Vec::new();
        for (ci, chain) in trace_pixel_chains(img).into_iter().enumerate() {
            for (k, &i) in chain.iter().enumerate() {
                owner[i] = (ci as u32, k as u32);
            }
            let adjacent = |a: usize, b: usize| {
                let (ax, ay, bx, by) = (a % w, a / w, b % w, b / w);
                ax.abs_diff(bx) <= 1 && ay.abs_diff(by) <= 1
            };
            let closed = chain.len() >= 4 && adjacent(chain[0], chain[chain.len() - 1]);
            let xs: Vec<f64> = chain.iter().map(|&i| (i % w) as f64).collect();
            let ys: Vec<f64> = chain.iter().map(|&i| (i / w) as f64).collect();
            let (sx, sy) = if closed {
                (smooth_cyclic(&xs, sigma), smooth_cyclic(&ys, sigma))
            } else {
                (smooth_series(&xs, sigma), smooth_series(&ys, sigma))
            };
            chains.push(Chain {
                points: sx.into_iter().zip(sy).map(|(x, y)| [x, y]).collect(),
                closed,
            });
        }
        Self {
            width: w,
            height: h,
            sigma,
            chains,
            owner,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The piece of smoothed stroke around a contour pixel (or virtual frame
    /// pixel) that gradients near it are measured from.
    pub(crate) fn patch(&self, site: [i32; 2]) -> StrokePatch {
        let (w, h) = (self.width as i32, self.height as i32);
        let [sx, sy] = site;
        if sx < 0 || sx >= w {
            return StrokePatch::Column { x: sx as f64, hi: h as f64 };
        }
        if sy < 0 || sy >= h {
            return StrokePatch::Row { y: sy as f64, hi: w as f64 };
        }
        let (ci, k) = self.owner[sy as usize * self.width + sx as usize];
        if ci == u32::MAX {
            return StrokePatch::Point([sx as f64, sy as f64]);
        }
        let chain = &self.chains[ci as usize];
        let n = chain.points.len() as i64;
        let k = k as i64;
        let (lo, hi) = if chain.closed { (k - 2, k + 2) } else { ((k - 2).max(0), (k + 2).min(n - 1)) };
        let mut pts = [[0.0; 2]; 5];
        for (slot, j) in pts.iter_mut().zip(lo..=hi) {
            *slot = chain.points[j.rem_euclid(n) as usize];
        }
        StrokePatch::points(&pts[..(hi - lo + 1) as usize])
    }

    /// Nearest point to `q` on the smoothed stroke around `site`.
    pub fn nearest_point(&self, site: [i32; 2], q: [f64; 2]) -> [f64; 2] {
        self.patch(site).foot(q)
    }
}

/// Local stroke model: a frame side, or a run of up to four segments through
/// consecutive smoothed chain points.
#[derive(Debug, Clone, Copy)]
pub(crate) enum StrokePatch {
    Column { x: f64, hi: f64 },
    Row { y: f64, hi: f64 },
    Point([f64; 2]),
    Segments { segs: [Segment; 4], len: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Segment {
    a: [f64; 2],
    d: [f64; 2],
    len2: f64,
}

impl Segment {
    fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        let d = [b[0] - a[0], b[1] - a[1]];
        Self {
            a,
            d,
            len2: d[0] * d[0] + d[1] * d[1],
        }
    }

    #[inline]
    fn project(&self, q: [f64; 2]) -> [f64; 2] {
        let Segment { a, d, len2 } = *self;
        if len2 < 1e-18 {
            return a;
        }
        let t = (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
        [a[0] + t * d[0], a[1] + t * d[1]]
    }
}

impl StrokePatch {
    fn points(pts: &[[f64; 2]]) -> Self {
        if pts.len() == 1 {
            return StrokePatch::Point(pts[0]);
        }
        let mut segs = [Segment::default(); 4];
        for (s, w) in segs.iter_mut().zip(pts.windows(2)) {
            *s = Segment::new(w[0], w[1]);
        }
        StrokePatch::Segments { segs, len: pts.len() - 1 }
    }

    #[inline]
    pub(crate) fn foot(&self, q: [f64; 2]) -> [f64; 2] {
        match *self {
            StrokePatch::Column { x, hi } => [x, q[1].clamp(-1.0, hi)],
            StrokePatch::Row { y, hi } => [q[0].clamp(-1.0, hi), y],
            StrokePatch::Point(p) => p,
            StrokePatch::Segments { ref segs, len } => {
                let mut best = segs[0].a;
                let mut best_d = f64::INFINITY;
                for seg in &segs[..len] {
                    let p = seg.project(q);
                    let d = dist2(p, q);
                    if d < best_d {
                        best = p;
                        best_d = d;
                    }
                }
                best
            }
        }
    }
}

/// Sites and stroke patches of a square block of pixels, gathered once so
/// that many gradient samples around one pixel avoid repeated lookups.
#[derive(Debug, Default)]
pub(crate) struct SiteBlock {
    x0: i64,
    y0: i64,
    side: i64,
    cell_site: Vec<u16>,
    inside: Vec<bool>,
    sites: Vec<[i32; 2]>,
    patches: Vec<StrokePatch>,
}

const NO_SITE: u16 = u16::MAX;

/// One flux sample: a unit direction, its offset from the pixel center and the
/// block cells it reads.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Probe {
    pub(crate) dir: [f64; 2],
    offset: [f64; 2],
    cell: usize,
    corners: [usize; 4],
}

impl SiteBlock {
    /// Block half-width and probes for samples at `radius` along `dirs`.
    pub(crate) fn probes(dirs: &[[f64; 2]], radius: f64) -> (i64, Vec<Probe>) {
        // Samples reach floor(p + r) + 1 at most.
        let half = radius.ceil() as i64 + 1;
        let side = 2 * half + 1;
        let at = |dx: i64, dy: i64| ((dy + half) * side + dx + half) as usize;
        let probes = dirs
            .iter()
            .map(|&dir| {
                let offset = [radius * dir[0], radius * dir[1]];
                let (fx, fy) = (offset[0].floor() as i64, offset[1].floor() as i64);
                Probe {
                    dir,
                    offset,
                    cell: at(offset[0].round() as i64, offset[1].round() as i64),
                    corners: [at(fx, fy), at(fx + 1, fy), at(fx, fy + 1), at(fx + 1, fy + 1)],
                }
            })
            .collect();
        (half, probes)
    }

    /// Flux contribution `g . dir` of a probe around the block's center pixel
    /// `(x, y)`, or `None` when the probe's pixel is outside the region or the
    /// gradient is undefined. Agrees with [`DistanceField::exact_gradient`].
    #[inline]
    pub(crate) fn flux(&self, probe: &Probe, x: f64, y: f64) -> Option<f64> {
        if !self.inside[probe.cell] {
            return None;
        }
        let q = [x + probe.offset[0], y + probe.offset[1]];
        let mut best = NO_SITE;
        let mut best_d = f64::INFINITY;
        for &c in &probe.corners {
            let s = self.cell_site[c];
            if s == NO_SITE || s == best {
                continue;
            }
            let f = self.sites[s as usize];
            let d2 = (q[0] - f[0] as f64).powi(2) + (q[1] - f[1] as f64).powi(2);
            if d2 < best_d {
                best = s;
                best_d = d2;
            }
        }
        if best == NO_SITE {
            return None;
        }
        let foot = self.patches[best as usize].foot(q);
        let g = unit([q[0] - foot[0], q[1] - foot[1]])?;
        Some(g[0] * probe.dir[0] + g[1] * probe.dir[1])
    }
}

#[inline]
fn unit(v: [f64; 2]) -> Option<[f64; 2]> {
    let d = (v[0] * v[0] + v[1] * v[1]).sqrt();
    (d > 1e-9).then(|| [v[0] / d, v[1] / d])
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}


/// How a pixel of a [`DistanceField`] relates to its region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Region,
    Contour,
    Foreign,
}

/// Distance field of one region, cropped to the region's bounding box plus a
/// one-pixel margin. Coordinates in the public API are image coordinates.
#[derive(Debug, Clone)]
pub struct DistanceField {
    region: u32,
    x0: usize,
    y0: usize,
    width: usize,
    height: usize,
    dist: Vec<f64>,
    feature: Vec<[i32; 2]>,
    cells: Vec<Cell>,
    grad_x: Vec<f64>,
    grad_y: Vec<f64>,
    geometry: Option<Arc<ContourGeometry>>,
    /// Image size when the field continues past the image border (no frame).
    open_image: Option<(i64, i64)>,
}

/// Standard deviation, in pixels along the stroke, of the smoothing applied
/// to contour chains before they orient distance gradients.
pub const DEFAULT_STROKE_SIGMA: f64 = 2.0;

/// Distance field of `region_id`, bounded by the contour pixels and the image
/// frame, with gradients oriented by the stroke geometry.
pub fn compute_edt(regions: &RegionMap, img: &BinaryContourImage, region_id: u32) -> Result<DistanceField> {
    let map = DistanceMap::compute(img, true);
    let geometry = Arc::new(ContourGeometry::new(img, DEFAULT_STROKE_SIGMA));
    Ok(DistanceField::from_map(&map, regions, img, region_id)?.with_geometry(geometry))
}

impl DistanceField {
    /// Crops a precomputed whole-image map to one region.
    pub fn from_map(map: &DistanceMap, regions: &RegionMap, img: &BinaryContourImage, region_id: u32) -> Result<Self> {
        let bb = regions.bounding_box(region_id).ok_or(Error::InvalidRegion(region_id))?;
        let x0 = bb.x0.saturating_sub(1);
        let y0 = bb.y0.saturating_sub(1);
        let x1 = (bb.x1 + 1).min(img.width() - 1);
        let y1 = (bb.y1 + 1).min(img.height() - 1);
        let (width, height) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut dist = Vec::with_capacity(width * height);
        let mut feature = Vec::with_capacity(width * height);
        let mut cells = Vec::with_capacity(width * height);
        for y in y0..=y1 {
            for x in x0..=x1 {
                dist.push(map.dist(x, y));
                feature.push(map.feature(x, y).unwrap_or([i32::MIN, i32::MIN]));
                cells.push(if img.get(x, y) {
                    Cell::Contour
                } else if regions.label(x, y) == region_id {
                    Cell::Region
                } else {
                    Cell::Foreign
                });
            }
        }
        let mut field = Self {
            region: region_id,
            x0,
            y0,
            width,
            height,
            dist,
            feature,
            cells,
            grad_x: Vec::new(),
            grad_y: Vec::new(),
            geometry: None,
            open_image: (!map.frame()).then_some((img.width() as i64, img.height() as i64)),
        };
        field.fill_gradients();
        Ok(field)
    }

    /// Central differences on in-field neighbors, one-sided where a neighbor
    /// belongs to another region or lies outside the crop.
    fn fill_gradients(&mut self) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        let usable = |x: i64, y: i64| -> Option<f64> {
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                return None;
            }
            let i = y as usize * w + x as usize;
            (self.cells[i] != Cell::Foreign && self.dist[i].is_finite()).then_some(self.dist[i])
        };
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if self.cells[i] == Cell::Foreign {
                    continue;
                }
                let c = self.dist[i];
                let (xi, yi) = (x as i64, y as i64);
                gx[i] = diff(usable(xi - 1, yi), c, usable(xi + 1, yi));
                gy[i] = diff(usable(xi, yi - 1), c, usable(xi, yi + 1));
            }
        }
        self.grad_x = gx;
        self.grad_y = gy;
    }

    /// Orients exact gradients by the smoothed stroke geometry instead of
    /// the bare pixel centers.
    pub fn with_geometry(mut self, geometry: Arc<ContourGeometry>) -> Self {
        self.geometry = Some(geometry);
        self
    }

    pub fn region(&self) -> u32 {
        self.region
    }

    /// Top-left corner of the crop in image coordinates.
    pub fn origin(&self) -> (usize, usize) {
        (self.x0, self.y0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Like `local`, but without a frame a pixel past the image border maps
    /// to the closest image pixel, whose nearest site stands in for its own.
    fn probe_cell(&self, x: i64, y: i64) -> Option<usize> {
        match self.open_image {
            Some((w, h)) => self.local(x.clamp(0, w - 1), y.clamp(0, h - 1)),
            None => self.local(x, y),
        }
    }

    fn local(&self, x: i64, y: i64) -> Option<usize> {
        let lx = x - self.x0 as i64;
        let ly = y - self.y0 as i64;
        (lx >= 0 && ly >= 0 && lx < self.width as i64 && ly < self.height as i64)
            .then(|| ly as usize * self.width + lx as usize)
    }

    pub fn cell(&self, x: i64, y: i64) -> Cell {
        self.local(x, y).map_or(Cell::Foreign, |i| self.cells[i])
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.cell(x, y) == Cell::Region
    }

    /// Distance at a pixel; infinite outside the crop.
    pub fn dist(&self, x: i64, y: i64) -> f64 {
        self.local(x, y).map_or(f64::INFINITY, |i| self.dist[i])
    }

    /// Distance from a pixel center to the smoothed stroke near the nearest
    /// contour pixels of it and its eight neighbors. Without stroke geometry
    /// this is [`Self::dist`].
    pub fn stroke_radius(&self, x: i64, y: i64) -> f64 {
        let Some(i) = self.local(x, y) else { return f64::INFINITY };
        if self.feature[i][0] == i32::MIN || self.geometry.is_none() {
            return self.dist[i];
        }
        let q = [x as f64, y as f64];
        let mut seen: Vec<[i32; 2]> = Vec::with_capacity(9);
        let mut best = f64::INFINITY;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(j) = self.local(x + dx, y + dy) else { continue };
                let f = self.feature[j];
                if f[0] == i32::MIN || seen.contains(&f) {
                    continue;
                }
                seen.push(f);
                let foot = self.patch(f).foot(q);
                best = best.min((q[0] - foot[0]).hypot(q[1] - foot[1]));
            }
        }
        best
    }

    /// Per-pixel central-difference gradient; zero outside the field.
    pub fn grid_gradient(&self, x: i64, y: i64) -> [f64; 2] {
        self.local(x, y).map_or([0.0, 0.0], |i| [self.grad_x[i], self.grad_y[i]])
    }

    /// Region pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.width * self.height)
            .filter(|&i| self.cells[i] == Cell::Region)
            .map(|i| (self.x0 + i % self.width, self.y0 + i / self.width))
    }

    /// Bilinear interpolation of the grid gradient at a subpixel position.
    ///
    /// All four surrounding grid pixels must belong to the region or its
    /// bounding contour; otherwise the sample is rejected.
    pub fn sample_gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (fx, fy) = (x.floor(), y.floor());
        let (tx, ty) = (x - fx, y - fy);
        let (ix, iy) = (fx as i64, fy as i64);
        let mut g = (0.0, 0.0);
        for (dx, dy, wgt) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            let i = self
                .local(ix + dx, iy + dy)
                .filter(|&i| self.cells[i] != Cell::Foreign)
                .ok_or(Error::Sample { x, y })?;
            g.0 += wgt * self.grad_x[i];
            g.1 += wgt * self.grad_y[i];
        }
        Ok(g)
    }

    /// Gradient of the exact distance function at a subpixel position: the unit
    /// vector from the nearest contour pixel, chosen among the nearest sites of
    /// the four surrounding grid pixels. With attached geometry the vector
    /// starts instead at the nearest point of the smoothed stroke through that
    /// pixel. `None` on the contour itself or outside the crop.
    pub fn exact_gradient(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let (ix, iy) = (x.floor() as i64, y.floor() as i64);
        let mut best: Option<(f64, [i32; 2])> = None;
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let Some(i) = self.probe_cell(ix + dx, iy + dy) else { continue };
            let f = self.feature[i];
            if f[0] == i32::MIN {
                continue;
            }
            let d2 = (x - f[0] as f64).powi(2) + (y - f[1] as f64).powi(2);
            if best.map_or(true, |(b, _)| d2 < b) {
                best = Some((d2, f));
            }
        }
        let (_, site) = best?;
        let foot = self.patch(site).foot([x, y]);
        unit([x - foot[0], y - foot[1]])
    }

    fn patch(&self, site: [i32; 2]) -> StrokePatch {
        match &self.geometry {
            Some(g) => g.patch(site),
            None => StrokePatch::Point([site[0] as f64, site[1] as f64]),
        }
    }

    /// Fills `block` with the pixels `(x - half ..= x + half)` squared.
    pub(crate) fn load_block(&self, block: &mut SiteBlock, x: i64, y: i64, half: i64) {
        block.x0 = x - half;
        block.y0 = y - half;
        block.side = 2 * half + 1;
        let cells = (block.side * block.side) as usize;
        block.cell_site.clear();
        block.inside.clear();
        block.sites.clear();
        block.patches.clear();
        for ly in 0..block.side {
            for lx in 0..block.side {
                let Some(i) = self.probe_cell(block.x0 + lx, block.y0 + ly) else {
                    block.cell_site.push(NO_SITE);
                    block.inside.push(false);
                    continue;
                };
                block.inside.push(self.cells[i] == Cell::Region);
                let f = self.feature[i];
                if f[0] == i32::MIN {
                    block.cell_site.push(NO_SITE);
                    continue;
                }
                let s = match block.sites.iter().position(|&g| g == f) {
                    Some(s) => s,
                    None => {
                        block.sites.push(f);
                        block.patches.push(self.patch(f));
                        block.sites.len() - 1
                    }
                };
                block.cell_site.push(s as u16);
            }
        }
        debug_assert_eq!(block.cell_site.len(), cells);
    }
}

fn diff(prev: Option<f64>, c: f64, next: Option<f64>) -> f64 {
    match (prev, next) {
        (Some(p), Some(n)) => (n - p) / 2.0,
        (None, Some(n)) => n - c,
        (Some(p), None) => c - p,
        (None, None) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{label_regions, Connectivity};
    use crate::synth;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(img: &BinaryContourImage, x: usize, y: usize) -> f64 {
        img.contour_pixels()
            .map(|(cx, cy)| (cx as f64 - x as f64).hypot(cy as f64 - y as f64))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_brute_force_on_random_scatter() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let density = rng.gen_range(0.002..0.05);
            let mask = (0..64 * 64).map(|_| rng.gen_bool(density)).collect();
            let img = BinaryContourImage::from_mask(64, 64, mask).unwrap();
            let map = DistanceMap::compute(&img, false);
            for y in 0..64 {
                for x in 0..64 {
                    assert!((map.dist(x, y) - brute_force(&img, x, y)).abs() < 1e-9);
                    let f = map.feature(x, y).unwrap();
                    assert!(img.get(f[0] as usize, f[1] as usize));
                }
            }
        }
    }

    #[test]
    fn three_four_five() {
        let mut img = BinaryContourImage::new(10, 10).unwrap();
        img.set(0, 0, true);
        let map = DistanceMap::compute(&img, false);
        assert_eq!(map.dist(3, 4), 5.0);
        assert_eq!(map.feature(3, 4), Some([0, 0]));
    }

    #[test]
    fn empty_image_without_frame_has_no_distances() {
        let map = DistanceMap::compute(&BinaryContourImage::new(8, 8).unwrap(), false);
        assert_eq!(map.dist2(3, 3), None);
        let framed = DistanceMap::compute(&BinaryContourImage::new(8, 8).unwrap(), true);
        assert_eq!(framed.dist(0, 0), 1.0);
        assert_eq!(framed.feature(0, 3), Some([-1, 3]));
    }

    fn slab_field() -> DistanceField {
        let img = synth::slab(80, 40, 10, 10);
        let regions = label_regions(&img, Connectivity::Four);
        compute_edt(&regions, &img, regions.label(40, 15)).unwrap()
    }

    #[test]
    fn slab_centerline_is_half_width() {
        let f = slab_field();
        assert_eq!(f.dist(40, 15), 5.0);
        assert_eq!(f.dist(40, 10), 0.0);
        assert_eq!(f.cell(40, 10), Cell::Contour);
        assert_eq!(f.cell(40, 25), Cell::Foreign);
    }

    #[test]
    fn invalid_region_is_rejected() {
        let img = synth::slab(20, 20, 5, 5);
        let regions = label_regions(&img, Connectivity::Four);
        assert!(matches!(compute_edt(&regions, &img, 99), Err(Error::InvalidRegion(99))));
    }

    #[test]
    fn slab_gradient_below_centerline_points_down() {
        let f = slab_field();
        let (gx, gy) = f.sample_gradient(40.3, 12.4).unwrap();
        assert!(gx.abs() < 0.05 && (gy - 1.0).abs() < 0.05, "{gx} {gy}");
    }

    #[test]
    fn slab_gradient_cancels_on_the_ridge() {
        // Analytic slab distance min(y - 10, 20 - y) has zero central difference at y = 15.
        let f = slab_field();
        let (gx, gy) = f.sample_gradient(40.0, 15.0).unwrap();
        assert!(gx.hypot(gy) < 0.3);
    }

    #[test]
    fn radial_gradient_around_a_point() {
        let mut img = BinaryContourImage::new(41, 41).unwrap();
        img.set(20, 20, true);
        let regions = label_regions(&img, Connectivity::Four);
        let f = compute_edt(&regions, &img, 1).unwrap();
        // Keep clear of the frame so the point is the nearest site.
        for &(x, y) in &[(25.3, 21.7), (14.2, 17.9), (22.5, 27.5), (18.0, 13.25)] {
            let (gx, gy) = f.sample_gradient(x, y).unwrap();
            let (rx, ry) = (x - 20.0, y - 20.0);
            let r = rx.hypot(ry);
            assert!((gx - rx / r).abs() < 0.05 && (gy - ry / r).abs() < 0.05, "({x},{y}) -> {gx} {gy}");
            let e = f.exact_gradient(x, y).unwrap();
            assert!((e[0] - rx / r).abs() < 1e-12 && (e[1] - ry / r).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_outside_region_fails() {
        let f = slab_field();
        assert!(matches!(f.sample_gradient(40.0, 25.5), Err(Error::Sample { .. })));
    }

    #[test]
    fn gradient_is_bilinear_central_difference_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let img = synth::multi_region_drawing(96, 96, rng.gen());
            let regions = label_regions(&img, Connectivity::Four);
            let map = DistanceMap::compute(&img, true);
            for id in regions.ids() {
                let f = DistanceField::from_map(&map, &regions, &img, id).unwrap();
                let pts: Vec<_> = f.pixels().collect();
                for _ in 0..250 {
                    let (px, py) = pts[rng.gen_range(0..pts.len())];
                    let (x, y) = (px as f64 + rng.gen::<f64>(), py as f64 + rng.gen::<f64>());
                    let Ok((gx, gy)) = f.sample_gradient(x, y) else { continue };
                    let interior = [(0, 0), (1, 0), (0, 1), (1, 1)]
                        .iter()
                        .all(|&(dx, dy)| f.contains(x.floor() as i64 + dx, y.floor() as i64 + dy));
                    if interior {
                        assert!(gx.hypot(gy) <= 1.1, "|grad| = {} at ({x}, {y})", gx.hypot(gy));
                    }
                    // Independent recomputation from raw distances.
                    let d = |x: i64, y: i64| map.dist(x as usize, y as usize);
                    let cd = |x: i64, y: i64| {
                        let ok = |x: i64, y: i64| f.cell(x, y) != Cell::Foreign;
                        let one = |a: bool, b: bool, lo: f64, c: f64, hi: f64| match (a, b) {
                            (true, true) => (hi - lo) / 2.0,
                            (false, true) => hi - c,
                            (true, false) => c - lo,
                            _ => 0.0,
                        };
                        let c = d(x, y);
                        let get = |x: i64, y: i64| if ok(x, y) { d(x, y) } else { 0.0 };
                        [
                            one(ok(x - 1, y), ok(x + 1, y), get(x - 1, y), c, get(x + 1, y)),
                            one(ok(x, y - 1), ok(x, y + 1), get(x, y - 1), c, get(x, y + 1)),
                        ]
                    };
                    let (fx, fy) = (x.floor(), y.floor());
                    let (tx, ty) = (x - fx, y - fy);
                    let (ix, iy) = (fx as i64, fy as i64);
                    let mut e = [0.0; 2];
                    for (dx, dy, w) in [(0, 0, (1.0 - tx) * (1.0 - ty)), (1, 0, tx * (1.0 - ty)), (0, 1, (1.0 - tx) * ty), (1, 1, tx * ty)] {
                        let g = cd(ix + dx, iy + dy);
                        e[0] += w * g[0];
                        e[1] += w * g[1];
                    }
                    assert!((e[0] - gx).abs() < 1e-6 && (e[1] - gy).abs() < 1e-6);
                }
            }
        }
    }
}
