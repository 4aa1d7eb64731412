//! Rasterizers for synthetic line drawings: primitives, the canonical test
//! shapes (slab, rectangle, wedge, flare, dumbbell, annulus) and random
//! multi-region scenes. Everything is drawn one pixel wide in pixel-center
//! coordinates with 8-connected strokes.

use crate::ingest::{thin_to_unit_width, BinaryContourImage};
use crate::topology::line_pixels;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn draw_segment(img: &mut BinaryContourImage, x0: f64, y0: f64, x1: f64, y1: f64) {
    for (x, y) in line_pixels(x0.round() as i64, y0.round() as i64, x1.round() as i64, y1.round() as i64) {
        img.set_checked(x, y, true);
    }
}

pub fn draw_polyline(img: &mut BinaryContourImage, pts: &[[f64; 2]]) {
    for w in pts.windows(2) {
        draw_segment(img, w[0][0], w[0][1], w[1][0], w[1][1]);
    }
}

/// Axis-aligned rectangle outline through the inclusive corners.
pub fn draw_rect(img: &mut BinaryContourImage, x0: i64, y0: i64, x1: i64, y1: i64) {
    for x in x0..=x1 {
        img.set_checked(x, y0, true);
        img.set_checked(x, y1, true);
    }
    for y in y0..=y1 {
        img.set_checked(x0, y, true);
        img.set_checked(x1, y, true);
    }
}

/// Closed polygon approximating a circle, one vertex per pixel of circumference.
pub fn draw_circle(img: &mut BinaryContourImage, cx: f64, cy: f64, r: f64) {
    draw_ellipse(img, cx, cy, r, r);
}

pub fn draw_ellipse(img: &mut BinaryContourImage, cx: f64, cy: f64, rx: f64, ry: f64) {
    let n = ((2.0 * std::f64::consts::PI * rx.max(ry)).ceil() as usize).max(8);
    let pts: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [cx + rx * a.cos(), cy + ry * a.sin()]
        })
        .collect();
    draw_polyline(img, &pts);
}

/// Outline of a filled shape: shape pixels with a 4-neighbor outside it,
/// thinned to unit width.
pub fn outline(width: usize, height: usize, inside: impl Fn(f64, f64) -> bool) -> BinaryContourImage {
    let filled = |x: i64, y: i64| {
        x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height && inside(x as f64, y as f64)
    };
    let img = BinaryContourImage::from_fn(width, height, |x, y| {
        let (x, y) = (x as i64, y as i64);
        filled(x, y) && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| !filled(x + dx, y + dy))
    })
    .expect("valid dimensions");
    thin_to_unit_width(&img)
}

fn canvas(width: usize, height: usize) -> BinaryContourImage {
    BinaryContourImage::new(width, height).expect("synthetic canvas is at least 3x3")
}

/// Two horizontal lines at rows `top` and `top + gap`, spanning the full width.
pub fn slab(width: usize, height: usize, top: usize, gap: usize) -> BinaryContourImage {
    BinaryContourImage::from_fn(width, height, |_, y| y == top || y == top + gap).expect("valid dimensions")
}

/// Rectangle outline whose interior is `inner_w x inner_h` pixels, placed at
/// `(margin, margin)`.
pub fn rectangle(inner_w: usize, inner_h: usize, margin: usize) -> BinaryContourImage {
    let mut img = canvas(inner_w + 2 * margin + 2, inner_h + 2 * margin + 2);
    let (x0, y0) = (margin as i64, margin as i64);
    draw_rect(&mut img, x0, y0, x0 + inner_w as i64 + 1, y0 + inner_h as i64 + 1);
    img
}

/// Two rays leaving `(apex_x, cy)` at `±half_angle_deg` from the +x axis,
/// drawn to the image border. The bisector is the row `cy`.
pub fn wedge(width: usize, height: usize, apex_x: f64, half_angle_deg: f64) -> BinaryContourImage {
    let mut img = canvas(width, height);
    let cy = (height / 2) as f64;
    let a = half_angle_deg.to_radians();
    let reach = (width + height) as f64 * 2.0;
    for sign in [-1.0, 1.0] {
        let (ex, ey) = (apex_x + reach * a.cos(), cy + sign * reach * a.sin());
        let pts = clip_ray(apex_x, cy, ex, ey, width, height);
        draw_segment(&mut img, apex_x, cy, pts.0, pts.1);
    }
    img
}

fn clip_ray(x0: f64, y0: f64, x1: f64, y1: f64, width: usize, height: usize) -> (f64, f64) {
    let (dx, dy) = (x1 - x0, y1 - y0);
    let mut t: f64 = 1.0;
    let (xmax, ymax) = ((width - 1) as f64, (height - 1) as f64);
    if dx > 0.0 {
        t = t.min((xmax - x0) / dx);
    } else if dx < 0.0 {
        t = t.min(-x0 / dx);
    }
    if dy > 0.0 {
        t = t.min((ymax - y0) / dy);
    } else if dy < 0.0 {
        t = t.min(-y0 / dy);
    }
    (x0 + t * dx, y0 + t * dy)
}

/// Closed symmetric flare (isosceles trapezoid lying on its side): the sides are
/// `y = cy ± (half0 + slope * (x - x0))` for `x` in `[x0, x1]`, closed by
/// vertical caps.
pub fn flare(width: usize, height: usize, x0: f64, x1: f64, half0: f64, slope: f64) -> BinaryContourImage {
    let mut img = canvas(width, height);
    let cy = (height / 2) as f64;
    let half1 = half0 + slope * (x1 - x0);
    draw_segment(&mut img, x0, cy - half0, x1, cy - half1);
    draw_segment(&mut img, x0, cy + half0, x1, cy + half1);
    draw_segment(&mut img, x0, cy - half0, x0, cy + half0);
    draw_segment(&mut img, x1, cy - half1, x1, cy + half1);
    img
}

/// Outline of two disks of radius `bulb` whose centers are `spacing` apart,
/// joined by a bar of half-height `neck`.
pub fn dumbbell(width: usize, height: usize, bulb: f64, neck: f64, spacing: f64) -> BinaryContourImage {
    let (cx, cy) = ((width / 2) as f64, (height / 2) as f64);
    let (l, r) = (cx - spacing / 2.0, cx + spacing / 2.0);
    outline(width, height, |x, y| {
        let in_disk = |c: f64| (x - c).hypot(y - cy) <= bulb;
        in_disk(l) || in_disk(r) || ((l..=r).contains(&x) && (y - cy).abs() <= neck)
    })
}

/// Two concentric circles.
pub fn annulus(size: usize, inner: f64, outer: f64) -> BinaryContourImage {
    let mut img = canvas(size, size);
    let c = (size / 2) as f64;
    draw_circle(&mut img, c, c, inner);
    draw_circle(&mut img, c, c, outer);
    thin_to_unit_width(&img)
}

/// Random drawing of non-overlapping rectangles, ellipses and a few free
/// strokes, in the spirit of simple hand-traced scenes.
///
/// # Panics
///
/// If `width` or `height` is 60 or less.
pub fn multi_region_drawing(width: usize, height: usize, seed: u64) -> BinaryContourImage {
    assert!(width > 60 && height > 60, "multi_region_drawing needs more than 60x60 pixels, got {width}x{height}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = canvas(width, height);
    let mut placed: Vec<[f64; 4]> = Vec::new();
    let target = 4 + rng.gen_range(0..4);
    let mut attempts = 0;
    while placed.len() < target && attempts < 500 {
        attempts += 1;
        let w = rng.gen_range(24.0..width as f64 / 2.5);
        let h = rng.gen_range(24.0..height as f64 / 2.5);
        let x = rng.gen_range(8.0..width as f64 - w - 8.0);
        let y = rng.gen_range(8.0..height as f64 - h - 8.0);
        let bx = [x - 6.0, y - 6.0, x + w + 6.0, y + h + 6.0];
        if placed.iter().any(|p| bx[0] < p[2] && p[0] < bx[2] && bx[1] < p[3] && p[1] < bx[3]) {
            continue;
        }
        placed.push(bx);
        if rng.gen_bool(0.5) {
            draw_rect(&mut img, x as i64, y as i64, (x + w) as i64, (y + h) as i64);
        } else {
            draw_ellipse(&mut img, x + w / 2.0, y + h / 2.0, w / 2.0, h / 2.0);
        }
    }
    let strokes = rng.gen_range(1..3);
    for _ in 0..strokes {
        let y0 = rng.gen_range(0.2..0.8) * height as f64;
        let y1 = rng.gen_range(0.2..0.8) * height as f64;
        let pts: Vec<[f64; 2]> = (0..=8)
            .map(|i| {
                let t = i as f64 / 8.0;
                [t * (width - 1) as f64, y0 + (y1 - y0) * t + 6.0 * (t * 9.0).sin()]
            })
            .collect();
        draw_polyline(&mut img, &pts);
    }
    thin_to_unit_width(&img)
}

/// A landscape-like line drawing: horizon, a road converging to a vanishing
/// point, buildings with windows, trees and a mountain ridge.
pub fn artist_scene(width: usize, height: usize, seed: u64) -> BinaryContourImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = canvas(width, height);
    let (w, h) = (width as f64, height as f64);
    let horizon = h * rng.gen_range(0.38..0.48);

    // Mountain ridge above the horizon.
    let mut ridge = Vec::new();
    let mut x = 0.0;
    while x < w {
        ridge.push([x, horizon - rng.gen_range(20.0..h * 0.18)]);
        x += rng.gen_range(60.0..140.0);
    }
    ridge.push([w - 1.0, horizon - 30.0]);
    draw_polyline(&mut img, &ridge);
    draw_segment(&mut img, 0.0, horizon, w - 1.0, horizon);

    // Road: two borders converging on a vanishing point, dashed center line.
    let vx = w * rng.gen_range(0.4..0.6);
    let (left, right) = (w * 0.12, w * 0.88);
    draw_segment(&mut img, vx - 6.0, horizon, left, h - 1.0);
    draw_segment(&mut img, vx + 6.0, horizon, right, h - 1.0);
    let mid = (left + right) / 2.0;
    for k in 0..7 {
        let t0 = 0.12 + k as f64 * 0.125;
        let t1 = t0 + 0.06;
        let p = |t: f64| [vx + (mid - vx) * t, horizon + (h - 1.0 - horizon) * t];
        let (a, b) = (p(t0), p(t1));
        draw_segment(&mut img, a[0], a[1], b[0], b[1]);
    }

    // Buildings along the horizon, away from the road.
    let mut bx = 20.0;
    while bx < w - 120.0 {
        let bw = rng.gen_range(60.0..120.0);
        if (bx + bw > vx - 60.0) && (bx < vx + 60.0) {
            bx += bw + 40.0;
            continue;
        }
        let bh = rng.gen_range(80.0..(horizon - 20.0).max(90.0));
        let top = (horizon - bh).max(6.0);
        draw_rect(&mut img, bx as i64, top as i64, (bx + bw) as i64, horizon as i64);
        let mut wy = top + 14.0;
        while wy + 14.0 < horizon - 10.0 {
            let mut wx = bx + 12.0;
            while wx + 14.0 < bx + bw - 8.0 {
                draw_rect(&mut img, wx as i64, wy as i64, (wx + 12.0) as i64, (wy + 14.0) as i64);
                wx += 24.0;
            }
            wy += 28.0;
        }
        bx += bw + rng.gen_range(30.0..80.0);
    }

    // Trees on the verges.
    for _ in 0..rng.gen_range(4..8) {
        let side = rng.gen_bool(0.5);
        let ty = rng.gen_range(horizon + 60.0..h - 60.0);
        let road_edge = if side {
            left + (vx - left) * (h - ty) / (h - horizon)
        } else {
            right - (right - vx) * (h - ty) / (h - horizon)
        };
        let tx = if side { road_edge - rng.gen_range(50.0..110.0) } else { road_edge + rng.gen_range(50.0..110.0) };
        let r = rng.gen_range(18.0..34.0);
        if tx - r < 4.0 || tx + r > w - 4.0 || ty - r < horizon + 4.0 || ty + 2.0 * r > h - 4.0 {
            continue;
        }
        draw_circle(&mut img, tx, ty, r);
        draw_segment(&mut img, tx - 3.0, ty + r, tx - 3.0, ty + 2.0 * r);
        draw_segment(&mut img, tx + 3.0, ty + r, tx + 3.0, ty + 2.0 * r);
    }

    // A couple of clouds.
    for _ in 0..2 {
        let cx = rng.gen_range(80.0..w - 80.0);
        let cy = rng.gen_range(30.0..(horizon * 0.35).max(40.0));
        draw_ellipse(&mut img, cx, cy, rng.gen_range(30.0..60.0), rng.gen_range(10.0..18.0));
    }
    thin_to_unit_width(&img)
}
