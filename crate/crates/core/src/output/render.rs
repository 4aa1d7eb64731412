use super::quantize;
use crate::error::{Error, Result};
use crate::graph::SkeletonGraph;
use crate::ingest::BinaryContourImage;
use crate::pipeline::Analysis;
use image::codecs::png::PngEncoder;
use image::{DynamicImage, GrayImage, ImageBuffer, ImageEncoder, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

/// `<stem>.<artifact>.<measure>.<ext>`, or `<stem>.<artifact>.<ext>` when
/// the artifact is not tied to a measure.
pub fn artifact_name(stem: &str, artifact: &str, measure: Option<&str>, ext: &str) -> String {
    match measure {
        Some(m) => format!("{stem}.{artifact}.{m}.{ext}"),
        None => format!("{stem}.{artifact}.{ext}"),
    }
}

pub fn encode_png(img: &DynamicImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(img.as_bytes(), img.width(), img.height(), img.color().into())
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out)
}

/// Grayscale salience image: the value on contour pixels, black elsewhere.
pub fn salience_image(values: &[f64], img: &BinaryContourImage, depth: BitDepth) -> DynamicImage {
    let (w, h) = (img.width(), img.height());
    let at = |x: u32, y: u32| {
        let i = y as usize * w + x as usize;
        if img.mask()[i] {
            values.get(i).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };
    match depth {
        BitDepth::Eight => DynamicImage::ImageLuma8(ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
            Luma([quantize(at(x, y), 255) as u8])
        })),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
            Luma([quantize(at(x, y), 65535)])
        })),
    }
}

/// A contour mask as a line drawing: black contours on white, or white on
/// black when `invert` is set.
pub fn mask_image(img: &BinaryContourImage, invert: bool) -> GrayImage {
    let (ink, paper) = if invert { (255, 0) } else { (0, 255) };
    GrayImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        Luma([if img.get(x as usize, y as usize) { ink } else { paper }])
    })
}

/// Distance to the nearest contour, scaled so the largest finite distance is
/// full white. 16-bit.
pub fn render_distance(analysis: &Analysis) -> DynamicImage {
    let (w, h) = (analysis.image.width(), analysis.image.height());
    let d = &analysis.distance;
    let max = (0..w * h)
        .map(|i| d.dist(i % w, i / w))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    DynamicImage::ImageLuma16(ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let v = d.dist(x as usize, y as usize);
        Luma([if v.is_finite() && max > 0.0 { quantize(v / max, 65535) } else { 0 }])
    }))
}

fn blend(c: [u8; 3], t: f64) -> Rgb<u8> {
    Rgb(c.map(|v| (255.0 + (v as f64 - 255.0) * t.clamp(0.0, 1.0)).round() as u8))
}

/// Flux map: inward flux (medial) in blue, outward in red, both fading to
/// white at zero; contours black.
pub fn render_aof(analysis: &Analysis) -> RgbImage {
    let img = &analysis.image;
    let mut out = RgbImage::from_pixel(img.width() as u32, img.height() as u32, Rgb([255, 255, 255]));
    for r in &analysis.results {
        for (x, y, a) in r.aof.values() {
            let c = if a < 0.0 { [0, 60, 220] } else { [220, 40, 0] };
            out.put_pixel(x as u32, y as u32, blend(c, a.abs() / std::f64::consts::FRAC_2_PI));
        }
    }
    for (x, y) in img.contour_pixels() {
        out.put_pixel(x as u32, y as u32, Rgb([0, 0, 0]));
    }
    out
}

fn put(out: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    let (x, y) = (x.round(), y.round());
    if x >= 0.0 && y >= 0.0 && (x as u32) < out.width() && (y as u32) < out.height() {
        out.put_pixel(x as u32, y as u32, c);
    }
}

/// Contours in gray with the skeleton on top: regular points red, junctions
/// blue, end points green.
pub fn render_skeleton(analysis: &Analysis) -> RgbImage {
    let img = &analysis.image;
    let mut out = RgbImage::from_pixel(img.width() as u32, img.height() as u32, Rgb([255, 255, 255]));
    for (x, y) in img.contour_pixels() {
        out.put_pixel(x as u32, y as u32, Rgb([150, 150, 150]));
    }
    for r in &analysis.results {
        for p in &r.skeleton {
            put(&mut out, p.x as f64, p.y as f64, Rgb([220, 0, 0]));
        }
        for &[x, y] in &r.graph.junctions {
            put(&mut out, x as f64, y as f64, Rgb([0, 0, 230]));
        }
        for &[x, y] in &r.graph.endpoints {
            put(&mut out, x as f64, y as f64, Rgb([0, 170, 0]));
        }
    }
    out
}

/// Contours in light gray and reconstructed spoke tips in red.
pub fn render_reconstruction(analysis: &Analysis) -> RgbImage {
    let img = &analysis.image;
    let mut out = RgbImage::from_pixel(img.width() as u32, img.height() as u32, Rgb([255, 255, 255]));
    for (x, y) in img.contour_pixels() {
        out.put_pixel(x as u32, y as u32, Rgb([190, 190, 190]));
    }
    for p in analysis.reconstruction().points {
        put(&mut out, p[0], p[1], Rgb([220, 0, 0]));
    }
    out
}

/// One row per processed branch point:
/// `region,branch,point,x,y,radius,object_angle,arc_length,<measures...>`.
pub fn branch_csv(analysis: &Analysis) -> String {
    let measures = &analysis.salience.measures;
    let mut s = String::from("region,branch,point,x,y,radius,object_angle,arc_length");
    for m in measures {
        write!(s, ",{m}").unwrap();
    }
    s.push('\n');
    for r in &analysis.results {
        for (k, pb) in r.branches.iter().enumerate() {
            for (i, p) in pb.branch.points.iter().enumerate() {
                write!(
                    s,
                    "{},{k},{i},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    r.region, p.x, p.y, p.radius, p.object_angle, pb.branch.arc_length[i]
                )
                .unwrap();
                for v in &pb.values[i] {
                    write!(s, ",{v:.6}").unwrap();
                }
                s.push('\n');
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGraph {
    pub region: u32,
    pub skeleton_points: usize,
    pub graph: SkeletonGraph,
}

/// Skeleton graphs of every region of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<RegionGraph>,
}

impl GraphReport {
    pub fn new(analysis: &Analysis) -> Self {
        Self {
            width: analysis.image.width(),
            height: analysis.image.height(),
            regions: analysis
                .results
                .iter()
                .map(|r| RegionGraph {
                    region: r.region,
                    skeleton_points: r.skeleton.len(),
                    graph: r.graph.clone(),
                })
                .collect(),
        }
    }

    pub fn branch_count(&self) -> usize {
        self.regions.iter().map(|r| r.graph.branches.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph report serializes")
    }
}
