use super::quantize;
use crate::error::{Error, Result};
use crate::ingest::BinaryContourImage;
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    /// Black through red and yellow to white.
    #[default]
    Hot,
    Gray,
}

impl fmt::Display for Colormap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colormap::Hot => "hot",
            Colormap::Gray => "gray",
        })
    }
}

impl FromStr for Colormap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hot" => Ok(Colormap::Hot),
            "gray" | "grey" => Ok(Colormap::Gray),
            other => Err(crate::error::param("colormap", format!("unknown colormap `{other}`"))),
        }
    }
}

/// Position of `v` in a 256-entry colormap table.
pub fn colormap_index(v: f64) -> u8 {
    quantize(v, 255) as u8
}

pub fn colormap_rgb(map: Colormap, v: f64) -> [u8; 3] {
    let i = colormap_index(v);
    match map {
        Colormap::Gray => [i; 3],
        Colormap::Hot => {
            let t = i as f64 / 255.0;
            let ramp = |k: f64| quantize(3.0 * t - k, 255) as u8;
            [ramp(0.0), ramp(1.0), ramp(2.0)]
        }
    }
}

const LEGEND_GAP: u32 = 4;
const LEGEND_HEIGHT: u32 = 12;

/// Colors contour pixels by `values` (a row-major plane in `[0, 1]`) on a
/// white background. With `legend`, a bar running from 0 on the left to 1 on
/// the right is appended below the drawing.
pub fn render_colormap(values: &[f64], img: &BinaryContourImage, map: Colormap, legend: bool) -> RgbImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let extra = if legend { LEGEND_GAP + LEGEND_HEIGHT } else { 0 };
    let white = Rgb([255, 255, 255]);
    let mut out = RgbImage::from_pixel(w, h + extra, white);
    for (x, y) in img.contour_pixels() {
        let v = values.get(y * w as usize + x).copied().unwrap_or(0.0);
        out.put_pixel(x as u32, y as u32, Rgb(colormap_rgb(map, v)));
    }
    if legend {
        for x in 0..w {
            let v = if w > 1 { x as f64 / (w - 1) as f64 } else { 1.0 };
            let c = Rgb(colormap_rgb(map, v));
            for y in h + LEGEND_GAP..h + extra {
                out.put_pixel(x, y, c);
            }
        }
    }
    out
}
