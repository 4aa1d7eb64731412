use super::quantize;
use crate::error::{param, Error, Result};
use crate::ingest::BinaryContourImage;
use crate::pipeline::SalienceMap;
use crate::salience::Measure;
use image::{ImageBuffer, Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// What one color channel of a composed image carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Contours,
    Salience(Measure),
    Zero,
}

impl Channel {
    pub fn measure(self) -> Option<Measure> {
        match self {
            Channel::Salience(m) => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Contours => f.write_str("contours"),
            Channel::Salience(m) => write!(f, "{m}"),
            Channel::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "contours" | "contour" => Ok(Channel::Contours),
            "zero" => Ok(Channel::Zero),
            other => other
                .parse()
                .map(Channel::Salience)
                .map_err(|_| Error::UnknownChannel(other.to_string())),
        }
    }
}

/// Three channels, written as a comma-separated list such as
/// `contours,ribbon,separation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ChannelSpec(pub [Channel; 3]);

impl ChannelSpec {
    pub fn channels(&self) -> &[Channel; 3] {
        &self.0
    }

    /// Measures the spec reads, without repeats, in channel order.
    pub fn measures(&self) -> Vec<Measure> {
        let mut out = Vec::new();
        for m in self.0.iter().filter_map(|c| c.measure()) {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    /// File-name friendly form, e.g. `contours-ribbon-separation`.
    pub fn slug(&self) -> String {
        self.0.map(|c| c.to_string()).join("-")
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.map(|c| c.to_string()).join(","))
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let channels = s.split(',').map(str::parse).collect::<Result<Vec<Channel>>>()?;
        let channels: [Channel; 3] = channels
            .try_into()
            .map_err(|v: Vec<Channel>| param("channels", format!("exactly 3 channels are required, got {}", v.len())))?;
        Ok(ChannelSpec(channels))
    }
}

impl TryFrom<String> for ChannelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ChannelSpec> for String {
    fn from(spec: ChannelSpec) -> String {
        spec.to_string()
    }
}

/// Three channel planes in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedImage {
    pub width: usize,
    pub height: usize,
    pub channels: [Vec<f64>; 3],
}

impl ComposedImage {
    /// 8-bit RGB. With `invert`, every sample becomes `255 - v`, giving dark
    /// contours on a white background.
    pub fn to_rgb8(&self, invert: bool) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Rgb(self.sample(x, y, 255, invert).map(|v| v as u8))
        })
    }

    /// 16-bit RGB, same layout and polarity rule as [`Self::to_rgb8`].
    pub fn to_rgb16(&self, invert: bool) -> ImageBuffer<Rgb<u16>, Vec<u16>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| Rgb(self.sample(x, y, 65535, invert)))
    }

    fn sample(&self, x: u32, y: u32, max: u16, invert: bool) -> [u16; 3] {
        let i = y as usize * self.width + x as usize;
        self.channels.each_ref().map(|c| {
            let q = quantize(c[i], max);
            if invert {
                max - q
            } else {
                q
            }
        })
    }
}

/// Builds the channel planes: 1 on contour pixels for `contours`, the
/// salience value on contour pixels for a measure, 0 everywhere for `zero`.
/// Background pixels are 0 in every channel.
pub fn compose_planes(spec: &ChannelSpec, img: &BinaryContourImage, map: &SalienceMap) -> Result<ComposedImage> {
    let (w, h) = (img.width(), img.height());
    if (map.width, map.height) != (w, h) {
        return Err(param("salience", format!("map is {}x{}, image is {w}x{h}", map.width, map.height)));
    }
    let mask = img.mask();
    let plane = |c: Channel| -> Result<Vec<f64>> {
        Ok(match c {
            Channel::Zero => vec![0.0; w * h],
            Channel::Contours => mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            Channel::Salience(m) => {
                let p = map
                    .plane(m)
                    .ok_or_else(|| param("channels", format!("measure `{m}` was not computed")))?;
                mask.iter().zip(p).map(|(&b, &v)| if b { v } else { 0.0 }).collect()
            }
        })
    };
    let [a, b, c] = spec.0;
    Ok(ComposedImage {
        width: w,
        height: h,
        channels: [plane(a)?, plane(b)?, plane(c)?],
    })
}

/// [`compose_planes`] quantized to 8-bit RGB.
pub fn compose_channels(spec: &ChannelSpec, img: &BinaryContourImage, map: &SalienceMap, invert: bool) -> Result<RgbImage> {
    Ok(compose_planes(spec, img, map)?.to_rgb8(invert))
}
