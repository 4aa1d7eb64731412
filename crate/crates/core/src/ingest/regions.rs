use super::BinaryContourImage;
use serde::{Deserialize, Serialize};

/// Pixel adjacency used when flood-filling background regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

impl std::str::FromStr for Connectivity {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim() {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(crate::error::param("connectivity", format!("expected 4 or 8, got `{other}`"))),
        }
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    fn point(x: usize, y: usize) -> Self {
        Self { x0: x, y0: y, x1: x, y1: y }
    }

    fn extend(&mut self, x: usize, y: usize) {
        self.x0 = self.x0.min(x);
        self.y0 = self.y0.min(y);
        self.x1 = self.x1.max(x);
        self.y1 = self.y1.max(y);
    }
}

/// Connected components of the non-contour pixels. Label 0 marks contour
/// pixels; regions are numbered from 1 in raster order of their first pixel.
#[derive(Debug, Clone)]
pub struct RegionMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    boxes: Vec<BoundingBox>,
    areas: Vec<usize>,
}

impl RegionMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn region_count(&self) -> usize {
        self.boxes.len()
    }

    /// Region ids `1..=region_count`.
    pub fn ids(&self) -> impl Iterator<Item = u32> {
        1..=self.boxes.len() as u32
    }

    pub fn bounding_box(&self, id: u32) -> Option<BoundingBox> {
        id.checked_sub(1).and_then(|i| self.boxes.get(i as usize)).copied()
    }

    pub fn area(&self, id: u32) -> Option<usize> {
        id.checked_sub(1).and_then(|i| self.areas.get(i as usize)).copied()
    }
}

/// Labels background components with the given connectivity. Contour pixels
/// always get label 0.
pub fn label_regions(img: &BinaryContourImage, connectivity: Connectivity) -> RegionMap {
    let (w, h) = (img.width(), img.height());
    let mask = img.mask();
    let mut labels = vec![0u32; w * h];
    let mut boxes = Vec::new();
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(1, 0), (0, -1), (-1, 0), (0, 1)],
        Connectivity::Eight => &crate::topology::OFFSETS,
    };
    for start in 0..w * h {
        if mask[start] || labels[start] != 0 {
            continue;
        }
        let id = boxes.len() as u32 + 1;
        let mut bbox = BoundingBox::point(start % w, start / w);
        let mut area = 0;
        labels[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            bbox.extend(x, y);
            area += 1;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let n = ny as usize * w + nx as usize;
                if !mask[n] && labels[n] == 0 {
                    labels[n] = id;
                    stack.push(n);
                }
            }
        }
        boxes.push(bbox);
        areas.push(area);
    }
    RegionMap { width: w, height: h, labels, boxes, areas }
}
