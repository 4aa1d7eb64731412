use crate::error::{Error, Result};

/// Row-major binary raster; `true` marks a contour pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryContourImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl std::fmt::Debug for BinaryContourImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryContourImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("contour_pixels", &self.count())
            .finish()
    }
}

impl BinaryContourImage {
    /// A blank (all background) image.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::from_mask(width, height, vec![false; width * height])
    }

    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Dimension { width, height });
        }
        if mask.len() != width * height {
            return Err(crate::error::param(
                "mask",
                format!("length {} does not match {width}x{height}", mask.len()),
            ));
        }
        Ok(Self { width, height, mask })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mask = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::from_mask(width, height, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Bounds-checked lookup; anything outside the raster is background.
    #[inline]
    pub fn is_contour(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.mask[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.mask[y * self.width + x] = value;
    }

    /// Sets a pixel if it lies inside the raster; returns whether it did.
    pub fn set_checked(&mut self, x: i64, y: i64, value: bool) -> bool {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.mask[y as usize * self.width + x as usize] = value;
            true
        } else {
            false
        }
    }

    /// Number of contour pixels.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Contour pixel coordinates in raster order.
    pub fn contour_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// The image rotated a quarter turn clockwise: `(x, y) -> (height - 1 - y, x)`.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.height, self.width);
        let mut mask = vec![false; w * h];
        for (x, y) in self.contour_pixels() {
            mask[x * w + (self.height - 1 - y)] = true;
        }
        Self { width: w, height: h, mask }
    }

    /// Count of 8-connected contour components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..self.mask.len() {
            if !self.mask[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = (i % self.width, i / self.width);
                for n in crate::topology::neighbor_indices(self.width, self.height, x, y) {
                    if self.mask[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        count
    }
}
