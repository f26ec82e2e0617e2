//! Gray-level quantization and directed co-occurrence matrices.
//!
//! Offsets are `(dx, dy)` in (column, row) order: `(1, 0)` pairs every pixel
//! with its right-hand neighbour in the same row. Pairs whose displaced pixel
//! falls outside the image are skipped; there is no wraparound or padding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(
                format!("{} pixels ({width}x{height})", width * height),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Copies the `w`×`h` rectangle whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<GrayImage> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let start = y * self.width + x0;
            pixels.extend_from_slice(&self.pixels[start..start + w]);
        }
        Ok(GrayImage {
            width: w,
            height: h,
            pixels,
        })
    }
}

/// An image whose pixels are gray levels in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    pixels: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if levels == 0 || levels > 256 {
            return Err(Error::InvalidParameter(format!(
                "level count must be in 1..=256, got {levels}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(width * height, pixels.len()));
        }
        if let Some(&bad) = pixels.iter().find(|&&v| v as usize >= levels) {
            return Err(Error::InvalidParameter(format!(
                "level {bad} out of range for {levels} levels"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of gray levels, `N_g`.
    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Number of levels produced by quantizing 8-bit intensities with `step`.
pub fn levels_for_step(step: u32) -> usize {
    256usize.div_ceil(step as usize)
}

/// Uniform quantization: `level = floor(intensity / step)`.
pub fn quantize(img: &GrayImage, step: u32) -> Result<QuantizedImage> {
    if step == 0 || step > 256 {
        return Err(Error::InvalidParameter(format!(
            "quantization step must be in 1..=256, got {step}"
        )));
    }
    let step = step as u16;
    let pixels = img
        .pixels
        .iter()
        .map(|&v| (v as u16 / step) as u8)
        .collect();
    Ok(QuantizedImage {
        width: img.width,
        height: img.height,
        levels: levels_for_step(step as u32),
        pixels,
    })
}

/// Spatial displacement between the two pixels of a co-occurring pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Offset {
    /// Column displacement.
    pub dx: i32,
    /// Row displacement.
    pub dy: i32,
}

impl Offset {
    /// Same row, next column (θ = 0).
    pub const HORIZONTAL: Offset = Offset { dx: 1, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Result<Self> {
        if dx == 0 && dy == 0 {
            return Err(Error::InvalidParameter("offset must be nonzero".into()));
        }
        Ok(Self { dx, dy })
    }

    /// Direction of the offset in radians, `atan2(dy, dx)`.
    pub fn angle(&self) -> f64 {
        (self.dy as f64).atan2(self.dx as f64)
    }

    pub fn reversed(&self) -> Offset {
        Offset {
            dx: -self.dx,
            dy: -self.dy,
        }
    }

    /// Number of in-bounds pairs for a `width`×`height` image.
    pub fn pair_count(&self, width: usize, height: usize) -> usize {
        let (ax, ay) = (
            self.dx.unsigned_abs() as usize,
            self.dy.unsigned_abs() as usize,
        );
        width.saturating_sub(ax) * height.saturating_sub(ay)
    }
}

impl Default for Offset {
    fn default() -> Self {
        Offset::HORIZONTAL
    }
}

impl std::fmt::Display for Offset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.dx, self.dy)
    }
}

impl std::str::FromStr for Offset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("offset must be `DX,DY`, got `{s}`"));
        let (dx, dy) = s.split_once(',').ok_or_else(bad)?;
        let dx = dx.trim().parse().map_err(|_| bad())?;
        let dy = dy.trim().parse().map_err(|_| bad())?;
        Offset::new(dx, dy)
    }
}

/// Directed pair counts `P(i, j)` over `levels × levels` gray levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    levels: usize,
    counts: Vec<u64>,
    total_pairs: u64,
}

impl CooccurrenceMatrix {
    /// Builds a matrix from raw row-major counts. `total_pairs` is their sum.
    pub fn from_counts(levels: usize, counts: Vec<u64>) -> Result<Self> {
        if levels == 0 || counts.len() != levels * levels {
            return Err(Error::dims(levels * levels, counts.len()));
        }
        let total_pairs = counts.iter().sum();
        Ok(Self {
            levels,
            counts,
            total_pairs,
        })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.levels + j]
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `R`, the number of counted pairs.
    #[inline]
    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    pub fn transpose(&self) -> CooccurrenceMatrix {
        let n = self.levels;
        let mut counts = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                counts[j * n + i] = self.counts[i * n + j];
            }
        }
        CooccurrenceMatrix {
            levels: n,
            counts,
            total_pairs: self.total_pairs,
        }
    }
}

/// Counts ordered level pairs `(I(x, y), I(x + dx, y + dy))` over every
/// position where both pixels lie inside the image.
pub fn cooccurrence(img: &QuantizedImage, off: Offset) -> CooccurrenceMatrix {
    let n = img.levels;
    let (w, h) = (img.width as isize, img.height as isize);
    let (dx, dy) = (off.dx as isize, off.dy as isize);
    let mut counts = vec![0u64; n * n];

    // Source range for which the displaced pixel stays in bounds.
    let x_lo = 0.max(-dx);
    let x_hi = w.min(w - dx);
    let y_lo = 0.max(-dy);
    let y_hi = h.min(h - dy);

    let mut total = 0u64;
    if x_lo < x_hi && y_lo < y_hi {
        let px = img.pixels();
        for y in y_lo..y_hi {
            let src = &px[(y * w) as usize..((y + 1) * w) as usize];
            let dst_row = (y + dy) * w;
            let dst = &px[dst_row as usize..(dst_row + w) as usize];
            for x in x_lo..x_hi {
                let a = src[x as usize] as usize;
                let b = dst[(x + dx) as usize] as usize;
                counts[a * n + b] += 1;
            }
            total += (x_hi - x_lo) as u64;
        }
    }

    CooccurrenceMatrix {
        levels: n,
        counts,
        total_pairs: total,
    }
}

/// Joint probabilities `p(i, j) = P(i, j) / R`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCooccurrence {
    levels: usize,
    probs: Vec<f64>,
}

impl NormalizedCooccurrence {
    /// Wraps an existing probability table. Entries must be nonnegative,
    /// finite and sum to 1 within `1e-9`.
    pub fn from_probs(levels: usize, probs: Vec<f64>) -> Result<Self> {
        if levels == 0 || probs.len() != levels * levels {
            return Err(Error::dims(levels * levels, probs.len()));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { levels, probs })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.levels + j]
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.levels..(i + 1) * self.levels]
    }
}

pub fn normalize(glcm: &CooccurrenceMatrix) -> Result<NormalizedCooccurrence> {
    if glcm.total_pairs == 0 {
        return Err(Error::Degenerate(
            "co-occurrence matrix has no pairs to normalize".into(),
        ));
    }
    let r = glcm.total_pairs as f64;
    Ok(NormalizedCooccurrence {
        levels: glcm.levels,
        probs: glcm.counts.iter().map(|&c| c as f64 / r).collect(),
    })
}

/// Marginal and diagonal distributions of a normalized co-occurrence matrix.
///
/// Levels are stored 0-based; with the 1-based level numbering used by the
/// textural feature formulas, `sum[t]` holds `p_{x+y}(t + 2)` for
/// `t + 2 = 2..=2N_g`, and `diff[k]` holds `p_{x-y}(k)` for `k = 0..N_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub sum: Vec<f64>,
    pub diff: Vec<f64>,
}

impl Marginals {
    /// `p_{x+y}(k)` for 1-based `k` in `2..=2N_g`.
    pub fn p_sum(&self, k: usize) -> f64 {
        self.sum[k - 2]
    }

    /// `p_{x-y}(k)` for `k` in `0..N_g`.
    pub fn p_diff(&self, k: usize) -> f64 {
        self.diff[k]
    }
}

pub fn marginals(p: &NormalizedCooccurrence) -> Marginals {
    let n = p.levels;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut sum = vec![0.0; 2 * n - 1];
    let mut diff = vec![0.0; n];
    for i in 0..n {
        for (j, &v) in p.row(i).iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            px[i] += v;
            py[j] += v;
            sum[i + j] += v;
            diff[i.abs_diff(j)] += v;
        }
    }
    Marginals { px, py, sum, diff }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_a() -> QuantizedImage {
        #[rustfmt::skip]
        let px = vec![
            1, 1, 2, 1,
            2, 3, 1, 2,
            2, 1, 3, 2,
            3, 3, 2, 1,
        ];
        QuantizedImage::new(4, 4, 4, px).unwrap()
    }

    #[test]
    fn quantize_extremes() {
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        let q = quantize(&img, 8).unwrap();
        assert_eq!(q.pixels(), &[0, 31]);
        assert_eq!(q.levels(), 32);
        assert_eq!(quantize(&img, 1).unwrap().levels(), 256);
        assert_eq!(quantize(&img, 256).unwrap().pixels(), &[0, 0]);
        assert_eq!(levels_for_step(3), 86);
    }

    #[test]
    fn quantize_rejects_zero_step() {
        let img = GrayImage::filled(2, 2, 7);
        assert!(matches!(quantize(&img, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn horizontal_offset_reproduces_worked_example() {
        let m = cooccurrence(&worked_a(), Offset::HORIZONTAL);
        let c = [[1, 2, 1], [3, 0, 1], [1, 2, 1]];
        for (i, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(m.count(i + 1, j + 1), v, "C({},{})", i + 1, j + 1);
            }
        }
        assert_eq!(
            (0..4).map(|k| m.count(0, k) + m.count(k, 0)).sum::<u64>(),
            0
        );
        assert_eq!(m.total_pairs(), 12);
    }

    #[test]
    fn constant_image_single_cell() {
        let q = QuantizedImage::new(2, 2, 1, vec![0; 4]).unwrap();
        let m = cooccurrence(&q, Offset::HORIZONTAL);
        assert_eq!(m.counts(), &[2]);
        assert_eq!(m.total_pairs(), 2);
    }

    #[test]
    fn offset_larger_than_image_yields_no_pairs() {
        let q = QuantizedImage::new(2, 2, 2, vec![0, 1, 1, 0]).unwrap();
        let m = cooccurrence(&q, Offset::new(3, 0).unwrap());
        assert_eq!(m.total_pairs(), 0);
        assert!(m.counts().iter().all(|&c| c == 0));
        assert!(matches!(normalize(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn normalize_worked_example() {
        let p = normalize(&cooccurrence(&worked_a(), Offset::HORIZONTAL)).unwrap();
        assert_eq!(p.get(1, 1), 1.0 / 12.0);
        assert_eq!(p.get(2, 1), 3.0 / 12.0);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let mg = marginals(&p);
        let third = 4.0 / 12.0;
        for (a, b) in mg.px[1..].iter().zip([third, third, third]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in mg.py[1..].iter().zip([5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_count_normalizes_to_one() {
        let mut counts = vec![0; 9];
        counts[0] = 17;
        let p = normalize(&CooccurrenceMatrix::from_counts(3, counts).unwrap()).unwrap();
        assert_eq!(p.get(0, 0), 1.0);
    }

    #[test]
    fn diagonal_mass_has_zero_difference() {
        let n = 5;
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0 / n as f64;
        }
        let mg = marginals(&NormalizedCooccurrence::from_probs(n, probs).unwrap());
        assert!((mg.p_diff(0) - 1.0).abs() < 1e-15);
        assert!(mg.diff[1..].iter().all(|&v| v == 0.0));
        assert_eq!(mg.sum.len(), 2 * n - 1);
    }

    #[test]
    fn offset_parsing_and_angle() {
        let o: Offset = "1,-1".parse().unwrap();
        assert_eq!(o, Offset { dx: 1, dy: -1 });
        assert!((o.angle() + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(Offset::HORIZONTAL.angle(), 0.0);
        assert!("0,0".parse::<Offset>().is_err());
        assert!("1".parse::<Offset>().is_err());
    }

    #[test]
    fn crop_bounds() {
        let img = GrayImage::from_fn(4, 3, |x, y| (y * 4 + x) as u8);
        let c = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.pixels(), &[5, 6, 9, 10]);
        assert!(img.crop(3, 0, 2, 1).is_err());
    }
}
