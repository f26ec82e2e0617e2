//! Block tiling and per-image feature matrices.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glcm::{cooccurrence, normalize, quantize, GrayImage, Offset};
use crate::haralick::{features, FeatureVector, NUM_FEATURES};

/// Feature extraction settings. The default is 16×16 blocks, quantization
/// step 8 (32 gray levels) and the horizontal neighbour offset `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub block_size: usize,
    pub quant_step: u32,
    pub offset: Offset,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            block_size: 16,
            quant_step: 8,
            offset: Offset::HORIZONTAL,
        }
    }
}

impl FeatureConfig {
    /// Checks that every block contains at least one co-occurring pair.
    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        if self.quant_step == 0 || self.quant_step > 256 {
            return Err(Error::InvalidConfig(format!(
                "quantization step must be in 1..=256, got {}",
                self.quant_step
            )));
        }
        if self.offset.dx == 0 && self.offset.dy == 0 {
            return Err(Error::InvalidConfig("offset must be nonzero".into()));
        }
        if self.offset.pair_count(self.block_size, self.block_size) == 0 {
            return Err(Error::InvalidConfig(format!(
                "offset ({}) leaves no pixel pairs inside a {n}x{n} block",
                self.offset,
                n = self.block_size
            )));
        }
        Ok(())
    }
}

/// Layout of non-overlapping square blocks over an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        if width % block_size != 0 || height % block_size != 0 {
            return Err(Error::InvalidConfig(format!(
                "{width}x{height} image is not divisible into {block_size}x{block_size} blocks"
            )));
        }
        Ok(Self {
            block_size,
            blocks_x: width / block_size,
            blocks_y: height / block_size,
        })
    }

    /// `M`, the number of blocks.
    pub fn len(&self) -> usize {
        self.blocks_x * self.blocks_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Top-left pixel of block `j` in row-major tile order.
    pub fn origin(&self, j: usize) -> (usize, usize) {
        (
            (j % self.blocks_x) * self.block_size,
            (j / self.blocks_x) * self.block_size,
        )
    }
}

/// Splits `img` into `N×N` blocks in row-major tile order.
pub fn tile(img: &GrayImage, block_size: usize) -> Result<Vec<GrayImage>> {
    let grid = BlockGrid::new(img.width(), img.height(), block_size)?;
    (0..grid.len())
        .map(|j| {
            let (x, y) = grid.origin(j);
            img.crop(x, y, block_size, block_size)
        })
        .collect()
}

/// Feature vector of a single block.
pub fn block_features(block: &GrayImage, config: &FeatureConfig) -> Result<FeatureVector> {
    let q = quantize(block, config.quant_step)?;
    let p = normalize(&cooccurrence(&q, config.offset))?;
    Ok(features(&p))
}

/// A 14×M matrix whose column `j` is the feature vector of block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    cols: usize,
    // Row-major: feature rows are contiguous.
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(cols: usize) -> Self {
        Self {
            cols,
            values: vec![0.0; NUM_FEATURES * cols],
        }
    }

    pub fn from_row_major(cols: usize, values: Vec<f64>) -> Result<Self> {
        if cols == 0 || values.len() != NUM_FEATURES * cols {
            return Err(Error::dims(
                format!("{NUM_FEATURES}x{cols} values"),
                values.len(),
            ));
        }
        Ok(Self { cols, values })
    }

    pub fn from_columns(columns: &[FeatureVector]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::InvalidParameter(
                "feature matrix needs at least one column".into(),
            ));
        }
        let mut values = vec![0.0; NUM_FEATURES * cols];
        for (j, fv) in columns.iter().enumerate() {
            for (m, &v) in fv.as_array().iter().enumerate() {
                values[m * cols + j] = v;
            }
        }
        Ok(Self { cols, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        NUM_FEATURES
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.cols + n]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, v: f64) {
        self.values[m * self.cols + n] = v;
    }

    /// Feature row `m` (0-based) across all blocks.
    #[inline]
    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m * self.cols..(m + 1) * self.cols]
    }

    pub fn column(&self, n: usize) -> FeatureVector {
        let mut f = [0.0; NUM_FEATURES];
        for (m, v) in f.iter_mut().enumerate() {
            *v = self.get(m, n);
        }
        FeatureVector(f)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_shape(&self, other: &FeatureMatrix) -> bool {
        self.cols == other.cols
    }

    pub(crate) fn check_shape(&self, other: &FeatureMatrix) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::dims(
                format!("{NUM_FEATURES}x{}", self.cols),
                format!("{NUM_FEATURES}x{}", other.cols),
            ))
        }
    }
}

/// Extracts the feature matrix of one single-spectrum image.
pub fn extract_feature_matrix(img: &GrayImage, config: &FeatureConfig) -> Result<FeatureMatrix> {
    config.validate()?;
    let blocks = tile(img, config.block_size)?;
    let columns = blocks
        .iter()
        .map(|b| block_features(b, config))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::from_columns(&columns)
}

/// Element-wise mean of equally shaped feature matrices.
pub fn mean_feature_matrix<'a, I>(samples: I) -> Result<FeatureMatrix>
where
    I: IntoIterator<Item = &'a FeatureMatrix>,
{
    let mut iter = samples.into_iter();
    let first = iter.next().ok_or_else(|| {
        Error::InvalidParameter("cannot average an empty set of feature matrices".into())
    })?;
    let mut acc = first.values.clone();
    let mut count = 1usize;
    for fm in iter {
        first.check_shape(fm)?;
        for (a, &v) in acc.iter_mut().zip(&fm.values) {
            *a += v;
        }
        count += 1;
    }
    let scale = count as f64;
    acc.iter_mut().for_each(|a| *a /= scale);
    Ok(FeatureMatrix {
        cols: first.cols,
        values: acc,
    })
}

/// Acquisition band of a palm image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spectrum {
    Red,
    Green,
    Blue,
    Nir,
}

impl Spectrum {
    pub const ALL: [Spectrum; 4] = [
        Spectrum::Red,
        Spectrum::Green,
        Spectrum::Blue,
        Spectrum::Nir,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Spectrum> {
        Self::ALL.get(i).copied()
    }

    /// Directory and flag name.
    pub fn name(self) -> &'static str {
        match self {
            Spectrum::Red => "red",
            Spectrum::Green => "green",
            Spectrum::Blue => "blue",
            Spectrum::Nir => "nir",
        }
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Spectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "red" | "r" => Ok(Spectrum::Red),
            "green" | "g" => Ok(Spectrum::Green),
            "blue" | "b" => Ok(Spectrum::Blue),
            "nir" | "ir" | "infrared" | "i" => Ok(Spectrum::Nir),
            _ => Err(Error::InvalidParameter(format!("unknown spectrum `{s}`"))),
        }
    }
}

/// Identifier of an enrolled person. Ordering is lexicographic and decides
/// classifier ties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonId(pub String);

impl PersonId {
    pub fn new(id: impl Into<String>) -> Self {
        PersonId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PersonId {
    fn from(s: &str) -> Self {
        PersonId(s.to_owned())
    }
}

/// One feature matrix per spectrum, all of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MultispectralFeatures {
    matrices: [FeatureMatrix; 4],
}

impl MultispectralFeatures {
    /// Takes matrices in [`Spectrum::ALL`] order.
    pub fn new(matrices: [FeatureMatrix; 4]) -> Result<Self> {
        for m in &matrices[1..] {
            matrices[0].check_shape(m)?;
        }
        Ok(Self { matrices })
    }

    pub fn cols(&self) -> usize {
        self.matrices[0].cols()
    }

    pub fn matrices(&self) -> &[FeatureMatrix; 4] {
        &self.matrices
    }

    pub fn iter(&self) -> impl Iterator<Item = (Spectrum, &FeatureMatrix)> {
        Spectrum::ALL.into_iter().zip(self.matrices.iter())
    }

    pub(crate) fn check_shape(&self, other: &MultispectralFeatures) -> Result<()> {
        self.matrices[0].check_shape(&other.matrices[0])
    }

    /// Per-spectrum element-wise mean.
    pub fn mean<'a, I>(items: I) -> Result<MultispectralFeatures>
    where
        I: IntoIterator<Item = &'a MultispectralFeatures>,
        I::IntoIter: Clone,
    {
        let iter = items.into_iter();
        let per: Vec<FeatureMatrix> = (0..4)
            .map(|s| mean_feature_matrix(iter.clone().map(|x| &x.matrices[s])))
            .collect::<Result<_>>()?;
        let matrices: [FeatureMatrix; 4] = per.try_into().expect("four spectra");
        MultispectralFeatures::new(matrices)
    }

    /// Extracts all four spectra of one capture.
    pub fn extract(images: [&GrayImage; 4], config: &FeatureConfig) -> Result<Self> {
        let [r, g, b, n] = images.map(|img| extract_feature_matrix(img, config));
        MultispectralFeatures::new([r?, g?, b?, n?])
    }
}

impl Index<Spectrum> for MultispectralFeatures {
    type Output = FeatureMatrix;

    fn index(&self, s: Spectrum) -> &FeatureMatrix {
        &self.matrices[s.index()]
    }
}

/// The four spectral feature matrices of one palm capture.
#[derive(Debug, Clone, PartialEq)]
pub struct MultispectralSample {
    pub person_id: PersonId,
    /// 1-based capture index within the person's session.
    pub sample_index: usize,
    pub features: MultispectralFeatures,
}
