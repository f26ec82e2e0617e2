//! Texture-based multispectral palmprint identification.
//!
//! Images are split into non-overlapping blocks, each block is quantized and
//! summarised by a directed gray-level co-occurrence matrix, and fourteen
//! Haralick textural features are computed per block. The per-block feature
//! vectors form a 14×M feature matrix per spectrum. Identification compares a
//! test sample's four spectral feature matrices against per-person templates
//! with either a weighted minimum-distance classifier or a weighted majority
//! vote over feature rows.
//!
//! ```
//! use palmtex_core::{glcm::{GrayImage, Offset}, pipeline::{extract_feature_matrix, FeatureConfig}};
//!
//! let img = GrayImage::from_fn(32, 32, |x, y| ((x * 7 + y * 3) % 256) as u8);
//! let f = extract_feature_matrix(&img, &FeatureConfig::default()).unwrap();
//! assert_eq!((f.rows(), f.cols()), (14, 4));
//! # let _ = Offset::HORIZONTAL;
//! ```

pub mod archive;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod glcm;
pub mod haralick;
pub mod pipeline;

pub use classify::{
    learn_weights, mdc_distance, mdc_identify, wmv_identify, ClassifierKind, ClassifierWeights,
    IdentificationResult, PersonTemplate, WeightMode,
};
pub use error::{Error, Result};
pub use glcm::{CooccurrenceMatrix, GrayImage, NormalizedCooccurrence, Offset, QuantizedImage};
pub use haralick::{FeatureVector, NUM_FEATURES};
pub use pipeline::{
    FeatureConfig, FeatureMatrix, MultispectralFeatures, MultispectralSample, PersonId, Spectrum,
};

/// Version string embedded in reports and archives.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
