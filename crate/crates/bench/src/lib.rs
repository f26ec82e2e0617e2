//! Seeded fixtures shared by the benchmarks in `benches/`.

use palmtex_core::pipeline::FeatureMatrix;
use palmtex_core::{GrayImage, MultispectralFeatures, PersonId, PersonTemplate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random 8-bit image.
pub fn noise_image(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::from_fn(width, height, |_, _| r.random())
}

pub fn random_features(r: &mut impl Rng, cols: usize) -> MultispectralFeatures {
    MultispectralFeatures::new(std::array::from_fn(|_| {
        FeatureMatrix::from_row_major(
            cols,
            (0..14 * cols).map(|_| r.random_range(-1.0..1.0)).collect(),
        )
        .expect("14 rows")
    }))
    .expect("equal shapes")
}

/// `persons` templates of `cols` blocks each plus one probe.
pub fn gallery(
    seed: u64,
    persons: usize,
    cols: usize,
) -> (Vec<PersonTemplate>, MultispectralFeatures) {
    let mut r = rng(seed);
    let templates = (0..persons)
        .map(|k| PersonTemplate {
            person_id: PersonId::new(format!("p{k:04}")),
            features: random_features(&mut r, cols),
        })
        .collect();
    (templates, random_features(&mut r, cols))
}
