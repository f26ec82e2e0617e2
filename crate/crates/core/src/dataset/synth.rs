//! Seeded synthetic multispectral palm textures.
//!
//! Each (person, spectrum) pair owns a base texture made of two oriented
//! sinusoidal gratings on a mean brightness. Every capture perturbs the
//! grating orientations, frequencies and amplitudes, draws fresh phases,
//! shifts the brightness and adds Gaussian pixel noise. The jitter and
//! noise fields are the difficulty knobs; at the defaults the classes are
//! well separated.
//!
//! Every image is generated from its own RNG stream keyed by
//! `(seed, person, spectrum, sample)`, so output does not depend on
//! generation order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PersonImages, RawDataset, SpectralImages};
use crate::error::{Error, Result};
use crate::glcm::GrayImage;
use crate::pipeline::PersonId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_persons: usize,
    pub samples_per_person: usize,
    /// Side length of the square images.
    pub image_size: usize,
    /// Standard deviation of the per-capture grating rotation, radians.
    pub orientation_jitter: f64,
    /// Relative standard deviation of the per-capture grating frequency.
    pub frequency_jitter: f64,
    /// Relative standard deviation of the per-capture grating amplitude.
    pub amplitude_jitter: f64,
    /// Standard deviation of the per-capture brightness shift, gray levels.
    pub brightness_jitter: f64,
    /// Standard deviation of additive per-pixel noise, gray levels.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_persons: 50,
            samples_per_person: 12,
            image_size: 128,
            orientation_jitter: 0.02,
            frequency_jitter: 0.02,
            amplitude_jitter: 0.02,
            brightness_jitter: 2.0,
            noise_sigma: 6.0,
            seed: 2016,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_persons == 0 {
            return Err(Error::InvalidParameter("need at least one person".into()));
        }
        if self.samples_per_person == 0 {
            return Err(Error::InvalidParameter(
                "need at least one sample per person".into(),
            ));
        }
        if self.image_size == 0 {
            return Err(Error::InvalidParameter(
                "image size must be positive".into(),
            ));
        }
        let knobs = [
            self.orientation_jitter,
            self.frequency_jitter,
            self.amplitude_jitter,
            self.brightness_jitter,
            self.noise_sigma,
        ];
        if knobs.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "jitter and noise levels must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Zero-padded id of person `p` (0-based).
    pub fn person_id(&self, p: usize) -> PersonId {
        let width = self.num_persons.to_string().len().max(3);
        PersonId(format!("p{:0width$}", p + 1))
    }
}

#[derive(Debug, Clone, Copy)]
struct Grating {
    theta: f64,
    freq: f64,
    amp: f64,
}

#[derive(Debug, Clone, Copy)]
struct BaseTexture {
    mean: f64,
    gratings: [Grating; 2],
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let k = keys
        .iter()
        .fold(splitmix(seed), |acc, &v| splitmix(acc ^ splitmix(v)));
    ChaCha8Rng::seed_from_u64(k)
}

fn base_texture(seed: u64, person: usize, spectrum: usize) -> BaseTexture {
    let mut rng = stream(seed, &[person as u64, spectrum as u64, u64::MAX]);
    let primary = Grating {
        theta: rng.random_range(0.0..PI),
        freq: rng.random_range(0.02..0.25),
        amp: rng.random_range(15.0..55.0),
    };
    let secondary = Grating {
        theta: rng.random_range(0.0..PI),
        freq: rng.random_range(0.02..0.25),
        amp: rng.random_range(5.0..30.0),
    };
    BaseTexture {
        mean: rng.random_range(80.0..176.0),
        gratings: [primary, secondary],
    }
}

fn render(cfg: &SynthConfig, base: &BaseTexture, keys: [u64; 3]) -> GrayImage {
    let mut rng = stream(cfg.seed, &keys);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut jitter = |sd: f64| sd * unit.sample(&mut rng);

    let mut waves = [(0.0, 0.0, 0.0, 0.0); 2];
    for (w, g) in waves.iter_mut().zip(&base.gratings) {
        let theta = g.theta + jitter(cfg.orientation_jitter);
        let freq = g.freq * (1.0 + jitter(cfg.frequency_jitter));
        let amp = g.amp * (1.0 + jitter(cfg.amplitude_jitter));
        let k = 2.0 * PI * freq;
        *w = (k * theta.cos(), k * theta.sin(), amp, 0.0);
    }
    let mean = base.mean + jitter(cfg.brightness_jitter);
    for w in waves.iter_mut() {
        w.3 = rng.random_range(0.0..2.0 * PI);
    }
    let noise = Normal::new(0.0, cfg.noise_sigma.max(f64::MIN_POSITIVE)).expect("noise sd");

    let n = cfg.image_size;
    GrayImage::from_fn(n, n, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = mean;
        for &(kx, ky, amp, phase) in &waves {
            v += amp * (kx * xf + ky * yf + phase).sin();
        }
        if cfg.noise_sigma > 0.0 {
            v += noise.sample(&mut rng);
        }
        v.round().clamp(0.0, 255.0) as u8
    })
}

/// Generates the full dataset in memory.
pub fn synthesize(cfg: &SynthConfig) -> Result<RawDataset> {
    cfg.validate()?;
    let persons = (0..cfg.num_persons)
        .into_par_iter()
        .map(|p| {
            let bases: [BaseTexture; 4] = std::array::from_fn(|s| base_texture(cfg.seed, p, s));
            let samples = (0..cfg.samples_per_person)
                .map(|i| -> SpectralImages {
                    std::array::from_fn(|s| render(cfg, &bases[s], [p as u64, s as u64, i as u64]))
                })
                .collect();
            PersonImages {
                person_id: cfg.person_id(p),
                samples,
            }
        })
        .collect();
    Ok(RawDataset { persons })
}
