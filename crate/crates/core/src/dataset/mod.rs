//! Multispectral palmprint datasets: on-disk layout, loading, synthetic
//! generation and split protocols.
//!
//! The default on-disk layout is
//!
//! ```text
//! root/<person_id>/<spectrum>/<sample_index>.<png|pgm>
//! ```
//!
//! with `spectrum` one of `red`, `green`, `blue`, `nir`. A `manifest.toml`
//! in the root, when present, overrides directory discovery.

mod imageio;
mod manifest;
pub mod split;
pub mod synth;

use rayon::prelude::*;

pub use imageio::{read_gray, write_gray, ImageFormat};
pub use manifest::{DatasetManifest, ManifestPerson, MANIFEST_FILE};
pub use split::{splits, Fold, SplitScheme, SplitSpec};
pub use synth::{synthesize, SynthConfig};

use crate::error::{Error, Result};
use crate::glcm::GrayImage;
use crate::pipeline::{FeatureConfig, MultispectralFeatures, MultispectralSample};
pub use crate::pipeline::{PersonId, Spectrum};

/// Number of captures per person in the reference acquisition protocol.
pub const SAMPLES_PER_PERSON: usize = 12;

/// The four spectral images of one capture, in [`Spectrum::ALL`] order.
pub type SpectralImages = [GrayImage; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonImages {
    pub person_id: PersonId,
    pub samples: Vec<SpectralImages>,
}

/// Raw images grouped by person, sample and spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawDataset {
    pub persons: Vec<PersonImages>,
}

impl RawDataset {
    pub fn num_images(&self) -> usize {
        self.persons.iter().map(|p| p.samples.len() * 4).sum()
    }

    pub fn num_samples(&self) -> usize {
        self.persons.iter().map(|p| p.samples.len()).sum()
    }

    /// Samples per person, if every person has the same count.
    pub fn samples_per_person(&self) -> Option<usize> {
        let n = self.persons.first()?.samples.len();
        self.persons
            .iter()
            .all(|p| p.samples.len() == n)
            .then_some(n)
    }

    /// Writes the dataset in the default layout plus a manifest.
    pub fn write(&self, root: &std::path::Path, format: ImageFormat) -> Result<DatasetManifest> {
        std::fs::create_dir_all(root)?;
        let mut manifest = DatasetManifest {
            root: root.to_path_buf(),
            persons: Vec::with_capacity(self.persons.len()),
        };
        for person in &self.persons {
            let mut entry = ManifestPerson {
                person_id: person.person_id.clone(),
                files: Default::default(),
            };
            for s in Spectrum::ALL {
                let dir = root.join(person.person_id.as_str()).join(s.name());
                std::fs::create_dir_all(&dir)?;
                for (idx, images) in person.samples.iter().enumerate() {
                    let rel = std::path::PathBuf::from(person.person_id.as_str())
                        .join(s.name())
                        .join(format!("{:02}.{}", idx + 1, format.extension()));
                    write_gray(&root.join(&rel), &images[s.index()], format)?;
                    entry.files[s.index()].push(rel);
                }
            }
            manifest.persons.push(entry);
        }
        manifest.save(&root.join(MANIFEST_FILE))?;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Required `(width, height)` of every image; `None` accepts any size.
    pub expected_size: Option<(usize, usize)>,
    /// Required number of samples per person; `None` accepts any count.
    pub expected_samples: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            expected_size: Some((128, 128)),
            expected_samples: Some(SAMPLES_PER_PERSON),
        }
    }
}

/// Decodes every image named by the manifest. Order is (person, sample,
/// spectrum) as listed.
pub fn load(manifest: &DatasetManifest, opts: &LoadOptions) -> Result<RawDataset> {
    manifest.validate(opts.expected_samples)?;
    let jobs: Vec<(usize, usize, usize)> = manifest
        .persons
        .iter()
        .enumerate()
        .flat_map(|(pi, p)| {
            (0..p.files[0].len()).flat_map(move |si| (0..4).map(move |s| (pi, si, s)))
        })
        .collect();

    let images = jobs
        .par_iter()
        .map(|&(pi, si, s)| {
            let path = manifest.root.join(&manifest.persons[pi].files[s][si]);
            let img = read_gray(&path)?;
            if let Some((w, h)) = opts.expected_size {
                if (img.width(), img.height()) != (w, h) {
                    return Err(Error::load(
                        &path,
                        format!(
                            "expected {w}x{h} image, found {}x{}",
                            img.width(),
                            img.height()
                        ),
                    ));
                }
            }
            Ok(img)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut it = images.into_iter();
    let persons = manifest
        .persons
        .iter()
        .map(|p| PersonImages {
            person_id: p.person_id.clone(),
            samples: (0..p.files[0].len())
                .map(|_| std::array::from_fn(|_| it.next().expect("one image per job")))
                .collect(),
        })
        .collect();
    Ok(RawDataset { persons })
}

/// Extracted feature matrices of one person's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonFeatures {
    pub person_id: PersonId,
    pub samples: Vec<MultispectralFeatures>,
}

impl PersonFeatures {
    pub fn to_samples(&self) -> Vec<MultispectralSample> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, f)| MultispectralSample {
                person_id: self.person_id.clone(),
                sample_index: i + 1,
                features: f.clone(),
            })
            .collect()
    }
}

/// Extracts the feature matrices of every sample. Work is spread over the
/// rayon pool; output order matches input order.
pub fn extract_features(raw: &RawDataset, config: &FeatureConfig) -> Result<Vec<PersonFeatures>> {
    config.validate()?;
    let jobs: Vec<&SpectralImages> = raw.persons.iter().flat_map(|p| &p.samples).collect();
    let extracted = jobs
        .par_iter()
        .map(|imgs| {
            MultispectralFeatures::extract([&imgs[0], &imgs[1], &imgs[2], &imgs[3]], config)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut it = extracted.into_iter();
    Ok(raw
        .persons
        .iter()
        .map(|p| PersonFeatures {
            person_id: p.person_id.clone(),
            samples: it.by_ref().take(p.samples.len()).collect(),
        })
        .collect())
}
