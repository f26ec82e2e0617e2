use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::imageio::ImageFormat;
use crate::error::{Error, Result};
use crate::pipeline::{PersonId, Spectrum};

pub const MANIFEST_FILE: &str = "manifest.toml";
const MANIFEST_FORMAT: &str = "palmtex-manifest";
const MANIFEST_VERSION: u32 = 1;

/// Image files of one person, one list per spectrum (relative to the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestPerson {
    pub person_id: PersonId,
    pub files: [Vec<PathBuf>; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub persons: Vec<ManifestPerson>,
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    format: String,
    version: u32,
    #[serde(default)]
    person: Vec<PersonRecord>,
}

#[derive(Serialize, Deserialize)]
struct PersonRecord {
    id: String,
    red: Vec<String>,
    green: Vec<String>,
    blue: Vec<String>,
    nir: Vec<String>,
}

impl DatasetManifest {
    /// Uses `root/manifest.toml` when it exists, otherwise scans the
    /// directory layout.
    pub fn discover(root: &Path) -> Result<Self> {
        let manifest = root.join(MANIFEST_FILE);
        if manifest.is_file() {
            return Self::from_file(&manifest);
        }
        Self::scan(root)
    }

    /// Builds a manifest from `root/<person>/<spectrum>/<index>.<ext>`.
    pub fn scan(root: &Path) -> Result<Self> {
        if !root.is_dir() {
            return Err(Error::load(root, "dataset root is not a directory"));
        }
        let mut person_dirs: Vec<PathBuf> = fs::read_dir(root)
            .map_err(|e| Error::load(root, e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        person_dirs.sort();

        let mut persons = Vec::with_capacity(person_dirs.len());
        for dir in person_dirs {
            let id = dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::load(&dir, "person directory name is not UTF-8"))?
                .to_owned();
            let mut files: [Vec<PathBuf>; 4] = Default::default();
            for s in Spectrum::ALL {
                let sdir = dir.join(s.name());
                if !sdir.is_dir() {
                    return Err(Error::load(
                        &sdir,
                        format!("missing {s} spectrum directory"),
                    ));
                }
                let mut entries: Vec<PathBuf> = fs::read_dir(&sdir)
                    .map_err(|e| Error::load(&sdir, e.to_string()))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.is_file() && ImageFormat::from_path(p).is_some())
                    .collect();
                entries.sort_by_key(|p| sample_sort_key(p));
                files[s.index()] = entries
                    .into_iter()
                    .map(|p| p.strip_prefix(root).map(Path::to_path_buf).unwrap_or(p))
                    .collect();
            }
            persons.push(ManifestPerson {
                person_id: PersonId(id),
                files,
            });
        }
        Ok(Self {
            root: root.to_path_buf(),
            persons,
        })
    }

    /// Reads a manifest file; paths inside are relative to its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::load(path, e.to_string()))?;
        let file: ManifestFile = toml::from_str(&text)
            .map_err(|e| Error::load(path, format!("invalid manifest: {e}")))?;
        if file.format != MANIFEST_FORMAT {
            return Err(Error::load(
                path,
                format!(
                    "expected format `{MANIFEST_FORMAT}`, found `{}`",
                    file.format
                ),
            ));
        }
        if file.version != MANIFEST_VERSION {
            return Err(Error::load(
                path,
                format!("unsupported manifest version {}", file.version),
            ));
        }
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let to_paths = |v: Vec<String>| v.into_iter().map(PathBuf::from).collect::<Vec<_>>();
        let persons = file
            .person
            .into_iter()
            .map(|p| ManifestPerson {
                person_id: PersonId(p.id),
                files: [
                    to_paths(p.red),
                    to_paths(p.green),
                    to_paths(p.blue),
                    to_paths(p.nir),
                ],
            })
            .collect();
        Ok(Self { root, persons })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let to_strings = |v: &[PathBuf]| {
            v.iter()
                .map(|p| p.to_string_lossy().replace('\\', "/"))
                .collect::<Vec<_>>()
        };
        let file = ManifestFile {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            person: self
                .persons
                .iter()
                .map(|p| PersonRecord {
                    id: p.person_id.0.clone(),
                    red: to_strings(&p.files[0]),
                    green: to_strings(&p.files[1]),
                    blue: to_strings(&p.files[2]),
                    nir: to_strings(&p.files[3]),
                })
                .collect(),
        };
        let text = toml::to_string(&file).map_err(|e| Error::Serialize(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    /// Structural checks: unique ids, equal sample counts across spectra,
    /// optional fixed count, and every file present.
    pub fn validate(&self, expected_samples: Option<usize>) -> Result<()> {
        if self.persons.is_empty() {
            return Err(Error::load(&self.root, "dataset contains no persons"));
        }
        let mut ids: Vec<&PersonId> = self.persons.iter().map(|p| &p.person_id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::load(
                &self.root,
                format!("duplicate person id {}", w[0]),
            ));
        }
        for p in &self.persons {
            let n = p.files[0].len();
            for s in Spectrum::ALL {
                let count = p.files[s.index()].len();
                if count != n {
                    return Err(Error::load(
                        self.root.join(p.person_id.as_str()),
                        format!("{s} has {count} samples but red has {n}"),
                    ));
                }
                if let Some(expected) = expected_samples {
                    if count != expected {
                        return Err(Error::load(
                            self.root.join(p.person_id.as_str()).join(s.name()),
                            format!("expected {expected} samples, found {count}"),
                        ));
                    }
                }
                for f in &p.files[s.index()] {
                    let full = self.root.join(f);
                    if !full.is_file() {
                        return Err(Error::load(full, "file not found"));
                    }
                }
            }
            if n == 0 {
                return Err(Error::load(
                    self.root.join(p.person_id.as_str()),
                    "person has no samples",
                ));
            }
        }
        Ok(())
    }
}

/// Numeric file stems sort numerically, before any non-numeric names.
fn sample_sort_key(p: &Path) -> (u64, String) {
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    (stem.parse().unwrap_or(u64::MAX), stem.to_owned())
}
