//! Versioned little-endian binary archives for feature matrices and trained
//! template sets.
//!
//! Both formats start with an 8-byte magic and a `u32` version, followed by
//! the feature configuration they were produced with. Floats are stored as
//! raw IEEE-754 bits so a save/load round trip is value-exact.

use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::classify::{ClassifierWeights, PersonTemplate};
use crate::error::{Error, Result};
use crate::glcm::Offset;
use crate::haralick::NUM_FEATURES;
use crate::pipeline::{FeatureConfig, FeatureMatrix, MultispectralFeatures, PersonId, Spectrum};

pub const TEMPLATE_MAGIC: &[u8; 8] = b"PTXTMPL\0";
pub const FEATURE_MAGIC: &[u8; 8] = b"PTXFEAT\0";
pub const FORMAT_VERSION: u32 = 1;

const MAX_STRING: u32 = 1 << 16;
const MAX_COLS: u32 = 1 << 20;

/// Trained templates together with the weights and extraction settings
/// needed to identify new samples against them.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateArchive {
    pub config: FeatureConfig,
    pub weights: ClassifierWeights,
    pub templates: Vec<PersonTemplate>,
}

/// One extracted single-spectrum feature matrix with optional tags.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub source: String,
    pub person_id: Option<PersonId>,
    pub spectrum: Option<Spectrum>,
    pub sample_index: Option<u32>,
    pub matrix: FeatureMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureArchive {
    pub config: FeatureConfig,
    pub entries: Vec<FeatureEntry>,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Archive(msg.into())
}

fn map_eof(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        corrupt("unexpected end of file")
    } else {
        Error::Io(e)
    }
}

fn write_header(w: &mut impl Write, magic: &[u8; 8], config: &FeatureConfig) -> io::Result<()> {
    w.write_all(magic)?;
    w.write_u32::<LE>(FORMAT_VERSION)?;
    w.write_u32::<LE>(config.block_size as u32)?;
    w.write_u32::<LE>(config.quant_step)?;
    w.write_i32::<LE>(config.offset.dx)?;
    w.write_i32::<LE>(config.offset.dy)
}

fn read_header(r: &mut impl Read, magic: &[u8; 8]) -> Result<FeatureConfig> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got).map_err(map_eof)?;
    if &got != magic {
        return Err(corrupt(format!(
            "bad magic: expected {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&got)
        )));
    }
    let version = r.read_u32::<LE>().map_err(map_eof)?;
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let block_size = r.read_u32::<LE>().map_err(map_eof)? as usize;
    let quant_step = r.read_u32::<LE>().map_err(map_eof)?;
    let dx = r.read_i32::<LE>().map_err(map_eof)?;
    let dy = r.read_i32::<LE>().map_err(map_eof)?;
    let config = FeatureConfig {
        block_size,
        quant_step,
        offset: Offset { dx, dy },
    };
    config
        .validate()
        .map_err(|e| corrupt(format!("stored feature configuration invalid: {e}")))?;
    Ok(config)
}

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = r.read_u32::<LE>().map_err(map_eof)?;
    if len > MAX_STRING {
        return Err(corrupt(format!("string length {len} too large")));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf).map_err(map_eof)?;
    String::from_utf8(buf).map_err(|_| corrupt("string is not UTF-8"))
}

fn write_f64s(w: &mut impl Write, values: &[f64]) -> io::Result<()> {
    for &v in values {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut v = vec![0.0; n];
    r.read_f64_into::<LE>(&mut v).map_err(map_eof)?;
    Ok(v)
}

fn read_cols(r: &mut impl Read) -> Result<usize> {
    let cols = r.read_u32::<LE>().map_err(map_eof)?;
    if cols == 0 || cols > MAX_COLS {
        return Err(corrupt(format!("invalid block count {cols}")));
    }
    Ok(cols as usize)
}

fn expect_end(r: &mut impl Read) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(corrupt("trailing bytes after archive contents")),
    }
}

impl TemplateArchive {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let cols = self.templates.first().map_or(0, |t| t.features.cols());
        if self.templates.is_empty() {
            return Err(Error::InvalidParameter(
                "template archive needs at least one template".into(),
            ));
        }
        write_header(w, TEMPLATE_MAGIC, &self.config)?;
        write_f64s(w, &self.weights.w)?;
        write_f64s(w, &self.weights.alpha)?;
        w.write_u32::<LE>(cols as u32)?;
        w.write_u32::<LE>(self.templates.len() as u32)?;
        for t in &self.templates {
            if t.features.cols() != cols {
                return Err(Error::dims(cols, t.features.cols()));
            }
            write_str(w, t.person_id.as_str())?;
            for fm in t.features.matrices() {
                write_f64s(w, fm.values())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let config = read_header(r, TEMPLATE_MAGIC)?;
        let w: [f64; NUM_FEATURES] = read_f64s(r, NUM_FEATURES)?.try_into().expect("14 values");
        let alpha: [f64; NUM_FEATURES] = read_f64s(r, NUM_FEATURES)?.try_into().expect("14 values");
        let weights = ClassifierWeights::new(w, alpha)
            .map_err(|e| corrupt(format!("stored weights invalid: {e}")))?;
        let cols = read_cols(r)?;
        let count = r.read_u32::<LE>().map_err(map_eof)?;
        if count == 0 {
            return Err(corrupt("archive holds no templates"));
        }
        let mut templates = Vec::new();
        for _ in 0..count {
            let person_id = PersonId(read_str(r)?);
            let mats: Vec<FeatureMatrix> = (0..4)
                .map(|_| FeatureMatrix::from_row_major(cols, read_f64s(r, NUM_FEATURES * cols)?))
                .collect::<Result<_>>()?;
            let features = MultispectralFeatures::new(mats.try_into().expect("four spectra"))?;
            templates.push(PersonTemplate {
                person_id,
                features,
            });
        }
        expect_end(r)?;
        Ok(Self {
            config,
            weights,
            templates,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path).map_err(|e| Error::load(path, e.to_string()))?;
        Self::read_from(&mut BufReader::new(f)).map_err(|e| Error::load(path, e.to_string()))
    }
}

impl FeatureArchive {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        write_header(w, FEATURE_MAGIC, &self.config)?;
        w.write_u32::<LE>(self.entries.len() as u32)?;
        for e in &self.entries {
            write_str(w, &e.source)?;
            match &e.person_id {
                Some(id) => {
                    w.write_u8(1)?;
                    write_str(w, id.as_str())?;
                }
                None => w.write_u8(0)?,
            }
            w.write_u8(e.spectrum.map_or(u8::MAX, |s| s.index() as u8))?;
            w.write_u32::<LE>(e.sample_index.unwrap_or(0))?;
            w.write_u32::<LE>(e.matrix.cols() as u32)?;
            write_f64s(w, e.matrix.values())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let config = read_header(r, FEATURE_MAGIC)?;
        let count = r.read_u32::<LE>().map_err(map_eof)?;
        let mut entries = Vec::new();
        for _ in 0..count {
            let source = read_str(r)?;
            let person_id = match r.read_u8().map_err(map_eof)? {
                0 => None,
                1 => Some(PersonId(read_str(r)?)),
                t => return Err(corrupt(format!("bad person tag {t}"))),
            };
            let spectrum = match r.read_u8().map_err(map_eof)? {
                u8::MAX => None,
                s => Some(
                    Spectrum::from_index(s as usize)
                        .ok_or_else(|| corrupt(format!("bad spectrum tag {s}")))?,
                ),
            };
            let sample_index = match r.read_u32::<LE>().map_err(map_eof)? {
                0 => None,
                i => Some(i),
            };
            let cols = read_cols(r)?;
            let matrix = FeatureMatrix::from_row_major(cols, read_f64s(r, NUM_FEATURES * cols)?)?;
            entries.push(FeatureEntry {
                source,
                person_id,
                spectrum,
                sample_index,
                matrix,
            });
        }
        expect_end(r)?;
        Ok(Self { config, entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path).map_err(|e| Error::load(path, e.to_string()))?;
        Self::read_from(&mut BufReader::new(f)).map_err(|e| Error::load(path, e.to_string()))
    }
}
