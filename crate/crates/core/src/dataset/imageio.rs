use std::fs;
use std::io::Write;
use std::path::Path;

use image::{ColorType, ImageReader};

use crate::error::{Error, Result};
use crate::glcm::GrayImage;

/// On-disk image encodings accepted by the loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Png,
    /// Binary PGM (`P5`), maxval 255.
    Pgm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        }
    }

    pub fn from_path(path: &Path) -> Option<ImageFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(ImageFormat::Png),
            "pgm" => Some(ImageFormat::Pgm),
            _ => None,
        }
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ImageFormat::Png),
            "pgm" => Ok(ImageFormat::Pgm),
            _ => Err(Error::InvalidParameter(format!(
                "unknown image format `{s}`"
            ))),
        }
    }
}

/// Reads an 8-bit single-channel PNG or PGM image.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    if !path.is_file() {
        return Err(Error::load(path, "file not found"));
    }
    let reader = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| Error::load(path, e.to_string()))?;
    let img = reader
        .decode()
        .map_err(|e| Error::load(path, format!("cannot decode image: {e}")))?;
    if img.color() != ColorType::L8 {
        return Err(Error::load(
            path,
            format!("expected 8-bit grayscale, found {:?}", img.color()),
        ));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    GrayImage::new(w, h, img.into_luma8().into_raw()).map_err(|e| Error::load(path, e.to_string()))
}

pub fn write_gray(path: &Path, img: &GrayImage, format: ImageFormat) -> Result<()> {
    match format {
        ImageFormat::Png => image::save_buffer_with_format(
            path,
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )?,
        ImageFormat::Pgm => {
            let mut f = std::io::BufWriter::new(fs::File::create(path)?);
            write!(f, "P5\n{} {}\n255\n", img.width(), img.height())?;
            f.write_all(img.pixels())?;
            f.flush()?;
        }
    }
    Ok(())
}
