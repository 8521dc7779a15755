//! PNG and PNM (P2/P3/P5/P6) reading and writing. Samples are quantized to
//! 8 bits only here.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use super::{quantize, BinaryMask, ImageGray, ImageRgb};
use crate::error::{Error, Result};

/// Netpbm flavor to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmEncoding {
    /// P2 / P3
    Ascii,
    /// P5 / P6
    Binary,
}

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Decodes any supported file into RGB; grayscale inputs are replicated
/// across the three channels.
pub fn read_rgb(path: impl AsRef<Path>) -> Result<ImageRgb> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| image_err(path, e))?;
    let rgb = decoded.to_rgb8();
    ImageRgb::from_u8(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}

fn format_for(path: &Path) -> ImageFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("ppm") | Some("pgm") | Some("pnm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    }
}

fn write_raw(
    path: &Path,
    bytes: &[u8],
    width: usize,
    height: usize,
    color: ExtendedColorType,
    pnm: Option<PnmEncoding>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = BufWriter::new(file);
    let (w, h) = (width as u32, height as u32);
    let result = match (format_for(path), pnm) {
        (ImageFormat::Pnm, encoding) | (_, encoding @ Some(_)) => {
            let sample = match encoding.unwrap_or(PnmEncoding::Binary) {
                PnmEncoding::Ascii => SampleEncoding::Ascii,
                PnmEncoding::Binary => SampleEncoding::Binary,
            };
            let subtype = if color == ExtendedColorType::L8 {
                PnmSubtype::Graymap(sample)
            } else {
                PnmSubtype::Pixmap(sample)
            };
            PnmEncoder::new(writer)
                .with_subtype(subtype)
                .write_image(bytes, w, h, color)
        }
        _ => image::codecs::png::PngEncoder::new(writer).write_image(bytes, w, h, color),
    };
    result.map_err(|e| image_err(path, e))
}

/// Writes RGB as PNG, or binary PPM when the extension is `.ppm`/`.pnm`.
pub fn write_rgb(img: &ImageRgb, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_raw(
        path,
        &img.to_u8(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
        None,
    )
}

pub fn write_rgb_pnm(img: &ImageRgb, path: impl AsRef<Path>, encoding: PnmEncoding) -> Result<()> {
    write_raw(
        path.as_ref(),
        &img.to_u8(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
        Some(encoding),
    )
}

/// Writes samples quantized to 8 bits as-is.
pub fn write_gray(img: &ImageGray, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    write_raw(
        path.as_ref(),
        &bytes,
        img.width(),
        img.height(),
        ExtendedColorType::L8,
        None,
    )
}

pub fn write_gray_pnm(img: &ImageGray, path: impl AsRef<Path>, encoding: PnmEncoding) -> Result<()> {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    write_raw(
        path.as_ref(),
        &bytes,
        img.width(),
        img.height(),
        ExtendedColorType::L8,
        Some(encoding),
    )
}

/// Linearly stretches `[min, max]` onto `[0, 255]` before writing.
pub fn write_gray_normalized(img: &ImageGray, path: impl AsRef<Path>) -> Result<()> {
    let (lo, hi) = img.min_max();
    let span = hi - lo;
    let stretched = img.map(|v| if span > 0.0 { (v - lo) / span * 255.0 } else { 0.0 });
    write_gray(&stretched, path)
}

/// Writes a mask with values `{0, 255}`; PGM for `.pgm`, PNG otherwise.
pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    write_gray(&ImageGray::from_mask(mask), path)
}

/// Reads a mask written by [`write_mask`]: samples of 128 or more are set.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let rgb = read_rgb(path)?;
    Ok(BinaryMask::from_fn(rgb.width(), rgb.height(), |x, y| {
        rgb.get(x, y)[0] >= 128.0
    }))
}
