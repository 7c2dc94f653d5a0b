//! Grayscale images with real pixel values, nominally in [0, 1].

use std::io::{BufRead, BufReader, Cursor, Read, Seek, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, GrayImage, ImageFormat, ImageReader};

use crate::error::{DenoiseError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    /// Row-major.
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(DenoiseError::InvalidImage(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(DenoiseError::InvalidImage(format!("{} pixels for a {width}x{height} image", pixels.len())));
        }
        if let Some(bad) = pixels.iter().find(|p| !p.is_finite()) {
            return Err(DenoiseError::InvalidImage(format!("non-finite pixel {bad}")));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let pixels = (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        Self::new(width, height, pixels)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.pixels.iter().map(|&p| f(p)).collect())
    }

    /// 8-bit quantization with clamping to [0, 1].
    pub fn to_gray8(&self) -> GrayImage {
        let bytes = self.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        GrayImage::from_raw(self.width as u32, self.height as u32, bytes).expect("buffer size matches")
    }

    pub fn from_gray8(img: &GrayImage) -> Result<Self> {
        let pixels = img.as_raw().iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::new(img.width() as usize, img.height() as usize, pixels)
    }

    /// Reads a binary (P5) or ASCII (P2) PGM.
    pub fn read_pgm<R: Read>(reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(reader).read_to_end(&mut bytes)?;
        let decoded = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Pnm).decode()?;
        Self::from_dynamic(decoded)
    }

    /// Writes an 8-bit binary (P5) PGM.
    pub fn write_pgm<W: Write>(&self, writer: W) -> Result<()> {
        let gray = self.to_gray8();
        PnmEncoder::new(writer).with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary)).encode(
            gray.as_raw().as_slice(),
            gray.width(),
            gray.height(),
            image::ExtendedColorType::L8,
        )?;
        Ok(())
    }

    pub fn read_png<R: BufRead + Seek>(reader: R) -> Result<Self> {
        let decoded = ImageReader::with_format(reader, ImageFormat::Png).decode()?;
        Self::from_dynamic(decoded)
    }

    pub fn write_png<W: Write + Seek>(&self, mut writer: W) -> Result<()> {
        self.to_gray8().write_to(&mut writer, ImageFormat::Png)?;
        Ok(())
    }

    /// Reads a PGM or PNG, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        match extension(path).as_deref() {
            Some("png") => Self::read_png(BufReader::new(file)),
            Some("pgm") | Some("pnm") => Self::read_pgm(file),
            other => Err(DenoiseError::UnsupportedFormat(other.unwrap_or("").to_string())),
        }
    }

    /// Writes a PGM or PNG, chosen by extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        match extension(path).as_deref() {
            Some("png") => self.write_png(std::io::BufWriter::new(file)),
            Some("pgm") | Some("pnm") => self.write_pgm(std::io::BufWriter::new(file)),
            other => Err(DenoiseError::UnsupportedFormat(other.unwrap_or("").to_string())),
        }
    }

    fn from_dynamic(img: DynamicImage) -> Result<Self> {
        Self::from_gray8(&img.into_luma8())
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Image::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::new(0, 2, vec![]).is_err());
        assert!(Image::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn pgm_round_trip_of_8bit_values() {
        let img = Image::from_fn(5, 3, |r, c| ((r * 5 + c) * 17 % 256) as f64 / 255.0).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5"));
        assert_eq!(Image::read_pgm(buf.as_slice()).unwrap(), img);
    }

    #[test]
    fn png_round_trip_of_8bit_values() {
        let img = Image::from_fn(4, 6, |r, c| ((r * 31 + c * 7) % 256) as f64 / 255.0).unwrap();
        let mut buf = Cursor::new(Vec::new());
        img.write_png(&mut buf).unwrap();
        buf.set_position(0);
        assert_eq!(Image::read_png(buf).unwrap(), img);
    }

    #[test]
    fn ascii_pgm_is_accepted() {
        let img = Image::read_pgm(&b"P2\n2 1\n255\n0 255\n"[..]).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn write_out_clamps() {
        let img = Image::new(2, 1, vec![-0.2, 1.3]).unwrap();
        assert_eq!(img.to_gray8().as_raw(), &vec![0, 255]);
    }
}
