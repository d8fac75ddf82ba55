use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, ImageFormat};

use crate::TrackerError;

/// 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, TrackerError> {
        let want = width as usize * height as usize;
        if pixels.len() != want {
            return Err(TrackerError::BadBuffer { width, height, want, got: pixels.len() });
        }
        Ok(GrayFrame { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        GrayFrame { width, height, pixels: vec![value; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.pixels[(y * self.width + x) as usize] = v;
    }

    /// Reads a binary (P5) or ASCII (P2) PGM file.
    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self, TrackerError> {
        let mut reader = image::ImageReader::open(path)?;
        reader.set_format(ImageFormat::Pnm);
        match reader.decode()? {
            image::DynamicImage::ImageLuma8(g) => Ok(Self::from(g)),
            _ => Err(TrackerError::NotGray),
        }
    }

    /// Writes a binary P5 PGM file.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<(), TrackerError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let encoder = PnmEncoder::new(file).with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
        encoder.write_image(&self.pixels, self.width, self.height, ExtendedColorType::L8)?;
        Ok(())
    }
}

impl From<GrayImage> for GrayFrame {
    fn from(img: GrayImage) -> Self {
        let (width, height) = img.dimensions();
        GrayFrame { width, height, pixels: img.into_raw() }
    }
}

/// Binary foreground mask with the dimensions of the frame it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForegroundMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn empty(width: u32, height: u32) -> Self {
        ForegroundMask { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, TrackerError> {
        let want = width as usize * height as usize;
        if bits.len() != want {
            return Err(TrackerError::BadBuffer { width, height, want, got: bits.len() });
        }
        Ok(ForegroundMask { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// 0/255 rendering, handy for dumping masks as PGM.
    pub fn to_frame(&self) -> GrayFrame {
        GrayFrame {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}
