//! Pixel grids, PNG/JPEG codec glue and grayscale conversion.
//!
//! Coordinates are `(x, y)` with `x` the 0-based column (growing rightward)
//! and `y` the 0-based row (growing downward). Grids are stored row-major.

use std::cmp::Ordering;
use std::io::Cursor;

use image::{DynamicImage, ImageEncoder, ImageReader};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest image the pipeline accepts: two 3x3 passes must leave at least
/// one pixel.
pub const MIN_PIPELINE_SIDE: u32 = 5;

pub type Rgb = [u8; 3];

/// A pixel location. Ordered by `(y, x)`, i.e. raster scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: u32,
    pub y: u32,
}

impl PixelCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        PixelCoord { x, y }
    }
}

impl Ord for PixelCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for PixelCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An opaque 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "image dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Parameter(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width as usize * height as usize,
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Builds an image from packed `RGBRGB...` bytes.
    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width as usize * height as usize * 3 {
            return Err(Error::Parameter(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width as usize * height as usize * 3,
                bytes.len()
            )));
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// # Panics
    /// If `p` is out of bounds.
    pub fn get(&self, p: PixelCoord) -> Rgb {
        assert!(self.contains(p), "pixel {p:?} outside {}x{}", self.width, self.height);
        self.pixels[p.y as usize * self.width as usize + p.x as usize]
    }

    pub fn set(&mut self, p: PixelCoord, color: Rgb) {
        assert!(self.contains(p), "pixel {p:?} outside {}x{}", self.width, self.height);
        self.pixels[p.y as usize * self.width as usize + p.x as usize] = color;
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    pub(crate) fn require_pipeline_size(&self) -> Result<()> {
        if self.width < MIN_PIPELINE_SIDE || self.height < MIN_PIPELINE_SIDE {
            return Err(Error::ImageTooSmall {
                width: self.width,
                height: self.height,
                min: MIN_PIPELINE_SIDE,
            });
        }
        Ok(())
    }
}

/// A single-channel 8-bit image.
///
/// `origin` is where this grid's `(0, 0)` sits in the original image. Each
/// boundary-dropping 3x3 pass moves it by `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    values: Vec<u8>,
    origin: (u32, u32),
}

impl GrayImage {
    pub fn new(width: u32, height: u32, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "image dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if values.len() != width as usize * height as usize {
            return Err(Error::Parameter(format!(
                "{width}x{height} gray image needs {} values, got {}",
                width as usize * height as usize,
                values.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            values,
            origin: (0, 0),
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut values = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn with_origin(mut self, origin: (u32, u32)) -> Self {
        self.origin = origin;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn origin(&self) -> (u32, u32) {
        self.origin
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Replicates the channel into an RGB image, for stage dumps.
    pub fn to_raster(&self) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            pixels: self.values.iter().map(|&v| [v, v, v]).collect(),
        }
    }
}

/// Decodes a PNG or JPEG stream. Alpha is composited over white.
///
/// No minimum size is enforced here; the pipeline applies its own gate.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty input".into()));
    }
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Jpeg) => {}
        Some(other) => {
            return Err(Error::Decode(format!("unsupported format {other:?}")));
        }
        None => return Err(Error::Decode("unrecognized image signature".into())),
    }
    let decoded = reader.decode().map_err(|e| Error::Decode(e.to_string()))?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<RasterImage> {
    let (width, height) = (img.width(), img.height());
    let pixels = if img.color().has_alpha() {
        img.to_rgba8()
            .pixels()
            .map(|p| {
                let a = u32::from(p.0[3]);
                let over_white = |c: u8| ((u32::from(c) * a + 255 * (255 - a) + 127) / 255) as u8;
                [over_white(p.0[0]), over_white(p.0[1]), over_white(p.0[2])]
            })
            .collect()
    } else {
        img.to_rgb8().pixels().map(|p| p.0).collect()
    };
    RasterImage::new(width, height, pixels)
}

/// Encodes as an 8-bit RGB PNG.
pub fn encode_image(img: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            &img.to_rgb_bytes(),
            img.width,
            img.height,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

/// Luma with weights 0.299/0.587/0.114, rounded half away from zero.
///
/// Evaluated in integer thousandths so that ties round identically on every
/// platform.
#[inline]
pub fn luma(rgb: Rgb) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

pub fn to_grayscale(img: &RasterImage) -> GrayImage {
    let width = img.width as usize;
    let mut values = vec![0u8; img.pixels.len()];
    values
        .par_chunks_mut(width)
        .zip(img.pixels.par_chunks(width))
        .for_each(|(out, row)| {
            for (o, &px) in out.iter_mut().zip(row) {
                *o = luma(px);
            }
        });
    GrayImage {
        width: img.width,
        height: img.height,
        values,
        origin: (0, 0),
    }
}
