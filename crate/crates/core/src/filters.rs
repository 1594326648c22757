//! 3x3 convolution, Laplacian sharpening, Sobel magnitude and edge
//! thresholding.
//!
//! Every pass drops the one-pixel border: an input of `w x h` yields
//! `(w - 2) x (h - 2)`, and output `(x, y)` is centred on input
//! `(x + 1, y + 1)`. Kernels are applied as written (cross-correlation), with
//! kernel rows running along image rows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{GrayImage, PixelCoord};

/// Integer 3x3 kernel, `weights[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel3x3 {
    pub weights: [[i32; 3]; 3],
}

impl Kernel3x3 {
    pub const fn new(weights: [[i32; 3]; 3]) -> Self {
        Kernel3x3 { weights }
    }

    pub const IDENTITY: Kernel3x3 = Kernel3x3::new([[0, 0, 0], [0, 1, 0], [0, 0, 0]]);

    /// Laplacian sharpening kernel.
    pub const SHARPEN: Kernel3x3 = Kernel3x3::new([[0, -1, 0], [-1, 5, -1], [0, -1, 0]]);

    pub const SOBEL_X: Kernel3x3 = Kernel3x3::new([[1, 0, -1], [2, 0, -2], [1, 0, -1]]);

    pub const SOBEL_Y: Kernel3x3 = Kernel3x3::new([[1, 2, 1], [0, 0, 0], [-1, -2, -1]]);

    pub fn transpose(&self) -> Kernel3x3 {
        let w = &self.weights;
        Kernel3x3::new([
            [w[0][0], w[1][0], w[2][0]],
            [w[0][1], w[1][1], w[2][1]],
            [w[0][2], w[1][2], w[2][2]],
        ])
    }
}

/// Unclamped convolution output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGrid {
    pub width: u32,
    pub height: u32,
    pub values: Vec<i32>,
    pub origin: (u32, u32),
}

impl SignedGrid {
    pub fn get(&self, x: u32, y: u32) -> i32 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn clamp_to_gray(&self) -> GrayImage {
        let values = self.values.iter().map(|&v| v.clamp(0, 255) as u8).collect();
        GrayImage::new(self.width, self.height, values)
            .expect("grid dimensions are non-zero")
            .with_origin(self.origin)
    }
}

fn check_convolvable(img: &GrayImage) -> Result<()> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: 3,
        });
    }
    Ok(())
}

pub fn convolve3x3(img: &GrayImage, k: &Kernel3x3) -> Result<SignedGrid> {
    check_convolvable(img)?;
    let in_w = img.width() as usize;
    let (out_w, out_h) = (img.width() - 2, img.height() - 2);
    let src = img.values();
    let mut values = vec![0i32; out_w as usize * out_h as usize];
    values
        .par_chunks_mut(out_w as usize)
        .enumerate()
        .for_each(|(y, row)| {
            let rows = [
                &src[y * in_w..(y + 1) * in_w],
                &src[(y + 1) * in_w..(y + 2) * in_w],
                &src[(y + 2) * in_w..(y + 3) * in_w],
            ];
            for (x, out) in row.iter_mut().enumerate() {
                let mut acc = 0i32;
                for (kr, r) in k.weights.iter().zip(rows) {
                    acc += kr[0] * i32::from(r[x]) + kr[1] * i32::from(r[x + 1]) + kr[2] * i32::from(r[x + 2]);
                }
                *out = acc;
            }
        });
    let (ox, oy) = img.origin();
    Ok(SignedGrid {
        width: out_w,
        height: out_h,
        values,
        origin: (ox + 1, oy + 1),
    })
}

pub fn convolve3x3_clamped(img: &GrayImage, k: &Kernel3x3) -> Result<GrayImage> {
    Ok(convolve3x3(img, k)?.clamp_to_gray())
}

/// Laplacian sharpening, clamped back into `[0, 255]`.
pub fn sharpen(img: &GrayImage) -> Result<GrayImage> {
    convolve3x3_clamped(img, &Kernel3x3::SHARPEN)
}

/// Sobel gradient magnitudes and where they sit in the original image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: u32,
    pub height: u32,
    pub magnitudes: Vec<u8>,
    /// Added to an edge-map coordinate to get the original-image coordinate.
    pub offset: (u32, u32),
}

impl EdgeMap {
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.magnitudes[y as usize * self.width as usize + x as usize]
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.magnitudes.clone())
            .expect("edge map dimensions are non-zero")
            .with_origin(self.offset)
    }
}

/// `round(sqrt(n))` computed exactly. Never a tie since `(r + 1/2)^2` is not
/// an integer.
pub(crate) fn round_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    if n - r * r > r {
        r + 1
    } else {
        r
    }
}

pub fn sobel(img: &GrayImage) -> Result<EdgeMap> {
    let gx = convolve3x3(img, &Kernel3x3::SOBEL_X)?;
    let gy = convolve3x3(img, &Kernel3x3::SOBEL_Y)?;
    Ok(magnitude(&gx, &gy))
}

/// Per-pixel `round(sqrt(gx^2 + gy^2))`, saturated at 255.
pub fn magnitude(gx: &SignedGrid, gy: &SignedGrid) -> EdgeMap {
    debug_assert_eq!((gx.width, gx.height, gx.origin), (gy.width, gy.height, gy.origin));
    let magnitudes = gx
        .values
        .par_iter()
        .zip(&gy.values)
        .map(|(&a, &b)| {
            let (a, b) = (i64::from(a), i64::from(b));
            round_sqrt((a * a + b * b) as u64).min(255) as u8
        })
        .collect();
    EdgeMap {
        width: gx.width,
        height: gx.height,
        magnitudes,
        offset: gx.origin,
    }
}

/// The edge pixel set: every pixel whose magnitude reaches the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdedPixels {
    /// Original-image coordinates in raster order.
    pub coords: Vec<PixelCoord>,
    pub threshold_used: u8,
}

impl ThresholdedPixels {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Keeps pixels with magnitude `>= t`, translated into original-image space.
pub fn threshold_pixels(edges: &EdgeMap, t: u32) -> Result<ThresholdedPixels> {
    let t = u8::try_from(t)
        .map_err(|_| Error::Parameter(format!("threshold {t} outside 0..=255")))?;
    let (dx, dy) = edges.offset;
    let w = edges.width as usize;
    let coords = edges
        .magnitudes
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m >= t)
        .map(|(i, _)| PixelCoord::new((i % w) as u32 + dx, (i / w) as u32 + dy))
        .collect();
    Ok(ThresholdedPixels {
        coords,
        threshold_used: t,
    })
}
