//! Single-transform affine augmentation of small grayscale images.
//!
//! Sixteen bins: four rotation quarters over `[-15°, 15°]`, then low/high
//! halves of horizontal and vertical scaling, shifting and shearing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major, values in `[0, 1]`.
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::contract(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn get(&self, x: isize, y: isize) -> f64 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0.0
        } else {
            self.pixels[y as usize * self.width + x as usize]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AugmentationKind {
    Rotation,
    HScale,
    VScale,
    HShift,
    VShift,
    HShear,
    VShear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRanges {
    /// Rotation spans `[-rotation_deg, rotation_deg]`.
    pub rotation_deg: f64,
    pub scale: (f64, f64),
    /// Shift spans `[-shift_px, shift_px]`.
    pub shift_px: f64,
    /// Shear spans `[-shear, shear]`.
    pub shear: f64,
}

impl Default for AugmentationRanges {
    fn default() -> Self {
        AugmentationRanges {
            rotation_deg: 15.0,
            scale: (0.85, 1.15),
            shift_px: 3.0,
            shear: 0.15,
        }
    }
}

impl AugmentationRanges {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rotation_deg > 0.0
            && self.scale.0 > 0.0
            && self.scale.0 < 1.0
            && self.scale.1 > 1.0
            && self.shift_px > 0.0
            && self.shear > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::contract(format!("invalid augmentation ranges {self:?}")))
        }
    }
}

/// One of the sixteen augmentation bins, indexed `0..16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugmentationBin(u8);

impl AugmentationBin {
    pub const COUNT: usize = 16;

    pub fn new(index: usize) -> Result<Self> {
        if index < Self::COUNT {
            Ok(AugmentationBin(index as u8))
        } else {
            Err(Error::contract(format!("augmentation bin {index} out of range")))
        }
    }

    pub fn all() -> impl Iterator<Item = AugmentationBin> {
        (0..Self::COUNT as u8).map(AugmentationBin)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn kind(self) -> AugmentationKind {
        match self.0 {
            0..=3 => AugmentationKind::Rotation,
            4 | 5 => AugmentationKind::HScale,
            6 | 7 => AugmentationKind::VScale,
            8 | 9 => AugmentationKind::HShift,
            10 | 11 => AugmentationKind::VShift,
            12 | 13 => AugmentationKind::HShear,
            _ => AugmentationKind::VShear,
        }
    }

    /// `(lo, hi, hi_closed)` for this bin's magnitude interval.
    pub fn interval(self, ranges: &AugmentationRanges) -> (f64, f64, bool) {
        let halves = |lo: f64, mid: f64, hi: f64, high: bool| {
            if high {
                (mid, hi, true)
            } else {
                (lo, mid, false)
            }
        };
        let high = self.0 >= 4 && self.0 % 2 == 1;
        match self.kind() {
            AugmentationKind::Rotation => {
                let r = ranges.rotation_deg;
                let q = self.0 as f64;
                let lo = -r + q * r / 2.0;
                let hi = if self.0 == 3 { r } else { -r + (q + 1.0) * r / 2.0 };
                (lo, hi, self.0 == 3)
            }
            AugmentationKind::HScale | AugmentationKind::VScale => {
                halves(ranges.scale.0, 1.0, ranges.scale.1, high)
            }
            AugmentationKind::HShift | AugmentationKind::VShift => {
                halves(-ranges.shift_px, 0.0, ranges.shift_px, high)
            }
            AugmentationKind::HShear | AugmentationKind::VShear => {
                halves(-ranges.shear, 0.0, ranges.shear, high)
            }
        }
    }

    pub fn contains(self, ranges: &AugmentationRanges, magnitude: f64) -> bool {
        let (lo, hi, closed) = self.interval(ranges);
        magnitude >= lo && (magnitude < hi || (closed && magnitude <= hi))
    }

    /// Maps `t ∈ [0, 1]` linearly onto the bin's interval, staying inside
    /// half-open intervals.
    pub fn magnitude_at(self, ranges: &AugmentationRanges, t: f64) -> f64 {
        let (lo, hi, closed) = self.interval(ranges);
        let m = lo + (hi - lo) * t.clamp(0.0, 1.0);
        if !closed && m >= hi {
            hi.next_down()
        } else {
            m
        }
    }
}

/// Applies the bin's transform at `magnitude` about the image center with
/// bilinear interpolation and zero fill.
pub fn affine_augment(
    image: &Image,
    bin: AugmentationBin,
    magnitude: f64,
    ranges: &AugmentationRanges,
) -> Result<Image> {
    if !bin.contains(ranges, magnitude) {
        let (lo, hi, _) = bin.interval(ranges);
        return Err(Error::contract(format!(
            "magnitude {magnitude} outside bin {} interval [{lo}, {hi}]",
            bin.index()
        )));
    }
    // forward map p' = A (p - c) + c + t
    let (a, t) = match bin.kind() {
        AugmentationKind::Rotation => {
            let (s, c) = magnitude.to_radians().sin_cos();
            ([[c, -s], [s, c]], [0.0, 0.0])
        }
        AugmentationKind::HScale => ([[magnitude, 0.0], [0.0, 1.0]], [0.0, 0.0]),
        AugmentationKind::VScale => ([[1.0, 0.0], [0.0, magnitude]], [0.0, 0.0]),
        AugmentationKind::HShift => ([[1.0, 0.0], [0.0, 1.0]], [magnitude, 0.0]),
        AugmentationKind::VShift => ([[1.0, 0.0], [0.0, 1.0]], [0.0, magnitude]),
        AugmentationKind::HShear => ([[1.0, magnitude], [0.0, 1.0]], [0.0, 0.0]),
        AugmentationKind::VShear => ([[1.0, 0.0], [magnitude, 1.0]], [0.0, 0.0]),
    };
    Ok(warp(image, a, t))
}

fn warp(image: &Image, a: [[f64; 2]; 2], t: [f64; 2]) -> Image {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let cx = (image.width as f64 - 1.0) / 2.0;
    let cy = (image.height as f64 - 1.0) / 2.0;
    let mut out = Image::zeros(image.width, image.height);
    for y in 0..image.height {
        for x in 0..image.width {
            let dx = x as f64 - cx - t[0];
            let dy = y as f64 - cy - t[1];
            let sx = inv[0][0] * dx + inv[0][1] * dy + cx;
            let sy = inv[1][0] * dx + inv[1][1] * dy + cy;
            out.pixels[y * image.width + x] = bilinear(image, sx, sy).clamp(0.0, 1.0);
        }
    }
    out
}

fn bilinear(image: &Image, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (xi, yi) = (x0 as isize, y0 as isize);
    let mut v = (1.0 - fx) * (1.0 - fy) * image.get(xi, yi);
    if fx > 0.0 {
        v += fx * (1.0 - fy) * image.get(xi + 1, yi);
    }
    if fy > 0.0 {
        v += (1.0 - fx) * fy * image.get(xi, yi + 1);
    }
    if fx > 0.0 && fy > 0.0 {
        v += fx * fy * image.get(xi + 1, yi + 1);
    }
    v
}
