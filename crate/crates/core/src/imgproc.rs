//! Rasters, colour conversion, resampling and hue/saturation histograms.
//!
//! All rasters are row-major with a top-left origin, x to the right and y
//! downward. Pixel values are 8-bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Owned 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be at least 1x1"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput("images have 1 or 3 channels"));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn from_gray_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data)
    }

    pub fn from_rgb_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Copies the `w`×`h` region whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidInput("crop region outside image"));
        }
        let row = w * self.channels;
        let mut data = Vec::with_capacity(row * h);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + row]);
        }
        Self::new(w, h, self.channels, data)
    }

    /// Extracts one channel as a gray image.
    pub fn channel(&self, c: usize) -> Result<Self> {
        if c >= self.channels {
            return Err(Error::InvalidInput("channel index out of range"));
        }
        let data = self
            .data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        Self::new(self.width, self.height, 1, data)
    }
}

/// Per-pixel hue (degrees, `[0, 360)`), saturation (`[0, 1]`) and value
/// (`[0, 255]`, equal to the channel maximum).
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    width: usize,
    height: usize,
    hue: Vec<f64>,
    saturation: Vec<f64>,
    value: Vec<u8>,
}

impl HsvImage {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn hue(&self) -> &[f64] {
        &self.hue
    }

    pub fn saturation(&self) -> &[f64] {
        &self.saturation
    }

    pub fn value(&self) -> &[u8] {
        &self.value
    }

    /// The value plane as a gray image; this is what HOG runs on.
    pub fn value_image(&self) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.value.clone(),
        }
    }
}

/// Converts one RGB pixel. Achromatic pixels get hue 0.
pub fn pixel_to_hsv(rgb: [u8; 3]) -> (f64, f64, u8) {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = f64::from(max - min);
    let sat = if max == 0 {
        0.0
    } else {
        delta / f64::from(max)
    };
    if max == min {
        return (0.0, sat, max);
    }
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        let h = (g - b) / delta;
        if h < 0.0 {
            h + 6.0
        } else {
            h
        }
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut hue = 60.0 * sector;
    if hue >= 360.0 {
        hue -= 360.0;
    }
    (hue, sat, max)
}

pub fn rgb_to_hsv(img: &ImageBuffer) -> Result<HsvImage> {
    if img.channels != 3 {
        return Err(Error::InvalidInput("rgb_to_hsv needs a 3-channel image"));
    }
    let n = img.width * img.height;
    let mut hue = Vec::with_capacity(n);
    let mut saturation = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    for px in img.data.chunks_exact(3) {
        let (h, s, v) = pixel_to_hsv([px[0], px[1], px[2]]);
        hue.push(h);
        saturation.push(s);
        value.push(v);
    }
    Ok(HsvImage {
        width: img.width,
        height: img.height,
        hue,
        saturation,
        value,
    })
}

/// Output-index → list of `(source index, weight)` for area averaging.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let lo = i as f64 * scale;
            let hi = lo + scale;
            let first = math::floor(lo) as usize;
            let mut taps = Vec::new();
            let mut j = first;
            while j < src && (j as f64) < hi {
                let overlap = (hi.min(j as f64 + 1.0) - lo.max(j as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((j, overlap / scale));
                }
                j += 1;
            }
            taps
        })
        .collect()
}

/// Area-averaging (box filter) resample of a square image to
/// `target`×`target`.
pub fn downsample(img: &ImageBuffer, target: usize) -> Result<ImageBuffer> {
    if target == 0 {
        return Err(Error::InvalidInput("downsample target must be positive"));
    }
    if img.width != img.height {
        return Err(Error::InvalidInput("downsample expects a square image"));
    }
    if target > img.width {
        return Err(Error::InvalidInput("downsample target larger than image"));
    }
    if target == img.width {
        return Ok(img.clone());
    }
    let ch = img.channels;
    let taps = box_weights(img.width, target);
    // Horizontal pass into f64 rows, then vertical pass.
    let mut horiz = vec![0.0f64; img.height * target * ch];
    for y in 0..img.height {
        let row = &img.data[y * img.width * ch..(y + 1) * img.width * ch];
        for (ox, t) in taps.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for &(sx, w) in t {
                    acc += w * f64::from(row[sx * ch + c]);
                }
                horiz[(y * target + ox) * ch + c] = acc;
            }
        }
    }
    let mut data = vec![0u8; target * target * ch];
    for (oy, t) in taps.iter().enumerate() {
        for ox in 0..target {
            for c in 0..ch {
                let mut acc = 0.0;
                for &(sy, w) in t {
                    acc += w * horiz[(sy * target + ox) * ch + c];
                }
                data[(oy * target + ox) * ch + c] = math::round(acc).clamp(0.0, 255.0) as u8;
            }
        }
    }
    ImageBuffer::new(target, target, ch, data)
}

/// Hue and saturation histograms with uniform bin edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HueSatHistogram {
    pub hue_bins: Vec<u32>,
    pub sat_bins: Vec<u32>,
    pub pixel_count: u32,
}

impl HueSatHistogram {
    pub fn empty(hue_bins: usize, sat_bins: usize) -> Self {
        Self {
            hue_bins: vec![0; hue_bins],
            sat_bins: vec![0; sat_bins],
            pixel_count: 0,
        }
    }

    pub fn hue_f64(&self) -> Vec<f64> {
        self.hue_bins.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn sat_f64(&self) -> Vec<f64> {
        self.sat_bins.iter().map(|&c| f64::from(c)).collect()
    }
}

#[inline]
pub fn hue_bin(hue: f64, bins: usize) -> usize {
    ((hue / 360.0 * bins as f64) as usize).min(bins - 1)
}

#[inline]
pub fn sat_bin(sat: f64, bins: usize) -> usize {
    ((sat * bins as f64) as usize).min(bins - 1)
}

pub fn hue_sat_histogram(
    img: &HsvImage,
    hue_bins: usize,
    sat_bins: usize,
) -> Result<HueSatHistogram> {
    if hue_bins < 2 || sat_bins < 2 {
        return Err(Error::InvalidInput("histograms need at least 2 bins"));
    }
    let mut hist = HueSatHistogram::empty(hue_bins, sat_bins);
    for (&h, &s) in img.hue.iter().zip(&img.saturation) {
        hist.hue_bins[hue_bin(h, hue_bins)] += 1;
        hist.sat_bins[sat_bin(s, sat_bins)] += 1;
    }
    hist.pixel_count = img.hue.len() as u32;
    Ok(hist)
}
