//! Histogram-of-oriented-gradients descriptors and the global descriptor
//! variance used to tell needle-textured crowns from smooth ones.
//!
//! Gradients use the centred `[-1, 0, 1]` kernel with replicated borders.
//! Orientations are unsigned (`[0°, 180°)`) and each pixel's magnitude is
//! split linearly between the two nearest bin centres. Blocks of
//! `block_size`×`block_size` cells are L2-normalized with a small stabilizer
//! and concatenated row-major.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::imgproc::ImageBuffer;
use crate::math;

/// Stabilizer added under the block norm.
pub const BLOCK_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HogParams {
    /// Cell side in pixels.
    pub cell_size: usize,
    /// Block side in cells.
    pub block_size: usize,
    /// Block step in cells.
    pub block_stride: usize,
    /// Orientation bins over `[0°, 180°)`.
    pub n_bins: usize,
    /// Side of the (square) window in pixels.
    pub window_size: usize,
}

impl HogParams {
    /// Top-layer parameters: 24 px window, 6 px cells, 3×3-cell blocks,
    /// stride 1, 9 bins.
    pub const fn top_layer() -> Self {
        Self {
            cell_size: 6,
            block_size: 3,
            block_stride: 1,
            n_bins: 9,
            window_size: 24,
        }
    }

    /// Bottom-layer parameters: same cell/block shape at the native 300 px.
    pub const fn bottom_layer() -> Self {
        Self {
            window_size: 300,
            ..Self::top_layer()
        }
    }

    pub fn with_window(self, window_size: usize) -> Self {
        Self {
            window_size,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_size == 0 || self.window_size == 0 {
            return Err(Error::InvalidInput(
                "cell and window sizes must be positive",
            ));
        }
        if !self.window_size.is_multiple_of(self.cell_size) {
            return Err(Error::InvalidInput(
                "window size must be a multiple of the cell size",
            ));
        }
        if self.block_size == 0 || self.block_size > self.cells_per_axis() {
            return Err(Error::InvalidInput("block larger than the cell grid"));
        }
        if self.block_stride == 0 {
            return Err(Error::InvalidInput("block stride must be at least 1"));
        }
        if self.n_bins < 2 {
            return Err(Error::InvalidInput("at least 2 orientation bins"));
        }
        Ok(())
    }

    pub fn cells_per_axis(&self) -> usize {
        self.window_size / self.cell_size
    }

    pub fn blocks_per_axis(&self) -> usize {
        (self.cells_per_axis() - self.block_size) / self.block_stride + 1
    }

    pub fn descriptor_len(&self) -> usize {
        let b = self.blocks_per_axis();
        b * b * self.block_size * self.block_size * self.n_bins
    }

    pub fn bin_width(&self) -> f64 {
        180.0 / self.n_bins as f64
    }

    /// Stable 64-bit FNV-1a hash of the parameter set. Models record it so a
    /// classifier is never applied to descriptors of a different shape.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in [
            self.cell_size,
            self.block_size,
            self.block_stride,
            self.n_bins,
            self.window_size,
        ] {
            for b in (v as u64).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Per-pixel gradients of a gray image. Orientation is in degrees, folded to
/// `[0, 180)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub orientation: Vec<f64>,
}

#[inline]
fn fold_orientation(gx: f64, gy: f64) -> f64 {
    let mut theta = math::atan2(gy, gx).to_degrees();
    if theta < 0.0 {
        theta += 180.0;
    }
    if theta >= 180.0 {
        theta -= 180.0;
    }
    theta
}

#[inline]
fn central_differences(data: &[u8], w: usize, h: usize, x: usize, y: usize) -> (f64, f64) {
    let xl = x.saturating_sub(1);
    let xr = (x + 1).min(w - 1);
    let yu = y.saturating_sub(1);
    let yd = (y + 1).min(h - 1);
    let gx = i32::from(data[y * w + xr]) - i32::from(data[y * w + xl]);
    let gy = i32::from(data[yd * w + x]) - i32::from(data[yu * w + x]);
    (f64::from(gx), f64::from(gy))
}

pub fn compute_gradients(gray: &ImageBuffer) -> Result<GradientField> {
    if gray.channels() != 1 {
        return Err(Error::InvalidInput("gradients need a single-channel image"));
    }
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidInput("gradients need at least a 3x3 image"));
    }
    let n = w * h;
    let mut field = GradientField {
        width: w,
        height: h,
        gx: Vec::with_capacity(n),
        gy: Vec::with_capacity(n),
        magnitude: Vec::with_capacity(n),
        orientation: Vec::with_capacity(n),
    };
    let data = gray.data();
    for y in 0..h {
        for x in 0..w {
            let (gx, gy) = central_differences(data, w, h, x, y);
            field.gx.push(gx);
            field.gy.push(gy);
            field.magnitude.push(math::sqrt(gx * gx + gy * gy));
            field.orientation.push(fold_orientation(gx, gy));
        }
    }
    Ok(field)
}

/// Orientation histograms for every cell, stored `[cy][cx][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub cells_x: usize,
    pub cells_y: usize,
    pub n_bins: usize,
    pub data: Vec<f64>,
}

impl CellGrid {
    pub fn zeros(cells_x: usize, cells_y: usize, n_bins: usize) -> Self {
        Self {
            cells_x,
            cells_y,
            n_bins,
            data: vec![0.0; cells_x * cells_y * n_bins],
        }
    }

    pub fn cell(&self, cx: usize, cy: usize) -> &[f64] {
        let i = (cy * self.cells_x + cx) * self.n_bins;
        &self.data[i..i + self.n_bins]
    }

    #[inline]
    fn cell_mut(&mut self, cx: usize, cy: usize) -> &mut [f64] {
        let i = (cy * self.cells_x + cx) * self.n_bins;
        &mut self.data[i..i + self.n_bins]
    }
}

/// Bins and shares of a vote: `magnitude` split between the two bin centres
/// nearest to `theta`.
#[inline]
fn split_vote(theta: f64, magnitude: f64, bin_width: f64, n: usize) -> (usize, usize, f64, f64) {
    let pos = theta / bin_width - 0.5;
    let lo = math::floor(pos);
    let frac = pos - lo;
    let lo_bin = if lo < 0.0 { n - 1 } else { (lo as usize) % n };
    (
        lo_bin,
        (lo_bin + 1) % n,
        magnitude * (1.0 - frac),
        magnitude * frac,
    )
}

#[inline]
fn vote(hist: &mut [f64], theta: f64, magnitude: f64, bin_width: f64) {
    let (lo, hi, a, b) = split_vote(theta, magnitude, bin_width, hist.len());
    hist[lo] += a;
    hist[hi] += b;
}

pub fn cell_histograms(field: &GradientField, params: &HogParams) -> Result<CellGrid> {
    params.validate()?;
    if field.width != params.window_size || field.height != params.window_size {
        return Err(Error::DimensionMismatch {
            expected: params.window_size,
            actual: field.width.max(field.height),
        });
    }
    let cells = params.cells_per_axis();
    let mut grid = CellGrid::zeros(cells, cells, params.n_bins);
    let bw = params.bin_width();
    for y in 0..field.height {
        for x in 0..field.width {
            let i = y * field.width + x;
            let m = field.magnitude[i];
            if m == 0.0 {
                continue;
            }
            let hist = grid.cell_mut(x / params.cell_size, y / params.cell_size);
            vote(hist, field.orientation[i], m, bw);
        }
    }
    Ok(grid)
}

/// Cell histograms straight from a gray window, without materializing the
/// gradient field.
pub fn cell_histograms_from_gray(gray: &ImageBuffer, params: &HogParams) -> Result<CellGrid> {
    params.validate()?;
    if gray.channels() != 1 {
        return Err(Error::InvalidInput("HOG needs a single-channel window"));
    }
    if gray.width() != params.window_size || gray.height() != params.window_size {
        return Err(Error::DimensionMismatch {
            expected: params.window_size,
            actual: gray.width().max(gray.height()),
        });
    }
    let side = params.window_size;
    if side < 3 {
        return Err(Error::InvalidInput("gradients need at least a 3x3 image"));
    }
    let cells = params.cells_per_axis();
    let mut grid = CellGrid::zeros(cells, cells, params.n_bins);
    let bw = params.bin_width();
    let data = gray.data();
    for y in 0..side {
        let cy = y / params.cell_size;
        for x in 0..side {
            let (gx, gy) = central_differences(data, side, side, x, y);
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            let m = math::sqrt(gx * gx + gy * gy);
            let hist = grid.cell_mut(x / params.cell_size, cy);
            vote(hist, fold_orientation(gx, gy), m, bw);
        }
    }
    Ok(grid)
}

/// Orientation votes of every pixel of a whole gray frame.
///
/// Windows cut from the frame share these votes. Only pixels on a window's
/// border see different neighbours (edge replication inside the window), so
/// [`cell_histograms_at`] recomputes those and reuses the rest, giving the
/// same cells as [`cell_histograms_from_gray`] on the cropped window.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteField {
    pub width: usize,
    pub height: usize,
    pub n_bins: usize,
    lo: Vec<u16>,
    share_lo: Vec<f64>,
    share_hi: Vec<f64>,
}

const NO_VOTE: u16 = u16::MAX;

pub fn vote_field(gray: &ImageBuffer, n_bins: usize) -> Result<VoteField> {
    if gray.channels() != 1 {
        return Err(Error::InvalidInput("votes need a single-channel image"));
    }
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidInput("gradients need at least a 3x3 image"));
    }
    if !(2..usize::from(NO_VOTE)).contains(&n_bins) {
        return Err(Error::InvalidInput("unsupported bin count"));
    }
    let bw = 180.0 / n_bins as f64;
    let n = w * h;
    let mut f = VoteField {
        width: w,
        height: h,
        n_bins,
        lo: Vec::with_capacity(n),
        share_lo: Vec::with_capacity(n),
        share_hi: Vec::with_capacity(n),
    };
    let data = gray.data();
    for y in 0..h {
        for x in 0..w {
            let (gx, gy) = central_differences(data, w, h, x, y);
            if gx == 0.0 && gy == 0.0 {
                f.lo.push(NO_VOTE);
                f.share_lo.push(0.0);
                f.share_hi.push(0.0);
                continue;
            }
            let (lo, _, a, b) = split_vote(
                fold_orientation(gx, gy),
                math::sqrt(gx * gx + gy * gy),
                bw,
                n_bins,
            );
            f.lo.push(lo as u16);
            f.share_lo.push(a);
            f.share_hi.push(b);
        }
    }
    Ok(f)
}

/// Cell histograms of the `params.window_size` window at `(x0, y0)` of the
/// frame behind `field`.
pub fn cell_histograms_at(
    field: &VoteField,
    gray: &ImageBuffer,
    x0: usize,
    y0: usize,
    params: &HogParams,
) -> Result<CellGrid> {
    params.validate()?;
    let side = params.window_size;
    if gray.channels() != 1 || gray.width() != field.width || gray.height() != field.height {
        return Err(Error::InvalidInput(
            "vote field does not belong to this image",
        ));
    }
    if field.n_bins != params.n_bins {
        return Err(Error::DimensionMismatch {
            expected: params.n_bins,
            actual: field.n_bins,
        });
    }
    if x0 + side > field.width || y0 + side > field.height || side < 3 {
        return Err(Error::InvalidInput("window exceeds the frame"));
    }
    let cells = params.cells_per_axis();
    let mut grid = CellGrid::zeros(cells, cells, params.n_bins);
    let bw = params.bin_width();
    let n = params.n_bins;
    let data = gray.data();
    let fw = field.width;
    for y in 0..side {
        let cy = y / params.cell_size;
        let edge_row = y == 0 || y == side - 1;
        let row = (y0 + y) * fw + x0;
        for x in 0..side {
            let hist = grid.cell_mut(x / params.cell_size, cy);
            if edge_row || x == 0 || x == side - 1 {
                // Replicate inside the window, as on a crop.
                let xl = x0 + x.saturating_sub(1);
                let xr = x0 + (x + 1).min(side - 1);
                let yu = y0 + y.saturating_sub(1);
                let yd = y0 + (y + 1).min(side - 1);
                let (xc, yc) = (x0 + x, y0 + y);
                let gx = f64::from(i32::from(data[yc * fw + xr]) - i32::from(data[yc * fw + xl]));
                let gy = f64::from(i32::from(data[yd * fw + xc]) - i32::from(data[yu * fw + xc]));
                if gx == 0.0 && gy == 0.0 {
                    continue;
                }
                vote(
                    hist,
                    fold_orientation(gx, gy),
                    math::sqrt(gx * gx + gy * gy),
                    bw,
                );
                continue;
            }
            let i = row + x;
            let lo = field.lo[i];
            if lo == NO_VOTE {
                continue;
            }
            let lo = usize::from(lo);
            hist[lo] += field.share_lo[i];
            hist[(lo + 1) % n] += field.share_hi[i];
        }
    }
    Ok(grid)
}

/// [`window_variance`] for a window of a frame with precomputed votes.
pub fn window_variance_at(
    field: &VoteField,
    gray: &ImageBuffer,
    x0: usize,
    y0: usize,
    params: &HogParams,
    source: VarianceSource,
) -> Result<f64> {
    let cells = cell_histograms_at(field, gray, x0, y0, params)?;
    match source {
        VarianceSource::Normalized => hog_variance(&block_normalize(&cells, params)?),
        VarianceSource::RawCells => variance_of(&cells.data),
    }
}

/// Flat descriptor together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HogDescriptor {
    pub values: Vec<f64>,
    pub params: HogParams,
}

impl HogDescriptor {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn block_normalize(cells: &CellGrid, params: &HogParams) -> Result<HogDescriptor> {
    params.validate()?;
    let b = params.block_size;
    if cells.n_bins != params.n_bins {
        return Err(Error::DimensionMismatch {
            expected: params.n_bins,
            actual: cells.n_bins,
        });
    }
    if b > cells.cells_x || b > cells.cells_y {
        return Err(Error::InvalidInput("block larger than the cell grid"));
    }
    let bx_count = (cells.cells_x - b) / params.block_stride + 1;
    let by_count = (cells.cells_y - b) / params.block_stride + 1;
    let block_len = b * b * params.n_bins;
    let nb = params.n_bins;
    let cell_sq: Vec<f64> = cells
        .data
        .chunks_exact(nb)
        .map(|c| c.iter().map(|v| v * v).sum())
        .collect();
    let mut values = Vec::with_capacity(bx_count * by_count * block_len);
    for by in 0..by_count {
        for bx in 0..bx_count {
            let (x0, y0) = (bx * params.block_stride, by * params.block_stride);
            let mut sq = 0.0;
            for cy in y0..y0 + b {
                for cx in x0..x0 + b {
                    sq += cell_sq[cy * cells.cells_x + cx];
                }
            }
            let inv = 1.0 / math::sqrt(sq + BLOCK_EPSILON * BLOCK_EPSILON);
            for cy in y0..y0 + b {
                let row = (cy * cells.cells_x + x0) * nb;
                values.extend(
                    cells.data[row..row + b * nb]
                        .iter()
                        .map(|v| (v * inv).clamp(0.0, 1.0)),
                );
            }
        }
    }
    Ok(HogDescriptor {
        values,
        params: *params,
    })
}

/// Full descriptor of a square gray window.
pub fn hog_descriptor(window: &ImageBuffer, params: &HogParams) -> Result<HogDescriptor> {
    let cells = cell_histograms_from_gray(window, params)?;
    block_normalize(&cells, params)
}

/// Population variance of a sequence: mean first, then mean squared
/// deviation, both taken relative to the first value (so a constant sequence
/// gives exactly zero).
pub fn variance_of(values: &[f64]) -> Result<f64> {
    let Some(&shift) = values.first() else {
        return Err(Error::InvalidInput("variance of an empty sequence"));
    };
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v - shift).sum::<f64>() / n;
    Ok(values
        .iter()
        .map(|v| (v - shift - mean) * (v - shift - mean))
        .sum::<f64>()
        / n)
}

/// Mean squared deviation of the descriptor values from their mean.
pub fn hog_variance(desc: &HogDescriptor) -> Result<f64> {
    variance_of(&desc.values)
}

/// Which values the bottom-layer variance is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceSource {
    /// The block-normalized descriptor.
    #[default]
    Normalized,
    /// The raw per-cell orientation histograms.
    RawCells,
}

/// Variance of the bottom-layer HOG of `window`.
pub fn window_variance(
    window: &ImageBuffer,
    params: &HogParams,
    source: VarianceSource,
) -> Result<f64> {
    let cells = cell_histograms_from_gray(window, params)?;
    match source {
        VarianceSource::Normalized => hog_variance(&block_normalize(&cells, params)?),
        VarianceSource::RawCells => variance_of(&cells.data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params24() -> HogParams {
        HogParams::top_layer()
    }

    #[test]
    fn default_layers_are_valid() {
        HogParams::top_layer().validate().unwrap();
        HogParams::bottom_layer().validate().unwrap();
        assert_eq!(HogParams::bottom_layer().cells_per_axis(), 50);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = params24();
        assert!(HogParams {
            window_size: 25,
            ..p
        }
        .validate()
        .is_err());
        assert!(HogParams { block_size: 5, ..p }.validate().is_err());
        assert!(HogParams {
            block_stride: 0,
            ..p
        }
        .validate()
        .is_err());
        assert!(HogParams { n_bins: 1, ..p }.validate().is_err());
    }

    #[test]
    fn constant_image_has_no_gradient() {
        let img = ImageBuffer::filled(8, 8, 1, 42).unwrap();
        let f = compute_gradients(&img).unwrap();
        assert!(f
            .gx
            .iter()
            .chain(&f.gy)
            .chain(&f.magnitude)
            .all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_gives_gx_two() {
        let img = ImageBuffer::from_gray_fn(6, 5, |x, _| x as u8).unwrap();
        let f = compute_gradients(&img).unwrap();
        for y in 1..4 {
            for x in 1..5 {
                let i = y * 6 + x;
                assert_eq!(f.gx[i], 2.0);
                assert_eq!(f.gy[i], 0.0);
                assert_eq!(f.magnitude[i], 2.0);
                assert_eq!(f.orientation[i], 0.0);
            }
        }
        // replicated border: I(1) - I(0) = 1
        assert_eq!(f.gx[0], 1.0);
    }

    #[test]
    fn three_four_five_gradient() {
        // Centre pixel sees I(2,1)-I(0,1) = 3 and I(1,2)-I(1,0) = 4.
        let rows = [[0u8, 0, 0], [0, 0, 3], [0, 4, 0]];
        let img = ImageBuffer::from_gray_fn(3, 3, |x, y| rows[y][x]).unwrap();
        let f = compute_gradients(&img).unwrap();
        assert_eq!(f.gx[4], 3.0);
        assert_eq!(f.gy[4], 4.0);
        assert_eq!(f.magnitude[4], 5.0);
        assert!((f.orientation[4] - 53.130_102_354_155_98).abs() < 1e-9);
    }

    #[test]
    fn gradients_need_3x3() {
        let img = ImageBuffer::filled(2, 5, 1, 0).unwrap();
        assert!(compute_gradients(&img).is_err());
    }

    fn single_pixel_field(theta: f64, m: f64) -> GradientField {
        let n = 24 * 24;
        let mut f = GradientField {
            width: 24,
            height: 24,
            gx: vec![0.0; n],
            gy: vec![0.0; n],
            magnitude: vec![0.0; n],
            orientation: vec![0.0; n],
        };
        f.magnitude[7 * 24 + 8] = m;
        f.orientation[7 * 24 + 8] = theta;
        f
    }

    #[test]
    fn vote_on_bin_centre_is_unsplit() {
        let grid = cell_histograms(&single_pixel_field(50.0, 3.0), &params24()).unwrap();
        let cell = grid.cell(1, 1);
        assert_eq!(cell[2], 3.0);
        assert_eq!(cell.iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn vote_midway_splits_evenly() {
        let grid = cell_histograms(&single_pixel_field(60.0, 4.0), &params24()).unwrap();
        let cell = grid.cell(1, 1);
        assert!((cell[2] - 2.0).abs() < 1e-12);
        assert!((cell[3] - 2.0).abs() < 1e-12);
        // Wrap-around between the last and the first bin.
        let grid = cell_histograms(&single_pixel_field(0.0, 4.0), &params24()).unwrap();
        let cell = grid.cell(1, 1);
        assert!((cell[0] - 2.0).abs() < 1e-12);
        assert!((cell[8] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_zero_histograms() {
        let grid = cell_histograms(&single_pixel_field(0.0, 0.0), &params24()).unwrap();
        assert!(grid.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cell_histograms_reject_wrong_size() {
        let img = ImageBuffer::filled(30, 30, 1, 0).unwrap();
        let f = compute_gradients(&img).unwrap();
        assert!(cell_histograms(&f, &params24()).is_err());
    }

    #[test]
    fn top_layer_descriptor_has_324_values() {
        assert_eq!(params24().descriptor_len(), 324);
        let img =
            ImageBuffer::from_gray_fn(24, 24, |x, y| ((x * 31 + y * 17) % 251) as u8).unwrap();
        let d = hog_descriptor(&img, &params24()).unwrap();
        assert_eq!(d.len(), 324);
        assert!(d.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn stride_two_shortens_descriptor() {
        let p = HogParams {
            block_stride: 2,
            ..params24()
        };
        // 4 cells, blocks of 3 at stride 2 -> 1 block per axis.
        assert_eq!(p.descriptor_len(), 81);
        let img = ImageBuffer::from_gray_fn(24, 24, |x, y| ((x * y) % 256) as u8).unwrap();
        assert_eq!(hog_descriptor(&img, &p).unwrap().len(), 81);
    }

    #[test]
    fn constant_window_zero_descriptor() {
        let img = ImageBuffer::filled(24, 24, 1, 200).unwrap();
        let d = hog_descriptor(&img, &params24()).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn block_too_large_for_grid() {
        let grid = CellGrid::zeros(2, 2, 9);
        assert!(block_normalize(&grid, &params24()).is_err());
    }

    #[test]
    fn variance_identities() {
        let p = params24();
        let d = HogDescriptor {
            values: vec![0.3; 10],
            params: p,
        };
        assert_eq!(hog_variance(&d).unwrap(), 0.0);
        let d = HogDescriptor {
            values: vec![0.0, 1.0],
            params: p,
        };
        assert_eq!(hog_variance(&d).unwrap(), 0.25);
        assert!(variance_of(&[]).is_err());
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let base = params24();
        let variants = [
            HogParams {
                cell_size: 4,
                ..base
            },
            HogParams {
                block_size: 2,
                ..base
            },
            HogParams {
                block_stride: 2,
                ..base
            },
            HogParams { n_bins: 8, ..base },
            HogParams {
                window_size: 48,
                ..base
            },
        ];
        for v in variants {
            assert_ne!(v.fingerprint(), base.fingerprint());
        }
        assert_eq!(base.fingerprint(), params24().fingerprint());
    }

    #[test]
    fn frame_votes_match_cropped_windows() {
        let mut state = 5u64;
        let frame = ImageBuffer::from_gray_fn(80, 70, |_, _| {
            state = crate::rng::splitmix64(state);
            (state % 256) as u8
        })
        .unwrap();
        let params = HogParams::top_layer().with_window(30);
        let field = vote_field(&frame, params.n_bins).unwrap();
        for (x0, y0) in [(0, 0), (50, 40), (17, 3), (49, 39), (10, 40)] {
            let crop = frame.crop(x0, y0, 30, 30).unwrap();
            let a = cell_histograms_from_gray(&crop, &params).unwrap();
            let b = cell_histograms_at(&field, &frame, x0, y0, &params).unwrap();
            assert_eq!(a, b, "window at ({x0}, {y0})");
        }
        assert!(cell_histograms_at(&field, &frame, 51, 0, &params).is_err());
    }
}
