//! Naive per-pixel HOG reference, written without reusing any library code.

#![allow(dead_code)]

/// Descriptor of a square gray window given as row-major bytes.
pub fn naive_hog(
    pixels: &[u8],
    side: usize,
    cell: usize,
    block: usize,
    stride: usize,
    bins: usize,
) -> Vec<f64> {
    let at = |x: isize, y: isize| -> f64 {
        let cx = x.clamp(0, side as isize - 1) as usize;
        let cy = y.clamp(0, side as isize - 1) as usize;
        f64::from(pixels[cy * side + cx])
    };
    let cells = side / cell;
    let width = 180.0 / bins as f64;
    let mut hist = vec![vec![vec![0.0f64; bins]; cells]; cells];
    for y in 0..side {
        for x in 0..side {
            let (xi, yi) = (x as isize, y as isize);
            let gx = at(xi + 1, yi) - at(xi - 1, yi);
            let gy = at(xi, yi + 1) - at(xi, yi - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            let mut theta = gy.atan2(gx).to_degrees();
            while theta < 0.0 {
                theta += 180.0;
            }
            while theta >= 180.0 {
                theta -= 180.0;
            }
            for (b, slot) in hist[y / cell][x / cell].iter_mut().enumerate() {
                let centre = (b as f64 + 0.5) * width;
                let d = (theta - centre).abs();
                let d = d.min(180.0 - d);
                if d < width {
                    *slot += mag * (1.0 - d / width);
                }
            }
        }
    }
    let blocks = (cells - block) / stride + 1;
    let mut out = Vec::new();
    for by in 0..blocks {
        for bx in 0..blocks {
            let mut gathered = Vec::new();
            for cy in by * stride..by * stride + block {
                for cx in bx * stride..bx * stride + block {
                    gathered.extend_from_slice(&hist[cy][cx]);
                }
            }
            let norm = (gathered.iter().map(|v| v * v).sum::<f64>() + 1e-12).sqrt();
            out.extend(gathered.iter().map(|v| (v / norm).clamp(0.0, 1.0)));
        }
    }
    out
}

/// Mean first, then mean squared deviation.
pub fn two_pass_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Pearson coefficient from the covariance/standard-deviation definition.
pub fn textbook_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / n;
    let sa = (a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n).sqrt();
    let sb = (b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n).sqrt();
    cov / (sa * sb)
}
