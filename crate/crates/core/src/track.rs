//! Constant-velocity Kalman filter over a tree's image coordinates.
//!
//! State is `(px, py, vx, vy)` in pixels and pixels per second. The
//! measurement is the detected crown centre, `H = [I 0]`.

use crate::error::{Error, Result};
use crate::math;

pub type Mat4 = [[f64; 4]; 4];
pub type Mat2 = [[f64; 2]; 2];

/// Noise settings. Defaults were tuned on the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig {
    /// Prior position standard deviation (px).
    pub sigma_p: f64,
    /// Prior velocity standard deviation (px/s).
    pub sigma_v: f64,
    /// Measurement covariance (px²).
    pub r: Mat2,
    /// White-acceleration intensity (px/s²).
    pub sigma_a: f64,
    /// Seconds without an update after which the track is dropped.
    pub max_coast: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            sigma_p: 10.0,
            sigma_v: 50.0,
            r: [[4.0, 0.0], [0.0, 4.0]],
            sigma_a: 30.0,
            max_coast: 1.0,
        }
    }
}

impl TrackConfig {
    /// Process noise density: `diag(0, 0, σ_a², σ_a²)`, scaled by `dt` in
    /// [`kf_predict`].
    pub fn process_noise(&self) -> Mat4 {
        let a = self.sigma_a * self.sigma_a;
        let mut q = [[0.0; 4]; 4];
        q[2][2] = a;
        q[3][3] = a;
        q
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.sigma_p) || !ok(self.sigma_v) || !ok(self.max_coast) {
            return Err(Error::InvalidInput(
                "prior deviations and max_coast must be positive",
            ));
        }
        if !(self.sigma_a.is_finite() && self.sigma_a >= 0.0) {
            return Err(Error::InvalidInput("sigma_a must be non-negative"));
        }
        let [[a, b], [c, d]] = self.r;
        if !(a > 0.0 && d > 0.0 && b == c && a * d - b * c > 0.0) {
            return Err(Error::InvalidInput(
                "measurement covariance must be symmetric positive-definite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub mean: [f64; 4],
    pub cov: Mat4,
    /// Seconds since the last measurement update.
    pub age: f64,
    pub r: Mat2,
    pub q: Mat4,
}

impl TrackState {
    pub fn position(&self) -> [f64; 2] {
        [self.mean[0], self.mean[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mean[2], self.mean[3]]
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.cov[i][i]).sum()
    }
}

fn finite2(p: [f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

pub fn kf_init(p0: [f64; 2], cfg: &TrackConfig) -> Result<TrackState> {
    if !finite2(p0) {
        return Err(Error::InvalidInput("initial position must be finite"));
    }
    let (p, v) = (cfg.sigma_p * cfg.sigma_p, cfg.sigma_v * cfg.sigma_v);
    let mut cov = [[0.0; 4]; 4];
    cov[0][0] = p;
    cov[1][1] = p;
    cov[2][2] = v;
    cov[3][3] = v;
    Ok(TrackState {
        mean: [p0[0], p0[1], 0.0, 0.0],
        cov,
        age: 0.0,
        r: cfg.r,
        q: cfg.process_noise(),
    })
}

pub fn kf_predict(s: &TrackState, dt: f64) -> Result<TrackState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput("dt must be positive"));
    }
    let mut out = *s;
    out.mean[0] += dt * s.mean[2];
    out.mean[1] += dt * s.mean[3];
    let f = transition(dt);
    let fp = mul(&f, &s.cov);
    let mut cov = mul(&fp, &transpose(&f));
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c += s.q[i][j] * dt;
        }
    }
    out.cov = symmetrize(&cov);
    out.age = s.age + dt;
    Ok(out)
}

/// Innovation `z − H·mean` and its covariance `H·P·Hᵀ + R`.
pub fn innovation(s: &TrackState, z: [f64; 2]) -> ([f64; 2], Mat2) {
    let nu = [z[0] - s.mean[0], z[1] - s.mean[1]];
    let cov = [
        [s.cov[0][0] + s.r[0][0], s.cov[0][1] + s.r[0][1]],
        [s.cov[1][0] + s.r[1][0], s.cov[1][1] + s.r[1][1]],
    ];
    (nu, cov)
}

fn inv2(m: &Mat2) -> Result<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::Degenerate("singular innovation covariance"));
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Normalized innovation squared `νᵀ S⁻¹ ν`.
pub fn nis(s: &TrackState, z: [f64; 2]) -> Result<f64> {
    let (nu, cov) = innovation(s, z);
    let si = inv2(&cov)?;
    Ok(nu[0] * (si[0][0] * nu[0] + si[0][1] * nu[1])
        + nu[1] * (si[1][0] * nu[0] + si[1][1] * nu[1]))
}

pub fn kf_update(s: &TrackState, z: [f64; 2]) -> Result<TrackState> {
    if !finite2(z) {
        return Err(Error::InvalidInput("measurement must be finite"));
    }
    let (nu, sc) = innovation(s, z);
    let si = inv2(&sc)?;
    // K = P Hᵀ S⁻¹, 4×2.
    let mut k = [[0.0; 2]; 4];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, kij) in row.iter_mut().enumerate() {
            *kij = s.cov[i][0] * si[0][j] + s.cov[i][1] * si[1][j];
        }
    }
    let mut out = *s;
    for i in 0..4 {
        out.mean[i] += k[i][0] * nu[0] + k[i][1] * nu[1];
    }
    // Joseph form: (I − KH) P (I − KH)ᵀ + K R Kᵀ.
    let mut a = identity();
    for (i, row) in a.iter_mut().enumerate() {
        row[0] -= k[i][0];
        row[1] -= k[i][1];
    }
    let mut cov = mul(&mul(&a, &s.cov), &transpose(&a));
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            let kr = [
                k[i][0] * s.r[0][0] + k[i][1] * s.r[1][0],
                k[i][0] * s.r[0][1] + k[i][1] * s.r[1][1],
            ];
            *c += kr[0] * k[j][0] + kr[1] * k[j][1];
        }
    }
    out.cov = symmetrize(&cov);
    out.age = 0.0;
    Ok(out)
}

pub fn transition(dt: f64) -> Mat4 {
    let mut f = identity();
    f[0][2] = dt;
    f[1][3] = dt;
    f
}

pub fn identity() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = a[j][i];
        }
    }
    m
}

fn symmetrize(a: &Mat4) -> Mat4 {
    let mut m = *a;
    for i in 0..4 {
        for j in i + 1..4 {
            let v = 0.5 * (a[i][j] + a[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Largest `|a_ij − a_ji|`.
pub fn asymmetry(a: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

/// Cholesky succeeds with strictly positive pivots.
pub fn is_positive_definite(a: &Mat4) -> bool {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return false;
                }
                l[i][i] = math::sqrt(d);
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}
