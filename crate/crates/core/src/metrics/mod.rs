//! Viewpoint error metrics and the paired t-test used for seed comparisons.

mod stats;

pub use stats::{mean, paired_t_test, regularized_incomplete_beta, sample_std, student_t_cdf, TTest};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default accuracy threshold: π/6 in degrees.
pub const DEFAULT_THRESHOLD_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix([[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Accepts `m` if `mᵀm = I` and `det m = 1` within `tol`.
    pub fn new(m: [[f64; 3]; 3], tol: f64) -> Result<Self> {
        let r = RotationMatrix(m);
        let ortho = r.orthonormality_error();
        let det = r.determinant();
        if ortho > tol || (det - 1.0).abs() > tol {
            return Err(Error::contract(format!(
                "not a rotation: |RᵀR − I| = {ortho:e}, det = {det}"
            )));
        }
        Ok(r)
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn about_z(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        RotationMatrix([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_x(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn mul(&self, other: &RotationMatrix) -> RotationMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        RotationMatrix(out)
    }

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry of `|RᵀR − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.transpose().mul(self);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.0[i][j] - target).abs());
            }
        }
        worst
    }
}

/// `R = R_z(in_plane) · R_x(elevation) · R_z(azimuth)`, angles in degrees.
pub fn rotation_from_angles(azimuth: f64, elevation: f64, in_plane: f64) -> RotationMatrix {
    RotationMatrix::about_z(in_plane)
        .mul(&RotationMatrix::about_x(elevation))
        .mul(&RotationMatrix::about_z(azimuth))
}

/// Angle of the relative rotation `Q = RᵀR′` in degrees.
///
/// `cos ρ = (tr Q − 1) / 2` and `sin ρ = ‖vee(Q − Qᵀ)‖ / 2`; combining both
/// through `atan2` keeps full precision near 0° and 180°, where `arccos`
/// alone loses half the significant digits.
pub fn geodesic_distance(r: &RotationMatrix, r_prime: &RotationMatrix) -> Result<f64> {
    for m in [r, r_prime] {
        RotationMatrix::new(m.0, 1e-6)?;
    }
    let q = r.transpose().mul(r_prime).0;
    let cos = (q[0][0] + q[1][1] + q[2][2] - 1.0) / 2.0;
    let axis = [q[2][1] - q[1][2], q[0][2] - q[2][0], q[1][0] - q[0][1]];
    let sin = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt() / 2.0;
    Ok(sin.atan2(cos).to_degrees())
}

/// Fraction of errors at or below `threshold` degrees.
pub fn acc_threshold(rhos: &[f64], threshold: f64) -> Result<f64> {
    if rhos.is_empty() {
        return Err(Error::contract("accuracy over an empty error list"));
    }
    Ok(rhos.iter().filter(|r| **r <= threshold).count() as f64 / rhos.len() as f64)
}

/// Median error; even counts average the two central values.
pub fn med_err(rhos: &[f64]) -> Result<f64> {
    if rhos.is_empty() {
        return Err(Error::contract("median of an empty error list"));
    }
    let mut v = rhos.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}
