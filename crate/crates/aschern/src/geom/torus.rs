//! Two-band Bloch model on the Brillouin torus.
//!
//! h(k) = (sin k1, sin k2, mass + cos k1 + cos k2) with the lower-band
//! projector e(k) = (1/2)(I - hhat . sigma). The model is gapped away from
//! |mass| in {0, 2}; the topological phase (|mass| < 2, mass != 0) carries a
//! unit Chern number, the trivial phase (|mass| > 2) carries zero.

use num_complex::Complex64;

use crate::chern_even::ProjectorSample;
use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{dot_sigma, Mesh, MatrixField, SampleKind};

#[derive(Clone, Copy, Debug)]
pub struct TwoBandTorus {
    pub mass: f64,
}

impl TwoBandTorus {
    pub fn new(mass: f64) -> Self {
        TwoBandTorus { mass }
    }

    pub fn h(&self, k: &[f64]) -> [f64; 3] {
        [k[0].sin(), k[1].sin(), self.mass + k[0].cos() + k[1].cos()]
    }

    fn h_norm(&self, k: &[f64]) -> f64 {
        let h = self.h(k);
        (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt()
    }
}

impl MatrixField for TwoBandTorus {
    fn kind(&self) -> SampleKind {
        SampleKind::Projector
    }

    fn matrix_size(&self) -> usize {
        2
    }

    fn mat(&self, k: &[f64]) -> CMat {
        let h = self.h(k);
        let n = self.h_norm(k);
        let mut e = dot_sigma(&[h[0] / n, h[1] / n, h[2] / n]).scale(Complex64::new(-0.5, 0.0));
        for i in 0..2 {
            e[(i, i)] += Complex64::new(0.5, 0.0);
        }
        e
    }

    fn derivative(&self, k: &[f64], v: &[f64]) -> Result<CMat> {
        let h = self.h(k);
        let n = self.h_norm(k);
        let hhat = [h[0] / n, h[1] / n, h[2] / n];
        let dh = [
            v[0] * k[0].cos(),
            v[1] * k[1].cos(),
            -v[0] * k[0].sin() - v[1] * k[1].sin(),
        ];
        let dot = hhat[0] * dh[0] + hhat[1] * dh[1] + hhat[2] * dh[2];
        let dhhat = [
            (dh[0] - dot * hhat[0]) / n,
            (dh[1] - dot * hhat[1]) / n,
            (dh[2] - dot * hhat[2]) / n,
        ];
        Ok(dot_sigma(&dhhat).scale(Complex64::new(-0.5, 0.0)))
    }
}

/// Periodic m x m triangulated grid on [0, 2pi)^2 with the lower-band
/// projector sample. Orientation follows the (k1, k2) coordinate order.
/// Errors: gap closure (Model), coarse grid (Admissibility).
pub fn gen_two_band_torus(mass: f64, grid: usize) -> Result<(Mesh, ProjectorSample)> {
    if grid < 3 {
        return Err(Error::InvalidInput("grid must be at least 3".into()));
    }
    let field = TwoBandTorus::new(mass);
    // gap closure probe on a denser grid
    let probe = 2 * grid;
    let mut min_h = f64::INFINITY;
    for i in 0..probe {
        for j in 0..probe {
            let k = [
                2.0 * std::f64::consts::PI * i as f64 / probe as f64,
                2.0 * std::f64::consts::PI * j as f64 / probe as f64,
            ];
            min_h = min_h.min(field.h_norm(&k));
        }
    }
    if min_h < 1e-6 {
        return Err(Error::Model(format!(
            "Bloch gap closes (min |h| = {min_h:.2e}) at mass {mass}"
        )));
    }

    let idx = |i: usize, j: usize| (i % grid) * grid + (j % grid);
    let mut vertices = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            vertices.push(vec![
                2.0 * std::f64::consts::PI * i as f64 / grid as f64,
                2.0 * std::f64::consts::PI * j as f64 / grid as f64,
            ]);
        }
    }
    let mut simplices = Vec::with_capacity(2 * grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            simplices.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            simplices.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mesh = Mesh::new(2, vertices, simplices)?;
    mesh.validate_closed()?;

    let mats: Vec<CMat> = mesh.vertices.iter().map(|k| field.mat(k)).collect();
    let mut max_edge_gap: f64 = 0.0;
    for (a, b) in mesh.edges() {
        max_edge_gap = max_edge_gap.max(mats[a].sub(&mats[b]).op_norm()?);
    }
    let rho = (3.0 * max_edge_gap).clamp(0.05, 0.499);
    if max_edge_gap >= rho {
        return Err(Error::Admissibility(format!(
            "edge gap {max_edge_gap:.4} not below rho {rho:.4}; refine the grid"
        )));
    }
    let sample = ProjectorSample::new(mats, rho)?;
    Ok((mesh, sample))
}
