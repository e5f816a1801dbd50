//! Winding samples on the triangulated circle.

use num_complex::Complex64;

use crate::chern_odd::UnitarySample;
use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{Mesh, MatrixField, SampleKind};

/// u(theta) = exp(i (k theta + modulation * sin theta)), a 1x1 unitary field
/// of winding number k. The modulation term (default 0) bends the phase so
/// that finite-difference probes see curvature; it does not change the class.
#[derive(Clone, Copy, Debug)]
pub struct CircleWinding {
    pub k: i64,
    pub modulation: f64,
}

impl CircleWinding {
    pub fn new(k: i64) -> Self {
        CircleWinding { k, modulation: 0.0 }
    }

    pub fn with_modulation(k: i64, modulation: f64) -> Self {
        CircleWinding { k, modulation }
    }

    fn theta(x: &[f64]) -> f64 {
        x[1].atan2(x[0])
    }

    fn phase(&self, theta: f64) -> f64 {
        self.k as f64 * theta + self.modulation * theta.sin()
    }
}

impl MatrixField for CircleWinding {
    fn kind(&self) -> SampleKind {
        SampleKind::Unitary
    }

    fn matrix_size(&self) -> usize {
        1
    }

    fn mat(&self, x: &[f64]) -> CMat {
        let theta = Self::theta(x);
        CMat::from_diag(&[Complex64::from_polar(1.0, self.phase(theta))])
    }

    fn derivative(&self, x: &[f64], v: &[f64]) -> Result<CMat> {
        // tangent at x is a multiple of (-sin, cos); the multiplier is the
        // theta-speed of the curve
        let theta = Self::theta(x);
        let speed = -v[0] * theta.sin() + v[1] * theta.cos();
        let dphase = self.k as f64 + self.modulation * theta.cos();
        let u = Complex64::from_polar(1.0, self.phase(theta));
        Ok(CMat::from_diag(&[u * Complex64::new(0.0, dphase * speed)]))
    }
}

/// Regular m-gon on the unit circle with the winding-k sample. Admissible
/// when m > 6|k| so that adjacent phases differ by less than pi/3 (which
/// keeps every principal-branch computation safe with margin).
pub fn gen_circle_winding(k: i64, m: usize) -> Result<(Mesh, UnitarySample)> {
    if m < 3 || (m as i64) <= 6 * k.abs() {
        return Err(Error::Admissibility(format!(
            "m = {m} too small for winding k = {k}: need m > {}",
            (6 * k.abs()).max(2)
        )));
    }
    let field = CircleWinding::new(k);
    let vertices: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect();
    let simplices: Vec<Vec<usize>> = (0..m).map(|i| vec![i, (i + 1) % m]).collect();
    let mesh = Mesh::new(1, vertices, simplices)?;
    mesh.validate_closed()?;

    let mats: Vec<CMat> = mesh.vertices.iter().map(|x| field.mat(x)).collect();
    // adjacent gap: |e^{ik dtheta} - 1| = 2 |sin(k dtheta / 2)| < 1 with margin;
    // rho covers small vertex clusters (a few hops), capped below 1.
    let mut max_edge_gap: f64 = 0.0;
    for (a, b) in mesh.edges() {
        max_edge_gap = max_edge_gap.max(mats[a].sub(&mats[b]).op_norm()?);
    }
    let rho = (3.0 * max_edge_gap).clamp(0.1, 0.99);
    if max_edge_gap >= rho {
        return Err(Error::Admissibility(format!(
            "edge gap {max_edge_gap:.4} not below rho {rho:.4}"
        )));
    }
    let sample = UnitarySample::new(mats, rho)?;
    Ok((mesh, sample))
}
