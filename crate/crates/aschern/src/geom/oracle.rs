//! Independent dense-grid oracles.
//!
//! These integrate the analytic curvature densities over parameter grids,
//! bypassing the Alexander-Spanier machinery entirely, so pairings can be
//! checked against a genuinely independent route. The grid orientations
//! match the mesh conventions: see the module docs in `geom`.

use num_complex::Complex64;

use crate::chern_even::b_even;
use crate::chern_odd::{antisym_trace_product, c_odd};
use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{MatrixField, SampleKind};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Winding-number integral on the circle: trapezoid (spectrally accurate for
/// periodic analytic integrands) of the degree-1 odd density.
pub fn derham_circle(field: &dyn MatrixField, grid: usize) -> Result<Complex64> {
    if field.kind() != SampleKind::Unitary {
        return Err(Error::InvalidInput("circle oracle needs a unitary field".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..grid {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
        let x = vec![theta.cos(), theta.sin()];
        let tangent = vec![-theta.sin(), theta.cos()];
        let u = field.mat(&x);
        let du = field.derivative(&x, &tangent)?;
        acc += u.inverse()?.matmul(&du).trace();
    }
    Ok(c_odd(1) * acc * (2.0 * std::f64::consts::PI / grid as f64))
}

/// Even-degree (n = 2) pairing oracle on the 2-sphere: Gauss-Legendre in
/// theta, trapezoid in phi, of the density b_2 [Tr(e E_th E_ph) -
/// Tr(e E_ph E_th)] with coordinate tangents. Outward orientation.
pub fn derham_sphere2(field: &dyn MatrixField, n_theta: usize, n_phi: usize) -> Result<Complex64> {
    if field.kind() != SampleKind::Projector {
        return Err(Error::InvalidInput("sphere oracle needs a projector field".into()));
    }
    let (gl_nodes, gl_weights) = gauss_legendre(n_theta);
    let b2 = b_even(2);
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in gl_nodes.iter().zip(&gl_weights) {
        // theta in (0, pi)
        let theta = std::f64::consts::PI * (xi + 1.0) / 2.0;
        let jac_theta = std::f64::consts::PI / 2.0;
        let (st, ct) = theta.sin_cos();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let (sp, cp) = phi.sin_cos();
            let x = vec![st * cp, st * sp, ct];
            let d_theta = vec![ct * cp, ct * sp, -st];
            let d_phi = vec![-st * sp, st * cp, 0.0];
            let e = field.mat(&x);
            let et = field.derivative(&x, &d_theta)?;
            let ep = field.derivative(&x, &d_phi)?;
            let dens = e.matmul(&et).matmul(&ep).trace() - e.matmul(&ep).matmul(&et).trace();
            acc += dens * (wi * jac_theta * (2.0 * std::f64::consts::PI / n_phi as f64));
        }
    }
    Ok(b2 * acc)
}

/// Odd-degree (n = 3) pairing oracle on the 3-sphere in hyperspherical
/// coordinates x = (cos psi, sin psi sin th cos ph, sin psi sin th sin ph,
/// sin psi cos th); the frame (d_psi, d_th, d_ph) is positively oriented for
/// the vertex-determinant convention.
pub fn derham_sphere3(
    field: &dyn MatrixField,
    n_psi: usize,
    n_theta: usize,
    n_phi: usize,
) -> Result<Complex64> {
    if field.kind() != SampleKind::Unitary {
        return Err(Error::InvalidInput("3-sphere oracle needs a unitary field".into()));
    }
    let (psi_nodes, psi_weights) = gauss_legendre(n_psi);
    let (th_nodes, th_weights) = gauss_legendre(n_theta);
    let half_pi = std::f64::consts::PI / 2.0;
    let c3 = c_odd(3);
    let mut acc = Complex64::new(0.0, 0.0);
    for (xp, wp) in psi_nodes.iter().zip(&psi_weights) {
        let psi = std::f64::consts::PI * (xp + 1.0) / 2.0;
        let (spsi, cpsi) = psi.sin_cos();
        for (xt, wt) in th_nodes.iter().zip(&th_weights) {
            let theta = std::f64::consts::PI * (xt + 1.0) / 2.0;
            let (st, ct) = theta.sin_cos();
            for j in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                let (sp, cp) = phi.sin_cos();
                let x = vec![cpsi, spsi * st * cp, spsi * st * sp, spsi * ct];
                let d_psi = vec![-spsi, cpsi * st * cp, cpsi * st * sp, cpsi * ct];
                let d_th = vec![0.0, spsi * ct * cp, spsi * ct * sp, -spsi * st];
                let d_ph = vec![0.0, -spsi * st * sp, spsi * st * cp, 0.0];
                let u = field.mat(&x);
                let ui = u.inverse()?;
                let ms: Vec<CMat> = [d_psi, d_th, d_ph]
                    .iter()
                    .map(|v| field.derivative(&x, v).map(|d| ui.matmul(&d)))
                    .collect::<Result<Vec<_>>>()?;
                let dens = antisym_trace_product(&ms, None);
                let w = wp * half_pi * wt * half_pi * (2.0 * std::f64::consts::PI / n_phi as f64);
                acc += dens * w;
            }
        }
    }
    Ok(c3 * acc)
}

/// Link-variable (plaquette-phase) lattice Chern number for a rank-1
/// projector family on a periodic m x m grid; exact integer output for
/// gapped input. Orientation follows the (k1, k2) index order, matching the
/// torus mesh.
pub fn fhs_lattice_chern(projectors: &[Vec<CMat>]) -> Result<f64> {
    let m = projectors.len();
    if m < 3 || projectors.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidInput("need a periodic m x m grid, m >= 3".into()));
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            let a = &projectors[i][j];
            let b = &projectors[(i + 1) % m][j];
            let c = &projectors[(i + 1) % m][(j + 1) % m];
            let d = &projectors[i][(j + 1) % m];
            let t = a.matmul(b).matmul(c).matmul(d).trace();
            if t.norm() < 1e-12 {
                return Err(Error::Model("plaquette overlap vanishes; grid too coarse".into()));
            }
            total += t.arg();
        }
    }
    Ok(-total / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::circle::CircleWinding;
    use crate::geom::sphere::{BottSphere, Monopole};
    use crate::geom::torus::TwoBandTorus;

    #[test]
    fn gauss_legendre_exactness() {
        let (nodes, weights) = gauss_legendre(8);
        // exact for degree <= 15
        for deg in [0usize, 3, 8, 15] {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-13, "deg {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn circle_oracle_reproduces_winding() {
        for k in [-2i64, 0, 1, 3] {
            let f = CircleWinding::new(k);
            let v = derham_circle(&f, 64).unwrap();
            assert!((v - Complex64::new(k as f64, 0.0)).norm() < 1e-12, "k={k}: {v}");
        }
        // modulated field: same class
        let f = CircleWinding::with_modulation(2, 0.4);
        let v = derham_circle(&f, 256).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-10, "{v}");
    }

    #[test]
    fn sphere_oracle_bott_and_monopole() {
        let v = derham_sphere2(&BottSphere, 48, 48).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-10, "bott oracle {v}");
        for k in [1usize, 2, 3] {
            let v = derham_sphere2(&Monopole::new(k), 64, 64).unwrap();
            assert!(
                (v - Complex64::new(-(k as f64), 0.0)).norm() < 1e-8,
                "monopole k={k}: {v}"
            );
        }
    }

    #[test]
    fn sphere3_oracle_degree_one() {
        let v = derham_sphere3(&crate::geom::sphere3::Su2Sphere3, 24, 24, 24).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-8, "su2 oracle {v}");
    }

    #[test]
    fn lattice_chern_both_phases() {
        for (mass, expect) in [(1.0, -1.0), (3.0, 0.0), (-1.0, 1.0)] {
            let f = TwoBandTorus::new(mass);
            let m = 24;
            let grid: Vec<Vec<CMat>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            f.mat(&[
                                2.0 * std::f64::consts::PI * i as f64 / m as f64,
                                2.0 * std::f64::consts::PI * j as f64 / m as f64,
                            ])
                        })
                        .collect()
                })
                .collect();
            let c = fhs_lattice_chern(&grid).unwrap();
            assert!((c - expect).abs() < 1e-12, "mass {mass}: lattice chern {c}");
        }
    }
}
