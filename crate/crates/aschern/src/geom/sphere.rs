//! Icosphere meshes and rank-1 projector bundles on the 2-sphere.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::chern_even::ProjectorSample;
use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{dot_sigma, normalize, Mesh, MatrixField, SampleKind};

/// Icosahedron subdivided `level` times, vertices normalized to the unit
/// sphere, faces oriented with outward normal (positive vertex-order
/// determinant).
pub fn icosphere(level: usize) -> Mesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec<f64>> = raw.iter().map(|v| normalize(v)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize, verts: &mut Vec<Vec<f64>>| -> usize {
                let key = (i.min(j), i.max(j));
                if let Some(&idx) = midpoint.get(&key) {
                    return idx;
                }
                let m: Vec<f64> =
                    verts[i].iter().zip(&verts[j]).map(|(x, y)| (x + y) / 2.0).collect();
                let m = normalize(&m);
                verts.push(m);
                let idx = verts.len() - 1;
                midpoint.insert(key, idx);
                idx
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    // outward orientation: det[v0; v1; v2] > 0
    let simplices: Vec<Vec<usize>> = faces
        .iter()
        .map(|&[a, b, c]| {
            if det3(&vertices[a], &vertices[b], &vertices[c]) > 0.0 {
                vec![a, b, c]
            } else {
                vec![a, c, b]
            }
        })
        .collect();
    Mesh::new(2, vertices, simplices).expect("icosphere construction")
}

fn det3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// The Bott projector field e(x) = (1/2)(I + x . sigma) on the unit sphere;
/// rank 1, Chern number of unit magnitude.
#[derive(Clone, Copy, Debug)]
pub struct BottSphere;

impl MatrixField for BottSphere {
    fn kind(&self) -> SampleKind {
        SampleKind::Projector
    }

    fn matrix_size(&self) -> usize {
        2
    }

    fn mat(&self, x: &[f64]) -> CMat {
        let mut e = dot_sigma(x).scale(Complex64::new(0.5, 0.0));
        for i in 0..2 {
            e[(i, i)] += Complex64::new(0.5, 0.0);
        }
        e
    }

    fn derivative(&self, _x: &[f64], v: &[f64]) -> Result<CMat> {
        // e is linear in x, so L_v e = (1/2) v . sigma for any tangent v
        Ok(dot_sigma(v).scale(Complex64::new(0.5, 0.0)))
    }
}

fn projector_sample_on_mesh(
    mesh: &Mesh,
    field: &dyn MatrixField,
    what: &str,
) -> Result<ProjectorSample> {
    let mats: Vec<CMat> = mesh.vertices.iter().map(|x| field.mat(x)).collect();
    let mut max_edge_gap: f64 = 0.0;
    for (a, b) in mesh.edges() {
        max_edge_gap = max_edge_gap.max(mats[a].sub(&mats[b]).op_norm()?);
    }
    let rho = (3.0 * max_edge_gap).clamp(0.05, 0.499);
    if max_edge_gap >= rho {
        return Err(Error::Admissibility(format!(
            "{what}: edge gap {max_edge_gap:.4} not below rho {rho:.4}; refine the mesh"
        )));
    }
    ProjectorSample::new(mats, rho)
}

/// Bott sphere asset: icosphere at the given subdivision level plus the
/// rank-1 projector sample. Level 0 fails the edge-gap bound.
pub fn gen_bott_sphere(level: usize) -> Result<(Mesh, ProjectorSample)> {
    let mesh = icosphere(level);
    mesh.validate_closed()?;
    let sample = projector_sample_on_mesh(&mesh, &BottSphere, "bott sphere")?;
    Ok((mesh, sample))
}

/// Rank-1 projector onto the k-fold symmetric power of the spinor
/// psi(x) = (cos(theta/2), e^{i phi} sin(theta/2)): a charge-k monopole
/// bundle in C^(k+1). The projector is phase-free, hence smooth across the
/// chart seam and the poles.
#[derive(Clone, Copy, Debug)]
pub struct Monopole {
    pub charge: usize,
}

impl Monopole {
    pub fn new(charge: usize) -> Self {
        Monopole { charge }
    }

    /// Spinor components in spherical coordinates.
    fn spinor_vec(&self, theta: f64, phi: f64) -> Vec<Complex64> {
        let k = self.charge;
        let a = (theta / 2.0).cos();
        let b = Complex64::from_polar((theta / 2.0).sin(), phi);
        (0..=k)
            .map(|j| {
                let coeff = binomial_f(k, j).sqrt();
                Complex64::new(coeff * a.powi((k - j) as i32), 0.0) * b.powu(j as u32)
            })
            .collect()
    }

    fn spherical(x: &[f64]) -> (f64, f64) {
        let theta = x[2].clamp(-1.0, 1.0).acos();
        let phi = x[1].atan2(x[0]);
        (theta, phi)
    }

    /// Partial derivatives of the spinor vector in (theta, phi).
    fn spinor_partials(&self, theta: f64, phi: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let k = self.charge;
        let a = (theta / 2.0).cos();
        let da = -(theta / 2.0).sin() / 2.0;
        let sb = (theta / 2.0).sin();
        let db = (theta / 2.0).cos() / 2.0;
        let eip = Complex64::from_polar(1.0, phi);
        let mut d_theta = Vec::with_capacity(k + 1);
        let mut d_phi = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let coeff = binomial_f(k, j).sqrt();
            let kj = (k - j) as f64;
            let jf = j as f64;
            // d/dtheta [a^(k-j) sb^j] = (k-j) a^(k-j-1) da sb^j + j sb^(j-1) db a^(k-j)
            let mut dt = 0.0;
            if k - j > 0 {
                dt += kj * a.powi((k - j) as i32 - 1) * da * sb.powi(j as i32);
            }
            if j > 0 {
                dt += jf * sb.powi(j as i32 - 1) * db * a.powi((k - j) as i32);
            }
            let phase = eip.powu(j as u32);
            d_theta.push(Complex64::new(coeff * dt, 0.0) * phase);
            let vj = Complex64::new(coeff * a.powi((k - j) as i32) * sb.powi(j as i32), 0.0)
                * phase;
            d_phi.push(vj * Complex64::new(0.0, jf));
        }
        (d_theta, d_phi)
    }
}

fn binomial_f(n: usize, r: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..r {
        v = v * ((n - i) as f64) / ((i + 1) as f64);
    }
    v
}

impl MatrixField for Monopole {
    fn kind(&self) -> SampleKind {
        SampleKind::Projector
    }

    fn matrix_size(&self) -> usize {
        self.charge + 1
    }

    fn mat(&self, x: &[f64]) -> CMat {
        let (theta, phi) = Self::spherical(x);
        let v = self.spinor_vec(theta, phi);
        CMat::outer(&v, &v)
    }

    fn derivative(&self, x: &[f64], w: &[f64]) -> Result<CMat> {
        let (theta, phi) = Self::spherical(x);
        let st = theta.sin();
        if st.abs() < 1e-9 {
            return Err(Error::Capability(
                "monopole derivative unavailable at the poles".into(),
            ));
        }
        // decompose the tangent in the orthonormal frame (theta-hat, phi-hat)
        let th = [theta.cos() * phi.cos(), theta.cos() * phi.sin(), -st];
        let ph = [-phi.sin(), phi.cos(), 0.0];
        let alpha = w[0] * th[0] + w[1] * th[1] + w[2] * th[2];
        let beta = (w[0] * ph[0] + w[1] * ph[1] + w[2] * ph[2]) / st;
        let v = self.spinor_vec(theta, phi);
        let (dt, dp) = self.spinor_partials(theta, phi);
        let dv: Vec<Complex64> = dt
            .iter()
            .zip(&dp)
            .map(|(t, p)| t * alpha + p * beta)
            .collect();
        // L(v v*) = dv v* + v dv*
        Ok(CMat::outer(&dv, &v).add(&CMat::outer(&v, &dv)))
    }
}

/// Monopole asset of charge k >= 1 on the level-L icosphere. The edge gap
/// grows with k, so the required level scales with the charge; the bound is
/// checked at construction.
pub fn gen_monopole(charge: usize, level: usize) -> Result<(Mesh, ProjectorSample)> {
    if charge == 0 {
        return Err(Error::InvalidInput("monopole charge must be >= 1".into()));
    }
    let mesh = icosphere(level);
    mesh.validate_closed()?;
    let field = Monopole::new(charge);
    let sample = projector_sample_on_mesh(&mesh, &field, "monopole")?;
    Ok((mesh, sample))
}
