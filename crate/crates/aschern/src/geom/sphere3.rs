//! The triangulated 3-sphere with its SU(2) identity sample.
//!
//! Base complex: the 16 tetrahedral facets of the hyperoctahedron (16-cell)
//! boundary, each edgewise-subdivided and projected radially to S^3. One
//! subdivision level halves the lattice spacing (level L = 2^L-fold edgewise
//! subdivision); level 1 still contains vertex pairs at distance sqrt(2)
//! inside one cell (opposite edge midpoints), so admissibility starts at
//! level 2.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::chern_odd::UnitarySample;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quad::edgewise_subsimplices;

use super::{dot_sigma, normalize, Mesh, MatrixField, SampleKind};

/// U(x) = x_0 I + i (x_1 sigma_1 + x_2 sigma_2 + x_3 sigma_3) for unit
/// x in R^4: the quaternion identification of S^3 with SU(2), an isometry
/// in operator norm (||U(x) - U(y)|| = |x - y|).
#[derive(Clone, Copy, Debug)]
pub struct Su2Sphere3;

impl MatrixField for Su2Sphere3 {
    fn kind(&self) -> SampleKind {
        SampleKind::Unitary
    }

    fn matrix_size(&self) -> usize {
        2
    }

    fn mat(&self, x: &[f64]) -> CMat {
        su2_linear(x)
    }

    fn derivative(&self, _x: &[f64], v: &[f64]) -> Result<CMat> {
        // the field is the restriction of a linear map on R^4
        Ok(su2_linear(v))
    }
}

fn su2_linear(x: &[f64]) -> CMat {
    let mut m = dot_sigma(&x[1..]).scale(Complex64::new(0.0, 1.0));
    for i in 0..2 {
        m[(i, i)] += Complex64::new(x[0], 0.0);
    }
    m
}

fn det4(rows: &[&[f64]; 4]) -> f64 {
    let m = rows;
    let minor = |r: [usize; 3], c: [usize; 3]| -> f64 {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[0][1] * minor([1, 2, 3], [0, 2, 3])
        + m[0][2] * minor([1, 2, 3], [0, 1, 3])
        - m[0][3] * minor([1, 2, 3], [0, 1, 2])
}

/// Oriented triangulation of S^3 with the SU(2) sample at the vertices.
/// `level` halves the lattice spacing each step (2^level-fold edgewise
/// subdivision of every 16-cell facet); `level >= 2` is required for the
/// chord bound max ||U(x) - U(y)|| < 1 inside every tetrahedron.
pub fn gen_su2_sphere3(level: usize) -> Result<(Mesh, UnitarySample)> {
    if level == 0 {
        return Err(Error::Admissibility("subdivision level 0 keeps chords at sqrt(2)".into()));
    }
    let k = 1usize << level;
    let kf = k as f64;

    // 16 facets: one vertex on each axis, sign pattern s; ordered so the
    // 4x4 vertex determinant is positive.
    let mut facet_list: Vec<[[f64; 4]; 4]> = Vec::new();
    for bits in 0..16u32 {
        let s: Vec<f64> = (0..4).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let mut f = [[0.0; 4]; 4];
        for i in 0..4 {
            f[i][i] = s[i];
        }
        let sign: f64 = s.iter().product();
        if sign < 0.0 {
            f.swap(0, 1);
        }
        facet_list.push(f);
    }

    let mut key_to_id: HashMap<[i64; 4], usize> = HashMap::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut simplices: Vec<Vec<usize>> = Vec::new();
    let subcells = edgewise_subsimplices(3, k);
    for f in &facet_list {
        for cell in &subcells {
            let mut ids = Vec::with_capacity(4);
            for bary in cell {
                // integer key: k * (point in the facet), exact because the
                // barycentric entries are multiples of 1/k
                let mut key = [0i64; 4];
                let mut p = [0.0f64; 4];
                for (ti, fv) in bary.iter().zip(f.iter()) {
                    for c in 0..4 {
                        p[c] += ti * fv[c];
                        key[c] += (ti * kf).round() as i64 * fv[c] as i64;
                    }
                }
                let id = *key_to_id.entry(key).or_insert_with(|| {
                    vertices.push(normalize(&p));
                    vertices.len() - 1
                });
                ids.push(id);
            }
            let rows: [&[f64]; 4] = [
                &vertices[ids[0]],
                &vertices[ids[1]],
                &vertices[ids[2]],
                &vertices[ids[3]],
            ];
            if det4(&rows) < 0.0 {
                ids.swap(0, 1);
            }
            simplices.push(ids);
        }
    }

    let mesh = Mesh::new(3, vertices, simplices)?;
    mesh.validate_closed()?;

    let field = Su2Sphere3;
    let mats: Vec<CMat> = mesh.vertices.iter().map(|x| field.mat(x)).collect();
    // within every tetrahedron all vertex pairs interpolate together
    let mut max_pairwise: f64 = 0.0;
    for s in &mesh.simplices {
        for a in 0..4 {
            for b in a + 1..4 {
                max_pairwise = max_pairwise.max(mats[s[a]].sub(&mats[s[b]]).op_norm()?);
            }
        }
    }
    if max_pairwise >= 0.95 {
        return Err(Error::Admissibility(format!(
            "chord {max_pairwise:.4} within a tetrahedron leaves no margin below 1; \
             increase the level"
        )));
    }
    let sample = UnitarySample::new(mats, 0.99)?;
    Ok((mesh, sample))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dist;

    #[test]
    fn level_one_rejected() {
        assert!(matches!(gen_su2_sphere3(1), Err(Error::Admissibility(_))));
        assert!(matches!(gen_su2_sphere3(0), Err(Error::Admissibility(_))));
    }

    #[test]
    fn mesh_shape_level2() {
        let (mesh, sample) = gen_su2_sphere3(2).unwrap();
        assert_eq!(mesh.simplices.len(), 16 * 64); // 16 facets x 4^3 cells
        assert_eq!(sample.len(), mesh.vertices.len());
        for v in &mesh.vertices {
            assert!((super::super::norm(v) - 1.0).abs() < 1e-12);
        }
        mesh.validate_closed().unwrap();
    }

    #[test]
    fn quaternion_isometry_on_edges() {
        let (mesh, sample) = gen_su2_sphere3(2).unwrap();
        for (a, b) in mesh.edges().into_iter().take(200) {
            let gap = sample.mat(a).sub(sample.mat(b)).op_norm().unwrap();
            let chord = dist(&mesh.vertices[a], &mesh.vertices[b]);
            assert!((gap - chord).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_determinants_positive() {
        let (mesh, _) = gen_su2_sphere3(2).unwrap();
        for s in mesh.simplices.iter().take(300) {
            let rows: [&[f64]; 4] = [
                &mesh.vertices[s[0]],
                &mesh.vertices[s[1]],
                &mesh.vertices[s[2]],
                &mesh.vertices[s[3]],
            ];
            assert!(det4(&rows) > 0.0);
        }
    }
}
