//! Example generators, fundamental cycles, the smooth comparison map and
//! independent de Rham oracles.
//!
//! Each generator produces an oriented triangulated manifold together with a
//! matrix-valued sample at its vertices, verifying its admissibility bound
//! (edge gap) at construction. Orientation conventions, shared with all
//! oracles: S^1 counterclockwise, S^2 outward normal via the vertex-order
//! determinant, S^3 via the sign of the 4x4 vertex determinant, T^2 by the
//! (k1, k2) coordinate order.

pub mod circle;
pub mod lambda;
pub mod oracle;
pub mod sphere;
pub mod sphere3;
pub mod torus;

pub use circle::{gen_circle_winding, CircleWinding};
pub use lambda::{
    analytic_form_even, analytic_form_odd, derham_convergence, lambda_map, CochainSpec,
    ConvergenceReport, TangentProbe,
};
pub use oracle::{derham_circle, derham_sphere2, derham_sphere3, fhs_lattice_chern, gauss_legendre};
pub use sphere::{gen_bott_sphere, gen_monopole, icosphere, BottSphere, Monopole};
pub use sphere3::{gen_su2_sphere3, Su2Sphere3};
pub use torus::{gen_two_band_torus, TwoBandTorus};

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::ascomplex::{Chain, Tuple};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Oriented triangulated manifold with embedded vertex coordinates.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Oriented top simplices, dim + 1 vertex ids each.
    pub simplices: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        for s in &simplices {
            if s.len() != dim + 1 {
                return Err(Error::InvalidInput(format!(
                    "top simplex {s:?} does not have {} vertices",
                    dim + 1
                )));
            }
            for &id in s {
                if id >= vertices.len() {
                    return Err(Error::InvalidInput(format!("vertex id {id} out of range")));
                }
            }
        }
        Ok(Mesh { dim, vertices, simplices })
    }

    /// The fundamental cycle: every top simplex written with sorted vertex
    /// ids and the sign of the sorting permutation as coefficient. In this
    /// ordered form the boundary faces of adjacent simplices cancel exactly
    /// (integer arithmetic), while pairings with the antisymmetric Chern
    /// cochains are unchanged.
    pub fn fundamental_cycle(&self) -> Chain {
        Chain::from_terms(
            self.dim,
            self.simplices.iter().map(|s| {
                let mut sorted = s.clone();
                let mut sign = 1.0;
                // insertion sort, counting swaps
                for i in 1..sorted.len() {
                    let mut j = i;
                    while j > 0 && sorted[j - 1] > sorted[j] {
                        sorted.swap(j - 1, j);
                        sign = -sign;
                        j -= 1;
                    }
                }
                (Complex64::new(sign, 0.0), Tuple::new(sorted))
            }),
        )
    }

    /// Errors unless the fundamental chain is a cycle (exact integer check).
    pub fn validate_closed(&self) -> Result<()> {
        let (ok, res) = self.fundamental_cycle().is_cycle(0.0);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "mesh is not a closed oriented manifold (boundary residual {res})"
            )));
        }
        Ok(())
    }

    /// The same mesh with reversed orientation (first two vertices of every
    /// top simplex swapped).
    pub fn reversed(&self) -> Mesh {
        let simplices = self
            .simplices
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.swap(0, 1);
                t
            })
            .collect();
        Mesh { dim: self.dim, vertices: self.vertices.clone(), simplices }
    }

    /// Undirected edges of the triangulation (all vertex pairs of every top
    /// simplex).
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    out.insert((s[a].min(s[b]), s[a].max(s[b])));
                }
            }
        }
        out
    }

    /// For each vertex, the vertex itself plus its edge neighbors. Tuples
    /// sampled inside one cluster stay within twice the edge proximity.
    pub fn vertex_clusters(&self) -> Vec<Vec<usize>> {
        let mut clusters: Vec<BTreeSet<usize>> =
            (0..self.vertices.len()).map(|i| BTreeSet::from([i])).collect();
        for (a, b) in self.edges() {
            clusters[a].insert(b);
            clusters[b].insert(a);
        }
        clusters.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn euclidean_edge_lengths(&self) -> Vec<f64> {
        self.edges()
            .iter()
            .map(|&(a, b)| dist(&self.vertices[a], &self.vertices[b]))
            .collect()
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// Whether a sample is unitary- or projector-valued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Unitary,
    Projector,
}

/// An analytically defined matrix field on a manifold: the source of both
/// the vertex samples and, where available, closed-form directional
/// derivatives for the de Rham oracles.
pub trait MatrixField: Send + Sync {
    fn kind(&self) -> SampleKind;
    fn matrix_size(&self) -> usize;
    /// Field value at a point given by its embedded coordinates.
    fn mat(&self, x: &[f64]) -> CMat;
    /// Directional derivative along a tangent vector at x (closed form).
    fn derivative(&self, x: &[f64], v: &[f64]) -> Result<CMat>;
}

/// Pauli matrices (sigma_1, sigma_2, sigma_3).
pub(crate) fn pauli() -> [CMat; 3] {
    let c = Complex64::new;
    [
        CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap(),
        CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
            .unwrap(),
        CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
            .unwrap(),
    ]
}

/// v . sigma for a real 3-vector.
pub(crate) fn dot_sigma(v: &[f64]) -> CMat {
    let p = pauli();
    let mut m = p[0].scale(Complex64::new(v[0], 0.0));
    m.axpy(Complex64::new(v[1], 0.0), &p[1]);
    m.axpy(Complex64::new(v[2], 0.0), &p[2]);
    m
}
