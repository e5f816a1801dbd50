//! Even Chern character cocycles from projector-valued samples.
//!
//! A sample assigns a self-adjoint projector e(x) (all of one rank) to each
//! point, with pairwise distances below rho < 1/2. On a tuple the affine
//! combination a(t) = sum t_i e(x_i) has spectrum inside the two discs of
//! radius rho around 0 and 1, so its spectral projector e(t) onto the part
//! above 1/2 is smooth over the simplex. The degree-n cochain (n even)
//! integrates the antisymmetrized trace of e (de)^n times b_n.
//!
//! The projector is produced by Hermitian eigendecomposition with threshold
//! 1/2; the contour-integral resolvent route and the explicit word series in
//! delta are retained as cross-validation oracles.

use std::sync::Arc;

use num_complex::Complex64;

use crate::ascomplex::{Cochain, Tuple};
use crate::chern_odd::{antisym_trace_product, grid_derivative};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::perm::permutations_with_sign;
use crate::quad::{integrate_cfg, QuadConfig};

/// Projector-valued sample points with common rank and gap bound rho < 1/2.
#[derive(Clone)]
pub struct ProjectorSample {
    matrix_size: usize,
    mats: Vec<CMat>,
    rho: f64,
    rank: usize,
}

impl ProjectorSample {
    /// Validates self-adjointness and idempotency (both to 1e-10 in operator
    /// norm), a common integer rank, and 0 < rho < 1/2.
    pub fn new(mats: Vec<CMat>, rho: f64) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("empty projector sample".into()));
        }
        let n = mats[0].dim();
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::InvalidInput(format!("rho = {rho} outside (0, 1/2)")));
        }
        let mut rank = None;
        for (i, m) in mats.iter().enumerate() {
            if m.dim() != n {
                return Err(Error::InvalidInput("mixed matrix sizes in sample".into()));
            }
            if !m.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite matrix at point {i}")));
            }
            if m.sub(&m.adjoint()).op_norm()? > 1e-10 {
                return Err(Error::ContractViolation(format!(
                    "matrix at point {i} not self-adjoint"
                )));
            }
            if m.matmul(m).sub(m).op_norm()? > 1e-10 {
                return Err(Error::ContractViolation(format!(
                    "matrix at point {i} not idempotent"
                )));
            }
            let tr = m.trace().re;
            let r = tr.round();
            if (tr - r).abs() > 1e-6 {
                return Err(Error::RankMismatch(format!(
                    "trace {tr} at point {i} not close to an integer"
                )));
            }
            match rank {
                None => rank = Some(r as usize),
                Some(r0) if r0 != r as usize => {
                    return Err(Error::RankMismatch(format!(
                        "rank {r} at point {i} differs from common rank {r0}"
                    )));
                }
                _ => {}
            }
        }
        Ok(ProjectorSample { matrix_size: n, mats, rho, rank: rank.unwrap() })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mat(&self, id: usize) -> &CMat {
        &self.mats[id]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn max_pairwise_gap(&self, ids: &[usize]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (a, &i) in ids.iter().enumerate() {
            for &j in ids.iter().skip(a + 1) {
                let d = self.mats[i].sub(&self.mats[j]).op_norm()?;
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    pub fn check_gap(&self, ids: &[usize]) -> Result<()> {
        for &i in ids {
            if i >= self.mats.len() {
                return Err(Error::InvalidInput(format!("point id {i} out of range")));
            }
        }
        let worst = self.max_pairwise_gap(ids)?;
        if worst >= self.rho {
            return Err(Error::GapViolation(format!(
                "max pairwise distance {worst:.6} >= rho {:.6} on tuple {ids:?}",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Affine self-adjoint interpolation a(t) = base + sum t_j delta_j.
pub struct EvenPath {
    base: CMat,
    deltas: Vec<CMat>,
    rank: usize,
}

impl EvenPath {
    pub fn from_parts(base: CMat, deltas: Vec<CMat>, rank: usize) -> Self {
        EvenPath { base, deltas, rank }
    }

    pub fn base(&self) -> &CMat {
        &self.base
    }

    pub fn deltas(&self) -> &[CMat] {
        &self.deltas
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn a_at(&self, t_bary: &[f64]) -> CMat {
        let mut a = self.base.clone();
        for (j, d) in self.deltas.iter().enumerate() {
            a.axpy(Complex64::new(t_bary[j + 1], 0.0), d);
        }
        a
    }

    /// Minimum distance of eig(a(t)) to the threshold 1/2 over a coarse probe
    /// of the simplex (vertices, midpoints, barycenter).
    pub fn gap_certificate(&self) -> Result<f64> {
        let n = self.deltas.len();
        let mut probes: Vec<Vec<f64>> = Vec::new();
        // vertices
        for j in 0..=n {
            let mut t = vec![0.0; n + 1];
            t[j] = 1.0;
            probes.push(t);
        }
        // edge midpoints
        for a in 0..=n {
            for b in a + 1..=n {
                let mut t = vec![0.0; n + 1];
                t[a] = 0.5;
                t[b] = 0.5;
                probes.push(t);
            }
        }
        // barycenter
        probes.push(vec![1.0 / (n as f64 + 1.0); n + 1]);
        let mut min_dist = f64::INFINITY;
        for t in &probes {
            let a = self.a_at(t).hermitian_part();
            let (vals, _) = a.herm_eig()?;
            for v in vals {
                min_dist = min_dist.min((v - 0.5).abs());
            }
        }
        Ok(min_dist)
    }
}

pub fn even_path(sample: &ProjectorSample, tuple: &Tuple) -> Result<EvenPath> {
    sample.check_gap(&tuple.0)?;
    let base = sample.mat(tuple.0[0]).clone();
    let deltas = tuple.0[1..]
        .iter()
        .map(|&id| sample.mat(id).sub(&base))
        .collect();
    Ok(EvenPath { base, deltas, rank: sample.rank })
}

const THRESHOLD_MARGIN: f64 = 1e-8;

/// Spectral projector onto the eigenvalues above 1/2 (eigendecomposition
/// route). Errors when an eigenvalue sits within 1e-8 of the threshold.
pub fn spectral_projector(a: &CMat) -> Result<CMat> {
    let (e, _, _, _) = eig_split(a)?;
    Ok(e)
}

/// Eigen data split at the threshold: (projector, eigenvalues, vectors,
/// index of the first eigenvalue above 1/2). Shared by the projector and its
/// derivative so each node costs one eigendecomposition.
fn eig_split(a: &CMat) -> Result<(CMat, Vec<f64>, CMat, usize)> {
    let (vals, vecs) = a.herm_eig()?;
    for &v in &vals {
        if (v - 0.5).abs() < THRESHOLD_MARGIN {
            return Err(Error::SpectralGap(format!(
                "eigenvalue {v} within {THRESHOLD_MARGIN:.1e} of 1/2"
            )));
        }
    }
    let split = vals.partition_point(|&v| v < 0.5);
    let n = a.dim();
    let mut e = CMat::zeros(n);
    for p in split..n {
        let col = vecs.col(p);
        let outer = CMat::outer(&col, &col);
        e.axpy(Complex64::new(1.0, 0.0), &outer);
    }
    Ok((e, vals, vecs, split))
}

/// Riesz contour route: trapezoid rule with m nodes on |lambda - 1| = 1/2,
/// e = (2 pi i)^{-1} contour integral of (lambda - a)^{-1}. Kept for
/// cross-validation; spectrally convergent in m.
pub fn spectral_projector_contour(a: &CMat, m: usize) -> Result<CMat> {
    if m < 32 {
        return Err(Error::InvalidInput(format!("contour nodes m = {m} < 32")));
    }
    let n = a.dim();
    let mut acc = CMat::zeros(n);
    for k in 0..m {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64);
        let on_circle = Complex64::from_polar(0.5, theta);
        let lambda = Complex64::new(1.0, 0.0) + on_circle;
        let mut shifted = a.scale(Complex64::new(-1.0, 0.0));
        for i in 0..n {
            shifted[(i, i)] += lambda;
        }
        let resolvent = shifted.inverse().map_err(|e| {
            Error::SpectralGap(format!("resolvent solve failed on the contour: {e}"))
        })?;
        // d lambda / d theta = i * (lambda - 1); the 1/(2 pi i) and the i
        // combine to 1/(2 pi).
        acc.axpy(on_circle / (m as f64), &resolvent);
    }
    Ok(acc)
}

fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..r {
        v = v * ((n - i) as f64) / ((i + 1) as f64);
    }
    v
}

/// Truncated word series for the interpolated projector:
/// e(t) = sum_k sum_words (-1)^(m-1) C(k-1, m-1) b_0 delta b_1 ... delta b_k,
/// each b_i in {e0, 1 - e0}, m = #{b_i = e0}, with C(k-1, -1) = 0. The k = 0
/// term is e0. Enumerates all 2^(k+1) words per order; capped at K <= 16.
pub fn projector_series(path: &EvenPath, t_bary: &[f64], k_max: usize) -> Result<CMat> {
    if k_max > 16 {
        return Err(Error::Capability(format!(
            "series truncation K = {k_max} > 16 (word count 2^(K+1))"
        )));
    }
    let n = path.base.dim();
    let e0 = &path.base;
    let mut one_minus = e0.scale(Complex64::new(-1.0, 0.0));
    for i in 0..n {
        one_minus[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let mut delta = CMat::zeros(n);
    for (j, d) in path.deltas.iter().enumerate() {
        delta.axpy(Complex64::new(t_bary[j + 1], 0.0), d);
    }
    let mut acc = e0.clone();
    for k in 1..=k_max {
        for word in 0u64..(1u64 << (k + 1)) {
            let m = word.count_ones() as usize;
            if m == 0 {
                continue; // C(k-1, -1) = 0
            }
            let coeff = binomial(k - 1, m - 1) * if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
            if coeff == 0.0 {
                continue;
            }
            let pick = |bit: u64| if bit == 1 { e0 } else { &one_minus };
            let mut prod = pick(word & 1).clone();
            for i in 1..=k {
                prod = prod.matmul(&delta).matmul(pick((word >> i) & 1));
            }
            acc.axpy(Complex64::new(coeff, 0.0), &prod);
        }
    }
    Ok(acc)
}

/// Interpolated projector and its partial derivatives E_j = de/dt_j at one
/// node, from first-order perturbation of the spectral projector:
/// E_j = sum_{p above, q below} (v_p* delta_j v_q)/(lambda_p - lambda_q)
///       v_p v_q*  + h.c.
pub fn projector_and_derivatives(a: &CMat, deltas: &[CMat]) -> Result<(CMat, Vec<CMat>)> {
    let (e, vals, vecs, split) = eig_split(a)?;
    let n = a.dim();
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| vecs.col(j)).collect();
    let mut derivs = Vec::with_capacity(deltas.len());
    for d in deltas {
        let mut ej = CMat::zeros(n);
        for p in split..n {
            for q in 0..split {
                // v_p* d v_q
                let mut dvq = vec![Complex64::new(0.0, 0.0); n];
                for r in 0..n {
                    for s in 0..n {
                        dvq[r] += d[(r, s)] * cols[q][s];
                    }
                }
                let num: Complex64 = cols[p].iter().zip(&dvq).map(|(a, b)| a.conj() * b).sum();
                let c = num / (vals[p] - vals[q]);
                let outer = CMat::outer(&cols[p], &cols[q]);
                ej.axpy(c, &outer);
            }
        }
        let ej_full = ej.add(&ej.adjoint());
        derivs.push(ej_full);
    }
    Ok((e, derivs))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// b_n = (-1)^(n/2) / ((2 pi i)^(n/2) (n/2)!), n even.
pub fn b_even(n: usize) -> Complex64 {
    assert!(n % 2 == 0 && n > 0, "b_even requires even positive n");
    let half = n / 2;
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    Complex64::new(sign, 0.0) / (two_pi_i.powu(half as u32) * factorial(half))
}

/// The even cocycle Ch^n on one tuple (n = tuple degree, even >= 2):
/// b_n * integral of sum_sigma sgn Tr(e(t) E_sigma(1) ... E_sigma(n)).
pub fn ch_even(sample: &ProjectorSample, tuple: &Tuple, cfg: &QuadConfig) -> Result<Complex64> {
    let n = tuple.degree();
    if n % 2 != 0 || n == 0 {
        return Err(Error::Domain(format!("ch_even requires even degree >= 2, got {n}")));
    }
    let path = even_path(sample, tuple)?;
    let integral = integrate_cfg(
        |t| {
            let a = path.a_at(t).hermitian_part();
            let (e, derivs) = projector_and_derivatives(&a, path.deltas())?;
            Ok(antisym_trace_product(&derivs, Some(&e)))
        },
        n,
        cfg,
    )?;
    Ok(b_even(n) * integral)
}

pub fn ch_even_cochain(sample: Arc<ProjectorSample>, n: usize, cfg: QuadConfig) -> Cochain {
    let gap = sample.rho();
    Cochain::new(n, gap, move |tuple: &Tuple| ch_even(&sample, tuple, &cfg))
}

/// Orthonormal column basis of range(e) from the eigenvectors above 1/2.
fn range_basis(e: &CMat, expected_rank: usize) -> Result<Vec<Vec<Complex64>>> {
    let (vals, vecs) = e.herm_eig()?;
    let n = e.dim();
    let mut cols = Vec::new();
    for i in 0..n {
        if vals[i] > 0.5 {
            cols.push(vecs.col(i));
        }
    }
    if cols.len() != expected_rank {
        return Err(Error::RankMismatch(format!(
            "range basis has {} columns, expected rank {expected_rank}",
            cols.len()
        )));
    }
    Ok(cols)
}

/// Overlap matrix (A* B)_{ij} = <a_i, b_j> between two column families.
fn overlap(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> CMat {
    let r = a.len();
    CMat::from_fn(r, |i, j| {
        a[i].iter().zip(&b[j]).map(|(x, y)| x.conj() * y).sum()
    })
}

pub(crate) fn triple_phase_from_bases(
    b0: &[Vec<Complex64>],
    b1: &[Vec<Complex64>],
    b2: &[Vec<Complex64>],
) -> Result<f64> {
    let w = overlap(b0, b2).matmul(&overlap(b2, b1)).matmul(&overlap(b1, b0));
    let dist = w.sub(&CMat::identity(w.dim())).op_norm()?;
    if dist >= 1.0 {
        return Err(Error::GapViolation(format!(
            "cyclic overlap operator too far from identity: ||W - I|| = {dist:.6}"
        )));
    }
    let ld = w.principal_log_det()?;
    Ok(ld.im / (2.0 * std::f64::consts::PI))
}

/// Triple-projection phase cocycle: with orthonormal bases B_k of the ranges,
/// W = (B_0* B_2)(B_2* B_1)(B_1* B_0) is the cyclic composition of orthogonal
/// projections expressed on range(e(x_0)), and
/// phi(x_0, x_1, x_2) = Im log det(W) / (2 pi), principal branch.
/// Basis-independent: changing any basis conjugates W or cancels.
///
/// The 1/(2 pi) normalization makes phi agree with Ch^2 at the level of
/// pairings with cycles (for rank one this is the Bargmann-invariant phase
/// divided by the flux quantum).
pub fn triple_phase(sample: &ProjectorSample, x0: usize, x1: usize, x2: usize) -> Result<f64> {
    sample.check_gap(&[x0, x1, x2])?;
    let r = sample.rank();
    let b0 = range_basis(sample.mat(x0), r)?;
    let b1 = range_basis(sample.mat(x1), r)?;
    let b2 = range_basis(sample.mat(x2), r)?;
    triple_phase_from_bases(&b0, &b1, &b2)
}

pub fn triple_phase_cochain(sample: Arc<ProjectorSample>) -> Cochain {
    let gap = sample.rho();
    Cochain::new(2, gap, move |tuple: &Tuple| {
        triple_phase(&sample, tuple.0[0], tuple.0[1], tuple.0[2])
            .map(|v| Complex64::new(v, 0.0))
    })
}

/// Transgression values along a projector homotopy, one per tau-grid point:
/// T_tau(x_0..x_{n-1}) = b_n * integral over the (n-1)-simplex of
/// sum_{j=1..n} (-1)^(j-1) Tr e (de)^{j-1} (de/dtau) (de)^{n-j},
/// with de/dtau by finite differences of the interpolated spectral projector
/// across the tau grid. The (-1)^(j-1) makes
/// d/dtau Ch^n = coboundary of T_tau hold with a plus sign (graded Leibniz
/// bookkeeping; verified against finite differences of Ch^n).
pub fn even_transgression_values(
    family: &[ProjectorSample],
    tuple: &Tuple,
    n: usize,
    cfg: &QuadConfig,
) -> Result<Vec<Complex64>> {
    if family.len() < 3 {
        return Err(Error::InvalidInput("family needs at least 3 tau samples".into()));
    }
    if tuple.len() != n {
        return Err(Error::InvalidInput(format!(
            "transgression of degree {n} expects a tuple of {n} points"
        )));
    }
    let bn = b_even(n);
    let perms = permutations_with_sign(n - 1);
    let mut out = Vec::with_capacity(family.len());
    for (s, sample) in family.iter().enumerate() {
        sample
            .check_gap(&tuple.0)
            .map_err(|e| Error::GapViolation(format!("tau index {s}: {e}")))?;
        let paths: Vec<EvenPath> = family
            .iter()
            .map(|smp| {
                let base = smp.mat(tuple.0[0]).clone();
                let deltas = tuple.0[1..]
                    .iter()
                    .map(|&id| smp.mat(id).sub(&base))
                    .collect();
                EvenPath { base, deltas, rank: smp.rank }
            })
            .collect();
        let value = integrate_cfg(
            |t| {
                let a = paths[s].a_at(t).hermitian_part();
                let (e, derivs) = projector_and_derivatives(&a, paths[s].deltas())?;
                // de/dtau at this node, differencing the projector itself
                let e_over_tau: Vec<CMat> = paths
                    .iter()
                    .map(|p| spectral_projector(&p.a_at(t).hermitian_part()))
                    .collect::<Result<Vec<_>>>()?;
                let edot = grid_derivative(&e_over_tau, s);
                let mut total = Complex64::new(0.0, 0.0);
                for j in 1..=n {
                    let jsign = if j % 2 == 0 { -1.0 } else { 1.0 };
                    for (p, psign) in &perms {
                        let mut prod = e.clone();
                        for &idx in &p[..j - 1] {
                            prod = prod.matmul(&derivs[idx]);
                        }
                        prod = prod.matmul(&edot);
                        for &idx in &p[j - 1..] {
                            prod = prod.matmul(&derivs[idx]);
                        }
                        total += prod.trace() * (jsign * psign);
                    }
                }
                Ok(total)
            },
            n - 1,
            cfg,
        )?;
        out.push(bn * value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// (1/2)(I + v . sigma) for |v| <= 1; rank-1 projector when |v| = 1.
    fn half_spin(v: [f64; 3]) -> CMat {
        CMat::from_rows(&[
            vec![c(0.5 * (1.0 + v[2]), 0.0), c(0.5 * v[0], -0.5 * v[1])],
            vec![c(0.5 * v[0], 0.5 * v[1]), c(0.5 * (1.0 - v[2]), 0.0)],
        ])
        .unwrap()
    }

    fn expi(h: &CMat) -> CMat {
        let n = h.dim();
        let mut acc = CMat::identity(n);
        let mut term = CMat::identity(n);
        for k in 1..80 {
            term = term.matmul(h).scale(c(0.0, 1.0 / k as f64));
            acc = acc.add(&term);
            if term.fro_norm() < 1e-18 {
                break;
            }
        }
        acc
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
        CMat::from_fn(n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).hermitian_part()
    }

    /// Random rank-r projector rotated by small unitaries: returns `count`
    /// nearby projectors.
    fn nearby_projectors(
        rng: &mut impl Rng,
        n: usize,
        r: usize,
        count: usize,
        spread: f64,
    ) -> Vec<CMat> {
        let h = random_hermitian(rng, n);
        let (_, v) = h.herm_eig().unwrap();
        let mut base = CMat::zeros(n);
        for i in 0..r {
            let col = v.col(i);
            base.axpy(c(1.0, 0.0), &CMat::outer(&col, &col));
        }
        (0..count)
            .map(|_| {
                let g = random_hermitian(rng, n).scale(c(spread, 0.0));
                let u = expi(&g);
                u.matmul(&base).matmul(&u.adjoint()).hermitian_part()
            })
            .collect()
    }

    #[test]
    fn sample_validation() {
        let not_proj = CMat::from_diag(&[c(0.3, 0.0), c(0.7, 0.0)]);
        assert!(ProjectorSample::new(vec![not_proj], 0.3).is_err());
        let p0 = half_spin([0.0, 0.0, 1.0]);
        assert!(ProjectorSample::new(vec![p0.clone()], 0.6).is_err()); // rho >= 1/2
        let p1 = half_spin([0.1, 0.0, (1.0f64 - 0.01).sqrt()]);
        let s = ProjectorSample::new(vec![p0.clone(), p1], 0.3).unwrap();
        assert_eq!(s.rank(), 1);
        // mixed ranks rejected
        let rank2 = CMat::identity(2);
        assert!(matches!(
            ProjectorSample::new(vec![p0, rank2], 0.3),
            Err(Error::RankMismatch(_))
        ));
    }

    #[test]
    fn even_path_certificate_two_rank1_projectors() {
        // angle theta between the two Bloch vectors: ||e1 - e0|| = sin(theta/2) * ...
        // (chord/2 in Bloch coordinates); midpoint eigenvalues (1 +- |h|)/2.
        let theta: f64 = 0.6;
        let p0 = half_spin([0.0, 0.0, 1.0]);
        let p1 = half_spin([theta.sin(), 0.0, theta.cos()]);
        let gap = p1.sub(&p0).op_norm().unwrap();
        let s = ProjectorSample::new(vec![p0, p1], gap + 0.01).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1])).unwrap();
        let cert = path.gap_certificate().unwrap();
        // analytic: at midpoint h = (sin t/2, 0, (1+cos t)/2), eigenvalues
        // (1 +- |h|)/2, distance to 1/2 is |h|/2 with |h| = cos(theta/2).
        let expect = (theta / 2.0).cos() / 2.0;
        assert!((cert - expect).abs() < 1e-10, "{cert} vs {expect}");
        assert!(cert >= 0.5 - s.rho() - 1e-12);
    }

    #[test]
    fn spectral_projector_fixed_point_and_threshold() {
        let p = half_spin([0.6, 0.0, 0.8]);
        let e = spectral_projector(&p).unwrap();
        assert!(e.sub(&p).op_norm().unwrap() < 1e-12);

        let a = CMat::from_diag(&[c(0.9, 0.0)]);
        assert!(spectral_projector(&a).unwrap().sub(&CMat::identity(1)).fro_norm() < 1e-14);
        let b = CMat::from_diag(&[c(0.1, 0.0)]);
        assert!(spectral_projector(&b).unwrap().fro_norm() < 1e-14);

        let close = CMat::from_diag(&[c(0.5 + 1e-9, 0.0)]);
        assert!(matches!(spectral_projector(&close), Err(Error::SpectralGap(_))));
    }

    #[test]
    fn contour_projector_examples() {
        let a = CMat::from_diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let e = spectral_projector_contour(&a, 64).unwrap();
        assert!(e.sub(&CMat::from_diag(&[c(0.0, 0.0), c(1.0, 0.0)])).op_norm().unwrap() < 1e-12);

        let b = CMat::from_diag(&[c(0.2, 0.0), c(0.8, 0.0)]);
        let eb = spectral_projector_contour(&b, 64).unwrap();
        assert!(eb.sub(&CMat::from_diag(&[c(0.0, 0.0), c(1.0, 0.0)])).op_norm().unwrap() < 1e-10);

        assert!(spectral_projector_contour(&b, 16).is_err());
    }

    #[test]
    fn contour_error_decays_geometrically() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mats = nearby_projectors(&mut rng, 4, 2, 2, 0.05);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1])).unwrap();
        let a = path.a_at(&[0.5, 0.5]).hermitian_part();
        let exact = spectral_projector(&a).unwrap();
        let e32 = spectral_projector_contour(&a, 32).unwrap().sub(&exact).op_norm().unwrap();
        let e64 = spectral_projector_contour(&a, 64).unwrap().sub(&exact).op_norm().unwrap();
        // doubling the nodes should square the (geometric) error, modulo floor
        assert!(e64 < e32 * e32 * 10.0 + 1e-13, "e32 {e32} e64 {e64}");
    }

    #[test]
    fn series_constant_sample_is_base() {
        let p = half_spin([0.0, 0.0, 1.0]);
        let path = EvenPath::from_parts(p.clone(), vec![CMat::zeros(2)], 1);
        for k in [0, 1, 5] {
            let e = projector_series(&path, &[0.3, 0.7], k).unwrap();
            assert!(e.sub(&p).fro_norm() < 1e-15);
        }
    }

    #[test]
    fn series_k1_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mats = nearby_projectors(&mut rng, 3, 1, 2, 0.1);
        let e0 = mats[0].clone();
        let d = mats[1].sub(&mats[0]);
        let path = EvenPath::from_parts(e0.clone(), vec![d.clone()], 1);
        let t = 0.6;
        let got = projector_series(&path, &[1.0 - t, t], 1).unwrap();
        // e0 + e0 dt (1 - e0) + (1 - e0) dt e0
        let dt = d.scale(c(t, 0.0));
        let one = CMat::identity(3);
        let om = one.sub(&e0);
        let expect = e0
            .add(&e0.matmul(&dt).matmul(&om))
            .add(&om.matmul(&dt).matmul(&e0));
        assert!(got.sub(&expect).fro_norm() < 1e-14);
    }

    #[test]
    fn series_converges_to_spectral_projector() {
        // pair with gap pinned to 0.3; at the simplex midpoint ||delta(t)||
        // is 0.15 and the word series contracts by about 2 * 0.15 = rho
        let s = crate::checks::random_projector_pair(19, 0.3).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1])).unwrap();
        let t = [0.5, 0.5];
        let exact = spectral_projector(&path.a_at(&t).hermitian_part()).unwrap();
        let mut prev_err = f64::INFINITY;
        let mut ratios = Vec::new();
        for k in 1..=10 {
            let approx = projector_series(&path, &t, k).unwrap();
            let err = approx.sub(&exact).op_norm().unwrap();
            if k >= 3 {
                ratios.push(err / prev_err);
            }
            prev_err = err;
        }
        let k10_err = prev_err;
        assert!(k10_err < 1e-4, "K=10 error {k10_err}");
        let mean_ratio = ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64);
        assert!(mean_ratio < 0.45, "series contraction ratio {mean_ratio}");
    }

    #[test]
    fn series_rejects_large_k() {
        let p = half_spin([0.0, 0.0, 1.0]);
        let path = EvenPath::from_parts(p, vec![CMat::zeros(2)], 1);
        assert!(matches!(
            projector_series(&path, &[1.0, 0.0], 17),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn derivative_constant_sample_vanishes() {
        let p = half_spin([0.0, 0.0, 1.0]);
        let (_, derivs) = projector_and_derivatives(&p, &[CMat::zeros(2)]).unwrap();
        assert!(derivs[0].fro_norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mats = nearby_projectors(&mut rng, 4, 2, 3, 0.06);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1, 2])).unwrap();
        let t = [0.4, 0.35, 0.25];
        let a = path.a_at(&t).hermitian_part();
        let (_, derivs) = projector_and_derivatives(&a, path.deltas()).unwrap();
        let h = 1e-5;
        for j in 0..2 {
            let mut tp = t;
            let mut tm = t;
            tp[j + 1] += h;
            tm[j + 1] -= h;
            let ep = spectral_projector(&path.a_at(&tp).hermitian_part()).unwrap();
            let em = spectral_projector(&path.a_at(&tm).hermitian_part()).unwrap();
            let fd = ep.sub(&em).scale(c(1.0 / (2.0 * h), 0.0));
            let err = fd.sub(&derivs[j]).op_norm().unwrap();
            assert!(err < 1e-7, "finite-difference mismatch {err}");
        }
    }

    #[test]
    fn derivative_matches_2x2_closed_form() {
        // rotating rank-1 family: path between (1/2)(I + n(0).sigma) and
        // (1/2)(I + n(s).sigma); e(t) = (1/2)(I + hhat(t).sigma) with
        // h(t) = (1-t) n0 + t n1.
        let s1: f64 = 0.5;
        let n0 = [0.0, 0.0, 1.0];
        let n1 = [s1.sin(), 0.0, s1.cos()];
        let p0 = half_spin(n0);
        let p1 = half_spin(n1);
        let sample = ProjectorSample::new(vec![p0, p1], 0.4).unwrap();
        let path = even_path(&sample, &Tuple::new([0, 1])).unwrap();
        let t = 0.3;
        let a = path.a_at(&[1.0 - t, t]).hermitian_part();
        let (_, derivs) = projector_and_derivatives(&a, path.deltas()).unwrap();
        // analytic: h(t), hdot = n1 - n0; dhhat = (I - hhat hhat^T) hdot / |h|
        let h = [
            (1.0 - t) * n0[0] + t * n1[0],
            (1.0 - t) * n0[1] + t * n1[1],
            (1.0 - t) * n0[2] + t * n1[2],
        ];
        let hn = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        let hhat = [h[0] / hn, h[1] / hn, h[2] / hn];
        let hdot = [n1[0] - n0[0], n1[1] - n0[1], n1[2] - n0[2]];
        let dot = hhat[0] * hdot[0] + hhat[1] * hdot[1] + hhat[2] * hdot[2];
        let dh = [
            (hdot[0] - dot * hhat[0]) / hn,
            (hdot[1] - dot * hhat[1]) / hn,
            (hdot[2] - dot * hhat[2]) / hn,
        ];
        let expect = CMat::from_rows(&[
            vec![c(0.5 * dh[2], 0.0), c(0.5 * dh[0], -0.5 * dh[1])],
            vec![c(0.5 * dh[0], 0.5 * dh[1]), c(-0.5 * dh[2], 0.0)],
        ])
        .unwrap();
        assert!(derivs[0].sub(&expect).op_norm().unwrap() < 1e-12);
    }

    #[test]
    fn derivative_off_diagonal_identities() {
        // e E e = 0 and (1-e) E (1-e) = 0
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mats = nearby_projectors(&mut rng, 5, 2, 3, 0.05);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1, 2])).unwrap();
        let a = path.a_at(&[0.5, 0.3, 0.2]).hermitian_part();
        let (e, derivs) = projector_and_derivatives(&a, path.deltas()).unwrap();
        let one = CMat::identity(5);
        let om = one.sub(&e);
        for ej in &derivs {
            assert!(e.matmul(ej).matmul(&e).op_norm().unwrap() < 1e-9);
            assert!(om.matmul(ej).matmul(&om).op_norm().unwrap() < 1e-9);
            assert!(ej.sub(&ej.adjoint()).op_norm().unwrap() < 1e-10);
        }
    }

    #[test]
    fn ch_even_parity_and_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = QuadConfig::default();
        let mats = nearby_projectors(&mut rng, 3, 1, 2, 0.05);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        assert!(matches!(
            ch_even(&s, &Tuple::new([0, 1]), &cfg),
            Err(Error::Domain(_))
        ));
        let p = half_spin([0.0, 0.0, 1.0]);
        let cs = ProjectorSample::new(vec![p.clone(), p.clone(), p], 0.45).unwrap();
        let v = ch_even(&cs, &Tuple::new([0, 1, 2]), &cfg).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn odd_degree_even_integrand_vanishes() {
        // Tr e (de)^n = 0 for odd n (the F dF F = 0 mechanism)
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mats = nearby_projectors(&mut rng, 4, 2, 4, 0.04);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1, 2, 3])).unwrap();
        let t = [0.3, 0.3, 0.2, 0.2];
        let a = path.a_at(&t).hermitian_part();
        let (e, derivs) = projector_and_derivatives(&a, path.deltas()).unwrap();
        // n = 3 antisymmetrized
        let v = antisym_trace_product(&derivs, Some(&e));
        assert!(v.norm() < 1e-12, "odd-degree integrand {v}");
        // n = 1: single derivative
        for ej in &derivs {
            let tr = e.matmul(ej).trace();
            assert!(tr.norm() < 1e-12);
        }
    }

    #[test]
    fn ch_even_conjugation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mats = nearby_projectors(&mut rng, 3, 1, 3, 0.05);
        let g = expi(&random_hermitian(&mut rng, 3));
        let conj: Vec<CMat> = mats
            .iter()
            .map(|m| g.matmul(m).matmul(&g.adjoint()).hermitian_part())
            .collect();
        let cfg = QuadConfig::default().with_subdiv(2);
        let s0 = ProjectorSample::new(mats, 0.45).unwrap();
        let s1 = ProjectorSample::new(conj, 0.45).unwrap();
        let t = Tuple::new([0, 1, 2]);
        let v0 = ch_even(&s0, &t, &cfg).unwrap();
        let v1 = ch_even(&s1, &t, &cfg).unwrap();
        assert!((v0 - v1).norm() < 1e-12);
        let p0 = triple_phase(&s0, 0, 1, 2).unwrap();
        let p1 = triple_phase(&s1, 0, 1, 2).unwrap();
        assert!((p0 - p1).abs() < 1e-12);
    }

    #[test]
    fn triple_phase_coincident_and_rank1_reduction() {
        let p = half_spin([0.0, 0.0, 1.0]);
        let q = half_spin([0.05f64.sin(), 0.0, 0.05f64.cos()]);
        let r = half_spin([0.0, 0.03f64.sin(), 0.03f64.cos()]);
        let s = ProjectorSample::new(vec![p, q, r], 0.45).unwrap();
        assert!(triple_phase(&s, 0, 0, 0).unwrap().abs() < 1e-15);

        // rank-1 reduction: phi = arg(<v0,v2><v2,v1><v1,v0>)/(2 pi)
        let v = |m: &CMat| range_basis(m, 1).unwrap()[0].clone();
        let v0 = v(s.mat(0));
        let v1 = v(s.mat(1));
        let v2 = v(s.mat(2));
        let ip = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        let bargmann = (ip(&v0, &v2) * ip(&v2, &v1) * ip(&v1, &v0)).arg();
        let expect = bargmann / (2.0 * std::f64::consts::PI);
        let got = triple_phase(&s, 0, 1, 2).unwrap();
        assert!((got - expect).abs() < 1e-13, "{got} vs {expect}");
    }

    #[test]
    fn triple_phase_basis_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mats = nearby_projectors(&mut rng, 4, 2, 3, 0.05);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let b0 = range_basis(s.mat(0), 2).unwrap();
        let b1 = range_basis(s.mat(1), 2).unwrap();
        let b2 = range_basis(s.mat(2), 2).unwrap();
        let reference = triple_phase_from_bases(&b0, &b1, &b2).unwrap();

        // re-randomize each basis by a 2x2 unitary
        let rot = |basis: &[Vec<Complex64>], rng: &mut ChaCha8Rng| -> Vec<Vec<Complex64>> {
            let q = expi(&random_hermitian(rng, 2));
            let n = basis[0].len();
            (0..2)
                .map(|jnew| {
                    (0..n)
                        .map(|row| {
                            (0..2).map(|jold| basis[jold][row] * q[(jold, jnew)]).sum()
                        })
                        .collect()
                })
                .collect()
        };
        for _ in 0..5 {
            let r0 = rot(&b0, &mut rng);
            let r1 = rot(&b1, &mut rng);
            let r2 = rot(&b2, &mut rng);
            let v = triple_phase_from_bases(&r0, &r1, &r2).unwrap();
            assert!((v - reference).abs() < 1e-12, "{v} vs {reference}");
        }
    }

    #[test]
    fn triple_phase_is_a_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let mats = nearby_projectors(&mut rng, 3, 1, 4, 0.04);
        let s = Arc::new(ProjectorSample::new(mats, 0.45).unwrap());
        let phi = triple_phase_cochain(s);
        let d = phi.coboundary();
        let v = d.eval(&Tuple::new([0, 1, 2, 3])).unwrap();
        assert!(v.norm() < 1e-10, "d phi = {v}");
    }

    #[test]
    fn rank_trace_conserved_along_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mats = nearby_projectors(&mut rng, 5, 2, 3, 0.05);
        let s = ProjectorSample::new(mats, 0.45).unwrap();
        let path = even_path(&s, &Tuple::new([0, 1, 2])).unwrap();
        for t in [[1.0, 0.0, 0.0], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8]] {
            let e = spectral_projector(&path.a_at(&t).hermitian_part()).unwrap();
            assert!((e.trace().re - 2.0).abs() < 1e-9);
            assert!(e.matmul(&e).sub(&e).op_norm().unwrap() < 1e-10);
            assert!(e.sub(&e.adjoint()).op_norm().unwrap() < 1e-10);
        }
    }

    #[test]
    fn even_transgression_constant_family_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let mats = nearby_projectors(&mut rng, 3, 1, 2, 0.05);
        let fam: Vec<ProjectorSample> = (0..5)
            .map(|_| ProjectorSample::new(mats.clone(), 0.45).unwrap())
            .collect();
        let cfg = QuadConfig::default();
        let vals = even_transgression_values(&fam, &Tuple::new([0, 1]), 2, &cfg).unwrap();
        for v in vals {
            assert!(v.norm() < 1e-10, "constant family T = {v}");
        }
    }

    #[test]
    fn even_transgression_identity_small_family() {
        // position-dependent rotation family: e_tau(x) = R(x,tau) e(x) R*(x,tau)
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mats = nearby_projectors(&mut rng, 3, 1, 3, 0.03);
        let gens: Vec<CMat> = (0..3)
            .map(|_| random_hermitian(&mut rng, 3).scale(c(0.12, 0.0)))
            .collect();
        let grid = 129;
        let fam: Vec<ProjectorSample> = (0..grid)
            .map(|s| {
                let tau = s as f64 / (grid - 1) as f64;
                let rotated: Vec<CMat> = mats
                    .iter()
                    .zip(&gens)
                    .map(|(m, g)| {
                        let u = expi(&g.scale(c(tau, 0.0)));
                        u.matmul(m).matmul(&u.adjoint()).hermitian_part()
                    })
                    .collect();
                ProjectorSample::new(rotated, 0.49).unwrap()
            })
            .collect();
        let cfg = QuadConfig::default().with_tol(1e-11);
        let tup = Tuple::new([0, 1, 2]);
        let lhs = ch_even(&fam[grid - 1], &tup, &cfg).unwrap()
            - ch_even(&fam[0], &tup, &cfg).unwrap();
        // rhs: d (int T) on (0,1,2) = int T(1,2) - int T(0,2) + int T(0,1)
        let int_t = |a: usize, b: usize| -> Complex64 {
            let vals =
                even_transgression_values(&fam, &Tuple::new([a, b]), 2, &cfg).unwrap();
            crate::chern_odd::trapezoid_unit(&vals)
        };
        let rhs = int_t(1, 2) - int_t(0, 2) + int_t(0, 1);
        assert!(
            (lhs - rhs).norm() < 1e-6,
            "transgression identity residual {}",
            (lhs - rhs).norm()
        );
    }
}
