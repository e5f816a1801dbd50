//! Odd Chern character cocycles from unitary-valued samples.
//!
//! A sample assigns a unitary U(x) to each point. On a tuple of nearby points
//! (all pairwise distances below rho < 1) the affine interpolation
//! U(t) = U(x_0) + sum_j t_j (U(x_j) - U(x_0)) stays invertible over the
//! simplex, and the degree-n cochain is the simplex integral of the
//! antisymmetrized trace of (U^{-1} dU)^n times the constant c_n. The n = 1
//! case has the closed form (2 pi i)^{-1} log det(U(x_0)^{-1} U(x_1)).

use std::sync::Arc;

use num_complex::Complex64;

use crate::ascomplex::{Cochain, Tuple};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::perm::permutations_with_sign;
use crate::quad::{integrate_cfg, QuadConfig};

/// Unitary-valued sample points with a proximity bound rho < 1.
#[derive(Clone)]
pub struct UnitarySample {
    matrix_size: usize,
    mats: Vec<CMat>,
    rho: f64,
}

impl UnitarySample {
    /// Validates unitarity of every matrix (||M*M - I|| < 1e-10) and
    /// 0 < rho < 1.
    pub fn new(mats: Vec<CMat>, rho: f64) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("empty unitary sample".into()));
        }
        let n = mats[0].dim();
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidInput(format!("rho = {rho} outside (0, 1)")));
        }
        let eye = CMat::identity(n);
        for (i, m) in mats.iter().enumerate() {
            if m.dim() != n {
                return Err(Error::InvalidInput("mixed matrix sizes in sample".into()));
            }
            if !m.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite matrix at point {i}")));
            }
            let defect = m.adjoint().matmul(m).sub(&eye).op_norm()?;
            if defect > 1e-10 {
                return Err(Error::ContractViolation(format!(
                    "matrix at point {i} not unitary (defect {defect:.3e})"
                )));
            }
        }
        Ok(UnitarySample { matrix_size: n, mats, rho })
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

    pub fn mat(&self, id: usize) -> &CMat {
        &self.mats[id]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    /// Largest pairwise operator-norm distance over the ids.
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

    /// Errors unless all pairwise distances over the tuple are below rho.
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

/// Affine unitary interpolation over the simplex spanned by a tuple:
/// U(t) = base + sum t_j delta_j with delta_j = U(x_j) - U(x_0).
pub struct OddPath {
    base: CMat,
    deltas: Vec<CMat>,
}

impl OddPath {
    pub fn from_parts(base: CMat, deltas: Vec<CMat>) -> Self {
        OddPath { base, deltas }
    }

    pub fn base(&self) -> &CMat {
        &self.base
    }

    pub fn deltas(&self) -> &[CMat] {
        &self.deltas
    }

    /// U(t) at a barycentric node (t_0, ..., t_n); only t_1.. enter since
    /// delta_0 = 0.
    pub fn value_at(&self, t_bary: &[f64]) -> CMat {
        let mut u = self.base.clone();
        for (j, d) in self.deltas.iter().enumerate() {
            u.axpy(Complex64::new(t_bary[j + 1], 0.0), d);
        }
        u
    }

    /// Top-form coefficient of Tr (U^{-1} dU)^n at the node:
    /// sum over permutations of sgn * Tr prod U^{-1} delta_sigma(i).
    pub fn integrand(&self, t_bary: &[f64]) -> Result<Complex64> {
        let u = self.value_at(t_bary);
        let ui = u.inverse().map_err(|e| {
            Error::Singular(format!("interpolated unitary singular at node {t_bary:?}: {e}"))
        })?;
        let ms: Vec<CMat> = self.deltas.iter().map(|d| ui.matmul(d)).collect();
        Ok(antisym_trace_product(&ms, None))
    }
}

/// sum over permutations sigma of sgn(sigma) Tr [pre] M_sigma(1) ... M_sigma(n).
pub(crate) fn antisym_trace_product(ms: &[CMat], pre: Option<&CMat>) -> Complex64 {
    let n = ms.len();
    if n == 0 {
        return match pre {
            Some(p) => p.trace(),
            None => Complex64::new(0.0, 0.0),
        };
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, sign) in permutations_with_sign(n) {
        let mut prod = match pre {
            Some(m) => m.matmul(&ms[p[0]]),
            None => ms[p[0]].clone(),
        };
        for &idx in &p[1..] {
            prod = prod.matmul(&ms[idx]);
        }
        acc += prod.trace() * sign;
    }
    acc
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// c_n = (-1)^((n-1)/2) ((n-1)/2)! / ((2 pi i)^((n+1)/2) n!), n odd.
pub fn c_odd(n: usize) -> Complex64 {
    assert!(n % 2 == 1, "c_odd requires odd n");
    let m = (n - 1) / 2;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let denom = two_pi_i.powu(((n + 1) / 2) as u32) * factorial(n);
    Complex64::new(sign * factorial(m), 0.0) / denom
}

/// Build the interpolation path for a tuple after checking the gap.
pub fn odd_path(sample: &UnitarySample, tuple: &Tuple) -> Result<OddPath> {
    sample.check_gap(&tuple.0)?;
    let base = sample.mat(tuple.0[0]).clone();
    let deltas = tuple.0[1..]
        .iter()
        .map(|&id| sample.mat(id).sub(&base))
        .collect();
    Ok(OddPath { base, deltas })
}

/// The odd cocycle Ch^n on one tuple (n = tuple degree, odd):
/// c_n * integral over the n-simplex of the interpolation integrand.
pub fn ch_odd(sample: &UnitarySample, tuple: &Tuple, cfg: &QuadConfig) -> Result<Complex64> {
    let n = tuple.degree();
    if n % 2 == 0 {
        return Err(Error::Domain(format!("ch_odd requires odd degree, got {n}")));
    }
    let path = odd_path(sample, tuple)?;
    let integral = integrate_cfg(|t| path.integrand(t), n, cfg)?;
    Ok(c_odd(n) * integral)
}

/// Ch^n as a cochain usable by the Alexander-Spanier machinery.
pub fn ch_odd_cochain(sample: Arc<UnitarySample>, n: usize, cfg: QuadConfig) -> Cochain {
    let gap = sample.rho();
    Cochain::new(n, gap, move |tuple: &Tuple| ch_odd(&sample, tuple, &cfg))
}

/// Closed form at n = 1: (2 pi i)^{-1} log det(U(x_0)^{-1} U(x_1)) with the
/// principal branch (valid because the gap keeps the argument near I).
pub fn ch1_closed(sample: &UnitarySample, x0: usize, x1: usize) -> Result<Complex64> {
    sample.check_gap(&[x0, x1])?;
    let a = sample.mat(x0).inverse()?.matmul(sample.mat(x1));
    let ld = a.principal_log_det()?;
    Ok(ld / Complex64::new(0.0, 2.0 * std::f64::consts::PI))
}

pub fn ch1_closed_cochain(sample: Arc<UnitarySample>) -> Cochain {
    let gap = sample.rho();
    Cochain::new(1, gap, move |tuple: &Tuple| ch1_closed(&sample, tuple.0[0], tuple.0[1]))
}

/// Time derivative of a uniformly sampled family by second-order finite
/// differences: central in the interior, one-sided at the ends.
pub(crate) fn grid_derivative(mats_over_tau: &[CMat], s: usize) -> CMat {
    let m = mats_over_tau.len();
    assert!(m >= 3, "family needs at least 3 tau samples");
    let h = 1.0 / (m as f64 - 1.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    if s == 0 {
        let mut d = mats_over_tau[0].scale(c(-3.0 / (2.0 * h)));
        d.axpy(c(4.0 / (2.0 * h)), &mats_over_tau[1]);
        d.axpy(c(-1.0 / (2.0 * h)), &mats_over_tau[2]);
        d
    } else if s == m - 1 {
        let mut d = mats_over_tau[m - 1].scale(c(3.0 / (2.0 * h)));
        d.axpy(c(-4.0 / (2.0 * h)), &mats_over_tau[m - 2]);
        d.axpy(c(1.0 / (2.0 * h)), &mats_over_tau[m - 3]);
        d
    } else {
        let mut d = mats_over_tau[s + 1].scale(c(1.0 / (2.0 * h)));
        d.axpy(c(-1.0 / (2.0 * h)), &mats_over_tau[s - 1]);
        d
    }
}

/// Transgression cochain values along a homotopy, one per tau-grid point:
/// T_tau(x_0..x_{n-1}) = c_n n * integral over the (n-1)-simplex of
/// Tr U^{-1} (dU/dtau) (U^{-1} dU)^{n-1}. dU/dtau comes from finite
/// differences of the sampled family on the uniform tau grid.
pub fn odd_transgression_values(
    family: &[UnitarySample],
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
    let cn = c_odd(n) * (n as f64);
    let mut out = Vec::with_capacity(family.len());
    for (s, sample) in family.iter().enumerate() {
        sample
            .check_gap(&tuple.0)
            .map_err(|e| Error::GapViolation(format!("tau index {s}: {e}")))?;
        // affine interpolation of both U and dU/dtau over the (n-1)-simplex
        let base = sample.mat(tuple.0[0]).clone();
        let deltas: Vec<CMat> = tuple.0[1..]
            .iter()
            .map(|&id| sample.mat(id).sub(&base))
            .collect();
        let dot_per_point: Vec<CMat> = tuple
            .0
            .iter()
            .map(|&id| {
                let over_tau: Vec<CMat> =
                    family.iter().map(|smp| smp.mat(id).clone()).collect();
                grid_derivative(&over_tau, s)
            })
            .collect();
        let path = OddPath::from_parts(base, deltas);
        let value = if n == 1 {
            // 0-form on a point: no integral
            let u = path.value_at(&[1.0]);
            let ui = u.inverse()?;
            ui.matmul(&dot_per_point[0]).trace()
        } else {
            integrate_cfg(
                |t| {
                    let u = path.value_at(t);
                    let ui = u.inverse()?;
                    let ms: Vec<CMat> =
                        path.deltas().iter().map(|d| ui.matmul(d)).collect();
                    // affine udot at the node
                    let mut udot = dot_per_point[0].scale(Complex64::new(t[0], 0.0));
                    for (j, dm) in dot_per_point[1..].iter().enumerate() {
                        udot.axpy(Complex64::new(t[j + 1], 0.0), dm);
                    }
                    let pre = ui.matmul(&udot);
                    Ok(antisym_trace_product(&ms, Some(&pre)))
                },
                n - 1,
                cfg,
            )?
        };
        out.push(cn * value);
    }
    Ok(out)
}

/// Trapezoid rule on a uniform grid over [0, 1].
pub fn trapezoid_unit(values: &[Complex64]) -> Complex64 {
    let m = values.len();
    assert!(m >= 2);
    let h = 1.0 / (m as f64 - 1.0);
    let mut acc = (values[0] + values[m - 1]) * 0.5;
    for v in &values[1..m - 1] {
        acc += v;
    }
    acc * h
}
