//! The comparison map from Alexander-Spanier cochains to differential forms,
//! probed by finite differences along exact curves on the manifold, plus the
//! analytic target forms it should converge to.
//!
//! lambda(phi)_x0 (v_1..v_n) =
//!   (1/n!) sum_sigma sgn(sigma) d/de_1 ... d/de_n
//!   phi(x_0, x_sigma(1)(e_1), ..., x_sigma(n)(e_n)) at e = 0,
//! with the mixed partials by central differences (2^n stencil per
//! permutation), an O(h^2) approximation.

use std::sync::Arc;

use num_complex::Complex64;

use crate::ascomplex::{Cochain, Tuple};
use crate::chern_even::{b_even, ch_even_cochain, triple_phase_cochain, ProjectorSample};
use crate::chern_odd::{
    antisym_trace_product, c_odd, ch1_closed_cochain, ch_odd_cochain, UnitarySample,
};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::perm::permutations_with_sign;
use crate::quad::QuadConfig;

use super::{normalize, MatrixField, SampleKind};

type Curve = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A base point with n curves through it and their tangent vectors.
#[derive(Clone)]
pub struct TangentProbe {
    pub base: Vec<f64>,
    curves: Vec<Curve>,
    pub tangents: Vec<Vec<f64>>,
}

impl TangentProbe {
    pub fn new(base: Vec<f64>, curves: Vec<Curve>, tangents: Vec<Vec<f64>>) -> Self {
        assert_eq!(curves.len(), tangents.len());
        TangentProbe { base, curves, tangents }
    }

    pub fn arity(&self) -> usize {
        self.curves.len()
    }

    pub fn curve_point(&self, j: usize, eps: f64) -> Vec<f64> {
        (self.curves[j])(eps)
    }

    /// Probe on the unit circle at angle theta0 with the angular tangent.
    pub fn on_circle(theta0: f64) -> Self {
        let curve: Curve = Arc::new(move |e: f64| vec![(theta0 + e).cos(), (theta0 + e).sin()]);
        TangentProbe {
            base: vec![theta0.cos(), theta0.sin()],
            curves: vec![curve],
            tangents: vec![vec![-theta0.sin(), theta0.cos()]],
        }
    }

    /// Probe on the unit sphere in R^d along great circles with unit tangents
    /// orthogonal to the base point (checked).
    pub fn on_sphere(base: Vec<f64>, dirs: Vec<Vec<f64>>) -> Result<Self> {
        let base = normalize(&base);
        let mut curves: Vec<Curve> = Vec::new();
        let mut tangents = Vec::new();
        for w in dirs {
            let w = normalize(&w);
            let dot: f64 = base.iter().zip(&w).map(|(a, b)| a * b).sum();
            if dot.abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "probe direction not tangent (dot = {dot:.2e})"
                )));
            }
            let b = base.clone();
            let wc = w.clone();
            curves.push(Arc::new(move |e: f64| {
                b.iter().zip(&wc).map(|(x, y)| e.cos() * x + e.sin() * y).collect()
            }));
            tangents.push(w);
        }
        Ok(TangentProbe { base, curves, tangents })
    }

    /// Probe on the flat torus along coordinate-combination lines.
    pub fn on_torus(base: Vec<f64>, dirs: Vec<Vec<f64>>) -> Self {
        let mut curves: Vec<Curve> = Vec::new();
        for w in &dirs {
            let b = base.clone();
            let wc = w.clone();
            curves.push(Arc::new(move |e: f64| {
                b.iter().zip(&wc).map(|(x, y)| x + e * y).collect()
            }));
        }
        TangentProbe { base, curves, tangents: dirs }
    }
}

/// Which cocycle to probe.
#[derive(Clone, Copy, Debug)]
pub enum CochainSpec {
    /// Closed-form degree-1 odd cocycle.
    Ch1Closed,
    /// Quadrature odd cocycle of the given odd degree.
    ChOdd(usize),
    /// Quadrature even cocycle of the given even degree.
    ChEven(usize),
    /// Triple-projection phase (degree 2).
    TriplePhase,
}

impl CochainSpec {
    pub fn degree(&self) -> usize {
        match self {
            CochainSpec::Ch1Closed => 1,
            CochainSpec::ChOdd(n) => *n,
            CochainSpec::ChEven(n) => *n,
            CochainSpec::TriplePhase => 2,
        }
    }
}

/// Materialize the stencil points as a sample of the field and wrap the
/// requested cocycle over them.
fn stencil_cochain(
    field: &dyn MatrixField,
    spec: &CochainSpec,
    points: &[Vec<f64>],
    cfg: &QuadConfig,
) -> Result<Cochain> {
    let mats: Vec<CMat> = points.iter().map(|x| field.mat(x)).collect();
    let mut max_pairwise: f64 = 0.0;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            max_pairwise = max_pairwise.max(mats[a].sub(&mats[b]).op_norm()?);
        }
    }
    let cap = match field.kind() {
        SampleKind::Unitary => 0.95,
        SampleKind::Projector => 0.499,
    };
    if max_pairwise >= cap {
        return Err(Error::StepTooLarge(format!(
            "stencil spread {max_pairwise:.4} exceeds the gap bound {cap}"
        )));
    }
    let rho = (2.0 * max_pairwise).clamp(1e-3, cap);
    match (field.kind(), spec) {
        (SampleKind::Unitary, CochainSpec::Ch1Closed) => {
            Ok(ch1_closed_cochain(Arc::new(UnitarySample::new(mats, rho)?)))
        }
        (SampleKind::Unitary, CochainSpec::ChOdd(n)) => {
            Ok(ch_odd_cochain(Arc::new(UnitarySample::new(mats, rho)?), *n, *cfg))
        }
        (SampleKind::Projector, CochainSpec::ChEven(n)) => {
            Ok(ch_even_cochain(Arc::new(ProjectorSample::new(mats, rho)?), *n, *cfg))
        }
        (SampleKind::Projector, CochainSpec::TriplePhase) => {
            Ok(triple_phase_cochain(Arc::new(ProjectorSample::new(mats, rho)?)))
        }
        _ => Err(Error::InvalidInput("cochain spec does not match the sample kind".into())),
    }
}

/// Evaluate lambda(phi) at the probe with step h.
pub fn lambda_map(
    field: &dyn MatrixField,
    spec: &CochainSpec,
    probe: &TangentProbe,
    h: f64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let n = spec.degree();
    if probe.arity() < n {
        return Err(Error::InvalidInput(format!(
            "probe has {} curves, cochain degree is {n}",
            probe.arity()
        )));
    }
    // point table: 0 = base, then (plus, minus) per curve
    let mut points = vec![probe.base.clone()];
    for j in 0..n {
        points.push(probe.curve_point(j, h));
        points.push(probe.curve_point(j, -h));
    }
    let id_of = |j: usize, sign: f64| -> usize {
        if sign > 0.0 {
            1 + 2 * j
        } else {
            2 + 2 * j
        }
    };
    let phi = stencil_cochain(field, spec, &points, cfg).map_err(|e| match e {
        Error::GapViolation(d) => Error::StepTooLarge(d),
        other => other,
    })?;

    let mut total = Complex64::new(0.0, 0.0);
    for (perm, psign) in permutations_with_sign(n) {
        // 2^n central-difference stencil
        for mask in 0..(1u32 << n) {
            let mut ids = Vec::with_capacity(n + 1);
            ids.push(0);
            let mut ssign = 1.0;
            for (slot, &curve_idx) in perm.iter().enumerate() {
                let s = if mask >> slot & 1 == 1 { 1.0 } else { -1.0 };
                ssign *= s;
                ids.push(id_of(curve_idx, s));
            }
            let v = phi.eval(&Tuple::new(ids)).map_err(|e| match e {
                Error::GapViolation(d) => Error::StepTooLarge(d),
                other => other,
            })?;
            total += v * (psign * ssign);
        }
    }
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(total / ((2.0 * h).powi(n as i32) * fact))
}

/// The analytic odd form at a point: c_n (1/n!) sum_sigma sgn(sigma)
/// Tr U^{-1}(L_{v_sigma(1)} U) ... U^{-1}(L_{v_sigma(n)} U).
pub fn analytic_form_odd(
    field: &dyn MatrixField,
    x0: &[f64],
    tangents: &[Vec<f64>],
) -> Result<Complex64> {
    if field.kind() != SampleKind::Unitary {
        return Err(Error::InvalidInput("odd form needs a unitary field".into()));
    }
    let n = tangents.len();
    let u = field.mat(x0);
    let ui = u.inverse()?;
    let ms: Vec<CMat> = tangents
        .iter()
        .map(|v| field.derivative(x0, v).map(|d| ui.matmul(&d)))
        .collect::<Result<Vec<_>>>()?;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(c_odd(n) * antisym_trace_product(&ms, None) / fact)
}

/// The analytic even form at a point: b_n (1/n!) sum_sigma sgn(sigma)
/// Tr e (L_{v_sigma(1)} e) ... (L_{v_sigma(n)} e).
pub fn analytic_form_even(
    field: &dyn MatrixField,
    x0: &[f64],
    tangents: &[Vec<f64>],
) -> Result<Complex64> {
    if field.kind() != SampleKind::Projector {
        return Err(Error::InvalidInput("even form needs a projector field".into()));
    }
    let n = tangents.len();
    let e = field.mat(x0);
    let ds: Vec<CMat> = tangents
        .iter()
        .map(|v| field.derivative(x0, v))
        .collect::<Result<Vec<_>>>()?;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(b_even(n) * antisym_trace_product(&ds, Some(&e)) / fact)
}

/// Error table of lambda_h against the analytic form over a family of probes
/// and a decreasing sequence of steps.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// (h, max over probes of |lambda_h - analytic|)
    pub rows: Vec<(f64, f64)>,
    pub monotone: bool,
    /// Least-squares slope of log(err) against log(h).
    pub observed_order: f64,
}

impl ConvergenceReport {
    pub fn passes(&self) -> bool {
        self.monotone && self.observed_order >= 1.0
    }
}

pub fn derham_convergence(
    field: &dyn MatrixField,
    spec: &CochainSpec,
    probes: &[TangentProbe],
    steps: &[f64],
    cfg: &QuadConfig,
) -> Result<ConvergenceReport> {
    let n = spec.degree();
    let mut rows = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut worst: f64 = 0.0;
        for probe in probes {
            let lam = lambda_map(field, spec, probe, h, cfg)?;
            let vs: Vec<Vec<f64>> = probe.tangents[..n].to_vec();
            let target = match field.kind() {
                SampleKind::Unitary => analytic_form_odd(field, &probe.base, &vs)?,
                SampleKind::Projector => analytic_form_even(field, &probe.base, &vs)?,
            };
            worst = worst.max((lam - target).norm());
        }
        rows.push((h, worst));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 < w[0].1);
    // least-squares slope in log-log
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let observed_order = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    } else {
        0.0
    };
    Ok(ConvergenceReport { rows, monotone, observed_order })
}
