//! Seeded property suites: the numerical forms of the structural statements
//! (cocycle condition, homotopy invariance, de Rham limit, series validation,
//! cross-route agreement). The CLI `check` command and the acceptance tests
//! both drive these.

use std::sync::Arc;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ascomplex::{pair, Cochain, Tuple};
use crate::chern_even::{
    ch_even, ch_even_cochain, even_transgression_values, projector_series, spectral_projector,
    spectral_projector_contour, triple_phase_cochain, EvenPath, ProjectorSample,
};
use crate::chern_odd::{
    ch1_closed_cochain, ch_odd_cochain, odd_transgression_values, trapezoid_unit, UnitarySample,
};
use crate::error::{Error, Result};
use crate::geom::{
    derham_convergence, derham_sphere2, fhs_lattice_chern, gen_bott_sphere, gen_circle_winding,
    gen_monopole, gen_su2_sphere3, gen_two_band_torus, BottSphere, CircleWinding, CochainSpec,
    MatrixField, Mesh, TangentProbe, TwoBandTorus,
};
use crate::io::{AnySample, CheckRecord};
use crate::linalg::CMat;
use crate::quad::QuadConfig;

/// Draw `count` tuples of the given length from vertex clusters of the mesh
/// (a vertex plus its edge neighbors), keeping only tuples accepted by the
/// admissibility predicate. Deterministic for a fixed seed.
pub fn random_adjacent_tuples(
    mesh: &Mesh,
    is_admissible: impl Fn(&[usize]) -> bool,
    len: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Tuple>> {
    let clusters = mesh.vertex_clusters();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count {
            return Err(Error::GapViolation(format!(
                "could not draw {count} admissible tuples from the clusters"
            )));
        }
        let center = rng.gen_range(0..mesh.vertices.len());
        let cluster = &clusters[center];
        let ids: Vec<usize> =
            (0..len).map(|_| cluster[rng.gen_range(0..cluster.len())]).collect();
        if is_admissible(&ids) {
            out.push(Tuple::new(ids));
        }
    }
    Ok(out)
}

/// Largest |d phi| over the tuples.
pub fn max_coboundary_residual(phi: &Cochain, tuples: &[Tuple]) -> Result<f64> {
    let d = phi.coboundary();
    let mut worst: f64 = 0.0;
    for t in tuples {
        worst = worst.max(d.eval(t)?.norm());
    }
    Ok(worst)
}

/// Wrap a sample in the requested cocycle evaluator.
pub fn build_cochain(sample: &AnySample, spec: &CochainSpec, cfg: &QuadConfig) -> Result<Cochain> {
    match (sample, spec) {
        (AnySample::Unitary(s), CochainSpec::Ch1Closed) => {
            Ok(ch1_closed_cochain(Arc::new(s.clone())))
        }
        (AnySample::Unitary(s), CochainSpec::ChOdd(n)) => {
            Ok(ch_odd_cochain(Arc::new(s.clone()), *n, *cfg))
        }
        (AnySample::Projector(s), CochainSpec::ChEven(n)) => {
            Ok(ch_even_cochain(Arc::new(s.clone()), *n, *cfg))
        }
        (AnySample::Projector(s), CochainSpec::TriplePhase) => {
            Ok(triple_phase_cochain(Arc::new(s.clone())))
        }
        _ => Err(Error::InvalidInput(
            "cocycle kind does not match the sample kind (unitary vs projector)".into(),
        )),
    }
}

/// Pairing of the fundamental cycle with the requested cocycle, together
/// with the distance to the nearest integer and a quadrature-convergence
/// estimate (difference against a coarser evaluation).
pub fn pairing_report(
    mesh: &Mesh,
    sample: &AnySample,
    spec: &CochainSpec,
    cfg: &QuadConfig,
) -> Result<(Complex64, f64, f64)> {
    if spec.degree() != mesh.dim {
        return Err(Error::InvalidInput(format!(
            "cocycle degree {} does not match mesh dimension {}",
            spec.degree(),
            mesh.dim
        )));
    }
    let cycle = mesh.fundamental_cycle();
    let phi = build_cochain(sample, spec, cfg)?;
    let value = pair(&cycle, &phi)?;
    let estimate = match spec {
        CochainSpec::Ch1Closed | CochainSpec::TriplePhase => 0.0,
        _ => {
            let coarse_cfg = QuadConfig { subdiv: Some(1), ..*cfg };
            let coarse = pair(&cycle, &build_cochain(sample, spec, &coarse_cfg)?)?;
            (value - coarse).norm()
        }
    };
    let int_dist = (value.re - value.re.round()).abs().hypot(value.im);
    Ok((value, int_dist, estimate))
}

fn record(name: &str, value: f64, tol: f64) -> CheckRecord {
    CheckRecord { name: name.into(), value, tolerance: tol, pass: value.abs() <= tol }
}

/// Cocycle-condition suite: max |d Ch| over seeded admissible tuples for a
/// generated asset, at the per-degree tolerances.
pub fn suite_cocycle(asset: &Asset, count: usize, seed: u64, cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    match asset {
        Asset::Circle { k, m } => {
            let (mesh, sample) = gen_circle_winding(*k, *m)?;
            let sample = Arc::new(sample);
            let adm = |ids: &[usize]| sample.check_gap(ids).is_ok();
            let tuples = random_adjacent_tuples(&mesh, adm, 3, count, seed)?;
            let closed = ch1_closed_cochain(sample.clone());
            out.push(record(
                "circle d(ch1-closed) max residual",
                max_coboundary_residual(&closed, &tuples)?,
                1e-8,
            ));
            let quad = ch_odd_cochain(sample.clone(), 1, *cfg);
            out.push(record(
                "circle d(ch1-quadrature) max residual",
                max_coboundary_residual(&quad, &tuples)?,
                1e-8,
            ));
        }
        Asset::Bott { level } => {
            let (mesh, sample) = gen_bott_sphere(*level)?;
            let sample = Arc::new(sample);
            let adm = |ids: &[usize]| sample.check_gap(ids).is_ok();
            let tuples = random_adjacent_tuples(&mesh, adm, 4, count, seed)?;
            let ch2 = ch_even_cochain(sample.clone(), 2, *cfg);
            out.push(record(
                "bott d(ch2) max residual",
                max_coboundary_residual(&ch2, &tuples)?,
                1e-7,
            ));
            let phi = triple_phase_cochain(sample.clone());
            out.push(record(
                "bott d(triple-phase) max residual",
                max_coboundary_residual(&phi, &tuples)?,
                1e-10,
            ));
        }
        Asset::Monopole { charge, level } => {
            let (mesh, sample) = gen_monopole(*charge, *level)?;
            let sample = Arc::new(sample);
            let adm = |ids: &[usize]| sample.check_gap(ids).is_ok();
            let tuples = random_adjacent_tuples(&mesh, adm, 4, count, seed)?;
            let ch2 = ch_even_cochain(sample.clone(), 2, *cfg);
            out.push(record(
                "monopole d(ch2) max residual",
                max_coboundary_residual(&ch2, &tuples)?,
                1e-7,
            ));
        }
        Asset::Su2 { level } => {
            let (mesh, sample) = gen_su2_sphere3(*level)?;
            let sample = Arc::new(sample);
            let adm = |ids: &[usize]| sample.check_gap(ids).is_ok();
            let tuples = random_adjacent_tuples(&mesh, adm, 5, count, seed)?;
            let ch3 = ch_odd_cochain(sample.clone(), 3, *cfg);
            out.push(record(
                "su2 d(ch3) max residual",
                max_coboundary_residual(&ch3, &tuples)?,
                1e-5,
            ));
        }
        Asset::Torus { mass, grid } => {
            let (mesh, sample) = gen_two_band_torus(*mass, *grid)?;
            let sample = Arc::new(sample);
            let adm = |ids: &[usize]| sample.check_gap(ids).is_ok();
            let tuples = random_adjacent_tuples(&mesh, adm, 4, count, seed)?;
            let ch2 = ch_even_cochain(sample.clone(), 2, *cfg);
            out.push(record(
                "torus d(ch2) max residual",
                max_coboundary_residual(&ch2, &tuples)?,
                1e-7,
            ));
        }
    }
    Ok(out)
}

fn expi(h: &CMat) -> CMat {
    let n = h.dim();
    let mut acc = CMat::identity(n);
    let mut term = CMat::identity(n);
    for k in 1..80 {
        term = term.matmul(h).scale(Complex64::new(0.0, 1.0 / k as f64));
        acc = acc.add(&term);
        if term.fro_norm() < 1e-18 {
            break;
        }
    }
    acc
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
    CMat::from_fn(n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
    .hermitian_part()
}

/// Homotopy suite: pairing drift along 65-step families (gauge rotations and
/// conjugations preserve the class exactly) and the transgression identities
/// on small test tuples, both sides computed independently.
pub fn suite_homotopy(seed: u64, cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let steps = 65;

    // circle: u_tau(theta) = exp(i(theta + 0.3 tau sin theta)) u
    {
        let m = 24;
        let base = gen_circle_winding(1, m)?;
        let fam: Vec<UnitarySample> = (0..steps)
            .map(|s| {
                let tau = s as f64 / (steps - 1) as f64;
                let mats: Vec<CMat> = (0..m)
                    .map(|i| {
                        let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                        let rot = Complex64::from_polar(1.0, 0.3 * tau * theta.sin());
                        base.1.mat(i).scale(rot)
                    })
                    .collect();
                UnitarySample::new(mats, base.1.rho())
            })
            .collect::<Result<Vec<_>>>()?;
        let cycle = base.0.fundamental_cycle();
        let mut drift: f64 = 0.0;
        let p0 = pair(&cycle, &ch1_closed_cochain(Arc::new(fam[0].clone())))?;
        for smp in &fam {
            let p = pair(&cycle, &ch1_closed_cochain(Arc::new(smp.clone())))?;
            drift = drift.max((p - p0).norm());
        }
        out.push(record("ch1 pairing drift along 65-step family", drift, 1e-6));

        // transgression identity on the edge (0, 1)
        let lhs = crate::chern_odd::ch1_closed(&fam[steps - 1], 0, 1)?
            - crate::chern_odd::ch1_closed(&fam[0], 0, 1)?;
        let t1 = odd_transgression_values(&fam, &Tuple::new([1]), 1, cfg)?;
        let t0 = odd_transgression_values(&fam, &Tuple::new([0]), 1, cfg)?;
        let rhs = trapezoid_unit(&t1) - trapezoid_unit(&t0);
        out.push(record("ch1 transgression identity residual", (lhs - rhs).norm(), 1e-6));
    }

    // bott sphere: conjugation family e_tau = G e G*
    {
        let (mesh, sample) = gen_bott_sphere(1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = random_hermitian(&mut rng, 2).scale(Complex64::new(0.5, 0.0));
        let cycle = mesh.fundamental_cycle();
        let quad = QuadConfig { subdiv: Some(2), ..*cfg };
        let mut drift: f64 = 0.0;
        let mut p0 = None;
        for s in 0..steps {
            let tau = s as f64 / (steps - 1) as f64;
            let g = expi(&gen.scale(Complex64::new(tau, 0.0)));
            let mats: Vec<CMat> = sample
                .mats()
                .iter()
                .map(|m| g.matmul(m).matmul(&g.adjoint()).hermitian_part())
                .collect();
            let smp = Arc::new(ProjectorSample::new(mats, sample.rho())?);
            let p = pair(&cycle, &ch_even_cochain(smp, 2, quad))?;
            match p0 {
                None => p0 = Some(p),
                Some(base) => drift = drift.max((p - base).norm()),
            }
        }
        out.push(record("ch2 pairing drift along 65-step family", drift, 1e-6));
    }

    // projector transgression identity on a small position-dependent family
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (mesh, sample) = gen_bott_sphere(1)?;
        // a face of the mesh: pairwise gaps are edge-sized
        let ids = mesh.simplices[0].clone();
        let mats: Vec<CMat> = ids.iter().map(|&i| sample.mat(i).clone()).collect();
        let base = ProjectorSample::new(mats.clone(), 0.49)?;
        base.check_gap(&[0, 1, 2])?;
        let gens: Vec<CMat> = (0..3)
            .map(|_| random_hermitian(&mut rng, 2).scale(Complex64::new(0.1, 0.0)))
            .collect();
        let grid = 129;
        let fam: Vec<ProjectorSample> = (0..grid)
            .map(|s| {
                let tau = s as f64 / (grid - 1) as f64;
                let rotated: Vec<CMat> = mats
                    .iter()
                    .zip(&gens)
                    .map(|(m, g)| {
                        let u = expi(&g.scale(Complex64::new(tau, 0.0)));
                        u.matmul(m).matmul(&u.adjoint()).hermitian_part()
                    })
                    .collect();
                ProjectorSample::new(rotated, 0.49)
            })
            .collect::<Result<Vec<_>>>()?;
        let tight = QuadConfig { tol: 1e-11, ..*cfg };
        let tup = Tuple::new([0, 1, 2]);
        let lhs = ch_even(&fam[grid - 1], &tup, &tight)? - ch_even(&fam[0], &tup, &tight)?;
        let int_t = |a: usize, b: usize| -> Result<Complex64> {
            let vals = even_transgression_values(&fam, &Tuple::new([a, b]), 2, &tight)?;
            Ok(trapezoid_unit(&vals))
        };
        let rhs = int_t(1, 2)? - int_t(0, 2)? + int_t(0, 1)?;
        out.push(record("ch2 transgression identity residual", (lhs - rhs).norm(), 1e-6));
    }

    Ok(out)
}

/// de Rham limit suite: lambda_h against the analytic forms on circle and
/// Bott-sphere probes, h in {0.1, 0.05, 0.025}; monotone decay of order
/// at least one required.
pub fn suite_derham(cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    let steps = [0.1, 0.05, 0.025];
    let mut out = Vec::new();

    // circle, modulated so the second derivative is nonzero
    let field = CircleWinding::with_modulation(1, 0.35);
    let probes: Vec<TangentProbe> =
        [0.3f64, 1.7, 4.0].iter().map(|&t| TangentProbe::on_circle(t)).collect();
    let rep = derham_convergence(&field, &CochainSpec::Ch1Closed, &probes, &steps, cfg)?;
    out.push(CheckRecord {
        name: format!(
            "circle lambda(ch1) errors {:?} (order {:.2})",
            rep.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            rep.observed_order
        ),
        value: if rep.passes() { 0.0 } else { 1.0 },
        tolerance: 0.5,
        pass: rep.passes(),
    });

    // bott sphere probes at a few base points
    let field = BottSphere;
    let mk = |base: [f64; 3], d1: [f64; 3], d2: [f64; 3]| {
        TangentProbe::on_sphere(base.to_vec(), vec![d1.to_vec(), d2.to_vec()]).unwrap()
    };
    let probes = vec![
        mk([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        mk([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
    ];
    let tight = QuadConfig { tol: 1e-11, ..*cfg };
    let rep = derham_convergence(&field, &CochainSpec::ChEven(2), &probes, &steps, &tight)?;
    out.push(CheckRecord {
        name: format!(
            "bott lambda(ch2) errors {:?} (order {:.2})",
            rep.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            rep.observed_order
        ),
        value: if rep.passes() { 0.0 } else { 1.0 },
        tolerance: 0.5,
        pass: rep.passes(),
    });
    Ok(out)
}

/// Build a random admissible projector pair in M_4 with the gap tuned to
/// `rho_target`.
pub fn random_projector_pair(seed: u64, rho_target: f64) -> Result<ProjectorSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_hermitian(&mut rng, 4);
    let (_, v) = h.herm_eig()?;
    let mut e0 = CMat::zeros(4);
    for i in 0..2 {
        let col = v.col(i);
        e0.axpy(Complex64::new(1.0, 0.0), &CMat::outer(&col, &col));
    }
    let e0 = e0.hermitian_part();
    let gen = random_hermitian(&mut rng, 4);
    // bisect the rotation amplitude to hit the target gap
    let gap_at = |eps: f64| -> Result<f64> {
        let u = expi(&gen.scale(Complex64::new(eps, 0.0)));
        let e1 = u.matmul(&e0).matmul(&u.adjoint());
        e1.sub(&e0).op_norm()
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while gap_at(hi)? < rho_target && hi < 64.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap_at(mid)? < rho_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = expi(&gen.scale(Complex64::new(0.5 * (lo + hi), 0.0)));
    let e1 = u.matmul(&e0).matmul(&u.adjoint()).hermitian_part();
    ProjectorSample::new(vec![e0, e1], 0.499)
}

/// Series-validation suite: word-series error envelope against the spectral
/// projector, and contour-versus-eigendecomposition agreement.
pub fn suite_series(rho: f64, k_max: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let sample = random_projector_pair(seed, rho)?;
    let path = EvenPath::from_parts(
        sample.mat(0).clone(),
        vec![sample.mat(1).sub(sample.mat(0))],
        sample.rank(),
    );
    let mut out = Vec::new();

    // midpoint node: ||delta(t)|| = rho/2, word-series contraction about rho
    let t = [0.5, 0.5];
    let exact = spectral_projector(&path.a_at(&t).hermitian_part())?;
    let mut prev = f64::INFINITY;
    let mut ratios = Vec::new();
    let mut last_err = f64::NAN;
    for k in 1..=k_max {
        let err = projector_series(&path, &t, k)?.sub(&exact).op_norm()?;
        if k >= 3 && prev > 0.0 {
            ratios.push(err / prev);
        }
        prev = err;
        last_err = err;
    }
    let mean_ratio = ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64);
    out.push(record(&format!("series error at K={k_max}"), last_err, 1e-4));
    out.push(CheckRecord {
        name: format!("series contraction ratio (target <= 0.45 at rho {rho})"),
        value: mean_ratio,
        tolerance: 0.45,
        pass: mean_ratio <= 0.45,
    });

    // contour vs eigen at the midpoint node
    let a_mid = path.a_at(&[0.5, 0.5]).hermitian_part();
    let eig = spectral_projector(&a_mid)?;
    let c64 = spectral_projector_contour(&a_mid, 64)?.sub(&eig).op_norm()?;
    let c32 = spectral_projector_contour(&a_mid, 32)?.sub(&eig).op_norm()?;
    out.push(record("contour(64) vs eigen projector", c64, 1e-10));
    out.push(CheckRecord {
        name: format!("contour decay e32={c32:.3e} e64={c64:.3e}"),
        value: if c64 < c32 || c32 < 1e-14 { 0.0 } else { 1.0 },
        tolerance: 0.5,
        pass: c64 < c32 || c32 < 1e-14,
    });
    Ok(out)
}

/// Cross-route agreement suite: closed form vs quadrature, triple phase vs
/// Ch^2, monopole vs Bott, mesh pairing vs independent oracles.
pub fn suite_cross(seed: u64, cfg: &QuadConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();

    // circle: closed form vs degree-13 quadrature, and integer distance
    {
        let (mesh, sample) = gen_circle_winding(2, 24)?;
        let sample = Arc::new(sample);
        let cycle = mesh.fundamental_cycle();
        let closed = pair(&cycle, &ch1_closed_cochain(sample.clone()))?;
        let cfg13 = QuadConfig { degree: 13, tol: 1e-12, subdiv: None };
        let quad = pair(&cycle, &ch_odd_cochain(sample.clone(), 1, cfg13))?;
        out.push(record("circle closed-form vs quadrature", (closed - quad).norm(), 1e-9));
        out.push(record(
            "circle winding integer distance",
            (closed - Complex64::new(2.0, 0.0)).norm(),
            1e-12,
        ));
    }

    // bott sphere: phi vs ch2 pairing, pairing vs dense-grid oracle,
    // conjugation invariance
    {
        let (mesh, sample) = gen_bott_sphere(1)?;
        let sample = Arc::new(sample);
        let cycle = mesh.fundamental_cycle();
        let p_ch2 = pair(&cycle, &ch_even_cochain(sample.clone(), 2, *cfg))?;
        let p_phi = pair(&cycle, &triple_phase_cochain(sample.clone()))?;
        out.push(record("bott triple-phase vs ch2 pairing", (p_phi - p_ch2).norm(), 1e-5));
        let oracle = derham_sphere2(&BottSphere, 48, 48)?;
        out.push(record("bott ch2 pairing vs de Rham oracle", (p_ch2 - oracle).norm(), 1e-5));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = expi(&random_hermitian(&mut rng, 2));
        let mats: Vec<CMat> = sample
            .mats()
            .iter()
            .map(|m| g.matmul(m).matmul(&g.adjoint()).hermitian_part())
            .collect();
        let conj = Arc::new(ProjectorSample::new(mats, sample.rho())?);
        let fixed = QuadConfig { subdiv: Some(2), ..*cfg };
        let a = pair(&cycle, &ch_even_cochain(sample.clone(), 2, fixed))?;
        let b = pair(&cycle, &ch_even_cochain(conj, 2, fixed))?;
        out.push(record("bott pairing conjugation invariance", (a - b).norm(), 1e-10));
    }

    // monopole charge 1 equals bott up to unitary equivalence
    {
        let (mesh, bott) = gen_bott_sphere(1)?;
        let (_, mono) = gen_monopole(1, 1)?;
        let cycle = mesh.fundamental_cycle();
        let a = pair(&cycle, &ch_even_cochain(Arc::new(bott), 2, *cfg))?;
        let b = pair(&cycle, &ch_even_cochain(Arc::new(mono), 2, *cfg))?;
        out.push(record("monopole(1) vs bott pairing", (a - b).norm(), 1e-8));
    }

    // torus: ch2 pairing vs link-variable lattice oracle
    {
        let grid = 12;
        let (mesh, sample) = gen_two_band_torus(1.0, grid)?;
        let cycle = mesh.fundamental_cycle();
        let p = pair(&cycle, &ch_even_cochain(Arc::new(sample), 2, *cfg))?;
        let f = TwoBandTorus::new(1.0);
        let projs: Vec<Vec<CMat>> = (0..grid)
            .map(|i| {
                (0..grid)
                    .map(|j| {
                        f.mat(&[
                            2.0 * std::f64::consts::PI * i as f64 / grid as f64,
                            2.0 * std::f64::consts::PI * j as f64 / grid as f64,
                        ])
                    })
                    .collect()
            })
            .collect();
        let lattice = fhs_lattice_chern(&projs)?;
        out.push(record(
            "torus ch2 pairing vs lattice oracle",
            (p - Complex64::new(lattice, 0.0)).norm(),
            1e-6,
        ));
    }

    Ok(out)
}

/// Assets the suites can generate on demand.
#[derive(Clone, Copy, Debug)]
pub enum Asset {
    Circle { k: i64, m: usize },
    Bott { level: usize },
    Monopole { charge: usize, level: usize },
    Su2 { level: usize },
    Torus { mass: f64, grid: usize },
}
