//! Quadrature over the standard n-simplex.
//!
//! Base rules are Grundmann-Moller (odd degree, signed weights, any n),
//! refined when needed by k-fold edgewise subdivision into k^n congruent
//! subsimplices. Nodes carry full barycentric coordinates (t_0, ..., t_n);
//! weights sum to the simplex volume 1/n!.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Quadrature rule on the standard n-simplex {t_j >= 0, sum t_j <= 1}.
#[derive(Clone, Debug)]
pub struct QuadRule {
    dim: usize,
    degree: usize,
    /// Barycentric nodes, each of length dim + 1, entries >= 0 summing to 1.
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for rest in compositions(total - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// Grundmann-Moller rule of the requested odd polynomial degree on the
/// n-simplex, 1 <= n <= 4, degree in {1, 3, ..., 13}. Weights are signed.
pub fn build_rule(n: usize, degree: usize) -> Result<QuadRule> {
    if !(1..=4).contains(&n) {
        return Err(Error::Capability(format!("simplex dimension {n} unsupported (1..=4)")));
    }
    if degree % 2 == 0 || !(1..=13).contains(&degree) {
        return Err(Error::Capability(format!(
            "degree {degree} unsupported (odd, 1..=13)"
        )));
    }
    let s = (degree - 1) / 2;
    let d = degree;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let w = if i % 2 == 0 { 1.0 } else { -1.0 }
            * 2f64.powi(-2 * (s as i32))
            * ((d + n - 2 * i) as f64).powi(d as i32)
            / (factorial(i) * factorial(d + n - i));
        let denom = (d + n - 2 * i) as f64;
        for k in compositions(s - i, n + 1) {
            let node: Vec<f64> = k.iter().map(|&kj| (2 * kj + 1) as f64 / denom).collect();
            nodes.push(node);
            weights.push(w);
        }
    }
    Ok(QuadRule { dim: n, degree, nodes, weights })
}

/// Vertices of the k-fold edgewise subdivision of the n-simplex, expressed in
/// barycentric coordinates over the original simplex. Each subsimplex is a
/// list of n+1 such vertices; there are exactly k^n subsimplices.
///
/// Enumeration runs in the ordered ("cumulative") coordinates
/// y_1 >= y_2 >= ... >= y_n on the scaled simplex: every unit lattice cube
/// contributes its Freudenthal path simplices that stay inside the order
/// cone.
pub(crate) fn edgewise_subsimplices(n: usize, k: usize) -> Vec<Vec<Vec<f64>>> {
    let mut cells = Vec::new();
    let mut m = vec![0usize; n];
    enumerate_cells(n, k, 0, &mut m, &mut cells);
    let perms = crate::perm::permutations_with_sign(n);
    let mut out = Vec::new();
    for m in &cells {
        'perm: for (p, _) in &perms {
            let mut verts_y: Vec<Vec<usize>> = Vec::with_capacity(n + 1);
            let mut cur = m.clone();
            verts_y.push(cur.clone());
            for &j in p {
                cur[j] += 1;
                // stay inside k >= y_1 >= ... >= y_n >= 0
                for w in 0..n {
                    let hi = if w == 0 { k } else { cur[w - 1] };
                    if cur[w] > hi {
                        continue 'perm;
                    }
                }
                verts_y.push(cur.clone());
            }
            let bary: Vec<Vec<f64>> = verts_y.iter().map(|y| y_to_bary(y, n, k)).collect();
            out.push(bary);
        }
    }
    debug_assert_eq!(out.len(), k.pow(n as u32));
    out
}

fn enumerate_cells(n: usize, k: usize, depth: usize, m: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if depth == n {
        out.push(m.clone());
        return;
    }
    let hi = if depth == 0 { k - 1 } else { m[depth - 1] };
    for v in 0..=hi {
        m[depth] = v;
        enumerate_cells(n, k, depth + 1, m, out);
    }
}

fn y_to_bary(y: &[usize], n: usize, k: usize) -> Vec<f64> {
    let kf = k as f64;
    let mut t = Vec::with_capacity(n + 1);
    t.push((k - y[0]) as f64 / kf);
    for i in 0..n - 1 {
        t.push((y[i] - y[i + 1]) as f64 / kf);
    }
    t.push(y[n - 1] as f64 / kf);
    t
}

/// Composite rule over the k^n edgewise subsimplices; same degree, node count
/// multiplied by k^n.
pub fn refine(rule: &QuadRule, k: usize) -> Result<QuadRule> {
    if k == 0 {
        return Err(Error::Capability("subdivision level must be >= 1".into()));
    }
    if k == 1 {
        return Ok(rule.clone());
    }
    let n = rule.dim;
    let subs = edgewise_subsimplices(n, k);
    let vol_scale = 1.0 / (k.pow(n as u32) as f64);
    let mut nodes = Vec::with_capacity(rule.len() * subs.len());
    let mut weights = Vec::with_capacity(rule.len() * subs.len());
    for sub in &subs {
        for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
            // affine image: global barycentric = sum_j node_j * vertex_j
            let mut global = vec![0.0; n + 1];
            for (j, vtx) in sub.iter().enumerate() {
                for (g, &b) in global.iter_mut().zip(vtx) {
                    *g += node[j] * b;
                }
            }
            nodes.push(global);
            weights.push(w * vol_scale);
        }
    }
    Ok(QuadRule { dim: n, degree: rule.degree, nodes, weights })
}

/// Deterministic pairwise (cascade) summation; independent of any evaluation
/// parallelism upstream.
pub fn pairwise_sum(vals: &[Complex64]) -> Complex64 {
    match vals.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => vals[0],
        2 => vals[0] + vals[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&vals[..mid]) + pairwise_sum(&vals[mid..])
        }
    }
}

/// Sum w_i f(node_i) with pairwise reduction. The evaluator receives the full
/// barycentric node (length dim + 1).
pub fn integrate<F>(f: F, rule: &QuadRule) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    let mut terms = Vec::with_capacity(rule.len());
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(node)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::IntegrandFailure {
                node: node.clone(),
                detail: "non-finite integrand value".into(),
            });
        }
        terms.push(v * w);
    }
    Ok(pairwise_sum(&terms))
}

/// Quadrature configuration shared by the cocycle evaluators and exposed as
/// CLI flags.
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub degree: usize,
    /// Fixed subdivision level; None selects the level adaptively.
    pub subdiv: Option<usize>,
    /// Agreement target between successive refinements (adaptive mode).
    pub tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { degree: 7, subdiv: None, tol: 1e-9 }
    }
}

impl QuadConfig {
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_subdiv(mut self, k: usize) -> Self {
        self.subdiv = Some(k);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn max_subdiv(n: usize) -> usize {
        match n {
            1 => 64,
            2 => 32,
            3 => 8,
            _ => 4,
        }
    }
}

type RuleCache = Mutex<HashMap<(usize, usize, usize), Arc<QuadRule>>>;

/// Process-wide cache of built rules, keyed by (dim, degree, subdivision).
fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn cached_rule(n: usize, degree: usize, subdiv: usize) -> Result<Arc<QuadRule>> {
    if let Some(r) = rule_cache().lock().unwrap().get(&(n, degree, subdiv)) {
        return Ok(r.clone());
    }
    let base = build_rule(n, degree)?;
    let refined = Arc::new(refine(&base, subdiv)?);
    rule_cache()
        .lock()
        .unwrap()
        .insert((n, degree, subdiv), refined.clone());
    Ok(refined)
}

/// Integrate with the configured rule. In adaptive mode the subdivision level
/// doubles until two successive results agree within `tol` (or the level cap
/// for the dimension is reached); returns the finer result.
pub fn integrate_cfg<F>(f: F, n: usize, cfg: &QuadConfig) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    if let Some(k) = cfg.subdiv {
        let rule = cached_rule(n, cfg.degree, k.max(1))?;
        return integrate(&f, rule.as_ref());
    }
    let cap = QuadConfig::max_subdiv(n);
    let mut k = 1usize;
    let mut prev = integrate(&f, cached_rule(n, cfg.degree, k)?.as_ref())?;
    while k < cap {
        k *= 2;
        let cur = integrate(&f, cached_rule(n, cfg.degree, k)?.as_ref())?;
        if (cur - prev).norm() <= cfg.tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Closed-form simplex monomial integral: prod a_i! / (n + sum a_i)!.
    fn monomial_exact(n: usize, a: &[usize]) -> f64 {
        let num: f64 = a.iter().map(|&ai| factorial(ai)).product();
        num / factorial(n + a.iter().sum::<usize>())
    }

    fn integrate_monomial(rule: &QuadRule, a: &[usize]) -> f64 {
        integrate(
            |t| {
                let mut v = 1.0;
                for (i, &ai) in a.iter().enumerate() {
                    v *= t[i + 1].powi(ai as i32);
                }
                Ok(c(v))
            },
            rule,
        )
        .unwrap()
        .re
    }

    #[test]
    fn interval_degree_one() {
        let r = build_rule(1, 1).unwrap();
        assert!((integrate(|_| Ok(c(1.0)), &r).unwrap().re - 1.0).abs() < 1e-15);
        assert!((integrate_monomial(&r, &[1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_volume() {
        for deg in [1, 3, 7, 13] {
            let r = build_rule(2, deg).unwrap();
            assert!((r.weights().iter().sum::<f64>() - 0.5).abs() < 1e-13);
            assert!((integrate(|_| Ok(c(1.0)), &r).unwrap().re - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn node_validity() {
        for n in 1..=4 {
            let r = build_rule(n, 7.min(2 * n + 1)).unwrap();
            for node in r.nodes() {
                assert_eq!(node.len(), n + 1);
                assert!(node.iter().all(|&t| t >= -1e-14));
                assert!((node.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tetrahedron_monomial_degree7() {
        // t1^2 t2 t3 over the 3-simplex: 2!/(3+4)! = 2/5040
        let r = build_rule(3, 7).unwrap();
        let got = integrate_monomial(&r, &[2, 1, 1]);
        assert!((got - 2.0 / 5040.0).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn monomial_exactness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for &(n, deg) in &[(1, 7), (2, 7), (3, 7), (4, 5), (2, 13)] {
            let r = build_rule(n, deg).unwrap();
            for _ in 0..50 {
                let mut rem = deg;
                let mut a = vec![0usize; n];
                for ai in a.iter_mut() {
                    *ai = rng.gen_range(0..=rem);
                    rem -= *ai;
                }
                let got = integrate_monomial(&r, &a);
                let exact = monomial_exact(n, &a);
                assert!(
                    (got - exact).abs() < 1e-12,
                    "n={n} deg={deg} a={a:?}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn rule_symmetry_under_coordinate_swap() {
        let r = build_rule(2, 7).unwrap();
        // integrate f(t1,t2) = t1^2 t2 vs swapped
        let f1 = integrate(|t| Ok(c(t[1] * t[1] * t[2])), &r).unwrap().re;
        let f2 = integrate(|t| Ok(c(t[2] * t[2] * t[1])), &r).unwrap().re;
        assert!((f1 - f2).abs() < 1e-13);
        // also symmetry including t0
        let g1 = integrate(|t| Ok(c(t[0] * t[1])), &r).unwrap().re;
        let g2 = integrate(|t| Ok(c(t[1] * t[0])), &r).unwrap().re;
        assert!((g1 - g2).abs() < 1e-15);
    }

    #[test]
    fn refine_partitions_volume() {
        for n in 1..=3 {
            let base = build_rule(n, 3).unwrap();
            for k in [1, 2, 3, 4] {
                let r = refine(&base, k).unwrap();
                assert_eq!(r.len(), base.len() * k.pow(n as u32));
                let vol: f64 = r.weights().iter().sum();
                assert!((vol - 1.0 / factorial(n)).abs() < 1e-13);
                for node in r.nodes() {
                    assert!(node.iter().all(|&t| t >= -1e-14));
                    assert!((node.iter().sum::<f64>() - 1.0).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn refine_level_one_identical() {
        let base = build_rule(2, 5).unwrap();
        let r = refine(&base, 1).unwrap();
        for a in [[1usize, 0], [2, 1], [0, 3]] {
            let x = integrate_monomial(&base, &a);
            let y = integrate_monomial(&r, &a);
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn refine_preserves_exactness() {
        let base = build_rule(2, 7).unwrap();
        let r = refine(&base, 3).unwrap();
        for a in [[3usize, 2], [5, 1], [0, 7]] {
            let got = integrate_monomial(&r, &a);
            let exact = monomial_exact(2, &a);
            assert!((got - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn richardson_convergence_order() {
        // smooth non-polynomial f = exp(t1) on the triangle, degree 5:
        // successive refinement differences shrink by >= 2^degree.
        let base = build_rule(2, 5).unwrap();
        let exact_f = |t: &[f64]| Ok(c(t[1].exp()));
        let i2 = integrate(exact_f, &refine(&base, 2).unwrap()).unwrap().re;
        let i4 = integrate(exact_f, &refine(&base, 4).unwrap()).unwrap().re;
        let i8 = integrate(exact_f, &refine(&base, 8).unwrap()).unwrap().re;
        let d1 = (i2 - i4).abs();
        let d2 = (i4 - i8).abs();
        assert!(d2 > 0.0, "difference hit machine precision; weaken the probe");
        assert!(d1 / d2 >= 2f64.powi(5), "ratio {} too small", d1 / d2);
    }

    #[test]
    fn integrate_constant_and_linear() {
        let r = build_rule(3, 3).unwrap();
        let v = integrate(|_| Ok(Complex64::new(2.5, -1.0)), &r).unwrap();
        let vol = 1.0 / factorial(3);
        assert!((v - Complex64::new(2.5, -1.0) * vol).norm() < 1e-15);

        let r2 = build_rule(2, 3).unwrap();
        let t1 = integrate(|t| Ok(c(t[1])), &r2).unwrap().re;
        assert!((t1 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_linearity() {
        let r = build_rule(2, 7).unwrap();
        let f = |t: &[f64]| Ok(c(t[1].exp()));
        let g = |t: &[f64]| Ok(c((3.0 * t[2]).sin()));
        let fv = integrate(f, &r).unwrap();
        let gv = integrate(g, &r).unwrap();
        let combo = integrate(|t| Ok(f(t)? * c(2.0).re + g(t)? * c(-0.5).re), &r).unwrap();
        assert!((combo - (fv * 2.0 - gv * 0.5)).norm() < 1e-15);
    }

    #[test]
    fn integrand_failure_reports_node() {
        let r = build_rule(2, 3).unwrap();
        let res = integrate(
            |t| {
                if t[1] > 0.2 {
                    Ok(Complex64::new(f64::NAN, 0.0))
                } else {
                    Ok(c(1.0))
                }
            },
            &r,
        );
        match res {
            Err(Error::IntegrandFailure { node, .. }) => assert!(node[1] > 0.2),
            other => panic!("expected integrand failure, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_converges_on_smooth_integrand() {
        let cfg = QuadConfig::default().with_tol(1e-10);
        let v = integrate_cfg(|t| Ok(c((t[1] * 2.0).exp())), 2, &cfg).unwrap().re;
        // int over the triangle of exp(2 t1) = (e^2 - 3)/4
        let exact = (std::f64::consts::E.powi(2) - 3.0) / 4.0;
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }
}
