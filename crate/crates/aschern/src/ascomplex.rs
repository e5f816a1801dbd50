//! Alexander-Spanier cochain and chain machinery.
//!
//! Cochains are functions on (n+1)-tuples of sample-point ids, defined only
//! where the sample's proximity (gap) condition holds; evaluation outside the
//! gap is a reported error, never a silent value. Chains are finitely
//! supported weighted sums of tuples; the boundary is the transpose of the
//! coboundary and the pairing is the bilinear sum.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::pairwise_sum;

pub type PointId = usize;

/// An ordered (n+1)-tuple of point ids; repeats are legal arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(pub Vec<PointId>);

impl Tuple {
    pub fn new(ids: impl Into<Vec<PointId>>) -> Self {
        Tuple(ids.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree of the simplex (length - 1).
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    /// The j-th face: the tuple with entry j removed.
    pub fn face(&self, j: usize) -> Tuple {
        let mut ids = self.0.clone();
        ids.remove(j);
        Tuple(ids)
    }
}

type Evaluator = Arc<dyn Fn(&Tuple) -> Result<Complex64> + Send + Sync>;

/// A degree-n cochain: a pure evaluator on (n+1)-tuples plus the proximity
/// bound under which evaluation is defined.
#[derive(Clone)]
pub struct Cochain {
    degree: usize,
    gap: f64,
    eval: Evaluator,
}

impl Cochain {
    pub fn new(
        degree: usize,
        gap: f64,
        eval: impl Fn(&Tuple) -> Result<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Cochain { degree, gap, eval: Arc::new(eval) }
    }

    /// Constant 0-cochain.
    pub fn constant(value: Complex64) -> Self {
        Cochain::new(0, f64::INFINITY, move |_| Ok(value))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn eval(&self, tuple: &Tuple) -> Result<Complex64> {
        if tuple.len() != self.degree + 1 {
            return Err(Error::InvalidInput(format!(
                "cochain of degree {} evaluated on a tuple of length {}",
                self.degree,
                tuple.len()
            )));
        }
        (self.eval)(tuple)
    }

    /// The coboundary: alternating sum over omitted points,
    /// (d phi)(x_0..x_{n+1}) = sum_j (-1)^j phi(.., x_j omitted, ..).
    pub fn coboundary(&self) -> Cochain {
        let inner = self.eval.clone();
        let deg = self.degree;
        Cochain::new(deg + 1, self.gap, move |tuple: &Tuple| {
            let mut terms = Vec::with_capacity(tuple.len());
            for j in 0..tuple.len() {
                let face = tuple.face(j);
                let v = inner(&face).map_err(|e| match e {
                    Error::GapViolation(d) => {
                        Error::GapViolation(format!("face {j} {:?}: {d}", face.0))
                    }
                    other => other,
                })?;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(v * sign);
            }
            Ok(pairwise_sum(&terms))
        })
    }

    /// Cup product: (phi cup psi)(x_0..x_{n+m}) =
    /// phi(x_0..x_n) psi(x_n..x_{n+m}).
    pub fn cup(&self, other: &Cochain) -> Cochain {
        let f = self.eval.clone();
        let g = other.eval.clone();
        let n = self.degree;
        let m = other.degree;
        let gap = self.gap.min(other.gap);
        Cochain::new(n + m, gap, move |tuple: &Tuple| {
            let front = Tuple(tuple.0[..=n].to_vec());
            let back = Tuple(tuple.0[n..=n + m].to_vec());
            Ok(f(&front)? * g(&back)?)
        })
    }

    /// Pointwise linear combination a*phi + b*psi (same degree).
    pub fn linear_combination(a: Complex64, phi: &Cochain, b: Complex64, psi: &Cochain) -> Cochain {
        assert_eq!(phi.degree, psi.degree, "degree mismatch");
        let f = phi.eval.clone();
        let g = psi.eval.clone();
        Cochain::new(phi.degree, phi.gap.min(psi.gap), move |t: &Tuple| {
            Ok(a * f(t)? + b * g(t)?)
        })
    }
}

/// A degree-n chain: a finitely supported weighted sum of (n+1)-tuples,
/// kept in canonical form (sorted tuples, duplicates merged, zeros dropped).
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    degree: usize,
    terms: Vec<(Complex64, Tuple)>,
}

impl Chain {
    pub fn empty(degree: usize) -> Self {
        Chain { degree, terms: Vec::new() }
    }

    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (Complex64, Tuple)>) -> Self {
        let mut map: BTreeMap<Tuple, Complex64> = BTreeMap::new();
        for (c, t) in terms {
            assert_eq!(t.degree(), degree, "tuple degree mismatch");
            *map.entry(t).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(t, c)| (c, t))
            .collect();
        Chain { degree, terms }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Complex64, Tuple)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Chain {
        Chain {
            degree: self.degree,
            terms: self.terms.iter().map(|(c, t)| (c * s, t.clone())).collect(),
        }
    }

    /// Boundary: alternating faces of every term, merged to canonical form.
    pub fn boundary(&self) -> Chain {
        assert!(self.degree >= 1, "boundary of a 0-chain");
        let mut out = Vec::new();
        for (c, t) in &self.terms {
            for j in 0..t.len() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.push((c * sign, t.face(j)));
            }
        }
        Chain::from_terms(self.degree - 1, out)
    }

    /// True when every boundary coefficient has magnitude <= tol; also
    /// returns the largest residual coefficient.
    pub fn is_cycle(&self, tol: f64) -> (bool, f64) {
        let b = self.boundary();
        let max = b.terms.iter().map(|(c, _)| c.norm()).fold(0.0, f64::max);
        (max <= tol, max)
    }
}

/// Pairing <mu, phi> = sum coeff * phi(tuple). Linear in both arguments;
/// evaluation runs in parallel but reduces deterministically over the
/// chain's canonical term order.
pub fn pair(chain: &Chain, cochain: &Cochain) -> Result<Complex64> {
    if chain.degree != cochain.degree() {
        return Err(Error::InvalidInput(format!(
            "pairing degree mismatch: chain {} vs cochain {}",
            chain.degree,
            cochain.degree()
        )));
    }
    let vals: Vec<Complex64> = chain
        .terms
        .par_iter()
        .map(|(c, t)| cochain.eval(t).map(|v| v * c))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic pseudo-random tabulated cochain for structural tests.
    fn tabulated(degree: usize, salt: u64) -> Cochain {
        Cochain::new(degree, f64::INFINITY, move |t: &Tuple| {
            let mut h = salt.wrapping_mul(0x9e3779b97f4a7c15);
            for &id in &t.0 {
                h ^= (id as u64).wrapping_add(0x517cc1b727220a95).wrapping_mul(h | 1);
            }
            let a = (h >> 11) as f64 / (1u64 << 53) as f64;
            let b = ((h.wrapping_mul(0x2545f4914f6cdd1d)) >> 11) as f64 / (1u64 << 53) as f64;
            Ok(c(a - 0.5, b - 0.5))
        })
    }

    #[test]
    fn coboundary_of_constant_vanishes() {
        let phi = Cochain::constant(c(3.7, -1.2));
        let d = phi.coboundary();
        let v = d.eval(&Tuple::new([4, 9])).unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn coboundary_of_difference_cochain_vanishes() {
        // phi(x0,x1) = f(x1) - f(x0) is a coboundary, so d(phi) = 0.
        let f = |id: PointId| c((id as f64 * 0.37).sin(), (id as f64 * 0.11).cos());
        let phi = Cochain::new(1, f64::INFINITY, move |t: &Tuple| Ok(f(t.0[1]) - f(t.0[0])));
        let d = phi.coboundary();
        for tri in [[0, 1, 2], [5, 2, 9], [3, 3, 7]] {
            let v = d.eval(&Tuple::new(tri)).unwrap();
            assert!(v.norm() < 1e-15, "{v}");
        }
    }

    #[test]
    fn coboundary_squares_to_zero() {
        for degree in [1usize, 2] {
            let phi = tabulated(degree, 42 + degree as u64);
            let dd = phi.coboundary().coboundary();
            for salt in 0..200u64 {
                let ids: Vec<usize> =
                    (0..degree + 3).map(|i| ((salt * 31 + i as u64 * 7) % 23) as usize).collect();
                let v = dd.eval(&Tuple::new(ids)).unwrap();
                assert!(v.norm() < 1e-13, "residual {}", v.norm());
            }
        }
    }

    #[test]
    fn cup_with_constant_one_is_identity() {
        let one = Cochain::constant(c(1.0, 0.0));
        let psi = tabulated(2, 7);
        let cup = one.cup(&psi);
        for ids in [[1, 2, 3], [4, 4, 8]] {
            let t = Tuple::new(ids);
            assert_eq!(cup.eval(&t).unwrap(), psi.eval(&t).unwrap());
        }
    }

    #[test]
    fn cup_is_associative() {
        let a = tabulated(1, 1);
        let b = tabulated(1, 2);
        let d = tabulated(1, 3);
        let left = a.cup(&b).cup(&d);
        let right = a.cup(&b.cup(&d));
        for salt in 0..50u64 {
            let ids: Vec<usize> = (0..4).map(|i| ((salt * 13 + i * 5) % 17) as usize).collect();
            let t = Tuple::new(ids);
            let l = left.eval(&t).unwrap();
            let r = right.eval(&t).unwrap();
            assert!((l - r).norm() < 1e-14);
        }
    }

    #[test]
    fn cup_leibniz_identity() {
        // d(phi cup psi) = d(phi) cup psi + (-1)^n phi cup d(psi)
        let phi = tabulated(1, 11);
        let psi = tabulated(1, 12);
        let lhs = phi.cup(&psi).coboundary();
        let term1 = phi.coboundary().cup(&psi);
        let term2 = phi.cup(&psi.coboundary());
        let sign = -1.0; // (-1)^1
        for salt in 0..100u64 {
            let ids: Vec<usize> = (0..4).map(|i| ((salt * 19 + i * 3) % 29) as usize).collect();
            let t = Tuple::new(ids);
            let l = lhs.eval(&t).unwrap();
            let r = term1.eval(&t).unwrap() + term2.eval(&t).unwrap() * sign;
            assert!((l - r).norm() < 1e-12, "Leibniz residual {}", (l - r).norm());
        }
    }

    #[test]
    fn chain_boundary_edge() {
        let mu = Chain::from_terms(1, [(c(1.0, 0.0), Tuple::new([10, 20]))]);
        let b = mu.boundary();
        assert_eq!(b.len(), 2);
        // canonical order sorts tuples ascending
        assert_eq!(b.terms()[0], (c(-1.0, 0.0), Tuple::new([10])));
        assert_eq!(b.terms()[1], (c(1.0, 0.0), Tuple::new([20])));
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let mu = Chain::from_terms(
            2,
            [
                (c(1.0, 0.0), Tuple::new([0, 1, 2])),
                (c(-2.0, 0.5), Tuple::new([1, 2, 3])),
                (c(0.5, 0.0), Tuple::new([0, 2, 3])),
            ],
        );
        let bb = mu.boundary().boundary();
        assert!(bb.is_empty(), "dd(mu) = {bb:?}");
    }

    #[test]
    fn closed_polygon_is_cycle() {
        let m = 7;
        let terms: Vec<_> = (0..m)
            .map(|i| (c(1.0, 0.0), Tuple::new([i, (i + 1) % m])))
            .collect();
        let mu = Chain::from_terms(1, terms);
        let (ok, res) = mu.is_cycle(0.0);
        assert!(ok, "residual {res}");

        let single = Chain::from_terms(1, [(c(1.0, 0.0), Tuple::new([0, 1]))]);
        let (ok, _) = single.is_cycle(0.0);
        assert!(!ok);
    }

    #[test]
    fn single_triangle_is_not_a_cycle() {
        let tri = Chain::from_terms(2, [(c(1.0, 0.0), Tuple::new([0, 1, 2]))]);
        let (ok, res) = tri.is_cycle(0.0);
        assert!(!ok);
        assert_eq!(res, 1.0);
    }

    #[test]
    fn pairing_basics() {
        let phi = tabulated(1, 5);
        let empty = Chain::empty(1);
        assert_eq!(pair(&empty, &phi).unwrap(), c(0.0, 0.0));

        let t = Tuple::new([3, 8]);
        let single = Chain::from_terms(1, [(c(1.0, 0.0), t.clone())]);
        assert_eq!(pair(&single, &phi).unwrap(), phi.eval(&t).unwrap());

        let mismatched = Chain::empty(2);
        assert!(pair(&mismatched, &phi).is_err());
    }

    #[test]
    fn pairing_adjoint_to_boundary() {
        // <d mu, phi> = <mu, d phi>
        let phi = tabulated(1, 99);
        for salt in 0..30u64 {
            let mk = |k: u64| ((salt * 7 + k * 11) % 13) as usize;
            let mu = Chain::from_terms(
                2,
                [
                    (c(0.3, -0.1), Tuple::new([mk(0), mk(1), mk(2)])),
                    (c(-1.0, 2.0), Tuple::new([mk(3), mk(4), mk(5)])),
                ],
            );
            let lhs = pair(&mu.boundary(), &phi).unwrap();
            let rhs = pair(&mu, &phi.coboundary()).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn pairing_negates_with_chain_negation_exactly() {
        let phi = tabulated(2, 17);
        let mu = Chain::from_terms(
            2,
            (0..20).map(|i| (c(1.0, 0.0), Tuple::new([i, i + 1, i + 2]))),
        );
        let v = pair(&mu, &phi).unwrap();
        let w = pair(&mu.scale(c(-1.0, 0.0)), &phi).unwrap();
        assert_eq!(w, -v);
    }
}
