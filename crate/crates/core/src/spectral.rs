//! Spectral resolution `a = sum lambda_i e_i` inside the subtriple generated
//! by `a`, the range tripotent, and detection of minimal multiples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, TripleError};
use crate::factors::TripleVector;
use crate::linalg;
use crate::operators::L_operator;
use crate::peirce::{cube_residual, is_minimal, peirce_project};

/// Relative gap below which eigenvalues of `L(a,a)|_V` are merged.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Relative size below which an eigencomponent of `a` is dropped.
const NEGLIGIBLE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResolution<T> {
    /// `(lambda_i, e_i)` with `lambda_1 > lambda_2 > ... > 0`.
    pub pairs: Vec<(f64, T)>,
    pub generator: T,
    /// `||sum lambda_i e_i - a||` in coordinates.
    pub residual: f64,
}

impl<T: TripleVector> SpectralResolution<T> {
    pub fn recombine(&self) -> T {
        self.pairs
            .iter()
            .fold(self.generator.zero_like(), |acc, (l, e)| acc.add(&e.scale_real(*l)))
    }
}

type CVec = DVector<Complex64>;

pub fn spectral_resolve<T: TripleVector>(a: &T, tol: f64) -> Result<SpectralResolution<T>> {
    if a.is_zero() {
        return Err(TripleError::ZeroElement);
    }
    let l = L_operator(a, a)?;
    let lc = linalg::complex_part(l.matrix());
    let d: Vec<f64> = a.weights().iter().map(|w| w.sqrt()).collect();
    let n = d.len();
    // Weighted coordinates make L(a,a) hermitian.
    let lw = DMatrix::from_fn(n, n, |i, j| lc[(i, j)] * (d[i] / d[j]));
    let lw = (&lw + lw.adjoint()) * Complex64::new(0.5, 0.0);
    let aw = CVec::from_iterator(n, a.flat().iter().zip(&d).map(|(z, s)| z * *s));

    // The odd-power span of `a` is the sum of its eigencomponents under
    // L(a,a); project onto the clustered eigenspaces of the full operator.
    let (evals, evecs) = linalg::hermitian_eigen(&lw);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| evals[y].partial_cmp(&evals[x]).unwrap());
    let mu_max = evals[order[0]].max(0.0);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let mu = evals[i];
        match clusters.last_mut() {
            Some(c) if (evals[*c.last().unwrap()] - mu).abs() <= CLUSTER_TOL * mu_max => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let a_norm = aw.norm();
    let mut pairs = Vec::new();
    for c in clusters {
        let mut comp = CVec::zeros(n);
        for &i in &c {
            let y = evecs.column(i);
            comp += &y * y.dotc(&aw);
        }
        let cn = comp.norm();
        if cn <= NEGLIGIBLE * a_norm {
            continue;
        }
        let mu = comp.dotc(&(&lw * &comp)).re / (cn * cn);
        if mu <= NEGLIGIBLE * mu_max {
            return Err(TripleError::Inconsistent("nonpositive spectral value".into()));
        }
        let lam = mu.sqrt();
        let e: Vec<Complex64> = comp.iter().zip(&d).map(|(z, s)| z / (*s * lam)).collect();
        pairs.push((lam, a.with_flat(e)));
    }
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let mut res = SpectralResolution { pairs, generator: a.clone(), residual: 0.0 };
    res.residual = res.recombine().sub(a).coord_norm();
    if res.residual > tol.max(1e-9) * a.coord_norm() {
        return Err(TripleError::Inconsistent(format!(
            "spectral pieces re-sum to a with residual {:e}",
            res.residual
        )));
    }
    for (_, e) in &res.pairs {
        let r = cube_residual(e);
        if r > 1e-6 * e.coord_norm().max(1.0) {
            return Err(TripleError::Inconsistent(format!("spectral piece is not a tripotent ({r:e})")));
        }
    }
    Ok(res)
}

/// `r(a) = sum e_i`, verified to satisfy `P_2(r(a)) a = a`.
pub fn range_tripotent<T: TripleVector>(a: &T, tol: f64) -> Result<T> {
    let s = spectral_resolve(a, tol)?;
    let r = s.pairs.iter().fold(a.zero_like(), |acc, (_, e)| acc.add(e));
    let back = peirce_project(&r, 2, a)?;
    let d = back.sub(a).coord_norm();
    if d > 1e-6 * a.coord_norm() {
        return Err(TripleError::Inconsistent(format!("P2(r(a)) a differs from a by {d:e}")));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalMultiple<T> {
    pub is_multiple: bool,
    /// `lambda_1`.
    pub scale: f64,
    /// `e_1`.
    pub tripotent: T,
}

/// Exactly one spectral pair whose tripotent is minimal.
pub fn is_positive_multiple_of_minimal<T: TripleVector>(a: &T, tol: f64) -> Result<MinimalMultiple<T>> {
    let s = spectral_resolve(a, tol)?;
    let (lam, e) = s.pairs[0].clone();
    let is_multiple = s.pairs.len() == 1 && is_minimal(&e)?;
    Ok(MinimalMultiple { is_multiple, scale: lam, tripotent: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::{Element, FactorDescriptor};

    fn m2(v: [f64; 4]) -> Element {
        Element::from_real_coords(FactorDescriptor::type1(2, 2).unwrap(), &v).unwrap()
    }

    fn close(a: &Element, b: &Element, tol: f64) -> bool {
        a.sub(b).coord_norm() <= tol
    }

    #[test]
    fn diagonal_resolutions() {
        let s = spectral_resolve(&m2([2.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(s.pairs.len(), 2);
        assert!((s.pairs[0].0 - 2.0).abs() < 1e-12 && close(&s.pairs[0].1, &m2([1.0, 0.0, 0.0, 0.0]), 1e-12));
        assert!((s.pairs[1].0 - 1.0).abs() < 1e-12 && close(&s.pairs[1].1, &m2([0.0, 0.0, 0.0, 1.0]), 1e-12));

        let s = spectral_resolve(&m2([3.0, 0.0, 0.0, 3.0]), 1e-9).unwrap();
        assert_eq!(s.pairs.len(), 1);
        assert!((s.pairs[0].0 - 3.0).abs() < 1e-12 && close(&s.pairs[0].1, &m2([1.0, 0.0, 0.0, 1.0]), 1e-12));
    }

    #[test]
    fn spin_multiple_of_minimal() {
        let f = FactorDescriptor::spin(3).unwrap();
        let r2 = 2f64.sqrt();
        let x = Element::new(f, vec![Complex64::new(r2, 0.0), Complex64::new(0.0, r2), Complex64::new(0.0, 0.0)]).unwrap();
        let s = spectral_resolve(&x, 1e-9).unwrap();
        assert_eq!(s.pairs.len(), 1);
        assert!((s.pairs[0].0 - 2.0 * r2).abs() < 1e-12);
        let e = Element::new(f, vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0)]).unwrap();
        assert!(close(&s.pairs[0].1, &e, 1e-12));
    }

    #[test]
    fn range_tripotents() {
        let r = range_tripotent(&m2([0.0, 2.0, 0.0, 0.0]), 1e-9).unwrap();
        assert!(close(&r, &m2([0.0, 1.0, 0.0, 0.0]), 1e-12));
        let r = range_tripotent(&m2([2.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        assert!(close(&r, &m2([1.0, 0.0, 0.0, 1.0]), 1e-12));
        let s2 = FactorDescriptor::type3(2).unwrap();
        let a = Element::from_real_coords(s2, &[2.0, 0.0, 1.0]).unwrap();
        let r = range_tripotent(&a, 1e-9).unwrap();
        assert!(close(&r, &Element::from_real_coords(s2, &[1.0, 0.0, 1.0]).unwrap(), 1e-12));
    }

    #[test]
    fn minimal_multiples() {
        let m = is_positive_multiple_of_minimal(&m2([0.0, 5.0, 0.0, 0.0]), 1e-9).unwrap();
        assert!(m.is_multiple && (m.scale - 5.0).abs() < 1e-12);
        assert!(close(&m.tripotent, &m2([0.0, 1.0, 0.0, 0.0]), 1e-12));
        assert!(!is_positive_multiple_of_minimal(&m2([1.0, 0.0, 0.0, 1.0]), 1e-9).unwrap().is_multiple);
        let m = is_positive_multiple_of_minimal(&m2([1.0; 4]), 1e-9).unwrap();
        assert!(m.is_multiple && (m.scale - 2.0).abs() < 1e-12);
        assert!(close(&m.tripotent, &m2([0.5; 4]), 1e-12));
        assert_eq!(spectral_resolve(&m2([0.0; 4]), 1e-9).unwrap_err(), TripleError::ZeroElement);
    }
}
