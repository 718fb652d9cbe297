//! Tripotents, Peirce decompositions, minimal frames and the binary
//! relations between tripotents.
//!
//! `L(e,e)` is self-adjoint for the trace form `tr(x y*)`, which in
//! canonical coordinates carries the factor metric weights. Eigenspaces are
//! computed in weighted coordinates and mapped back.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, TripleError};
use crate::factors::{project_matrix_tol, CMat, Element, FactorDescriptor, TripleVector};
use crate::linalg::{self, RMat};
use crate::operators::{operator_norm, L_operator, RealLinearOperator, Subspace, ANGLE_TOL};

/// Distance from `{0, 1/2, 1}` beyond which an eigenvalue is an error.
pub const GRID_SNAP: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-9;

/// `||{e,e,e} - e|| <= tol * max(1, ||e||^3)`.
pub fn is_tripotent<T: TripleVector>(e: &T, tol: f64) -> bool {
    cube_residual(e) <= tol * e.norm().powi(3).max(1.0)
}

/// Coordinate norm of `{e,e,e} - e`.
pub fn cube_residual<T: TripleVector>(e: &T) -> f64 {
    e.cube().sub(e).coord_norm()
}

fn require_tripotent<T: TripleVector>(e: &T) -> Result<()> {
    let r = cube_residual(e);
    if r <= 1e-8 * e.norm().powi(3).max(1.0) {
        Ok(())
    } else {
        Err(TripleError::NotTripotent(r))
    }
}

/// `E_0(e) + E_1(e) + E_2(e)` with projections.
#[derive(Clone, Debug)]
pub struct PeirceDecomposition {
    /// `spaces[j]` is the eigenspace of `L(e,e)` for eigenvalue `j/2`.
    pub spaces: [Subspace; 3],
    pub projections: [RealLinearOperator; 3],
    /// Eigenvalues of the realified `L(e,e)`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest distance of an eigenvalue from the grid.
    pub grid_deviation: f64,
}

impl PeirceDecomposition {
    /// Complex dimensions `(d0, d1, d2)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let d = |j: usize| self.spaces[j].real_dim() / 2;
        (d(0), d(1), d(2))
    }
}

fn weight_diag<T: TripleVector>(e: &T) -> Vec<f64> {
    e.weights().iter().flat_map(|w| [w.sqrt(), w.sqrt()]).collect()
}

pub fn peirce_decompose<T: TripleVector>(e: &T) -> Result<PeirceDecomposition> {
    require_tripotent(e)?;
    let l = L_operator(e, e)?;
    let d = weight_diag(e);
    let n = d.len();
    // D L D^{-1} is symmetric.
    let mw = RMat::from_fn(n, n, |i, j| d[i] * l.matrix()[(i, j)] / d[j]);
    let sym = (&mw + mw.transpose()) * 0.5;
    let (evals, evecs) = linalg::symmetric_eigen(&sym);
    let mut groups: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut deviation: f64 = 0.0;
    for (i, &lam) in evals.iter().enumerate() {
        let j = (2.0 * lam).round().clamp(0.0, 2.0) as usize;
        let dev = (lam - j as f64 / 2.0).abs();
        if dev > GRID_SNAP {
            return Err(TripleError::OffGridEigenvalue(lam));
        }
        deviation = deviation.max(dev);
        groups[j].push(i);
    }
    let mut eigenvalues = evals.clone();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let space = e.space();
    let mut projections = Vec::with_capacity(3);
    let mut spaces = Vec::with_capacity(3);
    for g in &groups {
        let mut pw = RMat::zeros(n, n);
        for &i in g {
            let v = evecs.column(i);
            pw += &v * v.transpose();
        }
        let p = RMat::from_fn(n, n, |i, j| pw[(i, j)] * d[j] / d[i]);
        let basis = linalg::pivoted_basis(&p, g.len());
        spaces.push(Subspace::from_orthonormal(space.clone(), basis));
        projections.push(RealLinearOperator::new(space.clone(), space.clone(), p)?);
    }
    let spaces: [Subspace; 3] = spaces.try_into().unwrap();
    let projections: [RealLinearOperator; 3] = projections.try_into().unwrap();
    Ok(PeirceDecomposition { spaces, projections, eigenvalues, grid_deviation: deviation })
}

/// `P_j(e) x` via the polynomials `P_2 = L(2L-1)`, `P_1 = 4L(1-L)`,
/// `P_0 = (2L-1)(L-1)` in `L = L(e,e)`.
pub fn peirce_project<T: TripleVector>(e: &T, j: usize, x: &T) -> Result<T> {
    let lx = e.product(e, x)?;
    let llx = e.product(e, &lx)?;
    Ok(match j {
        2 => llx.scale_real(2.0).sub(&lx),
        1 => lx.sub(&llx).scale_real(4.0),
        0 => llx.scale_real(2.0).sub(&lx.scale_real(3.0)).add(x),
        _ => panic!("Peirce index must be 0, 1 or 2"),
    })
}

/// `x` lies in `E_j(e)` when `||P_j(e)x - x|| <= tol * max(1, |x|)`.
pub fn in_peirce_space<T: TripleVector>(e: &T, j: usize, x: &T, tol: f64) -> Result<bool> {
    let p = peirce_project(e, j, x)?;
    Ok(p.sub(x).coord_norm() <= tol * x.coord_norm().max(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct TripotentCert<T> {
    pub element: T,
    pub cube_residual: f64,
    pub peirce_dims: (usize, usize, usize),
    pub rank: usize,
    pub minimal: bool,
}

pub fn certify_tripotent<T: TripleVector>(e: &T, tol: f64) -> Result<TripotentCert<T>> {
    let r = cube_residual(e);
    if r > tol * e.norm().powi(3).max(1.0) {
        return Err(TripleError::NotTripotent(r));
    }
    let dec = peirce_decompose(e)?;
    let dims = dec.dims();
    Ok(TripotentCert {
        element: e.clone(),
        cube_residual: r,
        peirce_dims: dims,
        rank: rank_tripotent(e)?,
        minimal: dims.2 == 1,
    })
}

/// `dim E_2(e) = 1`.
pub fn is_minimal<T: TripleVector>(e: &T) -> Result<bool> {
    Ok(peirce_decompose(e)?.dims().2 == 1)
}

/// Number of minimal tripotents in a frame of `e`.
pub fn rank_tripotent<T: TripleVector>(e: &T) -> Result<usize> {
    require_tripotent(e)?;
    let mut r = 0;
    for p in e.parts() {
        r += part_rank(&p)?;
    }
    Ok(r)
}

fn unit_singular_count(m: &CMat) -> usize {
    linalg::complex_singular_values(m).iter().filter(|&&s| s > 0.5).count()
}

fn part_rank(p: &Element) -> Result<usize> {
    if p.is_zero() {
        return Ok(0);
    }
    Ok(match p.factor {
        FactorDescriptor::Type1 { .. } | FactorDescriptor::Type3 { .. } => {
            unit_singular_count(&p.embed_matrix()?)
        }
        FactorDescriptor::Type2 { .. } => unit_singular_count(&p.embed_matrix()?) / 2,
        FactorDescriptor::Spin { .. } => {
            if is_minimal(p)? {
                1
            } else {
                2
            }
        }
    })
}

/// Fixed minimal tripotent of a factor: `E11`, `E12 - E21`, `E11`, or
/// `(1, i, 0, ...)/2`.
pub fn canonical_minimal(factor: FactorDescriptor) -> Element {
    let mut e = factor.zero();
    match factor {
        FactorDescriptor::Spin { .. } => {
            e.coords[0] = Complex64::new(0.5, 0.0);
            e.coords[1] = Complex64::new(0.0, 0.5);
        }
        _ => e.coords[0] = Complex64::new(1.0, 0.0),
    }
    e
}

/// Mutually orthogonal minimal tripotents summing to `e`.
pub fn frame_of_minimals<T: TripleVector>(e: &T) -> Result<Vec<T>> {
    require_tripotent(e)?;
    let parts = e.parts();
    let zeros: Vec<Element> = parts.iter().map(|p| p.factor.zero()).collect();
    let mut out = Vec::new();
    for (k, p) in parts.iter().enumerate() {
        for piece in part_frame(p)? {
            let mut ps = zeros.clone();
            ps[k] = piece;
            out.push(e.with_parts(ps));
        }
    }
    let total = out.iter().fold(e.zero_like(), |acc, f| acc.add(f));
    let resid = total.sub(e).coord_norm();
    if resid > 1e-8 * e.coord_norm().max(1.0) {
        return Err(TripleError::Inconsistent(format!("frame re-sums to e with residual {resid:e}")));
    }
    Ok(out)
}

fn part_frame(p: &Element) -> Result<Vec<Element>> {
    if p.is_zero() {
        return Ok(Vec::new());
    }
    let f = p.factor;
    let pieces: Vec<CMat> = match f {
        FactorDescriptor::Type1 { .. } => {
            let m = p.embed_matrix()?;
            linalg::complex_thin_svd(&m, 0.0)
                .into_iter()
                .filter(|(s, _, _)| *s > 0.5)
                .map(|(_, u, v)| u * v.adjoint())
                .collect()
        }
        FactorDescriptor::Type3 { .. } => symmetric_frame(&p.embed_matrix()?),
        FactorDescriptor::Type2 { .. } => antisymmetric_frame(&p.embed_matrix()?),
        FactorDescriptor::Spin { .. } => return spin_frame(p),
    };
    pieces
        .iter()
        .map(|m| project_matrix_tol(m, f, 1e-6))
        .collect()
}

/// `e = sum u_i u_i^t` with `u_i` orthonormal and fixed by `x -> e conj(x)`.
fn symmetric_frame(e: &CMat) -> Vec<CMat> {
    let r = unit_singular_count(e);
    let p = e * e.adjoint();
    let mut cands: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let i = Complex64::new(0.0, 1.0);
    for c in p.column_iter() {
        let x = c.clone_owned();
        let jx = e * x.map(|z| z.conj());
        cands.push(&x + &jx);
        cands.push((&x - &jx) * i);
    }
    let mut us: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for _ in 0..r {
        let (best, norm) = cands
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .fold((0, -1.0), |acc, (k, n)| if n > acc.1 { (k, n) } else { acc });
        let mut u = cands[best].clone() / Complex64::new(norm, 0.0);
        for q in &us {
            let d = q.dotc(&u).re;
            u -= q * Complex64::new(d, 0.0);
        }
        let un = u.norm();
        u /= Complex64::new(un, 0.0);
        for v in cands.iter_mut() {
            let d = u.dotc(v).re;
            *v -= &u * Complex64::new(d, 0.0);
        }
        us.push(u);
    }
    us.iter().map(|u| u * u.transpose()).collect()
}

/// `e = sum (v u^t - u v^t)` with `v = e conj(u)`.
fn antisymmetric_frame(e: &CMat) -> Vec<CMat> {
    let r = unit_singular_count(e) / 2;
    let mut rest = e.clone();
    let mut out = Vec::with_capacity(r);
    for _ in 0..r {
        let p = &rest * rest.adjoint();
        let (best, norm) = p
            .column_iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold((0, -1.0), |acc, (k, n)| if n > acc.1 { (k, n) } else { acc });
        let u = p.column(best) / Complex64::new(norm, 0.0);
        let v = &rest * u.map(|z| z.conj());
        let f = &v * u.transpose() - &u * v.transpose();
        rest -= &f;
        out.push(f);
    }
    out
}

/// Minimal spin tripotents are returned as is; a complete tripotent
/// `mu r` (r real unit) splits as `mu (r +- i s)/2` with `s` a real unit
/// orthogonal to `r`.
fn spin_frame(p: &Element) -> Result<Vec<Element>> {
    if is_minimal(p)? {
        return Ok(vec![p.clone()]);
    }
    let n = p.coords.len();
    let mu = p.coords.iter().map(|z| z * z).sum::<Complex64>().sqrt();
    let r: Vec<f64> = p.coords.iter().map(|z| (z / mu).re).collect();
    // Real unit vector orthogonal to r, from the least aligned axis.
    let axis = (0..n)
        .min_by(|&a, &b| r[a].abs().partial_cmp(&r[b].abs()).unwrap())
        .unwrap();
    let mut s: Vec<f64> = (0..n).map(|k| if k == axis { 1.0 } else { 0.0 }).collect();
    let d: f64 = s.iter().zip(&r).map(|(a, b)| a * b).sum();
    for k in 0..n {
        s[k] -= d * r[k];
    }
    let sn = s.iter().map(|a| a * a).sum::<f64>().sqrt();
    s.iter_mut().for_each(|a| *a /= sn);
    let i = Complex64::new(0.0, 1.0);
    let half = mu * 0.5;
    let plus = (0..n).map(|k| half * (r[k] + i * s[k])).collect();
    let minus = (0..n).map(|k| half * (r[k] - i * s[k])).collect();
    Ok(vec![Element::new(p.factor, plus)?, Element::new(p.factor, minus)?])
}

/// `||L(x,y)|| <= tol ||x|| ||y||`.
pub fn are_orthogonal<T: TripleVector>(x: &T, y: &T, tol: f64) -> Result<bool> {
    let l = L_operator(x, y)?;
    Ok(operator_norm(&l) <= tol * (x.norm() * y.norm()).max(f64::MIN_POSITIVE))
}

/// `e` in `E_1(v)` and `v` in `E_1(e)`.
pub fn are_collinear<T: TripleVector>(e: &T, v: &T, tol: f64) -> Result<bool> {
    require_tripotent(e)?;
    require_tripotent(v)?;
    Ok(in_peirce_space(v, 1, e, tol)? && in_peirce_space(e, 1, v, tol)?)
}

/// `u` governs `w`: `w` in `E_2(u)` and `u` in `E_1(w)`.
pub fn governs<T: TripleVector>(u: &T, w: &T, tol: f64) -> Result<bool> {
    require_tripotent(u)?;
    require_tripotent(w)?;
    Ok(in_peirce_space(u, 2, w, tol)? && in_peirce_space(w, 1, u, tol)?)
}

/// `u - e` is a tripotent orthogonal to `e`.
pub fn leq<T: TripleVector>(e: &T, u: &T, tol: f64) -> bool {
    let d = u.sub(e);
    is_tripotent(&d, tol) && are_orthogonal(&d, e, tol).unwrap_or(false)
}

/// All Peirce projections of `e` and `v` commute.
pub fn compatible<T: TripleVector>(e: &T, v: &T, tol: f64) -> Result<bool> {
    let pe = peirce_decompose(e)?;
    let pv = peirce_decompose(v)?;
    for a in &pe.projections {
        for b in &pv.projections {
            let c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
            if c.norm() > tol.max(1e-12) * 10.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Residuals of `P_0 + P_1 + P_2 = I` and of idempotency.
pub fn projection_residuals(dec: &PeirceDecomposition) -> (f64, f64) {
    let n = dec.projections[0].matrix().nrows();
    let sum = dec.projections.iter().fold(DMatrix::zeros(n, n), |acc, p| acc + p.matrix());
    let completeness = (sum - DMatrix::<f64>::identity(n, n)).norm();
    let idem = dec
        .projections
        .iter()
        .map(|p| (p.matrix() * p.matrix() - p.matrix()).norm())
        .fold(0.0, f64::max);
    (completeness, idem)
}

/// `true` when the subspaces of two decompositions agree to `ANGLE_TOL`.
pub fn same_decomposition(a: &PeirceDecomposition, b: &PeirceDecomposition) -> bool {
    (0..3).all(|j| a.spaces[j].equals(&b.spaces[j], ANGLE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(i: usize, j: usize) -> Element {
        Element::matrix_unit(FactorDescriptor::type1(2, 2).unwrap(), i, j).unwrap()
    }

    fn m2(v: [f64; 4]) -> Element {
        Element::from_real_coords(FactorDescriptor::type1(2, 2).unwrap(), &v).unwrap()
    }

    fn spin3(v: [Complex64; 3]) -> Element {
        Element::new(FactorDescriptor::spin(3).unwrap(), v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tripotent_examples() {
        assert!(is_tripotent(&m(0, 0), DEFAULT_TOL));
        assert!(!is_tripotent(&m(0, 0).scale_real(2.0), DEFAULT_TOL));
        assert!(is_tripotent(&m2([0.5; 4]), DEFAULT_TOL));
        assert!(is_tripotent(&spin3([c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]), DEFAULT_TOL));
    }

    #[test]
    fn peirce_of_e11() {
        let dec = peirce_decompose(&m(0, 0)).unwrap();
        assert_eq!(dec.dims(), (1, 2, 1));
        assert!(dec.spaces[0].contains(&m(1, 1), 1e-12));
        assert!(dec.spaces[1].contains(&m(0, 1), 1e-12));
        assert!(dec.spaces[1].contains(&m(1, 0), 1e-12));
        assert!(dec.spaces[2].contains(&m(0, 0), 1e-12));
        let (comp, idem) = projection_residuals(&dec);
        assert!(comp < 1e-12 && idem < 1e-12);
    }

    #[test]
    fn unitaries_are_complete() {
        assert_eq!(peirce_decompose(&m2([1.0, 0.0, 0.0, 1.0])).unwrap().dims(), (0, 0, 4));
        let u = spin3([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        // Oracle: L(u,u) z = <u|u> z + <z|u> u - <u|conj z> conj u = z on
        // each basis vector.
        for k in 0..3 {
            let b = u.factor.basis(k);
            assert!(u.product(&u, &b).unwrap().sub(&b).coord_norm() < 1e-15);
        }
        assert_eq!(peirce_decompose(&u).unwrap().dims(), (0, 0, 3));
        assert!(!is_minimal(&u).unwrap());
        assert_eq!(rank_tripotent(&u).unwrap(), 2);
    }

    #[test]
    fn non_tripotent_rejected() {
        assert!(matches!(peirce_decompose(&m(0, 0).scale_real(2.0)), Err(TripleError::NotTripotent(_))));
    }

    #[test]
    fn rank_and_minimality() {
        assert!(is_minimal(&m(0, 0)).unwrap());
        assert_eq!(rank_tripotent(&m(0, 0)).unwrap(), 1);
        assert_eq!(rank_tripotent(&m2([1.0, 0.0, 0.0, 1.0])).unwrap(), 2);
        let e = spin3([c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]);
        assert!(is_minimal(&e).unwrap());
        assert_eq!(rank_tripotent(&e).unwrap(), 1);
    }

    #[test]
    fn frames() {
        let f = frame_of_minimals(&m2([1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.len(), 2);
        assert!(are_orthogonal(&f[0], &f[1], 1e-9).unwrap());
        assert!(f.iter().all(|x| is_minimal(x).unwrap()));

        assert_eq!(frame_of_minimals(&m(0, 1)).unwrap(), vec![m(0, 1)]);

        let u = spin3([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let f = frame_of_minimals(&u).unwrap();
        let plus = spin3([c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]);
        let minus = spin3([c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.0)]);
        assert!(f[0].sub(&plus).coord_norm() < 1e-15);
        assert!(f[1].sub(&minus).coord_norm() < 1e-15);
        assert!(are_orthogonal(&f[0], &f[1], 1e-12).unwrap());
    }

    #[test]
    fn relations() {
        assert!(are_orthogonal(&m(0, 0), &m(1, 1), 1e-12).unwrap());
        assert!(!are_orthogonal(&m(0, 0), &m(0, 1), 1e-9).unwrap());
        assert!(are_orthogonal(&m(0, 0), &m2([0.0; 4]), 1e-9).unwrap());
        assert!(are_collinear(&m(0, 0), &m(0, 1), 1e-12).unwrap());
        assert!(!are_collinear(&m(0, 0), &m(1, 1), 1e-9).unwrap());

        let s2 = FactorDescriptor::type3(2).unwrap();
        let u = Element::from_real_coords(s2, &[0.0, 1.0, 0.0]).unwrap();
        let e = Element::from_real_coords(s2, &[1.0, 0.0, 0.0]).unwrap();
        assert!(governs(&u, &e, 1e-12).unwrap());
        assert!(!governs(&e, &u, 1e-9).unwrap());

        assert!(leq(&m(0, 0), &m2([1.0, 0.0, 0.0, 1.0]), 1e-9));
        assert!(!leq(&m(0, 0), &m(0, 1), 1e-9));
        assert!(compatible(&m(0, 0), &m(1, 1), 1e-9).unwrap());
    }

    #[test]
    fn canonical_minimals_are_minimal() {
        for f in [
            FactorDescriptor::type1(2, 3).unwrap(),
            FactorDescriptor::type2(4).unwrap(),
            FactorDescriptor::type3(3).unwrap(),
            FactorDescriptor::spin(5).unwrap(),
        ] {
            assert!(is_minimal(&canonical_minimal(f)).unwrap(), "{f}");
        }
    }
}
