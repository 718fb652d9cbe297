//! Realified operators: `L(a,b)`, `Q(a)`, kernels, subspaces and the
//! Jordan identity checker.
//!
//! Every map acts on interleaved realified coordinates, so complex-linear
//! and conjugate-linear maps share one representation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TripleError};
use crate::factors::{complex_from_real, AtomicElement, AtomicTriple, Element, TripleVector};
use crate::linalg::{self, RMat};
use crate::sampling::{random_atomic, trial_rng};

/// Relative tolerance of the J-commutation classification.
pub const LINEARITY_TOL: f64 = 1e-10;
/// Default relative kernel tolerance.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearity {
    ComplexLinear,
    ConjugateLinear,
    GeneralReal,
}

/// Real matrix on realified coordinates, `2 dim(codomain) x 2 dim(domain)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealLinearOperator {
    domain: AtomicTriple,
    codomain: AtomicTriple,
    matrix: RMat,
    tag: Linearity,
}

/// Classifies a realified matrix by (anti)commutation with `J`.
pub fn classify(matrix: &RMat) -> Linearity {
    let jd = linalg::j_matrix(matrix.ncols() / 2);
    let jc = linalg::j_matrix(matrix.nrows() / 2);
    let scale = matrix.norm().max(1.0);
    let mj = matrix * &jd;
    let jm = &jc * matrix;
    if (&mj - &jm).norm() <= LINEARITY_TOL * scale {
        Linearity::ComplexLinear
    } else if (&mj + &jm).norm() <= LINEARITY_TOL * scale {
        Linearity::ConjugateLinear
    } else {
        Linearity::GeneralReal
    }
}

impl RealLinearOperator {
    pub fn new(domain: AtomicTriple, codomain: AtomicTriple, matrix: RMat) -> Result<Self> {
        let (r, c) = (2 * codomain.complex_dim(), 2 * domain.complex_dim());
        if matrix.nrows() != r || matrix.ncols() != c {
            return Err(TripleError::DimensionMismatch {
                expected: r * c,
                got: matrix.nrows() * matrix.ncols(),
            });
        }
        let tag = classify(&matrix);
        Ok(RealLinearOperator { domain, codomain, matrix, tag })
    }

    /// Matrix of `f` evaluated on the real basis of `domain`.
    pub fn from_fn(
        domain: AtomicTriple,
        codomain: AtomicTriple,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let n = 2 * domain.complex_dim();
        let mut m = RMat::zeros(2 * codomain.complex_dim(), n);
        let mut basis = vec![0.0; n];
        for j in 0..n {
            basis[j] = 1.0;
            let col = f(&basis);
            basis[j] = 0.0;
            m.column_mut(j).copy_from_slice(&col);
        }
        RealLinearOperator::new(domain, codomain, m)
    }

    pub fn identity(space: AtomicTriple) -> Self {
        let n = 2 * space.complex_dim();
        RealLinearOperator {
            domain: space.clone(),
            codomain: space,
            matrix: RMat::identity(n, n),
            tag: Linearity::ComplexLinear,
        }
    }

    pub fn zero(domain: AtomicTriple, codomain: AtomicTriple) -> Self {
        let m = RMat::zeros(2 * codomain.complex_dim(), 2 * domain.complex_dim());
        RealLinearOperator { domain, codomain, matrix: m, tag: Linearity::ComplexLinear }
    }

    pub fn domain(&self) -> &AtomicTriple {
        &self.domain
    }

    pub fn codomain(&self) -> &AtomicTriple {
        &self.codomain
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn linearity(&self) -> Linearity {
        self.tag
    }

    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).as_slice().to_vec()
    }

    /// Image of an element of the domain, as an element of the codomain.
    pub fn apply_atomic(&self, x: &AtomicElement) -> Result<AtomicElement> {
        if x.triple != self.domain {
            return Err(TripleError::FactorMismatch(format!(
                "operator domain {} applied to {}",
                self.domain, x.triple
            )));
        }
        self.codomain.from_real(&self.apply_real(&x.to_real()))
    }

    /// Image of a vector living in the domain, in the same representation.
    /// Requires `domain == codomain`.
    pub fn apply<T: TripleVector>(&self, x: &T) -> Result<T> {
        if x.space() != self.domain || self.domain != self.codomain {
            return Err(TripleError::FactorMismatch(format!(
                "operator {} -> {} applied to {}",
                self.domain,
                self.codomain,
                x.space()
            )));
        }
        Ok(x.with_real(&self.apply_real(&x.to_real())))
    }

    pub fn compose(&self, inner: &RealLinearOperator) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(TripleError::FactorMismatch("composition spaces differ".into()));
        }
        RealLinearOperator::new(inner.domain.clone(), self.codomain.clone(), &self.matrix * &inner.matrix)
    }

    pub fn sub(&self, other: &RealLinearOperator) -> Result<Self> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(TripleError::FactorMismatch("difference of operators on different spaces".into()));
        }
        RealLinearOperator::new(self.domain.clone(), self.codomain.clone(), &self.matrix - &other.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        RealLinearOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * s,
            tag: self.tag,
        }
    }

    /// Inverse; fails when the matrix is not square or numerically singular.
    pub fn inverse(&self) -> Result<Self> {
        if self.matrix.nrows() != self.matrix.ncols() {
            return Err(TripleError::Singular);
        }
        let sv = linalg::singular_values(&self.matrix);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smax == 0.0 || smin <= 1e-12 * smax {
            return Err(TripleError::Singular);
        }
        let inv = self.matrix.clone().try_inverse().ok_or(TripleError::Singular)?;
        RealLinearOperator::new(self.codomain.clone(), self.domain.clone(), inv)
    }

    /// Block of the matrix mapping factor `k` of the domain into factor
    /// `j` of the codomain.
    pub fn block(&self, j: usize, k: usize) -> RMat {
        let (ro, co) = (self.codomain.offsets(), self.domain.offsets());
        let r0 = 2 * ro[j];
        let c0 = 2 * co[k];
        self.matrix
            .view((r0, c0), (2 * (ro[j + 1] - ro[j]), 2 * (co[k + 1] - co[k])))
            .into_owned()
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    domain: AtomicTriple,
    codomain: AtomicTriple,
    matrix: Vec<f64>,
}

impl Serialize for RealLinearOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.matrix.nrows();
        let cols = self.matrix.ncols();
        let flat = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|p| self.matrix[p]).collect();
        OperatorRepr {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: flat,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RealLinearOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OperatorRepr::deserialize(d)?;
        let rows = 2 * r.codomain.complex_dim();
        let cols = 2 * r.domain.complex_dim();
        if r.matrix.len() != rows * cols {
            return Err(serde::de::Error::custom(format!(
                "matrix has {} entries, expected {}",
                r.matrix.len(),
                rows * cols
            )));
        }
        let m = RMat::from_row_slice(rows, cols, &r.matrix);
        RealLinearOperator::new(r.domain, r.codomain, m).map_err(serde::de::Error::custom)
    }
}

/// Realified operator on the space of `like`, block diagonal over factors,
/// whose factor-`k` block sends a basis element `b` to `f(k, b)`.
fn blockwise<T: TripleVector>(like: &T, f: impl Fn(usize, &Element) -> Result<Element>) -> Result<RealLinearOperator> {
    let space = like.space();
    let n = 2 * space.complex_dim();
    let mut m = RMat::zeros(n, n);
    let i = Complex64::new(0.0, 1.0);
    for (k, factor) in space.factors().iter().enumerate() {
        let off = 2 * space.offsets()[k];
        for c in 0..factor.complex_dim() {
            for (s, unit) in [Complex64::new(1.0, 0.0), i].into_iter().enumerate() {
                let mut b = factor.zero();
                b.coords[c] = unit;
                let img = f(k, &b)?;
                for (r, z) in img.coords.iter().enumerate() {
                    m[(off + 2 * r, off + 2 * c + s)] = z.re;
                    m[(off + 2 * r + 1, off + 2 * c + s)] = z.im;
                }
            }
        }
    }
    RealLinearOperator::new(space.clone(), space, m)
}

/// `L(a,b) = {a, b, .}`.
#[allow(non_snake_case)]
pub fn L_operator<T: TripleVector>(a: &T, b: &T) -> Result<RealLinearOperator> {
    if !a.same_space(b) {
        return Err(TripleError::FactorMismatch("L(a,b) with a, b in different spaces".into()));
    }
    let (ap, bp) = (a.parts(), b.parts());
    let op = blockwise(a, |k, x| crate::factors::triple_product(&ap[k], &bp[k], x))?;
    debug_assert_eq!(op.tag, Linearity::ComplexLinear);
    Ok(op)
}

/// `Q(a) = {a, ., a}`.
#[allow(non_snake_case)]
pub fn Q_operator<T: TripleVector>(a: &T) -> RealLinearOperator {
    let ap = a.parts();
    let op = blockwise(a, |k, x| crate::factors::triple_product(&ap[k], x, &ap[k]))
        .expect("parts share factors");
    debug_assert!(a.is_zero() || op.tag == Linearity::ConjugateLinear);
    op
}

pub fn operator_norm(op: &RealLinearOperator) -> f64 {
    linalg::spectral_norm(&op.matrix)
}

/// Real subspace of a realified space with orthonormal basis columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient: AtomicTriple,
    basis: RMat,
    complex_flag: bool,
}

/// Principal-angle threshold for subspace inclusion and equality.
pub const ANGLE_TOL: f64 = 1e-8;

impl Subspace {
    /// Span of the given real columns.
    pub fn from_columns(ambient: AtomicTriple, cols: &RMat, rel_tol: f64) -> Self {
        assert_eq!(cols.nrows(), 2 * ambient.complex_dim());
        Subspace::from_orthonormal(ambient, linalg::orthonormalize(cols, rel_tol))
    }

    /// Span of elements.
    pub fn span<T: TripleVector>(ambient: AtomicTriple, xs: &[T]) -> Self {
        let n = 2 * ambient.complex_dim();
        if xs.is_empty() {
            return Subspace::from_orthonormal(ambient, RMat::zeros(n, 0));
        }
        let cols: Vec<_> = xs.iter().map(|x| nalgebra::DVector::from_vec(x.to_real())).collect();
        Subspace::from_columns(ambient, &RMat::from_columns(&cols), 1e-9)
    }

    /// Complex span of elements.
    pub fn complex_span<T: TripleVector>(ambient: AtomicTriple, xs: &[T]) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let mut all: Vec<T> = xs.to_vec();
        all.extend(xs.iter().map(|x| x.scale(i)));
        Subspace::span(ambient, &all)
    }

    pub fn from_orthonormal(ambient: AtomicTriple, basis: RMat) -> Self {
        let complex_flag = is_j_invariant(&basis);
        Subspace { ambient, basis, complex_flag }
    }

    pub fn full(ambient: AtomicTriple) -> Self {
        let n = 2 * ambient.complex_dim();
        Subspace::from_orthonormal(ambient, RMat::identity(n, n))
    }

    pub fn ambient(&self) -> &AtomicTriple {
        &self.ambient
    }

    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn complex_flag(&self) -> bool {
        self.complex_flag
    }

    pub fn real_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Complex dimension; `None` when not closed under multiplication by `i`.
    pub fn complex_dim(&self) -> Option<usize> {
        self.complex_flag.then_some(self.basis.ncols() / 2)
    }

    /// Basis vectors as elements of the ambient sum.
    pub fn elements(&self) -> Vec<AtomicElement> {
        self.basis
            .column_iter()
            .map(|c| self.ambient.from_flat(&complex_from_real(c.as_slice())).unwrap())
            .collect()
    }

    /// Orthogonal projection onto the subspace, in canonical coordinates.
    pub fn project_real(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        let p = &self.basis * (self.basis.transpose() * x);
        p.as_slice().to_vec()
    }

    /// Relative distance of `v` from the subspace.
    pub fn distance_ratio(&self, v: &[f64]) -> f64 {
        let n: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let p = self.project_real(v);
        let d: f64 = v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        d / n
    }

    pub fn contains<T: TripleVector>(&self, x: &T, tol: f64) -> bool {
        self.distance_ratio(&x.to_real()) <= tol
    }

    /// Sine of the largest principal angle from `self` into `other`.
    pub fn inclusion_sine(&self, other: &Subspace) -> f64 {
        linalg::inclusion_sine(&self.basis, &other.basis)
    }

    pub fn is_subspace_of(&self, other: &Subspace, angle_tol: f64) -> bool {
        self.inclusion_sine(other) <= angle_tol.sin()
    }

    pub fn equals(&self, other: &Subspace, angle_tol: f64) -> bool {
        self.real_dim() == other.real_dim() && self.is_subspace_of(other, angle_tol)
    }

    /// Largest principal angle between equal-dimensional subspaces, or
    /// `pi/2` when the dimensions differ.
    pub fn max_angle(&self, other: &Subspace) -> f64 {
        if self.real_dim() != other.real_dim() {
            return std::f64::consts::FRAC_PI_2;
        }
        self.inclusion_sine(other).asin()
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let n = self.basis.nrows();
        let id = RMat::identity(n, n);
        let p1 = &id - &self.basis * self.basis.transpose();
        let p2 = &id - &other.basis * other.basis.transpose();
        let mut stacked = RMat::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&p1);
        stacked.view_mut((n, 0), (n, n)).copy_from(&p2);
        let k = linalg::kernel_basis(&stacked, 1e-7);
        Subspace::from_orthonormal(self.ambient.clone(), k)
    }

    /// Image under an operator whose domain is the ambient space.
    pub fn image(&self, op: &RealLinearOperator) -> Subspace {
        let img = &op.matrix * &self.basis;
        Subspace::from_columns(op.codomain.clone(), &img, 1e-9)
    }
}

fn is_j_invariant(basis: &RMat) -> bool {
    if basis.ncols() == 0 {
        return true;
    }
    if basis.ncols() % 2 == 1 {
        return false;
    }
    let j = linalg::j_matrix(basis.nrows() / 2);
    let jb = &j * basis;
    linalg::inclusion_sine(&jb, basis) <= 1e-8
}

/// Numerical kernel: singular values `<= tol * sigma_max`.
pub fn kernel(op: &RealLinearOperator, tol: f64) -> Subspace {
    let k = linalg::kernel_basis(&op.matrix, tol);
    Subspace::from_orthonormal(op.domain.clone(), k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanReport {
    pub trials: usize,
    pub max_residual: f64,
    /// Largest residual divided by the product of the coordinate norms.
    pub max_relative: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Residual of the Jordan identity
/// `L(w,v){x,y,z} = {L(w,v)x,y,z} - {x,L(v,w)y,z} + {x,y,L(w,v)z}`.
pub fn jordan_residual<T: TripleVector>(w: &T, v: &T, x: &T, y: &T, z: &T) -> Result<f64> {
    let lwv = |t: &T| w.product(v, t);
    let lhs = lwv(&x.product(y, z)?)?;
    let r1 = lwv(x)?.product(y, z)?;
    let r2 = x.product(&v.product(w, y)?, z)?;
    let r3 = x.product(y, &lwv(z)?)?;
    Ok(lhs.sub(&r1).add(&r2).sub(&r3).coord_norm())
}

/// Jordan identity over random 5-tuples in `space`.
pub fn check_jordan_identity(space: impl Into<AtomicTriple>, trials: usize, seed: u64) -> JordanReport {
    check_jordan_identity_tol(space, trials, seed, 1e-9)
}

pub fn check_jordan_identity_tol(
    space: impl Into<AtomicTriple>,
    trials: usize,
    seed: u64,
    threshold: f64,
) -> JordanReport {
    let space = space.into();
    let mut max_residual: f64 = 0.0;
    let mut max_relative: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let xs: Vec<AtomicElement> = (0..5).map(|_| random_atomic(&space, &mut rng)).collect();
        let r = jordan_residual(&xs[0], &xs[1], &xs[2], &xs[3], &xs[4]).expect("same space");
        let scale: f64 = xs.iter().map(|x| x.coord_norm()).product();
        max_residual = max_residual.max(r);
        if scale > 0.0 {
            max_relative = max_relative.max(r / scale);
        }
    }
    JordanReport {
        trials,
        max_residual,
        max_relative,
        threshold,
        pass: max_relative <= threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::FactorDescriptor;

    fn m2() -> FactorDescriptor {
        FactorDescriptor::type1(2, 2).unwrap()
    }

    fn unit(i: usize, j: usize) -> Element {
        Element::matrix_unit(m2(), i, j).unwrap()
    }

    #[test]
    fn l_of_e11_is_diagonal_with_peirce_values() {
        let e = unit(0, 0);
        let l = L_operator(&e, &e).unwrap();
        assert_eq!(l.linearity(), Linearity::ComplexLinear);
        // Oracle: evaluate {e, e, E_ij} directly on each matrix unit.
        for (i, j, lam) in [(0, 0, 1.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.0)] {
            let x = unit(i, j);
            let lx = l.apply(&x).unwrap();
            assert!(lx.sub(&x.scale_real(lam)).coord_norm() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_units_have_zero_l() {
        let l = L_operator(&unit(0, 0), &unit(1, 1)).unwrap();
        assert_eq!(operator_norm(&l), 0.0);
        let z = m2().zero();
        assert_eq!(operator_norm(&L_operator(&z, &unit(0, 1)).unwrap()), 0.0);
    }

    #[test]
    fn q_operator_examples() {
        let e = unit(0, 0);
        let w = Element::from_real_coords(m2(), &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let q = Q_operator(&e);
        assert_eq!(q.linearity(), Linearity::ConjugateLinear);
        assert!(q.apply(&w).unwrap().is_zero());

        let s2 = FactorDescriptor::type3(2).unwrap();
        let w1 = Element::from_real_coords(s2, &[1.0, 0.0, 0.0]).unwrap();
        let u = Element::from_real_coords(s2, &[0.0, 1.0, 0.0]).unwrap();
        let w2 = Element::from_real_coords(s2, &[0.0, 0.0, 1.0]).unwrap();
        assert!(Q_operator(&u).apply(&w1).unwrap().sub(&w2).coord_norm() < 1e-15);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&Q_operator(&unit(0, 0)), KERNEL_TOL);
        assert_eq!(k.complex_dim(), Some(3));
        assert!(k.contains(&unit(0, 1), 1e-12));
        assert!(!k.contains(&unit(0, 0), 1e-3));
        let id = Element::from_real_coords(m2(), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(kernel(&Q_operator(&id), KERNEL_TOL).real_dim(), 0);
        let zero = RealLinearOperator::zero(m2().into(), m2().into());
        assert_eq!(kernel(&zero, KERNEL_TOL).real_dim(), 8);
    }

    #[test]
    fn jordan_identity_in_models() {
        assert!(check_jordan_identity(FactorDescriptor::type1(3, 2).unwrap(), 100, 1).pass);
        assert!(check_jordan_identity(FactorDescriptor::spin(4).unwrap(), 100, 2).pass);
        let z = m2().zero();
        assert_eq!(jordan_residual(&z, &z, &z, &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_examples() {
        let id = RealLinearOperator::identity(m2().into());
        assert!((operator_norm(&id) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&id.scale(2.0)) - 2.0).abs() < 1e-15);
        assert_eq!(operator_norm(&RealLinearOperator::zero(m2().into(), m2().into())), 0.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = Element::new(m2(), vec![Complex64::new(0.1, 0.3), Complex64::new(1.0 / 3.0, 0.0), Complex64::new(0.0, 2.5), Complex64::new(-1e-7, 0.0)]).unwrap();
        let l = L_operator(&x, &unit(0, 1)).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: RealLinearOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }
}
