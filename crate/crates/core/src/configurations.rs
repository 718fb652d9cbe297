//! Quadrangles, trangles, their validators and combination tripotents.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TripleError};
use crate::factors::{Element, FactorDescriptor, TripleVector};
use crate::operators::{operator_norm, L_operator};
use crate::peirce::{cube_residual, is_minimal, is_tripotent, peirce_project};
use crate::sampling::complex_normal;

/// Tolerance on the coefficient constraints.
pub const COEFF_TOL: f64 = 1e-10;

/// `u1 ⊥ u3`, `u2 ⊥ u4`, cyclically collinear, `u4 = 2{u1,u2,u3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrangle<T> {
    pub u1: T,
    pub u2: T,
    pub u3: T,
    pub u4: T,
}

/// `w1 ⊥ w2`, `u ⊢ w1`, `u ⊢ w2`, `w1 = Q(u) w2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trangle<T> {
    pub w1: T,
    pub u: T,
    pub w2: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub relation: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigReport {
    pub checks: Vec<Check>,
    pub tol: f64,
    pub pass: bool,
}

struct Checker {
    tol: f64,
    checks: Vec<Check>,
}

impl Checker {
    fn push(&mut self, relation: String, residual: f64) {
        let pass = residual <= self.tol;
        self.checks.push(Check { relation, residual, pass });
    }

    fn finish(self) -> ConfigReport {
        let pass = self.checks.iter().all(|c| c.pass);
        ConfigReport { checks: self.checks, tol: self.tol, pass }
    }
}

fn peirce_defect<T: TripleVector>(e: &T, j: usize, x: &T) -> Result<f64> {
    Ok(peirce_project(e, j, x)?.sub(x).coord_norm())
}

fn orth_defect<T: TripleVector>(x: &T, y: &T) -> Result<f64> {
    Ok(operator_norm(&L_operator(x, y)?))
}

fn collinear_defect<T: TripleVector>(x: &T, y: &T) -> Result<f64> {
    Ok(peirce_defect(y, 1, x)?.max(peirce_defect(x, 1, y)?))
}

fn governs_defect<T: TripleVector>(u: &T, w: &T) -> Result<f64> {
    Ok(peirce_defect(u, 2, w)?.max(peirce_defect(w, 1, u)?))
}

pub fn validate_quadrangle<T: TripleVector>(q: &Quadrangle<T>, tol: f64) -> Result<ConfigReport> {
    let mut c = Checker { tol, checks: Vec::new() };
    let us = [&q.u1, &q.u2, &q.u3, &q.u4];
    for (i, u) in us.iter().enumerate() {
        c.push(format!("u{} tripotent", i + 1), cube_residual(*u));
    }
    c.push("u1 ⊥ u3".into(), orth_defect(&q.u1, &q.u3)?);
    c.push("u2 ⊥ u4".into(), orth_defect(&q.u2, &q.u4)?);
    for i in 0..4 {
        let j = (i + 1) % 4;
        c.push(format!("u{} ⊤ u{}", i + 1, j + 1), collinear_defect(us[i], us[j])?);
    }
    let p = q.u1.product(&q.u2, &q.u3)?.scale_real(2.0);
    c.push("u4 = 2{u1,u2,u3}".into(), p.sub(&q.u4).coord_norm());
    Ok(c.finish())
}

pub fn validate_trangle<T: TripleVector>(t: &Trangle<T>, tol: f64) -> Result<ConfigReport> {
    let mut c = Checker { tol, checks: Vec::new() };
    c.push("w1 tripotent".into(), cube_residual(&t.w1));
    c.push("u tripotent".into(), cube_residual(&t.u));
    c.push("w2 tripotent".into(), cube_residual(&t.w2));
    c.push("w1 ⊥ w2".into(), orth_defect(&t.w1, &t.w2)?);
    c.push("u ⊢ w1".into(), governs_defect(&t.u, &t.w1)?);
    c.push("u ⊢ w2".into(), governs_defect(&t.u, &t.w2)?);
    let qw2 = t.u.product(&t.w2, &t.u)?;
    c.push("w1 = Q(u) w2".into(), qw2.sub(&t.w1).coord_norm());
    let p = t.w1.product(&t.u, &t.w2)?.scale_real(2.0);
    c.push("u = 2{w1,u,w2}".into(), p.sub(&t.u).coord_norm());
    Ok(c.finish())
}

fn check_quadrangle_coeffs(a: Complex64, b: Complex64, g: Complex64, d: Complex64) -> Result<()> {
    let s = a.norm_sqr() + b.norm_sqr() + g.norm_sqr() + d.norm_sqr();
    if (s - 1.0).abs() > COEFF_TOL {
        return Err(TripleError::ConstraintViolation(format!("|α|²+|β|²+|γ|²+|δ|² = {s}")));
    }
    let det = (a * d - b * g).norm();
    if det > COEFF_TOL {
        return Err(TripleError::ConstraintViolation(format!("|αδ − βγ| = {det:e}")));
    }
    Ok(())
}

fn check_trangle_coeffs(a: Complex64, b: Complex64, d: Complex64) -> Result<()> {
    let s = a.norm_sqr() + 2.0 * b.norm_sqr() + d.norm_sqr();
    if (s - 1.0).abs() > COEFF_TOL {
        return Err(TripleError::ConstraintViolation(format!("|α|²+2|β|²+|δ|² = {s}")));
    }
    let det = (a * d - b * b).norm();
    if det > COEFF_TOL {
        return Err(TripleError::ConstraintViolation(format!("|αδ − β²| = {det:e}")));
    }
    Ok(())
}

fn verify_tripotent<T: TripleVector>(v: &T, what: &str) -> Result<()> {
    if is_tripotent(v, 1e-9) {
        Ok(())
    } else {
        Err(TripleError::Inconsistent(format!("{what} is not a tripotent ({:e})", cube_residual(v))))
    }
}

/// `v = α u1 + β u2 + γ u4 + δ u3`.
pub fn quadrangle_combo<T: TripleVector>(
    q: &Quadrangle<T>,
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
) -> Result<T> {
    check_quadrangle_coeffs(alpha, beta, gamma, delta)?;
    let v = q
        .u1
        .scale(alpha)
        .add(&q.u2.scale(beta))
        .add(&q.u4.scale(gamma))
        .add(&q.u3.scale(delta));
    verify_tripotent(&v, "quadrangle combination")?;
    if is_minimal(&q.u1)? && is_minimal(&q.u3)? && !is_minimal(&v)? {
        return Err(TripleError::Inconsistent("combination of a minimal quadrangle is not minimal".into()));
    }
    Ok(v)
}

/// `ṽ = conj(δ) u1 − conj(γ) u2 − conj(β) u4 + conj(α) u3`.
pub fn quadrangle_orthocomplement<T: TripleVector>(
    q: &Quadrangle<T>,
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
) -> Result<T> {
    let v = quadrangle_combo(q, alpha, beta, gamma, delta)?;
    let w = q
        .u1
        .scale(delta.conj())
        .sub(&q.u2.scale(gamma.conj()))
        .sub(&q.u4.scale(beta.conj()))
        .add(&q.u3.scale(alpha.conj()));
    verify_tripotent(&w, "orthocomplement")?;
    if orth_defect(&v, &w)? > 1e-9 {
        return Err(TripleError::Inconsistent("orthocomplement is not orthogonal to the combination".into()));
    }
    Ok(w)
}

/// `v = α w1 + β u + δ w2`.
pub fn trangle_combo<T: TripleVector>(t: &Trangle<T>, alpha: Complex64, beta: Complex64, delta: Complex64) -> Result<T> {
    check_trangle_coeffs(alpha, beta, delta)?;
    let v = t.w1.scale(alpha).add(&t.u.scale(beta)).add(&t.w2.scale(delta));
    verify_tripotent(&v, "trangle combination")?;
    if is_minimal(&t.w1)? && is_minimal(&t.w2)? && !is_minimal(&v)? {
        return Err(TripleError::Inconsistent("combination of a minimal trangle is not minimal".into()));
    }
    Ok(v)
}

/// `ṽ = conj(δ) w1 − conj(β) u + conj(α) w2`.
pub fn trangle_orthocomplement<T: TripleVector>(
    t: &Trangle<T>,
    alpha: Complex64,
    beta: Complex64,
    delta: Complex64,
) -> Result<T> {
    let v = trangle_combo(t, alpha, beta, delta)?;
    let w = t.w1.scale(delta.conj()).sub(&t.u.scale(beta.conj())).add(&t.w2.scale(alpha.conj()));
    verify_tripotent(&w, "orthocomplement")?;
    if orth_defect(&v, &w)? > 1e-9 {
        return Err(TripleError::Inconsistent("orthocomplement is not orthogonal to the combination".into()));
    }
    Ok(w)
}

fn coord(f: FactorDescriptor, entries: &[((usize, usize), Complex64)]) -> Element {
    let mut e = f.zero();
    for &((i, j), z) in entries {
        let k = f.coordinate_index(i, j).expect("entry inside the factor");
        e.coords[k] = z;
    }
    e
}

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Canonical quadrangle of a factor, validated.
pub fn standard_quadrangle(factor: FactorDescriptor) -> Result<Quadrangle<Element>> {
    let none = |why: &str| Err(TripleError::NoConfiguration(format!("{factor}: {why}")));
    let (u1, u2, u3) = match factor {
        FactorDescriptor::Type1 { m, n } => {
            if m < 2 || n < 2 {
                return none("rank-one factor has no quadrangle");
            }
            (coord(factor, &[((0, 0), ONE)]), coord(factor, &[((0, 1), ONE)]), coord(factor, &[((1, 1), ONE)]))
        }
        FactorDescriptor::Type2 { n } | FactorDescriptor::Type3 { n } => {
            if n < 4 {
                return none("needs n >= 4");
            }
            (coord(factor, &[((0, 1), ONE)]), coord(factor, &[((0, 3), ONE)]), coord(factor, &[((2, 3), ONE)]))
        }
        FactorDescriptor::Spin { n } => {
            if n < 4 {
                return none("three-dimensional spin factor has no quadrangle");
            }
            let h = Complex64::new(0.5, 0.0);
            let ih = Complex64::new(0.0, 0.5);
            let u1 = Element { factor, coords: spin_vec(n, &[(0, h), (1, ih)]) };
            let u2 = Element { factor, coords: spin_vec(n, &[(2, h), (3, ih)]) };
            let u3 = u1.conj();
            (u1, u2, u3)
        }
    };
    let u4 = u1.product(&u2, &u3)?.scale_real(2.0);
    let q = Quadrangle { u1, u2, u3, u4 };
    let rep = validate_quadrangle(&q, 1e-12)?;
    if !rep.pass {
        return Err(TripleError::Inconsistent(format!("standard quadrangle of {factor} fails validation")));
    }
    Ok(q)
}

fn spin_vec(n: usize, entries: &[(usize, Complex64)]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for &(i, z) in entries {
        v[i] = z;
    }
    v
}

/// Canonical trangle of a type 3 or spin factor, validated.
pub fn standard_trangle(factor: FactorDescriptor) -> Result<Trangle<Element>> {
    let t = match factor {
        FactorDescriptor::Type3 { n } if n >= 2 => Trangle {
            w1: coord(factor, &[((0, 0), ONE)]),
            u: coord(factor, &[((0, 1), ONE)]),
            w2: coord(factor, &[((1, 1), ONE)]),
        },
        FactorDescriptor::Spin { n } => {
            let w1 = Element {
                factor,
                coords: spin_vec(n, &[(0, Complex64::new(0.5, 0.0)), (1, Complex64::new(0.0, 0.5))]),
            };
            let w2 = w1.conj().scale_real(-1.0);
            Trangle { w1, u: Element { factor, coords: spin_vec(n, &[(2, ONE)]) }, w2 }
        }
        _ => {
            return Err(TripleError::NoConfiguration(format!(
                "{factor}: standard trangles are built in type 3 and spin factors"
            )))
        }
    };
    let rep = validate_trangle(&t, 1e-12)?;
    if !rep.pass {
        return Err(TripleError::Inconsistent(format!("standard trangle of {factor} fails validation")));
    }
    Ok(t)
}

/// Random `(α, β, γ, δ)` with `Σ|·|² = 1` and `αδ = βγ`.
pub fn sample_quadrangle_coeffs<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 4] {
    let mut a = complex_normal(rng);
    let mut b = complex_normal(rng);
    let mut g = complex_normal(rng);
    let mut d;
    if rng.gen_bool(0.1) {
        a = Complex64::new(0.0, 0.0);
        if b.norm() < g.norm() {
            b = Complex64::new(0.0, 0.0);
        } else {
            g = Complex64::new(0.0, 0.0);
        }
        d = complex_normal(rng);
    } else {
        d = b * g / a;
    }
    let s = (a.norm_sqr() + b.norm_sqr() + g.norm_sqr() + d.norm_sqr()).sqrt();
    a /= s;
    b /= s;
    g /= s;
    d /= s;
    [a, b, g, d]
}

/// Random `(α, β, δ)` with `|α|²+2|β|²+|δ|² = 1` and `αδ = β²`.
pub fn sample_trangle_coeffs<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 3] {
    let (mut a, mut b, mut d);
    if rng.gen_bool(0.1) {
        a = Complex64::new(0.0, 0.0);
        b = Complex64::new(0.0, 0.0);
        d = complex_normal(rng);
    } else {
        a = complex_normal(rng);
        b = complex_normal(rng);
        d = b * b / a;
    }
    let s = (a.norm_sqr() + 2.0 * b.norm_sqr() + d.norm_sqr()).sqrt();
    a /= s;
    b /= s;
    d /= s;
    [a, b, d]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn m2() -> FactorDescriptor {
        FactorDescriptor::type1(2, 2).unwrap()
    }

    fn mat(v: [f64; 4]) -> Element {
        Element::from_real_coords(m2(), &v).unwrap()
    }

    #[test]
    fn standard_configurations_validate() {
        let q = standard_quadrangle(m2()).unwrap();
        assert_eq!(q.u4, mat([0.0, 0.0, 1.0, 0.0]));
        let s2 = FactorDescriptor::type3(2).unwrap();
        let t = standard_trangle(s2).unwrap();
        assert_eq!(t.u, Element::from_real_coords(s2, &[0.0, 1.0, 0.0]).unwrap());
        assert!(standard_quadrangle(FactorDescriptor::type1(1, 3).unwrap()).is_err());
        assert!(standard_trangle(m2()).is_err());
    }

    #[test]
    fn broken_quadrangle_fails() {
        let q = Quadrangle { u1: mat([1.0, 0.0, 0.0, 0.0]), u2: mat([0.0, 1.0, 0.0, 0.0]), u3: mat([0.0, 0.0, 0.0, 1.0]), u4: mat([0.0, 1.0, 0.0, 0.0]) };
        let rep = validate_quadrangle(&q, 1e-9).unwrap();
        assert!(!rep.pass);
        assert!(rep.checks.iter().any(|ch| ch.relation == "u2 ⊥ u4" && !ch.pass));
    }

    #[test]
    fn quadrangle_combos() {
        let q = standard_quadrangle(m2()).unwrap();
        let h = c(0.5);
        let v = quadrangle_combo(&q, h, h, h, h).unwrap();
        assert!(v.sub(&mat([0.5; 4])).coord_norm() < 1e-15);
        let w = quadrangle_orthocomplement(&q, h, h, h, h).unwrap();
        assert!(w.sub(&mat([0.5, -0.5, -0.5, 0.5])).coord_norm() < 1e-15);

        let z = c(0.0);
        let v = quadrangle_combo(&q, c(0.6), c(0.8), z, z).unwrap();
        assert!(v.sub(&mat([0.6, 0.8, 0.0, 0.0])).coord_norm() < 1e-15);
        assert!(is_minimal(&v).unwrap());
        assert_eq!(quadrangle_combo(&q, c(1.0), z, z, z).unwrap(), q.u1);
        assert_eq!(quadrangle_orthocomplement(&q, c(1.0), z, z, z).unwrap(), q.u3);
        let w = quadrangle_orthocomplement(&q, z, c(1.0), z, z).unwrap();
        assert_eq!(w, q.u4.scale_real(-1.0));
        assert!(matches!(quadrangle_combo(&q, c(1.0), c(1.0), z, z), Err(TripleError::ConstraintViolation(_))));
    }

    #[test]
    fn trangle_combos() {
        let s2 = FactorDescriptor::type3(2).unwrap();
        let t = standard_trangle(s2).unwrap();
        let h = c(0.5);
        let plus = trangle_combo(&t, h, h, h).unwrap();
        assert!(plus.sub(&Element::from_real_coords(s2, &[0.5, 0.5, 0.5]).unwrap()).coord_norm() < 1e-15);
        let minus = trangle_combo(&t, h, c(-0.5), h).unwrap();
        assert!(minus.sub(&Element::from_real_coords(s2, &[0.5, -0.5, 0.5]).unwrap()).coord_norm() < 1e-15);
        assert!(is_minimal(&plus).unwrap() && is_minimal(&minus).unwrap());
        assert!(crate::peirce::are_orthogonal(&plus, &minus, 1e-12).unwrap());
        assert_eq!(trangle_combo(&t, c(1.0), c(0.0), c(0.0)).unwrap(), t.w1);
        let w = trangle_orthocomplement(&t, h, h, h).unwrap();
        assert!(w.sub(&minus).coord_norm() < 1e-15);
    }

    #[test]
    fn every_family_has_its_configurations() {
        for f in [
            FactorDescriptor::type1(3, 2).unwrap(),
            FactorDescriptor::type2(4).unwrap(),
            FactorDescriptor::type3(4).unwrap(),
            FactorDescriptor::spin(4).unwrap(),
        ] {
            standard_quadrangle(f).unwrap();
        }
        for f in [FactorDescriptor::type3(3).unwrap(), FactorDescriptor::spin(3).unwrap(), FactorDescriptor::spin(7).unwrap()] {
            standard_trangle(f).unwrap();
        }
    }
}
