//! Exact Gaussian-rational triple products and certificates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, TripleError};
use crate::factors::{Element, FactorDescriptor};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `re + i im` with rational parts; always reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    /// `(a/b) + i (c/d)`.
    pub fn frac(a: i64, b: i64, c: i64, d: i64) -> Self {
        GaussianRational { re: rat(a, b), im: rat(c, d) }
    }

    pub fn real(a: i64, b: i64) -> Self {
        GaussianRational::frac(a, b, 0, 1)
    }

    pub fn zero() -> Self {
        GaussianRational { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        GaussianRational { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn i() -> Self {
        GaussianRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        GaussianRational { re: &self.re * r, im: &self.im * r }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_negative() { "-" } else { "+" };
        write!(f, "{} {} {}i", rat_string(&self.re), sign, rat_string(&self.im.abs()))
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [rat_string(&self.re), rat_string(&self.im)].serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatRepr {
    Text(String),
    Int(i64),
}

fn parse_rat(r: RatRepr) -> std::result::Result<BigRational, String> {
    match r {
        RatRepr::Int(n) => Ok(rat(n, 1)),
        RatRepr::Text(t) => t.trim().parse::<BigRational>().map_err(|e| format!("bad rational '{t}': {e}")),
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[RatRepr; 2]>::deserialize(d)?;
        let re = parse_rat(re).map_err(serde::de::Error::custom)?;
        let im = parse_rat(im).map_err(serde::de::Error::custom)?;
        Ok(GaussianRational::new(re, im))
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

type GR = GaussianRational;

/// Element of a factor with exact coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExactRepr")]
pub struct ExactElement {
    pub factor: FactorDescriptor,
    pub coords: Vec<GaussianRational>,
}

#[derive(Deserialize)]
struct ExactRepr {
    factor: FactorDescriptor,
    coords: Vec<GaussianRational>,
}

impl TryFrom<ExactRepr> for ExactElement {
    type Error = TripleError;
    fn try_from(r: ExactRepr) -> Result<Self> {
        r.factor.validate()?;
        ExactElement::new(r.factor, r.coords)
    }
}

type ExactMat = Vec<Vec<GR>>;

fn zero_mat(r: usize, c: usize) -> ExactMat {
    vec![vec![GR::zero(); c]; r]
}

fn mat_mul(a: &ExactMat, b: &ExactMat) -> ExactMat {
    let (r, k, c) = (a.len(), b.len(), b.first().map_or(0, |x| x.len()));
    let mut out = zero_mat(r, c);
    for i in 0..r {
        for j in 0..c {
            let mut s = GR::zero();
            for t in 0..k {
                s = &s + &(&a[i][t] * &b[t][j]);
            }
            out[i][j] = s;
        }
    }
    out
}

fn adjoint(a: &ExactMat) -> ExactMat {
    let (r, c) = (a.len(), a.first().map_or(0, |x| x.len()));
    let mut out = zero_mat(c, r);
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            out[j][i] = z.conj();
        }
    }
    out
}

impl ExactElement {
    pub fn new(factor: FactorDescriptor, coords: Vec<GaussianRational>) -> Result<Self> {
        if coords.len() != factor.complex_dim() {
            return Err(TripleError::DimensionMismatch { expected: factor.complex_dim(), got: coords.len() });
        }
        Ok(ExactElement { factor, coords })
    }

    pub fn zero(factor: FactorDescriptor) -> Self {
        ExactElement { factor, coords: vec![GR::zero(); factor.complex_dim()] }
    }

    /// Coordinate `(i, j)` set to `z`, the rest zero.
    pub fn unit(factor: FactorDescriptor, i: usize, j: usize, z: GaussianRational) -> Result<Self> {
        let mut e = ExactElement::zero(factor);
        let k = factor
            .coordinate_index(i, j)
            .ok_or_else(|| TripleError::InvalidFactor(format!("({i},{j}) is not a coordinate of {factor}")))?;
        e.coords[k] = z;
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|z| z.is_zero())
    }

    pub fn add(&self, o: &ExactElement) -> ExactElement {
        ExactElement { factor: self.factor, coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &ExactElement) -> ExactElement {
        ExactElement { factor: self.factor, coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &GaussianRational) -> ExactElement {
        ExactElement { factor: self.factor, coords: self.coords.iter().map(|a| s * a).collect() }
    }

    pub fn conj(&self) -> ExactElement {
        ExactElement { factor: self.factor, coords: self.coords.iter().map(|a| a.conj()).collect() }
    }

    pub fn to_element(&self) -> Element {
        Element { factor: self.factor, coords: self.coords.iter().map(|z| z.to_complex()).collect() }
    }

    fn embed(&self) -> ExactMat {
        let (r, c) = self.factor.matrix_shape().expect("matrix factor");
        let mut m = zero_mat(r, c);
        for (k, &(i, j)) in self.factor.coordinate_positions().iter().enumerate() {
            m[i][j] = self.coords[k].clone();
            match self.factor {
                FactorDescriptor::Type2 { .. } => m[j][i] = -&self.coords[k],
                FactorDescriptor::Type3 { .. } if i != j => m[j][i] = self.coords[k].clone(),
                _ => {}
            }
        }
        m
    }

    fn read(factor: FactorDescriptor, m: &ExactMat) -> ExactElement {
        let coords = factor.coordinate_positions().iter().map(|&(i, j)| m[i][j].clone()).collect();
        ExactElement { factor, coords }
    }
}

/// `a` is a truncation of `b`: `{a,a,a} = {a,b,a}` exactly.
pub fn exact_is_truncation(a: &ExactElement, b: &ExactElement) -> Result<bool> {
    Ok(exact_triple_product(a, a, a)? == exact_triple_product(a, b, a)?)
}

/// `Q(a) x = {a,x,a} = 0` exactly.
pub fn exact_annihilates(a: &ExactElement, x: &ExactElement) -> Result<bool> {
    Ok(exact_triple_product(a, x, a)?.is_zero())
}

fn spin_inner(x: &[GR], y: &[GR]) -> GR {
    x.iter().zip(y).fold(GR::zero(), |acc, (a, b)| &acc + &(a * &b.conj()))
}

/// `{x,y,z}` evaluated exactly.
pub fn exact_triple_product(x: &ExactElement, y: &ExactElement, z: &ExactElement) -> Result<ExactElement> {
    if x.factor != y.factor || y.factor != z.factor {
        return Err(TripleError::FactorMismatch(format!("{}, {}, {}", x.factor, y.factor, z.factor)));
    }
    let f = x.factor;
    if let FactorDescriptor::Spin { .. } = f {
        let xy = spin_inner(&x.coords, &y.coords);
        let zy = spin_inner(&z.coords, &y.coords);
        let zc: Vec<GR> = z.coords.iter().map(|c| c.conj()).collect();
        let xzc = spin_inner(&x.coords, &zc);
        let coords = (0..f.complex_dim())
            .map(|k| &(&(&xy * &z.coords[k]) + &(&zy * &x.coords[k])) - &(&xzc * &y.coords[k].conj()))
            .collect();
        return Ok(ExactElement { factor: f, coords });
    }
    let (a, b, c) = (x.embed(), y.embed(), z.embed());
    let bs = adjoint(&b);
    let p = mat_mul(&mat_mul(&a, &bs), &c);
    let q = mat_mul(&mat_mul(&c, &bs), &a);
    let half = GR::real(1, 2);
    let sum: ExactMat =
        p.iter().zip(&q).map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| &half * &(u + v)).collect()).collect();
    Ok(ExactElement::read(f, &sum))
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    /// Number of nonzero coordinates of the difference; zero certifies.
    pub nonzero_coordinates: usize,
    pub holds: bool,
}

fn check(identity: &str, diff: &ExactElement) -> IdentityCheck {
    let nz = diff.coords.iter().filter(|z| !z.is_zero()).count();
    IdentityCheck { identity: identity.into(), nonzero_coordinates: nz, holds: nz == 0 }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointCertificate {
    pub factor: String,
    pub point: Vec<GaussianRational>,
    pub checks: Vec<IdentityCheck>,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub statement: String,
    pub points: Vec<PointCertificate>,
    pub certified: bool,
}

fn finish(statement: &str, points: Vec<PointCertificate>) -> Certificate {
    let certified = !points.is_empty() && points.iter().all(|p| p.certified);
    Certificate { statement: statement.into(), points, certified }
}

fn point_cert(factor: FactorDescriptor, point: &[GR], checks: Vec<IdentityCheck>) -> PointCertificate {
    let certified = checks.iter().all(|c| c.holds);
    PointCertificate { factor: factor.to_string(), point: point.to_vec(), checks, certified }
}

fn cube(x: &ExactElement) -> Result<ExactElement> {
    exact_triple_product(x, x, x)
}

/// Rational unit vectors used to build constrained points.
fn unit_pairs() -> Vec<(GR, GR)> {
    vec![
        (GR::one(), GR::zero()),
        (GR::zero(), GR::one()),
        (GR::real(3, 5), GR::real(4, 5)),
        (GR::real(5, 13), GR::real(-12, 13)),
        (GR::frac(0, 1, 3, 5), GR::real(4, 5)),
        (GR::frac(1, 2, 1, 2), GR::frac(1, 2, -1, 2)),
        (GR::real(8, 17), GR::frac(0, 1, 15, 17)),
    ]
}

/// Points `(a, b, g, d) = (p1 q1, p1 q2, p2 q1, p2 q2)` over rational unit
/// vectors, plus `(1/2, 1/2, 1/2, 1/2)`.
pub fn default_quadrangle_points() -> Vec<[GR; 4]> {
    let units = unit_pairs();
    let mut out = vec![[GR::real(1, 2), GR::real(1, 2), GR::real(1, 2), GR::real(1, 2)]];
    for (p1, p2) in &units {
        for (q1, q2) in units.iter().step_by(2) {
            out.push([p1 * q1, p1 * q2, p2 * q1, p2 * q2]);
        }
    }
    out
}

/// Points `(a, b, d) = (p^2, p q, q^2)` over rational unit vectors.
pub fn default_trangle_points() -> Vec<[GR; 3]> {
    let mut out = vec![[GR::real(1, 2), GR::real(1, 2), GR::real(1, 2)]];
    for (p, q) in unit_pairs() {
        out.push([&p * &p, &p * &q, &q * &q]);
    }
    out
}

fn quadrangle_constraints(pt: &[GR; 4]) -> Result<()> {
    let [a, b, g, d] = pt;
    let s = a.norm_sqr() + b.norm_sqr() + g.norm_sqr() + d.norm_sqr();
    if !s.is_one() {
        return Err(TripleError::ConstraintViolation(format!("|α|²+|β|²+|γ|²+|δ|² = {}", rat_string(&s))));
    }
    if !(&(a * d) - &(b * g)).is_zero() {
        return Err(TripleError::ConstraintViolation("αδ ≠ βγ".into()));
    }
    Ok(())
}

fn trangle_constraints(pt: &[GR; 3]) -> Result<()> {
    let [a, b, d] = pt;
    let s = a.norm_sqr() + b.norm_sqr() * rat(2, 1) + d.norm_sqr();
    if !s.is_one() {
        return Err(TripleError::ConstraintViolation(format!("|α|²+2|β|²+|δ|² = {}", rat_string(&s))));
    }
    if !(&(a * d) - &(b * b)).is_zero() {
        return Err(TripleError::ConstraintViolation("αδ ≠ β²".into()));
    }
    Ok(())
}

/// `(E11, E12, E22, E21)` in `M_n`.
fn exact_quadrangle(n: usize) -> Result<[ExactElement; 4]> {
    let f = FactorDescriptor::type1(n, n)?;
    let one = GR::one();
    Ok([
        ExactElement::unit(f, 0, 0, one.clone())?,
        ExactElement::unit(f, 0, 1, one.clone())?,
        ExactElement::unit(f, 1, 1, one.clone())?,
        ExactElement::unit(f, 1, 0, one)?,
    ])
}

/// For each point and for `M2` and `M3`: `u4 = 2{u1,u2,u3}`, `{v,v,v} = v`,
/// `{v,v,ṽ} = 0`, `{ṽ,ṽ,v} = 0` and `{ṽ,ṽ,ṽ} = ṽ`.
pub fn certify_quadrangle_lemma(points: &[[GR; 4]]) -> Result<Certificate> {
    let mut out = Vec::new();
    for pt in points {
        quadrangle_constraints(pt)?;
        let [a, b, g, d] = pt;
        for n in [2, 3] {
            let [u1, u2, u3, u4] = exact_quadrangle(n)?;
            let v = u1.scale(a).add(&u2.scale(b)).add(&u4.scale(g)).add(&u3.scale(d));
            let w = u1.scale(&d.conj()).sub(&u2.scale(&g.conj())).sub(&u4.scale(&b.conj())).add(&u3.scale(&a.conj()));
            let two = GR::real(2, 1);
            let checks = vec![
                check("u4 = 2{u1,u2,u3}", &exact_triple_product(&u1, &u2, &u3)?.scale(&two).sub(&u4)),
                check("{v,v,v} = v", &cube(&v)?.sub(&v)),
                check("{v,v,ṽ} = 0", &exact_triple_product(&v, &v, &w)?),
                check("{ṽ,ṽ,v} = 0", &exact_triple_product(&w, &w, &v)?),
                check("{ṽ,ṽ,ṽ} = ṽ", &cube(&w)?.sub(&w)),
            ];
            out.push(point_cert(u1.factor, pt, checks));
        }
    }
    Ok(finish("α u1 + β u2 + γ u4 + δ u3 is a tripotent orthogonal to its complement", out))
}

/// For each point, on `(E11, E12 + E21, E22)` in `S2`: `w1 = Q(u) w2`,
/// `u = 2{w1,u,w2}`, `{v,v,v} = v` and `{v,v,ṽ} = 0`.
pub fn certify_trangle_lemma(points: &[[GR; 3]]) -> Result<Certificate> {
    let f = FactorDescriptor::type3(2)?;
    let one = GR::one();
    let w1 = ExactElement::unit(f, 0, 0, one.clone())?;
    let u = ExactElement::unit(f, 0, 1, one.clone())?;
    let w2 = ExactElement::unit(f, 1, 1, one)?;
    let two = GR::real(2, 1);
    let mut out = Vec::new();
    for pt in points {
        trangle_constraints(pt)?;
        let [a, b, d] = pt;
        let v = w1.scale(a).add(&u.scale(b)).add(&w2.scale(d));
        let w = w1.scale(&d.conj()).sub(&u.scale(&b.conj())).add(&w2.scale(&a.conj()));
        let checks = vec![
            check("w1 = {u,w2,u}", &exact_triple_product(&u, &w2, &u)?.sub(&w1)),
            check("u = 2{w1,u,w2}", &exact_triple_product(&w1, &u, &w2)?.scale(&two).sub(&u)),
            check("{v,v,v} = v", &cube(&v)?.sub(&v)),
            check("{v,v,ṽ} = 0", &exact_triple_product(&v, &v, &w)?),
            check("{ṽ,ṽ,ṽ} = ṽ", &cube(&w)?.sub(&w)),
        ];
        out.push(point_cert(f, pt, checks));
    }
    Ok(finish("α w1 + β u + δ w2 is a tripotent orthogonal to its complement", out))
}

/// `e = E11`, `w = E12 + E21`: `{e,w,e} = 0` while `{w,e,w} = E22`, in
/// `M2` and `S2`.
pub fn certify_annihilator_asymmetry() -> Result<Certificate> {
    let mut out = Vec::new();
    for f in [FactorDescriptor::type1(2, 2)?, FactorDescriptor::type3(2)?] {
        let one = GR::one();
        let e = ExactElement::unit(f, 0, 0, one.clone())?;
        let mut w = ExactElement::unit(f, 0, 1, one.clone())?;
        if let Some(k) = f.coordinate_index(1, 0) {
            if f.coordinate_index(0, 1) != Some(k) {
                w.coords[k] = one.clone();
            }
        }
        let e22 = ExactElement::unit(f, 1, 1, one)?;
        let wew = exact_triple_product(&w, &e, &w)?;
        let checks = vec![
            check("{e,w,e} = 0", &exact_triple_product(&e, &w, &e)?),
            check("{w,e,w} = E22", &wew.sub(&e22)),
            IdentityCheck { identity: "{w,e,w} ≠ 0".into(), nonzero_coordinates: 0, holds: !wew.is_zero() },
        ];
        out.push(point_cert(f, &[], checks));
    }
    Ok(finish("w annihilates e quadratically but e does not annihilate w", out))
}

/// `p + q sqrt(2)` with rational `p`, `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrt2 {
    pub p: BigRational,
    pub q: BigRational,
}

impl QSqrt2 {
    pub fn new(p: BigRational, q: BigRational) -> Self {
        QSqrt2 { p, q }
    }

    pub fn int(p: i64, q: i64) -> Self {
        QSqrt2 { p: rat(p, 1), q: rat(q, 1) }
    }

    pub fn zero() -> Self {
        QSqrt2::int(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn add(&self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { p: &self.p + &o.p, q: &self.q + &o.q }
    }

    pub fn sub(&self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { p: &self.p - &o.p, q: &self.q - &o.q }
    }

    pub fn mul(&self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { p: &self.p * &o.p + &self.q * &o.q * rat(2, 1), q: &self.p * &o.q + &self.q * &o.p }
    }

    /// `f(p + q sqrt(2)) = q + p sqrt(2)`.
    pub fn swap(&self) -> QSqrt2 {
        QSqrt2 { p: self.q.clone(), q: self.p.clone() }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}√2", rat_string(&self.p), rat_string(&self.q))
    }
}

impl Serialize for QSqrt2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [rat_string(&self.p), rat_string(&self.q)].serialize(s)
    }
}

/// `re + i im` over `Q(sqrt 2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WildScalar {
    pub re: QSqrt2,
    pub im: QSqrt2,
}

impl WildScalar {
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn conj(&self) -> WildScalar {
        WildScalar { re: self.re.clone(), im: QSqrt2::zero().sub(&self.im) }
    }

    fn add(&self, o: &WildScalar) -> WildScalar {
        WildScalar { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    fn sub(&self, o: &WildScalar) -> WildScalar {
        WildScalar { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    fn mul(&self, o: &WildScalar) -> WildScalar {
        WildScalar {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    /// The additive bijection, coordinatewise over `{1, i}`.
    pub fn wild(&self) -> WildScalar {
        WildScalar { re: self.re.swap(), im: self.im.swap() }
    }
}

/// `{x,y,x} = x^2 conj(y)` in `C`; `x` is a truncation of `y` iff
/// `x^2 conj(y) = x^2 conj(x)`.
fn wild_truncation(x: &WildScalar, y: &WildScalar) -> bool {
    let xx = x.mul(x);
    xx.mul(&y.conj()).sub(&xx.mul(&x.conj())).is_zero()
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearityViolation {
    pub x: WildScalar,
    /// `f(sqrt(2) x)`.
    pub f_of_scaled: WildScalar,
    /// `sqrt(2) f(x)`.
    pub scaled_f: WildScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct WildReport {
    pub pairs: usize,
    pub truncation_pairs: usize,
    /// Pairs where the truncation relation of `(x, y)` and `(f x, f y)` agree.
    pub preserved: usize,
    pub forward_failures: usize,
    pub backward_failures: usize,
    pub additive_on_sample: bool,
    pub involution_on_sample: bool,
    pub linearity_violation: LinearityViolation,
    pub pass: bool,
}

fn wild_samples() -> Vec<WildScalar> {
    let vals = [(0, 0), (1, 0), (0, 1), (2, -1), (-3, 2), (1, 1)];
    let mut out = Vec::new();
    for (i, &(a, b)) in vals.iter().enumerate() {
        for &(c, d) in vals.iter().skip(i % 3).step_by(2) {
            out.push(WildScalar { re: QSqrt2::int(a, b), im: QSqrt2::int(c, d) });
        }
    }
    out
}

/// Exact check that the additive bijection `f(p + q sqrt 2) = q + p sqrt 2`
/// of `Q(sqrt 2)(i)` preserves truncations in both directions on a sample
/// while failing real homogeneity.
pub fn wild_additive_demo() -> WildReport {
    let xs = wild_samples();
    let (mut pairs, mut tp, mut preserved, mut fwd, mut bwd) = (0, 0, 0, 0, 0);
    let mut additive = true;
    for x in &xs {
        for y in &xs {
            pairs += 1;
            let (s, t) = (wild_truncation(x, y), wild_truncation(&x.wild(), &y.wild()));
            tp += s as usize;
            if s == t {
                preserved += 1;
            } else if s {
                fwd += 1;
            } else {
                bwd += 1;
            }
            additive &= x.add(y).wild() == x.wild().add(&y.wild());
        }
    }
    let involution = xs.iter().all(|x| x.wild().wild() == *x);
    let one = WildScalar { re: QSqrt2::int(1, 0), im: QSqrt2::zero() };
    let sqrt2 = WildScalar { re: QSqrt2::int(0, 1), im: QSqrt2::zero() };
    let f_of_scaled = sqrt2.mul(&one).wild();
    let scaled_f = sqrt2.mul(&one.wild());
    let violated = f_of_scaled != scaled_f;
    WildReport {
        pairs,
        truncation_pairs: tp,
        preserved,
        forward_failures: fwd,
        backward_failures: bwd,
        additive_on_sample: additive,
        involution_on_sample: involution,
        pass: fwd == 0 && bwd == 0 && additive && involution && violated,
        linearity_violation: LinearityViolation { x: one, f_of_scaled, scaled_f },
    }
}
