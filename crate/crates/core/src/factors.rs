//! Cartan factors of types 1 to 4, their elements, triple products and norms.
//!
//! Coordinates are complex and follow a fixed canonical basis:
//! type 1 row-major, type 3 upper triangle row-major, type 2 strict upper
//! triangle row-major, spin standard coordinates.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TripleError};

pub type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which Cartan factor, with its dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FactorRepr", into = "FactorRepr")]
pub enum FactorDescriptor {
    /// Rectangular complex `m x n` matrices.
    Type1 { m: usize, n: usize },
    /// Antisymmetric `n x n` matrices.
    Type2 { n: usize },
    /// Symmetric `n x n` matrices.
    Type3 { n: usize },
    /// Spin factor on `C^n` with entrywise conjugation, `n >= 3`.
    Spin { n: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum FactorRepr {
    Type1 { m: usize, n: usize },
    Type2 { n: usize },
    Type3 { n: usize },
    #[serde(alias = "type4")]
    Spin { n: usize },
}

impl TryFrom<FactorRepr> for FactorDescriptor {
    type Error = TripleError;
    fn try_from(r: FactorRepr) -> Result<Self> {
        let f = match r {
            FactorRepr::Type1 { m, n } => FactorDescriptor::Type1 { m, n },
            FactorRepr::Type2 { n } => FactorDescriptor::Type2 { n },
            FactorRepr::Type3 { n } => FactorDescriptor::Type3 { n },
            FactorRepr::Spin { n } => FactorDescriptor::Spin { n },
        };
        f.validate()?;
        Ok(f)
    }
}

impl From<FactorDescriptor> for FactorRepr {
    fn from(f: FactorDescriptor) -> Self {
        match f {
            FactorDescriptor::Type1 { m, n } => FactorRepr::Type1 { m, n },
            FactorDescriptor::Type2 { n } => FactorRepr::Type2 { n },
            FactorDescriptor::Type3 { n } => FactorRepr::Type3 { n },
            FactorDescriptor::Spin { n } => FactorRepr::Spin { n },
        }
    }
}

impl fmt::Display for FactorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorDescriptor::Type1 { m, n } => write!(f, "Type1({m},{n})"),
            FactorDescriptor::Type2 { n } => write!(f, "Type2({n})"),
            FactorDescriptor::Type3 { n } => write!(f, "Type3({n})"),
            FactorDescriptor::Spin { n } => write!(f, "Spin({n})"),
        }
    }
}

impl FactorDescriptor {
    pub fn type1(m: usize, n: usize) -> Result<Self> {
        let f = FactorDescriptor::Type1 { m, n };
        f.validate().map(|_| f)
    }

    pub fn type2(n: usize) -> Result<Self> {
        let f = FactorDescriptor::Type2 { n };
        f.validate().map(|_| f)
    }

    pub fn type3(n: usize) -> Result<Self> {
        let f = FactorDescriptor::Type3 { n };
        f.validate().map(|_| f)
    }

    pub fn spin(n: usize) -> Result<Self> {
        let f = FactorDescriptor::Spin { n };
        f.validate().map(|_| f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FactorDescriptor::Type1 { m, n } if m == 0 || n == 0 => Err(
                TripleError::InvalidFactor(format!("Type1({m},{n}) has a zero dimension")),
            ),
            FactorDescriptor::Type2 { n } if n < 2 => Err(TripleError::InvalidFactor(
                format!("Type2({n}) is the zero space"),
            )),
            FactorDescriptor::Type3 { n } if n == 0 => {
                Err(TripleError::InvalidFactor("Type3(0) is the zero space".into()))
            }
            FactorDescriptor::Spin { n } if n < 3 => Err(TripleError::InvalidFactor(format!(
                "Spin({n}) is not a factor; spin factors need n >= 3"
            ))),
            _ => Ok(()),
        }
    }

    pub fn complex_dim(&self) -> usize {
        match *self {
            FactorDescriptor::Type1 { m, n } => m * n,
            FactorDescriptor::Type2 { n } => n * (n - 1) / 2,
            FactorDescriptor::Type3 { n } => n * (n + 1) / 2,
            FactorDescriptor::Spin { n } => n,
        }
    }

    /// Maximal number of mutually orthogonal minimal tripotents.
    pub fn rank(&self) -> usize {
        match *self {
            FactorDescriptor::Type1 { m, n } => m.min(n),
            FactorDescriptor::Type2 { n } => n / 2,
            FactorDescriptor::Type3 { n } => n,
            FactorDescriptor::Spin { .. } => 2,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FactorDescriptor::Type1 { .. } => "type1",
            FactorDescriptor::Type2 { .. } => "type2",
            FactorDescriptor::Type3 { .. } => "type3",
            FactorDescriptor::Spin { .. } => "spin",
        }
    }

    pub fn is_spin(&self) -> bool {
        matches!(self, FactorDescriptor::Spin { .. })
    }

    /// Shape of the embedding matrix; `None` for spin factors.
    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        match *self {
            FactorDescriptor::Type1 { m, n } => Some((m, n)),
            FactorDescriptor::Type2 { n } | FactorDescriptor::Type3 { n } => Some((n, n)),
            FactorDescriptor::Spin { .. } => None,
        }
    }

    /// Matrix positions `(i, j)` of each canonical coordinate, in order.
    pub fn coordinate_positions(&self) -> Vec<(usize, usize)> {
        match *self {
            FactorDescriptor::Type1 { m, n } => {
                (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
            }
            FactorDescriptor::Type2 { n } => {
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
            }
            FactorDescriptor::Type3 { n } => {
                (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
            }
            FactorDescriptor::Spin { n } => (0..n).map(|i| (i, 0)).collect(),
        }
    }

    /// Index of the canonical coordinate holding matrix entry `(i, j)`.
    pub fn coordinate_index(&self, i: usize, j: usize) -> Option<usize> {
        match *self {
            FactorDescriptor::Type1 { m, n } => (i < m && j < n).then_some(i * n + j),
            FactorDescriptor::Type2 { .. } | FactorDescriptor::Type3 { .. } => {
                let key = (i.min(j), i.max(j));
                self.coordinate_positions().iter().position(|&p| p == key)
            }
            FactorDescriptor::Spin { n } => (j == 0 && i < n).then_some(i),
        }
    }

    /// Weights turning coordinates into the trace inner product, in which
    /// every `L(a, a)` is self-adjoint.
    pub fn metric_weights(&self) -> Vec<f64> {
        match *self {
            FactorDescriptor::Type1 { .. } | FactorDescriptor::Spin { .. } => {
                vec![1.0; self.complex_dim()]
            }
            FactorDescriptor::Type2 { .. } => vec![2.0; self.complex_dim()],
            FactorDescriptor::Type3 { .. } => self
                .coordinate_positions()
                .into_iter()
                .map(|(i, j)| if i == j { 1.0 } else { 2.0 })
                .collect(),
        }
    }

    pub fn zero(&self) -> Element {
        Element {
            factor: *self,
            coords: vec![ZERO; self.complex_dim()],
        }
    }

    /// Canonical basis vector `k`.
    pub fn basis(&self, k: usize) -> Element {
        let mut e = self.zero();
        e.coords[k] = Complex64::new(1.0, 0.0);
        e
    }

    /// Full matrix of a coordinate vector (types 1 to 3).
    pub fn embed_coords(&self, coords: &[Complex64]) -> Result<CMat> {
        let (r, c) = self.matrix_shape().ok_or(TripleError::SpinEmbedding)?;
        let mut m = CMat::zeros(r, c);
        for (k, (i, j)) in self.coordinate_positions().into_iter().enumerate() {
            let v = coords[k];
            m[(i, j)] = v;
            match self {
                FactorDescriptor::Type2 { .. } => m[(j, i)] = -v,
                FactorDescriptor::Type3 { .. } => m[(j, i)] = v,
                _ => {}
            }
        }
        Ok(m)
    }

    /// Reads canonical coordinates off a matrix without checking symmetry.
    fn read_coords(&self, m: &CMat) -> Vec<Complex64> {
        self.coordinate_positions()
            .into_iter()
            .map(|(i, j)| m[(i, j)])
            .collect()
    }

    /// Triple product on raw coordinate slices.
    pub fn triple_product_coords(
        &self,
        x: &[Complex64],
        y: &[Complex64],
        z: &[Complex64],
    ) -> Vec<Complex64> {
        match self {
            FactorDescriptor::Spin { .. } => spin_product(x, y, z),
            _ => {
                let a = self.embed_coords(x).expect("matrix factor");
                let b = self.embed_coords(y).expect("matrix factor");
                let c = self.embed_coords(z).expect("matrix factor");
                let p = c_star_product(&a, &b, &c);
                self.read_coords(&p)
            }
        }
    }

    /// Norm on raw coordinates.
    pub fn norm_coords(&self, x: &[Complex64]) -> f64 {
        match self {
            FactorDescriptor::Spin { .. } => spin_norm(x),
            _ => {
                let m = self.embed_coords(x).expect("matrix factor");
                operator_norm_complex(&m)
            }
        }
    }
}

/// `(a b* c + c b* a) / 2`.
pub fn c_star_product(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let bs = b.adjoint();
    let p = a * &bs * c + c * &bs * a;
    p.scale(0.5)
}

/// Largest singular value.
pub fn operator_norm_complex(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    crate::linalg::complex_singular_values(m).first().cloned().unwrap_or(0.0)
}

/// `<x|y> = sum x_i conj(y_i)`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// `<x|y> z + <z|y> x - <x|conj z> conj y`.
fn spin_product(x: &[Complex64], y: &[Complex64], z: &[Complex64]) -> Vec<Complex64> {
    let xy = inner(x, y);
    let zy = inner(z, y);
    // <x | conj z> = sum x_i z_i
    let xz: Complex64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
    (0..x.len())
        .map(|i| xy * z[i] + zy * x[i] - xz * y[i].conj())
        .collect()
}

/// `||x||^2 = <x|x> + sqrt(<x|x>^2 - |<x|conj x>|^2)`.
fn spin_norm(x: &[Complex64]) -> f64 {
    let s = inner(x, x).re;
    let t: Complex64 = x.iter().map(|a| a * a).sum();
    let disc = (s * s - t.norm_sqr()).max(0.0);
    (s + disc.sqrt()).max(0.0).sqrt()
}

/// A vector in a single Cartan factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub factor: FactorDescriptor,
    #[serde(with = "complex_pairs")]
    pub coords: Vec<Complex64>,
}

impl Element {
    pub fn new(factor: FactorDescriptor, coords: Vec<Complex64>) -> Result<Self> {
        factor.validate()?;
        if coords.len() != factor.complex_dim() {
            return Err(TripleError::DimensionMismatch {
                expected: factor.complex_dim(),
                got: coords.len(),
            });
        }
        Ok(Element { factor, coords })
    }

    pub fn from_real_coords(factor: FactorDescriptor, coords: &[f64]) -> Result<Self> {
        Element::new(factor, coords.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Type 1 matrix unit `E_ij` (zero-based).
    pub fn matrix_unit(factor: FactorDescriptor, i: usize, j: usize) -> Result<Self> {
        let mut m = CMat::zeros(factor.matrix_shape().map_or(0, |s| s.0), factor.matrix_shape().map_or(0, |s| s.1));
        if i >= m.nrows() || j >= m.ncols() {
            return Err(TripleError::InvalidFactor(format!("no entry ({i},{j}) in {factor}")));
        }
        m[(i, j)] = Complex64::new(1.0, 0.0);
        if let FactorDescriptor::Type1 { .. } = factor {
            project_matrix(&m, factor)
        } else {
            Err(TripleError::InvalidFactor(format!("matrix units live in type 1, not {factor}")))
        }
    }

    pub fn embed_matrix(&self) -> Result<CMat> {
        self.factor.embed_coords(&self.coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Reads an element off a full matrix, rejecting symmetry violations.
pub fn project_matrix(m: &CMat, factor: FactorDescriptor) -> Result<Element> {
    project_matrix_tol(m, factor, 1e-9)
}

pub fn project_matrix_tol(m: &CMat, factor: FactorDescriptor, tol: f64) -> Result<Element> {
    let (r, c) = factor.matrix_shape().ok_or(TripleError::SpinEmbedding)?;
    if m.nrows() != r || m.ncols() != c {
        return Err(TripleError::DimensionMismatch {
            expected: r * c,
            got: m.nrows() * m.ncols(),
        });
    }
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let defect = match factor {
        FactorDescriptor::Type2 { .. } => (m + m.transpose()).iter().map(|v| v.norm()).fold(0.0, f64::max),
        FactorDescriptor::Type3 { .. } => (m - m.transpose()).iter().map(|v| v.norm()).fold(0.0, f64::max),
        _ => 0.0,
    };
    if defect > tol * scale {
        return Err(TripleError::ConstraintViolation(format!(
            "matrix violates the {} symmetry constraint by {defect:e}",
            factor.kind_name()
        )));
    }
    Ok(Element {
        factor,
        coords: factor.read_coords(m),
    })
}

pub fn triple_product(x: &Element, y: &Element, z: &Element) -> Result<Element> {
    if x.factor != y.factor || x.factor != z.factor {
        return Err(TripleError::FactorMismatch(format!(
            "{} / {} / {}",
            x.factor, y.factor, z.factor
        )));
    }
    Ok(Element {
        factor: x.factor,
        coords: x.factor.triple_product_coords(&x.coords, &y.coords, &z.coords),
    })
}

pub fn factor_norm(x: &Element) -> f64 {
    x.factor.norm_coords(&x.coords)
}

/// Finite ell-infinity sum of Cartan factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr", into = "TripleRepr")]
pub struct AtomicTriple {
    factors: Vec<FactorDescriptor>,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    factors: Vec<FactorDescriptor>,
}

impl TryFrom<TripleRepr> for AtomicTriple {
    type Error = TripleError;
    fn try_from(r: TripleRepr) -> Result<Self> {
        AtomicTriple::new(r.factors)
    }
}

impl From<AtomicTriple> for TripleRepr {
    fn from(t: AtomicTriple) -> Self {
        TripleRepr { factors: t.factors }
    }
}

impl fmt::Display for AtomicTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.factors.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", names.join(" + "))
    }
}

impl AtomicTriple {
    pub fn new(factors: Vec<FactorDescriptor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(TripleError::InvalidFactor("empty direct sum".into()));
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for f in &factors {
            f.validate()?;
            acc += f.complex_dim();
            offsets.push(acc);
        }
        Ok(AtomicTriple { factors, offsets })
    }

    pub fn single(factor: FactorDescriptor) -> Self {
        AtomicTriple {
            offsets: vec![0, factor.complex_dim()],
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[FactorDescriptor] {
        &self.factors
    }

    /// Prefix sums of complex dims; `offsets[k]..offsets[k + 1]` is factor `k`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn complex_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn rank(&self) -> usize {
        self.factors.iter().map(|f| f.rank()).sum()
    }

    pub fn metric_weights(&self) -> Vec<f64> {
        self.factors.iter().flat_map(|f| f.metric_weights()).collect()
    }

    pub fn zero(&self) -> AtomicElement {
        AtomicElement {
            triple: self.clone(),
            parts: self.factors.iter().map(|f| f.zero()).collect(),
        }
    }

    /// Element of the sum supported in factor `k`.
    pub fn embed_part(&self, k: usize, x: &Element) -> Result<AtomicElement> {
        if self.factors.get(k) != Some(&x.factor) {
            return Err(TripleError::FactorMismatch(format!(
                "factor {k} of {self} is not {}",
                x.factor
            )));
        }
        let mut z = self.zero();
        z.parts[k] = x.clone();
        Ok(z)
    }

    /// Index of the factor holding flat coordinate `i`.
    pub fn factor_of_coordinate(&self, i: usize) -> usize {
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    pub fn from_flat(&self, coords: &[Complex64]) -> Result<AtomicElement> {
        if coords.len() != self.complex_dim() {
            return Err(TripleError::DimensionMismatch {
                expected: self.complex_dim(),
                got: coords.len(),
            });
        }
        let parts = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| Element {
                factor: *f,
                coords: coords[self.offsets[k]..self.offsets[k + 1]].to_vec(),
            })
            .collect();
        Ok(AtomicElement {
            triple: self.clone(),
            parts,
        })
    }

    pub fn from_real(&self, v: &[f64]) -> Result<AtomicElement> {
        self.from_flat(&complex_from_real(v))
    }
}

impl From<FactorDescriptor> for AtomicTriple {
    fn from(f: FactorDescriptor) -> Self {
        AtomicTriple::single(f)
    }
}

/// `x = (pi_k(x))_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicElement {
    pub triple: AtomicTriple,
    pub parts: Vec<Element>,
}

impl AtomicElement {
    pub fn new(triple: AtomicTriple, parts: Vec<Element>) -> Result<Self> {
        if parts.len() != triple.len() {
            return Err(TripleError::DimensionMismatch {
                expected: triple.len(),
                got: parts.len(),
            });
        }
        for (k, p) in parts.iter().enumerate() {
            if p.factor != triple.factors[k] || p.coords.len() != p.factor.complex_dim() {
                return Err(TripleError::FactorMismatch(format!(
                    "part {k} is in {}, expected {}",
                    p.factor, triple.factors[k]
                )));
            }
        }
        Ok(AtomicElement { triple, parts })
    }
}

impl From<Element> for AtomicElement {
    fn from(x: Element) -> Self {
        AtomicElement {
            triple: AtomicTriple::single(x.factor),
            parts: vec![x],
        }
    }
}

pub fn sum_norm(x: &AtomicElement) -> f64 {
    x.parts.iter().map(factor_norm).fold(0.0, f64::max)
}

pub fn sum_triple_product(
    x: &AtomicElement,
    y: &AtomicElement,
    z: &AtomicElement,
) -> Result<AtomicElement> {
    if x.triple != y.triple || x.triple != z.triple {
        return Err(TripleError::FactorMismatch(format!(
            "{} / {} / {}",
            x.triple, y.triple, z.triple
        )));
    }
    let parts = x
        .parts
        .iter()
        .zip(&y.parts)
        .zip(&z.parts)
        .map(|((a, b), c)| triple_product(a, b, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomicElement {
        triple: x.triple.clone(),
        parts,
    })
}

/// Interleaved `[Re c0, Im c0, Re c1, ...]`.
pub fn realify(c: &[Complex64]) -> Vec<f64> {
    c.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn complex_from_real(v: &[f64]) -> Vec<Complex64> {
    v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Common interface of single-factor and direct-sum elements.
pub trait TripleVector: Clone + fmt::Debug + Send + Sync + Sized {
    fn space(&self) -> AtomicTriple;
    fn flat(&self) -> Vec<Complex64>;
    /// Element of the same space with the given flat coordinates.
    fn with_flat(&self, coords: Vec<Complex64>) -> Self;
    fn same_space(&self, other: &Self) -> bool;
    fn product(&self, y: &Self, z: &Self) -> Result<Self>;
    fn norm(&self) -> f64;
    fn parts(&self) -> Vec<Element>;
    fn with_parts(&self, parts: Vec<Element>) -> Self;

    fn complex_dim(&self) -> usize {
        self.flat().len()
    }

    fn to_real(&self) -> Vec<f64> {
        realify(&self.flat())
    }

    fn with_real(&self, v: &[f64]) -> Self {
        self.with_flat(complex_from_real(v))
    }

    fn zero_like(&self) -> Self {
        self.with_flat(vec![ZERO; self.complex_dim()])
    }

    fn add(&self, other: &Self) -> Self {
        let c = self.flat().iter().zip(other.flat()).map(|(a, b)| a + b).collect();
        self.with_flat(c)
    }

    fn sub(&self, other: &Self) -> Self {
        let c = self.flat().iter().zip(other.flat()).map(|(a, b)| a - b).collect();
        self.with_flat(c)
    }

    fn scale(&self, s: Complex64) -> Self {
        self.with_flat(self.flat().iter().map(|a| a * s).collect())
    }

    fn scale_real(&self, s: f64) -> Self {
        self.with_flat(self.flat().iter().map(|a| a * s).collect())
    }

    fn conj(&self) -> Self {
        self.with_flat(self.flat().iter().map(|a| a.conj()).collect())
    }

    /// Euclidean norm of the coordinate vector.
    fn coord_norm(&self) -> f64 {
        self.flat().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn is_zero(&self) -> bool {
        self.flat().iter().all(|a| *a == ZERO)
    }

    fn weights(&self) -> Vec<f64> {
        self.space().metric_weights()
    }

    /// Trace-form inner product `tr(x y*)`.
    fn trace_inner(&self, other: &Self) -> Complex64 {
        self.flat()
            .iter()
            .zip(other.flat())
            .zip(self.weights())
            .map(|((a, b), w)| a * b.conj() * w)
            .sum()
    }

    fn cube(&self) -> Self {
        self.product(self, self).expect("same space")
    }
}

impl TripleVector for Element {
    fn space(&self) -> AtomicTriple {
        AtomicTriple::single(self.factor)
    }
    fn flat(&self) -> Vec<Complex64> {
        self.coords.clone()
    }
    fn with_flat(&self, coords: Vec<Complex64>) -> Self {
        assert_eq!(coords.len(), self.coords.len());
        Element {
            factor: self.factor,
            coords,
        }
    }
    fn same_space(&self, other: &Self) -> bool {
        self.factor == other.factor
    }
    fn product(&self, y: &Self, z: &Self) -> Result<Self> {
        triple_product(self, y, z)
    }
    fn norm(&self) -> f64 {
        factor_norm(self)
    }
    fn parts(&self) -> Vec<Element> {
        vec![self.clone()]
    }
    fn with_parts(&self, mut parts: Vec<Element>) -> Self {
        assert_eq!(parts.len(), 1);
        parts.remove(0)
    }
    fn complex_dim(&self) -> usize {
        self.coords.len()
    }
    fn weights(&self) -> Vec<f64> {
        self.factor.metric_weights()
    }
}

impl TripleVector for AtomicElement {
    fn space(&self) -> AtomicTriple {
        self.triple.clone()
    }
    fn flat(&self) -> Vec<Complex64> {
        self.parts.iter().flat_map(|p| p.coords.iter().cloned()).collect()
    }
    fn with_flat(&self, coords: Vec<Complex64>) -> Self {
        self.triple.from_flat(&coords).expect("matching dimension")
    }
    fn same_space(&self, other: &Self) -> bool {
        self.triple == other.triple
    }
    fn product(&self, y: &Self, z: &Self) -> Result<Self> {
        sum_triple_product(self, y, z)
    }
    fn norm(&self) -> f64 {
        sum_norm(self)
    }
    fn parts(&self) -> Vec<Element> {
        self.parts.clone()
    }
    fn with_parts(&self, parts: Vec<Element>) -> Self {
        AtomicElement::new(self.triple.clone(), parts).expect("matching parts")
    }
    fn complex_dim(&self) -> usize {
        self.triple.complex_dim()
    }
    fn weights(&self) -> Vec<f64> {
        self.triple.metric_weights()
    }
}

/// Writes the realified layout as little-endian `f64`s.
pub fn write_realified<W: std::io::Write>(x: &impl TripleVector, mut w: W) -> std::io::Result<()> {
    for r in x.to_real() {
        w.write_all(&r.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a realified layout written by [`write_realified`] into the space of `like`.
pub fn read_realified<T: TripleVector, R: std::io::Read>(like: &T, mut r: R) -> std::io::Result<T> {
    let mut v = Vec::with_capacity(2 * like.complex_dim());
    let mut buf = [0u8; 8];
    for _ in 0..2 * like.complex_dim() {
        r.read_exact(&mut buf)?;
        v.push(f64::from_le_bytes(buf));
    }
    Ok(like.with_real(&v))
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m2() -> FactorDescriptor {
        FactorDescriptor::type1(2, 2).unwrap()
    }

    #[test]
    fn tripotent_cube_of_matrix_unit() {
        let e = Element::matrix_unit(m2(), 0, 0).unwrap();
        assert_eq!(triple_product(&e, &e, &e).unwrap(), e);
    }

    #[test]
    fn asymmetric_annihilation_pair() {
        let e = Element::matrix_unit(m2(), 0, 0).unwrap();
        let w = Element::from_real_coords(m2(), &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(triple_product(&e, &w, &e).unwrap().is_zero());
        let e22 = Element::matrix_unit(m2(), 1, 1).unwrap();
        assert_eq!(triple_product(&w, &e, &w).unwrap(), e22);
    }

    #[test]
    fn spin_minimal_cube() {
        let f = FactorDescriptor::spin(3).unwrap();
        let e = Element::new(f, vec![c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]).unwrap();
        let p = triple_product(&e, &e, &e).unwrap();
        for (a, b) in p.coords.iter().zip(&e.coords) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn norms() {
        let d = Element::from_real_coords(m2(), &[3.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((factor_norm(&d) - 3.0).abs() < 1e-12);
        let f = FactorDescriptor::spin(3).unwrap();
        let u = Element::from_real_coords(f, &[1.0, 0.0, 0.0]).unwrap();
        assert!((factor_norm(&u) - 1.0).abs() < 1e-15);
        let s = 2f64.sqrt();
        let x = Element::new(f, vec![c(s, 0.0), c(0.0, s), c(0.0, 0.0)]).unwrap();
        assert!((factor_norm(&x) - 2.0 * s).abs() < 1e-12);
        let y = Element::new(f, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert!((factor_norm(&y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sum_norm_is_max_over_parts() {
        let f = FactorDescriptor::type1(1, 1).unwrap();
        let t = AtomicTriple::new(vec![f, f, f]).unwrap();
        let x = t.from_flat(&[c(1.0, 0.0), c(0.0, 3.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(sum_norm(&x), 3.0);
        assert_eq!(sum_norm(&t.zero()), 0.0);
        let single = AtomicElement::from(Element::from_real_coords(m2(), &[3.0, 0.0, 0.0, 1.0]).unwrap());
        assert!((sum_norm(&single) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn embeddings_round_trip() {
        let t3 = FactorDescriptor::type3(2).unwrap();
        let x = Element::new(t3, vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0)]).unwrap();
        let m = x.embed_matrix().unwrap();
        assert_eq!(m[(0, 1)], c(2.0, 1.0));
        assert_eq!(m[(1, 0)], c(2.0, 1.0));
        assert_eq!(project_matrix(&m, t3).unwrap(), x);

        let t2 = FactorDescriptor::type2(3).unwrap();
        let y = Element::from_real_coords(t2, &[1.0, 2.0, 3.0]).unwrap();
        let m = y.embed_matrix().unwrap();
        let expect = [[0.0, 1.0, 2.0], [-1.0, 0.0, 3.0], [-2.0, -3.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], c(expect[i][j], 0.0));
            }
        }
        assert_eq!(project_matrix(&m, t2).unwrap(), y);
    }

    #[test]
    fn project_rejects_asymmetric() {
        let t3 = FactorDescriptor::type3(2).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(project_matrix(&m, t3), Err(TripleError::ConstraintViolation(_))));
        let spin = FactorDescriptor::spin(3).unwrap();
        assert_eq!(spin.embed_coords(&[ZERO; 3]).unwrap_err(), TripleError::SpinEmbedding);
    }

    #[test]
    fn small_spin_rejected() {
        assert!(FactorDescriptor::spin(2).is_err());
        let bad: std::result::Result<FactorDescriptor, _> = serde_json::from_str(r#"{"kind":"spin","n":2}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn coordinate_index_matches_positions() {
        for f in [
            FactorDescriptor::type1(2, 3).unwrap(),
            FactorDescriptor::type2(4).unwrap(),
            FactorDescriptor::type3(4).unwrap(),
        ] {
            for (k, (i, j)) in f.coordinate_positions().into_iter().enumerate() {
                assert_eq!(f.coordinate_index(i, j), Some(k));
            }
            assert_eq!(f.coordinate_positions().len(), f.complex_dim());
        }
    }

    #[test]
    fn json_layout() {
        let e = Element::matrix_unit(m2(), 0, 1).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"factor":{"kind":"type1","m":2,"n":2},"coords":[[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]]}"#
        );
        let back: Element = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
