//! Truncation preservers `A(x) = (gamma_k Phi_k(pi_k(x)))`: synthesis,
//! randomized verification and decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TripleError};
use crate::factors::{project_matrix_tol, AtomicElement, AtomicTriple, CMat, Element, FactorDescriptor, TripleVector};
use crate::linalg::{self, RMat};
use crate::operators::{classify, Linearity, RealLinearOperator};
use crate::peirce::{canonical_minimal, is_minimal};
use crate::sampling::{
    random_atomic, random_element, random_minimal_tripotent, random_orthogonal, random_phase, random_spectral_atomic,
    random_unitary, trial_rng, uniform,
};
use crate::spectral::is_positive_multiple_of_minimal;
use crate::truncation::{random_annihilated, truncation_residual, ttp_unchecked};

/// Truncation residual threshold used by the verifier.
pub const TRUNC_TOL: f64 = 1e-8;
/// Minimal source residual of a negative trial.
const NEG_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Linear,
    ConjugateLinear,
}

mod cmat_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(CMat::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

mod rmat_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &RMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<RMat, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(RMat::from_fn(r, c, |i, j| rows[i][j]))
    }
}

/// Presentation of a factor isomorphism, applied after the optional
/// conjugation of the argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `x -> u x v` or `x -> u x^t v`.
    Type1 {
        #[serde(with = "cmat_rows")]
        u: CMat,
        #[serde(with = "cmat_rows")]
        v: CMat,
        #[serde(default)]
        transpose: bool,
    },
    /// `x -> u x u^t`.
    Type2 {
        #[serde(with = "cmat_rows")]
        u: CMat,
    },
    /// `x -> u x u^t`.
    Type3 {
        #[serde(with = "cmat_rows")]
        u: CMat,
    },
    /// `x -> mu O x` with `O` real orthogonal.
    Spin {
        mu: [f64; 2],
        #[serde(with = "rmat_rows")]
        o: RMat,
    },
    /// Realified matrix only.
    Realized {
        #[serde(with = "rmat_rows")]
        matrix: RMat,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoSpec {
    pub flag: Flag,
    #[serde(flatten)]
    pub generator: Generator,
}

/// Isometric (conjugate-)linear triple isomorphism between two factors.
#[derive(Clone, Debug)]
pub struct FactorIsomorphism {
    pub source: FactorDescriptor,
    pub target: FactorDescriptor,
    pub flag: Flag,
    pub generator: Generator,
    pub realization: RealLinearOperator,
}

fn unitary_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMat::identity(n, n)).norm()
}

fn expect_square(u: &CMat, n: usize, what: &str) -> Result<()> {
    if u.nrows() != n || u.ncols() != n {
        return Err(TripleError::InvalidFactor(format!("{what} must be {n}x{n}, got {}x{}", u.nrows(), u.ncols())));
    }
    if unitary_defect(u) > 1e-9 {
        return Err(TripleError::InvalidFactor(format!("{what} is not unitary")));
    }
    Ok(())
}

/// Target factor of a generator applied to `source`, validating shapes.
fn generator_target(source: FactorDescriptor, g: &Generator) -> Result<Option<FactorDescriptor>> {
    let bad = |why: String| Err(TripleError::InvalidFactor(why));
    match (source, g) {
        (FactorDescriptor::Type1 { m, n }, Generator::Type1 { u, v, transpose }) => {
            let (r, c) = if *transpose { (n, m) } else { (m, n) };
            expect_square(u, r, "u")?;
            expect_square(v, c, "v")?;
            Ok(Some(FactorDescriptor::type1(r, c)?))
        }
        (FactorDescriptor::Type2 { n }, Generator::Type2 { u }) | (FactorDescriptor::Type3 { n }, Generator::Type3 { u }) => {
            expect_square(u, n, "u")?;
            Ok(Some(source))
        }
        (FactorDescriptor::Spin { n }, Generator::Spin { mu, o }) => {
            if ((mu[0] * mu[0] + mu[1] * mu[1]).sqrt() - 1.0).abs() > 1e-9 {
                return bad("spin phase must have modulus 1".into());
            }
            if o.nrows() != n || o.ncols() != n || (o.transpose() * o - RMat::identity(n, n)).norm() > 1e-9 {
                return bad(format!("spin generator must be a real orthogonal {n}x{n} matrix"));
            }
            Ok(Some(source))
        }
        (_, Generator::Realized { .. }) => Ok(None),
        (f, g) => bad(format!("generator {:?} does not fit factor {f}", kind_of(g))),
    }
}

fn kind_of(g: &Generator) -> &'static str {
    match g {
        Generator::Type1 { .. } => "type1",
        Generator::Type2 { .. } => "type2",
        Generator::Type3 { .. } => "type3",
        Generator::Spin { .. } => "spin",
        Generator::Realized { .. } => "realized",
    }
}

fn apply_generator(g: &Generator, flag: Flag, target: FactorDescriptor, x: &Element) -> Result<Element> {
    let x = if flag == Flag::ConjugateLinear { x.conj() } else { x.clone() };
    match g {
        Generator::Type1 { u, v, transpose } => {
            let m = x.embed_matrix()?;
            let m = if *transpose { m.transpose() } else { m };
            project_matrix_tol(&(u * m * v), target, 1e-8)
        }
        Generator::Type2 { u } | Generator::Type3 { u } => {
            project_matrix_tol(&(u * x.embed_matrix()? * u.transpose()), target, 1e-8)
        }
        Generator::Spin { mu, o } => {
            let mu = Complex64::new(mu[0], mu[1]);
            let n = o.nrows();
            let coords = (0..n)
                .map(|i| (0..n).map(|j| x.coords[j] * o[(i, j)]).sum::<Complex64>() * mu)
                .collect();
            Element::new(target, coords)
        }
        Generator::Realized { .. } => unreachable!("realized generators carry their matrix"),
    }
}

impl FactorIsomorphism {
    pub fn new(source: FactorDescriptor, target: FactorDescriptor, flag: Flag, generator: Generator) -> Result<Self> {
        let (dom, cod) = (AtomicTriple::single(source), AtomicTriple::single(target));
        let realization = match &generator {
            Generator::Realized { matrix } => RealLinearOperator::new(dom, cod, matrix.clone())?,
            g => {
                let t = generator_target(source, g)?.expect("explicit generator");
                if t != target {
                    return Err(TripleError::FactorMismatch(format!("generator maps {source} onto {t}, not {target}")));
                }
                let n = 2 * source.complex_dim();
                let mut m = RMat::zeros(2 * target.complex_dim(), n);
                let mut basis = vec![0.0; n];
                for j in 0..n {
                    basis[j] = 1.0;
                    let x = Element { factor: source, coords: crate::factors::complex_from_real(&basis) };
                    basis[j] = 0.0;
                    m.column_mut(j).copy_from_slice(&apply_generator(g, flag, target, &x)?.to_real());
                }
                RealLinearOperator::new(dom, cod, m)?
            }
        };
        let expected = match flag {
            Flag::Linear => Linearity::ComplexLinear,
            Flag::ConjugateLinear => Linearity::ConjugateLinear,
        };
        if realization.linearity() != expected {
            return Err(TripleError::InvalidFactor(format!(
                "realization is {:?} but the flag says {flag:?}",
                realization.linearity()
            )));
        }
        Ok(FactorIsomorphism { source, target, flag, generator, realization })
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let y = self.realization.apply_real(&x.to_real());
        Ok(Element { factor: self.target, coords: crate::factors::complex_from_real(&y) })
    }

    /// Largest relative defect of `Phi{x,y,z} = {Phi x, Phi y, Phi z}` and
    /// `||Phi x|| = ||x||` over random samples.
    pub fn isomorphism_defect(&self, trials: usize, seed: u64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in 0..trials {
            let mut rng = trial_rng(seed, t as u64);
            let x = random_element(self.source, &mut rng);
            let y = random_element(self.source, &mut rng);
            let z = random_element(self.source, &mut rng);
            let lhs = self.apply(&x.product(&y, &z)?)?;
            let rhs = self.apply(&x)?.product(&self.apply(&y)?, &self.apply(&z)?)?;
            let scale = x.norm() * y.norm() * z.norm();
            worst = worst.max(lhs.sub(&rhs).norm() / scale);
            worst = worst.max((self.apply(&x)?.norm() - x.norm()).abs() / x.norm());
        }
        Ok(worst)
    }
}

/// `x -> (gamma_k Phi_k(pi_k(x)))` with `Phi_k: C_k -> C~_{sigma(k)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreserverSpec {
    pub source: AtomicTriple,
    pub target: AtomicTriple,
    pub sigma: Vec<usize>,
    pub gammas: Vec<f64>,
    pub isos: Vec<IsoSpec>,
}

impl PreserverSpec {
    /// Checks the spec and builds the factor isomorphisms.
    pub fn isomorphisms(&self) -> Result<Vec<FactorIsomorphism>> {
        let k = self.source.len();
        if self.target.len() != k || self.sigma.len() != k || self.gammas.len() != k || self.isos.len() != k {
            return Err(TripleError::InvalidFactor(format!(
                "spec lengths differ: {} source factors, {} target factors, {} sigma, {} gammas, {} isos",
                k,
                self.target.len(),
                self.sigma.len(),
                self.gammas.len(),
                self.isos.len()
            )));
        }
        let mut seen = vec![false; k];
        for &s in &self.sigma {
            if s >= k || seen[s] {
                return Err(TripleError::InvalidFactor(format!("sigma {:?} is not a bijection", self.sigma)));
            }
            seen[s] = true;
        }
        for (i, f) in self.source.factors().iter().enumerate() {
            if f.complex_dim() < 2 {
                return Err(TripleError::Precondition(format!(
                    "source factor {i} ({f}) is one-dimensional; preservers of such summands are not classified"
                )));
            }
        }
        if let Some(g) = self.gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(TripleError::InvalidFactor(format!("gamma {g} is not a positive real")));
        }
        self.isos
            .iter()
            .enumerate()
            .map(|(i, iso)| {
                let (s, t) = (self.source.factors()[i], self.target.factors()[self.sigma[i]]);
                if s.rank() != t.rank() || s.complex_dim() != t.complex_dim() {
                    return Err(TripleError::InvalidFactor(format!("factor {i}: {s} and {t} are not isomorphic")));
                }
                FactorIsomorphism::new(s, t, iso.flag, iso.generator.clone())
            })
            .collect()
    }
}

/// Block operator of a spec.
pub fn synthesize(spec: &PreserverSpec) -> Result<RealLinearOperator> {
    let isos = spec.isomorphisms()?;
    let (so, to) = (spec.source.offsets(), spec.target.offsets());
    let n = 2 * spec.source.complex_dim();
    let mut m = RMat::zeros(2 * spec.target.complex_dim(), n);
    for (k, iso) in isos.iter().enumerate() {
        let blk = iso.realization.matrix() * spec.gammas[k];
        m.view_mut((2 * to[spec.sigma[k]], 2 * so[k]), (blk.nrows(), blk.ncols())).copy_from(&blk);
    }
    RealLinearOperator::new(spec.source.clone(), spec.target.clone(), m)
}

/// Factors with complex dimension between 2 and 9 used by random specs.
pub fn spec_factor_menu() -> Vec<FactorDescriptor> {
    vec![
        FactorDescriptor::type1(2, 2).unwrap(),
        FactorDescriptor::type1(2, 3).unwrap(),
        FactorDescriptor::type1(1, 3).unwrap(),
        FactorDescriptor::type1(3, 1).unwrap(),
        FactorDescriptor::type1(3, 3).unwrap(),
        FactorDescriptor::type2(4).unwrap(),
        FactorDescriptor::type2(3).unwrap(),
        FactorDescriptor::type3(2).unwrap(),
        FactorDescriptor::type3(3).unwrap(),
        FactorDescriptor::spin(3).unwrap(),
        FactorDescriptor::spin(4).unwrap(),
        FactorDescriptor::spin(5).unwrap(),
    ]
}

/// Random generator for `source` with the given flag.
pub fn random_generator<R: Rng + ?Sized>(source: FactorDescriptor, rng: &mut R) -> Generator {
    match source {
        FactorDescriptor::Type1 { m, n } => {
            let transpose = rng.gen_bool(0.5);
            let (r, c) = if transpose { (n, m) } else { (m, n) };
            Generator::Type1 { u: random_unitary(r, rng), v: random_unitary(c, rng), transpose }
        }
        FactorDescriptor::Type2 { n } => Generator::Type2 { u: random_unitary(n, rng) },
        FactorDescriptor::Type3 { n } => Generator::Type3 { u: random_unitary(n, rng) },
        FactorDescriptor::Spin { n } => {
            let mu = random_phase(rng);
            Generator::Spin { mu: [mu.re, mu.im], o: random_orthogonal(n, rng) }
        }
    }
}

/// Random spec over 1 to `max_factors` factors from the menu, with a random
/// permutation, `gamma` in `[0.5, 4)` and random flags.
pub fn random_spec<R: Rng + ?Sized>(max_factors: usize, rng: &mut R) -> PreserverSpec {
    random_spec_with(None, max_factors, rng)
}

/// As `random_spec`, with the first source factor fixed when given.
pub fn random_spec_with<R: Rng + ?Sized>(
    first: Option<FactorDescriptor>,
    max_factors: usize,
    rng: &mut R,
) -> PreserverSpec {
    let menu = spec_factor_menu();
    let k = rng.gen_range(1..=max_factors.max(1));
    let mut source: Vec<FactorDescriptor> = (0..k).map(|_| *menu.choose(rng).unwrap()).collect();
    if let Some(f) = first {
        source[0] = f;
    }
    let mut sigma: Vec<usize> = (0..k).collect();
    sigma.shuffle(rng);
    let mut isos = Vec::with_capacity(k);
    let mut target = vec![source[0]; k];
    for (i, f) in source.iter().enumerate() {
        let g = random_generator(*f, rng);
        target[sigma[i]] = generator_target(*f, &g).unwrap().unwrap();
        let flag = if rng.gen_bool(0.5) { Flag::Linear } else { Flag::ConjugateLinear };
        isos.push(IsoSpec { flag, generator: g });
    }
    PreserverSpec {
        source: AtomicTriple::new(source).unwrap(),
        target: AtomicTriple::new(target).unwrap(),
        sigma,
        gammas: (0..k).map(|_| uniform(rng, 0.5, 4.0)).collect(),
        isos,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DirectionReport {
    pub positive_pass: usize,
    pub positive_fail: usize,
    pub negative_pass: usize,
    pub negative_fail: usize,
    /// Largest image residual over positive trials.
    pub max_positive_residual: f64,
    /// Smallest image residual over negative trials.
    pub min_negative_residual: f64,
}

impl DirectionReport {
    pub fn pass(&self) -> bool {
        self.positive_fail == 0 && self.negative_fail == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    pub trials: usize,
    pub bijective: bool,
    pub forward: DirectionReport,
    pub backward: DirectionReport,
    /// Exactly one direction passed.
    pub one_direction_only: bool,
    /// First failing pair `(a, b)` in the source space.
    pub witness: Option<(AtomicElement, AtomicElement)>,
    pub pass: bool,
}

enum Outcome {
    Positive(f64),
    Negative(f64),
}

fn run_trial(op: &RealLinearOperator, seed: u64, stream: u64, positive: bool) -> Result<(Outcome, AtomicElement, AtomicElement)> {
    let mut rng = trial_rng(seed, stream);
    let space = op.domain();
    let a = if rng.gen_bool(0.9) { random_spectral_atomic(space, &mut rng) } else { random_atomic(space, &mut rng) };
    let z = random_annihilated(&a, &mut rng);
    if positive {
        let b = a.add(&z);
        let r = truncation_residual(&op.apply_atomic(&a)?, &op.apply_atomic(&b)?)?;
        return Ok((Outcome::Positive(r), a, b));
    }
    loop {
        let w = random_atomic(space, &mut rng).scale_real(uniform(&mut rng, 0.1, 2.0));
        let b = a.add(&z).add(&w);
        if truncation_residual(&a, &b)? > NEG_MARGIN {
            let r = truncation_residual(&op.apply_atomic(&a)?, &op.apply_atomic(&b)?)?;
            return Ok((Outcome::Negative(r), a, b));
        }
    }
}

fn run_direction(
    op: &RealLinearOperator,
    trials: usize,
    seed: u64,
    offset: u64,
) -> Result<(DirectionReport, Option<(AtomicElement, AtomicElement)>)> {
    let outcomes: Vec<Result<(Outcome, AtomicElement, AtomicElement)>> = (0..2 * trials)
        .into_par_iter()
        .map(|t| run_trial(op, seed, offset + t as u64, t < trials))
        .collect();
    let mut rep = DirectionReport { min_negative_residual: f64::INFINITY, ..Default::default() };
    let mut witness = None;
    for o in outcomes {
        let (o, a, b) = o?;
        let failed = match o {
            Outcome::Positive(r) => {
                rep.max_positive_residual = rep.max_positive_residual.max(r);
                if r <= TRUNC_TOL {
                    rep.positive_pass += 1;
                    false
                } else {
                    rep.positive_fail += 1;
                    true
                }
            }
            Outcome::Negative(r) => {
                rep.min_negative_residual = rep.min_negative_residual.min(r);
                if r > TRUNC_TOL {
                    rep.negative_pass += 1;
                    false
                } else {
                    rep.negative_fail += 1;
                    true
                }
            }
        };
        if failed && witness.is_none() {
            witness = Some((a, b));
        }
    }
    Ok((rep, witness))
}

/// Randomized check that `a` is a truncation of `b` iff `A a` is a
/// truncation of `A b`, with `trials` positive and `trials` negative pairs
/// in each direction.
pub fn verify_preserves_truncations(op: &RealLinearOperator, trials: usize, seed: u64) -> Result<PreservationReport> {
    let inv = match op.inverse() {
        Ok(inv) => inv,
        Err(TripleError::Singular) => {
            return Ok(PreservationReport {
                trials,
                bijective: false,
                forward: DirectionReport::default(),
                backward: DirectionReport::default(),
                one_direction_only: false,
                witness: None,
                pass: false,
            })
        }
        Err(e) => return Err(e),
    };
    let (forward, w1) = run_direction(op, trials, seed, 0)?;
    let (backward, w2) = run_direction(&inv, trials, seed, 1 << 32)?;
    let witness = match (w1, w2) {
        (Some(w), _) => Some(w),
        (None, Some((a, b))) => Some((inv.apply_atomic(&a)?, inv.apply_atomic(&b)?)),
        _ => None,
    };
    Ok(PreservationReport {
        trials,
        bijective: true,
        one_direction_only: forward.pass() != backward.pass(),
        pass: forward.pass() && backward.pass(),
        forward,
        backward,
        witness,
    })
}

/// `A(e) = gamma f` with `f = r(A(e))` minimal.
pub fn induced_minimal_map(op: &RealLinearOperator, e: &AtomicElement) -> Result<(f64, AtomicElement)> {
    if !is_minimal(e)? {
        return Err(TripleError::NotMinimal("induced_minimal_map needs a minimal tripotent".into()));
    }
    let y = op.apply_atomic(e)?;
    if y.is_zero() {
        return Err(TripleError::NotPreserver("A(e) = 0".into()));
    }
    let mm = is_positive_multiple_of_minimal(&y, 1e-9)?;
    if !mm.is_multiple {
        return Err(TripleError::NotPreserver(
            "A(e) is not a positive multiple of a minimal tripotent, so A does not preserve truncations".into(),
        ));
    }
    Ok((y.norm(), mm.tripotent))
}

fn embed(space: &AtomicTriple, k: usize, x: &Element) -> AtomicElement {
    space.embed_part(k, x).expect("factor of the space")
}

/// Number of random minimal pairs per factor in the TTP step.
pub const TTP_PAIRS: usize = 50;

/// Recovers a spec from a preserver in five steps: factor matching, scalar
/// constancy, linearity dichotomy, isomorphism and TTP checks, and
/// reconstruction.
pub fn decompose(op: &RealLinearOperator, tol: f64, seed: u64) -> Result<PreserverSpec> {
    let (src, tgt) = (op.domain().clone(), op.codomain().clone());
    for (i, f) in src.factors().iter().enumerate() {
        if f.complex_dim() < 2 {
            return Err(TripleError::Precondition(format!("source factor {i} ({f}) is one-dimensional")));
        }
    }
    if src.complex_dim() != tgt.complex_dim() || src.len() != tgt.len() {
        return Err(TripleError::NotPreserver("factor matching: source and target sizes differ".into()));
    }
    op.inverse().map_err(|_| TripleError::NotPreserver("A is not injective".into()))?;
    let k = src.len();
    let i = Complex64::new(0.0, 1.0);

    // 1. factor matching
    let mut sigma = Vec::with_capacity(k);
    for j in 0..k {
        let e = embed(&src, j, &canonical_minimal(src.factors()[j]));
        let (_, f) = induced_minimal_map(op, &e)
            .map_err(|err| TripleError::NotPreserver(format!("factor matching: factor {j}: {err}")))?;
        let support: Vec<usize> = f.parts.iter().enumerate().filter(|(_, p)| p.coord_norm() > 1e-8).map(|(t, _)| t).collect();
        if support.len() != 1 {
            return Err(TripleError::NotPreserver(format!("factor matching: image of factor {j} spreads over {support:?}")));
        }
        sigma.push(support[0]);
    }
    let mut seen = vec![false; k];
    for &s in &sigma {
        if seen[s] {
            return Err(TripleError::NotPreserver(format!("factor matching: sigma {sigma:?} is not a bijection")));
        }
        seen[s] = true;
    }
    let scale = linalg::spectral_norm(op.matrix());
    for (j, &s) in sigma.iter().enumerate() {
        for t in 0..k {
            if t != s && linalg::spectral_norm(&op.block(t, j)) > tol * scale {
                return Err(TripleError::NotPreserver(format!("factor matching: factor {j} leaks into target factor {t}")));
            }
        }
        if src.factors()[j].rank() != tgt.factors()[s].rank() {
            return Err(TripleError::NotPreserver(format!("factor matching: ranks of factor {j} and its image differ")));
        }
    }

    let mut gammas = Vec::with_capacity(k);
    let mut isos = Vec::with_capacity(k);
    for j in 0..k {
        let f = src.factors()[j];
        let e = embed(&src, j, &canonical_minimal(f));
        let ae = op.apply_atomic(&e)?;

        // 2. scalar constancy over minimal tripotents
        let gamma = ae.norm();
        let mut rng = trial_rng(seed, j as u64);
        for _ in 0..10 {
            let w = embed(&src, j, &random_minimal_tripotent(f, &mut rng));
            let g = op.apply_atomic(&w)?.norm();
            if (g - gamma).abs() > tol * gamma {
                return Err(TripleError::NotPreserver(format!(
                    "scalar constancy: factor {j} has gamma {gamma} at the canonical minimal and {g} elsewhere"
                )));
            }
        }

        // 3. linearity dichotomy
        let aie = op.apply_atomic(&e.scale(i))?;
        let dl = aie.sub(&ae.scale(i)).coord_norm();
        let dc = aie.add(&ae.scale(i)).coord_norm();
        let flag = if dl <= tol * gamma {
            Flag::Linear
        } else if dc <= tol * gamma {
            Flag::ConjugateLinear
        } else {
            return Err(TripleError::NotPreserver(format!(
                "linearity dichotomy: A(ie) is neither iA(e) nor -iA(e) on factor {j}"
            )));
        };
        let blk = op.block(sigma[j], j) / gamma;
        let expected = if flag == Flag::Linear { Linearity::ComplexLinear } else { Linearity::ConjugateLinear };
        if classify(&blk) != expected {
            return Err(TripleError::NotPreserver(format!(
                "linearity dichotomy: block of factor {j} is not {expected:?}"
            )));
        }

        // 4. isomorphism and TTP
        let iso = FactorIsomorphism::new(f, tgt.factors()[sigma[j]], flag, Generator::Realized { matrix: blk })?;
        let defect = iso.isomorphism_defect(10, seed ^ (j as u64 + 1))?;
        if defect > tol {
            return Err(TripleError::NotPreserver(format!(
                "isomorphism: gamma^-1 A restricted to factor {j} has triple-product defect {defect:e}"
            )));
        }
        for p in 0..TTP_PAIRS {
            let mut rng = trial_rng(seed, (1 << 20) + (j * TTP_PAIRS + p) as u64);
            let u = random_minimal_tripotent(f, &mut rng);
            let v = random_minimal_tripotent(f, &mut rng);
            let before = ttp_unchecked(&u, &v)?;
            let after = ttp_unchecked(&iso.apply(&u)?, &iso.apply(&v)?)?;
            let want = if flag == Flag::Linear { before } else { before.conj() };
            if (after - want).norm() > 1e-8 {
                return Err(TripleError::NotPreserver(format!(
                    "TTP: factor {j} changes a transition pseudo-probability by {:e}",
                    (after - want).norm()
                )));
            }
        }
        gammas.push(gamma);
        isos.push(IsoSpec { flag, generator: iso.generator });
    }

    // 5. identity principle
    let spec = PreserverSpec { source: src, target: tgt, sigma, gammas, isos };
    let rebuilt = synthesize(&spec)?;
    let d = linalg::spectral_norm(&(rebuilt.matrix() - op.matrix()));
    if d > tol * scale.max(1.0) {
        return Err(TripleError::NotPreserver(format!("identity principle: reconstruction differs from A by {d:e}")));
    }
    Ok(spec)
}

#[derive(Clone, Debug, Serialize)]
pub struct HilbertClassification {
    pub gamma: f64,
    pub flag: Flag,
    /// `gamma^-1 A`.
    pub isometry: RealLinearOperator,
}

/// `A = gamma T` with `T` a linear or conjugate-linear isometry, on a
/// rank-one factor of dimension at least 2.
pub fn hilbert_case_classify(op: &RealLinearOperator, seed: u64) -> Result<HilbertClassification> {
    let f = match op.domain().factors() {
        [f @ FactorDescriptor::Type1 { m, n }] if m.min(n) == &1 => *f,
        _ => return Err(TripleError::Precondition("hilbert_case_classify needs a single rank-one factor".into())),
    };
    if f.complex_dim() < 2 {
        return Err(TripleError::Precondition(
            "one-dimensional factor: every additive bijection of C preserves truncations, so no classification exists"
                .into(),
        ));
    }
    if op.codomain().complex_dim() != f.complex_dim() {
        return Err(TripleError::NotPreserver("A is not surjective".into()));
    }
    let e = embed(op.domain(), 0, &f.basis(0));
    let ae = op.apply_atomic(&e)?;
    let gamma = ae.norm();
    if gamma == 0.0 {
        return Err(TripleError::NotPreserver("A(e) = 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let aie = op.apply_atomic(&e.scale(i))?;
    let flag = if aie.sub(&ae.scale(i)).coord_norm() <= 1e-9 * gamma {
        Flag::Linear
    } else if aie.add(&ae.scale(i)).coord_norm() <= 1e-9 * gamma {
        Flag::ConjugateLinear
    } else {
        return Err(TripleError::NotPreserver("A(ie) is neither iA(e) nor -iA(e)".into()));
    };
    let isometry = op.scale(1.0 / gamma);
    let mut rng = trial_rng(seed, 0);
    for _ in 0..20 {
        let x = random_atomic(op.domain(), &mut rng);
        let y = random_atomic(op.domain(), &mut rng);
        let y = y.sub(&x.scale(crate::factors::inner(&y.flat(), &x.flat()) / x.flat().iter().map(|c| c.norm_sqr()).sum::<f64>()));
        let (tx, ty) = (isometry.apply_atomic(&x)?, isometry.apply_atomic(&y)?);
        if (tx.norm() - x.norm()).abs() > 1e-9 * x.norm() {
            return Err(TripleError::NotPreserver("gamma^-1 A is not an isometry".into()));
        }
        let ip = crate::factors::inner(&tx.flat(), &ty.flat());
        if ip.norm() > 1e-9 * tx.norm() * ty.norm() {
            return Err(TripleError::NotPreserver("gamma^-1 A does not preserve orthogonality".into()));
        }
    }
    Ok(HilbertClassification { gamma, flag, isometry })
}

/// Spec of `x -> gamma x^t` on `M_n`.
pub fn scaled_transpose(n: usize, gamma: f64) -> Result<PreserverSpec> {
    let f = FactorDescriptor::type1(n, n)?;
    Ok(PreserverSpec {
        source: AtomicTriple::single(f),
        target: AtomicTriple::single(f),
        sigma: vec![0],
        gammas: vec![gamma],
        isos: vec![IsoSpec {
            flag: Flag::Linear,
            generator: Generator::Type1 { u: DMatrix::identity(n, n), v: DMatrix::identity(n, n), transpose: true },
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> FactorDescriptor {
        FactorDescriptor::type1(2, 2).unwrap()
    }

    fn mat(v: [f64; 4]) -> AtomicElement {
        Element::from_real_coords(m2(), &v).unwrap().into()
    }

    fn conj_spec() -> PreserverSpec {
        let id = DMatrix::identity(2, 2);
        PreserverSpec {
            source: AtomicTriple::single(m2()),
            target: AtomicTriple::single(m2()),
            sigma: vec![0],
            gammas: vec![1.0],
            isos: vec![IsoSpec {
                flag: Flag::ConjugateLinear,
                generator: Generator::Type1 { u: id.clone(), v: id, transpose: false },
            }],
        }
    }

    #[test]
    fn synthesized_examples() {
        let a = synthesize(&scaled_transpose(2, 2.0).unwrap()).unwrap();
        let x: AtomicElement = Element::new(
            m2(),
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(0.0, 3.0), Complex64::new(4.0, 0.0)],
        )
        .unwrap()
        .into();
        let want: AtomicElement = Element::new(
            m2(),
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 6.0), Complex64::new(4.0, 2.0), Complex64::new(8.0, 0.0)],
        )
        .unwrap()
        .into();
        assert!(a.apply_atomic(&x).unwrap().sub(&want).coord_norm() < 1e-14);
        assert_eq!(a.linearity(), Linearity::ComplexLinear);

        let c = synthesize(&conj_spec()).unwrap();
        assert!(c.apply_atomic(&x).unwrap().sub(&x.conj()).coord_norm() < 1e-14);
        assert_eq!(c.linearity(), Linearity::ConjugateLinear);
    }

    #[test]
    fn swapping_two_factors() {
        let s3 = FactorDescriptor::type3(2).unwrap();
        let src = AtomicTriple::new(vec![m2(), s3]).unwrap();
        let tgt = AtomicTriple::new(vec![s3, m2()]).unwrap();
        let id2 = DMatrix::identity(2, 2);
        let spec = PreserverSpec {
            source: src.clone(),
            target: tgt.clone(),
            sigma: vec![1, 0],
            gammas: vec![1.0, 1.0],
            isos: vec![
                IsoSpec { flag: Flag::Linear, generator: Generator::Type1 { u: id2.clone(), v: id2.clone(), transpose: false } },
                IsoSpec { flag: Flag::Linear, generator: Generator::Type3 { u: id2 } },
            ],
        };
        let a = synthesize(&spec).unwrap();
        let x = random_atomic(&src, &mut trial_rng(1, 0));
        let y = a.apply_atomic(&x).unwrap();
        assert_eq!(y.parts[0], x.parts[1]);
        assert_eq!(y.parts[1], x.parts[0]);
        assert_eq!(y.triple, tgt);
    }

    #[test]
    fn verifier_accepts_and_rejects() {
        let a = synthesize(&scaled_transpose(2, 2.0).unwrap()).unwrap();
        let r = verify_preserves_truncations(&a, 100, 3).unwrap();
        assert!(r.pass, "{r:?}");
        let id = RealLinearOperator::identity(AtomicTriple::single(m2()));
        assert!(verify_preserves_truncations(&id, 50, 3).unwrap().pass);

        let eps = 0.1;
        let bad = RealLinearOperator::from_fn(AtomicTriple::single(m2()), AtomicTriple::single(m2()), |v| {
            let mut w = v.to_vec();
            w[6] += eps * v[0];
            w[7] += eps * v[1];
            w
        })
        .unwrap();
        let r = verify_preserves_truncations(&bad, 100, 3).unwrap();
        assert!(!r.pass && r.witness.is_some());
        assert!(induced_minimal_map(&bad, &mat([1.0, 0.0, 0.0, 0.0])).is_err());

        let sing = RealLinearOperator::zero(AtomicTriple::single(m2()), AtomicTriple::single(m2()));
        assert!(!verify_preserves_truncations(&sing, 5, 0).unwrap().bijective);
    }

    #[test]
    fn induced_minimal_examples() {
        let a = synthesize(&scaled_transpose(2, 2.0).unwrap()).unwrap();
        let (g, f) = induced_minimal_map(&a, &mat([0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((g - 2.0).abs() < 1e-12 && f.sub(&mat([0.0, 0.0, 1.0, 0.0])).coord_norm() < 1e-12);
        let id = RealLinearOperator::identity(AtomicTriple::single(m2()));
        let (g, f) = induced_minimal_map(&id, &mat([1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((g - 1.0).abs() < 1e-12 && f.sub(&mat([1.0, 0.0, 0.0, 0.0])).coord_norm() < 1e-12);
        let c = synthesize(&conj_spec()).unwrap();
        let (g, f) = induced_minimal_map(&c, &mat([0.5; 4])).unwrap();
        assert!((g - 1.0).abs() < 1e-12 && f.sub(&mat([0.5; 4])).coord_norm() < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let spec = decompose(&synthesize(&scaled_transpose(2, 2.0).unwrap()).unwrap(), 1e-8, 1).unwrap();
        assert_eq!(spec.sigma, vec![0]);
        assert!((spec.gammas[0] - 2.0).abs() < 1e-12);
        assert_eq!(spec.isos[0].flag, Flag::Linear);
        let spec = decompose(&synthesize(&conj_spec()).unwrap(), 1e-8, 1).unwrap();
        assert!((spec.gammas[0] - 1.0).abs() < 1e-12);
        assert_eq!(spec.isos[0].flag, Flag::ConjugateLinear);

        let one = AtomicTriple::new(vec![FactorDescriptor::type3(2).unwrap(), FactorDescriptor::type1(1, 1).unwrap()]).unwrap();
        let id = RealLinearOperator::identity(one);
        assert!(matches!(decompose(&id, 1e-8, 1), Err(TripleError::Precondition(_))));
    }

    #[test]
    fn random_specs_round_trip() {
        for s in 0..5 {
            let mut rng = trial_rng(s, 0);
            let spec = random_spec(3, &mut rng);
            let a = synthesize(&spec).unwrap();
            let back = decompose(&a, 1e-8, s).unwrap();
            assert_eq!(back.sigma, spec.sigma);
            for k in 0..spec.gammas.len() {
                assert!((back.gammas[k] - spec.gammas[k]).abs() <= 1e-8 * spec.gammas[k]);
                assert_eq!(back.isos[k].flag, spec.isos[k].flag);
            }
            let json = serde_json::to_string(&spec).unwrap();
            let again: PreserverSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(again, spec);
        }
    }

    #[test]
    fn hilbert_examples() {
        let h3 = FactorDescriptor::type1(1, 3).unwrap();
        let t = AtomicTriple::single(h3);
        let perm = RealLinearOperator::from_fn(t.clone(), t.clone(), |v| {
            vec![3.0 * v[2], 3.0 * v[3], 3.0 * v[4], 3.0 * v[5], 3.0 * v[0], 3.0 * v[1]]
        })
        .unwrap();
        let c = hilbert_case_classify(&perm, 0).unwrap();
        assert!((c.gamma - 3.0).abs() < 1e-12 && c.flag == Flag::Linear);
        let h2 = AtomicTriple::single(FactorDescriptor::type1(1, 2).unwrap());
        let conj = RealLinearOperator::from_fn(h2.clone(), h2, |v| v.iter().enumerate().map(|(i, x)| if i % 2 == 1 { -x } else { *x }).collect()).unwrap();
        let c = hilbert_case_classify(&conj, 0).unwrap();
        assert!((c.gamma - 1.0).abs() < 1e-12 && c.flag == Flag::ConjugateLinear);
        let one = AtomicTriple::single(FactorDescriptor::type1(1, 1).unwrap());
        assert!(matches!(
            hilbert_case_classify(&RealLinearOperator::identity(one), 0),
            Err(TripleError::Precondition(_))
        ));
    }
}
