//! Truncations, inner quadratic annihilators and transition pseudo-probabilities.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Result, TripleError};
use crate::factors::{AtomicTriple, TripleVector};
use crate::linalg::{self, RMat};
use crate::operators::{kernel, Q_operator, Subspace, ANGLE_TOL, KERNEL_TOL};
use crate::peirce::{canonical_minimal, frame_of_minimals, is_minimal, peirce_decompose};
use crate::sampling::{normal, random_atomic, random_spectral_atomic, trial_rng};
use crate::spectral::{is_positive_multiple_of_minimal, range_tripotent, spectral_resolve};

fn scale_of<T: TripleVector>(a: &T, b: &T) -> f64 {
    let na = a.coord_norm();
    (na * na * na.max(b.coord_norm())).max(f64::MIN_POSITIVE)
}

/// `||{a,b,a} - {a,a,a}||` relative to `|a|^2 max(|a|,|b|)`.
pub fn truncation_residual<T: TripleVector>(a: &T, b: &T) -> Result<f64> {
    if !a.same_space(b) {
        return Err(TripleError::FactorMismatch("truncation test across different spaces".into()));
    }
    let d = a.product(b, a)?.sub(&a.cube());
    Ok(d.coord_norm() / scale_of(a, b))
}

/// `{a,a,a} = {a,b,a}`.
pub fn is_truncation<T: TripleVector>(a: &T, b: &T, tol: f64) -> Result<bool> {
    Ok(truncation_residual(a, b)? <= tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub is_truncation: bool,
    pub product_residual: f64,
    /// `||P_2(r(a)) b - a|| / max(|a|,|b|)`; absent for `a = 0`.
    pub range_residual: Option<f64>,
}

/// Product test cross-checked against `P_2(r(a)) b = a`.
pub fn truncation_report<T: TripleVector>(a: &T, b: &T, tol: f64) -> Result<TruncationReport> {
    let product_residual = truncation_residual(a, b)?;
    let verdict = product_residual <= tol;
    if a.is_zero() {
        return Ok(TruncationReport { is_truncation: true, product_residual, range_residual: None });
    }
    let r = range_tripotent(a, tol)?;
    let p = Q_operator(&r).apply(&Q_operator(&r).apply(b)?)?;
    let range_residual = p.sub(a).coord_norm() / a.coord_norm().max(b.coord_norm());
    let range_verdict = range_residual <= tol.max(1e-12).sqrt();
    if verdict != range_verdict {
        return Err(TripleError::Inconsistent(format!(
            "truncation tests disagree: product residual {product_residual:e}, range residual {range_residual:e}"
        )));
    }
    Ok(TruncationReport { is_truncation: verdict, product_residual, range_residual: Some(range_residual) })
}

/// `⟨y|x⟩ = ⟨x|x⟩` for the coordinate inner product.
pub fn hilbert_condition<T: TripleVector>(x: &T, y: &T, tol: f64) -> bool {
    let (xf, yf) = (x.flat(), y.flat());
    let yx: Complex64 = yf.iter().zip(&xf).map(|(b, a)| b * a.conj()).sum();
    let xx: f64 = xf.iter().map(|a| a.norm_sqr()).sum();
    (yx - xx).norm() <= tol * xx.sqrt() * xx.sqrt().max(y.coord_norm()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, Serialize)]
pub struct Annihilator<T> {
    pub generator: T,
    #[serde(skip)]
    pub subspace: Subspace,
    pub complex_dim: usize,
    pub complex_codim: usize,
}

/// `ker Q(a)` without the range-tripotent cross-check.
pub fn annihilator_subspace<T: TripleVector>(a: &T) -> Subspace {
    kernel(&Q_operator(a), KERNEL_TOL)
}

/// Random element of `ker Q(a)`, drawn factor by factor with real Gaussian
/// coefficients on each kernel block.
pub fn random_annihilated<T: TripleVector, R: Rng + ?Sized>(a: &T, rng: &mut R) -> T {
    let parts = a
        .parts()
        .into_iter()
        .map(|p| {
            let k = linalg::kernel_basis(Q_operator(&p).matrix(), KERNEL_TOL);
            if k.ncols() == 0 {
                return p.factor.zero();
            }
            let g = DVector::from_fn(k.ncols(), |_, _| normal(rng));
            p.with_real((k * g).as_slice())
        })
        .collect();
    a.with_parts(parts)
}

fn complex_dim_of(s: &Subspace) -> Result<usize> {
    s.complex_dim()
        .ok_or_else(|| TripleError::Inconsistent("annihilator is not a complex subspace".into()))
}

/// `⊥q{a} = ker Q(a)`, verified equal to `ker P_2(r(a))`.
pub fn annihilator<T: TripleVector>(a: &T) -> Result<Annihilator<T>> {
    if a.is_zero() {
        return Err(TripleError::ZeroElement);
    }
    let subspace = annihilator_subspace(a);
    let r = range_tripotent(a, 1e-9)?;
    let p2 = peirce_decompose(&r)?;
    let other = kernel(&p2.projections[2], KERNEL_TOL);
    if !subspace.equals(&other, ANGLE_TOL) {
        return Err(TripleError::Inconsistent("ker Q(a) differs from ker P2(r(a))".into()));
    }
    let complex_dim = complex_dim_of(&subspace)?;
    Ok(Annihilator { generator: a.clone(), complex_codim: a.complex_dim() - complex_dim, complex_dim, subspace })
}

/// `Q(b)` vanishes on every basis vector of `sub`.
fn annihilates<T: TripleVector>(b: &T, sub: &Subspace) -> bool {
    let q = Q_operator(b);
    let qn = linalg::spectral_norm(q.matrix());
    if sub.real_dim() == 0 {
        return true;
    }
    let img: RMat = q.matrix() * sub.basis();
    linalg::spectral_norm(&img) <= KERNEL_TOL * qn.max(f64::MIN_POSITIVE) * 10.0
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxAnnihilatorReport<T> {
    pub is_max: bool,
    /// `b` with `⊥q{a}` strictly inside `⊥q{b}`.
    pub witness: Option<T>,
    pub annihilator_dim: usize,
    pub witness_annihilator_dim: Option<usize>,
    /// Sine of the inclusion angle of `⊥q{a}` into `⊥q{b}`.
    pub inclusion_sine: Option<f64>,
    pub probes: usize,
    /// Probe candidate contradicting maximality, if any was found.
    pub probe_counterexample: Option<T>,
}

/// Decides whether `⊥q{a}` is maximal among single-element annihilators.
pub fn is_max_annihilator<T: TripleVector>(a: &T, probe_budget: usize, seed: u64) -> Result<MaxAnnihilatorReport<T>> {
    if a.is_zero() {
        return Err(TripleError::ZeroElement);
    }
    let ka = annihilator_subspace(a);
    let da = complex_dim_of(&ka)?;
    let mm = is_positive_multiple_of_minimal(a, 1e-9)?;
    if mm.is_multiple {
        let mut found = None;
        for p in 0..probe_budget {
            let mut rng = trial_rng(seed, p as u64);
            let b = probe_candidate(a, &mut rng)?;
            if b.is_zero() || !annihilates(&b, &ka) {
                continue;
            }
            let kb = annihilator_subspace(&b);
            if kb.real_dim() > ka.real_dim() {
                found = Some(b);
                break;
            }
        }
        return Ok(MaxAnnihilatorReport {
            is_max: found.is_none(),
            witness: None,
            annihilator_dim: da,
            witness_annihilator_dim: None,
            inclusion_sine: None,
            probes: probe_budget,
            probe_counterexample: found,
        });
    }
    let s = spectral_resolve(a, 1e-9)?;
    let (l1, e1) = s.pairs[0].clone();
    let b = if s.pairs.len() >= 2 {
        e1.scale_real(l1)
    } else {
        frame_of_minimals(&e1)?[0].scale_real(l1)
    };
    let kb = annihilator_subspace(&b);
    let db = complex_dim_of(&kb)?;
    let sine = ka.inclusion_sine(&kb);
    if sine > ANGLE_TOL.sin() || db <= da {
        return Err(TripleError::Inconsistent(format!(
            "witness fails strict containment: sine {sine:e}, dims {da} -> {db}"
        )));
    }
    Ok(MaxAnnihilatorReport {
        is_max: false,
        witness: Some(b),
        annihilator_dim: da,
        witness_annihilator_dim: Some(db),
        inclusion_sine: Some(sine),
        probes: 0,
        probe_counterexample: None,
    })
}

/// Random candidate: spectral element, random element, minimal tripotent,
/// or a perturbation of `a`.
fn probe_candidate<T: TripleVector, R: Rng + ?Sized>(a: &T, rng: &mut R) -> Result<T> {
    let space = a.space();
    let x = match rng.gen_range(0..4) {
        0 => random_spectral_atomic(&space, rng),
        1 => random_atomic(&space, rng),
        2 => {
            let y = random_spectral_atomic(&space, rng);
            let s = spectral_resolve(&y, 1e-9)?;
            let (_, e) = &s.pairs[rng.gen_range(0..s.pairs.len())];
            frame_of_minimals(e)?.swap_remove(0)
        }
        _ => {
            let eps = 10f64.powf(rng.gen_range(-6.0..0.0));
            let base = space.from_flat(&a.flat())?;
            base.add(&random_atomic(&space, rng).scale_real(eps))
        }
    };
    Ok(a.with_flat(x.flat()))
}

/// `⊥q{a} = ⊥q{b}` for nonzero multiples of minimal tripotents, checked
/// against complex collinearity of the coordinate vectors.
pub fn linear_dependence_via_annihilators<T: TripleVector>(a: &T, b: &T) -> Result<bool> {
    if !a.same_space(b) {
        return Err(TripleError::FactorMismatch("elements in different spaces".into()));
    }
    for (x, name) in [(a, "a"), (b, "b")] {
        if x.is_zero() || !is_positive_multiple_of_minimal(x, 1e-9)?.is_multiple {
            return Err(TripleError::Precondition(format!("{name} is not a nonzero multiple of a minimal tripotent")));
        }
    }
    let (ka, kb) = (annihilator_subspace(a), annihilator_subspace(b));
    let equal = ka.equals(&kb, ANGLE_TOL);
    let (af, bf) = (a.flat(), b.flat());
    let ip: Complex64 = af.iter().zip(&bf).map(|(x, y)| x.conj() * y).sum();
    let dependent = (a.coord_norm() * b.coord_norm() - ip.norm()).abs() <= 1e-8 * a.coord_norm() * b.coord_norm();
    if equal != dependent {
        return Err(TripleError::Inconsistent(format!(
            "annihilator equality ({equal}) disagrees with the span test ({dependent})"
        )));
    }
    Ok(equal)
}

/// `E_1(e)` as `⊥q{e}` intersected with `⊥q{v}` over minimal `v` in `E_0(e)`.
pub fn peirce1_from_annihilators<T: TripleVector>(e: &T, seed: u64) -> Result<Subspace> {
    if !is_minimal(e)? {
        return Err(TripleError::NotMinimal("peirce1_from_annihilators needs a minimal tripotent".into()));
    }
    let dec = peirce_decompose(e)?;
    let e0 = &dec.spaces[0];
    let mut family: Vec<T> = Vec::new();
    let mut rng = trial_rng(seed, 0);
    let d0 = e0.real_dim() / 2;
    for _ in 0..d0 {
        let coeffs: Vec<f64> = (0..e0.real_dim()).map(|_| normal(&mut rng)).collect();
        let x = e0.basis() * DVector::from_vec(coeffs);
        let x = e.with_real(x.as_slice());
        if x.is_zero() {
            continue;
        }
        for (_, p) in spectral_resolve(&x, 1e-9)?.pairs {
            family.extend(frame_of_minimals(&p)?);
        }
    }
    let n = 2 * e.complex_dim();
    let mut rows: Vec<RMat> = vec![Q_operator(e).matrix().clone()];
    rows.extend(family.iter().map(|v| {
        let q = Q_operator(v);
        let s = linalg::spectral_norm(q.matrix());
        q.matrix() / s
    }));
    let mut stacked = RMat::zeros(n * rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        stacked.view_mut((i * n, 0), (n, n)).copy_from(r);
    }
    let k = Subspace::from_orthonormal(e.space(), linalg::kernel_basis(&stacked, KERNEL_TOL));
    if !k.equals(&dec.spaces[1], ANGLE_TOL) {
        return Err(TripleError::Inconsistent(format!(
            "annihilator intersection has real dimension {} but E1(e) has {}",
            k.real_dim(),
            dec.spaces[1].real_dim()
        )));
    }
    Ok(k)
}

/// The `c` with `P_2(v) e = c v`, for minimal `e` and `v`.
pub fn ttp<T: TripleVector>(e: &T, v: &T) -> Result<Complex64> {
    for (x, name) in [(e, "e"), (v, "v")] {
        if !is_minimal(x)? {
            return Err(TripleError::NotMinimal(format!("ttp: {name} is not a minimal tripotent")));
        }
    }
    ttp_unchecked(e, v)
}

/// `ttp` without the minimality checks, verifying only `P_2(v) e` is
/// proportional to `v`.
pub fn ttp_unchecked<T: TripleVector>(e: &T, v: &T) -> Result<Complex64> {
    let p = v.product(&v.product(e, v)?, v)?;
    let (pf, vf) = (p.flat(), v.flat());
    let vv: f64 = vf.iter().map(|z| z.norm_sqr()).sum();
    let c: Complex64 = vf.iter().zip(&pf).map(|(a, b)| a.conj() * b).sum::<Complex64>() / vv;
    let resid = p.sub(&v.scale(c)).coord_norm();
    if resid > 1e-8 * e.coord_norm().max(1.0) {
        return Err(TripleError::Inconsistent(format!("P2(v)e is not a multiple of v ({resid:e})")));
    }
    Ok(c)
}

/// Every probed nonzero element has trivial annihilator.
pub fn characterize_one_dimensional(triple: &AtomicTriple, seed: u64) -> bool {
    let mut probes = Vec::new();
    let n = triple.complex_dim();
    for c in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[c] = Complex64::new(1.0, 0.0);
        probes.push(triple.from_flat(&v).expect("dimension matches"));
    }
    for (k, f) in triple.factors().iter().enumerate() {
        probes.push(triple.embed_part(k, &canonical_minimal(*f)).expect("factor belongs to triple"));
    }
    let mut rng = trial_rng(seed, 0);
    for _ in 0..20 {
        probes.push(random_atomic(triple, &mut rng));
    }
    probes.iter().all(|a| annihilator_subspace(a).real_dim() == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::{Element, FactorDescriptor};

    fn m2(v: [f64; 4]) -> Element {
        Element::from_real_coords(FactorDescriptor::type1(2, 2).unwrap(), &v).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let e11 = m2([1.0, 0.0, 0.0, 0.0]);
        assert!(truncation_report(&e11, &m2([1.0, 0.0, 0.0, 1.0]), 1e-9).unwrap().is_truncation);
        assert!(truncation_report(&e11, &m2([1.0, 1.0, 0.0, 0.0]), 1e-9).unwrap().is_truncation);
        assert!(!truncation_report(&e11, &m2([2.0, 0.0, 0.0, 0.0]), 1e-9).unwrap().is_truncation);
    }

    #[test]
    fn annihilator_examples() {
        assert_eq!(annihilator(&m2([1.0, 0.0, 0.0, 0.0])).unwrap().complex_dim, 3);
        let id = annihilator(&m2([1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!((id.complex_dim, id.complex_codim), (0, 4));
        assert_eq!(annihilator(&m2([0.0; 4])).unwrap_err(), TripleError::ZeroElement);
    }

    #[test]
    fn max_annihilator_examples() {
        let r = is_max_annihilator(&m2([3.0, 0.0, 0.0, 0.0]), 50, 1).unwrap();
        assert!(r.is_max && r.witness.is_none());
        let r = is_max_annihilator(&m2([1.0, 0.0, 0.0, 1.0]), 50, 1).unwrap();
        assert!(!r.is_max);
        assert!(r.witness.unwrap().sub(&m2([1.0, 0.0, 0.0, 0.0])).coord_norm() < 1e-12);
        assert_eq!((r.annihilator_dim, r.witness_annihilator_dim), (0, Some(3)));
        let r = is_max_annihilator(&m2([2.0, 0.0, 0.0, 1.0]), 50, 1).unwrap();
        assert!(r.witness.unwrap().sub(&m2([2.0, 0.0, 0.0, 0.0])).coord_norm() < 1e-12);
    }

    #[test]
    fn dependence_examples() {
        let e11 = m2([1.0, 0.0, 0.0, 0.0]);
        let f = e11.scale(Complex64::new(2.0, 1.0));
        assert!(linear_dependence_via_annihilators(&e11, &f).unwrap());
        let e12 = m2([0.0, 1.0, 0.0, 0.0]);
        assert!(!linear_dependence_via_annihilators(&e11, &e12).unwrap());
        assert!(linear_dependence_via_annihilators(&e12, &e12.scale(Complex64::new(0.0, 1.0))).unwrap());
        let id = m2([1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(linear_dependence_via_annihilators(&e11, &id), Err(TripleError::Precondition(_))));
    }

    #[test]
    fn peirce1_examples() {
        let s = peirce1_from_annihilators(&m2([1.0, 0.0, 0.0, 0.0]), 3).unwrap();
        assert_eq!(s.complex_dim(), Some(2));
        let m3 = FactorDescriptor::type1(3, 3).unwrap();
        let s = peirce1_from_annihilators(&Element::matrix_unit(m3, 0, 0).unwrap(), 3).unwrap();
        assert_eq!(s.complex_dim(), Some(4));
        let h = FactorDescriptor::type1(1, 4).unwrap();
        let s = peirce1_from_annihilators(&Element::matrix_unit(h, 0, 0).unwrap(), 3).unwrap();
        assert_eq!(s.complex_dim(), Some(3));
        assert!(peirce1_from_annihilators(&m2([1.0, 0.0, 0.0, 1.0]), 3).is_err());
    }

    #[test]
    fn ttp_examples() {
        let e11 = m2([1.0, 0.0, 0.0, 0.0]);
        assert!((ttp(&e11, &e11).unwrap() - 1.0).norm() < 1e-14);
        assert!(ttp(&e11, &m2([0.0, 0.0, 0.0, 1.0])).unwrap().norm() < 1e-14);
        assert!((ttp(&e11, &m2([0.5; 4])).unwrap() - 0.5).norm() < 1e-14);
    }

    #[test]
    fn one_dimensional_characterization() {
        let t = |m, n| AtomicTriple::single(FactorDescriptor::type1(m, n).unwrap());
        assert!(characterize_one_dimensional(&t(1, 1), 0));
        assert!(!characterize_one_dimensional(&t(2, 2), 0));
        assert!(!characterize_one_dimensional(&t(1, 2), 0));
    }

    #[test]
    fn annihilated_samples_give_truncations() {
        let mut rng = trial_rng(5, 0);
        let a = m2([2.0, 0.0, 0.0, 0.0]);
        for _ in 0..10 {
            let z = random_annihilated(&a, &mut rng);
            assert!(!z.is_zero());
            assert!(truncation_report(&a, &a.add(&z), 1e-9).unwrap().is_truncation);
        }
        assert!(random_annihilated(&m2([1.0, 0.0, 0.0, 1.0]), &mut rng).is_zero());
    }

    #[test]
    fn hilbert_condition_matches_truncation() {
        let h = FactorDescriptor::type1(1, 3).unwrap();
        let x = Element::from_real_coords(h, &[1.0, 2.0, 0.0]).unwrap();
        let y = Element::from_real_coords(h, &[1.0, 2.0, 5.0]).unwrap();
        assert!(hilbert_condition(&x, &y, 1e-12) && is_truncation(&x, &y, 1e-12).unwrap());
        let y = Element::from_real_coords(h, &[2.0, 2.0, 5.0]).unwrap();
        assert!(!hilbert_condition(&x, &y, 1e-12) && !is_truncation(&x, &y, 1e-12).unwrap());
    }
}
