//! Seeded random elements, unitaries, tripotents and minimal frames.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rand::SeedableRng;

use crate::factors::{project_matrix_tol, AtomicElement, AtomicTriple, CMat, Element, FactorDescriptor};

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard complex Gaussian.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn random_element<R: Rng + ?Sized>(factor: FactorDescriptor, rng: &mut R) -> Element {
    Element {
        factor,
        coords: (0..factor.complex_dim()).map(|_| complex_normal(rng)).collect(),
    }
}

pub fn random_atomic<R: Rng + ?Sized>(triple: &AtomicTriple, rng: &mut R) -> AtomicElement {
    AtomicElement {
        triple: triple.clone(),
        parts: triple.factors().iter().map(|f| random_element(*f, rng)).collect(),
    }
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `R` removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| normal(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn outer_t(u: &CMat, a: usize, v: &CMat, b: usize) -> CMat {
    // u_a v_b^t
    u.column(a) * v.column(b).transpose()
}

fn outer_star(u: &CMat, a: usize, v: &CMat, b: usize) -> CMat {
    // u_a v_b^*
    u.column(a) * v.column(b).adjoint()
}

fn from_matrix(factor: FactorDescriptor, m: &CMat) -> Element {
    project_matrix_tol(m, factor, 1e-8).expect("constructed with the right symmetry")
}

/// `k` mutually orthogonal minimal tripotents of `factor`, `k <= rank`.
pub fn random_frame<R: Rng + ?Sized>(factor: FactorDescriptor, k: usize, rng: &mut R) -> Vec<Element> {
    assert!(k <= factor.rank(), "frame longer than the rank");
    match factor {
        FactorDescriptor::Type1 { m, n } => {
            let u = random_unitary(m, rng);
            let v = random_unitary(n, rng);
            (0..k).map(|i| from_matrix(factor, &outer_star(&u, i, &v, i))).collect()
        }
        FactorDescriptor::Type3 { n } => {
            let u = random_unitary(n, rng);
            (0..k).map(|i| from_matrix(factor, &outer_t(&u, i, &u, i))).collect()
        }
        FactorDescriptor::Type2 { n } => {
            let u = random_unitary(n, rng);
            (0..k)
                .map(|i| {
                    let m = outer_t(&u, 2 * i, &u, 2 * i + 1) - outer_t(&u, 2 * i + 1, &u, 2 * i);
                    from_matrix(factor, &m)
                })
                .collect()
        }
        FactorDescriptor::Spin { n } => {
            let o = random_orthogonal(n, rng);
            let mu = random_phase(rng);
            let half = Complex64::new(0.5, 0.0);
            let i = Complex64::new(0.0, 1.0);
            let plus: Vec<Complex64> = (0..n).map(|r| mu * half * (o[(r, 0)] + i * o[(r, 1)])).collect();
            let minus: Vec<Complex64> = (0..n).map(|r| mu * half * (o[(r, 0)] - i * o[(r, 1)])).collect();
            [plus, minus]
                .into_iter()
                .take(k)
                .map(|coords| Element { factor, coords })
                .collect()
        }
    }
}

pub fn random_minimal_tripotent<R: Rng + ?Sized>(factor: FactorDescriptor, rng: &mut R) -> Element {
    random_frame(factor, 1, rng).remove(0)
}

/// Tripotent of the given rank (sum of a random frame).
pub fn random_tripotent<R: Rng + ?Sized>(factor: FactorDescriptor, rank: usize, rng: &mut R) -> Element {
    let frame = random_frame(factor, rank, rng);
    let mut e = factor.zero();
    for f in frame {
        for (a, b) in e.coords.iter_mut().zip(f.coords) {
            *a += b;
        }
    }
    e
}

/// `sum lambda_i e_i` over a random frame of random length in `1..=rank`,
/// with `lambda_i` in `[0.5, 3)`.
pub fn random_spectral_element<R: Rng + ?Sized>(factor: FactorDescriptor, rng: &mut R) -> Element {
    let k = rng.gen_range(1..=factor.rank());
    let frame = random_frame(factor, k, rng);
    let mut x = factor.zero();
    for f in frame {
        let l = rng.gen_range(0.5..3.0);
        for (a, b) in x.coords.iter_mut().zip(f.coords) {
            *a += b * l;
        }
    }
    x
}

/// Random element of the sum whose parts are spectral elements or zero.
/// At least one part is nonzero.
pub fn random_spectral_atomic<R: Rng + ?Sized>(triple: &AtomicTriple, rng: &mut R) -> AtomicElement {
    loop {
        let parts: Vec<Element> = triple
            .factors()
            .iter()
            .map(|f| {
                if triple.len() > 1 && rng.gen_bool(0.3) {
                    f.zero()
                } else {
                    random_spectral_element(*f, rng)
                }
            })
            .collect();
        if parts.iter().any(|p| p.coords.iter().any(|c| c.norm() > 0.0)) {
            return AtomicElement { triple: triple.clone(), parts };
        }
    }
}

/// Two collinear minimal tripotents, when the factor has any.
pub fn random_collinear_pair<R: Rng + ?Sized>(
    factor: FactorDescriptor,
    rng: &mut R,
) -> Option<(Element, Element)> {
    match factor {
        FactorDescriptor::Type1 { m, n } if m.max(n) >= 2 => {
            let u = random_unitary(m, rng);
            let v = random_unitary(n, rng);
            let (a, b, c, d) = if n >= 2 { (0, 0, 0, 1) } else { (0, 0, 1, 0) };
            Some((
                from_matrix(factor, &outer_star(&u, a, &v, b)),
                from_matrix(factor, &outer_star(&u, c, &v, d)),
            ))
        }
        FactorDescriptor::Type2 { n } if n >= 3 => {
            let u = random_unitary(n, rng);
            let w = |a, b| outer_t(&u, a, &u, b) - outer_t(&u, b, &u, a);
            Some((from_matrix(factor, &w(0, 1)), from_matrix(factor, &w(0, 2))))
        }
        FactorDescriptor::Spin { n } if n >= 4 => {
            let o = random_orthogonal(n, rng);
            let mu = random_phase(rng);
            let nu = random_phase(rng);
            let i = Complex64::new(0.0, 1.0);
            let e = |ph: Complex64, a: usize, b: usize| Element {
                factor,
                coords: (0..n).map(|r| ph * 0.5 * (o[(r, a)] + i * o[(r, b)])).collect(),
            };
            Some((e(mu, 0, 1), e(nu, 2, 3)))
        }
        _ => None,
    }
}

/// Two orthogonal minimal tripotents, when the rank is at least 2.
pub fn random_orthogonal_pair<R: Rng + ?Sized>(
    factor: FactorDescriptor,
    rng: &mut R,
) -> Option<(Element, Element)> {
    if factor.rank() < 2 {
        return None;
    }
    let mut f = random_frame(factor, 2, rng);
    let b = f.pop().unwrap();
    let a = f.pop().unwrap();
    Some((a, b))
}

/// Uniform real in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = trial_rng(1, 0);
        let u = random_unitary(4, &mut rng);
        let e = &u * u.adjoint() - CMat::identity(4, 4);
        assert!(e.norm() < 1e-12);
        let o = random_orthogonal(5, &mut rng);
        assert!((&o * o.transpose() - DMatrix::<f64>::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = trial_rng(9, 3).gen();
        let b: f64 = trial_rng(9, 3).gen();
        let c: f64 = trial_rng(9, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
