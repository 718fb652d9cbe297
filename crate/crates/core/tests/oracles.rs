//! Independent-route checks of derived quantities.

use num_complex::Complex64;
use rand::Rng;

use triplekit::exactcheck::{exact_triple_product, ExactElement, GaussianRational};
use triplekit::factors::{triple_product, CMat, Element, FactorDescriptor, TripleVector};
use triplekit::peirce::{peirce_decompose, rank_tripotent};
use triplekit::sampling::{random_element, random_minimal_tripotent, random_tripotent, trial_rng};
use triplekit::spectral::{range_tripotent, spectral_resolve};
use triplekit::truncation::{annihilator, ttp};

/// Polar factor of a full-rank matrix by the Newton-Schulz iteration
/// `X <- X (3I - X*X) / 2`, started inside its convergence region.
fn newton_schulz_polar(m: &CMat) -> CMat {
    let mut x = m / Complex64::new(m.norm(), 0.0);
    let id = CMat::identity(m.ncols(), m.ncols());
    for _ in 0..200 {
        let next = &x * (&id * Complex64::new(3.0, 0.0) - x.adjoint() * &x) * Complex64::new(0.5, 0.0);
        let step = (&next - &x).norm();
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

#[test]
fn range_tripotent_is_the_polar_factor() {
    let factors = [
        FactorDescriptor::type1(3, 2).unwrap(),
        FactorDescriptor::type1(2, 4).unwrap(),
        FactorDescriptor::type3(3).unwrap(),
        FactorDescriptor::type2(4).unwrap(),
    ];
    for f in factors {
        for s in 0..40 {
            let mut rng = trial_rng(s, 1);
            let a = random_element(f, &mut rng);
            let m = a.embed_matrix().unwrap();
            let polar = if m.nrows() >= m.ncols() {
                newton_schulz_polar(&m)
            } else {
                newton_schulz_polar(&m.adjoint()).adjoint()
            };
            let r = range_tripotent(&a, 1e-9).unwrap().embed_matrix().unwrap();
            assert!((r - polar).norm() < 1e-8, "{f} seed {s}");
        }
    }
}

#[test]
fn spin_spectrum_matches_closed_form() {
    for n in 3..=8 {
        let f = FactorDescriptor::spin(n).unwrap();
        for s in 0..30 {
            let mut rng = trial_rng(s, n as u64);
            let x = random_element(f, &mut rng);
            let xx: f64 = x.coords.iter().map(|z| z.norm_sqr()).sum();
            let xxbar: Complex64 = x.coords.iter().map(|z| z * z).sum();
            let root = (xx * xx - xxbar.norm_sqr()).max(0.0).sqrt();
            let expected = [(xx + root).sqrt(), (xx - root).max(0.0).sqrt()];
            let got: Vec<f64> = spectral_resolve(&x, 1e-9).unwrap().pairs.iter().map(|p| p.0).collect();
            assert_eq!(got.len(), 2, "Spin({n}) seed {s}");
            for (g, e) in got.iter().zip(expected) {
                assert!((g - e).abs() < 1e-9 * expected[0], "Spin({n}) seed {s}: {g} vs {e}");
            }
            assert!((x.norm() - expected[0]).abs() < 1e-9 * expected[0]);
        }
    }
}

/// Peirce dimensions of a rank-`k` tripotent, from the block structure.
fn peirce_dims(f: FactorDescriptor, k: usize) -> (usize, usize, usize) {
    match f {
        FactorDescriptor::Type1 { m, n } => ((m - k) * (n - k), k * (m - k) + k * (n - k), k * k),
        FactorDescriptor::Type3 { n } => ((n - k) * (n - k + 1) / 2, k * (n - k), k * (k + 1) / 2),
        FactorDescriptor::Type2 { n } => {
            let r = 2 * k;
            ((n - r) * (n - r).saturating_sub(1) / 2, r * (n - r), r * (r - 1) / 2)
        }
        FactorDescriptor::Spin { n } => match k {
            1 => (1, n - 2, 1),
            _ => (0, 0, n),
        },
    }
}

#[test]
fn peirce_dimensions_match_block_counts() {
    let factors = [
        FactorDescriptor::type1(2, 3).unwrap(),
        FactorDescriptor::type1(4, 4).unwrap(),
        FactorDescriptor::type3(4).unwrap(),
        FactorDescriptor::type2(5).unwrap(),
        FactorDescriptor::type2(6).unwrap(),
        FactorDescriptor::spin(5).unwrap(),
    ];
    for f in factors {
        for k in 1..=f.rank() {
            for s in 0..10 {
                let mut rng = trial_rng(s, k as u64);
                let e = random_tripotent(f, k, &mut rng);
                assert_eq!(peirce_decompose(&e).unwrap().dims(), peirce_dims(f, k), "{f} rank {k}");
                assert_eq!(rank_tripotent(&e).unwrap(), k);
            }
        }
    }
}

fn small_gaussian<R: Rng>(rng: &mut R) -> GaussianRational {
    GaussianRational::frac(rng.gen_range(-4..=4), rng.gen_range(1..=3), rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

#[test]
fn exact_products_agree_with_floating_point() {
    let factors = [
        FactorDescriptor::type1(2, 3).unwrap(),
        FactorDescriptor::type2(4).unwrap(),
        FactorDescriptor::type3(3).unwrap(),
        FactorDescriptor::spin(5).unwrap(),
    ];
    for f in factors {
        for s in 0..25 {
            let mut rng = trial_rng(s, 2);
            let xs: Vec<ExactElement> = (0..3)
                .map(|_| ExactElement::new(f, (0..f.complex_dim()).map(|_| small_gaussian(&mut rng)).collect()).unwrap())
                .collect();
            let exact = exact_triple_product(&xs[0], &xs[1], &xs[2]).unwrap().to_element();
            let fl: Vec<Element> = xs.iter().map(|x| x.to_element()).collect();
            let float = triple_product(&fl[0], &fl[1], &fl[2]).unwrap();
            assert!(exact.sub(&float).coord_norm() < 1e-12 * (1.0 + exact.coord_norm()), "{f} seed {s}");
        }
    }
}

#[test]
fn ttp_in_matrices_is_the_trace_pairing() {
    let f = FactorDescriptor::type1(3, 4).unwrap();
    for s in 0..50 {
        let mut rng = trial_rng(s, 3);
        let e = random_minimal_tripotent(f, &mut rng);
        let v = random_minimal_tripotent(f, &mut rng);
        let (me, mv) = (e.embed_matrix().unwrap(), v.embed_matrix().unwrap());
        let trace = (mv.adjoint() * me).trace();
        assert!((ttp(&e, &v).unwrap() - trace).norm() < 1e-10, "seed {s}");
    }
}

#[test]
fn rank_one_annihilator_is_the_euclidean_complement() {
    for n in 2..=6 {
        let f = FactorDescriptor::type1(1, n).unwrap();
        let mut rng = trial_rng(n as u64, 4);
        let x = random_element(f, &mut rng);
        let ann = annihilator(&x).unwrap();
        assert_eq!(ann.complex_dim, n - 1);
        let w = random_element(f, &mut rng);
        let c: Complex64 = triplekit::factors::inner(&w.coords, &x.coords) / x.coords.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let z = w.sub(&x.scale(c));
        assert!(ann.subspace.contains(&z, 1e-10));
    }
}
