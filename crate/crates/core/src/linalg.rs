//! Dense real linear algebra on realified coordinates.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::factors::CMat;

pub type RMat = DMatrix<f64>;
pub type CVec = nalgebra::DVector<Complex64>;

/// Real `2r x 2c` matrix of a complex-linear map in interleaved layout.
pub fn realify_complex_matrix(m: &CMat) -> RMat {
    let mut r = RMat::zeros(2 * m.nrows(), 2 * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            r[(2 * i, 2 * j)] = z.re;
            r[(2 * i, 2 * j + 1)] = -z.im;
            r[(2 * i + 1, 2 * j)] = z.im;
            r[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    r
}

/// Complex matrix of a realified map, reading its complex-linear part.
pub fn complex_part(r: &RMat) -> CMat {
    let (rows, cols) = (r.nrows() / 2, r.ncols() / 2);
    CMat::from_fn(rows, cols, |i, j| {
        let a = r[(2 * i, 2 * j)];
        let b = r[(2 * i, 2 * j + 1)];
        let c = r[(2 * i + 1, 2 * j)];
        let d = r[(2 * i + 1, 2 * j + 1)];
        Complex64::new(0.5 * (a + d), 0.5 * (c - b))
    })
}

/// Multiplication by `i` on `C^n` realified.
pub fn j_matrix(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

// Dense decompositions go through LAPACK.
extern crate openblas_src;

fn lapack_check(routine: &str, info: i32) {
    assert!(info == 0, "{routine} failed with info = {info}");
}

/// Thin real SVD `m = U diag(s) V^t`, `s` descending.
pub fn thin_svd(m: &RMat) -> (RMat, Vec<f64>, RMat) {
    let (r, c) = (m.nrows(), m.ncols());
    let k = r.min(c);
    if k == 0 {
        return (RMat::zeros(r, 0), Vec::new(), RMat::zeros(c, 0));
    }
    let mut a = m.clone();
    let mut s = vec![0.0; k];
    let mut u = RMat::zeros(r, k);
    let mut vt = RMat::zeros(k, c);
    let mut info = 0;
    let mut query = [0.0];
    let (ri, ci, ki) = (r as i32, c as i32, k as i32);
    unsafe {
        lapack::dgesvd(b'S', b'S', ri, ci, a.as_mut_slice(), ri, &mut s, u.as_mut_slice(), ri, vt.as_mut_slice(), ki, &mut query, -1, &mut info);
    }
    lapack_check("dgesvd", info);
    let lwork = query[0] as usize;
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dgesvd(b'S', b'S', ri, ci, a.as_mut_slice(), ri, &mut s, u.as_mut_slice(), ri, vt.as_mut_slice(), ki, &mut work, lwork as i32, &mut info);
    }
    lapack_check("dgesvd", info);
    (u, s, vt.transpose())
}

/// Thin complex SVD `m = U diag(s) V^*`, `s` descending.
pub fn complex_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = (m.nrows(), m.ncols());
    let k = r.min(c);
    if k == 0 {
        return (CMat::zeros(r, 0), Vec::new(), CMat::zeros(c, 0));
    }
    let mut a = m.clone();
    let mut s = vec![0.0; k];
    let mut u = CMat::zeros(r, k);
    let mut vt = CMat::zeros(k, c);
    let mut rwork = vec![0.0; 5 * k];
    let mut info = 0;
    let mut query = [Complex64::new(0.0, 0.0)];
    let (ri, ci, ki) = (r as i32, c as i32, k as i32);
    unsafe {
        lapack::zgesvd(b'S', b'S', ri, ci, a.as_mut_slice(), ri, &mut s, u.as_mut_slice(), ri, vt.as_mut_slice(), ki, &mut query, -1, &mut rwork, &mut info);
    }
    lapack_check("zgesvd", info);
    let lwork = query[0].re as usize;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgesvd(b'S', b'S', ri, ci, a.as_mut_slice(), ri, &mut s, u.as_mut_slice(), ri, vt.as_mut_slice(), ki, &mut work, lwork as i32, &mut rwork, &mut info);
    }
    lapack_check("zgesvd", info);
    (u, s, vt.adjoint())
}

/// Singular values, descending.
pub fn singular_values(m: &RMat) -> Vec<f64> {
    thin_svd(m).1
}

/// Singular values of a complex matrix, descending.
pub fn complex_singular_values(m: &CMat) -> Vec<f64> {
    complex_svd(m).1
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(m: &RMat) -> (Vec<f64>, RMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), RMat::zeros(0, 0));
    }
    let mut a = m.clone();
    let mut w = vec![0.0; n];
    let mut info = 0;
    let mut query = [0.0];
    unsafe {
        lapack::dsyev(b'V', b'L', n as i32, a.as_mut_slice(), n as i32, &mut w, &mut query, -1, &mut info);
    }
    lapack_check("dsyev", info);
    let lwork = query[0] as usize;
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dsyev(b'V', b'L', n as i32, a.as_mut_slice(), n as i32, &mut w, &mut work, lwork as i32, &mut info);
    }
    lapack_check("dsyev", info);
    (w, a)
}

/// Eigenvalues (ascending) and unitary eigenvectors of a hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let mut a = m.clone();
    let mut w = vec![0.0; n];
    let mut rwork = vec![0.0; (3 * n).saturating_sub(2).max(1)];
    let mut info = 0;
    let mut query = [Complex64::new(0.0, 0.0)];
    unsafe {
        lapack::zheev(b'V', b'L', n as i32, a.as_mut_slice(), n as i32, &mut w, &mut query, -1, &mut rwork, &mut info);
    }
    lapack_check("zheev", info);
    let lwork = query[0].re as usize;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zheev(b'V', b'L', n as i32, a.as_mut_slice(), n as i32, &mut w, &mut work, lwork as i32, &mut rwork, &mut info);
    }
    lapack_check("zheev", info);
    (w, a)
}

pub fn spectral_norm(m: &RMat) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

/// Orthonormal columns spanning the numerical kernel: right singular
/// vectors with singular value `<= rel_tol * sigma_max`.
pub fn kernel_basis(m: &RMat, rel_tol: f64) -> RMat {
    let n = m.ncols();
    if n == 0 {
        return RMat::zeros(0, 0);
    }
    let padded = if m.nrows() < n {
        let mut p = RMat::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sv, v) = thin_svd(&padded);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax;
    let cols: Vec<_> = (0..sv.len()).filter(|&i| smax == 0.0 || sv[i] <= cut).map(|i| v.column(i).into_owned()).collect();
    if cols.is_empty() {
        RMat::zeros(n, 0)
    } else {
        orthonormalize(&RMat::from_columns(&cols), 1e-8)
    }
}

/// Modified Gram-Schmidt in column order, twice, dropping columns whose
/// residual falls below `tol` times the largest column norm.
pub fn orthonormalize(cols: &RMat, tol: f64) -> RMat {
    let scale = cols.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out: Vec<nalgebra::DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return RMat::zeros(cols.nrows(), 0);
    }
    for c in cols.column_iter() {
        let mut v = c.clone_owned();
        for _ in 0..2 {
            for q in &out {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let r = v.norm();
        if r > tol * scale {
            out.push(v / r);
        }
    }
    if out.is_empty() {
        RMat::zeros(cols.nrows(), 0)
    } else {
        RMat::from_columns(&out)
    }
}

/// Exactly `rank` orthonormal vectors from the columns, each step taking
/// the column with the largest residual (lowest index on ties).
pub fn pivoted_basis(cols: &RMat, rank: usize) -> RMat {
    let mut resid: Vec<nalgebra::DVector<f64>> = cols.column_iter().map(|c| c.clone_owned()).collect();
    let mut out: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(rank);
    for _ in 0..rank.min(resid.len()) {
        let (best, norm) = resid
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if norm <= 0.0 {
            break;
        }
        let mut q = resid[best].clone() / norm;
        for p in &out {
            let d = p.dot(&q);
            q.axpy(-d, p, 1.0);
        }
        q /= q.norm();
        for v in resid.iter_mut() {
            let d = q.dot(v);
            v.axpy(-d, &q, 1.0);
        }
        out.push(q);
    }
    if out.is_empty() {
        RMat::zeros(cols.nrows(), 0)
    } else {
        RMat::from_columns(&out)
    }
}

/// Sine of the largest principal angle from `span(a)` into `span(b)`:
/// zero iff `span(a)` is contained in `span(b)`. Both orthonormal.
pub fn inclusion_sine(a: &RMat, b: &RMat) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let resid = if b.ncols() == 0 {
        a.clone()
    } else {
        a - b * (b.transpose() * a)
    };
    spectral_norm(&resid).min(1.0)
}

/// Principal angles between two orthonormal bases, ascending.
pub fn principal_angles(a: &RMat, b: &RMat) -> Vec<f64> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Vec::new();
    }
    let m = a.transpose() * b;
    let mut angles: Vec<f64> = singular_values(&m)
        .iter()
        .map(|&s| s.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles
}

/// Thin SVD `m = sum s_i u_i v_i^*` over singular values above
/// `rel_tol * s_max`, descending.
pub fn complex_thin_svd(m: &CMat, rel_tol: f64) -> Vec<(f64, CVec, CVec)> {
    let (u, s, v) = complex_svd(m);
    let smax = s.first().cloned().unwrap_or(0.0);
    (0..s.len())
        .filter(|&k| s[k] > rel_tol * smax && s[k] > 0.0)
        .map(|k| (s[k], u.column(k).into_owned(), v.column(k).into_owned()))
        .collect()
}

/// Frobenius norm of a difference.
pub fn frobenius_distance(a: &RMat, b: &RMat) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one() {
        let m = RMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let k = kernel_basis(&m, 1e-9);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
        let z = RMat::zeros(3, 3);
        assert_eq!(kernel_basis(&z, 1e-9).ncols(), 3);
    }

    #[test]
    fn realified_complex_product_matches() {
        let a = CMat::from_row_slice(1, 1, &[Complex64::new(0.0, 1.0)]);
        assert_eq!(realify_complex_matrix(&a), j_matrix(1));
        assert_eq!(complex_part(&j_matrix(1)), a);
    }

    #[test]
    fn thin_svd_recomposes() {
        let m = CMat::from_row_slice(
            2,
            3,
            &[
                Complex64::new(1.0, 2.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(3.0, 0.5),
                Complex64::new(-2.0, 0.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let parts = complex_thin_svd(&m, 1e-12);
        assert_eq!(parts.len(), 2);
        let rec = parts.iter().fold(CMat::zeros(2, 3), |acc, (s, u, v)| acc + u * v.adjoint() * Complex64::new(*s, 0.0));
        assert!((rec - &m).norm() < 1e-12 * m.norm());
    }

    fn low_rank(n: usize, k: usize, rank: usize, seed: u64) -> (RMat, CMat) {
        let mut rng = crate::sampling::trial_rng(seed, 0);
        let a = RMat::from_fn(n, rank, |_, _| crate::sampling::normal(&mut rng));
        let b = RMat::from_fn(rank, k, |_, _| crate::sampling::normal(&mut rng));
        let ca = CMat::from_fn(n, rank, |_, _| crate::sampling::complex_normal(&mut rng));
        let cb = CMat::from_fn(rank, k, |_, _| crate::sampling::complex_normal(&mut rng));
        (a * b, ca * cb)
    }

    #[test]
    fn rank_deficient_decompositions_recompose() {
        for seed in 0..300 {
            let n = 3 + (seed as usize % 6);
            let (m, c) = low_rank(n, n + 2, 1 + seed as usize % 3, seed);
            let (u, s, v) = thin_svd(&m);
            let rec = &u * RMat::from_diagonal(&nalgebra::DVector::from_vec(s)) * v.transpose();
            assert!((rec - &m).norm() < 1e-12 * m.norm());
            let parts = complex_thin_svd(&c, 0.0);
            let rec = parts.iter().fold(CMat::zeros(n, n + 2), |acc, (s, u, v)| acc + u * v.adjoint() * Complex64::new(*s, 0.0));
            assert!((rec - &c).norm() < 1e-12 * c.norm());
            let g = m.transpose() * &m;
            let (w, q) = symmetric_eigen(&g);
            let rec = &q * RMat::from_diagonal(&nalgebra::DVector::from_vec(w)) * q.transpose();
            assert!((rec - &g).norm() < 1e-12 * g.norm());
            let h = c.adjoint() * &c;
            let (w, q) = hermitian_eigen(&h);
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(w.len(), w.iter().map(|&x| Complex64::new(x, 0.0))));
            assert!((&q * d * q.adjoint() - &h).norm() < 1e-12 * h.norm());
        }
    }

    #[test]
    fn kernel_of_low_rank_map() {
        let (m, _) = low_rank(5, 7, 2, 9);
        let k = kernel_basis(&m, 1e-9);
        assert_eq!(k.ncols(), 5);
        assert!((&m * &k).norm() < 1e-12 * m.norm());
    }

    #[test]
    fn inclusion_of_coordinate_planes() {
        let e1 = RMat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let e12 = RMat::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(inclusion_sine(&e1, &e12) < 1e-15);
        assert!((inclusion_sine(&e12, &e1) - 1.0).abs() < 1e-15);
        let angles = principal_angles(&e12, &e12);
        assert!(angles.iter().all(|a| a.abs() < 1e-7));
    }
}
