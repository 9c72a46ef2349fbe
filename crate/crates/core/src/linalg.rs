//! Small dense helpers on top of nalgebra.

use nalgebra::{DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::{cplx, lit, CMatrix, Complex, Real};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * cplx(lit::<T>(0.5), T::zero());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// `m^{-1/2}` for a Hermitian positive definite `m`.
pub fn inv_sqrt_psd<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let diag = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            cplx(T::one() / vals[i].max(<T as Real>::epsilon()).sqrt(), T::zero())
        } else {
            cplx(T::zero(), T::zero())
        }
    });
    &vecs * diag * vecs.adjoint()
}

/// Unitary `W` minimizing `||a W - b||_F` (orthogonal Procrustes).
pub fn procrustes<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let m = a.adjoint() * b;
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    u * v_t
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian<T: Real>(m: &CMatrix<T>) -> T {
    hermitian_eigen(m).0.into_iter().fold(T::zero(), |acc, x| acc + x.abs())
}

/// Squared singular values in descending order.
pub fn squared_singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = m.singular_values().iter().map(|&x| x * x).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    lit(x)
}

pub fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    cplx(normal(rng), normal(rng))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<Complex<T>> {
    DVector::from_fn(n, |_, _| gaussian_complex(rng))
}

/// Haar-distributed unitary via QR of a Gaussian matrix with phase fix.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = gaussian_matrix::<T, R>(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let mag = d.norm_sqr().sqrt();
        if mag > T::zero() {
            let ph = cplx(d.re / mag, d.im / mag);
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

/// Random Hermitian matrix rescaled to unit spectral norm.
pub fn random_unit_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    let g = gaussian_matrix::<T, R>(n, n, rng);
    let h = (&g + g.adjoint()) * cplx(lit::<T>(0.5), T::zero());
    let norm = hermitian_eigen(&h).0.into_iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if norm > T::zero() {
        h * cplx(T::one() / norm, T::zero())
    } else {
        identity(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_square_root_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = gaussian_matrix::<f64, _>(4, 4, &mut rng);
        let s = g.adjoint() * &g;
        let r = inv_sqrt_psd(&s);
        let id = &r * &s * &r;
        assert!((id - identity::<f64>(4)).norm() < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary::<f64, _>(5, &mut rng);
        assert!((u.adjoint() * &u - identity::<f64>(5)).norm() < 1e-12);
    }

    #[test]
    fn procrustes_recovers_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = gaussian_matrix::<f64, _>(3, 3, &mut rng);
        let w = haar_unitary::<f64, _>(3, &mut rng);
        let b = &a * &w;
        let found = procrustes(&a, &b);
        assert!((found - w).norm() < 1e-10);
    }

    #[test]
    fn unit_hermitian_has_unit_spectral_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_unit_hermitian::<f64, _>(4, &mut rng);
        assert!((h.adjoint() - &h).norm() < 1e-14);
        let (vals, _) = hermitian_eigen(&h);
        let top = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!((top - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_descending_and_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = gaussian_matrix::<f64, _>(4, 4, &mut rng);
        let h = &g + g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_fn(4, 4, |i, j| if i == j { cplx(vals[i], 0.0) } else { cplx(0.0, 0.0) });
        assert!((&vecs * d * vecs.adjoint() - h).norm() < 1e-10);
    }
}
