//! Dense eigen-solvers and matrix functions used across the crate.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, czero, lit, Real};

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending;
/// column `j` of the returned matrix is the eigenvector of value `j`.
pub fn hermitian_eigh<T: Real>(m: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    let eig = SymmetricEigen::new(flush_tiny(m));
    sort_eigen(eig.eigenvalues.iter().copied().collect(), &eig.eigenvectors)
}

/// Real-symmetric counterpart of [`hermitian_eigh`].
pub fn symmetric_eigh<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(m.clone());
    sort_eigen(eig.eigenvalues.iter().copied().collect(), &eig.eigenvectors)
}

fn sort_eigen<T: Real, S: nalgebra::Scalar + Copy>(
    values: Vec<T>,
    vectors: &DMatrix<S>,
) -> (Vec<T>, DMatrix<S>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let sorted = order.iter().map(|&i| values[i]).collect();
    let vecs = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (sorted, vecs)
}

// Entries far below rounding level can underflow to subnormals inside the
// Householder reduction and poison it with NaN; they carry no information.
fn flush_tiny<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let scale = m.iter().map(|&z| cabs(z)).fold(T::zero(), |a, b| a.max(b));
    let floor = scale * T::default_epsilon() * T::default_epsilon();
    m.map(|z| if cabs(z) < floor { czero() } else { z })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let eig = SymmetricEigen::new(flush_tiny(m));
    eig.eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
}

/// Principal logarithm of a unitary matrix; eigenphases lie in `(-pi, pi)`.
///
/// Uses the Cayley transform `K = i (I - U)(I + U)^{-1}`, which is Hermitian
/// with `U = e^{2i atan K}`, and falls back to a Schur form when `I + U` is
/// (nearly) singular.
pub fn unitary_log<T: Real>(u: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let n = u.nrows();
    let id = DMatrix::<Complex<T>>::identity(n, n);
    if let Some(inv) = (&id + u).try_inverse() {
        let k = ((&id - u) * inv).map(|z| Complex::new(-z.im, z.re));
        let defect = (&k - k.adjoint()).camax();
        if defect.is_finite() && defect < lit::<T>(1e-6) * (T::one() + k.camax()) {
            let herm = (&k + k.adjoint()).map(|z| z.scale(lit(0.5)));
            let (vals, vecs) = hermitian_eigh(&herm);
            let mut scaled = vecs.clone();
            for (j, &v) in vals.iter().enumerate() {
                let phase = Complex::new(T::zero(), lit::<T>(2.0) * v.atan());
                for i in 0..n {
                    scaled[(i, j)] *= phase;
                }
            }
            return Ok(scaled * vecs.adjoint());
        }
    }
    schur_log(u)
}

fn schur_log<T: Real>(u: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), T::default_epsilon(), 0)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut diag = DMatrix::from_element(n, n, czero());
    for i in 0..n {
        let lambda = t[(i, i)];
        if cabs(lambda) == T::zero() {
            return Err(Error::Numeric("singular matrix has no logarithm".into()));
        }
        diag[(i, i)] = Complex::new(cabs(lambda).ln(), lambda.im.atan2(lambda.re));
    }
    Ok(&q * diag * q.adjoint())
}

/// `exp(-i t H)` for Hermitian `H` given its eigen-decomposition.
pub fn unitary_from_eigen<T: Real>(
    values: &[T],
    vectors: &DMatrix<Complex<T>>,
    t: T,
) -> DMatrix<Complex<T>> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &e) in values.iter().enumerate() {
        let phase = Complex::new((e * t).cos(), -(e * t).sin());
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}
