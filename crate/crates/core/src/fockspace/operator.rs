use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, czero, from_usize, lit, Real};

/// Dense operator on the Fock space truncated to `cutoff` levels.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator<T: Real> {
    entries: DMatrix<Complex<T>>,
    truncation_warning: bool,
}

impl<T: Real> TruncatedOperator<T> {
    pub fn from_matrix(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                left: entries.nrows(),
                right: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidDimension {
                what: "operator",
                got: 0,
                min: 1,
            });
        }
        Ok(TruncatedOperator {
            entries,
            truncation_warning: false,
        })
    }

    pub fn identity(cutoff: usize) -> Self {
        TruncatedOperator {
            entries: DMatrix::identity(cutoff, cutoff),
            truncation_warning: false,
        }
    }

    pub fn zeros(cutoff: usize) -> Self {
        TruncatedOperator {
            entries: DMatrix::zeros(cutoff, cutoff),
            truncation_warning: false,
        }
    }

    pub fn from_diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut entries = DMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            entries[(i, i)] = Complex::new(*v, T::zero());
        }
        TruncatedOperator {
            entries,
            truncation_warning: false,
        }
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    /// Set when any input amplitude was too large for the cutoff to be trusted.
    #[inline]
    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }

    pub fn with_warning(mut self, flag: bool) -> Self {
        self.truncation_warning |= flag;
        self
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator {
            entries: self.entries.adjoint(),
            truncation_warning: self.truncation_warning,
        }
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// `max |A - A^dagger|`.
    pub fn hermitian_defect(&self) -> T {
        let n = self.cutoff();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = self.entries[(i, j)] - self.entries[(j, i)].conj();
                worst = worst.max(cabs(d));
            }
        }
        worst
    }

    /// Hermiticity in the relative sense `max|A - A^dagger| < rel_tol * max|A|`.
    pub fn is_hermitian(&self, rel_tol: T) -> bool {
        self.hermitian_defect() <= rel_tol * self.max_abs()
    }

    /// Verifies the Hermitian claim at relative tolerance `1e-12`.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect <= lit::<T>(1e-12) * self.max_abs() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                defect: crate::scalar::to_f64(defect),
            })
        }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let sym = (&self.entries + self.entries.adjoint()).scale(lit(0.5));
        TruncatedOperator {
            entries: sym,
            truncation_warning: self.truncation_warning,
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.entries.trace()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.cutoff() != other.cutoff() {
            Err(Error::DimensionMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            })
        } else {
            Ok(())
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(TruncatedOperator {
            entries: &self.entries * &other.entries,
            truncation_warning: self.truncation_warning || other.truncation_warning,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(TruncatedOperator {
            entries: &self.entries + &other.entries,
            truncation_warning: self.truncation_warning || other.truncation_warning,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(TruncatedOperator {
            entries: &self.entries - &other.entries,
            truncation_warning: self.truncation_warning || other.truncation_warning,
        })
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        TruncatedOperator {
            entries: self.entries.map(|z| z * factor),
            truncation_warning: self.truncation_warning,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        Ok(TruncatedOperator {
            entries: ab - ba,
            truncation_warning: self.truncation_warning || other.truncation_warning,
        })
    }

    /// `U^dagger A U`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        self.check_same(unitary)?;
        Ok(TruncatedOperator {
            entries: unitary.entries.adjoint() * &self.entries * &unitary.entries,
            truncation_warning: self.truncation_warning || unitary.truncation_warning,
        })
    }

    /// Top-left `size x size` block.
    pub fn block(&self, size: usize) -> Self {
        let size = size.min(self.cutoff());
        TruncatedOperator {
            entries: self.entries.view((0, 0), (size, size)).into_owned(),
            truncation_warning: self.truncation_warning,
        }
    }

    /// Zero-padded embedding into a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Result<Self> {
        if cutoff < self.cutoff() {
            return Err(Error::InvalidDimension {
                what: "embedding",
                got: cutoff,
                min: self.cutoff(),
            });
        }
        let mut entries = DMatrix::zeros(cutoff, cutoff);
        let n = self.cutoff();
        entries.view_mut((0, 0), (n, n)).copy_from(&self.entries);
        Ok(TruncatedOperator {
            entries,
            truncation_warning: self.truncation_warning,
        })
    }

    /// `max |A_ij - B_ij|` over the top-left `size x size` block.
    pub fn max_abs_diff(&self, other: &Self, size: usize) -> T {
        let size = size.min(self.cutoff()).min(other.cutoff());
        let mut worst = T::zero();
        for j in 0..size {
            for i in 0..size {
                worst = worst.max(cabs(self.entries[(i, j)] - other.entries[(i, j)]));
            }
        }
        worst
    }

    /// `max |A - I|` over the top-left block.
    pub fn identity_defect(&self, size: usize) -> T {
        let size = size.min(self.cutoff());
        let mut worst = T::zero();
        for j in 0..size {
            for i in 0..size {
                let target = if i == j { T::one() } else { T::zero() };
                let z = self.entries[(i, j)] - Complex::new(target, T::zero());
                worst = worst.max(cabs(z));
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Annihilation operator, `<m|a|n> = sqrt(n) delta_{m, n-1}`.
pub fn annihilation<T: Real>(cutoff: usize) -> Result<TruncatedOperator<T>> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "annihilation operator",
            got: cutoff,
            min: 2,
        });
    }
    let mut entries = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        entries[(n - 1, n)] = Complex::new(from_usize::<T>(n).sqrt(), T::zero());
    }
    TruncatedOperator::from_matrix(entries)
}

pub fn creation<T: Real>(cutoff: usize) -> Result<TruncatedOperator<T>> {
    Ok(annihilation(cutoff)?.adjoint())
}

pub fn number<T: Real>(cutoff: usize) -> Result<TruncatedOperator<T>> {
    if cutoff < 1 {
        return Err(Error::InvalidDimension {
            what: "number operator",
            got: cutoff,
            min: 1,
        });
    }
    let diag: Vec<T> = (0..cutoff).map(from_usize).collect();
    Ok(TruncatedOperator::from_diagonal(&diag))
}

/// Photon-number parity `(-1)^n`.
pub fn parity<T: Real>(cutoff: usize) -> Result<TruncatedOperator<T>> {
    if cutoff < 1 {
        return Err(Error::InvalidDimension {
            what: "parity operator",
            got: cutoff,
            min: 1,
        });
    }
    let diag: Vec<T> = (0..cutoff)
        .map(|n| if n % 2 == 0 { T::one() } else { -T::one() })
        .collect();
    Ok(TruncatedOperator::from_diagonal(&diag))
}

/// Normalized ket in the truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct KetState<T: Real> {
    amplitudes: DVector<Complex<T>>,
    truncation_warning: bool,
}

impl<T: Real> KetState<T> {
    /// Normalizes the given amplitudes; a zero vector is rejected.
    pub fn from_amplitudes(amplitudes: DVector<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension {
                what: "ket",
                got: 0,
                min: 1,
            });
        }
        let norm = amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidState(
                "ket has zero or non-finite norm".into(),
            ));
        }
        Ok(KetState {
            amplitudes: amplitudes.unscale(norm),
            truncation_warning: false,
        })
    }

    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if n >= cutoff {
            return Err(Error::InvalidDimension {
                what: "Fock level",
                got: cutoff,
                min: n + 1,
            });
        }
        let mut v = DVector::from_element(cutoff, czero());
        v[n] = Complex::new(T::one(), T::zero());
        Self::from_amplitudes(v)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::fock(0, cutoff)
    }

    /// Coherent state `D(alpha)|0>`, renormalized on the truncated space.
    pub fn coherent(alpha: super::PhasePoint<T>, cutoff: usize) -> Result<Self> {
        alpha.ensure_finite()?;
        let d = super::displacement_block(alpha, cutoff, 1);
        let warn = super::truncation_unreliable(alpha.norm_sqr(), cutoff);
        Ok(Self::from_amplitudes(d.column(0).into_owned())?.with_warning(warn))
    }

    pub fn with_warning(mut self, flag: bool) -> Self {
        self.truncation_warning |= flag;
        self
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::DimensionMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `<self|A|self>`.
    pub fn expectation(&self, op: &TruncatedOperator<T>) -> Result<Complex<T>> {
        if self.cutoff() != op.cutoff() {
            return Err(Error::DimensionMismatch {
                left: self.cutoff(),
                right: op.cutoff(),
            });
        }
        Ok(self.amplitudes.dotc(&(op.entries() * &self.amplitudes)))
    }

    pub fn density(&self) -> TruncatedOperator<T> {
        let rho = &self.amplitudes * self.amplitudes.adjoint();
        TruncatedOperator::from_matrix(rho)
            .expect("outer product is square")
            .with_warning(self.truncation_warning)
    }

    /// Probability mass on odd photon numbers.
    pub fn odd_mass(&self) -> T {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(n, _)| n % 2 == 1)
            .map(|(_, z)| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }
}
