//! Characteristic functions `f(alpha) = Tr[D^dagger(alpha) F]` of truncated
//! operators and states, Wigner functions, effective squeezing and analytic
//! characteristic functions built from point, Gaussian and ring primitives.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::{displacement_block, KetState, PhasePoint, TruncatedOperator};
use crate::linalg::min_eigenvalue;
use crate::scalar::{cabs, czero, lit, to_f64, Real};

/// Default matching window for lattice-point primitives.
pub const DEFAULT_POINT_TOLERANCE: f64 = 1e-9;

/// `Tr[D^dagger(alpha) A] = sum_{mn} conj(<m|D|n>) A_{mn}`.
pub fn char_of_operator<T: Real>(
    op: &TruncatedOperator<T>,
    alpha: PhasePoint<T>,
) -> Result<Complex<T>> {
    alpha.ensure_finite()?;
    let c = op.cutoff();
    let d = displacement_block(alpha, c, c);
    Ok(char_with_block(op.entries(), &d))
}

pub(crate) fn char_with_block<T: Real>(
    a: &DMatrix<Complex<T>>,
    d: &DMatrix<Complex<T>>,
) -> Complex<T> {
    a.iter()
        .zip(d.iter())
        .fold(czero(), |acc, (x, y)| acc + y.conj() * x)
}

/// `<psi|D^dagger(alpha)|psi>`, the characteristic function of a pure state.
pub fn char_of_ket<T: Real>(ket: &KetState<T>, alpha: PhasePoint<T>) -> Result<Complex<T>> {
    alpha.ensure_finite()?;
    let c = ket.cutoff();
    let d = displacement_block(alpha, c, c);
    let psi = ket.amplitudes();
    Ok(psi.dotc(&(&d * psi)).conj())
}

/// Effective squeezing parameters of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingReport<T: Real> {
    pub delta_q: T,
    pub delta_p: T,
    /// Set when a characteristic-function magnitude reached 1 and the
    /// corresponding parameter was clamped to zero.
    pub clamped: bool,
}

fn squeezing_from_magnitude<T: Real>(magnitude: T) -> Result<(T, bool)> {
    if magnitude == T::zero() {
        return Err(Error::InfiniteSqueezing);
    }
    if !magnitude.is_finite() {
        return Err(Error::Numeric("non-finite characteristic function".into()));
    }
    if magnitude >= T::one() {
        return Ok((T::zero(), true));
    }
    Ok(((-magnitude.ln() / T::pi()).sqrt(), false))
}

fn stabilizer_points<T: Real>() -> (PhasePoint<T>, PhasePoint<T>) {
    let s = (lit::<T>(2.0) * T::pi()).sqrt();
    (PhasePoint::imag(s), PhasePoint::real(s))
}

/// `Delta_q = sqrt(-ln|rho(i sqrt(2 pi))| / pi)`, `Delta_p` likewise at `sqrt(2 pi)`.
pub fn squeezing_from_char<T: Real>(
    rho_q: Complex<T>,
    rho_p: Complex<T>,
) -> Result<SqueezingReport<T>> {
    let (delta_q, cq) = squeezing_from_magnitude(cabs(rho_q))?;
    let (delta_p, cp) = squeezing_from_magnitude(cabs(rho_p))?;
    Ok(SqueezingReport {
        delta_q,
        delta_p,
        clamped: cq || cp,
    })
}

/// Checks trace one (within 1e-8) and positivity (smallest eigenvalue above -1e-10).
pub fn validate_density<T: Real>(rho: &TruncatedOperator<T>) -> Result<()> {
    let tr = rho.trace();
    if to_f64(cabs(tr - Complex::new(T::one(), T::zero()))) > 1e-8 {
        return Err(Error::InvalidState(format!(
            "trace {} differs from 1",
            to_f64(tr.re)
        )));
    }
    rho.ensure_hermitian()?;
    let min = to_f64(min_eigenvalue(&rho.hermitian_part().into_entries()));
    if min < -1e-10 {
        return Err(Error::InvalidState(format!(
            "density matrix has eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Effective squeezing of a density matrix.
pub fn effective_squeezing<T: Real>(rho: &TruncatedOperator<T>) -> Result<SqueezingReport<T>> {
    validate_density(rho)?;
    let (q, p) = stabilizer_points();
    squeezing_from_char(char_of_operator(rho, q)?, char_of_operator(rho, p)?)
}

/// Effective squeezing of a pure state without forming its density matrix.
pub fn effective_squeezing_ket<T: Real>(ket: &KetState<T>) -> Result<SqueezingReport<T>> {
    let (q, p) = stabilizer_points();
    squeezing_from_char(char_of_ket(ket, q)?, char_of_ket(ket, p)?)
}

// (2/pi) Tr[rho D(2 alpha) Pi] = (2/pi) sum_{nm} rho_{nm} <m|D(2 alpha)|n> (-1)^n
pub(crate) fn wigner_point<T: Real>(rho: &DMatrix<Complex<T>>, alpha: PhasePoint<T>) -> Complex<T> {
    let c = rho.nrows();
    let d = displacement_block(alpha * lit(2.0), c, c);
    let mut acc = czero();
    for n in 0..c {
        let mut col = czero();
        for m in 0..c {
            col += rho[(n, m)] * d[(m, n)];
        }
        if n % 2 == 0 {
            acc += col;
        } else {
            acc -= col;
        }
    }
    acc.scale(lit::<T>(2.0) / T::pi())
}

/// Wigner function `W(alpha) = (2/pi) Tr[D^dagger(alpha) rho D(alpha) (-1)^n]`
/// on the given points, normalized so that `int W d^2 alpha = 1`.
pub fn wigner<T: Real>(rho: &TruncatedOperator<T>, grid: &[PhasePoint<T>]) -> Result<Vec<T>> {
    validate_density(rho)?;
    for a in grid {
        a.ensure_finite()?;
    }
    let entries = rho.entries();
    Ok(grid
        .par_iter()
        .map(|&a| wigner_point(entries, a).re)
        .collect())
}

/// One primitive of an analytic characteristic function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CharTerm<T: Real> {
    /// `weight * delta^2(alpha - location)`; evaluation returns the weight.
    DeltaPoint {
        location: PhasePoint<T>,
        weight: Complex<T>,
    },
    /// `weight * e^{-|alpha - center|^2 / (2 width^2)}`.
    GaussPeak {
        center: PhasePoint<T>,
        weight: Complex<T>,
        width: T,
    },
    /// `weight * delta(|alpha| - radius)`; evaluation returns the weight.
    Ring { radius: T, weight: Complex<T> },
}

/// Sum of characteristic-function primitives representing a Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticChar<T: Real> {
    terms: Vec<CharTerm<T>>,
}

fn close<T: Real>(a: Complex<T>, b: Complex<T>) -> bool {
    let scale = T::one().max(cabs(a)).max(cabs(b));
    cabs(a - b) <= lit::<T>(1e-12) * scale
}

impl<T: Real> AnalyticChar<T> {
    /// Validates `h^*(-alpha) = h(alpha)`: every term at `z` with weight `w`
    /// must be matched by a term at `-z` with weight `w^*`.
    pub fn new(terms: Vec<CharTerm<T>>) -> Result<Self> {
        for t in &terms {
            let ok = match *t {
                CharTerm::DeltaPoint { location, weight } => terms.iter().any(|u| {
                    matches!(*u, CharTerm::DeltaPoint { location: l, weight: w }
                        if close(l.value(), -location.value()) && close(w, weight.conj()))
                }),
                CharTerm::GaussPeak { center, weight, width } => {
                    width > T::zero()
                        && terms.iter().any(|u| {
                            matches!(*u, CharTerm::GaussPeak { center: c, weight: w, width: s }
                                if close(c.value(), -center.value()) && close(w, weight.conj())
                                    && close(Complex::new(s, T::zero()), Complex::new(width, T::zero())))
                        })
                }
                CharTerm::Ring { radius, weight } => radius >= T::zero() && close(weight, weight.conj()),
            };
            if !ok {
                return Err(Error::domain(format!(
                    "characteristic function is not Hermitian at term {t:?}"
                )));
            }
        }
        Ok(AnalyticChar { terms })
    }

    pub fn terms(&self) -> &[CharTerm<T>] {
        &self.terms
    }

    /// Passive GKP Hamiltonian: weight -1 deltas at `+-sqrt(2 pi)`, `+-i sqrt(2 pi)`.
    pub fn gkp_stabilizer() -> Self {
        let s = (lit::<T>(2.0) * T::pi()).sqrt();
        let w = Complex::new(-T::one(), T::zero());
        let pts = [
            PhasePoint::real(s),
            PhasePoint::real(-s),
            PhasePoint::imag(s),
            PhasePoint::imag(-s),
        ];
        AnalyticChar {
            terms: pts
                .into_iter()
                .map(|location| CharTerm::DeltaPoint {
                    location,
                    weight: w,
                })
                .collect(),
        }
    }

    /// Two-legged cat Hamiltonian (unit prefactor): peaks at `+-2 beta`.
    pub fn cat2(beta: PhasePoint<T>) -> Self {
        let w = Complex::new(-T::one(), T::zero());
        let c = beta * lit(2.0);
        AnalyticChar {
            terms: vec![
                CharTerm::GaussPeak {
                    center: c,
                    weight: w,
                    width: T::one(),
                },
                CharTerm::GaussPeak {
                    center: -c,
                    weight: w,
                    width: T::one(),
                },
            ],
        }
    }

    /// Four-legged cat Hamiltonian (unit prefactor): peaks at `+-2 beta`, `+-2 i beta`.
    pub fn cat4(beta: PhasePoint<T>) -> Self {
        let w = Complex::new(-T::one(), T::zero());
        let c = beta * lit(2.0);
        let ic = PhasePoint(c.value() * Complex::new(T::zero(), T::one()));
        AnalyticChar {
            terms: [c, -c, ic, -ic]
                .into_iter()
                .map(|center| CharTerm::GaussPeak {
                    center,
                    weight: w,
                    width: T::one(),
                })
                .collect(),
        }
    }

    /// Josephson-junction term: `-E_J/2` deltas at `+-i phi`.
    pub fn josephson(e_j: T, phi: T) -> Self {
        let w = Complex::new(-e_j / lit(2.0), T::zero());
        AnalyticChar {
            terms: vec![
                CharTerm::DeltaPoint {
                    location: PhasePoint::imag(phi),
                    weight: w,
                },
                CharTerm::DeltaPoint {
                    location: PhasePoint::imag(-phi),
                    weight: w,
                },
            ],
        }
    }

    /// Rotating-wave average of [`AnalyticChar::josephson`]: ring of radius
    /// `phi` with weight `-E_J` per unit time.
    pub fn josephson_rwa(e_j: T, phi: T) -> Self {
        AnalyticChar {
            terms: vec![CharTerm::Ring {
                radius: phi,
                weight: Complex::new(-e_j, T::zero()),
            }],
        }
    }

    /// Pointwise value; point and ring primitives contribute their weight when
    /// `alpha` lies within `tol` of their support.
    pub fn eval(&self, alpha: PhasePoint<T>, tol: T) -> Result<Complex<T>> {
        if !(tol > T::zero()) {
            return Err(Error::domain("matching tolerance must be positive"));
        }
        let half: T = lit(0.5);
        Ok(self.terms.iter().fold(czero(), |acc, t| match *t {
            CharTerm::DeltaPoint { location, weight } => {
                if (alpha - location).norm() < tol {
                    acc + weight
                } else {
                    acc
                }
            }
            CharTerm::GaussPeak {
                center,
                weight,
                width,
            } => {
                let r2 = (alpha - center).norm_sqr();
                acc + weight.scale((-half * r2 / (width * width)).exp())
            }
            CharTerm::Ring { radius, weight } => {
                if (alpha.norm() - radius).abs() < tol {
                    acc + weight
                } else {
                    acc
                }
            }
        }))
    }
}

/// Free-function form of [`AnalyticChar::eval`].
pub fn analytic_char_eval<T: Real>(
    h: &AnalyticChar<T>,
    alpha: PhasePoint<T>,
    tol: T,
) -> Result<Complex<T>> {
    h.eval(alpha, tol)
}
