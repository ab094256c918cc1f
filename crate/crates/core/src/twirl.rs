//! Displacement twirls: recompiled N-level measures, their filter functions,
//! and state/channel twirls at chi-function and matrix level.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::channels::{ChiEvaluator, KrausChannel};
use crate::error::{Error, Result};
use crate::fockspace::{displacement_block, truncation_unreliable, PhasePoint, TruncatedOperator};
use crate::scalar::{czero, from_usize, lit, Real};

/// Which lattice a twirl shifts by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwirlVariant {
    /// Shifts `(n + i m) sqrt(pi/2)`: projects onto logical Paulis.
    Logical,
    /// Shifts `(n + i m) sqrt(2 pi)`: keeps the logical information.
    Stabilizer,
}

impl TwirlVariant {
    /// Lattice spacing of the twirl atoms.
    pub fn shift_unit<T: Real>(self) -> T {
        match self {
            TwirlVariant::Logical => (T::pi() / lit(2.0)).sqrt(),
            TwirlVariant::Stabilizer => (lit::<T>(2.0) * T::pi()).sqrt(),
        }
    }
}

/// The filter applied by an N-level twirl.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FilterKind {
    pub variant: TwirlVariant,
    pub level: u32,
}

impl FilterKind {
    pub fn new(variant: TwirlVariant, level: u32) -> Result<Self> {
        if level < 1 {
            return Err(Error::domain("twirl level must be at least 1"));
        }
        Ok(FilterKind { variant, level })
    }

    pub fn logical(level: u32) -> Result<Self> {
        Self::new(TwirlVariant::Logical, level)
    }

    pub fn stabilizer(level: u32) -> Result<Self> {
        Self::new(TwirlVariant::Stabilizer, level)
    }
}

/// One lattice site `(n, m)` of a measure with exact weight `numerator / 16^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureAtom {
    pub n: i64,
    pub m: i64,
    pub numerator: BigUint,
}

/// The N-step random-walk measure on `{(n + i m) u : |n|, |m| <= N}` with
/// weight `C(2N, n+N) C(2N, m+N) / 16^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwirlMeasure<T: Real> {
    atoms: Vec<MeasureAtom>,
    denominator: BigUint,
    level: u32,
    variant: TwirlVariant,
    shift_unit: T,
}

fn binomial_row(k: u64) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for _ in 0..k {
        let mut next = vec![BigUint::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row
}

/// Builds the N-level twirl measure; atoms are ordered by `n`, then `m`.
pub fn twirl_measure<T: Real>(level: u32, variant: TwirlVariant) -> Result<TwirlMeasure<T>> {
    if level < 1 {
        return Err(Error::domain("twirl level must be at least 1"));
    }
    let big_n = level as i64;
    let row = binomial_row(2 * level as u64);
    let mut atoms = Vec::with_capacity(row.len() * row.len());
    for n in -big_n..=big_n {
        for m in -big_n..=big_n {
            atoms.push(MeasureAtom {
                n,
                m,
                numerator: &row[(n + big_n) as usize] * &row[(m + big_n) as usize],
            });
        }
    }
    Ok(TwirlMeasure {
        atoms,
        denominator: BigUint::from(16u32).pow(level),
        level,
        variant,
        shift_unit: variant.shift_unit(),
    })
}

impl<T: Real> TwirlMeasure<T> {
    /// Assembles a measure from explicit atoms (used for custom or single-atom twirls).
    pub fn from_atoms(
        atoms: Vec<MeasureAtom>,
        denominator: BigUint,
        variant: TwirlVariant,
    ) -> Result<Self> {
        let total = atoms
            .iter()
            .fold(BigUint::zero(), |acc, a| acc + &a.numerator);
        if total != denominator || atoms.is_empty() {
            return Err(Error::domain("measure weights must sum to one"));
        }
        let level = atoms
            .iter()
            .map(|a| a.n.unsigned_abs().max(a.m.unsigned_abs()))
            .max()
            .unwrap_or(0) as u32;
        Ok(TwirlMeasure {
            atoms,
            denominator,
            level,
            variant,
            shift_unit: variant.shift_unit(),
        })
    }

    /// The point mass at the origin.
    pub fn trivial(variant: TwirlVariant) -> Self {
        TwirlMeasure {
            atoms: vec![MeasureAtom {
                n: 0,
                m: 0,
                numerator: BigUint::one(),
            }],
            denominator: BigUint::one(),
            level: 0,
            variant,
            shift_unit: variant.shift_unit(),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn variant(&self) -> TwirlVariant {
        self.variant
    }

    pub fn shift_unit(&self) -> T {
        self.shift_unit
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn exact_atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Exact weight of the lattice site `(n, m)` (zero off the support).
    pub fn weight_exact(&self, n: i64, m: i64) -> BigRational {
        self.atoms
            .iter()
            .find(|a| a.n == n && a.m == m)
            .map(|a| BigRational::new(a.numerator.clone().into(), self.denominator.clone().into()))
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_exact(&self) -> BigRational {
        let num = self
            .atoms
            .iter()
            .fold(BigUint::zero(), |acc, a| acc + &a.numerator);
        BigRational::new(num.into(), self.denominator.clone().into())
    }

    /// `(n + i m) * shift_unit`.
    pub fn point(&self, n: i64, m: i64) -> PhasePoint<T> {
        PhasePoint::new(
            lit::<T>(n as f64) * self.shift_unit,
            lit::<T>(m as f64) * self.shift_unit,
        )
    }

    /// Atoms with floating-point weights.
    pub fn atoms(&self) -> Vec<(PhasePoint<T>, T)> {
        let den = self.denominator.to_f64().unwrap_or(f64::INFINITY);
        self.atoms
            .iter()
            .map(|a| {
                (
                    self.point(a.n, a.m),
                    lit(a.numerator.to_f64().unwrap_or(f64::INFINITY) / den),
                )
            })
            .collect()
    }

    /// `max |gamma|^2` over the support.
    pub fn max_norm_sqr(&self) -> T {
        self.atoms
            .iter()
            .map(|a| self.point(a.n, a.m).norm_sqr())
            .fold(T::zero(), |x, y| x.max(y))
    }

    /// `sum_gamma w |gamma|^2`.
    pub fn second_moment(&self) -> T {
        self.atoms()
            .iter()
            .fold(T::zero(), |acc, (g, w)| acc + *w * g.norm_sqr())
    }

    /// `sum_gamma w e^{omega(delta, gamma)}`.
    pub fn phase_average(&self, delta: PhasePoint<T>) -> Complex<T> {
        self.atoms().iter().fold(czero(), |acc, (g, w)| {
            let om = crate::fockspace::symplectic_form(delta, *g);
            acc + crate::scalar::cexp(om).scale(*w)
        })
    }
}

/// Largest level whose measure stays within `max |gamma|^2 <= cutoff / 4`.
pub fn max_safe_level(cutoff: usize, variant: TwirlVariant) -> u32 {
    // max |gamma|^2 = 2 N^2 u^2
    let u2 = variant.shift_unit::<f64>().powi(2);
    ((cutoff as f64 / 4.0 / (2.0 * u2)).sqrt()).floor() as u32
}

/// `[1/4 (1 + cos(s Re delta)) (1 + cos(s Im delta))]^N` with `s = sqrt(2 pi)`
/// (logical) or `2 sqrt(2 pi)` (stabilizer).
pub fn filter_value<T: Real>(delta: PhasePoint<T>, kind: FilterKind) -> T {
    let s = lit::<T>(2.0) * kind.variant.shift_unit::<T>();
    let quarter: T = lit(0.25);
    let base = quarter * (T::one() + (s * delta.re()).cos()) * (T::one() + (s * delta.im()).cos());
    base.powi(kind.level as i32)
}

/// `c'(alpha, beta) = c(alpha, beta) * filter(alpha - beta)`.
pub fn twirl_chi<T: Real>(chi: &ChiEvaluator<T>, kind: FilterKind) -> ChiEvaluator<T> {
    chi.modulate(move |a, b| filter_value(a - b, kind))
}

fn displacement_blocks<T: Real>(
    measure: &TwirlMeasure<T>,
    cutoff: usize,
) -> Vec<(DMatrix<Complex<T>>, T)> {
    measure
        .atoms()
        .into_iter()
        .map(|(g, w)| (displacement_block(g, cutoff, cutoff), w))
        .collect()
}

/// `sum_gamma w D(gamma) rho D^dagger(gamma)`.
pub fn twirl_state_matrix<T: Real>(
    rho: &TruncatedOperator<T>,
    measure: &TwirlMeasure<T>,
) -> Result<TruncatedOperator<T>> {
    let c = rho.cutoff();
    let mut acc = DMatrix::from_element(c, c, czero());
    for (d, w) in displacement_blocks(measure, c) {
        acc += (&d * rho.entries() * d.adjoint()).map(|z| z.scale(w));
    }
    let warn = truncation_unreliable(measure.max_norm_sqr(), c) || rho.truncation_warning();
    Ok(TruncatedOperator::from_matrix(acc)?.with_warning(warn))
}

/// `sum_gamma w D^dagger(gamma) N(D(gamma) rho D^dagger(gamma)) D(gamma)`.
pub fn twirl_channel_matrix<T: Real>(
    ch: &KrausChannel<T>,
    rho: &TruncatedOperator<T>,
    measure: &TwirlMeasure<T>,
) -> Result<TruncatedOperator<T>> {
    let c = rho.cutoff();
    if ch.cutoff() != c {
        return Err(Error::DimensionMismatch {
            left: ch.cutoff(),
            right: c,
        });
    }
    let mut acc = DMatrix::from_element(c, c, czero());
    for (d, w) in displacement_blocks(measure, c) {
        let shifted = &d * rho.entries() * d.adjoint();
        let mut out = DMatrix::from_element(c, c, czero());
        for e in ch.kraus_ops() {
            out += e.entries() * &shifted * e.entries().adjoint();
        }
        acc += (d.adjoint() * out * &d).map(|z| z.scale(w));
    }
    let warn = truncation_unreliable(measure.max_norm_sqr(), c)
        || rho.truncation_warning()
        || ch.truncation_warning();
    Ok(TruncatedOperator::from_matrix(acc)?.with_warning(warn))
}

/// Kraus set `{sqrt(w) D^dagger(gamma) E_l D(gamma)}` of the twirled channel.
pub fn twirled_kraus<T: Real>(
    ch: &KrausChannel<T>,
    measure: &TwirlMeasure<T>,
) -> Result<KrausChannel<T>> {
    let c = ch.cutoff();
    let warn = truncation_unreliable(measure.max_norm_sqr(), c);
    let mut ops = Vec::with_capacity(measure.len() * ch.kraus_ops().len());
    for (d, w) in displacement_blocks(measure, c) {
        let sw = w.sqrt();
        for e in ch.kraus_ops() {
            let m = (d.adjoint() * e.entries() * &d).map(|z| z.scale(sw));
            ops.push(
                TruncatedOperator::from_matrix(m)?.with_warning(warn || e.truncation_warning()),
            );
        }
    }
    KrausChannel::new(ops, format!("twirled {}", ch.label()))
}

/// Which photon-number figure of merit [`photon_gain`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainContext {
    /// Largest intermediate photon-number gain of a twirled channel, `pi N^2`.
    ChannelMax,
    /// Probability of the four extremal shifts, `2^{2 - 4N}`.
    ChannelExtremalProb,
    /// Average gain of a stabilizer state twirl, `2 pi N`.
    StateAvgStabilizer,
    /// Average gain of a logical state twirl, `pi N / 2`.
    StateAvgLogical,
}

pub fn photon_gain<T: Real>(level: u32, context: GainContext) -> Result<T> {
    if level < 1 {
        return Err(Error::domain("twirl level must be at least 1"));
    }
    let n = from_usize::<T>(level as usize);
    Ok(match context {
        GainContext::ChannelMax => T::pi() * n * n,
        GainContext::ChannelExtremalProb => lit::<T>(2.0).powi(2 - 4 * level as i32),
        GainContext::StateAvgStabilizer => lit::<T>(2.0) * T::pi() * n,
        GainContext::StateAvgLogical => T::pi() * n / lit(2.0),
    })
}

/// Exact `2^{2 - 4N}`.
pub fn extremal_probability_exact(level: u32) -> BigRational {
    BigRational::new(
        BigUint::from(4u32).into(),
        BigUint::from(16u32).pow(level).into(),
    )
}
