//! Completely positive maps on the truncated Fock space: Kraus lists,
//! chi-function evaluators, photon loss and finite squeezing.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::charfunc::char_with_block;
use crate::error::{Error, Result};
use crate::fockspace::{displacement_block, PhasePoint, TruncatedOperator};
use crate::scalar::{cexp, czero, from_usize, lit, log_factorials, Real};

/// Completeness threshold for [`photon_loss_kraus`].
pub const LOSS_COMPLETENESS_TOLERANCE: f64 = 1e-8;
/// Completeness threshold for a generic trace-preserving [`KrausChannel`].
pub const TP_COMPLETENESS_TOLERANCE: f64 = 1e-6;

/// A CP map given by Kraus operators on a shared cutoff.
#[derive(Clone, Debug)]
pub struct KrausChannel<T: Real> {
    kraus_ops: Vec<TruncatedOperator<T>>,
    label: String,
}

impl<T: Real> KrausChannel<T> {
    pub fn new(kraus_ops: Vec<TruncatedOperator<T>>, label: impl Into<String>) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::domain("a channel needs at least one Kraus operator"))?;
        let c = first.cutoff();
        if let Some(bad) = kraus_ops.iter().find(|e| e.cutoff() != c) {
            return Err(Error::DimensionMismatch {
                left: c,
                right: bad.cutoff(),
            });
        }
        Ok(KrausChannel {
            kraus_ops,
            label: label.into(),
        })
    }

    pub fn identity(cutoff: usize) -> Self {
        KrausChannel {
            kraus_ops: vec![TruncatedOperator::identity(cutoff)],
            label: "identity".into(),
        }
    }

    pub fn kraus_ops(&self) -> &[TruncatedOperator<T>] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cutoff(&self) -> usize {
        self.kraus_ops[0].cutoff()
    }

    pub fn truncation_warning(&self) -> bool {
        self.kraus_ops.iter().any(|e| e.truncation_warning())
    }

    /// `sum_l E_l^dagger E_l`.
    pub fn completeness(&self) -> TruncatedOperator<T> {
        let c = self.cutoff();
        let mut acc = nalgebra::DMatrix::from_element(c, c, czero());
        for e in &self.kraus_ops {
            acc += e.entries().adjoint() * e.entries();
        }
        TruncatedOperator::from_matrix(acc).expect("square")
    }

    /// `max |sum E^dagger E - I|` on the top-left `cutoff/2` block.
    pub fn completeness_defect(&self) -> T {
        self.completeness().identity_defect(self.cutoff() / 2)
    }

    pub fn ensure_trace_preserving(&self) -> Result<()> {
        let defect = self.completeness_defect();
        if defect > lit(TP_COMPLETENESS_TOLERANCE) {
            return Err(Error::InvalidState(format!(
                "channel '{}' is not trace preserving (defect {defect:e})",
                self.label
            )));
        }
        Ok(())
    }
}

/// `sum_l E_l rho E_l^dagger`.
pub fn apply_channel<T: Real>(
    ch: &KrausChannel<T>,
    rho: &TruncatedOperator<T>,
) -> Result<TruncatedOperator<T>> {
    if rho.cutoff() != ch.cutoff() {
        return Err(Error::DimensionMismatch {
            left: ch.cutoff(),
            right: rho.cutoff(),
        });
    }
    let c = rho.cutoff();
    let mut acc = nalgebra::DMatrix::from_element(c, c, czero());
    for e in ch.kraus_ops() {
        acc += e.entries() * rho.entries() * e.entries().adjoint();
    }
    Ok(TruncatedOperator::from_matrix(acc)?
        .with_warning(rho.truncation_warning() || ch.truncation_warning()))
}

/// Loss strength `gamma` and the effective parameter `gamma_bar = 1 / (1 - sqrt(1 - gamma))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParams<T: Real> {
    gamma: T,
    gamma_bar: T,
}

impl<T: Real> LossParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::domain(format!(
                "loss parameter must lie in (0, 1), got {gamma}"
            )));
        }
        // (1 + sqrt(1 - g)) / g avoids the cancellation in 1 - sqrt(1 - g)
        let gamma_bar = (T::one() + (T::one() - gamma).sqrt()) / gamma;
        Ok(LossParams { gamma, gamma_bar })
    }

    /// `gamma = 1 - e^{-kappa t}`.
    pub fn from_rate(kappa: T, t: T) -> Result<Self> {
        Self::new(-((-kappa * t).exp_m1()))
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn gamma_bar(&self) -> T {
        self.gamma_bar
    }
}

/// Exponent of the `(1 - gamma)` damping factor in the loss Kraus operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossDamping {
    /// `(1 - gamma)^{n/2}`: trace preserving, reproduces the closed-form chi.
    HalfNumber,
    /// `(1 - gamma)^{n}`: not trace preserving for any `gamma > 0`.
    FullNumber,
}

// Nonzero element <n - l|E_l|n> = (g/(1-g))^{l/2} sqrt(n!/((n-l)! l!)) (1-g)^{p n}, n >= l.
fn loss_element<T: Real>(l: usize, n: usize, log_ratio: T, log_keep: T, power: T, lf: &[T]) -> T {
    let half = lit::<T>(0.5);
    let lt = from_usize::<T>(l);
    let nt = from_usize::<T>(n);
    (half * lt * log_ratio + half * (lf[n] - lf[n - l] - lf[l]) + power * nt * log_keep).exp()
}

fn loss_logs<T: Real>(gamma: T, cutoff: usize, damping: LossDamping) -> (T, T, T, Vec<T>) {
    let keep = T::one() - gamma;
    let power = match damping {
        LossDamping::HalfNumber => lit::<T>(0.5),
        LossDamping::FullNumber => T::one(),
    };
    (
        (gamma / keep).ln(),
        keep.ln(),
        power,
        log_factorials::<T>(cutoff),
    )
}

/// `E_l = (gamma/(1-gamma))^{l/2} a^l / sqrt(l!) (1-gamma)^{p n}` for
/// `l = 0..=l_max` with `p` set by `damping`; no completeness check.
pub fn photon_loss_operators<T: Real>(
    gamma: T,
    l_max: usize,
    cutoff: usize,
    damping: LossDamping,
) -> Result<Vec<TruncatedOperator<T>>> {
    LossParams::new(gamma)?;
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "photon-loss channel",
            got: cutoff,
            min: 2,
        });
    }
    let (log_ratio, log_keep, power, lf) = loss_logs(gamma, cutoff, damping);
    let l_max = l_max.min(cutoff - 1);
    Ok((0..=l_max)
        .map(|l| {
            let mut m = nalgebra::DMatrix::from_element(cutoff, cutoff, czero::<T>());
            for n in l..cutoff {
                m[(n - l, n)] = Complex::new(
                    loss_element(l, n, log_ratio, log_keep, power, &lf),
                    T::zero(),
                );
            }
            TruncatedOperator::from_matrix(m).expect("square")
        })
        .collect())
}

// Diagonal of sum_{l <= l_max} E_l^dagger E_l (the sum is diagonal in the Fock basis).
fn loss_completeness_defects<T: Real>(gamma: T, cutoff: usize) -> Vec<T> {
    let (log_ratio, log_keep, power, lf) = loss_logs(gamma, cutoff, LossDamping::HalfNumber);
    let half = cutoff / 2;
    let mut diag = vec![T::zero(); half];
    let mut defects = Vec::with_capacity(cutoff);
    for l in 0..cutoff {
        for (n, d) in diag.iter_mut().enumerate().skip(l) {
            let e = loss_element(l, n, log_ratio, log_keep, power, &lf);
            *d += e * e;
        }
        defects.push(
            diag.iter()
                .fold(T::zero(), |acc, &d| acc.max((d - T::one()).abs())),
        );
    }
    defects
}

/// Trace-preserving photon-loss channel with `l = 0..=l_max`; fails when the
/// completeness defect on the top-left `cutoff/2` block exceeds 1e-8.
pub fn photon_loss_kraus<T: Real>(
    gamma: T,
    l_max: usize,
    cutoff: usize,
) -> Result<KrausChannel<T>> {
    LossParams::new(gamma)?;
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "photon-loss channel",
            got: cutoff,
            min: 2,
        });
    }
    let l_max = l_max.min(cutoff - 1);
    let defect = loss_completeness_defects(gamma, cutoff)[l_max];
    if defect > lit(LOSS_COMPLETENESS_TOLERANCE) {
        return Err(Error::Convergence {
            what: format!("photon-loss Kraus set with l_max={l_max}"),
            diagnostic: crate::scalar::to_f64(defect),
        });
    }
    let ops = photon_loss_operators(gamma, l_max, cutoff, LossDamping::HalfNumber)?;
    KrausChannel::new(ops, format!("photon loss gamma={gamma}"))
}

/// Smallest `l_max` meeting the completeness threshold (at most `cutoff - 1`).
pub fn photon_loss_kraus_auto<T: Real>(gamma: T, cutoff: usize) -> Result<KrausChannel<T>> {
    LossParams::new(gamma)?;
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "photon-loss channel",
            got: cutoff,
            min: 2,
        });
    }
    let defects = loss_completeness_defects(gamma, cutoff);
    let l_max = defects
        .iter()
        .position(|&d| d <= lit(LOSS_COMPLETENESS_TOLERANCE))
        .unwrap_or(cutoff - 1);
    photon_loss_kraus(gamma, l_max, cutoff)
}

/// How a chi evaluator was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiKind {
    ClosedForm,
    KrausDerived,
}

type ChiFn<T> = dyn Fn(PhasePoint<T>, PhasePoint<T>) -> Complex<T> + Send + Sync;

/// Pointwise-callable chi function `c(alpha, beta)` of a channel.
#[derive(Clone)]
pub struct ChiEvaluator<T: Real> {
    kind: ChiKind,
    eval: Arc<ChiFn<T>>,
    reliable_norm_sqr: Option<T>,
}

impl<T: Real> fmt::Debug for ChiEvaluator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChiEvaluator")
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ChiEvaluator<T> {
    pub fn new<F>(kind: ChiKind, f: F) -> Self
    where
        F: Fn(PhasePoint<T>, PhasePoint<T>) -> Complex<T> + Send + Sync + 'static,
    {
        ChiEvaluator {
            kind,
            eval: Arc::new(f),
            reliable_norm_sqr: None,
        }
    }

    pub fn kind(&self) -> ChiKind {
        self.kind
    }

    pub fn eval(&self, alpha: PhasePoint<T>, beta: PhasePoint<T>) -> Complex<T> {
        (self.eval)(alpha, beta)
    }

    /// True when a Kraus-derived value at `(alpha, beta)` relies on
    /// displacements beyond the truncation-reliability limit.
    pub fn truncation_warning(&self, alpha: PhasePoint<T>, beta: PhasePoint<T>) -> bool {
        match self.reliable_norm_sqr {
            Some(limit) => alpha.norm_sqr().max(beta.norm_sqr()) > limit,
            None => false,
        }
    }

    /// Multiplies the evaluator pointwise by `g(alpha, beta)`.
    pub fn modulate<G>(&self, g: G) -> Self
    where
        G: Fn(PhasePoint<T>, PhasePoint<T>) -> T + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        ChiEvaluator {
            kind: self.kind,
            eval: Arc::new(move |a, b| inner(a, b).scale(g(a, b))),
            reliable_norm_sqr: self.reliable_norm_sqr,
        }
    }
}

/// Closed-form photon-loss chi `(gamma_bar/pi)^2 <beta|alpha>^{2 gamma_bar - 1}`.
pub fn photon_loss_chi<T: Real>(params: LossParams<T>) -> ChiEvaluator<T> {
    let gb = params.gamma_bar();
    let scale = (gb / T::pi()) * (gb / T::pi());
    let power = lit::<T>(2.0) * gb - T::one();
    ChiEvaluator::new(
        ChiKind::ClosedForm,
        move |a: PhasePoint<T>, b: PhasePoint<T>| {
            // ln <beta|alpha> = -(|alpha|^2 + |beta|^2 - 2 beta^* alpha) / 2
            let log_overlap = (b.value().conj() * a.value()).scale(lit(2.0))
                - Complex::new(a.norm_sqr() + b.norm_sqr(), T::zero());
            cexp(log_overlap.scale(lit::<T>(0.5) * power)).scale(scale)
        },
    )
}

/// `c(alpha, beta) = pi^{-2} sum_l Tr[D^dagger(alpha) E_l] Tr[D^dagger(beta) E_l]^*`.
pub fn chi_from_kraus<T: Real>(ch: &KrausChannel<T>) -> ChiEvaluator<T> {
    let ops: Vec<_> = ch.kraus_ops().iter().map(|e| e.entries().clone()).collect();
    let c = ch.cutoff();
    let coeffs = move |x: PhasePoint<T>| -> Vec<Complex<T>> {
        let d = displacement_block(x, c, c);
        ops.iter().map(|e| char_with_block(e, &d)).collect()
    };
    let pi2 = T::pi() * T::pi();
    let mut out = ChiEvaluator::new(
        ChiKind::KrausDerived,
        move |a: PhasePoint<T>, b: PhasePoint<T>| {
            let ca = coeffs(a);
            let cb = if a == b { ca.clone() } else { coeffs(b) };
            ca.iter()
                .zip(&cb)
                .fold(czero(), |acc, (x, y)| acc + x * y.conj())
                .unscale(pi2)
        },
    );
    let limit = from_usize::<T>(c) / lit(4.0);
    out.reliable_norm_sqr = Some(if ch.truncation_warning() {
        -T::one()
    } else {
        limit
    });
    out
}

/// Chi function of the coherent finite-squeezing map:
/// `(pi Delta^2)^{-1} e^{-|alpha|^2/Delta^2} e^{-|beta|^2/Delta^2}`.
pub fn finite_squeezing_chi<T: Real>(delta: T) -> Result<ChiEvaluator<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::domain(format!(
            "squeezing parameter must be positive, got {delta}"
        )));
    }
    let d2 = delta * delta;
    let pref = T::one() / (T::pi() * d2);
    Ok(ChiEvaluator::new(
        ChiKind::ClosedForm,
        move |a: PhasePoint<T>, b: PhasePoint<T>| {
            Complex::new(
                pref * (-(a.norm_sqr() + b.norm_sqr()) / d2).exp(),
                T::zero(),
            )
        },
    ))
}
