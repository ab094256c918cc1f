//! Circuit parameters, the rotating-wave substrate Hamiltonian, spectra of
//! the engineered average Hamiltonian and experimental timing bounds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;

use crate::charfunc::SqueezingReport;
use crate::ddseq::{pulse_schedule, PulseSchedule, ShiftSet};
use crate::error::{Error, Result};
use crate::fockspace::{
    displacement_block, laguerre, magic_state, KetState, MagicSign, PhasePoint, TruncatedOperator,
};
use crate::linalg::symmetric_eigh;
use crate::scalar::{cabs, cis, czero, from_usize, lit, to_f64, Real};

/// Planck constant in J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge in C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting resistance quantum `h / (2e)^2` in ohms.
pub const RESISTANCE_QUANTUM: f64 = PLANCK / (4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

/// Default factor encoding "much smaller than" in [`feasibility`].
pub const DEFAULT_FEASIBILITY_MARGIN: f64 = 10.0;

/// Number of low-lying states for which squeezing is reported.
pub const REPORTED_STATES: usize = 10;

/// LC oscillator with a Josephson junction, in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    pub inductance: f64,
    pub capacitance: f64,
    pub josephson_energy: f64,
    /// `(L C)^{-1/2}` in rad/s.
    pub osc_frequency: f64,
    /// `sqrt(L / C)` in ohms.
    pub impedance: f64,
    /// `sqrt(pi Z / R_Q)`.
    pub phi: f64,
}

pub fn circuit_params(
    inductance: f64,
    capacitance: f64,
    josephson_energy: f64,
) -> Result<CircuitParams> {
    for (name, v) in [
        ("inductance", inductance),
        ("capacitance", capacitance),
        ("Josephson energy", josephson_energy),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let impedance = (inductance / capacitance).sqrt();
    Ok(CircuitParams {
        inductance,
        capacitance,
        josephson_energy,
        osc_frequency: 1.0 / (inductance * capacitance).sqrt(),
        impedance,
        phi: (std::f64::consts::PI * impedance / RESISTANCE_QUANTUM).sqrt(),
    })
}

/// Rotating-wave Josephson Hamiltonian, diagonal with
/// `-E_J e^{-phi^2/2} L_n(phi^2)`.
pub fn substrate_hamiltonian<T: Real>(
    e_j: T,
    phi: T,
    cutoff: usize,
) -> Result<TruncatedOperator<T>> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "cutoff",
            got: cutoff,
            min: 2,
        });
    }
    if !(phi > T::zero()) || !phi.is_finite() {
        return Err(Error::domain("phi must be positive and finite"));
    }
    let x = phi * phi;
    let damp = (-x / lit(2.0)).exp();
    let diag = (0..cutoff)
        .map(|n| Ok(-e_j * damp * laguerre(n as i64, 0, x)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(TruncatedOperator::from_diagonal(&diag))
}

/// Josephson term `-E_J/2 (D(i phi) + D(-i phi))` averaged over `points`
/// equally spaced free-rotation angles. Reference for the rotating-wave form.
pub fn substrate_phase_average<T: Real>(
    e_j: T,
    phi: T,
    cutoff: usize,
    points: usize,
) -> Result<TruncatedOperator<T>> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "cutoff",
            got: cutoff,
            min: 2,
        });
    }
    if points == 0 {
        return Err(Error::domain("phase average needs at least one angle"));
    }
    let mut acc = DMatrix::from_element(cutoff, cutoff, czero());
    let two_pi = lit::<T>(2.0) * T::pi();
    for j in 0..points {
        let theta = two_pi * from_usize::<T>(j) / from_usize(points);
        let rot = PhasePoint(cis(theta));
        let a = PhasePoint::imag(phi);
        let b = PhasePoint::imag(-phi);
        let da = displacement_block(PhasePoint(a.value() * rot.value()), cutoff, cutoff);
        let db = displacement_block(PhasePoint(b.value() * rot.value()), cutoff, cutoff);
        acc += da + db;
    }
    let w = -e_j / (lit::<T>(2.0) * from_usize(points));
    TruncatedOperator::from_matrix(acc.map(|z| z.scale(w)))
}

/// Angular Fourier coefficients `f_k = (1/2pi) int f(theta) e^{i k theta} dtheta`,
/// `k = 0..=kmax`, of the schedule filter on the ring `|alpha| = phi`.
///
/// The filter is real and even in `theta` for every compiled schedule, so
/// only the real parts are kept.
pub fn ring_fourier_coefficients<T: Real>(sched: &PulseSchedule<T>, phi: T, kmax: usize) -> Vec<T> {
    // Each atom contributes e^{i r sin(.)} with r = 2 phi |Q|; Bessel tails
    // vanish beyond k ~ r + O(r^{1/3}).
    let r = 2.0 * to_f64(phi) * to_f64(sched.max_shift());
    let band = r + 10.0 * r.cbrt() + 40.0;
    let m = (2 * (kmax + band.ceil() as usize) + 8).next_multiple_of(8);
    let two_pi = lit::<T>(2.0) * T::pi();
    let samples: Vec<T> = (0..m)
        .into_par_iter()
        .map(|j| {
            let theta = two_pi * from_usize::<T>(j) / from_usize(m);
            sched.phase_average(PhasePoint::from_polar(phi, theta)).re
        })
        .collect();
    let mf: T = from_usize(m);
    (0..=kmax)
        .map(|k| {
            let mut acc = T::zero();
            for (j, &f) in samples.iter().enumerate() {
                let idx = (k * j) % m;
                acc += f * (two_pi * from_usize::<T>(idx) / mf).cos();
            }
            acc / mf
        })
        .collect()
}

/// Period of the angular support: gcd of the indices with non-negligible coefficient.
fn sector_count<T: Real>(coeffs: &[T]) -> usize {
    let scale = coeffs.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let floor = scale * lit(1e-13);
    let mut g = 0usize;
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        if c.abs() > floor {
            g = num_integer::gcd(g, k);
        }
    }
    g.max(1)
}

/// Real-symmetric matrix `<m|H_av|n> = -E_J f_{|m-n|} <m|D(phi)|n>` of the
/// averaged substrate, the exact operator truncated to `cutoff` levels.
fn ring_matrix<T: Real>(coeffs: &[T], e_j: T, phi: T, cutoff: usize) -> DMatrix<T> {
    let d = displacement_block(PhasePoint::real(phi), cutoff, cutoff);
    DMatrix::from_fn(cutoff, cutoff, |m, n| {
        let k = m.abs_diff(n);
        if k % 2 == 1 {
            return T::zero();
        }
        -e_j * coeffs[k] * d[(m, n)].re
    })
}

/// `sum_k tau_k D^dagger(Q_k) H_sub D(Q_k)` for the rotating-wave substrate,
/// assembled from its ring decomposition.
pub fn engineered_hamiltonian<T: Real>(
    sched: &PulseSchedule<T>,
    e_j: T,
    phi: T,
    cutoff: usize,
) -> Result<TruncatedOperator<T>> {
    check_spectrum_args(e_j, phi, cutoff)?;
    let coeffs = ring_fourier_coefficients(sched, phi, cutoff);
    let h = ring_matrix(&coeffs, e_j, phi, cutoff);
    TruncatedOperator::from_matrix(h.map(|v| Complex::new(v, T::zero())))
}

fn check_spectrum_args<T: Real>(e_j: T, phi: T, cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "cutoff",
            got: cutoff,
            min: 2,
        });
    }
    if !(phi > T::zero()) || !phi.is_finite() {
        return Err(Error::domain("phi must be positive and finite"));
    }
    if !(e_j > T::zero()) || !e_j.is_finite() {
        return Err(Error::domain("E_J must be positive and finite"));
    }
    Ok(())
}

/// Doubling rule for the spectrum cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffPolicy {
    pub initial: usize,
    pub max: usize,
    /// Largest accepted change of the lowest levels (in units of `E_J`) on doubling.
    pub tolerance: f64,
    pub tracked_levels: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy {
            initial: 150,
            max: 1200,
            tolerance: 1e-6,
            tracked_levels: 10,
        }
    }
}

impl CutoffPolicy {
    /// Fixed cutoff without a convergence check.
    pub fn fixed(cutoff: usize) -> Self {
        CutoffPolicy {
            initial: cutoff,
            max: cutoff,
            tolerance: f64::INFINITY,
            tracked_levels: 10,
        }
    }
}

/// Spectrum of an engineered average Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectrumReport<T: Real> {
    pub level: u32,
    pub shift_set: ShiftSet,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Photon-number residue class (`n mod sectors`) of each eigenvalue.
    pub sector_of: Vec<usize>,
    pub sectors: usize,
    pub ground_pair_splitting: T,
    pub gap: T,
    /// Squeezing of the lowest [`REPORTED_STATES`] eigenstates; `None` where
    /// the characteristic function vanishes.
    pub squeezing_reports: Vec<Option<SqueezingReport<T>>>,
    /// Two lowest eigenvectors in the Fock basis.
    pub ground_states: [KetState<T>; 2],
    pub cutoff_used: usize,
    pub converged: bool,
    /// Largest change of the tracked levels at the last doubling.
    pub convergence_change: f64,
}

impl<T: Real> SpectrumReport<T> {
    /// Mean of `Delta_q, Delta_p` over the ground pair.
    pub fn ground_delta(&self) -> Option<T> {
        let a = self.squeezing_reports.first()?.as_ref()?;
        let b = self.squeezing_reports.get(1)?.as_ref()?;
        Some((a.delta_q + a.delta_p + b.delta_q + b.delta_p) / lit(4.0))
    }
}

struct RawSpectrum<T: Real> {
    values: Vec<T>,
    sector_of: Vec<usize>,
    vectors: Vec<DVector<T>>,
    sectors: usize,
}

fn diagonalize<T: Real>(
    coeffs: &[T],
    e_j: T,
    phi: T,
    cutoff: usize,
    keep: usize,
) -> RawSpectrum<T> {
    let h = ring_matrix(coeffs, e_j, phi, cutoff);
    let g = sector_count(&coeffs[..cutoff.min(coeffs.len())]);
    let mut all: Vec<(T, usize, DVector<T>)> = Vec::new();
    for r in 0..g {
        let idx: Vec<usize> = (r..cutoff).step_by(g).collect();
        if idx.is_empty() {
            continue;
        }
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
        let (vals, vecs) = symmetric_eigh(&block);
        for (j, v) in vals.into_iter().enumerate() {
            let mut full = DVector::from_element(cutoff, T::zero());
            if j < keep {
                for (i, &n) in idx.iter().enumerate() {
                    full[n] = vecs[(i, j)];
                }
            }
            all.push((v, r, full));
        }
    }
    all.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut values = Vec::with_capacity(all.len());
    let mut sector_of = Vec::with_capacity(all.len());
    let mut vectors = Vec::new();
    for (i, (v, r, vec)) in all.into_iter().enumerate() {
        values.push(v);
        sector_of.push(r);
        if i < keep {
            vectors.push(vec);
        }
    }
    RawSpectrum {
        values,
        sector_of,
        vectors,
        sectors: g,
    }
}

fn squeezing_of<T: Real>(vectors: &[DVector<T>], phi_stab: T) -> Vec<Option<SqueezingReport<T>>> {
    let c = vectors.first().map_or(0, |v| v.len());
    let dq = displacement_block(PhasePoint::imag(phi_stab), c, c);
    let dp = displacement_block(PhasePoint::real(phi_stab), c, c);
    let expect = |d: &DMatrix<Complex<T>>, v: &DVector<T>| {
        let vc = v.map(|x| Complex::new(x, T::zero()));
        (vc.adjoint() * d.adjoint() * &vc)[(0, 0)]
    };
    vectors
        .iter()
        .map(|v| crate::charfunc::squeezing_from_char(expect(&dq, v), expect(&dp, v)).ok())
        .collect()
}

/// Spectrum of the average Hamiltonian of `sched` acting on the substrate
/// `-E_J e^{-phi^2/2} L_n(phi^2)`, with the cutoff doubled until the lowest
/// levels are stable.
///
/// The operator commutes with rotations by `2 pi / g` where `g` is the
/// angular period of the filter, so it is diagonalized per photon-number
/// residue class modulo `g`.
pub fn schedule_spectrum<T: Real>(
    sched: &PulseSchedule<T>,
    e_j: T,
    phi: T,
    policy: CutoffPolicy,
) -> Result<SpectrumReport<T>> {
    check_spectrum_args(e_j, phi, policy.initial)?;
    if policy.max < policy.initial {
        return Err(Error::domain("maximum cutoff is below the initial cutoff"));
    }
    let keep = REPORTED_STATES.max(2);
    let mut cutoff = policy.initial;
    let coeffs = ring_fourier_coefficients(sched, phi, policy.max);
    let mut current = diagonalize(&coeffs, e_j, phi, cutoff, keep);
    let mut change = f64::INFINITY;
    let mut converged = false;
    while cutoff * 2 <= policy.max {
        let next_cutoff = cutoff * 2;
        let next = diagonalize(&coeffs, e_j, phi, next_cutoff, keep);
        let tracked = policy
            .tracked_levels
            .min(current.values.len())
            .min(next.values.len());
        change = (0..tracked)
            .map(|i| to_f64((current.values[i] - next.values[i]).abs() / e_j))
            .fold(0.0, f64::max);
        current = next;
        cutoff = next_cutoff;
        if change < policy.tolerance {
            converged = true;
            break;
        }
    }
    if policy.tolerance.is_infinite() {
        converged = true;
        change = 0.0;
    }
    if current.values.len() < 3 {
        return Err(Error::InvalidDimension {
            what: "spectrum cutoff",
            got: cutoff,
            min: 3,
        });
    }
    let squeezing_reports = squeezing_of(&current.vectors, (lit::<T>(2.0) * T::pi()).sqrt());
    let to_ket = |v: &DVector<T>| KetState::from_amplitudes(v.map(|x| Complex::new(x, T::zero())));
    let ground_states = [to_ket(&current.vectors[0])?, to_ket(&current.vectors[1])?];
    let v = &current.values;
    Ok(SpectrumReport {
        level: sched.level(),
        shift_set: sched.shift_set(),
        ground_pair_splitting: v[1] - v[0],
        gap: v[2] - v[1],
        eigenvalues: current.values.clone(),
        sector_of: current.sector_of,
        sectors: current.sectors,
        squeezing_reports,
        ground_states,
        cutoff_used: cutoff,
        converged,
        convergence_change: change,
    })
}

/// Engineered GKP Hamiltonian spectrum: logical schedule of level `N` on the
/// `phi = sqrt(2 pi)` substrate.
///
/// Returns a convergence error when the policy's maximum cutoff is reached
/// without stabilizing the tracked levels.
pub fn engineered_spectrum<T: Real>(
    level: u32,
    e_j: T,
    policy: CutoffPolicy,
) -> Result<SpectrumReport<T>> {
    let report = engineered_spectrum_unchecked(level, e_j, policy)?;
    if !report.converged {
        return Err(Error::Convergence {
            what: format!(
                "engineered spectrum at N={level} (cutoff {})",
                report.cutoff_used
            ),
            diagnostic: report.convergence_change,
        });
    }
    Ok(report)
}

/// As [`engineered_spectrum`] but returns the last report even when not converged.
pub fn engineered_spectrum_unchecked<T: Real>(
    level: u32,
    e_j: T,
    policy: CutoffPolicy,
) -> Result<SpectrumReport<T>> {
    let sched = pulse_schedule::<T>(level, ShiftSet::Logical)?;
    schedule_spectrum(&sched, e_j, (lit::<T>(2.0) * T::pi()).sqrt(), policy)
}

/// Independent spectra for several levels, computed in parallel; results
/// are in input order and do not depend on the thread count.
pub fn spectrum_sweep<T: Real>(
    levels: &[u32],
    e_j: T,
    policy: CutoffPolicy,
) -> Vec<Result<SpectrumReport<T>>> {
    levels
        .par_iter()
        .map(|&n| engineered_spectrum_unchecked(n, e_j, policy))
        .collect()
}

/// Least-squares slope and `R^2` of `ln y` against `ln x`.
pub fn power_law_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<(T, T)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::domain("fit needs at least two points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > T::zero())) {
        return Err(Error::domain("power-law fit needs positive data"));
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let n: T = from_usize(xs.len());
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let sxx = lx.iter().fold(T::zero(), |a, &x| a + (x - mx) * (x - mx));
    let sxy = lx
        .iter()
        .zip(&ly)
        .fold(T::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let syy = ly.iter().fold(T::zero(), |a, &y| a + (y - my) * (y - my));
    if sxx == T::zero() {
        return Err(Error::domain(
            "degenerate fit: abscissae have zero variance",
        ));
    }
    let slope = sxy / sxx;
    let r2 = if syy == T::zero() {
        T::one()
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok((slope, r2))
}

/// Exponent and `R^2` of `Delta ~ N^e` over the given reports, using the
/// ground-pair mean of `Delta_q, Delta_p`.
pub fn squeezing_scaling_fit<T: Real>(reports: &[SpectrumReport<T>]) -> Result<(T, T)> {
    if reports.len() < 8 {
        return Err(Error::domain(format!(
            "scaling fit needs at least 8 spectra, got {}",
            reports.len()
        )));
    }
    let mut xs = Vec::with_capacity(reports.len());
    let mut ys = Vec::with_capacity(reports.len());
    for r in reports {
        let d = r.ground_delta().ok_or_else(|| {
            Error::domain(format!("ground squeezing unavailable at N={}", r.level))
        })?;
        xs.push(from_usize(r.level as usize));
        ys.push(d);
    }
    power_law_fit(&xs, &ys)
}

/// Best match of the ground pair with the approximate magic states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagicOverlap<T: Real> {
    pub best_delta: T,
    /// Weights of `|H+_Delta>` and `|H-_Delta>` inside the ground space.
    pub fidelities: (T, T),
}

/// Weight `<psi|P|psi>` of a state inside the span of the ground pair.
pub fn ground_space_weight<T: Real>(report: &SpectrumReport<T>, psi: &KetState<T>) -> Result<T> {
    let a = report.ground_states[0].inner(psi)?;
    let b = report.ground_states[1].inner(psi)?;
    Ok(a.norm_sqr() + b.norm_sqr())
}

/// Scans `delta_grid` for the magic-state width whose `|H+>`, `|H->` best
/// fit the ground space.
///
/// The ground-space projector is basis independent, so the optimization
/// over rotations of the (nearly) degenerate pair is exact: each fidelity is
/// `<H|P|H>`. The grid point maximizing the sum of both is returned.
pub fn magic_overlap<T: Real>(
    report: &SpectrumReport<T>,
    delta_grid: &[T],
) -> Result<MagicOverlap<T>> {
    if delta_grid.is_empty() {
        return Err(Error::domain("delta grid is empty"));
    }
    let cutoff = report.cutoff_used;
    let mut best: Option<MagicOverlap<T>> = None;
    for &delta in delta_grid {
        let plus = magic_state(MagicSign::Plus, delta, cutoff)?;
        let minus = magic_state(MagicSign::Minus, delta, cutoff)?;
        let f = (
            ground_space_weight(report, &plus)?,
            ground_space_weight(report, &minus)?,
        );
        let better = best.is_none_or(|b| f.0 + f.1 > b.fidelities.0 + b.fidelities.1);
        if better {
            best = Some(MagicOverlap {
                best_delta: delta,
                fidelities: f,
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Magnitude of the characteristic function of `op` on the lattice
/// `unit (n + i m)`, `|n|, |m| <= range`.
pub fn lattice_support<T: Real>(
    op: &TruncatedOperator<T>,
    unit: T,
    range: i64,
) -> Result<Vec<((i64, i64), T)>> {
    let mut out = Vec::new();
    for n in -range..=range {
        for m in -range..=range {
            let a = PhasePoint::new(unit * lit(n as f64), unit * lit(m as f64));
            out.push(((n, m), cabs(crate::charfunc::char_of_operator(op, a)?)));
        }
    }
    Ok(out)
}

/// Timing requirements for realizing the schedule of level `N`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FeasibilityReport {
    #[serde(rename = "N")]
    pub level: u32,
    /// Angular frequency in rad/s.
    pub osc_frequency: f64,
    /// `(2 pi / omega) 16^N`, the shortest period resolving the smallest dwell.
    pub t_c_min: f64,
    /// `(1/sqrt 2)(2 pi / omega)`, the scale a displacement pulse must undercut.
    pub t_x_bound: f64,
    pub margin: f64,
    pub t_x: f64,
    /// `T_X < T_X_bound / margin`.
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn feasible_at(&self, t_x: f64) -> bool {
        t_x < self.t_x_bound / self.margin
    }
}

pub fn feasibility(osc_frequency: f64, level: u32, t_x: f64) -> Result<FeasibilityReport> {
    feasibility_with_margin(osc_frequency, level, t_x, DEFAULT_FEASIBILITY_MARGIN)
}

pub fn feasibility_with_margin(
    osc_frequency: f64,
    level: u32,
    t_x: f64,
    margin: f64,
) -> Result<FeasibilityReport> {
    if !(osc_frequency > 0.0) || !osc_frequency.is_finite() {
        return Err(Error::domain("oscillator frequency must be positive"));
    }
    if level < 1 {
        return Err(Error::domain("twirl level must be at least 1"));
    }
    if !(t_x >= 0.0) || !t_x.is_finite() {
        return Err(Error::domain("pulse time must be non-negative"));
    }
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::domain("margin must be positive"));
    }
    let period = 2.0 * std::f64::consts::PI / osc_frequency;
    let mut report = FeasibilityReport {
        level,
        osc_frequency,
        t_c_min: period * 16f64.powi(level as i32),
        t_x_bound: period / std::f64::consts::SQRT_2,
        margin,
        t_x,
        feasible: false,
    };
    report.feasible = report.feasible_at(t_x);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddseq::average_hamiltonian;
    use std::f64::consts::PI;

    #[test]
    fn impedance_sets_phi() {
        let z = 2.0 * RESISTANCE_QUANTUM;
        // L/C = Z^2 with omega = 2 pi 5 GHz
        let omega = 2.0 * PI * 5e9;
        let p = circuit_params(z / omega, 1.0 / (z * omega), 1e-24).unwrap();
        assert!((p.impedance / z - 1.0).abs() < 1e-12);
        assert!((p.phi - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((p.osc_frequency / omega - 1.0).abs() < 1e-12);
        let h = circuit_params(z / 4.0 / omega, 4.0 / (z * omega), 1e-24).unwrap();
        assert!((h.phi - (PI / 2.0).sqrt()).abs() < 1e-12);
        let s = circuit_params(3.0 * p.inductance, 3.0 * p.capacitance, 1e-24).unwrap();
        assert!((s.impedance / p.impedance - 1.0).abs() < 1e-12);
        assert!((s.osc_frequency * 3.0 / p.osc_frequency - 1.0).abs() < 1e-12);
        assert!(circuit_params(0.0, 1.0, 1.0).is_err());
        assert!(circuit_params(1.0, -1.0, 1.0).is_err());
        assert!((RESISTANCE_QUANTUM - 6453.2).abs() < 0.1);
    }

    #[test]
    fn substrate_diagonal_values() {
        let h = substrate_hamiltonian(1.0f64, (2.0 * PI).sqrt(), 10).unwrap();
        let e = (-PI).exp();
        assert!((h.entries()[(0, 0)].re + e).abs() < 1e-15);
        assert!((h.entries()[(1, 1)].re + e * (1.0 - 2.0 * PI)).abs() < 1e-14);
        assert!((h.entries()[(1, 1)].re - 0.2284).abs() < 1e-4);
        assert!(substrate_hamiltonian(1.0f64, 0.0, 10).is_err());
        assert!(substrate_hamiltonian(1.0f64, 1.0, 1).is_err());
    }

    #[test]
    fn substrate_matches_phase_average() {
        let phi = (2.0 * PI).sqrt();
        let h = substrate_hamiltonian(1.0f64, phi, 60).unwrap();
        let avg = substrate_phase_average(1.0f64, phi, 60, 720).unwrap();
        assert!(h.max_abs_diff(&avg, 60) < 1e-10);
    }

    #[test]
    fn ring_coefficients_of_trivial_schedule() {
        let c = ring_fourier_coefficients(&PulseSchedule::<f64>::trivial(), 2.0, 12);
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
        let h =
            engineered_hamiltonian(&PulseSchedule::trivial(), 1.0, (2.0 * PI).sqrt(), 40).unwrap();
        let sub = substrate_hamiltonian(1.0, (2.0 * PI).sqrt(), 40).unwrap();
        assert!(h.max_abs_diff(&sub, 40) < 1e-12);
    }

    // The ring assembly must agree with the direct conjugation sum.
    #[test]
    fn ring_route_matches_matrix_route() {
        let phi = (2.0 * PI).sqrt();
        for (n, set) in [
            (1, ShiftSet::Logical),
            (2, ShiftSet::Logical),
            (1, ShiftSet::PauliZ),
        ] {
            let sched = pulse_schedule::<f64>(n, set).unwrap();
            let sub = substrate_hamiltonian(1.0, phi, 120).unwrap();
            let direct = average_hamiltonian(&sub, &sched).unwrap().projected();
            let ring = engineered_hamiltonian(&sched, 1.0, phi, 120).unwrap();
            assert!(ring.max_abs_diff(&direct, 40) < 1e-10, "N={n} {set:?}");
        }
    }

    #[test]
    fn logical_filter_has_fourfold_sectors() {
        let sched = pulse_schedule::<f64>(3, ShiftSet::Logical).unwrap();
        let c = ring_fourier_coefficients(&sched, (2.0 * PI).sqrt(), 64);
        assert_eq!(sector_count(&c), 4);
    }

    #[test]
    fn sector_split_matches_dense_eigenvalues() {
        let sched = pulse_schedule::<f64>(2, ShiftSet::Logical).unwrap();
        let phi = (2.0 * PI).sqrt();
        let r = schedule_spectrum(&sched, 1.0, phi, CutoffPolicy::fixed(80)).unwrap();
        let h = engineered_hamiltonian(&sched, 1.0, phi, 80).unwrap();
        let (dense, _) = crate::linalg::hermitian_eigh(h.entries());
        for (a, b) in r.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
        // eigenvector check
        let v = r.ground_states[0].amplitudes();
        let hv = h.entries() * v;
        let resid = (hv - v * Complex::new(r.eigenvalues[0], 0.0)).norm();
        assert!(resid < 1e-9);
    }

    #[test]
    fn spectrum_converges_and_is_order_invariant() {
        let r = engineered_spectrum::<f64>(4, 1.0, CutoffPolicy::default()).unwrap();
        assert!(r.converged);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let sched = pulse_schedule::<f64>(4, ShiftSet::Logical)
            .unwrap()
            .rotated(7);
        let s = schedule_spectrum(
            &sched,
            1.0,
            (2.0 * PI).sqrt(),
            CutoffPolicy::fixed(r.cutoff_used),
        )
        .unwrap();
        for i in 0..10 {
            assert!(
                (r.eigenvalues[i] - s.eigenvalues[i]).abs()
                    < 1e-8 * r.eigenvalues[i].abs().max(1e-3)
            );
        }
    }

    #[test]
    fn ground_states_are_stabilized() {
        let mut last = 0.0;
        for n in [2, 6, 10] {
            let r = engineered_spectrum::<f64>(n, 1.0, CutoffPolicy::default()).unwrap();
            let s = (2.0 * PI).sqrt();
            let mut stab = 0.0;
            for g in &r.ground_states {
                for a in [
                    PhasePoint::real(s),
                    PhasePoint::imag(s),
                    PhasePoint::real(-s),
                    PhasePoint::imag(-s),
                ] {
                    let v = crate::charfunc::char_of_ket(g, a).unwrap().re;
                    assert!(v > 0.0, "N={n}");
                    stab += v;
                }
            }
            assert!(stab > last);
            last = stab;
        }
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let xs: Vec<f64> = (8..=20).map(|n| n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-0.5)).collect();
        let (e, r2) = power_law_fit(&xs, &ys).unwrap();
        assert!((e + 0.5).abs() < 1e-10);
        assert!((r2 - 1.0).abs() < 1e-10);
        assert!(power_law_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
        assert!(power_law_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn magic_overlap_beats_fock_floor() {
        let r = engineered_spectrum::<f64>(10, 1.0, CutoffPolicy::default()).unwrap();
        let grid: Vec<f64> = (0..16).map(|i| 0.25 + 0.025 * i as f64).collect();
        let m = magic_overlap(&r, &grid).unwrap();
        let c = r.cutoff_used;
        let f0 = ground_space_weight(&r, &KetState::fock(0, c).unwrap()).unwrap();
        let f1 = ground_space_weight(&r, &KetState::fock(1, c).unwrap()).unwrap();
        assert!(
            m.fidelities.0 > f0 && m.fidelities.1 > f1,
            "{m:?} {f0} {f1}"
        );
        let d = r.squeezing_reports[0].unwrap();
        assert!(
            (m.best_delta - d.delta_q).abs() < 0.3 * d.delta_q,
            "{} vs {}",
            m.best_delta,
            d.delta_q
        );
        let low = engineered_spectrum::<f64>(1, 1.0, CutoffPolicy::default()).unwrap();
        let ml = magic_overlap(&low, &grid).unwrap();
        assert!(m.fidelities.0 + m.fidelities.1 > ml.fidelities.0 + ml.fidelities.1);
    }

    #[test]
    fn pauli_z_support_lies_on_one_axis() {
        let phi = (PI / 2.0).sqrt();
        let sched = pulse_schedule::<f64>(2, ShiftSet::PauliZ).unwrap();
        let h = engineered_hamiltonian(&sched, 1.0, phi, 80).unwrap();
        let scan = lattice_support(&h, phi, 2).unwrap();
        let at = |p: (i64, i64)| scan.iter().find(|(q, _)| *q == p).unwrap().1;
        let real_axis = at((1, 0)) + at((-1, 0));
        let imag_axis = at((0, 1)) + at((0, -1));
        assert!(
            real_axis.max(imag_axis) > 100.0 * real_axis.min(imag_axis),
            "{real_axis} {imag_axis}"
        );
        println!("pauli_z support: real axis {real_axis:.3e}, imaginary axis {imag_axis:.3e}");
    }

    #[test]
    fn feasibility_numbers() {
        let omega = 2.0 * PI * 5.26e9;
        let r = feasibility(omega, 1, 0.0).unwrap();
        assert!((r.t_x_bound * 1e9 - 0.1344).abs() < 1e-3);
        assert!((r.t_c_min * 1e9 - 3.042).abs() < 1e-3);
        assert!(r.feasible);
        assert!(!feasibility(omega, 1, 0.02e-9).unwrap().feasible);
        assert!(feasibility(omega, 1, 0.01e-9).unwrap().feasible);
        assert!(feasibility(-1.0, 1, 0.0).is_err());
        assert!(feasibility(omega, 0, 0.0).is_err());
    }

    #[test]
    fn single_precision_spectrum() {
        let r = engineered_spectrum_unchecked::<f32>(2, 1.0, CutoffPolicy::fixed(120)).unwrap();
        let d = engineered_spectrum_unchecked::<f64>(2, 1.0, CutoffPolicy::fixed(120)).unwrap();
        assert!((r.eigenvalues[0] as f64 - d.eigenvalues[0]).abs() < 1e-4);
    }
}
