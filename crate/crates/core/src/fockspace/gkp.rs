use nalgebra::DVector;

use super::KetState;
use crate::error::{Error, Result};
use crate::scalar::{creal, from_usize, lit, Real};

/// Logical basis label of a GKP code state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalBit {
    Zero,
    One,
}

impl LogicalBit {
    fn offset(self) -> i64 {
        match self {
            LogicalBit::Zero => 0,
            LogicalBit::One => 1,
        }
    }
}

impl TryFrom<u8> for LogicalBit {
    type Error = Error;
    fn try_from(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(LogicalBit::Zero),
            1 => Ok(LogicalBit::One),
            _ => Err(Error::domain(format!(
                "logical bit must be 0 or 1, got {bit}"
            ))),
        }
    }
}

/// Which of the two magic states `|H+>`, `|H->`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MagicSign {
    Plus,
    Minus,
}

/// Fock-basis projection of an approximate GKP wavefunction together with
/// truncation diagnostics.
#[derive(Clone, Debug)]
pub struct GkpProjection<T: Real> {
    pub state: KetState<T>,
    /// `1 - sum_n |c_n|^2 / ||psi||^2` for the unnormalized projection.
    pub tail_mass: T,
    /// `max(|c_{cutoff-2}|, |c_{cutoff-1}|) / max_n |c_n|`; both edge levels
    /// enter because code states populate a single photon-number parity.
    pub edge_ratio: T,
}

/// Largest admissible edge ratio for [`gkp_codestate`].
pub const GKP_EDGE_TOLERANCE: f64 = 1e-6;

const PEAK_WEIGHT_FLOOR: f64 = 1e-12;
const RESCALE_ABOVE: f64 = 1e30;

fn peak_count(delta: f64) -> i64 {
    ((-PEAK_WEIGHT_FLOOR.ln()) / (2.0 * std::f64::consts::PI * delta * delta))
        .sqrt()
        .ceil() as i64
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::domain(format!(
            "squeezing parameter must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Projects the comb wavefunction
/// `psi(q) = sum_n e^{-2 Delta^2 pi n^2} e^{-(q - (2n + s) sqrt(pi))^2 / (2 Delta^2)}`
/// (`s` = 0 or 1) onto the first `cutoff` oscillator eigenfunctions by
/// trapezoidal quadrature on a uniform grid.
///
/// Never fails on truncation; the diagnostics are returned alongside the
/// normalized state.
pub fn project_gkp<T: Real>(bit: LogicalBit, delta: T, cutoff: usize) -> Result<GkpProjection<T>> {
    check_delta(delta)?;
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "GKP code state",
            got: cutoff,
            min: 2,
        });
    }
    let d = crate::scalar::to_f64(delta);
    let n_peak = peak_count(d);
    let sqrt_pi = T::pi().sqrt();
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    let s = bit.offset();
    let centers: Vec<(T, T)> = (-n_peak..=n_peak)
        .map(|n| {
            let nf: T = lit(n as f64);
            let q = lit::<T>((2 * n + s) as f64) * sqrt_pi;
            let w = (-two * delta * delta * T::pi() * nf * nf).exp();
            (q, w)
        })
        .collect();

    let q_max = centers
        .iter()
        .map(|(q, _)| q.abs())
        .fold(T::zero(), |a, b| a.max(b));
    let reach = q_max + lit::<T>(12.0) * delta;
    // Resolve both the narrowest peak and the fastest Hermite oscillation.
    let osc = T::one() / (two * from_usize::<T>(cutoff) + T::one()).sqrt();
    let step = delta.min(osc) / lit(4.0);
    let half_points = (crate::scalar::to_f64(reach / step)).ceil() as i64;

    let inv_two_d2 = T::one() / (two * delta * delta);
    let big: T = lit(RESCALE_ABOVE);
    let ln_big = big.ln();
    let quarter_ln_pi = T::pi().ln() / lit(4.0);
    let coeff_rec: Vec<(T, T)> = (0..cutoff)
        .map(|n| {
            let nf: T = from_usize(n);
            (
                (two / (nf + T::one())).sqrt(),
                (nf / (nf + T::one())).sqrt(),
            )
        })
        .collect();

    let mut coeffs = vec![T::zero(); cutoff];
    let mut psi_norm = T::zero();
    for i in -half_points..=half_points {
        let q = lit::<T>(i as f64) * step;
        let psi = centers.iter().fold(T::zero(), |acc, &(c, w)| {
            acc + w * (-(q - c) * (q - c) * inv_two_d2).exp()
        });
        if psi == T::zero() {
            continue;
        }
        // End points carry weight 1/2 but psi is negligible there.
        let weight = if i.abs() == half_points {
            half * step
        } else {
            step
        };
        psi_norm += weight * psi * psi;

        let mut log_scale = -half * q * q - quarter_ln_pi;
        let mut prev = T::zero();
        let mut cur = T::one();
        for (n, c) in coeffs.iter_mut().enumerate() {
            if n > 0 {
                let (a, b) = coeff_rec[n - 1];
                let next = a * q * cur - b * prev;
                prev = cur;
                cur = next;
                if cur.abs() > big {
                    cur /= big;
                    prev /= big;
                    log_scale += ln_big;
                }
            }
            *c += weight * psi * cur * log_scale.exp();
        }
    }

    let captured = coeffs.iter().fold(T::zero(), |a, &c| a + c * c);
    let tail_mass = (T::one() - captured / psi_norm).max(T::zero());
    let max = coeffs.iter().fold(T::zero(), |a, &c| a.max(c.abs()));
    let edge_ratio = coeffs[cutoff - 1].abs().max(coeffs[cutoff - 2].abs()) / max;
    let amps = DVector::from_iterator(cutoff, coeffs.into_iter().map(creal));
    Ok(GkpProjection {
        state: KetState::from_amplitudes(amps)?,
        tail_mass,
        edge_ratio,
    })
}

/// Approximate GKP code state `|0_Delta>` or `|1_Delta>` in the Fock basis.
///
/// Fails with a convergence error (diagnostic = tail mass) when the amplitude
/// at the last two Fock levels exceeds `1e-6` of the largest amplitude.
pub fn gkp_codestate<T: Real>(bit: LogicalBit, delta: T, cutoff: usize) -> Result<KetState<T>> {
    let proj = project_gkp(bit, delta, cutoff)?;
    if proj.edge_ratio > lit(GKP_EDGE_TOLERANCE) {
        return Err(Error::Convergence {
            what: format!("GKP state projection at cutoff {cutoff}"),
            diagnostic: crate::scalar::to_f64(proj.tail_mass),
        });
    }
    Ok(proj.state)
}

/// Combines two code states into `|H+> = cos(pi/8)|0> + sin(pi/8)|1>` or
/// `|H-> = -sin(pi/8)|0> + cos(pi/8)|1>`, renormalized.
pub fn magic_combination<T: Real>(
    sign: MagicSign,
    zero: &KetState<T>,
    one: &KetState<T>,
) -> Result<KetState<T>> {
    if zero.cutoff() != one.cutoff() {
        return Err(Error::DimensionMismatch {
            left: zero.cutoff(),
            right: one.cutoff(),
        });
    }
    let angle = T::pi() / lit(8.0);
    let (a, b) = match sign {
        MagicSign::Plus => (angle.cos(), angle.sin()),
        MagicSign::Minus => (-angle.sin(), angle.cos()),
    };
    let amps = zero.amplitudes().map(|z| z.scale(a)) + one.amplitudes().map(|z| z.scale(b));
    Ok(KetState::from_amplitudes(amps)?
        .with_warning(zero.truncation_warning() || one.truncation_warning()))
}

/// Approximate GKP magic state `|H+_Delta>` or `|H-_Delta>`.
pub fn magic_state<T: Real>(sign: MagicSign, delta: T, cutoff: usize) -> Result<KetState<T>> {
    let zero = gkp_codestate(LogicalBit::Zero, delta, cutoff)?;
    let one = gkp_codestate(LogicalBit::One, delta, cutoff)?;
    magic_combination(sign, &zero, &one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Closed-form overlap of two Gaussian combs: each pair of peaks at
    // distance d contributes w w' e^{-d^2 / (4 Delta^2)}.
    fn comb_overlap(delta: f64, s: i64, t: i64) -> f64 {
        let peaks = |off: i64| -> Vec<(f64, f64)> {
            (-12i64..=12)
                .map(|n| {
                    (
                        (2 * n + off) as f64 * PI.sqrt(),
                        (-2.0 * delta * delta * PI * (n * n) as f64).exp(),
                    )
                })
                .collect()
        };
        let raw = |a: i64, b: i64| -> f64 {
            let (pa, pb) = (peaks(a), peaks(b));
            pa.iter()
                .flat_map(|&(qa, wa)| {
                    pb.iter().map(move |&(qb, wb)| {
                        wa * wb * (-(qa - qb).powi(2) / (4.0 * delta * delta)).exp()
                    })
                })
                .sum()
        };
        raw(s, t) / (raw(s, s) * raw(t, t)).sqrt()
    }

    #[test]
    fn code_state_overlap_matches_comb_formula() {
        let z = gkp_codestate(LogicalBit::Zero, 0.3f64, 200).unwrap();
        let o = gkp_codestate(LogicalBit::One, 0.3f64, 200).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-8);
        let overlap = z.inner(&o).unwrap();
        let expected = comb_overlap(0.3, 0, 1);
        // neighbouring peaks of the two combs are sqrt(pi) apart
        assert!(expected > 1e-4 && expected < 1e-3);
        assert!(
            (overlap.re - expected).abs() < 1e-8,
            "{overlap} vs {expected}"
        );
        assert!(overlap.im.abs() < 1e-15);
    }

    #[test]
    fn code_states_become_orthogonal_with_squeezing() {
        let z = gkp_codestate(LogicalBit::Zero, 0.15f64, 600).unwrap();
        let o = gkp_codestate(LogicalBit::One, 0.15f64, 600).unwrap();
        assert!(z.inner(&o).unwrap().norm() < 1e-6);
    }

    #[test]
    fn zero_state_lives_on_even_photon_numbers() {
        let z = gkp_codestate(LogicalBit::Zero, 0.3f64, 200).unwrap();
        assert!(z.odd_mass() < 1e-4, "odd mass {}", z.odd_mass());
    }

    // Oracle: direct integration of the wavefunction against the n = 0 and
    // n = 2 eigenfunctions with a fine midpoint rule.
    #[test]
    fn low_amplitudes_match_direct_integration() {
        let delta = 0.3;
        let z = project_gkp(LogicalBit::Zero, delta, 120).unwrap();
        let psi = |q: f64| -> f64 {
            (-8..=8)
                .map(|n: i32| {
                    let c = 2.0 * n as f64 * PI.sqrt();
                    (-2.0 * delta * delta * PI * (n * n) as f64).exp()
                        * (-(q - c).powi(2) / (2.0 * delta * delta)).exp()
                })
                .sum()
        };
        let h0 = |q: f64| PI.powf(-0.25) * (-q * q / 2.0).exp();
        let h2 = |q: f64| PI.powf(-0.25) * (2.0 * q * q - 1.0) / 2f64.sqrt() * (-q * q / 2.0).exp();
        let (mut c0, mut c2, mut nrm) = (0.0, 0.0, 0.0);
        let dq = 1e-4;
        let mut q = -40.0 + dq / 2.0;
        while q < 40.0 {
            let p = psi(q);
            c0 += p * h0(q) * dq;
            c2 += p * h2(q) * dq;
            nrm += p * p * dq;
            q += dq;
        }
        let amps = z.state.amplitudes();
        assert!((amps[0].re - c0 / nrm.sqrt()).abs() < 1e-7);
        assert!((amps[2].re - c2 / nrm.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn tail_mass_decreases_with_cutoff() {
        let mut last = f64::INFINITY;
        for cutoff in [20, 40, 80, 160] {
            let p = project_gkp(LogicalBit::One, 0.3, cutoff).unwrap();
            assert!(p.tail_mass < last);
            last = p.tail_mass;
        }
    }

    #[test]
    fn small_cutoff_is_a_convergence_error() {
        match gkp_codestate(LogicalBit::Zero, 0.3, 30) {
            Err(Error::Convergence { diagnostic, .. }) => assert!(diagnostic > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn delta_out_of_range_is_rejected() {
        assert!(gkp_codestate(LogicalBit::Zero, 1.2, 100).is_err());
        assert!(gkp_codestate(LogicalBit::Zero, 0.0, 100).is_err());
        assert!(LogicalBit::try_from(2u8).is_err());
    }

    #[test]
    fn magic_states_are_orthonormal() {
        let p = magic_state(MagicSign::Plus, 0.3f64, 200).unwrap();
        let m = magic_state(MagicSign::Minus, 0.3, 200).unwrap();
        let z = gkp_codestate(LogicalBit::Zero, 0.3f64, 200).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-8);
        // <H+|H-> = cos(pi/4) <0|1> / (norms), which vanishes with the comb overlap
        let leak = (PI / 4.0).cos() * comb_overlap(0.3, 0, 1);
        assert!((p.inner(&m).unwrap().re - leak).abs() < 1e-6);
        let p15 = magic_state(MagicSign::Plus, 0.15f64, 600).unwrap();
        let m15 = magic_state(MagicSign::Minus, 0.15f64, 600).unwrap();
        assert!(p15.inner(&m15).unwrap().norm() < 1e-6);
        assert!((z.inner(&p).unwrap().re - (PI / 8.0).cos()).abs() < 1e-3);
    }

    #[test]
    fn single_precision_projection() {
        let z = project_gkp::<f32>(LogicalBit::Zero, 0.4, 100).unwrap();
        assert!((z.state.norm() - 1.0).abs() < 1e-5);
        assert!(z.state.odd_mass() < 1e-3);
    }
}
