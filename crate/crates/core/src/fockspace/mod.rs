//! Operators and states on a truncated Fock space.
//!
//! Every operator is a dense `cutoff x cutoff` complex matrix in the number
//! basis `|0>, .., |cutoff-1>`. Phase-space amplitudes follow the convention
//! `alpha = (q + i p) / sqrt(2)`, so `D(alpha)` translates the position
//! quadrature by `sqrt(2) Re(alpha)`.

mod displacement;
mod gkp;
mod operator;
mod phase;

pub use displacement::{displacement, displacement_block, laguerre};
pub use gkp::{
    gkp_codestate, magic_combination, magic_state, project_gkp, GkpProjection, LogicalBit,
    MagicSign, GKP_EDGE_TOLERANCE,
};
pub use operator::{annihilation, creation, number, parity, KetState, TruncatedOperator};
pub use phase::{symplectic_form, PhasePoint};

use crate::scalar::Real;

/// Heuristic truncation-reliability test shared by every displacing routine:
/// results are flagged once `|alpha|^2 > cutoff / 4`.
pub fn truncation_unreliable<T: Real>(alpha_norm_sqr: T, cutoff: usize) -> bool {
    alpha_norm_sqr > crate::scalar::from_usize::<T>(cutoff) / crate::scalar::lit(4.0)
}
