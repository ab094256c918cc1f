//! GKP displacement twirling, bosonic chi-functions and bang-bang
//! dynamical-decoupling Hamiltonian engineering on a truncated Fock space.
//!
//! Numerical routines are generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the common double-precision instances.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod charfunc;
pub mod cli;
pub mod ddseq;
pub mod engineering;
pub mod error;
pub mod fockspace;
pub mod formats;
pub mod linalg;
pub mod scalar;
pub mod twirl;

pub use error::{Error, Result};

pub type PhasePoint = fockspace::PhasePoint<f64>;
pub type Operator = fockspace::TruncatedOperator<f64>;
pub type Ket = fockspace::KetState<f64>;
pub type Channel = channels::KrausChannel<f64>;
pub type Chi = channels::ChiEvaluator<f64>;
pub type Measure = twirl::TwirlMeasure<f64>;
pub type Schedule = ddseq::PulseSchedule<f64>;
pub type Spectrum = engineering::SpectrumReport<f64>;

pub type PhasePoint32 = fockspace::PhasePoint<f32>;
pub type Operator32 = fockspace::TruncatedOperator<f32>;
pub type Ket32 = fockspace::KetState<f32>;
pub type Schedule32 = ddseq::PulseSchedule<f32>;
