//! Bang-bang periodic decoupling schedules compiled from twirl measures:
//! kings-graph control paths, pulse lists, the average Hamiltonian and the
//! exact stroboscopic propagator.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fockspace::{displacement_block, symplectic_form, PhasePoint, TruncatedOperator};
use crate::linalg::{hermitian_eigh, unitary_from_eigen, unitary_log};
use crate::scalar::{cabs, cexp, czero, lit, to_f64, Real};
use crate::twirl::{twirl_measure, TwirlVariant};

/// Kings graph on the `(2N+1) x (2N+1)` lattice `|n|, |m| <= N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlGraph {
    level: u32,
    vertices: Vec<(i64, i64)>,
    edges: Vec<(usize, usize)>,
}

fn king_adjacent(a: (i64, i64), b: (i64, i64)) -> bool {
    let dn = (a.0 - b.0).abs();
    let dm = (a.1 - b.1).abs();
    dn <= 1 && dm <= 1 && (dn, dm) != (0, 0)
}

pub fn control_graph(level: u32) -> Result<ControlGraph> {
    if level < 1 {
        return Err(Error::domain("control graph level must be at least 1"));
    }
    let n = level as i64;
    let vertices: Vec<(i64, i64)> = (-n..=n)
        .flat_map(|a| (-n..=n).map(move |b| (a, b)))
        .collect();
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if king_adjacent(vertices[i], vertices[j]) {
                edges.push((i, j));
            }
        }
    }
    Ok(ControlGraph {
        level,
        vertices,
        edges,
    })
}

impl ControlGraph {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: (i64, i64)) -> usize {
        self.vertices
            .iter()
            .filter(|&&u| king_adjacent(u, v))
            .count()
    }

    pub fn contains(&self, v: (i64, i64)) -> bool {
        let n = self.level as i64;
        v.0.abs() <= n && v.1.abs() <= n
    }

    pub fn is_edge(&self, a: (i64, i64), b: (i64, i64)) -> bool {
        self.contains(a) && self.contains(b) && king_adjacent(a, b)
    }
}

/// Explicit Hamiltonian cycle starting at `(0, 0)`.
///
/// On the `S x S` grid (`S = 2N + 1`, coordinates `x, y` in `0..S`): snake
/// through rows `0..S-2` over columns `1..S`, zigzag down the last two rows
/// from column `S-1` to column 1, step diagonally to `(0, S-1)` and climb
/// column 0 back to `(0, 0)`, which neighbours the start `(1, 0)`. The cycle
/// is then rotated to begin at the centre.
pub fn hamiltonian_cycle(g: &ControlGraph) -> Vec<(i64, i64)> {
    let s = 2 * g.level as i64 + 1;
    let mut path = Vec::with_capacity((s * s) as usize);
    for y in 0..s - 2 {
        if y % 2 == 0 {
            path.extend((1..s).map(|x| (x, y)));
        } else {
            path.extend((1..s).rev().map(|x| (x, y)));
        }
    }
    for (i, x) in (1..s).rev().enumerate() {
        if i % 2 == 0 {
            path.push((x, s - 2));
            path.push((x, s - 1));
        } else {
            path.push((x, s - 1));
            path.push((x, s - 2));
        }
    }
    path.extend((0..s).rev().map(|y| (0, y)));
    let c = g.level as i64;
    let start = path
        .iter()
        .position(|&v| v == (c, c))
        .expect("centre is on the grid");
    path.rotate_left(start);
    path.into_iter().map(|(x, y)| (x - c, y - c)).collect()
}

/// Lattice used for the accumulated displacements `Q_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftSet {
    /// `(n + i m) sqrt(pi/2)`
    Logical,
    /// `2 (n + i m) sqrt(pi/2)`
    Stabilizer,
    /// `(2n + i m) sqrt(pi/2)`
    PauliX,
    /// `(n + 2 i m) sqrt(pi/2)`
    PauliZ,
}

impl ShiftSet {
    pub fn name(self) -> &'static str {
        match self {
            ShiftSet::Logical => "logical",
            ShiftSet::Stabilizer => "stabilizer",
            ShiftSet::PauliX => "pauli_x",
            ShiftSet::PauliZ => "pauli_z",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logical" => Ok(ShiftSet::Logical),
            "stabilizer" => Ok(ShiftSet::Stabilizer),
            "pauli_x" => Ok(ShiftSet::PauliX),
            "pauli_z" => Ok(ShiftSet::PauliZ),
            other => Err(Error::domain(format!("unknown shift set '{other}'"))),
        }
    }

    /// Integer multipliers `(a, b)` so that `Q = (a n + i b m) sqrt(pi/2)`.
    fn scales(self) -> (i64, i64) {
        match self {
            ShiftSet::Logical => (1, 1),
            ShiftSet::Stabilizer => (2, 2),
            ShiftSet::PauliX => (2, 1),
            ShiftSet::PauliZ => (1, 2),
        }
    }

    pub fn point<T: Real>(self, n: i64, m: i64) -> PhasePoint<T> {
        let u = (T::pi() / lit(2.0)).sqrt();
        let (a, b) = self.scales();
        PhasePoint::new(lit::<T>((a * n) as f64) * u, lit::<T>((b * m) as f64) * u)
    }

    /// Largest pulse amplitude a king move can produce:
    /// `sqrt(a^2 + b^2) sqrt(pi/2)`, i.e. `sqrt(pi)` for the logical set.
    pub fn pulse_bound<T: Real>(self) -> T {
        let (a, b) = self.scales();
        (lit::<T>((a * a + b * b) as f64) * T::pi() / lit(2.0)).sqrt()
    }
}

/// One dwell period of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleEntry<T: Real> {
    /// Lattice label of the occupied vertex.
    pub vertex: (i64, i64),
    /// Accumulated displacement during the dwell.
    pub q: PhasePoint<T>,
    /// Pulse applied after the dwell, `Q_{k+1} - Q_k` (cyclically).
    pub p: PhasePoint<T>,
    /// Exact dwell fraction `tau_num / tau_den`.
    pub tau_num: BigUint,
    pub tau_den: BigUint,
}

impl<T: Real> ScheduleEntry<T> {
    pub fn tau(&self) -> T {
        lit(self.tau_num.to_f64().unwrap_or(f64::NAN) / self.tau_den.to_f64().unwrap_or(f64::NAN))
    }

    pub fn tau_exact(&self) -> BigRational {
        BigRational::new(self.tau_num.clone().into(), self.tau_den.clone().into())
    }
}

/// Periodic bang-bang schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule<T: Real> {
    level: u32,
    shift_set: ShiftSet,
    entries: Vec<ScheduleEntry<T>>,
    period: Option<T>,
}

/// Dwell fractions `P_X^N(n, m)` ordered along the Hamiltonian cycle.
pub fn pulse_schedule<T: Real>(level: u32, shift_set: ShiftSet) -> Result<PulseSchedule<T>> {
    let g = control_graph(level)?;
    let cycle = hamiltonian_cycle(&g);
    let measure = twirl_measure::<T>(level, TwirlVariant::Logical)?;
    let den = measure.denominator().clone();
    let n = level as i64;
    let side = 2 * n + 1;
    let weight = |v: (i64, i64)| {
        measure.exact_atoms()[((v.0 + n) * side + (v.1 + n)) as usize]
            .numerator
            .clone()
    };
    let qs: Vec<PhasePoint<T>> = cycle.iter().map(|&(a, b)| shift_set.point(a, b)).collect();
    let m = cycle.len();
    let entries = (0..m)
        .map(|k| ScheduleEntry {
            vertex: cycle[k],
            q: qs[k],
            p: qs[(k + 1) % m] - qs[k],
            tau_num: weight(cycle[k]),
            tau_den: den.clone(),
        })
        .collect();
    Ok(PulseSchedule {
        level,
        shift_set,
        entries,
        period: None,
    })
}

impl<T: Real> PulseSchedule<T> {
    /// Schedule from explicit `(Q_k, tau_k)` pairs; pulses close the cycle.
    pub fn from_dwells(
        dwells: Vec<(PhasePoint<T>, BigUint)>,
        denominator: BigUint,
        shift_set: ShiftSet,
    ) -> Result<Self> {
        if dwells.is_empty() {
            return Err(Error::domain("schedule needs at least one entry"));
        }
        let total = dwells.iter().fold(BigUint::zero(), |acc, (_, w)| acc + w);
        if total != denominator {
            return Err(Error::domain("dwell fractions must sum to one"));
        }
        let m = dwells.len();
        let entries = (0..m)
            .map(|k| ScheduleEntry {
                vertex: (0, 0),
                q: dwells[k].0,
                p: dwells[(k + 1) % m].0 - dwells[k].0,
                tau_num: dwells[k].1.clone(),
                tau_den: denominator.clone(),
            })
            .collect();
        Ok(PulseSchedule {
            level: 0,
            shift_set,
            entries,
            period: None,
        })
    }

    /// Single dwell at the origin: the identity schedule.
    pub fn trivial() -> Self {
        Self::from_dwells(
            vec![(PhasePoint::origin(), BigUint::from(1u32))],
            BigUint::from(1u32),
            ShiftSet::Logical,
        )
        .expect("valid")
    }

    pub fn with_period(mut self, period: T) -> Self {
        self.period = Some(period);
        self
    }

    pub fn period(&self) -> Option<T> {
        self.period
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn shift_set(&self) -> ShiftSet {
        self.shift_set
    }

    pub fn entries(&self) -> &[ScheduleEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_tau_exact(&self) -> BigRational {
        self.entries
            .iter()
            .fold(BigRational::zero(), |acc, e| acc + e.tau_exact())
    }

    /// Sum of all pulses; zero for a closed cycle.
    pub fn net_displacement(&self) -> PhasePoint<T> {
        self.entries
            .iter()
            .fold(PhasePoint::origin(), |acc, e| acc + e.p)
    }

    pub fn max_pulse(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.p.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn max_shift(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.q.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Same dwells, cycle started at position `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.entries.rotate_left(k % self.entries.len());
        out
    }

    /// `F(alpha) = sum_k tau_k e^{omega(alpha, Q_k)}`, the factor multiplying
    /// the characteristic function under averaging.
    pub fn phase_average(&self, alpha: PhasePoint<T>) -> Complex<T> {
        self.entries.iter().fold(czero(), |acc, e| {
            acc + cexp(symplectic_form(alpha, e.q)).scale(e.tau())
        })
    }
}

/// Leading-order average Hamiltonian `sum_k tau_k D^dagger(Q_k) H_0 D(Q_k)`.
///
/// The conjugated terms are formed exactly on an enlarged Fock space that
/// holds the displaced support of `H_0`, so the characteristic-function
/// identity `h_av(alpha) = h_0(alpha) F(alpha)` holds to rounding.
#[derive(Clone, Debug)]
pub struct AverageHamiltonian<T: Real> {
    embedded: TruncatedOperator<T>,
    input_cutoff: usize,
    order: u32,
}

impl<T: Real> AverageHamiltonian<T> {
    /// Operator on the enlarged space.
    pub fn embedded(&self) -> &TruncatedOperator<T> {
        &self.embedded
    }

    /// Top-left block with the cutoff of the input Hamiltonian.
    pub fn projected(&self) -> TruncatedOperator<T> {
        self.embedded.block(self.input_cutoff)
    }

    pub fn input_cutoff(&self) -> usize {
        self.input_cutoff
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

/// Dimension holding `D^dagger(Q) H D(Q)` for `|Q| <= shift` and `H` on `cutoff` levels.
pub fn enlarged_cutoff(cutoff: usize, shift: f64) -> usize {
    let r = (cutoff as f64).sqrt() + shift + 7.0;
    ((r * r).ceil() as usize).max(cutoff)
}

/// Toggling-frame generators `D^dagger(Q_k) H D(Q_k)` with their dwell fractions.
type WeightedTerms<T> = Vec<(DMatrix<Complex<T>>, T)>;

fn conjugated_terms<T: Real>(
    h0: &TruncatedOperator<T>,
    sched: &PulseSchedule<T>,
) -> Result<(usize, WeightedTerms<T>)> {
    h0.ensure_hermitian()?;
    let c = h0.cutoff();
    let out = enlarged_cutoff(c, to_f64(sched.max_shift()));
    let terms = sched
        .entries()
        .iter()
        .map(|e| {
            let b = displacement_block(e.q, c, out);
            let x = b.adjoint() * h0.entries() * &b;
            ((&x + x.adjoint()).map(|z| z.scale(lit(0.5))), e.tau())
        })
        .collect();
    Ok((out, terms))
}

pub fn average_hamiltonian<T: Real>(
    h0: &TruncatedOperator<T>,
    sched: &PulseSchedule<T>,
) -> Result<AverageHamiltonian<T>> {
    let (out, terms) = conjugated_terms(h0, sched)?;
    let mut acc = DMatrix::from_element(out, out, czero());
    for (x, tau) in &terms {
        acc += x.map(|z| z.scale(*tau));
    }
    Ok(AverageHamiltonian {
        embedded: TruncatedOperator::from_matrix(acc)?.with_warning(h0.truncation_warning()),
        input_cutoff: h0.cutoff(),
        order: 0,
    })
}

/// Eigen-decompositions of the toggling-frame Hamiltonians `D^dagger(Q_k) H_0 D(Q_k)`,
/// reusable across periods `T_C`.
pub struct TogglingFrame<T: Real> {
    steps: Vec<(Vec<T>, DMatrix<Complex<T>>, T)>,
    average: AverageHamiltonian<T>,
}

impl<T: Real> TogglingFrame<T> {
    pub fn new(h0: &TruncatedOperator<T>, sched: &PulseSchedule<T>) -> Result<Self> {
        let (out, terms) = conjugated_terms(h0, sched)?;
        let mut acc = DMatrix::from_element(out, out, czero());
        let mut steps = Vec::with_capacity(terms.len());
        for (x, tau) in terms {
            acc += x.map(|z| z.scale(tau));
            let (vals, vecs) = hermitian_eigh(&x);
            steps.push((vals, vecs, tau));
        }
        Ok(TogglingFrame {
            steps,
            average: AverageHamiltonian {
                embedded: TruncatedOperator::from_matrix(acc)?
                    .with_warning(h0.truncation_warning()),
                input_cutoff: h0.cutoff(),
                order: 0,
            },
        })
    }

    pub fn average(&self) -> &AverageHamiltonian<T> {
        &self.average
    }

    /// One-period propagator `prod_{k=M..1} exp(-i tau_k T_C X_k)`; equal to
    /// the lab-frame product `prod_k D(P_k) e^{-i H_0 tau_k T_C}` up to a global phase.
    pub fn period_propagator(&self, period: T) -> Result<TruncatedOperator<T>> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::domain("period must be positive and finite"));
        }
        let out = self.average.embedded.cutoff();
        let mut u = DMatrix::<Complex<T>>::identity(out, out);
        for (vals, vecs, tau) in &self.steps {
            u = unitary_from_eigen(vals, vecs, *tau * period) * u;
        }
        if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numeric("propagator has non-finite entries".into()));
        }
        TruncatedOperator::from_matrix(u)
    }

    /// `max |(i/T_C) log U(T_C) - H_av|` on the top-left `cutoff/2` block of the input space.
    pub fn magnus_defect(&self, period: T) -> Result<T> {
        let u = self.period_propagator(period)?;
        let log = unitary_log(u.entries())?;
        let i_over_t = Complex::new(T::zero(), T::one() / period);
        let eff = TruncatedOperator::from_matrix(log.map(|z| z * i_over_t))?;
        Ok(eff.max_abs_diff(&self.average.embedded, self.average.input_cutoff / 2))
    }
}

/// `U(T_C)^periods` on the enlarged space of [`TogglingFrame`].
pub fn stroboscopic_propagator<T: Real>(
    h0: &TruncatedOperator<T>,
    sched: &PulseSchedule<T>,
    period: T,
    periods: u32,
) -> Result<TruncatedOperator<T>> {
    let one = TogglingFrame::new(h0, sched)?.period_propagator(period)?;
    let mut acc = TruncatedOperator::identity(one.cutoff());
    for _ in 0..periods {
        acc = one.matmul(&acc)?;
    }
    Ok(acc)
}

/// `|F(alpha)|` at the given points: which displacements survive averaging.
pub fn support_scan<T: Real>(sched: &PulseSchedule<T>, points: &[PhasePoint<T>]) -> Vec<T> {
    points
        .iter()
        .map(|&a| cabs(sched.phase_average(a)))
        .collect()
}

/// Number of distinct entries; equals `(2N+1)^2` for compiled schedules.
pub fn expected_len(level: u32) -> usize {
    let s = 2 * level as usize + 1;
    s * s
}
