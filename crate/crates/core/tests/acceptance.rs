//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//!
//! Runs as a plain binary (`harness = false`). The process fails when a
//! criterion outside `KNOWN_UNATTAINABLE` fails, or when a known-unattainable
//! criterion unexpectedly passes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use gkpdd::channels::{chi_from_kraus, photon_loss_chi, photon_loss_kraus_auto, LossParams};
use gkpdd::charfunc::{char_of_operator, effective_squeezing};
use gkpdd::ddseq::{average_hamiltonian, pulse_schedule, ShiftSet, TogglingFrame};
use gkpdd::engineering::{
    feasibility, spectrum_sweep, squeezing_scaling_fit, substrate_hamiltonian,
    substrate_phase_average, CutoffPolicy,
};
use gkpdd::fockspace::{gkp_codestate, KetState, LogicalBit, PhasePoint};
use gkpdd::twirl::{
    extremal_probability_exact, filter_value, twirl_measure, twirl_state_matrix, FilterKind,
    TwirlVariant,
};

/// Criterion 3 asks for 1e-6 agreement with Kraus operators truncated at 60
/// levels. Every column of a trace-preserving loss Kraus set carries unit
/// weight, so `Tr[D^dagger(alpha) E_l]` converges only through the slow decay
/// of the displacement matrix elements: at `|alpha| ~ 1.5` the truncated sum
/// is off by ~3e-2 (gamma 0.5) and by order one (gamma 0.1). Larger
/// cutoffs are printed for reference only: gamma 0.5 reaches ~1e-6 at 120
/// levels, gamma 0.1 is still off by order one at 400 because the Kraus
/// weight relevant at `|alpha| ~ 1.5` sits at Fock levels near `l / gamma`.
const KNOWN_UNATTAINABLE: &[u32] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn p(re: f64, im: f64) -> PhasePoint<f64> {
    PhasePoint::new(re, im)
}

// Deterministic sample points filling a disc of the given radius.
fn spiral(count: usize, radius: f64) -> Vec<PhasePoint<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            PhasePoint::from_polar(
                radius * ((k as f64 + 0.5) / count as f64).sqrt(),
                golden * k as f64,
            )
        })
        .collect()
}

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

// N-fold convolution of the single-step measure in exact arithmetic.
fn convolved_measure(level: u32) -> BTreeMap<(i64, i64), BigRational> {
    let mut step = BTreeMap::new();
    for n in -1i64..=1 {
        for m in -1i64..=1 {
            let w = match n.abs() + m.abs() {
                0 => rational(1, 4),
                1 => rational(1, 8),
                _ => rational(1, 16),
            };
            step.insert((n, m), w);
        }
    }
    let mut acc = BTreeMap::from([((0, 0), BigRational::one())]);
    for _ in 0..level {
        let mut next: BTreeMap<(i64, i64), BigRational> = BTreeMap::new();
        for ((a, b), w) in &acc {
            for ((c, d), v) in &step {
                *next.entry((a + c, b + d)).or_insert_with(BigRational::zero) += w * v;
            }
        }
        acc = next;
    }
    acc
}

fn criterion_1() -> Outcome {
    let m1 = twirl_measure::<f64>(1, TwirlVariant::Logical).unwrap();
    let mut fig = true;
    for n in -1i64..=1 {
        for m in -1i64..=1 {
            let want = match n.abs() + m.abs() {
                0 => rational(1, 4),
                1 => rational(1, 8),
                _ => rational(1, 16),
            };
            fig &= m1.weight_exact(n, m) == want;
        }
    }
    let mut conv = true;
    for level in 1..=5 {
        let m = twirl_measure::<f64>(level, TwirlVariant::Logical).unwrap();
        let oracle = convolved_measure(level);
        conv &= oracle.len() == m.len();
        for ((n, k), w) in &oracle {
            conv &= m.weight_exact(*n, *k) == *w;
        }
        conv &= m.total_exact() == BigRational::one();
    }
    outcome(
        fig && conv,
        format!("single-step weights exact: {fig}; N<=5 equals convolution: {conv}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_lattice = 0.0f64;
    let mut worst_half = 0.0f64;
    let mut worst_semigroup = 0.0f64;
    for variant in [TwirlVariant::Logical, TwirlVariant::Stabilizer] {
        // filter period, i.e. the preserved lattice spacing, is pi / u
        let spacing = PI / variant.shift_unit::<f64>();
        for level in [1, 5, 10, 25] {
            let kind = FilterKind::new(variant, level).unwrap();
            for a in -3i64..=3 {
                for b in -3i64..=3 {
                    let lat = p(spacing * a as f64, spacing * b as f64);
                    worst_lattice = worst_lattice.max((filter_value(lat, kind) - 1.0).abs());
                    let half = p(spacing * (a as f64 + 0.5), spacing * b as f64);
                    worst_half = worst_half.max(filter_value(half, kind).abs());
                    let half = p(spacing * a as f64, spacing * (b as f64 + 0.5));
                    worst_half = worst_half.max(filter_value(half, kind).abs());
                }
            }
        }
        for pt in spiral(40, 3.0) {
            for (n1, n2) in [(1, 1), (1, 4), (5, 5), (10, 15)] {
                let f = |n| filter_value(pt, FilterKind::new(variant, n).unwrap());
                worst_semigroup = worst_semigroup.max((f(n1) * f(n2) - f(n1 + n2)).abs());
            }
        }
    }
    let pass = worst_lattice < 1e-12 && worst_half < 1e-12 && worst_semigroup < 1e-12;
    outcome(
        pass,
        format!("lattice |F-1| {worst_lattice:.1e}, half-lattice |F| {worst_half:.1e}, semigroup {worst_semigroup:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let pts = [
        p(0.0, 0.0),
        p(0.7, 0.3),
        p(-0.5, 1.0),
        p(1.2, -0.6),
        p(-1.0, -1.1),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for gamma in [0.1, 0.5] {
        let params = LossParams::new(gamma).unwrap();
        let closed = photon_loss_chi(params);
        let kraus = chi_from_kraus(&photon_loss_kraus_auto(gamma, 60).unwrap());
        // errors relative to the peak value (gamma_bar / pi)^2; pointwise
        // ratios are meaningless where the Gaussian has decayed below 1e-20
        let peak = (params.gamma_bar() / PI).powi(2);
        let mut worst = 0.0f64;
        for &a in &pts {
            for &b in &pts {
                worst = worst.max((kraus.eval(a, b) - closed.eval(a, b)).norm() / peak);
            }
        }
        // ln|c(alpha, alpha + t e)| = const - (2 gamma_bar - 1)/2 t^2
        let base = p(0.3, 0.2);
        let dir = PhasePoint::from_polar(1.0, PI / 3.0);
        let ts: Vec<f64> = (0..13).map(|i| 0.1 * i as f64).collect();
        let xs: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| kraus.eval(base, base + dir * t).norm().ln())
            .collect();
        let slope = least_squares_slope(&xs, &ys);
        let rate = (2.0 * params.gamma_bar() - 1.0) / 2.0;
        let rate_err = (-slope - rate).abs() / rate;
        let ok = worst < 1e-6 && rate_err < 0.01;
        pass &= ok;
        let big = if gamma < 0.3 { 400 } else { 120 };
        let converged = chi_from_kraus(&photon_loss_kraus_auto(gamma, big).unwrap());
        let mut worst_big = 0.0f64;
        for &a in &pts {
            for &b in &pts {
                worst_big = worst_big.max((converged.eval(a, b) - closed.eval(a, b)).norm() / peak);
            }
        }
        details.push(format!(
            "gamma={gamma}: max rel err {worst:.2e}, decay rate err {:.2}% (reference at cutoff {big}: {worst_big:.1e})",
            100.0 * rate_err
        ));
    }
    outcome(pass, details.join("; "))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion_4() -> Outcome {
    let c = 150;
    let psi = KetState::<f64>::fock(0, c).unwrap().amplitudes() * Complex::new(0.8, 0.0)
        + KetState::<f64>::coherent(p(0.6, -0.4), c)
            .unwrap()
            .amplitudes()
            * Complex::new(0.0, 0.6);
    let rho = KetState::from_amplitudes(psi).unwrap().density();
    let mut worst = 0.0f64;
    for level in 1..=2 {
        let m = twirl_measure(level, TwirlVariant::Logical).unwrap();
        let out = twirl_state_matrix(&rho, &m).unwrap();
        let kind = FilterKind::logical(level).unwrap();
        for a in spiral(20, 2.5) {
            let lhs = char_of_operator(&out, a).unwrap();
            let rhs = char_of_operator(&rho, a).unwrap() * filter_value(a, kind);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    let ket = gkp_codestate(LogicalBit::Zero, 0.3f64, 200).unwrap();
    let rho0 = ket.density().embed(300).unwrap();
    let before = effective_squeezing(&rho0).unwrap();
    let z = PhasePoint::imag((PI / 2.0).sqrt());
    let z_before = char_of_operator(&rho0, z).unwrap();
    let mut stab = 0.0f64;
    for level in 1..=2 {
        let out = twirl_state_matrix(
            &rho0,
            &twirl_measure(level, TwirlVariant::Stabilizer).unwrap(),
        )
        .unwrap();
        let after = effective_squeezing(&out).unwrap();
        stab = stab
            .max((before.delta_q - after.delta_q).abs())
            .max((before.delta_p - after.delta_p).abs())
            .max((z_before - char_of_operator(&out, z).unwrap()).norm());
    }
    outcome(
        worst < 1e-8 && stab < 1e-6,
        format!("logical twirl char defect {worst:.1e}; stabilizer twirl change {stab:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut exact = true;
    for level in 1..=5 {
        let m = twirl_measure::<f64>(level, TwirlVariant::Stabilizer).unwrap();
        let moment: f64 = m.atoms().iter().map(|(g, w)| w * g.norm_sqr()).sum();
        worst = worst.max((moment - 2.0 * PI * level as f64).abs());
        let n = level as i64;
        let corners = [(n, n), (n, -n), (-n, n), (-n, -n)]
            .iter()
            .fold(BigRational::zero(), |acc, &(a, b)| {
                acc + m.weight_exact(a, b)
            });
        let want = BigRational::new(
            BigInt::from(4),
            BigInt::from(BigUint::from(2u32).pow(4 * level)),
        );
        exact &= corners == want && extremal_probability_exact(level) == want;
    }
    outcome(
        worst < 1e-10 && exact,
        format!("gain moment error {worst:.1e}; extremal probability exact: {exact}"),
    )
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut worst_net = 0.0f64;
    let mut max_pulse = 0.0f64;
    for level in 1..=5 {
        let s = pulse_schedule::<f64>(level, ShiftSet::Logical).unwrap();
        ok &= s.len() == ((2 * level + 1) * (2 * level + 1)) as usize;
        ok &= s.total_tau_exact() == BigRational::one();
        ok &= s.entries()[0].q == PhasePoint::origin();
        worst_net = worst_net.max(s.net_displacement().norm());
        max_pulse = max_pulse.max(s.max_pulse());
    }
    let pass = ok && worst_net < 1e-12 && max_pulse <= PI.sqrt() + 1e-12;
    outcome(pass, format!("counts and sums exact: {ok}; net displacement {worst_net:.1e}; max |P| {max_pulse:.6} (sqrt(pi) = {:.6})", PI.sqrt()))
}

fn criterion_7() -> Outcome {
    let phi = (2.0 * PI).sqrt();
    let sub = substrate_hamiltonian(1.0, phi, 150).unwrap();
    let mut worst = 0.0f64;
    for level in 1..=3 {
        let s = pulse_schedule::<f64>(level, ShiftSet::Logical).unwrap();
        let av = average_hamiltonian(&sub, &s).unwrap();
        let kind = FilterKind::logical(level).unwrap();
        for a in spiral(20, 3.0) {
            let lhs = char_of_operator(av.embedded(), a).unwrap();
            let rhs = char_of_operator(&sub, a).unwrap() * filter_value(a, kind);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    outcome(
        worst < 1e-8,
        format!("max |h_av(a) - h_sub(a) F(a)| = {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let sub = substrate_hamiltonian(1.0, (2.0 * PI).sqrt(), 100).unwrap();
    let s = pulse_schedule::<f64>(1, ShiftSet::Logical).unwrap();
    let frame = TogglingFrame::new(&sub, &s).unwrap();
    let defects: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&t| frame.magnus_defect(t).unwrap())
        .collect();
    let r1 = defects[0] / defects[1];
    let r2 = defects[1] / defects[2];
    let pass = (5.0..=20.0).contains(&r1) && (5.0..=20.0).contains(&r2);
    outcome(
        pass,
        format!(
            "defects {:.3e}, {:.3e}, {:.3e}; ratios {r1:.2}, {r2:.2}",
            defects[0], defects[1], defects[2]
        ),
    )
}

fn criterion_9() -> Outcome {
    let levels: Vec<u32> = (1..=20).collect();
    let reports: Vec<_> = spectrum_sweep::<f64>(&levels, 1.0, CutoffPolicy::default())
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    let converged = reports.iter().all(|r| r.converged);
    let ratio = reports
        .iter()
        .filter(|r| r.level >= 4)
        .map(|r| r.ground_pair_splitting / r.gap)
        .fold(0.0f64, f64::max);
    let mut asym = 0.0f64;
    for r in reports.iter().filter(|r| r.level >= 8) {
        for s in r.squeezing_reports.iter().take(2) {
            let s = s.unwrap();
            asym = asym.max((s.delta_q - s.delta_p).abs() / (0.5 * (s.delta_q + s.delta_p)));
        }
    }
    let tail: Vec<_> = reports.iter().filter(|r| r.level >= 8).cloned().collect();
    let (exponent, r2) = squeezing_scaling_fit(&tail).unwrap();
    let monotone = reports
        .iter()
        .filter(|r| r.level >= 4)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1].gap < w[0].gap);
    let pass =
        converged && ratio < 0.05 && asym < 0.05 && (exponent + 0.185).abs() <= 0.05 && monotone;
    let max_cut = reports.iter().map(|r| r.cutoff_used).max().unwrap_or(0);
    outcome(
        pass,
        format!(
            "converged {converged} (max cutoff {max_cut}); splitting/gap {ratio:.1e}; q/p asymmetry {asym:.1e}; exponent {exponent:.4} (R^2 {r2:.5}); gap decreasing {monotone}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let phi = (2.0 * PI).sqrt();
    let h = substrate_hamiltonian(1.0, phi, 100).unwrap();
    let avg = substrate_phase_average(1.0, phi, 100, 720).unwrap();
    let d = h.max_abs_diff(&avg, 100);
    outcome(d < 1e-6, format!("max entry difference {d:.2e}"))
}

fn criterion_11() -> Outcome {
    let r = feasibility(2.0 * PI * 5.26e9, 1, 0.0).unwrap();
    let ns = r.t_x_bound * 1e9;
    let two_sig = format!("{ns:.2}");
    outcome(
        two_sig == "0.13" && (ns - 0.134).abs() < 5e-4,
        format!("T_X bound {ns:.4} ns -> {two_sig} ns"),
    )
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_gkpdd");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("spectrum_{i}.csv"));
        let status = Command::new(bin)
            .args(["spectrum", "--N", "1..5", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("run {i} exited with {status}"));
        }
        outputs.push(std::fs::read(&path).unwrap());
    }
    let same = outputs[0] == outputs[1];
    outcome(
        same && !outputs[0].is_empty(),
        format!("byte-identical: {same} ({} bytes)", outputs[0].len()),
    )
}

type Criterion = (u32, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(1)),
        (3, criterion_3, Duration::from_secs(30)),
        (4, criterion_4, Duration::from_secs(60)),
        (5, criterion_5, Duration::from_secs(1)),
        (6, criterion_6, Duration::from_secs(1)),
        (7, criterion_7, Duration::from_secs(60)),
        (8, criterion_8, Duration::from_secs(120)),
        (9, criterion_9, Duration::from_secs(15 * 60)),
        (10, criterion_10, Duration::from_secs(60)),
        (11, criterion_11, Duration::from_secs(1)),
        (12, criterion_12, Duration::from_secs(120)),
    ];
    let mut unexpected = Vec::new();
    for (id, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let note = if known && !pass {
            " [known unattainable]"
        } else {
            ""
        };
        println!(
            "criterion {id:>2}: {tag} ({:.2} s, budget {} s){note}: {}",
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
        if pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
