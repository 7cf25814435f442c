//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

mod common;

use std::f64::consts::PI;

use maus_core::codes::{self, maus_code};
use maus_core::device::{self, arsenic};
use maus_core::dynamics::{self, NoiseParams};
use maus_core::linalg::{self, CMatrix, CVector, ONE, ZERO};
use maus_core::optimal_recovery::{self, MinimalQuditCode};
use maus_core::protocol::{build_cycle, build_encoding, simulate_schedule, CycleOptions, CycleSimulator, Rabi, ELECTRON_DOWN};
use maus_core::spin::{self, Basis, HalfInteger, Operator};
use maus_core::QuantumChannel;
use rand::Rng;

type Outcome = Result<String, String>;

const SPINS: [HalfInteger; 3] = [HalfInteger::from_twice(3), HalfInteger::from_twice(5), HalfInteger::from_twice(7)];

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ideal_scaling() -> Outcome {
    let grid = common::log_grid(1e-4, 1e-2, 9);
    let mut detail = vec![];
    let mut ok = true;
    for (spin, target) in SPINS.iter().zip([2.0, 3.0, 4.0]) {
        let code = maus_code(*spin).unwrap();
        let pts: Vec<(f64, f64)> = grid.iter().map(|&x| (x, codes::ideal_corrected_infidelity(&code, x).unwrap())).collect();
        let slope = common::log_slope(&pts);
        ok &= (slope - target).abs() <= 0.15;
        detail.push(format!("I={spin} slope {slope:.3}"));
    }
    let encode = codes::neighboring_iz_encoding(SPINS[0]).unwrap();
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&x| {
            let noise = dynamics::nuclear_dephasing_channel(SPINS[0], x).unwrap();
            let ch = codes::logical_channel(&encode, &noise, &QuantumChannel::identity(4)).unwrap();
            (x, 1.0 - codes::entanglement_fidelity(&ch).unwrap())
        })
        .collect();
    let slope = common::log_slope(&pts);
    ok &= (slope - 1.0).abs() <= 0.05;
    detail.push(format!("baseline slope {slope:.3}"));
    ensure(ok, detail.join(", "))
}

fn ideal_breakeven() -> Outcome {
    let mut worst = f64::INFINITY;
    for spin in SPINS {
        let code = maus_code(spin).unwrap();
        for x in common::log_grid(1e-4, 1.0, 40) {
            let margin = codes::ideal_corrected_fidelity(&code, x).unwrap() - codes::breakeven_baseline(x);
            worst = worst.min(margin);
        }
    }
    ensure(worst >= 0.0, format!("smallest F_e - baseline over 120 points: {worst:.3e}"))
}

fn minimal_qudit() -> Outcome {
    let code = MinimalQuditCode::bundled();
    let small: Vec<(f64, f64)> = common::log_grid(1e-4, 1e-2, 5)
        .into_iter()
        .map(|x| (x, 1.0 - optimal_recovery::minimal_qudit_fidelity(&code, x).unwrap()))
        .collect();
    let slope = common::log_slope(&small);
    let maus = maus_code(SPINS[0]).unwrap();
    let mut below = true;
    for x in common::log_grid(1e-4, 1e-1, 10) {
        let qudit = 1.0 - optimal_recovery::minimal_qudit_fidelity(&code, x).unwrap();
        below &= codes::ideal_corrected_infidelity(&maus, x).unwrap() < qudit;
    }
    ensure((slope - 1.0).abs() <= 0.15 && below, format!("qudit slope {slope:.3}, MAUS(3/2) below qudit for x <= 0.1: {below}"))
}

fn pulse_fidelities() -> Outcome {
    let s = SPINS[0];
    let hi = dynamics::nuclear_pi_pulse_fidelity(s, 1e-2, 2).unwrap();
    let lo = dynamics::nuclear_pi_pulse_fidelity(s, 1e-4, 2).unwrap();
    let e = dynamics::electron_pi_pulse_fidelity(5e-4).unwrap();
    let ok = (0.985..=0.995).contains(&hi) && (0.99985..=0.99995).contains(&lo) && (0.999..=0.9996).contains(&e);
    ensure(ok, format!("nuclear {hi:.5} at 1e-2, {lo:.6} at 1e-4; electron {e:.6}"))
}

/// `(Γ_n t, corrected, uncorrected)` along a log grid of requested waits.
fn protocol_curve(gamma_n: f64, gamma_e: f64, grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let sim = CycleSimulator::new(SPINS[0], NoiseParams::new(gamma_n, gamma_e).unwrap(), CycleOptions::default()).unwrap();
    grid.iter()
        .map(|&x| {
            let r = sim.run(x / gamma_n).unwrap();
            let x_eff = gamma_n * r.t_wait;
            (x_eff, 1.0 - r.entanglement_fidelity().unwrap(), codes::breakeven_baseline_infidelity(x_eff))
        })
        .collect()
}

fn protocol_optimum() -> Outcome {
    let curve = protocol_curve(1e-4, 5e-4, &common::log_grid(1e-3, 1.0, 31));
    let (x, c, u) = curve.iter().copied().max_by(|a, b| (a.2 / a.1).total_cmp(&(b.2 / b.1))).unwrap();
    let ratio = u / c;
    ensure((1e-2..=1e-1).contains(&x) && ratio >= 5.0, format!("optimum at Γn t = {x:.3e}, ratio {ratio:.2}"))
}

fn breakeven_range() -> Outcome {
    let curve = protocol_curve(1e-4, 5e-4, &common::log_grid(1e-4, 1.0, 41));
    let threshold = 10f64.powf(-2.5);
    let losing: Vec<f64> = curve.iter().filter(|p| p.0 >= threshold && p.1 >= p.2).map(|p| p.0).collect();
    let crossover = curve.iter().filter(|p| p.1 < p.2).map(|p| p.0).fold(f64::INFINITY, f64::min);
    let part1 = losing.is_empty();

    let strong = protocol_curve(1e-2, 5e-4, &common::log_grid(1e-4, 1.0, 41));
    let mut best: f64 = 0.0;
    let mut start: Option<f64> = None;
    for p in &strong {
        if p.1 < p.2 {
            let s = *start.get_or_insert(p.0);
            best = best.max(p.0 / s);
        } else {
            start = None;
        }
    }
    let floor = strong.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let part2 = best >= 10.0;
    ensure(
        part1 && part2,
        format!(
            "Γn=1e-4: first winning Γn t {crossover:.2e}, {} losing points at or above 10^-2.5; Γn=1e-2: widest window {best:.2} (corrected infidelity floor {floor:.3})",
            losing.len()
        ),
    )
}

fn breakeven_maps() -> Outcome {
    let grid = common::log_grid(1e-4, 1.0, 25);
    let mut t_min = vec![];
    for gn in common::log_grid(1e-4, 1e-2, 5) {
        let curve = protocol_curve(gn, 5e-4, &grid);
        // Smallest wait from which every longer wait on the grid beats break-even.
        let mut first = None;
        for p in curve.iter().rev() {
            if p.1 < p.2 {
                first = Some(p.0);
            } else {
                break;
            }
        }
        t_min.push((gn, first));
    }
    let found: Vec<f64> = t_min.iter().filter_map(|(_, t)| *t).collect();
    let spread = if found.len() == t_min.len() {
        found.iter().cloned().fold(0.0, f64::max) / found.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        f64::INFINITY
    };
    let part1 = spread < 3.0;

    let gammas_e = common::log_grid(5e-4, 5.0, 9);
    let columns = common::log_grid(1e-3, 1.0, 7);
    let rows: Vec<Vec<bool>> = gammas_e
        .iter()
        .map(|&ge| protocol_curve(1e-4, ge, &columns).iter().map(|p| p.1 < p.2).collect())
        .collect();
    let mut applicable = 0;
    let mut horizontal = true;
    for col in 0..columns.len() {
        let beats: Vec<bool> = rows.iter().map(|r| r[col]).collect();
        if !beats[0] {
            continue;
        }
        applicable += 1;
        let cut = beats.iter().position(|b| !b);
        horizontal &= match cut {
            Some(k) => beats[k..].iter().all(|b| !b),
            None => false,
        };
    }
    let part2 = applicable > 0 && horizontal;
    let listing: Vec<String> =
        t_min.iter().map(|(g, t)| format!("{g:.1e}:{}", t.map_or("none".into(), |t| format!("{t:.1e}")))).collect();
    ensure(
        part1 && part2,
        format!(
            "t_min Γn by Γn [{}] spread {spread:.1}; electron ceiling in {applicable} winning columns: {horizontal}",
            listing.join(" ")
        ),
    )
}

fn exactness() -> Outcome {
    let mut rng = common::rng(2024);
    let mut worst_prop: f64 = 0.0;
    for _ in 0..100 {
        let spin = SPINS[rng.gen_range(0..3)];
        let noise = NoiseParams::new(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1)).unwrap();
        let t = rng.gen_range(0.0..30.0);
        let analytic = dynamics::free_evolution_channel(spin, noise, t).unwrap();
        let generator = dynamics::dephasing_generator(spin, noise).unwrap();
        let silent = Operator::new(CMatrix::zeros(2 * spin.dim(), 2 * spin.dim()), Basis::Composite).unwrap();
        let numeric = dynamics::channel_of_segment(&silent, &generator, t).unwrap();
        worst_prop = worst_prop.max(linalg::max_abs(&(analytic.superop() - numeric.superop())));
    }

    let mut worst_prob: f64 = 0.0;
    let mut cptp = true;
    for spin in SPINS {
        let sim = CycleSimulator::new(spin, NoiseParams::new(1e-3, 5e-3).unwrap(), CycleOptions::default()).unwrap();
        for t in [0.5, 20.0, 500.0] {
            let r = sim.run(t).unwrap();
            worst_prob = worst_prob.max((r.total_probability() - 1.0).abs());
            cptp &= r.channel.is_cptp(1e-9);
        }
    }

    let down = |v: &CVector| v.kronecker(&CVector::from_fn(2, |k, _| if k == ELECTRON_DOWN { ONE } else { ZERO }));
    let down_col = CMatrix::from_fn(2, 1, |e, _| if e == ELECTRON_DOWN { ONE } else { ZERO });
    let mut worst_round_trip: f64 = 1.0;
    for spin in SPINS {
        let ground = down(&CVector::from_fn(spin.dim(), |k, _| if k == 0 { ONE } else { ZERO }));
        for (theta, phi) in [(0.0, 0.0), (PI, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI), (PI / 2.0, PI / 2.0), (PI / 2.0, -PI / 2.0)] {
            let enc = build_encoding(spin, theta, phi, Rabi::default()).unwrap();
            let leaves = simulate_schedule(&enc, NoiseParams::noiseless(), &(&ground * ground.adjoint()), ELECTRON_DOWN).unwrap();
            let encoded = &leaves[0].state;
            let code = maus_code(spin).unwrap();
            let iso = linalg::kron(&code.encode, &down_col);
            let block = iso.adjoint() * encoded * &iso;
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let block_gap = (block[(0, 0)].re - c * c).abs().max((block[(1, 1)].re - s * s).abs()).max((block[(0, 1)].norm() - c * s).abs());
            let cycle = build_cycle(spin, 3.0, Rabi::default()).unwrap();
            let after = simulate_schedule(&cycle, NoiseParams::noiseless(), encoded, ELECTRON_DOWN).unwrap();
            let state = after.iter().fold(CMatrix::zeros(encoded.nrows(), encoded.nrows()), |acc, l| acc + &l.state);
            let f = (encoded * state).trace().re - block_gap;
            worst_round_trip = worst_round_trip.min(f);
        }
    }
    let ok = worst_prop < 1e-10 && worst_prob < 1e-10 && cptp && worst_round_trip >= 1.0 - 1e-9;
    ensure(
        ok,
        format!(
            "propagator gap {worst_prop:.1e}, probability gap {worst_prob:.1e}, CPTP {cptp}, worst round trip {worst_round_trip:.12}"
        ),
    )
}

fn knill_laflamme() -> Outcome {
    let mut ok = true;
    let mut detail = vec![];
    for (p, spin) in (1..=3u32).zip(SPINS) {
        let code = maus_code(spin).unwrap();
        let within = codes::knill_laflamme_check(&code, &codes::iz_power_errors(spin, p).unwrap()).unwrap();
        let beyond = codes::knill_laflamme_check(&code, &codes::iz_power_errors(spin, p + 1).unwrap()).unwrap();
        ok &= within.satisfied && within.residual < 1e-10 && !beyond.satisfied;
        detail.push(format!("p={p}: {:.1e} / {:.1e}", within.residual, beyond.residual));
    }
    ensure(ok, detail.join(", "))
}

fn device_arithmetic() -> Outcome {
    let p = arsenic();
    let nmr = device::nmr_frequency(&p, 2).unwrap();
    let esr = device::esr_frequency(&p, HalfInteger::from_twice(3)).unwrap();
    let cal = device::calibrate_ix(&p, p.omega_nuclear).unwrap();
    let h = device::grf_hamiltonian(&p, &cal.amplitudes_mt).unwrap();
    let ix = spin::angular_momentum_ops(p.spin).unwrap().ix;
    let residual = linalg::max_abs(&(h.matrix() - ix.matrix() * linalg::c(p.omega_nuclear)));
    ensure(
        (nmr - 205.66).abs() <= 0.01 && (esr - 28.615).abs() <= 0.001 && residual < 1e-12,
        format!("NMR {nmr:.4} MHz, ESR {esr:.6} GHz, calibration residual {residual:.1e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("ideal-code scaling", ideal_scaling),
        ("ideal break-even", ideal_breakeven),
        ("minimal-qudit comparison", minimal_qudit),
        ("pi-pulse fidelities", pulse_fidelities),
        ("noisy protocol optimum", protocol_optimum),
        ("break-even range", breakeven_range),
        ("break-even map structure", breakeven_maps),
        ("exactness oracles", exactness),
        ("Knill-Laflamme suite", knill_laflamme),
        ("device arithmetic", device_arithmetic),
    ];
    let mut failed = vec![];
    for (k, (name, check)) in criteria.iter().enumerate() {
        let n = k + 1;
        match check() {
            Ok(detail) => eprintln!("criterion {n:>2} PASS {name}: {detail}"),
            Err(detail) => {
                eprintln!("criterion {n:>2} FAIL {name}: {detail}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
