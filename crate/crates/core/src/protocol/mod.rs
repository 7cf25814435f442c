//! The finite-time correction cycle on the nucleus ⊗ electron system:
//! encoding, wait, electron-assisted syndrome detection, conditional
//! recovery, frame tracking and decoding.
//!
//! Nuclear drives are tuned for the electron ground state. While the
//! electron sits flipped, the same pulses rotate the nucleus in the
//! opposite sense, which is conjugation by `e^{-iπI_z}`; after an odd
//! number of detected errors this relabels the logical states, and the
//! relabeling is tracked in a classical frame instead of being undone.

mod cycle;
mod schedule;

pub use cycle::{
    run_cycle, simulate_schedule, BranchRecord, CycleOptions, CycleResult, CycleSimulator, FrameCorrection, ScheduleLeaf,
};
pub use schedule::{total_pulse_angle, total_pulse_duration, PulseSegment, Schedule, SegmentKind, Step, Terminal};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spin::{self, HalfInteger};

/// Electron basis index of `|↑⟩`.
pub const ELECTRON_UP: usize = 0;
/// Electron basis index of the ground state `|↓⟩`.
pub const ELECTRON_DOWN: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rabi {
    pub nuclear: f64,
    pub electron: f64,
}

impl Default for Rabi {
    fn default() -> Self {
        Self { nuclear: 1.0, electron: 1.0 }
    }
}

/// Parity of the number of detected errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameState {
    Even,
    Odd,
}

impl FrameState {
    pub fn from_flips(flips: usize) -> Self {
        if flips.is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }

    /// Logical value implied by a raw decoding readout.
    pub fn relabel(self, raw: u8) -> u8 {
        match self {
            Self::Even => raw,
            Self::Odd => 1 - raw,
        }
    }
}

/// Angle of the `I_x` rotation that carries the `I_y` eigenbasis onto `I_z`.
fn to_z_angle(spin: HalfInteger) -> Result<f64> {
    spin::encoding_rotation_angle(spin)
}

fn require_code_spin(spin: HalfInteger) -> Result<()> {
    if spin.twice() < 3 || !spin.is_half_odd() {
        return Err(Error::InvalidSpin { spin: spin.to_string(), reason: "the protocol needs a half-odd spin of at least 3/2" });
    }
    Ok(())
}

/// Number of `|±m⟩` pairs, which is also the number of syndromes.
fn pair_count(spin: HalfInteger) -> usize {
    spin.dim() / 2
}

/// Pulses steering the ground state `|I⟩_z` into the logical state with
/// Bloch angles `(θ, φ)`: a ladder of π pulses down to `|1/2⟩_z`, the
/// `ν_φ(θ)` pulse on the central transition, parallel ladders outward to
/// `|±I⟩_z`, and finally the `I_x` rotation into the `I_y` eigenbasis.
pub fn build_encoding(spin: HalfInteger, theta: f64, phi: f64, rabi: Rabi) -> Result<Schedule> {
    require_code_spin(spin)?;
    if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("Bloch angles (θ={theta}, φ={phi}) out of range")));
    }
    let centre = pair_count(spin) - 1;
    let mut steps = vec![];
    for level in 0..centre {
        steps.push(Step::Pulse(PulseSegment::nuclear(vec![[level, level + 1]], 0.0, PI, rabi.nuclear)));
    }
    if theta > 0.0 {
        steps.push(Step::Pulse(PulseSegment::nuclear(vec![[centre, centre + 1]], phi, theta, rabi.nuclear)));
    }
    steps.extend(encoding_tail(spin, rabi)?.into_iter().map(Step::Pulse));
    Schedule::new(spin, steps)
}

/// The logical-state-independent part of the encoding: outward ladders and
/// the rotation into the protected basis.
pub(crate) fn encoding_tail(spin: HalfInteger, rabi: Rabi) -> Result<Vec<PulseSegment>> {
    let d = spin.dim();
    let centre = pair_count(spin) - 1;
    let mut out = vec![];
    for step in 0..centre {
        let upper = centre - step;
        let lower = d - 1 - upper;
        out.push(PulseSegment::nuclear(vec![[upper - 1, upper], [lower, lower + 1]], 0.0, PI, rabi.nuclear));
    }
    out.push(PulseSegment::global_ix(-to_z_angle(spin)?, rabi.nuclear));
    Ok(out)
}

/// Detection round `n` (1-based): round 1 first rotates the protected basis
/// onto `I_z`; every round flips the electron when `|m_z| ≤ I − n` and then
/// measures it.
pub fn build_detection(spin: HalfInteger, round: usize, rabi: Rabi) -> Result<Vec<PulseSegment>> {
    require_code_spin(spin)?;
    let rounds = pair_count(spin) - 1;
    if round == 0 || round > rounds {
        return Err(Error::InvalidArgument(format!("detection round {round} outside 1..={rounds} for spin {spin}")));
    }
    let mut out = vec![];
    if round == 1 {
        out.push(PulseSegment::global_ix(to_z_angle(spin)?, rabi.nuclear));
    }
    let bound = spin.twice() - 2 * round as i32;
    let conditions = spin.projections().filter(|m| m.twice().abs() <= bound).collect();
    out.push(PulseSegment::electron_conditional(conditions, PI, rabi.electron));
    out.push(PulseSegment::measure());
    Ok(out)
}

/// Recovery from syndrome `k`: `k` parallel π steps carrying `|±(I−k)⟩_z`
/// to `|±I⟩_z`, then the rotation back into the protected basis.
pub fn build_recovery(spin: HalfInteger, magnitude: usize, rabi: Rabi) -> Result<Vec<PulseSegment>> {
    require_code_spin(spin)?;
    let d = spin.dim();
    if magnitude >= pair_count(spin) {
        return Err(Error::InvalidArgument(format!("syndrome {magnitude} exceeds the {} syndromes of spin {spin}", pair_count(spin))));
    }
    let mut out = vec![];
    for step in 0..magnitude {
        let upper = magnitude - step;
        let lower = d - 1 - upper;
        out.push(PulseSegment::nuclear(vec![[upper - 1, upper], [lower, lower + 1]], 0.0, PI, rabi.nuclear));
    }
    out.push(PulseSegment::global_ix(-to_z_angle(spin)?, rabi.nuclear));
    Ok(out)
}

/// Rotation onto `I_z`, then electron flips conditioned on `|-I⟩_z` and on
/// `|I⟩_z`, each followed by a measurement. A flip on the first pulse reads
/// logical 1, on the second logical 0; no flip at all flags an erasure.
pub fn build_decoding(spin: HalfInteger, rabi: Rabi) -> Result<Schedule> {
    require_code_spin(spin)?;
    let top = spin;
    let bottom = HalfInteger::from_twice(-spin.twice());
    let flip = |m: HalfInteger| Step::Pulse(PulseSegment::electron_conditional(vec![m], PI, rabi.electron));
    let steps = vec![
        Step::Pulse(PulseSegment::global_ix(to_z_angle(spin)?, rabi.nuclear)),
        flip(bottom),
        Step::Measure {
            flipped: vec![Step::End(Terminal::Logical { value: 1 })],
            unflipped: vec![
                flip(top),
                Step::Measure {
                    flipped: vec![Step::End(Terminal::Logical { value: 0 })],
                    unflipped: vec![Step::End(Terminal::Erasure)],
                },
            ],
        },
    ];
    Schedule::new(spin, steps)
}

/// Wait `t_wait`, then detection rounds until the electron stays put or
/// `|I − n| = 1/2`, each branch ending in its recovery.
pub fn build_cycle(spin: HalfInteger, t_wait: f64, rabi: Rabi) -> Result<Schedule> {
    require_code_spin(spin)?;
    let rounds = pair_count(spin) - 1;
    fn to_steps(segments: Vec<PulseSegment>) -> Vec<Step> {
        segments.into_iter().filter(|s| s.kind != SegmentKind::MeasureElectron).map(Step::Pulse).collect()
    }
    fn round(spin: HalfInteger, n: usize, rounds: usize, rabi: Rabi) -> Result<Vec<Step>> {
        let mut steps = to_steps(build_detection(spin, n, rabi)?);
        let mut unflipped = to_steps(build_recovery(spin, n - 1, rabi)?);
        unflipped.push(Step::End(Terminal::CycleEnd { magnitude: n - 1 }));
        let flipped = if n == rounds {
            let mut s = to_steps(build_recovery(spin, n, rabi)?);
            s.push(Step::End(Terminal::CycleEnd { magnitude: n }));
            s
        } else {
            round(spin, n + 1, rounds, rabi)?
        };
        steps.push(Step::Measure { flipped, unflipped });
        Ok(steps)
    }
    let mut steps = vec![Step::Pulse(PulseSegment::wait(t_wait))];
    steps.extend(round(spin, 1, rounds, rabi)?);
    Schedule::new(spin, steps)
}

/// Nearest positive multiple of `4π/Q`, halves rounding up.
pub fn quantize_wait(t: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrupole splitting must be positive, got {q}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Negative { name: "t", value: t });
    }
    let quantum = 4.0 * PI / q;
    // Guard ratios like 0.49999999999999994 produced by t = quantum/2.
    let ratio = t / quantum;
    let count = (ratio + 0.5 + 1e-12).floor().max(1.0);
    Ok(count * quantum)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S32: HalfInteger = HalfInteger::from_twice(3);
    const S52: HalfInteger = HalfInteger::from_twice(5);

    #[test]
    fn quantization_examples() {
        let q = 50.0;
        let quantum = 4.0 * PI / q;
        assert_eq!(quantize_wait(quantum, q).unwrap(), quantum);
        assert!((quantize_wait(5.0 * PI / q, q).unwrap() - quantum).abs() < 1e-15);
        assert!((quantize_wait(1.5 * quantum, q).unwrap() - 2.0 * quantum).abs() < 1e-15);
        assert!((quantize_wait(0.0, q).unwrap() - quantum).abs() < 1e-15);
        let q_hz = 2.0 * PI * 50e3;
        let t = quantize_wait(0.2e-3, q_hz).unwrap();
        assert!((t / (4.0 * PI / q_hz) - 5.0).abs() < 1e-9);
        assert!((t - 0.2e-3).abs() < 1e-12);
        assert!(quantize_wait(1.0, 0.0).is_err());
    }

    #[test]
    fn one_detection_round_for_spin_three_halves() {
        assert!(build_detection(S32, 1, Rabi::default()).is_ok());
        assert!(build_detection(S32, 2, Rabi::default()).is_err());
        let cycle = build_cycle(S32, 1.0, Rabi::default()).unwrap();
        assert_eq!(cycle.max_measurements(), 1);
    }

    #[test]
    fn five_halves_rounds_condition_on_shrinking_sets() {
        let r1 = build_detection(S52, 1, Rabi::default()).unwrap();
        let flip = r1.iter().find(|s| s.kind == SegmentKind::ElectronConditional).unwrap();
        let twice: Vec<i32> = flip.conditions.iter().map(|m| m.twice()).collect();
        assert_eq!(twice, vec![3, 1, -1, -3]);
        let r2 = build_detection(S52, 2, Rabi::default()).unwrap();
        assert_eq!(r2[0].conditions.iter().map(|m| m.twice()).collect::<Vec<_>>(), vec![1, -1]);
        assert_eq!(build_cycle(S52, 1.0, Rabi::default()).unwrap().max_measurements(), 2);
    }

    #[test]
    fn recovery_shapes() {
        let r = build_recovery(S32, 1, Rabi::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].targets, vec![[0, 1], [2, 3]]);
        assert!((r[0].duration - PI).abs() < 1e-15);
        assert_eq!(build_recovery(S32, 0, Rabi::default()).unwrap().len(), 1);
        let r = build_recovery(S52, 2, Rabi::default()).unwrap();
        assert_eq!(r[0].targets, vec![[1, 2], [3, 4]]);
        assert_eq!(r[1].targets, vec![[0, 1], [4, 5]]);
        assert!(build_recovery(S32, 2, Rabi::default()).is_err());
    }

    #[test]
    fn angle_budgets_for_spin_three_halves() {
        let enc = build_encoding(S32, PI, 0.3, Rabi::default()).unwrap();
        let nuclear: f64 = enc
            .all_segments()
            .iter()
            .filter(|s| s.kind == SegmentKind::NuclearTransition)
            .map(|s| s.angle)
            .sum();
        assert!(nuclear <= 3.0 * PI + 1e-12);
        let cycle = build_cycle(S32, 1.0, Rabi::default()).unwrap();
        for (path, _) in cycle.paths() {
            let segs = cycle.segments_along(&path).unwrap();
            assert!(total_pulse_angle(&segs) <= 3.0 * PI + 1e-12);
        }
    }

    #[test]
    fn schedules_round_trip_through_json() {
        let cycle = build_cycle(S52, 2.5, Rabi::default()).unwrap();
        let text = cycle.to_json().unwrap();
        assert!(text.contains("\"kind\": \"electron-conditional\""));
        assert_eq!(Schedule::from_json(&text).unwrap(), cycle);
    }

    #[test]
    fn malformed_schedules_rejected() {
        let dangling = Schedule::new(
            S32,
            vec![Step::Measure { flipped: vec![], unflipped: vec![Step::End(Terminal::Erasure)] }],
        );
        assert!(dangling.is_err());
        let bad_pair = Schedule::new(S32, vec![Step::Pulse(PulseSegment::nuclear(vec![[0, 4]], 0.0, PI, 1.0))]);
        assert!(bad_pair.is_err());
        assert!(build_encoding(S32, 4.0, 0.0, Rabi::default()).is_err());
    }

    #[test]
    fn frame_relabels_readout() {
        assert_eq!(FrameState::from_flips(3).relabel(0), 1);
        assert_eq!(FrameState::from_flips(2).relabel(0), 0);
    }
}
