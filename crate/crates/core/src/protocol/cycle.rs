//! Exact branch-enumerated simulation of schedules.
//!
//! A cycle is evaluated on the four logical matrix units `|a⟩⟨b|` at once:
//! their encoded images are pushed through every segment, split by electron
//! projectors at each measurement, decoded per branch, frame-corrected and
//! summed into one logical channel.

use crate::channel::QuantumChannel;
use crate::codes::{self, CodeSpec};
use crate::dynamics::{self, NoiseParams};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::spin::{self, HalfInteger, Operator};

use super::schedule::{PulseSegment, Schedule, SegmentKind, Step, Terminal};
use super::{build_cycle, encoding_tail, quantize_wait, to_z_angle, FrameState, Rabi, ELECTRON_DOWN, ELECTRON_UP};

/// Control Hamiltonian of a pulse on the composite space.
///
/// Nuclear drives carry the factor `|↓⟩⟨↓| − |↑⟩⟨↑|`: they are tuned for the
/// electron ground state and act reversed while the electron is flipped.
pub(crate) fn segment_hamiltonian(spin: HalfInteger, seg: &PulseSegment) -> Result<CMatrix> {
    let d = spin.dim();
    let mut electron_sign = CMatrix::zeros(2, 2);
    electron_sign[(ELECTRON_UP, ELECTRON_UP)] = -ONE;
    electron_sign[(ELECTRON_DOWN, ELECTRON_DOWN)] = ONE;
    match seg.kind {
        SegmentKind::NuclearTransition => {
            let pairs: Vec<(usize, usize)> = seg.targets.iter().map(|&[p, q]| (p, q)).collect();
            let h = dynamics::rwa_pulse_hamiltonian(d, &pairs, seg.phase, seg.rabi)?;
            Ok(linalg::kron(h.matrix(), &electron_sign))
        }
        SegmentKind::GlobalIx => {
            let ix = spin::angular_momentum_ops(spin)?.ix;
            let h = ix.matrix() * c(seg.rabi * seg.angle.signum());
            Ok(linalg::kron(&h, &electron_sign))
        }
        SegmentKind::ElectronConditional => {
            let pairs = seg
                .conditions
                .iter()
                .map(|&m| spin.index_of(m).map(|k| (2 * k + ELECTRON_UP, 2 * k + ELECTRON_DOWN)))
                .collect::<Result<Vec<_>>>()?;
            Ok(dynamics::rwa_pulse_hamiltonian(2 * d, &pairs, seg.phase, seg.rabi)?.into_matrix())
        }
        SegmentKind::Wait | SegmentKind::MeasureElectron => Ok(CMatrix::zeros(2 * d, 2 * d)),
    }
}

fn project_electron(x: &CMatrix, electron: usize) -> CMatrix {
    CMatrix::from_fn(x.nrows(), x.ncols(), |r, s| if r % 2 == electron && s % 2 == electron { x[(r, s)] } else { ZERO })
}

#[derive(Clone, Debug)]
struct Track {
    outcomes: Vec<bool>,
    electron: usize,
    flips: usize,
}

struct Leaf {
    track: Track,
    terminal: Option<Terminal>,
    ops: Vec<CMatrix>,
}

fn walk<F>(steps: &[Step], mut ops: Vec<CMatrix>, track: Track, apply: &mut F, leaves: &mut Vec<Leaf>) -> Result<()>
where
    F: FnMut(&PulseSegment, Vec<CMatrix>) -> Result<Vec<CMatrix>>,
{
    for step in steps {
        match step {
            Step::Pulse(seg) => ops = apply(seg, ops)?,
            Step::Measure { flipped, unflipped } => {
                let other = 1 - track.electron;
                let flipped_ops = ops.iter().map(|x| project_electron(x, other)).collect();
                let kept_ops = ops.iter().map(|x| project_electron(x, track.electron)).collect();
                let mut f = track.clone();
                f.outcomes.push(true);
                f.electron = other;
                f.flips += 1;
                walk(flipped, flipped_ops, f, apply, leaves)?;
                let mut u = track;
                u.outcomes.push(false);
                return walk(unflipped, kept_ops, u, apply, leaves);
            }
            Step::End(terminal) => {
                leaves.push(Leaf { track, terminal: Some(*terminal), ops });
                return Ok(());
            }
        }
    }
    leaves.push(Leaf { track, terminal: None, ops });
    Ok(())
}

fn trace_weight(ops: &CMatrix) -> f64 {
    ops.trace().re
}

/// One terminal branch of [`simulate_schedule`].
#[derive(Clone, Debug)]
pub struct ScheduleLeaf {
    pub outcomes: Vec<bool>,
    pub terminal: Option<Terminal>,
    pub frame: FrameState,
    pub electron: usize,
    pub probability: f64,
    /// Unnormalized composite state at the end of the branch.
    pub state: CMatrix,
}

/// Runs a schedule on a composite density matrix, enumerating every
/// measurement branch. `electron` is the tracked electron state at the start.
pub fn simulate_schedule(schedule: &Schedule, noise: NoiseParams, initial: &CMatrix, electron: usize) -> Result<Vec<ScheduleLeaf>> {
    let spin = schedule.spin;
    let dim = 2 * spin.dim();
    if initial.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: initial.nrows() });
    }
    if electron > 1 {
        return Err(Error::InvalidArgument(format!("electron index {electron} is not 0 or 1")));
    }
    let generator = dynamics::dephasing_generator(spin, noise)?;
    let mut apply = |seg: &PulseSegment, ops: Vec<CMatrix>| -> Result<Vec<CMatrix>> {
        if seg.kind == SegmentKind::Wait {
            let factors = dynamics::dephasing_factors(spin, noise, seg.duration)?;
            return Ok(ops.iter().map(|x| x.component_mul(&factors)).collect());
        }
        let h = Operator::new(segment_hamiltonian(spin, seg)?, spin::Basis::Composite)?;
        let ch = dynamics::channel_of_segment(&h, &generator, seg.duration)?;
        ops.iter().map(|x| ch.apply(x)).collect()
    };
    let mut leaves = vec![];
    let track = Track { outcomes: vec![], electron, flips: 0 };
    walk(&schedule.steps, vec![initial.clone()], track, &mut apply, &mut leaves)?;
    Ok(leaves
        .into_iter()
        .map(|leaf| {
            let state = leaf.ops.into_iter().next().expect("one operator per leaf");
            ScheduleLeaf {
                probability: trace_weight(&state),
                outcomes: leaf.track.outcomes,
                terminal: leaf.terminal,
                frame: FrameState::from_flips(leaf.track.flips),
                electron: leaf.track.electron,
                state,
            }
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct CycleOptions {
    /// Round the wait to a multiple of `4π/Q`, cancelling quadrupole evolution.
    pub quantize_wait: bool,
    /// Quadrupole splitting in units of the Rabi rate.
    pub q_over_omega: f64,
    /// Include noise on the state-independent encoding and decoding pulses.
    pub encoding_noise: bool,
    pub rabi: Rabi,
    /// Nuclear unitary applied at the start of the wait.
    pub injected_error: Option<CMatrix>,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { quantize_wait: true, q_over_omega: 50.0, encoding_noise: false, rabi: Rabi::default(), injected_error: None }
    }
}

/// Logical correction attached to one detection branch.
#[derive(Clone, Debug)]
pub struct FrameCorrection {
    pub outcomes: Vec<bool>,
    pub magnitude: usize,
    pub frame: FrameState,
    /// The Pauli (`I`, `X`, `Y` or `Z`) the noiseless branch applies to the logical qubit.
    pub pauli: char,
    /// Overlap of the noiseless branch action with that Pauli; 1 when exact.
    pub pauli_fidelity: f64,
    superop: CMatrix,
}

#[derive(Clone, Debug)]
pub struct BranchRecord {
    pub outcomes: Vec<bool>,
    pub magnitude: usize,
    pub frame: FrameState,
    /// Branch probability for a maximally mixed logical input.
    pub probability: f64,
}

impl BranchRecord {
    pub fn rounds(&self) -> usize {
        self.outcomes.len()
    }
}

#[derive(Clone, Debug)]
pub struct CycleResult {
    pub channel: QuantumChannel,
    pub branches: Vec<BranchRecord>,
    /// Wait actually simulated, after quantization.
    pub t_wait: f64,
}

impl CycleResult {
    pub fn entanglement_fidelity(&self) -> Result<f64> {
        codes::entanglement_fidelity(&self.channel)
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn expected_rounds(&self) -> f64 {
        self.branches.iter().map(|b| b.probability * b.rounds() as f64).sum()
    }
}

/// Segment propagators for one `(spin, noise, options)` triple, reusable
/// across wait times.
#[derive(Clone, Debug)]
pub struct CycleSimulator {
    spin: HalfInteger,
    noise: NoiseParams,
    options: CycleOptions,
    code: CodeSpec,
    noisy: Vec<(PulseSegment, CMatrix)>,
    ideal: Vec<(PulseSegment, CMatrix)>,
    encoded: Vec<CMatrix>,
    decode_tail: Vec<PulseSegment>,
    decoder: QuantumChannel,
    corrections: Vec<FrameCorrection>,
}

impl CycleSimulator {
    pub fn new(spin: HalfInteger, noise: NoiseParams, options: CycleOptions) -> Result<Self> {
        noise.validate()?;
        if !(options.q_over_omega > 0.0) {
            return Err(Error::InvalidArgument("quadrupole splitting must be positive".into()));
        }
        let code = codes::maus_code(spin)?;
        let d = spin.dim();
        if let Some(u) = &options.injected_error {
            if u.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: u.nrows() });
            }
        }
        let template = build_cycle(spin, 0.0, options.rabi)?;
        let enc_tail = encoding_tail(spin, options.rabi)?;
        let decode_tail =
            if options.encoding_noise { vec![PulseSegment::global_ix(to_z_angle(spin)?, options.rabi.nuclear)] } else { vec![] };

        let mut segments: Vec<PulseSegment> = vec![];
        for seg in template.all_segments().into_iter().chain(enc_tail.iter().cloned()).chain(decode_tail.iter().cloned()) {
            if seg.is_pulse() && !segments.contains(&seg) {
                segments.push(seg);
            }
        }
        let generator = dynamics::dephasing_generator(spin, noise)?;
        let mut noisy = vec![];
        let mut ideal = vec![];
        for seg in segments {
            let h = Operator::new(segment_hamiltonian(spin, &seg)?, spin::Basis::Composite)?;
            noisy.push((seg.clone(), dynamics::channel_of_segment(&h, &generator, seg.duration)?.superop().clone()));
            let u = linalg::expm(&(h.matrix() * c(-seg.duration) * linalg::I));
            ideal.push((seg, u));
        }

        let down = CMatrix::from_fn(2, 1, |e, _| if e == ELECTRON_DOWN { ONE } else { ZERO });
        let target = linalg::kron(&code.encode, &down);
        let (encoded, decoder_iso) = if options.encoding_noise {
            let mut u_tail = linalg::identity(2 * d);
            for seg in &enc_tail {
                u_tail = lookup(&ideal, seg)? * u_tail;
            }
            let preimage = u_tail.adjoint() * &target;
            let mut ops = unit_images(&preimage);
            for seg in &enc_tail {
                let s = lookup(&noisy, seg)?;
                ops = ops.iter().map(|x| linalg::apply_superop(s, x, 2 * d)).collect();
            }
            let rz = spin::rotation(&spin::angular_momentum_ops(spin)?.ix, to_z_angle(spin)?)?;
            (ops, rz.matrix() * &code.encode)
        } else {
            (unit_images(&target), code.encode.clone())
        };
        let decoder = codes::decoding_channel(&decoder_iso)?;

        let mut sim = Self { spin, noise, options, code, noisy, ideal, encoded, decode_tail, decoder, corrections: vec![] };
        sim.corrections = sim.calibrate_frames(&template)?;
        Ok(sim)
    }

    pub fn spin(&self) -> HalfInteger {
        self.spin
    }

    pub fn noise(&self) -> NoiseParams {
        self.noise
    }

    pub fn options(&self) -> &CycleOptions {
        &self.options
    }

    pub fn frame_corrections(&self) -> &[FrameCorrection] {
        &self.corrections
    }

    /// The wait that will actually be simulated for a requested one.
    pub fn effective_wait(&self, t_wait: f64) -> Result<f64> {
        if self.options.quantize_wait {
            quantize_wait(t_wait, self.options.q_over_omega)
        } else if t_wait >= 0.0 && t_wait.is_finite() {
            Ok(t_wait)
        } else {
            Err(Error::Negative { name: "t_wait", value: t_wait })
        }
    }

    /// Noiselessly sends the normalized `P_k I_z^k` image of the codespace
    /// through each detection branch and records the logical unitary it
    /// ends up applying; the inverse of that unitary is the frame correction.
    fn calibrate_frames(&self, template: &Schedule) -> Result<Vec<FrameCorrection>> {
        let iz = spin::angular_momentum_ops(self.spin)?.iz;
        let down = CMatrix::from_fn(2, 1, |e, _| if e == ELECTRON_DOWN { ONE } else { ZERO });
        let mut out = vec![];
        for (path, terminal) in template.paths() {
            let Some(Terminal::CycleEnd { magnitude }) = terminal else {
                return Err(Error::InvalidArgument("cycle branch without a cycle end".into()));
            };
            let syndrome = &self.code.syndromes[magnitude];
            let mut image = &syndrome.projector * iz.pow(magnitude as u32).matrix() * &self.code.encode;
            for mut col in image.column_iter_mut() {
                let n = col.norm();
                col /= c(n);
            }
            let start = unit_images(&linalg::kron(&image, &down));
            let mut apply = |seg: &PulseSegment, ops: Vec<CMatrix>| -> Result<Vec<CMatrix>> {
                if seg.kind == SegmentKind::Wait {
                    return Ok(ops);
                }
                let u = lookup(&self.ideal, seg)?;
                Ok(ops.iter().map(|x| u * x * u.adjoint()).collect())
            };
            let mut leaves = vec![];
            walk(&template.steps, start, Track { outcomes: vec![], electron: ELECTRON_DOWN, flips: 0 }, &mut apply, &mut leaves)?;
            let leaf = leaves
                .into_iter()
                .find(|l| l.track.outcomes == path)
                .ok_or_else(|| Error::InvalidArgument("calibration branch missing".into()))?;
            let mut ops = leaf.ops;
            for seg in &self.decode_tail {
                let u = lookup(&self.ideal, seg)?;
                ops = ops.iter().map(|x| u * x * u.adjoint()).collect();
            }
            let weight = trace_weight(&ops[0]) + trace_weight(&ops[3]);
            if (weight - 2.0).abs() > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "syndrome {magnitude} is not detected deterministically (weight {:.3e})",
                    weight / 2.0
                )));
            }
            let g = self.logical_superop(&ops);
            let deviation = linalg::max_abs(&(g.adjoint() * &g - linalg::identity(4)));
            if deviation > 1e-8 {
                return Err(Error::InvalidArgument(format!("branch {path:?} does not act unitarily on the logical qubit ({deviation:.3e})")));
            }
            let (pauli, pauli_fidelity) = closest_pauli(&g);
            out.push(FrameCorrection {
                frame: FrameState::from_flips(leaf.track.flips),
                outcomes: path,
                magnitude,
                pauli,
                pauli_fidelity,
                superop: g.adjoint(),
            });
        }
        Ok(out)
    }

    /// Decodes composite images of the logical matrix units into a 2×2 superoperator.
    fn logical_superop(&self, ops: &[CMatrix]) -> CMatrix {
        let d = self.spin.dim();
        let mut s = CMatrix::zeros(4, 4);
        for (col, x) in ops.iter().enumerate() {
            let nuclear = linalg::partial_trace_second(x, d, 2);
            let logical = linalg::apply_superop(self.decoder.superop(), &nuclear, 2);
            s.set_column(col, &linalg::vec(&logical));
        }
        s
    }

    pub fn run(&self, t_wait: f64) -> Result<CycleResult> {
        let t = self.effective_wait(t_wait)?;
        let dim = 2 * self.spin.dim();
        let schedule = build_cycle(self.spin, t, self.options.rabi)?;
        let factors = dynamics::dephasing_factors(self.spin, self.noise, t)?;
        let kick = self
            .options
            .injected_error
            .as_ref()
            .map(|u| linalg::kron(u, &linalg::identity(2)));
        let mut apply = |seg: &PulseSegment, ops: Vec<CMatrix>| -> Result<Vec<CMatrix>> {
            if seg.kind == SegmentKind::Wait {
                return Ok(ops
                    .iter()
                    .map(|x| {
                        let x = match &kick {
                            Some(k) => k * x * k.adjoint(),
                            None => x.clone(),
                        };
                        x.component_mul(&factors)
                    })
                    .collect());
            }
            let s = lookup(&self.noisy, seg)?;
            Ok(ops.iter().map(|x| linalg::apply_superop(s, x, dim)).collect())
        };
        let mut leaves = vec![];
        let track = Track { outcomes: vec![], electron: ELECTRON_DOWN, flips: 0 };
        walk(&schedule.steps, self.encoded.clone(), track, &mut apply, &mut leaves)?;

        let mut total = CMatrix::zeros(4, 4);
        let mut branches = vec![];
        for leaf in leaves {
            let Some(Terminal::CycleEnd { magnitude }) = leaf.terminal else {
                return Err(Error::InvalidArgument("cycle branch without a cycle end".into()));
            };
            let mut ops = leaf.ops;
            for seg in &self.decode_tail {
                let s = lookup(&self.noisy, seg)?;
                ops = ops.iter().map(|x| linalg::apply_superop(s, x, dim)).collect();
            }
            let correction = self
                .corrections
                .iter()
                .find(|f| f.outcomes == leaf.track.outcomes)
                .ok_or_else(|| Error::InvalidArgument("no frame correction for branch".into()))?;
            total += &correction.superop * self.logical_superop(&ops);
            branches.push(BranchRecord {
                probability: (trace_weight(&ops[0]) + trace_weight(&ops[3])) / 2.0,
                outcomes: leaf.track.outcomes,
                magnitude,
                frame: FrameState::from_flips(leaf.track.flips),
            });
        }
        Ok(CycleResult { channel: QuantumChannel::from_superop(total, 2, 2)?, branches, t_wait: t })
    }
}

/// Composite images `E|a⟩⟨b|E†`, indexed `a + 2b`.
fn unit_images(iso: &CMatrix) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(4);
    for b in 0..2 {
        for a in 0..2 {
            out.push(iso.column(a) * iso.column(b).adjoint());
        }
    }
    out
}

fn lookup<'a>(table: &'a [(PulseSegment, CMatrix)], seg: &PulseSegment) -> Result<&'a CMatrix> {
    table
        .iter()
        .find(|(s, _)| s == seg)
        .map(|(_, m)| m)
        .ok_or_else(|| Error::InvalidArgument(format!("no propagator cached for {:?} segment", seg.kind)))
}

/// Pauli whose conjugation best matches a logical unitary channel, with the overlap `|Tr P†W|²/4`.
fn closest_pauli(g: &CMatrix) -> (char, f64) {
    let (x, y, z) = spin::pauli();
    let paulis = [('I', linalg::identity(2)), ('X', x.into_matrix()), ('Y', y.into_matrix()), ('Z', z.into_matrix())];
    paulis
        .iter()
        .map(|(name, p)| {
            let sp = linalg::kron(&p.map(|v| v.conj()), p);
            (*name, (sp.adjoint() * g).trace().re / 4.0)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four candidates")
}

/// One correction cycle: wait, detect, recover, frame-correct and decode.
pub fn run_cycle(spin: HalfInteger, noise: NoiseParams, t_wait: f64, options: &CycleOptions) -> Result<CycleResult> {
    CycleSimulator::new(spin, noise, options.clone())?.run(t_wait)
}
