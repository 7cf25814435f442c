//! Pulse schedules with measurement branches, serializable to JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::HalfInteger;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    /// RWA drive on disjoint pairs of nuclear levels.
    NuclearTransition,
    /// Electron flip conditioned on the nuclear projection.
    ElectronConditional,
    /// Multi-tone drive realizing a rotation about `I_x`.
    GlobalIx,
    Wait,
    MeasureElectron,
}

/// One piecewise-constant control interval.
///
/// `targets` holds nuclear level-index pairs (upper level first) for
/// nuclear transitions; `conditions` holds the nuclear projections that
/// condition an electron flip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<HalfInteger>,
    pub phase: f64,
    pub angle: f64,
    pub rabi: f64,
    pub duration: f64,
}

impl PulseSegment {
    pub fn nuclear(targets: Vec<[usize; 2]>, phase: f64, angle: f64, rabi: f64) -> Self {
        Self { kind: SegmentKind::NuclearTransition, targets, conditions: vec![], phase, angle, rabi, duration: angle / rabi }
    }

    pub fn electron_conditional(conditions: Vec<HalfInteger>, angle: f64, rabi: f64) -> Self {
        Self {
            kind: SegmentKind::ElectronConditional,
            targets: vec![],
            conditions,
            phase: 0.0,
            angle,
            rabi,
            duration: angle / rabi,
        }
    }

    /// `exp(-i θ I_x)`; a negative angle reverses the drive.
    pub fn global_ix(angle: f64, rabi: f64) -> Self {
        Self { kind: SegmentKind::GlobalIx, targets: vec![], conditions: vec![], phase: 0.0, angle, rabi, duration: angle.abs() / rabi }
    }

    pub fn wait(duration: f64) -> Self {
        Self { kind: SegmentKind::Wait, targets: vec![], conditions: vec![], phase: 0.0, angle: 0.0, rabi: 0.0, duration }
    }

    pub fn measure() -> Self {
        Self { kind: SegmentKind::MeasureElectron, targets: vec![], conditions: vec![], phase: 0.0, angle: 0.0, rabi: 0.0, duration: 0.0 }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self.kind, SegmentKind::NuclearTransition | SegmentKind::ElectronConditional | SegmentKind::GlobalIx)
    }

    pub fn validate(&self, spin: HalfInteger) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !self.duration.is_finite() || !self.angle.is_finite() || !self.phase.is_finite() {
            return bad(format!("{:?} segment has non-finite parameters", self.kind));
        }
        match self.kind {
            SegmentKind::MeasureElectron => {
                if self.duration != 0.0 {
                    return bad("measurement is instantaneous".into());
                }
            }
            SegmentKind::Wait => {
                if self.duration < 0.0 {
                    return Err(Error::Negative { name: "wait", value: self.duration });
                }
            }
            _ => {
                if !(self.rabi > 0.0) || !(self.duration > 0.0) {
                    return bad(format!("{:?} pulse needs positive Rabi rate and duration", self.kind));
                }
                if ((self.angle.abs() / self.rabi) - self.duration).abs() > 1e-12 * self.duration.max(1.0) {
                    return bad(format!("{:?} pulse duration disagrees with angle / Rabi rate", self.kind));
                }
            }
        }
        let d = spin.dim();
        for &[p, q] in &self.targets {
            if p >= d || q >= d || p == q {
                return bad(format!("level pair ({p}, {q}) invalid for spin {spin}"));
            }
        }
        for &m in &self.conditions {
            spin.index_of(m)?;
        }
        Ok(())
    }
}

/// What a schedule branch concludes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Terminal {
    /// Cycle end after recovering from syndrome `magnitude`.
    CycleEnd { magnitude: usize },
    /// Decoding read out this logical value (before frame relabeling).
    Logical { value: u8 },
    /// Decoding saw neither flip: the state left the codespace.
    Erasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum Step {
    Pulse(PulseSegment),
    /// Projective electron measurement; "flipped" means the electron was
    /// found opposite to its state before the preceding conditional pulse.
    Measure { flipped: Vec<Step>, unflipped: Vec<Step> },
    End(Terminal),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub spin: HalfInteger,
    pub steps: Vec<Step>,
}

impl Schedule {
    pub fn new(spin: HalfInteger, steps: Vec<Step>) -> Result<Self> {
        let schedule = Self { spin, steps };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Checks every segment and that each measurement ends its step list
    /// with two branches that both terminate.
    pub fn validate(&self) -> Result<()> {
        fn check(steps: &[Step], spin: HalfInteger, inside_branch: bool) -> Result<()> {
            for (idx, step) in steps.iter().enumerate() {
                let last = idx + 1 == steps.len();
                match step {
                    Step::Pulse(seg) if seg.kind == SegmentKind::MeasureElectron => {
                        return Err(Error::InvalidArgument("measurements must be measure steps with two branches".into()));
                    }
                    Step::Pulse(seg) => seg.validate(spin)?,
                    Step::Measure { flipped, unflipped } => {
                        if !last {
                            return Err(Error::InvalidArgument("steps after a measurement are unreachable".into()));
                        }
                        check(flipped, spin, true)?;
                        check(unflipped, spin, true)?;
                    }
                    Step::End(_) => {
                        if !last {
                            return Err(Error::InvalidArgument("steps after an end marker are unreachable".into()));
                        }
                    }
                }
            }
            if inside_branch && !matches!(steps.last(), Some(Step::End(_) | Step::Measure { .. })) {
                return Err(Error::InvalidArgument("measurement branch does not terminate".into()));
            }
            Ok(())
        }
        self.spin.require_spin()?;
        check(&self.steps, self.spin, false)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schedule: Self = serde_json::from_str(text)?;
        schedule.validate()?;
        Ok(schedule)
    }

    /// Every outcome path through the measurement tree, with its terminal.
    pub fn paths(&self) -> Vec<(Vec<bool>, Option<Terminal>)> {
        fn go(steps: &[Step], prefix: &mut Vec<bool>, out: &mut Vec<(Vec<bool>, Option<Terminal>)>) {
            match steps.last() {
                Some(Step::Measure { flipped, unflipped }) => {
                    prefix.push(true);
                    go(flipped, prefix, out);
                    prefix.pop();
                    prefix.push(false);
                    go(unflipped, prefix, out);
                    prefix.pop();
                }
                Some(Step::End(t)) => out.push((prefix.clone(), Some(*t))),
                _ => out.push((prefix.clone(), None)),
            }
        }
        let mut out = vec![];
        go(&self.steps, &mut vec![], &mut out);
        out
    }

    /// The flat segment list followed along `outcomes`, measurements included.
    pub fn segments_along(&self, outcomes: &[bool]) -> Result<Vec<PulseSegment>> {
        let mut steps = self.steps.as_slice();
        let mut remaining = outcomes.iter();
        let mut out = vec![];
        loop {
            for step in steps {
                match step {
                    Step::Pulse(seg) => out.push(seg.clone()),
                    Step::End(_) => {}
                    Step::Measure { .. } => out.push(PulseSegment::measure()),
                }
            }
            match steps.last() {
                Some(Step::Measure { flipped, unflipped }) => {
                    let flip = remaining
                        .next()
                        .ok_or_else(|| Error::InvalidArgument("outcome list ends before the schedule does".into()))?;
                    steps = if *flip { flipped } else { unflipped };
                }
                _ => break,
            }
        }
        if remaining.next().is_some() {
            return Err(Error::InvalidArgument("more outcomes than measurements".into()));
        }
        Ok(out)
    }

    /// Every pulse and wait in tree order, each branch visited once.
    pub fn all_segments(&self) -> Vec<PulseSegment> {
        fn go(steps: &[Step], out: &mut Vec<PulseSegment>) {
            for step in steps {
                match step {
                    Step::Pulse(seg) => out.push(seg.clone()),
                    Step::Measure { flipped, unflipped } => {
                        go(flipped, out);
                        go(unflipped, out);
                    }
                    Step::End(_) => {}
                }
            }
        }
        let mut out = vec![];
        go(&self.steps, &mut out);
        out
    }

    /// Largest number of measurements along any path.
    pub fn max_measurements(&self) -> usize {
        self.paths().iter().map(|(p, _)| p.len()).max().unwrap_or(0)
    }
}

/// Sum of pulse angles (ignoring waits) along a segment list.
pub fn total_pulse_angle(segments: &[PulseSegment]) -> f64 {
    segments.iter().filter(|s| s.is_pulse()).map(|s| s.angle.abs()).sum()
}

/// Sum of pulse durations (ignoring waits) along a segment list.
pub fn total_pulse_duration(segments: &[PulseSegment]) -> f64 {
    segments.iter().filter(|s| s.is_pulse()).map(|s| s.duration).sum()
}
