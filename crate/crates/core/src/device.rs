//! Physical-unit arithmetic for donor species.
//!
//! Parameters are stored as ordinary frequencies (the `/2π` values quoted
//! for real devices): `gamma_e` in GHz/T, `gamma_n` in MHz/T, `a` in MHz,
//! `q` and the Rabi frequencies in kHz, fields in T (`bz`) and mT (`b1`).
//! Angular rates appear only inside conversions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::NoiseParams;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::protocol::{build_encoding, build_recovery, total_pulse_duration, Rabi, SegmentKind};
use crate::spin::{self, Basis, HalfInteger, Operator};

/// Electron manipulation time quoted for realistic ESR pulses, in ms.
pub const QUOTED_ELECTRON_MANIPULATION_MS: f64 = 0.1;
/// Fixed allowance for single-shot electron readout, in ms.
pub const READOUT_ALLOWANCE_MS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub spin: HalfInteger,
    pub gamma_e: f64,
    pub gamma_n: f64,
    pub a: f64,
    pub q: f64,
    pub bz: f64,
    pub b1: f64,
    pub omega_nuclear: f64,
    pub omega_electron: f64,
    /// Nuclear dephasing rate in 1/s, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_nuclear: Option<f64>,
    /// Electron dephasing rate in 1/s, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_electron: Option<f64>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        self.spin.require_spin()?;
        let fields = [
            ("gamma_e", self.gamma_e),
            ("gamma_n", self.gamma_n),
            ("a", self.a),
            ("q", self.q),
            ("bz", self.bz),
            ("b1", self.b1),
            ("omega_nuclear", self.omega_nuclear),
            ("omega_electron", self.omega_electron),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Config(format!("{name} must be a non-negative finite number, got {value}")));
            }
        }
        if !(self.a > 0.0) {
            return Err(Error::Config("hyperfine coupling a must be positive for conditional electron flips".into()));
        }
        for (name, rate) in [("dephasing_nuclear", self.dephasing_nuclear), ("dephasing_electron", self.dephasing_electron)] {
            if let Some(r) = rate {
                if !r.is_finite() || r < 0.0 {
                    return Err(Error::Config(format!("{name} must be non-negative, got {r}")));
                }
            }
        }
        Ok(())
    }

    /// Nuclear Rabi rate in rad/s.
    pub fn omega_nuclear_angular(&self) -> f64 {
        2.0 * PI * self.omega_nuclear * 1e3
    }

    /// Dimensionless dephasing rates relative to the nuclear Rabi rate.
    pub fn noise_params(&self) -> Result<NoiseParams> {
        let omega = self.omega_nuclear_angular();
        if !(omega > 0.0) {
            return Err(Error::Config("omega_nuclear must be positive to express rates in Rabi units".into()));
        }
        NoiseParams::new(self.dephasing_nuclear.unwrap_or(0.0) / omega, self.dephasing_electron.unwrap_or(0.0) / omega)
    }

    /// Rabi rates relative to the nuclear one.
    pub fn rabi(&self) -> Rabi {
        Rabi { nuclear: 1.0, electron: self.omega_electron / self.omega_nuclear }
    }

    /// `Q/Ω_n`, the ratio used to quantize waits.
    pub fn q_over_omega(&self) -> f64 {
        self.q / self.omega_nuclear
    }

    /// Quadrupole revival period `4π/Q`, in seconds.
    pub fn wait_quantum_s(&self) -> f64 {
        2.0 / (self.q * 1e3)
    }
}

/// Named parameter sets loaded from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeciesPresets(pub BTreeMap<String, PhysicalParams>);

impl SpeciesPresets {
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../data/species.json")).expect("bundled species presets are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let presets: Self = serde_json::from_str(text)?;
        for (name, p) in &presets.0 {
            p.validate().map_err(|e| Error::Config(format!("species {name}: {e}")))?;
        }
        Ok(presets)
    }

    pub fn get(&self, name: &str) -> Result<&PhysicalParams> {
        self.0.get(name).ok_or_else(|| Error::Config(format!("unknown species {name:?}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

pub fn arsenic() -> PhysicalParams {
    SpeciesPresets::bundled().get("arsenic").expect("arsenic preset").clone()
}

/// NMR frequency of transition `j` (1-based from the bottom of the ladder), in MHz.
///
/// Uses `(j - c) Q/2` with `c = I + 1/2`, so spin 3/2 gives `(j - 2) Q/2`.
pub fn nmr_frequency(params: &PhysicalParams, j: usize) -> Result<f64> {
    let twice = params.spin.twice() as usize;
    if j == 0 || j > twice {
        return Err(Error::InvalidArgument(format!("transition {j} outside 1..={twice} for spin {}", params.spin)));
    }
    let centre = params.spin.value() + 0.5;
    Ok(params.gamma_n * params.bz + params.a + (j as f64 - centre) * params.q * 1e-3 / 2.0)
}

/// ESR frequency with the nucleus in projection `k`, in GHz.
pub fn esr_frequency(params: &PhysicalParams, k: HalfInteger) -> Result<f64> {
    params.spin.index_of(k)?;
    Ok(params.gamma_e * params.bz + 2.0 * k.value() * params.a * 1e-3)
}

/// Transition frequencies of `Q I_z²/4` between `m = j - I` and `m - 1`, in MHz.
///
/// Cross-checks the closed form used by [`nmr_frequency`].
pub fn quadrupole_splittings(params: &PhysicalParams) -> Vec<f64> {
    let i = params.spin.value();
    (1..=params.spin.twice() as usize)
        .map(|j| {
            let m = j as f64 - i;
            params.q * 1e-3 * (m * m - (m - 1.0) * (m - 1.0)) / 4.0
        })
        .collect()
}

/// One row of the frequency table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumLine {
    pub kind: &'static str,
    pub label: String,
    pub frequency_hz: f64,
}

pub fn spectrum(params: &PhysicalParams) -> Result<Vec<SpectrumLine>> {
    params.validate()?;
    let mut lines = vec![];
    for j in 1..=params.spin.twice() as usize {
        let upper = HalfInteger::from_twice(2 * j as i32 - params.spin.twice());
        let lower = HalfInteger::from_twice(upper.twice() - 2);
        lines.push(SpectrumLine { kind: "nmr", label: format!("j={j} ({lower} <-> {upper})"), frequency_hz: nmr_frequency(params, j)? * 1e6 });
    }
    for k in params.spin.projections() {
        lines.push(SpectrumLine { kind: "esr", label: format!("k={k}"), frequency_hz: esr_frequency(params, k)? * 1e9 });
    }
    Ok(lines)
}

/// Tridiagonal multi-tone drive Hamiltonian in kHz, with tone amplitudes in mT.
///
/// Tone `j` couples levels `j` and `j + 1` with weight `c_j = 2 [I_x]_{j,j+1}`,
/// which for spin 3/2 gives `(√3, 2, √3)`.
pub fn grf_hamiltonian(params: &PhysicalParams, amplitudes_mt: &[f64]) -> Result<Operator> {
    let d = params.spin.dim();
    if amplitudes_mt.len() != d - 1 {
        return Err(Error::DimensionMismatch { expected: d - 1, found: amplitudes_mt.len() });
    }
    let ix = spin::angular_momentum_ops(params.spin)?.ix;
    let mut h = CMatrix::zeros(d, d);
    for (j, &b) in amplitudes_mt.iter().enumerate() {
        let cj = 2.0 * ix.matrix()[(j, j + 1)].re;
        let v = c(params.gamma_n * cj * b / 2.0);
        h[(j, j + 1)] = v;
        h[(j + 1, j)] = v;
    }
    Operator::new(h, Basis::Iz)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IxCalibration {
    pub amplitudes_mt: Vec<f64>,
    /// False when the drive is not slow against the quadrupole splitting.
    pub slow_drive: bool,
    /// True for spins beyond 3/2, where the tone pattern is extrapolated.
    pub extension: bool,
}

/// Tone amplitudes making [`grf_hamiltonian`] equal `Ω I_x`, for `Ω` in kHz.
pub fn calibrate_ix(params: &PhysicalParams, omega_khz: f64) -> Result<IxCalibration> {
    if !omega_khz.is_finite() || omega_khz < 0.0 {
        return Err(Error::Negative { name: "omega", value: omega_khz });
    }
    if !(params.gamma_n > 0.0) {
        return Err(Error::Config("gamma_n must be positive to calibrate a nuclear drive".into()));
    }
    let b = omega_khz / params.gamma_n;
    Ok(IxCalibration {
        amplitudes_mt: vec![b; params.spin.dim() - 1],
        slow_drive: omega_khz < params.q / 10.0,
        extension: params.spin.twice() > 3,
    })
}

/// Protocol step durations in ms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DurationReport {
    /// Worst-case encoding ladder (nuclear transitions only).
    pub encoding_ms: f64,
    /// Basis change `exp(∓i π/2 I_x)`.
    pub ix_rotation_ms: f64,
    /// One recovery ladder step.
    pub recovery_ms: f64,
    /// Electron π pulse at the configured Rabi rate.
    pub esr_pi_ms: f64,
    /// Quoted manipulation time plus the readout allowance.
    pub detection_ms: f64,
    pub wait_quantum_ms: f64,
}

pub fn duration_report(params: &PhysicalParams) -> Result<DurationReport> {
    params.validate()?;
    let omega = params.omega_nuclear_angular();
    if !(omega > 0.0) || !(params.omega_electron > 0.0) {
        return Err(Error::Config("Rabi frequencies must be positive".into()));
    }
    let to_ms = |t: f64| t / omega * 1e3;
    let encoding = build_encoding(params.spin, PI, 0.0, Rabi::default())?;
    let nuclear: f64 =
        encoding.all_segments().iter().filter(|s| s.kind == SegmentKind::NuclearTransition).map(|s| s.duration).sum();
    let recovery = build_recovery(params.spin, 1, Rabi::default())?;
    let ladder: f64 =
        recovery.iter().filter(|s| s.kind == SegmentKind::NuclearTransition).map(|s| s.duration).sum::<f64>();
    let rotation = total_pulse_duration(&recovery) - ladder;
    Ok(DurationReport {
        encoding_ms: to_ms(nuclear),
        ix_rotation_ms: to_ms(rotation),
        recovery_ms: to_ms(ladder),
        esr_pi_ms: 1.0 / (2.0 * params.omega_electron * 1e3) * 1e3,
        detection_ms: QUOTED_ELECTRON_MANIPULATION_MS + READOUT_ALLOWANCE_MS,
        wait_quantum_ms: params.wait_quantum_s() * 1e3,
    })
}

/// Phase lost while the readout distinguishes electron states: `A·dt`.
pub fn readout_phase_uncertainty(a: f64, dt: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Negative { name: "a", value: a });
    }
    if !(dt >= 0.0) {
        return Err(Error::Negative { name: "dt", value: dt });
    }
    Ok(a * dt)
}
