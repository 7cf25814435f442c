//! Dephasing Lindbladian, rotating-frame drives, and their exact propagators.
//!
//! Rates and times are expressed in units of the Rabi frequency Ω. The
//! composite space is nucleus ⊗ electron with the electron basis `|↑⟩, |↓⟩`.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64, I, ONE};
use crate::spin::{self, Basis, DensityMatrix, HalfInteger, Operator};

/// Dephasing rates `Γ_n` (nucleus) and `Γ_e` (electron).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub gamma_n: f64,
    pub gamma_e: f64,
}

impl NoiseParams {
    pub fn new(gamma_n: f64, gamma_e: f64) -> Result<Self> {
        let noise = Self { gamma_n, gamma_e };
        noise.validate()?;
        Ok(noise)
    }

    pub const fn noiseless() -> Self {
        Self { gamma_n: 0.0, gamma_e: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_n >= 0.0) {
            return Err(Error::Negative { name: "gamma_n", value: self.gamma_n });
        }
        if !(self.gamma_e >= 0.0) {
            return Err(Error::Negative { name: "gamma_e", value: self.gamma_e });
        }
        Ok(())
    }
}

/// Column-stacked generator `𝓛` of `ρ̇ = 𝓛ρ` on a Hilbert space of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn new(matrix: CMatrix, dim: usize) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Adds the coherent part `-i[H, ·]`.
    pub fn with_hamiltonian(&self, h: &Operator) -> Result<Self> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: h.dim() });
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix + linalg::hamiltonian_superop(h.matrix()) })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        linalg::apply_superop(&self.matrix, rho, self.dim)
    }
}

/// `Γ_n 𝒟[I_z ⊗ 𝟙] + ½Γ_e 𝒟[𝟙 ⊗ σ_z]` on the composite space.
pub fn dephasing_generator(spin: HalfInteger, noise: NoiseParams) -> Result<Liouvillian> {
    noise.validate()?;
    let ops = spin::angular_momentum_ops(spin)?;
    let (_, _, sz) = spin::pauli();
    let dim = 2 * spin.dim();
    let ln = spin::compose_systems(&ops.iz, &Operator::identity(2, Basis::Iz)).scale(noise.gamma_n.sqrt());
    let le = spin::compose_systems(&Operator::identity(spin.dim(), Basis::Iz), &sz).scale((noise.gamma_e / 2.0).sqrt());
    let matrix = linalg::dissipator(ln.matrix()) + linalg::dissipator(le.matrix());
    Liouvillian::new(matrix, dim)
}

/// `Γ_n 𝒟[I_z]` on the nucleus alone.
pub fn nuclear_dephasing_generator(spin: HalfInteger, gamma_n: f64) -> Result<Liouvillian> {
    if !(gamma_n >= 0.0) {
        return Err(Error::Negative { name: "gamma_n", value: gamma_n });
    }
    let ops = spin::angular_momentum_ops(spin)?;
    let l = ops.iz.scale(gamma_n.sqrt());
    Liouvillian::new(linalg::dissipator(l.matrix()), spin.dim())
}

/// Multipliers applied entrywise to a composite density matrix by free
/// dephasing over time `t`.
pub fn dephasing_factors(spin: HalfInteger, noise: NoiseParams, t: f64) -> Result<CMatrix> {
    noise.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Negative { name: "t", value: t });
    }
    spin.require_spin()?;
    let dim = 2 * spin.dim();
    // σ_z eigenvalues ±1; ½Γ_e 𝒟[σ_z] damps |↑⟩⟨↓| at Γ_e (z − z')²/4.
    let label = |k: usize| -> (f64, f64) { (spin.projection_at(k / 2).value(), if k.is_multiple_of(2) { 1.0 } else { -1.0 }) };
    Ok(CMatrix::from_fn(dim, dim, |r, s| {
        let (m, z) = label(r);
        let (n, zp) = label(s);
        let rate = noise.gamma_n * (m - n).powi(2) / 2.0 + noise.gamma_e * (z - zp).powi(2) / 4.0;
        c((-rate * t).exp())
    }))
}

fn diagonal_superop(factors: &CMatrix) -> CMatrix {
    let v = linalg::vec(factors);
    CMatrix::from_diagonal(&v)
}

/// Exact propagator of the dephasing master equation on the composite space.
pub fn free_evolution_channel(spin: HalfInteger, noise: NoiseParams, t: f64) -> Result<QuantumChannel> {
    let factors = dephasing_factors(spin, noise, t)?;
    let dim = factors.nrows();
    QuantumChannel::from_superop(diagonal_superop(&factors), dim, dim)
}

/// Nucleus-only dephasing for dimensionless strength `Γ_n t`.
pub fn nuclear_dephasing_channel(spin: HalfInteger, strength: f64) -> Result<QuantumChannel> {
    if !(strength >= 0.0) {
        return Err(Error::Negative { name: "Γ_n t", value: strength });
    }
    spin.require_spin()?;
    let d = spin.dim();
    let factors = CMatrix::from_fn(d, d, |r, s| {
        let dm = spin.projection_at(r).value() - spin.projection_at(s).value();
        c((-strength * dm * dm / 2.0).exp())
    });
    QuantumChannel::from_superop(diagonal_superop(&factors), d, d)
}

/// Resonant rotating-wave drive `-Ω/2 Σ (σ_x cos φ + σ_y sin φ)` on disjoint level pairs.
///
/// Each pair is `(p, q)` with `p` the upper level; evolving for `τ` applies
/// `exp[iΩτ(σ_x cos φ + σ_y sin φ)/2]` to every pair at once.
pub fn rwa_pulse_hamiltonian(dim: usize, targets: &[(usize, usize)], phase: f64, rabi: f64) -> Result<Operator> {
    let mut seen = vec![false; dim];
    let mut h = CMatrix::zeros(dim, dim);
    let coupling = C64::from_polar(1.0, -phase) * c(-rabi / 2.0);
    for &(p, q) in targets {
        for level in [p, q] {
            if level >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: level + 1 });
            }
            if seen[level] {
                return Err(Error::OverlappingPairs(level));
            }
            seen[level] = true;
        }
        // σ_x cos φ + σ_y sin φ has ⟨p|·|q⟩ = e^{-iφ}.
        h[(p, q)] += coupling;
        h[(q, p)] += coupling.conj();
    }
    Operator::new(h, Basis::Iz)
}

/// Exact channel of a constant-Liouvillian segment, `exp[(−i[H,·] + 𝓛) τ]`.
pub fn channel_of_segment(h: &Operator, generator: &Liouvillian, duration: f64) -> Result<QuantumChannel> {
    if !(duration >= 0.0) {
        return Err(Error::Negative { name: "duration", value: duration });
    }
    let total = generator.with_hamiltonian(h)?;
    let propagator = linalg::expm(&(total.matrix * c(duration)));
    QuantumChannel::from_superop(propagator, generator.dim, generator.dim)
}

pub fn evolve_piecewise(
    h: &Operator,
    generator: &Liouvillian,
    rho: &DensityMatrix,
    duration: f64,
) -> Result<DensityMatrix> {
    let channel = channel_of_segment(h, generator, duration)?;
    Ok(DensityMatrix::from_matrix_unchecked(linalg::hermitize(&channel.apply(rho.matrix())?)))
}

/// Fixed-step RK4 integration of the same equation, kept as an independent
/// check on [`evolve_piecewise`].
pub fn evolve_rk4(h: &Operator, generator: &Liouvillian, rho: &DensityMatrix, duration: f64) -> Result<DensityMatrix> {
    if !(duration >= 0.0) {
        return Err(Error::Negative { name: "duration", value: duration });
    }
    if h.dim() != generator.dim || rho.dim() != generator.dim {
        return Err(Error::DimensionMismatch { expected: generator.dim, found: h.dim() });
    }
    let scale = h.matrix().norm() + generator.matrix.norm();
    let max_step = if scale > 0.0 { 1e-3 / scale } else { duration.max(1e-300) };
    let steps = (duration / max_step).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let hm = h.matrix();
    let rhs = |r: &CMatrix| -> CMatrix { (hm * r - r * hm) * (-I) + generator.apply(r) };
    let mut r = rho.matrix().clone();
    for _ in 0..steps {
        let k1 = rhs(&r);
        let k2 = rhs(&(&r + &k1 * c(dt / 2.0)));
        let k3 = rhs(&(&r + &k2 * c(dt / 2.0)));
        let k4 = rhs(&(&r + &k3 * c(dt)));
        r += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Integration(format!("non-finite state after {steps} steps")));
    }
    Ok(DensityMatrix::from_matrix_unchecked(linalg::hermitize(&r)))
}

/// `(d F_e + 1)/(d + 1)` of `U† ∘ E` for a channel on a `d`-level space.
pub fn average_gate_fidelity(channel: &QuantumChannel, ideal: &CMatrix) -> Result<f64> {
    let d = channel.dim_in();
    if channel.dim_out() != d || ideal.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: ideal.nrows() });
    }
    let undo = QuantumChannel::from_operator(&ideal.adjoint());
    let fe = undo.after(channel)?.superop_trace_fidelity();
    Ok((d as f64 * fe + 1.0) / (d as f64 + 1.0))
}

/// Restriction of a channel to the span of the given basis levels.
pub fn restrict_to_levels(channel: &QuantumChannel, levels: &[usize]) -> Result<QuantumChannel> {
    let d = channel.dim_in();
    let mut v = CMatrix::zeros(d, levels.len());
    for (col, &level) in levels.iter().enumerate() {
        if level >= d {
            return Err(Error::DimensionMismatch { expected: d, found: level + 1 });
        }
        v[(level, col)] = ONE;
    }
    let embed = QuantumChannel::from_operator(&v);
    let compress = QuantumChannel::from_operator(&v.adjoint());
    QuantumChannel::sequence(&[&embed, channel, &compress])
}

/// Average gate fidelity of a π pulse on nuclear transition `j` (1-based,
/// `|I-j+1⟩ ↔ |I-j⟩`) under `Γ_n 𝒟[I_z]`, evaluated on the driven pair.
pub fn nuclear_pi_pulse_fidelity(spin: HalfInteger, gamma_n: f64, transition: usize) -> Result<f64> {
    let d = spin.dim();
    if transition == 0 || transition >= d {
        return Err(Error::InvalidArgument(format!("transition {transition} outside 1..={}", d - 1)));
    }
    let pair = (transition - 1, transition);
    let h = rwa_pulse_hamiltonian(d, &[pair], 0.0, 1.0)?;
    let generator = nuclear_dephasing_generator(spin, gamma_n)?;
    let full = channel_of_segment(&h, &generator, std::f64::consts::PI)?;
    let sub = restrict_to_levels(&full, &[pair.0, pair.1])?;
    average_gate_fidelity(&sub, &ideal_pi_rotation())
}

/// Average gate fidelity of an electron π pulse under `½Γ_e 𝒟[σ_z]`.
pub fn electron_pi_pulse_fidelity(gamma_e: f64) -> Result<f64> {
    if !(gamma_e >= 0.0) {
        return Err(Error::Negative { name: "gamma_e", value: gamma_e });
    }
    let (_, _, sz) = spin::pauli();
    let generator = Liouvillian::new(linalg::dissipator(&(sz.matrix() * c((gamma_e / 2.0).sqrt()))), 2)?;
    let h = rwa_pulse_hamiltonian(2, &[(0, 1)], 0.0, 1.0)?;
    let channel = channel_of_segment(&h, &generator, std::f64::consts::PI)?;
    average_gate_fidelity(&channel, &ideal_pi_rotation())
}

/// `R₀(π) = exp(iπσ_x/2) = iσ_x`.
fn ideal_pi_rotation() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), I, I, c(0.0)])
}
