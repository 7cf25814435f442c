//! MAUS codespaces, ideal syndrome recovery, and the entanglement-fidelity
//! figure of merit.
//!
//! The logical qubit lives in the extremal `I_y` eigenstates, `|0⟩_L = |I⟩_y`
//! and `|1⟩_L = |-I⟩_y`. An `I_z` error moves `|±m⟩_y` to `|±(m-1)⟩_y`, so the
//! pairs `span{|±(I-k)⟩_y}` act as syndrome subspaces.

use crate::channel::{QuantumChannel, CPTP_TOL};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE};
use crate::spin::{self, HalfInteger, Operator, StateVector};

/// A syndrome subspace with the unitary that returns it to the codespace.
#[derive(Clone, Debug)]
pub struct Syndrome {
    /// Number of `I_z` steps separating this subspace from the codespace.
    pub magnitude: usize,
    pub projector: CMatrix,
    pub recovery: CMatrix,
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub spin: HalfInteger,
    /// Isometry `2 → 2I+1` whose columns are the logical codewords.
    pub encode: CMatrix,
    pub syndromes: Vec<Syndrome>,
}

impl CodeSpec {
    pub fn physical_dim(&self) -> usize {
        self.encode.nrows()
    }

    pub fn codeword(&self, logical: usize) -> StateVector {
        StateVector::new(self.encode.column(logical).into_owned()).expect("codewords are normalized")
    }

    pub fn codespace_projector(&self) -> CMatrix {
        &self.encode * self.encode.adjoint()
    }
}

/// Builds the spin-`I` MAUS code for `I ≥ 3/2`.
pub fn maus_code(spin: HalfInteger) -> Result<CodeSpec> {
    if spin.twice() < 3 || !spin.is_half_odd() {
        return Err(Error::InvalidSpin {
            spin: spin.to_string(),
            reason: "a half-odd spin of at least 3/2 is needed to detect and recover from one error",
        });
    }
    let d = spin.dim();
    let ops = spin::angular_momentum_ops(spin)?;
    let y = spin::y_eigenbasis(spin)?;
    // e^{-iπI_z} commutes with I_z and sends |m⟩_y to |-m⟩_y, so pairing
    // |I-k⟩_y with its image keeps I_z^a's action identical on both halves.
    let mirror = spin::rotation(&ops.iz, std::f64::consts::PI)?.into_matrix();
    let upper = |k: usize| y[k].as_vector().clone();
    let lower = |k: usize| &mirror * y[k].as_vector();

    let encode = CMatrix::from_columns(&[upper(0), y[d - 1].as_vector().clone()]);
    let count = d / 2;
    let syndromes = (0..count)
        .map(|k| {
            let (a, b) = (upper(k), lower(k));
            let projector = &a * a.adjoint() + &b * b.adjoint();
            let recovery = if k == 0 {
                linalg::identity(d)
            } else {
                let (a0, b0) = (upper(0), lower(0));
                let swap = |x: &CVector, y: &CVector| x * y.adjoint() + y * x.adjoint();
                let keep = linalg::identity(d) - &projector - (&a0 * a0.adjoint() + &b0 * b0.adjoint());
                keep + swap(&a0, &a) + swap(&b0, &b)
            };
            Syndrome { magnitude: k, projector, recovery }
        })
        .collect();
    Ok(CodeSpec { spin, encode, syndromes })
}

/// Two-level encoding in neighbouring `I_z` eigenstates `|±1/2⟩_z`: the best
/// uncorrected storage under dephasing.
pub fn neighboring_iz_encoding(spin: HalfInteger) -> Result<CMatrix> {
    iz_pair_encoding(spin, HalfInteger::from_twice(1))
}

/// Encoding in `|±m⟩_z`.
pub fn iz_pair_encoding(spin: HalfInteger, m: HalfInteger) -> Result<CMatrix> {
    let up = spin.index_of(m)?;
    let down = spin.index_of(HalfInteger::from_twice(-m.twice()))?;
    if up == down {
        return Err(Error::InvalidArgument("encoding levels coincide".into()));
    }
    let mut v = CMatrix::zeros(spin.dim(), 2);
    v[(up, 0)] = ONE;
    v[(down, 1)] = ONE;
    Ok(v)
}

/// `ρ ↦ Σ_k U_k P_k ρ P_k U_k†`.
pub fn ideal_recovery_channel(code: &CodeSpec) -> Result<QuantumChannel> {
    let kraus: Vec<CMatrix> = code.syndromes.iter().map(|s| &s.recovery * &s.projector).collect();
    QuantumChannel::from_kraus(&kraus)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnillLaflamme {
    pub satisfied: bool,
    pub residual: f64,
}

pub const KL_TOL: f64 = 1e-10;

/// Checks `⟨i_L|E_a†E_b|j_L⟩ = C_ab δ_ij` over all error pairs.
pub fn knill_laflamme_check(code: &CodeSpec, errors: &[Operator]) -> Result<KnillLaflamme> {
    let d = code.physical_dim();
    let v = &code.encode;
    let mut residual: f64 = 0.0;
    for ea in errors {
        if ea.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: ea.dim() });
        }
        for eb in errors {
            let m = v.adjoint() * ea.matrix().adjoint() * eb.matrix() * v;
            residual = residual.max(m[(0, 1)].norm()).max(m[(1, 0)].norm()).max((m[(0, 0)] - m[(1, 1)]).norm());
        }
    }
    Ok(KnillLaflamme { satisfied: residual < KL_TOL, residual })
}

/// `{I_z^0, …, I_z^p}`.
pub fn iz_power_errors(spin: HalfInteger, max_power: u32) -> Result<Vec<Operator>> {
    let ops = spin::angular_momentum_ops(spin)?;
    Ok((0..=max_power).map(|p| ops.iz.pow(p)).collect())
}

/// `⟨Φ|(E ⊗ id)(|Φ⟩⟨Φ|)|Φ⟩` for a trace-preserving channel on a qubit-sized space.
pub fn entanglement_fidelity(channel: &QuantumChannel) -> Result<f64> {
    if channel.dim_in() != channel.dim_out() {
        return Err(Error::DimensionMismatch { expected: channel.dim_in(), found: channel.dim_out() });
    }
    let tp = channel.trace_preservation_residual();
    if tp > CPTP_TOL {
        return Err(Error::NotTracePreserving(tp));
    }
    Ok(channel.superop_trace_fidelity())
}

/// `Σ_i |Tr K_i|² / d²`, the same quantity evaluated from a Kraus decomposition.
pub fn entanglement_fidelity_kraus(kraus: &[CMatrix]) -> f64 {
    let d = kraus.first().map_or(1, |k| k.nrows()) as f64;
    kraus.iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d)
}

/// Decoding map `ρ ↦ V†ρV + Tr[(𝟙 − VV†)ρ] 𝟙/2`.
///
/// Exactly the adjoint isometry when the input is supported on the
/// codespace; population outside it is read out as a random logical state.
pub fn decoding_channel(encode: &CMatrix) -> Result<QuantumChannel> {
    let d = encode.nrows();
    let k = encode.ncols();
    let mut kraus = vec![encode.adjoint()];
    let leak = linalg::identity(d) - encode * encode.adjoint();
    let (values, vectors) = linalg::eigh(&leak);
    for (idx, &v) in values.iter().enumerate() {
        if v > 0.5 {
            let col = vectors.column(idx);
            for out in 0..k {
                let mut e = CMatrix::zeros(k, d);
                for j in 0..d {
                    e[(out, j)] = col[j].conj() * c((1.0 / k as f64).sqrt());
                }
                kraus.push(e);
            }
        }
    }
    QuantumChannel::from_kraus(&kraus)
}

/// `decode ∘ recovery ∘ physical ∘ encode` for a logical qubit.
pub fn logical_channel(encode: &CMatrix, physical: &QuantumChannel, recovery: &QuantumChannel) -> Result<QuantumChannel> {
    let enc = QuantumChannel::from_operator(encode);
    let dec = decoding_channel(encode)?;
    QuantumChannel::sequence(&[&enc, physical, recovery, &dec])
}

/// Entanglement fidelity of the ideally corrected MAUS code after dephasing of strength `Γ_n t`.
pub fn ideal_corrected_fidelity(code: &CodeSpec, strength: f64) -> Result<f64> {
    let physical = dynamics::nuclear_dephasing_channel(code.spin, strength)?;
    let recovery = ideal_recovery_channel(code)?;
    entanglement_fidelity(&logical_channel(&code.encode, &physical, &recovery)?)
}

/// `1 - F_e` of the same corrected channel, accurate even when `F_e` rounds to 1.
///
/// Ideal recovery undoes encoding exactly, so the loss equals
/// `D∘R∘(id - N)∘E` and `id - N` is formed entrywise with `expm1`.
pub fn ideal_corrected_infidelity(code: &CodeSpec, strength: f64) -> Result<f64> {
    if !(strength >= 0.0) {
        return Err(Error::Negative { name: "Γ_n t", value: strength });
    }
    let d = code.physical_dim();
    let loss = CMatrix::from_fn(d, d, |r, s| {
        let dm = code.spin.projection_at(r).value() - code.spin.projection_at(s).value();
        c(-(-strength * dm * dm / 2.0).exp_m1())
    });
    let loss = CMatrix::from_diagonal(&linalg::vec(&loss));
    let enc = QuantumChannel::from_operator(&code.encode);
    let dec = decoding_channel(&code.encode)?;
    let rec = ideal_recovery_channel(code)?;
    let s = dec.superop() * rec.superop() * loss * enc.superop();
    Ok(s.trace().re / 4.0)
}

/// Uncorrected `|±1/2⟩_z` storage: `(1 + e^{-Γ_n t/2})/2`.
pub fn breakeven_baseline(strength: f64) -> f64 {
    (1.0 + (-strength / 2.0).exp()) / 2.0
}

/// `1 - breakeven_baseline(Γ_n t)` without cancellation.
pub fn breakeven_baseline_infidelity(strength: f64) -> f64 {
    -(-strength / 2.0).exp_m1() / 2.0
}

/// Uncorrected storage in `|±m⟩_z`: `(1 + e^{-2m²Γ_n t})/2`.
pub fn iz_pair_baseline(m: HalfInteger, strength: f64) -> f64 {
    let gap = f64::from(m.twice());
    (1.0 + (-gap * gap * strength / 2.0).exp()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn h(twice: i32) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn syndrome_counts() {
        assert_eq!(maus_code(h(3)).unwrap().syndromes.len(), 2);
        assert_eq!(maus_code(h(5)).unwrap().syndromes.len(), 3);
        for s in maus_code(h(5)).unwrap().syndromes {
            assert!((s.projector.trace().re - 2.0).abs() < 1e-12);
        }
        assert!(maus_code(h(1)).is_err());
        assert!(maus_code(h(4)).is_err());
    }

    #[test]
    fn code_structure_invariants() {
        for twice in [3, 5, 7, 9] {
            let code = maus_code(h(twice)).unwrap();
            let d = code.physical_dim();
            assert!(max_abs(&(code.encode.adjoint() * &code.encode - linalg::identity(2))) < 1e-12);
            let total: CMatrix = code.syndromes.iter().map(|s| s.projector.clone()).fold(CMatrix::zeros(d, d), |a, b| a + b);
            assert!(max_abs(&(total - linalg::identity(d))) < 1e-10);
            for (i, a) in code.syndromes.iter().enumerate() {
                let u = Operator::new(a.recovery.clone(), spin::Basis::Iz).unwrap();
                assert!(u.is_unitary(1e-10));
                for b in &code.syndromes[i + 1..] {
                    assert!(max_abs(&(&a.projector * &b.projector)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn iz_moves_codewords_into_first_syndrome() {
        let code = maus_code(h(3)).unwrap();
        let ops = spin::angular_momentum_ops(h(3)).unwrap();
        let y = spin::y_eigenbasis(h(3)).unwrap();
        for (logical, target) in [(0, 1), (1, 2)] {
            let moved = ops.iz.matrix() * code.codeword(logical).as_vector();
            assert!((moved.norm() - 3f64.sqrt() / 2.0).abs() < 1e-12);
            assert!((y[target].as_vector().dotc(&moved).norm() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn recovery_leaves_codewords_alone() {
        let code = maus_code(h(5)).unwrap();
        let r = ideal_recovery_channel(&code).unwrap();
        for l in 0..2 {
            let rho = code.codeword(l).projector();
            assert!(max_abs(&(r.apply(&rho).unwrap() - &rho)) < 1e-12);
        }
    }

    #[test]
    fn kl_conditions() {
        let code = maus_code(h(3)).unwrap();
        let ok = knill_laflamme_check(&code, &iz_power_errors(h(3), 1).unwrap()).unwrap();
        assert!(ok.satisfied && ok.residual < 1e-10);
        let bad = knill_laflamme_check(&code, &iz_power_errors(h(3), 2).unwrap()).unwrap();
        assert!(!bad.satisfied);
    }

    #[test]
    fn entanglement_fidelity_cases() {
        let id = QuantumChannel::identity(2);
        assert!((entanglement_fidelity(&id).unwrap() - 1.0).abs() < 1e-15);
        let p: f64 = 0.27;
        let z = CMatrix::from_row_slice(2, 2, &[ONE, c(0.0), c(0.0), -ONE]);
        let kraus = [linalg::identity(2) * c((1.0 - p).sqrt()), z * c(p.sqrt())];
        let flip = QuantumChannel::from_kraus(&kraus).unwrap();
        assert!((entanglement_fidelity(&flip).unwrap() - (1.0 - p)).abs() < 1e-14);
        assert!((entanglement_fidelity_kraus(&kraus) - (1.0 - p)).abs() < 1e-14);
        let (sx, sy, sz) = spin::pauli();
        let depol: Vec<CMatrix> =
            [linalg::identity(2), sx.into_matrix(), sy.into_matrix(), sz.into_matrix()].into_iter().map(|k| k * c(0.5)).collect();
        let dep = QuantumChannel::from_kraus(&depol).unwrap();
        assert!((entanglement_fidelity(&dep).unwrap() - 0.25).abs() < 1e-14);
        assert!(entanglement_fidelity(&id.scale(0.5)).is_err());
    }

    #[test]
    fn neighbouring_encoding_matches_closed_form() {
        for strength in [0.0, 0.01, 0.3, 2.0 * 2f64.ln(), 4.0] {
            let v = neighboring_iz_encoding(h(3)).unwrap();
            let phys = dynamics::nuclear_dephasing_channel(h(3), strength).unwrap();
            let f = entanglement_fidelity(&logical_channel(&v, &phys, &QuantumChannel::identity(4)).unwrap()).unwrap();
            assert!((f - breakeven_baseline(strength)).abs() < 1e-12);
            let ext = iz_pair_encoding(h(3), h(3)).unwrap();
            let fe = entanglement_fidelity(&logical_channel(&ext, &phys, &QuantumChannel::identity(4)).unwrap()).unwrap();
            assert!((fe - iz_pair_baseline(h(3), strength)).abs() < 1e-12);
            assert!(fe <= breakeven_baseline(strength) + 1e-15);
        }
        assert!((breakeven_baseline(2.0 * 2f64.ln()) - 0.75).abs() < 1e-15);
        assert_eq!(breakeven_baseline(0.0), 1.0);
    }

    #[test]
    fn no_second_order_term_after_correction() {
        // A coherent rotation e^{-iεI_z} on |0⟩_L leaves infidelity O(ε⁴).
        let code = maus_code(h(3)).unwrap();
        let ops = spin::angular_momentum_ops(h(3)).unwrap();
        let r = ideal_recovery_channel(&code).unwrap();
        let psi = code.codeword(0).as_vector() * c(0.3f64.cos())
            + code.codeword(1).as_vector() * (crate::linalg::C64::from_polar(0.3f64.sin(), 0.7));
        let mut ratios: Vec<f64> = vec![];
        for eps in [1e-2, 1e-3] {
            let u = spin::rotation(&ops.iz, eps).unwrap();
            let out = r.apply(&((u.matrix() * &psi) * (u.matrix() * &psi).adjoint())).unwrap();
            let infid = 1.0 - (psi.adjoint() * out * &psi)[(0, 0)].re;
            ratios.push(infid / eps.powi(4));
            assert!(infid < 10.0 * eps.powi(4), "eps {eps}: {infid}");
        }
        assert!((ratios[0] / ratios[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn decoding_is_cptp() {
        let code = maus_code(h(5)).unwrap();
        assert!(decoding_channel(&code.encode).unwrap().is_cptp(1e-12));
    }

    #[test]
    fn precise_infidelity_agrees_with_fidelity() {
        for twice in [3, 5, 7] {
            let code = maus_code(HalfInteger::from_twice(twice)).unwrap();
            for x in [1e-2, 0.3, 1.0] {
                let f = ideal_corrected_fidelity(&code, x).unwrap();
                assert!((ideal_corrected_infidelity(&code, x).unwrap() - (1.0 - f)).abs() < 1e-12);
            }
            let tiny = ideal_corrected_infidelity(&code, 1e-5).unwrap();
            assert!(tiny > 0.0 && tiny < 1e-9);
        }
        assert!((breakeven_baseline_infidelity(1e-9) / 2.5e-10 - 1.0).abs() < 1e-9);
    }
}
