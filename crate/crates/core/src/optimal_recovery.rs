//! Recovery channels maximizing entanglement fidelity, found by a
//! semidefinite program over the recovery's Choi matrix.
//!
//! For a pipeline `E: 2 → d` and recovery `R: d → 2` the fidelity is linear
//! in `J(R)`: `F_e(R∘E) = Tr[J(R) M(E)]` with
//! `M[(j,b),(i,a)] = E(|a⟩⟨b|)_{ij} / 4`. The feasible set is
//! `{J ⪰ 0, Tr_out J = 𝟙_d}`; it is searched with ADMM, alternating a PSD
//! projection and an affine projection onto the trace-preserving plane.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::codes;
use crate::dynamics::{self, NoiseParams};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64};
use crate::spin::HalfInteger;

const LOGICAL_DIM: usize = 2;

/// Encoding plus noise, mapping the logical qubit into a `d`-level space.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    pipeline: QuantumChannel,
}

impl RecoveryProblem {
    pub fn new(pipeline: QuantumChannel) -> Result<Self> {
        if pipeline.dim_in() != LOGICAL_DIM {
            return Err(Error::DimensionMismatch { expected: LOGICAL_DIM, found: pipeline.dim_in() });
        }
        if pipeline.dim_out() > 16 {
            return Err(Error::InvalidArgument(format!("physical dimension {} exceeds 16", pipeline.dim_out())));
        }
        pipeline.check_cptp(1e-8)?;
        Ok(Self { pipeline })
    }

    /// `encode` conjugation followed by `noise`.
    pub fn from_encoding(encode: &CMatrix, noise: &QuantumChannel) -> Result<Self> {
        Self::new(noise.after(&QuantumChannel::from_operator(encode))?)
    }

    pub fn pipeline(&self) -> &QuantumChannel {
        &self.pipeline
    }

    pub fn physical_dim(&self) -> usize {
        self.pipeline.dim_out()
    }

    /// The Hermitian matrix `M` with `F_e(R∘E) = Tr[J(R) M]`.
    pub fn objective(&self) -> CMatrix {
        let d = self.physical_dim();
        let n = d * LOGICAL_DIM;
        let mut m = CMatrix::zeros(n, n);
        for a in 0..LOGICAL_DIM {
            for b in 0..LOGICAL_DIM {
                let mut unit = CMatrix::zeros(LOGICAL_DIM, LOGICAL_DIM);
                unit[(a, b)] = c(1.0);
                let image = linalg::apply_superop(self.pipeline.superop(), &unit, d);
                for i in 0..d {
                    for j in 0..d {
                        m[(j * LOGICAL_DIM + b, i * LOGICAL_DIM + a)] = image[(i, j)] * c(0.25);
                    }
                }
            }
        }
        m
    }

    /// `F_e(R∘E)` through the linearized objective.
    pub fn fidelity_of(&self, recovery: &QuantumChannel) -> Result<f64> {
        if recovery.dim_in() != self.physical_dim() || recovery.dim_out() != LOGICAL_DIM {
            return Err(Error::DimensionMismatch { expected: self.physical_dim(), found: recovery.dim_in() });
        }
        Ok(linalg::frobenius_inner(&recovery.choi(), &self.objective()).re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial ADMM penalty; adapted by residual balancing.
    pub penalty: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 100_000, penalty: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct OptimalRecovery {
    pub fidelity: f64,
    pub recovery: QuantumChannel,
    /// Certified upper bound on the optimum from the dual iterate.
    pub upper_bound: f64,
    pub iterations: usize,
}

impl OptimalRecovery {
    pub fn gap(&self) -> f64 {
        (self.upper_bound - self.fidelity).max(0.0)
    }
}

pub fn optimal_recovery(problem: &RecoveryProblem) -> Result<OptimalRecovery> {
    optimal_recovery_with(problem, SolverSettings::default())
}

pub fn optimal_recovery_with(problem: &RecoveryProblem, settings: SolverSettings) -> Result<OptimalRecovery> {
    let d = problem.physical_dim();
    let n = d * LOGICAL_DIM;
    let m = problem.objective();
    let scale = linalg::op_norm(&m).max(1e-12);
    // Work with M/‖M‖ so the stopping tolerance is relative.
    let mh = &m * c(1.0 / scale);
    let id_out = linalg::identity(LOGICAL_DIM);
    let project_affine = |w: &CMatrix| -> (CMatrix, CMatrix) {
        let excess = linalg::partial_trace_second(w, d, LOGICAL_DIM) - linalg::identity(d);
        let x = w - linalg::kron(&excess, &id_out) * c(0.5);
        (x, excess)
    };

    let mut rho = settings.penalty;
    let mut z = linalg::identity(n) * c(1.0 / LOGICAL_DIM as f64);
    let mut u = CMatrix::zeros(n, n);
    let mut dual_y = CMatrix::zeros(d, d);
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        iterations += 1;
        let w = &z - &u + &mh * c(1.0 / rho);
        let (x, excess) = project_affine(&w);
        let z_prev = z;
        z = linalg::psd_projection(&(&x + &u));
        u += &x - &z;
        primal = (&x - &z).norm();
        dual = rho * (&z - &z_prev).norm();
        dual_y = linalg::hermitize(&(excess * c(rho / 2.0)));
        if primal < settings.tolerance && dual < settings.tolerance {
            break;
        }
        if iterations % 50 == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u /= c(factor);
            }
        }
    }
    if !(primal < settings.tolerance && dual < settings.tolerance) {
        return Err(Error::SolverNotConverged { iterations, primal, dual });
    }

    let choi = restore_trace_preservation(&z, d)?;
    let recovery = QuantumChannel::from_choi(&choi, d, LOGICAL_DIM)?;
    let fidelity = linalg::frobenius_inner(&choi, &m).re;
    // Weak duality: Tr[JM] ≤ Tr Y + d·λ_max(M − Y⊗𝟙) for every feasible J.
    let y = dual_y * c(scale);
    let slack = &m - linalg::kron(&y, &id_out);
    let lambda_max = linalg::eigh(&slack).0.last().copied().unwrap_or(0.0);
    let upper_bound = y.trace().re + d as f64 * lambda_max;
    Ok(OptimalRecovery { fidelity, recovery, upper_bound: upper_bound.max(fidelity), iterations })
}

/// `(T^{-1/2} ⊗ 𝟙) Z (T^{-1/2} ⊗ 𝟙)` with `T = Tr_out Z`, exactly trace preserving.
fn restore_trace_preservation(z: &CMatrix, d: usize) -> Result<CMatrix> {
    let t = linalg::partial_trace_second(z, d, LOGICAL_DIM);
    let smallest = linalg::min_eigenvalue(&t);
    if smallest <= 1e-6 {
        return Err(Error::InvalidArgument(format!("solver iterate is far from trace preserving (min eigenvalue {smallest:.3e})")));
    }
    let inv_sqrt = linalg::hermitian_function(&t, |v| c(1.0 / v.sqrt()));
    let k = linalg::kron(&inv_sqrt, &linalg::identity(LOGICAL_DIM));
    Ok(linalg::hermitize(&(&k * z * &k)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum CodewordFile {
    Bare(Vec<Vec<Amplitude>>),
    Described { codewords: Vec<Vec<Amplitude>>, spin: Option<HalfInteger> },
}

/// Two orthonormal codewords in a six-level (spin-5/2) space.
#[derive(Clone, Debug)]
pub struct MinimalQuditCode {
    encode: CMatrix,
}

impl MinimalQuditCode {
    pub const DIM: usize = 6;
    pub const ORTHONORMALITY_TOL: f64 = 1e-10;

    pub fn spin() -> HalfInteger {
        HalfInteger::from_twice(5)
    }

    pub fn from_codewords(codewords: &[Vec<Amplitude>]) -> Result<Self> {
        if codewords.len() != 2 {
            return Err(Error::Config(format!("expected 2 codewords, found {}", codewords.len())));
        }
        for (k, word) in codewords.iter().enumerate() {
            if word.len() != Self::DIM {
                return Err(Error::Config(format!("codeword {k} has {} amplitudes, expected {}", word.len(), Self::DIM)));
            }
        }
        let encode = CMatrix::from_fn(Self::DIM, 2, |i, k| C64::new(codewords[k][i].re, codewords[k][i].im));
        let gram = encode.adjoint() * &encode;
        let deviation = linalg::max_abs(&(gram - linalg::identity(2)));
        if deviation > Self::ORTHONORMALITY_TOL {
            return Err(Error::Config(format!("codewords are not orthonormal (deviation {deviation:.3e})")));
        }
        Ok(Self { encode })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let codewords = match serde_json::from_str::<CodewordFile>(text)? {
            CodewordFile::Bare(words) => words,
            CodewordFile::Described { codewords, spin } => {
                if let Some(s) = spin {
                    if s != Self::spin() {
                        return Err(Error::Config(format!("minimal qudit code lives in spin 5/2, file says {s}")));
                    }
                }
                codewords
            }
        };
        Self::from_codewords(&codewords)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The codewords shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../data/minimal_qudit_d6.json")).expect("bundled codewords are valid")
    }

    pub fn encode(&self) -> &CMatrix {
        &self.encode
    }
}

/// Optimal-recovery fidelity of the minimal qudit code after free nuclear
/// dephasing, one point per wait time: `(Γ_n t, F_opt)`.
pub fn minimal_qudit_fidelity_curve(code: &MinimalQuditCode, noise: NoiseParams, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    noise.validate()?;
    t_grid
        .iter()
        .map(|&t| {
            let strength = noise.gamma_n * t;
            Ok((strength, minimal_qudit_fidelity(code, strength)?))
        })
        .collect()
}

/// Optimal-recovery fidelity of the minimal qudit code at dephasing strength `Γ_n t`.
pub fn minimal_qudit_fidelity(code: &MinimalQuditCode, strength: f64) -> Result<f64> {
    let noise = dynamics::nuclear_dephasing_channel(MinimalQuditCode::spin(), strength)?;
    let problem = RecoveryProblem::from_encoding(code.encode(), &noise)?;
    Ok(optimal_recovery(&problem)?.fidelity)
}

/// Optimal-recovery fidelity of the MAUS code under the same noise, for
/// comparison against the syndrome recovery.
pub fn maus_optimal_fidelity(spin: HalfInteger, strength: f64) -> Result<f64> {
    let code = codes::maus_code(spin)?;
    let noise = dynamics::nuclear_dephasing_channel(spin, strength)?;
    let problem = RecoveryProblem::from_encoding(&code.encode, &noise)?;
    Ok(optimal_recovery(&problem)?.fidelity)
}
