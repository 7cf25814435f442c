//! Completely positive maps stored as column-stacked superoperators.
//!
//! The Choi matrix is `J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` with the input factor on
//! the left. Kraus operators are read off its eigenvectors.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64};

/// Tolerance used when certifying complete positivity and trace preservation.
pub const CPTP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    superop: CMatrix,
}

impl QuantumChannel {
    pub fn from_superop(superop: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if superop.nrows() != dim_out * dim_out {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_out, found: superop.nrows() });
        }
        if superop.ncols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch { expected: dim_in * dim_in, found: superop.ncols() });
        }
        Ok(Self { dim_in, dim_out, superop })
    }

    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        let mut superop = CMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for k in kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch { expected: dim_out, found: k.nrows() });
            }
            superop += linalg::kron(&k.map(|z| z.conj()), k);
        }
        Ok(Self { dim_in, dim_out, superop })
    }

    /// Conjugation by a single (possibly rectangular) operator.
    pub fn from_operator(op: &CMatrix) -> Self {
        let superop = linalg::kron(&op.map(|z| z.conj()), op);
        Self { dim_in: op.ncols(), dim_out: op.nrows(), superop }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, superop: linalg::identity(dim * dim) }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim_in || rho.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: rho.nrows() });
        }
        Ok(linalg::apply_superop(&self.superop, rho, self.dim_out))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &QuantumChannel) -> Result<Self> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: first.dim_out });
        }
        Ok(Self { dim_in: first.dim_in, dim_out: self.dim_out, superop: &self.superop * &first.superop })
    }

    /// `first` then `second`, …, in application order.
    pub fn sequence(channels: &[&QuantumChannel]) -> Result<Self> {
        let mut iter = channels.iter();
        let first = iter.next().ok_or_else(|| Error::InvalidArgument("empty channel sequence".into()))?;
        iter.try_fold((*first).clone(), |acc, next| next.after(&acc))
    }

    pub fn add(&self, other: &QuantumChannel) -> Result<Self> {
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out) {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: other.dim_in });
        }
        Ok(Self { dim_in: self.dim_in, dim_out: self.dim_out, superop: &self.superop + &other.superop })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { superop: &self.superop * c(factor), ..self.clone() }
    }

    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        CMatrix::from_fn(n, n, |r, s| {
            let (i, a) = (r / dout, r % dout);
            let (j, b) = (s / dout, s % dout);
            self.superop[(a + dout * b, i + din * j)]
        })
    }

    pub fn from_choi(choi: &CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: choi.nrows() });
        }
        let superop = CMatrix::from_fn(dim_out * dim_out, dim_in * dim_in, |row, col| {
            let (a, b) = (row % dim_out, row / dim_out);
            let (i, j) = (col % dim_in, col / dim_in);
            choi[(i * dim_out + a, j * dim_out + b)]
        });
        Ok(Self { dim_in, dim_out, superop })
    }

    /// Kraus operators from the Choi spectrum, dropping weights below `cutoff`.
    pub fn kraus(&self, cutoff: f64) -> Vec<CMatrix> {
        let (values, vectors) = linalg::eigh(&self.choi());
        let dout = self.dim_out;
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > cutoff)
            .map(|(k, &v)| {
                let s = v.sqrt();
                CMatrix::from_fn(dout, self.dim_in, |a, i| vectors[(i * dout + a, k)] * s)
            })
            .collect()
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.choi())
    }

    /// Operator-norm distance of `Tr_out J` from the identity.
    pub fn trace_preservation_residual(&self) -> f64 {
        let reduced = linalg::partial_trace_second(&self.choi(), self.dim_in, self.dim_out);
        linalg::op_norm(&(reduced - linalg::identity(self.dim_in)))
    }

    /// `Tr_out J ≤ 𝟙` within tolerance, as for a single measurement branch.
    pub fn is_trace_nonincreasing(&self, tol: f64) -> bool {
        let reduced = linalg::partial_trace_second(&self.choi(), self.dim_in, self.dim_out);
        linalg::min_eigenvalue(&(linalg::identity(self.dim_in) - reduced)) >= -tol
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue() >= -tol && self.trace_preservation_residual() <= tol
    }

    /// Fails with the offending residual unless the channel is CPTP within `tol`.
    pub fn check_cptp(&self, tol: f64) -> Result<()> {
        let min = self.min_choi_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidArgument(format!("Choi matrix has eigenvalue {min:.3e}")));
        }
        let tp = self.trace_preservation_residual();
        if tp > tol {
            return Err(Error::NotTracePreserving(tp));
        }
        Ok(())
    }

    /// `Tr S / d²`, the entanglement fidelity with the identity for square channels.
    pub(crate) fn superop_trace_fidelity(&self) -> f64 {
        let d = self.dim_in as f64;
        (self.superop.trace() / C64::new(d * d, 0.0)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, ONE, ZERO};

    fn phase_flip(p: f64) -> QuantumChannel {
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        QuantumChannel::from_kraus(&[linalg::identity(2) * c((1.0 - p).sqrt()), z * c(p.sqrt())]).unwrap()
    }

    #[test]
    fn choi_round_trip() {
        let ch = phase_flip(0.3);
        let back = QuantumChannel::from_choi(&ch.choi(), 2, 2).unwrap();
        assert!(max_abs(&(back.superop() - ch.superop())) < 1e-14);
    }

    #[test]
    fn kraus_round_trip() {
        let ch = phase_flip(0.2);
        let rebuilt = QuantumChannel::from_kraus(&ch.kraus(1e-14)).unwrap();
        assert!(max_abs(&(rebuilt.superop() - ch.superop())) < 1e-12);
        assert!(ch.is_cptp(CPTP_TOL));
    }

    #[test]
    fn rectangular_composition() {
        let v = CMatrix::from_row_slice(3, 2, &[ONE, ZERO, ZERO, ZERO, ZERO, ONE]);
        let enc = QuantumChannel::from_operator(&v);
        let dec = QuantumChannel::from_operator(&v.adjoint());
        let round = dec.after(&enc).unwrap();
        assert!(max_abs(&(round.superop() - linalg::identity(4))) < 1e-15);
        assert!(enc.after(&enc).is_err());
    }

    #[test]
    fn non_tp_detected() {
        let ch = phase_flip(0.1).scale(0.5);
        assert!(matches!(ch.check_cptp(CPTP_TOL), Err(Error::NotTracePreserving(_))));
        assert!(ch.is_trace_nonincreasing(1e-12));
    }
}
