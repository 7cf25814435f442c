//! Dense complex matrix helpers shared by every module.
//!
//! Superoperators use the column-stacking convention: `vec(A X B) =
//! (Bᵀ ⊗ A) vec(X)`. nalgebra stores matrices column-major, so `vec` is the
//! raw storage slice.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hermitian part, used to scrub rounding asymmetry before eigensolves.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| f(v))));
    &vectors * diag * vectors.adjoint()
}

/// Spectral norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let (values, _) = eigh(&gram);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Projection onto the positive semidefinite cone in Frobenius norm.
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |v| c(v.max(0.0)))
}

pub fn vec(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Applies a column-stacked superoperator to an operator.
pub fn apply_superop(superop: &CMatrix, m: &CMatrix, dim_out: usize) -> CMatrix {
    unvec(&(superop * vec(m)), dim_out)
}

/// Superoperator of `X ↦ A X B`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), a)
}

/// Superoperator of `ρ ↦ -i[H, ρ]`.
pub fn hamiltonian_superop(h: &CMatrix) -> CMatrix {
    let id = identity(h.nrows());
    (sandwich(h, &id) - sandwich(&id, h)) * (-I)
}

/// Superoperator of `D[L]ρ = LρL† - ½{L†L, ρ}`.
pub fn dissipator(l: &CMatrix) -> CMatrix {
    let id = identity(l.nrows());
    let ldl = l.adjoint() * l;
    sandwich(l, &l.adjoint()) - (sandwich(&ldl, &id) + sandwich(&id, &ldl)) * c(0.5)
}

/// Trace over the second factor of a `d1·d2` bipartite operator.
pub fn partial_trace_second(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum())
}

/// Trace over the first factor of a `d1·d2` bipartite operator.
pub fn partial_trace_first(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d2, d2, |a, b| (0..d1).map(|k| m[(k * d2 + a, k * d2 + b)]).sum())
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_matches_direct_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 0.25 * i as f64));
        let x = CMatrix::from_fn(3, 3, |i, j| C64::new(j as f64, i as f64 * 0.1));
        let direct = &a * &x * &b;
        let via = apply_superop(&sandwich(&a, &b), &x, 3);
        assert!(max_abs(&(direct - via)) < 1e-12);
    }

    #[test]
    fn partial_traces_of_product() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new(0.0, (i + j) as f64));
        let ab = kron(&a, &b);
        let ta = partial_trace_second(&ab, 2, 3);
        let tb = partial_trace_first(&ab, 2, 3);
        assert!(max_abs(&(ta - &a * b.trace())) < 1e-12);
        assert!(max_abs(&(tb - &b * a.trace())) < 1e-12);
    }

    #[test]
    fn psd_projection_clips_negative_spectrum() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0), c(-1.0), c(0.5)]));
        let p = psd_projection(&m);
        assert!((p[(1, 1)].re).abs() < 1e-14);
        assert!((p[(0, 0)].re - 2.0).abs() < 1e-14);
    }
}
