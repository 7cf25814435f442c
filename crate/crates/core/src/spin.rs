//! Angular-momentum algebra for arbitrary half-integer spin.
//!
//! Every matrix is written in the `I_z` eigenbasis ordered by descending
//! projection, `m = I, I-1, …, -I`. Composite operators put the nucleus on
//! the left of the Kronecker product and the electron on the right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64, I, ONE, ZERO};

/// A value in ½ℤ stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HalfInteger {
    twice: i32,
}

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::NotHalfInteger(x));
        }
        Ok(Self { twice: twice.round() as i32 })
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Hilbert-space dimension `2I + 1` of a spin of this magnitude.
    pub fn dim(self) -> usize {
        (self.twice + 1).max(0) as usize
    }

    pub fn is_half_odd(self) -> bool {
        self.twice % 2 != 0
    }

    pub fn abs(self) -> Self {
        Self { twice: self.twice.abs() }
    }

    /// Projections `I, I-1, …, -I`.
    pub fn projections(self) -> impl Iterator<Item = HalfInteger> {
        let top = self.twice;
        (0..self.dim() as i32).map(move |k| HalfInteger::from_twice(top - 2 * k))
    }

    /// Index of projection `m` in the descending basis of this spin.
    pub fn index_of(self, m: HalfInteger) -> Result<usize> {
        if m.twice.abs() > self.twice || (self.twice - m.twice) % 2 != 0 {
            return Err(Error::ProjectionOutOfRange { m: m.to_string(), spin: self.to_string() });
        }
        Ok(((self.twice - m.twice) / 2) as usize)
    }

    /// Projection stored at `index` of the descending basis.
    pub fn projection_at(self, index: usize) -> HalfInteger {
        HalfInteger::from_twice(self.twice - 2 * index as i32)
    }

    pub(crate) fn require_spin(self) -> Result<()> {
        if self.twice < 1 {
            return Err(Error::InvalidSpin { spin: self.to_string(), reason: "spin must be at least 1/2" });
        }
        Ok(())
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a half-integer"));
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => Ok(Self::from_twice(num)),
                "1" => Ok(Self::from_twice(2 * num)),
                _ => Err(bad()),
            };
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse {s:?} as a half-integer")))?;
        Self::from_f64(x)
    }
}

impl TryFrom<String> for HalfInteger {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HalfInteger> for String {
    fn from(h: HalfInteger) -> String {
        h.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Iz,
    Iy,
    Composite,
}

/// Dense square operator tagged with the basis its entries refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    basis: Basis,
}

impl Operator {
    pub fn new(matrix: CMatrix, basis: Basis) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix, basis })
    }

    pub fn identity(dim: usize, basis: Basis) -> Self {
        Self { matrix: linalg::identity(dim), basis }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), basis: self.basis }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermitian_deviation(&self.matrix) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let gram = self.matrix.adjoint() * &self.matrix;
        linalg::op_norm(&(gram - linalg::identity(self.dim()))) <= tol
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * c(factor), basis: self.basis }
    }

    pub fn mul(&self, other: &Operator) -> Self {
        Self { matrix: &self.matrix * &other.matrix, basis: self.basis }
    }

    pub fn add(&self, other: &Operator) -> Self {
        Self { matrix: &self.matrix + &other.matrix, basis: self.basis }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix, basis: self.basis }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = linalg::identity(self.dim());
        for _ in 0..n {
            out *= &self.matrix;
        }
        Self { matrix: out, basis: self.basis }
    }
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self(v))
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self(v)
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let herm = linalg::hermitian_deviation(&m);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} is not 1")));
        }
        let min = linalg::min_eigenvalue(&m);
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {min}")));
        }
        Ok(Self(m))
    }

    pub fn pure(state: &StateVector) -> Self {
        Self(state.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(linalg::identity(dim) * c(1.0 / dim as f64))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, state: &StateVector) -> f64 {
        let v = state.as_vector();
        (v.adjoint() * &self.0 * v)[(0, 0)].re
    }
}

/// The Cartesian components of angular momentum for one spin.
#[derive(Clone, Debug)]
pub struct AngularMomentum {
    pub spin: HalfInteger,
    pub ix: Operator,
    pub iy: Operator,
    pub iz: Operator,
}

impl AngularMomentum {
    /// `I₊` in the `I_z` basis.
    pub fn raising(&self) -> Operator {
        raising(self.spin)
    }

    pub fn lowering(&self) -> Operator {
        raising(self.spin).adjoint()
    }

    /// Raising operator for `I_y`, `I₊⁽ʸ⁾ = I_z + i I_x`, still written in the `I_z` basis.
    pub fn y_raising(&self) -> Operator {
        let m = self.iz.matrix() + self.ix.matrix() * I;
        Operator { matrix: m, basis: Basis::Iz }
    }

    pub fn y_lowering(&self) -> Operator {
        self.y_raising().adjoint()
    }
}

fn raising(spin: HalfInteger) -> Operator {
    let d = spin.dim();
    let j = spin.value();
    let mut m = CMatrix::zeros(d, d);
    // I₊|m⟩ = √(j(j+1) − m(m+1)) |m+1⟩; |m+1⟩ sits one index above |m⟩.
    for col in 1..d {
        let mz = spin.projection_at(col).value();
        m[(col - 1, col)] = c((j * (j + 1.0) - mz * (mz + 1.0)).sqrt());
    }
    Operator { matrix: m, basis: Basis::Iz }
}

/// `(I_x, I_y, I_z)` in the descending `I_z` eigenbasis.
pub fn angular_momentum_ops(spin: HalfInteger) -> Result<AngularMomentum> {
    spin.require_spin()?;
    let up = raising(spin).into_matrix();
    let down = up.adjoint();
    let ix = (&up + &down) * c(0.5);
    let iy = (&up - &down) * C64::new(0.0, -0.5);
    let iz = CMatrix::from_diagonal(&CVector::from_iterator(
        spin.dim(),
        (0..spin.dim()).map(|k| c(spin.projection_at(k).value())),
    ));
    Ok(AngularMomentum {
        spin,
        ix: Operator { matrix: ix, basis: Basis::Iz },
        iy: Operator { matrix: iy, basis: Basis::Iz },
        iz: Operator { matrix: iz, basis: Basis::Iz },
    })
}

/// Fixes the global phase so the first non-negligible component is real positive.
pub(crate) fn fix_phase(v: &mut CVector) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Eigenvectors of `I_y` ordered by descending eigenvalue `m_y = I … -I`.
pub fn y_eigenbasis(spin: HalfInteger) -> Result<Vec<StateVector>> {
    let ops = angular_momentum_ops(spin)?;
    let (_, vectors) = linalg::eigh(ops.iy.matrix());
    let d = spin.dim();
    Ok((0..d)
        .rev()
        .map(|k| {
            let mut v = vectors.column(k).into_owned();
            fix_phase(&mut v);
            StateVector(v)
        })
        .collect())
}

/// Unitary whose columns are the `I_y` eigenvectors; maps `I_y`-basis
/// coordinates to `I_z`-basis coordinates.
pub fn y_basis_change(spin: HalfInteger) -> Result<CMatrix> {
    let basis = y_eigenbasis(spin)?;
    let d = spin.dim();
    Ok(CMatrix::from_fn(d, d, |i, j| basis[j].as_vector()[i]))
}

/// Re-expresses an `I_z`-basis operator in the `I_y` eigenbasis.
pub fn to_y_basis(op: &Operator, spin: HalfInteger) -> Result<Operator> {
    let w = y_basis_change(spin)?;
    Ok(Operator { matrix: w.adjoint() * op.matrix() * &w, basis: Basis::Iy })
}

pub fn from_y_basis(op: &Operator, spin: HalfInteger) -> Result<Operator> {
    let w = y_basis_change(spin)?;
    Ok(Operator { matrix: &w * op.matrix() * w.adjoint(), basis: Basis::Iz })
}

/// `exp(-i θ G)` for a Hermitian generator `G`.
pub fn rotation(axis: &Operator, angle: f64) -> Result<Operator> {
    let dev = linalg::hermitian_deviation(axis.matrix());
    if dev > 1e-12 * axis.matrix().norm().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let m = linalg::hermitian_function(axis.matrix(), |v| C64::from_polar(1.0, -angle * v));
    Ok(Operator { matrix: m, basis: axis.basis })
}

/// Angle `θ` such that `exp(-i θ I_x)` carries `|±I⟩_y` onto `|±I⟩_z`.
///
/// `+π/2` unless the eigenvector phase convention demands the opposite sense.
pub fn encoding_rotation_angle(spin: HalfInteger) -> Result<f64> {
    let ops = angular_momentum_ops(spin)?;
    let y = y_eigenbasis(spin)?;
    let d = spin.dim();
    let top = StateVector::basis_state(d, 0);
    let bottom = StateVector::basis_state(d, d - 1);
    for angle in [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2] {
        let r = rotation(&ops.ix, angle)?;
        let up = r.matrix() * y[0].as_vector();
        let down = r.matrix() * y[d - 1].as_vector();
        if (top.as_vector().dotc(&up).norm() - 1.0).abs() < 1e-10
            && (bottom.as_vector().dotc(&down).norm() - 1.0).abs() < 1e-10
        {
            return Ok(angle);
        }
    }
    Err(Error::InvalidArgument(format!("no x rotation maps the I_y extremes of spin {spin} onto I_z")))
}

/// Kronecker product with the nucleus as the left factor.
pub fn compose_systems(nuclear: &Operator, electron: &Operator) -> Operator {
    Operator { matrix: linalg::kron(nuclear.matrix(), electron.matrix()), basis: Basis::Composite }
}

/// Pauli matrices `(σ_x, σ_y, σ_z)` in the basis `|↑⟩, |↓⟩`.
pub fn pauli() -> (Operator, Operator, Operator) {
    let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sy = CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let sz = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    (
        Operator { matrix: sx, basis: Basis::Iz },
        Operator { matrix: sy, basis: Basis::Iz },
        Operator { matrix: sz, basis: Basis::Iz },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use std::f64::consts::PI;

    fn h(twice: i32) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn parses_and_displays() {
        assert_eq!("3/2".parse::<HalfInteger>().unwrap(), h(3));
        assert_eq!("2.5".parse::<HalfInteger>().unwrap(), h(5));
        assert_eq!("-1/2".parse::<HalfInteger>().unwrap(), h(-1));
        assert_eq!(h(7).to_string(), "7/2");
        assert_eq!(h(4).to_string(), "2");
        assert!(HalfInteger::from_f64(1.3).is_err());
        assert!("3/4".parse::<HalfInteger>().is_err());
    }

    #[test]
    fn projections_descend() {
        let ms: Vec<_> = h(3).projections().map(|m| m.twice()).collect();
        assert_eq!(ms, vec![3, 1, -1, -3]);
        assert_eq!(h(3).index_of(h(-1)).unwrap(), 2);
        assert!(h(3).index_of(h(5)).is_err());
        assert!(h(3).index_of(h(0)).is_err());
    }

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = angular_momentum_ops(h(1)).unwrap();
        let (sx, sy, sz) = pauli();
        assert!(max_abs(&(ops.ix.matrix() - sx.matrix() * c(0.5))) < 1e-15);
        assert!(max_abs(&(ops.iy.matrix() - sy.matrix() * c(0.5))) < 1e-15);
        assert!(max_abs(&(ops.iz.matrix() - sz.matrix() * c(0.5))) < 1e-15);
    }

    #[test]
    fn spin_three_halves_iz_diagonal() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| ops.iz.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn rejects_non_spin() {
        assert!(angular_momentum_ops(h(0)).is_err());
        assert!(angular_momentum_ops(h(-3)).is_err());
    }

    #[test]
    fn y_eigenbasis_spin_half() {
        let y = y_eigenbasis(h(1)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let plus = CVector::from_vec(vec![c(s), C64::new(0.0, s)]);
        let minus = CVector::from_vec(vec![c(s), C64::new(0.0, -s)]);
        assert!((y[0].as_vector() - plus).norm() < 1e-12);
        assert!((y[1].as_vector() - minus).norm() < 1e-12);
    }

    #[test]
    fn y_eigen_equation_spin_three_halves() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        let y = y_eigenbasis(h(3)).unwrap();
        for (k, v) in y.iter().enumerate() {
            let m = 1.5 - k as f64;
            let residual = ops.iy.matrix() * v.as_vector() - v.as_vector() * c(m);
            assert!(residual.norm() < 1e-12, "m_y = {m}");
        }
    }

    #[test]
    fn iz_matrix_elements_between_y_states() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        let y = y_eigenbasis(h(3)).unwrap();
        let diag = y[0].as_vector().dotc(&(ops.iz.matrix() * y[0].as_vector()));
        let off = y[1].as_vector().dotc(&(ops.iz.matrix() * y[0].as_vector()));
        assert!(diag.norm() < 1e-12);
        assert!((off.norm() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_cases() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        let r0 = rotation(&ops.ix, 0.0).unwrap();
        assert!(max_abs(&(r0.matrix() - linalg::identity(4))) < 1e-14);
        let r2pi = rotation(&ops.iz, 2.0 * PI).unwrap();
        assert!(max_abs(&(r2pi.matrix() + linalg::identity(4))) < 1e-12);
        let angle = encoding_rotation_angle(h(3)).unwrap();
        let r = rotation(&ops.ix, angle).unwrap();
        assert!(r.is_unitary(1e-10));
        let y = y_eigenbasis(h(3)).unwrap();
        let mapped = r.matrix() * y[0].as_vector();
        assert!((mapped[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn encoding_angle_is_positive_quarter_turn() {
        for twice in [3, 5, 7, 9] {
            assert!((encoding_rotation_angle(h(twice)).unwrap() - PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_rejects_non_hermitian() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        assert!(matches!(rotation(&ops.raising(), 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn composite_operators() {
        let ops = angular_momentum_ops(h(3)).unwrap();
        let id2 = Operator::identity(2, Basis::Iz);
        let (_, _, sz) = pauli();
        let iz_e = compose_systems(&ops.iz, &id2);
        let (vals, _) = linalg::eigh(iz_e.matrix());
        assert_eq!(vals.iter().map(|v| (2.0 * v).round() as i32).collect::<Vec<_>>(), vec![-3, -3, -1, -1, 1, 1, 3, 3]);
        let z = compose_systems(&Operator::identity(4, Basis::Iz), &sz);
        assert!(z.matrix().trace().norm() < 1e-15);
        let hyper = compose_systems(&ops.iz, &sz.scale(0.5));
        for k in 0..8 {
            let m = 1.5 - (k / 2) as f64;
            let s = if k % 2 == 0 { 0.5 } else { -0.5 };
            assert!((hyper.matrix()[(k, k)].re - m * s).abs() < 1e-15);
        }
        assert!(max_abs(&(hyper.matrix() - CMatrix::from_diagonal(&hyper.matrix().diagonal()))) < 1e-15);
    }

    #[test]
    fn y_ladder_shifts_y_projection() {
        for twice in [3, 5, 7] {
            let spin = h(twice);
            let ops = angular_momentum_ops(spin).unwrap();
            let up = to_y_basis(&ops.y_raising(), spin).unwrap();
            let down = to_y_basis(&ops.y_lowering(), spin).unwrap();
            let iz = to_y_basis(&ops.iz, spin).unwrap();
            let j = spin.value();
            let d = spin.dim();
            for r in 0..d {
                for col in 0..d {
                    let z = up.matrix()[(r, col)];
                    if r + 1 == col {
                        let m = j - col as f64;
                        assert!((z.norm() - (j * (j + 1.0) - m * (m + 1.0)).sqrt()).abs() < 1e-12);
                    } else {
                        assert!(z.norm() < 1e-12);
                    }
                }
            }
            assert!(max_abs(&(iz.matrix() - (up.matrix() + down.matrix()) * c(0.5))) < 1e-12);
        }
    }
}
