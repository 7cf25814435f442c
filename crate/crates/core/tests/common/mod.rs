#![allow(dead_code)]

use maus_core::linalg::{self, CMatrix, C64};
use maus_core::QuantumChannel;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u: f64 = rng.gen_range(1e-300..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    linalg::hermitize(&random_matrix(rng, dim, dim))
}

pub fn random_density(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_state(rng: &mut impl Rng, dim: usize) -> maus_core::linalg::CVector {
    let v = random_matrix(rng, dim, 1).column(0).into_owned();
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// CPTP map from a random Stinespring isometry with `rank` Kraus operators
/// (raised to the smallest rank admitting an isometry).
pub fn random_channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize, rank: usize) -> QuantumChannel {
    let rank = rank.max(dim_in.div_ceil(dim_out));
    let g = random_matrix(rng, dim_out * rank, dim_in);
    let gram = g.adjoint() * &g;
    let inv_sqrt = linalg::hermitian_function(&gram, |v| C64::new(1.0 / v.sqrt(), 0.0));
    let v = g * inv_sqrt;
    let kraus: Vec<CMatrix> = (0..rank).map(|k| v.rows(k * dim_out, dim_out).into_owned()).collect();
    QuantumChannel::from_kraus(&kraus).unwrap()
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
