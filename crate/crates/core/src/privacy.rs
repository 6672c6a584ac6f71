//! Differentially private rado release through the Laplace mechanism.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, softplus};
use crate::rados::{RadoMode, RadoSet};
use crate::rng::{self, Domain};

/// Largest `m` for which [`exact_edge_diameter`] runs the pairwise scan.
pub const EXACT_DIAMETER_MAX_M: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpParams {
    /// Total budget over the released set.
    pub epsilon: f64,
    /// l1 diameter bound on edge vectors.
    pub r_e: f64,
    pub seed: u64,
}

impl DpParams {
    pub fn new(epsilon: f64, r_e: f64, seed: u64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("r_e", r_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, inf)",
                });
            }
        }
        Ok(Self { epsilon, r_e, seed })
    }

    /// Per-coordinate Laplace scale `n r_e / epsilon` for `n` rados.
    pub fn scale(&self, n: usize) -> f64 {
        n as f64 * self.r_e / self.epsilon
    }
}

/// Inverse-CDF Laplace draw from `u` in `(-1/2, 1/2)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    -scale * u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// One Laplace(0, `scale`) draw.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            return if u == 0.0 { 0.0 } else { laplace_from_uniform(u, scale) };
        }
    }
}

/// `2 max_i ||e_i||_1`, an upper bound on the l1 diameter of the edges.
pub fn edge_diameter_bound(dataset: &Dataset) -> f64 {
    let max_norm = dataset
        .features()
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    2.0 * max_norm
}

/// `max_{i,i'} ||e_i - e_i'||_1` by pairwise scan.
pub fn exact_edge_diameter(dataset: &Dataset) -> Result<f64> {
    let m = dataset.m();
    if m > EXACT_DIAMETER_MAX_M {
        return Err(Error::EnumerationCap {
            m,
            cap: EXACT_DIAMETER_MAX_M,
        });
    }
    let edges = dataset.edge_matrix();
    Ok((0..m)
        .into_par_iter()
        .map(|i| {
            (i + 1..m)
                .map(|j| {
                    edges
                        .row(i)
                        .iter()
                        .zip(edges.row(j))
                        .map(|(a, b)| (a - b).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// Hex SHA-256 of the little-endian seed bytes.
pub fn seed_commitment(seed: u64) -> String {
    Sha256::digest(seed.to_le_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The noise matrix `dp_protect` adds for `n x d` rados.
pub fn laplace_noise(n: usize, d: usize, params: &DpParams) -> Array2<f64> {
    let scale = params.scale(n);
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = rng::stream(params.seed, Domain::Laplace, j as u64);
            (0..d).map(|_| laplace_sample(scale, &mut rng)).collect::<Vec<_>>()
        })
        .collect();
    Array2::from_shape_vec((n, d), rows).expect("n * d noise values")
}

/// Adds Laplace noise of scale `n r_e / epsilon` to every rado coordinate.
pub fn dp_protect(rados: &RadoSet, params: &DpParams) -> Result<RadoSet> {
    let params = DpParams::new(params.epsilon, params.r_e, params.seed)?;
    if let Some(bound) = rados.provenance().edge_l1_bound {
        if params.r_e < bound {
            log::warn!(
                "r_e = {} is below the edge diameter bound {bound}; the privacy guarantee needs r_e to bound the true diameter",
                params.r_e
            );
        }
    }
    let noisy = rados.rados() + &laplace_noise(rados.n(), rados.d(), &params);
    let mut provenance = rados.provenance().clone();
    provenance.mode = RadoMode::Protected;
    provenance.seed = None;
    provenance.epsilon = Some(params.epsilon);
    provenance.r_e = Some(params.r_e);
    provenance.seed_commitment = Some(seed_commitment(params.seed));
    RadoSet::new(noisy, rados.feature_names().to_vec(), provenance)
}

/// Example-equivalent budget `n ln(1 + (exp(epsilon / n) - 1) / m)`.
///
/// A reporting figure only; noise is always calibrated on `epsilon`.
pub fn epsilon_a(epsilon: f64, n: usize, m: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "(0, inf)",
        });
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    if m == 1 {
        return Ok(epsilon);
    }
    let n = n as f64;
    Ok(n * ((epsilon / n).exp_m1() / m as f64).ln_1p())
}

/// A norm and its dual, as used in the noisy-loss bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualPair {
    /// `Omega = ||.||_1`, `Omega* = ||.||_inf`.
    L1Linf,
    /// `Omega = Omega* = ||.||_2`.
    L2L2,
}

impl DualPair {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            DualPair::L1Linf => v.iter().map(|x| x.abs()).sum(),
            DualPair::L2L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dual(self, v: &[f64]) -> f64 {
        match self {
            DualPair::L1Linf => v.iter().fold(0.0, |a, x| a.max(x.abs())),
            DualPair::L2L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

/// Both sides, in log space, of
/// `(1/n) sum_j exp(-theta . (pi_j + z_j)) <= exp(m l_log + max_j Omega*(z_j) Omega(theta))`
/// where `l_log` is the mean logistic loss of `theta` over the edges.
pub fn noisy_loss_bound(
    dataset: &Dataset,
    rados: &RadoSet,
    noise: &Array2<f64>,
    theta: &Array1<f64>,
    pair: DualPair,
) -> Result<(f64, f64)> {
    if noise.dim() != rados.rados().dim() {
        return Err(Error::DimensionMismatch {
            expected: rados.n() * rados.d(),
            actual: noise.len(),
        });
    }
    if theta.len() != rados.d() || theta.len() != dataset.d() {
        return Err(Error::DimensionMismatch {
            expected: rados.d(),
            actual: theta.len(),
        });
    }
    let noisy = rados.rados() + noise;
    let exponents: Vec<f64> = noisy.dot(theta).iter().map(|v| -v).collect();
    let lhs = log_sum_exp(&exponents) - (rados.n() as f64).ln();
    let m = dataset.m() as f64;
    let l_log = dataset
        .edge_matrix()
        .dot(theta)
        .iter()
        .map(|&z| softplus(-z))
        .sum::<f64>()
        / m;
    let theta_norm = pair.norm(theta.as_slice().expect("contiguous"));
    let worst = noise
        .rows()
        .into_iter()
        .map(|z| pair.dual(&z.to_vec()))
        .fold(0.0, f64::max);
    Ok((lhs, m * l_log + worst * theta_norm))
}
