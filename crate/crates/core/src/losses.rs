//! Example losses, rado losses and the two-player game that ties them.
//!
//! For a vector `z` in `R^m` the example game minimises
//! `L_e(p, z) = sum_i p_i z_i + mu_e sum_i phi_e(p_i)` over `p`, and the rado
//! game minimises `L_r(q, z) = sum_I q_I S_I + mu_r sum_I phi_r(q_I)` over the
//! hyperplane `sum_I q_I = 1`, where `S_I = sum_{i in I} z_i` ranges over the
//! `2^m` subsets of `[m]`. Subsets are encoded as bit masks (bit `i` set iff
//! `i` belongs to the subset), matching the rado index order.

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, mean_and_std, softplus, xlogx};
use crate::rng::{self, Domain};

/// Largest `m` for which the game is solved by subset enumeration.
pub const MAX_GAME_M: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameKind {
    /// Logistic example loss / exponential rado loss.
    LogExp,
    /// Square example loss / mean-variance rado loss.
    SquareMeanVar,
    /// ReLU on both sides.
    Relu,
    /// Unhinged (linear) on both sides.
    Unhinged,
}

impl GameKind {
    pub const ALL: [GameKind; 4] = [
        GameKind::LogExp,
        GameKind::SquareMeanVar,
        GameKind::Relu,
        GameKind::Unhinged,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::LogExp => "log",
            GameKind::SquareMeanVar => "square",
            GameKind::Relu => "relu",
            GameKind::Unhinged => "unhinged",
        }
    }

    pub fn is_differentiable(self) -> bool {
        matches!(self, GameKind::LogExp | GameKind::SquareMeanVar)
    }
}

/// A generator pair and its weights `mu_e`, `mu_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamePair {
    pub kind: GameKind,
    pub mu_e: f64,
    pub mu_r: f64,
}

impl GamePair {
    pub fn new(kind: GameKind, mu_e: f64, mu_r: f64) -> Result<Self> {
        for (name, v) in [("mu_e", mu_e), ("mu_r", mu_r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, inf)",
                });
            }
        }
        let pair = Self { kind, mu_e, mu_r };
        if kind == GameKind::LogExp {
            pair.check_coupling(1)?;
        }
        Ok(pair)
    }

    /// The pair with `mu_r` given and `mu_e` set by the coupling that makes
    /// it proportionate at dimension `m`.
    pub fn coupled(kind: GameKind, mu_r: f64, m: usize) -> Result<Self> {
        let mu_e = match kind {
            GameKind::SquareMeanVar => mu_r / 2f64.powi(m as i32 - 1),
            _ => mu_r,
        };
        Self::new(kind, mu_e, mu_r)
    }

    /// Checks the `mu_e`/`mu_r` relation required for dimension `m`.
    pub fn check_coupling(&self, m: usize) -> Result<()> {
        let tol = 1e-12 * self.mu_r.max(self.mu_e);
        match self.kind {
            GameKind::LogExp if (self.mu_e - self.mu_r).abs() > tol => Err(Error::InvalidCoupling {
                kind: "log",
                reason: format!("requires mu_e = mu_r, got {} vs {}", self.mu_e, self.mu_r),
            }),
            GameKind::SquareMeanVar => {
                let want = self.mu_r / 2f64.powi(m as i32 - 1);
                if (self.mu_e - want).abs() > 1e-12 * want {
                    Err(Error::InvalidCoupling {
                        kind: "square",
                        reason: format!(
                            "requires mu_e = mu_r / 2^(m-1) = {want} at m = {m}, got {}",
                            self.mu_e
                        ),
                    })
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// A loss that may be too large or too small for a plain `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossValue {
    Plain(f64),
    /// Natural log of the loss; the plain value over- or underflows.
    Log(f64),
}

impl LossValue {
    pub fn from_ln(ln: f64) -> Self {
        let v = ln.exp();
        if v.is_finite() && v >= f64::MIN_POSITIVE {
            LossValue::Plain(v)
        } else {
            LossValue::Log(ln)
        }
    }

    pub fn is_log_domain(&self) -> bool {
        matches!(self, LossValue::Log(_))
    }

    pub fn plain(&self) -> Option<f64> {
        match *self {
            LossValue::Plain(v) => Some(v),
            LossValue::Log(_) => None,
        }
    }

    /// Natural log of the loss (NaN for non-positive plain values).
    pub fn ln(&self) -> f64 {
        match *self {
            LossValue::Plain(v) => v.ln(),
            LossValue::Log(l) => l,
        }
    }
}

/// Example-side loss `l_e(z, mu)`.
pub fn example_loss(kind: GameKind, z: &[f64], mu: f64) -> f64 {
    match kind {
        GameKind::LogExp => z.iter().map(|&zi| softplus(-zi / mu)).sum(),
        GameKind::SquareMeanVar => z.iter().map(|&zi| (1.0 - zi / mu).powi(2)).sum(),
        GameKind::Relu => z.iter().map(|&zi| (-zi).max(0.0)).sum::<f64>() / mu,
        GameKind::Unhinged => z.iter().map(|&zi| -zi).sum::<f64>() / mu,
    }
}

/// `S_I` for every subset mask `I`, each sum accumulated in index order.
pub fn subset_sums(z: &[f64]) -> Result<Vec<f64>> {
    let m = z.len();
    if m >= 31 {
        return Err(Error::EnumerationCap { m, cap: 30 });
    }
    let n = 1usize << m;
    let mut sums = vec![0.0; n];
    for mask in 1..n {
        let top = (usize::BITS - 1 - mask.leading_zeros()) as usize;
        sums[mask] = sums[mask & !(1 << top)] + z[top];
    }
    Ok(sums)
}

fn subset_dimension(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "expected 2^m subset sums, got {len}"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Rado-side loss `l_r` from the `2^m` subset sums.
///
/// The exponential loss is aggregated in log space and reported as
/// [`LossValue::Log`] when its plain value is not representable.
pub fn rado_loss(kind: GameKind, sums: &[f64], mu_r: f64) -> Result<LossValue> {
    let m = subset_dimension(sums.len())?;
    let n = sums.len() as f64;
    Ok(match kind {
        GameKind::LogExp => {
            let scaled: Vec<f64> = sums.iter().map(|s| -s / mu_r).collect();
            LossValue::from_ln(log_sum_exp(&scaled))
        }
        GameKind::SquareMeanVar => {
            let (mean, std) = mean_and_std(sums);
            let coeff = 2f64.powi(m as i32 - 1) / mu_r;
            LossValue::Plain(-(mean - coeff * std * std))
        }
        GameKind::Relu => {
            let worst = sums.iter().map(|&s| -s).fold(0.0f64, f64::max);
            LossValue::Plain(worst / mu_r)
        }
        GameKind::Unhinged => LossValue::Plain(sums.iter().map(|&s| -s).sum::<f64>() / n / mu_r),
    })
}

fn phi_e(kind: GameKind, p: f64) -> f64 {
    match kind {
        GameKind::LogExp if (0.0..=1.0).contains(&p) => xlogx(p) + xlogx(1.0 - p) - 1.0,
        GameKind::SquareMeanVar => 0.5 * (1.0 - 2.0 * p * (1.0 - p)),
        GameKind::Relu if (0.0..=1.0).contains(&p) => 0.0,
        GameKind::Unhinged if p == 0.5 => 0.0,
        _ => f64::INFINITY,
    }
}

fn phi_r(kind: GameKind, q: f64, m: usize) -> f64 {
    match kind {
        GameKind::LogExp if q >= 0.0 => xlogx(q) - q,
        GameKind::SquareMeanVar => 0.5 * q * q,
        GameKind::Relu if (0.0..=1.0).contains(&q) => 0.0,
        GameKind::Unhinged if q >= 1.0 / (1u64 << m) as f64 && q <= 0.5 => 0.0,
        _ => f64::INFINITY,
    }
}

/// `L_e(p, z)`; `+inf` when `p` leaves the generator's domain.
pub fn example_objective(kind: GameKind, mu_e: f64, p: &[f64], z: &[f64]) -> f64 {
    p.iter()
        .zip(z)
        .map(|(&pi, &zi)| pi * zi + mu_e * phi_e(kind, pi))
        .sum()
}

/// `L_r(q, z)` from subset sums. The hyperplane constraint `sum q = 1` is the
/// caller's responsibility.
pub fn rado_objective(kind: GameKind, mu_r: f64, q: &[f64], sums: &[f64]) -> Result<f64> {
    let m = subset_dimension(sums.len())?;
    if q.len() != sums.len() {
        return Err(Error::DimensionMismatch {
            expected: sums.len(),
            actual: q.len(),
        });
    }
    Ok(q.iter()
        .zip(sums)
        .map(|(&qi, &si)| qi * si + mu_r * phi_r(kind, qi, m))
        .sum())
}

/// `(G_m q)_i = sum over subsets containing i of q_I`.
pub fn membership_marginals(q: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            q.iter()
                .enumerate()
                .filter(|(mask, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .sum()
        })
        .collect()
}

/// Optimal values and solutions of both games at one `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameEvaluation {
    pub l_e_star: f64,
    pub l_r_star: f64,
    pub p_star: Vec<f64>,
    pub q_star: Vec<f64>,
    /// Lagrange multiplier of the hyperplane constraint, for the
    /// differentiable pairs.
    pub lambda: Option<f64>,
}

impl GameEvaluation {
    pub fn gap(&self) -> f64 {
        self.l_e_star - self.l_r_star
    }

    /// `max_i |p*_i - (G_m q*)_i|`.
    pub fn assignment_residual(&self) -> f64 {
        membership_marginals(&self.q_star, self.p_star.len())
            .iter()
            .zip(&self.p_star)
            .map(|(g, p)| (g - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves both games for `z` with the closed-form optimisers and evaluates
/// the objectives over all `2^m` subsets.
pub fn brute_force_game(pair: &GamePair, z: &[f64]) -> Result<GameEvaluation> {
    let m = z.len();
    if m == 0 || m > MAX_GAME_M {
        return Err(Error::EnumerationCap { m, cap: MAX_GAME_M });
    }
    pair.check_coupling(m)?;
    let sums = subset_sums(z)?;
    let n = sums.len();
    let (mu_e, mu_r) = (pair.mu_e, pair.mu_r);

    let (p_star, q_star, lambda) = match pair.kind {
        GameKind::LogExp => {
            let scaled: Vec<f64> = sums.iter().map(|s| -s / mu_r).collect();
            let lse = log_sum_exp(&scaled);
            let q = scaled.iter().map(|s| (s - lse).exp()).collect();
            let p = z
                .iter()
                .map(|&zi| 1.0 / (1.0 + (zi / mu_e).exp()))
                .collect();
            (p, q, Some(-mu_r * lse))
        }
        GameKind::SquareMeanVar => {
            let total: f64 = z.iter().sum();
            let lambda = mu_r / n as f64 + 0.5 * total;
            let q = sums.iter().map(|s| (lambda - s) / mu_r).collect();
            let p = z.iter().map(|&zi| 0.5 * (1.0 - zi / mu_e)).collect();
            (p, q, Some(lambda))
        }
        GameKind::Relu => {
            let negatives = z
                .iter()
                .enumerate()
                .filter(|(_, &zi)| zi < 0.0)
                .fold(0usize, |mask, (i, _)| mask | 1 << i);
            let mut q = vec![0.0; n];
            q[negatives] = 1.0;
            let p = z.iter().map(|&zi| if zi < 0.0 { 1.0 } else { 0.0 }).collect();
            (p, q, None)
        }
        GameKind::Unhinged => (vec![0.5; m], vec![1.0 / n as f64; n], None),
    };

    let l_e_star = example_objective(pair.kind, mu_e, &p_star, z);
    let l_r_star = match pair.kind {
        // Evaluating q ln q from the log-probabilities keeps tiny q accurate.
        GameKind::LogExp => {
            let lse = -lambda.unwrap_or(0.0) / mu_r;
            q_star
                .iter()
                .zip(&sums)
                .map(|(&q, &s)| {
                    let ln_q = -s / mu_r - lse;
                    q * s + mu_r * (q * ln_q - q)
                })
                .sum()
        }
        kind => rado_objective(kind, mu_r, &q_star, &sums)?,
    };
    Ok(GameEvaluation {
        l_e_star,
        l_r_star,
        p_star,
        q_star,
        lambda,
    })
}

/// Spread of the game gap `L*_e - L*_r` over random standard-normal `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStatistics {
    pub mean_gap: f64,
    /// Population standard deviation (0 for a single trial).
    pub stdev_gap: f64,
    /// Largest `||p* - G_m q*||_inf` seen across trials.
    pub max_assignment_residual: f64,
}

/// Draws the `t`-th trial vector of [`equivalence_gap_constancy`].
pub fn trial_vector(m: usize, seed: u64, trial: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, Domain::GameTrials, trial as u64);
    (0..m).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn equivalence_gap_constancy(
    pair: &GamePair,
    trials: usize,
    m: usize,
    seed: u64,
) -> Result<GapStatistics> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    pair.check_coupling(m)?;
    let mut gaps = Vec::with_capacity(trials);
    let mut residual = 0.0f64;
    for t in 0..trials {
        let eval = brute_force_game(pair, &trial_vector(m, seed, t))?;
        gaps.push(eval.gap());
        residual = residual.max(eval.assignment_residual());
    }
    let (mean_gap, stdev_gap) = mean_and_std(&gaps);
    Ok(GapStatistics {
        mean_gap,
        stdev_gap,
        max_assignment_residual: residual,
    })
}

/// Absolute residual of the exact identity linking the example and rado
/// losses of `kind`.
///
/// * log: `sum_I exp(-S_I/mu) - prod_i (1 + exp(-z_i/mu))`
/// * relu: `l_r - l_e` at `mu_e = mu_r = mu`
/// * unhinged: `l_r - l_e / 2` at `mu_e = mu_r = mu`
/// * square: `l_e - (m + 4 l_r)` at `mu_e = 1`, `mu_r = 2^(m-1)` (`mu` unused)
pub fn loss_identity_residual(kind: GameKind, z: &[f64], mu: f64) -> Result<f64> {
    let m = z.len();
    if m > MAX_GAME_M {
        return Err(Error::EnumerationCap { m, cap: MAX_GAME_M });
    }
    let sums = subset_sums(z)?;
    let residual = match kind {
        GameKind::LogExp => {
            let subset_side: f64 = sums.iter().map(|s| (-s / mu).exp()).sum();
            let product: f64 = z.iter().map(|zi| 1.0 + (-zi / mu).exp()).product();
            subset_side - product
        }
        GameKind::Relu => {
            rado_loss(kind, &sums, mu)?.plain().unwrap_or(f64::NAN) - example_loss(kind, z, mu)
        }
        GameKind::Unhinged => {
            rado_loss(kind, &sums, mu)?.plain().unwrap_or(f64::NAN)
                - example_loss(kind, z, mu) / 2.0
        }
        GameKind::SquareMeanVar => {
            let mu_r = 2f64.powi(m as i32 - 1);
            let l_r = rado_loss(kind, &sums, mu_r)?.plain().unwrap_or(f64::NAN);
            example_loss(kind, z, 1.0) - (m as f64 + 4.0 * l_r)
        }
    };
    Ok(residual.abs())
}

/// `(1/m) sum_i ln(1 + exp(-theta . e_i))` over the rows of `edges`.
pub fn normalized_log_loss(edges: &Array2<f64>, theta: &Array1<f64>) -> Result<f64> {
    if edges.ncols() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: edges.ncols(),
            actual: theta.len(),
        });
    }
    let margins = edges.dot(theta);
    Ok(margins.iter().map(|&z| softplus(-z)).sum::<f64>() / edges.nrows() as f64)
}

/// Outcome of the equivalence and identity checks for one pair at one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub kind: GameKind,
    pub m: usize,
    pub trials: usize,
    pub gap: GapStatistics,
    /// Largest identity residual over the trial vectors (relative for log).
    pub identity_residual: f64,
    pub passed: bool,
}

impl PairCheck {
    pub fn max_residual(&self) -> f64 {
        self.identity_residual.max(self.gap.max_assignment_residual)
    }
}

/// Gap spread tolerance.
pub const GAP_STDEV_TOLERANCE: f64 = 1e-8;
/// `||p* - G_m q*||_inf` tolerance for the differentiable pairs.
pub const ASSIGNMENT_TOLERANCE: f64 = 1e-8;

pub fn identity_tolerance(kind: GameKind) -> f64 {
    match kind {
        GameKind::LogExp | GameKind::SquareMeanVar => 1e-10,
        GameKind::Relu | GameKind::Unhinged => 1e-12,
    }
}

/// The pair used by [`check_pair`]: unit weights, except that the square pair
/// takes `mu_e = 1`, `mu_r = 2^(m-1)`.
pub fn reference_pair(kind: GameKind, m: usize) -> Result<GamePair> {
    match kind {
        GameKind::SquareMeanVar => GamePair::coupled(kind, 2f64.powi(m as i32 - 1), m),
        _ => GamePair::new(kind, 1.0, 1.0),
    }
}

/// Runs the gap-constancy, assignment and exact-identity checks on `trials`
/// standard-normal vectors of length `m`.
pub fn check_pair(kind: GameKind, m: usize, trials: usize, seed: u64) -> Result<PairCheck> {
    let pair = reference_pair(kind, m)?;
    let gap = equivalence_gap_constancy(&pair, trials, m, seed)?;
    let mut identity = 0.0f64;
    for t in 0..trials {
        let z = trial_vector(m, seed, t);
        let mut r = loss_identity_residual(kind, &z, 1.0)?;
        if kind == GameKind::LogExp {
            r /= z.iter().map(|zi| 1.0 + (-zi).exp()).product::<f64>();
        }
        identity = identity.max(r);
    }
    let assignment_ok = !kind.is_differentiable() || gap.max_assignment_residual < ASSIGNMENT_TOLERANCE;
    let passed = gap.stdev_gap < GAP_STDEV_TOLERANCE
        && assignment_ok
        && identity < identity_tolerance(kind);
    Ok(PairCheck {
        kind,
        m,
        trials,
        gap,
        identity_residual: identity,
        passed,
    })
}
