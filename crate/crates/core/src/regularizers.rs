//! Sparsity-controlling regularizers and their admissible strengths.

use std::f64::consts::{PI, SQRT_2};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rados::RadoSet;

/// Diagonal positive-definite `Gamma` of the ridge penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    Identity,
    Diagonal(Vec<f64>),
}

impl Gamma {
    fn entry(&self, k: usize) -> f64 {
        match self {
            Gamma::Identity => 1.0,
            Gamma::Diagonal(g) => g[k],
        }
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        match self {
            Gamma::Identity => 1.0,
            Gamma::Diagonal(g) => g.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    Lasso,
    Ridge(Gamma),
    LInf,
    Slope { q: f64 },
    /// `sum_i w_i Omega_i(theta)`.
    Combo(Vec<(f64, RegularizerKind)>),
}

impl RegularizerKind {
    pub fn name(&self) -> String {
        match self {
            RegularizerKind::Lasso => "lasso".into(),
            RegularizerKind::Ridge(_) => "ridge".into(),
            RegularizerKind::LInf => "linf".into(),
            RegularizerKind::Slope { .. } => "slope".into(),
            RegularizerKind::Combo(parts) => parts
                .iter()
                .map(|(w, k)| format!("{w}*{}", k.name()))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    /// Degree of homogeneity: `Omega(c theta) = |c|^p Omega(theta)`.
    pub fn homogeneity(&self) -> Option<u32> {
        match self {
            RegularizerKind::Ridge(_) => Some(2),
            RegularizerKind::Combo(parts) => {
                let mut degrees = parts.iter().filter(|(w, _)| *w > 0.0).map(|(_, k)| k.homogeneity());
                let first = degrees.next().flatten()?;
                degrees.all(|p| p == Some(first)).then_some(first)
            }
            _ => Some(1),
        }
    }

    pub fn is_ridge(&self) -> bool {
        matches!(self, RegularizerKind::Ridge(_))
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            RegularizerKind::Ridge(Gamma::Diagonal(g)) => {
                if g.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: g.len(),
                    });
                }
                if let Some(&bad) = g.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::OutOfRange {
                        name: "gamma",
                        value: bad,
                        range: "(0, inf)",
                    });
                }
                Ok(())
            }
            RegularizerKind::Slope { q } if !(*q > 0.0 && *q < 1.0) => Err(Error::OutOfRange {
                name: "q",
                value: *q,
                range: "(0, 1)",
            }),
            RegularizerKind::Combo(parts) => {
                if let Some(&(w, _)) = parts.iter().find(|(w, _)| !(*w >= 0.0 && w.is_finite())) {
                    return Err(Error::OutOfRange {
                        name: "combo weight",
                        value: w,
                        range: "[0, inf)",
                    });
                }
                if !parts.iter().any(|(w, _)| *w > 0.0) {
                    return Err(Error::InvalidArgument(
                        "combination needs at least one positive weight".into(),
                    ));
                }
                parts.iter().try_for_each(|(_, k)| k.validate(d))
            }
            _ => Ok(()),
        }
    }
}

/// Parses `lasso`, `ridge`, `linf`, `slope` or a weighted combination such
/// as `0.5*lasso+2*ridge`. `slope_q` is used by every slope term.
pub fn parse_regularizer(text: &str, slope_q: f64) -> Result<RegularizerKind> {
    let text = text.trim();
    let base = |name: &str| match name.trim().to_ascii_lowercase().as_str() {
        "lasso" | "l1" => Ok(RegularizerKind::Lasso),
        "ridge" | "l2" => Ok(RegularizerKind::Ridge(Gamma::Identity)),
        "linf" => Ok(RegularizerKind::LInf),
        "slope" => Ok(RegularizerKind::Slope { q: slope_q }),
        other => Err(Error::InvalidArgument(format!("unknown regularizer `{other}`"))),
    };
    if !text.contains('*') && !text.contains('+') {
        return base(text);
    }
    let parts = text
        .split('+')
        .map(|term| {
            let (w, name) = term.split_once('*').ok_or_else(|| {
                Error::InvalidArgument(format!("combination term `{term}` is not weight*name"))
            })?;
            let w = w.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("bad combination weight `{}`", w.trim()))
            })?;
            Ok((w, base(name)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = RegularizerKind::Combo(parts);
    kind.validate(0).or_else(|e| match e {
        // Dimension is only known later; everything else is final.
        Error::DimensionMismatch { .. } => Ok(()),
        other => Err(other),
    })?;
    Ok(kind)
}

/// A regularizer together with its strength `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub omega: f64,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, omega: f64) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::OutOfRange {
                name: "omega",
                value: omega,
                range: "[0, inf)",
            });
        }
        Ok(Self { kind, omega })
    }

    pub fn unregularized() -> Self {
        Self {
            kind: RegularizerKind::Lasso,
            omega: 0.0,
        }
    }

    pub fn evaluator(&self, d: usize) -> Result<Regularizer> {
        Regularizer::new(&self.kind, d)
    }
}

/// A regularizer prepared for repeated evaluation in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    Lasso,
    Ridge(Vec<f64>),
    LInf,
    Slope(SlopeXis),
    Combo(Vec<(f64, Regularizer)>),
}

impl Regularizer {
    pub fn new(kind: &RegularizerKind, d: usize) -> Result<Self> {
        kind.validate(d)?;
        Ok(match kind {
            RegularizerKind::Lasso => Regularizer::Lasso,
            RegularizerKind::Ridge(g) => Regularizer::Ridge((0..d).map(|k| g.entry(k)).collect()),
            RegularizerKind::LInf => Regularizer::LInf,
            RegularizerKind::Slope { q } => Regularizer::Slope(slope_xis(d, *q)?),
            RegularizerKind::Combo(parts) => Regularizer::Combo(
                parts
                    .iter()
                    .map(|(w, k)| Ok((*w, Regularizer::new(k, d)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// `Omega(theta)`; `theta` must have the prepared dimension.
    pub fn value(&self, theta: &[f64]) -> f64 {
        match self {
            Regularizer::Lasso => theta.iter().map(|t| t.abs()).sum(),
            Regularizer::Ridge(g) => theta.iter().zip(g).map(|(t, g)| g * t * t).sum(),
            Regularizer::LInf => theta.iter().fold(0.0, |acc, t| acc.max(t.abs())),
            Regularizer::Slope(xis) => {
                let mut abs: Vec<f64> = theta.iter().map(|t| t.abs()).collect();
                abs.sort_by(|a, b| b.total_cmp(a));
                abs.iter().zip(xis.values()).map(|(t, x)| t * x).sum()
            }
            Regularizer::Combo(parts) => parts.iter().map(|(w, r)| w * r.value(theta)).sum(),
        }
    }
}

pub fn omega_value(spec: &RegularizerSpec, theta: &Array1<f64>) -> Result<f64> {
    let reg = spec.evaluator(theta.len())?;
    Ok(reg.value(theta.as_slice().unwrap_or(&theta.to_vec())))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal quantile.
///
/// Acklam's rational approximation (relative error about 1e-9) followed by
/// one Halley step against the erfc-based CDF.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239e0,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838e0,
        -2.549732539343734e0,
        4.374664141464968e0,
        2.938163982698783e0,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996e0,
        3.754408661907416e0,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };

    // The residual is taken on the smaller tail to avoid cancellation.
    let e = if x > 0.0 {
        (1.0 - p) - normal_sf(x)
    } else {
        normal_cdf(x) - p
    };
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// `xi_k = Phi^{-1}(1 - k q / (2 d))` for `k = 1..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeXis(Vec<f64>);

impl SlopeXis {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn slope_xis(d: usize, q: f64) -> Result<SlopeXis> {
    if d == 0 {
        return Err(Error::InvalidArgument("slope needs d >= 1".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            range: "(0, 1)",
        });
    }
    (1..=d)
        .map(|k| inverse_normal_cdf(1.0 - k as f64 * q / (2.0 * d as f64)))
        .collect::<Result<_>>()
        .map(SlopeXis)
}

/// `min_k max_j |pi_jk|` over live features (those with a nonzero column).
pub fn min_live_column_max(rados: &RadoSet) -> Result<f64> {
    rados
        .column_abs_max()
        .into_iter()
        .filter(|&v| v > 0.0)
        .reduce(f64::min)
        .ok_or(Error::AllFeaturesDead)
}

fn check_open(name: &'static str, value: f64, hi: f64, range: &'static str) -> Result<()> {
    if value > 0.0 && value < hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}

/// Strength that makes the boosting guarantee for `kind` apply.
///
/// * ridge: the supremum `2 a min_k max_j pi_jk^2 / (T lambda_Gamma)`, with
///   `0 < a < 1/5`; admissible values lie strictly below it.
/// * lasso, l-inf: `a gamma_wl min_k max_j |pi_jk|`, with `0 < a < 3/11`.
/// * slope: 1.
///
/// Dead features are left out of the minimum since they are never selected.
pub fn admissible_omega(
    kind: &RegularizerKind,
    rados: &RadoSet,
    t: usize,
    gamma_wl: f64,
    a: f64,
) -> Result<f64> {
    match kind {
        RegularizerKind::Slope { .. } => Ok(1.0),
        RegularizerKind::Ridge(gamma) => {
            check_open("a", a, 0.2, "(0, 1/5)")?;
            if t == 0 {
                return Err(Error::InvalidArgument("T must be at least 1".into()));
            }
            let m = min_live_column_max(rados)?;
            Ok(2.0 * a * m * m / (t as f64 * gamma.lambda_max()))
        }
        RegularizerKind::Lasso | RegularizerKind::LInf => {
            check_open("a", a, 3.0 / 11.0, "(0, 3/11)")?;
            check_open("gamma_wl", gamma_wl, 1.0, "(0, 1)")?;
            Ok(a * gamma_wl * min_live_column_max(rados)?)
        }
        RegularizerKind::Combo(_) => Err(Error::NoAdmissibleOmega(kind.name())),
    }
}

/// Smallest `q` meeting `q >= 2 max_k (1 - Phi(3 gamma_wl / 11 * M_k)) / (k / d)`
/// with `M_k = max_j |pi_jk|` taken in column order.
pub fn slope_q_check(rados: &RadoSet, gamma_wl: f64, d: usize) -> Result<f64> {
    if d != rados.d() {
        return Err(Error::DimensionMismatch {
            expected: rados.d(),
            actual: d,
        });
    }
    let c = 3.0 * gamma_wl / 11.0;
    Ok(rados
        .column_abs_max()
        .iter()
        .enumerate()
        .map(|(i, &mk)| 2.0 * normal_sf(c * mk) * d as f64 / (i + 1) as f64)
        .fold(0.0, f64::max))
}

/// The rate constant `min{3 gamma / 11, Phi^{-1}(1 - q/(2d)) / min_k max_j |pi_jk|}`
/// of the slope guarantee. Diagnostic only.
pub fn slope_rate_constant(rados: &RadoSet, gamma_wl: f64, q: f64) -> Result<f64> {
    let xi1 = inverse_normal_cdf(1.0 - q / (2.0 * rados.d() as f64))?;
    Ok((3.0 * gamma_wl / 11.0).min(xi1 / min_live_column_max(rados)?))
}
