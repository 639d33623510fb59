//! Short-time exponent fits, sliding-window local slopes and context-horizon
//! detection, all in `(log10 τ, log10 σ)` coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allan::{AllanCurve, AllanPoint};

pub const DEFAULT_FIT_FRACTION: f64 = 0.1;
pub const DEFAULT_THRESHOLD: f64 = 0.15;
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_PERSISTENCE: usize = 2;
/// Fewest grid points accepted for a short-time fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error(
        "only {found} curve points with tau <= {tau_limit}; at least {MIN_FIT_POINTS} are required"
    )]
    InsufficientPoints { found: usize, tau_limit: f64 },
    #[error("sigma is zero at tau {tau}; the phase has no fluctuations to fit")]
    DegenerateSignal { tau: usize },
    #[error("curve has {found} points, fewer than the window of {window}")]
    TooFewPoints { found: usize, window: usize },
    #[error("window {0} must be odd and at least 3")]
    BadWindow(usize),
    #[error("fit fraction {0} must lie in (0, 0.5]")]
    BadFitFraction(f64),
    #[error("threshold {0} must be positive")]
    BadThreshold(f64),
    #[error("persistence must be at least 1")]
    BadPersistence,
    #[error("short-time exponent is zero; relative deviation is undefined")]
    ZeroShortAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub alpha: f64,
    /// `log10 σ` at `log10 τ = 0`.
    pub intercept: f64,
    pub stderr_alpha: f64,
    pub fit_tau_min: usize,
    pub fit_tau_max: usize,
    pub n_points: usize,
    pub r_squared: f64,
}

struct Ols {
    slope: f64,
    intercept: f64,
    stderr: f64,
    r_squared: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ols {
        slope,
        intercept,
        stderr,
        r_squared,
    }
}

fn log_points(points: &[AllanPoint]) -> Result<(Vec<f64>, Vec<f64>), ScalingError> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for p in points {
        if p.sigma <= 0.0 {
            return Err(ScalingError::DegenerateSignal { tau: p.tau });
        }
        xs.push((p.tau as f64).log10());
        ys.push(p.sigma.log10());
    }
    Ok((xs, ys))
}

/// Least-squares power law over the points with `τ ≤ fit_fraction · n_sentences`.
pub fn fit_exponent(
    curve: &AllanCurve,
    n_sentences: usize,
    fit_fraction: f64,
) -> Result<SlopeFit, ScalingError> {
    if !(fit_fraction > 0.0 && fit_fraction <= 0.5) {
        return Err(ScalingError::BadFitFraction(fit_fraction));
    }
    let tau_limit = fit_fraction * n_sentences as f64;
    fit_window(curve, |tau| tau as f64 <= tau_limit, tau_limit)
}

/// Fit over an explicit inclusive `τ` range, bypassing the fraction rule.
pub fn fit_exponent_range(
    curve: &AllanCurve,
    tau_min: usize,
    tau_max: usize,
) -> Result<SlopeFit, ScalingError> {
    fit_window(
        curve,
        |tau| tau >= tau_min && tau <= tau_max,
        tau_max as f64,
    )
}

fn fit_window(
    curve: &AllanCurve,
    keep: impl Fn(usize) -> bool,
    tau_limit: f64,
) -> Result<SlopeFit, ScalingError> {
    let window: Vec<AllanPoint> = curve
        .points
        .iter()
        .copied()
        .filter(|p| keep(p.tau))
        .collect();
    if window.len() < MIN_FIT_POINTS {
        return Err(ScalingError::InsufficientPoints {
            found: window.len(),
            tau_limit,
        });
    }
    let (xs, ys) = log_points(&window)?;
    let fit = ols(&xs, &ys);
    Ok(SlopeFit {
        alpha: fit.slope,
        intercept: fit.intercept,
        stderr_alpha: fit.stderr,
        fit_tau_min: window[0].tau,
        fit_tau_max: window[window.len() - 1].tau,
        n_points: window.len(),
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSlope {
    pub tau: usize,
    pub slope: f64,
}

/// OLS slope over each centred window of `window` consecutive grid points,
/// reported at the centre `τ`.
pub fn local_slopes(curve: &AllanCurve, window: usize) -> Result<Vec<LocalSlope>, ScalingError> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(ScalingError::BadWindow(window));
    }
    if curve.points.len() < window {
        return Err(ScalingError::TooFewPoints {
            found: curve.points.len(),
            window,
        });
    }
    let (xs, ys) = log_points(&curve.points)?;
    let half = window / 2;
    Ok((half..curve.points.len() - half)
        .map(|c| LocalSlope {
            tau: curve.points[c].tau,
            slope: ols(&xs[c - half..=c + half], &ys[c - half..=c + half]).slope,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationMode {
    /// `|s − α| / |α| > threshold`
    #[default]
    Relative,
    /// `|s − α| > threshold`
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonParams {
    pub threshold: f64,
    pub window: usize,
    pub persistence: usize,
    pub mode: DeviationMode,
}

impl Default for HorizonParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            window: DEFAULT_WINDOW,
            persistence: DEFAULT_PERSISTENCE,
            mode: DeviationMode::Relative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonResult {
    pub found: bool,
    /// Absolute sentence count; present iff `found`.
    pub tau_star: Option<usize>,
    pub threshold: f64,
    pub short_alpha: f64,
    pub normalized_tau: Option<f64>,
}

/// Smallest `τ` beyond the fit window whose local slope departs from the
/// short-time exponent by more than the threshold, for `persistence`
/// consecutive grid points. `tau_star` is the first point of that run.
pub fn detect_horizon(
    curve: &AllanCurve,
    fit: &SlopeFit,
    params: &HorizonParams,
    normalize_by: Option<f64>,
) -> Result<HorizonResult, ScalingError> {
    if params.threshold.is_nan() || params.threshold <= 0.0 {
        return Err(ScalingError::BadThreshold(params.threshold));
    }
    if params.persistence == 0 {
        return Err(ScalingError::BadPersistence);
    }
    if params.mode == DeviationMode::Relative && fit.alpha == 0.0 {
        return Err(ScalingError::ZeroShortAlpha);
    }
    let slopes = local_slopes(curve, params.window)?;
    let exceeds = |s: f64| match params.mode {
        DeviationMode::Relative => (s - fit.alpha).abs() / fit.alpha.abs() > params.threshold,
        DeviationMode::Absolute => (s - fit.alpha).abs() > params.threshold,
    };
    let mut run_start: Option<usize> = None;
    let mut run_len = 0usize;
    let mut tau_star = None;
    for ls in slopes.iter().filter(|ls| ls.tau > fit.fit_tau_max) {
        if exceeds(ls.slope) {
            run_start.get_or_insert(ls.tau);
            run_len += 1;
            if run_len >= params.persistence {
                tau_star = run_start;
                break;
            }
        } else {
            run_start = None;
            run_len = 0;
        }
    }
    Ok(HorizonResult {
        found: tau_star.is_some(),
        tau_star,
        threshold: params.threshold,
        short_alpha: fit.alpha,
        normalized_tau: tau_star.zip(normalize_by).map(|(t, d)| t as f64 / d),
    })
}
