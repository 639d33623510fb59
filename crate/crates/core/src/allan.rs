//! Overlapping Allan deviation of a phase series.
//!
//! For a phase of `M` points and averaging scale `τ` (in sentences):
//!
//! ```text
//! σ_y(τ) = sqrt( Σ_{i=0}^{M-2τ-1} (φ[i+2τ] − 2φ[i+τ] + φ[i])² / (2(M − 2τ)) ) / τ
//! ```
//!
//! Only second differences of the phase enter, so constant offsets and
//! linear trends in `φ` drop out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AllanError {
    #[error("phase of length {len} is too short for any averaging scale")]
    TooShort { len: usize },
    #[error("tau {tau} exceeds the maximum {max} for a phase of length {len}")]
    TauTooLarge { tau: usize, max: usize, len: usize },
    #[error("tau must be at least 1")]
    TauZero,
    #[error("points per decade must be at least 1")]
    BadDensity,
    #[error("tau grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("no curves to average")]
    EmptyEnsemble,
    #[error("geometric averaging needs positive sigma (got {sigma} at tau {tau})")]
    NonPositiveSigma { tau: usize, sigma: f64 },
    #[error("bad reference anchor: {0}")]
    BadAnchor(String),
}

/// Largest admissible `τ` for a phase of `len` points.
pub fn max_tau(len: usize) -> usize {
    len.saturating_sub(1) / 2
}

/// Strictly increasing averaging scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TauGrid(Vec<usize>);

impl TauGrid {
    pub fn new(taus: Vec<usize>) -> Result<Self, AllanError> {
        if taus.is_empty() || taus[0] == 0 || taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AllanError::BadGrid);
        }
        Ok(Self(taus))
    }

    pub fn taus(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Logarithmic grid `round(10^(k/points_per_decade))`, `k = 0, 1, …`,
/// deduplicated and cut at [`max_tau`]. Always starts at 1.
pub fn make_tau_grid(phase_len: usize, points_per_decade: usize) -> Result<TauGrid, AllanError> {
    if points_per_decade == 0 {
        return Err(AllanError::BadDensity);
    }
    let max = max_tau(phase_len);
    if max < 1 {
        return Err(AllanError::TooShort { len: phase_len });
    }
    let mut taus: Vec<usize> = Vec::new();
    for k in 0.. {
        let t = 10f64.powf(k as f64 / points_per_decade as f64).round() as usize;
        if t > max {
            break;
        }
        if taus.last() != Some(&t) {
            taus.push(t);
        }
    }
    Ok(TauGrid(taus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllanPoint {
    pub tau: usize,
    pub sigma: f64,
    /// Number of second differences averaged; 0 marks a reference curve.
    pub n_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllanCurve {
    pub source_id: String,
    pub m_phase_len: usize,
    pub points: Vec<AllanPoint>,
}

impl AllanCurve {
    pub fn taus(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|p| p.tau)
    }

    pub fn is_reference(&self) -> bool {
        self.points.iter().all(|p| p.n_terms == 0)
    }

    /// Multiplies every sigma by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut c = self.clone();
        for p in &mut c.points {
            p.sigma *= k;
        }
        c
    }

    /// CSV with header `tau,sigma,n_terms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,sigma,n_terms\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.tau, p.sigma, p.n_terms));
        }
        out
    }
}

const NOISE_FLOOR_ULPS: f64 = 16.0;

/// Allan deviation at one scale together with its term count `M − 2τ`.
pub fn adev_at(phase: &[f64], tau: usize) -> Result<(f64, usize), AllanError> {
    check_tau(phase.len(), tau)?;
    let n = phase.len() - 2 * tau;
    let mut sum = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let (a, b, c) = (phase[i], phase[i + tau], phase[i + 2 * tau]);
        let d = c - 2.0 * b + a;
        sum += d * d;
        scale = scale.max(a.abs()).max(b.abs()).max(c.abs());
    }
    let rms = (sum / (2.0 * n as f64)).sqrt();
    // Second differences of an exactly linear phase only carry rounding
    // error; report those as zero so the fit sees a degenerate signal.
    if rms <= NOISE_FLOOR_ULPS * f64::EPSILON * scale {
        return Ok((0.0, n));
    }
    Ok((rms / tau as f64, n))
}

fn check_tau(len: usize, tau: usize) -> Result<(), AllanError> {
    if tau == 0 {
        return Err(AllanError::TauZero);
    }
    let max = max_tau(len);
    if tau > max {
        return Err(AllanError::TauTooLarge { tau, max, len });
    }
    Ok(())
}

pub fn adev_curve(
    phase: &[f64],
    grid: &TauGrid,
    source_id: impl Into<String>,
) -> Result<AllanCurve, AllanError> {
    let points = grid
        .taus()
        .iter()
        .map(|&tau| {
            adev_at(phase, tau).map(|(sigma, n_terms)| AllanPoint {
                tau,
                sigma,
                n_terms,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AllanCurve {
        source_id: source_id.into(),
        m_phase_len: phase.len(),
        points,
    })
}

/// Direct transcription of the estimator through block averages of the
/// increments, `ȳ_i = (φ[i+τ] − φ[i]) / τ`, kept deliberately separate
/// from [`adev_at`] so the two can check each other.
#[cfg(any(test, feature = "oracle"))]
pub fn adev_naive(phase: &[f64], tau: usize) -> Result<f64, AllanError> {
    check_tau(phase.len(), tau)?;
    let t = tau as f64;
    let ybar: Vec<f64> = (0..=phase.len() - 1 - tau)
        .map(|i| (phase[i + tau] - phase[i]) / t)
        .collect();
    let diffs: Vec<f64> = (0..phase.len() - 2 * tau)
        .map(|i| ybar[i + tau] - ybar[i])
        .collect();
    let mean_sq = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
    Ok((0.5 * mean_sq).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    /// Mean and population standard deviation of sigma.
    #[default]
    Arithmetic,
    /// Geometric mean of sigma; `std_sigma` is the standard deviation of
    /// `log10 sigma` (in decades).
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePoint {
    pub tau: usize,
    pub mean_sigma: f64,
    pub std_sigma: f64,
    pub n_texts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCurve {
    pub mode: EnsembleMode,
    pub points: Vec<EnsemblePoint>,
}

impl EnsembleCurve {
    /// CSV with header `tau,mean_sigma,std_sigma,n_texts`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,mean_sigma,std_sigma,n_texts\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.tau, p.mean_sigma, p.std_sigma, p.n_texts
            ));
        }
        out
    }
}

/// Averages sigma at each `τ` over exactly the curves that reach it. Curves
/// are consumed in the given order, so callers wanting order-independent
/// bits should sort them first.
pub fn ensemble_average(
    curves: &[AllanCurve],
    mode: EnsembleMode,
) -> Result<EnsembleCurve, AllanError> {
    if curves.is_empty() {
        return Err(AllanError::EmptyEnsemble);
    }
    let mut by_tau: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for c in curves {
        for p in &c.points {
            by_tau.entry(p.tau).or_default().push(p.sigma);
        }
    }
    let points = by_tau
        .into_iter()
        .map(|(tau, sigmas)| {
            let n = sigmas.len() as f64;
            let (mean_sigma, std_sigma) = match mode {
                EnsembleMode::Arithmetic => {
                    let mean = sigmas.iter().sum::<f64>() / n;
                    let var = sigmas.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
                    (mean, var.sqrt())
                }
                EnsembleMode::Geometric => {
                    if let Some(&sigma) = sigmas.iter().find(|&&s| s <= 0.0) {
                        return Err(AllanError::NonPositiveSigma { tau, sigma });
                    }
                    let logs: Vec<f64> = sigmas.iter().map(|s| s.log10()).collect();
                    let mean = logs.iter().sum::<f64>() / n;
                    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
                    (10f64.powf(mean), var.sqrt())
                }
            };
            Ok(EnsemblePoint {
                tau,
                mean_sigma,
                std_sigma,
                n_texts: sigmas.len(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleCurve { mode, points })
}

/// Power law `anchor_sigma · (τ / anchor_tau)^alpha` over `grid`, a visual
/// guide drawn through a chosen anchor rather than fitted to data.
pub fn reference_curve(
    alpha: f64,
    anchor_tau: usize,
    anchor_sigma: f64,
    grid: &TauGrid,
    source_id: impl Into<String>,
) -> Result<AllanCurve, AllanError> {
    if !(anchor_sigma > 0.0 && anchor_sigma.is_finite()) {
        return Err(AllanError::BadAnchor(format!(
            "sigma {anchor_sigma} must be positive"
        )));
    }
    if !alpha.is_finite() {
        return Err(AllanError::BadAnchor(format!(
            "alpha {alpha} must be finite"
        )));
    }
    let (lo, hi) = (grid.taus()[0], *grid.taus().last().unwrap());
    if anchor_tau < lo || anchor_tau > hi {
        return Err(AllanError::BadAnchor(format!(
            "tau {anchor_tau} outside grid range {lo}..={hi}"
        )));
    }
    let points = grid
        .taus()
        .iter()
        .map(|&tau| AllanPoint {
            tau,
            sigma: anchor_sigma * (tau as f64 / anchor_tau as f64).powf(alpha),
            n_terms: 0,
        })
        .collect();
    Ok(AllanCurve {
        source_id: source_id.into(),
        m_phase_len: 0,
        points,
    })
}

/// Grid point closest (in log space) to the geometric middle of
/// `lo..=hi`; the default anchor for reference curves.
pub fn intermediate_tau(taus: &[usize], lo: usize, hi: usize) -> Option<usize> {
    let mid = ((lo.max(1) as f64).ln() + (hi.max(1) as f64).ln()) / 2.0;
    taus.iter()
        .copied()
        .filter(|&t| t >= lo && t <= hi)
        .min_by(|&a, &b| {
            let da = ((a as f64).ln() - mid).abs();
            let db = ((b as f64).ln() - mid).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })
}
