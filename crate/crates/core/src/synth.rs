//! Synthetic increment signals with known scaling: white noise, a constant
//! ramp, fractional Gaussian noise, and a white + fGn mixture that shows a
//! crossover. fGn uses exact circulant embedding (Davies–Harte / Wood–Chan).

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix_seed, rng_from_seed};
use crate::signal::IncrementSeries;

pub const MIN_LENGTH: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("circulant embedding has a negative eigenvalue ({0:e}); increase n or lower H")]
    NotEmbeddable(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalKind {
    /// i.i.d. Gaussian increments with standard deviation `sigma`.
    White { sigma: f64 },
    /// Constant increments equal to `step`.
    Ramp { step: f64 },
    /// Unit-variance fractional Gaussian noise.
    Fgn { hurst: f64 },
    /// `sigma · white + amplitude · fGn(hurst)`.
    Crossover {
        sigma: f64,
        amplitude: f64,
        hurst: f64,
    },
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::White { sigma } => write!(f, "white(sigma={sigma})"),
            SignalKind::Ramp { step } => write!(f, "ramp(step={step})"),
            SignalKind::Fgn { hurst } => write!(f, "fgn(H={hurst})"),
            SignalKind::Crossover {
                sigma,
                amplitude,
                hurst,
            } => {
                write!(f, "crossover(sigma={sigma}, a={amplitude}, H={hurst})")
            }
        }
    }
}

fn check_hurst(h: f64) -> Result<(), SynthError> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(SynthError::BadParams(format!(
            "Hurst exponent {h} must lie in (0, 1)"
        )))
    }
}

fn check_scale(name: &str, v: f64) -> Result<(), SynthError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SynthError::BadParams(format!(
            "{name} {v} must be finite and non-negative"
        )))
    }
}

/// Autocovariance of unit-variance fGn at lag `k`:
/// `½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `n` samples of unit-variance fGn.
pub fn fgn(n: usize, hurst: f64, seed: u64) -> Result<Vec<f64>, SynthError> {
    check_hurst(hurst)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    // Circulant of size m = 2n whose first row is γ(0..=n) followed by γ(n-1..=1).
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let scale = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let mut lambdas = Vec::with_capacity(m);
    for c in &row {
        if c.re < -1e-10 * scale {
            return Err(SynthError::NotEmbeddable(c.re));
        }
        lambdas.push(c.re.max(0.0));
    }

    let mut rng = rng_from_seed(seed);
    let mut w: Vec<Complex<f64>> = lambdas
        .iter()
        .map(|&l| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex::new(a, b) * (l / m as f64).sqrt()
        })
        .collect();
    fft.process(&mut w);
    // Real and imaginary parts are independent draws with the target
    // covariance; the real part is used.
    Ok(w.into_iter().take(n).map(|c| c.re).collect())
}

fn white(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Generates `n` increments of the requested kind.
pub fn simulate(kind: &SignalKind, n: usize, seed: u64) -> Result<IncrementSeries, SynthError> {
    if n < MIN_LENGTH {
        return Err(SynthError::BadParams(format!(
            "length {n} is below the minimum {MIN_LENGTH}"
        )));
    }
    let values = match *kind {
        SignalKind::White { sigma } => {
            check_scale("sigma", sigma)?;
            white(n, sigma, seed)
        }
        SignalKind::Ramp { step } => {
            if !step.is_finite() {
                return Err(SynthError::BadParams(format!("step {step} must be finite")));
            }
            vec![step; n]
        }
        SignalKind::Fgn { hurst } => fgn(n, hurst, seed)?,
        SignalKind::Crossover {
            sigma,
            amplitude,
            hurst,
        } => {
            check_scale("sigma", sigma)?;
            check_scale("amplitude", amplitude)?;
            let w = white(n, sigma, mix_seed(seed, 0, 0));
            let f = fgn(n, hurst, mix_seed(seed, 0, 1))?;
            w.into_iter()
                .zip(f)
                .map(|(a, b)| a + amplitude * b)
                .collect()
        }
    };
    IncrementSeries::from_values(values, format!("synthetic:{kind}:n={n}:seed={seed}"))
        .map_err(|e| SynthError::BadParams(e.to_string()))
}

/// Components of a crossover signal, generated exactly as [`simulate`]
/// does, so each can be analysed on its own.
pub fn crossover_components(
    sigma: f64,
    amplitude: f64,
    hurst: f64,
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    check_scale("sigma", sigma)?;
    check_scale("amplitude", amplitude)?;
    let w = white(n, sigma, mix_seed(seed, 0, 0));
    let f: Vec<f64> = fgn(n, hurst, mix_seed(seed, 0, 1))?
        .into_iter()
        .map(|x| amplitude * x)
        .collect();
    Ok((w, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.7, 0), 1.0);
        // H = 1/2 is white noise
        for k in 1..10 {
            assert!(fgn_autocovariance(0.5, k).abs() < 1e-15);
        }
        // lag-1 correlation 2^{2H-1} - 1
        let h = 0.75f64;
        assert!((fgn_autocovariance(h, 1) - (2f64.powf(2.0 * h - 1.0) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn fgn_sample_covariance_matches_theory() {
        let h = 0.8;
        let n = 4096;
        let seeds = 40;
        let mut acc = [0.0f64; 4];
        for s in 0..seeds {
            let x = fgn(n, h, s).unwrap();
            for (lag, a) in acc.iter_mut().enumerate() {
                *a += (0..n - lag).map(|i| x[i] * x[i + lag]).sum::<f64>() / (n - lag) as f64;
            }
        }
        for (lag, a) in acc.iter().enumerate() {
            let est = a / seeds as f64;
            let theory = fgn_autocovariance(h, lag);
            assert!((est - theory).abs() < 0.05, "lag {lag}: {est} vs {theory}");
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(fgn(100, 0.6, 3).unwrap(), fgn(100, 0.6, 3).unwrap());
        assert_ne!(fgn(100, 0.6, 3).unwrap(), fgn(100, 0.6, 4).unwrap());
        let k = SignalKind::White { sigma: 1.0 };
        assert_eq!(simulate(&k, 50, 1).unwrap(), simulate(&k, 50, 1).unwrap());
    }

    #[test]
    fn bad_params() {
        assert!(matches!(fgn(10, 1.0, 0), Err(SynthError::BadParams(_))));
        assert!(matches!(fgn(10, 0.0, 0), Err(SynthError::BadParams(_))));
        assert!(matches!(
            simulate(&SignalKind::Ramp { step: 1.0 }, 9, 0),
            Err(SynthError::BadParams(_))
        ));
        assert!(matches!(
            simulate(&SignalKind::White { sigma: -1.0 }, 100, 0),
            Err(SynthError::BadParams(_))
        ));
    }

    #[test]
    fn ramp_is_constant() {
        let r = simulate(&SignalKind::Ramp { step: 0.5 }, 100, 0).unwrap();
        assert!(r.values().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn crossover_is_sum_of_components() {
        let (w, f) = crossover_components(1.0, 0.15, 0.98, 500, 11).unwrap();
        let s = simulate(
            &SignalKind::Crossover {
                sigma: 1.0,
                amplitude: 0.15,
                hurst: 0.98,
            },
            500,
            11,
        )
        .unwrap();
        for ((a, b), c) in w.iter().zip(&f).zip(s.values()) {
            assert_eq!(a + b, *c);
        }
    }
}
