//! Gaussian kernel density estimation for label-position analysis.
//!
//! Positive-label sentence positions are mapped to relative positions in
//! `[0, 1]` (first sentence 0, last sentence 1) and smoothed with a Gaussian
//! kernel using Silverman's bandwidth by default.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::labelsets::MultilingualLabels;

const SQRT_TAU: f64 = 2.506_628_274_631_000_5; // sqrt(2 * pi)

/// Bandwidth fallback when the data has no spread (single point, constant
/// samples).
const FALLBACK_BANDWIDTH: f64 = 0.05;

/// Which label set contributes positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSetChoice {
    A,
    B,
    C,
    D,
    Union,
}

impl std::str::FromStr for LabelSetChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(LabelSetChoice::A),
            "b" => Ok(LabelSetChoice::B),
            "c" => Ok(LabelSetChoice::C),
            "d" => Ok(LabelSetChoice::D),
            "union" => Ok(LabelSetChoice::Union),
            other => Err(Error::invalid(format!(
                "unknown label set {other:?} (expected a, b, c, d, or union)"
            ))),
        }
    }
}

/// Relative in-document positions `i / (N - 1)` of positive labels; a
/// single-sentence document contributes 0.5.
pub fn relative_positions(labels: &[MultilingualLabels], choice: LabelSetChoice) -> Vec<f64> {
    let mut positions = Vec::new();
    for record in labels {
        let indices: Vec<usize> = match choice {
            LabelSetChoice::A => record.set_a.clone(),
            LabelSetChoice::B => record.set_b.clone(),
            LabelSetChoice::C => record.set_c.clone(),
            LabelSetChoice::D => record.set_d.clone(),
            LabelSetChoice::Union => record.union(),
        };
        for i in indices {
            positions.push(if record.doc_len > 1 {
                i as f64 / (record.doc_len - 1) as f64
            } else {
                0.5
            });
        }
    }
    positions
}

/// Gaussian kernel density estimator.
#[derive(Debug, Clone)]
pub struct GaussianKde {
    samples: Vec<f64>,
    pub bandwidth: f64,
}

/// Silverman's rule of thumb: `0.9 min(sd, iqr/1.34) n^(-1/5)`, with a fixed
/// fallback when the spread is degenerate.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return FALLBACK_BANDWIDTH;
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let iqr = quantile(0.75) - quantile(0.25);

    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * nf.powf(-0.2);
    if h < 1e-9 {
        FALLBACK_BANDWIDTH
    } else {
        h
    }
}

impl GaussianKde {
    /// `bandwidth = None` selects Silverman's rule.
    pub fn new(samples: Vec<f64>, bandwidth: Option<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid(
                "density estimation needs at least one sample",
            ));
        }
        let bandwidth = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => {
                return Err(Error::invalid(format!("bandwidth {h} must be positive")));
            }
            None => silverman_bandwidth(&samples),
        };
        Ok(GaussianKde { samples, bandwidth })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let n = self.samples.len() as f64;
        self.samples
            .iter()
            .map(|&xi| {
                let z = (x - xi) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            / (n * h * SQRT_TAU)
    }

    /// Trapezoid integral over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, points: usize) -> f64 {
        assert!(points >= 2 && hi > lo);
        let step = (hi - lo) / (points - 1) as f64;
        let mut total = 0.0;
        let mut prev = self.evaluate(lo);
        for i in 1..points {
            let y = self.evaluate(lo + step * i as f64);
            total += 0.5 * (prev + y) * step;
            prev = y;
        }
        total
    }

    /// Support padded by four bandwidths on each side; integrating the
    /// density over it captures essentially all mass.
    pub fn padded_support(&self) -> (f64, f64) {
        let lo = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo - 4.0 * self.bandwidth, hi + 4.0 * self.bandwidth)
    }
}

/// Density curve sampled on an even grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Trapezoid integral of the estimator over its padded support; close to
    /// 1 by construction.
    pub padded_integral: f64,
}

impl DensityCurve {
    /// Fraction of the padded-support mass lying above `threshold`.
    pub fn mass_above(&self, kde: &GaussianKde, threshold: f64) -> f64 {
        let (_, hi) = kde.padded_support();
        if hi <= threshold {
            return 0.0;
        }
        kde.integrate(threshold, hi, 2001) / self.padded_integral
    }
}

/// Kernel density of label positions evaluated on `grid_size` points over
/// `[0, 1]`.
pub fn position_density(
    positions: &[f64],
    bandwidth: Option<f64>,
    grid_size: usize,
) -> Result<(DensityCurve, GaussianKde)> {
    if positions.is_empty() {
        return Err(Error::invalid("no positive labels to analyze"));
    }
    if grid_size < 2 {
        return Err(Error::invalid("grid must have at least two points"));
    }
    let kde = GaussianKde::new(positions.to_vec(), bandwidth)?;
    let step = 1.0 / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
    let density: Vec<f64> = grid.iter().map(|&x| kde.evaluate(x)).collect();
    let (lo, hi) = kde.padded_support();
    let padded_integral = kde.integrate(lo, hi, 4001);
    Ok((
        DensityCurve {
            grid,
            density,
            bandwidth: kde.bandwidth,
            padded_integral,
        },
        kde,
    ))
}
