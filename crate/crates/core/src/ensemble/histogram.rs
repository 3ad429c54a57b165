use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::reduce::Merge;

/// Range and bin width of a histogram. Bins are half-open `[left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub mu_min: f64,
    pub mu_max: f64,
    pub bin_width: f64,
}

impl HistogramConfig {
    /// `mu_max` is rounded to a whole number of bins above `mu_min`.
    pub fn new(mu_min: f64, mu_max: f64, bin_width: f64) -> Result<Self> {
        if !(mu_min.is_finite() && mu_max.is_finite() && mu_max > mu_min) {
            return Err(BohmError::InvalidInput(format!("histogram range [{mu_min}, {mu_max}] is empty")));
        }
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(BohmError::InvalidInput(format!("bin width {bin_width} must be positive")));
        }
        let n = ((mu_max - mu_min) / bin_width).round().max(1.0);
        if n > 1e8 {
            return Err(BohmError::InvalidInput(format!("{n} bins requested")));
        }
        Ok(Self { mu_min, mu_max: mu_min + n * bin_width, bin_width })
    }

    pub fn n_bins(&self) -> usize {
        ((self.mu_max - self.mu_min) / self.bin_width).round() as usize
    }
}

/// Weighted histogram; densities follow the rectangular-kernel estimator
/// `Σ δ_ε(μ - μᵢ) wᵢ / Σ wᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram1D {
    pub mu_min: f64,
    pub mu_max: f64,
    pub bin_width: f64,
    pub counts: Vec<f64>,
    pub total_weight: f64,
    pub clipped_mass: f64,
    /// Part of `clipped_mass` below `mu_min`.
    pub clipped_below: f64,
}

impl Histogram1D {
    pub fn new(config: &HistogramConfig) -> Self {
        Self {
            mu_min: config.mu_min,
            mu_max: config.mu_max,
            bin_width: config.bin_width,
            counts: vec![0.0; config.n_bins()],
            total_weight: 0.0,
            clipped_mass: 0.0,
            clipped_below: 0.0,
        }
    }

    pub fn config(&self) -> HistogramConfig {
        HistogramConfig { mu_min: self.mu_min, mu_max: self.mu_max, bin_width: self.bin_width }
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn push(&mut self, mu: f64, weight: f64) {
        self.total_weight += weight;
        let x = (mu - self.mu_min) / self.bin_width;
        if x >= 0.0 && x < self.counts.len() as f64 {
            self.counts[x as usize] += weight;
        } else {
            self.clipped_mass += weight;
            if !(x >= 0.0) {
                self.clipped_below += weight;
            }
        }
    }

    pub fn bin_left(&self, i: usize) -> f64 {
        self.mu_min + i as f64 * self.bin_width
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.mu_min + (i as f64 + 0.5) * self.bin_width
    }

    pub fn density(&self, i: usize) -> f64 {
        if self.total_weight > 0.0 {
            self.counts[i] / (self.total_weight * self.bin_width)
        } else {
            0.0
        }
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|i| self.density(i)).collect()
    }

    /// Probability mass of bin `i`.
    pub fn mass(&self, i: usize) -> f64 {
        if self.total_weight > 0.0 {
            self.counts[i] / self.total_weight
        } else {
            0.0
        }
    }

    pub fn clipped_fraction(&self) -> f64 {
        if self.total_weight > 0.0 {
            self.clipped_mass / self.total_weight
        } else {
            0.0
        }
    }

    /// `∫ density dμ` over the histogram range.
    pub fn integral(&self) -> f64 {
        crate::reduce::pairwise_sum(&self.densities()) * self.bin_width
    }
}

impl Merge for Histogram1D {
    fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
        self.total_weight += other.total_weight;
        self.clipped_mass += other.clipped_mass;
        self.clipped_below += other.clipped_below;
    }
}
