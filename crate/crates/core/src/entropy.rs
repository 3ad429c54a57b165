//! Entropies in bits: binary entropy, entanglement of formation, the
//! hemisphere probability `p₊` of `M₁z`, and differential and discretized
//! Shannon entropies of a histogrammed density.

use serde::{Deserialize, Serialize};

use crate::ensemble::Histogram1D;
use crate::error::{BohmError, Result};
use crate::rotor::PairStateParams;

/// Largest clipped-mass fraction accepted by [`differential_entropy`].
pub const MAX_CLIPPED_FRACTION: f64 = 1e-3;

/// `−p log₂ p − (1−p) log₂(1−p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BohmError::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entanglement of formation of the pair state, the binary entropy of `cos²(ϑ/2)`.
pub fn entanglement_of_formation(state: &PairStateParams) -> f64 {
    binary_entropy(state.p_up()).unwrap_or(0.0)
}

/// `p₊ = P(M₁z ≥ 0)` from a histogram of `M₁z`; the bin containing zero is split
/// in proportion to its overlap with `[0, ∞)`.
pub fn hemisphere_probability(hist: &Histogram1D) -> Result<f64> {
    if !(hist.total_weight > 0.0) {
        return Err(BohmError::EmptyEnsemble);
    }
    let mut mass = hist.clipped_mass - hist.clipped_below;
    for i in 0..hist.n_bins() {
        let (left, right) = (hist.bin_left(i), hist.bin_left(i + 1));
        if left >= 0.0 {
            mass += hist.counts[i];
        } else if right > 0.0 {
            mass += hist.counts[i] * right / (right - left);
        }
    }
    Ok((mass / hist.total_weight).clamp(0.0, 1.0))
}

/// Plug-in estimate `−Σ p(μᵢ) log₂ p(μᵢ) ε`.
pub fn differential_entropy(hist: &Histogram1D) -> Result<f64> {
    if !(hist.total_weight > 0.0) {
        return Err(BohmError::EmptyEnsemble);
    }
    let fraction = hist.clipped_fraction();
    if fraction >= MAX_CLIPPED_FRACTION {
        return Err(BohmError::ClippedMassTooLarge { fraction, limit: MAX_CLIPPED_FRACTION });
    }
    let terms: Vec<f64> = (0..hist.n_bins()).map(|i| plogp(hist.density(i)) * hist.bin_width).collect();
    Ok(crate::reduce::pairwise_sum(&terms))
}

/// Shannon entropy of the distribution quantized to bins of width
/// `Δ = 2^{-ν}` centered on `iΔ`; fine bins straddling a coarse edge are split
/// in proportion to the overlap.
pub fn discretized_entropy(hist: &Histogram1D, nu: u32) -> Result<f64> {
    if !(hist.total_weight > 0.0) {
        return Err(BohmError::EmptyEnsemble);
    }
    let delta = 2f64.powi(-(nu as i32));
    if hist.bin_width > delta * (1.0 + 1e-12) {
        return Err(BohmError::Resolution { bin_width: hist.bin_width, target: delta });
    }
    let coarse_index = |x: f64| (x / delta + 0.5).floor() as i64;
    let first = coarse_index(hist.mu_min);
    let last = coarse_index(hist.mu_max);
    let mut coarse = vec![0.0; (last - first + 1) as usize];
    for i in 0..hist.n_bins() {
        let w = hist.counts[i];
        if w == 0.0 {
            continue;
        }
        let (left, right) = (hist.bin_left(i), hist.bin_left(i + 1));
        let (a, b) = (coarse_index(left), coarse_index(right));
        if a == b {
            coarse[(a - first) as usize] += w;
            continue;
        }
        for k in a..=b {
            let lo = ((k as f64 - 0.5) * delta).max(left);
            let hi = ((k as f64 + 0.5) * delta).min(right);
            if hi > lo {
                coarse[(k - first) as usize] += w * (hi - lo) / (right - left);
            }
        }
    }
    let terms: Vec<f64> = coarse.iter().map(|w| plogp(w / hist.total_weight)).collect();
    Ok(crate::reduce::pairwise_sum(&terms))
}

/// Entropy summary for one pair state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub p_plus: f64,
    /// Binary entropy of `(p₊, 1 − p₊)`.
    pub h_binary_pm: f64,
    pub eof: f64,
    /// Differential entropy of `M₁z`; `None` when too much mass falls outside
    /// the histogram range.
    pub h_diff: Option<f64>,
    pub h_nu: Vec<(u32, f64)>,
}

impl EntropyReport {
    /// Builds the report from a histogram of `M₁z`.
    pub fn from_histogram(state: &PairStateParams, hist: &Histogram1D, nus: &[u32]) -> Result<Self> {
        let p_plus = hemisphere_probability(hist)?;
        let h_nu =
            nus.iter().map(|&nu| Ok((nu, discretized_entropy(hist, nu)?))).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            p_plus,
            h_binary_pm: binary_entropy(p_plus)?,
            eof: entanglement_of_formation(state),
            h_diff: differential_entropy(hist).ok(),
            h_nu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::HistogramConfig;
    use std::f64::consts::PI;

    fn uniform(lo: f64, hi: f64, range: (f64, f64), width: f64) -> Histogram1D {
        let cfg = HistogramConfig::new(range.0, range.1, width).unwrap();
        let mut h = Histogram1D::new(&cfg);
        let n = 100_000;
        for k in 0..n {
            h.push(lo + (hi - lo) * (k as f64 + 0.5) / n as f64, 1.0);
        }
        h
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let p = (PI / 8.0).cos().powi(2);
        // −p log₂ p − q log₂ q at p = cos²(π/8), evaluated with natural logs
        let q = 1.0 - p;
        let expected = -(p * p.ln() + q * q.ln()) / 2f64.ln();
        assert!((binary_entropy(p).unwrap() - expected).abs() < 1e-15);
        assert!((binary_entropy(p).unwrap() - 0.6009).abs() < 1e-4);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn eof_endpoints() {
        let eof = |t: f64| entanglement_of_formation(&PairStateParams::new(t, 0.0).unwrap());
        assert_eq!(eof(0.0), 0.0);
        assert_eq!(eof(PI / 2.0), 1.0);
        assert_eq!(eof(PI), 0.0);
    }

    #[test]
    fn uniform_interval_of_length_two_has_one_bit() {
        let h = uniform(-1.0, 1.0, (-2.0, 2.0), 1e-3);
        assert!((differential_entropy(&h).unwrap() - 1.0).abs() < 1e-9);
        // bins are centered on iΔ, so ±1 fall mid-bin: 2^{ν+1} − 1 full bins
        // plus two half bins
        for nu in [2, 4, 8] {
            let n = 2f64.powi(nu as i32 + 1);
            let full = (n - 1.0) / n * (nu as f64 + 1.0);
            let halves = 2.0 / (2.0 * n) * (nu as f64 + 2.0);
            let hn = discretized_entropy(&h, nu).unwrap();
            assert!((hn - full - halves).abs() < 1e-9, "ν = {nu}: {hn}");
        }
        assert!((discretized_entropy(&h, 8).unwrap() - 9.0).abs() < 1e-2);
        assert!(matches!(discretized_entropy(&h, 10), Err(BohmError::Resolution { .. })));
    }

    #[test]
    fn point_mass_has_zero_discretized_entropy() {
        let cfg = HistogramConfig::new(-5.0, 5.0, 1e-3).unwrap();
        let mut h = Histogram1D::new(&cfg);
        h.push(0.5, 3.0);
        for nu in [1, 2, 4, 8] {
            assert_eq!(discretized_entropy(&h, nu).unwrap(), 0.0);
        }
        assert_eq!(hemisphere_probability(&h).unwrap(), 1.0);
    }

    #[test]
    fn straddling_bin_is_split() {
        let cfg = HistogramConfig::new(-0.25, 0.75, 0.5).unwrap();
        let mut h = Histogram1D::new(&cfg);
        h.push(0.1, 1.0);
        h.push(2.0, 1.0);
        h.push(-3.0, 2.0);
        assert!((hemisphere_probability(&h).unwrap() - 0.5 * 1.0 / 4.0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn clipped_mass_guard() {
        let cfg = HistogramConfig::new(0.0, 1.0, 0.01).unwrap();
        let mut h = Histogram1D::new(&cfg);
        h.push(0.5, 1.0);
        h.push(3.0, 0.01);
        assert!(matches!(differential_entropy(&h), Err(BohmError::ClippedMassTooLarge { .. })));
    }
}
