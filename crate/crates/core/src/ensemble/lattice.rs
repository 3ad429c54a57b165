use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{PointEval, WeightedSample};
use crate::error::{BohmError, Result};
use crate::rotor::{PairStateParams, RotorTrig, StateCoefficients};

/// Rank-1 Kronecker lattice over `(cos α₁, β₁, cos α₂, β₂)`, weights `R²`.
///
/// A tensor grid puts many points on the same value of the sampled
/// observables (every `cos α₁ = cos α₂` cell of the singlet gives `M₁z = 0`),
/// which shows up as spikes in fine histograms. The lattice has no such
/// alignments and is used where fine-binned densities are needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_points: u64,
}

impl LatticeSpec {
    pub fn new(n_points: u64) -> Result<Self> {
        if n_points < 2 {
            return Err(BohmError::InvalidInput(format!("lattice needs ≥ 2 points, got {n_points}")));
        }
        Ok(Self { n_points })
    }
}

/// Fixed-point generators `⌊2⁶⁴ · g^{-k}⌋` for `k = 1..4`, with
/// `g = 1.16730397826141868…` the real root of `x⁵ = x + 1` (the R₄ sequence).
const GENERATORS: [u64; 4] = [
    15_802_862_336_838_869_349,
    13_537_915_256_980_136_287,
    11_597_591_980_405_560_693,
    9_935_365_762_805_847_688,
];

/// Point `k` in the unit 4-cube.
#[inline]
pub(crate) fn lattice_point(k: u64) -> [f64; 4] {
    const SCALE: f64 = 1.0 / 9_007_199_254_740_992.0; // 2⁻⁵³
    let mut u = [0.0; 4];
    for (ui, g) in u.iter_mut().zip(GENERATORS) {
        let x = (1u64 << 63).wrapping_add(k.wrapping_add(1).wrapping_mul(g));
        *ui = ((x >> 11) as f64 + 0.5) * SCALE;
    }
    u
}

#[inline]
pub(crate) fn lattice_eval(coeffs: &StateCoefficients, k: u64) -> Option<PointEval> {
    let u = lattice_point(k);
    let (b1, b2) = (2.0 * PI * u[1], 2.0 * PI * u[3]);
    let r1 = RotorTrig::from_cos_alpha(2.0 * u[0] - 1.0, b1);
    let r2 = RotorTrig::from_cos_alpha(2.0 * u[2] - 1.0, b2);
    PointEval::evaluate(coeffs, r1, r2, b1, b2)
}

/// Lattice samples in index order, restartable at any index.
pub struct LatticeStream {
    coeffs: StateCoefficients,
    index: u64,
    end: u64,
}

pub fn lattice_stream(state: &PairStateParams, spec: LatticeSpec) -> LatticeStream {
    LatticeStream::starting_at(state, spec, 0)
}

impl LatticeStream {
    pub fn starting_at(state: &PairStateParams, spec: LatticeSpec, index: u64) -> Self {
        Self { coeffs: state.coefficients(), index, end: spec.n_points }
    }
}

impl Iterator for LatticeStream {
    type Item = WeightedSample;

    fn next(&mut self) -> Option<WeightedSample> {
        while self.index < self.end {
            let k = self.index;
            self.index += 1;
            if let Some(p) = lattice_eval(&self.coeffs, k) {
                return Some(p.sample());
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_match_quintic_root() {
        let mut g = 1.2f64;
        for _ in 0..50 {
            g -= (g.powi(5) - g - 1.0) / (5.0 * g.powi(4) - 1.0);
        }
        for (k, &a) in GENERATORS.iter().enumerate() {
            let expect = g.powi(-(k as i32 + 1));
            assert!((a as f64 / 2f64.powi(64) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn points_fill_the_cube_evenly() {
        let n = 1u64 << 16;
        let mut means = [0.0; 4];
        let mut counts = [[0u32; 8]; 4];
        for k in 0..n {
            let u = lattice_point(k);
            for d in 0..4 {
                assert!(u[d] > 0.0 && u[d] < 1.0);
                means[d] += u[d] / n as f64;
                counts[d][(u[d] * 8.0) as usize] += 1;
            }
        }
        for d in 0..4 {
            assert!((means[d] - 0.5).abs() < 1e-3);
            for c in counts[d] {
                assert!((c as f64 - n as f64 / 8.0).abs() < 20.0);
            }
        }
    }

    #[test]
    fn weights_integrate_to_one() {
        let state = PairStateParams::new(1.2, 0.3).unwrap();
        let n = 200_000u64;
        let w: f64 = lattice_stream(&state, LatticeSpec::new(n).unwrap()).map(|s| s.weight).sum();
        let total = w / n as f64 * (4.0 * 4.0 * PI * PI) * 16.0 * PI * PI;
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }
}
