use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{PointEval, WeightedSample};
use crate::error::{BohmError, Result};
use crate::rotor::{double_angle, PairStateParams, RotorTrig, StateCoefficients};

/// Midpoint grid over `(cos α₁, β₁, cos α₂, β₂)` with `γ₁ = γ₂ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_cos_alpha1: usize,
    pub n_beta1: usize,
    pub n_cos_alpha2: usize,
    pub n_beta2: usize,
}

impl GridSpec {
    pub fn new(n_cos_alpha1: usize, n_beta1: usize, n_cos_alpha2: usize, n_beta2: usize) -> Result<Self> {
        let spec = Self { n_cos_alpha1, n_beta1, n_cos_alpha2, n_beta2 };
        if spec.dims().iter().any(|&n| n < 2) {
            return Err(BohmError::InvalidInput(format!("grid counts must be ≥ 2, got {:?}", spec.dims())));
        }
        if spec.dims().iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(BohmError::InvalidInput("grid too large".into()));
        }
        Ok(spec)
    }

    /// `n` cells along every axis.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n, n)
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.n_cos_alpha1, self.n_beta1, self.n_cos_alpha2, self.n_beta2]
    }

    pub fn n_points(&self) -> usize {
        self.dims().iter().product()
    }

    /// Volume of one cell in `(cos α₁, β₁, cos α₂, β₂)`.
    pub fn cell_volume(&self) -> f64 {
        let [a1, b1, a2, b2] = self.dims().map(|n| n as f64);
        (2.0 / a1) * (2.0 * PI / b1) * (2.0 / a2) * (2.0 * PI / b2)
    }

    /// Every count halved (at least one cell); used for the error estimate.
    pub(crate) fn half(&self) -> Self {
        let h = |n: usize| (n / 2).max(1);
        Self {
            n_cos_alpha1: h(self.n_cos_alpha1),
            n_beta1: h(self.n_beta1),
            n_cos_alpha2: h(self.n_cos_alpha2),
            n_beta2: h(self.n_beta2),
        }
    }
}

/// Per-axis trigonometric tables so grid points need no transcendental calls.
pub(crate) struct GridTables {
    spec: GridSpec,
    /// `(cos α, sin α, cos α/2, sin α/2)` per cell
    alpha1: Vec<[f64; 4]>,
    alpha2: Vec<[f64; 4]>,
    /// `(β, cos β, sin β, cos β/2, sin β/2)` per cell
    beta1: Vec<[f64; 5]>,
    beta2: Vec<[f64; 5]>,
}

fn alpha_table(n: usize) -> Vec<[f64; 4]> {
    (0..n)
        .map(|i| {
            let c = -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
            let t = RotorTrig::from_cos_alpha(c, 0.0);
            [t.cos_alpha, t.sin_alpha, t.cos_half_alpha, t.sin_half_alpha]
        })
        .collect()
}

fn beta_table(n: usize) -> Vec<[f64; 5]> {
    (0..n)
        .map(|j| {
            let b = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let (sh, ch) = (0.5 * b).sin_cos();
            let (s, c) = double_angle(sh, ch);
            [b, c, s, ch, sh]
        })
        .collect()
}

impl GridTables {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            alpha1: alpha_table(spec.n_cos_alpha1),
            alpha2: alpha_table(spec.n_cos_alpha2),
            beta1: beta_table(spec.n_beta1),
            beta2: beta_table(spec.n_beta2),
        }
    }

    /// Number of leaves: one per rotor-1 cell.
    pub fn n_rows(&self) -> usize {
        self.spec.n_cos_alpha1 * self.spec.n_beta1
    }

    fn rotor(a: &[f64; 4], b: &[f64; 5]) -> RotorTrig {
        RotorTrig::from_tables(a[0], a[1], a[2], a[3], b[1], b[2], b[3], b[4])
    }

    /// Visits every non-node point of rotor-1 cell `row`, rotor-2 cells in order.
    #[inline]
    pub fn visit_row(&self, coeffs: &StateCoefficients, row: usize, mut f: impl FnMut(&PointEval)) {
        let a1 = &self.alpha1[row / self.spec.n_beta1];
        let b1 = &self.beta1[row % self.spec.n_beta1];
        let r1 = Self::rotor(a1, b1);
        for a2 in &self.alpha2 {
            for b2 in &self.beta2 {
                let r2 = Self::rotor(a2, b2);
                if let Some(p) = PointEval::evaluate(coeffs, r1, r2, b1[0], b2[0]) {
                    f(&p);
                }
            }
        }
    }
}

/// Deterministic stream of grid samples with weight `R²`, restartable at any index.
pub struct GridStream {
    tables: GridTables,
    coeffs: StateCoefficients,
    index: usize,
    end: usize,
}

/// Cell-center samples in row-major order `(cos α₁, β₁, cos α₂, β₂)`.
pub fn grid_stream(state: &PairStateParams, spec: GridSpec) -> GridStream {
    GridStream::starting_at(state, spec, 0)
}

impl GridStream {
    pub fn starting_at(state: &PairStateParams, spec: GridSpec, index: usize) -> Self {
        Self { tables: GridTables::new(spec), coeffs: state.coefficients(), index, end: spec.n_points() }
    }

    /// Index of the next cell to be visited.
    pub fn position(&self) -> usize {
        self.index
    }
}

impl Iterator for GridStream {
    type Item = WeightedSample;

    fn next(&mut self) -> Option<WeightedSample> {
        let s = self.tables.spec;
        while self.index < self.end {
            let k = self.index;
            self.index += 1;
            let j2 = k % s.n_beta2;
            let i2 = (k / s.n_beta2) % s.n_cos_alpha2;
            let row = k / (s.n_beta2 * s.n_cos_alpha2);
            let (a1, b1) = (&self.tables.alpha1[row / s.n_beta1], &self.tables.beta1[row % s.n_beta1]);
            let (a2, b2) = (&self.tables.alpha2[i2], &self.tables.beta2[j2]);
            let r1 = GridTables::rotor(a1, b1);
            let r2 = GridTables::rotor(a2, b2);
            if let Some(p) = PointEval::evaluate(&self.coeffs, r1, r2, b1[0], b2[0]) {
                return Some(p.sample());
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momenta::POLE_THRESHOLD;

    #[test]
    fn tiny_grid_has_sixteen_midpoints() {
        let spec = GridSpec::cube(2).unwrap();
        let samples: Vec<_> = grid_stream(&PairStateParams::new(1.0, 0.5).unwrap(), spec).collect();
        assert_eq!(samples.len(), 16);
        for s in &samples {
            for r in [s.cfg.rotor1, s.cfg.rotor2] {
                assert!((r.alpha.cos().abs() - 0.5).abs() < 1e-15);
                assert!(r.alpha.sin().abs() > POLE_THRESHOLD);
                assert_eq!(r.gamma, 0.0);
            }
        }
    }

    #[test]
    fn weight_sum_normalizes() {
        // Σ R² · cell volume · (4π)² → 1 (the γ integrals contribute 4π each)
        let state = PairStateParams::new(0.7, 1.9).unwrap();
        for n in [8, 16] {
            let spec = GridSpec::cube(n).unwrap();
            let w: f64 = grid_stream(&state, spec).map(|s| s.weight).sum();
            let total = w * spec.cell_volume() * 16.0 * PI * PI;
            assert!((total - 1.0).abs() < 1e-12, "n = {n}: {total}");
        }
    }

    #[test]
    fn restart_resumes_the_same_sequence() {
        let state = PairStateParams::new(0.3, 0.0).unwrap();
        let spec = GridSpec::new(3, 4, 2, 5).unwrap();
        let all: Vec<_> = grid_stream(&state, spec).collect();
        let tail: Vec<_> = GridStream::starting_at(&state, spec, 50).collect();
        assert_eq!(&all[all.len() - tail.len()..], &tail[..]);
        assert_eq!(all.len(), spec.n_points());
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(GridSpec::new(1, 4, 4, 4).is_err());
        assert_eq!(GridSpec::cube(5).unwrap().half().dims(), [2; 4]);
    }
}
