//! Quantum-equilibrium ensembles and weighted estimators.
//!
//! Three samplers produce the same statistics: a midpoint tensor grid, a
//! Kronecker lattice (both weight points by `R²`) and rejection Monte Carlo
//! (unit weights). [`Ensemble::accumulate`] drives any of them through the
//! fixed-shape reduction in [`crate::reduce`], producing a primary estimate
//! plus the replicas used for error bars:
//!
//! * grid: the same grid at half resolution,
//! * lattice: the first half of the points,
//! * Monte Carlo: independent batches (batch means).

mod estimators;
mod grid;
mod histogram;
mod lattice;
mod mc;
mod observable;

pub(crate) use estimators::bilinear;
pub use estimators::{
    angle_statistics, correlation_tensor, estimate_average, estimate_densities, estimate_density,
    estimate_density_and_mean, AngleStatistics, CorrelationTensor, DensityEstimate, EnsembleSummary, Matrix3,
    Moments, SummaryAverages,
};
pub use grid::{grid_stream, GridSpec, GridStream};
pub use histogram::{Histogram1D, HistogramConfig};
pub use lattice::{lattice_stream, LatticeSpec, LatticeStream};
pub use mc::{mc_stream, McSpec, McStream, MC_BLOCK};
pub use observable::Observable;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::momenta::{momentum_unchecked, Vec3, POLE_THRESHOLD};
use crate::reduce::{tree_reduce, try_tree_reduce, Merge};
use crate::rotor::{
    node_threshold, Amplitudes, EulerTriple, PairConfiguration, PairStateParams, RotorTrig, StateCoefficients,
};

/// A configuration with its ensemble weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub cfg: PairConfiguration,
    pub weight: f64,
}

/// Everything the estimators need at one sample point.
#[derive(Debug, Clone, Copy)]
pub struct PointEval {
    pub weight: f64,
    pub r1: RotorTrig,
    pub r2: RotorTrig,
    pub beta1: f64,
    pub beta2: f64,
    pub m1: Vec3,
    pub m2: Vec3,
}

impl PointEval {
    /// `None` at nodes and poles; otherwise `weight = R²`.
    #[inline]
    pub(crate) fn evaluate(
        coeffs: &StateCoefficients,
        r1: RotorTrig,
        r2: RotorTrig,
        beta1: f64,
        beta2: f64,
    ) -> Option<Self> {
        if r1.sin_alpha < POLE_THRESHOLD || r2.sin_alpha < POLE_THRESHOLD {
            return None;
        }
        let amp = Amplitudes::evaluate(coeffs, &r1, &r2);
        let weight = amp.density();
        if weight <= node_threshold() {
            return None;
        }
        let g = amp.phase_gradient();
        Some(Self {
            weight,
            r1,
            r2,
            beta1,
            beta2,
            m1: momentum_unchecked(&r1, g.rotor(1)),
            m2: momentum_unchecked(&r2, g.rotor(2)),
        })
    }

    pub fn configuration(&self) -> PairConfiguration {
        let rotor = |t: &RotorTrig, beta: f64| EulerTriple {
            alpha: t.sin_alpha.atan2(t.cos_alpha),
            beta,
            gamma: 0.0,
        };
        PairConfiguration::new(rotor(&self.r1, self.beta1), rotor(&self.r2, self.beta2))
    }

    pub fn sample(&self) -> WeightedSample {
        WeightedSample { cfg: self.configuration(), weight: self.weight }
    }

    /// Principal axis of rotor 1 or 2.
    pub fn axis(&self, index: usize) -> Vec3 {
        let t = if index == 1 { &self.r1 } else { &self.r2 };
        Vec3::new(t.sin_alpha * t.sin_beta, t.sin_alpha * t.cos_beta, t.cos_alpha)
    }
}

/// Which sampler generates the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    Grid(GridSpec),
    Lattice(LatticeSpec),
    Mc(McSpec),
}

/// How the replicas of a [`Replicated`] translate into a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// `|full − reduced|` with one replica at reduced resolution.
    Resolution,
    /// Standard error of the mean over independent batches.
    BatchMeans,
}

/// Weighted mean with its error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub value: f64,
    pub std_error: f64,
    /// Kish effective sample size `(Σw)²/Σw²`.
    pub n_effective: f64,
}

impl EstimatorResult {
    /// `|value − expected| ≤ k·se + floor`
    pub fn agrees_with(&self, expected: f64, k: f64, floor: f64) -> bool {
        (self.value - expected).abs() <= k * self.std_error + floor
    }
}

/// Weight bookkeeping that rides along with every accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightTotals {
    pub count: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
}

impl WeightTotals {
    #[inline]
    fn push(&mut self, w: f64) {
        self.count += 1;
        self.sum_w += w;
        self.sum_w2 += w * w;
    }

    pub fn n_effective(&self) -> f64 {
        if self.sum_w2 > 0.0 {
            self.sum_w * self.sum_w / self.sum_w2
        } else {
            0.0
        }
    }
}

impl Merge for WeightTotals {
    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
    }
}

impl<T: Merge> Merge for Vec<T> {
    fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

#[derive(Clone)]
struct Tally<A> {
    acc: A,
    totals: WeightTotals,
}

impl<A: Merge> Merge for Tally<A> {
    fn merge(&mut self, other: &Self) {
        self.acc.merge(&other.acc);
        self.totals.merge(&other.totals);
    }
}

/// A primary accumulator plus the replicas that carry its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicated<A> {
    pub primary: A,
    pub replicas: Vec<A>,
    pub model: ErrorModel,
    pub totals: WeightTotals,
}

impl<A> Replicated<A> {
    pub fn map<T>(&self, f: impl Fn(&A) -> T) -> Replicated<T> {
        Replicated {
            primary: f(&self.primary),
            replicas: self.replicas.iter().map(&f).collect(),
            model: self.model,
            totals: self.totals,
        }
    }

    /// Applies a scalar statistic to the primary and every replica.
    pub fn estimate(&self, f: impl Fn(&A) -> f64) -> EstimatorResult {
        let value = f(&self.primary);
        let reps: Vec<f64> = self.replicas.iter().map(&f).collect();
        EstimatorResult {
            value,
            std_error: standard_error(self.model, value, &reps),
            n_effective: self.totals.n_effective(),
        }
    }
}

fn standard_error(model: ErrorModel, value: f64, reps: &[f64]) -> f64 {
    match model {
        ErrorModel::Resolution => reps.first().map_or(f64::INFINITY, |r| (value - r).abs()),
        ErrorModel::BatchMeans => {
            let b = reps.len();
            if b < 2 {
                return f64::INFINITY;
            }
            let mean = crate::reduce::pairwise_sum(reps) / b as f64;
            let ss: Vec<f64> = reps.iter().map(|r| (r - mean).powi(2)).collect();
            (crate::reduce::pairwise_sum(&ss) / ((b - 1) * b) as f64).sqrt()
        }
    }
}

/// Lattice leaf size and the Monte Carlo batch count.
const LATTICE_LEAF: u64 = 1 << 16;
const MC_BATCHES: u64 = 32;

/// A state together with the sampler that realizes its equilibrium ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub state: PairStateParams,
    pub sampler: Sampler,
}

impl Ensemble {
    pub fn new(state: PairStateParams, sampler: Sampler) -> Self {
        Self { state, sampler }
    }

    /// Folds `visit` over every sample.
    ///
    /// `make` builds an empty accumulator; the weight of each point is in
    /// [`PointEval::weight`]. Results are independent of the thread count.
    pub fn accumulate<A, M, V>(&self, make: M, visit: V) -> Result<Replicated<A>>
    where
        A: Merge,
        M: Fn() -> A + Sync,
        V: Fn(&mut A, &PointEval) + Sync,
    {
        let coeffs = self.state.coefficients();
        let fresh = || Tally { acc: make(), totals: WeightTotals::default() };
        let (primary, replicas, model) = match self.sampler {
            Sampler::Grid(spec) => {
                let pass = |spec: GridSpec| {
                    let tables = grid::GridTables::new(spec);
                    tree_reduce(tables.n_rows(), &|row| {
                        let mut t = fresh();
                        tables.visit_row(&coeffs, row, |p| {
                            t.totals.push(p.weight);
                            visit(&mut t.acc, p);
                        });
                        t
                    })
                };
                let full = pass(spec);
                let half = pass(spec.half());
                (full, vec![half], ErrorModel::Resolution)
            }
            Sampler::Lattice(spec) => {
                let pass = |lo: u64, hi: u64| {
                    let leaves = (hi - lo).div_ceil(LATTICE_LEAF) as usize;
                    tree_reduce(leaves, &|leaf| {
                        let start = lo + leaf as u64 * LATTICE_LEAF;
                        let end = (start + LATTICE_LEAF).min(hi);
                        let mut t = fresh();
                        for k in start..end {
                            if let Some(p) = lattice::lattice_eval(&coeffs, k) {
                                t.totals.push(p.weight);
                                visit(&mut t.acc, &p);
                            }
                        }
                        t
                    })
                };
                let half = spec.n_points / 2;
                let first = pass(0, half);
                let mut full = first.clone();
                full.merge(&pass(half, spec.n_points));
                (full, vec![first], ErrorModel::Resolution)
            }
            Sampler::Mc(spec) => {
                let env = mc::envelope(&self.state, spec.envelope_safety);
                let nb = spec.n_blocks();
                let n_batches = nb.min(MC_BATCHES);
                let batches: Vec<Tally<A>> = (0..n_batches)
                    .into_par_iter()
                    .map(|i| {
                        let (b0, b1) = (i * nb / n_batches, (i + 1) * nb / n_batches);
                        try_tree_reduce((b1 - b0) as usize, &|j| {
                            let mut t = fresh();
                            mc::mc_block(&coeffs, env, &spec, b0 + j as u64, |p| {
                                t.totals.push(p.weight);
                                visit(&mut t.acc, p);
                            })?;
                            Ok::<_, BohmError>(t)
                        })
                    })
                    .collect::<Result<_>>()?;
                let full = tree_reduce(batches.len(), &|i| batches[i].clone());
                (full, batches, ErrorModel::BatchMeans)
            }
        };
        if !(primary.totals.sum_w > 0.0) {
            return Err(BohmError::EmptyEnsemble);
        }
        Ok(Replicated {
            primary: primary.acc,
            totals: primary.totals,
            replicas: replicas.into_iter().map(|t| t.acc).collect(),
            model,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_cos_alpha1(ens: &Ensemble) -> EstimatorResult {
        let r = ens
            .accumulate(
                || [0.0; 2],
                |a, p| {
                    a[0] += p.weight;
                    a[1] += p.weight * p.r1.cos_alpha;
                },
            )
            .unwrap();
        r.estimate(|a| a[1] / a[0])
    }

    #[test]
    fn samplers_agree_on_a_marginal() {
        // ϑ = 0: cos α₁ has density (1 + c)/2, mean 1/3; the n-point midpoint
        // rule gives Σc²/n = 1/3 − 1/(3n²)
        let state = PairStateParams::new(0.0, 0.0).unwrap();
        let g = mean_cos_alpha1(&Ensemble::new(state, Sampler::Grid(GridSpec::cube(8).unwrap())));
        assert!((g.value - (1.0 / 3.0 - 1.0 / 192.0)).abs() < 1e-14);
        assert!((g.std_error - (1.0 / 48.0 - 1.0 / 192.0)).abs() < 1e-14);
        let l = mean_cos_alpha1(&Ensemble::new(state, Sampler::Lattice(LatticeSpec::new(100_000).unwrap())));
        assert!((l.value - 1.0 / 3.0).abs() < 1e-3);
        let m = mean_cos_alpha1(&Ensemble::new(state, Sampler::Mc(McSpec::new(50_000, 3).unwrap())));
        assert!(m.agrees_with(1.0 / 3.0, 4.0, 0.0), "{m:?}");
        assert!(m.std_error > 0.0 && m.std_error < 0.01);
        assert_eq!(m.n_effective, 50_000.0);
    }

    #[test]
    fn weight_totals_track_kish_size() {
        let mut t = WeightTotals::default();
        for w in [1.0, 1.0, 2.0] {
            t.push(w);
        }
        assert!((t.n_effective() - 16.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn batch_means_error() {
        let se = standard_error(ErrorModel::BatchMeans, 0.0, &[1.0, 2.0, 3.0, 4.0]);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(standard_error(ErrorModel::Resolution, 1.0, &[0.75]), 0.25);
    }
}
