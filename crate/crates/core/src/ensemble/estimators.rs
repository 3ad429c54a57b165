use serde::{Deserialize, Serialize};

use super::{
    Ensemble, ErrorModel, EstimatorResult, Histogram1D, HistogramConfig, Observable, PointEval, Replicated,
};
use crate::error::Result;
use crate::momenta::{relative_azimuth, Vec3};
use crate::reduce::Merge;
use crate::rotor::{PairStateParams, PhysicalConstants};

pub type Matrix3 = [[f64; 3]; 3];

/// Weighted sums `Σw` and `Σw·x` for a fixed list of observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub sum_w: Vec<f64>,
    pub sum_wx: Vec<f64>,
}

impl Moments {
    pub fn new(n: usize) -> Self {
        Self { sum_w: vec![0.0; n], sum_wx: vec![0.0; n] }
    }

    #[inline]
    pub fn push(&mut self, i: usize, x: f64, w: f64) {
        self.sum_w[i] += w;
        self.sum_wx[i] += w * x;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum_wx[i] / self.sum_w[i]
    }
}

impl Merge for Moments {
    fn merge(&mut self, other: &Self) {
        self.sum_w.merge(&other.sum_w);
        self.sum_wx.merge(&other.sum_wx);
    }
}

/// Weighted ensemble average of an observable; points where it is `None` are skipped.
pub fn estimate_average<F>(ens: &Ensemble, observable: F) -> Result<EstimatorResult>
where
    F: Fn(&PointEval) -> Option<f64> + Sync,
{
    let rep = ens.accumulate(
        || Moments::new(1),
        |m, p| {
            if let Some(x) = observable(p) {
                m.push(0, x, p.weight);
            }
        },
    )?;
    Ok(rep.estimate(|m| m.mean(0)))
}

/// Histogram estimate of `dP/dμ` with a per-bin error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub histogram: Histogram1D,
    pub std_error: Vec<f64>,
    pub model: ErrorModel,
    pub n_effective: f64,
}

impl DensityEstimate {
    fn from_replicated(rep: &Replicated<Histogram1D>) -> Self {
        let n = rep.primary.n_bins();
        let std_error = (0..n).map(|i| rep.estimate(|h| h.density(i)).std_error).collect();
        Self {
            histogram: rep.primary.clone(),
            std_error,
            model: rep.model,
            n_effective: rep.totals.n_effective(),
        }
    }
}

/// Normalized weighted histogram of one observable.
pub fn estimate_density<F>(ens: &Ensemble, observable: F, config: &HistogramConfig) -> Result<DensityEstimate>
where
    F: Fn(&PointEval) -> Option<f64> + Sync,
{
    let rep = ens.accumulate(
        || Histogram1D::new(config),
        |h, p| {
            if let Some(x) = observable(p) {
                h.push(x, p.weight);
            }
        },
    )?;
    Ok(DensityEstimate::from_replicated(&rep))
}

/// Histogram of an observable together with its mean, from one pass.
pub fn estimate_density_and_mean<F>(
    ens: &Ensemble,
    observable: F,
    config: &HistogramConfig,
) -> Result<(DensityEstimate, EstimatorResult)>
where
    F: Fn(&PointEval) -> Option<f64> + Sync,
{
    let rep = ens.accumulate(
        || (Histogram1D::new(config), Moments::new(1)),
        |(h, m), p| {
            if let Some(x) = observable(p) {
                h.push(x, p.weight);
                m.push(0, x, p.weight);
            }
        },
    )?;
    let mean = rep.estimate(|(_, m)| m.mean(0));
    Ok((DensityEstimate::from_replicated(&rep.map(|(h, _)| h.clone())), mean))
}

/// Several histograms from a single pass over the ensemble.
pub fn estimate_densities(
    ens: &Ensemble,
    requests: &[(Observable, HistogramConfig)],
) -> Result<Vec<DensityEstimate>> {
    let rep = ens.accumulate(
        || requests.iter().map(|(_, c)| Histogram1D::new(c)).collect::<Vec<_>>(),
        |hs, p| {
            for (h, (o, _)) in hs.iter_mut().zip(requests) {
                if let Some(x) = o.eval(p) {
                    h.push(x, p.weight);
                }
            }
        },
    )?;
    Ok((0..requests.len()).map(|i| DensityEstimate::from_replicated(&rep.map(|hs| hs[i].clone()))).collect())
}

// Slot layout of the summary accumulator.
const RAW: usize = 0;
const NORM: usize = 9;
const M1Z: usize = 18;
const M2Z: usize = 19;
const M1_SQ: usize = 20;
const M2_SQ: usize = 21;
const MXY: usize = 22;
const KINETIC: usize = 23;
const QPOT: usize = 24;
const DOT: usize = 25;
const TOTAL_SQ: usize = 26;
const COS_PHI: usize = 27;
const COS_PHI_SQ: usize = 28;
const COS_AZ: usize = 29;
const COS_AZ_SQ: usize = 30;
const SIN_AZ: usize = 31;
const SIN_AZ_SQ: usize = 32;
const M1_LEN: usize = 33;
const SLOTS: usize = 34;

fn matrix(m: &Moments, base: usize) -> Matrix3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.mean(base + 3 * i + j);
        }
    }
    t
}

/// `(xx + yy)/2 · cos φ + (yx − xy)/2 · sin φ`: the in-plane amplitude of a
/// tensor whose xy-block is `A (cos φ, −sin φ; sin φ, cos φ)`.
fn in_plane_amplitude(t: &Matrix3, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    0.5 * (t[0][0] + t[1][1]) * c + 0.5 * (t[1][0] - t[0][1]) * s
}

/// `⟨M₁ᵢM₂ⱼ⟩` and `⟨M₁ᵢM₂ⱼ/(|M₁||M₂|)⟩` with the renormalized scalars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTensor {
    pub raw: [[EstimatorResult; 3]; 3],
    pub normalized: [[EstimatorResult; 3]; 3],
    /// In-plane amplitude of the normalized tensor, times 3.
    pub bx: EstimatorResult,
    /// `−3 ⟨M₁zM₂z/(|M₁||M₂|)⟩`
    pub bz: EstimatorResult,
    /// In-plane amplitude of the raw tensor, times 6.
    pub c_m: EstimatorResult,
    #[serde(skip_serializing)]
    pub raw_samples: Replicated<Matrix3>,
    #[serde(skip_serializing)]
    pub normalized_samples: Replicated<Matrix3>,
}

impl CorrelationTensor {
    fn from_moments(rep: &Replicated<Moments>, phi: f64) -> Self {
        let raw_samples = rep.map(|m| matrix(m, RAW));
        let normalized_samples = rep.map(|m| matrix(m, NORM));
        let elements = |r: &Replicated<Matrix3>| {
            let mut out = [[r.estimate(|t| t[0][0]); 3]; 3];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = r.estimate(|t| t[i][j]);
                }
            }
            out
        };
        Self {
            raw: elements(&raw_samples),
            normalized: elements(&normalized_samples),
            bx: normalized_samples.estimate(|t| 3.0 * in_plane_amplitude(t, phi)),
            bz: normalized_samples.estimate(|t| -3.0 * t[2][2]),
            c_m: raw_samples.estimate(|t| 6.0 * in_plane_amplitude(t, phi)),
            raw_samples,
            normalized_samples,
        }
    }

    /// `3 aᵀ N b` with `N` the normalized tensor.
    pub fn contract(&self, a: &Vec3, b: &Vec3) -> EstimatorResult {
        self.normalized_samples.estimate(|t| 3.0 * bilinear(t, a, b))
    }
}

pub(crate) fn bilinear(t: &Matrix3, a: &Vec3, b: &Vec3) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * t[i][j] * b[j];
        }
    }
    s
}

/// Statistics of the angle `Φ` between the momenta and of `φ_rel = φ₂ − φ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleStatistics {
    pub cos_big_phi: EstimatorResult,
    /// Standard deviation of `cos Φ`.
    pub delta_cos_big_phi: EstimatorResult,
    pub cos_rel: EstimatorResult,
    pub sin_rel: EstimatorResult,
    pub delta_cos_rel: EstimatorResult,
    pub delta_sin_rel: EstimatorResult,
    /// `⟨cos(φ_rel − φ)⟩`
    pub c_b: EstimatorResult,
}

fn spread(m: &Moments, mean: usize, sq: usize) -> f64 {
    (m.mean(sq) - m.mean(mean).powi(2)).max(0.0).sqrt()
}

/// Ensemble averages reported alongside the tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryAverages {
    pub m1z: EstimatorResult,
    pub m2z: EstimatorResult,
    pub m1_len: EstimatorResult,
    pub m1_len_sq: EstimatorResult,
    pub m2_len_sq: EstimatorResult,
    pub mxy: EstimatorResult,
    pub kinetic: EstimatorResult,
    pub qpot: EstimatorResult,
    pub m1_dot_m2: EstimatorResult,
    pub total_sq: EstimatorResult,
}

/// Tensor, angle statistics and averages from one pass over the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub state: PairStateParams,
    pub tensor: CorrelationTensor,
    pub angles: AngleStatistics,
    pub averages: SummaryAverages,
}

impl EnsembleSummary {
    pub fn compute(ens: &Ensemble, consts: &PhysicalConstants) -> Result<Self> {
        let inertia = consts.moment_of_inertia;
        let energy = consts.energy();
        let rep = ens.accumulate(
            || Moments::new(SLOTS),
            |m, p| {
                let w = p.weight;
                let (m1, m2) = (p.m1.to_array(), p.m2.to_array());
                let (l1, l2) = (p.m1.norm(), p.m2.norm());
                let inv = 1.0 / (l1 * l2);
                for i in 0..3 {
                    for j in 0..3 {
                        let x = m1[i] * m2[j];
                        m.push(RAW + 3 * i + j, x, w);
                        m.push(NORM + 3 * i + j, x * inv, w);
                    }
                }
                let (s1, s2) = (p.m1.norm_sqr(), p.m2.norm_sqr());
                let kinetic = (s1 + s2) / (2.0 * inertia);
                let dot = p.m1.dot(&p.m2);
                let cos_phi = (dot * inv).clamp(-1.0, 1.0);
                m.push(M1Z, p.m1.z, w);
                m.push(M2Z, p.m2.z, w);
                m.push(M1_SQ, s1, w);
                m.push(M2_SQ, s2, w);
                m.push(MXY, p.m1.norm_xy(), w);
                m.push(KINETIC, kinetic, w);
                m.push(QPOT, energy - kinetic, w);
                m.push(DOT, dot, w);
                m.push(TOTAL_SQ, s1 + s2 + 2.0 * dot, w);
                m.push(COS_PHI, cos_phi, w);
                m.push(COS_PHI_SQ, cos_phi * cos_phi, w);
                m.push(M1_LEN, l1, w);
                if let Some((c, s)) = relative_azimuth(&p.m1, &p.m2) {
                    m.push(COS_AZ, c, w);
                    m.push(COS_AZ_SQ, c * c, w);
                    m.push(SIN_AZ, s, w);
                    m.push(SIN_AZ_SQ, s * s, w);
                }
            },
        )?;
        let phi = ens.state.phi;
        let (sp, cp) = phi.sin_cos();
        let mean = |i: usize| rep.estimate(|m| m.mean(i));
        Ok(Self {
            state: ens.state,
            tensor: CorrelationTensor::from_moments(&rep, phi),
            angles: AngleStatistics {
                cos_big_phi: mean(COS_PHI),
                delta_cos_big_phi: rep.estimate(|m| spread(m, COS_PHI, COS_PHI_SQ)),
                cos_rel: mean(COS_AZ),
                sin_rel: mean(SIN_AZ),
                delta_cos_rel: rep.estimate(|m| spread(m, COS_AZ, COS_AZ_SQ)),
                delta_sin_rel: rep.estimate(|m| spread(m, SIN_AZ, SIN_AZ_SQ)),
                c_b: rep.estimate(|m| m.mean(COS_AZ) * cp + m.mean(SIN_AZ) * sp),
            },
            averages: SummaryAverages {
                m1z: mean(M1Z),
                m2z: mean(M2Z),
                m1_len: mean(M1_LEN),
                m1_len_sq: mean(M1_SQ),
                m2_len_sq: mean(M2_SQ),
                mxy: mean(MXY),
                kinetic: mean(KINETIC),
                qpot: mean(QPOT),
                m1_dot_m2: mean(DOT),
                total_sq: mean(TOTAL_SQ),
            },
        })
    }
}

/// Both correlation tensors of the ensemble (unit moment of inertia).
pub fn correlation_tensor(ens: &Ensemble) -> Result<CorrelationTensor> {
    Ok(EnsembleSummary::compute(ens, &PhysicalConstants::default())?.tensor)
}

/// Averages and spreads of `cos Φ`, `cos φ_rel`, `sin φ_rel` and `C_B`.
pub fn angle_statistics(ens: &Ensemble) -> Result<AngleStatistics> {
    Ok(EnsembleSummary::compute(ens, &PhysicalConstants::default())?.angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{GridSpec, Sampler};
    use std::f64::consts::PI;

    fn grid(theta: f64, phi: f64, n: usize) -> Ensemble {
        Ensemble::new(PairStateParams::new(theta, phi).unwrap(), Sampler::Grid(GridSpec::cube(n).unwrap()))
    }

    #[test]
    fn in_plane_amplitude_recovers_rotation() {
        for phi in [0.0, 0.4, PI / 2.0, 2.0, PI, 5.0] {
            let (s, c) = f64::sin_cos(phi);
            let a = 0.37;
            let t = [[a * c, -a * s, 0.0], [a * s, a * c, 0.0], [0.0, 0.0, -0.2]];
            assert!((in_plane_amplitude(&t, phi) - a).abs() < 1e-15);
        }
    }

    #[test]
    fn rescaling_weights_leaves_averages_unchanged() {
        let ens = grid(1.0, 0.3, 8);
        let plain = estimate_average(&ens, |p| Some(p.m1.z)).unwrap();
        let rep = ens.accumulate(|| Moments::new(1), |m, p| m.push(0, p.m1.z, 1e6 * p.weight)).unwrap();
        assert!((rep.estimate(|m| m.mean(0)).value - plain.value).abs() < 1e-13);
    }

    #[test]
    fn product_state_spin_average() {
        let ens = grid(0.0, 0.0, 16);
        let r = estimate_average(&ens, |p| Some(p.m1.z)).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contraction_matches_direct_average() {
        let ens = grid(PI / 2.0, PI, 12);
        let tensor = correlation_tensor(&ens).unwrap();
        let a = Vec3::new(0.3, -0.4, 0.866_025_403_784_438_6).normalized();
        let b = Vec3::new(-0.6, 0.0, 0.8);
        let direct =
            estimate_average(&ens, |p| Some(3.0 * p.m1.dot(&a) * p.m2.dot(&b) / (p.m1.norm() * p.m2.norm())))
                .unwrap();
        assert!((tensor.contract(&a, &b).value - direct.value).abs() < 1e-12);
    }
}
