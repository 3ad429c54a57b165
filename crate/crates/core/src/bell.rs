//! Polarization correlators and the CHSH functional.
//!
//! The quantum correlator is `C(a,b) = 4⟨(a·S₁)(b·S₂)⟩`. Its Bohmian analogue
//! `B(a,b) = 3⟨(a·M₁)(b·M₂)/(|M₁||M₂|)⟩` is a correlation of the ensemble
//! *before* any measurement; it is not a prediction of measured coincidence
//! rates.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{estimate_average, CorrelationTensor, Ensemble, EstimatorResult, Matrix3};
use crate::error::{BohmError, Result};
use crate::momenta::Vec3;
use crate::rotor::PairStateParams;

/// Four analyzer directions `a, a′` (particle 1) and `b, b′` (particle 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizerSetup {
    pub a: Vec3,
    pub b: Vec3,
    pub a_prime: Vec3,
    pub b_prime: Vec3,
}

impl PolarizerSetup {
    pub fn new(a: Vec3, b: Vec3, a_prime: Vec3, b_prime: Vec3) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("a′", a_prime), ("b′", b_prime)] {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(BohmError::InvalidInput(format!("{name} = {v:?} is not a unit vector")));
            }
        }
        Ok(Self { a, b, a_prime, b_prime })
    }

    /// Directions `(sin θ, 0, cos θ)` in the x–z plane; angles in radians.
    pub fn in_xz_plane(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        let v = |t: f64| Vec3::new(t.sin(), 0.0, t.cos());
        Self { a: v(a), a_prime: v(a_prime), b: v(b), b_prime: v(b_prime) }
    }

    /// `a = 0°, a′ = 90°, b = 45°, b′ = 315°`, which saturates `2√2` for the singlet.
    pub fn optimal_singlet() -> Self {
        Self::in_xz_plane(0.0, 0.5 * PI, 0.25 * PI, 1.75 * PI)
    }

    /// Four directions drawn uniformly from the sphere.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut v = || {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let az: f64 = rng.gen_range(0.0..2.0 * PI);
            let r = (1.0 - z * z).max(0.0).sqrt();
            Vec3::new(r * az.cos(), r * az.sin(), z)
        };
        Self { a: v(), b: v(), a_prime: v(), b_prime: v() }
    }
}

/// `C(a,b) = (aₓbₓ + a_yb_y) sin ϑ cos φ + (a_yb_x − a_xb_y) sin ϑ sin φ − a_zb_z`.
pub fn qm_correlator(state: &PairStateParams, a: &Vec3, b: &Vec3) -> f64 {
    let st = state.theta.sin();
    let (sp, cp) = state.phi.sin_cos();
    (a.x * b.x + a.y * b.y) * st * cp + (a.y * b.x - a.x * b.y) * st * sp - a.z * b.z
}

/// `B(a,b)` by direct averaging over the ensemble.
pub fn bohm_correlator(ens: &Ensemble, a: &Vec3, b: &Vec3) -> Result<EstimatorResult> {
    estimate_average(ens, |p| Some(3.0 * p.m1.dot(a) * p.m2.dot(b) / (p.m1.norm() * p.m2.norm())))
}

/// `B(a,b)` contracted from the normalized correlation tensor.
pub fn bohm_correlator_from_tensor(tensor: &CorrelationTensor, a: &Vec3, b: &Vec3) -> EstimatorResult {
    tensor.contract(a, b)
}

/// `|P(a,b) + P(a,b′) + P(a′,b) − P(a′,b′)|`
pub fn chsh_value(setup: &PolarizerSetup, correlator: impl Fn(&Vec3, &Vec3) -> f64) -> f64 {
    let s = &setup;
    (correlator(&s.a, &s.b) + correlator(&s.a, &s.b_prime) + correlator(&s.a_prime, &s.b)
        - correlator(&s.a_prime, &s.b_prime))
    .abs()
}

/// CHSH value of the Bohmian correlator with an error bar from the tensor replicas.
pub fn bohm_chsh(tensor: &CorrelationTensor, setup: &PolarizerSetup) -> EstimatorResult {
    tensor.normalized_samples.estimate(|t| chsh_value(setup, |a, b| 3.0 * crate::ensemble::bilinear(t, a, b)))
}

/// Correlator values for both theories at one setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellComparison {
    pub setup: PolarizerSetup,
    pub qm: [f64; 4],
    pub bohm: [EstimatorResult; 4],
    pub chsh_qm: f64,
    pub chsh_bohm: EstimatorResult,
}

impl BellComparison {
    pub fn evaluate(state: &PairStateParams, tensor: &CorrelationTensor, setup: PolarizerSetup) -> Self {
        let pairs = [
            (setup.a, setup.b),
            (setup.a, setup.b_prime),
            (setup.a_prime, setup.b),
            (setup.a_prime, setup.b_prime),
        ];
        Self {
            setup,
            qm: pairs.map(|(a, b)| qm_correlator(state, &a, &b)),
            bohm: pairs.map(|(a, b)| tensor.contract(&a, &b)),
            chsh_qm: chsh_value(&setup, |a, b| qm_correlator(state, a, b)),
            chsh_bohm: bohm_chsh(tensor, &setup),
        }
    }
}

/// `4 aᵀ T b` for a spin tensor; used to cross-check [`qm_correlator`].
pub fn correlator_from_spin_tensor(t: &Matrix3, a: &Vec3, b: &Vec3) -> f64 {
    4.0 * crate::ensemble::bilinear(t, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::qm_reference;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singlet_is_minus_dot_product() {
        let s = PairStateParams::singlet();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = PolarizerSetup::random(&mut rng);
            assert!((qm_correlator(&s, &p.a, &p.b) + p.a.dot(&p.b)).abs() < 1e-15);
        }
    }

    #[test]
    fn correlator_examples() {
        for (t, f) in [(0.3, 1.0), (1.2, 4.0), (PI / 2.0, 0.0)] {
            let s = PairStateParams::new(t, f).unwrap();
            assert_eq!(qm_correlator(&s, &Vec3::Z, &Vec3::Z), -1.0);
        }
        let triplet = PairStateParams::triplet();
        assert!(qm_correlator(&triplet, &Vec3::X, &Vec3::Y).abs() < 1e-16);
    }

    #[test]
    fn formula_agrees_with_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = PairStateParams::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
            let p = PolarizerSetup::random(&mut rng);
            let t = qm_reference(&s).spin_tensor;
            let d = qm_correlator(&s, &p.a, &p.b) - correlator_from_spin_tensor(&t, &p.a, &p.b);
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_setup_saturates_tsirelson() {
        let s = PairStateParams::singlet();
        let v = chsh_value(&PolarizerSetup::optimal_singlet(), |a, b| qm_correlator(&s, a, b));
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_setups_respect_tsirelson() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let s = PairStateParams::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
            let p = PolarizerSetup::random(&mut rng);
            assert!(chsh_value(&p, |a, b| qm_correlator(&s, a, b)) <= 2.0 * 2f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn equal_vectors_are_trivial() {
        let s = PairStateParams::new(1.0, 0.5).unwrap();
        let p = PolarizerSetup::new(Vec3::Z, Vec3::Z, Vec3::Z, Vec3::Z).unwrap();
        let v = chsh_value(&p, |a, b| qm_correlator(&s, a, b));
        assert!(v <= 2.0);
        assert!(PolarizerSetup::new(Vec3::new(1.0, 1.0, 0.0), Vec3::Z, Vec3::Z, Vec3::Z).is_err());
    }
}
