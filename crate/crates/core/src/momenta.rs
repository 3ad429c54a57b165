//! Bohmian angular momenta `M₁(λ)`, `M₂(λ)` and the per-configuration
//! scalars derived from them.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::rotor::{
    node_threshold, pair_amplitudes, Amplitudes, EulerTriple, PairConfiguration, PairStateParams,
    PhaseGradient, PhysicalConstants, RotorTrig,
};

/// Configurations with `|sin α|` below this are rejected by [`momentum_from_gradient`].
pub const POLE_THRESHOLD: f64 = 1e-8;

/// Real 3-vector; used for angular momenta (units of ħ) and unit axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type AngularMomentumVector = Vec3;

impl Vec3 {
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Length of the projection onto the xy-plane.
    pub fn norm_xy(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(&self) -> Vec3 {
        let n = self.norm();
        Vec3::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn component(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {i} out of range"),
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Momenta of both rotors at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumPair {
    pub m1: Vec3,
    pub m2: Vec3,
}

/// `M = iM̂S` for one rotor from its phase partials `(Sα, Sβ, Sγ)`.
pub fn momentum_from_gradient(lambda: &EulerTriple, grad: [f64; 3]) -> Result<Vec3> {
    momentum_from_trig(&RotorTrig::from_euler(lambda), grad)
}

pub(crate) fn momentum_from_trig(t: &RotorTrig, grad: [f64; 3]) -> Result<Vec3> {
    if t.sin_alpha.abs() < POLE_THRESHOLD {
        return Err(BohmError::Pole { sin_alpha: t.sin_alpha });
    }
    Ok(momentum_unchecked(t, grad))
}

#[inline]
pub(crate) fn momentum_unchecked(t: &RotorTrig, [sa, sb, sg]: [f64; 3]) -> Vec3 {
    let inv_sin = 1.0 / t.sin_alpha;
    let cot = t.cos_alpha * inv_sin;
    Vec3 {
        x: -t.cos_beta * sa + t.sin_beta * cot * sb - t.sin_beta * inv_sin * sg,
        y: t.sin_beta * sa + t.cos_beta * cot * sb - t.cos_beta * inv_sin * sg,
        z: -sb,
    }
}

/// Momenta of both rotors from the six-dimensional phase gradient.
pub fn momentum_pair(state: &PairStateParams, cfg: &PairConfiguration) -> Result<MomentumPair> {
    let (pair, _) = momenta_with_gradient(state, cfg)?;
    Ok(pair)
}

pub(crate) fn momenta_with_gradient(
    state: &PairStateParams,
    cfg: &PairConfiguration,
) -> Result<(MomentumPair, PhaseGradient)> {
    let r1 = RotorTrig::from_euler(&cfg.rotor1);
    let r2 = RotorTrig::from_euler(&cfg.rotor2);
    let amp = Amplitudes::evaluate(&state.coefficients(), &r1, &r2);
    let density = amp.density();
    if density <= node_threshold() {
        return Err(BohmError::Node { density });
    }
    let grad = amp.phase_gradient();
    let m1 = momentum_from_trig(&r1, grad.rotor(1))?;
    let m2 = momentum_from_trig(&r2, grad.rotor(2))?;
    Ok((MomentumPair { m1, m2 }, grad))
}

/// Rotor axis `e = (sin α sin β, sin α cos β, cos α)`.
pub fn principal_axis(lambda: &EulerTriple) -> Vec3 {
    let (sa, ca) = lambda.alpha.sin_cos();
    let (sb, cb) = lambda.beta.sin_cos();
    Vec3::new(sa * sb, sa * cb, ca)
}

/// `(|M₁|² + |M₂|²)/(2I)`
pub fn kinetic_energy(pair: &MomentumPair, consts: &PhysicalConstants) -> f64 {
    (pair.m1.norm_sqr() + pair.m2.norm_sqr()) / (2.0 * consts.moment_of_inertia)
}

/// Quantum potential from energy conservation, `Q = E - (|M₁|² + |M₂|²)/(2I)`.
pub fn quantum_potential(
    state: &PairStateParams,
    cfg: &PairConfiguration,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let pair = momentum_pair(state, cfg)?;
    Ok(consts.energy() - kinetic_energy(&pair, consts))
}

/// Quantum potential `(M̂₁² + M̂₂²)R / (2IR)` by central finite differences.
///
/// On each rotor `M̂² = -[∂²_α + cot α ∂_α + (∂²_β - 2 cos α ∂_β∂_γ + ∂²_γ)/sin²α]`.
/// Independent of [`quantum_potential`]; truncation error is `O(step²)`.
pub fn quantum_potential_direct(
    state: &PairStateParams,
    cfg: &PairConfiguration,
    consts: &PhysicalConstants,
    step: f64,
) -> Result<f64> {
    if !(step.is_finite() && step > 0.0) {
        return Err(BohmError::InvalidInput(format!("step must be positive, got {step}")));
    }
    let base = cfg.to_array();
    let r_at = |x: &[f64; 6]| -> Result<f64> {
        let c = PairConfiguration::from_array(*x);
        let d = pair_amplitudes(state, &c).density();
        if d <= node_threshold() {
            return Err(BohmError::Stencil(format!("node at {x:?}")));
        }
        for a in [x[0], x[3]] {
            if a.sin().abs() < POLE_THRESHOLD {
                return Err(BohmError::Stencil(format!("pole at {x:?}")));
            }
        }
        Ok(d.sqrt())
    };
    let r0 = {
        let d = pair_amplitudes(state, cfg).density();
        if d <= node_threshold() {
            return Err(BohmError::Node { density: d });
        }
        d.sqrt()
    };
    let shifted = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut x = base;
        for &(i, dx) in moves {
            x[i] += dx;
        }
        r_at(&x)
    };
    let h = step;
    let mut laplacian = 0.0;
    for off in [0usize, 3] {
        let (ia, ib, ig) = (off, off + 1, off + 2);
        let alpha = base[ia];
        let second = |i: usize| -> Result<f64> {
            Ok((shifted(&[(i, h)])? - 2.0 * r0 + shifted(&[(i, -h)])?) / (h * h))
        };
        let d_a = (shifted(&[(ia, h)])? - shifted(&[(ia, -h)])?) / (2.0 * h);
        let d_aa = second(ia)?;
        let d_bb = second(ib)?;
        let d_gg = second(ig)?;
        let d_bg =
            (shifted(&[(ib, h), (ig, h)])? - shifted(&[(ib, h), (ig, -h)])? - shifted(&[(ib, -h), (ig, h)])?
                + shifted(&[(ib, -h), (ig, -h)])?)
                / (4.0 * h * h);
        let (sa, ca) = alpha.sin_cos();
        laplacian += d_aa + ca / sa * d_a + (d_bb - 2.0 * ca * d_bg + d_gg) / (sa * sa);
    }
    Ok(-laplacian / (2.0 * consts.moment_of_inertia * r0))
}

/// Angle `Φ` between the momenta and the relative azimuth `φ_rel = φ₂ - φ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeAngles {
    pub cos_big_phi: f64,
    pub cos_az: f64,
    pub sin_az: f64,
}

/// `cos Φ`, `cos φ_rel`, `sin φ_rel` with azimuths measured in the
/// `(sin θ sin φ, sin θ cos φ, cos θ)` parameterization.
pub fn relative_angles(pair: &MomentumPair) -> Result<RelativeAngles> {
    let (l1, l2) = (pair.m1.norm(), pair.m2.norm());
    if l1 == 0.0 || l2 == 0.0 {
        return Err(BohmError::DegenerateProjection);
    }
    let cos_big_phi = (pair.m1.dot(&pair.m2) / (l1 * l2)).clamp(-1.0, 1.0);
    let (cos_az, sin_az) = relative_azimuth(&pair.m1, &pair.m2).ok_or(BohmError::DegenerateProjection)?;
    Ok(RelativeAngles { cos_big_phi, cos_az, sin_az })
}

/// `(cos, sin)` of `φ₂ - φ₁` where `tan φ = Mx/My`.
#[inline]
pub(crate) fn relative_azimuth(m1: &Vec3, m2: &Vec3) -> Option<(f64, f64)> {
    let p = m1.norm_xy() * m2.norm_xy();
    if p == 0.0 || !p.is_finite() {
        return None;
    }
    let cos = (m1.x * m2.x + m1.y * m2.y) / p;
    // sin φ = Mx/Mxy, cos φ = My/Mxy
    let sin = (m2.x * m1.y - m2.y * m1.x) / p;
    Some((cos, sin))
}

/// Per-configuration report: momenta, lengths, angles and energy split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationReport {
    pub momenta: MomentumPair,
    pub len1: f64,
    pub len2: f64,
    pub mxy1: f64,
    pub mxy2: f64,
    pub cos_big_phi: f64,
    /// `None` when an xy-projection vanishes.
    pub cos_az: Option<f64>,
    pub sin_az: Option<f64>,
    pub kinetic: f64,
    pub qpot: f64,
}

impl ConfigurationReport {
    pub fn evaluate(
        state: &PairStateParams,
        cfg: &PairConfiguration,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let momenta = momentum_pair(state, cfg)?;
        Ok(Self::from_momenta(momenta, consts))
    }

    pub fn from_momenta(momenta: MomentumPair, consts: &PhysicalConstants) -> Self {
        let (m1, m2) = (momenta.m1, momenta.m2);
        let (len1, len2) = (m1.norm(), m2.norm());
        let kinetic = kinetic_energy(&momenta, consts);
        let az = relative_azimuth(&m1, &m2);
        Self {
            momenta,
            len1,
            len2,
            mxy1: m1.norm_xy(),
            mxy2: m2.norm_xy(),
            cos_big_phi: (m1.dot(&m2) / (len1 * len2)).clamp(-1.0, 1.0),
            cos_az: az.map(|a| a.0),
            sin_az: az.map(|a| a.1),
            kinetic,
            qpot: consts.energy() - kinetic,
        }
    }
}
