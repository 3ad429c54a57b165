//! Configuration space of two spin-1/2 rigid rotors and the guiding wave.
//!
//! Each rotor is located by Euler angles `(α, β, γ)` with `α` the polar angle
//! of the rotor axis, `β` its azimuth and `γ` the rotation about the axis.
//! The one-rotor eigenfunctions are the Wigner matrices `D^{1/2}_{m,1/2}`
//! taken with argument order `(β, α, γ)`:
//!
//! ```text
//! u↑(λ) = (8π²)^{-1/2} e^{-iβ/2 - iγ/2} cos(α/2)
//! u↓(λ) = (8π²)^{-1/2} e^{+iβ/2 - iγ/2} sin(α/2)
//! ```
//!
//! With this convention the principal axis is
//! `e = (sin α sin β, sin α cos β, cos α)` and `e·M = 1/2` holds identically
//! (see [`crate::momenta::principal_axis`]). Units are ħ = 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};

/// Complex amplitude; `re`/`im` are always finite for finite inputs.
pub type ComplexValue = Complex64;

/// `(8π²)^{-1/2}`, normalization of a single-rotor spinor over `α, β, γ`.
pub fn spinor_norm() -> f64 {
    1.0 / (8.0 * PI * PI).sqrt()
}

/// Configurations with `R²` below this value are treated as nodes of ψ.
pub fn node_threshold() -> f64 {
    1e-28 / (64.0 * PI.powi(4))
}

/// Canonical range of the internal rotation angle (SU(2) double cover).
pub const GAMMA_PERIOD: f64 = 4.0 * PI;

/// Euler angles of one rotor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerTriple {
    /// Validates `α ∈ [0, π]` and wraps `β` into `[0, 2π)`, `γ` into `[0, 4π)`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(BohmError::InvalidInput(format!(
                "non-finite Euler angles ({alpha}, {beta}, {gamma})"
            )));
        }
        if !(0.0..=PI).contains(&alpha) {
            return Err(BohmError::Domain(format!("alpha = {alpha} outside [0, π]")));
        }
        Ok(Self { alpha, beta: wrap(beta, 2.0 * PI), gamma: wrap(gamma, GAMMA_PERIOD) })
    }

    /// Canonical copy of a triple produced by unwrapped time integration.
    pub fn canonical(&self) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma)
    }

    pub fn is_canonical(&self) -> bool {
        (0.0..=PI).contains(&self.alpha)
            && (0.0..2.0 * PI).contains(&self.beta)
            && (0.0..GAMMA_PERIOD).contains(&self.gamma)
    }
}

pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// A point `λ = {λ₁, λ₂}` of the six-dimensional hidden-variable space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConfiguration {
    pub rotor1: EulerTriple,
    pub rotor2: EulerTriple,
}

impl PairConfiguration {
    pub fn new(rotor1: EulerTriple, rotor2: EulerTriple) -> Self {
        Self { rotor1, rotor2 }
    }

    /// Builds a configuration from `[α₁, β₁, γ₁, α₂, β₂, γ₂]` without canonicalizing.
    pub fn from_array(x: [f64; 6]) -> Self {
        Self {
            rotor1: EulerTriple { alpha: x[0], beta: x[1], gamma: x[2] },
            rotor2: EulerTriple { alpha: x[3], beta: x[4], gamma: x[5] },
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.rotor1.alpha,
            self.rotor1.beta,
            self.rotor1.gamma,
            self.rotor2.alpha,
            self.rotor2.beta,
            self.rotor2.gamma,
        ]
    }

    pub fn canonical(&self) -> Result<Self> {
        Ok(Self { rotor1: self.rotor1.canonical()?, rotor2: self.rotor2.canonical()? })
    }
}

/// Parameters `(ϑ, φ)` of `cos(ϑ/2)|↑↓⟩ + e^{iφ} sin(ϑ/2)|↓↑⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStateParams {
    pub theta: f64,
    pub phi: f64,
}

impl PairStateParams {
    /// `theta` must lie in `[0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(BohmError::InvalidInput(format!("non-finite state parameters ({theta}, {phi})")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(BohmError::Domain(format!("theta = {theta} outside [0, π]")));
        }
        Ok(Self { theta, phi: wrap(phi, 2.0 * PI) })
    }

    pub fn singlet() -> Self {
        Self { theta: PI / 2.0, phi: PI }
    }

    pub fn triplet() -> Self {
        Self { theta: PI / 2.0, phi: 0.0 }
    }

    /// Probability of `S₁z = +1/2`, i.e. `cos²(ϑ/2)`.
    pub fn p_up(&self) -> f64 {
        0.5 * (1.0 + self.theta.cos())
    }

    pub(crate) fn coefficients(&self) -> StateCoefficients {
        let (s, c) = (0.5 * self.theta).sin_cos();
        StateCoefficients { up_down: c, down_up: Complex64::from_polar(s, self.phi) }
    }
}

/// Expansion coefficients of the pair state in the `|↑↓⟩, |↓↑⟩` basis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StateCoefficients {
    pub up_down: f64,
    pub down_up: Complex64,
}

/// Moment of inertia and the fixed quantum numbers of the model.
///
/// ħ = 1, `s = 1/2` and `n = 1/2` are fixed; only `I` is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub moment_of_inertia: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { moment_of_inertia: 1.0 }
    }
}

impl PhysicalConstants {
    pub const HBAR: f64 = 1.0;
    pub const SPIN: f64 = 0.5;
    pub const AXIS_PROJECTION: f64 = 0.5;

    pub fn new(moment_of_inertia: f64) -> Result<Self> {
        if !(moment_of_inertia.is_finite() && moment_of_inertia > 0.0) {
            return Err(BohmError::InvalidInput(format!(
                "moment of inertia must be positive, got {moment_of_inertia}"
            )));
        }
        Ok(Self { moment_of_inertia })
    }

    /// Total energy `E = s(s+1)/I` of the pair.
    pub fn energy(&self) -> f64 {
        Self::SPIN * (Self::SPIN + 1.0) / self.moment_of_inertia
    }
}

/// Partial derivatives of the phase `S` of ψ with respect to the six Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGradient {
    pub d_alpha1: f64,
    pub d_beta1: f64,
    pub d_gamma1: f64,
    pub d_alpha2: f64,
    pub d_beta2: f64,
    pub d_gamma2: f64,
}

impl PhaseGradient {
    /// `(∂S/∂α, ∂S/∂β, ∂S/∂γ)` of rotor 1 or 2.
    pub fn rotor(&self, index: usize) -> [f64; 3] {
        match index {
            1 => [self.d_alpha1, self.d_beta1, self.d_gamma1],
            2 => [self.d_alpha2, self.d_beta2, self.d_gamma2],
            _ => panic!("rotor index must be 1 or 2, got {index}"),
        }
    }
}

/// ∂S/∂γ for both rotors: each spinor carries `e^{-iγ/2}`.
pub const PHASE_GAMMA_PARTIAL: f64 = -0.5;

/// Trigonometric data of one rotor, enough to evaluate spinors and momenta.
#[derive(Debug, Clone, Copy)]
pub struct RotorTrig {
    pub cos_alpha: f64,
    pub sin_alpha: f64,
    pub cos_half_alpha: f64,
    pub sin_half_alpha: f64,
    pub cos_beta: f64,
    pub sin_beta: f64,
    pub cos_half_beta: f64,
    pub sin_half_beta: f64,
}

impl RotorTrig {
    pub fn from_euler(e: &EulerTriple) -> Self {
        let (sa, ca) = e.alpha.sin_cos();
        let (sha, cha) = (0.5 * e.alpha).sin_cos();
        Self::from_parts(ca, sa, cha, sha, e.beta)
    }

    /// From `cos α` (sampled uniformly) and `β`; the half angles follow from
    /// `cos²(α/2) = (1 + cos α)/2`.
    pub fn from_cos_alpha(cos_alpha: f64, beta: f64) -> Self {
        let sa = (1.0 - cos_alpha * cos_alpha).max(0.0).sqrt();
        let cha = (0.5 * (1.0 + cos_alpha)).max(0.0).sqrt();
        let sha = (0.5 * (1.0 - cos_alpha)).max(0.0).sqrt();
        Self::from_parts(cos_alpha, sa, cha, sha, beta)
    }

    pub(crate) fn from_parts(ca: f64, sa: f64, cha: f64, sha: f64, beta: f64) -> Self {
        let (shb, chb) = (0.5 * beta).sin_cos();
        let (sb, cb) = double_angle(shb, chb);
        Self::from_tables(ca, sa, cha, sha, cb, sb, chb, shb)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_tables(
        ca: f64,
        sa: f64,
        cha: f64,
        sha: f64,
        cb: f64,
        sb: f64,
        chb: f64,
        shb: f64,
    ) -> Self {
        Self {
            cos_alpha: ca,
            sin_alpha: sa,
            cos_half_alpha: cha,
            sin_half_alpha: sha,
            cos_beta: cb,
            sin_beta: sb,
            cos_half_beta: chb,
            sin_half_beta: shb,
        }
    }

    /// `e^{-iβ/2}`
    fn phase_up(&self) -> Complex64 {
        Complex64::new(self.cos_half_beta, -self.sin_half_beta)
    }

    /// `e^{+iβ/2}`
    fn phase_down(&self) -> Complex64 {
        Complex64::new(self.cos_half_beta, self.sin_half_beta)
    }
}

/// `(sin x, cos x)` from `(sin x/2, cos x/2)`.
#[inline]
pub(crate) fn double_angle(s: f64, c: f64) -> (f64, f64) {
    (2.0 * s * c, (c - s) * (c + s))
}

/// Unnormalized pieces of ψ with the common factor `e^{-i(γ₁+γ₂)/2}/(8π²)` removed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Amplitudes {
    /// `cos(ϑ/2) u↑(λ₁) u↓(λ₂)`
    pub t1: Complex64,
    /// `e^{iφ} sin(ϑ/2) u↓(λ₁) u↑(λ₂)`
    pub t2: Complex64,
    pub d_alpha1: Complex64,
    pub d_alpha2: Complex64,
}

impl Amplitudes {
    pub fn evaluate(coeffs: &StateCoefficients, r1: &RotorTrig, r2: &RotorTrig) -> Self {
        let up1 = r1.phase_up();
        let dn1 = r1.phase_down();
        let up2 = r2.phase_up();
        let dn2 = r2.phase_down();

        let a = coeffs.up_down * up1 * dn2;
        let b = coeffs.down_up * dn1 * up2;

        let t1 = a * (r1.cos_half_alpha * r2.sin_half_alpha);
        let t2 = b * (r1.sin_half_alpha * r2.cos_half_alpha);
        let d_alpha1 = a * (-0.5 * r1.sin_half_alpha * r2.sin_half_alpha)
            + b * (0.5 * r1.cos_half_alpha * r2.cos_half_alpha);
        let d_alpha2 = a * (0.5 * r1.cos_half_alpha * r2.cos_half_alpha)
            + b * (-0.5 * r1.sin_half_alpha * r2.sin_half_alpha);
        Self { t1, t2, d_alpha1, d_alpha2 }
    }

    pub fn psi(&self) -> Complex64 {
        self.t1 + self.t2
    }

    /// `R² = |ψ|²` including the `(8π²)^{-2}` normalization.
    pub fn density(&self) -> f64 {
        self.psi().norm_sqr() * density_scale()
    }

    /// Phase partials `Im(∂ψ/∂x · ψ*)/|ψ|²`; the caller checks for nodes.
    pub fn phase_gradient(&self) -> PhaseGradient {
        let psi = self.psi();
        let norm = psi.norm_sqr();
        let im_ratio = |d: Complex64| (d * psi.conj()).im / norm;
        let half_i = Complex64::new(0.0, 0.5);
        let d_beta1 = -half_i * self.t1 + half_i * self.t2;
        let d_beta2 = half_i * self.t1 - half_i * self.t2;
        PhaseGradient {
            d_alpha1: im_ratio(self.d_alpha1),
            d_beta1: im_ratio(d_beta1),
            d_gamma1: PHASE_GAMMA_PARTIAL,
            d_alpha2: im_ratio(self.d_alpha2),
            d_beta2: im_ratio(d_beta2),
            d_gamma2: PHASE_GAMMA_PARTIAL,
        }
    }
}

/// `(8π²)^{-2}`: converts `|t₁ + t₂|²` into `R²`.
pub(crate) fn density_scale() -> f64 {
    1.0 / (64.0 * PI.powi(4))
}

/// `u↑(λ) = (8π²)^{-1/2} e^{-iβ/2 - iγ/2} cos(α/2)`
pub fn spinor_up(lambda: &EulerTriple) -> ComplexValue {
    Complex64::from_polar(spinor_norm() * (0.5 * lambda.alpha).cos(), -0.5 * lambda.beta - 0.5 * lambda.gamma)
}

/// `u↓(λ) = (8π²)^{-1/2} e^{+iβ/2 - iγ/2} sin(α/2)`
pub fn spinor_down(lambda: &EulerTriple) -> ComplexValue {
    Complex64::from_polar(spinor_norm() * (0.5 * lambda.alpha).sin(), 0.5 * lambda.beta - 0.5 * lambda.gamma)
}

/// Guiding wave `ψ(λ) = cos(ϑ/2) u↑(λ₁)u↓(λ₂) + e^{iφ} sin(ϑ/2) u↓(λ₁)u↑(λ₂)`.
pub fn guiding_wave(state: &PairStateParams, cfg: &PairConfiguration) -> ComplexValue {
    let c = state.coefficients();
    c.up_down * spinor_up(&cfg.rotor1) * spinor_down(&cfg.rotor2)
        + c.down_up * spinor_down(&cfg.rotor1) * spinor_up(&cfg.rotor2)
}

/// Quantum-equilibrium density `R²(λ) = |ψ(λ)|²`.
pub fn density(state: &PairStateParams, cfg: &PairConfiguration) -> f64 {
    pair_amplitudes(state, cfg).density()
}

pub(crate) fn pair_amplitudes(state: &PairStateParams, cfg: &PairConfiguration) -> Amplitudes {
    Amplitudes::evaluate(
        &state.coefficients(),
        &RotorTrig::from_euler(&cfg.rotor1),
        &RotorTrig::from_euler(&cfg.rotor2),
    )
}

/// Gradient of the phase `S` from analytic partials of ψ.
///
/// Fails with [`BohmError::Node`] where `R²` is below [`node_threshold`].
pub fn phase_gradient(state: &PairStateParams, cfg: &PairConfiguration) -> Result<PhaseGradient> {
    let amp = pair_amplitudes(state, cfg);
    let density = amp.density();
    if density <= node_threshold() {
        return Err(BohmError::Node { density });
    }
    Ok(amp.phase_gradient())
}
