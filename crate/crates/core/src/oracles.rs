//! Closed-form reference results: analytic Bohmian distributions and the
//! standard quantum-mechanical spin correlators.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ensemble::Matrix3;
use crate::entropy::binary_entropy;
use crate::error::{BohmError, Result};
use crate::momenta::Vec3;
use crate::rotor::PairStateParams;

/// Tolerance of the construction-time normalization check.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// The closed-form densities `dP/dμ` known for the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// `|M₁|`, any ϑ (exact at ϑ = 0)
    MomentumLength,
    /// `|M₁|²`, any ϑ
    MomentumLengthSq,
    /// `M₁x` at ϑ = 0
    M1xProductState,
    /// `M_xy` at ϑ = 0
    MxyProductState,
    /// `cos θ₁ = M₁z/|M₁|` at ϑ = π/2
    CosPolarMaxent,
    /// `M₁z` at ϑ = π/2
    M1zMaxent,
    /// `M₁z²` at ϑ = π/2
    M1zSqMaxent,
    /// `M_xy` at ϑ = π/2
    MxyMaxent,
    /// `M₁ᵢM₂ᵢ` at ϑ = π/2, sign η
    ProductZMaxent,
    /// `M₁ᵢM₂ᵢ/(|M₁||M₂|)` at ϑ = π/2, sign η
    NormalizedProductMaxent,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 10] = [
        Self::MomentumLength,
        Self::MomentumLengthSq,
        Self::M1xProductState,
        Self::MxyProductState,
        Self::CosPolarMaxent,
        Self::M1zMaxent,
        Self::M1zSqMaxent,
        Self::MxyMaxent,
        Self::ProductZMaxent,
        Self::NormalizedProductMaxent,
    ];

    pub fn has_eta(&self) -> bool {
        matches!(self, Self::ProductZMaxent | Self::NormalizedProductMaxent)
    }

    /// Entanglement angle at which the form is exact, `None` if valid for all ϑ.
    pub fn valid_theta(&self) -> Option<f64> {
        match self {
            Self::MomentumLength | Self::MomentumLengthSq => None,
            Self::M1xProductState | Self::MxyProductState => Some(0.0),
            _ => Some(FRAC_PI_2),
        }
    }
}

/// An analytic density, checked to integrate to one when first built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDistribution {
    pub kind: DistributionKind,
    /// `-1` or `+1`; always `+1` for forms without a sign parameter.
    pub eta: f64,
}

impl AnalyticDistribution {
    pub fn new(kind: DistributionKind) -> Result<Self> {
        if kind.has_eta() {
            return Err(BohmError::InvalidInput(format!("{kind:?} needs a sign η; use with_eta")));
        }
        Self::checked(Self { kind, eta: 1.0 })
    }

    pub fn with_eta(kind: DistributionKind, eta: f64) -> Result<Self> {
        if eta != 1.0 && eta != -1.0 {
            return Err(BohmError::InvalidInput(format!("η must be ±1, got {eta}")));
        }
        if !kind.has_eta() && eta != 1.0 {
            return Err(BohmError::InvalidInput(format!("{kind:?} has no sign parameter")));
        }
        Self::checked(Self { kind, eta })
    }

    fn checked(d: Self) -> Result<Self> {
        static NORMS: OnceLock<Vec<(DistributionKind, f64, f64)>> = OnceLock::new();
        let norms = NORMS.get_or_init(|| {
            let mut out = Vec::new();
            for kind in DistributionKind::ALL {
                let etas: &[f64] = if kind.has_eta() { &[-1.0, 1.0] } else { &[1.0] };
                for &eta in etas {
                    out.push((kind, eta, Self { kind, eta }.moment(0)));
                }
            }
            out
        });
        let norm =
            norms.iter().find(|(k, e, _)| *k == d.kind && *e == d.eta).map(|t| t.2).unwrap_or(f64::NAN);
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(BohmError::InvalidInput(format!("{:?} integrates to {norm}, not 1", d.kind)));
        }
        Ok(d)
    }

    /// Closed interval carrying all the probability.
    pub fn support(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        let s = match self.kind {
            DistributionKind::MomentumLength => (0.5, inf),
            DistributionKind::MomentumLengthSq => (0.25, inf),
            DistributionKind::M1xProductState | DistributionKind::M1zMaxent => (-inf, inf),
            DistributionKind::MxyProductState | DistributionKind::MxyMaxent => (0.0, inf),
            DistributionKind::M1zSqMaxent => (0.0, inf),
            DistributionKind::CosPolarMaxent => (-1.0, 1.0),
            DistributionKind::ProductZMaxent => (0.0, inf),
            DistributionKind::NormalizedProductMaxent => (0.0, 1.0),
        };
        if self.eta < 0.0 {
            (-s.1, -s.0)
        } else {
            s
        }
    }

    /// Points where the density or its derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self.kind {
            DistributionKind::MomentumLength => vec![0.5],
            DistributionKind::MomentumLengthSq => vec![0.25],
            DistributionKind::M1xProductState | DistributionKind::MxyProductState => vec![],
            DistributionKind::CosPolarMaxent => vec![-1.0, 1.0],
            DistributionKind::M1zMaxent => vec![-0.5, 0.5],
            DistributionKind::M1zSqMaxent => vec![0.25],
            DistributionKind::MxyMaxent => vec![0.5],
            DistributionKind::ProductZMaxent => vec![0.25 * self.eta],
            DistributionKind::NormalizedProductMaxent => vec![self.eta],
        }
    }

    /// `dP/dμ`. Fails for `μ` outside the domain of the variable
    /// (for example a negative length) and at integrable singularities.
    pub fn density(&self, mu: f64) -> Result<f64> {
        if !mu.is_finite() {
            return Err(BohmError::Domain(format!("μ = {mu}")));
        }
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(BohmError::Domain(format!("μ = {mu} outside the range of {:?}", self.kind)))
            }
        };
        Ok(match self.kind {
            DistributionKind::MomentumLength => {
                domain(mu >= 0.0)?;
                if mu < 0.5 {
                    0.0
                } else {
                    0.25 / mu.powi(5)
                }
            }
            DistributionKind::MomentumLengthSq => {
                domain(mu >= 0.0)?;
                if mu < 0.25 {
                    0.0
                } else {
                    (2.0 * mu).powi(-3)
                }
            }
            DistributionKind::M1xProductState => 1.5 * (1.0 + 4.0 * mu * mu).powf(-2.5),
            DistributionKind::MxyProductState => {
                domain(mu >= 0.0)?;
                16.0 * mu * (1.0 + 4.0 * mu * mu).powi(-3)
            }
            DistributionKind::CosPolarMaxent => {
                domain((-1.0..=1.0).contains(&mu))?;
                0.5
            }
            DistributionKind::M1zMaxent => 0.8 * (2.0 * mu.abs()).powi(-5).min(1.0),
            DistributionKind::M1zSqMaxent => {
                domain(mu > 0.0)?;
                square_law(mu)
            }
            DistributionKind::MxyMaxent => {
                domain(mu >= 0.0)?;
                mxy_maxent(mu)
            }
            DistributionKind::ProductZMaxent => {
                let v = self.eta * mu;
                if v < 0.0 {
                    0.0
                } else {
                    domain(v > 0.0)?;
                    square_law(v)
                }
            }
            DistributionKind::NormalizedProductMaxent => {
                let v = self.eta * mu;
                if v < 0.0 || v > 1.0 {
                    0.0
                } else {
                    domain(v > 0.0)?;
                    (4.0 * v).powf(-0.5)
                }
            }
        })
    }

    /// Density with points outside the domain mapped to zero.
    fn density_or_zero(&self, mu: f64) -> f64 {
        self.density(mu).unwrap_or(0.0)
    }

    /// `P(μ' ≤ μ)`.
    pub fn cdf(&self, mu: f64) -> f64 {
        if self.eta < 0.0 {
            let mirrored = Self { kind: self.kind, eta: 1.0 };
            return 1.0 - mirrored.cdf(-mu);
        }
        let (lo, hi) = self.support();
        if mu <= lo {
            return 0.0;
        }
        if mu >= hi {
            return 1.0;
        }
        match self.kind {
            DistributionKind::MomentumLength => 1.0 - 1.0 / (16.0 * mu.powi(4)),
            DistributionKind::MomentumLengthSq => 1.0 - 1.0 / (16.0 * mu * mu),
            DistributionKind::M1xProductState => {
                let u = 2.0 * mu;
                0.5 + 0.25 * u * (2.0 * u * u + 3.0) / (1.0 + u * u).powf(1.5)
            }
            DistributionKind::MxyProductState => 1.0 - (1.0 + 4.0 * mu * mu).powi(-2),
            DistributionKind::CosPolarMaxent => 0.5 * (mu + 1.0),
            DistributionKind::M1zMaxent => {
                let a = mu.abs();
                let half = if a <= 0.5 { 0.8 * a } else { 0.5 - 1.0 / (160.0 * a.powi(4)) };
                0.5 + half.copysign(mu)
            }
            DistributionKind::M1zSqMaxent | DistributionKind::ProductZMaxent => square_law_cdf(mu),
            DistributionKind::NormalizedProductMaxent => mu.sqrt(),
            DistributionKind::MxyMaxent if mu >= 0.5 => 1.0 - 1.0 / (30.0 * mu.powi(4)),
            DistributionKind::MxyMaxent => integrate(&mxy_maxent, 0.0, mu),
        }
    }

    /// Mean density over `[a, b]`, the exact expectation of a histogram bin.
    pub fn bin_average(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)) / (b - a)
    }

    /// `∫ μᵏ dP` by adaptive quadrature split at the kinks.
    pub fn moment(&self, k: i32) -> f64 {
        let (lo, hi) = self.support();
        self.integrate_density(&|x: f64| x.powi(k), lo, hi)
    }

    /// `∫ₐᵇ g(μ) p(μ) dμ`, split at kinks and at the integrable singularity at zero.
    fn integrate_density(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let singular_at_zero = matches!(
            self.kind,
            DistributionKind::M1zSqMaxent
                | DistributionKind::ProductZMaxent
                | DistributionKind::NormalizedProductMaxent
        );
        let mut points = vec![a];
        let mut cuts = self.kinks();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        points.extend(cuts.into_iter().filter(|c| *c > a && *c < b));
        points.push(b);
        points.dedup();
        let f = |x: f64| g(x) * self.density_or_zero(x);
        points
            .windows(2)
            .map(|w| {
                let (p, q) = (w[0], w[1]);
                if singular_at_zero && p == 0.0 {
                    // x = t², removing the x^{-1/2} endpoint singularity
                    integrate(&|t: f64| 2.0 * t * f(t * t), 0.0, q.sqrt())
                } else if singular_at_zero && q == 0.0 {
                    integrate(&|t: f64| 2.0 * t * f(-t * t), 0.0, (-p).sqrt())
                } else {
                    integrate(&f, p, q)
                }
            })
            .sum()
    }
}

/// `(8/5) min[(4μ)^{-1/2}, (4μ)^{-3}]`
fn square_law(v: f64) -> f64 {
    let x = 4.0 * v;
    1.6 * x.powf(-0.5).min(x.powi(-3))
}

fn square_law_cdf(v: f64) -> f64 {
    if v <= 0.25 {
        1.6 * v.sqrt()
    } else {
        1.0 - 0.0125 / (v * v)
    }
}

/// `(2/(15μ⁵))[1 − Θ(½−μ)(1+2μ²+6μ⁴)√(1−4μ²)]`, by its Taylor series near zero
/// where the bracket cancels to `O(μ⁶)`.
fn mxy_maxent(mu: f64) -> f64 {
    if mu < 0.1 {
        // (2/15)(20μ + 30μ³ + 72μ⁵ + 200μ⁷ + 600μ⁹ + 1890μ¹¹ + 6160μ¹³ + 20592μ¹⁵)
        const C: [f64; 8] = [20.0, 30.0, 72.0, 200.0, 600.0, 1890.0, 6160.0, 20592.0];
        let x = mu * mu;
        let poly = C.iter().rev().fold(0.0, |acc, c| acc * x + c);
        return 2.0 / 15.0 * mu * poly;
    }
    let bracket = if mu < 0.5 {
        let x = mu * mu;
        1.0 - (1.0 + 2.0 * x + 6.0 * x * x) * (1.0 - 4.0 * x).sqrt()
    } else {
        1.0
    };
    2.0 / (15.0 * mu.powi(5)) * bracket
}

/// Tanh-sinh quadrature on a finite interval or a half-line.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const TOL: f64 = 1e-13;
    match (a.is_finite(), b.is_finite()) {
        (true, true) => quadrature::integrate(f, a, b, TOL).integral,
        (true, false) => {
            // x = a + s/(1−s)
            quadrature::integrate(|s| f(a + s / (1.0 - s)) / (1.0 - s).powi(2), 0.0, 1.0, TOL).integral
        }
        (false, true) => {
            quadrature::integrate(|s| f(b - s / (1.0 - s)) / (1.0 - s).powi(2), 0.0, 1.0, TOL).integral
        }
        (false, false) => integrate(f, a, 0.0) + integrate(f, 0.0, b),
    }
}

/// Spin expectation values of the pair state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmCorrelators {
    pub spin_expectation: Vec3,
    /// `⟨S₁ᵢS₂ⱼ⟩`
    pub spin_tensor: Matrix3,
    pub s1_dot_s2: f64,
    /// Entanglement of formation in bits.
    pub eof: f64,
}

/// Standard quantum-mechanical references for `state`.
pub fn qm_reference(state: &PairStateParams) -> QmCorrelators {
    let st = state.theta.sin();
    let (sp, cp) = state.phi.sin_cos();
    let q = 0.25;
    QmCorrelators {
        spin_expectation: Vec3::new(0.0, 0.0, 0.5 * state.theta.cos()),
        spin_tensor: [[q * st * cp, -q * st * sp, 0.0], [q * st * sp, q * st * cp, 0.0], [0.0, 0.0, -q]],
        s1_dot_s2: 0.25 * (2.0 * st * cp - 1.0),
        eof: binary_entropy(state.p_up()).unwrap_or(0.0),
    }
}

/// Bohmian ensemble values predicted at maximal entanglement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BohmianReference {
    /// `(2/3) ⟨S₁ᵢS₂ⱼ⟩`
    pub tensor: Matrix3,
    /// `(2/3) ⟨S₁·S₂⟩`
    pub m1_dot_m2: f64,
    /// `(2/3) ⟨(S₁ + S₂)²⟩`
    pub total_sq: f64,
}

/// The "two thirds" relations; they are established only at ϑ = π/2.
pub fn bohmian_reference_ratios(state: &PairStateParams) -> Result<BohmianReference> {
    if (state.theta - FRAC_PI_2).abs() > 1e-12 {
        return Err(BohmError::Regime { theta: state.theta });
    }
    let qm = qm_reference(state);
    let k = 2.0 / 3.0;
    Ok(BohmianReference {
        tensor: qm.spin_tensor.map(|row| row.map(|v| k * v)),
        m1_dot_m2: k * qm.s1_dot_s2,
        total_sq: k * (1.5 + 2.0 * qm.s1_dot_s2),
    })
}
