use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PointEval;
use crate::error::BohmError;
use crate::momenta::relative_azimuth;
use crate::rotor::PhysicalConstants;

/// Scalar functions of a configuration that can be histogrammed or averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    M1x,
    M1y,
    M1z,
    M2z,
    M1zSq,
    /// `|M₁|`
    MLen,
    /// `|M₁|²`
    MLenSq,
    /// `|M₁|` projected on the xy-plane
    Mxy,
    M1xM2x,
    M1zM2z,
    /// `M₁zM₂z/(|M₁||M₂|)`
    NormProdZ,
    /// `M₁z/|M₁|`
    CosPolar,
    /// `cos Φ` between `M₁` and `M₂`
    CosBigPhi,
    CosRelAzimuth,
    SinRelAzimuth,
    M1DotM2,
    /// `|M₁ + M₂|²`
    TotalSq,
    Kinetic,
    QuantumPotential,
}

impl Observable {
    pub const ALL: [Observable; 19] = [
        Self::M1x,
        Self::M1y,
        Self::M1z,
        Self::M2z,
        Self::M1zSq,
        Self::MLen,
        Self::MLenSq,
        Self::Mxy,
        Self::M1xM2x,
        Self::M1zM2z,
        Self::NormProdZ,
        Self::CosPolar,
        Self::CosBigPhi,
        Self::CosRelAzimuth,
        Self::SinRelAzimuth,
        Self::M1DotM2,
        Self::TotalSq,
        Self::Kinetic,
        Self::QuantumPotential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::M1x => "m1x",
            Self::M1y => "m1y",
            Self::M1z => "m1z",
            Self::M2z => "m2z",
            Self::M1zSq => "m1z_sq",
            Self::MLen => "m_len",
            Self::MLenSq => "m_len_sq",
            Self::Mxy => "mxy",
            Self::M1xM2x => "m1x_m2x",
            Self::M1zM2z => "m1z_m2z",
            Self::NormProdZ => "norm_prod_z",
            Self::CosPolar => "cos_polar",
            Self::CosBigPhi => "cos_big_phi",
            Self::CosRelAzimuth => "cos_rel_azimuth",
            Self::SinRelAzimuth => "sin_rel_azimuth",
            Self::M1DotM2 => "m1_dot_m2",
            Self::TotalSq => "total_sq",
            Self::Kinetic => "kinetic",
            Self::QuantumPotential => "qpot",
        }
    }

    /// Value at a sample point with unit moment of inertia.
    #[inline]
    pub fn eval(&self, p: &PointEval) -> Option<f64> {
        self.eval_with(p, &PhysicalConstants::default())
    }

    /// `None` only for the relative azimuth when an xy-projection vanishes.
    #[inline]
    pub fn eval_with(&self, p: &PointEval, consts: &PhysicalConstants) -> Option<f64> {
        let (m1, m2) = (&p.m1, &p.m2);
        let kinetic = || (m1.norm_sqr() + m2.norm_sqr()) / (2.0 * consts.moment_of_inertia);
        Some(match self {
            Self::M1x => m1.x,
            Self::M1y => m1.y,
            Self::M1z => m1.z,
            Self::M2z => m2.z,
            Self::M1zSq => m1.z * m1.z,
            Self::MLen => m1.norm(),
            Self::MLenSq => m1.norm_sqr(),
            Self::Mxy => m1.norm_xy(),
            Self::M1xM2x => m1.x * m2.x,
            Self::M1zM2z => m1.z * m2.z,
            Self::NormProdZ => m1.z * m2.z / (m1.norm() * m2.norm()),
            Self::CosPolar => m1.z / m1.norm(),
            Self::CosBigPhi => (m1.dot(m2) / (m1.norm() * m2.norm())).clamp(-1.0, 1.0),
            Self::CosRelAzimuth => relative_azimuth(m1, m2)?.0,
            Self::SinRelAzimuth => relative_azimuth(m1, m2)?.1,
            Self::M1DotM2 => m1.dot(m2),
            Self::TotalSq => (*m1 + *m2).norm_sqr(),
            Self::Kinetic => kinetic(),
            Self::QuantumPotential => consts.energy() - kinetic(),
        })
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = BohmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|o| o.name().eq_ignore_ascii_case(s.trim())).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|o| o.name()).collect();
            BohmError::InvalidInput(format!(
                "unknown observable `{s}` (expected one of {})",
                names.join(", ")
            ))
        })
    }
}
