use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PointEval, WeightedSample};
use crate::error::{BohmError, Result};
use crate::rotor::{density_scale, PairStateParams, RotorTrig, StateCoefficients};

/// Accepted samples per block; block `b` draws from ChaCha stream `b`.
pub const MC_BLOCK: u64 = 4096;

/// Rejection sampling of `λ ~ R²` over the γ-reduced domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_samples: u64,
    pub seed: u64,
    pub envelope_safety: f64,
}

impl McSpec {
    pub fn new(n_samples: u64, seed: u64) -> Result<Self> {
        Self::with_safety(n_samples, seed, 1.1)
    }

    pub fn with_safety(n_samples: u64, seed: u64, envelope_safety: f64) -> Result<Self> {
        if n_samples == 0 {
            return Err(BohmError::InvalidInput("n_samples must be ≥ 1".into()));
        }
        if !(envelope_safety.is_finite() && envelope_safety > 1.0) {
            return Err(BohmError::InvalidInput(format!(
                "envelope safety must exceed 1, got {envelope_safety}"
            )));
        }
        Ok(Self { n_samples, seed, envelope_safety })
    }

    pub fn n_blocks(&self) -> u64 {
        self.n_samples.div_ceil(MC_BLOCK)
    }

    fn block_len(&self, block: u64) -> u64 {
        MC_BLOCK.min(self.n_samples - block * MC_BLOCK)
    }
}

/// Upper bound of `R²` on the sampled domain: `(8π²)⁻²(cos ϑ/2 + sin ϑ/2)²`.
pub(crate) fn envelope(state: &PairStateParams, safety: f64) -> f64 {
    let (s, c) = (0.5 * state.theta).sin_cos();
    density_scale() * (c + s).powi(2) * safety
}

/// Generates the accepted samples of one block in order.
pub(crate) fn mc_block(
    coeffs: &StateCoefficients,
    envelope: f64,
    spec: &McSpec,
    block: u64,
    mut f: impl FnMut(&PointEval),
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(block);
    let want = spec.block_len(block);
    let mut accepted = 0;
    while accepted < want {
        let u: [f64; 5] = rng.gen();
        let (b1, b2) = (2.0 * PI * u[1], 2.0 * PI * u[3]);
        let r1 = RotorTrig::from_cos_alpha(2.0 * u[0] - 1.0, b1);
        let r2 = RotorTrig::from_cos_alpha(2.0 * u[2] - 1.0, b2);
        let Some(mut p) = PointEval::evaluate(coeffs, r1, r2, b1, b2) else {
            continue;
        };
        if p.weight > envelope {
            return Err(BohmError::EnvelopeViolation { density: p.weight, envelope });
        }
        if u[4] * envelope < p.weight {
            p.weight = 1.0;
            f(&p);
            accepted += 1;
        }
    }
    Ok(())
}

/// Unit-weight samples, restartable at any block.
pub struct McStream {
    coeffs: StateCoefficients,
    envelope: f64,
    spec: McSpec,
    block: u64,
    buffer: std::vec::IntoIter<WeightedSample>,
}

pub fn mc_stream(state: &PairStateParams, spec: McSpec) -> McStream {
    McStream::from_block(state, spec, 0)
}

impl McStream {
    pub fn from_block(state: &PairStateParams, spec: McSpec, block: u64) -> Self {
        Self {
            coeffs: state.coefficients(),
            envelope: envelope(state, spec.envelope_safety),
            spec,
            block,
            buffer: Vec::new().into_iter(),
        }
    }
}

impl Iterator for McStream {
    type Item = Result<WeightedSample>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(s) = self.buffer.next() {
                return Some(Ok(s));
            }
            if self.block >= self.spec.n_blocks() {
                return None;
            }
            let mut out = Vec::with_capacity(MC_BLOCK as usize);
            let r = mc_block(&self.coeffs, self.envelope, &self.spec, self.block, |p| out.push(p.sample()));
            self.block += 1;
            if let Err(e) = r {
                return Some(Err(e));
            }
            self.buffer = out.into_iter();
        }
    }
}
