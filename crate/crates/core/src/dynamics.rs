//! Guidance equations and an adaptive Dormand–Prince integrator.
//!
//! For each rotor the angles evolve as
//!
//! ```text
//! I α̇ = Sα
//! I β̇ = (Sβ − cos α Sγ) / sin²α
//! I γ̇ = (Sγ − cos α Sβ) / sin²α
//! ```
//!
//! with `S` the phase of the six-dimensional guiding wave. Integrated angles
//! are continued rather than wrapped, so `β` and `γ` grow without bound along
//! a precessing orbit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::momenta::{momentum_pair, principal_axis, ConfigurationReport, POLE_THRESHOLD};
use crate::rotor::{
    node_threshold, Amplitudes, EulerTriple, PairConfiguration, PairStateParams, PhysicalConstants, RotorTrig,
};

/// Steps that evaluate the field where `|sin α|` is below this are rejected.
pub const GUARD_BAND: f64 = 1e-6;

/// Time derivatives `(α̇₁, β̇₁, γ̇₁, α̇₂, β̇₂, γ̇₂)`.
pub fn velocity_field(
    state: &PairStateParams,
    cfg: &PairConfiguration,
    consts: &PhysicalConstants,
) -> Result<[f64; 6]> {
    field(state, &cfg.to_array(), consts, POLE_THRESHOLD)
}

fn field(state: &PairStateParams, y: &[f64; 6], consts: &PhysicalConstants, band: f64) -> Result<[f64; 6]> {
    let cfg = PairConfiguration::from_array(*y);
    let r1 = RotorTrig::from_euler(&cfg.rotor1);
    let r2 = RotorTrig::from_euler(&cfg.rotor2);
    for r in [&r1, &r2] {
        if r.sin_alpha.abs() < band {
            return Err(BohmError::Pole { sin_alpha: r.sin_alpha });
        }
    }
    let amp = Amplitudes::evaluate(&state.coefficients(), &r1, &r2);
    let density = amp.density();
    if density <= node_threshold() {
        return Err(BohmError::Node { density });
    }
    let grad = amp.phase_gradient();
    let inv_i = 1.0 / consts.moment_of_inertia;
    let mut out = [0.0; 6];
    for (k, r) in [(0, &r1), (1, &r2)] {
        let [sa, sb, sg] = grad.rotor(k + 1);
        let inv_sin2 = inv_i / (r.sin_alpha * r.sin_alpha);
        out[3 * k] = sa * inv_i;
        out[3 * k + 1] = (sb - r.cos_alpha * sg) * inv_sin2;
        out[3 * k + 2] = (sg - r.cos_alpha * sb) * inv_sin2;
    }
    Ok(out)
}

/// Spin state of an isolated rotor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

/// Precession period parameter `τ = 4I cos²(α₀/2)` for spin up and
/// `4I sin²(α₀/2)` for spin down.
pub fn precession_time(alpha0: f64, spin: Spin, consts: &PhysicalConstants) -> f64 {
    let half = match spin {
        Spin::Up => (0.5 * alpha0).cos(),
        Spin::Down => (0.5 * alpha0).sin(),
    };
    4.0 * consts.moment_of_inertia * half * half
}

/// Exact orbit of a single rotor: `{α₀, β₀ − t/τ, γ₀ − t/τ}` for spin up and
/// `{α₀, β₀ + t/τ, γ₀ − t/τ}` for spin down. The result is canonicalized.
pub fn exact_single_rotor(
    start: &EulerTriple,
    t: f64,
    spin: Spin,
    consts: &PhysicalConstants,
) -> EulerTriple {
    let (b, g) = exact_rates(start.alpha, spin, consts);
    EulerTriple::new(start.alpha, start.beta + b * t, start.gamma + g * t).unwrap_or(*start)
}

/// `(β̇, γ̇)` of the exact single-rotor orbit.
pub fn exact_rates(alpha0: f64, spin: Spin, consts: &PhysicalConstants) -> (f64, f64) {
    let rate = 1.0 / precession_time(alpha0, spin, consts);
    match spin {
        Spin::Up => (-rate, -rate),
        Spin::Down => (rate, -rate),
    }
}

/// Tolerances and output schedule of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// End time; negative values integrate backwards.
    pub t_end: f64,
    /// Spacing of dense output; `None` records every accepted step.
    pub output_interval: Option<f64>,
}

impl IntegratorSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_step: f64, t_end: f64) -> Result<Self> {
        let spec = Self { rel_tol, abs_tol, max_step, t_end, output_interval: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_output_interval(mut self, dt: f64) -> Result<Self> {
        self.output_interval = Some(dt);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.rel_tol) && positive(self.abs_tol)) {
            return Err(BohmError::InvalidInput(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if !positive(self.max_step) {
            return Err(BohmError::InvalidInput(format!("max_step {} must be positive", self.max_step)));
        }
        if !self.t_end.is_finite() {
            return Err(BohmError::InvalidInput(format!("t_end {} is not finite", self.t_end)));
        }
        if let Some(dt) = self.output_interval {
            if !positive(dt) {
                return Err(BohmError::InvalidInput(format!("output interval {dt} must be positive")));
            }
            if self.t_end.abs() / dt > 1e8 {
                return Err(BohmError::InvalidInput("more than 1e8 output points requested".into()));
            }
        }
        Ok(())
    }
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-10, max_step: 0.5, t_end: 10.0, output_interval: None }
    }
}

/// Deviations of the constants of motion at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `M₁z + M₂z`
    pub total_z: f64,
    /// `e₁·M₁ − 1/2`
    pub axis1: f64,
    /// `e₂·M₂ − 1/2`
    pub axis2: f64,
    /// `kinetic + Q − E`
    pub energy: f64,
    /// `|M₁| − |M₂|`, conserved only for maximally entangled states.
    pub length_diff: f64,
}

impl Residuals {
    pub const NAMES: [&'static str; 5] = ["total_z", "axis1", "axis2", "energy", "length_diff"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.total_z, self.axis1, self.axis2, self.energy, self.length_diff]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Continued (unwrapped) angles.
    pub cfg: PairConfiguration,
    pub report: ConfigurationReport,
    pub residuals: Residuals,
}

impl TrajectoryPoint {
    pub fn at(
        state: &PairStateParams,
        t: f64,
        cfg: PairConfiguration,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let momenta = momentum_pair(state, &cfg)?;
        let report = ConfigurationReport::from_momenta(momenta, consts);
        let (m1, m2) = (momenta.m1, momenta.m2);
        let residuals = Residuals {
            total_z: m1.z + m2.z,
            axis1: principal_axis(&cfg.rotor1).dot(&m1) - 0.5,
            axis2: principal_axis(&cfg.rotor2).dot(&m2) - 0.5,
            energy: report.kinetic + report.qpot - consts.energy(),
            length_diff: report.len1 - report.len2,
        };
        Ok(Self { t, cfg, report, residuals })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    /// Rejections caused by a stage landing in the pole or node guard band.
    pub guarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("a trajectory holds at least its start")
    }

    /// Largest `|r(t) − r(0)| / |t|` over the recorded points, per residual.
    pub fn drift_per_time(&self) -> [f64; 5] {
        let r0 = self.points[0].residuals.to_array();
        let t0 = self.points[0].t;
        let mut out = [0.0f64; 5];
        for p in &self.points[1..] {
            let dt = (p.t - t0).abs().max(1.0);
            for (k, r) in p.residuals.to_array().iter().enumerate() {
                out[k] = out[k].max((r - r0[k]).abs() / dt);
            }
        }
        out
    }

    /// Largest `|r(t)|` over the recorded points, per residual.
    pub fn max_residuals(&self) -> [f64; 5] {
        let mut out = [0.0f64; 5];
        for p in &self.points {
            for (k, r) in p.residuals.to_array().iter().enumerate() {
                out[k] = out[k].max(r.abs());
            }
        }
        out
    }
}

// Dormand–Prince 5(4) tableau; the stage nodes are implicit since the field is autonomous
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

type State = [f64; 6];

struct Step {
    y: State,
    f: State,
    err: f64,
}

fn try_step(
    rhs: &impl Fn(&State) -> Result<State>,
    y: &State,
    f0: &State,
    h: f64,
    spec: &IntegratorSpec,
) -> Result<Step> {
    let mut k = [[0.0; 6]; 7];
    k[0] = *f0;
    let mut ys = *y;
    for s in 1..7 {
        for i in 0..6 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            ys[i] = y[i] + h * acc;
        }
        k[s] = rhs(&ys)?;
    }
    let mut sum = 0.0;
    for i in 0..6 {
        let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
        let scale = spec.abs_tol + spec.rel_tol * y[i].abs().max(ys[i].abs());
        sum += (e / scale).powi(2);
    }
    Ok(Step { y: ys, f: k[6], err: (sum / 6.0).sqrt() })
}

fn hermite(t0: f64, y0: &State, f0: &State, t1: f64, y1: &State, f1: &State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

/// Integrates the guidance equations from `start` (at `t = 0`) to `spec.t_end`.
///
/// A step whose stages touch a node, or come within [`GUARD_BAND`] of a pole,
/// is rejected and halved; [`BohmError::StepUnderflow`] is returned when the
/// step shrinks to round-off.
pub fn integrate(
    state: &PairStateParams,
    start: &PairConfiguration,
    spec: &IntegratorSpec,
    consts: &PhysicalConstants,
) -> Result<Trajectory> {
    spec.validate()?;
    let rhs = |y: &State| {
        if !(y[0] > 0.0 && y[0] < std::f64::consts::PI && y[3] > 0.0 && y[3] < std::f64::consts::PI) {
            return Err(BohmError::Pole { sin_alpha: 0.0 });
        }
        field(state, y, consts, GUARD_BAND)
    };
    let mut y = start.to_array();
    let mut f = rhs(&y)?;
    let mut points = vec![TrajectoryPoint::at(state, 0.0, *start, consts)?];
    let mut stats = StepStats::default();
    let dir = if spec.t_end < 0.0 { -1.0 } else { 1.0 };
    let t_end = spec.t_end;
    let span = t_end.abs();
    if span == 0.0 {
        return Ok(Trajectory { points, stats });
    }
    let mut next_out = 1u64;
    let mut t = 0.0;
    let mut h = dir * initial_step(&y, &f, spec).min(spec.max_step).min(span);
    let mut last_err = 1e-4f64;
    let record = |points: &mut Vec<TrajectoryPoint>, tt: f64, yy: &State| -> Result<()> {
        points.push(TrajectoryPoint::at(state, tt, PairConfiguration::from_array(*yy), consts)?);
        Ok(())
    };
    while dir * (t_end - t) > 0.0 {
        let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h.abs() < min_step {
            return Err(BohmError::StepUnderflow {
                t,
                reason: format!("step {:e} below round-off; last evaluation near a node or pole", h.abs()),
            });
        }
        if dir * (t + h - t_end) > 0.0 {
            h = t_end - t;
        }
        let step = match try_step(&rhs, &y, &f, h, spec) {
            Ok(s) => s,
            Err(BohmError::Node { .. } | BohmError::Pole { .. }) => {
                stats.guarded += 1;
                stats.rejected += 1;
                h *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !(step.err <= 1.0) {
            stats.rejected += 1;
            let factor = if step.err.is_finite() { (0.9 * step.err.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= factor.min(1.0);
            continue;
        }
        stats.accepted += 1;
        let t_new = if (t_end - (t + h)).abs() <= min_step { t_end } else { t + h };
        match spec.output_interval {
            Some(dt) => loop {
                let t_out = dir * dt * next_out as f64;
                if dir * (t_out - t_new) > 0.0 || dir * (t_out - t_end) > 0.0 {
                    break;
                }
                let y_out =
                    if t_out == t_new { step.y } else { hermite(t, &y, &f, t_new, &step.y, &step.f, t_out) };
                record(&mut points, t_out, &y_out)?;
                next_out += 1;
            },
            None => record(&mut points, t_new, &step.y)?,
        }
        // PI step-size control (Hairer's defaults for this pair)
        let err = step.err.max(1e-10);
        let factor = (0.9 * err.powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0)).clamp(0.2, 5.0);
        last_err = err;
        t = t_new;
        y = step.y;
        f = step.f;
        h = dir * (h.abs() * factor).min(spec.max_step);
    }
    if points.last().map(|p| p.t) != Some(t_end) {
        record(&mut points, t_end, &y)?;
    }
    Ok(Trajectory { points, stats })
}

fn initial_step(y: &State, f: &State, spec: &IntegratorSpec) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..6 {
        let sc = spec.abs_tol + spec.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / 6.0).sqrt(), (d1 / 6.0).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

/// Integrates independent trajectories in parallel; the output order follows `starts`.
pub fn integrate_many(
    state: &PairStateParams,
    starts: &[PairConfiguration],
    spec: &IntegratorSpec,
    consts: &PhysicalConstants,
) -> Vec<Result<Trajectory>> {
    starts.par_iter().map(|s| integrate(state, s, spec, consts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg(x: [f64; 6]) -> PairConfiguration {
        PairConfiguration::from_array(x)
    }

    #[test]
    fn product_state_velocities() {
        let consts = PhysicalConstants::default();
        let s = PairStateParams::new(0.0, 0.0).unwrap();
        let a1 = 1.1;
        let v = velocity_field(&s, &cfg([a1, 0.4, 2.0, FRAC_PI_2, 1.0, 0.3]), &consts).unwrap();
        let tau = 4.0 * (0.5 * a1).cos().powi(2);
        assert!(v[0].abs() < 1e-14 && v[3].abs() < 1e-14);
        assert!((v[1] + 1.0 / tau).abs() < 1e-13);
        assert!((v[2] + 1.0 / tau).abs() < 1e-13);
        // spin down at α = π/2: 4 sin²(π/4) = 2
        assert!((v[4] - 0.5).abs() < 1e-13);
        assert!((v[5] + 0.5).abs() < 1e-13);
    }

    #[test]
    fn precession_times() {
        let c = PhysicalConstants::default();
        assert_eq!(precession_time(0.0, Spin::Up, &c), 4.0);
        assert!((precession_time(FRAC_PI_2, Spin::Up, &c) - 2.0).abs() < 1e-15);
        let big = PhysicalConstants::new(2.5).unwrap();
        assert!((precession_time(FRAC_PI_2, Spin::Down, &big) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn exact_orbit_keeps_momentum_length() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::new(0.0, 0.0).unwrap();
        let (a1, a2) = (0.7, 2.0);
        let mut r1 = EulerTriple::new(a1, 0.2, 0.1).unwrap();
        let mut r2 = EulerTriple::new(a2, 1.0, 3.0).unwrap();
        for _ in 0..20 {
            r1 = exact_single_rotor(&r1, 0.37, Spin::Up, &c);
            r2 = exact_single_rotor(&r2, 0.37, Spin::Down, &c);
            let m = momentum_pair(&s, &PairConfiguration::new(r1, r2)).unwrap();
            assert!((m.m1.norm() - 0.5 / (0.5 * a1).cos()).abs() < 1e-12);
            assert!((m.m2.norm() - 0.5 / (0.5 * a2).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn node_and_pole_rejected() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::new(0.0, 0.0).unwrap();
        assert!(matches!(
            velocity_field(&s, &cfg([PI, 0.0, 0.0, 1.0, 0.0, 0.0]), &c),
            Err(BohmError::Node { .. } | BohmError::Pole { .. })
        ));
        assert!(matches!(
            velocity_field(&s, &cfg([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]), &c),
            Err(BohmError::Pole { .. })
        ));
        let spec = IntegratorSpec::new(1e-8, 1e-8, 0.1, 1.0).unwrap();
        assert!(integrate(&s, &cfg([1.0, 0.0, 0.0, PI, 0.0, 0.0]), &spec, &c).is_err());
    }

    #[test]
    fn product_state_matches_exact_solution() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::new(0.0, 0.0).unwrap();
        let (a1, a2) = (0.9, 1.3);
        let tau = precession_time(a1, Spin::Up, &c);
        let spec =
            IntegratorSpec::new(1e-10, 1e-10, 0.5, 10.0 * tau).unwrap().with_output_interval(0.25).unwrap();
        let start = cfg([a1, 0.3, 0.2, a2, 5.0, 1.0]);
        let traj = integrate(&s, &start, &spec, &c).unwrap();
        let (b1, g1) = exact_rates(a1, Spin::Up, &c);
        let (b2, g2) = exact_rates(a2, Spin::Down, &c);
        for p in &traj.points {
            let y = p.cfg.to_array();
            let exact = [a1, 0.3 + b1 * p.t, 0.2 + g1 * p.t, a2, 5.0 + b2 * p.t, 1.0 + g2 * p.t];
            for i in 0..6 {
                assert!((y[i] - exact[i]).abs() < 1e-8, "t = {}, i = {i}", p.t);
            }
        }
        assert_eq!(traj.last().t, 10.0 * tau);
    }

    #[test]
    fn maximally_entangled_constants_hold() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::triplet();
        let spec = IntegratorSpec::new(1e-10, 1e-10, 0.2, 5.0).unwrap();
        let traj = integrate(&s, &cfg([1.0, 0.4, 0.2, 2.1, 2.5, 1.7]), &spec, &c).unwrap();
        assert!(traj.stats.accepted > 10);
        for r in traj.max_residuals() {
            assert!(r < 1e-10, "{r}");
        }
        for d in traj.drift_per_time() {
            assert!(d < 1e-8);
        }
    }

    fn distance(a: &PairConfiguration, b: &PairConfiguration) -> f64 {
        let (a, b) = (a.to_array(), b.to_array());
        (0..6).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::new(1.2, 0.7).unwrap();
        let start = cfg([1.0, 0.4, 0.2, 2.1, 2.5, 1.7]);
        let run =
            |tol: f64| integrate(&s, &start, &IntegratorSpec::new(tol, tol, 0.5, 4.0).unwrap(), &c).unwrap();
        let reference = run(1e-13).last().cfg;
        let coarse = distance(&run(1e-6).last().cfg, &reference);
        let fine = distance(&run(1e-9).last().cfg, &reference);
        assert!(fine < coarse / 50.0, "coarse {coarse:e}, fine {fine:e}");
    }

    #[test]
    fn backward_run_retraces() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::singlet();
        let start = cfg([1.0, 0.4, 0.2, 2.1, 2.5, 1.7]);
        let fwd = integrate(&s, &start, &IntegratorSpec::new(1e-10, 1e-10, 0.5, 3.0).unwrap(), &c).unwrap();
        let reference =
            integrate(&s, &start, &IntegratorSpec::new(1e-13, 1e-13, 0.5, 3.0).unwrap(), &c).unwrap();
        let fwd_err = distance(&fwd.last().cfg, &reference.last().cfg);
        let back = integrate(&s, &fwd.last().cfg, &IntegratorSpec::new(1e-10, 1e-10, 0.5, -3.0).unwrap(), &c)
            .unwrap();
        assert_eq!(back.last().t, -3.0);
        let retrace = distance(&back.last().cfg, &start);
        assert!(retrace <= 10.0 * fwd_err.max(1e-12), "retrace {retrace:e}, forward {fwd_err:e}");
    }

    #[test]
    fn dense_output_schedule() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::triplet();
        let spec = IntegratorSpec::new(1e-9, 1e-9, 0.3, -2.0).unwrap().with_output_interval(0.5).unwrap();
        let traj = integrate(&s, &cfg([1.0, 0.4, 0.2, 2.1, 2.5, 1.7]), &spec, &c).unwrap();
        let ts: Vec<f64> = traj.points.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![0.0, -0.5, -1.0, -1.5, -2.0]);
    }

    #[test]
    fn parallel_batch_is_ordered_and_deterministic() {
        let c = PhysicalConstants::default();
        let s = PairStateParams::new(0.8, 2.0).unwrap();
        let starts: Vec<_> =
            (0..6).map(|k| cfg([0.5 + 0.3 * k as f64, 0.1 * k as f64, 0.0, 1.9, 0.7, 0.2])).collect();
        let spec = IntegratorSpec::new(1e-9, 1e-9, 0.5, 1.0).unwrap();
        let batch = integrate_many(&s, &starts, &spec, &c);
        for (st, tr) in starts.iter().zip(&batch) {
            assert_eq!(tr.as_ref().unwrap(), &integrate(&s, st, &spec, &c).unwrap());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(IntegratorSpec::new(0.0, 1e-9, 0.1, 1.0).is_err());
        assert!(IntegratorSpec::new(1e-9, 1e-9, -0.1, 1.0).is_err());
        assert!(IntegratorSpec::new(1e-9, 1e-9, 0.1, f64::NAN).is_err());
        assert!(IntegratorSpec::default().with_output_interval(0.0).is_err());
    }
}
