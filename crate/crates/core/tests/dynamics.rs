use std::f64::consts::PI;

use bohm_qubits::dynamics::{integrate, velocity_field, IntegratorSpec};
use bohm_qubits::{
    density, phase_gradient, EulerTriple, PairConfiguration, PairStateParams, PhysicalConstants,
};
use proptest::prelude::*;

fn arb_cfg() -> impl Strategy<Value = PairConfiguration> {
    let triple = (0.3..PI - 0.3, -PI..PI, 0.0..4.0 * PI);
    (triple.clone(), triple).prop_map(|((a1, b1, g1), (a2, b2, g2))| {
        PairConfiguration::new(EulerTriple::new(a1, b1, g1).unwrap(), EulerTriple::new(a2, b2, g2).unwrap())
    })
}

fn interior(s: &PairStateParams, c: &PairConfiguration) -> bool {
    density(s, c) * 64.0 * PI.powi(4) > 0.05
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn velocities_follow_the_symmetric_top_metric(
        theta in 0.0..PI, phi in -PI..PI, c in arb_cfg(), inertia in 0.5..3.0f64,
    ) {
        let s = PairStateParams::new(theta, phi).unwrap();
        prop_assume!(interior(&s, &c));
        let k = PhysicalConstants::new(inertia).unwrap();
        let v = velocity_field(&s, &c, &k).unwrap();
        let g = phase_gradient(&s, &c).unwrap();
        for (r, (alpha, off)) in [(1, (c.rotor1.alpha, 0)), (2, (c.rotor2.alpha, 3))] {
            let [sa, sb, sg] = g.rotor(r);
            let (sn, cs) = alpha.sin_cos();
            let want = [sa, (sb - cs * sg) / (sn * sn), (sg - cs * sb) / (sn * sn)].map(|x| x / inertia);
            for i in 0..3 {
                prop_assert!((v[off + i] - want[i]).abs() < 1e-12 * (1.0 + want[i].abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constants_of_motion_hold_along_trajectories(phi in -PI..PI, c in arb_cfg()) {
        let s = PairStateParams::new(PI / 2.0, phi).unwrap();
        prop_assume!(interior(&s, &c));
        let spec = IntegratorSpec::new(1e-10, 1e-10, 0.5, 2.0).unwrap().with_output_interval(0.1).unwrap();
        let traj = integrate(&s, &c, &spec, &PhysicalConstants::default()).unwrap();
        prop_assert!((traj.last().t - 2.0).abs() < 1e-12);
        for r in traj.max_residuals() {
            prop_assert!(r < 1e-8, "{:?}", traj.max_residuals());
        }
    }
}

#[test]
fn product_state_orbit_is_a_uniform_precession() {
    let k = PhysicalConstants::new(1.3).unwrap();
    let (a1, b1, g1, a2, b2, g2) = (1.1, 0.2, 0.4, 2.0, -0.7, 1.0);
    let start = PairConfiguration::from_array([a1, b1, g1, a2, b2, g2]);
    let state = PairStateParams::new(0.0, 0.0).unwrap();
    let up = 1.0 / (4.0 * 1.3 * (a1 / 2.0f64).cos().powi(2));
    let down = 1.0 / (4.0 * 1.3 * (a2 / 2.0f64).sin().powi(2));
    let t_end = 10.0 / up;
    let spec =
        IntegratorSpec::new(1e-11, 1e-11, 0.5, t_end).unwrap().with_output_interval(t_end / 20.0).unwrap();
    let traj = integrate(&state, &start, &spec, &k).unwrap();
    for p in &traj.points {
        let t = p.t;
        let want = [a1, b1 - up * t, g1 - up * t, a2, b2 + down * t, g2 - down * t];
        for (got, w) in p.cfg.to_array().into_iter().zip(want) {
            assert!((got - w).abs() < 1e-8, "t = {t}: {got} vs {w}");
        }
    }
}
