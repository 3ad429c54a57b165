use std::f64::consts::PI;

use bohm_qubits::bell::{bohm_chsh, chsh_value, qm_correlator, PolarizerSetup};
use bohm_qubits::ensemble::{
    correlation_tensor, estimate_average, Ensemble, EnsembleSummary, GridSpec, Histogram1D, HistogramConfig,
    LatticeSpec, McSpec, Sampler,
};
use bohm_qubits::{PairStateParams, PhysicalConstants};
use proptest::prelude::*;
use rand::SeedableRng;

fn grid(state: PairStateParams, n: usize) -> Ensemble {
    Ensemble::new(state, Sampler::Grid(GridSpec::cube(n).unwrap()))
}

#[test]
fn product_state_alignment() {
    let s = EnsembleSummary::compute(
        &grid(PairStateParams::new(0.0, 0.3).unwrap(), 32),
        &PhysicalConstants::default(),
    )
    .unwrap();
    let c = s.angles.cos_big_phi;
    assert!((c.value + 16.0 / 25.0).abs() < 3.0 * c.std_error + 2e-3, "{c:?}");
}

#[test]
fn samplers_agree() {
    let state = PairStateParams::new(1.0, 0.4).unwrap();
    let mz = |p: &bohm_qubits::ensemble::PointEval| Some(p.m1.z);
    let want = 0.5 * 1.0f64.cos();
    for ens in [
        grid(state, 24),
        Ensemble::new(state, Sampler::Lattice(LatticeSpec::new(1 << 18).unwrap())),
        Ensemble::new(state, Sampler::Mc(McSpec::new(1 << 18, 7).unwrap())),
    ] {
        let r = estimate_average(&ens, mz).unwrap();
        assert!(r.agrees_with(want, 4.0, 1e-3), "{r:?} vs {want}");
    }
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let state = PairStateParams::new(0.8, 2.0).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [
                correlation_tensor(&grid(state, 12)).unwrap(),
                correlation_tensor(&Ensemble::new(state, Sampler::Mc(McSpec::new(40_000, 3).unwrap())))
                    .unwrap(),
            ]
            .map(|t| serde_json::to_string(&t).unwrap())
        })
    };
    let one = run(1);
    for threads in [2, 3, 7] {
        assert_eq!(run(threads), one);
    }
}

#[test]
fn optimal_singlet_setup_saturates_tsirelson() {
    let singlet = PairStateParams::singlet();
    let setup = PolarizerSetup::optimal_singlet();
    let qm = chsh_value(&setup, |a, b| qm_correlator(&singlet, a, b));
    assert!((qm.abs() - 2.0 * 2f64.sqrt()).abs() < 1e-12, "{qm}");
    let tensor = correlation_tensor(&grid(singlet, 24)).unwrap();
    let bohm = bohm_chsh(&tensor, &setup);
    assert!((bohm.value.abs() - 2.0 * 2f64.sqrt()).abs() < 3.0 * bohm.std_error + 1e-12, "{bohm:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_ignores_a_common_weight_scale(
        samples in prop::collection::vec((-3.0..3.0f64, 0.01..2.0f64), 1..200),
        scale in 1e-6..1e6f64,
    ) {
        let cfg = HistogramConfig::new(-2.0, 2.0, 0.25).unwrap();
        let (mut a, mut b) = (Histogram1D::new(&cfg), Histogram1D::new(&cfg));
        for &(mu, w) in &samples {
            a.push(mu, w);
            b.push(mu, w * scale);
        }
        prop_assert!((a.clipped_fraction() - b.clipped_fraction()).abs() < 1e-12);
        for (x, y) in a.densities().into_iter().zip(b.densities()) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn quantum_chsh_respects_tsirelson(theta in 0.0..PI, phi in -PI..PI, seed in any::<u64>()) {
        let state = PairStateParams::new(theta, phi).unwrap();
        let setup = PolarizerSetup::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let s = chsh_value(&setup, |a, b| qm_correlator(&state, a, b));
        prop_assert!(s.abs() <= 2.0 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn singlet_correlator_is_minus_the_cosine(a in -PI..PI, b in -PI..PI) {
        let singlet = PairStateParams::singlet();
        let setup = PolarizerSetup::in_xz_plane(a, 0.0, b, 0.0);
        let (u, v) = (setup.a, setup.b);
        prop_assert!((qm_correlator(&singlet, &u, &v) + (a - b).cos()).abs() < 1e-12);
    }
}
