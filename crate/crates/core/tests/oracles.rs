//! Closed forms checked against formulas and quadratures written out here.

use std::f64::consts::{LN_2, PI};

use bohm_qubits::entropy::entanglement_of_formation;
use bohm_qubits::oracles::{qm_reference, AnalyticDistribution, DistributionKind};
use bohm_qubits::PairStateParams;
use num_complex::Complex64;
use proptest::prelude::*;

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn dist(kind: DistributionKind) -> AnalyticDistribution {
    AnalyticDistribution::new(kind).unwrap()
}

fn m1z_maxent(mu: f64) -> f64 {
    0.8 * (2.0 * mu).abs().powi(-5).min(1.0)
}

#[test]
fn closed_form_densities() {
    use DistributionKind::*;
    let cases: [(DistributionKind, &dyn Fn(f64) -> f64, &[f64]); 5] = [
        (M1zMaxent, &m1z_maxent, &[-3.0, -0.7, -0.2, 0.0, 0.3, 0.5001, 1.0, 4.0]),
        (MomentumLengthSq, &|m: f64| (2.0 * m).powi(-3), &[0.26, 0.5, 1.0, 7.0]),
        (MomentumLength, &|m: f64| 0.25 / m.powi(5), &[0.51, 1.0, 3.0]),
        (M1xProductState, &|m: f64| 1.5 * (1.0 + 4.0 * m * m).powf(-2.5), &[-2.0, -0.1, 0.0, 0.4, 1.3]),
        (M1zSqMaxent, &|m: f64| 1.6 * (4.0 * m).powf(-0.5).min((4.0 * m).powi(-3)), &[0.01, 0.2, 0.3, 2.0]),
    ];
    for (kind, f, points) in cases {
        let d = dist(kind);
        for &mu in points {
            let (got, want) = (d.density(mu).unwrap(), f(mu));
            assert!((got - want).abs() < 1e-13 * want.max(1.0), "{kind:?} at {mu}: {got} vs {want}");
        }
    }
    assert_eq!(dist(M1zMaxent).density(0.0).unwrap(), 0.8);
    assert!((dist(M1zMaxent).density(1.0).unwrap() - 0.025).abs() < 1e-15);
    assert!((dist(MomentumLength).density(1.0).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn mxy_maxent_density_and_tail() {
    let d = dist(DistributionKind::MxyMaxent);
    let f = |m: f64| {
        let inner =
            if m < 0.5 { (1.0 + 2.0 * m * m + 6.0 * m.powi(4)) * (1.0 - 4.0 * m * m).sqrt() } else { 0.0 };
        2.0 / (15.0 * m.powi(5)) * (1.0 - inner)
    };
    for mu in [0.1, 0.3, 0.49, 0.6, 2.0] {
        let (got, want) = (d.density(mu).unwrap(), f(mu));
        assert!((got - want).abs() < 1e-9 * want, "{mu}: {got} vs {want}");
    }
    let far = 1e3;
    assert!((d.density(far).unwrap() * far.powi(5) - 2.0 / 15.0).abs() < 1e-12);
}

#[test]
fn differential_entropy_of_m1z_by_quadrature() {
    let integrand = |m: f64| {
        let p = m1z_maxent(m);
        -p * p.log2()
    };
    // flat core plus two power-law tails, truncated where they are below 1e-14
    let h = simpson(integrand, -0.5, 0.5, 2_000) + 2.0 * simpson(integrand, 0.5, 1e3, 2_000_000);
    let closed = (1.25 * 0.25f64.exp()).log2();
    assert!((closed - (1.25f64.log2() + 0.25 / LN_2)).abs() < 1e-15);
    assert!((h - closed).abs() < 1e-7, "{h} vs {closed}");
    assert!((closed - 0.6826).abs() < 1e-4);
    assert!((2f64.powf(closed) - 1.61).abs() < 5e-3);
}

#[test]
fn independent_rotor_alignment() {
    // at ϑ = 0 each momentum sits at polar angle α/2 from ±z, with α weighted by
    // cos²(α/2) sin α (rotor 1) or sin²(α/2) sin α (rotor 2)
    let weight = |a: f64| (0.5 * a).cos().powi(2) * a.sin();
    let norm = simpson(weight, 0.0, PI, 10_000);
    let mean_cos = simpson(|a| weight(a) * (0.5 * a).cos(), 0.0, PI, 10_000) / norm;
    assert!((mean_cos - 0.8).abs() < 1e-12);
    assert!((-mean_cos * mean_cos + 16.0 / 25.0).abs() < 1e-12);
}

fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    let (o, i, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0));
    [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

/// `⟨S₁ᵢS₂ⱼ⟩` from the four-component state in the basis |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
fn spin_tensor(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let psi = [
        zero,
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
        zero,
    ];
    let s = pauli();
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = zero;
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            acc += psi[2 * a + b].conj() * s[i][a][c] * s[j][b][d] * psi[2 * c + d];
                        }
                    }
                }
            }
            out[i][j] = 0.25 * acc.re;
        }
    }
    out
}

proptest! {
    #[test]
    fn spin_tensor_matches_matrix_mechanics(theta in 0.0..PI, phi in -PI..PI) {
        let state = PairStateParams::new(theta, phi).unwrap();
        let qm = qm_reference(&state);
        let want = spin_tensor(theta, phi);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((qm.spin_tensor[i][j] - want[i][j]).abs() < 1e-14, "{i}{j}");
            }
        }
        let trace: f64 = (0..3).map(|i| want[i][i]).sum();
        prop_assert!((qm.s1_dot_s2 - trace).abs() < 1e-14);
        // entanglement of formation is the entropy of the reduced state
        let p = (theta / 2.0).cos().powi(2);
        let h = if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() - (1.0 - p) * (1.0 - p).log2() };
        prop_assert!((entanglement_of_formation(&state) - h).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_the_integral_of_the_density(k in 0usize..10, eta in prop::bool::ANY, u in 0.02..0.98f64) {
        let kind = DistributionKind::ALL[k];
        let d = if kind.has_eta() {
            AnalyticDistribution::with_eta(kind, if eta { 1.0 } else { -1.0 }).unwrap()
        } else {
            dist(kind)
        };
        let (lo, hi) = d.support();
        let (lo, hi) = (lo.max(-4.0), hi.min(4.0));
        let x = lo + u * (hi - lo);
        let mut cuts: Vec<f64> = d.kinks().into_iter().filter(|&c| c > lo && c < x).collect();
        cuts.insert(0, lo.max(x - 0.5));
        cuts.push(x);
        let a = cuts[0];
        // stay clear of the integrable singularities at zero
        prop_assume!(cuts.iter().all(|c| c.abs() > 1e-3) || kind == DistributionKind::CosPolarMaxent);
        prop_assume!(!(a < 0.0 && x > 0.0) || d.density(0.0).is_ok());
        let mut q = 0.0;
        for w in cuts.windows(2) {
            q += simpson(|m| d.density(m).unwrap_or(0.0), w[0], w[1], 400_000);
        }
        let span = d.cdf(x) - d.cdf(a);
        prop_assert!((span - q).abs() < 1e-6, "{kind:?}: cdf span {span} vs quadrature {q}");
        prop_assert!(d.cdf(x) >= d.cdf(a) - 1e-15);
    }
}

#[test]
fn cdf_limits() {
    for kind in DistributionKind::ALL {
        let d = if kind.has_eta() { AnalyticDistribution::with_eta(kind, -1.0).unwrap() } else { dist(kind) };
        assert!(d.cdf(-1e9).abs() < 1e-12, "{kind:?}");
        assert!((d.cdf(1e9) - 1.0).abs() < 1e-12, "{kind:?}");
    }
}
