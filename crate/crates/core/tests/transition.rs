use ionchain::asymptotics::{gamma_across_transition, gamma_coefficient, Phase};
use ionchain::linear_modes::critical_frequency_finite;
use ionchain::model::{critical_frequency_infinite, ChainParams};
use ionchain::ramsey::{linear_amplitudes, zigzag_amplitudes};
use ionchain::zigzag_modes::zigzag_spectrum;

#[test]
fn gamma_is_continuous_through_the_critical_point() {
    // Δ is measured from the infinite-chain ν_c; the ring destabilises at ν_c(N)
    let (n, eta_c) = (64, 0.05f64);
    let offset = critical_frequency_finite::<f64>(n) - critical_frequency_infinite::<f64>();
    assert!(offset < 0.0);
    let mut gaps = Vec::new();
    for d in [1e-5, 1e-6, 1e-7] {
        let above = gamma_across_transition(n, eta_c, offset + d).unwrap();
        let below = gamma_across_transition(n, eta_c, offset - d).unwrap();
        assert_eq!(above.phase, Phase::Linear);
        assert_eq!(below.phase, Phase::Zigzag);
        gaps.push((above.gamma - below.gamma).abs() / above.gamma);
    }
    // the mismatch shrinks roughly as √d toward the critical point
    assert!(gaps[2] < 1e-4, "{gaps:?}");
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn zigzag_amplitudes_reduce_to_linear_ones_at_threshold() {
    let n = 32;
    let nc: f64 = critical_frequency_finite(n);
    let p = ChainParams::new(n, nc + 1e-3, 0.2, 0.0).unwrap();
    let spec = zigzag_spectrum(p.nu_t, n).unwrap();
    assert_eq!(spec.equilibrium.b, 0.0);
    let zz = zigzag_amplitudes(&p, &spec, 1).unwrap();
    let lin = linear_amplitudes(&p).unwrap();
    let target = p.eta0().powi(2) * p.nu_t;
    assert!((zz.sum_rule() - target).abs() < 1e-10 * target);
    assert!((lin.sum_rule() - target).abs() < 1e-10 * target);
    let (gz, gl) = (gamma_coefficient(&zz).direct, gamma_coefficient(&lin).direct);
    assert!((gz - gl).abs() < 1e-10 * gl, "{gz} vs {gl}");
    for t in [0.5, 3.0, 40.0] {
        assert!((zz.exponent_a(t) - lin.exponent_a(t)).abs() < 1e-10);
    }
}

#[test]
fn zigzag_sum_rule_holds_below_threshold() {
    let n = 32;
    let nc: f64 = critical_frequency_finite(n);
    let p = ChainParams::new(n, nc * 0.9, 0.2, 0.0).unwrap();
    let spec = zigzag_spectrum(p.nu_t, n).unwrap();
    assert!(spec.equilibrium.b > 0.0);
    let amps = zigzag_amplitudes(&p, &spec, 1).unwrap();
    let target = p.eta0().powi(2) * p.nu_t;
    assert!((amps.sum_rule() - target).abs() < 1e-10 * target);
}
