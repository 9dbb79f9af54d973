use proptest::prelude::*;

use msgate::chain::{center_pair, equilibrium_positions};
use msgate::config::PulseKind;
use msgate::modes::build_modes;
use msgate::trajectory::{square_closed_form, TrajectorySolver};
use msgate::{hz_to_angular, DetuningContext, ErrorBreakdown, PulseShape, Quadrature, SystemConfig};

fn khz(x: f64) -> f64 {
    hz_to_angular(x * 1e3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn chain_is_mirror_symmetric(n in 2usize..40) {
        let u = equilibrium_positions(n).unwrap();
        for i in 0..n {
            prop_assert!((u[i] + u[n - 1 - i]).abs() <= 1e-12 * u[n - 1].abs());
        }
        prop_assert!(u.windows(2).all(|w| w[1] > w[0]));
        let (a, b) = center_pair(n);
        let gap = u[b] - u[a];
        prop_assert!(u.windows(2).all(|w| w[1] - w[0] >= gap * (1.0 - 1e-12)));
    }

    #[test]
    fn participation_is_orthonormal(n in 2usize..20, spacing_um in 3.0..6.0f64) {
        let cfg = SystemConfig::three_ion_reference().with_chain(n, spacing_um * 1e-6);
        let modes = build_modes(&cfg).unwrap();
        for m in [&modes.radial_a, &modes.radial_b, &modes.axial] {
            let p = &m.participation;
            let gram = p.transpose() * p;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((gram[(i, j)] - want).abs() < 1e-10);
                }
            }
            prop_assert!(m.freqs.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn numeric_square_matches_closed_form(delta_khz in -300.0..300.0f64, tau_us in 20.0..300.0f64) {
        let tau = tau_us * 1e-6;
        let p = PulseShape::square(1.0, tau).unwrap();
        let s = TrajectorySolver::new(&p, Quadrature { force_numeric: true, ..Quadrature::default() });
        let (a, b) = s.alpha_and_phase(khz(delta_khz)).unwrap();
        let (a0, b0) = square_closed_form(tau, khz(delta_khz));
        prop_assert!((a - a0).norm() <= 1e-9 * tau);
        prop_assert!((b - b0).abs() <= 1e-9 * tau * tau);
    }

    #[test]
    fn metrics_are_bounded(z_us in 10.0..60.0f64, dc_khz in 40.0..90.0f64, dw_khz in -20.0..20.0f64, spline in any::<bool>()) {
        let cfg = SystemConfig::three_ion_reference();
        let modes = build_modes(&cfg).unwrap();
        let coupling = modes.coupling(&cfg.geometry, cfg.target_pair, false).unwrap();
        let kind = if spline { PulseKind::Spline } else { PulseKind::Gaussian };
        let pulse = match kind {
            PulseKind::Spline => PulseShape::spline_gaussian(khz(200.0), 200e-6, z_us * 1e-6, 13).unwrap(),
            _ => PulseShape::trunc_gaussian(khz(200.0), 200e-6, z_us * 1e-6).unwrap(),
        };
        let ctx = DetuningContext::new(coupling.freqs[3] + khz(dc_khz - 40.0), khz(dw_khz));
        let Ok(d) = ctx.check_resonance(&coupling.freqs) else { return Ok(()) };
        let traj = TrajectorySolver::new(&pulse, Quadrature::default()).trajectory(&d).unwrap();
        let b = ErrorBreakdown::new(&coupling, &traj).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.eps_d));
        prop_assert!(b.eps_r >= 0.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b.fidelity));
        prop_assert!((b.populations().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_round_trip(n in 2usize..30, spacing_um in 2.5..6.0f64, z_us in 5.0..80.0f64) {
        let mut cfg = SystemConfig::three_ion_reference().with_chain(n, spacing_um * 1e-6);
        cfg.pulse.z = z_us * 1e-6;
        let back = SystemConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
