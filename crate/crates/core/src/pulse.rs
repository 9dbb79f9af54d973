//! Rabi-rate envelopes Ω(t) on the gate window [0, τ].

use std::io::Write;

use crate::config::{angular_to_hz, hz_to_angular, PulseKind, PulseSpec};
use crate::report::{fmt_num, write_table, Metadata};
use crate::spline::NaturalCubicSpline;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    /// Peak Rabi rate, rad/s.
    pub omega0: f64,
    /// Gate duration, s.
    pub tau: f64,
    /// Gaussian width, s. Ignored by square pulses.
    pub z: f64,
    pub n_knots: usize,
    /// Unit-peak square-root spline (spline pulses only).
    spline: Option<NaturalCubicSpline>,
}

fn check_common(omega0: f64, tau: f64) -> Result<()> {
    if !(omega0 >= 0.0 && omega0.is_finite()) {
        return Err(Error::Pulse(format!("omega0 must be >= 0, got {omega0}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Pulse(format!("tau must be > 0, got {tau}")));
    }
    Ok(())
}

fn check_width(z: f64) -> Result<()> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Pulse(format!("z must be > 0, got {z}")));
    }
    Ok(())
}

impl PulseShape {
    pub fn square(omega0: f64, tau: f64) -> Result<PulseShape> {
        check_common(omega0, tau)?;
        Ok(PulseShape { kind: PulseKind::Square, omega0, tau, z: 0.0, n_knots: 0, spline: None })
    }

    pub fn trunc_gaussian(omega0: f64, tau: f64, z: f64) -> Result<PulseShape> {
        check_common(omega0, tau)?;
        check_width(z)?;
        Ok(PulseShape { kind: PulseKind::Gaussian, omega0, tau, z, n_knots: 0, spline: None })
    }

    /// Natural cubic spline through √Gaussian samples at equally spaced knot
    /// times (endpoints included), squared to give Ω(t).
    pub fn spline_gaussian(omega0: f64, tau: f64, z: f64, n_knots: usize) -> Result<PulseShape> {
        check_common(omega0, tau)?;
        check_width(z)?;
        if n_knots < 4 {
            return Err(Error::Pulse(format!("n_knots must be >= 4, got {n_knots}")));
        }
        let x: Vec<f64> = (0..n_knots).map(|m| m as f64 * tau / (n_knots - 1) as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|t| (-(t - tau / 2.0).powi(2) / (4.0 * z * z)).exp())
            .collect();
        let spline = NaturalCubicSpline::new(x, y)?;
        Ok(PulseShape { kind: PulseKind::Spline, omega0, tau, z, n_knots, spline: Some(spline) })
    }

    pub fn from_spec(spec: &PulseSpec) -> Result<PulseShape> {
        let omega0 = hz_to_angular(spec.omega0_hz);
        match spec.kind {
            PulseKind::Square => PulseShape::square(omega0, spec.tau),
            PulseKind::Gaussian => PulseShape::trunc_gaussian(omega0, spec.tau, spec.z),
            PulseKind::Spline => PulseShape::spline_gaussian(omega0, spec.tau, spec.z, spec.n_knots),
        }
    }

    /// Same envelope with a different peak rate.
    pub fn with_omega0(&self, omega0: f64) -> PulseShape {
        PulseShape { omega0, ..self.clone() }
    }

    /// Envelope divided by Ω0.
    pub fn unit_amplitude(&self, t: f64) -> f64 {
        if !(0.0..=self.tau).contains(&t) {
            return 0.0;
        }
        match self.kind {
            PulseKind::Square => 1.0,
            PulseKind::Gaussian => {
                let d = t - self.tau / 2.0;
                (-d * d / (2.0 * self.z * self.z)).exp()
            }
            PulseKind::Spline => {
                let s = self.spline.as_ref().expect("spline pulse carries its spline").eval(t);
                s * s
            }
        }
    }

    /// Ω(t), rad/s.
    pub fn amplitude(&self, t: f64) -> f64 {
        self.omega0 * self.unit_amplitude(t)
    }

    /// Points in [0, τ] where Ω is not smooth; quadrature panels must not straddle them.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.spline {
            Some(s) => s.knots().to_vec(),
            None => vec![0.0, self.tau],
        }
    }

    pub fn spline_knots(&self) -> Option<(&[f64], &[f64])> {
        self.spline.as_ref().map(|s| (s.knots(), s.values()))
    }

    /// `n` uniformly spaced samples (t, Ω(t)) over [0, τ].
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let t = self.tau * i as f64 / (n - 1) as f64;
                (t, self.amplitude(t))
            })
            .collect()
    }
}

/// CSV columns: t_us, omega_over_2pi_hz.
pub fn write_samples_csv<W: Write>(w: W, meta: &Metadata, pulse: &PulseShape, n: usize) -> Result<()> {
    let rows = pulse
        .samples(n)
        .into_iter()
        .map(|(t, om)| vec![fmt_num(t * 1e6), fmt_num(angular_to_hz(om))]);
    write_table(w, meta, &["t_us", "omega_over_2pi_hz"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TAU: f64 = 200e-6;
    const Z: f64 = 25e-6;

    fn all(omega0: f64) -> Vec<PulseShape> {
        vec![
            PulseShape::square(omega0, TAU).unwrap(),
            PulseShape::trunc_gaussian(omega0, TAU, Z).unwrap(),
            PulseShape::spline_gaussian(omega0, TAU, 26.5e-6, 13).unwrap(),
        ]
    }

    #[test]
    fn gaussian_peak_and_edge() {
        let p = PulseShape::trunc_gaussian(3.0, TAU, Z).unwrap();
        assert_eq!(p.amplitude(TAU / 2.0), 3.0);
        assert!((p.amplitude(0.0) - 3.0 * (-8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_outside_window() {
        for p in all(1.0) {
            assert_eq!(p.amplitude(-1e-9), 0.0);
            assert_eq!(p.amplitude(TAU + 1e-9), 0.0);
        }
    }

    #[test]
    fn spline_matches_gaussian_at_knots() {
        let p = PulseShape::spline_gaussian(2.0, TAU, 26.5e-6, 13).unwrap();
        let g = PulseShape::trunc_gaussian(2.0, TAU, 26.5e-6).unwrap();
        let (knots, _) = p.spline_knots().unwrap();
        assert_eq!(knots.len(), 13);
        assert_eq!(knots[0], 0.0);
        assert!((knots[12] - TAU).abs() < 1e-18);
        for &t in knots {
            assert!((p.amplitude(t) - g.amplitude(t)).abs() < 1e-14);
        }
        assert!(p.amplitude(0.0) > 0.0);
    }

    fn max_spline_deviation(n_knots: usize) -> f64 {
        let p = PulseShape::spline_gaussian(1.0, TAU, 26.5e-6, n_knots).unwrap();
        let g = PulseShape::trunc_gaussian(1.0, TAU, 26.5e-6).unwrap();
        (0..=10_000)
            .map(|i| {
                let t = TAU * i as f64 / 10_000.0;
                (p.amplitude(t) - g.amplitude(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn thirteen_knot_spline_is_close_to_gaussian() {
        let d13 = max_spline_deviation(13);
        assert!(d13 <= 0.01, "{d13}");
        let d101 = max_spline_deviation(101);
        assert!(d101 < d13);
        assert!(max_spline_deviation(25) < d13);
        assert!(d101 < max_spline_deviation(25));
    }

    #[test]
    fn invalid_parameters() {
        assert!(PulseShape::square(-1.0, TAU).is_err());
        assert!(PulseShape::trunc_gaussian(1.0, 0.0, Z).is_err());
        assert!(PulseShape::trunc_gaussian(1.0, TAU, 0.0).is_err());
        assert!(PulseShape::spline_gaussian(1.0, TAU, Z, 3).is_err());
    }

    #[test]
    fn breakpoints_include_spline_knots() {
        let p = PulseShape::spline_gaussian(1.0, TAU, Z, 13).unwrap();
        assert_eq!(p.breakpoints().len(), 13);
        assert_eq!(PulseShape::square(1.0, TAU).unwrap().breakpoints(), vec![0.0, TAU]);
    }

    #[test]
    fn csv_samples() {
        let p = PulseShape::trunc_gaussian(hz_to_angular(100e3), TAU, Z).unwrap();
        let mut out = Vec::new();
        write_samples_csv(&mut out, &Metadata::new("pulse"), &p, 5).unwrap();
        let text = String::from_utf8(out).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "t_us,omega_over_2pi_hz");
        assert_eq!(body[3], "100,100000");
    }

    proptest! {
        #[test]
        fn symmetric_about_center(s in 0.0f64..100e-6) {
            for p in all(1.7) {
                let a = p.amplitude(TAU / 2.0 + s);
                let b = p.amplitude(TAU / 2.0 - s);
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn gaussians_ramp_up_to_center(t1 in 0.0f64..100e-6, t2 in 0.0f64..100e-6) {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            for p in all(1.0).into_iter().skip(1) {
                prop_assert!(p.amplitude(lo) <= p.amplitude(hi) + 1e-15);
            }
        }

        #[test]
        fn homogeneous_in_omega0(k in 0.0f64..50.0, t in 0.0f64..200e-6) {
            for (p, q) in all(1.0).into_iter().zip(all(k)) {
                prop_assert!((q.amplitude(t) - k * p.amplitude(t)).abs() <= 1e-12 * (1.0 + k));
                prop_assert!(q.amplitude(t) >= 0.0);
            }
        }
    }
}
