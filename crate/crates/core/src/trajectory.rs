//! Phase-space trajectories and geometric phases of the driven modes.
//!
//! For a mode driven at sideband detuning δ,
//!
//! ```text
//! α(t) = i ∫₀ᵗ Ω(t′) e^{−iδt′} dt′
//! B(t) = −∫₀ᵗ Im(α̇ α*) dt′
//! ```
//!
//! and the gate propagator is `Π_k D(η S_k α_k) e^{−i B_k (η S_k)²}`, so the
//! entangling angle is `θ = Σ_k η1,k η2,k B_k`.
//!
//! Square pulses use closed forms. Shaped pulses use composite Gauss–Legendre
//! panels; α at each node comes from a nested rule on its own panel, which
//! gives B in one pass without a double integral. Every result is checked
//! against a run with twice the panels.

use num_complex::Complex64;

use crate::config::{hz_to_angular, PulseKind};
use crate::modes::GateCoupling;
use crate::pulse::PulseShape;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Sideband detunings closer than this to resonance are rejected, rad/s.
pub fn resonance_guard() -> f64 {
    hz_to_angular(100.0)
}

/// Finite-difference step for dθ/dδ_c, rad/s.
pub fn derivative_step() -> f64 {
    hz_to_angular(10.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub order: usize,
    pub panels: usize,
    pub max_panels: usize,
    pub rel_tol: f64,
    /// Use panels even where a closed form exists.
    pub force_numeric: bool,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { order: 8, panels: 512, max_panels: 1 << 15, rel_tol: 1e-10, force_numeric: false }
    }
}

impl Quadrature {
    pub fn with_tolerance(rel_tol: f64) -> Quadrature {
        Quadrature { rel_tol, ..Quadrature::default() }
    }
}

/// Carrier detuning and symmetric frequency error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningContext {
    /// δ_c, rad/s.
    pub delta_c: f64,
    /// δω, rad/s.
    pub delta_omega: f64,
}

impl DetuningContext {
    pub fn new(delta_c: f64, delta_omega: f64) -> DetuningContext {
        DetuningContext { delta_c, delta_omega }
    }

    /// δ_k′ = δ_c − ν_k + δω for every mode.
    pub fn sideband_detunings(&self, freqs: &[f64]) -> Vec<f64> {
        freqs.iter().map(|nu| self.delta_c - nu + self.delta_omega).collect()
    }

    pub fn check_resonance(&self, freqs: &[f64]) -> Result<Vec<f64>> {
        let d = self.sideband_detunings(freqs);
        for (k, &dk) in d.iter().enumerate() {
            if dk.abs() < resonance_guard() {
                return Err(Error::Resonance { mode: k, detuning_hz: crate::config::angular_to_hz(dk) });
            }
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// α_k(τ), one per mode.
    pub alpha: Vec<Complex64>,
    /// B_k(τ).
    pub b: Vec<f64>,
}

impl Trajectory {
    pub fn zero(n: usize) -> Trajectory {
        Trajectory { alpha: vec![Complex64::new(0.0, 0.0); n], b: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// θ = Σ η1 η2 B.
    pub fn theta(&self, coupling: &GateCoupling) -> f64 {
        coupling.eta_products().iter().zip(&self.b).map(|(p, b)| p * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseResult {
    pub theta: f64,
    pub dtheta_ddelta: f64,
    pub d2theta_ddelta2: Option<f64>,
}

/// Panels of equal width between two breakpoints share node offsets and weights.
#[derive(Clone, Debug)]
struct Segment {
    first: usize,
    count: usize,
    /// 0.5·h·w_j.
    node_w: Vec<f64>,
    node_off: Vec<f64>,
    /// Nested rule on [a, a + off_j], flattened j-major.
    sub_w: Vec<f64>,
    sub_off: Vec<f64>,
}

/// Unit-amplitude envelope tabulated at every node and nested node of one panel grid.
#[derive(Clone, Debug)]
struct PanelGrid {
    order: usize,
    panels: usize,
    starts: Vec<f64>,
    segments: Vec<Segment>,
    node_amp: Vec<f64>,
    sub_amp: Vec<f64>,
    /// ∫|Ω|/Ω0 over the window.
    area: f64,
}

impl PanelGrid {
    fn new(pulse: &PulseShape, order: usize, panels: usize) -> PanelGrid {
        let (x, w) = gauss_legendre(order);
        let bps = pulse.breakpoints();
        let total = pulse.tau;
        let mut g = PanelGrid {
            order,
            panels: 0,
            starts: Vec::new(),
            segments: Vec::new(),
            node_amp: Vec::new(),
            sub_amp: Vec::new(),
            area: 0.0,
        };
        for s in bps.windows(2) {
            let (a, b) = (s[0], s[1]);
            let count = ((panels as f64 * (b - a) / total).round() as usize).max(1);
            let h = (b - a) / count as f64;
            let mut seg = Segment {
                first: g.starts.len(),
                count,
                node_w: Vec::with_capacity(order),
                node_off: Vec::with_capacity(order),
                sub_w: Vec::with_capacity(order * order),
                sub_off: Vec::with_capacity(order * order),
            };
            for j in 0..order {
                let off = 0.5 * h * (x[j] + 1.0);
                seg.node_w.push(0.5 * h * w[j]);
                seg.node_off.push(off);
                for m in 0..order {
                    seg.sub_w.push(0.5 * off * w[m]);
                    seg.sub_off.push(0.5 * off * (x[m] + 1.0));
                }
            }
            for p in 0..count {
                let start = a + p as f64 * h;
                g.starts.push(start);
                for j in 0..order {
                    let amp = pulse.unit_amplitude(start + seg.node_off[j]);
                    g.node_amp.push(amp);
                    g.area += seg.node_w[j] * amp.abs();
                }
                for so in &seg.sub_off {
                    g.sub_amp.push(pulse.unit_amplitude(start + so));
                }
            }
            g.segments.push(seg);
        }
        g.panels = g.starts.len();
        g
    }

    /// (α, B) for unit Ω0.
    fn integrate(&self, delta: f64) -> (Complex64, f64) {
        let order = self.order;
        let i = Complex64::i();
        let mut start = Complex64::new(0.0, 0.0);
        let mut b = 0.0;
        let mut node_phase = vec![Complex64::new(0.0, 0.0); order];
        let mut sub_phase = vec![Complex64::new(0.0, 0.0); order * order];
        for seg in &self.segments {
            for (ph, off) in node_phase.iter_mut().zip(&seg.node_off) {
                *ph = Complex64::cis(-delta * off);
            }
            for (ph, (off, w)) in sub_phase.iter_mut().zip(seg.sub_off.iter().zip(&seg.sub_w)) {
                *ph = w * Complex64::cis(-delta * off);
            }
            for p in seg.first..seg.first + seg.count {
                let e = i * Complex64::cis(-delta * self.starts[p]);
                let amps = &self.node_amp[p * order..(p + 1) * order];
                let subs = &self.sub_amp[p * order * order..(p + 1) * order * order];
                let mut panel = Complex64::new(0.0, 0.0);
                for j in 0..order {
                    let f = e * amps[j] * node_phase[j];
                    panel += seg.node_w[j] * f;
                    let mut inner = Complex64::new(0.0, 0.0);
                    for m in 0..order {
                        inner += subs[j * order + m] * sub_phase[j * order + m];
                    }
                    let alpha_j = start + e * inner;
                    b -= seg.node_w[j] * (f * alpha_j.conj()).im;
                }
                start += panel;
            }
        }
        (start, b)
    }
}

/// Square pulse closed forms for unit Ω0.
pub fn square_closed_form(tau: f64, delta: f64) -> (Complex64, f64) {
    let x = delta * tau;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 24.0 } else { (x / 2.0).sin() / (x / 2.0) };
    let alpha = Complex64::i() * tau * sinc * Complex64::cis(-x / 2.0);
    let b = if x.abs() < 1e-2 {
        let x2 = x * x;
        tau * tau * x / 6.0 * (1.0 - x2 / 20.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 60480.0)
    } else {
        (x - x.sin()) / (delta * delta)
    };
    (alpha, b)
}

/// Reusable evaluator for one pulse envelope: the panel tables are built once
/// and Ω0 enters only as a final scale factor.
#[derive(Clone, Debug)]
pub struct TrajectorySolver {
    pulse: PulseShape,
    quad: Quadrature,
    grids: Option<(PanelGrid, PanelGrid)>,
}

impl TrajectorySolver {
    pub fn new(pulse: &PulseShape, quad: Quadrature) -> TrajectorySolver {
        let numeric = quad.force_numeric || pulse.kind != PulseKind::Square;
        let grids = numeric.then(|| {
            (
                PanelGrid::new(pulse, quad.order, quad.panels),
                PanelGrid::new(pulse, quad.order, 2 * quad.panels),
            )
        });
        TrajectorySolver { pulse: pulse.clone(), quad, grids }
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Solver for the same envelope at a different peak rate, sharing tables.
    pub fn with_omega0(&self, omega0: f64) -> TrajectorySolver {
        TrajectorySolver { pulse: self.pulse.with_omega0(omega0), quad: self.quad, grids: self.grids.clone() }
    }

    /// α(τ) and B(τ) for unit Ω0.
    fn unit(&self, delta: f64) -> Result<(Complex64, f64)> {
        let Some((coarse, fine)) = &self.grids else {
            return Ok(square_closed_form(self.pulse.tau, delta));
        };
        let order = self.quad.order;
        let mut lo = coarse.integrate(delta);
        let mut hi = fine.integrate(delta);
        let mut panels = fine.panels;
        loop {
            let a = fine.area;
            let da = (hi.0 - lo.0).norm();
            let db = (hi.1 - lo.1).abs();
            if da <= self.quad.rel_tol * a && db <= self.quad.rel_tol * a * a {
                return Ok(hi);
            }
            if 2 * panels > self.quad.max_panels {
                return Err(Error::Quadrature { detuning: delta, panels });
            }
            panels *= 2;
            let g = PanelGrid::new(&self.pulse, order, panels);
            lo = hi;
            hi = g.integrate(delta);
        }
    }

    pub fn alpha_and_phase(&self, delta: f64) -> Result<(Complex64, f64)> {
        let (a, b) = self.unit(delta)?;
        let om = self.pulse.omega0;
        Ok((a * om, b * om * om))
    }

    pub fn trajectory(&self, deltas: &[f64]) -> Result<Trajectory> {
        let mut t = Trajectory::zero(deltas.len());
        for (k, &d) in deltas.iter().enumerate() {
            let (a, b) = self.alpha_and_phase(d)?;
            t.alpha[k] = a;
            t.b[k] = b;
        }
        Ok(t)
    }

    /// θ at the given context, with the resonance guard applied.
    pub fn theta(&self, coupling: &GateCoupling, ctx: &DetuningContext) -> Result<f64> {
        let d = ctx.check_resonance(&coupling.freqs)?;
        let prods = coupling.eta_products();
        let mut theta = 0.0;
        for (p, dk) in prods.iter().zip(d) {
            theta += p * self.alpha_and_phase(dk)?.1;
        }
        Ok(theta)
    }

    pub fn phase_and_derivative(
        &self,
        coupling: &GateCoupling,
        ctx: &DetuningContext,
        second: bool,
    ) -> Result<PhaseResult> {
        let h = derivative_step();
        let at = |dc: f64| self.theta(coupling, &DetuningContext::new(dc, ctx.delta_omega));
        let plus = at(ctx.delta_c + h)?;
        let minus = at(ctx.delta_c - h)?;
        let theta = self.theta(coupling, ctx)?;
        Ok(PhaseResult {
            theta,
            dtheta_ddelta: (plus - minus) / (2.0 * h),
            d2theta_ddelta2: second.then(|| (plus - 2.0 * theta + minus) / (h * h)),
        })
    }
}

pub fn alpha(pulse: &PulseShape, delta: f64, quad: Quadrature) -> Result<Complex64> {
    Ok(TrajectorySolver::new(pulse, quad).alpha_and_phase(delta)?.0)
}

pub fn entangling_phase(pulse: &PulseShape, delta: f64, quad: Quadrature) -> Result<f64> {
    Ok(TrajectorySolver::new(pulse, quad).alpha_and_phase(delta)?.1)
}

pub fn phase_and_derivative(
    coupling: &GateCoupling,
    pulse: &PulseShape,
    ctx: &DetuningContext,
    quad: Quadrature,
) -> Result<PhaseResult> {
    TrajectorySolver::new(pulse, quad).phase_and_derivative(coupling, ctx, true)
}

/// α(t) at `n_samples` uniformly spaced times on [0, τ].
pub fn trajectory_path(pulse: &PulseShape, delta: f64, n_samples: usize) -> Vec<Complex64> {
    let n = n_samples.max(2);
    let tau = pulse.tau;
    let mut cuts: Vec<f64> = (0..n).map(|k| tau * k as f64 / (n - 1) as f64).collect();
    cuts.extend(pulse.breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * tau);

    let (x, w) = gauss_legendre(8);
    let min_panels = 1024usize;
    let i = Complex64::i();
    let mut out = Vec::with_capacity(n);
    out.push(Complex64::new(0.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut next = 1;
    for piece in cuts.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let k = ((min_panels as f64 * (b - a) / tau).ceil() as usize).max(1);
        let h = (b - a) / k as f64;
        for p in 0..k {
            let mid = a + (p as f64 + 0.5) * h;
            for (xj, wj) in x.iter().zip(&w) {
                let t = mid + 0.5 * h * xj;
                acc += 0.5 * h * wj * i * pulse.amplitude(t) * Complex64::cis(-delta * t);
            }
        }
        while next < n && (tau * next as f64 / (n - 1) as f64 - b).abs() <= 1e-15 * tau {
            out.push(acc);
            next += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::modes::build_modes;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU as TWO_PI};

    const TAU: f64 = 200e-6;
    const Z: f64 = 25e-6;

    fn numeric() -> Quadrature {
        Quadrature { force_numeric: true, ..Quadrature::default() }
    }

    #[test]
    fn square_quadrature_matches_closed_form() {
        let om = hz_to_angular(50e3);
        let p = PulseShape::square(om, TAU).unwrap();
        for d_hz in [-73e3, -5e3, 1.0, 3.7e3, 40e3, 160e3] {
            let d = hz_to_angular(d_hz);
            let (a, b) = TrajectorySolver::new(&p, numeric()).alpha_and_phase(d).unwrap();
            let ca = om * (Complex64::new(1.0, 0.0) - Complex64::cis(-d * TAU)) / d;
            let cb = om * om * (d * TAU - (d * TAU).sin()) / (d * d);
            let scale = om * TAU;
            assert!((a - ca).norm() < 1e-10 * scale, "{d_hz}");
            assert!((b - cb).abs() < 1e-10 * scale * scale, "{d_hz}");
            let (a2, b2) = square_closed_form(TAU, d);
            assert!((a2 * om - ca).norm() < 1e-12 * scale);
            assert!((b2 * om * om - cb).abs() < 1e-12 * scale * scale);
        }
    }

    #[test]
    fn square_closes_after_whole_loops() {
        let p = PulseShape::square(1e5, TAU).unwrap();
        let d = 3.0 * TWO_PI / TAU;
        let a = alpha(&p, d, Quadrature::default()).unwrap();
        assert!(a.norm() < 1e-12 * 1e5 * TAU);
        let a = alpha(&p, d, numeric()).unwrap();
        assert!(a.norm() < 1e-10 * 1e5 * TAU);
    }

    #[test]
    fn square_small_detuning_series() {
        for x in [1e-9, 1e-5, 5e-3, 2e-2] {
            let d = x / TAU;
            let (_, b) = square_closed_form(TAU, d);
            let exact = (x - x.sin()) / (d * d);
            if x > 1e-3 {
                assert!((b - exact).abs() < 1e-9 * exact.abs());
            }
            assert!((b - TAU * TAU * x / 6.0).abs() <= 0.01 * TAU * TAU * x);
        }
    }

    #[test]
    fn zero_drive_gives_zero() {
        let p = PulseShape::trunc_gaussian(0.0, TAU, Z).unwrap();
        let s = TrajectorySolver::new(&p, Quadrature::default());
        let (a, b) = s.alpha_and_phase(hz_to_angular(20e3)).unwrap();
        assert_eq!(a, Complex64::new(0.0, 0.0));
        assert_eq!(b, 0.0);
        assert_eq!(entangling_phase(&PulseShape::square(0.0, TAU).unwrap(), 3.0, Quadrature::default()).unwrap(), 0.0);
    }

    #[test]
    fn b_matches_double_integral() {
        // independent oracle: B = ∫₀^τ∫₀^{t1} Ω(t1)Ω(t2) sin(δ(t1 − t2)) dt2 dt1 on a plain midpoint grid
        let p = PulseShape::trunc_gaussian(1.0, TAU, Z).unwrap();
        let d = hz_to_angular(30e3);
        let n = 4000;
        let h = TAU / n as f64;
        let t: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * h).collect();
        let om: Vec<f64> = t.iter().map(|&x| p.amplitude(x)).collect();
        let mut b = 0.0;
        for i in 0..n {
            for j in 0..i {
                b += om[i] * om[j] * (d * (t[i] - t[j])).sin();
            }
        }
        b *= h * h;
        let ours = entangling_phase(&p, d, Quadrature::default()).unwrap();
        assert!((ours - b).abs() < 1e-4 * (Z * Z * 2.0 * PI), "{ours} vs {b}");
    }

    #[test]
    fn gaussian_fourier_approximation() {
        let om = 1.0;
        let p = PulseShape::trunc_gaussian(om, TAU, Z).unwrap();
        let s = TrajectorySolver::new(&p, Quadrature::default());
        for k in 0..=40 {
            let d = (-2.0 + 4.0 * k as f64 / 40.0) / Z;
            let a = s.alpha_and_phase(d).unwrap().0;
            let approx = 2.0 * PI * om * om * Z * Z * (-d * d * Z * Z).exp();
            assert!((a.norm_sqr() - approx).abs() <= 0.1 * approx, "δz = {}", d * Z);
        }
    }

    #[test]
    fn path_endpoints() {
        for p in [
            PulseShape::square(1e5, TAU).unwrap(),
            PulseShape::trunc_gaussian(1e5, TAU, Z).unwrap(),
            PulseShape::spline_gaussian(1e5, TAU, Z, 13).unwrap(),
        ] {
            let d = hz_to_angular(12.5e3);
            let path = trajectory_path(&p, d, 101);
            assert_eq!(path.len(), 101);
            assert_eq!(path[0], Complex64::new(0.0, 0.0));
            let end = alpha(&p, d, Quadrature::default()).unwrap();
            assert!((path[100] - end).norm() <= 1e-9 * end.norm().max(1e5 * Z), "{:?}", p.kind);
        }
    }

    #[test]
    fn square_path_is_a_closed_circle() {
        let om = 1e5;
        let p = PulseShape::square(om, TAU).unwrap();
        let d = TWO_PI / TAU;
        let path = trajectory_path(&p, d, 65);
        let center = Complex64::new(om / d, 0.0);
        for a in &path {
            assert!(((a - center).norm() - om / d).abs() < 1e-9 * om / d);
        }
        assert!(path[64].norm() < 1e-9 * om / d);
    }

    #[test]
    fn panel_doubling_is_stable() {
        let p = PulseShape::spline_gaussian(1.0, TAU, 26.5e-6, 13).unwrap();
        for d_hz in [-60e3, 8e3, 95e3] {
            let d = hz_to_angular(d_hz);
            let q1 = Quadrature::default();
            let q2 = Quadrature { panels: 1024, ..q1 };
            let (a1, b1) = TrajectorySolver::new(&p, q1).alpha_and_phase(d).unwrap();
            let (a2, b2) = TrajectorySolver::new(&p, q2).alpha_and_phase(d).unwrap();
            let area = 26.5e-6 * (2.0 * PI).sqrt();
            assert!((a1 - a2).norm() <= 1e-10 * area);
            assert!((b1 - b2).abs() <= 1e-10 * area * area);
        }
    }

    #[test]
    fn phase_derivative_and_resonance() {
        let cfg = SystemConfig::three_ion_reference();
        let set = build_modes(&cfg).unwrap();
        let g = set.coupling(&cfg.geometry, (0, 2), false).unwrap();
        let p = PulseShape::trunc_gaussian(hz_to_angular(200e3), TAU, Z).unwrap();
        let nu0 = set.radial_b.freqs[0];
        let ctx = DetuningContext::new(nu0 + hz_to_angular(30e3), 0.0);
        let r = phase_and_derivative(&g, &p, &ctx, Quadrature::default()).unwrap();
        let r2 = phase_and_derivative(&g, &p.with_omega0(2.0 * p.omega0), &ctx, Quadrature::default()).unwrap();
        assert!((r2.theta - 4.0 * r.theta).abs() < 1e-12 * r.theta.abs());
        let flipped = g.clone().with_even_flip(true);
        let r3 = phase_and_derivative(&flipped, &p, &ctx, Quadrature::default()).unwrap();
        assert_eq!(r3.theta, -r.theta);
        assert_eq!(r3.dtheta_ddelta.abs(), r.dtheta_ddelta.abs());

        let at_mode = DetuningContext::new(nu0 + hz_to_angular(50.0), 0.0);
        assert!(matches!(phase_and_derivative(&g, &p, &at_mode, Quadrature::default()), Err(Error::Resonance { .. })));
    }

    #[test]
    fn sideband_detunings_follow_frequency_shift() {
        let ctx = DetuningContext::new(10.0, 2.0);
        assert_eq!(ctx.sideband_detunings(&[7.0, 11.0]), vec![5.0, 1.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn b_is_odd_and_alpha_magnitude_even(d_khz in -150.0f64..150.0) {
            let d = hz_to_angular(d_khz * 1e3);
            for p in [
                PulseShape::trunc_gaussian(1.0, TAU, Z).unwrap(),
                PulseShape::spline_gaussian(1.0, TAU, Z, 13).unwrap(),
            ] {
                let s = TrajectorySolver::new(&p, Quadrature::default());
                let (a1, b1) = s.alpha_and_phase(d).unwrap();
                let (a2, b2) = s.alpha_and_phase(-d).unwrap();
                prop_assert!((b1 + b2).abs() <= 1e-10 * Z * Z);
                prop_assert!((a1.norm() - a2.norm()).abs() <= 1e-10 * Z);
            }
        }

        #[test]
        fn scaling_in_omega0(k in 0.01f64..20.0, d_khz in 1.0f64..100.0) {
            let d = hz_to_angular(d_khz * 1e3);
            let p = PulseShape::trunc_gaussian(1e5, TAU, Z).unwrap();
            let (a1, b1) = TrajectorySolver::new(&p, Quadrature::default()).alpha_and_phase(d).unwrap();
            let (a2, b2) = TrajectorySolver::new(&p.with_omega0(k * 1e5), Quadrature::default()).alpha_and_phase(d).unwrap();
            prop_assert!((a2 - a1 * k).norm() <= 1e-12 * k * a1.norm().max(1e5 * Z));
            prop_assert!((b2 - b1 * k * k).abs() <= 1e-12 * k * k * b1.abs().max(1e10 * Z * Z));
        }
    }
}
