//! Balanced gate design: solve dθ/dδ_c = 0 between two target modes, calibrate
//! Ω0 so that θ = π/2, and evaluate robustness against a common motional
//! frequency error δω.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{angular_to_hz, hz_to_angular, PulseKind, SystemConfig};
use crate::metrics::{displacement_error, rotation_error, ErrorBreakdown, SpinEigensystem};
use crate::modes::{build_modes, Direction, GateCoupling, ModeSet};
use crate::pulse::PulseShape;
use crate::roots::{brent, golden_section};
use crate::trajectory::{DetuningContext, Quadrature, TrajectorySolver};
use crate::{Error, Result};

const BRENT_MAX_ITER: usize = 100;

/// (ν_k1 + ν_k2)/2.
pub fn midpoint_guess(nu1: f64, nu2: f64) -> f64 {
    0.5 * (nu1 + nu2)
}

/// Distance kept from each target mode while bracketing the balance root, rad/s.
pub fn bracket_margin(pulse: &PulseShape) -> f64 {
    let floor = hz_to_angular(2e3);
    match pulse.kind {
        PulseKind::Square => floor,
        _ => (2.0 / pulse.z).max(floor),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceSolution {
    pub delta_c: f64,
    pub bracket: (f64, f64),
    /// dθ/dδ_c at the root, for the trial Ω0.
    pub dtheta_ddelta: f64,
}

/// Brent root of dθ/dδ_c strictly between modes `k1 < k2` (indices into the
/// coupling's mode list).
pub fn solve_balance(
    coupling: &GateCoupling,
    solver: &TrajectorySolver,
    k1: usize,
    k2: usize,
    root_tol: f64,
) -> Result<BalanceSolution> {
    let (nu1, nu2) = (coupling.freqs[k1], coupling.freqs[k2]);
    if !(nu2 > nu1) {
        return Err(Error::Bracket(format!("target modes must be ascending, got {nu1} and {nu2} rad/s")));
    }
    let m = bracket_margin(solver.pulse());
    let (lo, hi) = (nu1 + m, nu2 - m);
    if !(hi > lo) {
        return Err(Error::Bracket(format!(
            "modes {:.1} Hz apart leave no room for a {:.1} Hz margin",
            angular_to_hz(nu2 - nu1),
            angular_to_hz(m)
        )));
    }
    let dtheta = |dc: f64| -> Result<f64> {
        Ok(solver.phase_and_derivative(coupling, &DetuningContext::new(dc, 0.0), false)?.dtheta_ddelta)
    };
    let delta_c = brent(dtheta, lo, hi, root_tol, BRENT_MAX_ITER)?;
    Ok(BalanceSolution { delta_c, bracket: (lo, hi), dtheta_ddelta: dtheta(delta_c)? })
}

/// Rescales Ω0 so θ = π/2 at `delta_c`, toggling even_flip if θ came out negative.
pub fn calibrate_omega0(
    coupling: &GateCoupling,
    solver: &TrajectorySolver,
    delta_c: f64,
) -> Result<(GateCoupling, TrajectorySolver, f64)> {
    let ctx = DetuningContext::new(delta_c, 0.0);
    let trial = solver.theta(coupling, &ctx)?;
    if trial == 0.0 || !trial.is_finite() {
        return Err(Error::ZeroPhase);
    }
    let omega0 = solver.pulse().omega0 * (FRAC_PI_2 / trial.abs()).sqrt();
    let mut coupling = coupling.clone();
    if trial < 0.0 {
        coupling.set_even_flip(!coupling.even_flip);
    }
    let solver = solver.with_omega0(omega0);
    let theta = solver.theta(&coupling, &ctx)?;
    Ok((coupling, solver, theta))
}

#[derive(Clone, Debug)]
pub struct GateDesign {
    pub config: SystemConfig,
    pub modes: ModeSet,
    pub coupling: GateCoupling,
    pub solver: TrajectorySolver,
    /// δ_c, rad/s.
    pub delta_c: f64,
    pub theta: f64,
    pub target_direction: Direction,
    pub target_modes: (usize, usize),
    /// Indices of the two target modes in the coupling's list.
    pub target_indices: (usize, usize),
    /// False for fixed-detuning reference gates.
    pub balanced: bool,
    pub bracket: Option<(f64, f64)>,
    /// dθ/dδ_c at the design point, calibrated Ω0.
    pub dtheta_ddelta: f64,
    pub breakdown: ErrorBreakdown,
}

impl GateDesign {
    pub fn pulse(&self) -> &PulseShape {
        self.solver.pulse()
    }

    /// Frequencies of the two target modes, rad/s.
    pub fn target_freqs(&self) -> (f64, f64) {
        (self.coupling.freqs[self.target_indices.0], self.coupling.freqs[self.target_indices.1])
    }

    /// δ_c − ν_k1, rad/s.
    pub fn delta0(&self) -> f64 {
        self.delta_c - self.target_freqs().0
    }

    pub fn record(&self) -> DesignRecord {
        let (nu1, nu2) = self.target_freqs();
        let p = self.pulse();
        DesignRecord {
            n_ions: self.config.n_ions,
            pair: [self.coupling.pair.0, self.coupling.pair.1],
            target_direction: self.target_direction.name().into(),
            target_modes: [self.target_modes.0, self.target_modes.1],
            target_freqs_hz: [angular_to_hz(nu1), angular_to_hz(nu2)],
            balanced: self.balanced,
            delta_c_hz: angular_to_hz(self.delta_c),
            delta0_hz: angular_to_hz(self.delta0()),
            omega0_hz: angular_to_hz(p.omega0),
            theta: self.theta,
            even_flip: self.coupling.even_flip,
            pulse: PulseRecord {
                kind: p.kind.name().into(),
                tau_s: p.tau,
                z_s: p.z,
                n_knots: p.n_knots,
            },
            diagnostics: Diagnostics {
                axial_freq_hz: angular_to_hz(self.modes.chain.axial_angular_freq),
                center_spacing_m: self.modes.chain.center_spacing(),
                splitting_10_hz: angular_to_hz(nu2 - nu1),
                dtheta_ddelta_c: self.dtheta_ddelta,
                bracket_hz: self.bracket.map(|(a, b)| [angular_to_hz(a), angular_to_hz(b)]),
                max_abs_eta: self.coupling.max_abs_eta(),
                eps_d: self.breakdown.eps_d,
                eps_r: self.breakdown.eps_r,
                eps_s: self.breakdown.eps_s,
                fidelity: self.breakdown.fidelity,
            },
        }
    }

    /// ε_s without the density matrix, for dense sweeps.
    fn eps_s_at(&self, delta_omega: f64, eig: &SpinEigensystem) -> Result<f64> {
        let ctx = DetuningContext::new(self.delta_c, delta_omega);
        let d = ctx.check_resonance(&self.coupling.freqs)?;
        let traj = self.solver.trajectory(&d)?;
        let (_, ed) = displacement_error(eig, &traj);
        Ok(ed + rotation_error(traj.theta(&self.coupling)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PulseRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub tau_s: f64,
    pub z_s: f64,
    pub n_knots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub axial_freq_hz: f64,
    pub center_spacing_m: f64,
    pub splitting_10_hz: f64,
    pub dtheta_ddelta_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_hz: Option<[f64; 2]>,
    pub max_abs_eta: f64,
    pub eps_d: f64,
    pub eps_r: f64,
    pub eps_s: f64,
    pub fidelity: f64,
}

/// Serializable summary of a design.
#[derive(Clone, Debug, Serialize)]
pub struct DesignRecord {
    pub n_ions: usize,
    pub pair: [usize; 2],
    pub target_direction: String,
    pub target_modes: [usize; 2],
    pub target_freqs_hz: [f64; 2],
    pub balanced: bool,
    pub delta_c_hz: f64,
    pub delta0_hz: f64,
    pub omega0_hz: f64,
    pub theta: f64,
    pub even_flip: bool,
    pub pulse: PulseRecord,
    pub diagnostics: Diagnostics,
}

impl DesignRecord {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("design record serializes")
    }
}

/// Chain → modes → coupling → balance (or fixed detuning) → Ω0 calibration.
pub fn design_gate(config: &SystemConfig) -> Result<GateDesign> {
    config.validate()?;
    let modes = build_modes(config)?;
    design_with_modes(config, modes)
}

pub fn design_with_modes(config: &SystemConfig, modes: ModeSet) -> Result<GateDesign> {
    let coupling = modes.coupling(&config.geometry, config.target_pair, config.n_ions % 2 == 0)?;
    let (k1, k2) = config.target_modes;
    let i1 = coupling
        .mode_index(config.target_direction, k1)
        .ok_or_else(|| Error::Schema(format!("target mode {k1} out of range")))?;
    let i2 = coupling
        .mode_index(config.target_direction, k2)
        .ok_or_else(|| Error::Schema(format!("target mode {k2} out of range")))?;

    let quad = Quadrature::with_tolerance(config.tol.quad_rel);
    let pulse = PulseShape::from_spec(&config.pulse)?;
    let trial = TrajectorySolver::new(&pulse, quad);

    let (delta_c, bracket, balanced) = match config.delta0_hz {
        Some(d0) => (coupling.freqs[i1] + hz_to_angular(d0), None, false),
        None => {
            let sol = solve_balance(&coupling, &trial, i1, i2, hz_to_angular(config.tol.root_hz))?;
            (sol.delta_c, Some(sol.bracket), true)
        }
    };

    let (coupling, solver, theta) = calibrate_omega0(&coupling, &trial, delta_c)?;
    let ctx = DetuningContext::new(delta_c, 0.0);
    let phase = solver.phase_and_derivative(&coupling, &ctx, false)?;
    let traj = solver.trajectory(&ctx.check_resonance(&coupling.freqs)?)?;
    let breakdown = ErrorBreakdown::new(&coupling, &traj)?;
    Ok(GateDesign {
        config: config.clone(),
        modes,
        coupling,
        solver,
        delta_c,
        theta,
        target_direction: config.target_direction,
        target_modes: config.target_modes,
        target_indices: (i1, i2),
        balanced,
        bracket,
        dtheta_ddelta: phase.dtheta_ddelta,
        breakdown,
    })
}

/// Full error breakdown with every mode shifted by δω (rad/s).
pub fn evaluate_with_error(design: &GateDesign, delta_omega: f64) -> Result<ErrorBreakdown> {
    let ctx = DetuningContext::new(design.delta_c, delta_omega);
    let d = ctx.check_resonance(&design.coupling.freqs)?;
    let traj = design.solver.trajectory(&d)?;
    ErrorBreakdown::new(&design.coupling, &traj)
}

/// ε_s alone at each δω, in input order.
pub fn eps_s_curve(design: &GateDesign, delta_omegas: &[f64]) -> Result<Vec<f64>> {
    let eig = SpinEigensystem::new(&design.coupling);
    delta_omegas.par_iter().map(|&dw| design.eps_s_at(dw, &eig)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensitivity {
    /// δω minimizing ε_s, rad/s.
    pub delta_omega_star: f64,
    pub eps_s_min: f64,
    /// max ε_s over δω* ± half_range.
    pub eps_s_max: f64,
}

/// Search window for δω*, rad/s.
pub fn sensitivity_search_range() -> f64 {
    hz_to_angular(10e3)
}

fn grid(center: f64, half: f64, step: f64) -> Vec<f64> {
    let n = (half / step).round() as i64;
    (-n..=n).map(|i| center + i as f64 * step).collect()
}

/// Worst ε_s within ±half_range of the best frequency offset.
pub fn sensitivity(design: &GateDesign, half_range: f64) -> Result<Sensitivity> {
    let step = hz_to_angular(50.0);
    let eig = SpinEigensystem::new(&design.coupling);
    let coarse = grid(0.0, sensitivity_search_range(), step);
    let values = eps_s_curve(design, &coarse)?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let (x, fx) = golden_section(
        |dw| design.eps_s_at(dw, &eig),
        coarse[best] - step,
        coarse[best] + step,
        hz_to_angular(1.0),
    )?;
    let (star, eps_min) = if fx <= values[best] { (x, fx) } else { (coarse[best], values[best]) };
    let window = grid(star, half_range, step);
    let eps_max = eps_s_curve(design, &window)?.into_iter().fold(eps_min, f64::max);
    Ok(Sensitivity { delta_omega_star: star, eps_s_min: eps_min, eps_s_max: eps_max })
}
