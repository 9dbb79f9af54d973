//! Gate error metrics from closed-form trajectories.
//!
//! Each mode's spin operator `S_k = (η1,k σ_y1 + η2,k σ_y2)/2` is diagonal in
//! the joint σ_y eigenbasis `|s1 s2⟩`, with `|y±⟩ = (|0⟩ ± i|1⟩)/√2` and
//! eigenvalue `λ_{s,k} = (η1,k s1 + η2,k s2)/2`. Starting from `|00⟩` with every
//! mode in its ground state, the final state is
//! `Σ_s c_s |s⟩ ⊗ Π_k e^{−iB_k λ²} |λ_{s,k} α_k⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::linalg::hermitian_eigenvalues;
use crate::modes::GateCoupling;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

pub type Matrix4c = [[Complex64; 4]; 4];

/// Sign pairs in the order ++, +−, −+, −−.
pub const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Rejects density matrices whose smallest eigenvalue is below this.
pub const PSD_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|s1 s2⟩` in the computational basis `|q1 q2⟩`, index `2 q1 + q2`.
pub fn eigenvector(s: (f64, f64)) -> [Complex64; 4] {
    let (s1, s2) = s;
    [c(0.5, 0.0), c(0.0, 0.5 * s2), c(0.0, 0.5 * s1), c(-0.5 * s1 * s2, 0.0)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinEigensystem {
    /// λ[k][s].
    pub lambda: Vec<[f64; 4]>,
    /// c_s = ⟨s|00⟩.
    pub c: [Complex64; 4],
    /// d_s = ⟨Φ|s⟩ for Φ = (|00⟩ + i|11⟩)/√2.
    pub d: [Complex64; 4],
}

impl SpinEigensystem {
    pub fn new(coupling: &GateCoupling) -> SpinEigensystem {
        let lambda = coupling
            .eta1
            .iter()
            .zip(&coupling.eta2)
            .map(|(e1, e2)| SIGNS.map(|(s1, s2)| 0.5 * (e1 * s1 + e2 * s2)))
            .collect();
        let phi = [c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, FRAC_1_SQRT_2)];
        let mut cs = [c(0.0, 0.0); 4];
        let mut ds = [c(0.0, 0.0); 4];
        for (i, &s) in SIGNS.iter().enumerate() {
            let v = eigenvector(s);
            cs[i] = v[0].conj();
            ds[i] = (0..4).map(|q| phi[q].conj() * v[q]).sum();
        }
        SpinEigensystem { lambda, c: cs, d: ds }
    }

    pub fn modes(&self) -> usize {
        self.lambda.len()
    }

    /// Σ_k B_k λ_{s,k}² for each s.
    fn phases(&self, traj: &Trajectory) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (lam, b) in self.lambda.iter().zip(&traj.b) {
            for s in 0..4 {
                out[s] += b * lam[s] * lam[s];
            }
        }
        out
    }
}

/// ε_{d,k} = 1 − |¼ Σ_λ e^{−|λα_k|²/2}|² per mode, and their sum.
pub fn displacement_error(eig: &SpinEigensystem, traj: &Trajectory) -> (Vec<f64>, f64) {
    let per: Vec<f64> = eig
        .lambda
        .iter()
        .zip(&traj.alpha)
        .map(|(lam, a)| {
            let a2 = a.norm_sqr();
            // summed in sorted order so that sign flips of η2 change nothing
            let mut terms = lam.map(|l| (-0.5 * l * l * a2).exp());
            terms.sort_by(f64::total_cmp);
            let mean = terms.iter().sum::<f64>() / 4.0;
            // 1 − m² without cancellation for tiny displacements
            (1.0 - mean) * (1.0 + mean)
        })
        .collect();
    let total = per.iter().sum();
    (per, total)
}

/// ε_r = (θ − π/2)²/4.
pub fn rotation_error(theta: f64) -> f64 {
    let d = theta - FRAC_PI_2;
    d * d / 4.0
}

/// |⟨Φ|Ψ(τ)⟩|² with the motion projected onto its ground state.
pub fn exact_fidelity(eig: &SpinEigensystem, traj: &Trajectory) -> f64 {
    let phases = eig.phases(traj);
    let mut amp = c(0.0, 0.0);
    for s in 0..4 {
        let damp: f64 = eig
            .lambda
            .iter()
            .zip(&traj.alpha)
            .map(|(lam, a)| -0.5 * lam[s] * lam[s] * a.norm_sqr())
            .sum();
        amp += eig.d[s] * eig.c[s] * Complex64::cis(-phases[s]) * damp.exp();
    }
    amp.norm_sqr().clamp(0.0, 1.0)
}

/// Two-qubit state after tracing out the motion, computational basis.
pub fn reduced_density_matrix(eig: &SpinEigensystem, traj: &Trajectory) -> Result<Matrix4c> {
    let phases = eig.phases(traj);
    let mut rho_eig = [[c(0.0, 0.0); 4]; 4];
    for s in 0..4 {
        for t in 0..4 {
            let overlap: f64 = eig
                .lambda
                .iter()
                .zip(&traj.alpha)
                .map(|(lam, a)| {
                    let dl = lam[s] - lam[t];
                    -0.5 * a.norm_sqr() * dl * dl
                })
                .sum();
            rho_eig[s][t] = eig.c[s] * eig.c[t].conj() * Complex64::cis(-(phases[s] - phases[t])) * overlap.exp();
        }
    }
    let vecs = SIGNS.map(eigenvector);
    let mut rho = [[c(0.0, 0.0); 4]; 4];
    for (i, row) in rho.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            let mut acc = c(0.0, 0.0);
            for s in 0..4 {
                for t in 0..4 {
                    acc += vecs[s][i] * rho_eig[s][t] * vecs[t][j].conj();
                }
            }
            *out = acc;
        }
    }
    check_density_matrix(&rho)?;
    Ok(rho)
}

pub fn trace(m: &Matrix4c) -> Complex64 {
    (0..4).map(|i| m[i][i]).sum()
}

/// Smallest eigenvalue of a Hermitian 4×4 matrix.
pub fn min_eigenvalue(m: &Matrix4c) -> Result<f64> {
    let rows: Vec<Vec<Complex64>> = m.iter().map(|r| r.to_vec()).collect();
    Ok(hermitian_eigenvalues(&rows)?[0])
}

pub fn check_density_matrix(rho: &Matrix4c) -> Result<()> {
    let lo = min_eigenvalue(rho)?;
    if lo < -PSD_TOL {
        return Err(Error::NotPositive(lo));
    }
    Ok(())
}

/// ⟨Φ|ρ|Φ⟩.
pub fn bell_overlap(rho: &Matrix4c) -> f64 {
    let phi = [c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, FRAC_1_SQRT_2)];
    let mut acc = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += phi[i].conj() * rho[i][j] * phi[j];
        }
    }
    acc.re
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBreakdown {
    pub theta: f64,
    pub eps_d_per_mode: Vec<f64>,
    pub eps_d: f64,
    pub eps_r: f64,
    pub eps_s: f64,
    pub fidelity: f64,
    pub rho: Matrix4c,
}

impl ErrorBreakdown {
    pub fn new(coupling: &GateCoupling, traj: &Trajectory) -> Result<ErrorBreakdown> {
        let eig = SpinEigensystem::new(coupling);
        let theta = traj.theta(coupling);
        let (eps_d_per_mode, eps_d) = displacement_error(&eig, traj);
        let eps_r = rotation_error(theta);
        Ok(ErrorBreakdown {
            theta,
            eps_d_per_mode,
            eps_d,
            eps_r,
            eps_s: eps_d + eps_r,
            fidelity: exact_fidelity(&eig, traj),
            rho: reduced_density_matrix(&eig, traj)?,
        })
    }

    /// P(00), P(01), P(10), P(11).
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.rho[i][i].re)
    }
}

fn pauli_rotation(phi: f64) -> [[Complex64; 2]; 2] {
    // exp(−i(π/4)(cos φ σx + sin φ σy))
    let (cs, sn) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
    let off = c(0.0, -sn) * Complex64::cis(-phi);
    let off_t = c(0.0, -sn) * Complex64::cis(phi);
    [[c(cs, 0.0), off], [off_t, c(cs, 0.0)]]
}

/// ⟨σz⊗σz⟩ after the analysis rotation R(φ) on both qubits.
pub fn parity(rho: &Matrix4c, phi: f64) -> f64 {
    let r = pauli_rotation(phi);
    let mut u = [[c(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            u[i][j] = r[i >> 1][j >> 1] * r[i & 1][j & 1];
        }
    }
    let mut p = 0.0;
    for (i, sign) in [1.0, -1.0, -1.0, 1.0].iter().enumerate() {
        let mut acc = c(0.0, 0.0);
        for a in 0..4 {
            for b in 0..4 {
                acc += u[i][a] * rho[a][b] * u[i][b].conj();
            }
        }
        p += sign * acc.re;
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityScan {
    pub phi: Vec<f64>,
    pub parity: Vec<f64>,
    /// A_π from the fit A sin(2φ + φ0) + C.
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// All parities equal: no oscillation to fit.
    pub degenerate: bool,
}

pub fn parity_scan(rho: &Matrix4c, phi: &[f64]) -> Result<ParityScan> {
    if phi.len() < 8 {
        return Err(Error::Schema(format!("parity scan needs at least 8 phases, got {}", phi.len())));
    }
    let parity: Vec<f64> = phi.iter().map(|&p| parity(rho, p)).collect();
    let (lo, hi) = parity.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| (l.min(p), h.max(p)));
    if hi - lo <= 1e-14 {
        return Ok(ParityScan { phi: phi.to_vec(), parity, amplitude: 0.0, phase: 0.0, offset: lo, degenerate: true });
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&p, &y) in phi.iter().zip(&parity) {
        let row = Vector3::new((2.0 * p).sin(), (2.0 * p).cos(), 1.0);
        ata += row * row.transpose();
        atb += row * y;
    }
    let coef = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Schema("parity phases do not determine a sin(2φ) fit".into()))?;
    let (a, b, off) = (coef[0], coef[1], coef[2]);
    Ok(ParityScan {
        phi: phi.to_vec(),
        parity,
        amplitude: a.hypot(b),
        phase: b.atan2(a),
        offset: off,
        degenerate: false,
    })
}

/// (P(00) + P(11))/2 + A_π/2.
pub fn fidelity_estimate(rho: &Matrix4c, amplitude: f64) -> f64 {
    0.5 * (rho[0][0].re + rho[3][3].re) + 0.5 * amplitude
}

/// `n` phases evenly covering [0, 2π).
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect()
}
