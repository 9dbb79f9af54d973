//! Brute-force check of the closed-form propagator: integrate the
//! Schrödinger equation for two spins and up to three truncated oscillators,
//!
//! ```text
//! H(t) = −Ω(t) Σ_k S_k (a_k e^{iδ_k t} + a_k† e^{−iδ_k t}),   S_k = (η1,k σ_y1 + η2,k σ_y2)/2
//! ```
//!
//! with fixed-step RK4, and compare with `Σ_s c_s |s⟩ ⊗ Π_k e^{−iB_k λ²}|λ α_k⟩`.

use num_complex::Complex64;

use crate::design::GateDesign;
use crate::metrics::{eigenvector, SpinEigensystem, SIGNS};
use crate::modes::GateCoupling;
use crate::pulse::PulseShape;
use crate::trajectory::{DetuningContext, Trajectory};
use crate::{Error, Result};

pub const MAX_MODES: usize = 3;
pub const MIN_CUTOFF: usize = 5;
pub const MIN_STEPS: usize = 200_000;
/// Population allowed in the two highest Fock levels of any mode.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    /// Indices into the coupling's mode list.
    pub modes: Vec<usize>,
    /// Highest Fock level kept per mode.
    pub n_max: usize,
    pub steps: usize,
}

impl OracleSpec {
    pub fn new(modes: Vec<usize>) -> OracleSpec {
        OracleSpec { modes, n_max: 15, steps: MIN_STEPS }
    }

    fn validate(&self, coupling: &GateCoupling) -> Result<()> {
        if self.modes.is_empty() || self.modes.len() > MAX_MODES {
            return Err(Error::Oracle(format!("need 1 to {MAX_MODES} modes, got {}", self.modes.len())));
        }
        if let Some(&k) = self.modes.iter().find(|&&k| k >= coupling.len()) {
            return Err(Error::Oracle(format!("mode index {k} out of range")));
        }
        if self.n_max < MIN_CUTOFF {
            return Err(Error::Oracle(format!("n_max must be >= {MIN_CUTOFF}, got {}", self.n_max)));
        }
        if self.steps < MIN_STEPS {
            return Err(Error::Oracle(format!("need at least {MIN_STEPS} steps, got {}", self.steps)));
        }
        Ok(())
    }
}

/// Spin ⊗ Fock state, spin index major: `psi[spin * fock_dim + f]`.
#[derive(Clone, Debug)]
struct Space {
    modes: usize,
    levels: usize,
    fock_dim: usize,
}

impl Space {
    fn new(modes: usize, n_max: usize) -> Space {
        let levels = n_max + 1;
        Space { modes, levels, fock_dim: levels.pow(modes as u32) }
    }

    fn dim(&self) -> usize {
        4 * self.fock_dim
    }

    fn stride(&self, k: usize) -> usize {
        self.levels.pow((self.modes - 1 - k) as u32)
    }

    fn occupation(&self, f: usize, k: usize) -> usize {
        (f / self.stride(k)) % self.levels
    }
}

fn sigma_y_pair(eta1: f64, eta2: f64) -> [[Complex64; 4]; 4] {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let sy = [[z, -i], [i, z]];
    let id = [[Complex64::new(1.0, 0.0), z], [z, Complex64::new(1.0, 0.0)]];
    let mut s = [[z; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let (a1, a2, b1, b2) = (a >> 1, a & 1, b >> 1, b & 1);
            s[a][b] = 0.5 * (eta1 * sy[a1][b1] * id[a2][b2] + eta2 * id[a1][b1] * sy[a2][b2]);
        }
    }
    s
}

struct Model<'a> {
    space: Space,
    spin_ops: Vec<[[Complex64; 4]; 4]>,
    deltas: Vec<f64>,
    pulse: &'a PulseShape,
    sqrt_n: Vec<f64>,
    /// occ[k][f]: occupation of mode k in Fock index f.
    occ: Vec<Vec<usize>>,
    strides: Vec<usize>,
}

impl Model<'_> {
    /// out = −i H(t) ψ.
    fn rhs(&self, t: f64, psi: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        let omega = self.pulse.amplitude(t);
        if omega == 0.0 {
            return;
        }
        let fd = self.space.fock_dim;
        for (k, s_op) in self.spin_ops.iter().enumerate() {
            let stride = self.strides[k];
            let occ = &self.occ[k];
            let top = self.space.levels - 1;
            let up = Complex64::cis(-self.deltas[k] * t);
            let down = up.conj();
            // scratch = (a e^{iδt} + a† e^{−iδt}) ψ
            for spin in 0..4 {
                let src = &psi[spin * fd..(spin + 1) * fd];
                let dst = &mut scratch[spin * fd..(spin + 1) * fd];
                for f in 0..fd {
                    let n = occ[f];
                    let mut acc = Complex64::new(0.0, 0.0);
                    if n < top {
                        acc += down * self.sqrt_n[n + 1] * src[f + stride];
                    }
                    if n > 0 {
                        acc += up * self.sqrt_n[n] * src[f - stride];
                    }
                    dst[f] = acc;
                }
            }
            // −i·(−Ω)·S_k
            let pre = Complex64::new(0.0, omega);
            for a in 0..4 {
                for b in 0..4 {
                    let m = s_op[a][b];
                    if m == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let m = pre * m;
                    let src = &scratch[b * fd..(b + 1) * fd];
                    for (o, x) in out[a * fd..(a + 1) * fd].iter_mut().zip(src) {
                        *o += m * x;
                    }
                }
            }
        }
    }
}

fn rk4(model: &Model, tau: f64, steps: usize, psi: &mut [Complex64]) {
    let n = psi.len();
    let dt = tau / steps as f64;
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let mut scratch = k1.clone();
    for step in 0..steps {
        let t = step as f64 * dt;
        model.rhs(t, psi, &mut k1, &mut scratch);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dt * k1[i];
        }
        model.rhs(t + 0.5 * dt, &tmp, &mut k2, &mut scratch);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dt * k2[i];
        }
        model.rhs(t + 0.5 * dt, &tmp, &mut k3, &mut scratch);
        for i in 0..n {
            tmp[i] = psi[i] + dt * k3[i];
        }
        model.rhs(t + dt, &tmp, &mut k4, &mut scratch);
        for i in 0..n {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Truncated coherent-state amplitudes ⟨n|β⟩.
fn coherent(beta: Complex64, levels: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(levels);
    let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..levels {
        out.push(c);
        c *= beta / ((n + 1) as f64).sqrt();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    /// |⟨Ψ_analytic|Ψ_numeric⟩|².
    pub overlap: f64,
    pub norm: f64,
    pub leakage: f64,
    pub alpha_analytic: Vec<Complex64>,
    pub alpha_numeric: Vec<Complex64>,
    pub b_analytic: Vec<f64>,
    /// Per-mode B from spin-resolved vacuum phases, when they determine it.
    pub b_numeric: Option<Vec<f64>>,
    pub theta_analytic: f64,
    /// From arg⟨+−,0|Ψ⟩ − arg⟨++,0|Ψ⟩.
    pub theta_numeric: f64,
}

impl OracleReport {
    /// True when the numeric phase agrees with the e^{−iBS²} propagator.
    pub fn sign_consistent(&self) -> bool {
        self.theta_analytic == 0.0 || self.theta_numeric.signum() == self.theta_analytic.signum()
    }
}

/// Integrates the selected modes and compares against the closed form built
/// from `analytic` (trajectories of the same modes, in `spec.modes` order).
pub fn run_oracle(
    coupling: &GateCoupling,
    pulse: &PulseShape,
    sideband_detunings: &[f64],
    analytic: &Trajectory,
    spec: &OracleSpec,
) -> Result<OracleReport> {
    spec.validate(coupling)?;
    if analytic.len() != spec.modes.len() || sideband_detunings.len() != spec.modes.len() {
        return Err(Error::Oracle("trajectory and detunings must cover exactly the selected modes".into()));
    }
    let sub = coupling.restricted(&spec.modes);
    let space = Space::new(spec.modes.len(), spec.n_max);
    let model = Model {
        spin_ops: sub.eta1.iter().zip(&sub.eta2).map(|(a, b)| sigma_y_pair(*a, *b)).collect(),
        deltas: sideband_detunings.to_vec(),
        pulse,
        sqrt_n: (0..=space.levels).map(|n| (n as f64).sqrt()).collect(),
        occ: (0..space.modes).map(|k| (0..space.fock_dim).map(|f| space.occupation(f, k)).collect()).collect(),
        strides: (0..space.modes).map(|k| space.stride(k)).collect(),
        space: space.clone(),
    };
    let fd = space.fock_dim;
    let mut psi = vec![Complex64::new(0.0, 0.0); space.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    rk4(&model, pulse.tau, spec.steps, &mut psi);

    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    let mut leakage: f64 = 0.0;
    for k in 0..space.modes {
        let mut p = 0.0;
        for spin in 0..4 {
            for f in 0..fd {
                if space.occupation(f, k) + 2 >= space.levels {
                    p += psi[spin * fd + f].norm_sqr();
                }
            }
        }
        leakage = leakage.max(p);
    }
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::Oracle(format!(
            "Fock cutoff n_max = {} too small: {leakage:.3e} population in the top two levels",
            spec.n_max
        )));
    }

    let eig = SpinEigensystem::new(&sub);
    let vecs = SIGNS.map(eigenvector);

    // analytic state in the spin eigenbasis, then rotated to computational
    let mut expected = vec![Complex64::new(0.0, 0.0); space.dim()];
    for (s, v) in vecs.iter().enumerate() {
        let mut phase = 0.0;
        let mut factors = Vec::with_capacity(space.modes);
        for k in 0..space.modes {
            let lam = eig.lambda[k][s];
            phase += analytic.b[k] * lam * lam;
            factors.push(coherent(lam * analytic.alpha[k], space.levels));
        }
        let amp = eig.c[s] * Complex64::cis(-phase);
        for f in 0..fd {
            let mut m = amp;
            for (k, fac) in factors.iter().enumerate() {
                m *= fac[space.occupation(f, k)];
            }
            for q in 0..4 {
                expected[q * fd + f] += v[q] * m;
            }
        }
    }
    let overlap = expected.iter().zip(&psi).map(|(e, p)| e.conj() * p).sum::<Complex64>().norm_sqr();

    // spin-resolved amplitudes ⟨s|ψ⟩ as Fock vectors
    let project = |s: usize| -> Vec<Complex64> {
        (0..fd)
            .map(|f| (0..4).map(|q| vecs[s][q].conj() * psi[q * fd + f]).sum())
            .collect()
    };
    let branches: Vec<Vec<Complex64>> = (0..4).map(project).collect();

    let alpha_numeric = (0..space.modes)
        .map(|k| {
            // branch with the largest |λ| carries the cleanest displacement
            let s = (0..4).max_by(|&a, &b| eig.lambda[k][a].abs().total_cmp(&eig.lambda[k][b].abs())).unwrap();
            let lam = eig.lambda[k][s];
            let br = &branches[s];
            let stride = space.stride(k);
            let mut a_exp = Complex64::new(0.0, 0.0);
            let mut weight = 0.0;
            for f in 0..fd {
                weight += br[f].norm_sqr();
                let n = space.occupation(f, k);
                if n + 1 < space.levels {
                    a_exp += br[f].conj() * model.sqrt_n[n + 1] * br[f + stride];
                }
            }
            if lam == 0.0 || weight == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                a_exp / (weight * lam)
            }
        })
        .collect();

    let vac_phase: Vec<f64> = (0..4).map(|s| (branches[s][0] / eig.c[s]).arg()).collect();
    let theta_numeric = wrap(vac_phase[1] - vac_phase[0]);

    let b_numeric = match space.modes {
        1 => {
            let s = if eig.lambda[0][0].abs() >= eig.lambda[0][1].abs() { 0 } else { 1 };
            let l2 = eig.lambda[0][s].powi(2);
            (l2 > 0.0).then(|| vec![-vac_phase[s] / l2])
        }
        2 => {
            let m = [
                [eig.lambda[0][0].powi(2), eig.lambda[1][0].powi(2)],
                [eig.lambda[0][1].powi(2), eig.lambda[1][1].powi(2)],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = m[0][0].abs().max(m[1][1].abs()).max(m[0][1].abs()).max(m[1][0].abs());
            (det.abs() > 1e-6 * scale * scale).then(|| {
                let (r0, r1) = (-vac_phase[0], -vac_phase[1]);
                vec![(r0 * m[1][1] - m[0][1] * r1) / det, (m[0][0] * r1 - m[1][0] * r0) / det]
            })
        }
        _ => None,
    };

    Ok(OracleReport {
        overlap,
        norm,
        leakage,
        alpha_analytic: analytic.alpha.clone(),
        alpha_numeric,
        b_analytic: analytic.b.clone(),
        b_numeric,
        theta_analytic: analytic.theta(&sub),
        theta_numeric,
    })
}

/// Runs the oracle on a subset of a design's modes at frequency offset δω.
pub fn oracle_for_design(design: &GateDesign, spec: &OracleSpec, delta_omega: f64) -> Result<OracleReport> {
    spec.validate(&design.coupling)?;
    let freqs: Vec<f64> = spec.modes.iter().map(|&k| design.coupling.freqs[k]).collect();
    let d = DetuningContext::new(design.delta_c, delta_omega).check_resonance(&freqs)?;
    let traj = design.solver.trajectory(&d)?;
    run_oracle(&design.coupling, design.pulse(), &d, &traj, spec)
}

/// The design's two target modes.
pub fn target_spec(design: &GateDesign) -> OracleSpec {
    OracleSpec::new(vec![design.target_indices.0, design.target_indices.1])
}

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * (x / t).round()
}
