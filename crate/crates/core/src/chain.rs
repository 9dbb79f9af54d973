//! Equilibrium of a linear ion chain in a harmonic axial well.
//!
//! Positions are dimensionless, `x_i = l·u_i` with `l³ = e²/(4πε0 m ω_z²)`,
//! and minimize `V(u) = Σ u_i²/2 + Σ_{i<j} 1/|u_i − u_j|`.

use nalgebra::{DMatrix, DVector};

use crate::config::{PhysicalConstants, SystemConfig};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const FORCE_TOL: f64 = 1e-13;
/// Accepted once Newton stalls at round-off.
const FORCE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct IonChain {
    pub n: usize,
    /// ω_z, rad/s.
    pub axial_angular_freq: f64,
    /// l, m.
    pub length_scale: f64,
    /// Dimensionless positions, ascending.
    pub u: Vec<f64>,
    pub constants: PhysicalConstants,
}

/// Gradient of V, i.e. minus the dimensionless force on each ion.
pub fn force_residual(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut g = u.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = u[i] - u[j];
                g[i] -= d.signum() / (d * d);
            }
        }
    }
    g
}

/// Coulomb Hessian of V. Also the axial mode matrix.
pub fn potential_hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                h[(i, j)] = -c;
                h[(i, i)] += c;
            }
        }
    }
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn potential(u: &[f64]) -> f64 {
    let mut v = 0.0;
    for i in 0..u.len() {
        v += 0.5 * u[i] * u[i];
        for j in i + 1..u.len() {
            v += 1.0 / (u[j] - u[i]).abs();
        }
    }
    v
}

/// Dimensionless equilibrium positions of `n` ions, ascending and zero-sum.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Schema("chain needs at least one ion".into()));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let half = (n as f64).powf(0.56);
    let mut u: Vec<f64> = (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();

    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let g = force_residual(&u);
        residual = max_abs(&g);
        if residual <= FORCE_TOL {
            symmetrize(&mut u);
            return Ok(u);
        }
        let h = potential_hessian(&u);
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&DVector::from_vec(g.clone())),
            // not convex here: fall back to a gradient step
            None => DVector::from_vec(g.clone()) * 0.1,
        };

        if residual <= FORCE_FLOOR && max_abs(step.as_slice()) <= 1e-14 * max_abs(&u) {
            symmetrize(&mut u);
            return Ok(u);
        }
        // damp until ordering is preserved and the potential does not rise
        let v0 = potential(&u);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let ordered = trial.windows(2).all(|w| w[1] > w[0]);
            if ordered && (potential(&trial) <= v0 + 1e-12 * v0.abs() || t < 1e-3) {
                u = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::EquilibriumNotConverged { n, iterations: MAX_ITERATIONS, residual });
            }
        }
    }
    Err(Error::EquilibriumNotConverged { n, iterations: MAX_ITERATIONS, residual })
}

fn symmetrize(u: &mut [f64]) {
    let n = u.len();
    for i in 0..n / 2 {
        let a = 0.5 * (u[n - 1 - i] - u[i]);
        u[i] = -a;
        u[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
}

/// Index pair whose separation defines the center spacing: the two middle
/// ions for even `n`, the center ion and its right neighbour for odd `n`.
pub fn center_pair(n: usize) -> (usize, usize) {
    if n % 2 == 0 {
        (n / 2 - 1, n / 2)
    } else {
        (n / 2, n / 2 + 1)
    }
}

fn dimensionless_center_spacing(u: &[f64]) -> f64 {
    let (a, b) = center_pair(u.len());
    u[b] - u[a]
}

/// `l³ = coulomb / (m ω²)`.
pub fn length_scale(axial_angular_freq: f64, c: &PhysicalConstants) -> f64 {
    (c.coulomb_coeff / (c.ion_mass * axial_angular_freq * axial_angular_freq)).cbrt()
}

/// Axial COM angular frequency that puts the center ions `spacing` metres apart.
pub fn axial_freq_for_center_spacing(n: usize, spacing: f64, c: &PhysicalConstants) -> Result<f64> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Schema(format!("center spacing must be > 0, got {spacing}")));
    }
    if n < 2 {
        return Err(Error::Schema(format!("center spacing needs n >= 2, got {n}")));
    }
    let u = equilibrium_positions(n)?;
    let l = spacing / dimensionless_center_spacing(&u);
    Ok((c.coulomb_coeff / (c.ion_mass * l.powi(3))).sqrt())
}

impl IonChain {
    pub fn new(n: usize, axial_angular_freq: f64, constants: PhysicalConstants) -> Result<IonChain> {
        if !(axial_angular_freq > 0.0 && axial_angular_freq.is_finite()) {
            return Err(Error::Schema(format!("axial frequency must be > 0, got {axial_angular_freq}")));
        }
        let u = equilibrium_positions(n)?;
        Ok(IonChain {
            n,
            axial_angular_freq,
            length_scale: length_scale(axial_angular_freq, &constants),
            u,
            constants,
        })
    }

    pub fn with_center_spacing(n: usize, spacing: f64, constants: PhysicalConstants) -> Result<IonChain> {
        let w = axial_freq_for_center_spacing(n, spacing, &constants)?;
        IonChain::new(n, w, constants)
    }

    /// Physical positions, m.
    pub fn positions(&self) -> Vec<f64> {
        self.u.iter().map(|u| u * self.length_scale).collect()
    }

    /// Distance between the two center ions, m.
    pub fn center_spacing(&self) -> f64 {
        dimensionless_center_spacing(&self.u) * self.length_scale
    }

    /// Neighbour spacings, m.
    pub fn spacings(&self) -> Vec<f64> {
        self.u.windows(2).map(|w| (w[1] - w[0]) * self.length_scale).collect()
    }
}

pub fn build_chain(config: &SystemConfig) -> Result<IonChain> {
    IonChain::new(config.n_ions, config.axial_angular_freq()?, config.constants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::hz_to_angular;
    use proptest::prelude::*;

    #[test]
    fn two_ions_analytic() {
        let u = equilibrium_positions(2).unwrap();
        let a = 0.25f64.cbrt();
        assert!((u[0] + a).abs() < 1e-13);
        assert!((u[1] - a).abs() < 1e-13);
        assert!((u[0] + 0.62996).abs() < 1e-5);
    }

    #[test]
    fn three_ions_analytic() {
        let u = equilibrium_positions(3).unwrap();
        let a = 1.25f64.cbrt();
        assert!((u[0] + a).abs() < 1e-13);
        assert_eq!(u[1], 0.0);
        assert!((u[2] - a).abs() < 1e-13);
        assert!((a - 1.0772).abs() < 1e-4);
    }

    #[test]
    fn thirty_three_ions_spread_outwards() {
        let u = equilibrium_positions(33).unwrap();
        assert!(max_abs(&force_residual(&u)) <= 1e-12);
        let gaps: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
        for i in 16..gaps.len() - 1 {
            assert!(gaps[i + 1] > gaps[i], "gap {i}");
        }
        for i in 0..15 {
            assert!(gaps[i] > gaps[i + 1], "gap {i}");
        }
    }

    #[test]
    fn minimum_matches_direct_minimization() {
        // independent oracle: plain gradient descent on V
        let n = 6;
        let mut u: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        for _ in 0..200_000 {
            let g = force_residual(&u);
            for (x, gi) in u.iter_mut().zip(&g) {
                *x -= 0.05 * gi;
            }
        }
        let newton = equilibrium_positions(n).unwrap();
        for (a, b) in u.iter().zip(&newton) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn three_ion_axial_frequency() {
        let c = PhysicalConstants::default();
        let w = axial_freq_for_center_spacing(3, 4.5e-6, &c).unwrap();
        let f = w / std::f64::consts::TAU;
        assert!((f - 531e3).abs() < 1e3, "{f}");
    }

    #[test]
    fn two_ion_inverse_recovers_frequency() {
        let c = PhysicalConstants::default();
        let w = hz_to_angular(700e3);
        let l = length_scale(w, &c);
        let back = axial_freq_for_center_spacing(2, 2.0 * 0.25f64.cbrt() * l, &c).unwrap();
        assert!((back - w).abs() < 1e-9 * w);
    }

    #[test]
    fn spacing_scaling_law() {
        let c = PhysicalConstants::default();
        let w1 = axial_freq_for_center_spacing(5, 3e-6, &c).unwrap();
        let w2 = axial_freq_for_center_spacing(5, 6e-6, &c).unwrap();
        assert!((w1 / w2 - 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn build_from_config() {
        let cfg = SystemConfig::three_ion_reference();
        let chain = build_chain(&cfg).unwrap();
        assert!((chain.center_spacing() - 4.5e-6).abs() < 1e-9 * 4.5e-6);

        let mut direct = cfg.clone();
        direct.axial = crate::config::AxialSpec::Frequency(531e3);
        let chain = build_chain(&direct).unwrap();
        assert!((chain.center_spacing() - 4.5e-6).abs() < 0.01e-6);

        let big = cfg.with_chain(33, 3e-6);
        let chain = build_chain(&big).unwrap();
        assert!((chain.center_spacing() - 3e-6).abs() < 1e-9 * 3e-6);
    }

    #[test]
    fn hessian_positive_definite_at_minimum() {
        for n in [2, 5, 17, 40] {
            let u = equilibrium_positions(n).unwrap();
            let eig = potential_hessian(&u).symmetric_eigenvalues();
            assert!(eig.min() > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn equilibrium_invariants(n in 2usize..=64) {
            let u = equilibrium_positions(n).unwrap();
            prop_assert!(max_abs(&force_residual(&u)) <= 1e-12);
            prop_assert!(u.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(u.iter().sum::<f64>().abs() <= 1e-10);
            for i in 0..n {
                prop_assert!((u[i] + u[n - 1 - i]).abs() <= 1e-10);
            }
        }

        #[test]
        fn forward_inverse_consistency(n in 2usize..=40, dx in 2.0e-6f64..8.0e-6) {
            let chain = IonChain::with_center_spacing(n, dx, PhysicalConstants::default()).unwrap();
            prop_assert!((chain.center_spacing() - dx).abs() <= 1e-9 * dx);
        }
    }
}
