//! Normal modes of the chain and Lamb–Dicke couplings of a target ion pair.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::{potential_hessian, IonChain};
use crate::config::{angular_to_hz, LaserGeometry, SystemConfig};
use crate::linalg::{fix_column_signs, jacobi_eigen};
use crate::report::{fmt_num, write_table, Metadata};
use crate::{Error, Result};

/// Relative frequency gap below which two modes count as degenerate.
const DEGENERACY_TOL: f64 = 1e-6;
/// Warning threshold for the Lamb–Dicke approximation.
pub const LAMB_DICKE_LIMIT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Axial,
    RadialA,
    RadialB,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Axial => "axial",
            Direction::RadialA => "radial_a",
            Direction::RadialB => "radial_b",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeStructure {
    pub direction: Direction,
    /// Angular frequencies, ascending.
    pub freqs: Vec<f64>,
    /// Column k is the participation vector of mode k.
    pub participation: DMatrix<f64>,
}

impl ModeStructure {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs_hz(&self) -> Vec<f64> {
        self.freqs.iter().map(|&w| angular_to_hz(w)).collect()
    }

    /// ν_1 − ν_0, rad/s.
    pub fn splitting_10(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    pub fn label(&self, k: usize) -> String {
        let n = self.len();
        match self.direction {
            Direction::Axial => match k {
                0 => "com".into(),
                1 => "stretch".into(),
                _ => format!("mode{k}"),
            },
            _ => {
                if k == n - 1 {
                    "com".into()
                } else if n == 2 {
                    "rocking".into()
                } else if k == 0 {
                    "zigzag".into()
                } else if k == n - 2 {
                    "tilt".into()
                } else {
                    format!("mode{k}")
                }
            }
        }
    }
}

fn decompose(direction: Direction, a: DMatrix<f64>, omega_z: f64) -> Result<ModeStructure> {
    let eig = jacobi_eigen(&a)?;
    let lowest = eig.values[0];
    if lowest <= 0.0 {
        return Err(Error::ZigZag { direction: direction.name().into(), eigenvalue: lowest });
    }
    let freqs: Vec<f64> = eig.values.iter().map(|mu| omega_z * mu.sqrt()).collect();
    for k in 0..freqs.len().saturating_sub(1) {
        if (freqs[k + 1] - freqs[k]).abs() < DEGENERACY_TOL * freqs[k] {
            return Err(Error::DegenerateModes {
                direction: direction.name().into(),
                index: k,
                next: k + 1,
                freq_hz: angular_to_hz(freqs[k]),
            });
        }
    }
    let mut participation = eig.vectors;
    fix_column_signs(&mut participation, 1e-9);
    Ok(ModeStructure { direction, freqs, participation })
}

pub fn axial_modes(chain: &IonChain) -> Result<ModeStructure> {
    decompose(Direction::Axial, potential_hessian(&chain.u), chain.axial_angular_freq)
}

/// Dimensionless radial Hessian for trap frequency ratio β = trap/ω_z.
pub fn radial_matrix(u: &[f64], beta: f64) -> DMatrix<f64> {
    let n = u.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = beta * beta;
        for j in 0..n {
            if i != j {
                let c = 1.0 / (u[i] - u[j]).abs().powi(3);
                a[(i, j)] = c;
                a[(i, i)] -= c;
            }
        }
    }
    a
}

pub fn radial_modes(chain: &IonChain, trap_freq: f64, direction: Direction) -> Result<ModeStructure> {
    let beta = trap_freq / chain.axial_angular_freq;
    decompose(direction, radial_matrix(&chain.u, beta), chain.axial_angular_freq)
}

#[derive(Clone, Debug)]
pub struct ModeSet {
    pub chain: IonChain,
    pub axial: ModeStructure,
    pub radial_a: ModeStructure,
    pub radial_b: ModeStructure,
}

impl ModeSet {
    pub fn get(&self, d: Direction) -> &ModeStructure {
        match d {
            Direction::Axial => &self.axial,
            Direction::RadialA => &self.radial_a,
            Direction::RadialB => &self.radial_b,
        }
    }
}

pub fn build_modes(config: &SystemConfig) -> Result<ModeSet> {
    let chain = crate::chain::build_chain(config)?;
    let axial = axial_modes(&chain)?;
    let radial_a = radial_modes(&chain, config.radial_trap_freq(Direction::RadialA).unwrap(), Direction::RadialA)?;
    let radial_b = radial_modes(&chain, config.radial_trap_freq(Direction::RadialB).unwrap(), Direction::RadialB)?;
    Ok(ModeSet { chain, axial, radial_a, radial_b })
}

/// Spin–motion couplings of two ions to all 2N radial modes (radial-a first).
#[derive(Clone, Debug, PartialEq)]
pub struct GateCoupling {
    pub pair: (usize, usize),
    pub n_ions: usize,
    /// Angular frequencies of the 2N modes.
    pub freqs: Vec<f64>,
    pub directions: Vec<Direction>,
    pub eta1: Vec<f64>,
    /// Includes the even_flip sign.
    pub eta2: Vec<f64>,
    pub even_flip: bool,
}

impl GateCoupling {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Position of mode `k` of `direction` in the concatenated list.
    pub fn mode_index(&self, direction: Direction, k: usize) -> Option<usize> {
        if k >= self.n_ions {
            return None;
        }
        match direction {
            Direction::RadialA => Some(k),
            Direction::RadialB => Some(self.n_ions + k),
            Direction::Axial => None,
        }
    }

    /// η1,k·η2,k for every mode.
    pub fn eta_products(&self) -> Vec<f64> {
        self.eta1.iter().zip(&self.eta2).map(|(a, b)| a * b).collect()
    }

    pub fn set_even_flip(&mut self, flip: bool) {
        if flip != self.even_flip {
            for e in &mut self.eta2 {
                *e = -*e;
            }
            self.even_flip = flip;
        }
    }

    pub fn with_even_flip(mut self, flip: bool) -> GateCoupling {
        self.set_even_flip(flip);
        self
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.eta1.iter().chain(&self.eta2).fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn in_lamb_dicke_regime(&self) -> bool {
        self.max_abs_eta() < LAMB_DICKE_LIMIT
    }

    /// Keeps only the listed modes (indices into the concatenated list).
    pub fn restricted(&self, keep: &[usize]) -> GateCoupling {
        GateCoupling {
            pair: self.pair,
            n_ions: self.n_ions,
            freqs: keep.iter().map(|&k| self.freqs[k]).collect(),
            directions: keep.iter().map(|&k| self.directions[k]).collect(),
            eta1: keep.iter().map(|&k| self.eta1[k]).collect(),
            eta2: keep.iter().map(|&k| self.eta2[k]).collect(),
            even_flip: self.even_flip,
        }
    }
}

/// η = b · Δk cos(angle) · sqrt(ħ / 2mν).
pub fn lamb_dicke(b: f64, nu: f64, geometry: &LaserGeometry, chain: &IonChain) -> f64 {
    let c = &chain.constants;
    b * geometry.projected_wavevector() * (c.hbar / (2.0 * c.ion_mass * nu)).sqrt()
}

pub fn gate_coupling(
    chain: &IonChain,
    radial: [&ModeStructure; 2],
    geometry: &LaserGeometry,
    pair: (usize, usize),
    even_flip: bool,
) -> Result<GateCoupling> {
    let (i1, i2) = pair;
    if i1 == i2 || i1 >= chain.n || i2 >= chain.n {
        return Err(Error::Schema(format!("invalid target pair ({i1}, {i2}) for {} ions", chain.n)));
    }
    let sign = if even_flip { -1.0 } else { 1.0 };
    let mut g = GateCoupling {
        pair,
        n_ions: chain.n,
        freqs: Vec::with_capacity(2 * chain.n),
        directions: Vec::with_capacity(2 * chain.n),
        eta1: Vec::with_capacity(2 * chain.n),
        eta2: Vec::with_capacity(2 * chain.n),
        even_flip,
    };
    for ms in radial {
        for (k, &nu) in ms.freqs.iter().enumerate() {
            g.freqs.push(nu);
            g.directions.push(ms.direction);
            g.eta1.push(lamb_dicke(ms.participation[(i1, k)], nu, geometry, chain));
            g.eta2.push(sign * lamb_dicke(ms.participation[(i2, k)], nu, geometry, chain));
        }
    }
    Ok(g)
}

impl ModeSet {
    pub fn coupling(&self, geometry: &LaserGeometry, pair: (usize, usize), even_flip: bool) -> Result<GateCoupling> {
        gate_coupling(&self.chain, [&self.radial_a, &self.radial_b], geometry, pair, even_flip)
    }
}

/// CSV columns: direction, index, label, freq_hz, b0 … b{N−1}.
pub fn write_modes_csv<W: Write>(w: W, meta: &Metadata, modes: &[&ModeStructure]) -> Result<()> {
    let n = modes.first().map_or(0, |m| m.len());
    let mut header: Vec<String> = ["direction", "index", "label", "freq_hz"].iter().map(|s| s.to_string()).collect();
    header.extend((0..n).map(|i| format!("b{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = modes.iter().flat_map(|ms| {
        (0..ms.len()).map(move |k| {
            let mut row = vec![
                ms.direction.name().to_string(),
                k.to_string(),
                ms.label(k),
                fmt_num(angular_to_hz(ms.freqs[k])),
            ];
            row.extend(ms.participation.column(k).iter().map(|&b| fmt_num(b)));
            row
        })
    });
    write_table(w, meta, &header_refs, rows)
}
