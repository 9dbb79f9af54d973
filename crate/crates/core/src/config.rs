//! Physical constants, unit conversions and the validated system configuration.
//!
//! Configs are TOML files. Frequencies are given in Hz, lengths in metres and
//! times in seconds:
//!
//! ```toml
//! n_ions = 3
//! center_spacing_m = 4.5e-6      # or: axial_freq_hz = 531e3
//! radial_a_freq_hz = 2.52e6
//! radial_b_freq_hz = 2.19e6
//! target_pair = [0, 2]           # optional, defaults to the center-adjacent ions
//!
//! [pulse]
//! type = "gaussian"              # square | gaussian | spline
//! tau_s = 200e-6
//! z_s = 25e-6
//!
//! [tol]
//! quad_rel = 1e-10
//! root_hz = 1.0
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain;
use crate::modes::Direction;
use crate::{Error, Result};

pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27; // kg
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19; // C
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12; // F/m
pub const HBAR: f64 = 1.054_571_817e-34; // J s
pub const YB171_MASS_U: f64 = 170.936_325_8;

/// Hz → rad/s.
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    TAU * f
}

/// rad/s → Hz.
#[inline]
pub fn angular_to_hz(w: f64) -> f64 {
    w / TAU
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// kg
    pub ion_mass: f64,
    /// e²/(4πε0), kg m³ s⁻²
    pub coulomb_coeff: f64,
    /// J s
    pub hbar: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            ion_mass: YB171_MASS_U * ATOMIC_MASS_UNIT,
            coulomb_coeff: ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
                / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY),
            hbar: HBAR,
        }
    }
}

/// Raman beam geometry. The effective wavevector is
/// `wavevector_factor · 2π / wavelength`, projected onto each radial axis by
/// `cos(projection_angle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserGeometry {
    pub wavelength: f64,
    pub wavevector_factor: f64,
    pub projection_angle: f64,
}

impl Default for LaserGeometry {
    fn default() -> Self {
        LaserGeometry {
            wavelength: 355e-9,
            wavevector_factor: 2.0,
            projection_angle: FRAC_PI_4,
        }
    }
}

impl LaserGeometry {
    pub fn effective_wavevector(&self) -> f64 {
        self.wavevector_factor * TAU / self.wavelength
    }

    /// Wavevector component along one radial principal axis.
    pub fn projected_wavevector(&self) -> f64 {
        self.effective_wavevector() * self.projection_angle.cos()
    }

    fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Schema(format!("wavelength_m must be > 0, got {}", self.wavelength)));
        }
        if !(self.wavevector_factor > 0.0 && self.wavevector_factor.is_finite()) {
            return Err(Error::Schema(format!(
                "wavevector_factor must be > 0, got {}",
                self.wavevector_factor
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.projection_angle) {
            return Err(Error::Schema(format!(
                "projection_angle_rad must lie in [0, pi/2], got {}",
                self.projection_angle
            )));
        }
        Ok(())
    }
}

/// How the axial confinement is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxialSpec {
    /// Axial center-of-mass frequency, Hz.
    Frequency(f64),
    /// Separation of the two designated center ions, m.
    CenterSpacing(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    Square,
    Gaussian,
    Spline,
}

impl PulseKind {
    pub fn parse(s: &str) -> Result<PulseKind> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(PulseKind::Square),
            "gaussian" | "trunc_gaussian" => Ok(PulseKind::Gaussian),
            "spline" | "spline_gaussian" => Ok(PulseKind::Spline),
            other => Err(Error::Schema(format!(
                "pulse.type must be one of square, gaussian, spline; got {other:?}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PulseKind::Square => "square",
            PulseKind::Gaussian => "gaussian",
            PulseKind::Spline => "spline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Trial peak Rabi rate, Hz. Recalibrated by the designer.
    pub omega0_hz: f64,
    /// Gaussian width, s.
    pub z: f64,
    /// Gate duration, s.
    pub tau: f64,
    pub n_knots: usize,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            kind: PulseKind::Gaussian,
            omega0_hz: 100e3,
            z: 25e-6,
            tau: 200e-6,
            n_knots: 13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative accuracy of the trajectory quadrature.
    pub quad_rel: f64,
    /// Root tolerance on δ_c, Hz.
    pub root_hz: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad_rel: 1e-10, root_hz: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub n_ions: usize,
    pub axial: AxialSpec,
    pub radial_a_freq_hz: f64,
    pub radial_b_freq_hz: f64,
    pub geometry: LaserGeometry,
    pub constants: PhysicalConstants,
    pub target_pair: (usize, usize),
    pub target_direction: Direction,
    pub target_modes: (usize, usize),
    /// Fixed detuning above the lower target mode, Hz. `None` means balanced.
    pub delta0_hz: Option<f64>,
    pub pulse: PulseSpec,
    pub tol: Tolerances,
}

/// The two ions adjacent to the chain center: the two middle ions for even
/// `n`, and the ions either side of the center ion for odd `n`.
pub fn default_target_pair(n: usize) -> (usize, usize) {
    let c = n / 2;
    if n % 2 == 0 {
        (c - 1, c)
    } else if n >= 3 {
        (c - 1, c + 1)
    } else {
        (0, 1)
    }
}

impl SystemConfig {
    /// The three-ion chain with 4.5 μm spacing and 2.52 / 2.19 MHz radial traps,
    /// driven on its outer ions with a 200 μs Gaussian of width 25 μs.
    pub fn three_ion_reference() -> SystemConfig {
        SystemConfig {
            n_ions: 3,
            axial: AxialSpec::CenterSpacing(4.5e-6),
            radial_a_freq_hz: 2.52e6,
            radial_b_freq_hz: 2.19e6,
            geometry: LaserGeometry::default(),
            constants: PhysicalConstants::default(),
            target_pair: (0, 2),
            target_direction: Direction::RadialB,
            target_modes: (0, 1),
            delta0_hz: None,
            pulse: PulseSpec::default(),
            tol: Tolerances::default(),
        }
    }

    /// Same trap and pulse, resized to `n` ions with a fixed center spacing and
    /// the default target pair.
    pub fn with_chain(&self, n: usize, center_spacing: f64) -> SystemConfig {
        SystemConfig {
            n_ions: n,
            axial: AxialSpec::CenterSpacing(center_spacing),
            target_pair: default_target_pair(n),
            ..self.clone()
        }
    }

    /// Axial COM angular frequency implied by the axial spec.
    pub fn axial_angular_freq(&self) -> Result<f64> {
        match self.axial {
            AxialSpec::Frequency(f) => Ok(hz_to_angular(f)),
            AxialSpec::CenterSpacing(dx) => {
                chain::axial_freq_for_center_spacing(self.n_ions, dx, &self.constants)
            }
        }
    }

    pub fn radial_trap_freq(&self, direction: Direction) -> Option<f64> {
        match direction {
            Direction::RadialA => Some(hz_to_angular(self.radial_a_freq_hz)),
            Direction::RadialB => Some(hz_to_angular(self.radial_b_freq_hz)),
            Direction::Axial => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::Schema(format!(
                "n_ions must be >= 2 (a gate needs an ion pair), got {}",
                self.n_ions
            )));
        }
        if self.n_ions > 64 {
            return Err(Error::Schema(format!("n_ions must be <= 64, got {}", self.n_ions)));
        }
        match self.axial {
            AxialSpec::Frequency(f) if !(f > 0.0 && f.is_finite()) => {
                return Err(Error::Schema(format!("axial_freq_hz must be > 0, got {f}")))
            }
            AxialSpec::CenterSpacing(dx) if !(dx > 0.0 && dx.is_finite()) => {
                return Err(Error::Schema(format!("center_spacing_m must be > 0, got {dx}")))
            }
            _ => {}
        }
        for (key, v) in [
            ("radial_a_freq_hz", self.radial_a_freq_hz),
            ("radial_b_freq_hz", self.radial_b_freq_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Schema(format!("{key} must be > 0, got {v}")));
            }
        }
        self.geometry.validate()?;

        let (i, j) = self.target_pair;
        if i == j || i >= self.n_ions || j >= self.n_ions {
            return Err(Error::Schema(format!(
                "target_pair must hold two distinct indices in [0, {}), got [{i}, {j}]",
                self.n_ions
            )));
        }
        let (k1, k2) = self.target_modes;
        if k1 >= k2 || k2 >= self.n_ions {
            return Err(Error::Schema(format!(
                "target_modes must satisfy k1 < k2 < n_ions, got [{k1}, {k2}]"
            )));
        }
        if self.target_direction == Direction::Axial {
            return Err(Error::Schema("target_direction must be radial_a or radial_b".into()));
        }

        let p = &self.pulse;
        if !(p.tau > 0.0 && p.tau.is_finite()) {
            return Err(Error::Schema(format!("pulse.tau_s must be > 0, got {}", p.tau)));
        }
        if p.kind != PulseKind::Square && !(p.z > 0.0 && p.z.is_finite()) {
            return Err(Error::Schema(format!("pulse.z_s must be > 0, got {}", p.z)));
        }
        if !(p.omega0_hz > 0.0 && p.omega0_hz.is_finite()) {
            return Err(Error::Schema(format!("pulse.omega0_hz must be > 0, got {}", p.omega0_hz)));
        }
        if p.kind == PulseKind::Spline && p.n_knots < 4 {
            return Err(Error::Schema(format!("pulse.n_knots must be >= 4, got {}", p.n_knots)));
        }
        if !(self.tol.quad_rel > 0.0 && self.tol.root_hz > 0.0) {
            return Err(Error::Schema("tol.quad_rel and tol.root_hz must be > 0".into()));
        }
        if let Some(d) = self.delta0_hz {
            if !d.is_finite() {
                return Err(Error::Schema("delta0_hz must be finite".into()));
            }
        }

        // linear-chain stability: radial_a > radial_b > axial
        let axial_hz = angular_to_hz(self.axial_angular_freq()?);
        if !(self.radial_a_freq_hz > self.radial_b_freq_hz) {
            return Err(Error::Stability(format!(
                "radial_a_freq_hz ({}) must exceed radial_b_freq_hz ({})",
                self.radial_a_freq_hz, self.radial_b_freq_hz
            )));
        }
        if !(self.radial_b_freq_hz > axial_hz) {
            return Err(Error::Stability(format!(
                "radial_b_freq_hz ({}) must exceed the axial frequency ({axial_hz:.1} Hz)",
                self.radial_b_freq_hz
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<SystemConfig> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let raw = RawConfig::deserialize(table).map_err(|e| Error::Schema(e.to_string()))?;
        let cfg = raw.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes with every default written out explicitly.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&RawConfig::from_config(self)).expect("config serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

/// Reads and validates a TOML config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)?;
    SystemConfig::from_toml_str(&text)
}

// on-disk schema

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_ions: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axial_freq_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center_spacing_m: Option<f64>,
    radial_a_freq_hz: f64,
    radial_b_freq_hz: f64,
    #[serde(default)]
    wavelength_m: Option<f64>,
    #[serde(default)]
    wavevector_factor: Option<f64>,
    #[serde(default)]
    projection_angle_rad: Option<f64>,
    #[serde(default)]
    target_pair: Option<[i64; 2]>,
    #[serde(default)]
    target_direction: Option<Direction>,
    #[serde(default)]
    target_modes: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta0_hz: Option<f64>,
    pulse: RawPulse,
    #[serde(default)]
    tol: Option<RawTol>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    omega0_hz: Option<f64>,
    #[serde(default)]
    z_s: Option<f64>,
    tau_s: f64,
    #[serde(default)]
    n_knots: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTol {
    #[serde(default)]
    quad_rel: Option<f64>,
    #[serde(default)]
    root_hz: Option<f64>,
}

fn non_negative_index(key: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Schema(format!("{key} must be non-negative, got {v}")))
}

impl RawConfig {
    fn into_config(self) -> Result<SystemConfig> {
        let n_ions = non_negative_index("n_ions", self.n_ions)?;
        let axial = match (self.axial_freq_hz, self.center_spacing_m) {
            (Some(f), None) => AxialSpec::Frequency(f),
            (None, Some(dx)) => AxialSpec::CenterSpacing(dx),
            (Some(_), Some(_)) => {
                return Err(Error::Schema(
                    "give exactly one of axial_freq_hz and center_spacing_m, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Schema(
                    "missing key: one of axial_freq_hz or center_spacing_m is required".into(),
                ))
            }
        };
        let defaults = LaserGeometry::default();
        let geometry = LaserGeometry {
            wavelength: self.wavelength_m.unwrap_or(defaults.wavelength),
            wavevector_factor: self.wavevector_factor.unwrap_or(defaults.wavevector_factor),
            projection_angle: self.projection_angle_rad.unwrap_or(defaults.projection_angle),
        };
        let target_pair = match self.target_pair {
            Some([a, b]) => (non_negative_index("target_pair", a)?, non_negative_index("target_pair", b)?),
            None if n_ions >= 2 => default_target_pair(n_ions),
            None => (0, 1),
        };
        let target_modes = match self.target_modes {
            Some([a, b]) => (non_negative_index("target_modes", a)?, non_negative_index("target_modes", b)?),
            None => (0, 1),
        };
        let pd = PulseSpec::default();
        let n_knots = match self.pulse.n_knots {
            Some(k) => non_negative_index("pulse.n_knots", k)?,
            None => pd.n_knots,
        };
        let pulse = PulseSpec {
            kind: PulseKind::parse(&self.pulse.kind)?,
            omega0_hz: self.pulse.omega0_hz.unwrap_or(pd.omega0_hz),
            z: self.pulse.z_s.unwrap_or(pd.z),
            tau: self.pulse.tau_s,
            n_knots,
        };
        let td = Tolerances::default();
        let tol = match self.tol {
            Some(t) => Tolerances {
                quad_rel: t.quad_rel.unwrap_or(td.quad_rel),
                root_hz: t.root_hz.unwrap_or(td.root_hz),
            },
            None => td,
        };
        Ok(SystemConfig {
            n_ions,
            axial,
            radial_a_freq_hz: self.radial_a_freq_hz,
            radial_b_freq_hz: self.radial_b_freq_hz,
            geometry,
            constants: PhysicalConstants::default(),
            target_pair,
            target_direction: self.target_direction.unwrap_or(Direction::RadialB),
            target_modes,
            delta0_hz: self.delta0_hz,
            pulse,
            tol,
        })
    }

    fn from_config(cfg: &SystemConfig) -> RawConfig {
        let (axial_freq_hz, center_spacing_m) = match cfg.axial {
            AxialSpec::Frequency(f) => (Some(f), None),
            AxialSpec::CenterSpacing(dx) => (None, Some(dx)),
        };
        RawConfig {
            n_ions: cfg.n_ions as i64,
            axial_freq_hz,
            center_spacing_m,
            radial_a_freq_hz: cfg.radial_a_freq_hz,
            radial_b_freq_hz: cfg.radial_b_freq_hz,
            wavelength_m: Some(cfg.geometry.wavelength),
            wavevector_factor: Some(cfg.geometry.wavevector_factor),
            projection_angle_rad: Some(cfg.geometry.projection_angle),
            target_pair: Some([cfg.target_pair.0 as i64, cfg.target_pair.1 as i64]),
            target_direction: Some(cfg.target_direction),
            target_modes: Some([cfg.target_modes.0 as i64, cfg.target_modes.1 as i64]),
            delta0_hz: cfg.delta0_hz,
            pulse: RawPulse {
                kind: cfg.pulse.kind.name().to_string(),
                omega0_hz: Some(cfg.pulse.omega0_hz),
                z_s: Some(cfg.pulse.z),
                tau_s: cfg.pulse.tau,
                n_knots: Some(cfg.pulse.n_knots as i64),
            },
            tol: Some(RawTol {
                quad_rel: Some(cfg.tol.quad_rel),
                root_hz: Some(cfg.tol.root_hz),
            }),
        }
    }
}
