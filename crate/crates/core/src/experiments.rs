//! Parameter studies behind the `msgate` subcommands. Every study returns rows
//! in grid order regardless of how many workers evaluated them.

use std::io::Write;

use rayon::prelude::*;

use crate::config::{angular_to_hz, hz_to_angular, PulseKind, SystemConfig};
use crate::design::{design_gate, evaluate_with_error, sensitivity, GateDesign, Sensitivity};
use crate::metrics::{fidelity_estimate, parity_scan, phase_grid, ParityScan};
use crate::report::{fmt_num, write_table, Metadata};
use crate::{Error, Result};

/// Evenly spaced points including both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Grid {
        Grid { lo, hi, points }
    }

    /// Grid with the given spacing, snapped so both ends are included.
    pub fn with_step(lo: f64, hi: f64, step: f64) -> Grid {
        let n = ((hi - lo) / step).round() as usize + 1;
        Grid { lo, hi, points: n.max(1) }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn describe(&self, unit: &str) -> String {
        format!("{} .. {} {unit}, {} points", fmt_num(self.lo), fmt_num(self.hi), self.points)
    }
}

/// ε values at one grid point, or the reason there are none.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub eps_d: f64,
    pub eps_r: f64,
    pub eps_s: f64,
    pub fidelity: f64,
    /// Empty when the point evaluated cleanly.
    pub flag: String,
}

impl ErrorRow {
    fn flagged(flag: String) -> ErrorRow {
        ErrorRow { eps_d: f64::NAN, eps_r: f64::NAN, eps_s: f64::NAN, fidelity: f64::NAN, flag }
    }

    pub fn is_ok(&self) -> bool {
        self.flag.is_empty()
    }

    fn cells(&self) -> [String; 5] {
        [fmt_num(self.eps_d), fmt_num(self.eps_r), fmt_num(self.eps_s), fmt_num(self.fidelity), self.flag.clone()]
    }
}

fn flag_for(err: &Error) -> String {
    match err {
        Error::Resonance { mode, .. } => format!("resonance:mode{mode}"),
        Error::Quadrature { .. } => "quadrature".into(),
        other => format!("error:{other}"),
    }
}

/// Evaluates a design at δω (rad/s), turning failures into a flag.
pub fn evaluate_row(design: &GateDesign, delta_omega: f64) -> ErrorRow {
    match evaluate_with_error(design, delta_omega) {
        Ok(b) => ErrorRow { eps_d: b.eps_d, eps_r: b.eps_r, eps_s: b.eps_s, fidelity: b.fidelity, flag: String::new() },
        Err(e) => ErrorRow::flagged(flag_for(&e)),
    }
}

pub const UNBALANCED_DELTA0_HZ: f64 = -40e3;

/// Balanced Gaussian, Gaussian at −40 kHz, square at −40 kHz.
pub fn reference_configs(base: &SystemConfig) -> Vec<(&'static str, SystemConfig)> {
    let mut balanced = base.clone();
    balanced.pulse.kind = PulseKind::Gaussian;
    balanced.delta0_hz = None;
    let mut gauss = balanced.clone();
    gauss.delta0_hz = Some(UNBALANCED_DELTA0_HZ);
    let mut square = gauss.clone();
    square.pulse.kind = PulseKind::Square;
    vec![("balanced_gaussian", balanced), ("gaussian_m40", gauss), ("square_m40", square)]
}

pub fn reference_designs(base: &SystemConfig) -> Result<Vec<(&'static str, GateDesign)>> {
    reference_configs(base).into_par_iter().map(|(name, cfg)| Ok((name, design_gate(&cfg)?))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub pulse: &'static str,
    /// δ_c − ν_k1, rad/s.
    pub delta0: f64,
    /// δ_0 minus the pulse's design value, rad/s.
    pub delta_omega: f64,
    pub errors: ErrorRow,
}

/// Error metrics against detuning from the lowest target mode, for each
/// reference pulse at its own calibrated amplitude. `delta0` is in rad/s.
pub fn sweep_detuning(designs: &[(&'static str, GateDesign)], delta0: &Grid) -> Vec<SweepRow> {
    let points = delta0.values();
    designs
        .iter()
        .flat_map(|(name, d)| points.iter().map(move |&x| (*name, d, x)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(pulse, d, x)| {
            let delta_omega = x - d.delta0();
            SweepRow { pulse, delta0: x, delta_omega, errors: evaluate_row(d, delta_omega) }
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 8] = ["pulse", "delta0_khz", "domega_khz", "eps_d", "eps_r", "eps_s", "fidelity", "flag"];

pub fn write_sweep_csv<W: Write>(w: W, meta: &Metadata, rows: &[SweepRow]) -> Result<()> {
    write_table(
        w,
        meta,
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            let mut v = vec![
                r.pulse.to_string(),
                fmt_num(angular_to_hz(r.delta0) / 1e3),
                fmt_num(angular_to_hz(r.delta_omega) / 1e3),
            ];
            v.extend(r.errors.cells());
            v
        }),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourRow {
    /// Gaussian width, s.
    pub z: f64,
    pub delta_omega: f64,
    pub delta_c: f64,
    pub errors: ErrorRow,
}

/// ε over (z, δω); every z gets its own balance point and amplitude.
pub fn contour(base: &SystemConfig, z: &Grid, delta_omega: &Grid) -> Vec<ContourRow> {
    let dws = delta_omega.values();
    let designs: Vec<(f64, Result<GateDesign>)> = z
        .values()
        .into_par_iter()
        .map(|zv| {
            let mut cfg = base.clone();
            cfg.pulse.z = zv;
            (zv, design_gate(&cfg))
        })
        .collect();
    designs
        .iter()
        .flat_map(|(zv, d)| dws.iter().map(move |&dw| (*zv, d, dw)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(z, d, dw)| match d {
            Ok(d) => ContourRow { z, delta_omega: dw, delta_c: d.delta_c, errors: evaluate_row(d, dw) },
            Err(e) => ContourRow {
                z,
                delta_omega: dw,
                delta_c: f64::NAN,
                errors: ErrorRow::flagged(format!("design:{e}")),
            },
        })
        .collect()
}

pub fn write_contour_csv<W: Write>(w: W, meta: &Metadata, rows: &[ContourRow]) -> Result<()> {
    write_table(
        w,
        meta,
        &["z_us", "domega_khz", "delta_c_hz", "eps_d", "eps_r", "eps_s", "fidelity", "flag"],
        rows.iter().map(|r| {
            let mut v = vec![fmt_num(r.z * 1e6), fmt_num(angular_to_hz(r.delta_omega) / 1e3), fmt_num(angular_to_hz(r.delta_c))];
            v.extend(r.errors.cells());
            v
        }),
    )
}

/// Interval around the smallest value where `y < threshold`, with the edges
/// placed by linear interpolation in log y. `None` if no point qualifies.
/// An edge that never crosses stays at the grid end.
pub fn window_below(x: &[f64], y: &[f64], threshold: f64) -> Option<(f64, f64)> {
    let best = (0..y.len()).filter(|&i| y[i].is_finite()).min_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    if y[best] >= threshold {
        return None;
    }
    let cross = |i: usize, j: usize| {
        if !(y[i] > 0.0 && y[j] > 0.0 && y[j].is_finite()) {
            return x[i];
        }
        let (li, lj, lt) = (y[i].ln(), y[j].ln(), threshold.ln());
        x[i] + (x[j] - x[i]) * (lt - li) / (lj - li)
    };
    let mut lo = best;
    while lo > 0 && y[lo - 1] < threshold {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < y.len() && y[hi + 1] < threshold {
        hi += 1;
    }
    let left = if lo > 0 { cross(lo, lo - 1) } else { x[0] };
    let right = if hi + 1 < y.len() { cross(hi, hi + 1) } else { x[y.len() - 1] };
    Some((left, right))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainPoint {
    /// Center spacing, m.
    pub spacing: f64,
    pub n_ions: usize,
    pub outcome: std::result::Result<ChainSummary, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub splitting_10: f64,
    pub delta_c: f64,
    pub delta0: f64,
    pub omega0: f64,
    pub eps_s_design: f64,
    /// ε_s at the two ends of the δω grid.
    pub eps_s_edges: (f64, f64),
    pub sensitivity: Sensitivity,
    pub curve: Vec<(f64, ErrorRow)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainStudySpec {
    pub delta_omega: Grid,
    /// Half-width of the window scanned by the sensitivity metric, rad/s.
    pub half_range: f64,
}

impl Default for ChainStudySpec {
    fn default() -> ChainStudySpec {
        let edge = hz_to_angular(10e3);
        ChainStudySpec { delta_omega: Grid::with_step(-edge, edge, hz_to_angular(100.0)), half_range: hz_to_angular(3e3) }
    }
}

fn chain_point(base: &SystemConfig, spacing: f64, n: usize, spec: &ChainStudySpec) -> Result<ChainSummary> {
    let cfg = base.with_chain(n, spacing);
    let d = design_gate(&cfg)?;
    let dws = spec.delta_omega.values();
    let curve: Vec<(f64, ErrorRow)> = dws.par_iter().map(|&dw| (dw, evaluate_row(&d, dw))).collect();
    let edges = (
        curve.first().map_or(f64::NAN, |c| c.1.eps_s),
        curve.last().map_or(f64::NAN, |c| c.1.eps_s),
    );
    let (nu1, nu2) = d.target_freqs();
    Ok(ChainSummary {
        splitting_10: nu2 - nu1,
        delta_c: d.delta_c,
        delta0: d.delta0(),
        omega0: d.pulse().omega0,
        eps_s_design: d.breakdown.eps_s,
        eps_s_edges: edges,
        sensitivity: sensitivity(&d, spec.half_range)?,
        curve,
    })
}

/// One design per (spacing, N); a failed design is recorded and skipped.
pub fn chain_study(base: &SystemConfig, spacings: &[f64], ns: &[usize], spec: &ChainStudySpec) -> Vec<ChainPoint> {
    spacings
        .iter()
        .flat_map(|&s| ns.iter().map(move |&n| (s, n)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(spacing, n_ions)| ChainPoint {
            spacing,
            n_ions,
            outcome: chain_point(base, spacing, n_ions, spec).map_err(|e| e.to_string()),
        })
        .collect()
}

pub fn write_chain_summary_csv<W: Write>(w: W, meta: &Metadata, points: &[ChainPoint]) -> Result<()> {
    let header = [
        "spacing_um",
        "n_ions",
        "splitting_10_khz",
        "delta_c_hz",
        "delta0_khz",
        "omega0_hz",
        "eps_s_design",
        "eps_s_lo_edge",
        "eps_s_hi_edge",
        "domega_star_khz",
        "eps_s_min",
        "eps_s_max",
        "status",
    ];
    write_table(
        w,
        meta,
        &header,
        points.iter().map(|p| {
            let mut v = vec![fmt_num(p.spacing * 1e6), p.n_ions.to_string()];
            match &p.outcome {
                Ok(s) => {
                    v.extend([
                        fmt_num(angular_to_hz(s.splitting_10) / 1e3),
                        fmt_num(angular_to_hz(s.delta_c)),
                        fmt_num(angular_to_hz(s.delta0) / 1e3),
                        fmt_num(angular_to_hz(s.omega0)),
                        fmt_num(s.eps_s_design),
                        fmt_num(s.eps_s_edges.0),
                        fmt_num(s.eps_s_edges.1),
                        fmt_num(angular_to_hz(s.sensitivity.delta_omega_star) / 1e3),
                        fmt_num(s.sensitivity.eps_s_min),
                        fmt_num(s.sensitivity.eps_s_max),
                        "ok".into(),
                    ]);
                }
                Err(e) => {
                    v.extend(std::iter::repeat_n("nan".to_string(), 10));
                    v.push(format!("failed:{e}"));
                }
            }
            v
        }),
    )
}

pub fn write_chain_curves_csv<W: Write>(w: W, meta: &Metadata, points: &[ChainPoint]) -> Result<()> {
    let rows = points.iter().filter_map(|p| p.outcome.as_ref().ok().map(|s| (p, s))).flat_map(|(p, s)| {
        s.curve.iter().map(move |(dw, e)| {
            let mut v = vec![fmt_num(p.spacing * 1e6), p.n_ions.to_string(), fmt_num(angular_to_hz(*dw) / 1e3)];
            v.extend(e.cells());
            v
        })
    });
    write_table(w, meta, &["spacing_um", "n_ions", "domega_khz", "eps_d", "eps_r", "eps_s", "fidelity", "flag"], rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityReport {
    pub delta_omega: f64,
    pub scan: ParityScan,
    /// (ρ00 + ρ33)/2 + A/2.
    pub estimate: f64,
    pub exact: f64,
}

pub fn parity_report(design: &GateDesign, delta_omega: f64, n_phi: usize) -> Result<ParityReport> {
    let b = evaluate_with_error(design, delta_omega)?;
    let scan = parity_scan(&b.rho, &phase_grid(n_phi))?;
    Ok(ParityReport { delta_omega, estimate: fidelity_estimate(&b.rho, scan.amplitude), exact: b.fidelity, scan })
}

pub fn write_parity_csv<W: Write>(w: W, meta: &Metadata, report: &ParityReport) -> Result<()> {
    let mut meta = meta.clone();
    meta.push("domega_hz", fmt_num(angular_to_hz(report.delta_omega)))
        .push("parity_amplitude", fmt_num(report.scan.amplitude))
        .push("parity_phase_rad", fmt_num(report.scan.phase))
        .push("fidelity_estimate", fmt_num(report.estimate))
        .push("fidelity_exact", fmt_num(report.exact));
    write_table(
        w,
        &meta,
        &["phi_rad", "parity"],
        report.scan.phi.iter().zip(&report.scan.parity).map(|(p, v)| vec![fmt_num(*p), fmt_num(*v)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_ends() {
        let g = Grid::new(-60.0, 180.0, 601);
        let v = g.values();
        assert_eq!(v.len(), 601);
        assert_eq!(v[0], -60.0);
        assert_eq!(v[600], 180.0);
        assert!((v[150] - 0.0).abs() < 1e-12);
        assert_eq!(Grid::with_step(-10.0, 10.0, 0.5).points, 41);
        assert_eq!(Grid::new(1.0, 2.0, 1).values(), vec![1.0]);
    }

    #[test]
    fn window_interpolates_in_log() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 1e-2, 1e-4, 1e-2, 1.0];
        let (a, b) = window_below(&x, &y, 1e-3).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b - 2.5).abs() < 1e-12);
        assert_eq!(window_below(&x, &y, 1e-5), None);
        assert_eq!(window_below(&x, &y, 10.0), Some((0.0, 4.0)));
    }

    #[test]
    fn flags_name_the_mode() {
        let e = Error::Resonance { mode: 3, detuning_hz: 0.0 };
        assert_eq!(flag_for(&e), "resonance:mode3");
    }
}
