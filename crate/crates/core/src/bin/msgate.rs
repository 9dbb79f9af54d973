use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msgate::config::{hz_to_angular, PulseKind, SystemConfig};
use msgate::experiments::{
    chain_study, contour, parity_report, reference_designs, sweep_detuning, write_chain_curves_csv,
    write_chain_summary_csv, write_contour_csv, write_parity_csv, write_sweep_csv, ChainStudySpec, Grid,
};
use msgate::oracle::{oracle_for_design, target_spec, OracleSpec};
use msgate::report::{fmt_num, Metadata};
use msgate::{design_gate, load_config, Result};

#[derive(Parser)]
#[command(name = "msgate", version, about = "Frequency-robust Molmer-Sorensen gate design")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// System config (TOML). Defaults to the three-ion reference system.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the balance point and calibrate the amplitude.
    Design {
        #[arg(long)]
        pulse: Option<String>,
        /// Fixed detuning from the lowest target mode instead of balancing.
        #[arg(long, allow_hyphen_values = true)]
        delta0_khz: Option<f64>,
    },
    /// Error metrics against carrier detuning for the three reference pulses.
    SweepDetuning {
        #[arg(long, default_value_t = -60.0, allow_hyphen_values = true)]
        lo_khz: f64,
        #[arg(long, default_value_t = 180.0, allow_hyphen_values = true)]
        hi_khz: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
    },
    /// ε over Gaussian width and frequency offset.
    Contour {
        #[arg(long, default_value_t = 5.0)]
        z_lo_us: f64,
        #[arg(long, default_value_t = 60.0)]
        z_hi_us: f64,
        #[arg(long, default_value_t = 100)]
        z_points: usize,
        /// δω spans ± this value.
        #[arg(long, default_value_t = 10.0)]
        domega_khz: f64,
        #[arg(long, default_value_t = 100)]
        domega_points: usize,
    },
    /// Designs and sensitivity across chain lengths and spacings.
    ChainStudy {
        #[arg(long, value_delimiter = ',', default_value = "3,3.5,4,4.5")]
        spacings_um: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 33)]
        n_max: usize,
        #[arg(long, default_value_t = 10.0)]
        domega_khz: f64,
        #[arg(long, default_value_t = 100.0)]
        domega_step_hz: f64,
        #[arg(long, default_value_t = 3.0)]
        half_range_khz: f64,
        /// Also write the per-design ε curves here.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Parity scan of the designed gate and the fidelity estimate.
    Parity {
        #[arg(long, default_value_t = 64)]
        phases: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        domega_khz: f64,
    },
    /// Truncated-Fock integration compared with the closed form.
    Oracle {
        /// Mode indices (radial-a first); defaults to the two target modes.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 15)]
        n_max: usize,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        domega_khz: f64,
    },
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn metadata(cfg: &SystemConfig) -> Metadata {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut m = Metadata::new(&args.join(" "));
    m.config(&cfg.to_toml_string());
    m
}

fn khz(x: f64) -> f64 {
    hz_to_angular(x * 1e3)
}

fn run(cli: Cli) -> Result<()> {
    if cli.common.workers > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.common.workers).build_global();
    }
    let mut cfg = match &cli.common.config {
        Some(p) => load_config(p)?,
        None => SystemConfig::three_ion_reference(),
    };
    let out = &cli.common.out;
    match cli.command {
        Command::Design { pulse, delta0_khz } => {
            if let Some(p) = pulse {
                cfg.pulse.kind = PulseKind::parse(&p)?;
            }
            if delta0_khz.is_some() {
                cfg.delta0_hz = delta0_khz.map(|d| d * 1e3);
            }
            let d = design_gate(&cfg)?;
            let mut w = open_out(out)?;
            w.write_all(d.record().to_toml_string().as_bytes())?;
            w.flush()?;
        }
        Command::SweepDetuning { lo_khz, hi_khz, points } => {
            let designs = reference_designs(&cfg)?;
            let grid = Grid::new(khz(lo_khz), khz(hi_khz), points);
            let rows = sweep_detuning(&designs, &grid);
            let mut meta = metadata(&cfg);
            meta.push("grid_delta0_khz", Grid::new(lo_khz, hi_khz, points).describe("kHz"));
            for (name, d) in &designs {
                meta.push(&format!("design_{name}_delta0_khz"), fmt_num(msgate::angular_to_hz(d.delta0()) / 1e3));
            }
            write_sweep_csv(open_out(out)?, &meta, &rows)?;
        }
        Command::Contour { z_lo_us, z_hi_us, z_points, domega_khz, domega_points } => {
            let zg = Grid::new(z_lo_us * 1e-6, z_hi_us * 1e-6, z_points);
            let dg = Grid::new(-khz(domega_khz), khz(domega_khz), domega_points);
            let rows = contour(&cfg, &zg, &dg);
            let mut meta = metadata(&cfg);
            meta.push("grid_z_us", Grid::new(z_lo_us, z_hi_us, z_points).describe("us"))
                .push("grid_domega_khz", Grid::new(-domega_khz, domega_khz, domega_points).describe("kHz"));
            write_contour_csv(open_out(out)?, &meta, &rows)?;
        }
        Command::ChainStudy { spacings_um, n_min, n_max, domega_khz, domega_step_hz, half_range_khz, curves } => {
            let spec = ChainStudySpec {
                delta_omega: Grid::with_step(-khz(domega_khz), khz(domega_khz), hz_to_angular(domega_step_hz)),
                half_range: khz(half_range_khz),
            };
            let spacings: Vec<f64> = spacings_um.iter().map(|s| s * 1e-6).collect();
            let ns: Vec<usize> = (n_min..=n_max).collect();
            let points = chain_study(&cfg, &spacings, &ns, &spec);
            let mut meta = metadata(&cfg);
            meta.push("spacings_um", spacings_um.iter().map(|s| fmt_num(*s)).collect::<Vec<_>>().join(","))
                .push("n_range", format!("{n_min}..={n_max}"))
                .push("grid_domega_khz", Grid::with_step(-domega_khz, domega_khz, domega_step_hz / 1e3).describe("kHz"))
                .push("half_range_khz", fmt_num(half_range_khz));
            write_chain_summary_csv(open_out(out)?, &meta, &points)?;
            if let Some(p) = curves {
                write_chain_curves_csv(open_out(&Some(p))?, &meta, &points)?;
            }
        }
        Command::Parity { phases, domega_khz } => {
            let d = design_gate(&cfg)?;
            let r = parity_report(&d, khz(domega_khz), phases)?;
            write_parity_csv(open_out(out)?, &metadata(&cfg), &r)?;
        }
        Command::Oracle { modes, n_max, steps, domega_khz } => {
            let d = design_gate(&cfg)?;
            let spec = OracleSpec { n_max, steps, modes: modes.unwrap_or_else(|| target_spec(&d).modes) };
            let r = oracle_for_design(&d, &spec, khz(domega_khz))?;
            let mut w = open_out(out)?;
            writeln!(w, "modes = {:?}", spec.modes)?;
            writeln!(w, "n_max = {n_max}\nsteps = {steps}")?;
            writeln!(w, "overlap = {}", fmt_num(r.overlap))?;
            writeln!(w, "infidelity = {}", fmt_num(1.0 - r.overlap))?;
            writeln!(w, "norm = {}", fmt_num(r.norm))?;
            writeln!(w, "leakage = {}", fmt_num(r.leakage))?;
            writeln!(w, "theta_analytic = {}", fmt_num(r.theta_analytic))?;
            writeln!(w, "theta_numeric = {}", fmt_num(r.theta_numeric))?;
            writeln!(w, "propagator_sign = \"{}\"", if r.sign_consistent() { "exp(-i B S^2)" } else { "exp(+i B S^2)" })?;
            for (k, m) in spec.modes.iter().enumerate() {
                let (a, n) = (r.alpha_analytic[k], r.alpha_numeric[k]);
                writeln!(w, "[mode.{m}]")?;
                writeln!(w, "alpha_analytic = [{}, {}]", fmt_num(a.re), fmt_num(a.im))?;
                writeln!(w, "alpha_numeric = [{}, {}]", fmt_num(n.re), fmt_num(n.im))?;
                writeln!(w, "b_analytic = {}", fmt_num(r.b_analytic[k]))?;
                if let Some(b) = &r.b_numeric {
                    writeln!(w, "b_numeric = {}", fmt_num(b[k]))?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.common.config.clone();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let src = config.as_deref().map(Path::display).map(|p| format!(" ({p})")).unwrap_or_default();
            eprintln!("msgate: {e}{src}");
            ExitCode::FAILURE
        }
    }
}
