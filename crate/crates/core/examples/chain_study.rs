//! Robustness of balanced gates in longer chains at fixed center spacing.
//!
//! `cargo run --release --example chain_study -- 3.0 12`

use msgate::experiments::{chain_study, ChainStudySpec};
use msgate::{angular_to_hz, SystemConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let spacing_um: f64 = args.next().map_or(Ok(3.0), |s| s.parse()).expect("spacing in um");
    let n_max: usize = args.next().map_or(Ok(10), |s| s.parse()).expect("largest chain");

    let ns: Vec<usize> = (2..=n_max).collect();
    let pts = chain_study(&SystemConfig::three_ion_reference(), &[spacing_um * 1e-6], &ns, &ChainStudySpec::default());
    println!("{:>3} {:>10} {:>10} {:>11} {:>11} {:>11}", "N", "split_khz", "delta0_khz", "eps(-10k)", "eps(+10k)", "eps_max");
    for p in &pts {
        match &p.outcome {
            Ok(s) => println!(
                "{:3} {:10.2} {:10.2} {:11.3e} {:11.3e} {:11.3e}",
                p.n_ions,
                angular_to_hz(s.splitting_10) / 1e3,
                angular_to_hz(s.delta0) / 1e3,
                s.eps_s_edges.0,
                s.eps_s_edges.1,
                s.sensitivity.eps_s_max
            ),
            Err(e) => println!("{:3} failed: {e}", p.n_ions),
        }
    }
}
