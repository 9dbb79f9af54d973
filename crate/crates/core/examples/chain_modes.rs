//! Equilibrium positions and radial mode spectrum of a chain.
//!
//! `cargo run --example chain_modes -- 12 3.0` (ions, center spacing in um)

use msgate::modes::{build_modes, write_modes_csv};
use msgate::report::Metadata;
use msgate::{angular_to_hz, Direction, SystemConfig};

fn main() -> msgate::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(5), |s| s.parse()).expect("ion count");
    let spacing_um: f64 = args.next().map_or(Ok(4.5), |s| s.parse()).expect("spacing in um");

    let cfg = SystemConfig::three_ion_reference().with_chain(n, spacing_um * 1e-6);
    let modes = build_modes(&cfg)?;
    let chain = &modes.chain;
    println!("axial trap {:.2} kHz", angular_to_hz(chain.axial_angular_freq) / 1e3);
    let x: Vec<String> = chain.positions().iter().map(|p| format!("{:.3}", p * 1e6)).collect();
    println!("positions (um): {}", x.join(" "));

    let rb = modes.get(Direction::RadialB);
    for k in 0..rb.len() {
        println!("radial_b {k:2} {:>8} {:12.3} kHz", rb.label(k), angular_to_hz(rb.freqs[k]) / 1e3);
    }
    println!("splitting 10: {:.3} kHz", angular_to_hz(rb.splitting_10()) / 1e3);

    let mut out = Vec::new();
    write_modes_csv(&mut out, &Metadata::new("example chain_modes"), &[&modes.radial_a, &modes.radial_b])?;
    println!("\n{}", String::from_utf8_lossy(&out).lines().filter(|l| !l.starts_with('#')).take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
