//! Balanced gate for the three-ion reference system.

use msgate::{angular_to_hz, design_gate, SystemConfig};

fn main() -> msgate::Result<()> {
    let cfg = SystemConfig::three_ion_reference();
    let d = design_gate(&cfg)?;
    let (nu0, nu1) = d.target_freqs();
    println!("zig-zag {:.1} kHz, tilt {:.1} kHz", angular_to_hz(nu0) / 1e3, angular_to_hz(nu1) / 1e3);
    println!("balance point {:.3} kHz above zig-zag", angular_to_hz(d.delta0()) / 1e3);
    println!("Omega0/2pi = {:.1} kHz, theta = {:.6}", angular_to_hz(d.pulse().omega0) / 1e3, d.theta);
    println!(
        "eps_d = {:.3e}  eps_r = {:.3e}  F = {:.9}",
        d.breakdown.eps_d, d.breakdown.eps_r, d.breakdown.fidelity
    );
    print!("{}", d.record().to_toml_string());
    Ok(())
}
