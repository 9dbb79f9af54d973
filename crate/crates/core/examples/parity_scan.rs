//! Parity oscillation of the designed gate, ideal and with a 10 kHz error.

use msgate::experiments::parity_report;
use msgate::{design_gate, hz_to_angular, SystemConfig};

fn main() -> msgate::Result<()> {
    let d = design_gate(&SystemConfig::three_ion_reference())?;
    for khz in [0.0, 5.0, 10.0] {
        let r = parity_report(&d, hz_to_angular(khz * 1e3), 32)?;
        println!(
            "domega {khz:4.1} kHz: A = {:.6}, phase = {:+.4}, estimate {:.6}, exact {:.6}",
            r.scan.amplitude, r.scan.phase, r.estimate, r.exact
        );
    }
    let r = parity_report(&d, 0.0, 16)?;
    for (phi, p) in r.scan.phi.iter().zip(&r.scan.parity) {
        println!("{phi:8.4} {p:+.6}");
    }
    Ok(())
}
