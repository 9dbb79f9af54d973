//! Phase-space loop of one mode, and how the closing error depends on detuning.

use msgate::trajectory::{trajectory_path, TrajectorySolver};
use msgate::{hz_to_angular, PulseShape, Quadrature};

fn main() -> msgate::Result<()> {
    let pulse = PulseShape::trunc_gaussian(hz_to_angular(100e3), 200e-6, 25e-6)?;
    let delta = hz_to_angular(20e3);
    let path = trajectory_path(&pulse, delta, 41);
    println!("alpha(t) at 20 kHz detuning");
    for (i, a) in path.iter().enumerate().step_by(4) {
        println!("{:6.1} us  {:+.4} {:+.4}i", 200.0 * i as f64 / 40.0, a.re, a.im);
    }

    let solver = TrajectorySolver::new(&pulse, Quadrature::default());
    println!("\n{:>10} {:>12} {:>12}", "delta_khz", "|alpha(tau)|", "B(tau)");
    for khz in [0.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
        let (a, b) = solver.alpha_and_phase(hz_to_angular(khz * 1e3))?;
        println!("{khz:10.1} {:12.4e} {:12.4}", a.norm(), b);
    }
    Ok(())
}
