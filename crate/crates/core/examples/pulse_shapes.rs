//! The three envelopes side by side, then one of them as CSV.

use msgate::pulse::write_samples_csv;
use msgate::report::Metadata;
use msgate::{hz_to_angular, PulseShape};

fn main() -> msgate::Result<()> {
    let (omega0, tau, z) = (hz_to_angular(100e3), 200e-6, 25e-6);
    let shapes = [
        ("square", PulseShape::square(omega0, tau)?),
        ("gaussian", PulseShape::trunc_gaussian(omega0, tau, z)?),
        ("spline", PulseShape::spline_gaussian(omega0, tau, z, 13)?),
    ];
    println!("{:>8} {:>10} {:>10} {:>10}", "t_us", "square", "gaussian", "spline");
    for i in 0..=20 {
        let t = tau * i as f64 / 20.0;
        let v: Vec<String> = shapes.iter().map(|(_, p)| format!("{:10.5}", p.unit_amplitude(t))).collect();
        println!("{:8.1} {}", t * 1e6, v.join(" "));
    }
    let (_, spline) = &shapes[2];
    let (knots, values) = spline.spline_knots().expect("spline pulse");
    println!("\n{} knots, first {:.4} at {:.1} us", knots.len(), values[0], knots[0] * 1e6);

    let mut out = Vec::new();
    write_samples_csv(&mut out, &Metadata::new("example pulse_shapes"), spline, 11)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
