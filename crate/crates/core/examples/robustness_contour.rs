//! Coarse map of eps_s over Gaussian width and frequency error.

use msgate::experiments::{contour, window_below, Grid};
use msgate::{hz_to_angular, SystemConfig};

fn main() {
    let z = Grid::new(10e-6, 50e-6, 9);
    let dw = Grid::new(hz_to_angular(-10e3), hz_to_angular(10e3), 11);
    let rows = contour(&SystemConfig::three_ion_reference(), &z, &dw);
    print!("{:>6}", "z_us");
    for x in Grid::new(-10.0, 10.0, 11).values() {
        print!("{x:>6.0}");
    }
    println!("   (kHz, log10 eps_s)");
    for chunk in rows.chunks(11) {
        print!("{:6.1}", chunk[0].z * 1e6);
        for r in chunk {
            print!("{:>6.1}", r.errors.eps_s.log10());
        }
        let x: Vec<f64> = Grid::new(-10.0, 10.0, 11).values();
        let y: Vec<f64> = chunk.iter().map(|r| r.errors.eps_s).collect();
        match window_below(&x, &y, 1e-3) {
            Some((a, b)) => println!("   below 1e-3 on [{a:.1}, {b:.1}]"),
            None => println!(),
        }
    }
}
