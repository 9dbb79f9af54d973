//! Gate errors against carrier detuning for the three reference pulses.

use msgate::experiments::{reference_designs, sweep_detuning, write_sweep_csv, Grid};
use msgate::report::Metadata;
use msgate::{angular_to_hz, hz_to_angular, SystemConfig};

fn main() -> msgate::Result<()> {
    let designs = reference_designs(&SystemConfig::three_ion_reference())?;
    for (name, d) in &designs {
        println!("{name:18} delta0 {:8.3} kHz  Omega0/2pi {:7.1} kHz", angular_to_hz(d.delta0()) / 1e3, angular_to_hz(d.pulse().omega0) / 1e3);
    }
    let grid = Grid::new(hz_to_angular(20e3), hz_to_angular(60e3), 9);
    let rows = sweep_detuning(&designs, &grid);
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &Metadata::new("example sweep_detuning"), &rows)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
