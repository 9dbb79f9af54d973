//! Direct Schrodinger integration of the two target modes against the
//! closed-form propagator. Takes a few seconds in release mode.

use msgate::oracle::{oracle_for_design, target_spec, OracleSpec};
use msgate::{design_gate, hz_to_angular, SystemConfig};

fn main() -> msgate::Result<()> {
    let d = design_gate(&SystemConfig::three_ion_reference())?;
    let r = oracle_for_design(&d, &target_spec(&d), 0.0)?;
    println!("two modes: 1 - overlap = {:.3e}, leakage = {:.1e}", 1.0 - r.overlap, r.leakage);
    println!("theta closed form {:.9}, numeric {:.9}", r.theta_analytic, r.theta_numeric);

    let spec = OracleSpec { n_max: 10, ..OracleSpec::new(vec![d.target_indices.0]) };
    let r = oracle_for_design(&d, &spec, hz_to_angular(-20e3))?;
    let b = r.b_numeric.expect("single mode determines B");
    println!("zig-zag at -20 kHz: B closed form {:.6}, numeric {:.6}", r.b_analytic[0], b[0]);
    println!("alpha closed form {:.6}, numeric {:.6}", r.alpha_analytic[0], r.alpha_numeric[0]);
    Ok(())
}
