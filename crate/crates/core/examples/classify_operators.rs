//! Tightness, equality of frame operators, the Schur bound, CC propagation and
//! extension of the frame operator to L¹, L^∞ and the Wiener space.

use gaborkit::classify::{
    cc_propagation_check, equal_frame_operator, lp_extension_check, schur_upper_bound,
    tight_check, wiener_extension_check, ShiftInvariantSystem,
};
use gaborkit::model::{rational, GridSpec, LatticeParams, StepFunction};

fn main() -> gaborkit::Result<()> {
    let chi = StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0]);
    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let one = LatticeParams::integer(1, 1);
    let half = LatticeParams::new(rational(1, 2), rational(1, 1))?;

    println!("tight χ: {}", tight_check(&chi, &one)?.to_json());
    println!("tight g: {}", tight_check(&g, &one)?.to_json());

    let h = StepFunction::from_real(GridSpec { den: 2 }, 0, &[2f64.sqrt()]);
    let lat_h = LatticeParams::new(rational(1, 2), rational(2, 1))?;
    println!("equal: {}", equal_frame_operator(&chi, &one, &h, &lat_h)?.to_json());

    let sys = ShiftInvariantSystem::new(vec![g.clone(), chi.clone()], rational(1, 2))?;
    println!("schur: {}", schur_upper_bound(&sys, 32, 64)?.to_json());

    println!("propagation: {}", cc_propagation_check(&g, &half, 3)?.to_json());
    println!("lp: {}", lp_extension_check(&g, &half, 20, 1)?.to_json());
    println!("wiener: {}", wiener_extension_check(&g, &half, 20, 1)?.to_json());
    Ok(())
}
