//! Certified frame bounds from the Zak matrix field and the canonical dual window.

use gaborkit::model::{rational, GridSpec, LatticeParams, StepFunction};
use gaborkit::zakmat::{dual_window, ucc_of_dual, window_frame_bounds};

fn main() -> gaborkit::Result<()> {
    let g = StepFunction::from_real(GridSpec { den: 2 }, -1, &[0.5, 1.0, 0.75, 0.25]);
    let lat = LatticeParams::new(rational(1, 2), rational(1, 2))?;

    let br = window_frame_bounds(&g, &lat)?;
    println!("A ∈ [{:.6}, {:.6}], B ∈ [{:.6}, {:.6}]", br.a_low, br.a_high, br.b_low, br.b_high);

    let d = dual_window(&g, &lat, 256, 16)?;
    println!("dual window: {}", serde_json::to_string(&d.window.to_file()).expect("serializes"));
    println!("Wexler–Raz deviation {:.2e} at {:?}", d.wexler_raz.deviation, d.wexler_raz.at);

    let u = ucc_of_dual(&g, &lat, 256, &[1e-2, 1e-6])?;
    println!("dual UCC: {:?}, thresholds {:?}", u.verdict, u.thresholds);
    Ok(())
}
