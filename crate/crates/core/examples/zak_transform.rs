//! Zak transform samples of a step window, and windows and `G_k` recovered from Zak data.

use gaborkit::gallery::{self, GalleryObject};
use gaborkit::model::{rational, GridSpec, StepFunction};
use gaborkit::zak::{gk_from_zak, window_from_zak, zak_modulus_bound, zak_transform};

fn main() -> gaborkit::Result<()> {
    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let z = zak_transform(&g, rational(1, 1), 4, 8)?;
    println!(
        "Zg on a {}×{} grid; quasi-periodicity residual {:.2e}, unitarity residual {:.2e}",
        z.t_points.len(), z.nu_points.len(), z.quasi_periodicity_residual, z.unitarity_residual
    );

    let GalleryObject::Zak(zw) = gallery::build("ex3.8", None)?.object else {
        unreachable!("ex3.8 is Zak data")
    };
    let w = window_from_zak(&zw, 0, 2);
    for (k, v) in &w {
        println!("g(t + {k}) = {:.6}", v[0].re);
    }
    println!("sup |Zg|² = {}", zak_modulus_bound(&zw));
    let fam = gk_from_zak(&zw, 64)?;
    let sum: f64 = fam.entries.values().map(|e| e.sup_abs()).sum();
    println!("Σ_{{|k|≤64}} ‖G_k‖_∞ = {sum:.4} (grows without bound as K increases)");
    Ok(())
}
