//! Dense discrete cross-checks: frame matrix, Walnut and Janssen forms, duals,
//! and the bridge from a step window to a finite system.

use gaborkit::model::{rational, DiscreteGaborSystem, GridSpec, LatticeParams, StepFunction, C64};
use gaborkit::oracle::{
    dual_discrete, frame_matrix, janssen_discrete, step_to_discrete, walnut_discrete,
};

fn main() -> gaborkit::Result<()> {
    let window: Vec<C64> = (0..24).map(|j| C64::new((-(j as f64 - 6.0).powi(2) / 8.0).exp(), 0.0)).collect();
    let sys = DiscreteGaborSystem::new(24, 4, 6, window)?;
    let fm = frame_matrix(&sys)?;
    println!("λ ∈ [{:.6}, {:.6}], Hermitian defect {:.1e}", fm.lambda_min, fm.lambda_max, fm.hermitian_defect);

    let f: Vec<C64> = (0..24).map(|j| C64::new((j as f64).sin(), (j as f64).cos())).collect();
    let walnut = walnut_discrete(&sys, &f)?;
    let err = walnut.iter().zip(fm.apply(&f)).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    println!("walnut vs matrix: {err:.2e}; Janssen residual {:.2e}", janssen_discrete(&sys)?.residual);
    println!("dual biorthogonality residual {:.2e}", dual_discrete(&sys)?.biorthogonality_residual);

    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let lat = LatticeParams::new(rational(1, 1), rational(1, 1))?;
    let br = step_to_discrete(&g, &lat, GridSpec { den: 2 }, 8)?;
    let fm = frame_matrix(&br.system)?;
    println!(
        "bridged window: continuous bounds [{}, {}]",
        br.continuous_bound(fm.lambda_min),
        br.continuous_bound(fm.lambda_max)
    );
    Ok(())
}
