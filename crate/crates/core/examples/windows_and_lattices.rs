//! Step windows on exact rational grids and the lattice bookkeeping behind them.

use gaborkit::model::{common_grid, rational, LatticeParams, StepFunction, WindowFile, C64};

fn main() -> gaborkit::Result<()> {
    let lat = LatticeParams::new(rational(2, 3), rational(1, 1))?;
    let grid = common_grid(lat.a, lat.b, 2)?;
    let steps = grid.steps(&lat)?;
    println!("a = {}, b = {}, ab = {}/{}", lat.a, lat.b, lat.p, lat.q);
    println!("grid step 1/{}: a spans {} cells, 1/b spans {}", grid.den, steps.s_a, steps.s_b);

    let g = StepFunction::indicator(grid, rational(0, 1), rational(1, 2), C64::new(1.0, 0.0))?
        .add(&StepFunction::indicator(grid, rational(1, 2), rational(1, 1), C64::new(0.5, 0.0))?)?;
    println!("‖g‖₂² = {}, ‖g‖₁ = {}, ‖g‖_∞ = {}", g.norm_l2_sq(), g.norm_l1(), g.norm_sup());
    println!("g shifted by a: support cells {}..{}", g.translate(lat.a)?.lo(), g.translate(lat.a)?.hi());
    println!("ĝ(0) = {}", g.fourier_transform(0.0));

    let json = serde_json::to_string(&g.to_file()).expect("window serializes");
    println!("window JSON: {json}");
    let back: WindowFile = serde_json::from_str(&json).expect("round trip");
    assert_eq!(back.to_step_function()?, g);
    Ok(())
}
