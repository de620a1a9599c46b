//! Zak transform `(Z_λ f)(t,ν) = λ^{1/2} Σ_k f(λ(t−k)) e^{2πikν}` of step
//! functions, and windows prescribed through their Zak data.
//!
//! Sample points are rational: `t_i = (2i+1)/(2T)` and `ν_j = j/V`, so every
//! phase `e^{2πikν_j}` is looked up from an integer residue `kj mod V`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::correlations::CorrelationFamily;
use crate::error::{Error, Result};
use crate::model::{
    cis, compensated_sum, rational_f64, CompensatedSum, GridSpec, LatticeParams,
    PeriodicStepFunction, Rational, Run, StepFunction, C64,
};

/// Table of `e^{2πim/V}` for `m = 0..V`.
pub(crate) struct PhaseTable {
    v: i64,
    table: Vec<C64>,
}

impl PhaseTable {
    pub(crate) fn new(v: i64) -> Self {
        let table = (0..v).map(|m| cis(m as f64 / v as f64)).collect();
        Self { v, table }
    }

    /// `e^{2πi n/V}` for any integer `n`.
    pub(crate) fn at(&self, n: i64) -> C64 {
        self.table[n.rem_euclid(self.v) as usize]
    }
}

/// Zak data cellwise constant on `[0,1)²`: `values[i·nu_cells + j]` on
/// `t ∈ [i/t_cells, (i+1)/t_cells)`, `ν ∈ [j/nu_cells, (j+1)/nu_cells)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakWindow {
    pub t_cells: usize,
    pub nu_cells: usize,
    pub values: Vec<C64>,
    pub lambda: Rational,
}

impl ZakWindow {
    pub fn new(t_cells: usize, nu_cells: usize, values: Vec<C64>, lambda: Rational) -> Result<Self> {
        if t_cells == 0 || nu_cells == 0 {
            return Err(Error::Input("Zak window needs at least one cell".into()));
        }
        if values.len() != t_cells * nu_cells {
            return Err(Error::Input(format!(
                "expected {} Zak values, got {}",
                t_cells * nu_cells,
                values.len()
            )));
        }
        if *lambda.numer() <= 0 {
            return Err(Error::Input("λ must be positive".into()));
        }
        Ok(Self {
            t_cells,
            nu_cells,
            values,
            lambda,
        })
    }

    /// Real nonnegative data depending on ν only.
    pub fn from_nu_profile(values: &[f64]) -> Self {
        let v = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(1, values.len(), v, Rational::from_integer(1)).expect("nonempty profile")
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.nu_cells + j]
    }

    pub fn to_file(&self) -> ZakFile {
        ZakFile {
            t_cells: self.t_cells,
            nu_cells: self.nu_cells,
            re: self.values.iter().map(|z| z.re).collect(),
            im: self.values.iter().map(|z| z.im).collect(),
        }
    }

    /// Materialize `g` on `[λk_lo, λ(k_hi+1))` from the Fourier coefficients
    /// of the Zak data. Requires `t_cells/λ` to be an integer.
    pub fn to_step_function(&self, k_trunc: i64) -> Result<StepFunction> {
        let den = Rational::from_integer(self.t_cells as i64) / self.lambda;
        if !den.is_integer() {
            return Err(Error::Grid(format!(
                "t_cells = {} is not a multiple of λ = {}",
                self.t_cells, self.lambda
            )));
        }
        let grid = GridSpec::new(den.to_integer())?;
        let coeffs = window_from_zak(self, -k_trunc, k_trunc);
        let mut runs = Vec::new();
        for (k, vals) in coeffs {
            for (i, v) in vals.into_iter().enumerate() {
                let cell = k * self.t_cells as i64 + i as i64;
                runs.push(Run {
                    start: cell,
                    end: cell + 1,
                    value: v,
                });
            }
        }
        StepFunction::from_runs(grid, runs)
    }
}

/// Zak file: `{ "t_cells": int, "nu_cells": int, "re": [..], "im": [..] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZakFile {
    pub t_cells: usize,
    pub nu_cells: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ZakFile {
    pub fn to_zak_window(&self) -> Result<ZakWindow> {
        if self.re.len() != self.im.len() {
            return Err(Error::Input("re and im lengths differ".into()));
        }
        let v = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        ZakWindow::new(self.t_cells, self.nu_cells, v, Rational::from_integer(1))
    }
}

/// Samples of `Z_λ f` on `t_i = (i+½)/T`, `ν_j = j/V` with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakSampleGrid {
    pub lambda: Rational,
    pub t_points: Vec<f64>,
    pub nu_points: Vec<f64>,
    /// `values[i·V + j]`.
    pub values: Vec<C64>,
    /// `max |Zf(t+1,ν) − e^{2πiν}Zf(t,ν)|`.
    pub quasi_periodicity_residual: f64,
    /// `|Σ|Zf|²/(TV) − ‖f‖²|`.
    pub unitarity_residual: f64,
}

impl ZakSampleGrid {
    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.nu_points.len() + j]
    }
}

/// `Z_λ f` at `t = t_num/t_den` and `ν = j/V`; errors when a term lands on a
/// cell boundary.
fn zak_at(
    f: &StepFunction,
    lambda: Rational,
    t_num: i64,
    t_den: i64,
    j: i64,
    phases: &PhaseTable,
) -> Result<C64> {
    if f.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let d = f.grid().den as i128;
    let (ln, ld) = (*lambda.numer() as i128, *lambda.denom() as i128);
    // Cell of λ(t − k): floor(λ_n·D·(t_num − k·t_den) / (λ_d·t_den)).
    let den = ld * t_den as i128;
    let t = t_num as f64 / t_den as f64;
    let lam = rational_f64(lambda);
    let step = f.grid().step_f64();
    let k_lo = (t - f.hi() as f64 * step / lam).floor() as i64 - 1;
    let k_hi = (t - f.lo() as f64 * step / lam).ceil() as i64 + 1;
    let mut s = CompensatedSum::new();
    for k in k_lo..=k_hi {
        let num = ln * d * (t_num as i128 - k as i128 * t_den as i128);
        if num.rem_euclid(den) == 0 {
            return Err(Error::Grid(format!(
                "sample t = {t_num}/{t_den} hits a cell boundary for λ = {lambda}"
            )));
        }
        let cell = num.div_euclid(den) as i64;
        let v = f.value_at(cell);
        if v != C64::new(0.0, 0.0) {
            s.add(v * phases.at(k * j));
        }
    }
    Ok(s.value() * lam.sqrt())
}

pub fn zak_transform(
    f: &StepFunction,
    lambda: Rational,
    t_points: usize,
    nu_points: usize,
) -> Result<ZakSampleGrid> {
    if *lambda.numer() <= 0 {
        return Err(Error::Input("λ must be positive".into()));
    }
    if t_points == 0 || nu_points == 0 {
        return Err(Error::Input("need at least one sample in t and ν".into()));
    }
    let (tn, vn) = (t_points as i64, nu_points as i64);
    let phases = PhaseTable::new(vn);
    let mut values = Vec::with_capacity(t_points * nu_points);
    let mut quasi = 0.0f64;
    for i in 0..tn {
        for j in 0..vn {
            let z = zak_at(f, lambda, 2 * i + 1, 2 * tn, j, &phases)?;
            let z1 = zak_at(f, lambda, 2 * (i + tn) + 1, 2 * tn, j, &phases)?;
            quasi = quasi.max((z1 - phases.at(j) * z).norm());
            values.push(z);
        }
    }
    let energy = compensated_sum(values.iter().map(|z| C64::new(z.norm_sqr(), 0.0))).re
        / (t_points * nu_points) as f64;
    Ok(ZakSampleGrid {
        lambda,
        t_points: (0..tn).map(|i| (2 * i + 1) as f64 / (2 * tn) as f64).collect(),
        nu_points: (0..vn).map(|j| j as f64 / vn as f64).collect(),
        values,
        quasi_periodicity_residual: quasi,
        unitarity_residual: (energy - f.norm_l2_sq()).abs(),
    })
}

/// `∫_0^1 s(ν) e^{2πikν} dν` for a step function `s` with `V` equal cells.
fn step_fourier_coefficient(cells: &[C64], k: i64, phases: &PhaseTable) -> C64 {
    let v = cells.len() as i64;
    if k == 0 {
        return compensated_sum(cells.iter().copied()) / v as f64;
    }
    let denom = C64::new(0.0, 2.0 * PI * k as f64);
    compensated_sum(
        cells
            .iter()
            .enumerate()
            .map(|(j, &c)| c * (phases.at(k * (j as i64 + 1)) - phases.at(k * j as i64))),
    ) / denom
}

/// `k ↦` values of `g(λ(t+k))` on the `t`-cells, for `k_lo ≤ k ≤ k_hi`.
pub fn window_from_zak(zw: &ZakWindow, k_lo: i64, k_hi: i64) -> BTreeMap<i64, Vec<C64>> {
    let phases = PhaseTable::new(zw.nu_cells as i64);
    let scale = 1.0 / rational_f64(zw.lambda).sqrt();
    let mut out = BTreeMap::new();
    for k in k_lo..=k_hi {
        let vals = (0..zw.t_cells)
            .map(|i| {
                let row = &zw.values[i * zw.nu_cells..(i + 1) * zw.nu_cells];
                step_fourier_coefficient(row, k, &phases) * scale
            })
            .collect();
        out.insert(k, vals);
    }
    out
}

/// `G_k(t) = ∫|Zg(t,ν)|² e^{2πikν} dν` for `|k| ≤ k_max` (lattice a = b = 1).
pub fn gk_from_zak(zw: &ZakWindow, k_max: i64) -> Result<CorrelationFamily> {
    let grid = GridSpec::new(zw.t_cells as i64)?;
    let phases = PhaseTable::new(zw.nu_cells as i64);
    let mut entries = BTreeMap::new();
    let rows: Vec<Vec<C64>> = (0..zw.t_cells)
        .map(|i| {
            zw.values[i * zw.nu_cells..(i + 1) * zw.nu_cells]
                .iter()
                .map(|z| C64::new(z.norm_sqr(), 0.0))
                .collect()
        })
        .collect();
    for k in -k_max..=k_max {
        let vals: Vec<C64> = rows
            .iter()
            .map(|row| step_fourier_coefficient(row, k, &phases))
            .collect();
        entries.insert(k, PeriodicStepFunction::from_values(grid, &vals));
    }
    CorrelationFamily::from_entries(LatticeParams::integer(1, 1), grid, entries, false, Some(k_max))
}

/// `max |Zg|²`: any upper frame bound of `(g, 1, 1)` is at least this.
pub fn zak_modulus_bound(zw: &ZakWindow) -> f64 {
    zw.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::correlation_family;
    use crate::model::rational;

    fn one() -> Rational {
        Rational::from_integer(1)
    }

    #[test]
    fn zak_of_indicator_is_one() {
        let f = StepFunction::from_real(GridSpec { den: 4 }, 0, &[1.0; 4]);
        let z = zak_transform(&f, one(), 8, 16).unwrap();
        assert!(z.values.iter().all(|&v| v == C64::new(1.0, 0.0)));
        assert!(z.quasi_periodicity_residual < 1e-15);
        assert!(z.unitarity_residual < 1e-15);
    }

    #[test]
    fn zak_of_ex413_is_nu_independent() {
        let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
        let z = zak_transform(&g, one(), 4, 8).unwrap();
        for i in 0..4 {
            let want = if i < 2 { 1.0 } else { 0.5 };
            for j in 0..8 {
                assert_eq!(z.value(i, j), C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn boundary_samples_are_rejected() {
        let f = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
        // t = 1/4 with λ = 2 maps to 1/2, a cell edge.
        assert!(zak_transform(&f, rational(2, 1), 2, 4).is_err());
    }

    #[test]
    fn window_from_zak_examples() {
        let ex38 = ZakWindow::from_nu_profile(&[1.0, 0.5, 0.5, 1.0]);
        let w = window_from_zak(&ex38, -6, 6);
        assert!((w[&0][0] - C64::new(0.75, 0.0)).norm() < 1e-15);
        for k in 1..=6i64 {
            let want = (0.5 * PI * k as f64).sin() / (2.0 * PI * k as f64);
            assert!((w[&k][0] - C64::new(want, 0.0)).norm() < 1e-15, "k = {k}");
            assert!((w[&-k][0] - C64::new(want, 0.0)).norm() < 1e-15, "k = {}", -k);
        }
        let ones = ZakWindow::from_nu_profile(&[1.0; 4]);
        let w = window_from_zak(&ones, -3, 3);
        assert_eq!(w[&0][0], C64::new(1.0, 0.0));
        assert!((-3..=3).filter(|&k| k != 0).all(|k| w[&k][0].norm() < 1e-15));
        // e^{2πiν} sampled as cell averages lands on k = −1.
        let v = 64;
        let vals: Vec<C64> = (0..v)
            .map(|j| {
                let (a, b) = (j as f64 / v as f64, (j + 1) as f64 / v as f64);
                (cis(b) - cis(a)) / C64::new(0.0, 2.0 * PI * (b - a))
            })
            .collect();
        let zw = ZakWindow::new(1, v, vals, one()).unwrap();
        let w = window_from_zak(&zw, -3, 3);
        let (kbest, _) = w
            .iter()
            .map(|(k, x)| (*k, x[0].norm()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert_eq!(kbest, -1);
    }

    #[test]
    fn gk_from_zak_examples() {
        let ones = ZakWindow::from_nu_profile(&[1.0; 3]);
        let fam = gk_from_zak(&ones, 5).unwrap();
        assert_eq!(fam.get(0).value_at(0), C64::new(1.0, 0.0));
        assert!((1..=5).all(|k| fam.get(k).sup_abs() < 1e-15 && fam.get(-k).sup_abs() < 1e-15));
        assert!(!fam.exact_tail);

        let ex38 = ZakWindow::from_nu_profile(&[1.0, 0.5, 0.5, 1.0]);
        let fam = gk_from_zak(&ex38, 41).unwrap();
        assert!((fam.get(0).value_at(0).re - 0.625).abs() < 1e-15);
        for k in 1..=41i64 {
            let want = if k % 2 == 1 { 0.75 / (PI * k as f64) } else { 0.0 };
            assert!((fam.get(k).sup_abs() - want).abs() < 1e-15);
        }
        assert_eq!(zak_modulus_bound(&ex38), 1.0);
    }

    /// Midpoint quadrature of `∫ s(ν) e^{2πikν} dν` on a fine grid.
    fn quadrature(s: impl Fn(f64) -> f64, k: i64, n: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let nu = (j as f64 + 0.5) / n as f64;
            acc += cis(k as f64 * nu) * s(nu);
        }
        acc / n as f64
    }

    #[test]
    fn ex57_coefficients_against_quadrature() {
        // ρ = χ_[0,½) + ½χ_[½,1): |ρ_k| = 1/(2π|k|) for odd k.
        let rho = |nu: f64| if nu < 0.5 { 1.0 } else { 0.5 };
        let zw = ZakWindow::from_nu_profile(&[1.0, 0.5f64.sqrt()]);
        let fam = gk_from_zak(&zw, 15).unwrap();
        for k in -15..=15i64 {
            let q = quadrature(rho, k, 200_000);
            let got = fam.get(k).value_at(0);
            assert!((got - q).norm() < 1e-6, "k = {k}");
            if k % 2 != 0 {
                assert!((got.norm() - 1.0 / (2.0 * PI * k.abs() as f64)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn round_trip_with_correlation_family() {
        // G_k from the sampled Zak transform (DFT in ν) equals the direct sums.
        let g = StepFunction::new(
            GridSpec { den: 2 },
            -1,
            &[
                C64::new(0.3, 0.1),
                C64::new(1.0, 0.0),
                C64::new(-0.5, 0.2),
                C64::new(0.0, 0.7),
                C64::new(0.25, 0.0),
            ],
        );
        let lat = LatticeParams::integer(1, 1);
        let fam = correlation_family(&g, &lat).unwrap();
        let v = 32;
        let z = zak_transform(&g, one(), 2, v).unwrap();
        let phases = PhaseTable::new(v as i64);
        for i in 0..2 {
            for k in -4..=4i64 {
                let s = compensated_sum(
                    (0..v).map(|j| phases.at(k * j as i64) * z.value(i, j).norm_sqr()),
                ) / v as f64;
                assert!((s - fam.get(k).value_at(i as i64)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn materialized_window_matches_coefficients() {
        let ex38 = ZakWindow::from_nu_profile(&[1.0, 0.5, 0.5, 1.0]);
        let g = ex38.to_step_function(8).unwrap();
        assert_eq!(g.grid().den, 1);
        assert!((g.value_at(0).re - 0.75).abs() < 1e-15);
        assert!((g.value_at(1).re - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }
}
