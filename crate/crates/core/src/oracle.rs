//! Dense ground truth on `ℤ_N`: frame matrices, the discrete Walnut and
//! Janssen forms, duals, and the bridge from step windows.
//!
//! Conventions: atoms `e^{2πimj/L} w(j − n·a_d)`; the adjoint lattice has
//! time step `L` and modulations `e^{2πiℓj/a_d}`. With these,
//! `S = L·Σ_k (T_{kL}·) G_k` and `S = (L/a_d) Σ_{k,ℓ} ⟨w, M_ℓT_{kL}w⟩ M_ℓT_{kL}`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    cis, compensated_sum, CompensatedSum, DiscreteGaborSystem, GridSpec, LatticeParams, StepFunction, C64,
};
use crate::zakmat::eigen_extremes;

pub const MAX_ORACLE_N: usize = 512;

#[derive(Clone, Debug)]
pub struct FrameMatrix {
    pub s: DMatrix<C64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub hermitian_defect: f64,
    /// `λ_max/λ_min`, infinite when `λ_min ≤ 0`.
    pub condition: f64,
}

impl FrameMatrix {
    fn from_matrix(s: DMatrix<C64>) -> Self {
        let hermitian_defect = (&s - s.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (lambda_min, lambda_max) = eigen_extremes(&s);
        let condition = if lambda_min > 0.0 {
            lambda_max / lambda_min
        } else {
            f64::INFINITY
        };
        Self {
            s,
            lambda_min,
            lambda_max,
            hermitian_defect,
            condition,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.s + self.s.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        (0..self.s.nrows())
            .map(|i| compensated_sum(f.iter().enumerate().map(|(j, x)| self.s[(i, j)] * x)))
            .collect()
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        return Err(Error::Input(format!(
            "oracle size N = {n} exceeds the cap {MAX_ORACLE_N}"
        )));
    }
    Ok(())
}

fn all_atoms(sys: &DiscreteGaborSystem) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(sys.atom_count());
    for n in 0..sys.shifts() {
        for m in 0..sys.l {
            out.push(sys.atom(m, n)?);
        }
    }
    Ok(out)
}

/// `S = Σ_{m,n} atom·atom*`, assembled term by term.
pub fn frame_matrix(sys: &DiscreteGaborSystem) -> Result<FrameMatrix> {
    check_size(sys.n)?;
    let n = sys.n;
    let mut acc = vec![CompensatedSum::new(); n * n];
    for atom in all_atoms(sys)? {
        for i in 0..n {
            if atom[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                acc[i * n + j].add(atom[i] * atom[j].conj());
            }
        }
    }
    Ok(FrameMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| acc[i * n + j].value())))
}

/// `⟨f, atom⟩` for every atom, ordered by shift then modulation.
pub fn analysis(sys: &DiscreteGaborSystem, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != sys.n {
        return Err(Error::Input("signal length differs from N".into()));
    }
    Ok(all_atoms(sys)?
        .iter()
        .map(|a| compensated_sum(f.iter().zip(a).map(|(x, y)| x * y.conj())))
        .collect())
}

/// `G_k(j) = Σ_n w(j − n·a_d)·conj(w(j − n·a_d − kL))` for `k = 0..N/L`.
pub fn discrete_correlations(sys: &DiscreteGaborSystem) -> Vec<Vec<C64>> {
    let n = sys.n as i64;
    let w = |j: i64| sys.window[j.rem_euclid(n) as usize];
    (0..sys.n / sys.l)
        .map(|k| {
            (0..n)
                .map(|j| {
                    compensated_sum((0..sys.shifts() as i64).map(|s| {
                        let x = j - s * sys.a_d as i64;
                        w(x) * w(x - k as i64 * sys.l as i64).conj()
                    }))
                })
                .collect()
        })
        .collect()
}

/// `(Sf)(j) = L·Σ_k f(j − kL)·G_k(j)`.
pub fn walnut_discrete(sys: &DiscreteGaborSystem, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != sys.n {
        return Err(Error::Input("signal length differs from N".into()));
    }
    let g = discrete_correlations(sys);
    let n = sys.n as i64;
    let l = sys.l as f64;
    Ok((0..n)
        .map(|j| {
            compensated_sum(g.iter().enumerate().map(|(k, gk)| {
                f[(j - k as i64 * sys.l as i64).rem_euclid(n) as usize] * gk[j as usize]
            })) * l
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhDiscrete {
    pub lhs: f64,
    pub f1: f64,
    pub f2: f64,
    pub residual: f64,
}

/// `Σ|⟨f, atom⟩|²` against `F_1 = L Σ|f|²G_0` and `F_2 = L Σ_{k≠0} Re Σ conj(f)·T_{kL}f·G_k`.
pub fn wh_identity_discrete(sys: &DiscreteGaborSystem, f: &[C64]) -> Result<WhDiscrete> {
    let coeffs = analysis(sys, f)?;
    let lhs = compensated_sum(coeffs.iter().map(|c| C64::new(c.norm_sqr(), 0.0))).re;
    let g = discrete_correlations(sys);
    let n = sys.n as i64;
    let l = sys.l as f64;
    let f1 = l * compensated_sum((0..sys.n).map(|j| f[j].norm_sqr() * g[0][j])).re;
    let f2 = l * compensated_sum((1..g.len()).flat_map(|k| {
        let gk = &g[k];
        (0..n).map(move |j| {
            f[j as usize].conj() * f[(j - k as i64 * sys.l as i64).rem_euclid(n) as usize] * gk[j as usize]
        })
    }))
    .re;
    Ok(WhDiscrete {
        lhs,
        f1,
        f2,
        residual: (lhs - f1 - f2).abs(),
    })
}

/// `(M_ℓ T_{kL} h)(j) = e^{2πiℓj/a_d} h(j − kL)`.
fn adjoint_shift(sys: &DiscreteGaborSystem, h: &[C64], k: usize, l: usize) -> Vec<C64> {
    let n = sys.n as i64;
    (0..n)
        .map(|j| {
            let phase = cis(((l as i64 * j) % sys.a_d as i64) as f64 / sys.a_d as f64);
            phase * h[(j - (k * sys.l) as i64).rem_euclid(n) as usize]
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct JanssenReport {
    /// `coefficients[k][ℓ] = ⟨w, M_ℓ T_{kL} w⟩`, `k < N/L`, `ℓ < a_d`.
    pub coefficients: Vec<Vec<C64>>,
    /// Frobenius norm of `S − (L/a_d) Σ coeff·M_ℓT_{kL}`.
    pub residual: f64,
}

pub fn janssen_discrete(sys: &DiscreteGaborSystem) -> Result<JanssenReport> {
    let fm = frame_matrix(sys)?;
    let n = sys.n;
    let mut coefficients = Vec::with_capacity(n / sys.l);
    let mut recon = DMatrix::<C64>::zeros(n, n);
    let scale = sys.l as f64 / sys.a_d as f64;
    for k in 0..n / sys.l {
        let mut row = Vec::with_capacity(sys.a_d);
        for l in 0..sys.a_d {
            let atom = adjoint_shift(sys, &sys.window, k, l);
            let c = compensated_sum(sys.window.iter().zip(&atom).map(|(x, y)| x * y.conj()));
            row.push(c);
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            // M_ℓ T_{kL} as a matrix: row j, column j − kL.
            for j in 0..n {
                let col = (j as i64 - (k * sys.l) as i64).rem_euclid(n as i64) as usize;
                let phase = cis(((l * j) % sys.a_d) as f64 / sys.a_d as f64);
                recon[(j, col)] += c * phase * scale;
            }
        }
        coefficients.push(row);
    }
    Ok(JanssenReport {
        coefficients,
        residual: (&fm.s - recon).norm(),
    })
}

#[derive(Clone, Debug)]
pub struct DualDiscrete {
    pub dual: Vec<C64>,
    /// `‖S·dual − w‖`.
    pub solve_residual: f64,
    /// `max |⟨dual, M_ℓT_{kL}w⟩ − (a_d/L)·δ|`.
    pub biorthogonality_residual: f64,
}

pub fn dual_discrete(sys: &DiscreteGaborSystem) -> Result<DualDiscrete> {
    let fm = frame_matrix(sys)?;
    if fm.lambda_min <= 1e-8 {
        return Err(Error::NotAFrame(format!(
            "smallest eigenvalue {:e} of the frame matrix",
            fm.lambda_min
        )));
    }
    let w = DVector::from_column_slice(&sys.window);
    let x = fm
        .s
        .clone()
        .lu()
        .solve(&w)
        .ok_or_else(|| Error::NotAFrame("frame matrix is singular".into()))?;
    let solve_residual = (&fm.s * &x - &w).norm();
    let dual: Vec<C64> = x.iter().copied().collect();
    let target = sys.a_d as f64 / sys.l as f64;
    let mut worst = 0.0f64;
    for k in 0..sys.n / sys.l {
        for l in 0..sys.a_d {
            let atom = adjoint_shift(sys, &sys.window, k, l);
            let c = compensated_sum(dual.iter().zip(&atom).map(|(x, y)| x * y.conj()));
            let want = if k == 0 && l == 0 { target } else { 0.0 };
            worst = worst.max((c - want).norm());
        }
    }
    Ok(DualDiscrete {
        dual,
        solve_residual,
        biorthogonality_residual: worst,
    })
}

/// Largest eigenvalue by power iteration from a seeded random start.
pub fn power_iteration(s: &DMatrix<C64>, iterations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.nrows();
    let mut v = DVector::<C64>::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v /= C64::new(nv, 0.0);
        let w = s * &v;
        lambda = v.dotc(&w).re;
        v = w;
    }
    lambda
}

/// A step window sampled on `N` cells of a periodic grid, with the factor
/// that maps discrete eigenvalues to continuous frame bounds.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub system: DiscreteGaborSystem,
    pub grid: GridSpec,
    /// Cell measure `Δ`: continuous `S` acts on `N`-periodic step functions as `Δ·S_d`.
    pub delta: f64,
}

impl Bridge {
    pub fn continuous_bound(&self, eigenvalue: f64) -> f64 {
        self.delta * eigenvalue
    }

    /// Cell vector of a step function, periodized over `N` cells.
    pub fn sample(&self, f: &StepFunction) -> Result<Vec<C64>> {
        periodized_cells(f, self.grid, self.system.n)
    }
}

fn periodized_cells(f: &StepFunction, grid: GridSpec, n: usize) -> Result<Vec<C64>> {
    if grid.den % f.grid().den != 0 {
        return Err(Error::Grid(format!(
            "grid 1/{} does not refine 1/{}",
            grid.den,
            f.grid().den
        )));
    }
    let f = f.refine(grid.den)?;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for r in f.runs() {
        for c in r.start..r.end {
            out[c.rem_euclid(n as i64) as usize] += r.value;
        }
    }
    Ok(out)
}

/// Samples `g` on `grid`, periodized over `n` cells; `a` and `1/b` must be whole
/// numbers of cells that divide `n`.
pub fn step_to_discrete(g: &StepFunction, lat: &LatticeParams, grid: GridSpec, n: usize) -> Result<Bridge> {
    check_size(n)?;
    let st = grid.steps(lat)?;
    let (a_d, l) = (st.s_a as usize, st.s_b as usize);
    if n % a_d != 0 || n % l != 0 {
        return Err(Error::Grid(format!(
            "N = {n} is not a multiple of the lattice steps ({a_d}, {l}) cells"
        )));
    }
    let window = periodized_cells(g, grid, n)?;
    Ok(Bridge {
        system: DiscreteGaborSystem::new(n, a_d, l, window)?,
        grid,
        delta: grid.step_f64(),
    })
}

/// Frame matrix `Σ_{m,n} w_{m,n} w_{m,n}*` of the periodized shift-invariant
/// system with generators `gens` and shift `shift_cells`; continuous
/// eigenvalues are `Δ` times these.
pub fn shift_invariant_matrix(
    gens: &[StepFunction],
    shift_cells: usize,
    grid: GridSpec,
    n: usize,
) -> Result<FrameMatrix> {
    check_size(n)?;
    if shift_cells == 0 || n % shift_cells != 0 {
        return Err(Error::Grid(format!("shift {shift_cells} does not divide N = {n}")));
    }
    let mut s = DMatrix::<C64>::zeros(n, n);
    for g in gens {
        let w = periodized_cells(g, grid, n)?;
        for k in 0..n / shift_cells {
            let shifted: Vec<C64> = (0..n)
                .map(|j| w[(j as i64 - (k * shift_cells) as i64).rem_euclid(n as i64) as usize])
                .collect();
            for i in 0..n {
                if shifted[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    s[(i, j)] += shifted[i] * shifted[j].conj();
                }
            }
        }
    }
    Ok(FrameMatrix::from_matrix(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn spike(n: usize) -> Vec<C64> {
        let mut w = vec![C64::new(0.0, 0.0); n];
        w[0] = C64::new(1.0, 0.0);
        w
    }

    #[test]
    fn frame_matrix_examples() {
        let sys = DiscreteGaborSystem::new(12, 1, 12, spike(12)).unwrap();
        let fm = frame_matrix(&sys).unwrap();
        assert!((fm.s.clone() - DMatrix::<C64>::identity(12, 12) * C64::new(12.0, 0.0)).norm() < 1e-10);

        let c = C64::new(1.0 / 12f64.sqrt(), 0.0);
        let sys = DiscreteGaborSystem::new(12, 12, 1, vec![c; 12]).unwrap();
        let fm = frame_matrix(&sys).unwrap();
        assert!(fm.lambda_min.abs() < 1e-12 && fm.condition.is_infinite());

        let (n, a_d) = (12, 3);
        let mut w = vec![C64::new(0.0, 0.0); n];
        for x in w.iter_mut().take(a_d) {
            *x = C64::new(1.0 / (a_d as f64).sqrt(), 0.0);
        }
        let sys = DiscreteGaborSystem::new(n, a_d, n / a_d, w).unwrap();
        let fm = frame_matrix(&sys).unwrap();
        let lam = fm.lambda_max;
        assert!((fm.s.clone() - DMatrix::<C64>::identity(n, n) * C64::new(lam, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn walnut_janssen_and_matrix_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, a_d, l) in [(12, 2, 6), (24, 4, 6), (36, 6, 9), (30, 5, 10)] {
            let w = random_vec(&mut rng, n);
            let sys = DiscreteGaborSystem::new(n, a_d, l, w).unwrap();
            let fm = frame_matrix(&sys).unwrap();
            assert!(fm.hermitian_defect < 1e-12);
            for _ in 0..5 {
                let f = random_vec(&mut rng, n);
                let x = walnut_discrete(&sys, &f).unwrap();
                let y = fm.apply(&f);
                assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-10));
                let wh = wh_identity_discrete(&sys, &f).unwrap();
                assert!(wh.residual <= 1e-9 * (1.0 + wh.lhs));
            }
            assert!(janssen_discrete(&sys).unwrap().residual < 1e-9);
            let d = dual_discrete(&sys).unwrap();
            assert!(d.solve_residual < 1e-10 && d.biorthogonality_residual < 1e-9);
            assert!((power_iteration(&fm.s, 2000, 3) - fm.lambda_max).abs() < 1e-8 * fm.lambda_max);
        }
    }

    #[test]
    fn spike_examples() {
        let sys = DiscreteGaborSystem::new(8, 1, 8, spike(8)).unwrap();
        let f: Vec<C64> = (0..8).map(|j| C64::new(j as f64, 1.0)).collect();
        let x = walnut_discrete(&sys, &f).unwrap();
        assert!(x.iter().zip(&f).all(|(a, b)| (a - b * 8.0).norm() < 1e-12));
        let wh = wh_identity_discrete(&sys, &f).unwrap();
        assert_eq!(wh.f2, 0.0);
        let j = janssen_discrete(&sys).unwrap();
        assert_eq!(j.coefficients.len(), 1);
        assert_eq!(j.coefficients[0], vec![C64::new(1.0, 0.0)]);
        let d = dual_discrete(&sys).unwrap();
        assert!((d.dual[0] - C64::new(0.125, 0.0)).norm() < 1e-14);
        let zero = DiscreteGaborSystem::new(8, 2, 4, vec![C64::new(0.0, 0.0); 8]).unwrap();
        assert!(janssen_discrete(&zero).unwrap().coefficients.iter().flatten().all(|c| c.norm() == 0.0));
        assert!(dual_discrete(&zero).is_err());
    }

    #[test]
    fn bridge_examples() {
        let lat = LatticeParams::integer(1, 1);
        let grid = GridSpec::new(4).unwrap();
        let chi = StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0]);
        let br = step_to_discrete(&chi, &lat, grid, 16).unwrap();
        let ev = frame_matrix(&br.system).unwrap().eigenvalues();
        assert!(ev.iter().all(|&e| (br.continuous_bound(e) - 1.0).abs() < 1e-12));

        let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
        let br = step_to_discrete(&g, &lat, grid, 16).unwrap();
        let fm = frame_matrix(&br.system).unwrap();
        assert!((br.continuous_bound(fm.lambda_min) - 0.25).abs() < 1e-12);
        assert!((br.continuous_bound(fm.lambda_max) - 1.0).abs() < 1e-12);

        let third = LatticeParams::new(rational(1, 3), rational(1, 1)).unwrap();
        assert!(step_to_discrete(&g, &third, grid, 16).is_err());
    }
}
