//! Zak matrix fields for rational lattices `ab = p/q`.
//!
//! All fields are cellwise constant in time and trigonometric polynomials in
//! `ν`. Time is kept in real-time cells of the common grid: the Zak variable
//! `t` of the `1/b`-Zak transform corresponds to real time `t/b`, so the unit
//! `t`-interval becomes the cells `[0, s_b)`. Each field stores its
//! `ν`-Fourier coefficients per time segment and samples at `ν_j = j/V`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::correlations::{
    correlation_family, ucc_check, wexler_raz_check, ConditionReport, CorrelationFamily,
    WexlerRazReport,
};
use crate::error::{Error, Result};
use crate::model::{
    common_grid, rational_f64, GridSpec, LatticeParams, PeriodicStepFunction, Run, StepFunction,
    C64,
};
use crate::zak::PhaseTable;

pub const DEFAULT_NU_POINTS: usize = 1024;
pub const MAX_NU_POINTS: usize = 1 << 16;
pub const BRACKET_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Phi,
    A,
    S,
    B,
    Psi,
}

type Coefficients = Vec<(i64, DMatrix<C64>)>;

#[derive(Clone, Debug)]
pub struct ZakMatrixField {
    pub kind: FieldKind,
    pub p: usize,
    pub q: usize,
    pub rows: usize,
    pub cols: usize,
    pub grid: GridSpec,
    /// Time segments in real-time cells; the field is constant on each.
    pub segments: Vec<(i64, i64)>,
    pub nu_points: usize,
    /// `samples[s·V + j]` at segment `s` and `ν_j = j/V`.
    pub samples: Vec<DMatrix<C64>>,
    /// Per segment, `M(ν) = Σ_n C_n e^{2πinν}`; absent for spectral images.
    pub coefficients: Option<Vec<Coefficients>>,
    /// Built as `A^{gg}`, hence positive semidefinite.
    pub psd: bool,
}

impl ZakMatrixField {
    fn from_coefficients(
        kind: FieldKind,
        (p, q): (usize, usize),
        (rows, cols): (usize, usize),
        grid: GridSpec,
        segments: Vec<(i64, i64)>,
        coefficients: Vec<Coefficients>,
        nu_points: usize,
        psd: bool,
    ) -> Self {
        let samples = sample_coefficients(&coefficients, rows, cols, nu_points);
        Self {
            kind,
            p,
            q,
            rows,
            cols,
            grid,
            segments,
            nu_points,
            samples,
            coefficients: Some(coefficients),
            psd,
        }
    }

    pub fn at(&self, segment: usize, j: usize) -> &DMatrix<C64> {
        &self.samples[segment * self.nu_points + j]
    }

    /// Index of the segment containing `cell`.
    pub fn segment_of(&self, cell: i64) -> Option<usize> {
        let idx = self.segments.partition_point(|&(_, e)| e <= cell);
        (idx < self.segments.len() && self.segments[idx].0 <= cell).then_some(idx)
    }

    /// Value at `cell` and `ν_j`.
    pub fn at_cell(&self, cell: i64, j: usize) -> Option<&DMatrix<C64>> {
        self.segment_of(cell).map(|s| self.at(s, j))
    }

    /// The same field sampled at `V` points; needs coefficients.
    pub fn resample(&self, nu_points: usize) -> Result<Self> {
        let coeffs = self.coefficients.as_ref().ok_or_else(|| {
            Error::Precondition("field has no ν-coefficients to resample".into())
        })?;
        let mut out = self.clone();
        out.nu_points = nu_points;
        out.samples = sample_coefficients(coeffs, self.rows, self.cols, nu_points);
        Ok(out)
    }

    /// Largest `‖M − M*‖` over the samples.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.samples
            .iter()
            .map(|m| (m - m.adjoint()).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all samples.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.require_hermitian()?;
        Ok(self
            .samples
            .iter()
            .map(|m| eigen_extremes(m).0)
            .fold(f64::INFINITY, f64::min))
    }

    /// `max Σ_n |(C_n)_{mk}|` over segments and entries.
    pub fn coefficient_l1(&self) -> Option<f64> {
        let coeffs = self.coefficients.as_ref()?;
        let mut best = 0.0f64;
        for seg in coeffs {
            for r in 0..self.rows {
                for c in 0..self.cols {
                    let s: f64 = seg.iter().map(|(_, m)| m[(r, c)].norm()).sum();
                    best = best.max(s);
                }
            }
        }
        Some(best)
    }

    fn require_hermitian(&self) -> Result<()> {
        let scale = self.samples.iter().map(|m| m.norm()).fold(1.0, f64::max);
        if self.hermitian_defect() > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "{:?} field is not Hermitian",
                self.kind
            )));
        }
        Ok(())
    }
}

fn sample_coefficients(
    coefficients: &[Coefficients],
    rows: usize,
    cols: usize,
    nu_points: usize,
) -> Vec<DMatrix<C64>> {
    let phases = PhaseTable::new(nu_points as i64);
    let mut out = Vec::with_capacity(coefficients.len() * nu_points);
    for seg in coefficients {
        for j in 0..nu_points as i64 {
            let mut m = DMatrix::<C64>::zeros(rows, cols);
            for (n, c) in seg {
                m += c * phases.at(n * j);
            }
            out.push(m);
        }
    }
    out
}

/// `(λ_min, λ_max)` of a Hermitian matrix.
pub(crate) fn eigen_extremes(m: &DMatrix<C64>) -> (f64, f64) {
    if m.nrows() == 1 {
        return (m[(0, 0)].re, m[(0, 0)].re);
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let ev = SymmetricEigen::new(h).eigenvalues;
    (ev.min(), ev.max())
}

fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Common grid carrying the lattice steps and every given window.
pub fn lattice_grid(lat: &LatticeParams, windows: &[&StepFunction]) -> Result<GridSpec> {
    let mut grid = common_grid(lat.a, lat.b, 1)?;
    for w in windows {
        grid = grid.join(&w.grid());
    }
    Ok(grid)
}

/// Segments of `[0, range)` cut at `x + m·modulus` for every residue `x`.
fn segments_from(residues: impl IntoIterator<Item = i64>, modulus: i64, range: i64) -> Vec<(i64, i64)> {
    let mut pts = vec![0, range];
    let mut base: Vec<i64> = residues.into_iter().map(|x| x.rem_euclid(modulus)).collect();
    base.sort_unstable();
    base.dedup();
    for x in base {
        let mut y = x;
        while y < range {
            pts.push(y);
            y += modulus;
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn run_edges(f: &StepFunction) -> impl Iterator<Item = i64> + '_ {
    f.runs().iter().flat_map(|r| [r.start, r.end])
}

fn unit_phase(num: i64, den: i64) -> C64 {
    crate::model::cis(num.rem_euclid(den) as f64 / den as f64)
}

struct Setup {
    grid: GridSpec,
    p: usize,
    q: usize,
    s_a: i64,
    s_b: i64,
    b: f64,
    a: f64,
}

fn setup(lat: &LatticeParams, windows: &[&StepFunction]) -> Result<Setup> {
    let grid = lattice_grid(lat, windows)?;
    let st = grid.steps(lat)?;
    Ok(Setup {
        grid,
        p: lat.p as usize,
        q: lat.q as usize,
        s_a: st.s_a,
        s_b: st.s_b,
        b: rational_f64(lat.b),
        a: rational_f64(lat.a),
    })
}

/// Coefficients `P_ℓ` of `Φ^f(i,ν) = Σ_ℓ P_ℓ e^{2πiℓν}` at real-time cell `i`.
fn phi_coefficients(f: &StepFunction, s: &Setup, i: i64) -> Coefficients {
    if f.is_zero() {
        return Vec::new();
    }
    let (p, q) = (s.p as i64, s.q as i64);
    let norm = 1.0 / (s.p as f64 * s.b).sqrt();
    let l_lo = (i - (q - 1) * s.s_a - f.hi()).div_euclid(s.s_b);
    let l_hi = (i - f.lo()).div_euclid(s.s_b) + 1;
    let mut out = Vec::new();
    for l in l_lo..=l_hi {
        let mut m = DMatrix::<C64>::zeros(s.p, s.q);
        let mut any = false;
        for lc in 0..q {
            let v = f.value_at(i - lc * s.s_a - l * s.s_b);
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            any = true;
            for k in 0..p {
                m[(k as usize, lc as usize)] = v * norm * unit_phase(l * k, p);
            }
        }
        if any {
            out.push((l, m));
        }
    }
    out
}

/// `Σ_ℓ X_{ℓ+n} Y_ℓ^*` for coefficient lists of `X` and `Y`.
fn product_coefficients(x: &Coefficients, y: &Coefficients) -> Coefficients {
    let mut acc: BTreeMap<i64, DMatrix<C64>> = BTreeMap::new();
    for (lx, mx) in x {
        for (ly, my) in y {
            let term = mx * my.adjoint();
            acc.entry(lx - ly)
                .and_modify(|m| *m += &term)
                .or_insert(term);
        }
    }
    acc.into_iter().collect()
}

fn phi_segments(fs: &[&StepFunction], s: &Setup) -> Vec<(i64, i64)> {
    let mut residues = vec![s.s_a];
    for f in fs {
        for x in run_edges(f) {
            for lc in 0..s.q as i64 {
                residues.push(x + lc * s.s_a);
            }
        }
    }
    segments_from(residues, s.s_b, s.s_b)
}

/// `Φ^f_{k,ℓ}(t,ν) = p^{−1/2} (Zf)(t − ℓp/q, ν + k/p)` with the `1/b`-Zak transform.
pub fn phi_field(f: &StepFunction, lat: &LatticeParams, nu_points: usize) -> Result<ZakMatrixField> {
    let s = setup(lat, &[f])?;
    let f = f.refine(s.grid.den)?;
    let segments = phi_segments(&[&f], &s);
    let coeffs = segments
        .iter()
        .map(|&(st, _)| phi_coefficients(&f, &s, st))
        .collect();
    Ok(ZakMatrixField::from_coefficients(
        FieldKind::Phi,
        (s.p, s.q),
        (s.p, s.q),
        s.grid,
        segments,
        coeffs,
        nu_points,
        false,
    ))
}

/// `A^{gh} = Φ^g (Φ^h)^*`.
pub fn a_field(
    g: &StepFunction,
    h: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
) -> Result<ZakMatrixField> {
    let s = setup(lat, &[g, h])?;
    let g2 = g.refine(s.grid.den)?;
    let h2 = h.refine(s.grid.den)?;
    let segments = phi_segments(&[&g2, &h2], &s);
    let coeffs = segments
        .iter()
        .map(|&(st, _)| {
            let pg = phi_coefficients(&g2, &s, st);
            let ph = phi_coefficients(&h2, &s, st);
            product_coefficients(&pg, &ph)
        })
        .collect();
    Ok(ZakMatrixField::from_coefficients(
        FieldKind::A,
        (s.p, s.q),
        (s.p, s.p),
        s.grid,
        segments,
        coeffs,
        nu_points,
        g == h,
    ))
}

fn family_on(g: &StepFunction, lat: &LatticeParams, s: &Setup) -> Result<CorrelationFamily> {
    let fam = correlation_family(&g.refine(s.grid.den)?, lat)?;
    if fam.grid != s.grid {
        return Err(Error::Grid("correlation family landed on a different grid".into()));
    }
    Ok(fam)
}

/// `S^{gg}_{mk}(t,ν) = Σ_ℓ G_ℓ(t + m/b) e^{−2πiℓ(ν + k/p)}` on real time
/// `[0, 1/b)`, optionally keeping only `|ℓ| ≤ l_max`.
pub fn s_field(
    g: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
    l_max: Option<i64>,
) -> Result<ZakMatrixField> {
    let s = setup(lat, &[g])?;
    let fam = family_on(g, lat, &s)?;
    let p = s.p as i64;
    let mut residues = vec![0];
    for e in fam.entries.values() {
        for r in e.runs() {
            for m in 0..p {
                residues.push(r.start - m * s.s_b);
                residues.push(r.end - m * s.s_b);
            }
        }
    }
    let segments = segments_from(residues, s.s_a, s.s_b);
    let coeffs = segments
        .iter()
        .map(|&(i, _)| {
            let mut acc: BTreeMap<i64, DMatrix<C64>> = BTreeMap::new();
            for (&l, gl) in &fam.entries {
                if l_max.is_some_and(|lm| l.abs() > lm) {
                    continue;
                }
                for m in 0..p {
                    let v = gl.value_at(i + m * s.s_b);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    // e^{−2πiℓν} is coefficient index −ℓ.
                    let entry = acc
                        .entry(-l)
                        .or_insert_with(|| DMatrix::zeros(s.p, s.p));
                    for k in 0..p {
                        entry[(m as usize, k as usize)] += v * unit_phase(-l * k, p);
                    }
                }
            }
            acc.into_iter().collect()
        })
        .collect();
    Ok(ZakMatrixField::from_coefficients(
        FieldKind::S,
        (s.p, s.q),
        (s.p, s.p),
        s.grid,
        segments,
        coeffs,
        nu_points,
        false,
    ))
}

/// `B^{gg}_{kℓ}(t,ν) = b^{−1} Σ_r G_{ℓ−k+rp}(at − k/b) e^{−2πirqν}` on real time `[0, a)`.
pub fn b_field(
    g: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
    r_max: Option<i64>,
) -> Result<ZakMatrixField> {
    let s = setup(lat, &[g])?;
    let fam = family_on(g, lat, &s)?;
    let (p, q) = (s.p as i64, s.q as i64);
    let mut residues = vec![0];
    for e in fam.entries.values() {
        for r in e.runs() {
            for k in 0..p {
                residues.push(r.start + k * s.s_b);
                residues.push(r.end + k * s.s_b);
            }
        }
    }
    let segments = segments_from(residues, s.s_a, s.s_a);
    let inv_b = 1.0 / s.b;
    let coeffs = segments
        .iter()
        .map(|&(i, _)| {
            let mut acc: BTreeMap<i64, DMatrix<C64>> = BTreeMap::new();
            for (&kk, gk) in &fam.entries {
                for k in 0..p {
                    for l in 0..p {
                        let d = kk - l + k;
                        if d.rem_euclid(p) != 0 {
                            continue;
                        }
                        let r = d / p;
                        if r_max.is_some_and(|rm| r.abs() > rm) {
                            continue;
                        }
                        let v = gk.value_at(i - k * s.s_b);
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let entry = acc
                            .entry(-r * q)
                            .or_insert_with(|| DMatrix::zeros(s.p, s.p));
                        entry[(k as usize, l as usize)] += v * inv_b;
                    }
                }
            }
            acc.into_iter().collect()
        })
        .collect();
    Ok(ZakMatrixField::from_coefficients(
        FieldKind::B,
        (s.p, s.q),
        (s.p, s.p),
        s.grid,
        segments,
        coeffs,
        nu_points,
        true,
    ))
}

/// `Ψ^g_{k,j}(t,ν) = (a/p)^{1/2} Σ_s g(at − k/b − sa) e^{2πis(ν − j/q)}`, so that `B^{gg} = ΨΨ*`.
pub fn psi_field(g: &StepFunction, lat: &LatticeParams, nu_points: usize) -> Result<ZakMatrixField> {
    let s = setup(lat, &[g])?;
    let g = g.refine(s.grid.den)?;
    let (p, q) = (s.p as i64, s.q as i64);
    let mut residues = vec![0];
    for x in run_edges(&g) {
        for k in 0..p {
            residues.push(x + k * s.s_b);
        }
    }
    let segments = segments_from(residues, s.s_a, s.s_a);
    let norm = (s.a / s.p as f64).sqrt();
    let coeffs = segments
        .iter()
        .map(|&(i, _)| {
            let mut out = Vec::new();
            if g.is_zero() {
                return out;
            }
            let n_lo = (i - (p - 1) * s.s_b - g.hi()).div_euclid(s.s_a);
            let n_hi = (i - g.lo()).div_euclid(s.s_a) + 1;
            for n in n_lo..=n_hi {
                let mut m = DMatrix::<C64>::zeros(s.p, s.q);
                let mut any = false;
                for k in 0..p {
                    let v = g.value_at(i - k * s.s_b - n * s.s_a);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    any = true;
                    for j in 0..q {
                        m[(k as usize, j as usize)] = v * norm * unit_phase(-n * j, q);
                    }
                }
                if any {
                    out.push((n, m));
                }
            }
            out
        })
        .collect();
    Ok(ZakMatrixField::from_coefficients(
        FieldKind::Psi,
        (s.p, s.q),
        (s.p, s.q),
        s.grid,
        segments,
        coeffs,
        nu_points,
        false,
    ))
}

/// Cells where both fields are evaluated when comparing them.
fn probe_cells(x: &ZakMatrixField, y: &ZakMatrixField, range: i64) -> Vec<i64> {
    let mut cells: Vec<i64> = x
        .segments
        .iter()
        .chain(&y.segments)
        .map(|&(s, _)| s)
        .filter(|&c| c < range)
        .collect();
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Worst deviation in both directions of the `S ↔ A` relation:
/// `S_{mk} = b e^{−2πimk/p} Σ_r A_{rk} e^{2πimr/p}` and
/// `A_{jk} = (bp)^{−1} Σ_m S_{mk} e^{2πim(k−j)/p}`.
pub fn s_a_relation_residual(g: &StepFunction, lat: &LatticeParams, nu_points: usize) -> Result<f64> {
    let af = a_field(g, g, lat, nu_points)?;
    let sf = s_field(g, lat, nu_points, None)?;
    let st = af.grid.steps(lat)?;
    let b = rational_f64(lat.b);
    let p = af.p as i64;
    let mut worst = 0.0f64;
    for cell in probe_cells(&af, &sf, st.s_b) {
        for j in 0..nu_points {
            let a = af.at_cell(cell, j).expect("cell in range");
            let sm = sf.at_cell(cell, j).expect("cell in range");
            for m in 0..p {
                for k in 0..p {
                    let mut fwd = C64::new(0.0, 0.0);
                    let mut inv = C64::new(0.0, 0.0);
                    for r in 0..p {
                        fwd += a[(r as usize, k as usize)] * unit_phase(m * r, p);
                        inv += sm[(r as usize, k as usize)] * unit_phase(r * (k - m), p);
                    }
                    fwd *= unit_phase(-m * k, p) * b;
                    inv /= b * p as f64;
                    worst = worst
                        .max((sm[(m as usize, k as usize)] - fwd).norm())
                        .max((a[(m as usize, k as usize)] - inv).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Worst deviation between `B^{gg}` from correlations and the product `ΨΨ*`.
pub fn b_factorization_residual(g: &StepFunction, lat: &LatticeParams, nu_points: usize) -> Result<f64> {
    let bf = b_field(g, lat, nu_points, None)?;
    let psi = psi_field(g, lat, nu_points)?;
    let st = bf.grid.steps(lat)?;
    let mut worst = 0.0f64;
    for cell in probe_cells(&bf, &psi, st.s_a) {
        for j in 0..nu_points {
            let x = bf.at_cell(cell, j).expect("cell in range");
            let y = psi.at_cell(cell, j).expect("cell in range");
            worst = worst.max((x - y * y.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

/// One refinement level of a bound computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub nu_points: usize,
    #[serde(rename = "A")]
    pub a: [f64; 2],
    #[serde(rename = "B")]
    pub b: [f64; 2],
}

/// Optimal lower bound in `[a_low, a_high]`, optimal upper bound in `[b_low, b_high]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundBracket {
    pub a_low: f64,
    pub a_high: f64,
    pub b_low: f64,
    pub b_high: f64,
    pub nu_points: usize,
    pub refinements: Vec<RefinementStep>,
    /// False when the field had no coefficients, so only samples were seen.
    pub certified: bool,
}

impl BoundBracket {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "A": [self.a_low, self.a_high],
            "B": [self.b_low, self.b_high],
            "resolution": self.nu_points,
            "certified": self.certified,
            "refinements": self.refinements,
        })
    }

    pub fn width(&self) -> f64 {
        (self.a_high - self.a_low).max(self.b_high - self.b_low)
    }

    pub fn contains_lower(&self, x: f64, tol: f64) -> bool {
        x >= self.a_low - tol && x <= self.a_high + tol
    }

    pub fn contains_upper(&self, x: f64, tol: f64) -> bool {
        x >= self.b_low - tol && x <= self.b_high + tol
    }
}

/// Per-segment certified extremes from samples and coefficients.
fn segment_bounds(
    samples: impl Iterator<Item = (f64, f64)>,
    coeffs: Option<&Coefficients>,
    nu_points: usize,
    psd: bool,
) -> (f64, f64, f64, f64) {
    let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (lo, hi) in samples {
        smin = smin.min(lo);
        smax = smax.max(hi);
    }
    let Some(coeffs) = coeffs else {
        return (smin, smin, smax, smax);
    };
    let v = nu_points as f64;
    let (mut first, mut second, mut total, mut off) = (0.0, 0.0, 0.0, 0.0);
    let mut c0_min = 0.0;
    for (n, c) in coeffs {
        let norm = c.norm();
        let nf = *n as f64;
        first += nf.abs() * norm;
        second += nf * nf * norm;
        total += norm;
        if *n == 0 {
            c0_min = eigen_extremes(c).0;
        } else {
            off += norm;
        }
    }
    let slack = (PI * first / v).min(0.5 * PI * PI * second / (v * v));
    let mut low = (smin - slack).max(c0_min - off);
    if psd {
        low = low.max(0.0);
    }
    let high = (smax + slack).min(total);
    (low, smin, smax, high)
}

/// Frame-bound bracket of a Hermitian field at its sampling resolution.
pub fn frame_bounds(field: &ZakMatrixField) -> Result<BoundBracket> {
    field.require_hermitian()?;
    let v = field.nu_points;
    let (mut a_low, mut a_high) = (f64::INFINITY, f64::INFINITY);
    let (mut b_low, mut b_high) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in 0..field.segments.len() {
        let samples = (0..v).map(|j| eigen_extremes(field.at(s, j)));
        let coeffs = field.coefficients.as_ref().map(|c| &c[s]);
        let (lo, sl, sh, hi) = segment_bounds(samples, coeffs, v, field.psd);
        a_low = a_low.min(lo);
        a_high = a_high.min(sl);
        b_low = b_low.max(sh);
        b_high = b_high.max(hi);
    }
    if field.segments.is_empty() {
        (a_low, a_high, b_low, b_high) = (0.0, 0.0, 0.0, 0.0);
    }
    Ok(BoundBracket {
        a_low,
        a_high,
        b_low,
        b_high,
        nu_points: v,
        refinements: vec![RefinementStep {
            nu_points: v,
            a: [a_low, a_high],
            b: [b_low, b_high],
        }],
        certified: field.coefficients.is_some(),
    })
}

/// Doubles the `ν`-resolution from `start` until the bracket is narrower than
/// `1e−6` or `2^16` samples are reached. Each level is intersected with the
/// previous one, so the bracket only shrinks.
pub fn frame_bounds_refined(field: &ZakMatrixField, start: usize) -> Result<BoundBracket> {
    let mut v = start.max(1);
    let mut out: Option<BoundBracket> = None;
    loop {
        let f = if v == field.nu_points { field.clone() } else { field.resample(v)? };
        let mut br = frame_bounds(&f)?;
        if let Some(prev) = &out {
            br.a_low = br.a_low.max(prev.a_low);
            br.a_high = br.a_high.min(prev.a_high);
            br.b_low = br.b_low.max(prev.b_low);
            br.b_high = br.b_high.min(prev.b_high);
            let mut trace = prev.refinements.clone();
            trace.push(RefinementStep {
                nu_points: v,
                a: [br.a_low, br.a_high],
                b: [br.b_low, br.b_high],
            });
            br.refinements = trace;
        }
        let done = br.width() < BRACKET_TOLERANCE || v >= MAX_NU_POINTS;
        out = Some(br);
        if done {
            break;
        }
        v *= 2;
    }
    Ok(out.expect("at least one level"))
}

/// Refined bracket for the frame `(g, a, b)`.
pub fn window_frame_bounds(g: &StepFunction, lat: &LatticeParams) -> Result<BoundBracket> {
    let field = a_field(g, g, lat, DEFAULT_NU_POINTS)?;
    frame_bounds_refined(&field, DEFAULT_NU_POINTS)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFn {
    Inverse,
    InvSqrt,
    Power(i32),
    Resolvent { re: f64, im: f64 },
}

/// `φ(A)` at every sample by Hermitian eigendecomposition.
pub fn spectral_apply(field: &ZakMatrixField, phi: SpectralFn) -> Result<ZakMatrixField> {
    field.require_hermitian()?;
    let scale = field.samples.iter().map(|m| m.norm()).fold(1.0, f64::max);
    let singular_tol = 1e-12 * scale;
    let needs_inverse = matches!(phi, SpectralFn::Inverse | SpectralFn::InvSqrt)
        || matches!(phi, SpectralFn::Power(n) if n < 0);
    let mut samples = Vec::with_capacity(field.samples.len());
    for m in &field.samples {
        let (ev, u) = hermitian_eigen(m);
        let mut d = Vec::with_capacity(ev.len());
        for &lam in &ev {
            if needs_inverse && lam <= singular_tol {
                return Err(Error::NotAFrame(format!(
                    "field eigenvalue {lam:e} is not positive"
                )));
            }
            let val = match phi {
                SpectralFn::Inverse => C64::new(1.0 / lam, 0.0),
                SpectralFn::InvSqrt => C64::new(1.0 / lam.sqrt(), 0.0),
                SpectralFn::Power(n) => C64::new(lam.powi(n), 0.0),
                SpectralFn::Resolvent { re, im } => {
                    let z = C64::new(lam - re, -im);
                    if z.norm() <= singular_tol {
                        return Err(Error::NotAFrame(format!(
                            "resolvent point {re}+{im}i is an eigenvalue"
                        )));
                    }
                    z.inv()
                }
            };
            d.push(val);
        }
        let mut scaled = u.clone();
        for (c, val) in d.iter().enumerate() {
            scaled.column_mut(c).iter_mut().for_each(|x| *x *= *val);
        }
        samples.push(&scaled * u.adjoint());
    }
    Ok(ZakMatrixField {
        kind: FieldKind::A,
        samples,
        coefficients: None,
        psd: field.psd && !matches!(phi, SpectralFn::Resolvent { .. }),
        ..field.clone()
    })
}

/// Canonical dual window recovered from `Φ^γ = [A^{gg}]^{−1}Φ^g`.
#[derive(Clone, Debug)]
pub struct DualWindow {
    pub window: StepFunction,
    pub bracket: BoundBracket,
    pub wexler_raz: WexlerRazReport,
    pub nu_points: usize,
    pub k_trunc: i64,
}

fn forward_fft(data: &mut [C64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(data.len()).process(data);
}

/// Time-domain samples of `S^{−1}g` from `|ℓ| ≤ k_trunc` Zak coefficients.
pub fn dual_window(
    g: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
    k_trunc: i64,
) -> Result<DualWindow> {
    lat.require_frame_density()?;
    let af = a_field(g, g, lat, nu_points.max(1))?;
    let bracket = frame_bounds_refined(&af, nu_points.max(1))?;
    if bracket.a_low <= 1e-12 {
        return Err(Error::NotAFrame(format!(
            "lower frame bound not certified positive (bracket [{:e}, {:e}])",
            bracket.a_low, bracket.a_high
        )));
    }
    let v = nu_points
        .max((4 * (2 * k_trunc as usize + 1)).next_power_of_two())
        .next_power_of_two();
    let af = af.resample(v)?;
    let phi = phi_field(g, lat, v)?;
    let st = af.grid.steps(lat)?;
    let b = rational_f64(lat.b);
    let sqrt_p = (af.p as f64).sqrt();
    let mut runs = Vec::new();
    for &(start, end) in &af.segments {
        let si = af.segment_of(start).expect("own segment");
        let mut z: Vec<C64> = (0..v)
            .map(|j| {
                let inv = af.at(si, j).clone().try_inverse().unwrap_or_else(|| {
                    DMatrix::from_element(af.p, af.p, C64::new(f64::NAN, 0.0))
                });
                let ph = phi.at_cell(start, j).expect("cell in range");
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..af.p {
                    acc += inv[(0, r)] * ph[(r, 0)];
                }
                acc * sqrt_p
            })
            .collect();
        forward_fft(&mut z);
        for l in -k_trunc..=k_trunc {
            let c = z[l.rem_euclid(v as i64) as usize] * (b.sqrt() / v as f64);
            runs.push(Run {
                start: start - l * st.s_b,
                end: end - l * st.s_b,
                value: c,
            });
        }
    }
    let peak = runs.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    if !peak.is_finite() {
        return Err(Error::NotAFrame("Zak matrix is singular at a sample".into()));
    }
    for r in &mut runs {
        if r.value.norm() <= 1e-14 * peak {
            r.value = C64::new(0.0, 0.0);
        }
    }
    runs.sort_by_key(|r| r.start);
    let window = StepFunction::from_runs(af.grid, runs)?;
    let wexler_raz = wexler_raz_check(g, &window, lat, 4, 4)?;
    Ok(DualWindow {
        window,
        bracket,
        wexler_raz,
        nu_points: v,
        k_trunc,
    })
}

/// Correlation functions of the canonical dual, `|k| < V/2`, from the
/// `ν`-coefficients of `b Σ_r ([A^{gg}]^{−1})_{r0}` on `[0, a)`.
pub fn dual_correlations(
    g: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
) -> Result<CorrelationFamily> {
    lat.require_frame_density()?;
    let v = nu_points.max(2).next_power_of_two();
    let af = a_field(g, g, lat, v)?;
    let inv = spectral_apply(&af, SpectralFn::Inverse)?;
    let st = af.grid.steps(lat)?;
    let b = rational_f64(lat.b);
    let k_max = v as i64 / 2 - 1;
    let mut runs: BTreeMap<i64, Vec<Run>> = BTreeMap::new();
    for (si, &(start, end)) in af.segments.iter().enumerate() {
        if start >= st.s_a {
            break;
        }
        let mut z: Vec<C64> = (0..v)
            .map(|j| {
                let m = inv.at(si, j);
                (0..af.p).map(|r| m[(r, 0)]).sum::<C64>()
            })
            .collect();
        forward_fft(&mut z);
        for k in -k_max..=k_max {
            let c = z[k.rem_euclid(v as i64) as usize] * (b / v as f64);
            runs.entry(k).or_default().push(Run {
                start,
                end: end.min(st.s_a),
                value: c,
            });
        }
    }
    let peak = runs
        .values()
        .flatten()
        .map(|r| r.value.norm())
        .fold(0.0, f64::max);
    let mut entries = BTreeMap::new();
    for (k, mut rs) in runs {
        for r in &mut rs {
            if r.value.norm() <= 1e-14 * peak {
                r.value = C64::new(0.0, 0.0);
            }
        }
        entries.insert(k, PeriodicStepFunction::from_runs(af.grid, st.s_a, rs)?);
    }
    CorrelationFamily::from_entries(*lat, af.grid, entries, false, Some(k_max))
}

/// UCC tail profile of the canonical dual.
pub fn ucc_of_dual(
    g: &StepFunction,
    lat: &LatticeParams,
    nu_points: usize,
    epsilons: &[f64],
) -> Result<ConditionReport> {
    let fam = dual_correlations(g, lat, nu_points)?;
    Ok(ucc_check(&fam, epsilons))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cis, rational};

    fn chi() -> StepFunction {
        StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0])
    }

    fn ex413() -> StepFunction {
        StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5])
    }

    fn half() -> LatticeParams {
        LatticeParams::new(rational(1, 1), rational(1, 2)).unwrap()
    }

    #[test]
    fn segments_cover_range() {
        assert_eq!(segments_from([1, 5], 3, 6), vec![(0, 1), (1, 2), (2, 4), (4, 5), (5, 6)]);
    }

    #[test]
    fn phi_and_a_examples() {
        let lat = LatticeParams::integer(1, 1);
        let phi = phi_field(&chi(), &lat, 8).unwrap();
        assert!(phi.samples.iter().all(|m| (m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15));
        let zero = StepFunction::zero(GridSpec { den: 1 });
        let phi0 = phi_field(&zero, &lat, 8).unwrap();
        assert!(phi0.samples.iter().all(|m| m.norm() == 0.0));

        let a = a_field(&ex413(), &ex413(), &lat, 8).unwrap();
        for j in 0..8 {
            assert!((a.at_cell(0, j).unwrap()[(0, 0)].re - 1.0).abs() < 1e-15);
            assert!((a.at_cell(1, j).unwrap()[(0, 0)].re - 0.25).abs() < 1e-15);
        }
        let a0 = a_field(&ex413(), &StepFunction::zero(GridSpec { den: 2 }), &lat, 8).unwrap();
        assert!(a0.samples.iter().all(|m| m.norm() == 0.0));
    }

    #[test]
    fn frame_bounds_examples() {
        let lat = LatticeParams::integer(1, 1);
        let b = frame_bounds(&a_field(&chi(), &chi(), &lat, 16).unwrap()).unwrap();
        assert_eq!((b.a_low, b.a_high, b.b_low, b.b_high), (1.0, 1.0, 1.0, 1.0));
        let b = frame_bounds(&a_field(&ex413(), &ex413(), &lat, 16).unwrap()).unwrap();
        assert_eq!((b.a_low, b.a_high, b.b_low, b.b_high), (0.25, 0.25, 1.0, 1.0));
        let b = frame_bounds(&a_field(&chi(), &chi(), &half(), 16).unwrap()).unwrap();
        assert!((b.a_low - 2.0).abs() < 1e-14 && (b.b_high - 2.0).abs() < 1e-14);
    }

    #[test]
    fn s_and_b_examples() {
        let lat = LatticeParams::integer(1, 1);
        let s = s_field(&chi(), &lat, 8, None).unwrap();
        assert!(s.samples.iter().all(|m| (m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15));
        let s = s_field(&ex413(), &lat, 8, None).unwrap();
        assert!((s.at_cell(1, 3).unwrap()[(0, 0)].re - 0.25).abs() < 1e-15);
        let bf = b_field(&chi(), &lat, 8, None).unwrap();
        assert!(bf.samples.iter().all(|m| (m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15));
        let zero = StepFunction::zero(GridSpec { den: 1 });
        assert!(s_field(&zero, &lat, 4, None).unwrap().samples.iter().all(|m| m.norm() == 0.0));
    }

    #[test]
    fn spectral_examples() {
        let lat = LatticeParams::integer(1, 1);
        let a = a_field(&ex413(), &ex413(), &lat, 8).unwrap();
        let inv = spectral_apply(&a, SpectralFn::Inverse).unwrap();
        assert!((inv.at_cell(0, 0).unwrap()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((inv.at_cell(1, 5).unwrap()[(0, 0)].re - 4.0).abs() < 1e-14);
        let zero = a_field(&chi(), &StepFunction::zero(GridSpec { den: 1 }), &lat, 4).unwrap();
        assert!(spectral_apply(&zero, SpectralFn::Inverse).is_err());
    }

    #[test]
    fn dual_examples() {
        let lat = LatticeParams::integer(1, 1);
        let d = dual_window(&chi(), &lat, 64, 8).unwrap();
        assert!(d.window.sub(&chi()).unwrap().norm_sup() < 1e-14);
        let d = dual_window(&ex413(), &lat, 64, 8).unwrap();
        let want = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 2.0]);
        assert!(d.window.sub(&want).unwrap().norm_sup() < 1e-14);
        assert!(d.wexler_raz.deviation < 1e-8);
        let d = dual_window(&chi(), &half(), 64, 8).unwrap();
        assert!(d.window.sub(&chi().scale(C64::new(0.5, 0.0))).unwrap().norm_sup() < 1e-14);
    }

    fn random_window(seed: u64, den: i64, cells: usize) -> StepFunction {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<C64> = (0..cells)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StepFunction::new(GridSpec { den }, -(cells as i64) / 2, &vals)
    }

    fn lattices() -> Vec<LatticeParams> {
        vec![
            LatticeParams::integer(1, 1),
            half(),
            LatticeParams::new(rational(1, 1), rational(2, 3)).unwrap(),
            LatticeParams::new(rational(2, 3), rational(1, 1)).unwrap(),
        ]
    }

    #[test]
    fn phi_matches_direct_zak_sums() {
        for (n, lat) in lattices().into_iter().enumerate() {
            let f = random_window(10 + n as u64, 2, 7);
            let v = 16;
            let phi = phi_field(&f, &lat, v).unwrap();
            let (p, q) = (lat.p, lat.q);
            let b = rational_f64(lat.b);
            let step = phi.grid.step_f64();
            for &(start, _) in &phi.segments {
                let x = (start as f64 + 0.5) * step;
                for j in [0usize, 3, 11] {
                    let nu = j as f64 / v as f64;
                    for k in 0..p {
                        for lc in 0..q {
                            // Zak time t = bx, argument t − ℓp/q, frequency ν + k/p.
                            let t = b * x - lc as f64 * p as f64 / q as f64;
                            let mut z = C64::new(0.0, 0.0);
                            for l in -40i64..=40 {
                                z += f.eval((t - l as f64) / b)
                                    * cis(l as f64 * (nu + k as f64 / p as f64));
                            }
                            z /= (b * p as f64).sqrt();
                            let got = phi.at_cell(start, j).unwrap()[(k as usize, lc as usize)];
                            assert!((got - z).norm() < 1e-12, "{lat:?} k={k} lc={lc}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cross_identities_on_random_windows() {
        for (n, lat) in lattices().into_iter().enumerate() {
            for seed in 0..5u64 {
                let g = random_window(100 * n as u64 + seed, 2, 5 + seed as usize);
                assert!(s_a_relation_residual(&g, &lat, 32).unwrap() < 1e-9, "{lat:?}");
                assert!(b_factorization_residual(&g, &lat, 32).unwrap() < 1e-9, "{lat:?}");
                let a = a_field(&g, &g, &lat, 32).unwrap();
                assert!(a.min_eigenvalue().unwrap() >= -1e-10);
            }
        }
        let zero = StepFunction::zero(GridSpec { den: 1 });
        assert_eq!(s_a_relation_residual(&zero, &half(), 8).unwrap(), 0.0);
    }

    #[test]
    fn s_coefficients_match_cc_bound() {
        use crate::correlations::cc_bound;
        for (n, lat) in lattices().into_iter().enumerate() {
            let g = random_window(7 + n as u64, 2, 6);
            let s = s_field(&g, &lat, 8, None).unwrap();
            let fam = correlation_family(&g, &lat).unwrap();
            // Entries of row m carry Σ_ℓ |G_ℓ(t + m/b)|, i.e. the CC sums.
            assert!((s.coefficient_l1().unwrap() - cc_bound(&fam)).abs() < 1e-8);
        }
    }

    #[test]
    fn bracket_contains_true_bounds_and_shrinks() {
        let g = random_window(3, 2, 4);
        let lat = half();
        let field = a_field(&g, &g, &lat, 64).unwrap();
        let br = frame_bounds_refined(&field, 64).unwrap();
        let fine = frame_bounds(&field.resample(1 << 15).unwrap()).unwrap();
        assert!(br.a_low <= fine.a_high + 1e-12 && br.b_high >= fine.b_low - 1e-12);
        for w in br.refinements.windows(2) {
            assert!(w[1].a[0] >= w[0].a[0] && w[1].a[1] <= w[0].a[1]);
            assert!(w[1].b[0] >= w[0].b[0] && w[1].b[1] <= w[0].b[1]);
        }
        assert!(br.width() < BRACKET_TOLERANCE);
    }

    #[test]
    fn dual_on_random_windows_is_biorthogonal() {
        for lat in [half(), LatticeParams::new(rational(1, 1), rational(2, 3)).unwrap()] {
            let g = random_window(42, 2, 4);
            let d = dual_window(&g, &lat, 256, 64).unwrap();
            assert!(d.wexler_raz.deviation < 1e-8, "{lat:?}: {:?}", d.wexler_raz);
        }
    }

    #[test]
    fn dual_correlation_examples() {
        let lat = LatticeParams::integer(1, 1);
        let fam = dual_correlations(&chi(), &lat, 16).unwrap();
        assert_eq!(fam.entries.keys().copied().collect::<Vec<_>>(), vec![0]);
        let fam = dual_correlations(&ex413(), &lat, 16).unwrap();
        assert_eq!(fam.entries.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!((fam.get(0).value_at(1).re - 4.0).abs() < 1e-12);
        let rep = ucc_of_dual(&ex413(), &lat, 16, &[0.1]).unwrap();
        assert_eq!(rep.thresholds[0].1, Some(1));

        // Against the correlations of the synthesized dual window.
        let g = random_window(5, 2, 4);
        let lat = half();
        let d = dual_window(&g, &lat, 256, 64).unwrap();
        let direct = correlation_family(&d.window, &lat).unwrap();
        let fam = dual_correlations(&g, &lat, 256).unwrap();
        for k in -6..=6 {
            let (x, y) = (fam.get(k), direct.get(k));
            for c in 0..fam.period {
                assert!((x.value_at(c) - y.value_at(c)).norm() < 1e-9, "k = {k}");
            }
        }
        let tails = tail_profile_shrinks(&g, &lat);
        assert!(tails);
    }

    fn tail_profile_shrinks(g: &StepFunction, lat: &LatticeParams) -> bool {
        let coarse = dual_correlations(g, lat, 64).unwrap();
        let fine = dual_correlations(g, lat, 256).unwrap();
        let pc = crate::correlations::tail_profile(&coarse);
        let pf = crate::correlations::tail_profile(&fine);
        pc.iter().zip(&pf).take(20).all(|(a, b)| (a.1 - b.1).abs() < 1e-6)
            && pf.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}
