//! Exact substrate: rationals, lattice parameters, uniform grids on which every
//! lattice translation is an index shift, step functions, periodic step
//! functions and the finite cyclic Gabor model.
//!
//! Step functions are stored as sorted runs of equal value on the integer cell
//! axis. A window with a few long plateaus on a very fine grid therefore costs
//! memory proportional to its number of plateaus, not its number of cells.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = Ratio<i64>;

pub fn rational(num: i64, den: i64) -> Rational {
    Ratio::new(num, den)
}

pub fn rational_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// `e^{2πi x}`.
pub fn cis(x: f64) -> C64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    C64::new(c, s)
}

/// Neumaier compensated summation of complex numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: C64,
    comp: C64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    fn step(sum: &mut f64, comp: &mut f64, x: f64) {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    }

    pub fn add(&mut self, x: C64) {
        Self::step(&mut self.sum.re, &mut self.comp.re, x.re);
        Self::step(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = C64>>(items: I) -> C64 {
    let mut s = CompensatedSum::new();
    for x in items {
        s.add(x);
    }
    s.value()
}

/// Real compensated sum.
pub fn compensated_sum_re<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    compensated_sum(items.into_iter().map(|x| C64::new(x, 0.0))).re
}

/// Time-frequency lattice `aℤ × bℤ` with `ab = p/q` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeParams {
    pub a: Rational,
    pub b: Rational,
    pub p: i64,
    pub q: i64,
}

impl LatticeParams {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if *a.numer() <= 0 || *b.numer() <= 0 {
            return Err(Error::Input(format!(
                "lattice parameters must be positive, got a = {a}, b = {b}"
            )));
        }
        let ab = a * b;
        Ok(Self {
            a,
            b,
            p: *ab.numer(),
            q: *ab.denom(),
        })
    }

    pub fn integer(a: i64, b: i64) -> Self {
        Self::new(Rational::from_integer(a), Rational::from_integer(b)).expect("positive")
    }

    pub fn ab(&self) -> Rational {
        self.a * self.b
    }

    pub fn inv_b(&self) -> Rational {
        self.b.recip()
    }

    pub fn is_a1b1(&self) -> bool {
        self.a == Rational::from_integer(1) && self.b == Rational::from_integer(1)
    }

    pub fn require_frame_density(&self) -> Result<()> {
        if self.p > self.q {
            return Err(Error::Lattice(format!(
                "ab = {}/{} exceeds 1",
                self.p, self.q
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": [*self.a.numer(), *self.a.denom()],
            "b": [*self.b.numer(), *self.b.denom()],
        })
    }
}

/// Lattice file: `{ "a": [num, den], "b": [num, den] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub a: [i64; 2],
    pub b: [i64; 2],
}

impl LatticeFile {
    pub fn to_lattice(&self) -> Result<LatticeParams> {
        if self.a[1] == 0 || self.b[1] == 0 {
            return Err(Error::Input("zero denominator in lattice".into()));
        }
        LatticeParams::new(
            rational(self.a[0], self.a[1]),
            rational(self.b[0], self.b[1]),
        )
    }
}

/// Uniform grid of step `1/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub den: i64,
}

/// Integer witnesses that `a` and `1/b` are whole numbers of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSteps {
    pub s_a: i64,
    pub s_b: i64,
}

impl GridSpec {
    pub fn new(den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::Input(format!("grid denominator must be positive, got {den}")));
        }
        Ok(Self { den })
    }

    pub fn step(&self) -> Rational {
        rational(1, self.den)
    }

    pub fn step_f64(&self) -> f64 {
        1.0 / self.den as f64
    }

    /// Number of cells spanned by `x`, if `x` lies on the grid.
    pub fn cells(&self, x: Rational) -> Result<i64> {
        let c = x * Rational::from_integer(self.den);
        if !c.is_integer() {
            return Err(Error::Grid(format!(
                "{x} is not a multiple of the grid step 1/{}",
                self.den
            )));
        }
        Ok(c.to_integer())
    }

    pub fn steps(&self, lat: &LatticeParams) -> Result<LatticeSteps> {
        Ok(LatticeSteps {
            s_a: self.cells(lat.a)?,
            s_b: self.cells(lat.inv_b())?,
        })
    }

    /// Finest grid containing both.
    pub fn join(&self, other: &GridSpec) -> GridSpec {
        GridSpec {
            den: lcm(self.den, other.den),
        }
    }
}

/// The grid `Δ = 1/(R·M)` with `M` the least positive integer such that `aM`
/// and `M/b` are integers.
pub fn common_grid(a: Rational, b: Rational, resolution: i64) -> Result<GridSpec> {
    if *a.numer() <= 0 || *b.numer() <= 0 {
        return Err(Error::Input(format!(
            "lattice parameters must be positive, got a = {a}, b = {b}"
        )));
    }
    if resolution <= 0 {
        return Err(Error::Input("resolution must be positive".into()));
    }
    // aM ∈ ℤ ⇔ den(a) | M; M/b = M·den(b)/num(b) ∈ ℤ ⇔ num(b) | M.
    let m = lcm(*a.denom(), *b.numer());
    GridSpec::new(resolution * m)
}

/// Maximal interval `[start, end)` of cells carrying one value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Run {
    pub start: i64,
    pub end: i64,
    pub value: C64,
}

impl Run {
    pub fn len(&self) -> i64 {
        self.end - self.start
    }
}

/// Sort-stable cleanup: drop empty and zero runs, merge equal neighbours.
fn normalize_runs(runs: Vec<Run>) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs {
        if r.end <= r.start || r.value == C64::new(0.0, 0.0) {
            continue;
        }
        if let Some(last) = out.last_mut() {
            debug_assert!(last.end <= r.start, "runs overlap");
            if last.end == r.start && last.value == r.value {
                last.end = r.end;
                continue;
            }
        }
        out.push(r);
    }
    out
}

/// Sums possibly overlapping weighted intervals into disjoint runs. Each
/// elementary segment is summed in contribution order with compensation, so
/// the result is reproducible and segments covered by no contribution are
/// exactly zero.
pub fn accumulate(contribs: &[Run]) -> Vec<Run> {
    if contribs.is_empty() {
        return Vec::new();
    }
    let mut events: Vec<(i64, bool, usize)> = Vec::with_capacity(2 * contribs.len());
    for (i, c) in contribs.iter().enumerate() {
        if c.end > c.start {
            events.push((c.start, true, i));
            events.push((c.end, false, i));
        }
    }
    events.sort_by_key(|e| e.0);
    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    let mut idx = 0;
    while idx < events.len() {
        let x = events[idx].0;
        while idx < events.len() && events[idx].0 == x {
            let (_, open, i) = events[idx];
            if open {
                let pos = active.partition_point(|&j| j < i);
                active.insert(pos, i);
            } else {
                let pos = active.partition_point(|&j| j < i);
                active.remove(pos);
            }
            idx += 1;
        }
        if idx < events.len() && !active.is_empty() {
            let next = events[idx].0;
            let mut s = CompensatedSum::new();
            for &j in &active {
                s.add(contribs[j].value);
            }
            out.push(Run {
                start: x,
                end: next,
                value: s.value(),
            });
        }
    }
    normalize_runs(out)
}

/// Merge two run lists over the union of their breakpoints and combine values.
fn merge_runs(x: &[Run], y: &[Run], op: impl Fn(C64, C64) -> C64) -> Vec<Run> {
    let mut pts: Vec<i64> = Vec::with_capacity(2 * (x.len() + y.len()));
    for r in x.iter().chain(y.iter()) {
        pts.push(r.start);
        pts.push(r.end);
    }
    pts.sort_unstable();
    pts.dedup();
    let zero = C64::new(0.0, 0.0);
    let (mut i, mut j) = (0usize, 0usize);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (s, e) = (w[0], w[1]);
        while i < x.len() && x[i].end <= s {
            i += 1;
        }
        while j < y.len() && y[j].end <= s {
            j += 1;
        }
        let vx = if i < x.len() && x[i].start <= s { x[i].value } else { zero };
        let vy = if j < y.len() && y[j].start <= s { y[j].value } else { zero };
        let v = op(vx, vy);
        out.push(Run { start: s, end: e, value: v });
    }
    normalize_runs(out)
}

fn run_lookup(runs: &[Run], cell: i64) -> C64 {
    let pos = runs.partition_point(|r| r.end <= cell);
    match runs.get(pos) {
        Some(r) if r.start <= cell => r.value,
        _ => C64::new(0.0, 0.0),
    }
}

/// Finitely supported piecewise constant complex function on a uniform grid.
/// Cell `j` is `[jΔ, (j+1)Δ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: GridSpec,
    runs: Vec<Run>,
}

impl StepFunction {
    pub fn zero(grid: GridSpec) -> Self {
        Self { grid, runs: Vec::new() }
    }

    /// Dense constructor: `values[j]` lives on cell `lo + j`.
    pub fn new(grid: GridSpec, lo: i64, values: &[C64]) -> Self {
        let runs = values
            .iter()
            .enumerate()
            .map(|(j, &v)| Run {
                start: lo + j as i64,
                end: lo + j as i64 + 1,
                value: v,
            })
            .collect();
        Self {
            grid,
            runs: normalize_runs(runs),
        }
    }

    pub fn from_real(grid: GridSpec, lo: i64, values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(grid, lo, &v)
    }

    /// Runs must be sorted and disjoint.
    pub fn from_runs(grid: GridSpec, runs: Vec<Run>) -> Result<Self> {
        for w in runs.windows(2) {
            if w[0].end > w[1].start {
                return Err(Error::Input("runs must be sorted and disjoint".into()));
            }
        }
        Ok(Self {
            grid,
            runs: normalize_runs(runs),
        })
    }

    /// `value · χ_[start, end)` with rational endpoints on the grid.
    pub fn indicator(grid: GridSpec, start: Rational, end: Rational, value: C64) -> Result<Self> {
        let s = grid.cells(start)?;
        let e = grid.cells(end)?;
        Self::from_runs(grid, vec![Run { start: s, end: e, value }])
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_zero(&self) -> bool {
        self.runs.is_empty()
    }

    /// First cell of the support (0 for the zero function).
    pub fn lo(&self) -> i64 {
        self.runs.first().map_or(0, |r| r.start)
    }

    /// One past the last support cell.
    pub fn hi(&self) -> i64 {
        self.runs.last().map_or(0, |r| r.end)
    }

    pub fn support_cells(&self) -> i64 {
        self.hi() - self.lo()
    }

    pub fn value_at(&self, cell: i64) -> C64 {
        run_lookup(&self.runs, cell)
    }

    /// Value at a real time point (cell containing `t`).
    pub fn eval(&self, t: f64) -> C64 {
        self.value_at((t * self.grid.den as f64).floor() as i64)
    }

    /// Dense values on `[lo, hi)`.
    pub fn cell_values(&self) -> Vec<C64> {
        let lo = self.lo();
        let mut v = vec![C64::new(0.0, 0.0); self.support_cells() as usize];
        for r in &self.runs {
            for c in r.start..r.end {
                v[(c - lo) as usize] = r.value;
            }
        }
        v
    }

    pub fn shift_cells(&self, cells: i64) -> Self {
        Self {
            grid: self.grid,
            runs: self
                .runs
                .iter()
                .map(|r| Run {
                    start: r.start + cells,
                    end: r.end + cells,
                    value: r.value,
                })
                .collect(),
        }
    }

    /// `T_s f(t) = f(t − s)`.
    pub fn translate(&self, shift: Rational) -> Result<Self> {
        Ok(self.shift_cells(self.grid.cells(shift)?))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let runs = self
            .runs
            .iter()
            .map(|r| Run { value: f(r.value), ..*r })
            .collect();
        Self {
            grid: self.grid,
            runs: normalize_runs(runs),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Grid(format!(
                "grid mismatch: 1/{} vs 1/{}",
                self.grid.den, other.grid.den
            )));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            runs: merge_runs(&self.runs, &other.runs, op),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    /// Resample onto the finer grid `1/den` by duplicating cell values.
    pub fn refine(&self, den: i64) -> Result<Self> {
        if den % self.grid.den != 0 {
            return Err(Error::Grid(format!(
                "1/{den} does not refine 1/{}",
                self.grid.den
            )));
        }
        let f = den / self.grid.den;
        Ok(Self {
            grid: GridSpec { den },
            runs: self
                .runs
                .iter()
                .map(|r| Run {
                    start: r.start * f,
                    end: r.end * f,
                    value: r.value,
                })
                .collect(),
        })
    }

    pub fn norm_l2_sq(&self) -> f64 {
        let d = self.grid.step_f64();
        d * compensated_sum_re(self.runs.iter().map(|r| r.len() as f64 * r.value.norm_sqr()))
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        let d = self.grid.step_f64();
        d * compensated_sum_re(self.runs.iter().map(|r| r.len() as f64 * r.value.norm()))
    }

    pub fn norm_sup(&self) -> f64 {
        self.runs.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }

    /// `f̂(ξ) = ∫ f(t) e^{−2πitξ} dt`, closed form per run.
    pub fn fourier_transform(&self, xi: f64) -> C64 {
        let d = self.grid.step_f64();
        if xi == 0.0 {
            return compensated_sum(
                self.runs.iter().map(|r| r.value * (r.len() as f64 * d)),
            );
        }
        let denom = C64::new(0.0, -2.0 * PI * xi);
        compensated_sum(self.runs.iter().map(|r| {
            let e1 = cis(-xi * r.end as f64 * d);
            let e0 = cis(-xi * r.start as f64 * d);
            r.value * (e1 - e0) / denom
        }))
    }

    pub fn to_file(&self) -> WindowFile {
        let v = self.cell_values();
        WindowFile {
            grid_den: self.grid.den,
            lo: self.lo(),
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }
}

/// `∫ f(t) · conj(e^{2πiyt} g(t)) dt`, exact per cell up to rounding.
pub fn modulated_inner_product(f: &StepFunction, g: &StepFunction, y: f64) -> Result<C64> {
    f.check_grid(g)?;
    let prod = merge_runs(&f.runs, &g.runs, |x, z| x * z.conj());
    let d = f.grid.step_f64();
    if y == 0.0 {
        let s = compensated_sum(prod.iter().map(|r| r.value * r.len() as f64));
        return Ok(s * d);
    }
    let denom = C64::new(0.0, -2.0 * PI * y);
    Ok(compensated_sum(prod.iter().map(|r| {
        let e1 = cis(-y * r.end as f64 * d);
        let e0 = cis(-y * r.start as f64 * d);
        r.value * (e1 - e0) / denom
    })))
}

/// Window file: `{ "grid_den": int, "lo": int, "re": [..], "im": [..] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WindowFile {
    pub grid_den: i64,
    pub lo: i64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WindowFile {
    pub fn to_step_function(&self) -> Result<StepFunction> {
        let grid = GridSpec::new(self.grid_den)?;
        if self.re.len() != self.im.len() {
            return Err(Error::Input(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let v: Vec<C64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        Ok(StepFunction::new(grid, self.lo, &v))
    }
}

/// Function of period `period · Δ`, stored as runs inside `[0, period)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicStepFunction {
    grid: GridSpec,
    period: i64,
    runs: Vec<Run>,
}

impl PeriodicStepFunction {
    pub fn zero(grid: GridSpec, period: i64) -> Self {
        Self {
            grid,
            period,
            runs: Vec::new(),
        }
    }

    pub fn constant(grid: GridSpec, period: i64, value: C64) -> Self {
        Self {
            grid,
            period,
            runs: normalize_runs(vec![Run {
                start: 0,
                end: period,
                value,
            }]),
        }
    }

    /// One period of dense cell values.
    pub fn from_values(grid: GridSpec, values: &[C64]) -> Self {
        let period = values.len() as i64;
        let f = StepFunction::new(grid, 0, values);
        Self {
            grid,
            period,
            runs: f.runs,
        }
    }

    /// Runs must be sorted, disjoint and inside `[0, period)`.
    pub fn from_runs(grid: GridSpec, period: i64, runs: Vec<Run>) -> Result<Self> {
        if runs.iter().any(|r| r.start < 0 || r.end > period) {
            return Err(Error::Input("periodic runs must lie in one period".into()));
        }
        for w in runs.windows(2) {
            if w[0].end > w[1].start {
                return Err(Error::Input("runs must be sorted and disjoint".into()));
            }
        }
        Ok(Self {
            grid,
            period,
            runs: normalize_runs(runs),
        })
    }

    /// Periodization `Σ_n f(t − n·period)`.
    pub fn periodize(f: &StepFunction, period: i64) -> Self {
        let mut pieces = Vec::new();
        for r in &f.runs {
            let mut pos = r.start.rem_euclid(period);
            let mut remaining = r.len();
            let first = remaining.min(period - pos);
            pieces.push(Run {
                start: pos,
                end: pos + first,
                value: r.value,
            });
            remaining -= first;
            pos = 0;
            let full = remaining / period;
            if full > 0 {
                pieces.push(Run {
                    start: 0,
                    end: period,
                    value: r.value * full as f64,
                });
                remaining -= full * period;
            }
            if remaining > 0 {
                pieces.push(Run {
                    start: pos,
                    end: remaining,
                    value: r.value,
                });
            }
        }
        Self {
            grid: f.grid,
            period,
            runs: accumulate(&pieces),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn period_cells(&self) -> i64 {
        self.period
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_zero(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn value_at(&self, cell: i64) -> C64 {
        run_lookup(&self.runs, cell.rem_euclid(self.period))
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.value_at((t * self.grid.den as f64).floor() as i64)
    }

    /// Constant over the whole period (including the zero function).
    pub fn constant_value(&self) -> Option<C64> {
        match self.runs.as_slice() {
            [] => Some(C64::new(0.0, 0.0)),
            [r] if r.start == 0 && r.end == self.period => Some(r.value),
            _ => None,
        }
    }

    pub fn cell_values(&self) -> Vec<C64> {
        (0..self.period).map(|c| self.value_at(c)).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.runs.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }

    /// Starts of the elementary segments, always including 0.
    pub fn breakpoints(&self) -> Vec<i64> {
        let mut pts = vec![0];
        for r in &self.runs {
            pts.push(r.start);
            pts.push(r.end);
        }
        pts.retain(|&x| x < self.period);
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        // Zero cells map too, so walk the breakpoints.
        let pts = self.breakpoints();
        let mut runs = Vec::with_capacity(pts.len());
        for (i, &s) in pts.iter().enumerate() {
            let e = pts.get(i + 1).copied().unwrap_or(self.period);
            runs.push(Run {
                start: s,
                end: e,
                value: f(self.value_at(s)),
            });
        }
        Self {
            grid: self.grid,
            period: self.period,
            runs: normalize_runs(runs),
        }
    }

    /// Unroll over `[start, end)` as runs on the real line.
    pub fn unroll(&self, start: i64, end: i64) -> Vec<Run> {
        if end <= start {
            return Vec::new();
        }
        if let Some(c) = self.constant_value() {
            return normalize_runs(vec![Run { start, end, value: c }]);
        }
        let p = self.period;
        let mut out = Vec::new();
        let mut base = start.div_euclid(p) * p;
        while base < end {
            for r in &self.runs {
                let s = (base + r.start).max(start);
                let e = (base + r.end).min(end);
                if e > s {
                    out.push(Run { start: s, end: e, value: r.value });
                }
            }
            base += p;
        }
        normalize_runs(out)
    }
}

/// Union of the breakpoints of several functions sharing one period.
pub fn common_breakpoints<'a, I>(period: i64, funcs: I) -> Vec<i64>
where
    I: IntoIterator<Item = &'a PeriodicStepFunction>,
{
    let mut pts = vec![0];
    for f in funcs {
        for r in f.runs() {
            pts.push(r.start);
            pts.push(r.end);
        }
    }
    pts.retain(|&x| x >= 0 && x < period);
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// Finite cyclic Gabor system on `ℤ_N`: atoms
/// `j ↦ e^{2πimj/L} · w((j − n·a_d) mod N)` for `0 ≤ m < L`, `0 ≤ n < N/a_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGaborSystem {
    pub n: usize,
    pub a_d: usize,
    pub l: usize,
    pub window: Vec<C64>,
}

impl DiscreteGaborSystem {
    pub fn new(n: usize, a_d: usize, l: usize, window: Vec<C64>) -> Result<Self> {
        if n == 0 || a_d == 0 || l == 0 {
            return Err(Error::Input("N, a and L must be positive".into()));
        }
        if n % a_d != 0 || n % l != 0 {
            return Err(Error::Input(format!(
                "a = {a_d} and L = {l} must divide N = {n}"
            )));
        }
        if window.len() != n {
            return Err(Error::Input(format!(
                "window has {} samples, expected {n}",
                window.len()
            )));
        }
        Ok(Self { n, a_d, l, window })
    }

    pub fn shifts(&self) -> usize {
        self.n / self.a_d
    }

    pub fn atom_count(&self) -> usize {
        self.shifts() * self.l
    }

    pub fn atom(&self, m: usize, n: usize) -> Result<Vec<C64>> {
        if m >= self.l || n >= self.shifts() {
            return Err(Error::Input(format!(
                "atom index ({m}, {n}) outside 0..{} × 0..{}",
                self.l,
                self.shifts()
            )));
        }
        let len = self.n;
        let shift = n * self.a_d;
        Ok((0..len)
            .map(|j| {
                let phase = cis(((m * j) % self.l) as f64 / self.l as f64);
                phase * self.window[(j + len - shift) % len]
            })
            .collect())
    }

    pub fn to_file(&self) -> DiscreteFile {
        DiscreteFile {
            n: self.n,
            a: self.a_d,
            l: self.l,
            re: self.window.iter().map(|z| z.re).collect(),
            im: self.window.iter().map(|z| z.im).collect(),
        }
    }
}

pub fn discrete_atom(sys: &DiscreteGaborSystem, m: usize, n: usize) -> Result<Vec<C64>> {
    sys.atom(m, n)
}

/// Discrete system file: `{ "N": int, "a": int, "L": int, "re": [..], "im": [..] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DiscreteFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl DiscreteFile {
    pub fn to_system(&self) -> Result<DiscreteGaborSystem> {
        if self.re.len() != self.im.len() {
            return Err(Error::Input("re and im lengths differ".into()));
        }
        let w = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        DiscreteGaborSystem::new(self.n, self.a, self.l, w)
    }
}
