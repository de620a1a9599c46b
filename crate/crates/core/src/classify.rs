//! Predicates on Gabor and shift-invariant systems: tightness, equality of
//! frame operators, Schur upper bounds, CC propagation through `S`, and
//! extension of `S` to `L¹`, `L^∞` and the Wiener amalgam space.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::correlations::{cc_bound, correlation_family, wiener_norm, CorrelationFamily};
use crate::error::{Error, Result};
use crate::model::{
    gcd, lcm, rational, rational_f64, GridSpec, LatticeParams, Rational, StepFunction, C64,
};
use crate::walnut::{apply_walnut, PartialSumSpec};

const EXACT_TOL: f64 = 1e-12;

/// A cell and index where a predicate fails, with the values that disagree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub cell: i64,
    pub k: i64,
    /// `[re, im]` pairs.
    pub values: Vec<[f64; 2]>,
}

impl Witness {
    fn new(cell: i64, k: i64, values: &[C64]) -> Self {
        Self {
            cell,
            k,
            values: values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn verdict_json(predicate: &str, verdict: &str, witness: &Option<Witness>, details: serde_json::Value) -> serde_json::Value {
    json!({
        "predicate": predicate,
        "verdict": verdict,
        "witness": witness,
        "details": details,
    })
}

fn require_exact(fam: &CorrelationFamily) -> Result<()> {
    if !fam.exact_tail {
        return Err(Error::Precondition("needs a compactly supported window".into()));
    }
    Ok(())
}

fn inv_b(lat: &LatticeParams) -> f64 {
    rational_f64(lat.inv_b())
}

// ---------------------------------------------------------------------------
// Tightness

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tightness {
    NormalizedTight,
    /// `S = λ·I`.
    Tight { lambda: f64 },
    NotTight,
    /// `g = 0`.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TightReport {
    pub verdict: Tightness,
    pub witness: Option<Witness>,
}

impl TightReport {
    pub fn to_json(&self) -> serde_json::Value {
        let label = match self.verdict {
            Tightness::NormalizedTight => "normalized-tight",
            Tightness::Tight { .. } => "tight",
            Tightness::NotTight => "not-tight",
            Tightness::Degenerate => "degenerate",
        };
        verdict_json("tight", label, &self.witness, json!(self.verdict))
    }
}

/// `S = λI` iff `G_0 ≡ λb` and `G_k ≡ 0` for `k ≠ 0`.
pub fn tight_check(g: &StepFunction, lat: &LatticeParams) -> Result<TightReport> {
    let fam = correlation_family(g, lat)?;
    require_exact(&fam)?;
    if fam.entries.is_empty() {
        return Ok(TightReport {
            verdict: Tightness::Degenerate,
            witness: None,
        });
    }
    let g0 = fam.get(0);
    let scale = g0.sup_abs().max(EXACT_TOL);
    for (&k, e) in fam.entries.iter().filter(|(k, _)| **k != 0) {
        let (cell, v) = (0..fam.period)
            .map(|c| (c, e.value_at(c)))
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .expect("period is positive");
        if v.norm() > EXACT_TOL * scale {
            return Ok(TightReport {
                verdict: Tightness::NotTight,
                witness: Some(Witness::new(cell, k, &[v])),
            });
        }
    }
    let first = g0.value_at(0);
    for cell in 0..fam.period {
        let v = g0.value_at(cell);
        if (v - first).norm() > EXACT_TOL * scale {
            return Ok(TightReport {
                verdict: Tightness::NotTight,
                witness: Some(Witness::new(cell, 0, &[first, v])),
            });
        }
    }
    let b = rational_f64(lat.b);
    let verdict = if (first.re - b).abs() <= EXACT_TOL * scale.max(b) {
        Tightness::NormalizedTight
    } else {
        Tightness::Tight {
            lambda: first.re / b,
        }
    };
    Ok(TightReport { verdict, witness: None })
}

// ---------------------------------------------------------------------------
// Equal frame operators

#[derive(Clone, Debug, PartialEq)]
pub struct EqualReport {
    pub equal: bool,
    /// `d/b = p/q` in lowest terms.
    pub p: i64,
    pub q: i64,
    pub witness: Option<Witness>,
    /// Largest common period of `a` and `c`; every matched correlation is
    /// checked to be periodic with it.
    pub common_period: Rational,
    pub periodicity_verified: bool,
}

impl EqualReport {
    pub fn to_json(&self) -> serde_json::Value {
        verdict_json(
            "equal-frame-operator",
            if self.equal { "equal" } else { "not-equal" },
            &self.witness,
            json!({
                "p": self.p,
                "q": self.q,
                "case": "rational",
                "common_period": self.common_period.to_string(),
                "periodicity_verified": self.periodicity_verified,
            }),
        )
    }
}

fn rational_gcd(x: Rational, y: Rational) -> Rational {
    let den = lcm(*x.denom(), *y.denom());
    let xn = (x * Rational::from_integer(den)).to_integer();
    let yn = (y * Rational::from_integer(den)).to_integer();
    rational(gcd(xn, yn), den)
}

/// Decides `S_g = S_h` for `(g, a, b)` and `(h, c, d)` from
/// `b^{−1}G_{g,qk} = d^{−1}G_{h,pk}` and vanishing of every unmatched index.
pub fn equal_frame_operator(
    g: &StepFunction,
    lat_g: &LatticeParams,
    h: &StepFunction,
    lat_h: &LatticeParams,
) -> Result<EqualReport> {
    let fg = correlation_family(g, lat_g)?;
    let fh = correlation_family(h, lat_h)?;
    require_exact(&fg)?;
    require_exact(&fh)?;
    let ratio = lat_h.b / lat_g.b;
    let (p, q) = (*ratio.numer(), *ratio.denom());
    let grid = fg.grid.join(&fh.grid);
    let fg = fg.refine(grid.den)?;
    let fh = fh.refine(grid.den)?;
    let span = lcm(fg.period, fh.period);
    let common_period = rational_gcd(lat_g.a, lat_h.a);
    let pc = grid.cells(common_period)?;
    let (sg, sh) = (inv_b(lat_g), inv_b(lat_h));
    let scale = fg
        .entries
        .values()
        .map(|e| e.sup_abs() * sg)
        .chain(fh.entries.values().map(|e| e.sup_abs() * sh))
        .fold(EXACT_TOL, f64::max);
    let tol = EXACT_TOL * scale;

    let mut report = EqualReport {
        equal: true,
        p,
        q,
        witness: None,
        common_period,
        periodicity_verified: true,
    };
    let first_nonzero = |fam: &CorrelationFamily, k: i64| -> Option<Witness> {
        let e = fam.get(k);
        (0..fam.period)
            .find(|&c| e.value_at(c).norm() > tol)
            .map(|c| Witness::new(c, k, &[e.value_at(c)]))
    };
    for &m in fg.entries.keys().filter(|m| **m % q != 0) {
        if let Some(w) = first_nonzero(&fg, m) {
            report.equal = false;
            report.witness = Some(w);
            return Ok(report);
        }
    }
    for &l in fh.entries.keys().filter(|l| **l % p != 0) {
        if let Some(w) = first_nonzero(&fh, l) {
            report.equal = false;
            report.witness = Some(w);
            return Ok(report);
        }
    }
    let mut ks: Vec<i64> = fg
        .entries
        .keys()
        .filter(|m| **m % q == 0)
        .map(|m| m / q)
        .chain(fh.entries.keys().filter(|l| **l % p == 0).map(|l| l / p))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let (eg, eh) = (fg.get(q * k), fh.get(p * k));
        for cell in 0..span {
            let (x, y) = (eg.value_at(cell) * sg, eh.value_at(cell) * sh);
            if (x - y).norm() > tol {
                report.equal = false;
                report.witness = Some(Witness::new(cell, k, &[x, y]));
                return Ok(report);
            }
            if (eg.value_at(cell + pc) - eg.value_at(cell)).norm() * sg > tol {
                report.periodicity_verified = false;
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Shift-invariant systems and the Schur test

/// The system `(g_m(· − na))_{m, n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftInvariantSystem {
    pub generators: Vec<StepFunction>,
    pub shift: Rational,
}

impl ShiftInvariantSystem {
    pub fn new(generators: Vec<StepFunction>, shift: Rational) -> Result<Self> {
        if *shift.numer() <= 0 {
            return Err(Error::Input(format!("shift must be positive, got {shift}")));
        }
        Ok(Self { generators, shift })
    }

    /// Finest grid carrying every generator and the shift.
    pub fn grid(&self) -> GridSpec {
        self.generators
            .iter()
            .fold(GridSpec { den: *self.shift.denom() }, |acc, g| acc.join(&g.grid()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    /// `sup_x ∫ |K(x, y)| dy` for the frame-operator kernel `K`.
    pub upper: f64,
    /// Row-norm lower estimate of `‖S‖`, the larger of the time-domain and
    /// Fourier-domain row-0 estimates.
    pub necessary_lower: f64,
    /// Cell (within one shift period) where the Schur row sum peaks.
    pub peak_cell: i64,
    /// `sup_ν Σ_{|k|≤K} |(1/a)Σ_m ĝ_m(ν)·conj(ĝ_m(ν − k/a))|` on the sampled ν grid;
    /// a partial Fourier row sum, diagnostic only.
    pub fourier_row_sum: f64,
    /// `sup_ν (Σ_{|k|≤K} |…|²)^{1/2}` on the same grid.
    pub fourier_row_l2: f64,
    pub k_max: i64,
    pub nu_points: usize,
}

impl SchurReport {
    pub fn to_json(&self) -> serde_json::Value {
        verdict_json("schur", "certified", &None, json!(self))
    }
}

/// Kernel rows `K(i, ·) = Σ_{m,n} g_m(i − n·a)·conj(g_m(· − n·a))` for the cells of one period.
fn kernel_rows(sys: &ShiftInvariantSystem, grid: GridSpec) -> Result<Vec<BTreeMap<i64, C64>>> {
    let s_a = grid.cells(sys.shift)?;
    let gens: Vec<StepFunction> = sys
        .generators
        .iter()
        .map(|g| g.refine(grid.den))
        .collect::<Result<_>>()?;
    let mut rows = vec![BTreeMap::new(); s_a as usize];
    for (i, row) in rows.iter_mut().enumerate() {
        let i = i as i64;
        for g in gens.iter().filter(|g| !g.is_zero()) {
            let (lo, hi) = (g.lo(), g.hi());
            // g(i − n·s_a) ≠ 0 needs lo ≤ i − n·s_a < hi.
            let n_lo = (i - hi + 1).div_euclid(s_a) - 1;
            let n_hi = (i - lo).div_euclid(s_a) + 1;
            for n in n_lo..=n_hi {
                let x = g.value_at(i - n * s_a);
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for r in g.runs() {
                    for c in r.start..r.end {
                        *row.entry(c + n * s_a).or_insert(C64::new(0.0, 0.0)) += x * r.value.conj();
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn schur_upper_bound(sys: &ShiftInvariantSystem, k_max: i64, nu_points: usize) -> Result<SchurReport> {
    let grid = sys.grid();
    let d = grid.step_f64();
    let rows = kernel_rows(sys, grid)?;
    let (mut upper, mut peak_cell, mut time_lower) = (0.0f64, 0i64, 0.0f64);
    for (i, row) in rows.iter().enumerate() {
        let l1 = d * row.values().map(|z| z.norm()).sum::<f64>();
        let l2 = d * row.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if l1 > upper {
            upper = l1;
            peak_cell = i as i64;
        }
        time_lower = time_lower.max(l2);
    }
    let a = rational_f64(sys.shift);
    let (mut fourier_row_sum, mut fourier_row_l2) = (0.0f64, 0.0f64);
    if !sys.generators.is_empty() {
        for j in 0..nu_points.max(1) {
            let nu = j as f64 / (nu_points.max(1) as f64 * a);
            let at_nu: Vec<C64> = sys.generators.iter().map(|g| g.fourier_transform(nu)).collect();
            let (mut s1, mut s2) = (0.0, 0.0);
            for k in -k_max..=k_max {
                let shifted = nu - k as f64 / a;
                let v: C64 = sys
                    .generators
                    .iter()
                    .zip(&at_nu)
                    .map(|(g, x)| x * g.fourier_transform(shifted).conj())
                    .sum::<C64>()
                    / a;
                s1 += v.norm();
                s2 += v.norm_sqr();
            }
            fourier_row_sum = fourier_row_sum.max(s1);
            fourier_row_l2 = fourier_row_l2.max(s2.sqrt());
        }
    }
    Ok(SchurReport {
        upper,
        necessary_lower: time_lower.max(fourier_row_l2),
        peak_cell,
        fourier_row_sum,
        fourier_row_l2,
        k_max,
        nu_points,
    })
}

// ---------------------------------------------------------------------------
// CC propagation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationStage {
    pub stage: usize,
    /// `b^{−1}·sup_t Σ_k |G_k(t)|` for the window `S^stage g`.
    pub bound: f64,
    /// `M^{2·stage+1}`.
    pub limit: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    /// `M = b^{−1}·sup_t Σ_k |G_k(t)|` for `g`.
    pub m: f64,
    pub stages: Vec<PropagationStage>,
}

impl PropagationReport {
    pub fn holds(&self) -> bool {
        self.stages.iter().all(|s| s.within)
    }

    pub fn to_json(&self) -> serde_json::Value {
        verdict_json(
            "cc-propagation",
            if self.holds() { "holds" } else { "fails" },
            &None,
            json!(self),
        )
    }
}

/// Pushes `g` through `S` up to three times and compares the CC bound of each
/// image with `M^{2s+1}`; the image system `S^s g` has frame operator `S^{2s+1}`.
pub fn cc_propagation_check(g: &StepFunction, lat: &LatticeParams, stages: usize) -> Result<PropagationReport> {
    if stages == 0 || stages > 3 {
        return Err(Error::Input(format!("stages must be in 1..=3, got {stages}")));
    }
    let fam = correlation_family(g, lat)?;
    require_exact(&fam)?;
    let ib = inv_b(lat);
    let m = ib * cc_bound(&fam);
    let mut image = g.clone();
    let mut out = Vec::with_capacity(stages);
    for stage in 1..=stages {
        image = apply_walnut(&fam, &image, &PartialSumSpec::Full, true)?;
        let bound = ib * cc_bound(&correlation_family(&image, lat)?);
        let limit = m.powi(2 * stage as i32 + 1);
        out.push(PropagationStage {
            stage,
            bound,
            limit,
            within: bound <= limit * (1.0 + 1e-9) + 1e-300,
        });
    }
    Ok(PropagationReport { m, stages: out })
}

// ---------------------------------------------------------------------------
// Extension to L¹, L^∞ and W(L^∞, ℓ¹)

fn random_trial(rng: &mut ChaCha8Rng, grid: GridSpec, span: i64) -> StepFunction {
    let lo = rng.gen_range(-span..span);
    let len = rng.gen_range(1..=span) as usize;
    let vals: Vec<C64> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.2) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    StepFunction::new(grid, lo, &vals)
}

fn require_density(lat: &LatticeParams) -> Result<()> {
    if lat.ab() > Rational::from_integer(1) {
        return Err(Error::Lattice(format!("ab = {} exceeds 1", lat.ab())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub n: i64,
    /// `|Sf_n|` at the witness cell; equals `b^{−1}Σ_{|k|≤n}|G_k|` there.
    pub value: f64,
    pub target: f64,
    /// `‖Sf_n‖_∞`.
    pub sup_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub cc_bound: f64,
    /// `b^{−1}·cc_bound`, the claimed bound on `L¹` and `L^∞`.
    pub operator_bound: f64,
    pub trials: usize,
    pub l1_ratio_max: f64,
    pub linf_ratio_max: f64,
    pub forward_holds: bool,
    pub witness_cell: i64,
    pub witness: Vec<WitnessStep>,
    pub converse_holds: bool,
}

impl LpReport {
    pub fn to_json(&self) -> serde_json::Value {
        let ok = self.forward_holds && self.converse_holds;
        verdict_json("lp-extension", if ok { "holds" } else { "fails" }, &None, json!(self))
    }
}

/// Forward bounds on random trials, plus the phase-aligned witness
/// `f_n = Σ_{|k|≤n} conj(G_k(t0))/|G_k(t0)|·χ_{t0-cell − k/b + [0, a)}`.
pub fn lp_extension_check(g: &StepFunction, lat: &LatticeParams, trials: usize, seed: u64) -> Result<LpReport> {
    require_density(lat)?;
    let fam = correlation_family(g, lat)?;
    require_exact(&fam)?;
    let b_cc = cc_bound(&fam);
    let op = inv_b(lat) * b_cc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (fam.period * 3).max(fam.s_b() * 3).max(8);
    let (mut l1_max, mut linf_max) = (0.0f64, 0.0f64);
    let mut forward_holds = true;
    for _ in 0..trials {
        let f = random_trial(&mut rng, fam.grid, span);
        if f.is_zero() {
            continue;
        }
        let sf = apply_walnut(&fam, &f, &PartialSumSpec::Full, true)?;
        let r1 = sf.norm_l1() / f.norm_l1();
        let rinf = sf.norm_sup() / f.norm_sup();
        l1_max = l1_max.max(r1);
        linf_max = linf_max.max(rinf);
        if r1 > op * (1.0 + 1e-12) + 1e-300 || rinf > op * (1.0 + 1e-12) + 1e-300 {
            forward_holds = false;
        }
    }

    let (cell, _) = fam
        .segment_values()
        .into_iter()
        .map(|(seg, vals)| (seg.0, vals.iter().map(|(_, v)| v.norm()).sum::<f64>()))
        .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
    let s_b = fam.s_b();
    let (s_a, ib) = (fam.period, inv_b(lat));
    let mut witness = Vec::new();
    let mut converse_holds = true;
    let mut pieces: Vec<i64> = Vec::new();
    let mut target = 0.0;
    for n in 0..=fam.max_abs_k() {
        for k in if n == 0 { vec![0] } else { vec![-n, n] } {
            let gk = fam.get(k).value_at(cell);
            target += ib * gk.norm();
            if gk.norm() > 0.0 {
                pieces.push(k);
            }
        }
        let mut runs = Vec::new();
        for &k in &pieces {
            let gk = fam.get(k).value_at(cell);
            let start = cell - k * s_b - cell.rem_euclid(s_a);
            runs.push(crate::model::Run {
                start,
                end: start + s_a,
                value: gk.conj() / gk.norm(),
            });
        }
        runs.sort_by_key(|r| r.start);
        let f = StepFunction::from_runs(fam.grid, runs)?;
        let sf = apply_walnut(&fam, &f, &PartialSumSpec::Full, true)?;
        let value = sf.value_at(cell).norm();
        if (value - target).abs() > 1e-8 * (1.0 + target) {
            converse_holds = false;
        }
        if let Some(prev) = witness.last().map(|w: &WitnessStep| w.value) {
            if value < prev - 1e-12 {
                converse_holds = false;
            }
        }
        witness.push(WitnessStep {
            n,
            value,
            target,
            sup_norm: sf.norm_sup(),
        });
    }
    Ok(LpReport {
        cc_bound: b_cc,
        operator_bound: op,
        trials,
        l1_ratio_max: l1_max,
        linf_ratio_max: linf_max,
        forward_holds,
        witness_cell: cell,
        witness,
        converse_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerExtensionReport {
    /// `Σ_k ‖G_k‖_∞`.
    pub sum_sup: f64,
    /// `‖g‖_{W,a}`.
    pub window_amalgam: f64,
    pub amalgam_inequality: bool,
    /// Least natural `m` with `1/b ≤ m·a`.
    pub m: i64,
    pub trials: usize,
    pub ratio_max: f64,
    /// `4m·b^{−1}·Σ_k ‖G_k‖_∞`.
    pub trial_limit: f64,
    pub trials_hold: bool,
}

impl WienerExtensionReport {
    pub fn to_json(&self) -> serde_json::Value {
        let ok = self.amalgam_inequality && self.trials_hold;
        verdict_json("wiener-extension", if ok { "holds" } else { "fails" }, &None, json!(self))
    }
}

pub fn wiener_extension_check(
    g: &StepFunction,
    lat: &LatticeParams,
    trials: usize,
    seed: u64,
) -> Result<WienerExtensionReport> {
    require_density(lat)?;
    let fam = correlation_family(g, lat)?;
    require_exact(&fam)?;
    let sum_sup: f64 = fam.entries.values().map(|e| e.sup_abs()).sum();
    let window_amalgam = wiener_norm(g, lat.a)?.norm;
    let amalgam_inequality = sum_sup <= 4.0 * window_amalgam * window_amalgam * (1.0 + 1e-12);
    let m = (lat.inv_b() / lat.a).ceil().to_integer();
    let trial_limit = 4.0 * m as f64 * inv_b(lat) * sum_sup;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (fam.period * 3).max(fam.s_b() * 3).max(8);
    let mut ratio_max = 0.0f64;
    let mut trials_hold = true;
    for _ in 0..trials {
        let f = random_trial(&mut rng, fam.grid, span);
        if f.is_zero() {
            continue;
        }
        let sf = apply_walnut(&fam, &f, &PartialSumSpec::Full, true)?;
        let r = wiener_norm(&sf, lat.a)?.norm / wiener_norm(&f, lat.a)?.norm;
        ratio_max = ratio_max.max(r);
        if r > trial_limit * (1.0 + 1e-12) + 1e-300 {
            trials_hold = false;
        }
    }
    Ok(WienerExtensionReport {
        sum_sup,
        window_amalgam,
        amalgam_inequality,
        m,
        trials,
        ratio_max,
        trial_limit,
        trials_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{frame_matrix, shift_invariant_matrix, step_to_discrete};

    fn chi() -> StepFunction {
        StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0])
    }

    fn ex413() -> StepFunction {
        StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5])
    }

    #[test]
    fn tight_examples() {
        let one = LatticeParams::integer(1, 1);
        assert_eq!(tight_check(&chi(), &one).unwrap().verdict, Tightness::NormalizedTight);
        let r = tight_check(&ex413(), &one).unwrap();
        assert_eq!(r.verdict, Tightness::NotTight);
        assert_eq!(r.witness.unwrap().k, 0);
        let zero = StepFunction::zero(GridSpec { den: 1 });
        assert_eq!(tight_check(&zero, &one).unwrap().verdict, Tightness::Degenerate);
        let half = LatticeParams::new(rational(1, 1), rational(1, 2)).unwrap();
        match tight_check(&chi(), &half).unwrap().verdict {
            Tightness::Tight { lambda } => assert!((lambda - 2.0).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn tight_implies_flat_oracle_spectrum() {
        let half = LatticeParams::new(rational(1, 1), rational(1, 2)).unwrap();
        let br = step_to_discrete(&chi(), &half, GridSpec { den: 2 }, 16).unwrap();
        let ev = frame_matrix(&br.system).unwrap().eigenvalues();
        assert!(ev.last().unwrap() - ev[0] < 1e-8);
        assert!((br.continuous_bound(ev[0]) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn equal_operator_examples() {
        let one = LatticeParams::integer(1, 1);
        assert!(equal_frame_operator(&ex413(), &one, &ex413(), &one).unwrap().equal);
        let h = StepFunction::from_real(GridSpec { den: 2 }, 0, &[2f64.sqrt()]);
        let lat_h = LatticeParams::new(rational(1, 2), rational(2, 1)).unwrap();
        let r = equal_frame_operator(&chi(), &one, &h, &lat_h).unwrap();
        assert!(r.equal && r.p == 2 && r.q == 1 && r.periodicity_verified);
        assert_eq!(r.common_period, rational(1, 2));
        let grid = GridSpec { den: 2 };
        let sg = frame_matrix(&step_to_discrete(&chi(), &one, grid, 8).unwrap().system).unwrap();
        let sh = frame_matrix(&step_to_discrete(&h, &lat_h, grid, 8).unwrap().system).unwrap();
        assert!((sg.s - sh.s).norm() < 1e-9);

        let r = equal_frame_operator(&ex413(), &one, &chi(), &one).unwrap();
        assert!(!r.equal);
        assert_eq!(r.witness.unwrap().k, 0);
        let wide = StepFunction::from_real(GridSpec { den: 1 }, 0, &[2f64.sqrt()]);
        let lat_w = LatticeParams::new(rational(1, 1), rational(2, 1)).unwrap();
        assert!(!equal_frame_operator(&chi(), &one, &wide, &lat_w).unwrap().equal);
    }

    #[test]
    fn schur_examples() {
        let sys = ShiftInvariantSystem::new(vec![chi()], rational(1, 1)).unwrap();
        let r = schur_upper_bound(&sys, 16, 32).unwrap();
        assert!((r.upper - 1.0).abs() < 1e-12);
        assert!((r.necessary_lower - 1.0).abs() < 1e-12);

        let two = ShiftInvariantSystem::new(
            vec![chi(), StepFunction::from_real(GridSpec { den: 1 }, 1, &[1.0])],
            rational(2, 1),
        )
        .unwrap();
        let r = schur_upper_bound(&two, 16, 32).unwrap();
        let grid = GridSpec { den: 4 };
        let fm = shift_invariant_matrix(&two.generators, 8, grid, 32).unwrap();
        let lam = grid.step_f64() * fm.lambda_max;
        assert!(r.upper >= lam - 1e-6 && r.necessary_lower <= lam + 1e-9);

        let empty = ShiftInvariantSystem::new(vec![], rational(1, 1)).unwrap();
        let r = schur_upper_bound(&empty, 4, 4).unwrap();
        assert_eq!((r.upper, r.necessary_lower), (0.0, 0.0));
    }

    #[test]
    fn propagation_examples() {
        let one = LatticeParams::integer(1, 1);
        let r = cc_propagation_check(&chi(), &one, 3).unwrap();
        assert!(r.stages.iter().all(|s| (s.bound - 1.0).abs() < 1e-12) && r.holds());
        let r = cc_propagation_check(&ex413(), &one, 3).unwrap();
        assert!(r.holds());
        assert!((r.stages[0].bound - 1.0).abs() < 1e-12);
        let zero = StepFunction::zero(GridSpec { den: 1 });
        let r = cc_propagation_check(&zero, &one, 2).unwrap();
        assert!(r.stages.iter().all(|s| s.bound == 0.0));
        assert!(cc_propagation_check(&chi(), &one, 4).is_err());
    }

    #[test]
    fn lp_and_wiener_examples() {
        let one = LatticeParams::integer(1, 1);
        let r = lp_extension_check(&chi(), &one, 20, 0).unwrap();
        assert!(r.forward_holds && r.converse_holds);
        assert!((r.witness.last().unwrap().value - 1.0).abs() < 1e-12);
        let r = lp_extension_check(&ex413(), &one, 20, 0).unwrap();
        assert!(r.forward_holds && r.l1_ratio_max <= 1.0 + 1e-12);

        let g = StepFunction::from_real(GridSpec { den: 4 }, -3, &[0.3, -1.0, 0.5, 0.7, 1.0, 0.2, -0.4]);
        let lat = LatticeParams::new(rational(1, 2), rational(3, 4)).unwrap();
        let r = lp_extension_check(&g, &lat, 20, 1).unwrap();
        assert!(r.forward_holds && r.converse_holds, "{r:?}");

        let w = wiener_extension_check(&chi(), &one, 10, 0).unwrap();
        assert!((w.sum_sup - 1.0).abs() < 1e-12 && w.amalgam_inequality && w.trials_hold);
        let w = wiener_extension_check(&ex413(), &one, 10, 0).unwrap();
        assert!((w.sum_sup - 1.0).abs() < 1e-12 && (w.window_amalgam - 1.0).abs() < 1e-12);
        let w = wiener_extension_check(&g, &lat, 20, 2).unwrap();
        assert!(w.amalgam_inequality && w.trials_hold);
        let dense = LatticeParams::new(rational(2, 1), rational(1, 1)).unwrap();
        assert!(lp_extension_check(&chi(), &dense, 1, 0).is_err());
    }
}
