//! Walnut partial sums `Σ_{k∈M} θ_k (T_{k/b}f)·G_k`, their operator norms and
//! sweeps over growing index sets.
//!
//! Norms come from the Zak-domain multiplier. With `u = 1/b` and `ab = p/q`,
//! every `G_k` is `pu`-periodic and the step-`pu` Zak transform turns a
//! partial sum into multiplication by the `p×p` matrix
//! `M_{s,s'}(x,ν) = Σ_{k ≡ s−s' (p)} c_k(x + su) e^{−2πiν(k+s'−s)/p}`, `x ∈ [0,u)`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::correlations::{af_bf_weights, cc_bound, CorrelationFamily};
use crate::error::{Error, Result};
use crate::model::{
    accumulate, compensated_sum, compensated_sum_re, rational_f64, LatticeParams, Run,
    StepFunction, C64,
};
use crate::zak::PhaseTable;
use crate::zakmat::eigen_extremes;

/// Golden-ratio fraction used as a generic frequency.
pub const GOLDEN_NU: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialSumSpec {
    /// `|k| ≤ K`.
    Symmetric(i64),
    /// `−L ≤ k ≤ K`; `L = −1` gives the one-sided `1 ≤ k ≤ K`.
    Rectangular { k: i64, l: i64 },
    Subset(BTreeSet<i64>),
    /// Weighted terms; weights are usually `0`, `±1` or unimodular.
    Signed(Vec<(i64, C64)>),
    /// Every computed `G_k`.
    Full,
}

impl PartialSumSpec {
    pub fn one_sided(k: i64) -> Self {
        Self::Rectangular { k, l: -1 }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Symmetric(k) => format!("sym({k})"),
            Self::Rectangular { k, l } => format!("rect({k},{l})"),
            Self::Subset(s) => format!("subset[{}]", s.len()),
            Self::Signed(t) => format!("signed[{}]", t.len()),
            Self::Full => "full".into(),
        }
    }

    /// Largest `|k|` this index set can touch, if finite.
    pub fn reach(&self) -> Option<i64> {
        match self {
            Self::Symmetric(k) => Some(*k),
            Self::Rectangular { k, l } => Some((*k).max(*l).max(0)),
            Self::Subset(s) => Some(s.iter().map(|k| k.abs()).max().unwrap_or(0)),
            Self::Signed(t) => Some(t.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)),
            Self::Full => None,
        }
    }

    /// `(k, θ_k)` for the nonzero family entries selected by this index set.
    pub fn terms(&self, fam: &CorrelationFamily) -> Result<Vec<(i64, C64)>> {
        if let (Some(r), Some(t)) = (self.reach(), fam.truncation) {
            if !fam.exact_tail && r > t {
                return Err(Error::Precondition(format!(
                    "spec {} reaches |k| = {r} beyond the family truncation {t}",
                    self.label()
                )));
            }
        }
        let one = C64::new(1.0, 0.0);
        let keys = fam.entries.keys().copied();
        Ok(match self {
            Self::Symmetric(kk) => keys.filter(|k| k.abs() <= *kk).map(|k| (k, one)).collect(),
            Self::Rectangular { k: kk, l } => {
                keys.filter(|k| *k >= -l && *k <= *kk).map(|k| (k, one)).collect()
            }
            Self::Subset(s) => keys.filter(|k| s.contains(k)).map(|k| (k, one)).collect(),
            Self::Signed(t) => t
                .iter()
                .filter(|(k, th)| fam.entries.contains_key(k) && *th != C64::new(0.0, 0.0))
                .copied()
                .collect(),
            Self::Full => keys.map(|k| (k, one)).collect(),
        })
    }
}

/// `(b^{−1} if prefactor) Σ_{k∈spec} θ_k f(t − k/b) G_k(t)`, exact per cell.
pub fn apply_walnut(
    fam: &CorrelationFamily,
    f: &StepFunction,
    spec: &PartialSumSpec,
    include_prefactor: bool,
) -> Result<StepFunction> {
    let grid = fam.grid.join(&f.grid());
    let fam = &fam.refine(grid.den)?;
    let f = f.refine(grid.den)?;
    let scale = if include_prefactor {
        rational_f64(fam.lattice.b.recip())
    } else {
        1.0
    };
    let s_b = fam.s_b();
    let mut contribs = Vec::new();
    for (k, theta) in spec.terms(fam)? {
        let gk = &fam.entries[&k];
        let w = theta * scale;
        for r in f.shift_cells(k * s_b).runs() {
            for gr in gk.unroll(r.start, r.end) {
                contribs.push(Run {
                    start: gr.start,
                    end: gr.end,
                    value: r.value * gr.value * w,
                });
            }
        }
    }
    StepFunction::from_runs(grid, accumulate(&contribs))
}

/// Certified bracket `[low, high]` for the norm of a partial sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub low: f64,
    pub high: f64,
    /// Largest value of the multiplier at `ν = 0` (scalar case) or its matrix norm there.
    pub nu0_value: f64,
    pub nu_points: usize,
}

impl NormBracket {
    fn zero() -> Self {
        Self {
            low: 0.0,
            high: 0.0,
            nu0_value: 0.0,
            nu_points: 0,
        }
    }

    fn join(self, o: Self) -> Self {
        Self {
            low: self.low.max(o.low),
            high: self.high.max(o.high),
            nu0_value: self.nu0_value.max(o.nu0_value),
            nu_points: self.nu_points.max(o.nu_points),
        }
    }
}

fn resolution_for(span: i64) -> usize {
    (8 * span.max(1) as usize).max(1024).next_power_of_two()
}

/// Slack of a sampled maximum of `|Σ c_n e^{2πinν}|` or of a matrix norm on
/// `V` equispaced points, from centered coefficient moments.
fn sampling_slack(moments: &[(i64, f64)], v: usize) -> f64 {
    if moments.is_empty() {
        return 0.0;
    }
    let lo = moments.iter().map(|m| m.0).min().unwrap();
    let hi = moments.iter().map(|m| m.0).max().unwrap();
    let center = 0.5 * (lo + hi) as f64;
    let (mut first, mut second) = (0.0, 0.0);
    for &(n, c) in moments {
        let d = (n as f64 - center).abs();
        first += d * c;
        second += d * d * c;
    }
    let v = v as f64;
    (PI * first / v).min(0.5 * PI * PI * second / (v * v))
}

/// `‖S_M‖ = ess sup |Σ_{k∈M} θ_k G_k(t) e^{−2πikν}|` for `a = b = 1`.
pub fn multiplier_norm_a1b1(fam: &CorrelationFamily, spec: &PartialSumSpec) -> Result<NormBracket> {
    if !fam.lattice.is_a1b1() {
        return Err(Error::Lattice("multiplier_norm_a1b1 needs a = b = 1".into()));
    }
    let terms = spec.terms(fam)?;
    if terms.is_empty() {
        return Ok(NormBracket::zero());
    }
    let lo = terms.iter().map(|t| t.0).min().unwrap();
    let hi = terms.iter().map(|t| t.0).max().unwrap();
    let v = resolution_for(hi - lo + 1);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(v);
    let mut out = NormBracket::zero();
    out.nu_points = v;
    for (_, vals) in fam.segment_values() {
        let vals: BTreeMap<i64, C64> = vals.into_iter().collect();
        let coeffs: Vec<(i64, C64)> = terms
            .iter()
            .filter_map(|(k, th)| vals.get(k).map(|g| (*k, th * g)))
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        // Σ c_k e^{−2πikj/V} is the forward DFT of c placed at k mod V.
        let mut buf = vec![C64::new(0.0, 0.0); v];
        for &(k, c) in &coeffs {
            buf[k.rem_euclid(v as i64) as usize] += c;
        }
        fft.process(&mut buf);
        let sampled = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let moments: Vec<(i64, f64)> = coeffs.iter().map(|(k, c)| (*k, c.norm())).collect();
        let envelope = compensated_sum_re(moments.iter().map(|m| m.1));
        let high = (sampled + sampling_slack(&moments, v)).min(envelope).max(sampled);
        out = out.join(NormBracket {
            low: sampled,
            high,
            nu0_value: compensated_sum(coeffs.iter().map(|c| c.1)).norm(),
            nu_points: v,
        });
    }
    Ok(out)
}

/// Norm of one partial sum on a rational lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalNormReport {
    /// Exact operator norm bracket: sup of the `p×p` matrix 2-norm.
    pub matrix: NormBracket,
    /// `sup |Σ_{k ≡ m (p)} θ_k c_k(x + su) e^{…}|` over `x, ν, s`, per residue `m`.
    pub per_residue: Vec<NormBracket>,
    pub p: i64,
}

/// Matrix coefficients of the multiplier on one time segment, keyed by the
/// frequency `n` of `e^{−2πinν}`.
fn multiplier_coefficients(
    fam: &CorrelationFamily,
    terms: &[(i64, C64)],
    cell: i64,
    scale: f64,
) -> BTreeMap<i64, DMatrix<C64>> {
    let p = fam.lattice.p;
    let s_b = fam.s_b();
    let mut out: BTreeMap<i64, DMatrix<C64>> = BTreeMap::new();
    for &(k, th) in terms {
        let gk = &fam.entries[&k];
        for s in 0..p {
            let v = gk.value_at(cell + s * s_b);
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let sp = (s - k).rem_euclid(p);
            let n = (k + sp - s) / p;
            out.entry(n)
                .or_insert_with(|| DMatrix::zeros(p as usize, p as usize))[(s as usize, sp as usize)] +=
                th * v * scale;
        }
    }
    out
}

fn multiplier_segments(fam: &CorrelationFamily) -> Vec<(i64, i64)> {
    let (p, s_a, s_b) = (fam.lattice.p, fam.period, fam.s_b());
    let mut pts = vec![0, s_b];
    for e in fam.entries.values() {
        for r in e.runs() {
            for s in 0..p {
                for x in [r.start, r.end] {
                    let mut y = (x - s * s_b).rem_euclid(s_a);
                    while y < s_b {
                        pts.push(y);
                        y += s_a;
                    }
                }
            }
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    eigen_extremes(&(m.adjoint() * m)).1.max(0.0).sqrt()
}

/// Operator norm of `(b^{−1} if prefactor) Σ_{k∈spec} θ_k (T_{k/b}·)G_k` on a
/// rational lattice, with per-residue entry brackets alongside.
pub fn multiplier_norm_rational(
    fam: &CorrelationFamily,
    spec: &PartialSumSpec,
    nu_points: Option<usize>,
    include_prefactor: bool,
) -> Result<RationalNormReport> {
    let p = fam.lattice.p;
    let terms = spec.terms(fam)?;
    let mut report = RationalNormReport {
        matrix: NormBracket::zero(),
        per_residue: vec![NormBracket::zero(); p as usize],
        p,
    };
    if terms.is_empty() {
        return Ok(report);
    }
    let scale = if include_prefactor {
        rational_f64(fam.lattice.b.recip())
    } else {
        1.0
    };
    let lo = terms.iter().map(|t| t.0).min().unwrap();
    let hi = terms.iter().map(|t| t.0).max().unwrap();
    let v = nu_points.unwrap_or_else(|| resolution_for((hi - lo) / p + 2));
    let phases = PhaseTable::new(v as i64);
    report.matrix.nu_points = v;
    for (start, _) in multiplier_segments(fam) {
        let coeffs = multiplier_coefficients(fam, &terms, start, scale);
        if coeffs.is_empty() {
            continue;
        }
        let moments: Vec<(i64, f64)> = coeffs.iter().map(|(n, c)| (*n, c.norm())).collect();
        let envelope: f64 = moments.iter().map(|m| m.1).sum();
        let slack = sampling_slack(&moments, v);
        let mut sampled = 0.0f64;
        let mut at_zero = 0.0;
        let mut entry_max = vec![0.0f64; p as usize];
        for j in 0..v as i64 {
            let mut m = DMatrix::<C64>::zeros(p as usize, p as usize);
            for (n, c) in &coeffs {
                m += c * phases.at(-n * j);
            }
            let norm = spectral_norm(&m);
            sampled = sampled.max(norm);
            if j == 0 {
                at_zero = norm;
            }
            for s in 0..p {
                for sp in 0..p {
                    let r = (s - sp).rem_euclid(p) as usize;
                    entry_max[r] = entry_max[r].max(m[(s as usize, sp as usize)].norm());
                }
            }
        }
        report.matrix = report.matrix.join(NormBracket {
            low: sampled,
            high: (sampled + slack).min(envelope).max(sampled),
            nu0_value: at_zero,
            nu_points: v,
        });
        for r in 0..p as usize {
            let mom: Vec<(i64, f64)> = (0..p)
                .flat_map(|s| {
                    let sp = (s - r as i64).rem_euclid(p) as usize;
                    coeffs
                        .iter()
                        .map(move |(n, c)| (*n, c[(s as usize, sp)].norm()))
                })
                .collect();
            let env = (0..p)
                .map(|s| {
                    let sp = (s - r as i64).rem_euclid(p) as usize;
                    coeffs.values().map(|c| c[(s as usize, sp)].norm()).sum::<f64>()
                })
                .fold(0.0, f64::max);
            let high = (entry_max[r] + sampling_slack(&mom, v)).min(env).max(entry_max[r]);
            report.per_residue[r] = report.per_residue[r].join(NormBracket {
                low: entry_max[r],
                high,
                nu0_value: 0.0,
                nu_points: v,
            });
        }
    }
    Ok(report)
}

/// Norm bracket of a partial sum with the operator's `b^{−1}` prefactor.
pub fn partial_sum_norm(fam: &CorrelationFamily, spec: &PartialSumSpec) -> Result<NormBracket> {
    if fam.lattice.is_a1b1() {
        multiplier_norm_a1b1(fam, spec)
    } else {
        Ok(multiplier_norm_rational(fam, spec, None, true)?.matrix)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Symmetric,
    Norm,
    Unconditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthLaw {
    Log,
    Power,
}

/// `y ≈ scale·φ(K) + offset` with `φ = ln K` or `K^γ` (`parameter = γ`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub law: GrowthLaw,
    pub parameter: f64,
    pub scale: f64,
    pub offset: f64,
    /// RMS relative error of the fit.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagVerdict {
    Bounded,
    Growing { law: GrowthLaw },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub spec: String,
    pub size: i64,
    pub low: f64,
    pub high: f64,
    pub nu0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub regime: Regime,
    pub k_max: i64,
    /// Every evaluated partial sum.
    pub norm_profile: Vec<ProfileEntry>,
    /// `(K, low, high)`: running sup over the specs of size at most `K`.
    pub curve: Vec<(i64, f64, f64)>,
    /// Running sup of the value at `ν = 0`.
    pub nu0_curve: Vec<(i64, f64)>,
    pub verdict: DiagVerdict,
    pub growth_fit: Option<GrowthFit>,
    pub fits: Vec<GrowthFit>,
    /// `Σ_k sup_t |G_k(t)|`, reported in the unconditional regime.
    pub sum_sup_norms: Option<f64>,
}

impl DiagnosticsReport {
    /// CSV with columns `spec_size,low,high`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("spec_size,low,high\n");
        for (k, lo, hi) in &self.curve {
            s.push_str(&format!("{k},{lo:.12e},{hi:.12e}\n"));
        }
        s
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (c, my - c * mx)
}

fn relative_rms(xs: &[f64], ys: &[f64], c: f64, d: f64) -> f64 {
    let n = xs.len() as f64;
    let s: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = (c * x + d - y) / y.abs().max(f64::MIN_POSITIVE);
            r * r
        })
        .sum();
    (s / n).sqrt()
}

fn fit_with(points: &[(f64, f64)], phi: impl Fn(f64) -> f64) -> (f64, f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| phi(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (c, d) = least_squares(&xs, &ys);
    (c, d, relative_rms(&xs, &ys, c, d))
}

/// Fits `y = c·ln K + d` and `y = c·K^γ + d`, `γ ∈ [0.005, 1.5]`.
pub fn fit_growth(points: &[(f64, f64)]) -> Vec<GrowthFit> {
    if points.len() < 3 {
        return Vec::new();
    }
    let (c, d, r) = fit_with(points, f64::ln);
    let log = GrowthFit {
        law: GrowthLaw::Log,
        parameter: 1.0,
        scale: c,
        offset: d,
        residual: r,
    };
    let eval = |g: f64| fit_with(points, |k| k.powf(g)).2;
    let mut best = (0.005, eval(0.005));
    let mut g = 0.005;
    while g <= 1.5 + 1e-12 {
        let r = eval(g);
        if r < best.1 {
            best = (g, r);
        }
        g += 0.005;
    }
    // Golden-section refinement around the grid minimum.
    let (mut lo, mut hi) = ((best.0 - 0.005).max(0.001), best.0 + 0.005);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if eval(x1) < eval(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let (c, d, r) = fit_with(points, |k| k.powf(gamma));
    let power = GrowthFit {
        law: GrowthLaw::Power,
        parameter: gamma,
        scale: c,
        offset: d,
        residual: r,
    };
    vec![log, power]
}

/// Verdict of a nondecreasing profile: `bounded` if the second half rises by
/// at most 5%; `growing` if a fit has residual < 10%, positive scale, a
/// monotone tail and total growth ≥ 10%.
pub fn classify_profile(points: &[(f64, f64)]) -> (DiagVerdict, Option<GrowthFit>, Vec<GrowthFit>) {
    let fits = fit_growth(points);
    if points.len() < 3 {
        return (DiagVerdict::Inconclusive, None, fits);
    }
    let half = &points[points.len() / 2..];
    let start = half[0].1;
    let end = half.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if end <= start * 1.05 + 1e-300 {
        return (DiagVerdict::Bounded, None, fits);
    }
    let monotone = half.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-12));
    let ratio = points.last().unwrap().1 / points[0].1.max(f64::MIN_POSITIVE);
    let best = fits
        .iter()
        .filter(|f| f.residual < 0.1 && f.scale > 0.0)
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .copied();
    match best {
        Some(f) if monotone && ratio >= 1.1 => (DiagVerdict::Growing { law: f.law }, Some(f), fits),
        _ => (DiagVerdict::Inconclusive, None, fits),
    }
}

/// `4, 6, 8, 11, 16, …` up to and including `k_max`.
pub fn sweep_sizes(k_max: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let k = (4.0 * 2f64.powf(i as f64 / 2.0)).round() as i64;
        if k >= k_max {
            break;
        }
        if out.last() != Some(&k) {
            out.push(k);
        }
        i += 1;
    }
    out.push(k_max);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetStrategy {
    pub random_subsets: usize,
    pub seed: u64,
}

impl Default for SubsetStrategy {
    fn default() -> Self {
        Self {
            random_subsets: 4,
            seed: 0,
        }
    }
}

/// Cell maximizing `Σ_{|k|≤K} |G_k|` and the values there.
fn maximizing_cell(fam: &CorrelationFamily, k: i64) -> (i64, BTreeMap<i64, C64>) {
    let mut best = (0, BTreeMap::new(), -1.0);
    for ((start, _), vals) in fam.segment_values() {
        let m: BTreeMap<i64, C64> = vals.into_iter().filter(|(kk, _)| kk.abs() <= k).collect();
        let s = compensated_sum_re(m.values().map(|v| v.norm()));
        if s > best.2 {
            best = (start, m, s);
        }
    }
    (best.0, best.1)
}

/// Specs probing unconditional convergence at size `K`.
pub fn unconditional_specs(
    fam: &CorrelationFamily,
    k: i64,
    strategy: &SubsetStrategy,
    rng: &mut ChaCha8Rng,
) -> Vec<PartialSumSpec> {
    let (_, vals) = maximizing_cell(fam, k);
    let mut specs = Vec::new();
    // Phase-aligned weights: the sum at ν0 = 0 equals Σ|G_k(t0)|.
    specs.push(PartialSumSpec::Signed(
        vals.iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(kk, v)| (*kk, v.conj() / v.norm()))
            .collect(),
    ));
    for nu0 in [0.0, GOLDEN_NU] {
        let (mut pos, mut neg) = (BTreeSet::new(), BTreeSet::new());
        for (kk, v) in &vals {
            let x = (v * crate::model::cis(-(*kk as f64) * nu0)).re;
            if x > 0.0 {
                pos.insert(*kk);
            } else if x < 0.0 {
                neg.insert(*kk);
            }
        }
        specs.push(PartialSumSpec::Subset(pos));
        specs.push(PartialSumSpec::Subset(neg));
    }
    for _ in 0..strategy.random_subsets {
        specs.push(PartialSumSpec::Subset(
            (-k..=k).filter(|_| rng.gen_bool(0.5)).collect(),
        ));
    }
    specs
}

/// Sweeps partial sums up to `k_max` in one regime and classifies growth.
pub fn convergence_diagnose(
    fam: &CorrelationFamily,
    regime: Regime,
    k_max: i64,
    strategy: &SubsetStrategy,
) -> Result<DiagnosticsReport> {
    if k_max < 4 {
        return Err(Error::Precondition("k_max must be at least 4".into()));
    }
    let sizes = sweep_sizes(k_max);
    let mut profile = Vec::new();
    let mut curve = Vec::new();
    let mut nu0_curve = Vec::new();
    let (mut run_lo, mut run_hi, mut run_nu0) = (0.0f64, 0.0f64, 0.0f64);
    let record = |size: i64, spec: &PartialSumSpec, profile: &mut Vec<ProfileEntry>| -> Result<NormBracket> {
        let b = partial_sum_norm(fam, spec)?;
        profile.push(ProfileEntry {
            spec: spec.label(),
            size,
            low: b.low,
            high: b.high,
            nu0: b.nu0_value,
        });
        Ok(b)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed);
    for (idx, &k) in sizes.iter().enumerate() {
        let specs: Vec<PartialSumSpec> = match regime {
            Regime::Symmetric => vec![PartialSumSpec::Symmetric(k)],
            Regime::Norm => {
                // Frontier of the log lattice: rectangles with one side equal to K.
                let mut others: Vec<i64> = vec![-1];
                others.extend_from_slice(&sizes[..=idx]);
                let mut v = Vec::new();
                for &o in &others {
                    v.push(PartialSumSpec::Rectangular { k, l: o });
                    if o != k {
                        v.push(PartialSumSpec::Rectangular { k: o, l: k });
                    }
                }
                v
            }
            Regime::Unconditional => unconditional_specs(fam, k, strategy, &mut rng),
        };
        for spec in &specs {
            let b = record(k, spec, &mut profile)?;
            run_lo = run_lo.max(b.low);
            run_hi = run_hi.max(b.high);
            run_nu0 = run_nu0.max(b.nu0_value);
        }
        curve.push((k, run_lo, run_hi));
        nu0_curve.push((k, run_nu0));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|c| (c.0 as f64, c.1)).collect();
    let (verdict, growth_fit, fits) = classify_profile(&pts);
    let sum_sup_norms = (regime == Regime::Unconditional).then(|| {
        compensated_sum_re(fam.entries.values().map(|e| e.sup_abs()))
    });
    Ok(DiagnosticsReport {
        regime,
        k_max,
        norm_profile: profile,
        curve,
        nu0_curve,
        verdict,
        growth_fit,
        fits,
        sum_sup_norms,
    })
}

/// `B·∫_0^a max²(A_f, B_f)` against the partial sums of the absolute series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteSeriesCertificate {
    /// `sup_t Σ_k |G_k(t)|²`.
    pub b: f64,
    pub integral_max_sq: f64,
    pub certificate: f64,
    /// `(K, ∫(Σ_{|k|≤K} |f(t − k/b)||G_k(t)|)² dt)`.
    pub profile: Vec<(i64, f64)>,
}

pub fn absolute_series_certificate(
    fam: &CorrelationFamily,
    f: &StepFunction,
) -> Result<AbsoluteSeriesCertificate> {
    let grid = fam.grid.join(&f.grid());
    let fam = &fam.refine(grid.den)?;
    let f = f.refine(grid.den)?;
    let b = fam
        .segment_values()
        .into_iter()
        .map(|(_, v)| compensated_sum_re(v.iter().map(|(_, x)| x.norm_sqr())))
        .fold(0.0, f64::max);
    let w = af_bf_weights(&f, &fam.lattice)?;
    let abs_fam = CorrelationFamily::from_entries(
        fam.lattice,
        fam.grid,
        fam.entries
            .iter()
            .map(|(k, e)| (*k, e.map(|v| C64::new(v.norm(), 0.0))))
            .collect(),
        fam.exact_tail,
        fam.truncation,
    )?;
    let abs_f = f.map(|v| C64::new(v.norm(), 0.0));
    let mut profile = Vec::new();
    for k in 0..=fam.max_abs_k() {
        let s = apply_walnut(&abs_fam, &abs_f, &PartialSumSpec::Symmetric(k), false)?;
        profile.push((k, s.norm_l2_sq()));
    }
    Ok(AbsoluteSeriesCertificate {
        b,
        integral_max_sq: w.integral_max_sq,
        certificate: b * w.integral_max_sq,
        profile,
    })
}

/// Random partial sums against `C·b^{−1}·sup_t Σ_k|G_k(t)|·‖f‖` with `C = 1`
/// (Cauchy–Schwarz on the Walnut sum; the index grouping by `p` is reported).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalReport {
    pub cc_bound: f64,
    /// `b^{−1}·cc_bound`, the bound on every partial sum.
    pub operator_bound: f64,
    pub constant: f64,
    pub p: i64,
    pub trials: usize,
    /// Largest `‖S_M f‖ / (operator_bound·‖f‖)`.
    pub worst_ratio: f64,
    pub violations: usize,
}

pub fn cc_implies_unconditional_check(
    fam: &CorrelationFamily,
    trials: usize,
    seed: u64,
) -> Result<UnconditionalReport> {
    if !fam.exact_tail {
        return Err(Error::Precondition(
            "CC is not certified for a truncated family".into(),
        ));
    }
    let cc = cc_bound(fam);
    let op = cc * rational_f64(fam.lattice.b.recip());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<i64> = fam.entries.keys().copied().collect();
    let span = (fam.period * 3).max(fam.s_b() * 3).max(8);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..trials {
        let lo = rng.gen_range(-span..span);
        let len = rng.gen_range(1..=span) as usize;
        let vals: Vec<C64> = (0..len)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = StepFunction::new(fam.grid, lo, &vals);
        let spec = if rng.gen_bool(0.5) {
            PartialSumSpec::Subset(keys.iter().copied().filter(|_| rng.gen_bool(0.5)).collect())
        } else {
            PartialSumSpec::Signed(
                keys.iter()
                    .map(|&k| (k, C64::new([-1.0, 0.0, 1.0][rng.gen_range(0..3)], 0.0)))
                    .collect(),
            )
        };
        let out = apply_walnut(fam, &f, &spec, true)?;
        let nf = f.norm_l2();
        if nf == 0.0 {
            continue;
        }
        let ratio = if op > 0.0 { out.norm_l2() / (op * nf) } else { out.norm_l2() };
        worst = worst.max(ratio);
        if out.norm_l2() > op * nf * (1.0 + 1e-12) + 1e-300 {
            violations += 1;
        }
    }
    Ok(UnconditionalReport {
        cc_bound: cc,
        operator_bound: op,
        constant: 1.0,
        p: fam.lattice.p,
        trials,
        worst_ratio: worst,
        violations,
    })
}

/// `⟨Sf, f⟩` through the Walnut sum against `F_1(f) + F_2(f)` built
/// directly from translates of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhIdentity {
    pub walnut: f64,
    pub f1: f64,
    pub f2: f64,
    pub residual: f64,
}

fn integral(h: &StepFunction) -> C64 {
    compensated_sum(h.runs().iter().map(|r| r.value * r.len() as f64)) * h.grid().step_f64()
}

pub fn wh_identity(g: &StepFunction, f: &StepFunction, lat: &LatticeParams) -> Result<WhIdentity> {
    let fam = crate::correlations::correlation_family(g, lat)?;
    let grid = fam.grid.join(&f.grid());
    let (g, f) = (g.refine(grid.den)?, f.refine(grid.den)?);
    let st = grid.steps(lat)?;
    let inv_b = rational_f64(lat.b.recip());
    let walnut = {
        let fam = crate::correlations::correlation_family(&g, lat)?;
        let sf = apply_walnut(&fam, &f, &PartialSumSpec::Full, true)?;
        integral(&sf.mul(&f.conj())?).re
    };
    if g.is_zero() || f.is_zero() {
        return Ok(WhIdentity {
            walnut,
            f1: 0.0,
            f2: 0.0,
            residual: walnut.abs(),
        });
    }
    // Translates g(t − na) meeting supp f.
    let n_lo = (f.lo() - g.hi()).div_euclid(st.s_a) - 1;
    let n_hi = (f.hi() - g.lo()).div_euclid(st.s_a) + 1;
    let f_abs2 = f.map(|v| C64::new(v.norm_sqr(), 0.0));
    let mut f1 = Vec::new();
    for n in n_lo..=n_hi {
        let gn = g.shift_cells(n * st.s_a);
        f1.push(integral(&f_abs2.mul(&gn.map(|v| C64::new(v.norm_sqr(), 0.0)))?).re);
    }
    let f1 = inv_b * compensated_sum_re(f1);
    let k_max = (g.support_cells().max(f.support_cells())) / st.s_b + 1;
    let mut f2 = Vec::new();
    let fc = f.conj();
    for k in 1..=k_max {
        let fk = f.shift_cells(k * st.s_b);
        let ffk = fc.mul(&fk)?;
        if ffk.is_zero() {
            continue;
        }
        for n in n_lo - k_max..=n_hi + k_max {
            let gn = g.shift_cells(n * st.s_a);
            let gnk = g.shift_cells(n * st.s_a + k * st.s_b).conj();
            let prod = ffk.mul(&gn)?.mul(&gnk)?;
            if !prod.is_zero() {
                f2.push(2.0 * integral(&prod).re);
            }
        }
    }
    let f2 = inv_b * compensated_sum_re(f2);
    Ok(WhIdentity {
        walnut,
        f1,
        f2,
        residual: (walnut - f1 - f2).abs(),
    })
}
