//! Correlation functions `G_k(t) = Σ_n g(t−na)·conj(g(t−na−k/b))` and the
//! summability conditions built on them.
//!
//! Everything here is cellwise constant on the common grid, so every
//! essential supremum is a maximum over finitely many segments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    common_breakpoints, common_grid, compensated_sum, compensated_sum_re, gcd, modulated_inner_product,
    rational_f64, GridSpec, LatticeParams, PeriodicStepFunction, Run, StepFunction, C64,
};

/// The `a`-periodic correlation functions of a window, indexed by `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationFamily {
    pub lattice: LatticeParams,
    pub grid: GridSpec,
    /// Cells per period `a`.
    pub period: i64,
    /// Only entries that are not identically zero are stored.
    pub entries: BTreeMap<i64, PeriodicStepFunction>,
    /// True when every omitted `k` is exactly zero.
    pub exact_tail: bool,
    /// Largest `|k|` that was computed, when the family is a truncation.
    pub truncation: Option<i64>,
}

impl CorrelationFamily {
    pub fn from_entries(
        lattice: LatticeParams,
        grid: GridSpec,
        entries: BTreeMap<i64, PeriodicStepFunction>,
        exact_tail: bool,
        truncation: Option<i64>,
    ) -> Result<Self> {
        let period = grid.steps(&lattice)?.s_a;
        if entries.values().any(|e| e.period_cells() != period || e.grid() != grid) {
            return Err(Error::Input("family entries must share grid and period".into()));
        }
        let entries = entries.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        Ok(Self {
            lattice,
            grid,
            period,
            entries,
            exact_tail,
            truncation,
        })
    }

    /// The same family on the finer grid `1/den`.
    pub fn refine(&self, den: i64) -> Result<Self> {
        if den == self.grid.den {
            return Ok(self.clone());
        }
        if den % self.grid.den != 0 {
            return Err(Error::Grid(format!(
                "grid 1/{den} does not refine 1/{}",
                self.grid.den
            )));
        }
        let m = den / self.grid.den;
        let grid = GridSpec::new(den)?;
        let mut entries = BTreeMap::new();
        for (&k, e) in &self.entries {
            let runs = e
                .runs()
                .iter()
                .map(|r| Run {
                    start: r.start * m,
                    end: r.end * m,
                    value: r.value,
                })
                .collect();
            entries.insert(k, PeriodicStepFunction::from_runs(grid, e.period_cells() * m, runs)?);
        }
        Self::from_entries(self.lattice, grid, entries, self.exact_tail, self.truncation)
    }

    pub fn get(&self, k: i64) -> PeriodicStepFunction {
        self.entries
            .get(&k)
            .cloned()
            .unwrap_or_else(|| PeriodicStepFunction::zero(self.grid, self.period))
    }

    pub fn k_range(&self) -> Vec<i64> {
        self.entries.keys().copied().collect()
    }

    pub fn max_abs_k(&self) -> i64 {
        self.entries.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn s_b(&self) -> i64 {
        self.grid.steps(&self.lattice).map(|s| s.s_b).unwrap_or(0)
    }

    /// Segment starts over one period shared by all entries.
    pub fn segments(&self) -> Vec<(i64, i64)> {
        let pts = common_breakpoints(self.period, self.entries.values());
        pts.iter()
            .enumerate()
            .map(|(i, &s)| (s, pts.get(i + 1).copied().unwrap_or(self.period)))
            .collect()
    }

    /// Per segment, the values `G_k` at that segment for every stored `k`.
    pub fn segment_values(&self) -> Vec<((i64, i64), Vec<(i64, C64)>)> {
        self.segments()
            .into_iter()
            .map(|seg| {
                let vals = self
                    .entries
                    .iter()
                    .map(|(&k, e)| (k, e.value_at(seg.0)))
                    .collect();
                (seg, vals)
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = serde_json::Map::new();
        for (k, e) in &self.entries {
            let v = e.cell_values();
            entries.insert(
                k.to_string(),
                serde_json::json!({
                    "period_cells": e.period_cells(),
                    "re": v.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": v.iter().map(|z| z.im).collect::<Vec<_>>(),
                }),
            );
        }
        let lat = self.lattice.to_json();
        serde_json::json!({
            "a": lat["a"],
            "b": lat["b"],
            "grid_den": self.grid.den,
            "entries": entries,
            "exact_tail": self.exact_tail,
        })
    }
}

/// `G_k` for every `k` whose translates overlap, as exact cell sums.
pub fn correlation_family(g: &StepFunction, lat: &LatticeParams) -> Result<CorrelationFamily> {
    let grid = common_grid(lat.a, lat.b, 1)?.join(&g.grid());
    let g = &g.refine(grid.den)?;
    let steps = grid.steps(lat)?;
    let mut entries = BTreeMap::new();
    if !g.is_zero() {
        let span = g.support_cells();
        let kmax = (span - 1) / steps.s_b;
        let gc = g.conj();
        for k in -kmax..=kmax {
            // h_k(u) = g(u)·conj(g(u − k/b)), then periodize over a.
            let shifted = gc.shift_cells(k * steps.s_b);
            let prod = g.mul(&shifted)?;
            if prod.is_zero() {
                continue;
            }
            let e = PeriodicStepFunction::periodize(&prod, steps.s_a);
            if !e.is_zero() {
                entries.insert(k, e);
            }
        }
    }
    CorrelationFamily::from_entries(*lat, grid, entries, true, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "UCC")]
    Ucc,
    ConditionA,
    Wiener,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    InconclusiveTruncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    /// `None` encodes `+∞`.
    pub bound: Option<f64>,
    pub tail_profile: Vec<(i64, f64)>,
    pub verdict: Verdict,
    /// For UCC: per requested ε, the least `K` with tail below ε.
    pub thresholds: Vec<(f64, Option<i64>)>,
    pub note: Option<String>,
}

/// `sup_t Σ_{|k|≥K} |G_k(t)|` for `K = 0..=max|k|+1`.
pub fn tail_profile(fam: &CorrelationFamily) -> Vec<(i64, f64)> {
    let kmax = fam.max_abs_k();
    let mut best = vec![0.0f64; kmax as usize + 2];
    for (_, vals) in fam.segment_values() {
        let mut by_abs = vec![0.0f64; kmax as usize + 1];
        for (k, v) in vals {
            by_abs[k.unsigned_abs() as usize] += v.norm();
        }
        let mut tail = 0.0;
        for kk in (0..=kmax as usize).rev() {
            tail += by_abs[kk];
            best[kk] = best[kk].max(tail);
        }
    }
    best.iter().enumerate().map(|(k, &v)| (k as i64, v)).collect()
}

/// `max_t Σ_k |G_k(t)|`.
pub fn cc_bound(fam: &CorrelationFamily) -> f64 {
    fam.segment_values()
        .into_iter()
        .map(|(_, vals)| compensated_sum_re(vals.iter().map(|(_, v)| v.norm())))
        .fold(0.0, f64::max)
}

pub fn cc_check(fam: &CorrelationFamily) -> ConditionReport {
    let bound = cc_bound(fam);
    let (verdict, note) = if fam.exact_tail {
        (Verdict::Holds, None)
    } else {
        (
            Verdict::InconclusiveTruncated,
            Some(format!(
                "family truncated at |k| <= {}; bound covers the computed terms only",
                fam.truncation.unwrap_or(fam.max_abs_k())
            )),
        )
    };
    ConditionReport {
        condition: Condition::Cc,
        bound: Some(bound),
        tail_profile: tail_profile(fam),
        verdict,
        thresholds: Vec::new(),
        note,
    }
}

pub fn ucc_check(fam: &CorrelationFamily, epsilons: &[f64]) -> ConditionReport {
    let profile = tail_profile(fam);
    let thresholds: Vec<(f64, Option<i64>)> = epsilons
        .iter()
        .map(|&eps| (eps, profile.iter().find(|(_, t)| *t < eps).map(|(k, _)| *k)))
        .collect();
    let (verdict, note) = if fam.exact_tail {
        if thresholds.iter().all(|(_, k)| k.is_some()) {
            (Verdict::Holds, None)
        } else {
            (Verdict::Fails, None)
        }
    } else {
        let onset = non_uniform_onset(&profile);
        (
            Verdict::InconclusiveTruncated,
            Some(if let Some(k) = onset {
                format!("non-uniform onset: tail keeps its full size up to K = {k}")
            } else {
                format!(
                    "family truncated at |k| <= {}",
                    fam.truncation.unwrap_or(fam.max_abs_k())
                )
            }),
        )
    };
    ConditionReport {
        condition: Condition::Ucc,
        bound: profile.first().map(|p| p.1),
        tail_profile: profile,
        verdict,
        thresholds,
        note,
    }
}

/// Largest `K` up to which the tail keeps (almost) its full size, when that
/// plateau is long enough to matter.
fn non_uniform_onset(profile: &[(i64, f64)]) -> Option<i64> {
    let full = profile.get(1)?.1;
    if full <= 0.0 {
        return None;
    }
    let plateau = profile
        .iter()
        .skip(1)
        .take_while(|(_, t)| *t >= 0.99 * full)
        .last()?
        .0;
    (plateau >= 4).then_some(plateau)
}

/// Rectangular partial sums of `Σ_{k,ℓ} |⟨g, E_{ℓ/a} T_{k/b} g⟩|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionAReport {
    pub k_max: i64,
    pub l_max: i64,
    /// `entries[k + K][ℓ + L]`.
    pub entries: Vec<Vec<f64>>,
    pub total: f64,
    /// Running rectangular totals over `|ℓ| ≤ L'` for `L' = 0..=L`.
    pub running: Vec<(i64, f64)>,
}

impl ConditionAReport {
    pub fn entry(&self, k: i64, l: i64) -> f64 {
        self.entries[(k + self.k_max) as usize][(l + self.l_max) as usize]
    }
}

pub fn condition_a_partial_sums(
    g: &StepFunction,
    lat: &LatticeParams,
    k_max: i64,
    l_max: i64,
) -> Result<ConditionAReport> {
    let inv_a = rational_f64(lat.a.recip());
    let mut entries = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        let shifted = g.translate(lat.inv_b() * k)?;
        let mut row = Vec::with_capacity((2 * l_max + 1) as usize);
        for l in -l_max..=l_max {
            row.push(modulated_inner_product(g, &shifted, l as f64 * inv_a)?.norm());
        }
        entries.push(row);
    }
    let mut running = Vec::with_capacity(l_max as usize + 1);
    for lp in 0..=l_max {
        let s = compensated_sum_re(entries.iter().flat_map(|row| {
            let lo = (l_max - lp) as usize;
            let hi = (l_max + lp) as usize;
            row[lo..=hi].iter().copied()
        }));
        running.push((lp, s));
    }
    let total = running.last().map_or(0.0, |r| r.1);
    Ok(ConditionAReport {
        k_max,
        l_max,
        entries,
        total,
        running,
    })
}

/// Worst biorthogonality violation `|⟨h, E_{ℓ/a}T_{k/b}g⟩ − ab·δ_{k0}δ_{ℓ0}|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WexlerRazReport {
    pub deviation: f64,
    pub at: (i64, i64),
}

pub fn wexler_raz_check(
    g: &StepFunction,
    h: &StepFunction,
    lat: &LatticeParams,
    k_max: i64,
    l_max: i64,
) -> Result<WexlerRazReport> {
    let grid = g.grid().join(&h.grid());
    let g = g.refine(grid.den)?;
    let h = h.refine(grid.den)?;
    let inv_a = rational_f64(lat.a.recip());
    let ab = rational_f64(lat.ab());
    let mut worst = WexlerRazReport {
        deviation: 0.0,
        at: (0, 0),
    };
    for k in -k_max..=k_max {
        let shifted = g.translate(lat.inv_b() * k)?;
        for l in -l_max..=l_max {
            let v = modulated_inner_product(&h, &shifted, l as f64 * inv_a)?;
            let target = if k == 0 && l == 0 { ab } else { 0.0 };
            let d = (v - target).norm();
            if d > worst.deviation {
                worst = WexlerRazReport {
                    deviation: d,
                    at: (k, l),
                };
            }
        }
    }
    Ok(worst)
}

/// `‖g‖_{W,a'} = Σ_n sup |g·χ_[a'n, a'(n+1))|` with partial sums by block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerReport {
    pub norm: f64,
    /// `(block index, partial sum up to and including it)`, lowest block first.
    pub profile: Vec<(i64, f64)>,
}

pub fn wiener_norm(g: &StepFunction, window_len: crate::model::Rational) -> Result<WienerReport> {
    let w = g.grid().cells(window_len)?;
    if w <= 0 {
        return Err(Error::Input("window length must be positive".into()));
    }
    let mut blocks: BTreeMap<i64, f64> = BTreeMap::new();
    for r in g.runs() {
        let first = r.start.div_euclid(w);
        let last = (r.end - 1).div_euclid(w);
        for blk in first..=last {
            let e = blocks.entry(blk).or_insert(0.0);
            *e = e.max(r.value.norm());
        }
    }
    let mut profile = Vec::with_capacity(blocks.len());
    let mut acc = crate::model::CompensatedSum::new();
    for (blk, s) in blocks {
        acc.add(C64::new(s, 0.0));
        profile.push((blk, acc.value().re));
    }
    Ok(WienerReport {
        norm: acc.value().re,
        profile,
    })
}

/// The weights `A_f`, `B_f` over one period and `∫_0^a max²(A_f, B_f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightReport {
    pub a_f: PeriodicStepFunction,
    pub b_f: PeriodicStepFunction,
    pub integral_max_sq: f64,
}

pub fn af_bf_weights(f: &StepFunction, lat: &LatticeParams) -> Result<WeightReport> {
    let grid = f.grid();
    let st = grid.steps(lat)?;
    let (sa, sb) = (st.s_a, st.s_b);
    let g = gcd(sa, sb);
    let (lo, hi) = (f.lo(), f.hi());
    // Σ_j |f(c − j·step)| over all j hitting the support.
    let line_sum = |c: i64, step: i64| -> f64 {
        if f.is_zero() {
            return 0.0;
        }
        let jmin = (c - hi + 1).div_euclid(step) - 1;
        let jmax = (c - lo).div_euclid(step) + 1;
        compensated_sum_re((jmin..=jmax).map(|j| f.value_at(c - j * step).norm()))
    };
    let mut av = Vec::with_capacity(sa as usize);
    let mut bv = Vec::with_capacity(sa as usize);
    for c in 0..sa {
        // Sums are periodic in ℓ with period s_b/g and in k with period s_a/g.
        let a = (0..sb / g)
            .map(|l| line_sum(c - l * sa, sb))
            .fold(0.0, f64::max);
        let b = (0..sa / g)
            .map(|k| line_sum(c - k * sb, sa))
            .fold(0.0, f64::max);
        av.push(C64::new(a, 0.0));
        bv.push(C64::new(b, 0.0));
    }
    let d = grid.step_f64();
    let integral = d * compensated_sum_re(av.iter().zip(&bv).map(|(x, y)| {
        let m = x.re.max(y.re);
        m * m
    }));
    Ok(WeightReport {
        a_f: PeriodicStepFunction::from_values(grid, &av),
        b_f: PeriodicStepFunction::from_values(grid, &bv),
        integral_max_sq: integral,
    })
}

/// Fejér mean `Σ_{|k|≤n} (1 − |k|/n) G_k(t) e^{−2πikν0}`: real part and the
/// largest imaginary residue.
pub fn cesaro_mean(
    fam: &CorrelationFamily,
    n: i64,
    nu0: f64,
) -> Result<(PeriodicStepFunction, f64)> {
    if !fam.lattice.is_a1b1() {
        return Err(Error::Lattice("Cesàro means need a = b = 1".into()));
    }
    if n < 1 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    let mut runs = Vec::new();
    let mut residue = 0.0f64;
    for ((s, e), vals) in fam.segment_values() {
        let v = compensated_sum(vals.iter().filter(|(k, _)| k.abs() <= n).map(|&(k, g)| {
            let w = 1.0 - k.abs() as f64 / n as f64;
            g * crate::model::cis(-(k as f64) * nu0) * w
        }));
        residue = residue.max(v.im.abs());
        runs.push(Run {
            start: s,
            end: e,
            value: C64::new(v.re, 0.0),
        });
    }
    Ok((
        PeriodicStepFunction::from_runs(fam.grid, fam.period, runs)?,
        residue,
    ))
}
