//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

use gaborkit::classify::{
    cc_propagation_check, lp_extension_check, tight_check, wiener_extension_check, Tightness,
};
use gaborkit::correlations::{cc_check, correlation_family, Verdict};
use gaborkit::gallery::{self, GalleryObject};
use gaborkit::model::{
    common_grid, lcm, rational, DiscreteGaborSystem, GridSpec, LatticeParams, StepFunction, C64,
};
use gaborkit::oracle::{
    dual_discrete, frame_matrix, step_to_discrete, walnut_discrete, wh_identity_discrete, Bridge,
};
use gaborkit::walnut::{
    cc_implies_unconditional_check, convergence_diagnose, fit_growth, partial_sum_norm,
    sweep_sizes, wh_identity, DiagVerdict, GrowthLaw, PartialSumSpec, Regime, SubsetStrategy,
};
use gaborkit::zak::gk_from_zak;
use gaborkit::zakmat::{
    b_factorization_residual, dual_window, s_a_relation_residual, ucc_of_dual,
    window_frame_bounds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn lat(a: (i64, i64), b: (i64, i64)) -> LatticeParams {
    LatticeParams::new(rational(a.0, a.1), rational(b.0, b.1)).unwrap()
}

/// Frame windows covering `(p, q) ∈ {(1,1), (1,2), (2,3)}`: positive on a
/// support of length between `a` and `1/b`, so each is a frame.
fn frame_corpus() -> Vec<(&'static str, StepFunction, LatticeParams)> {
    vec![
        ("chi[0,1) a=b=1", StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0]), lat((1, 1), (1, 1))),
        ("ex4.13 a=b=1", StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]), lat((1, 1), (1, 1))),
        (
            "complex 4-cell a=1/2 b=1",
            StepFunction::new(GridSpec { den: 4 }, 0, &[c(1.0, 0.2), c(0.8, -0.3), c(0.6, 0.1), c(0.9, 0.0)]),
            lat((1, 2), (1, 1)),
        ),
        (
            "ramp a=1/2 b=1/2",
            StepFunction::from_real(GridSpec { den: 2 }, -1, &[0.5, 1.0, 0.75, 0.25]),
            lat((1, 2), (1, 2)),
        ),
        (
            "3-cell a=2/3 b=1",
            StepFunction::from_real(GridSpec { den: 3 }, 0, &[1.0, 0.7, 0.4]),
            lat((2, 3), (1, 1)),
        ),
        (
            "complex a=1/3 b=2",
            StepFunction::new(GridSpec { den: 6 }, 0, &[c(1.0, 0.0), c(0.5, 0.5), c(0.8, -0.2)]),
            lat((1, 3), (2, 1)),
        ),
    ]
}

/// Windows longer than `1/b`, for identities that hold without the frame property.
fn overlap_corpus(rng: &mut ChaCha8Rng) -> Vec<(StepFunction, LatticeParams)> {
    let mut out = Vec::new();
    for (l, den, cells) in [
        (lat((1, 1), (1, 1)), 2, 5),
        (lat((1, 1), (1, 1)), 3, 7),
        (lat((1, 2), (1, 1)), 4, 9),
        (lat((1, 1), (1, 2)), 2, 7),
        (lat((2, 3), (1, 1)), 6, 11),
        (lat((1, 3), (2, 1)), 6, 8),
    ] {
        let vals: Vec<C64> = (0..cells).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        out.push((StepFunction::new(GridSpec { den }, -2, &vals), l));
    }
    out
}

fn bridge(g: &StepFunction, l: &LatticeParams, periods: i64) -> Bridge {
    let grid = common_grid(l.a, l.b, 1).unwrap().join(&g.grid());
    let st = grid.steps(l).unwrap();
    let base = lcm(st.s_a, st.s_b);
    let span = g.refine(grid.den).unwrap().support_cells();
    let n = base * ((span + base - 1) / base).max(periods);
    step_to_discrete(g, l, grid, n as usize).unwrap()
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn random_system(rng: &mut ChaCha8Rng) -> DiscreteGaborSystem {
    let n = [12, 24, 36, 48, 60, 72, 96, 120, 144][rng.gen_range(0..9)];
    let ds = divisors(n);
    let a_d = ds[rng.gen_range(0..ds.len())];
    let l = ds[rng.gen_range(0..ds.len())];
    let w: Vec<C64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    DiscreteGaborSystem::new(n, a_d, l, w).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let sys = random_system(&mut rng);
        let fm = frame_matrix(&sys).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let f = random_vec(&mut rng, sys.n);
            let w = walnut_discrete(&sys, &f).map_err(|e| e.to_string())?;
            let s = fm.apply(&f);
            worst = worst.max(w.iter().zip(&s).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
        }
    }
    Ok((worst <= 1e-10, format!("50 systems × 10 vectors, max |walnut − S f| = {worst:.3e} (tol 1e-10)")))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_d = 0.0f64;
    for _ in 0..20 {
        let sys = random_system(&mut rng);
        let f = random_vec(&mut rng, sys.n);
        let r = wh_identity_discrete(&sys, &f).map_err(|e| e.to_string())?;
        worst_d = worst_d.max(r.residual / r.lhs.abs().max(f64::MIN_POSITIVE));
    }
    let mut worst_c = 0.0f64;
    for (_, g, l) in frame_corpus().into_iter().take(5) {
        let vals = random_vec(&mut rng, 9);
        let f = StepFunction::new(GridSpec { den: 3 }, -4, &vals);
        let r = wh_identity(&g, &f, &l).map_err(|e| e.to_string())?;
        worst_c = worst_c.max(r.residual / r.walnut.abs().max(f64::MIN_POSITIVE));
    }
    Ok((
        worst_d <= 1e-9 && worst_c <= 1e-9,
        format!("relative residual: discrete {worst_d:.3e} (20 trials), continuous {worst_c:.3e} (5 windows), tol 1e-9"),
    ))
}

fn criterion_3() -> Outcome {
    let one = lat((1, 1), (1, 1));
    let chi = StepFunction::from_real(GridSpec { den: 1 }, 0, &[1.0]);
    let t = tight_check(&chi, &one).map_err(|e| e.to_string())?;
    let br = bridge(&chi, &one, 4);
    let fm = frame_matrix(&br.system).map_err(|e| e.to_string())?;
    let spread = br.continuous_bound(fm.lambda_max) - br.continuous_bound(fm.lambda_min);

    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let t413 = tight_check(&g, &one).map_err(|e| e.to_string())?;
    let bracket = window_frame_bounds(&g, &one).map_err(|e| e.to_string())?;
    let br413 = bridge(&g, &one, 4);
    let fm413 = frame_matrix(&br413.system).map_err(|e| e.to_string())?;
    let (lo, hi) = (br413.continuous_bound(fm413.lambda_min), br413.continuous_bound(fm413.lambda_max));
    let matches = (bracket.a_low - lo).abs() <= 1e-6
        && (bracket.a_high - lo).abs() <= 1e-6
        && (bracket.b_low - hi).abs() <= 1e-6
        && (bracket.b_high - hi).abs() <= 1e-6
        && (lo - 0.25).abs() <= 1e-6
        && (hi - 1.0).abs() <= 1e-6;
    Ok((
        t.verdict == Tightness::NormalizedTight && spread.abs() <= 1e-8 && t413.verdict == Tightness::NotTight && matches,
        format!(
            "chi: {:?}, oracle spread {spread:.2e}; ex4.13: {:?}, bracket A [{:.9}, {:.9}] B [{:.9}, {:.9}] vs oracle [{lo:.9}, {hi:.9}]",
            t.verdict, t413.verdict, bracket.a_low, bracket.a_high, bracket.b_low, bracket.b_high
        ),
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut members: Vec<(StepFunction, LatticeParams)> = frame_corpus().into_iter().map(|(_, g, l)| (g, l)).collect();
    members.extend(overlap_corpus(&mut rng));
    let mut pq = std::collections::BTreeSet::new();
    let (mut s_a, mut b_f) = (0.0f64, 0.0f64);
    for (g, l) in &members {
        pq.insert((l.p, l.q));
        s_a = s_a.max(s_a_relation_residual(g, l, 32).map_err(|e| e.to_string())?);
        b_f = b_f.max(b_factorization_residual(g, l, 32).map_err(|e| e.to_string())?);
    }
    let covers = [(1, 1), (1, 2), (2, 3)].iter().all(|x| pq.contains(x));
    Ok((
        s_a <= 1e-9 && b_f <= 1e-9 && covers && members.len() >= 5,
        format!("{} windows, (p,q) {pq:?}; S↔A residual {s_a:.3e}, B = ΨΨ* residual {b_f:.3e} (tol 1e-9)", members.len()),
    ))
}

fn criterion_5() -> Outcome {
    let eps = [1e-2, 1e-4, 1e-6];
    let (mut wr, mut bio) = (0.0f64, 0.0f64);
    let mut tails_ok = true;
    let corpus = frame_corpus();
    for (_, g, l) in corpus.iter().take(5) {
        let d = dual_window(g, l, 256, 16).map_err(|e| e.to_string())?;
        wr = wr.max(d.wexler_raz.deviation);
        let br = bridge(g, l, 4);
        bio = bio.max(dual_discrete(&br.system).map_err(|e| e.to_string())?.biorthogonality_residual);
        let u = ucc_of_dual(g, l, 256, &eps).map_err(|e| e.to_string())?;
        let monotone = u.tail_profile.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        let below = u.thresholds.iter().all(|(e, k)| {
            k.is_some_and(|k| u.tail_profile.iter().filter(|(kk, _)| *kk >= k).all(|(_, t)| t < e))
        });
        tails_ok &= monotone && below;
    }
    Ok((
        wr <= 1e-8 && bio <= 1e-9 && tails_ok,
        format!("Wexler–Raz {wr:.3e} (tol 1e-8), discrete biorthogonality {bio:.3e} (tol 1e-9), dual tails monotone below every ε: {tails_ok}"),
    ))
}

fn criterion_6() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for n in 1..=20 {
        let e = gallery::build("ex4.2", Some(n)).map_err(|e| e.to_string())?;
        let GalleryObject::Window(g) = &e.object else { return Err("ex4.2 is not a window".into()) };
        let fam = correlation_family(g, &e.lattice).map_err(|e| e.to_string())?;
        let cc = cc_check(&fam);
        let covered: Vec<f64> = fam
            .segment_values()
            .into_iter()
            .filter(|((s, _), _)| *s < fam.period - 1)
            .map(|(_, v)| v.iter().map(|(_, x)| x.norm()).sum())
            .collect();
        let exact = cc.verdict == Verdict::Holds && cc.bound == Some(1.0) && covered.iter().all(|s| *s == 1.0);
        let w = gaborkit::correlations::wiener_norm(g, rational(1, 1)).map_err(|e| e.to_string())?;
        let linear = w.norm == (n + 1) as f64;
        ok &= exact && linear;
        if n == 1 || n == 20 {
            detail.push(format!("n={n}: Σ|G_k| bound {:?}, Wiener {}", cc.bound, w.norm));
        }
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_7() -> Outcome {
    let e = gallery::build("ex5.7", Some(4096)).map_err(|e| e.to_string())?;
    let GalleryObject::Zak(zw) = &e.object else { return Err("ex5.7 is not Zak data".into()) };
    let fam = gk_from_zak(zw, 4096).map_err(|e| e.to_string())?;
    let sym = convergence_diagnose(&fam, Regime::Symmetric, 4096, &SubsetStrategy::default()).map_err(|e| e.to_string())?;
    let top = sym.curve.iter().map(|c| c.2).fold(0.0, f64::max);
    let mut pts = Vec::new();
    let mut run = 0.0f64;
    for k in sweep_sizes(4096) {
        run = run.max(partial_sum_norm(&fam, &PartialSumSpec::one_sided(k)).map_err(|e| e.to_string())?.nu0_value);
        pts.push((k as f64, run));
    }
    let log = fit_growth(&pts).into_iter().find(|f| f.law == GrowthLaw::Log);
    let log_ok = log.as_ref().is_some_and(|f| f.residual < 0.1 && f.scale > 0.0);
    Ok((
        top <= 3.0 && log_ok,
        format!(
            "symmetric max bracket {top:.6} (≤ 3); one-sided ν=0: {}",
            log.map_or("no log fit".into(), |f| format!("c = {:.5}, residual {:.4} (< 0.1)", f.scale, f.residual))
        ),
    ))
}

fn criterion_8() -> Outcome {
    let e = gallery::build("ex6.3", Some(4096)).map_err(|e| e.to_string())?;
    let GalleryObject::Family(fam) = &e.object else { return Err("ex6.3 is not a family".into()) };
    let m = e.params["M"].as_f64().ok_or("missing M")?;
    let norm = convergence_diagnose(fam, Regime::Norm, 4096, &SubsetStrategy::default()).map_err(|e| e.to_string())?;
    let top = norm.curve.iter().map(|c| c.2).fold(0.0, f64::max);
    let unc = convergence_diagnose(fam, Regime::Unconditional, 4096, &SubsetStrategy::default()).map_err(|e| e.to_string())?;
    let fit = unc.fits.iter().find(|f| f.law == GrowthLaw::Power);
    let gamma_ok = fit.is_some_and(|f| (f.parameter - 0.125).abs() <= 0.03);
    Ok((
        norm.verdict == DiagVerdict::Bounded && top <= 2.0 * m && matches!(unc.verdict, DiagVerdict::Growing { .. }) && gamma_ok,
        format!(
            "rectangular {:?}, max {top:.4} ≤ 2M = {:.4}; signed-subset {:?}, {}",
            norm.verdict,
            2.0 * m,
            unc.verdict,
            fit.map_or("no power fit".into(), |f| format!("γ = {:.4} (0.125 ± 0.03)", f.parameter))
        ),
    ))
}

fn criterion_9() -> Outcome {
    let r = gallery::divergence_record(30);
    let reached = r.partial_sums.iter().position(|&s| s >= 10.0).map(|i| i + 1);
    let bounds_hold = r.term_norms_sq.iter().zip(&r.lower_bounds).all(|(t, l)| *t >= *l);
    Ok((
        reached.is_some_and(|n| n <= 30) && r.sum_abs_g <= 1.0 && bounds_hold,
        format!("Σ|G_k| = {}, lower-bound partial sum reaches 10 at n = {reached:?}, S_30 = {:.4}", r.sum_abs_g, r.partial_sums.last().copied().unwrap_or(0.0)),
    ))
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    let mut violations = 0;
    let mut members = 0;
    for (i, (_, g, l)) in frame_corpus().into_iter().enumerate() {
        let fam = correlation_family(&g, &l).map_err(|e| e.to_string())?;
        if cc_check(&fam).verdict != Verdict::Holds {
            continue;
        }
        members += 1;
        let r = cc_implies_unconditional_check(&fam, 100, 10 + i as u64).map_err(|e| e.to_string())?;
        worst = worst.max(r.worst_ratio);
        violations += r.violations;
    }
    let e = gallery::build("ex6.3", Some(4096)).map_err(|e| e.to_string())?;
    let GalleryObject::Family(fam) = &e.object else { return Err("ex6.3 is not a family".into()) };
    let unc = convergence_diagnose(fam, Regime::Unconditional, 4096, &SubsetStrategy::default()).map_err(|e| e.to_string())?;
    let first = unc.curve.first().map_or(0.0, |c| c.1);
    let last = unc.curve.last().map_or(0.0, |c| c.1);
    let diverging = matches!(unc.verdict, DiagVerdict::Growing { .. }) && last > first;
    Ok((
        members > 0 && violations == 0 && diverging,
        format!(
            "{members} CC members × 100 trials: worst ‖S_M f‖/(B‖f‖) = {worst:.4}, violations {violations}; ex6.3 signed witness grows {first:.3} → {last:.3} ({:?})",
            unc.verdict
        ),
    ))
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (i, (g, l)) in overlap_corpus(&mut rng).into_iter().take(3).enumerate() {
        let fam = correlation_family(&g, &l).map_err(|e| e.to_string())?;
        let name = format!("window {i} (k-range {})", fam.max_abs_k());
        let r = lp_extension_check(&g, &l, 20, 11).map_err(|e| e.to_string())?;
        ok &= r.witness.len() as i64 == fam.max_abs_k() + 1;
        let monotone = r.witness.windows(2).all(|w| w[1].value >= w[0].value - 1e-12);
        let reach = r.witness.iter().all(|s| s.value >= s.target - 1e-8);
        ok &= monotone && reach && !r.witness.is_empty();
        let last = r.witness.last().map(|s| (s.n, s.value, s.target));
        detail.push(format!("{name}: {} steps, last {last:?}", r.witness.len()));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_12() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut n = 0;
    for (_, g, l) in frame_corpus() {
        let r = wiener_extension_check(&g, &l, 20, 12).map_err(|e| e.to_string())?;
        ok &= r.amalgam_inequality && r.trials_hold;
        worst = worst.max(r.sum_sup / (4.0 * r.window_amalgam));
        n += 1;
    }
    Ok((ok, format!("{n} windows; worst Σ‖G_k‖_∞ / (4‖g‖²_W) = {worst:.4}; trial limits respected: {ok}")))
}

fn criterion_13() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, g, l) in frame_corpus() {
        let r = cc_propagation_check(&g, &l, 1).map_err(|e| e.to_string())?;
        let s = &r.stages[0];
        let m3 = r.m.powi(3);
        let within = s.bound <= m3 * (1.0 + 1e-9);
        ok &= within;
        if name.starts_with("ex4.13") {
            ok &= s.bound <= 1.0 + 1e-12;
            detail.push(format!("ex4.13 image bound {:.12} (M = {})", s.bound, r.m));
        }
    }
    Ok((ok, format!("image CC bound ≤ M³ on the corpus; {}", detail.join(""))))
}

fn criterion_14() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_gaborkit");
    let dir = std::env::temp_dir().join(format!("gaborkit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let window = dir.join("window.json");
    std::fs::write(&window, r#"{"grid_den":2,"lo":0,"re":[1.0,0.5],"im":[0.0,0.0]}"#).map_err(|e| e.to_string())?;
    let runs: Vec<Vec<String>> = vec![
        vec!["extend", "--space", "lp", "--a", "1/2", "--seed", "7"].into_iter().map(String::from).chain(["--window".into(), window.display().to_string()]).collect(),
        vec!["walnut-diag", "--regime", "uncond", "--gallery", "ex6.3", "--truncation", "512", "--seed", "3"].into_iter().map(String::from).collect(),
        vec!["oracle-verify", "--a", "1/2", "--b", "1/2", "--seed", "5"].into_iter().map(String::from).chain(["--window".into(), window.display().to_string()]).collect(),
    ];
    let mut identical = true;
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out: PathBuf = dir.join(format!("run{i}-{rep}"));
            let status = Command::new(exe).args(args).arg("--out").arg(&out).status().map_err(|e| e.to_string())?;
            if status.code() != Some(0) {
                return Ok((false, format!("run {i} exited with {status}")));
            }
            let stdout = Command::new(exe).args(args).output().map_err(|e| e.to_string())?.stdout;
            let mut names: Vec<_> = std::fs::read_dir(&out).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
            names.sort();
            let contents: Vec<(std::ffi::OsString, Vec<u8>)> = names
                .into_iter()
                .map(|n| {
                    let bytes = std::fs::read(out.join(&n)).unwrap();
                    (n, bytes)
                })
                .collect();
            outputs.push((stdout, contents));
        }
        files += outputs[0].1.len();
        identical &= outputs[0] == outputs[1];
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((identical, format!("{} commands run twice, {files} output files and stdout byte-identical: {identical}", runs.len())))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("oracle equality", criterion_1),
        ("WH-frame identity", criterion_2),
        ("tight-frame classification", criterion_3),
        ("S↔A and B = ΨΨ* identities", criterion_4),
        ("dual-window duality", criterion_5),
        ("ex4.2 exact sums and Wiener divergence", criterion_6),
        ("ex5.7 symmetric but not norm", criterion_7),
        ("ex6.3 norm but not unconditional", criterion_8),
        ("ex6.6 irrational divergence", criterion_9),
        ("CC implies unconditional, both directions", criterion_10),
        ("L^∞ witness mechanism", criterion_11),
        ("Wiener amalgam inequality and trials", criterion_12),
        ("CC propagation", criterion_13),
        ("CLI determinism", criterion_14),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let (pass, detail) = match outcome {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name} [{:.2}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
