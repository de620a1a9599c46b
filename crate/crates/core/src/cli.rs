//! Batch front end. Every command emits JSON records; with `--out DIR` they go
//! to `DIR/report.jsonl` next to `DIR/summary.json` and any CSV plot data,
//! otherwise the records are printed to stdout one per line.
//!
//! Exit codes: 0 success, 1 a failing verdict, 2 bad input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::classify::{
    cc_propagation_check, equal_frame_operator, lp_extension_check, schur_upper_bound,
    tight_check, wiener_extension_check, ShiftInvariantSystem, Tightness,
};
use crate::correlations::{
    cc_check, condition_a_partial_sums, correlation_family, ucc_check, CorrelationFamily, Verdict,
};
use crate::error::Error;
use crate::gallery::{self, GalleryObject};
use crate::model::{
    common_grid, rational, DiscreteFile, DiscreteGaborSystem, LatticeParams, Rational,
    StepFunction, WindowFile, C64,
};
use crate::oracle::{
    dual_discrete, frame_matrix, janssen_discrete, power_iteration, step_to_discrete,
    walnut_discrete, wh_identity_discrete,
};
use crate::walnut::{convergence_diagnose, Regime, SubsetStrategy};
use crate::zak::{gk_from_zak, window_from_zak, zak_transform, ZakFile};
use crate::zakmat::{a_field, dual_window, frame_bounds_refined, ucc_of_dual, DEFAULT_NU_POINTS};

/// Parses `num/den` or an integer.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let bad = || format!("expected num/den or an integer, got '{s}'");
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err("zero denominator".into());
    }
    Ok(rational(n, d))
}

#[derive(Parser, Debug)]
#[command(name = "gaborkit", version, about = "Gabor frame analysis on rational lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Time shift `a` as num/den.
    #[arg(long, default_value = "1", value_parser = parse_rational, global = true)]
    pub a: Rational,
    /// Modulation `b` as num/den.
    #[arg(long, default_value = "1", value_parser = parse_rational, global = true)]
    pub b: Rational,
    /// Grid refinement factor over the coarsest lattice-compatible grid.
    #[arg(long, default_value_t = 1, global = true)]
    pub resolution: i64,
    /// Truncation order for `k`.
    #[arg(long, global = true)]
    pub kmax: Option<i64>,
    /// Number of ν samples for Zak-domain fields.
    #[arg(long = "nu-samples", global = true)]
    pub nu_samples: Option<usize>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Output directory; records go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Input {
    /// Window JSON `{grid_den, lo, re, im}`.
    #[arg(long)]
    pub window: Option<PathBuf>,
    /// Zak JSON `{t_cells, nu_cells, re, im}` (lattice a = b = 1).
    #[arg(long)]
    pub zak: Option<PathBuf>,
    /// Gallery entry used as input.
    #[arg(long)]
    pub gallery: Option<String>,
    /// Truncation order for the gallery entry.
    #[arg(long)]
    pub truncation: Option<i64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Sym,
    Norm,
    Uncond,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Lp,
    Wiener,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Correlation functions G_k.
    Gk {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// CC condition.
    Cc {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Uniform CC condition with tail thresholds.
    Ucc {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        eps: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Condition A partial sums.
    CondA {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 64)]
        lmax: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Zak transform samples of a window, or window and G_k from Zak data.
    Zak {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1", value_parser = parse_rational)]
        lambda: Rational,
        #[arg(long = "t-samples", default_value_t = 8)]
        t_samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Certified frame-bound bracket.
    Bounds {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Canonical dual window.
    Dual {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence diagnostics for Walnut partial sums.
    WalnutDiag {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Tight-frame classification.
    Tight {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Equality of two frame operators.
    Equal {
        #[command(flatten)]
        input: Input,
        /// Second window.
        #[arg(long)]
        other: PathBuf,
        /// Time shift of the second system.
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        /// Modulation of the second system.
        #[arg(long, value_parser = parse_rational)]
        d: Rational,
        #[command(flatten)]
        common: Common,
    },
    /// Schur upper bound for a shift-invariant system with shift `a`.
    Schur {
        /// Generator windows.
        #[arg(long = "generator", required = true)]
        generators: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// CC propagation through the frame operator.
    Propagate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Extension of S to L¹/L^∞ or the Wiener amalgam space.
    Extend {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        space: Space,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Example constructions.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Dense discrete cross-checks.
    OracleVerify {
        /// Discrete system JSON `{N, a, L, re, im}`.
        #[arg(long)]
        discrete: Option<PathBuf>,
        /// Window to sample on N cells instead.
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long = "cells")]
        cells: Option<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
pub enum GalleryAction {
    List {
        #[command(flatten)]
        common: Common,
    },
    /// Build and verify an entry, or every entry with `all`.
    Run {
        name: String,
        #[arg(long)]
        truncation: Option<i64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Analysis(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAFrame(_) => CliError::Analysis(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Collected output of one run.
struct Report {
    command: String,
    records: Vec<Value>,
    csv: Vec<(String, String)>,
    ok: bool,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            records: Vec::new(),
            csv: Vec::new(),
            ok: true,
        }
    }

    fn push(&mut self, v: Value) {
        self.records.push(v);
    }

    fn fail_unless(&mut self, ok: bool) {
        self.ok &= ok;
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: parse error: {e}", path.display())))
}

fn read_window(path: &Path) -> CliResult<StepFunction> {
    Ok(read_json::<WindowFile>(path)?.to_step_function()?)
}

fn lattice(c: &Common) -> CliResult<LatticeParams> {
    Ok(LatticeParams::new(c.a, c.b)?)
}

/// Window refined to the lattice grid at the requested resolution.
fn lift(g: &StepFunction, lat: &LatticeParams, c: &Common) -> CliResult<StepFunction> {
    let grid = common_grid(lat.a, lat.b, c.resolution)?.join(&g.grid());
    Ok(g.refine(grid.den)?)
}

fn load_window(input: &Input, lat: &LatticeParams, c: &Common) -> CliResult<StepFunction> {
    let g = match (&input.window, &input.gallery) {
        (Some(p), _) => read_window(p)?,
        (None, Some(name)) => match gallery::build(name, input.truncation)?.object {
            GalleryObject::Window(g) => g,
            other => {
                return Err(CliError::Input(format!(
                    "gallery entry '{name}' is a {} object, not a window",
                    other.kind()
                )))
            }
        },
        _ => return Err(CliError::Input("a window is required (--window or --gallery)".into())),
    };
    lift(&g, lat, c)
}

/// Correlation family from a window, Zak data, or a gallery entry.
fn load_family(input: &Input, c: &Common) -> CliResult<(CorrelationFamily, Value)> {
    let lat = lattice(c)?;
    if let Some(p) = &input.zak {
        let zw = read_json::<ZakFile>(p)?.to_zak_window()?;
        let k = c.kmax.unwrap_or(256);
        return Ok((gk_from_zak(&zw, k)?, json!({"source": "zak", "truncation": k})));
    }
    if let (None, Some(name)) = (&input.window, &input.gallery) {
        let e = gallery::build(name, input.truncation)?;
        let echo = json!({"source": "gallery", "name": name, "truncation": e.truncation});
        return Ok(match e.object {
            GalleryObject::Window(g) => (correlation_family(&lift(&g, &e.lattice, c)?, &e.lattice)?, echo),
            GalleryObject::Zak(zw) => (gk_from_zak(&zw, e.truncation)?, echo),
            GalleryObject::Family(f) => (f, echo),
            GalleryObject::Analytic(_) => {
                return Err(CliError::Input(format!("gallery entry '{name}' has no correlation family")))
            }
        });
    }
    let g = load_window(input, &lat, c)?;
    Ok((correlation_family(&g, &lat)?, json!({"source": "window", "truncation": null})))
}

fn config_echo(c: &Common) -> Value {
    json!({
        "a": c.a.to_string(),
        "b": c.b.to_string(),
        "resolution": c.resolution,
        "kmax": c.kmax,
        "nu_samples": c.nu_samples,
        "seed": c.seed,
    })
}

fn common_of(cmd: &Command) -> Option<&Common> {
    Some(match cmd {
        Command::Gk { common, .. }
        | Command::Cc { common, .. }
        | Command::Ucc { common, .. }
        | Command::CondA { common, .. }
        | Command::Zak { common, .. }
        | Command::Bounds { common, .. }
        | Command::Dual { common, .. }
        | Command::WalnutDiag { common, .. }
        | Command::Tight { common, .. }
        | Command::Equal { common, .. }
        | Command::Schur { common, .. }
        | Command::Propagate { common, .. }
        | Command::Extend { common, .. }
        | Command::OracleVerify { common, .. } => common,
        Command::Gallery { action } => match action {
            GalleryAction::List { common } | GalleryAction::Run { common, .. } => common,
        },
    })
}

fn run(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Gk { input, common } => {
            let (fam, echo) = load_family(input, common)?;
            let mut r = Report::new("gk");
            r.push(json!({"input": echo, "family": fam.to_json()}));
            Ok(r)
        }
        Command::Cc { input, common } => {
            let (fam, echo) = load_family(input, common)?;
            let rep = cc_check(&fam);
            let mut r = Report::new("cc");
            r.fail_unless(rep.verdict != Verdict::Fails);
            r.push(json!({"input": echo, "report": rep}));
            Ok(r)
        }
        Command::Ucc { input, eps, common } => {
            let (fam, echo) = load_family(input, common)?;
            let rep = ucc_check(&fam, eps);
            let mut r = Report::new("ucc");
            r.fail_unless(rep.verdict != Verdict::Fails);
            let mut csv = String::from("k,tail\n");
            for (k, t) in &rep.tail_profile {
                csv.push_str(&format!("{k},{t:.12e}\n"));
            }
            r.csv.push(("ucc_tail.csv".into(), csv));
            r.push(json!({"input": echo, "report": rep}));
            Ok(r)
        }
        Command::CondA { input, lmax, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let k = common.kmax.unwrap_or(8);
            let rep = condition_a_partial_sums(&g, &lat, k, *lmax)?;
            let mut r = Report::new("cond-a");
            r.push(json!({"k_max": k, "l_max": lmax, "total": rep.total, "running": rep.running}));
            Ok(r)
        }
        Command::Zak { input, lambda, t_samples, common } => {
            let mut r = Report::new("zak");
            if let Some(p) = &input.zak {
                let zw = read_json::<ZakFile>(p)?.to_zak_window()?;
                let k = common.kmax.unwrap_or(16);
                let coeffs: Vec<Value> = window_from_zak(&zw, -k, k)
                    .into_iter()
                    .map(|(kk, v)| json!({"k": kk, "re": v.iter().map(|z| z.re).collect::<Vec<_>>(), "im": v.iter().map(|z| z.im).collect::<Vec<_>>()}))
                    .collect();
                let fam = gk_from_zak(&zw, k)?;
                r.push(json!({"truncation": k, "window_coefficients": coeffs, "family": fam.to_json()}));
            } else {
                let lat = lattice(common)?;
                let g = load_window(input, &lat, common)?;
                let v = common.nu_samples.unwrap_or(16);
                let s = zak_transform(&g, *lambda, *t_samples, v)?;
                r.push(json!({
                    "lambda": lambda.to_string(),
                    "t_points": s.t_points,
                    "nu_points": s.nu_points,
                    "re": s.values.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": s.values.iter().map(|z| z.im).collect::<Vec<_>>(),
                    "quasi_periodicity_residual": s.quasi_periodicity_residual,
                    "unitarity_residual": s.unitarity_residual,
                }));
            }
            Ok(r)
        }
        Command::Bounds { input, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let v = common.nu_samples.unwrap_or(DEFAULT_NU_POINTS);
            let br = frame_bounds_refined(&a_field(&g, &g, &lat, v)?, v)?;
            let mut r = Report::new("bounds");
            let frame = br.a_high > 1e-12;
            r.fail_unless(frame);
            r.push(json!({"bracket": br.to_json(), "verdict": if frame { "frame" } else { "not-a-frame" }}));
            Ok(r)
        }
        Command::Dual { input, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let v = common.nu_samples.unwrap_or(DEFAULT_NU_POINTS);
            let k = common.kmax.unwrap_or(16);
            let d = dual_window(&g, &lat, v, k)?;
            let ucc = ucc_of_dual(&g, &lat, v, &[1e-2, 1e-4, 1e-6])?;
            let mut r = Report::new("dual");
            r.fail_unless(d.wexler_raz.deviation <= 1e-8);
            r.push(json!({
                "window": d.window.to_file(),
                "bracket": d.bracket.to_json(),
                "wexler_raz": d.wexler_raz,
                "nu_points": d.nu_points,
                "k_trunc": d.k_trunc,
                "dual_ucc": ucc,
            }));
            Ok(r)
        }
        Command::WalnutDiag { input, regime, common } => {
            let (fam, echo) = load_family(input, common)?;
            let default_k = fam.truncation.unwrap_or(64);
            let k = common.kmax.unwrap_or(default_k).max(4);
            let regime = match regime {
                RegimeArg::Sym => Regime::Symmetric,
                RegimeArg::Norm => Regime::Norm,
                RegimeArg::Uncond => Regime::Unconditional,
            };
            let strategy = SubsetStrategy {
                seed: common.seed,
                ..SubsetStrategy::default()
            };
            let rep = convergence_diagnose(&fam, regime, k, &strategy)?;
            let mut r = Report::new("walnut-diag");
            let tag = match regime {
                Regime::Symmetric => "sym",
                Regime::Norm => "norm",
                Regime::Unconditional => "uncond",
            };
            r.csv.push((format!("walnut_{tag}.csv"), rep.to_csv()));
            r.push(json!({"input": echo, "k_max": k, "report": rep}));
            Ok(r)
        }
        Command::Tight { input, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let rep = tight_check(&g, &lat)?;
            let mut r = Report::new("tight");
            r.fail_unless(matches!(rep.verdict, Tightness::NormalizedTight | Tightness::Tight { .. }));
            r.push(rep.to_json());
            Ok(r)
        }
        Command::Equal { input, other, c, d, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let lat_h = LatticeParams::new(*c, *d)?;
            let h = lift(&read_window(other)?, &lat_h, common)?;
            let rep = equal_frame_operator(&g, &lat, &h, &lat_h)?;
            let mut r = Report::new("equal");
            r.fail_unless(rep.equal);
            r.push(rep.to_json());
            Ok(r)
        }
        Command::Schur { generators, common } => {
            let gens = generators.iter().map(|p| read_window(p)).collect::<CliResult<Vec<_>>>()?;
            let sys = ShiftInvariantSystem::new(gens, common.a)?;
            let rep = schur_upper_bound(&sys, common.kmax.unwrap_or(32), common.nu_samples.unwrap_or(64))?;
            let mut r = Report::new("schur");
            r.push(rep.to_json());
            Ok(r)
        }
        Command::Propagate { input, stages, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let rep = cc_propagation_check(&g, &lat, *stages)?;
            let mut r = Report::new("propagate");
            r.fail_unless(rep.holds());
            r.push(rep.to_json());
            Ok(r)
        }
        Command::Extend { input, space, trials, common } => {
            let lat = lattice(common)?;
            let g = load_window(input, &lat, common)?;
            let mut r = Report::new("extend");
            match space {
                Space::Lp => {
                    let rep = lp_extension_check(&g, &lat, *trials, common.seed)?;
                    r.fail_unless(rep.forward_holds && rep.converse_holds);
                    r.push(rep.to_json());
                }
                Space::Wiener => {
                    let rep = wiener_extension_check(&g, &lat, *trials, common.seed)?;
                    r.fail_unless(rep.amalgam_inequality && rep.trials_hold);
                    r.push(rep.to_json());
                }
            }
            Ok(r)
        }
        Command::Gallery { action } => match action {
            GalleryAction::List { .. } => {
                let mut r = Report::new("gallery list");
                for name in gallery::NAMES {
                    let e = gallery::build(name, Some(gallery::default_truncation(name).unwrap_or(1)).map(|t| t.min(64)))?;
                    r.push(json!({
                        "name": name,
                        "description": e.description,
                        "kind": e.object.kind(),
                        "default_truncation": gallery::default_truncation(name),
                        "expected_signature": e.expected_signature,
                    }));
                }
                Ok(r)
            }
            GalleryAction::Run { name, truncation, .. } => {
                let mut r = Report::new("gallery run");
                let names: Vec<&str> = if name == "all" { gallery::NAMES.to_vec() } else { vec![name.as_str()] };
                for n in names {
                    let e = gallery::build(n, *truncation)?;
                    let v = gallery::verify(&e)?;
                    r.fail_unless(v.pass);
                    r.push(json!({"entry": e.to_json(), "object": e.object.to_json(), "verification": v}));
                }
                Ok(r)
            }
        },
        Command::OracleVerify { discrete, window, cells, trials, common } => oracle_verify(discrete, window, *cells, *trials, common),
    }
}

fn oracle_verify(
    discrete: &Option<PathBuf>,
    window: &Option<PathBuf>,
    cells: Option<usize>,
    trials: usize,
    common: &Common,
) -> CliResult<Report> {
    let (sys, delta): (DiscreteGaborSystem, Option<f64>) = match (discrete, window) {
        (Some(p), _) => (read_json::<DiscreteFile>(p)?.to_system()?, None),
        (None, Some(p)) => {
            let lat = lattice(common)?;
            let g = read_window(p)?;
            let grid = common_grid(lat.a, lat.b, common.resolution)?.join(&g.grid());
            let st = grid.steps(&lat)?;
            let n = cells.unwrap_or(4 * crate::model::lcm(st.s_a, st.s_b) as usize);
            let br = step_to_discrete(&g, &lat, grid, n)?;
            (br.system, Some(br.delta))
        }
        _ => return Err(CliError::Input("oracle-verify needs --discrete or --window".into())),
    };
    let fm = frame_matrix(&sys)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let (mut walnut_res, mut wh_res) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let f: Vec<C64> = (0..sys.n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let x = walnut_discrete(&sys, &f)?;
        let y = fm.apply(&f);
        walnut_res = walnut_res.max(x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        let wh = wh_identity_discrete(&sys, &f)?;
        wh_res = wh_res.max(wh.residual / (1.0 + wh.lhs));
    }
    let janssen = janssen_discrete(&sys)?.residual;
    let power = power_iteration(&fm.s, 500, common.seed);
    let power_res = (power - fm.lambda_max).abs() / fm.lambda_max.max(1e-300);
    let dual = if fm.lambda_min > 1e-8 {
        let d = dual_discrete(&sys)?;
        Some(json!({"solve_residual": d.solve_residual, "biorthogonality_residual": d.biorthogonality_residual}))
    } else {
        None
    };
    let dual_ok = dual.as_ref().map_or(true, |d| {
        d["biorthogonality_residual"].as_f64().unwrap_or(f64::INFINITY) <= 1e-9
    });
    let mut r = Report::new("oracle-verify");
    r.fail_unless(walnut_res <= 1e-10 && wh_res <= 1e-9 && janssen <= 1e-9 && dual_ok && fm.hermitian_defect <= 1e-12);
    r.push(json!({
        "N": sys.n,
        "a": sys.a_d,
        "L": sys.l,
        "trials": trials,
        "lambda_min": fm.lambda_min,
        "lambda_max": fm.lambda_max,
        "continuous_bounds": delta.map(|d| [d * fm.lambda_min, d * fm.lambda_max]),
        "hermitian_defect": fm.hermitian_defect,
        "walnut_residual": walnut_res,
        "wh_relative_residual": wh_res,
        "janssen_residual": janssen,
        "power_iteration_relative_gap": power_res,
        "dual": dual,
    }));
    Ok(r)
}

fn emit(report: &Report, common: Option<&Common>, code: i32) -> std::io::Result<()> {
    let lines: Vec<String> = report
        .records
        .iter()
        .map(|v| serde_json::to_string(v).expect("JSON values serialize"))
        .collect();
    match common.and_then(|c| c.out.as_ref()) {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let mut body = lines.join("\n");
            body.push('\n');
            fs::write(dir.join("report.jsonl"), body)?;
            let summary = json!({
                "command": report.command,
                "config": common.map(config_echo),
                "records": report.records.len(),
                "csv": report.csv.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
                "ok": report.ok,
                "exit_code": code,
            });
            fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
            for (name, body) in &report.csv {
                fs::write(dir.join(name), body)?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            for l in lines {
                if let Err(e) = writeln!(out, "{l}") {
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        break;
                    }
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}

/// Runs the CLI on explicit arguments and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let common = common_of(&cli.command);
    match run(&cli.command) {
        Ok(report) => {
            let code = if report.ok { 0 } else { 1 };
            if let Err(e) = emit(&report, common, code) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            code
        }
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(CliError::Analysis(m)) => {
            eprintln!("analysis failed: {m}");
            1
        }
    }
}
