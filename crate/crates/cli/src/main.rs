//! `kyfan`: command-line access to the Ky Fan k-norm toolkit.
//!
//! Every subcommand prints one JSON report on stdout. Exit codes: 0 success,
//! 1 a verdict is false, 2 bad input, 3 the two evaluation routes disagree.

mod matrix_file;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kyfan_core::cones::{
    critical_cone_dual_aff_contains, critical_cone_dual_contains, critical_cone_primal_aff_contains,
    critical_cone_primal_contains, lineality_dual_contains, lineality_primal_contains, tangent_cone_contains,
    ConeReport, TOL_CONE,
};
use kyfan_core::derivatives::{sigma_dd1, sigma_dd2, theta_dd1, theta_dd2};
use kyfan_core::ge::{analyze_ge, check_nondegeneracy, check_strict_complementarity, GeAnalysis, GeOptions, LinearMapRange};
use kyfan_core::norms::{dual_kyfan_norm, kyfan_norm, matrix_prox_pair};
use kyfan_core::oracles::{random_ge_instance, verify_instance, GeInstance, OracleConfig, SpectrumProfile};
use kyfan_core::sigma::{support_t2, upsilon_dual, upsilon_primal, upsilon_zero_conditions};
use kyfan_core::spectral::{ordered_svd, Mat};
use kyfan_core::{Error, Result};
use serde_json::Value;

use matrix_file::{read_matrix, write_matrix};
use report::{index_set, matrix, real, vector, Report};

const DEFAULT_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "kyfan", version, about = "Ky Fan k-norm prox maps, derivatives, cones and sigma-terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct MatK {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    k: usize,
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    s: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    group_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConeKind {
    Tangent,
    Lin,
    LinDual,
    Critical,
    CriticalAff,
    CriticalDual,
    CriticalDualAff,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value = "generic")]
    profile: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// θ(X), the sum of the k largest singular values.
    Norm(MatK),
    /// ϑ(X) = max(σ_1, ‖X‖_* / k).
    Dualnorm(MatK),
    /// Moreau split of X into the proximal points of θ and θ*.
    Prox {
        #[command(flatten)]
        a: MatK,
        #[arg(long)]
        group_tol: Option<f64>,
    },
    /// Validate a subgradient pair and print its index sets.
    GeAnalyze {
        #[command(flatten)]
        p: Pair,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Strict complementarity of a subgradient pair.
    StrictComp {
        #[command(flatten)]
        p: Pair,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Constraint nondegeneracy for the range spanned by the basis files.
    Nondegen {
        #[command(flatten)]
        p: Pair,
        #[arg(long, num_args = 0.., value_delimiter = ',')]
        basis: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// First directional derivatives of σ and θ at X along H.
    Dd1 {
        #[command(flatten)]
        a: MatK,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        group_tol: Option<f64>,
    },
    /// Parabolic second directional derivatives of σ and θ at X along (H, W).
    Dd2 {
        #[command(flatten)]
        a: MatK,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        group_tol: Option<f64>,
    },
    /// Cone membership of H at a subgradient pair.
    Cone {
        #[command(flatten)]
        p: Pair,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, value_enum)]
        cone_kind: ConeKind,
        /// Epigraph component of the tangent direction.
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
        #[arg(long, default_value_t = TOL_CONE)]
        tol: f64,
    },
    /// Both sigma-terms at a subgradient pair along H, each by two routes.
    SigmaTerm {
        #[command(flatten)]
        p: Pair,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, default_value_t = TOL_CONE)]
        tol: f64,
    },
    /// Run the oracle suite on a given pair or on a generated instance.
    Verify {
        #[arg(long, requires_all = ["s", "k"])]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        s: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "x")]
        profile: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Random directions per property.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Write a random instance (X, X̄, S̄) as matrix files.
    Gen {
        #[command(flatten)]
        g: GenArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Norm(_) => "norm",
            Command::Dualnorm(_) => "dualnorm",
            Command::Prox { .. } => "prox",
            Command::GeAnalyze { .. } => "ge-analyze",
            Command::StrictComp { .. } => "strict-comp",
            Command::Nondegen { .. } => "nondegen",
            Command::Dd1 { .. } => "dd1",
            Command::Dd2 { .. } => "dd2",
            Command::Cone { .. } => "cone",
            Command::SigmaTerm { .. } => "sigma-term",
            Command::Verify { .. } => "verify",
            Command::Gen { .. } => "gen",
        }
    }
}

fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn load_pair(p: &Pair, tol: f64, r: &mut Report) -> Result<GeAnalysis> {
    r.input("x", path_value(&p.x));
    r.input("s", path_value(&p.s));
    r.input("k", p.k.into());
    if let Some(g) = p.group_tol {
        r.input("group_tol", real(g));
    }
    let x = read_matrix(&p.x)?;
    let s = read_matrix(&p.s)?;
    let opts = GeOptions {
        tol,
        group_tol: p.group_tol,
        ..GeOptions::default()
    };
    analyze_ge(&x, &s, p.k, opts)
}

fn load_direction(path: &Path, key: &str, an_shape: (usize, usize), r: &mut Report) -> Result<Mat> {
    r.input(key, path_value(path));
    let h = read_matrix(path)?;
    if h.shape() != an_shape {
        return Err(Error::Input(format!("{key} has shape {:?}, expected {:?}", h.shape(), an_shape)));
    }
    Ok(h)
}

fn describe(an: &GeAnalysis, r: &mut Report) {
    r.output("case", Value::String(an.case.tag().into()));
    r.output("sigma_bar", vector(&an.sigma_bar));
    r.output("u_bar", vector(&an.u_bar));
    r.output("alpha", index_set(&an.alpha));
    r.output("beta", index_set(&an.beta));
    r.output("beta1", index_set(&an.beta1));
    r.output("beta2", index_set(&an.beta2));
    r.output("beta3", index_set(&an.beta3));
    r.output("gamma", index_set(&an.gamma));
    r.output("k0", an.k0.into());
    r.output("k1", an.k1.into());
    r.output("r", an.r.into());
    r.output("r0", an.r0.into());
    r.output("dual_norm_s", real(an.dual_norm_s));
    r.output("nuclear_norm_s", real(an.nuclear_norm_s));
}

fn cone_report(kind: ConeKind, rep: &ConeReport, r: &mut Report) {
    r.output("cone_kind", Value::String(format!("{kind:?}")));
    r.output("route", Value::String(rep.route.tag().into()));
    r.output("boundary", Value::Bool(rep.boundary));
    for c in &rep.conditions {
        r.residual(&c.name, c.residual);
    }
    r.verdict("member", rep.member);
}

fn profile(name: &str) -> Result<SpectrumProfile> {
    SpectrumProfile::parse(name)
}

fn run(cmd: &Command, r: &mut Report) -> Result<()> {
    match cmd {
        Command::Norm(a) | Command::Dualnorm(a) => {
            r.input("x", path_value(&a.x));
            r.input("k", a.k.into());
            let x = read_matrix(&a.x)?;
            let v = if matches!(cmd, Command::Norm(_)) { kyfan_norm(&x, a.k)? } else { dual_kyfan_norm(&x, a.k)? };
            r.output("value", real(v));
        }
        Command::Prox { a, group_tol } => {
            r.input("x", path_value(&a.x));
            r.input("k", a.k.into());
            let x = read_matrix(&a.x)?;
            let p = matrix_prox_pair(&x, a.k, *group_tol)?;
            r.output("prox_theta", matrix(&p.prox_theta));
            r.output("prox_theta_star", matrix(&p.prox_theta_star));
            r.output("sigma_bar", vector(&p.sigma_bar));
            r.output("u_bar", vector(&p.u_bar));
            r.residual("moreau", (&p.prox_theta + &p.prox_theta_star - &x).abs().max());
        }
        Command::GeAnalyze { p, tol } => {
            r.input("tol", real(*tol));
            let an = load_pair(p, *tol, r)?;
            describe(&an, r);
            r.verdict("subgradient_pair", true);
        }
        Command::StrictComp { p, tol } => {
            r.input("tol", real(*tol));
            let an = load_pair(p, DEFAULT_TOL, r)?;
            let sc = check_strict_complementarity(&an, *tol);
            r.output("case", Value::String(an.case.tag().into()));
            r.residual("margin", sc.margin);
            r.verdict("strict_complementarity", sc.holds);
        }
        Command::Nondegen { p, basis, tol } => {
            r.input("tol", real(*tol));
            r.input("basis", Value::Array(basis.iter().map(|b| path_value(b)).collect()));
            let an = load_pair(p, DEFAULT_TOL, r)?;
            let mats = basis.iter().map(|b| read_matrix(b)).collect::<Result<Vec<_>>>()?;
            let nd = check_nondegeneracy(&an, &LinearMapRange { basis: mats }, *tol)?;
            r.output("rank", nd.rank.into());
            r.output("dimension", nd.dimension.into());
            r.residual("smallest_singular_value", nd.smallest_singular_value);
            r.verdict("nondegenerate", nd.holds);
        }
        Command::Dd1 { a, h, group_tol } => {
            r.input("x", path_value(&a.x));
            r.input("k", a.k.into());
            let x = read_matrix(&a.x)?;
            let h = load_direction(h, "h", x.shape(), r)?;
            let svd = ordered_svd(&x, *group_tol)?;
            r.output("sigma_dd1", vector(&sigma_dd1(&svd, &h)?));
            r.output("theta_dd1", real(theta_dd1(&svd, &h, a.k)?));
        }
        Command::Dd2 { a, h, w, group_tol } => {
            r.input("x", path_value(&a.x));
            r.input("k", a.k.into());
            let x = read_matrix(&a.x)?;
            let h = load_direction(h, "h", x.shape(), r)?;
            let w = load_direction(w, "w", x.shape(), r)?;
            let svd = ordered_svd(&x, *group_tol)?;
            r.output("sigma_dd1", vector(&sigma_dd1(&svd, &h)?));
            r.output("theta_dd1", real(theta_dd1(&svd, &h, a.k)?));
            r.output("sigma_dd2", vector(&sigma_dd2(&svd, &h, &w, *group_tol)?));
            r.output("theta_dd2", real(theta_dd2(&svd, &h, &w, a.k)?));
        }
        Command::Cone { p, h, cone_kind, tau, tol } => {
            r.input("tol", real(*tol));
            r.input("cone_kind", Value::String(format!("{cone_kind:?}")));
            let an = load_pair(p, DEFAULT_TOL, r)?;
            let h = load_direction(h, "h", an.ambient_shape(), r)?;
            let rep = match cone_kind {
                ConeKind::Tangent => {
                    let tau = tau.ok_or_else(|| Error::Input("--tau is required for the tangent cone".into()))?;
                    r.input("tau", real(tau));
                    tangent_cone_contains(&an, &h, tau, *tol)?
                }
                ConeKind::Lin => lineality_primal_contains(&an, &h, *tol)?,
                ConeKind::LinDual => lineality_dual_contains(&an, &h, *tol)?,
                ConeKind::Critical => critical_cone_primal_contains(&an, &h, *tol)?,
                ConeKind::CriticalAff => critical_cone_primal_aff_contains(&an, &h, *tol)?,
                ConeKind::CriticalDual => critical_cone_dual_contains(&an, &h, *tol)?,
                ConeKind::CriticalDualAff => critical_cone_dual_aff_contains(&an, &h, *tol)?,
            };
            cone_report(*cone_kind, &rep, r);
        }
        Command::SigmaTerm { p, h, tol } => {
            r.input("tol", real(*tol));
            let an = load_pair(p, DEFAULT_TOL, r)?;
            let h = load_direction(h, "h", an.ambient_shape(), r)?;
            let up = upsilon_primal(&an, &h)?;
            let ud = upsilon_dual(&an, &h)?;
            r.output("upsilon", real(up.value_omega_route));
            r.output("upsilon_quadratic_route", real(up.value_quadratic_route));
            r.output("upsilon_dual", real(ud.value_omega_route));
            r.output("upsilon_dual_quadratic_route", real(ud.value_quadratic_route));
            r.output("support_t2", real(support_t2(&an, &h)?));
            r.output("zero_conditions_hold", Value::Bool(upsilon_zero_conditions(&an, &h, *tol)?));
            r.residual("upsilon_route_gap", up.route_gap);
            r.residual("upsilon_dual_route_gap", ud.route_gap);
        }
        Command::Verify { x, s, k, profile: prof, seed, m, n, samples } => {
            r.seed = Some(*seed);
            r.input("samples", (*samples).into());
            let inst: GeInstance = match (x, s) {
                (Some(x), Some(s)) => {
                    let k = k.ok_or_else(|| Error::Input("--k is required with --x".into()))?;
                    r.input("x", path_value(x));
                    r.input("s", path_value(s));
                    r.input("k", k.into());
                    GeInstance::from_pair(&read_matrix(x)?, &read_matrix(s)?, k, GeOptions::default())?
                }
                _ => {
                    let name = prof.as_deref().unwrap_or("generic");
                    let k = k.unwrap_or(2);
                    r.input("profile", Value::String(name.into()));
                    r.input("m", (*m).into());
                    r.input("n", (*n).into());
                    r.input("k", k.into());
                    random_ge_instance(*m, *n, k, profile(name)?, *seed)?
                }
            };
            let cfg = OracleConfig {
                sample_count: *samples,
                seed: *seed,
                ..OracleConfig::default()
            };
            r.output("case", Value::String(inst.analysis.case.tag().into()));
            let mut props = serde_json::Map::new();
            for c in verify_instance(&inst, &cfg)? {
                let mut o = serde_json::Map::new();
                o.insert("pass".into(), Value::Bool(c.pass));
                o.insert("value".into(), real(c.value));
                o.insert("threshold".into(), real(c.threshold));
                o.insert("samples".into(), c.samples.into());
                props.insert(c.name.into(), Value::Object(o));
                r.verdict(c.name, c.pass);
            }
            r.output("properties", Value::Object(props));
        }
        Command::Gen { g, out } => {
            r.seed = Some(g.seed);
            r.input("profile", Value::String(g.profile.clone()));
            r.input("m", g.m.into());
            r.input("n", g.n.into());
            r.input("k", g.k.into());
            r.input("out", path_value(out));
            let inst = random_ge_instance(g.m, g.n, g.k, profile(&g.profile)?, g.seed)?;
            std::fs::create_dir_all(out).map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
            let mut files = serde_json::Map::new();
            for (name, a) in [("x", &inst.x), ("x_bar", &inst.x_bar), ("s_bar", &inst.s_bar)] {
                let path = out.join(format!("{name}.txt"));
                write_matrix(&path, a)?;
                files.insert(name.into(), path_value(&path));
            }
            r.output("files", Value::Object(files));
            describe(&inst.analysis, r);
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::RouteDisagreement { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            let msg = e.to_string();
            eprintln!("{msg}");
            let name = std::env::args().nth(1).filter(|a| !a.starts_with('-')).unwrap_or_default();
            let mut r = Report::new(&name);
            r.diagnostic = Some(("USAGE_ERROR".into(), msg.lines().next().unwrap_or_default().to_string()));
            emit(&r);
            return ExitCode::from(2);
        }
    };
    let mut r = Report::new(cli.command.name());
    let code = match run(&cli.command, &mut r) {
        Ok(()) => u8::from(!r.all_verdicts_hold()),
        Err(e) => {
            eprintln!("error: {e}");
            r.diagnostic = Some((e.code().into(), e.to_string()));
            exit_code(&e)
        }
    };
    emit(&r);
    ExitCode::from(code)
}

fn emit(r: &Report) {
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{}", r.render());
}
