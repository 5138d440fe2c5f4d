//! The `statfrob` command line.
//!
//! Every subcommand produces a [`Report`]: the command line, the run
//! configuration, a result payload, a pass/fail verdict where a tolerance
//! applies (with the tolerance itself), and the wall time. Exit codes are
//! 0 on success, 1 when a tolerance check fails and 2 on usage or
//! validation errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::frobenius::{self, DEFAULT_KAPPA, DEFAULT_POTENTIAL_STEP};
use crate::geometry::{self, CurvatureOptions};
use crate::model::{CanonicalPoint, ExponentialFamilyModel, NORMALIZATION_TOL};
use crate::split_algebra;
use crate::toric;
use crate::webs::{self, CevianConfig, PolynomialWeb, SimplexPoint, WebFunction};
use crate::{numdiff, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Step for the finite-difference Hessian of ψ in `geom tensors`.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-4;
pub const HESSIAN_TOL: f64 = 1e-6;
pub const FLATNESS_TOL: f64 = 1e-6;
pub const PENCIL_SYMMETRY_TOL: f64 = 1e-6;
pub const CEVA_TOL: f64 = 1e-10;
pub const SPHERE_NORM_TOL: f64 = 1e-13;
pub const SPHERE_METRIC_TOL: f64 = 1e-8;
pub const FIELDS_SUM_TOL: f64 = 1e-13;
pub const CAUCHY_RIEMANN_TOL: f64 = 1e-8;
pub const CAUCHY_RIEMANN_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "statfrob",
    version,
    about = "Statistical, Frobenius, toric and web structure of discrete exponential families"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Finite-difference step; each command documents its own default.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Scale of the multiplication tensor, `A = κ C`.
    #[arg(long, global = true, default_value_t = DEFAULT_KAPPA, allow_negative_numbers = true)]
    pub kappa: f64,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Inspect an exponential-family model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Metric, cubic tensor, α-connections and curvature.
    #[command(subcommand)]
    Geom(GeomCmd),
    /// Pre-Frobenius multiplication residuals.
    #[command(subcommand)]
    Frobenius(FrobeniusCmd),
    /// Toric relations of the model.
    #[command(subcommand)]
    Toric(ToricCmd),
    /// Simplex and planar web constructions.
    #[command(subcommand)]
    Web(WebCmd),
    /// The rank-2 split algebra.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file path or built-in name (bernoulli, trinomial, independence-2x2, random-n3m6-seed0).
    pub model: String,
}

#[derive(Debug, Args)]
pub struct PointArg {
    /// Canonical coordinates θ, comma separated; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Dimensions, rank and ψ(0).
    Info(ModelArg),
    /// Probabilities, mean parameters and the monomial parametrization at θ.
    Probs {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum GeomCmd {
    /// Fisher metric and Amari–Chentsov tensor, checked against a finite-difference Hessian of ψ.
    Tensors {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
    },
    /// Christoffel symbols of the α-connection.
    Christoffels {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Curvature of the α-connection; α = ±1 is checked for flatness.
    Curvature {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        /// Use plain central differences instead of Richardson extrapolation.
        #[arg(long)]
        no_richardson: bool,
    },
    /// Compare the curvatures of the α- and (−α)-connections.
    PencilSymmetry {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        no_richardson: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum FrobeniusCmd {
    /// Metric invariance, associativity, potentiality and pencil residuals.
    Check {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        point: PointArg,
        /// Random vector triples for the metric-invariance test.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ToricCmd {
    /// Kernel lattice basis of the extended matrix and its binomials.
    Ideal(ModelArg),
    /// Evaluate the binomials on sampled model points.
    Verify {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct WebArg {
    /// Built-in web (sum, product, cubic) or a polynomial web JSON file.
    #[arg(long, default_value = "cubic")]
    pub web: String,
}

#[derive(Debug, Args)]
pub struct SimplexArg {
    /// Barycentric coordinates, comma separated, summing to 1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum WebCmd {
    /// Thomsen hexagon closure defects.
    Hexagon {
        #[command(flatten)]
        web: WebArg,
        /// Center `x,y`; defaults to the center of the domain box.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        center: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.01")]
        eps: Vec<f64>,
    },
    /// Planar web curvature K.
    Curvature {
        #[command(flatten)]
        web: WebArg,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
    },
    /// Signed Ceva product on the reference triangle.
    Ceva {
        /// Interior point whose Cevians are tested.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            conflicts_with = "direction"
        )]
        point: Option<Vec<f64>>,
        /// Common direction (barycentric, summing to 0) for parallel Cevians.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        direction: Option<Vec<f64>>,
        /// Move the first foot along its side by this affine distance.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb: f64,
    },
    /// Edge-ratio products on the reference n-simplex.
    CevaN {
        #[command(flatten)]
        point: SimplexArg,
    },
    /// Embedding into the sphere of radius 2.
    Sphere {
        #[command(flatten)]
        point: SimplexArg,
    },
    /// Barycentric vector fields y_k, z_k, q_k, x_k.
    Fields {
        #[command(flatten)]
        point: SimplexArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Cauchy–Riemann residual of a planar map over the split algebra.
    Cr {
        /// exp, identity or swap.
        #[arg(long, default_value = "exp")]
        map: String,
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_value = "0,0"
        )]
        at: Vec<f64>,
    },
    /// Split an algebra web into its two component webs.
    Subweb {
        /// sum, product or mixed.
        #[arg(long, default_value = "mixed")]
        web: String,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.01")]
        eps: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub step: Option<f64>,
    pub samples: Option<usize>,
    pub format: Format,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub config: RunConfig,
    pub result: Value,
    pub pass: Option<bool>,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_ms: f64,
}

/// What the binary prints and how it exits.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Payload {
    result: Value,
    pass: Option<bool>,
    tolerances: Vec<(&'static str, f64)>,
}

impl Payload {
    fn info(result: Value) -> Self {
        Self {
            result,
            pass: None,
            tolerances: Vec::new(),
        }
    }

    fn checked(result: Value, pass: bool, tolerances: Vec<(&'static str, f64)>) -> Self {
        Self {
            result,
            pass: Some(pass),
            tolerances,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize")
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == EXIT_OK {
                (text, String::new())
            } else {
                (String::new(), text)
            };
            return Outcome {
                report: None,
                exit_code: code,
                stdout,
                stderr,
            };
        }
    };
    let command = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let started = Instant::now();
    let config = RunConfig {
        seed: cli.seed,
        step: cli.step,
        samples: match &cli.command {
            Group::Toric(ToricCmd::Verify { samples, .. }) => Some(*samples),
            _ => None,
        },
        format: cli.format,
        kappa: cli.kappa,
    };
    let payload = validate(&cli).and_then(|()| run(&cli));
    let payload = match payload {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                report: None,
                exit_code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            };
        }
    };
    let report = Report {
        command,
        config,
        result: payload.result,
        pass: payload.pass,
        tolerances: payload
            .tolerances
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect(),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let stdout = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => render_text(&report),
    };
    let exit_code = if report.pass == Some(false) {
        EXIT_TOLERANCE
    } else {
        EXIT_OK
    };
    Outcome {
        report: Some(report),
        exit_code,
        stdout,
        stderr: String::new(),
    }
}

fn validate(cli: &Cli) -> Result<()> {
    if let Some(h) = cli.step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "--step must be positive, got {h}"
            )));
        }
    }
    if !cli.kappa.is_finite() || cli.kappa == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "--kappa must be finite and nonzero, got {}",
            cli.kappa
        )));
    }
    Ok(())
}

pub fn load_model(arg: &str) -> Result<ExponentialFamilyModel> {
    let path = Path::new(arg);
    if path.is_file() {
        return ExponentialFamilyModel::from_json(&std::fs::read(path)?);
    }
    ExponentialFamilyModel::builtin(arg).ok_or_else(|| {
        Error::InvalidArgument(format!("no model file or built-in model named {arg:?}"))
    })
}

pub fn load_web(arg: &str) -> Result<WebFunction> {
    if let Some(web) = webs::builtin_web(arg) {
        return Ok(web);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return PolynomialWeb::from_json(&std::fs::read(path)?)?.into_web();
    }
    Err(Error::InvalidArgument(format!(
        "no web file or built-in web named {arg:?}"
    )))
}

fn point_for(model: &ExponentialFamilyModel, p: &PointArg) -> Result<CanonicalPoint> {
    match &p.theta {
        Some(theta) => model.point(theta),
        None => Ok(CanonicalPoint::origin(model.n())),
    }
}

fn pair(v: &[f64], what: &str) -> Result<(f64, f64)> {
    match v {
        [x, y] => Ok((*x, *y)),
        _ => Err(Error::InvalidArgument(format!(
            "{what} needs exactly two values, got {}",
            v.len()
        ))),
    }
}

fn curvature_opts(cli: &Cli, no_richardson: bool) -> CurvatureOptions {
    let mut opts = CurvatureOptions::default();
    if let Some(h) = cli.step {
        opts.step = h;
    }
    opts.richardson = !no_richardson;
    opts
}

fn run(cli: &Cli) -> Result<Payload> {
    match &cli.command {
        Group::Model(cmd) => run_model(cmd),
        Group::Geom(cmd) => run_geom(cli, cmd),
        Group::Frobenius(FrobeniusCmd::Check {
            model,
            point,
            trials,
        }) => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            let step = cli.step.unwrap_or(DEFAULT_POTENTIAL_STEP);
            let check = frobenius::check(&m, &pt, cli.kappa, *trials, cli.seed, step)?;
            Ok(Payload::checked(
                to_value(&check),
                check.passes(),
                vec![
                    ("metric_invariance", frobenius::METRIC_INVARIANCE_TOL),
                    ("potentiality", frobenius::POTENTIALITY_TOL),
                    ("pencil_match", frobenius::PENCIL_MATCH_TOL),
                ],
            ))
        }
        Group::Toric(cmd) => run_toric(cli, cmd),
        Group::Web(cmd) => run_web(cli, cmd),
        Group::Algebra(cmd) => run_algebra(cli, cmd),
    }
}

fn run_model(cmd: &ModelCmd) -> Result<Payload> {
    match cmd {
        ModelCmd::Info(arg) => {
            let m = load_model(&arg.model)?;
            Ok(Payload::info(json!({
                "name": m.name(),
                "m": m.m(),
                "n": m.n(),
                "Q": m.q(),
                "base_measure": m.base_measure(),
                "rank": m.rank_report(),
                "psi_at_origin": m.log_partition(&CanonicalPoint::origin(m.n())),
            })))
        }
        ModelCmd::Probs { model, point } => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            let p = m.probabilities(&pt);
            let sum = p.sum();
            let mean = m.mean_parameters(&pt, DEFAULT_HESSIAN_STEP);
            Ok(Payload::checked(
                json!({
                    "theta": pt.theta,
                    "psi": m.log_partition(&pt),
                    "p": p.p,
                    "sum": sum,
                    "mean_parameters": mean,
                    "monomial": m.monomial_parametrization(&pt),
                }),
                (sum - 1.0).abs() <= NORMALIZATION_TOL,
                vec![("normalization", NORMALIZATION_TOL)],
            ))
        }
    }
}

fn run_geom(cli: &Cli, cmd: &GeomCmd) -> Result<Payload> {
    match cmd {
        GeomCmd::Tensors { model, point } => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            let s = geometry::statistical_structure(&m, &pt);
            let h = cli.step.unwrap_or(DEFAULT_HESSIAN_STEP);
            let fd = numdiff::hessian(m.log_partition_fn(), &pt.theta, h);
            let n = m.n();
            let mut residual: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    residual = residual.max((s.metric.g[(a, b)] - fd[a][b]).abs());
                }
            }
            Ok(Payload::checked(
                json!({
                    "theta": pt.theta,
                    "metric": s.metric,
                    "cubic": s.cubic,
                    "hessian_step": h,
                    "hessian_residual": residual,
                }),
                residual < HESSIAN_TOL,
                vec![("hessian_residual", HESSIAN_TOL)],
            ))
        }
        GeomCmd::Christoffels {
            model,
            point,
            alpha,
        } => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            Ok(Payload::info(to_value(&geometry::alpha_christoffels(
                &m, &pt, *alpha,
            )?)))
        }
        GeomCmd::Curvature {
            model,
            point,
            alpha,
            no_richardson,
        } => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            let opts = curvature_opts(cli, *no_richardson);
            let r = geometry::curvature_tensor(&m, &pt, *alpha, &opts)?;
            let mut result = json!({ "theta": pt.theta, "options": opts, "curvature": r });
            if m.n() >= 2 {
                let g = geometry::fisher_metric(&m, &pt);
                let mut e = vec![0.0; m.n()];
                let mut f = vec![0.0; m.n()];
                e[0] = 1.0;
                f[1] = 1.0;
                result["sectional_01"] = json!(r.sectional(&g, &e, &f));
            }
            if alpha.abs() == 1.0 {
                Ok(Payload::checked(
                    result,
                    r.max_abs < FLATNESS_TOL,
                    vec![("flatness", FLATNESS_TOL)],
                ))
            } else {
                Ok(Payload::info(result))
            }
        }
        GeomCmd::PencilSymmetry {
            model,
            point,
            alpha,
            no_richardson,
        } => {
            let m = load_model(&model.model)?;
            let pt = point_for(&m, point)?;
            let opts = curvature_opts(cli, *no_richardson);
            let rep = geometry::pencil_symmetry_report(&m, &pt, *alpha, &opts)?;
            Ok(Payload::checked(
                json!({ "theta": pt.theta, "options": opts, "report": rep }),
                rep.max_abs_diff < PENCIL_SYMMETRY_TOL,
                vec![("pencil_symmetry", PENCIL_SYMMETRY_TOL)],
            ))
        }
    }
}

fn run_toric(cli: &Cli, cmd: &ToricCmd) -> Result<Payload> {
    match cmd {
        ToricCmd::Ideal(arg) => {
            let m = load_model(&arg.model)?;
            let qt = toric::extended_matrix(&m);
            let basis = toric::lattice_kernel(&qt);
            let binomials: Vec<String> = toric::binomials_from_kernel(&basis)
                .iter()
                .map(|b| b.to_string())
                .collect();
            let expected = qt.m() - qt.rank();
            Ok(Payload::checked(
                json!({
                    "extended_matrix": qt.rows,
                    "extended_rank": qt.rank(),
                    "lattice": basis,
                    "binomials": binomials,
                    "note": toric::SATURATION_CAVEAT,
                }),
                basis.rank() == expected,
                Vec::new(),
            ))
        }
        ToricCmd::Verify { model, samples } => {
            let m = load_model(&model.model)?;
            let basis = toric::lattice_kernel(&toric::extended_matrix(&m));
            let rels = toric::binomials_from_kernel(&basis);
            let rep = toric::verify_vanishing(&m, &rels, *samples, cli.seed)?;
            Ok(Payload::checked(
                to_value(&rep),
                rep.passes(),
                vec![("vanishing", rep.tolerance)],
            ))
        }
    }
}

fn simplex_point(p: &SimplexArg) -> Result<SimplexPoint> {
    SimplexPoint::new(p.point.clone())
}

fn run_web(cli: &Cli, cmd: &WebCmd) -> Result<Payload> {
    match cmd {
        WebCmd::Hexagon { web, center, eps } => {
            let w = load_web(&web.web)?;
            let c = match center {
                Some(c) => pair(c, "--center")?,
                None => w.domain().center(),
            };
            let rep = webs::hexagon_sweep(&w, c, eps)?;
            Ok(Payload::info(json!({ "eps": eps, "hexagon": rep })))
        }
        WebCmd::Curvature { web, at } => {
            let w = load_web(&web.web)?;
            let p = match at {
                Some(a) => pair(a, "--at")?,
                None => w.domain().center(),
            };
            let step = cli.step.unwrap_or(webs::DEFAULT_CURVATURE_STEP);
            let k = webs::web_curvature(&w, p, step)?;
            Ok(Payload::info(json!({
                "web": w.name(),
                "at": [p.0, p.1],
                "step": step,
                "exact_partials": w.has_exact_partials(),
                "curvature": k,
            })))
        }
        WebCmd::Ceva {
            point,
            direction,
            perturb,
        } => {
            let tri = webs::reference_simplex(2);
            let cfg = match (point, direction) {
                (_, Some(d)) => CevianConfig::parallel(tri.clone(), d)?,
                (Some(p), None) => {
                    CevianConfig::concurrent(tri.clone(), &SimplexPoint::new(p.clone())?)?
                }
                (None, None) => {
                    let third = 1.0 / 3.0;
                    CevianConfig::concurrent(tri.clone(), &SimplexPoint::new(vec![third; 3])?)?
                }
            };
            let mut feet = cfg.triangle_feet()?;
            if *perturb != 0.0 {
                // Slide the foot on BC towards C.
                let side: Vec<f64> = tri[2].iter().zip(&tri[1]).map(|(c, b)| c - b).collect();
                let len = side.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (f, s) in feet[0].iter_mut().zip(&side) {
                    *f += perturb * s / len;
                }
            }
            let product =
                webs::ceva_product(&[tri[0].clone(), tri[1].clone(), tri[2].clone()], &feet)?;
            let deviation = (product + 1.0).abs();
            Ok(Payload::checked(
                json!({
                    "config": cfg,
                    "perturb": perturb,
                    "feet": feet,
                    "incidence_defect": cfg.incidence_defect(),
                    "product": product,
                    "deviation": deviation,
                }),
                deviation < CEVA_TOL,
                vec![("ceva", CEVA_TOL)],
            ))
        }
        WebCmd::CevaN { point } => {
            let p = simplex_point(point)?;
            let simplex = webs::reference_simplex(p.dim());
            let edges = webs::edge_points_from_point(&simplex, &p)?;
            let rep = webs::generalized_ceva_check(&simplex, &edges)?;
            let pass = rep.max_deviation < CEVA_TOL;
            Ok(Payload::checked(
                json!({ "point": p.p, "report": rep }),
                pass,
                vec![("ceva", CEVA_TOL)],
            ))
        }
        WebCmd::Sphere { point } => {
            let s = webs::sphere_embedding(&simplex_point(point)?)?;
            let pass =
                (s.norm - 4.0).abs() < SPHERE_NORM_TOL && s.metric_residual < SPHERE_METRIC_TOL;
            Ok(Payload::checked(
                to_value(&s),
                pass,
                vec![
                    ("norm", SPHERE_NORM_TOL),
                    ("metric_residual", SPHERE_METRIC_TOL),
                ],
            ))
        }
        WebCmd::Fields { point } => {
            let f = webs::barycentric_fields(&simplex_point(point)?)?;
            let worst = f.x_sum.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            Ok(Payload::checked(
                to_value(&f),
                worst < FIELDS_SUM_TOL,
                vec![("x_sum", FIELDS_SUM_TOL)],
            ))
        }
    }
}

fn run_algebra(cli: &Cli, cmd: &AlgebraCmd) -> Result<Payload> {
    match cmd {
        AlgebraCmd::Cr { map, at } => {
            let f = split_algebra::builtin_map(map).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown map {map:?}; expected exp, identity or swap"
                ))
            })?;
            let at = pair(at, "--at")?;
            let step = cli.step.unwrap_or(CAUCHY_RIEMANN_STEP);
            let residual = split_algebra::cauchy_riemann_residual(&*f, at, step);
            Ok(Payload::info(json!({
                "map": map,
                "at": [at.0, at.1],
                "step": step,
                "residual": residual,
                "transposed_identity_residual": split_algebra::transposed_identity_residual(&*f, at, step),
                "algebra_differentiable": residual < CAUCHY_RIEMANN_TOL,
                "differentiability_tolerance": CAUCHY_RIEMANN_TOL,
            })))
        }
        AlgebraCmd::Subweb { web, eps } => {
            let f = split_algebra::builtin_polynomial(web).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown algebra web {web:?}; expected sum, product or mixed"
                ))
            })?;
            let (wp, wm) = split_algebra::subweb_decompose(&f)?;
            let (cp, cm) = (f.domain_plus.center(), f.domain_minus.center());
            let step = cli.step.unwrap_or(webs::DEFAULT_CURVATURE_STEP);
            let split = eps
                .iter()
                .map(|&e| split_algebra::split_hexagon(&f, cp, cm, e))
                .collect::<Result<Vec<_>>>()?;
            let component =
                |w: &WebFunction, c: (f64, f64), poly: PolynomialWeb| -> Result<Value> {
                    Ok(json!({
                        "web": poly,
                        "center": [c.0, c.1],
                        "curvature": webs::web_curvature(w, c, step)?,
                    }))
                };
            Ok(Payload::info(json!({
                "algebra_web": f,
                "plus": component(&wp, cp, f.plus_component())?,
                "minus": component(&wm, cm, f.minus_component())?,
                "split_hexagon": split,
            })))
        }
    }
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn inline_array(v: &Value) -> Option<String> {
    let items = v.as_array()?;
    let parts: Option<Vec<String>> = items
        .iter()
        .map(|x| {
            scalar(x).or_else(|| {
                inline_array(x).filter(|_| {
                    x.as_array()
                        .is_some_and(|a| a.iter().all(|y| scalar(y).is_some()))
                })
            })
        })
        .collect();
    let parts = parts?;
    let line = format!("[{}]", parts.join(", "));
    (line.len() <= 100).then_some(line)
}

/// Arrays of flat objects sharing their keys render as aligned tables.
fn table(items: &[Value], indent: usize) -> Option<Vec<String>> {
    let first = items.first()?.as_object()?;
    let keys: Vec<&String> = first
        .iter()
        .filter(|(_, v)| scalar(v).is_some())
        .map(|(k, _)| k)
        .collect();
    if keys.is_empty() {
        return None;
    }
    let mut rows = vec![keys.iter().map(|k| k.to_string()).collect::<Vec<_>>()];
    for item in items {
        let obj = item.as_object()?;
        rows.push(
            keys.iter()
                .map(|k| obj.get(*k).and_then(scalar).unwrap_or_default())
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..keys.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    Some(
        rows.iter()
            .map(|r| {
                let cells: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect();
                format!("{}{}", " ".repeat(indent), cells.join("  "))
            })
            .collect(),
    )
}

fn render_value(key: &str, v: &Value, indent: usize, width: usize, out: &mut Vec<String>) {
    let pad = " ".repeat(indent);
    let empty = match v {
        Value::Object(m) => m.is_empty().then(|| "-".to_owned()),
        _ => None,
    };
    if let Some(s) = scalar(v).or_else(|| inline_array(v)).or(empty) {
        out.push(format!("{pad}{key:<width$}  {s}"));
        return;
    }
    out.push(format!("{pad}{key}:"));
    match v {
        Value::Object(map) => render_object(map, indent + 2, out),
        Value::Array(items) => {
            if let Some(lines) = table(items, indent + 2) {
                out.extend(lines);
            } else {
                for (i, item) in items.iter().enumerate() {
                    render_value(&format!("[{i}]"), item, indent + 2, 0, out);
                }
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

fn render_object(map: &serde_json::Map<String, Value>, indent: usize, out: &mut Vec<String>) {
    let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
    for (k, v) in map {
        render_value(k, v, indent, width, out);
    }
}

/// Aligned plain-text rendering of a report.
pub fn render_text(report: &Report) -> String {
    let mut out = vec![format!("statfrob {}", report.command.join(" "))];
    let value = to_value(report);
    let map = value.as_object().expect("report is an object");
    let mut body = serde_json::Map::new();
    for key in ["result", "pass", "tolerances", "config"] {
        if let Some(v) = map.get(key) {
            body.insert(key.to_owned(), v.clone());
        }
    }
    body.insert(
        "wall_time_ms".to_owned(),
        json!(format!("{:.3}", report.wall_time_ms)),
    );
    render_object(&body, 0, &mut out);
    out.join("\n") + "\n"
}
