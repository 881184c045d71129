//! The `hmfe` command line.
//!
//! Every command writes one JSON report (stdout or `--out`) that echoes its
//! input, the library version and any tolerances and seed, so a report is
//! enough to reproduce the run. Exit codes: 0 success, 2 parse error,
//! 3 precondition violation, 4 verification failure, 5 construction failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::algebra::{rational, BiPoly, BigRational, UniPoly};
use crate::error::Error;
use crate::float17;
use crate::mfe::{construct_solution, Chart, ClosedForm, ConstructionStatus, CurveSpec, MetricSpec};
use crate::ode::{self, DetectionReport, OdeData};
use crate::pde::{pde_residual, phi_residuals};
use crate::verify::{self, GridSpec, Tolerances, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_CONSTRUCTION: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "hmfe", version, about = "Mean field equation solutions on hyperelliptic curves")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The formal ODE and its polynomial solutions.
    #[command(subcommand)]
    Ode(OdeCmd),
    /// The bivariate equation.
    #[command(subcommand)]
    Pde(PdeCmd),
    /// Construction and verification of mean field equation solutions.
    #[command(subcommand)]
    Mfe(MfeCmd),
}

#[derive(Subcommand, Debug)]
enum OdeCmd {
    /// Series solution with Q(0) = 1/a.
    Solve {
        /// Coefficients of S, ascending, e.g. `1,1/2`.
        #[arg(long)]
        data: String,
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Polynomial solution detection.
    Detect {
        #[arg(long)]
        data: String,
        /// Look for solutions of degree up to this bound (default deg S + 2).
        #[arg(long)]
        max_degree: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum PdeCmd {
    /// u u_xy - u_x u_y - σ u.
    Residual(PdeArgs),
    /// All quadratic residuals φ_σ^{α,β}(u).
    CheckVariety(PdeArgs),
}

#[derive(Args, Debug)]
struct PdeArgs {
    /// `[[i, j, "num/den"], ...]` inline, or `@path` to a file holding it.
    #[arg(long)]
    u: String,
    #[arg(long)]
    sigma: String,
}

#[derive(Subcommand, Debug)]
enum MfeCmd {
    /// Finds the admissible root and builds u and φ.
    Construct {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Numerical checks of a constructed solution.
    Verify(VerifyArgs),
    /// Total mass of e^ψ.
    Mass {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 2000)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    /// Weights λ_1..λ_g, e.g. `1,1`.
    #[arg(long, conflicts_with = "metric")]
    lambda: Option<String>,
    /// JSON file with a list of "num/den" weights.
    #[arg(long)]
    metric: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CurveArgs {
    /// JSON file with a list of [re, im] branch points.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Without `--curve`: 2g+2 roots of unity scaled by this radius.
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum ChartArg {
    C0,
    C0prime,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Report from `mfe construct`, or a bare closed form.
    #[arg(long, conflicts_with_all = ["lambda", "metric"])]
    solution: Option<PathBuf>,
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long, value_enum, default_value = "c0")]
    chart: ChartArg,
    /// Grid center as `re,im`.
    #[arg(long, default_value = "0,0")]
    center: String,
    #[arg(long, default_value_t = 2.0)]
    half_width: f64,
    #[arg(long, default_value_t = 201)]
    resolution: usize,
    /// Default 1e-3 · half_width.
    #[arg(long)]
    fd_step: Option<f64>,
    /// Default max(10 h, d/4), d the smallest distance between singular points.
    #[arg(long)]
    exclusion_radius: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    mass_resolution: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the h/2 convergence run.
    #[arg(long)]
    no_convergence: bool,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    mass_tol: f64,
    /// Per-point residuals as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            _ => EXIT_PRECONDITION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn parse_fail(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: msg.into() }
}

#[derive(Serialize)]
struct Envelope<'a, I: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    input: I,
    result: R,
}

struct Outcome {
    json: String,
    code: i32,
}

fn envelope<I: Serialize, R: Serialize>(command: &str, input: I, result: R, code: i32) -> Result<Outcome, Failure> {
    let env = Envelope { tool: "hmfe", version: env!("CARGO_PKG_VERSION"), command, input, result };
    let json = serde_json::to_string_pretty(&env).map_err(|e| Failure { code: EXIT_PRECONDITION, message: e.to_string() })?;
    Ok(Outcome { json, code })
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| parse_fail(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| parse_fail(format!("bad {what}: {e}")))
}

fn inline_or_file(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => read_text(&PathBuf::from(path)),
        None => Ok(arg.to_string()),
    }
}

fn parse_float(text: &str, what: &str) -> Result<f64, Failure> {
    text.trim().parse().map_err(|_| parse_fail(format!("bad {what}: {text:?}")))
}

fn load_metric(args: &MetricArgs) -> Result<(MetricSpec, Vec<String>), Failure> {
    let lambdas: Vec<BigRational> = match (&args.lambda, &args.metric) {
        (Some(text), _) => rational::parse_list(text)?,
        (None, Some(path)) => {
            let items: Vec<String> = parse_json(&read_text(path)?, "metric file")?;
            items.iter().map(|s| rational::parse(s)).collect::<Result<_, _>>()?
        }
        (None, None) => return Err(Failure { code: EXIT_PRECONDITION, message: "give --lambda or --metric".into() }),
    };
    let echo = lambdas.iter().map(rational::format).collect();
    Ok((MetricSpec::new(lambdas)?, echo))
}

fn load_curve(args: &CurveArgs, genus: usize) -> Result<CurveSpec, Failure> {
    match &args.curve {
        Some(path) => {
            let pairs: Vec<[f64; 2]> = parse_json(&read_text(path)?, "curve file")?;
            let roots: Vec<Complex64> = pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            Ok(CurveSpec::from_roots(&roots)?)
        }
        None => {
            if !(args.radius.is_finite() && args.radius > 0.0) {
                return Err(Failure { code: EXIT_PRECONDITION, message: "radius must be positive".into() });
            }
            Ok(CurveSpec::roots_of_unity(2 * genus + 2, args.radius)?)
        }
    }
}

#[derive(Serialize)]
struct SolveResult {
    #[serde(with = "rational::vec")]
    coeffs: Vec<BigRational>,
    residual_order: usize,
    residual_zero: bool,
}

#[derive(Serialize)]
struct SolveInput<'a> {
    data: &'a UniPoly,
    a: String,
    terms: usize,
}

#[derive(Serialize)]
struct DetectInput<'a> {
    data: &'a UniPoly,
    max_degree: Option<usize>,
}

fn run_ode(cmd: &OdeCmd) -> Result<Outcome, Failure> {
    match cmd {
        OdeCmd::Solve { data, a, terms } => {
            let s = UniPoly::new(rational::parse_list(data)?);
            let a_val = rational::parse(a)?;
            if *terms == 0 {
                return Err(Failure { code: EXIT_PRECONDITION, message: "--terms must be positive".into() });
            }
            let sol = ode::build_series(&OdeData::new(s.clone()), &a_val, *terms)?;
            let res = ode::ode_residual_series(&sol.coeffs, &OdeData::new(s.clone()))?;
            let result = SolveResult {
                coeffs: sol.coeffs.coeffs().to_vec(),
                residual_order: res.order(),
                residual_zero: res.is_zero(),
            };
            let input = SolveInput { data: &s, a: rational::format(&a_val), terms: *terms };
            envelope("ode solve", input, result, EXIT_OK)
        }
        OdeCmd::Detect { data, max_degree } => {
            let s = UniPoly::new(rational::parse_list(data)?);
            let d = OdeData::new(s.clone());
            let det = match max_degree {
                Some(n) => ode::detect_polynomial_with_degree(&d, *n)?,
                None => ode::detect_polynomial(&d)?,
            };
            let input = DetectInput { data: &s, max_degree: *max_degree };
            envelope("ode detect", input, DetectionReport::from(&det), EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct PdeInput<'a> {
    u: &'a BiPoly,
    sigma: &'a BiPoly,
}

#[derive(Serialize)]
struct ResidualResult {
    residual: BiPoly,
    is_zero: bool,
}

fn run_pde(cmd: &PdeCmd) -> Result<Outcome, Failure> {
    let (args, name) = match cmd {
        PdeCmd::Residual(a) => (a, "pde residual"),
        PdeCmd::CheckVariety(a) => (a, "pde check-variety"),
    };
    let u: BiPoly = parse_json(&inline_or_file(&args.u)?, "--u")?;
    let sigma: BiPoly = parse_json(&inline_or_file(&args.sigma)?, "--sigma")?;
    let input = PdeInput { u: &u, sigma: &sigma };
    match cmd {
        PdeCmd::Residual(_) => {
            let residual = pde_residual(&u, &sigma);
            let is_zero = residual.is_zero();
            envelope(name, input, ResidualResult { residual, is_zero }, EXIT_OK)
        }
        PdeCmd::CheckVariety(_) => envelope(name, input, phi_residuals(&u, &sigma), EXIT_OK),
    }
}

#[derive(Serialize)]
struct MetricInput {
    lambda: Vec<String>,
    curve: Option<CurveSpec>,
}

#[derive(Serialize)]
struct ConstructResult {
    report: crate::mfe::ConstructionReport,
    /// `φ` at the origin of each chart, when a curve was given.
    #[serde(with = "float17::vec")]
    phi_at_chart_origins: Vec<f64>,
}

fn run_construct(metric: &MetricArgs, curve: &CurveArgs) -> Result<Outcome, Failure> {
    let (m, echo) = load_metric(metric)?;
    let curve = load_curve(curve, m.genus())?;
    let report = construct_solution(&m)?;
    let code = match report.status {
        ConstructionStatus::Solved => EXIT_OK,
        ConstructionStatus::NoAdmissibleRoot => EXIT_CONSTRUCTION,
    };
    let origin = Complex64::new(0.0, 0.0);
    let phi_at_chart_origins = match &report.solution {
        Some(sol) => vec![sol.phi(&curve, Chart::C0, origin), sol.phi(&curve, Chart::C0Prime, origin)],
        None => Vec::new(),
    };
    let input = MetricInput { lambda: echo, curve: Some(curve) };
    envelope("mfe construct", input, ConstructResult { report, phi_at_chart_origins }, code)
}

/// Pulls a closed form out of a construction report or accepts a bare one.
fn closed_form_from_json(v: &Value) -> Result<ClosedForm, Failure> {
    let candidates = [
        v.pointer("/result/report/solution/closed_form"),
        v.pointer("/solution/closed_form"),
        v.pointer("/closed_form"),
        Some(v),
    ];
    let found = candidates
        .into_iter()
        .flatten()
        .find(|c| c.get("u").is_some() && c.get("sigma").is_some())
        .ok_or_else(|| parse_fail("no closed form with `u` and `sigma` in solution file"))?;
    #[derive(serde::Deserialize)]
    struct Bare {
        u: Vec<f64>,
        sigma: Vec<f64>,
        scale: Option<f64>,
        u_rev: Option<Vec<f64>>,
    }
    let bare: Bare = serde_json::from_value(found.clone()).map_err(|e| parse_fail(format!("bad closed form: {e}")))?;
    if bare.sigma.len() < 2 {
        return Err(Error::GenusTooSmall(bare.sigma.len()).into());
    }
    let mut form = ClosedForm::new(bare.u, bare.sigma.clone(), bare.sigma.len())?;
    if let Some(scale) = bare.scale {
        form = form.with_scale(scale);
    }
    if let Some(u_rev) = bare.u_rev {
        form.u_rev = u_rev;
    }
    Ok(form)
}

#[derive(Serialize)]
struct VerifyInput {
    lambda: Option<Vec<String>>,
    solution_file: Option<String>,
    closed_form: ClosedForm,
    curve: CurveSpec,
    config: VerifyConfig,
}

fn solution_form(metric: &MetricArgs, solution: &Option<PathBuf>) -> Result<(ClosedForm, Option<Vec<String>>), Failure> {
    if let Some(path) = solution {
        let v: Value = parse_json(&read_text(path)?, "solution file")?;
        return Ok((closed_form_from_json(&v)?, None));
    }
    let (m, echo) = load_metric(metric)?;
    let report = construct_solution(&m)?;
    match report.solution {
        Some(sol) => Ok((sol.closed_form, Some(echo))),
        None => Err(Failure { code: EXIT_CONSTRUCTION, message: "no admissible root for this metric".into() }),
    }
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let (form, echo) = solution_form(&args.metric, &args.solution)?;
    let curve = load_curve(&args.curve, form.genus)?;
    let chart = match args.chart {
        ChartArg::C0 => Chart::C0,
        ChartArg::C0prime => Chart::C0Prime,
    };
    let (re, im) = args
        .center
        .split_once(',')
        .ok_or_else(|| parse_fail(format!("bad --center {:?}", args.center)))?;
    let center = Complex64::new(parse_float(re, "--center")?, parse_float(im, "--center")?);
    let mut grid = GridSpec::for_curve(&curve, chart, center, args.half_width, args.resolution)?;
    if let Some(h) = args.fd_step {
        grid.fd_step = h;
        grid.exclusion_radius = verify::default_exclusion(&curve, chart, h);
    }
    if let Some(r) = args.exclusion_radius {
        grid.exclusion_radius = r;
    }
    grid.validate()?;
    let mut cfg = VerifyConfig::standard(grid);
    cfg.convergence = !args.no_convergence;
    cfg.mass_resolution = args.mass_resolution;
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.tolerances = Tolerances { residual_rel: args.tol, mass_rel: args.mass_tol, ..Tolerances::default() };
    let report = verify::run_verification(&form, &curve, &cfg)?;
    if let Some(path) = &args.csv {
        let (_, points) = verify::mfe_residual_grid(&form, &curve, &cfg.grid)?;
        let mut file = fs::File::create(path)
            .map_err(|e| Failure { code: EXIT_PRECONDITION, message: format!("cannot write {}: {e}", path.display()) })?;
        verify::write_csv(&mut file, &points)
            .map_err(|e| Failure { code: EXIT_PRECONDITION, message: e.to_string() })?;
    }
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFICATION };
    let input = VerifyInput {
        lambda: echo,
        solution_file: args.solution.as_ref().map(|p| p.display().to_string()),
        closed_form: form,
        curve,
        config: cfg,
    };
    envelope("mfe verify", input, report, code)
}

#[derive(Serialize)]
struct MassInput {
    lambda: Vec<String>,
    curve: CurveSpec,
    #[serde(with = "float17")]
    tol: f64,
}

fn run_mass(metric: &MetricArgs, curve: &CurveArgs, resolution: usize, tol: f64) -> Result<Outcome, Failure> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure { code: EXIT_PRECONDITION, message: "--tol must be positive".into() });
    }
    let (m, echo) = load_metric(metric)?;
    let curve = load_curve(curve, m.genus())?;
    let report = construct_solution(&m)?;
    let Some(sol) = report.solution else {
        return Err(Failure { code: EXIT_CONSTRUCTION, message: "no admissible root for this metric".into() });
    };
    let mass = verify::mass_check(&sol.closed_form, &curve, resolution)?;
    let code = if mass.rel_error < tol { EXIT_OK } else { EXIT_VERIFICATION };
    envelope("mfe mass", MassInput { lambda: echo, curve, tol }, mass, code)
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Ode(c) => run_ode(c),
        Command::Pde(c) => run_pde(c),
        Command::Mfe(MfeCmd::Construct { metric, curve }) => run_construct(metric, curve),
        Command::Mfe(MfeCmd::Verify(args)) => run_verify(args),
        Command::Mfe(MfeCmd::Mass { metric, curve, resolution, tol }) => run_mass(metric, curve, *resolution, *tol),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, format!("{}\n", outcome.json)),
        None => writeln!(stdout, "{}", outcome.json),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_PRECONDITION;
    }
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("hmfe").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn json(text: &str) -> Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn solve_genus_two() {
        let (code, out, _) = call(&["ode", "solve", "--data", "1,1", "--a", "3", "--terms", "6"]);
        assert_eq!(code, 0);
        let v = json(&out);
        assert_eq!(v["result"]["coeffs"], serde_json::json!(["1/3", "1", "1", "1/3", "0", "0", "0"]));
        assert_eq!(v["result"]["residual_zero"], true);
        assert_eq!(v["input"]["a"], "3");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["ode", "solve", "--data", "1,1", "--a", "0"]).0, EXIT_PRECONDITION);
        assert_eq!(call(&["ode", "solve", "--data", "1,x", "--a", "1"]).0, EXIT_PARSE);
        assert_eq!(call(&["ode", "detect", "--data", "0"]).0, EXIT_PRECONDITION);
        assert_eq!(call(&["ode", "frobnicate"]).0, EXIT_PARSE);
        assert_eq!(call(&["mfe", "construct", "--lambda", "1,0"]).0, EXIT_PRECONDITION);
        assert_eq!(call(&["mfe", "construct", "--lambda", "1/0,1"]).0, EXIT_PARSE);
    }

    #[test]
    fn detect_reports() {
        let (_, out, _) = call(&["ode", "detect", "--data", "1,1,1"]);
        let v = json(&out);
        assert_eq!(v["result"]["status"], "polynomial_found");
        assert_eq!(v["result"]["roots"][0]["root"]["value"], "8");
        assert_eq!(v["result"]["roots"][0]["q"], serde_json::json!(["1/8", "1", "9/4", "1", "1/8"]));
        let (_, out, _) = call(&["ode", "detect", "--data", "1"]);
        assert_eq!(json(&out)["result"]["status"], "every_nonzero_a");
    }

    #[test]
    fn pde_commands() {
        let u = r#"[[0,0,"1/3"],[1,1,"1"],[2,2,"1"],[3,3,"1/3"]]"#;
        let s = r#"[[0,0,"1"],[1,1,"1"]]"#;
        let (code, out, _) = call(&["pde", "residual", "--u", u, "--sigma", s]);
        assert_eq!(code, 0);
        assert_eq!(json(&out)["result"]["is_zero"], true);
        let (_, out, _) = call(&["pde", "check-variety", "--u", u, "--sigma", r#"[[0,0,"1"]]"#]);
        assert_eq!(json(&out)["result"]["member"], false);
        assert_eq!(call(&["pde", "residual", "--u", "[[0]]", "--sigma", s]).0, EXIT_PARSE);
    }

    #[test]
    fn construct_reports_solution() {
        let (code, out, _) = call(&["mfe", "construct", "--lambda", "1,1"]);
        assert_eq!(code, 0);
        let v = json(&out);
        let sol = &v["result"]["report"]["solution"];
        assert_eq!(sol["u_exact"], serde_json::json!(["1/3", "1", "1", "1/3"]));
        assert_eq!(sol["closed_form"]["scale"].as_f64(), Some(4.0));
        assert!((v["result"]["phi_at_chart_origins"][0].as_f64().unwrap() - 768.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_sources() {
        let bare = serde_json::json!({"u": [0.5, 1.0, 1.0, 0.5], "sigma": [1.0, 1.0]});
        assert_eq!(closed_form_from_json(&bare).unwrap().u_rev, vec![0.5, 1.0, 1.0, 0.5]);
        let nested = serde_json::json!({"result": {"report": {"solution": {"closed_form": bare}}}});
        assert!(closed_form_from_json(&nested).is_ok());
        assert_eq!(closed_form_from_json(&serde_json::json!({"x": 1})).unwrap_err().code, EXIT_PARSE);
    }
}
