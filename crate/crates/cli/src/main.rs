//! `qgres`: resonances of open quantum graphs from the command line.
//!
//! Exit status: 0 on success or a true verdict, 1 on a false verdict or a
//! failed computation, 2 on usage and input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qgres::bounds::{gaussian_params, strip_depth, verify_lower_bound};
use qgres::bs::{convergence_experiment, lambda_samples_csv};
use qgres::finder::{locate_resonances, FinderOptions, Rectangle};
use qgres::generate::{generate, Family, FamilySpec, LeadPattern, LengthRule};
use qgres::graph::{validate, GraphClassParams, QuantumGraph};
use qgres::io::{fmt17, parse_graph, serialize_graph};
use qgres::trace::{integrand_samples_csv, trace_check, weyl_fit, GaussianTest};
use qgres::Error;

#[derive(Parser, Debug)]
#[command(name = "qgres", version, about = "Scattering resonances of open quantum graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a graph against a class and for unbalanced vertices.
    Validate(ValidateArgs),
    /// Locate resonances in a rectangle.
    Resonances(ResonancesArgs),
    /// Compare both sides of the trace identity for a Gaussian.
    TraceCheck(TraceArgs),
    /// Fit the counting function N(R) against R.
    Weyl(WeylArgs),
    /// Certify the resonance lower bound in a vertical strip.
    LowerBound(LowerBoundArgs),
    /// Spectral pairings along a growing family of graphs.
    Bs(BsArgs),
    /// Write a graph from a built-in family.
    Generate(GenerateArgs),
}

/// Class parameters. Either all four or none.
#[derive(Args, Debug, Clone)]
struct ClassArgs {
    /// Maximal internal degree D.
    #[arg(long = "D")]
    d: Option<usize>,
    /// Maximal number of leads per vertex.
    #[arg(long)]
    n0: Option<u32>,
    /// Minimal edge length.
    #[arg(long)]
    lmin: Option<f64>,
    /// Maximal edge length.
    #[arg(long)]
    lmax: Option<f64>,
}

impl ClassArgs {
    fn explicit(&self) -> Result<Option<GraphClassParams<f64>>, Error> {
        match (self.d, self.n0, self.lmin, self.lmax) {
            (Some(d), Some(n0), Some(lo), Some(hi)) => Ok(Some(GraphClassParams::new(d, n0, lo, hi)?)),
            (None, None, None, None) => Ok(None),
            _ => Err(Error::Parameter("--D, --n0, --lmin and --lmax must be given together".into())),
        }
    }

    /// Explicit class, or the tightest class containing the graph.
    fn or_tightest(&self, graph: &QuantumGraph<f64>) -> Result<GraphClassParams<f64>, Error> {
        match self.explicit()? {
            Some(p) => Ok(p),
            None => GraphClassParams::tightest(graph),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    input: PathBuf,
    #[command(flatten)]
    class: ClassArgs,
    /// Also require n(v) != d(v) at every vertex.
    #[arg(long)]
    unbalanced: bool,
}

#[derive(Args, Debug)]
struct ResonancesArgs {
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    xmax: f64,
    /// Defaults to Y - 0.1 for the class.
    #[arg(long, allow_hyphen_values = true)]
    ymin: Option<f64>,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    ymax: f64,
    /// Absolute localization tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    class: ClassArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct TraceArgs {
    input: PathBuf,
    /// Gaussian width parameter; defaults to ln2 / (2 y2 - Y)^2.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    /// Height of the Gaussian centre; defaults to Y / 2.
    #[arg(long, allow_hyphen_values = true)]
    y_anchor: Option<f64>,
    /// Lower line; defaults to Y - ln16 / Lmin.
    #[arg(long, allow_hyphen_values = true)]
    y1: Option<f64>,
    /// Upper line; defaults to ln32 / Lmin.
    #[arg(long, allow_hyphen_values = true)]
    y2: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    class: ClassArgs,
    /// CSV of integrand samples `x,re,im` on the upper line.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    samples: usize,
}

#[derive(Args, Debug)]
struct WeylArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    rmin: f64,
    #[arg(long, default_value_t = 100.0)]
    rmax: f64,
    #[arg(long, default_value_t = 1.0)]
    rstep: f64,
    /// Accepted relative deviation of the slope from 2 L_Q / pi.
    #[arg(long, default_value_t = 0.02)]
    rel_tol: f64,
    /// CSV `r,count`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LowerBoundArgs {
    input: PathBuf,
    #[command(flatten)]
    class: ClassArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Print the certificate as a JSON object.
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Interval,
    Cycle,
    Path,
    Regular,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Degree of random regular graphs.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Leads on every vertex (interior vertices of paths).
    #[arg(long, default_value_t = 1)]
    leads: u32,
    /// Leads on the two end vertices of paths and intervals.
    #[arg(long)]
    ends: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    lmin: f64,
    /// Upper end of uniform lengths; equal to --lmin for constant lengths.
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FamilyArgs {
    fn spec(&self, size: usize) -> FamilySpec<f64> {
        let family = match self.family {
            FamilyArg::Interval => Family::IntervalWithLeads,
            FamilyArg::Cycle => Family::CycleWithLeads,
            FamilyArg::Path => Family::PathWithLeads,
            FamilyArg::Regular => Family::RandomRegularWithLeads { degree: self.degree },
        };
        let leads = match self.ends {
            Some(ends) => LeadPattern::EndsInterior { ends, interior: self.leads },
            None => LeadPattern::Constant(self.leads),
        };
        let lengths = match self.lmax {
            Some(hi) if hi != self.lmin => LengthRule::Uniform { lo: self.lmin, hi },
            _ => LengthRule::Constant(self.lmin),
        };
        FamilySpec::new(family, size, leads, lengths).seed(self.seed)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    x0: f64,
    /// Height of the Gaussian centre; defaults to Y / 2 of the first size.
    #[arg(long, allow_hyphen_values = true)]
    y_anchor: Option<f64>,
    /// Lower line; defaults to Y - 0.1.
    #[arg(long, allow_hyphen_values = true)]
    y1: Option<f64>,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    y2: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Final difference required for convergence.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    /// CSV `size,re_pairing,im_pairing,abs_diff_prev`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV `x,y,re,im` of the bond-averaged entries on the largest graph.
    #[arg(long)]
    lambda_out: Option<PathBuf>,
}

/// Failure category mapped to the exit status.
enum Failure {
    Verdict,
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Parameter(_) | Error::Domain(_) | Error::Structural(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_graph(path: &Path) -> Result<QuantumGraph<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_kv(kv: &[(&str, String)]) {
    for (k, v) in kv {
        println!("{k}={v}");
    }
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn run_validate(args: &ValidateArgs) -> Outcome {
    let graph = read_graph(&args.input)?;
    let params = args.class.or_tightest(&graph)?;
    let report = validate(&graph, &params, args.unbalanced);
    println!("in_class={}", report.in_class);
    println!("unbalanced={}", report.unbalanced);
    for v in &report.violations {
        println!("violation={v}");
    }
    verdict(report.passed())
}

fn run_resonances(args: &ResonancesArgs) -> Outcome {
    let graph = read_graph(&args.input)?;
    let params = args.class.or_tightest(&graph)?;
    let ymin = args.ymin.unwrap_or(strip_depth(&params) - 0.1);
    let rect = Rectangle::new(args.xmin, args.xmax, ymin, args.ymax)?;
    let opts = FinderOptions::default().with_tol(args.tol);
    let set = locate_resonances(&graph, &rect, &opts)?;
    let csv = set.to_csv();
    if let Some(out) = &args.out {
        write_out(out, &csv)?;
    }
    match args.format {
        Format::Csv if args.out.is_none() => print!("{csv}"),
        _ => {
            println!("count={}", set.entries.len());
            println!("total_multiplicity={}", set.total);
            for e in &set.entries {
                println!("{} {} {}", fmt17(e.z.re), fmt17(e.z.im), e.multiplicity);
            }
        }
    }
    Ok(())
}

fn run_trace(args: &TraceArgs) -> Outcome {
    let graph = read_graph(&args.input)?;
    let params = args.class.or_tightest(&graph)?;
    let gp = gaussian_params(&params);
    let y = strip_depth(&params);
    let y1 = args.y1.unwrap_or(gp.y1);
    let y2 = args.y2.unwrap_or(gp.y2);
    let g = GaussianTest::new(args.a.unwrap_or(gp.a), args.x0, args.y_anchor.unwrap_or(y / 2.0))?;
    let report = trace_check(&graph, &g, y1, y2, args.tol, &FinderOptions::default())?;
    print_kv(&report.to_key_values());
    if let Some(out) = &args.samples_out {
        let n = args.samples.max(2);
        let t = report.half_width;
        let xs: Vec<f64> = (0..n).map(|k| args.x0 - t + 2.0 * t * k as f64 / (n - 1) as f64).collect();
        write_out(out, &integrand_samples_csv(&graph, &g, y2, &xs))?;
    }
    verdict(report.pass)
}

fn run_weyl(args: &WeylArgs) -> Outcome {
    let graph = read_graph(&args.input)?;
    if !(args.rstep > 0.0 && args.rmin > 0.0 && args.rmin < args.rmax) {
        return Err(Failure::Usage("need 0 < rmin < rmax and rstep > 0".into()));
    }
    let steps = ((args.rmax - args.rmin) / args.rstep).floor() as usize;
    let mut rs: Vec<f64> = (0..=steps).map(|k| args.rmin + args.rstep * k as f64).collect();
    if rs.last().is_some_and(|&r| r < args.rmax - 1e-12) {
        rs.push(args.rmax);
    }
    let fit = weyl_fit(&graph, &rs, &Default::default())?;
    let expected = 2.0 * graph.total_length() / std::f64::consts::PI;
    let rel = (fit.slope - expected).abs() / expected;
    print_kv(&[
        ("slope", fmt17(fit.slope)),
        ("expected_slope", fmt17(expected)),
        ("relative_error", fmt17(rel)),
        ("intercept", fmt17(fit.intercept)),
        ("intercept_band", fmt17(fit.intercept_band)),
        ("samples", fit.samples.len().to_string()),
        ("pass", (rel <= args.rel_tol).to_string()),
    ]);
    if let Some(out) = &args.out {
        let mut csv = String::from("r,count\n");
        for (r, c) in &fit.samples {
            csv.push_str(&format!("{},{c}\n", fmt17(*r)));
        }
        write_out(out, &csv)?;
    }
    verdict(rel <= args.rel_tol)
}

fn json_value(v: &str) -> serde_json::Value {
    if let Ok(b) = v.parse::<bool>() {
        return b.into();
    }
    if let Ok(i) = v.parse::<i64>() {
        return i.into();
    }
    match v.parse::<f64>() {
        Ok(x) => serde_json::Number::from_f64(x).map_or_else(|| v.into(), serde_json::Value::Number),
        Err(_) => v.into(),
    }
}

fn run_lower_bound(args: &LowerBoundArgs) -> Outcome {
    let graph = read_graph(&args.input)?;
    let Some(params) = args.class.explicit()? else {
        return Err(Failure::Usage("lower-bound needs --D, --n0, --lmin and --lmax".into()));
    };
    let opts = FinderOptions::default().with_tol(args.tol);
    let cert = verify_lower_bound(&graph, &params, args.x0, &opts)?;
    let kv = cert.to_key_values();
    if args.json {
        let map: serde_json::Map<String, serde_json::Value> =
            kv.iter().map(|(k, v)| (k.to_string(), json_value(v))).collect();
        println!("{}", serde_json::Value::Object(map));
    } else {
        print_kv(&kv);
    }
    verdict(cert.verdict)
}

fn run_bs(args: &BsArgs) -> Outcome {
    if args.sizes.is_empty() {
        return Err(Failure::Usage("--sizes is empty".into()));
    }
    let spec = args.family.spec(args.sizes[0]);
    let params = spec.class_params()?;
    let y = strip_depth(&params);
    let g = GaussianTest::new(args.a, args.x0, args.y_anchor.unwrap_or(y / 2.0))?;
    let y1 = args.y1.unwrap_or(y - 0.1);
    let table = convergence_experiment(&spec, &args.sizes, &g, y1, args.y2, args.tol, args.threshold);
    let csv = table.to_csv();
    match &args.out {
        Some(out) => write_out(out, &csv)?,
        None => print!("{csv}"),
    }
    for row in &table.rows {
        if let Some(e) = &row.error {
            eprintln!("size {}: {e}", row.size);
        }
    }
    println!("converged={}", table.converged);
    if let Some(out) = &args.lambda_out {
        let largest = generate(&args.family.spec(*args.sizes.iter().max().unwrap()))?;
        let points: Vec<(f64, f64)> = [y1, args.y2]
            .iter()
            .flat_map(|&yy| (0..=200).map(move |k| (args.x0 - 10.0 + 0.1 * k as f64, yy)))
            .collect();
        write_out(out, &lambda_samples_csv(&largest, &points)?)?;
    }
    verdict(table.converged)
}

fn run_generate(args: &GenerateArgs) -> Outcome {
    let graph = generate(&args.family.spec(args.size))?;
    let text = serialize_graph(&graph);
    match &args.out {
        Some(out) => write_out(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(a) => run_validate(a),
        Command::Resonances(a) => run_resonances(a),
        Command::TraceCheck(a) => run_trace(a),
        Command::Weyl(a) => run_weyl(a),
        Command::LowerBound(a) => run_lower_bound(a),
        Command::Bs(a) => run_bs(a),
        Command::Generate(a) => run_generate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
