use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gutzmerlab::complexification::{detect_bandlimit, DetectOptions, GrowthFit, TailTest};
use gutzmerlab::euclid::{flat_gutzmer, flat_pw_check, FlatFixture, FlatQuadrature, FlatSpec};
use gutzmerlab::io::{load_grid_function, load_spectral_data, save_grid_function, save_spectral_data, sibling_spd};
use gutzmerlab::spectral::{synth_bandlimited, SpectralData};
use gutzmerlab::suites::{run_suite, CheckRow, Suite, SuiteConfig};
use gutzmerlab::Error;

/// Fourier analysis on the Heisenberg group: fixtures, identity checks and band-limit detection.
#[derive(Debug, Parser)]
#[command(name = "gutzmerlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded band-limited fixture as `<out>.gfn` plus `<out>.spd`.
    Synth {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Output grid file; the spectral data goes to the sibling `.spd`.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Samples along `t` over one period.
        #[arg(long = "t-points", default_value_t = 96)]
        t_points: usize,
        /// Keep only `λ > 0` cells.
        #[arg(long = "positive-only")]
        positive_only: bool,
    },
    /// Run a verification suite and report one row per check.
    Verify {
        /// plancherel, inversion, gutzmer, heat-image, gauss-bessel, lemma63, thm35 or euclid.
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Fixture grid file (with its `.spd` sibling) replacing the seeded fixtures.
        #[arg(short = 'i', long = "input")]
        input: Option<PathBuf>,
        /// Report path; `.json` selects JSON, anything else CSV. Defaults to CSV on stdout.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Tolerance override for every check of the suite.
        #[arg(long, value_parser = parse_positive)]
        tol: Option<f64>,
        /// Seeded fixtures to generate when no input is given.
        #[arg(long, default_value_t = 5)]
        fixtures: usize,
    },
    /// Estimate the band limits of a fixture and test its spectrum against them.
    Detect {
        /// Fixture `.gfn` (its `.spd` sibling is read) or `.spd` file.
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// JSON report path; defaults to stdout.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Nominal `A` for the tail test (requires `--B`).
        #[arg(long = "A", requires = "b")]
        a: Option<f64>,
        /// Nominal `B` for the tail test (requires `--A`).
        #[arg(long = "B", id = "b", requires = "a")]
        b: Option<f64>,
        /// Tail mass fraction tolerated outside the band.
        #[arg(long, value_parser = parse_positive, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Flat-model Gutzmer identity and Paley–Wiener growth for a bump fixture.
    Euclid {
        /// Outer radius of the Fourier support.
        #[arg(long = "A", default_value_t = 1.0, value_parser = parse_positive)]
        a: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Points per axis of the spatial grid.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Values of `|y|` for the identity rows.
        #[arg(long = "y", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        y: Vec<f64>,
        #[arg(long, value_parser = parse_positive, default_value_t = 1e-4)]
        tol: f64,
        /// CSV path; defaults to stdout.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Growth-fit JSON path; defaults to the `-o` path with extension `fit.json`.
        #[arg(long)]
        fit: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Band limit in `|λ|`.
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    /// Band limit in `(2k+n)|λ|`.
    #[arg(long = "B", default_value_t = 9.0)]
    b: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Spatial points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    /// `COUNT` or `COUNT:LMAX` for the `λ` grid.
    #[arg(long = "lambda-grid", value_parser = parse_lambda_grid)]
    lambda_grid: Option<(usize, Option<f64>)>,
}

impl FixtureArgs {
    fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            n: self.n,
            a: self.a,
            b: self.b,
            seed: self.seed,
            grid_points: self.grid,
            kmax: self.kmax,
            lambda_count: self.lambda_grid.map(|l| l.0),
            ..Default::default()
        }
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn parse_lambda_grid(s: &str) -> Result<(usize, Option<f64>), String> {
    let (count, lmax) = match s.split_once(':') {
        Some((c, l)) => (c, Some(parse_positive(l)?)),
        None => (s, None),
    };
    let count = count.parse::<usize>().map_err(|e| format!("bad node count {count:?}: {e}"))?;
    Ok((count, lmax))
}

/// Failure of a command: usage-level problems exit 2, everything else 1.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) | Error::Format(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_fixture(path: &Path) -> Result<(gutzmerlab::spectral::GridFunction, SpectralData), Failure> {
    let f = load_grid_function(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let spd = sibling_spd(path);
    let sd = load_spectral_data(&spd).map_err(|e| Failure::Usage(format!("{}: {e}", spd.display())))?;
    Ok((f, sd))
}

fn load_spectral(path: &Path) -> Result<SpectralData, Failure> {
    let spd = if path.extension().is_some_and(|e| e == "spd") { path.to_path_buf() } else { sibling_spd(path) };
    if !path.exists() {
        return Err(Failure::Usage(format!("{}: no such file", path.display())));
    }
    load_spectral_data(&spd).map_err(|e| Failure::Usage(format!("{}: {e}", spd.display())))
}

fn rows_json(suite: Suite, rows: &[CheckRow]) -> Value {
    json!({
        "suite": suite.name(),
        "pass": rows.iter().all(|r| r.pass),
        "rows": rows.iter().map(|r| json!({
            "name": r.name,
            "params": r.params,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "relerr": r.relerr,
            "tol": r.tol,
            "pass": r.pass,
        })).collect::<Vec<_>>(),
    })
}

fn fit_json(g: &GrowthFit) -> Value {
    json!({
        "ray": g.ray.name(),
        "slope": g.slope,
        "intercept": g.intercept,
        "log_power": g.log_power,
        "residual": g.residual,
        "samples": g.samples.iter().map(|s| [s.0, s.1]).collect::<Vec<_>>(),
    })
}

fn tail_json(t: &TailTest) -> Value {
    json!({
        "reference_A": t.reference_a,
        "reference_B": t.reference_b,
        "tail_fraction": t.tail_fraction,
        "passed": t.passed,
        "offending": t.offending.iter().map(|c| json!({"lambda": c.lambda, "k": c.k, "energy": c.energy})).collect::<Vec<_>>(),
    })
}

fn synth(fixture: &FixtureArgs, output: &Path, t_points: usize, positive_only: bool) -> Result<ExitCode, Failure> {
    let mut spec = fixture.suite_config().synth_spec(fixture.seed);
    spec.t_points = t_points;
    spec.positive_only = positive_only;
    spec.lambda_max = fixture.lambda_grid.and_then(|l| l.1);
    let (f, sd) = synth_bandlimited(&spec)?;
    save_grid_function(&f, output)?;
    save_spectral_data(&sd, sibling_spd(output))?;
    eprintln!("wrote {} and {}", output.display(), sibling_spd(output).display());
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: Suite, fixture: &FixtureArgs, input: Option<&Path>, output: Option<&Path>, tol: Option<f64>, fixtures: usize) -> Result<ExitCode, Failure> {
    let mut cfg = fixture.suite_config();
    cfg.tol = tol;
    cfg.fixtures = fixtures;
    if let Some(path) = input {
        cfg.input = Some(load_fixture(path)?);
    }
    let rows = run_suite(suite, &cfg)?;
    let text = if output.is_some_and(|p| p.extension().is_some_and(|e| e == "json")) {
        serde_json::to_string_pretty(&rows_json(suite, &rows)).expect("report serializes") + "\n"
    } else {
        let mut s = String::from(CheckRow::CSV_HEADER);
        s.push('\n');
        for r in &rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    };
    write_output(output, &text)?;
    Ok(if rows.iter().all(|r| r.pass) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn detect(input: &Path, output: Option<&Path>, nominal: Option<(f64, f64)>, tol: f64) -> Result<ExitCode, Failure> {
    let sd = load_spectral(input)?;
    let opts = DetectOptions { nominal, tail_tol: tol, ..Default::default() };
    let rep = detect_bandlimit(&sd, &opts)?;
    let doc = json!({
        "A_hat": rep.a_hat,
        "B_hat": rep.b_hat,
        "fits": rep.fits.iter().map(fit_json).collect::<Vec<_>>(),
        "plan_scale": rep.plan_scale,
        "converged": rep.converged,
        "tail_test": rep.tail_test.as_ref().map(tail_json),
        "verdict": rep.verdict.name(),
    });
    write_output(output, &(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn euclid(a: f64, seed: u64, grid: usize, ys: &[f64], tol: f64, output: Option<&Path>, fit: Option<&Path>) -> Result<ExitCode, Failure> {
    let mut spec = FlatSpec::bump(a, seed);
    spec.points = grid;
    let f = FlatFixture::new(spec)?.sample()?;
    let q = FlatQuadrature::default();
    let mut csv = String::from("|y|,lhs,rhs,relerr\n");
    let mut ok = true;
    for &y in ys {
        let rep = flat_gutzmer(&f, [0.6 * y, 0.8 * y], &q)?;
        ok &= rep.relerr <= tol;
        csv.push_str(&format!("{y},{:e},{:e},{:e}\n", rep.lhs, rep.rhs, rep.relerr));
    }
    let pw = flat_pw_check(&f, 10.0 / a, 40, 4)?;
    let slope_ok = pw.conclusive && pw.fit.as_ref().is_some_and(|g| (g.slope - 2.0 * a).abs() <= 0.05 * 2.0 * a);
    let doc = json!({
        "a": a,
        "a_hat": pw.a_hat,
        "y_max": pw.y_max,
        "converged": pw.converged,
        "conclusive": pw.conclusive,
        "fit": pw.fit.as_ref().map(fit_json),
    });
    let doc = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    let fit_path = fit.map(Path::to_path_buf).or_else(|| output.map(|p| p.with_extension("fit.json")));
    match fit_path {
        Some(p) => {
            write_output(output, &csv)?;
            write_output(Some(&p), &doc)?;
        }
        None => write_output(None, &(csv + "\n" + &doc))?,
    }
    Ok(if ok && slope_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("GUTZMERLAB_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::Usage(format!("GUTZMERLAB_THREADS={v:?} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Synth { fixture, output, t_points, positive_only } => synth(fixture, output, *t_points, *positive_only),
        Command::Verify { suite, fixture, input, output, tol, fixtures } => verify(*suite, fixture, input.as_deref(), output.as_deref(), *tol, *fixtures),
        Command::Detect { input, output, a, b, tol } => detect(input, output.as_deref(), a.zip(*b), *tol),
        Command::Euclid { a, seed, grid, y, tol, output, fit } => euclid(*a, *seed, *grid, y, *tol, output.as_deref(), fit.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
