use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsp_nlfa::formats::{format_f64, PhaseFile, SignalFile};
use qsp_nlfa::inverse::strip_with_diagnostics;
use qsp_nlfa::nlfs::{nlfs_finite, plancherel_finite};
use qsp_nlfa::pipeline::{convergence_profile, max_degree_for, phase_log_mass, plancherel_check};
use qsp_nlfa::qsp::{correspondence_check, qsp_unitary, response_sweep};
use qsp_nlfa::{synthesize, CircleGrid, CoeffSequence, Error, INV_SQRT_2};

const DEFAULT_GRID: usize = 4096;
const VERIFY_TOL: f64 = 1e-8;
const ROUNDTRIP_TOL: f64 = 1e-9;
/// Plancherel gap above which `roundtrip` warns that `a` looks non-outer.
const NON_OUTER_GAP: f64 = 1e-8;
/// Nodes in `theta` over `[0, pi/2]` used by `verify`.
const VERIFY_NODES: usize = 257;

#[derive(Parser)]
#[command(name = "qsp-phases", version, about = "QSP phase factors via nonlinear Fourier analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute phases for a signal file.
    Synth(SynthArgs),
    /// Evaluate Im u_d(x) for a phase file as CSV.
    Eval(EvalArgs),
    /// Check a phase file (and optionally a signal) for consistency.
    Verify(VerifyArgs),
    /// Random one-sided sequence, forward series, layer stripping, compare.
    Roundtrip(RoundtripArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// JSON file with `samples` or `chebyshev`
    signal: PathBuf,
    /// Signal margin: sup |f| <= 2^(-1/2) - epsilon
    #[arg(long)]
    epsilon: Option<f64>,
    /// Grid size N (power of two)
    #[arg(long, env = "QSP_GRID")]
    grid: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Largest degree to strip, at most N/4 (default N/4)
    #[arg(long)]
    dmax: Option<usize>,
    /// Output phase file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    phases: PathBuf,
    /// Comma-separated abscissae in [0, 1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "grid")]
    x: Option<Vec<f64>>,
    /// Evaluate at x_j = cos(pi j / N) for j = 0..=N/2 (default: the file's grid)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    phases: PathBuf,
    /// Signal to compare the response against
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Residual limit for the signal check (default: the file's residual)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long, default_value_t = 50)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound on |F_n|
    #[arg(long, default_value_t = 0.2)]
    norm_cap: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

enum Failure {
    Input(String),
    NotConverged(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NotConverged(_) => 2,
            Failure::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NotConverged(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::TailNotDecaying { .. } | Error::ContractionBroken { .. } => {
                Failure::NotConverged(e.to_string())
            }
            Error::SignalTooLarge { .. } => Failure::Input(format!(
                "{e}; admissible signals satisfy sup |f| < 2^(-1/2) = {INV_SQRT_2:.8}"
            )),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(args: &SynthArgs) -> Outcome {
    let file = SignalFile::parse(&read(&args.signal)?)?;
    let size = file.grid_size(args.grid, DEFAULT_GRID)?;
    let grid = CircleGrid::new(size)?;
    let signal = file.to_samples(&grid, args.epsilon)?;
    let d_max = args.dmax.unwrap_or_else(|| max_degree_for(size));
    let report = synthesize(&signal, args.tol, d_max)?;
    write_or_print(args.out.as_deref(), &PhaseFile::from_report(&report).to_json())?;
    eprintln!(
        "degree {}, residual {:e}, plancherel gap {:e}",
        report.degree,
        report.hs_residual,
        report.plancherel_gap()
    );
    if report.not_converged {
        return Err(Failure::NotConverged(format!(
            "residual {:e} above tol {:e} at d_max = {d_max}; try a finer grid",
            report.hs_residual, args.tol
        )));
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Outcome {
    let file = PhaseFile::parse(&read(&args.phases)?)?;
    let degree = args.degree.unwrap_or(file.degree());
    if degree > file.degree() {
        return Err(Error::DegreeOutOfRange {
            degree,
            available: file.phases.len(),
        }
        .into());
    }
    let xs: Vec<f64> = match &args.x {
        Some(xs) => xs.clone(),
        None => {
            let grid = CircleGrid::new(args.grid.unwrap_or(file.grid))?;
            (0..=grid.size() / 2).map(|j| grid.abscissa(j)).collect()
        }
    };
    if let Some(bad) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Failure::Input(format!("x = {bad} is outside [0, 1]")));
    }
    let mut out = String::from("x,response\n");
    for x in xs {
        let r = response_sweep(&file.phases, degree, x)[degree];
        out.push_str(&format!("{},{}\n", format_f64(x), format_f64(r)));
    }
    print!("{out}");
    Ok(())
}

fn check(name: &str, value: f64, limit: f64) -> bool {
    let pass = value <= limit;
    println!(
        "{name}: {} (measured {value:.3e}, limit {limit:.1e})",
        if pass { "pass" } else { "FAIL" }
    );
    pass
}

fn verify(args: &VerifyArgs) -> Outcome {
    let file = PhaseFile::parse(&read(&args.phases)?)?;
    let psi = &file.phases;
    let d = file.degree();
    let mut unitarity = 0.0f64;
    let mut correspondence = 0.0f64;
    for k in 0..VERIFY_NODES {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (VERIFY_NODES - 1) as f64;
        let x = theta.cos().clamp(0.0, 1.0);
        unitarity = unitarity.max(qsp_unitary(psi, d, x)?.unitarity_defect());
        correspondence = correspondence.max(correspondence_check(psi, d, x)?);
    }
    let mut pass = check("unitarity", unitarity, VERIFY_TOL);
    pass &= check("correspondence", correspondence, VERIFY_TOL);
    let lhs = phase_log_mass(psi);
    pass &= check("plancherel", (lhs - file.plancherel_rhs).abs(), VERIFY_TOL);

    if let Some(path) = &args.signal {
        let signal_file = SignalFile::parse(&read(path)?)?;
        let grid = CircleGrid::new(signal_file.grid_size(None, file.grid)?)?;
        let signal = signal_file.to_samples(&grid, None)?;
        let (lhs, rhs) = plancherel_check(psi, &signal);
        pass &= check("plancherel vs signal", (lhs - rhs).abs(), VERIFY_TOL);
        let residual = convergence_profile(psi, &signal, &[d])[0];
        let limit = args.tol.unwrap_or(file.residual * (1.0 + 1e-6) + 1e-12);
        pass &= check("signal residual", residual, limit);
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify("verification failed".into()))
    }
}

fn roundtrip(args: &RoundtripArgs) -> Outcome {
    if !(args.norm_cap >= 0.0 && args.norm_cap.is_finite()) {
        return Err(Failure::Input(format!("norm cap {} must be finite and >= 0", args.norm_cap)));
    }
    if args.width == 0 {
        println!("max recovery error: 0 (width 0)");
        return Ok(());
    }
    let grid = CircleGrid::new(args.grid)?;
    if 4 * args.width > grid.size() {
        return Err(Error::GridTooCoarse {
            grid: grid.size(),
            bandwidth: args.width,
        }
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let f = CoeffSequence::from_fn(0, args.width as i64 - 1, |_| {
        let r = args.norm_cap * rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    });
    let pair = nlfs_finite(&f, &grid)?;
    let (lhs, rhs) = plancherel_finite(&f, &grid)?;
    let gap = (lhs - rhs).abs();
    if !(gap <= NON_OUTER_GAP) {
        eprintln!("warning: NonOuter: Plancherel gap {gap:.3e} (sum {lhs:.6e}, integral {rhs:.6e})");
    }
    let error = match strip_with_diagnostics(&pair, args.width, 0.0) {
        Ok(outcome) => outcome.coeffs.sub(&f).sup_norm(),
        Err(e) => {
            return Err(Failure::Verify(format!("layer stripping failed: {e}")));
        }
    };
    println!("max recovery error: {error:.3e}");
    if error <= ROUNDTRIP_TOL {
        Ok(())
    } else {
        Err(Failure::Verify(format!("error {error:.3e} exceeds {ROUNDTRIP_TOL:e}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Verify(a) => verify(a),
        Command::Roundtrip(a) => roundtrip(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
