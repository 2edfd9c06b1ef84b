use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use invfilt::design::{design, DesignOptions, FilterDesign, RotationMode};
use invfilt::io::{read_config, write_trace_csv, SystemConfig};
use invfilt::linalg::{eigenvalues, sort_spectrum, Complex, Matrix, ToleranceConfig};
use invfilt::sim::{run_case, CaseOptions, SimTrace};
use invfilt::sysmodel::{fault_zeros, invariant_zeros, Plant, ZeroReport};
use invfilt::{Error, ErrorClass, Result};

/// Unknown-input and fault estimation by system inversion.
#[derive(Parser)]
#[command(name = "invfilt", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Tolerance for comparing eigenvalues and classifying zeros.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Rotation search seed; overrides the seed in the config.
    #[arg(long, global = true, env = "INVFILT_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the invariant zeros and their classification.
    Zeros { config: PathBuf },
    /// Check the structural assumptions and observability.
    Check { config: PathBuf },
    /// Design the filter and print its matrices.
    Design {
        config: PathBuf,
        /// Rotation angle in radians in the first coordinate plane.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Closed-loop poles, comma separated; complex poles as `re:im`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        poles: Vec<String>,
    },
    /// Simulate the configured experiment and write the trace as CSV.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Simulation length.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run one of the four reference cases.
    Case {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        /// Directory for one CSV trace per run.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Tabulate gain and error against the rotation angle.
    SweepTheta {
        config: PathBuf,
        /// First angle in radians.
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        /// Last angle in radians.
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Number of angles.
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
}

fn tolerances(g: &Global) -> Result<ToleranceConfig> {
    let tol = ToleranceConfig {
        eig_tol: g.tol,
        ..ToleranceConfig::default()
    };
    tol.validate()?;
    Ok(tol)
}

fn fmt_complex(z: &Complex) -> String {
    if z.im.abs() < 1e-12 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn fmt_list(v: &[Complex]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_complex).collect();
    format!("[{}]", parts.join(", "))
}

fn zeros_of(plant: &Plant, tol: &ToleranceConfig) -> Result<ZeroReport> {
    match plant {
        Plant::Input(s) => invariant_zeros(s, tol),
        Plant::Fault(f) => fault_zeros(f, tol),
    }
}

fn zero_report(r: &ZeroReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "zeros: {}", fmt_list(&r.zeros));
    let _ = writeln!(out, "class: {:?}", r.classification);
    if !r.on_unit_circle.is_empty() {
        let _ = writeln!(out, "on unit circle: {}", fmt_list(&r.on_unit_circle));
    }
    let _ = writeln!(out, "zero at one: {}", r.at_one);
    out
}

fn parse_pole(s: &str) -> Result<Complex> {
    let bad = || Error::InvalidArgument(format!("bad pole `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex::new(num(re)?, num(im)?)),
        None => Ok(Complex::new(num(s)?, 0.0)),
    }
}

fn matrix_block(out: &mut String, name: &str, m: &Matrix) {
    let _ = write!(out, "{name} ({}x{}):{m}", m.nrows(), m.ncols());
}

fn design_summary(d: &FilterDesign, full: bool) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "kind: {:?}  M: {}  delay: {}  warmup: {}", d.kind, d.horizon, d.delay(), d.warmup());
    if let Some(m) = d.margin {
        let _ = writeln!(out, "pair observability margin: {m:.6e}");
    }
    if full {
        matrix_block(&mut out, "K1", &d.k1);
        matrix_block(&mut out, "A_tilde", &d.atilde);
        if let Some(r) = &d.rotation {
            matrix_block(&mut out, "rotation", r);
        }
        matrix_block(&mut out, "closed loop", &d.closed_loop);
    }
    let mut spec = eigenvalues(&d.closed_loop)?;
    sort_spectrum(&mut spec);
    let _ = writeln!(out, "closed-loop spectrum: {}", fmt_list(&spec));
    Ok(out)
}

/// Norm of the output-injection term added by pole placement.
fn gain_norm(d: &FilterDesign) -> f64 {
    d.open_loop().map_or(0.0, |op| (&d.closed_loop - op).norm())
}

fn trace_summary(t: &SimTrace) -> String {
    let conv = t.convergence_step.map_or("never".to_string(), |k| k.to_string());
    format!("samples: {}  steady error: {:.3e}  converged at k: {conv}", t.len(), t.steady_state_err)
}

fn with_strategy(cfg: &SystemConfig, g: &Global, tol: ToleranceConfig, theta: Option<f64>) -> Result<DesignOptions> {
    let mut opts = cfg.design_options(g.seed, tol)?;
    if let Some(theta) = theta {
        opts.strategy.mode = RotationMode::PlaneAngle { i: 0, j: 1, theta };
    }
    Ok(opts)
}

fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    match &cli.command {
        Command::Zeros { config } => {
            let plant = read_config(config)?.to_plant()?;
            Ok(zero_report(&zeros_of(&plant, &tol)?))
        }
        Command::Check { config } => {
            let plant = read_config(config)?.to_plant()?;
            let report = plant.validate(&tol);
            let mut out = String::new();
            let _ = writeln!(
                out,
                "states: {}  inputs: {}  outputs: {}  faults: {}",
                report.states,
                report.inputs,
                report.outputs,
                report.faults.map_or("-".into(), |f| f.to_string())
            );
            let _ = writeln!(out, "observability rank: {} of {}", report.observability_rank, report.states);
            let _ = writeln!(out, "B full column rank: {}  D full column rank: {}", report.b_full_rank, report.d_full_rank);
            if let (Some(l), Some(e)) = (report.l_full_rank, report.e_full_rank) {
                let _ = writeln!(out, "L full column rank: {l}  E full column rank: {e}");
            }
            out.push_str(&zero_report(&zeros_of(&plant, &tol)?));
            for v in &report.violations {
                let _ = writeln!(out, "violation: {v}");
            }
            if !report.is_valid() {
                print!("{out}");
                report.into_result()?;
            }
            let _ = writeln!(out, "assumptions hold");
            Ok(out)
        }
        Command::Design { config, theta, poles } => {
            let cfg = read_config(config)?;
            let mut opts = with_strategy(&cfg, g, tol, *theta)?;
            if !poles.is_empty() {
                opts.poles = Some(poles.iter().map(|p| parse_pole(p)).collect::<Result<_>>()?);
            }
            let d = design(&cfg.to_plant()?, &opts)?;
            design_summary(&d, true)
        }
        Command::Simulate { config, out, steps } => {
            let cfg = read_config(config)?;
            let opts = cfg.design_options(g.seed, tol)?;
            let (d, trace) = cfg.run(&opts, *steps)?;
            write_trace_csv(&trace, out)?;
            Ok(format!("{}{}\nwrote {}\n", design_summary(&d, false)?, trace_summary(&trace), out.display()))
        }
        Command::Case { id, out_dir, steps } => {
            let opts = CaseOptions {
                steps: *steps,
                seed: g.seed,
                signals: None,
                tol,
            };
            let result = run_case(*id, &opts)?;
            let mut out = format!("case {id}\n{}", zero_report(&result.zeros));
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir)?;
            }
            for r in &result.runs {
                let _ = write!(out, "run {}\n{}{}\n", r.label, design_summary(&r.design, false)?, trace_summary(&r.trace));
                if let Some(dir) = out_dir {
                    let path = case_path(dir, *id, &r.label);
                    write_trace_csv(&r.trace, &path)?;
                    let _ = writeln!(out, "wrote {}", path.display());
                }
            }
            Ok(out)
        }
        Command::SweepTheta { config, from, to, steps } => {
            if *steps == 0 || !from.is_finite() || !to.is_finite() {
                return Err(Error::InvalidArgument("sweep needs finite bounds and at least one angle".into()));
            }
            let cfg = read_config(config)?;
            let mut out = String::from("theta_rad,theta_deg,margin,gain_norm,steady_err,converged_k\n");
            for i in 0..*steps {
                let theta = if *steps == 1 { *from } else { from + (to - from) * i as f64 / (*steps - 1) as f64 };
                let opts = with_strategy(&cfg, g, tol, Some(theta))?;
                let row = match cfg.run(&opts, None) {
                    Ok((d, t)) => format!(
                        "{:.6e},{:.6e},{:.3e},{}",
                        d.margin.unwrap_or(f64::NAN),
                        gain_norm(&d),
                        t.steady_state_err,
                        t.convergence_step.map_or("-".into(), |k| k.to_string())
                    ),
                    Err(e) if e.class() == ErrorClass::Design => {
                        eprintln!("theta = {theta}: {e}");
                        "-,-,-,-".to_string()
                    }
                    Err(e) => return Err(e),
                };
                let _ = writeln!(out, "{theta:.6},{:.3},{row}", theta.to_degrees());
            }
            Ok(out)
        }
    }
}

fn case_path(dir: &Path, id: u8, label: &str) -> PathBuf {
    let clean: String = label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    dir.join(format!("case{id}_{clean}.csv"))
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Parse => 2,
        ErrorClass::Design => 3,
        ErrorClass::Runtime => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
