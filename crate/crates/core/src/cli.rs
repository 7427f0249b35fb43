//! The `cic` command-line surface. Every command prints one JSON envelope
//! `{"status", "payload", "diagnostics"}`; the exit code is non-zero only for
//! status `error`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::cones::{
    self, matrix_convex_combine, maximality_witness_with_tol, membership_l_h_with_tol,
    membership_l_i_with_tol, nm_matrix_convex_combine, structured_isometry, CombineMode,
};
use crate::error::{Error, Result};
use crate::incsim::{self, SwitchedSystem, SwitchingPolicy};
use crate::json;
use crate::matcore::sign_matrix_with_tol;
use crate::matrix::ComplexMatrix;
use crate::ratfun::{self, PrGrid, RationalMatrixFunction};
use crate::realize::{self, KypSearch, KypSearchOutcome, RealizationArray, RealizationOp};
use crate::DEFAULT_TOL;

#[derive(Debug, Parser)]
#[command(
    name = "cic",
    version,
    about = "Matrix-convex cones, positive-real functions and KYP tools"
)]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for every classification.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lyapunov-cone membership, witnesses and matrix-convex combinations.
    #[command(subcommand)]
    Cone(ConeCommand),
    /// Sign matrix of a matrix without imaginary-axis eigenvalues.
    Sign {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Positive-real checks and cone-generated rational functions.
    #[command(subcommand)]
    Pr(PrCommand),
    /// Realization arrays.
    #[command(subcommand)]
    Real(RealCommand),
    /// Switched-system simulation.
    #[command(subcommand)]
    Sim(SimCommand),
}

#[derive(Debug, Subcommand)]
pub enum ConeCommand {
    /// Membership in L_H (or L_I when no H is given).
    Check {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "H")]
        h: Option<PathBuf>,
    },
    /// Member A of L_I with A + B singular.
    Witness {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Y* diag(F_1, ..., F_k) Y, optionally with the interleaved (n, m) structure.
    Combine {
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        isometry: PathBuf,
        /// State and port sizes `n,m`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        structured: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Isometry)]
        mode: ModeArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Isometry,
    FullRankCone,
}

impl From<ModeArg> for CombineMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Isometry => CombineMode::Isometry,
            ModeArg::FullRankCone => CombineMode::FullRankCone,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum PrCommand {
    /// Sampling-based positive-real check.
    Check {
        #[arg(long)]
        function: PathBuf,
        /// JSON grid specification.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Random cone expressions over 1/s and 1, each checked for positive realness.
    CicSample {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Matrix size the generators are lifted to.
        #[arg(long, default_value_t = 1)]
        size: usize,
    },
    /// Driving-point impedance of a reference circuit.
    Circuit {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Two-loop feedback network of four blocks.
    Network {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
        blocks: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RealCommand {
    /// Transfer function value C (sI - A)^{-1} B + D.
    Eval {
        #[arg(long)]
        realization: PathBuf,
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Cone operation on matrix views.
    Op {
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        /// Scale factor for `--op scale`.
        #[arg(long)]
        factor: Option<f64>,
    },
    /// KYP certificate check for a given H, or a search for one.
    Kyp {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long = "H", conflicts_with = "search")]
        h: Option<PathBuf>,
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Gramian balancing.
    Balance {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, value_enum)]
        via: Option<ViaArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OpArg {
    Scale,
    Sum,
    Invert,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ViaArg {
    SignIteration,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Simulate and verify the exponential envelope.
    Run(SimRun),
}

#[derive(Debug, Args)]
pub struct SimRun {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
    pub policy: PolicyArg,
    /// JSON vector file or comma-separated reals.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub dt: f64,
    /// Dwell time; defaults to dt for greedy and 10 dt otherwise.
    #[arg(long)]
    pub dwell: Option<f64>,
    /// Index cycle for the fixed policy.
    #[arg(long, value_delimiter = ',')]
    pub sequence: Vec<usize>,
    /// Trajectory CSV destination.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Fixed,
    Random,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Refuted,
    Infeasible,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub status: Status,
    pub payload: serde_json::Value,
    pub diagnostics: Vec<String>,
}

impl CommandResult {
    fn new<T: Serialize>(status: Status, payload: &T) -> Result<Self> {
        Ok(Self {
            status,
            payload: to_value(payload)?,
            diagnostics: Vec::new(),
        })
    }

    fn error(message: String) -> Self {
        Self {
            status: Status::Error,
            payload: serde_json::json!({ "message": message }),
            diagnostics: Vec::new(),
        }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.diagnostics.push(line.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.status == Status::Error {
            1
        } else {
            0
        }
    }
}

// round trip through our formatter so payload floats keep 17 digits
fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&json::to_string(v)?)?)
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    json::read_file(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidArgument(format!("{}: {io}", path.display())),
        Error::Json(js) => Error::InvalidArgument(format!("{}: {js}", path.display())),
        other => other,
    })
}

fn verdict_status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Refuted
    }
}

fn parse_complex(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Error::InvalidArgument(format!(
            "expected `re` or `re,im`, got {text:?}"
        ))),
    }
}

fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    let path = Path::new(text);
    if path.is_file() {
        let value: serde_json::Value = load(path)?;
        return match value {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|v| match v {
                    serde_json::Value::Array(_) => {
                        let [re, im]: [f64; 2] = serde_json::from_value(v)?;
                        Ok(Complex64::new(re, im))
                    }
                    other => Ok(Complex64::new(serde_json::from_value(other)?, 0.0)),
                })
                .collect(),
            other => {
                let m: ComplexMatrix = serde_json::from_value(other)?;
                Ok(m.iter().copied().collect())
            }
        };
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map(|x| Complex64::new(x, 0.0))
                .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
        })
        .collect()
}

pub fn run(cli: &Cli) -> Result<CommandResult> {
    let tol = cli.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    match &cli.command {
        Command::Cone(cmd) => run_cone(cmd, tol),
        Command::Sign { matrix } => {
            let a: ComplexMatrix = load(matrix)?;
            let (e, method) = sign_matrix_with_tol(&a, tol)?;
            Ok(CommandResult::new(Status::Ok, &e)?.note(format!("method: {}", to_value(&method)?)))
        }
        Command::Pr(cmd) => run_pr(cmd, cli.seed, tol),
        Command::Real(cmd) => run_real(cmd, tol),
        Command::Sim(SimCommand::Run(args)) => run_sim(args, cli.seed, tol),
    }
}

fn run_cone(cmd: &ConeCommand, tol: f64) -> Result<CommandResult> {
    match cmd {
        ConeCommand::Check { matrix, h } => {
            let a: ComplexMatrix = load(matrix)?;
            let m = match h {
                Some(h) => membership_l_h_with_tol(&a, &load(h)?, tol)?,
                None => membership_l_i_with_tol(&a, tol)?,
            };
            Ok(CommandResult::new(verdict_status(m.in_closed), &m)?)
        }
        ConeCommand::Witness { matrix } => {
            let b: ComplexMatrix = load(matrix)?;
            match maximality_witness_with_tol(&b, tol) {
                Ok(w) => CommandResult::new(Status::Ok, &w),
                Err(Error::NoWitness(msg)) => Ok(CommandResult::new(
                    Status::Refuted,
                    &serde_json::json!({ "reason": msg }),
                )?),
                Err(e) => Err(e),
            }
        }
        ConeCommand::Combine {
            inputs,
            isometry,
            structured,
            mode,
        } => {
            let mats = inputs
                .iter()
                .map(|p| load::<ComplexMatrix>(p))
                .collect::<Result<Vec<_>>>()?;
            let y: ComplexMatrix = load(isometry)?;
            let out = match structured.as_deref() {
                None => matrix_convex_combine(&mats, &y, (*mode).into())?,
                Some(&[n, m]) => {
                    let ups = structured_from_assembled(&y, mats.len(), n, m, (*mode).into())?;
                    nm_matrix_convex_combine(&mats, &ups)?
                }
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "--structured takes `n,m`, got {other:?}"
                    )));
                }
            };
            CommandResult::new(Status::Ok, &out)
        }
    }
}

/// Recovers the per-slot blocks of an interleaved structured isometry.
fn structured_from_assembled(
    y: &ComplexMatrix,
    k: usize,
    n: usize,
    m: usize,
    mode: CombineMode,
) -> Result<cones::StructuredIsometry> {
    let size = n + m;
    if y.shape() != (k * size, size) {
        return Err(Error::Shape(format!(
            "structured isometry must be {}x{size}, got {:?}",
            k * size,
            y.shape()
        )));
    }
    let mut blocks_n = Vec::with_capacity(k);
    let mut blocks_m = Vec::with_capacity(k);
    for j in 0..k {
        let slot = y.block(j * size, 0, size, size);
        let off = slot
            .block(0, n, n, m)
            .norm2()
            .max(slot.block(n, 0, m, n).norm2());
        if off > DEFAULT_TOL * slot.norm2().max(1.0) {
            return Err(Error::Shape(format!(
                "slot {j} mixes state and port coordinates"
            )));
        }
        blocks_n.push(slot.block(0, 0, n, n));
        blocks_m.push(slot.block(n, n, m, m));
    }
    structured_isometry(blocks_n, blocks_m, mode)
}

fn run_pr(cmd: &PrCommand, seed: u64, tol: f64) -> Result<CommandResult> {
    match cmd {
        PrCommand::Check { function, grid } => {
            let f: RationalMatrixFunction = load(function)?;
            let grid = match grid {
                Some(p) => load(p)?,
                None => PrGrid {
                    tol: tol.max(PrGrid::default().tol),
                    ..PrGrid::default()
                },
            };
            let v = ratfun::pr_check(&f, &grid);
            Ok(CommandResult::new(verdict_status(v.is_pr), &v)?)
        }
        PrCommand::CicSample { depth, count, size } => {
            #[derive(Serialize)]
            struct Sample {
                seed: u64,
                depth: usize,
                is_pr: bool,
                failures: Vec<ratfun::PrFailure>,
                expression: ratfun::CicExpression,
            }
            let grid = PrGrid::default();
            let mut samples = Vec::with_capacity(*count);
            for k in 0..*count as u64 {
                let s = seed.wrapping_add(k);
                let expr = ratfun::cic_sample(*depth, s, *size)?;
                let v = ratfun::pr_check(&ratfun::cic_eval(&expr)?, &grid);
                samples.push(Sample {
                    seed: s,
                    depth: expr.root.depth(),
                    is_pr: v.is_pr,
                    failures: v.failures,
                    expression: expr,
                });
            }
            let passed = samples.iter().filter(|s| s.is_pr).count();
            let all = passed == samples.len();
            Ok(CommandResult::new(
                verdict_status(all),
                &serde_json::json!({
                    "count": samples.len(),
                    "passed": passed,
                    "samples": to_value(&samples)?,
                }),
            )?
            .note(format!("{passed}/{} samples positive real", samples.len())))
        }
        PrCommand::Circuit { spec } => {
            let spec: ratfun::CircuitSpec = load(spec)?;
            let z = ratfun::ladder_impedance(&spec)?;
            let v = ratfun::pr_check(&z, &PrGrid::default());
            Ok(CommandResult::new(verdict_status(v.is_pr), &z)?
                .note(format!("positive real: {}", v.is_pr)))
        }
        PrCommand::Network { blocks } => {
            let [fa, fb, fc, fd] = blocks.as_slice() else {
                return Err(Error::InvalidArgument(format!(
                    "--blocks takes four files, got {}",
                    blocks.len()
                )));
            };
            let load_f = |p: &PathBuf| load::<RationalMatrixFunction>(p);
            let h =
                ratfun::feedback_network(&load_f(fa)?, &load_f(fb)?, &load_f(fc)?, &load_f(fd)?)?;
            let v = ratfun::pr_check(&h, &PrGrid::default());
            Ok(CommandResult::new(verdict_status(v.is_pr), &h)?
                .note(format!("positive real: {}", v.is_pr)))
        }
    }
}

fn run_real(cmd: &RealCommand, tol: f64) -> Result<CommandResult> {
    match cmd {
        RealCommand::Eval { realization, at } => {
            let r: RealizationArray = load(realization)?;
            let s = parse_complex(at)?;
            match realize::transfer_eval(&r, s) {
                Some(v) => CommandResult::new(Status::Ok, &v),
                None => Ok(CommandResult::new(
                    Status::Refuted,
                    &serde_json::json!({ "pole": [s.re, s.im] }),
                )?
                .note("s is a pole of the realization")),
            }
        }
        RealCommand::Op { op, inputs, factor } => {
            let rs = inputs
                .iter()
                .map(|p| load::<RealizationArray>(p))
                .collect::<Result<Vec<_>>>()?;
            let op = match op {
                OpArg::Scale => RealizationOp::Scale {
                    factor: factor.ok_or_else(|| {
                        Error::InvalidArgument("--op scale needs --factor".into())
                    })?,
                },
                OpArg::Sum => RealizationOp::Sum,
                OpArg::Invert => RealizationOp::Invert,
            };
            CommandResult::new(Status::Ok, &realize::realization_matrix_op(&rs, op)?)
        }
        RealCommand::Kyp {
            realization,
            h,
            search,
            max_iter,
        } => {
            let r: RealizationArray = load(realization)?;
            if *search {
                let opts = KypSearch {
                    max_iter: *max_iter,
                    tol,
                    ..KypSearch::default()
                };
                let out = realize::kyp_search(&r, &opts);
                let status = if out.is_found() {
                    Status::Ok
                } else {
                    Status::Infeasible
                };
                let mut res = CommandResult::new(status, &out)?;
                if let KypSearchOutcome::Infeasible(rep) = &out {
                    if !rep.minimal {
                        res = res.note("realization is not minimal; infeasibility does not refute positive realness");
                    }
                }
                Ok(res)
            } else {
                let h = match h {
                    Some(p) => load(p)?,
                    None => ComplexMatrix::identity(r.n()),
                };
                let cert = realize::kyp_verify_with_tol(&r, &h, tol)?;
                Ok(CommandResult::new(verdict_status(cert.valid), &cert)?)
            }
        }
        RealCommand::Balance { realization, via } => {
            let r: RealizationArray = load(realization)?;
            let out = realize::gramian_balance(&r, via.is_some())?;
            let mut res = CommandResult::new(Status::Ok, &out)?;
            if let Some(trace) = &out.iterations {
                res = res.note(format!(
                    "sign iteration: {} steps, converged {}",
                    trace.iterations(),
                    trace.converged
                ));
            }
            Ok(res)
        }
    }
}

fn run_sim(args: &SimRun, seed: u64, tol: f64) -> Result<CommandResult> {
    let sys: SwitchedSystem = load(&args.system)?;
    let x0 = parse_vector(&args.x0)?;
    let dwell = args.dwell.unwrap_or(match args.policy {
        PolicyArg::Greedy => args.dt,
        _ => 10.0 * args.dt,
    });
    let policy = match args.policy {
        PolicyArg::Fixed => SwitchingPolicy::Fixed {
            sequence: args.sequence.clone(),
            dwell,
        },
        PolicyArg::Random => SwitchingPolicy::Random {
            seed,
            mean_dwell: dwell,
        },
        PolicyArg::Greedy => SwitchingPolicy::Greedy { dwell },
    };
    let traj = incsim::simulate(&sys, &policy, &x0, args.horizon, args.dt)?;
    if let Some(path) = &args.csv {
        traj.write_csv(std::fs::File::create(path)?)?;
    }
    let report = incsim::verify_envelope_with_tol(&traj, &sys, tol.max(1e-7))?;
    let payload = serde_json::json!({
        "envelope": to_value(&report)?,
        "samples": traj.times.len(),
        "switches": traj.switch_schedule.len(),
        "final_norm": to_value(traj.norms.last().unwrap_or(&0.0))?,
    });
    CommandResult::new(verdict_status(report.violations.is_empty()), &payload)
}

fn emit(result: &CommandResult, out: Option<&Path>) -> std::io::Result<()> {
    let text = json::to_string(result)
        .unwrap_or_else(|e| format!(r#"{{"status":"error","payload":{{"message":"{e}"}}}}"#));
    match out {
        Some(path) => std::fs::write(path, text + "\n"),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")
        }
    }
}

/// Parses `args`, runs the command, writes the envelope and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let res = CommandResult::error(e.to_string().trim().to_string());
            let _ = emit(&res, None);
            return 2;
        }
    };
    let start = Instant::now();
    let res = match run(&cli) {
        Ok(r) => r,
        Err(e) => CommandResult::error(e.to_string()),
    };
    let res = res.note(format!(
        "elapsed: {:.3} ms",
        start.elapsed().as_secs_f64() * 1e3
    ));
    if let Err(e) = emit(&res, cli.out.as_deref()) {
        eprintln!("cic: cannot write output: {e}");
        return 1;
    }
    res.exit_code()
}
