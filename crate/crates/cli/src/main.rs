mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fermigauss::bounds::{self, DeFinettiReport};
use fermigauss::channels::{self, GaussianChannel};
use fermigauss::extend::{self, ExtendQuery, FeasibilityResult, Status};
use fermigauss::format::{self, CmDocument};
use fermigauss::matalg;
use fermigauss::sweep::{self, Exec};
use fermigauss::verify::{self, Suite};
use fermigauss::{DMatrix, Error};

use config::{OutputFormat, Overrides, RunConfig};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_STALLED: u8 = 4;

#[derive(Parser)]
#[command(name = "fermigauss", version, about = "Extendibility and de Finetti bounds for fermionic Gaussian states")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Slack on bona fide and positivity checks.
    #[arg(long, global = true)]
    eps_psd: Option<f64>,
    /// Slack on solver-produced witnesses.
    #[arg(long, global = true)]
    eps_feas: Option<f64>,
    /// Newton step budget for the solver.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with any of eps_psd, eps_feas, max_iters, seed, output_format.
    #[arg(long, global = true, env = "FERMIGAUSS_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads for parameter sweeps (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a CM file and print its spectrum and canonical form.
    CheckCm { path: PathBuf },
    /// Decide (k1, k2)-extendibility of a bipartite CM file.
    Extendible {
        path: PathBuf,
        k1: usize,
        k2: usize,
        /// Write the extended CM here when feasible.
        #[arg(long)]
        emit_extension: Option<PathBuf>,
        /// Write the witness Delta_A (+) Delta_B here when feasible.
        #[arg(long)]
        emit_witness: Option<PathBuf>,
    },
    /// De Finetti bounds for `NA NB K1 K2`, or `K1 K2` with `--cm`.
    Bounds {
        #[arg(num_args = 2..=4, required = true)]
        values: Vec<usize>,
        /// Take the split from this CM file and add the CM-level bounds.
        #[arg(long)]
        cm: Option<PathBuf>,
    },
    /// Bounds for the extendible two-mode family.
    Family {
        /// Single family member (k1, k2).
        #[arg(num_args = 2, value_names = ["K1", "K2"], conflicts_with = "max")]
        ks: Vec<usize>,
        /// Sweep every (k1, k2) with both orders up to this value.
        #[arg(long)]
        max: Option<usize>,
        /// Write the CM of the single member here.
        #[arg(long, requires = "ks")]
        emit_cm: Option<PathBuf>,
    },
    /// Gaussian channel analysis.
    Channel {
        path: PathBuf,
        #[command(subcommand)]
        action: ChannelAction,
    },
    /// Cross-check the CM layer against the dense Fock-space model.
    OracleVerify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum ChannelAction {
    /// Check complete positivity.
    Validate,
    /// Search for an antidegradability witness.
    Antidegradable,
    /// Entanglement-breaking test.
    Eb,
    /// Print the Choi CM.
    Choi,
    /// Extendibility of the Choi state with k output copies.
    KExt { k: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Roundtrip,
    Wick,
    Sandwich,
    Extension,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Roundtrip => Suite::Roundtrip,
            SuiteArg::Wick => Suite::Wick,
            SuiteArg::Sandwich => Suite::Sandwich,
            SuiteArg::Extension => Suite::Extension,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotBonaFide { .. } | Error::NotCP { .. } => EXIT_INVALID,
            Error::SolverStalled { .. } | Error::FormulationMismatch { .. } | Error::NoConvergence => EXIT_STALLED,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Printed text and exit code.
type Outcome = Result<(String, u8), Failure>;

struct Ctx {
    cfg: RunConfig,
    exec: Exec,
}

impl Ctx {
    fn fmt(&self) -> OutputFormat {
        self.cfg.output_format
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_failure(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| input_failure(format!("cannot write {}: {e}", path.display())))
}

fn load_cm(ctx: &Ctx, path: &Path) -> Result<CmDocument, Failure> {
    Ok(format::parse_cm(&read(path)?, &ctx.cfg.tolerances())?)
}

fn load_channel(ctx: &Ctx, path: &Path) -> Result<GaussianChannel, Failure> {
    Ok(format::parse_channel(&read(path)?, &ctx.cfg.tolerances())?)
}

#[derive(Serialize)]
struct CheckReport {
    valid: bool,
    modes: usize,
    split: Option<(usize, usize)>,
    pure: bool,
    spectrum: Vec<f64>,
    lambdas: Vec<f64>,
    margin: f64,
}

#[derive(Serialize)]
struct InvalidReport {
    valid: bool,
    eigenvalue: f64,
}

fn check_cm(ctx: &Ctx, path: &Path) -> Outcome {
    let doc = match format::parse_cm(&read(path)?, &ctx.cfg.tolerances()) {
        Err(e @ Error::NotBonaFide { eigenvalue }) => {
            eprintln!("error: {e}");
            let r = InvalidReport {
                valid: false,
                eigenvalue,
            };
            return Ok((output::render(&r, ctx.fmt()), EXIT_INVALID));
        }
        other => other?,
    };
    let cf = doc.cm.canonical()?;
    let r = CheckReport {
        valid: true,
        modes: doc.cm.modes(),
        split: doc.split,
        pure: doc.cm.is_pure(ctx.cfg.eps_psd.max(1e-9)),
        spectrum: doc.cm.spectrum(),
        lambdas: cf.lambdas,
        margin: doc.cm.margin(),
    };
    Ok((output::render(&r, ctx.fmt()), 0))
}

#[derive(Serialize)]
struct FeasibilityReport {
    status: Status,
    k1: usize,
    k2: usize,
    margin: f64,
    margin_upper: f64,
    iterations: usize,
    certificate: Option<String>,
}

impl FeasibilityReport {
    fn new(r: &FeasibilityResult, k1: usize, k2: usize) -> Self {
        Self {
            status: r.status,
            k1,
            k2,
            margin: r.margin,
            margin_upper: r.margin_upper,
            iterations: r.iterations,
            certificate: r.certificate.as_ref().map(|c| c.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        if self.status.is_feasible() {
            0
        } else {
            EXIT_INFEASIBLE
        }
    }
}

fn extendible(
    ctx: &Ctx,
    path: &Path,
    k1: usize,
    k2: usize,
    emit_extension: Option<&Path>,
    emit_witness: Option<&Path>,
) -> Outcome {
    let b = load_cm(ctx, path)?.bipartite()?;
    let (na, nb) = (b.na(), b.nb());
    let q = ExtendQuery::new(b, k1, k2)?;
    let tol = ctx.cfg.tolerances();
    let res = extend::feasibility(&q, &tol, &ctx.cfg.solver())?;
    if res.status.is_feasible() {
        if let Some(p) = emit_extension {
            let ext = extend::build_extension(&q, &res, &tol)?;
            write(p, &format::write_cm(ext.matrix(), Some((k1 * na, k2 * nb))))?;
        }
        if let (Some(p), Some(da), Some(db)) = (emit_witness, &res.delta_a, &res.delta_b) {
            let (a, bm) = (da.as_matrix(), db.as_matrix());
            let mut w = DMatrix::zeros(a.nrows() + bm.nrows(), a.nrows() + bm.nrows());
            w.view_mut((0, 0), a.shape()).copy_from(a);
            w.view_mut(a.shape(), bm.shape()).copy_from(bm);
            write(p, &format::write_cm(&w, Some((na, nb))))?;
        }
    } else if emit_extension.is_some() || emit_witness.is_some() {
        eprintln!("note: query is infeasible; nothing written");
    }
    let r = FeasibilityReport::new(&res, k1, k2);
    Ok((output::render(&r, ctx.fmt()), r.exit_code()))
}

#[derive(Serialize)]
struct BoundsRecord {
    k1: usize,
    k2: usize,
    #[serde(rename = "nA")]
    na: usize,
    #[serde(rename = "nB")]
    nb: usize,
    #[serde(rename = "T")]
    t: f64,
    trace_upper: f64,
    trace_upper_cm: Option<f64>,
    trace_lower: Option<f64>,
    er_upper: f64,
    esq_upper: f64,
}

impl From<DeFinettiReport> for BoundsRecord {
    fn from(r: DeFinettiReport) -> Self {
        Self {
            k1: r.k1,
            k2: r.k2,
            na: r.na,
            nb: r.nb,
            t: r.t,
            trace_upper: r.trace_upper,
            trace_upper_cm: None,
            trace_lower: r.trace_lower,
            er_upper: r.er_upper,
            esq_upper: r.esq_upper,
        }
    }
}

fn bounds_cmd(ctx: &Ctx, values: &[usize], cm: Option<&Path>) -> Outcome {
    let record = match (cm, values) {
        (None, &[na, nb, k1, k2]) => BoundsRecord::from(bounds::definetti_bounds(na, nb, k1, k2)?),
        (Some(p), &[k1, k2]) => {
            let b = load_cm(ctx, p)?.bipartite()?;
            let mut r = BoundsRecord::from(bounds::definetti_bounds(b.na(), b.nb(), k1, k2)?);
            r.trace_upper_cm = Some(bounds::trace_upper_from_cm(&b));
            if b.na() == 1 && b.nb() == 1 {
                r.trace_lower = Some(bounds::lower_bound_two_mode(&b)?);
            }
            r
        }
        (None, _) => return Err(input_failure("expected NA NB K1 K2")),
        (Some(_), _) => return Err(input_failure("with --cm, expected K1 K2")),
    };
    Ok((output::render_records(&[record], ctx.fmt()), 0))
}

fn family_record(k1: usize, k2: usize) -> Result<BoundsRecord, Error> {
    let b = bounds::family_cm(k1, k2);
    let mut r = BoundsRecord::from(bounds::definetti_bounds(1, 1, k1, k2)?);
    r.trace_upper_cm = Some(bounds::trace_upper_from_cm(&b));
    r.trace_lower = Some(bounds::lower_bound_two_mode(&b)?);
    Ok(r)
}

fn family(ctx: &Ctx, ks: &[usize], max: Option<usize>, emit_cm: Option<&Path>) -> Outcome {
    let grid: Vec<(usize, usize)> = match (ks, max) {
        (&[k1, k2], None) => vec![(k1, k2)],
        ([], Some(m)) => (1..=m).flat_map(|a| (1..=m).map(move |b| (a, b))).collect(),
        _ => return Err(input_failure("give K1 K2 or --max K")),
    };
    if grid.iter().any(|&(a, b)| a == 0 || b == 0) || grid.is_empty() {
        return Err(input_failure("family orders must be at least 1"));
    }
    if let (Some(p), [(k1, k2)]) = (emit_cm, grid.as_slice()) {
        write(p, &format::write_cm(bounds::family_cm(*k1, *k2).cm().matrix(), Some((1, 1))))?;
    }
    let records = sweep::map(ctx.exec, &grid, |&(a, b)| family_record(a, b))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok((output::render_records(&records, ctx.fmt()), 0))
}

#[derive(Serialize)]
struct ChannelReport {
    valid: bool,
    n_in: usize,
    n_out: usize,
    cp_margin: f64,
}

#[derive(Serialize)]
struct AntidegradableReport {
    status: Status,
    margin: f64,
    margin_upper: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct EbReport {
    entanglement_breaking: bool,
    x_op_norm: f64,
}

#[derive(Serialize)]
struct MatrixReport {
    modes: usize,
    split: (usize, usize),
    matrix: Vec<Vec<f64>>,
}

fn channel(ctx: &Ctx, path: &Path, action: &ChannelAction) -> Outcome {
    let ch = load_channel(ctx, path)?;
    let tol = ctx.cfg.tolerances();
    let fmt = ctx.fmt();
    match action {
        ChannelAction::Validate => {
            let r = ChannelReport {
                valid: true,
                n_in: ch.n_in(),
                n_out: ch.n_out(),
                cp_margin: ch.cp_margin(),
            };
            Ok((output::render(&r, fmt), 0))
        }
        ChannelAction::Antidegradable => {
            let res = channels::antidegradable(&ch, &tol, &ctx.cfg.solver())?;
            let r = AntidegradableReport {
                status: res.status,
                margin: res.margin,
                margin_upper: res.margin_upper,
                iterations: res.iterations,
            };
            let code = if res.status.is_feasible() { 0 } else { EXIT_INFEASIBLE };
            Ok((output::render(&r, fmt), code))
        }
        ChannelAction::Eb => {
            let r = EbReport {
                entanglement_breaking: channels::is_entanglement_breaking(&ch, &tol),
                x_op_norm: matalg::norms(ch.x()).op,
            };
            let code = if r.entanglement_breaking { 0 } else { EXIT_INFEASIBLE };
            Ok((output::render(&r, fmt), code))
        }
        ChannelAction::Choi => {
            let choi = channels::choi_cm(&ch);
            let m = choi.cm().matrix();
            let text = match fmt {
                OutputFormat::Table => format::write_cm(m, Some((choi.na(), choi.nb()))).trim_end().to_string(),
                OutputFormat::Json => output::render(
                    &MatrixReport {
                        modes: choi.cm().modes(),
                        split: (choi.na(), choi.nb()),
                        matrix: m.row_iter().map(|r| r.iter().map(|v| v + 0.0).collect()).collect(),
                    },
                    fmt,
                ),
            };
            Ok((text, 0))
        }
        ChannelAction::KExt { k } => {
            let res = channels::channel_k_extendible(&ch, *k, &tol, &ctx.cfg.solver())?;
            let r = FeasibilityReport::new(&res, *k, 1);
            Ok((output::render(&r, fmt), r.exit_code()))
        }
    }
}

fn oracle_verify(ctx: &Ctx, suite: SuiteArg, n_max: usize, trials: usize) -> Outcome {
    let r = verify::run_suite(
        suite.into(),
        n_max,
        trials,
        ctx.cfg.seed,
        ctx.exec,
        &ctx.cfg.tolerances(),
        &ctx.cfg.solver(),
    )?;
    let code = if r.passed { 0 } else { EXIT_INFEASIBLE };
    Ok((output::render(&r, ctx.fmt()), code))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Outcome {
    match command {
        Command::CheckCm { path } => check_cm(ctx, path),
        Command::Extendible {
            path,
            k1,
            k2,
            emit_extension,
            emit_witness,
        } => extendible(ctx, path, *k1, *k2, emit_extension.as_deref(), emit_witness.as_deref()),
        Command::Bounds { values, cm } => bounds_cmd(ctx, values, cm.as_deref()),
        Command::Family { ks, max, emit_cm } => family(ctx, ks, *max, emit_cm.as_deref()),
        Command::Channel { path, action } => channel(ctx, path, action),
        Command::OracleVerify { suite, n_max, trials } => oracle_verify(ctx, *suite, *n_max, *trials),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let overrides = Overrides {
        eps_psd: cli.eps_psd,
        eps_feas: cli.eps_feas,
        max_iters: cli.max_iters,
        seed: cli.seed,
        output_format: cli.format,
    };
    let cfg = match RunConfig::load(cli.config.as_deref(), overrides) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let ctx = Ctx {
        cfg,
        exec: if cli.jobs == 1 { Exec::Sequential } else { Exec::Parallel },
    };
    match sweep::with_jobs(cli.jobs, || dispatch(&ctx, &cli.command)) {
        Ok((text, code)) => {
            if !text.is_empty() {
                println!("{text}");
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
