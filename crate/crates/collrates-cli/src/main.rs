//! Command-line front end for the `collrates` library.
//!
//! Subcommands:
//!
//! * `rate` — achievable rate per coalition size for a decoder, channel
//!   class, and time-sharing density.
//! * `worst-attack` — the rate-minimising collusion channel itself (for
//!   bias-aware adversaries, the channel played at every grid bias).
//! * `curve` — pointwise rate over a uniform bias grid, plot-ready.
//! * `eta` — null-rate bias thresholds and their gaps to `1/c`.
//! * `capacity-d` — the bias-aware joint-decoder capacity `1/(c 2^(c-1))`.
//! * `mc-check` — Monte-Carlo cross-check of a quadrature rate (JSON).
//! * `tables` — the three reference tables as TSV files.
//!
//! Every output starts with a provenance header recording the tool version
//! and the full effective configuration (quadrature node counts, tolerances,
//! seeds), so any number can be reproduced from the file alone. Outputs are
//! deterministic: repeated runs with the same configuration are
//! byte-identical, regardless of thread count.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence,
//! 4 capability limit (a coalition size beyond a solver's supported range).
//!
//! `COLLRATES_THREADS` caps the thread pool used for per-`c` parallel work
//! and the solvers' internal parallelism.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collrates::rates::{rate, rate_classd};
use collrates::worst::{
    capacity_classd_joint, eta_c, worst_joint_bc, worst_joint_classd, worst_simple_b,
    worst_simple_bc, worst_simple_classd,
};
use collrates::{
    ChannelSpec, ClassTag, CollusionChannel, Decoder, Error as LibError, SolverConfig,
    TimeSharingDist,
};
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Argument types
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DecoderArg {
    /// Score the coalition jointly (rates per colluder).
    Joint,
    /// Score one user at a time.
    Simple,
}

impl From<DecoderArg> for Decoder {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Joint => Decoder::Joint,
            DecoderArg::Simple => Decoder::Simple,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ClassArg {
    /// Uniform pick among the coalition's symbols.
    #[value(name = "A")]
    A,
    /// Symbol-symmetric channels.
    #[value(name = "B")]
    B,
    /// All channels obeying the marking condition.
    #[value(name = "C")]
    C,
    /// Bias-aware adversaries: a channel per bias value.
    #[value(name = "D")]
    D,
}

impl ClassArg {
    fn tag(self) -> ClassTag {
        match self {
            ClassArg::A => ClassTag::A,
            ClassArg::B => ClassTag::B,
            ClassArg::C => ClassTag::C,
            ClassArg::D => ClassTag::D,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    /// Comma-separated values with `#` provenance comments.
    Csv,
    /// Tab-separated values with `#` provenance comments.
    Tsv,
    /// A JSON object with `provenance`, `columns`, and `rows` fields.
    Json,
}

/// Inclusive coalition-size range: `3` or `2..9` (both ends included).
#[derive(Copy, Clone, Debug)]
struct CRange {
    lo: usize,
    hi: usize,
}

impl CRange {
    fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }

    fn single(&self) -> Option<usize> {
        (self.lo == self.hi).then_some(self.lo)
    }
}

impl FromStr for CRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse_end = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("unparseable coalition size {t:?}"))
        };
        let range = if let Some((a, b)) = s.split_once("..") {
            let lo = parse_end(a)?;
            let hi = parse_end(b.trim().strip_prefix('=').unwrap_or(b))?;
            CRange { lo, hi }
        } else {
            let c = parse_end(s)?;
            CRange { lo: c, hi: c }
        };
        if range.lo == 0 {
            return Err("coalition size must be at least 1".into());
        }
        if range.hi < range.lo {
            return Err(format!("empty range {}..{}", range.lo, range.hi));
        }
        Ok(range)
    }
}

impl fmt::Display for CRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

fn parse_dist(s: &str) -> Result<TimeSharingDist, String> {
    TimeSharingDist::parse(s).map_err(|e| e.to_string())
}

/// What to compute: decoder, adversary class, density, coalition sizes.
#[derive(Args, Debug)]
struct SelectArgs {
    /// Decoder whose achievable rate is computed.
    #[arg(long, value_enum)]
    decoder: DecoderArg,

    /// Collusion-channel class the adversary draws from. Classes B and C
    /// coincide for the joint decoder.
    #[arg(long, value_enum, ignore_case = true)]
    class: ClassArg,

    /// Time-sharing density: tardos, flat, dirac:<p0>, or
    /// discrete:<p:w,...>.
    #[arg(long, value_parser = parse_dist, default_value = "tardos")]
    pdf: TimeSharingDist,

    /// Coalition size or inclusive range, e.g. `--c 3` or `--c 2..9`.
    #[arg(long)]
    c: CRange,
}

/// Knobs of the worst-case solvers.
#[derive(Args, Debug)]
struct SolverArgs {
    /// Convergence tolerance on the rate gap, in bits.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,

    /// Iteration budget of the iterative solvers.
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,

    /// Random restarts of the simple-decoder descent.
    #[arg(long, default_value_t = 20)]
    restarts: usize,

    /// Seed for the randomised restarts and the Monte-Carlo oracle.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            gap_tol_bits: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

/// Where and how to write the result.
#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "collrates",
    version,
    about = "Achievable rates of binary fingerprinting codes under worst-case collusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Achievable rate per coalition size.
    Rate {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// The rate-minimising collusion channel itself.
    WorstAttack {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Bias grid size for bias-aware (class D) attacks; ignored for
        /// stationary classes.
        #[arg(long, default_value_t = 501)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pointwise rate over a uniform bias grid.
    Curve {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Number of bias grid points over [0, 1].
        #[arg(long, default_value_t = 501)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Null-rate bias thresholds eta_c and their gaps to 1/c.
    Eta {
        /// Coalition size or inclusive range (c >= 3).
        #[arg(long)]
        c: CRange,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bias-aware joint-decoder capacity 1/(c 2^(c-1)).
    CapacityD {
        /// Coalition size or inclusive range.
        #[arg(long)]
        c: CRange,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte-Carlo cross-check of a quadrature rate (always JSON).
    McCheck {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Monte-Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The reference tables as TSV files: worst joint and simple attacks
    /// under the arcsine density, and the null-rate thresholds.
    Tables {
        /// Directory that receives the three TSV files.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    Lib(LibError),
    Io(std::io::Error),
    Csv(csv::Error),
    Invalid(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Csv(e) => write!(f, "output error: {e}"),
            CliError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => match e {
                LibError::CapabilityLimit { .. } => 4,
                LibError::NoConvergence { .. }
                | LibError::OptimizerStalled { .. }
                | LibError::DegenerateUpdate { .. } => 3,
                LibError::IntegrandFailure { .. } | LibError::EndpointSingularity { .. } => 1,
                _ => 2,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------------

/// A rendered result: a provenance header, column names, and string cells.
/// Cells are formatted once, so every output format prints identical digits.
struct Table {
    provenance: Vec<(&'static str, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn render_delimited(table: &Table, delimiter: u8) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    for (key, value) in &table.provenance {
        buf.extend_from_slice(format!("# {key}: {value}\n").as_bytes());
    }
    let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_writer(buf);
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

fn render_json(table: &Table) -> Vec<u8> {
    let provenance: serde_json::Map<String, serde_json::Value> = table
        .provenance
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
        .collect();
    let value = serde_json::json!({
        "provenance": provenance,
        "columns": table.columns,
        "rows": table.rows,
    });
    let mut bytes = serde_json::to_vec_pretty(&value).expect("tables serialize");
    bytes.push(b'\n');
    bytes
}

fn emit(table: &Table, format: FormatArg, out: Option<&Path>) -> CliResult<()> {
    let bytes = match format {
        FormatArg::Csv => render_delimited(table, b',')?,
        FormatArg::Tsv => render_delimited(table, b'\t')?,
        FormatArg::Json => render_json(table),
    };
    write_bytes(&bytes, out)
}

fn write_bytes(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn fmt_rate(r: f64) -> String {
    format!("{r:.9}")
}

/// Channel coordinates to six decimals, comma-joined (the CSV writer quotes
/// the field as needed).
fn fmt_theta(ch: &CollusionChannel) -> String {
    let parts: Vec<String> = ch.theta().iter().map(|t| format!("{t:.6}")).collect();
    parts.join(",")
}

fn fmt_theta_3(ch: &CollusionChannel) -> String {
    let parts: Vec<String> = ch.theta().iter().map(|t| format!("{t:.3}")).collect();
    parts.join(",")
}

/// Provenance entries shared by every command.
fn provenance_base(command: &str, out: &mut Vec<(&'static str, String)>) {
    out.push(("tool", format!("collrates {}", env!("CARGO_PKG_VERSION"))));
    out.push(("command", command.to_string()));
}

fn provenance_select(select: &SelectArgs, out: &mut Vec<(&'static str, String)>) {
    out.push(("decoder", Decoder::from(select.decoder).to_string()));
    out.push(("class", select.class.tag().to_string()));
    out.push(("pdf", select.pdf.selector()));
    out.push(("c", select.c.to_string()));
    out.push(("quadrature_nodes", select.pdf.quadrature().len().to_string()));
}

fn provenance_solver(solver: &SolverArgs, out: &mut Vec<(&'static str, String)>) {
    let cfg = solver.config();
    out.push(("tol_bits", format!("{:e}", cfg.gap_tol_bits)));
    out.push(("max_iters", cfg.max_iters.to_string()));
    out.push(("restarts", cfg.restarts.to_string()));
    out.push(("seed", cfg.seed.to_string()));
    out.push(("line_search_grid", cfg.grid_points.to_string()));
}

// ---------------------------------------------------------------------------
// Solver dispatch
// ---------------------------------------------------------------------------

/// One solved (decoder, class, c) cell: the attack, its expected rate in
/// bits, and the iteration count (0 for closed forms).
struct Cell {
    spec: ChannelSpec,
    rate_bits: f64,
    iterations: usize,
}

fn solve_cell(
    decoder: Decoder,
    class: ClassArg,
    c: usize,
    dist: &TimeSharingDist,
    cfg: &SolverConfig,
) -> Result<Cell, LibError> {
    match (class, decoder) {
        (ClassArg::A, _) => {
            let ch = CollusionChannel::class_a(c)?;
            let rate_bits = rate(decoder, &ch, dist)?;
            Ok(Cell { spec: ChannelSpec::Stationary(ch), rate_bits, iterations: 0 })
        }
        (ClassArg::B | ClassArg::C, Decoder::Joint) => {
            let solve = worst_joint_bc(c, dist, cfg)?;
            Ok(Cell {
                spec: ChannelSpec::Stationary(solve.channel),
                rate_bits: solve.rate_bits,
                iterations: solve.iterations,
            })
        }
        (ClassArg::B, Decoder::Simple) => {
            let solve = worst_simple_b(c, dist, cfg)?;
            Ok(Cell {
                spec: ChannelSpec::Stationary(solve.channel),
                rate_bits: solve.rate_bits,
                iterations: solve.iterations,
            })
        }
        (ClassArg::C, Decoder::Simple) => {
            let solve = worst_simple_bc(c, dist, cfg)?;
            Ok(Cell {
                spec: ChannelSpec::Stationary(solve.channel),
                rate_bits: solve.rate_bits,
                iterations: solve.iterations,
            })
        }
        (ClassArg::D, _) => {
            let strat = match decoder {
                Decoder::Joint => worst_joint_classd(c)?,
                Decoder::Simple => worst_simple_classd(c, cfg)?,
            };
            let rate_bits = rate_classd(&strat, decoder, dist)?;
            Ok(Cell { spec: ChannelSpec::BiasAware(strat), rate_bits, iterations: 0 })
        }
    }
}

/// Runs `work` for every coalition size in parallel; results come back in
/// input order, and the first error (by that order) wins.
fn par_cells<T: Send>(
    cs: &[usize],
    work: impl Fn(usize) -> Result<T, LibError> + Sync,
) -> Result<Vec<T>, LibError> {
    let results: Vec<Result<T, LibError>> = cs.par_iter().map(|&c| work(c)).collect();
    results.into_iter().collect()
}

/// Uniform grid over [0, 1] with `n >= 2` points.
fn bias_grid(n: usize) -> CliResult<Vec<f64>> {
    if n < 2 {
        return Err(CliError::Invalid(format!(
            "--grid must be at least 2, got {n}"
        )));
    }
    Ok((0..n).map(|k| k as f64 / (n - 1) as f64).collect())
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_rate(select: SelectArgs, solver: SolverArgs, output: OutputArgs) -> CliResult<()> {
    let decoder = Decoder::from(select.decoder);
    let cfg = solver.config();
    let cs = select.c.values();
    let cells = par_cells(&cs, |c| solve_cell(decoder, select.class, c, &select.pdf, &cfg))?;

    let mut provenance = Vec::new();
    provenance_base("rate", &mut provenance);
    provenance_select(&select, &mut provenance);
    provenance_solver(&solver, &mut provenance);
    let rows = cs
        .iter()
        .zip(&cells)
        .map(|(&c, cell)| {
            let channel = match &cell.spec {
                ChannelSpec::Stationary(ch) => fmt_theta(ch),
                spec @ ChannelSpec::BiasAware(_) => spec.serialize(),
            };
            vec![
                decoder.to_string(),
                select.class.tag().to_string(),
                select.pdf.selector(),
                c.to_string(),
                fmt_rate(cell.rate_bits),
                channel,
                cell.iterations.to_string(),
            ]
        })
        .collect();
    let table = Table {
        provenance,
        columns: vec!["decoder", "class", "pdf", "c", "rate_bits", "channel", "iterations"],
        rows,
    };
    emit(&table, output.format, output.out.as_deref())
}

fn cmd_worst_attack(
    select: SelectArgs,
    solver: SolverArgs,
    grid: usize,
    output: OutputArgs,
) -> CliResult<()> {
    let decoder = Decoder::from(select.decoder);
    let cfg = solver.config();
    let cs = select.c.values();
    let cells = par_cells(&cs, |c| solve_cell(decoder, select.class, c, &select.pdf, &cfg))?;

    let mut provenance = Vec::new();
    provenance_base("worst-attack", &mut provenance);
    provenance_select(&select, &mut provenance);
    provenance_solver(&solver, &mut provenance);

    let bias_aware = matches!(select.class, ClassArg::D);
    let table = if bias_aware {
        provenance.push(("bias_grid", grid.to_string()));
        let ps = bias_grid(grid)?;
        let mut rows = Vec::new();
        for (&c, cell) in cs.iter().zip(&cells) {
            for &p in &ps {
                let ch = cell.spec.channel_at(p)?;
                let r = cell.spec.r_point(decoder, p)?;
                rows.push(vec![
                    c.to_string(),
                    format!("{p}"),
                    fmt_theta(&ch),
                    fmt_rate(r),
                ]);
            }
        }
        Table { provenance, columns: vec!["c", "p", "theta", "rate_bits"], rows }
    } else {
        let rows = cs
            .iter()
            .zip(&cells)
            .map(|(&c, cell)| {
                let ch = match &cell.spec {
                    ChannelSpec::Stationary(ch) => ch,
                    ChannelSpec::BiasAware(_) => unreachable!("stationary classes only"),
                };
                vec![
                    c.to_string(),
                    fmt_theta(ch),
                    fmt_rate(cell.rate_bits),
                    cell.iterations.to_string(),
                ]
            })
            .collect();
        Table { provenance, columns: vec!["c", "theta", "rate_bits", "iterations"], rows }
    };
    emit(&table, output.format, output.out.as_deref())
}

fn cmd_curve(
    select: SelectArgs,
    solver: SolverArgs,
    grid: usize,
    output: OutputArgs,
) -> CliResult<()> {
    let decoder = Decoder::from(select.decoder);
    let cfg = solver.config();
    let cs = select.c.values();
    let ps = bias_grid(grid)?;
    let cells = par_cells(&cs, |c| solve_cell(decoder, select.class, c, &select.pdf, &cfg))?;

    let mut provenance = Vec::new();
    provenance_base("curve", &mut provenance);
    provenance_select(&select, &mut provenance);
    provenance_solver(&solver, &mut provenance);
    provenance.push(("bias_grid", grid.to_string()));

    let bias_aware = matches!(select.class, ClassArg::D);
    let mut rows = Vec::new();
    for (&c, cell) in cs.iter().zip(&cells) {
        for &p in &ps {
            let r = cell.spec.r_point(decoder, p)?;
            let mut row = vec![c.to_string(), format!("{p}"), fmt_rate(r)];
            if bias_aware {
                row.push(fmt_theta(&cell.spec.channel_at(p)?));
            }
            rows.push(row);
        }
    }
    let mut columns = vec!["c", "p", "rate_bits"];
    if bias_aware {
        columns.push("theta");
    }
    let table = Table { provenance, columns, rows };
    emit(&table, output.format, output.out.as_deref())
}

fn cmd_eta(c: CRange, output: OutputArgs) -> CliResult<()> {
    let cs = c.values();
    let etas = par_cells(&cs, eta_c)?;
    let mut provenance = Vec::new();
    provenance_base("eta", &mut provenance);
    provenance.push(("c", c.to_string()));
    provenance.push(("bisection_tol", "1e-14".to_string()));
    let rows = cs
        .iter()
        .zip(&etas)
        .map(|(&c, &eta)| {
            vec![c.to_string(), format!("{eta:.12}"), format!("{:.6e}", eta - 1.0 / c as f64)]
        })
        .collect();
    let table = Table { provenance, columns: vec!["c", "eta", "gap_to_1_over_c"], rows };
    emit(&table, output.format, output.out.as_deref())
}

fn cmd_capacity_d(c: CRange, output: OutputArgs) -> CliResult<()> {
    let cs = c.values();
    let caps = par_cells(&cs, capacity_classd_joint)?;
    let mut provenance = Vec::new();
    provenance_base("capacity-d", &mut provenance);
    provenance.push(("c", c.to_string()));
    let rows = cs
        .iter()
        .zip(&caps)
        .map(|(&c, &cap)| vec![c.to_string(), format!("{cap}")])
        .collect();
    let table = Table { provenance, columns: vec!["c", "capacity_bits"], rows };
    emit(&table, output.format, output.out.as_deref())
}

fn cmd_mc_check(
    select: SelectArgs,
    solver: SolverArgs,
    samples: usize,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let c = select.c.single().ok_or_else(|| {
        CliError::Invalid(format!(
            "mc-check takes a single coalition size, got --c {}",
            select.c
        ))
    })?;
    let decoder = Decoder::from(select.decoder);
    let cfg = solver.config();
    let cell = solve_cell(decoder, select.class, c, &select.pdf, &cfg)?;
    let est =
        collrates::oracle::estimate_mi(decoder, c, &cell.spec, &select.pdf, samples, solver.seed)?;
    let z = (est.mi_bits - cell.rate_bits) / est.std_err_bits;

    let mut provenance = Vec::new();
    provenance_base("mc-check", &mut provenance);
    provenance_select(&select, &mut provenance);
    provenance_solver(&solver, &mut provenance);
    let prov_map: serde_json::Map<String, serde_json::Value> = provenance
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
        .collect();
    let value = serde_json::json!({
        "provenance": prov_map,
        "decoder": decoder.to_string(),
        "class": select.class.tag().to_string(),
        "pdf": select.pdf.selector(),
        "c": c,
        "attack": cell.spec.serialize(),
        "reference_rate_bits": cell.rate_bits,
        "mi_bits": est.mi_bits,
        "std_err_bits": est.std_err_bits,
        "samples": est.samples,
        "seed": est.seed,
        "z_score": z,
    });
    let mut bytes = serde_json::to_vec_pretty(&value).expect("report serializes");
    bytes.push(b'\n');
    write_bytes(&bytes, out.as_deref())
}

fn cmd_tables(out: PathBuf, solver: SolverArgs) -> CliResult<()> {
    std::fs::create_dir_all(&out)?;
    let cfg = solver.config();
    let dist = TimeSharingDist::Tardos;
    let cs: Vec<usize> = (2..=9).collect();

    let joint = par_cells(&cs, |c| worst_joint_bc(c, &dist, &cfg))?;
    let simple = par_cells(&cs, |c| worst_simple_bc(c, &dist, &cfg))?;
    let eta_cs: Vec<usize> = vec![3, 4, 5, 6, 10, 15, 20];
    let etas = par_cells(&eta_cs, eta_c)?;

    let mut provenance = Vec::new();
    provenance_base("tables", &mut provenance);
    provenance.push(("pdf", dist.selector()));
    provenance.push(("quadrature_nodes", dist.quadrature().len().to_string()));
    provenance_solver(&solver, &mut provenance);

    let mut written = Vec::new();

    let joint_table = Table {
        provenance: provenance.clone(),
        columns: vec!["c", "theta_star", "rate_bits"],
        rows: cs
            .iter()
            .zip(&joint)
            .map(|(&c, s)| {
                vec![c.to_string(), fmt_theta_3(&s.channel), format!("{:.3}", s.rate_bits)]
            })
            .collect(),
    };
    let path = out.join("worst_joint_tardos.tsv");
    std::fs::write(&path, render_delimited(&joint_table, b'\t')?)?;
    written.push(path);

    let simple_table = Table {
        provenance: provenance.clone(),
        columns: vec!["c", "theta_star", "rate_bits"],
        rows: cs
            .iter()
            .zip(&simple)
            .map(|(&c, s)| {
                vec![c.to_string(), fmt_theta_3(&s.channel), format!("{:.3}", s.rate_bits)]
            })
            .collect(),
    };
    let path = out.join("worst_simple_tardos.tsv");
    std::fs::write(&path, render_delimited(&simple_table, b'\t')?)?;
    written.push(path);

    let mut eta_provenance = Vec::new();
    provenance_base("tables", &mut eta_provenance);
    eta_provenance.push(("bisection_tol", "1e-14".to_string()));
    let eta_table = Table {
        provenance: eta_provenance,
        columns: vec!["c", "eta", "gap_to_1_over_c"],
        rows: eta_cs
            .iter()
            .zip(&etas)
            .map(|(&c, &eta)| {
                vec![c.to_string(), format!("{eta:.12}"), format!("{:.1e}", eta - 1.0 / c as f64)]
            })
            .collect(),
    };
    let path = out.join("null_rate_thresholds.tsv");
    std::fs::write(&path, render_delimited(&eta_table, b'\t')?)?;
    written.push(path);

    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Applies `COLLRATES_THREADS` to the global thread pool before any parallel
/// work starts.
fn configure_threads() -> Result<(), String> {
    match std::env::var("COLLRATES_THREADS") {
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                format!("COLLRATES_THREADS must be a positive integer, got {raw:?}")
            })?;
            if n == 0 {
                return Err("COLLRATES_THREADS must be at least 1".to_string());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("could not size the thread pool: {e}"))
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(format!("COLLRATES_THREADS is unreadable: {e}")),
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Rate { select, solver, output } => cmd_rate(select, solver, output),
        Command::WorstAttack { select, solver, grid, output } => {
            cmd_worst_attack(select, solver, grid, output)
        }
        Command::Curve { select, solver, grid, output } => {
            cmd_curve(select, solver, grid, output)
        }
        Command::Eta { c, output } => cmd_eta(c, output),
        Command::CapacityD { c, output } => cmd_capacity_d(c, output),
        Command::McCheck { select, solver, samples, out } => {
            cmd_mc_check(select, solver, samples, out)
        }
        Command::Tables { out, solver } => cmd_tables(out, solver),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("collrates: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("collrates: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
