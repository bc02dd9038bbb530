use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use ftqc_core::concat_cost::{estimate_concat, ConcatConfig, ConcatReport};
use ftqc_core::phase_estimation::{ipea_run, InputState, IpeaConfig, IpeaRun, OracleMode};
use ftqc_core::sk::{BaseNet, NetParams, Synthesizer};
use ftqc_core::surface_cost::{estimate_surface, CycleFormula, SurfaceReport, TimProblem};
use ftqc_core::tim_model::{ground_energy_exact, TrotterMode};

use crate::config::{parse_list, parse_m_range, RunConfig};
use crate::error::{CliError, EXIT_OK};
use crate::rows::{to_csv, ConcatRow, SurfaceRow};
use crate::svg::{line_chart, Series};

/// Net cache location used when neither `--net-cache-path` nor `net_cache_path` is set.
pub const DEFAULT_NET_CACHE: &str = "ftqc-net.cache";

#[derive(Debug, Parser)]
#[command(
    name = "ftqc",
    version,
    about = "Fault-tolerant resource estimates for phase estimation of the transverse-field Ising chain"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config file of `key = value` lines [default: $FTQC_CONFIG]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write outputs into this directory instead of stdout
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Output formats, comma-separated (json, csv, svg)
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,

    /// Worker threads for sweeps and multi-seed simulation [default: all cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Base-net cache file [default: ftqc-net.cache]
    #[arg(long, global = true, value_name = "PATH")]
    pub net_cache_path: Option<PathBuf>,

    /// Build the base net and overwrite the cache
    #[arg(long, global = true)]
    pub build_net: bool,

    /// Longest base-net word [default: 16]
    #[arg(long, global = true)]
    pub net_max_len: Option<usize>,

    /// Base-net deduplication tolerance [default: 1e-7]
    #[arg(long, global = true)]
    pub net_dedup_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile R_z(angle) into a Clifford+T sequence
    Compile(CompileArgs),
    /// Resource estimate for one (N, M)
    Estimate {
        #[command(subcommand)]
        code: EstimateCode,
    },
    /// Resource estimates over a grid
    Sweep {
        #[command(subcommand)]
        code: SweepCode,
    },
    /// Simulate iterative phase estimation on a small chain
    Simulate(SimulateArgs),
    /// Build or inspect the base-net cache
    Net {
        #[command(subcommand)]
        action: NetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum EstimateCode {
    /// Surface code with magic-state distillation
    Surface(SurfaceEstimateArgs),
    /// Concatenated Steane code
    Concat(ConcatEstimateArgs),
}

#[derive(Debug, Subcommand)]
pub enum SweepCode {
    /// Surface-code grid over M, r and p_ratio
    Surface(SurfaceSweepArgs),
    /// Concatenated-code grid over M
    Concat(ConcatSweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum NetAction {
    /// Build the net and write the cache
    Build,
    /// Describe the cached net
    Info,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Rotation angle in radians
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// Target distance [default: 1e-3]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Include the gate sequence in the output
    #[arg(long)]
    pub show_seq: bool,
}

#[derive(Debug, Args)]
pub struct SurfaceParams {
    /// Evolution time per unit power [default: pi/(2N)]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Threshold error rate [default: 0.0057]
    #[arg(long)]
    pub p_th: Option<f64>,
    /// Physical gate time in seconds [default: 2e-8]
    #[arg(long)]
    pub t_phys: Option<f64>,
    /// Raw magic-state error [default: p_ratio * p_th]
    #[arg(long)]
    pub p_inject: Option<f64>,
    /// Split the synthesis budget over the nine rotations of a step
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict_sk_budget: Option<bool>,
    /// Trotter error evaluation: bound or exact [default: exact for N <= 8, else bound]
    #[arg(long)]
    pub trotter_mode: Option<String>,
    /// Largest k0 searched [default: 1e9]
    #[arg(long)]
    pub k0_cap: Option<u64>,
    /// Largest code distance searched [default: 999]
    #[arg(long)]
    pub d_cap: Option<u32>,
    /// Total cycle expression: explicit_sum or half_prefactor [default: explicit_sum]
    #[arg(long)]
    pub cycle_formula: Option<String>,
}

#[derive(Debug, Args)]
pub struct SurfaceEstimateArgs {
    /// Number of spins
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Phase bits
    #[arg(short = 'M')]
    pub m: Option<u32>,
    /// Target success probability [default: 1]
    #[arg(long)]
    pub r: Option<f64>,
    /// Physical error over threshold [default: 0.1]
    #[arg(long)]
    pub p_ratio: Option<f64>,
    #[command(flatten)]
    pub params: SurfaceParams,
}

#[derive(Debug, Args)]
pub struct SurfaceSweepArgs {
    /// Number of spins
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Phase bits: `a..b`, `a,b,c` or a single value
    #[arg(short = 'M')]
    pub m: Option<String>,
    /// Success probabilities, comma-separated [default: 1]
    #[arg(long)]
    pub r: Option<String>,
    /// Physical error over threshold, comma-separated [default: 0.1]
    #[arg(long)]
    pub p_ratio: Option<String>,
    #[command(flatten)]
    pub params: SurfaceParams,
}

#[derive(Debug, Args)]
pub struct ConcatParams {
    /// Physical error rate [default: 1e-7]
    #[arg(long)]
    pub p_phys: Option<f64>,
    /// Threshold [default: 3.1e-6]
    #[arg(long)]
    pub eps_threshold: Option<f64>,
    /// Physical gate time in seconds [default: 1e-5]
    #[arg(long)]
    pub t_phys: Option<f64>,
    /// Logical qubits [default: 4N]
    #[arg(long)]
    pub q_logical: Option<u64>,
    /// Wall-time growth per level [default: 1.2]
    #[arg(long)]
    pub level_overhead_base: Option<f64>,
    /// Evolution time per unit power [default: 1]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Trotter error evaluation: bound or exact
    #[arg(long)]
    pub trotter_mode: Option<String>,
    /// Largest k0 searched [default: 1e9]
    #[arg(long)]
    pub k0_cap: Option<u64>,
    /// Split the synthesis budget over the nine rotations of a step
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict_sk_budget: Option<bool>,
}

#[derive(Debug, Args)]
pub struct ConcatEstimateArgs {
    /// Number of spins
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Phase bits
    #[arg(short = 'M')]
    pub m: Option<u32>,
    #[command(flatten)]
    pub params: ConcatParams,
}

#[derive(Debug, Args)]
pub struct ConcatSweepArgs {
    /// Number of spins
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Phase bits: `a..b`, `a,b,c` or a single value
    #[arg(short = 'M')]
    pub m: Option<String>,
    #[command(flatten)]
    pub params: ConcatParams,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of spins
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Phase bits
    #[arg(short = 'M')]
    pub m: Option<u32>,
    /// Oracle: exact, trotter or trotter_sk [default: exact]
    #[arg(long)]
    pub mode: Option<String>,
    /// Number of seeds [default: 1]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// First seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evolution time per unit power [default: pi/(2N)]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Trotter steps per unit power [default: solved from the error budget]
    #[arg(long)]
    pub k0: Option<u64>,
    /// Ground-state overlap of the input [default: 1]
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Per-rotation synthesis tolerance in trotter_sk mode [default: 2^-M/k0]
    #[arg(long)]
    pub sk_eps: Option<f64>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ftqc: {e}");
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    cfg: RunConfig,
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::discover(cli.global.config.as_deref())?;
    let ctx = Ctx {
        global: &cli.global,
        cfg,
    };
    match &cli.command {
        Command::Compile(a) => compile(&ctx, a),
        Command::Estimate { code } => match code {
            EstimateCode::Surface(a) => estimate_surface_cmd(&ctx, a),
            EstimateCode::Concat(a) => estimate_concat_cmd(&ctx, a),
        },
        Command::Sweep { code } => match code {
            SweepCode::Surface(a) => sweep_surface(&ctx, a),
            SweepCode::Concat(a) => sweep_concat(&ctx, a),
        },
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Net { action } => match action {
            NetAction::Build => net_build(&ctx),
            NetAction::Info => net_info(&ctx),
        },
    }
}

impl Ctx<'_> {
    fn out_dir(&self) -> Option<PathBuf> {
        self.global
            .out
            .clone()
            .or_else(|| self.cfg.raw("out").map(PathBuf::from))
    }

    fn formats(&self, default: Format) -> Result<Vec<Format>, CliError> {
        if !self.global.format.is_empty() {
            return Ok(self.global.format.clone());
        }
        match self.cfg.raw("format") {
            Some(list) => list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<Format>()
                        .map_err(|e| CliError::Usage(format!("config key `format`: {e}")))
                })
                .collect(),
            None => Ok(vec![default]),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let jobs = self.cfg.pick_opt(self.global.jobs, "jobs")?;
        if jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
    }

    fn net_path(&self) -> PathBuf {
        self.global
            .net_cache_path
            .clone()
            .or_else(|| self.cfg.raw("net_cache_path").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_NET_CACHE))
    }

    fn net_params(&self) -> Result<NetParams, CliError> {
        let d = NetParams::default();
        Ok(NetParams {
            max_len: self
                .cfg
                .pick(self.global.net_max_len, "net_max_len", d.max_len)?,
            dedup_tol: self
                .cfg
                .pick(self.global.net_dedup_tol, "net_dedup_tol", d.dedup_tol)?,
            entry_budget: self.cfg.pick(None, "net_entry_budget", d.entry_budget)?,
            ..d
        })
    }

    fn build_net(&self) -> Result<bool, CliError> {
        self.cfg
            .pick_bool(self.global.build_net.then_some(true), "build_net", false)
    }

    /// With `require_cache`, a missing cache is an error unless a build was requested;
    /// otherwise the net is built and cached on demand.
    fn net(&self, require_cache: bool) -> Result<BaseNet<f64>, CliError> {
        let path = self.net_path();
        let params = self.net_params()?;
        if self.build_net()? {
            let net = BaseNet::build(params)?;
            net.save(&path)?;
            return Ok(net);
        }
        if path.exists() {
            return Ok(BaseNet::load(&path)?);
        }
        if require_cache {
            return Err(CliError::Usage(format!(
                "no net cache at `{}`; set net_cache_path (or --net-cache-path) to an existing cache, or pass --build-net",
                path.display()
            )));
        }
        Ok(BaseNet::load_or_build(&path, params)?)
    }
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        CliError::Usage(format!(
            "missing required value `{what}` (flag or config key)"
        ))
    })
}

fn parse_trotter_mode(s: Option<String>) -> Result<Option<TrotterMode>, CliError> {
    s.map(|s| {
        s.parse::<TrotterMode>()
            .map_err(|e| CliError::Usage(e.to_string()))
    })
    .transpose()
}

fn parse_cycle_formula(s: &str) -> Result<CycleFormula, CliError> {
    match s {
        "explicit_sum" => Ok(CycleFormula::ExplicitSum),
        "half_prefactor" => Ok(CycleFormula::HalfPrefactor),
        other => Err(CliError::Usage(format!(
            "unknown cycle formula `{other}` (explicit_sum|half_prefactor)"
        ))),
    }
}

/// Writes `content` to `<out>/<name>`, or to stdout when no directory is set.
fn emit(out: Option<&Path>, name: &str, content: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, content)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn json_text<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn reject_svg(formats: &[Format], cmd: &str) -> Result<(), CliError> {
    if formats.contains(&Format::Svg) {
        return Err(CliError::Usage(format!(
            "svg output is only available for sweeps, not `{cmd}`"
        )));
    }
    Ok(())
}

fn human_duration(s: f64) -> String {
    if s < 120.0 {
        format!("{s:.3} s")
    } else if s < 7200.0 {
        format!("{:.2} min", s / 60.0)
    } else if s < 2.0 * 86400.0 {
        format!("{:.2} h", s / 3600.0)
    } else if s < 2.0 * 365.25 * 86400.0 {
        format!("{:.2} days", s / 86400.0)
    } else {
        format!("{:.3e} years", s / (365.25 * 86400.0))
    }
}

// ---- compile ----------------------------------------------------------------

#[derive(Serialize)]
struct CompileOutput {
    angle: f64,
    eps: f64,
    achieved_eps: f64,
    depth: usize,
    length: usize,
    #[serde(rename = "N_H")]
    n_h: u64,
    #[serde(rename = "N_S")]
    n_s: u64,
    #[serde(rename = "N_T")]
    n_t: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sequence: Option<String>,
}

fn compile(ctx: &Ctx, a: &CompileArgs) -> Result<(), CliError> {
    let formats = ctx.formats(Format::Json)?;
    reject_svg(&formats, "compile")?;
    let angle = need(ctx.cfg.pick_opt(a.angle, "angle")?, "angle")?;
    let eps = ctx.cfg.pick(a.eps, "eps", 1e-3)?;
    let show_seq = ctx
        .cfg
        .pick_bool(a.show_seq.then_some(true), "show_seq", false)?;
    let net = ctx.net(true)?;
    let rot = Synthesizer::new(&net).compile_rz(angle, eps)?;
    let c = rot.seq.counts;
    let out = CompileOutput {
        angle,
        eps,
        achieved_eps: rot.achieved_eps,
        depth: rot.depth,
        length: rot.seq.len(),
        n_h: c.n_h,
        n_s: c.n_s,
        n_t: c.n_t,
        sequence: show_seq.then(|| rot.seq.to_ascii()),
    };
    let dir = ctx.out_dir();
    for f in formats {
        match f {
            Format::Json => emit(dir.as_deref(), "compile.json", &json_text(&out)?)?,
            Format::Csv => {
                #[derive(Serialize)]
                struct Row<'a> {
                    angle: f64,
                    eps: f64,
                    achieved_eps: f64,
                    depth: usize,
                    length: usize,
                    #[serde(rename = "N_H")]
                    n_h: u64,
                    #[serde(rename = "N_S")]
                    n_s: u64,
                    #[serde(rename = "N_T")]
                    n_t: u64,
                    sequence: &'a str,
                }
                let row = Row {
                    angle,
                    eps,
                    achieved_eps: out.achieved_eps,
                    depth: out.depth,
                    length: out.length,
                    n_h: c.n_h,
                    n_s: c.n_s,
                    n_t: c.n_t,
                    sequence: out.sequence.as_deref().unwrap_or(""),
                };
                emit(dir.as_deref(), "compile.csv", &to_csv(&[row])?)?
            }
            Format::Svg => unreachable!(),
        }
    }
    eprintln!(
        "R_z({angle}): depth {}, {} gates (T {}, S {}, H {}), eps {:.3e}",
        rot.depth,
        rot.seq.len(),
        c.n_t,
        c.n_s,
        c.n_h,
        rot.achieved_eps
    );
    Ok(())
}

// ---- estimate ---------------------------------------------------------------

fn surface_problem(
    ctx: &Ctx,
    n: usize,
    m: u32,
    r: f64,
    p_ratio: f64,
    p: &SurfaceParams,
) -> Result<TimProblem, CliError> {
    let cfg = &ctx.cfg;
    let mut prob = TimProblem::new(n, m);
    prob.r = r;
    prob.p_ratio = p_ratio;
    prob.tau = cfg.pick(p.tau, "tau", prob.tau)?;
    prob.p_th = cfg.pick(p.p_th, "p_th", prob.p_th)?;
    prob.t_phys = cfg.pick(p.t_phys, "t_phys", prob.t_phys)?;
    prob.p_inject = cfg.pick_opt(p.p_inject, "p_inject")?;
    prob.strict_sk_budget = cfg.pick_bool(p.strict_sk_budget, "strict_sk_budget", false)?;
    prob.trotter_mode = parse_trotter_mode(cfg.pick_opt(p.trotter_mode.clone(), "trotter_mode")?)?;
    prob.k0_cap = cfg.pick(p.k0_cap, "k0_cap", prob.k0_cap)?;
    prob.d_cap = cfg.pick(p.d_cap, "d_cap", prob.d_cap)?;
    if let Some(f) = cfg.pick_opt(p.cycle_formula.clone(), "cycle_formula")? {
        prob.cycle_formula = parse_cycle_formula(&f)?;
    }
    Ok(prob)
}

fn concat_config(ctx: &Ctx, p: &ConcatParams) -> Result<ConcatConfig, CliError> {
    let cfg = &ctx.cfg;
    let d = ConcatConfig::default();
    Ok(ConcatConfig {
        p_phys: cfg.pick(p.p_phys, "p_phys", d.p_phys)?,
        eps_threshold: cfg.pick(p.eps_threshold, "eps_threshold", d.eps_threshold)?,
        t_phys: cfg.pick(p.t_phys, "t_phys", d.t_phys)?,
        q_logical: cfg.pick_opt(p.q_logical, "q_logical")?,
        level_overhead_base: cfg.pick(
            p.level_overhead_base,
            "level_overhead_base",
            d.level_overhead_base,
        )?,
        tau: cfg.pick(p.tau, "tau", d.tau)?,
        trotter_mode: parse_trotter_mode(cfg.pick_opt(p.trotter_mode.clone(), "trotter_mode")?)?,
        k0_cap: cfg.pick(p.k0_cap, "k0_cap", d.k0_cap)?,
        strict_sk_budget: cfg.pick_bool(
            p.strict_sk_budget,
            "strict_sk_budget",
            d.strict_sk_budget,
        )?,
    })
}

#[derive(Serialize)]
struct SurfaceOutput<'a> {
    problem: &'a TimProblem,
    report: &'a SurfaceReport,
}

fn estimate_surface_cmd(ctx: &Ctx, a: &SurfaceEstimateArgs) -> Result<(), CliError> {
    let formats = ctx.formats(Format::Json)?;
    reject_svg(&formats, "estimate surface")?;
    let n = need(ctx.cfg.pick_opt(a.n, "N")?, "N")?;
    let m = need(ctx.cfg.pick_opt(a.m, "M")?, "M")?;
    let r = ctx.cfg.pick(a.r, "r", 1.0)?;
    let p_ratio = ctx.cfg.pick(a.p_ratio, "p_ratio", 0.1)?;
    let prob = surface_problem(ctx, n, m, r, p_ratio, &a.params)?;
    prob.validate()?;
    let net = ctx.net(false)?;
    let rep = estimate_surface(&prob, &net)?;
    let dir = ctx.out_dir();
    for f in formats {
        match f {
            Format::Json => emit(
                dir.as_deref(),
                "estimate_surface.json",
                &json_text(&SurfaceOutput {
                    problem: &prob,
                    report: &rep,
                })?,
            )?,
            Format::Csv => {
                let row = SurfaceRow::from_result(n, m, r, p_ratio, &Ok(rep.clone()));
                emit(dir.as_deref(), "estimate_surface.csv", &to_csv(&[row])?)?
            }
            Format::Svg => unreachable!(),
        }
    }
    eprintln!(
        "surface N={n} M={m}: d={} k0={} K={:.3e} physical_qubits={} wall={}",
        rep.d,
        rep.k0,
        rep.k,
        rep.physical_qubits,
        human_duration(rep.wall_seconds)
    );
    Ok(())
}

#[derive(Serialize)]
struct ConcatOutput<'a> {
    config: &'a ConcatConfig,
    report: &'a ConcatReport,
}

fn estimate_concat_cmd(ctx: &Ctx, a: &ConcatEstimateArgs) -> Result<(), CliError> {
    let formats = ctx.formats(Format::Json)?;
    reject_svg(&formats, "estimate concat")?;
    let n = need(ctx.cfg.pick_opt(a.n, "N")?, "N")?;
    let m = need(ctx.cfg.pick_opt(a.m, "M")?, "M")?;
    let config = concat_config(ctx, &a.params)?;
    config.validate()?;
    let net = ctx.net(false)?;
    let rep = estimate_concat(n, m, &config, &net)?;
    let dir = ctx.out_dir();
    for f in formats {
        match f {
            Format::Json => emit(
                dir.as_deref(),
                "estimate_concat.json",
                &json_text(&ConcatOutput {
                    config: &config,
                    report: &rep,
                })?,
            )?,
            Format::Csv => {
                let row = ConcatRow::from_result(n, m, &Ok(rep.clone()));
                emit(dir.as_deref(), "estimate_concat.csv", &to_csv(&[row])?)?
            }
            Format::Svg => unreachable!(),
        }
    }
    eprintln!(
        "concat N={n} M={m}: ec={} level={} K={:.3e} physical_qubits={} wall={}",
        rep.ec_needed,
        rep.level,
        rep.k,
        rep.physical_qubits,
        human_duration(rep.wall_seconds)
    );
    Ok(())
}

// ---- sweep ------------------------------------------------------------------

/// Exit status of a sweep: failure only when every row failed.
fn sweep_status(errors: Vec<Option<ftqc_core::Error>>) -> Result<(), CliError> {
    let total = errors.len();
    let failed: Vec<ftqc_core::Error> = errors.into_iter().flatten().collect();
    if total > 0 && failed.len() == total {
        let first = failed.into_iter().next().expect("non-empty");
        return Err(CliError::Core(first));
    }
    if !failed.is_empty() {
        eprintln!(
            "{} of {total} rows failed; see the `error` column",
            failed.len()
        );
    }
    Ok(())
}

fn sweep_surface(ctx: &Ctx, a: &SurfaceSweepArgs) -> Result<(), CliError> {
    let formats = ctx.formats(Format::Csv)?;
    let dir = ctx.out_dir();
    if formats.contains(&Format::Svg) && dir.is_none() {
        return Err(CliError::Usage("svg output needs --out".into()));
    }
    let n = need(ctx.cfg.pick_opt(a.n, "N")?, "N")?;
    let ms = parse_m_range(&need(ctx.cfg.pick_opt(a.m.clone(), "sweep_M")?, "M")?)?;
    let rs = parse_list(&ctx.cfg.pick(a.r.clone(), "sweep_r", "1".to_string())?, "r")?;
    let ps = parse_list(
        &ctx.cfg
            .pick(a.p_ratio.clone(), "p_ratio", "0.1".to_string())?,
        "p_ratio",
    )?;

    let mut grid = Vec::new();
    for &p in &ps {
        for &r in &rs {
            for &m in &ms {
                let prob = surface_problem(ctx, n, m, r, p, &a.params)?;
                prob.validate()?;
                grid.push(prob);
            }
        }
    }
    let net = ctx.net(false)?;
    let results: Vec<Result<SurfaceReport, ftqc_core::Error>> = ctx
        .pool()?
        .install(|| grid.par_iter().map(|p| estimate_surface(p, &net)).collect());

    let rows: Vec<SurfaceRow> = grid
        .iter()
        .zip(&results)
        .map(|(p, res)| {
            let res = res.as_ref().cloned().map_err(|e| e.to_string());
            SurfaceRow::from_result(p.n, p.m, p.r, p.p_ratio, &res)
        })
        .collect();

    for f in &formats {
        match f {
            Format::Csv => emit(dir.as_deref(), "sweep_surface.csv", &to_csv(&rows)?)?,
            Format::Json => emit(dir.as_deref(), "sweep_surface.json", &json_text(&rows)?)?,
            Format::Svg => {
                let dir = dir.as_deref();
                let series = |get: &dyn Fn(&SurfaceRow) -> Option<f64>| -> Vec<Series> {
                    let mut out = Vec::new();
                    for &p in &ps {
                        for &r in &rs {
                            let label = if ps.len() > 1 {
                                format!("r = {r}, p/p_th = {p}")
                            } else {
                                format!("r = {r}")
                            };
                            let points = rows
                                .iter()
                                .filter(|row| row.r == r && row.p_ratio == p)
                                .filter_map(|row| get(row).map(|y| (row.m as f64, y)))
                                .collect();
                            out.push(Series { label, points });
                        }
                    }
                    out
                };
                let charts: [(&str, &str, &dyn Fn(&SurfaceRow) -> Option<f64>, bool); 4] = [
                    ("d", "code distance d", &|r| r.d.map(f64::from), false),
                    (
                        "physical_qubits",
                        "physical qubits",
                        &|r| r.physical_qubits.map(|q| q as f64),
                        true,
                    ),
                    ("K", "surface-code cycles K", &|r| r.k, true),
                    ("wall_seconds", "wall time (s)", &|r| r.wall_seconds, true),
                ];
                for (key, label, get, log) in charts {
                    let svg = line_chart(
                        &format!("{label} vs M (N = {n})"),
                        "M",
                        label,
                        &series(get),
                        log,
                    );
                    emit(dir, &format!("sweep_surface_{key}.svg"), &svg)?;
                }
            }
        }
    }
    sweep_status(results.into_iter().map(Result::err).collect())
}

fn sweep_concat(ctx: &Ctx, a: &ConcatSweepArgs) -> Result<(), CliError> {
    let formats = ctx.formats(Format::Csv)?;
    let dir = ctx.out_dir();
    if formats.contains(&Format::Svg) && dir.is_none() {
        return Err(CliError::Usage("svg output needs --out".into()));
    }
    let n = need(ctx.cfg.pick_opt(a.n, "N")?, "N")?;
    let ms = parse_m_range(&need(ctx.cfg.pick_opt(a.m.clone(), "sweep_M")?, "M")?)?;
    let config = concat_config(ctx, &a.params)?;
    config.validate()?;
    let net = ctx.net(false)?;
    let results: Vec<Result<ConcatReport, ftqc_core::Error>> = ctx.pool()?.install(|| {
        ms.par_iter()
            .map(|&m| estimate_concat(n, m, &config, &net))
            .collect()
    });
    let rows: Vec<ConcatRow> = ms
        .iter()
        .zip(&results)
        .map(|(&m, res)| {
            let res = res.as_ref().cloned().map_err(|e| e.to_string());
            ConcatRow::from_result(n, m, &res)
        })
        .collect();

    for f in &formats {
        match f {
            Format::Csv => emit(dir.as_deref(), "sweep_concat.csv", &to_csv(&rows)?)?,
            Format::Json => emit(dir.as_deref(), "sweep_concat.json", &json_text(&rows)?)?,
            Format::Svg => {
                let charts: [(&str, &str, &dyn Fn(&ConcatRow) -> Option<f64>, bool); 4] = [
                    (
                        "level",
                        "concatenation level",
                        &|r| r.level.map(f64::from),
                        false,
                    ),
                    (
                        "physical_qubits",
                        "physical qubits",
                        &|r| r.physical_qubits.map(|q| q as f64),
                        true,
                    ),
                    ("K", "gate steps K", &|r| r.k, true),
                    ("wall_seconds", "wall time (s)", &|r| r.wall_seconds, true),
                ];
                for (key, label, get, log) in charts {
                    let series = [Series {
                        label: format!("N = {n}"),
                        points: rows
                            .iter()
                            .filter_map(|r| get(r).map(|y| (r.m as f64, y)))
                            .collect(),
                    }];
                    let svg =
                        line_chart(&format!("{label} vs M (N = {n})"), "M", label, &series, log);
                    emit(dir.as_deref(), &format!("sweep_concat_{key}.svg"), &svg)?;
                }
            }
        }
    }
    sweep_status(results.into_iter().map(Result::err).collect())
}

// ---- simulate ---------------------------------------------------------------

#[derive(Serialize)]
struct SimRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: u32,
    tau: f64,
    oracle_mode: String,
    seed: u64,
    bits: String,
    phase_estimate: f64,
    energy_estimate: f64,
    k0: Option<u64>,
}

impl From<&IpeaRun> for SimRow {
    fn from(r: &IpeaRun) -> Self {
        SimRow {
            n: r.n,
            m: r.m,
            tau: r.tau,
            oracle_mode: r.oracle_mode.to_string(),
            seed: r.seed,
            bits: r.bits.iter().map(|b| char::from(b'0' + b)).collect(),
            phase_estimate: r.phase_estimate,
            energy_estimate: r.energy_estimate,
            k0: r.k0,
        }
    }
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let formats = ctx.formats(Format::Json)?;
    reject_svg(&formats, "simulate")?;
    let n = need(cfg.pick_opt(a.n, "N")?, "N")?;
    let m = need(cfg.pick_opt(a.m, "M")?, "M")?;
    let mode: OracleMode = cfg
        .pick(a.mode.clone(), "mode", "exact".to_string())?
        .parse()
        .map_err(|e: ftqc_core::Error| CliError::Usage(e.to_string()))?;
    let seeds = cfg.pick(a.seeds, "seeds", 1)?;
    let first = cfg.pick(a.seed, "seed", 0)?;
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let mut base = IpeaConfig::new(n, m, mode, first);
    base.tau = cfg.pick(a.tau, "tau", base.tau)?;
    base.k0 = cfg.pick_opt(a.k0, "k0")?;
    base.sk_eps = cfg.pick_opt(a.sk_eps, "sk_eps")?;
    if let Some(f) = cfg.pick_opt(a.overlap, "overlap")? {
        base.input = InputState::Depolarized { overlap: f };
    }
    let net = if mode == OracleMode::TrotterSk {
        Some(ctx.net(false)?)
    } else {
        None
    };
    let seed_list: Vec<u64> = (0..seeds).map(|i| first + i).collect();
    let runs: Vec<IpeaRun> = ctx.pool()?.install(|| {
        seed_list
            .par_iter()
            .map(|&s| {
                let mut c = base.clone();
                c.seed = s;
                ipea_run(&c, net.as_ref())
            })
            .collect::<ftqc_core::Result<Vec<_>>>()
    })?;

    let dir = ctx.out_dir();
    for f in formats {
        match f {
            Format::Json => {
                let mut text = String::new();
                for r in &runs {
                    text.push_str(&serde_json::to_string(r)?);
                    text.push('\n');
                }
                emit(dir.as_deref(), "simulate.jsonl", &text)?
            }
            Format::Csv => {
                let rows: Vec<SimRow> = runs.iter().map(SimRow::from).collect();
                emit(dir.as_deref(), "simulate.csv", &to_csv(&rows)?)?
            }
            Format::Svg => unreachable!(),
        }
    }
    let e0 = ground_energy_exact(n)?;
    let mean_err = runs
        .iter()
        .map(|r| (r.energy_estimate - e0).abs())
        .sum::<f64>()
        / runs.len() as f64;
    eprintln!(
        "simulate N={n} M={m} mode={mode}: {} runs, exact E0={e0:.6}, mean |E - E0| = {mean_err:.3e}",
        runs.len()
    );
    Ok(())
}

// ---- net --------------------------------------------------------------------

#[derive(Serialize)]
struct NetInfo {
    path: String,
    generators: Vec<String>,
    max_len: usize,
    dedup_tol: f64,
    entries: usize,
    longest_sequence: usize,
}

fn net_info_of(path: &Path, net: &BaseNet<f64>) -> NetInfo {
    let p = net.params();
    NetInfo {
        path: path.display().to_string(),
        generators: p.generators.iter().map(|g| g.to_string()).collect(),
        max_len: p.max_len,
        dedup_tol: p.dedup_tol,
        entries: net.len(),
        longest_sequence: net.entries().iter().map(|e| e.seq.len()).max().unwrap_or(0),
    }
}

fn net_build(ctx: &Ctx) -> Result<(), CliError> {
    let path = ctx.net_path();
    let net = BaseNet::build(ctx.net_params()?)?;
    net.save(&path)?;
    print!("{}", json_text(&net_info_of(&path, &net))?);
    Ok(())
}

fn net_info(ctx: &Ctx) -> Result<(), CliError> {
    let path = ctx.net_path();
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "no net cache at `{}`; set net_cache_path or run `ftqc net build`",
            path.display()
        )));
    }
    let net = BaseNet::load(&path)?;
    print!("{}", json_text(&net_info_of(&path, &net))?);
    Ok(())
}
