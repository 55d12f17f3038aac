//! Command-line front end for the `oswap` binary.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use oswap_core::clock::StreamKey;
use oswap_core::enumerate::{enumerate_discrete, DiscreteSpeed};
use oswap_core::error::Error;
use oswap_core::harness::{run_experiment, Experiment, Kind, Report};
use oswap_core::limits;
use oswap_core::lpp::{johansson_scaled, lpp_time};
use oswap_core::sim::{simulate, simulate_variant, SimConfig, Variant};
use oswap_core::stats::{ks_distance, mean};
use oswap_core::tasep::{check_coupling, simulate_tasep, Region, TasepConfig, WindowPolicy};
use oswap_core::tracy_widom::{PainleveConfig, PainleveSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "oswap", version, about = "Oriented swap process simulator, coupled exclusion processes and limit laws")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Master seed for every random stream [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of independent replicates (overrides per-command defaults)
    #[arg(long, global = true)]
    pub replicates: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for reports and tables
    #[arg(long, global = true, env = "OSWAP_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Output format on stdout [default: json]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with defaults for the global flags; flags given on the command line win
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Global flags after merging the config file and built-in defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub seed: u64,
    pub replicates: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the oriented swap process or one of its variants
    Simulate(SimulateArgs),
    /// Run exclusion processes from a step, or check their coupling to the swap process
    Tasep(TasepArgs),
    /// Evaluate a closed-form limit on a grid of points
    Limits(LimitsArgs),
    /// Tabulate the Tracy-Widom GUE distribution function
    Tw(TwArgs),
    /// Sample scaled last-passage times
    Lpp(LppArgs),
    /// Run verification suites and write their reports
    Verify(VerifyArgs),
    /// Recheck and summarize reports written by `verify`
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Number of particles
    #[arg(short = 'n', long)]
    pub n: usize,
    /// Time change of the process
    #[arg(long, default_value = "continuous-variable")]
    pub variant: String,
    /// Run length in time units for continuous variants [default: 2.5n]
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of steps for discrete variants
    #[arg(long)]
    pub steps: Option<usize>,
    /// Print the exact law after --steps steps instead of sampling (discrete variants, n <= 7)
    #[arg(long)]
    pub exact: bool,
    /// Scaled times s at which to record the configuration (time s*n)
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    /// Labels whose scaled trajectories are recorded at --snapshots times
    #[arg(long, value_delimiter = ',')]
    pub track: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct TasepArgs {
    /// Initial condition: particles on every site <= k
    #[arg(short = 'k', long, allow_negative_numbers = true)]
    pub k: i64,
    /// Run length in time units
    #[arg(long)]
    pub horizon: f64,
    /// Restrict to the interval FIRST:LAST instead of the whole line
    #[arg(long)]
    pub interval: Option<String>,
    /// Times at which to record the queue-length profile [default: the horizon]
    #[arg(long, value_delimiter = ',')]
    pub samples: Vec<f64>,
    /// Divide sites and queue lengths by this factor in the profile
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Check the coupling with the swap process on [1, N] instead of printing profiles
    #[arg(long, value_name = "N")]
    pub check_coupling: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitsArgs {
    /// inversion, gamma, lower-envelope, upper-envelope, phi-cdf, density, cumulative, kappa-cdf, southeast, w-pm, psi, tw-scaling
    #[arg(long)]
    pub quantity: String,
    /// Scaled times
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    pub s: Vec<f64>,
    /// Label fractions
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub y: Vec<f64>,
    /// Position fractions
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub x: Vec<f64>,
    /// System size for tw-scaling
    #[arg(short = 'n', long, default_value_t = 1000.0)]
    pub n: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TwArgs {
    /// Left end of the table
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    pub from: f64,
    /// Right end of the table
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub to: f64,
    /// Table spacing
    #[arg(long, default_value_t = 0.1)]
    pub spacing: f64,
    /// Integration step of the Painleve solver
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LppArgs {
    /// System size; the grid is k x (n-k)
    #[arg(short = 'n', long)]
    pub n: usize,
    /// Label; defaults to n/2
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// identities, coupling, statistical, all, or one experiment kind
    #[arg(long, default_value = "identities")]
    pub suite: String,
    /// Override the system size of every experiment in the suite
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    /// Override the scaled times
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
    /// Override the labels
    #[arg(short = 'k', long, value_delimiter = ',')]
    pub k: Vec<u32>,
    /// Override the main tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Report files or directories containing them [default: --out-dir]
    pub inputs: Vec<PathBuf>,
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: msg.into() }
}

type Run<T> = std::result::Result<T, Failure>;

pub fn command() -> clap::Command {
    Cli::command()
}

/// What a command prints: a JSON document, or a CSV table.
pub struct Output {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub code: i32,
}

impl Output {
    fn new(json: Value) -> Self {
        Output { json, header: vec![], rows: vec![], code: EXIT_OK }
    }

    fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }
}

/// Parses `args`, runs the command, writes to `out`/`err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn resolve(global: &GlobalArgs) -> Run<Resolved> {
    let file: GlobalArgs = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
        }
        None => GlobalArgs::default(),
    };
    Ok(Resolved {
        seed: global.seed.or(file.seed).unwrap_or(42),
        replicates: global.replicates.or(file.replicates),
        threads: global.threads.or(file.threads),
        out_dir: global.out_dir.clone().or(file.out_dir),
        format: global.format.or(file.format).unwrap_or_default(),
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Run<i32> {
    let cfg = resolve(&cli.global)?;
    if cfg.replicates == Some(0) {
        return Err(usage("--replicates must be positive"));
    }
    let pool = match cfg.threads {
        Some(0) => return Err(usage("--threads must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| usage(e.to_string()))?;

    let (name, args, output) = pool.install(|| -> Run<(&str, Value, Output)> {
        Ok(match &cli.command {
            Command::Simulate(a) => ("simulate", serde_json::to_value(a)?, cmd_simulate(a, &cfg)?),
            Command::Tasep(a) => ("tasep", serde_json::to_value(a)?, cmd_tasep(a, &cfg)?),
            Command::Limits(a) => ("limits", serde_json::to_value(a)?, cmd_limits(a)?),
            Command::Tw(a) => ("tw", serde_json::to_value(a)?, cmd_tw(a)?),
            Command::Lpp(a) => ("lpp", serde_json::to_value(a)?, cmd_lpp(a, &cfg)?),
            Command::Verify(a) => ("verify", serde_json::to_value(a)?, cmd_verify(a, &cfg)?),
            Command::Report(a) => ("report", serde_json::to_value(a)?, cmd_report(a, &cfg)?),
        })
    })?;

    let doc = json!({ "command": name, "config": cfg, "arguments": args, "result": output.json });
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{name}-run.json")), serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?,
        Format::Csv => {
            if output.header.is_empty() {
                return Err(usage(format!("`{name}` has no tabular output; use --format json")));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&output.header)?;
            for row in &output.rows {
                w.write_record(row)?;
            }
            out.write_all(&w.into_inner().map_err(|e| usage(e.to_string()))?)?;
        }
    }
    Ok(output.code)
}

fn num(x: f64) -> String {
    x.to_string()
}

fn cmd_simulate(a: &SimulateArgs, cfg: &Resolved) -> Run<Output> {
    let variant: Variant = a.variant.parse()?;
    let discrete = matches!(variant, Variant::DiscreteVariable | Variant::DiscreteFixed);
    if a.exact {
        let speed = match variant {
            Variant::DiscreteVariable => DiscreteSpeed::Variable,
            Variant::DiscreteFixed => DiscreteSpeed::Fixed,
            _ => return Err(usage("--exact needs a discrete variant")),
        };
        let steps = a.steps.ok_or_else(|| usage("--exact needs --steps"))?;
        let law = enumerate_discrete(a.n, steps, speed)?;
        let mut rows = Vec::new();
        let states: Vec<Value> = law
            .probs
            .iter()
            .map(|(state, p)| {
                let value = p.numer().to_string().parse::<f64>().unwrap_or(f64::NAN)
                    / p.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
                let label = state.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                rows.push(vec![label, p.to_string(), num(value)]);
                json!({ "state": state, "probability": p.to_string(), "value": value })
            })
            .collect();
        let json = json!({ "n": a.n, "steps": steps, "variant": variant, "distribution": states });
        return Ok(Output::new(json).table(&["state", "probability", "value"], rows));
    }

    if discrete && a.horizon.is_some() {
        return Err(usage("discrete variants take --steps, not --horizon"));
    }
    if !discrete && a.steps.is_some() {
        return Err(usage("continuous variants take --horizon, not --steps"));
    }
    let nf = a.n as f64;
    let duration = if discrete { a.steps.ok_or_else(|| usage("discrete variants need --steps"))? as f64 } else { a.horizon.unwrap_or(2.5 * nf) };
    let reps = cfg.replicates.unwrap_or(1);
    let times: Vec<f64> = a.snapshots.iter().map(|s| s * nf).collect();
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for r in 0..reps {
        let path = if variant == Variant::ContinuousVariable {
            let mut sc = SimConfig::new(a.n, duration, cfg.seed, r);
            sc.recorder.snapshot_times = times.clone();
            sc.recorder.tracked = a.track.clone();
            sc.recorder.trajectory_times = if a.track.is_empty() { vec![] } else { times.clone() };
            simulate(&sc)?
        } else {
            if !a.snapshots.is_empty() || !a.track.is_empty() {
                return Err(usage("--snapshots and --track need the continuous-variable variant"));
            }
            simulate_variant(a.n, duration, variant, StreamKey::new(cfg.seed, r))?
        };
        for &k in &a.track {
            for (s, x) in path.scaled_trajectory(k)? {
                rows.push(vec![num(r as f64), num(s), k.to_string(), num(x)]);
            }
        }
        let snapshots: Vec<Value> = path
            .snapshots
            .iter()
            .map(|sn| json!({ "s": sn.time / nf, "inversions": sn.inversions, "state": sn.state }))
            .collect();
        summaries.push(json!({
            "replicate": r,
            "applied": path.applied,
            "absorbed_at": path.absorbed_at,
            "finish": path.finish,
            "final_state": path.final_state,
            "snapshots": snapshots,
        }));
    }
    let json = json!({ "n": a.n, "variant": variant, "duration": duration, "replicates": summaries });
    Ok(Output::new(json).table(&["replicate", "s", "k", "position"], rows))
}

fn parse_interval(text: &str) -> Run<(i64, i64)> {
    let (a, b) = text.split_once(':').ok_or_else(|| usage("--interval expects FIRST:LAST"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| usage(format!("bad interval endpoint `{t}`")));
    Ok((parse(a)?, parse(b)?))
}

fn cmd_tasep(a: &TasepArgs, cfg: &Resolved) -> Run<Output> {
    let reps = cfg.replicates.unwrap_or(1);
    if let Some(n) = a.check_coupling {
        if a.k < 1 {
            return Err(usage("coupling checks need k >= 1"));
        }
        let mut reports = Vec::new();
        let mut failed = false;
        for r in 0..reps {
            let rep = check_coupling(n, a.k as u32, a.horizon, StreamKey::new(cfg.seed, r), &WindowPolicy::default())?;
            failed |= !rep.passed();
            reports.push(rep);
        }
        let rows = reports
            .iter()
            .map(|r| {
                vec![r.replicate.to_string(), r.events_checked.to_string(), r.failures().to_string(), r.passed().to_string()]
            })
            .collect();
        let mut o = Output::new(json!({ "passed": !failed, "reports": reports }))
            .table(&["replicate", "events_checked", "failures", "passed"], rows);
        if failed {
            o.code = EXIT_FAILED;
        }
        return Ok(o);
    }
    if !(a.scale > 0.0) {
        return Err(usage("--scale must be positive"));
    }
    let region = match &a.interval {
        Some(t) => {
            let (first, last) = parse_interval(t)?;
            Region::Interval { first, last }
        }
        None => Region::Line,
    };
    let samples = if a.samples.is_empty() { vec![a.horizon] } else { a.samples.clone() };
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for r in 0..reps {
        let tc = TasepConfig {
            k: a.k,
            region,
            horizon: a.horizon,
            key: StreamKey::new(cfg.seed, r),
            window: WindowPolicy::default(),
            sample_times: samples.clone(),
        };
        let run = simulate_tasep(&tc)?;
        let (lo, hi) = match region {
            Region::Interval { first, last } => (first - 1, last),
            Region::Line => (a.k - a.horizon.ceil() as i64 - 1, a.k + a.horizon.ceil() as i64 + 1),
        };
        for (t, c) in run.times.iter().zip(&run.configs) {
            for x in lo..=hi {
                rows.push(vec![num(r as f64), num(*t), num(x as f64 / a.scale), num(c.queue_length(x) as f64 / a.scale)]);
            }
        }
        runs.push(json!({
            "replicate": r,
            "applied": run.applied,
            "half_width": run.half_width,
            "retries": run.retries,
            "particles_right_of_k": run.configs.iter().map(|c| c.queue_length(a.k)).collect::<Vec<_>>(),
            "times": run.times,
        }));
    }
    Ok(Output::new(json!({ "runs": runs })).table(&["replicate", "time", "x", "queue_length"], rows))
}

fn grid3(a: &LimitsArgs) -> Vec<(f64, f64, f64)> {
    let mut v = Vec::new();
    for &s in &a.s {
        for &y in &a.y {
            for &x in &a.x {
                v.push((s, y, x));
            }
        }
    }
    v
}

fn cmd_limits(a: &LimitsArgs) -> Run<Output> {
    type Eval = Box<dyn Fn(f64, f64, f64) -> oswap_core::error::Result<Vec<f64>>>;
    // (uses s, uses y, uses x, value names, evaluator)
    let (use_s, use_y, use_x, names, eval): (bool, bool, bool, Vec<&str>, Eval) = match a.quantity.as_str() {
        "inversion" => (true, false, false, vec!["value"], Box::new(|s, _, _| Ok(vec![limits::inversion_limit(s)]))),
        "gamma" => (false, true, false, vec!["value"], Box::new(|_, y, _| Ok(vec![limits::gamma(y)]))),
        "lower-envelope" => (true, true, false, vec!["value"], Box::new(|s, y, _| Ok(vec![limits::lower_envelope(y, s)]))),
        "upper-envelope" => (true, true, false, vec!["value"], Box::new(|s, y, _| Ok(vec![limits::upper_envelope(y, s)]))),
        "phi-cdf" => (true, true, true, vec!["value"], Box::new(|s, y, x| Ok(vec![limits::phi_cdf(y, s, x)]))),
        "density" => (true, true, true, vec!["value"], Box::new(|s, y, x| Ok(vec![limits::density_f(s, x, y)]))),
        "cumulative" => (true, true, true, vec!["value"], Box::new(|s, y, x| Ok(vec![limits::cumulative_f(s, x, y)]))),
        "kappa-cdf" => (true, true, true, vec!["value"], Box::new(|s, y, x| Ok(vec![limits::kappa_cdf(s, x, y)]))),
        "southeast" => (true, true, true, vec!["value"], Box::new(|s, y, x| Ok(vec![limits::southeast_prob(s, x, y)?]))),
        "psi" => (true, true, false, vec!["value"], Box::new(|s, y, _| Ok(vec![limits::psi(y, s)]))),
        "w-pm" => (true, false, false, vec!["minus", "plus"], Box::new(|s, _, _| limits::w_pm(s).map(|(m, p)| vec![m, p]))),
        "tw-scaling" => {
            let n = a.n;
            (false, true, false, vec!["center", "scale"], Box::new(move |_, y, _| limits::tw_scaling(y, n).map(|t| vec![t.center, t.scale])))
        }
        other => return Err(usage(format!("unknown quantity `{other}`"))),
    };
    let mut points = Vec::new();
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (s, y, x) in grid3(a) {
        let coords: Vec<(&str, f64)> =
            [("s", s, use_s), ("y", y, use_y), ("x", x, use_x)].into_iter().filter(|c| c.2).map(|c| (c.0, c.1)).collect();
        let key: Vec<u64> = coords.iter().map(|c| c.1.to_bits()).collect();
        if !seen.insert(key) {
            continue;
        }
        let values = eval(s, y, x)?;
        let mut obj = serde_json::Map::new();
        let mut row = Vec::new();
        for (name, v) in &coords {
            obj.insert(name.to_string(), json!(v));
            row.push(num(*v));
        }
        for (name, v) in names.iter().zip(&values) {
            obj.insert(name.to_string(), json!(v));
            row.push(num(*v));
        }
        points.push(Value::Object(obj));
        rows.push(row);
    }
    let header: Vec<&str> = [("s", use_s), ("y", use_y), ("x", use_x)]
        .into_iter()
        .filter(|c| c.1)
        .map(|c| c.0)
        .chain(names.iter().copied())
        .collect();
    Ok(Output::new(json!({ "quantity": a.quantity, "points": points })).table(&header, rows))
}

fn cmd_tw(a: &TwArgs) -> Run<Output> {
    if !(a.spacing > 0.0) || !(a.to >= a.from) {
        return Err(usage("need --spacing > 0 and --to >= --from"));
    }
    let sol = PainleveSolution::solve(PainleveConfig { step: a.step, ..PainleveConfig::default() })?;
    let count = ((a.to - a.from) / a.spacing + 1e-9).floor() as usize;
    let mut table = Vec::new();
    let mut rows = Vec::new();
    for i in 0..=count {
        let z = a.from + i as f64 * a.spacing;
        let f = sol.f_tw(z)?;
        table.push(json!({ "z": z, "f_tw": f }));
        rows.push(vec![num(z), num(f)]);
    }
    let json = json!({ "mean": sol.mean()?, "median": sol.quantile(0.5)?, "max_residual": sol.max_residual(), "table": table });
    Ok(Output::new(json).table(&["z", "f_tw"], rows))
}

fn cmd_lpp(a: &LppArgs, cfg: &Resolved) -> Run<Output> {
    let k = a.k.unwrap_or(a.n / 2);
    if k == 0 || k >= a.n {
        return Err(usage("lpp needs 1 <= k < n"));
    }
    let y = k as f64 / a.n as f64;
    let reps = cfg.replicates.unwrap_or(100);
    let dims = (k, a.n - k);
    let samples: Vec<f64> = {
        use rayon::prelude::*;
        (0..reps)
            .into_par_iter()
            .map(|r| johansson_scaled(lpp_time(dims.0, dims.1, cfg.seed, r)?, y, a.n, dims))
            .collect::<oswap_core::error::Result<_>>()?
    };
    let sol = PainleveSolution::solve(PainleveConfig::default())?;
    let ks = ks_distance(&samples, |z| sol.f_tw(z).unwrap_or(0.0))?;
    let rows = samples.iter().map(|&v| vec![num(v)]).collect();
    let json = json!({ "rows": dims.0, "cols": dims.1, "y": y, "mean": mean(&samples)?, "ks_vs_tw": ks, "scaled_values": samples });
    Ok(Output::new(json).table(&["scaled_value"], rows))
}

const STATISTICAL: [Kind; 14] = [
    Kind::FirstFinish,
    Kind::Hydro,
    Kind::Inversions,
    Kind::Finishing,
    Kind::SecondClass,
    Kind::Trajectories,
    Kind::LimitConsistency,
    Kind::TwNumerics,
    Kind::TwFluct,
    Kind::Lpp,
    Kind::Sandwich,
    Kind::InverseSymmetry,
    Kind::VariantLaw,
    Kind::TasepDensity,
];

fn suite(name: &str) -> Run<Vec<Kind>> {
    Ok(match name {
        "identities" => vec![Kind::IdentitySuite],
        "coupling" => vec![Kind::CouplingSuite],
        "statistical" => STATISTICAL.to_vec(),
        "all" => Kind::ALL.to_vec(),
        other => vec![other.parse().map_err(|_| usage(format!("unknown suite `{other}`")))?],
    })
}

fn summary(reports: &[Report]) -> (Value, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    let list: Vec<Value> = reports
        .iter()
        .map(|r| {
            for v in &r.verdicts {
                rows.push(vec![
                    r.experiment.to_string(),
                    v.name.clone(),
                    num(v.observed),
                    num(v.target),
                    num(v.tolerance),
                    v.pass.to_string(),
                    v.soft.to_string(),
                ]);
            }
            json!({ "experiment": r.experiment, "passed": r.passed(), "verdicts": r.verdicts })
        })
        .collect();
    let all = reports.iter().all(Report::passed);
    (json!({ "passed": all, "reports": list }), rows)
}

const VERDICT_HEADER: [&str; 7] = ["experiment", "name", "observed", "target", "tolerance", "pass", "soft"];

fn cmd_verify(a: &VerifyArgs, cfg: &Resolved) -> Run<Output> {
    let kinds = suite(&a.suite)?;
    let mut reports = Vec::new();
    for kind in kinds {
        let mut exp = Experiment::new(kind, cfg.seed);
        if let Some(r) = cfg.replicates {
            exp.replicates = r;
        }
        if let Some(n) = a.n {
            exp.n = n;
        }
        if !a.s.is_empty() {
            exp.s = a.s.clone();
        }
        if !a.k.is_empty() {
            exp.k = a.k.clone();
        }
        exp.tolerance = a.tolerance.or(exp.tolerance);
        let report = run_experiment(&exp)?;
        if let Some(dir) = &cfg.out_dir {
            report.write(dir)?;
        }
        reports.push(report);
    }
    let (json, rows) = summary(&reports);
    let mut o = Output::new(json).table(&VERDICT_HEADER, rows);
    if !reports.iter().all(Report::passed) {
        o.code = EXIT_FAILED;
    }
    Ok(o)
}

fn collect_reports(path: &Path, into: &mut Vec<PathBuf>) -> Run<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
        entries.sort();
        for p in entries {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.ends_with(".json") && !name.ends_with("-run.json") {
                into.push(p);
            }
        }
        Ok(())
    } else if path.is_file() {
        into.push(path.to_path_buf());
        Ok(())
    } else {
        Err(usage(format!("no such report or directory: {}", path.display())))
    }
}

fn cmd_report(a: &ReportArgs, cfg: &Resolved) -> Run<Output> {
    let inputs = if a.inputs.is_empty() {
        vec![cfg.out_dir.clone().ok_or_else(|| usage("report needs input paths or --out-dir"))?]
    } else {
        a.inputs.clone()
    };
    let mut files = Vec::new();
    for p in &inputs {
        collect_reports(p, &mut files)?;
    }
    if files.is_empty() {
        return Err(usage("no reports found"));
    }
    let mut reports = Vec::new();
    for f in &files {
        let text = fs::read_to_string(f)?;
        let mut report: Report = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", f.display())))?;
        for v in &mut report.verdicts {
            v.pass = v.recheck();
        }
        reports.push(report);
    }
    let (json, rows) = summary(&reports);
    let mut o = Output::new(json).table(&VERDICT_HEADER, rows);
    if !reports.iter().all(Report::passed) {
        o.code = EXIT_FAILED;
    }
    Ok(o)
}
