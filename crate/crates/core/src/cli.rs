//! Batch command-line front end.
//!
//! Every run is determined by an [`ExperimentConfig`]; flags map one-to-one
//! onto its fields and `--config <file>` loads the same structure from JSON
//! (explicit flags override the file). Each command writes a JSON report
//! that embeds the config and tool version, with no timestamps, so equal
//! configs give byte-identical reports.
//!
//! Exit status: 0 on success, 2 on a coding failure (the failure is in the
//! report), 1 on invalid input.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::Bits;
use crate::codec::{decode, encode};
use crate::error::Error;
use crate::mltest::{self, FailureEvent};
use crate::partition::{self, PartitionSystem, DEFAULT_COUNT_DIGIT_BOUND};
use crate::ratio::{self, Rational};
use crate::schedule::{self, DensityKind, LevelKind, LevelSchedule};
use crate::tree::{generate_complement_tree, FiniteTree};

pub const TOOL: &str = "randjoin";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default horizon for the `m_n > 5·log₂ n` comparison in `bounds-table`.
pub const DEFAULT_GAP_HORIZON: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ScheduleReport,
    TreeGen,
    TreePrune,
    PsSample,
    PsName,
    Encode,
    Decode,
    Roundtrip,
    BoundsTable,
    Mc,
    FindN0,
}

#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,

    /// Level kind: exponential, nlogn, scaled-nlogn:<c> or custom:<l0,l1,..>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<String>,
    /// Horizon N for generated level kinds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Density kind: inverse-square (default) or custom:<p/q,..>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub densities: Option<String>,
    /// Slack bits per naming block.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naming_slack: Option<u32>,

    /// Tree file to load.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<PathBuf>,
    /// Measure removed when generating a tree, as p/q.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_budget: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_seed: Option<u64>,
    /// Prune the tree to the schedule densities before use.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prune: Option<bool>,

    /// Partition-system name bits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Seed for a uniformly random name of length u_N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name_seed: Option<u64>,
    /// Partition-system file to load.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<PathBuf>,
    /// Seed for a uniformly sampled partition system.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_seed: Option<u64>,
    /// Partition-system height (default N).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,

    /// Payload bits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    /// Coded string to decode.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<String>,
    /// Start coding at the failure horizon n0 of the system.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto_start: Option<bool>,

    /// Test level n for `mc` (default: every level with a next level in the tree).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Failure event counted by `mc`: any, 0 or 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    /// Horizon of the gap-condition comparison in `bounds-table`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_horizon: Option<usize>,
    /// Refuse system counts above this many decimal digits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_digits: Option<usize>,

    /// Global seed, used where no specific seed is given.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// JSON report path (default stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// CSV table path for `bounds-table` and `mc`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($f:ident),* $(,)?) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f; } )*
    };
}

impl ExperimentConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: ExperimentConfig) -> Self {
        overlay!(self, over; command, levels, n_max, densities, naming_slack, tree, tree_budget,
            tree_seed, prune, name, name_seed, system, system_seed, height, z, y, sigma0, tau0,
            auto_start, level, trials, event, gap_horizon, max_digits, seed, out, csv, tree_out,
            system_out);
        self
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "randjoin",
    version,
    about = "Partition-system coding and failure-test experiments"
)]
struct Cli {
    /// Command to run; may instead come from --config.
    command: Option<Command>,

    /// JSON config file; flags given alongside override its fields.
    #[arg(long = "config")]
    config_file: Option<PathBuf>,

    #[command(flatten)]
    config: ExperimentConfig,
}

/// A failed run: exit status and diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub message: String,
    pub report: Option<Value>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure {
        exit: 1,
        message: msg.into(),
        report: None,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        invalid(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses a level kind such as `scaled-nlogn:6` or `custom:0,1,2`.
pub fn parse_levels(text: &str) -> CliResult<LevelKind> {
    let (head, arg) = text.split_once(':').unwrap_or((text, ""));
    Ok(match (head, arg) {
        ("exponential", "") => LevelKind::Exponential,
        ("nlogn", "") => LevelKind::NLogN,
        ("scaled-nlogn", c) => LevelKind::ScaledNLogN(
            c.parse()
                .map_err(|_| invalid(format!("bad scale factor in {text:?}")))?,
        ),
        ("custom", list) => LevelKind::Custom(
            list.split(',')
                .map(|v| v.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid(format!("bad level list in {text:?}")))?,
        ),
        _ => return Err(invalid(format!("unknown level kind {text:?}"))),
    })
}

pub fn parse_densities(text: &str) -> CliResult<DensityKind> {
    match text.split_once(':') {
        None if text == "inverse-square" => Ok(DensityKind::InverseSquare),
        Some(("custom", list)) => Ok(DensityKind::Custom(
            list.split(',')
                .map(ratio::parse_pq)
                .collect::<crate::Result<Vec<_>>>()?,
        )),
        _ => Err(invalid(format!("unknown density kind {text:?}"))),
    }
}

fn schedule_of(cfg: &ExperimentConfig) -> CliResult<LevelSchedule> {
    let levels = cfg
        .levels
        .as_deref()
        .ok_or_else(|| invalid("--levels is required for this command"))?;
    let kind = parse_levels(levels)?;
    let n_max = match (&kind, cfg.n_max) {
        (LevelKind::Custom(l), None) => l.len().saturating_sub(1),
        (_, Some(n)) => n,
        (_, None) => return Err(invalid("--n-max is required for generated level kinds")),
    };
    let dens = parse_densities(cfg.densities.as_deref().unwrap_or("inverse-square"))?;
    let s = schedule::make_schedule(kind, n_max, dens)?;
    Ok(match cfg.naming_slack {
        Some(c) => s.with_naming_slack(c),
        None => s,
    })
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn parse_bits(flag: &str, v: &str) -> CliResult<Bits> {
    v.parse().map_err(|e: Error| invalid(format!("--{flag}: {e}")))
}

fn opt_bits(flag: &str, v: &Option<String>) -> CliResult<Bits> {
    v.as_deref().map_or(Ok(Bits::empty()), |v| parse_bits(flag, v))
}

/// The tree from `--tree`, or generated from `--tree-budget`/`--tree-seed`
/// (full tree when neither is given), optionally pruned.
fn tree_of(cfg: &ExperimentConfig, s: &LevelSchedule) -> CliResult<FiniteTree> {
    let t = match &cfg.tree {
        Some(path) => FiniteTree::parse(&read_file(path)?)?,
        None => {
            let budget = match &cfg.tree_budget {
                Some(b) => ratio::parse_pq(b)?,
                None => Rational::from_integer(0.into()),
            };
            generate_complement_tree(s, &budget, cfg.tree_seed.unwrap_or(cfg.seed()))?
        }
    };
    if cfg.prune == Some(true) {
        Ok(t.prune_to_density(s)?)
    } else {
        Ok(t)
    }
}

fn random_name(s: &LevelSchedule, height: usize, seed: u64) -> CliResult<Bits> {
    let len = s
        .naming_length(height)
        .ok_or_else(|| invalid(format!("naming length u_{height} is not tabulated")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len).map(|_| rng.next_u32() & 1 == 1).collect())
}

fn name_of(cfg: &ExperimentConfig, s: &LevelSchedule, height: usize) -> CliResult<Option<Bits>> {
    match (&cfg.name, cfg.name_seed) {
        (Some(n), _) => Ok(Some(parse_bits("name", n)?)),
        (None, Some(seed)) => Ok(Some(random_name(s, height, seed)?)),
        (None, None) => Ok(None),
    }
}

fn system_of(cfg: &ExperimentConfig, s: &LevelSchedule) -> CliResult<PartitionSystem> {
    let height = cfg.height.unwrap_or(s.horizon());
    if let Some(path) = &cfg.system {
        let ps = PartitionSystem::parse(&read_file(path)?, s)?;
        if let partition::Validation::Invalid(v) = ps.validate() {
            return Err(invalid(format!(
                "system file violates {:?} at σ = {}",
                v.clause, v.sigma
            )));
        }
        return Ok(ps);
    }
    if let Some(name) = name_of(cfg, s, height)? {
        return Ok(partition::name_to_system_height(&name, s, height)?);
    }
    Ok(partition::sample_uniform(
        s,
        height,
        cfg.system_seed.unwrap_or(cfg.seed()),
    )?)
}

fn failure_event(cfg: &ExperimentConfig) -> CliResult<FailureEvent> {
    match cfg.event.as_deref().unwrap_or("any") {
        "any" => Ok(FailureEvent::Any),
        "0" => Ok(FailureEvent::Class(0)),
        "1" => Ok(FailureEvent::Class(1)),
        other => Err(invalid(format!("--event must be any, 0 or 1, got {other:?}"))),
    }
}

/// One row of the `bounds-table`/`mc` CSV.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub ell_n: u64,
    pub m_n: Option<u64>,
    pub q_n: String,
    pub sum_exact: Option<String>,
    pub paper_bound: Option<String>,
    pub satisfied: Option<bool>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

fn write_csv(path: &Path, rows: &[ExperimentRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| invalid(e.to_string()))?;
    }
    w.flush().map_err(|e| invalid(e.to_string()))
}

fn level_rows(
    t: Option<&FiniteTree>,
    s: &LevelSchedule,
    levels: impl Iterator<Item = usize>,
) -> CliResult<(Vec<ExperimentRow>, Vec<Value>)> {
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for n in levels {
        let mut row = ExperimentRow {
            n,
            ell_n: s.level(n),
            m_n: (n < s.horizon()).then(|| s.gap(n)),
            q_n: ratio::to_pq(s.density(n)),
            ..Default::default()
        };
        if let Some(t) = t {
            if n < s.horizon() && s.level(n + 1) as usize <= t.top_level() {
                let lb = mltest::level_failure_bound(t, s, n)?;
                row.sum_exact = Some(ratio::to_pq(&lb.sum_exact));
                row.paper_bound = Some(ratio::to_pq(&lb.power2_bound));
                row.satisfied = Some(lb.satisfied);
                bounds.push(serde_json::to_value(&lb).expect("serializable"));
            }
        }
        rows.push(row);
    }
    Ok((rows, bounds))
}

fn cmd_schedule_report(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let rep = schedule::convergence_report(&s);
    Ok(json!({ "schedule": s, "convergence": rep }))
}

fn tree_summary(t: &FiniteTree, s: &LevelSchedule) -> Value {
    json!({
        "top_level": t.top_level(),
        "leaf_count": t.leaf_count(),
        "measure": ratio::to_pq(&t.measure()),
        "two_extension": t.check_two_extension(s).holds(),
        "tree": t.to_text(),
    })
}

fn cmd_tree_gen(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let t = tree_of(cfg, &s)?;
    if let Some(p) = &cfg.tree_out {
        write_file(p, &t.to_text())?;
    }
    Ok(json!({ "schedule": s, "tree": tree_summary(&t, &s) }))
}

fn cmd_tree_prune(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let before = tree_of(
        &ExperimentConfig {
            prune: None,
            ..cfg.clone()
        },
        &s,
    )?;
    let after = before.prune_to_density(&s)?;
    if let Some(p) = &cfg.tree_out {
        write_file(p, &after.to_text())?;
    }
    let q_sum: Rational = s.densities()[..s.horizon()].iter().sum();
    let loss = before.measure() - after.measure();
    Ok(json!({
        "schedule": s,
        "before": tree_summary(&before, &s),
        "after": tree_summary(&after, &s),
        "measure_loss": ratio::to_pq(&loss),
        "loss_bound": ratio::to_pq(&q_sum),
        "loss_within_bound": loss <= q_sum,
    }))
}

fn system_summary(ps: &PartitionSystem, cfg: &ExperimentConfig) -> CliResult<Value> {
    let digits = cfg.max_digits.unwrap_or(DEFAULT_COUNT_DIGIT_BOUND);
    let count = partition::count_systems(ps.schedule(), ps.height(), digits)
        .map(|c| c.to_string())
        .ok();
    let validation = match ps.validate() {
        partition::Validation::Valid => json!({ "valid": true }),
        partition::Validation::Invalid(v) => json!({ "valid": false, "violation": v }),
    };
    if let Some(p) = &cfg.system_out {
        write_file(p, &ps.to_text())?;
    }
    Ok(json!({
        "height": ps.height(),
        "system_count": count,
        "validation": validation,
        "system": ps.to_text(),
    }))
}

fn cmd_ps_sample(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let height = cfg.height.unwrap_or(s.horizon());
    let seed = cfg.system_seed.unwrap_or(cfg.seed());
    let ps = partition::sample_uniform(&s, height, seed)?;
    Ok(json!({ "schedule": s, "seed": seed, "system": system_summary(&ps, cfg)? }))
}

fn cmd_ps_name(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let name = match cfg.height {
        Some(h) => name_of(cfg, &s, h)?,
        None => name_of(cfg, &s, s.horizon())?,
    }
    .ok_or_else(|| invalid("--name or --name-seed is required"))?;
    let ps = match cfg.height {
        Some(h) => partition::name_to_system_height(&name, &s, h)?,
        None => partition::name_to_system(&name, &s)?,
    };
    let distortion = partition::naming_distortion(&s, ps.height())?;
    Ok(json!({
        "schedule": s,
        "name": name,
        "name_bits_used": s.naming_length(ps.height()),
        "distortion": distortion,
        "system": system_summary(&ps, cfg)?,
    }))
}

/// `(σ₀, τ₀)` from flags, or from the failure horizon with `--auto-start`.
fn start_of(cfg: &ExperimentConfig, ps: &PartitionSystem, t: &FiniteTree) -> CliResult<(Bits, Bits, Option<usize>)> {
    if cfg.auto_start == Some(true) {
        let n0 = mltest::find_n0_in(ps, t)?
            .ok_or_else(|| invalid("the system fails at the last level; no start point exists"))?;
        let (sigma, tau) =
            mltest::start_point(ps, t, n0).ok_or_else(|| invalid(format!("no tree node at level ℓ_{n0}")))?;
        return Ok((sigma, tau, Some(n0)));
    }
    Ok((opt_bits("sigma0", &cfg.sigma0)?, opt_bits("tau0", &cfg.tau0)?, None))
}

fn coding_failure(e: Error, context: Value) -> Failure {
    match e {
        Error::CodingFailure { step, class_bit } => Failure {
            exit: 2,
            message: e.to_string(),
            report: Some(json!({
                "status": "coding_failure",
                "failure": { "step": step, "class_bit": class_bit, "message": e.to_string() },
                "context": context,
            })),
        },
        other => other.into(),
    }
}

fn cmd_encode(cfg: &ExperimentConfig, with_decode: bool) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let t = tree_of(cfg, &s)?;
    let ps = system_of(cfg, &s)?;
    let z = opt_bits("z", &cfg.z)?;
    let (sigma0, tau0, n0) = start_of(cfg, &ps, &t)?;
    let context = json!({ "sigma0": sigma0, "tau0": tau0, "n0": n0, "z": z });
    let (y, trace) = encode(&z, &ps, &t, &sigma0, &tau0).map_err(|e| coding_failure(e, context.clone()))?;
    let mut out = json!({ "status": "ok", "sigma0": sigma0, "tau0": tau0, "n0": n0, "z": z, "y": y, "trace": trace });
    if with_decode {
        let recovered = decode(&ps, &y, &sigma0, &tau0)?;
        out["recovered"] = json!(recovered);
        out["match"] = json!(recovered == z);
    }
    Ok(out)
}

fn cmd_decode(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let ps = system_of(cfg, &s)?;
    let y = parse_bits("y", cfg.y.as_deref().ok_or_else(|| invalid("--y is required"))?)?;
    let sigma0 = opt_bits("sigma0", &cfg.sigma0)?;
    let tau0 = opt_bits("tau0", &cfg.tau0)?;
    let z = decode(&ps, &y, &sigma0, &tau0)?;
    Ok(json!({ "y": y, "sigma0": sigma0, "tau0": tau0, "z": z }))
}

fn cmd_bounds_table(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let rep = schedule::convergence_report(&s);
    let tree = if cfg.tree.is_some() || cfg.tree_budget.is_some() {
        Some(tree_of(cfg, &s)?)
    } else {
        None
    };
    let (rows, level_bounds) = level_rows(tree.as_ref(), &s, 0..=s.horizon())?;
    if let Some(p) = &cfg.csv {
        write_csv(p, &rows)?;
    }
    let gap = schedule::gap_condition_findings(cfg.gap_horizon.unwrap_or(DEFAULT_GAP_HORIZON))?;
    let first_satisfied = rep.level_bound.first_true;
    Ok(json!({
        "schedule": s,
        "first_satisfied_level": first_satisfied,
        "convergence": rep,
        "rows": rows,
        "level_bounds": level_bounds,
        "gap_condition": gap,
    }))
}

fn cmd_mc(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let t = tree_of(cfg, &s)?;
    let trials = cfg.trials.unwrap_or(1000);
    let seed = cfg.seed();
    let event = failure_event(cfg)?;
    let levels: Vec<usize> = match cfg.level {
        Some(n) => vec![n],
        None => (0..s.horizon())
            .filter(|&n| s.level(n + 1) as usize <= t.top_level())
            .collect(),
    };
    let (mut rows, level_bounds) = level_rows(Some(&t), &s, levels.iter().copied())?;
    let mut estimates = Vec::new();
    for (row, &n) in rows.iter_mut().zip(&levels) {
        let est = mltest::mc_failure_estimate(&t, &s, n, trials, seed, event)?;
        row.mc_estimate = Some(est.estimate);
        row.mc_stderr = Some(est.stderr);
        row.trials = Some(trials);
        row.seed = Some(seed);
        estimates.push(est);
    }
    if let Some(p) = &cfg.csv {
        write_csv(p, &rows)?;
    }
    Ok(json!({ "schedule": s, "rows": rows, "level_bounds": level_bounds, "estimates": estimates }))
}

fn cmd_find_n0(cfg: &ExperimentConfig) -> CliResult<Value> {
    let s = schedule_of(cfg)?;
    let t = tree_of(cfg, &s)?;
    let name = name_of(cfg, &s, s.horizon())?.ok_or_else(|| invalid("--name or --name-seed is required"))?;
    let ps = partition::name_to_system_height(&name, &s, s.horizon())?;
    let n0 = mltest::find_n0_in(&ps, &t)?;
    let failures: Vec<Value> = (0..s.horizon())
        .filter_map(|n| {
            mltest::level_failure_witness(&ps, &t, n)
                .map(|(tau, bit)| json!({ "level": n, "tau": tau, "class_bit": bit }))
        })
        .collect();
    let start = n0.and_then(|n| mltest::start_point(&ps, &t, n));
    Ok(json!({
        "name": name,
        "n0": n0,
        "start": start.map(|(sigma, tau)| json!({ "sigma0": sigma, "tau0": tau })),
        "failing_levels": failures,
    }))
}

/// Runs one config and returns its report.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<Value> {
    let command = cfg.command.ok_or_else(|| invalid("no command given"))?;
    let result = match command {
        Command::ScheduleReport => cmd_schedule_report(cfg),
        Command::TreeGen => cmd_tree_gen(cfg),
        Command::TreePrune => cmd_tree_prune(cfg),
        Command::PsSample => cmd_ps_sample(cfg),
        Command::PsName => cmd_ps_name(cfg),
        Command::Encode => cmd_encode(cfg, false),
        Command::Decode => cmd_decode(cfg),
        Command::Roundtrip => cmd_encode(cfg, true),
        Command::BoundsTable => cmd_bounds_table(cfg),
        Command::Mc => cmd_mc(cfg),
        Command::FindN0 => cmd_find_n0(cfg),
    };
    let wrap = |result: Value| {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": command,
            "config": cfg,
            "result": result,
        })
    };
    match result {
        Ok(v) => Ok(wrap(v)),
        Err(Failure {
            exit,
            message,
            report: Some(r),
        }) => Err(Failure {
            exit,
            message,
            report: Some(wrap(r)),
        }),
        Err(f) => Err(f),
    }
}

/// Resolves the config from parsed flags and an optional config file.
fn resolve(cli: Cli) -> CliResult<ExperimentConfig> {
    let base = match &cli.config_file {
        Some(p) => serde_json::from_str::<ExperimentConfig>(&read_file(p)?)
            .map_err(|e| invalid(format!("bad config {}: {e}", p.display())))?,
        None => ExperimentConfig::default(),
    };
    let mut over = cli.config;
    over.command = cli.command;
    Ok(base.overlay(over))
}

fn emit(report: &Value, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).expect("serializable") + "\n";
    match out {
        Some(p) => write_file(p, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| invalid(e.to_string())),
    }
}

/// Entry point shared by the binary and tests; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.exit;
        }
    };
    match execute(&cfg) {
        Ok(report) => match emit(&report, cfg.out.as_deref()) {
            Ok(()) => 0,
            Err(f) => {
                eprintln!("error: {}", f.message);
                f.exit
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(r) = &f.report {
                if let Err(e) = emit(r, cfg.out.as_deref()) {
                    eprintln!("error: {}", e.message);
                }
            }
            f.exit
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_specs() {
        assert_eq!(parse_levels("exponential").unwrap(), LevelKind::Exponential);
        assert_eq!(parse_levels("scaled-nlogn:6").unwrap(), LevelKind::ScaledNLogN(6));
        assert_eq!(parse_levels("custom:0,1,2").unwrap(), LevelKind::Custom(vec![0, 1, 2]));
        assert!(parse_levels("custom:0,x").is_err());
        assert!(parse_levels("cubic").is_err());
        assert_eq!(
            parse_densities("custom:1/3,1/2").unwrap(),
            DensityKind::Custom(vec![ratio::ratio(1, 3), ratio::ratio(1, 2)])
        );
    }

    #[test]
    fn overlay_prefers_explicit_flags() {
        let base = ExperimentConfig {
            levels: Some("exponential".into()),
            n_max: Some(4),
            ..Default::default()
        };
        let over = ExperimentConfig {
            n_max: Some(8),
            ..Default::default()
        };
        let merged = base.overlay(over);
        assert_eq!(merged.levels.as_deref(), Some("exponential"));
        assert_eq!(merged.n_max, Some(8));
    }
}
