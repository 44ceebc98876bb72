//! `contracts` — command-line front-end for the exact contract solver.
//!
//! Subcommands: `classify`, `demand`, `critical-values`, `solve`, `gen`,
//! `verify-bounds`, `bench`. Results go to stdout (JSON by default, `--output
//! table` for aligned text); diagnostics go to stderr through the logger,
//! filtered by the `CONTRACTS_LOG` env var (`error`, `info`, `trace`).
//!
//! Exit codes: 0 success, 2 parse error, 3 over a solver capacity cap,
//! 4 class/algorithm mismatch under `--strict`, 5 rejection-sampling budget
//! exhausted, 6 observed schedule above its closed-form bound.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use contracts_core::classes::{self, ClassError, ClassReport, MAX_CHAIN};
use contracts_core::cost::SPACost;
use contracts_core::critical::{
    brute_force_critical_values, enumerate_critical_values, optimal_from_schedule,
    ContractError, CriticalSchedule, OptimalContract,
};
use contracts_core::demand::{
    alt_greedy_gs_spa, alt_greedy_ultra_spa, brute_force_demand, greedy_gs2, greedy_gs_spa,
    greedy_ultra2, greedy_ultra_spa, greedy_up_to_t, greedy_wwl_symmetric, DemandError,
    DemandResult,
};
use contracts_core::generate::{self, BoundFamily, GenerateError};
use contracts_core::instance::{Instance, InstanceError};
use contracts_core::rational::Rational;
use contracts_core::reward::RewardFunction;
use contracts_core::structure::{count_bound, BoundKind};

#[derive(Parser)]
#[command(
    name = "contracts",
    version,
    about = "Exact solver for combinatorial principal-agent contracts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Fail (exit 4) when the chosen algorithm is not certified for the
    /// instance's class, instead of warning and falling back to brute force.
    #[arg(long, global = true)]
    strict: bool,
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
}

#[derive(Subcommand)]
enum Command {
    /// Report which tractable classes the instance's reward belongs to.
    Classify { file: PathBuf },
    /// The agent's best response at a given contract.
    Demand {
        file: PathBuf,
        /// Contract value as a rational, e.g. 3/10.
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algorithm: Algo,
    },
    /// Every contract value where the agent's best response changes.
    CriticalValues {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algorithm: Algo,
    },
    /// The principal's optimal contract.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algorithm: Algo,
    },
    /// Emit a random instance of a named family as JSON.
    Gen {
        #[arg(long, value_enum)]
        class: GenClass,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cost shape to pair with the reward.
        #[arg(long, value_enum, default_value_t = CostShape::Additive)]
        cost: CostShape,
    },
    /// Generate instances, compute their schedules by brute force, and check
    /// the maximum observed size against the closed-form bound.
    VerifyBounds {
        /// Instance family: ultra+additive, ultra+spa, gs+spa, wwl+symmetric.
        #[arg(long)]
        class: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the brute-force envelope against the greedy-oracle walk.
    Bench {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

/// Demand oracle selector. `auto` classifies the instance and picks the most
/// specific certified chain, falling back to brute force.
#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Algo {
    Auto,
    Brute,
    Gs2,
    Ultra2,
    UpToT,
    UltraSpa,
    AltUltraSpa,
    GsSpa,
    AltGsSpa,
    WwlSymmetric,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Brute => "brute",
            Algo::Gs2 => "gs2",
            Algo::Ultra2 => "ultra2",
            Algo::UpToT => "up-to-t",
            Algo::UltraSpa => "ultra-spa",
            Algo::AltUltraSpa => "alt-ultra-spa",
            Algo::GsSpa => "gs-spa",
            Algo::AltGsSpa => "alt-gs-spa",
            Algo::WwlSymmetric => "wwl-symmetric",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenClass {
    Additive,
    SymmetricConcave,
    BudgetAdditive,
    UnitDemand,
    Oxs,
    UltraRejectionSampled,
}

impl GenClass {
    fn name(self) -> &'static str {
        match self {
            GenClass::Additive => "additive",
            GenClass::SymmetricConcave => "symmetric-concave",
            GenClass::BudgetAdditive => "budget-additive",
            GenClass::UnitDemand => "unit-demand",
            GenClass::Oxs => "oxs",
            GenClass::UltraRejectionSampled => "ultra-rejection-sampled",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CostShape {
    Additive,
    Spa,
    Symmetric,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
    fn parse(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }
    fn capacity(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
    fn mismatch(message: impl Into<String>) -> Self {
        Self::new(4, message)
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::TableTooLarge { .. } => Failure::capacity(e.to_string()),
            _ => Failure::parse(e.to_string()),
        }
    }
}

impl From<ClassError> for Failure {
    fn from(e: ClassError) -> Self {
        Failure::capacity(e.to_string())
    }
}

impl From<DemandError> for Failure {
    fn from(e: DemandError) -> Self {
        match e {
            DemandError::TooLarge { .. } => Failure::capacity(e.to_string()),
            _ => Failure::new(1, e.to_string()),
        }
    }
}

impl From<ContractError> for Failure {
    fn from(e: ContractError) -> Self {
        match e {
            ContractError::TooLarge { .. } => Failure::capacity(e.to_string()),
            ContractError::Demand(inner) => inner.into(),
            _ => Failure::new(1, e.to_string()),
        }
    }
}

impl From<GenerateError> for Failure {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::RejectionBudget { .. } => Failure::new(5, e.to_string()),
            GenerateError::TooLarge { .. } => Failure::capacity(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("CONTRACTS_LOG", "warn"),
    )
    .format_timestamp(None)
    .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Classify { file } => cmd_classify(file, cli.output),
        Command::Demand { file, alpha, algorithm } => {
            cmd_demand(file, alpha, *algorithm, cli.strict, cli.output)
        }
        Command::CriticalValues { file, algorithm } => {
            cmd_critical_values(file, *algorithm, cli.strict, cli.output)
        }
        Command::Solve { file, algorithm } => {
            cmd_solve(file, *algorithm, cli.strict, cli.output)
        }
        Command::Gen { class, n, seed, cost } => cmd_gen(*class, *n, *seed, *cost),
        Command::VerifyBounds { class, n, count, seed } => {
            cmd_verify_bounds(class, *n, *count, *seed, cli.output)
        }
        Command::Bench { n, count, seed } => cmd_bench(*n, *count, *seed, cli.output),
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(Instance::from_json(&text)?)
}

fn parse_alpha(text: &str) -> Result<Rational, Failure> {
    text.parse::<Rational>()
        .map_err(|e| Failure::parse(format!("invalid contract value {text:?}: {e}")))
}

fn emit<T: Serialize>(value: &T, output: Output, table: String) -> Result<(), Failure> {
    match output {
        Output::Json => {
            let json = serde_json::to_string_pretty(value)
                .map_err(|e| Failure::new(1, e.to_string()))?;
            println!("{json}");
        }
        Output::Table => println!("{}", table.trim_end()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Algorithm selection

/// Is the algorithm's correctness guarantee established for this instance?
fn certified(algo: Algo, report: &ClassReport, cost: &SPACost) -> bool {
    match algo {
        Algo::Auto | Algo::Brute => true,
        Algo::Gs2 => report.gs && cost.is_additive_only(),
        Algo::Ultra2 | Algo::UpToT => report.ultra && cost.is_additive_only(),
        Algo::UltraSpa | Algo::AltUltraSpa => report.ultra,
        Algo::GsSpa | Algo::AltGsSpa => report.gs,
        Algo::WwlSymmetric => report.wwl && cost.is_symmetric_only(),
    }
}

/// The most specific certified chain for a classified instance.
fn auto_pick(report: &ClassReport, cost: &SPACost) -> Algo {
    if cost.is_additive_only() {
        if report.ultra {
            Algo::Ultra2
        } else if report.gs {
            Algo::Gs2
        } else {
            Algo::Brute
        }
    } else if cost.is_symmetric_only() {
        if report.wwl {
            Algo::WwlSymmetric
        } else {
            Algo::Brute
        }
    } else if report.ultra {
        Algo::UltraSpa
    } else if report.gs {
        Algo::GsSpa
    } else {
        Algo::Brute
    }
}

/// Guess by cost shape alone, for instances too large to classify.
fn shape_pick(cost: &SPACost) -> Algo {
    if cost.is_additive_only() {
        Algo::Ultra2
    } else if cost.is_symmetric_only() {
        Algo::WwlSymmetric
    } else {
        Algo::UltraSpa
    }
}

/// Settles which algorithm actually runs, applying the strict/fallback
/// policy for class/algorithm mismatches.
fn resolve_algorithm(
    requested: Algo,
    instance: &Instance,
    strict: bool,
) -> Result<Algo, Failure> {
    let f = instance.reward();
    let c = instance.cost();
    if requested == Algo::Brute {
        return Ok(Algo::Brute);
    }
    if f.n() > MAX_CHAIN {
        // Too large to classify; certification is impossible.
        return match requested {
            Algo::Auto => {
                let picked = shape_pick(c);
                log::warn!(
                    "instance too large to classify; assuming {} by cost shape",
                    picked.name()
                );
                Ok(picked)
            }
            named if strict => Err(Failure::capacity(format!(
                "cannot certify {} for n={}: classification caps at {MAX_CHAIN} actions",
                named.name(),
                f.n()
            ))),
            named => {
                log::info!("instance too large to classify; trusting {}", named.name());
                Ok(named)
            }
        };
    }
    let report = classes::classify(f)?;
    match requested {
        Algo::Auto => Ok(auto_pick(&report, c)),
        named if certified(named, &report, c) => Ok(named),
        named if strict => Err(Failure::mismatch(format!(
            "{} is not certified for this instance's class",
            named.name()
        ))),
        named => {
            log::warn!(
                "{} is not certified for this instance's class; falling back to brute force",
                named.name()
            );
            Ok(Algo::Brute)
        }
    }
}

/// Runs one demand query with the (already resolved) algorithm.
fn run_demand(
    algo: Algo,
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<DemandResult, DemandError> {
    match algo {
        Algo::Auto => unreachable!("auto is resolved before dispatch"),
        Algo::Brute => brute_force_demand(f, c, alpha).map(|d| d.result),
        Algo::Gs2 => greedy_gs2(alpha, f, c),
        Algo::Ultra2 => greedy_ultra2(alpha, f, c),
        Algo::UpToT => greedy_up_to_t(alpha, f.n(), f, c),
        Algo::UltraSpa => greedy_ultra_spa(alpha, f, c),
        Algo::AltUltraSpa => alt_greedy_ultra_spa(alpha, f, c),
        Algo::GsSpa => greedy_gs_spa(alpha, f, c),
        Algo::AltGsSpa => alt_greedy_gs_spa(alpha, f, c),
        Algo::WwlSymmetric => greedy_wwl_symmetric(alpha, f, c),
    }
}

/// Computes the full schedule with the resolved algorithm: the brute-force
/// envelope directly, or the oracle-driven walk for a chain algorithm.
fn run_schedule(
    algo: Algo,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<CriticalSchedule, Failure> {
    if algo == Algo::Brute {
        return Ok(brute_force_critical_values(f, c)?);
    }
    Ok(enumerate_critical_values(f, c, |alpha| run_demand(algo, alpha, f, c))?)
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_classify(file: &Path, output: Output) -> Result<(), Failure> {
    let instance = load_instance(file)?;
    let report = classes::classify(instance.reward())?;
    let mut table = String::new();
    for (name, flag) in [
        ("monotone", report.monotone),
        ("additive", report.additive),
        ("symmetric", report.symmetric),
        ("submodular", report.submodular),
        ("ultra", report.ultra),
        ("gs", report.gs),
        ("wwl", report.wwl),
    ] {
        let _ = writeln!(table, "{name:<12} {flag}");
    }
    emit(&report, output, table)
}

#[derive(Serialize)]
struct DemandReport {
    algorithm: &'static str,
    alpha: Rational,
    #[serde(flatten)]
    result: DemandResult,
}

fn cmd_demand(
    file: &Path,
    alpha: &str,
    algorithm: Algo,
    strict: bool,
    output: Output,
) -> Result<(), Failure> {
    let instance = load_instance(file)?;
    let alpha = parse_alpha(alpha)?;
    let algo = resolve_algorithm(algorithm, &instance, strict)?;
    let result = run_demand(algo, &alpha, instance.reward(), instance.cost())?;
    let mut table = String::new();
    let _ = writeln!(table, "algorithm    {}", algo.name());
    let _ = writeln!(table, "alpha        {alpha}");
    let _ = writeln!(table, "chosen       {:?}", result.chosen);
    let _ = writeln!(table, "utility      {}", result.utility);
    let _ = writeln!(table, "reward       {}", result.reward);
    let _ = writeln!(table, "ties         {}", result.tie_events);
    emit(&DemandReport { algorithm: algo.name(), alpha, result }, output, table)
}

/// The schedule payload deliberately omits the algorithm that produced it so
/// outputs can be compared bit-for-bit across oracles; the choice is logged.
#[derive(Serialize)]
struct ScheduleReport {
    critical_values: usize,
    #[serde(flatten)]
    schedule: CriticalSchedule,
}

fn schedule_table(schedule: &CriticalSchedule) -> String {
    let mut table = String::new();
    let _ = writeln!(table, "initial      {:?}", schedule.initial);
    let _ = writeln!(table, "{:<20} {:<14} after", "alpha", "before");
    for b in &schedule.breakpoints {
        let _ = writeln!(
            table,
            "{:<20} {:<14} {:?}",
            b.alpha.to_string(),
            format!("{:?}", b.before),
            b.after
        );
    }
    table
}

fn cmd_critical_values(
    file: &Path,
    algorithm: Algo,
    strict: bool,
    output: Output,
) -> Result<(), Failure> {
    let instance = load_instance(file)?;
    let algo = resolve_algorithm(algorithm, &instance, strict)?;
    log::info!("computing the schedule with {}", algo.name());
    let schedule = run_schedule(algo, instance.reward(), instance.cost())?;
    let table = schedule_table(&schedule);
    let report = ScheduleReport { critical_values: schedule.count(), schedule };
    emit(&report, output, table)
}

/// Like [`ScheduleReport`], algorithm-free so greedy and brute-force runs of
/// the same instance emit identical bytes.
#[derive(Serialize)]
struct SolveReport {
    critical_values: usize,
    #[serde(flatten)]
    contract: OptimalContract,
}

fn cmd_solve(
    file: &Path,
    algorithm: Algo,
    strict: bool,
    output: Output,
) -> Result<(), Failure> {
    let instance = load_instance(file)?;
    let algo = resolve_algorithm(algorithm, &instance, strict)?;
    log::info!("solving with {}", algo.name());
    let schedule = run_schedule(algo, instance.reward(), instance.cost())?;
    let contract = optimal_from_schedule(instance.reward(), instance.cost(), &schedule);
    let mut table = String::new();
    let _ = writeln!(table, "alpha             {}", contract.alpha);
    let _ = writeln!(table, "best_response     {:?}", contract.best_response);
    let _ = writeln!(table, "principal_utility {}", contract.principal_utility);
    let _ = writeln!(table, "agent_utility     {}", contract.agent_utility);
    let _ = writeln!(table, "critical_values   {}", schedule.count());
    let report = SolveReport { critical_values: schedule.count(), contract };
    emit(&report, output, table)
}

fn cmd_gen(class: GenClass, n: usize, seed: u64, cost: CostShape) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::parse("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reward = match class {
        GenClass::Additive => generate::additive_reward(n, &mut rng),
        GenClass::SymmetricConcave => generate::symmetric_concave_reward(n, &mut rng),
        GenClass::BudgetAdditive => generate::budget_additive_reward(n, &mut rng),
        GenClass::UnitDemand => generate::unit_demand_reward(n, &mut rng),
        GenClass::Oxs => generate::oxs_reward(n, &mut rng),
        GenClass::UltraRejectionSampled => generate::ultra_rejection_reward(n, &mut rng)?,
    };
    let cost = match cost {
        CostShape::Additive => generate::additive_cost(n, &mut rng),
        CostShape::Spa => generate::spa_cost(n, &mut rng),
        CostShape::Symmetric => generate::symmetric_cost(n, &mut rng),
    };
    let label = format!("{}-n{n}-s{seed}", class.name());
    let instance = Instance::new(reward, cost, label)
        .map_err(|e| Failure::new(1, e.to_string()))?;
    println!("{}", instance.to_json()?);
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    class: String,
    n: usize,
    count: usize,
    seed: u64,
    max_observed: usize,
    bound: usize,
    ok: bool,
}

fn cmd_verify_bounds(
    class: &str,
    n: usize,
    count: usize,
    seed: u64,
    output: Output,
) -> Result<(), Failure> {
    let family: BoundFamily = class
        .parse()
        .map_err(|e: String| Failure::parse(format!("{e}; expected one of {}",
            BoundFamily::ALL.map(|f| f.name()).join(", "))))?;
    if n > 10 {
        return Err(Failure::parse(format!("verify-bounds caps at n=10, got {n}")));
    }
    if n < 1 {
        return Err(Failure::parse("n must be at least 1"));
    }
    let kind = match family {
        BoundFamily::UltraAdditive => BoundKind::UltraAdditive,
        BoundFamily::UltraSpa | BoundFamily::GsSpa => BoundKind::Spa,
        BoundFamily::WwlSymmetric => BoundKind::SymmetricCost,
    };
    let bound = count_bound(kind, n);
    // One generator stream per instance index keeps results independent of
    // batch size: instance k of seed s is the same in every run.
    let mut max_observed = 0usize;
    for k in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let (f, c) = generate::draw_instance(family, n, &mut rng);
        let schedule = brute_force_critical_values(&f, &c)?;
        max_observed = max_observed.max(schedule.count());
    }
    let ok = max_observed <= bound;
    let report = BoundsReport {
        class: family.name().to_string(),
        n,
        count,
        seed,
        max_observed,
        bound,
        ok,
    };
    let mut table = String::new();
    let _ = writeln!(table, "{:<16} {:>3} {:>7} {:>13} {:>7}  ok", "class", "n", "count", "max_observed", "bound");
    let _ = writeln!(
        table,
        "{:<16} {:>3} {:>7} {:>13} {:>7}  {}",
        report.class, n, count, max_observed, bound, ok
    );
    emit(&report, output, table)?;
    if !ok {
        return Err(Failure::new(
            6,
            format!("observed {max_observed} critical values, bound is {bound}"),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchReport {
    n: usize,
    count: usize,
    envelope_ms_total: f64,
    oracle_walk_ms_total: f64,
    schedules_equal: bool,
}

fn cmd_bench(n: usize, count: usize, seed: u64, output: Output) -> Result<(), Failure> {
    if n > MAX_CHAIN {
        return Err(Failure::capacity(format!("bench caps at n={MAX_CHAIN}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut envelope_ms = 0.0f64;
    let mut walk_ms = 0.0f64;
    let mut equal = true;
    for _ in 0..count {
        let (f, c) = generate::draw_instance(BoundFamily::UltraAdditive, n, &mut rng);
        let start = Instant::now();
        let brute = brute_force_critical_values(&f, &c)?;
        envelope_ms += start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let walked = enumerate_critical_values(&f, &c, |a| greedy_ultra2(a, &f, &c))?;
        walk_ms += start.elapsed().as_secs_f64() * 1e3;
        equal &= walked == brute;
    }
    let report = BenchReport {
        n,
        count,
        envelope_ms_total: envelope_ms,
        oracle_walk_ms_total: walk_ms,
        schedules_equal: equal,
    };
    let table = format!(
        "instances      {count} (n={n})\nenvelope       {envelope_ms:.2} ms\noracle walk    {walk_ms:.2} ms\nequal          {equal}"
    );
    emit(&report, output, table)
}
