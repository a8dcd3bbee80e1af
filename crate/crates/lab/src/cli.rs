//! Command-line grammar and the validated experiment configuration.

use std::fmt;
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use reward_axioms::search::validate_setup;
use reward_axioms::{AllocationRule, Axiom, Configuration, Semantics, Universe, UtilityFunction};

pub const SEED_ENV: &str = "REWARD_LAB_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "reward-lab",
    version,
    about = "Check, search and simulate block-reward allocation rules"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// `pass`, `fail`, or a manifest file of `rule axiom pass|fail` lines.
    #[arg(long, global = true)]
    expect: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = SEED_ENV)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Check axioms for one or more rules.
    Check(CheckArgs),
    /// Every axiom for every catalog rule, compared with the known claims.
    Matrix(MatrixArgs),
    /// Exhaustive search over rule tables.
    Search(SearchArgs),
    /// Risk-sensitive possibility and impossibility checks.
    Verify(VerifyArgs),
    /// Simulate the partial-solution protocol.
    Simulate(SimulateArgs),
    /// Share-estimate error against the partial-to-full ratio.
    Curve(CurveArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long = "rule", required = true, value_parser = parse_rule)]
    rules: Vec<AllocationRule>,
    /// Defaults to all seven.
    #[arg(long = "axiom", value_parser = parse_axiom)]
    axioms: Vec<Axiom>,
    #[arg(long, default_value = "4x8", value_parser = parse_universe)]
    universe: Universe,
    /// Utility class for collusion checks; omit for risk-neutral miners.
    #[arg(long = "utility", value_parser = parse_utility)]
    utilities: Vec<UtilityFunction>,
    /// Pay fractional rewards instead of running a lottery.
    #[arg(long)]
    deterministic: bool,
    /// Grid for fixed-fraction and lottery sharing schemes.
    #[arg(long, default_value_t = 16)]
    sharing_grid: u32,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long, default_value = "4x8", value_parser = parse_universe)]
    universe: Universe,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// 1: strong budget balance with weak collusion-proofness;
    /// 2: weak budget balance with strong collusion-proofness.
    #[arg(long)]
    theorem: u8,
    #[arg(long, default_value = "3x3", value_parser = parse_universe)]
    universe: Universe,
    #[arg(long, default_value_t = 6)]
    grid: u64,
    /// Remove one axiom from the set.
    #[arg(long, value_parser = parse_axiom)]
    drop: Option<Axiom>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// 3: concave utilities defeat every nonzero rule;
    /// 7: convex utilities keep the proportional rule collusion-proof.
    #[arg(long, conflicts_with = "deterministic")]
    theorem: Option<u8>,
    /// Deterministic proportional payouts against every utility.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, value_parser = parse_universe)]
    universe: Option<Universe>,
    #[arg(long = "utility", value_parser = parse_utility)]
    utilities: Vec<UtilityFunction>,
    /// Rules for the impossibility check; defaults to the catalog.
    #[arg(long = "rule", value_parser = parse_rule)]
    rules: Vec<AllocationRule>,
    #[arg(long, default_value_t = 16)]
    sharing_grid: u32,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "proportional", value_parser = parse_rule)]
    rule: AllocationRule,
    #[arg(long, value_parser = parse_rates)]
    rates: Configuration,
    #[arg(long = "M", default_value_t = 1024, value_parser = parse_power_of_two)]
    m: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    rho: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    #[arg(long)]
    deterministic: bool,
    /// Run the proportional rule under both semantics on the same events.
    #[arg(long)]
    compare: bool,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_parser = parse_rates)]
    rates: Configuration,
    #[arg(long = "M", value_delimiter = ',', default_value = "64,256,1024,4096", value_parser = parse_power_of_two)]
    ms: Vec<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    rho: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
}

fn parse_rule(s: &str) -> Result<AllocationRule, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_axiom(s: &str) -> Result<Axiom, String> {
    s.parse().map_err(|_| format!("unknown axiom `{s}`"))
}

fn parse_universe(s: &str) -> Result<Universe, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_utility(s: &str) -> Result<UtilityFunction, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_rates(s: &str) -> Result<Configuration, String> {
    let rates = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("`{t}` is not a positive integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Configuration::new(rates).map_err(|e| format!("{e}"))
}

fn parse_power_of_two(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(m) if m.is_power_of_two() => Ok(m),
        _ => Err(format!("`{s}` is not a power of two")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expect {
    Pass,
    Fail,
    Manifest(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Claim {
    /// Concave utilities: every nonzero rule fails something.
    RiskAverse,
    /// Convex utilities: the proportional rule passes utility-A4a.
    RiskSeeking,
    /// Deterministic payouts agree with risk-neutral verdicts.
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Command {
    Check {
        rules: Vec<AllocationRule>,
        axioms: Vec<Axiom>,
        universe: Universe,
        utilities: Vec<UtilityFunction>,
        sharing_grid: u32,
    },
    Matrix {
        universe: Universe,
    },
    Search {
        theorem: u8,
        universe: Universe,
        grid: u64,
        drop: Option<Axiom>,
    },
    Verify {
        claim: Claim,
        universe: Universe,
        utilities: Vec<UtilityFunction>,
        rules: Vec<AllocationRule>,
        sharing_grid: u32,
    },
    Simulate {
        rule: AllocationRule,
        rates: Configuration,
        m: u64,
        rho: u64,
        epochs: u64,
        compare: bool,
    },
    Curve {
        rates: Configuration,
        ms: Vec<u64>,
        rho: u64,
        epochs: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub expect: Option<Expect>,
    pub jobs: Option<usize>,
    pub seed: u64,
}

/// Why an argument list was rejected. `position` indexes the argument
/// list, program name excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub position: Option<usize>,
    pub token: Option<String>,
    pub message: String,
    /// Help and version requests surface here too.
    pub display_only: bool,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.position, &self.token) {
            (Some(p), Some(t)) => write!(f, "argument {} `{t}`: {}", p + 1, self.message),
            (None, Some(t)) => write!(f, "`{t}`: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn locate(args: &[String], token: &str) -> Option<usize> {
    args.iter()
        .position(|a| a == token)
        .or_else(|| args.iter().position(|a| a.ends_with(&format!("={token}"))))
        .or_else(|| args.iter().position(|a| a.contains(token)))
}

fn value_error(args: &[String], flag: &str, message: String) -> ConfigError {
    let position = args
        .iter()
        .position(|a| a == flag)
        .map(|p| p + 1)
        .filter(|&p| p < args.len());
    ConfigError {
        position,
        token: position
            .map(|p| args[p].clone())
            .or_else(|| Some(flag.to_string())),
        message,
        display_only: false,
    }
}

fn from_clap(args: &[String], err: clap::Error) -> ConfigError {
    use clap::error::ErrorKind;
    let display_only = matches!(
        err.kind(),
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
    ) || err.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand;
    let token = [
        ContextKind::InvalidValue,
        ContextKind::InvalidArg,
        ContextKind::InvalidSubcommand,
    ]
    .into_iter()
    .find_map(|k| match err.get(k) {
        Some(ContextValue::String(s)) => Some(s.clone()),
        Some(ContextValue::Strings(v)) => v.first().cloned(),
        _ => None,
    });
    let position = token.as_deref().and_then(|t| locate(args, t));
    let message = err.render().to_string();
    let message = if display_only {
        message
    } else {
        message
            .lines()
            .next()
            .unwrap_or_default()
            .trim_start_matches("error: ")
            .to_string()
    };
    ConfigError {
        position,
        token,
        message,
        display_only,
    }
}

/// Parses and validates arguments, program name excluded.
pub fn parse_config<I, S>(args: I) -> Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli =
        Cli::try_parse_from(std::iter::once("reward-lab".to_string()).chain(args.iter().cloned()))
            .map_err(|e| from_clap(&args, e))?;
    let with_semantics = |rules: Vec<AllocationRule>, det: bool| -> Vec<AllocationRule> {
        rules
            .into_iter()
            .map(|r| {
                if det {
                    r.with_semantics(Semantics::Deterministic)
                } else {
                    r
                }
            })
            .collect()
    };
    let command = match cli.command {
        CommandArgs::Check(a) => Command::Check {
            rules: with_semantics(a.rules, a.deterministic),
            axioms: if a.axioms.is_empty() {
                Axiom::ALL.to_vec()
            } else {
                a.axioms
            },
            universe: a.universe,
            utilities: a.utilities,
            sharing_grid: a.sharing_grid,
        },
        CommandArgs::Matrix(a) => Command::Matrix {
            universe: a.universe,
        },
        CommandArgs::Search(a) => {
            if !matches!(a.theorem, 1 | 2) {
                return Err(value_error(
                    &args,
                    "--theorem",
                    "search supports 1 or 2".into(),
                ));
            }
            if let Err(e) = validate_setup(&a.universe, a.grid) {
                let flag = if a.universe.max_total > reward_axioms::search::MAX_SEARCH_TOTAL
                    || a.universe.max_miners < a.universe.max_total as usize
                {
                    "--universe"
                } else {
                    "--grid"
                };
                return Err(value_error(&args, flag, e.to_string()));
            }
            Command::Search {
                theorem: a.theorem,
                universe: a.universe,
                grid: a.grid,
                drop: a.drop,
            }
        }
        CommandArgs::Verify(a) => {
            let claim = match (a.theorem, a.deterministic) {
                (None, true) => Claim::Deterministic,
                (Some(3), false) => Claim::RiskAverse,
                (Some(7), false) => Claim::RiskSeeking,
                (Some(_), _) => {
                    return Err(value_error(
                        &args,
                        "--theorem",
                        "verify supports 3 or 7".into(),
                    ))
                }
                (None, false) => {
                    return Err(ConfigError {
                        position: None,
                        token: None,
                        message: "verify needs --theorem or --deterministic".into(),
                        display_only: false,
                    })
                }
            };
            let universe = match (a.universe, claim) {
                (Some(u), _) => u,
                (None, Claim::RiskAverse) => Universe::new(3, 4).expect("valid"),
                (None, _) => Universe::new(4, 8).expect("valid"),
            };
            let mut utilities = a.utilities;
            if claim == Claim::RiskAverse {
                if let Some(bad) = utilities
                    .iter()
                    .find(|u| u.shape() != reward_axioms::Shape::StrictlyConcave)
                {
                    let token = bad.to_string();
                    return Err(ConfigError {
                        position: locate(&args, &token),
                        token: Some(token),
                        message: "the impossibility check needs strictly concave utilities".into(),
                        display_only: false,
                    });
                }
            }
            if utilities.is_empty() {
                utilities = default_utilities(claim);
            }
            Command::Verify {
                claim,
                universe,
                utilities,
                rules: a.rules,
                sharing_grid: a.sharing_grid,
            }
        }
        CommandArgs::Simulate(a) => Command::Simulate {
            rule: if a.deterministic {
                a.rule.with_semantics(Semantics::Deterministic)
            } else {
                a.rule
            },
            rates: a.rates,
            m: a.m,
            rho: a.rho,
            epochs: a.epochs,
            compare: a.compare,
        },
        CommandArgs::Curve(a) => Command::Curve {
            rates: a.rates,
            ms: a.ms,
            rho: a.rho,
            epochs: a.epochs,
        },
    };
    if cli.jobs == Some(0) {
        return Err(value_error(&args, "--jobs", "must be at least 1".into()));
    }
    let expect = cli.expect.map(|e| match e.as_str() {
        "pass" => Expect::Pass,
        "fail" => Expect::Fail,
        path => Expect::Manifest(PathBuf::from(path)),
    });
    Ok(ExperimentConfig {
        command,
        format: cli.format,
        output: cli.output,
        expect,
        jobs: cli.jobs,
        seed: cli.seed.unwrap_or(0),
    })
}

/// Parses a whitespace-separated argument list; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let args: Vec<String> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or_default())
        .flat_map(str::split_whitespace)
        .map(String::from)
        .collect();
    parse_config(args)
}

pub fn default_utilities(claim: Claim) -> Vec<UtilityFunction> {
    let p = |s: &str| s.parse::<UtilityFunction>().expect("valid utility");
    match claim {
        Claim::RiskAverse => vec![p("power:1/2"), p("power:9/10")],
        // The concave entry is a negative control.
        Claim::RiskSeeking => vec![p("power:11/10"), p("power:2"), p("power:1/2")],
        Claim::Deterministic => reward_axioms::utility::default_test_set(),
    }
}

fn rule_text(r: &AllocationRule) -> String {
    r.kind.to_string()
}

fn deterministic(rules: &[AllocationRule]) -> bool {
    rules
        .iter()
        .any(|r| r.semantics == Semantics::Deterministic)
}

impl ExperimentConfig {
    /// Arguments that parse back to this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |parts: &[&str]| out.extend(parts.iter().map(|s| s.to_string()));
        match &self.command {
            Command::Check {
                rules,
                axioms,
                universe,
                utilities,
                sharing_grid,
            } => {
                push(&["check"]);
                for r in rules {
                    push(&["--rule", &rule_text(r)]);
                }
                for a in axioms {
                    push(&["--axiom", &a.to_string()]);
                }
                push(&["--universe", &universe.to_string()]);
                for u in utilities {
                    push(&["--utility", &u.to_string()]);
                }
                if deterministic(rules) {
                    push(&["--deterministic"]);
                }
                push(&["--sharing-grid", &sharing_grid.to_string()]);
            }
            Command::Matrix { universe } => push(&["matrix", "--universe", &universe.to_string()]),
            Command::Search {
                theorem,
                universe,
                grid,
                drop,
            } => {
                push(&["search", "--theorem", &theorem.to_string()]);
                push(&[
                    "--universe",
                    &universe.to_string(),
                    "--grid",
                    &grid.to_string(),
                ]);
                if let Some(a) = drop {
                    push(&["--drop", &a.to_string()]);
                }
            }
            Command::Verify {
                claim,
                universe,
                utilities,
                rules,
                sharing_grid,
            } => {
                push(&["verify"]);
                match claim {
                    Claim::RiskAverse => push(&["--theorem", "3"]),
                    Claim::RiskSeeking => push(&["--theorem", "7"]),
                    Claim::Deterministic => push(&["--deterministic"]),
                }
                push(&["--universe", &universe.to_string()]);
                for u in utilities {
                    push(&["--utility", &u.to_string()]);
                }
                for r in rules {
                    push(&["--rule", &rule_text(r)]);
                }
                push(&["--sharing-grid", &sharing_grid.to_string()]);
            }
            Command::Simulate {
                rule,
                rates,
                m,
                rho,
                epochs,
                compare,
            } => {
                push(&[
                    "simulate",
                    "--rule",
                    &rule_text(rule),
                    "--rates",
                    &rates_text(rates),
                ]);
                push(&[
                    "--M",
                    &m.to_string(),
                    "--rho",
                    &rho.to_string(),
                    "--epochs",
                    &epochs.to_string(),
                ]);
                if rule.semantics == Semantics::Deterministic {
                    push(&["--deterministic"]);
                }
                if *compare {
                    push(&["--compare"]);
                }
            }
            Command::Curve {
                rates,
                ms,
                rho,
                epochs,
            } => {
                let ms: Vec<String> = ms.iter().map(u64::to_string).collect();
                push(&["curve", "--rates", &rates_text(rates), "--M", &ms.join(",")]);
                push(&["--rho", &rho.to_string(), "--epochs", &epochs.to_string()]);
            }
        }
        let format = match self.format {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        };
        push(&["--format", format, "--seed", &self.seed.to_string()]);
        if let Some(o) = &self.output {
            push(&["--output", &o.to_string_lossy()]);
        }
        match &self.expect {
            Some(Expect::Pass) => push(&["--expect", "pass"]),
            Some(Expect::Fail) => push(&["--expect", "fail"]),
            Some(Expect::Manifest(p)) => push(&["--expect", &p.to_string_lossy()]),
            None => {}
        }
        if let Some(j) = self.jobs {
            push(&["--jobs", &j.to_string()]);
        }
        out
    }
}

fn rates_text(h: &Configuration) -> String {
    h.rates()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
