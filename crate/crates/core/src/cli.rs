//! Command-line front end.
//!
//! Every report embeds the tool version, the fully resolved configuration
//! and (where sampling happens) the seed, so re-running with the embedded
//! values reproduces the report byte for byte. Reports carry no timestamp.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::engine::Agent;
use crate::engine::{
    evolve_with, run_algorithmic_model, CardSet, EngineConfig, EvolutionPath, StrategyParams,
};
use crate::equilibrium::{
    enumerate_2x2_pure_ne, find_pure_grid_equilibria, sweep_against, sweep_full,
    three_param_deviation_probe, StrategyGrid, ThreeParamGrid, EQUILIBRIUM_TOL,
};
use crate::error::Error;
use crate::games::{expected_payoffs, taxi_matrix, PayoffMatrix, PdParams, TaxiParams};
use crate::protocol::{
    build_meta_matrix, classify_explained, run_sessions, summarize, GameSetting, MetaChoice,
    MetaStrategy,
};

pub const TOOL: &str = "aewl";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the directory reports go to when no
/// explicit output path is given.
pub const OUTPUT_DIR_ENV: &str = "AEWL_OUTPUT_DIR";

/// Typed-in angles this close outside a bound (e.g. `1.5708` for π/2) are
/// snapped onto it.
pub const ANGLE_SNAP: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "aewl",
    version,
    about = "Amended EWL quantum Prisoner's Dilemma toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the algorithmic model once.
    Simulate(SimulateArgs),
    /// Expected-payoff surface over the strategy grid (CSV).
    Sweep(SweepArgs),
    /// Pure Nash equilibria on the strategy grid.
    Equilibrium(EquilibriumArgs),
    /// Simulate repeated independent sessions of the participation meta-game.
    Protocol(ProtocolArgs),
    /// Classify a one-shot PD setting into types 1 to 5.
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Entanglement γ in radians, within [0, π/2].
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub gamma: f64,
    /// PD payoffs as T,R,P,S.
    #[arg(long, default_value = "5,3,1,0", conflicts_with = "taxi")]
    pub payoffs: String,
    /// Taxi game rewards and cost as R2,R1,R0,c (replaces --payoffs).
    #[arg(long)]
    pub taxi: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Agent 1 strategy: THETA,PHI in radians, or C, D, I.
    #[arg(long, allow_hyphen_values = true)]
    pub s1: String,
    /// Agent 2 strategy.
    #[arg(long, allow_hyphen_values = true)]
    pub s2: String,
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Agent 1 card texts as COOPERATE,DEFECT.
    #[arg(long, default_value = "cooperate,defect")]
    pub cards1: String,
    #[arg(long, default_value = "cooperate,defect")]
    pub cards2: String,
    /// Also evaluate the full-matrix path and report the discrepancy.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid as THETA_STEPSxPHI_STEPS.
    #[arg(long, default_value = "33x17")]
    pub grid: String,
    #[command(flatten)]
    pub game: GameArgs,
    /// Agent 2's fixed strategy (ignored with --full).
    #[arg(long, default_value = "C", allow_hyphen_values = true)]
    pub opponent: String,
    /// Emit the full cross product of grid profiles.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EquilibriumArgs {
    #[arg(long, default_value = "33x17")]
    pub grid: String,
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = EQUILIBRIUM_TOL)]
    pub tol: f64,
    /// Probe each equilibrium with three-parameter deviations by agent 1.
    #[arg(long)]
    pub probe: bool,
    /// Probe grid as THETAxPHIxALPHA.
    #[arg(long, default_value = "17x9x9")]
    pub probe_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// Agent 1 policy: participate[:STRATEGY] or withdraw[:MESSAGE].
    #[arg(long, default_value = "participate:C")]
    pub p1: String,
    #[arg(long, default_value = "participate:C")]
    pub p2: String,
    #[arg(long, default_value = "cooperate,defect")]
    pub cards1: String,
    #[arg(long, default_value = "cooperate,defect")]
    pub cards2: String,
    /// Number of sessions.
    #[arg(long, short, default_value_t = 1000)]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Grid used to value mutual participation in the meta-game matrix.
    #[arg(long, default_value = "33x17")]
    pub grid: String,
    /// JSON-lines session log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub arbitrator: bool,
    /// Strategies are messages sent through channels (not actions).
    #[arg(long)]
    pub messages: bool,
    #[arg(long)]
    pub communicate: bool,
    /// Agents can construct the model and observe each other's participation.
    #[arg(long)]
    pub observation: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage and range errors, 3 for protocol errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::UnrecognizedMessage { .. } | Error::Protocol(_)) => 3,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}

/// Where a piece of output goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Stdout,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub target: Target,
    pub contents: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn snap(value: f64, lo: f64, hi: f64) -> f64 {
    if value < lo && lo - value <= ANGLE_SNAP {
        lo
    } else if value > hi && value - hi <= ANGLE_SNAP {
        hi
    } else {
        value
    }
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("cannot parse {what} {s:?}: {e}")))?;
    if values.len() != n {
        return Err(usage(format!(
            "{what} needs {n} comma-separated values, got {s:?}"
        )));
    }
    Ok(values)
}

/// `THETA,PHI` in radians, or one of the aliases `C`, `D`, `I`.
pub fn parse_strategy(s: &str) -> Result<StrategyParams, CliError> {
    match s.trim() {
        "C" => return Ok(StrategyParams::QUANTUM_COOPERATE),
        "D" => return Ok(StrategyParams::FLIP),
        "I" => return Ok(StrategyParams::IDENTITY),
        _ => {}
    }
    let v = parse_floats(s, 2, "strategy")?;
    Ok(StrategyParams::new(
        snap(v[0], 0.0, PI),
        snap(v[1], 0.0, FRAC_PI_2),
    )?)
}

fn parse_grid(s: &str) -> Result<StrategyGrid, CliError> {
    let parts = parse_dims(s, 2)?;
    Ok(StrategyGrid::new(parts[0], parts[1])?)
}

fn parse_dims(s: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let parts = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("cannot parse grid {s:?}: {e}")))?;
    if parts.len() != n {
        return Err(usage(format!("grid needs {n} dimensions, got {s:?}")));
    }
    Ok(parts)
}

fn parse_cards(s: &str) -> Result<CardSet, CliError> {
    let (c, d) = s
        .split_once(',')
        .ok_or_else(|| usage(format!("cards must be COOPERATE,DEFECT, got {s:?}")))?;
    Ok(CardSet::new(c, d)?)
}

fn parse_policy(s: &str, cards: CardSet) -> Result<MetaStrategy, CliError> {
    let (head, rest) = match s.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (s, None),
    };
    match head {
        "participate" => {
            let params = parse_strategy(rest.unwrap_or("C"))?;
            Ok(MetaStrategy::participate(params, cards))
        }
        "withdraw" => Ok(MetaStrategy::Withdraw {
            cards,
            message: rest.map(str::to_owned),
        }),
        _ => Err(usage(format!(
            "policy must be participate[:STRATEGY] or withdraw[:MESSAGE], got {s:?}"
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
struct GameConfig {
    gamma: f64,
    payoffs: PayoffMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    taxi: Option<TaxiParams>,
}

fn resolve_game(args: &GameArgs) -> Result<(EngineConfig, GameConfig), CliError> {
    let gamma = snap(args.gamma, 0.0, FRAC_PI_2);
    let cfg = EngineConfig::new(gamma, 0)?;
    let (payoffs, taxi) = match &args.taxi {
        Some(t) => {
            let v = parse_floats(t, 4, "taxi parameters")?;
            let p = TaxiParams::new(v[0], v[1], v[2], v[3])?;
            (taxi_matrix(&p), Some(p))
        }
        None => {
            let v = parse_floats(&args.payoffs, 4, "payoffs")?;
            (
                PayoffMatrix::pd(PdParams {
                    t: v[0],
                    r: v[1],
                    p: v[2],
                    s: v[3],
                }),
                None,
            )
        }
    };
    Ok((
        cfg,
        GameConfig {
            gamma,
            payoffs,
            taxi,
        },
    ))
}

fn resolve_target(out: &Option<PathBuf>, default_name: &str) -> Target {
    match out {
        Some(p) => Target::File(p.clone()),
        None => match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Target::File(PathBuf::from(dir).join(default_name)),
            _ => Target::Stdout,
        },
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn header(command: &str) -> serde_json::Value {
    json!({ "tool": TOOL, "version": VERSION, "command": command })
}

fn strategy_json(s: &StrategyParams) -> serde_json::Value {
    json!([s.theta(), s.phi()])
}

/// Runs a parsed command and returns what should be written where.
pub fn execute(cli: &Cli) -> Result<Vec<Output>, CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Equilibrium(a) => equilibrium(a),
        Command::Protocol(a) => protocol(a),
        Command::Classify(a) => classify(a),
    }
}

fn simulate(a: &SimulateArgs) -> Result<Vec<Output>, CliError> {
    let s1 = parse_strategy(&a.s1)?;
    let s2 = parse_strategy(&a.s2)?;
    let (cfg, game) = resolve_game(&a.game)?;
    let seed = a.seed.unwrap_or_else(rand::random);
    let cfg = cfg.with_seed(seed);
    let cards1 = parse_cards(&a.cards1)?;
    let cards2 = parse_cards(&a.cards2)?;

    let run = run_algorithmic_model(&s1, &s2, &cards1, &cards2, &cfg);
    let payoffs = game.payoffs.payoff(run.outcome);
    let expected = expected_payoffs(&game.payoffs, &run.distribution);
    let mut report = header("simulate");
    report["config"] = json!({
        "s1": strategy_json(&s1),
        "s2": strategy_json(&s2),
        "game": game,
        "cards1": cards1,
        "cards2": cards2,
        "verify": a.verify,
    });
    report["seed"] = json!(seed);
    report["distribution"] = json!(run.distribution);
    report["outcome"] = json!(run.outcome);
    report["messages"] = json!([run.messages.0.text, run.messages.1.text]);
    report["payoffs"] = json!([payoffs.0, payoffs.1]);
    report["expected_payoffs"] = json!([expected.0, expected.1]);
    if a.verify {
        let full = evolve_with(&s1, &s2, &cfg, EvolutionPath::FullMatrix);
        report["verification"] = json!({
            "full_matrix_distribution": full,
            "max_abs_diff": full.max_abs_diff(&run.distribution),
        });
    }
    Ok(vec![Output {
        target: resolve_target(&a.out, "simulate.json"),
        contents: to_json(&report),
    }])
}

fn sweep(a: &SweepArgs) -> Result<Vec<Output>, CliError> {
    let grid = parse_grid(&a.grid)?;
    let (cfg, game) = resolve_game(&a.game)?;
    let (rows, mode) = if a.full {
        (sweep_full(&game.payoffs, &cfg, &grid), "full".to_string())
    } else {
        let opp = parse_strategy(&a.opponent)?;
        (
            sweep_against(&opp, &game.payoffs, &cfg, &grid),
            format!("against opponent={},{}", opp.theta(), opp.phi()),
        )
    };
    let p = game.payoffs.cells();
    let mut csv = String::new();
    let _ = writeln!(csv, "# {TOOL} {VERSION} sweep");
    let _ = writeln!(
        csv,
        "# config: grid={}x{} gamma={} cells=CC:{},{};CD:{},{};DC:{},{};DD:{},{} mode={mode}",
        grid.theta_steps(),
        grid.phi_steps(),
        game.gamma,
        p[0][0].0,
        p[0][0].1,
        p[0][1].0,
        p[0][1].1,
        p[1][0].0,
        p[1][0].1,
        p[1][1].0,
        p[1][1].1,
    );
    let _ = writeln!(csv, "# rows: {}", rows.len());
    let _ = writeln!(
        csv,
        "# deterministic: expected payoffs only, no sampling, no seed"
    );
    csv.push_str("theta1,phi1,theta2,phi2,u1,u2\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.theta1, r.phi1, r.theta2, r.phi2, r.u1, r.u2
        );
    }
    Ok(vec![Output {
        target: resolve_target(&a.out, "sweep.csv"),
        contents: csv,
    }])
}

fn equilibrium(a: &EquilibriumArgs) -> Result<Vec<Output>, CliError> {
    let grid = parse_grid(&a.grid)?;
    let (cfg, game) = resolve_game(&a.game)?;
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(usage(format!("tol must be nonnegative, got {}", a.tol)));
    }
    let reports = find_pure_grid_equilibria(&game.payoffs, &cfg, &grid, a.tol);
    let mut report = header("equilibrium");
    report["config"] = json!({
        "grid": grid,
        "game": game,
        "tol": a.tol,
        "probe": a.probe,
        "probe_grid": a.probe_grid,
    });
    report["count"] = json!(reports.len());
    report["equilibria"] = json!(reports);
    if a.probe {
        let dims = parse_dims(&a.probe_grid, 3)?;
        let grid3 = ThreeParamGrid::new(dims[0], dims[1], dims[2])?;
        let probes: Vec<_> = reports
            .iter()
            .map(|r| {
                let p =
                    three_param_deviation_probe(r.profile, Agent::One, &game.payoffs, &cfg, &grid3);
                json!({
                    "profile": [strategy_json(&r.profile.0), strategy_json(&r.profile.1)],
                    "deviation": p.strategy,
                    "payoff": p.payoff,
                    "baseline": p.baseline,
                    "gain": p.gain,
                    "profitable": p.profitable(a.tol),
                })
            })
            .collect();
        report["three_param_probes"] = json!(probes);
    }
    Ok(vec![Output {
        target: resolve_target(&a.out, "equilibrium.json"),
        contents: to_json(&report),
    }])
}

fn protocol(a: &ProtocolArgs) -> Result<Vec<Output>, CliError> {
    let (cfg, game) = resolve_game(&a.game)?;
    let seed = a.seed.unwrap_or_else(rand::random);
    let cfg = cfg.with_seed(seed);
    let grid = parse_grid(&a.grid)?;
    let p1 = parse_policy(&a.p1, parse_cards(&a.cards1)?)?;
    let p2 = parse_policy(&a.p2, parse_cards(&a.cards2)?)?;
    if a.n == 0 {
        return Err(usage("n must be at least 1"));
    }

    let records = run_sessions(&p1, &p2, a.n, &game.payoffs, &cfg)?;
    let summary = summarize(&records);

    let meta = match build_meta_matrix(&game.payoffs, &cfg, &grid) {
        Ok(matrix) => {
            let ne: Vec<_> = enumerate_2x2_pure_ne(&matrix)
                .into_iter()
                .map(|(r, c)| [MetaChoice::from_index(r), MetaChoice::from_index(c)])
                .collect();
            let cells = matrix.cells();
            json!({
                "cells": {
                    "participate,participate": [cells[0][0].0, cells[0][0].1],
                    "participate,withdraw": [cells[0][1].0, cells[0][1].1],
                    "withdraw,participate": [cells[1][0].0, cells[1][0].1],
                    "withdraw,withdraw": [cells[1][1].0, cells[1][1].1],
                },
                "nash_equilibria": ne,
            })
        }
        Err(Error::InvalidPayoffs(_)) => serde_json::Value::Null,
        Err(e) => return Err(e.into()),
    };

    let mut report = header("protocol");
    report["config"] = json!({
        "p1": a.p1,
        "p2": a.p2,
        "cards1": a.cards1,
        "cards2": a.cards2,
        "n": a.n,
        "game": game,
        "grid": grid,
    });
    report["seed"] = json!(seed);
    report["summary"] = json!(summary);
    report["meta_game"] = meta;

    let mut outputs = vec![Output {
        target: resolve_target(&a.out, "protocol.json"),
        contents: to_json(&report),
    }];
    let log_target = match &a.log {
        Some(p) => Some(Target::File(p.clone())),
        None => match resolve_target(&None, "protocol.sessions.jsonl") {
            Target::Stdout => None,
            t => Some(t),
        },
    };
    if let Some(target) = log_target {
        let mut lines = String::new();
        for r in &records {
            lines.push_str(&serde_json::to_string(r).expect("records serialize"));
            lines.push('\n');
        }
        outputs.push(Output {
            target,
            contents: lines,
        });
    }
    Ok(outputs)
}

fn classify(a: &ClassifyArgs) -> Result<Vec<Output>, CliError> {
    let setting = GameSetting::new(a.arbitrator, a.messages, a.communicate, a.observation)?;
    let c = classify_explained(&setting);
    let mut report = header("classify");
    report["config"] = json!(setting);
    report["type"] = json!(c.pd_type.to_string());
    report["conditions"] = json!(c.conditions);
    report["model_applicable"] = json!(c.pd_type.model_applicable());
    Ok(vec![Output {
        target: resolve_target(&a.out, "classify.json"),
        contents: to_json(&report),
    }])
}

/// Writes outputs; files get their parent directories created.
pub fn write_outputs(outputs: &[Output]) -> Result<(), CliError> {
    use std::io::Write;
    for o in outputs {
        match &o.target {
            Target::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(o.contents.as_bytes())
                    .map_err(|source| CliError::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })?;
            }
            Target::File(path) => {
                let io = |source| CliError::Io {
                    path: path.clone(),
                    source,
                };
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(io)?;
                }
                std::fs::write(path, &o.contents).map_err(io)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_aliases_and_snapping() {
        assert_eq!(
            parse_strategy("C").unwrap(),
            StrategyParams::QUANTUM_COOPERATE
        );
        assert_eq!(parse_strategy("D").unwrap(), StrategyParams::FLIP);
        assert_eq!(parse_strategy("I").unwrap(), StrategyParams::IDENTITY);
        assert_eq!(
            parse_strategy("0,1.5708").unwrap(),
            StrategyParams::QUANTUM_COOPERATE
        );
        assert_eq!(
            parse_strategy("3.1416,1.5708").unwrap(),
            StrategyParams::FLIP
        );
        let err = parse_strategy("4,0").unwrap_err();
        assert!(err.to_string().contains("theta out of range"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(parse_strategy("1").is_err());
        assert!(parse_strategy("x,y").is_err());
    }

    #[test]
    fn policy_grammar() {
        let cards = CardSet::standard();
        assert_eq!(
            parse_policy("participate", cards.clone()).unwrap(),
            MetaStrategy::participate(StrategyParams::QUANTUM_COOPERATE, cards.clone())
        );
        assert_eq!(
            parse_policy("withdraw:cooperate", cards.clone()).unwrap(),
            MetaStrategy::Withdraw {
                cards: cards.clone(),
                message: Some("cooperate".into())
            }
        );
        assert!(parse_policy("defect", cards).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("33x17").unwrap(), StrategyGrid::default());
        assert!(parse_grid("33").is_err());
        assert!(parse_grid("1x17").is_err());
    }

    #[test]
    fn protocol_errors_exit_three() {
        let e = CliError::Lib(Error::UnrecognizedMessage {
            agent: 1,
            text: "x".into(),
        });
        assert_eq!(e.exit_code(), 3);
    }
}
