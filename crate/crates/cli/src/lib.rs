//! Command-line front end for the `gcr` library.

pub mod error;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gcr::constructions::{
    classify_history, fig1_fixture, noncapturing_ne_construction, path_profile, tree_profile, trigger_profile, Preset,
};
use gcr::json::{profile_from_json, profile_to_json};
use gcr::{
    build_threat_profile, certify_ne, copwin_check, evaluate_profile, optimal_placement, simulate, solve_aux,
    solve_exact, solve_positional_ne, verify_threat_ne, GameSpec, GeneralizedScheme, Graph, History, PayoffScheme,
    PositionalProfile, State,
};
use serde::Deserialize;
use serde_json::{json, Map, Value};

pub use error::{CliError, CliResult, EXIT_ERROR, EXIT_NONCONVERGENCE, EXIT_REJECTED, EXIT_USAGE};

/// Environment variable overriding the state-count safety cap.
pub const STATE_CAP_VAR: &str = "GCR_STATE_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "gcr",
    version,
    about = "Solve and verify generalized cops-and-robbers games on graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Edge-list file: vertex count, then one "u v" pair per line.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub graph: Option<PathBuf>,

    /// Built-in fixture: fig1, fig2, fig5 or fig6-star.
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Number of tokens N.
    #[arg(long, global = true)]
    pub players: Option<usize>,

    /// two, chain, cyclic, or a JSON file with target sets.
    #[arg(long, global = true)]
    pub scheme: Option<String>,

    /// Discount factor in (0,1).
    #[arg(long, global = true)]
    pub gamma: Option<f64>,

    /// Initial state "v1,...,vN,mover".
    #[arg(long, global = true)]
    pub s0: Option<String>,

    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    #[arg(long = "max-iters", global = true, default_value_t = 100_000)]
    pub max_iters: usize,

    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write a DOT rendering (trace or graph) here.
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whether one cop catches the robber from every start.
    Copwin,
    /// Exact values of the two-token cop-and-robber game.
    Solve2,
    /// Exact values of one player's auxiliary zero-sum game.
    SolveAux {
        #[arg(long)]
        player: usize,
    },
    /// A certified positional equilibrium with its value table.
    SolveNe,
    /// Checks a positional profile for profitable one-shot deviations.
    Certify {
        /// JSON map from state to action, or a solve-ne result.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Auxiliary-game tables behind the threat profile, optionally verified.
    ThreatNe {
        /// Compare each player's on-path payoff with its exact best response.
        #[arg(long)]
        verify: bool,
    },
    /// Plays a profile out from s0.
    Simulate {
        /// Positional profile; defaults to the preset's scripted strategies.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Builds one of the constructive three-token strategies.
    Construct { kind: Construction },
    /// Tree and path recognition.
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    Path,
    Tree,
    Trigger,
    Noncap,
}

/// What a command produced.
#[derive(Debug)]
pub struct Output {
    pub json: Value,
    pub dot: Option<String>,
    /// False when a verification ran and rejected its input.
    pub accepted: bool,
}

impl Output {
    fn ok(json: Value) -> Self {
        Output {
            json,
            dot: None,
            accepted: true,
        }
    }

    fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

/// Runs a parsed command and writes its artifacts. Returns the exit status.
pub fn run(cli: &Cli) -> CliResult<i32> {
    let out = execute(cli)?;
    let text = render(&out.json);
    match &cli.out {
        Some(path) => write(path, "out", &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &cli.dot {
        let dot = match out.dot {
            Some(d) => d,
            None => load_graph(cli)?.0.to_dot(),
        };
        write(path, "dot", &dot)?;
    }
    Ok(if out.accepted { 0 } else { EXIT_REJECTED })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn write(path: &Path, field: &'static str, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        field,
        path: path.display().to_string(),
        source,
    })
}

fn read(path: &Path, field: &'static str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        field,
        path: path.display().to_string(),
        source,
    })
}

/// Computes a command's result without touching the output files.
pub fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Copwin => {
            let (g, _) = load_graph(cli)?;
            Ok(Output::ok(json!({ "copwin": copwin_check(g, gamma(cli)?)? })))
        }
        Command::Solve2 => solve2(cli),
        Command::SolveAux { player } => {
            let spec = game(cli)?;
            let sol = solve_aux(&spec, *player)?;
            let mut v = sol.to_json();
            v["player"] = json!(player);
            if let Some(s0) = initial_state(cli, &spec)? {
                v["s0"] = json!({
                    "state": s0,
                    "value": sol.value(&s0),
                    "capture_time": sol.capture_time(&s0),
                    "action": sol.action(&s0),
                });
            }
            Ok(Output::ok(v))
        }
        Command::SolveNe => {
            let spec = game(cli)?;
            let ne = solve_positional_ne(&spec, cli.tol, cli.max_iters)?;
            let mut v = json!({
                "profile": profile_to_json(&ne.profile),
                "values": ne.values.to_json(),
                "certificate": ne.certificate,
                "iterations": ne.iterations,
            });
            if let Some(s0) = initial_state(cli, &spec)? {
                let h = simulate(&spec, &ne.strategies(), &s0)?;
                v["play"] = play_json(&spec, &h, true)?;
            }
            Ok(Output::ok(v))
        }
        Command::Certify { profile } => {
            let spec = game(cli)?;
            let profile = load_profile(profile, &spec)?;
            let u = evaluate_profile(&spec, &profile)?;
            let cert = certify_ne(&spec, &profile, &u, cli.tol)?;
            let accepted = cert.passed;
            Ok(Output {
                json: json!({ "certificate": cert }),
                dot: None,
                accepted,
            })
        }
        Command::ThreatNe { verify } => threat(cli, *verify),
        Command::Simulate { profile } => simulate_cmd(cli, profile.as_deref()),
        Command::Construct { kind } => construct(cli, *kind),
        Command::Classify => {
            let (g, _) = load_graph(cli)?;
            let c = g.classify();
            Ok(Output::ok(json!({
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "is_tree": c.is_tree,
                "is_path": c.is_path,
            })))
        }
    }
}

fn solve2(cli: &Cli) -> CliResult<Output> {
    if let Some(n) = cli.players.filter(|&n| n != 2) {
        return Err(CliError::invalid(
            "players",
            format!("solve2 plays two tokens, got {n}"),
        ));
    }
    let (g, _) = load_graph(cli)?;
    let spec = with_cap(GameSpec::two_player(g, gamma(cli)?)?)?;
    let sol = solve_exact(&spec)?;
    let p = optimal_placement(&sol)?;
    let mut v = sol.to_json();
    v["placement"] = json!({
        "cop": p.cop,
        "robber": p.robber,
        "value": p.value,
        "capture_time": p.capture_time,
    });
    if let Some(s0) = cli.s0.as_deref().map(parse_state).transpose()? {
        spec.validate_state(&s0)?;
        v["s0"] = json!({
            "state": s0,
            "value": sol.value(&s0),
            "capture_time": sol.capture_time(&s0),
        });
    }
    Ok(Output::ok(v))
}

fn threat(cli: &Cli, verify: bool) -> CliResult<Output> {
    let spec = game(cli)?;
    let tp = build_threat_profile(&spec)?;
    if verify {
        let s0 =
            initial_state(cli, &spec)?.ok_or_else(|| CliError::invalid("s0", "--verify needs an initial state"))?;
        let report = verify_threat_ne(&spec, &tp, &s0, cli.tol)?;
        let accepted = report.passed;
        return Ok(Output {
            json: json!({ "report": report }),
            dot: None,
            accepted,
        });
    }
    let tables: Map<String, Value> = (1..=tp.players())
        .map(|n| (n.to_string(), profile_to_json(tp.table(n))))
        .collect();
    let mut v = json!({ "tables": tables });
    if let Some(s0) = initial_state(cli, &spec)? {
        let h = simulate(&spec, &tp.strategies(), &s0)?;
        v["play"] = play_json(&spec, &h, true)?;
    }
    Ok(Output::ok(v))
}

fn simulate_cmd(cli: &Cli, profile: Option<&Path>) -> CliResult<Output> {
    let discounted = cli.gamma.is_some();
    let (spec, strategies, s0) = match (profile, preset(cli)?) {
        (Some(path), _) => {
            let spec = game_with_gamma(cli, gamma_or_placeholder(cli)?)?;
            let profile = Arc::new(load_profile(path, &spec)?);
            let s0 = required_state(cli, &spec)?;
            (spec, profile.strategies(), s0)
        }
        (None, Some(Preset::Fig1)) => {
            let spec = game_with_gamma(cli, gamma_or_placeholder(cli)?)?;
            let fx = fig1_fixture();
            let s0 = initial_state(cli, &spec)?.unwrap_or(fx.s0);
            (spec, fx.strategies, s0)
        }
        (None, Some(Preset::Fig2)) => {
            let spec = game_with_gamma(cli, gamma_or_placeholder(cli)?)?;
            let s0 = required_state(cli, &spec)?;
            let strategies = trigger_profile(&spec, &s0)?;
            (spec, strategies, s0)
        }
        _ => {
            return Err(CliError::invalid(
                "profile",
                "simulate needs --profile unless the preset has scripted strategies (fig1, fig2)",
            ))
        }
    };
    let h = simulate(&spec, &strategies, &s0)?;
    let v = play_json(&spec, &h, discounted)?;
    Ok(Output::ok(v).with_dot(h.to_dot()))
}

fn construct(cli: &Cli, kind: Construction) -> CliResult<Output> {
    if let Some(n) = cli.players.filter(|&n| n != 3) {
        return Err(CliError::invalid(
            "players",
            format!("constructions use three tokens, got {n}"),
        ));
    }
    let name = match kind {
        Construction::Path => "path",
        Construction::Tree => "tree",
        Construction::Trigger => "trigger",
        Construction::Noncap => "noncap",
    };
    let mut v = json!({ "construction": name });
    let (spec, strategies, s0) = match kind {
        Construction::Noncap => {
            let (g, _) = load_graph(cli)?;
            let ne = noncapturing_ne_construction(g, gamma(cli)?)?;
            let spec = with_cap(ne.spec)?;
            v["profile"] = profile_to_json(&ne.profile);
            (spec, ne.profile.strategies(), Some(ne.s0))
        }
        Construction::Path | Construction::Tree => {
            let spec = chain3(cli)?;
            let profile = if kind == Construction::Path {
                path_profile(&spec)?
            } else {
                tree_profile(&spec)?
            };
            v["profile"] = profile_to_json(&profile);
            let s0 = initial_state(cli, &spec)?;
            (spec, profile.strategies(), s0)
        }
        Construction::Trigger => {
            let spec = chain3(cli)?;
            let s0 = required_state(cli, &spec)?;
            let strategies = trigger_profile(&spec, &s0)?;
            (spec, strategies, Some(s0))
        }
    };
    let mut out = Output::ok(Value::Null);
    if let Some(s0) = s0 {
        let h = simulate(&spec, &strategies, &s0)?;
        v["s0"] = json!(s0);
        v["play"] = play_json(&spec, &h, cli.gamma.is_some() || kind == Construction::Noncap)?;
        out = out.with_dot(h.to_dot());
    }
    out.json = v;
    Ok(out)
}

/// History plus capture classification; payoffs only when discounted.
fn play_json(spec: &GameSpec<f64>, h: &History, discounted: bool) -> CliResult<Value> {
    let outcome = classify_history(spec, h)?;
    let mut v = h.to_json();
    v["k"] = json!(outcome.k);
    v["capturer_set"] = json!(outcome.capturer_set);
    if discounted {
        v["payoffs"] = json!(outcome.payoffs);
    }
    Ok(v)
}

fn chain3(cli: &Cli) -> CliResult<GameSpec<f64>> {
    if cli.scheme.as_deref().is_some_and(|s| s != "chain") {
        return Err(CliError::invalid("scheme", "constructions use the chain scheme"));
    }
    let (g, _) = load_graph(cli)?;
    with_cap(GameSpec::chain(g, 3, gamma_or_placeholder(cli)?)?)
}

fn gamma(cli: &Cli) -> CliResult<f64> {
    cli.gamma
        .ok_or_else(|| CliError::invalid("gamma", "--gamma is required; there is no default discount"))
}

/// Commands whose output does not depend on the discount still need one to
/// build a game; its value never reaches the output.
fn gamma_or_placeholder(cli: &Cli) -> CliResult<f64> {
    Ok(cli.gamma.unwrap_or(0.5))
}

fn preset(cli: &Cli) -> CliResult<Option<Preset>> {
    cli.preset
        .as_deref()
        .map(Preset::from_name)
        .transpose()
        .map_err(CliError::from)
}

/// The graph from `--graph` or `--preset`.
pub fn load_graph(cli: &Cli) -> CliResult<(Arc<Graph>, Option<Preset>)> {
    if let Some(p) = preset(cli)? {
        return Ok((Arc::new(p.graph()), Some(p)));
    }
    let path = cli
        .graph
        .as_deref()
        .ok_or_else(|| CliError::invalid("graph", "give --graph FILE or --preset NAME"))?;
    Ok((Arc::new(Graph::parse(&read(path, "graph")?)?), None))
}

fn game(cli: &Cli) -> CliResult<GameSpec<f64>> {
    game_with_gamma(cli, gamma(cli)?)
}

fn game_with_gamma(cli: &Cli, gamma: f64) -> CliResult<GameSpec<f64>> {
    let (g, preset) = load_graph(cli)?;
    let n = match (cli.players, preset) {
        (Some(n), Some(p)) if n != p.tokens() => {
            return Err(CliError::invalid(
                "players",
                format!("preset {} has {} tokens, got {n}", p.name(), p.tokens()),
            ))
        }
        (Some(n), _) => n,
        (None, Some(p)) => p.tokens(),
        (None, None) => return Err(CliError::invalid("players", "--players is required with --graph")),
    };
    let (scheme, controllers) = match (cli.scheme.as_deref(), preset) {
        (None, Some(p)) => (p.scheme(), None),
        (None, None) | (Some("chain"), _) => (PayoffScheme::Chain, None),
        (Some("two"), _) => {
            if n != 2 {
                return Err(CliError::invalid(
                    "scheme",
                    format!("the two-token scheme needs N = 2, got {n}"),
                ));
            }
            (PayoffScheme::TwoPlayer, None)
        }
        (Some("cyclic"), _) => (PayoffScheme::Generalized(GeneralizedScheme::cyclic()), None),
        (Some(path), _) => load_scheme(Path::new(path))?,
    };
    let mut spec = GameSpec::new(g, n, gamma, scheme)?;
    if let Some(c) = controllers {
        spec = spec.with_controllers(c)?;
    }
    with_cap(spec)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    targets: Vec<Vec<usize>>,
    pursuers: Option<Vec<Vec<usize>>>,
    penalty_dominates: Option<bool>,
    controllers: Option<Vec<usize>>,
}

fn load_scheme(path: &Path) -> CliResult<(PayoffScheme, Option<Vec<usize>>)> {
    let text = read(path, "scheme")?;
    let f: SchemeFile =
        serde_json::from_str(&text).map_err(|e| CliError::invalid("scheme", format!("{}: {e}", path.display())))?;
    let mut g = match f.pursuers {
        Some(p) => GeneralizedScheme::new(f.targets, p),
        None => GeneralizedScheme::from_targets(f.targets),
    };
    if let Some(flag) = f.penalty_dominates {
        g = g.with_penalty_dominates(flag);
    }
    Ok((PayoffScheme::Generalized(g), f.controllers))
}

fn with_cap(spec: GameSpec<f64>) -> CliResult<GameSpec<f64>> {
    match std::env::var(STATE_CAP_VAR) {
        Ok(raw) => {
            let cap = raw
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::invalid("GCR_STATE_CAP", format!("expected a positive integer, got {raw:?}")))?;
            Ok(spec.with_state_cap(cap))
        }
        Err(_) => Ok(spec),
    }
}

fn parse_state(text: &str) -> CliResult<State> {
    text.parse::<State>()
        .map_err(|e| CliError::invalid("s0", format!("{text:?}: {e}")))
}

/// `--s0` if given, else the preset's built-in state.
fn initial_state(cli: &Cli, spec: &GameSpec<f64>) -> CliResult<Option<State>> {
    let s0 = match (&cli.s0, preset(cli)?) {
        (Some(text), _) => Some(parse_state(text)?),
        (None, Some(p)) => Some(p.initial_state()),
        (None, None) => None,
    };
    if let Some(s) = &s0 {
        spec.validate_state(s)?;
        if s.is_terminal() {
            return Err(CliError::invalid("s0", "play cannot start at the terminal state"));
        }
    }
    Ok(s0)
}

fn required_state(cli: &Cli, spec: &GameSpec<f64>) -> CliResult<State> {
    initial_state(cli, spec)?.ok_or_else(|| CliError::invalid("s0", "--s0 is required"))
}

/// A bare state-to-action map or any object carrying one under "profile".
fn load_profile(path: &Path, spec: &GameSpec<f64>) -> CliResult<PositionalProfile> {
    let text = read(path, "profile")?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::invalid("profile", format!("{}: {e}", path.display())))?;
    let map = v.get("profile").unwrap_or(&v);
    let space = gcr::StateSpace::new(spec)?;
    Ok(profile_from_json(space.indexer(), map)?)
}
