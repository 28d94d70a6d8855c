//! `quantgame` command-line front end.
//!
//! Exit codes: 0 success, 1 profitable deviation found, 2 unreadable input,
//! 3 invalid arena, profile or precondition, 4 failed internal verification.

mod doc;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quantgame::arena::subdivide_edges;
use quantgame::attractor::solve_zero_sum_reach;
use quantgame::equilibrium::{
    build_nash, build_nash_with, build_secure, build_secure_with, certify, nash_params, normalize_nash,
    normalize_secure, EquilibriumCertificate, EquilibriumKind, NashVariant,
};
use quantgame::random::{gen_random, RandomParams};
use quantgame::tree_solver::{required_depth, DepthVariant};
use quantgame::verifier::{brute_force_check, check, CheckKind, Verdict, VerificationReport};
use quantgame::{GameArena, GameError, ObjectiveKind, PlayerId, StrategyAutomaton};
use serde::Serialize;

use doc::{ArenaDocument, CertificateDocument, ReportDoc};

#[derive(Parser)]
#[command(name = "quantgame", version, about = "Finite-memory equilibria of quantitative reachability games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Nash,
    Secure,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKindArg {
    Nash,
    Secure,
    Qualitative,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Reach,
    ReachSafety,
    Weighted,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify an equilibrium; prints the certificate.
    Solve {
        arena: PathBuf,
        #[arg(long, value_enum, default_value = "nash")]
        kind: KindArg,
        /// Defaults to the narrowest variant the arena fits.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Depth of the truncated game instead of the computed bound.
        #[arg(long)]
        depth_override: Option<usize>,
        /// Write the strategy automata as Graphviz.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Cross-check the result with the brute-force verifier.
        #[arg(long)]
        oracle: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a strategy profile; exits 1 when some player can improve.
    Verify {
        arena: PathBuf,
        certificate: PathBuf,
        #[arg(long, value_enum, default_value = "nash")]
        kind: VerifyKindArg,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Solve the zero-sum reachability game of one player against the rest.
    Attractor {
        arena: PathBuf,
        /// 1-based player number.
        #[arg(long)]
        player: usize,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild an equilibrium with a short lasso outcome.
    Normalize {
        arena: PathBuf,
        certificate: PathBuf,
        #[arg(long, value_enum, default_value = "nash")]
        kind: KindArg,
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replace every integer-cost edge by a path of unit edges.
    Subdivide {
        arena: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random valid arena.
    GenRandom {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 2)]
        players: usize,
        #[arg(long, default_value_t = 0)]
        safety_players: usize,
        #[arg(long, default_value_t = 3)]
        max_out_degree: usize,
        /// Draw integer edge costs in 1..=N.
        #[arg(long)]
        max_cost: Option<u32>,
        /// Give every player the same cost on each edge.
        #[arg(long)]
        uniform_costs: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize an arena and the depths the constructions would use.
    Info {
        arena: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

type Outcome = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        let code = match e {
            GameError::VerificationFailed(_) | GameError::Internal(_) => 4,
            _ => 3,
        };
        fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QUANTGAME_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Solve { arena, kind, variant, depth_override, emit_dot, oracle, output } => {
            let g = load_valid_arena(&arena)?;
            let cert = solve(&g, kind, variant, depth_override).map_err(|f| match depth_override {
                Some(d) if f.code == 4 => fail(3, format!("depth {d} is too small: {}", f.message)),
                _ => f,
            })?;
            log::info!("{} equilibrium of type {} with outcome {}", cert.kind, cert.eq_type, cert.outcome.render(&g));
            if oracle {
                run_oracle(&g, &cert.profile, cert.kind.check_kind(), true)?;
            }
            if let Some(path) = emit_dot {
                write_dot(&g, &cert.profile, &path)?;
            }
            emit(&CertificateDocument::from_certificate(&g, &cert), output.as_deref())?;
            Ok(0)
        }
        Command::Verify { arena, certificate, kind, oracle, json } => {
            let g = load_valid_arena(&arena)?;
            let profile = load_profile(&g, &certificate)?;
            let kind = match kind {
                VerifyKindArg::Nash => CheckKind::Nash,
                VerifyKindArg::Secure => CheckKind::Secure,
                VerifyKindArg::Qualitative => CheckKind::Qualitative,
            };
            let report = check(&g, &profile, kind)?;
            if oracle && kind != CheckKind::Qualitative {
                let agrees = run_oracle(&g, &profile, kind, false)?;
                if report.is_ok() && !agrees {
                    return Err(fail(4, "brute-force search found a deviation the exact check missed"));
                }
            }
            if json {
                emit(&ReportDoc::from_report(&g, &report), None)?;
            } else {
                print!("{}", render_report(&g, &report));
            }
            Ok(if report.is_ok() { 0 } else { 1 })
        }
        Command::Attractor { arena, player, json } => {
            let g = load_valid_arena(&arena)?;
            if player == 0 || player > g.num_players() {
                return Err(fail(3, format!("no player {player}")));
            }
            let res = solve_zero_sum_reach(&g, PlayerId(player - 1))?;
            let names = |vs: Vec<usize>| vs.into_iter().map(|v| g.name(v).to_string()).collect::<Vec<_>>();
            let doc = AttractorDoc {
                player,
                win_reach: names(res.win_reach()),
                win_avoid: names(res.win_avoid()),
                rank: g
                    .vertices()
                    .filter_map(|v| res.rank(v).map(|r| (g.name(v).to_string(), r)))
                    .collect(),
            };
            if json {
                emit(&doc, None)?;
            } else {
                println!("win_reach: {}", doc.win_reach.join(" "));
                println!("win_avoid: {}", doc.win_avoid.join(" "));
            }
            Ok(0)
        }
        Command::Normalize { arena, certificate, kind, emit_dot, output } => {
            let g = load_valid_arena(&arena)?;
            let profile = load_profile(&g, &certificate)?;
            let kind = equilibrium_kind(kind);
            let input = certify(&g, profile, kind, None, 0).map_err(|e| match e {
                GameError::VerificationFailed(m) => fail(3, format!("input is not an equilibrium: {m}")),
                e => e.into(),
            })?;
            let cert = match kind {
                EquilibriumKind::Nash => normalize_nash(&input, &g)?,
                EquilibriumKind::Secure => normalize_secure(&input, &g)?,
            };
            if let Some(path) = emit_dot {
                write_dot(&g, &cert.profile, &path)?;
            }
            emit(&CertificateDocument::from_certificate(&g, &cert), output.as_deref())?;
            Ok(0)
        }
        Command::Subdivide { arena, output } => {
            let g = load_valid_arena(&arena)?;
            let sub = subdivide_edges(&g)?;
            emit(&ArenaDocument::from_arena(&sub.arena), output.as_deref())?;
            Ok(0)
        }
        Command::GenRandom { seed, vertices, players, safety_players, max_out_degree, max_cost, uniform_costs, output } => {
            if vertices == 0 || players == 0 || safety_players > players || max_out_degree == 0 {
                return Err(fail(3, "need at least one vertex, one player and out-degree 1, and no more safety players than players"));
            }
            if max_cost.is_some() && safety_players > 0 {
                return Err(fail(3, "weighted arenas take reach players only"));
            }
            let params = RandomParams {
                vertices,
                players,
                safety_players,
                max_out_degree,
                max_cost,
                uniform_costs,
                ..RandomParams::default()
            };
            let g = gen_random(&params, seed);
            emit(&ArenaDocument::from_arena(&g), output.as_deref())?;
            Ok(0)
        }
        Command::Info { arena, json } => {
            let g = load_arena(&arena)?;
            let doc = info(&g);
            if json {
                emit(&doc, None)?;
            } else {
                println!("vertices: {}", doc.vertices);
                println!("edges: {}", doc.edges);
                println!("players: {}", doc.players.join(", "));
                println!("weighted: {}", doc.weighted);
                match &doc.violations[..] {
                    [] => println!("valid: yes"),
                    vs => println!("valid: no ({})", vs.join("; ")),
                }
                if let Some(d) = doc.nash_depth {
                    println!("nash depth: {d}");
                }
                if let Some(d) = doc.secure_depth {
                    println!("secure depth: {d}");
                }
            }
            Ok(0)
        }
    }
}

fn equilibrium_kind(kind: KindArg) -> EquilibriumKind {
    match kind {
        KindArg::Nash => EquilibriumKind::Nash,
        KindArg::Secure => EquilibriumKind::Secure,
    }
}

fn default_variant(g: &GameArena) -> NashVariant {
    if g.is_weighted() {
        NashVariant::Weighted
    } else if g.all_reach() {
        NashVariant::Reach
    } else {
        NashVariant::ReachSafety
    }
}

fn solve(g: &GameArena, kind: KindArg, variant: Option<VariantArg>, depth: Option<usize>) -> Result<EquilibriumCertificate, Failure> {
    let cert = match kind {
        KindArg::Nash => {
            let variant = match variant {
                Some(VariantArg::Reach) => NashVariant::Reach,
                Some(VariantArg::ReachSafety) => NashVariant::ReachSafety,
                Some(VariantArg::Weighted) => NashVariant::Weighted,
                None => default_variant(g),
            };
            match depth {
                Some(d) => build_nash_with(g, variant, &nash_params(g, variant)?.with_depth(d))?,
                None => build_nash(g, variant)?,
            }
        }
        KindArg::Secure => {
            if variant.is_some() {
                log::warn!("--variant only applies to Nash equilibria");
            }
            match depth {
                Some(d) => build_secure_with(g, &required_depth(g, DepthVariant::SecureTwoPlayer).with_depth(d))?,
                None => build_secure(g)?,
            }
        }
    };
    Ok(cert)
}

const ORACLE_DEPTH: usize = 8;
const ORACLE_MEMORY: usize = 2;

/// Runs the brute-force search. Returns whether it found no deviation; with
/// `strict`, a found deviation is an error.
fn run_oracle(g: &GameArena, profile: &[StrategyAutomaton], kind: CheckKind, strict: bool) -> Result<bool, Failure> {
    match brute_force_check(g, profile, kind, ORACLE_DEPTH, ORACLE_MEMORY) {
        Ok(r) if r.is_ok() => Ok(true),
        Ok(r) if strict => {
            let who: Vec<String> = r.deviators().iter().map(ToString::to_string).collect();
            Err(fail(4, format!("brute-force search found deviations for {}", who.join(", "))))
        }
        Ok(_) => Ok(false),
        Err(e @ (GameError::InstanceTooLarge(_) | GameError::Precondition(_))) => {
            log::warn!("oracle skipped: {e}");
            Ok(true)
        }
        Err(e) => Err(e.into()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load_arena(path: &Path) -> Result<GameArena, Failure> {
    let text = read(path)?;
    let doc: ArenaDocument =
        serde_json::from_str(&text).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    doc.to_arena().map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load_valid_arena(path: &Path) -> Result<GameArena, Failure> {
    let g = load_arena(path)?;
    let violations = g.validate();
    if violations.is_empty() {
        Ok(g)
    } else {
        let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
        Err(fail(3, format!("invalid arena: {}", msgs.join("; "))))
    }
}

fn load_profile(g: &GameArena, path: &Path) -> Result<Vec<StrategyAutomaton>, Failure> {
    let text = read(path)?;
    let doc: CertificateDocument =
        serde_json::from_str(&text).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let profile = doc.profile(g).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    quantgame::automaton::check_profile(g, &profile)?;
    Ok(profile)
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(4, e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(2, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_dot(g: &GameArena, profile: &[StrategyAutomaton], path: &Path) -> Result<(), Failure> {
    let dot: String = profile.iter().map(|a| a.to_dot(g)).collect();
    fs::write(path, dot).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn render_report(g: &GameArena, r: &VerificationReport) -> String {
    let mut s = format!("{} check, outcome {}\n", r.kind, r.outcome.render(g));
    let costs: Vec<String> = r.costs.iter().map(ToString::to_string).collect();
    s += &format!("costs: ({})\n", costs.join(", "));
    for (i, v) in r.verdicts.iter().enumerate() {
        match v {
            Verdict::Ok => s += &format!("player {}: ok\n", i + 1),
            Verdict::ProfitableDeviation { witness, costs } => {
                let costs: Vec<String> = costs.iter().map(ToString::to_string).collect();
                s += &format!(
                    "player {}: profitable deviation {} with costs ({})\n",
                    i + 1,
                    witness.render(g),
                    costs.join(", ")
                );
            }
        }
    }
    s
}

#[derive(Serialize)]
struct AttractorDoc {
    player: usize,
    win_reach: Vec<String>,
    win_avoid: Vec<String>,
    rank: std::collections::BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct InfoDoc {
    vertices: usize,
    edges: usize,
    players: Vec<String>,
    weighted: bool,
    violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nash_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    secure_depth: Option<usize>,
}

fn info(g: &GameArena) -> InfoDoc {
    let violations: Vec<String> = g.validate().iter().map(ToString::to_string).collect();
    let valid = violations.is_empty();
    let two_player_reach = g.num_players() == 2 && g.all_reach() && !g.is_weighted();
    InfoDoc {
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        players: g
            .objectives()
            .iter()
            .map(|o| {
                let names: Vec<&str> = o.target.iter().map(|&v| g.name(v)).collect();
                let kind = match o.kind {
                    ObjectiveKind::Reach => "reach",
                    ObjectiveKind::Safety => "safety",
                };
                format!("{kind} {{{}}}", names.join(","))
            })
            .collect(),
        weighted: g.is_weighted(),
        violations,
        nash_depth: valid.then(|| nash_params(g, default_variant(g)).ok().map(|p| p.depth)).flatten(),
        secure_depth: (valid && two_player_reach)
            .then(|| required_depth(g, DepthVariant::SecureTwoPlayer).depth),
    }
}
