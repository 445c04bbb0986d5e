//! Subcommands. Each writes to the given streams and returns an exit code.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use postal_rps_core::federation::{format_ranking, FederationError, Registry};
use postal_rps_core::protocol::{Flow, GameRecord};
use postal_rps_core::rules::Variant;
use postal_rps_core::sim::{
    run_simulation, AdversaryKind, AdversarySpec, Detail, EventKind, PlayerSetup, SimConfig,
    SimOutcome, TerminalStatus,
};
use postal_rps_core::strategy::BuiltinStrategy;
use postal_rps_core::PlayerId;
use thiserror::Error;

use crate::config::{CliConfig, ConfigError, Settings};
use crate::exit;
use crate::registry_file::{load_registry, save_registry, RegistryFileError};
use crate::trace_file::{trace_digest, write_trace};

#[derive(Debug, Parser)]
#[command(name = "postal-rps", version, about = "Rock-paper-scissors by post, with sealed digital envelopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one match from a config file.
    Play {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the JSON-lines trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Round-robin over the config roster, updating the federation registry.
    Tournament {
        config: PathBuf,
        /// Matches per pair.
        #[arg(long, default_value_t = 1)]
        rounds: u32,
    },
    /// Run one adversary against an honest match and report whether it was caught.
    Attack {
        /// swap, tamper, equivocate, replay, drop or peek
        kind: AdversaryKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Independent runs for the peek statistics.
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        /// Targeted game (defaults depend on the attack).
        #[arg(long)]
        game: Option<u32>,
        /// Targeted flow, 1 to 3.
        #[arg(long)]
        flow: Option<u8>,
        /// Number of moves in the variant.
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Print the ranking table of a registry file.
    Rankings { registry: PathBuf },
    /// Add a player to a registry file, creating it if needed.
    Register {
        registry: PathBuf,
        id: String,
        name: Option<String>,
    },
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Registry(#[from] RegistryFileError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Output(#[from] io::Error),
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                exit::USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                exit::OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit::USAGE
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<i32, CommandError> {
    match command {
        Command::Play { config, seed, out: trace } => {
            let settings = CliConfig::load(&config)?;
            play(&settings, seed, trace.as_deref(), out)
        }
        Command::Tournament { config, rounds } => {
            let settings = CliConfig::load(&config)?;
            tournament(&settings, rounds, out)
        }
        Command::Attack { kind, seed, trials, game, flow, n } => {
            let variant = Variant::new(n, None).map_err(|e| CommandError::Usage(format!("--n: {e}")))?;
            let mut spec = AdversarySpec::default_for(kind);
            if let Some(g) = game {
                spec.game_index = g;
            }
            if let Some(f) = flow {
                spec.flow = Flow::from_number(f).ok_or_else(|| CommandError::Usage("--flow must be 1, 2 or 3".into()))?;
            }
            if kind == AdversaryKind::Peek {
                peek(spec, &variant, seed, trials, out)
            } else {
                attack(spec, &variant, seed, out)
            }
        }
        Command::Rankings { registry } => rankings(&registry, out),
        Command::Register { registry, id, name } => register(&registry, &id, name.as_deref(), out),
    }
}

fn describe_game(variant: &Variant, a: &PlayerId, b: &PlayerId, g: &GameRecord) -> String {
    let responder = if g.committer == *a { b } else { a };
    let result = match g.winner(responder) {
        Some(w) => format!("{w} wins"),
        None => "draw".into(),
    };
    format!(
        "game {}: {} commits {}, {} responds {}; {}",
        g.index,
        g.committer,
        variant.name(g.committer_move),
        responder,
        variant.name(g.responder_move),
        result
    )
}

fn signed(p: i64) -> String {
    if p > 0 {
        format!("+{p}")
    } else {
        p.to_string()
    }
}

pub fn play(settings: &Settings, seed: Option<u64>, trace_path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CommandError> {
    let seed = seed.unwrap_or(settings.seed);
    let (a, b) = (&settings.roster[0], &settings.roster[1]);
    let cfg = settings.sim_config(a, b, seed);
    let outcome = run_simulation(&cfg).map_err(|e| CommandError::Usage(e.to_string()))?;

    writeln!(
        out,
        "match {}: {} vs {} (n={}, {} games, seed {})",
        outcome.match_id,
        a.id,
        b.id,
        settings.variant.n(),
        settings.games_per_match,
        seed
    )?;
    for g in &outcome.games {
        writeln!(out, "{}", describe_game(&settings.variant, &a.id, &b.id, g))?;
    }
    if let Some(path) = trace_path {
        write_trace(&outcome.trace, path).map_err(|source| CommandError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let digest = trace_digest(&outcome.trace);
    match (&outcome.trace.status, &outcome.result) {
        (TerminalStatus::MatchComplete, Some(result)) => {
            let t = result.tally;
            writeln!(out, "tally: {} {}, {} {}, draws {}", a.id, t.wins_a, b.id, t.wins_b, t.draws)?;
            writeln!(
                out,
                "points: {} {}, {} {}",
                a.id,
                signed(t.points.p_first),
                b.id,
                signed(t.points.p_second)
            )?;
            writeln!(out, "trace sha256: {digest}")?;
            writeln!(out, "MATCH COMPLETE")?;
            Ok(exit::OK)
        }
        (TerminalStatus::Aborted(abort), _) => {
            writeln!(
                out,
                "{} ({}) rejected game {} flow {}",
                abort.party,
                abort.role,
                abort.game,
                abort.flow
            )?;
            writeln!(out, "trace sha256: {digest}")?;
            writeln!(out, "ABORTED: {}", abort.error.name())?;
            Ok(exit::ABORTED)
        }
        (TerminalStatus::MatchComplete, None) => unreachable!("complete matches carry a result"),
    }
}

fn registry_path(settings: &Settings) -> Result<&Path, CommandError> {
    settings
        .federation
        .as_deref()
        .ok_or_else(|| CommandError::Usage("invalid config: federation: required for tournaments".into()))
}

pub fn tournament(settings: &Settings, rounds: u32, out: &mut dyn Write) -> Result<i32, CommandError> {
    if rounds == 0 {
        return Err(CommandError::Usage("--rounds must be positive".into()));
    }
    let path = registry_path(settings)?;
    let mut registry = load_registry(path)?;
    for p in &settings.roster {
        if registry.player(&p.id).is_none() {
            return Err(FederationError::UnknownPlayer(p.id.clone()).into());
        }
    }

    let mut aborted = 0u32;
    let mut counter = 0u64;
    for round in 0..rounds {
        for i in 0..settings.roster.len() {
            for j in i + 1..settings.roster.len() {
                let (a, b) = if round % 2 == 0 {
                    (&settings.roster[i], &settings.roster[j])
                } else {
                    (&settings.roster[j], &settings.roster[i])
                };
                let seed = settings.seed.wrapping_add(counter);
                counter += 1;
                let cfg = settings.sim_config(a, b, seed);
                let outcome = run_simulation(&cfg).map_err(|e| CommandError::Usage(e.to_string()))?;
                let label = format!("match {counter}: {} vs {} (seed {seed})", a.id, b.id);
                match registry.record_match(outcome.report(&cfg)) {
                    Ok(rec) => writeln!(
                        out,
                        "{label}: {}-{}, {} draws",
                        rec.wins_a, rec.wins_b, rec.draws
                    )?,
                    Err(FederationError::AbortedMatch(reason)) => {
                        aborted += 1;
                        writeln!(out, "{label}: ABORTED: {reason}")?;
                    }
                    Err(e) => return Err(e.into()),
                }
                save_registry(&registry, path)?;
            }
        }
    }
    writeln!(out)?;
    write_table(&registry, out)?;
    Ok(if aborted > 0 { exit::ABORTED } else { exit::OK })
}

fn write_table(registry: &Registry, out: &mut dyn Write) -> io::Result<()> {
    let rows: Vec<[String; 4]> = registry
        .standings()
        .into_iter()
        .map(|p| {
            [
                p.id.to_string(),
                p.name.clone(),
                format_ranking(p.ranking_halves),
                p.matches.to_string(),
            ]
        })
        .collect();
    let header = ["id", "name", "ranking", "matches"];
    let mut width = header.map(str::len);
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 4]| {
        format!(
            "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = width[0],
            w1 = width[1],
            w2 = width[2],
            w3 = width[3]
        )
    };
    writeln!(out, "{}", line(header).trim_end())?;
    for row in &rows {
        writeln!(out, "{}", line([&row[0], &row[1], &row[2], &row[3]]).trim_end())?;
    }
    Ok(())
}

pub fn rankings(path: &Path, out: &mut dyn Write) -> Result<i32, CommandError> {
    let registry = load_registry(path)?;
    write_table(&registry, out)?;
    Ok(exit::OK)
}

pub fn register(path: &Path, id: &str, name: Option<&str>, out: &mut dyn Write) -> Result<i32, CommandError> {
    if id.is_empty() {
        return Err(CommandError::Usage("player id must be non-empty".into()));
    }
    let mut registry = if path.exists() {
        load_registry(path)?
    } else {
        Registry::new()
    };
    let rec = registry.register_player(PlayerId::new(id), name.unwrap_or(id))?;
    writeln!(out, "registered {} ({}) at {}", rec.id, rec.name, format_ranking(rec.ranking_halves))?;
    save_registry(&registry, path)?;
    Ok(exit::OK)
}

fn attack_players() -> [PlayerSetup; 2] {
    [
        PlayerSetup {
            id: "alice".into(),
            strategy: BuiltinStrategy::UniformRandom,
        },
        PlayerSetup {
            id: "bob".into(),
            strategy: BuiltinStrategy::UniformRandom,
        },
    ]
}

/// Games whose recorded decision disagrees with the move the committer
/// actually sealed.
pub fn inconsistent_decisions(outcome: &SimOutcome, variant: &Variant) -> Vec<u32> {
    let mut bad = Vec::new();
    for e in outcome.trace.of_kind(EventKind::Decide) {
        let Detail::Decide {
            game,
            committer_move,
            responder_move,
            outcome: decided,
            ..
        } = &e.detail
        else {
            continue;
        };
        let sealed = outcome.sealed.iter().find(|s| s.game == *game);
        let ok = sealed.is_some_and(|s| {
            s.mv == *committer_move && variant.outcome(s.mv, *responder_move) == *decided
        });
        if !ok {
            bad.push(*game);
        }
    }
    bad
}

pub fn attack(spec: AdversarySpec, variant: &Variant, seed: u64, out: &mut dyn Write) -> Result<i32, CommandError> {
    let mut cfg = SimConfig::new(seed, attack_players());
    cfg.variant = variant.clone();
    cfg.adversary = Some(spec);
    let outcome = run_simulation(&cfg).map_err(|e| CommandError::Usage(e.to_string()))?;
    let expected = spec.expected_detection().expect("active attack");

    writeln!(
        out,
        "{} at game {}, flow {} (seed {seed})",
        spec.kind,
        spec.game_index,
        spec.flow
    )?;
    let bad = inconsistent_decisions(&outcome, variant);
    if !bad.is_empty() {
        writeln!(out, "UNDETECTED: inconsistent outcome recorded for games {bad:?}")?;
        return Ok(exit::UNDETECTED);
    }
    match &outcome.trace.status {
        TerminalStatus::MatchComplete => {
            writeln!(out, "UNDETECTED: match completed")?;
            Ok(exit::UNDETECTED)
        }
        TerminalStatus::Aborted(abort) => {
            let right_role = expected.role.is_none_or(|r| r == abort.role);
            let right_flow = expected.role.is_none() || abort.flow == expected.flow.number();
            if abort.error == expected.error && right_role && right_flow {
                writeln!(
                    out,
                    "DETECTED: {} at {}, flow {}",
                    abort.error.name(),
                    abort.role,
                    abort.flow
                )?;
                Ok(exit::OK)
            } else {
                writeln!(
                    out,
                    "UNDETECTED: expected {}, got {} at {}, flow {}",
                    expected.error.name(),
                    abort.error.name(),
                    abort.role,
                    abort.flow
                )?;
                Ok(exit::UNDETECTED)
            }
        }
    }
}

/// Outcome of the peek experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeekStats {
    pub trials: u32,
    pub hits: u32,
    pub rate: f64,
    pub chance: f64,
    /// Three standard errors of a chance-level guesser.
    pub bound: f64,
}

impl PeekStats {
    pub fn within_bound(&self) -> bool {
        (self.rate - self.chance).abs() <= self.bound
    }
}

/// One short match per trial, seeds `seed..seed + trials`, with a uniformly
/// random committer; counts how often the peeker's guess equals the sealed
/// move.
pub fn peek_trials(spec: AdversarySpec, variant: &Variant, seed: u64, trials: u32) -> Result<PeekStats, CommandError> {
    if trials == 0 {
        return Err(CommandError::Usage("--trials must be positive".into()));
    }
    let mut hits = 0;
    for t in 0..trials {
        let mut cfg = SimConfig::new(seed.wrapping_add(u64::from(t)), attack_players());
        cfg.variant = variant.clone();
        cfg.games_per_match = spec.game_index + 1;
        cfg.adversary = Some(spec);
        let outcome = run_simulation(&cfg).map_err(|e| CommandError::Usage(e.to_string()))?;
        let guess = outcome.peek.ok_or_else(|| CommandError::Usage("peek never fired".into()))?;
        let sealed = outcome
            .sealed
            .iter()
            .find(|s| s.game == guess.game)
            .expect("peeked game was sealed");
        if sealed.mv == guess.guess {
            hits += 1;
        }
    }
    let chance = 1.0 / f64::from(variant.n());
    let n = f64::from(trials);
    Ok(PeekStats {
        trials,
        hits,
        rate: f64::from(hits) / n,
        chance,
        bound: 3.0 * (chance * (1.0 - chance) / n).sqrt(),
    })
}

pub fn peek(spec: AdversarySpec, variant: &Variant, seed: u64, trials: u32, out: &mut dyn Write) -> Result<i32, CommandError> {
    spec.validate(spec.game_index + 1)
        .map_err(|e| CommandError::Usage(e.to_string()))?;
    let stats = peek_trials(spec, variant, seed, trials)?;
    writeln!(
        out,
        "peek at game {}, flow {}: {} trials from seed {seed}, n={}",
        spec.game_index,
        spec.flow,
        trials,
        variant.n()
    )?;
    writeln!(
        out,
        "guessed {} of {} (rate {:.4}); chance {:.4} +/- {:.4}",
        stats.hits, stats.trials, stats.rate, stats.chance, stats.bound
    )?;
    if stats.within_bound() {
        writeln!(out, "HIDDEN: guess rate within 3 standard errors of 1/{}", variant.n())?;
        Ok(exit::OK)
    } else {
        writeln!(out, "UNDETECTED: guess rate outside 3 standard errors of 1/{}", variant.n())?;
        Ok(exit::UNDETECTED)
    }
}
