//! The JSON configuration shared by `play` and `tournament`.
//!
//! ```json
//! {
//!   "seed": 42,
//!   "variant": { "n": 3 },
//!   "games_per_match": 10,
//!   "latency": { "min_days": 2, "max_days": 5 },
//!   "timeout_days": 30,
//!   "adversary": { "kind": "swap", "game": 0, "flow": 2 },
//!   "federation": "registry.json",
//!   "players": [
//!     { "id": "alice", "name": "Alice", "strategy": { "kind": "uniform_random" } },
//!     { "id": "bob", "strategy": { "kind": "constant", "move": "rock" } }
//!   ]
//! }
//! ```
//!
//! Only `seed` and `players` are required. Unknown keys are rejected.
//! `federation` is resolved relative to the config file.

use std::path::{Path, PathBuf};

use postal_rps_core::protocol::Flow;
use postal_rps_core::rules::{Move, Variant, DEFAULT_GAMES_PER_MATCH};
use postal_rps_core::sim::{
    AdversaryKind, AdversarySpec, LatencyModel, PlayerSetup, SimConfig, DEFAULT_TIMEOUT_DAYS,
};
use postal_rps_core::strategy::BuiltinStrategy;
use postal_rps_core::PlayerId;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub seed: u64,
    #[serde(default)]
    pub variant: Option<VariantConfig>,
    #[serde(default)]
    pub games_per_match: Option<u32>,
    #[serde(default)]
    pub latency: Option<LatencyConfig>,
    #[serde(default)]
    pub timeout_days: Option<u64>,
    #[serde(default)]
    pub adversary: Option<AdversaryConfig>,
    #[serde(default)]
    pub federation: Option<PathBuf>,
    pub players: Vec<PlayerConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub n: u32,
    #[serde(default)]
    pub move_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyConfig {
    pub min_days: u64,
    pub max_days: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub kind: String,
    #[serde(default)]
    pub game: Option<u32>,
    #[serde(default)]
    pub flow: Option<u8>,
    #[serde(default)]
    pub replacement_move: Option<MoveRef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerConfig {
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
    pub strategy: StrategyConfig,
}

/// A move given by index or by display name.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MoveRef {
    Index(u32),
    Name(String),
}

impl MoveRef {
    fn resolve(&self, variant: &Variant, key: &str) -> Result<Move, ConfigError> {
        match self {
            MoveRef::Index(i) => variant.move_at(*i).map_err(|e| invalid(key, e)),
            MoveRef::Name(s) => variant
                .parse_move(s)
                .ok_or_else(|| invalid(key, format!("no move named {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Constant {
        #[serde(rename = "move")]
        mv: MoveRef,
    },
    UniformRandom,
    Cycle,
    FrequencyCounter,
    Sequence {
        moves: Vec<MoveRef>,
    },
}

impl StrategyConfig {
    fn build(&self, variant: &Variant, key: &str) -> Result<BuiltinStrategy, ConfigError> {
        Ok(match self {
            StrategyConfig::Constant { mv } => BuiltinStrategy::Constant(mv.resolve(variant, key)?),
            StrategyConfig::UniformRandom => BuiltinStrategy::UniformRandom,
            StrategyConfig::Cycle => BuiltinStrategy::Cycle,
            StrategyConfig::FrequencyCounter => BuiltinStrategy::FrequencyCounter,
            StrategyConfig::Sequence { moves } => {
                if moves.is_empty() {
                    return Err(invalid(key, "sequence needs at least one move"));
                }
                BuiltinStrategy::Sequence(
                    moves
                        .iter()
                        .map(|m| m.resolve(variant, key))
                        .collect::<Result<_, _>>()?,
                )
            }
        })
    }
}

/// A validated roster entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterEntry {
    pub id: PlayerId,
    pub name: String,
    pub strategy: BuiltinStrategy,
}

/// Everything `play` and `tournament` need, validated.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub variant: Variant,
    pub games_per_match: u32,
    pub latency: LatencyModel,
    pub timeout_days: u64,
    pub adversary: Option<AdversarySpec>,
    pub federation: Option<PathBuf>,
    pub roster: Vec<RosterEntry>,
}

impl Settings {
    /// The simulation for `a` (commits first) against `b`, seeded with `seed`.
    pub fn sim_config(&self, a: &RosterEntry, b: &RosterEntry, seed: u64) -> SimConfig {
        SimConfig {
            seed,
            latency: self.latency,
            timeout_days: self.timeout_days,
            adversary: self.adversary,
            variant: self.variant.clone(),
            games_per_match: self.games_per_match,
            players: [
                PlayerSetup {
                    id: a.id.clone(),
                    strategy: a.strategy.clone(),
                },
                PlayerSetup {
                    id: b.id.clone(),
                    strategy: b.strategy.clone(),
                },
            ],
        }
    }

    pub fn player(&self, id: &PlayerId) -> Option<&RosterEntry> {
        self.roster.iter().find(|p| p.id == *id)
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Settings, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: CliConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut settings = cfg.validate()?;
        if let Some(fed) = settings.federation.as_mut() {
            if fed.is_relative() {
                if let Some(dir) = path.parent() {
                    *fed = dir.join(&*fed);
                }
            }
        }
        Ok(settings)
    }

    pub fn validate(self) -> Result<Settings, ConfigError> {
        let variant = match &self.variant {
            Some(v) => Variant::new(v.n, v.move_names.clone()).map_err(|e| invalid("variant", e))?,
            None => Variant::standard(),
        };
        let games_per_match = self.games_per_match.unwrap_or(DEFAULT_GAMES_PER_MATCH);
        if games_per_match == 0 {
            return Err(invalid("games_per_match", "must be positive"));
        }
        let latency = match &self.latency {
            Some(l) => LatencyModel {
                min_days: l.min_days,
                max_days: l.max_days,
            },
            None => LatencyModel::default(),
        };
        if latency.min_days < 1 || latency.max_days < latency.min_days {
            return Err(invalid("latency", "need 1 <= min_days <= max_days"));
        }
        let timeout_days = self.timeout_days.unwrap_or(DEFAULT_TIMEOUT_DAYS);
        if timeout_days == 0 {
            return Err(invalid("timeout_days", "must be positive"));
        }

        let adversary = match &self.adversary {
            None => None,
            Some(a) => {
                let kind: AdversaryKind = a.kind.parse().map_err(|e| invalid("adversary.kind", e))?;
                let mut spec = AdversarySpec::default_for(kind);
                if let Some(g) = a.game {
                    spec.game_index = g;
                }
                if let Some(f) = a.flow {
                    spec.flow = Flow::from_number(f)
                        .ok_or_else(|| invalid("adversary.flow", "must be 1, 2 or 3"))?;
                }
                if let Some(m) = &a.replacement_move {
                    spec.replacement_move = Some(m.resolve(&variant, "adversary.replacement_move")?);
                }
                spec.validate(games_per_match).map_err(|e| invalid("adversary", e))?;
                Some(spec)
            }
        };

        if self.players.len() < 2 {
            return Err(invalid("players", "need at least two players"));
        }
        let mut roster: Vec<RosterEntry> = Vec::new();
        for (i, p) in self.players.iter().enumerate() {
            let key = format!("players[{i}]");
            if p.id.is_empty() {
                return Err(invalid(&format!("{key}.id"), "must be non-empty"));
            }
            if roster.iter().any(|r| r.id.as_str() == p.id) {
                return Err(invalid(&format!("{key}.id"), format!("duplicate id {:?}", p.id)));
            }
            roster.push(RosterEntry {
                id: PlayerId::new(p.id.clone()),
                name: p.name.clone().unwrap_or_else(|| p.id.clone()),
                strategy: p.strategy.build(&variant, &format!("{key}.strategy"))?,
            });
        }

        Ok(Settings {
            seed: self.seed,
            variant,
            games_per_match,
            latency,
            timeout_days,
            adversary,
            federation: self.federation,
            roster,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<Settings, String> {
        let cfg: CliConfig = serde_json::from_str(json).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())
    }

    const PLAYERS: &str = r#""players": [
        {"id": "alice", "strategy": {"kind": "constant", "move": "rock"}},
        {"id": "bob", "name": "Bob", "strategy": {"kind": "sequence", "moves": [0, "paper"]}}
    ]"#;

    #[test]
    fn defaults() {
        let s = parse(&format!(r#"{{"seed": 1, {PLAYERS}}}"#)).unwrap();
        assert_eq!(s.variant.n(), 3);
        assert_eq!(s.games_per_match, 10);
        assert_eq!(s.latency, LatencyModel { min_days: 2, max_days: 5 });
        assert_eq!(s.timeout_days, 30);
        assert_eq!(s.roster[0].name, "alice");
        assert_eq!(s.roster[0].strategy, BuiltinStrategy::Constant(Move::ROCK));
        assert_eq!(s.roster[1].strategy, BuiltinStrategy::Sequence(vec![Move::ROCK, Move::PAPER]));
    }

    #[test]
    fn seed_is_required() {
        let err = parse(&format!("{{{PLAYERS}}}")).unwrap_err();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse(&format!(r#"{{"seed": 1, "sede": 2, {PLAYERS}}}"#)).unwrap_err();
        assert!(err.contains("sede"), "{err}");
    }

    #[test]
    fn adversary_defaults_and_overrides() {
        let s = parse(&format!(r#"{{"seed": 1, "adversary": {{"kind": "equivocate", "replacement_move": "scissors"}}, {PLAYERS}}}"#)).unwrap();
        let spec = s.adversary.unwrap();
        assert_eq!((spec.kind, spec.game_index, spec.flow), (AdversaryKind::Equivocate, 0, Flow::Reveal));
        assert_eq!(spec.replacement_move, Some(Move::SCISSORS));

        let err = parse(&format!(r#"{{"seed": 1, "adversary": {{"kind": "equivocate", "flow": 1}}, {PLAYERS}}}"#)).unwrap_err();
        assert!(err.contains("adversary"), "{err}");
        let err = parse(&format!(r#"{{"seed": 1, "adversary": {{"kind": "bribe"}}, {PLAYERS}}}"#)).unwrap_err();
        assert!(err.contains("adversary.kind"), "{err}");
    }

    #[test]
    fn bad_values_are_named() {
        let err = parse(&format!(r#"{{"seed": 1, "variant": {{"n": 4}}, {PLAYERS}}}"#)).unwrap_err();
        assert!(err.contains("variant"), "{err}");
        let err = parse(r#"{"seed": 1, "players": [{"id": "a", "strategy": {"kind": "cycle"}}]}"#).unwrap_err();
        assert!(err.contains("players"), "{err}");
        let err = parse(r#"{"seed": 1, "players": [{"id": "a", "strategy": {"kind": "cycle"}}, {"id": "a", "strategy": {"kind": "cycle"}}]}"#).unwrap_err();
        assert!(err.contains("players[1].id"), "{err}");
        let err = parse(r#"{"seed": 1, "players": [{"id": "a", "strategy": {"kind": "constant", "move": "lizard"}}, {"id": "b", "strategy": {"kind": "cycle"}}]}"#).unwrap_err();
        assert!(err.contains("players[0].strategy"), "{err}");
    }
}
