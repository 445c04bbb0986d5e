//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Time limits are wall-clock and include setup.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use postal_rps::commands::peek_trials;
use postal_rps::core::federation::{ranking_change, Branch};
use postal_rps::core::protocol::{Flow, FlowBody, FlowMessage, ProtocolError};
use postal_rps::core::rules::{match_points, GameOutcome, Move, Variant};
use postal_rps::core::sim::{
    run_simulation, AdversaryKind, AdversarySpec, Detail, EventKind, PlayerSetup, Role, SimConfig,
    SimOutcome, TerminalStatus,
};
use postal_rps::core::strategy::BuiltinStrategy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn players(a: BuiltinStrategy, b: BuiltinStrategy) -> [PlayerSetup; 2] {
    [
        PlayerSetup { id: "alice".into(), strategy: a },
        PlayerSetup { id: "bob".into(), strategy: b },
    ]
}

fn rules_fidelity() -> Check {
    let v = Variant::standard();
    let (rock, paper, scissors) = (Move::ROCK, Move::PAPER, Move::SCISSORS);
    // rock breaks scissors, scissors cut paper, paper covers rock
    let wins = [(rock, scissors), (scissors, paper), (paper, rock)];
    let mut checked = 0;
    for a in [rock, paper, scissors] {
        for b in [rock, paper, scissors] {
            let expected = if a == b {
                GameOutcome::Draw
            } else if wins.contains(&(a, b)) {
                GameOutcome::FirstWins
            } else {
                GameOutcome::SecondWins
            };
            let got = v.outcome(a, b);
            ensure(got == expected, || format!("{} vs {}: {got} != {expected}", v.name(a), v.name(b)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked}/9 ordered pairs"))
}

fn points_example() -> Check {
    let p = match_points(7, 3, 10).map_err(|e| e.to_string())?;
    ensure((p.p_first, p.p_second) == (4, -4), || format!("got ({}, {})", p.p_first, p.p_second))?;
    Ok("7-3 gives (+4, -4)".into())
}

fn formula_suite() -> Check {
    let h = |points: i64| points * 2;
    let cases = [
        ((100, 120, 4), (127, 111)),
        ((100, 120, -2), (99, 121)),
        ((100, 100, 0), (101, 101)),
        ((100, 105, 10), (118, 93)),
    ];
    for ((ra, rb, p), (na, nb)) in cases {
        let (ga, gb, _) = ranking_change(h(ra), h(rb), p);
        ensure((ga, gb) == (h(na), h(nb)), || {
            format!("({ra}, {rb}, {p}) gave halves ({ga}, {gb}), want ({}, {})", h(na), h(nb))
        })?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let (mut expected, mut upset) = (0, 0);
    for _ in 0..10_000 {
        let ra = rng.gen_range(-1000i64..=1000);
        let rb = rng.gen_range(-1000i64..=1000);
        let p = rng.gen_range(-10i64..=10);
        let (na, nb, branch) = ranking_change(ra, rb, p);
        let drift_halves = (na - ra) + (nb - rb);
        match branch {
            Branch::Expected => {
                expected += 1;
                ensure(drift_halves == 0, || format!("branch 2 not zero-sum at ({ra}, {rb}, {p})"))?;
            }
            Branch::UpsetOrDraw => {
                upset += 1;
                let delta = (ra - rb).abs() as f64 / 2.0;
                let f = (delta / 5.0).floor() + 0.5;
                let want = 4.0 * f;
                ensure(drift_halves as f64 / 2.0 == want, || {
                    format!("branch 1 drift {drift_halves} halves at ({ra}, {rb}, {p}), want {want} points")
                })?;
            }
        }
    }
    Ok(format!("4 worked cases; 10000 triples ({expected} expected, {upset} upset/draw)"))
}

fn balance() -> Check {
    for n in (3..=25).step_by(2) {
        let v = Variant::new(n, None).map_err(|e| e.to_string())?;
        for i in v.moves() {
            let beats = v.moves().filter(|&j| v.beats(i, j)).count() as u32;
            let loses = v.moves().filter(|&j| v.beats(j, i)).count() as u32;
            ensure(beats == (n - 1) / 2 && loses == (n - 1) / 2, || {
                format!("n={n} move {}: beats {beats}, loses to {loses}", i.index())
            })?;
        }
    }
    Ok("n = 3, 5, ..., 25 all balanced".into())
}

fn sends(out: &SimOutcome) -> impl Iterator<Item = (u64, &str, u32, u8, &str)> + '_ {
    out.trace.of_kind(EventKind::Send).filter_map(|e| match &e.detail {
        Detail::Send { game, flow, message, .. } => Some((e.seq, e.actor.as_str(), *game, *flow, message.as_str())),
        _ => None,
    })
}

fn deliveries(out: &SimOutcome) -> impl Iterator<Item = (u64, &str, u32, u8)> + '_ {
    out.trace.of_kind(EventKind::Deliver).filter_map(|e| match &e.detail {
        Detail::Deliver { game, flow, .. } => Some((e.seq, e.actor.as_str(), *game, *flow)),
        _ => None,
    })
}

/// Per-game checks on a completed run.
fn check_honest_run(out: &SimOutcome, variant: &Variant) -> Result<(), String> {
    ensure(out.trace.status == TerminalStatus::MatchComplete, || format!("status {}", out.trace.status))?;
    let games = out.result.as_ref().map_or(0, |r| r.games.len());

    // both parties record the same game
    let mut decided: BTreeMap<u32, Vec<(Move, Move, GameOutcome)>> = BTreeMap::new();
    for e in out.trace.of_kind(EventKind::Decide) {
        if let Detail::Decide { game, committer_move, responder_move, outcome, .. } = &e.detail {
            decided.entry(*game).or_default().push((*committer_move, *responder_move, *outcome));
        }
    }
    ensure(decided.len() == games, || format!("{} decided games of {games}", decided.len()))?;
    for (game, views) in &decided {
        ensure(views.len() == 2 && views[0] == views[1], || format!("game {game}: parties disagree {views:?}"))?;
        let (c, r, o) = views[0];
        let sealed = out.sealed.iter().find(|s| s.game == *game).map(|s| s.mv);
        ensure(sealed == Some(c) && variant.outcome(c, r) == o, || format!("game {game}: decision contradicts sealed move"))?;
    }

    // flow 2 leaves the responder before the opening reaches it
    for game in 0..games as u32 {
        let flow2 = sends(out).find(|s| s.2 == game && s.3 == 2).map(|s| s.0);
        let opening = deliveries(out).find(|d| d.2 == game && d.3 == 3).map(|d| d.0);
        match (flow2, opening) {
            (Some(s), Some(d)) => ensure(s < d, || format!("game {game}: flow 2 at seq {s}, opening delivered at {d}"))?,
            _ => return Err(format!("game {game}: missing flow 2 send or flow 3 delivery")),
        }
    }

    // flows 1 and 2 carry nothing that reveals the committer's move
    let mut nonces = BTreeMap::new();
    for (_, _, game, flow, hex_msg) in sends(out) {
        if flow == 3 {
            let bytes = hex::decode(hex_msg).map_err(|e| e.to_string())?;
            let msg = FlowMessage::decode(&bytes).map_err(|e| e.to_string())?;
            if let FlowBody::Reveal { opening, .. } = msg.body {
                nonces.insert(game, opening.nonce.0);
            }
        }
    }
    for (_, _, game, flow, hex_msg) in sends(out) {
        if flow == 3 {
            continue;
        }
        let bytes = hex::decode(hex_msg).map_err(|e| e.to_string())?;
        let msg = FlowMessage::decode(&bytes).map_err(|e| e.to_string())?;
        ensure(!matches!(msg.body, FlowBody::Reveal { .. }), || format!("game {game} flow {flow} carries an opening"))?;
        let nonce = nonces.get(&game).ok_or_else(|| format!("game {game}: no opening sent"))?;
        ensure(!bytes.windows(16).any(|w| w == nonce), || format!("game {game} flow {flow} leaks the nonce"))?;
    }
    Ok(())
}

fn protocol_safety() -> Check {
    let strategies = [
        BuiltinStrategy::UniformRandom,
        BuiltinStrategy::FrequencyCounter,
        BuiltinStrategy::Cycle,
        BuiltinStrategy::Constant(Move(1)),
        BuiltinStrategy::Sequence(vec![Move(2), Move(0), Move(0), Move(1)]),
    ];
    let ns = [3u32, 5, 25];
    let mut games = 0;
    for i in 0..1000u64 {
        let n = ns[(i % 3) as usize];
        let a = strategies[(i % 5) as usize].clone();
        let b = strategies[((i / 5) % 5) as usize].clone();
        let mut cfg = SimConfig::new(10_000 + i, players(a, b));
        cfg.variant = Variant::new(n, None).unwrap();
        let out = run_simulation(&cfg).map_err(|e| e.to_string())?;
        check_honest_run(&out, &cfg.variant).map_err(|e| format!("seed {}: {e}", cfg.seed))?;
        games += out.games.len();
    }
    Ok(format!("1000/1000 complete, {games} games agreed and ordered, no plaintext in flows 1-2"))
}

fn attack_suite() -> Check {
    use AdversaryKind::*;
    let flows = [Flow::Commit, Flow::Respond, Flow::Reveal];
    let mut summary = Vec::new();
    for kind in [Swap, Tamper, Equivocate, Replay, Drop] {
        let mut caught = 0;
        for seed in 0..100u64 {
            let game = match kind {
                Replay => 1 + (seed % 9) as u32,
                _ => (seed % 10) as u32,
            };
            let flow = if kind == Equivocate { Flow::Reveal } else { flows[(seed / 10 % 3) as usize] };
            let spec = AdversarySpec::new(kind, game, flow);
            let mut cfg = SimConfig::new(seed, players(BuiltinStrategy::UniformRandom, BuiltinStrategy::UniformRandom));
            cfg.adversary = Some(spec);
            let out = run_simulation(&cfg).map_err(|e| e.to_string())?;
            let label = format!("{kind} seed {seed} game {game} flow {flow}");

            for e in out.trace.of_kind(EventKind::Decide) {
                if let Detail::Decide { game, committer_move, responder_move, outcome, .. } = &e.detail {
                    let sealed = out.sealed.iter().find(|s| s.game == *game).map(|s| s.mv);
                    let consistent = sealed == Some(*committer_move)
                        && cfg.variant.outcome(*committer_move, *responder_move) == *outcome;
                    ensure(consistent, || format!("{label}: inconsistent decision in game {game}"))?;
                }
            }

            let TerminalStatus::Aborted(abort) = &out.trace.status else {
                return Err(format!("{label}: undetected"));
            };
            let want = match (kind, flow) {
                (Drop, _) => ProtocolError::Timeout,
                (Equivocate, _) => ProtocolError::BadOpening,
                (_, Flow::Commit) => ProtocolError::InvalidCommitterSignature,
                _ => ProtocolError::SwapDetected,
            };
            let want_role = match (kind, flow) {
                (Drop, _) => None,
                (_, Flow::Respond) => Some(Role::Committer),
                _ => Some(Role::Responder),
            };
            ensure(abort.error == want, || format!("{label}: got {}, want {}", abort.error.name(), want.name()))?;
            if let Some(role) = want_role {
                ensure(abort.role == role && abort.flow == flow.number() && abort.game == game, || {
                    format!("{label}: caught by {} at game {} flow {}", abort.role, abort.game, abort.flow)
                })?;
            }
            ensure(out.result.is_none() && out.games.len() == game as usize, || format!("{label}: games recorded past the attack"))?;
            caught += 1;
        }
        summary.push(format!("{kind} {caught}/100"));
    }
    Ok(summary.join(", "))
}

fn hiding() -> Check {
    let spec = AdversarySpec::default_for(AdversaryKind::Peek);
    let stats = peek_trials(spec, &Variant::standard(), 1, 1000).map_err(|e| e.to_string())?;
    let line = format!(
        "{} / {} correct guesses, rate {:.4}, 1/3 +/- {:.4}",
        stats.hits, stats.trials, stats.rate, stats.bound
    );
    if stats.within_bound() {
        Ok(line)
    } else {
        Err(line)
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{
  "seed": 314,
  "variant": {"n": 5},
  "adversary": {"kind": "peek", "game": 4, "flow": 2},
  "players": [
    {"id": "alice", "strategy": {"kind": "uniform_random"}},
    {"id": "bob", "strategy": {"kind": "frequency_counter"}}
  ]
}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for i in 0..2 {
        let trace = dir.path().join(format!("trace{i}.jsonl"));
        let out = Command::new(env!("CARGO_BIN_EXE_postal-rps"))
            .args(["play", cfg.to_str().unwrap(), "--out", trace.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("play exited {:?}", out.status.code()))?;
        let bytes = std::fs::read(&trace).map_err(|e| e.to_string())?;
        runs.push((out.stdout, postal_rps::trace_file::digest_bytes(&bytes), bytes));
    }
    ensure(runs[0].0 == runs[1].0, || "stdout differs".into())?;
    ensure(runs[0].2 == runs[1].2, || "trace bytes differ".into())?;
    ensure(runs[0].1 == runs[1].1, || "trace digests differ".into())?;
    Ok(format!("stdout and trace identical, digest {}", &runs[0].1[..16]))
}

fn alternation() -> Check {
    let cfg = SimConfig::new(99, players(BuiltinStrategy::UniformRandom, BuiltinStrategy::Cycle));
    let out = run_simulation(&cfg).map_err(|e| e.to_string())?;
    ensure(out.trace.status == TerminalStatus::MatchComplete, || "match did not complete".into())?;
    let games = out.result.as_ref().unwrap().games.len() as u32;
    ensure(games == 10, || format!("{games} games"))?;
    let committers: Vec<&str> = (0..games)
        .map(|g| sends(&out).find(|s| s.2 == g && s.3 == 1).map_or("?", |s| s.1))
        .collect();
    let expected: Vec<&str> = (0..games).map(|g| if g % 2 == 0 { "alice" } else { "bob" }).collect();
    ensure(committers == expected, || format!("committers {committers:?}"))?;
    for k in 0..games - 1 {
        let reveal_delivered = deliveries(&out).find(|d| d.2 == k && d.3 == 3).map(|d| d.0);
        let next_commit = sends(&out).find(|s| s.2 == k + 1 && s.3 == 1).map(|s| s.0);
        match (reveal_delivered, next_commit) {
            (Some(d), Some(s)) => ensure(d < s, || format!("flow 1 of game {} sent at seq {s} before flow 3 of game {k} delivered at {d}", k + 1))?,
            _ => return Err(format!("games {k}/{}: missing events", k + 1)),
        }
    }
    Ok("committers A,B,A,... and each flow 1 follows the previous reveal".into())
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "rules fidelity", limit: Some(Duration::from_millis(1)), run: rules_fidelity },
        Criterion { id: 2, name: "match points", limit: None, run: points_example },
        Criterion { id: 3, name: "ranking formula", limit: Some(Duration::from_secs(1)), run: formula_suite },
        Criterion { id: 4, name: "balance", limit: Some(Duration::from_secs(1)), run: balance },
        Criterion { id: 5, name: "protocol safety", limit: Some(Duration::from_secs(10)), run: protocol_safety },
        Criterion { id: 6, name: "attack suite", limit: Some(Duration::from_secs(10)), run: attack_suite },
        Criterion { id: 7, name: "hiding", limit: Some(Duration::from_secs(5)), run: hiding },
        Criterion { id: 8, name: "determinism", limit: None, run: determinism },
        Criterion { id: 9, name: "sequencing", limit: None, run: alternation },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(msg), Some(limit)) if elapsed > limit => Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        let limit = c.limit.map_or(String::new(), |l| format!(", limit {l:?}"));
        match result {
            Ok(msg) => println!("PASS {}. {}: {msg} ({elapsed:.2?}{limit})", c.id, c.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}. {}: {msg} ({elapsed:.2?}{limit})", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
