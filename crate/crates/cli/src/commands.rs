use std::path::Path;

use anyhow::Context;
use lcr_core::monte_carlo::chips_trajectory;
use lcr_core::rules::roll_distribution;
use lcr_core::solver::{
    build_transition_system, expected_chips_exact, load_system, save_system, solve_game,
    BuildOptions, TransitionSystem, DEFAULT_EXACT_CAP, MAX_TRAJECTORY_TURNS,
};
use lcr_core::state_space::{count_states as states_for, growth_ratio};
use lcr_core::{expected_winnings, LcrError, RuleVariant, SimConfig, TurnChips};
use serde_json::json;

use crate::output::{full, grid, p3, CsvTable, Report};
use crate::{
    usage, AnalyzeArgs, ChipsArgs, CountStatesArgs, ExactArgs, RollDistArgs, SimulateArgs,
    SweepArgs, SweepMode,
};

fn check_cap(n: usize, exact: &ExactArgs) -> anyhow::Result<()> {
    if n > DEFAULT_EXACT_CAP && !exact.force {
        return Err(usage(format!(
            "exact analysis is limited to {DEFAULT_EXACT_CAP} players (requested {n}); pass --force to attempt it anyway"
        )));
    }
    Ok(())
}

fn build_options(exact: &ExactArgs) -> BuildOptions {
    BuildOptions {
        max_players: if exact.force {
            usize::MAX
        } else {
            DEFAULT_EXACT_CAP
        },
        ..BuildOptions::default()
    }
}

/// Builds the transition system, going through the on-disk cache when one
/// is configured. A bad cache file is reported and rebuilt.
fn system(n: usize, exact: &ExactArgs) -> anyhow::Result<TransitionSystem> {
    check_cap(n, exact)?;
    let Some(dir) = &exact.cache_dir else {
        return Ok(build_transition_system(n, &build_options(exact))?);
    };
    let path = dir.join(format!("lcr-{n}.lcrt"));
    if path.exists() {
        match load_system(&path) {
            Ok(sys) if sys.n() == n => return Ok(sys),
            Ok(sys) => eprintln!(
                "warning: {} holds a {}-player system; rebuilding",
                path.display(),
                sys.n()
            ),
            Err(e) => eprintln!("warning: ignoring cache {}: {e}", path.display()),
        }
    }
    let sys = build_transition_system(n, &build_options(exact))?;
    if let Err(e) = store(&sys, dir, &path) {
        eprintln!("warning: could not write cache {}: {e:#}", path.display());
    }
    Ok(sys)
}

fn store(sys: &TransitionSystem, dir: &Path, path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    save_system(sys, path)?;
    Ok(())
}

fn variant_label(v: RuleVariant) -> &'static str {
    if v.is_modified() {
        "modified start"
    } else {
        "standard start"
    }
}

fn with_commas(digits: &str) -> String {
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

pub fn analyze(args: &AnalyzeArgs) -> anyhow::Result<Report> {
    let n = args.players;
    let variant = RuleVariant::from_flag(args.modified_start);
    if n < 2 {
        return Err(LcrError::TooFewPlayers(n).into());
    }
    if !args.stake.is_finite() || args.stake <= 0.0 {
        return Err(usage(format!(
            "--stake must be positive, got {}",
            args.stake
        )));
    }
    let sys = system(n, &args.exact)?;
    let report = solve_game(&sys, variant).context("exact solve failed")?;
    let winnings = expected_winnings(report.win_probability.as_slice(), args.stake)?;

    let mut results = serde_json::to_value(&report)?;
    results["states"] = json!(sys.space().total());
    results["stake"] = json!(args.stake);
    results["expected_winnings"] = json!(winnings);

    let mut csv = CsvTable::new([
        "players",
        "variant",
        "seat",
        "win_probability",
        "expected_winnings",
        "expected_length",
        "length_std_dev",
    ]);
    let mut rows = Vec::new();
    for (k, (&p, &w)) in report.win_probability.iter().zip(&winnings).enumerate() {
        csv.push(vec![
            n.to_string(),
            variant.to_string(),
            (k + 1).to_string(),
            full(p),
            full(w),
            full(report.expected_length),
            full(report.length_std_dev),
        ]);
        rows.push(vec![(k + 1).to_string(), p3(p), format!("{w:+.2}")]);
    }
    let mut table = format!(
        "{n} players, {}, {} states\nexpected length     {:.3} turns\nstandard deviation  {:.3}\n\n",
        variant_label(variant),
        with_commas(&sys.space().total().to_string()),
        report.expected_length,
        report.length_std_dev,
    );
    table.push_str(&grid(
        &[
            "seat".into(),
            "P(win)".into(),
            format!("winnings @ {}", args.stake),
        ],
        &rows,
    ));

    Ok(Report {
        command: "analyze",
        parameters: json!({
            "players": n,
            "variant": variant,
            "stake": args.stake,
            "force": args.exact.force,
        }),
        results,
        table,
        csv,
    })
}

pub fn simulate(args: &SimulateArgs, threads: Option<usize>) -> anyhow::Result<Report> {
    let variant = RuleVariant::from_flag(args.modified_start);
    let mut config = SimConfig::new(args.players, args.games, args.seed).with_variant(variant);
    config.track_chips_turns = args.chips_turns;
    config.workers = threads;
    config.validate()?;
    let report = lcr_core::run_simulation(&config)?;

    let mut csv = CsvTable::new([
        "players",
        "variant",
        "games",
        "seat",
        "wins",
        "win_proportion",
        "win_proportion_se",
        "mean_length",
        "length_sample_std",
        "length_mc_error",
    ]);
    let mut rows = Vec::new();
    for k in 0..report.n {
        csv.push(vec![
            report.n.to_string(),
            variant.to_string(),
            report.games.to_string(),
            (k + 1).to_string(),
            report.wins[k].to_string(),
            full(report.win_proportion[k]),
            full(report.win_proportion_se[k]),
            full(report.mean_length),
            full(report.length_sample_std),
            full(report.length_mc_error),
        ]);
        rows.push(vec![
            (k + 1).to_string(),
            report.wins[k].to_string(),
            format!(
                "{:.4} ± {:.4}",
                report.win_proportion[k],
                2.0 * report.win_proportion_se[k]
            ),
        ]);
    }
    let mut table = format!(
        "{} players, {}, {} games, seed {}\nmean length         {:.3} ± {:.3}\nstandard deviation  {:.3}\n\n",
        report.n,
        variant_label(variant),
        report.games,
        args.seed,
        report.mean_length,
        2.0 * report.length_mc_error,
        report.length_sample_std,
    );
    table.push_str(&grid(
        &["seat".into(), "wins".into(), "P(win) ± 2se".into()],
        &rows,
    ));
    if let Some(chips) = &report.chips_by_turn {
        table.push('\n');
        table.push_str(&chips_grid(report.n, chips));
    }

    Ok(Report {
        command: "simulate",
        parameters: json!({
            "players": args.players,
            "games": args.games,
            "seed": args.seed,
            "variant": variant,
            "chips_turns": args.chips_turns,
        }),
        results: serde_json::to_value(&report)?,
        table,
        csv,
    })
}

pub fn count_states(args: &CountStatesArgs) -> anyhow::Result<Report> {
    let n = args.players;
    let states = states_for(n)?;
    let digits = states.to_string();
    let as_json = match u64::try_from(&states) {
        Ok(v) => json!(v),
        Err(_) => json!(digits),
    };
    let ratio = growth_ratio(n)?;
    let mut csv = CsvTable::new(["players", "states", "growth_ratio"]);
    csv.push(vec![n.to_string(), digits.clone(), full(ratio)]);
    Ok(Report {
        command: "count-states",
        parameters: json!({ "players": n }),
        results: json!({ "players": n, "states": as_json, "growth_ratio": ratio }),
        table: format!(
            "{n} players: {} states\nratio to {} players: {ratio:.4}\n",
            with_commas(&digits),
            n + 1
        ),
        csv,
    })
}

fn roll_label(left: u32, center: u32, right: u32) -> String {
    let s = "L".repeat(left as usize) + &"C".repeat(center as usize) + &"R".repeat(right as usize);
    if s.is_empty() {
        "none".into()
    } else {
        s
    }
}

pub fn roll_dist(args: &RollDistArgs) -> anyhow::Result<Report> {
    let dist = roll_distribution(args.dice)?;
    let mut csv = CsvTable::new(["left", "center", "right", "hold", "probability", "decimal"]);
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for o in dist {
        let f = o.faces;
        let hold = args.dice as u32 - f.moved();
        let fraction = o.probability.to_string();
        let decimal = *o.probability.numer() as f64 / *o.probability.denom() as f64;
        csv.push(vec![
            f.left.to_string(),
            f.center.to_string(),
            f.right.to_string(),
            hold.to_string(),
            fraction.clone(),
            full(decimal),
        ]);
        rows.push(vec![
            roll_label(f.left, f.center, f.right),
            fraction.clone(),
            format!("{decimal:.6}"),
        ]);
        outcomes.push(json!({
            "left": f.left,
            "center": f.center,
            "right": f.right,
            "hold": hold,
            "probability": fraction,
            "decimal": decimal,
        }));
    }
    let mut table = grid(
        &["outcome".into(), "probability".into(), "decimal".into()],
        &rows,
    );
    table.push_str(&format!("{} outcomes\n", dist.len()));
    Ok(Report {
        command: "roll-dist",
        parameters: json!({ "dice": args.dice }),
        results: json!({ "dice": args.dice, "count": dist.len(), "outcomes": outcomes }),
        table,
        csv,
    })
}

fn chips_grid(n: usize, rows: &[TurnChips]) -> String {
    let mut header = vec!["turn".to_string()];
    header.extend((1..=n).map(|k| format!("seat {k}")));
    header.push("center".into());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.turn.to_string()];
            cells.extend(r.seats.iter().map(|c| format!("{c:.3}")));
            cells.push(format!("{:.3}", r.center));
            cells
        })
        .collect();
    grid(&header, &body)
}

pub fn chips(args: &ChipsArgs, threads: Option<usize>) -> anyhow::Result<Report> {
    let n = args.players;
    let variant = RuleVariant::from_flag(args.modified_start);
    if n < 2 {
        return Err(LcrError::TooFewPlayers(n).into());
    }
    if args.turns == 0 || args.turns > MAX_TRAJECTORY_TURNS {
        return Err(usage(format!(
            "--turns must be between 1 and {MAX_TRAJECTORY_TURNS}"
        )));
    }
    let use_exact =
        args.exact || (args.games.is_none() && (n <= DEFAULT_EXACT_CAP || args.exact_opts.force));
    let (rows, games) = if use_exact {
        let sys = system(n, &args.exact_opts)?;
        (expected_chips_exact(&sys, variant, args.turns)?, None)
    } else {
        let games = args.games.unwrap_or(1_000_000);
        let mut config = SimConfig::new(n, games, args.seed).with_variant(variant);
        config.workers = threads;
        (chips_trajectory(&config, args.turns)?, Some(games))
    };

    let mut header = vec!["turn".to_string()];
    header.extend((1..=n).map(|k| format!("seat_{k}")));
    header.push("center".into());
    let mut csv = CsvTable::new(header);
    for r in &rows {
        let mut cells = vec![r.turn.to_string()];
        cells.extend(r.seats.iter().map(|&c| full(c)));
        cells.push(full(r.center));
        csv.push(cells);
    }
    let method = if games.is_some() { "simulate" } else { "exact" };
    let mut table = format!("{n} players, {}, {method}", variant_label(variant));
    if let Some(g) = games {
        table.push_str(&format!(" ({g} games, seed {})", args.seed));
    }
    table.push_str("\n\n");
    table.push_str(&chips_grid(n, &rows));

    Ok(Report {
        command: "chips",
        parameters: json!({
            "players": n,
            "turns": args.turns,
            "variant": variant,
            "games": args.games,
            "seed": args.seed,
            "exact": args.exact,
            "force": args.exact_opts.force,
        }),
        results: json!({
            "players": n,
            "variant": variant,
            "method": method,
            "games": games,
            "rows": rows,
        }),
        table,
        csv,
    })
}

struct SweepEntry {
    players: usize,
    method: &'static str,
    games: Option<u64>,
    expected_length: f64,
    expected_length_se: f64,
    length_std_dev: f64,
    win_probability: Vec<f64>,
    win_probability_se: Vec<f64>,
}

pub fn sweep(args: &SweepArgs, threads: Option<usize>) -> anyhow::Result<Report> {
    if args.players_min < 2 {
        return Err(LcrError::TooFewPlayers(args.players_min).into());
    }
    if args.players_min > args.players_max {
        return Err(usage(format!(
            "--players-min {} exceeds --players-max {}",
            args.players_min, args.players_max
        )));
    }
    if args.mode == SweepMode::Exact {
        check_cap(args.players_max, &args.exact)?;
    }
    let variant = RuleVariant::from_flag(args.modified_start);
    let mut entries = Vec::new();
    for n in args.players_min..=args.players_max {
        let exact = match args.mode {
            SweepMode::Exact => true,
            SweepMode::Simulate => false,
            SweepMode::Auto => n <= DEFAULT_EXACT_CAP,
        };
        let entry = if exact {
            let sys = system(n, &args.exact)?;
            let r = solve_game(&sys, variant)
                .with_context(|| format!("exact solve failed for {n} players"))?;
            SweepEntry {
                players: n,
                method: "exact",
                games: None,
                expected_length: r.expected_length,
                expected_length_se: 0.0,
                length_std_dev: r.length_std_dev,
                win_probability_se: vec![0.0; n],
                win_probability: r.win_probability,
            }
        } else {
            let mut config = SimConfig::new(n, args.games, args.seed).with_variant(variant);
            config.workers = threads;
            let r = lcr_core::run_simulation(&config)?;
            SweepEntry {
                players: n,
                method: "simulate",
                games: Some(r.games),
                expected_length: r.mean_length,
                expected_length_se: r.length_mc_error,
                length_std_dev: r.length_sample_std,
                win_probability: r.win_proportion,
                win_probability_se: r.win_proportion_se,
            }
        };
        entries.push(entry);
    }

    let mut csv = CsvTable::new([
        "players",
        "method",
        "seat",
        "win_probability",
        "win_probability_se",
        "expected_length",
        "expected_length_se",
    ]);
    let mut rows = Vec::new();
    let mut json_entries = Vec::new();
    for e in &entries {
        for k in 0..e.players {
            csv.push(vec![
                e.players.to_string(),
                e.method.into(),
                (k + 1).to_string(),
                full(e.win_probability[k]),
                full(e.win_probability_se[k]),
                full(e.expected_length),
                full(e.expected_length_se),
            ]);
        }
        let length = if e.method == "exact" {
            format!("{:.3}", e.expected_length)
        } else {
            format!(
                "{:.3} ± {:.3}",
                e.expected_length,
                2.0 * e.expected_length_se
            )
        };
        let probs = if e.players <= 10 {
            e.win_probability
                .iter()
                .map(|&p| p3(p))
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            let (lo, hi) = e
                .win_probability
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &p| (lo.min(p), hi.max(p)));
            format!("range {} to {}", p3(lo), p3(hi))
        };
        rows.push(vec![
            e.players.to_string(),
            e.method.into(),
            length,
            format!("{:.3}", e.length_std_dev),
            probs,
        ]);
        json_entries.push(json!({
            "players": e.players,
            "method": e.method,
            "games": e.games,
            "expected_length": e.expected_length,
            "expected_length_se": e.expected_length_se,
            "length_std_dev": e.length_std_dev,
            "win_probability": e.win_probability,
            "win_probability_se": e.win_probability_se,
        }));
    }
    let mode = match args.mode {
        SweepMode::Exact => "exact",
        SweepMode::Simulate => "simulate",
        SweepMode::Auto => "auto",
    };
    let table = grid(
        &[
            "players".into(),
            "method".into(),
            "length".into(),
            "std dev".into(),
            "P(win) by seat".into(),
        ],
        &rows,
    );
    Ok(Report {
        command: "sweep",
        parameters: json!({
            "players_min": args.players_min,
            "players_max": args.players_max,
            "mode": mode,
            "games": args.games,
            "seed": args.seed,
            "variant": variant,
            "force": args.exact.force,
        }),
        results: json!({ "variant": variant, "entries": json_entries }),
        table,
        csv,
    })
}
