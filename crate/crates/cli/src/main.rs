//! `ndl` — command-line surface of the Nash dynamics laboratory: game
//! generation and IO, exact solving, dynamic simulation with Lyapunov
//! verification, black-box reduction demos, and proving-game matches.
//! Every command is deterministic given its manifest; all randomness
//! flows from one 64-bit seed through ChaCha20 streams.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ndl_core::affine::{nash_on_affine, nash_on_line, AffineSubspace};
use ndl_core::dynamics::{
    run_trajectory, trajectory_to_csv, BnnDynamic, DiscreteDynamic, Type1Dynamic, Type2Dynamic,
    DEFAULT_ALPHA, DEFAULT_EPS_FIX, DEFAULT_K, DEFAULT_MAX_STEPS,
};
use ndl_core::equilibria::{enumerate_nash, is_nondegenerate, random_nondegenerate_game};
use ndl_core::game::{builtin, format_f64, regret_f64, FloatProfile, Game};
use ndl_core::pg::{bob::bob_by_name, run_match, PgConfig};
use ndl_core::rational::rat_to_string;
use ndl_core::reductions::{
    find_nash_via_type1, uniqueness_test, describe_profile, DynamicOracle,
};
use ndl_core::dynamics::exact::{ExactType1, ExactType2};
use ndl_core::sampling::{rng_for, sample_profile, GENERATOR_NAME};
use ndl_core::{Error, Result};

#[derive(Parser)]
#[command(name = "ndl", version, about = "Nash dynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Game generation and IO.
    Game {
        #[command(subcommand)]
        command: GameCommand,
    },
    /// Exact equilibrium solving.
    Solve {
        #[command(subcommand)]
        command: SolveCommand,
    },
    /// Dynamic simulation and Lyapunov verification.
    Dyn {
        #[command(subcommand)]
        command: DynCommand,
    },
    /// Black-box reduction demos.
    Reduce {
        #[command(subcommand)]
        command: ReduceCommand,
    },
    /// Proving-game matches.
    Pg {
        #[command(subcommand)]
        command: PgCommand,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// Seed; falls back to the NDL_SEED environment variable, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed
            .or_else(|| {
                std::env::var("NDL_SEED")
                    .ok()
                    .and_then(|s| s.parse().ok())
            })
            .unwrap_or(0)
    }
}

#[derive(Subcommand)]
enum GameCommand {
    /// Write a game file: a named builtin or a seeded random
    /// nondegenerate game.
    Gen {
        #[command(flatten)]
        common: Common,
        /// matching-pennies | battle-of-sexes | degenerate-2x2
        #[arg(long, conflicts_with_all = ["rows", "cols"])]
        builtin: Option<String>,
        #[arg(long, requires = "cols")]
        rows: Option<usize>,
        #[arg(long, requires = "rows")]
        cols: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Enumerate all Nash equilibria exactly.
    Enum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
    },
    /// All equilibria on a line (exact algebraic solve).
    Line {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        /// JSON file: {"base": [["num/den",..],..], "directions": [[..]]}
        #[arg(long)]
        line: PathBuf,
    },
    /// Equilibria on an affine subspace of dimension <= 4.
    Affine {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        space: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DynKind {
    #[value(name = "1")]
    Type1,
    #[value(name = "2")]
    Type2,
    Bnn,
}

#[derive(Subcommand)]
enum DynCommand {
    /// Simulate a trajectory and write it as CSV.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        #[arg(long = "type", value_enum)]
        kind: DynKind,
        /// "random" or a float-profile JSON file.
        #[arg(long, default_value = "random")]
        start: String,
        /// Target equilibrium index for the point-toward dynamic.
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
        #[arg(long = "eps-fix", default_value_t = DEFAULT_EPS_FIX)]
        eps_fix: f64,
        #[arg(long = "max-steps", default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Sampled Lyapunov-decrease suites.
    VerifyLyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        #[arg(long = "type", value_enum)]
        kind: DynKind,
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Recover an equilibrium from one query to an honest
    /// point-toward-equilibrium oracle.
    FindNash {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 0)]
        target: usize,
    },
    /// Randomized unique-vs-multiple test through a chamber-dynamic oracle.
    Uniqueness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum PgCommand {
    /// Play one proving-game run and write the transcript.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: PathBuf,
        /// grid | random | cheat
        #[arg(long, default_value = "grid")]
        bob: String,
        #[arg(long, default_value_t = 32)]
        budget: usize,
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
        #[arg(long, default_value_t = 1e-4)]
        rho: f64,
        #[arg(long = "eps-r", default_value_t = 1e-2)]
        eps_r: f64,
        #[arg(long, default_value_t = 0)]
        target: usize,
        /// Verification sampling size.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    match dispatch(cli, started) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_class());
        }
    }
}

fn load_game(path: &Path) -> Result<Game> {
    let text = std::fs::read_to_string(path)?;
    Game::from_json(&serde_json::from_str(&text)?)
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path.display().to_string())
}

fn write_manifest(
    dir: &Path,
    subcommand: &str,
    params: Value,
    seed: u64,
    inputs: &[&Path],
    outputs: &[String],
    started: Instant,
) -> Result<()> {
    let manifest = json!({
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "generator": GENERATOR_NAME,
        "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "outputs": outputs,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_ms": started.elapsed().as_millis() as u64,
    });
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn dispatch(cli: Cli, started: Instant) -> Result<()> {
    match cli.command {
        Command::Game {
            command:
                GameCommand::Gen {
                    common,
                    builtin: builtin_name,
                    rows,
                    cols,
                },
        } => {
            let seed = common.seed();
            let (game, params) = match (&builtin_name, rows, cols) {
                (Some(name), _, _) => {
                    let g = builtin::by_name(name)
                        .ok_or_else(|| Error::Malformed(format!("unknown builtin `{name}`")))?;
                    (g, json!({ "builtin": name }))
                }
                (None, Some(r), Some(c)) => (
                    random_nondegenerate_game(r, c, seed)?,
                    json!({ "rows": r, "cols": c }),
                ),
                _ => {
                    return Err(Error::Malformed(
                        "need either --builtin or --rows/--cols".into(),
                    ))
                }
            };
            let out = write_artifact(
                &common.output,
                "game.json",
                &serde_json::to_string_pretty(&game.to_json())?,
            )?;
            write_manifest(&common.output, "game gen", params, seed, &[], &[out], started)
        }

        Command::Solve { command } => match command {
            SolveCommand::Enum { common, game } => {
                let g = load_game(&game)?;
                let set = enumerate_nash(&g)?;
                let out = write_artifact(
                    &common.output,
                    "equilibria.json",
                    &serde_json::to_string_pretty(&set.to_json())?,
                )?;
                println!("{} equilibria", set.len());
                write_manifest(
                    &common.output,
                    "solve enum",
                    json!({"game": game.display().to_string()}),
                    common.seed(),
                    &[&game],
                    &[out],
                    started,
                )
            }
            SolveCommand::Line { common, game, line } => {
                let g = load_game(&game)?;
                let text = std::fs::read_to_string(&line)?;
                let space = AffineSubspace::from_json(&serde_json::from_str(&text)?)?;
                let solution = nash_on_line(&g, &space)?;
                let out = write_artifact(
                    &common.output,
                    "solution.json",
                    &serde_json::to_string_pretty(&solution.to_json(&space))?,
                )?;
                write_manifest(
                    &common.output,
                    "solve line",
                    json!({"game": game.display().to_string(), "line": line.display().to_string()}),
                    common.seed(),
                    &[&game, &line],
                    &[out],
                    started,
                )
            }
            SolveCommand::Affine {
                common,
                game,
                space,
            } => {
                let g = load_game(&game)?;
                let text = std::fs::read_to_string(&space)?;
                let sp = AffineSubspace::from_json(&serde_json::from_str(&text)?)?;
                let solution = nash_on_affine(&g, &sp)?;
                let out = write_artifact(
                    &common.output,
                    "solution.json",
                    &serde_json::to_string_pretty(&solution.to_json(&sp))?,
                )?;
                write_manifest(
                    &common.output,
                    "solve affine",
                    json!({"game": game.display().to_string(), "space": space.display().to_string()}),
                    common.seed(),
                    &[&game, &space],
                    &[out],
                    started,
                )
            }
        },

        Command::Dyn { command } => match command {
            DynCommand::Run {
                common,
                game,
                kind,
                start,
                target,
                k,
                alpha,
                eta,
                eps_fix,
                max_steps,
            } => {
                let g = load_game(&game)?;
                let seed = common.seed();
                let x0 = if start == "random" {
                    let mut rng = rng_for(seed, 0);
                    sample_profile(&g, &mut rng)
                } else {
                    let text = std::fs::read_to_string(&start)?;
                    FloatProfile::from_json(&serde_json::from_str(&text)?)?
                };
                let trajectory = match kind {
                    DynKind::Type1 => {
                        let set = enumerate_nash(&g)?;
                        let d = Type1Dynamic::new(&g, &set, target, k)?;
                        run_trajectory(&d, Some(&d.lyapunov()), &x0, eps_fix, max_steps)?
                    }
                    DynKind::Type2 => {
                        let set = enumerate_nash(&g)?;
                        let d = Type2Dynamic::new(&g, &set, alpha, k, seed)?;
                        run_trajectory(&d, Some(&d.lyapunov()), &x0, eps_fix, max_steps)?
                    }
                    DynKind::Bnn => {
                        let d = BnnDynamic { game: &g, eta };
                        run_trajectory(&d, None, &x0, eps_fix, max_steps)?
                    }
                };
                let out = write_artifact(&common.output, "trajectory.csv", &trajectory_to_csv(&trajectory))?;
                println!(
                    "{} after {} steps",
                    trajectory.termination.as_str(),
                    trajectory.steps
                );
                write_manifest(
                    &common.output,
                    "dyn run",
                    json!({
                        "game": game.display().to_string(),
                        "type": type_name(kind),
                        "start": start,
                        "target": target,
                        "k": format_f64(k),
                        "alpha": format_f64(alpha),
                        "eta": format_f64(eta),
                        "eps_fix": format_f64(eps_fix),
                        "max_steps": max_steps,
                    }),
                    seed,
                    &[&game],
                    &[out],
                    started,
                )
            }
            DynCommand::VerifyLyapunov {
                common,
                game,
                kind,
                target,
                k,
                alpha,
                samples,
            } => {
                let g = load_game(&game)?;
                let seed = common.seed();
                let set = enumerate_nash(&g)?;
                let (dynamic, lyapunov, default_samples): (Box<dyn DiscreteDynamic>, _, usize) =
                    match kind {
                        DynKind::Type1 => {
                            let d = Type1Dynamic::new(&g, &set, target, k)?;
                            let l = d.lyapunov();
                            (Box::new(d), l, 100)
                        }
                        DynKind::Type2 => {
                            let d = Type2Dynamic::new(&g, &set, alpha, k, seed)?;
                            let l = d.lyapunov();
                            (Box::new(d), l, 1000)
                        }
                        DynKind::Bnn => {
                            return Err(Error::Malformed(
                                "the BNN dynamic has no Lyapunov pair to verify".into(),
                            ))
                        }
                    };
                let n = samples.unwrap_or(default_samples);
                let mut rng = rng_for(seed, 1);
                let mut decreased = 0usize;
                let mut checked = 0usize;
                let mut witnesses = Vec::new();
                while checked < n {
                    let x = sample_profile(&g, &mut rng);
                    if regret_f64(&g, &x) <= 1e-9 {
                        continue;
                    }
                    checked += 1;
                    let before = lyapunov.value(&x);
                    let after = lyapunov.value(&dynamic.step(&x));
                    if after < before {
                        decreased += 1;
                    } else if witnesses.len() < 10 {
                        witnesses.push(json!({
                            "x": x.to_json(),
                            "before": format_f64(before),
                            "after": format_f64(after),
                        }));
                    }
                }
                let fraction = decreased as f64 / checked as f64;
                let report = json!({
                    "type": type_name(kind),
                    "samples": checked,
                    "decreased": decreased,
                    "fraction": format_f64(fraction),
                    "witnesses": witnesses,
                });
                let out = write_artifact(
                    &common.output,
                    "lyapunov_report.json",
                    &serde_json::to_string_pretty(&report)?,
                )?;
                println!("decrease fraction {fraction:.4} over {checked} samples");
                write_manifest(
                    &common.output,
                    "dyn verify-lyapunov",
                    json!({
                        "game": game.display().to_string(),
                        "type": type_name(kind),
                        "target": target,
                        "k": format_f64(k),
                        "alpha": format_f64(alpha),
                        "samples": n,
                    }),
                    seed,
                    &[&game],
                    &[out],
                    started,
                )?;
                if matches!(kind, DynKind::Type1) && decreased < checked {
                    return Err(Error::LyapunovViolation {
                        step: 0,
                        x: vec![],
                        before: 0.0,
                        after: 0.0,
                    });
                }
                Ok(())
            }
        },

        Command::Reduce { command } => match command {
            ReduceCommand::FindNash {
                common,
                game,
                target,
            } => {
                let g = load_game(&game)?;
                if let ndl_core::equilibria::Nondegeneracy::Degenerate { reason, .. } =
                    is_nondegenerate(&g)?
                {
                    return Err(Error::Degenerate(reason));
                }
                let set = enumerate_nash(&g)?;
                let k = ndl_core::rational::rat(10, 1);
                let mut oracle = DynamicOracle::wrap_type1(ExactType1::new(&set, target, k)?);
                let found = find_nash_via_type1(&g, &mut oracle)?;
                let report = json!({
                    "profile": found.to_json(),
                    "regret": rat_to_string(&ndl_core::game::regret(&g, &found)?),
                    "queries": oracle.queries(),
                });
                let out = write_artifact(
                    &common.output,
                    "found.json",
                    &serde_json::to_string_pretty(&report)?,
                )?;
                println!("found {}", describe_profile(&found));
                write_manifest(
                    &common.output,
                    "reduce find-nash",
                    json!({"game": game.display().to_string(), "target": target}),
                    common.seed(),
                    &[&game],
                    &[out],
                    started,
                )
            }
            ReduceCommand::Uniqueness {
                common,
                game,
                trials,
            } => {
                let g = load_game(&game)?;
                let seed = common.seed();
                let set = enumerate_nash(&g)?;
                let alpha = ndl_core::rational::rat(1, 2);
                let k = ndl_core::rational::rat(10, 1);
                let mut oracle =
                    DynamicOracle::wrap_type2(ExactType2::new(&g, &set, alpha, k, seed)?);
                let (report, spaces) = uniqueness_test(&g, &mut oracle, trials, seed)?;
                let out = write_artifact(
                    &common.output,
                    "verdict.json",
                    &serde_json::to_string_pretty(&report.to_json(&spaces))?,
                )?;
                println!("verdict: {}", report.verdict.as_str());
                write_manifest(
                    &common.output,
                    "reduce uniqueness",
                    json!({"game": game.display().to_string(), "trials": trials}),
                    seed,
                    &[&game],
                    &[out],
                    started,
                )
            }
        },

        Command::Pg {
            command:
                PgCommand::Run {
                    common,
                    game,
                    bob,
                    budget,
                    eta,
                    rho,
                    eps_r,
                    target,
                    samples,
                },
        } => {
            let g = load_game(&game)?;
            let seed = common.seed();
            let cfg = PgConfig {
                budget,
                eps_r,
                eta,
                rho,
                target,
                seed,
            };
            let mut strategy = bob_by_name(&bob, seed)
                .ok_or_else(|| Error::Malformed(format!("unknown bob strategy `{bob}`")))?;
            let transcript = run_match(&g, strategy.as_mut(), &cfg, samples)?;
            let out = write_artifact(
                &common.output,
                "transcript.json",
                &serde_json::to_string_pretty(&transcript.to_json())?,
            )?;
            println!("prevail: {}", transcript.prevail.as_str());
            write_manifest(
                &common.output,
                "pg run",
                json!({
                    "game": game.display().to_string(),
                    "bob": bob,
                    "budget": budget,
                    "eta": format_f64(eta),
                    "rho": format_f64(rho),
                    "eps_r": format_f64(eps_r),
                    "target": target,
                    "samples": samples,
                }),
                seed,
                &[&game],
                &[out],
                started,
            )
        }
    }
}

fn type_name(kind: DynKind) -> &'static str {
    match kind {
        DynKind::Type1 => "1",
        DynKind::Type2 => "2",
        DynKind::Bnn => "bnn",
    }
}
