//! `spe`: equilibria of multiplayer parity games from the command line.
//!
//! Exit status: 0 for a positive answer or a computed value, 1 for a negative
//! answer, 2 for usage and input errors.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use spe_core::decisions::{self, Kind, Threshold};
use spe_core::ltl::parse_ltl;
use spe_core::negotiation::{self, ReducedStrategy};
use spe_core::reductions::{self, Cnf, Kripke};
use spe_core::requirements::{self, SatCertificate};
use spe_core::{Error, Game, LassoPlay, Requirement};

use report::{Report, Verdict};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "spe", version, about = "Equilibria of multiplayer parity games")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Print a JSON report instead of the human-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the per-player and per-tuple searches.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ne,
    Spe,
}

#[derive(Subcommand)]
enum Command {
    /// Least fixed point of the negotiation function.
    Lfp {
        game: PathBuf,
        /// Also print every iterate.
        #[arg(long)]
        trace: bool,
    },
    /// One application of the negotiation function.
    Nego {
        game: PathBuf,
        /// Requirement file; the zero requirement when omitted.
        #[arg(long)]
        req: Option<PathBuf>,
        /// Write the concrete negotiation games as DOT.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Is the requirement a fixed point of the negotiation function?
    CheckFixpoint { game: PathBuf, req: PathBuf },
    /// Is the requirement the least fixed point?
    CheckLfp { game: PathBuf, req: PathBuf },
    /// Satisfiability of a requirement, or validity of a certificate for it.
    Satisfiable {
        game: PathBuf,
        req: PathBuf,
        #[arg(long, value_name = "PATH")]
        cert: Option<PathBuf>,
    },
    /// Constrained existence of a Nash or subgame-perfect equilibrium.
    Exists {
        game: PathBuf,
        /// Start vertex; the game's initial vertex when omitted.
        #[arg(long)]
        from: Option<String>,
        /// Lower payoff bounds, e.g. "P1=1,P2=0".
        #[arg(long, default_value = "")]
        lower: String,
        /// Upper payoff bounds, e.g. "P1=1,P2=1".
        #[arg(long, default_value = "")]
        upper: String,
        #[arg(long, value_enum, default_value = "spe")]
        kind: KindArg,
    },
    /// A subgame-perfect outcome satisfying an LTL formula over vertex names.
    Verify {
        game: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        ltl: String,
    },
    /// Edge pruning by memoryless winning strategies.
    Ummels { game: PathBuf },
    /// Deviation graph of a reduced strategy, and whether it wins for Prover.
    Devgraph {
        game: PathBuf,
        req: PathBuf,
        strategy: PathBuf,
        /// Deviating player; the owner of the start vertex when omitted.
        #[arg(long)]
        player: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Clause game of a CNF formula.
    GenSat {
        /// DIMACS file or inline formula such as "x1 | ~x2; x2".
        /// A random formula is drawn when omitted.
        cnf: Option<String>,
        #[command(flatten)]
        random: RandomCnf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Game and requirement that is the least fixed point iff the first
    /// formula is satisfiable and the second is not.
    GenBh2 {
        first: Option<String>,
        second: Option<String>,
        #[command(flatten)]
        random: RandomCnf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        req_out: Option<PathBuf>,
    },
    /// One-player game and rewritten formula for a Kripke structure.
    GenKripke {
        kripke: PathBuf,
        #[arg(long)]
        ltl: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RandomCnf {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    vars: usize,
    #[arg(long, default_value_t = 4)]
    clauses: usize,
}

impl RandomCnf {
    fn draw(&self, rng: &mut StdRng) -> std::result::Result<Cnf, Error> {
        let vars = self.vars.max(1);
        let clauses = (0..self.clauses)
            .map(|_| {
                (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let x = rng.gen_range(1..=vars) as i32;
                        if rng.gen_bool(0.5) {
                            x
                        } else {
                            -x
                        }
                    })
                    .collect()
            })
            .collect();
        Cnf::new(vars, clauses)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_game(path: &Path) -> Result<Game> {
    Ok(Game::from_json(&read(path)?)?)
}

fn load_req(game: &Game, path: &Path) -> Result<Requirement> {
    Ok(Requirement::from_json(game, &read(path)?)?)
}

/// A path to a DIMACS file, or an inline formula.
fn load_cnf(arg: &str) -> Result<Cnf> {
    let path = Path::new(arg);
    Ok(if path.is_file() { Cnf::parse_dimacs(&read(path)?)? } else { Cnf::parse_inline(arg)? })
}

fn start_vertex(game: &Game, from: Option<&str>) -> Result<usize> {
    Ok(from.map_or(Ok(game.initial()), |v| game.vertex_id(v))?)
}

fn requirement_report(command: &str, game: &Game, req: &Requirement) -> Report {
    Report::new(command, Verdict::Value).line(req.table(game)).table(req.to_json(game))
}

fn play_report(command: &str, game: &Game, found: Option<LassoPlay>) -> Report {
    match found {
        Some(w) => {
            let text = w.display(game).to_string();
            Report::new(command, Verdict::Yes).line(text.clone()).witness(text)
        }
        None => Report::new(command, Verdict::No).line("none"),
    }
}

fn yes_no(command: &str, answer: bool) -> Report {
    let v = if answer { Verdict::Yes } else { Verdict::No };
    Report::new(command, v).line(v.as_str())
}

fn emit_game(command: &str, game: &Game, out: Option<&Path>) -> Result<Report> {
    let text = game.to_json();
    let mut r = Report::new(command, Verdict::Value)
        .field("vertices", json!(game.num_vertices()))
        .field("players", json!(game.num_players()));
    match out {
        Some(p) => {
            write(p, &(text.clone() + "\n"))?;
            r = r.line(format!("wrote {} ({} vertices)", p.display(), game.num_vertices()));
        }
        None => r = r.line(text.clone()),
    }
    let value: Value = serde_json::from_str(&text)?;
    Ok(r.field("game", value))
}

fn run(cmd: Command) -> Result<Report> {
    Ok(match cmd {
        Command::Lfp { game, trace } => {
            let g = load_game(&game)?;
            let steps = negotiation::lfp_trace(&g)?;
            let star = steps.last().expect("trace is non-empty");
            let mut r = requirement_report("lfp", &g, star).field("iterations", json!(steps.len() - 1));
            if trace {
                let rows: Vec<Value> = steps.iter().map(|s| s.to_json(&g)).collect();
                let lines: Vec<String> =
                    steps.iter().enumerate().map(|(k, s)| format!("step {k}: {}", s.table(&g))).collect();
                r.lines = lines;
                r = r.field("trace", Value::Array(rows));
            }
            r
        }
        Command::Nego { game, req, dot } => {
            let g = load_game(&game)?;
            let lambda = match &req {
                Some(p) => load_req(&g, p)?,
                None => Requirement::zero(g.num_vertices()),
            };
            let out = negotiation::nego(&g, &lambda)?;
            if let Some(p) = &dot {
                write(p, &negotiation::concrete_games_dot(&g, &lambda)?)?;
            }
            requirement_report("nego", &g, &out)
        }
        Command::CheckFixpoint { game, req } => {
            let g = load_game(&game)?;
            let lambda = load_req(&g, &req)?;
            yes_no("check-fixpoint", decisions::is_fixed_point(&g, &lambda)?)
        }
        Command::CheckLfp { game, req } => {
            let g = load_game(&game)?;
            let lambda = load_req(&g, &req)?;
            yes_no("check-lfp", decisions::is_lfp(&g, &lambda)?)
        }
        Command::Satisfiable { game, req, cert } => {
            let g = load_game(&game)?;
            let lambda = load_req(&g, &req)?;
            match cert {
                Some(p) => {
                    let c = SatCertificate::from_json(&g, &read(&p)?)?;
                    yes_no("satisfiable", requirements::check_certificate(&g, &lambda, &c)?)
                }
                None => match requirements::satisfiable(&g, &lambda) {
                    Some(c) => {
                        let mut r = Report::new("satisfiable", Verdict::Yes).line("yes");
                        for v in g.vertices() {
                            if let Some(play) = c.lasso(&g, v) {
                                r = r.line(format!("  {}: {}", g.vertex_name(v), play.display(&g)));
                            }
                        }
                        r.field("certificate", c.to_json(&g))
                    }
                    None => yes_no("satisfiable", false),
                },
            }
        }
        Command::Exists { game, from, lower, upper, kind } => {
            let g = load_game(&game)?;
            let start = start_vertex(&g, from.as_deref())?;
            let t = Threshold::parse(&g, &lower, &upper)?;
            let kind = match kind {
                KindArg::Ne => Kind::Nash,
                KindArg::Spe => Kind::Subgame,
            };
            let found = decisions::constrained_existence(&g, start, &t, kind)?;
            let payoff = found.as_ref().map(|w| w.payoff(&g)).transpose()?;
            let mut r = play_report("exists", &g, found);
            if let Some(p) = payoff {
                r = r.line(format!("payoff {}", p.display(&g))).field("payoff", json!(p.0));
            }
            r
        }
        Command::Verify { game, from, ltl } => {
            let g = load_game(&game)?;
            let start = start_vertex(&g, from.as_deref())?;
            let f = parse_ltl(&ltl)?;
            play_report("verify", &g, decisions::spe_verify(&g, start, &f)?)
        }
        Command::Ummels { game } => {
            let g = load_game(&game)?;
            let (req, kept) = negotiation::ummels_fixpoint(&g)?;
            let removed: Vec<Value> = g
                .edges()
                .iter()
                .filter(|e| !kept.contains(e))
                .map(|&(u, v)| json!([g.vertex_name(u), g.vertex_name(v)]))
                .collect();
            let shown: Vec<String> =
                removed.iter().map(|e| format!("{}->{}", e[0].as_str().unwrap(), e[1].as_str().unwrap())).collect();
            requirement_report("ummels", &g, &req)
                .line(format!("removed edges: {}", if shown.is_empty() { "none".into() } else { shown.join(" ") }))
                .field("removed", Value::Array(removed))
        }
        Command::Devgraph { game, req, strategy, player, from, dot } => {
            let g = load_game(&game)?;
            let lambda = load_req(&g, &req)?;
            let strat = ReducedStrategy::from_json(&g, &read(&strategy)?)?;
            let start = start_vertex(&g, from.as_deref())?;
            let i = match &player {
                Some(p) => g.player_id(p)?,
                None => g.owner(start),
            };
            let dg = negotiation::build_deviation_graph(&g, &lambda, i, &strat)?;
            if let Some(p) = &dot {
                write(p, &dg.to_dot(&g))?;
            }
            let wins = negotiation::check_reduced_strategy(&g, &lambda, i, start, &strat)?;
            let mut r = yes_no("devgraph", wins)
                .line(format!("{} nodes, {} edges", dg.nodes.len(), dg.edges.len()))
                .field("nodes", json!(dg.nodes.iter().map(|p| p.display(&g).to_string()).collect::<Vec<_>>()))
                .field("edges", json!(dg.edges));
            for &(a, b, c) in &dg.edges {
                r = r.line(format!("  {} -> {} [{c}]", dg.nodes[a].display(&g), dg.nodes[b].display(&g)));
            }
            r
        }
        Command::GenSat { cnf, random, out } => {
            let cnf = match &cnf {
                Some(text) => load_cnf(text)?,
                None => random.draw(&mut StdRng::seed_from_u64(random.seed))?,
            };
            let g = reductions::gen_sat_game(&cnf)?;
            emit_game("gen-sat", &g, out.as_deref())?.field("formula", json!(cnf.to_string()))
        }
        Command::GenBh2 { first, second, random, out, req_out } => {
            let mut rng = StdRng::seed_from_u64(random.seed);
            let mut pick = |arg: &Option<String>| match arg {
                Some(text) => load_cnf(text),
                None => Ok(random.draw(&mut rng)?),
            };
            let (c1, c2) = (pick(&first)?, pick(&second)?);
            let (g, req) = reductions::gen_bh2_game(&c1, &c2)?;
            let mut r = emit_game("gen-bh2", &g, out.as_deref())?
                .field("formulas", json!([c1.to_string(), c2.to_string()]))
                .table(req.to_json(&g));
            match &req_out {
                Some(p) => {
                    write(p, &(serde_json::to_string_pretty(&req.to_json(&g))? + "\n"))?;
                    r = r.line(format!("wrote {}", p.display()));
                }
                None => r = r.line(req.table(&g)),
            }
            r
        }
        Command::GenKripke { kripke, ltl, out } => {
            let k = Kripke::from_json(&read(&kripke)?)?;
            let f = parse_ltl(&ltl)?;
            let (g, psi) = reductions::kripke_to_game(&k, &f)?;
            emit_game("gen-kripke", &g, out.as_deref())?
                .line(format!("formula: {psi}"))
                .field("formula", json!(psi.to_string()))
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let t = Instant::now();
    match run(cli.command) {
        Ok(report) => {
            let ms = t.elapsed().as_secs_f64() * 1e3;
            log::info!("{} finished in {ms:.1} ms", report.command);
            if cli.common.json {
                println!("{}", serde_json::to_string_pretty(&report.to_json(ms)).expect("report serializes"));
            } else {
                for l in &report.lines {
                    println!("{l}");
                }
            }
            ExitCode::from(report.verdict.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
