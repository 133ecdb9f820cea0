//! Command-line front end. [`run`] returns the exit code and the text
//! written to standard output so it can be driven in-process.

mod format;

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use format::{parse_instance, serialize_instance, FormatError, InstanceFile};

use crate::cost::Cost;
use crate::election::{apply_push, apply_shift, is_single_peaked, winners, PushAction, RuleId, ShiftAction, WinnerReport};
use crate::instances::{self, ApprovalLaw, PriceSign, CostVariant, GraphInstance};
use crate::shift::{default_shift_solver, shift_cost, shift_registry};
use crate::support::{
    brute_force_destructive, compute_parameters, solve_destructive_support, support_cost, support_registry, ApproxOptions,
    PositiveOptions, SolveConfig,
};
use crate::{Action, BriberySolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "bribery", version, about = "Bribery solvers for approval-based Bucklin and Fallback elections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Winners of the election in FILE.
    Winners {
        #[arg(long)]
        rule: Option<RuleId>,
        file: PathBuf,
    },
    /// Cheapest shift bribery.
    ShiftSolve {
        #[arg(long)]
        rule: Option<RuleId>,
        /// Registered solver; defaults to the polynomial one for the rule.
        #[arg(long)]
        solver: Option<String>,
        file: PathBuf,
    },
    /// Cheapest support bribery.
    SupportSolve {
        #[arg(long)]
        rule: Option<RuleId>,
        #[arg(long, default_value = "fpt")]
        solver: String,
        #[arg(long, default_value_t = 4)]
        beta_prime: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random colorings per guess; setting it disables exhaustive
        /// enumeration of colorings.
        #[arg(long)]
        trials: Option<u64>,
        file: PathBuf,
    },
    /// Approximate support bribery for SP-AV on single-peaked elections.
    SupportApprox {
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        budget: Option<Cost>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<u64>,
        file: PathBuf,
    },
    /// Cheapest support bribery that makes the designated candidate lose.
    Destructive {
        #[arg(long)]
        rule: Option<RuleId>,
        #[arg(long, value_enum, default_value_t = DestructiveSolver::Dp)]
        solver: DestructiveSolver,
        file: PathBuf,
    },
    /// Parameters of the minimal optimal support briberies.
    Params {
        #[arg(long)]
        rule: Option<RuleId>,
        file: PathBuf,
    },
    /// A single-peaked axis, if one exists.
    Axis { file: PathBuf },
    /// Writes a generated instance or graph to standard output.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Replays a solver report against FILE.
    Verify { file: PathBuf, report: PathBuf },
    /// Lists registered solvers.
    Solvers,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DestructiveSolver {
    Dp,
    BruteForce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostKind {
    None,
    Unit,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Mixed,
    Positive,
    Negative,
}

#[derive(Args, Debug)]
struct GenCommon {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bucklin")]
    rule: RuleId,
    /// Cost rows to emit for both bribery kinds.
    #[arg(long, value_enum, default_value_t = CostKind::None)]
    costs: CostKind,
    #[arg(long, value_enum, default_value_t = SignArg::Mixed)]
    sign: SignArg,
    #[arg(long)]
    budget: Option<Cost>,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Uniformly random preferences.
    Random {
        #[command(flatten)]
        common: GenCommon,
        /// Fixed approval count; uniform in 0..=m when absent.
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Single-peaked preferences.
    Sp {
        #[command(flatten)]
        common: GenCommon,
    },
    /// Dominating-set encoding of the graph in GRAPH.
    Domset {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Negative)]
        variant: VariantArg,
        #[arg(long, default_value = "fallback")]
        rule: RuleId,
    },
    /// Multicolored-clique encoding of the partitioned graph in GRAPH.
    Mcclique { graph: PathBuf },
    /// Random graph, optionally partitioned into classes.
    Graph {
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of classes; vertices are split as evenly as possible.
        #[arg(long)]
        classes: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Negative,
    Positive,
}

/// Exit code plus standard output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli.command) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {e:#}\n"),
        },
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &PathBuf) -> Result<InstanceFile> {
    let text = read(path)?;
    parse_instance(&text).with_context(|| format!("{}", path.display()))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn render_winners(out: &mut String, w: &WinnerReport) {
    writeln!(out, "winners: {}", join(&w.winners)).unwrap();
    match w.winning_round {
        Some(r) => writeln!(out, "round: {r}").unwrap(),
        None => writeln!(out, "round: none").unwrap(),
    }
    writeln!(out, "scores: {}", join(&w.scores)).unwrap();
}

fn render_solution(command: &str, solver: &str, rule: RuleId, goal: &str, budget: Option<Cost>, s: &BriberySolution) -> (i32, String) {
    let mut out = String::new();
    writeln!(out, "command: {command}").unwrap();
    writeln!(out, "solver: {solver}").unwrap();
    writeln!(out, "rule: {rule}").unwrap();
    writeln!(out, "goal: {goal}").unwrap();
    writeln!(out, "cost: {}", s.cost).unwrap();
    let kind = match s.action {
        Action::Shift(_) => "shift",
        Action::Push(_) => "push",
    };
    writeln!(out, "action: {kind} {}", join(&s.action.entries())).unwrap();
    render_winners(&mut out, &s.certificate);
    if let Some(t) = s.trial {
        writeln!(out, "trial: seed {} trial {}", t.seed, t.trial).unwrap();
    }
    let within = budget.is_none_or(|b| s.cost <= b);
    if let Some(b) = budget {
        writeln!(out, "budget: {b} {}", if within { "met" } else { "exceeded" }).unwrap();
    }
    let code = if s.is_finite() && within { EXIT_OK } else { EXIT_INFEASIBLE };
    (code, out)
}

fn execute(cmd: Command) -> Result<(i32, String)> {
    match cmd {
        Command::Winners { rule, file } => {
            let f = load(&file)?;
            let rule = rule.unwrap_or(f.rule);
            let w = winners(&f.election, rule)?;
            let mut out = format!("rule: {rule}\n");
            render_winners(&mut out, &w);
            let p = f.election.designated;
            writeln!(out, "designated-wins: {}", if w.contains(p) { "yes" } else { "no" }).unwrap();
            Ok((EXIT_OK, out))
        }
        Command::ShiftSolve { rule, solver, file } => {
            let f = load(&file)?;
            let rule = rule.unwrap_or(f.rule);
            let name = solver.unwrap_or_else(|| default_shift_solver(rule).to_string());
            let solver = shift_registry().get(&name)?;
            if !solver.supports(rule) {
                bail!("solver `{name}` does not handle rule {rule}");
            }
            let s = solver.solve(&f.shift_instance(rule))?;
            Ok(render_solution("shift-solve", &name, rule, "constructive", f.budget, &s))
        }
        Command::SupportSolve {
            rule,
            solver,
            beta_prime,
            seed,
            trials,
            file,
        } => {
            let f = load(&file)?;
            let rule = rule.unwrap_or(f.rule);
            let cfg = SolveConfig {
                beta_prime,
                positive: PositiveOptions {
                    seed,
                    trials,
                    exhaustive: trials.is_none(),
                },
                approx: ApproxOptions {
                    seed,
                    trials,
                    ..Default::default()
                },
            };
            let s = support_registry().get(&solver)?.solve(&f.support_instance(rule), &cfg)?;
            Ok(render_solution("support-solve", &solver, rule, "constructive", f.budget, &s))
        }
        Command::SupportApprox {
            epsilon,
            budget,
            seed,
            trials,
            file,
        } => {
            let f = load(&file)?;
            let inst = f.support_instance(RuleId::SPAV);
            let opts = ApproxOptions {
                epsilon,
                budget,
                seed,
                trials,
                beta_prime: None,
            };
            let s = crate::support::approx_spav_single_peaked(&inst, &opts)?;
            let limit = budget.or(f.budget).and_then(Cost::finite).map(|b| Cost::Finite(((1.0 + epsilon) * b as f64 + 1e-9).floor() as u64));
            Ok(render_solution("support-approx", "approx", RuleId::SPAV, "constructive", limit, &s))
        }
        Command::Destructive { rule, solver, file } => {
            let f = load(&file)?;
            let rule = rule.unwrap_or(f.rule);
            let inst = f.support_instance(rule);
            let (name, s) = match solver {
                DestructiveSolver::Dp => ("dp", solve_destructive_support(&inst.election, &inst.costs, rule)?),
                DestructiveSolver::BruteForce => ("brute-force", brute_force_destructive(&inst.election, &inst.costs, rule)?),
            };
            Ok(render_solution("destructive", name, rule, "destructive", f.budget, &s))
        }
        Command::Params { rule, file } => {
            let f = load(&file)?;
            let rule = rule.unwrap_or(f.rule);
            match compute_parameters(&f.support_instance(rule)) {
                Ok(st) => Ok((
                    EXIT_OK,
                    format!("rule: {rule}\nalpha: {}\nbeta: {}\nbeta-prime: {}\n", st.alpha, st.beta, st.beta_prime),
                )),
                Err(crate::support::SupportError::NoSuccessfulBribery) => {
                    Ok((EXIT_INFEASIBLE, format!("rule: {rule}\nno successful bribery\n")))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Axis { file } => {
            let f = load(&file)?;
            Ok(match is_single_peaked(&f.election) {
                Some(a) => (EXIT_OK, format!("axis: {}\n", join(&a.order))),
                None => (EXIT_INFEASIBLE, "axis: none\n".to_string()),
            })
        }
        Command::Gen { kind } => generate(kind).map(|s| (EXIT_OK, s)),
        Command::Verify { file, report } => {
            let f = load(&file)?;
            let text = read(&report)?;
            verify(&f, &text)
        }
        Command::Solvers => {
            let mut out = String::new();
            writeln!(out, "shift: {}", shift_registry().names().join(" ")).unwrap();
            writeln!(out, "support: {}", support_registry().names().join(" ")).unwrap();
            writeln!(out, "destructive: dp brute-force").unwrap();
            Ok((EXIT_OK, out))
        }
    }
}

fn with_costs(mut f: InstanceFile, c: &GenCommon) -> InstanceFile {
    let e = &f.election;
    let (m, n) = (e.m(), e.n());
    let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
    let sign = match c.sign {
        SignArg::Mixed => PriceSign::Mixed,
        SignArg::Positive => PriceSign::Positive,
        SignArg::Negative => PriceSign::Negative,
    };
    match c.costs {
        CostKind::None => {}
        CostKind::Unit => {
            f.shift_costs = Some(crate::ShiftCostProfile::unit(n, m));
            f.support_costs = Some(crate::SupportCostProfile::unit(&approvals, m));
        }
        CostKind::Random => {
            let s = c.seed.wrapping_add(1);
            f.shift_costs = Some(instances::random_shift_costs(n, m, s, 3, 0.1));
            f.support_costs = Some(instances::random_support_costs(&approvals, m, s.wrapping_add(1), sign, 3, 0.1));
        }
    }
    f.budget = c.budget;
    f
}

fn generate(kind: GenKind) -> Result<String> {
    let file = |election, rule| InstanceFile {
        election,
        rule,
        shift_costs: None,
        support_costs: None,
        budget: None,
    };
    Ok(match kind {
        GenKind::Random { common, ell } => {
            let law = ell.map_or(ApprovalLaw::Uniform, ApprovalLaw::Fixed);
            let e = instances::gen_random(common.m, common.n, common.seed, law)?;
            serialize_instance(&with_costs(file(e, common.rule), &common))
        }
        GenKind::Sp { common } => {
            let (e, _) = instances::gen_single_peaked(common.m, common.n, common.seed)?;
            serialize_instance(&with_costs(file(e, common.rule), &common))
        }
        GenKind::Domset { graph, k, variant, rule } => {
            let g = GraphInstance::parse(&read(&graph)?)?;
            let variant = match variant {
                VariantArg::Negative => CostVariant::Negative,
                VariantArg::Positive => CostVariant::Positive,
            };
            serialize_instance(&InstanceFile::from_support(&instances::reduce_dominating_set(&g, k, variant, rule)?))
        }
        GenKind::Mcclique { graph } => {
            let g = GraphInstance::parse(&read(&graph)?)?;
            let k = g.partition.as_ref().map_or(0, Vec::len);
            let (inst, _) = instances::reduce_multicolored_clique(&g, k)?;
            serialize_instance(&InstanceFile::from_support(&inst))
        }
        GenKind::Graph {
            vertices,
            density,
            seed,
            classes,
        } => {
            if !(0.0..=1.0).contains(&density) {
                bail!("density must lie in [0, 1]");
            }
            let g = match classes {
                None => instances::gen_graph(vertices, density, seed),
                Some(k) => {
                    if k == 0 || k > vertices {
                        bail!("need 1 <= classes <= vertices");
                    }
                    let sizes: Vec<usize> = (0..k).map(|i| vertices / k + usize::from(i < vertices % k)).collect();
                    instances::gen_partitioned_graph(&sizes, density, seed)
                }
            };
            g.to_text()
        }
    })
}

fn field<'a>(text: &'a str, key: &str) -> Result<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(':')).map(str::trim))
        .ok_or_else(|| anyhow!("report has no `{key}:` line"))
}

/// Replays the action in `report` on `f` and checks the claimed cost and
/// winners.
pub fn verify(f: &InstanceFile, report: &str) -> Result<(i32, String)> {
    let rule: RuleId = field(report, "rule")?.parse()?;
    let goal = field(report, "goal")?;
    let constructive = match goal {
        "constructive" => true,
        "destructive" => false,
        other => bail!("unknown goal `{other}`"),
    };
    let claimed: Cost = field(report, "cost")?.parse()?;
    let mut action = field(report, "action")?.split_whitespace();
    let kind = action.next().ok_or_else(|| anyhow!("empty action"))?;
    let entries: Vec<i64> = action.map(|s| s.parse::<i64>().with_context(|| format!("bad action entry `{s}`"))).collect::<Result<_>>()?;
    let claimed_winners: Vec<usize> = field(report, "winners")?
        .split_whitespace()
        .map(|s| s.parse::<usize>().with_context(|| format!("bad winner `{s}`")))
        .collect::<Result<_>>()?;
    let e = &f.election;
    let (after, cost) = match kind {
        "shift" => {
            let shifts = entries
                .iter()
                .map(|&x| usize::try_from(x).map_err(|_| anyhow!("negative shift {x}")))
                .collect::<Result<Vec<_>>>()?;
            let a = ShiftAction { shifts };
            let inst = f.shift_instance(rule);
            (apply_shift(e, &a)?, shift_cost(&inst.costs, &a)?)
        }
        "push" => {
            let a = PushAction { deltas: entries };
            let inst = f.support_instance(rule);
            (apply_push(e, &a)?, support_cost(&inst.costs, &a)?)
        }
        other => bail!("unknown action kind `{other}`"),
    };
    let w = winners(&after, rule)?;
    let mut problems = Vec::new();
    if claimed.is_finite() && cost != claimed {
        problems.push(format!("cost is {cost}, report claims {claimed}"));
    }
    if w.winners != claimed_winners {
        problems.push(format!("winners are {}, report claims {}", join(&w.winners), join(&claimed_winners)));
    }
    if claimed.is_finite() && w.contains(e.designated) != constructive {
        problems.push(format!("designated candidate {} the election", if constructive { "does not win" } else { "still wins" }));
    }
    if problems.is_empty() {
        let what = if claimed.is_finite() { "action verified" } else { "no bribery claimed; unchanged election verified" };
        Ok((EXIT_OK, format!("verified: {what}\ncost: {cost}\n")))
    } else {
        let mut out = String::from("rejected\n");
        for p in problems {
            writeln!(out, "problem: {p}").unwrap();
        }
        Ok((EXIT_INFEASIBLE, out))
    }
}
