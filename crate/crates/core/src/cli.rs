//! Command-line front end. Every command prints one JSON document.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::alphabet::{classify, decompose, DecompositionTree, GraphClass, IndependenceAlphabet};
use crate::automata::{brute_witness, check_acyclic_loop, membership_one, unroll_loops, MembershipConfig};
use crate::error::{Error, Result};
use crate::gadgets::{
    acyclic_automaton_to_knapsack_f2, f2_alphabet, random_acyclic_automaton, sat_to_p4_knapsack, sat_witness,
    CnfFormula, GadgetInstance,
};
use crate::group::is_identity_stacked;
use crate::io;
use crate::knapsack::{brute_force_solutions, solve_with, tameness_bound, Mode, SolveConfig};
use crate::trace::{foata_normal_form, format_monoid_word, parse_monoid_word, traces_equal};

#[derive(Parser, Debug)]
#[command(name = "graphknap", version, about = "Knapsack and exponent equations over graph groups")]
struct Cli {
    /// Echoed in the output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete, transitive forest or general (with an induced P4/C4).
    Classify(Input),
    /// Free-product / direct-product-with-Z tree of a transitive forest.
    Decompose(Input),
    /// Word problem.
    Wp(WpArgs),
    /// Equality in the trace monoid.
    TraceEq(TraceArgs),
    /// Decide a knapsack or exponent equation.
    Solve(SolveArgs),
    /// Loop automata.
    #[command(subcommand)]
    Automaton(AutomatonCommand),
    /// Reduction gadgets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Brute-force reference answers.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Tameness bound report.
    Bound(Input),
}

#[derive(Args, Debug)]
struct Input {
    #[arg(short, long)]
    input: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Alg {
    Reduce,
    Stacked,
}

#[derive(Args, Debug)]
struct WpArgs {
    #[arg(short, long)]
    input: String,
    /// JSON array of letters, e.g. '["a","b^-1"]'.
    #[arg(long)]
    word: String,
    #[arg(long, value_enum, default_value = "reduce")]
    alg: Alg,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(short, long)]
    input: String,
    #[arg(long)]
    u: String,
    #[arg(long)]
    v: String,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(short, long)]
    input: String,
    /// Overrides the mode stored in the instance.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    ceiling: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum AutomatonCommand {
    /// Does the automaton accept a word equal to 1?
    Member(MemberArgs),
}

#[derive(Args, Debug)]
struct MemberArgs {
    #[arg(short, long)]
    input: String,
    /// Alphabet file, if the automaton does not carry one.
    #[arg(long)]
    alphabet: Option<String>,
    /// Unrolls every loop at most this many times.
    #[arg(long)]
    loop_budget: Option<usize>,
    /// Enumerates paths instead of running the search.
    #[arg(long)]
    brute: bool,
    #[arg(long, default_value_t = 1_000_000)]
    path_cap: usize,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// 3-CNF (DIMACS) to a knapsack instance over G(P4).
    SatP4(GenSatArgs),
    /// Acyclic automaton over F2 to a subset-sum instance over F2.
    F2Gadget(GenF2Args),
}

#[derive(Args, Debug)]
struct GenSatArgs {
    #[arg(short, long)]
    input: String,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct GenF2Args {
    /// Automaton file; a random automaton is drawn from `--seed` otherwise.
    #[arg(short, long)]
    input: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long, default_value_t = 4)]
    states: usize,
    #[arg(long, default_value_t = 5)]
    transitions: usize,
    #[arg(long, default_value_t = 3)]
    max_label: usize,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// All solutions with every exponent at most B.
    Brute(BruteArgs),
}

#[derive(Args, Debug)]
struct BruteArgs {
    #[arg(short, long)]
    input: String,
    #[arg(long)]
    bound: u64,
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
}

/// Exit code and captured streams of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput { code, stdout: text, stderr: String::new() }
            } else {
                CliOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok((code, mut value)) => {
            if let (Some(seed), Value::Object(map)) = (cli.seed, &mut value) {
                map.insert("seed".into(), json!(seed));
            }
            CliOutput { code, stdout: format!("{value}\n"), stderr: String::new() }
        }
        Err(e) => CliOutput { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn alphabet_file(path: &str) -> Result<IndependenceAlphabet> {
    io::alphabet_from_json(&io::read_file(path)?)
}

fn names(alpha: &IndependenceAlphabet, gens: &[usize]) -> Vec<String> {
    gens.iter().map(|&g| alpha.name(g).to_string()).collect()
}

pub fn tree_json(tree: &DecompositionTree, alpha: &IndependenceAlphabet) -> Value {
    match tree {
        DecompositionTree::Trivial => json!({"kind": "trivial"}),
        DecompositionTree::DirectZ { apex, child } => {
            json!({"kind": "direct_z", "apex": alpha.name(*apex), "child": tree_json(child, alpha)})
        }
        DecompositionTree::FreeProduct(children) => {
            json!({"kind": "free_product", "children": children.iter().map(|c| tree_json(c, alpha)).collect::<Vec<_>>()})
        }
    }
}

fn gadget_json(g: &GadgetInstance, mode: Mode, witness: Option<Vec<u64>>) -> Result<Value> {
    let eq = g.equation.clone().with_mode(mode);
    let mut v = serde_json::to_value(io::instance_to_raw(&eq)).map_err(|e| Error::Io(e.to_string()))?;
    let map = v.as_object_mut().expect("object");
    map.insert("bounds".into(), json!(g.bounds));
    map.insert("budget".into(), json!(g.budget));
    map.insert("provenance".into(), json!(g.provenance));
    if let Some(w) = witness {
        map.insert("witness".into(), json!(w));
    }
    Ok(v)
}

fn write_output(path: &Option<String>, v: &Value) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, format!("{v}\n")).map_err(|e| Error::Io(format!("{p}: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(i32, Value)> {
    match &cli.command {
        Command::Classify(a) => {
            let alpha = alphabet_file(&a.input)?;
            Ok((0, match classify(&alpha) {
                GraphClass::Complete => json!({"class": "complete"}),
                GraphClass::TransitiveForestNotComplete => json!({"class": "transitive_forest"}),
                GraphClass::General { witness, .. } => json!({"class": "general", "witness": names(&alpha, &witness)}),
            }))
        }
        Command::Decompose(a) => {
            let alpha = alphabet_file(&a.input)?;
            let tree = decompose(&alpha)?;
            Ok((0, json!({"tree": tree_json(&tree, &alpha), "display": tree.display(&alpha)})))
        }
        Command::Wp(a) => {
            let alpha = alphabet_file(&a.input)?;
            let w = io::word_from_json(&alpha, &a.word)?;
            let identity = match a.alg {
                Alg::Reduce => crate::group::is_identity(&w, &alpha),
                Alg::Stacked => is_identity_stacked(&w, &alpha, &decompose(&alpha)?)?,
            };
            Ok((0, json!({"identity": identity})))
        }
        Command::TraceEq(a) => {
            let alpha = alphabet_file(&a.input)?;
            let u: Vec<String> = io::parse_json(&a.u)?;
            let v: Vec<String> = io::parse_json(&a.v)?;
            let u = parse_monoid_word(&alpha, &u)?;
            let v = parse_monoid_word(&alpha, &v)?;
            let steps = |w: &[usize]| -> Result<Vec<Vec<String>>> {
                Ok(foata_normal_form(w, &alpha)?.steps.iter().map(|s| format_monoid_word(&alpha, s)).collect())
            };
            Ok((0, json!({"equal": traces_equal(&u, &v, &alpha), "u_normal_form": steps(&u)?, "v_normal_form": steps(&v)?})))
        }
        Command::Solve(a) => {
            let mut eq = io::instance_from_json(&io::read_file(&a.input)?)?;
            if let Some(m) = a.mode {
                eq.mode = m;
            }
            let mut cfg = SolveConfig::default();
            if let Some(c) = a.ceiling {
                cfg.ceiling = c;
            }
            let out = solve_with(&eq, &cfg)?;
            let v = serde_json::to_value(&out).map_err(|e| Error::Io(e.to_string()))?;
            Ok((out.exit_code(), v))
        }
        Command::Automaton(AutomatonCommand::Member(a)) => {
            let fallback = a.alphabet.as_deref().map(alphabet_file).transpose()?;
            let (aut, alpha) = io::automaton_from_json(&io::read_file(&a.input)?, fallback.as_ref())?;
            let has_loops = aut.loops().next().is_some();
            let target = match (has_loops, a.loop_budget) {
                (false, _) => aut.clone(),
                (true, Some(b)) => unroll_loops(&aut, b)?,
                (true, None) => {
                    check_acyclic_loop(&aut)?;
                    return Err(Error::Precondition("automaton has loops; pass --loop-budget".into()));
                }
            };
            let path = if a.brute {
                brute_witness(&target, &alpha, a.path_cap)?
            } else {
                membership_one(&target, &alpha, &MembershipConfig::default())?
            };
            let path_json = match (&path, has_loops) {
                (Some(p), false) => json!(p),
                _ => Value::Null,
            };
            Ok((0, json!({"member": path.is_some(), "path": path_json})))
        }
        Command::Gen(GenCommand::SatP4(a)) => {
            let phi = CnfFormula::parse_dimacs(&io::read_file(&a.input)?)?;
            let g = sat_to_p4_knapsack(&phi)?;
            let witness = sat_witness(&g, &phi);
            let v = gadget_json(&g.instance, Mode::Knapsack, witness)?;
            write_output(&a.output, &v)?;
            Ok((0, v))
        }
        Command::Gen(GenCommand::F2Gadget(a)) => {
            let f2 = f2_alphabet();
            let aut = match &a.input {
                Some(p) => {
                    let (aut, alpha) = io::automaton_from_json(&io::read_file(p)?, Some(&f2))?;
                    if alpha.names() != f2.names() || !alpha.is_edgeless() {
                        return Err(Error::InvalidAutomaton("expected the free alphabet {a, b}".into()));
                    }
                    aut
                }
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
                    random_acyclic_automaton(&mut rng, a.states, a.transitions, a.max_label)
                }
            };
            let g = acyclic_automaton_to_knapsack_f2(&aut)?;
            let mut v = gadget_json(&g, Mode::Subsetsum, None)?;
            v.as_object_mut()
                .expect("object")
                .insert("automaton".into(), serde_json::to_value(io::automaton_to_raw(&aut, &f2)).map_err(|e| Error::Io(e.to_string()))?);
            write_output(&a.output, &v)?;
            Ok((0, v))
        }
        Command::Oracle(OracleCommand::Brute(a)) => {
            let eq = io::instance_from_json(&io::read_file(&a.input)?)?;
            let sols = brute_force_solutions(&eq, a.bound, a.cap)?;
            Ok((0, json!({"bound": a.bound, "count": sols.len(), "solutions": sols})))
        }
        Command::Bound(a) => {
            let eq = io::instance_from_json(&io::read_file(&a.input)?)?;
            let tree = decompose(&eq.alphabet)?;
            let b = tameness_bound(&eq, &tree)?;
            let mut v = serde_json::to_value(&b).map_err(|e| Error::Io(e.to_string()))?;
            v.as_object_mut().expect("object").insert("tree".into(), json!(tree.display(&eq.alphabet)));
            Ok((0, v))
        }
    }
}
