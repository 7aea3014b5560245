use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;

use cabsat::bounds::{family_bounds, BoundRange, BoundsTable};
use cabsat::cnf::{parse_dimacs, Lit, VarAllocator};
use cabsat::graph::{from_spec, read_graph_file, to_edge_list, Graph, Labeling};
use cabsat::ladder::{encode_pairwise_baseline, encode_seq_baseline, exact_size, size_formulas, LadderEncoding, LadderSpec};
use cabsat::model::{build, ModelOptions};
use cabsat::oracle::{brute_force_cab_with, oracle_sweep, sweep_tsv, OracleOptions};
use cabsat::search::{backend_from_locator, verify_result, Answer, Backend, CadicalBackend, Order, SearchOptions, SearchResult, SOLVER_ENV};
use cabsat::{cab_of_labeling, Error};

const EXIT_UNCERTIFIED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_INTERNAL: u8 = 70;
const EXIT_BACKEND: u8 = 75;

/// Exact cyclic antibandwidth solver.
#[derive(Parser, Debug)]
#[command(name = "cabsat", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write a generated graph as an edge list.
    Generate {
        /// Generator spec, e.g. `caterpillar:5,4` or `random:100,200,7`.
        #[arg(long = "gen")]
        spec: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the DIMACS instance for one k, with `c x v l var` map lines.
    Encode {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        no_symmetry: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find the optimum and print the result as JSON.
    Solve(SolveArgs),
    /// Check a labeling against a graph and a claimed value.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated 1-based labels by vertex.
        #[arg(long, conflicts_with = "result")]
        labeling: Option<String>,
        /// A JSON result written by `solve`.
        #[arg(long)]
        result: Option<PathBuf>,
        /// Claimed value; defaults to the result's k_opt.
        #[arg(long)]
        k: Option<usize>,
        /// Cross-check with the brute-force oracle (n <= 9).
        #[arg(long)]
        oracle: bool,
    },
    /// Exact value by brute force (n <= 10), or a TSV sweep over a family.
    Oracle {
        #[command(flatten)]
        input: OptInputArgs,
        /// Family for a sweep: `connected` or a one-parameter generator family.
        #[arg(long, requires = "sizes", conflicts_with_all = ["spec", "file"])]
        sweep: Option<String>,
        /// Size range for a sweep, `a..b` inclusive.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        no_pruning: bool,
    },
    /// Compare encoding sizes for one cyclic ladder.
    BenchEncoding {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        /// Print the ladder's block decomposition.
        #[arg(long)]
        dump: bool,
    },
    /// Solve a DIMACS file with the built-in solver, printing `s`/`v` lines.
    Sat {
        file: PathBuf,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Generator spec.
    #[arg(long = "gen")]
    spec: Option<String>,
    /// Edge-list or Matrix Market (`.mtx`) file.
    #[arg(long = "input")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = false, multiple = false)]
struct OptInputArgs {
    #[arg(long = "gen")]
    spec: Option<String>,
    #[arg(long = "input")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Lower end of the search window.
    #[arg(long)]
    lb: Option<usize>,
    /// Upper end of the search window, taken as a proven bound.
    #[arg(long)]
    ub: Option<usize>,
    /// Take bounds from the named row of the bundled Harwell-Boeing table.
    #[arg(long)]
    table: Option<String>,
    /// Bounds table file (`name lb ub` per line) used with `--table`.
    #[arg(long, requires = "table")]
    table_file: Option<PathBuf>,
    /// Ignore family and table bounds; search [2, floor(n/2)].
    #[arg(long)]
    default_bounds: bool,
    /// Wall-clock limit for the whole search, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Memory limit in MB, checked against the estimated formula size.
    #[arg(long)]
    memory_limit: Option<u64>,
    /// Concurrent solver runs.
    #[arg(short = 'p', long, default_value_t = 1)]
    processes: usize,
    /// Candidate order: linear, bfs or dfs.
    #[arg(long, default_value = "linear")]
    order: Order,
    /// Disable the max-degree vertex symmetry clauses.
    #[arg(long)]
    no_symmetry: bool,
    /// Take the lower bound as feasible without solving it.
    #[arg(long)]
    assume_lb: bool,
    /// External solver command; defaults to $CABSAT_SOLVER, then the built-in solver.
    #[arg(long)]
    solver: Option<String>,
    /// Write the JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::NotApplicable(_) | Error::OracleCap { .. } => EXIT_USAGE,
        Error::Parse { .. } | Error::UndefinedObjective(_) | Error::Lookup(_) | Error::Io(_) => EXIT_DATA,
        Error::Backend(_) => EXIT_BACKEND,
        Error::Integrity(_) => EXIT_INTERNAL,
    }
}

fn load(spec: Option<&str>, file: Option<&Path>) -> cabsat::Result<(String, Graph)> {
    match (spec, file) {
        (Some(s), _) => Ok((s.to_string(), from_spec(s)?)),
        (None, Some(p)) => {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_graph_file(p)?))
        }
        (None, None) => Err(Error::input("give --gen or --input")),
    }
}

fn write_out(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> cabsat::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(fs::File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> cabsat::Result<u8> {
    match cli.command {
        Cmd::Generate { spec, output } => {
            let g = from_spec(&spec)?;
            write_out(output.as_deref(), |w| w.write_all(to_edge_list(&g).as_bytes()))?;
            Ok(0)
        }
        Cmd::Encode {
            input,
            k,
            no_symmetry,
            output,
        } => {
            let (_, g) = load(input.spec.as_deref(), input.file.as_deref())?;
            let inst = build(&g, k, ModelOptions { symmetry: !no_symmetry })?;
            if inst.trivial {
                return Err(Error::input(format!("k={k} is trivially satisfiable; nothing to encode")));
            }
            info!("{} vars, {} clauses", inst.num_vars(), inst.num_clauses());
            write_out(output.as_deref(), |w| inst.write_dimacs(w))?;
            Ok(0)
        }
        Cmd::Solve(args) => solve(args),
        Cmd::Verify {
            input,
            labeling,
            result,
            k,
            oracle,
        } => verify(input, labeling, result, k, oracle),
        Cmd::Oracle {
            input,
            sweep,
            sizes,
            threads,
            no_pruning,
        } => {
            if let Some(family) = sweep {
                let sizes = sizes.unwrap_or_default();
                let (a, b) = sizes
                    .split_once("..")
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| Error::input(format!("bad size range `{sizes}`, expected a..b")))?;
                let rows = oracle_sweep(&family, a..=b)?;
                print!("{}", sweep_tsv(&rows));
                return Ok(0);
            }
            let (name, g) = load(input.spec.as_deref(), input.file.as_deref())?;
            let r = brute_force_cab_with(
                &g,
                OracleOptions {
                    reversal_pruning: !no_pruning,
                    threads,
                },
            )?;
            let labels: Vec<String> = r.witness.as_slice().iter().map(usize::to_string).collect();
            println!("instance\tn\tm\tcab\texamined\twitness");
            println!("{name}\t{}\t{}\t{}\t{}\t{}", g.n(), g.num_edges(), r.cab, r.labelings_examined, labels.join(","));
            Ok(0)
        }
        Cmd::BenchEncoding { n, w, dump } => bench(n, w, dump),
        Cmd::Sat { file } => sat(&file),
    }
}

fn solve(a: SolveArgs) -> cabsat::Result<u8> {
    let (name, g) = load(a.input.spec.as_deref(), a.input.file.as_deref())?;
    let mut trust_ub = true;
    let mut bounds: Option<BoundRange> = None;
    if let Some(t) = &a.table {
        let table = match &a.table_file {
            Some(p) => BoundsTable::parse(&fs::read_to_string(p)?)?,
            None => BoundsTable::harwell_boeing(),
        };
        bounds = Some(table.get(t)?);
    } else if !a.default_bounds {
        if let Some((b, trusted)) = a.input.spec.as_deref().and_then(family_bounds) {
            bounds = Some(b);
            trust_ub = trusted;
        } else if let Ok(b) = BoundsTable::harwell_boeing().get(&name) {
            bounds = Some(b);
        }
    }
    if a.lb.is_some() || a.ub.is_some() {
        let base = bounds.unwrap_or(BoundRange { lb: 2.min(g.n() / 2).max(1), ub: g.n() / 2 });
        bounds = Some(BoundRange::new(a.lb.unwrap_or(base.lb), a.ub.unwrap_or(base.ub))?);
        if a.ub.is_some() {
            trust_ub = true;
        }
    }
    let locator = a.solver.clone().or_else(|| std::env::var(SOLVER_ENV).ok());
    let opts = SearchOptions {
        bounds,
        processes: a.processes.max(1),
        order: a.order,
        symmetry: !a.no_symmetry,
        verify_lb: !a.assume_lb,
        trust_ub,
        time_limit: match a.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err(Error::input("--time-limit must be positive")),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        },
        memory_limit_mb: a.memory_limit,
        backend: backend_from_locator(locator.as_deref())?,
    };
    info!("{name}: n={} m={} {opts:?}", g.n(), g.num_edges());
    let r = cabsat::search::solve_named(&name, &g, &opts)?;
    write_out(a.output.as_deref(), |w| writeln!(w, "{}", r.to_json()))?;
    Ok(if r.certified { 0 } else { EXIT_UNCERTIFIED })
}

fn verify(input: InputArgs, labeling: Option<String>, result: Option<PathBuf>, k: Option<usize>, oracle: bool) -> cabsat::Result<u8> {
    let (_, g) = load(input.spec.as_deref(), input.file.as_deref())?;
    if let Some(p) = result {
        let r = SearchResult::from_json(&fs::read_to_string(p)?)?;
        let rep = verify_result(&g, &r, oracle)?;
        if let (Some(claim), Some(v)) = (k, rep.labeling_value) {
            if v < claim {
                eprintln!("labeling has value {v} < claimed {claim}");
                return Ok(EXIT_DATA);
            }
        }
        println!("{}", rep.message);
        if let Some(c) = rep.oracle_cab {
            println!("oracle value {c}");
        }
        return Ok(0);
    }
    let text = labeling.ok_or_else(|| Error::input("give --labeling or --result"))?;
    let labels = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::parse(1, format!("bad label `{s}`"))))
        .collect::<cabsat::Result<Vec<_>>>()?;
    let f = Labeling::new(labels).map_err(|e| Error::parse(1, e.to_string()))?;
    let v = cab_of_labeling(&g, &f)?;
    println!("labeling value {v}");
    if let Some(claim) = k {
        if v < claim {
            eprintln!("labeling has value {v} < claimed {claim}");
            return Ok(EXIT_DATA);
        }
    }
    if oracle {
        let c = cabsat::oracle::brute_force_cab(&g)?.cab;
        println!("oracle value {c}");
    }
    Ok(0)
}

fn bench(n: usize, w: usize, dump: bool) -> cabsat::Result<u8> {
    let mut alloc = VarAllocator::new();
    let ring: Vec<Lit> = (0..n).map(|_| Lit::pos(alloc.fresh())).collect();
    let base = alloc.num_vars();
    let spec = LadderSpec::new(ring.clone(), w)?;
    let mut f = cabsat::cnf::CnfFormula::new();
    let enc = LadderEncoding::encode(&spec, 0, &mut f, &mut alloc)?;
    if dump {
        print!("{}", enc.debug_dump());
    }
    let (exact_aux, exact_cl) = exact_size(n, w)?;
    debug_assert_eq!((exact_aux, exact_cl), (enc.aux_vars(), f.num_clauses()));

    let mut pw = cabsat::cnf::CnfFormula::new();
    encode_pairwise_baseline(&mut pw, &ring, w);
    let mut seq_alloc = VarAllocator::with_reserved(base);
    let mut seq = cabsat::cnf::CnfFormula::new();
    encode_seq_baseline(&mut seq, &mut seq_alloc, &ring, w);

    let (nf, wf) = (n as f64, w as f64);
    let (la, lc) = size_formulas(n, w)?;
    let rows: Vec<(&str, String, String, &str)> = vec![
        ("ladder", enc.aux_vars().to_string(), f.num_clauses().to_string(), "emitted"),
        ("ladder", la.to_string(), lc.to_string(), "closed form, full-width blocks"),
        ("pairwise", "0".into(), pw.num_clauses().to_string(), "emitted, distinct pairs"),
        ("pairwise", "0".into(), ((w - 1) * w / 2 + (n - 1) * (w - 1)).to_string(), "closed form"),
        ("seq", (seq_alloc.num_vars() - base).to_string(), seq.num_clauses().to_string(), "emitted, one counter per window"),
        ("seq", (n * w.saturating_sub(2)).to_string(), (n * (4 * w).saturating_sub(7)).to_string(), "closed form"),
        ("bdd", (2 * n * (w - 1)).to_string(), (4 * n * (w - 1)).to_string(), "closed form, not implemented"),
        ("card", "n/a".into(), "n/a".into(), "O(n^2), not implemented"),
        (
            "product",
            format!("{:.0}", nf * 2.0 * wf.sqrt()),
            format!("{:.0}", nf * (2.0 * wf + 4.0 * wf.sqrt())),
            "leading terms, not implemented",
        ),
    ];
    println!("encoding\tn\tw\taux_vars\tclauses\tsource");
    for (name, aux, cl, src) in rows {
        println!("{name}\t{n}\t{w}\t{aux}\t{cl}\t{src}");
    }
    Ok(0)
}

fn sat(file: &Path) -> cabsat::Result<u8> {
    let f = parse_dimacs(&fs::read_to_string(file)?)?;
    let stop = AtomicBool::new(false);
    match CadicalBackend.solve(&f, None, &stop)? {
        Answer::Sat(m) => {
            let mut out = String::from("s SATISFIABLE\nv");
            for (v, &value) in m.iter().enumerate().skip(1) {
                out.push(' ');
                if !value {
                    out.push('-');
                }
                out.push_str(&v.to_string());
            }
            out.push_str(" 0\n");
            print!("{out}");
            Ok(10)
        }
        Answer::Unsat => {
            println!("s UNSATISFIABLE");
            Ok(20)
        }
        Answer::Timeout | Answer::Cancelled => {
            println!("s UNKNOWN");
            Ok(0)
        }
    }
}
