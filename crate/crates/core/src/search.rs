//! Solver backends and the search over candidate values of `k`.
//!
//! [`iterative_search`] scans `k` upwards and stops at the first UNSAT.
//! [`parallel_search`] keeps up to `P` candidates in flight, taken from a
//! queue in linear or binary-pruning order; a SAT answer at `k` cancels the
//! workers below `k`, an UNSAT answer cancels those above. Both record into a
//! [`SearchState`] holding the window `(k_sat, k_unsat)`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::bounds::{default_bounds, BoundRange};
use crate::cnf::{read_model, CnfFormula, SolverOutput};
use crate::error::{Error, Result};
use crate::graph::{cab_of_labeling, Graph, Labeling};
use crate::model::{build, estimate_size, ModelOptions};
use crate::oracle::{brute_force_cab, ORACLE_CAP};

/// Environment variable naming an external solver executable (optionally
/// followed by arguments) to use instead of the built-in CaDiCaL.
pub const SOLVER_ENV: &str = "CABSAT_SOLVER";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
    Memout,
    Cancelled,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Timeout => "TIMEOUT",
            Status::Memout => "MEMOUT",
            Status::Cancelled => "CANCELLED",
        })
    }
}

/// Result of one decision problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub k: usize,
    pub status: Status,
    /// Present iff `status == Sat`.
    pub labeling: Option<Labeling>,
    pub seconds: f64,
    pub vars: u64,
    pub clauses: u64,
}

impl SolveOutcome {
    pub fn without_model(k: usize, status: Status) -> Self {
        SolveOutcome {
            k,
            status,
            labeling: None,
            seconds: 0.0,
            vars: 0,
            clauses: 0,
        }
    }
}

/// Raw backend answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    /// Assignment indexed by variable id, index 0 unused.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
    Cancelled,
}

/// A SAT solver. Implementations must return promptly once `stop` is set or
/// `deadline` has passed.
pub trait Backend: Send + Sync {
    fn name(&self) -> String;
    fn solve(&self, formula: &CnfFormula, deadline: Option<Instant>, stop: &AtomicBool) -> Result<Answer>;
}

/// In-process CaDiCaL.
#[derive(Clone, Copy, Debug, Default)]
pub struct CadicalBackend;

struct Interrupt<'a> {
    stop: &'a AtomicBool,
    deadline: Option<Instant>,
}

impl cadical::Callbacks for Interrupt<'_> {
    fn terminate(&mut self) -> bool {
        self.stop.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

impl Backend for CadicalBackend {
    fn name(&self) -> String {
        "cadical".into()
    }

    fn solve(&self, formula: &CnfFormula, deadline: Option<Instant>, stop: &AtomicBool) -> Result<Answer> {
        let mut s: cadical::Solver<Interrupt<'_>> = cadical::Solver::new();
        s.reserve(formula.num_vars() as i32);
        for c in formula.clauses() {
            s.add_clause(c.iter().map(|l| l.to_dimacs()));
        }
        s.set_callbacks(Some(Interrupt { stop, deadline }));
        match s.solve() {
            Some(true) => {
                let n = formula.num_vars();
                let mut model = vec![false; n as usize + 1];
                for v in 1..=n {
                    model[v as usize] = s.value(v as i32) == Some(true);
                }
                Ok(Answer::Sat(model))
            }
            Some(false) => Ok(Answer::Unsat),
            None if stop.load(Ordering::Relaxed) => Ok(Answer::Cancelled),
            None => Ok(Answer::Timeout),
        }
    }
}

/// An external DIMACS solver run as a subprocess. The formula is written to a
/// temporary file passed as the last argument; the `s`/`v` lines on stdout are
/// parsed. The process is killed on cancellation or at the deadline.
#[derive(Clone, Debug)]
pub struct ExternalBackend {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub poll: Duration,
}

impl ExternalBackend {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        ExternalBackend {
            program: program.into(),
            args,
            poll: Duration::from_millis(10),
        }
    }

    /// Parses `"program arg1 arg2"` (whitespace separated).
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace();
        let program = parts.next().ok_or_else(|| Error::input("empty solver command"))?;
        Ok(Self::new(program, parts.map(String::from).collect()))
    }
}

impl Backend for ExternalBackend {
    fn name(&self) -> String {
        self.program.display().to_string()
    }

    fn solve(&self, formula: &CnfFormula, deadline: Option<Instant>, stop: &AtomicBool) -> Result<Answer> {
        let backend_err = |what: &str, e: std::io::Error| Error::Backend(format!("{}: {what}: {e}", self.name()));
        let mut cnf = tempfile::Builder::new()
            .suffix(".cnf")
            .tempfile()
            .map_err(|e| backend_err("creating input file", e))?;
        {
            let mut w = BufWriter::new(cnf.as_file_mut());
            formula.write_dimacs(&mut w).map_err(|e| backend_err("writing input file", e))?;
            w.flush().map_err(|e| backend_err("writing input file", e))?;
        }
        let mut out = tempfile::tempfile().map_err(|e| backend_err("creating output file", e))?;
        let mut err = tempfile::tempfile().map_err(|e| backend_err("creating output file", e))?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(cnf.path())
            .stdin(Stdio::null())
            .stdout(out.try_clone().map_err(|e| backend_err("cloning handle", e))?)
            .stderr(err.try_clone().map_err(|e| backend_err("cloning handle", e))?)
            .spawn()
            .map_err(|e| backend_err("spawning", e))?;
        let status = loop {
            if let Some(st) = child.try_wait().map_err(|e| backend_err("waiting", e))? {
                break st;
            }
            let cancelled = stop.load(Ordering::Relaxed);
            if cancelled || deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(if cancelled { Answer::Cancelled } else { Answer::Timeout });
            }
            std::thread::sleep(self.poll);
        };
        let read_all = |f: &mut File| -> Result<String> {
            let mut s = String::new();
            f.seek(SeekFrom::Start(0)).map_err(|e| backend_err("reading output", e))?;
            f.read_to_string(&mut s).map_err(|e| backend_err("reading output", e))?;
            Ok(s)
        };
        let stdout = read_all(&mut out)?;
        match read_model(&stdout, formula.num_vars()) {
            Ok(SolverOutput::Sat(m)) => Ok(Answer::Sat(m)),
            Ok(SolverOutput::Unsat) => Ok(Answer::Unsat),
            Ok(SolverOutput::Unknown) => Ok(Answer::Timeout),
            Err(e) => {
                let stderr = read_all(&mut err).unwrap_or_default();
                let tail: String = stderr.lines().rev().take(5).collect::<Vec<_>>().join(" | ");
                Err(Error::Backend(format!("{} exited with {status}: {e}; stderr: {tail}", self.name())))
            }
        }
    }
}

/// `None`, empty or `cadical` selects the built-in solver; anything else is
/// an external solver command line.
pub fn backend_from_locator(locator: Option<&str>) -> Result<Arc<dyn Backend>> {
    match locator.map(str::trim) {
        None | Some("") | Some("cadical") => Ok(Arc::new(CadicalBackend)),
        Some(cmd) => Ok(Arc::new(ExternalBackend::from_command_line(cmd)?)),
    }
}

/// Backend named by [`SOLVER_ENV`], falling back to CaDiCaL.
pub fn backend_from_env() -> Result<Arc<dyn Backend>> {
    backend_from_locator(std::env::var(SOLVER_ENV).ok().as_deref())
}

/// Bytes per clause and per variable assumed when checking a memory limit
/// before building a formula.
pub const BYTES_PER_CLAUSE: u64 = 96;
pub const BYTES_PER_VAR: u64 = 128;

/// Estimated memory for a formula of the given size, covering our clause
/// store and the solver's copy.
pub fn estimated_bytes(vars: u64, clauses: u64) -> u64 {
    vars * BYTES_PER_VAR + clauses * BYTES_PER_CLAUSE
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub memory_bytes: Option<u64>,
}

/// Builds and solves the decision problem for one `k`. SAT answers are
/// decoded and verified against `g` before being returned.
pub fn backend_solve(
    g: &Graph,
    k: usize,
    model: ModelOptions,
    backend: &dyn Backend,
    budget: Budget,
    stop: &AtomicBool,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let done = |status, labeling, vars, clauses| SolveOutcome {
        k,
        status,
        labeling,
        seconds: start.elapsed().as_secs_f64(),
        vars,
        clauses,
    };
    if k <= 1 {
        let f = Labeling::identity(g.n());
        cab_of_labeling(g, &f)?;
        return Ok(done(Status::Sat, Some(f), 0, 0));
    }
    if stop.load(Ordering::Relaxed) {
        return Ok(done(Status::Cancelled, None, 0, 0));
    }
    if budget.deadline.is_some_and(|d| Instant::now() >= d) {
        return Ok(done(Status::Timeout, None, 0, 0));
    }
    let (vars, clauses) = estimate_size(g, k, model)?;
    if let Some(limit) = budget.memory_bytes {
        let need = estimated_bytes(vars, clauses);
        if need > limit {
            info!("k={k}: estimated {need} bytes exceeds the {limit} byte limit");
            return Ok(done(Status::Memout, None, vars, clauses));
        }
    }
    let inst = build(g, k, model)?;
    let (vars, clauses) = (inst.num_vars() as u64, inst.num_clauses() as u64);
    debug!("k={k}: {vars} vars, {clauses} clauses, built in {:.3}s", start.elapsed().as_secs_f64());
    Ok(match backend.solve(&inst.formula, budget.deadline, stop)? {
        Answer::Sat(m) => {
            if m.len() <= inst.num_vars() as usize {
                return Err(Error::Backend(format!("model covers {} of {vars} variables", m.len().saturating_sub(1))));
            }
            let f = inst.decode(g, |v| m[v as usize])?;
            done(Status::Sat, Some(f), vars, clauses)
        }
        Answer::Unsat => done(Status::Unsat, None, vars, clauses),
        Answer::Timeout => done(Status::Timeout, None, vars, clauses),
        Answer::Cancelled => done(Status::Cancelled, None, vars, clauses),
    })
}

/// Order in which candidate values are handed to workers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// Ascending.
    #[default]
    Linear,
    /// Level order of the midpoint tree.
    Bfs,
    /// Preorder of the midpoint tree.
    Dfs,
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Order::Linear),
            "bfs" => Ok(Order::Bfs),
            "dfs" => Ok(Order::Dfs),
            _ => Err(Error::input(format!("unknown order `{s}` (linear, bfs, dfs)"))),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Linear => "linear",
            Order::Bfs => "bfs",
            Order::Dfs => "dfs",
        })
    }
}

/// Candidates `lo..=hi` in the given order. The midpoint tree has root
/// `(lo + hi) / 2` over `[lo, hi]`, and its children are the roots over
/// `[lo, mid - 1]` and `[mid + 1, hi]`.
pub fn candidate_order(lo: usize, hi: usize, order: Order) -> Vec<usize> {
    if lo > hi {
        return Vec::new();
    }
    match order {
        Order::Linear => (lo..=hi).collect(),
        Order::Bfs => {
            let mut out = Vec::with_capacity(hi - lo + 1);
            let mut q = VecDeque::from([(lo, hi)]);
            while let Some((a, b)) = q.pop_front() {
                let mid = a + (b - a) / 2;
                out.push(mid);
                if mid > a {
                    q.push_back((a, mid - 1));
                }
                if mid < b {
                    q.push_back((mid + 1, b));
                }
            }
            out
        }
        Order::Dfs => {
            let mut out = Vec::with_capacity(hi - lo + 1);
            let mut stack = vec![(lo, hi)];
            while let Some((a, b)) = stack.pop() {
                let mid = a + (b - a) / 2;
                out.push(mid);
                if mid < b {
                    stack.push((mid + 1, b));
                }
                if mid > a {
                    stack.push((a, mid - 1));
                }
            }
            out
        }
    }
}

/// The shared search window and log.
///
/// Invariants: `k_sat < k_unsat`; `k_sat` never decreases and `k_unsat`
/// never increases; SAT outcomes have `k <= k_sat`, UNSAT ones `k >= k_unsat`.
#[derive(Clone, Debug)]
pub struct SearchState {
    n: usize,
    bounds: BoundRange,
    k_sat: usize,
    k_unsat: usize,
    unsat_proven: bool,
    lb_assumed: bool,
    queue: VecDeque<usize>,
    running: BTreeSet<usize>,
    outcomes: Vec<SolveOutcome>,
    best: Option<Labeling>,
}

impl SearchState {
    /// `verify_lb` makes `lb` itself a candidate; otherwise `lb` is taken as
    /// feasible and the search starts above it.
    pub fn new(n: usize, bounds: BoundRange, order: Order, verify_lb: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::input("search needs at least 2 vertices"));
        }
        if bounds.lb == 0 || bounds.lb > bounds.ub || bounds.ub > n / 2 {
            return Err(Error::input(format!(
                "bounds [{}, {}] not within [1, floor(n/2)={}]",
                bounds.lb,
                bounds.ub,
                n / 2
            )));
        }
        let k_sat = if verify_lb { bounds.lb - 1 } else { bounds.lb };
        let k_unsat = bounds.ub + 1;
        Ok(SearchState {
            n,
            bounds,
            k_sat,
            k_unsat,
            unsat_proven: false,
            lb_assumed: !verify_lb && bounds.lb > 1,
            queue: candidate_order(k_sat + 1, bounds.ub, order).into(),
            running: BTreeSet::new(),
            outcomes: Vec::new(),
            // every labeling of a graph with an edge reaches 1
            best: (k_sat == 1).then(|| Labeling::identity(n)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> BoundRange {
        self.bounds
    }

    pub fn k_sat(&self) -> usize {
        self.k_sat
    }

    pub fn k_unsat(&self) -> usize {
        self.k_unsat
    }

    pub fn outcomes(&self) -> &[SolveOutcome] {
        &self.outcomes
    }

    pub fn labeling(&self) -> Option<&Labeling> {
        self.best.as_ref()
    }

    pub fn running(&self) -> impl Iterator<Item = usize> + '_ {
        self.running.iter().copied()
    }

    /// Candidates still queued inside `(k_sat, k_unsat)`.
    pub fn pending(&self) -> Vec<usize> {
        self.queue.iter().copied().filter(|&k| self.viable(k)).collect()
    }

    fn viable(&self, k: usize) -> bool {
        self.k_sat < k && k < self.k_unsat && !self.running.contains(&k)
    }

    /// Next queued candidate inside `(k_sat, k_unsat)`, marked as running.
    pub fn pop_candidate(&mut self) -> Option<usize> {
        while let Some(k) = self.queue.pop_front() {
            if self.viable(k) {
                self.running.insert(k);
                return Some(k);
            }
        }
        None
    }

    /// Whether a worker on `k` can no longer change the result.
    pub fn should_cancel(&self, k: usize) -> bool {
        k <= self.k_sat || k >= self.k_unsat
    }

    /// Records a finished solve. Contradictory answers (SAT at or above a
    /// proven UNSAT, UNSAT at or below a proven SAT) are integrity errors.
    pub fn record(&mut self, outcome: SolveOutcome) -> Result<()> {
        let k = outcome.k;
        self.running.remove(&k);
        match outcome.status {
            Status::Sat => {
                if k >= self.k_unsat {
                    return Err(Error::integrity(format!("SAT at k={k} but k={} is infeasible", self.k_unsat)));
                }
                let f = outcome
                    .labeling
                    .as_ref()
                    .ok_or_else(|| Error::integrity(format!("SAT at k={k} without a labeling")))?;
                if k > self.k_sat {
                    self.k_sat = k;
                    self.best = Some(f.clone());
                    self.lb_assumed = false;
                }
            }
            Status::Unsat => {
                if k <= self.k_sat {
                    let why = if self.lb_assumed { "assumed" } else { "known" };
                    return Err(Error::integrity(format!("UNSAT at k={k} but k={} is {why} feasible", self.k_sat)));
                }
                if outcome.labeling.is_some() {
                    return Err(Error::integrity("UNSAT outcome carries a labeling"));
                }
                if k < self.k_unsat {
                    self.k_unsat = k;
                    self.unsat_proven = true;
                }
            }
            Status::Timeout | Status::Memout | Status::Cancelled => {
                if outcome.labeling.is_some() {
                    return Err(Error::integrity(format!("{} outcome carries a labeling", outcome.status)));
                }
            }
        }
        self.outcomes.push(outcome);
        Ok(())
    }

    /// Best feasible value known: witnessed by a labeling, or the lower bound
    /// when it was assumed.
    pub fn k_opt(&self) -> Option<usize> {
        (self.best.is_some() || self.lb_assumed).then_some(self.k_sat)
    }

    /// `k_opt` is optimal: it reaches `floor(n/2)`, or `k_opt + 1` is
    /// infeasible (proven by the solver, or by a trusted upper bound).
    pub fn certified(&self, trust_ub: bool) -> bool {
        self.k_opt().is_some()
            && (self.k_sat == self.n / 2 || (self.k_unsat == self.k_sat + 1 && (self.unsat_proven || trust_ub)))
    }

    /// Whether UNSAT at `k_unsat` was observed rather than implied by the
    /// upper bound.
    pub fn unsat_proven(&self) -> bool {
        self.unsat_proven
    }
}

/// Runs `solve(k, stop)` on up to `processes` workers until no candidate is
/// left in `(k_sat, k_unsat)`. No new candidate is started after `deadline`.
/// A worker's `stop` flag is raised once its `k` leaves the window.
pub fn drive_parallel<F>(state: SearchState, processes: usize, deadline: Option<Instant>, solve: F) -> Result<SearchState>
where
    F: Fn(usize, &AtomicBool) -> Result<SolveOutcome> + Sync,
{
    struct Shared {
        state: SearchState,
        flags: HashMap<usize, Arc<AtomicBool>>,
        error: Option<Error>,
    }
    let workers = processes.max(1).min(state.pending().len().max(1));
    let shared = Mutex::new(Shared {
        state,
        flags: HashMap::new(),
        error: None,
    });
    let worker = || loop {
        let (k, flag) = {
            let mut sh = shared.lock().expect("search state lock poisoned");
            if sh.error.is_some() || deadline.is_some_and(|d| Instant::now() >= d) {
                return;
            }
            let Some(k) = sh.state.pop_candidate() else {
                return;
            };
            let flag = Arc::new(AtomicBool::new(false));
            sh.flags.insert(k, flag.clone());
            (k, flag)
        };
        let result = solve(k, &flag);
        let mut sh = shared.lock().expect("search state lock poisoned");
        sh.flags.remove(&k);
        let recorded = result.and_then(|o| {
            debug!("k={k}: {} in {:.3}s", o.status, o.seconds);
            sh.state.record(o)
        });
        if let Err(e) = recorded {
            sh.error.get_or_insert(e);
            for f in sh.flags.values() {
                f.store(true, Ordering::Relaxed);
            }
            return;
        }
        let Shared { state, flags, .. } = &*sh;
        for (&other, f) in flags {
            if state.should_cancel(other) {
                f.store(true, Ordering::Relaxed);
            }
        }
    };
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(worker);
        }
    });
    let sh = shared.into_inner().expect("search state lock poisoned");
    match sh.error {
        Some(e) => Err(e),
        None => Ok(sh.state),
    }
}

#[derive(Clone)]
pub struct SearchOptions {
    /// Search window; `None` uses `[2, floor(n/2)]`.
    pub bounds: Option<BoundRange>,
    pub processes: usize,
    pub order: Order,
    pub symmetry: bool,
    /// Solve `k = lb` instead of assuming it feasible.
    pub verify_lb: bool,
    /// Treat `ub` as a proven upper bound, so SAT at `ub` certifies.
    pub trust_ub: bool,
    /// Global wall-clock limit for the whole search.
    pub time_limit: Option<Duration>,
    pub memory_limit_mb: Option<u64>,
    pub backend: Arc<dyn Backend>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            bounds: None,
            processes: 1,
            order: Order::Linear,
            symmetry: true,
            verify_lb: true,
            trust_ub: true,
            time_limit: None,
            memory_limit_mb: None,
            backend: Arc::new(CadicalBackend),
        }
    }
}

impl fmt::Debug for SearchOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchOptions")
            .field("bounds", &self.bounds)
            .field("processes", &self.processes)
            .field("order", &self.order)
            .field("symmetry", &self.symmetry)
            .field("verify_lb", &self.verify_lb)
            .field("trust_ub", &self.trust_ub)
            .field("time_limit", &self.time_limit)
            .field("memory_limit_mb", &self.memory_limit_mb)
            .field("backend", &self.backend.name())
            .finish()
    }
}

impl SearchOptions {
    fn resolve_bounds(&self, g: &Graph) -> Result<BoundRange> {
        match self.bounds {
            Some(b) => {
                let c = b.clamped(g.n());
                if c != b {
                    warn!("bounds [{}, {}] clamped to [{}, {}]", b.lb, b.ub, c.lb, c.ub);
                }
                Ok(c)
            }
            None => {
                let (b, degenerate) = default_bounds(g.n())?;
                if degenerate {
                    warn!("n={} < 4: using bounds [{}, {}]", g.n(), b.lb, b.ub);
                }
                Ok(b)
            }
        }
    }

    fn budget(&self, start: Instant) -> Budget {
        Budget {
            deadline: self.time_limit.map(|t| start + t),
            memory_bytes: self.memory_limit_mb.map(|mb| mb * 1024 * 1024),
        }
    }

    fn model(&self) -> ModelOptions {
        ModelOptions { symmetry: self.symmetry }
    }
}

fn check_graph(g: &Graph) -> Result<()> {
    if g.num_edges() == 0 {
        return Err(Error::UndefinedObjective("cyclic antibandwidth of an edgeless graph".into()));
    }
    Ok(())
}

/// Scans `k` upwards from the lower bound, one solve at a time, stopping at
/// the first UNSAT, TIMEOUT or MEMOUT.
pub fn iterative_search(g: &Graph, opts: &SearchOptions) -> Result<SearchState> {
    check_graph(g)?;
    let start = Instant::now();
    let bounds = opts.resolve_bounds(g)?;
    let budget = opts.budget(start);
    let mut state = SearchState::new(g.n(), bounds, Order::Linear, opts.verify_lb)?;
    let stop = AtomicBool::new(false);
    while let Some(k) = state.pop_candidate() {
        let o = backend_solve(g, k, opts.model(), opts.backend.as_ref(), budget, &stop)?;
        let status = o.status;
        info!("k={k}: {status} in {:.3}s", o.seconds);
        state.record(o)?;
        if status != Status::Sat {
            break;
        }
    }
    Ok(state)
}

/// Up to `opts.processes` concurrent solves over the candidates in
/// `opts.order`.
pub fn parallel_search(g: &Graph, opts: &SearchOptions) -> Result<SearchState> {
    check_graph(g)?;
    let start = Instant::now();
    let bounds = opts.resolve_bounds(g)?;
    let budget = opts.budget(start);
    let state = SearchState::new(g.n(), bounds, opts.order, opts.verify_lb)?;
    let model = opts.model();
    let backend = opts.backend.as_ref();
    drive_parallel(state, opts.processes, budget.deadline, |k, stop| {
        backend_solve(g, k, model, backend, budget, stop)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerK {
    pub k: usize,
    pub status: Status,
    pub seconds: f64,
    pub vars: u64,
    pub clauses: u64,
}

/// Serializable summary of a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub lb: usize,
    pub ub: usize,
    pub k_opt: Option<usize>,
    pub certified: bool,
    /// 1-based labels by vertex.
    pub labeling: Option<Vec<usize>>,
    /// Smallest value known or assumed infeasible.
    pub k_unsat: usize,
    pub per_k: Vec<PerK>,
    pub wall_seconds: f64,
    pub processes: usize,
    pub order: Order,
}

impl SearchResult {
    pub fn from_state(instance: &str, g: &Graph, state: &SearchState, opts: &SearchOptions, wall: Duration) -> Self {
        let mut per_k: Vec<PerK> = state
            .outcomes()
            .iter()
            .map(|o| PerK {
                k: o.k,
                status: o.status,
                seconds: o.seconds,
                vars: o.vars,
                clauses: o.clauses,
            })
            .collect();
        per_k.sort_by_key(|p| p.k);
        SearchResult {
            instance: instance.to_string(),
            n: g.n(),
            m: g.num_edges(),
            lb: state.bounds().lb,
            ub: state.bounds().ub,
            k_opt: state.k_opt(),
            certified: state.certified(opts.trust_ub),
            labeling: state.labeling().map(|f| f.as_slice().to_vec()),
            k_unsat: state.k_unsat(),
            per_k,
            wall_seconds: wall.as_secs_f64(),
            processes: opts.processes,
            order: opts.order,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

/// Iterative search when `processes == 1` with linear order, parallel search
/// otherwise.
pub fn solve(g: &Graph, opts: &SearchOptions) -> Result<SearchResult> {
    solve_named("", g, opts)
}

pub fn solve_named(instance: &str, g: &Graph, opts: &SearchOptions) -> Result<SearchResult> {
    let start = Instant::now();
    let state = if opts.processes <= 1 && opts.order == Order::Linear {
        iterative_search(g, opts)?
    } else {
        parallel_search(g, opts)?
    };
    let result = SearchResult::from_state(instance, g, &state, opts, start.elapsed());
    // every run re-checks its own answer
    verify_result(g, &result, false)?;
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    /// Value of the stored labeling.
    pub labeling_value: Option<usize>,
    pub certified: bool,
    pub oracle_cab: Option<usize>,
    pub message: String,
}

/// Re-evaluates the stored labeling, checks the certified flag against the
/// per-`k` log, and optionally cross-checks with the brute-force oracle
/// (`n <= 9`).
pub fn verify_result(g: &Graph, r: &SearchResult, use_oracle: bool) -> Result<VerifyReport> {
    if r.n != g.n() || r.m != g.num_edges() {
        return Err(Error::integrity(format!(
            "result is for n={} m={}, graph has n={} m={}",
            r.n,
            r.m,
            g.n(),
            g.num_edges()
        )));
    }
    let labeling_value = match &r.labeling {
        Some(l) => {
            let f = Labeling::new(l.clone()).map_err(|e| Error::integrity(format!("stored labeling: {e}")))?;
            Some(cab_of_labeling(g, &f)?)
        }
        None => None,
    };
    if let (Some(v), Some(k)) = (labeling_value, r.k_opt) {
        if v < k {
            return Err(Error::integrity(format!("stored labeling has value {v} < k_opt={k}")));
        }
        if r.certified && v > k {
            return Err(Error::integrity(format!("labeling value {v} beats the certified optimum {k}")));
        }
    }
    for p in &r.per_k {
        match (p.status, r.k_opt) {
            (Status::Sat, Some(k)) if p.k > k => {
                return Err(Error::integrity(format!("SAT at k={} above k_opt={k}", p.k)));
            }
            (Status::Unsat, _) if p.k < r.k_unsat => {
                return Err(Error::integrity(format!("UNSAT at k={} below k_unsat={}", p.k, r.k_unsat)));
            }
            _ => {}
        }
    }
    if r.certified {
        let k = r.k_opt.ok_or_else(|| Error::integrity("certified result without k_opt"))?;
        if k != r.n / 2 && r.k_unsat != k + 1 {
            return Err(Error::integrity(format!(
                "certified k_opt={k} but k_unsat={} and floor(n/2)={}",
                r.k_unsat,
                r.n / 2
            )));
        }
    }
    let oracle_cab = if use_oracle && g.n() <= ORACLE_CAP.min(9) {
        let cab = brute_force_cab(g)?.cab;
        match r.k_opt {
            Some(k) if r.certified && k != cab => {
                return Err(Error::integrity(format!("certified k_opt={k}, oracle says {cab}")));
            }
            Some(k) if k > cab => {
                return Err(Error::integrity(format!("k_opt={k} exceeds the oracle value {cab}")));
            }
            _ if r.k_unsat <= cab => {
                return Err(Error::integrity(format!("k_unsat={} but oracle value is {cab}", r.k_unsat)));
            }
            _ => {}
        }
        Some(cab)
    } else {
        None
    };
    let message = match (r.k_opt, r.certified) {
        (Some(k), true) => format!("optimal value {k}, certified"),
        (Some(k), false) => format!("bounds [{k}, {}], not certified", r.k_unsat - 1),
        (None, _) => format!("no feasible value found in [{}, {}]", r.lb, r.ub),
    };
    Ok(VerifyReport {
        labeling_value,
        certified: r.certified,
        oracle_cab,
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, double_star, path, random_connected};
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts(bounds: Option<(usize, usize)>) -> SearchOptions {
        SearchOptions {
            bounds: bounds.map(|(lb, ub)| BoundRange { lb, ub }),
            ..SearchOptions::default()
        }
    }

    #[test]
    fn orders() {
        assert_eq!(candidate_order(1, 7, Order::Linear), [1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(candidate_order(1, 7, Order::Bfs), [4, 2, 6, 1, 3, 5, 7]);
        assert_eq!(candidate_order(1, 7, Order::Dfs), [4, 2, 1, 3, 6, 5, 7]);
        assert_eq!(candidate_order(3, 2, Order::Bfs), Vec::<usize>::new());
        for order in [Order::Linear, Order::Bfs, Order::Dfs] {
            for (lo, hi) in [(2, 2), (2, 9), (5, 30)] {
                let mut c = candidate_order(lo, hi, order);
                c.sort();
                assert_eq!(c, (lo..=hi).collect::<Vec<_>>());
            }
        }
        assert_eq!("bfs".parse::<Order>().unwrap(), Order::Bfs);
        assert!("up".parse::<Order>().is_err());
    }

    #[test]
    fn cycle_six_iterative() {
        let g = cycle(6).unwrap();
        let st = iterative_search(&g, &opts(Some((1, 3)))).unwrap();
        assert_eq!(st.k_opt(), Some(2));
        assert!(st.certified(true));
        let ks: Vec<(usize, Status)> = st.outcomes().iter().map(|o| (o.k, o.status)).collect();
        assert_eq!(ks, [(1, Status::Sat), (2, Status::Sat), (3, Status::Unsat)]);
    }

    #[test]
    fn cycle_six_parallel() {
        let g = cycle(6).unwrap();
        let o = SearchOptions {
            processes: 2,
            order: Order::Bfs,
            ..opts(Some((1, 3)))
        };
        let st = parallel_search(&g, &o).unwrap();
        assert_eq!(st.k_opt(), Some(2));
        assert!(st.certified(true));
    }

    #[test]
    fn triangle_short_circuit() {
        let g = complete(3).unwrap();
        let r = solve(&g, &opts(Some((1, 1)))).unwrap();
        assert_eq!(r.k_opt, Some(1));
        assert!(r.certified);
        assert_eq!(r.labeling, Some(vec![1, 2, 3]));
        // default bounds degenerate to [1, 1]
        assert_eq!(solve(&g, &opts(None)).unwrap().k_opt, Some(1));
    }

    #[test]
    fn infeasible_lower_bound() {
        // the path P4 has value 1, so the default lb = 2 is infeasible
        let g = path(4).unwrap();
        let r = solve(&g, &opts(None)).unwrap();
        assert_eq!(r.k_opt, Some(1));
        assert!(r.certified);
        let g = cycle(10).unwrap();
        let r = solve(&g, &opts(Some((5, 5)))).unwrap();
        assert_eq!(r.k_opt, None);
        assert!(!r.certified);
    }

    #[test]
    fn assumed_lower_bound() {
        let g = cycle(9).unwrap();
        let o = SearchOptions {
            verify_lb: false,
            ..opts(Some((2, 4)))
        };
        let st = iterative_search(&g, &o).unwrap();
        assert_eq!(st.k_opt(), Some(4));
        assert_eq!(st.outcomes()[0].k, 3);
    }

    #[test]
    fn double_star_15_5() {
        let g = double_star(15, 5).unwrap();
        let r = solve(&g, &opts(Some((2, 4)))).unwrap();
        assert_eq!((r.k_opt, r.certified), (Some(3), true));
    }

    #[test]
    fn untrusted_ub_does_not_certify() {
        let g = cycle(9).unwrap();
        let o = SearchOptions {
            trust_ub: false,
            ..opts(Some((2, 3)))
        };
        let r = solve(&g, &o).unwrap();
        assert_eq!(r.k_opt, Some(3));
        assert!(!r.certified);
        // floor(n/2) is intrinsically optimal
        let r = solve(&g, &SearchOptions { trust_ub: false, ..opts(Some((2, 4))) }).unwrap();
        assert!(r.certified);
    }

    #[test]
    fn timeout_and_memout() {
        let g = random_connected(60, 150, 1).unwrap();
        let stop = AtomicBool::new(false);
        let budget = Budget {
            deadline: Some(Instant::now() + Duration::from_millis(1)),
            memory_bytes: None,
        };
        let o = backend_solve(&g, 12, ModelOptions::default(), &CadicalBackend, budget, &stop).unwrap();
        assert_eq!(o.status, Status::Timeout);
        assert!(o.labeling.is_none());

        let budget = Budget {
            deadline: None,
            memory_bytes: Some(1024),
        };
        let o = backend_solve(&g, 12, ModelOptions::default(), &CadicalBackend, budget, &stop).unwrap();
        assert_eq!(o.status, Status::Memout);

        stop.store(true, Ordering::Relaxed);
        let o = backend_solve(&g, 12, ModelOptions::default(), &CadicalBackend, Budget::default(), &stop).unwrap();
        assert_eq!(o.status, Status::Cancelled);
    }

    #[test]
    fn timeout_leaves_gap() {
        let g = random_connected(80, 200, 5).unwrap();
        let o = SearchOptions {
            time_limit: Some(Duration::from_millis(1)),
            ..opts(Some((2, 40)))
        };
        let r = solve(&g, &o).unwrap();
        assert!(!r.certified);
        let rep = verify_result(&g, &r, false).unwrap();
        assert!(!rep.certified);
    }

    /// A mock answering from a hidden optimum.
    fn mock(k: usize, opt: usize, n: usize) -> SolveOutcome {
        if k <= opt {
            SolveOutcome {
                labeling: Some(Labeling::identity(n)),
                ..SolveOutcome::without_model(k, Status::Sat)
            }
        } else {
            SolveOutcome::without_model(k, Status::Unsat)
        }
    }

    /// Random completion orders over a pure state machine: the window only
    /// shrinks and the result always equals the hidden optimum.
    #[test]
    fn random_interleavings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let n = rng.random_range(8..80);
            let lb = rng.random_range(1..=n / 2);
            let ub = rng.random_range(lb..=n / 2);
            let opt = rng.random_range(lb.max(1) - 1..=ub).max(1);
            let order = *[Order::Linear, Order::Bfs, Order::Dfs].choose(&mut rng).unwrap();
            let p = rng.random_range(1..6);
            let mut st = SearchState::new(n, BoundRange { lb, ub }, order, true).unwrap();
            let mut running: Vec<(usize, bool)> = Vec::new();
            loop {
                while running.len() < p {
                    match st.pop_candidate() {
                        Some(k) => running.push((k, false)),
                        None => break,
                    }
                }
                if running.is_empty() {
                    break;
                }
                let i = rng.random_range(0..running.len());
                let (k, cancelled) = running.swap_remove(i);
                let out = if cancelled && rng.random_bool(0.5) {
                    SolveOutcome::without_model(k, Status::Cancelled)
                } else if rng.random_bool(0.05) {
                    SolveOutcome::without_model(k, Status::Timeout)
                } else {
                    mock(k, opt, n)
                };
                let (before_sat, before_unsat) = (st.k_sat(), st.k_unsat());
                st.record(out).unwrap();
                assert!(st.k_sat() >= before_sat && st.k_unsat() <= before_unsat);
                assert!(st.k_sat() < st.k_unsat());
                for r in &mut running {
                    if st.should_cancel(r.0) {
                        r.1 = true;
                    }
                }
            }
            let timed_out = st.outcomes().iter().any(|o| o.status == Status::Timeout);
            if !timed_out {
                let expect = if opt >= lb || lb <= 2 { Some(opt) } else { None };
                assert_eq!(st.k_opt(), expect, "n={n} lb={lb} ub={ub} opt={opt}");
                if expect.is_some() {
                    assert!(st.certified(true));
                }
            } else if let Some(k) = st.k_opt() {
                assert!(k <= opt);
            }
        }
    }

    /// Threads with random delays drive the real driver.
    #[test]
    fn threaded_mock_driver() {
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 60;
            let opt = rng.random_range(2..=30);
            let order = [Order::Linear, Order::Bfs, Order::Dfs][seed as usize % 3];
            let st = SearchState::new(n, BoundRange { lb: 2, ub: 30 }, order, true).unwrap();
            let delays: Vec<u64> = (0..=31).map(|_| rng.random_range(0..3)).collect();
            let st = drive_parallel(st, 1 + seed as usize % 4, None, |k, stop| {
                for _ in 0..delays[k] {
                    if stop.load(Ordering::Relaxed) {
                        return Ok(SolveOutcome::without_model(k, Status::Cancelled));
                    }
                    std::thread::sleep(Duration::from_millis(1));
                }
                Ok(mock(k, opt, n))
            })
            .unwrap();
            assert_eq!(st.k_opt(), Some(opt));
            assert!(st.certified(true));
        }
    }

    #[test]
    fn single_process_linear_is_ascending_scan() {
        let st = SearchState::new(20, BoundRange { lb: 2, ub: 8 }, Order::Linear, false).unwrap();
        let visited = Mutex::new(Vec::new());
        let st = drive_parallel(st, 1, None, |k, _| {
            visited.lock().unwrap().push(k);
            Ok(mock(k, 5, 20))
        })
        .unwrap();
        assert_eq!(*visited.lock().unwrap(), [3, 4, 5, 6]);
        assert_eq!(st.k_opt(), Some(5));
    }

    #[test]
    fn contradictions_are_errors() {
        let mut st = SearchState::new(20, BoundRange { lb: 2, ub: 8 }, Order::Linear, true).unwrap();
        st.record(mock(5, 5, 20)).unwrap();
        assert!(st.record(SolveOutcome::without_model(4, Status::Unsat)).is_err());
        st.record(SolveOutcome::without_model(7, Status::Unsat)).unwrap();
        assert!(st.record(mock(7, 9, 20)).is_err());
        assert!(st.record(SolveOutcome::without_model(6, Status::Sat)).is_err());
        // errors from a worker stop the driver
        let st = SearchState::new(20, BoundRange { lb: 2, ub: 8 }, Order::Bfs, true).unwrap();
        let r = drive_parallel(st, 3, None, |k, _| {
            if k == 5 {
                Err(Error::Backend("boom".into()))
            } else {
                Ok(mock(k, 4, 20))
            }
        });
        assert!(matches!(r, Err(Error::Backend(_))));
        assert!(SearchState::new(20, BoundRange { lb: 2, ub: 11 }, Order::Linear, true).is_err());
    }

    #[test]
    fn cancellation_keeps_labeling() {
        let mut st = SearchState::new(20, BoundRange { lb: 2, ub: 8 }, Order::Linear, true).unwrap();
        st.record(mock(6, 6, 20)).unwrap();
        st.record(SolveOutcome::without_model(4, Status::Cancelled)).unwrap();
        st.record(SolveOutcome::without_model(4, Status::Cancelled)).unwrap();
        st.record(mock(3, 6, 20)).unwrap();
        assert_eq!(st.k_opt(), Some(6));
        assert!(st.labeling().is_some());
    }

    #[test]
    fn verify_reports() {
        let g = cycle(6).unwrap();
        let r = solve(&g, &opts(Some((1, 3)))).unwrap();
        let rep = verify_result(&g, &r, true).unwrap();
        assert_eq!(rep.oracle_cab, Some(2));
        assert_eq!(rep.message, "optimal value 2, certified");

        let mut bad = r.clone();
        bad.labeling = Some(vec![1, 2, 3, 4, 5, 6]);
        assert!(matches!(verify_result(&g, &bad, false), Err(Error::Integrity(_))));
        let mut bad = r.clone();
        bad.k_opt = Some(3);
        bad.k_unsat = 4;
        assert!(verify_result(&g, &bad, true).is_err());
        let mut bad = r.clone();
        bad.labeling = Some(vec![1, 1, 3, 4, 5, 6]);
        assert!(verify_result(&g, &bad, false).is_err());

        let gap = SearchResult {
            certified: false,
            k_opt: Some(2),
            k_unsat: 4,
            per_k: r.per_k.iter().filter(|p| p.status == Status::Sat).cloned().collect(),
            ..r.clone()
        };
        assert_eq!(verify_result(&g, &gap, false).unwrap().message, "bounds [2, 3], not certified");
    }

    #[test]
    fn json_round_trip() {
        let g = cycle(7).unwrap();
        let r = solve_named("cycle:7", &g, &opts(None)).unwrap();
        let text = r.to_json();
        for field in ["instance", "n", "m", "lb", "ub", "k_opt", "certified", "labeling", "per_k", "wall_seconds", "processes", "order"] {
            assert!(text.contains(&format!("\"{field}\"")), "{field}");
        }
        assert!(text.contains("\"status\": \"UNSAT\"") || text.contains("\"status\": \"SAT\""));
        assert_eq!(SearchResult::from_json(&text).unwrap(), r);
    }

    #[test]
    fn locators() {
        assert_eq!(backend_from_locator(None).unwrap().name(), "cadical");
        assert_eq!(backend_from_locator(Some("cadical")).unwrap().name(), "cadical");
        assert_eq!(backend_from_locator(Some("/bin/kissat -q")).unwrap().name(), "/bin/kissat");
    }

    #[test]
    fn external_backend_protocol_errors() {
        let f = {
            let mut f = CnfFormula::new();
            f.add_clause(&[crate::cnf::Lit::pos(1)]);
            f
        };
        let stop = AtomicBool::new(false);
        let missing = ExternalBackend::new("/nonexistent/solver", vec![]);
        assert!(matches!(missing.solve(&f, None, &stop), Err(Error::Backend(_))));
        // `true` prints nothing
        let silent = ExternalBackend::new("true", vec![]);
        assert!(matches!(silent.solve(&f, None, &stop), Err(Error::Backend(_))));
        let slow = ExternalBackend::new("sh", vec!["-c".into(), "sleep 5".into()]);
        let t = Instant::now();
        let a = slow.solve(&f, Some(Instant::now() + Duration::from_millis(50)), &stop).unwrap();
        assert_eq!(a, Answer::Timeout);
        assert!(t.elapsed() < Duration::from_secs(2));
    }
}
