//! The per-`k` decision instance: is there a labeling whose cyclic
//! antibandwidth is at least `k`?
//!
//! Variables `x(v, l)` say vertex `v` gets label `l`. For an edge `{i, j}` the
//! requirement is that no window of `k` cyclically consecutive labels holds
//! both `f(i)` and `f(j)`. Each vertex gets one cyclic ladder of width `k` over
//! its label variables, and per edge and window start `l` the two "window is
//! empty" conditions are joined by at most four binary clauses.

use std::io::{self, Write};

use crate::cnf::{amo_seq, at_least_one, exactly_one_product, product_grid, CnfFormula, Lit, Var, VarAllocator};
use crate::error::{Error, Result};
use crate::graph::{cab_of_labeling, Graph, Labeling};
use crate::ladder::{exact_size, LadderEncoding, LadderSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelOptions {
    /// Forbid labels above `ceil(n/2)` for the lowest-index vertex of maximum
    /// degree.
    pub symmetry: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { symmetry: true }
    }
}

/// Id of `x(v, l)`: `v * n + l`, so the `x` variables occupy `1..=n^2`.
pub fn x_var(n: usize, v: usize, l: usize) -> Var {
    debug_assert!(v < n && (1..=n).contains(&l));
    (v * n + l) as Var
}

#[derive(Debug)]
pub struct DecisionInstance {
    pub n: usize,
    pub k: usize,
    pub formula: CnfFormula,
    /// Per-vertex ladder, `None` for isolated vertices.
    pub ladders: Vec<Option<LadderEncoding>>,
    pub symmetry_vertex: Option<usize>,
    /// `k <= 1`: every labeling qualifies and no formula is built.
    pub trivial: bool,
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if g.num_edges() == 0 {
        return Err(Error::UndefinedObjective("cyclic antibandwidth of an edgeless graph".into()));
    }
    if k > g.n() / 2 {
        return Err(Error::input(format!("k={k} exceeds floor(n/2)={}", g.n() / 2)));
    }
    Ok(())
}

/// Builds the CNF that is satisfiable iff some labeling of `g` has cyclic
/// antibandwidth at least `k`.
pub fn build(g: &Graph, k: usize, opts: ModelOptions) -> Result<DecisionInstance> {
    check_k(g, k)?;
    let n = g.n();
    if k <= 1 {
        return Ok(DecisionInstance {
            n,
            k,
            formula: CnfFormula::new(),
            ladders: vec![None; n],
            symmetry_vertex: None,
            trivial: true,
        });
    }
    let mut f = CnfFormula::new();
    let nn = u32::try_from(n * n).map_err(|_| Error::input("graph too large"))?;
    let mut alloc = VarAllocator::with_reserved(nn);
    f.ensure_vars(nn);
    let x = |v: usize, l: usize| Lit::pos(x_var(n, v, l));

    let mut ladders = Vec::with_capacity(n);
    for v in 0..n {
        if g.degree(v) == 0 {
            ladders.push(None);
            continue;
        }
        let spec = LadderSpec::new((1..=n).map(|l| x(v, l)).collect(), k)?;
        ladders.push(Some(LadderEncoding::encode(&spec, v, &mut f, &mut alloc)?));
    }

    for &(i, j) in g.edges() {
        let (li, lj) = (ladder(&ladders, i)?, ladder(&ladders, j)?);
        for l in 1..=n {
            let (si, sj) = (li.window_zero_literals(l)?, lj.window_zero_literals(l)?);
            for &a in si.as_slice() {
                for &b in sj.as_slice() {
                    f.add_clause(&[!a, !b]);
                }
            }
        }
    }

    // each label is used by exactly one vertex
    for l in 1..=n {
        let col: Vec<Lit> = (0..n).map(|v| x(v, l)).collect();
        exactly_one_product(&mut f, &mut alloc, &col)?;
    }

    // each vertex gets exactly one label
    for (v, ladder) in ladders.iter().enumerate() {
        let parts = match ladder {
            Some(lad) => lad.partition_registers()?,
            None => (1..=n).map(|l| x(v, l)).collect(),
        };
        at_least_one(&mut f, &parts)?;
        amo_seq(&mut f, &mut alloc, &parts);
    }

    let symmetry_vertex = if opts.symmetry {
        symmetry_clauses(g, &mut f)
    } else {
        None
    };
    f.ensure_vars(alloc.num_vars());
    Ok(DecisionInstance {
        n,
        k,
        formula: f,
        ladders,
        symmetry_vertex,
        trivial: false,
    })
}

fn ladder(ladders: &[Option<LadderEncoding>], v: usize) -> Result<&LadderEncoding> {
    ladders[v]
        .as_ref()
        .ok_or_else(|| Error::integrity(format!("vertex {v} has an edge but no ladder")))
}

/// Unit clauses `!x(v*, l)` for `l > ceil(n/2)`, where `v*` is the
/// lowest-index vertex of maximum degree. Returns `v*`.
pub fn symmetry_clauses(g: &Graph, f: &mut CnfFormula) -> Option<usize> {
    let n = g.n();
    let v = g.max_degree_vertex()?;
    for l in n.div_ceil(2) + 1..=n {
        f.add_clause(&[Lit::neg(x_var(n, v, l))]);
    }
    Some(v)
}

impl DecisionInstance {
    pub fn num_vars(&self) -> u32 {
        self.formula.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.formula.num_clauses()
    }

    /// Extracts the labeling from a model given as a per-variable lookup and
    /// checks it reaches `k`. A failure here is an encoder bug.
    pub fn decode(&self, g: &Graph, value: impl Fn(Var) -> bool) -> Result<Labeling> {
        if self.trivial {
            return Ok(Labeling::identity(self.n));
        }
        let n = self.n;
        let mut labels = Vec::with_capacity(n);
        for v in 0..n {
            let mut chosen = (1..=n).filter(|&l| value(x_var(n, v, l)));
            let l = chosen
                .next()
                .ok_or_else(|| Error::integrity(format!("vertex {v} has no label in the model")))?;
            if chosen.next().is_some() {
                return Err(Error::integrity(format!("vertex {v} has several labels in the model")));
            }
            labels.push(l);
        }
        let f = Labeling::new(labels).map_err(|e| Error::integrity(format!("decoded labeling: {e}")))?;
        let cab = cab_of_labeling(g, &f)?;
        if cab < self.k {
            return Err(Error::integrity(format!("decoded labeling has value {cab} < k={}", self.k)));
        }
        Ok(f)
    }

    /// `c x <vertex> <label> <var>` lines (1-based vertex and label).
    pub fn write_var_map<W: Write>(&self, mut sink: W) -> io::Result<()> {
        for v in 0..self.n {
            for l in 1..=self.n {
                writeln!(sink, "c x {} {} {}", v + 1, l, x_var(self.n, v, l))?;
            }
        }
        Ok(())
    }

    /// DIMACS with the variable map as leading comment lines.
    pub fn write_dimacs<W: Write>(&self, mut sink: W) -> io::Result<()> {
        writeln!(sink, "c cyclic antibandwidth decision instance n={} k={}", self.n, self.k)?;
        self.write_var_map(&mut sink)?;
        self.formula.write_dimacs(sink)
    }
}

/// Reads `c x v l var` lines back into a `(vertex, label) -> var` table
/// (0-based vertex, 1-based label).
pub fn parse_var_map(text: &str) -> Result<Vec<(usize, usize, Var)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix("c x ") else {
            continue;
        };
        let nums: Vec<usize> = rest
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(i + 1, "bad variable map line"))?;
        let [v, l, var] = nums[..] else {
            return Err(Error::parse(i + 1, "variable map line needs `c x v l var`"));
        };
        if v == 0 || l == 0 || var == 0 {
            return Err(Error::parse(i + 1, "variable map entries are 1-based"));
        }
        out.push((v - 1, l, var as Var));
    }
    Ok(out)
}

/// Predicted `(vars, clauses)` of [`build`] without building it.
pub fn estimate_size(g: &Graph, k: usize, opts: ModelOptions) -> Result<(u64, u64)> {
    check_k(g, k)?;
    if k <= 1 {
        return Ok((0, 0));
    }
    let n = g.n();
    let seq = |w: usize| -> (u64, u64) {
        if w < 2 {
            (0, 0)
        } else {
            ((w - 1) as u64, (3 * w - 4) as u64)
        }
    };
    let (lad_aux, lad_cl) = exact_size(n, k)?;
    let mut vars = (n * n) as u64;
    let mut clauses = 0u64;
    let active = (0..n).filter(|&v| g.degree(v) > 0).count() as u64;
    let isolated = n as u64 - active;
    vars += active * lad_aux as u64;
    clauses += active * lad_cl as u64;

    let aligned = n.div_ceil(k) as u64;
    clauses += g.num_edges() as u64 * (aligned + 4 * (n as u64 - aligned));

    let (p, q) = product_grid(n);
    let (rp, rq) = (seq(p), seq(q));
    vars += n as u64 * (p + q) as u64 + n as u64 * (rp.0 + rq.0);
    clauses += n as u64 * (2 * n as u64 + rp.1 + rq.1 + 1);

    let parts = seq(aligned as usize);
    vars += active * parts.0;
    clauses += active * (1 + parts.1);
    let iso = seq(n);
    vars += isolated * iso.0;
    clauses += isolated * (1 + iso.1);

    if opts.symmetry {
        clauses += (n / 2) as u64;
    }
    Ok((vars, clauses))
}
