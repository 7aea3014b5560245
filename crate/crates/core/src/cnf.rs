//! Clause database, variable allocation, DIMACS I/O and the small AMO / EO
//! building blocks.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::ops::Not;

use crate::error::{Error, Result};

/// A variable id, `1..=num_vars`.
pub type Var = u32;

/// A signed literal in DIMACS convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn pos(v: Var) -> Self {
        debug_assert!(v > 0 && v <= i32::MAX as u32);
        Lit(v as i32)
    }

    pub fn neg(v: Var) -> Self {
        debug_assert!(v > 0 && v <= i32::MAX as u32);
        Lit(-(v as i32))
    }

    pub fn from_dimacs(x: i32) -> Option<Self> {
        (x != 0 && x != i32::MIN).then_some(Lit(x))
    }

    pub fn var(self) -> Var {
        self.0.unsigned_abs()
    }

    pub fn is_pos(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Value of the literal under `assignment`, indexed by variable id
    /// (index 0 unused).
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var() as usize] == self.is_pos()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A growable CNF formula.
///
/// Clauses are stored flat. Duplicate literals are merged and tautologies are
/// dropped on insertion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    lits: Vec<Lit>,
    ends: Vec<usize>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.ends.len()
    }

    pub fn num_literals(&self) -> usize {
        self.lits.len()
    }

    /// Raises `num_vars` to at least `n`, e.g. to account for allocated but
    /// unused variables.
    pub fn ensure_vars(&mut self, n: u32) {
        self.num_vars = self.num_vars.max(n);
    }

    /// Adds a clause. Returns `false` if it was a tautology and dropped.
    ///
    /// # Panics
    /// On an empty clause.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        assert!(!clause.is_empty(), "empty clause");
        let start = self.lits.len();
        for &l in clause {
            if self.lits[start..].contains(&!l) {
                self.lits.truncate(start);
                return false;
            }
            if !self.lits[start..].contains(&l) {
                self.lits.push(l);
            }
        }
        for &l in &self.lits[start..] {
            self.num_vars = self.num_vars.max(l.var());
        }
        self.ends.push(self.lits.len());
        true
    }

    pub fn clause(&self, i: usize) -> &[Lit] {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        &self.lits[start..self.ends[i]]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[Lit]> + '_ {
        (0..self.ends.len()).map(move |i| self.clause(i))
    }

    /// Appends all clauses of `other`.
    pub fn extend_from(&mut self, other: &CnfFormula) {
        for c in other.clauses() {
            self.add_clause(c);
        }
        self.ensure_vars(other.num_vars);
    }

    /// Whether `assignment` (indexed by variable id, index 0 unused) satisfies
    /// every clause.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Rough in-memory footprint in bytes, used for memory budgeting.
    pub fn footprint_bytes(&self) -> usize {
        self.lits.len() * std::mem::size_of::<Lit>() + self.ends.len() * std::mem::size_of::<usize>()
    }

    pub fn write_dimacs<W: Write>(&self, mut sink: W) -> io::Result<()> {
        writeln!(sink, "p cnf {} {}", self.num_vars, self.num_clauses())?;
        let mut line = String::new();
        for c in self.clauses() {
            line.clear();
            for l in c {
                let _ = write!(line, "{} ", l.0);
            }
            line.push_str("0\n");
            sink.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut out = Vec::new();
        self.write_dimacs(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("DIMACS output is ASCII")
    }
}

/// Parses DIMACS CNF. Comment lines (`c ...`) are skipped; clauses may span
/// lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(u32, usize)> = None;
    let mut f = CnfFormula::new();
    let mut current = Vec::new();
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || tok.len() != 4 || tok[1] != "cnf" {
                return Err(Error::parse(lineno, "bad `p cnf` header"));
            }
            let v = tok[2].parse().map_err(|_| Error::parse(lineno, "bad variable count"))?;
            let c = tok[3].parse().map_err(|_| Error::parse(lineno, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(Error::parse(lineno, "clause before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad literal `{tok}`")))?;
            if x == 0 {
                if current.is_empty() {
                    return Err(Error::parse(lineno, "empty clause"));
                }
                f.add_clause(&current);
                current.clear();
            } else {
                let l = Lit::from_dimacs(x)
                    .filter(|l| l.var() <= num_vars)
                    .ok_or_else(|| Error::parse(lineno, format!("literal {x} out of range")))?;
                current.push(l);
            }
        }
    }
    let Some((num_vars, num_clauses)) = header else {
        return Err(Error::parse(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(last_line, "unterminated clause"));
    }
    f.ensure_vars(num_vars);
    // tautologies were dropped, so fewer is fine
    if f.num_clauses() > num_clauses {
        return Err(Error::parse(
            last_line,
            format!("header announces {num_clauses} clauses, found {}", f.num_clauses()),
        ));
    }
    Ok(f)
}

/// Result of parsing a solver's `s`/`v` output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverOutput {
    /// Total assignment indexed by variable id (index 0 unused).
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

/// Parses SAT-competition style solver output. Variables missing from the `v`
/// lines default to false.
pub fn read_model(output: &str, num_vars: u32) -> Result<SolverOutput> {
    let mut status = None;
    let mut values = vec![false; num_vars as usize + 1];
    let mut terminated = false;
    for line in output.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => 10,
                "UNSATISFIABLE" => 20,
                "UNKNOWN" => 0,
                other => return Err(Error::Backend(format!("unknown status line `s {other}`"))),
            });
        } else if let Some(rest) = line.strip_prefix("v ").or(if line == "v" { Some("") } else { None }) {
            for tok in rest.split_whitespace() {
                let x: i32 = tok
                    .parse()
                    .map_err(|_| Error::Backend(format!("garbled value `{tok}`")))?;
                if x == 0 {
                    terminated = true;
                    continue;
                }
                let l = Lit::from_dimacs(x).ok_or_else(|| Error::Backend(format!("bad literal {x}")))?;
                if l.var() > num_vars {
                    return Err(Error::Backend(format!("value for unknown variable {}", l.var())));
                }
                values[l.var() as usize] = l.is_pos();
            }
        }
    }
    match status {
        Some(10) if terminated => Ok(SolverOutput::Sat(values)),
        Some(10) => Err(Error::Backend("model truncated: no terminating `v ... 0`".into())),
        Some(20) => Ok(SolverOutput::Unsat),
        Some(_) => Ok(SolverOutput::Unknown),
        None => Err(Error::Backend("solver output has no `s` line".into())),
    }
}

/// Semantic name of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKey {
    /// Vertex `vertex` (0-based) gets label `label` (1-based).
    X { vertex: usize, label: usize },
    /// Register `pos` of block `block` in the ladder owned by `owner`.
    Register { owner: usize, block: usize, pos: usize },
}

/// Hands out fresh variable ids, optionally under a semantic key.
#[derive(Clone, Debug)]
pub struct VarAllocator {
    next: u32,
    named: HashMap<VarKey, Var>,
}

impl Default for VarAllocator {
    fn default() -> Self {
        VarAllocator {
            next: 1,
            named: HashMap::new(),
        }
    }
}

impl VarAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts allocation after an already reserved range `1..=reserved`.
    pub fn with_reserved(reserved: u32) -> Self {
        VarAllocator {
            next: reserved + 1,
            named: HashMap::new(),
        }
    }

    pub fn fresh(&mut self) -> Var {
        let v = self.next;
        self.next = self.next.checked_add(1).expect("variable ids exhausted");
        v
    }

    /// Returns the variable for `key`, allocating it on first use.
    pub fn named(&mut self, key: VarKey) -> Var {
        if let Some(&v) = self.named.get(&key) {
            return v;
        }
        let v = self.fresh();
        self.named.insert(key, v);
        v
    }

    /// Binds `key` to an existing variable. Fails if the key is taken.
    pub fn bind(&mut self, key: VarKey, v: Var) -> Result<()> {
        match self.named.insert(key, v) {
            Some(old) if old != v => Err(Error::integrity(format!("{key:?} already bound to {old}"))),
            _ => Ok(()),
        }
    }

    pub fn lookup(&self, key: VarKey) -> Option<Var> {
        self.named.get(&key).copied()
    }

    /// Highest id handed out so far.
    pub fn num_vars(&self) -> u32 {
        self.next - 1
    }
}

/// `C(|vars|, 2)` binary clauses. No-op for fewer than two variables.
pub fn amo_pairwise(f: &mut CnfFormula, vars: &[Lit]) {
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            f.add_clause(&[!a, !b]);
        }
    }
}

/// Sequential counter AMO with `|vars| - 1` auxiliaries and `3|vars| - 4`
/// clauses. No-op for fewer than two variables.
pub fn amo_seq(f: &mut CnfFormula, alloc: &mut VarAllocator, vars: &[Lit]) {
    let w = vars.len();
    if w < 2 {
        return;
    }
    let s: Vec<Lit> = (0..w - 1).map(|_| Lit::pos(alloc.fresh())).collect();
    f.add_clause(&[!vars[0], s[0]]);
    for i in 1..w - 1 {
        f.add_clause(&[!vars[i], s[i]]);
        f.add_clause(&[!s[i - 1], s[i]]);
        f.add_clause(&[!vars[i], !s[i - 1]]);
    }
    f.add_clause(&[!vars[w - 1], !s[w - 2]]);
}

pub fn at_least_one(f: &mut CnfFormula, vars: &[Lit]) -> Result<()> {
    if vars.is_empty() {
        return Err(Error::input("at-least-one over no variables"));
    }
    f.add_clause(vars);
    Ok(())
}

fn ceil_sqrt(n: usize) -> usize {
    let mut p = (n as f64).sqrt() as usize;
    while p * p < n {
        p += 1;
    }
    while p > 0 && (p - 1) * (p - 1) >= n {
        p -= 1;
    }
    p
}

/// Exactly-one via the product encoding: inputs sit on a `p x q` grid with
/// `p = ceil(sqrt(N))`, `q = ceil(N / p)`; each input implies its row and
/// column indicator, rows and columns are each at-most-one (sequential
/// counter), and one clause over the inputs gives at-least-one.
pub fn exactly_one_product(f: &mut CnfFormula, alloc: &mut VarAllocator, vars: &[Lit]) -> Result<()> {
    let n = vars.len();
    if n == 0 {
        return Err(Error::input("exactly-one over no variables"));
    }
    if n == 1 {
        f.add_clause(&[vars[0]]);
        return Ok(());
    }
    let (p, q) = product_grid(n);
    let rows: Vec<Lit> = (0..p).map(|_| Lit::pos(alloc.fresh())).collect();
    let cols: Vec<Lit> = (0..q).map(|_| Lit::pos(alloc.fresh())).collect();
    for (i, &x) in vars.iter().enumerate() {
        f.add_clause(&[!x, rows[i / q]]);
        f.add_clause(&[!x, cols[i % q]]);
    }
    amo_seq(f, alloc, &rows);
    amo_seq(f, alloc, &cols);
    f.add_clause(vars);
    Ok(())
}

/// Grid shape `(p, q)` used by [`exactly_one_product`].
pub fn product_grid(n: usize) -> (usize, usize) {
    let p = ceil_sqrt(n).max(1);
    (p, n.div_ceil(p))
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn inputs(alloc: &mut VarAllocator, n: usize) -> Vec<Lit> {
        (0..n).map(|_| Lit::pos(alloc.fresh())).collect()
    }

    /// Exhaustively compares extendability with the predicate over all input
    /// assignments, also by brute force over auxiliaries.
    fn check_projection(f: &CnfFormula, xs: &[Lit], pred: impl Fn(usize) -> bool) {
        let n = xs.len();
        let total = f.num_vars() as usize;
        for mask in 0..1usize << n {
            let expect = pred(mask.count_ones() as usize);
            assert_eq!(extendable(f, xs, &bits(mask, n)), expect, "mask {mask:b}");
            let aux = total - n;
            let brute = (0..1usize << aux).any(|a| {
                let mut asg = vec![false; total + 1];
                for (i, b) in bits(mask, n).into_iter().enumerate() {
                    asg[xs[i].var() as usize] = b;
                }
                for (j, b) in bits(a, aux).into_iter().enumerate() {
                    asg[n + 1 + j] = b;
                }
                f.is_satisfied_by(&asg)
            });
            assert_eq!(brute, expect, "brute mask {mask:b}");
        }
    }

    #[test]
    fn pairwise_counts() {
        for (n, c) in [(0, 0), (1, 0), (3, 3), (5, 10), (8, 28)] {
            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, n);
            let mut f = CnfFormula::new();
            amo_pairwise(&mut f, &xs);
            assert_eq!(f.num_clauses(), c);
        }
    }

    #[test]
    fn seq_counts() {
        for w in 2..10 {
            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, w);
            let mut f = CnfFormula::new();
            amo_seq(&mut f, &mut a, &xs);
            assert_eq!(a.num_vars() as usize, 2 * w - 1);
            assert_eq!(f.num_clauses(), 3 * w - 4);
        }
    }

    #[test]
    fn amo_projection() {
        for n in 0..=6 {
            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, n);
            let mut f = CnfFormula::new();
            amo_pairwise(&mut f, &xs);
            f.ensure_vars(a.num_vars());
            check_projection(&f, &xs, |c| c <= 1);

            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, n);
            let mut f = CnfFormula::new();
            amo_seq(&mut f, &mut a, &xs);
            f.ensure_vars(a.num_vars());
            check_projection(&f, &xs, |c| c <= 1);
        }
    }

    #[test]
    fn seq_examples() {
        let mut a = VarAllocator::new();
        let xs = inputs(&mut a, 4);
        let mut f = CnfFormula::new();
        amo_seq(&mut f, &mut a, &xs);
        assert!(extendable(&f, &xs, &[true, false, false, false]));
        assert!(!extendable(&f, &xs, &[true, true, false, false]));
        assert!(extendable(&f, &xs, &[false; 4]));
    }

    #[test]
    fn product_projection() {
        for n in 1..=6 {
            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, n);
            let mut f = CnfFormula::new();
            exactly_one_product(&mut f, &mut a, &xs).unwrap();
            f.ensure_vars(a.num_vars());
            check_projection(&f, &xs, |c| c == 1);
        }
        // larger sizes via the solver only
        for n in [7, 9, 10, 13] {
            let mut a = VarAllocator::new();
            let xs = inputs(&mut a, n);
            let mut f = CnfFormula::new();
            exactly_one_product(&mut f, &mut a, &xs).unwrap();
            for mask in 0..1usize << n {
                let ones = mask.count_ones() == 1;
                assert_eq!(extendable(&f, &xs, &bits(mask, n)), ones);
            }
        }
    }

    #[test]
    fn product_shapes() {
        assert_eq!(product_grid(9), (3, 3));
        assert_eq!(product_grid(10), (4, 3));
        assert_eq!(product_grid(2), (2, 1));
        assert_eq!(product_grid(100), (10, 10));

        let mut a = VarAllocator::new();
        let xs = inputs(&mut a, 9);
        let mut f = CnfFormula::new();
        exactly_one_product(&mut f, &mut a, &xs).unwrap();
        // 6 indicators plus 2 + 2 counter auxiliaries
        assert_eq!(a.num_vars(), 9 + 6 + 4);

        let mut a = VarAllocator::new();
        let xs = inputs(&mut a, 1);
        let mut f = CnfFormula::new();
        exactly_one_product(&mut f, &mut a, &xs).unwrap();
        assert_eq!(f.clause(0), &[xs[0]]);
        assert!(exactly_one_product(&mut f, &mut a, &[]).is_err());
    }

    #[test]
    fn tautologies_and_duplicates() {
        let mut f = CnfFormula::new();
        assert!(!f.add_clause(&[Lit::pos(1), Lit::neg(2), Lit::neg(1)]));
        assert_eq!(f.num_clauses(), 0);
        assert!(f.add_clause(&[Lit::pos(3), Lit::pos(3), Lit::neg(2)]));
        assert_eq!(f.clause(0), &[Lit::pos(3), Lit::neg(2)]);
        assert_eq!(f.num_vars(), 3);
    }

    #[test]
    fn dimacs_output() {
        let mut f = CnfFormula::new();
        f.add_clause(&[Lit::pos(1), Lit::neg(2)]);
        assert_eq!(f.to_dimacs_string(), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn dimacs_parse_errors() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 x 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 0\n2 0\n").is_err());
        let f = parse_dimacs("c hi\np cnf 3 2\n1 -2\n 3 0 -1 0\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
        assert_eq!(f.num_vars(), 3);
    }

    #[test]
    fn model_reader() {
        assert_eq!(read_model("s UNSATISFIABLE\n", 3).unwrap(), SolverOutput::Unsat);
        assert_eq!(
            read_model("c x\ns SATISFIABLE\nv 1 -2 0\n", 2).unwrap(),
            SolverOutput::Sat(vec![false, true, false])
        );
        assert_eq!(
            read_model("s SATISFIABLE\nv 1\nv -2 3\nv 0\n", 3).unwrap(),
            SolverOutput::Sat(vec![false, true, false, true])
        );
        assert_eq!(read_model("s UNKNOWN\n", 3).unwrap(), SolverOutput::Unknown);
        assert!(read_model("", 3).is_err());
        assert!(read_model("s SATISFIABLE\nv 1 -2\n", 2).is_err());
        assert!(read_model("s SATISFIABLE\nv 1 q 0\n", 2).is_err());
        assert!(read_model("s SATISFIABLE\nv 9 0\n", 2).is_err());
        assert!(read_model("s MAYBE\n", 2).is_err());
    }

    #[test]
    fn allocator_keys() {
        let mut a = VarAllocator::with_reserved(4);
        let k = VarKey::Register { owner: 0, block: 1, pos: 2 };
        let v = a.named(k);
        assert_eq!(v, 5);
        assert_eq!(a.named(k), 5);
        assert_eq!(a.fresh(), 6);
        assert!(a.bind(k, 6).is_err());
        a.bind(VarKey::X { vertex: 0, label: 1 }, 1).unwrap();
        assert_eq!(a.lookup(VarKey::X { vertex: 0, label: 1 }), Some(1));
    }

    fn clause_strategy() -> impl Strategy<Value = Vec<Vec<i32>>> {
        let lit = (1i32..=12, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        prop::collection::vec(prop::collection::vec(lit, 1..6), 0..30)
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(raw in clause_strategy()) {
            let mut f = CnfFormula::new();
            for c in &raw {
                let c: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect();
                f.add_clause(&c);
            }
            let g = parse_dimacs(&f.to_dimacs_string()).unwrap();
            let mut a: Vec<Vec<Lit>> = f.clauses().map(<[Lit]>::to_vec).collect();
            let mut b: Vec<Vec<Lit>> = g.clauses().map(<[Lit]>::to_vec).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert_eq!(f.num_vars(), g.num_vars());
        }

        #[test]
        fn builders_do_not_collide(sizes in prop::collection::vec(1usize..8, 1..5)) {
            let mut a = VarAllocator::new();
            let mut f = CnfFormula::new();
            let mut seen = std::collections::HashSet::new();
            for n in sizes {
                let before = a.num_vars();
                let xs = inputs(&mut a, n);
                exactly_one_product(&mut f, &mut a, &xs).unwrap();
                for v in before + 1..=a.num_vars() {
                    prop_assert!(seen.insert(v));
                }
            }
        }
    }
}
