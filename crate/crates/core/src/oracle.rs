//! Brute-force exact cyclic antibandwidth for small graphs, the ground truth
//! the encoder and search are tested against.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::graph::{cab_of_labeling, from_spec, Graph, Labeling};

/// Largest vertex count the oracle accepts.
pub const ORACLE_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub cab: usize,
    pub witness: Labeling,
    pub labelings_examined: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Restrict vertex 0 to labels `1..=ceil(n/2)`. Sound because reversing a
    /// labeling (`l -> n + 1 - l`) preserves every cyclic distance.
    pub reversal_pruning: bool,
    /// Worker threads; the label range of vertex 0 is split among them.
    pub threads: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            reversal_pruning: true,
            threads: 1,
        }
    }
}

pub fn brute_force_cab(g: &Graph) -> Result<OracleResult> {
    brute_force_cab_with(g, OracleOptions::default())
}

pub fn brute_force_cab_with(g: &Graph, opts: OracleOptions) -> Result<OracleResult> {
    let n = g.n();
    if n > ORACLE_CAP {
        return Err(Error::OracleCap { n, cap: ORACLE_CAP });
    }
    if g.num_edges() == 0 {
        return Err(Error::UndefinedObjective("cyclic antibandwidth of an edgeless graph".into()));
    }
    let first_labels: Vec<usize> = if opts.reversal_pruning {
        (1..=n.div_ceil(2)).collect()
    } else {
        (1..=n).collect()
    };
    let threads = opts.threads.clamp(1, first_labels.len());
    let chunks: Vec<&[usize]> = first_labels.chunks(first_labels.len().div_ceil(threads)).collect();
    let partials: Vec<Partial> = if chunks.len() == 1 {
        vec![search_partition(g, chunks[0])]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunks.iter().map(|c| s.spawn(|| search_partition(g, c))).collect();
            handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect()
        })
    };
    // chunks are in ascending label order; keep the first strict maximum so
    // the witness does not depend on the thread count
    let mut examined = 0;
    let mut best: Option<(usize, Vec<usize>)> = None;
    for p in partials {
        examined += p.examined;
        if let Some((cab, labels)) = p.best {
            if best.as_ref().is_none_or(|(b, _)| cab > *b) {
                best = Some((cab, labels));
            }
        }
    }
    let (cab, labels) = best.ok_or_else(|| Error::integrity("oracle found no labeling"))?;
    let witness = Labeling::new(labels)?;
    debug_assert_eq!(cab_of_labeling(g, &witness)?, cab);
    Ok(OracleResult {
        cab,
        witness,
        labelings_examined: examined,
    })
}

struct Partial {
    best: Option<(usize, Vec<usize>)>,
    examined: u64,
}

struct Dfs<'a> {
    g: &'a Graph,
    n: usize,
    labels: Vec<usize>,
    used: Vec<bool>,
    best: Option<(usize, Vec<usize>)>,
    examined: u64,
}

impl Dfs<'_> {
    fn run(&mut self, v: usize, current: usize) {
        if v == self.n {
            self.examined += 1;
            if self.best.as_ref().is_none_or(|(b, _)| current > *b) {
                self.best = Some((current, self.labels.clone()));
            }
            return;
        }
        for l in 1..=self.n {
            if self.used[l] {
                continue;
            }
            let m = self.edge_min(v, l, current);
            self.place(v, l);
            self.run(v + 1, m);
            self.unplace(v, l);
        }
    }

    /// Running minimum after giving `v` label `l`, over edges to vertices
    /// already labeled.
    fn edge_min(&self, v: usize, l: usize, current: usize) -> usize {
        let mut m = current;
        for &u in self.g.neighbors(v) {
            if u < v {
                let d = l.abs_diff(self.labels[u]);
                m = m.min(d.min(self.n - d));
            }
        }
        m
    }

    fn place(&mut self, v: usize, l: usize) {
        self.labels[v] = l;
        self.used[l] = true;
    }

    fn unplace(&mut self, v: usize, l: usize) {
        self.labels[v] = 0;
        self.used[l] = false;
    }
}

fn search_partition(g: &Graph, first: &[usize]) -> Partial {
    let n = g.n();
    let mut dfs = Dfs {
        g,
        n,
        labels: vec![0; n],
        used: vec![false; n + 1],
        best: None,
        examined: 0,
    };
    for &l in first {
        dfs.place(0, l);
        dfs.run(1, usize::MAX);
        dfs.unplace(0, l);
    }
    Partial {
        best: dfs.best,
        examined: dfs.examined,
    }
}

/// All connected simple graphs on `n` labeled vertices (every edge subset).
pub fn connected_graphs(n: usize) -> Result<Vec<Graph>> {
    let pairs = all_pairs(n);
    if pairs.len() > 20 {
        return Err(Error::input(format!("too many edge subsets for n={n}")));
    }
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let g = Graph::new(n, subset(&pairs, mask))?;
        if g.is_connected() {
            out.push(g);
        }
    }
    Ok(out)
}

/// One representative per isomorphism class of connected graphs on `n`
/// vertices (`n <= 7`), by canonical minimum edge mask over all relabelings.
pub fn connected_graphs_up_to_iso(n: usize) -> Result<Vec<Graph>> {
    if n > 7 {
        return Err(Error::input(format!("isomorphism sweep limited to n <= 7, got {n}")));
    }
    let pairs = all_pairs(n);
    let mut index = vec![vec![0usize; n]; n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        index[a][b] = i;
        index[b][a] = i;
    }
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let g = Graph::new(n, subset(&pairs, mask))?;
        if !g.is_connected() {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(0u32, |acc, (_, &(a, b))| acc | 1 << index[p[a]][p[b]])
            })
            .min()
            .expect("at least one permutation");
        if seen.insert(canon) {
            out.push(Graph::new(n, subset(&pairs, canon))?);
        }
    }
    Ok(out)
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn subset(pairs: &[(usize, usize)], mask: u32) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &p)| p)
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub cab: usize,
}

/// Exact values for a family over a size range. `family` is either
/// `connected` (every connected graph up to isomorphism) or any generator
/// family taking a single size, such as `cycle` or `path`.
pub fn oracle_sweep(family: &str, sizes: RangeInclusive<usize>) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for n in sizes {
        let graphs: Vec<(String, Graph)> = if family == "connected" {
            connected_graphs_up_to_iso(n)?
                .into_iter()
                .enumerate()
                .map(|(i, g)| (format!("connected:{n}#{i}"), g))
                .collect()
        } else {
            let spec = format!("{family}:{n}");
            vec![(spec.clone(), from_spec(&spec)?)]
        };
        for (instance, g) in graphs {
            if g.num_edges() == 0 {
                continue;
            }
            let r = brute_force_cab(&g)?;
            rows.push(SweepRow {
                instance,
                n: g.n(),
                m: g.num_edges(),
                cab: r.cab,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let mut s = String::from("instance\tn\tm\tcab\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{}\t{}\t{}", r.instance, r.n, r.m, r.cab);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{double_star_upper, hypercube_bounds};
    use crate::graph::{complete, cycle, double_star, hypercube, path, random_connected, star};

    #[test]
    fn small_values() {
        assert_eq!(brute_force_cab(&complete(3).unwrap()).unwrap().cab, 1);
        assert_eq!(brute_force_cab(&path(4).unwrap()).unwrap().cab, 1);
        let c6 = brute_force_cab(&cycle(6).unwrap()).unwrap();
        assert_eq!(c6.cab, 2);
        assert_eq!(cab_of_labeling(&cycle(6).unwrap(), &c6.witness).unwrap(), 2);
        // 3 first labels times 5! completions
        assert_eq!(c6.labelings_examined, 3 * 120);
        assert_eq!(brute_force_cab(&star(5).unwrap()).unwrap().cab, 1);
        assert_eq!(brute_force_cab(&path(5).unwrap()).unwrap().cab, 2);
    }

    #[test]
    fn family_cross_checks() {
        let ds = brute_force_cab(&double_star(4, 4).unwrap()).unwrap();
        assert_eq!(ds.cab, double_star_upper(4, 4).unwrap());
        assert_eq!(ds.cab, 2);
        let q3 = brute_force_cab(&hypercube(3).unwrap()).unwrap();
        let b = hypercube_bounds(3).unwrap();
        assert!(b.lb <= q3.cab && q3.cab <= b.ub, "{} vs {b:?}", q3.cab);
    }

    #[test]
    fn errors() {
        let g = Graph::new(11, (0..10).map(|i| (i, i + 1))).unwrap();
        assert!(matches!(brute_force_cab(&g), Err(Error::OracleCap { n: 11, cap: 10 })));
        let g = Graph::new(4, []).unwrap();
        assert!(matches!(brute_force_cab(&g), Err(Error::UndefinedObjective(_))));
    }

    #[test]
    fn pruning_is_sound() {
        for n in 2..=6 {
            for g in connected_graphs_up_to_iso(n).unwrap() {
                let a = brute_force_cab_with(&g, OracleOptions { reversal_pruning: true, threads: 1 }).unwrap();
                let b = brute_force_cab_with(&g, OracleOptions { reversal_pruning: false, threads: 1 }).unwrap();
                assert_eq!(a.cab, b.cab);
            }
        }
        for seed in 0..20 {
            let g = random_connected(7, 7 + seed as usize % 8, seed).unwrap();
            let a = brute_force_cab_with(&g, OracleOptions { reversal_pruning: true, threads: 1 }).unwrap();
            let b = brute_force_cab_with(&g, OracleOptions { reversal_pruning: false, threads: 1 }).unwrap();
            assert_eq!(a.cab, b.cab);
        }
    }

    #[test]
    fn parallel_is_deterministic() {
        let g = random_connected(8, 12, 3).unwrap();
        let one = brute_force_cab(&g).unwrap();
        for threads in [2, 3, 4, 8] {
            let p = brute_force_cab_with(&g, OracleOptions { reversal_pruning: true, threads }).unwrap();
            assert_eq!(p, one);
        }
    }

    #[test]
    fn isomorphism_class_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs_up_to_iso(n).unwrap().len()).collect();
        assert_eq!(counts, [1, 1, 2, 6, 21, 112]);
        assert_eq!(connected_graphs(4).unwrap().len(), 38);
    }

    #[test]
    fn sweep_table() {
        let rows = oracle_sweep("cycle", 3..=8).unwrap();
        let cabs: Vec<usize> = rows.iter().map(|r| r.cab).collect();
        // the cycle C_n has value floor((n-1)/2)
        assert_eq!(cabs, [1, 1, 2, 2, 3, 3]);
        let tsv = sweep_tsv(&rows);
        assert!(tsv.starts_with("instance\tn\tm\tcab\ncycle:3\t3\t3\t1\n"));
        let five = oracle_sweep("connected", 5..=5).unwrap();
        assert_eq!(five.len(), 21);
    }
}
