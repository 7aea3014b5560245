//! Structured instance families and a seeded random connected generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

fn require_positive(name: &str, values: &[usize]) -> Result<()> {
    if values.contains(&0) {
        return Err(Error::input(format!("{name}: size parameters must be >= 1")));
    }
    Ok(())
}

pub fn path(n: usize) -> Result<Graph> {
    require_positive("path", &[n])?;
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::input("cycle: need at least 3 vertices"));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete(n: usize) -> Result<Graph> {
    require_positive("complete", &[n])?;
    Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
}

/// Star with `n` vertices: center 0 joined to `1..n`.
pub fn star(n: usize) -> Result<Graph> {
    require_positive("star", &[n])?;
    Graph::new(n, (1..n).map(|i| (0, i)))
}

/// Cartesian product `P_n1 x P_n2 x P_n3`. Vertex `(a, b, c)` has index
/// `(a * n2 + b) * n3 + c`.
pub fn mesh3d(n1: usize, n2: usize, n3: usize) -> Result<Graph> {
    require_positive("mesh3d", &[n1, n2, n3])?;
    let idx = |a: usize, b: usize, c: usize| (a * n2 + b) * n3 + c;
    let mut edges = Vec::new();
    for a in 0..n1 {
        for b in 0..n2 {
            for c in 0..n3 {
                if a + 1 < n1 {
                    edges.push((idx(a, b, c), idx(a + 1, b, c)));
                }
                if b + 1 < n2 {
                    edges.push((idx(a, b, c), idx(a, b + 1, c)));
                }
                if c + 1 < n3 {
                    edges.push((idx(a, b, c), idx(a, b, c + 1)));
                }
            }
        }
    }
    Graph::new(n1 * n2 * n3, edges)
}

/// Two stars on `n1` and `n2` vertices whose centers (0 and `n1`) are joined.
pub fn double_star(n1: usize, n2: usize) -> Result<Graph> {
    require_positive("double-star", &[n1, n2])?;
    let edges = (1..n1)
        .map(|i| (0, i))
        .chain((1..n2).map(|i| (n1, n1 + i)))
        .chain(std::iter::once((0, n1)));
    Graph::new(n1 + n2, edges)
}

/// `d`-dimensional hypercube; vertices are bit strings, edges flip one bit.
pub fn hypercube(d: u32) -> Result<Graph> {
    if d == 0 || d > 20 {
        return Err(Error::input("hypercube: dimension must be in 1..=20"));
    }
    let n = 1usize << d;
    let edges = (0..n).flat_map(|v| {
        (0..d).filter_map(move |bit| {
            let u = v ^ (1 << bit);
            (v < u).then_some((v, u))
        })
    });
    Graph::new(n, edges)
}

/// Backbone path on `0..n1`; every backbone vertex is the end of a branch path
/// on `n2` vertices, so `n = n1 * n2`.
pub fn caterpillar(n1: usize, n2: usize) -> Result<Graph> {
    require_positive("caterpillar", &[n1, n2])?;
    let mut edges: Vec<_> = (1..n1).map(|i| (i - 1, i)).collect();
    let mut next = n1;
    for spine in 0..n1 {
        let mut prev = spine;
        for _ in 1..n2 {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    Graph::new(next, edges)
}

/// Complete binary tree on `n` nodes in heap order, last level filled left to right.
pub fn complete_binary_tree(n: usize) -> Result<Graph> {
    require_positive("cbt", &[n])?;
    Graph::new(n, (1..n).map(|i| ((i - 1) / 2, i)))
}

/// Connected graph with exactly `m` edges. A random recursive spanning tree
/// over a shuffled vertex order comes first, then extra edges drawn uniformly
/// from the remaining pairs. Same seed, same graph.
pub fn random_connected(n: usize, m: usize, seed: u64) -> Result<Graph> {
    require_positive("random", &[n])?;
    let max = n * (n - 1) / 2;
    if m + 1 < n || m > max {
        return Err(Error::input(format!(
            "random: need {} <= m <= {max} for n = {n}, got m = {m}",
            n - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut present = vec![false; n * n];
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        let (a, b) = (parent.min(child), parent.max(child));
        present[a * n + b] = true;
        edges.push((a, b));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !present[a * n + b])
        .collect();
    let extra = m - edges.len();
    let (chosen, _) = rest.partial_shuffle(&mut rng, extra);
    edges.extend_from_slice(chosen);
    Graph::new(n, edges)
}

/// Parses a generator spec such as `caterpillar:5,4` or `random:100,200,7`.
///
/// Families: `path:n`, `cycle:n`, `complete:n`, `star:n`, `mesh3d:n1,n2,n3`,
/// `double-star:n1,n2`, `hypercube:d`, `caterpillar:n1,n2`, `cbt:n`,
/// `random:n,m[,seed]`.
pub fn from_spec(spec: &str) -> Result<Graph> {
    let (family, params) = spec
        .split_once(':')
        .ok_or_else(|| Error::input(format!("generator spec `{spec}` lacks `family:params`")))?;
    let nums = params
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::input(format!("bad parameter `{p}` in `{spec}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let arity = |k: usize| -> Result<()> {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::input(format!(
                "`{family}` takes {k} parameter(s), got {}",
                nums.len()
            )))
        }
    };
    let u = |i: usize| nums[i] as usize;
    match family {
        "path" => arity(1).and_then(|_| path(u(0))),
        "cycle" => arity(1).and_then(|_| cycle(u(0))),
        "complete" => arity(1).and_then(|_| complete(u(0))),
        "star" => arity(1).and_then(|_| star(u(0))),
        "mesh3d" => arity(3).and_then(|_| mesh3d(u(0), u(1), u(2))),
        "double-star" => arity(2).and_then(|_| double_star(u(0), u(1))),
        "hypercube" => arity(1).and_then(|_| hypercube(nums[0] as u32)),
        "caterpillar" => arity(2).and_then(|_| caterpillar(u(0), u(1))),
        "cbt" => arity(1).and_then(|_| complete_binary_tree(u(0))),
        "random" => match nums.len() {
            2 => random_connected(u(0), u(1), 0),
            3 => random_connected(u(0), u(1), nums[2]),
            _ => Err(Error::input("`random` takes n,m[,seed]")),
        },
        other => Err(Error::input(format!("unknown generator family `{other}`"))),
    }
}
