//! Exact solver for the cyclic antibandwidth problem.
//!
//! For a graph `G` on `n` vertices and a bijective labeling `f: V -> 1..=n`,
//! the cyclic antibandwidth of `f` is the smallest cyclic distance
//! `min(|f(u) - f(v)|, n - |f(u) - f(v)|)` over the edges of `G`. The solver
//! finds the labeling maximising it by encoding "is there a labeling with value
//! at least `k`?" into CNF with the cyclic ladder encoding and searching over
//! `k` with a SAT solver.
//!
//! ```
//! use cabsat::{graph, search};
//!
//! let g = graph::cycle(6).unwrap();
//! let result = search::solve(&g, &search::SearchOptions::default()).unwrap();
//! assert_eq!(result.k_opt, Some(2));
//! assert!(result.certified);
//! ```

pub mod bounds;
pub mod cnf;
pub mod error;
pub mod graph;
pub mod ladder;
pub mod model;
pub mod oracle;
pub mod search;

pub use error::{Error, Result};
pub use graph::{cab_of_labeling, cyclic_distance, Graph, Labeling};
