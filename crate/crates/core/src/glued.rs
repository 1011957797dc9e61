//! The glued double graph family: two copies of a connected base graph `G`
//! with the vertices of a subset `H` identified, plus a cross edge between
//! the two copies of every unglued vertex.
//!
//! `H` must not contain neighboring vertices of `G` (each glued vertex keeps
//! disjoint neighborhoods in the two copies) and must leave `G \ H`
//! nonempty. Degrees in the glued graph `𝒢`:
//!
//! ```text
//! d(x) = 2 d_G(x)     for glued x ∈ H
//! d(x) = d_G(x) + 1   for copies of x ∈ G \ H
//! ```
//!
//! so `D_𝒢 = 2 D_G + 2·#(G\H)`. The simple random walk on `𝒢` carries a
//! canonical fuzzy 2-class structure — membership `(1,0)` on copy 1, `(0,1)`
//! on copy 2, `(1/2, 1/2)` on `H` — and a canonical coupling that matches
//! each unglued vertex with its twin and each glued vertex with itself.
//! Projection rate, coupling quality, and the resulting Poincaré bound term
//! all have closed forms, which this module evaluates for cross-checking
//! against the definition-based pipeline:
//!
//! ```text
//! Q̂(1,2) = (2/D_𝒢) (Σ_{x∈H} d_G(x) + #(G\H))
//! χ       = (1/Q̂(1,2)) · 1/(max_{v∈G\H} d_G(v) + 1)
//! χ·λ(Q̂) = 2/(max_{v∈G\H} d_G(v) + 1)
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::ReversibleChain;
use crate::coupling::{Coupling, CouplingSet};
use crate::decomposition::FuzzyPartition;
use crate::linalg::Matrix;
use crate::{Error, Result};

/// A connected base graph with the subset to glue.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    h: Vec<usize>,
}

impl BaseGraph {
    /// Validates connectivity, absence of self-loops and duplicate edges,
    /// the neighbor condition on `H`, and `H ≠ G`.
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>, h: Vec<usize>) -> Result<Self> {
        let n = vertices.len();
        if n < 2 {
            return Err(Error::Invalid(
                "base graph needs at least two vertices".into(),
            ));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i] == vertices[j] {
                    return Err(Error::Invalid(format!(
                        "duplicate vertex name {:?}",
                        vertices[i]
                    )));
                }
            }
        }
        let mut adjacency = vec![vec![false; n]; n];
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Invalid(format!(
                    "self-loop at vertex {:?}",
                    vertices[u]
                )));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if adjacency[a][b] {
                return Err(Error::Invalid(format!(
                    "duplicate edge between {:?} and {:?}",
                    vertices[a], vertices[b]
                )));
            }
            adjacency[a][b] = true;
            adjacency[b][a] = true;
            normalized.push((a, b));
        }
        // Connectivity.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if adjacency[x][y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::Invalid(format!(
                "base graph is disconnected: vertex {:?} unreachable",
                vertices[x]
            )));
        }
        // H: sorted, unique, in range, neighbor-free, proper subset.
        let mut h = h;
        h.sort_unstable();
        for w in h.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!(
                    "duplicate H vertex {:?}",
                    vertices[w[0]]
                )));
            }
        }
        if let Some(&x) = h.iter().find(|&&x| x >= n) {
            return Err(Error::Invalid(format!(
                "H index {x} out of range for {n} vertices"
            )));
        }
        if h.len() == n {
            return Err(Error::Invalid(
                "H must be a proper subset: no vertex would remain unglued".into(),
            ));
        }
        for &x in &h {
            for &y in &h {
                if x != y && adjacency[x][y] {
                    return Err(Error::Invalid(format!(
                        "H vertex {:?} has neighbor {:?} inside H",
                        vertices[x], vertices[y]
                    )));
                }
            }
        }
        Ok(BaseGraph {
            vertices,
            edges: normalized,
            h,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn glued_subset(&self) -> &[usize] {
        &self.h
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    fn is_glued(&self, v: usize) -> bool {
        self.h.binary_search(&v).is_ok()
    }
}

/// The glued double graph, with the index bookkeeping needed to build the
/// canonical partition and coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedGraph {
    /// Names in `𝒢`: `"v"` for glued vertices, `"v#1"`/`"v#2"` for copies.
    pub vertex_names: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub degrees: Vec<usize>,
    /// `D_𝒢 = Σ_x d(x)`.
    pub total_degree: usize,
    /// Indices of glued (`H`) vertices in `𝒢`.
    pub glued: Vec<usize>,
    /// For each unglued base vertex, the indices of its two copies.
    pub copy_pairs: Vec<(usize, usize)>,
}

/// Build `𝒢` and the simple random walk on it.
///
/// Vertex order: copy 1 and glued vertices in base order, then copy 2.
pub fn build_glued_graph(base: &BaseGraph) -> Result<(GluedGraph, ReversibleChain)> {
    let n = base.vertices.len();
    let mut first_index = vec![usize::MAX; n]; // glued or copy-1 index
    let mut second_index = vec![usize::MAX; n]; // copy-2 index for unglued
    let mut names = Vec::new();
    for v in 0..n {
        first_index[v] = names.len();
        if base.is_glued(v) {
            names.push(base.vertices[v].clone());
        } else {
            names.push(format!("{}#1", base.vertices[v]));
        }
    }
    for v in 0..n {
        if !base.is_glued(v) {
            second_index[v] = names.len();
            names.push(format!("{}#2", base.vertices[v]));
        }
    }

    let index_in_copy = |v: usize, copy: u8| -> usize {
        if base.is_glued(v) || copy == 1 {
            first_index[v]
        } else {
            second_index[v]
        }
    };

    let mut edges = Vec::new();
    for &(u, v) in &base.edges {
        edges.push((index_in_copy(u, 1), index_in_copy(v, 1)));
        edges.push((index_in_copy(u, 2), index_in_copy(v, 2)));
    }
    for v in 0..n {
        if !base.is_glued(v) {
            edges.push((first_index[v], second_index[v]));
        }
    }

    let total = names.len();
    let mut degrees = vec![0usize; total];
    for &(a, b) in &edges {
        degrees[a] += 1;
        degrees[b] += 1;
    }
    let total_degree: usize = degrees.iter().sum();

    let glued: Vec<usize> = base.h.iter().map(|&v| first_index[v]).collect();
    let copy_pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&v| !base.is_glued(v))
        .map(|v| (first_index[v], second_index[v]))
        .collect();

    let chain = ReversibleChain::random_walk_on_edges(names.clone(), &edges)?;
    Ok((
        GluedGraph {
            vertex_names: names,
            edges,
            degrees,
            total_degree,
            glued,
            copy_pairs,
        },
        chain,
    ))
}

/// The canonical fuzzy partition of `𝒢` into classes `"1"` and `"2"`:
/// copies belong fully to their side, glued vertices half to each.
pub fn canonical_partition(glued: &GluedGraph) -> FuzzyPartition {
    let total = glued.vertex_names.len();
    let mut membership = Matrix::zeros(total, 2);
    for &(a, b) in &glued.copy_pairs {
        membership[(a, 0)] = 1.0;
        membership[(b, 1)] = 1.0;
    }
    for &x in &glued.glued {
        membership[(x, 0)] = 0.5;
        membership[(x, 1)] = 0.5;
    }
    FuzzyPartition::new(vec!["1".to_string(), "2".to_string()], membership)
        .expect("canonical membership is shape-correct")
}

/// The canonical couplings `κ_12` (glued vertices matched with themselves,
/// copies matched with their twins) and its transpose `κ_21`.
pub fn canonical_coupling(glued: &GluedGraph, chain: &ReversibleChain) -> CouplingSet {
    let pi = chain.pi();
    let mut support = Vec::with_capacity(glued.glued.len() + glued.copy_pairs.len());
    for &x in &glued.glued {
        support.push((x, x, pi[x]));
    }
    for &(a, b) in &glued.copy_pairs {
        support.push((a, b, 2.0 * pi[a]));
    }
    let forward = Coupling {
        i: 0,
        j: 1,
        support,
    };
    let backward = forward.transposed();
    CouplingSet::new(vec![forward, backward])
}

/// Closed forms for the canonical construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    /// `Q̂(1,2) = (2/D_𝒢)(Σ_{x∈H} d_G(x) + #(G\H))`.
    pub q_hat_12: f64,
    /// `χ = (1/Q̂(1,2)) · 1/(max_{v∈G\H} d_G(v) + 1)`.
    pub chi: f64,
    /// `χ·λ(Q̂) = 2/(max_{v∈G\H} d_G(v) + 1)`, using `λ(Q̂) = 2 Q̂(1,2)`
    /// for the symmetric two-state projection chain.
    pub projection_bound: f64,
}

/// Evaluate the closed forms directly from base-graph degree data.
pub fn closed_form_quantities(base: &BaseGraph) -> ClosedForm {
    let n = base.vertices.len();
    let degree_sum_g: usize = (0..n).map(|v| base.degree(v)).sum();
    let unglued = n - base.h.len();
    let total_degree = 2 * degree_sum_g + 2 * unglued;
    let h_degree_sum: usize = base.h.iter().map(|&v| base.degree(v)).sum();
    let q_hat_12 = 2.0 * (h_degree_sum + unglued) as f64 / total_degree as f64;
    let max_unglued_degree = (0..n)
        .filter(|&v| !base.is_glued(v))
        .map(|v| base.degree(v))
        .max()
        .expect("H is a proper subset");
    let chi = 1.0 / (q_hat_12 * (max_unglued_degree + 1) as f64);
    let projection_bound = 2.0 / (max_unglued_degree + 1) as f64;
    ClosedForm {
        q_hat_12,
        chi,
        projection_bound,
    }
}

/// A small worked example: the five-vertex graph with edges
/// `a−b, b−c, c−d, d−e, e−b, e−a` and glued subset `{a, c}`. Its glued
/// double graph has 8 vertices, total degree 30, `Q̂(1,2) = 7/15`,
/// `χ = 15/28`, and bound term `1/2`.
pub fn pentagon_example() -> BaseGraph {
    let names: Vec<String> = ["a", "b", "c", "d", "e"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    BaseGraph::new(
        names,
        vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 1), (4, 0)],
        vec![0, 2],
    )
    .expect("the pentagon example is a valid base graph")
}

/// A random connected base graph with a random valid glued subset, for
/// property tests: Erdős–Rényi conditioned on connectivity, then a greedy
/// neighbor-free subset (possibly empty).
pub fn random_base_graph(n: usize, edge_prob: f64, rng: &mut ChaCha8Rng) -> BaseGraph {
    assert!(n >= 2);
    let vertices: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
    loop {
        let mut edges = Vec::new();
        let mut adjacency = vec![vec![false; n]; n];
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((u, v));
                    adjacency[u][v] = true;
                    adjacency[v][u] = true;
                }
            }
        }
        // Connectivity check; resample on failure.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if adjacency[x][y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            continue;
        }
        // Greedy neighbor-free subset over a random vertex order, capped
        // below n so some vertex stays unglued.
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let target = rng.gen_range(0..n); // allow empty H
        let mut h: Vec<usize> = Vec::new();
        for &v in &order {
            if h.len() >= target {
                break;
            }
            if h.iter().all(|&u| !adjacency[u][v]) {
                h.push(v);
            }
        }
        if h.len() == n {
            h.pop();
        }
        return BaseGraph::new(vertices, edges, h).expect("sampled graph satisfies invariants");
    }
}
