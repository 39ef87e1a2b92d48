//! Erdos-Renyi graph sampling and the bit-row adjacency structure.
//!
//! A [`Graph`] stores one bit-vector per vertex, packed into `u64` words,
//! with the adjacency matrix invariants enforced on construction: symmetric,
//! zero diagonal. Edges are sampled with per-edge randomness that is a pure
//! function of `(seed, edge index)`, so sampling is reproducible and
//! order-independent.
//!
//! Vertices are 0-based in the API. The edge-list text format and the CLI
//! use 1-based labels; [`Graph::from_edge_list`] and the readers/writers
//! translate.

use std::io::{BufRead, Write};

use crate::error::{check_probability, invalid, Error, Result};
use crate::rng::Seed;

const WORD_BITS: usize = 64;

/// Undirected simple graph as `n` bit rows of length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Empty graph on `n >= 2` vertices.
    pub fn empty(n: usize) -> Result<Graph> {
        if n < 2 {
            return Err(invalid(format!("graph needs at least 2 vertices, got {n}")));
        }
        let words_per_row = n.div_ceil(WORD_BITS);
        Ok(Graph {
            n,
            words_per_row,
            bits: vec![0u64; n * words_per_row],
        })
    }

    /// Samples G(n,p): each unordered pair is an edge independently with
    /// probability `p`. Deterministic in `seed`; edge `e`'s coin is the
    /// stream value at counter `e`, independent of iteration order.
    pub fn sample_gnp(n: usize, p: f64, seed: Seed) -> Result<Graph> {
        check_probability(p, "p")?;
        let mut g = Graph::empty(n)?;
        let stream = seed.stream(0);
        let mut edge_index = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                if stream.bernoulli_at(edge_index, p) {
                    g.set_edge(i, j);
                }
                edge_index += 1;
            }
        }
        Ok(g)
    }

    /// Builds a graph from 1-based endpoint pairs. Duplicates are
    /// idempotent; self-loops and out-of-range endpoints are rejected.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for &(a, b) in edges {
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            if a < 1 || a > n || b < 1 || b > n {
                return Err(Error::VertexOutOfRange {
                    vertex: if a < 1 || a > n { a } else { b },
                    n,
                });
            }
            g.set_edge(a - 1, b - 1);
        }
        Ok(g)
    }

    /// Parses the edge-list text format: one `i j` pair per line, 1-based,
    /// whitespace-separated; lines beginning with `#` and blank lines are
    /// ignored. `n` must be supplied (the format has no size header).
    pub fn read_edge_list<R: BufRead>(n: usize, reader: R) -> Result<Graph> {
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: expected 'i j'", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let a = parse(it.next())?;
            let b = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: trailing tokens after 'i j'",
                    lineno + 1
                )));
            }
            edges.push((a, b));
        }
        Graph::from_edge_list(n, &edges)
    }

    /// Writes the edge-list text format (1-based, `i < j` per line).
    pub fn write_edge_list<W: Write>(&self, mut writer: W) -> Result<()> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    writeln!(writer, "{} {}", i + 1, j + 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit row of vertex `i` as packed words.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        self.bits[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && i < self.n && j < self.n);
        self.bits[i * self.words_per_row + j / WORD_BITS] |= 1u64 << (j % WORD_BITS);
        self.bits[j * self.words_per_row + i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }

    /// |N_i|: popcount of row `i`.
    pub fn degree(&self, i: usize) -> Result<u64> {
        if i >= self.n {
            return Err(Error::VertexOutOfRange { vertex: i, n: self.n });
        }
        Ok(self.row(i).iter().map(|w| u64::from(w.count_ones())).sum())
    }

    /// Degrees of all vertices.
    pub fn degrees(&self) -> Vec<u64> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|w| u64::from(w.count_ones())).sum())
            .collect()
    }

    /// Checks symmetry and zero diagonal over all pairs.
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return Err(invalid(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) != self.has_edge(j, i) {
                    return Err(invalid(format!("asymmetric pair ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}
