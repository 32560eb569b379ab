//! Newman modularity on a dense reduced weight matrix.
//!
//! A [`ModularityMatrix`] stores `e = E / m`, the raw symmetric weight matrix
//! divided by its grand total, together with the vertex strengths
//! `a_i = sum_j e_ij`. Strengths are full row sums, diagonal included; with
//! zero self-weights this equals the off-diagonal sum, and it is the
//! convention under which the closed-form merge delta `2 (e_ij - a_i a_j)`
//! equals the change in `Q` produced by an actual merge.

use crate::error::{Error, Result};

/// Largest vertex count accepted by the dense representation.
pub const DENSE_VERTEX_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct ModularityMatrix {
    n: usize,
    e: Vec<f64>,
    total: f64,
    strengths: Vec<f64>,
}

impl ModularityMatrix {
    /// Builds the reduced matrix from raw off-diagonal weights (`n`x`n`,
    /// row-major; the diagonal of `raw` is ignored) and per-vertex
    /// self-weights.
    pub fn normalize(n: usize, raw: &[f64], self_weights: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegenerateGraph);
        }
        if n > DENSE_VERTEX_CAP {
            return Err(Error::TooLarge {
                vertices: n,
                cap: DENSE_VERTEX_CAP,
            });
        }
        if raw.len() != n * n || self_weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} weights and {n} self-weights, got {} and {}",
                raw.len(),
                self_weights.len()
            )));
        }
        let mut total = 0.0;
        for i in 0..n {
            let s = self_weights[i];
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!(
                    "self-weight {s} of vertex {i} is not a finite non-negative number"
                )));
            }
            total += s;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = raw[i * n + j];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::invalid(format!(
                        "weight {w} at ({i}, {j}) is not a finite non-negative number"
                    )));
                }
                if w != raw[j * n + i] {
                    return Err(Error::invalid(format!(
                        "weights are not symmetric at ({i}, {j})"
                    )));
                }
                total += w;
            }
        }
        if total <= 0.0 {
            return Err(Error::DegenerateGraph);
        }
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = if i == j {
                    self_weights[i]
                } else {
                    raw[i * n + j]
                } / total;
            }
        }
        Ok(Self::from_reduced(n, e, total))
    }

    fn from_reduced(n: usize, e: Vec<f64>, total: f64) -> Self {
        let strengths = e.chunks_exact(n).map(|row| row.iter().sum()).collect();
        ModularityMatrix {
            n,
            e,
            total,
            strengths,
        }
    }

    /// Number of vertices (equivalently, communities after screeds).
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Reduced weight `e_ij`.
    pub fn e(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.n + j]
    }

    /// Vertex strength `a_i`.
    pub fn strength(&self, i: usize) -> f64 {
        self.strengths[i]
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    /// Total raw weight `m` the matrix was normalized by.
    pub fn raw_total(&self) -> f64 {
        self.total
    }

    /// Raw (unreduced) weight `E_ij = m * e_ij`.
    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.e(i, j) * self.total
    }

    pub fn reduced_sum(&self) -> f64 {
        self.e.iter().sum()
    }

    fn check_vertex(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { index, n: self.n })
        }
    }

    /// `Q = sum_i e_ii - sum_i a_i^2`, each vertex being its own community.
    pub fn modularity(&self) -> f64 {
        let trace: f64 = (0..self.n).map(|i| self.e(i, i)).sum();
        let spread: f64 = self.strengths.iter().map(|a| a * a).sum();
        trace - spread
    }

    /// Contracts `subset` into a single vertex.
    ///
    /// Vertices outside the subset keep their relative order; the merged
    /// vertex is appended last. Its self-weight is the sum of every internal
    /// entry (self-weights plus both orientations of internal edges), and its
    /// edge to each outside vertex is the sum of the subset's edges to it.
    pub fn screed(&self, subset: &[usize]) -> Result<ModularityMatrix> {
        if subset.is_empty() {
            return Err(Error::invalid("screed subset must be non-empty"));
        }
        let mut inside = vec![false; self.n];
        for &i in subset {
            self.check_vertex(i)?;
            inside[i] = true;
        }
        let outside: Vec<usize> = (0..self.n).filter(|&i| !inside[i]).collect();
        let members: Vec<usize> = (0..self.n).filter(|&i| inside[i]).collect();
        let n = outside.len() + 1;
        let merged = n - 1;
        let mut e = vec![0.0; n * n];
        for (a, &u) in outside.iter().enumerate() {
            for (b, &v) in outside.iter().enumerate() {
                e[a * n + b] = self.e(u, v);
            }
            let link: f64 = members.iter().map(|&s| self.e(s, u)).sum();
            e[a * n + merged] = link;
            e[merged * n + a] = link;
        }
        e[merged * n + merged] = members
            .iter()
            .flat_map(|&s| members.iter().map(move |&t| (s, t)))
            .map(|(s, t)| self.e(s, t))
            .sum();
        Ok(Self::from_reduced(n, e, self.total))
    }

    /// Closed-form modularity change from merging singleton vertices `i`
    /// and `j`: `2 (e_ij - a_i a_j)`.
    pub fn delta_q(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(merge_delta(
            self.e(i, j),
            self.strength(i),
            self.strength(j),
        ))
    }

    /// Merge delta by construction: `Q(screed(M, {i, j})) - Q(M)`.
    pub fn delta_q_direct(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.screed(&[i, j])?.modularity() - self.modularity())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::invalid(format!(
                "cannot merge vertex {i} with itself"
            )));
        }
        Ok(())
    }
}

/// `2 (e_ij - a_i a_j)` on already-reduced quantities.
#[inline]
pub fn merge_delta(e_ij: f64, a_i: f64, a_j: f64) -> f64 {
    2.0 * (e_ij - a_i * a_j)
}
