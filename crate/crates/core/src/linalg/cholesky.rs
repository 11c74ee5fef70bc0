//! Supernodal multifrontal Cholesky factorization driven by a dissection tree.

use std::sync::Arc;

use super::dense::{backward_substitute, forward_substitute, partial_cholesky};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Elimination order and front structure, reusable for any matrix with the
/// same sparsity pattern.
#[derive(Debug, Clone)]
pub struct SymbolicCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    iperm: Vec<usize>,
    /// First eliminated column of each supernode; one trailing entry equal to `n`.
    start: Vec<usize>,
    /// Front rows (new indices) of each supernode: own columns first, then
    /// the sorted rows of later columns it updates.
    rows: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl SymbolicCholesky {
    /// `supernodes` lists matrix indices eliminated together, in post-order;
    /// `children[s]` names the supernodes whose updates feed `s`. Every
    /// index must appear exactly once and the tree must separate the graph
    /// of `a` (no entries between unrelated subtrees).
    pub fn analyze(a: &CsrMatrix, supernodes: &[Vec<usize>], children: &[Vec<usize>]) -> Result<Self> {
        let n = a.dim();
        if supernodes.len() != children.len() {
            return Err(Error::Dimension("supernode and child lists differ in length".into()));
        }
        let mut perm = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(supernodes.len() + 1);
        for sn in supernodes {
            start.push(perm.len());
            perm.extend_from_slice(sn);
        }
        start.push(perm.len());
        let mut iperm = vec![usize::MAX; n];
        if perm.len() != n {
            return Err(Error::Dimension(format!("ordering covers {} of {n} unknowns", perm.len())));
        }
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || iperm[old] != usize::MAX {
                return Err(Error::Dimension(format!("ordering repeats or exceeds index {old}")));
            }
            iperm[old] = new;
        }

        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(supernodes.len());
        for s in 0..supernodes.len() {
            let (first, end) = (start[s], start[s + 1]);
            let mut later = Vec::new();
            for &old in &perm[first..end] {
                for &c in a.row(old).0 {
                    let nc = iperm[c];
                    // entries to earlier columns were folded in by descendants
                    if nc >= end {
                        later.push(nc);
                    }
                }
            }
            for &c in &children[s] {
                if c >= s {
                    return Err(Error::Dimension("dissection tree is not in post-order".into()));
                }
                let kc = start[c + 1] - start[c];
                for &r in &rows[c][kc..] {
                    if r < first {
                        return Err(Error::Dimension("dissection tree does not separate the matrix graph".into()));
                    }
                    if r >= end {
                        later.push(r);
                    }
                }
            }
            later.sort_unstable();
            later.dedup();
            let mut front: Vec<usize> = (first..end).collect();
            front.extend(later);
            rows.push(front);
        }
        Ok(Self { n, perm, iperm, start, rows, children: children.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_supernodes(&self) -> usize {
        self.rows.len()
    }

    /// Stored factor entries (dense trapezoids including the strict upper
    /// part of diagonal blocks).
    pub fn factor_entries(&self) -> usize {
        (0..self.rows.len()).map(|s| self.rows[s].len() * self.width(s)).sum()
    }

    /// Largest frontal matrix dimension.
    pub fn max_front(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn width(&self, s: usize) -> usize {
        self.start[s + 1] - self.start[s]
    }
}

/// Numeric factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: Arc<SymbolicCholesky>,
    /// Column-major `m x k` block `[L11; L21]` per supernode.
    blocks: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn factor(symbolic: Arc<SymbolicCholesky>, a: &CsrMatrix) -> Result<Self> {
        let sym = &*symbolic;
        if a.dim() != sym.n {
            return Err(Error::Dimension(format!("matrix is {}x{0}, ordering expects {}", a.dim(), sym.n)));
        }
        let mut relpos = vec![usize::MAX; sym.n];
        let mut stack: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut blocks = Vec::with_capacity(sym.rows.len());
        for s in 0..sym.rows.len() {
            let rows = &sym.rows[s];
            let m = rows.len();
            let k = sym.width(s);
            let first = sym.start[s];
            for (li, &r) in rows.iter().enumerate() {
                relpos[r] = li;
            }
            let mut front = vec![0.0; m * m];
            for jl in 0..k {
                let j = first + jl;
                let (cols, vals) = a.row(sym.perm[j]);
                for (&c, &v) in cols.iter().zip(vals) {
                    let i = sym.iperm[c];
                    if i >= j {
                        front[relpos[i] + jl * m] += v;
                    }
                }
            }
            for &c in sym.children[s].iter().rev() {
                if stack.last().is_some_and(|(id, _)| *id == c) {
                    let (_, u) = stack.pop().unwrap();
                    let kc = sym.width(c);
                    let urows = &sym.rows[c][kc..];
                    let nu = urows.len();
                    for b in 0..nu {
                        let cb = relpos[urows[b]] * m;
                        let col = &u[b * nu..(b + 1) * nu];
                        for a_ in b..nu {
                            front[relpos[urows[a_]] + cb] += col[a_];
                        }
                    }
                }
            }
            partial_cholesky(&mut front, m, k)
                .map_err(|(p, value)| Error::NotPositiveDefinite { pivot: sym.perm[first + p], value })?;
            if m > k {
                let nu = m - k;
                let mut u = vec![0.0; nu * nu];
                for b in 0..nu {
                    let src = (k + b) * m + k;
                    u[b * nu + b..(b + 1) * nu].copy_from_slice(&front[src + b..src + nu]);
                }
                stack.push((s, u));
            }
            front.truncate(m * k);
            front.shrink_to_fit();
            blocks.push(front);
        }
        Ok(Self { symbolic, blocks })
    }

    pub fn symbolic(&self) -> &Arc<SymbolicCholesky> {
        &self.symbolic
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = &*self.symbolic;
        let mut x: Vec<f64> = sym.perm.iter().map(|&o| b[o]).collect();
        for s in 0..sym.rows.len() {
            let rows = &sym.rows[s];
            let (m, k, first) = (rows.len(), sym.width(s), sym.start[s]);
            let l = &self.blocks[s];
            forward_substitute(l, m, k, &mut x[first..first + k]);
            for j in 0..k {
                let xj = x[first + j];
                if xj == 0.0 {
                    continue;
                }
                let col = &l[j * m..(j + 1) * m];
                for r in k..m {
                    x[rows[r]] -= col[r] * xj;
                }
            }
        }
        for s in (0..sym.rows.len()).rev() {
            let rows = &sym.rows[s];
            let (m, k, first) = (rows.len(), sym.width(s), sym.start[s]);
            let l = &self.blocks[s];
            for j in 0..k {
                let col = &l[j * m..(j + 1) * m];
                let mut acc = 0.0;
                for r in k..m {
                    acc += col[r] * x[rows[r]];
                }
                x[first + j] -= acc;
            }
            backward_substitute(l, m, k, &mut x[first..first + k]);
        }
        let mut out = vec![0.0; sym.n];
        for (new, &old) in sym.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
