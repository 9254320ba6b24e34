use std::collections::VecDeque;

use crate::{Error, Result, C64};

/// Symmetric sparsity pattern in compressed-row form with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePattern {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl SparsePattern {
    /// Pattern of a matrix coupling every pair of nodes that share an element.
    pub fn from_elements(n: usize, elements: &[[usize; 3]]) -> Self {
        let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for t in elements {
            for &a in t {
                for &b in t {
                    adj[a].push(b);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut row in adj {
            row.sort_unstable();
            row.dedup();
            col_idx.extend(row);
            row_ptr.push(col_idx.len());
        }
        Self { row_ptr, col_idx }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }
}

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn rcm_ordering(p: &SparsePattern) -> Vec<usize> {
    let n = p.n();
    let degree: Vec<usize> = (0..n).map(|i| p.row(i).len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("unvisited node");
        let start = pseudo_peripheral(p, seed, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = p.row(v).iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(p: &SparsePattern, start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; p.n()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].expect("visited");
        for &w in p.row(v) {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(p: &SparsePattern, seed: usize, degree: &[usize]) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let lv = bfs_levels(p, v);
        let max = lv.iter().flatten().copied().max().unwrap_or(0);
        if max <= ecc {
            break;
        }
        ecc = max;
        v = (0..p.n())
            .filter(|&i| lv[i] == Some(max))
            .min_by_key(|&i| (degree[i], i))
            .expect("last level nonempty");
    }
    v
}

/// Compressed-row complex matrix over a fixed pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub pattern: std::sync::Arc<SparsePattern>,
    pub vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: std::sync::Arc<SparsePattern>) -> Self {
        let nnz = pattern.col_idx.len();
        Self { pattern, vals: vec![C64::new(0.0, 0.0); nnz] }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.pattern.row_ptr[i];
        self.pattern.row(i).binary_search(&j).ok().map(|k| lo + k)
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.vals[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |k| self.vals[k])
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n())
            .map(|i| {
                let lo = self.pattern.row_ptr[i];
                self.pattern.row(i).iter().enumerate().map(|(k, &j)| self.vals[lo + k] * x[j]).sum()
            })
            .collect()
    }

    /// Replaces row `i` by the identity row (Dirichlet elimination).
    pub fn set_identity_row(&mut self, i: usize) {
        let lo = self.pattern.row_ptr[i];
        for (k, &j) in self.pattern.row(i).iter().enumerate() {
            self.vals[lo + k] = if j == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
    }

    /// Zeroes column `j` outside row `j`.
    pub fn zero_column_offdiag(&mut self, j: usize) {
        let nbrs: Vec<usize> = self.pattern.row(j).to_vec();
        for i in nbrs {
            if i != j {
                if let Some(k) = self.slot(i, j) {
                    self.vals[k] = C64::new(0.0, 0.0);
                }
            }
        }
    }
}

struct Row {
    start: usize,
    vals: Vec<C64>,
}

impl Row {
    fn end(&self) -> usize {
        self.start + self.vals.len()
    }

    fn get(&self, j: usize) -> C64 {
        if j >= self.start && j < self.end() {
            self.vals[j - self.start]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    fn extend_to(&mut self, end: usize) {
        if end > self.end() {
            let len = end - self.start;
            self.vals.resize(len, C64::new(0.0, 0.0));
        }
    }
}

/// Banded LU with partial pivoting in a bandwidth-reducing ordering.
///
/// Rows are stored as contiguous windows that grow to the right as pivoting
/// fills in, which bounds fill by the lower plus upper bandwidth.
pub struct BandLu {
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    rows: Vec<Row>,
    swaps: Vec<usize>,
    multipliers: Vec<Vec<(usize, C64)>>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = rcm_ordering(&a.pattern);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let mut rows: Vec<Row> = Vec::with_capacity(n);
        let mut kl = 0;
        let mut scale = 0.0_f64;
        for (new, &old) in perm.iter().enumerate() {
            let lo = a.pattern.row_ptr[old];
            let cols: Vec<(usize, C64)> = a
                .pattern
                .row(old)
                .iter()
                .enumerate()
                .map(|(k, &j)| (inv_perm[j], a.vals[lo + k]))
                .collect();
            let start = cols.iter().map(|c| c.0).min().unwrap_or(new).min(new);
            let end = cols.iter().map(|c| c.0 + 1).max().unwrap_or(new + 1).max(new + 1);
            let mut row = Row { start, vals: vec![C64::new(0.0, 0.0); end - start] };
            for (j, v) in cols {
                row.vals[j - start] += v;
                scale = scale.max(v.norm());
            }
            kl = kl.max(new - start);
            rows.push(row);
        }
        let mut swaps = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + kl + 1).min(n);
            let p = (k..last)
                .max_by(|&x, &y| rows[x].get(k).norm().total_cmp(&rows[y].get(k).norm()).then(y.cmp(&x)))
                .expect("nonempty");
            let piv = rows[p].get(k);
            if piv.norm() == 0.0 || piv.norm() <= f64::EPSILON * scale * 1e-6 {
                return Err(Error::Singular { step: k, pivot: piv.norm() });
            }
            rows.swap(k, p);
            swaps.push(p);
            let (head, tail) = rows.split_at_mut(k + 1);
            let pivot_row = &head[k];
            let mut ms = Vec::new();
            for (off, row) in tail.iter_mut().take(last - k - 1).enumerate() {
                let a_ik = row.get(k);
                if a_ik.norm() == 0.0 {
                    continue;
                }
                let m = a_ik / piv;
                ms.push((k + 1 + off, m));
                row.extend_to(pivot_row.end());
                if row.start > k {
                    return Err(Error::Dimension("band window underflow".into()));
                }
                row.vals[k - row.start] = C64::new(0.0, 0.0);
                for j in k + 1..pivot_row.end() {
                    let u = pivot_row.vals[j - pivot_row.start];
                    if u.norm_sqr() != 0.0 {
                        row.vals[j - row.start] -= m * u;
                    }
                }
            }
            multipliers.push(ms);
        }
        Ok(Self { perm, inv_perm, rows, swaps, multipliers })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.perm.len();
        let mut y: Vec<C64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            y.swap(k, self.swaps[k]);
            let yk = y[k];
            for &(i, m) in &self.multipliers[k] {
                y[i] -= m * yk;
            }
        }
        for k in (0..n).rev() {
            let row = &self.rows[k];
            let mut s = y[k];
            for j in k + 1..row.end() {
                s -= row.vals[j - row.start] * y[j];
            }
            y[k] = s / row.vals[k - row.start];
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (old, &new) in self.inv_perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Stored entries of the upper factor (fill diagnostic).
    pub fn factor_nnz(&self) -> usize {
        self.rows.iter().map(|r| r.vals.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid_matrix(m: usize, shift: C64) -> CsrMatrix {
        // 5-point Laplacian-like matrix on an m x m grid, assembled through elements.
        let idx = |i: usize, j: usize| i * m + j;
        let mut tris = Vec::new();
        for i in 0..m - 1 {
            for j in 0..m - 1 {
                tris.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                tris.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let p = Arc::new(SparsePattern::from_elements(m * m, &tris));
        let mut a = CsrMatrix::zeros(p.clone());
        for i in 0..m * m {
            for &j in p.row(i) {
                let v = if i == j { C64::new(4.0, 0.0) - shift } else { C64::new(-0.7, 0.1 * (i % 3) as f64) };
                a.add(i, j, v);
            }
        }
        a
    }

    #[test]
    fn band_lu_matches_dense() {
        let a = grid_matrix(9, C64::new(3.9, 0.0));
        let n = a.n();
        let x: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let b = a.mul_vec(&x);
        let lu = BandLu::factor(&a).unwrap();
        let y = lu.solve(&b);
        let err = x.iter().zip(&y).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn rcm_is_permutation_and_narrows_band() {
        let a = grid_matrix(12, C64::new(0.0, 0.0));
        let mut perm = rcm_ordering(&a.pattern);
        let n = perm.len();
        let mut inv = vec![0; n];
        for (k, &o) in perm.iter().enumerate() {
            inv[o] = k;
        }
        let bw = |inv: &[usize]| {
            (0..n)
                .flat_map(|i| a.pattern.row(i).iter().map(move |&j| (i, j)))
                .map(|(i, j)| inv[i].abs_diff(inv[j]))
                .max()
                .unwrap()
        };
        assert!(bw(&inv) <= 13);
        perm.sort();
        assert_eq!(perm, (0..n).collect::<Vec<_>>());
    }
}
