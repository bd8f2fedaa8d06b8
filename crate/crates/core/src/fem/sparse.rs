//! Compressed sparse rows, reverse Cuthill–McKee ordering, and an envelope
//! (skyline) `LDLᵀ` factorization for symmetric matrices.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; the result does not depend on triplet order
    /// beyond floating-point summation order, which is kept as given.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut raw = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            raw[next[i]] = (j, v);
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let row = &mut raw[counts[i]..counts[i + 1]];
            // stable sort keeps summation order of duplicates
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                cols.push(j);
                vals.push(s);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // start each component from a minimum-degree vertex
        let start = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).expect("unvisited vertex");
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// `LDLᵀ` of a symmetric matrix in envelope storage.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    first: Vec<usize>,
    start: Vec<usize>,
    /// Row `i` holds `L_ij` for `j ∈ first[i]..i`.
    lower: Vec<f64>,
    diag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotBreakdown {
    pub row: usize,
    pub pivot: f64,
}

impl SkylineLdl {
    /// Factors the leading `n × n` block of `a` (rows and columns `< n` only).
    ///
    /// Fails on a pivot that is not positive relative to the diagonal entry,
    /// which for symmetric positive definite input indicates loss of definiteness.
    pub fn factor(a: &CsrMatrix, n: usize) -> Result<Self, PivotBreakdown> {
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a.row(i).map(|(j, _)| j).filter(|&j| j < n).min().unwrap_or(i).min(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut aii = vec![0.0; n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j < i && j >= first[i] {
                    lower[start[i] + j - first[i]] = v;
                } else if j == i {
                    aii[i] = v;
                }
            }
        }
        // `lower` temporarily holds A_ij, overwritten in place by L_ij
        let mut tmp = Vec::new();
        for i in 0..n {
            let fi = first[i];
            tmp.clear();
            tmp.resize(i - fi, 0.0);
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = lower[start[i] + j - fi];
                let ri = &lower[start[i] + k0 - fi..start[i] + j - fi];
                let rj = &lower[start[j] + k0 - fj..start[j] + j - fj];
                for ((li, lj), k) in ri.iter().zip(rj).zip(k0..j) {
                    s -= li * lj * diag[k];
                }
                tmp[j - fi] = s;
                lower[start[i] + j - fi] = s / diag[j];
            }
            let mut d = aii[i];
            for (t, l) in tmp.iter().zip(&lower[start[i]..start[i + 1]]) {
                d -= t * l;
            }
            if !(d > 1e-14 * aii[i].abs()) {
                return Err(PivotBreakdown { row: i, pivot: d });
            }
            diag[i] = d;
        }
        Ok(SkylineLdl {
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b[..n].to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (l, v) in row.iter().zip(x[fi..i].iter_mut()) {
                *v -= l * xi;
            }
        }
        x
    }
}

/// Symmetric permutation `P A Pᵀ` with `perm[new] = old`.
pub fn permute_symmetric(a: &CsrMatrix, perm: &[usize]) -> CsrMatrix {
    let mut inv = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut trip = Vec::with_capacity(a.nnz());
    for (new_i, &old_i) in perm.iter().enumerate() {
        for (old_j, v) in a.row(old_i) {
            trip.push((new_i, inv[old_j], v));
        }
    }
    CsrMatrix::from_triplets(a.dim(), &trip)
}
