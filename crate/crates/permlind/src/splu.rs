//! Sparse complex LU factorization (left-looking, partial pivoting) with a
//! reverse Cuthill-McKee column preordering and explicit operation counters.
//!
//! This backs the steady-state solve; the counters let runs compare the
//! factorization cost against time-stepping in matrix-vector-product
//! equivalents.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Error, Debug, PartialEq)]
pub enum LuError {
    #[error("matrix is singular at column {0}")]
    Singular(usize),
}

/// Compressed sparse column storage.
#[derive(Clone, Debug)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<C64>,
}

impl CscMatrix {
    /// Build from unsorted triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut it = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != C64::new(0.0, 0.0) {
                col_ptr[c + 1] += 1;
                row_idx.push(r);
                vals.push(v);
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self { n, col_ptr, row_idx, vals }
    }

    /// Symmetric permutation `A(p, p)`: entry (r, c) moves to
    /// (pos[r], pos[c]) where `pos` is the inverse of `perm`.
    pub fn permuted(&self, perm: &[usize]) -> CscMatrix {
        let mut pos = vec![0usize; self.n];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let mut triplets = Vec::with_capacity(self.vals.len());
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                triplets.push((pos[self.row_idx[k]], pos[c], self.vals[k]));
            }
        }
        CscMatrix::from_triplets(self.n, triplets)
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized nonzero pattern;
/// deterministic (neighbors visited in ascending index, components seeded by
/// the minimum-degree unvisited node).
pub fn reverse_cuthill_mckee(a: &CscMatrix) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..n {
        for k in a.col_ptr[c]..a.col_ptr[c + 1] {
            let r = a.row_idx[k];
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i));
        let Some(seed) = seed else { break };
        visited[seed] = true;
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree[v], v));
            for v in next {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// LU factors of a (column-preordered) matrix with row partial pivoting.
pub struct SparseLu {
    n: usize,
    /// Unit lower-triangular factor, columns in pivot order, diagonal
    /// implicit; row indices are pivot positions.
    l_col_ptr: Vec<usize>,
    l_rows: Vec<usize>,
    l_vals: Vec<C64>,
    /// Upper factor, columns in pivot order including the diagonal last.
    u_col_ptr: Vec<usize>,
    u_rows: Vec<usize>,
    u_vals: Vec<C64>,
    /// pivot position of each original row
    row_pos: Vec<usize>,
    /// complex multiply-adds spent in numeric elimination
    pub factor_ops: u64,
}

/// Factor `a` with partial pivoting. Columns are taken in natural order, so
/// apply a fill-reducing permutation beforehand (see
/// [`reverse_cuthill_mckee`] and [`CscMatrix::permuted`]).
pub fn factor(a: &CscMatrix) -> Result<SparseLu, LuError> {
    let n = a.n;
    let mut lu = SparseLu {
        n,
        l_col_ptr: vec![0],
        l_rows: Vec::new(),
        l_vals: Vec::new(),
        u_col_ptr: vec![0],
        u_rows: Vec::new(),
        u_vals: Vec::new(),
        row_pos: vec![usize::MAX; n],
        factor_ops: 0,
    };
    // columns of L indexed by pivot position, for the triangular solve
    let mut l_by_pivot: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    let mut pivot_row_of: Vec<usize> = vec![usize::MAX; n];

    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut on_stack = vec![false; n];

    for j in 0..n {
        // sparse triangular solve L x = A(:, j): depth-first search gives the
        // reach of the column pattern in topological order
        pattern.clear();
        for k in a.col_ptr[j]..a.col_ptr[j + 1] {
            let r = a.row_idx[k];
            if !on_stack[r] {
                dfs_reach(r, &lu.row_pos, &l_by_pivot, &mut on_stack, &mut stack, &mut pattern);
            }
        }
        for k in a.col_ptr[j]..a.col_ptr[j + 1] {
            x[a.row_idx[k]] = a.vals[k];
        }
        // pattern is in reverse topological order: process pivoted nodes from
        // the back so dependencies resolve first
        for idx in (0..pattern.len()).rev() {
            let r = pattern[idx];
            let p = lu.row_pos[r];
            if p == usize::MAX {
                continue;
            }
            let xr = x[r];
            if xr == C64::new(0.0, 0.0) {
                continue;
            }
            for &(row, lval) in &l_by_pivot[p] {
                x[row] -= lval * xr;
            }
            lu.factor_ops += l_by_pivot[p].len() as u64;
        }
        // split into U (pivoted rows) and pivot candidates
        let mut pivot_row = usize::MAX;
        let mut pivot_mag = 0.0f64;
        for &r in &pattern {
            if lu.row_pos[r] == usize::MAX {
                let mag = x[r].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
        }
        if pivot_row == usize::MAX || pivot_mag == 0.0 {
            return Err(LuError::Singular(j));
        }
        let pivot_val = x[pivot_row];
        for &r in &pattern {
            let p = lu.row_pos[r];
            if p != usize::MAX {
                if x[r] != C64::new(0.0, 0.0) {
                    lu.u_rows.push(p);
                    lu.u_vals.push(x[r]);
                }
            }
        }
        lu.u_rows.push(j);
        lu.u_vals.push(pivot_val);
        lu.u_col_ptr.push(lu.u_rows.len());

        lu.row_pos[pivot_row] = j;
        pivot_row_of[j] = pivot_row;
        for &r in &pattern {
            if lu.row_pos[r] == usize::MAX && x[r] != C64::new(0.0, 0.0) {
                let lval = x[r] / pivot_val;
                lu.l_rows.push(r);
                lu.l_vals.push(lval);
                l_by_pivot[j].push((r, lval));
                lu.factor_ops += 1;
            }
        }
        lu.l_col_ptr.push(lu.l_rows.len());
        for &r in &pattern {
            x[r] = C64::new(0.0, 0.0);
            on_stack[r] = false;
        }
    }
    // convert L row indices from original rows to pivot positions
    for v in &mut lu.l_rows {
        *v = lu.row_pos[*v];
    }
    Ok(lu)
}

fn dfs_reach(
    start: usize,
    row_pos: &[usize],
    l_by_pivot: &[Vec<(usize, C64)>],
    on_stack: &mut [bool],
    stack: &mut Vec<(usize, usize)>,
    pattern: &mut Vec<usize>,
) {
    stack.push((start, 0));
    on_stack[start] = true;
    while let Some(&(node, child_idx)) = stack.last() {
        let p = row_pos[node];
        let children: &[(usize, C64)] = if p == usize::MAX { &[] } else { &l_by_pivot[p] };
        if child_idx < children.len() {
            stack.last_mut().unwrap().1 += 1;
            let next = children[child_idx].0;
            if !on_stack[next] {
                on_stack[next] = true;
                stack.push((next, 0));
            }
        } else {
            pattern.push(node);
            stack.pop();
        }
    }
}

impl SparseLu {
    pub fn nnz_l(&self) -> usize {
        self.l_rows.len()
    }

    pub fn nnz_u(&self) -> usize {
        self.u_rows.len()
    }

    /// Complex multiply-adds of one forward+backward substitution.
    pub fn solve_ops(&self) -> u64 {
        (self.nnz_l() + self.nnz_u()) as u64
    }

    /// Solve `A x = b` using the stored factors.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        // y in pivot positions: y = L^{-1} P b
        let mut y = vec![C64::new(0.0, 0.0); n];
        for r in 0..n {
            y[self.row_pos[r]] = b[r];
        }
        for j in 0..n {
            let yj = y[j];
            if yj == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.l_col_ptr[j]..self.l_col_ptr[j + 1] {
                y[self.l_rows[k]] -= self.l_vals[k] * yj;
            }
        }
        // back substitution U x = y; the diagonal is the last entry per column
        let mut x = y;
        for j in (0..n).rev() {
            let lo = self.u_col_ptr[j];
            let hi = self.u_col_ptr[j + 1];
            let diag = self.u_vals[hi - 1];
            let xj = x[j] / diag;
            x[j] = xj;
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for k in lo..hi - 1 {
                x[self.u_rows[k]] -= self.u_vals[k] * xj;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// dense partial-pivot elimination as an independent check
    fn dense_solve(n: usize, a: &[Vec<C64>], b: &[C64]) -> Option<Vec<C64>> {
        let mut m: Vec<Vec<C64>> = a.to_vec();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                m[i][col].norm().partial_cmp(&m[j][col].norm()).unwrap()
            })?;
            if m[piv][col].norm() == 0.0 {
                return None;
            }
            m.swap(col, piv);
            rhs.swap(col, piv);
            for row in col + 1..n {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    let sub = f * m[col][k];
                    m[row][k] -= sub;
                }
                let sub = f * rhs[col];
                rhs[row] -= sub;
            }
        }
        let mut x = vec![c(0.0, 0.0); n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in row + 1..n {
                acc -= m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        Some(x)
    }

    fn random_sparse(n: usize, seed: &mut u64) -> (Vec<(usize, usize, C64)>, Vec<Vec<C64>>) {
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (*seed >> 33) as f64 / (1u64 << 31) as f64
        };
        let mut triplets = Vec::new();
        let mut dense = vec![vec![c(0.0, 0.0); n]; n];
        for i in 0..n {
            // guaranteed nonzero diagonal keeps the test matrices regular
            let v = c(1.0 + next(), next() - 0.5);
            triplets.push((i, i, v));
            dense[i][i] += v;
            for _ in 0..3 {
                let j = (next() * n as f64) as usize % n;
                let v = c(next() - 0.5, next() - 0.5);
                triplets.push((i, j, v));
                dense[i][j] += v;
            }
        }
        (triplets, dense)
    }

    #[test]
    fn lu_matches_dense_elimination() {
        let mut seed = 0x3c6ef372fe94f82bu64;
        for trial in 0..20 {
            let n = 5 + (trial % 7) * 9;
            let (triplets, dense) = random_sparse(n, &mut seed);
            let a = CscMatrix::from_triplets(n, triplets);
            let lu = factor(&a).unwrap();
            let b: Vec<C64> = (0..n).map(|i| c(i as f64 + 1.0, -(i as f64))).collect();
            let x = lu.solve(&b);
            let x_ref = dense_solve(n, &dense, &b).unwrap();
            for i in 0..n {
                assert!(
                    (x[i] - x_ref[i]).norm() < 1e-9,
                    "trial {trial} row {i}: {} vs {}",
                    x[i],
                    x_ref[i]
                );
            }
        }
    }

    #[test]
    fn lu_with_rcm_matches_plain() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let (triplets, dense) = random_sparse(40, &mut seed);
        let a = CscMatrix::from_triplets(40, triplets);
        let perm = reverse_cuthill_mckee(&a);
        let ap = a.permuted(&perm);
        let lu = factor(&ap).unwrap();
        let b: Vec<C64> = (0..40).map(|i| c(1.0, i as f64 * 0.1)).collect();
        let bp: Vec<C64> = perm.iter().map(|&old| b[old]).collect();
        let xp = lu.solve(&bp);
        let mut x = vec![c(0.0, 0.0); 40];
        for (new, &old) in perm.iter().enumerate() {
            x[old] = xp[new];
        }
        let x_ref = dense_solve(40, &dense, &b).unwrap();
        for i in 0..40 {
            assert!((x[i] - x_ref[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        // column 1 is identically zero
        let triplets = vec![(0, 0, c(1.0, 0.0)), (2, 2, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))];
        let a = CscMatrix::from_triplets(3, triplets);
        assert!(matches!(factor(&a), Err(LuError::Singular(_))));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // anti-diagonal permutation matrix, singular without row pivoting
        let triplets = vec![
            (2, 0, c(1.0, 0.0)),
            (1, 1, c(1.0, 0.0)),
            (0, 2, c(2.0, 0.0)),
        ];
        let a = CscMatrix::from_triplets(3, triplets);
        let lu = factor(&a).unwrap();
        let x = lu.solve(&[c(2.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        assert!((x[0] - c(5.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((x[2] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ops_are_counted() {
        let mut seed = 7u64;
        let (triplets, _) = random_sparse(30, &mut seed);
        let a = CscMatrix::from_triplets(30, triplets);
        let lu = factor(&a).unwrap();
        assert!(lu.factor_ops > 0);
        assert_eq!(lu.solve_ops(), (lu.nnz_l() + lu.nnz_u()) as u64);
    }
}
