//! Sparse linear algebra for the Newton corrections: CSR storage, reverse
//! Cuthill-McKee ordering with banded LU, and Krylov solvers.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearError {
    /// Zero pivot during banded elimination.
    ZeroPivot(usize),
    /// Krylov iteration did not reach the tolerance.
    NotConverged { iterations: usize, relative_residual: f64 },
    Breakdown,
}

/// Compressed sparse row matrix with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().cloned().zip(self.vals[a..b].iter().cloned())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.cols[a..b].binary_search(&c) {
            Ok(p) => self.vals[a + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[r] = s;
        }
    }

    /// Exact structural and numerical symmetry up to `tol * max|a_ij|`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..self.n).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol * scale))
    }

    /// Largest `|i - j|` over the stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, _)| r.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }

    /// `P A P^T` for the ordering `perm` (new index -> old index).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = Vec::with_capacity(self.vals.len());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                t.push((inv[r], inv[c], v));
            }
        }
        Self::from_triplets(self.n, t)
    }

    /// Strict row diagonal dominance `|a_ii| >= sum_{j != i} |a_ij|`.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.n).all(|r| {
            let mut off = 0.0;
            let mut d = 0.0;
            for (c, v) in self.row(r) {
                if c == r {
                    d = v.abs();
                } else {
                    off += v.abs();
                }
            }
            d >= off * (1.0 - 1e-12)
        })
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for (c, _) in a.row(r) {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    loop {
        // Start each component from an unvisited node of minimal degree.
        let start = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| adj[v].len());
        let Some(s) = start else { break };
        visited[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().cloned().filter(|&u| !visited[u]).collect();
            nb.sort_by_key(|&u| adj[u].len());
            for u in nb {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// LU factors of a banded matrix, no pivoting. Row `i` stores columns
/// `i - bw ..= i + bw` at offsets `0 ..= 2 bw`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self, LinearError> {
        let n = a.n;
        let bw = a.bandwidth();
        let w = 2 * bw + 1;
        let mut band = vec![0.0; n * w];
        for r in 0..n {
            for (c, v) in a.row(r) {
                band[r * w + (c + bw - r)] = v;
            }
        }
        for k in 0..n {
            let piv = band[k * w + bw];
            if piv == 0.0 || !piv.is_finite() {
                return Err(LinearError::ZeroPivot(k));
            }
            for i in k + 1..(k + bw + 1).min(n) {
                let lik_pos = i * w + (k + bw - i);
                let l = band[lik_pos] / piv;
                if l == 0.0 {
                    continue;
                }
                band[lik_pos] = l;
                for j in k + 1..(k + bw + 1).min(n) {
                    let ukj = band[k * w + (j + bw - k)];
                    band[i * w + (j + bw - i)] -= l * ukj;
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, 2 * self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..(i + bw + 1).min(n) {
                s -= self.band[i * w + (j + bw - i)] * b[j];
            }
            b[i] = s / self.band[i * w + bw];
        }
    }
}

/// Direct solve through RCM reordering and banded LU.
pub fn solve_banded(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinearError> {
    let perm = rcm_ordering(a);
    let pa = a.permuted(&perm);
    let lu = BandedLu::factor(&pa)?;
    let mut pb: Vec<f64> = perm.iter().map(|&old| b[old]).collect();
    lu.solve(&mut pb);
    let mut x = vec![0.0; a.n];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = pb[new];
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn pcg(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>, LinearError> {
    let n = a.n;
    let inv_d: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == 0.0 || !pap.is_finite() {
            return Err(LinearError::Breakdown);
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let res = norm(&r) / bnorm;
        if res <= rel_tol {
            return Ok(x);
        }
        if it + 1 == max_iter {
            return Err(LinearError::NotConverged {
                iterations: max_iter,
                relative_residual: res,
            });
        }
        for k in 0..n {
            z[k] = r[k] * inv_d[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(LinearError::NotConverged {
        iterations: max_iter,
        relative_residual: norm(&r) / bnorm,
    })
}

/// Jacobi-preconditioned BiCGSTAB from a zero initial guess.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>, LinearError> {
    let n = a.n;
    let inv_d: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&inv_d).map(|(v, d)| v * d).collect() };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            return Err(LinearError::Breakdown);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let ph = precond(&p);
        a.matvec(&ph, &mut v);
        alpha = rho / dot(&r0, &v);
        let s: Vec<f64> = (0..n).map(|k| r[k] - alpha * v[k]).collect();
        if norm(&s) / bnorm <= rel_tol {
            for k in 0..n {
                x[k] += alpha * ph[k];
            }
            return Ok(x);
        }
        let sh = precond(&s);
        a.matvec(&sh, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(LinearError::Breakdown);
        }
        omega = dot(&t, &s) / tt;
        for k in 0..n {
            x[k] += alpha * ph[k] + omega * sh[k];
            r[k] = s[k] - omega * t[k];
        }
        if norm(&r) / bnorm <= rel_tol {
            return Ok(x);
        }
        if omega == 0.0 {
            return Err(LinearError::Breakdown);
        }
    }
    Err(LinearError::NotConverged {
        iterations: max_iter,
        relative_residual: norm(&r) / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let mut y = vec![0.0; a.n];
        a.matvec(x, &mut y);
        y.iter().zip(b).map(|(y, b)| (y - b).abs()).fold(0.0, f64::max)
    }

    /// Periodic stride-2 operator of the kind produced by the pressure solve.
    fn stride2_periodic(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let c = 0.3 + 0.1 * (i % 3) as f64;
            t.push((i, i, 1.5 + 2.0 * c));
            t.push((i, (i + 2) % n, -c));
            t.push((i, (i + n - 2) % n, -c));
        }
        // symmetrize the coefficient pattern
        let a = CsrMatrix::from_triplets(n, t);
        let mut s = Vec::new();
        for r in 0..n {
            for (c, v) in a.row(r) {
                s.push((r, c, 0.5 * v));
                s.push((c, r, 0.5 * v));
            }
        }
        CsrMatrix::from_triplets(n, s)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert!(!a.is_symmetric(0.0));
    }

    #[test]
    fn rcm_reduces_periodic_stride2_bandwidth() {
        let a = stride2_periodic(40);
        assert_eq!(a.bandwidth(), 38);
        let p = rcm_ordering(&a);
        assert!(a.permuted(&p).bandwidth() <= 2);
    }

    #[test]
    fn banded_direct_solve() {
        let a = stride2_periodic(41);
        let b: Vec<f64> = (0..41).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = solve_banded(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-13);
    }

    #[test]
    fn krylov_solvers_agree_with_direct() {
        let a = stride2_periodic(64);
        let b: Vec<f64> = (0..64).map(|i| 1.0 + (i as f64).cos()).collect();
        let xd = solve_banded(&a, &b).unwrap();
        let xc = pcg(&a, &b, 1e-13, 500).unwrap();
        let xb = bicgstab(&a, &b, 1e-13, 500).unwrap();
        for k in 0..64 {
            assert!((xd[k] - xc[k]).abs() < 1e-11);
            assert!((xd[k] - xb[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn bicgstab_nonsymmetric() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, i - 1, -1.5));
            }
            if i + 1 < n {
                t.push((i, i + 1, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        assert!(!a.is_symmetric(1e-14));
        let b = vec![1.0; n];
        let x = bicgstab(&a, &b, 1e-13, 200).unwrap();
        assert!(residual(&a, &x, &b) < 1e-11);
        let y = solve_banded(&a, &b).unwrap();
        assert!(residual(&a, &y, &b) < 1e-13);
    }

    #[test]
    fn zero_pivot_reported() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(BandedLu::factor(&a), Err(LinearError::ZeroPivot(_))));
    }
}
