//! Newton solver for the nonlinear elliptic problems of the implicit pressure
//! stage.
//!
//! Both problems have the form
//!
//! ```text
//! a(u_i) - sum_links c_l (b(u_j) - b(u_i)) = phi_i
//! ```
//!
//! * pi-variable: `u = pi`, `a = Z(pi)`, `b = pi`, stride-2 links in each
//!   direction weighted by `Z/rho` at the midpoint cell;
//! * rho-variable: `u = rho`, `a = rho`, `b = pi_eps(rho / rho_star)`,
//!   stride-1 (compact Laplacian) links.
//!
//! Each Newton correction solves `(diag(a'/b') - A) y = -r` and sets
//! `delta = y / b'`; the matrix is an M-matrix, symmetric except next to
//! outflow windows.

use crate::eos::{PressureLaw, SINGULARITY_GUARD};
use crate::grid::{ghost_source, FieldKind, GhostSource, Grid, Padded};
use crate::linalg::{bicgstab, pcg, rcm_ordering, BandedLu, CsrMatrix, LinearError};
use thiserror::Error;

/// Smallest pressure kept by the iteration; `Z'(pi)` is unbounded at zero.
const PI_MIN: f64 = 1e-280;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("Newton did not converge after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    NotConverged(NewtonReport),
    #[error("linear solve failed: {0:?}")]
    Linear(LinearError),
    #[error("Newton update produced a negative pressure at cell {cell} (iteration {iteration})")]
    NegativePressure { cell: usize, iteration: usize },
    #[error("field length {got} does not match the {expected} grid cells")]
    Shape { got: usize, expected: usize },
    #[error("a non-periodic axis needs at least {0} cells for this stencil")]
    TooFewCells(usize),
    #[error("non-finite residual")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnknownKind {
    Pi,
    Rho { rho_star: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stencil {
    /// Centred gradient of a centred divergence; `weights` (`Z / rho`) need
    /// at least one ghost layer.
    Stride2 { weights: Padded },
    /// Compact Laplacian.
    Stride1,
}

/// One nonlinear system. `kx`, `ky` are the stencil scalings
/// (e.g. `dt^2 / (4 dx^2)` for the first-order pressure stage).
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem {
    pub kind: UnknownKind,
    pub stencil: Stencil,
    pub kx: f64,
    pub ky: f64,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Stop with [`EllipticError::NegativePressure`] instead of projecting.
    pub abort_on_negative: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-10,
            tol_rel: 1e-12,
            max_iter: 100,
            abort_on_negative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm of the final residual.
    pub residual: f64,
    pub converged: bool,
    /// Number of cell updates that had to be projected back into the domain.
    pub projections: usize,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Cell(usize),
    Fixed(f64),
}

/// Links of every interior cell, flattened.
struct Links {
    start: Vec<usize>,
    items: Vec<(Target, f64)>,
}

fn build_links(grid: &Grid, law: &PressureLaw, p: &EllipticProblem) -> Result<Links, EllipticError> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let stride = match p.stencil {
        Stencil::Stride2 { .. } => 2,
        Stencil::Stride1 => 1,
    };
    if !grid.is_periodic_x() && nx < stride {
        return Err(EllipticError::TooFewCells(stride));
    }
    if grid.dim() == 2 && !grid.is_periodic_y() && ny < stride {
        return Err(EllipticError::TooFewCells(stride));
    }
    let kind = FieldKind::Pi(*law);
    let s = stride as isize;
    let mut start = Vec::with_capacity(nx * ny + 1);
    let mut items = Vec::with_capacity(nx * ny * 4);
    let target = |i: isize, j: isize| -> Target {
        if i >= 0 && i < nx as isize && j >= 0 && j < ny as isize {
            Target::Cell(grid.idx(i as usize, j as usize))
        } else {
            match ghost_source(grid, &kind, i, j) {
                GhostSource::Cell { k, .. } => Target::Cell(k),
                GhostSource::Fixed(v) => Target::Fixed(v),
            }
        }
    };
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            start.push(items.len());
            let mut dirs: Vec<(isize, isize, f64)> = vec![(1, 0, p.kx), (-1, 0, p.kx)];
            if grid.dim() == 2 {
                dirs.push((0, 1, p.ky));
                dirs.push((0, -1, p.ky));
            }
            for (di, dj, k) in dirs {
                let coef = match &p.stencil {
                    Stencil::Stride2 { weights } => k * weights.at(i + di, j + dj),
                    Stencil::Stride1 => k,
                };
                items.push((target(i + s * di, j + s * dj), coef));
            }
        }
    }
    start.push(items.len());
    Ok(Links { start, items })
}

/// `a`, `a'`, `b`, `b'` of one unknown.
#[inline]
fn maps(law: &PressureLaw, kind: &UnknownKind, k: usize, u: f64) -> (f64, f64, f64, f64) {
    match kind {
        UnknownKind::Pi => {
            let pi = u.max(PI_MIN);
            (law.z_of_pi(u.max(0.0)), law.dz_dpi(pi), u, 1.0)
        }
        UnknownKind::Rho { rho_star } => {
            let rs = rho_star[k];
            let z = u / rs;
            (u, 1.0, law.pi(z), (law.dpi(z) / rs).max(1e-300))
        }
    }
}

fn residual(law: &PressureLaw, p: &EllipticProblem, links: &Links, u: &[f64], out: &mut [f64]) {
    let b: Vec<f64> = (0..u.len()).map(|k| maps(law, &p.kind, k, u[k]).2).collect();
    for k in 0..u.len() {
        let a = maps(law, &p.kind, k, u[k]).0;
        let mut lap = 0.0;
        for &(t, c) in &links.items[links.start[k]..links.start[k + 1]] {
            let bt = match t {
                Target::Cell(m) => b[m],
                Target::Fixed(v) => v,
            };
            lap += c * (bt - b[k]);
        }
        out[k] = a - lap - p.rhs[k];
    }
}

fn check(grid: &Grid, p: &EllipticProblem, guess: &[f64]) -> Result<(), EllipticError> {
    let n = grid.n_cells();
    for len in [p.rhs.len(), guess.len()] {
        if len != n {
            return Err(EllipticError::Shape { got: len, expected: n });
        }
    }
    if let UnknownKind::Rho { rho_star } = &p.kind {
        if rho_star.len() != n {
            return Err(EllipticError::Shape {
                got: rho_star.len(),
                expected: n,
            });
        }
    }
    Ok(())
}

/// Residual of the discrete system at `candidate` (no ghost handling needed
/// from the caller; boundaries follow the grid).
pub fn apply_discrete_operator(
    grid: &Grid,
    law: &PressureLaw,
    problem: &EllipticProblem,
    candidate: &[f64],
) -> Result<Vec<f64>, EllipticError> {
    check(grid, problem, candidate)?;
    let links = build_links(grid, law, problem)?;
    let mut r = vec![0.0; candidate.len()];
    residual(law, problem, &links, candidate, &mut r);
    Ok(r)
}

/// Constant-structure part of the Newton matrix, `-A`, with a diagonal slot
/// for every row.
struct JacobianPattern {
    base: CsrMatrix,
    /// Position of each row's diagonal entry in `base.vals`.
    diag_pos: Vec<usize>,
    /// Ordering for the direct solver (`perm[new] = old`), if used.
    perm: Option<Vec<usize>>,
    symmetric: bool,
}

impl JacobianPattern {
    fn new(n: usize, links: &Links, direct: bool) -> Self {
        let mut t = Vec::with_capacity(links.items.len() + n);
        for k in 0..n {
            t.push((k, k, 0.0));
            for &(target, c) in &links.items[links.start[k]..links.start[k + 1]] {
                match target {
                    Target::Cell(m) if m == k => {}
                    Target::Cell(m) => {
                        t.push((k, k, c));
                        t.push((k, m, -c));
                    }
                    Target::Fixed(_) => t.push((k, k, c)),
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let symmetric = a.is_symmetric(1e-14);
        let (base, perm) = if direct {
            let perm = rcm_ordering(&a);
            (a.permuted(&perm), Some(perm))
        } else {
            (a, None)
        };
        let mut diag_pos = vec![0; n];
        let mut inv = vec![0; n];
        match &perm {
            Some(p) => p.iter().enumerate().for_each(|(new, &old)| inv[old] = new),
            None => (0..n).for_each(|k| inv[k] = k),
        }
        for k in 0..n {
            let r = inv[k];
            let row = base.row_ptr[r]..base.row_ptr[r + 1];
            let off = base.cols[row.clone()].binary_search(&r).expect("diagonal slot");
            diag_pos[k] = row.start + off;
        }
        Self {
            base,
            diag_pos,
            perm,
            symmetric,
        }
    }

    fn solve(&self, extra_diag: &[f64], rhs: &[f64]) -> Result<Vec<f64>, LinearError> {
        let mut m = self.base.clone();
        for (k, d) in extra_diag.iter().enumerate() {
            m.vals[self.diag_pos[k]] += d;
        }
        debug_assert!(m.is_diagonally_dominant(), "Newton matrix lost diagonal dominance");
        match &self.perm {
            Some(perm) => {
                let lu = BandedLu::factor(&m)?;
                let mut pb: Vec<f64> = perm.iter().map(|&old| rhs[old]).collect();
                lu.solve(&mut pb);
                let mut x = vec![0.0; rhs.len()];
                for (new, &old) in perm.iter().enumerate() {
                    x[old] = pb[new];
                }
                Ok(x)
            }
            None => {
                let max_iter = 20 * rhs.len().max(50);
                if self.symmetric {
                    pcg(&m, rhs, 1e-13, max_iter)
                } else {
                    bicgstab(&m, rhs, 1e-13, max_iter)
                }
            }
        }
    }
}

/// Projects a raw Newton update back into the admissible set.
fn project(
    kind: &UnknownKind,
    k: usize,
    old: f64,
    raw: f64,
    opts: &NewtonOptions,
    iteration: usize,
    count: &mut usize,
) -> Result<f64, EllipticError> {
    match kind {
        UnknownKind::Pi => {
            if raw >= 0.0 {
                return Ok(raw.max(PI_MIN));
            }
            if opts.abort_on_negative {
                return Err(EllipticError::NegativePressure { cell: k, iteration });
            }
            *count += 1;
            Ok((0.1 * old).max(PI_MIN))
        }
        UnknownKind::Rho { rho_star } => {
            let top = rho_star[k] * (1.0 - 1e3 * SINGULARITY_GUARD);
            if raw > 0.0 && raw < top {
                return Ok(raw);
            }
            *count += 1;
            if raw <= 0.0 || raw.is_nan() {
                Ok(0.1 * old)
            } else {
                Ok(old + 0.5 * (top - old))
            }
        }
    }
}

/// Starting point for the pressure unknown from a density fraction.
pub fn pi_warm_start(law: &PressureLaw, z: f64) -> f64 {
    law.pi(z.clamp(0.0, 1.0 - 1e-12)).max(PI_MIN)
}

/// Solves the problem by projected Newton iterations from `initial_guess`.
pub fn solve_newton(
    grid: &Grid,
    law: &PressureLaw,
    problem: &EllipticProblem,
    initial_guess: &[f64],
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, NewtonReport), EllipticError> {
    check(grid, problem, initial_guess)?;
    let n = grid.n_cells();
    let links = build_links(grid, law, problem)?;
    let pattern = JacobianPattern::new(n, &links, grid.dim() == 1);
    let mut u: Vec<f64> = initial_guess
        .iter()
        .enumerate()
        .map(|(k, &v)| match &problem.kind {
            UnknownKind::Pi => v.max(PI_MIN),
            UnknownKind::Rho { rho_star } => v.clamp(1e-300, rho_star[k] * (1.0 - 1e-12)),
        })
        .collect();
    let mut r = vec![0.0; n];
    let mut r0 = 0.0;
    let mut projections = 0;
    let mut diag = vec![0.0; n];
    let mut bprime = vec![0.0; n];
    for it in 0..=opts.max_iter {
        residual(law, problem, &links, &u, &mut r);
        let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !rn.is_finite() {
            return Err(EllipticError::NonFinite);
        }
        if it == 0 {
            r0 = rn;
        }
        let report = NewtonReport {
            iterations: it,
            residual: rn,
            converged: rn <= opts.tol_abs || rn <= opts.tol_rel * r0,
            projections,
        };
        if report.converged {
            return Ok((u, report));
        }
        if it == opts.max_iter {
            return Err(EllipticError::NotConverged(report));
        }
        for k in 0..n {
            let (_, da, _, db) = maps(law, &problem.kind, k, u[k]);
            diag[k] = da / db;
            bprime[k] = db;
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let y = pattern.solve(&diag, &rhs).map_err(EllipticError::Linear)?;
        for k in 0..n {
            let raw = u[k] + y[k] / bprime[k];
            u[k] = project(&problem.kind, k, u[k], raw, opts, it + 1, &mut projections)?;
        }
    }
    unreachable!("loop returns on the last iteration")
}
