//! The (rho, q) method with semi-Lagrangian transport of the congestion
//! density.
//!
//! `(rho, q)` follow the finite-volume fluxes of [`crate::scheme_zq`] with an
//! implicit pressure obtained from a density-variable elliptic problem
//!
//! ```text
//! rho - k * lap_h pi_eps(rho / rho_star) = phi
//! ```
//!
//! whose compact Laplacian doubles as the pressure part of the mass flux, so
//! mass is conserved to round-off. The congestion density is then carried
//! along the characteristics of `v = q / rho` and Lagrange-interpolated.

use crate::elliptic::{solve_newton, EllipticError, EllipticProblem, NewtonOptions, Stencil, UnknownKind};
use crate::eos::PressureLaw;
use crate::grid::{fill_ghosts, FieldKind, Grid, GridState, Padded, DENSITY_FLOOR};
use crate::scheme_zq::{
    axpy, centred_diff, check_state, cfl_number, explicit_fluxes, ExplicitTerms,
    SchemeConfig, SchemeError, StepReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemiLagConfig {
    /// Interpolation half-width: `2r + 2` nodes, accuracy `2r + 1`.
    pub r: u8,
    /// 1: Euler foot, 2: Taylor foot.
    pub time_order: u8,
}

impl SemiLagConfig {
    pub fn new(r: u8, time_order: u8) -> Result<Self, SchemeError> {
        if r > 1 || !matches!(time_order, 1 | 2) {
            return Err(SchemeError::Config(format!(
                "semi-Lagrangian half-width {r} / time order {time_order} unsupported"
            )));
        }
        Ok(Self { r, time_order })
    }
}

/// Relaxation of the momentum towards `rho * w`, with `w` the unit vector
/// pointing at `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationConfig {
    pub beta: f64,
    pub target: [f64; 2],
}

impl RelaxationConfig {
    /// Exit centre at `(0.5, 0)`.
    pub fn new(beta: f64) -> Result<Self, SchemeError> {
        if !(beta > 0.0) {
            return Err(SchemeError::Config(format!("relaxation time {beta} must be positive")));
        }
        Ok(Self {
            beta,
            target: [0.5, 0.0],
        })
    }

    /// Unit vector towards the target; zero on it.
    pub fn desired_velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let (dx, dy) = (self.target[0] - x, self.target[1] - y);
        let n = dx.hypot(dy);
        if n == 0.0 {
            [0.0, 0.0]
        } else {
            [dx / n, dy / n]
        }
    }
}

/// Implicit relaxation stage `q = (q* + (dt/beta) rho w) / (1 + dt/beta)`.
pub fn relaxation_update(
    q_star: [&[f64]; 2],
    rho_next: &[f64],
    rc: &RelaxationConfig,
    grid: &Grid,
    dt: f64,
) -> [Vec<f64>; 2] {
    let a = dt / rc.beta;
    let n = grid.n_cells();
    let mut out = [vec![0.0; n], vec![0.0; n]];
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let w = rc.desired_velocity(grid.x_center(i), grid.y_center(j));
            for d in 0..grid.dim() {
                out[d][k] = (q_star[d][k] + a * rho_next[k] * w[d]) / (1.0 + a);
            }
        }
    }
    out
}

/// Weights of the `2r + 2` Lagrange nodes at offsets `-r..=r + 1`, evaluated
/// at `t` in `[0, 1]` between the nodes 0 and 1.
fn lagrange_weights(t: f64, r: usize, out: &mut [f64; 4]) {
    let m = 2 * r + 2;
    for a in 0..m {
        let oa = a as f64 - r as f64;
        let mut l = 1.0;
        for b in 0..m {
            if b != a {
                let ob = b as f64 - r as f64;
                l *= (t - ob) / (oa - ob);
            }
        }
        out[a] = l;
    }
}

/// Cell `i` and fraction `t` of a coordinate after wrapping or clamping.
#[inline]
fn locate(x: f64, n: usize, h: f64, periodic: bool) -> (isize, f64) {
    let len = n as f64 * h;
    let x = if periodic { x.rem_euclid(len) } else { x.clamp(0.0, len) };
    let s = x / h - 0.5;
    let i = s.floor();
    (i as isize, s - i)
}

/// Piecewise Lagrange interpolant of a cell-centred field with ghosts
/// extended by the boundary rule of `rho_star`.
pub struct Interpolator<'g> {
    grid: &'g Grid,
    field: Padded,
    r: usize,
}

impl<'g> Interpolator<'g> {
    pub fn new(grid: &'g Grid, values: &[f64], r: u8) -> Result<Self, SchemeError> {
        let field = fill_ghosts(grid, values, FieldKind::RhoStar, r as usize + 2)?;
        Ok(Self {
            grid,
            field,
            r: r as usize,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let g = self.grid;
        let m = 2 * self.r + 2;
        let r = self.r as isize;
        let (i, tx) = locate(x, g.nx(), g.dx(), g.is_periodic_x());
        let mut wx = [0.0; 4];
        lagrange_weights(tx, self.r, &mut wx);
        let row = |j: isize| -> f64 { (0..m).map(|a| wx[a] * self.field.at(i - r + a as isize, j)).sum() };
        if g.dim() == 1 {
            return row(0);
        }
        let (j, ty) = locate(y, g.ny(), g.dy(), g.is_periodic_y());
        let mut wy = [0.0; 4];
        lagrange_weights(ty, self.r, &mut wy);
        (0..m).map(|b| wy[b] * row(j - r + b as isize)).sum()
    }
}

/// One-off interpolation of `values` at `(x, y)` (`y` ignored in 1D).
pub fn lagrange_interpolate(values: &[f64], x: f64, y: f64, grid: &Grid, r: u8) -> Result<f64, SchemeError> {
    Ok(Interpolator::new(grid, values, r)?.eval(x, y))
}

/// Semi-Lagrangian transport of `rho_star` by the cell velocities over `dt`.
pub fn semilag_advect(
    rho_star: &[f64],
    velocity: [&[f64]; 2],
    dt: f64,
    grid: &Grid,
    cfg: &SemiLagConfig,
) -> Result<Vec<f64>, SchemeError> {
    let interp = Interpolator::new(grid, rho_star, cfg.r)?;
    let dims = grid.dim();
    let kinds = [FieldKind::V1, FieldKind::V2];
    let mut vp = Vec::with_capacity(dims);
    for d in 0..dims {
        vp.push(fill_ghosts(grid, velocity[d], kinds[d], 1)?);
    }
    let h = [grid.dx(), grid.dy()];
    let mut out = vec![0.0; grid.n_cells()];
    for j in 0..grid.ny() as isize {
        for i in 0..grid.nx() as isize {
            let k = grid.idx(i as usize, j as usize);
            let v = [velocity[0][k], if dims == 2 { velocity[1][k] } else { 0.0 }];
            let mut foot = [grid.x_center(i as usize) - v[0] * dt, grid.y_center(j as usize) - v[1] * dt];
            if cfg.time_order == 2 {
                // (v . grad) v with upwind differences.
                for d in 0..dims {
                    let mut acc = 0.0;
                    for (e, ve) in v.iter().enumerate().take(dims) {
                        let (di, dj) = if e == 0 { (1, 0) } else { (0, 1) };
                        let c = vp[d].at(i, j);
                        let der = if *ve > 0.0 {
                            (c - vp[d].at(i - di, j - dj)) / h[e]
                        } else {
                            (vp[d].at(i + di, j + dj) - c) / h[e]
                        };
                        acc += ve * der;
                    }
                    foot[d] += 0.5 * dt * dt * acc;
                }
            }
            out[k] = interp.eval(foot[0], foot[1]);
        }
    }
    Ok(out)
}

/// Compact Laplacian of a padded field.
fn laplacian(grid: &Grid, p: &Padded, i: isize, j: isize) -> f64 {
    let c = p.at(i, j);
    let mut l = (p.at(i + 1, j) - 2.0 * c + p.at(i - 1, j)) / (grid.dx() * grid.dx());
    if grid.dim() == 2 {
        l += (p.at(i, j + 1) - 2.0 * c + p.at(i, j - 1)) / (grid.dy() * grid.dy());
    }
    l
}

fn pressure_field(law: &PressureLaw, rho: &[f64], rho_star: &[f64]) -> Vec<f64> {
    rho.iter().zip(rho_star).map(|(r, s)| law.pi(r / s)).collect()
}

/// Density stage: solves `rho - coef * lap pi(rho / rho_star) = phi`, then
/// recomputes `rho` in flux form. Returns `(rho, padded pi)`.
fn density_stage(
    grid: &Grid,
    law: &PressureLaw,
    phi: Vec<f64>,
    coef: f64,
    rho_star: &[f64],
    guess: &[f64],
    opts: &NewtonOptions,
    report: &mut StepReport,
) -> Result<(Vec<f64>, Padded), SchemeError> {
    let problem = EllipticProblem {
        kind: UnknownKind::Rho {
            rho_star: rho_star.to_vec(),
        },
        stencil: Stencil::Stride1,
        kx: coef / (grid.dx() * grid.dx()),
        ky: if grid.dim() == 2 { coef / (grid.dy() * grid.dy()) } else { 0.0 },
        rhs: phi,
    };
    let (sol, rep) = solve_newton(grid, law, &problem, guess, opts)?;
    report.record(&rep);
    let pp = fill_ghosts(grid, &pressure_field(law, &sol, rho_star), FieldKind::Pi(*law), 1)?;
    let mut rho = problem.rhs;
    for j in 0..grid.ny() as isize {
        for i in 0..grid.nx() as isize {
            let k = grid.idx(i as usize, j as usize);
            rho[k] += coef * laplacian(grid, &pp, i, j);
        }
    }
    Ok((rho, pp))
}

/// `rho0 - tau * div_c(q) + tau * div D_rho`.
fn mass_rhs(grid: &Grid, rho0: &[f64], q: [&[f64]; 2], div_d_rho: &[f64], tau: f64) -> Result<Vec<f64>, SchemeError> {
    let kinds = [FieldKind::Q1, FieldKind::Q2];
    let mut qp = Vec::with_capacity(grid.dim());
    for d in 0..grid.dim() {
        qp.push(fill_ghosts(grid, q[d], kinds[d], 1)?);
    }
    let mut phi = vec![0.0; grid.n_cells()];
    for j in 0..grid.ny() as isize {
        for i in 0..grid.nx() as isize {
            let k = grid.idx(i as usize, j as usize);
            let div: f64 = qp.iter().enumerate().map(|(d, p)| centred_diff(grid, p, i, j, d)).sum();
            phi[k] = rho0[k] - tau * div + tau * div_d_rho[k];
        }
    }
    Ok(phi)
}

fn pressure_gradient(grid: &Grid, pp: &Padded) -> [Vec<f64>; 2] {
    let n = grid.n_cells();
    let mut g = [vec![0.0; n], vec![0.0; n]];
    for j in 0..grid.ny() as isize {
        for i in 0..grid.nx() as isize {
            let k = grid.idx(i as usize, j as usize);
            for (d, gd) in g.iter_mut().enumerate().take(grid.dim()) {
                gd[k] = centred_diff(grid, pp, i, j, d);
            }
        }
    }
    g
}

fn velocity(rho: &[f64], q: &[f64]) -> Vec<f64> {
    q.iter().zip(rho).map(|(q, r)| q / r).collect()
}

/// State with `rho_star` replaced and `Z` recomputed.
fn with_rho_star(s: &GridState, rho_star: Vec<f64>) -> GridState {
    let mut w = s.clone();
    w.rho_star = rho_star;
    w.refresh_z();
    w
}

fn finish(
    rho: Vec<f64>,
    q: [Vec<f64>; 2],
    rho_star: Vec<f64>,
    time: f64,
    report: &mut StepReport,
) -> Result<GridState, SchemeError> {
    let [q1, q2] = q;
    let mut s = GridState {
        z: vec![0.0; rho.len()],
        rho,
        q1,
        q2,
        rho_star,
        time,
    };
    s.refresh_z();
    report.floored += s.apply_density_floor();
    if !s.all_finite() {
        return Err(SchemeError::NonFinite);
    }
    Ok(s)
}

fn relax(
    q: [Vec<f64>; 2],
    rho: &[f64],
    relaxation: Option<&RelaxationConfig>,
    grid: &Grid,
    dt: f64,
) -> [Vec<f64>; 2] {
    match relaxation {
        Some(rc) => relaxation_update([&q[0], &q[1]], rho, rc, grid, dt),
        None => q,
    }
}

/// First-order step: density stage, momentum update, optional relaxation,
/// then transport of `rho_star` with `v^{n+1}`.
pub fn step_sl_first_order(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
    sl: &SemiLagConfig,
    relaxation: Option<&RelaxationConfig>,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    cfg.validate()?;
    check_state(grid, state)?;
    let law = cfg.law;
    let mut report = StepReport {
        cfl: cfl_number(cfg, grid, state, dt),
        ..StepReport::default()
    };
    let ex = ExplicitTerms::new(grid, &explicit_fluxes(grid, state, &law, cfg.space_order)?);
    let qbar = [axpy(&state.q1, dt, &ex.div_g[0]), axpy(&state.q2, dt, &ex.div_g[1])];
    let phi = mass_rhs(grid, &state.rho, [&qbar[0], &qbar[1]], &ex.div_d_rho, dt)?;
    let (rho, pp) = density_stage(
        grid,
        &law,
        phi,
        dt * dt,
        &state.rho_star,
        &state.rho,
        &cfg.newton,
        &mut report,
    )?;
    let gp = pressure_gradient(grid, &pp);
    let q = [axpy(&qbar[0], dt, &gp[0]), axpy(&qbar[1], dt, &gp[1])];
    let q = relax(q, &rho, relaxation, grid, dt);
    let rho_safe: Vec<f64> = rho.iter().map(|r| r.max(DENSITY_FLOOR)).collect();
    let v = [velocity(&rho_safe, &q[0]), velocity(&rho_safe, &q[1])];
    let rho_star = semilag_advect(&state.rho_star, [&v[0], &v[1]], dt, grid, sl)?;
    let next = finish(rho, q, rho_star, state.time + dt, &mut report)?;
    Ok((next, report))
}

/// Strang-split second-order step: half transport with `v^n`, RK2CN on
/// `(rho, q)` with `rho_star^{n+1/2}`, half transport with `v^{n+1}`.
pub fn step_sl_second_order(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
    sl: &SemiLagConfig,
    relaxation: Option<&RelaxationConfig>,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    cfg.validate()?;
    check_state(grid, state)?;
    let law = cfg.law;
    let so = cfg.space_order;
    let mut report = StepReport {
        cfl: cfl_number(cfg, grid, state, dt),
        ..StepReport::default()
    };
    let h = 0.5 * dt;
    let v_n = [velocity(&state.rho, &state.q1), velocity(&state.rho, &state.q2)];
    let rs_half = semilag_advect(&state.rho_star, [&v_n[0], &v_n[1]], h, grid, sl)?;
    let work = with_rho_star(state, rs_half.clone());

    // Half step, implicit pressure.
    let ex_n = ExplicitTerms::new(grid, &explicit_fluxes(grid, &work, &law, so)?);
    let qbar = [axpy(&work.q1, h, &ex_n.div_g[0]), axpy(&work.q2, h, &ex_n.div_g[1])];
    let phi = mass_rhs(grid, &work.rho, [&qbar[0], &qbar[1]], &ex_n.div_d_rho, h)?;
    let (rho_h, pp_h) = density_stage(grid, &law, phi, h * h, &rs_half, &work.rho, &cfg.newton, &mut report)?;
    let gp = pressure_gradient(grid, &pp_h);
    let q_h = [axpy(&qbar[0], h, &gp[0]), axpy(&qbar[1], h, &gp[1])];
    let half = finish(rho_h.clone(), q_h, rs_half.clone(), state.time + h, &mut report)?;

    // Full step, Crank-Nicolson pressure.
    let ex_h = ExplicitTerms::new(grid, &explicit_fluxes(grid, &half, &law, so)?);
    let qt = [axpy(&work.q1, h, &ex_h.div_g[0]), axpy(&work.q2, h, &ex_h.div_g[1])];
    let phi0 = mass_rhs(grid, &work.rho, [&qt[0], &qt[1]], &ex_n.div_d_rho, dt)?;
    let pp_n = fill_ghosts(grid, &pressure_field(&law, &work.rho, &rs_half), FieldKind::Pi(law), 1)?;
    let mut phi_semi = phi0.clone();
    for j in 0..grid.ny() as isize {
        for i in 0..grid.nx() as isize {
            let k = grid.idx(i as usize, j as usize);
            phi_semi[k] += 0.25 * dt * dt * laplacian(grid, &pp_n, i, j);
        }
    }
    let semi = density_stage(grid, &law, phi_semi, 0.25 * dt * dt, &rs_half, &half.rho, &cfg.newton, &mut report);
    let g_full = [axpy(&work.q1, dt, &ex_h.div_g[0]), axpy(&work.q2, dt, &ex_h.div_g[1])];
    let (rho, q) = match semi {
        Ok((rho, pp)) => {
            let g1 = pressure_gradient(grid, &pp);
            let g0 = pressure_gradient(grid, &pp_n);
            let q = [0, 1].map(|d| {
                (0..rho.len())
                    .map(|k| g_full[d][k] - h * (g0[d][k] + g1[d][k]))
                    .collect::<Vec<f64>>()
            });
            (rho, q)
        }
        Err(SchemeError::Elliptic(EllipticError::NotConverged(_))) if cfg.pressure_switch => {
            report.switched = true;
            let (rho, pp) =
                density_stage(grid, &law, phi0, 0.5 * dt * dt, &rs_half, &half.rho, &cfg.newton, &mut report)?;
            let g1 = pressure_gradient(grid, &pp);
            (rho, [axpy(&g_full[0], dt, &g1[0]), axpy(&g_full[1], dt, &g1[1])])
        }
        Err(e) => return Err(e),
    };
    let q = relax(q, &rho, relaxation, grid, dt);
    let rho_safe: Vec<f64> = rho.iter().map(|r| r.max(DENSITY_FLOOR)).collect();
    let v = [velocity(&rho_safe, &q[0]), velocity(&rho_safe, &q[1])];
    let rho_star = semilag_advect(&rs_half, [&v[0], &v[1]], h, grid, sl)?;
    let next = finish(rho, q, rho_star, state.time + dt, &mut report)?;
    Ok((next, report))
}

/// Dispatches on `cfg.time_order`.
pub fn step_sl(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
    sl: &SemiLagConfig,
    relaxation: Option<&RelaxationConfig>,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    if cfg.time_order == 2 {
        step_sl_second_order(state, grid, cfg, sl, relaxation, dt)
    } else {
        step_sl_first_order(state, grid, cfg, sl, relaxation, dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{total_mass, Boundary};
    use proptest::prelude::*;

    fn law() -> PressureLaw {
        PressureLaw::new(1e-2, 2.0, 2.0).unwrap()
    }

    fn sample(g: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = vec![0.0; g.n_cells()];
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                v[g.idx(i, j)] = f(g.x_center(i), g.y_center(j));
            }
        }
        v
    }

    #[test]
    fn nodes_are_reproduced() {
        let g = Grid::periodic_2d(7, 5).unwrap();
        let v = sample(&g, |x, y| (3.0 * x).sin() + y * y);
        for r in [0, 1] {
            let it = Interpolator::new(&g, &v, r).unwrap();
            for j in 0..5 {
                for i in 0..7 {
                    let got = it.eval(g.x_center(i), g.y_center(j));
                    assert!((got - v[g.idx(i, j)]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn cubic_exactness_for_r1() {
        let g = Grid::new_1d(20, Boundary::Wall, Boundary::Wall).unwrap();
        let cubic = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x - 4.0 * x * x * x;
        let v = sample(&g, |x, _| cubic(x));
        for q in [0.13, 0.377, 0.5, 0.811] {
            let got = lagrange_interpolate(&v, q, 0.0, &g, 1).unwrap();
            assert!((got - cubic(q)).abs() < 1e-12, "{q}");
        }
    }

    #[test]
    fn r0_quadratic_error_is_second_order() {
        let mut errs = Vec::new();
        for n in [20, 40, 80] {
            let g = Grid::periodic_1d(n).unwrap();
            let v = sample(&g, |x, _| x * x);
            let h = g.dx();
            // Midpoint between two interior nodes: error h^2 / 4.
            let x = g.x_center(n / 2) + 0.5 * h;
            let got = lagrange_interpolate(&v, x, 0.0, &g, 0).unwrap();
            errs.push((got - x * x).abs());
        }
        let slope = (errs[0] / errs[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
        let g = Grid::periodic_1d(20).unwrap();
        let lin = sample(&g, |x, _| 2.0 * x + 1.0);
        let got = lagrange_interpolate(&lin, 0.41, 0.0, &g, 0).unwrap();
        assert!((got - 1.82).abs() < 1e-13);
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = Grid::periodic_2d(8, 8).unwrap();
        let v = sample(&g, |x, y| 1.0 + 0.1 * (x - y));
        let z = vec![0.0; 64];
        for order in [1, 2] {
            let out = semilag_advect(&v, [&z, &z], 0.3, &g, &SemiLagConfig::new(1, order).unwrap()).unwrap();
            for k in 0..64 {
                assert!((out[k] - v[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_velocity_shifts_linear_data() {
        let g = Grid::new_1d(32, Boundary::Wall, Boundary::Wall).unwrap();
        let v = sample(&g, |x, _| 1.0 + 0.2 * x);
        let vel = vec![0.3; 32];
        let z = vec![0.0; 32];
        for r in [0, 1] {
            let out = semilag_advect(&v, [&vel, &z], 0.05, &g, &SemiLagConfig::new(r, 1).unwrap()).unwrap();
            for i in 2..31 {
                let expect = 1.0 + 0.2 * (g.x_center(i) - 0.015);
                assert!((out[i] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn integer_shift_reproduces_periodic_profile() {
        let g = Grid::periodic_1d(16).unwrap();
        let v = sample(&g, |x, _| (2.0 * std::f64::consts::PI * x).sin());
        let vel = vec![2.0 / 16.0; 16];
        let out = semilag_advect(&v, [&vel, &vel], 1.0, &g, &SemiLagConfig::new(1, 1).unwrap()).unwrap();
        for i in 0..16 {
            assert!((out[i] - v[(i + 14) % 16]).abs() < 1e-13);
        }
    }

    #[test]
    fn taylor_foot_gains_an_order_on_rotation() {
        // Rotation about (0.5, 0.5) with an angular speed that vanishes before
        // the walls; characteristics are circles travelled at omega(r).
        let g = Grid::new_2d(256, 256, [Boundary::Wall; 4]).unwrap();
        let omega = |r: f64| {
            if r < 0.3 {
                1.0
            } else if r < 0.45 {
                (0.5 * std::f64::consts::PI * (r - 0.3) / 0.15).cos().powi(2)
            } else {
                0.0
            }
        };
        let blob = |x: f64, y: f64| 1.0 + (-((x - 0.5).powi(2) + (y - 0.72).powi(2)) / 0.01).exp();
        let v1 = sample(&g, |x, y| -(y - 0.5) * omega((x - 0.5).hypot(y - 0.5)));
        let v2 = sample(&g, |x, y| (x - 0.5) * omega((x - 0.5).hypot(y - 0.5)));
        let t_end: f64 = 1.0;
        let exact = sample(&g, |x, y| {
            let (dx, dy) = (x - 0.5, y - 0.5);
            let a = omega(dx.hypot(dy)) * t_end;
            let (c, s) = (a.cos(), a.sin());
            blob(0.5 + c * dx + s * dy, 0.5 - s * dx + c * dy)
        });
        let mut err = [[0.0; 3]; 2];
        for (o, order) in [1u8, 2].into_iter().enumerate() {
            for (m, steps) in [4usize, 8, 16].into_iter().enumerate() {
                let dt = t_end / steps as f64;
                let mut f = sample(&g, blob);
                for _ in 0..steps {
                    f = semilag_advect(&f, [&v1, &v2], dt, &g, &SemiLagConfig::new(1, order).unwrap()).unwrap();
                }
                err[o][m] = f.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.cell_volume();
            }
        }
        let slope = |e: [f64; 3]| (e[0] / e[2]).log2() / 2.0;
        assert!((slope(err[0]) - 1.0).abs() < 0.3, "{err:?}");
        assert!(slope(err[1]) > 1.7, "{err:?}");
        for m in 0..3 {
            assert!(err[1][m] < err[0][m], "{err:?}");
        }
    }

    #[test]
    fn relaxation_limits() {
        let g = Grid::new_2d(4, 4, [Boundary::Wall; 4]).unwrap();
        let rc = RelaxationConfig::new(0.5).unwrap();
        let q1 = vec![0.3; 16];
        let q2 = vec![-0.2; 16];
        let rho = vec![0.6; 16];
        let tiny = relaxation_update([&q1, &q2], &rho, &rc, &g, 1e-14);
        assert!((tiny[0][5] - 0.3).abs() < 1e-13);
        let huge = relaxation_update([&q1, &q2], &rho, &rc, &g, 1e14);
        let w = rc.desired_velocity(g.x_center(1), g.y_center(1));
        assert!((huge[0][5] - 0.6 * w[0]).abs() < 1e-12);
        assert!((huge[1][5] - 0.6 * w[1]).abs() < 1e-12);
        let half = relaxation_update([&q1, &q2], &rho, &rc, &g, 0.5);
        assert!((half[0][5] - 0.5 * (0.3 + 0.6 * w[0])).abs() < 1e-15);
        assert!((w[0].hypot(w[1]) - 1.0).abs() < 1e-15);
        assert_eq!(rc.desired_velocity(0.5, 0.0), [0.0, 0.0]);
        assert!(RelaxationConfig::new(0.0).is_err());
    }

    #[test]
    fn uniform_state_is_fixed() {
        for order in [1, 2] {
            let cfg = SchemeConfig::new(law()).with_order(order);
            let sl = SemiLagConfig::new(1, order).unwrap();
            for g in [Grid::periodic_1d(16).unwrap(), Grid::periodic_2d(6, 6).unwrap()] {
                let s = GridState::uniform(&g, 0.7, [0.2, 0.1 * (g.dim() - 1) as f64], 1.1);
                let (n, _) = step_sl(&s, &g, &cfg, &sl, None, 0.01).unwrap();
                for k in 0..s.len() {
                    assert!((n.rho[k] - 0.7).abs() < 1e-13);
                    assert!((n.q1[k] - s.q1[k]).abs() < 1e-13);
                    assert!((n.rho_star[k] - 1.1).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn periodic_mass_conservation_2d() {
        let g = Grid::periodic_2d(16, 12).unwrap();
        let s0 = GridState::from_fn(&g, |x, y| {
            (0.5 + 0.3 * (6.3 * x).sin() * (6.3 * y).cos(), [0.2 * (6.3 * y).sin(), -0.3], 1.0 + 0.1 * x)
        });
        for order in [1, 2] {
            let cfg = SchemeConfig::new(law()).with_order(order);
            let sl = SemiLagConfig::new(1, order).unwrap();
            let m0 = total_mass(&s0, &g);
            let mut s = s0.clone();
            for _ in 0..5 {
                s = step_sl(&s, &g, &cfg, &sl, None, 0.1 / 16.0).unwrap().0;
                assert!(((total_mass(&s, &g) - m0) / m0).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn r0_transport_is_monotone(seed in proptest::collection::vec(0.8..1.2f64, 24), v in -2.0..2.0f64, dt in 0.0..0.2f64) {
            let g = Grid::periodic_1d(24).unwrap();
            let vel: Vec<f64> = (0..24).map(|i| v * (1.0 + 0.3 * (i as f64).sin())).collect();
            let out = semilag_advect(&seed, [&vel, &vel], dt, &g, &SemiLagConfig::new(0, 1).unwrap()).unwrap();
            let lo = seed.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = seed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for o in out {
                prop_assert!(o >= lo - 1e-14 && o <= hi + 1e-14);
            }
        }

        #[test]
        fn relaxation_contracts(q in -2.0..2.0f64, rho in 0.1..1.0f64, a in 0.0..10.0f64) {
            let g = Grid::new_2d(3, 3, [Boundary::Wall; 4]).unwrap();
            let rc = RelaxationConfig::new(1.0).unwrap();
            let q1 = vec![q; 9];
            let q2 = vec![-q; 9];
            let r = vec![rho; 9];
            let out = relaxation_update([&q1, &q2], &r, &rc, &g, a);
            let w = rc.desired_velocity(g.x_center(2), g.y_center(1));
            let k = g.idx(2, 1);
            let before = (q1[k] - rho * w[0]).hypot(q2[k] - rho * w[1]);
            let after = (out[0][k] - rho * w[0]).hypot(out[1][k] - rho * w[1]);
            prop_assert!((after - before / (1.0 + a)).abs() < 1e-12);
        }
    }
}
