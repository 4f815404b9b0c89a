//! The conservative (rho, q, Z) method.
//!
//! Every step is a sequence of *pressure stages*. A stage takes a predicted
//! momentum `q_pred` (all explicit terms applied), eliminates the implicit
//! momentum from the `Z` balance and solves the resulting stride-2 elliptic
//! problem for `pi`. The effective momentum is then
//!
//! ```text
//! q_eff = q_pred - theta * grad_c(pi)
//! ```
//!
//! and the mass balance uses the same `q_eff`, so the computed `Z` and `rho`
//! see identical implicit fluxes. First order is one stage with
//! `tau = theta = dt`; the RK2CN scheme chains a half stage and a
//! Crank-Nicolson full stage.

use crate::elliptic::{
    pi_warm_start, solve_newton, EllipticError, EllipticProblem, NewtonOptions, NewtonReport, Stencil,
    UnknownKind,
};
use crate::eos::PressureLaw;
use crate::grid::{fill_ghosts, FieldKind, Grid, GridError, GridState, Padded, PaddedState, DENSITY_FLOOR};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("invalid scheme configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("pressure stage failed: {0}")]
    Elliptic(#[from] EllipticError),
    #[error("state became non-finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeStepRule {
    /// `dt = cfl_factor * dx`.
    Fixed,
    /// `dt = cfl_factor * dx / max |lambda^0|`.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub law: PressureLaw,
    /// 1: piecewise constant, 2: MUSCL/minmod.
    pub space_order: u8,
    /// 1: IMEX Euler, 2: RK2CN.
    pub time_order: u8,
    pub cfl_factor: f64,
    pub dt_rule: TimeStepRule,
    /// Fall back to an implicit pressure in the RK2CN full step when the
    /// Newton iteration wants a negative `pi^{n+1}`.
    pub pressure_switch: bool,
    pub newton: NewtonOptions,
}

impl SchemeConfig {
    /// First order in space and time, `dt = 0.1 dx`.
    pub fn new(law: PressureLaw) -> Self {
        Self {
            law,
            space_order: 1,
            time_order: 1,
            cfl_factor: 0.1,
            dt_rule: TimeStepRule::Fixed,
            pressure_switch: true,
            newton: NewtonOptions {
                tol_abs: 1e-12,
                tol_rel: 1e-14,
                ..NewtonOptions::default()
            },
        }
    }

    /// Same order in space and time.
    pub fn with_order(mut self, order: u8) -> Self {
        self.space_order = order;
        self.time_order = order;
        self
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if !matches!(self.space_order, 1 | 2) || !matches!(self.time_order, 1 | 2) {
            return Err(SchemeError::Config(format!(
                "orders must be 1 or 2 (space {}, time {})",
                self.space_order, self.time_order
            )));
        }
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return Err(SchemeError::Config(format!(
                "cfl factor {} outside (0, 1]",
                self.cfl_factor
            )));
        }
        Ok(())
    }

    /// Time step for `state` according to [`TimeStepRule`].
    pub fn time_step(&self, grid: &Grid, state: &GridState) -> f64 {
        let h = if grid.dim() == 2 { grid.dx().min(grid.dy()) } else { grid.dx() };
        match self.dt_rule {
            TimeStepRule::Fixed => self.cfl_factor * h,
            TimeStepRule::Adaptive => {
                let s = max_wave_speed(&self.law, state);
                if s > 0.0 {
                    self.cfl_factor * h / s
                } else {
                    self.cfl_factor * h
                }
            }
        }
    }
}

/// Diagnostics of one time step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub newton_solves: usize,
    /// Largest Newton iteration count among the solves of the step.
    pub newton_iterations: usize,
    pub projections: usize,
    /// The RK2CN full step was redone with an implicit pressure.
    pub switched: bool,
    /// Cells clamped to [`DENSITY_FLOOR`].
    pub floored: usize,
    /// `dt * max |lambda^0| / dx` of the incoming state.
    pub cfl: f64,
}

impl StepReport {
    pub(crate) fn record(&mut self, r: &NewtonReport) {
        self.newton_solves += 1;
        self.newton_iterations = self.newton_iterations.max(r.iterations);
        self.projections += r.projections;
    }
}

/// `max(|lambda_k^0|)` over `k` and both sides; cells are `(rho, q_n, Z)`
/// with `q_n` the momentum normal to the interface.
pub fn max_char_speed(law: &PressureLaw, left: [f64; 3], right: [f64; 3]) -> f64 {
    let one = |[rho, qn, z]: [f64; 3]| (qn / rho).abs() + law.background_sound_speed(rho, z);
    one(left).max(one(right))
}

/// Largest explicit wave speed over the grid.
pub fn max_wave_speed(law: &PressureLaw, state: &GridState) -> f64 {
    (0..state.len())
        .map(|k| {
            let v = (state.q1[k].abs()).max(state.q2[k].abs()) / state.rho[k];
            v + law.background_sound_speed(state.rho[k], state.z[k])
        })
        .fold(0.0, f64::max)
}

/// Diagonal Rusanov upwinding `(c / 2)(w_R - w_L)`.
#[inline]
pub fn rusanov_diffusion(w_left: f64, w_right: f64, c: f64) -> f64 {
    0.5 * c * (w_right - w_left)
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    0.5 * (sgn(a) + sgn(b)) * a.abs().min(b.abs())
}

/// Limited face values of the inner cells `1..w.len() - 1`; the first and
/// last entries only serve as neighbours. Returns `(w_L, w_R)` where
/// `w_L = w_i + s_i / 2` is the value at the right face of cell `i` and
/// `w_R = w_i - s_i / 2` the value at its left face.
pub fn muscl_reconstruct(w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = w.len().saturating_sub(2);
    let mut wl = Vec::with_capacity(n);
    let mut wr = Vec::with_capacity(n);
    for i in 1..w.len().saturating_sub(1) {
        let s = minmod(w[i] - w[i - 1], w[i + 1] - w[i]);
        wl.push(w[i] + 0.5 * s);
        wr.push(w[i] - 0.5 * s);
    }
    (wl, wr)
}

/// Explicit part of one interface flux.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FaceFlux {
    /// Momentum flux, diffusion included.
    pub g: [f64; 2],
    pub d_rho: f64,
    pub d_q: [f64; 2],
    pub d_z: f64,
    /// Rusanov speed `c`.
    pub speed: f64,
}

/// All interface fluxes of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFluxes {
    /// `(nx + 1) * ny` faces normal to x; face `i - 1/2` of row `j` sits at
    /// `j * (nx + 1) + i`.
    pub x: Vec<FaceFlux>,
    /// `nx * (ny + 1)` faces normal to y (empty in 1D); face `j - 1/2` of
    /// column `i` sits at `j * nx + i`.
    pub y: Vec<FaceFlux>,
}

/// Cell divergences `(flux_{+1/2} - flux_{-1/2}) / dx` summed over axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitTerms {
    pub div_g: [Vec<f64>; 2],
    pub div_d_rho: Vec<f64>,
    pub div_d_z: Vec<f64>,
}

impl ExplicitTerms {
    pub fn new(grid: &Grid, f: &InterfaceFluxes) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let n = grid.n_cells();
        let mut t = Self {
            div_g: [vec![0.0; n], vec![0.0; n]],
            div_d_rho: vec![0.0; n],
            div_d_z: vec![0.0; n],
        };
        let mut add = |k: usize, lo: &FaceFlux, hi: &FaceFlux, h: f64| {
            t.div_g[0][k] += (hi.g[0] - lo.g[0]) / h;
            t.div_g[1][k] += (hi.g[1] - lo.g[1]) / h;
            t.div_d_rho[k] += (hi.d_rho - lo.d_rho) / h;
            t.div_d_z[k] += (hi.d_z - lo.d_z) / h;
        };
        for j in 0..ny {
            for i in 0..nx {
                let f0 = j * (nx + 1) + i;
                add(grid.idx(i, j), &f.x[f0], &f.x[f0 + 1], grid.dx());
            }
        }
        if grid.dim() == 2 {
            for j in 0..ny {
                for i in 0..nx {
                    add(grid.idx(i, j), &f.y[j * nx + i], &f.y[(j + 1) * nx + i], grid.dy());
                }
            }
        }
        t
    }
}

/// Face value of cell `(i, j)` on its `+axis` (`plus`) or `-axis` side.
#[inline]
fn face_value(p: &Padded, i: isize, j: isize, axis: usize, plus: bool, order: u8) -> f64 {
    let w = p.at(i, j);
    if order < 2 {
        return w;
    }
    let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
    let s = minmod(w - p.at(i - di, j - dj), p.at(i + di, j + dj) - w);
    if plus {
        w + 0.5 * s
    } else {
        w - 0.5 * s
    }
}

/// `u = [rho, q1, q2, Z]` on each side of a face normal to `axis`.
fn face_flux(law: &PressureLaw, ul: [f64; 4], ur: [f64; 4], axis: usize) -> FaceFlux {
    let n = 1 + axis;
    let c = max_char_speed(law, [ul[0], ul[n], ul[3]], [ur[0], ur[n], ur[3]]);
    let phys = |u: [f64; 4]| {
        let (rho, q1, q2, z) = (u[0], u[1], u[2], u[3]);
        let p = law.p(z);
        if axis == 0 {
            [q1 * q1 / rho + p, q1 * q2 / rho]
        } else {
            [q1 * q2 / rho, q2 * q2 / rho + p]
        }
    };
    let (fl, fr) = (phys(ul), phys(ur));
    let d_q = [rusanov_diffusion(ul[1], ur[1], c), rusanov_diffusion(ul[2], ur[2], c)];
    FaceFlux {
        g: [0.5 * (fl[0] + fr[0]) - d_q[0], 0.5 * (fl[1] + fr[1]) - d_q[1]],
        d_rho: rusanov_diffusion(ul[0], ur[0], c),
        d_q,
        d_z: rusanov_diffusion(ul[3], ur[3], c),
        speed: c,
    }
}

/// Explicit interface fluxes of `state`; `space_order` 2 reconstructs the
/// conserved variables with MUSCL/minmod.
pub fn explicit_fluxes(
    grid: &Grid,
    state: &GridState,
    law: &PressureLaw,
    space_order: u8,
) -> Result<InterfaceFluxes, SchemeError> {
    let p = PaddedState::new(grid, state, 2)?;
    let fields = [&p.rho, &p.q1, &p.q2, &p.z];
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let side = |i: isize, j: isize, axis: usize, plus: bool| -> [f64; 4] {
        let mut u = [0.0; 4];
        for (v, f) in u.iter_mut().zip(fields) {
            *v = face_value(f, i, j, axis, plus, space_order);
        }
        u
    };
    let mut x = Vec::with_capacity(((nx + 1) * ny) as usize);
    for j in 0..ny {
        for i in 0..=nx {
            x.push(face_flux(law, side(i - 1, j, 0, true), side(i, j, 0, false), 0));
        }
    }
    let mut y = Vec::new();
    if grid.dim() == 2 {
        y.reserve((nx * (ny + 1)) as usize);
        for j in 0..=ny {
            for i in 0..nx {
                y.push(face_flux(law, side(i, j - 1, 1, true), side(i, j, 1, false), 1));
            }
        }
    }
    Ok(InterfaceFluxes { x, y })
}

/// Centred difference `(f_{+1} - f_{-1}) / (2h)` of a padded field.
#[inline]
pub(crate) fn centred_diff(grid: &Grid, p: &Padded, i: isize, j: isize, axis: usize) -> f64 {
    if axis == 0 {
        (p.at(i + 1, j) - p.at(i - 1, j)) / (2.0 * grid.dx())
    } else {
        (p.at(i, j + 1) - p.at(i, j - 1)) / (2.0 * grid.dy())
    }
}

/// Centred gradient of a cell field, ghosts filled per `kind`.
pub(crate) fn centred_gradient(grid: &Grid, f: &[f64], kind: FieldKind) -> Result<[Vec<f64>; 2], GridError> {
    let p = fill_ghosts(grid, f, kind, 1)?;
    let n = grid.n_cells();
    let mut g = [vec![0.0; n], vec![0.0; n]];
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            g[0][k] = centred_diff(grid, &p, i as isize, j as isize, 0);
            if grid.dim() == 2 {
                g[1][k] = centred_diff(grid, &p, i as isize, j as isize, 1);
            }
        }
    }
    Ok(g)
}

/// Inputs of one pressure stage.
struct Stage<'a> {
    rho0: &'a [f64],
    z0: &'a [f64],
    div_d_rho: &'a [f64],
    div_d_z: &'a [f64],
    /// `Z / rho` at cell centres.
    weights: &'a [f64],
    q_pred: [&'a [f64]; 2],
    tau: f64,
    theta: f64,
    pi_guess: &'a [f64],
}

struct StageOutput {
    rho: Vec<f64>,
    z: Vec<f64>,
    pi: Vec<f64>,
    q_eff: [Vec<f64>; 2],
    report: NewtonReport,
}

fn solve_stage(
    grid: &Grid,
    law: &PressureLaw,
    st: &Stage,
    opts: &NewtonOptions,
) -> Result<StageOutput, SchemeError> {
    let dims = grid.dim();
    let n = grid.n_cells();
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let w = fill_ghosts(grid, st.weights, FieldKind::Weight, 2)?;
    let qk = [FieldKind::Q1, FieldKind::Q2];
    let mut qp = Vec::with_capacity(dims);
    for d in 0..dims {
        qp.push(fill_ghosts(grid, st.q_pred[d], qk[d], 1)?);
    }
    let wq_div = |i: isize, j: isize| -> f64 {
        let mut s = (w.at(i + 1, j) * qp[0].at(i + 1, j) - w.at(i - 1, j) * qp[0].at(i - 1, j))
            / (2.0 * grid.dx());
        if dims == 2 {
            s += (w.at(i, j + 1) * qp[1].at(i, j + 1) - w.at(i, j - 1) * qp[1].at(i, j - 1))
                / (2.0 * grid.dy());
        }
        s
    };
    let mut rhs = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.idx(i as usize, j as usize);
            rhs[k] = st.z0[k] - st.tau * wq_div(i, j) + st.tau * st.div_d_z[k];
        }
    }
    let c = st.tau * st.theta / 4.0;
    let problem = EllipticProblem {
        kind: UnknownKind::Pi,
        stencil: Stencil::Stride2 { weights: w.clone() },
        kx: c / (grid.dx() * grid.dx()),
        ky: if dims == 2 { c / (grid.dy() * grid.dy()) } else { 0.0 },
        rhs,
    };
    let (pi, report) = solve_newton(grid, law, &problem, st.pi_guess, opts)?;
    let pp = fill_ghosts(grid, &pi, FieldKind::Pi(*law), 2)?;

    // q_eff on the interior plus one ghost ring along its own axis.
    let mut qe = Vec::with_capacity(dims);
    for (d, q) in qp.iter().enumerate() {
        let mut e = q.clone();
        let (ilo, ihi, jlo, jhi) = if d == 0 { (-1, nx + 1, 0, ny) } else { (0, nx, -1, ny + 1) };
        for j in jlo..jhi {
            for i in ilo..ihi {
                e.set(i, j, q.at(i, j) - st.theta * centred_diff(grid, &pp, i, j, d));
            }
        }
        qe.push(e);
    }
    let mut rho = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q_eff = [vec![0.0; n], vec![0.0; n]];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.idx(i as usize, j as usize);
            let mut div = 0.0;
            for (d, e) in qe.iter().enumerate() {
                div += centred_diff(grid, e, i, j, d);
                q_eff[d][k] = e.at(i, j);
            }
            rho[k] = st.rho0[k] - st.tau * div + st.tau * st.div_d_rho[k];
            z[k] = law.z_of_pi(pi[k]);
        }
    }
    Ok(StageOutput {
        rho,
        z,
        pi,
        q_eff,
        report,
    })
}

/// Assembles a state from the stage unknowns: `rho_star = rho / Z` where the
/// density is meaningful, the previous value elsewhere; then the floor.
fn assemble(
    prev: &GridState,
    rho: Vec<f64>,
    q: [Vec<f64>; 2],
    z: Vec<f64>,
    time: f64,
    report: &mut StepReport,
) -> Result<GridState, SchemeError> {
    let [q1, q2] = q;
    let rho_star = (0..rho.len())
        .map(|k| {
            if rho[k] > DENSITY_FLOOR && z[k] > 0.0 {
                rho[k] / z[k]
            } else {
                prev.rho_star[k]
            }
        })
        .collect();
    let mut s = GridState {
        rho,
        q1,
        q2,
        z,
        rho_star,
        time,
    };
    report.floored += s.apply_density_floor();
    if !s.all_finite() {
        return Err(SchemeError::NonFinite);
    }
    Ok(s)
}

pub(crate) fn check_state(grid: &Grid, state: &GridState) -> Result<(), SchemeError> {
    let n = grid.n_cells();
    for len in [
        state.rho.len(),
        state.q1.len(),
        state.q2.len(),
        state.z.len(),
        state.rho_star.len(),
    ] {
        if len != n {
            return Err(GridError::ShapeMismatch(len, n).into());
        }
    }
    Ok(())
}

fn weights(state: &GridState) -> Vec<f64> {
    state.z.iter().zip(&state.rho).map(|(z, r)| z / r).collect()
}

pub(crate) fn cfl_number(cfg: &SchemeConfig, grid: &Grid, state: &GridState, dt: f64) -> f64 {
    let h = if grid.dim() == 2 { grid.dx().min(grid.dy()) } else { grid.dx() };
    dt * max_wave_speed(&cfg.law, state) / h
}

/// `q - a * f`, componentwise.
pub(crate) fn axpy(q: &[f64], a: f64, f: &[f64]) -> Vec<f64> {
    q.iter().zip(f).map(|(q, f)| q - a * f).collect()
}

/// One IMEX Euler step.
pub fn step_first_order(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
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
    let q_pred = [axpy(&state.q1, dt, &ex.div_g[0]), axpy(&state.q2, dt, &ex.div_g[1])];
    let w = weights(state);
    let guess: Vec<f64> = state.z.iter().map(|&z| pi_warm_start(&law, z)).collect();
    let out = solve_stage(
        grid,
        &law,
        &Stage {
            rho0: &state.rho,
            z0: &state.z,
            div_d_rho: &ex.div_d_rho,
            div_d_z: &ex.div_d_z,
            weights: &w,
            q_pred: [&q_pred[0], &q_pred[1]],
            tau: dt,
            theta: dt,
            pi_guess: &guess,
        },
        &cfg.newton,
    )?;
    report.record(&out.report);
    let next = assemble(state, out.rho, out.q_eff, out.z, state.time + dt, &mut report)?;
    Ok((next, report))
}

/// One RK2CN step with the pressure switch.
pub fn step_second_order(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    cfg.validate()?;
    check_state(grid, state)?;
    let law = cfg.law;
    let mut report = StepReport {
        cfl: cfl_number(cfg, grid, state, dt),
        ..StepReport::default()
    };
    let so = cfg.space_order;
    let ex_n = ExplicitTerms::new(grid, &explicit_fluxes(grid, state, &law, so)?);
    let guess: Vec<f64> = state.z.iter().map(|&z| pi_warm_start(&law, z)).collect();

    // Half step, implicit pressure at n + 1/2.
    let h = 0.5 * dt;
    let q_half_pred = [axpy(&state.q1, h, &ex_n.div_g[0]), axpy(&state.q2, h, &ex_n.div_g[1])];
    let w_n = weights(state);
    let half = solve_stage(
        grid,
        &law,
        &Stage {
            rho0: &state.rho,
            z0: &state.z,
            div_d_rho: &ex_n.div_d_rho,
            div_d_z: &ex_n.div_d_z,
            weights: &w_n,
            q_pred: [&q_half_pred[0], &q_half_pred[1]],
            tau: h,
            theta: h,
            pi_guess: &guess,
        },
        &cfg.newton,
    )?;
    report.record(&half.report);
    let pi_half = half.pi.clone();
    let s_half = assemble(state, half.rho, half.q_eff, half.z, state.time + h, &mut report)?;

    // Full step.
    let ex_h = ExplicitTerms::new(grid, &explicit_fluxes(grid, &s_half, &law, so)?);
    let w_h = weights(&s_half);
    let base = [axpy(&state.q1, h, &ex_h.div_g[0]), axpy(&state.q2, h, &ex_h.div_g[1])];
    let pi_n: Vec<f64> = state.z.iter().map(|&z| law.pi(z)).collect();
    let grad_pi_n = centred_gradient(grid, &pi_n, FieldKind::Pi(law))?;
    let semi = [
        axpy(&base[0], 0.25 * dt, &grad_pi_n[0]),
        axpy(&base[1], 0.25 * dt, &grad_pi_n[1]),
    ];
    let stage = |q_pred: &[Vec<f64>; 2], theta: f64, opts: &NewtonOptions| {
        solve_stage(
            grid,
            &law,
            &Stage {
                rho0: &state.rho,
                z0: &state.z,
                div_d_rho: &ex_n.div_d_rho,
                div_d_z: &ex_n.div_d_z,
                weights: &w_h,
                q_pred: [&q_pred[0], &q_pred[1]],
                tau: dt,
                theta,
                pi_guess: &pi_half,
            },
            opts,
        )
    };
    let strict = NewtonOptions {
        abort_on_negative: cfg.pressure_switch,
        ..cfg.newton
    };
    let full = match stage(&semi, 0.25 * dt, &strict) {
        Ok(out) => out,
        Err(SchemeError::Elliptic(EllipticError::NegativePressure { .. } | EllipticError::NotConverged(_)))
            if cfg.pressure_switch =>
        {
            report.switched = true;
            stage(&base, 0.5 * dt, &cfg.newton)?
        }
        Err(e) => return Err(e),
    };
    report.record(&full.report);
    let [e1, e2] = full.q_eff;
    let q_next = [
        e1.iter().zip(&state.q1).map(|(e, q)| 2.0 * e - q).collect(),
        e2.iter().zip(&state.q2).map(|(e, q)| 2.0 * e - q).collect(),
    ];
    let next = assemble(state, full.rho, q_next, full.z, state.time + dt, &mut report)?;
    Ok((next, report))
}

/// Dispatches on `cfg.time_order`.
pub fn step(
    state: &GridState,
    grid: &Grid,
    cfg: &SchemeConfig,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    if cfg.time_order == 2 {
        step_second_order(state, grid, cfg, dt)
    } else {
        step_first_order(state, grid, cfg, dt)
    }
}
