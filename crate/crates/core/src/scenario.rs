//! Test problems, the time loop and the error harness.

use crate::eos::PressureLaw;
use crate::grid::{l1_error, total_mass, Boundary, ExteriorState, Grid, GridError, GridState};
use crate::riemann::{solve_riemann, PrimState, RiemannError, RiemannFan};
use crate::scheme_sl::{relaxation_update, step_sl, RelaxationConfig, SemiLagConfig};
use crate::scheme_zq::{step, SchemeConfig, SchemeError, StepReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Left and right states `(rho, q, rho_star)` of the Riemann test.
pub const RIEMANN_LEFT: (f64, f64, f64) = (0.7, 0.8, 1.2);
pub const RIEMANN_RIGHT: (f64, f64, f64) = (0.7, -0.8, 1.0);
/// Side of each square and inward momentum of the collision test.
pub const COLLIDE_SIDE: f64 = 0.2;
pub const COLLIDE_MOMENTUM: f64 = 0.5;
/// Densities inside and outside the squares.
pub const COLLIDE_RHO_IN: f64 = 0.6;
pub const COLLIDE_RHO_OUT: f64 = 0.05;
pub const COLLIDE_CENTRES: [(f64, f64); 4] = [(0.2, 0.5), (0.5, 0.2), (0.5, 0.8), (0.8, 0.5)];
/// Initial density and exit window of the evacuation test.
pub const EVACUATION_RHO: f64 = 0.6;
pub const EXIT_WINDOW: (f64, f64) = (0.4, 0.6);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("step {step} (t = {time}) failed: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: SchemeError,
    },
    #[error(transparent)]
    Riemann(#[from] RiemannError),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Conservative `(rho, q, Z)` method.
    Zq,
    /// `(rho, q)` method with semi-Lagrangian congestion transport.
    Sl,
}

impl FromStr for SchemeKind {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zq" => Ok(Self::Zq),
            "sl" => Ok(Self::Sl),
            _ => Err(invalid(format!("unknown scheme '{s}' (expected zq or sl)"))),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zq => "zq",
            Self::Sl => "sl",
        })
    }
}

/// Initial congestion density of the evacuation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvacuationProfile {
    Constant(f64),
    /// `1.1 - 0.2 y`.
    Linear,
    /// 0.9 for `x < 0.5`, 1.1 otherwise.
    Step,
    /// Independent uniform draws in `[0.9, 1.1]`.
    Random,
}

impl FromStr for EvacuationProfile {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "step" => Ok(Self::Step),
            "random" => Ok(Self::Random),
            _ => {
                let v = s
                    .strip_prefix("constant:")
                    .or(Some(s))
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("unknown profile '{s}'")))?;
                Ok(Self::Constant(v))
            }
        }
    }
}

impl fmt::Display for EvacuationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => write!(f, "constant:{v}"),
            Self::Linear => f.write_str("linear"),
            Self::Step => f.write_str("step"),
            Self::Random => f.write_str("random"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    Riemann1d,
    Smooth1d,
    Collide2d { case: u8 },
    Evacuate2d { profile: EvacuationProfile },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Riemann1d => "riemann1d",
            Self::Smooth1d => "smooth1d",
            Self::Collide2d { .. } => "collide2d",
            Self::Evacuate2d { .. } => "evacuate2d",
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, Self::Collide2d { .. } | Self::Evacuate2d { .. })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub nx: usize,
    /// Ignored in 1D.
    pub ny: usize,
    pub scheme: SchemeKind,
    pub space_order: u8,
    pub time_order: u8,
    pub eps: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `dt = dt_factor * dx` unless `dt` is set.
    pub dt_factor: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Time between stored frames; `None` keeps the initial and final ones.
    pub frame_interval: Option<f64>,
    /// Semi-Lagrangian half-width.
    pub sl_r: u8,
    /// Relaxation time (evacuation only).
    pub beta: f64,
    pub seed: u64,
}

impl Scenario {
    fn base(kind: ScenarioKind, n: usize, eps: f64, t_end: f64) -> Self {
        Self {
            kind,
            nx: n,
            ny: if kind.is_2d() { n } else { 1 },
            scheme: SchemeKind::Zq,
            space_order: 1,
            time_order: 1,
            eps,
            alpha: 2.0,
            gamma: 2.0,
            dt_factor: 0.1,
            dt: None,
            t_end,
            frame_interval: None,
            sl_r: 1,
            beta: 0.1,
            seed: 0,
        }
    }

    /// Two colliding states on `[0, 1]`, `dx = 1e-3`, `t = 0.1`.
    pub fn riemann1d() -> Self {
        Self::base(ScenarioKind::Riemann1d, 1000, 1e-2, 0.1)
    }

    /// Periodic Gaussian pulse, `t = 0.05`.
    pub fn smooth1d() -> Self {
        Self::base(ScenarioKind::Smooth1d, 1000, 1e-2, 0.05)
    }

    /// Four colliding squares on the periodic unit square.
    pub fn collide2d(case: u8) -> Self {
        Self::base(ScenarioKind::Collide2d { case }, 128, 1e-4, 0.15)
    }

    /// Room with an exit on its lower side, semi-Lagrangian scheme.
    pub fn evacuate2d(profile: EvacuationProfile) -> Self {
        Self {
            scheme: SchemeKind::Sl,
            ..Self::base(ScenarioKind::Evacuate2d { profile }, 128, 1e-4, 1.0)
        }
    }

    /// Same scheme order in space and time.
    pub fn with_order(mut self, order: u8) -> Self {
        self.space_order = order;
        self.time_order = order;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("eps", self.eps),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("dt-factor", self.dt_factor),
            ("t-end", self.t_end),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive (got {v})")));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(format!("dt must be positive (got {dt})")));
            }
        }
        if let Some(f) = self.frame_interval {
            if !(f > 0.0) {
                return Err(invalid("frame interval must be positive"));
            }
        }
        if self.nx < 4 || (self.kind.is_2d() && self.ny < 4) {
            return Err(invalid("grids need at least 4 cells per axis"));
        }
        if !matches!(self.space_order, 1 | 2) || !matches!(self.time_order, 1 | 2) {
            return Err(invalid("orders must be 1 or 2"));
        }
        if self.sl_r > 1 {
            return Err(invalid("sl-r must be 0 or 1"));
        }
        match self.kind {
            ScenarioKind::Collide2d { case } if !(1..=3).contains(&case) => {
                Err(invalid(format!("collision case {case} (expected 1, 2 or 3)")))
            }
            ScenarioKind::Evacuate2d {
                profile: EvacuationProfile::Constant(v),
            } if !(v > EVACUATION_RHO) => Err(invalid(format!(
                "constant congestion density {v} must exceed the initial density {EVACUATION_RHO}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn law(&self) -> Result<PressureLaw, ScenarioError> {
        PressureLaw::new(self.eps, self.alpha, self.gamma).map_err(|e| invalid(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, ScenarioError> {
        let g = match self.kind {
            ScenarioKind::Riemann1d => {
                let ext = |(rho, q, rs): (f64, f64, f64)| Boundary::Dirichlet(ExteriorState::new(rho, [q, 0.0], rho / rs));
                Grid::new_1d(self.nx, ext(RIEMANN_LEFT), ext(RIEMANN_RIGHT))?
            }
            ScenarioKind::Smooth1d => Grid::periodic_1d(self.nx)?,
            ScenarioKind::Collide2d { .. } => Grid::periodic_2d(self.nx, self.ny)?,
            ScenarioKind::Evacuate2d { .. } => Grid::new_2d(
                self.nx,
                self.ny,
                [
                    Boundary::Wall,
                    Boundary::Wall,
                    Boundary::OutflowWindow {
                        lo: EXIT_WINDOW.0,
                        hi: EXIT_WINDOW.1,
                    },
                    Boundary::Wall,
                ],
            )?,
        };
        Ok(g)
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig, ScenarioError> {
        let mut cfg = SchemeConfig::new(self.law()?);
        cfg.space_order = self.space_order;
        cfg.time_order = self.time_order;
        cfg.cfl_factor = self.dt_factor.min(1.0);
        Ok(cfg)
    }

    pub fn semilag_config(&self) -> Result<SemiLagConfig, ScenarioError> {
        SemiLagConfig::new(self.sl_r, self.time_order).map_err(|e| invalid(e.to_string()))
    }

    pub fn relaxation(&self) -> Result<Option<RelaxationConfig>, ScenarioError> {
        match self.kind {
            ScenarioKind::Evacuate2d { .. } => Ok(Some(
                RelaxationConfig::new(self.beta).map_err(|e| invalid(e.to_string()))?,
            )),
            _ => Ok(None),
        }
    }

    /// Nominal time step.
    pub fn time_step(&self, grid: &Grid) -> f64 {
        let h = if grid.dim() == 2 { grid.dx().min(grid.dy()) } else { grid.dx() };
        self.dt.unwrap_or(self.dt_factor * h)
    }
}

fn in_square(x: f64, y: f64, (xc, yc): (f64, f64), side: f64) -> bool {
    (x - xc).abs() < 0.5 * side && (y - yc).abs() < 0.5 * side
}

/// Exact initial fields of `s` on `grid`.
pub fn build_initial_state(s: &Scenario, grid: &Grid) -> Result<GridState, ScenarioError> {
    s.validate()?;
    let pi = std::f64::consts::PI;
    let state = match s.kind {
        ScenarioKind::Riemann1d => GridState::from_fn(grid, |x, _| {
            let (rho, q, rs) = if x <= 0.5 { RIEMANN_LEFT } else { RIEMANN_RIGHT };
            (rho, [q, 0.0], rs)
        }),
        ScenarioKind::Smooth1d => GridState::from_fn(grid, |x, _| {
            let e = (-(x - 0.5).powi(2) / 0.01).exp();
            (0.6 + 0.2 * e, [e, 0.0], 1.2 + 0.2 * (1.0 - (8.0 * pi * (x - 0.5)).cos()))
        }),
        ScenarioKind::Collide2d { case } => GridState::from_fn(grid, |x, y| {
            let mut rho = COLLIDE_RHO_OUT;
            let mut q = [0.0, 0.0];
            let mut rs = 1.0;
            for (m, &c) in COLLIDE_CENTRES.iter().enumerate() {
                if in_square(x, y, c, COLLIDE_SIDE) {
                    rho = COLLIDE_RHO_IN;
                    let (dx, dy) = (0.5 - c.0, 0.5 - c.1);
                    let n = dx.hypot(dy);
                    q = [COLLIDE_MOMENTUM * dx / n, COLLIDE_MOMENTUM * dy / n];
                    if case == 2 {
                        // Groups travelling along x are more constrained.
                        rs = [0.8, 1.2, 1.2, 0.8][m];
                    }
                }
            }
            if case == 3 {
                rs = 1.0
                    + 0.05
                        * ((10.0 * pi * x).cos() + (24.0 * pi * x).cos())
                        * ((6.0 * pi * y).cos() + (34.0 * pi * y).cos());
            }
            (rho, q, rs)
        }),
        ScenarioKind::Evacuate2d { profile } => {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            GridState::from_fn(grid, |x, y| {
                let rs = match profile {
                    EvacuationProfile::Constant(v) => v,
                    EvacuationProfile::Linear => 1.1 - 0.2 * y,
                    EvacuationProfile::Step => {
                        if x > 0.5 {
                            1.1
                        } else {
                            0.9
                        }
                    }
                    EvacuationProfile::Random => rng.gen_range(0.9..=1.1),
                };
                (EVACUATION_RHO, [0.0, 0.0], rs)
            })
        }
    };
    Ok(state)
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub grid: Grid,
    pub final_state: GridState,
    /// Initial state, every frame boundary crossed, and the final state.
    pub frames: Vec<GridState>,
    /// `(t, total mass)` after every step, starting with the initial state.
    pub mass_history: Vec<(f64, f64)>,
    /// `dt * max |lambda^0| / dx` per step.
    pub cfl_history: Vec<f64>,
    pub steps: usize,
    pub newton_solves: usize,
    pub max_newton_iterations: usize,
    pub switched_steps: usize,
    pub floored_cells: usize,
    /// Largest `Z` seen after any step.
    pub max_z: f64,
}

/// Advances one step of the scheme selected by `s`.
pub fn advance(
    s: &Scenario,
    grid: &Grid,
    state: &GridState,
    dt: f64,
) -> Result<(GridState, StepReport), SchemeError> {
    let cfg = s
        .scheme_config()
        .map_err(|e| SchemeError::Config(e.to_string()))?;
    let relax = s.relaxation().map_err(|e| SchemeError::Config(e.to_string()))?;
    match s.scheme {
        SchemeKind::Zq => {
            let (mut next, rep) = step(state, grid, &cfg, dt)?;
            if let Some(rc) = relax {
                let [q1, q2] = relaxation_update([&next.q1, &next.q2], &next.rho, &rc, grid, dt);
                next.q1 = q1;
                next.q2 = q2;
            }
            Ok((next, rep))
        }
        SchemeKind::Sl => {
            let sl = s
                .semilag_config()
                .map_err(|e| SchemeError::Config(e.to_string()))?;
            step_sl(state, grid, &cfg, &sl, relax.as_ref(), dt)
        }
    }
}

/// Runs `s` to its end time, calling `observer` on the initial state and
/// after every step.
pub fn run_scenario_with(
    s: &Scenario,
    mut observer: impl FnMut(&Grid, &GridState),
) -> Result<ScenarioResult, ScenarioError> {
    s.validate()?;
    s.scheme_config()?.validate().map_err(|e| invalid(e.to_string()))?;
    s.semilag_config()?;
    let grid = s.grid()?;
    let mut state = build_initial_state(s, &grid)?;
    observer(&grid, &state);
    let dt0 = s.time_step(&grid);
    let mut res = ScenarioResult {
        frames: vec![state.clone()],
        mass_history: vec![(0.0, total_mass(&state, &grid))],
        cfl_history: Vec::new(),
        steps: 0,
        newton_solves: 0,
        max_newton_iterations: 0,
        switched_steps: 0,
        floored_cells: 0,
        max_z: state.max_z(),
        final_state: state.clone(),
        grid: grid.clone(),
    };
    let mut next_frame = s.frame_interval;
    let tol = 1e-9 * dt0;
    while state.time < s.t_end - tol {
        let dt = dt0.min(s.t_end - state.time);
        let (mut next, rep) = advance(s, &grid, &state, dt).map_err(|source| ScenarioError::Step {
            step: res.steps + 1,
            time: state.time,
            source,
        })?;
        // Integer step count keeps the clock free of drift.
        res.steps += 1;
        if dt == dt0 {
            next.time = res.steps as f64 * dt0;
        }
        if next.time > s.t_end - tol {
            next.time = s.t_end;
        }
        res.newton_solves += rep.newton_solves;
        res.max_newton_iterations = res.max_newton_iterations.max(rep.newton_iterations);
        res.switched_steps += rep.switched as usize;
        res.floored_cells += rep.floored;
        res.cfl_history.push(rep.cfl);
        res.max_z = res.max_z.max(next.max_z());
        res.mass_history.push((next.time, total_mass(&next, &grid)));
        state = next;
        observer(&grid, &state);
        if let Some(f) = next_frame.as_mut() {
            if state.time >= *f - tol && state.time < s.t_end - tol {
                res.frames.push(state.clone());
                while *f <= state.time + tol {
                    *f += s.frame_interval.unwrap_or(f64::INFINITY);
                }
            }
        }
    }
    res.frames.push(state.clone());
    res.final_state = state;
    Ok(res)
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult, ScenarioError> {
    run_scenario_with(s, |_, _| {})
}

/// Exact solution of the Riemann test.
pub fn riemann_fan(s: &Scenario) -> Result<RiemannFan, ScenarioError> {
    let prim = |(rho, q, rs): (f64, f64, f64)| PrimState::new(rho, q / rho, rho / rs);
    Ok(solve_riemann(&prim(RIEMANN_LEFT), &prim(RIEMANN_RIGHT), &s.law()?)?)
}

/// Exact cell averages of the Riemann solution at `t > 0`, as
/// `[rho, q, Z, rho_star]` fields.
pub fn exact_riemann_averages(fan: &RiemannFan, grid: &Grid, t: f64) -> [Vec<f64>; 4] {
    let n = grid.nx();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let xl = i as f64 * grid.dx();
        let a = fan.average((xl - 0.5) / t, (xl + grid.dx() - 0.5) / t);
        for v in 0..4 {
            out[v][i] = a[v];
        }
    }
    out
}

/// L1 errors `[rho, q, Z, rho_star]` of `state` against the exact Riemann solution.
pub fn riemann_l1_errors(s: &Scenario, grid: &Grid, state: &GridState) -> Result<[f64; 4], ScenarioError> {
    if s.kind != ScenarioKind::Riemann1d {
        return Err(invalid("exact errors need the Riemann scenario"));
    }
    if !(state.time > 0.0) {
        return Err(invalid("exact errors need t > 0"));
    }
    let exact = exact_riemann_averages(&riemann_fan(s)?, grid, state.time);
    state_errors(grid, state, &exact)
}

fn fields(s: &GridState) -> [&[f64]; 4] {
    [&s.rho, &s.q1, &s.z, &s.rho_star]
}

fn state_errors(grid: &Grid, state: &GridState, reference: &[Vec<f64>; 4]) -> Result<[f64; 4], ScenarioError> {
    let mut e = [0.0; 4];
    for (v, f) in fields(state).into_iter().enumerate() {
        e[v] = l1_error(f, &reference[v], grid)?;
    }
    Ok(e)
}

/// Block averages of a 1D fine solution on `coarse` cells.
pub fn restrict(fine: &GridState, coarse: usize) -> Result<[Vec<f64>; 4], ScenarioError> {
    let n = fine.len();
    if coarse == 0 || n % coarse != 0 {
        return Err(invalid(format!("{n} fine cells do not split into {coarse} blocks")));
    }
    let r = n / coarse;
    let avg = |f: &[f64]| -> Vec<f64> { f.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect() };
    Ok(fields(fine).map(avg))
}

/// L1 errors per variable and resolution, with least-squares log-log slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dx: Vec<f64>,
    /// `[rho, q, Z, rho_star]` per resolution.
    pub errors: Vec<[f64; 4]>,
    pub slopes: [f64; 4],
}

/// Least-squares slope of `log e` against `log dx`.
pub fn fit_slope(dx: &[f64], e: &[f64]) -> f64 {
    let n = dx.len() as f64;
    let xs: Vec<f64> = dx.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Reference solution of the smooth test: second-order `(rho, q, Z)`
/// method with `dt = 0.1 dx` on `nx` cells.
pub fn convergence_reference(base: &Scenario, nx: usize) -> Result<GridState, ScenarioError> {
    let r = Scenario {
        nx,
        scheme: SchemeKind::Zq,
        space_order: 2,
        time_order: 2,
        dt: None,
        dt_factor: 0.1,
        frame_interval: None,
        ..base.clone()
    };
    Ok(run_scenario(&r)?.final_state)
}

/// Errors of `base` at each resolution against a given fine reference.
pub fn convergence_against(
    base: &Scenario,
    nxs: &[usize],
    reference: &GridState,
) -> Result<ConvergenceReport, ScenarioError> {
    if nxs.len() < 3 {
        return Err(invalid("a convergence study needs at least 3 resolutions"));
    }
    let mut dx = Vec::new();
    let mut errors = Vec::new();
    for &nx in nxs {
        let s = Scenario {
            nx,
            frame_interval: None,
            ..base.clone()
        };
        let res = run_scenario(&s)?;
        let restricted = restrict(reference, nx)?;
        errors.push(state_errors(&res.grid, &res.final_state, &restricted)?);
        dx.push(res.grid.dx());
    }
    let slopes = [0, 1, 2, 3].map(|v| fit_slope(&dx, &errors.iter().map(|e| e[v]).collect::<Vec<_>>()));
    Ok(ConvergenceReport { dx, errors, slopes })
}

/// Convergence study of `base` on `nxs` against a reference on
/// `reference_nx` cells.
pub fn run_convergence_study(
    base: &Scenario,
    nxs: &[usize],
    reference_nx: usize,
) -> Result<ConvergenceReport, ScenarioError> {
    if base.kind.is_2d() {
        return Err(invalid("convergence studies run on 1D scenarios"));
    }
    let reference = convergence_reference(base, reference_nx)?;
    convergence_against(base, nxs, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_initial_cells() {
        let s = Scenario::riemann1d();
        let g = s.grid().unwrap();
        let st = build_initial_state(&s, &g).unwrap();
        assert_eq!((st.rho[0], st.q1[0]), (0.7, 0.8));
        assert!((st.z[0] - 7.0 / 12.0).abs() < 1e-15);
        assert_eq!((st.rho[999], st.q1[999], st.z[999]), (0.7, -0.8, 0.7));
    }

    #[test]
    fn smooth_peak_values() {
        let s = Scenario {
            nx: 5,
            ..Scenario::smooth1d()
        };
        let g = s.grid().unwrap();
        let st = build_initial_state(&s, &g).unwrap();
        // Cell 2 is centred on x = 0.5.
        assert!((st.rho[2] - 0.8).abs() < 1e-15);
        assert!((st.q1[2] - 1.0).abs() < 1e-15);
        assert!((st.rho_star[2] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn collision_case_two_profile() {
        let s = Scenario {
            nx: 40,
            ny: 40,
            ..Scenario::collide2d(2)
        };
        let g = s.grid().unwrap();
        let st = build_initial_state(&s, &g).unwrap();
        let at = |x: f64, y: f64| g.idx((x * 40.0) as usize, (y * 40.0) as usize);
        assert_eq!(st.rho_star[at(0.5, 0.2)], 1.2);
        assert_eq!(st.rho_star[at(0.5, 0.8)], 1.2);
        assert_eq!(st.rho_star[at(0.2, 0.5)], 0.8);
        assert_eq!(st.rho_star[at(0.8, 0.5)], 0.8);
        assert_eq!(st.rho_star[at(0.05, 0.05)], 1.0);
        let k = at(0.2, 0.5);
        assert_eq!((st.q1[k], st.q2[k]), (0.5, 0.0));
        let k = at(0.5, 0.8);
        assert_eq!((st.q1[k], st.q2[k]), (0.0, -0.5));
    }

    #[test]
    fn case_three_formula() {
        let s = Scenario {
            nx: 10,
            ny: 10,
            ..Scenario::collide2d(3)
        };
        let g = s.grid().unwrap();
        let st = build_initial_state(&s, &g).unwrap();
        let (x, y) = (g.x_center(3), g.y_center(7));
        let p = std::f64::consts::PI;
        let e = 1.0 + 0.05 * ((10.0 * p * x).cos() + (24.0 * p * x).cos()) * ((6.0 * p * y).cos() + (34.0 * p * y).cos());
        assert_eq!(st.rho_star[g.idx(3, 7)], e);
    }

    #[test]
    fn random_profile_is_seeded() {
        let mk = |seed| {
            let s = Scenario {
                nx: 16,
                ny: 16,
                seed,
                ..Scenario::evacuate2d(EvacuationProfile::Random)
            };
            build_initial_state(&s, &s.grid().unwrap()).unwrap().rho_star
        };
        assert_eq!(mk(7), mk(7));
        assert_ne!(mk(7), mk(8));
        let v = mk(3);
        assert!(v.iter().all(|r| (0.9..=1.1).contains(r)));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn parsing_and_validation() {
        assert_eq!("sl".parse::<SchemeKind>().unwrap(), SchemeKind::Sl);
        assert!("xx".parse::<SchemeKind>().is_err());
        assert_eq!("1.1".parse::<EvacuationProfile>().unwrap(), EvacuationProfile::Constant(1.1));
        assert_eq!("constant:0.9".parse::<EvacuationProfile>().unwrap(), EvacuationProfile::Constant(0.9));
        assert_eq!("step".parse::<EvacuationProfile>().unwrap(), EvacuationProfile::Step);
        assert!(Scenario::collide2d(4).validate().is_err());
        assert!(Scenario {
            eps: -1.0,
            ..Scenario::riemann1d()
        }
        .validate()
        .is_err());
        assert!(Scenario::evacuate2d(EvacuationProfile::Constant(0.5)).validate().is_err());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let dx = [0.4, 0.2, 0.1];
        let e: Vec<f64> = dx.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((fit_slope(&dx, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn self_comparison_has_zero_error() {
        let s = Scenario {
            nx: 64,
            t_end: 0.01,
            ..Scenario::smooth1d()
        };
        let r = run_scenario(&s).unwrap();
        let restricted = restrict(&r.final_state, 64).unwrap();
        let e = state_errors(&r.grid, &r.final_state, &restricted).unwrap();
        assert_eq!(e, [0.0; 4]);
    }

    #[test]
    fn run_reaches_end_time_and_records_history() {
        let s = Scenario {
            nx: 50,
            t_end: 0.02,
            frame_interval: Some(0.005),
            ..Scenario::smooth1d()
        };
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.final_state.time, 0.02);
        assert_eq!(r.steps, 10);
        assert_eq!(r.mass_history.len(), 11);
        assert_eq!(r.frames.len(), 5);
        let m0 = r.mass_history[0].1;
        assert!(r.mass_history.iter().all(|(_, m)| ((m - m0) / m0).abs() < 1e-12));
    }
}
