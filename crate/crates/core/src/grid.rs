//! Uniform grids on the unit interval / unit square, cell-centred state
//! storage and ghost-layer filling.
//!
//! Fields are flat row-major arrays, `(i, j) -> j * nx + i`. A 1D grid is the
//! special case `ny = 1` with no ghost rows.

use crate::eos::PressureLaw;
use thiserror::Error;

/// Densities are clamped to this value from below after every step.
pub const DENSITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least one cell per axis (got {nx}x{ny})")]
    EmptyGrid { nx: usize, ny: usize },
    #[error("periodic boundaries must come in matched pairs")]
    UnmatchedPeriodic,
    #[error("ghost width {width} exceeds the {n} cells of the axis")]
    GhostWidth { width: usize, n: usize },
    #[error("field shapes differ ({0} vs {1})")]
    ShapeMismatch(usize, usize),
    #[error("invalid outflow window [{0}, {1}]")]
    Window(f64, f64),
}

/// Fixed exterior state used by Dirichlet sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorState {
    pub rho: f64,
    pub q: [f64; 2],
    pub z: f64,
    pub rho_star: f64,
}

impl ExteriorState {
    /// State from density, momentum and density fraction.
    pub fn new(rho: f64, q: [f64; 2], z: f64) -> Self {
        Self { rho, q, z, rho_star: rho / z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Reflective wall: normal momentum is odd, everything else even.
    Wall,
    Dirichlet(ExteriorState),
    /// Wall, except for faces whose tangential coordinate lies in `[lo, hi]`.
    /// There the congestion pressure vanishes outside and every other field
    /// is extended with zero gradient.
    OutflowWindow { lo: f64, hi: f64 },
}

/// Sides of the domain, in the order used by [`Grid::boundaries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    XLo = 0,
    XHi = 1,
    YLo = 2,
    YHi = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    bc: [Boundary; 4],
}

impl Grid {
    pub fn new_1d(nx: usize, left: Boundary, right: Boundary) -> Result<Self, GridError> {
        Self::build(1, nx, 1, [left, right, Boundary::Periodic, Boundary::Periodic])
    }

    /// `bc` is ordered `[x_lo, x_hi, y_lo, y_hi]`.
    pub fn new_2d(nx: usize, ny: usize, bc: [Boundary; 4]) -> Result<Self, GridError> {
        Self::build(2, nx, ny, bc)
    }

    pub fn periodic_1d(nx: usize) -> Result<Self, GridError> {
        Self::new_1d(nx, Boundary::Periodic, Boundary::Periodic)
    }

    pub fn periodic_2d(nx: usize, ny: usize) -> Result<Self, GridError> {
        Self::new_2d(nx, ny, [Boundary::Periodic; 4])
    }

    fn build(dim: usize, nx: usize, ny: usize, bc: [Boundary; 4]) -> Result<Self, GridError> {
        if nx == 0 || ny == 0 {
            return Err(GridError::EmptyGrid { nx, ny });
        }
        let per = |b: &Boundary| matches!(b, Boundary::Periodic);
        if per(&bc[0]) != per(&bc[1]) || (dim == 2 && per(&bc[2]) != per(&bc[3])) {
            return Err(GridError::UnmatchedPeriodic);
        }
        for b in &bc {
            if let Boundary::OutflowWindow { lo, hi } = *b {
                if !(lo < hi) {
                    return Err(GridError::Window(lo, hi));
                }
            }
        }
        Ok(Self {
            dim,
            nx,
            ny,
            dx: 1.0 / nx as f64,
            dy: 1.0 / ny as f64,
            bc,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    pub fn boundaries(&self) -> &[Boundary; 4] {
        &self.bc
    }

    pub fn boundary(&self, side: Side) -> &Boundary {
        &self.bc[side as usize]
    }

    pub fn is_periodic_x(&self) -> bool {
        matches!(self.bc[0], Boundary::Periodic)
    }

    pub fn is_periodic_y(&self) -> bool {
        self.dim == 1 || matches!(self.bc[2], Boundary::Periodic)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        if self.dim == 1 {
            0.0
        } else {
            (j as f64 + 0.5) * self.dy
        }
    }

    /// Ghost width used in the y direction for a requested width.
    pub(crate) fn gy(&self, width: usize) -> usize {
        if self.dim == 1 {
            0
        } else {
            width
        }
    }
}

/// Cell-centred unknowns. `q2` is kept (all zeros) in 1D.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub rho: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub z: Vec<f64>,
    pub rho_star: Vec<f64>,
    pub time: f64,
}

impl GridState {
    /// Uniform state on `grid`.
    pub fn uniform(grid: &Grid, rho: f64, q: [f64; 2], rho_star: f64) -> Self {
        let n = grid.n_cells();
        Self {
            rho: vec![rho; n],
            q1: vec![q[0]; n],
            q2: vec![q[1]; n],
            z: vec![rho / rho_star; n],
            rho_star: vec![rho_star; n],
            time: 0.0,
        }
    }

    /// State from `(rho, q, rho_star)` per cell; `Z` is derived.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> (f64, [f64; 2], f64)) -> Self {
        let n = grid.n_cells();
        let mut s = Self {
            rho: vec![0.0; n],
            q1: vec![0.0; n],
            q2: vec![0.0; n],
            z: vec![0.0; n],
            rho_star: vec![0.0; n],
            time: 0.0,
        };
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let k = grid.idx(i, j);
                let (rho, q, rs) = f(grid.x_center(i), grid.y_center(j));
                s.rho[k] = rho;
                s.q1[k] = q[0];
                s.q2[k] = if grid.dim() == 1 { 0.0 } else { q[1] };
                s.rho_star[k] = rs;
                s.z[k] = rho / rs;
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn refresh_rho_star(&mut self) {
        for k in 0..self.len() {
            self.rho_star[k] = self.rho[k] / self.z[k];
        }
    }

    pub fn refresh_z(&mut self) {
        for k in 0..self.len() {
            self.z[k] = self.rho[k] / self.rho_star[k];
        }
    }

    /// Clamps densities below [`DENSITY_FLOOR`]; returns the number of clamped cells.
    /// `z` is rescaled so that `rho_star` is untouched.
    pub fn apply_density_floor(&mut self) -> usize {
        let mut count = 0;
        for k in 0..self.len() {
            if self.rho[k] < DENSITY_FLOOR {
                self.rho[k] = DENSITY_FLOOR;
                self.z[k] = DENSITY_FLOOR / self.rho_star[k];
                count += 1;
            }
        }
        count
    }

    pub fn max_z(&self) -> f64 {
        self.z.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        [&self.rho, &self.q1, &self.q2, &self.z, &self.rho_star]
            .iter()
            .all(|f| f.iter().all(|v| v.is_finite()))
    }
}

/// Which physical quantity a field represents; decides the ghost rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Rho,
    Q1,
    Q2,
    Z,
    RhoStar,
    /// Congestion pressure; Dirichlet ghosts use `pi_eps(Z_s)`.
    Pi(PressureLaw),
    V1,
    V2,
    /// `Z / rho`.
    Weight,
    /// Even under reflection, zero exterior value.
    Scalar,
}

impl FieldKind {
    fn odd_x(&self) -> bool {
        matches!(self, FieldKind::Q1 | FieldKind::V1)
    }

    fn odd_y(&self) -> bool {
        matches!(self, FieldKind::Q2 | FieldKind::V2)
    }

    fn exterior(&self, s: &ExteriorState) -> f64 {
        match self {
            FieldKind::Rho => s.rho,
            FieldKind::Q1 => s.q[0],
            FieldKind::Q2 => s.q[1],
            FieldKind::Z => s.z,
            FieldKind::RhoStar => s.rho_star,
            FieldKind::Pi(law) => law.pi(s.z),
            FieldKind::V1 => s.q[0] / s.rho,
            FieldKind::V2 => s.q[1] / s.rho,
            FieldKind::Weight => s.z / s.rho,
            FieldKind::Scalar => 0.0,
        }
    }
}

/// How a ghost cell relates to the interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum GhostSource {
    /// Copy of an interior cell, optionally sign-flipped.
    Cell { k: usize, sign: f64 },
    Fixed(f64),
}

/// A field with `gx` ghost columns and `gy` ghost rows on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Padded {
    pub data: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub gx: usize,
    pub gy: usize,
}

impl Padded {
    pub fn zeros(nx: usize, ny: usize, gx: usize, gy: usize) -> Self {
        Self {
            data: vec![0.0; (nx + 2 * gx) * (ny + 2 * gy)],
            nx,
            ny,
            gx,
            gy,
        }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * self.gx
    }

    /// Flat index of cell `(i, j)`, where negative or `>= n` indices address ghosts.
    #[inline]
    pub fn pidx(&self, i: isize, j: isize) -> usize {
        ((j + self.gy as isize) as usize) * self.stride() + (i + self.gx as isize) as usize
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[self.pidx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let p = self.pidx(i, j);
        self.data[p] = v;
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny as isize {
            for i in 0..self.nx as isize {
                out.push(self.at(i, j));
            }
        }
        out
    }
}

/// Resolves the ghost cell `(i, j)` of a padded field (x rule first, then y rule).
pub(crate) fn ghost_source(grid: &Grid, kind: &FieldKind, i: isize, j: isize) -> GhostSource {
    let nx = grid.nx() as isize;
    let ny = grid.ny() as isize;
    let mut sign = 1.0;
    let (mut ii, mut jj) = (i, j);
    if ii < 0 || ii >= nx {
        let side = if ii < 0 { Side::XLo } else { Side::XHi };
        let tangential = grid.y_center(jj.clamp(0, ny - 1) as usize);
        match axis_rule(grid.boundary(side), ii, nx, tangential) {
            AxisRule::Map(m) => ii = m,
            AxisRule::Open(m) => {
                if matches!(kind, FieldKind::Pi(_)) {
                    return GhostSource::Fixed(0.0);
                }
                ii = m;
            }
            AxisRule::Mirror(m) => {
                ii = m;
                if kind.odd_x() {
                    sign = -sign;
                }
            }
            AxisRule::Fixed(s) => return GhostSource::Fixed(kind.exterior(&s)),
        }
    }
    if jj < 0 || jj >= ny {
        let side = if jj < 0 { Side::YLo } else { Side::YHi };
        let tangential = grid.x_center(ii as usize);
        match axis_rule(grid.boundary(side), jj, ny, tangential) {
            AxisRule::Map(m) => jj = m,
            AxisRule::Open(m) => {
                if matches!(kind, FieldKind::Pi(_)) {
                    return GhostSource::Fixed(0.0);
                }
                jj = m;
            }
            AxisRule::Mirror(m) => {
                jj = m;
                if kind.odd_y() {
                    sign = -sign;
                }
            }
            AxisRule::Fixed(s) => return GhostSource::Fixed(kind.exterior(&s)),
        }
    }
    GhostSource::Cell {
        k: grid.idx(ii as usize, jj as usize),
        sign,
    }
}

enum AxisRule {
    Map(isize),
    /// Exit: zero gradient, except a free-pressure exterior.
    Open(isize),
    Mirror(isize),
    Fixed(ExteriorState),
}

fn axis_rule(bc: &Boundary, i: isize, n: isize, tangential: f64) -> AxisRule {
    match *bc {
        Boundary::Periodic => AxisRule::Map(i.rem_euclid(n)),
        Boundary::Wall => AxisRule::Mirror(mirror(i, n)),
        Boundary::Dirichlet(s) => AxisRule::Fixed(s),
        Boundary::OutflowWindow { lo, hi } => {
            if tangential >= lo && tangential <= hi {
                AxisRule::Open(i.clamp(0, n - 1))
            } else {
                AxisRule::Mirror(mirror(i, n))
            }
        }
    }
}

#[inline]
fn mirror(i: isize, n: isize) -> isize {
    if i < 0 {
        -1 - i
    } else {
        2 * n - 1 - i
    }
}

/// Copies `field` into a padded array and fills `width` ghost layers.
pub fn fill_ghosts(
    grid: &Grid,
    field: &[f64],
    kind: FieldKind,
    width: usize,
) -> Result<Padded, GridError> {
    if field.len() != grid.n_cells() {
        return Err(GridError::ShapeMismatch(field.len(), grid.n_cells()));
    }
    if width > grid.nx() {
        return Err(GridError::GhostWidth { width, n: grid.nx() });
    }
    if grid.dim() == 2 && width > grid.ny() {
        return Err(GridError::GhostWidth { width, n: grid.ny() });
    }
    Ok(fill_ghosts_unchecked(grid, field, kind, width))
}

pub(crate) fn fill_ghosts_unchecked(grid: &Grid, field: &[f64], kind: FieldKind, width: usize) -> Padded {
    let (nx, ny) = (grid.nx(), grid.ny());
    let gy = grid.gy(width);
    let mut p = Padded::zeros(nx, ny, width, gy);
    for j in 0..ny {
        let row = &field[j * nx..(j + 1) * nx];
        let start = p.pidx(0, j as isize);
        p.data[start..start + nx].copy_from_slice(row);
    }
    let (wx, wy) = (width as isize, gy as isize);
    for j in -wy..ny as isize + wy {
        for i in -wx..nx as isize + wx {
            let interior = i >= 0 && i < nx as isize && j >= 0 && j < ny as isize;
            if interior {
                continue;
            }
            let v = match ghost_source(grid, &kind, i, j) {
                GhostSource::Cell { k, sign } => sign * field[k],
                GhostSource::Fixed(v) => v,
            };
            p.set(i, j, v);
        }
    }
    p
}

/// Padded copies of every state variable.
#[derive(Debug, Clone)]
pub struct PaddedState {
    pub rho: Padded,
    pub q1: Padded,
    pub q2: Padded,
    pub z: Padded,
    pub rho_star: Padded,
}

impl PaddedState {
    pub fn new(grid: &Grid, s: &GridState, width: usize) -> Result<Self, GridError> {
        Ok(Self {
            rho: fill_ghosts(grid, &s.rho, FieldKind::Rho, width)?,
            q1: fill_ghosts(grid, &s.q1, FieldKind::Q1, width)?,
            q2: fill_ghosts(grid, &s.q2, FieldKind::Q2, width)?,
            z: fill_ghosts(grid, &s.z, FieldKind::Z, width)?,
            rho_star: fill_ghosts(grid, &s.rho_star, FieldKind::RhoStar, width)?,
        })
    }
}

/// `sum rho * cell volume`.
pub fn total_mass(state: &GridState, grid: &Grid) -> f64 {
    state.rho.iter().sum::<f64>() * grid.cell_volume()
}

/// `sum |a - b| * cell volume`.
pub fn l1_error(a: &[f64], b: &[f64], grid: &Grid) -> Result<f64, GridError> {
    if a.len() != b.len() {
        return Err(GridError::ShapeMismatch(a.len(), b.len()));
    }
    if a.len() != grid.n_cells() {
        return Err(GridError::ShapeMismatch(a.len(), grid.n_cells()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unmatched_periodic() {
        assert_eq!(
            Grid::new_1d(4, Boundary::Periodic, Boundary::Wall),
            Err(GridError::UnmatchedPeriodic)
        );
        assert!(Grid::new_2d(
            4,
            4,
            [Boundary::Periodic, Boundary::Periodic, Boundary::Wall, Boundary::Periodic]
        )
        .is_err());
        assert!(Grid::new_1d(0, Boundary::Wall, Boundary::Wall).is_err());
    }

    #[test]
    fn spacing_and_centres() {
        let g = Grid::new_2d(4, 8, [Boundary::Wall; 4]).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.dy(), 0.125);
        assert_eq!(g.x_center(1), 0.375);
        assert_eq!(g.idx(1, 2), 9);
        assert_eq!(g.cell_volume(), 0.25 * 0.125);
    }

    #[test]
    fn periodic_ghosts() {
        let g = Grid::periodic_1d(3).unwrap();
        let p = fill_ghosts(&g, &[1.0, 2.0, 3.0], FieldKind::Rho, 1).unwrap();
        assert_eq!(p.data, vec![3.0, 1.0, 2.0, 3.0, 1.0]);
        let p = fill_ghosts(&g, &[1.0, 2.0, 3.0], FieldKind::Rho, 2).unwrap();
        assert_eq!(p.data, vec![2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0]);
    }

    #[test]
    fn wall_ghosts_reflect_normal_momentum() {
        let g = Grid::new_1d(3, Boundary::Wall, Boundary::Wall).unwrap();
        let q = fill_ghosts(&g, &[0.5, 0.1, 0.2], FieldKind::Q1, 2).unwrap();
        assert_eq!(q.at(-1, 0), -0.5);
        assert_eq!(q.at(-2, 0), -0.1);
        assert_eq!(q.at(3, 0), -0.2);
        let r = fill_ghosts(&g, &[0.7, 0.8, 0.9], FieldKind::Rho, 1).unwrap();
        assert_eq!(r.at(-1, 0), 0.7);
        assert_eq!(r.at(3, 0), 0.9);
    }

    #[test]
    fn wall_keeps_tangential_momentum() {
        let g = Grid::new_2d(2, 2, [Boundary::Wall; 4]).unwrap();
        let q2 = fill_ghosts(&g, &[1.0, 2.0, 3.0, 4.0], FieldKind::Q2, 1).unwrap();
        assert_eq!(q2.at(-1, 0), 1.0);
        assert_eq!(q2.at(0, -1), -1.0);
        assert_eq!(q2.at(1, 2), -4.0);
    }

    #[test]
    fn dirichlet_ghosts_equal_exterior_state() {
        let s = ExteriorState::new(0.7, [0.8, 0.0], 7.0 / 12.0);
        let t = ExteriorState::new(0.7, [-0.8, 0.0], 0.7);
        let g = Grid::new_1d(4, Boundary::Dirichlet(s), Boundary::Dirichlet(t)).unwrap();
        let q = fill_ghosts(&g, &[0.0; 4], FieldKind::Q1, 2).unwrap();
        assert_eq!(&q.data[..2], &[0.8, 0.8]);
        assert_eq!(&q.data[6..], &[-0.8, -0.8]);
        let rs = fill_ghosts(&g, &[0.0; 4], FieldKind::RhoStar, 1).unwrap();
        assert!((rs.at(-1, 0) - 1.2).abs() < 1e-15);
        assert!((rs.at(4, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn outflow_window_copies_inside_and_reflects_outside() {
        let bc = [
            Boundary::Wall,
            Boundary::Wall,
            Boundary::OutflowWindow { lo: 0.4, hi: 0.6 },
            Boundary::Wall,
        ];
        let g = Grid::new_2d(4, 4, bc).unwrap();
        let q2: Vec<f64> = (0..16).map(|k| 1.0 + k as f64).collect();
        let p = fill_ghosts(&g, &q2, FieldKind::Q2, 2).unwrap();
        // x centres: 0.125, 0.375, 0.625, 0.875 -> none inside [0.4, 0.6]
        assert_eq!(p.at(1, -1), -2.0);
        let g = Grid::new_2d(5, 5, bc).unwrap();
        let q2: Vec<f64> = (0..25).map(|k| 1.0 + k as f64).collect();
        let p = fill_ghosts(&g, &q2, FieldKind::Q2, 2).unwrap();
        // centre column x = 0.5 is inside the window
        assert_eq!(p.at(2, -1), 3.0);
        assert_eq!(p.at(2, -2), 3.0);
        assert_eq!(p.at(1, -1), -2.0);
        // the congestion pressure is released through the exit
        let law = PressureLaw::new(1e-2, 2.0, 2.0).unwrap();
        let p = fill_ghosts(&g, &q2, FieldKind::Pi(law), 1).unwrap();
        assert_eq!(p.at(2, -1), 0.0);
        assert_eq!(p.at(1, -1), 2.0);
    }

    #[test]
    fn corners_apply_x_then_y() {
        let g = Grid::new_2d(2, 2, [Boundary::Periodic, Boundary::Periodic, Boundary::Wall, Boundary::Wall]).unwrap();
        let f = [1.0, 2.0, 3.0, 4.0];
        let p = fill_ghosts(&g, &f, FieldKind::Q2, 1).unwrap();
        // (-1,-1): x wraps to column 1, y mirrors to row 0 with sign flip
        assert_eq!(p.at(-1, -1), -2.0);
        assert_eq!(p.at(2, 2), -3.0);
    }

    #[test]
    fn width_larger_than_grid_is_rejected() {
        let g = Grid::periodic_1d(2).unwrap();
        assert_eq!(
            fill_ghosts(&g, &[1.0, 2.0], FieldKind::Rho, 3),
            Err(GridError::GhostWidth { width: 3, n: 2 })
        );
    }

    #[test]
    fn mass_of_uniform_states() {
        let g = Grid::new_2d(8, 8, [Boundary::Wall; 4]).unwrap();
        let s = GridState::uniform(&g, 0.6, [0.0, 0.0], 1.0);
        assert!((total_mass(&s, &g) - 0.6).abs() < 1e-14);
        let mut d = s.clone();
        d.rho.iter_mut().for_each(|r| *r *= 2.0);
        assert!((total_mass(&d, &g) - 1.2).abs() < 1e-14);
    }

    #[test]
    fn l1_error_basics() {
        let g = Grid::periodic_1d(4).unwrap();
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(l1_error(&a, &a, &g).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        assert!((l1_error(&a, &b, &g).unwrap() - 0.3).abs() < 1e-15);
        assert!(l1_error(&a, &b[..3], &g).is_err());
    }

    #[test]
    fn density_floor_counts_cells() {
        let g = Grid::periodic_1d(3).unwrap();
        let mut s = GridState::uniform(&g, 0.5, [0.0, 0.0], 1.0);
        s.rho[1] = -1.0;
        assert_eq!(s.apply_density_floor(), 1);
        assert_eq!(s.rho[1], DENSITY_FLOOR);
        assert_eq!(s.rho_star[1], 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn boundary() -> impl Strategy<Value = Boundary> {
            prop_oneof![
                Just(Boundary::Wall),
                Just(Boundary::OutflowWindow { lo: 0.3, hi: 0.7 }),
                Just(Boundary::Dirichlet(ExteriorState::new(0.5, [0.1, 0.2], 0.25))),
            ]
        }

        proptest! {
            #[test]
            fn ghost_fill_preserves_interior(
                nx in 2usize..9, ny in 2usize..9, periodic: bool,
                b in boundary(),
                vals in proptest::collection::vec(-5.0f64..5.0, 64),
            ) {
                let bc = if periodic { [Boundary::Periodic; 4] } else { [b; 4] };
                let g = Grid::new_2d(nx, ny, bc).unwrap();
                let f: Vec<f64> = vals[..nx * ny].to_vec();
                let w = nx.min(ny).min(2);
                let p = fill_ghosts(&g, &f, FieldKind::Q1, w).unwrap();
                prop_assert_eq!(p.interior(), f);
            }
        }
    }
}
