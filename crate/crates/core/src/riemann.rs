//! Exact solution of the 1D Riemann problem for the congested system in
//! `(rho, q, Z)` variables, and its congested limit as `eps -> 0`.
//!
//! The solution is built in the `(v, Z)` plane: the 1-wave curve issued from
//! the left state (shock branch for `Z > Z_l`, rarefaction branch below) is
//! strictly decreasing in `Z`, the 3-wave curve issued from the right state is
//! strictly increasing, so they cross at most once. `rho / Z` is constant
//! across both nonlinear waves; the two intermediate states differ by a
//! contact discontinuity moving with `v_m`.

use crate::eos::{PressureLaw, SINGULARITY_GUARD};
use crate::numerics::{brent, integrate, ScalarError};
use thiserror::Error;

/// Lower end of the bracket used for the curve intersection.
pub const Z_FLOOR: f64 = 1e-8;
const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiemannError {
    #[error("invalid primitive state (rho={rho}, v={v}, Z={z})")]
    InvalidState { rho: f64, v: f64, z: f64 },
    #[error("density fraction {0} outside (0, 1)")]
    Domain(f64),
    #[error("wave curves do not intersect below Z = 1 (near congestion); use the congested limit")]
    NearCongestion,
    #[error("a vacuum state forms (velocity gap {gap} at Z = {Z_FLOOR})")]
    Vacuum { gap: f64 },
    #[error("quadrature did not converge (achieved error {achieved})")]
    Quadrature { achieved: f64 },
    #[error("root finding failed: {0}")]
    RootFinding(&'static str),
    #[error("data are not congested in the limit (Z_m = {z_m0} < 1); solve the eps = 0 problem instead")]
    NotCongested { z_m0: f64 },
}

/// Primitive state `(rho, v, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimState {
    pub rho: f64,
    pub v: f64,
    pub z: f64,
}

impl PrimState {
    pub fn new(rho: f64, v: f64, z: f64) -> Self {
        Self { rho, v, z }
    }

    pub fn rho_star(&self) -> f64 {
        self.rho / self.z
    }

    pub fn q(&self) -> f64 {
        self.rho * self.v
    }

    fn validate(&self) -> Result<(), RiemannError> {
        let ok = self.rho > 0.0
            && self.v.is_finite()
            && self.rho.is_finite()
            && self.z > 0.0
            && self.z < 1.0 - SINGULARITY_GUARD;
        if ok {
            Ok(())
        } else {
            Err(RiemannError::InvalidState {
                rho: self.rho,
                v: self.v,
                z: self.z,
            })
        }
    }
}

/// Nonlinear characteristic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    One,
    Three,
}

impl Family {
    fn sign(self) -> f64 {
        match self {
            Family::One => -1.0,
            Family::Three => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock { speed: f64 },
    /// Fan between the `slow` and `fast` edge speeds.
    Rarefaction { slow: f64, fast: f64 },
}

impl Wave {
    fn slowest(&self) -> f64 {
        match *self {
            Wave::Shock { speed } => speed,
            Wave::Rarefaction { slow, .. } => slow,
        }
    }

    fn fastest(&self) -> f64 {
        match *self {
            Wave::Shock { speed } => speed,
            Wave::Rarefaction { fast, .. } => fast,
        }
    }

    pub fn is_shock(&self) -> bool {
        matches!(self, Wave::Shock { .. })
    }
}

/// Pressure with or without the singular part (`law = None` means `eps = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pressure {
    law: Option<PressureLaw>,
    gamma: f64,
}

impl Pressure {
    fn p(&self, z: f64) -> f64 {
        match &self.law {
            Some(l) => l.p(z) + l.pi(z),
            None => z.powf(self.gamma),
        }
    }

    fn dp(&self, z: f64) -> f64 {
        match &self.law {
            Some(l) => l.dp_total(z, true),
            None => self.gamma * z.powf(self.gamma - 1.0),
        }
    }
}

/// Self-similar solution of one Riemann problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannFan {
    pub left: PrimState,
    pub right: PrimState,
    /// `(rho_{m,l}, v_m, Z_m)`.
    pub mid_left: PrimState,
    /// `(rho_{m,r}, v_m, Z_m)`.
    pub mid_right: PrimState,
    pub wave1: Wave,
    pub wave3: Wave,
    /// `true` for the `eps -> 0` fan with `Z_m = 1` and pressure `p_bar`.
    pub congested_limit: bool,
    pub p_bar: Option<f64>,
    pressure: Pressure,
}

impl RiemannFan {
    pub fn contact_speed(&self) -> f64 {
        self.mid_left.v
    }

    pub fn v_m(&self) -> f64 {
        self.mid_left.v
    }

    pub fn z_m(&self) -> f64 {
        self.mid_left.z
    }

    pub fn slowest_speed(&self) -> f64 {
        self.wave1.slowest()
    }

    pub fn fastest_speed(&self) -> f64 {
        self.wave3.fastest()
    }

    /// Shock speeds `(sigma_-, sigma_+)` when the corresponding wave is a shock.
    pub fn shock_speeds(&self) -> (Option<f64>, Option<f64>) {
        let s = |w: &Wave| match *w {
            Wave::Shock { speed } => Some(speed),
            _ => None,
        };
        (s(&self.wave1), s(&self.wave3))
    }

    /// Pointwise state at `xi = x / t`.
    pub fn sample(&self, xi: f64) -> PrimState {
        if xi < self.contact_speed() {
            match self.wave1 {
                Wave::Shock { speed } => {
                    if xi < speed {
                        self.left
                    } else {
                        self.mid_left
                    }
                }
                Wave::Rarefaction { slow, fast } => {
                    if xi <= slow {
                        self.left
                    } else if xi >= fast {
                        self.mid_left
                    } else {
                        self.inside_fan(Family::One, xi)
                    }
                }
            }
        } else {
            match self.wave3 {
                Wave::Shock { speed } => {
                    if xi > speed {
                        self.right
                    } else {
                        self.mid_right
                    }
                }
                Wave::Rarefaction { slow, fast } => {
                    if xi >= fast {
                        self.right
                    } else if xi <= slow {
                        self.mid_right
                    } else {
                        self.inside_fan(Family::Three, xi)
                    }
                }
            }
        }
    }

    fn inside_fan(&self, family: Family, xi: f64) -> PrimState {
        let (hat, z_lo, z_hi) = match family {
            Family::One => (self.left, self.mid_left.z, self.left.z),
            Family::Three => (self.right, self.mid_right.z, self.right.z),
        };
        let rho_star = hat.rho_star();
        let s = family.sign();
        let lambda = |z: f64| {
            let v = integral_velocity(&self.pressure, &hat, z, family).unwrap_or(f64::NAN);
            v + s * (self.pressure.dp(z) / rho_star).sqrt()
        };
        let z = brent(|z| lambda(z) - xi, z_lo, z_hi, 1e-14).unwrap_or(0.5 * (z_lo + z_hi));
        let v = integral_velocity(&self.pressure, &hat, z, family).unwrap_or(f64::NAN);
        PrimState::new(rho_star * z, v, z)
    }

    /// Averages of the conserved variables `(rho, q, Z, rho_star)` over
    /// `xi in [a, b]`.
    pub fn average(&self, a: f64, b: f64) -> [f64; 4] {
        assert!(b > a);
        let mut cuts = vec![a, b];
        for w in [self.wave1, self.wave3] {
            cuts.push(w.slowest());
            cuts.push(w.fastest());
        }
        cuts.push(self.contact_speed());
        cuts.retain(|c| *c >= a && *c <= b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut acc = [0.0; 4];
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let in_fan = |wave: &Wave| match *wave {
                Wave::Rarefaction { slow, fast } => mid > slow && mid < fast,
                _ => false,
            };
            if in_fan(&self.wave1) || in_fan(&self.wave3) {
                // Gauss-Legendre, 8 points.
                const X: [f64; 4] = [
                    0.183_434_642_495_649_8,
                    0.525_532_409_916_329_0,
                    0.796_666_477_413_626_7,
                    0.960_289_856_497_536_3,
                ];
                const W: [f64; 4] = [
                    0.362_683_783_378_362_0,
                    0.313_706_645_877_887_3,
                    0.222_381_034_453_374_5,
                    0.101_228_536_290_376_3,
                ];
                let h = 0.5 * (hi - lo);
                for k in 0..4 {
                    for sgn in [-1.0, 1.0] {
                        let s = self.sample(mid + sgn * h * X[k]);
                        let c = conserved(&s);
                        for m in 0..4 {
                            acc[m] += W[k] * h * c[m];
                        }
                    }
                }
            } else {
                let c = conserved(&self.sample(mid));
                for m in 0..4 {
                    acc[m] += (hi - lo) * c[m];
                }
            }
        }
        acc.map(|v| v / (b - a))
    }
}

fn conserved(s: &PrimState) -> [f64; 4] {
    [s.rho, s.rho * s.v, s.z, s.rho_star()]
}

/// Free-function form of [`RiemannFan::sample`].
pub fn sample_solution(fan: &RiemannFan, xi: f64) -> PrimState {
    fan.sample(xi)
}

fn check_z(z: f64) -> Result<(), RiemannError> {
    if z > 0.0 && z < 1.0 && z.is_finite() {
        Ok(())
    } else {
        Err(RiemannError::Domain(z))
    }
}

fn hugoniot_v(p: &Pressure, hat: &PrimState, z: f64, family: Family) -> f64 {
    let jump = ((1.0 - hat.z / z) * (p.p(z) - p.p(hat.z))).max(0.0);
    let sgn = if z > hat.z {
        1.0
    } else if z < hat.z {
        -1.0
    } else {
        0.0
    };
    hat.v + family.sign() * sgn * (jump / hat.rho).sqrt()
}

fn shock_sigma(p: &Pressure, hat: &PrimState, z: f64, family: Family) -> f64 {
    let rho = z * hat.rho_star();
    if (z - hat.z).abs() <= 1e-14 * hat.z {
        // Acoustic limit.
        return hat.v + family.sign() * (hat.z / hat.rho * p.dp(hat.z)).sqrt();
    }
    let ratio = (p.p(z) - p.p(hat.z)) / (rho - hat.rho);
    hat.v + family.sign() * (rho / hat.rho).sqrt() * ratio.max(0.0).sqrt()
}

fn integral_velocity(p: &Pressure, hat: &PrimState, z: f64, family: Family) -> Result<f64, RiemannError> {
    let rho_star = hat.rho_star();
    // Z = u^2 removes the Z^{-1/2} endpoint singularity of the integrand for gamma = 2.
    let f = |u: f64| {
        let z = u * u;
        2.0 / u * (p.dp(z) / rho_star).sqrt()
    };
    let df = integrate(f, hat.z.sqrt(), z.sqrt(), QUAD_TOL).map_err(|e| match e {
        ScalarError::NotConverged { error, .. } => RiemannError::Quadrature { achieved: error },
        ScalarError::NoBracket => RiemannError::Quadrature { achieved: f64::NAN },
    })?;
    Ok(hat.v + family.sign() * df)
}

/// Velocity on the family's Hugoniot curve issued from `hat`.
pub fn hugoniot_velocity(
    hat: &PrimState,
    z: f64,
    family: Family,
    law: &PressureLaw,
) -> Result<f64, RiemannError> {
    hat.validate()?;
    check_z(z)?;
    Ok(hugoniot_v(&with_law(law), hat, z, family))
}

/// Speed of the shock joining `hat` to the state of fraction `z` on its Hugoniot curve.
pub fn shock_speed(hat: &PrimState, z: f64, family: Family, law: &PressureLaw) -> Result<f64, RiemannError> {
    hat.validate()?;
    check_z(z)?;
    Ok(shock_sigma(&with_law(law), hat, z, family))
}

/// Density on either nonlinear wave curve: `rho_star` is conserved.
pub fn curve_density(hat: &PrimState, z: f64) -> f64 {
    z * hat.rho_star()
}

/// Velocity on the family's integral curve issued from `hat`.
pub fn rarefaction_velocity(
    hat: &PrimState,
    z: f64,
    family: Family,
    law: &PressureLaw,
) -> Result<f64, RiemannError> {
    hat.validate()?;
    check_z(z)?;
    integral_velocity(&with_law(law), hat, z, family)
}

fn with_law(law: &PressureLaw) -> Pressure {
    Pressure {
        law: Some(*law),
        gamma: law.gamma(),
    }
}

/// 1-wave curve from the left state: shock above `Z_l`, rarefaction below.
fn left_curve(p: &Pressure, l: &PrimState, z: f64) -> Result<f64, RiemannError> {
    if z >= l.z {
        Ok(hugoniot_v(p, l, z, Family::One))
    } else {
        integral_velocity(p, l, z, Family::One)
    }
}

/// 3-wave curve from the right state: shock above `Z_r`, rarefaction below.
fn right_curve(p: &Pressure, r: &PrimState, z: f64) -> Result<f64, RiemannError> {
    if z >= r.z {
        Ok(hugoniot_v(p, r, z, Family::Three))
    } else {
        integral_velocity(p, r, z, Family::Three)
    }
}

fn assemble(p: Pressure, left: PrimState, right: PrimState, z_m: f64, v_m: f64) -> RiemannFan {
    let mid_left = PrimState::new(z_m * left.rho_star(), v_m, z_m);
    let mid_right = PrimState::new(z_m * right.rho_star(), v_m, z_m);
    let c = |s: &PrimState| (s.z / s.rho * p.dp(s.z)).sqrt();
    let wave1 = if z_m > left.z {
        Wave::Shock {
            speed: shock_sigma(&p, &left, z_m, Family::One),
        }
    } else {
        Wave::Rarefaction {
            slow: left.v - c(&left),
            fast: v_m - c(&mid_left),
        }
    };
    let wave3 = if z_m > right.z {
        Wave::Shock {
            speed: shock_sigma(&p, &right, z_m, Family::Three),
        }
    } else {
        Wave::Rarefaction {
            slow: v_m + c(&mid_right),
            fast: right.v + c(&right),
        }
    };
    RiemannFan {
        left,
        right,
        mid_left,
        mid_right,
        wave1,
        wave3,
        congested_limit: false,
        p_bar: None,
        pressure: p,
    }
}

/// Intersection of the two wave curves; `Ok(None)` when it lies at or beyond `Z = 1`.
fn intersect(p: &Pressure, l: &PrimState, r: &PrimState, z_hi: f64) -> Result<Option<(f64, f64)>, RiemannError> {
    let g = |z: f64| -> Result<f64, RiemannError> { Ok(left_curve(p, l, z)? - right_curve(p, r, z)?) };
    let g_lo = g(Z_FLOOR)?;
    if g_lo < 0.0 {
        return Err(RiemannError::Vacuum { gap: -g_lo });
    }
    let g_hi = g(z_hi)?;
    if g_hi > 0.0 {
        return Ok(None);
    }
    let mut failure = None;
    let z = brent(
        |z| match g(z) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        Z_FLOOR,
        z_hi,
        0.0,
    )
    .map_err(|_| RiemannError::RootFinding("curve intersection"))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let v = 0.5 * (left_curve(p, l, z)? + right_curve(p, r, z)?);
    Ok(Some((z, v)))
}

/// Exact Riemann solution with the full pressure `p + pi_eps`.
pub fn solve_riemann(left: &PrimState, right: &PrimState, law: &PressureLaw) -> Result<RiemannFan, RiemannError> {
    left.validate()?;
    right.validate()?;
    let p = with_law(law);
    if left == right {
        return Ok(assemble(p, *left, *right, left.z, left.v));
    }
    match intersect(&p, left, right, 1.0 - SINGULARITY_GUARD)? {
        Some((z, v)) => Ok(assemble(p, *left, *right, z, v)),
        None => Err(RiemannError::NearCongestion),
    }
}

/// Exact Riemann solution of the `eps = 0` system when the intersection lies
/// below `Z = 1`.
pub fn solve_riemann_background(left: &PrimState, right: &PrimState, gamma: f64) -> Result<RiemannFan, RiemannError> {
    left.validate()?;
    right.validate()?;
    let p = Pressure { law: None, gamma };
    match intersect(&p, left, right, 1.0)? {
        Some((z, v)) => Ok(assemble(p, *left, *right, z, v)),
        None => Err(RiemannError::NearCongestion),
    }
}

/// Limit fan as `eps -> 0` when the `eps = 0` curves cross at `Z >= 1`.
pub fn limit_congested_solution(left: &PrimState, right: &PrimState, gamma: f64) -> Result<RiemannFan, RiemannError> {
    left.validate()?;
    right.validate()?;
    let p0 = Pressure { law: None, gamma };
    if let Some((z_m0, _)) = intersect(&p0, left, right, 1.0)? {
        if z_m0 < 1.0 {
            return Err(RiemannError::NotCongested { z_m0 });
        }
    }
    let (pl, pr) = (left.z.powf(gamma), right.z.powf(gamma));
    let vl = |pb: f64| left.v - ((1.0 - left.z) * (pb - pl) / left.rho).max(0.0).sqrt();
    let vr = |pb: f64| right.v + ((1.0 - right.z) * (pb - pr) / right.rho).max(0.0).sqrt();
    let h = |pb: f64| vl(pb) - vr(pb);
    let lo = 1.0;
    let mut hi = 2.0;
    while h(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(RiemannError::RootFinding("congested pressure bracket"));
        }
    }
    let p_bar = brent(h, lo, hi, 0.0).map_err(|_| RiemannError::RootFinding("congested pressure"))?;
    let v_bar = 0.5 * (vl(p_bar) + vr(p_bar));
    let (rs_l, rs_r) = (left.rho_star(), right.rho_star());
    let sigma_m = left.v - (rs_l / (left.rho * (rs_l - left.rho))).sqrt() * (p_bar - pl).sqrt();
    let sigma_p = right.v + (rs_r / (right.rho * (rs_r - right.rho))).sqrt() * (p_bar - pr).sqrt();
    Ok(RiemannFan {
        left: *left,
        right: *right,
        mid_left: PrimState::new(rs_l, v_bar, 1.0),
        mid_right: PrimState::new(rs_r, v_bar, 1.0),
        wave1: Wave::Shock { speed: sigma_m },
        wave3: Wave::Shock { speed: sigma_p },
        congested_limit: true,
        p_bar: Some(p_bar),
        pressure: p0,
    })
}

/// Largest absolute Rankine-Hugoniot residual of the three jump conditions
/// between `a` and `b` for speed `sigma`, using the full pressure of `law`.
pub fn rankine_hugoniot_residual(a: &PrimState, b: &PrimState, sigma: f64, law: &PressureLaw) -> f64 {
    let p = |z: f64| law.p(z) + law.pi(z);
    let r1 = (b.q() - a.q()) - sigma * (b.rho - a.rho);
    let r2 = (b.rho * b.v * b.v + p(b.z) - a.rho * a.v * a.v - p(a.z)) - sigma * (b.q() - a.q());
    let r3 = (b.z * b.v - a.z * a.v) - sigma * (b.z - a.z);
    r1.abs().max(r2.abs()).max(r3.abs())
}

/// Residuals of every shock in `fan` (empty when there are none).
pub fn fan_shock_residuals(fan: &RiemannFan, law: &PressureLaw) -> Vec<f64> {
    let mut out = Vec::new();
    if let Wave::Shock { speed } = fan.wave1 {
        out.push(rankine_hugoniot_residual(&fan.left, &fan.mid_left, speed, law));
    }
    if let Wave::Shock { speed } = fan.wave3 {
        out.push(rankine_hugoniot_residual(&fan.mid_right, &fan.right, speed, law));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(eps: f64) -> PressureLaw {
        PressureLaw::new(eps, 2.0, 2.0).unwrap()
    }

    fn collision() -> (PrimState, PrimState) {
        (
            PrimState::new(0.7, 8.0 / 7.0, 7.0 / 12.0),
            PrimState::new(0.7, -8.0 / 7.0, 0.7),
        )
    }

    /// Brute-force jump conditions: for fixed Z the first and third equations
    /// give (q, sigma) in closed form; the second is then the residual that a
    /// point on the Hugoniot locus must cancel.
    fn brute_force_hugoniot(hat: &PrimState, z: f64, law: &PressureLaw, branch: f64) -> f64 {
        // Scan v for a sign change of the momentum residual on the requested branch.
        let rho = z * hat.rho_star();
        let p = |z: f64| law.p(z) + law.pi(z);
        let momentum = |v: f64| {
            let sigma = (rho * v - hat.q()) / (rho - hat.rho);
            (rho * v * v + p(z) - hat.rho * hat.v * hat.v - p(hat.z)) - sigma * (rho * v - hat.q())
        };
        let (a, b) = if branch < 0.0 { (hat.v - 50.0, hat.v) } else { (hat.v, hat.v + 50.0) };
        brent(momentum, a, b, 1e-15).unwrap()
    }

    #[test]
    fn zero_jump_identities() {
        let l = law(1e-3);
        let hat = PrimState::new(0.8, 1.0, 0.2);
        for f in [Family::One, Family::Three] {
            assert_eq!(hugoniot_velocity(&hat, 0.2, f, &l).unwrap(), 1.0);
            assert_eq!(rarefaction_velocity(&hat, 0.2, f, &l).unwrap(), 1.0);
        }
        for z in [0.05, 0.3, 0.9] {
            assert!((curve_density(&hat, z) / z - 4.0).abs() < 1e-14);
        }
        assert!(hugoniot_velocity(&hat, 1.0, Family::One, &l).is_err());
        assert!(hugoniot_velocity(&hat, 0.0, Family::One, &l).is_err());
    }

    #[test]
    fn hugoniot_matches_brute_force_jump_conditions() {
        let l = law(1e-3);
        let hat = PrimState::new(0.8, 1.0, 0.2);
        for &z in &[0.05, 0.1, 0.3, 0.5, 0.8, 0.95] {
            let v = hugoniot_velocity(&hat, z, Family::One, &l).unwrap();
            let branch = if z > hat.z { -1.0 } else { 1.0 };
            let vb = brute_force_hugoniot(&hat, z, &l, branch);
            assert!((v - vb).abs() < 1e-9, "z={z}: {v} vs {vb}");
            let sigma = shock_speed(&hat, z, Family::One, &l).unwrap();
            let other = PrimState::new(curve_density(&hat, z), v, z);
            assert!(rankine_hugoniot_residual(&hat, &other, sigma, &l) <= 1e-8);
        }
    }

    #[test]
    fn rarefaction_derivative_matches_integrand() {
        let l = law(1e-2);
        let hat = PrimState::new(0.7, 0.3, 0.6);
        let rs = hat.rho_star();
        for &z in &[0.2, 0.4, 0.55, 0.75] {
            let h = 1e-5;
            for f in [Family::One, Family::Three] {
                let fd = (rarefaction_velocity(&hat, z + h, f, &l).unwrap()
                    - rarefaction_velocity(&hat, z - h, f, &l).unwrap())
                    / (2.0 * h);
                let an = f.sign() / z * (l.dp_total(z, true) / rs).sqrt();
                assert!(((fd - an) / an).abs() < 1e-6, "z={z} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn shock_and_rarefaction_curves_are_tangent() {
        let l = law(1e-2);
        let hat = PrimState::new(0.7, 0.3, 0.6);
        let mut last = f64::INFINITY;
        for &h in &[1e-2, 1e-3, 1e-4] {
            let z = hat.z + h;
            let sh = (hugoniot_velocity(&hat, z, Family::One, &l).unwrap() - hat.v) / h;
            let ra = (rarefaction_velocity(&hat, z, Family::One, &l).unwrap() - hat.v) / h;
            let d = (sh - ra).abs();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn branch_table_matches_eigenvalue_monotonicity() {
        // Left 1-shock: Z > Z_l; lambda_1 must decrease from left to the state behind.
        let l = law(1e-2);
        let hat = PrimState::new(0.7, 0.3, 0.4);
        let lam = |s: &PrimState, k: usize| l.eigenvalues(s.rho, s.q(), s.z, true).unwrap()[k];
        let z = 0.6;
        let shocked = PrimState::new(curve_density(&hat, z), hugoniot_velocity(&hat, z, Family::One, &l).unwrap(), z);
        assert!(lam(&hat, 0) > lam(&shocked, 0));
        // Right 3-shock: Z > Z_r; lambda_3 decreases from the state behind to the right state.
        let shocked = PrimState::new(curve_density(&hat, z), hugoniot_velocity(&hat, z, Family::Three, &l).unwrap(), z);
        assert!(lam(&shocked, 2) > lam(&hat, 2));
        // Left 1-rarefaction: Z < Z_l; lambda_1 increases across the fan.
        let z = 0.2;
        let fan = PrimState::new(curve_density(&hat, z), rarefaction_velocity(&hat, z, Family::One, &l).unwrap(), z);
        assert!(lam(&fan, 0) > lam(&hat, 0));
        // Right 3-rarefaction: lambda_3 increases from the state behind to the right state.
        let fan = PrimState::new(curve_density(&hat, z), rarefaction_velocity(&hat, z, Family::Three, &l).unwrap(), z);
        assert!(lam(&hat, 2) > lam(&fan, 2));
    }

    #[test]
    fn identical_states_give_constant_solution() {
        let s = PrimState::new(0.7, 0.2, 0.5);
        let fan = solve_riemann(&s, &s, &law(1e-2)).unwrap();
        assert_eq!(fan.mid_left, s);
        assert_eq!(fan.mid_right, s);
        for xi in [-3.0, 0.0, 0.2, 3.0] {
            let p = fan.sample(xi);
            assert!((p.rho - 0.7).abs() < 1e-14 && (p.v - 0.2).abs() < 1e-14);
        }
    }

    #[test]
    fn collision_test_two_shocks_and_contact() {
        let (l, r) = collision();
        let fan = solve_riemann(&l, &r, &law(1e-2)).unwrap();
        assert!(fan.wave1.is_shock() && fan.wave3.is_shock());
        assert!((fan.z_m() - 0.940_151_703_9).abs() < 1e-9, "{}", fan.z_m());
        assert!((fan.v_m() + 0.130_749_008_9).abs() < 1e-9, "{}", fan.v_m());
        let x_contact = 0.5 + 0.1 * fan.contact_speed();
        assert!((x_contact - 0.487).abs() < 5e-4, "{x_contact}");
        let (sm, sp) = fan.shock_speeds();
        assert!((sm.unwrap() + 2.21286).abs() < 1e-4);
        assert!((sp.unwrap() - 2.81937).abs() < 1e-4);
        for res in fan_shock_residuals(&fan, &law(1e-2)) {
            assert!(res <= 1e-8, "{res}");
        }
    }

    #[test]
    fn stiff_collision_wave_speed() {
        let (l, r) = collision();
        let lw = law(1e-4);
        let fan = solve_riemann(&l, &r, &lw).unwrap();
        assert!((fan.z_m() - 0.993_023_023_6).abs() < 1e-8);
        assert!((fan.v_m() + 0.111_916_201_1).abs() < 1e-8);
        let m = fan.mid_left;
        let lam = lw.eigenvalues(m.rho, m.q(), m.z, true).unwrap();
        assert!((lam[0].abs() - 22.0).abs() < 0.5, "{lam:?}");
    }

    #[test]
    fn uncongested_intersection() {
        let lw = law(1e-3);
        let l = PrimState::new(0.8, 1.0, 0.2);
        let fan = solve_riemann(&l, &PrimState::new(0.8, 0.0, 0.4), &lw).unwrap();
        assert!((fan.z_m() - 0.67569).abs() < 1e-4);
        assert!((fan.v_m() - 0.391449).abs() < 1e-5);
        assert!(fan.z_m() < 0.9);
        let fan = solve_riemann(&l, &PrimState::new(0.8, -2.0, 0.4), &lw).unwrap();
        assert!((fan.z_m() - 0.976683).abs() < 1e-5);
        assert!((fan.v_m() + 0.628647).abs() < 1e-5);
    }

    #[test]
    fn sampling_and_contact_continuity() {
        let (l, r) = collision();
        let lw = law(1e-2);
        let fan = solve_riemann(&l, &r, &lw).unwrap();
        assert_eq!(fan.sample(-100.0), l);
        assert_eq!(fan.sample(100.0), r);
        let c = fan.contact_speed();
        let a = fan.sample(c - 1e-9);
        let b = fan.sample(c + 1e-9);
        assert_eq!(a.v, b.v);
        assert!((lw.pi(a.z) + lw.p(a.z) - lw.pi(b.z) - lw.p(b.z)).abs() < 1e-14);
        assert!((a.rho - b.rho).abs() > 1e-3);
    }

    #[test]
    fn rarefaction_fan_sampling_is_continuous() {
        let lw = law(1e-2);
        let l = PrimState::new(0.6, -0.5, 0.5);
        let r = PrimState::new(0.6, 0.5, 0.5);
        let fan = solve_riemann(&l, &r, &lw).unwrap();
        let Wave::Rarefaction { slow, fast } = fan.wave1 else { panic!("expected rarefaction") };
        let mut prev = fan.sample(slow);
        let n = 50;
        for k in 1..=n {
            let xi = slow + (fast - slow) * k as f64 / n as f64;
            let s = fan.sample(xi);
            assert!((s.z - prev.z).abs() < 0.02);
            // lambda_1 equals xi inside the fan
            let lam = lw.eigenvalues(s.rho, s.q(), s.z, true).unwrap()[0];
            assert!((lam - xi).abs() < 1e-8);
            prev = s;
        }
        assert!((prev.z - fan.z_m()).abs() < 1e-8);
    }

    #[test]
    fn vacuum_is_reported() {
        let lw = law(1e-2);
        let l = PrimState::new(0.1, -20.0, 0.1);
        let r = PrimState::new(0.1, 20.0, 0.1);
        assert!(matches!(solve_riemann(&l, &r, &lw), Err(RiemannError::Vacuum { .. })));
    }

    #[test]
    fn limit_fan_symmetric_and_consistent() {
        let l = PrimState::new(0.7, 1.0, 0.7);
        let r = PrimState::new(0.7, -1.0, 0.7);
        let fan = limit_congested_solution(&l, &r, 2.0).unwrap();
        assert!(fan.v_m().abs() < 1e-12);
        // scalar bisection oracle for p_bar
        let (rl, rr) = (collision().0, collision().1);
        let fan = limit_congested_solution(&rl, &rr, 2.0).unwrap();
        let pb = fan.p_bar.unwrap();
        let f = |p: f64| {
            rl.v - ((1.0 - rl.z) * (p - rl.z * rl.z) / rl.rho).sqrt()
                - rr.v
                - ((1.0 - rr.z) * (p - rr.z * rr.z) / rr.rho).sqrt()
        };
        let (mut a, mut b) = (1.0, 100.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((pb - 0.5 * (a + b)).abs() < 1e-10);
        assert!((pb - 2.978_174_67).abs() < 1e-7);
        assert!((fan.v_m() + 0.110_209_78).abs() < 1e-7);
        assert!(f(pb).abs() < 1e-10);
    }

    #[test]
    fn limit_rejects_uncongested_data() {
        let l = PrimState::new(0.8, 1.0, 0.2);
        let r = PrimState::new(0.8, 0.0, 0.4);
        assert!(matches!(
            limit_congested_solution(&l, &r, 2.0),
            Err(RiemannError::NotCongested { .. })
        ));
    }

    #[test]
    fn small_eps_approaches_limit() {
        let (l, r) = collision();
        let lim = limit_congested_solution(&l, &r, 2.0).unwrap();
        let fan = solve_riemann(&l, &r, &law(1e-6)).unwrap();
        assert!((fan.v_m() - lim.v_m()).abs() < 1e-3);
        assert!(fan.z_m() > 0.999);
    }

    #[test]
    fn averages_of_piecewise_constant_fan() {
        let (l, r) = collision();
        let fan = solve_riemann(&l, &r, &law(1e-2)).unwrap();
        let c = fan.contact_speed();
        let avg = fan.average(c - 0.1, c + 0.1);
        let expect = 0.5 * (fan.mid_left.rho + fan.mid_right.rho);
        assert!((avg[0] - expect).abs() < 1e-14);
        assert!((avg[2] - fan.z_m()).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn fans_conserve_rho_star_and_satisfy_jumps(
                rl in 0.3f64..1.0, zl in 0.1f64..0.8, vl in -1.5f64..1.5,
                rr in 0.3f64..1.0, zr in 0.1f64..0.8, vr in -1.5f64..1.5,
            ) {
                let lw = law(1e-2);
                let l = PrimState::new(rl, vl, zl);
                let r = PrimState::new(rr, vr, zr);
                let fan = match solve_riemann(&l, &r, &lw) {
                    Ok(f) => f,
                    Err(RiemannError::Vacuum { .. }) => return Ok(()),
                    Err(e) => panic!("{e}"),
                };
                let rel = |a: f64, b: f64| ((a - b) / b).abs();
                prop_assert!(rel(fan.mid_left.rho_star(), l.rho_star()) <= 1e-12);
                prop_assert!(rel(fan.mid_right.rho_star(), r.rho_star()) <= 1e-12);
                for res in fan_shock_residuals(&fan, &lw) {
                    prop_assert!(res <= 1e-8, "residual {}", res);
                }
                prop_assert!(fan.wave1.fastest() <= fan.v_m() + 1e-12);
                prop_assert!(fan.wave3.slowest() >= fan.v_m() - 1e-12);
                let gap = (left_curve(&with_law(&lw), &l, fan.z_m()).unwrap()
                    - right_curve(&with_law(&lw), &r, fan.z_m()).unwrap()).abs();
                prop_assert!(gap <= 1e-10, "gap {}", gap);
            }
        }
    }
}
