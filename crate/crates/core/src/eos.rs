//! Pressure laws for the congested Euler system.
//!
//! Two power laws act on the density fraction `Z = rho / rho_star`:
//!
//! ```text
//! p(Z)       = Z^gamma                       (background pressure)
//! pi_eps(Z)  = eps * (Z / (1 - Z))^alpha     (singular congestion pressure)
//! p_eps(Z)   = p(Z) + pi_eps(Z)
//! ```
//!
//! All functions are pure scalar maps. Evaluating over a field is the caller's loop.

use thiserror::Error;

/// Evaluations of `pi_eps` and its derivative reject `Z >= 1 - SINGULARITY_GUARD`.
pub const SINGULARITY_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EosError {
    #[error("invalid pressure law parameters (eps={eps}, alpha={alpha}, gamma={gamma})")]
    InvalidLaw { eps: f64, alpha: f64, gamma: f64 },
    #[error("density fraction {0} outside the admissible domain")]
    Domain(f64),
    #[error("density fraction {0} too close to the congestion singularity")]
    Singularity(f64),
    #[error("non-positive density {0}")]
    Density(f64),
}

/// Parameters of the background and singular pressures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLaw {
    eps: f64,
    alpha: f64,
    gamma: f64,
}

impl PressureLaw {
    pub fn new(eps: f64, alpha: f64, gamma: f64) -> Result<Self, EosError> {
        let ok = eps.is_finite() && alpha.is_finite() && gamma.is_finite();
        if !ok || eps <= 0.0 || alpha <= 0.0 || gamma <= 1.0 {
            return Err(EosError::InvalidLaw { eps, alpha, gamma });
        }
        Ok(Self { eps, alpha, gamma })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Same exponents, different stiffness.
    pub fn with_eps(&self, eps: f64) -> Result<Self, EosError> {
        Self::new(eps, self.alpha, self.gamma)
    }

    /// Background pressure `Z^gamma`.
    pub fn background_pressure(&self, z: f64) -> Result<f64, EosError> {
        if z < 0.0 || z.is_nan() {
            return Err(EosError::Domain(z));
        }
        Ok(self.p(z))
    }

    /// Derivative of the background pressure.
    pub fn background_pressure_derivative(&self, z: f64) -> Result<f64, EosError> {
        if z < 0.0 || z.is_nan() {
            return Err(EosError::Domain(z));
        }
        Ok(self.dp(z))
    }

    /// Singular pressure `eps (Z/(1-Z))^alpha`.
    pub fn singular_pressure(&self, z: f64) -> Result<f64, EosError> {
        self.check_singular(z)?;
        Ok(self.pi(z))
    }

    pub fn singular_pressure_derivative(&self, z: f64) -> Result<f64, EosError> {
        self.check_singular(z)?;
        Ok(self.dpi(z))
    }

    /// Inverse of the singular pressure: `Z = s/(1+s)` with `s = (pi/eps)^(1/alpha)`.
    pub fn singular_pressure_inverse(&self, pi: f64) -> Result<f64, EosError> {
        if pi < 0.0 || pi.is_nan() {
            return Err(EosError::Domain(pi));
        }
        Ok(self.z_of_pi(pi))
    }

    /// Total pressure `p_eps = p + pi_eps`; with `include_singular = false` only `p`.
    pub fn total_pressure(&self, z: f64, include_singular: bool) -> Result<f64, EosError> {
        if include_singular {
            self.check_singular(z)?;
            Ok(self.p(z) + self.pi(z))
        } else {
            self.background_pressure(z)
        }
    }

    pub fn total_pressure_derivative(&self, z: f64, include_singular: bool) -> Result<f64, EosError> {
        if include_singular {
            self.check_singular(z)?;
            Ok(self.dp(z) + self.dpi(z))
        } else {
            self.background_pressure_derivative(z)
        }
    }

    /// Characteristic speeds in the direction of `q1`, ordered `l1 <= l2 <= l3`.
    pub fn eigenvalues(
        &self,
        rho: f64,
        q1: f64,
        z: f64,
        include_singular: bool,
    ) -> Result<[f64; 3], EosError> {
        if !(rho > 0.0) {
            return Err(EosError::Density(rho));
        }
        let dp = self.total_pressure_derivative(z, include_singular)?;
        let v = q1 / rho;
        let c = (z / rho * dp).sqrt();
        Ok([v - c, v, v + c])
    }

    fn check_singular(&self, z: f64) -> Result<(), EosError> {
        if z < 0.0 || z.is_nan() {
            Err(EosError::Domain(z))
        } else if z >= 1.0 - SINGULARITY_GUARD {
            Err(EosError::Singularity(z))
        } else {
            Ok(())
        }
    }

    // Unchecked kernels used in the inner loops of the schemes.

    #[inline]
    pub(crate) fn p(&self, z: f64) -> f64 {
        z.max(0.0).powf(self.gamma)
    }

    #[inline]
    pub(crate) fn dp(&self, z: f64) -> f64 {
        self.gamma * z.max(0.0).powf(self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn pi(&self, z: f64) -> f64 {
        let z = z.max(0.0);
        self.eps * (z / (1.0 - z)).powf(self.alpha)
    }

    #[inline]
    pub(crate) fn dpi(&self, z: f64) -> f64 {
        let z = z.max(0.0);
        let one_minus = 1.0 - z;
        self.eps * self.alpha * (z / one_minus).powf(self.alpha - 1.0) / (one_minus * one_minus)
    }

    #[inline]
    pub(crate) fn z_of_pi(&self, pi: f64) -> f64 {
        let s = (pi.max(0.0) / self.eps).powf(1.0 / self.alpha);
        if s.is_infinite() {
            return 1.0;
        }
        s / (1.0 + s)
    }

    /// `dZ/dpi` at `pi > 0`.
    #[inline]
    pub(crate) fn dz_dpi(&self, pi: f64) -> f64 {
        let s = (pi / self.eps).powf(1.0 / self.alpha);
        let one_plus = 1.0 + s;
        s / (self.alpha * pi) / (one_plus * one_plus)
    }

    /// `p'(Z)` with the singular part only when requested; unchecked.
    #[inline]
    pub(crate) fn dp_total(&self, z: f64, include_singular: bool) -> f64 {
        if include_singular {
            self.dp(z) + self.dpi(z)
        } else {
            self.dp(z)
        }
    }

    /// Sound speed `sqrt(Z/rho p'(Z))` of the explicit (eps = 0) system; unchecked.
    #[inline]
    pub(crate) fn background_sound_speed(&self, rho: f64, z: f64) -> f64 {
        (z / rho * self.dp(z)).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(eps: f64) -> PressureLaw {
        PressureLaw::new(eps, 2.0, 2.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PressureLaw::new(0.0, 2.0, 2.0).is_err());
        assert!(PressureLaw::new(1e-2, -1.0, 2.0).is_err());
        assert!(PressureLaw::new(1e-2, 2.0, 1.0).is_err());
        assert!(PressureLaw::new(f64::NAN, 2.0, 2.0).is_err());
    }

    #[test]
    fn background_pressure_values() {
        let l = law(1e-2);
        assert_eq!(l.background_pressure(0.0).unwrap(), 0.0);
        assert_eq!(l.background_pressure(1.0).unwrap(), 1.0);
        assert!(close(l.background_pressure(0.5).unwrap(), 0.25, 1e-15));
        assert_eq!(l.background_pressure(-0.1), Err(EosError::Domain(-0.1)));
    }

    #[test]
    fn singular_pressure_values() {
        let l = law(1e-2);
        assert_eq!(l.singular_pressure(0.0).unwrap(), 0.0);
        assert!(close(l.singular_pressure(0.5).unwrap(), 1e-2, 1e-14));
        assert!(close(l.singular_pressure(2.0 / 3.0).unwrap(), 4e-2, 1e-14));
        assert!(matches!(l.singular_pressure(1.0), Err(EosError::Singularity(_))));
        assert!(matches!(
            l.singular_pressure(1.0 - 1e-15),
            Err(EosError::Singularity(_))
        ));
        assert!(l.singular_pressure(1.0 - 1e-13).unwrap().is_finite());
    }

    #[test]
    fn singular_pressure_inverse_values() {
        let l = law(1e-2);
        assert_eq!(l.singular_pressure_inverse(0.0).unwrap(), 0.0);
        assert!(close(l.singular_pressure_inverse(1e-2).unwrap(), 0.5, 1e-14));
        assert!(close(l.singular_pressure_inverse(4e-2).unwrap(), 2.0 / 3.0, 1e-14));
        assert!(l.singular_pressure_inverse(-1.0).is_err());
    }

    #[test]
    fn eigenvalues_without_congestion() {
        let l = law(1e-2);
        let [l1, l2, l3] = l.eigenvalues(0.7, 0.8, 7.0 / 12.0, false).unwrap();
        assert!((l1 - 0.156844).abs() < 1e-6, "{l1}");
        assert!((l2 - 1.142857).abs() < 1e-6, "{l2}");
        assert!((l3 - 2.128870).abs() < 1e-6, "{l3}");
    }

    #[test]
    fn eigenvalues_reflection_and_vacuum_speed() {
        let l = law(1e-2);
        let a = l.eigenvalues(0.7, 0.8, 0.4, true).unwrap();
        let b = l.eigenvalues(0.7, -0.8, 0.4, true).unwrap();
        for k in 0..3 {
            assert!(close(a[k], -b[2 - k], 1e-15));
        }
        let c = l.eigenvalues(0.7, 0.3, 0.0, true).unwrap();
        assert!(c.iter().all(|&x| close(x, 0.3 / 0.7, 1e-15)));
        assert_eq!(l.eigenvalues(0.0, 0.3, 0.2, true), Err(EosError::Density(0.0)));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let l = law(1e-2);
        let mut z = 0.05;
        while z <= 0.95 {
            for singular in [false, true] {
                let h = 1e-6 * z;
                let fd = (l.total_pressure(z + h, singular).unwrap()
                    - l.total_pressure(z - h, singular).unwrap())
                    / (2.0 * h);
                let an = l.total_pressure_derivative(z, singular).unwrap();
                assert!(((fd - an) / an).abs() <= 1e-6, "z={z} fd={fd} an={an}");
            }
            z += 0.01;
        }
    }

    #[test]
    fn dz_dpi_is_inverse_derivative() {
        let l = law(1e-4);
        for &z in &[0.1, 0.5, 0.9, 0.999] {
            let pi = l.pi(z);
            assert!(close(l.dz_dpi(pi), 1.0 / l.dpi(z), 1e-10));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn inverse_round_trip(z in 1e-6f64..0.999_999, eps in 1e-6f64..1.0, alpha in 0.5f64..4.0) {
                let l = PressureLaw::new(eps, alpha, 2.0).unwrap();
                let back = l.singular_pressure_inverse(l.singular_pressure(z).unwrap()).unwrap();
                prop_assert!(((back - z) / z).abs() <= 1e-12);
            }

            #[test]
            fn pressures_are_monotone(a in 0.0f64..0.999, b in 0.0f64..0.999, gamma in 1.01f64..4.0) {
                prop_assume!(a != b);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let l = PressureLaw::new(1e-3, 2.0, gamma).unwrap();
                prop_assert!(l.singular_pressure(lo).unwrap() < l.singular_pressure(hi).unwrap() || lo == 0.0 && hi < 1e-150);
                prop_assert!(l.background_pressure(lo).unwrap() < l.background_pressure(hi).unwrap());
            }

            #[test]
            fn eigenvalues_are_ordered(rho in 1e-3f64..10.0, q in -10.0f64..10.0, z in 0.0f64..0.99, singular: bool) {
                let l = PressureLaw::new(1e-2, 2.0, 2.0).unwrap();
                let [l1, l2, l3] = l.eigenvalues(rho, q, z, singular).unwrap();
                prop_assert!(l1 <= l2 && l2 <= l3);
            }
        }
    }
}
