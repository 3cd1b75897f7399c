//! Special-function constants the inequalities are measured against.
//!
//! Every Γ needed here sits at an integer or half-integer argument, so Γ is
//! evaluated exactly by the recurrence Γ(x + 1) = xΓ(x) from Γ(1/2) = √π and
//! Γ(1) = 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Twice the argument, if `x` is a positive half-integer.
fn doubled_half_integer<T: Real>(op: &'static str, x: T) -> Result<u32> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::domain(op, format!("{x} is not a positive half-integer")));
    }
    let twice = x + x;
    let k = twice.round();
    let tol = T::epsilon() * T::lit(8.0) * twice.max(T::one());
    if (twice - k).abs() > tol {
        return Err(Error::domain(op, format!("{x} is not a positive half-integer")));
    }
    k.to_u32()
        .ok_or_else(|| Error::domain(op, format!("{x} is out of range")))
}

fn gamma_from_doubled<T: Real>(k: u32) -> T {
    // k = 2x
    let (mut value, mut arg) = if k % 2 == 0 {
        (T::one(), T::one())
    } else {
        (T::PI().sqrt(), T::lit(0.5))
    };
    let target = T::from_u32(k).unwrap() * T::lit(0.5);
    while arg < target {
        value = value * arg;
        arg = arg + T::one();
    }
    value
}

/// Γ(x) for a positive half-integer `x`.
pub fn gamma_half_integer<T: Real>(x: T) -> Result<T> {
    let k = doubled_half_integer("gamma_half_integer", x)?;
    Ok(gamma_from_doubled(k))
}

/// Euler's beta function B(x, y) = Γ(x)Γ(y)/Γ(x + y) at positive half-integers.
pub fn euler_beta<T: Real>(x: T, y: T) -> Result<T> {
    let kx = doubled_half_integer("euler_beta", x)?;
    let ky = doubled_half_integer("euler_beta", y)?;
    Ok(gamma_from_doubled::<T>(kx) * gamma_from_doubled::<T>(ky)
        / gamma_from_doubled::<T>(kx + ky))
}

/// Γ(n/2 + 1).
fn gamma_half_dim_plus_one<T: Real>(n: u32) -> T {
    gamma_from_doubled(n + 2)
}

/// B(1/2, (n - 1)/2), the beta value appearing in the boundary expansions.
pub(crate) fn boundary_beta<T: Real>(n: u32) -> T {
    gamma_from_doubled::<T>(1) * gamma_from_doubled::<T>(n - 1) / gamma_from_doubled::<T>(n)
}

/// Volume ω_n = π^{n/2}/Γ(n/2 + 1) of the unit ball in Rⁿ.
pub fn unit_ball_volume<T: Real>(n: u32) -> Result<T> {
    if n < 1 {
        return Err(Error::domain("unit_ball_volume", "dimension must be at least 1"));
    }
    let half_n = T::from_u32(n).unwrap() * T::lit(0.5);
    Ok(T::PI().powf(half_n) / gamma_half_dim_plus_one::<T>(n))
}

/// Sharp isoperimetric Sobolev constant c*_n = π^{1/2} n / Γ(n/2 + 1)^{1/n}.
pub fn sharp_sobolev_constant<T: Real>(n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::domain("sharp_sobolev_constant", "dimension must be at least 2"));
    }
    let nf = T::from_u32(n).unwrap();
    Ok(T::PI().sqrt() * nf / gamma_half_dim_plus_one::<T>(n).powf(nf.recip()))
}

/// Half-space constant c*_n / 2^{1/n}.
pub fn half_space_constant<T: Real>(n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::domain("half_space_constant", "dimension must be at least 2"));
    }
    let nf = T::from_u32(n).unwrap();
    Ok(sharp_sobolev_constant::<T>(n)? * T::lit(2.0).powf(-nf.recip()))
}

/// The constants of one dimension, bundled for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpConstants<T> {
    pub dimension: u32,
    pub c_star: T,
    pub c_half: T,
    pub omega_n: T,
}

impl<T: Real> SharpConstants<T> {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self {
            dimension: n,
            c_star: sharp_sobolev_constant(n)?,
            c_half: half_space_constant(n)?,
            omega_n: unit_ball_volume(n)?,
        })
    }

    /// n·ω_n^{1/n}, the isoperimetric form of c*_n.
    pub fn c_star_from_ball_volume(&self) -> T {
        let nf = T::from_u32(self.dimension).unwrap();
        nf * self.omega_n.powf(nf.recip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(gamma_half_integer(0.5).unwrap(), pi.sqrt(), max_relative = 1e-15);
        assert_eq!(gamma_half_integer(2.0).unwrap(), 1.0);
        assert_eq!(gamma_half_integer(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma_half_integer(2.5).unwrap(), 0.75 * pi.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half_integer(2.5).unwrap(), 1.3293404, epsilon = 1e-7);
        assert_eq!(gamma_half_integer(6.0).unwrap(), 120.0);
    }

    #[test]
    fn gamma_rejects_bad_arguments() {
        for x in [0.0, -0.5, 0.3, 1.25, f64::NAN, f64::INFINITY] {
            assert!(matches!(gamma_half_integer(x), Err(Error::Domain { .. })), "{x}");
        }
    }

    #[test]
    fn beta_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(euler_beta(0.5, 0.5).unwrap(), pi, max_relative = 1e-15);
        assert_eq!(euler_beta(1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(euler_beta(0.5, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        assert!(euler_beta(0.5, 0.7).is_err());
        for (x, y) in [(0.5, 1.5), (2.0, 3.5), (4.5, 1.0), (3.0, 3.0)] {
            assert_eq!(euler_beta(x, y).unwrap(), euler_beta(y, x).unwrap());
        }
        for n in 2..12 {
            let b = euler_beta(0.5, (n as f64 - 1.0) / 2.0).unwrap();
            assert_relative_eq!(boundary_beta::<f64>(n), b, max_relative = 1e-15);
        }
    }

    #[test]
    fn sobolev_constants() {
        let c2: f64 = sharp_sobolev_constant(2).unwrap();
        assert_relative_eq!(c2, 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-15);
        assert!((c2 - 3.5449077).abs() < 1e-6);
        let c3: f64 = sharp_sobolev_constant(3).unwrap();
        let via_ball = 3.0 * (4.0 * std::f64::consts::PI / 3.0).powf(1.0 / 3.0);
        assert_relative_eq!(c3, via_ball, max_relative = 1e-13);
        assert!((c3 - 4.835976).abs() < 1e-6);
        assert!((half_space_constant::<f64>(2).unwrap() - 2.5066283).abs() < 1e-6);
        assert!((half_space_constant::<f64>(3).unwrap() - 3.8383842).abs() < 1e-4);
        for n in 2..=10 {
            let k = SharpConstants::<f64>::new(n).unwrap();
            assert!((k.c_star - k.c_star_from_ball_volume()).abs() <= 1e-12 * k.c_star, "n={n}");
            assert_relative_eq!(
                k.c_half / k.c_star,
                2f64.powf(-1.0 / n as f64),
                max_relative = 1e-14
            );
            assert!(k.c_half < k.c_star);
        }
    }

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert_eq!(unit_ball_volume::<f64>(1).unwrap(), 2.0);
        assert_relative_eq!(unit_ball_volume::<f64>(2).unwrap(), pi, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(3).unwrap(), 4.0 * pi / 3.0, max_relative = 1e-15);
        assert!(unit_ball_volume::<f64>(0).is_err());
        assert!(sharp_sobolev_constant::<f64>(1).is_err());
        assert!(half_space_constant::<f64>(0).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        for n in 2..=6 {
            let a: f32 = sharp_sobolev_constant(n).unwrap();
            let b: f64 = sharp_sobolev_constant(n).unwrap();
            assert!((a as f64 - b).abs() < 1e-5 * b);
        }
    }
}
