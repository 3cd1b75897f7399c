//! Closed analytic surfaces: curvature, geodesic balls, curvature thresholds
//! and the achievability decision.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{gamma_half_integer, sharp_sobolev_constant, unit_ball_volume};
use crate::error::{Error, Result};
use crate::numeric::GaussLegendre;
use crate::scalar::Real;
use crate::test_functions::{constraint_residual, two_level_quotient, ProfileContext, QuotientValue, TwoValuedProfile};

/// Closed surface models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceModel {
    RoundSphere { radius: f64 },
    /// Surface of revolution `x²/a² + y²/a² + z²/c² = 1`.
    Spheroid { a: f64, c: f64 },
    /// Flat metric on `R²/(L₁Z × L₂Z)`.
    FlatTorus { l1: f64, l2: f64 },
}

/// Parametric coordinates: polar angle `u ∈ [0, π]` and azimuth `v` on the
/// sphere and spheroid, periodic `(x, y)` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub u: f64,
    pub v: f64,
}

impl SurfacePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub const NORTH_POLE: SurfacePoint = SurfacePoint { u: 0.0, v: 0.0 };
}

impl SurfaceModel {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            SurfaceModel::RoundSphere { radius } => ok(radius),
            SurfaceModel::Spheroid { a, c } => ok(a) && ok(c),
            SurfaceModel::FlatTorus { l1, l2 } => ok(l1) && ok(l2),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("surface parameters must be positive: {self:?}")))
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            SurfaceModel::RoundSphere { radius } => 4.0 * PI * radius * radius,
            SurfaceModel::Spheroid { a, c } => {
                if (a - c).abs() <= 1e-14 * a {
                    4.0 * PI * a * a
                } else if c < a {
                    let e = (1.0 - c * c / (a * a)).sqrt();
                    TAU * a * a * (1.0 + (1.0 - e * e) / e * e.atanh())
                } else {
                    let e = (1.0 - a * a / (c * c)).sqrt();
                    TAU * a * a * (1.0 + c / (a * e) * e.asin())
                }
            }
            SurfaceModel::FlatTorus { l1, l2 } => l1 * l2,
        }
    }

    pub fn euler_characteristic(&self) -> i32 {
        match self {
            SurfaceModel::RoundSphere { .. } | SurfaceModel::Spheroid { .. } => 2,
            SurfaceModel::FlatTorus { .. } => 0,
        }
    }

    /// Whether the model is a round sphere (a spheroid with equal axes counts).
    pub fn is_round_sphere(&self) -> bool {
        match *self {
            SurfaceModel::RoundSphere { .. } => true,
            SurfaceModel::Spheroid { a, c } => (a - c).abs() <= 1e-12 * a.max(c),
            SurfaceModel::FlatTorus { .. } => false,
        }
    }

    pub fn has_constant_curvature(&self) -> bool {
        !matches!(self, SurfaceModel::Spheroid { .. }) || self.is_round_sphere()
    }

    /// Metric coefficients `[g_uu, g_uv, g_vv]`.
    pub fn metric(&self, p: SurfacePoint) -> [f64; 3] {
        match *self {
            SurfaceModel::RoundSphere { radius } => [radius * radius, 0.0, (radius * p.u.sin()).powi(2)],
            SurfaceModel::Spheroid { a, c } => {
                let (s, co) = p.u.sin_cos();
                [a * a * co * co + c * c * s * s, 0.0, a * a * s * s]
            }
            SurfaceModel::FlatTorus { .. } => [1.0, 0.0, 1.0],
        }
    }

    /// Embedding in R³ (sphere and spheroid only).
    pub fn embed(&self, p: SurfacePoint) -> Option<[f64; 3]> {
        let (su, cu) = p.u.sin_cos();
        let (sv, cv) = p.v.sin_cos();
        match *self {
            SurfaceModel::RoundSphere { radius } => Some([radius * su * cv, radius * su * sv, radius * cu]),
            SurfaceModel::Spheroid { a, c } => Some([a * su * cv, a * su * sv, c * cu]),
            SurfaceModel::FlatTorus { .. } => None,
        }
    }

    /// Conservative injectivity radius, uniform over the surface.
    pub fn injectivity_radius(&self) -> f64 {
        match *self {
            SurfaceModel::RoundSphere { radius } => PI * radius,
            SurfaceModel::Spheroid { a, c } => 0.5 * PI * a.min(c),
            SurfaceModel::FlatTorus { l1, l2 } => 0.5 * l1.min(l2),
        }
    }

    /// Point of maximal scalar curvature (smallest parameters on ties).
    pub fn max_curvature_point(&self) -> SurfacePoint {
        match *self {
            SurfaceModel::Spheroid { a, c } if c < a => SurfacePoint::new(0.5 * PI, 0.0),
            _ => SurfacePoint::NORTH_POLE,
        }
    }

    pub fn max_scalar_curvature(&self) -> f64 {
        scalar_curvature(self, self.max_curvature_point())
    }
}

/// Gaussian curvature of the spheroid at an embedded point.
fn spheroid_gauss_curvature(a: f64, c: f64, x: [f64; 3]) -> f64 {
    let a2 = a * a;
    let c2 = c * c;
    let s = (x[0] * x[0] + x[1] * x[1]) / (a2 * a2) + x[2] * x[2] / (c2 * c2);
    1.0 / (a2 * a2 * c2 * s * s)
}

/// Scalar curvature `S = 2K`.
pub fn scalar_curvature(surface: &SurfaceModel, p: SurfacePoint) -> f64 {
    match *surface {
        SurfaceModel::RoundSphere { radius } => 2.0 / (radius * radius),
        SurfaceModel::Spheroid { a, c } => {
            let (s, co) = p.u.sin_cos();
            let d = a * a * co * co + c * c * s * s;
            2.0 * c * c / (d * d)
        }
        SurfaceModel::FlatTorus { .. } => 0.0,
    }
}

fn check_radius(op: &'static str, surface: &SurfaceModel, eps: f64) -> Result<()> {
    surface.validate()?;
    let limit = surface.injectivity_radius();
    if eps > 0.0 && eps <= limit {
        Ok(())
    } else {
        Err(Error::domain(op, format!("radius {eps} outside (0, {limit:.6}]")))
    }
}

/// Area and perimeter of a geodesic ball on the spheroid, in geodesic polar
/// coordinates: geodesics are shot from the centre in `DIRECTIONS` directions
/// together with the Jacobi field `J'' = −K J`, `J(0) = 0`, `J'(0) = 1`;
/// the ball area is `∫∫ J ds dθ` and the perimeter `∫ J(ε) dθ`.
fn spheroid_geodesic_ball(a: f64, c: f64, center: SurfacePoint, eps: f64) -> (f64, f64) {
    const DIRECTIONS: usize = 64;
    const STEPS: usize = 400;
    let x0 = SurfaceModel::Spheroid { a, c }.embed(center).unwrap();
    let inv = [1.0 / (a * a), 1.0 / (a * a), 1.0 / (c * c)];
    let grad = |x: &[f64; 3]| [2.0 * x[0] * inv[0], 2.0 * x[1] * inv[1], 2.0 * x[2] * inv[2]];
    let normal = {
        let g = grad(&x0);
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        [g[0] / n, g[1] / n, g[2] / n]
    };
    // tangent frame from the coordinate axis least aligned with the normal
    let axis = (0..3)
        .min_by(|&i, &j| normal[i].abs().partial_cmp(&normal[j].abs()).unwrap())
        .unwrap();
    let mut e1 = [0.0; 3];
    e1[axis] = 1.0;
    let dot = e1[axis] * normal[axis];
    for k in 0..3 {
        e1[k] -= dot * normal[k];
    }
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for v in &mut e1 {
        *v /= n1;
    }
    let e2 = [
        normal[1] * e1[2] - normal[2] * e1[1],
        normal[2] * e1[0] - normal[0] * e1[2],
        normal[0] * e1[1] - normal[1] * e1[0],
    ];

    // state: position, velocity, J, J', ∫J
    type State = [f64; 9];
    let rhs = |y: &State| -> State {
        let x = [y[0], y[1], y[2]];
        let v = [y[3], y[4], y[5]];
        let g = grad(&x);
        let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        let vhv = 2.0 * (v[0] * v[0] * inv[0] + v[1] * v[1] * inv[1] + v[2] * v[2] * inv[2]);
        let k = spheroid_gauss_curvature(a, c, x);
        let f = -vhv / g2;
        [v[0], v[1], v[2], f * g[0], f * g[1], f * g[2], y[7], -k * y[6], y[6]]
    };
    let ds = eps / STEPS as f64;
    let mut area = 0.0;
    let mut perimeter = 0.0;
    for d in 0..DIRECTIONS {
        let theta = TAU * d as f64 / DIRECTIONS as f64;
        let (s, co) = theta.sin_cos();
        let mut y: State = [
            x0[0],
            x0[1],
            x0[2],
            co * e1[0] + s * e2[0],
            co * e1[1] + s * e2[1],
            co * e1[2] + s * e2[2],
            0.0,
            1.0,
            0.0,
        ];
        for _ in 0..STEPS {
            let k1 = rhs(&y);
            let k2 = rhs(&std::array::from_fn(|i| y[i] + 0.5 * ds * k1[i]));
            let k3 = rhs(&std::array::from_fn(|i| y[i] + 0.5 * ds * k2[i]));
            let k4 = rhs(&std::array::from_fn(|i| y[i] + ds * k3[i]));
            for i in 0..9 {
                y[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        area += y[8];
        perimeter += y[6];
    }
    let w = TAU / DIRECTIONS as f64;
    (area * w, perimeter * w)
}

/// Area of the geodesic ball `B(center, eps)`.
pub fn geodesic_ball_area(surface: &SurfaceModel, center: SurfacePoint, eps: f64) -> Result<f64> {
    check_radius("geodesic_ball_area", surface, eps)?;
    Ok(match *surface {
        SurfaceModel::RoundSphere { radius } => TAU * radius * radius * (1.0 - (eps / radius).cos()),
        SurfaceModel::Spheroid { a, c } => spheroid_geodesic_ball(a, c, center, eps).0,
        SurfaceModel::FlatTorus { .. } => PI * eps * eps,
    })
}

/// Length of the geodesic circle `∂B(center, eps)`.
pub fn geodesic_circle_length(surface: &SurfaceModel, center: SurfacePoint, eps: f64) -> Result<f64> {
    check_radius("geodesic_circle_length", surface, eps)?;
    Ok(match *surface {
        SurfaceModel::RoundSphere { radius } => TAU * radius * (eps / radius).sin(),
        SurfaceModel::Spheroid { a, c } => spheroid_geodesic_ball(a, c, center, eps).1,
        SurfaceModel::FlatTorus { .. } => TAU * eps,
    })
}

/// `ω_n εⁿ (1 − Sε² / (6(n+2)))`.
pub fn gray_expansion<T: Real>(s: T, eps: T, n: u32) -> Result<T> {
    let omega: T = unit_ball_volume(n.max(2))?;
    if n < 2 {
        return Err(Error::domain("gray_expansion", "dimension must be at least 2"));
    }
    let nf = T::int(n as i64);
    Ok(omega * eps.powi(n as i32) * (T::one() - s * eps * eps / (T::lit(6.0) * (nf + T::lit(2.0)))))
}

/// `n ω_n ε^{n−1} (1 − Sε² / (6n))`.
pub fn geodesic_circle_expansion<T: Real>(s: T, eps: T, n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::domain("geodesic_circle_expansion", "dimension must be at least 2"));
    }
    let omega: T = unit_ball_volume(n)?;
    let nf = T::int(n as i64);
    Ok(nf * omega * eps.powi(n as i32 - 1) * (T::one() - s * eps * eps / (T::lit(6.0) * nf)))
}

fn check_exponent(op: &'static str, q: f64, n: u32) -> Result<()> {
    let top = n as f64 / (n as f64 - 1.0);
    if n >= 2 && q > 0.0 && q < top {
        Ok(())
    } else {
        Err(Error::domain(op, format!("q = {q} outside (0, {top}) for n = {n}")))
    }
}

/// Exact quotient of the two-valued profile on a geodesic ball, compared
/// with `c*_2`.
pub fn surface_two_valued_quotient(
    surface: &SurfaceModel,
    center: SurfacePoint,
    eps: f64,
    q: f64,
) -> Result<QuotientValue<f64>> {
    check_exponent("surface_two_valued_quotient", q, 2)?;
    let ball = geodesic_ball_area(surface, center, eps)?;
    let perimeter = geodesic_circle_length(surface, center, eps)?;
    let profile = TwoValuedProfile::new([center.u, center.v], eps, q, ball, surface.area(), ProfileContext::Surface)?;
    Ok(profile.quotient(perimeter, 2, sharp_sobolev_constant(2)?))
}

/// Curvature level above which a point forces the critical-exponent quotient
/// below `c*_n`: `2(n+2)/(n−1) (π^{n/2} Γ(n/2+1) / area)^{2/n}`. For n = 2
/// this is `8π / area`.
pub fn critical_curvature_threshold<T: Real>(n: u32, area: T) -> Result<T> {
    if n < 2 {
        return Err(Error::domain("critical_curvature_threshold", "dimension must be at least 2"));
    }
    if !(area > T::zero()) {
        return Err(Error::domain("critical_curvature_threshold", "area must be positive"));
    }
    let nf = T::int(n as i64);
    let half = nf * T::lit(0.5);
    let g: T = gamma_half_integer(half + T::one())?;
    let base = T::PI().powf(half) * g / area;
    Ok(T::lit(2.0) * (nf + T::lit(2.0)) / (nf - T::one()) * base.powf(T::lit(2.0) / nf))
}

/// `(∫_M S dμ, 4πχ(M))`.
pub fn gauss_bonnet_check(surface: &SurfaceModel) -> Result<(f64, f64)> {
    surface.validate()?;
    let target = 4.0 * PI * surface.euler_characteristic() as f64;
    let integral = match *surface {
        SurfaceModel::RoundSphere { radius } => scalar_curvature(surface, SurfacePoint::NORTH_POLE) * 4.0 * PI * radius * radius,
        SurfaceModel::Spheroid { a, .. } => {
            let rule = GaussLegendre::new(64);
            let density = |u: f64| {
                let p = SurfacePoint::new(u, 0.0);
                let g = surface.metric(p);
                scalar_curvature(surface, p) * (g[0] * g[2]).sqrt()
            };
            // split at the equator where oblate curvature peaks
            let _ = a;
            TAU * (rule.integrate(0.0, 0.5 * PI, density) + rule.integrate(0.5 * PI, PI, density))
        }
        SurfaceModel::FlatTorus { .. } => 0.0,
    };
    Ok((integral, target))
}

/// The hemisphere profile `χ_{B(a,π/2)} − χ_{complement}` on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HemisphereCertificate<T> {
    pub q: T,
    pub quotient: QuotientValue<T>,
    pub residual: T,
    /// Whether the value equals `c*_2` to 1e-12 relative.
    pub equals_c_star: bool,
}

pub fn hemisphere_certificate<T: Real>(q: T) -> Result<HemisphereCertificate<T>> {
    if !(q > T::zero() && q < T::lit(2.0)) {
        return Err(Error::domain("hemisphere_certificate", format!("q = {q} outside (0, 2)")));
    }
    let half = T::lit(2.0) * T::PI();
    let residual = constraint_residual(&[(T::one(), half), (-T::one(), half)], q)?;
    let c_star: T = sharp_sobolev_constant(2)?;
    // jump of height 2 across the equator, of length 2π
    let quotient = two_level_quotient(T::one(), -T::one(), T::lit(2.0) * T::PI(), half, half + half, 2, c_star);
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    Ok(HemisphereCertificate {
        q,
        quotient,
        residual,
        equals_c_star: (quotient.value - c_star).abs() <= tol * c_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Achieved,
    Inconclusive,
}

/// Which sufficient condition settled the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Justification {
    /// Round sphere, n = 2, q ∈ (0, 2): opposite hemispheres attain `c*_2`.
    RoundSphere,
    /// n ≥ 3 with a point of positive scalar curvature.
    PositiveCurvatureHighDimension,
    /// n = 2, sphere topology, nonconstant curvature: the curvature average
    /// is `8π/area`, so some point exceeds it.
    SphereTopologyNonconstantCurvature,
    /// n = 2, a point above the critical curvature threshold.
    CurvatureAboveThreshold,
    /// n = 2, q < 1, a point of positive curvature.
    SmallExponentPositiveCurvature,
    None,
}

/// Data re-checkable against the hypothesis of the justification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureWitness {
    pub point: SurfacePoint,
    pub scalar_curvature: f64,
    /// Value the curvature must exceed (0 when positivity suffices).
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievabilityVerdict {
    pub verdict: Verdict,
    pub justification: Justification,
    pub witness: Option<CurvatureWitness>,
    pub q: f64,
    pub n: u32,
}

impl AchievabilityVerdict {
    /// Re-evaluates the hypothesis behind the verdict on `surface`.
    pub fn verify(&self, surface: &SurfaceModel) -> bool {
        let q_ok = check_exponent("verify", self.q, self.n).is_ok();
        let witness_ok = |strict_threshold: f64| {
            self.witness.is_some_and(|w| {
                let s = scalar_curvature(surface, w.point);
                (s - w.scalar_curvature).abs() <= 1e-12 * s.abs().max(1.0)
                    && w.threshold == strict_threshold
                    && s > strict_threshold
            })
        };
        match (self.verdict, self.justification) {
            (Verdict::Inconclusive, Justification::None) => true,
            (Verdict::Achieved, Justification::RoundSphere) => {
                q_ok && self.n == 2 && surface.is_round_sphere() && self.q < 2.0
            }
            (Verdict::Achieved, Justification::PositiveCurvatureHighDimension) => {
                q_ok && self.n >= 3 && witness_ok(0.0)
            }
            (Verdict::Achieved, Justification::SphereTopologyNonconstantCurvature) => {
                let avg = 8.0 * PI / surface.area();
                q_ok && self.n == 2
                    && surface.euler_characteristic() == 2
                    && !surface.has_constant_curvature()
                    && witness_ok(avg)
            }
            (Verdict::Achieved, Justification::CurvatureAboveThreshold) => {
                let t = critical_curvature_threshold(2, surface.area()).unwrap_or(f64::INFINITY);
                q_ok && self.n == 2 && witness_ok(t)
            }
            (Verdict::Achieved, Justification::SmallExponentPositiveCurvature) => {
                q_ok && self.n == 2 && self.q < 1.0 && witness_ok(0.0)
            }
            _ => false,
        }
    }
}

/// Decides achievability of the sharp constant from the sufficient
/// conditions, in fixed priority order; "inconclusive" when none applies.
pub fn classify_achievability(surface: &SurfaceModel, q: f64, n: u32) -> Result<AchievabilityVerdict> {
    surface.validate()?;
    check_exponent("classify_achievability", q, n)?;
    let top = surface.max_curvature_point();
    let s_max = scalar_curvature(surface, top);
    let achieved = |justification, threshold: Option<f64>| AchievabilityVerdict {
        verdict: Verdict::Achieved,
        justification,
        witness: threshold.map(|t| CurvatureWitness {
            point: top,
            scalar_curvature: s_max,
            threshold: t,
        }),
        q,
        n,
    };
    if n == 2 && surface.is_round_sphere() && q < 2.0 {
        return Ok(achieved(Justification::RoundSphere, None));
    }
    if n >= 3 && s_max > 0.0 {
        return Ok(achieved(Justification::PositiveCurvatureHighDimension, Some(0.0)));
    }
    if n == 2 {
        let avg = 8.0 * PI / surface.area();
        if surface.euler_characteristic() == 2 && !surface.has_constant_curvature() && s_max > avg {
            return Ok(achieved(Justification::SphereTopologyNonconstantCurvature, Some(avg)));
        }
        let threshold = critical_curvature_threshold(2, surface.area())?;
        if s_max > threshold {
            return Ok(achieved(Justification::CurvatureAboveThreshold, Some(threshold)));
        }
        if q < 1.0 && s_max > 0.0 {
            return Ok(achieved(Justification::SmallExponentPositiveCurvature, Some(0.0)));
        }
    }
    Ok(AchievabilityVerdict {
        verdict: Verdict::Inconclusive,
        justification: Justification::None,
        witness: None,
        q,
        n,
    })
}
