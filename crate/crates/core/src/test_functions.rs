//! Two-valued test profiles, the q-constraint, and quotient expansions.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{boundary_beta, half_space_constant, sharp_sobolev_constant, unit_ball_volume};
use crate::error::{Error, Result};
use crate::geometry::{boundary_arc_inside, cap_measure, GridDomain};
use crate::numeric::{golden_section, log_space};
use crate::scalar::Real;

/// `sgn(t)|t|^q`, extended by 0 at `t = 0`.
pub fn sign_power<T: Real>(t: T, q: T) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::domain("sign_power", format!("exponent must be positive, got {q}")));
    }
    Ok(sign_power_unchecked(t, q))
}

#[inline]
pub(crate) fn sign_power_unchecked<T: Real>(t: T, q: T) -> T {
    if t == T::zero() {
        T::zero()
    } else if q == T::one() {
        t
    } else {
        t.signum() * t.abs().powf(q)
    }
}

/// Plateau `β = (total/cap − 1)^{−1/q}` balancing the two-valued profile.
pub fn beta_eps<T: Real>(total_measure: T, cap: T, q: T) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::domain("beta_eps", format!("exponent must be positive, got {q}")));
    }
    if !(cap > T::zero() && cap < total_measure) {
        return Err(Error::domain(
            "beta_eps",
            format!("cap {cap} must lie strictly between 0 and the total measure {total_measure}"),
        ));
    }
    Ok((total_measure / cap - T::one()).powf(-q.recip()))
}

fn check_exponent<T: Real>(op: &'static str, q: T) -> Result<()> {
    if q > T::zero() && q.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("exponent must be positive, got {q}")))
    }
}

/// `Σ measure · sign_power(level, q)` over `(level, measure)` pairs.
pub fn constraint_residual<T: Real>(values: &[(T, T)], q: T) -> Result<T> {
    check_exponent("constraint_residual", q)?;
    Ok(values
        .iter()
        .fold(T::zero(), |acc, &(level, m)| acc + m * sign_power_unchecked(level, q)))
}

/// The unique `λ` with `Σ measure · sign_power(level − λ, q) = 0`.
pub fn shift_to_constraint<T: Real>(values: &[(T, T)], q: T) -> Result<T> {
    check_exponent("shift_to_constraint", q)?;
    let carried = values.iter().filter(|v| v.1 > T::zero());
    let lo = carried.clone().map(|v| v.0).fold(T::infinity(), T::min);
    let hi = carried.clone().map(|v| v.0).fold(T::neg_infinity(), T::max);
    if !(lo < hi) {
        return Err(Error::degenerate("shift_to_constraint", "needs at least two distinct levels"));
    }
    let total = carried.fold(T::zero(), |acc, v| acc + v.1);
    let residual = |lambda: T| {
        values
            .iter()
            .fold(T::zero(), |acc, &(l, m)| acc + m * sign_power_unchecked(l - lambda, q))
    };
    let tol = total * T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
    let (mut a, mut b) = (lo, hi);
    let mut mid = (a + b) * T::lit(0.5);
    for _ in 0..400 {
        mid = (a + b) * T::lit(0.5);
        let r = residual(mid);
        if r.abs() <= tol || mid <= a || mid >= b {
            break;
        }
        // residual decreases in λ
        if r > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(mid)
}

/// Where a two-valued profile lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileContext {
    EuclideanDomain,
    Surface,
}

/// `u = χ_B − β χ_{rest}` with `B` a ball of radius `eps` about `center`,
/// and `β` chosen so the q-constraint holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoValuedProfile {
    /// Euclidean point for domains, parametric coordinates on surfaces.
    pub center: [f64; 2],
    pub eps: f64,
    pub q: f64,
    pub beta: f64,
    /// Measure of the ball part.
    pub cap: f64,
    /// Measure of the whole domain or surface.
    pub total: f64,
    pub context: ProfileContext,
}

impl TwoValuedProfile {
    pub fn new(center: [f64; 2], eps: f64, q: f64, cap: f64, total: f64, context: ProfileContext) -> Result<Self> {
        Ok(Self {
            center,
            eps,
            q,
            beta: beta_eps(total, cap, q)?,
            cap,
            total,
            context,
        })
    }

    /// The profile on a planar domain, with the cap measured exactly.
    pub fn on_domain(domain: &GridDomain, center: [f64; 2], eps: f64, q: f64) -> Result<Self> {
        let cap = cap_measure(domain, center, eps)?;
        Self::new(center, eps, q, cap, domain.analytic_measure(), ProfileContext::EuclideanDomain)
    }

    /// `(level, measure)` pairs of the profile.
    pub fn levels(&self) -> [(f64, f64); 2] {
        [(1.0, self.cap), (-self.beta, self.total - self.cap)]
    }

    pub fn residual(&self) -> f64 {
        constraint_residual(&self.levels(), self.q).expect("profile exponent is positive")
    }

    /// Value at a planar point (Euclidean profiles only).
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        if (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.eps {
            1.0
        } else {
            -self.beta
        }
    }

    /// Quotient given the relative perimeter of the ball part.
    pub fn quotient(&self, perimeter: f64, n: u32, threshold: f64) -> QuotientValue<f64> {
        two_level_quotient(1.0, -self.beta, perimeter, self.cap, self.total, n, threshold)
    }
}

/// A BV quotient `TV / (∫|u|^{n/(n−1)})^{1−1/n}` and its distance to the
/// threshold it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientValue<T> {
    pub numerator: T,
    pub denominator: T,
    pub value: T,
    pub threshold: T,
    /// `value − threshold`; negative means the profile beats the threshold.
    pub gap: T,
}

impl<T: Real> QuotientValue<T> {
    pub fn new(numerator: T, denominator: T, threshold: T) -> Self {
        let value = numerator / denominator;
        Self {
            numerator,
            denominator,
            value,
            threshold,
            gap: value - threshold,
        }
    }
}

/// Quotient of the function equal to `upper` on a set of measure `cap` with
/// relative perimeter `perimeter`, and `lower` on the remaining measure.
pub fn two_level_quotient<T: Real>(
    upper: T,
    lower: T,
    perimeter: T,
    cap: T,
    total: T,
    n: u32,
    threshold: T,
) -> QuotientValue<T> {
    let nf = T::int(n as i64);
    let p = nf / (nf - T::one());
    let numerator = (upper - lower).abs() * perimeter;
    let mass = cap * upper.abs().powf(p) + (total - cap) * lower.abs().powf(p);
    QuotientValue::new(numerator, mass.powf(T::one() - nf.recip()), threshold)
}

/// Exact quotient of the two-valued profile centred at the boundary point `a`
/// of a planar domain, compared with the half-space constant.
pub fn two_valued_quotient_exact(domain: &GridDomain, a: [f64; 2], eps: f64, q: f64) -> Result<QuotientValue<f64>> {
    let profile = TwoValuedProfile::on_domain(domain, a, eps, q)?;
    let arc = boundary_arc_inside(domain, a, eps)?;
    Ok(profile.quotient(arc, 2, half_space_constant(2)?))
}

/// `c_half (1 − 2Hε / ((n+1) B(1/2, (n−1)/2)))`.
pub fn domain_quotient_expansion<T: Real>(h: T, eps: T, n: u32) -> Result<T> {
    let c_half: T = half_space_constant(n)?;
    let nf = T::int(n as i64);
    Ok(c_half * (T::one() - T::lit(2.0) * h * eps / ((nf + T::one()) * boundary_beta::<T>(n))))
}

/// `c*_n (1 − Sε² / (2n(n+2)))`.
pub fn surface_quotient_expansion<T: Real>(s: T, eps: T, n: u32) -> Result<T> {
    let c: T = sharp_sobolev_constant(n)?;
    let nf = T::int(n as i64);
    Ok(c * (T::one() - s * eps * eps / (T::lit(2.0) * nf * (nf + T::lit(2.0)))))
}

/// Expansion of the surface quotient at the critical exponent
/// `q = n²/(n²+n−2)`, where the plateau contributes at order ε²:
/// `c*_n (1 + ((n−1)/n)(ω_n/area)^{2/n} ε² − Sε²/(2n(n+2)))`.
pub fn critical_quotient_expansion<T: Real>(s: T, area: T, eps: T, n: u32) -> Result<T> {
    if !(area > T::zero()) {
        return Err(Error::domain("critical_quotient_expansion", "area must be positive"));
    }
    let c: T = sharp_sobolev_constant(n)?;
    let omega: T = unit_ball_volume(n)?;
    let nf = T::int(n as i64);
    let plateau = (nf - T::one()) / nf * (omega / area).powf(T::lit(2.0) / nf);
    let curvature = s / (T::lit(2.0) * nf * (nf + T::lit(2.0)));
    Ok(c * (T::one() + (plateau - curvature) * eps * eps))
}

/// Result of the ε sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonOptimum {
    pub eps: f64,
    pub quotient: QuotientValue<f64>,
    /// Best point of the coarse sweep, before golden-section refinement.
    pub coarse_eps: f64,
    pub coarse_value: f64,
}

pub const COARSE_SWEEP_POINTS: usize = 16;
pub const GOLDEN_ITERATIONS: u32 = 40;

/// The default sweep range `[8h, diam/4]`.
pub fn default_eps_range(domain: &GridDomain) -> (f64, f64) {
    (8.0 * domain.h(), domain.diameter() / 4.0)
}

/// Best radius for the two-valued profile at `a`: a log-spaced coarse sweep
/// followed by golden-section refinement around the coarse minimum.
pub fn optimal_epsilon(domain: &GridDomain, a: [f64; 2], q: f64, eps_range: (f64, f64)) -> Result<EpsilonOptimum> {
    let (lo, hi) = eps_range;
    if !(lo > 0.0 && lo <= hi && hi < domain.diameter()) {
        return Err(Error::domain(
            "optimal_epsilon",
            format!("radius range [{lo}, {hi}] is empty or outside (0, diam)"),
        ));
    }
    let eval = |eps: f64| two_valued_quotient_exact(domain, a, eps, q).ok();
    let grid = if lo == hi { vec![lo] } else { log_space(lo, hi, COARSE_SWEEP_POINTS) };
    let coarse: Vec<Option<QuotientValue<f64>>> = grid.par_iter().map(|&e| eval(e)).collect();
    let mut best: Option<(f64, QuotientValue<f64>)> = None;
    let consider = |eps: f64, qv: QuotientValue<f64>, best: &mut Option<(f64, QuotientValue<f64>)>| {
        let better = match best {
            None => true,
            Some((be, bq)) => qv.value < bq.value || (qv.value == bq.value && eps < *be),
        };
        if better {
            *best = Some((eps, qv));
        }
    };
    for (&eps, qv) in grid.iter().zip(&coarse) {
        if let Some(qv) = qv {
            consider(eps, *qv, &mut best);
        }
    }
    let (coarse_eps, coarse_q) =
        best.ok_or_else(|| Error::domain("optimal_epsilon", "no radius in range gives a proper cap"))?;
    if grid.len() > 1 {
        let k = grid.iter().position(|&e| e == coarse_eps).unwrap();
        let left = grid[k.saturating_sub(1)];
        let right = grid[(k + 1).min(grid.len() - 1)];
        let evals = golden_section(
            |e| eval(e).map_or(f64::INFINITY, |qv| qv.value),
            left,
            right,
            GOLDEN_ITERATIONS,
        );
        for (eps, value) in evals {
            if value.is_finite() {
                consider(eps, eval(eps).unwrap(), &mut best);
            }
        }
    }
    let (eps, quotient) = best.unwrap();
    Ok(EpsilonOptimum {
        eps,
        quotient,
        coarse_eps,
        coarse_value: coarse_q.value,
    })
}
