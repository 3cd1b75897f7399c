//! Bounded planar domains: grid sampling, boundary curvature, and exact
//! quadrature of balls centred on the boundary.

mod boundary;
mod grid;

pub use boundary::{BoundaryCurve, DomainSpec};
pub use grid::{build_domain, GridDomain};

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::constants::{boundary_beta, unit_ball_volume};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_integrate, golden_section};
use crate::scalar::Real;

/// Signed curvature of the boundary at the analytic point nearest to `point`,
/// which must lie within one cell of the boundary.
pub fn boundary_mean_curvature(domain: &GridDomain, point: [f64; 2]) -> Result<f64> {
    let curve = domain.require_boundary("boundary_mean_curvature")?;
    let sd = curve.signed_distance(point);
    if sd.abs() >= domain.h() {
        return Err(Error::domain(
            "boundary_mean_curvature",
            format!("point is {sd:.3e} from the boundary, farther than one cell"),
        ));
    }
    Ok(curve.curvature(curve.nearest_param(point)))
}

/// Boundary point of maximal curvature, with the diameter lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSeed {
    pub point: [f64; 2],
    pub param: f64,
    pub curvature: f64,
    /// `1 / diam Ω`: some boundary point always has at least this curvature.
    pub diameter_bound: f64,
}

pub fn max_curvature_seed(domain: &GridDomain) -> Result<CurvatureSeed> {
    let curve = domain.require_boundary("max_curvature_seed")?;
    const SAMPLES: usize = 4096;
    let step = TAU / SAMPLES as f64;
    let kappa: Vec<f64> = (0..SAMPLES).map(|i| curve.curvature(i as f64 * step)).collect();
    let top = kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * top.abs().max(1e-300);
    let i = kappa.iter().position(|&k| k >= top - tie).unwrap();
    let mut param = i as f64 * step;
    let prev = kappa[(i + SAMPLES - 1) % SAMPLES];
    let next = kappa[(i + 1) % SAMPLES];
    if prev < top - tie && next < top - tie {
        let evals = golden_section(|t| -curve.curvature(t), param - step, param + step, 60);
        let (t, neg) = evals
            .into_iter()
            .fold((param, -top), |acc, e| if e.1 < acc.1 { e } else { acc });
        if -neg > top + tie && (t - param).abs() > 1e-9 {
            param = t.rem_euclid(TAU);
        }
    }
    Ok(CurvatureSeed {
        point: curve.point(param),
        param,
        curvature: curve.curvature(param),
        diameter_bound: domain.diameter().recip(),
    })
}

/// Whether `a` sits on the boundary up to rounding.
fn on_boundary(curve: &BoundaryCurve, a: [f64; 2]) -> Option<f64> {
    let t = curve.nearest_param(a);
    let q = curve.point(t);
    let scale = curve.max_extent();
    ((q[0] - a[0]).hypot(q[1] - a[1]) <= 1e-9 * scale).then_some(t)
}

/// Directions from `a` at which the integrand of the polar cap quadrature
/// can fail to be smooth, sorted in `[0, 2π)`.
fn angular_breakpoints(curve: &BoundaryCurve, a: [f64; 2], eps: f64) -> Vec<f64> {
    let mut angles: Vec<f64> = curve
        .circle_crossings(a, eps)
        .into_iter()
        .map(|t| {
            let q = curve.point(t);
            (q[1] - a[1]).atan2(q[0] - a[0]).rem_euclid(TAU)
        })
        .collect();
    if let Some(t) = on_boundary(curve, a) {
        let (d1, _) = curve.derivatives(t);
        let phi = d1[1].atan2(d1[0]);
        angles.push(phi.rem_euclid(TAU));
        angles.push((phi + PI).rem_euclid(TAU));
    }
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    angles
}

/// Area of `Ω ∩ B(a, eps)` by polar quadrature around `a`: along each ray the
/// inside intervals are exact (analytic or bisected), and the angular integral
/// is split at the directions where the integrand has kinks.
pub fn cap_measure(domain: &GridDomain, a: [f64; 2], eps: f64) -> Result<f64> {
    let curve = domain.require_boundary("cap_measure")?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("cap_measure", format!("radius must be positive, got {eps}")));
    }
    let reach = (0..4096)
        .map(|i| {
            let q = curve.point(TAU * i as f64 / 4096.0);
            (q[0] - a[0]).hypot(q[1] - a[1])
        })
        .fold(0.0, f64::max);
    if eps > reach * (1.0 + 1e-6) {
        return Ok(curve.area());
    }
    let mut integrand = |phi: f64| {
        let dir = [phi.cos(), phi.sin()];
        curve
            .ray_inside_intervals(a, dir, eps)
            .iter()
            .map(|&(lo, hi)| 0.5 * (hi * hi - lo * lo))
            .sum::<f64>()
    };
    let tol = 1e-13 * eps * eps;
    let cuts = angular_breakpoints(curve, a, eps);
    let area = if cuts.is_empty() {
        adaptive_integrate(&mut integrand, 0.0, TAU, tol)
    } else {
        let mut total = 0.0;
        for (k, &start) in cuts.iter().enumerate() {
            let end = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + TAU };
            total += adaptive_integrate(&mut integrand, start, end, tol / cuts.len() as f64);
        }
        total
    };
    Ok(area.min(curve.area()))
}

/// Two-term expansion of the boundary-cap volume in terms of the boundary
/// mean curvature `h`: `(ω_n/2) εⁿ (1 − n h ε / ((n+1) B(1/2, (n−1)/2)))`.
pub fn cap_measure_expansion<T: Real>(h: T, eps: T, n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::domain("cap_measure_expansion", format!("dimension {n} < 2")));
    }
    if !(eps > T::zero()) {
        return Err(Error::domain("cap_measure_expansion", "radius must be positive"));
    }
    let omega: T = unit_ball_volume(n)?;
    let nf = T::int(n as i64);
    let b: T = boundary_beta(n);
    Ok(omega / T::lit(2.0) * eps.powi(n as i32) * (T::one() - nf * h * eps / ((nf + T::one()) * b)))
}

/// Length of the part of the circle `∂B(a, eps)` lying inside Ω (the
/// relative perimeter of `Ω ∩ B(a, eps)` in Ω).
pub fn boundary_arc_inside(domain: &GridDomain, a: [f64; 2], eps: f64) -> Result<f64> {
    let curve = domain.require_boundary("boundary_arc_inside")?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("boundary_arc_inside", format!("radius must be positive, got {eps}")));
    }
    let mut angles: Vec<f64> = curve
        .circle_crossings(a, eps)
        .into_iter()
        .map(|t| {
            let q = curve.point(t);
            (q[1] - a[1]).atan2(q[0] - a[0]).rem_euclid(TAU)
        })
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let inside_at = |phi: f64| curve.contains([a[0] + eps * phi.cos(), a[1] + eps * phi.sin()]);
    if angles.is_empty() {
        return Ok(if inside_at(0.0) { TAU * eps } else { 0.0 });
    }
    let mut inside = 0.0;
    for (k, &start) in angles.iter().enumerate() {
        let end = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + TAU };
        if inside_at(0.5 * (start + end)) {
            inside += end - start;
        }
    }
    Ok(inside * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fitted_order;

    fn disk() -> GridDomain {
        build_domain(&DomainSpec::disk(1.0), 1.0 / 64.0).unwrap()
    }

    /// Area of the intersection of two disks, radii r and R, centres d apart.
    fn lens_area(r: f64, big_r: f64, d: f64) -> f64 {
        let a1 = ((d * d + r * r - big_r * big_r) / (2.0 * d * r)).acos();
        let a2 = ((d * d + big_r * big_r - r * r) / (2.0 * d * big_r)).acos();
        let tri = 0.5 * ((-d + r + big_r) * (d + r - big_r) * (d - r + big_r) * (d + r + big_r)).sqrt();
        r * r * a1 + big_r * big_r * a2 - tri
    }

    #[test]
    fn curvature_on_circle_and_ellipse() {
        let d = disk();
        assert!((boundary_mean_curvature(&d, [0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
        assert!(boundary_mean_curvature(&d, [0.5, 0.0]).is_err());
        let e = build_domain(&DomainSpec::ellipse(2.0, 1.5), 1.0 / 64.0).unwrap();
        assert!((boundary_mean_curvature(&e, [2.0, 0.0]).unwrap() - 2.0 / 2.25).abs() < 1e-12);
        assert!((boundary_mean_curvature(&e, [0.0, 1.5]).unwrap() - 1.5 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn seeds_at_the_sharpest_point() {
        let s = max_curvature_seed(&disk()).unwrap();
        assert_eq!(s.param, 0.0);
        assert!((s.curvature - 1.0).abs() < 1e-15 && s.diameter_bound <= s.curvature);
        assert!((s.diameter_bound - 0.5).abs() < 1e-15);
        let e = build_domain(&DomainSpec::ellipse(2.0, 1.0), 1.0 / 64.0).unwrap();
        let s = max_curvature_seed(&e).unwrap();
        assert!((s.point[0].abs() - 2.0).abs() < 1e-12 && s.point[1].abs() < 1e-9);
        assert!((s.curvature - 2.0).abs() < 1e-12);
        assert!((s.diameter_bound - 0.25).abs() < 1e-15);
        let c = build_domain(&DomainSpec::ellipse(1.0, 1.0), 1.0 / 64.0).unwrap();
        assert_eq!(max_curvature_seed(&c).unwrap().param, 0.0);
    }

    #[test]
    fn cap_of_unit_disk_matches_lens_formula() {
        let d = disk();
        let cap = cap_measure(&d, [1.0, 0.0], 0.2).unwrap();
        let lens = lens_area(1.0, 0.2, 1.0);
        assert!((lens - 0.060163).abs() < 1e-6);
        assert!((cap - lens).abs() < 1e-5 * lens, "{cap} vs {lens}");
        assert_eq!(cap_measure(&d, [1.0, 0.0], 2.5).unwrap(), PI);
        for &eps in &[0.05, 0.5, 1.3, 1.99] {
            let cap = cap_measure(&d, [1.0, 0.0], eps).unwrap();
            let lens = lens_area(1.0, eps, 1.0);
            assert!((cap - lens).abs() < 1e-5 * lens);
        }
    }

    #[test]
    fn cap_is_rotation_invariant_and_monotone() {
        let d = disk();
        let reference = cap_measure(&d, [1.0, 0.0], 0.3).unwrap();
        for k in 1..8 {
            let t = 0.77 * k as f64;
            let cap = cap_measure(&d, [t.cos(), t.sin()], 0.3).unwrap();
            assert!((cap - reference).abs() < 1e-5 * reference);
        }
        let mut last = 0.0;
        for k in 1..=30 {
            let cap = cap_measure(&d, [1.0, 0.0], 0.075 * k as f64).unwrap();
            assert!(cap >= last);
            last = cap;
        }
        assert_eq!(last, PI);
    }

    #[test]
    fn cap_expansion_values() {
        let flat: f64 = cap_measure_expansion(0.0, 0.3, 2).unwrap();
        assert!((flat - PI * 0.09 / 2.0).abs() < 1e-15);
        let e2: f64 = cap_measure_expansion(1.0, 0.2, 2).unwrap();
        assert!((e2 - PI * 0.02 * (1.0 - 0.4 / (3.0 * PI))).abs() < 1e-15);
        assert!((e2 - 0.0601653).abs() < 2e-7);
        // (2π/3) ε³ (1 − 3ε/8)
        let e3: f64 = cap_measure_expansion(1.0, 0.2, 3).unwrap();
        let hand = 2.0 * PI / 3.0 * 0.008 * (1.0 - 0.075);
        assert!((e3 - hand).abs() < 1e-15);
        assert!((e3 - 0.0154985).abs() < 1e-7);
        assert!(cap_measure_expansion(1.0f64, 0.2, 1).is_err());
    }

    #[test]
    fn cap_expansion_remainder_order() {
        let d = disk();
        let eps = [0.02, 0.04, 0.08, 0.16];
        let diffs: Vec<f64> = eps
            .iter()
            .map(|&e| (cap_measure(&d, [1.0, 0.0], e).unwrap() - cap_measure_expansion(1.0, e, 2).unwrap()).abs())
            .collect();
        assert!(fitted_order(&eps, &diffs) >= 3.0 - 0.1, "{diffs:?}");
    }

    #[test]
    fn arc_inside_unit_disk() {
        let d = disk();
        for &eps in &[0.02, 0.2, 0.9, 1.7] {
            let arc = boundary_arc_inside(&d, [1.0, 0.0], eps).unwrap();
            let exact = eps * (PI - 2.0 * (eps / 2.0).asin());
            assert!((arc - exact).abs() < 1e-6 * exact);
        }
        assert!((boundary_arc_inside(&d, [1.0, 0.0], 0.2).unwrap() - 0.588252).abs() < 1e-6);
        assert_eq!(boundary_arc_inside(&d, [1.0, 0.0], 2.5).unwrap(), 0.0);
        assert!((boundary_arc_inside(&d, [0.0, 0.0], 0.5).unwrap() - PI).abs() < 1e-12);
        let eps = [0.02, 0.04, 0.08, 0.16];
        let diffs: Vec<f64> = eps
            .iter()
            .map(|&e| (boundary_arc_inside(&d, [1.0, 0.0], e).unwrap() - (PI * e - e * e)).abs())
            .collect();
        assert!(fitted_order(&eps, &diffs) > 2.9);
    }

    #[test]
    fn wavy_domain_cap_agrees_with_monte_carlo_like_grid() {
        let spec = DomainSpec::Fourier {
            mean_radius: 1.0,
            cos: vec![0.0, 0.0, 0.15],
            sin: vec![],
        };
        let d = build_domain(&spec, 1.0 / 64.0).unwrap();
        let a = d.boundary().unwrap().point(0.4);
        let eps = 0.6;
        let cap = cap_measure(&d, a, eps).unwrap();
        // fine-grid oracle
        let n = 2000;
        let h = 2.0 * eps / n as f64;
        let curve = d.boundary().unwrap();
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = [a[0] - eps + (i as f64 + 0.5) * h, a[1] - eps + (j as f64 + 0.5) * h];
                if (p[0] - a[0]).hypot(p[1] - a[1]) < eps && curve.contains(p) {
                    count += 1;
                }
            }
        }
        let grid = count as f64 * h * h;
        assert!((cap - grid).abs() < 2e-3 * cap, "{cap} vs {grid}");
    }
}
