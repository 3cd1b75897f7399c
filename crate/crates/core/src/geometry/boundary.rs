//! Analytic C² boundary curves of planar domains.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Description of a bounded planar domain, centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk { radius: f64 },
    Ellipse { semi_x: f64, semi_y: f64 },
    /// Star-shaped domain with polar radius
    /// `r(θ) = mean_radius + Σ_k cos[k-1]·cos kθ + sin[k-1]·sin kθ`.
    Fourier {
        mean_radius: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    /// Axis-aligned rectangle. Never a valid analytic domain (its corners
    /// have no curvature); see [`crate::GridDomain::rectangle`] for box grids.
    Rectangle { width: f64, height: f64 },
}

impl DomainSpec {
    pub fn disk(radius: f64) -> Self {
        DomainSpec::Disk { radius }
    }

    pub fn ellipse(semi_x: f64, semi_y: f64) -> Self {
        DomainSpec::Ellipse { semi_x, semi_y }
    }
}

/// A validated closed, simple, C² boundary curve, parametrised
/// counter-clockwise by `t ∈ [0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCurve {
    Circle { radius: f64 },
    Ellipse { semi_x: f64, semi_y: f64 },
    Fourier { mean_radius: f64, cos: Vec<f64>, sin: Vec<f64> },
}

const CHECK_SAMPLES: usize = 4096;

impl BoundaryCurve {
    pub fn from_spec(spec: &DomainSpec) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match spec {
            DomainSpec::Disk { radius } => {
                positive("radius", *radius)?;
                Ok(BoundaryCurve::Circle { radius: *radius })
            }
            DomainSpec::Ellipse { semi_x, semi_y } => {
                positive("semi_x", *semi_x)?;
                positive("semi_y", *semi_y)?;
                Ok(BoundaryCurve::Ellipse {
                    semi_x: *semi_x,
                    semi_y: *semi_y,
                })
            }
            DomainSpec::Fourier {
                mean_radius,
                cos,
                sin,
            } => {
                positive("mean_radius", *mean_radius)?;
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite Fourier coefficient".into()));
                }
                let curve = BoundaryCurve::Fourier {
                    mean_radius: *mean_radius,
                    cos: cos.clone(),
                    sin: sin.clone(),
                };
                // r > 0 everywhere makes the curve a simple star-shaped loop
                let min_r = (0..CHECK_SAMPLES)
                    .map(|i| curve.polar_radius(TAU * i as f64 / CHECK_SAMPLES as f64).0)
                    .fold(f64::INFINITY, f64::min);
                if min_r <= 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "polar radius reaches {min_r:.3e}; the boundary self-intersects"
                    )));
                }
                Ok(curve)
            }
            DomainSpec::Rectangle { .. } => Err(Error::InvalidSpec(
                "rectangle corners have no curvature; the boundary must be C²".into(),
            )),
        }
    }

    /// `(r, r', r'')` of a Fourier polar radius at angle `t`.
    fn polar_radius(&self, t: f64) -> (f64, f64, f64) {
        match self {
            BoundaryCurve::Fourier {
                mean_radius,
                cos,
                sin,
            } => {
                let mut r = *mean_radius;
                let mut dr = 0.0;
                let mut ddr = 0.0;
                for (k, (a, b)) in cos
                    .iter()
                    .chain(std::iter::repeat(&0.0))
                    .zip(sin.iter().chain(std::iter::repeat(&0.0)))
                    .take(cos.len().max(sin.len()))
                    .enumerate()
                {
                    let kf = (k + 1) as f64;
                    let (s, c) = (kf * t).sin_cos();
                    r += a * c + b * s;
                    dr += kf * (-a * s + b * c);
                    ddr += -kf * kf * (a * c + b * s);
                }
                (r, dr, ddr)
            }
            _ => unreachable!("polar radius is only defined for Fourier curves"),
        }
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        let (s, c) = t.sin_cos();
        match self {
            BoundaryCurve::Circle { radius } => [radius * c, radius * s],
            BoundaryCurve::Ellipse { semi_x, semi_y } => [semi_x * c, semi_y * s],
            BoundaryCurve::Fourier { .. } => {
                let r = self.polar_radius(t).0;
                [r * c, r * s]
            }
        }
    }

    /// First and second derivatives of the parametrisation.
    pub fn derivatives(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let (s, c) = t.sin_cos();
        match self {
            BoundaryCurve::Circle { radius } => ([-radius * s, radius * c], [-radius * c, -radius * s]),
            BoundaryCurve::Ellipse { semi_x, semi_y } => {
                ([-semi_x * s, semi_y * c], [-semi_x * c, -semi_y * s])
            }
            BoundaryCurve::Fourier { .. } => {
                let (r, dr, ddr) = self.polar_radius(t);
                let d1 = [dr * c - r * s, dr * s + r * c];
                let d2 = [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s];
                (d1, d2)
            }
        }
    }

    /// Signed curvature at parameter `t`, positive where the domain is
    /// locally convex.
    pub fn curvature(&self, t: f64) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => radius.recip(),
            _ => {
                let (d1, d2) = self.derivatives(t);
                let speed = d1[0].hypot(d1[1]);
                (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed)
            }
        }
    }

    /// A level function: negative inside, positive outside, zero on the curve.
    pub fn level(&self, p: [f64; 2]) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => p[0].hypot(p[1]) - radius,
            BoundaryCurve::Ellipse { semi_x, semi_y } => {
                (p[0] / semi_x).powi(2) + (p[1] / semi_y).powi(2) - 1.0
            }
            BoundaryCurve::Fourier { .. } => {
                let theta = p[1].atan2(p[0]);
                p[0].hypot(p[1]) - self.polar_radius(theta).0
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.level(p) < 0.0
    }

    /// Exact enclosed area.
    pub fn area(&self) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => PI * radius * radius,
            BoundaryCurve::Ellipse { semi_x, semi_y } => PI * semi_x * semi_y,
            BoundaryCurve::Fourier {
                mean_radius,
                cos,
                sin,
            } => {
                let harmonics: f64 = cos.iter().chain(sin).map(|c| c * c).sum();
                PI * (mean_radius * mean_radius + 0.5 * harmonics)
            }
        }
    }

    /// Largest absolute curvature, from dense sampling.
    pub fn max_abs_curvature(&self) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => radius.recip(),
            BoundaryCurve::Ellipse { semi_x, semi_y } => {
                let (a, b) = (semi_x.max(*semi_y), semi_x.min(*semi_y));
                a / (b * b)
            }
            BoundaryCurve::Fourier { .. } => (0..CHECK_SAMPLES)
                .map(|i| self.curvature(TAU * i as f64 / CHECK_SAMPLES as f64).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Parameter of the boundary point nearest to `p`.
    pub fn nearest_param(&self, p: [f64; 2]) -> f64 {
        if let BoundaryCurve::Circle { .. } = self {
            return p[1].atan2(p[0]).rem_euclid(TAU);
        }
        const COARSE: usize = 128;
        let dist2 = |t: f64| {
            let q = self.point(t);
            (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
        };
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for i in 0..COARSE {
            let t = TAU * i as f64 / COARSE as f64;
            let d = dist2(t);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let step = TAU / COARSE as f64;
        let (lo, hi) = (best_t - step, best_t + step);
        let mut t = best_t;
        // Newton on (γ(t) - p)·γ'(t) = 0, kept inside the coarse bracket
        for _ in 0..30 {
            let q = self.point(t);
            let (d1, d2) = self.derivatives(t);
            let diff = [q[0] - p[0], q[1] - p[1]];
            let g = diff[0] * d1[0] + diff[1] * d1[1];
            let dg = d1[0] * d1[0] + d1[1] * d1[1] + diff[0] * d2[0] + diff[1] * d2[1];
            let mut next = if dg > 0.0 { t - g / dg } else { t };
            if !(lo..=hi).contains(&next) || dg <= 0.0 {
                // fall back to a golden-section refinement of the distance
                let evals = crate::numeric::golden_section(dist2, lo, hi, 60);
                next = evals
                    .iter()
                    .fold((t, dist2(t)), |acc, &(x, fx)| if fx < acc.1 { (x, fx) } else { acc })
                    .0;
                t = next;
                break;
            }
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        t.rem_euclid(TAU)
    }

    /// Exact signed distance (negative inside).
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        if let BoundaryCurve::Circle { radius } = self {
            return p[0].hypot(p[1]) - radius;
        }
        let q = self.point(self.nearest_param(p));
        let d = (q[0] - p[0]).hypot(q[1] - p[1]);
        if self.level(p) < 0.0 {
            -d
        } else {
            d
        }
    }

    /// Sub-intervals of `[0, reach]` on which `origin + ρ·dir` lies inside.
    pub fn ray_inside_intervals(&self, origin: [f64; 2], dir: [f64; 2], reach: f64) -> Vec<(f64, f64)> {
        let quadratic = |sx: f64, sy: f64| {
            let a = (dir[0] / sx).powi(2) + (dir[1] / sy).powi(2);
            let b = 2.0 * (origin[0] * dir[0] / (sx * sx) + origin[1] * dir[1] / (sy * sy));
            let c = (origin[0] / sx).powi(2) + (origin[1] / sy).powi(2) - 1.0;
            let disc = b * b - 4.0 * a * c;
            if disc <= 0.0 {
                return Vec::new();
            }
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let (r1, r2) = if q == 0.0 {
                (0.0, 0.0)
            } else {
                let (x, y) = (q / a, c / q);
                (x.min(y), x.max(y))
            };
            let lo = r1.max(0.0);
            let hi = r2.min(reach);
            if hi > lo {
                vec![(lo, hi)]
            } else {
                Vec::new()
            }
        };
        match self {
            BoundaryCurve::Circle { radius } => quadratic(*radius, *radius),
            BoundaryCurve::Ellipse { semi_x, semi_y } => quadratic(*semi_x, *semi_y),
            BoundaryCurve::Fourier { .. } => {
                const SAMPLES: usize = 96;
                let at = |rho: f64| self.level([origin[0] + rho * dir[0], origin[1] + rho * dir[1]]);
                let start = reach * 1e-9;
                let mut inside = at(start) < 0.0;
                let mut open = if inside { Some(0.0) } else { None };
                let mut out = Vec::new();
                let mut prev = start;
                for j in 1..=SAMPLES {
                    let rho = reach * j as f64 / SAMPLES as f64;
                    let now = at(rho) < 0.0;
                    if now != inside {
                        let cross = bisect(at, prev, rho, 60);
                        if now {
                            open = Some(cross);
                        } else if let Some(lo) = open.take() {
                            out.push((lo, cross));
                        }
                        inside = now;
                    }
                    prev = rho;
                }
                if let Some(lo) = open {
                    out.push((lo, reach));
                }
                out
            }
        }
    }

    /// Parameters `t` where the boundary meets the circle of radius `radius`
    /// around `center`.
    pub fn circle_crossings(&self, center: [f64; 2], radius: f64) -> Vec<f64> {
        let g = |t: f64| {
            let q = self.point(t);
            (q[0] - center[0]).powi(2) + (q[1] - center[1]).powi(2) - radius * radius
        };
        let scale = self.max_extent();
        let samples = ((64.0 * scale / radius).ceil() as usize).clamp(4096, 1 << 20);
        let mut roots = Vec::new();
        let mut t_prev = 0.0;
        let mut g_prev = g(0.0);
        for i in 1..=samples {
            let t = TAU * i as f64 / samples as f64;
            let gt = g(t);
            if g_prev == 0.0 {
                roots.push(t_prev);
            } else if gt != 0.0 && (gt > 0.0) != (g_prev > 0.0) {
                roots.push(bisect(g, t_prev, t, 80));
            }
            t_prev = t;
            g_prev = gt;
        }
        roots
    }

    /// Radius of a centred disk containing the curve.
    pub fn max_extent(&self) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => *radius,
            BoundaryCurve::Ellipse { semi_x, semi_y } => semi_x.max(*semi_y),
            BoundaryCurve::Fourier { mean_radius, cos, sin } => {
                mean_radius + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>()
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            BoundaryCurve::Circle { radius } => ([-radius, -radius], [*radius, *radius]),
            BoundaryCurve::Ellipse { semi_x, semi_y } => ([-semi_x, -semi_y], [*semi_x, *semi_y]),
            BoundaryCurve::Fourier { .. } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for i in 0..CHECK_SAMPLES {
                    let p = self.point(TAU * i as f64 / CHECK_SAMPLES as f64);
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Diameter of the curve, from pairwise distances of boundary samples.
    pub fn diameter(&self) -> f64 {
        match self {
            BoundaryCurve::Circle { radius } => 2.0 * radius,
            BoundaryCurve::Ellipse { semi_x, semi_y } => 2.0 * semi_x.max(*semi_y),
            BoundaryCurve::Fourier { .. } => {
                const N: usize = 720;
                let pts: Vec<[f64; 2]> = (0..N).map(|i| self.point(TAU * i as f64 / N as f64)).collect();
                let mut best: f64 = 0.0;
                for (i, p) in pts.iter().enumerate() {
                    for q in &pts[i + 1..] {
                        best = best.max((p[0] - q[0]).hypot(p[1] - q[1]));
                    }
                }
                best
            }
        }
    }
}
