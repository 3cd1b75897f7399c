//! Uniform-grid representation of a planar domain.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::boundary::{BoundaryCurve, DomainSpec};
use crate::error::{Error, Result};

const ABSENT: u32 = u32::MAX;
/// Sub-samples per axis when measuring a cut cell.
const FRACTION_SUBSAMPLES: usize = 16;

/// A bounded domain sampled on a uniform grid of square cells.
///
/// Only cells meeting the domain are active; each carries the fraction of its
/// area inside the domain, so cell weights are `fraction · h²`.
#[derive(Debug)]
pub struct GridDomain {
    spec: Option<DomainSpec>,
    boundary: Option<BoundaryCurve>,
    /// Width and height of a box domain anchored at the origin.
    box_size: Option<[f64; 2]>,
    origin: [f64; 2],
    nx: usize,
    ny: usize,
    h: f64,
    signed_distance: Vec<f64>,
    fractions: Vec<f64>,
    active: Vec<usize>,
    local: Vec<u32>,
    measure: f64,
    analytic_measure: f64,
    diameter: f64,
    pub(crate) tv_blocks: OnceLock<Vec<crate::tv_solver::CellBlock>>,
}

/// Builds the grid representation of an analytic domain with cell size `h`.
pub fn build_domain(spec: &DomainSpec, h: f64) -> Result<GridDomain> {
    let curve = BoundaryCurve::from_spec(spec)?;
    let feature = curve.max_abs_curvature().recip();
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSpec(format!("cell size must be positive, got {h}")));
    }
    if h >= feature / 8.0 {
        return Err(Error::InvalidSpec(format!(
            "cell size {h} does not resolve the smallest curvature radius {feature:.4} (need h < {:.4})",
            feature / 8.0
        )));
    }
    let (lo, hi) = curve.bounding_box();
    let origin = [lo[0] - h, lo[1] - h];
    let nx = ((hi[0] - lo[0]) / h).ceil() as usize + 2;
    let ny = ((hi[1] - lo[1]) / h).ceil() as usize + 2;

    let centers = |idx: usize| [origin[0] + (idx % nx) as f64 * h + 0.5 * h, origin[1] + (idx / nx) as f64 * h + 0.5 * h];
    let signed_distance: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| curve.signed_distance(centers(idx)))
        .collect();
    let half_diag = 0.5 * std::f64::consts::SQRT_2 * h;
    let fractions: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let sd = signed_distance[idx];
            if sd <= -half_diag {
                1.0
            } else if sd >= half_diag {
                0.0
            } else {
                let c = centers(idx);
                let k = FRACTION_SUBSAMPLES;
                let step = h / k as f64;
                let mut inside = 0usize;
                for a in 0..k {
                    for b in 0..k {
                        let p = [
                            c[0] - 0.5 * h + (a as f64 + 0.5) * step,
                            c[1] - 0.5 * h + (b as f64 + 0.5) * step,
                        ];
                        inside += curve.contains(p) as usize;
                    }
                }
                inside as f64 / (k * k) as f64
            }
        })
        .collect();
    let analytic_measure = curve.area();
    let diameter = curve.diameter();
    Ok(GridDomain::assemble(
        Some(spec.clone()),
        Some(curve),
        None,
        origin,
        nx,
        ny,
        h,
        signed_distance,
        fractions,
        analytic_measure,
        diameter,
    ))
}

impl GridDomain {
    /// The box `[0, width] × [0, height]` with cells of size `h`. Box domains
    /// support grid functions and total variation but carry no analytic
    /// boundary, so curvature and cap queries reject them.
    pub fn rectangle(width: f64, height: f64, h: f64) -> Result<GridDomain> {
        if !(width > 0.0 && height > 0.0 && h > 0.0) || !(width * height * h).is_finite() {
            return Err(Error::InvalidSpec("box sides and cell size must be positive".into()));
        }
        let nx = (width / h).round() as usize;
        let ny = (height / h).round() as usize;
        if nx == 0 || ny == 0 || (nx as f64 * h - width).abs() > 1e-9 * width || (ny as f64 * h - height).abs() > 1e-9 * height {
            return Err(Error::InvalidSpec(format!("cell size {h} does not tile a {width} × {height} box")));
        }
        let signed_distance = (0..nx * ny)
            .map(|idx| {
                let x = ((idx % nx) as f64 + 0.5) * h;
                let y = ((idx / nx) as f64 + 0.5) * h;
                -x.min(width - x).min(y).min(height - y)
            })
            .collect();
        Ok(GridDomain::assemble(
            None,
            None,
            Some([width, height]),
            [0.0, 0.0],
            nx,
            ny,
            h,
            signed_distance,
            vec![1.0; nx * ny],
            width * height,
            width.hypot(height),
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        spec: Option<DomainSpec>,
        boundary: Option<BoundaryCurve>,
        box_size: Option<[f64; 2]>,
        origin: [f64; 2],
        nx: usize,
        ny: usize,
        h: f64,
        signed_distance: Vec<f64>,
        fractions: Vec<f64>,
        analytic_measure: f64,
        diameter: f64,
    ) -> GridDomain {
        let mut local = vec![ABSENT; nx * ny];
        let mut active = Vec::new();
        for (idx, &f) in fractions.iter().enumerate() {
            if f > 0.0 {
                local[idx] = active.len() as u32;
                active.push(idx);
            }
        }
        let measure = active.iter().map(|&i| fractions[i]).sum::<f64>() * h * h;
        GridDomain {
            spec,
            boundary,
            box_size,
            origin,
            nx,
            ny,
            h,
            signed_distance,
            fractions,
            active,
            local,
            measure,
            analytic_measure,
            diameter,
            tv_blocks: OnceLock::new(),
        }
    }

    pub fn spec(&self) -> Option<&DomainSpec> {
        self.spec.as_ref()
    }

    /// The analytic boundary, absent for box domains.
    pub fn boundary(&self) -> Option<&BoundaryCurve> {
        self.boundary.as_ref()
    }

    pub(crate) fn require_boundary(&self, op: &'static str) -> Result<&BoundaryCurve> {
        self.boundary
            .as_ref()
            .ok_or_else(|| Error::domain(op, "box domains have corners and no analytic boundary"))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Lebesgue measure by cell-fraction quadrature.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Exact area from the analytic description.
    pub fn analytic_measure(&self) -> f64 {
        self.analytic_measure
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Number of active cells (cells meeting the domain).
    pub fn cell_count(&self) -> usize {
        self.active.len()
    }

    /// Grid index `(i, j)` of an active cell.
    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        let idx = self.active[cell];
        (idx % self.nx, idx / self.nx)
    }

    /// Active-cell number of grid cell `(i, j)`, if it meets the domain.
    pub fn cell_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let l = self.local[j as usize * self.nx + i as usize];
        (l != ABSENT).then_some(l as usize)
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let (i, j) = self.cell_coords(cell);
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    /// Fraction of the cell's area inside the domain.
    pub fn cell_fraction(&self, cell: usize) -> f64 {
        self.fractions[self.active[cell]]
    }

    /// Quadrature weight (area inside the domain) of an active cell.
    pub fn cell_weight(&self, cell: usize) -> f64 {
        self.cell_fraction(cell) * self.h * self.h
    }

    pub fn cell_weights(&self) -> Vec<f64> {
        (0..self.cell_count()).map(|c| self.cell_weight(c)).collect()
    }

    /// Signed distance samples at all grid-cell centres, row-major.
    pub fn signed_distance_field(&self) -> &[f64] {
        &self.signed_distance
    }

    /// Exact signed distance of `p` to the boundary (negative inside).
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        match (&self.boundary, self.box_size) {
            (Some(curve), _) => curve.signed_distance(p),
            (None, Some([w, hgt])) => {
                let dx = (-p[0]).max(p[0] - w);
                let dy = (-p[1]).max(p[1] - hgt);
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            (None, None) => unreachable!("a grid domain is either analytic or a box"),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match &self.boundary {
            Some(curve) => curve.contains(p),
            None => self.signed_distance(p) < 0.0,
        }
    }

    /// Cell averages of `f` over the part of each active cell inside the
    /// domain, from `sub × sub` sub-samples per cell.
    pub fn cell_averages<F>(&self, f: F, sub: usize) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> f64 + Sync,
    {
        let sub = sub.max(1);
        (0..self.cell_count())
            .into_par_iter()
            .map(|cell| {
                let c = self.cell_center(cell);
                let full = self.cell_fraction(cell) >= 1.0;
                let step = self.h / sub as f64;
                let mut total = 0.0;
                let mut count = 0usize;
                for a in 0..sub {
                    for b in 0..sub {
                        let p = [
                            c[0] - 0.5 * self.h + (a as f64 + 0.5) * step,
                            c[1] - 0.5 * self.h + (b as f64 + 0.5) * step,
                        ];
                        if full || self.contains(p) {
                            total += f(p);
                            count += 1;
                        }
                    }
                }
                if count == 0 {
                    f(c)
                } else {
                    total / count as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_measure_close_to_pi() {
        let d = build_domain(&DomainSpec::disk(1.0), 1.0 / 256.0).unwrap();
        assert!((d.measure() - PI).abs() < 1e-3, "{}", d.measure());
        assert_eq!(d.analytic_measure(), PI);
        assert!((d.diameter() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_measure_close_to_two_pi() {
        let d = build_domain(&DomainSpec::ellipse(2.0, 1.0), 1.0 / 256.0).unwrap();
        assert!((d.measure() - 2.0 * PI).abs() < 1e-2);
    }

    #[test]
    fn square_and_coarse_grids_are_rejected() {
        let sq = DomainSpec::Rectangle { width: 1.0, height: 1.0 };
        assert!(matches!(build_domain(&sq, 0.01), Err(Error::InvalidSpec(_))));
        assert!(build_domain(&DomainSpec::disk(1.0), 0.2).is_err());
        assert!(build_domain(&DomainSpec::disk(1.0), 0.0).is_err());
    }

    #[test]
    fn signed_distance_is_lipschitz_across_cells() {
        let spec = DomainSpec::Fourier {
            mean_radius: 1.0,
            cos: vec![0.0, 0.08],
            sin: vec![0.0, 0.0, 0.04],
        };
        let d = build_domain(&spec, 1.0 / 64.0).unwrap();
        let sd = d.signed_distance_field();
        let h = d.h();
        for j in 0..d.ny() {
            for i in 0..d.nx() {
                let v = sd[j * d.nx() + i];
                if i + 1 < d.nx() {
                    assert!((sd[j * d.nx() + i + 1] - v).abs() <= h + 2.0 * h);
                }
                if j + 1 < d.ny() {
                    assert!((sd[(j + 1) * d.nx() + i] - v).abs() <= h + 2.0 * h);
                }
            }
        }
        assert!(d.measure() > 0.0);
        assert!((d.measure() - d.analytic_measure()).abs() < 5e-3);
    }

    #[test]
    fn box_domain_covers_the_box() {
        let b = GridDomain::rectangle(1.0, 0.5, 1.0 / 64.0).unwrap();
        assert_eq!(b.cell_count(), 64 * 32);
        assert!((b.measure() - 0.5).abs() < 1e-12);
        assert!(b.boundary().is_none());
        assert!((b.signed_distance([0.5, 0.25]) + 0.25).abs() < 1e-15);
        assert!(GridDomain::rectangle(1.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn cell_averages_of_an_indicator_are_fractions() {
        let b = GridDomain::rectangle(1.0, 1.0, 0.25).unwrap();
        let avg = b.cell_averages(|p| (p[0] < 0.3) as u8 as f64, 20);
        let first = b.cell_at(1, 0).unwrap();
        assert!((avg[first] - 0.2).abs() < 1e-12);
    }
}
