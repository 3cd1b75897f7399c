//! Grid functions, discrete total variation and the grid quotient.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;

const ABSENT: u32 = u32::MAX;

/// Weight of the checkerboard mode `½(a − b − c + d)` in the block gradient.
/// The averaged differences of a 2×2 block do not see that mode, so without
/// it an oscillating function would have almost no variation.
pub(crate) const CHECKER_WEIGHT: f64 = 0.02;

/// A 2×2 block of grid cells `a (i,j), b (i+1,j), c (i,j+1), d (i+1,j+1)`
/// on which one gradient sample is taken. Cells outside the domain are
/// `ABSENT`; no difference is ever taken across the boundary.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellBlock {
    cells: [u32; 4],
    /// Area weight in units of h²: a quarter of each present cell's fraction.
    weight: f64,
}

fn build_blocks(domain: &GridDomain) -> Vec<CellBlock> {
    let mut out = Vec::new();
    let nx = domain.nx() as isize;
    let ny = domain.ny() as isize;
    let at = |i: isize, j: isize| domain.cell_at(i, j).map_or(ABSENT, |c| c as u32);
    for j in -1..ny {
        for i in -1..nx {
            let cells = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let present = |k: usize| cells[k] != ABSENT;
            let has_pair = (present(0) && present(1))
                || (present(2) && present(3))
                || (present(0) && present(2))
                || (present(1) && present(3));
            if !has_pair {
                continue;
            }
            let weight = cells
                .iter()
                .filter(|&&c| c != ABSENT)
                .map(|&c| domain.cell_fraction(c as usize))
                .sum::<f64>()
                * 0.25;
            out.push(CellBlock { cells, weight });
        }
    }
    out
}

pub(crate) fn blocks(domain: &GridDomain) -> &[CellBlock] {
    domain.tv_blocks.get_or_init(|| build_blocks(domain))
}

/// Averaged differences `(gx, gy, e)` of a block and their coefficients
/// with respect to the four cell values.
#[inline]
fn block_gradient(b: &CellBlock, u: &[f64]) -> ([f64; 3], [[f64; 4]; 3]) {
    let p = |k: usize| b.cells[k] != ABSENT;
    let v = |k: usize| if p(k) { u[b.cells[k] as usize] } else { 0.0 };
    let mut coef = [[0.0; 4]; 3];
    let (mut gx, mut gy, mut e) = (0.0, 0.0, 0.0);
    let pairs_x = [(0usize, 1usize), (2, 3)];
    let pairs_y = [(0usize, 2usize), (1, 3)];
    let nx = pairs_x.iter().filter(|&&(s, t)| p(s) && p(t)).count();
    let ny = pairs_y.iter().filter(|&&(s, t)| p(s) && p(t)).count();
    for &(s, t) in &pairs_x {
        if p(s) && p(t) {
            let w = 1.0 / nx as f64;
            gx += w * (v(t) - v(s));
            coef[0][t] += w;
            coef[0][s] -= w;
        }
    }
    for &(s, t) in &pairs_y {
        if p(s) && p(t) {
            let w = 1.0 / ny as f64;
            gy += w * (v(t) - v(s));
            coef[1][t] += w;
            coef[1][s] -= w;
        }
    }
    if b.cells.iter().all(|&c| c != ABSENT) {
        e = 0.5 * (v(0) - v(1) - v(2) + v(3));
        coef[2] = [0.5, -0.5, -0.5, 0.5];
    }
    ([gx, gy, e], coef)
}

#[inline]
fn block_norm(g: &[f64; 3]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + CHECKER_WEIGHT * g[2] * g[2]).sqrt()
}

/// Discrete total variation of cell values `u` (indexed by active cell).
pub(crate) fn tv_of(domain: &GridDomain, u: &[f64]) -> f64 {
    let h = domain.h();
    blocks(domain)
        .iter()
        .map(|b| b.weight * block_norm(&block_gradient(b, u).0))
        .sum::<f64>()
        * h
}

/// Huber-smoothed total variation (width `delta` in value units) and its
/// gradient with respect to the cell values, written into `grad`.
pub(crate) fn smoothed_tv_with_gradient(domain: &GridDomain, u: &[f64], delta: f64, grad: &mut [f64]) -> f64 {
    let h = domain.h();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for b in blocks(domain) {
        let (g, coef) = block_gradient(b, u);
        let r = block_norm(&g);
        let (value, scale) = if r <= delta {
            (0.5 * r * r / delta, 1.0 / delta)
        } else {
            (r - 0.5 * delta, 1.0 / r)
        };
        total += b.weight * value;
        let f = b.weight * h * scale;
        let w = [g[0], g[1], CHECKER_WEIGHT * g[2]];
        for k in 0..4 {
            if b.cells[k] != ABSENT {
                let d = w[0] * coef[0][k] + w[1] * coef[1][k] + w[2] * coef[2][k];
                grad[b.cells[k] as usize] += f * d;
            }
        }
    }
    total * h
}

/// `x ↦ |x|^p` with fast paths for the common exponents.
#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else if p == 0.5 {
        a.sqrt()
    } else if p == 1.5 {
        a * a.sqrt()
    } else if p == 0.25 {
        a.sqrt().sqrt()
    } else {
        a.powf(p)
    }
}

/// `(Σ w |u|^{n/(n−1)})^{1−1/n}` over the active cells.
pub(crate) fn lp_of(domain: &GridDomain, u: &[f64], n: u32) -> f64 {
    let p = n as f64 / (n as f64 - 1.0);
    let sum: f64 = u
        .iter()
        .enumerate()
        .map(|(c, &x)| domain.cell_weight(c) * abs_pow(x, p))
        .sum();
    sum.powf(1.0 - 1.0 / n as f64)
}

/// Candidate BV function: one value per active cell of a domain.
#[derive(Debug)]
pub struct GridFunction<'d> {
    domain: &'d GridDomain,
    values: Vec<f64>,
    tv: OnceLock<f64>,
    lp2: OnceLock<f64>,
}

impl Clone for GridFunction<'_> {
    fn clone(&self) -> Self {
        Self {
            domain: self.domain,
            values: self.values.clone(),
            tv: self.tv.clone(),
            lp2: self.lp2.clone(),
        }
    }
}

/// Sub-samples per axis used when averaging a pointwise function over cells.
pub const CELL_SUBSAMPLES: usize = 8;

impl<'d> GridFunction<'d> {
    pub fn new(domain: &'d GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(Error::domain(
                "GridFunction::new",
                format!("{} values for {} cells", values.len(), domain.cell_count()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("GridFunction::new", "values must be finite"));
        }
        Ok(Self {
            domain,
            values,
            tv: OnceLock::new(),
            lp2: OnceLock::new(),
        })
    }

    /// Cell averages of a pointwise function over the part of each cell
    /// inside the domain.
    pub fn from_fn<F: Fn([f64; 2]) -> f64 + Sync>(domain: &'d GridDomain, f: F) -> Result<Self> {
        Self::new(domain, domain.cell_averages(f, CELL_SUBSAMPLES))
    }

    pub fn constant(domain: &'d GridDomain, c: f64) -> Result<Self> {
        Self::new(domain, vec![c; domain.cell_count()])
    }

    pub fn domain(&self) -> &'d GridDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access; clears the cached integrals.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.tv.take();
        self.lp2.take();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction<'d>> {
        GridFunction::new(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `(value, cell weight)` pairs.
    pub fn level_measures(&self) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(c, &v)| (v, self.domain.cell_weight(c)))
            .collect()
    }

    pub fn total_variation(&self) -> f64 {
        *self.tv.get_or_init(|| tv_of(self.domain, &self.values))
    }

    pub fn lp_norm_power(&self, n: u32) -> Result<f64> {
        if n < 2 {
            return Err(Error::domain("lp_norm_power", format!("dimension {n} < 2")));
        }
        if n == 2 {
            Ok(*self.lp2.get_or_init(|| lp_of(self.domain, &self.values, 2)))
        } else {
            Ok(lp_of(self.domain, &self.values, n))
        }
    }
}

/// Isotropic discrete total variation. Each 2×2 block of cells contributes
/// `h · (block area fraction) · |averaged difference vector|`; only pairs of
/// cells inside the domain are differenced.
pub fn total_variation(u: &GridFunction) -> f64 {
    u.total_variation()
}

/// `(Σ h² |u|^{n/(n−1)})^{1−1/n}` with cut cells weighted by their inside
/// fraction; 0 for the zero function.
pub fn lp_norm_power(u: &GridFunction, n: u32) -> Result<f64> {
    u.lp_norm_power(n)
}

/// Shift making `Σ w_i sgn(u_i − λ)|u_i − λ|^q = 0` for cell values with
/// weights; exact mean for q = 1, otherwise a bracketed root warm-started
/// from `guess`.
pub(crate) fn constraint_shift(values: &[f64], weights: &[f64], q: f64, guess: Option<f64>) -> Result<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return Err(Error::degenerate("grid_quotient", "the function is constant"));
    }
    let total: f64 = weights.iter().sum();
    if q == 1.0 {
        let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
        return Ok(mean.clamp(lo, hi));
    }
    let residual = |lambda: f64| {
        values
            .iter()
            .zip(weights)
            .map(|(&v, &w)| {
                let t = v - lambda;
                w * t.signum() * abs_pow(t, q)
            })
            .sum::<f64>()
    };
    let range = hi - lo;
    let ftol = 1e-13 * total * range.powf(q);
    let xtol = 1e-15 * range.max(lo.abs()).max(hi.abs());
    let (mut a, mut b) = (lo, hi);
    if let Some(g) = guess.filter(|g| *g > lo && *g < hi) {
        // shrink the bracket around the previous root
        let mut width = 1e-3 * range;
        let fg = residual(g);
        if fg == 0.0 {
            return Ok(g);
        }
        loop {
            let probe = if fg > 0.0 { (g + width).min(hi) } else { (g - width).max(lo) };
            let fp = residual(probe);
            if (fp <= 0.0) == (fg > 0.0) {
                if fg > 0.0 {
                    a = g;
                    b = probe;
                } else {
                    a = probe;
                    b = g;
                }
                break;
            }
            if probe == hi || probe == lo {
                break;
            }
            width *= 8.0;
        }
    }
    Ok(crate::numeric::bracketed_root(residual, a, b, xtol, ftol))
}

/// Quotient `TV(u) / ‖u − λ_q(u)‖` with `λ_q` the constraint shift.
pub fn grid_quotient(u: &GridFunction, q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain("grid_quotient", format!("exponent must be positive, got {q}")));
    }
    let weights = u.domain().cell_weights();
    let lambda = constraint_shift(u.values(), &weights, q, None)?;
    let shifted: Vec<f64> = u.values().iter().map(|v| v - lambda).collect();
    let norm = lp_of(u.domain(), &shifted, 2);
    Ok(u.total_variation() / norm)
}
