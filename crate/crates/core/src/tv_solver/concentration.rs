//! Detection of mass concentration in a minimising family.

use serde::{Deserialize, Serialize};

use super::grid_function::{abs_pow, GridFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    /// Smallest small-radius mass reported as an atom.
    pub atom_threshold: f64,
    /// Largest relative change of the ball mass across the last two radii.
    pub stability: f64,
    /// Number of density maxima examined.
    pub candidates: usize,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            atom_threshold: 0.05,
            stability: 0.1,
            candidates: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: [f64; 2],
    pub mass: f64,
}

/// Atoms and diffuse part of the `|u|^{n/(n−1)}` mass of the last family member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub atoms: Vec<Atom>,
    pub diffuse_mass: f64,
    /// `Σ ν_j + diffuse`, which must be 1 for a normalised member.
    pub total_mass: f64,
}

pub fn concentration_report(family: &[GridFunction], radii: &[f64]) -> Result<ConcentrationReport> {
    concentration_report_with(family, radii, &ConcentrationConfig::default())
}

pub fn concentration_report_with(
    family: &[GridFunction],
    radii: &[f64],
    config: &ConcentrationConfig,
) -> Result<ConcentrationReport> {
    const OP: &str = "concentration_report";
    let last = family.last().ok_or_else(|| Error::domain(OP, "empty family"))?;
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain(OP, "need at least two positive, strictly decreasing radii"));
    }
    for (k, u) in family.iter().enumerate() {
        let norm = u.lp_norm_power(2)?;
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::domain(OP, format!("member {k} has norm {norm}, expected 1")));
        }
    }
    let domain = last.domain();
    let density: Vec<f64> = last
        .values()
        .iter()
        .enumerate()
        .map(|(c, &v)| domain.cell_weight(c) * abs_pow(v, 2.0))
        .collect();
    let total: f64 = density.iter().sum();
    let point_density = |c: usize| abs_pow(last.values()[c], 2.0);

    // local maxima of the pointwise density, largest first
    let mut peaks: Vec<usize> = (0..domain.cell_count())
        .filter(|&c| {
            let (i, j) = domain.cell_coords(c);
            let here = point_density(c);
            here > 0.0
                && (-1..=1).all(|di: isize| {
                    (-1..=1).all(|dj: isize| {
                        domain
                            .cell_at(i as isize + di, j as isize + dj)
                            .map_or(true, |o| point_density(o) <= here)
                    })
                })
        })
        .collect();
    peaks.sort_by(|&a, &b| point_density(b).partial_cmp(&point_density(a)).unwrap().then(a.cmp(&b)));
    // keep one representative per plateau
    peaks.dedup_by(|a, b| {
        let (pa, pb) = (domain.cell_center(*a), domain.cell_center(*b));
        point_density(*a) == point_density(*b) && (pa[0] - pb[0]).hypot(pa[1] - pb[1]) < radii[radii.len() - 1]
    });
    peaks.truncate(config.candidates);

    let small = radii[radii.len() - 1];
    let prev = radii[radii.len() - 2];
    let mut consumed = vec![false; density.len()];
    let ball_mass = |center: [f64; 2], r: f64, consumed: &[bool]| {
        (0..density.len())
            .filter(|&c| !consumed[c])
            .filter(|&c| {
                let p = domain.cell_center(c);
                (p[0] - center[0]).hypot(p[1] - center[1]) < r
            })
            .map(|c| density[c])
            .sum::<f64>()
    };
    let mut scored: Vec<(usize, f64)> = peaks
        .iter()
        .map(|&c| (c, ball_mass(domain.cell_center(c), small, &consumed)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let mut atoms = Vec::new();
    for (c, _) in scored {
        let center = domain.cell_center(c);
        let m_small = ball_mass(center, small, &consumed);
        let m_prev = ball_mass(center, prev, &consumed);
        if m_small <= config.atom_threshold || (m_prev - m_small).abs() / m_small >= config.stability {
            continue;
        }
        let (mut mx, mut my) = (0.0, 0.0);
        for cell in 0..density.len() {
            let p = domain.cell_center(cell);
            if !consumed[cell] && (p[0] - center[0]).hypot(p[1] - center[1]) < small {
                mx += density[cell] * p[0];
                my += density[cell] * p[1];
                consumed[cell] = true;
            }
        }
        let mut location = [mx / m_small, my / m_small];
        if let Some(curve) = domain.boundary() {
            if !curve.contains(location) {
                location = curve.point(curve.nearest_param(location));
            }
        }
        atoms.push(Atom { location, mass: m_small });
    }
    let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
    Ok(ConcentrationReport {
        diffuse_mass: total - atom_mass,
        total_mass: total,
        atoms,
    })
}
