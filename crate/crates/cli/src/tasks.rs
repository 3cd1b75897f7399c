//! Task dispatch and report assembly.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use bv_sharp_core::geometry::{boundary_arc_inside, cap_measure, cap_measure_expansion, max_curvature_seed};
use bv_sharp_core::numeric::{fitted_order, linear_fit, log_space};
use bv_sharp_core::surfaces::{
    classify_achievability, gauss_bonnet_check, geodesic_ball_area, geodesic_circle_expansion, geodesic_circle_length,
    gray_expansion, hemisphere_certificate, scalar_curvature, surface_two_valued_quotient, SurfaceModel, Verdict,
};
use bv_sharp_core::test_functions::default_eps_range;
use bv_sharp_core::tv_solver::{achievability_certificate, minimize_quotient};
use bv_sharp_core::{
    build_domain, critical_quotient_expansion, domain_quotient_expansion, half_space_constant, optimal_epsilon,
    surface_quotient_expansion, two_valued_quotient_exact, Constants, DomainSpec, GridDomain, TwoValuedProfile,
};

use crate::config::{ExperimentConfig, Target, Task};
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Tag attached to achieved domain certificates.
const DOMAIN_JUSTIFICATION: &str = "two-valued-profile-below-half-space-constant";

/// Columns of `detail.csv` for each task.
pub fn csv_columns(task: Task) -> &'static [&'static str] {
    match task {
        Task::Constants => &["n", "c_star", "c_half", "omega_n"],
        Task::SphereCertificate => &["q", "value", "residual", "equals_c_star"],
        Task::DomainCertificate => &[
            "q", "center_x", "center_y", "eps", "beta", "exact_quotient", "solver_value", "threshold", "gap", "achieved",
        ],
        Task::DomainSweep => &["q", "eps", "cap", "arc", "beta", "quotient", "threshold", "gap"],
        Task::Solve => &["q", "iter", "quotient", "residual", "tv", "norm"],
        Task::SurfaceClassify => &["q", "verdict", "justification", "point_u", "point_v", "scalar_curvature", "threshold"],
        Task::ExpansionAudit => &["quantity", "eps", "exact", "expansion", "difference"],
    }
}

/// Summary plus CSV rows of one task run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub task: Task,
    pub summary: Value,
    pub rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn domain_target(config: &ExperimentConfig) -> Result<(&DomainSpec, GridDomain)> {
    match &config.target {
        Some(Target::Domain(spec)) => Ok((spec, build_domain(spec, config.h)?)),
        _ => Err(CliError::field("shape", "task needs a domain")),
    }
}

fn surface_target(config: &ExperimentConfig) -> Result<&SurfaceModel> {
    match &config.target {
        Some(Target::Surface(s)) => Ok(s),
        _ => Err(CliError::field("surface", "task needs a surface")),
    }
}

/// Runs the task without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> Result<Report> {
    let (summary, rows) = match config.task {
        Task::Constants => constants(config)?,
        Task::SphereCertificate => sphere_certificate(config)?,
        Task::DomainCertificate => domain_certificate(config)?,
        Task::DomainSweep => domain_sweep(config)?,
        Task::Solve => solve(config)?,
        Task::SurfaceClassify => surface_classify(config)?,
        Task::ExpansionAudit => match config.target {
            Some(Target::Surface(_)) => surface_audit(config)?,
            _ => domain_audit(config)?,
        },
    };
    let mut summary = summary;
    let obj = summary.as_object_mut().expect("summaries are objects");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("task".into(), json!(config.task.name()));
    Ok(Report { task: config.task, summary, rows })
}

/// Runs the task and writes `summary.json` and `detail.csv` under `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let report = execute(config)?;
    write_report(&report, &config.out)?;
    Ok(report)
}

pub fn write_report(report: &Report, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let summary_path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&report.summary)?;
    text.push('\n');
    fs::write(&summary_path, text).map_err(|e| CliError::io(&summary_path, e))?;
    let detail_path = out.join("detail.csv");
    let mut w = csv::Writer::from_path(&detail_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(&detail_path, io),
        other => CliError::field("out", format!("{other:?}")),
    })?;
    w.write_record(csv_columns(report.task))?;
    for row in &report.rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::io(&detail_path, e))?;
    Ok(())
}

type Output = (Value, Vec<Vec<String>>);

fn constants(config: &ExperimentConfig) -> Result<Output> {
    let (lo, hi) = config.dims;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for n in lo..=hi {
        let c = Constants::new(n)?;
        rows.push(vec![n.to_string(), num(c.c_star), num(c.c_half), num(c.omega_n)]);
        entries.push(json!({ "n": n, "c_star": c.c_star, "c_half": c.c_half, "omega_n": c.omega_n }));
    }
    Ok((json!({ "rows": entries }), rows))
}

fn sphere_certificate(config: &ExperimentConfig) -> Result<Output> {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &q in &config.q {
        let cert = hemisphere_certificate(q)?;
        rows.push(vec![num(q), num(cert.quotient.value), num(cert.residual), cert.equals_c_star.to_string()]);
        results.push(json!({
            "q": q,
            "value": cert.quotient.value,
            "residual": cert.residual,
            "equals_c_star": cert.equals_c_star,
            "threshold": cert.quotient.threshold,
            "profile": { "center": [0.0, 0.0], "eps": PI / 2.0, "levels": [1.0, -1.0] },
        }));
    }
    Ok((json!({ "surface": SurfaceModel::RoundSphere { radius: 1.0 }, "results": results }), rows))
}

fn domain_certificate(config: &ExperimentConfig) -> Result<Output> {
    let (spec, domain) = domain_target(config)?;
    let solver = config.with_solver.then_some(&config.solver);
    let certs = config
        .q
        .par_iter()
        .map(|&q| achievability_certificate(&domain, q, solver))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for c in &certs {
        let w = &c.witness;
        rows.push(vec![
            num(c.q),
            num(w.center[0]),
            num(w.center[1]),
            num(w.eps),
            num(w.beta),
            num(c.exact.value),
            c.solver_value.map_or_else(String::new, num),
            num(c.threshold),
            num(c.gap),
            c.achieved.to_string(),
        ]);
        let best = c.solver_value.map_or(c.exact.value, |s| s.min(c.exact.value));
        results.push(json!({
            "q": c.q,
            "best_quotient": best,
            "exact_quotient": c.exact.value,
            "solver_value": c.solver_value,
            "threshold": c.threshold,
            "gap": c.gap,
            "achieved": c.achieved,
            "justification": if c.achieved { DOMAIN_JUSTIFICATION } else { "none" },
            "witness": w,
        }));
    }
    Ok((json!({ "domain": spec, "h": config.h, "results": results }), rows))
}

fn domain_sweep(config: &ExperimentConfig) -> Result<Output> {
    let (spec, domain) = domain_target(config)?;
    let seed = max_curvature_seed(&domain)?;
    let range = config.eps_range.unwrap_or_else(|| default_eps_range(&domain));
    let radii = log_space(range.0, range.1, config.eps_count);
    let threshold = half_space_constant::<f64>(2)?;
    let geometry = radii
        .par_iter()
        .map(|&e| Ok((cap_measure(&domain, seed.point, e)?, boundary_arc_inside(&domain, seed.point, e)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut optima = Vec::new();
    for &q in &config.q {
        for (&e, &(cap, arc)) in radii.iter().zip(&geometry) {
            let beta = TwoValuedProfile::on_domain(&domain, seed.point, e, q)?.beta;
            let qv = two_valued_quotient_exact(&domain, seed.point, e, q)?;
            rows.push(vec![num(q), num(e), num(cap), num(arc), num(beta), num(qv.value), num(threshold), num(threshold - qv.value)]);
        }
        let opt = optimal_epsilon(&domain, seed.point, q, range)?;
        let beta = TwoValuedProfile::on_domain(&domain, seed.point, opt.eps, q)?.beta;
        let achieved = opt.quotient.value < threshold;
        optima.push(json!({
            "q": q,
            "eps": opt.eps,
            "quotient": opt.quotient.value,
            "gap": threshold - opt.quotient.value,
            "achieved": achieved,
            "justification": if achieved { DOMAIN_JUSTIFICATION } else { "none" },
            "witness": { "center": seed.point, "eps": opt.eps, "q": q, "beta": beta, "value": opt.quotient.value },
        }));
    }
    let summary = json!({
        "domain": spec,
        "h": config.h,
        "center": seed.point,
        "curvature": seed.curvature,
        "eps_range": [range.0, range.1],
        "threshold": threshold,
        "optima": optima,
    });
    Ok((summary, rows))
}

fn solve(config: &ExperimentConfig) -> Result<Output> {
    let (spec, domain) = domain_target(config)?;
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for &q in &config.q {
        let est = minimize_quotient(&domain, q, &config.solver)?;
        for h in &est.history {
            rows.push(vec![num(q), h.iter.to_string(), num(h.quotient), num(h.residual), num(h.tv), num(h.norm)]);
        }
        estimates.push(json!({
            "q": q,
            "value": est.value,
            "seed_value": est.seed_value,
            "residual": est.residual,
            "restart": est.restart,
            "iterations": est.history.len() - 1,
            "threshold": est.threshold,
            "gap": est.gap,
        }));
    }
    let summary = json!({
        "domain": spec,
        "h": config.h,
        "solver": config.solver,
        "estimates": estimates,
    });
    Ok((summary, rows))
}

fn surface_classify(config: &ExperimentConfig) -> Result<Output> {
    let surface = surface_target(config)?;
    let (integral, target) = gauss_bonnet_check(surface)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &q in &config.q {
        let v = classify_achievability(surface, q, config.n)?;
        let (pu, pv, s, t) = v.witness.map_or((String::new(), String::new(), String::new(), String::new()), |w| {
            (num(w.point.u), num(w.point.v), num(w.scalar_curvature), num(w.threshold))
        });
        rows.push(vec![num(q), tag(&v.verdict), tag(&v.justification), pu, pv, s, t]);
        results.push(json!({
            "q": q,
            "achieved": v.verdict == Verdict::Achieved,
            "verdict": v,
        }));
    }
    let summary = json!({
        "surface": surface,
        "n": config.n,
        "area": surface.area(),
        "gauss_bonnet": { "integral": integral, "target": target },
        "results": results,
    });
    Ok((summary, rows))
}

/// Serialized name of a unit enum variant.
fn tag<T: serde::Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// One audited quantity: exact values against an expansion.
fn audit_rows(name: &str, eps: &[f64], exact: &[f64], expansion: &[f64], rows: &mut Vec<Vec<String>>) -> Value {
    let diffs: Vec<f64> = exact.iter().zip(expansion).map(|(a, b)| a - b).collect();
    for (k, &e) in eps.iter().enumerate() {
        rows.push(vec![name.to_string(), num(e), num(exact[k]), num(expansion[k]), num(diffs[k])]);
    }
    // no order is fitted to differences at rounding level
    let resolved = diffs.iter().zip(exact).all(|(d, x)| d.abs() > 1e-12 * x.abs());
    let order = resolved.then(|| fitted_order(eps, &diffs));
    json!({
        "quantity": name,
        "max_abs_difference": diffs.iter().fold(0.0f64, |m, d| m.max(d.abs())),
        "remainder_order": order,
    })
}

fn domain_audit(config: &ExperimentConfig) -> Result<Output> {
    let (spec, domain) = domain_target(config)?;
    let seed = max_curvature_seed(&domain)?;
    let eps = if config.eps.is_empty() { vec![0.05, 0.1, 0.2] } else { config.eps.clone() };
    let q = config.q[0];
    let hc = seed.curvature;
    let c_half = half_space_constant::<f64>(2)?;
    let exact_q = eps
        .par_iter()
        .map(|&e| Ok(two_valued_quotient_exact(&domain, seed.point, e, q)?.value))
        .collect::<Result<Vec<_>>>()?;
    let exact_cap = eps.par_iter().map(|&e| cap_measure(&domain, seed.point, e)).collect::<std::result::Result<Vec<_>, _>>()?;
    let exp_q = eps.iter().map(|&e| domain_quotient_expansion(hc, e, 2)).collect::<std::result::Result<Vec<_>, _>>()?;
    let exp_cap = eps.iter().map(|&e| cap_measure_expansion(hc, e, 2)).collect::<std::result::Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let quantities = vec![
        audit_rows("quotient", &eps, &exact_q, &exp_q, &mut rows),
        audit_rows("cap", &eps, &exact_cap, &exp_cap, &mut rows),
    ];
    let slopes: Vec<f64> = eps.iter().zip(&exact_q).map(|(e, v)| (v - c_half) / e).collect();
    let (coefficient, _) = linear_fit(&eps, &slopes);
    let summary = json!({
        "domain": spec,
        "h": config.h,
        "q": q,
        "center": seed.point,
        "curvature": hc,
        "first_order_coefficient": coefficient,
        "predicted_coefficient": -c_half * 2.0 * hc / (3.0 * PI),
        "quantities": quantities,
    });
    Ok((summary, rows))
}

fn surface_audit(config: &ExperimentConfig) -> Result<Output> {
    let surface = surface_target(config)?;
    let center = surface.max_curvature_point();
    let s = scalar_curvature(surface, center);
    let eps = if config.eps.is_empty() { log_space(0.05, 0.4, 8) } else { config.eps.clone() };
    let q = config.q[0];
    let area = surface.area();
    let results = eps
        .par_iter()
        .map(|&e| {
            Ok((
                geodesic_ball_area(surface, center, e)?,
                geodesic_circle_length(surface, center, e)?,
                surface_two_valued_quotient(surface, center, e, q)?.value,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gray = Vec::new();
    let mut circle = Vec::new();
    let mut quotient = Vec::new();
    for &e in &eps {
        gray.push(gray_expansion(s, e, 2)?);
        circle.push(geodesic_circle_expansion(s, e, 2)?);
        // at the critical exponent the complement level enters at second order
        quotient.push(if q == 1.0 { critical_quotient_expansion(s, area, e, 2)? } else { surface_quotient_expansion(s, e, 2)? });
    }
    let mut rows = Vec::new();
    let quantities = vec![
        audit_rows("ball_area", &eps, &results.iter().map(|r| r.0).collect::<Vec<_>>(), &gray, &mut rows),
        audit_rows("circle_length", &eps, &results.iter().map(|r| r.1).collect::<Vec<_>>(), &circle, &mut rows),
        audit_rows("quotient", &eps, &results.iter().map(|r| r.2).collect::<Vec<_>>(), &quotient, &mut rows),
    ];
    let summary = json!({
        "surface": surface,
        "q": q,
        "center": center,
        "scalar_curvature": s,
        "quantities": quantities,
    });
    Ok((summary, rows))
}
