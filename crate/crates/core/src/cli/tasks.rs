//! The four tasks. Each returns checks, a JSON summary and tables.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::catalog::SymmetricSpace;
use crate::complexcheck::{
    convergence_study_on, levy_form_fd, ma_ratio, InvariantFunctionSpec, RICCI_STEP,
};
use crate::radialops::oracle::oracle_ma;
use crate::radialops::testfns::{random_chamber_points, OrbitPolynomial};
use crate::radialops::{
    factor_f, min_normalized_eigenvalue, symmetric_ma, ExprFunction, MetricProfile, RadialFunction,
};
use crate::solver::{
    prescribe_ricci, solve_newton, solve_rank1_ode, Boundary, ChamberGrid, RicciOptions, SolutionReport,
    SolverError,
};

use super::config::RunConfig;
use super::report::{coord_header, num, opt, Check, Table};
use super::CliError;

pub(super) struct TaskOutput {
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    pub tables: Vec<Table>,
}

fn rng_for(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn header(lead: &[&str], rank: usize, tail: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    h.extend(coord_header(rank));
    h.extend(tail.iter().map(|s| s.to_string()));
    h
}

fn table(name: &str, header: Vec<String>) -> Table {
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    Table::new(name, &refs)
}

fn row(lead: &[String], r: &[f64], tail: &[String]) -> Vec<String> {
    let mut v = lead.to_vec();
    v.extend(r.iter().map(|x| num(*x)));
    v.extend_from_slice(tail);
    v
}

pub(super) fn verify_reduction(cfg: &RunConfig, space: &SymmetricSpace) -> Result<TaskOutput, CliError> {
    let profile = cfg.profile.build()?;
    let tol = &cfg.tolerances;
    let smp = &cfg.sampling;
    let mut rng = rng_for(cfg);
    let m = space.rank();

    let mut fact = table(
        "factorization",
        header(&["function"], m, &["symmetric_ma", "oracle_ma", "rel_deviation"]),
    );
    let mut worst: f64 = 0.0;
    for k in 0..smp.functions {
        let u = OrbitPolynomial::random(space, &mut rng, 3.0);
        for r in random_chamber_points(space, &mut rng, smp.points, 0.2, 1.0, 0.05) {
            let want = oracle_ma(space, &profile, &u, &r)?;
            let got = symmetric_ma(space, &profile, &u, &r);
            let dev = (got - want).abs() / (1.0 + want.abs());
            worst = worst.max(dev);
            fact.push(row(&[k.to_string()], &r, &[num(got), num(want), num(dev)]));
        }
    }

    let mut flat_worst: f64 = 0.0;
    for r in random_chamber_points(space, &mut rng, smp.flat_points, 0.0, 3.0, 0.0) {
        flat_worst = flat_worst.max((factor_f(space, &MetricProfile::Flat, &r) - 1.0).abs());
    }

    // flat against the configured curved profile
    let curved = if profile.is_flat() {
        MetricProfile::Hyperbolic
    } else {
        profile.clone()
    };
    let mut conv = table(
        "convexity",
        header(&["sample"], m, &["flat_min_eigenvalue", "curved_min_eigenvalue", "agree"]),
    );
    let (mut disagree, mut convex) = (0usize, 0usize);
    for k in 0..smp.convexity_samples {
        let shift = rng.random_range(-1.0..3.0);
        let u = OrbitPolynomial::random(space, &mut rng, shift);
        let r = random_chamber_points(space, &mut rng, 1, 0.05, 1.5, 0.0).remove(0);
        let flat = min_normalized_eigenvalue(space, &MetricProfile::Flat, &u, &r);
        let bent = min_normalized_eigenvalue(space, &curved, &u, &r);
        let agree = (flat > 0.0) == (bent > 0.0) || flat.abs().min(bent.abs()) <= tol.convexity_margin;
        disagree += usize::from(!agree);
        convex += usize::from(flat > 0.0);
        conv.push(row(&[k.to_string()], &r, &[num(flat), num(bent), agree.to_string()]));
    }

    let checks = vec![
        Check::below("factorization_deviation", worst, tol.reduction),
        Check::below("flat_factor_deviation", flat_worst, tol.flat_factor),
        Check::none("convexity_disagreements", disagree),
    ];
    let summary = json!({
        "space": space.name(),
        "profile": profile.name(),
        "curved_profile": curved.name(),
        "rank": m,
        "p_dim": space.p_dim(),
        "functions": smp.functions,
        "points_per_function": smp.points,
        "max_factorization_deviation": worst,
        "flat_points": smp.flat_points,
        "max_flat_factor_deviation": flat_worst,
        "convexity_samples": smp.convexity_samples,
        "convex_samples": convex,
        "convexity_disagreements": disagree,
    });
    Ok(TaskOutput {
        checks,
        summary,
        tables: vec![fact, conv],
    })
}

/// Chart coordinates for the Levy checks: all of them up to three, else the
/// `a`-aligned ones plus three random others.
fn chart_coords(space: &SymmetricSpace, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = space.p_dim();
    if n <= 3 {
        return (0..n).collect();
    }
    let m = space.rank();
    let extra = (n - m).min(3);
    let mut coords: Vec<usize> = (0..m).collect();
    let mut picked: Vec<usize> = sample(rng, n - m, extra).into_iter().map(|k| k + m).collect();
    picked.sort_unstable();
    coords.extend(picked);
    coords
}

fn frame_point(space: &SymmetricSpace, r: &[f64]) -> Vec<f64> {
    space.frame_coords(&space.a_element(r))
}

pub(super) fn verify_levy(cfg: &RunConfig, space: &SymmetricSpace) -> Result<TaskOutput, CliError> {
    let tol = &cfg.tolerances;
    let smp = &cfg.sampling;
    let mut rng = rng_for(cfg);
    let m = space.rank();
    let coords = chart_coords(space, &mut rng);
    let points = random_chamber_points(space, &mut rng, smp.levy_points, 0.2, 1.0, 0.05);

    let mut ident = table(
        "levy_identity",
        header(&["function", "point"], m, &["deviation", "min_order"]),
    );
    let mut trend = Table::new("levy_convergence", &["function", "point", "step", "error", "order"]);
    let (mut worst, mut min_order) = (0.0f64, f64::INFINITY);
    for k in 0..smp.levy_functions {
        let u = OrbitPolynomial::random(space, &mut rng, 2.0);
        let w = InvariantFunctionSpec::new(space, Arc::new(u));
        for (j, r) in points.iter().enumerate() {
            let p = frame_point(space, r);
            let study = convergence_study_on(&w, &p, &coords, smp.levy_coarse_step, smp.levy_levels)?;
            worst = worst.max(study.deviation);
            min_order = min_order.min(study.min_order());
            ident.push(row(
                &[k.to_string(), j.to_string()],
                r,
                &[num(study.deviation), num(study.min_order())],
            ));
            for (i, (h, e)) in study.steps.iter().zip(&study.errors).enumerate() {
                let order = if i == 0 { None } else { Some(study.orders[i - 1]) };
                trend.push(vec![k.to_string(), j.to_string(), num(*h), num(*e), opt(order)]);
            }
        }
    }

    // det Lw / M_g(w) across strictly convex functions at each point
    let mut ratios = table("ma_ratio", header(&["point", "function"], m, &["ratio"]));
    let mut spread: f64 = 0.0;
    let mut means = Vec::new();
    for (j, r) in points.iter().enumerate() {
        let p = frame_point(space, r);
        let mut vals = Vec::new();
        let mut attempts = 0;
        while vals.len() < smp.levy_functions.max(2) {
            attempts += 1;
            if attempts > 1000 {
                return Err(CliError::Task(format!(
                    "no strictly convex test function found at {r:?} after 1000 draws"
                )));
            }
            let u = OrbitPolynomial::random(space, &mut rng, 3.0);
            if min_normalized_eigenvalue(space, &MetricProfile::Hyperbolic, &u, r) <= 0.1 {
                continue;
            }
            let ratio = ma_ratio(&InvariantFunctionSpec::new(space, Arc::new(u)), &p)?;
            ratios.push(row(&[j.to_string(), vals.len().to_string()], r, &[num(ratio)]));
            vals.push(ratio);
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let sd = (vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        spread = spread.max(sd / mean);
        means.push(mean);
    }

    // positive definiteness of Lw against strict g-convexity of the profile
    let mut psh = table(
        "plurisubharmonic",
        header(&["sample"], m, &["levy_min_eigenvalue", "metric_min_eigenvalue", "agree"]),
    );
    let (mut disagree, mut convex) = (0usize, 0usize);
    for k in 0..smp.levy_functions * smp.levy_points {
        let shift = rng.random_range(-1.0..3.0);
        let u = OrbitPolynomial::random(space, &mut rng, shift);
        let r = random_chamber_points(space, &mut rng, 1, 0.2, 1.0, 0.05).remove(0);
        let g = min_normalized_eigenvalue(space, &MetricProfile::Hyperbolic, &u, &r);
        let w = InvariantFunctionSpec::new(space, Arc::new(u));
        let l = levy_form_fd(&w, &frame_point(space, &r), crate::complexcheck::CHART_STEP)?.min_eigenvalue();
        let agree = (l > 0.0) == (g > 0.0) || l.abs().min(g.abs()) <= tol.convexity_margin;
        disagree += usize::from(!agree);
        convex += usize::from(g > 0.0);
        psh.push(row(&[k.to_string()], &r, &[num(l), num(g), agree.to_string()]));
    }

    let checks = vec![
        Check::below("levy_identity_deviation", worst, tol.levy),
        Check::at_least("levy_convergence_order", min_order, tol.levy_order),
        Check::below("ma_ratio_spread", spread, tol.ratio_spread),
        Check::none("plurisubharmonic_disagreements", disagree),
    ];
    let summary = json!({
        "space": space.name(),
        "p_dim": space.p_dim(),
        "chart_coords": coords,
        "functions": smp.levy_functions,
        "points": smp.levy_points,
        "max_identity_deviation": worst,
        "min_convergence_order": min_order,
        "ma_ratio_means": means,
        "ma_ratio_reference": 4f64.powi(-(space.p_dim() as i32)),
        "max_ma_ratio_spread": spread,
        "plurisubharmonic_samples": smp.levy_functions * smp.levy_points,
        "convex_samples": convex,
        "plurisubharmonic_disagreements": disagree,
    });
    Ok(TaskOutput {
        checks,
        summary,
        tables: vec![ident, trend, ratios, psh],
    })
}

/// A finished solve, or the last iterate of one that stopped early.
fn unpack(res: Result<SolutionReport, SolverError>) -> Result<SolutionReport, CliError> {
    match res {
        Ok(r) => Ok(r),
        Err(SolverError::MaxIter(r)) | Err(SolverError::Starvation(r)) => {
            log::warn!("solver stopped early: residual {:.3e}", r.residual);
            Ok(*r)
        }
        Err(e) => Err(e.into()),
    }
}

fn node_table(report: &SolutionReport, rank: usize) -> Table {
    let mut t = table(
        "nodes",
        header(&[], rank, &["u", "dirichlet", "residual", "min_eigenvalue"]),
    );
    for n in &report.nodes {
        t.push(row(
            &[],
            &n.coords,
            &[num(n.u), n.dirichlet.to_string(), opt(n.residual), opt(n.min_eigenvalue)],
        ));
    }
    t
}

fn solver_checks(cfg: &RunConfig, report: &SolutionReport, reflection: f64) -> Vec<Check> {
    let increases = report.residual_history.windows(2).filter(|w| w[1] > w[0]).count();
    vec![
        Check::below("newton_residual", report.residual, cfg.solver.newton_tol),
        Check::at_least("min_hessian_eigenvalue", report.min_eigenvalue, cfg.solver.convexity_floor),
        Check::holds("convexity_certificate", report.certified),
        Check::none("residual_increases", increases),
        Check::below("reflection_residual", reflection, cfg.tolerances.reflection),
    ]
}

fn solve_summary(report: &SolutionReport, grid: &ChamberGrid, reflection: f64) -> serde_json::Value {
    json!({
        "space": report.space,
        "profile": report.profile,
        "density": report.density,
        "radius": report.radius,
        "spacing": report.spacing,
        "nodes": grid.len(),
        "interior_nodes": grid.interior_count(),
        "normalization": report.boundary,
        "converged": report.converged,
        "certified": report.certified,
        "iterations": report.iterations,
        "residual": report.residual,
        "residual_history": report.residual_history,
        "min_eigenvalue": report.min_eigenvalue,
        "convexity_floor": report.convexity_floor,
        "reflection_residual": reflection,
    })
}

pub(super) fn solve(cfg: &RunConfig, space: &SymmetricSpace) -> Result<TaskOutput, CliError> {
    let profile = cfg.profile.build()?;
    let src = cfg.density.as_deref().expect("validated");
    let f: Arc<dyn RadialFunction> = Arc::new(ExprFunction::parse(space, src)?);
    let grid = ChamberGrid::new(space, cfg.grid.radius, cfg.grid.nodes).map_err(SolverError::from)?;
    let report = unpack(solve_newton(space, &profile, &f, &grid, &cfg.solver, &Boundary::Seed))?;
    let reflection = grid.reflection_residual(space, &report.values());
    let mut checks = solver_checks(cfg, &report, reflection);
    let mut summary = solve_summary(&report, &grid, reflection);
    if space.rank() == 1 {
        // the quadrature solution with the grid's boundary value
        let edge = report
            .nodes
            .iter()
            .filter(|n| n.dirichlet)
            .max_by(|a, b| a.coords[0].abs().total_cmp(&b.coords[0].abs()))
            .expect("rank-one grids end in a Dirichlet node");
        let ode = solve_rank1_ode(space, &profile, f.clone(), edge.coords[0].abs(), edge.u)?;
        let dist = report
            .nodes
            .iter()
            .map(|n| (n.u - ode.value(&n.coords)).abs())
            .fold(0.0, f64::max);
        checks.push(Check::below("ode_agreement", dist, cfg.tolerances.ode_agreement));
        summary["ode_sup_distance"] = json!(dist);
    }
    Ok(TaskOutput {
        checks,
        summary,
        tables: vec![node_table(&report, space.rank())],
    })
}

pub(super) fn prescribe(cfg: &RunConfig, space: &SymmetricSpace) -> Result<TaskOutput, CliError> {
    let src = cfg.h.as_deref().expect("validated");
    let h: Arc<dyn RadialFunction> = Arc::new(ExprFunction::parse(space, src)?);
    let grid = ChamberGrid::new(space, cfg.grid.radius, cfg.grid.nodes).map_err(SolverError::from)?;
    let options = RicciOptions {
        density: cfg.ricci.density,
        fit_degree: cfg.ricci.fit_degree,
        step: RICCI_STEP,
    };
    let (report, fit) = match prescribe_ricci(space, h, &grid, &cfg.solver, &options) {
        Ok((r, fit)) => (r, Some(fit)),
        Err(e) => (unpack(Err(e))?, None),
    };
    let reflection = grid.reflection_residual(space, &report.values());
    let mut checks = solver_checks(cfg, &report, reflection);
    let worst = report.ricci.iter().map(|s| s.residual).fold(f64::NAN, f64::max);
    checks.push(Check::below("ricci_residual", if report.ricci.is_empty() { f64::INFINITY } else { worst }, cfg.tolerances.ricci));
    let mut samples = table("ricci", header(&["sample"], space.rank(), &["residual"]));
    for (k, s) in report.ricci.iter().enumerate() {
        samples.push(row(&[k.to_string()], &s.r, &[num(s.residual)]));
    }
    let mut summary = solve_summary(&report, &grid, reflection);
    summary["h"] = json!(src);
    summary["ricci_density"] = json!(cfg.ricci.density);
    summary["ricci_samples"] = json!(report.ricci);
    summary["fit_terms"] = json!(fit.as_ref().map(|f| f.terms()));
    summary["fit_rms_residual"] = json!(fit.as_ref().map(|f| f.rms_residual()));
    Ok(TaskOutput {
        checks,
        summary,
        tables: vec![node_table(&report, space.rank()), samples],
    })
}
