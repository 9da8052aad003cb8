//! The library end to end through its public API: reduce, solve, cross-check.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symma::catalog::build_space;
use symma::radialops::oracle::oracle_ma;
use symma::radialops::testfns::random_chamber_points;
use symma::radialops::{symmetric_ma, ExprFunction, MetricProfile, RadialFunction};
use symma::solver::{solve_newton, solve_rank1_ode, Boundary, ChamberGrid, SolverConfig};

#[test]
fn reduced_operator_matches_geodesic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["S2", "S2-dual", "SU(3)/SO(3)", "S3"] {
        let space = build_space(name).unwrap();
        let u = ExprFunction::parse(&space, "exp(0.3*r2) + 0.05*r2*r2").unwrap();
        for profile in [MetricProfile::Flat, MetricProfile::Hyperbolic] {
            for r in random_chamber_points(&space, &mut rng, 4, 0.2, 1.2, 0.05) {
                let fast = symmetric_ma(&space, &profile, &u, &r);
                let slow = oracle_ma(&space, &profile, &u, &r).unwrap();
                let dev = (fast - slow).abs() / (1.0 + slow.abs());
                assert!(dev < 1e-6, "{name} {} at {r:?}: {fast} vs {slow}", profile.name());
            }
        }
    }
}

#[test]
fn quadrature_solution_solves_the_reduced_equation() {
    let space = build_space("S2").unwrap();
    let profile = MetricProfile::Hyperbolic;
    let f: Arc<dyn RadialFunction> = Arc::new(ExprFunction::parse(&space, "exp(r2)").unwrap());
    let ode = solve_rank1_ode(&space, &profile, f.clone(), 1.0, 0.5).unwrap();
    for x in [0.1, 0.35, 0.6, 0.85] {
        let r = [x];
        let lhs = symmetric_ma(&space, &profile, &ode, &r);
        let rhs = f.value(&r);
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "at {x}: {lhs} vs {rhs}");
    }
}

#[test]
fn grid_solution_converges_to_quadrature_solution() {
    let space = build_space("S2").unwrap();
    let profile = MetricProfile::Hyperbolic;
    let f: Arc<dyn RadialFunction> = Arc::new(ExprFunction::parse(&space, "exp(r2) * (1 + 0.2*r2)").unwrap());
    let ode: Arc<dyn RadialFunction> = Arc::new(solve_rank1_ode(&space, &profile, f.clone(), 1.0, 0.7).unwrap());
    let boundary = Boundary::Function {
        values: ode.clone(),
        initial: None,
    };
    let mut errors = Vec::new();
    for nodes in [33, 65, 129] {
        let grid = ChamberGrid::new(&space, 1.0, nodes).unwrap();
        let report = solve_newton(&space, &profile, f.as_ref(), &grid, &SolverConfig::default(), &boundary).unwrap();
        assert!(report.converged && report.certified);
        let err = report
            .nodes
            .iter()
            .map(|n| (n.u - ode.value(&n.coords)).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "errors {errors:?}");
    }
}
