//! The optimiser against exhaustive grid search.

use uplink_core::optimize::{optimize, FreeParam, OptimizeSpec};
use uplink_core::sweep::ParamPath;
use uplink_core::{evaluate_scenario, ScenarioParams};

fn grid_best(spec: &OptimizeSpec, axes: &[Vec<f64>]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; axes.len()];
    loop {
        let point: Vec<f64> = idx.iter().zip(axes).map(|(&i, a)| a[i]).collect();
        if let Ok(m) = evaluate_scenario(&spec.scenario_at(&point)) {
            best = best.max(spec.score(&m));
        }
        let mut k = axes.len();
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn window_search_matches_fine_grid() {
    let spec = OptimizeSpec::new(
        ScenarioParams::default(),
        vec![FreeParam {
            param: ParamPath::GatingWindowS,
            lower: 5e-9,
            upper: 100e-9,
        }],
    );
    let out = optimize(&spec, 3).unwrap();
    let grid = grid_best(&spec, &[linspace(5e-9, 100e-9, 4001)]);
    assert!(out.converged);
    assert!(
        out.best_score >= grid - 1e-6,
        "optimiser {} grid {grid}",
        out.best_score
    );
    assert!(out.best_metrics.eta_tot >= spec.eta_floor);
}

#[test]
fn two_parameter_search_matches_grid() {
    let mut spec = OptimizeSpec::new(
        ScenarioParams::default(),
        vec![
            FreeParam {
                param: ParamPath::GatingWindowS,
                lower: 5e-9,
                upper: 100e-9,
            },
            FreeParam {
                param: ParamPath::AltitudeM,
                lower: 200e3,
                upper: 1500e3,
            },
        ],
    );
    spec.max_evaluations = 800;
    let out = optimize(&spec, 11).unwrap();
    let grid = grid_best(
        &spec,
        &[linspace(5e-9, 100e-9, 96), linspace(200e3, 1500e3, 131)],
    );
    assert!(
        out.best_score >= grid - 1e-3,
        "optimiser {} grid {grid}",
        out.best_score
    );
}

#[test]
fn trace_holds_every_evaluation_in_the_box() {
    let mut spec = OptimizeSpec::new(
        ScenarioParams::default(),
        vec![FreeParam {
            param: ParamPath::AltitudeM,
            lower: 300e3,
            upper: 900e3,
        }],
    );
    spec.max_evaluations = 60;
    let out = optimize(&spec, 0).unwrap();
    assert_eq!(out.trace.len(), out.evaluations);
    assert!(out.evaluations <= spec.max_evaluations);
    assert!(out
        .trace
        .iter()
        .all(|t| (300e3..=900e3).contains(&t.point[0])));
}
