//! Derivative-free search for the best-performing configuration.
//!
//! Bounded Nelder-Mead in box-normalised coordinates (each free parameter
//! mapped to `[0, 1]`, trial points projected back into the box), restarted
//! from the box centre and from seeded random points. The result is the best
//! point seen, with no claim of global optimality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{evaluate_scenario, ProtocolMetrics, ScenarioParams};
use crate::sweep::ParamPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximise F while keeping the success probability above the floor.
    #[default]
    MaxFidelitySubjectToEtaFloor,
    /// Maximise `w ln F + (1 - w) ln eta_tot`.
    WeightedLogProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParam {
    pub param: ParamPath,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub baseline: ScenarioParams,
    pub free: Vec<FreeParam>,
    pub objective: Objective,
    pub eta_floor: f64,
    pub fidelity_weight: f64,
    pub max_evaluations: usize,
    /// Convergence tolerance on both objective spread and simplex size
    /// (in box-normalised units).
    pub tolerance: f64,
    pub restarts: usize,
}

impl OptimizeSpec {
    pub fn new(baseline: ScenarioParams, free: Vec<FreeParam>) -> Self {
        OptimizeSpec {
            baseline,
            free,
            objective: Objective::default(),
            eta_floor: 1e-6,
            fidelity_weight: 0.5,
            max_evaluations: 400,
            tolerance: 1e-6,
            restarts: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::InvalidSpec("no free parameters".into()));
        }
        for (i, f) in self.free.iter().enumerate() {
            if !f.lower.is_finite() || !f.upper.is_finite() || f.lower > f.upper {
                return Err(Error::InvalidSpec(format!(
                    "bounds of {} must be finite and ordered, got [{}, {}]",
                    f.param, f.lower, f.upper
                )));
            }
            if self.free[..i].iter().any(|g| g.param == f.param) {
                return Err(Error::InvalidSpec(format!("{} is free twice", f.param)));
            }
        }
        if !(0.0..=1.0).contains(&self.eta_floor) {
            return Err(Error::InvalidSpec(format!(
                "eta_floor must lie in [0, 1], got {}",
                self.eta_floor
            )));
        }
        if !(0.0..=1.0).contains(&self.fidelity_weight) {
            return Err(Error::InvalidSpec(format!(
                "fidelity_weight must lie in [0, 1], got {}",
                self.fidelity_weight
            )));
        }
        if self.max_evaluations == 0 || self.restarts == 0 {
            return Err(Error::InvalidSpec(
                "max_evaluations and restarts must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidSpec("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn scenario_at(&self, point: &[f64]) -> ScenarioParams {
        let mut p = self.baseline;
        for (f, &v) in self.free.iter().zip(point) {
            f.param.set(&mut p, v);
        }
        p
    }

    /// Objective value of a successful evaluation; larger is better.
    pub fn score(&self, m: &ProtocolMetrics) -> f64 {
        match self.objective {
            Objective::MaxFidelitySubjectToEtaFloor => {
                if m.eta_tot >= self.eta_floor {
                    m.fidelity
                } else if m.eta_tot > 0.0 {
                    // Below every feasible fidelity (>= 1/4) and rising
                    // towards the floor.
                    -(self.eta_floor / m.eta_tot).ln()
                } else {
                    -1e6
                }
            }
            Objective::WeightedLogProduct => {
                let w = self.fidelity_weight;
                w * m.fidelity.ln() + (1.0 - w) * m.eta_tot.ln()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub restart: usize,
    pub point: Vec<f64>,
    pub score: f64,
    pub outcome: std::result::Result<ProtocolMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub best_point: Vec<f64>,
    pub best_params: ScenarioParams,
    pub best_metrics: ProtocolMetrics,
    pub best_score: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

struct Search<'a> {
    spec: &'a OptimizeSpec,
    restart: usize,
    /// Indices of parameters with a non-degenerate range.
    active: Vec<usize>,
    trace: Vec<TraceEntry>,
}

impl Search<'_> {
    fn to_point(&self, unit: &[f64]) -> Vec<f64> {
        let mut point: Vec<f64> = self.spec.free.iter().map(|f| f.lower).collect();
        for (&i, &u) in self.active.iter().zip(unit) {
            let f = &self.spec.free[i];
            point[i] = f.lower + u.clamp(0.0, 1.0) * (f.upper - f.lower);
        }
        point
    }

    /// Cost (negated score) at a box-normalised point, recorded in the trace.
    fn cost(&mut self, unit: &[f64]) -> f64 {
        let point = self.to_point(unit);
        let outcome = evaluate_scenario(&self.spec.scenario_at(&point)).map_err(|e| e.to_string());
        let score = match &outcome {
            Ok(m) => self.spec.score(m),
            Err(_) => f64::NEG_INFINITY,
        };
        self.trace.push(TraceEntry {
            restart: self.restart,
            point,
            score,
            outcome,
        });
        -score
    }
}

/// Minimises `cost` over the unit cube starting at `start`. Returns whether
/// the tolerance was reached within `budget` evaluations.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut cost: F,
    start: &[f64],
    budget: usize,
    tol: f64,
) -> bool {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    const STEP: f64 = 0.25;

    let n = start.len();
    let project = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect() };
    let mut evals = 0usize;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut eval = |x: Vec<f64>, evals: &mut usize| -> (Vec<f64>, f64) {
        *evals += 1;
        let c = cost(&x);
        (x, c)
    };

    simplex.push(eval(start.to_vec(), &mut evals));
    for i in 0..n {
        if evals >= budget {
            return false;
        }
        let mut v = start.to_vec();
        v[i] = if v[i] + STEP <= 1.0 {
            v[i] + STEP
        } else {
            v[i] - STEP
        };
        simplex.push(eval(v, &mut evals));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let spread = simplex[n].1 - best.1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&best.0)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        let flat = spread.abs() <= tol || (simplex[n].1 == best.1);
        if flat && size <= tol {
            return true;
        }
        if evals >= budget {
            return false;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            project(
                centroid
                    .iter()
                    .zip(worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect(),
            )
        };
        let worst = simplex[n].0.clone();
        let worst_cost = simplex[n].1;
        let second_cost = simplex[n - 1].1;
        let best_cost = simplex[0].1;

        let reflected = eval(along(REFLECT, &worst), &mut evals);
        if reflected.1 < best_cost {
            if evals >= budget {
                simplex[n] = reflected;
                continue;
            }
            let expanded = eval(along(EXPAND, &worst), &mut evals);
            simplex[n] = if expanded.1 < reflected.1 {
                expanded
            } else {
                reflected
            };
            continue;
        }
        if reflected.1 < second_cost {
            simplex[n] = reflected;
            continue;
        }
        if evals >= budget {
            return false;
        }
        let contracted = if reflected.1 < worst_cost {
            eval(along(CONTRACT * REFLECT, &worst), &mut evals)
        } else {
            eval(along(-CONTRACT, &worst), &mut evals)
        };
        if contracted.1 < worst_cost.min(reflected.1) {
            simplex[n] = contracted;
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = simplex[0].0.clone();
        for vertex in simplex[1..].iter_mut() {
            if evals >= budget {
                return false;
            }
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(a, b)| a + SHRINK * (b - a))
                .collect();
            *vertex = eval(x, &mut evals);
        }
    }
}

/// Searches the box described by `spec`. Restart starting points are the box
/// centre followed by points drawn from `seed`.
pub fn optimize(spec: &OptimizeSpec, seed: u64) -> Result<OptimizeOutcome> {
    spec.validate()?;
    let active: Vec<usize> = spec
        .free
        .iter()
        .enumerate()
        .filter(|(_, f)| f.upper > f.lower)
        .map(|(i, _)| i)
        .collect();

    let restarts = if active.is_empty() { 1 } else { spec.restarts };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|r| {
            if r == 0 {
                vec![0.5; active.len()]
            } else {
                (0..active.len()).map(|_| rng.gen::<f64>()).collect()
            }
        })
        .collect();
    let budget = (spec.max_evaluations / restarts).max(1);

    let runs: Vec<(bool, Vec<TraceEntry>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(restart, start)| {
            let mut search = Search {
                spec,
                restart,
                active: active.clone(),
                trace: Vec::new(),
            };
            let converged = if search.active.is_empty() {
                search.cost(&[]);
                true
            } else {
                nelder_mead(|u| search.cost(u), &start, budget, spec.tolerance)
            };
            (converged, search.trace)
        })
        .collect();

    let mut trace = Vec::new();
    let mut converged_runs = Vec::new();
    for (converged, t) in runs {
        converged_runs.push(converged);
        trace.extend(t);
    }

    let best = trace
        .iter()
        .filter(|t| t.outcome.is_ok())
        .fold(None::<&TraceEntry>, |acc, t| match acc {
            Some(b) if b.score >= t.score => Some(b),
            _ => Some(t),
        })
        .ok_or_else(|| {
            let first = trace
                .first()
                .and_then(|t| t.outcome.clone().err())
                .unwrap_or_default();
            Error::InvalidSpec(format!("no evaluation in the box succeeded: {first}"))
        })?;

    Ok(OptimizeOutcome {
        best_point: best.point.clone(),
        best_params: spec.scenario_at(&best.point),
        best_metrics: best.outcome.clone().expect("filtered on success"),
        best_score: best.score,
        converged: converged_runs[best.restart],
        evaluations: trace.len(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let mut calls = 0;
        let ok = nelder_mead(
            |x| {
                calls += 1;
                (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.7).powi(2)
            },
            &[0.5, 0.5],
            500,
            1e-8,
        );
        assert!(ok);
        assert!(calls <= 500);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let mut seen = Vec::new();
        nelder_mead(
            |x| {
                seen.push(x.to_vec());
                -x[0] - x[1]
            },
            &[0.5, 0.5],
            200,
            1e-9,
        );
        assert!(seen.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn single_point_box() {
        let spec = OptimizeSpec::new(
            ScenarioParams::default(),
            vec![FreeParam {
                param: ParamPath::GatingWindowS,
                lower: 30e-9,
                upper: 30e-9,
            }],
        );
        let out = optimize(&spec, 0).unwrap();
        assert_eq!(out.best_point, vec![30e-9]);
        assert_eq!(out.evaluations, 1);
        assert!(out.converged);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
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
                    upper: 1000e3,
                },
            ],
        );
        spec.max_evaluations = 8;
        spec.restarts = 2;
        let out = optimize(&spec, 3).unwrap();
        assert!(!out.converged);
        assert_eq!(out.evaluations, out.trace.len());
        assert!(out.evaluations <= 8);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = ScenarioParams::default();
        assert!(OptimizeSpec::new(base, vec![]).validate().is_err());
        let inverted = OptimizeSpec::new(
            base,
            vec![FreeParam {
                param: ParamPath::AltitudeM,
                lower: 2.0,
                upper: 1.0,
            }],
        );
        assert!(inverted.validate().is_err());
        let mut floor = OptimizeSpec::new(
            base,
            vec![FreeParam {
                param: ParamPath::AltitudeM,
                lower: 1.0,
                upper: 2.0,
            }],
        );
        floor.eta_floor = 1.5;
        assert!(floor.validate().is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut spec = OptimizeSpec::new(
            ScenarioParams::default(),
            vec![FreeParam {
                param: ParamPath::GatingWindowS,
                lower: 5e-9,
                upper: 80e-9,
            }],
        );
        spec.max_evaluations = 60;
        assert_eq!(optimize(&spec, 11).unwrap(), optimize(&spec, 11).unwrap());
    }
}
