//! Click statistics of the Bell-measurement apparatus: ground-photon and
//! background pattern distributions, success signatures, total efficiency,
//! legitimate-coincidence fraction and final fidelity.
//!
//! A detector fires when a ground photon or a background count (or both)
//! reaches it, so observed patterns are the bitwise union of the two sources.
//! Detectors are threshold devices: any number of counts is a single click.

use crate::error::{require_probability, Error, Result};
use crate::pattern::{ClickPattern, DetectorPatternDistribution};

/// Relative tolerance for the four success signatures to count as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Where a detected ground photon ends up.
pub trait RoutingModel: Send + Sync {
    /// Probability of each detector for photon `photon` (0 or 1), given
    /// that the photon is detected. Sums to one.
    fn detector_probabilities(&self, photon: usize) -> [f64; 4];
}

/// PBS and 45-degree element acting on an unpolarised marginal: every
/// detector equally likely.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UniformRouting;

impl RoutingModel for UniformRouting {
    fn detector_probabilities(&self, _: usize) -> [f64; 4] {
        [0.25; 4]
    }
}

/// Fixed per-photon detector weights, for asymmetric apparatus studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRouting(pub [[f64; 4]; 2]);

impl RoutingModel for WeightedRouting {
    fn detector_probabilities(&self, photon: usize) -> [f64; 4] {
        self.0[photon]
    }
}

/// Outcome distribution of a single photon: index 0..4 is a detector, 4 is lost.
fn photon_outcomes(eta: f64, route: [f64; 4]) -> [f64; 5] {
    [
        eta * route[0],
        eta * route[1],
        eta * route[2],
        eta * route[3],
        1.0 - eta,
    ]
}

fn outcome_pattern(outcome: usize) -> ClickPattern {
    if outcome < 4 {
        ClickPattern::single(outcome)
    } else {
        ClickPattern::NONE
    }
}

/// Pattern distribution caused by the two ground photons, each detected
/// with probability `eta[i]`, by enumerating the 5 x 5 joint outcomes.
pub fn ground_pattern_distribution(
    eta: [f64; 2],
    routing: &dyn RoutingModel,
) -> Result<DetectorPatternDistribution> {
    require_probability("eta_1", eta[0])?;
    require_probability("eta_2", eta[1])?;
    let first = photon_outcomes(eta[0], routing.detector_probabilities(0));
    let second = photon_outcomes(eta[1], routing.detector_probabilities(1));
    let mut probs = [0.0; 16];
    for (a, pa) in first.iter().enumerate() {
        for (b, pb) in second.iter().enumerate() {
            let d = outcome_pattern(a).union(outcome_pattern(b));
            probs[d.index()] += pa * pb;
        }
    }
    DetectorPatternDistribution::new(probs)
}

fn require_signature(m: ClickPattern) -> Result<()> {
    if m.is_signature() {
        Ok(())
    } else {
        Err(Error::UnacceptedSignature(m.to_string()))
    }
}

/// Probability of observing signature `m`: every ground pattern `g` and
/// background pattern `b` with `g | b == m` contributes `P_G(g) P_D(b)`.
/// Only subsets of `m` can contribute, so the sum runs over 4 x 4 pairs.
pub fn signature_prob(
    m: ClickPattern,
    ground: &DetectorPatternDistribution,
    background: &DetectorPatternDistribution,
) -> Result<f64> {
    require_signature(m)?;
    let subsets: Vec<ClickPattern> = ClickPattern::all().filter(|d| d.is_subset_of(m)).collect();
    let mut total = 0.0;
    for &g in &subsets {
        for &b in &subsets {
            if g.union(b) == m {
                total += ground.prob(g) * background.prob(b);
            }
        }
    }
    Ok(total)
}

/// Probabilities of the four accepted signatures, in `ClickPattern::SIGNATURES` order.
pub fn all_signature_probs(
    ground: &DetectorPatternDistribution,
    background: &DetectorPatternDistribution,
) -> [f64; 4] {
    ClickPattern::SIGNATURES
        .map(|m| signature_prob(m, ground, background).expect("accepted signature"))
}

/// Total success probability `4 P_M(1,0,1,0)`. The four signature
/// probabilities must agree to `SYMMETRY_TOLERANCE`.
pub fn total_success(signatures: &[f64; 4]) -> Result<f64> {
    let reference = signatures[0];
    let scale = signatures.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if signatures
        .iter()
        .any(|s| (s - reference).abs() > SYMMETRY_TOLERANCE * scale)
    {
        return Err(Error::SymmetryViolation(*signatures));
    }
    let eta_tot = 4.0 * reference;
    if eta_tot > 1.0 + 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "total success probability {eta_tot} exceeds one"
        )));
    }
    Ok(eta_tot.min(1.0))
}

/// Fraction of `m` events in which both clicks come from the ground photons.
/// Background counts landing on the same two detectors are tolerated.
pub fn legitimate_fraction(
    ground: &DetectorPatternDistribution,
    background: &DetectorPatternDistribution,
    m: ClickPattern,
) -> Result<f64> {
    let p_m = signature_prob(m, ground, background)?;
    if !(p_m > 0.0) {
        return Err(Error::UndefinedConditional(
            "success signature has zero probability",
        ));
    }
    let masked: f64 = ClickPattern::all()
        .filter(|b| b.is_subset_of(m))
        .map(|b| background.prob(b))
        .sum();
    Ok((ground.prob(m) * masked / p_m).clamp(0.0, 1.0))
}

/// Mixes the intrinsic fidelity with the maximally mixed state.
pub fn final_fidelity(legitimate: f64, intrinsic: f64) -> f64 {
    legitimate * intrinsic + (1.0 - legitimate) / 4.0
}
