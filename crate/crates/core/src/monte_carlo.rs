//! Trial-by-trial simulation of the detector clicks, used as an independent
//! check on the analytic signature probabilities.
//!
//! Trials are split into fixed blocks of `BLOCK_TRIALS`. Block `k` draws from
//! ChaCha8 seeded with `seed` on stream `k`, so results depend only on
//! `(seed, trials)` and never on how blocks are scheduled across threads.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coincidence::RoutingModel;
use crate::error::{require_probability, Error, Result};
use crate::pattern::ClickPattern;

pub const BLOCK_TRIALS: u64 = 1 << 16;
pub const MIN_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub signatures: u64,
    pub legitimate: u64,
    pub eta_tot: f64,
    pub eta_tot_se: f64,
    /// NaN when no signature was observed.
    pub p_s: f64,
    pub p_s_se: f64,
}

/// `u64` threshold such that `next_u64() < t` has probability `p`.
fn threshold(p: f64) -> u64 {
    // 2^64 as f64; the cast saturates at u64::MAX for p = 1.
    (p * 18_446_744_073_709_551_616.0) as u64
}

struct Sampler {
    /// Cumulative detector thresholds per photon; beyond the last one the
    /// photon is lost.
    photon: [[u64; 4]; 2],
    click: [u64; 4],
}

impl Sampler {
    fn photon_pattern(&self, i: usize, rng: &mut ChaCha8Rng) -> ClickPattern {
        let u = rng.next_u64();
        self.photon[i]
            .iter()
            .position(|&t| u < t)
            .map_or(ClickPattern::NONE, ClickPattern::single)
    }

    fn run_block(&self, seed: u64, block: u64, trials: u64) -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let (mut signatures, mut legitimate) = (0, 0);
        for _ in 0..trials {
            let ground = self
                .photon_pattern(0, &mut rng)
                .union(self.photon_pattern(1, &mut rng));
            let mut noise = 0usize;
            for (d, &t) in self.click.iter().enumerate() {
                if rng.next_u64() < t {
                    noise |= 1 << d;
                }
            }
            let seen = ground.union(ClickPattern::from_index(noise));
            if seen.is_signature() {
                signatures += 1;
                if ground == seen {
                    legitimate += 1;
                }
            }
        }
        (signatures, legitimate)
    }
}

/// Simulates `trials` photon pairs with detection probabilities `eta`,
/// routing `routing` and independent per-detector background click
/// probabilities `click`.
pub fn monte_carlo_coincidence(
    eta: [f64; 2],
    click: [f64; 4],
    routing: &dyn RoutingModel,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidSpec(format!(
            "Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    require_probability("eta_1", eta[0])?;
    require_probability("eta_2", eta[1])?;
    for p in click {
        require_probability("click_probability", p)?;
    }

    let mut photon = [[0u64; 4]; 2];
    for (i, row) in photon.iter_mut().enumerate() {
        let route = routing.detector_probabilities(i);
        let mut acc = 0.0;
        for (slot, r) in row.iter_mut().zip(route) {
            acc += eta[i] * r;
            *slot = threshold(acc.min(eta[i]));
        }
    }
    let sampler = Sampler {
        photon,
        click: click.map(threshold),
    };

    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let (signatures, legitimate) = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let n = BLOCK_TRIALS.min(trials - k * BLOCK_TRIALS);
            sampler.run_block(seed, k, n)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = trials as f64;
    let eta_tot = signatures as f64 / n;
    let (p_s, p_s_se) = if signatures > 0 {
        let p = legitimate as f64 / signatures as f64;
        (p, (p * (1.0 - p) / signatures as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(McEstimate {
        trials,
        signatures,
        legitimate,
        eta_tot,
        eta_tot_se: (eta_tot * (1.0 - eta_tot) / n).sqrt(),
        p_s,
        p_s_se,
    })
}

/// `|estimate - exact| <= k * se`; a zero standard error demands equality.
pub fn within_band(estimate: f64, exact: f64, se: f64, k: f64) -> bool {
    (estimate - exact).abs() <= k * se || estimate == exact
}
