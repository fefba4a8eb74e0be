//! Stray-photon and dark-count statistics inside the gating window.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_probability, Result};
use crate::pattern::{ClickPattern, DetectorPatternDistribution};

pub const DETECTORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Day,
    #[default]
    Night,
}

/// Background seen by each detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundEnv {
    pub regime: Regime,
    /// Stray-photon rate per detector.
    pub rate_per_detector_hz: f64,
    pub dark_count_rate_hz: f64,
}

/// Sky-radiance description of the stray light entering the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadianceModel {
    /// photons s^-1 m^-2 sr^-1 nm^-1
    pub sky_spectral_photon_radiance: f64,
    pub fov_sr: f64,
    pub filter_bandwidth_nm: f64,
    pub receiver_area_m2: f64,
    pub optical_efficiency: f64,
}

impl RadianceModel {
    pub fn validate(&self) -> Result<()> {
        require_non_negative(
            "sky_spectral_photon_radiance",
            self.sky_spectral_photon_radiance,
        )?;
        require_non_negative("fov_sr", self.fov_sr)?;
        require_non_negative("filter_bandwidth_nm", self.filter_bandwidth_nm)?;
        require_non_negative("receiver_area_m2", self.receiver_area_m2)?;
        require_probability("optical_efficiency", self.optical_efficiency)
    }

    /// Sunlit Earth seen at ~785 nm: ~1.2 W m^-2 nm^-1 solar irradiance,
    /// albedo 0.3, Lambertian.
    pub fn sunlit_earth(aperture_radius_m: f64) -> Self {
        RadianceModel {
            sky_spectral_photon_radiance: 4.5e17,
            fov_sr: 3.14e-10,
            filter_bandwidth_nm: 1.0,
            receiver_area_m2: std::f64::consts::PI * aperture_radius_m * aperture_radius_m,
            optical_efficiency: 0.5,
        }
    }

    /// Moonlit Earth plus thermal emission, six orders below daylight.
    pub fn moonlit_earth(aperture_radius_m: f64) -> Self {
        RadianceModel {
            sky_spectral_photon_radiance: 4.5e11,
            ..Self::sunlit_earth(aperture_radius_m)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrayRate {
    pub total_hz: f64,
    pub per_detector_hz: f64,
}

/// Stray-photon rate collected by the receiver, split evenly across the
/// four detectors.
pub fn stray_rate(m: &RadianceModel) -> StrayRate {
    let total = m.sky_spectral_photon_radiance
        * m.receiver_area_m2
        * m.fov_sr
        * m.filter_bandwidth_nm
        * m.optical_efficiency;
    StrayRate {
        total_hz: total,
        per_detector_hz: total / DETECTORS as f64,
    }
}

/// Poisson probability of exactly `n` counts at rate `rate_hz` over
/// `duration_s`.
pub fn stray_count_pmf(rate_hz: f64, duration_s: f64, n: u32) -> f64 {
    let mean = rate_hz * duration_s;
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let log_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * mean.ln() - mean - log_fact).exp()
}

/// Probability of at least one background count on one detector.
pub fn detector_click_prob(rate_hz: f64, dark_hz: f64, duration_s: f64) -> f64 {
    -(-(rate_hz + dark_hz) * duration_s).exp_m1()
}

/// Probability that background alone produces exactly pattern `d`, with
/// detectors firing independently.
pub fn background_pattern_prob(d: ClickPattern, click: &[f64; DETECTORS]) -> f64 {
    (0..DETECTORS)
        .map(|i| {
            if d.clicked(i) {
                click[i]
            } else {
                1.0 - click[i]
            }
        })
        .product()
}

pub fn background_distribution(click: &[f64; DETECTORS]) -> Result<DetectorPatternDistribution> {
    for (i, p) in click.iter().enumerate() {
        require_probability(&format!("click_probability[{i}]"), *p)?;
    }
    let mut probs = [0.0; 16];
    for d in ClickPattern::all() {
        probs[d.index()] = background_pattern_prob(d, click);
    }
    DetectorPatternDistribution::new(probs)
}
