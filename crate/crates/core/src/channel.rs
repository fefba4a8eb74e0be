//! Per-channel transmissivity: beam widening/wandering at the receiver
//! aperture, slant-path atmospheric attenuation and static optics losses.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, require_probability, Error, Result};
use crate::geometry::{path_altitude_with, EarthModel, LinkGeometry, PathModel};
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamParams {
    pub aperture_radius_m: f64,
    pub initial_waist_m: f64,
    pub fried_parameter_m: f64,
    pub tracking_error_m: f64,
    /// Coefficient of `z^2` in the transmitter pointing-error term.
    pub pointing_jitter_sq: f64,
    /// Long-term beam width at the receiver. Bypasses the width model when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_width_m: Option<f64>,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            aperture_radius_m: 0.15,
            initial_waist_m: 0.15,
            fried_parameter_m: 0.1,
            tracking_error_m: 0.2,
            pointing_jitter_sq: 1e-12,
            beam_width_m: None,
        }
    }
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("beam.aperture_radius_m", self.aperture_radius_m)?;
        require_positive("beam.initial_waist_m", self.initial_waist_m)?;
        require_positive("beam.fried_parameter_m", self.fried_parameter_m)?;
        require_non_negative("beam.tracking_error_m", self.tracking_error_m)?;
        require_non_negative("beam.pointing_jitter_sq", self.pointing_jitter_sq)?;
        if let Some(w) = self.beam_width_m {
            require_positive("beam.beam_width_m", w)?;
        }
        Ok(())
    }

    /// The width model these parameters select.
    pub fn width_model(&self) -> Box<dyn BeamWidthModel> {
        match self.beam_width_m {
            Some(w) => Box::new(FixedWidth(w)),
            None => Box::new(DiffractionTurbulence {
                initial_waist_m: self.initial_waist_m,
                fried_parameter_m: self.fried_parameter_m,
            }),
        }
    }
}

/// Long-term beam width at the receiver plane.
pub trait BeamWidthModel: Send + Sync {
    fn width_m(&self, distance_m: f64, wavelength_m: f64) -> f64;
}

/// Gaussian-beam diffraction plus Fried-parameter turbulence spreading,
/// added in quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionTurbulence {
    pub initial_waist_m: f64,
    /// `f64::INFINITY` disables the turbulence term.
    pub fried_parameter_m: f64,
}

impl DiffractionTurbulence {
    pub fn diffraction_width_m(&self, z: f64, wavelength_m: f64) -> f64 {
        let w0 = self.initial_waist_m;
        let ratio = z * wavelength_m / (PI * w0 * w0);
        w0 * (1.0 + ratio * ratio).sqrt()
    }

    pub fn turbulence_width_m(&self, z: f64, wavelength_m: f64) -> f64 {
        SQRT_2 * wavelength_m * z / (PI * self.fried_parameter_m)
    }
}

impl BeamWidthModel for DiffractionTurbulence {
    fn width_m(&self, z: f64, wavelength_m: f64) -> f64 {
        self.diffraction_width_m(z, wavelength_m)
            .hypot(self.turbulence_width_m(z, wavelength_m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedWidth(pub f64);

impl BeamWidthModel for FixedWidth {
    fn width_m(&self, _: f64, _: f64) -> f64 {
        self.0
    }
}

pub fn long_term_beam_width(distance_m: f64, wavelength_m: f64, beam: &BeamParams) -> Result<f64> {
    require_positive("slant_range_m", distance_m)?;
    require_positive("wavelength_m", wavelength_m)?;
    beam.validate()?;
    Ok(beam.width_model().width_m(distance_m, wavelength_m))
}

/// Fraction of the beam collected by a circular aperture of radius
/// `aperture_radius_m`, including transmitter pointing error and tracking
/// error.
pub fn widening_wandering_efficiency(
    aperture_radius_m: f64,
    beam_width_m: f64,
    distance_m: f64,
    tracking_error_m: f64,
    pointing_jitter_sq: f64,
) -> f64 {
    let spread = beam_width_m * beam_width_m
        + pointing_jitter_sq * distance_m * distance_m
        + tracking_error_m * tracking_error_m;
    -(-2.0 * aperture_radius_m * aperture_radius_m / spread).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtmosphereParams {
    pub alpha0_per_m: f64,
    pub scale_height_m: f64,
    pub path_model: PathModel,
}

impl Default for AtmosphereParams {
    fn default() -> Self {
        AtmosphereParams {
            alpha0_per_m: 5e-6,
            scale_height_m: 6600.0,
            path_model: PathModel::Spherical,
        }
    }
}

impl AtmosphereParams {
    pub fn validate(&self) -> Result<()> {
        // Zero extinction is the lossless limit.
        require_non_negative("atmosphere.alpha0_per_m", self.alpha0_per_m)?;
        require_positive("atmosphere.scale_height_m", self.scale_height_m)
    }
}

/// Transmissivity of an exponential atmosphere along the slant path.
pub fn atmospheric_efficiency(
    geom: &LinkGeometry,
    atmo: &AtmosphereParams,
    earth: EarthModel,
) -> Result<f64> {
    atmo.validate()?;
    let z = geom.slant_range_m;
    let theta = geom.zenith_angle_rad;
    let scale = atmo.scale_height_m;
    let density = |y: f64| (-path_altitude_with(atmo.path_model, y, theta, earth) / scale).exp();

    // Split where the flat-Earth path crosses a few scale heights.
    let airmass = 1.0 / theta.cos();
    let mut pts = vec![0.0];
    pts.extend(
        [1.0, 4.0, 15.0, 40.0]
            .iter()
            .map(|k| k * scale * airmass)
            .filter(|&y| y < z),
    );
    pts.push(z);
    let column = integrate_with_breakpoints(density, &pts, Tolerance::default())?;
    Ok((-atmo.alpha0_per_m * column.value).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticLosses {
    pub optics_efficiency: f64,
    pub detector_efficiency: f64,
}

impl Default for StaticLosses {
    fn default() -> Self {
        StaticLosses {
            optics_efficiency: 0.6,
            detector_efficiency: 0.65,
        }
    }
}

impl StaticLosses {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("losses.optics_efficiency", self.optics_efficiency),
            ("losses.detector_efficiency", self.detector_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(name, &format!("0 < {name} <= 1"), v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBudget {
    pub atmospheric: f64,
    pub widening_wandering: f64,
    pub optics: f64,
    pub detector: f64,
    pub beam_width_m: f64,
    pub total: f64,
}

impl ChannelBudget {
    pub fn from_factors(
        atmospheric: f64,
        widening_wandering: f64,
        optics: f64,
        detector: f64,
        beam_width_m: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("eta_a", atmospheric),
            ("eta_w", widening_wandering),
            ("optics_efficiency", optics),
            ("detector_efficiency", detector),
        ] {
            require_probability(name, v)
                .map_err(|_| Error::InvariantViolation(format!("{name} = {v} outside [0, 1]")))?;
        }
        Ok(ChannelBudget {
            atmospheric,
            widening_wandering,
            optics,
            detector,
            beam_width_m,
            total: atmospheric * widening_wandering * optics * detector,
        })
    }
}

/// Full transmissivity of one ground-to-satellite channel.
pub fn channel_efficiency(
    geom: &LinkGeometry,
    beam: &BeamParams,
    atmo: &AtmosphereParams,
    losses: &StaticLosses,
    earth: EarthModel,
    wavelength_m: f64,
) -> Result<ChannelBudget> {
    losses.validate()?;
    let z = geom.slant_range_m;
    let w = long_term_beam_width(z, wavelength_m, beam)?;
    let eta_w = widening_wandering_efficiency(
        beam.aperture_radius_m,
        w,
        z,
        beam.tracking_error_m,
        beam.pointing_jitter_sq,
    );
    let eta_a = atmospheric_efficiency(geom, atmo, earth)?;
    ChannelBudget::from_factors(
        eta_a,
        eta_w,
        losses.optics_efficiency,
        losses.detector_efficiency,
        w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::link_geometry;
    use proptest::prelude::*;

    const KM: f64 = 1000.0;
    const LAMBDA: f64 = 785e-9;

    fn no_turbulence(w0: f64) -> BeamParams {
        BeamParams {
            initial_waist_m: w0,
            fried_parameter_m: f64::INFINITY,
            ..BeamParams::default()
        }
    }

    /// Independent Gaussian-beam oracle: Rayleigh range form.
    fn rayleigh_width(w0: f64, z: f64) -> f64 {
        let zr = PI * w0 * w0 / LAMBDA;
        w0 * (1.0 + (z / zr).powi(2)).sqrt()
    }

    #[test]
    fn near_field_without_turbulence_keeps_waist() {
        let w = long_term_beam_width(1.0, LAMBDA, &no_turbulence(0.15)).unwrap();
        assert!((w - 0.15).abs() < 1e-9);
    }

    #[test]
    fn diffraction_width_at_500_km() {
        let w = long_term_beam_width(500.0 * KM, LAMBDA, &no_turbulence(0.15)).unwrap();
        assert!((w - rayleigh_width(0.15, 500.0 * KM)).abs() < 1e-12);
        assert!((w - 0.8463).abs() < 1e-3);
    }

    #[test]
    fn turbulence_widens() {
        let clear = long_term_beam_width(500.0 * KM, LAMBDA, &no_turbulence(0.15)).unwrap();
        let turb = BeamParams {
            fried_parameter_m: 0.1,
            ..no_turbulence(0.15)
        };
        assert!(long_term_beam_width(500.0 * KM, LAMBDA, &turb).unwrap() > clear);
    }

    #[test]
    fn fixed_width_bypasses_model() {
        let b = BeamParams {
            beam_width_m: Some(3.0),
            ..BeamParams::default()
        };
        assert_eq!(long_term_beam_width(123.0 * KM, LAMBDA, &b).unwrap(), 3.0);
    }

    #[test]
    fn widening_wandering_examples() {
        let eta = widening_wandering_efficiency(0.15, 3.0, 500.0 * KM, 0.0, 1e-12);
        let hand = 1.0 - (-0.045f64 / 9.25).exp();
        assert!((eta - hand).abs() < 1e-15);
        assert!((eta - 4.853e-3).abs() < 1e-6);
        assert_eq!(
            widening_wandering_efficiency(1e4, 3.0, 500.0 * KM, 0.0, 1e-12),
            1.0
        );
        assert!(widening_wandering_efficiency(0.15, 1e9, 500.0 * KM, 0.0, 1e-12) < 1e-15);
    }

    #[test]
    fn zenith_attenuation_matches_closed_form() {
        let e = EarthModel::default();
        let atmo = AtmosphereParams::default();
        for z in [100.0 * KM, 500.0 * KM, 1500.0 * KM] {
            let g = link_geometry(z, 0.0, e).unwrap();
            let eta = atmospheric_efficiency(&g, &atmo, e).unwrap();
            let h = atmo.scale_height_m;
            let closed = (-atmo.alpha0_per_m * h * (1.0 - (-z / h).exp())).exp();
            assert!((eta - closed).abs() / closed < 1e-8);
        }
        let g = link_geometry(500.0 * KM, 0.0, e).unwrap();
        let eta = atmospheric_efficiency(&g, &atmo, e).unwrap();
        assert!((eta - 0.96754).abs() < 1e-5);
    }

    #[test]
    fn attenuation_limits() {
        let e = EarthModel::default();
        let g = link_geometry(500.0 * KM, 800.0 * KM, e).unwrap();
        let clear = AtmosphereParams {
            alpha0_per_m: 0.0,
            ..AtmosphereParams::default()
        };
        assert_eq!(atmospheric_efficiency(&g, &clear, e).unwrap(), 1.0);
    }

    /// Geometry with a prescribed zenith angle and slant range.
    fn slanted(z: f64, theta: f64) -> LinkGeometry {
        LinkGeometry {
            slant_range_m: z,
            zenith_angle_rad: theta,
            altitude_m: f64::NAN,
            ground_separation_m: f64::NAN,
        }
    }

    #[test]
    fn more_air_at_larger_zenith_angle() {
        let e = EarthModel::default();
        let atmo = AtmosphereParams::default();
        let vertical = atmospheric_efficiency(&slanted(300.0 * KM, 0.0), &atmo, e).unwrap();
        let inclined =
            atmospheric_efficiency(&slanted(300.0 * KM, 60f64.to_radians()), &atmo, e).unwrap();
        assert!(inclined < vertical);
    }

    #[test]
    fn flat_atmosphere_limit() {
        let e = EarthModel::default();
        let atmo = AtmosphereParams::default();
        for deg in [0.0f64, 20.0, 40.0, 60.0] {
            let theta = deg.to_radians();
            let eta = atmospheric_efficiency(&slanted(1000.0 * KM, theta), &atmo, e).unwrap();
            let flat = (-atmo.alpha0_per_m * atmo.scale_height_m / theta.cos()).exp();
            assert!(((eta - flat) / flat).abs() < 0.02, "{deg}: {eta} vs {flat}");
        }
    }

    #[test]
    fn channel_budget_products() {
        let b = ChannelBudget::from_factors(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(b.total, 1.0);
        let b = ChannelBudget::from_factors(0.9675, 4.853e-3, 0.8, 0.6, 1.0).unwrap();
        assert!((b.total - 2.254e-3).abs() < 1e-6);
        let b = ChannelBudget::from_factors(0.9675, 0.0, 0.8, 0.6, 1.0).unwrap();
        assert_eq!(b.total, 0.0);
        assert!(ChannelBudget::from_factors(1.2, 0.5, 0.8, 0.6, 1.0).is_err());
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = BeamParams {
            aperture_radius_m: 0.0,
            ..BeamParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = StaticLosses {
            optics_efficiency: 1.5,
            ..StaticLosses::default()
        };
        assert!(bad.validate().is_err());
        let bad = AtmosphereParams {
            scale_height_m: -1.0,
            ..AtmosphereParams::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn eta_w_monotonicity(
            ra in 0.05..1.0f64, w in 0.1..10.0f64, z in 100e3..2000e3f64,
            tr in 0.0..2.0f64, d in 0.01..0.5f64,
        ) {
            let base = widening_wandering_efficiency(ra, w, z, tr, 1e-12);
            prop_assert!(base > 0.0 && base < 1.0);
            prop_assert!(widening_wandering_efficiency(ra + d, w, z, tr, 1e-12) > base);
            prop_assert!(widening_wandering_efficiency(ra, w + d, z, tr, 1e-12) < base);
            prop_assert!(widening_wandering_efficiency(ra, w, z * (1.0 + d), tr, 1e-12) < base);
            prop_assert!(widening_wandering_efficiency(ra, w, z, tr + d, 1e-12) < base);
        }

        #[test]
        fn beam_width_monotone(z in 10e3..2000e3f64, dz in 1e3..100e3f64, r0 in 0.02..1.0f64) {
            let b = BeamParams { fried_parameter_m: r0, ..BeamParams::default() };
            let w = long_term_beam_width(z, LAMBDA, &b).unwrap();
            prop_assert!(long_term_beam_width(z + dz, LAMBDA, &b).unwrap() > w);
            let calmer = BeamParams { fried_parameter_m: r0 * 1.5, ..b };
            prop_assert!(long_term_beam_width(z, LAMBDA, &calmer).unwrap() < w);
        }

        #[test]
        fn eta_a_monotone_in_extinction(a in 1e-7..1e-5f64, theta in 0.0..1.2f64) {
            let e = EarthModel::default();
            let g = slanted(400.0 * KM, theta);
            let lo = AtmosphereParams { alpha0_per_m: a, ..AtmosphereParams::default() };
            let hi = AtmosphereParams { alpha0_per_m: a * 1.5, ..lo };
            let x = atmospheric_efficiency(&g, &lo, e).unwrap();
            prop_assert!(x > 0.0 && x <= 1.0);
            prop_assert!(atmospheric_efficiency(&g, &hi, e).unwrap() < x);
            let steeper = slanted(400.0 * KM, theta + 0.1);
            prop_assert!(atmospheric_efficiency(&steeper, &lo, e).unwrap() < x);
        }
    }
}
