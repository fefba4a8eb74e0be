//! Symmetric ground-station/satellite geometry on a spherical Earth.
//!
//! The satellite sits above the midpoint of the great circle joining the two
//! ground stations, so both stations see the same slant range and zenith angle.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarthModel {
    pub radius_m: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        EarthModel {
            radius_m: EARTH_RADIUS_M,
        }
    }
}

impl EarthModel {
    pub fn validate(&self) -> Result<()> {
        require_positive("earth.radius_m", self.radius_m)
    }
}

/// How the altitude of a point on the line of sight is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathModel {
    #[default]
    Spherical,
    /// `y cos(theta)`; ignores Earth curvature.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub slant_range_m: f64,
    pub zenith_angle_rad: f64,
    pub altitude_m: f64,
    pub ground_separation_m: f64,
}

/// Slant range and zenith angle seen from either ground station.
pub fn link_geometry(
    altitude_m: f64,
    ground_separation_m: f64,
    earth: EarthModel,
) -> Result<LinkGeometry> {
    require_positive("altitude_m", altitude_m)?;
    require_non_negative("ground_separation_m", ground_separation_m)?;
    earth.validate()?;

    let r = earth.radius_m;
    let central = 0.5 * ground_separation_m / r;
    if central >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::invalid(
            "ground_separation_m",
            "ground_separation_m / 2 subtends a central angle < pi/2",
            ground_separation_m,
        ));
    }

    let orbit_r = r + altitude_m;
    // Law of cosines, written so that z == h exactly for zero separation.
    let half_sin = (0.5 * central).sin();
    let z_sq = altitude_m * altitude_m + 4.0 * r * orbit_r * half_sin * half_sin;
    let z = z_sq.sqrt();

    let cos_zenith = (altitude_m * (2.0 * r + altitude_m) - z_sq) / (2.0 * r * z);
    let sin_zenith = orbit_r * central.sin() / z;
    let zenith = sin_zenith.atan2(cos_zenith);
    if cos_zenith <= 0.0 {
        return Err(Error::BelowHorizon {
            zenith_deg: zenith.to_degrees(),
        });
    }

    Ok(LinkGeometry {
        slant_range_m: z,
        zenith_angle_rad: zenith,
        altitude_m,
        ground_separation_m,
    })
}

/// Altitude above the surface of the point `distance_m` along the line of
/// sight from a ground station.
pub fn path_altitude(distance_m: f64, zenith_rad: f64, earth: EarthModel) -> f64 {
    path_altitude_with(PathModel::Spherical, distance_m, zenith_rad, earth)
}

pub fn path_altitude_with(model: PathModel, y: f64, zenith_rad: f64, earth: EarthModel) -> f64 {
    match model {
        PathModel::Flat => y * zenith_rad.cos(),
        PathModel::Spherical => {
            let r = earth.radius_m;
            // sqrt(R^2 + y^2 + 2Ry cos) - R without the cancellation.
            let excess = y * y + 2.0 * r * y * zenith_rad.cos();
            excess / ((r * r + excess).sqrt() + r)
        }
    }
}

/// Lowest altitude at which a satellite midway between two stations
/// `ground_separation_m` apart is still above both horizons.
pub fn horizon_altitude(ground_separation_m: f64, earth: EarthModel) -> f64 {
    let central = 0.5 * ground_separation_m / earth.radius_m;
    earth.radius_m * (1.0 / central.cos() - 1.0)
}
