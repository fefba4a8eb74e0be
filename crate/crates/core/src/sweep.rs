//! Grid sweeps over scenario parameters.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{evaluate_scenario, ProtocolMetrics, ScenarioParams};

pub const MAX_AXES: usize = 3;

/// A numeric scenario field addressed by its document key path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamPath {
    AltitudeM,
    GroundSeparationM,
    TemporalWidthS,
    GatingWindowS,
    ClockOffsetS,
    ClockOffsetSpreadS,
    WavelengthM,
    ApertureRadiusM,
    InitialWaistM,
    FriedParameterM,
    TrackingErrorM,
    PointingJitterSq,
    BeamWidthM,
    Alpha0PerM,
    ScaleHeightM,
    OpticsEfficiency,
    DetectorEfficiency,
    NightRateHz,
    DayRateHz,
    DarkCountRateHz,
    EarthRadiusM,
}

impl ParamPath {
    pub const ALL: [ParamPath; 21] = [
        ParamPath::AltitudeM,
        ParamPath::GroundSeparationM,
        ParamPath::TemporalWidthS,
        ParamPath::GatingWindowS,
        ParamPath::ClockOffsetS,
        ParamPath::ClockOffsetSpreadS,
        ParamPath::WavelengthM,
        ParamPath::ApertureRadiusM,
        ParamPath::InitialWaistM,
        ParamPath::FriedParameterM,
        ParamPath::TrackingErrorM,
        ParamPath::PointingJitterSq,
        ParamPath::BeamWidthM,
        ParamPath::Alpha0PerM,
        ParamPath::ScaleHeightM,
        ParamPath::OpticsEfficiency,
        ParamPath::DetectorEfficiency,
        ParamPath::NightRateHz,
        ParamPath::DayRateHz,
        ParamPath::DarkCountRateHz,
        ParamPath::EarthRadiusM,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ParamPath::AltitudeM => "altitude_m",
            ParamPath::GroundSeparationM => "ground_separation_m",
            ParamPath::TemporalWidthS => "temporal_width_s",
            ParamPath::GatingWindowS => "gating_window_s",
            ParamPath::ClockOffsetS => "clock_offset_s",
            ParamPath::ClockOffsetSpreadS => "clock_offset_spread_s",
            ParamPath::WavelengthM => "wavelength_m",
            ParamPath::ApertureRadiusM => "beam.aperture_radius_m",
            ParamPath::InitialWaistM => "beam.initial_waist_m",
            ParamPath::FriedParameterM => "beam.fried_parameter_m",
            ParamPath::TrackingErrorM => "beam.tracking_error_m",
            ParamPath::PointingJitterSq => "beam.pointing_jitter_sq",
            ParamPath::BeamWidthM => "beam.beam_width_m",
            ParamPath::Alpha0PerM => "atmosphere.alpha0_per_m",
            ParamPath::ScaleHeightM => "atmosphere.scale_height_m",
            ParamPath::OpticsEfficiency => "losses.optics_efficiency",
            ParamPath::DetectorEfficiency => "losses.detector_efficiency",
            ParamPath::NightRateHz => "background.night_rate_hz",
            ParamPath::DayRateHz => "background.day_rate_hz",
            ParamPath::DarkCountRateHz => "background.dark_count_rate_hz",
            ParamPath::EarthRadiusM => "earth.radius_m",
        }
    }

    pub fn get(self, p: &ScenarioParams) -> f64 {
        match self {
            ParamPath::AltitudeM => p.altitude_m,
            ParamPath::GroundSeparationM => p.ground_separation_m,
            ParamPath::TemporalWidthS => p.temporal_width_s,
            ParamPath::GatingWindowS => p.gating_window_s,
            ParamPath::ClockOffsetS => p.clock_offset_s,
            ParamPath::ClockOffsetSpreadS => p.clock_offset_spread_s,
            ParamPath::WavelengthM => p.wavelength_m,
            ParamPath::ApertureRadiusM => p.beam.aperture_radius_m,
            ParamPath::InitialWaistM => p.beam.initial_waist_m,
            ParamPath::FriedParameterM => p.beam.fried_parameter_m,
            ParamPath::TrackingErrorM => p.beam.tracking_error_m,
            ParamPath::PointingJitterSq => p.beam.pointing_jitter_sq,
            ParamPath::BeamWidthM => p.beam.beam_width_m.unwrap_or(f64::NAN),
            ParamPath::Alpha0PerM => p.atmosphere.alpha0_per_m,
            ParamPath::ScaleHeightM => p.atmosphere.scale_height_m,
            ParamPath::OpticsEfficiency => p.losses.optics_efficiency,
            ParamPath::DetectorEfficiency => p.losses.detector_efficiency,
            ParamPath::NightRateHz => p.background.night_rate_hz,
            ParamPath::DayRateHz => p.background.day_rate_hz,
            ParamPath::DarkCountRateHz => p.background.dark_count_rate_hz,
            ParamPath::EarthRadiusM => p.earth.radius_m,
        }
    }

    pub fn set(self, p: &mut ScenarioParams, v: f64) {
        match self {
            ParamPath::AltitudeM => p.altitude_m = v,
            ParamPath::GroundSeparationM => p.ground_separation_m = v,
            ParamPath::TemporalWidthS => p.temporal_width_s = v,
            ParamPath::GatingWindowS => p.gating_window_s = v,
            ParamPath::ClockOffsetS => p.clock_offset_s = v,
            ParamPath::ClockOffsetSpreadS => p.clock_offset_spread_s = v,
            ParamPath::WavelengthM => p.wavelength_m = v,
            ParamPath::ApertureRadiusM => p.beam.aperture_radius_m = v,
            ParamPath::InitialWaistM => p.beam.initial_waist_m = v,
            ParamPath::FriedParameterM => p.beam.fried_parameter_m = v,
            ParamPath::TrackingErrorM => p.beam.tracking_error_m = v,
            ParamPath::PointingJitterSq => p.beam.pointing_jitter_sq = v,
            ParamPath::BeamWidthM => p.beam.beam_width_m = Some(v),
            ParamPath::Alpha0PerM => p.atmosphere.alpha0_per_m = v,
            ParamPath::ScaleHeightM => p.atmosphere.scale_height_m = v,
            ParamPath::OpticsEfficiency => p.losses.optics_efficiency = v,
            ParamPath::DetectorEfficiency => p.losses.detector_efficiency = v,
            ParamPath::NightRateHz => p.background.night_rate_hz = v,
            ParamPath::DayRateHz => p.background.day_rate_hz = v,
            ParamPath::DarkCountRateHz => p.background.dark_count_rate_hz = v,
            ParamPath::EarthRadiusM => p.earth.radius_m = v,
        }
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ParamPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamPath::ALL
            .iter()
            .copied()
            .find(|p| p.key() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown parameter path `{s}`")))
    }
}

impl Serialize for ParamPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.key())
    }
}

impl<'de> Deserialize<'de> for ParamPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One swept parameter and its grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: ParamPath,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn values(param: ParamPath, values: Vec<f64>) -> Self {
        SweepAxis { param, values }
    }

    /// `start, start + step, ...` up to and including `stop` (within rounding).
    pub fn range(param: ParamPath, start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "axis {param}: range needs finite start <= stop and step > 0"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok(SweepAxis {
            param,
            values: (0..n).map(|i| start + i as f64 * step).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub baseline: ScenarioParams,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > MAX_AXES {
            return Err(Error::InvalidSpec(format!(
                "a sweep needs 1 to {MAX_AXES} axes, got {}",
                self.axes.len()
            )));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() {
                return Err(Error::InvalidSpec(format!(
                    "axis {} has no values",
                    axis.param
                )));
            }
            if self.axes[..i].iter().any(|a| a.param == axis.param) {
                return Err(Error::InvalidSpec(format!("axis {} repeated", axis.param)));
            }
        }
        Ok(())
    }

    /// Grid points in lexicographic order, first axis outermost.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        points
    }

    /// Scenario at one grid point.
    pub fn scenario_at(&self, point: &[f64]) -> ScenarioParams {
        let mut p = self.baseline;
        for (axis, &v) in self.axes.iter().zip(point) {
            axis.param.set(&mut p, v);
        }
        p
    }
}

/// One evaluated grid point. A failed evaluation keeps its error message.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis_values: Vec<f64>,
    pub outcome: std::result::Result<ProtocolMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub axes: Vec<String>,
    pub rows: Vec<ResultRow>,
}

/// Evaluates every grid point. Rows come back in grid order whatever the
/// thread schedule; failing points become error rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    spec.validate()?;
    let rows = spec
        .points()
        .into_par_iter()
        .map(|point| {
            let outcome = evaluate_scenario(&spec.scenario_at(&point)).map_err(|e| e.to_string());
            ResultRow {
                axis_values: point,
                outcome,
            }
        })
        .collect();
    Ok(ResultTable {
        axes: spec
            .axes
            .iter()
            .map(|a| a.param.key().to_string())
            .collect(),
        rows,
    })
}

/// Built-in sweeps regenerating the figure data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Fidelity and success probability against gating window for several
    /// wavepacket widths, at h = 500 km and D_G = 1000 km.
    Fig2,
    /// Fidelity and success probability against altitude for several ground
    /// separations, with a 10 ns wavepacket and a 40 ns window.
    Fig3,
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(FigurePreset::Fig2),
            "fig3" => Ok(FigurePreset::Fig3),
            other => Err(Error::InvalidSpec(format!(
                "unknown figure preset `{other}`"
            ))),
        }
    }
}

impl FigurePreset {
    pub fn sweep(self, baseline: ScenarioParams) -> SweepSpec {
        match self {
            FigurePreset::Fig2 => SweepSpec {
                baseline: ScenarioParams {
                    altitude_m: 500e3,
                    ground_separation_m: 1000e3,
                    ..baseline
                },
                axes: vec![
                    SweepAxis::values(ParamPath::TemporalWidthS, vec![2e-9, 5e-9, 10e-9, 20e-9]),
                    SweepAxis::range(ParamPath::GatingWindowS, 2e-9, 100e-9, 2e-9)
                        .expect("valid preset range"),
                ],
            },
            FigurePreset::Fig3 => SweepSpec {
                baseline: ScenarioParams {
                    temporal_width_s: 10e-9,
                    gating_window_s: 40e-9,
                    ..baseline
                },
                axes: vec![
                    SweepAxis::values(ParamPath::GroundSeparationM, vec![300e3, 600e3, 1000e3]),
                    SweepAxis::range(ParamPath::AltitudeM, 100e3, 1500e3, 25e3)
                        .expect("valid preset range"),
                ],
            },
        }
    }
}
