//! End-to-end evaluation of one physical configuration.

use serde::{Deserialize, Serialize};

use crate::background::{
    background_distribution, detector_click_prob, stray_rate, BackgroundEnv, RadianceModel, Regime,
    DETECTORS,
};
use crate::channel::{
    channel_efficiency, AtmosphereParams, BeamParams, ChannelBudget, StaticLosses,
};
use crate::coincidence::{
    all_signature_probs, final_fidelity, ground_pattern_distribution, legitimate_fraction,
    total_success, UniformRouting,
};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::geometry::{link_geometry, EarthModel, LinkGeometry};
use crate::pattern::ClickPattern;
use crate::wavepacket::{intrinsic_fidelity, GatingWindow, WavepacketSpec};

/// Background configuration as written in a scenario document. Direct rates
/// are per detector; a radiance model, when present, replaces the direct
/// rate of its regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    pub regime: Regime,
    pub night_rate_hz: f64,
    pub day_rate_hz: f64,
    pub dark_count_rate_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub night_radiance: Option<RadianceModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub day_radiance: Option<RadianceModel>,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        BackgroundConfig {
            regime: Regime::Night,
            night_rate_hz: 1400.0,
            day_rate_hz: 1.5e7,
            dark_count_rate_hz: 100.0,
            night_radiance: None,
            day_radiance: None,
        }
    }
}

impl BackgroundConfig {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("background.night_rate_hz", self.night_rate_hz)?;
        require_non_negative("background.day_rate_hz", self.day_rate_hz)?;
        require_non_negative("background.dark_count_rate_hz", self.dark_count_rate_hz)?;
        for m in [self.night_radiance, self.day_radiance].iter().flatten() {
            m.validate()?;
        }
        Ok(())
    }

    pub fn env(&self) -> BackgroundEnv {
        let (direct, radiance) = match self.regime {
            Regime::Night => (self.night_rate_hz, self.night_radiance),
            Regime::Day => (self.day_rate_hz, self.day_radiance),
        };
        BackgroundEnv {
            regime: self.regime,
            rate_per_detector_hz: radiance.map_or(direct, |m| stray_rate(&m).per_detector_hz),
            dark_count_rate_hz: self.dark_count_rate_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub altitude_m: f64,
    pub ground_separation_m: f64,
    pub temporal_width_s: f64,
    pub gating_window_s: f64,
    /// Worst-case clock offset between the two arrivals.
    pub clock_offset_s: f64,
    /// When positive, metrics are averaged over a Gaussian clock offset with
    /// this standard deviation, centred on `clock_offset_s`.
    pub clock_offset_spread_s: f64,
    pub wavelength_m: f64,
    pub beam: BeamParams,
    pub atmosphere: AtmosphereParams,
    pub losses: StaticLosses,
    pub background: BackgroundConfig,
    pub earth: EarthModel,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            altitude_m: 500e3,
            ground_separation_m: 1000e3,
            temporal_width_s: 10e-9,
            gating_window_s: 40e-9,
            clock_offset_s: 1e-9,
            clock_offset_spread_s: 0.0,
            wavelength_m: 785e-9,
            beam: BeamParams::default(),
            atmosphere: AtmosphereParams::default(),
            losses: StaticLosses::default(),
            background: BackgroundConfig::default(),
            earth: EarthModel::default(),
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("altitude_m", self.altitude_m)?;
        require_non_negative("ground_separation_m", self.ground_separation_m)?;
        require_positive("temporal_width_s", self.temporal_width_s)?;
        require_positive("gating_window_s", self.gating_window_s)?;
        if !self.clock_offset_s.is_finite() {
            return Err(Error::invalid(
                "clock_offset_s",
                "clock_offset_s is finite",
                self.clock_offset_s,
            ));
        }
        require_non_negative("clock_offset_spread_s", self.clock_offset_spread_s)?;
        require_positive("wavelength_m", self.wavelength_m)?;
        self.beam.validate()?;
        self.atmosphere.validate()?;
        self.losses.validate()?;
        self.background.validate()?;
        self.earth.validate()
    }
}

/// Every intermediate factor of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolMetrics {
    pub geometry: LinkGeometry,
    pub channel: ChannelBudget,
    /// Gating probability of each packet.
    pub p_gw: [f64; 2],
    /// Channel transmissivity times gating probability, per ground station.
    pub detection_efficiency: [f64; 2],
    pub background_click_prob: f64,
    pub f_ic: f64,
    pub p_m_single: f64,
    pub p_s: f64,
    pub eta_tot: f64,
    pub fidelity: f64,
}

/// Runs the full model chain. Deterministic in `p`.
pub fn evaluate_scenario(p: &ScenarioParams) -> Result<ProtocolMetrics> {
    p.validate()?;
    if p.clock_offset_spread_s == 0.0 {
        return evaluate_at_offset(p, p.clock_offset_s);
    }

    // Gauss-Hermite average over the offset. Fidelities are weighted by the
    // success probability, since only heralded pairs carry a fidelity.
    let mut acc: Option<ProtocolMetrics> = None;
    let (mut eta, mut f_w, mut fic_w, mut ps_w, mut gw) = (0.0, 0.0, 0.0, 0.0, [0.0; 2]);
    for (x, w) in gauss_hermite(GH_NODES) {
        let weight = w / std::f64::consts::PI.sqrt();
        let offset = p.clock_offset_s + std::f64::consts::SQRT_2 * p.clock_offset_spread_s * x;
        let m = evaluate_at_offset(p, offset)?;
        eta += weight * m.eta_tot;
        f_w += weight * m.eta_tot * m.fidelity;
        fic_w += weight * m.eta_tot * m.f_ic;
        ps_w += weight * m.eta_tot * m.p_s;
        gw[0] += weight * m.p_gw[0];
        gw[1] += weight * m.p_gw[1];
        acc.get_or_insert(m);
    }
    let mut m = acc.expect("at least one node");
    if !(eta > 0.0) {
        return Err(Error::UndefinedConditional(
            "success probability vanishes over the clock-offset distribution",
        ));
    }
    m.eta_tot = eta;
    m.p_m_single = eta / 4.0;
    m.fidelity = f_w / eta;
    m.f_ic = fic_w / eta;
    m.p_s = ps_w / eta;
    m.p_gw = gw;
    m.detection_efficiency = [m.channel.total * gw[0], m.channel.total * gw[1]];
    Ok(m)
}

fn evaluate_at_offset(p: &ScenarioParams, offset_s: f64) -> Result<ProtocolMetrics> {
    let geometry = link_geometry(p.altitude_m, p.ground_separation_m, p.earth)?;
    let channel = channel_efficiency(
        &geometry,
        &p.beam,
        &p.atmosphere,
        &p.losses,
        p.earth,
        p.wavelength_m,
    )?;

    // Clock zero is the nominal arrival of photon 1; the window is centred
    // between the two arrivals.
    let first = WavepacketSpec::arriving_at(0.0, p.temporal_width_s, p.wavelength_m)?;
    let second = WavepacketSpec::arriving_at(offset_s, p.temporal_width_s, p.wavelength_m)?;
    let window = GatingWindow::centered(0.5 * offset_s, p.gating_window_s)?;
    let intrinsic = intrinsic_fidelity(&window, &first, &second)?;

    let detection = intrinsic.p_gw.map(|g| channel.total * g);
    let ground = ground_pattern_distribution(detection, &UniformRouting)?;

    let env = p.background.env();
    let click = detector_click_prob(
        env.rate_per_detector_hz,
        env.dark_count_rate_hz,
        p.gating_window_s,
    );
    let noise = background_distribution(&[click; DETECTORS])?;

    let signatures = all_signature_probs(&ground, &noise);
    let eta_tot = total_success(&signatures)?;
    let p_s = legitimate_fraction(&ground, &noise, ClickPattern::SIGNATURES[0])?;
    let fidelity = final_fidelity(p_s, intrinsic.fidelity);

    let metrics = ProtocolMetrics {
        geometry,
        channel,
        p_gw: intrinsic.p_gw,
        detection_efficiency: detection,
        background_click_prob: click,
        f_ic: intrinsic.fidelity,
        p_m_single: signatures[0],
        p_s,
        eta_tot,
        fidelity,
    };
    check_ranges(&metrics)?;
    Ok(metrics)
}

fn check_ranges(m: &ProtocolMetrics) -> Result<()> {
    let probabilities = [
        ("eta_a", m.channel.atmospheric),
        ("eta_w", m.channel.widening_wandering),
        ("eta_ch", m.channel.total),
        ("P_gw1", m.p_gw[0]),
        ("P_gw2", m.p_gw[1]),
        ("eta_1", m.detection_efficiency[0]),
        ("eta_2", m.detection_efficiency[1]),
        ("P_S", m.p_s),
        ("eta_tot", m.eta_tot),
    ];
    for (name, v) in probabilities {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvariantViolation(format!(
                "{name} = {v} outside [0, 1]"
            )));
        }
    }
    if !(0.25..=1.0).contains(&m.fidelity) {
        return Err(Error::InvariantViolation(format!(
            "F = {} outside [1/4, 1]",
            m.fidelity
        )));
    }
    Ok(())
}

const GH_NODES: usize = 20;

/// Nodes and weights of `n`-point Gauss-Hermite quadrature (weight
/// `exp(-x^2)`), by Newton iteration on the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let pi_quarter = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0].0,
            3 => 1.91 * z - 0.91 * nodes[1].0,
            _ => 2.0 * z - nodes[i - 2].0,
        };
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pi_quarter, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            derivative = (2.0 * n as f64).sqrt() * p2;
            let step = p1 / derivative;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / (derivative * derivative);
        nodes[i] = (z, w);
        nodes[n - 1 - i] = (-z, w);
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    const KM: f64 = 1000.0;

    pub(crate) fn ideal() -> ScenarioParams {
        ScenarioParams {
            clock_offset_s: 0.0,
            gating_window_s: 400e-9,
            beam: BeamParams {
                aperture_radius_m: 1e3,
                tracking_error_m: 0.0,
                ..BeamParams::default()
            },
            atmosphere: AtmosphereParams {
                alpha0_per_m: 0.0,
                ..AtmosphereParams::default()
            },
            losses: StaticLosses {
                optics_efficiency: 1.0,
                detector_efficiency: 1.0,
            },
            background: BackgroundConfig {
                night_rate_hz: 0.0,
                dark_count_rate_hz: 0.0,
                ..BackgroundConfig::default()
            },
            ..ScenarioParams::default()
        }
    }

    #[test]
    fn ideal_limit() {
        let m = evaluate_scenario(&ideal()).unwrap();
        assert!((m.fidelity - 1.0).abs() < 1e-9);
        assert!((m.eta_tot - 0.5).abs() < 1e-12);
        assert_eq!(m.p_s, 1.0);
    }

    #[test]
    fn deterministic() {
        let p = ScenarioParams::default();
        assert_eq!(
            evaluate_scenario(&p).unwrap(),
            evaluate_scenario(&p).unwrap()
        );
    }

    #[test]
    fn metrics_within_bounds_for_defaults() {
        let m = evaluate_scenario(&ScenarioParams::default()).unwrap();
        assert!(m.eta_tot > 0.0 && m.eta_tot < 0.5);
        assert!(m.fidelity > 0.25 && m.fidelity < 1.0);
        assert!(m.f_ic > 0.99);
        assert!((m.p_gw[0] - m.p_gw[1]).abs() <= 1e-12 * m.p_gw[0]);
    }

    #[test]
    fn below_horizon_propagates() {
        let p = ScenarioParams {
            altitude_m: 10.0 * KM,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            evaluate_scenario(&p),
            Err(Error::BelowHorizon { .. })
        ));
    }

    #[test]
    fn zero_window_names_the_invariant() {
        let p = ScenarioParams {
            gating_window_s: 0.0,
            ..ScenarioParams::default()
        };
        let e = evaluate_scenario(&p).unwrap_err();
        assert!(e.to_string().contains("gating_window_s > 0"), "{e}");
    }

    #[test]
    fn radiance_model_overrides_direct_rate() {
        let mut b = BackgroundConfig::default();
        let direct = b.env().rate_per_detector_hz;
        b.night_radiance = Some(RadianceModel::moonlit_earth(0.15));
        let modelled = b.env().rate_per_detector_hz;
        assert_ne!(direct, modelled);
        assert_eq!(
            modelled,
            stray_rate(&RadianceModel::moonlit_earth(0.15)).per_detector_hz
        );
    }

    #[test]
    fn gauss_hermite_moments() {
        let nodes = gauss_hermite(GH_NODES);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let m0: f64 = nodes.iter().map(|(_, w)| w).sum();
        let m2: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
        let m4: f64 = nodes.iter().map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - sqrt_pi).abs() < 1e-13);
        assert!((m2 - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((m4 - 0.75 * sqrt_pi).abs() < 1e-12);
    }

    #[test]
    fn offset_spread_reduces_to_point_evaluation_when_tiny() {
        let base = ScenarioParams::default();
        let spread = ScenarioParams {
            clock_offset_spread_s: 1e-15,
            ..base
        };
        let a = evaluate_scenario(&base).unwrap();
        let b = evaluate_scenario(&spread).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-9);
        assert!((a.eta_tot - b.eta_tot).abs() / a.eta_tot < 1e-9);
    }

    #[test]
    fn offset_spread_lowers_intrinsic_fidelity() {
        let base = ScenarioParams {
            clock_offset_s: 0.0,
            ..ScenarioParams::default()
        };
        let spread = ScenarioParams {
            clock_offset_spread_s: 3e-9,
            ..base
        };
        let a = evaluate_scenario(&base).unwrap();
        let b = evaluate_scenario(&spread).unwrap();
        assert!(b.f_ic < a.f_ic);
    }
}
