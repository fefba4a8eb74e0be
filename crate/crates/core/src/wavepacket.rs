//! Gaussian photon wavepackets, detector time-gating and the intrinsic
//! fidelity of the swapped pair under temporal mode mismatch.
//!
//! Positions are `c * t`: a packet arriving at time `t` is centred at `c t`,
//! and a gating window `[t_min, t_max]` integrates over `[c t_min, c t_max]`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{require_positive, Error, Result};
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Smallest gating probability for which the intrinsic fidelity is defined.
pub const DEFAULT_P_GW_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub center_m: f64,
    pub temporal_width_s: f64,
    pub wavelength_m: f64,
}

impl WavepacketSpec {
    pub fn new(center_m: f64, temporal_width_s: f64, wavelength_m: f64) -> Result<Self> {
        require_positive("temporal_width_s", temporal_width_s)?;
        require_positive("wavelength_m", wavelength_m)?;
        Ok(WavepacketSpec {
            center_m,
            temporal_width_s,
            wavelength_m,
        })
    }

    /// Packet arriving at `arrival_s`.
    pub fn arriving_at(arrival_s: f64, temporal_width_s: f64, wavelength_m: f64) -> Result<Self> {
        Self::new(SPEED_OF_LIGHT * arrival_s, temporal_width_s, wavelength_m)
    }

    pub fn spatial_width_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.temporal_width_s
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength_m
    }

    /// Gaussian envelope `|psi(x)|`.
    fn envelope(&self, x: f64) -> f64 {
        let sigma = self.spatial_width_m();
        let u = (x - self.center_m) / sigma;
        (2.0 * PI * sigma * sigma).powf(-0.25) * (-0.25 * u * u).exp()
    }

    /// Points where quadrature should split so the peak is always sampled.
    fn landmarks(&self) -> [f64; 7] {
        let s = self.spatial_width_m();
        let c = self.center_m;
        [
            c - 10.0 * s,
            c - 4.0 * s,
            c - s,
            c,
            c + s,
            c + 4.0 * s,
            c + 10.0 * s,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatingWindow {
    pub open_s: f64,
    pub close_s: f64,
}

impl GatingWindow {
    pub fn new(open_s: f64, close_s: f64) -> Result<Self> {
        if close_s > open_s {
            Ok(GatingWindow { open_s, close_s })
        } else {
            Err(Error::invalid(
                "gating_window_s",
                "gating_window_s > 0",
                close_s - open_s,
            ))
        }
    }

    /// Window of length `length_s` centred on `center_s`.
    pub fn centered(center_s: f64, length_s: f64) -> Result<Self> {
        require_positive("gating_window_s", length_s)?;
        Self::new(center_s - 0.5 * length_s, center_s + 0.5 * length_s)
    }

    pub fn length_s(&self) -> f64 {
        self.close_s - self.open_s
    }

    pub fn bounds_m(&self) -> (f64, f64) {
        (SPEED_OF_LIGHT * self.open_s, SPEED_OF_LIGHT * self.close_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    pub delta_t_s: f64,
}

impl MismatchSpec {
    pub fn path_difference_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.delta_t_s
    }
}

/// `psi(x)` of a normalised Gaussian wavepacket.
pub fn amplitude(x: f64, p: &WavepacketSpec) -> Complex64 {
    let phase = (p.wavenumber() * (x - p.center_m)).rem_euclid(TAU);
    Complex64::from_polar(p.envelope(x), phase)
}

fn window_points(w: &GatingWindow, packets: &[&WavepacketSpec]) -> Vec<f64> {
    let (lo, hi) = w.bounds_m();
    let mut pts = vec![lo, hi];
    for p in packets {
        pts.extend(p.landmarks().iter().copied().filter(|&x| x > lo && x < hi));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Probability that the packet falls inside the gating window.
pub fn gating_probability(w: &GatingWindow, p: &WavepacketSpec) -> Result<f64> {
    gating_probability_with(w, p, Tolerance::default())
}

pub fn gating_probability_with(
    w: &GatingWindow,
    p: &WavepacketSpec,
    tol: Tolerance,
) -> Result<f64> {
    let pts = window_points(w, &[p]);
    let r = integrate_with_breakpoints(
        |x| {
            let e = p.envelope(x);
            e * e
        },
        &pts,
        tol,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Windowed inner product `∫ psi1 psi2* dx`.
///
/// With equal wavenumbers the carrier phases combine into the constant
/// `exp(ik(x02 - x01))`, so the real and imaginary parts are the envelope
/// product scaled by its cosine and sine. Forming the product from two
/// `amplitude` calls would instead cancel phases of order `k x ~ 1e8` rad.
pub fn overlap(w: &GatingWindow, p1: &WavepacketSpec, p2: &WavepacketSpec) -> Result<Complex64> {
    overlap_with(w, p1, p2, Tolerance::default())
}

pub fn overlap_with(
    w: &GatingWindow,
    p1: &WavepacketSpec,
    p2: &WavepacketSpec,
    tol: Tolerance,
) -> Result<Complex64> {
    if p1.wavelength_m != p2.wavelength_m {
        return Err(Error::WavelengthMismatch(p1.wavelength_m, p2.wavelength_m));
    }
    let phase = (p1.wavenumber() * (p2.center_m - p1.center_m)).rem_euclid(TAU);
    let (sin, cos) = phase.sin_cos();
    let pts = window_points(w, &[p1, p2]);
    let envelope = |x: f64| p1.envelope(x) * p2.envelope(x);
    let re = integrate_with_breakpoints(|x| envelope(x) * cos, &pts, tol)?;
    let im = integrate_with_breakpoints(|x| envelope(x) * sin, &pts, tol)?;
    Ok(Complex64::new(re.value, im.value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicFidelity {
    pub fidelity: f64,
    pub p_gw: [f64; 2],
}

/// Fidelity of the swapped pair from mode mismatch alone, with the gating
/// probabilities of both packets.
pub fn intrinsic_fidelity(
    w: &GatingWindow,
    p1: &WavepacketSpec,
    p2: &WavepacketSpec,
) -> Result<IntrinsicFidelity> {
    intrinsic_fidelity_with_floor(w, p1, p2, DEFAULT_P_GW_FLOOR)
}

pub fn intrinsic_fidelity_with_floor(
    w: &GatingWindow,
    p1: &WavepacketSpec,
    p2: &WavepacketSpec,
    floor: f64,
) -> Result<IntrinsicFidelity> {
    let ov = overlap(w, p1, p2)?;
    let g1 = gating_probability(w, p1)?;
    let g2 = gating_probability(w, p2)?;
    for g in [g1, g2] {
        if g < floor {
            return Err(Error::DegenerateWindow { p_gw: g, floor });
        }
    }
    // Cauchy-Schwarz bounds the ratio by one; rounding can nudge it over.
    let ratio = (ov.norm_sqr() / (g1 * g2)).min(1.0);
    Ok(IntrinsicFidelity {
        fidelity: 0.5 + 0.5 * ratio,
        p_gw: [g1, g2],
    })
}
