//! Prints the metrics at the two headline operating points under the defaults.

use uplink_core::{evaluate_scenario, ScenarioParams};

fn main() -> uplink_core::Result<()> {
    for (h_km, d_km) in [(500.0, 1000.0), (200.0, 300.0)] {
        let p = ScenarioParams {
            altitude_m: h_km * 1e3,
            ground_separation_m: d_km * 1e3,
            ..ScenarioParams::default()
        };
        let m = evaluate_scenario(&p)?;
        println!(
            "h={h_km} km D_G={d_km} km: eta_ch={:.4e} p_bg={:.3e} F_ic={:.5} P_S={:.4} eta_tot={:.4e} F={:.4}",
            m.detection_efficiency[0], m.background_click_prob, m.f_ic, m.p_s, m.eta_tot, m.fidelity
        );
    }
    Ok(())
}
