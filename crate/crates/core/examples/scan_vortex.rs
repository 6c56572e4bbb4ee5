// Scratch probe of the vortex period-bound suite (development aid).

use std::time::Instant;

use gyre_patrol::control::{
    AnnulusRegion, BangBangConfig, BangBangMode, HysteresisController, DEFAULT_MIN_BAND_WIDTH,
};
use gyre_patrol::dynamics::{detect_cycles, integrate, SimOptions};
use gyre_patrol::flow::{FlowField, OmegaProfile, PolarFrame, Vortex, VortexParams};
use gyre_patrol::Vec2;

fn main() {
    let t0 = Instant::now();
    let flow = Vortex::new(
        VortexParams::new(OmegaProfile::reciprocal(1.0, 0.0).unwrap(), -0.02).unwrap(),
    );
    let frame = PolarFrame::new(Vec2::zero());
    let tau = std::f64::consts::TAU;
    let (t_lo, t_hi) = (tau, 2.0 * tau);

    let mut total_cycles = 0;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = 0.0_f64;
    for seed in 0..20u64 {
        let region = AnnulusRegion::new(1.0, 2.0, flow.center(), DEFAULT_MIN_BAND_WIDTH).unwrap();
        let cfg =
            BangBangConfig::new(region, 0.09, BangBangMode::Hysteresis, Some((0.05, 0.09)))
                .unwrap();
        let mut controller = HysteresisController::new(cfg, seed).unwrap();
        let opts = SimOptions::new(0.01, 5000.0).unwrap().with_workspace_radius(4.0);
        let traj = integrate(&flow, &frame, &mut controller, Vec2::new(1.5, 0.0), &opts).unwrap();
        let cycles = detect_cycles(&traj);
        for c in &cycles {
            worst_low = worst_low.min(c.period);
            worst_high = worst_high.max(c.period);
        }
        total_cycles += cycles.len();
    }
    println!(
        "20 seeds, {total_cycles} cycles, periods in [{worst_low:.5}, {worst_high:.5}]; \
         bounds ({t_lo:.5}, {t_hi:.5}), slack 0.01"
    );
    println!(
        "all inside with slack: {}",
        worst_low > t_lo - 0.01 && worst_high < t_hi + 0.01
    );
    println!("elapsed {:?}", t0.elapsed());
}
