// Scratch dress rehearsal of the racetrack replication run (development aid).

use std::sync::Arc;
use std::time::Instant;

use gyre_patrol::control::{
    AnnulusRegion, BangBangConfig, BangBangMode, HysteresisController, WaypointController,
    DEFAULT_MIN_BAND_WIDTH,
};
use gyre_patrol::dynamics::{control_effort, detect_cycles, integrate, SimOptions};
use gyre_patrol::flow::{FlowField, OrbitalDynamics, RadialFrame};
use gyre_patrol::geometry::{
    stadium_boundary_points, CircleMapFrame, CircleMapParams, ImplicitBoundary,
    PotentialFieldParams, PotentialFlow, ShapeNavParams,
};
use gyre_patrol::control::waypoints_on_mapped_radius;
use gyre_patrol::Vec2;

fn main() {
    let t0 = Instant::now();
    let points = stadium_boundary_points(4.5, 3.0, 64).unwrap();
    let boundary = Arc::new(ImplicitBoundary::fit(&points, &[(Vec2::zero(), -1.0)]).unwrap());
    let nav = ShapeNavParams::covering(&boundary);
    let params = CircleMapParams::new(Vec2::zero(), 1.5).unwrap();
    let frame = CircleMapFrame::new(params, boundary.clone());

    // Calibrate the angular gain on the lower band edge.
    let k_r = 0.01;
    let probe_gains = PotentialFieldParams::new(k_r, 1.0).unwrap();
    let probe_flow = PotentialFlow::new(boundary.clone(), probe_gains, nav, Vec2::zero()).unwrap();
    let od = OrbitalDynamics::new(&probe_flow, &frame);
    let (r_lo, r_hi) = (0.9, 1.1);
    let k_theta = od.orbit_period(r_lo, 512).unwrap() / 42.67;
    println!("calibrated k_theta = {k_theta:.6}");

    let gains = PotentialFieldParams::new(k_r, k_theta).unwrap();
    let flow = PotentialFlow::new(boundary.clone(), gains, nav, Vec2::zero()).unwrap();
    let od = OrbitalDynamics::new(&flow, &frame);
    let t_lo = od.orbit_period(r_lo, 512).unwrap();
    let t_hi = od.orbit_period(r_hi, 512).unwrap();
    println!("band periods: ({t_lo:.3}, {t_hi:.3}) s, setup {:?}", t0.elapsed());

    // Widened bounds for sampled-extreme slack.
    let delta = (0.04 + 0.001) * 0.01;
    let t_lo_slack = od.orbit_period(r_lo - delta, 512).unwrap();
    let t_hi_slack = od.orbit_period(r_hi + delta, 512).unwrap();
    println!("slack bounds: ({t_lo_slack:.3}, {t_hi_slack:.3})");

    let region = AnnulusRegion::new(r_lo, r_hi, flow.center(), DEFAULT_MIN_BAND_WIDTH).unwrap();
    let cfg = BangBangConfig::new(region, 0.04, BangBangMode::Hysteresis, Some((0.01, 0.04)))
        .unwrap();
    let mut controller = HysteresisController::new(cfg, 7).unwrap();
    let opts = SimOptions::new(0.01, 5000.0).unwrap().with_workspace_radius(1.45);
    let start = frame.from_polar(1.0, 0.0).unwrap();
    let t1 = Instant::now();
    let traj = integrate(&flow, &frame, &mut controller, start, &opts).unwrap();
    println!("5000 s sim: {:?}", t1.elapsed());

    let cycles = detect_cycles(&traj);
    let periods: Vec<f64> = cycles.iter().map(|c| c.period).collect();
    let min = periods.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = periods.iter().cloned().fold(0.0_f64, f64::max);
    let r_min = cycles.iter().map(|c| c.r_min).fold(f64::INFINITY, f64::min);
    let r_max = cycles.iter().map(|c| c.r_max).fold(0.0_f64, f64::max);
    let effort = control_effort(&traj, None).unwrap();
    println!(
        "{} cycles, T in [{min:.3}, {max:.3}], r in [{r_min:.4}, {r_max:.4}], effort {effort:.4}",
        cycles.len()
    );
    let inside = periods
        .iter()
        .filter(|t| **t > t_lo_slack && **t < t_hi_slack)
        .count();
    println!("cycles inside slack bounds: {inside}/{}", cycles.len());

    // Waypoint baseline at the band middle.
    let waypoints = waypoints_on_mapped_radius(&frame, 1.0, 0.5, 2048).unwrap();
    println!("{} waypoints", waypoints.len());
    let mut wp = WaypointController::new(waypoints, 0.1, 0.04).unwrap();
    let opts = SimOptions::new(0.01, 600.0).unwrap().with_workspace_radius(1.45);
    let t2 = Instant::now();
    let wp_traj = integrate(&flow, &frame, &mut wp, start, &opts).unwrap();
    println!("waypoint 600 s sim: {:?}", t2.elapsed());
    let wp_cycles = detect_cycles(&wp_traj);
    let wp_effort = control_effort(&wp_traj, None).unwrap();
    println!(
        "waypoint: {} cycles, effort {wp_effort}, mean T {:.2}",
        wp_cycles.len(),
        wp_cycles.iter().map(|c| c.period).sum::<f64>() / wp_cycles.len().max(1) as f64
    );
    println!("total {:?}", t0.elapsed());
}
