//! Radial patrol controllers and the pointable-thruster model.
//!
//! The primary controller is bang-bang in the radius: full thrust toward or
//! away from the gyre center outside an annular band, coasting inside it.
//! Two variants are provided. The three-state form thrusts outward below
//! the band and inward above it. The hysteresis form, used in simulation
//! studies, latches on at the outer bound and thrusts inward with a
//! randomly sampled speed until the inner bound releases it; no outward
//! control is applied because the surrounding flow drifts outward.
//!
//! A naive waypoint-pursuit controller serves as the energy-use baseline,
//! and the forced-pendulum torque law models how an underactuated paddling
//! robot realizes a commanded heading as time-averaged thrust.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flow::{FrameError, GyreCenter, RadialFrame};
use crate::vec2::{wrap_angle, Vec2};

/// Minimum band width accepted at configuration time when the caller does
/// not set its own.
pub const DEFAULT_MIN_BAND_WIDTH: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("patrol band width {width:.4} m is below the minimum {min_width:.4} m")]
    BandTooNarrow { width: f64, min_width: f64 },
    #[error("hysteresis control needs a speed range")]
    MissingSpeedRange,
    #[error("speed range ({lo}, {hi}) must satisfy 0 < lo < hi <= max thrust {max_thrust}")]
    InvalidSpeedRange { lo: f64, hi: f64, max_thrust: f64 },
    #[error("parameter {name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("waypoint controller needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// The annular patrol band in mapped circular coordinates.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusRegion {
    pub r_lower: f64,
    pub r_upper: f64,
    pub center: GyreCenter,
}

impl AnnulusRegion {
    pub fn new(
        r_lower: f64,
        r_upper: f64,
        center: GyreCenter,
        min_width: f64,
    ) -> Result<Self, ControlError> {
        if !(r_lower >= 0.0) || !r_lower.is_finite() {
            return Err(ControlError::InvalidParameter {
                name: "r_lower",
                requirement: "nonnegative and finite",
                value: r_lower,
            });
        }
        let width = r_upper - r_lower;
        if !(width >= min_width) {
            return Err(ControlError::BandTooNarrow { width, min_width });
        }
        Ok(Self {
            r_lower,
            r_upper,
            center,
        })
    }

    pub fn width(&self) -> f64 {
        self.r_upper - self.r_lower
    }

    pub fn contains(&self, radius: f64) -> bool {
        radius > self.r_lower && radius < self.r_upper
    }
}

/// One thrust command: a magnitude (a velocity in the kinematic robot
/// model, a force in the inertial one) and a heading in [0, 2*pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub magnitude: f64,
    pub heading: f64,
}

impl ControlCommand {
    pub fn idle(heading: f64) -> Self {
        Self {
            magnitude: 0.0,
            heading: wrap_angle(heading),
        }
    }

    pub fn thrust(magnitude: f64, heading: f64) -> Self {
        Self {
            magnitude,
            heading: wrap_angle(heading),
        }
    }

    pub fn is_active(&self) -> bool {
        self.magnitude > 0.0
    }

    /// The command as a velocity (or force) vector.
    pub fn vector(&self) -> Vec2 {
        Vec2::from_polar(self.magnitude, self.heading)
    }
}

/// What a controller sees each step: time, workspace position, and the
/// mapped circular coordinates of that position.
#[derive(Debug, Clone, Copy)]
pub struct ControlInput {
    pub t: f64,
    pub pos: Vec2,
    pub radius: f64,
    pub theta: f64,
}

/// A feedback controller queried once per integration step. Controllers
/// may carry latch, waypoint, or RNG state, so each simulation owns its
/// instance exclusively.
pub trait Controller {
    fn command(&mut self, input: &ControlInput) -> ControlCommand;
}

/// Which bang-bang variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BangBangMode {
    /// Outward thrust at the inner bound, inward at the outer, idle between.
    ThreeState,
    /// Latched inward thrust from the outer bound to the inner one.
    Hysteresis,
}

#[derive(Debug, Clone)]
pub struct BangBangConfig {
    pub region: AnnulusRegion,
    pub max_thrust: f64,
    pub mode: BangBangMode,
    /// Range the hysteresis variant samples its inward speed from.
    pub speed_range: Option<(f64, f64)>,
}

impl BangBangConfig {
    pub fn new(
        region: AnnulusRegion,
        max_thrust: f64,
        mode: BangBangMode,
        speed_range: Option<(f64, f64)>,
    ) -> Result<Self, ControlError> {
        if !(max_thrust > 0.0) || !max_thrust.is_finite() {
            return Err(ControlError::InvalidParameter {
                name: "max_thrust",
                requirement: "positive and finite",
                value: max_thrust,
            });
        }
        if let Some((lo, hi)) = speed_range {
            if !(lo > 0.0 && lo < hi && hi <= max_thrust) {
                return Err(ControlError::InvalidSpeedRange {
                    lo,
                    hi,
                    max_thrust,
                });
            }
        } else if mode == BangBangMode::Hysteresis {
            return Err(ControlError::MissingSpeedRange);
        }
        Ok(Self {
            region,
            max_thrust,
            mode,
            speed_range,
        })
    }
}

/// Heading pointing radially outward from the center for a robot at
/// bearing `theta`.
fn outward(theta: f64) -> f64 {
    wrap_angle(theta)
}

/// Heading pointing radially inward.
fn inward(theta: f64) -> f64 {
    wrap_angle(theta + std::f64::consts::PI)
}

/// The three-state bang-bang law: full thrust outward at or below the
/// inner bound, idle inside the band, full thrust inward at or above the
/// outer bound. Thrust acts along the center-to-robot ray.
pub fn bang_bang(cfg: &BangBangConfig, radius: f64, theta: f64) -> ControlCommand {
    if radius <= cfg.region.r_lower {
        ControlCommand::thrust(cfg.max_thrust, outward(theta))
    } else if radius >= cfg.region.r_upper {
        ControlCommand::thrust(cfg.max_thrust, inward(theta))
    } else {
        ControlCommand::idle(theta)
    }
}

/// The latched simulation variant: activates when the robot reaches the
/// outer bound and stays active until the inner bound is reached, thrusting
/// inward with a speed drawn uniformly from the configured range. Returns
/// the command and the updated latch state.
pub fn bang_bang_hysteresis<R: Rng + ?Sized>(
    cfg: &BangBangConfig,
    radius: f64,
    theta: f64,
    prev_active: bool,
    rng: &mut R,
) -> Result<(ControlCommand, bool), ControlError> {
    let (lo, hi) = cfg.speed_range.ok_or(ControlError::MissingSpeedRange)?;
    let active = if radius >= cfg.region.r_upper {
        true
    } else if radius <= cfg.region.r_lower {
        false
    } else {
        prev_active
    };
    let cmd = if active {
        ControlCommand::thrust(rng.gen_range(lo..hi), inward(theta))
    } else {
        ControlCommand::idle(theta)
    };
    Ok((cmd, active))
}

/// Stateful wrapper over [`bang_bang`].
#[derive(Debug, Clone)]
pub struct BangBangController {
    cfg: BangBangConfig,
}

impl BangBangController {
    pub fn new(cfg: BangBangConfig) -> Self {
        Self { cfg }
    }
}

impl Controller for BangBangController {
    fn command(&mut self, input: &ControlInput) -> ControlCommand {
        bang_bang(&self.cfg, input.radius, input.theta)
    }
}

/// Stateful wrapper over [`bang_bang_hysteresis`] with a seeded RNG;
/// identical seeds reproduce identical command sequences.
#[derive(Debug, Clone)]
pub struct HysteresisController {
    cfg: BangBangConfig,
    active: bool,
    rng: ChaCha8Rng,
}

impl HysteresisController {
    pub fn new(cfg: BangBangConfig, seed: u64) -> Result<Self, ControlError> {
        if cfg.speed_range.is_none() {
            return Err(ControlError::MissingSpeedRange);
        }
        Ok(Self {
            cfg,
            active: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn is_active(&self) -> bool {
        self.active
    }
}

impl Controller for HysteresisController {
    fn command(&mut self, input: &ControlInput) -> ControlCommand {
        let (cmd, active) =
            bang_bang_hysteresis(&self.cfg, input.radius, input.theta, self.active, &mut self.rng)
                .expect("speed range checked at construction");
        self.active = active;
        cmd
    }
}

/// Naive pursuit of a cyclic waypoint list at full thrust; the energy-use
/// baseline. Always active.
#[derive(Debug, Clone)]
pub struct WaypointController {
    waypoints: Vec<Vec2>,
    capture_radius: f64,
    max_thrust: f64,
    current: usize,
}

impl WaypointController {
    pub fn new(
        waypoints: Vec<Vec2>,
        capture_radius: f64,
        max_thrust: f64,
    ) -> Result<Self, ControlError> {
        if waypoints.len() < 2 {
            return Err(ControlError::TooFewWaypoints(waypoints.len()));
        }
        if !(capture_radius > 0.0) {
            return Err(ControlError::InvalidParameter {
                name: "capture_radius",
                requirement: "positive",
                value: capture_radius,
            });
        }
        if !(max_thrust > 0.0) {
            return Err(ControlError::InvalidParameter {
                name: "max_thrust",
                requirement: "positive",
                value: max_thrust,
            });
        }
        Ok(Self {
            waypoints,
            capture_radius,
            max_thrust,
            current: 0,
        })
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }
}

impl Controller for WaypointController {
    fn command(&mut self, input: &ControlInput) -> ControlCommand {
        if (self.waypoints[self.current] - input.pos).norm() <= self.capture_radius {
            self.current = (self.current + 1) % self.waypoints.len();
        }
        let target = self.waypoints[self.current];
        ControlCommand::thrust(self.max_thrust, (target - input.pos).angle())
    }
}

/// No actuation at all; pure drift.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoControl;

impl Controller for NoControl {
    fn command(&mut self, input: &ControlInput) -> ControlCommand {
        ControlCommand::idle(input.theta)
    }
}

/// Waypoints spaced `spacing` meters apart (by arc length) along the locus
/// of a fixed mapped radius; the orbit the waypoint baseline tries to track.
pub fn waypoints_on_mapped_radius(
    frame: &dyn RadialFrame,
    radius: f64,
    spacing: f64,
    samples: usize,
) -> Result<Vec<Vec2>, ControlError> {
    assert!(samples >= 16, "need a reasonable sampling of the locus");
    assert!(spacing > 0.0, "waypoint spacing must be positive");
    let points: Result<Vec<Vec2>, FrameError> = (0..samples)
        .map(|k| frame.from_polar(radius, std::f64::consts::TAU * k as f64 / samples as f64))
        .collect();
    let points = points?;
    let mut waypoints = vec![points[0]];
    let mut accumulated = 0.0;
    for k in 1..=samples {
        let prev = points[k - 1];
        let next = points[k % samples];
        accumulated += (next - prev).norm();
        if accumulated >= spacing {
            waypoints.push(next);
            accumulated = 0.0;
        }
    }
    Ok(waypoints)
}

// ---------------------------------------------------------------------------
// Forced-pendulum thruster model
// ---------------------------------------------------------------------------

/// Parameters of the forced-pendulum motor controller that lets a paddling
/// robot act as a pointable thruster when averaged over one oscillation.
#[derive(Debug, Clone, Copy)]
pub struct PendulumParams {
    /// Oscillation amplitude gain (N m).
    pub gain: f64,
    /// Oscillation frequency (rad/s).
    pub frequency: f64,
    /// Heading-restoring gain; the square of the frequency, for resonance.
    pub heading_gain: f64,
    /// Averaging window (s); one oscillation, 2*pi over the frequency.
    pub window: f64,
    /// Average thrust produced along the commanded heading (N).
    pub mean_thrust: f64,
}

impl PendulumParams {
    pub fn new(gain: f64, frequency: f64, mean_thrust: f64) -> Result<Self, ControlError> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(ControlError::InvalidParameter {
                name: "frequency",
                requirement: "positive and finite",
                value: frequency,
            });
        }
        if !(mean_thrust >= 0.0) || !mean_thrust.is_finite() {
            return Err(ControlError::InvalidParameter {
                name: "mean_thrust",
                requirement: "nonnegative and finite",
                value: mean_thrust,
            });
        }
        Ok(Self {
            gain,
            frequency,
            heading_gain: frequency * frequency,
            window: std::f64::consts::TAU / frequency,
            mean_thrust,
        })
    }
}

impl Default for PendulumParams {
    /// The experimentally characterized operating point: 15 N m drive at
    /// one oscillation per second, producing 21 mN of averaged thrust.
    fn default() -> Self {
        Self::new(15.0, std::f64::consts::TAU, 0.021).unwrap()
    }
}

/// Motor torque of the forced-pendulum law at time `t` for a robot at
/// orientation `theta` commanded to heading `theta_r`.
pub fn pendulum_torque(p: &PendulumParams, t: f64, theta: f64, theta_r: f64) -> f64 {
    -p.gain * (p.frequency * t).sin() - p.heading_gain * (theta_r - theta).sin()
}

/// Thrust vector the oscillating robot delivers on average over one window
/// while executing `cmd`: the mean thrust along the commanded heading when
/// active, zero otherwise.
pub fn averaged_thruster(p: &PendulumParams, cmd: &ControlCommand) -> Vec2 {
    if cmd.is_active() {
        Vec2::from_polar(p.mean_thrust, cmd.heading)
    } else {
        Vec2::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::angle_difference;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn region(lo: f64, hi: f64) -> AnnulusRegion {
        AnnulusRegion::new(
            lo,
            hi,
            GyreCenter::coincident(Vec2::zero()),
            DEFAULT_MIN_BAND_WIDTH,
        )
        .unwrap()
    }

    fn three_state(lo: f64, hi: f64, max_thrust: f64) -> BangBangConfig {
        BangBangConfig::new(region(lo, hi), max_thrust, BangBangMode::ThreeState, None).unwrap()
    }

    fn hysteresis(lo: f64, hi: f64, speed: (f64, f64)) -> BangBangConfig {
        BangBangConfig::new(
            region(lo, hi),
            speed.1,
            BangBangMode::Hysteresis,
            Some(speed),
        )
        .unwrap()
    }

    #[test]
    fn region_rejects_narrow_bands() {
        let err = AnnulusRegion::new(
            1.0,
            1.02,
            GyreCenter::coincident(Vec2::zero()),
            DEFAULT_MIN_BAND_WIDTH,
        );
        assert!(matches!(err, Err(ControlError::BandTooNarrow { .. })));
    }

    #[test]
    fn bang_bang_idles_inside_the_band() {
        let cfg = three_state(1.0, 2.0, 0.05);
        let cmd = bang_bang(&cfg, 1.5, 0.7);
        assert_eq!(cmd.magnitude, 0.0);
    }

    #[test]
    fn bang_bang_pushes_outward_at_the_inner_bound() {
        let cfg = three_state(1.0, 2.0, 0.05);
        let theta = 0.9;
        let cmd = bang_bang(&cfg, 1.0, theta);
        assert_eq!(cmd.magnitude, 0.05);
        assert_relative_eq!(angle_difference(cmd.heading, theta), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bang_bang_pushes_inward_at_the_outer_bound() {
        let cfg = three_state(1.0, 2.0, 0.05);
        let theta = 0.9;
        let cmd = bang_bang(&cfg, 2.0, theta);
        assert_eq!(cmd.magnitude, 0.05);
        assert_relative_eq!(
            angle_difference(cmd.heading, theta + PI),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hysteresis_latches_at_outer_and_releases_at_inner() {
        let cfg = hysteresis(1.0, 2.0, (0.01, 0.04));
        let mut rng = ChaCha8Rng::seed_from_u64(7);

        let (cmd, active) = bang_bang_hysteresis(&cfg, 2.0, 0.3, false, &mut rng).unwrap();
        assert!(active);
        assert!(cmd.magnitude >= 0.01 && cmd.magnitude < 0.04);
        assert_relative_eq!(angle_difference(cmd.heading, 0.3 + PI), 0.0, epsilon = 1e-12);

        // Stays active inside the band.
        let (_, active) = bang_bang_hysteresis(&cfg, 1.5, 0.3, active, &mut rng).unwrap();
        assert!(active);

        // Releases at the inner bound.
        let (cmd, active) = bang_bang_hysteresis(&cfg, 1.0, 0.3, active, &mut rng).unwrap();
        assert!(!active);
        assert_eq!(cmd.magnitude, 0.0);

        // Inactive in the band stays inactive.
        let (cmd, active) = bang_bang_hysteresis(&cfg, 1.5, 0.3, active, &mut rng).unwrap();
        assert!(!active);
        assert_eq!(cmd.magnitude, 0.0);
    }

    #[test]
    fn hysteresis_requires_a_speed_range() {
        let cfg = BangBangConfig::new(
            region(1.0, 2.0),
            0.04,
            BangBangMode::Hysteresis,
            None,
        );
        assert!(matches!(cfg, Err(ControlError::MissingSpeedRange)));
    }

    #[test]
    fn identical_seeds_reproduce_identical_commands() {
        let cfg = hysteresis(1.0, 2.0, (0.01, 0.04));
        let mut a = HysteresisController::new(cfg.clone(), 42).unwrap();
        let mut b = HysteresisController::new(cfg, 42).unwrap();
        for k in 0..200 {
            let r = 1.0 + 1.1 * ((k as f64) * 0.37).sin().abs();
            let input = ControlInput {
                t: k as f64 * 0.01,
                pos: Vec2::from_polar(r, 0.1 * k as f64),
                radius: r,
                theta: 0.1 * k as f64,
            };
            assert_eq!(a.command(&input), b.command(&input));
        }
    }

    #[test]
    fn waypoint_controller_advances_on_capture_and_never_idles() {
        let waypoints = vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ];
        let mut c = WaypointController::new(waypoints.clone(), 0.1, 0.05).unwrap();
        let input = ControlInput {
            t: 0.0,
            pos: Vec2::new(0.95, 0.0),
            radius: 0.95,
            theta: 0.0,
        };
        let cmd = c.command(&input);
        assert_eq!(c.current_index(), 1);
        assert_eq!(cmd.magnitude, 0.05);
        // Aimed at the next waypoint.
        let expected = (waypoints[1] - input.pos).angle();
        assert_relative_eq!(angle_difference(cmd.heading, expected), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn waypoint_controller_rejects_short_lists() {
        assert!(matches!(
            WaypointController::new(vec![Vec2::zero()], 0.1, 0.05),
            Err(ControlError::TooFewWaypoints(1))
        ));
    }

    #[test]
    fn pendulum_torque_matches_printed_law() {
        let p = PendulumParams::default();
        // Both sine terms vanish.
        assert_eq!(pendulum_torque(&p, 0.0, 1.0, 1.0), 0.0);
        // Quarter period with aligned heading: -K sin(pi/2).
        let u = pendulum_torque(&p, 0.25, 0.4, 0.4);
        assert_relative_eq!(u, -15.0, epsilon = 1e-12);
        // Arbitrary inputs against a direct evaluation.
        let (t, theta, theta_r) = (0.13_f64, 0.7_f64, -0.4_f64);
        let expected =
            -p.gain * (p.frequency * t).sin() - p.heading_gain * (theta_r - theta).sin();
        assert_relative_eq!(pendulum_torque(&p, t, theta, theta_r), expected);
    }

    #[test]
    fn pendulum_parameters_are_tied_together() {
        let p = PendulumParams::new(10.0, 3.0, 0.02).unwrap();
        assert_relative_eq!(p.heading_gain, 9.0);
        assert_relative_eq!(p.window * p.frequency, std::f64::consts::TAU);
    }

    #[test]
    fn pendulum_torque_is_periodic_in_time() {
        let p = PendulumParams::default();
        let u0 = pendulum_torque(&p, 0.37, 0.2, 1.1);
        let u1 = pendulum_torque(&p, 0.37 + p.window, 0.2, 1.1);
        assert_relative_eq!(u0, u1, epsilon = 1e-9);
    }

    #[test]
    fn averaged_thruster_points_along_the_command() {
        let p = PendulumParams::default();
        let idle = averaged_thruster(&p, &ControlCommand::idle(0.3));
        assert_eq!(idle, Vec2::zero());
        let thrust = averaged_thruster(&p, &ControlCommand::thrust(0.04, 0.0));
        assert_relative_eq!(thrust.x, 0.021, epsilon = 1e-12);
        assert_relative_eq!(thrust.y, 0.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn three_state_output_is_exactly_zero_or_max(
            r in 0.0_f64..3.0,
            theta in 0.0_f64..std::f64::consts::TAU,
        ) {
            let cfg = three_state(1.0, 2.0, 0.05);
            let cmd = bang_bang(&cfg, r, theta);
            prop_assert!(cmd.magnitude == 0.0 || cmd.magnitude == 0.05);
        }

        #[test]
        fn hysteresis_latch_changes_only_at_band_crossings(
            radii in proptest::collection::vec(0.5_f64..2.5, 1..200),
            seed in 0_u64..1000,
        ) {
            let cfg = hysteresis(1.0, 2.0, (0.01, 0.04));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut active = false;
            for r in radii {
                let (_, next) = bang_bang_hysteresis(&cfg, r, 0.0, active, &mut rng).unwrap();
                if next != active {
                    prop_assert!(r >= 2.0 || r <= 1.0, "latch flipped inside the band at r = {r}");
                }
                active = next;
            }
        }
    }
}
