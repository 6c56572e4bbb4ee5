//! Trajectory integration of a robot riding a flow under a controller,
//! cycle detection about the gyre center, and per-cycle statistics.
//!
//! The default robot model is kinematic: the commanded thrust adds directly
//! to the flow velocity, which matches simulation studies where the
//! controller provides a velocity. A first-order inertial model is
//! available for closer correspondence with a real paddling robot: the
//! velocity relaxes toward the flow plus thrust over drag with a
//! configurable time constant, and the thrust vector updates once per
//! averaging window of the pendulum thruster.

use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::control::{averaged_thruster, ControlCommand, ControlInput, Controller, PendulumParams};
use crate::flow::{FlowError, FlowField, FrameError, GyreCenter, RadialFrame};
use crate::vec2::{angle_difference, Vec2};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(
        "robot left the workspace at t = {t:.3} s, position ({x:.4}, {y:.4}), \
         mapped radius {radius:.4}"
    )]
    WorkspaceExit {
        t: f64,
        x: f64,
        y: f64,
        radius: f64,
        trajectory: Box<Trajectory>,
    },
    #[error("effort window has zero duration")]
    ZeroDurationWindow,
    #[error("invalid integration settings: {0}")]
    InvalidSettings(String),
}

/// Robot state at one instant. The velocity is carried only by the
/// inertial model; the kinematic model has no velocity state of its own.
#[derive(Debug, Clone, Copy)]
pub struct RobotState {
    pub t: f64,
    pub pos: Vec2,
    pub vel: Option<Vec2>,
}

/// A time-ordered record of one simulation run: states, the commands the
/// controller issued at each state, and the mapped circular coordinates of
/// each position.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<RobotState>,
    pub controls: Vec<ControlCommand>,
    /// Mapped (r, theta) of each state, as seen by the controller.
    pub polar: Vec<(f64, f64)>,
    pub center: GyreCenter,
    /// Free-form snapshot of the configuration that produced the run.
    pub meta: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.states.first(), self.states.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Writes the run as CSV with the fixed header
    /// `t,x1,x2,r,theta,u,theta_r,active`, one row per `every` steps.
    pub fn write_csv<W: Write>(&self, mut out: W, every: usize) -> io::Result<()> {
        let every = every.max(1);
        writeln!(out, "t,x1,x2,r,theta,u,theta_r,active")?;
        for k in (0..self.states.len()).step_by(every) {
            let s = &self.states[k];
            let (r, theta) = self.polar[k];
            let c = &self.controls[k];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.t,
                s.pos.x,
                s.pos.y,
                r,
                theta,
                c.magnitude,
                c.heading,
                u8::from(c.is_active())
            )?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path, every: usize) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(io::BufWriter::new(file), every)
    }
}

/// One completed revolution about the gyre center.
#[derive(Debug, Clone, Copy)]
pub struct CycleRecord {
    /// Time to complete the revolution (s).
    pub period: f64,
    /// Smallest mapped radius sampled during the cycle (m).
    pub r_min: f64,
    /// Largest mapped radius sampled during the cycle (m).
    pub r_max: f64,
    /// Fraction of the cycle the controller was active, in [0, 1].
    pub effort_fraction: f64,
    /// Index of the first trajectory state in the cycle.
    pub start_index: usize,
    /// Index of the state at which the revolution completed.
    pub end_index: usize,
}

/// Robot motion model used by [`integrate`].
#[derive(Debug, Clone)]
pub enum MotionModel {
    /// Commanded thrust is a velocity added to the flow.
    Kinematic,
    /// First-order response: the velocity relaxes toward flow plus
    /// thrust over drag with the given time constant, and the thrust
    /// vector is held constant over each pendulum averaging window.
    Inertial {
        /// Relaxation time constant (s); mass over drag.
        time_constant: f64,
        /// Linear drag coefficient (N s/m).
        drag: f64,
        thruster: PendulumParams,
    },
}

/// Settings for one integration run.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub dt: f64,
    pub t_end: f64,
    pub motion: MotionModel,
    /// Abort with a diagnostic when the mapped radius exceeds this; leaving
    /// the tank is a modeling failure worth surfacing, not clamping.
    pub workspace_radius: Option<f64>,
    /// Configuration snapshot copied into the trajectory.
    pub meta: String,
}

impl SimOptions {
    pub fn new(dt: f64, t_end: f64) -> Result<Self, DynamicsError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynamicsError::InvalidSettings(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_end > dt) || !t_end.is_finite() {
            return Err(DynamicsError::InvalidSettings(format!(
                "t_end ({t_end}) must exceed dt ({dt})"
            )));
        }
        Ok(Self {
            dt,
            t_end,
            motion: MotionModel::Kinematic,
            workspace_radius: None,
            meta: String::new(),
        })
    }

    pub fn with_motion(mut self, motion: MotionModel) -> Self {
        self.motion = motion;
        self
    }

    pub fn with_workspace_radius(mut self, radius: f64) -> Self {
        self.workspace_radius = Some(radius);
        self
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }
}

fn rk4_kinematic(
    flow: &dyn FlowField,
    pos: Vec2,
    thrust_velocity: Vec2,
    dt: f64,
) -> Result<Vec2, FlowError> {
    let f = |p: Vec2| -> Result<Vec2, FlowError> { Ok(flow.velocity(p)? + thrust_velocity) };
    let k1 = f(pos)?;
    let k2 = f(pos + k1 * (0.5 * dt))?;
    let k3 = f(pos + k2 * (0.5 * dt))?;
    let k4 = f(pos + k3 * dt)?;
    Ok(pos + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0))
}

#[allow(clippy::too_many_arguments)]
fn rk4_inertial(
    flow: &dyn FlowField,
    pos: Vec2,
    vel: Vec2,
    thrust: Vec2,
    time_constant: f64,
    drag: f64,
    dt: f64,
) -> Result<(Vec2, Vec2), FlowError> {
    let accel = |p: Vec2, v: Vec2| -> Result<Vec2, FlowError> {
        Ok((flow.velocity(p)? + thrust / drag - v) / time_constant)
    };
    let (p0, v0) = (pos, vel);
    let a1 = accel(p0, v0)?;
    let (p1, v1) = (p0 + v0 * (0.5 * dt), v0 + a1 * (0.5 * dt));
    let a2 = accel(p1, v1)?;
    let (p2, v2) = (p0 + v1 * (0.5 * dt), v0 + a2 * (0.5 * dt));
    let a3 = accel(p2, v2)?;
    let (p3, v3) = (p0 + v2 * dt, v0 + a3 * dt);
    let a4 = accel(p3, v3)?;
    Ok((
        p0 + (v0 + (v1 + v2) * 2.0 + v3) * (dt / 6.0),
        v0 + (a1 + (a2 + a3) * 2.0 + a4) * (dt / 6.0),
    ))
}

/// Integrates the robot-in-flow dynamics with fixed-step RK4. The
/// controller is queried once per step with the current mapped (r, theta);
/// the command is held constant across the step. The returned trajectory
/// has one control per state; the final command is recorded but never
/// applied.
pub fn integrate(
    flow: &dyn FlowField,
    frame: &dyn RadialFrame,
    controller: &mut dyn Controller,
    start: Vec2,
    opts: &SimOptions,
) -> Result<Trajectory, DynamicsError> {
    // Uniform steps of dt, plus one shorter tail step when dt does not
    // divide t_end, so the run ends exactly at t_end.
    let ratio = opts.t_end / opts.dt;
    let (full_steps, tail) = if (ratio - ratio.round()).abs() < 1e-9 {
        (ratio.round() as usize, None)
    } else {
        let f = ratio.floor() as usize;
        (f, Some(opts.t_end - f as f64 * opts.dt))
    };
    let steps = full_steps + usize::from(tail.is_some());
    if steps == 0 {
        return Err(DynamicsError::InvalidSettings(
            "run is shorter than one step".into(),
        ));
    }

    let mut trajectory = Trajectory {
        states: Vec::with_capacity(steps + 1),
        controls: Vec::with_capacity(steps + 1),
        polar: Vec::with_capacity(steps + 1),
        center: flow.center(),
        meta: opts.meta.clone(),
    };

    let mut pos = start;
    let mut vel = match &opts.motion {
        MotionModel::Kinematic => None,
        MotionModel::Inertial { .. } => Some(flow.velocity(start)?),
    };
    let mut held_thrust = Vec2::zero();
    let mut window_end = 0.0;

    for k in 0..=steps {
        let t = if k <= full_steps {
            k as f64 * opts.dt
        } else {
            opts.t_end
        };
        let (radius, theta) = frame.to_polar(pos)?;
        let cmd = controller.command(&ControlInput {
            t,
            pos,
            radius,
            theta,
        });
        trajectory.states.push(RobotState { t, pos, vel });
        trajectory.controls.push(cmd);
        trajectory.polar.push((radius, theta));

        if let Some(limit) = opts.workspace_radius {
            if radius > limit {
                return Err(DynamicsError::WorkspaceExit {
                    t,
                    x: pos.x,
                    y: pos.y,
                    radius,
                    trajectory: Box::new(trajectory),
                });
            }
        }
        if k == steps {
            break;
        }
        let h = if k < full_steps {
            opts.dt
        } else {
            tail.expect("tail step exists when k reaches full_steps")
        };

        match &opts.motion {
            MotionModel::Kinematic => {
                pos = rk4_kinematic(flow, pos, cmd.vector(), h)?;
            }
            MotionModel::Inertial {
                time_constant,
                drag,
                thruster,
            } => {
                if t >= window_end {
                    held_thrust = averaged_thruster(thruster, &cmd);
                    window_end = t + thruster.window;
                }
                let (p, v) = rk4_inertial(
                    flow,
                    pos,
                    vel.expect("inertial state carries a velocity"),
                    held_thrust,
                    *time_constant,
                    *drag,
                    h,
                )?;
                pos = p;
                vel = Some(v);
            }
        }
    }

    Ok(trajectory)
}

/// Splits a trajectory into completed revolutions about the gyre center.
///
/// The bearing is unwrapped continuously (assuming less than a half turn
/// per step) and one record is emitted per accumulated two pi of net
/// angular displacement, in either rotation sense. The crossing time is
/// interpolated linearly between samples, so cycle boundaries carry an
/// error of order one step. A partial final cycle is discarded.
pub fn detect_cycles(trajectory: &Trajectory) -> Vec<CycleRecord> {
    let n = trajectory.states.len();
    if n < 2 {
        return Vec::new();
    }
    let tau = std::f64::consts::TAU;

    let mut unwrapped = Vec::with_capacity(n);
    unwrapped.push(trajectory.polar[0].1);
    for k in 1..n {
        let step = angle_difference(trajectory.polar[k].1, trajectory.polar[k - 1].1);
        unwrapped.push(unwrapped[k - 1] + step);
    }

    let mut cycles = Vec::new();
    let mut reference = unwrapped[0];
    let mut start_t = trajectory.states[0].t;
    let mut start_index = 0;
    let (mut r_min, mut r_max) = (trajectory.polar[0].0, trajectory.polar[0].0);
    let mut active_time = 0.0;

    for k in 1..n {
        let dt_step = trajectory.states[k].t - trajectory.states[k - 1].t;
        if trajectory.controls[k - 1].is_active() {
            active_time += dt_step;
        }
        let r = trajectory.polar[k].0;
        r_min = r_min.min(r);
        r_max = r_max.max(r);

        let swept = (unwrapped[k] - reference).abs();
        if swept >= tau {
            let swept_before = (unwrapped[k - 1] - reference).abs();
            let fraction = if swept > swept_before {
                (tau - swept_before) / (swept - swept_before)
            } else {
                1.0
            };
            let crossing_t = trajectory.states[k - 1].t + fraction * dt_step;
            let period = crossing_t - start_t;
            cycles.push(CycleRecord {
                period,
                r_min,
                r_max,
                effort_fraction: (active_time / period).clamp(0.0, 1.0),
                start_index,
                end_index: k,
            });

            reference += tau * (unwrapped[k] - reference).signum();
            start_t = crossing_t;
            start_index = k;
            r_min = r;
            r_max = r;
            active_time = 0.0;
        }
    }
    cycles
}

/// Fraction of time the controller was active over the whole run, or over
/// one detected cycle. Counts whole steps, so the cycle-windowed figure
/// carries an error of order one step.
pub fn control_effort(
    trajectory: &Trajectory,
    window: Option<&CycleRecord>,
) -> Result<f64, DynamicsError> {
    if trajectory.states.len() < 2 {
        return Err(DynamicsError::ZeroDurationWindow);
    }
    let (start, end, duration) = match window {
        Some(cycle) => (cycle.start_index, cycle.end_index, cycle.period),
        None => (0, trajectory.states.len() - 1, trajectory.duration()),
    };
    if !(duration > 0.0) {
        return Err(DynamicsError::ZeroDurationWindow);
    }
    let mut active = 0.0;
    for k in start..end {
        if trajectory.controls[k].is_active() {
            active += trajectory.states[k + 1].t - trajectory.states[k].t;
        }
    }
    Ok((active / duration).clamp(0.0, 1.0))
}
