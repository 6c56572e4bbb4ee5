//! Assembly of flows, frames, regions, and controllers from a config file.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use gyre_patrol::control::{
    waypoints_on_mapped_radius, AnnulusRegion, BangBangConfig, BangBangController, BangBangMode,
    Controller, HysteresisController, NoControl, PendulumParams, WaypointController,
    DEFAULT_MIN_BAND_WIDTH,
};
use gyre_patrol::dynamics::{MotionModel, SimOptions};
use gyre_patrol::flow::{
    DoubleGyre, DoubleGyreParams, FlowField, OmegaProfile, OrbitalDynamics, PolarFrame,
    RadialBand, RadialFrame, StillWater, Vortex, VortexParams,
};
use gyre_patrol::geometry::{
    load_boundary_constraints, stadium_boundary_points, CircleMapFrame, CircleMapParams,
    ImplicitBoundary, PotentialFieldParams, PotentialFlow, ShapeNavParams,
};
use gyre_patrol::Vec2;

use crate::config::{ConfigFile, Section};

/// Everything the commands need to run simulations in one environment.
pub struct Experiment {
    pub flow: Arc<dyn FlowField>,
    pub frame: Arc<dyn RadialFrame>,
    pub boundary: Option<Arc<ImplicitBoundary>>,
    pub nav: Option<ShapeNavParams>,
    pub flow_label: String,
}

impl Experiment {
    pub fn orbital(&self) -> OrbitalDynamics<'_> {
        OrbitalDynamics::new(self.flow.as_ref(), self.frame.as_ref())
    }
}

/// Builds the boundary interpolant described by a `[boundary]` section.
pub fn build_boundary(section: &Section) -> Result<ImplicitBoundary> {
    let mut on_points;
    let mut interior: Vec<(Vec2, f64)> = Vec::new();
    match section.get("shape").unwrap_or("stadium") {
        "stadium" => {
            let length = section.f64_or("length", 4.5)?;
            let width = section.f64_or("width", 3.0)?;
            let count = section.usize_or("points", 64)?;
            on_points = stadium_boundary_points(length, width, count)?;
        }
        "file" => {
            let path = section.require("file")?;
            let (on, inner) = load_boundary_constraints(std::path::Path::new(path))?;
            on_points = on;
            interior = inner;
        }
        other => bail!("unknown boundary shape {other:?} (expected stadium or file)"),
    }
    for raw in section.get_all("interior") {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 3 {
            bail!("boundary interior constraint expects 'x y gamma', got {raw:?}");
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|_| anyhow!("bad interior constraint x: {raw:?}"))?;
        let y: f64 = fields[1]
            .parse()
            .map_err(|_| anyhow!("bad interior constraint y: {raw:?}"))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| anyhow!("bad interior constraint value: {raw:?}"))?;
        interior.push((Vec2::new(x, y), v));
    }
    if interior.is_empty() {
        // The standard choice: pin the gyre center one unit below the
        // boundary level.
        let center = section.opt_vec2("center")?.unwrap_or(Vec2::zero());
        interior.push((center, -1.0));
    }
    for raw in section.get_all("extra_on_point") {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 2 {
            bail!("boundary extra_on_point expects 'x y', got {raw:?}");
        }
        on_points.push(Vec2::new(
            fields[0]
                .parse()
                .map_err(|_| anyhow!("bad extra_on_point: {raw:?}"))?,
            fields[1]
                .parse()
                .map_err(|_| anyhow!("bad extra_on_point: {raw:?}"))?,
        ));
    }
    Ok(ImplicitBoundary::fit(&on_points, &interior)?)
}

fn nav_params(cfg: &ConfigFile, boundary: &ImplicitBoundary) -> Result<ShapeNavParams> {
    let radius = cfg
        .section("flow")
        .and_then(|s| s.get("workspace_radius_r0"))
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| anyhow!("flow workspace_radius_r0 is not a number: {v:?}"))
        })
        .transpose()?;
    Ok(match radius {
        Some(r) => ShapeNavParams::new(r)?,
        None => ShapeNavParams::covering(boundary),
    })
}

/// Builds the flow model and its radial frame from `[flow]` (plus
/// `[boundary]` for fitted racetrack flows).
pub fn build_experiment(cfg: &ConfigFile) -> Result<Experiment> {
    let flow_section = cfg.require_section("flow")?;
    let model = flow_section.require("model")?;
    match model {
        "vortex" => {
            let scale = flow_section.f64_or("omega_scale", 1.0)?;
            let offset = flow_section.f64_or("omega_offset", 0.0)?;
            let radial_rate = flow_section.f64_or("radial_rate", 0.0)?;
            let flow: Arc<dyn FlowField> = Arc::new(Vortex::new(VortexParams::new(
                OmegaProfile::reciprocal(scale, offset)?,
                radial_rate,
            )?));
            let frame = Arc::new(PolarFrame::new(flow.center().stagnation));
            Ok(Experiment {
                flow,
                frame,
                boundary: None,
                nav: None,
                flow_label: format!(
                    "vortex omega(r) = {scale}/(r + {offset}), radial rate {radial_rate}"
                ),
            })
        }
        "double_gyre" => {
            let strength = flow_section.f64_or("strength", 1.0)?;
            let half_width = flow_section.f64_or("half_width", 1.0)?;
            let dissipation = flow_section.f64_or("dissipation", 0.0)?;
            let flow: Arc<dyn FlowField> = Arc::new(DoubleGyre::new(DoubleGyreParams::new(
                strength,
                half_width,
                dissipation,
            )?)?);
            let frame = Arc::new(PolarFrame::new(flow.center().stagnation));
            Ok(Experiment {
                flow,
                frame,
                boundary: None,
                nav: None,
                flow_label: format!(
                    "double gyre strength {strength}, half-width {half_width}, \
                     dissipation {dissipation}"
                ),
            })
        }
        "racetrack" => {
            let boundary = Arc::new(build_boundary(cfg.require_section("boundary")?)?);
            let nav = nav_params(cfg, &boundary)?;
            let radial_gain = flow_section.require_f64("radial_gain")?;
            let angular_gain = flow_section.require_f64("angular_gain")?;
            let center = flow_section.opt_vec2("center")?.unwrap_or(Vec2::zero());
            let r_max = flow_section.f64_or("r_max", 1.5)?;
            let flow: Arc<dyn FlowField> = Arc::new(PotentialFlow::new(
                boundary.clone(),
                PotentialFieldParams::new(radial_gain, angular_gain)?,
                nav,
                center,
            )?);
            let frame = Arc::new(CircleMapFrame::new(
                CircleMapParams::new(center, r_max)?,
                boundary.clone(),
            ));
            Ok(Experiment {
                flow,
                frame,
                boundary: Some(boundary),
                nav: Some(nav),
                flow_label: format!(
                    "fitted racetrack flow, gains ({radial_gain}, {angular_gain}), \
                     mapped boundary radius {r_max}"
                ),
            })
        }
        "still" => {
            let center = flow_section.opt_vec2("center")?.unwrap_or(Vec2::zero());
            let flow: Arc<dyn FlowField> = Arc::new(StillWater::new(center));
            if let Some(boundary_section) = cfg.section("boundary") {
                let boundary = Arc::new(build_boundary(boundary_section)?);
                let r_max = flow_section.f64_or("r_max", 1.5)?;
                let frame = Arc::new(CircleMapFrame::new(
                    CircleMapParams::new(center, r_max)?,
                    boundary.clone(),
                ));
                Ok(Experiment {
                    flow,
                    frame,
                    boundary: Some(boundary),
                    nav: None,
                    flow_label: "still water over the fitted boundary".into(),
                })
            } else {
                let frame = Arc::new(PolarFrame::new(center));
                Ok(Experiment {
                    flow,
                    frame,
                    boundary: None,
                    nav: None,
                    flow_label: "still water".into(),
                })
            }
        }
        other => bail!("unknown flow model {other:?}"),
    }
}

/// The patrol band resolved to radii, with the monotone band it sits in
/// and the boundary-orbit periods when available.
pub struct Region {
    pub r_lower: f64,
    pub r_upper: f64,
    pub min_width: f64,
    pub band: Option<RadialBand>,
    pub period_lower: Option<f64>,
    pub period_upper: Option<f64>,
}

pub const PERIOD_PANELS: usize = 512;

/// Resolves `[region]` to radii. Radii may be given directly or as target
/// periods, which are inverted through the orbit period inside the
/// detected monotone band.
pub fn resolve_region(cfg: &ConfigFile, experiment: &Experiment) -> Result<Region> {
    let section = cfg.require_section("region")?;
    let min_width = section.f64_or("min_width", DEFAULT_MIN_BAND_WIDTH)?;
    let theta_samples = section.usize_or("theta_samples", 32)?;
    let r_samples = section.usize_or("r_samples", 48)?;
    let od = experiment.orbital();

    let direct = (section.opt_f64("r_lower")?, section.opt_f64("r_upper")?);
    let by_period = (
        section.opt_f64("period_lower")?,
        section.opt_f64("period_upper")?,
    );

    let (r_lower, r_upper, band) = match (direct, by_period) {
        ((Some(lo), Some(hi)), (None, None)) => {
            let search = section
                .opt_interval("band_search")?
                .unwrap_or((0.5 * lo, 1.2 * hi));
            let band = od
                .monotone_band(theta_samples, r_samples, search)
                .context("monotone-band scan failed")?;
            (lo, hi, band)
        }
        ((None, None), (Some(t_lo), Some(t_hi))) => {
            if !(t_lo < t_hi) {
                bail!("region periods must satisfy period_lower < period_upper");
            }
            let search = section.opt_interval("band_search")?.ok_or_else(|| {
                anyhow!("region band_search is required when the band is given by periods")
            })?;
            let band = od
                .monotone_band(theta_samples, r_samples, search)
                .context("monotone-band scan failed")?
                .ok_or_else(|| {
                    anyhow!("no monotone band found in {search:?}; cannot invert periods")
                })?;
            let lo = od.radius_for_period(&band, t_lo, PERIOD_PANELS, 1e-6)?;
            let hi = od.radius_for_period(&band, t_hi, PERIOD_PANELS, 1e-6)?;
            (lo, hi, Some(band))
        }
        _ => bail!(
            "region must give either r_lower and r_upper, or period_lower and period_upper"
        ),
    };

    let (period_lower, period_upper) = match band {
        Some(b) if b.contains(r_lower) && b.contains(r_upper) => (
            Some(od.orbit_period(r_lower, PERIOD_PANELS)?),
            Some(od.orbit_period(r_upper, PERIOD_PANELS)?),
        ),
        _ => (None, None),
    };

    Ok(Region {
        r_lower,
        r_upper,
        min_width,
        band,
        period_lower,
        period_upper,
    })
}

/// Builds the controller described by a controller section.
pub fn build_controller(
    section: &Section,
    region: &Region,
    experiment: &Experiment,
    seed: u64,
) -> Result<Box<dyn Controller>> {
    let annulus = AnnulusRegion::new(
        region.r_lower,
        region.r_upper,
        experiment.flow.center(),
        region.min_width,
    )?;
    match section.require("type")? {
        "bang_bang" => {
            let max_thrust = section.require_f64("max_thrust")?;
            let cfg = BangBangConfig::new(annulus, max_thrust, BangBangMode::ThreeState, None)?;
            Ok(Box::new(BangBangController::new(cfg)))
        }
        "hysteresis" => {
            let lo = section.require_f64("speed_min")?;
            let hi = section.require_f64("speed_max")?;
            let max_thrust = section.f64_or("max_thrust", hi)?;
            let cfg = BangBangConfig::new(
                annulus,
                max_thrust,
                BangBangMode::Hysteresis,
                Some((lo, hi)),
            )?;
            Ok(Box::new(HysteresisController::new(cfg, seed)?))
        }
        "waypoint" => {
            let orbit_radius = section
                .f64_or("orbit_radius", 0.5 * (region.r_lower + region.r_upper))?;
            let spacing = section.f64_or("spacing", 0.5)?;
            let capture_radius = section.f64_or("capture_radius", 0.1)?;
            let max_thrust = section.require_f64("max_thrust")?;
            let waypoints = waypoints_on_mapped_radius(
                experiment.frame.as_ref(),
                orbit_radius,
                spacing,
                2048,
            )?;
            Ok(Box::new(WaypointController::new(
                waypoints,
                capture_radius,
                max_thrust,
            )?))
        }
        "none" => Ok(Box::new(NoControl)),
        other => bail!(
            "unknown controller type {other:?} \
             (expected bang_bang, hysteresis, waypoint, or none)"
        ),
    }
}

/// Builds the integration settings from `[integration]` and `[run]`.
pub fn sim_options(cfg: &ConfigFile) -> Result<SimOptions> {
    let section = cfg.require_section("integration")?;
    let dt = section.f64_or("dt", 0.01)?;
    let t_end = section.require_f64("t_end")?;
    let mut opts = SimOptions::new(dt, t_end)?.with_meta(cfg.text.clone());
    if let Some(limit) = section.opt_f64("workspace_radius")? {
        opts = opts.with_workspace_radius(limit);
    }
    match section.get("model").unwrap_or("kinematic") {
        "kinematic" => {}
        "inertial" => {
            let thruster = PendulumParams::new(
                section.f64_or("pendulum_gain", 15.0)?,
                section.f64_or("pendulum_frequency", std::f64::consts::TAU)?,
                section.f64_or("mean_thrust", 0.021)?,
            )?;
            // Drag from the characterized thrust and still-water top speed.
            let drag = section.f64_or("drag", 0.021 / 0.093)?;
            let time_constant = section.f64_or("time_constant", 1.0)?;
            opts = opts.with_motion(MotionModel::Inertial {
                time_constant,
                drag,
                thruster,
            });
        }
        other => bail!("unknown integration model {other:?}"),
    }
    Ok(opts)
}

/// Start position: `start = x y` in workspace coordinates, or
/// `start_polar = r theta` mapped through the frame.
pub fn start_position(cfg: &ConfigFile, experiment: &Experiment) -> Result<Vec2> {
    let section = cfg.require_section("integration")?;
    if let Some(q) = section.opt_vec2("start")? {
        return Ok(q);
    }
    if let Some(polar) = section.opt_vec2("start_polar")? {
        return Ok(experiment.frame.from_polar(polar.x, polar.y)?);
    }
    bail!(
        "{}: [integration] needs start = x y or start_polar = r theta",
        cfg.path.display()
    );
}
