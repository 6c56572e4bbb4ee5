//! Gyre-like flow-field models and orbit-level analysis.
//!
//! A gyre-like flow splits into a non-dissipative part that carries material
//! around closed, concentric, star-shaped orbits and a dissipative part that
//! drifts it slowly across them. This module provides two analytic models (a
//! wind-driven double gyre and a blade-driven vortex), the [`FlowField`]
//! capability trait for arbitrary velocity fields, and sampling tools that
//! recover the circular orbital picture: angular-velocity profiles, monotone
//! radius bands, and orbit periods.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::vec2::{wrap_angle, Vec2};

/// Quadrature resolution used for orbit periods when the caller has no
/// reason to pick its own.
pub const DEFAULT_PERIOD_PANELS: usize = 512;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("parameter {name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("radius {radius} lies outside the angular-velocity profile domain [{lo}, {hi})")]
    OutsideProfileDomain { radius: f64, lo: f64, hi: f64 },
    #[error("angular velocity is undefined at the gyre center")]
    DegenerateCenter,
    #[error(
        "angular speed vanishes or reverses sense at r = {radius}, theta = {theta}; \
         the orbit does not close"
    )]
    OrbitNotClosed { radius: f64, theta: f64 },
    #[error("stagnation-point search did not converge")]
    StagnationNotFound,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("field evaluation failed: {0}")]
    Evaluation(String),
}

/// Center pair of a gyre-like flow: the center of the non-dissipative
/// orbits and the stagnation point of the full (dissipative) field. The two
/// coincide when there is no dissipation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyreCenter {
    pub orbit_center: Vec2,
    pub stagnation: Vec2,
}

impl GyreCenter {
    pub fn coincident(point: Vec2) -> Self {
        Self {
            orbit_center: point,
            stagnation: point,
        }
    }
}

/// An evaluable planar velocity field with a known gyre center.
///
/// Implementations must be deterministic: the same query point always
/// yields the same velocity.
pub trait FlowField: Send + Sync {
    fn velocity(&self, x: Vec2) -> Result<Vec2, FlowError>;
    fn center(&self) -> GyreCenter;
}

// ---------------------------------------------------------------------------
// Double gyre
// ---------------------------------------------------------------------------

/// Parameters of the simplified wind-driven double-gyre model.
#[derive(Debug, Clone, Copy)]
pub struct DoubleGyreParams {
    /// Flow strength (sets the velocity scale, m/s).
    pub strength: f64,
    /// Half-width of one gyre cell (m).
    pub half_width: f64,
    /// Dissipation rate (1/s); zero gives the closed-orbit field.
    pub dissipation: f64,
}

impl DoubleGyreParams {
    pub fn new(strength: f64, half_width: f64, dissipation: f64) -> Result<Self, FlowError> {
        if !(strength > 0.0) || !strength.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "strength",
                requirement: "positive and finite",
                value: strength,
            });
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "half_width",
                requirement: "positive and finite",
                value: half_width,
            });
        }
        if !(dissipation >= 0.0) || !dissipation.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "dissipation",
                requirement: "nonnegative and finite",
                value: dissipation,
            });
        }
        Ok(Self {
            strength,
            half_width,
            dissipation,
        })
    }
}

/// Velocity of the double-gyre field at `x`. Total on the whole plane.
pub fn double_gyre_velocity(p: &DoubleGyreParams, x: Vec2) -> Vec2 {
    let pi = std::f64::consts::PI;
    let kx = pi * x.x / p.half_width;
    let ky = pi * x.y / p.half_width;
    Vec2::new(
        -pi * p.strength * kx.sin() * ky.cos() - p.dissipation * x.x,
        pi * p.strength * kx.cos() * ky.sin() - p.dissipation * x.y,
    )
}

fn double_gyre_jacobian(p: &DoubleGyreParams, x: Vec2) -> [[f64; 2]; 2] {
    let pi = std::f64::consts::PI;
    let k = pi / p.half_width;
    let (sx, cx) = (k * x.x).sin_cos();
    let (sy, cy) = (k * x.y).sin_cos();
    let a = pi * p.strength * k;
    [
        [-a * cx * cy - p.dissipation, a * sx * sy],
        [-a * sx * sy, a * cx * cy - p.dissipation],
    ]
}

/// Double-gyre flow over the cell whose non-dissipative orbits circle
/// `(half_width/2, half_width/2)`. The stagnation point of the full field
/// is located by Newton iteration at construction time.
#[derive(Debug, Clone)]
pub struct DoubleGyre {
    params: DoubleGyreParams,
    center: GyreCenter,
}

impl DoubleGyre {
    pub fn new(params: DoubleGyreParams) -> Result<Self, FlowError> {
        let orbit_center = Vec2::new(0.5 * params.half_width, 0.5 * params.half_width);
        let stagnation = if params.dissipation == 0.0 {
            orbit_center
        } else {
            newton_stagnation(&params, orbit_center)?
        };
        Ok(Self {
            params,
            center: GyreCenter {
                orbit_center,
                stagnation,
            },
        })
    }

    pub fn params(&self) -> &DoubleGyreParams {
        &self.params
    }
}

impl FlowField for DoubleGyre {
    fn velocity(&self, x: Vec2) -> Result<Vec2, FlowError> {
        Ok(double_gyre_velocity(&self.params, x))
    }

    fn center(&self) -> GyreCenter {
        self.center
    }
}

fn newton_stagnation(p: &DoubleGyreParams, start: Vec2) -> Result<Vec2, FlowError> {
    let mut x = start;
    for _ in 0..64 {
        let v = double_gyre_velocity(p, x);
        if v.norm() < 1e-13 {
            return Ok(x);
        }
        let j = double_gyre_jacobian(p, x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step = Vec2::new(
            (j[1][1] * v.x - j[0][1] * v.y) / det,
            (j[0][0] * v.y - j[1][0] * v.x) / det,
        );
        x = x - step;
    }
    if double_gyre_velocity(p, x).norm() < 1e-9 {
        Ok(x)
    } else {
        Err(FlowError::StagnationNotFound)
    }
}

// ---------------------------------------------------------------------------
// Vortex
// ---------------------------------------------------------------------------

/// Angular-velocity profile of a vortex: a positive, strictly decreasing
/// function of radius over a declared domain.
#[derive(Clone)]
pub struct OmegaProfile {
    lo: f64,
    hi: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl OmegaProfile {
    /// Profile `c / (r + r0)`, the default family. Positive and strictly
    /// decreasing on [0, inf) for `c > 0`, `r0 >= 0`; with `r0 = 0` the
    /// domain is open at zero.
    pub fn reciprocal(scale: f64, offset: f64) -> Result<Self, FlowError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "scale",
                requirement: "positive and finite",
                value: scale,
            });
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "offset",
                requirement: "nonnegative and finite",
                value: offset,
            });
        }
        let lo = if offset == 0.0 { f64::MIN_POSITIVE } else { 0.0 };
        Ok(Self {
            lo,
            hi: f64::INFINITY,
            f: Arc::new(move |r| scale / (r + offset)),
        })
    }

    /// Constant profile; a rigid rotation. Not decreasing, so it has no
    /// monotone band, but it is a handy reference field.
    pub fn constant(omega: f64) -> Result<Self, FlowError> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "omega",
                requirement: "positive and finite",
                value: omega,
            });
        }
        Ok(Self {
            lo: 0.0,
            hi: f64::INFINITY,
            f: Arc::new(move |_| omega),
        })
    }

    /// Arbitrary profile over `[lo, hi)`. The caller is responsible for
    /// positivity and monotonicity; both are checked downstream by the
    /// orbit analysis where they matter.
    pub fn from_fn<F>(lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            lo,
            hi,
            f: Arc::new(f),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, radius: f64) -> Result<f64, FlowError> {
        if radius < self.lo || radius >= self.hi {
            return Err(FlowError::OutsideProfileDomain {
                radius,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((self.f)(radius))
    }
}

impl fmt::Debug for OmegaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmegaProfile")
            .field("domain", &(self.lo, self.hi))
            .finish_non_exhaustive()
    }
}

/// Parameters of the blade-driven vortex model.
#[derive(Debug, Clone)]
pub struct VortexParams {
    pub profile: OmegaProfile,
    /// Radial rate (1/s). The radial velocity is `-radial_rate * r`:
    /// positive values decay toward the center, negative values spiral
    /// outward, matching a gyre driven from its outer edge.
    pub radial_rate: f64,
}

impl VortexParams {
    pub fn new(profile: OmegaProfile, radial_rate: f64) -> Result<Self, FlowError> {
        if !radial_rate.is_finite() {
            return Err(FlowError::InvalidParameter {
                name: "radial_rate",
                requirement: "finite",
                value: radial_rate,
            });
        }
        Ok(Self {
            profile,
            radial_rate,
        })
    }
}

/// Velocity of the vortex field at `x`. The origin always maps to zero;
/// elsewhere the radius must lie in the profile domain.
pub fn vortex_velocity(p: &VortexParams, x: Vec2) -> Result<Vec2, FlowError> {
    let r = x.norm();
    if r == 0.0 {
        return Ok(Vec2::zero());
    }
    let omega = p.profile.eval(r)?;
    Ok(Vec2::new(
        -omega * x.y - p.radial_rate * x.x,
        omega * x.x - p.radial_rate * x.y,
    ))
}

/// Vortex flow centered at the origin.
#[derive(Debug, Clone)]
pub struct Vortex {
    params: VortexParams,
}

impl Vortex {
    pub fn new(params: VortexParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &VortexParams {
        &self.params
    }
}

impl FlowField for Vortex {
    fn velocity(&self, x: Vec2) -> Result<Vec2, FlowError> {
        vortex_velocity(&self.params, x)
    }

    fn center(&self) -> GyreCenter {
        GyreCenter::coincident(Vec2::zero())
    }
}

/// Quiescent water; used for controller baselines.
#[derive(Debug, Clone, Copy)]
pub struct StillWater {
    pub center: Vec2,
}

impl StillWater {
    pub fn new(center: Vec2) -> Self {
        Self { center }
    }
}

impl FlowField for StillWater {
    fn velocity(&self, _x: Vec2) -> Result<Vec2, FlowError> {
        Ok(Vec2::zero())
    }

    fn center(&self) -> GyreCenter {
        GyreCenter::coincident(self.center)
    }
}

// ---------------------------------------------------------------------------
// Radial frames
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("point coincides with the frame center")]
    DegenerateCenter,
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("{0}")]
    OutOfDomain(String),
}

/// A chart between workspace points and the circular orbital coordinates
/// (r, theta). Analytic flows use plain polar coordinates about the
/// stagnation point; boundary-fitted flows use the circle map from the
/// geometry module.
pub trait RadialFrame: Send + Sync {
    fn center(&self) -> Vec2;

    /// Maps a workspace point to (r, theta) with theta in [0, 2*pi).
    fn to_polar(&self, q: Vec2) -> Result<(f64, f64), FrameError>;

    /// Maps (r, theta) back to the workspace.
    fn from_polar(&self, radius: f64, theta: f64) -> Result<Vec2, FrameError>;

    /// Rate of change of the frame radius for a robot at `q` moving with
    /// velocity `v`.
    fn radial_velocity(&self, q: Vec2, v: Vec2) -> Result<f64, FrameError>;
}

/// Plain polar coordinates about a fixed center.
#[derive(Debug, Clone, Copy)]
pub struct PolarFrame {
    center: Vec2,
}

impl PolarFrame {
    pub fn new(center: Vec2) -> Self {
        Self { center }
    }
}

impl RadialFrame for PolarFrame {
    fn center(&self) -> Vec2 {
        self.center
    }

    fn to_polar(&self, q: Vec2) -> Result<(f64, f64), FrameError> {
        let d = q - self.center;
        let r = d.norm();
        if r == 0.0 {
            return Err(FrameError::DegenerateCenter);
        }
        Ok((r, wrap_angle(d.angle())))
    }

    fn from_polar(&self, radius: f64, theta: f64) -> Result<Vec2, FrameError> {
        if radius < 0.0 {
            return Err(FrameError::NegativeRadius(radius));
        }
        Ok(self.center + Vec2::from_polar(radius, theta))
    }

    fn radial_velocity(&self, q: Vec2, v: Vec2) -> Result<f64, FrameError> {
        let d = q - self.center;
        let r = d.norm();
        if r == 0.0 {
            return Err(FrameError::DegenerateCenter);
        }
        Ok(v.dot(d) / r)
    }
}

// ---------------------------------------------------------------------------
// Orbit analysis
// ---------------------------------------------------------------------------

/// Signed angular velocity of the flow at `x` about the stagnation point:
/// the tangential velocity component divided by the distance from the
/// center. Positive means counterclockwise.
pub fn angular_velocity(flow: &dyn FlowField, x: Vec2) -> Result<f64, FlowError> {
    angular_velocity_about(flow, x, flow.center().stagnation)
}

/// Signed angular velocity about an arbitrary center point.
pub fn angular_velocity_about(
    flow: &dyn FlowField,
    x: Vec2,
    center: Vec2,
) -> Result<f64, FlowError> {
    let d = x - center;
    let rr = d.norm_squared();
    if rr == 0.0 {
        return Err(FlowError::DegenerateCenter);
    }
    let v = flow.velocity(x)?;
    Ok(v.dot(d.perp()) / rr)
}

/// Radius interval on which the sampled angular speed strictly decreases
/// with radius for every sampled bearing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBand {
    pub lower: f64,
    pub upper: f64,
}

impl RadialBand {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, radius: f64) -> bool {
        radius >= self.lower && radius <= self.upper
    }
}

/// View of a flow through a radial frame as the circular orbital model
/// with radial rate nu and angular rate Omega.
pub struct OrbitalDynamics<'a> {
    flow: &'a dyn FlowField,
    frame: &'a dyn RadialFrame,
}

impl<'a> OrbitalDynamics<'a> {
    pub fn new(flow: &'a dyn FlowField, frame: &'a dyn RadialFrame) -> Self {
        Self { flow, frame }
    }

    /// Signed angular rate at frame coordinates (r, theta).
    pub fn angular_rate(&self, radius: f64, theta: f64) -> Result<f64, FlowError> {
        let q = self.frame.from_polar(radius, theta)?;
        angular_velocity_about(self.flow, q, self.frame.center())
    }

    /// Signed rate of change of the frame radius at (r, theta); the model's
    /// nu is the negative of this.
    pub fn radial_rate(&self, radius: f64, theta: f64) -> Result<f64, FlowError> {
        let q = self.frame.from_polar(radius, theta)?;
        let v = self.flow.velocity(q)?;
        Ok(self.frame.radial_velocity(q, v)?)
    }

    /// Largest sub-interval of `r_search` on which the sampled angular
    /// speed is positive (in a single rotation sense) and strictly
    /// decreasing in radius for every sampled bearing. `None` when no such
    /// interval exists at this resolution.
    ///
    /// Uses sampled finite differences rather than derivatives because the
    /// flow may be a fitted field with no closed form.
    ///
    /// # Panics
    ///
    /// Panics if either sample count is below 8 or the search interval is
    /// not positive and increasing.
    pub fn monotone_band(
        &self,
        theta_samples: usize,
        r_samples: usize,
        r_search: (f64, f64),
    ) -> Result<Option<RadialBand>, FlowError> {
        assert!(
            theta_samples >= 8 && r_samples >= 8,
            "monotone_band needs at least 8 samples in each direction"
        );
        assert!(
            r_search.0 > 0.0 && r_search.1 > r_search.0,
            "r_search must be a positive increasing interval"
        );

        let radii: Vec<f64> = (0..r_samples)
            .map(|k| {
                r_search.0 + (r_search.1 - r_search.0) * k as f64 / (r_samples - 1) as f64
            })
            .collect();
        let mut rates = vec![vec![0.0_f64; theta_samples]; r_samples];
        for (k, &r) in radii.iter().enumerate() {
            for j in 0..theta_samples {
                let theta = TAU * j as f64 / theta_samples as f64;
                rates[k][j] = self.angular_rate(r, theta)?;
            }
        }

        let gap_ok = |k: usize| -> bool {
            let mut sense = 0.0;
            for j in 0..theta_samples {
                let (w1, w2) = (rates[k][j], rates[k + 1][j]);
                if w1 == 0.0 || w2 == 0.0 || !w1.is_finite() || !w2.is_finite() {
                    return false;
                }
                if w1.signum() != w2.signum() {
                    return false;
                }
                if sense == 0.0 {
                    sense = w1.signum();
                } else if w1.signum() != sense {
                    return false;
                }
                if w2.abs() >= w1.abs() {
                    return false;
                }
            }
            true
        };

        let mut best: Option<(usize, usize)> = None;
        let mut run_start = None;
        for k in 0..r_samples - 1 {
            if gap_ok(k) {
                if run_start.is_none() {
                    run_start = Some(k);
                }
                let start = run_start.unwrap();
                let better = match best {
                    Some((b0, b1)) => (k + 1 - start) > (b1 - b0),
                    None => true,
                };
                if better {
                    best = Some((start, k + 1));
                }
            } else {
                run_start = None;
            }
        }

        Ok(best.map(|(i0, i1)| RadialBand {
            lower: radii[i0],
            upper: radii[i1],
        }))
    }

    /// Period of the circular proxy orbit of the given frame radius:
    /// the integral of d(theta) over the angular speed, by the composite
    /// midpoint rule with `theta_steps` panels. Midpoint quadrature is
    /// spectrally accurate here because the integrand is smooth and
    /// periodic.
    ///
    /// The angular speed must keep one rotation sense along the whole
    /// orbit; a vanishing or reversing sample means the orbit does not
    /// close and is reported as an error.
    pub fn orbit_period(&self, radius: f64, theta_steps: usize) -> Result<f64, FlowError> {
        assert!(theta_steps >= 4, "orbit_period needs at least 4 panels");
        assert!(radius > 0.0, "orbit radius must be positive");
        let h = TAU / theta_steps as f64;
        let mut sense = 0.0;
        let mut total = 0.0;
        for j in 0..theta_steps {
            let theta = (j as f64 + 0.5) * h;
            let omega = self.angular_rate(radius, theta)?;
            if omega == 0.0 || !omega.is_finite() {
                return Err(FlowError::OrbitNotClosed { radius, theta });
            }
            if sense == 0.0 {
                sense = omega.signum();
            } else if omega.signum() != sense {
                return Err(FlowError::OrbitNotClosed { radius, theta });
            }
            total += h / (omega * sense);
        }
        Ok(total)
    }

    /// Finds the radius inside `band` whose orbit period equals `target`
    /// by bisection, relying on the period being increasing in radius
    /// there. Errors when the target lies outside the band's period range.
    pub fn radius_for_period(
        &self,
        band: &RadialBand,
        target: f64,
        theta_steps: usize,
        tolerance: f64,
    ) -> Result<f64, FlowError> {
        let t_lo = self.orbit_period(band.lower, theta_steps)?;
        let t_hi = self.orbit_period(band.upper, theta_steps)?;
        if target < t_lo || target > t_hi {
            return Err(FlowError::Evaluation(format!(
                "target period {target:.4} s outside the band's period range \
                 [{t_lo:.4}, {t_hi:.4}] s"
            )));
        }
        let (mut lo, mut hi) = (band.lower, band.upper);
        while hi - lo > tolerance {
            let mid = 0.5 * (lo + hi);
            if self.orbit_period(mid, theta_steps)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_double_gyre(dissipation: f64) -> DoubleGyre {
        DoubleGyre::new(DoubleGyreParams::new(1.0, 1.0, dissipation).unwrap()).unwrap()
    }

    fn reciprocal_vortex(radial_rate: f64) -> Vortex {
        Vortex::new(
            VortexParams::new(OmegaProfile::reciprocal(1.0, 0.0).unwrap(), radial_rate).unwrap(),
        )
    }

    #[test]
    fn double_gyre_vanishes_at_origin() {
        let p = DoubleGyreParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(double_gyre_velocity(&p, Vec2::zero()), Vec2::zero());
    }

    #[test]
    fn double_gyre_vanishes_at_cell_center_without_dissipation() {
        let p = DoubleGyreParams::new(1.0, 1.0, 0.0).unwrap();
        let v = double_gyre_velocity(&p, Vec2::new(0.5, 0.5));
        assert_relative_eq!(v.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn double_gyre_matches_hand_evaluation() {
        // A = 1, s = 1, dissipation 0.1 at (0.25, 0.25):
        // sin(pi/4) cos(pi/4) = 1/2, so the components are
        // (-pi/2 - 0.025, pi/2 - 0.025).
        let p = DoubleGyreParams::new(1.0, 1.0, 0.1).unwrap();
        let v = double_gyre_velocity(&p, Vec2::new(0.25, 0.25));
        assert_relative_eq!(v.x, -PI / 2.0 - 0.025, epsilon = 1e-14);
        assert_relative_eq!(v.y, PI / 2.0 - 0.025, epsilon = 1e-14);
    }

    #[test]
    fn double_gyre_rejects_bad_parameters() {
        assert!(DoubleGyreParams::new(0.0, 1.0, 0.0).is_err());
        assert!(DoubleGyreParams::new(1.0, -1.0, 0.0).is_err());
        assert!(DoubleGyreParams::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn double_gyre_stagnation_point_shifts_under_dissipation() {
        let flow = unit_double_gyre(0.1);
        let c = flow.center();
        assert_eq!(c.orbit_center, Vec2::new(0.5, 0.5));
        assert!(c.stagnation.distance(c.orbit_center) > 1e-4);
        let v = flow.velocity(c.stagnation).unwrap();
        assert!(v.norm() < 1e-10, "residual velocity {} at stagnation", v.norm());
    }

    #[test]
    fn vortex_vanishes_at_origin() {
        let flow = reciprocal_vortex(0.3);
        assert_eq!(flow.velocity(Vec2::zero()).unwrap(), Vec2::zero());
    }

    #[test]
    fn constant_profile_gives_rigid_rotation() {
        let p = VortexParams::new(OmegaProfile::constant(1.0).unwrap(), 0.0).unwrap();
        let v = vortex_velocity(&p, Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(v.x, 0.0);
        assert_relative_eq!(v.y, 1.0);
    }

    #[test]
    fn vortex_matches_hand_evaluation() {
        // Omega = 1/r, radial rate 0.05 at (2, 0): (-0.1, 1.0).
        let p = VortexParams::new(OmegaProfile::reciprocal(1.0, 0.0).unwrap(), 0.05).unwrap();
        let v = vortex_velocity(&p, Vec2::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(v.x, -0.1, epsilon = 1e-14);
        assert_relative_eq!(v.y, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn vortex_profile_domain_is_enforced() {
        let profile = OmegaProfile::from_fn(0.5, 4.0, |r| 1.0 / r);
        let p = VortexParams::new(profile, 0.0).unwrap();
        assert!(matches!(
            vortex_velocity(&p, Vec2::new(5.0, 0.0)),
            Err(FlowError::OutsideProfileDomain { .. })
        ));
    }

    #[test]
    fn angular_velocity_of_rigid_rotation() {
        let flow = Vortex::new(
            VortexParams::new(OmegaProfile::constant(1.0).unwrap(), 0.0).unwrap(),
        );
        let w = angular_velocity(&flow, Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(w, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn angular_velocity_of_reciprocal_vortex() {
        let flow = reciprocal_vortex(0.0);
        let w = angular_velocity(&flow, Vec2::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(w, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn angular_velocity_dissipation_does_not_change_vortex_rate() {
        let w0 = angular_velocity(&reciprocal_vortex(0.0), Vec2::new(1.5, 0.5)).unwrap();
        let w1 = angular_velocity(&reciprocal_vortex(0.4), Vec2::new(1.5, 0.5)).unwrap();
        assert_relative_eq!(w0, w1, epsilon = 1e-12);
    }

    #[test]
    fn angular_velocity_of_double_gyre_matches_projection_oracle() {
        // Independent projection of the hand-evaluated velocity at
        // (0.5, 0.25) about the cell center (0.5, 0.5): the velocity is
        // (-pi*sqrt(2)/2, 0), the lever arm 0.25, so the rate is
        // -2*sqrt(2)*pi.
        let flow = unit_double_gyre(0.0);
        let w = angular_velocity(&flow, Vec2::new(0.5, 0.25)).unwrap();
        assert_relative_eq!(w, -2.0 * 2.0_f64.sqrt() * PI, epsilon = 1e-12);
    }

    #[test]
    fn angular_velocity_errors_at_center() {
        let flow = reciprocal_vortex(0.0);
        assert!(matches!(
            angular_velocity(&flow, Vec2::zero()),
            Err(FlowError::DegenerateCenter)
        ));
    }

    #[test]
    fn monotone_band_of_reciprocal_vortex_is_whole_search_interval() {
        let flow = reciprocal_vortex(0.0);
        let frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&flow, &frame);
        let band = od.monotone_band(16, 32, (0.1, 10.0)).unwrap().unwrap();
        assert_relative_eq!(band.lower, 0.1);
        assert_relative_eq!(band.upper, 10.0);
    }

    #[test]
    fn monotone_band_of_rigid_rotation_is_empty() {
        let flow = Vortex::new(
            VortexParams::new(OmegaProfile::constant(2.0).unwrap(), 0.0).unwrap(),
        );
        let frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&flow, &frame);
        assert!(od.monotone_band(16, 16, (0.5, 5.0)).unwrap().is_none());
    }

    #[test]
    fn monotone_band_of_double_gyre_covers_the_cell_interior() {
        let flow = unit_double_gyre(0.0);
        let frame = PolarFrame::new(Vec2::new(0.5, 0.5));
        let od = OrbitalDynamics::new(&flow, &frame);
        let band = od.monotone_band(32, 32, (0.05, 0.45)).unwrap().unwrap();
        assert!(band.width() > 0.3, "band {band:?} unexpectedly narrow");
    }

    #[test]
    fn orbit_period_of_rigid_rotation() {
        let flow = Vortex::new(
            VortexParams::new(OmegaProfile::constant(1.0).unwrap(), 0.0).unwrap(),
        );
        let frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&flow, &frame);
        let t = od.orbit_period(3.7, DEFAULT_PERIOD_PANELS).unwrap();
        assert_relative_eq!(t, TAU, epsilon = 1e-12);
    }

    #[test]
    fn orbit_period_of_reciprocal_vortex() {
        let flow = reciprocal_vortex(0.1);
        let frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&flow, &frame);
        let t = od.orbit_period(2.0, DEFAULT_PERIOD_PANELS).unwrap();
        assert_relative_eq!(t, 2.0 * TAU, epsilon = 1e-12);
    }

    #[test]
    fn orbit_period_quadrature_converges() {
        let flow = unit_double_gyre(0.0);
        let frame = PolarFrame::new(Vec2::new(0.5, 0.5));
        let od = OrbitalDynamics::new(&flow, &frame);
        let t256 = od.orbit_period(0.3, 256).unwrap();
        let t512 = od.orbit_period(0.3, 512).unwrap();
        assert!(
            (t512 - t256).abs() / t256 < 1e-3,
            "doubling panels moved the period by {}",
            (t512 - t256).abs() / t256
        );
    }

    #[test]
    fn orbit_period_rejects_non_closing_orbits() {
        // A circle of radius 0.8 about the cell center pokes into the
        // neighboring cells where the rotation sense flips.
        let flow = unit_double_gyre(0.0);
        let frame = PolarFrame::new(Vec2::new(0.5, 0.5));
        let od = OrbitalDynamics::new(&flow, &frame);
        assert!(matches!(
            od.orbit_period(0.8, 128),
            Err(FlowError::OrbitNotClosed { .. })
        ));
    }

    #[test]
    fn radius_for_period_inverts_orbit_period() {
        let flow = reciprocal_vortex(0.0);
        let frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&flow, &frame);
        let band = RadialBand {
            lower: 0.5,
            upper: 4.0,
        };
        // T(r) = 2*pi*r for Omega = 1/r.
        let r = od
            .radius_for_period(&band, 1.7 * TAU, 256, 1e-10)
            .unwrap();
        assert_relative_eq!(r, 1.7, epsilon = 1e-8);
    }

    #[test]
    fn period_monotone_in_radius_for_both_analytic_flows() {
        let vortex = reciprocal_vortex(0.0);
        let vortex_frame = PolarFrame::new(Vec2::zero());
        let od = OrbitalDynamics::new(&vortex, &vortex_frame);
        assert!(od.orbit_period(1.0, 256).unwrap() < od.orbit_period(1.4, 256).unwrap());

        let gyre = unit_double_gyre(0.0);
        let gyre_frame = PolarFrame::new(Vec2::new(0.5, 0.5));
        let od = OrbitalDynamics::new(&gyre, &gyre_frame);
        assert!(od.orbit_period(0.15, 256).unwrap() < od.orbit_period(0.35, 256).unwrap());
    }

    proptest! {
        #[test]
        fn pure_vortex_velocity_is_tangential(
            x in -5.0_f64..5.0,
            y in -5.0_f64..5.0,
            scale in 0.1_f64..4.0,
            offset in 0.0_f64..2.0,
        ) {
            let p = VortexParams::new(
                OmegaProfile::reciprocal(scale, offset).unwrap(),
                0.0,
            ).unwrap();
            let q = Vec2::new(x, y);
            let v = vortex_velocity(&p, q).unwrap();
            prop_assert!(v.dot(q).abs() <= 1e-12 * v.norm().max(1.0) * q.norm().max(1.0));
        }

        #[test]
        fn double_gyre_origin_is_stagnant_for_all_parameters(
            strength in 0.1_f64..5.0,
            half_width in 0.2_f64..3.0,
            dissipation in 0.0_f64..0.5,
        ) {
            let p = DoubleGyreParams::new(strength, half_width, dissipation).unwrap();
            prop_assert_eq!(double_gyre_velocity(&p, Vec2::zero()), Vec2::zero());
        }
    }
}
