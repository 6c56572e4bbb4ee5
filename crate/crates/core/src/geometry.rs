//! Racetrack-tank boundary modeling and the circle-map coordinate
//! transform.
//!
//! The tank shape is encoded as an interpolated implicit function `gamma`
//! whose zero level set approximates the enclosure and which is negative
//! inside. From `gamma` this module derives the shape navigation function,
//! the two-gain potential flow that approximates concentric orbits, and the
//! map that sends the racetrack workspace to circular (r, theta)
//! coordinates so annulus-based control applies.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::flow::{FlowError, FlowField, FrameError, GyreCenter, RadialFrame};
use crate::vec2::{wrap_angle, Vec2};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("need at least {needed} {kind} points, got {got}")]
    NotEnoughPoints {
        kind: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("constraint points {a} and {b} coincide")]
    DuplicatePoint { a: usize, b: usize },
    #[error("interior constraint {index} must prescribe a negative value, got {value}")]
    NonNegativeInterior { index: usize, value: f64 },
    #[error("interpolation system is singular; constraints are degenerate")]
    SingularSystem,
    #[error("interpolant failed to honor its constraints (max residual {max_residual:.3e})")]
    InterpolationResidual { max_residual: f64 },
    #[error("navigation function undefined: gamma^2 + (R0 - |q|) = {denominator:.6} <= 0")]
    NavigationDomain { denominator: f64 },
    #[error("navigation gradient undefined at the workspace origin")]
    DegenerateGradient,
    #[error("circle map undefined at the gyre center")]
    DegenerateMapPoint,
    #[error("circle map undefined: 1 + gamma = {value:.6} < 0")]
    MapDomain { value: f64 },
    #[error(
        "level set for mapped radius {radius:.4} not reached along bearing {theta:.4} \
         within ray length {max_ray:.2}"
    )]
    NoLevelSetRoot {
        radius: f64,
        theta: f64,
        max_ray: f64,
    },
    #[error("mapped radius {radius:.4} outside [0, {r_max:.4}]")]
    RadiusOutOfRange { radius: f64, r_max: f64 },
    #[error("parameter {name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

// ---------------------------------------------------------------------------
// Implicit boundary
// ---------------------------------------------------------------------------

/// Thin-plate-spline interpolant of the enclosure shape: zero on the given
/// boundary points, prescribed negative values at interior constraint
/// points, smooth everywhere away from the kernel centers.
#[derive(Debug, Clone)]
pub struct ImplicitBoundary {
    centers: Vec<Vec2>,
    weights: Vec<f64>,
    affine: [f64; 3],
}

fn tps_kernel(dist_sq: f64) -> f64 {
    // r^2 ln r written in terms of the squared distance; zero at the center.
    if dist_sq <= 0.0 {
        0.0
    } else {
        0.5 * dist_sq * dist_sq.ln()
    }
}

impl ImplicitBoundary {
    /// Interpolates the implicit function through `on_points` (value 0) and
    /// the prescribed negative `interior` constraints. All constraint points
    /// become kernel centers; an affine term absorbs the polynomial part.
    pub fn fit(on_points: &[Vec2], interior: &[(Vec2, f64)]) -> Result<Self, GeometryError> {
        if on_points.len() < 3 {
            return Err(GeometryError::NotEnoughPoints {
                kind: "on-boundary",
                needed: 3,
                got: on_points.len(),
            });
        }
        if interior.is_empty() {
            return Err(GeometryError::NotEnoughPoints {
                kind: "interior-constraint",
                needed: 1,
                got: 0,
            });
        }
        for (i, &(_, value)) in interior.iter().enumerate() {
            if !(value < 0.0) {
                return Err(GeometryError::NonNegativeInterior { index: i, value });
            }
        }

        let mut centers: Vec<Vec2> = on_points.to_vec();
        let mut values: Vec<f64> = vec![0.0; on_points.len()];
        for &(p, v) in interior {
            centers.push(p);
            values.push(v);
        }
        let n = centers.len();
        for i in 0..n {
            for j in i + 1..n {
                if centers[i].distance(centers[j]) < 1e-12 {
                    return Err(GeometryError::DuplicatePoint { a: i, b: j });
                }
            }
        }

        // [K P; P^T 0] [w; a] = [v; 0] with the usual orthogonality
        // conditions on the weights.
        let dim = n + 3;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = tps_kernel((centers[i] - centers[j]).norm_squared());
            }
            m[(i, n)] = 1.0;
            m[(i, n + 1)] = centers[i].x;
            m[(i, n + 2)] = centers[i].y;
            m[(n, i)] = 1.0;
            m[(n + 1, i)] = centers[i].x;
            m[(n + 2, i)] = centers[i].y;
            rhs[i] = values[i];
        }

        let solution = m
            .full_piv_lu()
            .solve(&rhs)
            .ok_or(GeometryError::SingularSystem)?;
        let weights: Vec<f64> = solution.iter().take(n).copied().collect();
        let affine = [solution[n], solution[n + 1], solution[n + 2]];

        let fitted = Self {
            centers,
            weights,
            affine,
        };

        let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let max_residual = fitted
            .centers
            .iter()
            .zip(&values)
            .map(|(&p, &v)| (fitted.gamma(p) - v).abs())
            .fold(0.0_f64, f64::max);
        if max_residual > 1e-9 * scale {
            return Err(GeometryError::InterpolationResidual { max_residual });
        }
        Ok(fitted)
    }

    /// Value of the implicit function at `q`: zero on the boundary,
    /// negative inside, positive outside.
    pub fn gamma(&self, q: Vec2) -> f64 {
        let mut value = self.affine[0] + self.affine[1] * q.x + self.affine[2] * q.y;
        for (center, w) in self.centers.iter().zip(&self.weights) {
            value += w * tps_kernel((q - *center).norm_squared());
        }
        value
    }

    /// Analytic gradient of the implicit function, from the kernel
    /// expansion. Continuous everywhere, including at the centers.
    pub fn gamma_gradient(&self, q: Vec2) -> Vec2 {
        let mut grad = Vec2::new(self.affine[1], self.affine[2]);
        for (center, w) in self.centers.iter().zip(&self.weights) {
            let d = q - *center;
            let dist_sq = d.norm_squared();
            if dist_sq > 0.0 {
                // d/dq of r^2 ln r is (2 ln r + 1) (q - c); the factor
                // vanishes with |q - c| so the center contributes nothing.
                grad = grad + d * (*w * (dist_sq.ln() + 1.0));
            }
        }
        grad
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn affine(&self) -> [f64; 3] {
        self.affine
    }

    /// Axis-aligned bounding box of the constraint points.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.centers {
            lo = Vec2::new(lo.x.min(c.x), lo.y.min(c.y));
            hi = Vec2::new(hi.x.max(c.x), hi.y.max(c.y));
        }
        (lo, hi)
    }
}

// ---------------------------------------------------------------------------
// Shape navigation function and potential flow
// ---------------------------------------------------------------------------

/// Radius of the circular workspace enclosing the boundary.
#[derive(Debug, Clone, Copy)]
pub struct ShapeNavParams {
    pub workspace_radius: f64,
}

impl ShapeNavParams {
    pub fn new(workspace_radius: f64) -> Result<Self, GeometryError> {
        if !(workspace_radius > 0.0) || !workspace_radius.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "workspace_radius",
                requirement: "positive and finite",
                value: workspace_radius,
            });
        }
        Ok(Self { workspace_radius })
    }

    /// Workspace radius set to twice the diagonal of the boundary's
    /// bounding box, comfortably beyond its maximal extent.
    pub fn covering(boundary: &ImplicitBoundary) -> Self {
        let (lo, hi) = boundary.bounding_box();
        Self {
            workspace_radius: 2.0 * (hi - lo).norm(),
        }
    }
}

/// Shape navigation function `gamma^2 / (gamma^2 + (R0 - |q|))`: zero
/// exactly on the boundary, in [0, 1) wherever the denominator is positive.
pub fn shape_navigation(
    boundary: &ImplicitBoundary,
    params: &ShapeNavParams,
    q: Vec2,
) -> Result<f64, GeometryError> {
    let gamma = boundary.gamma(q);
    let denominator = gamma * gamma + params.workspace_radius - q.norm();
    if denominator <= 0.0 {
        return Err(GeometryError::NavigationDomain { denominator });
    }
    Ok(gamma * gamma / denominator)
}

/// Analytic gradient of the shape navigation function by the quotient rule.
pub fn shape_navigation_gradient(
    boundary: &ImplicitBoundary,
    params: &ShapeNavParams,
    q: Vec2,
) -> Result<Vec2, GeometryError> {
    let norm_q = q.norm();
    if norm_q == 0.0 {
        return Err(GeometryError::DegenerateGradient);
    }
    let gamma = boundary.gamma(q);
    let grad_gamma = boundary.gamma_gradient(q);
    let numerator = gamma * gamma;
    let denominator = numerator + params.workspace_radius - norm_q;
    if denominator <= 0.0 {
        return Err(GeometryError::NavigationDomain { denominator });
    }
    let grad_numerator = grad_gamma * (2.0 * gamma);
    let grad_denominator = grad_gamma * (2.0 * gamma) - q / norm_q;
    Ok((grad_numerator * denominator - grad_denominator * numerator) / (denominator * denominator))
}

/// Gains balancing the radial and angular components of the potential flow.
#[derive(Debug, Clone, Copy)]
pub struct PotentialFieldParams {
    /// Radial gain; positive values push interior fluid toward the boundary.
    pub radial_gain: f64,
    /// Angular gain; the sign sets the rotation sense. Must be nonzero for
    /// the flow to circulate.
    pub angular_gain: f64,
}

impl PotentialFieldParams {
    pub fn new(radial_gain: f64, angular_gain: f64) -> Result<Self, GeometryError> {
        if angular_gain == 0.0 || !angular_gain.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "angular_gain",
                requirement: "nonzero and finite",
                value: angular_gain,
            });
        }
        if !radial_gain.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "radial_gain",
                requirement: "finite",
                value: radial_gain,
            });
        }
        Ok(Self {
            radial_gain,
            angular_gain,
        })
    }
}

/// Velocity of the potential flow at `q`: the negative scaled gradient of
/// the navigation function plus the planar curl of (0, 0, gamma), which
/// circulates along the level sets of gamma.
pub fn potential_field_velocity(
    boundary: &ImplicitBoundary,
    gains: &PotentialFieldParams,
    nav: &ShapeNavParams,
    q: Vec2,
) -> Result<Vec2, GeometryError> {
    let grad_phi = shape_navigation_gradient(boundary, nav, q)?;
    let grad_gamma = boundary.gamma_gradient(q);
    let curl_term = Vec2::new(grad_gamma.y, -grad_gamma.x);
    Ok(-gains.radial_gain * grad_phi - gains.angular_gain * curl_term)
}

// ---------------------------------------------------------------------------
// Circle map
// ---------------------------------------------------------------------------

/// Parameters of the map sending the racetrack workspace to circular
/// coordinates about the gyre center `center`; the boundary (gamma = 0)
/// maps to radius `r_max`.
#[derive(Debug, Clone, Copy)]
pub struct CircleMapParams {
    pub center: Vec2,
    pub r_max: f64,
    /// Maximum workspace ray length searched by the inverse map.
    pub max_ray: f64,
}

impl CircleMapParams {
    pub fn new(center: Vec2, r_max: f64) -> Result<Self, GeometryError> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "r_max",
                requirement: "positive and finite",
                value: r_max,
            });
        }
        Ok(Self {
            center,
            r_max,
            max_ray: 8.0 * r_max,
        })
    }

    pub fn with_max_ray(mut self, max_ray: f64) -> Self {
        self.max_ray = max_ray;
        self
    }
}

/// Maps a workspace point to circular coordinates:
/// `r = r_max * sqrt(1 + gamma(q))` and theta the bearing of `q` from the
/// gyre center, in [0, 2*pi).
pub fn circle_map(
    params: &CircleMapParams,
    boundary: &ImplicitBoundary,
    q: Vec2,
) -> Result<(f64, f64), GeometryError> {
    let d = q - params.center;
    if d.norm_squared() == 0.0 {
        return Err(GeometryError::DegenerateMapPoint);
    }
    let level = 1.0 + boundary.gamma(q);
    if level < 0.0 {
        return Err(GeometryError::MapDomain { value: level });
    }
    Ok((params.r_max * level.sqrt(), wrap_angle(d.angle())))
}

/// Inverts the circle map along the ray at bearing `theta`: the first point
/// on the ray whose mapped radius equals `radius`, found by bracketed
/// bisection to 1e-10 m on the ray parameter.
pub fn inverse_circle_map(
    params: &CircleMapParams,
    boundary: &ImplicitBoundary,
    radius: f64,
    theta: f64,
) -> Result<Vec2, GeometryError> {
    if !(0.0..=params.r_max).contains(&radius) {
        return Err(GeometryError::RadiusOutOfRange {
            radius,
            r_max: params.r_max,
        });
    }
    let direction = Vec2::from_polar(1.0, theta);
    // Sign function for the level crossing; well defined even where
    // 1 + gamma dips below zero.
    let excess = |t: f64| -> f64 {
        let q = params.center + direction * t;
        params.r_max * params.r_max * (1.0 + boundary.gamma(q)) - radius * radius
    };

    let steps = 1024;
    let dt = params.max_ray / steps as f64;
    let mut t_prev = 0.0;
    let mut s_prev = excess(0.0);
    if s_prev == 0.0 {
        return Ok(params.center);
    }
    let mut bracket = None;
    for k in 1..=steps {
        let t = dt * k as f64;
        let s = excess(t);
        if s == 0.0 || s.signum() != s_prev.signum() {
            bracket = Some((t_prev, t));
            break;
        }
        t_prev = t;
        s_prev = s;
    }
    let (mut lo, mut hi) = bracket.ok_or(GeometryError::NoLevelSetRoot {
        radius,
        theta,
        max_ray: params.max_ray,
    })?;

    let s_lo = excess(lo);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let s_mid = excess(mid);
        if s_mid == 0.0 {
            return Ok(params.center + direction * mid);
        }
        if s_mid.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(params.center + direction * (0.5 * (lo + hi)))
}

/// Circle-map chart over a fitted boundary; the [`RadialFrame`] used when
/// simulating in racetrack workspaces.
#[derive(Clone)]
pub struct CircleMapFrame {
    params: CircleMapParams,
    boundary: Arc<ImplicitBoundary>,
}

impl CircleMapFrame {
    pub fn new(params: CircleMapParams, boundary: Arc<ImplicitBoundary>) -> Self {
        Self { params, boundary }
    }

    pub fn params(&self) -> &CircleMapParams {
        &self.params
    }

    pub fn boundary(&self) -> &Arc<ImplicitBoundary> {
        &self.boundary
    }
}

impl fmt::Debug for CircleMapFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMapFrame")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl RadialFrame for CircleMapFrame {
    fn center(&self) -> Vec2 {
        self.params.center
    }

    fn to_polar(&self, q: Vec2) -> Result<(f64, f64), FrameError> {
        circle_map(&self.params, &self.boundary, q).map_err(frame_error)
    }

    fn from_polar(&self, radius: f64, theta: f64) -> Result<Vec2, FrameError> {
        inverse_circle_map(&self.params, &self.boundary, radius, theta).map_err(frame_error)
    }

    fn radial_velocity(&self, q: Vec2, v: Vec2) -> Result<f64, FrameError> {
        let level = 1.0 + self.boundary.gamma(q);
        if level <= 0.0 {
            return Err(FrameError::OutOfDomain(format!(
                "mapped radius has no derivative where 1 + gamma = {level:.6}"
            )));
        }
        // Chain rule through r = r_max sqrt(1 + gamma).
        Ok(self.params.r_max / (2.0 * level.sqrt()) * self.boundary.gamma_gradient(q).dot(v))
    }
}

fn frame_error(e: GeometryError) -> FrameError {
    match e {
        GeometryError::DegenerateMapPoint => FrameError::DegenerateCenter,
        other => FrameError::OutOfDomain(other.to_string()),
    }
}

/// The fitted two-gain flow over a racetrack boundary, exposed as a
/// [`FlowField`] so it integrates like any analytic model.
#[derive(Clone)]
pub struct PotentialFlow {
    boundary: Arc<ImplicitBoundary>,
    gains: PotentialFieldParams,
    nav: ShapeNavParams,
    center: Vec2,
}

impl PotentialFlow {
    pub fn new(
        boundary: Arc<ImplicitBoundary>,
        gains: PotentialFieldParams,
        nav: ShapeNavParams,
        center: Vec2,
    ) -> Result<Self, GeometryError> {
        let (lo, hi) = boundary.bounding_box();
        let extent = lo.norm().max(hi.norm());
        if nav.workspace_radius <= extent {
            return Err(GeometryError::InvalidParameter {
                name: "workspace_radius",
                requirement: "larger than the boundary's extent from the origin",
                value: nav.workspace_radius,
            });
        }
        Ok(Self {
            boundary,
            gains,
            nav,
            center,
        })
    }

    pub fn boundary(&self) -> &Arc<ImplicitBoundary> {
        &self.boundary
    }

    pub fn gains(&self) -> &PotentialFieldParams {
        &self.gains
    }

    pub fn nav(&self) -> &ShapeNavParams {
        &self.nav
    }
}

impl fmt::Debug for PotentialFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialFlow")
            .field("gains", &self.gains)
            .field("center", &self.center)
            .finish_non_exhaustive()
    }
}

impl FlowField for PotentialFlow {
    fn velocity(&self, x: Vec2) -> Result<Vec2, FlowError> {
        potential_field_velocity(&self.boundary, &self.gains, &self.nav, x)
            .map_err(|e| FlowError::Evaluation(e.to_string()))
    }

    fn center(&self) -> GyreCenter {
        GyreCenter::coincident(self.center)
    }
}

// ---------------------------------------------------------------------------
// Constraint generators and loaders
// ---------------------------------------------------------------------------

/// `n` points spaced uniformly by arc length along a stadium curve (two
/// straights joined by semicircular caps) of overall `length` by `width`,
/// centered at the origin with the straights parallel to the x axis.
pub fn stadium_boundary_points(
    length: f64,
    width: f64,
    n: usize,
) -> Result<Vec<Vec2>, GeometryError> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(GeometryError::InvalidParameter {
            name: "width",
            requirement: "positive and finite",
            value: width,
        });
    }
    if !(length >= width) || !length.is_finite() {
        return Err(GeometryError::InvalidParameter {
            name: "length",
            requirement: "at least the width",
            value: length,
        });
    }
    if n < 8 {
        return Err(GeometryError::NotEnoughPoints {
            kind: "stadium",
            needed: 8,
            got: n,
        });
    }
    let half_straight = 0.5 * (length - width);
    let cap_radius = 0.5 * width;
    let straight = 2.0 * half_straight;
    let cap = std::f64::consts::PI * cap_radius;
    let perimeter = 2.0 * straight + 2.0 * cap;

    let point_at = |s: f64| -> Vec2 {
        if s < straight {
            Vec2::new(-half_straight + s, -cap_radius)
        } else if s < straight + cap {
            let angle = -std::f64::consts::FRAC_PI_2 + (s - straight) / cap_radius;
            Vec2::new(half_straight, 0.0) + Vec2::from_polar(cap_radius, angle)
        } else if s < 2.0 * straight + cap {
            Vec2::new(half_straight - (s - straight - cap), cap_radius)
        } else {
            let angle = std::f64::consts::FRAC_PI_2 + (s - 2.0 * straight - cap) / cap_radius;
            Vec2::new(-half_straight, 0.0) + Vec2::from_polar(cap_radius, angle)
        }
    };

    Ok((0..n)
        .map(|k| point_at(perimeter * k as f64 / n as f64))
        .collect())
}

/// Reads constraint points from a plain-text list, one `x y gamma` triple
/// per line. A gamma of zero marks an on-boundary point; negative values
/// are interior constraints. Blank lines and `#` comments are skipped.
pub fn load_boundary_constraints(
    path: &Path,
) -> Result<(Vec<Vec2>, Vec<(Vec2, f64)>), GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut on_points = Vec::new();
    let mut interior = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GeometryError::Parse {
                path: path.display().to_string(),
                line,
                reason: format!("expected 3 fields (x y gamma), got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64, GeometryError> {
            s.parse::<f64>().map_err(|_| GeometryError::Parse {
                path: path.display().to_string(),
                line,
                reason: format!("{what} is not a number: {s:?}"),
            })
        };
        let x = parse(fields[0], "x")?;
        let y = parse(fields[1], "y")?;
        let value = parse(fields[2], "gamma")?;
        if value == 0.0 {
            on_points.push(Vec2::new(x, y));
        } else if value < 0.0 {
            interior.push((Vec2::new(x, y), value));
        } else {
            return Err(GeometryError::Parse {
                path: path.display().to_string(),
                line,
                reason: format!("interior constraints must be negative, got {value}"),
            });
        }
    }
    if on_points.is_empty() && interior.is_empty() {
        return Err(GeometryError::Parse {
            path: path.display().to_string(),
            line: 0,
            reason: "no constraint points in file".to_string(),
        });
    }
    Ok((on_points, interior))
}

/// A spot along a ray from the gyre center where the mapped radius
/// decreased while moving outward.
#[derive(Debug, Clone, Copy)]
pub struct RayMonotonicityViolation {
    pub theta: f64,
    pub ray_position: f64,
    pub mapped_before: f64,
    pub mapped_after: f64,
}

/// Samples the mapped radius along rays out to the boundary and reports
/// every decrease. The map is only guaranteed monotone for well-behaved
/// interior constraint sets, so violations are diagnostics, not failures.
pub fn ray_monotonicity_violations(
    params: &CircleMapParams,
    boundary: &ImplicitBoundary,
    rays: usize,
    samples_per_ray: usize,
) -> Vec<RayMonotonicityViolation> {
    let mut violations = Vec::new();
    for i in 0..rays {
        let theta = TAU * i as f64 / rays as f64;
        let direction = Vec2::from_polar(1.0, theta);
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..=samples_per_ray {
            let t = params.max_ray * k as f64 / samples_per_ray as f64;
            let q = params.center + direction * t;
            let level = 1.0 + boundary.gamma(q);
            if level < 0.0 {
                continue;
            }
            let mapped = params.r_max * level.sqrt();
            if let Some((_, prev_mapped)) = prev {
                if mapped < prev_mapped - 1e-12 {
                    violations.push(RayMonotonicityViolation {
                        theta,
                        ray_position: t,
                        mapped_before: prev_mapped,
                        mapped_after: mapped,
                    });
                }
            }
            prev = Some((t, mapped));
            if mapped >= params.r_max {
                break;
            }
        }
    }
    violations
}
