//! Human-body blockage of LOS links.
//!
//! A blocker of radius `r_B` and height `h_B` cuts the UE–AP ray when its
//! center falls in a ground rectangle that starts at the UE, points at the
//! AP, has half-width `r_B` and length `x̄ = (h_B − h_U)/(h_A − h_U)·x + r_B`.
//! Past `x̄` the ray is above blocker height.

use crate::channel::SystemParams;
use crate::geometry::Point2;

/// `ζ` and `η` in `p_L(x) = ζ·e^{−ηx}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageConstants {
    pub zeta: f64,
    pub eta: f64,
}

impl BlockageConstants {
    pub fn new(params: &SystemParams) -> Self {
        let SystemParams { lambda_b, r_b, .. } = *params;
        Self {
            zeta: (-2.0 * lambda_b * r_b * r_b).exp(),
            eta: 2.0 * lambda_b * r_b * (params.h_b - params.h_u) / params.height_gap(),
        }
    }

    pub fn los_probability(&self, x: f64) -> f64 {
        self.zeta * (-self.eta * x).exp()
    }
}

/// A cylindrical blocker standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocker {
    pub center: Point2,
    pub radius: f64,
    pub height: f64,
}

impl Blocker {
    pub fn from_params(center: Point2, params: &SystemParams) -> Self {
        Self {
            center,
            radius: params.r_b,
            height: params.h_b,
        }
    }
}

/// Length `x̄` of the blockage zone for a link of 2D length `x`.
pub fn blockage_zone_length(params: &SystemParams, x: f64) -> f64 {
    zone_length(params, params.h_b, params.r_b, x)
}

fn zone_length(params: &SystemParams, height: f64, radius: f64, x: f64) -> f64 {
    (height - params.h_u) / params.height_gap() * x + radius
}

/// LOS probability: void probability of the blocker process in the zone.
pub fn los_probability(params: &SystemParams, x: f64) -> f64 {
    (-2.0 * params.lambda_b * params.r_b * blockage_zone_length(params, x)).exp()
}

/// Whether any blocker center lies in the blockage zone of the UE→AP link.
///
/// Each blocker is tested against a zone built from its own radius and
/// height, which coincides with [`blockage_zone_length`] for blockers drawn
/// from `params`. A zero-length link is taken to point along +x.
pub fn is_link_blocked(ue: Point2, ap: Point2, blockers: &[Blocker], params: &SystemParams) -> bool {
    if blockers.is_empty() {
        return false;
    }
    let rel = ap - ue;
    let x = rel.norm();
    let dir = if x > 0.0 { rel * (1.0 / x) } else { Point2::new(1.0, 0.0) };
    blockers.iter().any(|b| {
        let offset = b.center - ue;
        let along = offset.dot(dir);
        along >= 0.0
            && along <= zone_length(params, b.height, b.radius, x)
            && dir.cross(offset).abs() <= b.radius
    })
}
