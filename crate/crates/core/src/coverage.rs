//! Closed-form downlink coverage under blockage and 3D directional beams.
//!
//! An interfering AP disturbs the tagged UE only if (1) it lies in the UE's
//! horizontal beam, (2) it lies in the UE's vertical beam, (3) the UE lies in
//! the AP's horizontal beam, (4) the UE lies in the AP's vertical beam and
//! (5) its link to the UE is unblocked. Conditions 3–5 thin the AP process;
//! conditions 1–2 restrict it to an annular sector around the UE. The tagged
//! UE is covered when no surviving AP is close enough to push the SINR below
//! `τ` on its own, so `p_c,L = e^{−Λ}` with `Λ` the mean number of such APs.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::antenna::horizontal_hit_fraction;
use crate::blockage::BlockageConstants;
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::quadrature::AdaptiveSimpson;

/// Radial extent `[r_min, r_max]` of the tagged UE's vertical beam on the AP
/// plane. `r_max` is `+∞` when the upper beam edge clears the horizon of the
/// AP plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalWindow {
    pub r_min: f64,
    pub r_max: f64,
}

impl VerticalWindow {
    pub fn contains(&self, x: f64) -> bool {
        self.r_min <= x && x <= self.r_max
    }
}

/// Vertical window of the tagged UE whose beam points at an AP `x0` away.
pub fn vertical_window(params: &SystemParams, x0: f64) -> VerticalWindow {
    let h = params.height_gap();
    let half = 0.5 * params.ue_pattern.phi_v();
    let t = half.tan();
    let psi0 = params.elevation_angle(x0);

    let denom = h - x0 * t;
    let r_max = if psi0 >= half && denom > 0.0 {
        h * (x0 + h * t) / denom
    } else {
        f64::INFINITY
    };
    let r_min = if psi0 <= 0.5 * (PI - params.ue_pattern.phi_v()) {
        (h * (x0 - h * t) / (h + x0 * t)).max(0.0)
    } else {
        0.0
    };
    VerticalWindow { r_min, r_max }
}

/// Probability that the tagged UE falls in an interferer's horizontal beam.
pub fn p_hit_horizontal(params: &SystemParams) -> f64 {
    horizontal_hit_fraction(params.ap_pattern.phi_h())
}

/// Outcome of the dominant-interferer radius computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominantRadius {
    /// `P_r(x0) ≤ τσ²`: the tagged link fails on noise alone.
    SnrInfeasible,
    /// Even an AP at 2D distance 0 cannot cause outage by itself.
    NoRegion,
    /// APs closer than this 2D distance are dominant interferers.
    Radius(f64),
}

impl DominantRadius {
    pub fn compute(params: &SystemParams, x0: f64) -> Result<Self> {
        let signal = params.received_power(x0);
        let margin = signal - params.tau * params.noise_power;
        if margin.is_nan() || margin <= 0.0 {
            return Ok(Self::SnrInfeasible);
        }
        // A lone interferer at 3D distance d causes outage iff
        // ρ d⁻² e^{−Kd} > (P_r(x0) − τσ²)/τ.
        let d = params.distance_for_power(margin / params.tau)?;
        let h = params.height_gap();
        if d * d <= h * h {
            Ok(Self::NoRegion)
        } else {
            Ok(Self::Radius((d * d - h * h).sqrt()))
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Self::Radius(r) => Some(r),
            _ => None,
        }
    }
}

/// Analytic coverage at one link distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    /// `p_c = p_L · p_c,L`.
    pub p_c: f64,
    /// Coverage given an unblocked tagged link, `e^{−Λ}`.
    pub p_cl: f64,
    /// LOS probability of the tagged link.
    pub p_l: f64,
    /// Mean number of dominant interferers; `+∞` when SNR-infeasible.
    pub lambda: f64,
    pub dominant_radius: Option<f64>,
    /// `Λ + η·x0 + 2λ_B r_B²`, so that `p_c = e^{−Ω}`.
    pub omega: f64,
    pub snr_infeasible: bool,
    /// `x0 > R_T` (or `R_T` does not exist).
    pub outside_association: bool,
}

impl CoverageResult {
    fn infeasible(params: &SystemParams, x0: f64) -> Self {
        let p_l = BlockageConstants::new(params).los_probability(x0);
        Self {
            p_c: 0.0,
            p_cl: 0.0,
            p_l,
            lambda: f64::INFINITY,
            dominant_radius: None,
            omega: f64::INFINITY,
            snr_infeasible: true,
            outside_association: true,
        }
    }
}

/// Coverage at 2D link distance `x0`. Parameter sets whose association radius
/// does not exist yield an SNR-infeasible result rather than an error.
pub fn coverage(params: &SystemParams, x0: f64) -> Result<CoverageResult> {
    match CoverageModel::new(*params) {
        Ok(model) => model.coverage(x0),
        Err(Error::InfeasibleGeometry(_)) => Ok(CoverageResult::infeasible(params, x0)),
        Err(e) => Err(e),
    }
}

/// Coverage given that the tagged link is in LOS, `p_c,L(x0)`.
pub fn coverage_given_los(params: &SystemParams, x0: f64) -> Result<f64> {
    coverage(params, x0).map(|r| r.p_cl)
}

/// The analytic chain for one parameter set, with the association radius
/// and the interferer-elevation breakpoints precomputed.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    params: SystemParams,
    blockage: BlockageConstants,
    association_radius: f64,
    /// Smallest elevation of an interferer's beam, `arctan(h/R_T)`.
    beta_min: f64,
    /// `(h/R_T)²`.
    height_ratio_sq: f64,
    x_mu: f64,
    x_nu: f64,
    quad: AdaptiveSimpson,
}

impl CoverageModel {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        let association_radius = params.max_association_radius()?;
        let h = params.height_gap();
        let beta_min = h.atan2(association_radius);
        let half = 0.5 * params.ap_pattern.phi_v();
        Ok(Self {
            blockage: BlockageConstants::new(&params),
            association_radius,
            beta_min,
            height_ratio_sq: (h / association_radius).powi(2),
            x_mu: params.distance_at_elevation((beta_min + half).min(FRAC_PI_2)),
            x_nu: params.distance_at_elevation((beta_min - half).max(0.0)),
            params,
            quad: AdaptiveSimpson::with_rel_tol(1e-10),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn blockage(&self) -> BlockageConstants {
        self.blockage
    }

    pub fn association_radius(&self) -> f64 {
        self.association_radius
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    /// Breakpoints `(x_μ, x_ν)` of the vertical hit probability.
    pub fn breakpoints(&self) -> (f64, f64) {
        (self.x_mu, self.x_nu)
    }

    pub fn vertical_window(&self, x0: f64) -> VerticalWindow {
        vertical_window(&self.params, x0)
    }

    pub fn p_hit_horizontal(&self) -> f64 {
        p_hit_horizontal(&self.params)
    }

    /// Probability that an interferer `x` away has the tagged UE inside its
    /// vertical beam, given that its own UE is uniform on the association disc.
    ///
    /// Piecewise in `x`: both beam edges inside the elevation support on
    /// `[0, x_μ]`, only the upper edge on `(x_μ, x_ν)`, none beyond. The upper
    /// beam edge saturates at `π/2` for interferers almost overhead.
    pub fn p_hit_vertical(&self, x: f64) -> f64 {
        if x >= self.x_nu {
            return 0.0;
        }
        let psi = self.params.elevation_angle(x);
        let half = 0.5 * self.params.ap_pattern.phi_v();
        let upper = cot_sq(psi + half);
        let p = if x <= self.x_mu {
            self.height_ratio_sq * (cot_sq((psi - half).max(self.beta_min)) - upper)
        } else {
            1.0 - self.height_ratio_sq * upper
        };
        p.clamp(0.0, 1.0)
    }

    /// Density of an interferer's beam elevation `β`.
    pub fn beta_pdf(&self, beta: f64) -> f64 {
        if beta < self.beta_min || beta >= FRAC_PI_2 {
            return 0.0;
        }
        let (s, c) = beta.sin_cos();
        2.0 * self.height_ratio_sq * c / (s * s * s)
    }

    /// Distribution function of `β`.
    pub fn beta_cdf(&self, beta: f64) -> f64 {
        if beta <= self.beta_min {
            0.0
        } else if beta >= FRAC_PI_2 {
            1.0
        } else {
            (1.0 - self.height_ratio_sq * cot_sq(beta)).clamp(0.0, 1.0)
        }
    }

    /// [`p_hit_vertical`](Self::p_hit_vertical) by integrating
    /// [`beta_pdf`](Self::beta_pdf) over the AP's vertical beam.
    pub fn p_hit_vertical_by_quadrature(&self, x: f64) -> f64 {
        let psi = self.params.elevation_angle(x);
        let half = 0.5 * self.params.ap_pattern.phi_v();
        let lo = (psi - half).max(self.beta_min);
        let hi = (psi + half).min(FRAC_PI_2);
        let q = AdaptiveSimpson::with_rel_tol(1e-12);
        q.integrate(|b| self.beta_pdf(b), lo, hi, &[])
    }

    /// Probability that an AP at distance `x` inside the UE's beam footprint
    /// actually interferes: `p_H,H · p_H,V(x) · p_L(x)`.
    pub fn interferer_activity_probability(&self, x: f64) -> f64 {
        self.p_hit_horizontal() * self.p_hit_vertical(x) * self.blockage.los_probability(x)
    }

    pub fn dominant_radius(&self, x0: f64) -> Result<DominantRadius> {
        DominantRadius::compute(&self.params, x0)
    }

    /// Mean number `Λ` of dominant interferers; `None` when the tagged link
    /// is SNR-infeasible.
    pub fn thinned_density(&self, x0: f64) -> Result<Option<f64>> {
        let radius = match self.dominant_radius(x0)? {
            DominantRadius::SnrInfeasible => return Ok(None),
            DominantRadius::NoRegion => return Ok(Some(0.0)),
            DominantRadius::Radius(r) => r,
        };
        let window = self.vertical_window(x0);
        let upper = radius.min(window.r_max);
        let p = &self.params;
        let prefactor = p.lambda_a * self.blockage.zeta * p.ap_pattern.phi_h() * p.ue_pattern.phi_h() / (2.0 * PI);
        if upper <= window.r_min || prefactor == 0.0 {
            return Ok(Some(0.0));
        }
        let eta = self.blockage.eta;
        // Kinks: both breakpoints and the distance at which the AP beam's
        // upper edge reaches the vertical.
        let saturation = p.height_gap() * (0.5 * p.ap_pattern.phi_v()).tan();
        let integral = self.quad.integrate(
            |x| self.p_hit_vertical(x) * (-eta * x).exp() * x,
            window.r_min,
            upper,
            &[self.x_mu, self.x_nu, saturation],
        );
        Ok(Some(prefactor * integral))
    }

    pub fn coverage(&self, x0: f64) -> Result<CoverageResult> {
        let p_l = self.blockage.los_probability(x0);
        let dominant = self.dominant_radius(x0)?;
        let Some(lambda) = self.thinned_density(x0)? else {
            return Ok(CoverageResult {
                outside_association: x0 > self.association_radius,
                ..CoverageResult::infeasible(&self.params, x0)
            });
        };
        let p_cl = (-lambda).exp();
        let p = &self.params;
        Ok(CoverageResult {
            p_c: p_l * p_cl,
            p_cl,
            p_l,
            lambda,
            dominant_radius: dominant.radius(),
            omega: lambda + self.blockage.eta * x0 + 2.0 * p.lambda_b * p.r_b * p.r_b,
            snr_infeasible: false,
            outside_association: x0 > self.association_radius,
        })
    }
}

/// `cot²(a)`, with angles at or past the vertical mapped to 0.
fn cot_sq(a: f64) -> f64 {
    if a >= FRAC_PI_2 {
        0.0
    } else {
        let (s, c) = a.sin_cos();
        (c / s).powi(2)
    }
}
