//! Line-of-sight THz propagation and the association radius.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::antenna::AntennaPattern;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::lambert::lambert_w0;

/// Speed of light in vacuum (m/s), exact SI value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical and statistical parameters of a deployment.
///
/// All quantities are linear SI: watts, meters, hertz, 1/m². Decibel values
/// only appear in the config layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// AP height (m).
    pub h_a: f64,
    /// UE height (m).
    pub h_u: f64,
    /// Blocker height (m).
    pub h_b: f64,
    /// Blocker radius (m).
    pub r_b: f64,
    /// Carrier frequency (Hz).
    pub frequency: f64,
    /// Molecular absorption coefficient `K(f)` (1/m).
    pub absorption: f64,
    /// Transmit power (W).
    pub tx_power: f64,
    /// AWGN power (W).
    pub noise_power: f64,
    pub ap_pattern: AntennaPattern,
    pub ue_pattern: AntennaPattern,
    /// AP density (1/m²).
    pub lambda_a: f64,
    /// Blocker density (1/m²).
    pub lambda_b: f64,
    /// SINR threshold (linear).
    pub tau: f64,
}

impl Default for SystemParams {
    /// The reference indoor deployment: 1.07 THz, APs at 3 m, UEs at 1 m,
    /// human blockers 1.5 m tall with 0.3 m radius, 20 dBm transmit power,
    /// −74.4 dBm noise, 17.5/12.5 dBi AP/UE gains, densities 0.1 and 0.2 m⁻²,
    /// and a 3 dB threshold.
    fn default() -> Self {
        Self {
            h_a: 3.0,
            h_u: 1.0,
            h_b: 1.5,
            r_b: 0.3,
            frequency: 1.07e12,
            absorption: 0.192,
            tx_power: crate::dbm_to_watts(20.0),
            noise_power: crate::dbm_to_watts(-74.4),
            ap_pattern: AntennaPattern::square_dbi(17.5).expect("17.5 dBi is a valid gain"),
            ue_pattern: AntennaPattern::square_dbi(12.5).expect("12.5 dBi is a valid gain"),
            lambda_a: 0.1,
            lambda_b: 0.2,
            tau: crate::db_to_linear(3.0),
        }
    }
}

impl SystemParams {
    /// Checks the ordering and positivity invariants.
    ///
    /// Densities may be zero (interference-free or blockage-free runs) and
    /// `K` may be zero (absorption switched off).
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.h_a,
            self.h_u,
            self.h_b,
            self.r_b,
            self.frequency,
            self.absorption,
            self.tx_power,
            self.noise_power,
            self.lambda_a,
            self.lambda_b,
            self.tau,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(self.h_a > self.h_b && self.h_b > self.h_u && self.h_u > 0.0) {
            return Err(Error::InvalidParams(format!(
                "height ordering h_A > h_B > h_U > 0 violated (h_A = {}, h_B = {}, h_U = {})",
                self.h_a, self.h_b, self.h_u
            )));
        }
        for (name, v) in [
            ("r_B", self.r_b),
            ("f", self.frequency),
            ("P_T", self.tx_power),
            ("sigma2", self.noise_power),
            ("tau", self.tau),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("K", self.absorption), ("lambda_A", self.lambda_a), ("lambda_B", self.lambda_b)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// AP height above the UE plane, `h_A − h_U`.
    pub fn height_gap(&self) -> f64 {
        self.h_a - self.h_u
    }

    /// Received-power prefactor `P_T·G_A·G_U·c²/(4πf)²` (W·m²).
    pub fn rho(&self) -> f64 {
        let wl = SPEED_OF_LIGHT / (4.0 * PI * self.frequency);
        self.tx_power * self.ap_pattern.gain() * self.ue_pattern.gain() * wl * wl
    }

    /// 3D distance for a 2D separation `x`.
    pub fn distance_3d(&self, x: f64) -> f64 {
        self.height_gap().hypot(x)
    }

    /// Received LOS power at 2D distance `x` with both beams aligned.
    pub fn received_power(&self, x: f64) -> f64 {
        self.power_at_3d(self.distance_3d(x))
    }

    fn power_at_3d(&self, d: f64) -> f64 {
        self.rho() * (-self.absorption * d).exp() / (d * d)
    }

    /// Unblocked, interference-free SNR at 2D distance `x`.
    pub fn snr(&self, x: f64) -> f64 {
        self.received_power(x) / self.noise_power
    }

    /// 3D distance at which the received power equals `power`, inverting
    /// `ρ·d⁻²·e^{−Kd}` through the Lambert W function.
    pub fn distance_for_power(&self, power: f64) -> Result<f64> {
        if power.is_nan() || power <= 0.0 {
            return Err(Error::domain("distance_for_power", format!("power {power} must be positive")));
        }
        let amplitude = (self.rho() / power).sqrt();
        if self.absorption == 0.0 {
            return Ok(amplitude);
        }
        let k = self.absorption;
        Ok(2.0 / k * lambert_w0(0.5 * k * amplitude)?)
    }

    /// Maximum association radius `R_T`: the 2D distance at which the
    /// unblocked SNR equals `τ`.
    pub fn max_association_radius(&self) -> Result<f64> {
        let d = self.distance_for_power(self.noise_power * self.tau)?;
        let h = self.height_gap();
        if d < h * (1.0 - 1e-12) {
            return Err(Error::InfeasibleGeometry(format!(
                "SNR threshold {} is not reached even at x = 0 (peak SNR {})",
                self.tau,
                self.snr(0.0)
            )));
        }
        Ok((d * d - h * h).max(0.0).sqrt())
    }

    /// Elevation of the UE–AP line above the horizontal plane at 2D
    /// distance `x`; `π/2` directly below the AP.
    pub fn elevation_angle(&self, x: f64) -> f64 {
        if x == 0.0 {
            FRAC_PI_2
        } else {
            (self.height_gap() / x).atan()
        }
    }

    /// 2D distance whose elevation angle is `psi` (inverse of
    /// [`elevation_angle`](Self::elevation_angle)); `∞` for `psi ≤ 0`.
    pub fn distance_at_elevation(&self, psi: f64) -> f64 {
        if psi <= 0.0 {
            f64::INFINITY
        } else if psi >= FRAC_PI_2 {
            0.0
        } else {
            self.height_gap() / psi.tan()
        }
    }
}

/// Geometry of one UE–AP link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// 2D distance (m).
    pub x: f64,
    /// 3D distance (m).
    pub d: f64,
    /// Azimuth of the AP seen from the UE, in `[0, 2π)`.
    pub theta: f64,
    /// Elevation of the AP seen from the UE, in `(0, π/2]`.
    pub psi: f64,
}

impl LinkGeometry {
    pub fn between(params: &SystemParams, ue: Point2, ap: Point2) -> Self {
        let rel = ap - ue;
        let x = rel.norm();
        Self {
            x,
            d: params.distance_3d(x),
            theta: rel.azimuth(),
            psi: params.elevation_angle(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference values below were computed with 40-digit arithmetic.
    const RHO_TABLE: f64 = 4.971118575546729e-8;
    const PR5_TABLE: f64 = 6.095602400970028e-10;
    const RT_TABLE: f64 = 9.813604017351714;

    fn unit_prefactor() -> SystemParams {
        SystemParams {
            tx_power: 1.0,
            frequency: SPEED_OF_LIGHT / (4.0 * PI),
            ap_pattern: AntennaPattern::square(2.0).unwrap(),
            ue_pattern: AntennaPattern::square(2.0).unwrap(),
            ..SystemParams::default()
        }
    }

    #[test]
    fn rho_collapses_to_gain_product() {
        // With f = c/4π and P_T = 1 the prefactor is G_A·G_U.
        let p = unit_prefactor();
        assert!((p.rho() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rho_reference() {
        let p = SystemParams::default();
        assert!(((p.rho() - RHO_TABLE) / RHO_TABLE).abs() < 1e-12);
        let doubled = SystemParams {
            tx_power: 2.0 * p.tx_power,
            ..p
        };
        assert_eq!(doubled.rho(), 2.0 * p.rho());
    }

    #[test]
    fn received_power_reference() {
        let p = SystemParams::default();
        assert!(((p.received_power(5.0) - PR5_TABLE) / PR5_TABLE).abs() < 1e-12);
        let free = SystemParams { absorption: 0.0, ..p };
        let d = free.distance_3d(7.0);
        assert!((free.received_power(7.0) - free.rho() / (d * d)).abs() < 1e-25);
    }

    #[test]
    fn association_radius_reference() {
        let p = SystemParams::default();
        let rt = p.max_association_radius().unwrap();
        assert!((rt - RT_TABLE).abs() < 1e-9);
        assert!(((p.snr(rt) - p.tau) / p.tau).abs() < 1e-9);
    }

    #[test]
    fn association_radius_shrinks_with_noise() {
        let p = SystemParams::default();
        let noisier = SystemParams {
            noise_power: 2.0 * p.noise_power,
            ..p
        };
        assert!(noisier.max_association_radius().unwrap() < p.max_association_radius().unwrap());
    }

    #[test]
    fn association_radius_boundary_and_infeasible() {
        let p = SystemParams::default();
        let edge = SystemParams { tau: p.snr(0.0), ..p };
        assert!(edge.max_association_radius().unwrap() < 1e-5);
        let beyond = SystemParams { tau: 2.0 * p.snr(0.0), ..p };
        assert!(matches!(beyond.max_association_radius(), Err(Error::InfeasibleGeometry(_))));
    }

    #[test]
    fn association_radius_without_absorption() {
        let p = SystemParams {
            absorption: 0.0,
            ..SystemParams::default()
        };
        let rt = p.max_association_radius().unwrap();
        assert!(((p.snr(rt) - p.tau) / p.tau).abs() < 1e-12);
    }

    #[test]
    fn elevation_examples() {
        let p = SystemParams::default();
        assert_eq!(p.elevation_angle(0.0), FRAC_PI_2);
        assert!((p.elevation_angle(2.0) - PI / 4.0).abs() < 1e-15);
        assert!((p.elevation_angle(5.0) - 0.3805063771123649).abs() < 1e-15);
        assert!((p.distance_at_elevation(p.elevation_angle(5.0)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn link_geometry() {
        let p = SystemParams::default();
        let g = LinkGeometry::between(&p, Point2::new(1.0, 1.0), Point2::new(1.0, -2.0));
        assert_eq!(g.x, 3.0);
        assert!((g.d - 13f64.sqrt()).abs() < 1e-15);
        assert!((g.theta - 1.5 * PI).abs() < 1e-15);
        assert!((g.psi - (2.0f64 / 3.0).atan()).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_heights() {
        let p = SystemParams {
            h_b: 3.5,
            ..SystemParams::default()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("height ordering"), "{err}");
        assert!(SystemParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn received_power_composition(x in 0.0f64..500.0) {
            let p = SystemParams::default();
            let d = ((p.h_a - p.h_u).powi(2) + x * x).sqrt();
            let literal = p.rho() * d.powi(-2) * (-p.absorption * d).exp();
            prop_assert!(((p.received_power(x) - literal) / literal).abs() < 1e-13);
        }

        #[test]
        fn received_power_decreasing(a in 0.0f64..100.0, gap in 1e-6f64..10.0) {
            let p = SystemParams::default();
            prop_assert!(p.received_power(a) > p.received_power(a + gap));
        }

        #[test]
        fn association_radius_fixed_point(
            k in 0.0f64..1.0,
            tau_db in -5.0f64..15.0,
            pt_dbm in 10.0f64..30.0,
        ) {
            let p = SystemParams {
                absorption: k,
                tau: crate::db_to_linear(tau_db),
                tx_power: crate::dbm_to_watts(pt_dbm),
                ..SystemParams::default()
            };
            if let Ok(rt) = p.max_association_radius() {
                prop_assert!(((p.snr(rt) - p.tau) / p.tau).abs() < 1e-9);
            }
        }
    }
}
