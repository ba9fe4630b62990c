//! Pyramidal 3D beam model.
//!
//! A beam is a pyramid with horizontal width `φ_H` and vertical width `φ_V`.
//! Inside the pyramid the gain is `π / arcsin(tan(φ_H/2)·tan(φ_V/2))`;
//! outside it is exactly zero (no side or back lobes).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Antenna gain of a pyramidal beam with the given widths (radians).
pub fn gain_from_beamwidths(phi_h: f64, phi_v: f64) -> Result<f64> {
    for (name, phi) in [("horizontal", phi_h), ("vertical", phi_v)] {
        if !(phi > 0.0 && phi < PI) {
            return Err(Error::domain(
                "gain_from_beamwidths",
                format!("{name} beamwidth {phi} rad is not in (0, π)"),
            ));
        }
    }
    let arg = (0.5 * phi_h).tan() * (0.5 * phi_v).tan();
    if arg > 1.0 + 4.0 * f64::EPSILON {
        return Err(Error::domain(
            "gain_from_beamwidths",
            format!("tan(φH/2)·tan(φV/2) = {arg} exceeds 1"),
        ));
    }
    Ok(PI / arg.min(1.0).asin())
}

/// Beamwidth `φ` of a square beam (`φ_H = φ_V = φ`) with linear gain `gain`.
pub fn square_beamwidth_from_gain(gain: f64) -> Result<f64> {
    if !gain.is_finite() || gain < 2.0 {
        return Err(Error::domain(
            "square_beamwidth_from_gain",
            format!("gain {gain} is below the pyramidal minimum of 2"),
        ));
    }
    Ok(2.0 * (PI / gain).sin().sqrt().atan())
}

/// A pyramidal beam whose gain is tied to its widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    phi_h: f64,
    phi_v: f64,
    gain: f64,
}

impl AntennaPattern {
    pub fn from_beamwidths(phi_h: f64, phi_v: f64) -> Result<Self> {
        let gain = gain_from_beamwidths(phi_h, phi_v)?;
        Ok(Self { phi_h, phi_v, gain })
    }

    /// Square beam with the given linear gain.
    pub fn square(gain: f64) -> Result<Self> {
        let phi = square_beamwidth_from_gain(gain)?;
        Ok(Self {
            phi_h: phi,
            phi_v: phi,
            gain,
        })
    }

    /// Square beam with the given gain in dBi.
    pub fn square_dbi(gain_dbi: f64) -> Result<Self> {
        Self::square(crate::db_to_linear(gain_dbi))
    }

    pub fn phi_h(&self) -> f64 {
        self.phi_h
    }

    pub fn phi_v(&self) -> f64 {
        self.phi_v
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Whether a direction offset by (`d_azimuth`, `d_elevation`) from
    /// boresight lies inside the beam.
    pub fn contains(&self, d_azimuth: f64, d_elevation: f64) -> bool {
        d_azimuth.abs() <= 0.5 * self.phi_h && d_elevation.abs() <= 0.5 * self.phi_v
    }

    /// Gain toward an offset direction: full gain inside, zero outside.
    pub fn gain_toward(&self, d_azimuth: f64, d_elevation: f64) -> f64 {
        if self.contains(d_azimuth, d_elevation) {
            self.gain
        } else {
            0.0
        }
    }
}

/// Fraction of azimuths covered by a horizontal beamwidth `phi_h`.
pub(crate) fn horizontal_hit_fraction(phi_h: f64) -> f64 {
    (phi_h / (2.0 * PI)).min(1.0)
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn right_angle_beam_has_gain_two() {
        // tan(π/4)² rounds just below 1 and asin has √ε sensitivity there.
        let g = gain_from_beamwidths(FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((g - 2.0).abs() < 1e-7);
        assert!((square_beamwidth_from_gain(2.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reference_gains() {
        // 12.5 dBi ⇔ 0.794 rad; root-found value of the gain equation is 17.779.
        let g = gain_from_beamwidths(0.794, 0.794).unwrap();
        assert!((g - 17.779427023029462).abs() < 1e-9);
        // 17.5 dBi (56.23) ⇔ 0.464 rad.
        let phi = square_beamwidth_from_gain(crate::db_to_linear(17.5)).unwrap();
        assert!((phi - 0.46408533089390773).abs() < 1e-12);
        let phi = square_beamwidth_from_gain(56.23).unwrap();
        assert!((phi - 0.464).abs() < 5e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(gain_from_beamwidths(0.0, 1.0).is_err());
        assert!(gain_from_beamwidths(PI, 1.0).is_err());
        assert!(gain_from_beamwidths(2.5, 2.5).is_err());
        assert!(square_beamwidth_from_gain(1.99).is_err());
        assert!(square_beamwidth_from_gain(f64::NAN).is_err());
    }

    #[test]
    fn horizontal_fraction() {
        assert_eq!(horizontal_hit_fraction(2.0 * PI), 1.0);
        assert_eq!(horizontal_hit_fraction(FRAC_PI_2), 0.25);
    }

    #[test]
    fn out_of_beam_gain_is_zero() {
        let p = AntennaPattern::square(10.0).unwrap();
        assert_eq!(p.gain_toward(0.0, 0.0), 10.0);
        assert_eq!(p.gain_toward(p.phi_h(), 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn gain_beamwidth_bijection(log_g in 2f64.ln()..1e4f64.ln()) {
            let g = log_g.exp();
            let phi = square_beamwidth_from_gain(g).unwrap();
            let back = gain_from_beamwidths(phi, phi).unwrap();
            prop_assert!(((back - g) / g).abs() < 1e-9);
        }

        #[test]
        fn gain_is_at_least_two(h in 0.01f64..3.1, v in 0.01f64..3.1) {
            if let Ok(g) = gain_from_beamwidths(h, v) {
                prop_assert!(g >= 2.0 - 1e-12);
            }
        }
    }
}
