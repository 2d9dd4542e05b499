//! The η ramp that drives the parametric plug: a non-decreasing map
//! [0,1] → [0,2], identically 0 on [0, 1/2], positive on (1/2, 1], and
//! identically 2 near 1, together with the family η_s = (1−s)η + 2s.

use super::shape::step;
use crate::{PlugError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaProfile {
    /// η rises from 0 at u = 1/2 to 2 at u = ramp_top (then stays at 2).
    pub ramp_top: f64,
}

impl Default for EtaProfile {
    fn default() -> Self {
        // Steep ramp: η(0.6) is already well away from 0, so the parametric
        // scans at moderate |y| run at comfortably positive homotopy values.
        EtaProfile { ramp_top: 0.75 }
    }
}

impl EtaProfile {
    pub fn base(&self, u: f64) -> f64 {
        2.0 * step((u - 0.5) / (self.ramp_top - 0.5))
    }

    /// η_s(u) = (1−s)·η(u) + 2s.
    pub fn value(&self, s: f64, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(PlugError::Range(format!("family parameter s={s} outside [0,1]")));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(PlugError::Range(format!("radial parameter u={u} outside [0,1]")));
        }
        if s == 0.0 {
            // exact: the s = 0 member is the base ramp itself
            return Ok(self.base(u));
        }
        Ok((1.0 - s) * self.base(u) + 2.0 * s)
    }
}

/// Evaluate the family: η_s(u).
pub fn eta_value(ep: &EtaProfile, s: f64, u: f64) -> Result<f64> {
    ep.value(s, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_ramp_levels() {
        let ep = EtaProfile::default();
        assert_eq!(ep.base(0.0), 0.0);
        assert_eq!(ep.base(0.3), 0.0);
        assert_eq!(ep.base(0.5), 0.0);
        assert!(ep.base(0.6) > 0.0);
        assert_eq!(ep.base(0.75), 2.0);
        assert_eq!(ep.base(1.0), 2.0);
    }

    #[test]
    fn family_values() {
        let ep = EtaProfile::default();
        assert_eq!(eta_value(&ep, 0.0, 0.3).unwrap(), 0.0);
        assert_eq!(eta_value(&ep, 1.0, 0.123).unwrap(), 2.0);
        // η(1) = 2 forces (1−s)·2 + 2s = 2 for every s
        assert!((eta_value(&ep, 0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn range_errors() {
        let ep = EtaProfile::default();
        assert!(eta_value(&ep, -0.1, 0.5).is_err());
        assert!(eta_value(&ep, 0.5, 1.2).is_err());
    }

    #[test]
    fn monotone_in_both_arguments() {
        let ep = EtaProfile::default();
        for i in 0..20 {
            let s = i as f64 / 19.0;
            let mut prev = -1.0;
            for j in 0..40 {
                let u = j as f64 / 39.0;
                let v = eta_value(&ep, s, u).unwrap();
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
        for j in 0..40 {
            let u = j as f64 / 39.0;
            let mut prev = -1.0;
            for i in 0..20 {
                let s = i as f64 / 19.0;
                let v = eta_value(&ep, s, u).unwrap();
                assert!(v >= prev - 1e-12, "eta not monotone in s at u={u}");
                prev = v;
            }
        }
    }
}
