//! Bump/ramp data for the Wilson deactivation homotopy:
//! f_t = f·(1 − φ(t)α(θ) − ψ(t)(1 − α(θ))),
//! g_t = g + (1 − g)·(φ(t)α(θ) + ψ(t)(1 − α(θ))),
//! with α supported on the arcs I_i' (value 1 on I_i) and the ramps
//! φ, ψ: [0,2] → [0,1] staging the two halves of the deactivation.
//! β and the script arcs are carried as data (the insertion sectors need
//! them named) but do not enter the field formulas.

use super::shape::step;
use super::wilson3::Wilson3Profile;
use crate::geom::angle_signed;
use crate::{PlugError, Result};
use serde::{Deserialize, Serialize};

/// A closed arc of the circle given by center and half-width.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Arc {
    pub center: f64,
    pub half_width: f64,
}

impl Arc {
    pub fn new(center: f64, half_width: f64) -> Self {
        Arc { center, half_width }
    }

    pub fn contains(&self, theta: f64) -> bool {
        angle_signed(theta, self.center).abs() <= self.half_width
    }

    pub fn disjoint(&self, other: &Arc) -> bool {
        angle_signed(self.center, other.center).abs() > self.half_width + other.half_width
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomotopyProfile {
    /// Arcs I_1, I_2 on which α = 1 (the insertion-box sectors live inside).
    pub i_arcs: [Arc; 2],
    /// Slightly larger arcs I_1', I_2' outside which α = 0.
    pub i_outer: [Arc; 2],
    /// Arcs 𝓘_1, 𝓘_2 on which β = 1.
    pub j_arcs: [Arc; 2],
    /// Outer arcs 𝓘_1', 𝓘_2' outside which β = 0.
    pub j_outer: [Arc; 2],
}

impl Default for HomotopyProfile {
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        // Symmetric placement: I_i at π/2 and 3π/2, script arcs at 0 and π.
        HomotopyProfile {
            i_arcs: [Arc::new(FRAC_PI_2, 0.3), Arc::new(3.0 * FRAC_PI_2, 0.3)],
            i_outer: [Arc::new(FRAC_PI_2, 0.4), Arc::new(3.0 * FRAC_PI_2, 0.4)],
            j_arcs: [Arc::new(0.0, 0.3), Arc::new(PI, 0.3)],
            j_outer: [Arc::new(0.0, 0.4), Arc::new(PI, 0.4)],
        }
    }
}

impl HomotopyProfile {
    /// The eight arcs must nest (I ⊂ I') and the four outer arcs must be
    /// pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            if self.i_arcs[k].half_width >= self.i_outer[k].half_width
                || angle_signed(self.i_arcs[k].center, self.i_outer[k].center).abs() > 1e-12
            {
                return Err(PlugError::Geometry("I_i not nested in I_i'".into()));
            }
            if self.j_arcs[k].half_width >= self.j_outer[k].half_width
                || angle_signed(self.j_arcs[k].center, self.j_outer[k].center).abs() > 1e-12
            {
                return Err(PlugError::Geometry("script I_i not nested in its outer arc".into()));
            }
        }
        let outers = [
            ("I_1'", self.i_outer[0]),
            ("I_2'", self.i_outer[1]),
            ("J_1'", self.j_outer[0]),
            ("J_2'", self.j_outer[1]),
        ];
        for a in 0..4 {
            for b in (a + 1)..4 {
                if !outers[a].1.disjoint(&outers[b].1) {
                    return Err(PlugError::Geometry(format!(
                        "arcs {} and {} overlap",
                        outers[a].0, outers[b].0
                    )));
                }
            }
        }
        Ok(())
    }

    fn arc_bump(theta: f64, inner: &Arc, outer: &Arc) -> f64 {
        let d = angle_signed(theta, inner.center).abs();
        if d <= inner.half_width {
            1.0
        } else if d >= outer.half_width {
            0.0
        } else {
            1.0 - step((d - inner.half_width) / (outer.half_width - inner.half_width))
        }
    }

    /// α: 1 on I_1 ∪ I_2, 0 outside I_1' ∪ I_2'.
    pub fn alpha(&self, theta: f64) -> f64 {
        Self::arc_bump(theta, &self.i_arcs[0], &self.i_outer[0])
            + Self::arc_bump(theta, &self.i_arcs[1], &self.i_outer[1])
    }

    /// β: 1 on 𝓘_1 ∪ 𝓘_2, 0 outside 𝓘_1' ∪ 𝓘_2'.
    pub fn beta(&self, theta: f64) -> f64 {
        Self::arc_bump(theta, &self.j_arcs[0], &self.j_outer[0])
            + Self::arc_bump(theta, &self.j_arcs[1], &self.j_outer[1])
    }

    /// φ: strictly increasing on [0,1], φ(0) = 0, φ ≡ 1 on [1,2]. The steep
    /// early rise opens the escape gates quickly for small t, which keeps
    /// quotient-flow exit times short at the homotopy values the scans use.
    pub fn phi(t: f64) -> f64 {
        0.92 * step(2.2 * t) + 0.08 * step(t)
    }

    /// ψ: 0 on [0,1], ψ(2) = 1.
    pub fn psi(t: f64) -> f64 {
        step(t - 1.0)
    }
}

/// The homotopy scalars (f_t, g_t) of the deactivation family.
///
/// Endpoints are returned through exact branches: t = 0 reproduces the base
/// profile bit-for-bit and φ = ψ = 1 gives exactly (0, 1).
pub fn homotopy_scalars(
    hp: &HomotopyProfile,
    base: &Wilson3Profile,
    t: f64,
    z: f64,
    theta: f64,
    r: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=2.0).contains(&t) {
        return Err(PlugError::Range(format!("homotopy parameter t={t} outside [0,2]")));
    }
    Ok(homotopy_scalars_unchecked(hp, base, t, z, theta, r))
}

#[inline]
pub(crate) fn homotopy_scalars_unchecked(
    hp: &HomotopyProfile,
    base: &Wilson3Profile,
    t: f64,
    z: f64,
    theta: f64,
    r: f64,
) -> (f64, f64) {
    let phi = HomotopyProfile::phi(t);
    let psi = HomotopyProfile::psi(t);
    if phi == 0.0 && psi == 0.0 {
        return (base.f(z, r), base.g(z, r));
    }
    if phi == 1.0 && psi == 1.0 {
        return (0.0, 1.0);
    }
    let a = hp.alpha(theta);
    // v = 1 − φα − ψ(1−α), arranged so saturated ramps are exact
    let v = (1.0 - a) * (1.0 - psi) + a * (1.0 - phi);
    let f = base.f(z, r);
    let g = base.g(z, r);
    (f * v, 1.0 - v * (1.0 - g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::wilson3::make_wilson3_profile;

    #[test]
    fn default_arcs_validate() {
        HomotopyProfile::default().validate().unwrap();
    }

    #[test]
    fn alpha_levels() {
        let hp = HomotopyProfile::default();
        let c = hp.i_arcs[0].center;
        assert_eq!(hp.alpha(c), 1.0);
        assert_eq!(hp.alpha(c + 0.29), 1.0);
        assert_eq!(hp.alpha(c + 0.41), 0.0);
        let v = hp.alpha(c + 0.35);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(hp.beta(0.0), 1.0);
        assert_eq!(hp.beta(0.5), 0.0);
    }

    #[test]
    fn ramps() {
        assert_eq!(HomotopyProfile::phi(0.0), 0.0);
        assert_eq!(HomotopyProfile::phi(1.0), 1.0);
        assert_eq!(HomotopyProfile::phi(1.7), 1.0);
        assert!(HomotopyProfile::phi(0.25) > 0.3);
        // increasing on [0,1]: non-decreasing at every sample (the smooth
        // step saturates in f64 near the endpoints) and strictly increasing
        // at coarse scale
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = HomotopyProfile::phi(k as f64 / 100.0);
            assert!(v >= prev, "phi decreases at t={}", k as f64 / 100.0);
            prev = v;
        }
        assert!(HomotopyProfile::phi(0.2) < HomotopyProfile::phi(0.5));
        assert!(HomotopyProfile::phi(0.5) < HomotopyProfile::phi(0.9));
        assert_eq!(HomotopyProfile::psi(0.3), 0.0);
        assert_eq!(HomotopyProfile::psi(1.0), 0.0);
        assert_eq!(HomotopyProfile::psi(2.0), 1.0);
    }

    #[test]
    fn scalars_at_t0_match_base_exactly() {
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        for (z, th, r) in [(0.3, 1.0, 2.1), (-1.0, 4.0, 2.0), (1.5, 0.2, 1.4)] {
            let (f, g) = homotopy_scalars(&hp, &base, 0.0, z, th, r).unwrap();
            assert_eq!(f, base.f(z, r));
            assert_eq!(g, base.g(z, r));
        }
    }

    #[test]
    fn scalars_at_t2_are_vertical_exactly() {
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        for (z, th, r) in [(0.3, 1.0, 2.1), (-1.0, 4.0, 2.0), (1.5, 0.2, 1.4)] {
            let (f, g) = homotopy_scalars(&hp, &base, 2.0, z, th, r).unwrap();
            assert_eq!(f, 0.0);
            assert_eq!(g, 1.0);
        }
    }

    #[test]
    fn scalars_at_t1_inside_i_arcs_are_vertical() {
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        let th = hp.i_arcs[0].center + 0.1;
        let (f, g) = homotopy_scalars(&hp, &base, 1.0, -1.0, th, 2.0).unwrap();
        assert!(f.abs() < 1e-15);
        assert!((g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalars_at_t1_in_script_arcs_match_base() {
        // α vanishes on the script arcs, and ψ(1) = 0, so the field is
        // untouched there at t = 1.
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        let th = hp.j_arcs[0].center;
        let (f, g) = homotopy_scalars(&hp, &base, 1.0, -1.0, th, 2.0).unwrap();
        assert_eq!(f, base.f(-1.0, 2.0));
        assert_eq!(g, base.g(-1.0, 2.0));
    }

    #[test]
    fn out_of_range_t_errors() {
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        assert!(homotopy_scalars(&hp, &base, 2.5, 0.0, 0.0, 2.0).is_err());
        assert!(homotopy_scalars(&hp, &base, -0.1, 0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn gate_floor_positive_for_positive_t() {
        // g_t >= phi(t) on the I arcs: the escape-gate bound.
        let hp = HomotopyProfile::default();
        let base = make_wilson3_profile();
        for &t in &[0.25, 0.5, 1.0] {
            let mut min_g = f64::INFINITY;
            for iz in 0..60 {
                let z = -2.0 + 4.0 * iz as f64 / 59.0;
                for ir in 0..30 {
                    let r = 1.0 + 2.0 * ir as f64 / 29.0;
                    for k in 0..2 {
                        let th = hp.i_arcs[k].center;
                        let (_, g) = homotopy_scalars(&hp, &base, t, z, th, r).unwrap();
                        min_g = min_g.min(g);
                    }
                }
            }
            let phi = HomotopyProfile::phi(t);
            assert!(min_g >= phi - 1e-12, "t={t}: min g_t {min_g} < phi {phi}");
        }
    }
}
