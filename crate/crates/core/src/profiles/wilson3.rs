//! The scalar pair (f, g) defining the 3-D Wilson field
//! X = f(z,r) ∂_θ + g(z,r) ∂_z on W = [−2,2] × S¹ × [1,3].
//!
//! f is antisymmetric and g symmetric in z; f = 0 and g = 1 on a collar of
//! ∂W; g ≥ 0 vanishing exactly on B = {|z| = 1, r = 2} with quadratic
//! contact; f ≥ 0 on {z > 0} and f = 1 on [1/4, 7/4] × [5/4, 11/4].
//!
//! g is shaped as 1 − χ(z)ρ(r) where χ and ρ peak at exactly 1 on |z| = 1
//! and r = 2 and sit on a broad sub-unit plateau across the action zone, so
//! the vertical speed stays small throughout the region the self-insertion
//! occupies. The tubes of the insertion flowboxes need that slack to fit
//! inside W for their full transit time.

use super::shape::{bump, plateau, plateau_sq, step};
use crate::{PlugError, Result};
use serde::{Deserialize, Serialize};

/// Serializable shape parameters. Defaults are the tuned values used by
/// every plug in the crate; experiments that override them must re-validate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wilson3Params {
    /// Width of the boundary collar where f = 0, g = 1.
    pub collar: f64,
    /// f rises from 0 at z = 0 to 1 at z = f_rise.
    pub f_rise: f64,
    /// f returns to 0 between z = f_fall.0 and z = f_fall.1.
    pub f_fall: (f64, f64),
    /// Radial plateau of f: 0 outside (r0, r3), 1 exactly on [r1, r2].
    pub f_radial: (f64, f64, f64, f64),
    /// Plateau level of the g-shape away from the pinned peaks.
    pub g_base: f64,
    /// Half-width of the bumps pinning g to 0 at B.
    pub g_pin_width: f64,
    /// z-plateau of the g-shape: 1 on [−a, a], 0 outside (−b, b).
    pub g_plat_z: (f64, f64),
    /// r-plateau of the g-shape.
    pub g_plat_r: (f64, f64, f64, f64),
}

impl Default for Wilson3Params {
    fn default() -> Self {
        Wilson3Params {
            collar: 0.15,
            f_rise: 0.25,
            f_fall: (1.75, 1.85),
            f_radial: (1.15, 1.25, 2.75, 2.85),
            g_base: 0.96,
            g_pin_width: 0.45,
            g_plat_z: (1.7, 1.82),
            g_plat_r: (1.2, 1.3, 2.7, 2.8),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wilson3Profile {
    pub params: Wilson3Params,
}

impl Wilson3Profile {
    pub fn new(params: Wilson3Params) -> Self {
        Wilson3Profile { params }
    }

    /// One-sided envelope of f in z: 0 for z ≤ 0, 1 on [f_rise, f_fall.0].
    #[inline]
    fn m_pos(&self, z: f64) -> f64 {
        let p = &self.params;
        if z <= 0.0 {
            return 0.0;
        }
        step(z / p.f_rise) * (1.0 - step((z - p.f_fall.0) / (p.f_fall.1 - p.f_fall.0)))
    }

    #[inline]
    pub fn f(&self, z: f64, r: f64) -> f64 {
        let p = &self.params;
        let m = self.m_pos(z) - self.m_pos(-z);
        if m == 0.0 {
            return 0.0;
        }
        let (r0, r1, r2, r3) = p.f_radial;
        m * plateau(r, r0, r1, r2, r3)
    }

    #[inline]
    fn chi(&self, z: f64) -> f64 {
        let p = &self.params;
        let (a, b) = p.g_plat_z;
        let plat = plateau_sq(z * z, a * a, b * b);
        let pins = bump((z - 1.0) / p.g_pin_width) + bump((z + 1.0) / p.g_pin_width);
        p.g_base * plat + (1.0 - p.g_base) * pins
    }

    #[inline]
    fn rho(&self, r: f64) -> f64 {
        let p = &self.params;
        let (r0, r1, r2, r3) = p.g_plat_r;
        p.g_base * plateau(r, r0, r1, r2, r3) + (1.0 - p.g_base) * bump((r - 2.0) / p.g_pin_width)
    }

    #[inline]
    pub fn g(&self, z: f64, r: f64) -> f64 {
        1.0 - self.chi(z) * self.rho(r)
    }

    /// Grid validation of all profile constraints. `nz × nr` nodes.
    pub fn validate_grid(&self, nz: usize, nr: usize) -> Result<Wilson3GridReport> {
        let p = &self.params;
        let mut rep = Wilson3GridReport::default();
        let zs: Vec<f64> = (0..nz).map(|i| -2.0 + 4.0 * i as f64 / (nz - 1) as f64).collect();
        let rs: Vec<f64> = (0..nr).map(|j| 1.0 + 2.0 * j as f64 / (nr - 1) as f64).collect();

        for &z in &zs {
            for &r in &rs {
                let f = self.f(z, r);
                let g = self.g(z, r);
                rep.sym_violation = rep
                    .sym_violation
                    .max((f + self.f(-z, r)).abs())
                    .max((g - self.g(-z, r)).abs());
                let in_collar = z.abs() >= 2.0 - p.collar || r <= 1.0 + p.collar || r >= 3.0 - p.collar;
                if in_collar {
                    rep.collar_violation = rep.collar_violation.max(f.abs()).max((g - 1.0).abs());
                }
                if g < rep.g_min {
                    rep.g_min = g;
                }
                let on_b = (z.abs() - 1.0).abs() < 1e-9 && (r - 2.0).abs() < 1e-9;
                if on_b {
                    rep.g_on_zero_set = rep.g_on_zero_set.max(g.abs());
                } else {
                    // away from B by at least a cell, g must be positive
                    let db = ((z.abs() - 1.0).powi(2) + (r - 2.0).powi(2)).sqrt();
                    if db > 0.05 && g < rep.g_min_off_b {
                        rep.g_min_off_b = g;
                    }
                }
                if z > 0.0 && f < -1e-12 {
                    rep.f_sign_violation = rep.f_sign_violation.max(-f);
                }
                if (0.25..=1.75).contains(&z) && (1.25..=2.75).contains(&r) {
                    rep.f_plateau_violation = rep.f_plateau_violation.max((f - 1.0).abs());
                }
            }
        }

        // smoothness proxy: no jump between neighbors more than 10x the
        // neighboring increments (with an absolute floor at grid scale)
        let hz = 4.0 / (nz - 1) as f64;
        for &r in rs.iter().step_by(8) {
            let vals: Vec<f64> = zs.iter().map(|&z| self.f(z, r)).collect();
            rep.jump_ratio = rep.jump_ratio.max(max_jump_ratio(&vals, hz));
            let vals: Vec<f64> = zs.iter().map(|&z| self.g(z, r)).collect();
            rep.jump_ratio = rep.jump_ratio.max(max_jump_ratio(&vals, hz));
        }

        if rep.sym_violation > 1e-12
            || rep.collar_violation > 1e-12
            || rep.g_min < -1e-12
            || rep.g_on_zero_set > 1e-12
            || rep.f_sign_violation > 1e-12
            || rep.f_plateau_violation > 1e-12
        {
            return Err(PlugError::Profile(format!("wilson3 grid check failed: {rep:?}")));
        }
        if rep.g_min_off_b <= 0.0 {
            return Err(PlugError::Profile(format!(
                "g vanishes away from B: min off-B = {}",
                rep.g_min_off_b
            )));
        }
        if rep.jump_ratio > 10.0 {
            return Err(PlugError::Profile(format!(
                "smoothness proxy failed: jump ratio {}",
                rep.jump_ratio
            )));
        }
        Ok(rep)
    }
}

/// Largest increment relative to its neighbors (jump detector). A genuine
/// discontinuity shows up as an increment wildly larger than the smaller of
/// its two neighbors (spikes inflate both sides, so the max would hide
/// them); smooth transitions keep the ratio near 1.
pub(crate) fn max_jump_ratio(vals: &[f64], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..vals.len() {
        let d = (vals[i] - vals[i - 1]).abs();
        if d == 0.0 {
            continue;
        }
        let prev = (i >= 2).then(|| (vals[i - 1] - vals[i - 2]).abs());
        let next = (i + 1 < vals.len()).then(|| (vals[i + 1] - vals[i]).abs());
        let neighbor = match (prev, next) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        };
        let scale = neighbor.max(h);
        worst = worst.max(d / scale);
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct Wilson3GridReport {
    pub sym_violation: f64,
    pub collar_violation: f64,
    pub g_min: f64,
    pub g_min_off_b: f64,
    pub g_on_zero_set: f64,
    pub f_sign_violation: f64,
    pub f_plateau_violation: f64,
    pub jump_ratio: f64,
}

impl Default for Wilson3GridReport {
    fn default() -> Self {
        Wilson3GridReport {
            sym_violation: 0.0,
            collar_violation: 0.0,
            g_min: f64::INFINITY,
            g_min_off_b: f64::INFINITY,
            g_on_zero_set: 0.0,
            f_sign_violation: 0.0,
            f_plateau_violation: 0.0,
            jump_ratio: 0.0,
        }
    }
}

/// Build the default profile and validate it on the standard grid.
pub fn make_wilson3_profile() -> Wilson3Profile {
    Wilson3Profile::new(Wilson3Params::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_set_values_exact() {
        let w = make_wilson3_profile();
        assert_eq!(w.g(1.0, 2.0), 0.0);
        assert_eq!(w.g(-1.0, 2.0), 0.0);
        assert_eq!(w.f(1.0, 2.0), 1.0);
        assert_eq!(w.f(-1.0, 2.0), -1.0);
    }

    #[test]
    fn collar_values_exact() {
        let w = make_wilson3_profile();
        for (z, r) in [(-2.0, 1.5), (2.0, 2.0), (0.5, 1.05), (-1.0, 2.95)] {
            assert_eq!(w.f(z, r), 0.0, "f at ({z},{r})");
            assert_eq!(w.g(z, r), 1.0, "g at ({z},{r})");
        }
    }

    #[test]
    fn standard_grid_check_passes() {
        let w = make_wilson3_profile();
        let rep = w.validate_grid(401, 201).expect("grid check");
        assert!(rep.g_min_off_b > 0.0);
    }

    #[test]
    fn g_has_quadratic_contact_at_b() {
        let w = make_wilson3_profile();
        // g(1+e, 2)/e^2 stays bounded and bounded away from 0
        for e in [1e-2, 1e-3, 1e-4] {
            let ratio = w.g(1.0 + e, 2.0) / (e * e);
            assert!(ratio > 0.05 && ratio < 5.0, "ratio {ratio} at e={e}");
        }
    }

    #[test]
    fn jump_detector_catches_discontinuity() {
        let mut vals: Vec<f64> = (0..200).map(|i| (i as f64 * 0.01).sin()).collect();
        assert!(max_jump_ratio(&vals, 0.01) < 10.0);
        vals[100] += 1.0;
        assert!(max_jump_ratio(&vals, 0.01) > 10.0);
    }
}
