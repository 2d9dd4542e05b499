//! The scalar pair (f, g) for the n-dimensional Wilson plug
//! W^{n,l} = [−2,2] × T² × [−2,2] × D^{n−4} × D^l, together with the
//! irrational slope b of the torus direction.
//!
//! Constraints: g symmetric / f antisymmetric in z; g = 1, f = 0 near ∂W;
//! g ≥ 0 vanishing exactly on {|z| = 1, |r| ≤ 1, |x| ≤ 1/2, |y| ≤ 1/2};
//! f = 1 on {z ∈ [−3/2, −1/2], |r| ≤ 1, |x| ≤ 1/2, |y| ≤ 1/2}.

use super::shape::{bump, plateau_sq, step};
use crate::{PlugError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WilsonNdParams {
    /// Irrational torus slope. √2 by default: bounded continued-fraction
    /// coefficients give good equidistribution at short times.
    pub b: f64,
    pub collar: f64,
    /// Pin half-width for the z-bumps at ±1.
    pub pin_width: f64,
}

impl Default for WilsonNdParams {
    fn default() -> Self {
        WilsonNdParams {
            b: std::f64::consts::SQRT_2,
            collar: 0.15,
            pin_width: 0.45,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WilsonNdProfile {
    pub n: usize,
    pub l: usize,
    pub params: WilsonNdParams,
}

impl WilsonNdProfile {
    pub fn new(n: usize, l: usize, params: WilsonNdParams) -> Result<Self> {
        if n < 4 {
            return Err(PlugError::Range(format!(
                "Wilson's construction needs n >= 4 (got n={n})"
            )));
        }
        Ok(WilsonNdProfile { n, l, params })
    }

    #[inline]
    fn sq_norm(v: &[f64]) -> f64 {
        v.iter().map(|a| a * a).sum()
    }

    /// Plateau over the transverse data: 1 exactly on
    /// {|r| ≤ 1, |x| ≤ 1/2, |y| ≤ 1/2}, 0 near the lateral boundary.
    #[inline]
    fn transverse(&self, r: f64, x: &[f64], y: &[f64]) -> f64 {
        let pr = plateau_sq(r * r, 1.0, 2.25); // 1 on |r|<=1, 0 at |r|>=1.5
        let px = plateau_sq(Self::sq_norm(x), 0.25, 0.64); // 1 on |x|<=1/2, 0 at |x|>=0.8
        let py = plateau_sq(Self::sq_norm(y), 0.25, 0.64);
        pr * px * py
    }

    /// One-sided z-envelope for f: 1 exactly on [1/2, 3/2], 0 outside (0.15, 1.85).
    #[inline]
    fn t_env(&self, z: f64) -> f64 {
        if z <= 0.15 {
            return 0.0;
        }
        step((z - 0.15) / 0.35) * (1.0 - step((z - 1.5) / 0.35))
    }

    #[inline]
    pub fn f(&self, z: f64, r: f64, x: &[f64], y: &[f64]) -> f64 {
        let m = self.t_env(-z) - self.t_env(z);
        if m == 0.0 {
            return 0.0;
        }
        m * self.transverse(r, x, y)
    }

    #[inline]
    pub fn g(&self, z: f64, r: f64, x: &[f64], y: &[f64]) -> f64 {
        let w = self.params.pin_width;
        let plat = plateau_sq(z * z, 1.7 * 1.7, 1.82 * 1.82);
        let pins = bump((z - 1.0) / w) + bump((z + 1.0) / w);
        // peak value 1 attained exactly at z = ±1 over the transverse plateau
        let chi = 0.9 * plat + 0.1 * pins;
        1.0 - chi * self.transverse(r, x, y)
    }

    /// Grid validation of constraints (1)-(4) on a coarse lattice of the box.
    pub fn validate_grid(&self) -> Result<()> {
        let nx = self.n - 4;
        let zs: Vec<f64> = (0..81).map(|i| -2.0 + 4.0 * i as f64 / 80.0).collect();
        let rs: Vec<f64> = (0..41).map(|i| -2.0 + 4.0 * i as f64 / 40.0).collect();
        let xmags = [0.0, 0.4, 0.6, 0.9];
        let c = self.params.collar;
        for &z in &zs {
            for &r in &rs {
                for &xm in &xmags {
                    for &ym in &xmags {
                        let x = if nx == 0 { vec![] } else { unit_scaled(nx, xm) };
                        let y = if self.l == 0 { vec![] } else { unit_scaled(self.l, ym) };
                        if nx == 0 && xm > 0.0 {
                            continue;
                        }
                        if self.l == 0 && ym > 0.0 {
                            continue;
                        }
                        let f = self.f(z, r, &x, &y);
                        let g = self.g(z, r, &x, &y);
                        let fm = self.f(-z, r, &x, &y);
                        let gm = self.g(-z, r, &x, &y);
                        if (f + fm).abs() > 1e-12 || (g - gm).abs() > 1e-12 {
                            return Err(PlugError::Profile("nd symmetry violated".into()));
                        }
                        if g < -1e-12 {
                            return Err(PlugError::Profile("nd g negative".into()));
                        }
                        let in_collar = z.abs() >= 2.0 - c
                            || r.abs() >= 2.0 - c
                            || xm >= 1.0 - c
                            || ym >= 1.0 - c;
                        if in_collar && (f.abs() > 1e-12 || (g - 1.0).abs() > 1e-12) {
                            return Err(PlugError::Profile(format!(
                                "nd collar violated at z={z} r={r} |x|={xm} |y|={ym}"
                            )));
                        }
                        let in_zero_set =
                            (z.abs() - 1.0).abs() < 1e-9 && r.abs() <= 1.0 && xm <= 0.5 && ym <= 0.5;
                        if in_zero_set && g.abs() > 1e-12 {
                            return Err(PlugError::Profile("nd g nonzero on its zero set".into()));
                        }
                        if !in_zero_set {
                            let near = (z.abs() - 1.0).abs() < 0.05
                                && r.abs() <= 1.05
                                && xm <= 0.55
                                && ym <= 0.55;
                            if !near && g <= 0.0 {
                                return Err(PlugError::Profile("nd g vanishes off its zero set".into()));
                            }
                        }
                        let in_f_set =
                            (-1.5..=-0.5).contains(&z) && r.abs() <= 1.0 && xm <= 0.5 && ym <= 0.5;
                        if in_f_set && (f - 1.0).abs() > 1e-12 {
                            return Err(PlugError::Profile(format!(
                                "nd f != 1 on its plateau at z={z} r={r}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn unit_scaled(dim: usize, mag: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = mag;
    v
}

/// Build a validated n-dimensional profile.
pub fn make_wilson_nd_profile(n: usize, l: usize, b: f64) -> Result<WilsonNdProfile> {
    let profile = WilsonNdProfile::new(
        n,
        l,
        WilsonNdParams {
            b,
            ..Default::default()
        },
    )?;
    profile.validate_grid()?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimension() {
        assert!(make_wilson_nd_profile(3, 0, std::f64::consts::SQRT_2).is_err());
    }

    #[test]
    fn constraint_values() {
        let p = make_wilson_nd_profile(5, 1, std::f64::consts::SQRT_2).unwrap();
        // constraint (3): g = 0 on the zero set
        assert_eq!(p.g(1.0, 0.0, &[0.0], &[0.0]), 0.0);
        assert_eq!(p.g(-1.0, 0.5, &[0.3], &[-0.2]), 0.0);
        // constraint (4): f = 1 on the negative-z slab
        assert_eq!(p.f(-1.0, 0.0, &[0.0], &[0.0]), 1.0);
        assert_eq!(p.f(-0.5, -1.0, &[0.5], &[0.0]), 1.0);
        // constraint (2): boundary collar
        assert_eq!(p.f(-2.0, 0.0, &[0.0], &[0.0]), 0.0);
        assert_eq!(p.g(-2.0, 0.0, &[0.0], &[0.0]), 1.0);
        assert_eq!(p.g(0.0, 1.95, &[0.0], &[0.0]), 1.0);
        // antisymmetry pairs
        assert_eq!(p.f(1.0, 0.0, &[0.0], &[0.0]), -1.0);
    }

    #[test]
    fn n4_l1_grid_validates() {
        make_wilson_nd_profile(4, 1, std::f64::consts::SQRT_2).unwrap();
    }
}
