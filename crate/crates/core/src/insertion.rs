//! Kuperberg insertion data: the rectangles L_i, the entry-face embeddings
//! e_i, the flowbox maps σ_i (flow of the Wilson field for time z + 2 from
//! the entry face), the z-preserving shrink family σ_i^t, and radius
//! certification.
//!
//! The image radius of the entry face is
//!
//!   R(θ, r) = r − D(θ, r),   D = q·(r − 2)² + p·(1 − λ(θ)),
//!
//! with λ a bump equal to 1 exactly at θ_i: the deficit D is zero exactly at
//! (θ_i, 2) and positive elsewhere, which is the radius inequality in
//! executable form. The face is placed at
//!
//!   z_e = z_anchor − z_dip + κ_z·D,   Θ_e = ϑ_i + κ_θ·(θ − θ_i),
//!
//! so its height above the slow plate grows with the deficit. Orbits
//! spiraling up toward γ_i cross the face sheet from below and therefore
//! first hit it near the minimal-deficit locus; the radius gained per
//! insertion entry then shrinks as the orbit radius approaches 2, which is
//! what makes the near-γ band trap instead of stair-stepping away. The small
//! z_dip keeps the circles γ_i crossing the face transversally (a γ orbit
//! meets the sheet at deficit z_dip/κ_z > 0), so the broken circles produce
//! detectable entry events. (z, Θ, R) determine (θ, r) in closed form, so
//! the face is embedded and σ_i inverts exactly.
//!
//! The shrink family moves interior points to strictly smaller radius,
//! r ↦ r − t·c·μ(θ, r), so the deformed insertions satisfy the strict
//! inequality for t > 0.

use crate::geom::{angle_signed, normalize_angle, PointW3};
use crate::integrate::{integrate, IntegratorConfig};
use crate::profiles::shape::bump;
use crate::wilson::{Wilson3Flow, Wilson3Plug};
use crate::{PlugError, Result, Terminal};
use serde::{Deserialize, Serialize};

/// Radius of the closed orbits γ_i.
pub const GAMMA_R: f64 = 2.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InsertionSpec {
    /// 1 or 2; insertion i breaks the orbit γ_i at z = (−1)^i.
    pub index: usize,
    /// Center θ_i of the rectangle L_i (the equality angle).
    pub theta_center: f64,
    /// Angular half-width of L_i.
    pub theta_halfwidth: f64,
    /// Radial extent of L_i.
    pub r_lo: f64,
    pub r_hi: f64,
    /// Angle ϑ_i of the half-plane carrying the entry face.
    pub face_angle: f64,
    /// z of the face at θ = θ_i: (−1)^i, on the orbit γ_i.
    pub z_anchor: f64,
    /// d z_e / dθ of the face (sets the z-window half-width).
    pub z_slope: f64,
    /// Quadratic radial deficit coefficient.
    pub q: f64,
    /// Angular deficit coefficient.
    pub p: f64,
    /// Shrink rate c of the deformation family.
    pub shrink_rate: f64,
    /// Height of the face sheet per unit deficit.
    pub kappa_z: f64,
    /// Angular spread of the face per unit box angle.
    pub kappa_theta: f64,
    /// Depth of the face sheet below the plate at the equality point.
    pub z_dip: f64,
}

impl InsertionSpec {
    pub fn standard(index: usize) -> Self {
        // The two sectors sit close together so that both 4-radian tongue
        // arcs fit in the complementary band of the circle.
        let (theta_center, face_angle, z_anchor) = match index {
            1 => (std::f64::consts::FRAC_PI_2, 1.05, -1.0),
            2 => (std::f64::consts::FRAC_PI_2 + 0.75, 2.85, 1.0),
            _ => panic!("insertion index must be 1 or 2"),
        };
        InsertionSpec {
            index,
            theta_center,
            theta_halfwidth: 0.25,
            r_lo: 1.4,
            r_hi: 2.6,
            face_angle,
            z_anchor,
            z_slope: 0.2,
            q: 0.15,
            p: 0.03,
            shrink_rate: 0.12,
            kappa_z: 1.2,
            kappa_theta: 0.5,
            z_dip: 0.0,
        }
    }

    /// Direction of the Wilson flow through the face: −1 for insertion 1
    /// (f < 0 near z = −1), +1 for insertion 2.
    pub fn flow_sign(&self) -> f64 {
        if self.z_anchor < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// λ(θ): 1 exactly at θ_i, 0 at the sector edges.
    #[inline]
    pub fn lambda(&self, theta: f64) -> f64 {
        bump(angle_signed(theta, self.theta_center) / self.theta_halfwidth)
    }

    /// μ(θ, r): positive inside L_i, vanishing on ∂L_i.
    #[inline]
    pub fn mu(&self, theta: f64, r: f64) -> f64 {
        let half_r = 0.5 * (self.r_hi - self.r_lo);
        let mid_r = 0.5 * (self.r_hi + self.r_lo);
        self.lambda(theta) * bump((r - mid_r) / half_r)
    }

    #[inline]
    pub fn contains(&self, theta: f64, r: f64) -> bool {
        angle_signed(theta, self.theta_center).abs() <= self.theta_halfwidth
            && (self.r_lo..=self.r_hi).contains(&r)
    }

    /// The shrink family: identity at t = 0 and on ∂L_i, radius-decreasing
    /// inside for t > 0.
    pub fn shrink(&self, t: f64, theta: f64, r: f64) -> (f64, f64) {
        (theta, r - t * self.shrink_rate * self.mu(theta, r))
    }

    /// Invert r ↦ shrink(t, θ, r) for fixed θ (strictly monotone in r).
    pub fn shrink_inverse(&self, t: f64, theta: f64, r_shr: f64) -> Option<f64> {
        if t == 0.0 {
            return ((self.r_lo..=self.r_hi).contains(&r_shr)).then_some(r_shr);
        }
        let h = |r: f64| r - t * self.shrink_rate * self.mu(theta, r) - r_shr;
        let (mut lo, mut hi) = (self.r_lo, self.r_hi);
        let (flo, fhi) = (h(lo), h(hi));
        if flo > 1e-12 || fhi < -1e-12 {
            return None;
        }
        if flo > 0.0 {
            return Some(self.r_lo);
        }
        if fhi < 0.0 {
            return Some(self.r_hi);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// The base radius deficit D(θ, r) ≥ 0, zero exactly at (θ_i, 2).
    #[inline]
    pub fn deficit_base(&self, theta: f64, r: f64) -> f64 {
        let d = r - GAMMA_R;
        self.q * d * d + self.p * (1.0 - self.lambda(theta))
    }

    /// Image radius of the base entry face.
    #[inline]
    pub fn image_radius(&self, theta: f64, r: f64) -> f64 {
        r - self.deficit_base(theta, r)
    }

    /// z-coordinate of the face sheet over the box point (θ, r).
    #[inline]
    pub fn face_z(&self, theta: f64, r: f64) -> f64 {
        self.z_anchor - self.z_dip + self.kappa_z * self.deficit_base(theta, r)
    }

    /// Angular coordinate of the face over the box angle θ.
    #[inline]
    pub fn face_theta(&self, theta: f64) -> f64 {
        normalize_angle(self.face_angle + self.kappa_theta * angle_signed(theta, self.theta_center))
    }

    /// The signed face offset of an ambient point: positive below the face
    /// sheet, zero on it. Orbits climbing toward the plate cross it downward.
    #[inline]
    pub fn face_offset(&self, z: f64, theta: f64, r: f64) -> f64 {
        let th_box = self.theta_center + angle_signed(theta, self.face_angle) / self.kappa_theta;
        let offset = (z - self.z_anchor + self.z_dip) / self.kappa_z;
        let r_box = r + offset;
        self.deficit_base(th_box, r_box) - offset
    }

    /// The entry-face embedding e_i at deformation parameter t:
    /// (θ, r) ∈ L_i ↦ point of 𝓛_i^−.
    pub fn entry_point(&self, t: f64, theta: f64, r: f64) -> Result<PointW3> {
        if !self.contains(normalize_angle(theta), r) {
            return Err(PlugError::Domain(format!(
                "({theta}, {r}) outside L_{}",
                self.index
            )));
        }
        let (th_s, r_s) = self.shrink(t, theta, r);
        PointW3::new(
            self.face_z(th_s, r_s),
            self.face_theta(th_s),
            self.image_radius(th_s, r_s),
        )
    }

    /// Invert the face: from a hit point (z_c, θ_c, r_c) recover the box
    /// coordinates (θ, r) at deformation t. None if the point is off the
    /// face patch. (z, Θ, R) determine the box point in closed form.
    pub fn invert_face(&self, t: f64, z_c: f64, theta_c: f64, r_c: f64) -> Option<(f64, f64)> {
        let dth = angle_signed(theta_c, self.face_angle) / self.kappa_theta;
        if dth.abs() > self.theta_halfwidth * (1.0 + 1e-7) {
            return None;
        }
        let dth = dth.clamp(-self.theta_halfwidth, self.theta_halfwidth);
        let theta = normalize_angle(self.theta_center + dth);
        let offset = (z_c - self.z_anchor + self.z_dip) / self.kappa_z;
        if offset < -1e-7 {
            return None;
        }
        let r_s = r_c + offset;
        if !(self.r_lo - 1e-7..=self.r_hi + 1e-7).contains(&r_s) {
            return None;
        }
        // the point must actually lie on the sheet
        if (self.deficit_base(theta, r_s) - offset).abs() > 1e-6 {
            return None;
        }
        let r_s = r_s.clamp(self.r_lo, self.r_hi);
        let r = self.shrink_inverse(t, theta, r_s)?;
        Some((theta, r))
    }

    /// The radius deficit r − radius(σ_i^t(·, θ, r)) ≥ 0.
    pub fn deficit(&self, t: f64, theta: f64, r: f64) -> f64 {
        let (th_s, r_s) = self.shrink(t, theta, r);
        r - self.image_radius(th_s, r_s)
    }

    /// Reconstruct a face crossing from a state on the band's center plane
    /// that sits above the face sheet (the sheet was crossed earlier in the
    /// same band passage). Returns the face point of the first crossing on
    /// the incoming branch of the sweep. Grazing crossings are tangencies of
    /// the sheet-offset function, so sign sampling alone can miss them; this
    /// closed-form recovery is what keeps the teleport semantics total.
    pub fn recover_crossing(&self, z: f64, r: f64) -> Option<PointW3> {
        // hair-trigger below exact tangency: orbits hugging γ meet the sheet
        // tangentially at the equality point and must still be caught
        const GRAZE_TOL: f64 = 1e-9;
        let mut offset = (z - self.z_anchor + self.z_dip) / self.kappa_z;
        // the recovery zone is the sheet's own height range
        let d_edge = self.q * (self.r_hi - GAMMA_R).powi(2) + self.p;
        if !(-1e-7..=d_edge + 0.02).contains(&offset) {
            return None;
        }
        let r_tilde = r + offset;
        if !(self.r_lo..=self.r_hi).contains(&r_tilde) {
            return None;
        }
        // below the dip bottom: no crossing this passage
        if offset <= self.q * (r_tilde - GAMMA_R).powi(2) - GRAZE_TOL {
            return None;
        }
        // first root of D(θ̃, r̃) = offset on the incoming side of the sweep
        let side = -self.flow_sign();
        let mut theta_box = self.theta_center;
        let mut r_box = r_tilde;
        for _ in 0..3 {
            let excess = offset - self.q * (r_box - GAMMA_R).powi(2);
            if excess >= self.p {
                return None;
            }
            let u = if excess <= 0.0 {
                0.0
            } else {
                let v = 1.0 - excess / self.p;
                // bump(u) = exp(1 − 1/(1−u²)) = v  ⇒  u = √(1 − 1/(1 − ln v))
                (1.0 - 1.0 / (1.0 - v.ln())).max(0.0).sqrt()
            };
            theta_box = self.theta_center + side * u * self.theta_halfwidth;
            let d = self.deficit_base(theta_box, r_box);
            r_box = r + d;
            offset = d;
        }
        if !self.contains(normalize_angle(theta_box), r_box) {
            return None;
        }
        Some(PointW3::new_clamped(
            self.face_z(theta_box, r_box),
            self.face_theta(theta_box),
            self.image_radius(theta_box, r_box),
        ))
    }
}

/// σ_i^t(z, θ, r): flow of the Wilson field for time z + 2 starting at the
/// (deformed) entry face. The radius of the output equals the face radius
/// because the Wilson field has no radial component.
pub fn sigma(
    plug: &Wilson3Plug,
    ins: &InsertionSpec,
    t_deform: f64,
    z: f64,
    theta: f64,
    r: f64,
) -> Result<PointW3> {
    if !(-2.0..=2.0).contains(&z) {
        return Err(PlugError::Domain(format!("z={z} outside [-2,2]")));
    }
    let start = ins.entry_point(t_deform, theta, r)?;
    let tau = z + 2.0;
    if tau == 0.0 {
        return Ok(start);
    }
    let flow = Wilson3Flow::base(plug);
    let cfg = IntegratorConfig {
        t_max: tau,
        sample_stride: 0,
        ..Default::default()
    };
    let out = integrate(&flow, &start.to_state(), &cfg);
    if out.terminal != Terminal::TimeHorizon {
        return Err(PlugError::Geometry(format!(
            "insertion {} tube leaves W before transit completes (z={z}, theta={theta}, r={r})",
            ins.index
        )));
    }
    Ok(PointW3::from_state(&out.end_state))
}

/// Certificate that the (possibly deformed) insertion satisfies the radius
/// inequality on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusCertificate {
    pub insertion: usize,
    pub t: f64,
    pub density: usize,
    /// Minimum deficit away from the allowed equality locus (base) or over
    /// the whole grid (deformed).
    pub epsilon: f64,
    /// Largest |deficit| on the allowed equality locus (base only).
    pub equality_max: f64,
    pub pass: bool,
    /// A violating (θ, r, deficit) triple when pass = false.
    pub witness: Option<(f64, f64, f64)>,
}

/// Evaluate the deficit over a (density+1)² grid of L_i (edges and center
/// included). For the base insertion the deficit must vanish only at
/// (θ_i, 2); for t > 0 it must be positive everywhere.
pub fn certify_radius(ins: &InsertionSpec, t: f64, density: usize) -> Result<RadiusCertificate> {
    if density < 32 {
        return Err(PlugError::Range("certification grid density must be >= 32".into()));
    }
    use rayon::prelude::*;
    let n = density;
    let rows: Vec<(f64, f64, f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let th = ins.theta_center - ins.theta_halfwidth
                + 2.0 * ins.theta_halfwidth * i as f64 / n as f64;
            let mut min_off = f64::INFINITY;
            let mut eq_max = 0.0f64;
            let mut wit = (0.0, 0.0, f64::INFINITY);
            for j in 0..=n {
                let r = ins.r_lo + (ins.r_hi - ins.r_lo) * j as f64 / n as f64;
                let d = ins.deficit(t, th, r);
                let cell_th = 2.0 * ins.theta_halfwidth / n as f64;
                let cell_r = (ins.r_hi - ins.r_lo) / n as f64;
                // only the grid point nearest (θ_i, 2) is the equality locus
                let near_locus = t == 0.0
                    && angle_signed(th, ins.theta_center).abs() <= 0.5 * cell_th
                    && (r - GAMMA_R).abs() <= 0.5 * cell_r;
                if near_locus {
                    eq_max = eq_max.max(d.abs());
                } else {
                    if d < min_off {
                        min_off = d;
                        wit = (th, r, d);
                    }
                }
            }
            (min_off, eq_max, wit.0, wit.1)
        })
        .collect();

    let mut epsilon = f64::INFINITY;
    let mut equality_max = 0.0f64;
    let mut witness = None;
    for (min_off, eq_max, wth, wr) in rows {
        if min_off < epsilon {
            epsilon = min_off;
            witness = Some((wth, wr, min_off));
        }
        equality_max = equality_max.max(eq_max);
    }
    let pass = if t == 0.0 {
        epsilon > 0.0 && equality_max <= 1e-10
    } else {
        epsilon > 0.0
    };
    Ok(RadiusCertificate {
        insertion: ins.index,
        t,
        density,
        epsilon,
        equality_max,
        pass,
        witness: if pass { None } else { witness },
    })
}

/// Geometry facts about a validated tongue (the image flowbox 𝒟_i).
#[derive(Clone, Debug, Serialize)]
pub struct TongueInfo {
    pub index: usize,
    /// z-range swept by the tube over the full transit.
    pub z_min: f64,
    pub z_max: f64,
    /// Radial range of the face image.
    pub r_min: f64,
    pub r_max: f64,
    /// Angular arc [start, start + 4·sign] swept by the tube.
    pub arc_start: f64,
    pub arc_sign: f64,
    /// Max |θ(4) − (ϑ ± 4)| over the validation grid: angular speed is
    /// exactly ±1 along a valid tongue.
    pub arc_error: f64,
}

impl TongueInfo {
    /// Closed angular hull of the tongue with a safety margin. The face
    /// itself spreads ±κ_θ·halfwidth around its central angle, and the tube
    /// adds 4 radians of unit-speed arc in the flow direction.
    pub fn arc_contains(&self, theta: f64, margin: f64) -> bool {
        let spread = 0.13;
        let rel = normalize_angle((theta - self.arc_start) * self.arc_sign);
        rel <= 4.0 + spread + margin || rel >= crate::geom::TAU - spread - margin
    }
}

/// Validate that the insertion's flow tube is a genuine flowbox: it stays
/// inside W for the full transit, sweeps exactly 4 radians (|f| = 1 along
/// it), and its radial and vertical extents sit where the rest of the
/// geometry expects them. Rejecting here is what keeps σ_i total.
pub fn validate_tube(plug: &Wilson3Plug, ins: &InsertionSpec, grid: usize) -> Result<TongueInfo> {
    let mut info = TongueInfo {
        index: ins.index,
        z_min: f64::INFINITY,
        z_max: f64::NEG_INFINITY,
        r_min: f64::INFINITY,
        r_max: f64::NEG_INFINITY,
        arc_start: ins.face_angle,
        arc_sign: ins.flow_sign(),
        arc_error: 0.0,
    };
    for t_deform in [0.0, 1.0, 2.0] {
        for i in 0..=grid {
            let th = ins.theta_center - ins.theta_halfwidth
                + 2.0 * ins.theta_halfwidth * i as f64 / grid as f64;
            for j in 0..=grid {
                let r = ins.r_lo + (ins.r_hi - ins.r_lo) * j as f64 / grid as f64;
                let start = ins.entry_point(t_deform, th, r)?;
                info.z_min = info.z_min.min(start.z);
                info.r_min = info.r_min.min(start.r);
                info.r_max = info.r_max.max(start.r);
                // transversality: the plug field must cross the face
                let f = plug.profile.f(start.z, start.r);
                if f.abs() < 0.9 {
                    return Err(PlugError::Geometry(format!(
                        "entry face of insertion {} not transverse at ({th:.3},{r:.3}): |f|={}",
                        ins.index,
                        f.abs()
                    )));
                }
                let end = sigma(plug, ins, t_deform, 2.0, th, r)?;
                // g ≥ 0 makes z monotone along the tube: the endpoint is the max
                info.z_max = info.z_max.max(end.z);
                let want_theta = start.theta + 4.0 * ins.flow_sign();
                let err = angle_signed(end.theta, want_theta).abs();
                info.arc_error = info.arc_error.max(err);
            }
        }
    }
    if info.z_max > 1.75 {
        return Err(PlugError::Geometry(format!(
            "insertion {} tube reaches z={:.3}, too close to the top boundary",
            ins.index, info.z_max
        )));
    }
    if info.arc_error > 1e-6 {
        return Err(PlugError::Geometry(format!(
            "insertion {} tube is not a unit-speed arc (error {:.2e}); transit time != 4",
            ins.index, info.arc_error
        )));
    }
    if info.r_min < 1.3 || info.r_max > 2.7 {
        return Err(PlugError::Geometry(format!(
            "insertion {} face radii [{:.3},{:.3}] leave the slow band",
            ins.index, info.r_min, info.r_max
        )));
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::make_wilson3_profile;

    fn plug() -> Wilson3Plug {
        Wilson3Plug::new(make_wilson3_profile())
    }

    #[test]
    fn equality_point_maps_onto_gamma() {
        for idx in [1, 2] {
            let ins = InsertionSpec::standard(idx);
            let e = ins.entry_point(0.0, ins.theta_center, GAMMA_R).unwrap();
            assert_eq!(e.z, ins.z_anchor);
            assert_eq!(e.r, GAMMA_R);
            assert!((e.theta - ins.face_angle).abs() < 1e-15);
        }
    }

    #[test]
    fn face_inversion_roundtrip() {
        let ins = InsertionSpec::standard(1);
        for t in [0.0, 0.5, 1.7] {
            for (th, r) in [
                (ins.theta_center, 2.0),
                (ins.theta_center + 0.2, 1.55),
                (ins.theta_center - 0.13, 2.44),
            ] {
                let e = ins.entry_point(t, th, r).unwrap();
                let (th2, r2) = ins.invert_face(t, e.z, e.theta, e.r).expect("invertible");
                assert!(angle_signed(th2, th).abs() < 1e-10, "theta {th} vs {th2} at t={t}");
                assert!((r2 - r).abs() < 1e-9, "r {r} vs {r2} at t={t}");
            }
        }
    }

    #[test]
    fn invert_face_rejects_off_patch_points() {
        let ins = InsertionSpec::standard(1);
        // angle far outside the face band
        assert!(ins.invert_face(0.0, -1.0, ins.face_angle + 1.0, 2.0).is_none());
        // point well off the sheet (z too high for its deficit)
        assert!(ins.invert_face(0.0, -0.5, ins.face_angle, 2.0).is_none());
        // radius outside the image range
        assert!(ins.invert_face(0.0, -1.0, ins.face_angle, 2.9).is_none());
    }

    #[test]
    fn sigma_zero_time_is_entry_point() {
        let p = plug();
        let ins = InsertionSpec::standard(2);
        let th = ins.theta_center + 0.1;
        let s = sigma(&p, &ins, 0.0, -2.0, th, 2.2).unwrap();
        let e = ins.entry_point(0.0, th, 2.2).unwrap();
        assert_eq!(s, e);
    }

    #[test]
    fn sigma_radius_independent_of_z() {
        let p = plug();
        let ins = InsertionSpec::standard(1);
        let th = ins.theta_center - 0.07;
        let r0 = sigma(&p, &ins, 0.0, -2.0, th, 2.3).unwrap().r;
        for z in [-1.0, 0.0, 1.3, 2.0] {
            let s = sigma(&p, &ins, 0.0, z, th, 2.3).unwrap();
            assert!((s.r - r0).abs() <= 1e-10, "radius drift {} at z={z}", (s.r - r0).abs());
        }
    }

    #[test]
    fn sigma_equality_line_stays_on_gamma() {
        let p = plug();
        for idx in [1, 2] {
            let ins = InsertionSpec::standard(idx);
            for z in [-2.0, -0.5, 1.0, 2.0] {
                let s = sigma(&p, &ins, 0.0, z, ins.theta_center, GAMMA_R).unwrap();
                assert!((s.z - ins.z_anchor).abs() < 1e-9, "left gamma: z={}", s.z);
                assert!((s.r - GAMMA_R).abs() < 1e-12);
                // the arc advances at unit angular speed
                let want = ins.face_angle + (z + 2.0) * ins.flow_sign();
                assert!(angle_signed(s.theta, want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn shrink_strictifies_the_equality_point() {
        let ins = InsertionSpec::standard(1);
        assert_eq!(ins.deficit(0.0, ins.theta_center, GAMMA_R), 0.0);
        for t in [0.25, 1.0, 2.0] {
            let d = ins.deficit(t, ins.theta_center, GAMMA_R);
            assert!(d > 0.0, "deficit {d} at t={t}");
        }
        // identity on the boundary of L_i
        let (_, r) = ins.shrink(2.0, ins.theta_center + ins.theta_halfwidth, 2.0);
        assert_eq!(r, 2.0);
        let (_, r) = ins.shrink(2.0, ins.theta_center, ins.r_hi);
        assert_eq!(r, ins.r_hi);
    }

    #[test]
    fn certificates_base_and_deformed() {
        let ins = InsertionSpec::standard(1);
        let base = certify_radius(&ins, 0.0, 64).unwrap();
        assert!(base.pass, "base certificate failed: {base:?}");
        assert!(base.equality_max <= 1e-10);
        assert!(base.epsilon > 0.0);
        let mut prev = 0.0;
        for t in [0.25, 1.0, 2.0] {
            let c = certify_radius(&ins, t, 64).unwrap();
            assert!(c.pass && c.epsilon > 0.0, "deformed t={t}: {c:?}");
            assert!(c.epsilon >= prev, "epsilon not monotone at t={t}");
            prev = c.epsilon;
        }
        assert!(certify_radius(&ins, 0.0, 16).is_err());
    }

    #[test]
    fn sabotaged_insertion_fails_certification() {
        // radially expanded entry face: negative quadratic deficit
        let mut ins = InsertionSpec::standard(1);
        ins.q = -0.1;
        ins.p = 0.0;
        let c = certify_radius(&ins, 0.0, 64).unwrap();
        assert!(!c.pass);
        assert!(c.witness.is_some());
    }

    #[test]
    fn tubes_validate_for_both_insertions() {
        let p = plug();
        for idx in [1, 2] {
            let ins = InsertionSpec::standard(idx);
            let info = validate_tube(&p, &ins, 6).unwrap();
            assert!(info.z_max < 1.75);
            assert!(info.arc_error < 1e-6);
            // insertion 1 hugs γ1 below z = 0, insertion 2 above
            if idx == 1 {
                assert!(info.z_max < 0.0);
            } else {
                assert!(info.z_min > 0.0);
            }
        }
    }

    /// Dual-integrator oracle: σ at a sample point cross-checked against an
    /// independent fixed-step RK4 at 10x resolution.
    #[test]
    fn sigma_against_rk4_oracle() {
        let p = plug();
        let ins = InsertionSpec::standard(2);
        let th = ins.theta_center + 0.11;
        let r = 2.35;
        let got = sigma(&p, &ins, 0.0, 0.0, th, r).unwrap();

        // plain RK4 on (z, θ) at fixed radius
        let start = ins.entry_point(0.0, th, r).unwrap();
        let mut y = [start.z, start.theta];
        let rr = start.r;
        let fdot = |y: &[f64; 2]| {
            [p.profile.g(y[0], rr), p.profile.f(y[0], rr)]
        };
        let tau = 2.0;
        let steps = 200_000;
        let h = tau / steps as f64;
        for _ in 0..steps {
            let k1 = fdot(&y);
            let k2 = fdot(&[y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = fdot(&[y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = fdot(&[y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        assert!((got.z - y[0]).abs() < 1e-8, "z: {} vs oracle {}", got.z, y[0]);
        assert!(
            angle_signed(got.theta, y[1]).abs() < 1e-8,
            "theta: {} vs oracle {}",
            got.theta,
            y[1]
        );
        assert_eq!(got.r, rr);
    }

    /// Flowbox property: d/dz σ equals the Wilson field at the image.
    #[test]
    fn sigma_conjugates_vertical_to_wilson() {
        let p = plug();
        let ins = InsertionSpec::standard(1);
        let th = ins.theta_center + 0.05;
        let r = 2.15;
        let h = 1e-5;
        for z in [-1.0, 0.4, 1.2] {
            let a = sigma(&p, &ins, 0.0, z - h, th, r).unwrap();
            let b = sigma(&p, &ins, 0.0, z + h, th, r).unwrap();
            let mid = sigma(&p, &ins, 0.0, z, th, r).unwrap();
            let dz = (b.z - a.z) / (2.0 * h);
            let dth = angle_signed(b.theta, a.theta) / (2.0 * h);
            let want_g = p.profile.g(mid.z, mid.r);
            let want_f = p.profile.f(mid.z, mid.r);
            assert!((dz - want_g).abs() < 1e-6, "dz {dz} vs g {want_g}");
            assert!((dth - want_f).abs() < 1e-6, "dθ {dth} vs f {want_f}");
        }
    }

    /// σ_i^t is a continuous family in t.
    #[test]
    fn sigma_family_is_continuous_in_t() {
        let p = plug();
        let ins = InsertionSpec::standard(1);
        let th = ins.theta_center - 0.1;
        let r = 2.0;
        let mut prev: Option<PointW3> = None;
        let mut max_step_change = 0.0f64;
        for k in 0..=8 {
            let t = 2.0 * k as f64 / 8.0;
            let s = sigma(&p, &ins, t, 1.0, th, r).unwrap();
            if let Some(q) = prev {
                let d = crate::geom::point_distance(&s.view(), &q.view()).unwrap();
                max_step_change = max_step_change.max(d);
            }
            prev = Some(s);
        }
        // Lipschitz-ish bound over Δt = 0.25 steps
        assert!(max_step_change < 0.5, "family jumps by {max_step_change}");
    }
}
