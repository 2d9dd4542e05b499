//! The two Wilson plugs as evaluable vector fields, their deactivation
//! homotopies, and affine embeddings of plug fields into ambient flowboxes.

use crate::geom::{Coord, PointW3, PointWNd, Tangent};
use crate::integrate::{FaceAction, FaceDir, FlowSystem};
use crate::profiles::homotopy::homotopy_scalars_unchecked;
use crate::profiles::{HomotopyProfile, Wilson3Profile, WilsonNdProfile};
use crate::{EventKind, PlugError, Result};
use serde::{Deserialize, Serialize};

/// A circle {z = z0, r = r0} traced by the angular coordinate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrbitCircle {
    pub z: f64,
    pub r: f64,
}

/// The 3-D Wilson plug on W = [−2,2] × S¹ × [1,3]:
/// X = f(z,r) ∂_θ + g(z,r) ∂_z.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wilson3Plug {
    pub profile: Wilson3Profile,
    /// The two closed orbits {z = ∓1, r = 2}.
    pub gamma: [OrbitCircle; 2],
    /// Entry locus of the trapped set: {z = −2, r = 2}.
    pub trapped_entry_r: f64,
}

impl Wilson3Plug {
    pub fn new(profile: Wilson3Profile) -> Self {
        Wilson3Plug {
            profile,
            gamma: [OrbitCircle { z: -1.0, r: 2.0 }, OrbitCircle { z: 1.0, r: 2.0 }],
            trapped_entry_r: 2.0,
        }
    }

    pub fn field(&self, p: PointW3) -> Result<Tangent> {
        PointW3::new(p.z, p.theta, p.r)?;
        Ok(Tangent::new(vec![
            (Coord::Z, self.profile.g(p.z, p.r)),
            (Coord::Theta, self.profile.f(p.z, p.r)),
            (Coord::R, 0.0),
        ]))
    }

    /// The Lemma-style deactivation field X^t = f_t ∂_θ + g_t ∂_z.
    pub fn homotopy_field(&self, hp: &HomotopyProfile, t: f64, p: PointW3) -> Result<Tangent> {
        if !(0.0..=2.0).contains(&t) {
            return Err(PlugError::Range(format!("t={t} outside [0,2]")));
        }
        PointW3::new(p.z, p.theta, p.r)?;
        let (f, g) = homotopy_scalars_unchecked(hp, &self.profile, t, p.z, p.theta, p.r);
        Ok(Tangent::new(vec![
            (Coord::Z, g),
            (Coord::Theta, f),
            (Coord::R, 0.0),
        ]))
    }
}

/// Integrable view of the 3-D Wilson plug at a fixed homotopy parameter.
/// State layout: [z, θ, r]. The single face is the top z = 2; the bottom is
/// unreachable in forward time since g_t ≥ 0.
pub struct Wilson3Flow<'a> {
    pub plug: &'a Wilson3Plug,
    pub homotopy: Option<(&'a HomotopyProfile, f64)>,
}

impl<'a> Wilson3Flow<'a> {
    pub fn base(plug: &'a Wilson3Plug) -> Self {
        Wilson3Flow {
            plug,
            homotopy: None,
        }
    }

    pub fn at(plug: &'a Wilson3Plug, hp: &'a HomotopyProfile, t: f64) -> Self {
        Wilson3Flow {
            plug,
            homotopy: Some((hp, t)),
        }
    }

    pub fn angle_mask() -> [bool; 3] {
        [false, true, false]
    }
}

impl FlowSystem for Wilson3Flow<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn field(&self, y: &[f64], dy: &mut [f64]) {
        let (f, g) = match self.homotopy {
            None => (self.plug.profile.f(y[0], y[2]), self.plug.profile.g(y[0], y[2])),
            Some((hp, t)) => homotopy_scalars_unchecked(hp, &self.plug.profile, t, y[0], y[1], y[2]),
        };
        dy[0] = g;
        dy[1] = f;
        dy[2] = 0.0;
    }

    fn n_faces(&self) -> usize {
        1
    }

    fn face_value(&self, _k: usize, y: &[f64]) -> f64 {
        y[0] - 2.0
    }

    fn face_dir(&self, _k: usize) -> FaceDir {
        FaceDir::Rising
    }

    fn face_action(&self, _k: usize, _y: &[f64]) -> FaceAction {
        FaceAction::Terminal(EventKind::HitTop)
    }

    fn renormalize(&self, y: &mut [f64]) {
        y[1] = crate::geom::normalize_angle(y[1]);
    }
}

/// The n-dimensional Wilson plug. State layout: [z, s, t, r, x.., y..].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WilsonNdPlug {
    pub profile: WilsonNdProfile,
}

impl WilsonNdPlug {
    pub fn new(profile: WilsonNdProfile) -> Self {
        WilsonNdPlug { profile }
    }

    pub fn n(&self) -> usize {
        self.profile.n
    }

    pub fn l(&self) -> usize {
        self.profile.l
    }

    pub fn field(&self, p: &PointWNd) -> Result<Tangent> {
        let f = self.profile.f(p.z, p.r, &p.x, &p.y);
        let g = self.profile.g(p.z, p.r, &p.x, &p.y);
        let b = self.profile.params.b;
        let mut comps = vec![
            (Coord::Z, g),
            (Coord::S, f),
            (Coord::T, b * f),
            (Coord::R, 0.0),
        ];
        comps.extend((0..p.x.len()).map(|i| (Coord::X(i as u8), 0.0)));
        comps.extend((0..p.y.len()).map(|i| (Coord::Y(i as u8), 0.0)));
        Ok(Tangent::new(comps))
    }

    /// Two-stage deactivation: first g → 1 on t ∈ [0, 1/2], then f → 0 on
    /// t ∈ [1/2, 1]. Never vanishes.
    pub fn homotopy_field(&self, t: f64, p: &PointWNd) -> Result<Tangent> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PlugError::Range(format!("t={t} outside [0,1]")));
        }
        let f0 = self.profile.f(p.z, p.r, &p.x, &p.y);
        let g0 = self.profile.g(p.z, p.r, &p.x, &p.y);
        let (f, g) = if t <= 0.5 {
            let w = 2.0 * t;
            (f0, g0 + w * (1.0 - g0))
        } else {
            let w = 2.0 * (t - 0.5);
            (f0 * (1.0 - w), 1.0)
        };
        let b = self.profile.params.b;
        let mut comps = vec![
            (Coord::Z, g),
            (Coord::S, f),
            (Coord::T, b * f),
            (Coord::R, 0.0),
        ];
        comps.extend((0..p.x.len()).map(|i| (Coord::X(i as u8), 0.0)));
        comps.extend((0..p.y.len()).map(|i| (Coord::Y(i as u8), 0.0)));
        Ok(Tangent::new(comps))
    }
}

pub struct WilsonNdFlow<'a> {
    pub plug: &'a WilsonNdPlug,
    /// Deactivation stage in [0,1]; None is the plug field itself.
    pub homotopy_t: Option<f64>,
}

impl<'a> WilsonNdFlow<'a> {
    pub fn base(plug: &'a WilsonNdPlug) -> Self {
        WilsonNdFlow {
            plug,
            homotopy_t: None,
        }
    }

    pub fn dim_of(plug: &WilsonNdPlug) -> usize {
        4 + (plug.n() - 4) + plug.l()
    }

    pub fn angle_mask(plug: &WilsonNdPlug) -> Vec<bool> {
        let mut m = vec![false, true, true, false];
        m.extend(std::iter::repeat(false).take(plug.n() - 4 + plug.l()));
        m
    }
}

impl FlowSystem for WilsonNdFlow<'_> {
    fn dim(&self) -> usize {
        Self::dim_of(self.plug)
    }

    fn field(&self, y: &[f64], dy: &mut [f64]) {
        let nx = self.plug.n() - 4;
        let x = &y[4..4 + nx];
        let yy = &y[4 + nx..];
        let prof = &self.plug.profile;
        let f0 = prof.f(y[0], y[3], x, yy);
        let g0 = prof.g(y[0], y[3], x, yy);
        let (f, g) = match self.homotopy_t {
            None => (f0, g0),
            Some(t) if t <= 0.5 => (f0, g0 + 2.0 * t * (1.0 - g0)),
            Some(t) => (f0 * (1.0 - 2.0 * (t - 0.5)), 1.0),
        };
        dy[0] = g;
        dy[1] = f;
        dy[2] = prof.params.b * f;
        dy[3] = 0.0;
        for v in dy[4..].iter_mut() {
            *v = 0.0;
        }
    }

    fn n_faces(&self) -> usize {
        1
    }

    fn face_value(&self, _k: usize, y: &[f64]) -> f64 {
        y[0] - 2.0
    }

    fn face_dir(&self, _k: usize) -> FaceDir {
        FaceDir::Rising
    }

    fn face_action(&self, _k: usize, _y: &[f64]) -> FaceAction {
        FaceAction::Terminal(EventKind::HitTop)
    }

    fn renormalize(&self, y: &mut [f64]) {
        y[1] = crate::geom::normalize_angle(y[1]);
        y[2] = crate::geom::normalize_angle(y[2]);
    }
}

/// Axis-aligned affine placement of a plug's coordinate box inside an
/// ambient flowbox carrying ∂_z, identity on the parameter (y) directions.
/// Pulling the ambient vertical back through the placement scales it by a
/// positive constant, which is all the replacement mechanism needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlugEmbedding {
    /// Per-coordinate scale (positive) and offset: ambient = scale·plug + offset.
    pub scale: Vec<f64>,
    pub offset: Vec<f64>,
    /// Plug-coordinate box being placed (inclusive bounds).
    pub plug_lo: Vec<f64>,
    pub plug_hi: Vec<f64>,
}

impl PlugEmbedding {
    pub fn identity(plug_lo: Vec<f64>, plug_hi: Vec<f64>) -> Self {
        let n = plug_lo.len();
        PlugEmbedding {
            scale: vec![1.0; n],
            offset: vec![0.0; n],
            plug_lo,
            plug_hi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.iter().any(|s| *s <= 0.0) {
            return Err(PlugError::Geometry("embedding scales must be positive".into()));
        }
        if self.scale.len() != self.offset.len()
            || self.scale.len() != self.plug_lo.len()
            || self.scale.len() != self.plug_hi.len()
        {
            return Err(PlugError::Geometry("embedding dimension mismatch".into()));
        }
        Ok(())
    }

    fn to_plug(&self, ambient: &[f64]) -> Option<Vec<f64>> {
        let p: Vec<f64> = ambient
            .iter()
            .zip(self.scale.iter().zip(&self.offset))
            .map(|(a, (s, o))| (a - o) / s)
            .collect();
        let inside = p
            .iter()
            .zip(self.plug_lo.iter().zip(&self.plug_hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        inside.then_some(p)
    }
}

/// Replace ∂_z by the embedded plug field: ambient points inside the placed
/// image see the pushforward of the plug field, everything else sees the
/// vertical field. The seam is consistent because the plug field is vertical
/// near its own boundary.
pub fn embed_plug_field(
    emb: &PlugEmbedding,
    plug_field: &dyn Fn(&[f64]) -> Vec<f64>,
    ambient: &[f64],
) -> Result<Tangent> {
    emb.validate()?;
    if ambient.len() != emb.scale.len() {
        return Err(PlugError::Schema("ambient point has wrong dimension".into()));
    }
    let comps: Vec<(Coord, f64)> = match emb.to_plug(ambient) {
        Some(p) => {
            let v = plug_field(&p);
            (0..ambient.len())
                .map(|i| (ambient_coord(i), emb.scale[i] * v[i]))
                .collect()
        }
        None => (0..ambient.len())
            .map(|i| (ambient_coord(i), if i == 0 { 1.0 } else { 0.0 }))
            .collect(),
    };
    Ok(Tangent::new(comps))
}

fn ambient_coord(i: usize) -> Coord {
    if i == 0 {
        Coord::Z
    } else {
        Coord::X((i - 1) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_wilson3_profile, make_wilson_nd_profile};
    use std::f64::consts::SQRT_2;

    #[test]
    fn wilson3_field_values() {
        let plug = Wilson3Plug::new(make_wilson3_profile());
        // boundary collar: pure vertical
        let t = plug.field(PointW3::new(-2.0, 0.0, 1.5).unwrap()).unwrap();
        assert_eq!(t.component(Coord::Theta), 0.0);
        assert_eq!(t.component(Coord::Z), 1.0);
        assert_eq!(t.component(Coord::R), 0.0);
        // on γ2: pure rotation at unit speed
        let t = plug.field(PointW3::new(1.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(t.component(Coord::Theta), 1.0);
        assert_eq!(t.component(Coord::Z), 0.0);
        // antisymmetry on γ1
        let t = plug.field(PointW3::new(-1.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(t.component(Coord::Theta), -1.0);
        assert_eq!(t.component(Coord::Z), 0.0);
    }

    #[test]
    fn wilson3_field_rejects_out_of_domain() {
        let plug = Wilson3Plug::new(make_wilson3_profile());
        assert!(plug
            .field(PointW3 {
                z: 2.5,
                theta: 0.0,
                r: 2.0
            })
            .is_err());
    }

    #[test]
    fn wilson3_homotopy_endpoints() {
        let plug = Wilson3Plug::new(make_wilson3_profile());
        let hp = HomotopyProfile::default();
        let p = PointW3::new(0.7, 1.0, 2.3).unwrap();
        let t0 = plug.homotopy_field(&hp, 0.0, p).unwrap();
        let base = plug.field(p).unwrap();
        assert_eq!(t0, base);
        let t2 = plug.homotopy_field(&hp, 2.0, p).unwrap();
        assert_eq!(t2.component(Coord::Theta), 0.0);
        assert_eq!(t2.component(Coord::Z), 1.0);
        // t = 1 inside the script arcs: the Wilson field untouched
        let th = hp.j_arcs[0].center;
        let q = PointW3::new(0.7, th, 2.3).unwrap();
        let t1 = plug.homotopy_field(&hp, 1.0, q).unwrap();
        let b1 = plug.field(q).unwrap();
        assert_eq!(t1, b1);
        assert!(plug.homotopy_field(&hp, 2.4, p).is_err());
    }

    #[test]
    fn homotopy_field_nonvanishing_over_grid() {
        let plug = Wilson3Plug::new(make_wilson3_profile());
        let hp = HomotopyProfile::default();
        let mut min_norm = f64::INFINITY;
        for it in 0..9 {
            let t = 2.0 * it as f64 / 8.0;
            for iz in 0..41 {
                let z = -2.0 + 4.0 * iz as f64 / 40.0;
                for ith in 0..40 {
                    let th = crate::geom::TAU * ith as f64 / 40.0;
                    for ir in 0..21 {
                        let r = 1.0 + 2.0 * ir as f64 / 20.0;
                        let v = plug
                            .homotopy_field(&hp, t, PointW3::new(z, th, r).unwrap())
                            .unwrap();
                        min_norm = min_norm.min(v.norm());
                    }
                }
            }
        }
        assert!(min_norm > 0.0, "homotopy field vanishes: min norm {min_norm}");
    }

    #[test]
    fn nd_field_values() {
        let plug = WilsonNdPlug::new(make_wilson_nd_profile(4, 1, SQRT_2).unwrap());
        // collar point: pure vertical
        let p = PointWNd::new(-2.0, 0.0, 0.0, 0.0, vec![], vec![0.0]).unwrap();
        let t = plug.field(&p).unwrap();
        assert_eq!(t.component(Coord::S), 0.0);
        assert_eq!(t.component(Coord::T), 0.0);
        assert_eq!(t.component(Coord::Z), 1.0);
        // f-plateau point
        let p = PointWNd::new(-1.0, 0.0, 0.0, 0.0, vec![], vec![0.0]).unwrap();
        let t = plug.field(&p).unwrap();
        assert_eq!(t.component(Coord::S), 1.0);
        assert_eq!(t.component(Coord::T), SQRT_2);
        assert_eq!(t.component(Coord::Z), 0.0);
        assert_eq!(t.component(Coord::Y(0)), 0.0);
        // symmetry pair
        let q = PointWNd::new(1.0, 0.0, 0.0, 0.0, vec![], vec![0.0]).unwrap();
        let tq = plug.field(&q).unwrap();
        assert_eq!(tq.component(Coord::S), -1.0);
        assert_eq!(tq.component(Coord::Z), t.component(Coord::Z));
    }

    #[test]
    fn nd_homotopy_stages() {
        let plug = WilsonNdPlug::new(make_wilson_nd_profile(4, 1, SQRT_2).unwrap());
        let p = PointWNd::new(1.0, 0.3, 0.4, 0.0, vec![], vec![0.0]).unwrap();
        let t0 = plug.homotopy_field(0.0, &p).unwrap();
        assert_eq!(t0, plug.field(&p).unwrap());
        // half-way: g lifted to 1, f unchanged
        let th = plug.homotopy_field(0.5, &p).unwrap();
        assert_eq!(th.component(Coord::Z), 1.0);
        assert_eq!(th.component(Coord::S), plug.field(&p).unwrap().component(Coord::S));
        let t1 = plug.homotopy_field(1.0, &p).unwrap();
        assert_eq!(t1.component(Coord::S), 0.0);
        assert_eq!(t1.component(Coord::T), 0.0);
        assert_eq!(t1.component(Coord::Z), 1.0);
        assert!(plug.homotopy_field(1.2, &p).is_err());
        // nonvanishing through the stages on the zero set of g
        let zp = PointWNd::new(1.0, 0.0, 0.0, 0.0, vec![], vec![0.0]).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let v = plug.homotopy_field(t, &zp).unwrap();
            assert!(v.norm() > 0.0, "vanishes at stage {t}");
        }
    }

    #[test]
    fn embedding_examples() {
        // identity placement of the 3-D Wilson plug box
        let emb = PlugEmbedding::identity(vec![-2.0, 0.0, 1.0], vec![2.0, crate::geom::TAU, 3.0]);
        let plug = Wilson3Plug::new(make_wilson3_profile());
        let field = |p: &[f64]| -> Vec<f64> {
            let t = plug.field(PointW3::new_clamped(p[0], p[1], p[2]).into()).unwrap();
            vec![
                t.component(Coord::Z),
                t.component(Coord::Theta),
                t.component(Coord::R),
            ]
        };
        // outside the image: vertical
        let v = embed_plug_field(&emb, &field, &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(v.component(Coord::Z), 1.0);
        assert_eq!(v.component(Coord::X(0)), 0.0);
        // image of a collar point: vertical scaled by a positive factor
        let v = embed_plug_field(&emb, &field, &[-2.0, 1.0, 1.5]).unwrap();
        assert_eq!(v.component(Coord::Z), 1.0);
        // image of (z=1, θ=0, r=2): pure rotation direction
        let v = embed_plug_field(&emb, &field, &[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(v.component(Coord::Z), 0.0);
        assert_eq!(v.component(Coord::X(0)), 1.0);
        assert_eq!(v.component(Coord::X(1)), 0.0);

        // scaled placement: pushforward scales componentwise
        let emb2 = PlugEmbedding {
            scale: vec![0.5, 1.0, 2.0],
            offset: vec![0.0, 0.0, 0.0],
            plug_lo: vec![-2.0, 0.0, 1.0],
            plug_hi: vec![2.0, crate::geom::TAU, 3.0],
        };
        let v = embed_plug_field(&emb2, &field, &[-1.0, 0.0, 4.0]).unwrap();
        // ambient (-1, 0, 4) pulls back to plug (-2, 0, 2): collar, ∂_z
        assert_eq!(v.component(Coord::Z), 0.5);
    }
}
