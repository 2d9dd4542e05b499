//! Dimension-two obstruction computations: rotation numbers of circle maps,
//! winding degree of a vector field along a closed curve, classification of
//! line fields on the torus (suspension vs Reeb component), and the closed
//! orbits forced on the boundary torus of a standard Reeb component.

use crate::integrate::{integrate, FaceAction, FaceDir, FlowSystem, IntegratorConfig};
use crate::{EventKind, PlugError, Result, Terminal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// An orientation-preserving circle map given by its lift.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum CircleMap {
    Identity,
    /// x ↦ x + rho.
    Rigid { rho: f64 },
    /// Arnold family: x ↦ x + omega + (k / 2π)·sin(2πx).
    Arnold { omega: f64, k: f64 },
    /// Conjugated map h⁻¹ ∘ m ∘ h with h(x) = x + (a / 2π)·sin(2πx).
    Conjugated { inner: Box<CircleMap>, a: f64 },
}

impl CircleMap {
    pub fn lift(&self, x: f64) -> f64 {
        match self {
            CircleMap::Identity => x,
            CircleMap::Rigid { rho } => x + rho,
            CircleMap::Arnold { omega, k } => x + omega + k / TAU * (TAU * x).sin(),
            CircleMap::Conjugated { inner, a } => {
                let h = |u: f64| u + a / TAU * (TAU * u).sin();
                // invert h by Newton (|a| < 1 keeps h a diffeomorphism)
                let y = inner.lift(h(x));
                let mut u = y;
                for _ in 0..50 {
                    let fu = h(u) - y;
                    let dfu = 1.0 + a * (TAU * u).cos();
                    let step = fu / dfu;
                    u -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                u
            }
        }
    }

    /// lift(x + 1) = lift(x) + 1 on samples.
    pub fn validate(&self) -> Result<()> {
        for k in 0..64 {
            let x = k as f64 / 64.0 - 0.5;
            if (self.lift(x + 1.0) - self.lift(x) - 1.0).abs() > 1e-12 {
                return Err(PlugError::Profile(
                    "lift does not commute with integer translation".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Rotation number estimate (lift^n(x) − x)/n with its crude error bound 2/n.
pub fn rotation_number(m: &CircleMap, iterations: usize) -> Result<(f64, f64)> {
    if iterations < 1000 {
        return Err(PlugError::Range("rotation number needs >= 1e3 iterations".into()));
    }
    let mut x = 0.0f64;
    for _ in 0..iterations {
        x = m.lift(x);
    }
    Ok((x / iterations as f64, 2.0 / iterations as f64))
}

/// Winding number of a nonvanishing planar field along a sampled closed
/// curve: the summed, wrapped angle increments divided by 2π, with a guard
/// that the total is within 0.1 of an integer.
pub fn degree_along_curve(
    field: &dyn Fn(f64, f64) -> (f64, f64),
    curve: &[(f64, f64)],
) -> Result<i64> {
    if curve.len() < 8 {
        return Err(PlugError::Range("need at least 8 curve samples".into()));
    }
    let mut total = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut first = 0.0;
    for (i, &(x, y)) in curve.iter().chain(curve.first()).enumerate() {
        let (vx, vy) = field(x, y);
        let norm = (vx * vx + vy * vy).sqrt();
        if norm < 1e-8 {
            return Err(PlugError::Domain(format!(
                "field vanishes on the curve at ({x}, {y})"
            )));
        }
        let ang = vy.atan2(vx);
        if let Some(p) = prev {
            let mut d = ang - p;
            while d > PI {
                d -= TAU;
            }
            while d < -PI {
                d += TAU;
            }
            total += d;
        } else {
            first = ang;
        }
        prev = Some(ang);
        let _ = (i, first);
    }
    let winding = total / TAU;
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 {
        return Err(PlugError::Inconclusive(format!(
            "winding {winding} is not close to an integer; refine the curve"
        )));
    }
    Ok(rounded as i64)
}

/// A continuous direction field on T² = [0,1)², given as an angle ψ(θ, s):
/// the line field is spanned by (cos ψ, sin ψ).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TorusLineField {
    /// Constant slope field: direction (1, slope) everywhere.
    Linear { slope: f64 },
    /// Suspension of a circle map: direction (1, G(s)) with G(s) =
    /// lift(s) − s. Fixed points of the map are exactly the closed leaves.
    Suspension { map: CircleMap },
    /// Two Reeb annuli glued: closed leaves at s = 0 and s = 1/2 with
    /// opposite orientations, spiraling interior leaves.
    DoubleReeb { drift: f64 },
}

impl TorusLineField {
    pub fn direction(&self, theta: f64, s: f64) -> (f64, f64) {
        match self {
            TorusLineField::Linear { slope } => (1.0, *slope),
            TorusLineField::Suspension { map } => {
                let sm = s.rem_euclid(1.0);
                (1.0, map.lift(sm) - sm)
            }
            TorusLineField::DoubleReeb { drift } => {
                let _ = theta;
                (-(TAU * s).cos(), drift * (TAU * s).sin())
            }
        }
    }

    /// Continuity proxy: no direction jump above π/2 between neighbors.
    pub fn validate(&self, n: usize) -> Result<()> {
        let ang = |th: f64, s: f64| {
            let (x, y) = self.direction(th, s);
            y.atan2(x)
        };
        for i in 0..n {
            for j in 0..n {
                let th = i as f64 / n as f64;
                let s = j as f64 / n as f64;
                let a = ang(th, s);
                for (dth, ds) in [(1.0 / n as f64, 0.0), (0.0, 1.0 / n as f64)] {
                    let b = ang(th + dth, s + ds);
                    let mut d = (b - a).abs();
                    if d > PI {
                        d = TAU - d;
                    }
                    if d > PI / 2.0 {
                        return Err(PlugError::Profile(format!(
                            "direction field jumps by {d} near ({th}, {s})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Classification outcomes for a torus line field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TorusFoliationClass {
    ReebComponent,
    SuspensionNoClosed,
    SuspensionWithClosed,
}

/// Flow wrapper for integrating a torus line field in the θ direction.
struct TorusFlow<'a> {
    tf: &'a TorusLineField,
    /// Stop once θ has advanced by 1.
    theta_goal: f64,
}

impl FlowSystem for TorusFlow<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn field(&self, y: &[f64], dy: &mut [f64]) {
        let (a, b) = self.tf.direction(y[0], y[1]);
        dy[0] = a;
        dy[1] = b;
    }
    fn n_faces(&self) -> usize {
        1
    }
    fn face_value(&self, _k: usize, y: &[f64]) -> f64 {
        y[0] - self.theta_goal
    }
    fn face_dir(&self, _k: usize) -> FaceDir {
        FaceDir::Rising
    }
    fn face_action(&self, _k: usize, _y: &[f64]) -> FaceAction {
        FaceAction::Terminal(EventKind::HitTop)
    }
}

/// Return map of the field through the vertical circle {θ = θ0}, if the
/// field is transverse to it and every sampled leaf comes back.
fn vertical_return_map(tf: &TorusLineField, theta0: f64, samples: usize) -> Option<Vec<(f64, f64)>> {
    // transversality along the circle
    for j in 0..=64 {
        let s = j as f64 / 64.0;
        let (a, _) = tf.direction(theta0, s);
        if a.abs() < 1e-3 {
            return None;
        }
    }
    let mut pairs = Vec::with_capacity(samples);
    for j in 0..samples {
        let s0 = j as f64 / samples as f64;
        let flow = TorusFlow {
            tf,
            theta_goal: theta0 + 1.0,
        };
        let cfg = IntegratorConfig {
            t_max: 200.0,
            ..Default::default()
        };
        let out = integrate(&flow, &[theta0, s0], &cfg);
        if out.terminal != Terminal::Exited {
            return None; // some leaf never returns: not a cross-section
        }
        pairs.push((s0, out.end_state[1]));
    }
    Some(pairs)
}

/// Classify a line field on the torus.
///
/// A valid global cross-section (every sampled leaf returns) makes the field
/// a suspension; the return map's displacement then separates closed leaves
/// from none. Without a section, circle leaves crossed with opposite
/// orientations witness a Reeb component.
pub fn detect_reeb_component(tf: &TorusLineField) -> Result<TorusFoliationClass> {
    tf.validate(64)?;

    if let Some(pairs) = vertical_return_map(tf, 0.0, 64) {
        // rotation/displacement of the return map
        let min_disp = pairs
            .iter()
            .map(|(s0, s1)| (s1 - s0).abs())
            .fold(f64::INFINITY, f64::min);
        if min_disp < 1e-6 {
            return Ok(TorusFoliationClass::SuspensionWithClosed);
        }
        // iterate the return map to look for periodic points of low period
        let has_sign_change = {
            let disps: Vec<f64> = pairs.iter().map(|(s0, s1)| s1 - s0).collect();
            disps.iter().any(|d| *d > 0.0) && disps.iter().any(|d| *d < 0.0)
        };
        if has_sign_change {
            // displacement changes sign: a fixed point exists in between
            return Ok(TorusFoliationClass::SuspensionWithClosed);
        }
        return Ok(TorusFoliationClass::SuspensionNoClosed);
    }

    // horizontal sections (suspension in the other coordinate)
    let transposed = TransposedField(tf);
    if let Some(pairs) = vertical_return_map_t(&transposed, 64) {
        let min_disp = pairs
            .iter()
            .map(|(s0, s1)| (s1 - s0).abs())
            .fold(f64::INFINITY, f64::min);
        let disps: Vec<f64> = pairs.iter().map(|(s0, s1)| s1 - s0).collect();
        let has_sign_change = disps.iter().any(|d| *d > 0.0) && disps.iter().any(|d| *d < 0.0);
        if min_disp < 1e-6 || has_sign_change {
            return Ok(TorusFoliationClass::SuspensionWithClosed);
        }
        return Ok(TorusFoliationClass::SuspensionNoClosed);
    }

    // look for horizontal circle leaves s = c with v_s ≡ 0 and classify by
    // the orientation of the θ-component across them
    let mut leaves: Vec<(f64, f64)> = Vec::new(); // (s, sign of v_theta)
    let n = 512;
    for j in 0..n {
        let s = j as f64 / n as f64;
        let mut max_vs = 0.0f64;
        let mut vth = 0.0;
        for i in 0..32 {
            let th = i as f64 / 32.0;
            let (a, b) = tf.direction(th, s);
            max_vs = max_vs.max(b.abs());
            vth = a;
        }
        if max_vs < 1e-9 {
            leaves.push((s, vth.signum()));
        }
    }
    let has_pos = leaves.iter().any(|(_, sg)| *sg > 0.0);
    let has_neg = leaves.iter().any(|(_, sg)| *sg < 0.0);
    if has_pos && has_neg {
        return Ok(TorusFoliationClass::ReebComponent);
    }

    Err(PlugError::Inconclusive(
        "no global section found and no opposite circle leaves at this resolution".into(),
    ))
}

/// The field with coordinates exchanged, for horizontal-section analysis.
struct TransposedField<'a>(&'a TorusLineField);

fn vertical_return_map_t(tfd: &TransposedField, samples: usize) -> Option<Vec<(f64, f64)>> {
    for j in 0..=64 {
        let s = j as f64 / 64.0;
        let (_, b) = tfd.0.direction(s, 0.0);
        let _ = b;
    }
    // transversality of the original field to {s = 0}: v_s bounded away from 0
    for i in 0..=64 {
        let th = i as f64 / 64.0;
        let (_, b) = tfd.0.direction(th, 0.0);
        if b.abs() < 1e-3 {
            return None;
        }
    }
    struct Swapped<'a>(&'a TorusLineField);
    impl FlowSystem for Swapped<'_> {
        fn dim(&self) -> usize {
            2
        }
        fn field(&self, y: &[f64], dy: &mut [f64]) {
            // states are (s, θ)
            let (a, b) = self.0.direction(y[1], y[0]);
            let s = b.signum();
            dy[0] = b * s;
            dy[1] = a * s;
        }
        fn n_faces(&self) -> usize {
            1
        }
        fn face_value(&self, _k: usize, y: &[f64]) -> f64 {
            y[0] - 1.0
        }
        fn face_dir(&self, _k: usize) -> FaceDir {
            FaceDir::Rising
        }
        fn face_action(&self, _k: usize, _y: &[f64]) -> FaceAction {
            FaceAction::Terminal(EventKind::HitTop)
        }
    }
    let mut pairs = Vec::with_capacity(samples);
    for j in 0..samples {
        let th0 = j as f64 / samples as f64;
        let flow = Swapped(tfd.0);
        let cfg = IntegratorConfig {
            t_max: 200.0,
            ..Default::default()
        };
        let out = integrate(&flow, &[0.0, th0], &cfg);
        if out.terminal != Terminal::Exited {
            return None;
        }
        pairs.push((th0, out.end_state[1]));
    }
    Some(pairs)
}

/// The standard Reeb component on the solid torus D² × S¹ with coordinates
/// (r, θ, t): leaves are the boundary torus {r = 1} and the spun graphs
/// t = τ(r) + c with τ'(r) = w(r) → ∞ as r → 1. A leafwise field is
/// X = aθ·∂_θ + u(t)·E(r) with E the leafwise radial direction; on the
/// boundary E degenerates to ∂_t and the induced field is ∂_θ + u(t)∂_t.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReebSolidTorus {
    /// Angular speed component (nonzero).
    pub a_theta: f64,
    /// Leafwise transverse drive u(t) = amp·sin(t + phase).
    pub amp: f64,
    pub phase: f64,
}

impl ReebSolidTorus {
    /// Slope of the leaves: dt/dr along a leaf.
    pub fn leaf_slope(&self, r: f64) -> f64 {
        // blows up at the boundary, flat at the core
        let rr = r.clamp(0.0, 1.0 - 1e-9);
        2.0 * rr / (1.0 - rr * rr).powi(2)
    }

    pub fn u(&self, t: f64) -> f64 {
        self.amp * (t + self.phase).sin()
    }

    /// The leafwise field at (r, θ, t) in ambient components (dr, dθ, dt).
    /// The leafwise unit "radial" direction is (cos φ, 0, sin φ) with
    /// tan φ = leaf slope.
    pub fn field(&self, r: f64, _theta: f64, t: f64) -> (f64, f64, f64) {
        let w = self.leaf_slope(r);
        let c = 1.0 / (1.0 + w * w).sqrt();
        let s = w * c;
        let u = self.u(t);
        (u * c, self.a_theta, u * s)
    }

    /// Tangency check: the ambient field must annihilate the leaf normal
    /// (−w, 0, 1)/√(1+w²) on samples, and must be non-singular.
    pub fn validate(&self) -> Result<()> {
        if self.a_theta.abs() < 1e-9 {
            return Err(PlugError::Profile("leafwise field is singular (aθ = 0)".into()));
        }
        for i in 0..40 {
            let r = i as f64 / 40.0 * 0.999;
            for j in 0..16 {
                let t = TAU * j as f64 / 16.0;
                let (dr, _dth, dt) = self.field(r, 0.0, t);
                let w = self.leaf_slope(r);
                let norm = (1.0 + w * w).sqrt();
                let inner = (-w * dr + dt) / norm;
                if inner.abs() > 1e-10 {
                    return Err(PlugError::Profile(format!(
                        "field not tangent to leaves at r={r}: <X, n> = {inner}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The induced field on the boundary torus (θ, t): (aθ, u(t)).
    pub fn boundary_field(&self) -> impl Fn(f64, f64) -> (f64, f64) + '_ {
        move |_theta, t| (self.a_theta, self.u(t))
    }
}

/// Closed orbits of the induced field on the boundary torus. The zeros of
/// u are circles {t = const}; they are the forced closed orbits.
pub fn reeb_boundary_orbits(
    rst: &ReebSolidTorus,
    cfg: &IntegratorConfig,
) -> Result<Vec<crate::integrate::ClosedOrbitCandidate>> {
    rst.validate()?;
    struct BoundaryFlow<'a>(&'a ReebSolidTorus);
    impl FlowSystem for BoundaryFlow<'_> {
        fn dim(&self) -> usize {
            2
        }
        fn field(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0.a_theta;
            dy[1] = self.0.u(y[1]);
        }
    }
    let flow = BoundaryFlow(rst);
    let seeds: Vec<Vec<f64>> = (0..16)
        .map(|j| vec![0.0, TAU * j as f64 / 16.0])
        .collect();
    let angle_mask = [true, true];
    let rc = crate::integrate::RecurrenceConfig {
        transient: 0.5,
        recurrence_tol: 1e-3,
        shoot_tol: 1e-9,
    };
    let census = crate::integrate::closed_orbit_scan(&flow, &seeds, &angle_mask, cfg, &rc);
    let distinct = crate::integrate::distinct_orbits(&flow, &census.candidates, &angle_mask, cfg, 1e-2);
    if distinct.len() < 2 {
        return Err(PlugError::Inconclusive(format!(
            "found only {} closed boundary orbits",
            distinct.len()
        )));
    }
    Ok(distinct)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_number_rigid_exact() {
        let third = 1.0 / 3.0;
        let m = CircleMap::Rigid { rho: third };
        m.validate().unwrap();
        // exact after three iterations
        let mut x = 0.0;
        for _ in 0..3 {
            x = m.lift(x);
        }
        assert_eq!(x / 3.0, third);
        // long averages accumulate one rounding per addition
        let (rho, err) = rotation_number(&m, 3000).unwrap();
        assert!((rho - third).abs() < 1e-12);
        assert!(err <= 2.0 / 3000.0);

        // dyadic rotation sums exactly: bit-exact at any length
        let (rho_q, _) = rotation_number(&CircleMap::Rigid { rho: 0.25 }, 4000).unwrap();
        assert_eq!(rho_q, 0.25);
    }

    #[test]
    fn rotation_number_identity() {
        let (rho, _) = rotation_number(&CircleMap::Identity, 1000).unwrap();
        assert_eq!(rho, 0.0);
    }

    #[test]
    fn rotation_number_needs_iterations() {
        assert!(rotation_number(&CircleMap::Identity, 10).is_err());
    }

    #[test]
    fn rotation_number_arnold_vs_long_orbit_oracle() {
        let m = CircleMap::Arnold { omega: 0.3, k: 0.05 };
        m.validate().unwrap();
        let (est, _) = rotation_number(&m, 100_000).unwrap();
        // independent long-orbit oracle
        let mut x = 0.37;
        let n = 1_000_000usize;
        let x0 = x;
        for _ in 0..n {
            x = m.lift(x);
        }
        let oracle = (x - x0) / n as f64;
        assert!(
            (est - oracle).abs() < 1e-5,
            "estimate {est} vs oracle {oracle}"
        );
    }

    #[test]
    fn rotation_number_conjugation_invariant() {
        let m = CircleMap::Arnold { omega: 0.3, k: 0.05 };
        let c = CircleMap::Conjugated {
            inner: Box::new(m.clone()),
            a: 0.4,
        };
        c.validate().unwrap();
        let (r1, _) = rotation_number(&m, 200_000).unwrap();
        let (r2, _) = rotation_number(&c, 200_000).unwrap();
        assert!((r1 - r2).abs() < 1e-4, "{r1} vs {r2}");
    }

    #[test]
    fn degree_constant_and_radial() {
        let circle: Vec<(f64, f64)> = (0..256)
            .map(|k| {
                let a = TAU * k as f64 / 256.0;
                (a.cos(), a.sin())
            })
            .collect();
        let constant = |_x: f64, _y: f64| (1.0, 0.5);
        assert_eq!(degree_along_curve(&constant, &circle).unwrap(), 0);
        let radial = |x: f64, y: f64| (x, y);
        assert_eq!(degree_along_curve(&radial, &circle).unwrap(), 1);
        let vanishing = |_x: f64, _y: f64| (0.0, 0.0);
        assert!(degree_along_curve(&vanishing, &circle).is_err());
    }

    #[test]
    fn degree_homotopy_invariant_under_curve_perturbation() {
        let radial = |x: f64, y: f64| (x, y);
        for wobble in [0.0, 0.1, 0.25] {
            let curve: Vec<(f64, f64)> = (0..256)
                .map(|k| {
                    let a = TAU * k as f64 / 256.0;
                    let r = 1.0 + wobble * (3.0 * a).sin();
                    (r * a.cos(), r * a.sin())
                })
                .collect();
            assert_eq!(degree_along_curve(&radial, &curve).unwrap(), 1);
        }
    }

    #[test]
    fn classify_linear_fields() {
        let irr = TorusLineField::Linear {
            slope: std::f64::consts::SQRT_2,
        };
        assert_eq!(
            detect_reeb_component(&irr).unwrap(),
            TorusFoliationClass::SuspensionNoClosed
        );
        let flat = TorusLineField::Linear { slope: 0.0 };
        assert_eq!(
            detect_reeb_component(&flat).unwrap(),
            TorusFoliationClass::SuspensionWithClosed
        );
    }

    #[test]
    fn classify_double_reeb() {
        let tf = TorusLineField::DoubleReeb { drift: 0.3 };
        assert_eq!(
            detect_reeb_component(&tf).unwrap(),
            TorusFoliationClass::ReebComponent
        );
    }

    #[test]
    fn classify_suspensions_by_rotation_number() {
        let rigid = TorusLineField::Suspension {
            map: CircleMap::Rigid {
                rho: std::f64::consts::SQRT_2 - 1.0,
            },
        };
        assert_eq!(
            detect_reeb_component(&rigid).unwrap(),
            TorusFoliationClass::SuspensionNoClosed
        );
        // a map with fixed points: closed leaves
        let pinched = TorusLineField::Suspension {
            map: CircleMap::Arnold { omega: 0.0, k: 0.5 },
        };
        assert_eq!(
            detect_reeb_component(&pinched).unwrap(),
            TorusFoliationClass::SuspensionWithClosed
        );
    }

    #[test]
    fn reeb_solid_torus_tangency() {
        let rst = ReebSolidTorus {
            a_theta: 1.0,
            amp: 0.3,
            phase: 0.0,
        };
        rst.validate().unwrap();
        let singular = ReebSolidTorus {
            a_theta: 0.0,
            amp: 0.3,
            phase: 0.0,
        };
        assert!(singular.validate().is_err());
    }

    #[test]
    fn boundary_orbits_found() {
        let rst = ReebSolidTorus {
            a_theta: 1.0,
            amp: 0.3,
            phase: 0.0,
        };
        let cfg = IntegratorConfig::with_horizon(200.0);
        let orbits = reeb_boundary_orbits(&rst, &cfg).unwrap();
        assert!(orbits.len() >= 2, "found {}", orbits.len());
        for o in &orbits {
            assert!(o.residual < 1e-9);
        }
    }

    #[test]
    fn leaf_circle_degree_is_one() {
        // X restricted to an interior leaf (a plane), expressed in the
        // leaf's polar-like chart: rotation dominates, so a large circle
        // approaching the boundary sees winding 1.
        let rst = ReebSolidTorus {
            a_theta: 1.0,
            amp: 0.3,
            phase: 0.0,
        };
        let leaf_field = |x: f64, y: f64| {
            let rho = (x * x + y * y).sqrt().max(1e-6);
            let (ct, st) = (x / rho, y / rho);
            // tangential speed aθ·ρ, radial drive u(t(ρ)) with t ≈ τ(ρ)
            let t = rst.leaf_slope(rho.min(0.999)) * 0.1;
            let u = rst.u(t);
            (
                -rho * rst.a_theta * st + u * ct,
                rho * rst.a_theta * ct + u * st,
            )
        };
        let circle: Vec<(f64, f64)> = (0..512)
            .map(|k| {
                let a = TAU * k as f64 / 512.0;
                (0.95 * a.cos(), 0.95 * a.sin())
            })
            .collect();
        assert_eq!(degree_along_curve(&leaf_field, &circle).unwrap(), 1);
    }
}
