//! Shared geometric vocabulary: points of the plug domains, tangent vectors
//! keyed by coordinate name, trajectory/event records, and the tolerance
//! policy used by every scan in the crate.

use crate::{PlugError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

/// Normalize an angle to [0, 2π).
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let mut x = a % TAU;
    if x < 0.0 {
        x += TAU;
    }
    // `%` can return exactly TAU-eps + eps rounding; force the half-open range.
    if x >= TAU {
        x -= TAU;
    }
    x
}

/// Geodesic distance on the circle, in [0, π].
#[inline]
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (normalize_angle(a) - normalize_angle(b)).abs();
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Signed, wrapped angular difference a − b in (−π, π].
#[inline]
pub fn angle_signed(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % TAU;
    if d > PI {
        d -= TAU;
    }
    if d <= -PI {
        d += TAU;
    }
    d
}

/// Coordinate names for the plug domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coord {
    Z,
    Theta,
    R,
    S,
    T,
    X(u8),
    Y(u8),
}

impl Coord {
    /// Angles are compared on the circle; everything else on the line.
    pub fn is_angle(self) -> bool {
        matches!(self, Coord::Theta | Coord::S | Coord::T)
    }
}

/// A tangent vector with components keyed by coordinate name.
///
/// Foliated fields carry explicit zero `Y(i)` components so that the
/// "no ∂_y components" property is directly inspectable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tangent {
    comps: Vec<(Coord, f64)>,
}

impl Tangent {
    pub fn new(comps: Vec<(Coord, f64)>) -> Self {
        debug_assert!(comps.iter().all(|(_, v)| v.is_finite()));
        Tangent { comps }
    }

    pub fn component(&self, c: Coord) -> f64 {
        self.comps
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn components(&self) -> &[(Coord, f64)] {
        &self.comps
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// A point of the 3-D Wilson plug W = [−2,2] × S¹ × [1,3].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointW3 {
    pub z: f64,
    pub theta: f64,
    pub r: f64,
}

impl PointW3 {
    pub fn new(z: f64, theta: f64, r: f64) -> Result<Self> {
        if !(-2.0..=2.0).contains(&z) || !(1.0..=3.0).contains(&r) || !theta.is_finite() {
            return Err(PlugError::Domain(format!(
                "(z={z}, theta={theta}, r={r}) not in [-2,2] x S^1 x [1,3]"
            )));
        }
        Ok(PointW3 {
            z,
            theta: normalize_angle(theta),
            r,
        })
    }

    /// Constructor for integrator-internal states that may sit within
    /// round-off of the boundary.
    pub fn new_clamped(z: f64, theta: f64, r: f64) -> Self {
        PointW3 {
            z: z.clamp(-2.0, 2.0),
            theta: normalize_angle(theta),
            r: r.clamp(1.0, 3.0),
        }
    }

    pub fn to_state(self) -> [f64; 3] {
        [self.z, self.theta, self.r]
    }

    pub fn from_state(s: &[f64]) -> Self {
        PointW3::new_clamped(s[0], s[1], s[2])
    }

    pub fn schema() -> [Coord; 3] {
        [Coord::Z, Coord::Theta, Coord::R]
    }

    pub fn view(&self) -> Vec<(Coord, f64)> {
        vec![(Coord::Z, self.z), (Coord::Theta, self.theta), (Coord::R, self.r)]
    }
}

/// A point of the n-dimensional Wilson plug
/// W^{n,l} = [−2,2] × T² × [−2,2] × D^{n−4} × D^l.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointWNd {
    pub z: f64,
    pub s: f64,
    pub t: f64,
    pub r: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointWNd {
    pub fn new(z: f64, s: f64, t: f64, r: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(-2.0..=2.0).contains(&z) || !(-2.0..=2.0).contains(&r) {
            return Err(PlugError::Domain(format!("z={z} or r={r} outside [-2,2]")));
        }
        if norm(&x) > 1.0 + 1e-12 || norm(&y) > 1.0 + 1e-12 {
            return Err(PlugError::Domain("|x| or |y| exceeds 1".into()));
        }
        Ok(PointWNd {
            z,
            s: normalize_angle(s),
            t: normalize_angle(t),
            r,
            x,
            y,
        })
    }

    pub fn to_state(&self) -> Vec<f64> {
        let mut v = vec![self.z, self.s, self.t, self.r];
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v
    }

    pub fn from_state(state: &[f64], nx: usize, ny: usize) -> Self {
        PointWNd {
            z: state[0].clamp(-2.0, 2.0),
            s: normalize_angle(state[1]),
            t: normalize_angle(state[2]),
            r: state[3].clamp(-2.0, 2.0),
            x: state[4..4 + nx].to_vec(),
            y: state[4 + nx..4 + nx + ny].to_vec(),
        }
    }

    pub fn schema(nx: usize, ny: usize) -> Vec<Coord> {
        let mut v = vec![Coord::Z, Coord::S, Coord::T, Coord::R];
        v.extend((0..nx).map(|i| Coord::X(i as u8)));
        v.extend((0..ny).map(|i| Coord::Y(i as u8)));
        v
    }

    pub fn view(&self) -> Vec<(Coord, f64)> {
        let mut v = vec![
            (Coord::Z, self.z),
            (Coord::S, self.s),
            (Coord::T, self.t),
            (Coord::R, self.r),
        ];
        v.extend(self.x.iter().enumerate().map(|(i, a)| (Coord::X(i as u8), *a)));
        v.extend(self.y.iter().enumerate().map(|(i, a)| (Coord::Y(i as u8), *a)));
        v
    }
}

/// Max over coordinates of componentwise distance, angles measured on the
/// circle. Errors when the two points carry different schemas.
pub fn point_distance(p: &[(Coord, f64)], q: &[(Coord, f64)]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(PlugError::Schema(format!(
            "point records have {} vs {} coordinates",
            p.len(),
            q.len()
        )));
    }
    let mut d = 0.0f64;
    for ((ca, va), (cb, vb)) in p.iter().zip(q.iter()) {
        if ca != cb {
            return Err(PlugError::Schema(format!("coordinate {ca:?} vs {cb:?}")));
        }
        let dd = if ca.is_angle() {
            angle_distance(*va, *vb)
        } else {
            (va - vb).abs()
        };
        d = d.max(dd);
    }
    Ok(d)
}

/// What ended a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Exited,
    TimeHorizon,
    Error,
}

/// Kinds of trajectory events.
///
/// `EnterInsertion`/`ExitInsertion` are the logged crossings of the insertion
/// entry/exit faces (each carries its teleport implicitly). `TeleportDown`/
/// `TeleportUp` record seed normalization: a seed given inside a tongue (resp.
/// inside a D_i box when the homotopy parameter is past 1) is mapped through
/// σ_i before integration starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    EnterInsertion(usize),
    ExitInsertion(usize),
    TeleportDown(usize),
    TeleportUp(usize),
    HitBottom,
    HitTop,
    HitLateral,
}

#[derive(Clone, Debug, Serialize)]
pub struct Event<P> {
    pub kind: EventKind,
    pub time: f64,
    pub location: P,
}

/// An integrated orbit: down-sampled states, the event log, and how it ended.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory<P> {
    pub samples: Vec<(f64, P)>,
    pub events: Vec<Event<P>>,
    pub terminal: Terminal,
}

impl<P> Trajectory<P> {
    /// Check the structural invariants: sample times non-decreasing, event
    /// times strictly increasing, and `Exited` implies a boundary hit.
    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(PlugError::Integration("sample times decrease".into()));
            }
        }
        for w in self.events.windows(2) {
            if w[1].time <= w[0].time {
                return Err(PlugError::Integration(format!(
                    "event times not strictly increasing: {} then {}",
                    w[0].time, w[1].time
                )));
            }
        }
        if self.terminal == Terminal::Exited {
            match self.events.last().map(|e| e.kind) {
                Some(EventKind::HitTop) | Some(EventKind::HitBottom) => {}
                other => {
                    return Err(PlugError::Integration(format!(
                        "terminal Exited but last event is {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn exit_location(&self) -> Option<&P> {
        if self.terminal != Terminal::Exited {
            return None;
        }
        self.events.last().map(|e| &e.location)
    }
}

/// Tolerances shared by the integrators and the verification suites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub step_abs_tol: f64,
    pub step_rel_tol: f64,
    pub event_tol: f64,
    pub match_tol: f64,
    pub recurrence_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        // Two orders of separation between integration error and the
        // acceptance thresholds.
        TolerancePolicy {
            step_abs_tol: 1e-10,
            step_rel_tol: 1e-10,
            event_tol: 1e-8,
            match_tol: 1e-6,
            recurrence_tol: 1e-4,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        let all_pos = self.step_abs_tol > 0.0
            && self.step_rel_tol > 0.0
            && self.event_tol > 0.0
            && self.match_tol > 0.0
            && self.recurrence_tol > 0.0;
        if !all_pos {
            return Err(PlugError::Range("tolerances must be positive".into()));
        }
        if self.event_tol > self.match_tol {
            return Err(PlugError::Range("event_tol must be <= match_tol".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force circle distance: minimum of |a − b + 2πk| over shifts.
    fn angle_distance_oracle(a: f64, b: f64) -> f64 {
        (-3..=3)
            .map(|k| (a - b + k as f64 * TAU).abs())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn angle_distance_identity_and_antipodal() {
        assert_eq!(angle_distance(0.0, 0.0), 0.0);
        assert!((angle_distance(0.0, PI) - PI).abs() < 1e-15);
    }

    #[test]
    fn angle_distance_wraps_near_zero() {
        // Derived from the shift-minimum oracle.
        let d = angle_distance(0.1, TAU - 0.1);
        let want = angle_distance_oracle(0.1, TAU - 0.1);
        assert!((d - want).abs() < 1e-12);
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn point_distance_cases() {
        let p = PointW3::new(0.0, 0.0, 2.0).unwrap();
        assert_eq!(point_distance(&p.view(), &p.view()).unwrap(), 0.0);

        let q = PointW3::new(0.0, PI, 2.0).unwrap();
        assert!((point_distance(&p.view(), &q.view()).unwrap() - PI).abs() < 1e-15);

        // Componentwise max oracle: max(angle part 0.2, radial part 0.05).
        let a = PointW3::new(1.0, 0.1, 2.0).unwrap();
        let b = PointW3::new(1.0, TAU - 0.1, 2.05).unwrap();
        let want = angle_distance_oracle(0.1, TAU - 0.1).max(0.05);
        assert!((point_distance(&a.view(), &b.view()).unwrap() - want).abs() < 1e-12);
        assert!((point_distance(&a.view(), &b.view()).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn point_distance_schema_mismatch_errors() {
        let p = PointW3::new(0.0, 0.0, 2.0).unwrap();
        let q = PointWNd::new(0.0, 0.0, 0.0, 0.0, vec![], vec![0.0]).unwrap();
        assert!(point_distance(&p.view(), &q.view()).is_err());
    }

    #[test]
    fn tolerance_policy_invariants() {
        assert!(TolerancePolicy::default().validate().is_ok());
        let bad = TolerancePolicy {
            event_tol: 1e-3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trajectory_invariants_enforced() {
        let p = PointW3::new(0.0, 0.0, 2.0).unwrap();
        let traj = Trajectory {
            samples: vec![(0.0, p), (1.0, p)],
            events: vec![Event {
                kind: EventKind::HitTop,
                time: 1.0,
                location: p,
            }],
            terminal: Terminal::Exited,
        };
        assert!(traj.validate().is_ok());

        let bad = Trajectory {
            samples: vec![(0.0, p)],
            events: vec![],
            terminal: Terminal::Exited,
        };
        assert!(bad.validate().is_err());
    }
}

#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn angle_distance_symmetric(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            prop_assert!((angle_distance(a, b) - angle_distance(b, a)).abs() < 1e-12);
        }

        #[test]
        fn angle_distance_triangle(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            let ab = angle_distance(a, b);
            let bc = angle_distance(b, c);
            let ac = angle_distance(a, c);
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn angle_distance_in_range(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let d = angle_distance(a, b);
            prop_assert!((0.0..=PI + 1e-12).contains(&d));
        }
    }
}
