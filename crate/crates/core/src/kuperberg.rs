//! The Kuperberg quotient flow and its deactivation family, realized by
//! chart-switching (teleport) semantics.
//!
//! States are ambient Wilson coordinates, always outside the open tongues
//! σ_i(int D_i): when an orbit reaches an entry face 𝓛_i^− it jumps through
//! σ_i^{-1} to the bottom of the box D_i and keeps flowing in W; when it
//! reaches the top of a box ({+2} × L_i) it jumps through σ_i^t to the
//! tongue's exit face and continues. Nesting is carried by the event log —
//! the identification puts every level in the same W coordinates, so no
//! chart stack is needed.
//!
//! For homotopy parameters past 1 the boxes are the deactivated side
//! instead; orbits integrate plainly and only seeds inside a box need a
//! σ-normalization. The two regimes agree at t = 1, where the box transit
//! is vertical at unit speed and takes exactly the tongue's transit time.

use crate::geom::{angle_signed, normalize_angle, Event, EventKind, PointW3, Tangent, Terminal, Trajectory};
use crate::insertion::{certify_radius, sigma, validate_tube, InsertionSpec, RadiusCertificate, TongueInfo};
use crate::integrate::{integrate, FaceAction, FaceDir, FlowSystem, IntegratorConfig, RawTrajectory};
use crate::profiles::homotopy::homotopy_scalars_unchecked;
use crate::profiles::{Arc, EtaProfile, HomotopyProfile};
use crate::wilson::Wilson3Plug;
use crate::{Coord, PlugError, Result};
use serde::Serialize;

/// Validated Kuperberg data: the Wilson plug, two insertions, the homotopy
/// arcs aligned with the insertion geometry, and the measured tongues.
#[derive(Clone, Debug, Serialize)]
pub struct KuperbergPlug {
    pub wilson: Wilson3Plug,
    pub insertions: [InsertionSpec; 2],
    pub homotopy: HomotopyProfile,
    pub tongues: [TongueInfo; 2],
}

impl KuperbergPlug {
    /// The default geometry.
    pub fn standard() -> Result<Self> {
        let wilson = Wilson3Plug::new(crate::profiles::make_wilson3_profile());
        KuperbergPlug::new(wilson, [InsertionSpec::standard(1), InsertionSpec::standard(2)])
    }

    pub fn new(wilson: Wilson3Plug, insertions: [InsertionSpec; 2]) -> Result<Self> {
        let homotopy = derive_arcs(&insertions)?;
        homotopy.validate()?;

        // base radius certificates must pass before anything flows
        for ins in &insertions {
            let cert = certify_radius(ins, 0.0, 64)?;
            if !cert.pass {
                return Err(PlugError::Geometry(format!(
                    "insertion {} fails the radius inequality: {:?}",
                    ins.index, cert.witness
                )));
            }
        }

        let tongues = [
            validate_tube(&wilson, &insertions[0], 8)?,
            validate_tube(&wilson, &insertions[1], 8)?,
        ];

        // boxes pairwise disjoint
        let sector = |ins: &InsertionSpec| Arc::new(ins.theta_center, ins.theta_halfwidth);
        if !sector(&insertions[0]).disjoint(&sector(&insertions[1])) {
            return Err(PlugError::Geometry("insertion sectors overlap".into()));
        }

        // tongues spatially disjoint from both boxes (the boxes span all z,
        // so this is an angular condition) and from each other (z-separated)
        for tongue in &tongues {
            for ins in &insertions {
                for k in 0..=16 {
                    let th = ins.theta_center - ins.theta_halfwidth
                        + 2.0 * ins.theta_halfwidth * k as f64 / 16.0;
                    if tongue.arc_contains(th, 0.05) {
                        return Err(PlugError::Geometry(format!(
                            "tongue {} passes through box sector {}",
                            tongue.index, ins.index
                        )));
                    }
                }
            }
        }
        let (a, b) = (&tongues[0], &tongues[1]);
        if a.z_max >= b.z_min - 0.05 && b.z_max >= a.z_min - 0.05 {
            return Err(PlugError::Geometry(
                "tongue z-ranges are not separated".into(),
            ));
        }

        // α must vanish along the tongues (the deactivation leaves the
        // tongue field untouched for t ≤ 1, which is what makes the
        // teleported orbit a genuine orbit of the homotopy field) and must
        // be identically 1 over the box sectors (the escape gates).
        for tongue in &tongues {
            for k in 0..=400 {
                let th = tongue.arc_start + tongue.arc_sign * (-0.15 + 4.30 * k as f64 / 400.0);
                if homotopy.alpha(th) != 0.0 {
                    return Err(PlugError::Geometry(format!(
                        "alpha does not vanish on tongue {} at θ={th:.4}",
                        tongue.index
                    )));
                }
            }
        }
        for ins in &insertions {
            for k in 0..=32 {
                let th = ins.theta_center - ins.theta_halfwidth
                    + 2.0 * ins.theta_halfwidth * k as f64 / 32.0;
                if homotopy.alpha(th) != 1.0 {
                    return Err(PlugError::Geometry(format!(
                        "alpha is not 1 across box sector {}",
                        ins.index
                    )));
                }
            }
        }

        Ok(KuperbergPlug {
            wilson,
            insertions,
            homotopy,
            tongues,
        })
    }

    /// The flow at homotopy parameter t ∈ [0, 2].
    pub fn flow(&self, t: f64) -> Result<KuperbergFlow<'_>> {
        if !(0.0..=2.0).contains(&t) {
            return Err(PlugError::Range(format!("t={t} outside [0,2]")));
        }
        Ok(KuperbergFlow { base: self, t })
    }

    /// Radius certificates for both insertions at deformation t.
    pub fn certificates(&self, t: f64, density: usize) -> Result<[RadiusCertificate; 2]> {
        Ok([
            certify_radius(&self.insertions[0], t, density)?,
            certify_radius(&self.insertions[1], t, density)?,
        ])
    }

    /// Is (θ, r) inside one of the rectangles L_i (closed)?
    pub fn in_box_rect(&self, theta: f64, r: f64) -> Option<usize> {
        self.insertions
            .iter()
            .position(|ins| ins.contains(normalize_angle(theta), r))
            .map(|k| k + 1)
    }

    /// Cell-centered grid over the plug entry face
    /// {z = −2} × (S¹ × [1,3] ∖ (L_1 ∪ L_2)). Box bottoms are interior
    /// points of the quotient, not entry points, so they are skipped.
    pub fn entry_grid(&self, n_theta: usize, n_r: usize) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        for k in 0..n_theta {
            let th = crate::geom::TAU * (k as f64 + 0.5) / n_theta as f64;
            for j in 0..n_r {
                let r = 1.0 + 2.0 * (j as f64 + 0.5) / n_r as f64;
                if self.in_box_rect(th, r).is_none() {
                    seeds.push(vec![-2.0, th, r]);
                }
            }
        }
        seeds
    }

    /// Rough exit-time scale at homotopy parameter t (used for horizon
    /// warnings): a transit at gate speed plus slow-band cruising.
    pub fn estimated_exit_time(&self, t: f64) -> f64 {
        let gate = HomotopyProfile::phi(t).max(1e-9);
        4.0 / 0.07 + 8.0 / gate
    }
}

/// Arcs derived from the insertion geometry: α = 1 across the box sectors
/// (padded), 0 well away from them; the script arcs mark the entry faces.
fn derive_arcs(insertions: &[InsertionSpec; 2]) -> Result<HomotopyProfile> {
    let pad_in = 0.05;
    let pad_out = 0.10;
    let i_arcs = [
        Arc::new(
            insertions[0].theta_center,
            insertions[0].theta_halfwidth + pad_in,
        ),
        Arc::new(
            insertions[1].theta_center,
            insertions[1].theta_halfwidth + pad_in,
        ),
    ];
    let i_outer = [
        Arc::new(
            insertions[0].theta_center,
            insertions[0].theta_halfwidth + pad_out,
        ),
        Arc::new(
            insertions[1].theta_center,
            insertions[1].theta_halfwidth + pad_out,
        ),
    ];
    let j_arcs = [
        Arc::new(insertions[0].face_angle, 0.13),
        Arc::new(insertions[1].face_angle, 0.13),
    ];
    let j_outer = [
        Arc::new(insertions[0].face_angle, 0.15),
        Arc::new(insertions[1].face_angle, 0.15),
    ];
    Ok(HomotopyProfile {
        i_arcs,
        i_outer,
        j_arcs,
        j_outer,
    })
}

/// A point of the quotient: the ambient Wilson point plus, when the point
/// lies in a box D_i, the (identical) local chart coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientState {
    pub point: PointW3,
    pub inside_insertion: Option<(usize, PointW3)>,
}

impl QuotientState {
    pub fn new(plug: &KuperbergPlug, point: PointW3) -> Self {
        let inside = plug
            .in_box_rect(point.theta, point.r)
            .map(|i| (i, point));
        QuotientState {
            point,
            inside_insertion: inside,
        }
    }
}

/// The quotient flow at a fixed homotopy parameter.
#[derive(Clone, Copy)]
pub struct KuperbergFlow<'a> {
    pub base: &'a KuperbergPlug,
    pub t: f64,
}

impl<'a> KuperbergFlow<'a> {
    pub fn angle_mask() -> [bool; 3] {
        [false, true, false]
    }

    fn teleport_regime(&self) -> bool {
        self.t <= 1.0
    }

    /// The field of the case table at this state. The tongues carry the
    /// box chart implicitly, so the formula is the homotopy field of the
    /// Wilson plug in every evaluated region.
    pub fn quotient_field(&self, st: &QuotientState) -> Result<Tangent> {
        let p = st.point;
        if self.teleport_regime() {
            if self.tongue_membership(&p)?.is_some() {
                return Err(PlugError::Domain(
                    "state inside an excised tongue; its class is carried by the box chart".into(),
                ));
            }
        } else if let Some((i, _)) = st.inside_insertion {
            if p.z.abs() < 2.0 - 1e-12 {
                return Err(PlugError::Domain(format!(
                    "state inside excised box D_{i} for t > 1"
                )));
            }
        }
        let (f, g) = homotopy_scalars_unchecked(
            &self.base.homotopy,
            &self.base.wilson.profile,
            self.t,
            p.z,
            p.theta,
            p.r,
        );
        Ok(Tangent::new(vec![
            (Coord::Z, g),
            (Coord::Theta, f),
            (Coord::R, 0.0),
        ]))
    }

    /// Precise tongue-interior test: backward Wilson flow from the point
    /// must reach the entry face within the transit time.
    pub fn tongue_membership(&self, p: &PointW3) -> Result<Option<(usize, f64, f64, f64)>> {
        for (k, tongue) in self.base.tongues.iter().enumerate() {
            let ins = &self.base.insertions[k];
            let margin = 0.04;
            let inside_bbox = p.z > tongue.z_min - margin
                && p.z < tongue.z_max + margin
                && p.r > tongue.r_min - margin
                && p.r < tongue.r_max + margin
                && tongue.arc_contains(p.theta, margin);
            if !inside_bbox {
                continue;
            }
            let back = BackwardFaceProbe {
                plug: &self.base.wilson,
                ins,
            };
            let cfg = IntegratorConfig {
                t_max: 4.0 + 0.05,
                ..Default::default()
            };
            let out = integrate(&back, &p.to_state(), &cfg);
            if out.terminal == Terminal::Exited {
                if let Some((theta, r)) =
                    ins.invert_face(self.t, out.end_state[0], out.end_state[1], out.end_state[2])
                {
                    // strictly interior in transit time
                    if out.end_time > 1e-9 && out.end_time < 4.0 - 1e-9 {
                        return Ok(Some((k + 1, out.end_time, theta, r)));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Normalize a seed to a canonical representative. Returns the state
    /// vector and an optional time-zero normalization event.
    pub fn canonical_seed(&self, p: PointW3) -> Result<(Vec<f64>, Option<(EventKind, PointW3)>)> {
        if self.teleport_regime() {
            if let Some((i, tau, theta, r)) = self.tongue_membership(&p)? {
                // σ_i^{-1}: the point sits at box height z = −2 + τ
                let st = vec![-2.0 + tau, theta, r];
                return Ok((st, Some((EventKind::TeleportDown(i), p))));
            }
            Ok((p.to_state().to_vec(), None))
        } else {
            if let Some(i) = self.base.in_box_rect(p.theta, p.r) {
                if p.z < 2.0 {
                    let ins = &self.base.insertions[i - 1];
                    let img = sigma(&self.base.wilson, ins, self.t, p.z, p.theta, p.r)?;
                    return Ok((img.to_state().to_vec(), Some((EventKind::TeleportUp(i), p))));
                }
            }
            Ok((p.to_state().to_vec(), None))
        }
    }

    /// Integrate one quotient orbit from a seed on or inside the plug.
    pub fn orbit(&self, seed: PointW3, cfg: &IntegratorConfig) -> Result<Trajectory<PointW3>> {
        let (state, pre) = self.canonical_seed(seed)?;
        let raw = integrate(self, &state, cfg);
        let mut events = Vec::with_capacity(raw.events.len() + 1);
        if let Some((kind, loc)) = pre {
            events.push(Event {
                kind,
                time: 0.0,
                location: loc,
            });
        }
        events.extend(raw.events.iter().map(|e| Event {
            kind: e.kind,
            time: e.time,
            location: PointW3::from_state(&e.state),
        }));
        let samples = raw
            .samples
            .iter()
            .map(|(t, s)| (*t, PointW3::from_state(s)))
            .collect();
        let terminal = match raw.terminal {
            Terminal::Exited
                if matches!(
                    raw.events.last().map(|e| e.kind),
                    Some(EventKind::HitTop) | Some(EventKind::HitBottom)
                ) =>
            {
                Terminal::Exited
            }
            Terminal::Exited => Terminal::Error,
            other => other,
        };
        Ok(Trajectory {
            samples,
            events,
            terminal,
        })
    }
}

/// Backward Wilson probe used for tongue membership: integrates −X_W and
/// stops on the entry face.
struct BackwardFaceProbe<'a> {
    plug: &'a Wilson3Plug,
    ins: &'a InsertionSpec,
}

impl FlowSystem for BackwardFaceProbe<'_> {
    fn dim(&self) -> usize {
        3
    }
    fn field(&self, y: &[f64], dy: &mut [f64]) {
        dy[0] = -self.plug.profile.g(y[0], y[2]);
        dy[1] = -self.plug.profile.f(y[0], y[2]);
        dy[2] = 0.0;
    }
    fn n_faces(&self) -> usize {
        1
    }
    fn face_value(&self, _k: usize, y: &[f64]) -> f64 {
        self.ins.face_offset(y[0], y[1], y[2])
    }
    fn face_dir(&self, _k: usize) -> FaceDir {
        FaceDir::Rising
    }
    fn face_action(&self, _k: usize, y: &[f64]) -> FaceAction {
        if self.ins.invert_face(0.0, y[0], y[1], y[2]).is_some() {
            FaceAction::Terminal(EventKind::HitLateral)
        } else {
            FaceAction::Ignore
        }
    }
}

impl FlowSystem for KuperbergFlow<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn field(&self, y: &[f64], dy: &mut [f64]) {
        let (f, g) = homotopy_scalars_unchecked(
            &self.base.homotopy,
            &self.base.wilson.profile,
            self.t,
            y[0],
            y[1],
            y[2],
        );
        dy[0] = g;
        dy[1] = f;
        dy[2] = 0.0;
    }

    fn n_faces(&self) -> usize {
        if self.teleport_regime() {
            // top, two sheet-offset faces, two band-center recovery planes
            5
        } else {
            1
        }
    }

    fn face_value(&self, k: usize, y: &[f64]) -> f64 {
        match k {
            0 => y[0] - 2.0,
            1 | 2 => self.base.insertions[k - 1].face_offset(y[0], y[1], y[2]),
            i => angle_signed(y[1], self.base.insertions[i - 3].face_angle).sin(),
        }
    }

    fn face_dir(&self, k: usize) -> FaceDir {
        match k {
            0 => FaceDir::Rising,
            // the sheet offset is positive below the face and crossings
            // happen downward for both insertions
            1 | 2 => FaceDir::Falling,
            // the center plane is crossed in the flow's angular direction
            i => {
                if self.base.insertions[i - 3].flow_sign() < 0.0 {
                    FaceDir::Falling
                } else {
                    FaceDir::Rising
                }
            }
        }
    }

    fn face_action(&self, k: usize, y: &[f64]) -> FaceAction {
        match k {
            0 => {
                let theta = normalize_angle(y[1]);
                let r = y[2];
                if self.teleport_regime() {
                    if let Some(i) = self.base.in_box_rect_with_slack(theta, r, 1e-7) {
                        let ins = &self.base.insertions[i - 1];
                        let thc = clamp_to_sector(theta, ins);
                        let rc = r.clamp(ins.r_lo, ins.r_hi);
                        return match sigma(&self.base.wilson, ins, self.t, 2.0, thc, rc) {
                            Ok(img) => FaceAction::Teleport {
                                state: img.to_state().to_vec(),
                                kind: EventKind::ExitInsertion(i),
                            },
                            Err(_) => FaceAction::Terminal(EventKind::HitLateral),
                        };
                    }
                }
                FaceAction::Terminal(EventKind::HitTop)
            }
            1 | 2 => {
                let ins = &self.base.insertions[k - 1];
                match ins.invert_face(self.t, y[0], y[1], y[2]) {
                    Some((theta, r)) => FaceAction::Teleport {
                        state: vec![-2.0, theta, r],
                        kind: EventKind::EnterInsertion(k),
                    },
                    None => FaceAction::Ignore,
                }
            }
            i => {
                // safety net: reaching the band center above the sheet
                // bottom means the sheet crossing earlier in this passage
                // was a graze the sign sampling missed; recover it exactly
                let idx = i - 2;
                let ins = &self.base.insertions[idx - 1];
                let Some(hit) = ins.recover_crossing(y[0], y[2]) else {
                    return FaceAction::Ignore;
                };
                match ins.invert_face(self.t, hit.z, hit.theta, hit.r) {
                    Some((theta, r)) => FaceAction::Teleport {
                        state: vec![-2.0, theta, r],
                        kind: EventKind::EnterInsertion(idx),
                    },
                    None => FaceAction::Ignore,
                }
            }
        }
    }

    fn renormalize(&self, y: &mut [f64]) {
        y[1] = normalize_angle(y[1]);
    }
}

impl KuperbergPlug {
    fn in_box_rect_with_slack(&self, theta: f64, r: f64, slack: f64) -> Option<usize> {
        self.insertions
            .iter()
            .position(|ins| {
                angle_signed(theta, ins.theta_center).abs() <= ins.theta_halfwidth + slack
                    && r >= ins.r_lo - slack
                    && r <= ins.r_hi + slack
            })
            .map(|k| k + 1)
    }
}

fn clamp_to_sector(theta: f64, ins: &InsertionSpec) -> f64 {
    let d = angle_signed(theta, ins.theta_center).clamp(-ins.theta_halfwidth, ins.theta_halfwidth);
    normalize_angle(ins.theta_center + d)
}

/// Apply a single crossing to a quotient state: the executable content of
/// the identification σ_i. Terminal crossings have no successor state.
pub fn step_transition(
    flow: &KuperbergFlow<'_>,
    _st: &QuotientState,
    crossing: &Event<PointW3>,
) -> Result<Option<QuotientState>> {
    match crossing.kind {
        EventKind::EnterInsertion(i) => {
            let ins = &flow.base.insertions[i - 1];
            let loc = crossing.location;
            let (theta, r) = ins
                .invert_face(flow.t, loc.z, loc.theta, loc.r)
                .ok_or_else(|| {
                    PlugError::Geometry(format!(
                        "entry crossing is not on the face of insertion {i}"
                    ))
                })?;
            let point = PointW3::new(-2.0, theta, r)?;
            Ok(Some(QuotientState {
                point,
                inside_insertion: Some((i, point)),
            }))
        }
        EventKind::ExitInsertion(i) | EventKind::TeleportUp(i) => {
            let ins = &flow.base.insertions[i - 1];
            let loc = crossing.location;
            if !ins.contains(loc.theta, loc.r) {
                return Err(PlugError::Geometry(format!(
                    "exit crossing not in L_{i}: ({}, {})",
                    loc.theta, loc.r
                )));
            }
            let img = sigma(&flow.base.wilson, ins, flow.t, 2.0, loc.theta, loc.r)?;
            Ok(Some(QuotientState::new(flow.base, img)))
        }
        EventKind::TeleportDown(i) => {
            let ins = &flow.base.insertions[i - 1];
            let loc = crossing.location;
            let (theta, r) = ins
                .invert_face(flow.t, loc.z, loc.theta, loc.r)
                .ok_or_else(|| PlugError::Geometry("teleport-down off the face".into()))?;
            let point = PointW3::new(-2.0, theta, r)?;
            Ok(Some(QuotientState {
                point,
                inside_insertion: Some((i, point)),
            }))
        }
        EventKind::HitTop | EventKind::HitBottom => Ok(None),
        EventKind::HitLateral => Err(PlugError::Geometry(
            "lateral crossing of an insertion box: geometry invalid".into(),
        )),
    }
}

/// The entry/exit bookkeeping of an orbit: crossing lists per insertion, the
/// merged ordered list, and the running level ν = #entries − #exits.
#[derive(Clone, Debug, Serialize)]
pub struct LevelLog {
    pub entries: [Vec<(f64, PointW3)>; 2],
    pub exits: [Vec<(f64, PointW3)>; 2],
    pub merged: Vec<(f64, EventKind)>,
    pub nu: Vec<i64>,
}

impl LevelLog {
    pub fn max_nu(&self) -> i64 {
        self.nu.iter().copied().max().unwrap_or(0)
    }

    /// ν at each crossing recomputed from the four lists must reproduce the
    /// stored sequence.
    pub fn consistent(&self) -> bool {
        let mut recomputed = Vec::new();
        let mut nu = 0i64;
        for (_, kind) in &self.merged {
            match kind {
                EventKind::EnterInsertion(_) => nu += 1,
                EventKind::ExitInsertion(_) => nu -= 1,
                _ => {}
            }
            recomputed.push(nu);
        }
        recomputed == self.nu
    }
}

/// Reconstruct the level log from a trajectory's events.
pub fn level_function(traj: &Trajectory<PointW3>) -> LevelLog {
    let mut log = LevelLog {
        entries: [Vec::new(), Vec::new()],
        exits: [Vec::new(), Vec::new()],
        merged: Vec::new(),
        nu: Vec::new(),
    };
    let mut nu = 0i64;
    for e in &traj.events {
        match e.kind {
            EventKind::EnterInsertion(i) => {
                log.entries[i - 1].push((e.time, e.location));
                nu += 1;
                log.merged.push((e.time, e.kind));
                log.nu.push(nu);
            }
            EventKind::ExitInsertion(i) => {
                log.exits[i - 1].push((e.time, e.location));
                nu -= 1;
                log.merged.push((e.time, e.kind));
                log.nu.push(nu);
            }
            _ => {}
        }
    }
    log
}

/// The parametric plug on K × D^l: on each slice {y = y₀} the field is the
/// quotient field at homotopy parameter η_s(|y₀|), with no ∂_y components.
#[derive(Clone, Debug, Serialize)]
pub struct ParametricKuperberg {
    pub plug: KuperbergPlug,
    pub eta: EtaProfile,
    /// Dimension of the parameter disc.
    pub l: usize,
}

impl ParametricKuperberg {
    pub fn new(plug: KuperbergPlug, eta: EtaProfile, l: usize) -> Self {
        ParametricKuperberg { plug, eta, l }
    }

    pub fn t_at(&self, s: f64, y: &[f64]) -> Result<f64> {
        if y.len() != self.l {
            return Err(PlugError::Schema(format!(
                "parameter point has dimension {} but l = {}",
                y.len(),
                self.l
            )));
        }
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1.0 {
            return Err(PlugError::Domain(format!("|y| = {norm} exceeds 1")));
        }
        self.eta.value(s, norm)
    }

    /// Evaluate the foliated field at (state, y): exactly the quotient field
    /// at t = η_s(|y|), with explicit zero y-components appended.
    pub fn parametric_field(&self, s: f64, st: &QuotientState, y: &[f64]) -> Result<Tangent> {
        let t = self.t_at(s, y)?;
        let flow = self.plug.flow(t)?;
        let base = flow.quotient_field(st)?;
        let mut comps = base.components().to_vec();
        comps.extend((0..self.l).map(|i| (Coord::Y(i as u8), 0.0)));
        Ok(Tangent::new(comps))
    }
}

/// Convert a raw kuperberg trajectory into typed form (used by scans that
/// need the level log).
pub fn typed_events(raw: &RawTrajectory) -> Vec<Event<PointW3>> {
    raw.events
        .iter()
        .map(|e| Event {
            kind: e.kind,
            time: e.time,
            location: PointW3::from_state(&e.state),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::TAU;

    fn standard() -> KuperbergPlug {
        KuperbergPlug::standard().expect("standard Kuperberg geometry")
    }

    #[test]
    fn standard_geometry_builds() {
        let k = standard();
        assert!(k.tongues[0].z_max < 0.0);
        assert!(k.tongues[1].z_min > 0.0);
    }

    #[test]
    fn quotient_field_cases() {
        let k = standard();
        // far from the insertions at t = 0: the Wilson field
        let flow = k.flow(0.0).unwrap();
        let p = PointW3::new(0.0, 0.3, 1.2).unwrap();
        let st = QuotientState::new(&k, p);
        let v = flow.quotient_field(&st).unwrap();
        let w = k.wilson.field(p).unwrap();
        assert_eq!(v, w);
        // t = 2 anywhere: vertical
        let flow2 = k.flow(2.0).unwrap();
        let v2 = flow2.quotient_field(&st).unwrap();
        assert_eq!(v2.component(Coord::Z), 1.0);
        assert_eq!(v2.component(Coord::Theta), 0.0);
        // t = 1 inside a box sector: vertical (the gate is fully open)
        let flow1 = k.flow(1.0).unwrap();
        let pb = PointW3::new(2.0, k.insertions[0].theta_center, 2.0).unwrap();
        let stb = QuotientState::new(&k, pb);
        let v1 = flow1.quotient_field(&stb).unwrap();
        assert_eq!(v1.component(Coord::Z), 1.0);
        assert_eq!(v1.component(Coord::Theta), 0.0);
    }

    #[test]
    fn quotient_field_rejects_excised_states() {
        let k = standard();
        let flow = k.flow(0.0).unwrap();
        // a tube midpoint strictly inside tongue 1, off the equality orbit
        let ins = &k.insertions[0];
        let mid = sigma(&k.wilson, ins, 0.0, 0.0, ins.theta_center + 0.1, 2.2).unwrap();
        let st = QuotientState::new(&k, mid);
        assert!(flow.quotient_field(&st).is_err());
    }

    #[test]
    fn trivial_orbit_passes_straight_through() {
        // a radius in the collar: f = 0, g = 1, no insertions in the way
        let k = standard();
        let flow = k.flow(0.0).unwrap();
        let cfg = IntegratorConfig::with_horizon(100.0);
        let traj = flow
            .orbit(PointW3::new(-2.0, k.insertions[0].theta_center + TAU / 2.0, 2.9).unwrap(), &cfg)
            .unwrap();
        assert_eq!(traj.terminal, Terminal::Exited);
        let exit = traj.exit_location().unwrap();
        // event placement: |face value| ≤ event_tol at the located crossing
        assert!((exit.z - 2.0).abs() <= 1e-8);
        assert!(traj.events.iter().all(|e| matches!(e.kind, EventKind::HitTop)));
        traj.validate().unwrap();
    }

    #[test]
    fn gamma_seed_enters_insertion() {
        let k = standard();
        let flow = k.flow(0.0).unwrap();
        let cfg = IntegratorConfig::with_horizon(50.0);
        // start on γ1 away from the tongues
        let seed = PointW3::new(-1.0, k.insertions[0].theta_center, 2.0).unwrap();
        let traj = flow.orbit(seed, &cfg).unwrap();
        assert!(
            traj.events
                .iter()
                .any(|e| matches!(e.kind, EventKind::EnterInsertion(1))),
            "events: {:?}",
            traj.events.iter().map(|e| e.kind).collect::<Vec<_>>()
        );
        traj.validate().unwrap();
    }

    #[test]
    fn step_transition_roundtrip() {
        let k = standard();
        let flow = k.flow(0.0).unwrap();
        let ins = &k.insertions[0];
        // a point on the entry face
        let th = ins.theta_center + 0.1;
        let r = 2.2;
        let face_pt = ins.entry_point(0.0, th, r).unwrap();
        let st = QuotientState::new(&k, face_pt);
        let ev = Event {
            kind: EventKind::EnterInsertion(1),
            time: 1.0,
            location: face_pt,
        };
        let new_st = step_transition(&flow, &st, &ev).unwrap().unwrap();
        assert_eq!(new_st.point.z, -2.0);
        assert!(angle_signed(new_st.point.theta, th).abs() < 1e-9);
        assert!((new_st.point.r - r).abs() < 1e-9);
        assert_eq!(new_st.inside_insertion.map(|(i, _)| i), Some(1));

        // box-top exit teleports onto the tongue's exit face
        let top = PointW3::new(2.0, th, r).unwrap();
        let ev2 = Event {
            kind: EventKind::ExitInsertion(1),
            time: 2.0,
            location: top,
        };
        let out = step_transition(&flow, &new_st, &ev2).unwrap().unwrap();
        let want = sigma(&k.wilson, ins, 0.0, 2.0, th, r).unwrap();
        assert!(crate::geom::point_distance(&out.point.view(), &want.view()).unwrap() < 1e-12);

        // terminal crossings have no successor
        let ev3 = Event {
            kind: EventKind::HitTop,
            time: 3.0,
            location: top,
        };
        assert!(step_transition(&flow, &out, &ev3).unwrap().is_none());
    }

    #[test]
    fn level_log_consistency() {
        let k = standard();
        let flow = k.flow(0.5).unwrap();
        let cfg = IntegratorConfig::with_horizon(4000.0);
        // a seed near the γ radius so the orbit threads the insertions
        let seed = PointW3::new(-2.0, k.insertions[0].theta_center + 2.0, 1.97).unwrap();
        let traj = flow.orbit(seed, &cfg).unwrap();
        let log = level_function(&traj);
        assert!(log.consistent());
        if !log.merged.is_empty() {
            assert!(log.max_nu() >= 1);
        }
        // an orbit with no crossings has an empty log and ν ≡ 0
        let quiet = flow
            .orbit(PointW3::new(-2.0, k.insertions[0].theta_center + 2.0, 2.9).unwrap(), &cfg)
            .unwrap();
        let qlog = level_function(&quiet);
        assert!(qlog.merged.is_empty());
        assert_eq!(qlog.max_nu(), 0);
    }

    #[test]
    fn parametric_field_matches_quotient_path() {
        let k = standard();
        let par = ParametricKuperberg::new(k, EtaProfile::default(), 2);
        let p = PointW3::new(0.4, 0.2, 1.3).unwrap();
        let st = QuotientState::new(&par.plug, p);
        // s = 0, |y| ≤ 1/2: t = 0 exactly, bit-identical to the quotient field
        let v = par.parametric_field(0.0, &st, &[0.3, 0.0]).unwrap();
        let flow0 = par.plug.flow(0.0).unwrap();
        let q = flow0.quotient_field(&st).unwrap();
        for (c, val) in q.components() {
            assert_eq!(v.component(*c), *val);
        }
        assert_eq!(v.component(Coord::Y(0)), 0.0);
        assert_eq!(v.component(Coord::Y(1)), 0.0);
        // s = 1: vertical everywhere
        let v1 = par.parametric_field(1.0, &st, &[0.1, 0.1]).unwrap();
        assert_eq!(v1.component(Coord::Z), 1.0);
        assert_eq!(v1.component(Coord::Theta), 0.0);
        // |y| > 1 rejected
        assert!(par.parametric_field(0.0, &st, &[1.2, 0.0]).is_err());
    }
}
