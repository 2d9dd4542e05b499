//! Orbit sweeps: exit matching, closed-orbit recurrence scans with shooting
//! refinement, and trapped-set scans. Sweeps parallelize over seeds with the
//! reduction in seed-index order, so the output is identical for any thread
//! count.

use super::dopri::{integrate, FlowSystem, IntegratorConfig, RawTrajectory};
use super::shooting::{shoot_periodic, ShootResult};
use crate::geom::{angle_signed, EventKind, Terminal};
use rayon::prelude::*;
use serde::Serialize;

/// The per-seed outcome of any sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Exited,
    Trapped,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedRow {
    pub seed: Vec<f64>,
    pub outcome: Outcome,
    pub end_time: f64,
    pub exit_state: Option<Vec<f64>>,
    /// Distance between the transverse coordinates at entry and exit.
    pub mismatch: Option<f64>,
    pub max_nu: i64,
    pub events: usize,
    pub steps: u64,
    /// Closest recurrence seen after the transient (closed-orbit scans).
    pub closest_return: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedOrbitCandidate {
    pub seed_index: usize,
    pub state: Vec<f64>,
    pub period: f64,
    pub return_distance: f64,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCensus {
    pub rows: Vec<SeedRow>,
    pub total: usize,
    pub exited: usize,
    pub trapped: usize,
    pub errors: usize,
    pub max_mismatch: f64,
    pub max_nu: i64,
    pub candidates: Vec<ClosedOrbitCandidate>,
}

impl OrbitCensus {
    fn from_rows(rows: Vec<SeedRow>, candidates: Vec<ClosedOrbitCandidate>) -> Self {
        let total = rows.len();
        let exited = rows.iter().filter(|r| r.outcome == Outcome::Exited).count();
        let trapped = rows.iter().filter(|r| r.outcome == Outcome::Trapped).count();
        let errors = rows.iter().filter(|r| r.outcome == Outcome::Error).count();
        let max_mismatch = rows
            .iter()
            .filter_map(|r| r.mismatch)
            .fold(0.0f64, f64::max);
        let max_nu = rows.iter().map(|r| r.max_nu).max().unwrap_or(0);
        OrbitCensus {
            rows,
            total,
            exited,
            trapped,
            errors,
            max_mismatch,
            max_nu,
            candidates,
        }
    }

    /// Census conservation: exited + trapped + error = total.
    pub fn conserved(&self) -> bool {
        self.exited + self.trapped + self.errors == self.total
    }

    /// One row per seed. Stable, diff-able; no wall-clock content.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed;outcome;end_time;exit;mismatch;max_nu;events;steps\n");
        for r in &self.rows {
            let seed = r
                .seed
                .iter()
                .map(|v| format!("{v:.12}"))
                .collect::<Vec<_>>()
                .join(",");
            let exit = r
                .exit_state
                .as_ref()
                .map(|e| {
                    e.iter()
                        .map(|v| format!("{v:.12}"))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .unwrap_or_default();
            s.push_str(&format!(
                "{seed};{:?};{:.9};{exit};{};{};{};{}\n",
                r.outcome,
                r.end_time,
                r.mismatch.map(|m| format!("{m:.3e}")).unwrap_or_default(),
                r.max_nu,
                r.events,
                r.steps
            ));
        }
        s
    }
}

/// Running max of the level function ν = #entries − #exits along the event log.
pub fn max_level(events: &[(EventKind, f64)]) -> i64 {
    let mut nu = 0i64;
    let mut max = 0i64;
    for (kind, _) in events {
        match kind {
            EventKind::EnterInsertion(_) => nu += 1,
            EventKind::ExitInsertion(_) => nu -= 1,
            _ => {}
        }
        max = max.max(nu);
    }
    max
}

fn transverse_mismatch(seed: &[f64], exit: &[f64], angle_mask: &[bool]) -> f64 {
    // skip coordinate 0 (the flow direction z)
    let mut m = 0.0f64;
    for i in 1..seed.len() {
        let d = if angle_mask[i] {
            angle_signed(exit[i], seed[i]).abs()
        } else {
            (exit[i] - seed[i]).abs()
        };
        m = m.max(d);
    }
    m
}

fn row_from_raw(seed: &[f64], out: &RawTrajectory, angle_mask: &[bool], want_mismatch: bool) -> SeedRow {
    let ev: Vec<(EventKind, f64)> = out.events.iter().map(|e| (e.kind, e.time)).collect();
    let outcome = match out.terminal {
        // a lateral hit marks a geometry fault, not a legitimate exit
        Terminal::Exited
            if matches!(
                out.events.last().map(|e| e.kind),
                Some(EventKind::HitTop) | Some(EventKind::HitBottom)
            ) =>
        {
            Outcome::Exited
        }
        Terminal::Exited => Outcome::Error,
        Terminal::TimeHorizon => Outcome::Trapped,
        Terminal::Error => Outcome::Error,
    };
    let exit_state = (outcome == Outcome::Exited).then(|| out.end_state.clone());
    let mismatch = match (&exit_state, want_mismatch) {
        (Some(e), true) => Some(transverse_mismatch(seed, e, angle_mask)),
        _ => None,
    };
    SeedRow {
        seed: seed.to_vec(),
        outcome,
        end_time: out.end_time,
        exit_state,
        mismatch,
        max_nu: max_level(&ev),
        events: out.events.len(),
        steps: out.steps,
        closest_return: None,
    }
}

/// Integrate every seed and compare exit against entry on the transverse
/// coordinates (the mirror property).
pub fn exit_match_scan<F: FlowSystem + ?Sized>(
    flow: &F,
    seeds: &[Vec<f64>],
    angle_mask: &[bool],
    cfg: &IntegratorConfig,
) -> OrbitCensus {
    let rows: Vec<SeedRow> = seeds
        .par_iter()
        .map(|seed| {
            let out = integrate(flow, seed, cfg);
            row_from_raw(seed, &out, angle_mask, true)
        })
        .collect();
    OrbitCensus::from_rows(rows, vec![])
}

/// Integrate every seed to the horizon (or exit) and report which are
/// trapped. "Trapped" always means trapped-by-horizon.
pub fn trapped_scan<F: FlowSystem + ?Sized>(
    flow: &F,
    seeds: &[Vec<f64>],
    angle_mask: &[bool],
    cfg: &IntegratorConfig,
) -> OrbitCensus {
    let rows: Vec<SeedRow> = seeds
        .par_iter()
        .map(|seed| {
            let out = integrate(flow, seed, cfg);
            row_from_raw(seed, &out, angle_mask, false)
        })
        .collect();
    OrbitCensus::from_rows(rows, vec![])
}

#[derive(Clone, Copy, Debug)]
pub struct RecurrenceConfig {
    /// Ignore returns before this time.
    pub transient: f64,
    /// Candidate threshold on the closest return distance.
    pub recurrence_tol: f64,
    /// Residual required of a converged shooting correction.
    pub shoot_tol: f64,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        RecurrenceConfig {
            transient: 0.5,
            recurrence_tol: 1e-4,
            shoot_tol: 1e-9,
        }
    }
}

fn state_distance(a: &[f64], b: &[f64], angle_mask: &[bool]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.len() {
        let d = if angle_mask[i] {
            angle_signed(a[i], b[i]).abs()
        } else {
            (a[i] - b[i]).abs()
        };
        m = m.max(d);
    }
    m
}

/// Track the closest return of each seed's orbit to its start (through the
/// section normal to the field at the seed), then refine candidates below
/// the recurrence tolerance by period shooting.
pub fn closed_orbit_scan<F: FlowSystem + ?Sized>(
    flow: &F,
    seeds: &[Vec<f64>],
    angle_mask: &[bool],
    cfg: &IntegratorConfig,
    rc: &RecurrenceConfig,
) -> OrbitCensus {
    let d = flow.dim();
    let results: Vec<(SeedRow, Option<ClosedOrbitCandidate>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(idx, seed)| {
            let scan_cfg = IntegratorConfig {
                sample_stride: 1,
                ..*cfg
            };
            let out = integrate(flow, seed, &scan_cfg);
            let mut row = row_from_raw(seed, &out, angle_mask, false);

            // section normal: field direction at the seed
            let mut n = vec![0.0; d];
            flow.field(seed, &mut n);
            let nn: f64 = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut best: Option<(f64, f64, Vec<f64>)> = None; // (dist, time, state)
            if nn > 1e-12 {
                for v in n.iter_mut() {
                    *v /= nn;
                }
                // section offset h(x) = <x - seed, n>, with angle coords wrapped
                let hval = |x: &[f64]| -> f64 {
                    (0..d)
                        .map(|i| {
                            let di = if angle_mask[i] {
                                angle_signed(x[i], seed[i])
                            } else {
                                x[i] - seed[i]
                            };
                            di * n[i]
                        })
                        .sum()
                };
                let event_times: Vec<f64> = out.events.iter().map(|e| e.time).collect();
                let mut prev: Option<(f64, f64, &[f64])> = None;
                for (t, x) in &out.samples {
                    if let Some((tp, hp, xp)) = prev {
                        // skip pairs that straddle a teleport
                        let crosses_event = event_times
                            .iter()
                            .any(|&te| te > tp && te <= *t && (te - *t).abs() > 1e-15);
                        let h = hval(x);
                        if !crosses_event && *t > rc.transient && hp < 0.0 && h >= 0.0 {
                            let w = -hp / (h - hp);
                            let xc: Vec<f64> =
                                (0..d).map(|i| xp[i] + w * (x[i] - xp[i])).collect();
                            let tc = tp + w * (t - tp);
                            let dist = state_distance(&xc, seed, angle_mask);
                            if best.as_ref().map_or(true, |(bd, _, _)| dist < *bd) {
                                best = Some((dist, tc, xc));
                            }
                        }
                        prev = Some((*t, h, x));
                    } else {
                        prev = Some((*t, hval(x), x));
                    }
                }
            }

            row.closest_return = best.as_ref().map(|(d, _, _)| *d);
            let mut cand = None;
            if let Some((dist, period, xc)) = best {
                if dist < rc.recurrence_tol {
                    let shot: ShootResult =
                        shoot_periodic(flow, &xc, period, angle_mask, cfg, rc.shoot_tol);
                    cand = Some(ClosedOrbitCandidate {
                        seed_index: idx,
                        state: shot.state,
                        period: shot.period,
                        return_distance: dist,
                        residual: shot.residual,
                        converged: shot.converged,
                    });
                }
            }
            (row, cand)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut candidates = Vec::new();
    for (row, cand) in results {
        rows.push(row);
        if let Some(c) = cand {
            candidates.push(c);
        }
    }
    OrbitCensus::from_rows(rows, candidates)
}

/// Group converged candidates into distinct orbits: two candidates are the
/// same orbit when their periods agree and one's point lies on the other's
/// orbit (sampled over one period).
pub fn distinct_orbits<F: FlowSystem + ?Sized>(
    flow: &F,
    candidates: &[ClosedOrbitCandidate],
    angle_mask: &[bool],
    cfg: &IntegratorConfig,
    merge_tol: f64,
) -> Vec<ClosedOrbitCandidate> {
    let mut reps: Vec<(ClosedOrbitCandidate, Vec<Vec<f64>>)> = Vec::new();
    for c in candidates.iter().filter(|c| c.converged) {
        let mut matched = false;
        for (rep, orbit) in &reps {
            if (rep.period - c.period).abs() < 1e-3 * rep.period.max(1.0) {
                let mind = orbit
                    .iter()
                    .map(|x| state_distance(x, &c.state, angle_mask))
                    .fold(f64::INFINITY, f64::min);
                if mind < merge_tol {
                    matched = true;
                    break;
                }
            }
        }
        if !matched {
            // sample the orbit over one period, densely enough that the
            // sample spacing sits below the merge tolerance
            let sample_cfg = IntegratorConfig {
                t_max: c.period,
                sample_stride: 1,
                max_step: (merge_tol * 0.5).min(cfg.max_step),
                ..*cfg
            };
            let out = integrate(flow, &c.state, &sample_cfg);
            let orbit: Vec<Vec<f64>> = out.samples.into_iter().map(|(_, x)| x).collect();
            reps.push((c.clone(), orbit));
        }
    }
    reps.into_iter().map(|(c, _)| c).collect()
}
