//! Named verification suites for the plug properties, with machine-readable
//! reports. The acceptance tests and the CLI `verify` command both run these.

use crate::geom::{PointW3, TolerancePolicy};
use crate::insertion::GAMMA_R;
use crate::integrate::{
    closed_orbit_scan, distinct_orbits, exit_match_scan, trapped_scan, IntegratorConfig, Outcome,
    RecurrenceConfig,
};
use crate::kuperberg::{KuperbergPlug, ParametricKuperberg, QuotientState};
use crate::profiles::HomotopyProfile;
use crate::wilson::{Wilson3Flow, Wilson3Plug, WilsonNdFlow, WilsonNdPlug};
use crate::{PlugError, Result};
use serde::Serialize;

/// One named check with its measured value and threshold.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, pass: bool, measured: f64, threshold: f64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            measured,
            threshold,
            detail,
        }
    }
}

/// Report of a verification suite: pass iff every check passes.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub tolerances: TolerancePolicy,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, tol: TolerancePolicy, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport {
            suite: suite.into(),
            tolerances: tol,
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Which plug a suite runs against.
pub enum PlugKind<'a> {
    Wilson3(&'a Wilson3Plug),
    WilsonNd(&'a WilsonNdPlug),
    Kuperberg(&'a KuperbergPlug, f64),
    Parametric(&'a ParametricKuperberg, f64),
}

/// Cell-centered annulus grid on {z = −2}, optionally excluding a radial band.
pub fn annulus_grid(n_theta: usize, n_r: usize, exclude_r: Option<(f64, f64)>) -> Vec<Vec<f64>> {
    let mut seeds = Vec::new();
    for k in 0..n_theta {
        let th = crate::geom::TAU * (k as f64 + 0.5) / n_theta as f64;
        for j in 0..n_r {
            let r = 1.0 + 2.0 * (j as f64 + 0.5) / n_r as f64;
            if let Some((lo, hi)) = exclude_r {
                if r > lo && r < hi {
                    continue;
                }
            }
            seeds.push(vec![-2.0, th, r]);
        }
    }
    seeds
}

/// Property (i): the deactivation homotopy stays non-vanishing (and, for the
/// foliated families, has no y-components by construction).
pub fn property_i(plug: &PlugKind, tol: TolerancePolicy) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    match plug {
        PlugKind::Wilson3(w) => {
            let hp = HomotopyProfile::default();
            let mut min_norm = f64::INFINITY;
            for it in 0..=16 {
                let t = 2.0 * it as f64 / 16.0;
                for iz in 0..=40 {
                    let z = -2.0 + 4.0 * iz as f64 / 40.0;
                    for ith in 0..48 {
                        let th = crate::geom::TAU * ith as f64 / 48.0;
                        for ir in 0..=20 {
                            let r = 1.0 + 2.0 * ir as f64 / 20.0;
                            let v = w.homotopy_field(&hp, t, PointW3::new(z, th, r)?)?;
                            min_norm = min_norm.min(v.norm());
                        }
                    }
                }
            }
            checks.push(CheckResult::new(
                "homotopy-nonvanishing",
                min_norm > 0.0,
                min_norm,
                0.0,
                "min field norm over (t, z, θ, r) grid".into(),
            ));
        }
        PlugKind::WilsonNd(w) => {
            let mut min_norm = f64::INFINITY;
            let mut max_y_comp = 0.0f64;
            for it in 0..=10 {
                let t = it as f64 / 10.0;
                for iz in 0..=40 {
                    let z = -2.0 + 4.0 * iz as f64 / 40.0;
                    for ir in 0..=10 {
                        let r = -2.0 + 4.0 * ir as f64 / 10.0;
                        for ym in [0.0, 0.4, 0.9] {
                            let p = crate::geom::PointWNd::new(
                                z,
                                0.3,
                                0.9,
                                r,
                                vec![0.0; w.n() - 4],
                                std::iter::once(ym)
                                    .chain(std::iter::repeat(0.0))
                                    .take(w.l())
                                    .collect(),
                            )?;
                            let v = w.homotopy_field(t, &p)?;
                            min_norm = min_norm.min(v.norm());
                            for (c, val) in v.components() {
                                if matches!(c, crate::Coord::Y(_)) {
                                    max_y_comp = max_y_comp.max(val.abs());
                                }
                            }
                        }
                    }
                }
            }
            checks.push(CheckResult::new(
                "homotopy-nonvanishing",
                min_norm > 0.0,
                min_norm,
                0.0,
                "min field norm over deactivation stages".into(),
            ));
            checks.push(CheckResult::new(
                "foliated-no-y-components",
                max_y_comp == 0.0,
                max_y_comp,
                0.0,
                "max |∂_y component| over samples".into(),
            ));
        }
        PlugKind::Kuperberg(k, _) => {
            let mut min_norm = f64::INFINITY;
            for it in 0..=16 {
                let t = 2.0 * it as f64 / 16.0;
                let flow = k.flow(t)?;
                for iz in 0..=40 {
                    let z = -2.0 + 4.0 * iz as f64 / 40.0;
                    for ith in 0..48 {
                        let th = crate::geom::TAU * ith as f64 / 48.0;
                        for ir in 0..=20 {
                            let r = 1.0 + 2.0 * ir as f64 / 20.0;
                            let mut dy = [0.0; 3];
                            use crate::integrate::FlowSystem;
                            flow.field(&[z, th, r], &mut dy);
                            let n = (dy[0] * dy[0] + dy[1] * dy[1]).sqrt();
                            min_norm = min_norm.min(n);
                        }
                    }
                }
            }
            checks.push(CheckResult::new(
                "homotopy-nonvanishing",
                min_norm > 0.0,
                min_norm,
                0.0,
                "min quotient field norm over (t, z, θ, r) grid".into(),
            ));
        }
        PlugKind::Parametric(par, s) => {
            let mut max_y_comp = 0.0f64;
            let mut min_norm = f64::INFINITY;
            let mut rng = DeterministicRng::new(0x5eed_cafe);
            for _ in 0..10_000 {
                let z = -2.0 + 4.0 * rng.next_f64();
                let th = crate::geom::TAU * rng.next_f64();
                let r = 1.0 + 2.0 * rng.next_f64();
                let ymag = rng.next_f64();
                let y: Vec<f64> = {
                    let mut v = vec![0.0; par.l];
                    if par.l > 0 {
                        v[0] = ymag;
                    }
                    v
                };
                let p = PointW3::new_clamped(z, th, r);
                // skip excised tongue interiors: sampled points there belong
                // to the box charts
                let flow = par.plug.flow(par.t_at(*s, &y)?)?;
                if flow.tongue_membership(&p)?.is_some() {
                    continue;
                }
                let st = QuotientState::new(&par.plug, p);
                let v = par.parametric_field(*s, &st, &y)?;
                min_norm = min_norm.min(v.norm());
                for (c, val) in v.components() {
                    if matches!(c, crate::Coord::Y(_)) {
                        max_y_comp = max_y_comp.max(val.abs());
                    }
                }
            }
            checks.push(CheckResult::new(
                "foliated-no-y-components",
                max_y_comp == 0.0,
                max_y_comp,
                0.0,
                "max |∂_y component| over 10^4 random samples".into(),
            ));
            checks.push(CheckResult::new(
                "parametric-nonvanishing",
                min_norm > 0.0,
                min_norm,
                0.0,
                "min field norm over random samples".into(),
            ));
        }
    }
    Ok(VerificationReport::new("property-i", tol, checks))
}

/// Property (ii): entering orbits that exit do so at the opposite point.
pub fn property_ii(plug: &PlugKind, tol: TolerancePolicy, quick: bool) -> Result<VerificationReport> {
    let scale = if quick { 4 } else { 1 };
    let mut checks = Vec::new();
    match plug {
        PlugKind::Wilson3(w) => {
            let seeds = annulus_grid(64 / scale, 64 / scale, Some((1.8, 2.2)));
            let flow = Wilson3Flow::base(w);
            let cfg = IntegratorConfig::with_horizon(1e4);
            let census = exit_match_scan(&flow, &seeds, &Wilson3Flow::angle_mask(), &cfg);
            checks.push(CheckResult::new(
                "all-exit",
                census.exited == census.total,
                census.exited as f64,
                census.total as f64,
                format!("{}/{} exited", census.exited, census.total),
            ));
            checks.push(CheckResult::new(
                "mirror-match",
                census.max_mismatch <= tol.match_tol,
                census.max_mismatch,
                tol.match_tol,
                "max entry/exit transverse mismatch".into(),
            ));
        }
        PlugKind::WilsonNd(w) => {
            let flow = WilsonNdFlow::base(w);
            let seeds = nd_entry_grid(w, 16 / scale.min(2), 16 / scale.min(2));
            let cfg = IntegratorConfig::with_horizon(1e4);
            let census = exit_match_scan(&flow, &seeds, &WilsonNdFlow::angle_mask(w), &cfg);
            let exited_ok = census
                .rows
                .iter()
                .filter(|r| r.outcome == Outcome::Exited)
                .all(|r| r.mismatch.unwrap_or(1.0) <= tol.match_tol);
            checks.push(CheckResult::new(
                "mirror-match-on-exiting",
                exited_ok,
                census.max_mismatch,
                tol.match_tol,
                format!("{} exited of {}", census.exited, census.total),
            ));
            checks.push(CheckResult::new(
                "census-conserved",
                census.conserved(),
                0.0,
                0.0,
                "exited + trapped + error = total".into(),
            ));
        }
        PlugKind::Kuperberg(k, t) => {
            if *t <= 0.0 {
                return Err(PlugError::Range(
                    "exit matching is a t > 0 property of the quotient plug".into(),
                ));
            }
            let flow = k.flow(*t)?;
            let seeds = k.entry_grid(32 / scale, 32 / scale);
            let cfg = IntegratorConfig::with_horizon(1e4);
            let census = exit_match_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg);
            checks.push(CheckResult::new(
                "all-exit",
                census.exited == census.total,
                census.exited as f64,
                census.total as f64,
                format!("{}/{} exited by horizon", census.exited, census.total),
            ));
            checks.push(CheckResult::new(
                "mirror-match",
                census.max_mismatch <= 1e-5,
                census.max_mismatch,
                1e-5,
                format!("max mismatch at t={t}"),
            ));
        }
        PlugKind::Parametric(par, s) => {
            for ymag in [0.6, 0.75, 0.9] {
                let y: Vec<f64> = {
                    let mut v = vec![0.0; par.l];
                    if par.l > 0 {
                        v[0] = ymag;
                    }
                    v
                };
                let t = par.t_at(*s, &y)?;
                let flow = par.plug.flow(t)?;
                let seeds = par.plug.entry_grid(32 / scale, 32 / scale);
                let cfg = IntegratorConfig::with_horizon(1e4);
                let census =
                    exit_match_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg);
                checks.push(CheckResult::new(
                    &format!("slice-|y|={ymag}-all-exit-matched"),
                    census.exited == census.total && census.max_mismatch <= 1e-5,
                    census.max_mismatch,
                    1e-5,
                    format!("t = η_s = {t:.4}; {}/{} exited", census.exited, census.total),
                ));
            }
        }
    }
    Ok(VerificationReport::new("property-ii", tol, checks))
}

fn nd_entry_grid(w: &WilsonNdPlug, n_r: usize, n_y: usize) -> Vec<Vec<f64>> {
    let dim = WilsonNdFlow::dim_of(w);
    let mut seeds = Vec::new();
    for i in 0..n_r {
        let r = -2.0 + 4.0 * (i as f64 + 0.5) / n_r as f64;
        for j in 0..n_y {
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / n_y as f64;
            let mut s = vec![0.0; dim];
            s[0] = -2.0;
            s[1] = 0.4;
            s[2] = 1.1;
            s[3] = r;
            if w.l() > 0 {
                s[4 + w.n() - 4] = y;
            }
            seeds.push(s);
        }
    }
    seeds
}

/// Property (iii): no closed orbits beyond the structural ones. For the
/// 3-D Wilson plug that means exactly the two circles γ_i; for the
/// Kuperberg and n-D plugs, none at all.
pub fn property_iii(plug: &PlugKind, tol: TolerancePolicy, quick: bool) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    match plug {
        PlugKind::Wilson3(w) => {
            let flow = Wilson3Flow::base(w);
            let mut seeds: Vec<Vec<f64>> = Vec::new();
            // the circles, near-misses, and a transversal spread
            for k in 0..8 {
                let th = crate::geom::TAU * k as f64 / 8.0;
                seeds.push(vec![-1.0, th, 2.0]);
                seeds.push(vec![1.0, th, 2.0]);
            }
            for dz in [-0.02, 0.02] {
                for dr in [-0.02, 0.02] {
                    seeds.push(vec![1.0 + dz, 0.0, 2.0 + dr]);
                    seeds.push(vec![-1.0 + dz, 0.0, 2.0 + dr]);
                }
            }
            for j in 0..16 {
                seeds.push(vec![0.0, 0.4, 1.05 + 1.9 * j as f64 / 15.0]);
            }
            let cfg = IntegratorConfig::with_horizon(if quick { 1e3 } else { 1e4 });
            let rc = RecurrenceConfig {
                recurrence_tol: tol.recurrence_tol,
                ..Default::default()
            };
            let census = closed_orbit_scan(&flow, &seeds, &Wilson3Flow::angle_mask(), &cfg, &rc);
            let orbits = distinct_orbits(&flow, &census.candidates, &Wilson3Flow::angle_mask(), &cfg, 1e-2);
            checks.push(CheckResult::new(
                "exactly-two-closed-orbits",
                orbits.len() == 2,
                orbits.len() as f64,
                2.0,
                format!(
                    "periods: {:?}",
                    orbits.iter().map(|o| o.period).collect::<Vec<_>>()
                ),
            ));
            for o in &orbits {
                checks.push(CheckResult::new(
                    &format!("orbit-at-z={:+.2}", o.state[0]),
                    (o.state[0].abs() - 1.0).abs() < 1e-6
                        && (o.state[2] - GAMMA_R).abs() < 1e-6
                        && (o.period - crate::geom::TAU).abs() < 1e-6
                        && o.residual < 1e-9,
                    o.period,
                    crate::geom::TAU,
                    format!("residual {:.2e}", o.residual),
                ));
            }
        }
        PlugKind::WilsonNd(w) => {
            let flow = WilsonNdFlow::base(w);
            let dim = WilsonNdFlow::dim_of(w);
            let mut seeds: Vec<Vec<f64>> = Vec::new();
            // invariant-torus region and a spread of entry points
            for k in 0..64 {
                let s_ang = crate::geom::TAU * (k % 8) as f64 / 8.0;
                let t_ang = crate::geom::TAU * (k / 8) as f64 / 8.0;
                for zs in [-1.0, 1.0] {
                    let mut s = vec![0.0; dim];
                    s[0] = zs;
                    s[1] = s_ang;
                    s[2] = t_ang;
                    seeds.push(s);
                }
            }
            for j in 0..128 {
                let mut s = vec![0.0; dim];
                s[0] = -2.0;
                s[1] = 0.3;
                s[2] = 0.9;
                s[3] = -2.0 + 4.0 * (j as f64 + 0.5) / 128.0;
                seeds.push(s);
            }
            let cfg = IntegratorConfig::with_horizon(if quick { 1e3 } else { 1e4 });
            let rc = RecurrenceConfig {
                recurrence_tol: tol.recurrence_tol,
                ..Default::default()
            };
            let census = closed_orbit_scan(&flow, &seeds, &WilsonNdFlow::angle_mask(w), &cfg, &rc);
            let surviving = census.candidates.iter().filter(|c| c.converged).count();
            checks.push(CheckResult::new(
                "no-closed-orbit-candidates",
                surviving == 0,
                surviving as f64,
                0.0,
                format!(
                    "{} raw candidates, {} converged",
                    census.candidates.len(),
                    surviving
                ),
            ));
        }
        PlugKind::Kuperberg(k, t) => {
            let flow = k.flow(*t)?;
            let mut seeds = k.entry_grid(24, 20);
            seeds.truncate(448);
            // seeds on the former Wilson circles
            let mut gamma_seeds = Vec::new();
            for j in 0..32 {
                let th = crate::geom::TAU * j as f64 / 32.0;
                gamma_seeds.push(vec![-1.0, th, GAMMA_R]);
                gamma_seeds.push(vec![1.0, th, GAMMA_R]);
            }
            seeds.extend(gamma_seeds.iter().cloned());
            let cfg = IntegratorConfig::with_horizon(if quick { 1e3 } else { 1e5 });
            let rc = RecurrenceConfig {
                recurrence_tol: tol.recurrence_tol,
                ..Default::default()
            };
            let census = closed_orbit_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg, &rc);
            let surviving = census.candidates.iter().filter(|c| c.converged).count();
            checks.push(CheckResult::new(
                "no-closed-orbit-candidates",
                surviving == 0,
                surviving as f64,
                0.0,
                format!(
                    "{} seeds, {} raw candidates, {} converged",
                    census.total,
                    census.candidates.len(),
                    surviving
                ),
            ));
            // the circles are broken: their orbits enter the insertions
            let gamma_rows: Vec<_> = census
                .rows
                .iter()
                .filter(|r| (r.seed[2] - GAMMA_R).abs() < 1e-12 && r.seed[0].abs() == 1.0)
                .collect();
            let all_enter = gamma_rows.iter().all(|r| r.max_nu >= 1 || r.events > 1);
            checks.push(CheckResult::new(
                "gamma-seeds-enter-insertions",
                !gamma_rows.is_empty() && all_enter,
                gamma_rows.len() as f64,
                0.0,
                "every former-circle seed produces an insertion entry".into(),
            ));
        }
        PlugKind::Parametric(..) => {
            return Err(PlugError::Range(
                "run property-iii against the kuperberg slices directly".into(),
            ))
        }
    }
    Ok(VerificationReport::new("property-iii", tol, checks))
}

/// Property (iv): the trapped set contains the expected region.
pub fn property_iv(plug: &PlugKind, tol: TolerancePolicy, quick: bool) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    match plug {
        PlugKind::Wilson3(w) => {
            let flow = Wilson3Flow::base(w);
            let horizon = if quick { 1e3 } else { 1e4 };
            let cfg = IntegratorConfig::with_horizon(horizon);
            // the r = 2 line is trapped
            let line: Vec<Vec<f64>> = (0..32)
                .map(|k| vec![-2.0, crate::geom::TAU * (k as f64 + 0.5) / 32.0, GAMMA_R])
                .collect();
            let census = trapped_scan(&flow, &line, &Wilson3Flow::angle_mask(), &cfg);
            checks.push(CheckResult::new(
                "r2-line-trapped",
                census.trapped == census.total,
                census.trapped as f64,
                census.total as f64,
                format!("horizon {horizon}"),
            ));
            // everything at |r − 2| ≥ 0.2 exits
            let away = annulus_grid(16, 26, Some((1.8, 2.2)));
            let census2 = trapped_scan(&flow, &away, &Wilson3Flow::angle_mask(), &cfg);
            checks.push(CheckResult::new(
                "away-band-exits",
                census2.exited == census2.total,
                census2.exited as f64,
                census2.total as f64,
                "all seeds with |r-2| >= 0.2 exit".into(),
            ));
        }
        PlugKind::WilsonNd(w) => {
            let flow = WilsonNdFlow::base(w);
            let dim = WilsonNdFlow::dim_of(w);
            let cfg = IntegratorConfig::with_horizon(if quick { 1e3 } else { 1e4 });
            let mut seeds = Vec::new();
            for j in 0..16 {
                let r = -0.9 + 1.8 * (j as f64 + 0.5) / 16.0;
                let mut s = vec![0.0; dim];
                s[0] = -2.0;
                s[3] = r;
                seeds.push(s);
            }
            let census = trapped_scan(&flow, &seeds, &WilsonNdFlow::angle_mask(w), &cfg);
            checks.push(CheckResult::new(
                "trapped-cylinder",
                census.trapped == census.total,
                census.trapped as f64,
                census.total as f64,
                "seeds in {|r|<=1, x=y=0} are trapped".into(),
            ));
        }
        PlugKind::Kuperberg(k, t) => {
            let flow = k.flow(*t)?;
            let horizon = if *t == 0.0 { 1e5 } else { 1e4 };
            let horizon = if quick { horizon / 10.0 } else { horizon };
            let cfg = IntegratorConfig::with_horizon(horizon);
            if *t == 0.0 {
                let (delta, tested, trapped_cells) = matsumoto_band(k, &cfg, quick)?;
                checks.push(CheckResult::new(
                    "matsumoto-band-trapped",
                    delta > 0.0,
                    delta,
                    0.0,
                    format!(
                        "empirical horizon-relative δ = {delta:.5} ({trapped_cells} contiguous trapped cells of {tested})"
                    ),
                ));
            } else {
                let seeds = k.entry_grid(32, 32);
                let census = trapped_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg);
                checks.push(CheckResult::new(
                    "all-exit-for-positive-t",
                    census.trapped == 0 && census.exited == census.total,
                    census.trapped as f64,
                    0.0,
                    format!("t={t}: {}/{} exited", census.exited, census.total),
                ));
            }
        }
        PlugKind::Parametric(par, _) => {
            // |y| ≤ 1/2 slices are the Kuperberg plug itself: same trapped set
            let k = &par.plug;
            let flow = k.flow(0.0)?;
            let cfg = IntegratorConfig::with_horizon(if quick { 1e4 } else { 1e5 });
            let seeds: Vec<Vec<f64>> = (0..16)
                .map(|j| {
                    vec![
                        -2.0,
                        k.insertions[0].theta_center + 2.5,
                        GAMMA_R - 0.002 - 0.01 * j as f64 / 16.0,
                    ]
                })
                .collect();
            let census = trapped_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg);
            checks.push(CheckResult::new(
                "central-slices-trap",
                census.trapped == census.total,
                census.trapped as f64,
                census.total as f64,
                "near-γ band trapped on the |y| ≤ 1/2 slices".into(),
            ));
        }
    }
    Ok(VerificationReport::new("property-iv", tol, checks))
}

/// Measure the trapped band below r = 2 for the Kuperberg plug at t = 0:
/// the largest contiguous run of trapped cells ending at r = 2, on a
/// 128-point radial refinement, across several entry angles.
pub fn matsumoto_band(
    k: &KuperbergPlug,
    cfg: &IntegratorConfig,
    quick: bool,
) -> Result<(f64, usize, usize)> {
    let flow = k.flow(0.0)?;
    let n_r = if quick { 32 } else { 128 };
    let band = 0.125;
    let thetas = [2.6, 5.2]
        .iter()
        .map(|d| k.insertions[0].theta_center + d)
        .collect::<Vec<_>>();
    let cell = band / n_r as f64;
    let mut min_run = usize::MAX;
    let mut tested = 0;
    for th in &thetas {
        let seeds: Vec<Vec<f64>> = (0..n_r)
            .map(|j| vec![-2.0, *th, GAMMA_R - cell * (j as f64 + 0.5)])
            .collect();
        tested += seeds.len();
        let census = trapped_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), cfg);
        // longest contiguous trapped run starting at the cell nearest r = 2
        let mut run = 0;
        for row in &census.rows {
            if row.outcome == Outcome::Trapped {
                run += 1;
            } else {
                break;
            }
        }
        min_run = min_run.min(run);
    }
    let delta = min_run as f64 * cell;
    Ok((delta, tested, min_run))
}

/// Small deterministic RNG for sampling checks (splitmix-style), so reports
/// are bit-identical across runs.
pub struct DeterministicRng(u64);

impl DeterministicRng {
    pub fn new(seed: u64) -> Self {
        DeterministicRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Level-function bound: at a positive homotopy parameter every tested orbit
/// exits with max ν below the certificate bound ceil((r_max − r_min)/ε).
pub fn level_bounds(k: &KuperbergPlug, t: f64, tol: TolerancePolicy, quick: bool) -> Result<VerificationReport> {
    if t <= 0.0 {
        return Err(PlugError::Range("level bound is a t > 0 statement".into()));
    }
    let certs = k.certificates(t, 128)?;
    let eps = certs[0].epsilon.min(certs[1].epsilon);
    let bound = ((3.0 - 1.0) / eps).ceil();
    let flow = k.flow(t)?;
    let scale = if quick { 4 } else { 1 };
    let seeds = k.entry_grid(32 / scale, 32 / scale);
    let cfg = IntegratorConfig::with_horizon(1e4);
    let census = exit_match_scan(&flow, &seeds, &crate::kuperberg::KuperbergFlow::angle_mask(), &cfg);
    let checks = vec![
        CheckResult::new(
            "all-exit-matched",
            census.exited == census.total && census.max_mismatch <= 1e-5,
            census.max_mismatch,
            1e-5,
            format!("{}/{} exited", census.exited, census.total),
        ),
        CheckResult::new(
            "max-nu-below-bound",
            (census.max_nu as f64) <= bound,
            census.max_nu as f64,
            bound,
            format!("ε = {eps:.4}, bound = {bound}"),
        ),
    ];
    Ok(VerificationReport::new("level-bounds", tol, checks))
}

/// Parametric consistency: the parametric field is the quotient field at
/// t = η_s(|y|), bit for bit, vertical at s = 1, and y-free.
pub fn parametric_consistency(par: &ParametricKuperberg, tol: TolerancePolicy) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    let mut rng = DeterministicRng::new(0xabcdef12345);
    let mut max_dev = 0.0f64;
    let mut max_y = 0.0f64;
    let mut worst_vertical = 0.0f64;
    for _ in 0..2000 {
        let p = PointW3::new_clamped(
            -2.0 + 4.0 * rng.next_f64(),
            crate::geom::TAU * rng.next_f64(),
            1.0 + 2.0 * rng.next_f64(),
        );
        let s = rng.next_f64();
        let ymag = rng.next_f64();
        let mut y = vec![0.0; par.l];
        if par.l > 0 {
            y[0] = ymag;
        }
        let t = par.t_at(s, &y)?;
        let flow = par.plug.flow(t)?;
        if flow.tongue_membership(&p)?.is_some() {
            continue;
        }
        let st = QuotientState::new(&par.plug, p);
        let v = par.parametric_field(s, &st, &y)?;
        let q = flow.quotient_field(&st)?;
        for (c, val) in q.components() {
            let dev = (v.component(*c) - val).abs();
            max_dev = max_dev.max(dev);
        }
        for (c, val) in v.components() {
            if matches!(c, crate::Coord::Y(_)) {
                max_y = max_y.max(val.abs());
            }
        }
        // s = 1: vertical, exactly
        let v1 = par.parametric_field(1.0, &st, &y)?;
        worst_vertical = worst_vertical
            .max((v1.component(crate::Coord::Z) - 1.0).abs())
            .max(v1.component(crate::Coord::Theta).abs());
    }
    checks.push(CheckResult::new(
        "same-code-path",
        max_dev == 0.0,
        max_dev,
        0.0,
        "parametric field equals quotient field at η_s(|y|) exactly".into(),
    ));
    checks.push(CheckResult::new(
        "y-components-zero",
        max_y == 0.0,
        max_y,
        0.0,
        String::new(),
    ));
    checks.push(CheckResult::new(
        "s1-vertical",
        worst_vertical == 0.0,
        worst_vertical,
        0.0,
        "η_1 ≡ 2 gives exactly ∂_z".into(),
    ));
    Ok(VerificationReport::new("parametric-consistency", tol, checks))
}

/// The named obstruction corpus: rotation numbers, degrees, torus
/// classification, and the forced boundary orbits on the Reeb component.
pub fn obstruction_corpus(tol: TolerancePolicy) -> Result<VerificationReport> {
    use crate::obstruction::*;
    let mut checks = Vec::new();

    let (rho, _) = rotation_number(&CircleMap::Rigid { rho: 0.25 }, 4000)?;
    checks.push(CheckResult::new(
        "rotation-rational-exact",
        rho == 0.25,
        rho,
        0.25,
        "dyadic rotation, bit-exact average".into(),
    ));
    // one third: exact after three lift iterations
    let third_map = CircleMap::Rigid { rho: 1.0 / 3.0 };
    let mut x3 = 0.0;
    for _ in 0..3 {
        x3 = third_map.lift(x3);
    }
    checks.push(CheckResult::new(
        "rotation-one-third-exact",
        x3 / 3.0 == 1.0 / 3.0,
        x3 / 3.0,
        1.0 / 3.0,
        "exact after 3 iterations".into(),
    ));

    let arnold = CircleMap::Arnold { omega: 0.3, k: 0.05 };
    let (est, _) = rotation_number(&arnold, 100_000)?;
    let mut x = 0.0f64;
    for _ in 0..1_000_000 {
        x = arnold.lift(x);
    }
    let oracle = x / 1_000_000.0;
    checks.push(CheckResult::new(
        "rotation-arnold-vs-oracle",
        (est - oracle).abs() <= 1e-4,
        (est - oracle).abs(),
        1e-4,
        format!("estimate {est:.8}, long-orbit oracle {oracle:.8}"),
    ));

    // degree examples
    let circle: Vec<(f64, f64)> = (0..256)
        .map(|k| {
            let a = crate::geom::TAU * k as f64 / 256.0;
            (a.cos(), a.sin())
        })
        .collect();
    let d0 = degree_along_curve(&|_x, _y| (1.0, 0.2), &circle)?;
    checks.push(CheckResult::new(
        "degree-suspension-curve-zero",
        d0 == 0,
        d0 as f64,
        0.0,
        "constant-angle field along the meridian representative".into(),
    ));
    let rst = ReebSolidTorus {
        a_theta: 1.0,
        amp: 0.3,
        phase: 0.0,
    };
    let leaf_field = |x: f64, y: f64| {
        let rho = (x * x + y * y).sqrt().max(1e-6);
        let (ct, st) = (x / rho, y / rho);
        let t = rst.leaf_slope(rho.min(0.999)) * 0.1;
        let u = rst.u(t);
        (
            -rho * rst.a_theta * st + u * ct,
            rho * rst.a_theta * ct + u * st,
        )
    };
    let big: Vec<(f64, f64)> = (0..512)
        .map(|k| {
            let a = crate::geom::TAU * k as f64 / 512.0;
            (0.95 * a.cos(), 0.95 * a.sin())
        })
        .collect();
    let d1 = degree_along_curve(&leaf_field, &big)?;
    checks.push(CheckResult::new(
        "degree-reeb-leaf-circle-one",
        d1 == 1,
        d1 as f64,
        1.0,
        "leafwise field on a circle approaching the asymptotic curve".into(),
    ));

    // torus classification corpus
    let cases = [
        (
            TorusLineField::Linear {
                slope: std::f64::consts::SQRT_2,
            },
            TorusFoliationClass::SuspensionNoClosed,
        ),
        (
            TorusLineField::Linear { slope: 0.0 },
            TorusFoliationClass::SuspensionWithClosed,
        ),
        (
            TorusLineField::DoubleReeb { drift: 0.3 },
            TorusFoliationClass::ReebComponent,
        ),
        (
            TorusLineField::Suspension {
                map: CircleMap::Rigid {
                    rho: std::f64::consts::SQRT_2 - 1.0,
                },
            },
            TorusFoliationClass::SuspensionNoClosed,
        ),
        (
            TorusLineField::Suspension {
                map: CircleMap::Arnold { omega: 0.0, k: 0.5 },
            },
            TorusFoliationClass::SuspensionWithClosed,
        ),
    ];
    for (i, (tf, want)) in cases.iter().enumerate() {
        let got = detect_reeb_component(tf)?;
        checks.push(CheckResult::new(
            &format!("torus-classify-{i}"),
            got == *want,
            got as i64 as f64,
            *want as i64 as f64,
            format!("{got:?} (expected {want:?})"),
        ));
    }

    // forced boundary orbits on every corpus field
    let corpus = [
        ReebSolidTorus {
            a_theta: 1.0,
            amp: 0.3,
            phase: 0.0,
        },
        ReebSolidTorus {
            a_theta: 1.0,
            amp: 0.25,
            phase: 1.0,
        },
        ReebSolidTorus {
            a_theta: -1.0,
            amp: 0.4,
            phase: 0.3,
        },
    ];
    let cfg = IntegratorConfig::with_horizon(200.0);
    for (i, rst) in corpus.iter().enumerate() {
        let orbits = reeb_boundary_orbits(rst, &cfg)?;
        let resid_ok = orbits.iter().all(|o| o.residual < 1e-9);
        checks.push(CheckResult::new(
            &format!("reeb-boundary-orbits-{i}"),
            orbits.len() >= 2 && resid_ok,
            orbits.len() as f64,
            2.0,
            format!("{} distinct closed boundary orbits", orbits.len()),
        ));
    }

    Ok(VerificationReport::new("obstruction-corpus", tol, checks))
}
