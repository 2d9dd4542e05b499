//! Adaptive embedded Runge–Kutta 5(4) (Dormand–Prince) with dense output,
//! face-event location by bisection on the interpolant, and teleport-style
//! transitions delegated to the owning flow.

use crate::geom::{EventKind, Terminal, TolerancePolicy};
use serde::Serialize;

/// Direction in which a face function must cross zero to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceDir {
    Rising,
    Falling,
}

/// What a flow does when an orbit reaches one of its faces.
pub enum FaceAction {
    /// Stop with this terminal event.
    Terminal(EventKind),
    /// Jump to a new state (chart switch) and keep integrating.
    Teleport { state: Vec<f64>, kind: EventKind },
    /// Not actually a face crossing here (outside the active patch).
    Ignore,
}

/// A vector field with optional event faces. States are raw coordinate
/// vectors in the flow's own layout.
pub trait FlowSystem: Sync {
    fn dim(&self) -> usize;
    fn field(&self, y: &[f64], dy: &mut [f64]);
    fn n_faces(&self) -> usize {
        0
    }
    fn face_value(&self, _k: usize, _y: &[f64]) -> f64 {
        unreachable!("flow declared no faces")
    }
    fn face_dir(&self, _k: usize) -> FaceDir {
        FaceDir::Rising
    }
    fn face_action(&self, _k: usize, _y: &[f64]) -> FaceAction {
        FaceAction::Ignore
    }
    /// Normalize a state between steps (wrap angle coordinates). Keeping
    /// angles bounded keeps the relative error scale bounded on long runs.
    fn renormalize(&self, _y: &mut [f64]) {}
}

#[derive(Clone, Debug, Serialize)]
pub struct RawEvent {
    pub kind: EventKind,
    pub time: f64,
    pub state: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RawTrajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub events: Vec<RawEvent>,
    pub terminal: Terminal,
    pub end_time: f64,
    pub end_state: Vec<f64>,
    pub steps: u64,
    pub rejected: u64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegratorConfig {
    pub tol: TolerancePolicy,
    pub max_step: f64,
    /// Bound on h·‖field‖ so slow passages cannot produce steps that
    /// outrun the event faces.
    pub arc_cap: f64,
    pub t_max: f64,
    pub max_steps: u64,
    pub max_events: usize,
    /// Record every k-th accepted step (0 = record only endpoints/events).
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            tol: TolerancePolicy::default(),
            max_step: 1.0,
            arc_cap: 0.25,
            t_max: 1e4,
            max_steps: 200_000_000,
            max_events: 1_000_000,
            sample_stride: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_horizon(t_max: f64) -> Self {
        IntegratorConfig {
            t_max,
            ..Default::default()
        }
    }
}

// Dormand–Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Workspace holding one step's stages and dense coefficients.
struct StepCore {
    n: usize,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    rcont: [Vec<f64>; 5],
}

impl StepCore {
    fn new(n: usize) -> Self {
        StepCore {
            n,
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            rcont: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    /// One DP step from (t, y) with stepsize h; k[0] must hold f(y).
    /// Fills y_new and returns the scaled error norm.
    fn step<F: FlowSystem + ?Sized>(
        &mut self,
        flow: &F,
        y: &[f64],
        h: f64,
        y_new: &mut [f64],
        tol: &TolerancePolicy,
    ) -> f64 {
        let n = self.n;
        macro_rules! stage {
            ($idx:expr, $($coef:expr => $kj:expr),+) => {{
                for i in 0..n {
                    let mut acc = 0.0;
                    $(acc += $coef * self.k[$kj][i];)+
                    self.ytmp[i] = y[i] + h * acc;
                }
                let (head, tail) = self.k.split_at_mut($idx);
                let _ = head;
                flow.field(&self.ytmp, &mut tail[0]);
            }};
        }
        stage!(1, A21 => 0);
        stage!(2, A31 => 0, A32 => 1);
        stage!(3, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        {
            let (head, tail) = self.k.split_at_mut(6);
            let _ = head;
            flow.field(y_new, &mut tail[0]);
        }
        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let sc = tol.step_abs_tol + tol.step_rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        (err / n as f64).sqrt()
    }

    /// Prepare dense-output coefficients for the accepted step.
    fn prepare_dense(&mut self, y: &[f64], y_new: &[f64], h: f64) {
        for i in 0..self.n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * self.k[0][i] - ydiff;
            self.rcont[0][i] = y[i];
            self.rcont[1][i] = ydiff;
            self.rcont[2][i] = bspl;
            self.rcont[3][i] = ydiff - h * self.k[6][i] - bspl;
            self.rcont[4][i] = h
                * (D1 * self.k[0][i]
                    + D3 * self.k[2][i]
                    + D4 * self.k[3][i]
                    + D5 * self.k[4][i]
                    + D6 * self.k[5][i]
                    + D7 * self.k[6][i]);
        }
    }

    /// Evaluate the dense interpolant at fraction s ∈ [0,1] of the step.
    fn dense(&self, s: f64, out: &mut [f64]) {
        let s1 = 1.0 - s;
        for i in 0..self.n {
            out[i] = self.rcont[0][i]
                + s * (self.rcont[1][i]
                    + s1 * (self.rcont[2][i] + s * (self.rcont[3][i] + s1 * self.rcont[4][i])));
        }
    }
}

/// Integrate `flow` from `y0` until a terminal face fires or the horizon is
/// reached. Face crossings are located on the dense interpolant to the
/// event tolerance, then handed to the flow for the transition.
pub fn integrate<F: FlowSystem + ?Sized>(flow: &F, y0: &[f64], cfg: &IntegratorConfig) -> RawTrajectory {
    let n = flow.dim();
    let n_faces = flow.n_faces();
    let mut core = StepCore::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut t = 0.0f64;
    let mut samples = Vec::new();
    let mut events: Vec<RawEvent> = Vec::new();
    let mut steps: u64 = 0;
    let mut rejected: u64 = 0;

    if cfg.sample_stride > 0 {
        samples.push((t, y.clone()));
    }

    flow.field(&y, &mut core.k[0]);
    let mut h = initial_step(&y, &core.k[0], cfg);
    let mut terminal = Terminal::TimeHorizon;
    // face values at the current state
    let mut fvals: Vec<f64> = (0..n_faces).map(|k| flow.face_value(k, &y)).collect();
    let mut sub = vec![0.0; n];

    'outer: loop {
        if t >= cfg.t_max {
            break;
        }
        if steps >= cfg.max_steps {
            terminal = Terminal::Error;
            break;
        }
        let speed = core.k[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut h_try = h.min(cfg.max_step).min(cfg.t_max - t);
        if speed > 0.0 {
            h_try = h_try.min(cfg.arc_cap / speed);
        }
        if h_try < 1e-13 * t.abs().max(1.0) {
            terminal = Terminal::Error;
            break;
        }

        let err = core.step(flow, &y, h_try, &mut y_new, &cfg.tol);
        steps += 1;
        if err > 1.0 {
            rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h = h_try * fac;
            continue;
        }

        // accepted; collect face crossings inside the step, in time order
        core.prepare_dense(&y, &y_new, h_try);
        let mut crossings: Vec<(f64, f64, f64, f64, usize)> = Vec::new(); // (sa, sb, va, vb, face)
        if n_faces > 0 {
            const NSUB: usize = 16;
            for k in 0..n_faces {
                let dir = flow.face_dir(k);
                let mut prev_s = 0.0f64;
                let mut prev_v = fvals[k];
                for j in 1..=NSUB {
                    let s = j as f64 / NSUB as f64;
                    let v = if j == NSUB {
                        flow.face_value(k, &y_new)
                    } else {
                        core.dense(s, &mut sub);
                        flow.face_value(k, &sub)
                    };
                    let crossed = match dir {
                        FaceDir::Rising => prev_v < 0.0 && v >= 0.0,
                        FaceDir::Falling => prev_v > 0.0 && v <= 0.0,
                    };
                    if crossed {
                        crossings.push((prev_s, s, prev_v, v, k));
                    }
                    prev_s = s;
                    prev_v = v;
                }
            }
            crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        }

        let mut fired = false;
        for (sa, sb, va, vb, k) in crossings {
            let frac = refine_crossing(&core, flow, k, sa, sb, va, vb, &mut sub, &cfg.tol);
            core.dense(frac, &mut sub);
            let t_c = t + frac * h_try;
            match flow.face_action(k, &sub) {
                FaceAction::Terminal(kind) => {
                    events.push(RawEvent {
                        kind,
                        time: t_c,
                        state: sub.clone(),
                    });
                    if cfg.sample_stride > 0 {
                        samples.push((t_c, sub.clone()));
                    }
                    y.copy_from_slice(&sub);
                    t = t_c;
                    terminal = Terminal::Exited;
                    break 'outer;
                }
                FaceAction::Teleport { state, kind } => {
                    events.push(RawEvent {
                        kind,
                        time: t_c,
                        state: sub.clone(),
                    });
                    if events.len() >= cfg.max_events {
                        terminal = Terminal::Error;
                        y = state;
                        t = t_c;
                        break 'outer;
                    }
                    y = state;
                    t = t_c;
                    if cfg.sample_stride > 0 {
                        samples.push((t, y.clone()));
                    }
                    flow.field(&y, &mut core.k[0]);
                    for (kk, fv) in fvals.iter_mut().enumerate() {
                        *fv = flow.face_value(kk, &y);
                    }
                    // fresh step size after the chart switch
                    h = initial_step(&y, &core.k[0], cfg);
                    fired = true;
                    break;
                }
                FaceAction::Ignore => {
                    // crossing outside the active patch: keep scanning
                }
            }
        }
        if fired {
            continue;
        }

        // plain accepted step
        t += h_try;
        std::mem::swap(&mut y, &mut y_new);
        core.k.swap(0, 6); // FSAL
        flow.renormalize(&mut y);
        for (kk, fv) in fvals.iter_mut().enumerate() {
            *fv = flow.face_value(kk, &y);
        }
        if cfg.sample_stride > 0 && steps % cfg.sample_stride as u64 == 0 {
            samples.push((t, y.clone()));
        }
        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 8.0);
        h = h_try * fac;
    }

    if cfg.sample_stride > 0 && samples.last().map_or(true, |(ts, _)| *ts < t) {
        samples.push((t, y.clone()));
    }
    RawTrajectory {
        samples,
        events,
        terminal,
        end_time: t,
        end_state: y,
        steps,
        rejected,
    }
}

/// Bisection refinement of a bracketed face crossing on the dense output.
#[allow(clippy::too_many_arguments)]
fn refine_crossing<F: FlowSystem + ?Sized>(
    core: &StepCore,
    flow: &F,
    k: usize,
    mut sa: f64,
    mut sb: f64,
    mut va: f64,
    _vb: f64,
    buf: &mut [f64],
    tol: &TolerancePolicy,
) -> f64 {
    for _ in 0..80 {
        let sm = 0.5 * (sa + sb);
        core.dense(sm, buf);
        let vm = flow.face_value(k, buf);
        if vm.abs() <= tol.event_tol * 0.5 || (sb - sa) < 1e-15 {
            return sm;
        }
        if (vm < 0.0) == (va < 0.0) {
            sa = sm;
            va = vm;
        } else {
            sb = sm;
        }
    }
    0.5 * (sa + sb)
}

fn initial_step(y: &[f64], f: &[f64], cfg: &IntegratorConfig) -> f64 {
    let fn2 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let yn2 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h0 = if fn2 > 1e-12 {
        (0.01 * (yn2 + 1.0) / fn2).min(cfg.max_step)
    } else {
        cfg.max_step
    };
    h0.max(1e-10)
}

/// Fixed-step Dormand–Prince run without events. Used for convergence-order
/// measurement; not part of the production path.
pub fn integrate_fixed_step<F: FlowSystem + ?Sized>(flow: &F, y0: &[f64], t_end: f64, h: f64) -> Vec<f64> {
    let n = flow.dim();
    let mut core = StepCore::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let tol = TolerancePolicy::default();
    let mut t = 0.0;
    while t < t_end - 1e-15 {
        let hh = h.min(t_end - t);
        flow.field(&y, &mut core.k[0]);
        core.step(flow, &y, hh, &mut y_new, &tol);
        std::mem::swap(&mut y, &mut y_new);
        t += hh;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    /// dz/dt = 1 in one dimension, face at z = 2.
    struct VerticalLine;
    impl FlowSystem for VerticalLine {
        fn dim(&self) -> usize {
            1
        }
        fn field(&self, _y: &[f64], dy: &mut [f64]) {
            dy[0] = 1.0;
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
    }

    #[test]
    fn constant_field_exits_at_time_four() {
        let cfg = IntegratorConfig::with_horizon(100.0);
        let out = integrate(&VerticalLine, &[-2.0], &cfg);
        assert_eq!(out.terminal, Terminal::Exited);
        assert!((out.end_time - 4.0).abs() < 1e-8, "exit time {}", out.end_time);
        assert!((out.end_state[0] - 2.0).abs() < 1e-8);
    }

    /// Harmonic oscillator for convergence-order measurement.
    struct Oscillator;
    impl FlowSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn field(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn fixed_step_order_is_five() {
        let t_end = 2.0f64;
        let exact = [t_end.cos(), -t_end.sin()];
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for k in 0..4 {
            let h = 0.2 / 2f64.powi(k);
            let y = integrate_fixed_step(&Oscillator, &[1.0, 0.0], t_end, h);
            let e = ((y[0] - exact[0]).powi(2) + (y[1] - exact[1]).powi(2)).sqrt();
            errs.push(e.ln());
            hs.push(h.ln());
        }
        // least-squares slope of log err vs log h
        let n = errs.len() as f64;
        let sx: f64 = hs.iter().sum();
        let sy: f64 = errs.iter().sum();
        let sxy: f64 = hs.iter().zip(&errs).map(|(a, b)| a * b).sum();
        let sxx: f64 = hs.iter().map(|a| a * a).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 5.0).abs() < 0.5, "observed order {slope}");
    }

    #[test]
    fn adaptive_matches_exact_solution() {
        let cfg = IntegratorConfig {
            t_max: 10.0,
            ..Default::default()
        };
        let out = integrate(&Oscillator, &[1.0, 0.0], &cfg);
        assert_eq!(out.terminal, Terminal::TimeHorizon);
        assert!((out.end_state[0] - 10f64.cos()).abs() < 1e-7);
        assert!((out.end_state[1] + 10f64.sin()).abs() < 1e-7);
    }
}
