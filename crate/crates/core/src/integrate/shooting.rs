//! Period shooting: Gauss–Newton correction of a closed-orbit candidate on
//! the return map, with the phase fixed by confining the state correction to
//! the hyperplane normal to the field at the candidate point.

use super::dopri::{integrate, FlowSystem, IntegratorConfig};
use crate::geom::Terminal;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct ShootResult {
    pub state: Vec<f64>,
    pub period: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Angle-aware residual component: wrapped difference for angle coords.
fn comp_diff(a: f64, b: f64, is_angle: bool) -> f64 {
    if is_angle {
        crate::geom::angle_signed(a, b)
    } else {
        a - b
    }
}

fn flow_to_time<F: FlowSystem + ?Sized>(flow: &F, x: &[f64], t_end: f64, tol_cfg: &IntegratorConfig) -> Option<Vec<f64>> {
    if !(t_end.is_finite()) || t_end <= 0.0 {
        return None;
    }
    let cfg = IntegratorConfig {
        t_max: t_end,
        sample_stride: 0,
        ..*tol_cfg
    };
    let out = integrate(flow, x, &cfg);
    if out.terminal == Terminal::TimeHorizon && (out.end_time - t_end).abs() < 1e-9 * t_end.max(1.0) {
        Some(out.end_state)
    } else {
        None
    }
}

/// Orthonormal basis of the hyperplane normal to `n` (d−1 vectors).
fn section_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        let dot: f64 = v.iter().zip(n).map(|(a, b)| a * b).sum();
        for (vj, nj) in v.iter_mut().zip(n) {
            *vj -= dot * nj;
        }
        for b in &basis {
            let dot: f64 = v.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
            for (vj, bj) in v.iter_mut().zip(b.iter()) {
                *vj -= dot * bj;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vj in v.iter_mut() {
                *vj /= norm;
            }
            basis.push(v);
            if basis.len() == d - 1 {
                break;
            }
        }
    }
    basis
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Refine a candidate (x0, period0). Returns the corrected orbit point,
/// period, and the sup-norm of the return residual. Candidates near
/// degenerate (parabolic) orbits converge linearly, so the iteration budget
/// is generous.
pub fn shoot_periodic<F: FlowSystem + ?Sized>(
    flow: &F,
    x0: &[f64],
    period0: f64,
    angle_mask: &[bool],
    cfg: &IntegratorConfig,
    residual_tol: f64,
) -> ShootResult {
    let d = flow.dim();
    let mut f0 = vec![0.0; d];
    flow.field(x0, &mut f0);
    let fnorm: f64 = f0.iter().map(|a| a * a).sum::<f64>().sqrt();
    let fail = |x: &[f64], t: f64| ShootResult {
        state: x.to_vec(),
        period: t,
        residual: f64::INFINITY,
        converged: false,
        iterations: 0,
    };
    if fnorm < 1e-12 {
        return fail(x0, period0);
    }
    let n_hat: Vec<f64> = f0.iter().map(|a| a / fnorm).collect();
    let basis = section_basis(&n_hat);
    if basis.len() != d - 1 {
        return fail(x0, period0);
    }

    let residual_of = |u: &[f64], t: f64| -> Option<Vec<f64>> {
        let mut x = x0.to_vec();
        for (j, b) in basis.iter().enumerate() {
            for (xi, bi) in x.iter_mut().zip(b.iter()) {
                *xi += u[j] * bi;
            }
        }
        let xe = flow_to_time(flow, &x, t, cfg)?;
        Some(
            (0..d)
                .map(|i| comp_diff(xe[i], x[i], angle_mask[i]))
                .collect(),
        )
    };

    let mut u = vec![0.0; d - 1];
    let mut t = period0;
    let mut g = match residual_of(&u, t) {
        Some(g) => g,
        None => return fail(x0, period0),
    };
    let norm_inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut best = (u.clone(), t, norm_inf(&g));

    for iter in 0..60 {
        if best.2 < residual_tol {
            break;
        }
        // finite-difference Jacobian in (u, T)
        let mut jac: Vec<Vec<f64>> = vec![vec![0.0; d]; d];
        let eps_u = 1e-7;
        let mut ok = true;
        for j in 0..(d - 1) {
            let mut up = u.clone();
            up[j] += eps_u;
            match residual_of(&up, t) {
                Some(gp) => {
                    for i in 0..d {
                        jac[i][j] = (gp[i] - g[i]) / eps_u;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let eps_t = 1e-7 * t.max(1.0);
        match residual_of(&u, t + eps_t) {
            Some(gp) => {
                for i in 0..d {
                    jac[i][d - 1] = (gp[i] - g[i]) / eps_t;
                }
            }
            None => break,
        }
        let rhs: Vec<f64> = g.iter().map(|a| -a).collect();
        let Some(delta) = solve(jac, rhs) else { break };
        // damped update
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let mut u_new = u.clone();
            for j in 0..(d - 1) {
                u_new[j] += lambda * delta[j];
            }
            let t_new = t + lambda * delta[d - 1];
            if t_new <= 0.0 {
                lambda *= 0.5;
                continue;
            }
            if let Some(g_new) = residual_of(&u_new, t_new) {
                if norm_inf(&g_new) < norm_inf(&g) {
                    u = u_new;
                    t = t_new;
                    g = g_new;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
        if norm_inf(&g) < best.2 {
            best = (u.clone(), t, norm_inf(&g));
        }
        let _ = iter;
    }

    let mut x = x0.to_vec();
    for (j, b) in basis.iter().enumerate() {
        for (xi, bi) in x.iter_mut().zip(b.iter()) {
            *xi += best.0[j] * bi;
        }
    }
    ShootResult {
        state: x,
        period: best.1,
        residual: best.2,
        converged: best.2 < residual_tol,
        iterations: 0,
    }
}
