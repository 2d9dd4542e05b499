//! Development probe: timings and dynamic statistics for the scans.
//! Run with: cargo run --release -p plugflow --example probe -- <section>

use plugflow::geom::{PointW3, TAU};
use plugflow::insertion::GAMMA_R;
use plugflow::integrate::*;
use plugflow::kuperberg::KuperbergPlug;
use plugflow::profiles::make_wilson3_profile;
use plugflow::verify::annulus_grid;
use plugflow::wilson::{Wilson3Flow, Wilson3Plug};
use std::time::Instant;

fn main() {
    let section = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    let w = Wilson3Plug::new(make_wilson3_profile());

    if section == "wilson" || section == "all" {
        // criterion 2 shape: 64x64 grid excluding (1.8, 2.2)
        let t0 = Instant::now();
        let seeds = annulus_grid(64, 64, Some((1.8, 2.2)));
        let flow = Wilson3Flow::base(&w);
        let mut cfg = IntegratorConfig::with_horizon(1e4);
        cfg.tol.step_abs_tol = 1e-12;
        cfg.tol.step_rel_tol = 1e-12;
        let census = exit_match_scan(&flow, &seeds, &Wilson3Flow::angle_mask(), &cfg);
        println!(
            "wilson3 exit-match: {}/{} exited, max mismatch {:.3e}, {:?}",
            census.exited,
            census.total,
            census.max_mismatch,
            t0.elapsed()
        );
        let worst = census
            .rows
            .iter()
            .max_by(|a, b| a.end_time.partial_cmp(&b.end_time).unwrap())
            .unwrap();
        println!(
            "  slowest orbit: seed r={:.3}, time {:.1}, steps {}",
            worst.seed[2], worst.end_time, worst.steps
        );
    }

    if section == "wilson-closed" || section == "all" {
        let t0 = Instant::now();
        let flow = Wilson3Flow::base(&w);
        let mut seeds: Vec<Vec<f64>> = Vec::new();
        for k in 0..8 {
            let th = TAU * k as f64 / 8.0;
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
        let cfg = IntegratorConfig::with_horizon(1e4);
        let rc = RecurrenceConfig::default();
        let census = closed_orbit_scan(&flow, &seeds, &Wilson3Flow::angle_mask(), &cfg, &rc);
        println!(
            "wilson3 closed scan: {} candidates ({} converged), {:?}",
            census.candidates.len(),
            census.candidates.iter().filter(|c| c.converged).count(),
            t0.elapsed()
        );
        for c in census.candidates.iter().filter(|c| c.converged).take(40) {
            println!(
                "  candidate: z={:+.4} r={:.4} T={:.6} resid={:.2e}",
                c.state[0], c.state[2], c.period, c.residual
            );
        }
        let orbits = distinct_orbits(&flow, &census.candidates, &Wilson3Flow::angle_mask(), &cfg, 1e-2);
        println!("  distinct: {}", orbits.len());
        for o in &orbits {
            println!(
                "  orbit z={:+.4} r={:.4} T={:.8} resid={:.2e} (2pi={:.8})",
                o.state[0],
                o.state[2],
                o.period,
                o.residual,
                TAU
            );
        }
    }

    if section == "kuperberg-exit" || section == "all" {
        let k = KuperbergPlug::standard().unwrap();
        let arc: f64 = std::env::args().nth(2).map(|a| a.parse().unwrap()).unwrap_or(0.25);
        let tol: f64 = std::env::args().nth(3).map(|a| a.parse().unwrap()).unwrap_or(1e-10);
        for t in [0.25, 0.5, 1.0, 1.5] {
            let t0 = Instant::now();
            let flow = k.flow(t).unwrap();
            let seeds = k.entry_grid(32, 32);
            let mut cfg = IntegratorConfig::with_horizon(1e4);
            cfg.arc_cap = arc;
            cfg.tol.step_abs_tol = tol;
            cfg.tol.step_rel_tol = tol;
            let census = exit_match_scan(&flow, &seeds, &plugflow::kuperberg::KuperbergFlow::angle_mask(), &cfg);
            let slowest = census
                .rows
                .iter()
                .max_by(|a, b| a.end_time.partial_cmp(&b.end_time).unwrap())
                .unwrap();
            println!(
                "kuperberg t={t}: {}/{} exited, trapped {}, err {}, max mismatch {:.3e}, max nu {}, slowest {:.0} (seed r={:.3}), {:?}",
                census.exited,
                census.total,
                census.trapped,
                census.errors,
                census.max_mismatch,
                census.max_nu,
                slowest.end_time,
                slowest.seed[2],
                t0.elapsed()
            );
        }
    }

    if section == "kuperberg-gamma" || section == "all" {
        let k = KuperbergPlug::standard().unwrap();
        let flow = k.flow(0.0).unwrap();
        let cfg = IntegratorConfig::with_horizon(1e4);
        let t0 = Instant::now();
        let traj = flow
            .orbit(PointW3::new(-1.0, k.insertions[0].theta_center, GAMMA_R).unwrap(), &cfg)
            .unwrap();
        let log = plugflow::kuperberg::level_function(&traj);
        println!(
            "gamma orbit t=0: terminal {:?}, events {}, max nu {}, {:?}",
            traj.terminal,
            traj.events.len(),
            log.max_nu(),
            t0.elapsed()
        );
    }

    if section == "trace" {
        let k = KuperbergPlug::standard().unwrap();
        let flow = k.flow(0.0).unwrap();
        let r_seed: f64 = std::env::args().nth(2).map(|a| a.parse().unwrap()).unwrap_or(1.97);
        let horizon: f64 = std::env::args().nth(3).map(|a| a.parse().unwrap()).unwrap_or(1e5);
        let cfg = IntegratorConfig::with_horizon(horizon);
        let th = k.insertions[0].theta_center + 2.6;
        let traj = flow.orbit(PointW3::new(-2.0, th, r_seed).unwrap(), &cfg).unwrap();
        println!("seed r={r_seed}: terminal {:?}, events {}", traj.terminal, traj.events.len());
        let mut nu = 0i64;
        for (i, e) in traj.events.iter().enumerate() {
            match e.kind {
                plugflow::geom::EventKind::EnterInsertion(_) => nu += 1,
                plugflow::geom::EventKind::ExitInsertion(_) => nu -= 1,
                _ => {}
            }
            if i < 60 || i + 5 > traj.events.len() {
                println!(
                    "  [{i:4}] t={:9.1} {:?} at (z={:+.4}, th={:.3}, r={:.6}) nu={nu}",
                    e.time, e.kind, e.location.z, e.location.theta, e.location.r
                );
            }
        }
    }

    if section == "stack" {
        let k = KuperbergPlug::standard().unwrap();
        let flow = k.flow(0.0).unwrap();
        let r_seed: f64 = std::env::args().nth(2).map(|a| a.parse().unwrap()).unwrap_or(1.97);
        let horizon: f64 = std::env::args().nth(3).map(|a| a.parse().unwrap()).unwrap_or(1e5);
        let cfg = IntegratorConfig::with_horizon(horizon);
        let th = k.insertions[0].theta_center + 2.6;
        let traj = flow.orbit(PointW3::new(-2.0, th, r_seed).unwrap(), &cfg).unwrap();
        println!("seed r={r_seed}: terminal {:?}, events {}", traj.terminal, traj.events.len());
        let mut stack: Vec<(usize, f64, f64, f64)> = Vec::new(); // (ins, theta, r, time)
        let mut breaks = 0;
        for (i, e) in traj.events.iter().enumerate() {
            match e.kind {
                plugflow::geom::EventKind::EnterInsertion(ins_idx) => {
                    let ins = &k.insertions[ins_idx - 1];
                    if let Some((bth, br)) = ins.invert_face(0.0, e.location.z, e.location.theta, e.location.r) {
                        stack.push((ins_idx, bth, br, e.time));
                    } else {
                        println!("  [{i}] t={:.1} Enter({ins_idx}) NOT INVERTIBLE at (z={:+.5}, th={:.5}, r={:.6})", e.time, e.location.z, e.location.theta, e.location.r);
                        stack.push((ins_idx, f64::NAN, f64::NAN, e.time));
                    }
                }
                plugflow::geom::EventKind::ExitInsertion(ins_idx) => {
                    match stack.pop() {
                        Some((pi, pth, pr, pt)) => {
                            let dth = plugflow::geom::angle_signed(e.location.theta, pth).abs();
                            let dr = (e.location.r - pr).abs();
                            if pi != ins_idx || dth > 1e-5 || dr > 1e-5 {
                                breaks += 1;
                                if breaks < 12 {
                                    println!("  [{i}] t={:.1} BREAK: Exit({ins_idx}) at (th={:.6}, r={:.6}) vs Enter({pi}) box (th={:.6}, r={:.6}) from t={:.1}: dth={:.2e} dr={:.2e}",
                                        e.time, e.location.theta, e.location.r, pth, pr, pt, dth, dr);
                                }
                            }
                        }
                        None => println!("  [{i}] t={:.1} Exit({ins_idx}) with EMPTY stack", e.time),
                    }
                }
                _ => {
                    println!("  [{i}] t={:.1} {:?} at (z={:+.5}, th={:.5}, r={:.6}) stack depth {}", e.time, e.kind, e.location.z, e.location.theta, e.location.r, stack.len());
                }
            }
        }
        println!("total breaks: {breaks}, final stack depth {}", stack.len());
    }

    if section == "matsumoto" || section == "all" {
        let k = KuperbergPlug::standard().unwrap();
        let flow = k.flow(0.0).unwrap();
        let thetas = [2.6, 5.2];
        for horizon in [1e4, 1e5] {
            let cfg = IntegratorConfig::with_horizon(horizon);
            for dth in thetas {
                let th = k.insertions[0].theta_center + dth;
                let n = 32;
                let cell = 0.125 / n as f64;
                let seeds: Vec<Vec<f64>> = (0..n)
                    .map(|j| vec![-2.0, th, GAMMA_R - cell * (j as f64 + 0.5)])
                    .collect();
                let t0 = Instant::now();
                let census = trapped_scan(&flow, &seeds, &plugflow::kuperberg::KuperbergFlow::angle_mask(), &cfg);
                let mut run = 0;
                for row in &census.rows {
                    if row.outcome == Outcome::Trapped {
                        run += 1;
                    } else {
                        break;
                    }
                }
                println!(
                    "matsumoto horizon {horizon:.0e} θ=+{dth}: trapped {}/{}, contiguous run {} (δ={:.5}), {:?}",
                    census.trapped,
                    census.total,
                    run,
                    run as f64 * cell,
                    t0.elapsed()
                );
            }
        }
    }
}

#[allow(dead_code)]
fn unused() {}
