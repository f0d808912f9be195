//! Oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qmdrl::env::*;
use qmdrl::qsim::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bit(index: usize, wire: usize, q: usize) -> usize {
    (index >> (q - 1 - wire)) & 1
}

/// Full 2^q operator of a gate, built entry by entry from its local matrix.
pub fn dense(gate: &Gate, q: usize) -> Vec<Vec<Complex64>> {
    let local = gate.local_matrix();
    let wires = gate.wires();
    let dim = 1 << q;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let others_equal = (0..q)
                .filter(|w| !wires.contains(w))
                .all(|w| bit(i, w, q) == bit(j, w, q));
            if !others_equal {
                continue;
            }
            let sub = |k: usize| wires.iter().fold(0, |acc, &w| (acc << 1) | bit(k, w, q));
            *cell = local[sub(i)][sub(j)];
        }
    }
    out
}

pub fn matvec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn random_state(q: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << q)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn random_gate(q: usize, rng: &mut ChaCha8Rng) -> Gate {
    let w = rng.gen_range(0..q);
    let a = |rng: &mut ChaCha8Rng| rng.gen_range(-7.0..7.0);
    let pair = |rng: &mut ChaCha8Rng| {
        let c = rng.gen_range(0..q);
        let t = (c + rng.gen_range(1..q)) % q;
        (c, t)
    };
    match rng.gen_range(0..5) {
        0 => Gate::rx(w, a(rng)),
        1 => Gate::ry(w, a(rng)),
        2 => Gate::rz(w, a(rng)),
        3 if q > 1 => {
            let (c, t) = pair(rng);
            Gate::cnot(c, t)
        }
        _ if q > 1 => {
            let (c, t) = pair(rng);
            Gate::cu3(c, t, a(rng), a(rng), a(rng))
        }
        _ => Gate::ry(w, a(rng)),
    }
}

pub struct Brute {
    pub support: f64,
    pub qos: f64,
    pub rewards: Vec<f64>,
}

/// Straight from the full user × drone distance matrix.
pub fn brute_force(state: &EnvState, cfg: &EnvConfig) -> Brute {
    let u = state.user_positions.len();
    let m = state.drone_positions.len();
    let dist: Vec<Vec<f64>> = state
        .user_positions
        .iter()
        .map(|p| {
            state
                .drone_positions
                .iter()
                .map(|d| ((p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let mut served = vec![0usize; m];
    let mut quality = vec![0.0; m];
    let mut covered = 0;
    let mut qos_total = 0.0;
    for row in &dist {
        let mut owner = None;
        let mut best = f64::INFINITY;
        let mut q_best: f64 = 0.0;
        for (j, &d) in row.iter().enumerate() {
            if state.malfunctioned[j] {
                continue;
            }
            q_best = q_best.max((1.0 - d / cfg.coverage_radius).max(0.0));
            if d <= cfg.coverage_radius && d < best {
                best = d;
                owner = Some(j);
            }
        }
        qos_total += q_best;
        if let Some(j) = owner {
            covered += 1;
            served[j] += 1;
            quality[j] += (1.0 - best / cfg.coverage_radius).max(0.0);
        }
    }
    let rewards = (0..m)
        .map(|j| {
            if served[j] == 0 {
                0.0
            } else {
                cfg.w_support * served[j] as f64 / u as f64 + cfg.w_qos * quality[j] / served[j] as f64
            }
        })
        .collect();
    Brute {
        support: covered as f64 / u as f64,
        qos: qos_total / u as f64,
        rewards,
    }
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (EnvState, EnvConfig) {
    let cfg = EnvConfig {
        num_drones: rng.gen_range(1..=4),
        num_users: rng.gen_range(1..=15),
        coverage_radius: rng.gen_range(0.5..4.0),
        w_support: rng.gen_range(0.0..1.0),
        w_qos: rng.gen_range(0.0..1.0),
        ..EnvConfig::default()
    };
    let (w, h) = (cfg.grid_width as f64, cfg.grid_height as f64);
    let snap = rng.gen_bool(0.3);
    let mut point = |snap: bool| {
        let p = [rng.gen_range(0.0..=w), rng.gen_range(0.0..=h)];
        if snap {
            [p[0].round(), p[1].round()]
        } else {
            p
        }
    };
    let drones = (0..cfg.num_drones).map(|_| point(snap)).collect();
    let users = (0..cfg.num_users).map(|_| point(snap)).collect();
    let malfunctioned = (0..cfg.num_drones).map(|_| rng.gen_bool(0.25)).collect();
    (
        EnvState {
            drone_positions: drones,
            user_positions: users,
            malfunctioned,
            timestep: 0,
        },
        cfg,
    )
}
