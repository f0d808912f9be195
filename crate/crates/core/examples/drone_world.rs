//! Steps the coverage world with a fixed joint plan and prints positions,
//! observations and metrics, including a scheduled malfunction.

use qmdrl::env::{DroneEnv, EnvConfig, Position, ACTION_NAMES};

fn fmt(points: &[Position]) -> String {
    let cells: Vec<String> = points.iter().map(|p| format!("({:.1}, {:.1})", p[0], p[1])).collect();
    cells.join(" ")
}

fn main() -> qmdrl::Result<()> {
    let cfg = EnvConfig {
        malfunction_schedule: vec![(6, 1)],
        ..EnvConfig::default()
    };
    let mut env = DroneEnv::new(cfg.clone(), 11)?;
    let (mut state, obs) = env.reset();
    println!("users: {}", fmt(&state.user_positions));
    println!("t=0 drone 0 observation {:?}", obs[0]);

    // Drone 0 climbs then hovers; drone 1 heads north-east.
    let plan = |t: usize| [if t < 3 { 0 } else { 4 }, if t % 2 == 0 { 0 } else { 2 }];
    let mut total = 0.0;
    for t in 0..10 {
        let actions = plan(t);
        let out = env.step(&state, &actions)?;
        total += out.rewards.iter().sum::<f64>();
        println!(
            "t={:<2} {:<5}/{:<5} drones {} down {:?} support {:.3} qos {:.3} rewards [{:.3}, {:.3}]",
            out.state.timestep,
            ACTION_NAMES[actions[0]],
            ACTION_NAMES[actions[1]],
            fmt(&out.state.drone_positions),
            out.state.malfunctioned,
            out.metrics.support_rate,
            out.metrics.qos,
            out.rewards[0],
            out.rewards[1]
        );
        state = out.state;
    }
    println!("reward over 10 steps: {total:.4}");
    Ok(())
}
