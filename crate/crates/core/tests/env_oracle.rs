mod common;

use common::*;
use proptest::prelude::*;
use qmdrl::env::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn metrics_match_brute_force_on_500_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..500 {
        let (state, cfg) = random_case(&mut rng);
        let b = brute_force(&state, &cfg);
        assert!((support_rate(&state, &cfg) - b.support).abs() <= 1e-12, "case {case}");
        assert!((qos(&state, &cfg) - b.qos).abs() <= 1e-12, "case {case}");
        for (r, e) in reward(&state, &cfg).iter().zip(&b.rewards) {
            assert!((r - e).abs() <= 1e-12, "case {case}");
        }
    }
}

#[test]
fn reward_conservation_without_qos_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..500 {
        let (state, mut cfg) = random_case(&mut rng);
        cfg.w_qos = 0.0;
        let total: f64 = reward(&state, &cfg).iter().sum();
        assert!((total - cfg.w_support * support_rate(&state, &cfg)).abs() <= 1e-12);
    }
}

#[test]
fn brute_force_sector_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let (state, cfg) = random_case(&mut rng);
        let serving = assignments(&state, &cfg);
        for id in 0..state.drone_positions.len() {
            let obs = observe(&state, id, &cfg).unwrap();
            let own = state.drone_positions[id];
            let mut counts = [0.0; NUM_SECTORS];
            for (u, s) in state.user_positions.iter().zip(&serving) {
                if s.is_none() {
                    counts[sector_of(u[0] - own[0], u[1] - own[1])] += 1.0;
                }
            }
            assert_eq!(&obs[obs.len() - NUM_SECTORS..], &counts);
            let unserved = serving.iter().filter(|s| s.is_none()).count() as f64;
            assert_eq!(counts.iter().sum::<f64>(), unserved);
        }
    }
}

fn state_strategy() -> impl Strategy<Value = (u64, Vec<Vec<usize>>)> {
    (any::<u64>(), prop::collection::vec(prop::collection::vec(0usize..5, 2), 0..40))
}

proptest! {
    #[test]
    fn invariants_hold_along_random_trajectories((seed, actions) in state_strategy()) {
        let cfg = EnvConfig {
            malfunction_schedule: vec![(5, 0), (12, 1)],
            ..EnvConfig::default()
        };
        let mut env = DroneEnv::new(cfg.clone(), seed).unwrap();
        let (mut state, _) = env.reset();
        let mut frozen: Vec<Option<Position>> = vec![None; 2];
        for joint in &actions {
            let out = env.step(&state, joint).unwrap();
            state = out.state;
            for (i, p) in state.drone_positions.iter().enumerate() {
                prop_assert!(p[0] >= 0.0 && p[0] <= 8.0 && p[1] >= 0.0 && p[1] <= 8.0);
                if state.malfunctioned[i] {
                    if let Some(f) = frozen[i] {
                        prop_assert_eq!(f, *p);
                    }
                    frozen[i] = Some(*p);
                    prop_assert_eq!(out.rewards[i], 0.0);
                }
            }
            for s in assignments(&state, &cfg).into_iter().flatten() {
                prop_assert!(!state.malfunctioned[s]);
            }
            prop_assert!((0.0..=1.0).contains(&out.metrics.support_rate));
            prop_assert!((0.0..=1.0).contains(&out.metrics.qos));
            for obs in &out.observations {
                prop_assert_eq!(obs.len(), cfg.obs_dim());
                for (x, (lo, hi)) in obs.iter().zip(cfg.feature_bounds()) {
                    prop_assert!(*x >= lo && *x <= hi);
                }
            }
        }
    }

    #[test]
    fn extra_active_drone_never_lowers_support(seed in any::<u64>(), x in 0.0..8.0f64, y in 0.0..8.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, cfg) = random_case(&mut rng);
        let before = support_rate(&state, &cfg);
        let mut more = state.clone();
        more.drone_positions.push([x, y]);
        more.malfunctioned.push(false);
        let cfg2 = EnvConfig { num_drones: cfg.num_drones + 1, ..cfg.clone() };
        prop_assert!(support_rate(&more, &cfg2) >= before);
    }
}
