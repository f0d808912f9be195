//! Difference-quotient gradients of a policy observable against the
//! parameter-shift rule, and the O(eps^2) error scaling on cos(theta).

use qmdrl::harness::ConfigBundle;
use qmdrl::qpolicy::{ParamKind, QPolicy, QPolicyParams};
use qmdrl::qsim::{apply_gate, expectation_z, new_zero_state, Gate};
use qmdrl::training::{grad_sdq, parameter_shift_grad};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qmdrl::Result<()> {
    let cos = |p: &[f64]| {
        let s = apply_gate(new_zero_state(1)?, &Gate::ry(0, p[0]))?;
        expectation_z(&s, 0)
    };
    let theta = 1.0f64;
    println!("d/dθ cos θ at θ = 1, exact {:+.10}", -theta.sin());
    for eps in [0.04, 0.02, 0.01, 0.005] {
        let g = grad_sdq(cos, &[theta], eps)?;
        println!("  eps = {eps:<6} estimate {:+.10}  error {:.3e}", g[0], (g[0] + theta.sin()).abs());
    }

    let bundle = ConfigBundle::default();
    let policy = QPolicy::new(bundle.quantum_config())?;
    let cfg = policy.config();
    let kinds = cfg.param_kinds();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = QPolicyParams::random(cfg, 1.0, &mut rng).into_flat();
    let obs: Vec<f64> = cfg
        .feature_bounds
        .iter()
        .map(|(lo, hi)| rng.gen_range(*lo..*hi))
        .collect();
    let north = |p: &[f64]| Ok(policy.forward_flat(p, &obs)?[0]);
    let sdq = grad_sdq(north, &params, 0.01)?;
    println!("gradient of <Z_0> over {} parameters:", params.len());
    for (i, kind) in kinds.iter().enumerate().step_by(7) {
        let shift = match kind {
            ParamKind::Rotation => format!("{:+.6}", parameter_shift_grad(north, &params, i, &kinds)?),
            ParamKind::ControlledU3 => "n/a (CU3)".into(),
        };
        println!("  p{i:<3} sdq {:+.6}  shift {shift}", sdq[i]);
    }
    Ok(())
}
