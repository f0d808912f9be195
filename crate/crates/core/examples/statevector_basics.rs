//! Bell pair, single-qubit rotations and a controlled U3 on the dense
//! state-vector simulator.

use std::f64::consts::PI;

use qmdrl::qsim::{expectation_z_all, Circuit, Gate, StateVector};

fn show(label: &str, s: &StateVector) {
    let probs: Vec<String> = s.probabilities().iter().map(|p| format!("{p:.3}")).collect();
    let z: Vec<String> = expectation_z_all(s).iter().map(|z| format!("{z:+.3}")).collect();
    println!("{label:<22} P = [{}]  <Z> = [{}]", probs.join(", "), z.join(", "));
}

fn main() -> qmdrl::Result<()> {
    let mut bell = StateVector::zero(2)?;
    bell.apply(&Gate::ry(0, PI / 2.0))?;
    bell.apply(&Gate::cnot(0, 1))?;
    show("RY(pi/2) + CNOT", &bell);

    let mut s = StateVector::zero(3)?;
    let circuit: Circuit = [
        Gate::rx(0, PI),
        Gate::ry(1, PI / 3.0),
        Gate::rz(1, 0.7),
        Gate::cu3(0, 2, PI / 2.0, 0.0, 0.0),
    ]
    .into_iter()
    .collect();
    for g in &circuit {
        println!("  {g}");
    }
    s.apply_circuit(&circuit)?;
    show("3-qubit circuit", &s);
    println!("norm^2 = {:.15}", s.norm_sqr());
    Ok(())
}
