//! Gradient estimators and the plain SGD update.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::qpolicy::ParamKind;

/// Central difference quotient of `loss` along every coordinate:
/// `(loss(p + ε·eᵢ) − loss(p − ε·eᵢ)) / 2ε`.
///
/// Makes exactly `2·len(params)` loss evaluations.
pub fn grad_sdq<F>(loss: F, params: &[f64], epsilon: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(epsilon > 0.0) {
        return Err(invalid(format!("difference step {epsilon} must be positive")));
    }
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let original = probe[i];
        probe[i] = original + epsilon;
        let plus = loss(&probe)?;
        probe[i] = original - epsilon;
        let minus = loss(&probe)?;
        probe[i] = original;
        for value in [plus, minus] {
            if !value.is_finite() {
                return Err(Error::NonFinite { index: i, value });
            }
        }
        grad.push((plus - minus) / (2.0 * epsilon));
    }
    Ok(grad)
}

/// Two-term parameter-shift derivative of `observable` with respect to one
/// rotation angle: `(f(θ + π/2) − f(θ − π/2)) / 2`.
///
/// `kinds[component]` must be [`ParamKind::Rotation`]; the rule is not exact
/// for the angles of a controlled U3.
pub fn parameter_shift_grad<F>(
    observable: F,
    params: &[f64],
    component: usize,
    kinds: &[ParamKind],
) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if component >= params.len() || kinds.len() != params.len() {
        return Err(invalid(format!(
            "component {component} not addressable ({} params, {} kinds)",
            params.len(),
            kinds.len()
        )));
    }
    if kinds[component] != ParamKind::Rotation {
        return Err(Error::UnsupportedComponent(component));
    }
    let mut probe = params.to_vec();
    probe[component] = params[component] + FRAC_PI_2;
    let plus = observable(&probe)?;
    probe[component] = params[component] - FRAC_PI_2;
    let minus = observable(&probe)?;
    Ok((plus - minus) / 2.0)
}

/// `params − η·gradient`.
pub fn sgd_step(params: &[f64], gradient: &[f64], learning_rate: f64) -> Result<Vec<f64>> {
    let mut out = params.to_vec();
    sgd_step_in_place(&mut out, gradient, learning_rate)?;
    Ok(out)
}

pub fn sgd_step_in_place(params: &mut [f64], gradient: &[f64], learning_rate: f64) -> Result<()> {
    if params.len() != gradient.len() {
        return Err(invalid(format!(
            "{} parameters but {} gradient entries",
            params.len(),
            gradient.len()
        )));
    }
    for (p, g) in params.iter_mut().zip(gradient) {
        *p -= learning_rate * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Gate, StateVector};
    use std::f64::consts::PI;

    fn cos_loss(p: &[f64]) -> Result<f64> {
        let mut s = StateVector::zero(1)?;
        s.apply(&Gate::ry(0, p[0]))?;
        s.expectation_z(0)
    }

    #[test]
    fn sdq_matches_derivative_of_cosine() {
        let g = grad_sdq(cos_loss, &[PI / 3.0], 0.01).unwrap();
        assert!((g[0] + (PI / 3.0).sin()).abs() < 1e-4);
        let g = grad_sdq(cos_loss, &[0.0], 0.01).unwrap();
        assert!(g[0].abs() < 1e-6);
    }

    #[test]
    fn sdq_counts_evaluations() {
        let calls = std::cell::Cell::new(0);
        let f = |p: &[f64]| {
            calls.set(calls.get() + 1);
            Ok(p.iter().map(|x| x * x).sum())
        };
        grad_sdq(f, &[1.0, 2.0, 3.0], 0.1).unwrap();
        assert_eq!(calls.get(), 6);
    }

    #[test]
    fn sdq_reports_nonfinite_component() {
        let f = |p: &[f64]| Ok(if p[1] > 0.5 { f64::NAN } else { 0.0 });
        match grad_sdq(f, &[0.0, 0.45], 0.1) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(grad_sdq(cos_loss, &[0.0], 0.0).is_err());
    }

    #[test]
    fn shift_rule_is_exact_on_rotations() {
        let kinds = [ParamKind::Rotation];
        let g = parameter_shift_grad(cos_loss, &[PI / 3.0], 0, &kinds).unwrap();
        assert!((g + (PI / 3.0).sin()).abs() < 1e-12);
        assert!(parameter_shift_grad(cos_loss, &[0.0], 0, &kinds).unwrap().abs() < 1e-15);
        let kinds = [ParamKind::ControlledU3];
        assert!(matches!(
            parameter_shift_grad(cos_loss, &[0.0], 0, &kinds),
            Err(Error::UnsupportedComponent(0))
        ));
    }

    #[test]
    fn sgd_arithmetic() {
        assert_eq!(sgd_step(&[1.0, 2.0], &[0.0, 0.0], 0.5).unwrap(), vec![1.0, 2.0]);
        let p = sgd_step(&[1.0], &[2.0], 0.1).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-15);
        assert!(sgd_step(&[1.0], &[1.0, 2.0], 0.1).is_err());
    }

    #[test]
    fn descent_on_cosine_reaches_minimum() {
        let mut theta = vec![PI / 3.0];
        for _ in 0..50 {
            let g = grad_sdq(cos_loss, &theta, 0.01).unwrap();
            theta = sgd_step(&theta, &g, 0.1).unwrap();
        }
        assert!(cos_loss(&theta).unwrap() < -0.95);
    }
}
