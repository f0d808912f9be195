//! Dense state-vector simulation of small qubit registers.
//!
//! Amplitude index `i` encodes a computational basis state with wire 0 as the
//! most significant bit: on three qubits, index `0b100` is `|100⟩`, meaning
//! wire 0 is `|1⟩` and wires 1 and 2 are `|0⟩`.
//!
//! Gates are applied in place by iterating over amplitude pairs that differ
//! only in the target bit, so a single gate costs `O(2^q)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 20;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Amplitudes of a `q`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero state `|0…0⟩` on `num_qubits` wires.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// The computational basis state with the given amplitude index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![C0; dim];
        amplitudes[index] = C1;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the vector
    /// must be normalized to within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(invalid(format!(
                "amplitude vector length {dim} is not a power of two ≥ 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Squared 2-norm; 1 for every valid state up to rounding.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule probabilities of each basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bit mask selecting `wire` in an amplitude index.
    fn mask(&self, wire: usize) -> usize {
        1 << (self.num_qubits - 1 - wire)
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.num_qubits {
            return Err(invalid(format!(
                "wire {wire} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for wire in gate.wires() {
            self.check_wire(wire)?;
        }
        match *gate {
            Gate::Rx { wire, .. } | Gate::Ry { wire, .. } | Gate::Rz { wire, .. } => {
                let m = gate.matrix2();
                self.apply_single(self.mask(wire), &m);
            }
            Gate::Cnot { control, target } | Gate::Cu3 { control, target, .. } => {
                if control == target {
                    return Err(invalid(format!(
                        "control and target are both wire {control}"
                    )));
                }
                let m = gate.matrix2();
                self.apply_controlled(self.mask(control), self.mask(target), &m);
            }
        }
        Ok(())
    }

    /// Applies every gate of `circuit` in sequence order.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        circuit.iter().try_for_each(|g| self.apply(g))
    }

    fn apply_single(&mut self, mask: usize, m: &Matrix2) {
        let dim = self.amplitudes.len();
        for block in (0..dim).step_by(mask << 1) {
            for i in block..block + mask {
                let j = i | mask;
                let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_controlled(&mut self, control: usize, target: usize, m: &Matrix2) {
        let dim = self.amplitudes.len();
        for block in (0..dim).step_by(target << 1) {
            for i in block..block + target {
                if i & control == 0 {
                    continue;
                }
                let j = i | target;
                let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// Pauli-Z expectation on one wire: `P(bit = 0) − P(bit = 1)`.
    pub fn expectation_z(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        let mask = self.mask(wire);
        let value = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum::<f64>();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// Pauli-Z expectation of every wire, in wire order.
    pub fn expectation_z_all(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.num_qubits];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (wire, s) in sums.iter_mut().enumerate() {
                if i & self.mask(wire) == 0 {
                    *s += p;
                } else {
                    *s -= p;
                }
            }
        }
        sums.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect()
    }
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&num_qubits) {
        return Err(invalid(format!(
            "qubit count {num_qubits} outside [1, {MAX_QUBITS}]"
        )));
    }
    Ok(())
}

/// Gate set used by the policy circuits. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rx { wire: usize, theta: f64 },
    Ry { wire: usize, theta: f64 },
    Rz { wire: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Cu3 {
        control: usize,
        target: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
}

impl Gate {
    pub fn rx(wire: usize, theta: f64) -> Self {
        Gate::Rx { wire, theta }
    }

    pub fn ry(wire: usize, theta: f64) -> Self {
        Gate::Ry { wire, theta }
    }

    pub fn rz(wire: usize, theta: f64) -> Self {
        Gate::Rz { wire, theta }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn cu3(control: usize, target: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::Cu3 {
            control,
            target,
            theta,
            phi,
            lambda,
        }
    }

    /// Wires touched by the gate; for controlled gates the control comes first.
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { wire, .. } | Gate::Ry { wire, .. } | Gate::Rz { wire, .. } => vec![wire],
            Gate::Cnot { control, target } | Gate::Cu3 { control, target, .. } => {
                vec![control, target]
            }
        }
    }

    pub fn is_controlled(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cu3 { .. })
    }

    /// The 2×2 matrix acting on the target wire (on the controlled block for
    /// CNOT and CU3).
    pub fn matrix2(&self) -> Matrix2 {
        match *self {
            Gate::Rx { theta, .. } => rx_matrix(theta),
            Gate::Ry { theta, .. } => ry_matrix(theta),
            Gate::Rz { theta, .. } => rz_matrix(theta),
            Gate::Cnot { .. } => [[C0, C1], [C1, C0]],
            Gate::Cu3 {
                theta, phi, lambda, ..
            } => u3_matrix(theta, phi, lambda),
        }
    }

    /// The gate's matrix on its own wires: 2×2 for rotations, 4×4 for
    /// controlled gates with the control as the high bit.
    pub fn local_matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.matrix2();
        if !self.is_controlled() {
            return m.iter().map(|row| row.to_vec()).collect();
        }
        let mut out = vec![vec![C0; 4]; 4];
        out[0][0] = C1;
        out[1][1] = C1;
        for r in 0..2 {
            for c in 0..2 {
                out[2 + r][2 + c] = m[r][c];
            }
        }
        out
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx { wire, theta } => write!(f, "RX({theta:.4}) q{wire}"),
            Gate::Ry { wire, theta } => write!(f, "RY({theta:.4}) q{wire}"),
            Gate::Rz { wire, theta } => write!(f, "RZ({theta:.4}) q{wire}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control} -> q{target}"),
            Gate::Cu3 {
                control,
                target,
                theta,
                phi,
                lambda,
            } => write!(
                f,
                "CU3({theta:.4}, {phi:.4}, {lambda:.4}) q{control} -> q{target}"
            ),
        }
    }
}

pub fn rx_matrix(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    [[Complex64::new(c, 0.0), mis], [mis, Complex64::new(c, 0.0)]]
}

pub fn ry_matrix(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz_matrix(theta: f64) -> Matrix2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), C0],
        [C0, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

/// `U3(θ, φ, λ) = [[cos(θ/2), −e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

/// An ordered gate list; the first gate is applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            gates: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Gate> {
        self.gates.iter()
    }
}

impl FromIterator<Gate> for Circuit {
    fn from_iter<I: IntoIterator<Item = Gate>>(iter: I) -> Self {
        Self {
            gates: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Circuit {
    type Item = &'a Gate;
    type IntoIter = std::slice::Iter<'a, Gate>;

    fn into_iter(self) -> Self::IntoIter {
        self.gates.iter()
    }
}

pub fn new_zero_state(num_qubits: usize) -> Result<StateVector> {
    StateVector::zero(num_qubits)
}

pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn apply_circuit(mut state: StateVector, circuit: &Circuit) -> Result<StateVector> {
    state.apply_circuit(circuit)?;
    Ok(state)
}

pub fn expectation_z(state: &StateVector, wire: usize) -> Result<f64> {
    state.expectation_z(wire)
}

pub fn expectation_z_all(state: &StateVector) -> Vec<f64> {
    state.expectation_z_all()
}
