//! One-parameter families of states used in phase estimation.
//!
//! Every qubit family here is built from `|+⟩` in the computational basis and
//! the dephasing correlation `B(γ, φ)`, so that at `γ = 0` one use of the
//! channel is the phase gate `diag(1, e^{-iφ})`.

use std::fmt;

use crate::channels::{qubit_dephasing_b, validate_state, CorrelationMatrix};
use crate::classical::{nfold_copy, ClassicalStructure};
use crate::error::{Error, Result};
use crate::matrix::{kron_all, schur_product, Complex64, ComplexMatrix, C_I};
use crate::protocols::{entangled_channel_state, sequential_channel, ChannelProtocolSpec};

pub type StateFn = Box<dyn Fn(f64) -> Result<ComplexMatrix> + Send + Sync>;

/// Largest register the metrology code will build (`2^8 = 256`).
pub const MAX_QUBITS: usize = 8;

pub struct ParametrizedFamily {
    dim: usize,
    description: String,
    state_at: StateFn,
    derivative_at: Option<StateFn>,
}

impl fmt::Debug for ParametrizedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedFamily")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .field("analytic_derivative", &self.derivative_at.is_some())
            .finish()
    }
}

impl ParametrizedFamily {
    pub fn new<F>(dim: usize, description: impl Into<String>, state_at: F) -> Self
    where
        F: Fn(f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        Self {
            dim,
            description: description.into(),
            state_at: Box::new(state_at),
            derivative_at: None,
        }
    }

    pub fn with_derivative<F>(mut self, derivative_at: F) -> Self
    where
        F: Fn(f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        self.derivative_at = Some(Box::new(derivative_at));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative_at.is_some()
    }

    /// `ρ(φ)`, validated as a density matrix.
    pub fn state(&self, phi: f64) -> Result<ComplexMatrix> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("phase must be finite, got {phi}")));
        }
        let rho = (self.state_at)(phi)?;
        validate_state(&rho, self.dim)?;
        Ok(rho)
    }

    pub fn analytic_derivative(&self, phi: f64) -> Option<Result<ComplexMatrix>> {
        self.derivative_at.as_ref().map(|f| f(phi))
    }
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one probe".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::BudgetExceeded {
            dim: 1usize << n.min(63),
            budget: 1 << MAX_QUBITS,
        });
    }
    Ok(())
}

pub fn plus_state() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])
}

/// Entrywise `∂B*/∂φ` for the qubit correlation.
fn dephasing_b_conj_derivative(gamma: f64, phi: f64) -> ComplexMatrix {
    let off = Complex64::from_polar((-gamma).exp(), phi);
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_rows(&[vec![z, C_I * off], vec![-C_I * off.conj(), z]])
}

fn conj_b(gamma: f64, phi: f64) -> Result<ComplexMatrix> {
    Ok(qubit_dephasing_b(gamma, phi)?.matrix().conj())
}

/// `ℬ_{γ,φ}(|+⟩⟨+|)`.
pub fn dephased_qubit_family(gamma: f64) -> Result<ParametrizedFamily> {
    qubit_dephasing_b(gamma, 0.0)?;
    Ok(ParametrizedFamily::new(2, format!("dephased qubit, gamma={gamma}"), move |phi| {
        schur_product(&conj_b(gamma, phi)?, &plus_state())
    })
    .with_derivative(move |phi| schur_product(&dephasing_b_conj_derivative(gamma, phi), &plus_state())))
}

/// `n` independent probes, each `ℬ_{γ,φ}(|+⟩⟨+|)`.
pub fn ramsey_family(n: usize, gamma: f64) -> Result<ParametrizedFamily> {
    check_register(n)?;
    let single = dephased_qubit_family(gamma)?;
    let single_d = dephased_qubit_family(gamma)?;
    Ok(ParametrizedFamily::new(1 << n, format!("ramsey, n={n}, gamma={gamma}"), move |phi| {
        let rho = single.state(phi)?;
        Ok(kron_all(&vec![rho; n]))
    })
    .with_derivative(move |phi| {
        let rho = single_d.state(phi)?;
        let drho = single_d.analytic_derivative(phi).expect("analytic")?;
        let mut total = ComplexMatrix::zeros(1 << n, 1 << n);
        for i in 0..n {
            let factors: Vec<ComplexMatrix> = (0..n).map(|j| if j == i { drho.clone() } else { rho.clone() }).collect();
            total = &total + &kron_all(&factors);
        }
        Ok(total)
    }))
}

fn repeated(gamma: f64, phi: f64, n: usize) -> Result<Vec<CorrelationMatrix>> {
    Ok(vec![qubit_dephasing_b(gamma, phi)?; n])
}

/// `|+⟩` copied onto `n` wires, then `ℬ_{γ,φ}` on each wire. The register
/// is left entangled.
pub fn ghz_family(n: usize, gamma: f64) -> Result<ParametrizedFamily> {
    check_register(n)?;
    qubit_dephasing_b(gamma, 0.0)?;
    let cs = ClassicalStructure::computational(2);
    let copy_n = nfold_copy(&cs, n)?;
    let ghz = &(&copy_n * &plus_state()) * &copy_n.dagger();
    Ok(ParametrizedFamily::new(1 << n, format!("ghz parallel, n={n}, gamma={gamma}"), move |phi| {
        entangled_channel_state(&cs, &repeated(gamma, phi, n)?, &plus_state())
    })
    .with_derivative(move |phi| {
        let b = conj_b(gamma, phi)?;
        let db = dephasing_b_conj_derivative(gamma, phi);
        let mut weights = ComplexMatrix::zeros(1 << n, 1 << n);
        for i in 0..n {
            let factors: Vec<ComplexMatrix> = (0..n).map(|j| if j == i { db.clone() } else { b.clone() }).collect();
            weights = &weights + &kron_all(&factors);
        }
        schur_product(&weights, &ghz)
    }))
}

/// One probe passed through `ℬ_{γ,φ}` `n` times.
pub fn sequential_family(n: usize, gamma: f64) -> Result<ParametrizedFamily> {
    check_register(n)?;
    qubit_dephasing_b(gamma, 0.0)?;
    let cs = ClassicalStructure::computational(2);
    Ok(ParametrizedFamily::new(2, format!("sequential, n={n}, gamma={gamma}"), move |phi| {
        let spec = ChannelProtocolSpec::new(cs.clone(), repeated(gamma, phi, n)?, (0..n).collect(), plus_state())?;
        sequential_channel(&spec)
    })
    .with_derivative(move |phi| {
        // ∂(B*∘…∘B*) = n · B*^{∘(n-1)} ∘ ∂B*.
        let b = conj_b(gamma, phi)?;
        let mut weights = dephasing_b_conj_derivative(gamma, phi).scale_real(n as f64);
        for _ in 1..n {
            weights = schur_product(&weights, &b)?;
        }
        schur_product(&weights, &plus_state())
    }))
}

/// `e^{-iφH} ρ_0 e^{iφH}` for a diagonal generator `H = diag(g)`.
pub fn diagonal_generator_family(rho0: ComplexMatrix, generator: Vec<f64>) -> Result<ParametrizedFamily> {
    let d = generator.len();
    validate_state(&rho0, d)?;
    if generator.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("generator entries must be finite".into()));
    }
    let rho_d = rho0.clone();
    let gen_d = generator.clone();
    let evolve = move |rho: &ComplexMatrix, g: &[f64], phi: f64| {
        ComplexMatrix::from_fn(d, d, |j, k| rho[(j, k)] * Complex64::from_polar(1.0, -phi * (g[j] - g[k])))
    };
    let evolve_d = evolve;
    Ok(ParametrizedFamily::new(d, "unitary phase imprint", move |phi| Ok(evolve(&rho0, &generator, phi)))
        .with_derivative(move |phi| {
            let rho = evolve_d(&rho_d, &gen_d, phi);
            Ok(ComplexMatrix::from_fn(d, d, |j, k| rho[(j, k)] * Complex64::new(0.0, -(gen_d[j] - gen_d[k]))))
        }))
}

/// `Σ_i n̂_i` on `n` qubits: the number of ones in each basis label.
pub fn excitation_number(n: usize) -> Vec<f64> {
    (0..1usize << n).map(|j| j.count_ones() as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::phase_flip_channel;

    #[test]
    fn dephased_qubit_matches_phase_flip_kraus() {
        for &(gamma, phi) in &[(0.0, 0.3), (0.7, -1.1), (2.0, 2.5)] {
            let fam = dephased_qubit_family(gamma).unwrap();
            let via_kraus = phase_flip_channel(gamma, phi).unwrap().apply_to_operator(&plus_state());
            assert!(fam.state(phi).unwrap().max_abs_diff(&via_kraus) < 1e-14);
        }
    }

    #[test]
    fn noiseless_qubit_is_phase_gate_on_plus() {
        let fam = dephased_qubit_family(0.0).unwrap();
        let phi = 0.9;
        let psi = ComplexMatrix::column(&[
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
            Complex64::from_polar(1.0 / 2f64.sqrt(), -phi),
        ]);
        let expected = &psi * &psi.dagger();
        assert!(fam.state(phi).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn ghz_state_has_collective_phase() {
        let n = 3;
        let gamma = 0.2;
        let phi = 0.4;
        let rho = ghz_family(n, gamma).unwrap().state(phi).unwrap();
        let last = (1 << n) - 1;
        let expected = Complex64::from_polar(0.5 * (-(n as f64) * gamma).exp(), n as f64 * phi);
        assert!((rho[(0, last)] - expected).norm() < 1e-14);
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((rho[(last, last)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn ramsey_is_product() {
        let rho = ramsey_family(2, 0.3).unwrap().state(0.5).unwrap();
        let single = dephased_qubit_family(0.3).unwrap().state(0.5).unwrap();
        assert!(rho.max_abs_diff(&kron_all(&[single.clone(), single])) < 1e-15);
    }

    #[test]
    fn register_budget() {
        assert!(matches!(ghz_family(9, 0.0), Err(Error::BudgetExceeded { .. })));
        assert!(ramsey_family(0, 0.0).is_err());
        assert!(sequential_family(3, -0.1).is_err());
    }

    #[test]
    fn generator_family_matches_phase_gate() {
        let plus = plus_state();
        let fam = diagonal_generator_family(plus, vec![0.0, 1.0]).unwrap();
        let reference = dephased_qubit_family(0.0).unwrap();
        assert!(fam.state(0.8).unwrap().max_abs_diff(&reference.state(0.8).unwrap()) < 1e-15);
        let a = fam.analytic_derivative(0.8).unwrap().unwrap();
        let b = reference.analytic_derivative(0.8).unwrap().unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }
}
