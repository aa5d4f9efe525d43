//! Additivity, ensemble monotonicity and the separable-state bound.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::families::{diagonal_generator_family, excitation_number, ghz_family, MAX_QUBITS};
use super::sld::{family_qfi, qfi, Derivative, DEFAULT_CUTOFF, DEFAULT_PHI, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::matrix::{kron_all, outer, ComplexMatrix};
use crate::random::{dirichlet_weights, random_pure_vector, seeded};

/// Largest dense dimension the bound checks will build.
pub const MAX_DENSE_DIM: usize = 1 << MAX_QUBITS;

/// Tolerance for `Tr ρ_p L^{(j)} ⊗ L^{(k)}`.
pub const CROSS_TERM_TOL: f64 = 1e-8;
pub const ENSEMBLE_TOL: f64 = 1e-8;
pub const SEPARABLE_TOL: f64 = 1e-6;
/// Largest number of product states in a sampled separable mixture.
pub const MAX_MIXTURE: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    /// QFI of `ρ_1 ⊗ … ⊗ ρ_n` computed from its own SLD.
    pub direct: f64,
    pub parts: Vec<f64>,
    pub sum_of_parts: f64,
    pub deviation: f64,
    pub max_cross_term: f64,
    pub max_trace_rho_sld: f64,
}

impl ProductReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.deviation <= tol && self.max_cross_term <= CROSS_TERM_TOL
    }
}

fn check_dense(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::BudgetExceeded {
            dim,
            budget: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

/// Embed `op` on factor `site` of a product with factor dimensions `dims`.
fn embed(op: &ComplexMatrix, dims: &[usize], site: usize) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| if i == site { op.clone() } else { ComplexMatrix::identity(d) })
        .collect();
    kron_all(&factors)
}

/// QFI of a product state, directly and as the sum over factors.
pub fn qfi_product_check(states: &[(ComplexMatrix, ComplexMatrix)], cutoff: f64) -> Result<ProductReport> {
    if states.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one factor".into()));
    }
    let dims: Vec<usize> = states.iter().map(|(rho, _)| rho.rows()).collect();
    check_dense(dims.iter().product())?;

    let mut part_results = Vec::with_capacity(states.len());
    for (rho, drho) in states {
        part_results.push(qfi(rho, &Derivative::analytic(drho.clone()), cutoff)?);
    }

    let rhos: Vec<ComplexMatrix> = states.iter().map(|(rho, _)| rho.clone()).collect();
    let rho_p = kron_all(&rhos);
    let mut drho_p = ComplexMatrix::zeros(rho_p.rows(), rho_p.cols());
    for (i, (_, drho)) in states.iter().enumerate() {
        let mut factors = rhos.clone();
        factors[i] = drho.clone();
        drho_p = &drho_p + &kron_all(&factors);
    }
    let direct = qfi(&rho_p, &Derivative::analytic(drho_p), cutoff)?;

    let embedded: Vec<ComplexMatrix> = part_results
        .iter()
        .enumerate()
        .map(|(i, r)| embed(&r.sld, &dims, i))
        .collect();
    let mut max_cross_term = 0.0f64;
    for j in 0..embedded.len() {
        for k in (j + 1)..embedded.len() {
            let t = (&(&rho_p * &embedded[j]) * &embedded[k]).trace().norm();
            max_cross_term = max_cross_term.max(t);
        }
    }

    let parts: Vec<f64> = part_results.iter().map(|r| r.value).collect();
    let sum_of_parts: f64 = parts.iter().sum();
    let max_trace_rho_sld = part_results
        .iter()
        .map(|r| r.trace_rho_sld)
        .fold(direct.trace_rho_sld, f64::max);
    Ok(ProductReport {
        direct: direct.value,
        deviation: (direct.value - sum_of_parts).abs(),
        parts,
        sum_of_parts,
        max_cross_term,
        max_trace_rho_sld,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    /// QFI of the mixture `Σ p_j ρ_j`.
    pub i_e: f64,
    /// QFI of the flagged extension `Σ p_j ρ_j ⊗ |j⟩⟨j|`.
    pub i_ex: f64,
    /// `Σ p_j I^{(j)}`, which must equal `i_ex`.
    pub weighted_sum: f64,
    pub passed: bool,
}

/// Compare the QFI of a mixture with that of its flagged extension.
pub fn qfi_ensemble_check(
    weights: &[f64],
    families: &[(ComplexMatrix, ComplexMatrix)],
    cutoff: f64,
) -> Result<EnsembleReport> {
    if weights.len() != families.len() || weights.is_empty() {
        return Err(Error::LengthMismatch {
            expected: families.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter("ensemble weights must be >= 0".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}, expected 1")));
    }
    let d = families[0].0.rows();
    if let Some((bad, _)) = families.iter().find(|(rho, drho)| rho.shape() != (d, d) || drho.shape() != (d, d)) {
        return Err(Error::ShapeMismatch {
            op: "ensemble member",
            left: bad.shape(),
            right: (d, d),
        });
    }
    let k = weights.len();
    check_dense(d * k)?;

    let mut rho_e = ComplexMatrix::zeros(d, d);
    let mut drho_e = ComplexMatrix::zeros(d, d);
    let mut rho_ex = ComplexMatrix::zeros(d * k, d * k);
    let mut drho_ex = ComplexMatrix::zeros(d * k, d * k);
    let mut weighted_sum = 0.0;
    for (j, (&p, (rho, drho))) in weights.iter().zip(families).enumerate() {
        rho_e = &rho_e + &rho.scale_real(p);
        drho_e = &drho_e + &drho.scale_real(p);
        let flag = ComplexMatrix::from_fn(k, k, |a, b| if a == j && b == j { 1.0.into() } else { 0.0.into() });
        rho_ex = &rho_ex + &kron_all(&[rho.scale_real(p), flag.clone()]);
        drho_ex = &drho_ex + &kron_all(&[drho.scale_real(p), flag]);
        if p > 0.0 {
            weighted_sum += p * qfi(rho, &Derivative::analytic(drho.clone()), cutoff)?.value;
        }
    }
    let i_e = qfi(&rho_e.hermitian_part(), &Derivative::analytic(drho_e.hermitian_part()), cutoff)?.value;
    let i_ex = qfi(&rho_ex, &Derivative::analytic(drho_ex), cutoff)?.value;
    Ok(EnsembleReport {
        i_e,
        i_ex,
        weighted_sum,
        passed: i_e <= i_ex + ENSEMBLE_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparableReport {
    pub n: usize,
    pub trials: usize,
    /// Analytic single-qubit maximum for the phase gate.
    pub i_bound: f64,
    /// Largest single-qubit QFI among the sampled pure factors.
    pub empirical_single_max: f64,
    pub max_qfi: f64,
    pub violations: usize,
    pub max_trace_rho_sld: f64,
    /// QFI of the `n`-qubit GHZ state under the same evolution.
    pub ghz_foil_qfi: f64,
    pub passed: bool,
}

struct SeparableSample {
    weights: Vec<f64>,
    /// `components[k][i]` is the pure state of qubit `i` in product `k`.
    components: Vec<Vec<ComplexMatrix>>,
}

fn sample_separable<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SeparableSample {
    let m = rng.random_range(1..=MAX_MIXTURE);
    let weights = dirichlet_weights(m, rng);
    let components = (0..m)
        .map(|_| (0..n).map(|_| random_pure_vector(2, rng)).collect())
        .collect();
    SeparableSample { weights, components }
}

/// Sample separable `n`-qubit states, imprint a phase with `e^{-iφ n̂}` on
/// every qubit, and compare the QFI with `n · I_bound`.
pub fn separable_bound_check(n: usize, trials: usize, seed: u64) -> Result<SeparableReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and trials >= 1".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::BudgetExceeded {
            dim: 1usize << n.min(63),
            budget: MAX_DENSE_DIM,
        });
    }
    let mut rng = seeded(seed);
    let samples: Vec<SeparableSample> = (0..trials).map(|_| sample_separable(n, &mut rng)).collect();
    let i_bound = 1.0;
    let generator = excitation_number(n);
    let single_generator = excitation_number(1);

    let evaluated: Vec<Result<(f64, f64, f64)>> = samples
        .par_iter()
        .map(|s| {
            let mut rho = ComplexMatrix::zeros(1 << n, 1 << n);
            let mut single_max = 0.0f64;
            for (&p, comp) in s.weights.iter().zip(&s.components) {
                let projectors: Vec<ComplexMatrix> = comp.iter().map(|v| outer(v, v)).collect();
                for proj in &projectors {
                    let fam = diagonal_generator_family(proj.clone(), single_generator.clone())?;
                    single_max = single_max.max(family_qfi(&fam, DEFAULT_PHI, DEFAULT_STEP, DEFAULT_CUTOFF)?.value);
                }
                rho = &rho + &kron_all(&projectors).scale_real(p);
            }
            let fam = diagonal_generator_family(rho.hermitian_part(), generator.clone())?;
            let r = family_qfi(&fam, DEFAULT_PHI, DEFAULT_STEP, DEFAULT_CUTOFF)?;
            Ok((r.value, single_max, r.trace_rho_sld))
        })
        .collect();

    let mut max_qfi = 0.0f64;
    let mut empirical_single_max = 0.0f64;
    let mut max_trace_rho_sld = 0.0f64;
    let mut violations = 0;
    for r in evaluated {
        let (value, single, tr) = r?;
        max_qfi = max_qfi.max(value);
        empirical_single_max = empirical_single_max.max(single);
        max_trace_rho_sld = max_trace_rho_sld.max(tr);
        if value > n as f64 * i_bound + SEPARABLE_TOL {
            violations += 1;
        }
    }

    let ghz_foil_qfi = family_qfi(&ghz_family(n, 0.0)?, DEFAULT_PHI, DEFAULT_STEP, DEFAULT_CUTOFF)?.value;
    Ok(SeparableReport {
        n,
        trials,
        i_bound,
        empirical_single_max,
        max_qfi,
        violations,
        max_trace_rho_sld,
        ghz_foil_qfi,
        passed: violations == 0 && empirical_single_max <= i_bound + SEPARABLE_TOL,
    })
}
