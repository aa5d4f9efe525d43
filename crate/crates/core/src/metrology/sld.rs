//! Symmetric logarithmic derivative and quantum Fisher information.

use serde::Serialize;

use super::families::ParametrizedFamily;
use crate::channels::validate_state;
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, ComplexMatrix, HERMITIAN_TOL};

/// Relative support cutoff: pairs with `λ_j + λ_k ≤ cutoff · λ_max` are kernel.
pub const DEFAULT_CUTOFF: f64 = 1e-10;
/// Central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Parameter value at which QFI is evaluated.
pub const DEFAULT_PHI: f64 = 0.3;

/// Largest derivative weight tolerated between two kernel directions.
const LEAK_TOL: f64 = 1e-8;
/// Hermiticity and tracelessness tolerance on `∂ρ/∂φ`.
const DERIVATIVE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    AnalyticDerivative,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub matrix: ComplexMatrix,
    pub method: DerivativeMethod,
}

impl Derivative {
    pub fn analytic(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            method: DerivativeMethod::AnalyticDerivative,
        }
    }
}

fn check_derivative(drho: &ComplexMatrix) -> Result<()> {
    let herm = drho.hermiticity_defect().ok_or(Error::NotSquare {
        op: "state derivative",
        rows: drho.rows(),
        cols: drho.cols(),
    })?;
    if herm > DERIVATIVE_TOL {
        return Err(Error::NotHermitian { max_asymmetry: herm });
    }
    let tr = drho.trace().norm();
    if tr > DERIVATIVE_TOL {
        return Err(Error::InvalidState(format!("state derivative has trace {tr:e}, expected 0")));
    }
    Ok(())
}

/// `(ρ(φ+h) − ρ(φ−h)) / 2h`.
pub fn finite_difference(fam: &ParametrizedFamily, phi: f64, h: f64) -> Result<Derivative> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {h}")));
    }
    let plus = fam.state(phi + h)?;
    let minus = fam.state(phi - h)?;
    let matrix = (&plus - &minus).scale_real(0.5 / h);
    check_derivative(&matrix)?;
    Ok(Derivative {
        matrix: matrix.hermitian_part(),
        method: DerivativeMethod::FiniteDifference,
    })
}

/// Analytic derivative when the family provides one, central difference otherwise.
pub fn state_derivative(fam: &ParametrizedFamily, phi: f64, h: f64) -> Result<Derivative> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {h}")));
    }
    match fam.analytic_derivative(phi) {
        Some(matrix) => {
            let matrix = matrix?;
            check_derivative(&matrix)?;
            Ok(Derivative::analytic(matrix))
        }
        None => finite_difference(fam, phi, h),
    }
}

#[derive(Clone, Debug)]
struct SldSolution {
    sld: ComplexMatrix,
    threshold: f64,
    residual: f64,
}

fn solve_sld(rho: &ComplexMatrix, drho: &ComplexMatrix, cutoff: f64) -> Result<SldSolution> {
    validate_state(rho, rho.rows())?;
    if drho.shape() != rho.shape() {
        return Err(Error::ShapeMismatch {
            op: "sld",
            left: rho.shape(),
            right: drho.shape(),
        });
    }
    check_derivative(drho)?;

    let eig = hermitian_eig(rho, HERMITIAN_TOL)?;
    let v = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let lambda_max = lambda.iter().copied().fold(0.0, f64::max);
    let threshold = cutoff * lambda_max;
    let n = rho.rows();

    let d_eig = &(&v.dagger() * drho) * v;
    let mut l_eig = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let s = lambda[j] + lambda[k];
            if s > threshold {
                l_eig[(j, k)] = d_eig[(j, k)] * (2.0 / s);
            } else if d_eig[(j, k)].norm() > LEAK_TOL {
                return Err(Error::SupportLeak {
                    weight: d_eig[(j, k)].norm(),
                });
            }
        }
    }

    // ½(Lρ + ρL) − ∂ρ in the eigenbasis, restricted to the support block.
    let mut residual = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            if lambda[j] + lambda[k] > threshold {
                let lhs = l_eig[(j, k)] * (0.5 * (lambda[j] + lambda[k]));
                residual = residual.max((lhs - d_eig[(j, k)]).norm());
            }
        }
    }

    let sld = (&(v * &l_eig) * &v.dagger()).hermitian_part();
    Ok(SldSolution {
        sld,
        threshold,
        residual,
    })
}

/// Hermitian `L` solving `½(Lρ + ρL) = ∂ρ` on the support of `ρ`, zero on
/// the kernel block.
pub fn sld(rho: &ComplexMatrix, drho: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    Ok(solve_sld(rho, drho, cutoff)?.sld)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QfiResult {
    /// `Tr ρ L²`, clamped at zero.
    pub value: f64,
    pub sld: ComplexMatrix,
    /// Absolute threshold on `λ_j + λ_k` that was applied.
    pub support_cutoff_used: f64,
    pub method: DerivativeMethod,
    /// `Tr ρ L`, zero for a valid SLD.
    pub trace_rho_sld: f64,
    /// Max entry of `½(Lρ + ρL) − ∂ρ` on the support block.
    pub residual: f64,
}

pub fn qfi(rho: &ComplexMatrix, drho: &Derivative, cutoff: f64) -> Result<QfiResult> {
    let sol = solve_sld(rho, &drho.matrix, cutoff)?;
    let rho_l = rho * &sol.sld;
    let value = (&rho_l * &sol.sld).trace().re.max(0.0);
    Ok(QfiResult {
        value,
        trace_rho_sld: rho_l.trace().norm(),
        sld: sol.sld,
        support_cutoff_used: sol.threshold,
        method: drho.method,
        residual: sol.residual,
    })
}

/// QFI of a family at `phi`, using [`state_derivative`].
pub fn family_qfi(fam: &ParametrizedFamily, phi: f64, h: f64, cutoff: f64) -> Result<QfiResult> {
    let rho = fam.state(phi)?;
    qfi(&rho, &state_derivative(fam, phi, h)?, cutoff)
}

/// QFI of a family at `phi`, always from a central difference.
pub fn family_qfi_finite_difference(fam: &ParametrizedFamily, phi: f64, h: f64, cutoff: f64) -> Result<QfiResult> {
    let rho = fam.state(phi)?;
    qfi(&rho, &finite_difference(fam, phi, h)?, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{outer, Complex64, C_I};
    use crate::metrology::families::{dephased_qubit_family, sequential_family};
    use crate::random::{haar_unitary, random_density_matrix, random_pure_vector, seeded};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_family_has_zero_derivative() {
        let rho = random_density_matrix(3, &mut seeded(1));
        let fam = ParametrizedFamily::new(3, "constant", move |_| Ok(rho.clone()));
        let d = state_derivative(&fam, 0.3, 1e-5).unwrap();
        assert_eq!(d.method, DerivativeMethod::FiniteDifference);
        assert!(d.matrix.max_abs() < 1e-15);
    }

    #[test]
    fn plus_state_phase_derivative() {
        let fam = dephased_qubit_family(0.0).unwrap();
        let expected = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.5)], vec![c(0.0, -0.5), c(0.0, 0.0)]]);
        let analytic = state_derivative(&fam, 0.0, 1e-5).unwrap();
        assert_eq!(analytic.method, DerivativeMethod::AnalyticDerivative);
        assert!(analytic.matrix.max_abs_diff(&expected) < 1e-15);
        let fd = finite_difference(&fam, 0.0, 1e-5).unwrap();
        assert!(fd.matrix.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn finite_difference_matches_analytic_for_dephased_family() {
        for &gamma in &[0.0, 0.4, 1.3] {
            let fam = sequential_family(3, gamma).unwrap();
            let an = state_derivative(&fam, 0.3, 1e-5).unwrap();
            let fd = finite_difference(&fam, 0.3, 1e-5).unwrap();
            assert!(an.matrix.max_abs_diff(&fd.matrix) < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_step_and_bad_family() {
        let fam = dephased_qubit_family(0.0).unwrap();
        assert!(state_derivative(&fam, 0.0, 0.0).is_err());
        let bad = ParametrizedFamily::new(2, "non-Hermitian drift", |phi| {
            Ok(ComplexMatrix::from_rows(&[
                vec![c(0.5, 0.0), c(phi, 0.0)],
                vec![c(0.0, 0.0), c(0.5, 0.0)],
            ]))
        });
        // The family itself is not a valid state away from φ = 0.
        assert!(finite_difference(&bad, 0.2, 1e-5).is_err());
    }

    #[test]
    fn maximally_mixed_sld_is_twice_derivative() {
        let rho = ComplexMatrix::identity(2).scale_real(0.5);
        let drho = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.5)], vec![c(0.0, -0.5), c(0.0, 0.0)]]);
        let l = sld(&rho, &drho, DEFAULT_CUTOFF).unwrap();
        // −σ_y
        let expected = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), C_I], vec![-C_I, c(0.0, 0.0)]]);
        assert!(l.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn zero_derivative_gives_zero_sld() {
        let rho = random_density_matrix(3, &mut seeded(2));
        let l = sld(&rho, &ComplexMatrix::zeros(3, 3), DEFAULT_CUTOFF).unwrap();
        assert!(l.max_abs() < 1e-15);
    }

    #[test]
    fn pure_state_sld_is_twice_derivative() {
        let mut rng = seeded(3);
        let psi = random_pure_vector(3, &mut rng);
        let rho = outer(&psi, &psi);
        // Unitary motion generated by a random Hermitian H: ∂ρ = −i[H, ρ].
        let g = haar_unitary(3, &mut rng);
        let h = (&g + &g.dagger()).scale_real(0.5);
        let drho = (&(&h * &rho) - &(&rho * &h)).scale(-C_I);
        let l = sld(&rho, &drho, DEFAULT_CUTOFF).unwrap();
        // For pure states 2∂ρ solves the defining equation exactly.
        let two_d = drho.scale_real(2.0);
        let lhs = (&(&l * &rho) + &(&rho * &l)).scale_real(0.5);
        assert!(lhs.max_abs_diff(&drho) < 1e-12);
        let lhs2 = (&(&two_d * &rho) + &(&rho * &two_d)).scale_real(0.5);
        assert!(lhs2.max_abs_diff(&drho) < 1e-12);
        // L and 2∂ρ agree on the support-coupled block: L|ψ⟩ = 2∂ρ|ψ⟩.
        assert!((&l * &psi).max_abs_diff(&(&two_d * &psi)) < 1e-12);
    }

    #[test]
    fn kernel_leak_is_rejected() {
        let rho = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let drho = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, -0.5]]);
        assert!(matches!(sld(&rho, &drho, DEFAULT_CUTOFF), Err(Error::SupportLeak { .. })));
    }

    #[test]
    fn qfi_simple_values() {
        let fam = dephased_qubit_family(0.0).unwrap();
        let r = family_qfi(&fam, DEFAULT_PHI, DEFAULT_STEP, DEFAULT_CUTOFF).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.trace_rho_sld < 1e-12);

        let fully = dephased_qubit_family(50.0).unwrap();
        let r = family_qfi(&fully, DEFAULT_PHI, DEFAULT_STEP, DEFAULT_CUTOFF).unwrap();
        assert!(r.value < 1e-20);
    }

    #[test]
    fn sld_residual_small_for_random_full_rank_states() {
        let mut rng = seeded(4);
        for d in [2, 3, 5, 8] {
            let rho = random_density_matrix(d, &mut rng);
            let g = haar_unitary(d, &mut rng);
            let h = (&g + &g.dagger()).scale_real(0.5);
            let drho = (&(&h * &rho) - &(&rho * &h)).scale(-C_I);
            let r = qfi(&rho, &Derivative::analytic(drho.clone()), DEFAULT_CUTOFF).unwrap();
            let l = &r.sld;
            let lhs = (&(l * &rho) + &(&rho * l)).scale_real(0.5);
            assert!(lhs.max_abs_diff(&drho) < 1e-8, "d={d}");
            assert!(r.residual < 1e-8);
            assert!(r.trace_rho_sld < 1e-6);
            assert!(l.hermiticity_defect().unwrap() < 1e-8);
        }
    }

    #[test]
    fn qfi_invariant_under_joint_unitary() {
        let mut rng = seeded(5);
        let rho = random_density_matrix(4, &mut rng);
        let g = haar_unitary(4, &mut rng);
        let h = (&g + &g.dagger()).scale_real(0.5);
        let drho = (&(&h * &rho) - &(&rho * &h)).scale(-C_I);
        let u = haar_unitary(4, &mut rng);
        let conj = |m: &ComplexMatrix| &(&u * m) * &u.dagger();
        let a = qfi(&rho, &Derivative::analytic(drho.clone()), DEFAULT_CUTOFF).unwrap();
        let b = qfi(&conj(&rho).hermitian_part(), &Derivative::analytic(conj(&drho).hermitian_part()), DEFAULT_CUTOFF).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
    }
}
