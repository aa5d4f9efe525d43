//! Classical structures: an orthonormal basis packaged as its copy isometry
//! `δ = Σ_j |b_j b_j⟩⟨b_j|` together with the unnormalized unit `Σ_j |b_j⟩`.
//!
//! Operators diagonal in the basis are exactly the operators that commute
//! with `δ`; [`diagonal_from_state`] and [`state_from_diagonal`] are the two
//! directions of that correspondence.

use crate::error::{Error, Result};
use crate::matrix::{apply_on_factor, kron, swap_matrix, Complex64, ComplexMatrix};

/// Tolerance for accepting an operator as commuting with the copy map.
pub const COMMUTATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalStructure {
    dim: usize,
    basis: ComplexMatrix,
    copy: ComplexMatrix,
    unit: ComplexMatrix,
}

impl ClassicalStructure {
    /// Build from a unitary whose columns are the basis vectors.
    pub fn new(basis: ComplexMatrix, tol: f64) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::NotSquare {
                op: "classical structure basis",
                rows: basis.rows(),
                cols: basis.cols(),
            });
        }
        let d = basis.rows();
        let defect = (&basis.dagger() * &basis).max_abs_diff(&ComplexMatrix::identity(d));
        if defect > tol {
            return Err(Error::NotUnitary { defect });
        }

        let mut copy = ComplexMatrix::zeros(d * d, d);
        let mut unit = ComplexMatrix::zeros(d, 1);
        for j in 0..d {
            let b = basis.col(j);
            copy = &copy + &(&kron(&b, &b) * &b.dagger());
            unit = &unit + &b;
        }
        Ok(Self {
            dim: d,
            basis,
            copy,
            unit,
        })
    }

    pub fn computational(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d), 0.0).expect("identity is unitary")
    }

    /// Discrete Fourier basis, `b_j[k] = e^{2πi jk/d} / √d`; for `d = 2` this
    /// is the Hadamard basis.
    pub fn fourier(d: usize) -> Self {
        let norm = 1.0 / (d as f64).sqrt();
        let basis = ComplexMatrix::from_fn(d, d, |k, j| {
            let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
            Complex64::from_polar(norm, angle)
        });
        Self::new(basis, 1e-12).expect("Fourier matrix is unitary")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// `δ`, a `d² x d` isometry.
    pub fn copy(&self) -> &ComplexMatrix {
        &self.copy
    }

    /// Unnormalized equal superposition `Σ_j b_j` (norm `√d`).
    pub fn unit(&self) -> &ComplexMatrix {
        &self.unit
    }

    /// Basis vector `b_j` as a column.
    pub fn basis_vector(&self, j: usize) -> ComplexMatrix {
        self.basis.col(j)
    }

    /// `U† · m · U`: operator `m` in basis coordinates.
    pub fn to_basis_coords(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.basis.dagger() * m) * &self.basis
    }

    /// `U · m · U†`: inverse of [`Self::to_basis_coords`].
    pub fn from_basis_coords(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.basis * m) * &self.basis.dagger()
    }

    /// `Σ_j diag[j] · b_j b_j†`.
    pub fn diagonal_operator(&self, diag: &[Complex64]) -> ComplexMatrix {
        assert_eq!(diag.len(), self.dim);
        self.from_basis_coords(&ComplexMatrix::from_diag(diag))
    }
}

/// `δ_n = Σ_j b_j^{⊗n} b_j†`, built as the left fold `(δ ⊗ I…) · … · δ`.
pub fn nfold_copy(cs: &ClassicalStructure, n: usize) -> Result<ComplexMatrix> {
    nfold_copy_by(cs, n, |_| 0)
}

/// Build `δ_n` by repeatedly splitting one wire: at a stage with `k` wires,
/// `choose_site(k)` picks which wire receives the next `δ`. Every choice gives
/// the same isometry.
pub fn nfold_copy_by(
    cs: &ClassicalStructure,
    n: usize,
    mut choose_site: impl FnMut(usize) -> usize,
) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n-fold copy requires n >= 1".into()));
    }
    let d = cs.dim;
    let mut acc = ComplexMatrix::identity(d);
    for k in 1..n {
        let site = choose_site(k);
        acc = apply_on_factor(&cs.copy, &acc, &vec![d; k], site)?;
    }
    Ok(acc)
}

/// Max-entry deviation of each classical-structure identity.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AxiomReport {
    pub associativity_err: f64,
    pub isometry_err: f64,
    pub commutativity_err: f64,
    pub frobenius_err: f64,
    pub counit_err: f64,
}

impl AxiomReport {
    /// Evaluate the identities for an arbitrary copy map (`d² x d`) and unit
    /// (`d x 1`), each as an explicit matrix equation.
    pub fn evaluate(copy: &ComplexMatrix, unit: &ComplexMatrix) -> Self {
        let d = unit.rows();
        assert_eq!(copy.shape(), (d * d, d), "copy map must be d² x d");
        let id = ComplexMatrix::identity(d);
        let copy_dag = copy.dagger();

        let left_assoc = &kron(copy, &id) * copy;
        let right_assoc = &kron(&id, copy) * copy;
        let associativity_err = left_assoc.max_abs_diff(&right_assoc);

        let isometry_err = (&copy_dag * copy).max_abs_diff(&id);

        let commutativity_err = (&swap_matrix(d) * copy).max_abs_diff(copy);

        let merge_split = copy * &copy_dag;
        let frob_left = &kron(&copy_dag, &id) * &kron(&id, copy);
        let frob_right = &kron(&id, &copy_dag) * &kron(copy, &id);
        let frobenius_err = frob_left
            .max_abs_diff(&merge_split)
            .max(frob_right.max_abs_diff(&merge_split));

        let counit = unit.dagger();
        let counit_left = &kron(&counit, &id) * copy;
        let counit_right = &kron(&id, &counit) * copy;
        let counit_err = counit_left.max_abs_diff(&id).max(counit_right.max_abs_diff(&id));

        Self {
            associativity_err,
            isometry_err,
            commutativity_err,
            frobenius_err,
            counit_err,
        }
    }

    pub fn max_error(&self) -> f64 {
        [
            self.associativity_err,
            self.isometry_err,
            self.commutativity_err,
            self.frobenius_err,
            self.counit_err,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("associativity", self.associativity_err),
            ("isometry", self.isometry_err),
            ("commutativity", self.commutativity_err),
            ("frobenius", self.frobenius_err),
            ("counit", self.counit_err),
        ]
    }
}

pub fn verify_axioms(cs: &ClassicalStructure) -> AxiomReport {
    AxiomReport::evaluate(&cs.copy, &cs.unit)
}

/// `max |δ·f − (f ⊗ I)·δ|`.
pub fn commutation_defect(cs: &ClassicalStructure, f: &ComplexMatrix) -> Result<f64> {
    let d = cs.dim;
    if f.shape() != (d, d) {
        return Err(Error::ShapeMismatch {
            op: "commutation_defect",
            left: f.shape(),
            right: (d, d),
        });
    }
    let lhs = &cs.copy * f;
    let rhs = &kron(f, &ComplexMatrix::identity(d)) * &cs.copy;
    Ok(lhs.max_abs_diff(&rhs))
}

/// The operator `(⟨a| ⊗ I)·δ = Σ_j ⟨a|b_j⟩ b_j b_j†` attached to a state `a`.
pub fn diagonal_from_state(cs: &ClassicalStructure, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = cs.dim;
    if a.shape() != (d, 1) {
        return Err(Error::ShapeMismatch {
            op: "diagonal_from_state",
            left: a.shape(),
            right: (d, 1),
        });
    }
    Ok(&kron(&a.dagger(), &ComplexMatrix::identity(d)) * &cs.copy)
}

/// Inverse of [`diagonal_from_state`]: `a = Σ_j conj(⟨b_j|f|b_j⟩) b_j`.
/// Rejects operators that do not commute with `δ`.
pub fn state_from_diagonal(cs: &ClassicalStructure, f: &ComplexMatrix) -> Result<ComplexMatrix> {
    let deviation = commutation_defect(cs, f)?;
    if deviation > COMMUTATION_TOL {
        return Err(Error::NotCommuting { deviation });
    }
    let coords = cs.to_basis_coords(f);
    let mut a = ComplexMatrix::zeros(cs.dim, 1);
    for j in 0..cs.dim {
        let b = cs.basis_vector(j);
        a = &a + &b.scale(coords[(j, j)].conj());
    }
    Ok(a)
}

/// Eigenvalues `⟨b_j|f|b_j⟩` of an operator diagonal in the basis.
pub fn diagonal_entries(cs: &ClassicalStructure, f: &ComplexMatrix) -> Vec<Complex64> {
    cs.to_basis_coords(f).diagonal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C_ONE;
    use crate::random::{complex_gaussian, haar_unitary, seeded};

    fn random_vector(d: usize, seed: u64) -> ComplexMatrix {
        let mut rng = seeded(seed);
        ComplexMatrix::from_fn(d, 1, |_, _| complex_gaussian(&mut rng))
    }

    #[test]
    fn computational_qubit_copy_and_unit() {
        let cs = ClassicalStructure::computational(2);
        let mut expected = ComplexMatrix::zeros(4, 2);
        expected[(0, 0)] = C_ONE;
        expected[(3, 1)] = C_ONE;
        assert_eq!(cs.copy(), &expected);
        assert_eq!(cs.unit(), &ComplexMatrix::column(&[C_ONE, C_ONE]));
    }

    #[test]
    fn copy_is_cnot_onto_ancilla_zero() {
        // CNOT with control on the first wire, ancilla |0⟩ as target.
        let cnot = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let attach_ancilla = kron(&ComplexMatrix::identity(2), &ComplexMatrix::basis_vector(2, 0));
        let circuit = &cnot * &attach_ancilla;
        assert_eq!(&circuit, ClassicalStructure::computational(2).copy());
    }

    #[test]
    fn hadamard_copy_is_isometry() {
        let cs = ClassicalStructure::fourier(2);
        let err = (&cs.copy().dagger() * cs.copy()).max_abs_diff(&ComplexMatrix::identity(2));
        assert!(err < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_basis() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        match ClassicalStructure::new(b, 1e-10) {
            Err(Error::NotUnitary { defect }) => assert!((defect - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nfold_copy_examples() {
        let cs = ClassicalStructure::computational(2);
        assert_eq!(nfold_copy(&cs, 1).unwrap(), ComplexMatrix::identity(2));
        let d3 = nfold_copy(&cs, 3).unwrap();
        let mut expected = ComplexMatrix::zeros(8, 2);
        expected[(0, 0)] = C_ONE;
        expected[(7, 1)] = C_ONE;
        assert_eq!(d3, expected);
        assert!(nfold_copy(&cs, 0).is_err());
    }

    #[test]
    fn nfold_copy_independent_of_fold_order() {
        let cs = ClassicalStructure::new(haar_unitary(3, &mut seeded(11)), 1e-10).unwrap();
        let left = nfold_copy(&cs, 4).unwrap();
        let right = nfold_copy_by(&cs, 4, |k| k - 1).unwrap();
        let middle = nfold_copy_by(&cs, 4, |k| k / 2).unwrap();
        assert!(left.max_abs_diff(&right) < 1e-12);
        assert!(left.max_abs_diff(&middle) < 1e-12);

        // Explicit associativity with dense Kronecker products.
        let id = ComplexMatrix::identity(3);
        let a = &kron(cs.copy(), &id) * cs.copy();
        let b = &kron(&id, cs.copy()) * cs.copy();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!(nfold_copy(&cs, 3).unwrap().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn nfold_copy_matches_sum_formula() {
        let cs = ClassicalStructure::new(haar_unitary(2, &mut seeded(4)), 1e-10).unwrap();
        let n = 4;
        let mut expected = ComplexMatrix::zeros(16, 2);
        for j in 0..2 {
            let b = cs.basis_vector(j);
            let bn = crate::matrix::kron_all(&vec![b.clone(); n]);
            expected = &expected + &(&bn * &b.dagger());
        }
        assert!(nfold_copy(&cs, n).unwrap().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn axioms_exact_for_computational() {
        for d in 1..=6 {
            let r = verify_axioms(&ClassicalStructure::computational(d));
            assert!(r.max_error() < 1e-12, "d={d}: {r:?}");
        }
    }

    #[test]
    fn axioms_hold_for_haar_basis() {
        let cs = ClassicalStructure::new(haar_unitary(4, &mut seeded(2024)), 1e-10).unwrap();
        let r = verify_axioms(&cs);
        assert!(r.max_error() < 1e-10, "{r:?}");
    }

    #[test]
    fn perturbed_copy_is_detected() {
        let cs = ClassicalStructure::computational(3);
        let mut bad = cs.copy().clone();
        bad[(4, 1)] += Complex64::new(1e-3, 0.0);
        let r = AxiomReport::evaluate(&bad, cs.unit());
        assert!(r.max_error() > 1e-4, "{r:?}");
    }

    #[test]
    fn unit_state_gives_identity() {
        let cs = ClassicalStructure::computational(3);
        let f = diagonal_from_state(&cs, cs.unit()).unwrap();
        assert!(f.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        assert_eq!(state_from_diagonal(&cs, &ComplexMatrix::identity(3)).unwrap(), *cs.unit());
    }

    #[test]
    fn phase_state_gives_conjugate_phase() {
        let phi = 0.83;
        let cs = ClassicalStructure::computational(2);
        let a = ComplexMatrix::column(&[C_ONE, Complex64::from_polar(1.0, phi)]);
        let f = diagonal_from_state(&cs, &a).unwrap();
        let expected = ComplexMatrix::from_diag(&[C_ONE, Complex64::from_polar(1.0, -phi)]);
        assert!(f.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn diagonal_operators_commute_with_copy() {
        let cs = ClassicalStructure::new(haar_unitary(3, &mut seeded(8)), 1e-10).unwrap();
        let f = diagonal_from_state(&cs, &random_vector(3, 9)).unwrap();
        let lhs = cs.copy() * &f;
        let rhs = &kron(&f, &ComplexMatrix::identity(3)) * cs.copy();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn state_operator_round_trip() {
        let cs = ClassicalStructure::new(haar_unitary(4, &mut seeded(5)), 1e-10).unwrap();
        for seed in 0..10 {
            let a = random_vector(4, 100 + seed);
            let f = diagonal_from_state(&cs, &a).unwrap();
            let back = state_from_diagonal(&cs, &f).unwrap();
            assert!(back.max_abs_diff(&a) < 1e-12);
        }
    }

    #[test]
    fn pauli_x_is_rejected() {
        let cs = ClassicalStructure::computational(2);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        match state_from_diagonal(&cs, &x) {
            Err(Error::NotCommuting { deviation }) => assert!((deviation - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn copy_cancellation_recovers_operator() {
        let cs = ClassicalStructure::new(haar_unitary(3, &mut seeded(31)), 1e-10).unwrap();
        let f = diagonal_from_state(&cs, &random_vector(3, 32)).unwrap();
        let sandwiched = &(&cs.copy().dagger() * &kron(&ComplexMatrix::identity(3), &f)) * cs.copy();
        assert!(sandwiched.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn copy_projector_is_idempotent() {
        let cs = ClassicalStructure::fourier(3);
        let p = cs.copy() * &cs.copy().dagger();
        assert!((&p * &p).max_abs_diff(&p) < 1e-12);
    }
}
