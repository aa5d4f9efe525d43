//! Channels in Kraus form and the Schur-product (dephasing) channels that
//! commute with a classical structure.
//!
//! A correlation matrix `B` (PSD, unit diagonal) defines the channel
//! `ρ ↦ B* ∘ ρ`, the Schur product taken in the coordinates of the
//! structure's basis. Its Kraus operators come from the spectral decomposition
//! `B = Σ_s |χ_s⟩⟨χ_s|` as `b_s = Σ_j ⟨χ_s|j⟩ |j⟩⟨j|`.
//!
//! Phase conventions: under `B* ∘ ρ`, the pure-phase matrix
//! `B_jk = e^{-i(φ_j - φ_k)}` acts as conjugation by `diag(e^{+iφ_j})`, and
//! the qubit matrix with off-diagonal `e^{-γ-iφ}` rotates coherences as
//! `e^{+iφσ_z/2}` does.

use std::f64::consts::PI;

use crate::classical::ClassicalStructure;
use crate::error::{Error, Result};
use crate::matrix::{
    hermitian_eig, is_psd, kron, schur_product, Complex64, ComplexMatrix, C_ONE, HERMITIAN_TOL,
};

/// Tolerance on trace, Hermiticity and positivity of input states.
pub const STATE_TOL: f64 = 1e-8;
/// Tolerance for CPTP validation of constructed channels.
pub const CPTP_TOL: f64 = 1e-8;
/// Relative eigenvalue cutoff below which spectral components of `B` are dropped.
pub const KRAUS_CUTOFF: f64 = 1e-12;

/// Check that `rho` is a `dim x dim` density matrix within [`STATE_TOL`].
pub fn validate_state(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.shape() != (dim, dim) {
        return Err(Error::InvalidState(format!(
            "expected {dim}x{dim}, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let herm = rho.hermiticity_defect().unwrap_or(f64::INFINITY);
    if herm > STATE_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (asymmetry {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C_ONE).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let psd = is_psd(rho, STATE_TOL)?;
    if !psd.is_psd {
        return Err(Error::InvalidState(format!(
            "not positive semidefinite (min eigenvalue {:e})",
            psd.min_eigenvalue
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Structural validation only: a non-empty list of equally shaped Kraus
    /// operators. Use [`is_cptp`] to validate trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let shape = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != shape) {
            return Err(Error::ShapeMismatch {
                op: "Kraus list",
                left: shape,
                right: bad.shape(),
            });
        }
        Ok(Self {
            dim_in: shape.1,
            dim_out: shape.0,
            kraus,
        })
    }

    /// Like [`QuantumChannel::new`], additionally rejecting non-CPTP lists.
    pub fn new_cptp(kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let ch = Self::new(kraus)?;
        let report = is_cptp(&ch, tol);
        if !report.passed {
            return Err(Error::InvalidChannel(format!(
                "not CPTP: trace defect {:e}, min Choi eigenvalue {:e}",
                report.trace_defect, report.min_choi_eigenvalue
            )));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![ComplexMatrix::identity(d)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ_t k_t · m · k_t†` for any `dim_in x dim_in` operator `m`.
    pub fn apply_to_operator(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * m) * &k.dagger());
        }
        out
    }
}

/// Apply a channel to a density matrix. The output is re-symmetrized.
pub fn apply(ch: &QuantumChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    validate_state(rho, ch.dim_in)?;
    Ok(ch.apply_to_operator(rho).hermitian_part())
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CptpReport {
    /// `max |Σ k†k − I|`.
    pub trace_defect: f64,
    pub min_choi_eigenvalue: f64,
    pub passed: bool,
}

pub fn is_cptp(ch: &QuantumChannel, tol: f64) -> CptpReport {
    let mut sum = ComplexMatrix::zeros(ch.dim_in, ch.dim_in);
    for k in &ch.kraus {
        sum = &sum + &(&k.dagger() * k);
    }
    let trace_defect = sum.max_abs_diff(&ComplexMatrix::identity(ch.dim_in));
    let min_choi_eigenvalue = hermitian_eig(&choi(ch), HERMITIAN_TOL)
        .map(|e| e.eigenvalues[0])
        .unwrap_or(f64::NEG_INFINITY);
    CptpReport {
        trace_defect,
        min_choi_eigenvalue,
        passed: trace_defect <= tol && min_choi_eigenvalue >= -tol,
    }
}

/// Choi matrix `Σ_{jk} |j⟩⟨k| ⊗ ch(|j⟩⟨k|)`, i.e. `(id ⊗ ch)` applied to the
/// unnormalized cup `Σ_{jk} |jj⟩⟨kk|`. Trace equals `dim_in` for CPTP maps.
pub fn choi(ch: &QuantumChannel) -> ComplexMatrix {
    let d = ch.dim_in;
    let mut out = ComplexMatrix::zeros(d * ch.dim_out, d * ch.dim_out);
    for j in 0..d {
        for k in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(j, k)] = C_ONE;
            let block = kron(&unit, &ch.apply_to_operator(&unit));
            out = &out + &block;
        }
    }
    out
}

/// Single-Kraus channel `ρ ↦ u ρ u†`.
pub fn lift_operator(u: ComplexMatrix) -> QuantumChannel {
    QuantumChannel::new(vec![u]).expect("one Kraus operator")
}

/// Positive semidefinite matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    b: ComplexMatrix,
}

impl CorrelationMatrix {
    pub fn new(b: ComplexMatrix) -> Result<Self> {
        let herm = b.hermiticity_defect().ok_or(Error::NotSquare {
            op: "correlation matrix",
            rows: b.rows(),
            cols: b.cols(),
        })?;
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidCorrelation(format!("not Hermitian (asymmetry {herm:e})")));
        }
        if let Some((j, z)) = b.diagonal().into_iter().enumerate().find(|(_, z)| (z - C_ONE).norm() >= 1e-10) {
            return Err(Error::InvalidCorrelation(format!("diagonal entry {j} is {z}, expected 1")));
        }
        let psd = is_psd(&b, CPTP_TOL)?;
        if !psd.is_psd {
            return Err(Error::InvalidCorrelation(format!(
                "not positive semidefinite (min eigenvalue {:e})",
                psd.min_eigenvalue
            )));
        }
        Ok(Self { b })
    }

    pub fn dim(&self) -> usize {
        self.b.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.b
    }

    /// Schur product of two correlation matrices, itself a correlation matrix.
    pub fn schur(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            b: schur_product(&self.b, &other.b)?,
        })
    }

    /// The all-ones matrix (identity channel).
    pub fn ones(d: usize) -> Self {
        Self {
            b: ComplexMatrix::ones(d, d),
        }
    }
}

fn check_dims(cs: &ClassicalStructure, b: &CorrelationMatrix) -> Result<()> {
    if cs.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            op: "correlation vs basis",
            left: (b.dim(), b.dim()),
            right: (cs.dim(), cs.dim()),
        });
    }
    Ok(())
}

/// Kraus form of `ρ ↦ B* ∘ ρ` from the spectral decomposition of `B`.
pub fn schur_channel(cs: &ClassicalStructure, b: &CorrelationMatrix) -> Result<QuantumChannel> {
    check_dims(cs, b)?;
    let eig = hermitian_eig(b.matrix(), HERMITIAN_TOL)?;
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let d = cs.dim();
    let kraus: Vec<ComplexMatrix> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= KRAUS_CUTOFF * lambda_max)
        .map(|(s, &l)| {
            let amp = l.sqrt();
            // ⟨χ_s|j⟩ with χ_s = √λ_s v_s in basis coordinates.
            let diag: Vec<Complex64> = (0..d).map(|j| (eig.eigenvectors[(j, s)] * amp).conj()).collect();
            cs.diagonal_operator(&diag)
        })
        .collect();
    QuantumChannel::new(kraus)
}

/// `ρ ↦ U (B* ∘ (U† ρ U)) U†` where `U` holds the basis as columns.
pub fn apply_schur(cs: &ClassicalStructure, b: &CorrelationMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(cs, b)?;
    validate_state(rho, cs.dim())?;
    Ok(apply_schur_unchecked(cs, b, rho))
}

pub(crate) fn apply_schur_unchecked(cs: &ClassicalStructure, b: &CorrelationMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    let coords = cs.to_basis_coords(m);
    let damped = schur_product(&b.matrix().conj(), &coords).expect("dimensions checked");
    cs.from_basis_coords(&damped).hermitian_part()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("dephasing rate must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

/// `[[1, e^{-γ-iφ}], [e^{-γ+iφ}, 1]]`.
pub fn qubit_dephasing_b(gamma: f64, phi: f64) -> Result<CorrelationMatrix> {
    check_gamma(gamma)?;
    if !phi.is_finite() {
        return Err(Error::InvalidParameter(format!("phase must be finite, got {phi}")));
    }
    let off = Complex64::from_polar((-gamma).exp(), -phi);
    CorrelationMatrix::new(ComplexMatrix::from_rows(&[vec![C_ONE, off], vec![off.conj(), C_ONE]]))
}

/// `p = (1 − e^{−γ}) / 2`.
pub fn phase_flip_probability(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-(-gamma).exp_m1() / 2.0)
}

/// Rotation `e^{+iφσ_z/2} = diag(e^{iφ/2}, e^{-iφ/2})`, the unitary whose
/// conjugation matches the phase of [`qubit_dephasing_b`].
pub fn qubit_rotation(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, phi / 2.0), Complex64::from_polar(1.0, -phi / 2.0)])
}

/// `V ((1−p) ρ + p Z ρ Z) V†` with `V = e^{+iφσ_z/2}` as a Kraus channel.
pub fn phase_flip_channel(gamma: f64, phi: f64) -> Result<QuantumChannel> {
    let p = phase_flip_probability(gamma)?;
    let v = qubit_rotation(phi);
    let z = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
    QuantumChannel::new(vec![v.scale_real((1.0 - p).sqrt()), (&v * &z).scale_real(p.sqrt())])
}

/// `B_jk = e^{-i(φ_j − φ_k)}`: rank one, unit diagonal.
pub fn pure_phase_b(phases: &[f64]) -> Result<CorrelationMatrix> {
    if phases.is_empty() || phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter("phases must be a non-empty list of finite reals".into()));
    }
    let chi: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, -p)).collect();
    let n = phases.len();
    CorrelationMatrix::new(ComplexMatrix::from_fn(n, n, |j, k| chi[j] * chi[k].conj()))
}

/// Phases `φ_j` and non-negative weights `r_s` summing to one, defining the
/// roots-of-unity dephasing family in dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct DephasingFamilySpec {
    dim: usize,
    phases: Vec<f64>,
    weights: Vec<f64>,
}

impl DephasingFamilySpec {
    pub fn new(phases: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let dim = phases.len();
        if dim == 0 || weights.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "need one weight per phase, got {} phases and {} weights",
                dim,
                weights.len()
            )));
        }
        if phases.iter().chain(&weights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("phases and weights must be finite".into()));
        }
        if weights.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidParameter(format!("weights must be >= 0, got {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { dim, phases, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `χ_s = √r_s Σ_j e^{-iφ_j} ω_j^s |j⟩` with `ω_j = e^{-2πij/n}`.
pub fn family_vectors(spec: &DephasingFamilySpec) -> Vec<ComplexMatrix> {
    let n = spec.dim;
    (0..n)
        .map(|s| {
            let amp = spec.weights[s].sqrt();
            let entries: Vec<Complex64> = (0..n)
                .map(|j| {
                    let angle = -spec.phases[j] - 2.0 * PI * (j * s) as f64 / n as f64;
                    Complex64::from_polar(amp, angle)
                })
                .collect();
            ComplexMatrix::column(&entries)
        })
        .collect()
}

/// `B = Σ_s |χ_s⟩⟨χ_s|`.
pub fn dephasing_family_b(spec: &DephasingFamilySpec) -> Result<CorrelationMatrix> {
    let n = spec.dim;
    let mut b = ComplexMatrix::zeros(n, n);
    for chi in family_vectors(spec) {
        b = &b + &(&chi * &chi.dagger());
    }
    CorrelationMatrix::new(b.hermitian_part())
}

/// Explicit family Kraus operators `b_s = Σ_j ⟨χ_s|j⟩ |j⟩⟨j|` in the
/// computational basis, one per non-zero weight.
pub fn family_kraus(spec: &DephasingFamilySpec) -> Vec<ComplexMatrix> {
    family_vectors(spec)
        .into_iter()
        .zip(&spec.weights)
        .filter(|(_, &r)| r > 0.0)
        .map(|(chi, _)| ComplexMatrix::from_diag(&chi.conj().into_vec()))
        .collect()
}

/// Recover `B` from Kraus operators that are diagonal in the basis:
/// `B_jk = Σ_t conj(k_t[j]) k_t[k]` with `k_t[j] = ⟨b_j|k_t|b_j⟩`.
pub fn correlation_from_kraus(cs: &ClassicalStructure, kraus: &[ComplexMatrix]) -> Result<CorrelationMatrix> {
    let d = cs.dim();
    let mut b = ComplexMatrix::zeros(d, d);
    for k in kraus {
        let deviation = crate::classical::commutation_defect(cs, k)?;
        if deviation > crate::classical::COMMUTATION_TOL {
            return Err(Error::NotCommuting { deviation });
        }
        let diag = crate::classical::diagonal_entries(cs, k);
        b = &b + &ComplexMatrix::from_fn(d, d, |j, l| diag[j].conj() * diag[l]);
    }
    CorrelationMatrix::new(b.hermitian_part())
}
