//! Entangled (parallel) and sequential protocols.
//!
//! Parallel: copy the input onto `n` wires with `δ_n`, apply one commuting
//! operator or channel per wire, then fold back with `δ_n†`. Sequential:
//! apply the same operators or channels one after another on a single system,
//! in any order. For operators and channels that commute with `δ` the two
//! agree exactly.

use crate::channels::{apply_schur, schur_channel, validate_state, CorrelationMatrix, QuantumChannel};
use crate::classical::{commutation_defect, nfold_copy, ClassicalStructure, COMMUTATION_TOL};
use crate::error::{Error, Result};
use crate::matrix::{apply_on_factor, apply_on_factor_right, ComplexMatrix};

/// Largest `dⁿ` a parallel protocol may build.
pub const MAX_TENSOR_DIM: usize = 4096;

/// Tolerance on the trace of the disentangled channel output.
pub const TRACE_RESTORE_TOL: f64 = 1e-8;

fn check_permutation(permutation: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if permutation.len() != n {
        return Err(Error::InvalidPermutation(permutation.to_vec()));
    }
    for &p in permutation {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(permutation.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

fn check_budget(d: usize, n: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.saturating_mul(d);
    }
    if total > MAX_TENSOR_DIM {
        return Err(Error::BudgetExceeded {
            dim: total,
            budget: MAX_TENSOR_DIM,
        });
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct OperatorProtocolSpec {
    cs: ClassicalStructure,
    ops: Vec<ComplexMatrix>,
    permutation: Vec<usize>,
}

impl OperatorProtocolSpec {
    /// Rejects operators that do not commute with the copy map.
    pub fn new(cs: ClassicalStructure, ops: Vec<ComplexMatrix>, permutation: Vec<usize>) -> Result<Self> {
        for f in &ops {
            let deviation = commutation_defect(&cs, f)?;
            if deviation > COMMUTATION_TOL {
                return Err(Error::NotCommuting { deviation });
            }
        }
        Self::new_unchecked(cs, ops, permutation)
    }

    /// Skips the commutation precondition (shapes, permutation and budget are
    /// still checked). Used to demonstrate that the equivalence fails for
    /// non-commuting operators.
    pub fn new_unchecked(cs: ClassicalStructure, ops: Vec<ComplexMatrix>, permutation: Vec<usize>) -> Result<Self> {
        let d = cs.dim();
        if ops.is_empty() {
            return Err(Error::InvalidParameter("protocol needs at least one operator".into()));
        }
        if let Some(bad) = ops.iter().find(|f| f.shape() != (d, d)) {
            return Err(Error::ShapeMismatch {
                op: "protocol operator",
                left: bad.shape(),
                right: (d, d),
            });
        }
        check_permutation(&permutation, ops.len())?;
        check_budget(d, ops.len())?;
        Ok(Self { cs, ops, permutation })
    }

    pub fn cs(&self) -> &ClassicalStructure {
        &self.cs
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn with_permutation(&self, permutation: Vec<usize>) -> Result<Self> {
        check_permutation(&permutation, self.ops.len())?;
        Ok(Self {
            permutation,
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug)]
pub struct ChannelProtocolSpec {
    cs: ClassicalStructure,
    correlations: Vec<CorrelationMatrix>,
    permutation: Vec<usize>,
    input_state: ComplexMatrix,
}

impl ChannelProtocolSpec {
    pub fn new(
        cs: ClassicalStructure,
        correlations: Vec<CorrelationMatrix>,
        permutation: Vec<usize>,
        input_state: ComplexMatrix,
    ) -> Result<Self> {
        let d = cs.dim();
        if correlations.is_empty() {
            return Err(Error::InvalidParameter("protocol needs at least one channel".into()));
        }
        if let Some(bad) = correlations.iter().find(|b| b.dim() != d) {
            return Err(Error::ShapeMismatch {
                op: "protocol channel",
                left: (bad.dim(), bad.dim()),
                right: (d, d),
            });
        }
        check_permutation(&permutation, correlations.len())?;
        check_budget(d, correlations.len())?;
        validate_state(&input_state, d)?;
        Ok(Self {
            cs,
            correlations,
            permutation,
            input_state,
        })
    }

    pub fn cs(&self) -> &ClassicalStructure {
        &self.cs
    }

    pub fn correlations(&self) -> &[CorrelationMatrix] {
        &self.correlations
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn input_state(&self) -> &ComplexMatrix {
        &self.input_state
    }

    pub fn with_permutation(&self, permutation: Vec<usize>) -> Result<Self> {
        check_permutation(&permutation, self.correlations.len())?;
        Ok(Self {
            permutation,
            ..self.clone()
        })
    }
}

/// `δ_n† · (f_1 ⊗ … ⊗ f_n) · δ_n`, applying each `f_i` on its own wire.
pub fn parallel_operator(spec: &OperatorProtocolSpec) -> Result<ComplexMatrix> {
    let n = spec.ops.len();
    let d = spec.cs.dim();
    let copy_n = nfold_copy(&spec.cs, n)?;
    let dims = vec![d; n];
    let mut acc = copy_n.clone();
    for (site, f) in spec.ops.iter().enumerate() {
        acc = apply_on_factor(f, &acc, &dims, site)?;
    }
    Ok(&copy_n.dagger() * &acc)
}

/// `f_{π(n)} · … · f_{π(1)}`.
pub fn sequential_operator(spec: &OperatorProtocolSpec) -> ComplexMatrix {
    spec.permutation
        .iter()
        .fold(ComplexMatrix::identity(spec.cs.dim()), |acc, &i| &spec.ops[i] * &acc)
}

/// Apply a channel on wire `site` of a register with factor dimensions `dims`.
pub(crate) fn apply_channel_on_factor(
    ch: &QuantumChannel,
    state: &ComplexMatrix,
    dims: &[usize],
    site: usize,
) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(state.rows(), state.cols());
    for k in ch.kraus() {
        let left = apply_on_factor(k, state, dims, site)?;
        out = &out + &apply_on_factor_right(&left, &k.dagger(), dims, site)?;
    }
    Ok(out)
}

/// The `n`-wire state after entangling `input` with `δ_n` and applying the
/// Schur channel of `correlations[i]` on wire `i`.
pub fn entangled_channel_state(
    cs: &ClassicalStructure,
    correlations: &[CorrelationMatrix],
    input: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let d = cs.dim();
    let n = correlations.len();
    check_budget(d, n)?;
    validate_state(input, d)?;
    let copy_n = nfold_copy(cs, n)?;
    let dims = vec![d; n];
    let mut state = &(&copy_n * input) * &copy_n.dagger();
    for (site, b) in correlations.iter().enumerate() {
        let ch = schur_channel(cs, b)?;
        state = apply_channel_on_factor(&ch, &state, &dims, site)?;
    }
    Ok(state.hermitian_part())
}

/// Entangle, apply `ℬ_1 ⊗ … ⊗ ℬ_n`, disentangle with `σ ↦ δ_n† σ δ_n`.
pub fn parallel_channel(spec: &ChannelProtocolSpec) -> Result<ComplexMatrix> {
    let n = spec.correlations.len();
    let state = entangled_channel_state(&spec.cs, &spec.correlations, &spec.input_state)?;
    let copy_n = nfold_copy(&spec.cs, n)?;
    let out = (&(&copy_n.dagger() * &state) * &copy_n).hermitian_part();
    // δ_n† is only trace preserving on the image of δ_n, which diagonal
    // Kraus operators leave invariant.
    let trace = out.trace().re;
    if (trace - 1.0).abs() > TRACE_RESTORE_TOL {
        return Err(Error::TraceNotRestored { trace });
    }
    Ok(out)
}

/// `ℬ_{π(n)}(… ℬ_{π(1)}(ρ) …)`.
pub fn sequential_channel(spec: &ChannelProtocolSpec) -> Result<ComplexMatrix> {
    spec.permutation
        .iter()
        .try_fold(spec.input_state.clone(), |rho, &i| apply_schur(&spec.cs, &spec.correlations[i], &rho))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub max_abs_deviation: f64,
    pub parallel_result: ComplexMatrix,
    pub sequential_result: ComplexMatrix,
    pub tolerance: f64,
    pub passed: bool,
}

impl EquivalenceReport {
    fn compare(parallel_result: ComplexMatrix, sequential_result: ComplexMatrix, tolerance: f64) -> Self {
        let max_abs_deviation = parallel_result.max_abs_diff(&sequential_result);
        Self {
            max_abs_deviation,
            parallel_result,
            sequential_result,
            tolerance,
            passed: max_abs_deviation <= tolerance,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProtocolSpec {
    Operator(OperatorProtocolSpec),
    Channel(ChannelProtocolSpec),
}

pub fn check_equivalence(spec: &ProtocolSpec, tol: f64) -> Result<EquivalenceReport> {
    match spec {
        ProtocolSpec::Operator(s) => check_operator_equivalence(s, tol),
        ProtocolSpec::Channel(s) => check_channel_equivalence(s, tol),
    }
}

pub fn check_operator_equivalence(spec: &OperatorProtocolSpec, tol: f64) -> Result<EquivalenceReport> {
    Ok(EquivalenceReport::compare(
        parallel_operator(spec)?,
        sequential_operator(spec),
        tol,
    ))
}

pub fn check_channel_equivalence(spec: &ChannelProtocolSpec, tol: f64) -> Result<EquivalenceReport> {
    Ok(EquivalenceReport::compare(
        parallel_channel(spec)?,
        sequential_channel(spec)?,
        tol,
    ))
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    // Next lexicographic permutation until exhausted.
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}
