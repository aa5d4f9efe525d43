//! JSON encodings for matrices, channels and protocols.

use serde::{Deserialize, Serialize};

use crate::channels::{
    correlation_from_kraus, dephasing_family_b, pure_phase_b, qubit_dephasing_b, CorrelationMatrix,
    DephasingFamilySpec,
};
use crate::classical::ClassicalStructure;
use crate::error::{Error, Result};
use crate::matrix::{Complex64, ComplexMatrix};
use crate::random::{haar_unitary, seeded};

/// `{"rows": r, "cols": c, "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data = self.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        ComplexMatrix::from_vec(self.rows, self.cols, data)
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    /// `computational`, `fourier` or `random` (Haar, from `--seed`).
    Named(String),
    /// Basis vectors as columns.
    Matrix(MatrixJson),
}

impl BasisSpec {
    pub fn resolve(&self, dim: usize, seed: u64) -> Result<ClassicalStructure> {
        match self {
            BasisSpec::Named(name) => named_basis(name, dim, seed),
            BasisSpec::Matrix(m) => {
                let u = m.to_matrix()?;
                if u.rows() != dim {
                    return Err(Error::InvalidDims(format!("basis is {}x{}, expected dimension {dim}", u.rows(), u.cols())));
                }
                ClassicalStructure::new(u, 1e-10)
            }
        }
    }

    fn dim_hint(&self) -> Option<usize> {
        match self {
            BasisSpec::Named(_) => None,
            BasisSpec::Matrix(m) => Some(m.rows),
        }
    }
}

pub fn named_basis(name: &str, dim: usize, seed: u64) -> Result<ClassicalStructure> {
    if dim == 0 {
        return Err(Error::InvalidDims("dimension must be >= 1".into()));
    }
    match name {
        "computational" => Ok(ClassicalStructure::computational(dim)),
        "fourier" => Ok(ClassicalStructure::fourier(dim)),
        "random" => ClassicalStructure::new(haar_unitary(dim, &mut seeded(seed)), 1e-10),
        other => Err(Error::InvalidParameter(format!(
            "unknown basis '{other}' (expected computational, fourier or random)"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    QubitDephasing {
        gamma: f64,
        #[serde(default)]
        phi: f64,
    },
    PurePhase {
        phases: Vec<f64>,
    },
    DephasingFamily {
        phases: Vec<f64>,
        weights: Vec<f64>,
    },
    Correlation {
        matrix: MatrixJson,
    },
    /// Kraus operators in the ambient basis; they must be diagonal in the
    /// structure's basis.
    Kraus {
        operators: Vec<MatrixJson>,
    },
}

impl ChannelSpec {
    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            ChannelSpec::QubitDephasing { .. } => Some(2),
            ChannelSpec::PurePhase { phases } => Some(phases.len()),
            ChannelSpec::DephasingFamily { phases, .. } => Some(phases.len()),
            ChannelSpec::Correlation { matrix } => Some(matrix.rows),
            ChannelSpec::Kraus { operators } => operators.first().map(|m| m.rows),
        }
    }

    pub fn correlation(&self, cs: &ClassicalStructure) -> Result<CorrelationMatrix> {
        let b = match self {
            ChannelSpec::QubitDephasing { gamma, phi } => qubit_dephasing_b(*gamma, *phi)?,
            ChannelSpec::PurePhase { phases } => pure_phase_b(phases)?,
            ChannelSpec::DephasingFamily { phases, weights } => {
                dephasing_family_b(&DephasingFamilySpec::new(phases.clone(), weights.clone())?)?
            }
            ChannelSpec::Correlation { matrix } => CorrelationMatrix::new(matrix.to_matrix()?)?,
            ChannelSpec::Kraus { operators } => {
                let ks = operators.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
                correlation_from_kraus(cs, &ks)?
            }
        };
        if b.dim() != cs.dim() {
            return Err(Error::InvalidDims(format!(
                "channel acts on dimension {}, structure has dimension {}",
                b.dim(),
                cs.dim()
            )));
        }
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `plus` (normalized unit of the structure) or `maximally_mixed`.
    Named(String),
    Matrix(MatrixJson),
}

impl StateSpec {
    pub fn resolve(&self, cs: &ClassicalStructure) -> Result<ComplexMatrix> {
        let d = cs.dim();
        match self {
            StateSpec::Named(name) => match name.as_str() {
                "plus" => {
                    let u = cs.unit();
                    Ok((u * &u.dagger()).scale_real(1.0 / d as f64))
                }
                "maximally_mixed" => Ok(ComplexMatrix::identity(d).scale_real(1.0 / d as f64)),
                other => Err(Error::InvalidState(format!(
                    "unknown state '{other}' (expected plus or maximally_mixed)"
                ))),
            },
            StateSpec::Matrix(m) => m.to_matrix(),
        }
    }
}

/// Operator in a protocol: either phases `θ_j`, giving `Σ_j e^{iθ_j} b_j b_j†`,
/// or an explicit matrix.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Phases { phases: Vec<f64> },
    Matrix(MatrixJson),
}

impl OperatorSpec {
    fn dim_hint(&self) -> usize {
        match self {
            OperatorSpec::Phases { phases } => phases.len(),
            OperatorSpec::Matrix(m) => m.rows,
        }
    }

    pub fn resolve(&self, cs: &ClassicalStructure) -> Result<ComplexMatrix> {
        let m = match self {
            OperatorSpec::Phases { phases } => {
                let diag: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
                if diag.len() != cs.dim() {
                    return Err(Error::LengthMismatch {
                        expected: cs.dim(),
                        got: diag.len(),
                    });
                }
                cs.diagonal_operator(&diag)
            }
            OperatorSpec::Matrix(m) => m.to_matrix()?,
        };
        if m.shape() != (cs.dim(), cs.dim()) {
            return Err(Error::InvalidDims(format!(
                "operator is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                cs.dim(),
                cs.dim()
            )));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    #[serde(default)]
    pub dim: Option<usize>,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub input_state: Option<StateSpec>,
}

impl ChannelFile {
    pub fn dim(&self, fallback: Option<usize>) -> usize {
        self.dim
            .or_else(|| self.basis.as_ref().and_then(BasisSpec::dim_hint))
            .or_else(|| self.channel.dim_hint())
            .or(fallback)
            .unwrap_or(2)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Number of wires; a single listed channel or operator is repeated.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub channels: Option<Vec<ChannelSpec>>,
    #[serde(default)]
    pub operators: Option<Vec<OperatorSpec>>,
    #[serde(default)]
    pub permutation: Option<Vec<usize>>,
    #[serde(default)]
    pub input_state: Option<StateSpec>,
}

impl ProtocolFile {
    pub fn dim(&self, fallback: Option<usize>) -> usize {
        let from_items = self
            .channels
            .as_ref()
            .and_then(|cs| cs.first())
            .and_then(ChannelSpec::dim_hint)
            .or_else(|| self.operators.as_ref().and_then(|ops| ops.first()).map(OperatorSpec::dim_hint));
        self.dim
            .or_else(|| self.basis.as_ref().and_then(BasisSpec::dim_hint))
            .or(from_items)
            .or(fallback)
            .unwrap_or(2)
    }

    pub fn structure(&self, fallback_dim: Option<usize>, seed: u64) -> Result<ClassicalStructure> {
        let dim = self.dim(fallback_dim);
        match &self.basis {
            Some(b) => b.resolve(dim, seed),
            None => named_basis("computational", dim, seed),
        }
    }

    /// Expand the listed items to `n` entries.
    pub fn expand<T: Clone>(&self, items: &[T]) -> Result<Vec<T>> {
        match self.n {
            None => Ok(items.to_vec()),
            Some(n) if items.len() == n => Ok(items.to_vec()),
            Some(n) if items.len() == 1 => Ok(vec![items[0].clone(); n]),
            Some(n) => Err(Error::LengthMismatch {
                expected: n,
                got: items.len(),
            }),
        }
    }
}
