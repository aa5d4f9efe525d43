//! Quantum Fisher information for phase estimation under dephasing.

pub mod bounds;
pub mod families;
pub mod scaling;
pub mod sld;

pub use bounds::{qfi_ensemble_check, qfi_product_check, separable_bound_check, EnsembleReport, ProductReport, SeparableReport};
pub use families::{
    dephased_qubit_family, diagonal_generator_family, excitation_number, ghz_family, ramsey_family, sequential_family,
    ParametrizedFamily,
};
pub use scaling::{rows_to_csv, scaling_experiment, scaling_experiment_with, Protocol, ScalingConfig, ScalingRow};
pub use sld::{
    family_qfi, family_qfi_finite_difference, finite_difference, qfi, sld, state_derivative, Derivative, DerivativeMethod,
    QfiResult, DEFAULT_CUTOFF, DEFAULT_PHI, DEFAULT_STEP,
};
