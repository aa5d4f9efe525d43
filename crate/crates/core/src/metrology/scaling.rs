//! QFI against probe number for Ramsey, GHZ and sequential protocols.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::families::{ghz_family, ramsey_family, sequential_family, ParametrizedFamily, MAX_QUBITS};
use super::sld::{family_qfi, DEFAULT_CUTOFF, DEFAULT_PHI, DEFAULT_STEP};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "n,protocol,gamma,qfi,delta_phi";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Ramsey,
    GhzParallel,
    Sequential,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Ramsey, Protocol::GhzParallel, Protocol::Sequential];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ramsey => "ramsey",
            Protocol::GhzParallel => "ghz_parallel",
            Protocol::Sequential => "sequential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn family(self, n: usize, gamma: f64) -> Result<ParametrizedFamily> {
        match self {
            Protocol::Ramsey => ramsey_family(n, gamma),
            Protocol::GhzParallel => ghz_family(n, gamma),
            Protocol::Sequential => sequential_family(n, gamma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub protocol: Protocol,
    pub gamma: f64,
    pub qfi: f64,
    /// `1/√qfi`, infinite when the QFI vanishes.
    pub delta_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub n_max: usize,
    pub gammas: Vec<f64>,
    /// Carried into reports; the experiment itself draws no random numbers.
    pub seed: u64,
    pub phi_eval: f64,
    pub h: f64,
    pub cutoff: f64,
}

impl ScalingConfig {
    pub fn new(n_max: usize, gammas: Vec<f64>, seed: u64) -> Self {
        Self {
            n_max,
            gammas,
            seed,
            phi_eval: DEFAULT_PHI,
            h: DEFAULT_STEP,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

pub fn scaling_experiment(n_max: usize, gammas: &[f64], seed: u64) -> Result<Vec<ScalingRow>> {
    scaling_experiment_with(&ScalingConfig::new(n_max, gammas.to_vec(), seed))
}

pub fn scaling_experiment_with(config: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if config.n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    if config.n_max > MAX_QUBITS {
        return Err(Error::BudgetExceeded {
            dim: 1usize << config.n_max.min(63),
            budget: 1 << MAX_QUBITS,
        });
    }
    if config.gammas.is_empty() {
        return Err(Error::InvalidParameter("need at least one dephasing rate".into()));
    }
    if let Some(g) = config.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(Error::InvalidParameter(format!("dephasing rate must be finite and >= 0, got {g}")));
    }
    let mut gammas = config.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();

    let mut keys = Vec::new();
    for n in 1..=config.n_max {
        for protocol in Protocol::ALL {
            for &gamma in &gammas {
                keys.push((n, protocol, gamma));
            }
        }
    }

    keys.par_iter()
        .map(|&(n, protocol, gamma)| {
            let fam = protocol.family(n, gamma)?;
            let qfi = family_qfi(&fam, config.phi_eval, config.h, config.cutoff)?.value;
            let delta_phi = if qfi > 0.0 { 1.0 / qfi.sqrt() } else { f64::INFINITY };
            Ok(ScalingRow {
                n,
                protocol,
                gamma,
                qfi,
                delta_phi,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{:?},{:?},{:?}", r.n, r.protocol.name(), r.gamma, r.qfi, r.delta_phi).unwrap();
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `log δφ` against `log n` for one protocol at one dephasing rate.
pub fn log_log_slope(rows: &[ScalingRow], protocol: Protocol, gamma: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.protocol == protocol && r.gamma == gamma && r.delta_phi.is_finite())
        .map(|r| ((r.n as f64).ln(), r.delta_phi.ln()))
        .collect();
    (points.len() >= 2).then(|| fit_slope(&points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(rows: &[ScalingRow], n: usize, p: Protocol, gamma: f64) -> f64 {
        rows.iter().find(|r| r.n == n && r.protocol == p && r.gamma == gamma).unwrap().qfi
    }

    #[test]
    fn noiseless_values() {
        let rows = scaling_experiment(4, &[0.0], 42).unwrap();
        assert_eq!(rows.len(), 12);
        for p in Protocol::ALL {
            assert!((find(&rows, 1, p, 0.0) - 1.0).abs() < 1e-8);
        }
        assert!((find(&rows, 4, Protocol::Ramsey, 0.0) - 4.0).abs() < 1e-6);
        assert!((find(&rows, 4, Protocol::GhzParallel, 0.0) - 16.0).abs() < 1e-6);
        assert!((find(&rows, 4, Protocol::Sequential, 0.0) - 16.0).abs() < 1e-6);
    }

    #[test]
    fn dephased_values_follow_closed_form() {
        let gamma = 0.5;
        let rows = scaling_experiment(3, &[gamma], 1).unwrap();
        for n in 1..=3 {
            let nf = n as f64;
            assert!((find(&rows, n, Protocol::Ramsey, gamma) - nf * (-2.0 * gamma).exp()).abs() < 1e-8);
            let heis = nf * nf * (-2.0 * nf * gamma).exp();
            assert!((find(&rows, n, Protocol::GhzParallel, gamma) - heis).abs() < 1e-8);
            assert!((find(&rows, n, Protocol::Sequential, gamma) - heis).abs() < 1e-8);
        }
    }

    #[test]
    fn rows_are_sorted_and_delta_phi_consistent() {
        let rows = scaling_experiment(3, &[0.5, 0.0], 7).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.protocol, r.gamma.to_bits())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for r in &rows {
            assert!((r.delta_phi * r.qfi.sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_and_input_checks() {
        assert!(matches!(scaling_experiment(9, &[0.0], 0), Err(Error::BudgetExceeded { .. })));
        assert!(scaling_experiment(2, &[], 0).is_err());
        assert!(scaling_experiment(2, &[-1.0], 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = scaling_experiment(1, &[0.0], 0).unwrap();
        let csv = rows_to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,ramsey,0.0,"));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=8).map(|n| ((n as f64).ln(), -(n as f64).ln())).collect();
        assert!((fit_slope(&pts) + 1.0).abs() < 1e-12);
    }
}
