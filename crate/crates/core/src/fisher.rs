//! Quantum Fisher information and the symmetric logarithmic derivative.
//!
//! For ρ = Σ λᵢ|i⟩⟨i| the SLD solving ρL + Lρ = 2∂ωρ has matrix elements
//! L_ij = 2⟨i|∂ωρ|j⟩/(λᵢ + λⱼ) on the subspace where λᵢ + λⱼ exceeds a small
//! cutoff; pairs below the cutoff are dropped. The QFI is
//! F = Tr[ρL²] = Σ 2|⟨i|∂ωρ|j⟩|²/(λᵢ + λⱼ) over the same pairs.

use crate::dynamics::{propagate, DensityState, Scenario};
use crate::mat2::{cr, eigh2, hermiticity_error, CMat2};
use crate::{Error, Result};

/// Eigenvalue-sum cutoff: terms with λᵢ + λⱼ at or below this are dropped.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// Floor substituted for degenerate baseline entries before dividing by them.
pub const BASELINE_FLOOR: f64 = 1e-12;

const HERMITICITY_TOL: f64 = 1e-8;

/// A QFI value together with the time it was evaluated at.
#[derive(Debug, Clone, Copy)]
pub struct QfiValue {
    pub f: f64,
    pub t: f64,
}

impl QfiValue {
    pub fn f_over_t(&self) -> f64 {
        self.f / self.t
    }
}

fn check_inputs(rho: &CMat2, drho: &CMat2) -> Result<()> {
    let hr = hermiticity_error(rho);
    if hr > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual: hr, tol: HERMITICITY_TOL });
    }
    let hd = hermiticity_error(drho);
    if hd > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual: hd, tol: HERMITICITY_TOL });
    }
    Ok(())
}

/// Symmetric logarithmic derivative of ρ for the sensitivity ∂ωρ.
pub fn sld(rho: &CMat2, drho: &CMat2, tol: f64) -> Result<CMat2> {
    check_inputs(rho, drho)?;
    let eig = eigh2(rho);
    let u = eig.vectors;
    let d = u.adjoint() * drho * u;
    let mut l = CMat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            if denom > tol {
                l[(i, j)] = d[(i, j)] * cr(2.0 / denom);
            }
        }
    }
    Ok(u * l * u.adjoint())
}

/// QFI via the eigenbasis sum; non-negative by construction.
pub fn qfi(rho: &CMat2, drho: &CMat2, tol: f64) -> Result<f64> {
    check_inputs(rho, drho)?;
    let eig = eigh2(rho);
    let d = eig.vectors.adjoint() * drho * eig.vectors;
    let mut f = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            if denom > tol {
                f += 2.0 * d[(i, j)].norm_sqr() / denom;
            }
        }
    }
    Ok(f)
}

/// QFI of a propagated state, stamped with its time.
pub fn qfi_at(state: &DensityState, tol: f64) -> Result<QfiValue> {
    Ok(QfiValue { f: qfi(&state.rho, &state.drho, tol)?, t: state.t })
}

/// Cramér–Rao bound on the standard deviation after `n` repetitions,
/// 1/√(n·F).
pub fn cramer_rao(f: f64, n: u64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::NonPositiveQfi(f));
    }
    Ok(1.0 / (n as f64 * f).sqrt())
}

/// Per-step QFI of the uncontrolled evolution, F₀(j) for j = 1..N.
#[derive(Debug, Clone)]
pub struct BaselineTable {
    values: Vec<f64>,
    total_time: f64,
}

impl BaselineTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw F₀ at segment boundary `j_plus_1` ∈ 1..=N.
    pub fn at_step(&self, j_plus_1: usize) -> f64 {
        self.values[j_plus_1 - 1]
    }

    /// F₀ guarded against degenerate (near-zero) entries, safe to divide by.
    pub fn guarded_at(&self, j_plus_1: usize) -> f64 {
        self.at_step(j_plus_1).max(BASELINE_FLOOR)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// No-control F₀(T)/T.
    pub fn final_f_over_t(&self) -> f64 {
        self.values[self.values.len() - 1] / self.total_time
    }
}

/// Propagate the scenario with every control off and tabulate the QFI at each
/// segment boundary.
pub fn baseline(scenario: &Scenario) -> Result<BaselineTable> {
    let schedule = scenario.zero_schedule()?;
    let trajectory = propagate(scenario, &schedule)?;
    let values = trajectory[1..]
        .iter()
        .map(|s| qfi(&s.rho, &s.drho, EIGEN_CUTOFF))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaselineTable { values, total_time: scenario.total_time })
}
