//! Controlled open-system dynamics of one qubit.
//!
//! The Hamiltonian is H(u) = ½ω₀σ₃ + Σ_k u_k σ_k with a three-component
//! control field u. The density matrix evolves under a Lindblad master
//! equation whose dissipator is either dephasing along an arbitrary axis or
//! spontaneous emission. Because the estimated parameter is ω₀, the
//! sensitivity ∂ωρ is propagated jointly with ρ: stacking (vec ρ, vec ∂ωρ)
//! gives a block-lower-triangular 8×8 generator whose exact matrix
//! exponential advances both by one constant segment.
//!
//! Time is measured in units of 1/ω₀, amplitudes in units of ω₀.

use crate::mat2::{
    commutator_superop, cr, hermiticity_error, min_eigenvalue, pauli, sandwich_superop,
    sigma_axis, sigma_minus, sigma_plus, sigma_z, vectorize, unvectorize, CMat2, CMat4, CMat8,
    CVec8,
};
use crate::{Error, Result};

/// Hard bound on control amplitudes, |u_k| ≤ 4.
pub const U_MAX: f64 = 4.0;

/// Default number of constant sub-segments used to resolve a Gaussian pulse.
pub const DEFAULT_GAUSSIAN_SUBSTEPS: usize = 20;

/// Noisy part of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Dephasing at rate `gamma` along the axis n(ϑ, φ):
    /// Γ[ρ] = (γ/2)(σ_n ρ σ_n − ρ).
    Dephasing { gamma: f64, vartheta: f64, phi: f64 },
    /// Spontaneous emission with raising rate `gamma_plus` and lowering rate
    /// `gamma_minus` (jump operators σ₊ and σ₋).
    SpontaneousEmission { gamma_plus: f64, gamma_minus: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Dephasing { gamma, vartheta, phi } => {
                if !(gamma.is_finite() && vartheta.is_finite() && phi.is_finite()) {
                    return Err(Error::NonFinite("noise model"));
                }
                if *gamma < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "dephasing rate must be >= 0, got {gamma}"
                    )));
                }
            }
            NoiseModel::SpontaneousEmission { gamma_plus, gamma_minus } => {
                if !(gamma_plus.is_finite() && gamma_minus.is_finite()) {
                    return Err(Error::NonFinite("noise model"));
                }
                if *gamma_plus < 0.0 || *gamma_minus < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "emission rates must be >= 0, got ({gamma_plus}, {gamma_minus})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Vectorized dissipator superoperator.
    fn dissipator_superop(&self) -> CMat4 {
        let id = CMat2::identity();
        match self {
            NoiseModel::Dephasing { gamma, vartheta, phi } => {
                let sn = sigma_axis(*vartheta, *phi);
                (sandwich_superop(&sn, &sn) - CMat4::identity()) * cr(gamma / 2.0)
            }
            NoiseModel::SpontaneousEmission { gamma_plus, gamma_minus } => {
                let lindblad = |jump: &CMat2, rate: f64| -> CMat4 {
                    let jj = jump.adjoint() * jump;
                    let anticomm =
                        (sandwich_superop(&jj, &id) + sandwich_superop(&id, &jj)) * cr(0.5);
                    (sandwich_superop(jump, &jump.adjoint()) - anticomm) * cr(rate)
                };
                lindblad(&sigma_plus(), *gamma_plus) + lindblad(&sigma_minus(), *gamma_minus)
            }
        }
    }
}

/// Temporal profile of one pulse segment.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// Constant amplitude over the whole segment.
    Square,
    /// A Gaussian of the given width centered on the segment and truncated at
    /// its ends, resolved into `substeps` constant sub-segments sampled at
    /// their midpoints.
    Gaussian { width: f64, substeps: usize },
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        if let PulseShape::Gaussian { width, substeps } = self {
            if !width.is_finite() || *width <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "gaussian width must be > 0, got {width}"
                )));
            }
            if *substeps < 1 {
                return Err(Error::InvalidConfig("gaussian substeps must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// A piecewise control sequence: N segments × 3 amplitudes on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub amplitudes: Vec<[f64; 3]>,
    pub dt: f64,
    pub shape: PulseShape,
}

impl PulseSchedule {
    pub fn new(amplitudes: Vec<[f64; 3]>, dt: f64, shape: PulseShape) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("schedule needs at least one segment".into()));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidConfig(format!("segment length must be > 0, got {dt}")));
        }
        shape.validate()?;
        for row in &amplitudes {
            for &u in row {
                if !u.is_finite() {
                    return Err(Error::NonFinite("schedule amplitude"));
                }
                if u.abs() > U_MAX + 1e-12 {
                    return Err(Error::AmplitudeBound { value: u, max: U_MAX });
                }
            }
        }
        Ok(Self { amplitudes, dt, shape })
    }

    /// All-zero schedule with `n` segments.
    pub fn zeros(n: usize, dt: f64, shape: PulseShape) -> Result<Self> {
        Self::new(vec![[0.0; 3]; n], dt, shape)
    }

    pub fn n_segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.amplitudes.len() as f64
    }
}

/// One estimation problem: what is evolved, under which noise, for how long.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Assumed true value of the estimated frequency.
    pub omega0: f64,
    pub noise: NoiseModel,
    /// Initial (probe) state.
    pub probe: CMat2,
    pub total_time: f64,
    pub dt: f64,
    pub shape: PulseShape,
}

impl Scenario {
    /// Number of control segments N = T/ΔT.
    pub fn n_steps(&self) -> usize {
        (self.total_time / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.total_time.is_finite() && self.dt.is_finite()) {
            return Err(Error::NonFinite("scenario"));
        }
        if self.dt <= 0.0 || self.total_time <= 0.0 {
            return Err(Error::InvalidConfig("times must be positive".into()));
        }
        let n = self.n_steps();
        if n < 1 || (n as f64 * self.dt - self.total_time).abs() > 1e-9 * self.total_time.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "total time {} is not an integer number of segments of length {}",
                self.total_time, self.dt
            )));
        }
        self.noise.validate()?;
        self.shape.validate()?;
        let herm = hermiticity_error(&self.probe);
        if herm > 1e-9 {
            return Err(Error::NotHermitian { residual: herm, tol: 1e-9 });
        }
        if (self.probe.trace().re - 1.0).abs() > 1e-9 || min_eigenvalue(&self.probe) < -1e-9 {
            return Err(Error::InvalidConfig("probe is not a density matrix".into()));
        }
        Ok(())
    }

    /// Same scenario with a different assumed frequency.
    pub fn with_omega0(&self, omega0: f64) -> Scenario {
        Scenario { omega0, ..self.clone() }
    }

    /// All-zero schedule matching this scenario's grid and shape.
    pub fn zero_schedule(&self) -> Result<PulseSchedule> {
        PulseSchedule::zeros(self.n_steps(), self.dt, self.shape.clone())
    }
}

/// Density matrix together with its frequency sensitivity ∂ωρ at time `t`.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub rho: CMat2,
    pub drho: CMat2,
    pub t: f64,
}

impl DensityState {
    /// Initial state of an estimation run: ρ = probe, ∂ωρ = 0.
    ///
    /// The probe is prepared independently of ω₀, hence the zero sensitivity.
    pub fn from_probe(probe: &CMat2) -> Self {
        DensityState { rho: *probe, drho: CMat2::zeros(), t: 0.0 }
    }

    /// Check trace, Hermiticity, positivity of ρ and Hermiticity plus
    /// tracelessness of ∂ωρ, all within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = (self.rho.trace().re - 1.0).abs().max(self.rho.trace().im.abs());
        if tr > tol {
            return Err(Error::InvalidConfig(format!("trace(rho) off by {tr:.3e}")));
        }
        let h = hermiticity_error(&self.rho);
        if h > tol {
            return Err(Error::NotHermitian { residual: h, tol });
        }
        let lam = min_eigenvalue(&self.rho);
        if lam < -tol {
            return Err(Error::InvalidConfig(format!("rho eigenvalue {lam:.3e} below -tol")));
        }
        let dh = hermiticity_error(&self.drho);
        if dh > tol {
            return Err(Error::NotHermitian { residual: dh, tol });
        }
        let dtr = self.drho.trace().norm();
        if dtr > tol {
            return Err(Error::InvalidConfig(format!("trace(drho) = {dtr:.3e} not zero")));
        }
        Ok(())
    }
}

/// H(u) = ½ω₀σ₃ + Σ_k u_k σ_k.
pub fn hamiltonian(omega0: f64, u: [f64; 3]) -> CMat2 {
    let mut h = sigma_z() * cr(0.5 * omega0);
    for k in 0..3 {
        h += pauli(k + 1) * cr(u[k]);
    }
    h
}

/// Vectorized generator G with d(vec ρ)/dt = G·vec ρ: the commutator −i[H,·]
/// plus the dissipator of the noise model, in the column-stacking convention.
pub fn liouvillian(h: &CMat2, noise: &NoiseModel) -> CMat4 {
    commutator_superop(h) + noise.dissipator_superop()
}

/// Generator of the sensitivity source term, vec(−i[½σ₃, ·]) = ∂ωG.
fn sensitivity_source() -> CMat4 {
    commutator_superop(&(sigma_z() * cr(0.5)))
}

/// 8×8 block generator acting on (vec ρ, vec ∂ωρ).
///
/// Both diagonal blocks equal the Liouvillian; the lower-left block is ∂ωG,
/// which feeds ρ into the sensitivity. The upper-right block is zero: ρ never
/// depends on ∂ωρ.
pub fn augmented_generator(scenario: &Scenario, u: [f64; 3]) -> CMat8 {
    let g = liouvillian(&hamiltonian(scenario.omega0, u), &scenario.noise);
    let mut m = CMat8::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(&g);
    m.fixed_view_mut::<4, 4>(4, 4).copy_from(&g);
    m.fixed_view_mut::<4, 4>(4, 0).copy_from(&sensitivity_source());
    m
}

fn stack_state(state: &DensityState) -> CVec8 {
    let r = vectorize(&state.rho);
    let d = vectorize(&state.drho);
    CVec8::from([r[0], r[1], r[2], r[3], d[0], d[1], d[2], d[3]])
}

fn unstack_state(v: &CVec8, t: f64) -> DensityState {
    DensityState {
        rho: unvectorize(&v.fixed_rows::<4>(0).into_owned()),
        drho: unvectorize(&v.fixed_rows::<4>(4).into_owned()),
        t,
    }
}

/// Advance (ρ, ∂ωρ) by exp(M·dt) for the constant-control generator M.
pub fn step(state: &DensityState, scenario: &Scenario, u: [f64; 3], dt: f64) -> Result<DensityState> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::NonFinite("step dt"));
    }
    if u.iter().any(|x| !x.is_finite()) || stack_state(state).iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("step input"));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let propagator = (augmented_generator(scenario, u) * cr(dt)).exp();
    Ok(unstack_state(&(propagator * stack_state(state)), state.t + dt))
}

/// Truncated Gaussian pulse value at time `t`.
///
/// Returns A·exp(−((t − center)/width)²) inside `[segment.0, segment.1]` and
/// zero outside.
pub fn gaussian_envelope(a: f64, center: f64, width: f64, segment: (f64, f64), t: f64) -> f64 {
    if t < segment.0 || t > segment.1 {
        return 0.0;
    }
    let x = (t - center) / width;
    a * (-x * x).exp()
}

/// Advance one full segment of the scenario's grid, honoring the pulse shape.
///
/// For Gaussian shapes the segment is subdivided into `substeps` constant
/// pieces whose amplitudes sample the envelope at the sub-segment midpoints.
pub(crate) fn advance_segment(
    state: &DensityState,
    scenario: &Scenario,
    u: [f64; 3],
) -> Result<DensityState> {
    match scenario.shape {
        PulseShape::Square => step(state, scenario, u, scenario.dt),
        PulseShape::Gaussian { width, substeps } => {
            let sub_dt = scenario.dt / substeps as f64;
            let mut s = state.clone();
            for m in 0..substeps {
                // midpoint offset from the segment center
                let offset = ((m as f64 + 0.5) / substeps as f64 - 0.5) * scenario.dt;
                let env = (-(offset / width).powi(2)).exp();
                let scaled = [u[0] * env, u[1] * env, u[2] * env];
                s = step(&s, scenario, scaled, sub_dt)?;
            }
            Ok(s)
        }
    }
}

/// Propagate the probe through the whole schedule.
///
/// Returns N+1 states: the initial state plus one per segment boundary.
pub fn propagate(scenario: &Scenario, schedule: &PulseSchedule) -> Result<Vec<DensityState>> {
    scenario.validate()?;
    if schedule.n_segments() != scenario.n_steps() {
        return Err(Error::ScheduleMismatch(format!(
            "schedule has {} segments, scenario needs {}",
            schedule.n_segments(),
            scenario.n_steps()
        )));
    }
    if (schedule.dt - scenario.dt).abs() > 1e-12 * scenario.dt.max(1.0) {
        return Err(Error::ScheduleMismatch(format!(
            "schedule dt {} differs from scenario dt {}",
            schedule.dt, scenario.dt
        )));
    }
    if schedule.shape != scenario.shape {
        return Err(Error::ScheduleMismatch("pulse shapes differ".into()));
    }
    for row in &schedule.amplitudes {
        for &u in row {
            if u.abs() > U_MAX + 1e-12 {
                return Err(Error::AmplitudeBound { value: u, max: U_MAX });
            }
        }
    }

    let mut trajectory = Vec::with_capacity(schedule.n_segments() + 1);
    trajectory.push(DensityState::from_probe(&scenario.probe));
    for &u in &schedule.amplitudes {
        let next = advance_segment(trajectory.last().unwrap(), scenario, u)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{cr, CVec4};
    use crate::presets::probe_plus;

    fn parallel_dephasing(gamma: f64) -> NoiseModel {
        NoiseModel::Dephasing { gamma, vartheta: 0.0, phi: 0.0 }
    }

    fn free_scenario(gamma: f64, dt: f64, total_time: f64) -> Scenario {
        Scenario {
            omega0: 1.0,
            noise: parallel_dephasing(gamma),
            probe: probe_plus(),
            total_time,
            dt,
            shape: PulseShape::Square,
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian(1.0, [0.0; 3]);
        assert!((h - sigma_z() * cr(0.5)).norm() < 1e-15);

        let h = hamiltonian(0.0, [1.0, 0.0, 0.0]);
        assert!((h - pauli(1)).norm() < 1e-15);

        let h = hamiltonian(1.0, [4.0, 4.0, 4.0]);
        let expect = sigma_z() * cr(0.5) + (pauli(1) + pauli(2) + pauli(3)) * cr(4.0);
        assert!((h - expect).norm() < 1e-15);
        assert!(hermiticity_error(&h) < 1e-15);
    }

    #[test]
    fn liouvillian_zero_dynamics() {
        let g = liouvillian(&CMat2::zeros(), &parallel_dephasing(0.0));
        assert!(g.norm() < 1e-15);
    }

    #[test]
    fn liouvillian_identity_is_fixed_point() {
        // unital channel: the maximally mixed state is static for any H
        let h = hamiltonian(1.3, [0.4, -0.7, 2.0]);
        for noise in [
            NoiseModel::Dephasing { gamma: 0.1, vartheta: 0.9, phi: 0.3 },
            parallel_dephasing(0.25),
        ] {
            let g = liouvillian(&h, &noise);
            let fixed = g * vectorize(&(CMat2::identity() * cr(0.5)));
            assert!(fixed.norm() < 1e-14);
        }
    }

    #[test]
    fn liouvillian_spectrum_parallel_dephasing() {
        // H = ½σ₃, dephasing along σ₃ at γ = 0.1: populations are static and
        // the coherences decay at γ while rotating at ω₀ = 1. In the
        // column-stacked basis (ρ00, ρ10, ρ01, ρ11) the basis vectors are
        // eigenvectors with eigenvalues {0, −0.1+i, −0.1−i, 0}.
        let g = liouvillian(&(sigma_z() * cr(0.5)), &parallel_dephasing(0.1));
        let expected = [
            C64::new(0.0, 0.0),
            C64::new(-0.1, 1.0),
            C64::new(-0.1, -1.0),
            C64::new(0.0, 0.0),
        ];
        for (idx, lam) in expected.iter().enumerate() {
            let mut e = CVec4::zeros();
            e[idx] = cr(1.0);
            let res = g * e - e * *lam;
            assert!(res.norm() < 1e-14, "basis vector {idx} not an eigenvector");
        }
    }

    use crate::mat2::C64;

    #[test]
    fn augmented_generator_structure() {
        // ω₀ = 0, γ = 0, u = 0: only the sensitivity source block survives
        let mut sc = free_scenario(0.0, 1.0, 5.0);
        sc.omega0 = 0.0;
        let m = augmented_generator(&sc, [0.0; 3]);
        assert!(m.fixed_view::<4, 4>(0, 0).norm() < 1e-15);
        assert!(m.fixed_view::<4, 4>(4, 4).norm() < 1e-15);
        assert!(m.fixed_view::<4, 4>(4, 0).norm() > 0.1);

        // the upper-right block vanishes for any parameters
        let sc = free_scenario(0.3, 0.5, 5.0);
        let m = augmented_generator(&sc, [1.0, -2.0, 0.5]);
        assert!(m.fixed_view::<4, 4>(0, 4).norm() == 0.0);
    }

    #[test]
    fn step_zero_dt_is_identity() {
        let sc = free_scenario(0.1, 0.1, 5.0);
        let s0 = DensityState::from_probe(&sc.probe);
        let s1 = step(&s0, &sc, [1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(s0.rho, s1.rho);
        assert_eq!(s0.drho, s1.drho);
    }

    #[test]
    fn step_rejects_non_finite() {
        let sc = free_scenario(0.1, 0.1, 5.0);
        let s0 = DensityState::from_probe(&sc.probe);
        assert!(step(&s0, &sc, [f64::NAN, 0.0, 0.0], 0.1).is_err());
        assert!(step(&s0, &sc, [0.0; 3], f64::INFINITY).is_err());
    }

    #[test]
    fn step_free_evolution_phase() {
        // γ = 0, u = 0, ω₀ = 1: ρ₀₁(t) = ½e^{−it}, so at t = π it is −½
        let sc = free_scenario(0.0, 0.1, 5.0);
        let s0 = DensityState::from_probe(&sc.probe);
        let s = step(&s0, &sc, [0.0; 3], std::f64::consts::PI).unwrap();
        assert!((s.rho[(0, 1)] - cr(-0.5)).norm() < 1e-12);
    }

    #[test]
    fn step_dephasing_decay() {
        // dρ₀₁/dt = (−iω₀ − γ)ρ₀₁ for parallel dephasing
        let sc = free_scenario(0.1, 0.1, 5.0);
        let s0 = DensityState::from_probe(&sc.probe);
        let s = step(&s0, &sc, [0.0; 3], 10.0).unwrap();
        let expect = 0.5 * (-1.0f64).exp();
        assert!((s.rho[(0, 1)].norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn gaussian_envelope_examples() {
        let seg = (0.0, 1.0);
        assert!((gaussian_envelope(2.0, 0.5, 0.25, seg, 0.5) - 2.0).abs() < 1e-15);
        let at_width = gaussian_envelope(2.0, 0.5, 0.25, seg, 0.75);
        assert!((at_width - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert_eq!(gaussian_envelope(2.0, 0.5, 0.25, seg, 1.5), 0.0);
        assert_eq!(gaussian_envelope(2.0, 0.5, 0.25, seg, -0.1), 0.0);
    }

    #[test]
    fn propagate_trajectory_contract() {
        let sc = free_scenario(0.1, 0.5, 5.0);
        let schedule = sc.zero_schedule().unwrap();
        let traj = propagate(&sc, &schedule).unwrap();
        assert_eq!(traj.len(), sc.n_steps() + 1);
        for state in &traj {
            state.validate(1e-9).unwrap();
        }
    }

    #[test]
    fn propagate_rejects_mismatch() {
        let sc = free_scenario(0.1, 0.5, 5.0);
        let wrong_n = PulseSchedule::zeros(3, 0.5, PulseShape::Square).unwrap();
        assert!(propagate(&sc, &wrong_n).is_err());
        let wrong_dt = PulseSchedule::zeros(10, 0.4, PulseShape::Square).unwrap();
        assert!(propagate(&sc, &wrong_dt).is_err());
        let wrong_shape =
            PulseSchedule::zeros(10, 0.5, PulseShape::Gaussian { width: 0.125, substeps: 4 })
                .unwrap();
        assert!(propagate(&sc, &wrong_shape).is_err());
    }

    #[test]
    fn schedule_rejects_amplitude_bound() {
        let res = PulseSchedule::new(vec![[4.5, 0.0, 0.0]], 1.0, PulseShape::Square);
        assert!(matches!(res, Err(Error::AmplitudeBound { .. })));
    }
}
