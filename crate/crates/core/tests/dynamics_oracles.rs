//! Independent oracles for the propagation layer.
//!
//! The sensitivity check propagates the density matrix alone through 4×4
//! Liouvillian exponentials at ω₀ ± h and differences the results — a path
//! that never touches the augmented 8×8 generator it validates.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use qfi_control::dynamics::{
    liouvillian, hamiltonian, propagate, step, DensityState, NoiseModel, PulseSchedule,
    PulseShape, Scenario,
};
use qfi_control::mat2::{cr, unvectorize, vectorize, CMat2};
use qfi_control::presets::probe_plus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_schedule(rng: &mut ChaCha8Rng, n: usize, dt: f64) -> PulseSchedule {
    let amplitudes = (0..n)
        .map(|_| {
            [
                rng.random_range(-4.0..=4.0),
                rng.random_range(-4.0..=4.0),
                rng.random_range(-4.0..=4.0),
            ]
        })
        .collect();
    PulseSchedule::new(amplitudes, dt, PulseShape::Square).unwrap()
}

fn random_noise(rng: &mut ChaCha8Rng, emission: bool) -> NoiseModel {
    if emission {
        NoiseModel::SpontaneousEmission {
            gamma_plus: 0.1,
            gamma_minus: rng.random_range(0.0..=0.1),
        }
    } else {
        NoiseModel::Dephasing {
            gamma: 0.1,
            vartheta: rng.random_range(0.0..=std::f64::consts::PI),
            phi: rng.random_range(0.0..=std::f64::consts::PI),
        }
    }
}

/// Propagate ρ only, through the 4×4 Liouvillian — no sensitivity block.
fn propagate_rho_only(scenario: &Scenario, schedule: &PulseSchedule, omega0: f64) -> CMat2 {
    let mut v = vectorize(&scenario.probe);
    for &u in &schedule.amplitudes {
        let g: Matrix4<C64> = liouvillian(&hamiltonian(omega0, u), &scenario.noise);
        v = (g * cr(schedule.dt)).exp() * v;
    }
    unvectorize(&v)
}

#[test]
fn sensitivity_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = 1e-6;
    for trial in 0..10 {
        let noise = random_noise(&mut rng, trial % 2 == 1);
        let scenario = Scenario {
            omega0: 1.0,
            noise,
            probe: probe_plus(),
            total_time: 5.0,
            dt: 0.5,
            shape: PulseShape::Square,
        };
        let schedule = random_schedule(&mut rng, 10, 0.5);

        let trajectory = propagate(&scenario, &schedule).unwrap();
        let drho = trajectory.last().unwrap().drho;

        let up = propagate_rho_only(&scenario, &schedule, 1.0 + h);
        let down = propagate_rho_only(&scenario, &schedule, 1.0 - h);
        let fd = (up - down) * cr(1.0 / (2.0 * h));

        let scale = fd.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let err = (drho[(i, j)] - fd[(i, j)]).norm() / scale;
                assert!(err < 1e-6, "trial {trial} entry ({i},{j}): rel err {err:.3e}");
            }
        }
    }
}

#[test]
fn step_semigroup_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scenario = Scenario {
        omega0: 1.0,
        noise: NoiseModel::Dephasing { gamma: 0.1, vartheta: 0.6, phi: 1.1 },
        probe: probe_plus(),
        total_time: 5.0,
        dt: 0.5,
        shape: PulseShape::Square,
    };
    for _ in 0..5 {
        let u = [
            rng.random_range(-4.0..=4.0),
            rng.random_range(-4.0..=4.0),
            rng.random_range(-4.0..=4.0),
        ];
        let a = rng.random_range(0.0..=0.6);
        let b = rng.random_range(0.0..=0.6);
        let s0 = DensityState::from_probe(&scenario.probe);
        let joint = step(&s0, &scenario, u, a + b).unwrap();
        let split = step(&step(&s0, &scenario, u, a).unwrap(), &scenario, u, b).unwrap();
        assert!((joint.rho - split.rho).norm() < 1e-10);
        assert!((joint.drho - split.drho).norm() < 1e-10);
    }
}

#[test]
fn square_segments_are_substep_invariant() {
    // exact exponentials make refinement of a constant segment redundant
    let scenario = Scenario {
        omega0: 1.0,
        noise: NoiseModel::SpontaneousEmission { gamma_plus: 0.1, gamma_minus: 0.0 },
        probe: probe_plus(),
        total_time: 2.0,
        dt: 1.0,
        shape: PulseShape::Square,
    };
    let u = [1.3, -0.4, 2.2];
    let s0 = DensityState::from_probe(&scenario.probe);
    let whole = step(&s0, &scenario, u, 1.0).unwrap();
    for parts in [2, 5, 16] {
        let mut s = s0.clone();
        for _ in 0..parts {
            s = step(&s, &scenario, u, 1.0 / parts as f64).unwrap();
        }
        assert!((whole.rho - s.rho).norm() < 1e-11, "{parts} substeps drifted");
        assert!((whole.drho - s.drho).norm() < 1e-11);
    }
}

#[test]
fn gaussian_substeps_converge_under_refinement() {
    let base = Scenario {
        omega0: 1.0,
        noise: NoiseModel::Dephasing {
            gamma: 0.1,
            vartheta: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
        },
        probe: probe_plus(),
        total_time: 4.0,
        dt: 1.0,
        shape: PulseShape::Gaussian { width: 0.25, substeps: 20 },
    };
    let amplitudes = vec![[2.0, -1.5, 0.7], [-3.0, 0.2, 1.0], [0.5, 2.5, -2.0], [1.0, 1.0, 1.0]];

    let run = |substeps: usize| {
        let mut sc = base.clone();
        sc.shape = PulseShape::Gaussian { width: 0.25, substeps };
        let schedule =
            PulseSchedule::new(amplitudes.clone(), 1.0, sc.shape.clone()).unwrap();
        propagate(&sc, &schedule).unwrap().last().unwrap().clone()
    };

    let coarse = run(20);
    let mid = run(40);
    let fine = run(80);
    let d1 = (coarse.rho - mid.rho).norm();
    let d2 = (mid.rho - fine.rho).norm();
    // midpoint sampling is second order: each doubling should cut the
    // difference by about 4; demand at least 2 with plenty of headroom
    assert!(d1 < 1e-3, "20 vs 40 substeps differ by {d1:.3e}");
    assert!(d2 < d1 / 2.0, "no convergence: {d1:.3e} -> {d2:.3e}");
}

#[test]
fn random_trajectories_preserve_state_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..6 {
        let noise = random_noise(&mut rng, trial % 2 == 0);
        let scenario = Scenario {
            omega0: 1.0,
            noise,
            probe: probe_plus(),
            total_time: 8.0,
            dt: 1.0,
            shape: PulseShape::Square,
        };
        let schedule = random_schedule(&mut rng, 8, 1.0);
        let trajectory = propagate(&scenario, &schedule).unwrap();
        for (i, state) in trajectory.iter().enumerate() {
            state
                .validate(1e-9)
                .unwrap_or_else(|e| panic!("trial {trial} state {i}: {e}"));
        }
    }
}
