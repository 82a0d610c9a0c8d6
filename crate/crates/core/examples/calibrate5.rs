// temporary calibration probe (deleted before delivery)
use qfi_control::dynamics::propagate;
use qfi_control::fisher::{qfi, EIGEN_CUTOFF};
use qfi_control::grape::{optimize, GrapeConfig};
use qfi_control::neural::NetParams;
use qfi_control::presets::by_name;
use qfi_control::trainer::{evaluate, train, Algorithm, TrainConfig};
use std::time::Instant;

fn window_avg(grid: &[f64], vals: &[f64]) -> f64 {
    let pts: Vec<f64> = grid.iter().zip(vals).filter(|(w, _)| **w >= 0.6 && **w <= 1.4).map(|(_, v)| *v).collect();
    pts.iter().sum::<f64>() / pts.len() as f64
}

fn policy_curve(params: &NetParams, grid: &[f64], sc: &qfi_control::dynamics::Scenario, seed: u64) -> Vec<f64> {
    grid.iter().enumerate().map(|(i, &w)| {
        let scw = sc.with_omega0(w);
        evaluate(params, &scw, 100, seed + i as u64).unwrap().1
    }).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let algo = args.get(1).map(String::as_str).unwrap_or("a3c");
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let sc = by_name("dephasing-dt01").unwrap();
    let t_total = sc.total_time;
    let span = std::f64::consts::PI / t_total;
    let grid: Vec<f64> = (0..41).map(|i| 1.0 - span + 2.0 * span * i as f64 / 40.0).collect();

    let grape_res = optimize(&sc, &GrapeConfig::default()).unwrap();
    let grape_vals: Vec<f64> = grid.iter().map(|&w| {
        let scw = sc.with_omega0(w);
        let traj = propagate(&scw, &grape_res.schedule).unwrap();
        let last = traj.last().unwrap();
        qfi(&last.rho, &last.drho, EIGEN_CUTOFF).unwrap() / t_total
    }).collect();
    println!("grape: design {:.3} window_avg {:.3}", grape_res.final_qfi.f / t_total, window_avg(&grid, &grape_vals));

    for seed in [1u64, 2, 3] {
        let t0 = Instant::now();
        let algorithm = if algo == "ppo" { TrainConfig::ppo_default_algorithm() } else { Algorithm::PlainA3C };
        let mut cfg = TrainConfig::new(sc.clone(), algorithm);
        cfg.max_epochs = epochs;
        cfg.n_env = 8;
        cfg.seed = seed;
        let rep = train(&cfg).unwrap();
        let best_curve = policy_curve(&rep.best_params, &grid, &sc, 9000);
        let final_curve = policy_curve(&rep.final_params, &grid, &sc, 9000);
        println!(
            "{algo} seed {seed} ({:?}): train_best {:.3} | best_params avg {:.3} (at w=1: {:.3}) | final_params avg {:.3} (at w=1: {:.3})",
            t0.elapsed(), rep.best_metric,
            window_avg(&grid, &best_curve), best_curve[20],
            window_avg(&grid, &final_curve), final_curve[20],
        );
    }
}
