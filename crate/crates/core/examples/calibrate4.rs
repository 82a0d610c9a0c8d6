// temporary calibration probe (deleted before delivery)
use qfi_control::dynamics::propagate;
use qfi_control::fisher::{baseline, qfi, EIGEN_CUTOFF};
use qfi_control::grape::{optimize, GrapeConfig};
use qfi_control::presets::by_name;
use std::time::Instant;

fn main() {
    let sc = by_name("dephasing-dt01").unwrap();
    let f0t = baseline(&sc).unwrap().final_f_over_t();
    println!("baseline {f0t:.4}");
    let t_total = sc.total_time;
    let span = std::f64::consts::PI / t_total;
    let grid: Vec<f64> = (0..61).map(|i| 1.0 - span + 2.0 * span * i as f64 / 60.0).collect();

    for (iters, lr, init) in [
        (500usize, 0.05, 0.1),
        (2000, 0.05, 0.1),
        (2000, 0.2, 0.1),
        (2000, 0.2, 1.0),
        (5000, 0.2, 1.0),
        (2000, 0.5, 1.0),
    ] {
        let t0 = Instant::now();
        let cfg = GrapeConfig { iterations: iters, learning_rate: lr, init_scale: init, ..Default::default() };
        let res = optimize(&sc, &cfg).unwrap();
        let mut curve = Vec::new();
        for &w in &grid {
            let scw = sc.with_omega0(w);
            let traj = propagate(&scw, &res.schedule).unwrap();
            let last = traj.last().unwrap();
            curve.push(qfi(&last.rho, &last.drho, EIGEN_CUTOFF).unwrap() / t_total);
        }
        // crude window average over [0.6, 1.4]
        let in_window: Vec<f64> = grid.iter().zip(&curve)
            .filter(|(w, _)| **w >= 0.6 && **w <= 1.4)
            .map(|(_, v)| *v).collect();
        let avg = in_window.iter().sum::<f64>() / in_window.len() as f64;
        let umax = res.schedule.amplitudes.iter().flat_map(|r| r.iter().map(|u| u.abs())).fold(0.0, f64::max);
        println!(
            "iters {iters:5} lr {lr:.2} init {init:.1}: design F/T {:.3} avg[0.6,1.4] {:.3} max|u| {:.2} ({:?})",
            res.final_qfi.f / t_total, avg, umax, t0.elapsed()
        );
    }
}
