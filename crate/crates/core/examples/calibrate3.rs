// temporary calibration probe (deleted before delivery)
use qfi_control::dynamics::propagate;
use qfi_control::fisher::{baseline, qfi, EIGEN_CUTOFF};
use qfi_control::grape::{optimize, GrapeConfig};
use qfi_control::presets::by_name;
use qfi_control::trainer::{evaluate, train, Algorithm, TrainConfig};
use std::time::Instant;

fn trapezoid_average(grid: &[f64], vals: &[f64], lo: f64, hi: f64) -> f64 {
    // assumes lo/hi inside grid; linear interpolation at edges
    let value_at = |x: f64| -> f64 {
        let i = grid.partition_point(|&g| g <= x).min(grid.len() - 1).max(1);
        let (x0, x1) = (grid[i - 1], grid[i]);
        let (y0, y1) = (vals[i - 1], vals[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    let mut knots = vec![(lo, value_at(lo))];
    for (i, &g) in grid.iter().enumerate() {
        if g > lo && g < hi {
            knots.push((g, vals[i]));
        }
    }
    knots.push((hi, value_at(hi)));
    let mut integral = 0.0;
    for w in knots.windows(2) {
        integral += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
    }
    integral / (hi - lo)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let sc = by_name("dephasing-dt01").unwrap();
    let f0t = baseline(&sc).unwrap().final_f_over_t();
    println!("baseline F0(T)/T = {f0t:.4}");

    // GRAPE at omega = 1
    let t0 = Instant::now();
    let grape_res = optimize(&sc, &GrapeConfig::default()).unwrap();
    println!("GRAPE: design-point F/T {:.4} in {:?}", grape_res.final_qfi.f / 5.0, t0.elapsed());

    // policy training
    let t0 = Instant::now();
    let mut cfg = TrainConfig::new(sc.clone(), Algorithm::PlainA3C);
    cfg.max_epochs = epochs;
    cfg.n_env = 8;
    cfg.seed = seed;
    let rep = train(&cfg).unwrap();
    println!("A3C seed {seed} {epochs} epochs ({:?}): best {:.4}", t0.elapsed(), rep.best_metric);

    // sweep
    let t_grid: f64 = sc.total_time;
    let span = std::f64::consts::PI / t_grid;
    let n_grid = 61usize; // coarser for calibration speed
    let grid: Vec<f64> =
        (0..n_grid).map(|i| 1.0 - span + 2.0 * span * i as f64 / (n_grid - 1) as f64).collect();

    let t0 = Instant::now();
    let mut grape_curve = Vec::new();
    for &w in &grid {
        let scw = sc.with_omega0(w);
        let traj = propagate(&scw, &grape_res.schedule).unwrap();
        let last = traj.last().unwrap();
        grape_curve.push(qfi(&last.rho, &last.drho, EIGEN_CUTOFF).unwrap() / t_grid);
    }
    println!("grape sweep in {:?}", t0.elapsed());

    let t0 = Instant::now();
    let mut policy_curve = Vec::new();
    for (i, &w) in grid.iter().enumerate() {
        let scw = sc.with_omega0(w);
        let (_, f) = evaluate(&rep.best_params, &scw, 100, 1000 + i as u64).unwrap();
        policy_curve.push(f);
    }
    println!("policy sweep in {:?}", t0.elapsed());

    for dw in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let ga = trapezoid_average(&grid, &grape_curve, 1.0 - dw, 1.0 + dw);
        let pa = trapezoid_average(&grid, &policy_curve, 1.0 - dw, 1.0 + dw);
        println!("dw {dw:.1}: grape {ga:.4} policy {pa:.4} policy_wins={}", pa > ga);
    }
    // sample points
    for i in [0, 15, 30, 45, 60] {
        println!("  omega {:.3}: grape {:.3} policy {:.3}", grid[i], grape_curve[i], policy_curve[i]);
    }
}
