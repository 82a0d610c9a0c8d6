// temporary calibration probe (deleted before delivery)
use qfi_control::fisher::baseline;
use qfi_control::presets::by_name;
use qfi_control::trainer::{train, Algorithm, TrainConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let sc = by_name("dephasing-dt1").unwrap();
    let f0t = baseline(&sc).unwrap().final_f_over_t();
    let t0 = Instant::now();
    let mut cfg = TrainConfig::new(sc, Algorithm::PlainA3C);
    cfg.max_epochs = epochs;
    cfg.n_env = 8;
    cfg.seed = seed;
    let rep = train(&cfg).unwrap();
    println!("A3C seed {seed} {epochs} epochs ({:?}): best {:.4} baseline {f0t:.4} beat={}",
        t0.elapsed(), rep.best_metric, rep.best_metric > f0t);
    let mut run_best = f64::MIN;
    for p in &rep.learning_curve {
        run_best = run_best.max(p.f_over_t);
        if p.epoch % 500 == 0 {
            println!("  epoch {:4}: cur {:.3} best {:.3}", p.epoch, p.f_over_t, run_best);
        }
    }
}
