// temporary calibration probe (deleted before delivery)
use qfi_control::fisher::baseline;
use qfi_control::grape::{optimize, GrapeConfig};
use qfi_control::presets::by_name;
use qfi_control::trainer::{train, Algorithm, TrainConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("all");

    if mode == "grape" || mode == "all" {
        let sc = by_name("dephasing-dt01").unwrap();
        let f0t = baseline(&sc).unwrap().final_f_over_t();
        println!("dephasing-dt01 baseline F0(T)/T = {f0t:.4}");
        let t0 = Instant::now();
        let cfg = GrapeConfig { iterations: 100, ..GrapeConfig::default() };
        let res = optimize(&sc, &cfg).unwrap();
        println!("GRAPE 100 iters: F/T {:.4} (lift {:.2}x) in {:?}",
            res.final_qfi.f / 5.0, res.final_qfi.f / 5.0 / f0t, t0.elapsed());
        let t0 = Instant::now();
        let cfg = GrapeConfig { iterations: 500, ..GrapeConfig::default() };
        let res = optimize(&sc, &cfg).unwrap();
        println!("GRAPE 500 iters: F/T {:.4} (lift {:.2}x) in {:?}",
            res.final_qfi.f / 5.0, res.final_qfi.f / 5.0 / f0t, t0.elapsed());
    }

    if mode == "a3c" || mode == "all" {
        let sc = by_name("dephasing-dt1").unwrap();
        let f0t = baseline(&sc).unwrap().final_f_over_t();
        println!("dephasing-dt1 baseline F0(T)/T = {f0t:.4}");
        let t0 = Instant::now();
        let mut cfg = TrainConfig::new(sc, Algorithm::PlainA3C);
        cfg.max_epochs = 1000;
        cfg.n_env = 8;
        cfg.seed = 1;
        let rep = train(&cfg).unwrap();
        println!("A3C 1000 epochs ({:?}): best {:.4} (baseline {:.4})",
            t0.elapsed(), rep.best_metric, f0t);
        // best-so-far curve at a few checkpoints
        let mut run_best = f64::MIN;
        for p in &rep.learning_curve {
            run_best = run_best.max(p.f_over_t);
            if p.epoch % 200 == 0 {
                println!("  epoch {:4}: cur {:.3} best {:.3}", p.epoch, p.f_over_t, run_best);
            }
        }
    }

    if mode == "ppo" || mode == "all" {
        let sc = by_name("dephasing-dt1").unwrap();
        let f0t = baseline(&sc).unwrap().final_f_over_t();
        let t0 = Instant::now();
        let mut cfg = TrainConfig::new(sc, TrainConfig::ppo_default_algorithm());
        cfg.max_epochs = 1000;
        cfg.n_env = 8;
        cfg.seed = 1;
        let rep = train(&cfg).unwrap();
        println!("PPO 1000 epochs ({:?}): best {:.4} (baseline {:.4})",
            t0.elapsed(), rep.best_metric, f0t);
        let mut run_best = f64::MIN;
        for p in &rep.learning_curve {
            run_best = run_best.max(p.f_over_t);
            if p.epoch % 200 == 0 {
                println!("  epoch {:4}: cur {:.3} best {:.3}", p.epoch, p.f_over_t, run_best);
            }
        }
    }
}
