//! Multi-worker training smoke tests.

use qfi_control::neural::NetConfig;
use qfi_control::presets::dephasing_scenario;
use qfi_control::trainer::{train, Algorithm, TrainConfig};

#[test]
fn parallel_training_completes_and_accounts_epochs() {
    let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 1.0, 5.0);
    let mut config = TrainConfig::new(scenario, Algorithm::PlainA3C);
    config.n_env = 4;
    config.max_epochs = 40;
    config.net = NetConfig { input_dim: 8, hidden: 16 };
    config.seed = 5;

    let report = train(&config).unwrap();
    assert_eq!(report.epochs_run, 40);
    assert_eq!(report.learning_curve.len(), 40);
    // epochs are unique and contiguous after sorting
    for (i, point) in report.learning_curve.iter().enumerate() {
        assert_eq!(point.epoch, i as u64 + 1);
        assert!(point.f_over_t.is_finite());
    }
    // every worker id is in range; with 4 workers more than one usually
    // contributes, but that is scheduling-dependent, so only bounds are hard
    assert!(report.learning_curve.iter().all(|p| p.worker < 4));
    assert!(report.updates_applied >= 40);
    let max = report.learning_curve.iter().map(|p| p.f_over_t).fold(f64::MIN, f64::max);
    assert_eq!(report.best_metric, max);
    assert!(report.baseline_f_over_t > 0.0);
}

#[test]
fn ppo_parallel_smoke() {
    let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 1.0, 5.0);
    let mut config = TrainConfig::new(scenario, Algorithm::A3cPpo { epsilon: 0.12, n_ppo_max: 2 });
    config.n_env = 2;
    config.max_epochs = 10;
    config.net = NetConfig { input_dim: 8, hidden: 16 };

    let report = train(&config).unwrap();
    assert_eq!(report.epochs_run, 10);
    // at least n_ppo_max cycles per counted episode
    assert!(report.updates_applied >= 20);
}
