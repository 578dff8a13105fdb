//! Cross-module properties of the twin experiment.

use pgnudge::assimilate::{fit_decay_rate, run_twin_with, velocity_ratio_bound};
use pgnudge::cli::{fit_window, prepare, MuSetting, RunConfig};
use pgnudge::diagnostic::{DiagnosticSolver, SolverSettings};
use pgnudge::field::{DomainSpec, PhysParams};
use pgnudge::observe::SmoothSampler;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn small_twin() -> RunConfig {
    RunConfig::from_value(json!({
        "domain": { "lx": 1.0, "ly": 1.0, "h": 1.0, "nx": 12, "ny": 12, "nz": 6 },
        "twin": { "spin_up_time": 1.0, "assimilation_time": 6.0 },
        "theory": { "c0_samples": 10 }
    }))
    .unwrap()
}

#[test]
fn decay_rate_is_nondecreasing_up_to_mu_star() {
    let base = small_twin();
    let mu_star = prepare(&base).unwrap().params.mu;
    let mut rates = Vec::new();
    for mu in [0.0, mu_star / 4.0, mu_star, 4.0 * mu_star] {
        let mut cfg = base.clone();
        cfg.params.mu = MuSetting::Value(mu);
        let prep = prepare(&cfg).unwrap();
        let outcome = run_twin_with(&cfg.twin_config(prep.params, prep.forcing), 1).unwrap();
        let w = fit_window(mu);
        let fit = fit_decay_rate(&outcome.series, w.floor, w.ceiling).unwrap();
        eprintln!("mu = {mu:.3}: rate {:.4}, R² {:.6}", fit.rate, fit.goodness);
        rates.push(fit.rate);
    }
    // Once the observed modes lock on, the rate plateaus at the decay of the
    // slowest unobserved mode; plateau jitter is allowed at 1e-3 relative.
    let plateau = 1e-3;
    assert!(rates[0] < rates[1], "rates {rates:?}");
    assert!(rates[2] >= rates[1] * (1.0 - plateau), "rates {rates:?}");
    // Above mu* the rate may saturate; it must still beat the unassimilated run.
    assert!(rates[3] > rates[0], "rates {rates:?}");
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 16,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn rho_bounds_fresh_smooth_fields(seed in any::<u64>()) {
        let d = DomainSpec::unit(8, 8, 4);
        let p = PhysParams::default();
        let solver = DiagnosticSolver::new(d, &p, SolverSettings::default()).unwrap();
        let rho = velocity_ratio_bound(&solver, &p, 20, 5).unwrap();
        let sampler = SmoothSampler::new(d, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = sampler.draw(&mut rng, None);
        let ratio = solver.velocity_error_ratio(&chi).unwrap();
        prop_assert!(ratio <= 1.1 * rho, "ratio {ratio} vs rho {rho}");
    }
}
