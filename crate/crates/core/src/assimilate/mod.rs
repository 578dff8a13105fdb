//! Temperature-only nudging, twin experiments and the analysis around them.
//!
//! The assimilated temperature `η` obeys the model equation plus the
//! relaxation `-μ (I_h(η) - I_h(T̃))`; its velocity `v` comes from the
//! same diagnostic balance as the reference velocity `u`. The helpers here
//! run reference and nudged copies side by side, fit the decay of
//! `χ = η - T̃`, evaluate the explicit bounds, and check the Grönwall-type
//! lemma on sampled data.

mod constants;
mod fit;
mod gronwall;
mod nudging;
mod ratio;
mod twin;

pub use constants::{
    evaluate_constants, mu_heuristic, mu_structure, theorem_constants, ConstantInputs,
    TheoremConstants,
};
pub use fit::{fit_decay_rate, DecayFit, MIN_FIT_SAMPLES};
pub use gronwall::{gronwall_check, GronwallReport};
pub use nudging::nudging_tendency;
pub use ratio::velocity_ratio_bound;
pub use twin::{
    run_twin, run_twin_with, ErrorSeries, Eta0Mode, ReferenceInit, TwinConfig, TwinOutcome,
    TwinTimings, MAX_DT_MU,
};

/// Decay-fit window used for nudged runs, relative to the initial error.
pub const FIT_CEILING: f64 = 1e-2;
pub const FIT_FLOOR: f64 = 1e-8;

/// Rate proxy `μ - C (1 + ‖T̃‖² + ‖T*‖_{H¹}^{4/3})` of the error energy
/// inequality, sampled along a reference trajectory.
pub fn alpha_proxy(mu: f64, c: f64, energy_ref: &[f64], tstar_h1: f64) -> Vec<f64> {
    energy_ref
        .iter()
        .map(|e| mu - c * (1.0 + e * e + tstar_h1.powf(4.0 / 3.0)))
        .collect()
}
