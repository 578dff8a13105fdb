//! Explicit constants of the attractor bounds and of the convergence
//! conditions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{h1_norm_2d, h2_norm_2d, l2_norm, l2_norm_2d, poincare_constant, PhysParams};
use crate::observe::InterpolantSpec;
use crate::stepper::ForcingSpec;

/// Forcing norms and parameters the bounds depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub tstar_l2: f64,
    pub tstar_h1: f64,
    pub tstar_h2: f64,
    pub q_l2: f64,
    pub tau_h1: f64,
    pub c: f64,
    pub c0: f64,
    pub h: f64,
    pub mu: f64,
    pub lambda1: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub inputs: ConstantInputs,
    pub k_tilde: f64,
    pub r_a_tilde: f64,
    pub r_a: f64,
    pub k_r: f64,
    /// Not finite when the exponent overflows; serialized as `null` then.
    pub r_v: f64,
    pub mu_min: f64,
    /// `μ c₀² h²`.
    pub smallness: f64,
    /// Largest `h` with `μ c₀² h² ≤ 1`; `None` when `μ c₀² = 0`.
    pub h_threshold: Option<f64>,
    pub mu_condition: bool,
    pub smallness_condition: bool,
    pub feasible: bool,
}

impl ConstantInputs {
    pub fn from_forcing(forcing: &ForcingSpec) -> Result<Self> {
        let t1 = h1_norm_2d(&forcing.tau.tau1)?;
        let t2 = h1_norm_2d(&forcing.tau.tau2)?;
        Ok(Self {
            tstar_l2: l2_norm_2d(&forcing.tstar)?,
            tstar_h1: h1_norm_2d(&forcing.tstar)?,
            tstar_h2: h2_norm_2d(&forcing.tstar)?,
            q_l2: l2_norm(&forcing.q)?,
            tau_h1: (t1 * t1 + t2 * t2).sqrt(),
            c: 1.0,
            c0: 1.0,
            h: 1.0,
            mu: 0.0,
            lambda1: 1.0,
            r: 1.0,
        })
    }
}

/// Evaluates every bound from its displayed formula.
pub fn evaluate_constants(p: &PhysParams, inputs: ConstantInputs) -> TheoremConstants {
    let ConstantInputs {
        tstar_l2,
        tstar_h1,
        tstar_h2,
        q_l2,
        tau_h1,
        c,
        c0,
        h,
        mu,
        lambda1,
        r,
    } = inputs;
    let k_tilde = poincare_constant(p);
    let r_a_tilde = 4.0 * p.alpha * k_tilde * tstar_l2.powi(2) + 8.0 * k_tilde.powi(2) * q_l2.powi(2);
    let r_a = 2.0 * r_a_tilde + 2.0 * tstar_l2.powi(2);
    let k_r = 2.0 * r_a + r_a_tilde * r;
    let bracket = r_a / r.sqrt()
        + tstar_h1
        + q_l2
        + (c / lambda1.sqrt())
            * (1.0 + tstar_h2.powi(2) + q_l2 + tau_h1.powi(2) + r_a.powi(2));
    let exponent = c * (r_a.powi(4) + (tstar_h2.powi(4) + tau_h1.powi(4) + r_a.powi(4)) * r);
    let r_v = c * bracket * exponent.exp();
    let mu_min = 2.0 * c * mu_structure(r_a_tilde, tstar_l2, tstar_h1);
    let smallness = mu * c0 * c0 * h * h;
    let h_threshold = if mu * c0 * c0 > 0.0 {
        Some(1.0 / (c0 * mu.sqrt()))
    } else {
        None
    };
    let mu_condition = mu >= mu_min;
    let smallness_condition = smallness <= 1.0;
    TheoremConstants {
        inputs,
        k_tilde,
        r_a_tilde,
        r_a,
        k_r,
        r_v,
        mu_min,
        smallness,
        h_threshold,
        mu_condition,
        smallness_condition,
        feasible: mu_condition && smallness_condition,
    }
}

/// `1 + 5 R̃_a + 4 ‖T*‖² + ‖T*‖_{H¹}^{4/3}`, the structure shared by the
/// `μ` condition and the default heuristic.
pub fn mu_structure(r_a_tilde: f64, tstar_l2: f64, tstar_h1: f64) -> f64 {
    1.0 + 5.0 * r_a_tilde + 4.0 * tstar_l2.powi(2) + tstar_h1.powf(4.0 / 3.0)
}

/// Default relaxation `μ* = 20 (1 + 5 R̃_a + 4 ‖T*‖² + ‖T*‖_{H¹}^{4/3})`.
pub fn mu_heuristic(p: &PhysParams, forcing: &ForcingSpec) -> Result<f64> {
    let k = evaluate_constants(p, ConstantInputs::from_forcing(forcing)?);
    Ok(20.0 * mu_structure(k.r_a_tilde, k.inputs.tstar_l2, k.inputs.tstar_h1))
}

/// Theorem constants for the given forcing and observation setup. `c0` is
/// the approximation constant of the interpolant: `spec.c0` when set,
/// otherwise the caller's measured value.
pub fn theorem_constants(
    p: &PhysParams,
    forcing: &ForcingSpec,
    spec: &InterpolantSpec,
    measured_c0: f64,
    c: f64,
    r: f64,
    lambda1: f64,
) -> Result<TheoremConstants> {
    let inputs = ConstantInputs {
        c,
        c0: spec.c0.unwrap_or(measured_c0),
        h: spec.h,
        mu: p.mu,
        lambda1,
        r,
        ..ConstantInputs::from_forcing(forcing)?
    };
    Ok(evaluate_constants(p, inputs))
}
