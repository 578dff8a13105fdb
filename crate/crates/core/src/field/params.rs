use serde::{Deserialize, Serialize};

use crate::error::FieldIssue;

/// Physical constants of the PG system.
///
/// `L₁ = -A_h Δ - A_v ∂²_z` acts on velocity, `L₂ = -K_h Δ - K_v ∂²_z` on
/// temperature, the Coriolis parameter is `f = f0 (beta + y)`, and `alpha`
/// is the surface heat-exchange coefficient of the Robin top condition.
/// `mu` is the nudging strength of the assimilated copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub a_h: f64,
    pub a_v: f64,
    pub k_h: f64,
    pub k_v: f64,
    pub alpha: f64,
    pub f0: f64,
    pub beta: f64,
    /// Depth `H`.
    pub depth: f64,
    pub mu: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            a_h: 0.1,
            a_v: 0.1,
            k_h: 0.1,
            k_v: 0.1,
            alpha: 0.1,
            f0: 1.0,
            beta: 1.0,
            depth: 1.0,
            mu: 0.0,
        }
    }
}

impl PhysParams {
    /// Coriolis parameter at latitude coordinate `y`.
    pub fn coriolis(&self, y: f64) -> f64 {
        self.f0 * (self.beta + y)
    }

    /// Robin coefficient `α / K_v` of the homogeneous top condition.
    pub fn robin(&self) -> f64 {
        self.alpha / self.k_v
    }

    pub fn validate(&self, prefix: &str, issues: &mut Vec<FieldIssue>) {
        let positive = [
            ("A_h", self.a_h),
            ("A_v", self.a_v),
            ("K_h", self.k_h),
            ("K_v", self.k_v),
            ("alpha", self.alpha),
            ("H", self.depth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(
                    format!("{prefix}.{name}"),
                    format!("must be finite and > 0 (got {v})"),
                ));
            }
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            issues.push(FieldIssue::new(
                format!("{prefix}.mu"),
                format!("must be finite and >= 0 (got {})", self.mu),
            ));
        }
        for (name, v) in [("f0", self.f0), ("beta", self.beta)] {
            if !v.is_finite() {
                issues.push(FieldIssue::new(
                    format!("{prefix}.{name}"),
                    format!("must be finite (got {v})"),
                ));
            }
        }
    }
}

/// `K̃ = max{2H/α, 2H²/K_v}`, the constant in `|T|² ≤ K̃ ‖T‖²`.
pub fn poincare_constant(p: &PhysParams) -> f64 {
    let surface = 2.0 * p.depth / p.alpha;
    let column = 2.0 * p.depth * p.depth / p.k_v;
    surface.max(column)
}
