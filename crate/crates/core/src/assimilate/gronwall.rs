//! Numerical check of the uniform Grönwall-type lemma: if
//! `Y' + α Y ≤ β` with `liminf ∫_t^{t+τ} α ≥ γ`, `limsup ∫_t^{t+τ} α⁻ < ∞`
//! and `lim ∫_t^{t+τ} β⁺ = 0`, then `Y → 0`, exponentially when `β = 0`.

use serde::Serialize;

use crate::error::{Error, FieldIssue, Result};

use super::fit::tail_rate;

/// Relative tolerance on sample spacing.
const GRID_TOL: f64 = 1e-9;
/// Upper bound standing in for "finite" on the `α⁻` window integrals.
const ALPHA_MINUS_BOUND: f64 = 1e6;
/// Tail bound for the `β⁺` window integrals.
const BETA_TAIL_BOUND: f64 = 1e-10;
/// `Y` samples below this fraction of the tail maximum are round-off and
/// excluded from the tail-rate fit.
const TAIL_FLOOR: f64 = 1e-24;
/// Minimum fitted log-drop of `Y` across the tail that counts as decay.
const TAIL_MIN_DROP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallReport {
    /// Smallest `∫_t^{t+τ} α` over windows starting in the tail.
    pub alpha_window_min: f64,
    /// Largest `∫_t^{t+τ} α⁻` over all windows.
    pub alpha_minus_window_max: f64,
    /// Largest `∫_t^{t+τ} β⁺` over windows starting in the tail.
    pub beta_plus_tail_max: f64,
    /// Fitted exponential rate of `Y` in the tail (`None` when `Y` is zero
    /// there).
    pub tail_rate: Option<f64>,
    pub tail_goodness: Option<f64>,
    pub hypothesis_alpha: bool,
    pub hypothesis_alpha_minus: bool,
    pub hypothesis_beta: bool,
    pub tail_decay: bool,
    pub pass: bool,
}

/// Checks the lemma's hypotheses on samples `(times, Y, α, β)`. The tail is
/// the second half of the horizon; window integrals use the trapezoid rule.
pub fn gronwall_check(
    times: &[f64],
    y: &[f64],
    alpha: &[f64],
    beta: &[f64],
    tau: f64,
    gamma: f64,
) -> Result<GronwallReport> {
    let n = times.len();
    if y.len() != n || alpha.len() != n || beta.len() != n {
        return Err(Error::ShapeMismatch {
            expected: vec![n; 3],
            found: vec![y.len(), alpha.len(), beta.len()],
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData { found: n, needed: 2 });
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::NonUniformGrid { index: 1 });
    }
    for i in 1..n {
        if ((times[i] - times[i - 1]) - dt).abs() > GRID_TOL * dt.max(times[i].abs()) {
            return Err(Error::NonUniformGrid { index: i });
        }
    }
    let w = (tau / dt).round() as usize;
    if !(tau > 0.0) || w == 0 || (w as f64 * dt - tau).abs() > GRID_TOL * tau.max(1.0) * 1e3 {
        return Err(Error::Config(vec![FieldIssue::new(
            "tau",
            format!("must be a positive multiple of the sample step {dt} (got {tau})"),
        )]));
    }
    if w >= n {
        return Err(Error::InsufficientData { found: n, needed: w + 1 });
    }

    let windows = |g: &dyn Fn(f64) -> f64, v: &[f64]| -> Vec<f64> {
        let mut cum = vec![0.0; n];
        for i in 1..n {
            cum[i] = cum[i - 1] + 0.5 * dt * (g(v[i - 1]) + g(v[i]));
        }
        (0..n - w).map(|i| cum[i + w] - cum[i]).collect()
    };
    let ia = windows(&|a| a, alpha);
    let iam = windows(&|a: f64| (-a).max(0.0), alpha);
    let ibp = windows(&|b: f64| b.max(0.0), beta);
    let tail_start = (n - w) / 2;

    let alpha_window_min = ia[tail_start..].iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_minus_window_max = iam.iter().copied().fold(0.0, f64::max);
    let beta_plus_tail_max = ibp[tail_start..].iter().copied().fold(0.0, f64::max);

    let half = n / 2;
    let (rate, goodness, tail_decay) = if y[half..].iter().all(|&v| v == 0.0) {
        (None, None, true)
    } else {
        match tail_rate(&times[half..], &y[half..], TAIL_FLOOR) {
            Ok(fit) => {
                let decays = fit.rate * (fit.t_end - fit.t_start) > TAIL_MIN_DROP;
                (Some(fit.rate), Some(fit.goodness), decays)
            }
            Err(Error::InsufficientData { .. }) => (None, None, false),
            Err(e) => return Err(e),
        }
    };

    let hypothesis_alpha = alpha_window_min >= gamma;
    let hypothesis_alpha_minus =
        alpha_minus_window_max.is_finite() && alpha_minus_window_max <= ALPHA_MINUS_BOUND;
    let hypothesis_beta = beta_plus_tail_max <= BETA_TAIL_BOUND;
    Ok(GronwallReport {
        alpha_window_min,
        alpha_minus_window_max,
        beta_plus_tail_max,
        tail_rate: rate,
        tail_goodness: goodness,
        hypothesis_alpha,
        hypothesis_alpha_minus,
        hypothesis_beta,
        tail_decay,
        pass: hypothesis_alpha && hypothesis_alpha_minus && hypothesis_beta && tail_decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn closed_form_decay_passes() {
        let t = grid(1001, 0.01);
        let y: Vec<f64> = t.iter().map(|&s| (-2.0 * s).exp()).collect();
        let r = gronwall_check(&t, &y, &vec![2.0; t.len()], &vec![0.0; t.len()], 1.0, 1.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.tail_rate.unwrap() - 2.0).abs() < 1e-9);
        assert!((r.alpha_window_min - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_alpha_fails_first_hypothesis() {
        let t = grid(1001, 0.01);
        let y: Vec<f64> = t.iter().map(|&s| s.exp()).collect();
        let r = gronwall_check(&t, &y, &vec![-1.0; t.len()], &vec![0.0; t.len()], 1.0, 1.0).unwrap();
        assert!(!r.hypothesis_alpha);
        assert!(!r.pass);
    }

    #[test]
    fn persistent_source_fails_third_hypothesis() {
        let t = grid(501, 0.01);
        let y = vec![0.5; t.len()];
        let r = gronwall_check(&t, &y, &vec![2.0; t.len()], &vec![1.0; t.len()], 1.0, 1.0).unwrap();
        assert!(!r.hypothesis_beta);
        assert!(!r.tail_decay);
    }

    #[test]
    fn nonuniform_grid_is_rejected() {
        let mut t = grid(50, 0.1);
        t[20] += 0.03;
        let v = vec![1.0; 50];
        assert!(matches!(
            gronwall_check(&t, &v, &v, &v, 1.0, 1.0),
            Err(Error::NonUniformGrid { index: 20 })
        ));
    }

    #[test]
    fn tau_off_grid_is_rejected() {
        let t = grid(50, 0.1);
        let v = vec![1.0; 50];
        assert!(gronwall_check(&t, &v, &v, &v, 0.25, 1.0).is_err());
    }
}
