use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ErrorSeries;

/// Least-squares fit `ln |χ(t)| ≈ intercept - rate · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Coefficient of determination of the line fit.
    pub goodness: f64,
    pub samples: usize,
}

/// Minimum number of samples a fit needs.
pub const MIN_FIT_SAMPLES: usize = 4;

/// Fits on the samples with `l2_chi / l2_chi(0)` in `[floor, ceiling]`.
pub fn fit_decay_rate(series: &ErrorSeries, floor: f64, ceiling: f64) -> Result<DecayFit> {
    if !(floor > 0.0 && floor < ceiling) {
        return Err(Error::Config(vec![crate::FieldIssue::new(
            "fit",
            format!("need 0 < floor < ceiling (got {floor}, {ceiling})"),
        )]));
    }
    let first = series.l2_chi.first().copied().unwrap_or(0.0);
    let points: Vec<(f64, f64)> = if first > 0.0 {
        series
            .times
            .iter()
            .zip(&series.l2_chi)
            .filter(|&(_, &e)| {
                let r = e / first;
                r >= floor && r <= ceiling
            })
            .map(|(&t, &e)| (t, e.ln()))
            .collect()
    } else {
        Vec::new()
    };
    fit_line(&points)
}

fn fit_line(points: &[(f64, f64)]) -> Result<DecayFit> {
    let n = points.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            found: n,
            needed: MIN_FIT_SAMPLES,
        });
    }
    let nf = n as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in points {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if stt == 0.0 {
        return Err(Error::InsufficientData {
            found: 1,
            needed: MIN_FIT_SAMPLES,
        });
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_res: f64 = points
        .iter()
        .map(|&(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let goodness = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate: -slope,
        intercept,
        t_start: points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        t_end: points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        goodness,
        samples: n,
    })
}

/// Exponential rate of a positive sequence, fitted on the samples above
/// `floor · max`.
pub(crate) fn tail_rate(times: &[f64], values: &[f64], floor: f64) -> Result<DecayFit> {
    let top = values.iter().copied().fold(0.0f64, f64::max);
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|&(_, &v)| v > 0.0 && v >= floor * top)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    fit_line(&points)
}
