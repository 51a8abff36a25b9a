//! Power-law extraction from simulated decay curves and comparison
//! against the closed-form asymptotic predictions.

use crate::asymptotics::{self, AsymptoticProfile};
use crate::error::{Error, Result};
use crate::observables::{self, ObservableSeries};
use crate::packet::{Interval, WavePacket};

/// Minimum sample count for a stable two-parameter log-log fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Least-squares fit of v = amplitude * t^exponent over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub exponent: f64,
    pub amplitude: f64,
    /// window actually used, in the same time variable as the input
    pub window: (f64, f64),
    /// root-mean-square residual in log10 space
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Side-by-side record of predicted and fitted decay laws.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub profile: AsymptoticProfile,
    pub predicted_exponent_s: f64,
    pub predicted_exponent_p: f64,
    pub fitted_s: FitResult,
    pub fitted_p: FitResult,
    /// fitted amplitude over predicted coefficient, survival
    pub coefficient_ratio_s: f64,
    /// fitted amplitude over predicted coefficient, nonescape
    pub coefficient_ratio_p: f64,
}

/// Fits a power law to (times, values) restricted to the given window.
/// Times and values must be positive where used; the fit runs on log10
/// of both axes.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "time and value columns differ in length: {} vs {}",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "fit window must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "power-law fit needs positive finite values, got {v} at t = {t}"
            )));
        }
        xs.push(t.log10());
        ys.push(v.log10());
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter(format!(
            "window ({lo}, {hi}) keeps only {n} samples, need at least {MIN_FIT_POINTS}"
        )));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateInput(
            "all samples in the window share one time, slope is undefined".into(),
        ));
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (intercept + exponent * x);
        ss += r * r;
    }
    Ok(FitResult {
        exponent,
        amplitude: 10f64.powf(intercept),
        window,
        rms_residual: (ss / nf).sqrt(),
        n_points: n,
    })
}

/// Simulates the observables over the given reduced times, fits both
/// decay tails over the last decade, and pairs the fits with the
/// closed-form predictions.
pub fn compare(
    packet: &WavePacket,
    interval: &Interval,
    reduced_times: &[f64],
) -> Result<ComparisonReport> {
    let series = observables::observable_series(packet, reduced_times, interval)?;
    compare_series(packet, &series)
}

/// Same as [`compare`], for a series computed elsewhere.
pub fn compare_series(packet: &WavePacket, series: &ObservableSeries) -> Result<ComparisonReport> {
    let t_max = *series
        .times
        .last()
        .expect("observable series is never empty");
    if t_max < 100.0 {
        return Err(Error::Domain(format!(
            "asymptotic comparison needs reduced times reaching 100, got {t_max}"
        )));
    }
    let window = (t_max / 10.0, t_max);
    let profile = asymptotics::asymptotic_profile(packet, &series.interval)?;
    let fitted_s = fit_power_law(&series.times, &series.survival, window)?;
    let fitted_p = fit_power_law(&series.times, &series.nonescape, window)?;
    let predicted_exponent_s = -(2.0 * profile.m as f64 + 1.0);
    let predicted_exponent_p = -(2.0 * profile.m_bar as f64 + 1.0);
    let coefficient_ratio_s = fitted_s.amplitude / profile.s_coefficient;
    let coefficient_ratio_p = fitted_p.amplitude / profile.p_coefficient;
    Ok(ComparisonReport {
        profile,
        predicted_exponent_s,
        predicted_exponent_p,
        fitted_s,
        fitted_p,
        coefficient_ratio_s,
        coefficient_ratio_p,
    })
}
