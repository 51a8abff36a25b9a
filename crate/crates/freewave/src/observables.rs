//! Survival and nonescape probabilities of evolved packets, pointwise and
//! as series over reduced time.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::packet::{FamilyPacket, GridPacket, Interval, WavePacket, GRID_NORM_TOL};
use crate::propagator::{self, EvolvedField};
use crate::quad;

/// Refinement trigger for grid-route nonescape: a doubled position grid
/// moving the result by more than this forces a Richardson combination.
pub const NONESCAPE_REFINE_TOL: f64 = 1e-9;

/// Upper slack on probabilities; values beyond it mark broken quadrature.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Survival and nonescape series over reduced times, with the packet and
/// interval that produced it.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub nonescape: Vec<f64>,
    pub interval: Interval,
    pub packet_descriptor: String,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Survival probability at physical time t: the squared overlap of the
/// evolved state with the initial one, computed in momentum space where
/// the evolution is a pure phase.
pub fn survival(packet: &WavePacket, t: f64) -> Result<f64> {
    check_time(t)?;
    match packet {
        WavePacket::Family(p) => Ok(survival_family(p, t)),
        WavePacket::Grid(g) => survival_grid(g, t),
    }
}

/// Closed form for the family: |psi_hat|^2 is a moment-weighted Gaussian,
/// and the phase e^{-itk^2} merges into its exponent.
fn survival_family(p: &FamilyPacket, t: f64) -> f64 {
    let a02 = p.width() * p.width();
    let k0 = p.momentum_center();
    let alpha = C64::new(a02, t);
    let beta = C64::new(2.0 * a02 * k0, 0.0);
    let gamma = C64::new(-a02 * k0 * k0, 0.0);
    let (sum, exponent) = quad::gaussian_moment_parts(2 * p.order(), alpha, beta);
    let overlap = p.norm_const() * p.norm_const() * sum * (exponent + gamma).exp();
    overlap.norm_sqr()
}

fn survival_grid(g: &GridPacket, t: f64) -> Result<f64> {
    let actual = g.len() - 1;
    let required = propagator::rule_intervals(g.k_max() - g.k_min(), g.k_abs_max(), t, 0.0);
    if actual < required {
        return Err(Error::Aliasing { required, actual });
    }
    let phased: Vec<C64> = (0..g.len())
        .map(|i| {
            let k = g.k_at(i);
            g.samples()[i].norm_sqr() * C64::from_polar(1.0, -t * k * k)
        })
        .collect();
    let overlap = quad::trapezoid_complex(&phased, g.spacing());
    let s = overlap.norm_sqr();
    if s > 1.0 + 4.0 * GRID_NORM_TOL {
        return Err(Error::NumericalFailure(format!(
            "survival {s} exceeds unity beyond the norm tolerance"
        )));
    }
    Ok(s)
}

/// Survival by the position-space route: overlap of the initial and
/// evolved fields.  Equal to [`survival`] by unitarity of the Fourier
/// transform; kept as an independent cross-check.
pub fn survival_overlap_position(packet: &FamilyPacket, t: f64) -> Result<f64> {
    check_time(t)?;
    let half = 12.0 * packet.width();
    let center = packet.position_center();
    let overlap = quad::refine_trapezoid_complex(
        |x: f64| {
            propagator::family_field_value(packet, 0.0, x).conj()
                * propagator::family_field_value(packet, t, x)
        },
        center - half,
        center + half,
        512,
        1e-13,
        1e-12,
    )?;
    Ok(overlap.norm_sqr())
}

/// Probability captured in the interval by an already evolved field:
/// trapezoid over the samples, with linear end-cell interpolation so the
/// interval endpoints need not sit on the grid.
pub fn nonescape(field: &EvolvedField, interval: &Interval) -> Result<f64> {
    let xs = &field.x_grid;
    let (a, b) = (interval.a(), interval.b());
    if xs.first().copied().unwrap_or(f64::INFINITY) > a
        || xs.last().copied().unwrap_or(f64::NEG_INFINITY) < b
    {
        return Err(Error::InvalidParameter(format!(
            "interval [{a}, {b}] is not covered by the field grid [{}, {}]",
            xs.first().copied().unwrap_or(f64::NAN),
            xs.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let density: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let value_at = |x: f64| -> f64 {
        // xs is sorted; linear interpolation of the density
        match xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => density[i],
            Err(i) => {
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (x - x0) / (x1 - x0);
                density[i - 1] * (1.0 - w) + density[i] * w
            }
        }
    };
    let mut pts: Vec<f64> = vec![a];
    let mut vals: Vec<f64> = vec![value_at(a)];
    for (&x, &d) in xs.iter().zip(&density) {
        if x > a && x < b {
            pts.push(x);
            vals.push(d);
        }
    }
    pts.push(b);
    vals.push(value_at(b));
    Ok(quad::trapezoid_nonuniform(&pts, &vals))
}

/// Nonescape for a family packet by adaptive quadrature of the exact
/// evolved density over the interval.
pub fn nonescape_family(packet: &FamilyPacket, t: f64, interval: &Interval) -> Result<f64> {
    check_time(t)?;
    quad::refine_trapezoid(
        |x: f64| propagator::family_field_value(packet, t, x).norm_sqr(),
        interval.a(),
        interval.b(),
        256,
        1e-13,
        1e-12,
    )
}

/// position grid intervals resolving the field's fastest oscillation,
/// 64 samples per wave at the packet's top momentum
fn nonescape_grid_intervals(interval: &Interval, k_abs_max: f64) -> usize {
    let raw = (interval.length() * 32.0 * k_abs_max / std::f64::consts::PI).ceil() as usize;
    let n = raw.max(256);
    n + n % 2
}

/// Nonescape for a grid packet: evolve onto a resolving grid over the
/// interval, then trapezoid with one refinement step; a Richardson
/// combination absorbs any residual step dependence.
pub fn nonescape_grid(packet: &GridPacket, t: f64, interval: &Interval) -> Result<f64> {
    check_time(t)?;
    let n = nonescape_grid_intervals(interval, packet.k_abs_max());
    let eval = |intervals: usize| -> Result<f64> {
        let xs: Vec<f64> = (0..=intervals)
            .map(|i| interval.a() + interval.length() * i as f64 / intervals as f64)
            .collect();
        let field = propagator::evolve_grid(packet, t, &xs)?;
        nonescape(&field, interval)
    };
    let coarse = eval(n)?;
    let fine = eval(2 * n)?;
    if (fine - coarse).abs() > NONESCAPE_REFINE_TOL {
        // trapezoid converges at second order, so the doubled grid
        // cancels the leading error term
        Ok(fine + (fine - coarse) / 3.0)
    } else {
        Ok(fine)
    }
}

/// Nonescape at physical time t for either packet kind.
pub fn nonescape_at(packet: &WavePacket, t: f64, interval: &Interval) -> Result<f64> {
    match packet {
        WavePacket::Family(p) => nonescape_family(p, t, interval),
        WavePacket::Grid(g) => nonescape_grid(g, t, interval),
    }
}

/// Both observables over a strictly increasing set of reduced times.
///
/// Family packets go through the closed-form survival and adaptive
/// nonescape; grid packets through phase quadrature and evolved fields.
pub fn observable_series(
    packet: &WavePacket,
    reduced_times: &[f64],
    interval: &Interval,
) -> Result<ObservableSeries> {
    if reduced_times.is_empty() {
        return Err(Error::InvalidParameter("empty time series".into()));
    }
    if reduced_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "reduced times must be finite and non-negative".into(),
        ));
    }
    if reduced_times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "reduced times must be strictly increasing".into(),
        ));
    }
    let units = packet.default_units();
    // grid packets are normalized only to the grid tolerance, so their
    // probability bound is correspondingly looser
    let slack = match packet {
        WavePacket::Family(_) => PROBABILITY_SLACK,
        WavePacket::Grid(_) => PROBABILITY_SLACK + 4.0 * GRID_NORM_TOL,
    };
    let mut survival_series = Vec::with_capacity(reduced_times.len());
    let mut nonescape_series = Vec::with_capacity(reduced_times.len());
    for &reduced in reduced_times {
        let t = units.physical_time(reduced);
        let s = survival(packet, t)?;
        let p = nonescape_at(packet, t, interval)?;
        for (label, v) in [("survival", s), ("nonescape", p)] {
            if !(0.0..=1.0 + slack).contains(&v) {
                return Err(Error::NumericalFailure(format!(
                    "{label} {v} out of [0, 1] at reduced time {reduced}"
                )));
            }
        }
        if reduced == 0.0 && (s - 1.0).abs() > slack {
            return Err(Error::NumericalFailure(format!(
                "survival at t = 0 is {s}, expected 1 for a normalized packet"
            )));
        }
        survival_series.push(s);
        nonescape_series.push(p);
    }
    Ok(ObservableSeries {
        times: reduced_times.to_vec(),
        survival: survival_series,
        nonescape: nonescape_series,
        interval: *interval,
        packet_descriptor: packet.descriptor(),
    })
}

/// log-spaced reduced times, inclusive of both ends
pub fn log_spaced_times(t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_lo > 0.0) || !(t_hi > t_lo) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "log spacing needs 0 < lo < hi and n >= 2, got [{t_lo}, {t_hi}] with {n}"
        )));
    }
    let (llo, lhi) = (t_lo.log10(), t_hi.log10());
    Ok((0..n)
        .map(|i| 10f64.powf(llo + (lhi - llo) * i as f64 / (n - 1) as f64))
        .collect())
}

/// uniformly spaced reduced times, inclusive of both ends
pub fn linear_spaced_times(t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<f64>> {
    if !t_lo.is_finite() || !(t_hi > t_lo) || t_lo < 0.0 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "linear spacing needs 0 <= lo < hi and n >= 2, got [{t_lo}, {t_hi}] with {n}"
        )));
    }
    Ok((0..n)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64)
        .collect())
}
