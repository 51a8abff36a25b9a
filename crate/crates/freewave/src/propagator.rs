//! Free time evolution: a closed form for the analytic family and
//! oscillatory trapezoid quadrature over momentum for sampled grids, plus
//! the sampling rule that keeps the quadrature alias-free.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::packet::{FamilyPacket, GridPacket, WavePacket};
use crate::quad;

/// Floor on the interval count returned by [`required_grid`].
pub const MIN_GRID_INTERVALS: usize = 4096;

/// Safety factor in the momentum sampling rule: the phase may advance at
/// most pi over this many grid steps.
pub const SAMPLING_SAFETY: f64 = 4.0;

/// Tolerated norm drift before an evolution counts as failed.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

/// A packet evolved to a single time, sampled on a position grid.
#[derive(Debug, Clone)]
pub struct EvolvedField {
    pub t: f64,
    pub reduced_time: f64,
    pub x_grid: Vec<f64>,
    pub values: Vec<C64>,
    /// Trapezoid norm of the field over `x_grid`; equals the captured
    /// probability, so it approaches one only when the grid spans the
    /// spread packet.
    pub norm: f64,
}

impl EvolvedField {
    fn new(t: f64, reduced_time: f64, x_grid: Vec<f64>, values: Vec<C64>) -> Self {
        let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        let norm = quad::trapezoid_nonuniform(&x_grid, &sq);
        EvolvedField {
            t,
            reduced_time,
            x_grid,
            values,
            norm,
        }
    }
}

/// Closed-form field value for a family member at time t.
///
/// The momentum integral of k^m against a complex Gaussian has an exact
/// binomial form, so the evaluation costs O(m) per point and keeps full
/// relative precision at arbitrarily late times.
pub fn family_field_value(packet: &FamilyPacket, t: f64, x: f64) -> C64 {
    let a02 = packet.width() * packet.width();
    let k0 = packet.momentum_center();
    let alpha = C64::new(0.5 * a02, t);
    let beta = C64::new(a02 * k0, x - packet.position_center());
    let gamma = C64::new(-0.5 * a02 * k0 * k0, 0.0);
    let (sum, exponent) = quad::gaussian_moment_parts(packet.order(), alpha, beta);
    packet.norm_const() / (2.0 * PI).sqrt() * sum * (exponent + gamma).exp()
}

/// Evolves a family member on the given position grid.
pub fn evolve_family(packet: &FamilyPacket, t: f64, x_grid: &[f64]) -> EvolvedField {
    assert!(
        t >= 0.0 && t.is_finite(),
        "time must be finite and non-negative"
    );
    let values = x_grid
        .iter()
        .map(|&x| family_field_value(packet, t, x))
        .collect();
    EvolvedField::new(t, packet.units().reduced_time(t), x_grid.to_vec(), values)
}

/// Interval count demanded by the sampling rule for a span of momenta.
pub(crate) fn rule_intervals(k_span: f64, k_abs_max: f64, t: f64, x_reach: f64) -> usize {
    let phase_rate = x_reach + 2.0 * t * k_abs_max;
    (k_span * SAMPLING_SAFETY * phase_rate / PI).ceil().max(1.0) as usize
}

/// The sampling rule before rounding: intervals needed across the packet's
/// momentum window so the evolution phase advances by at most pi over
/// [`SAMPLING_SAFETY`] grid steps.  Scales linearly in t_max.
pub fn required_intervals_rule(k_half_width: f64, t_max: f64, x_max: f64) -> usize {
    rule_intervals(2.0 * k_half_width, k_half_width, t_max, x_max)
}

/// Momentum grid intervals needed to evolve the packet to `t_max` on
/// positions up to `|x| = x_max`: the rule value rounded up to a power of
/// two, floored at [`MIN_GRID_INTERVALS`].
pub fn required_grid(packet: &WavePacket, t_max: f64, x_max: f64) -> usize {
    let reach = packet.momentum_reach();
    let raw = required_intervals_rule(reach, t_max, x_max);
    raw.max(MIN_GRID_INTERVALS).next_power_of_two()
}

/// Evolves a sampled packet by direct trapezoid quadrature over momentum.
///
/// Rejects grids that violate the sampling rule for the requested time and
/// positions; a window norm above unity marks a failed quadrature.
pub fn evolve_grid(packet: &GridPacket, t: f64, x_grid: &[f64]) -> Result<EvolvedField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let x_reach = x_grid.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let actual = packet.len() - 1;
    let required = rule_intervals(
        packet.k_max() - packet.k_min(),
        packet.k_abs_max(),
        t,
        x_reach,
    );
    if actual < required {
        return Err(Error::Aliasing { required, actual });
    }
    let dk = packet.spacing();
    let prefactor = dk / (2.0 * PI).sqrt();
    let n = packet.len();
    let values: Vec<C64> = x_grid
        .iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, s) in packet.samples().iter().enumerate() {
                let k = packet.k_at(i);
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                acc += w * s * C64::from_polar(1.0, k * x - t * k * k);
            }
            acc * prefactor
        })
        .collect();
    let field = EvolvedField::new(t, packet.units().reduced_time(t), x_grid.to_vec(), values);
    if field.norm > 1.0 + NORM_DRIFT_TOL {
        return Err(Error::NumericalFailure(format!(
            "window norm {} exceeds unity; quadrature has broken down",
            field.norm
        )));
    }
    Ok(field)
}

/// Half-width of the position window that contains the evolved packet:
/// the initial support plus ballistic spreading.
pub fn ballistic_half_width(a0: f64, k_abs_max: f64, t: f64) -> f64 {
    12.0 * a0 + 4.0 * t * k_abs_max
}

/// Deviation of the full-window norm from unity at time t.
///
/// Free evolution is unitary, so any drift measures quadrature error.  For
/// family members the closed form makes this cheap at any time; for grids
/// the cost grows with t and the check is practical at moderate times.
pub fn unitarity_defect(packet: &WavePacket, t: f64) -> Result<f64> {
    match packet {
        WavePacket::Family(p) => {
            let center = p.position_center() + 2.0 * p.momentum_center() * t;
            let half = ballistic_half_width(p.width(), p.default_k_half_width(), t);
            let norm = quad::refine_trapezoid(
                |x: f64| family_field_value(p, t, x).norm_sqr(),
                center - half,
                center + half,
                512,
                1e-12,
                1e-11,
            )?;
            Ok((norm - 1.0).abs())
        }
        WavePacket::Grid(g) => {
            let k_max = g.k_abs_max();
            let half = ballistic_half_width(8.0 / k_max.max(1e-12), k_max, t);
            let dx = PI / (8.0 * k_max);
            let n = ((2.0 * half / dx).ceil() as usize).max(64);
            let xs: Vec<f64> = (0..=n)
                .map(|i| -half + 2.0 * half * i as f64 / n as f64)
                .collect();
            let field = evolve_grid(g, t, &xs)?;
            Ok((field.norm - 1.0).abs())
        }
    }
}

/// Position samples of a grid packet at t = 0 on a self-selected window.
///
/// The window is found by scanning the field outward until the amplitude
/// has decayed; a packet that fails to decay inside the alias-reliable
/// range is rejected.
pub(crate) fn position_samples(packet: &GridPacket) -> Result<(Vec<f64>, Vec<C64>)> {
    let k_max = packet.k_abs_max();
    let y_limit = PI / (SAMPLING_SAFETY * packet.spacing());
    let dy = PI / (8.0 * k_max);
    let n = ((2.0 * y_limit / dy).ceil() as usize).max(64);
    let ys: Vec<f64> = (0..=n)
        .map(|i| -y_limit + 2.0 * y_limit * i as f64 / n as f64)
        .collect();
    let dk = packet.spacing();
    let prefactor = dk / (2.0 * PI).sqrt();
    let last = packet.len() - 1;
    let psis: Vec<C64> = ys
        .iter()
        .map(|&y| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, s) in packet.samples().iter().enumerate() {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                acc += w * s * C64::from_polar(1.0, packet.k_at(i) * y);
            }
            acc * prefactor
        })
        .collect();
    let peak = psis.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::NumericalFailure("position field vanished".into()));
    }
    let floor = 1e-12 * peak;
    let mut lo = 0;
    while lo < psis.len() && psis[lo].norm() <= floor {
        lo += 1;
    }
    let mut hi = psis.len();
    while hi > 0 && psis[hi - 1].norm() <= floor {
        hi -= 1;
    }
    if lo == 0 || hi == psis.len() {
        return Err(Error::WindowTooNarrow(format!(
            "packet has not decayed within the alias-reliable range |y| <= {y_limit:.2}"
        )));
    }
    // keep a margin of decayed samples on both sides
    let lo = lo.saturating_sub(16);
    let hi = (hi + 16).min(psis.len());
    Ok((ys[lo..hi].to_vec(), psis[lo..hi].to_vec()))
}

/// Short-time cross-check of the evolution through the position-space
/// kernel: a convolution with a pure-phase Gaussian.  The kernel does not
/// decay, so this route is only reliable while the oscillation stays modest;
/// it exists to corroborate the momentum-space paths, not to replace them.
pub fn evolve_kernel_shorttime(packet: &FamilyPacket, t: f64, x_grid: &[f64]) -> Result<Vec<C64>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel route supports 0 < t <= 1, got {t}"
        )));
    }
    // (1 / (4 pi i t))^{1/2} with the principal branch
    let prefactor = C64::from_polar(1.0 / (4.0 * PI * t).sqrt(), -PI / 4.0);
    let center = packet.position_center();
    let half = 12.0 * packet.width();
    x_grid
        .iter()
        .map(|&x| {
            let phase_quarter_t = 1.0 / (4.0 * t);
            let integral = quad::refine_trapezoid_complex(
                |y: f64| {
                    let d = x - y;
                    family_field_value(packet, 0.0, y)
                        * C64::from_polar(1.0, d * d * phase_quarter_t)
                },
                center - half,
                center + half,
                1024,
                1e-13,
                1e-11,
            )?;
            Ok(prefactor * integral)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::FamilyPacket;

    fn family(m: usize, a0: f64, k0: f64, x0: f64) -> FamilyPacket {
        FamilyPacket::new(m, a0, k0, x0).expect("valid packet")
    }

    fn grid_of(p: &FamilyPacket, n: usize) -> GridPacket {
        p.sample_to_grid(p.default_k_half_width(), n)
            .expect("samples")
    }

    #[test]
    fn ground_packet_matches_spreading_gaussian() {
        // |psi(x,t)|^2 = pi^{-1/2} (1+4t^2)^{-1/2} exp(-x^2/(1+4t^2))
        let p = family(0, 1.0, 0.0, 0.0);
        for t in [0.0, 1.0, 10.0] {
            let s = 1.0 + 4.0 * t * t;
            for x in [0.0, 1.0, 2.0] {
                let got = family_field_value(&p, t, x).norm_sqr();
                let want = (-x * x / s).exp() / (std::f64::consts::PI * s).sqrt();
                assert!(
                    ((got - want) / want).abs() < 1e-12,
                    "t = {t}, x = {x}: got {got}, want {want}"
                );
            }
        }
        let peak = family_field_value(&p, 10.0, 0.0).norm_sqr();
        assert!((peak - 0.028173).abs() < 1e-5, "peak {peak}");
    }

    #[test]
    fn evolve_at_zero_time_reproduces_initial_packet() {
        let p = family(1, 1.0, 0.0, 0.3);
        let xs: Vec<f64> = (-20..=20).map(|i| 0.2 * i as f64).collect();
        let field = evolve_family(&p, 0.0, &xs);
        // independent check at one point: the m = 0 packet in position space
        let p0 = family(0, 1.0, 0.0, 0.0);
        let got = family_field_value(&p0, 0.0, 0.7);
        let want = std::f64::consts::PI.powf(-0.25) * (-0.7f64 * 0.7 / 2.0).exp();
        assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12);
        assert!(field.norm < 1.0 + 1e-9);
    }

    #[test]
    fn grid_route_agrees_with_closed_form() {
        let p = family(0, 1.0, 0.0, 0.0);
        let g = grid_of(&p, 4096);
        let xs: Vec<f64> = (-16..=16).map(|i| 0.25 * i as f64).collect();
        let t = 5.0;
        let grid_field = evolve_grid(&g, t, &xs).expect("evolves");
        let family_field = evolve_family(&p, t, &xs);
        let max_diff = grid_field
            .values
            .iter()
            .zip(&family_field.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-8, "max deviation {max_diff}");
    }

    #[test]
    fn grid_route_at_zero_time_returns_initial_packet() {
        let p = family(2, 1.0, 0.0, 0.0);
        let g = grid_of(&p, 4096);
        let xs: Vec<f64> = (-12..=12).map(|i| 0.3 * i as f64).collect();
        let field = evolve_grid(&g, 0.0, &xs).expect("evolves");
        for (x, v) in xs.iter().zip(&field.values) {
            let want = family_field_value(&p, 0.0, *x);
            assert!((v - want).norm() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn sampling_rule_values() {
        let p = WavePacket::from(family(0, 1.0, 0.0, 0.0));
        assert_eq!(required_grid(&p, 0.0, 4.0), 4096, "floor applies at t = 0");
        let raw100 = required_intervals_rule(8.0, 100.0, 4.0);
        assert_eq!(required_grid(&p, 100.0, 4.0), 32768);
        let raw1000 = required_intervals_rule(8.0, 1000.0, 4.0);
        let ratio = raw1000 as f64 / raw100 as f64;
        assert!(
            (ratio - 10.0).abs() < 0.05,
            "rule scales linearly, ratio {ratio}"
        );
    }

    #[test]
    fn coarse_grid_is_rejected_as_aliased() {
        let p = family(0, 1.0, 0.0, 0.0);
        let g = p.sample_to_grid(8.0, 64).expect("samples");
        let xs = [0.0, 4.0];
        match evolve_grid(&g, 10.0, &xs) {
            Err(Error::Aliasing { required, actual }) => {
                assert_eq!(actual, 64);
                assert!(required > 64, "required {required}");
            }
            other => panic!("expected aliasing error, got {other:?}"),
        }
    }

    #[test]
    fn unitarity_holds_for_family_route() {
        let p = WavePacket::from(family(2, 1.0, 0.0, 0.0));
        for t in [0.5, 10.0, 250.0] {
            let defect = unitarity_defect(&p, t).expect("norm");
            assert!(defect < 1e-8, "t = {t}: defect {defect}");
        }
    }

    #[test]
    fn unitarity_holds_for_grid_route_at_moderate_time() {
        let p = family(1, 1.0, 0.0, 0.0);
        let g = grid_of(&p, 8192);
        let defect = unitarity_defect(&WavePacket::from(g), 1.0).expect("norm");
        assert!(defect < 1e-7, "defect {defect}");
    }

    #[test]
    fn kernel_route_corroborates_momentum_route() {
        let p = family(1, 1.0, 0.5, 0.0);
        let xs = [-1.0, 0.0, 0.8, 2.0];
        let t = 0.5;
        let kernel = evolve_kernel_shorttime(&p, t, &xs).expect("evolves");
        let direct = evolve_family(&p, t, &xs);
        for (a, b) in kernel.iter().zip(&direct.values) {
            assert!((a - b).norm() < 1e-6, "kernel {a}, direct {b}");
        }
    }

    #[test]
    fn kernel_route_rejects_late_times() {
        let p = family(0, 1.0, 0.0, 0.0);
        assert!(evolve_kernel_shorttime(&p, 2.0, &[0.0]).is_err());
        assert!(evolve_kernel_shorttime(&p, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn position_samples_capture_grid_packet() {
        let p = family(0, 1.0, 0.0, 1.5);
        let g = p.sample_to_grid(9.5, 4096).expect("samples");
        let (ys, psis) = position_samples(&g).expect("window");
        let dy = ys[1] - ys[0];
        let sq: Vec<f64> = psis.iter().map(|v| v.norm_sqr()).collect();
        let norm = quad::trapezoid(&sq, dy);
        assert!((norm - 1.0).abs() < 1e-8, "norm {norm}");
        // peak near the shifted center
        let (i_peak, _) = psis
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("nonempty");
        assert!((ys[i_peak] - 1.5).abs() < 0.1, "peak at {}", ys[i_peak]);
    }
}
