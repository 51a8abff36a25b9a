//! Derivative coefficients of the momentum amplitude at k = 0, the reduced
//! order controlling the nonescape decay, and the special position where the
//! leading spatial profile vanishes for odd orders.
//!
//! Three routes produce the same table: an exact Taylor recurrence for the
//! analytic family, central finite differences for sampled grids, and
//! position-space moment integrals as an independent cross-check.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::packet::{FamilyPacket, GridPacket, WavePacket};
use crate::propagator;
use crate::quad;

/// Cap on the derivative order the table will hold.
pub const MAX_TABLE_ORDER: usize = 8;

/// Entries whose magnitude falls below this fraction of the largest entry
/// count as analytic zeros.
pub const ZERO_FRACTION: f64 = 1e-9;

/// Absolute tolerance on the imaginary part of the special position.
pub const SPECIAL_POSITION_IMAG_TOL: f64 = 1e-9;

/// How the table entries were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivMethod {
    Analytic,
    FiniteDifference,
    MomentIntegral,
}

/// Derivative coefficients of the momentum amplitude at k = 0, orders 0..=j_max.
#[derive(Debug, Clone)]
pub struct DerivativeTable {
    values: Vec<C64>,
    method: DerivMethod,
}

impl DerivativeTable {
    /// Builds a table from externally computed coefficients, for synthetic
    /// packets such as linear superpositions whose derivatives combine
    /// linearly from known members.
    pub fn from_values(values: Vec<C64>, method: DerivMethod) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "derivative table needs at least the order-zero entry".into(),
            ));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "derivative coefficients must be finite".into(),
            ));
        }
        Ok(DerivativeTable { values, method })
    }

    pub fn j_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, j: usize) -> C64 {
        self.values[j]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn method(&self) -> DerivMethod {
        self.method
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Magnitude below which an entry counts as an analytic zero.
    pub fn zero_threshold(&self) -> f64 {
        ZERO_FRACTION * self.max_magnitude()
    }

    pub fn is_zero(&self, j: usize) -> bool {
        self.values[j].norm() <= self.zero_threshold()
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        (0..self.values.len()).find(|&j| !self.is_zero(j))
    }
}

/// Derivative coefficients for any packet kind, orders 0..=j_max.
pub fn derivative_table(packet: &WavePacket, j_max: usize) -> Result<DerivativeTable> {
    if j_max > MAX_TABLE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "derivative order cap is {MAX_TABLE_ORDER}, requested {j_max}"
        )));
    }
    match packet {
        WavePacket::Family(p) => Ok(analytic_table(p, j_max)),
        WavePacket::Grid(g) => finite_difference_table(g, j_max),
    }
}

/// Exact table for a family member.
///
/// With amplitude N k^m E(k) and E(k) = sum_n b_n k^n the j-th derivative at
/// zero is N j! b_{j-m} for j >= m and zero below.  Available at any order;
/// the public cap applies only to the generic entry point.
pub(crate) fn analytic_table(packet: &FamilyPacket, j_max: usize) -> DerivativeTable {
    let m = packet.order();
    let b = packet.envelope_taylor(j_max.saturating_sub(m) + 1);
    let values = (0..=j_max)
        .map(|j| {
            if j < m {
                C64::new(0.0, 0.0)
            } else {
                packet.norm_const() * quad::factorial(j) * b[j - m]
            }
        })
        .collect();
    DerivativeTable {
        values,
        method: DerivMethod::Analytic,
    }
}

/// Central-difference table for a sampled grid.
///
/// Each order uses a 4th-order stencil evaluated at steps h and h/2 with one
/// Richardson step, h = 4 dk.  Above order 4 the step widens to hold the
/// rounding error of the high-order differences below the truncation error;
/// with h fixed at 4 dk the order-6 differences lose three to four digits,
/// which the widened step recovers.
pub fn finite_difference_table(packet: &GridPacket, j_max: usize) -> Result<DerivativeTable> {
    if j_max > MAX_TABLE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "derivative order cap is {MAX_TABLE_ORDER}, requested {j_max}"
        )));
    }
    let i0 = packet.zero_index().ok_or_else(|| {
        Error::InvalidParameter("momentum grid must contain the sample k = 0".into())
    })?;
    let mut values = Vec::with_capacity(j_max + 1);
    values.push(packet.samples()[i0]);
    for j in 1..=j_max {
        let step = step_intervals(j, packet);
        let coarse = apply_stencil(packet, i0, j, step)?;
        let fine = apply_stencil(packet, i0, j, step / 2)?;
        values.push(fine + (fine - coarse) / 15.0);
    }
    Ok(DerivativeTable {
        values,
        method: DerivMethod::FiniteDifference,
    })
}

/// Step width in grid intervals for the coarse stencil of order j.
fn step_intervals(j: usize, packet: &GridPacket) -> usize {
    if j <= 4 {
        return 4;
    }
    // balance h^6 truncation against eps / h^j rounding; the packet's
    // momentum feature scale is roughly an eighth of its reach
    let scale = packet.k_abs_max() / 8.0;
    let target = 1.5 * scale * f64::EPSILON.powf(1.0 / (j + 6) as f64);
    let mut step = (target / packet.spacing()).ceil() as usize;
    step = step.max(4);
    if !step.is_multiple_of(2) {
        step += 1;
    }
    step
}

/// Applies the 4th-order central stencil for derivative order j with nodes
/// spaced `step` grid intervals apart.
fn apply_stencil(packet: &GridPacket, i0: usize, j: usize, step: usize) -> Result<C64> {
    let h = step as f64 * packet.spacing();
    if h.powi(j as i32) < f64::MIN_POSITIVE * 1e32 {
        return Err(Error::NumericalFailure(format!(
            "finite-difference step {h:.3e} underflows at order {j}"
        )));
    }
    let r = j.div_ceil(2) + 1;
    let reach = r * step;
    if reach > i0 || i0 + reach >= packet.len() {
        return Err(Error::InvalidParameter(format!(
            "grid too short for the order-{j} stencil (needs {reach} intervals on each side of k = 0)"
        )));
    }
    let nodes: Vec<f64> = (-(r as isize)..=r as isize).map(|o| o as f64 * h).collect();
    let weights = fd_weights(j, 0.0, &nodes);
    let mut acc = C64::new(0.0, 0.0);
    for (idx, w) in weights.iter().enumerate() {
        let offset = (idx as isize - r as isize) * step as isize;
        let i = (i0 as isize + offset) as usize;
        acc += *w * packet.samples()[i];
    }
    Ok(acc)
}

/// Finite-difference weights for the `order`-th derivative at `x0` over the
/// given nodes (Fornberg's recurrence).
pub(crate) fn fd_weights(order: usize, x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// Moment-integral route: the j-th derivative at k = 0 equals
/// (-i)^j / sqrt(2 pi) times the j-th position moment of the packet.
pub fn derivative_table_moments(packet: &WavePacket, j_max: usize) -> Result<DerivativeTable> {
    if j_max > MAX_TABLE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "derivative order cap is {MAX_TABLE_ORDER}, requested {j_max}"
        )));
    }
    let prefactor = 1.0 / (2.0 * PI).sqrt();
    let minus_i = C64::new(0.0, -1.0);
    let mut values = Vec::with_capacity(j_max + 1);
    match packet {
        WavePacket::Family(p) => {
            let center = p.position_center();
            let half = 12.0 * p.width();
            for j in 0..=j_max {
                let moment = quad::refine_trapezoid_complex(
                    |y: f64| y.powi(j as i32) * propagator::family_field_value(p, 0.0, y),
                    center - half,
                    center + half,
                    256,
                    1e-14,
                    1e-12,
                )?;
                values.push(minus_i.powu(j as u32) * prefactor * moment);
            }
        }
        WavePacket::Grid(g) => {
            let (ys, psis) = propagator::position_samples(g)?;
            let dy = ys[1] - ys[0];
            for j in 0..=j_max {
                let weighted: Vec<C64> = ys
                    .iter()
                    .zip(&psis)
                    .map(|(y, p)| y.powi(j as i32) * p)
                    .collect();
                let moment = quad::trapezoid_complex(&weighted, dy);
                values.push(minus_i.powu(j as u32) * prefactor * moment);
            }
        }
    }
    Ok(DerivativeTable {
        values,
        method: DerivMethod::MomentIntegral,
    })
}

/// Reduced order: m/2 for even m, (m+1)/2 for odd m.  It sets the nonescape
/// decay exponent -(2 m_bar + 1) and the amplitude decay power m_bar + 1/2.
pub fn m_bar(m: usize) -> usize {
    if m.is_multiple_of(2) {
        m / 2
    } else {
        m.div_ceil(2)
    }
}

/// Position where the leading spatial profile of an odd-order packet
/// vanishes, when that position is real.
///
/// The profile is affine in x for odd m; its root is i v_{m+1} / ((m+1) v_m)
/// with v_j the table entries.  A root with a sizable imaginary part means
/// no real vanishing point, reported as `None`.
pub fn special_position(table: &DerivativeTable, m: usize) -> Result<Option<f64>> {
    if m.is_multiple_of(2) {
        return Err(Error::NotApplicable(format!(
            "even order m = {m} has a position-independent leading profile"
        )));
    }
    if table.j_max() < m + 1 {
        return Err(Error::InvalidParameter(format!(
            "table must reach order {} for the special position, has {}",
            m + 1,
            table.j_max()
        )));
    }
    let vm = table.value(m);
    if vm.norm() <= table.zero_threshold() {
        return Err(Error::DegenerateInput(format!(
            "derivative coefficient at the leading order m = {m} vanishes"
        )));
    }
    let xi = C64::new(0.0, 1.0) * table.value(m + 1) / ((m + 1) as f64 * vm);
    if xi.im.abs() < SPECIAL_POSITION_IMAG_TOL {
        Ok(Some(xi.re))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::FamilyPacket;

    fn family(m: usize, a0: f64, k0: f64, x0: f64) -> FamilyPacket {
        FamilyPacket::new(m, a0, k0, x0).expect("valid packet")
    }

    #[test]
    fn fornberg_reproduces_known_stencils() {
        let nodes: Vec<f64> = (-2..=2).map(|i| i as f64).collect();
        let w1 = fd_weights(1, 0.0, &nodes);
        let want1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let w2 = fd_weights(2, 0.0, &nodes);
        let want2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for i in 0..5 {
            assert!((w1[i] - want1[i]).abs() < 1e-12, "w1[{i}] = {}", w1[i]);
            assert!((w2[i] - want2[i]).abs() < 1e-12, "w2[{i}] = {}", w2[i]);
        }
    }

    #[test]
    fn analytic_table_low_order_values() {
        let table = analytic_table(&family(0, 1.0, 0.0, 0.0), 4);
        let n0 = std::f64::consts::PI.powf(-0.25);
        assert!((table.value(0).re - n0).abs() < 1e-12);
        assert!(table.value(1).norm() < 1e-15);
        // Gaussian curvature: second derivative equals -N at the peak
        assert!((table.value(2).re + n0).abs() < 1e-12);

        let table = analytic_table(&family(1, 1.0, 0.0, 0.0), 3);
        let n1 = (2.0 / std::f64::consts::PI.sqrt()).sqrt();
        assert!(table.value(0).norm() < 1e-15);
        assert!((table.value(1).re - n1).abs() < 1e-12);
        assert!(table.value(2).norm() < 1e-15);
    }

    #[test]
    fn finite_differences_match_analytic_low_orders() {
        let p = family(2, 1.0, 0.4, -0.3);
        let analytic = analytic_table(&p, 4);
        let g = p
            .sample_to_grid(p.default_k_half_width(), 4096)
            .expect("samples");
        let fd = finite_difference_table(&g, 4).expect("table");
        for j in 0..=4 {
            let want = analytic.value(j);
            let got = fd.value(j);
            let scale = analytic.max_magnitude();
            assert!(
                (got - want).norm() <= 1e-6 * want.norm().max(1e-6 * scale),
                "j = {j}: fd {got}, analytic {want}"
            );
        }
    }

    #[test]
    fn finite_differences_stay_accurate_at_high_orders() {
        let p = family(1, 1.0, 0.0, 0.0);
        let analytic = analytic_table(&p, 8);
        let g = p.sample_to_grid(8.0, 4096).expect("samples");
        let fd = finite_difference_table(&g, 8).expect("table");
        for j in [5usize, 7] {
            let want = analytic.value(j);
            let got = fd.value(j);
            assert!(
                (got - want).norm() <= 1e-5 * want.norm(),
                "j = {j}: fd {got}, analytic {want}"
            );
        }
    }

    #[test]
    fn moment_route_matches_finite_differences() {
        for m in 0..=2 {
            let p = family(m, 1.0, 0.0, 0.0);
            let packet = WavePacket::from(p.clone());
            let moments = derivative_table_moments(&packet, 3).expect("moments");
            let g = p.sample_to_grid(8.0, 4096).expect("samples");
            let fd = finite_difference_table(&g, 3).expect("table");
            let scale = fd.max_magnitude();
            for j in 0..=3 {
                let a = moments.value(j);
                let b = fd.value(j);
                // structural zeros differ only by route noise, so the
                // comparison needs an absolute floor at the table scale
                assert!(
                    (a - b).norm() <= 1e-5 * b.norm() + 1e-9 * scale,
                    "m = {m}, j = {j}: moment {a}, fd {b}"
                );
            }
        }
    }

    #[test]
    fn m_bar_values() {
        let want = [0usize, 1, 1, 2, 2, 3, 3, 4, 4];
        for (m, w) in want.iter().enumerate() {
            assert_eq!(m_bar(m), *w, "m = {m}");
        }
    }

    #[test]
    fn special_position_returns_center_for_centered_momentum() {
        let p = family(1, 1.0, 0.0, 0.5);
        let table = analytic_table(&p, 2);
        let xi = special_position(&table, 1).expect("applicable");
        assert_eq!(xi.map(|x| (x - 0.5).abs() < 1e-12), Some(true));
    }

    #[test]
    fn special_position_absent_for_boosted_packet() {
        let p = family(1, 1.0, 0.3, 0.0);
        let table = analytic_table(&p, 2);
        let xi = special_position(&table, 1).expect("applicable");
        assert_eq!(xi, None);
    }

    #[test]
    fn special_position_rejects_even_orders() {
        let p = family(2, 1.0, 0.0, 0.0);
        let table = analytic_table(&p, 3);
        match special_position(&table, 2) {
            Err(Error::NotApplicable(_)) => {}
            other => panic!("expected NotApplicable, got {other:?}"),
        }
    }

    #[test]
    fn special_position_flags_degenerate_leading_coefficient() {
        // order-3 packet probed as if it had order 1: v_1 vanishes
        let p = family(3, 1.0, 0.0, 0.0);
        let table = analytic_table(&p, 4);
        match special_position(&table, 1) {
            Err(Error::DegenerateInput(_)) => {}
            other => panic!("expected DegenerateInput, got {other:?}"),
        }
    }

    #[test]
    fn zero_threshold_separates_structural_zeros() {
        let p = family(2, 1.0, 0.0, 0.0);
        let table = analytic_table(&p, 4);
        assert!(table.is_zero(0));
        assert!(table.is_zero(1));
        assert!(!table.is_zero(2));
        assert_eq!(table.first_nonzero(), Some(2));
    }
}
