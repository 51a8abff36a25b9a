//! Initial wave packets in momentum representation: an analytic
//! polynomial-times-Gaussian family and sampled momentum grids, plus
//! detection of the small-momentum order that controls the decay laws.

use num_complex::Complex64 as C64;

use crate::deriv;
use crate::error::{Error, Result};
use crate::quad;

/// Endpoint amplitude above this marks a momentum grid as too narrow.
pub const ENDPOINT_DECAY_LIMIT: f64 = 1e-12;

/// Tolerance on the trapezoid norm of a sampled grid.
pub const GRID_NORM_TOL: f64 = 1e-8;

/// Hard cap on the family's momentum order.
pub const MAX_FAMILY_ORDER: usize = 8;

/// Above this order the finite-difference and quadrature machinery loses
/// accuracy; callers may want to warn their users.
pub const SOFT_FAMILY_ORDER: usize = 4;

/// Unit conventions used throughout: hbar = 1 and 2M = 1, so free evolution
/// carries the phase exp(-i t k^2) and the reduced time is t / a0^2 for a
/// reference width `a0_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    a0_ref: f64,
}

impl UnitSystem {
    pub fn new(a0_ref: f64) -> Result<Self> {
        if !(a0_ref > 0.0) || !a0_ref.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference width must be positive and finite, got {a0_ref}"
            )));
        }
        Ok(UnitSystem { a0_ref })
    }

    pub fn hbar(&self) -> f64 {
        1.0
    }

    /// The combination 2M appearing in the free dispersion; fixed to 1.
    pub fn two_m(&self) -> f64 {
        1.0
    }

    pub fn a0_ref(&self) -> f64 {
        self.a0_ref
    }

    pub fn reduced_time(&self, t: f64) -> f64 {
        t / (self.a0_ref * self.a0_ref)
    }

    pub fn physical_time(&self, reduced_t: f64) -> f64 {
        reduced_t * self.a0_ref * self.a0_ref
    }
}

/// Member of the analytic family: amplitude N k^m exp(-a0^2 (k-k0)^2 / 2)
/// times the translation phase exp(-i x0 k), normalized to unit L2 norm.
///
/// The order m sets how fast the amplitude vanishes at k = 0 and thereby the
/// long-time decay exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPacket {
    m: usize,
    a0: f64,
    k0: f64,
    x0: f64,
    norm_const: f64,
}

impl FamilyPacket {
    /// Builds a unit-norm member.  The normalization constant comes from
    /// quadrature of the squared amplitude and inversion, not from a closed
    /// form, so it stays valid for every parameter combination.
    pub fn new(m: usize, a0: f64, k0: f64, x0: f64) -> Result<Self> {
        if m > MAX_FAMILY_ORDER {
            return Err(Error::InvalidParameter(format!(
                "momentum order m = {m} exceeds the supported cap {MAX_FAMILY_ORDER}"
            )));
        }
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "width a0 must be positive and finite, got {a0}"
            )));
        }
        if !k0.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidParameter(
                "centers k0 and x0 must be finite".into(),
            ));
        }
        let half = 12.0 / a0;
        let mexp = 2 * m as i32;
        let norm2 = quad::refine_trapezoid(
            |k: f64| k.powi(mexp) * (-a0 * a0 * (k - k0) * (k - k0)).exp(),
            k0 - half,
            k0 + half,
            256,
            0.0,
            1e-13,
        )?;
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "norm quadrature returned {norm2}"
            )));
        }
        Ok(FamilyPacket {
            m,
            a0,
            k0,
            x0,
            norm_const: 1.0 / norm2.sqrt(),
        })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn width(&self) -> f64 {
        self.a0
    }

    pub fn momentum_center(&self) -> f64 {
        self.k0
    }

    pub fn position_center(&self) -> f64 {
        self.x0
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Momentum amplitude at k.
    pub fn psi_hat(&self, k: f64) -> C64 {
        let d = k - self.k0;
        let env =
            self.norm_const * k.powi(self.m as i32) * (-0.5 * self.a0 * self.a0 * d * d).exp();
        env * C64::from_polar(1.0, -self.x0 * k)
    }

    /// Half-width of the momentum window that holds the packet to the
    /// endpoint decay limit.
    pub fn default_k_half_width(&self) -> f64 {
        self.k0.abs() + 8.0 / self.a0
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem { a0_ref: self.a0 }
    }

    /// Taylor coefficients b_n about k = 0 of the Gaussian envelope
    /// exp(-a0^2 (k-k0)^2 / 2 - i x0 k), so that the amplitude is
    /// N k^m sum_n b_n k^n.  The quadratic exponent gives a two-term
    /// recurrence, exact to rounding at any order.
    pub(crate) fn envelope_taylor(&self, count: usize) -> Vec<C64> {
        let c2 = C64::new(-0.5 * self.a0 * self.a0, 0.0);
        let c1 = C64::new(self.a0 * self.a0 * self.k0, -self.x0);
        let c0 = C64::new(-0.5 * self.a0 * self.a0 * self.k0 * self.k0, 0.0);
        let mut b = vec![C64::new(0.0, 0.0); count.max(1)];
        b[0] = c0.exp();
        for n in 0..count.saturating_sub(1) {
            let prev = if n == 0 { C64::new(0.0, 0.0) } else { b[n - 1] };
            b[n + 1] = (c1 * b[n] + 2.0 * c2 * prev) / (n + 1) as f64;
        }
        b
    }

    /// Samples the amplitude on the symmetric window [-k_half_width,
    /// k_half_width] with `n_intervals` uniform intervals (n_intervals + 1
    /// samples).  The interval count must be even so that k = 0 lands on a
    /// sample, which the derivative stencils rely on.
    pub fn sample_to_grid(&self, k_half_width: f64, n_intervals: usize) -> Result<GridPacket> {
        if !(k_half_width > 0.0) || !k_half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "k_half_width must be positive and finite, got {k_half_width}"
            )));
        }
        if n_intervals < 16 || !n_intervals.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "n_intervals must be even and at least 16, got {n_intervals}"
            )));
        }
        let dk = 2.0 * k_half_width / n_intervals as f64;
        let samples: Vec<C64> = (0..=n_intervals)
            .map(|i| self.psi_hat(-k_half_width + i as f64 * dk))
            .collect();
        GridPacket::new(-k_half_width, k_half_width, samples)
    }
}

/// Momentum amplitude sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPacket {
    k_min: f64,
    k_max: f64,
    spacing: f64,
    samples: Vec<C64>,
}

impl GridPacket {
    /// Wraps uniform samples of a momentum amplitude.  Rejects grids whose
    /// endpoint amplitudes have not decayed or whose trapezoid norm strays
    /// from unity.
    pub fn new(k_min: f64, k_max: f64, samples: Vec<C64>) -> Result<Self> {
        if !(k_max > k_min) || !k_min.is_finite() || !k_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "momentum bounds must be finite with k_min < k_max, got [{k_min}, {k_max}]"
            )));
        }
        if samples.len() < 17 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 17 samples, got {}",
                samples.len()
            )));
        }
        let spacing = (k_max - k_min) / (samples.len() - 1) as f64;
        for (k, s) in [(k_min, samples[0]), (k_max, samples[samples.len() - 1])] {
            if s.norm() >= ENDPOINT_DECAY_LIMIT {
                return Err(Error::GridTooNarrow {
                    k,
                    amplitude: s.norm(),
                    limit: ENDPOINT_DECAY_LIMIT,
                });
            }
        }
        let packet = GridPacket {
            k_min,
            k_max,
            spacing,
            samples,
        };
        let norm = packet.norm();
        if (norm - 1.0).abs() > GRID_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "grid packet norm {norm} deviates from unity beyond {GRID_NORM_TOL:.1e}"
            )));
        }
        Ok(packet)
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn k_at(&self, i: usize) -> f64 {
        self.k_min + i as f64 * self.spacing
    }

    /// Largest momentum magnitude covered by the grid.
    pub fn k_abs_max(&self) -> f64 {
        self.k_min.abs().max(self.k_max.abs())
    }

    /// Trapezoid L2 norm of the sampled amplitude.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        quad::trapezoid(&sq, self.spacing)
    }

    /// Index of the sample at k = 0, if the grid contains one.
    pub(crate) fn zero_index(&self) -> Option<usize> {
        if self.k_min > 0.0 || self.k_max < 0.0 {
            return None;
        }
        let i = (-self.k_min / self.spacing).round() as usize;
        let i = i.min(self.samples.len() - 1);
        if self.k_at(i).abs() <= 1e-9 * self.k_abs_max() {
            Some(i)
        } else {
            None
        }
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem { a0_ref: 1.0 }
    }
}

/// An initial state: either an analytic family member or a sampled grid.
#[derive(Debug, Clone)]
pub enum WavePacket {
    Family(FamilyPacket),
    Grid(GridPacket),
}

impl WavePacket {
    /// Canonical one-line description, used in output headers.
    pub fn descriptor(&self) -> String {
        match self {
            WavePacket::Family(p) => format!(
                "family:m={},a0={},k0={},x0={}",
                p.order(),
                p.width(),
                p.momentum_center(),
                p.position_center()
            ),
            WavePacket::Grid(g) => format!("grid:n={},k=[{},{}]", g.len(), g.k_min(), g.k_max()),
        }
    }

    /// Unit system tied to the packet: the family width for analytic
    /// members, a unit reference width for raw grids.
    pub fn default_units(&self) -> UnitSystem {
        match self {
            WavePacket::Family(p) => p.units(),
            WavePacket::Grid(g) => g.units(),
        }
    }

    /// Momentum reach used by sampling rules: the default window half-width
    /// for family members, the grid extent for sampled packets.
    pub fn momentum_reach(&self) -> f64 {
        match self {
            WavePacket::Family(p) => p.default_k_half_width(),
            WavePacket::Grid(g) => g.k_abs_max(),
        }
    }
}

impl From<FamilyPacket> for WavePacket {
    fn from(p: FamilyPacket) -> Self {
        WavePacket::Family(p)
    }
}

impl From<GridPacket> for WavePacket {
    fn from(g: GridPacket) -> Self {
        WavePacket::Grid(g)
    }
}

/// A finite position interval [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval must be finite with a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    /// The symmetric interval [-half, half].
    pub fn symmetric(half: f64) -> Result<Self> {
        Interval::new(-half, half)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Smallest derivative order whose coefficient at k = 0 stands above
/// `tol` times the largest coefficient in the probe table.
///
/// Probes orders up to the finite-difference cap; a packet vanishing faster
/// than that at k = 0 is reported as undetectable rather than misclassified.
pub fn detect_small_k_order(packet: &GridPacket, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detection tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let cap = deriv::MAX_TABLE_ORDER;
    let table = deriv::finite_difference_table(packet, cap)?;
    let scale = table.max_magnitude();
    if !(scale > 0.0) {
        return Err(Error::OrderUndetectable { cap });
    }
    for j in 0..=cap {
        if table.value(j).norm() > tol * scale {
            return Ok(j);
        }
    }
    Err(Error::OrderUndetectable { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Simpson oracle, independent of the crate quadrature helpers.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let n = if n.is_multiple_of(2) { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn norm_const_matches_closed_form_m0() {
        let p = FamilyPacket::new(0, 1.0, 0.0, 0.0).expect("valid");
        let want = PI.powf(-0.25);
        assert!(
            (p.norm_const() - want).abs() < 1e-12,
            "N = {}, want {want}",
            p.norm_const()
        );
    }

    #[test]
    fn norm_const_matches_closed_form_m1() {
        let p = FamilyPacket::new(1, 1.0, 0.0, 0.0).expect("valid");
        let want = (2.0 / PI.sqrt()).sqrt();
        assert!(
            (p.norm_const() - want).abs() < 1e-12,
            "N = {}, want {want}",
            p.norm_const()
        );
    }

    #[test]
    fn norm_const_matches_simpson_for_shifted_packet() {
        let p = FamilyPacket::new(3, 0.7, 1.3, -0.4).expect("valid");
        let i2 = simpson(
            |k| k.powi(6) * (-0.49 * (k - 1.3) * (k - 1.3)).exp(),
            1.3 - 20.0,
            1.3 + 20.0,
            200_000,
        );
        let want = 1.0 / i2.sqrt();
        assert!(
            ((p.norm_const() - want) / want).abs() < 1e-10,
            "N = {}, want {want}",
            p.norm_const()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FamilyPacket::new(0, -1.0, 0.0, 0.0).is_err());
        assert!(FamilyPacket::new(0, 0.0, 0.0, 0.0).is_err());
        assert!(FamilyPacket::new(9, 1.0, 0.0, 0.0).is_err());
        assert!(FamilyPacket::new(0, 1.0, f64::NAN, 0.0).is_err());
        assert!(UnitSystem::new(0.0).is_err());
        assert!(Interval::new(2.0, -2.0).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn sampled_grid_has_unit_norm() {
        let p = FamilyPacket::new(0, 1.0, 0.0, 0.0).expect("valid");
        let g = p.sample_to_grid(8.0, 4096).expect("samples");
        assert!((g.norm() - 1.0).abs() < 1e-8, "norm = {}", g.norm());
    }

    #[test]
    fn narrow_window_is_rejected() {
        let p = FamilyPacket::new(0, 1.0, 0.0, 0.0).expect("valid");
        match p.sample_to_grid(1.0, 64) {
            Err(Error::GridTooNarrow { amplitude, .. }) => {
                assert!(amplitude > ENDPOINT_DECAY_LIMIT)
            }
            other => panic!("expected GridTooNarrow, got {other:?}"),
        }
    }

    #[test]
    fn wide_window_endpoints_decay() {
        let p = FamilyPacket::new(2, 1.0, 0.0, 0.0).expect("valid");
        let g = p.sample_to_grid(10.0, 8192).expect("samples");
        assert!(g.samples()[0].norm() < 1e-12);
        assert!(g.samples()[g.len() - 1].norm() < 1e-12);
    }

    #[test]
    fn doubling_samples_leaves_norm_unchanged() {
        let p = FamilyPacket::new(1, 1.0, 0.5, 0.0).expect("valid");
        let coarse = p.sample_to_grid(8.5, 4096).expect("samples");
        let fine = p.sample_to_grid(8.5, 8192).expect("samples");
        assert!(
            (coarse.norm() - fine.norm()).abs() < 1e-10,
            "norms {} vs {}",
            coarse.norm(),
            fine.norm()
        );
    }

    #[test]
    fn detected_order_matches_family_order() {
        for (m, a0, k0) in [(0usize, 1.0, 0.0), (1, 1.0, 1.0), (2, 1.0, 0.0)] {
            let p = FamilyPacket::new(m, a0, k0, 0.0).expect("valid");
            let g = p
                .sample_to_grid(p.default_k_half_width(), 4096)
                .expect("samples");
            let got = detect_small_k_order(&g, 1e-6).expect("detects");
            assert_eq!(got, m, "m = {m}, k0 = {k0}");
        }
    }

    #[test]
    fn zero_index_lands_on_zero() {
        let p = FamilyPacket::new(0, 1.0, 0.3, 0.0).expect("valid");
        let g = p.sample_to_grid(8.3, 4096).expect("samples");
        let i = g.zero_index().expect("contains zero");
        assert!(g.k_at(i).abs() < 1e-12);
    }

    #[test]
    fn descriptor_is_canonical() {
        let p = FamilyPacket::new(2, 1.0, 0.0, 0.0).expect("valid");
        assert_eq!(
            WavePacket::from(p).descriptor(),
            "family:m=2,a0=1,k0=0,x0=0"
        );
    }

    #[test]
    fn reduced_time_roundtrip() {
        let u = UnitSystem::new(2.0).expect("valid");
        let t = 7.25;
        assert!((u.physical_time(u.reduced_time(t)) - t).abs() < 1e-15);
        assert!((u.reduced_time(8.0) - 2.0).abs() < 1e-15);
    }
}
