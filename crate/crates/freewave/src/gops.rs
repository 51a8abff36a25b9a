//! Moment-kernel integral operators: brute-force quadrature, the binomial
//! closed forms in terms of derivative coefficients at k = 0, and the
//! leading profiles that control the long-time tails.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::deriv::DerivativeTable;
use crate::error::{Error, Result};
use crate::packet::{FamilyPacket, GridPacket, WavePacket};
use crate::propagator;
use crate::quad;

/// Largest kernel power handled by direct quadrature; higher moments
/// amplify window truncation and are served by the closed forms only.
pub const MAX_QUADRATURE_MOMENT: usize = 6;

/// Relative threshold below which an inner product counts as vanishing.
pub const INNER_PRODUCT_ZERO_FRACTION: f64 = 1e-9;

/// half-width of the family position window, in units of a0
const WINDOW_WIDTHS: f64 = 12.0;

/// i^n on the unit cycle
fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Inner products of a packet with its even-kernel images, one entry per
/// kernel half-order j = 0..=j_max.
#[derive(Debug, Clone)]
pub struct GInnerProducts {
    values: Vec<C64>,
}

impl GInnerProducts {
    pub fn j_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, j: usize) -> C64 {
        self.values[j]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Vanishing is relative: tables mixing exact zeros with O(1) entries
    /// carry quadrature noise in the zero slots.
    pub fn is_zero(&self, j: usize) -> bool {
        self.values[j].norm() <= INNER_PRODUCT_ZERO_FRACTION * self.max_magnitude()
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        (0..self.values.len()).find(|&j| !self.is_zero(j))
    }
}

/// The leading kernel image sampled on a position grid: constant in x for
/// even packet order, affine in x for odd order.
#[derive(Debug, Clone)]
pub struct GFieldProfile {
    pub x_grid: Vec<f64>,
    pub values: Vec<C64>,
    pub m: usize,
    pub m_bar: usize,
}

/// Applies the kernel operator of power j by direct quadrature:
/// the image is -(1/(2 j!)) * integral of |x - y|^j psi(y) dy.
pub fn g_apply(packet: &WavePacket, j: usize, x_grid: &[f64]) -> Result<Vec<C64>> {
    if j > MAX_QUADRATURE_MOMENT {
        return Err(Error::InvalidParameter(format!(
            "kernel power {j} exceeds the quadrature cap {MAX_QUADRATURE_MOMENT}; use the closed forms"
        )));
    }
    match packet {
        WavePacket::Family(p) => x_grid
            .iter()
            .map(|&x| g_apply_family_point(p, j, x))
            .collect(),
        WavePacket::Grid(g) => g_apply_grid(g, j, x_grid),
    }
}

/// One kernel image sample from a position-space field on [lo, hi].  Odd
/// kernels have a corner at y = x, so the window splits there and each
/// side stays smooth.
fn kernel_image<F>(psi: &F, lo: f64, hi: f64, j: usize, x: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let jf = j as i32;
    let f = |y: f64| -> C64 { (x - y).abs().powi(jf) * psi(y) };
    let integral = if j % 2 == 1 && x > lo && x < hi {
        quad::refine_trapezoid_complex(f, lo, x, 512, 1e-13, 1e-12)?
            + quad::refine_trapezoid_complex(f, x, hi, 512, 1e-13, 1e-12)?
    } else {
        quad::refine_trapezoid_complex(f, lo, hi, 512, 1e-13, 1e-12)?
    };
    Ok(-integral / (2.0 * quad::factorial(j)))
}

fn g_apply_family_point(p: &FamilyPacket, j: usize, x: f64) -> Result<C64> {
    let lo = p.position_center() - WINDOW_WIDTHS * p.width();
    let hi = p.position_center() + WINDOW_WIDTHS * p.width();
    kernel_image(&|y| propagator::family_field_value(p, 0.0, y), lo, hi, j, x)
}

/// Grid packets go through their position-space samples; the fixed table
/// spacing bounds the accuracy, which is ample for vanishing checks but
/// coarser than the adaptive family route.
fn g_apply_grid(g: &GridPacket, j: usize, x_grid: &[f64]) -> Result<Vec<C64>> {
    let (ys, psis) = propagator::position_samples(g)?;
    let dy = ys[1] - ys[0];
    let jf = j as i32;
    let scale = -1.0 / (2.0 * quad::factorial(j));
    let last = ys.len() - 1;
    Ok(x_grid
        .iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, (&y, psi)) in ys.iter().zip(&psis).enumerate() {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                acc += w * (x - y).abs().powi(jf) * psi;
            }
            scale * acc * dy
        })
        .collect())
}

/// Inner products with the even kernels from derivative coefficients:
/// the binomial sum pairs conj coefficients at complementary orders.
pub fn g_inner_products(table: &DerivativeTable, j_max: usize) -> Result<GInnerProducts> {
    if table.j_max() < 2 * j_max {
        return Err(Error::InvalidParameter(format!(
            "derivative table depth {} cannot serve kernel half-orders up to {j_max} (need {})",
            table.j_max(),
            2 * j_max
        )));
    }
    let values = (0..=j_max)
        .map(|j| {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            let prefactor = sign * PI / quad::factorial(2 * j);
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..=2 * j {
                acc += quad::binomial(2 * j, n) * table.value(2 * j - n).conj() * table.value(n);
            }
            prefactor * acc
        })
        .collect();
    Ok(GInnerProducts { values })
}

/// Inner product with the even kernel of half-order j by nested
/// brute-force quadrature of a position-space field on [lo, hi],
/// independent of the derivative table.  Exists to corroborate
/// [`g_inner_products`] on any field with a known decayed window.
pub fn g_inner_product_quadrature_field<F>(psi: F, lo: f64, hi: f64, j: usize) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    if 2 * j > MAX_QUADRATURE_MOMENT {
        return Err(Error::InvalidParameter(format!(
            "kernel half-order {j} exceeds the quadrature cap"
        )));
    }
    let mut captured: Option<Error> = None;
    let outer = quad::refine_trapezoid_complex(
        |x: f64| match kernel_image(&psi, lo, hi, 2 * j, x) {
            Ok(image) => psi(x).conj() * image,
            Err(e) => {
                captured = Some(e);
                C64::new(0.0, 0.0)
            }
        },
        lo,
        hi,
        256,
        1e-12,
        1e-10,
    )?;
    match captured {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// The nested-quadrature inner product for a family packet on its
/// standard window.
pub fn g_inner_product_quadrature(packet: &FamilyPacket, j: usize) -> Result<C64> {
    let lo = packet.position_center() - WINDOW_WIDTHS * packet.width();
    let hi = packet.position_center() + WINDOW_WIDTHS * packet.width();
    g_inner_product_quadrature_field(
        |y| propagator::family_field_value(packet, 0.0, y),
        lo,
        hi,
        j,
    )
}

/// Even-kernel image from derivative coefficients, valid for any packet
/// with a deep enough table: a polynomial of degree 2j in x.
pub fn g_field_from_derivatives(
    table: &DerivativeTable,
    j: usize,
    x_grid: &[f64],
) -> Result<Vec<C64>> {
    if table.j_max() < 2 * j {
        return Err(Error::InvalidParameter(format!(
            "derivative table depth {} cannot expand kernel power {}",
            table.j_max(),
            2 * j
        )));
    }
    let prefactor = -(2.0 * PI).sqrt() / (2.0 * quad::factorial(2 * j));
    Ok(x_grid
        .iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..=2 * j {
                acc += quad::binomial(2 * j, n)
                    * i_pow(n)
                    * table.value(n)
                    * (-x).powi((2 * j - n) as i32);
            }
            prefactor * acc
        })
        .collect())
}

/// Coefficients (c0, c1) of the leading kernel image c0 + c1 x.
///
/// Requires every derivative coefficient below order m to vanish; the
/// first violation is reported.  Even m gives a constant (c1 = 0), odd m
/// an affine profile whose root is the packet's special position.
pub fn leading_g_value(table: &DerivativeTable, m: usize) -> Result<(C64, C64)> {
    let depth = if m.is_multiple_of(2) { m } else { m + 1 };
    if table.j_max() < depth {
        return Err(Error::InvalidParameter(format!(
            "derivative table depth {} is short of the leading order (need {depth})",
            table.j_max()
        )));
    }
    for j in 0..m {
        if !table.is_zero(j) {
            return Err(Error::Precondition {
                j,
                magnitude: table.value(j).norm(),
            });
        }
    }
    let root_two_pi = (2.0 * PI).sqrt();
    if m.is_multiple_of(2) {
        let c0 = -root_two_pi * i_pow(m) * table.value(m) / (2.0 * quad::factorial(m));
        Ok((c0, C64::new(0.0, 0.0)))
    } else {
        let prefactor = -root_two_pi / (2.0 * quad::factorial(m + 1));
        let c0 = prefactor * i_pow(m + 1) * table.value(m + 1);
        let c1 = prefactor * i_pow(m + 1) * C64::new(0.0, (m + 1) as f64) * table.value(m);
        Ok((c0, c1))
    }
}

/// The leading kernel image sampled on a grid.
pub fn leading_g_field(table: &DerivativeTable, m: usize, x_grid: &[f64]) -> Result<GFieldProfile> {
    let (c0, c1) = leading_g_value(table, m)?;
    let values = x_grid.iter().map(|&x| c0 + c1 * x).collect();
    Ok(GFieldProfile {
        x_grid: x_grid.to_vec(),
        values,
        m,
        m_bar: crate::deriv::m_bar(m),
    })
}
