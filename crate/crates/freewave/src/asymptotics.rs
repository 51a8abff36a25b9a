//! Closed-form long-time predictions: the leading power laws for the
//! survival and nonescape probabilities, the leading field profile, and
//! truncated asymptotic series in inverse powers of time.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::deriv::{self, DerivativeTable};
use crate::error::{Error, Result};
use crate::gops;
use crate::packet::{Interval, UnitSystem, WavePacket};
use crate::quad;

/// Hard cap on series truncations; the expansion is asymptotic, so long
/// partial sums only degrade it.
pub const MAX_SERIES_TERMS: usize = 4;

/// Everything the long-time predictions need, extracted once per packet:
/// the leading order m, the reduced order, the derivative table, and the
/// power-law coefficients referenced to reduced time.
#[derive(Debug, Clone)]
pub struct AsymptoticProfile {
    pub m: usize,
    pub m_bar: usize,
    /// coefficient of T^-(2m+1) in S
    pub s_coefficient: f64,
    /// coefficient of T^-(2 m_bar + 1) in P over the stored interval
    pub p_coefficient: f64,
    /// real root of the leading profile, when one exists
    pub xi0: Option<f64>,
    pub interval: Interval,
    deriv_table: DerivativeTable,
    leading_c0: C64,
    leading_c1: C64,
    units: UnitSystem,
}

impl AsymptoticProfile {
    pub fn deriv_table(&self) -> &DerivativeTable {
        &self.deriv_table
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    /// The leading kernel image c0 + c1 x over the interval.
    pub fn leading_image(&self, x: f64) -> C64 {
        self.leading_c0 + self.leading_c1 * x
    }
}

/// principal branch of 1/(it)^s for t > 0
fn inv_it_pow(t: f64, s: f64) -> C64 {
    C64::from_polar(t.powf(-s), -FRAC_PI_2 * s)
}

fn check_reduced_time(reduced_t: f64) -> Result<f64> {
    if !(reduced_t > 0.0) || !reduced_t.is_finite() {
        return Err(Error::Domain(format!(
            "asymptotic forms need reduced time > 0, got {reduced_t}"
        )));
    }
    Ok(reduced_t)
}

/// exact integral of |c0 + c1 x|^2 over [a, b]
fn affine_square_integral(c0: C64, c1: C64, interval: &Interval) -> f64 {
    let (a, b) = (interval.a(), interval.b());
    c0.norm_sqr() * (b - a)
        + (c0.conj() * c1).re * (b * b - a * a)
        + c1.norm_sqr() * (b * b * b - a * a * a) / 3.0
}

/// deep derivative table regardless of the public probe cap: exact for
/// the family, finite differences (depth-limited) for grids
fn table_for(packet: &WavePacket, depth: usize) -> Result<(usize, DerivativeTable)> {
    match packet {
        WavePacket::Family(p) => Ok((
            p.order(),
            deriv::analytic_table(p, depth.max(p.order() + 1)),
        )),
        WavePacket::Grid(g) => {
            let table = deriv::finite_difference_table(g, deriv::MAX_TABLE_ORDER)?;
            let m = table.first_nonzero().ok_or(Error::OrderUndetectable {
                cap: deriv::MAX_TABLE_ORDER,
            })?;
            if depth > deriv::MAX_TABLE_ORDER {
                return Err(Error::InvalidParameter(format!(
                    "grid derivative tables stop at order {}, but the request needs {depth}",
                    deriv::MAX_TABLE_ORDER
                )));
            }
            Ok((m, table))
        }
    }
}

/// Builds the asymptotic profile of a packet over an interval.
pub fn asymptotic_profile(packet: &WavePacket, interval: &Interval) -> Result<AsymptoticProfile> {
    let (m, table) = table_for(packet, 1)?;
    let m_bar = deriv::m_bar(m);
    let (c0, c1) = gops::leading_g_value(&table, m)?;
    let xi0 = if m % 2 == 1 {
        deriv::special_position(&table, m)?
    } else {
        None
    };
    let units = packet.default_units();
    let a0 = units.a0_ref();
    let v_m = table.value(m).norm();
    let gamma_m = quad::gamma_half_integer(m);
    let s_coefficient = gamma_m * gamma_m * v_m.powi(4)
        / (quad::factorial(m).powi(4) * a0.powi(2 * (2 * m as i32 + 1)));
    let gamma_mb = quad::gamma_half_integer(m_bar);
    let p_coefficient = gamma_mb * gamma_mb * affine_square_integral(c0, c1, interval)
        / (PI * PI * a0.powi(2 * (2 * m_bar as i32 + 1)));
    Ok(AsymptoticProfile {
        m,
        m_bar,
        s_coefficient,
        p_coefficient,
        xi0,
        interval: *interval,
        deriv_table: table,
        leading_c0: c0,
        leading_c1: c1,
        units,
    })
}

/// Leading power law for the survival probability at reduced time T.
pub fn leading_survival(profile: &AsymptoticProfile, reduced_t: f64) -> Result<f64> {
    let t = check_reduced_time(reduced_t)?;
    Ok(profile.s_coefficient * t.powi(-(2 * profile.m as i32 + 1)))
}

/// Leading power law for the nonescape probability at reduced time T.
pub fn leading_nonescape(profile: &AsymptoticProfile, reduced_t: f64) -> Result<f64> {
    let t = check_reduced_time(reduced_t)?;
    Ok(profile.p_coefficient * t.powi(-(2 * profile.m_bar as i32 + 1)))
}

/// Leading complex field at position x and reduced time T: the kernel
/// image scaled by the stationary-phase prefactor.
pub fn leading_field(profile: &AsymptoticProfile, x: f64, reduced_t: f64) -> Result<C64> {
    check_reduced_time(reduced_t)?;
    let t = profile.units.physical_time(reduced_t);
    let sign = if profile.m_bar.is_multiple_of(2) {
        -1.0
    } else {
        1.0
    };
    let prefactor = sign * quad::gamma_half_integer(profile.m_bar) / PI
        * inv_it_pow(t, profile.m_bar as f64 + 0.5);
    Ok(prefactor * profile.leading_image(x))
}

fn check_terms(j_terms: usize) -> Result<()> {
    if j_terms == 0 || j_terms > MAX_SERIES_TERMS {
        return Err(Error::InvalidParameter(format!(
            "series truncation must keep 1..={MAX_SERIES_TERMS} terms, got {j_terms}"
        )));
    }
    Ok(())
}

/// Truncated overlap series: j_terms counted from the first
/// non-vanishing order, so one term reproduces the leading power law.
pub fn series_survival(packet: &WavePacket, reduced_t: f64, j_terms: usize) -> Result<f64> {
    check_terms(j_terms)?;
    check_reduced_time(reduced_t)?;
    let probe = match packet {
        WavePacket::Family(p) => p.order(),
        WavePacket::Grid(_) => 0,
    };
    let (m, table) = table_for(packet, 2 * (probe + j_terms - 1))?;
    let j_hi = m + j_terms - 1;
    if table.j_max() < 2 * j_hi {
        return Err(Error::InvalidParameter(format!(
            "derivative table depth {} cannot serve {j_terms} series terms at order {m}",
            table.j_max()
        )));
    }
    let products = gops::g_inner_products(&table, j_hi)?;
    let t = packet.default_units().physical_time(reduced_t);
    let mut overlap = C64::new(0.0, 0.0);
    for j in 0..=j_hi {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        overlap += sign * quad::gamma_half_integer(j) / PI
            * inv_it_pow(t, j as f64 + 0.5)
            * products.value(j);
    }
    Ok(overlap.norm_sqr())
}

/// Truncated field series at one position, with the same term counting
/// as [`series_survival`].
pub fn series_field(packet: &WavePacket, x: f64, reduced_t: f64, j_terms: usize) -> Result<C64> {
    check_terms(j_terms)?;
    check_reduced_time(reduced_t)?;
    let probe = match packet {
        WavePacket::Family(p) => p.order(),
        WavePacket::Grid(_) => 0,
    };
    let (m, table) = table_for(packet, 2 * (probe + j_terms - 1))?;
    let j_hi = m + j_terms - 1;
    if table.j_max() < 2 * j_hi {
        return Err(Error::InvalidParameter(format!(
            "derivative table depth {} cannot serve {j_terms} series terms at order {m}",
            table.j_max()
        )));
    }
    let t = packet.default_units().physical_time(reduced_t);
    let mut field = C64::new(0.0, 0.0);
    for j in 0..=j_hi {
        let image = gops::g_field_from_derivatives(&table, j, &[x])?[0];
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        field += sign * quad::gamma_half_integer(j) / PI * inv_it_pow(t, j as f64 + 0.5) * image;
    }
    Ok(field)
}
