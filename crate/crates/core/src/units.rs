//! SI physical constants and unit-string parsing shared by every file loader.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability, H/m (CODATA 2018).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Physical dimension a unit string must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Resistance,
    /// Per-length conductance, Ω⁻¹·m⁻¹.
    LineConductance,
    Power,
    Temperature,
    Time,
    Frequency,
}

/// Returns the factor converting a value expressed in `unit` to SI for the
/// requested dimension.
pub fn si_factor(unit: &str, dim: Dimension) -> Result<f64> {
    let u = unit.trim();
    let factor = match dim {
        Dimension::Dimensionless => match u {
            "" | "1" | "-" => Some(1.0),
            "%" => Some(1e-2),
            "ppm" => Some(1e-6),
            _ => None,
        },
        Dimension::Length => match u {
            "m" => Some(1.0),
            "cm" => Some(1e-2),
            "mm" => Some(1e-3),
            "um" | "µm" | "μm" => Some(1e-6),
            "nm" => Some(1e-9),
            "in" => Some(25.4e-3),
            _ => None,
        },
        Dimension::Resistance => match u {
            "ohm" | "Ω" => Some(1.0),
            "mohm" | "mΩ" => Some(1e-3),
            "uohm" | "µohm" | "µΩ" | "μΩ" | "uΩ" => Some(1e-6),
            "nohm" | "nΩ" => Some(1e-9),
            _ => None,
        },
        Dimension::LineConductance => match u {
            "S/m" | "1/(ohm*m)" | "ohm^-1*m^-1" | "Ω⁻¹m⁻¹" | "Ω^-1m^-1" => Some(1.0),
            _ => None,
        },
        Dimension::Power => match u {
            "W" => Some(1.0),
            "mW" => Some(1e-3),
            "uW" | "µW" | "μW" => Some(1e-6),
            "nW" => Some(1e-9),
            _ => None,
        },
        Dimension::Temperature => match u {
            "K" => Some(1.0),
            "mK" => Some(1e-3),
            _ => None,
        },
        Dimension::Time => match u {
            "s" => Some(1.0),
            "ms" => Some(1e-3),
            "us" | "µs" | "μs" => Some(1e-6),
            "ns" => Some(1e-9),
            _ => None,
        },
        Dimension::Frequency => match u {
            "Hz" => Some(1.0),
            "kHz" => Some(1e3),
            "MHz" => Some(1e6),
            "GHz" => Some(1e9),
            _ => None,
        },
    };
    factor.ok_or_else(|| Error::invalid("unit", format!("`{u}` is not a {dim:?} unit")))
}

/// Parses `"<number> [unit]"` into an SI value.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let text = text.trim();
    let mut parts = text.splitn(2, char::is_whitespace);
    let number = parts.next().unwrap_or("");
    let unit = parts.next().unwrap_or("").trim();
    let value: f64 = number
        .parse()
        .map_err(|_| Error::invalid("number", format!("`{number}` in `{text}`")))?;
    if !value.is_finite() {
        return Err(Error::invalid("number", format!("non-finite value in `{text}`")));
    }
    Ok(value * si_factor(unit, dim)?)
}

/// Like [`parse_quantity`] but also accepts an attached unit (`2mm`,
/// `4.5GHz`). A bare number is taken as SI.
pub fn parse_compact(text: &str, dim: Dimension) -> Result<f64> {
    let s = text.trim();
    let bytes = s.as_bytes();
    let split = (0..bytes.len())
        .find(|&i| {
            let c = bytes[i] as char;
            let exponent = (c == 'e' || c == 'E')
                && i > 0
                && bytes[i - 1].is_ascii_digit()
                && bytes.get(i + 1).is_some_and(|&b| b.is_ascii_digit() || b == b'-' || b == b'+');
            !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || exponent)
        })
        .unwrap_or(s.len());
    let (number, unit) = s.split_at(split);
    let unit = unit.trim();
    if unit.is_empty() {
        let value: f64 = number.parse().map_err(|_| Error::invalid("number", format!("`{s}`")))?;
        if !value.is_finite() {
            return Err(Error::invalid("number", format!("non-finite value in `{s}`")));
        }
        return Ok(value);
    }
    parse_quantity(&format!("{number} {unit}"), dim)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
