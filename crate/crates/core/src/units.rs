//! Human-unit quantities accepted by the config loader.
//!
//! Every numeric config field may be written either as a bare JSON number
//! (already SI: bits, Hz, W, W/Hz, s) or as a string carrying a unit, e.g.
//! `"400 MB"`, `"4 GHz"`, `"250 mW/180 kHz"`, `"0.143 s"`. Byte units are
//! decimal and expand to 8 bits per byte.

use serde::de::{self, Deserializer, Visitor};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Bits,
    Hertz,
    Watts,
    WattsPerHertz,
    Seconds,
    Decibels,
    Plain,
}

impl Dimension {
    fn unit_scale(self, unit: &str) -> Option<f64> {
        let scale = match self {
            Dimension::Bits => match unit {
                "bit" | "bits" | "b" => 1.0,
                "kbit" | "Kbit" | "kb" | "Kb" => 1e3,
                "Mbit" | "Mb" => 1e6,
                "Gbit" | "Gb" => 1e9,
                "B" | "byte" | "bytes" => 8.0,
                "kB" | "KB" => 8e3,
                "MB" => 8e6,
                "GB" => 8e9,
                _ => return None,
            },
            Dimension::Hertz => match unit {
                "Hz" | "cycles/s" => 1.0,
                "kHz" | "KHz" => 1e3,
                "MHz" => 1e6,
                "GHz" => 1e9,
                _ => return None,
            },
            Dimension::Watts => match unit {
                "W" => 1.0,
                "mW" => 1e-3,
                "uW" | "µW" => 1e-6,
                "kW" => 1e3,
                _ => return None,
            },
            Dimension::Seconds => match unit {
                "s" => 1.0,
                "ms" => 1e-3,
                "us" | "µs" => 1e-6,
                _ => return None,
            },
            Dimension::Decibels => match unit {
                "dB" => 1.0,
                _ => return None,
            },
            Dimension::WattsPerHertz | Dimension::Plain => return None,
        };
        Some(scale)
    }
}

/// Splits `"4.5 GHz"` into `(4.5, "GHz")`. A missing number means 1.
fn split_number(text: &str) -> Result<(f64, &str), String> {
    let text = text.trim();
    let mut best = None;
    for (idx, _) in text.char_indices().skip(1).chain([(text.len(), ' ')]) {
        if let Ok(v) = text[..idx].trim().parse::<f64>() {
            best = Some((v, text[idx..].trim()));
        }
    }
    match best {
        Some(found) => Ok(found),
        None if text.chars().next().is_some_and(char::is_alphabetic) => Ok((1.0, text)),
        None => Err(format!("cannot parse a number from {text:?}")),
    }
}

/// Parses a quantity string into SI units for the given dimension.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    if dim == Dimension::WattsPerHertz {
        return match text.split_once('/') {
            Some((num, den)) => {
                let power = parse_quantity(num, Dimension::Watts)?;
                let band = parse_quantity(den, Dimension::Hertz)?;
                Ok(power / band)
            }
            None => {
                let (value, unit) = split_number(text)?;
                if unit.is_empty() {
                    Ok(value)
                } else {
                    Err(format!("unknown power spectral density unit {unit:?}"))
                }
            }
        };
    }
    let (value, unit) = split_number(text)?;
    if unit.is_empty() {
        return Ok(value);
    }
    dim.unit_scale(unit)
        .map(|scale| value * scale)
        .ok_or_else(|| format!("unknown unit {unit:?} for {dim:?}"))
}

struct QuantityVisitor(Dimension);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or a string quantity in {:?}", self.0)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }
}

struct OptionalQuantityVisitor(Dimension);

impl<'de> Visitor<'de> for OptionalQuantityVisitor {
    type Value = Option<f64>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "null or a quantity in {:?}", self.0)
    }

    fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
        Ok(None)
    }

    fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
        Ok(None)
    }

    fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_any(QuantityVisitor(self.0)).map(Some)
    }
}

macro_rules! quantity_fn {
    ($name:ident, $dim:expr) => {
        pub fn $name<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            d.deserialize_any(QuantityVisitor($dim))
        }
    };
}

quantity_fn!(bits, Dimension::Bits);
quantity_fn!(hertz, Dimension::Hertz);
quantity_fn!(watts, Dimension::Watts);
quantity_fn!(psd, Dimension::WattsPerHertz);
quantity_fn!(seconds, Dimension::Seconds);
quantity_fn!(plain, Dimension::Plain);

pub fn optional_decibels<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    d.deserialize_option(OptionalQuantityVisitor(Dimension::Decibels))
}

/// Renders a bandwidth in the largest unit that keeps the mantissa ≥ 1.
pub fn human_hertz(hz: f64) -> String {
    let (scale, unit) = if hz.abs() >= 1e9 {
        (1e9, "GHz")
    } else if hz.abs() >= 1e6 {
        (1e6, "MHz")
    } else if hz.abs() >= 1e3 {
        (1e3, "kHz")
    } else {
        (1.0, "Hz")
    };
    format!("{:.4} {unit}", hz / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_human_units() {
        assert_eq!(parse_quantity("400 MB", Dimension::Bits).unwrap(), 3.2e9);
        assert_eq!(parse_quantity("4GHz", Dimension::Hertz).unwrap(), 4e9);
        assert_eq!(parse_quantity("0.143 s", Dimension::Seconds).unwrap(), 0.143);
        assert_eq!(parse_quantity("10.98 dB", Dimension::Decibels).unwrap(), 10.98);
        let psd = parse_quantity("250 mW/180 kHz", Dimension::WattsPerHertz).unwrap();
        assert!((psd - 0.25 / 180e3).abs() < 1e-20);
        assert_eq!(parse_quantity("2 W/Hz", Dimension::WattsPerHertz).unwrap(), 2.0);
    }

    #[test]
    fn bare_numbers_are_si() {
        assert_eq!(parse_quantity("1e6", Dimension::Bits).unwrap(), 1e6);
        assert_eq!(parse_quantity(" 12 ", Dimension::Hertz).unwrap(), 12.0);
    }

    #[test]
    fn rejects_unknown_units() {
        assert!(parse_quantity("3 parsecs", Dimension::Bits).is_err());
        assert!(parse_quantity("3 MB", Dimension::Hertz).is_err());
        assert!(parse_quantity("", Dimension::Bits).is_err());
    }

    #[test]
    fn deserializes_number_or_string() {
        #[derive(serde::Deserialize)]
        struct Probe {
            #[serde(deserialize_with = "bits")]
            size: f64,
            #[serde(default, deserialize_with = "optional_decibels")]
            snr: Option<f64>,
        }
        let p: Probe = serde_json::from_str(r#"{"size": "1 kB"}"#).unwrap();
        assert_eq!(p.size, 8000.0);
        assert_eq!(p.snr, None);
        let p: Probe = serde_json::from_str(r#"{"size": 5, "snr": "3 dB"}"#).unwrap();
        assert_eq!(p.size, 5.0);
        assert_eq!(p.snr, Some(3.0));
        let p: Probe = serde_json::from_str(r#"{"size": 5, "snr": null}"#).unwrap();
        assert_eq!(p.snr, None);
    }
}
