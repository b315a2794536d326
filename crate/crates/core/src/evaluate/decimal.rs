//! Exact decimal numbers for value comparison.

use std::cmp::Ordering;
use std::fmt;

/// `mantissa × 10^(−scale)`, kept in lowest terms (no trailing fractional
/// zeros) so structural equality is numeric equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

/// Scales beyond this are rejected as implausible.
const MAX_SCALE: u32 = 18;

impl Decimal {
    pub fn new(mantissa: i128, scale: u32) -> Option<Decimal> {
        if scale > MAX_SCALE {
            return None;
        }
        let mut d = Decimal { mantissa, scale };
        while d.scale > 0 && d.mantissa % 10 == 0 {
            d.mantissa /= 10;
            d.scale -= 1;
        }
        Some(d)
    }

    pub fn integer(v: i128) -> Decimal {
        Decimal { mantissa: v, scale: 0 }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Parses a plain `-?digits(.digits)?` string.
    pub fn parse_plain(s: &str) -> Option<Decimal> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int}{frac}");
        let digits = if digits.is_empty() { "0" } else { &digits };
        let m: i128 = digits.parse().ok()?;
        Decimal::new(if neg { -m } else { m }, u32::try_from(frac.len()).ok()?)
    }

    /// Multiplies by `10^exp`.
    pub fn shift(self, exp: u32) -> Option<Decimal> {
        if exp <= self.scale {
            return Decimal::new(self.mantissa, self.scale - exp);
        }
        let factor = 10i128.checked_pow(exp - self.scale)?;
        Decimal::new(self.mantissa.checked_mul(factor)?, 0)
    }

    pub fn negate(self) -> Decimal {
        Decimal {
            mantissa: -self.mantissa,
            scale: self.scale,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.scale as i32)
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.scale.max(other.scale);
        let a = self.mantissa.saturating_mul(10i128.pow(s - self.scale));
        let b = other.mantissa.saturating_mul(10i128.pow(s - other.scale));
        a.cmp(&b)
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical text form. A fraction of exactly three digits gets a trailing
/// zero so the string never reads as a thousands group when parsed again.
impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.mantissa < 0;
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let (int, frac) = if scale == 0 {
            (digits, String::new())
        } else if digits.len() > scale {
            let (i, fr) = digits.split_at(digits.len() - scale);
            (i.to_string(), fr.to_string())
        } else {
            (
                "0".to_string(),
                format!("{}{}", "0".repeat(scale - digits.len()), digits),
            )
        };
        if neg {
            f.write_str("-")?;
        }
        f.write_str(&int)?;
        if !frac.is_empty() {
            write!(f, ".{frac}")?;
            if frac.len() == 3 {
                f.write_str("0")?;
            }
        }
        Ok(())
    }
}
