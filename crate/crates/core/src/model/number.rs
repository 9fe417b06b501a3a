use std::str::FromStr;

use rust_decimal::{Decimal, RoundingStrategy};

/// Significant digits kept when presenting a non-integral aggregate.
pub const SIGNIFICANT_DIGITS: u32 = 12;

pub fn parse_number(text: &str) -> Option<Decimal> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    Decimal::from_str(text)
        .ok()
        .or_else(|| Decimal::from_scientific(text).ok())
}

/// Integers print exactly; everything else is rounded half-even to
/// [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_number(value: Decimal) -> String {
    if value.fract().is_zero() {
        return value.trunc().normalize().to_string();
    }
    let rounded = value
        .round_sf_with_strategy(SIGNIFICANT_DIGITS, RoundingStrategy::MidpointNearestEven)
        .unwrap_or(value);
    rounded.normalize().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_stay_exact() {
        let v = parse_number("1000").unwrap() + parse_number("1500").unwrap();
        assert_eq!(format_number(v), "2500");
        assert_eq!(format_number(parse_number("12345678901234567").unwrap()), "12345678901234567");
        assert_eq!(format_number(parse_number("-0").unwrap()), "0");
    }

    #[test]
    fn fractions_round_half_even_at_twelve_digits() {
        let third = parse_number("1").unwrap() / parse_number("3").unwrap();
        assert_eq!(format_number(third), "0.333333333333");
        // 13th significant digit is a tie: 0.1234567890125 -> ...012, ...0135 -> ...014
        assert_eq!(format_number(parse_number("0.1234567890125").unwrap()), "0.123456789012");
        assert_eq!(format_number(parse_number("0.1234567890135").unwrap()), "0.123456789014");
        assert_eq!(format_number(parse_number("12.50").unwrap()), "12.5");
    }

    #[test]
    fn rejects_non_numbers() {
        assert!(parse_number("abc").is_none());
        assert!(parse_number("").is_none());
        assert!(parse_number("1e3").is_some());
    }
}
