//! Exact rational truth values and the basis operations on `[0,1]`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^{-n}`.
pub fn pow2_inv(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n as usize)
}

/// `1 - a`.
pub fn negate(a: &Rational) -> Rational {
    one() - a
}

/// Truncated subtraction `max(a - b, 0)`.
pub fn monus(a: &Rational, b: &Rational) -> Rational {
    if a > b {
        a - b
    } else {
        zero()
    }
}

/// Truncated addition `min(a + b, 1)`.
pub fn trunc_add(a: &Rational, b: &Rational) -> Rational {
    let s = a + b;
    if s > one() {
        one()
    } else {
        s
    }
}

pub fn halve(a: &Rational) -> Rational {
    a / int(2)
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

pub fn clamp(x: &Rational, lo: &Rational, hi: &Rational) -> Rational {
    if x < lo {
        lo.clone()
    } else if x > hi {
        hi.clone()
    } else {
        x.clone()
    }
}

pub fn in_unit_interval(q: &Rational) -> bool {
    !q.is_negative() && *q <= one()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches('-');
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| format!("bad decimal {s:?}"))?
        };
        let f: BigInt = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let scale = num::pow(BigInt::from(10), frac.len());
        let mut q = Rational::new(w * &scale + f, scale);
        if negative {
            q = -q;
        }
        return Ok(q);
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rational::from_integer(n))
}

/// Lowest-terms `p/q` rendering, or `p` for integers.
pub fn format_ratio(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Rendering used by the text DSL: a finite decimal when the denominator
/// has only factors 2 and 5, `p/q` otherwise.
pub fn format_dsl(q: &Rational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut d = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format_ratio(q);
    }
    let digits = twos.max(fives);
    let scaled = q * Rational::from_integer(num::pow(BigInt::from(10), digits));
    let n = scaled.to_integer();
    let negative = n.is_negative();
    let s = n.abs().to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits - s.len() + 1), s)
    } else {
        s
    };
    let (w, f) = s.split_at(s.len() - digits);
    format!("{}{}.{}", if negative { "-" } else { "" }, w, f)
}

/// `k`-digit decimal rendering (rounded half away from zero).
pub fn format_decimal(q: &Rational, k: usize) -> String {
    let scale = num::pow(BigInt::from(10), k);
    let scaled = (q * Rational::from_integer(scale)).round().to_integer();
    let negative = scaled.is_negative();
    let s = scaled.abs().to_string();
    if k == 0 {
        return format!("{}{}", if negative { "-" } else { "" }, s);
    }
    let s = if s.len() <= k {
        format!("{}{}", "0".repeat(k - s.len() + 1), s)
    } else {
        s
    };
    let (w, f) = s.split_at(s.len() - k);
    format!("{}{}.{}", if negative { "-" } else { "" }, w, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1").unwrap(), one());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_ratio(&ratio(2, 4)), "1/2");
        assert_eq!(format_ratio(&zero()), "0");
        assert_eq!(format_dsl(&ratio(1, 2)), "0.5");
        assert_eq!(format_dsl(&ratio(3, 40)), "0.075");
        assert_eq!(format_dsl(&ratio(1, 3)), "1/3");
        assert_eq!(format_decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(format_decimal(&ratio(2, 3), 2), "0.67");
    }

    #[test]
    fn basis_ops() {
        assert_eq!(monus(&ratio(1, 4), &ratio(1, 8)), ratio(1, 8));
        assert_eq!(monus(&ratio(1, 8), &ratio(1, 4)), zero());
        assert_eq!(trunc_add(&ratio(3, 4), &ratio(1, 2)), one());
        assert_eq!(negate(&ratio(1, 4)), ratio(3, 4));
        assert_eq!(halve(&ratio(1, 2)), ratio(1, 4));
    }
}
