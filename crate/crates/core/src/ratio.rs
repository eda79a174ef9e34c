use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Exact non-negative rational, used for resolution values and merge keys.
///
/// All quantities entering a resolution `t = e(C,C')·2m / (k_C·k_C')` are
/// integers, so resolutions are stored in lowest terms and compared by
/// 256-bit cross multiplication instead of floating point. This is what
/// makes merge ordering, and hence the whole dendrogram, bit-reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: u128,
    /// Always nonzero.
    pub den: u128,
}

impl Ratio {
    /// Construct `num/den`, reduced to lowest terms so that equal values
    /// share one representation.
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "ratio denominator must be nonzero");
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn zero() -> Self {
        Ratio { num: 0, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact comparison against an `f64` threshold: `self >= t`.
    ///
    /// Integer thresholds (the common case, e.g. `t = 1`) are compared
    /// exactly; other values fall back to float division, which is correctly
    /// rounded and therefore consistent across runs.
    pub fn ge_f64(self, t: f64) -> bool {
        if t <= 0.0 {
            return true;
        }
        if t.fract() == 0.0 && t < 2u64.pow(63) as f64 {
            let t_int = t as u128;
            return match t_int.checked_mul(self.den) {
                Some(rhs) => self.num >= rhs,
                None => false, // t*den overflowed u128, so num < t*den
            };
        }
        self.to_f64() >= t
    }

    /// Exact strict comparison against an `f64` threshold: `self > t`.
    pub fn gt_f64(self, t: f64) -> bool {
        if t < 0.0 {
            return true;
        }
        if t.fract() == 0.0 && t < 2u64.pow(63) as f64 {
            let t_int = t as u128;
            return match t_int.checked_mul(self.den) {
                Some(rhs) => self.num > rhs,
                None => false,
            };
        }
        self.to_f64() > t
    }

    /// Render as the exact fraction `num/den`.
    pub fn as_fraction(&self) -> String {
        format!("{}/{}", self.num, self.den)
    }

    /// Parse a `num/den` fraction.
    pub fn parse(s: &str, line: usize) -> Result<Self> {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| Error::parse(line, format!("expected num/den fraction, got `{s}`")))?;
        let num: u128 = n
            .parse()
            .map_err(|_| Error::parse(line, format!("bad numerator `{n}`")))?;
        let den: u128 = d
            .parse()
            .map_err(|_| Error::parse(line, format!("bad denominator `{d}`")))?;
        if den == 0 {
            return Err(Error::parse(line, "zero denominator"));
        }
        Ok(Ratio { num, den })
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_wide(
            mul_wide(self.num, other.den),
            mul_wide(other.num, self.den),
        )
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// 256-bit product of two u128s as (high, low) limbs.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = (1u128 << 64) - 1;
    let (a_hi, a_lo) = (a >> 64, a & MASK);
    let (b_hi, b_lo) = (b >> 64, b & MASK);

    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;

    let mid = lh.wrapping_add(hl);
    let mid_carry = if mid < lh { 1u128 << 64 } else { 0 };

    let low = ll.wrapping_add(mid << 64);
    let low_carry = if low < ll { 1 } else { 0 };
    let high = hh + (mid >> 64) + mid_carry + low_carry;
    (high, low)
}

fn cmp_wide(a: (u128, u128), b: (u128, u128)) -> Ordering {
    a.0.cmp(&b.0).then(a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_by_value_not_representation() {
        let a = Ratio::new(12, 4); // 3
        let b = Ratio::new(3, 1); // 3
        let c = Ratio::new(8, 3);
        assert_eq!(a.cmp(&b), Ordering::Equal);
        assert!(a > c);
        assert!(c < b);
    }

    #[test]
    fn wide_multiplication_is_exact_at_the_top() {
        // (2^127)·2 needs the high limb.
        let big = Ratio::new(1u128 << 127, 1);
        let bigger = Ratio::new(u128::MAX, 1);
        assert!(big < bigger);
        assert!(Ratio::new(u128::MAX, u128::MAX) < Ratio::new(u128::MAX, u128::MAX - 1));
    }

    #[test]
    fn ge_f64_integer_threshold_is_exact() {
        let r = Ratio::new(14, 14); // exactly 1
        assert!(r.ge_f64(1.0));
        let just_below = Ratio::new(u128::MAX - 1, u128::MAX);
        assert!(!just_below.ge_f64(1.0));
        let just_above = Ratio::new(u128::MAX, u128::MAX - 1);
        assert!(just_above.ge_f64(1.0));
    }

    #[test]
    fn fraction_round_trip() {
        let r = Ratio::new(123456789012345678901234567890, 98765);
        let s = r.as_fraction();
        assert_eq!(Ratio::parse(&s, 0).unwrap(), r);
    }
}
