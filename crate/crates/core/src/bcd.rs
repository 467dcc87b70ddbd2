//! 32-bit packed BCD pulse register: eight decimal digits, one per nibble.

use std::fmt;

/// Largest count the register can hold.
pub const BCD_MAX: u32 = 99_999_999;

const DIGITS: usize = 8;

/// Packed BCD value. Construct through [`Bcd32::from_bits`] or
/// [`Bcd32::from_value`] so every nibble stays in `0..=9`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Bcd32(u32);

/// Result of an increment or add: the new register and whether it saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcdStep {
    pub reg: Bcd32,
    pub overflow: bool,
}

impl Bcd32 {
    pub const ZERO: Self = Self(0);
    pub const MAX: Self = Self(0x9999_9999);

    /// Accepts raw register bits if every nibble is a decimal digit.
    pub fn from_bits(bits: u32) -> Option<Self> {
        (0..DIGITS)
            .all(|d| (bits >> (4 * d)) & 0xF <= 9)
            .then_some(Self(bits))
    }

    pub fn from_value(value: u32) -> Option<Self> {
        if value > BCD_MAX {
            return None;
        }
        let mut bits = 0u32;
        let mut rest = value;
        for d in 0..DIGITS {
            bits |= (rest % 10) << (4 * d);
            rest /= 10;
        }
        Some(Self(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn value(self) -> u32 {
        (0..DIGITS)
            .rev()
            .fold(0, |acc, d| acc * 10 + ((self.0 >> (4 * d)) & 0xF))
    }

    /// Adds one with nibble carries. Saturates at 99,999,999.
    pub fn increment(self) -> BcdStep {
        if self == Self::MAX {
            return BcdStep {
                reg: self,
                overflow: true,
            };
        }
        let mut bits = self.0;
        for d in 0..DIGITS {
            let shift = 4 * d;
            let digit = (bits >> shift) & 0xF;
            if digit < 9 {
                bits += 1 << shift;
                break;
            }
            // 9 rolls over to 0 and the carry moves one nibble up.
            bits &= !(0xF << shift);
        }
        BcdStep {
            reg: Self(bits),
            overflow: false,
        }
    }

    /// Adds `n` with decimal carries, saturating at 99,999,999.
    pub fn add_count(self, n: u64) -> BcdStep {
        let mut bits = 0u32;
        let mut carry = n;
        for d in 0..DIGITS {
            let shift = 4 * d;
            let sum = u64::from((self.0 >> shift) & 0xF) + carry % 10;
            carry = carry / 10 + sum / 10;
            bits |= ((sum % 10) as u32) << shift;
        }
        if carry > 0 {
            BcdStep {
                reg: Self::MAX,
                overflow: true,
            }
        } else {
            BcdStep {
                reg: Self(bits),
                overflow: false,
            }
        }
    }
}

impl fmt::Display for Bcd32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08x}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inc(bits: u32) -> u32 {
        Bcd32::from_bits(bits).unwrap().increment().reg.bits()
    }

    #[test]
    fn increment_examples() {
        assert_eq!(inc(0x0000_0009), 0x0000_0010);
        assert_eq!(inc(0x0000_0000), 0x0000_0001);
        assert_eq!(inc(0x0999_9999), 0x1000_0000);
        assert_eq!(inc(0x0000_0199), 0x0000_0200);
    }

    #[test]
    fn increment_saturates_with_flag() {
        let step = Bcd32::MAX.increment();
        assert!(step.overflow);
        assert_eq!(step.reg, Bcd32::MAX);
        assert_eq!(step.reg.value(), BCD_MAX);
        let before = Bcd32::from_value(BCD_MAX - 1).unwrap().increment();
        assert!(!before.overflow);
        assert_eq!(before.reg, Bcd32::MAX);
    }

    #[test]
    fn rejects_invalid_nibbles() {
        assert!(Bcd32::from_bits(0x0000_000A).is_none());
        assert!(Bcd32::from_bits(0xF000_0000).is_none());
        assert!(Bcd32::from_value(BCD_MAX + 1).is_none());
    }

    #[test]
    fn sequential_run_matches_integer_counter() {
        let mut reg = Bcd32::ZERO;
        for shadow in 1..=100_000u32 {
            reg = reg.increment().reg;
            assert_eq!(reg.value(), shadow);
        }
    }

    #[test]
    fn add_saturates() {
        let step = Bcd32::from_value(99_999_990).unwrap().add_count(10);
        assert!(step.overflow);
        assert_eq!(step.reg, Bcd32::MAX);
        let step = Bcd32::from_value(99_999_990).unwrap().add_count(9);
        assert!(!step.overflow);
        assert_eq!(step.reg.value(), BCD_MAX);
        assert!(Bcd32::ZERO.add_count(u64::MAX).overflow);
    }

    proptest! {
        #[test]
        fn value_round_trips(v in 0u32..=BCD_MAX) {
            prop_assert_eq!(Bcd32::from_value(v).unwrap().value(), v);
        }

        #[test]
        fn increment_matches_integer(v in 0u32..BCD_MAX) {
            let next = Bcd32::from_value(v).unwrap().increment();
            prop_assert!(!next.overflow);
            prop_assert_eq!(next.reg.value(), v + 1);
            prop_assert!(Bcd32::from_bits(next.reg.bits()).is_some());
        }

        #[test]
        fn add_matches_integer(v in 0u32..=BCD_MAX, n in 0u64..200_000_000) {
            let step = Bcd32::from_value(v).unwrap().add_count(n);
            let expected = u64::from(v) + n;
            prop_assert_eq!(step.overflow, expected > u64::from(BCD_MAX));
            prop_assert_eq!(u64::from(step.reg.value()), expected.min(u64::from(BCD_MAX)));
        }
    }
}
