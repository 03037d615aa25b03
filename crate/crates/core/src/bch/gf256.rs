//! GF(2^8) arithmetic under the primitive polynomial x^8+x^4+x^3+x^2+1.

use std::ops::{Add, AddAssign, Mul};
use std::sync::LazyLock;

/// Primitive polynomial 0x11d, the standard choice for length-255 codes.
pub const PRIMITIVE_POLY: u16 = 0x11d;
/// Multiplicative order of the field.
pub const ORDER: usize = 255;

struct Tables {
    exp: [u8; 2 * ORDER],
    log: [u8; 256],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut exp = [0u8; 2 * ORDER];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    for i in 0..ORDER {
        exp[i] = x as u8;
        exp[i + ORDER] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE_POLY;
        }
    }
    Tables { exp, log }
});

/// An element of GF(2^8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GfElement(pub u8);

impl GfElement {
    pub const ZERO: GfElement = GfElement(0);
    pub const ONE: GfElement = GfElement(1);

    /// α^i for the field generator α (= 0x02).
    pub fn alpha_pow(i: usize) -> GfElement {
        GfElement(TABLES.exp[i % ORDER])
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Discrete log base α; `None` for zero.
    pub fn log(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(TABLES.log[self.0 as usize] as usize)
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<GfElement> {
        self.log().map(|l| GfElement(TABLES.exp[ORDER - l]))
    }

    pub fn pow(self, e: usize) -> GfElement {
        match self.log() {
            None => {
                if e == 0 {
                    GfElement::ONE
                } else {
                    GfElement::ZERO
                }
            }
            Some(l) => GfElement::alpha_pow(l * e % ORDER),
        }
    }
}

impl Add for GfElement {
    type Output = GfElement;
    fn add(self, rhs: GfElement) -> GfElement {
        GfElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for GfElement {
    fn add_assign(&mut self, rhs: GfElement) {
        self.0 ^= rhs.0;
    }
}

impl Mul for GfElement {
    type Output = GfElement;
    fn mul(self, rhs: GfElement) -> GfElement {
        if self.0 == 0 || rhs.0 == 0 {
            return GfElement::ZERO;
        }
        let l = TABLES.log[self.0 as usize] as usize + TABLES.log[rhs.0 as usize] as usize;
        GfElement(TABLES.exp[l])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = crate::rng::StreamKey::new(31).rng(0);
        for _ in 0..10_000 {
            let a = GfElement(rng.random());
            let b = GfElement(rng.random());
            let c = GfElement(rng.random());
            assert_eq!(a * b, b * a);
            assert_eq!(a + b, b + a);
            assert_eq!((a * b) * c, a * (b * c));
            assert_eq!((a + b) + c, a + (b + c));
            assert_eq!(a * (b + c), a * b + a * c);
        }
    }

    #[test]
    fn every_nonzero_element_has_inverse() {
        for v in 1..=255u8 {
            let a = GfElement(v);
            let inv = a.inverse().unwrap();
            assert_eq!(a * inv, GfElement::ONE, "value {v}");
        }
        assert!(GfElement::ZERO.inverse().is_none());
    }

    #[test]
    fn alpha_has_full_order() {
        let mut seen = [false; 256];
        for i in 0..ORDER {
            let v = GfElement::alpha_pow(i).0 as usize;
            assert!(!seen[v], "alpha^{i} repeats");
            seen[v] = true;
        }
        assert_eq!(GfElement::alpha_pow(ORDER), GfElement::ONE);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let a = GfElement(0x53);
        let mut acc = GfElement::ONE;
        for e in 0..20 {
            assert_eq!(a.pow(e), acc);
            acc = acc * a;
        }
    }
}
