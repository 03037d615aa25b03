//! Polynomials over GF(2), bit-packed into u64 words (bit i = coefficient
//! of x^i).

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly2 {
    words: Vec<u64>,
}

impl Poly2 {
    pub fn zero() -> Poly2 {
        Poly2 { words: vec![] }
    }

    pub fn one() -> Poly2 {
        Poly2 { words: vec![1] }
    }

    /// x^d.
    pub fn x_pow(d: usize) -> Poly2 {
        let mut p = Poly2::zero();
        p.set_bit(d);
        p
    }

    /// Build from coefficient bits, index i = coefficient of x^i.
    pub fn from_coeffs(bits: &[u8]) -> Poly2 {
        let mut p = Poly2::zero();
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                p.set_bit(i);
            }
        }
        p
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn set_bit(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn degree(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    /// self += other · x^shift.
    pub fn xor_shifted(&mut self, other: &Poly2, shift: usize) {
        let (wshift, bshift) = (shift / 64, shift % 64);
        let needed = other.words.len() + wshift + 1;
        if self.words.len() < needed {
            self.words.resize(needed, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            self.words[i + wshift] ^= w << bshift;
            if bshift != 0 {
                self.words[i + wshift + 1] ^= w >> (64 - bshift);
            }
        }
        // keep the representation canonical so Eq/PartialEq stay structural
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        let deg = match self.degree() {
            Some(d) => d,
            None => return out,
        };
        for i in 0..=deg {
            if self.bit(i) {
                out.xor_shifted(other, i);
            }
        }
        out
    }

    /// Remainder of self modulo divisor (long division over GF(2)).
    pub fn rem(&self, divisor: &Poly2) -> Poly2 {
        let ddeg = divisor.degree().expect("division by zero polynomial");
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < ddeg {
                break;
            }
            r.xor_shifted(divisor, rd - ddeg);
        }
        r
    }

    pub fn divides(&self, other: &Poly2) -> bool {
        other.rem(self).is_zero()
    }
}
