//! Binary BCH codec over GF(2^8), block length 255.
//!
//! Codes are narrow-sense: the generator is the least common multiple of the
//! minimal polynomials of α¹..α^2t. Decoding runs syndromes →
//! Berlekamp–Massey → Chien search and honors the bounded-distance
//! contract: any pattern of at most t flips is corrected; beyond that the
//! decoder either reports failure or miscorrects to a different codeword.

mod gf256;
mod poly2;

pub use gf256::GfElement;
pub use poly2::Poly2;

use crate::{Error, Result};

/// Block length of every code in this crate.
pub const BLOCK_LEN: usize = 255;
/// Largest supported error-correction capability at length 255.
pub const MAX_T: usize = 42;

/// Canonical (m, t) pairs for length-255 BCH codes with t ≤ 42.
pub const CANONICAL_CODES: [(usize, usize); 27] = [
    (247, 1),
    (239, 2),
    (231, 3),
    (223, 4),
    (215, 5),
    (207, 6),
    (199, 7),
    (191, 8),
    (187, 9),
    (179, 10),
    (171, 11),
    (163, 12),
    (155, 13),
    (147, 14),
    (139, 15),
    (131, 18),
    (123, 19),
    (115, 21),
    (107, 22),
    (99, 23),
    (91, 25),
    (87, 26),
    (79, 27),
    (71, 29),
    (63, 30),
    (55, 31),
    (47, 42),
];

/// A length-255 binary BCH code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BchCodeSpec {
    n: usize,
    m: usize,
    t: usize,
    generator: Poly2,
}

impl BchCodeSpec {
    /// Block length in bits.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length in bits.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Guaranteed error-correction capability in bits.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &Poly2 {
        &self.generator
    }

    /// Blocks needed to store a k-bit key: ⌈k/m⌉.
    pub fn blocks_for_key(&self, key_bits: usize) -> usize {
        key_bits.div_ceil(self.m)
    }

    /// Cells needed to store a k-bit key: n·⌈k/m⌉.
    pub fn cells_for_key(&self, key_bits: usize) -> usize {
        self.n * self.blocks_for_key(key_bits)
    }
}

/// One stored block of n cell bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    bits: Vec<u8>,
}

impl Block {
    pub fn new(bits: Vec<u8>) -> Result<Block> {
        if bits.len() != BLOCK_LEN {
            return Err(Error::LengthMismatch {
                expected: BLOCK_LEN,
                got: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("block bits must be 0/1".into()));
        }
        Ok(Block { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    /// Hex string, MSB-first: bit 0 of the block is the leftmost bit; the
    /// final nibble is zero-padded.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(BLOCK_LEN.div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                nibble |= b << (3 - i);
            }
            out.push(char::from_digit(u32::from(nibble), 16).unwrap());
        }
        out
    }
}

fn cyclotomic_coset(start: usize) -> Vec<usize> {
    let mut coset = Vec::new();
    let mut x = start;
    loop {
        coset.push(x);
        x = x * 2 % gf256::ORDER;
        if x == start {
            break;
        }
    }
    coset
}

/// Minimal polynomial over GF(2) of α^s for every s in the coset:
/// Π (x + α^s), which has 0/1 coefficients by construction.
fn minimal_polynomial(coset: &[usize]) -> Poly2 {
    let mut coeffs = vec![GfElement::ONE];
    for &s in coset {
        let root = GfElement::alpha_pow(s);
        let mut next = vec![GfElement::ZERO; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] += c * root;
        }
        coeffs = next;
    }
    let bits: Vec<u8> = coeffs
        .iter()
        .map(|c| {
            debug_assert!(c.0 <= 1, "minimal polynomial has non-binary coefficient");
            c.0
        })
        .collect();
    Poly2::from_coeffs(&bits)
}

/// Construct the narrow-sense BCH code of length 255 and designed distance
/// 2t+1.
///
/// The returned `t` is the effective (Bose) capability, which can exceed the
/// request when consecutive roots come for free: asking for t = 16 or 17
/// yields the same (255, 131) code as t = 18.
pub fn build_code(t: usize) -> Result<BchCodeSpec> {
    if t < 1 || t > MAX_T {
        return Err(Error::UnsupportedT(t));
    }
    let mut covered = vec![false; gf256::ORDER];
    let mut generator = Poly2::one();
    for r in 1..=2 * t {
        if covered[r] {
            continue;
        }
        let coset = cyclotomic_coset(r);
        for &s in &coset {
            covered[s] = true;
        }
        generator = generator.mul(&minimal_polynomial(&coset));
    }
    let mut d = 1;
    while d < gf256::ORDER && covered[d] {
        d += 1;
    }
    let effective_t = (d - 1) / 2;
    let m = BLOCK_LEN - generator.degree().expect("nonzero generator");
    Ok(BchCodeSpec {
        n: BLOCK_LEN,
        m,
        t: effective_t,
        generator,
    })
}

// Bit i of a block is the coefficient of x^(n-1-i): the message occupies the
// high-order coefficients, parity the low-order ones.
fn bit_power(i: usize) -> usize {
    BLOCK_LEN - 1 - i
}

/// Systematic encoding: message bits followed by n−m parity bits (the
/// remainder of message·x^(n−m) modulo the generator).
pub fn encode(spec: &BchCodeSpec, message: &[u8]) -> Result<Block> {
    if message.len() != spec.m {
        return Err(Error::LengthMismatch {
            expected: spec.m,
            got: message.len(),
        });
    }
    let parity_len = spec.n - spec.m;
    let mut padded = Poly2::zero();
    for (j, &b) in message.iter().enumerate() {
        if b > 1 {
            return Err(Error::InvalidParameter("message bits must be 0/1".into()));
        }
        if b == 1 {
            // message[0] is the highest-order coefficient
            padded.set_bit(parity_len + spec.m - 1 - j);
        }
    }
    let rem = padded.rem(&spec.generator);
    let mut bits = vec![0u8; spec.n];
    bits[..spec.m].copy_from_slice(message);
    for i in spec.m..spec.n {
        bits[i] = u8::from(rem.bit(bit_power(i)));
    }
    Block::new(bits)
}

fn syndromes(spec: &BchCodeSpec, block: &Block) -> Vec<GfElement> {
    let two_t = 2 * spec.t;
    let mut s = vec![GfElement::ZERO; two_t];
    for (i, &b) in block.bits.iter().enumerate() {
        if b == 1 {
            let p = bit_power(i);
            for (j, sj) in s.iter_mut().enumerate() {
                *sj += GfElement::alpha_pow((j + 1) * p % gf256::ORDER);
            }
        }
    }
    s
}

/// Berlekamp–Massey: minimal LFSR (error locator polynomial) for the
/// syndrome sequence. Returns the connection polynomial C and register
/// length L.
fn berlekamp_massey(s: &[GfElement]) -> (Vec<GfElement>, usize) {
    let mut c = vec![GfElement::ONE];
    let mut b = vec![GfElement::ONE];
    let mut l = 0usize;
    let mut gap = 1usize;
    let mut bb = GfElement::ONE;
    for i in 0..s.len() {
        let mut delta = s[i];
        for j in 1..=l.min(c.len() - 1) {
            delta += c[j] * s[i - j];
        }
        if delta.is_zero() {
            gap += 1;
        } else {
            let scale = delta * bb.inverse().expect("nonzero discrepancy");
            if 2 * l <= i {
                let old_c = c.clone();
                add_scaled(&mut c, &b, scale, gap);
                l = i + 1 - l;
                b = old_c;
                bb = delta;
                gap = 1;
            } else {
                add_scaled(&mut c, &b, scale, gap);
                gap += 1;
            }
        }
    }
    (c, l)
}

// c += scale · x^shift · b  (over GF(2^8), addition is XOR)
fn add_scaled(c: &mut Vec<GfElement>, b: &[GfElement], scale: GfElement, shift: usize) {
    if c.len() < b.len() + shift {
        c.resize(b.len() + shift, GfElement::ZERO);
    }
    for (j, &bj) in b.iter().enumerate() {
        c[j + shift] += scale * bj;
    }
}

/// Bounded-distance decoding. Returns the message when some codeword lies
/// within Hamming distance t of the received block; otherwise reports
/// `DecodeFailure` (miscorrection to a different codeword is possible when
/// the channel exceeds t errors — that is inherent to the contract).
pub fn decode(spec: &BchCodeSpec, received: &Block) -> Result<Vec<u8>> {
    let s = syndromes(spec, received);
    if s.iter().all(|x| x.is_zero()) {
        return Ok(received.bits[..spec.m].to_vec());
    }
    let (locator, l) = berlekamp_massey(&s);
    let deg = locator
        .iter()
        .rposition(|x| !x.is_zero())
        .unwrap_or(0);
    if l > spec.t || deg != l {
        return Err(Error::DecodeFailure);
    }

    // Chien search: bit i (power p) is in error iff Λ(α^{-p}) = 0.
    let mut corrected = received.clone();
    let mut roots = 0usize;
    for i in 0..spec.n {
        let p = bit_power(i);
        let x = GfElement::alpha_pow(gf256::ORDER - p);
        let mut acc = GfElement::ZERO;
        for &cj in locator.iter().rev() {
            acc = acc * x + cj;
        }
        if acc.is_zero() {
            corrected.bits[i] ^= 1;
            roots += 1;
        }
    }
    if roots != l {
        return Err(Error::DecodeFailure);
    }
    // The corrected word must be a codeword; a clean syndrome check guards
    // against spurious locator roots.
    if syndromes(spec, &corrected).iter().any(|x| !x.is_zero()) {
        return Err(Error::DecodeFailure);
    }
    Ok(corrected.bits[..spec.m].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn random_message(m: usize, rng: &mut impl Rng) -> Vec<u8> {
        (0..m).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn flip_random_bits(block: &mut Block, count: usize, rng: &mut impl Rng) {
        let mut idx: Vec<usize> = (0..BLOCK_LEN).collect();
        idx.shuffle(rng);
        for &i in idx.iter().take(count) {
            block.bits_mut()[i] ^= 1;
        }
    }

    #[test]
    fn parameters_match_standard_table() {
        for &(m, t) in &CANONICAL_CODES {
            let code = build_code(t).unwrap();
            assert_eq!((code.n(), code.m(), code.t()), (255, m, t), "t = {t}");
        }
    }

    #[test]
    fn requested_t_rounds_up_to_effective_capability() {
        for t in [16, 17] {
            let code = build_code(t).unwrap();
            assert_eq!((code.m(), code.t()), (131, 18));
        }
        assert_eq!(build_code(1).unwrap().m(), 247);
    }

    #[test]
    fn rejects_out_of_range_t() {
        assert!(matches!(build_code(0), Err(Error::UnsupportedT(0))));
        assert!(matches!(build_code(43), Err(Error::UnsupportedT(43))));
    }

    #[test]
    fn generator_divides_x255_plus_1() {
        let mut x255p1 = Poly2::x_pow(255);
        x255p1.xor_shifted(&Poly2::one(), 0);
        for t in 1..=MAX_T {
            let code = build_code(t).unwrap();
            assert!(
                code.generator().divides(&x255p1),
                "generator for t={t} does not divide x^255+1"
            );
        }
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let code = build_code(18).unwrap();
        let block = encode(&code, &vec![0u8; code.m()]).unwrap();
        assert!(block.bits().iter().all(|&b| b == 0));
    }

    #[test]
    fn systematic_prefix_and_divisibility() {
        let code = build_code(11).unwrap();
        let mut rng = StreamKey::new(41).rng(0);
        let msg = random_message(code.m(), &mut rng);
        let block = encode(&code, &msg).unwrap();
        assert_eq!(&block.bits()[..code.m()], &msg[..]);
        // codeword polynomial must be a multiple of the generator
        let coeffs: Vec<u8> = (0..BLOCK_LEN).map(|p| block.bits()[BLOCK_LEN - 1 - p]).collect();
        let poly = Poly2::from_coeffs(&coeffs);
        assert!(poly.rem(code.generator()).is_zero());
    }

    #[test]
    fn codewords_are_closed_under_xor() {
        let code = build_code(13).unwrap();
        let mut rng = StreamKey::new(42).rng(0);
        for _ in 0..50 {
            let a = encode(&code, &random_message(code.m(), &mut rng)).unwrap();
            let b = encode(&code, &random_message(code.m(), &mut rng)).unwrap();
            let xored: Vec<u8> = a.bits().iter().zip(b.bits()).map(|(x, y)| x ^ y).collect();
            let coeffs: Vec<u8> = (0..BLOCK_LEN).map(|p| xored[BLOCK_LEN - 1 - p]).collect();
            assert!(Poly2::from_coeffs(&coeffs).rem(code.generator()).is_zero());
        }
    }

    #[test]
    fn clean_round_trip() {
        let code = build_code(18).unwrap();
        let mut rng = StreamKey::new(43).rng(0);
        let msg = random_message(code.m(), &mut rng);
        let block = encode(&code, &msg).unwrap();
        assert_eq!(decode(&code, &block).unwrap(), msg);
    }

    #[test]
    fn corrects_up_to_t_errors() {
        let mut rng = StreamKey::new(44).rng(0);
        for t in [1, 11, 18, 42] {
            let code = build_code(t).unwrap();
            for e in [1, t / 2, t] {
                if e == 0 {
                    continue;
                }
                for _ in 0..100 {
                    let msg = random_message(code.m(), &mut rng);
                    let mut block = encode(&code, &msg).unwrap();
                    flip_random_bits(&mut block, e, &mut rng);
                    let decoded = decode(&code, &block)
                        .unwrap_or_else(|_| panic!("t={t} e={e}: decode failed"));
                    assert_eq!(decoded, msg, "t={t} e={e}");
                }
            }
        }
    }

    #[test]
    fn beyond_t_never_silently_returns_original() {
        // t+1 flips put the received word at distance t+1 from the original,
        // outside the decoding radius: the decoder must fail or miscorrect.
        let mut rng = StreamKey::new(45).rng(0);
        for t in [11, 18] {
            let code = build_code(t).unwrap();
            let mut failures = 0;
            for _ in 0..1000 {
                let msg = random_message(code.m(), &mut rng);
                let mut block = encode(&code, &msg).unwrap();
                flip_random_bits(&mut block, t + 1, &mut rng);
                match decode(&code, &block) {
                    Ok(decoded) => assert_ne!(decoded, msg, "returned original beyond radius"),
                    Err(_) => failures += 1,
                }
            }
            assert!(failures > 0, "expected at least one detected failure");
        }
    }

    #[test]
    fn random_codewords_have_weight_at_least_design_distance() {
        let mut rng = StreamKey::new(46).rng(0);
        for t in [11, 13, 18, 25, 42] {
            let code = build_code(t).unwrap();
            for _ in 0..2000 {
                let msg = random_message(code.m(), &mut rng);
                if msg.iter().all(|&b| b == 0) {
                    continue;
                }
                let block = encode(&code, &msg).unwrap();
                let weight: usize = block.bits().iter().map(|&b| b as usize).sum();
                assert!(weight >= 2 * t + 1, "t={t} weight={weight}");
            }
        }
    }

    #[test]
    fn block_hex_is_msb_first() {
        let mut bits = vec![0u8; 255];
        bits[0] = 1; // leftmost bit of the first nibble
        bits[5] = 1; // second bit of the second nibble
        let block = Block::new(bits).unwrap();
        let hex = block.to_hex();
        assert_eq!(hex.len(), 64);
        assert!(hex.starts_with("84"), "{hex}");
    }

    #[test]
    fn block_length_is_enforced() {
        assert!(matches!(
            Block::new(vec![0u8; 254]),
            Err(Error::LengthMismatch { expected: 255, got: 254 })
        ));
        let code = build_code(11).unwrap();
        assert!(encode(&code, &vec![0u8; 5]).is_err());
    }

    #[test]
    fn key_packing_counts() {
        let c42 = build_code(42).unwrap();
        let c18 = build_code(18).unwrap();
        assert_eq!(c18.blocks_for_key(128), 1);
        assert_eq!(c18.cells_for_key(128), 255);
        assert_eq!(c42.blocks_for_key(128), 3);
        assert_eq!(c42.cells_for_key(128), 765);
    }
}
