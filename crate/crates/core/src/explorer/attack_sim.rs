//! Empirical end-to-end attack simulation.
//!
//! Validates the closed-form readout analysis by actually running the
//! attack: instantiate per-chip transistor thresholds for an encoded key,
//! measure every transistor on C chips with fresh noise, average, threshold
//! the differences into a guessed codeword, and run the real decoder.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::attacker::AttackerParams;
use crate::attacker::DesignPoint;
use crate::bch::{decode, encode, Block};
use crate::cell_sim::PMOS_NOMINAL_VT_MV;
use crate::rng::StreamKey;
use crate::Result;

/// Empirical success rate with a 95% Wilson confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSimResult {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959963984540054_f64; // 97.5th normal percentile
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()) / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Simulate `trials` independent attacks on fresh chip batches. One trial:
/// random key → encode → per-chip thresholds with process variation →
/// noisy per-transistor measurements on C chips → per-transistor averaging
/// → bit guesses → decode; success iff every block decodes to the original
/// message.
pub fn end_to_end_attack_sim(
    design: &DesignPoint,
    attacker: &AttackerParams,
    trials: usize,
    key: StreamKey,
) -> Result<AttackSimResult> {
    assert!(trials >= 1);
    let code = &design.code;
    let blocks = code.blocks_for_key(design.key_bits);
    let var_dist = Normal::new(0.0, design.sigma_var).expect("validated sigma");
    let err_dist = Normal::new(0.0, attacker.sigma_err).expect("validated sigma");

    let successes: usize = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = key.rng(trial as u64);
            // Random key, split into zero-padded messages.
            let key_bits: Vec<u8> = (0..design.key_bits).map(|_| rng.random_range(0..2u8)).collect();
            let mut messages = Vec::with_capacity(blocks);
            for b in 0..blocks {
                let mut msg = vec![0u8; code.m()];
                for j in 0..code.m() {
                    let idx = b * code.m() + j;
                    if idx < design.key_bits {
                        msg[j] = key_bits[idx];
                    }
                }
                messages.push(msg);
            }

            for msg in &messages {
                let block = encode(code, msg).expect("message length matches code");
                let mut guessed = vec![0u8; code.n()];
                for (i, &bit) in block.bits().iter().enumerate() {
                    // Designed threshold magnitudes: the transistor matching
                    // the stored bit carries the offset.
                    let p1_nominal = PMOS_NOMINAL_VT_MV + f64::from(bit ^ 1) * design.delta_vt;
                    let p2_nominal = PMOS_NOMINAL_VT_MV + f64::from(bit) * design.delta_vt;
                    let mut sum_p1 = 0.0;
                    let mut sum_p2 = 0.0;
                    for _ in 0..attacker.chips {
                        sum_p1 += p1_nominal + var_dist.sample(&mut rng) + err_dist.sample(&mut rng);
                        sum_p2 += p2_nominal + var_dist.sample(&mut rng) + err_dist.sample(&mut rng);
                    }
                    guessed[i] = u8::from(sum_p2 > sum_p1);
                }
                let received = Block::new(guessed).expect("length n");
                match decode(code, &received) {
                    Ok(decoded) if &decoded == msg => {}
                    _ => return false,
                }
            }
            true
        })
        .count();

    let rate = successes as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    Ok(AttackSimResult {
        trials,
        successes,
        rate,
        ci_low,
        ci_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::build_code;

    #[test]
    fn perfect_measurement_always_succeeds() {
        let code = build_code(11).unwrap();
        let design = DesignPoint::new(100.0, code, 128, 0.0).unwrap();
        let attacker = AttackerParams::new(0.0, 1).unwrap();
        let result =
            end_to_end_attack_sim(&design, &attacker, 50, StreamKey::new(71)).unwrap();
        assert_eq!(result.successes, 50);
        assert_eq!(result.rate, 1.0);
    }

    #[test]
    fn hopeless_measurement_never_succeeds() {
        // Δ=200 at σ_err=200, C=1: closed form ≈ 5e-13.
        let code = build_code(18).unwrap();
        let design = DesignPoint::new(200.0, code, 128, 30.0).unwrap();
        let attacker = AttackerParams::new(200.0, 1).unwrap();
        let result =
            end_to_end_attack_sim(&design, &attacker, 2000, StreamKey::new(72)).unwrap();
        assert_eq!(result.successes, 0);
    }

    #[test]
    fn deterministic_under_fixed_key() {
        let code = build_code(42).unwrap();
        let design = DesignPoint::new(100.0, code, 128, 30.0).unwrap();
        let attacker = AttackerParams::new(200.0, 9).unwrap();
        let a = end_to_end_attack_sim(&design, &attacker, 200, StreamKey::new(73)).unwrap();
        let b = end_to_end_attack_sim(&design, &attacker, 200, StreamKey::new(73)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wilson_interval_brackets_the_rate() {
        let (lo, hi) = wilson_interval(500, 1000);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.07);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }
}
