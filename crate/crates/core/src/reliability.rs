//! Designer-side reliability analysis.
//!
//! The number of erroneous cells in a block with heterogeneous error rates
//! follows a Poisson-binomial distribution. Its CDF is evaluated with the
//! exact complex-exponential (DFT) expression
//!
//! ```text
//! F(t) = (t+1)/(n+1) + 1/(n+1) · Σ_{m=1..n} (1 − e^{−iωm(t+1)})/(1 − e^{−iωm}) · z_m,
//! z_m  = Π_k (p_k e^{iωm} + 1 − p_k),   ω = 2π/(n+1)
//! ```
//!
//! cross-checked against an O(n·t) dynamic-programming oracle. Key failure
//! across blocks, criterion checking, minimal-code selection, and the
//! majority-voting transform build on top.

use rand::Rng;
use rayon::prelude::*;

use crate::bch::BchCodeSpec;
use crate::error_model::{sample_pe, MaesModel};
use crate::rng::StreamKey;
use crate::{Error, Result};

/// Per-cell error probabilities for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockErrorProfile {
    pe: Vec<f64>,
}

impl BlockErrorProfile {
    pub fn new(pe: Vec<f64>) -> Result<Self> {
        if pe.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(
                "error probabilities must lie in [0,1]".into(),
            ));
        }
        Ok(BlockErrorProfile { pe })
    }

    pub fn pe(&self) -> &[f64] {
        &self.pe
    }

    pub fn len(&self) -> usize {
        self.pe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pe.is_empty()
    }
}

/// Reliability target: a quantile of chips and the key-failure bound it
/// must stay under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityCriterion {
    pub chip_quantile: f64,
    pub max_key_failure: f64,
}

impl Default for ReliabilityCriterion {
    fn default() -> Self {
        ReliabilityCriterion {
            chip_quantile: 0.99,
            max_key_failure: 1e-6,
        }
    }
}

impl ReliabilityCriterion {
    pub fn new(chip_quantile: f64, max_key_failure: f64) -> Result<Self> {
        if !(0.0 < chip_quantile && chip_quantile < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "chip_quantile must be in (0,1), got {chip_quantile}"
            )));
        }
        if !(0.0 < max_key_failure && max_key_failure < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "max_key_failure must be in (0,1), got {max_key_failure}"
            )));
        }
        Ok(ReliabilityCriterion {
            chip_quantile,
            max_key_failure,
        })
    }

    /// Minimum chips for a meaningful quantile estimate: 10/(1−q).
    pub fn min_chips(&self) -> usize {
        (10.0 / (1.0 - self.chip_quantile)).ceil() as usize
    }
}

/// Monte Carlo distribution of per-chip key failure probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyFailureDistribution {
    pub samples: Vec<f64>,
    pub chips: usize,
}

impl KeyFailureDistribution {
    /// Nearest-rank quantile of the samples.
    pub fn quantile(&self, q: f64) -> f64 {
        assert!((0.0..1.0).contains(&q) && q > 0.0);
        let mut sorted = self.samples.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = (q * self.chips as f64).ceil() as usize;
        sorted[rank.clamp(1, self.chips) - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("chip_index,key_failure_prob\n");
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{i},{s:.9e}\n"));
        }
        out
    }
}

/// P(X ≤ t) for X the number of errors among independent Bernoulli(pe_k)
/// cells, via the exact DFT expression.
pub fn poisson_binomial_cdf(t: usize, profile: &BlockErrorProfile) -> f64 {
    poisson_binomial_cdf_multi(&[t], profile)[0]
}

/// DFT-path CDF evaluated at several thresholds in one pass; the per-cell
/// product z_m is shared, so this costs the same as a single evaluation.
pub fn poisson_binomial_cdf_multi(ts: &[usize], profile: &BlockErrorProfile) -> Vec<f64> {
    let n = profile.len();
    assert!(ts.iter().all(|&t| t <= n), "threshold beyond block length");
    // exact shortcuts: t = n covers every outcome; an all-zero profile
    // cannot produce a single error
    if profile.pe().iter().all(|&p| p == 0.0) {
        return vec![1.0; ts.len()];
    }
    let np1 = n + 1;
    let omega = 2.0 * std::f64::consts::PI / np1 as f64;

    // z_m for m = 1..n, accumulated cell by cell.
    let mut zre = vec![1.0f64; n];
    let mut zim = vec![0.0f64; n];
    let cos_m: Vec<f64> = (1..=n).map(|m| (omega * m as f64).cos()).collect();
    let sin_m: Vec<f64> = (1..=n).map(|m| (omega * m as f64).sin()).collect();
    for &p in profile.pe() {
        for m in 0..n {
            let fre = 1.0 - p + p * cos_m[m];
            let fim = p * sin_m[m];
            let re = zre[m] * fre - zim[m] * fim;
            let im = zre[m] * fim + zim[m] * fre;
            zre[m] = re;
            zim[m] = im;
        }
    }

    ts.iter()
        .map(|&t| {
            if t >= n {
                return 1.0;
            }
            let tp1 = (t + 1) as f64;
            let mut acc = 0.0f64;
            for m in 0..n {
                let ang = omega * (m + 1) as f64 * tp1;
                // (1 − e^{−iωm(t+1)}) / (1 − e^{−iωm})
                let (nre, nim) = (1.0 - ang.cos(), ang.sin());
                let (dre, dim) = (1.0 - cos_m[m], sin_m[m]);
                let dmag = dre * dre + dim * dim;
                let rre = (nre * dre + nim * dim) / dmag;
                let rim = (nim * dre - nre * dim) / dmag;
                // real part of ratio · z_m
                acc += rre * zre[m] - rim * zim[m];
            }
            ((tp1 / np1 as f64) + acc / np1 as f64).clamp(0.0, 1.0)
        })
        .collect()
}

/// Independent O(n·t) dynamic-programming oracle for the same CDF.
pub fn poisson_binomial_cdf_dp(t: usize, profile: &BlockErrorProfile) -> f64 {
    let n = profile.len();
    assert!(t <= n);
    if t >= n {
        return 1.0;
    }
    let mut dp = vec![0.0f64; t + 1];
    dp[0] = 1.0;
    for &p in profile.pe() {
        for j in (1..=t).rev() {
            dp[j] = dp[j] * (1.0 - p) + dp[j - 1] * p;
        }
        dp[0] *= 1.0 - p;
    }
    dp.iter().sum::<f64>().clamp(0.0, 1.0)
}

/// Block failure: probability that more than t cells are erroneous.
pub fn block_failure(t: usize, profile: &BlockErrorProfile) -> f64 {
    (1.0 - poisson_binomial_cdf(t, profile)).clamp(0.0, 1.0)
}

pub(crate) fn block_failure_multi(ts: &[usize], profile: &BlockErrorProfile) -> Vec<f64> {
    poisson_binomial_cdf_multi(ts, profile)
        .into_iter()
        .map(|f| (1.0 - f).clamp(0.0, 1.0))
        .collect()
}

/// Key failure across blocks: 1 − Π(1 − P_block). Accumulated in the log
/// domain, which stays exact for factors arbitrarily close to 0 or 1.
pub fn key_failure(block_failures: &[f64]) -> f64 {
    debug_assert!(block_failures.iter().all(|p| (0.0..=1.0).contains(p)));
    let log_ok: f64 = block_failures.iter().map(|&p| (-p).ln_1p()).sum();
    (-log_ok.exp_m1()).clamp(0.0, 1.0)
}

/// Key failure probability of one simulated chip: ⌈k/m⌉ freshly sampled
/// profiles of n error rates each.
pub fn sample_chip_key_failure<R: Rng + ?Sized>(
    model: &MaesModel,
    code: &BchCodeSpec,
    key_bits: usize,
    rng: &mut R,
) -> f64 {
    assert!(key_bits >= 1);
    let blocks = code.blocks_for_key(key_bits);
    let failures: Vec<f64> = (0..blocks)
        .map(|_| {
            let profile = BlockErrorProfile {
                pe: sample_pe(model, code.n(), rng),
            };
            block_failure(code.t(), &profile)
        })
        .collect();
    key_failure(&failures)
}

/// Distribution of key failure over independently simulated chips. Chip i
/// runs on substream i of `key`, so the result is reproducible under any
/// parallel schedule.
pub fn key_failure_distribution(
    model: &MaesModel,
    code: &BchCodeSpec,
    key_bits: usize,
    chips: usize,
    key: StreamKey,
) -> KeyFailureDistribution {
    assert!(chips >= 1);
    let samples: Vec<f64> = (0..chips)
        .into_par_iter()
        .map(|c| {
            let mut rng = key.rng(c as u64);
            sample_chip_key_failure(model, code, key_bits, &mut rng)
        })
        .collect();
    KeyFailureDistribution { samples, chips }
}

/// Pass iff the criterion quantile of the distribution is below the bound.
pub fn check_criterion(
    dist: &KeyFailureDistribution,
    criterion: &ReliabilityCriterion,
) -> Result<bool> {
    let needed = criterion.min_chips();
    if dist.chips < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: dist.chips,
        });
    }
    Ok(dist.quantile(criterion.chip_quantile) < criterion.max_key_failure)
}

/// One evaluated candidate in a code selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub percentile: f64,
    pub pass: bool,
}

impl CandidateResult {
    /// CSV row `delta_vt,code_t,pass,percentile_value`.
    pub fn csv_row(&self, delta_vt: f64) -> String {
        format!(
            "{delta_vt},{},{},{:.6e}",
            self.t, self.pass, self.percentile
        )
    }
}

/// Outcome of a minimal-code search, including the audit trail and the
/// selected code's full failure distribution.
#[derive(Debug, Clone)]
pub struct SelectionTrace {
    pub evaluated: Vec<CandidateResult>,
    pub selected: Option<BchCodeSpec>,
    pub selected_distribution: Option<KeyFailureDistribution>,
}

/// Smallest-t candidate whose key failure distribution passes the
/// criterion. Candidates must be sorted by ascending t.
pub fn select_minimal_code(
    model: &MaesModel,
    key_bits: usize,
    criterion: &ReliabilityCriterion,
    candidates: &[BchCodeSpec],
    chips: usize,
    key: StreamKey,
) -> Result<BchCodeSpec> {
    let trace = select_minimal_code_traced(model, key_bits, criterion, candidates, chips, key)?;
    trace.selected.ok_or(Error::NoFeasibleCode)
}

/// As [`select_minimal_code`] but returning every evaluated candidate.
///
/// Profiles are drawn per (chip, block) from fixed substreams, so all
/// candidates with the same block count see identical profiles and one
/// shared DFT pass per block serves every threshold; the outcome is
/// identical to evaluating [`key_failure_distribution`] per candidate.
pub fn select_minimal_code_traced(
    model: &MaesModel,
    key_bits: usize,
    criterion: &ReliabilityCriterion,
    candidates: &[BchCodeSpec],
    chips: usize,
    key: StreamKey,
) -> Result<SelectionTrace> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate codes".into()));
    }
    if candidates.windows(2).any(|w| w[0].t() > w[1].t()) {
        return Err(Error::InvalidParameter(
            "candidates must be sorted by ascending t".into(),
        ));
    }
    let needed = criterion.min_chips();
    if chips < needed {
        return Err(Error::InsufficientSamples { needed, got: chips });
    }

    let n = candidates[0].n();
    if candidates.iter().any(|c| c.n() != n) {
        return Err(Error::InvalidParameter(
            "candidates must share a block length".into(),
        ));
    }
    let ts: Vec<usize> = candidates.iter().map(|c| c.t()).collect();
    let max_blocks = candidates
        .iter()
        .map(|c| c.blocks_for_key(key_bits))
        .max()
        .unwrap();

    // Draw every chip's profiles up front (substream = chip index, blocks
    // consumed in order), then evaluate the expensive CDFs per block column
    // only when a candidate actually needs that block.
    let profiles: Vec<Vec<Vec<f64>>> = (0..chips)
        .into_par_iter()
        .map(|c| {
            let mut rng = key.rng(c as u64);
            (0..max_blocks)
                .map(|_| sample_pe(model, n, &mut rng))
                .collect()
        })
        .collect();

    // block_fail[block][chip][candidate]
    let mut block_fail: Vec<Vec<Vec<f64>>> = Vec::new();
    let ensure_blocks = |block_fail: &mut Vec<Vec<Vec<f64>>>, needed: usize| {
        while block_fail.len() < needed {
            let b = block_fail.len();
            let column: Vec<Vec<f64>> = profiles
                .par_iter()
                .map(|chip| {
                    let profile = BlockErrorProfile {
                        pe: chip[b].clone(),
                    };
                    block_failure_multi(&ts, &profile)
                })
                .collect();
            block_fail.push(column);
        }
    };

    let mut evaluated = Vec::new();
    let mut selected = None;
    let mut selected_distribution = None;
    for (ci, code) in candidates.iter().enumerate() {
        let blocks = code.blocks_for_key(key_bits);
        ensure_blocks(&mut block_fail, blocks);
        let samples: Vec<f64> = (0..chips)
            .map(|c| {
                let per_block: Vec<f64> = (0..blocks).map(|b| block_fail[b][c][ci]).collect();
                key_failure(&per_block)
            })
            .collect();
        let dist = KeyFailureDistribution {
            samples,
            chips,
        };
        let percentile = dist.quantile(criterion.chip_quantile);
        let pass = percentile < criterion.max_key_failure;
        evaluated.push(CandidateResult {
            n: code.n(),
            m: code.m(),
            t: code.t(),
            percentile,
            pass,
        });
        if pass {
            selected = Some(code.clone());
            selected_distribution = Some(dist);
            break;
        }
    }
    Ok(SelectionTrace {
        evaluated,
        selected,
        selected_distribution,
    })
}

/// Replace each cell error rate by the error rate of an r-read majority
/// vote: P(more than r/2 of r independent reads wrong). r must be odd.
pub fn majority_vote_transform(profile: &BlockErrorProfile, r: u32) -> BlockErrorProfile {
    assert!(r % 2 == 1 && r >= 1, "vote count must be odd, got {r}");
    if r == 1 {
        return profile.clone();
    }
    let pe = profile
        .pe()
        .iter()
        .map(|&p| {
            let mut sum = 0.0f64;
            let mut choose = 1.0f64; // C(r, i), built multiplicatively
            for i in 0..=r {
                if i > r / 2 {
                    sum += choose
                        * p.powi(i as i32)
                        * (1.0 - p).powi((r - i) as i32);
                }
                choose = choose * f64::from(r - i) / f64::from(i + 1);
            }
            sum.clamp(0.0, 1.0)
        })
        .collect();
    BlockErrorProfile { pe }
}
