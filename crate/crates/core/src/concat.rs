//! Serial concatenation of extended Hamming outer codes with a systematic
//! inner code, decoded by exchanging extrinsic LLRs between inner BP and
//! per-block BCJR on the outer syndrome trellis.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decode::{BpConfig, BpDecoder, DecodeError};
use crate::ensemble::SystematicCode;
use crate::gf2::{BitMatrix, BitVec};
use crate::rng;
use crate::scalar::{log_add_exp, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcatError {
    #[error("extended Hamming parameter r = {0} outside 2..=12")]
    InvalidR(usize),
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("inner code has k = {inner_k} but {blocks} outer blocks of length {outer_n} need {}", blocks * outer_n)]
    InnerDimension { inner_k: usize, blocks: usize, outer_n: usize },
    #[error("need at least one outer block")]
    NoBlocks,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// `[2^r, 2^r − r − 1]` extended Hamming code. Column `t` of the parity-check
/// matrix is `t` in binary over the first `r` rows with a 1 in the last row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedHammingCode {
    r: usize,
    parity_check: BitMatrix,
    generator: BitMatrix,
    /// Positions carrying the message bits.
    info_positions: Vec<usize>,
}

impl ExtendedHammingCode {
    pub fn new(r: usize) -> Result<Self, ConcatError> {
        if !(2..=12).contains(&r) {
            return Err(ConcatError::InvalidR(r));
        }
        let n = 1usize << r;
        let rows: Vec<Vec<usize>> = (0..=r)
            .map(|bit| if bit == r { (0..n).collect() } else { (0..n).filter(|t| t >> bit & 1 == 1).collect() })
            .collect();
        let parity_check = BitMatrix::from_row_supports(r + 1, n, rows).expect("sorted in-range supports");
        let (basis, info_positions) = parity_check.null_space();
        let generator = BitMatrix::from_bit_rows(n, &basis).expect("basis rows have length n");
        Ok(ExtendedHammingCode { r, parity_check, generator, info_positions })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        1 << self.r
    }

    pub fn k(&self) -> usize {
        self.n() - self.r - 1
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Codeword whose information positions hold `u`.
    pub fn encode(&self, u: &BitVec) -> Result<BitVec, ConcatError> {
        if u.len() != self.k() {
            return Err(ConcatError::LengthMismatch { expected: self.k(), found: u.len() });
        }
        Ok(self.generator.mat_vec_mul(u).expect("dimension checked"))
    }

    pub fn trellis(&self) -> SyndromeTrellis {
        let n = self.n();
        let columns = (0..n).map(|t| (t | n) as u32).collect();
        SyndromeTrellis { states: 2 * n, columns }
    }
}

/// Trellis whose state after `t` bits is the partial syndrome
/// `Σ_{s<t} c_s h_s`; codewords are the paths from state 0 back to state 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeTrellis {
    pub states: usize,
    /// Parity-check column of each section as a state mask.
    pub columns: Vec<u32>,
}

impl SyndromeTrellis {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Every path from state 0 to state 0, by depth-first search.
    pub fn zero_paths(&self) -> Vec<BitVec> {
        let mut out = Vec::new();
        let mut bits = vec![false; self.len()];
        self.walk(0, 0, &mut bits, &mut out);
        out
    }

    fn walk(&self, t: usize, state: u32, bits: &mut Vec<bool>, out: &mut Vec<BitVec>) {
        if t == self.len() {
            if state == 0 {
                out.push(BitVec::from_bools(bits.iter().copied()));
            }
            return;
        }
        for b in [false, true] {
            bits[t] = b;
            self.walk(t + 1, if b { state ^ self.columns[t] } else { state }, bits, out);
        }
    }

    /// Posterior LLRs by forward-backward in the log domain.
    pub fn bcjr_log<T: Real>(&self, prior: &[T]) -> Result<Vec<T>, ConcatError> {
        self.check_len(prior.len())?;
        let n = self.len();
        let ninf = T::neg_infinity();
        let half: Vec<T> = prior.iter().map(|&l| l * T::half()).collect();
        let mut alpha = vec![ninf; (n + 1) * self.states];
        alpha[0] = T::zero();
        for t in 0..n {
            let (cur, next) = alpha.split_at_mut((t + 1) * self.states);
            let cur = &cur[t * self.states..];
            let next = &mut next[..self.states];
            for (s, &a) in cur.iter().enumerate() {
                if a == ninf {
                    continue;
                }
                let s1 = s ^ self.columns[t] as usize;
                next[s] = log_add_exp(next[s], a + half[t]);
                next[s1] = log_add_exp(next[s1], a - half[t]);
            }
        }
        let mut beta = vec![ninf; self.states];
        beta[0] = T::zero();
        let mut post = vec![T::zero(); n];
        for t in (0..n).rev() {
            let cur = &alpha[t * self.states..(t + 1) * self.states];
            let mut prev = vec![ninf; self.states];
            let (mut zero, mut one) = (ninf, ninf);
            for (s, &a) in cur.iter().enumerate() {
                if a == ninf {
                    continue;
                }
                let s1 = s ^ self.columns[t] as usize;
                let b0 = half[t] + beta[s];
                let b1 = -half[t] + beta[s1];
                zero = log_add_exp(zero, a + b0);
                one = log_add_exp(one, a + b1);
                prev[s] = log_add_exp(b0, b1);
            }
            post[t] = zero - one;
            beta = prev;
        }
        Ok(post)
    }

    /// Posterior LLRs by forward-backward on normalised probabilities.
    pub fn bcjr_prob<T: Real>(&self, prior: &[T]) -> Result<Vec<T>, ConcatError> {
        self.check_len(prior.len())?;
        let n = self.len();
        let p0: Vec<T> = prior.iter().map(|&l| T::one() / (T::one() + (-l).exp())).collect();
        let p1: Vec<T> = prior.iter().map(|&l| T::one() / (T::one() + l.exp())).collect();
        let mut alpha = vec![T::zero(); (n + 1) * self.states];
        alpha[0] = T::one();
        for t in 0..n {
            let mut next = vec![T::zero(); self.states];
            for s in 0..self.states {
                let a = alpha[t * self.states + s];
                if a == T::zero() {
                    continue;
                }
                next[s] = next[s] + a * p0[t];
                let s1 = s ^ self.columns[t] as usize;
                next[s1] = next[s1] + a * p1[t];
            }
            let norm: T = next.iter().copied().sum();
            for (dst, v) in alpha[(t + 1) * self.states..(t + 2) * self.states].iter_mut().zip(next) {
                *dst = v / norm;
            }
        }
        let mut beta = vec![T::zero(); self.states];
        beta[0] = T::one();
        let mut post = vec![T::zero(); n];
        for t in (0..n).rev() {
            let mut prev = vec![T::zero(); self.states];
            let (mut zero, mut one) = (T::zero(), T::zero());
            for s in 0..self.states {
                let a = alpha[t * self.states + s];
                let s1 = s ^ self.columns[t] as usize;
                let b0 = p0[t] * beta[s];
                let b1 = p1[t] * beta[s1];
                zero = zero + a * b0;
                one = one + a * b1;
                prev[s] = b0 + b1;
            }
            post[t] = zero.ln() - one.ln();
            let norm: T = prev.iter().copied().sum();
            beta = prev.into_iter().map(|v| v / norm).collect();
        }
        Ok(post)
    }

    fn check_len(&self, len: usize) -> Result<(), ConcatError> {
        if len != self.len() {
            return Err(ConcatError::LengthMismatch { expected: self.len(), found: len });
        }
        Ok(())
    }
}

/// Exact per-bit posterior LLRs of `code` given prior LLRs.
pub fn bcjr_decode<T: Real>(code: &ExtendedHammingCode, prior: &[T]) -> Result<Vec<T>, ConcatError> {
    code.trellis().bcjr_log(prior)
}

/// Permutation `π` of the inner message positions: outer-stream bit `i` is
/// inner message bit `π[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng::seeded(seed));
        Interleaver { perm }
    }

    pub fn identity(len: usize) -> Self {
        Interleaver { perm: (0..len).collect() }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<V: Copy + Default>(&self, outer: &[V]) -> Vec<V> {
        let mut inner = vec![V::default(); self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inner[p] = outer[i];
        }
        inner
    }

    pub fn deinterleave<V: Copy>(&self, inner: &[V]) -> Vec<V> {
        self.perm.iter().map(|&p| inner[p]).collect()
    }
}

/// Configuration file form of a concatenated scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcatConfig {
    pub outer: OuterSpec,
    pub blocks: usize,
    pub inner: InnerSpec,
    pub interleaver_seed: u64,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_first_iterations")]
    pub first_round_iterations: usize,
    #[serde(default = "default_later_iterations")]
    pub later_round_iterations: usize,
}

fn default_rounds() -> usize {
    5
}

fn default_first_iterations() -> usize {
    50
}

fn default_later_iterations() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OuterSpec {
    ExtHamming { r: usize },
}

/// Inner code: sampled from `rho` (with `seed`), or read from a code/graph file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub k: usize,
    pub m: usize,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub graph_file: Option<std::path::PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// Iteration schedule of the concatenated decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcatSchedule {
    /// Outer passes; 0 means plain inner BP.
    pub rounds: usize,
    pub first_round_iterations: usize,
    pub later_round_iterations: usize,
    pub bp: BpConfig,
}

impl Default for ConcatSchedule {
    fn default() -> Self {
        ConcatSchedule {
            rounds: default_rounds(),
            first_round_iterations: default_first_iterations(),
            later_round_iterations: default_later_iterations(),
            bp: BpConfig::default(),
        }
    }
}

impl ConcatConfig {
    pub fn schedule(&self) -> ConcatSchedule {
        ConcatSchedule {
            rounds: self.rounds,
            first_round_iterations: self.first_round_iterations,
            later_round_iterations: self.later_round_iterations,
            bp: BpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcatOutcome {
    /// Decisions on the `blocks · k_outer` information bits.
    pub info_decision: BitVec,
    pub inner_iterations: usize,
}

/// Outer blocks, interleaver and inner code together.
#[derive(Debug, Clone)]
pub struct ConcatScheme {
    pub outer: ExtendedHammingCode,
    pub blocks: usize,
    pub inner: SystematicCode,
    pub interleaver: Interleaver,
    trellis: SyndromeTrellis,
}

impl ConcatScheme {
    pub fn new(
        outer: ExtendedHammingCode,
        blocks: usize,
        inner: SystematicCode,
        interleaver: Interleaver,
    ) -> Result<Self, ConcatError> {
        if blocks == 0 {
            return Err(ConcatError::NoBlocks);
        }
        if inner.k() != blocks * outer.n() {
            return Err(ConcatError::InnerDimension { inner_k: inner.k(), blocks, outer_n: outer.n() });
        }
        if interleaver.len() != inner.k() {
            return Err(ConcatError::LengthMismatch { expected: inner.k(), found: interleaver.len() });
        }
        let trellis = outer.trellis();
        Ok(ConcatScheme { outer, blocks, inner, interleaver, trellis })
    }

    pub fn info_len(&self) -> usize {
        self.blocks * self.outer.k()
    }

    pub fn codeword_len(&self) -> usize {
        self.inner.n()
    }

    /// `(blocks · k_outer) / (k_inner + m_inner)`.
    pub fn rate(&self) -> Ratio<usize> {
        Ratio::new(self.info_len(), self.codeword_len())
    }

    pub fn encode(&self, info: &BitVec) -> Result<BitVec, ConcatError> {
        if info.len() != self.info_len() {
            return Err(ConcatError::LengthMismatch { expected: self.info_len(), found: info.len() });
        }
        let ko = self.outer.k();
        let mut stream = Vec::with_capacity(self.inner.k());
        for b in 0..self.blocks {
            let cw = self.outer.encode(&info.slice(b * ko, (b + 1) * ko))?;
            stream.extend(cw.iter());
        }
        let u = BitVec::from_bools(self.interleaver.interleave(&stream));
        Ok(self.inner.encode(&u).expect("inner dimension checked"))
    }

    fn info_bits<T: Real>(&self, outer_llr: &[T]) -> BitVec {
        let n = self.outer.n();
        BitVec::from_bools(
            (0..self.blocks)
                .flat_map(|b| self.outer.info_positions().iter().map(move |&p| outer_llr[b * n + p] < T::zero())),
        )
    }

    /// Iterative decoding. Round `r` runs inner BP with the channel LLRs plus
    /// the outer extrinsic as systematic priors, passes the inner extrinsic
    /// (posterior minus outer prior) to the BCJR of every block, and keeps the
    /// outer extrinsic (posterior minus its input) for the next round. The
    /// output is the sign of the last outer posterior on the information
    /// positions, or of the inner posterior when `rounds = 0`.
    pub fn decode<T: Real>(
        &self,
        decoder: &mut BpDecoder<T>,
        llr: &[T],
        schedule: &ConcatSchedule,
    ) -> Result<ConcatOutcome, ConcatError> {
        let (k, n_outer) = (self.inner.k(), self.outer.n());
        if llr.len() != self.inner.n() {
            return Err(ConcatError::LengthMismatch { expected: self.inner.n(), found: llr.len() });
        }
        let mut priors = llr.to_vec();
        let mut outer_ext = vec![T::zero(); k];
        let mut inner_iterations = 0;
        let rounds = schedule.rounds.max(1);
        let mut decision = BitVec::zeros(self.info_len());
        for round in 0..rounds {
            for i in 0..k {
                priors[i] = llr[i] + outer_ext[i];
            }
            let iterations = if round == 0 { schedule.first_round_iterations } else { schedule.later_round_iterations };
            let cfg = BpConfig { max_iterations: iterations, ..schedule.bp };
            let out = decoder.decode(&priors, &cfg)?;
            inner_iterations += out.iterations_used;
            // BP saturates its inputs, so subtract the prior it actually used
            let clamp = T::of(cfg.llr_clamp);
            let to_outer: Vec<T> =
                (0..k).map(|i| out.posteriors[i] - priors[i].clamp_abs(clamp) + llr[i].clamp_abs(clamp)).collect();
            let stream = self.interleaver.deinterleave(&to_outer);
            if schedule.rounds == 0 {
                let posterior = self.interleaver.deinterleave(&out.posteriors);
                decision = self.info_bits(&posterior);
                break;
            }
            let posteriors: Vec<Vec<T>> = stream
                .par_chunks(n_outer)
                .map(|block| self.trellis.bcjr_log(block).expect("block length equals outer n"))
                .collect();
            let outer_post: Vec<T> = posteriors.into_iter().flatten().collect();
            decision = self.info_bits(&outer_post);
            let ext_stream: Vec<T> = outer_post.iter().zip(&stream).map(|(&p, &s)| p - s).collect();
            outer_ext = self.interleaver.interleave(&ext_stream);
        }
        Ok(ConcatOutcome { info_decision: decision, inner_iterations })
    }
}
