//! Decoders for systematic codes `(u, uG)`: sum-product BP, exhaustive MLD,
//! the repetition-code decision and the two-step list-coset decoder.
//!
//! All inputs are LLRs `ln P(y|0)/P(y|1)` over the `k + m` codeword
//! positions, message positions first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::SystematicCode;
use crate::gf2::{BitMatrix, BitVec};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected {expected} LLRs, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("exhaustive search over k = {k} exceeds the limit k <= {max}")]
    TooLarge { k: usize, max: usize },
    #[error("no LLRs to combine")]
    Empty,
    #[error("matrix is {rows} x {cols}, expected {expected_rows} rows")]
    MatrixShape { rows: usize, cols: usize, expected_rows: usize },
}

/// Which parity decisions the early-stop test compares the re-encoded
/// message decision against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Hard decisions of the parity posteriors (channel LLR plus the
    /// extrinsic message from its check), i.e. every check satisfied.
    #[default]
    ParityPosterior,
    /// Hard decisions of the raw parity channel LLRs.
    ParityChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpConfig {
    pub max_iterations: usize,
    /// Weight of the previous check-to-variable message, in `[0, 1)`.
    pub damping: f64,
    /// Bound on every message and channel LLR magnitude.
    pub llr_clamp: f64,
    pub early_stop: bool,
    pub stop_rule: StopRule,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig { max_iterations: 50, damping: 0.0, llr_clamp: 30.0, early_stop: true, stop_rule: StopRule::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome<T> {
    pub hard_decision: BitVec,
    pub converged: bool,
    pub iterations_used: usize,
    /// Posterior LLRs of the message bits.
    pub posteriors: Vec<T>,
}

/// Sum-product decoder bound to one code, reusing its message buffers.
///
/// The factor graph has a variable node per message bit and a check node per
/// parity bit; the parity bit's channel LLR is folded into its check.
#[derive(Debug, Clone)]
pub struct BpDecoder<T> {
    k: usize,
    m: usize,
    /// Edge range of check `j` is `chk_start[j]..chk_start[j + 1]`.
    chk_start: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edge ids of variable `i`, grouped: `var_edges[var_start[i]..var_start[i + 1]]`.
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
    v2c: Vec<T>,
    c2v: Vec<T>,
    tanh_buf: Vec<T>,
    suffix_buf: Vec<T>,
    posterior: Vec<T>,
}

impl<T: Real> BpDecoder<T> {
    pub fn new(code: &SystematicCode) -> Self {
        let (k, m) = (code.k(), code.m());
        let cols = code.col_supports();
        let mut chk_start = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        chk_start.push(0);
        for col in cols {
            edge_var.extend_from_slice(col);
            chk_start.push(edge_var.len());
        }
        let mut counts = vec![0usize; k + 1];
        for &v in &edge_var {
            counts[v + 1] += 1;
        }
        for i in 0..k {
            counts[i + 1] += counts[i];
        }
        let var_start = counts.clone();
        let mut fill = counts;
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        let n_edges = edge_var.len();
        let max_deg = cols.iter().map(Vec::len).max().unwrap_or(0);
        BpDecoder {
            k,
            m,
            chk_start,
            edge_var,
            var_start,
            var_edges,
            v2c: vec![T::zero(); n_edges],
            c2v: vec![T::zero(); n_edges],
            tanh_buf: vec![T::zero(); max_deg],
            suffix_buf: vec![T::zero(); max_deg + 1],
            posterior: vec![T::zero(); k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn decode(&mut self, llr: &[T], cfg: &BpConfig) -> Result<DecodeOutcome<T>, DecodeError> {
        let n = self.k + self.m;
        if llr.len() != n {
            return Err(DecodeError::LengthMismatch { expected: n, found: llr.len() });
        }
        let clamp = T::of(cfg.llr_clamp);
        let damping = T::of(cfg.damping);
        let keep = T::one() - damping;
        let (sys, par): (Vec<T>, Vec<T>) = (
            llr[..self.k].iter().map(|l| l.clamp_abs(clamp)).collect(),
            llr[self.k..].iter().map(|l| l.clamp_abs(clamp)).collect(),
        );
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e] = sys[v];
        }
        self.c2v.iter_mut().for_each(|x| *x = T::zero());
        let mut parity_ext = vec![T::zero(); self.m];
        let max_iterations = cfg.max_iterations.max(1);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iterations {
            iterations += 1;
            for j in 0..self.m {
                let (lo, hi) = (self.chk_start[j], self.chk_start[j + 1]);
                parity_ext[j] = self.update_check(lo, hi, par[j], clamp, damping, keep);
            }
            for (i, &prior) in sys.iter().enumerate() {
                let edges = &self.var_edges[self.var_start[i]..self.var_start[i + 1]];
                let total = edges.iter().fold(prior, |acc, &e| acc + self.c2v[e]);
                self.posterior[i] = total;
                for &e in edges {
                    self.v2c[e] = (total - self.c2v[e]).clamp_abs(clamp);
                }
            }
            if cfg.early_stop && self.consistent(&par, &parity_ext, cfg.stop_rule) {
                converged = true;
                break;
            }
        }
        if !cfg.early_stop {
            converged = self.consistent(&par, &parity_ext, cfg.stop_rule);
        }
        Ok(DecodeOutcome {
            hard_decision: BitVec::from_bools(self.posterior.iter().map(|&l| l < T::zero())),
            converged,
            iterations_used: iterations,
            posteriors: self.posterior.clone(),
        })
    }

    /// Check update by the tanh rule with prefix/suffix products; returns
    /// the extrinsic LLR toward the parity bit.
    fn update_check(&mut self, lo: usize, hi: usize, parity: T, clamp: T, damping: T, keep: T) -> T {
        let deg = hi - lo;
        let (t, suffix) = (&mut self.tanh_buf, &mut self.suffix_buf);
        for (ti, &v) in t[..deg].iter_mut().zip(&self.v2c[lo..hi]) {
            *ti = (v * T::half()).tanh();
        }
        suffix[deg] = T::one();
        for idx in (0..deg).rev() {
            suffix[idx] = suffix[idx + 1] * t[idx];
        }
        let mut prefix = (parity * T::half()).tanh();
        for idx in 0..deg {
            let e = lo + idx;
            let msg = atanh2(prefix * suffix[idx + 1], clamp);
            self.c2v[e] = keep * msg + damping * self.c2v[e];
            prefix = prefix * t[idx];
        }
        atanh2(suffix[0], clamp)
    }

    fn consistent(&self, par: &[T], parity_ext: &[T], rule: StopRule) -> bool {
        (0..self.m).all(|j| {
            let bit = self.edge_var[self.chk_start[j]..self.chk_start[j + 1]]
                .iter()
                .fold(false, |acc, &v| acc ^ (self.posterior[v] < T::zero()));
            let reference = match rule {
                StopRule::ParityPosterior => par[j] + parity_ext[j],
                StopRule::ParityChannel => par[j],
            };
            bit == (reference < T::zero())
        })
    }
}

/// `2 atanh(x)`, saturated at `±clamp`.
#[inline]
fn atanh2<T: Real>(x: T, clamp: T) -> T {
    let one = T::one();
    if x >= one {
        return clamp;
    }
    if x <= -one {
        return -clamp;
    }
    ((one + x) / (one - x)).ln().clamp_abs(clamp)
}

/// One-shot BP decode.
pub fn bp_decode<T: Real>(code: &SystematicCode, llr: &[T], cfg: &BpConfig) -> Result<DecodeOutcome<T>, DecodeError> {
    BpDecoder::new(code).decode(llr, cfg)
}

/// Largest `k` accepted by [`mld_exhaustive`].
pub const MLD_MAX_K: usize = 24;

/// Lexicographic order on message masks where bit `i` is `u_i` and `u_0` is
/// the most significant symbol.
#[inline]
fn lex_less(a: u64, b: u64) -> bool {
    let d = a ^ b;
    d != 0 && a & (1 << d.trailing_zeros()) == 0
}

#[inline]
fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Message vector maximising `Σ_t (1 − 2c_t) llr_t` over all `2^k` codewords,
/// enumerated in Gray-code order with incremental scores. Scores within a
/// relative `1e-9` count as ties and go to the lexicographically smallest
/// message.
pub fn mld_exhaustive<T: Real>(code: &SystematicCode, llr: &[T]) -> Result<BitVec, DecodeError> {
    let (k, m) = (code.k(), code.m());
    if k > MLD_MAX_K {
        return Err(DecodeError::TooLarge { k, max: MLD_MAX_K });
    }
    if llr.len() != k + m {
        return Err(DecodeError::LengthMismatch { expected: k + m, found: llr.len() });
    }
    let l: Vec<f64> = llr.iter().map(|x| x.as_f64()).collect();
    let rows = code.generator().row_supports();
    let mut sign = vec![1.0f64; k + m];
    let mut score: f64 = l.iter().sum();
    let (mut best, mut best_u) = (score, 0u64);
    let mut u = 0u64;
    for step in 1u64..(1u64 << k) {
        let i = step.trailing_zeros() as usize;
        u ^= 1 << i;
        for pos in std::iter::once(i).chain(rows[i].iter().map(|&c| k + c)) {
            score -= 2.0 * sign[pos] * l[pos];
            sign[pos] = -sign[pos];
        }
        if ties(score, best) {
            if lex_less(u, best_u) {
                best_u = u;
            }
        } else if score > best {
            best = score;
            best_u = u;
        }
    }
    Ok(BitVec::from_u64(best_u, k))
}

/// `0` if the LLR sum is positive, `1` otherwise.
pub fn repetition_decision<T: Real>(llrs: &[T]) -> Result<bool, DecodeError> {
    if llrs.is_empty() {
        return Err(DecodeError::Empty);
    }
    Ok(llrs.iter().copied().sum::<T>() <= T::zero())
}

/// Largest `k` accepted by [`list_coset_decode`].
pub const LIST_COSET_MAX_K: usize = 20;

/// How the second step of the list-coset decoder picks from the list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListSelection {
    /// Maximise the parity likelihood `P(y | uG)` alone.
    #[default]
    Parity,
    /// Maximise the joint likelihood `P(v | u) P(y | uG)`.
    Joint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListCosetOutcome {
    pub decision: BitVec,
    /// One member per non-empty coset, ordered by syndrome `z = uA`.
    pub list: Vec<BitVec>,
}

/// Two-step decoding: for every `z` the most likely `u` (under `v_llr`) with
/// `uA = z` joins the list; the list member selected by `selection` is
/// returned. Ties go to the lexicographically smallest message.
pub fn list_coset_decode<T: Real>(
    a: &BitMatrix,
    v_llr: &[T],
    parity_llr: &[T],
    g: &BitMatrix,
    selection: ListSelection,
) -> Result<ListCosetOutcome, DecodeError> {
    let k = v_llr.len();
    if k > LIST_COSET_MAX_K {
        return Err(DecodeError::TooLarge { k, max: LIST_COSET_MAX_K });
    }
    if a.rows() != k {
        return Err(DecodeError::MatrixShape { rows: a.rows(), cols: a.cols(), expected_rows: k });
    }
    if g.rows() != k {
        return Err(DecodeError::MatrixShape { rows: g.rows(), cols: g.cols(), expected_rows: k });
    }
    if parity_llr.len() != g.cols() {
        return Err(DecodeError::LengthMismatch { expected: g.cols(), found: parity_llr.len() });
    }
    let m_tilde = a.cols();
    if m_tilde > LIST_COSET_MAX_K {
        return Err(DecodeError::TooLarge { k: m_tilde, max: LIST_COSET_MAX_K });
    }
    let row_mask = |i: usize| a.row(i).iter().fold(0u64, |acc, &c| acc | (1 << c));
    let a_rows: Vec<u64> = (0..k).map(row_mask).collect();
    let v: Vec<f64> = v_llr.iter().map(|x| x.as_f64()).collect();
    let mut best: Vec<Option<(f64, u64)>> = vec![None; 1 << m_tilde];
    let (mut u, mut z) = (0u64, 0u64);
    let mut score: f64 = v.iter().sum();
    let consider = |best: &mut Vec<Option<(f64, u64)>>, z: u64, score: f64, u: u64| {
        let slot = &mut best[z as usize];
        *slot = match *slot {
            None => Some((score, u)),
            Some((s, w)) if ties(score, s) => Some((s, if lex_less(u, w) { u } else { w })),
            Some((s, _)) if score > s => Some((score, u)),
            keep => keep,
        };
    };
    consider(&mut best, 0, score, 0);
    for step in 1u64..(1u64 << k) {
        let i = step.trailing_zeros() as usize;
        u ^= 1 << i;
        z ^= a_rows[i];
        score += if u & (1 << i) != 0 { -2.0 * v[i] } else { 2.0 * v[i] };
        consider(&mut best, z, score, u);
    }
    let members: Vec<(f64, u64)> = best.into_iter().flatten().collect();
    let mut chosen: Option<(f64, u64)> = None;
    for &(sys_score, u) in &members {
        let ub = BitVec::from_u64(u, k);
        let x = g.mat_vec_mul(&ub).expect("dimensions checked");
        let par: f64 = x.iter().zip(parity_llr).map(|(b, &l)| if b { -l.as_f64() } else { l.as_f64() }).sum();
        let total = match selection {
            ListSelection::Parity => par,
            ListSelection::Joint => par + sys_score,
        };
        chosen = match chosen {
            None => Some((total, u)),
            Some((s, w)) if ties(total, s) => Some((s, if lex_less(u, w) { u } else { w })),
            Some((s, _)) if total > s => Some((total, u)),
            keep => keep,
        };
    }
    let (_, u) = chosen.expect("the zero syndrome coset is never empty");
    Ok(ListCosetOutcome {
        decision: BitVec::from_u64(u, k),
        list: members.iter().map(|&(_, u)| BitVec::from_u64(u, k)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{BiosChannel, LlrVector};
    use crate::ensemble::{sample_bernoulli_matrix, sample_bgm, BernoulliSampler};
    use crate::rng;
    use crate::special::q_function;
    use rand::Rng as _;

    fn code_from(rows: &[&[usize]], m: usize) -> SystematicCode {
        SystematicCode::from_generator(
            BitMatrix::from_row_supports(rows.len(), m, rows.iter().map(|r| r.to_vec()).collect()).unwrap(),
        )
    }

    /// Bitwise MAP posteriors by summing over all messages.
    fn map_posteriors(code: &SystematicCode, llr: &[f64]) -> Vec<f64> {
        let k = code.k();
        let mut num = vec![f64::NEG_INFINITY; k];
        let mut den = vec![f64::NEG_INFINITY; k];
        let lae = |a: f64, b: f64| crate::scalar::log_add_exp(a, b);
        for u in 0..(1u64 << k) {
            let c = code.encode(&BitVec::from_u64(u, k)).unwrap();
            let w: f64 = c.iter().zip(llr).map(|(b, &l)| if b { -l / 2.0 } else { l / 2.0 }).sum();
            for i in 0..k {
                if u & (1 << i) == 0 {
                    num[i] = lae(num[i], w);
                } else {
                    den[i] = lae(den[i], w);
                }
            }
        }
        num.iter().zip(&den).map(|(a, b)| a - b).collect()
    }

    #[test]
    fn noiseless_codeword_decodes_in_one_iteration() {
        let code = sample_bgm(64, 64, 0.05, 1).unwrap();
        let mut r = rng::seeded(2);
        let u = BitVec::from_bools((0..64).map(|_| r.random::<bool>()));
        let c = code.encode(&u).unwrap();
        let llr = LlrVector::noiseless(&c, 30.0);
        let out = bp_decode(&code, &llr, &BpConfig::default()).unwrap();
        assert_eq!(out.hard_decision, u);
        assert!(out.converged);
        assert_eq!(out.iterations_used, 1);
        let huge = LlrVector::noiseless(&c, 1e6);
        assert_eq!(bp_decode(&code, &huge, &BpConfig::default()).unwrap().hard_decision, u);
    }

    #[test]
    fn tree_graph_matches_exact_map() {
        // checks {0,1}, {1,2}, {2}: cycle-free
        let code = SystematicCode::from_generator(
            BitMatrix::from_dense(&[vec![1, 0, 0], vec![1, 1, 0], vec![0, 1, 1]]).unwrap(),
        );
        let mut r = rng::seeded(3);
        let ch = BiosChannel::<f64>::awgn(0.9).unwrap();
        let cfg = BpConfig { max_iterations: 10, early_stop: false, ..BpConfig::default() };
        for _ in 0..50 {
            let llr: Vec<f64> = (0..6).map(|_| ch.sample_llr(r.random(), &mut r)).collect();
            let bp = bp_decode(&code, &llr, &cfg).unwrap();
            let map = map_posteriors(&code, &llr);
            for (a, b) in bp.posteriors.iter().zip(&map) {
                assert!((a - b).abs() < 1e-9, "bp={a} map={b}");
            }
        }
    }

    #[test]
    fn bp_respects_channel_symmetry() {
        // Flipping the transmitted codeword and negating its LLRs on the
        // flipped positions leaves the decision XOR-shifted by the message.
        let code = sample_bgm(96, 96, 0.04, 4).unwrap();
        let ch = BiosChannel::<f64>::awgn(0.8).unwrap();
        let mut r = rng::seeded(5);
        let u = BitVec::from_bools((0..96).map(|_| r.random::<bool>()));
        let c = code.encode(&u).unwrap();
        let cfg = BpConfig::default();
        for _ in 0..20 {
            let zero_llr: Vec<f64> = (0..192).map(|_| ch.sample_llr(false, &mut r)).collect();
            let mapped: Vec<f64> = zero_llr.iter().zip(c.iter()).map(|(&l, b)| if b { -l } else { l }).collect();
            let a = bp_decode(&code, &zero_llr, &cfg).unwrap();
            let b = bp_decode(&code, &mapped, &cfg).unwrap();
            assert_eq!(a.hard_decision.xor_with(&u), b.hard_decision);
            assert_eq!(a.iterations_used, b.iterations_used);
        }
    }

    #[test]
    fn bp_rejects_wrong_length() {
        let code = code_from(&[&[0]], 1);
        assert_eq!(
            bp_decode(&code, &[1.0], &BpConfig::default()).unwrap_err(),
            DecodeError::LengthMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn damping_and_f32_still_decode() {
        let code = sample_bgm(128, 128, 0.04, 7).unwrap();
        let ch = BiosChannel::<f32>::awgn(0.7).unwrap();
        let mut r = rng::seeded(8);
        let llr: Vec<f32> = (0..256).map(|_| ch.sample_llr(false, &mut r)).collect();
        let cfg = BpConfig { damping: 0.3, ..BpConfig::default() };
        let out = bp_decode(&code, &llr, &cfg).unwrap();
        assert!(out.hard_decision.weight() <= 2);
    }

    #[test]
    fn mld_examples() {
        let code = sample_bgm(10, 8, 0.3, 2).unwrap();
        let u = BitVec::from_u64(0b1011001101, 10);
        let c = code.encode(&u).unwrap();
        assert_eq!(mld_exhaustive(&code, &LlrVector::noiseless(&c, 2.0)).unwrap(), u);
        // all-zero LLRs: everything ties, lexicographically smallest is 0
        assert!(mld_exhaustive(&code, &[0.0; 18]).unwrap().is_zero());
        let big = SystematicCode::from_generator(BitMatrix::zeros(25, 1));
        assert!(matches!(mld_exhaustive(&big, &[0.0; 26]), Err(DecodeError::TooLarge { .. })));
    }

    #[test]
    fn mld_tie_break_is_lexicographic() {
        // two messages 10 and 01 with equal score; u_0 is the leading symbol
        let code = code_from(&[&[], &[]], 0);
        assert_eq!(mld_exhaustive(&code, &[-1.0, -1.0]).unwrap().to_string(), "11");
        assert_eq!(mld_exhaustive(&code, &[0.0, -1.0]).unwrap().to_string(), "01");
        assert_eq!(mld_exhaustive(&code, &[-1.0, 0.0]).unwrap().to_string(), "10");
    }

    #[test]
    fn mld_matches_brute_force_and_scaling() {
        let code = sample_bgm(8, 6, 0.35, 9).unwrap();
        let ch = BiosChannel::<f64>::awgn(1.0).unwrap();
        let mut r = rng::seeded(10);
        for _ in 0..200 {
            let llr: Vec<f64> = (0..14).map(|_| ch.sample_llr(false, &mut r)).collect();
            let fast = mld_exhaustive(&code, &llr).unwrap();
            let brute = (0..256u64)
                .map(|u| {
                    let c = code.encode(&BitVec::from_u64(u, 8)).unwrap();
                    (c.iter().zip(&llr).map(|(b, &l)| if b { -l } else { l }).sum::<f64>(), u)
                })
                .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
            assert_eq!(fast, BitVec::from_u64(brute.1, 8));
            let scaled: Vec<f64> = llr.iter().map(|l| 3.7 * l).collect();
            assert_eq!(mld_exhaustive(&code, &scaled).unwrap(), fast);
        }
    }

    #[test]
    fn bp_never_beats_mld() {
        let code = sample_bgm(12, 12, 0.25, 11).unwrap();
        let ch = BiosChannel::<f64>::awgn(0.9).unwrap();
        let mut r = rng::seeded(12);
        let mut dec = BpDecoder::new(&code);
        let (mut bp_err, mut ml_err) = (0, 0);
        for _ in 0..4000 {
            let llr: Vec<f64> = (0..24).map(|_| ch.sample_llr(false, &mut r)).collect();
            bp_err += usize::from(!dec.decode(&llr, &BpConfig::default()).unwrap().hard_decision.is_zero());
            ml_err += usize::from(!mld_exhaustive(&code, &llr).unwrap().is_zero());
        }
        let se = ((bp_err + ml_err) as f64).sqrt();
        assert!(ml_err as f64 <= bp_err as f64 + 3.0 * se, "ml={ml_err} bp={bp_err}");
    }

    #[test]
    fn repetition_examples() {
        assert!(!repetition_decision(&[0.5, 1.0, 2.0]).unwrap());
        assert!(repetition_decision(&[1.0, -1.0]).unwrap());
        assert!(repetition_decision::<f64>(&[]).is_err());
        // ω = 8 repetitions at σ = 1: error rate Q(√8)
        let ch = BiosChannel::<f64>::awgn(1.0).unwrap();
        let mut r = rng::seeded(13);
        let trials = 400_000;
        let errors = (0..trials)
            .filter(|_| {
                let l: Vec<f64> = (0..8).map(|_| ch.sample_llr(false, &mut r)).collect();
                repetition_decision(&l).unwrap()
            })
            .count();
        let p: f64 = q_function(8f64.sqrt());
        assert!((p - 0.00234).abs() < 1e-5);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((errors as f64 / trials as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn list_coset_noiseless_and_degenerate() {
        let mut r = rng::seeded(14);
        let k = 10;
        let a = sample_bernoulli_matrix(k, 5, 0.5, BernoulliSampler::PerEntry, &mut r).unwrap();
        let g = sample_bernoulli_matrix(k, 8, 0.5, BernoulliSampler::PerEntry, &mut r).unwrap();
        let u = BitVec::from_u64(0b1100101011, k);
        let v = LlrVector::noiseless(&u, 5.0);
        let y = LlrVector::noiseless(&g.mat_vec_mul(&u).unwrap(), 5.0);
        let out = list_coset_decode(&a, &v, &y, &g, ListSelection::Parity).unwrap();
        assert!(out.list.contains(&u));
        assert_eq!(out.decision, u);
        assert!(out.list.len() <= 1 << 5);
        // A = I: every coset is a single message, so the list is all of F₂^k
        // and the pick is by parity likelihood alone (joint with `Joint`).
        let ident = BitMatrix::identity(k);
        // more parity bits than message bits so parity scores rarely tie
        let g = sample_bernoulli_matrix(k, 16, 0.5, BernoulliSampler::PerEntry, &mut r).unwrap();
        let y = LlrVector::noiseless(&g.mat_vec_mul(&u).unwrap(), 5.0);
        let noisy: Vec<f64> = v.iter().map(|&l| l + r.random_range(-6.0..6.0)).collect();
        let parity_noisy: Vec<f64> = y.iter().map(|&l| l + r.random_range(-6.0..6.0)).collect();
        let full = list_coset_decode(&ident, &noisy, &parity_noisy, &g, ListSelection::Parity).unwrap();
        assert_eq!(full.list.len(), 1 << k);
        let joint = list_coset_decode(&ident, &noisy, &parity_noisy, &g, ListSelection::Joint).unwrap();
        let code = SystematicCode::from_generator(g.clone());
        let all: Vec<f64> = noisy.iter().chain(&parity_noisy).copied().collect();
        assert_eq!(joint.decision, mld_exhaustive(&code, &all).unwrap());
        let parity_only = (0..1u64 << k)
            .map(|u| {
                let x = g.mat_vec_mul(&BitVec::from_u64(u, k)).unwrap();
                (x.iter().zip(&parity_noisy).map(|(b, &l)| if b { -l } else { l }).sum::<f64>(), u)
            })
            .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 + 1e-9 { x } else { acc });
        assert_eq!(full.decision, BitVec::from_u64(parity_only.1, k));
        let big = BitMatrix::zeros(21, 2);
        assert!(list_coset_decode(&big, &[0.0; 21], &[], &BitMatrix::zeros(21, 0), ListSelection::Parity).is_err());
    }

    #[test]
    fn list_coset_is_no_better_than_joint_mld() {
        let (k, m_tilde, m) = (12, 6, 12);
        let mut r = rng::seeded(15);
        let a = sample_bernoulli_matrix(k, m_tilde, 0.5, BernoulliSampler::PerEntry, &mut r).unwrap();
        let code = sample_bgm(k, m, 0.5, 16).unwrap();
        let bsc = BiosChannel::<f64>::bsc(0.05).unwrap();
        let awgn = BiosChannel::<f64>::awgn(1.0).unwrap();
        let (mut lc, mut ml) = (0, 0);
        let trials = 10_000;
        for _ in 0..trials {
            let v: Vec<f64> = (0..k).map(|_| bsc.sample_llr(false, &mut r)).collect();
            let y: Vec<f64> = (0..m).map(|_| awgn.sample_llr(false, &mut r)).collect();
            lc += usize::from(
                !list_coset_decode(&a, &v, &y, code.generator(), ListSelection::Parity).unwrap().decision.is_zero(),
            );
            let all: Vec<f64> = v.iter().chain(&y).copied().collect();
            ml += usize::from(!mld_exhaustive(&code, &all).unwrap().is_zero());
        }
        let se = ((lc + ml) as f64).sqrt();
        assert!(lc as f64 >= ml as f64 - 3.0 * se, "list-coset {lc} vs mld {ml}");
    }
}
