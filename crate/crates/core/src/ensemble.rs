//! Systematic Bernoulli generator matrix (BGM) and Bernoulli parity-check
//! (BPC) code ensembles, with their analytic weight enumerators.
//!
//! A BGM code maps `u ∈ F₂ᵏ` to `(u, u·G)` where every entry of the `k×m`
//! matrix `G` is an independent Bernoulli(ρ) draw. A parity bit produced by a
//! weight-ω message is itself Bernoulli with success probability
//! `ρ_ω = (1 − (1 − 2ρ)^ω)/2`, which drives every enumerator in this module.
//! Combinatorial quantities are kept in log space so `k` in the thousands
//! does not overflow.

use num_rational::Ratio;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, Gf2Error};
use crate::rng;
use crate::scalar::{log_sum_exp, Real};
use crate::special::ln_binomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("Bernoulli parameter must lie in (0, 1/2], got {0}")]
    InvalidRho(f64),
    #[error("code dimensions must be positive (k = {k}, m = {m})")]
    InvalidDimensions { k: usize, m: usize },
    #[error("row weight {w} must satisfy 1 <= w <= m = {m}")]
    InvalidRowWeight { w: usize, m: usize },
    #[error("truncation weight {max} exceeds k = {k}")]
    InvalidTruncation { max: usize, k: usize },
    #[error("code header: {0}")]
    Header(String),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

fn check_rho(rho: f64) -> Result<(), EnsembleError> {
    if rho > 0.0 && rho <= 0.5 {
        Ok(())
    } else {
        Err(EnsembleError::InvalidRho(rho))
    }
}

/// Success probability of a parity bit driven by a weight-`omega` message.
pub fn rho_omega<T: Real>(rho: T, omega: u64) -> Result<T, EnsembleError> {
    check_rho(rho.as_f64())?;
    Ok(rho_omega_unchecked(rho, omega))
}

fn rho_omega_unchecked<T: Real>(rho: T, omega: u64) -> T {
    if omega == 0 {
        return T::zero();
    }
    // (1 − (1−2ρ)^ω)/2 written with expm1/ln1p to stay accurate for tiny ρ.
    let w = T::from_u64(omega).expect("omega fits the scalar");
    -(w * (-(T::two() * rho)).ln_1p()).exp_m1() * T::half()
}

/// How a generator matrix was produced; stored in code file headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case")]
pub enum Construction {
    Bernoulli { rho: f64 },
    FixedRowWeight { w: usize },
    Graph,
    Explicit,
}

/// JSON header carried on the first line of a code file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeHeader {
    pub k: usize,
    pub m: usize,
    #[serde(flatten)]
    pub construction: Construction,
    pub seed: Option<u64>,
}

/// Systematic code with generator `[I G]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystematicCode {
    g: BitMatrix,
    row_weights: Vec<usize>,
    col_supports: Vec<Vec<usize>>,
}

impl SystematicCode {
    /// Wrap a `k×m` matrix `G`; `m = 0` gives the uncoded identity map.
    pub fn from_generator(g: BitMatrix) -> Self {
        let row_weights = g.row_weights().into_iter().map(|w| w + 1).collect();
        let col_supports = g.col_supports();
        SystematicCode { g, row_weights, col_supports }
    }

    pub fn k(&self) -> usize {
        self.g.rows()
    }

    pub fn m(&self) -> usize {
        self.g.cols()
    }

    pub fn n(&self) -> usize {
        self.k() + self.m()
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.g
    }

    /// Weights ω_i of the rows of `[I G]` (each at least 1).
    pub fn row_weights(&self) -> &[usize] {
        &self.row_weights
    }

    /// For each parity position, the message positions feeding it.
    pub fn col_supports(&self) -> &[Vec<usize>] {
        &self.col_supports
    }

    /// `k/(k+m)`, reduced.
    pub fn rate(&self) -> Ratio<usize> {
        Ratio::new(self.k(), self.n())
    }

    pub fn parity(&self, u: &BitVec) -> Result<BitVec, EnsembleError> {
        Ok(self.g.mat_vec_mul(u)?)
    }

    /// `(u, u·G)`.
    pub fn encode(&self, u: &BitVec) -> Result<BitVec, EnsembleError> {
        Ok(u.concat(&self.parity(u)?))
    }

    /// Serialise as a JSON header line followed by the matrix text.
    pub fn to_code_text(&self, construction: Construction, seed: Option<u64>) -> String {
        let header = CodeHeader { k: self.k(), m: self.m(), construction, seed };
        let mut s = serde_json::to_string(&header).expect("header serialises");
        s.push('\n');
        s.push_str(&self.g.to_text());
        s
    }

    /// Parse a code file; a bare matrix file (no header line) is accepted too.
    pub fn from_code_text(text: &str) -> Result<(Self, Option<CodeHeader>), EnsembleError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let (first, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
            let header: CodeHeader = serde_json::from_str(first).map_err(|e| EnsembleError::Header(e.to_string()))?;
            let g = BitMatrix::from_text(rest)?;
            if g.rows() != header.k || g.cols() != header.m {
                return Err(EnsembleError::Header(format!(
                    "header says {}x{}, matrix is {}x{}",
                    header.k,
                    header.m,
                    g.rows(),
                    g.cols()
                )));
            }
            Ok((Self::from_generator(g), Some(header)))
        } else {
            Ok((Self::from_generator(BitMatrix::from_text(text)?), None))
        }
    }
}

/// Which Bernoulli sampler fills `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BernoulliSampler {
    /// One uniform draw per entry.
    PerEntry,
    /// Geometric gaps between successive ones in row-major order.
    GeometricSkip,
}

impl BernoulliSampler {
    /// Per-entry sampling, switching to geometric skips for ρ ≤ 0.05.
    pub fn for_rho(rho: f64) -> Self {
        if rho <= 0.05 {
            BernoulliSampler::GeometricSkip
        } else {
            BernoulliSampler::PerEntry
        }
    }
}

/// Fill a `k×m` Bernoulli(ρ) matrix from `rng`.
pub fn sample_bernoulli_matrix<R: Rng>(
    k: usize,
    m: usize,
    rho: f64,
    sampler: BernoulliSampler,
    rng: &mut R,
) -> Result<BitMatrix, EnsembleError> {
    check_rho(rho)?;
    let mut rows = vec![Vec::new(); k];
    match sampler {
        BernoulliSampler::PerEntry => {
            for row in rows.iter_mut() {
                for c in 0..m {
                    if rng.random::<f64>() < rho {
                        row.push(c);
                    }
                }
            }
        }
        BernoulliSampler::GeometricSkip => {
            let total = (k as u64) * (m as u64);
            let log_q = (-rho).ln_1p();
            let mut pos: u64 = 0;
            loop {
                // uniform on (0, 1]
                let u = 1.0 - rng.random::<f64>();
                let gap = (u.ln() / log_q).floor();
                if !gap.is_finite() || gap >= (total - pos) as f64 {
                    break;
                }
                pos += gap as u64;
                rows[(pos / m as u64) as usize].push((pos % m as u64) as usize);
                pos += 1;
                if pos >= total {
                    break;
                }
            }
        }
    }
    Ok(BitMatrix::from_row_supports(k, m, rows)?)
}

/// Sample a systematic BGM code with i.i.d. Bernoulli(ρ) entries in `G`.
pub fn sample_bgm(k: usize, m: usize, rho: f64, seed: u64) -> Result<SystematicCode, EnsembleError> {
    if k == 0 || m == 0 {
        return Err(EnsembleError::InvalidDimensions { k, m });
    }
    let mut rng = rng::seeded(seed);
    let g = sample_bernoulli_matrix(k, m, rho, BernoulliSampler::for_rho(rho), &mut rng)?;
    Ok(SystematicCode::from_generator(g))
}

/// Sample a `G` whose every row has exactly `w` ones at uniformly random
/// distinct columns. Column weights are not constrained.
pub fn sample_fixed_row_weight(k: usize, m: usize, w: usize, seed: u64) -> Result<SystematicCode, EnsembleError> {
    if k == 0 || m == 0 {
        return Err(EnsembleError::InvalidDimensions { k, m });
    }
    if w == 0 || w > m {
        return Err(EnsembleError::InvalidRowWeight { w, m });
    }
    let mut rng = rng::seeded(seed);
    let rows = (0..k)
        .map(|_| {
            let mut cols = index::sample(&mut rng, m, w).into_vec();
            cols.sort_unstable();
            cols
        })
        .collect();
    Ok(SystematicCode::from_generator(BitMatrix::from_row_supports(k, m, rows)?))
}

/// Bernoulli parity-check code `{u : u·G = 0}` with `H = Gᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BpcCode {
    g: BitMatrix,
}

impl BpcCode {
    pub fn from_generator(g: BitMatrix) -> Self {
        BpcCode { g }
    }

    pub fn sample(k: usize, m: usize, rho: f64, seed: u64) -> Result<Self, EnsembleError> {
        Ok(BpcCode { g: sample_bgm(k, m, rho, seed)?.g })
    }

    /// Code length.
    pub fn k(&self) -> usize {
        self.g.rows()
    }

    /// Number of checks.
    pub fn m(&self) -> usize {
        self.g.cols()
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.g
    }

    pub fn parity_check(&self) -> BitMatrix {
        self.g.transpose()
    }

    pub fn contains(&self, u: &BitVec) -> Result<bool, EnsembleError> {
        Ok(self.g.mat_vec_mul(u)?.is_zero())
    }

    /// `(k − m)/k`.
    pub fn design_rate(&self) -> f64 {
        (self.k() as f64 - self.m() as f64) / self.k() as f64
    }

    /// `(k − rank G)/k`.
    pub fn rate(&self) -> f64 {
        (self.k() - self.g.rank()) as f64 / self.k() as f64
    }
}

/// Ensemble-average input-output weight enumerator, truncated in input weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Iowef {
    k: usize,
    m: usize,
    ln_coeffs: Vec<Vec<f64>>,
}

impl Iowef {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_input_weight(&self) -> usize {
        self.ln_coeffs.len() - 1
    }

    /// `ln A_{i,j}` (`-inf` for structural zeros).
    pub fn ln_coefficient(&self, i: usize, j: usize) -> f64 {
        self.ln_coeffs[i][j]
    }

    /// `A_{i,j}`, expected number of codewords with message weight `i` and
    /// parity weight `j`.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.ln_coeffs[i][j].exp()
    }

    /// `ln Σ_{i,j} A_{i,j}` over the stored rows.
    pub fn ln_total(&self) -> f64 {
        let per_row: Vec<f64> = self.ln_coeffs.iter().map(|row| log_sum_exp(row)).collect();
        log_sum_exp(&per_row)
    }
}

/// `A_{ω,j} = C(k,ω) C(m,j) ρ_ω^j (1−ρ_ω)^{m−j}` for `ω ≤ max_input_weight`.
pub fn iowef(k: usize, m: usize, rho: f64, max_input_weight: usize) -> Result<Iowef, EnsembleError> {
    check_rho(rho)?;
    if max_input_weight > k {
        return Err(EnsembleError::InvalidTruncation { max: max_input_weight, k });
    }
    let ln_coeffs = (0..=max_input_weight)
        .map(|w| {
            let p = rho_omega_unchecked(rho, w as u64);
            let ln_ck = ln_binomial(k as u64, w as u64);
            (0..=m)
                .map(|j| {
                    let ones = if j == 0 { 0.0 } else { j as f64 * p.ln() };
                    let zeros = if j == m { 0.0 } else { (m - j) as f64 * (-p).ln_1p() };
                    ln_ck + ln_binomial(m as u64, j as u64) + ones + zeros
                })
                .collect()
        })
        .collect();
    Ok(Iowef { k, m, ln_coeffs })
}

/// Average weight distribution of the BPC ensemble, in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution {
    ln_counts: Vec<f64>,
}

impl WeightDistribution {
    pub fn len(&self) -> usize {
        self.ln_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_counts.is_empty()
    }

    pub fn ln_count(&self, w: usize) -> f64 {
        self.ln_counts[w]
    }

    /// `A_w`, expected number of codewords of weight `w`.
    pub fn count(&self, w: usize) -> f64 {
        self.ln_counts[w].exp()
    }
}

/// `A_ω = C(k,ω)(1−ρ_ω)^m` for `ω ≤ max_weight`.
pub fn bpc_weight_distribution(
    k: usize,
    m: usize,
    rho: f64,
    max_weight: usize,
) -> Result<WeightDistribution, EnsembleError> {
    check_rho(rho)?;
    if max_weight > k {
        return Err(EnsembleError::InvalidTruncation { max: max_weight, k });
    }
    let ln_counts = (0..=max_weight)
        .map(|w| {
            let p: f64 = rho_omega_unchecked(rho, w as u64);
            ln_binomial(k as u64, w as u64) + m as f64 * (-p).ln_1p()
        })
        .collect();
    Ok(WeightDistribution { ln_counts })
}
