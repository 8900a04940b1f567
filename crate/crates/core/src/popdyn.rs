//! Population dynamics with degree-correlated edges: sampled density
//! evolution for ensembles whose edge law couples the variable and check
//! degrees at the two ends of an edge.
//!
//! Check-to-variable messages are kept in buckets by the degree of the
//! emitting check, variable-to-check messages by the degree of the emitting
//! variable. A message on an edge of type `(i, j)` from a check depends only
//! on `j` (its other neighbours are drawn from `P(i'|j)`), so bucketing by the
//! emitter's degree carries the full edge-type dependence.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use thiserror::Error;

use crate::channel::BiosChannel;
use crate::graph::joint_degree_weight;
use crate::rng;
use crate::scalar::Real;
use crate::special::ln_binomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PopdynError {
    #[error("population size {0} below the minimum of 1000")]
    PopulationTooSmall(usize),
    #[error("degree support is empty or carries no edges")]
    EmptySupport,
    #[error("invalid probability mass: {0}")]
    InvalidMass(String),
    #[error("invalid ensemble parameter: {0}")]
    InvalidParameter(String),
    #[error("Sinkhorn scaling did not converge (marginal error {0:e})")]
    NotConverged(f64),
}

/// Joint law of the degrees at the two ends of a uniformly chosen edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDegreeLaw {
    /// Variable degrees with node-perspective probabilities (may include 0).
    pub var_nodes: Vec<(usize, f64)>,
    /// Variable degrees `≥ 1` carrying edges.
    pub var_degrees: Vec<usize>,
    pub chk_degrees: Vec<usize>,
    /// `joint[a][b]`: probability that an edge joins a variable of degree
    /// `var_degrees[a]` and a check of degree `chk_degrees[b]`.
    pub joint: Vec<Vec<f64>>,
    /// Checks also see a channel observation (the parity bit of a BGM code).
    pub check_has_channel: bool,
}

impl EdgeDegreeLaw {
    /// `(dv, dc)`-regular LDPC law with channel-free checks.
    pub fn regular(dv: usize, dc: usize) -> Result<Self, PopdynError> {
        Self::from_marginals(&[(dv, 1.0)], &[(dc, 1.0)], |_, _| 1.0, false)
    }

    /// Edge law `e_ij ∝ w(i, j) x_i y_j`, with `x`, `y` fitted by Sinkhorn
    /// scaling so both edge-perspective marginals are preserved.
    pub fn from_marginals(
        var_nodes: &[(usize, f64)],
        chk_nodes: &[(usize, f64)],
        weight: impl Fn(usize, usize) -> f64,
        check_has_channel: bool,
    ) -> Result<Self, PopdynError> {
        for &(_, p) in var_nodes.iter().chain(chk_nodes) {
            if !(p.is_finite() && p >= 0.0) {
                return Err(PopdynError::InvalidMass(format!("{p}")));
            }
        }
        let var_total: f64 = var_nodes.iter().map(|&(_, p)| p).sum();
        if var_total <= 0.0 {
            return Err(PopdynError::EmptySupport);
        }
        let var_nodes: Vec<(usize, f64)> = var_nodes.iter().map(|&(d, p)| (d, p / var_total)).collect();
        let (var_degrees, lambda) = edge_marginal(&var_nodes)?;
        let (chk_degrees, rho) = edge_marginal(chk_nodes)?;
        let w: Vec<Vec<f64>> =
            var_degrees.iter().map(|&i| chk_degrees.iter().map(|&j| weight(i, j)).collect()).collect();
        let joint = sinkhorn(&w, &lambda, &rho)?;
        Ok(EdgeDegreeLaw { var_nodes, var_degrees, chk_degrees, joint, check_has_channel })
    }

    pub fn var_edge_marginal(&self) -> Vec<f64> {
        self.joint.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn chk_edge_marginal(&self) -> Vec<f64> {
        (0..self.chk_degrees.len()).map(|b| self.joint.iter().map(|row| row[b]).sum()).collect()
    }

    /// `P(check degree | variable degree)`, one row per variable degree.
    pub fn chk_given_var(&self) -> Vec<Vec<f64>> {
        self.joint
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|&x| x / s).collect()
            })
            .collect()
    }

    /// `P(variable degree | check degree)`, one row per check degree.
    pub fn var_given_chk(&self) -> Vec<Vec<f64>> {
        let col = self.chk_edge_marginal();
        (0..self.chk_degrees.len()).map(|b| self.joint.iter().map(|row| row[b] / col[b]).collect()).collect()
    }

    /// Pearson correlation of the end degrees of a random edge; negative for
    /// disassortative laws.
    pub fn degree_correlation(&self) -> f64 {
        let (lam, rho) = (self.var_edge_marginal(), self.chk_edge_marginal());
        let mean = |d: &[usize], p: &[f64]| d.iter().zip(p).map(|(&k, &q)| k as f64 * q).sum::<f64>();
        let (mv, mc) = (mean(&self.var_degrees, &lam), mean(&self.chk_degrees, &rho));
        let var =
            |d: &[usize], p: &[f64], m: f64| d.iter().zip(p).map(|(&k, &q)| (k as f64 - m).powi(2) * q).sum::<f64>();
        let (sv, sc) = (var(&self.var_degrees, &lam, mv), var(&self.chk_degrees, &rho, mc));
        if sv == 0.0 || sc == 0.0 {
            return 0.0;
        }
        let mut cov = 0.0;
        for (a, &i) in self.var_degrees.iter().enumerate() {
            for (b, &j) in self.chk_degrees.iter().enumerate() {
                cov += self.joint[a][b] * (i as f64 - mv) * (j as f64 - mc);
            }
        }
        cov / (sv * sc).sqrt()
    }
}

/// Edge-perspective marginal `d·P(d) / E[d]` over the degrees `≥ 1`.
fn edge_marginal(nodes: &[(usize, f64)]) -> Result<(Vec<usize>, Vec<f64>), PopdynError> {
    let mut pairs: Vec<(usize, f64)> =
        nodes.iter().filter(|&&(d, p)| d > 0 && p > 0.0).map(|&(d, p)| (d, d as f64 * p)).collect();
    pairs.sort_by_key(|&(d, _)| d);
    pairs.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    let total: f64 = pairs.iter().map(|&(_, x)| x).sum();
    if pairs.is_empty() || total <= 0.0 {
        return Err(PopdynError::EmptySupport);
    }
    Ok(pairs.into_iter().map(|(d, x)| (d, x / total)).unzip())
}

fn sinkhorn(w: &[Vec<f64>], row: &[f64], col: &[f64]) -> Result<Vec<Vec<f64>>, PopdynError> {
    let mut x = vec![1.0; row.len()];
    let mut y = vec![1.0; col.len()];
    let mut err = f64::INFINITY;
    for _ in 0..10_000 {
        for (a, xa) in x.iter_mut().enumerate() {
            let s: f64 = w[a].iter().zip(&y).map(|(&wab, &yb)| wab * yb).sum();
            if s <= 0.0 {
                return Err(PopdynError::EmptySupport);
            }
            *xa = row[a] / s;
        }
        for (b, yb) in y.iter_mut().enumerate() {
            let s: f64 = w.iter().zip(&x).map(|(wa, &xa)| wa[b] * xa).sum();
            if s <= 0.0 {
                return Err(PopdynError::EmptySupport);
            }
            *yb = col[b] / s;
        }
        // columns are exact after the y step; measure the rows
        err = (0..row.len())
            .map(|a| (w[a].iter().zip(&y).map(|(&wab, &yb)| wab * yb).sum::<f64>() * x[a] - row[a]).abs())
            .fold(0.0, f64::max);
        if err < 1e-14 {
            break;
        }
    }
    if err > 1e-9 {
        return Err(PopdynError::NotConverged(err));
    }
    Ok(w.iter().enumerate().map(|(a, wa)| wa.iter().zip(&y).map(|(&wab, &yb)| wab * x[a] * yb).collect()).collect())
}

/// `Binomial(n, p)` truncated to the outcomes of mass at least `1e-9`.
fn truncated_binomial(n: usize, p: f64) -> Vec<(usize, f64)> {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .filter_map(|d| {
            let mass = (ln_binomial(n as u64, d as u64) + d as f64 * lp + (n - d) as f64 * lq).exp();
            (mass >= 1e-9).then_some((d, mass))
        })
        .collect()
}

/// Edge law of a BGM ensemble with `k × m` generator density `rho`: variable
/// degrees `Binomial(m, ρ)`, check degrees `Binomial(k, ρ)`, and the parity
/// bit's channel attached to every check (the `+1` of the check degree). The
/// joint is reweighted by `P(k_v, k_c, a)` normalised over the truncated
/// degree box, complemented when `r_star > 0` as in the graph construction.
pub fn law_from_ensemble(k: usize, m: usize, rho: f64, r_star: f64, a: f64) -> Result<EdgeDegreeLaw, PopdynError> {
    if k == 0 || m == 0 || !(rho > 0.0 && rho < 1.0) {
        return Err(PopdynError::InvalidParameter(format!("k={k}, m={m}, rho={rho}")));
    }
    if a.is_nan() || a < 0.0 || !r_star.is_finite() {
        return Err(PopdynError::InvalidParameter(format!("a={a}, r*={r_star}")));
    }
    let (vars, chks) = (truncated_binomial(m, rho), truncated_binomial(k, rho));
    let (kv_bar, kc_bar) = (m as f64 * rho, k as f64 * rho);
    let raw = |i: usize, j: usize| joint_degree_weight(i, j, a, kv_bar, kc_bar).expect("a checked");
    let max = vars
        .iter()
        .filter(|&&(i, _)| i > 0)
        .flat_map(|&(i, _)| chks.iter().filter(|&&(j, _)| j > 0).map(move |&(j, _)| raw(i, j)))
        .fold(0.0, f64::max);
    let complement = r_star > 0.0;
    let weight = |i: usize, j: usize| {
        let w = if max > 0.0 { raw(i, j) / max } else { 1.0 };
        if complement {
            1.0 - w
        } else {
            w
        }
    };
    EdgeDegreeLaw::from_marginals(&vars, &chks, weight, true)
}

/// Run parameters. `llr_clamp` bounds every message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopdynConfig {
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
    pub llr_clamp: f64,
}

impl PopdynConfig {
    pub fn new(population: usize, iterations: usize, seed: u64) -> Self {
        PopdynConfig { population, iterations, seed, llr_clamp: 40.0 }
    }
}

/// Statistics after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    /// Fraction of variable posteriors with the wrong sign (ties count ½).
    pub ber: f64,
    /// Mean and variance of the check-to-variable population.
    pub mean_llr: f64,
    pub var_llr: f64,
    /// Fraction of variable-to-check messages equal to 0 (BEC erasures).
    pub v2c_erasure: f64,
}

pub const CSV_HEADER: &str = "iteration,ber,mean_llr,var_llr,v2c_erasure";

impl IterationStats {
    pub fn csv_row(&self) -> String {
        format!("{},{:e},{:e},{:e},{:e}", self.iteration, self.ber, self.mean_llr, self.var_llr, self.v2c_erasure)
    }
}

/// Bucket sizes proportional to `mass`, at least 100 each.
fn bucket_sizes(mass: &[f64], n: usize) -> Vec<usize> {
    mass.iter().map(|&p| ((p * n as f64).round() as usize).max(100)).collect()
}

fn draw<T: Copy, R: Rng + ?Sized>(buckets: &[Vec<T>], which: usize, rng: &mut R) -> T {
    let b = &buckets[which];
    b[rng.random_range(0..b.len())]
}

/// Evolve the populations for `cfg.iterations` rounds under the all-zero
/// codeword. Each iteration refreshes every variable-to-check bucket, then
/// every check-to-variable bucket, then estimates the bit error rate from
/// `N` variable posteriors with node-perspective degrees.
pub fn popdyn_run<T: Real>(
    channel: &BiosChannel<T>,
    law: &EdgeDegreeLaw,
    cfg: &PopdynConfig,
) -> Result<Vec<IterationStats>, PopdynError> {
    if cfg.population < 1000 {
        return Err(PopdynError::PopulationTooSmall(cfg.population));
    }
    let mut r = rng::seeded(cfg.seed);
    let clamp = T::of(cfg.llr_clamp);
    let weighted = |p: &[f64]| WeightedIndex::new(p).map_err(|e| PopdynError::InvalidMass(e.to_string()));
    let chk_given_var = law.chk_given_var().iter().map(|p| weighted(p)).collect::<Result<Vec<_>, _>>()?;
    let var_given_chk = law.var_given_chk().iter().map(|p| weighted(p)).collect::<Result<Vec<_>, _>>()?;
    let node_degree = weighted(&law.var_nodes.iter().map(|&(_, p)| p).collect::<Vec<_>>())?;
    // node degree -> bucket index among the edge-carrying degrees
    let node_bucket: Vec<Option<usize>> =
        law.var_nodes.iter().map(|&(d, _)| law.var_degrees.iter().position(|&x| x == d)).collect();

    let mut c2v: Vec<Vec<T>> =
        bucket_sizes(&law.chk_edge_marginal(), cfg.population).into_iter().map(|s| vec![T::zero(); s]).collect();
    let mut v2c: Vec<Vec<T>> =
        bucket_sizes(&law.var_edge_marginal(), cfg.population).into_iter().map(|s| vec![T::zero(); s]).collect();
    let mut stats = Vec::with_capacity(cfg.iterations);
    for iteration in 1..=cfg.iterations {
        let mut erased = 0usize;
        let mut total = 0usize;
        for (a, bucket) in v2c.iter_mut().enumerate() {
            let deg = law.var_degrees[a];
            for slot in bucket.iter_mut() {
                let mut sum = channel.sample_llr(false, &mut r);
                for _ in 1..deg {
                    sum = sum + draw(&c2v, chk_given_var[a].sample(&mut r), &mut r);
                }
                *slot = sum.clamp_abs(clamp);
                erased += usize::from(*slot == T::zero());
            }
            total += bucket.len();
        }
        let mut next: Vec<Vec<T>> = Vec::with_capacity(c2v.len());
        for (b, bucket) in c2v.iter().enumerate() {
            let deg = law.chk_degrees[b];
            let fresh = (0..bucket.len())
                .map(|_| {
                    let mut prod = if law.check_has_channel {
                        (channel.sample_llr(false, &mut r) * T::half()).tanh()
                    } else {
                        T::one()
                    };
                    for _ in 1..deg {
                        prod = prod * (draw(&v2c, var_given_chk[b].sample(&mut r), &mut r) * T::half()).tanh();
                    }
                    atanh2(prod, clamp)
                })
                .collect();
            next.push(fresh);
        }
        c2v = next;

        let mut errors = 0.0;
        for _ in 0..cfg.population {
            let idx = node_degree.sample(&mut r);
            let mut post = channel.sample_llr(false, &mut r);
            if let Some(a) = node_bucket[idx] {
                for _ in 0..law.var_degrees[a] {
                    post = post + draw(&c2v, chk_given_var[a].sample(&mut r), &mut r);
                }
            }
            errors += if post < T::zero() {
                1.0
            } else if post == T::zero() {
                0.5
            } else {
                0.0
            };
        }
        let count = c2v.iter().map(Vec::len).sum::<usize>() as f64;
        let mean = c2v.iter().flatten().map(|x| x.as_f64()).sum::<f64>() / count;
        let var = c2v.iter().flatten().map(|x| (x.as_f64() - mean).powi(2)).sum::<f64>() / count;
        stats.push(IterationStats {
            iteration,
            ber: errors / cfg.population as f64,
            mean_llr: mean,
            var_llr: var,
            v2c_erasure: erased as f64 / total as f64,
        });
    }
    Ok(stats)
}

/// `2 atanh(x)`, saturated at `±clamp`.
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

/// Density evolution of the `(dv, dc)`-regular ensemble on the BEC:
/// `x_0 = ε`, `x_{t+1} = ε (1 − (1 − x_t)^{dc−1})^{dv−1}`.
pub fn bec_regular_de(eps: f64, dv: usize, dc: usize, iterations: usize) -> Vec<f64> {
    let mut x = vec![eps];
    for t in 0..iterations {
        x.push(eps * (1.0 - (1.0 - x[t]).powi(dc as i32 - 1)).powi(dv as i32 - 1));
    }
    x
}
