//! Bipartite graphs of generator matrices, degree statistics, the bipartite
//! assortativity coefficient and a configuration model that targets a given
//! assortativity by bisection on the exponent of a joint degree law.
//!
//! Variable nodes are the rows of `G` (information bits) and check nodes its
//! columns; the parity half-edges of the systematic normal graph carry no
//! degree information and are left out.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gf2::{BitMatrix, Gf2Error};
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("assortativity is undefined: excess-degree variance is zero")]
    UndefinedAssortativity,
    #[error("stub counts differ: {var} variable stubs, {chk} check stubs")]
    StubImbalance { var: usize, chk: usize },
    #[error("degree {degree} of node {node} exceeds the {available} nodes on the other side")]
    DegreeTooLarge { node: usize, degree: usize, available: usize },
    #[error("edge ({var}, {chk}) is out of range for a {n_var} x {n_chk} graph")]
    NodeOutOfRange { var: usize, chk: usize, n_var: usize, n_chk: usize },
    #[error("parallel edge ({var}, {chk})")]
    ParallelEdge { var: usize, chk: usize },
    #[error("invalid bisection bracket [{a1}, {a2}]")]
    InvalidBracket { a1: f64, a2: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("exponent must be non-negative, got {0}")]
    NegativeExponent(f64),
    #[error("positive assortativity needs as many variable as check nodes ({n_var} != {n_chk})")]
    PositiveTargetUnsupported { n_var: usize, n_chk: usize },
    #[error("stub matching at a = {a} starved {restarts} times in a row")]
    TooManyRestarts { a: f64, restarts: usize },
    #[error("bisection exhausted after {iterations} steps; best r = {best_r} at a = {best_a}")]
    NotConverged { best_r: f64, best_a: f64, iterations: usize },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Simple bipartite graph with sorted neighbour lists on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    var_adj: Vec<Vec<usize>>,
    chk_adj: Vec<Vec<usize>>,
    num_edges: usize,
}

impl BipartiteGraph {
    pub fn from_edges(n_var: usize, n_chk: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut var_adj = vec![Vec::new(); n_var];
        for &(v, c) in edges {
            if v >= n_var || c >= n_chk {
                return Err(GraphError::NodeOutOfRange { var: v, chk: c, n_var, n_chk });
            }
            var_adj[v].push(c);
        }
        for (v, adj) in var_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if let Some(w) = adj.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::ParallelEdge { var: v, chk: w[0] });
            }
        }
        Ok(Self::from_var_adjacency(n_chk, var_adj))
    }

    fn from_var_adjacency(n_chk: usize, var_adj: Vec<Vec<usize>>) -> Self {
        let mut chk_adj = vec![Vec::new(); n_chk];
        for (v, adj) in var_adj.iter().enumerate() {
            for &c in adj {
                chk_adj[c].push(v);
            }
        }
        let num_edges = var_adj.iter().map(Vec::len).sum();
        BipartiteGraph { var_adj, chk_adj, num_edges }
    }

    /// Variable `i` is adjacent to check `j` iff `G[i][j] = 1`.
    pub fn from_generator(g: &BitMatrix) -> Self {
        Self::from_var_adjacency(g.cols(), g.row_supports().to_vec())
    }

    pub fn to_generator(&self) -> BitMatrix {
        BitMatrix::from_row_supports(self.n_var(), self.n_chk(), self.var_adj.clone())
            .expect("adjacency lists are sorted and in range")
    }

    pub fn n_var(&self) -> usize {
        self.var_adj.len()
    }

    pub fn n_chk(&self) -> usize {
        self.chk_adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    pub fn chk_neighbors(&self, c: usize) -> &[usize] {
        &self.chk_adj[c]
    }

    pub fn has_edge(&self, v: usize, c: usize) -> bool {
        self.var_adj[v].binary_search(&c).is_ok()
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        self.var_adj.iter().map(Vec::len).collect()
    }

    pub fn chk_degrees(&self) -> Vec<usize> {
        self.chk_adj.iter().map(Vec::len).collect()
    }

    /// Edges `(var, chk)` in variable-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.var_adj.iter().enumerate().flat_map(|(v, adj)| adj.iter().map(move |&c| (v, c)))
    }
}

/// Row weights and column weights of `g`.
pub fn degree_sequences(g: &BitMatrix) -> (Vec<usize>, Vec<usize>) {
    (g.row_weights(), g.col_weights())
}

/// Degree distributions of a bipartite graph, pooled over both node sides.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats<T> {
    /// `p_j`: fraction of all nodes with degree `j`.
    pub p: BTreeMap<usize, T>,
    /// `q_j = j p_j / Σ j' p_j'`.
    pub q: BTreeMap<usize, T>,
    /// `e_ij`, `i` the variable-end degree and `j` the check-end degree.
    pub e_var_chk: BTreeMap<(usize, usize), T>,
    /// Symmetrised `(e_ij + e_ji)/2`.
    pub e: BTreeMap<(usize, usize), T>,
    pub sigma_q2: T,
}

impl<T: Real> DegreeStats<T> {
    /// `Σ_ij ij(e_ij − q_i q_j)/σ_q²` evaluated from the stored distributions.
    pub fn assortativity(&self) -> Result<T, GraphError> {
        if self.sigma_q2 <= T::zero() {
            return Err(GraphError::UndefinedAssortativity);
        }
        let joint: T = self.e.iter().map(|(&(i, j), &e)| T::of((i * j) as f64) * e).sum();
        let mean: T = self.q.iter().map(|(&j, &q)| T::of(j as f64) * q).sum();
        Ok((joint - mean * mean) / self.sigma_q2)
    }
}

pub fn degree_stats<T: Real>(g: &BipartiteGraph) -> Result<DegreeStats<T>, GraphError> {
    let m = g.num_edges();
    if m == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let (dv, dc) = (g.var_degrees(), g.chk_degrees());
    let n = (dv.len() + dc.len()) as f64;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in dv.iter().chain(&dc) {
        *counts.entry(d).or_default() += 1;
    }
    let stub_total = (2 * m) as f64;
    let p = counts.iter().map(|(&j, &c)| (j, T::of(c as f64 / n))).collect();
    let q: BTreeMap<usize, T> =
        counts.iter().filter(|(&j, _)| j > 0).map(|(&j, &c)| (j, T::of((j * c) as f64 / stub_total))).collect();
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (v, c) in g.edges() {
        *pairs.entry((dv[v], dc[c])).or_default() += 1;
    }
    let e_var_chk: BTreeMap<(usize, usize), T> =
        pairs.iter().map(|(&ij, &c)| (ij, T::of(c as f64 / m as f64))).collect();
    let mut e = BTreeMap::new();
    for (&(i, j), &c) in &pairs {
        let half = T::of(c as f64 / (2 * m) as f64);
        for key in [(i, j), (j, i)] {
            let slot = e.entry(key).or_insert(T::zero());
            *slot = *slot + half;
        }
    }
    let mean: T = q.iter().map(|(&j, &qj)| T::of(j as f64) * qj).sum();
    let second: T = q.iter().map(|(&j, &qj)| T::of((j * j) as f64) * qj).sum();
    let sigma_q2 = (second - mean * mean).max(T::zero());
    Ok(DegreeStats { p, q, e_var_chk, e, sigma_q2 })
}

/// Assortativity from degree power sums. With `S_k = Σ_nodes d^k` and
/// `P = Σ_edges d_v d_c`, `r = (4MP − S₂²)/(2M·S₃ − S₂²)`, evaluated in exact
/// integer arithmetic up to the final division.
pub fn assortativity(g: &BipartiteGraph) -> Result<f64, GraphError> {
    let (dv, dc) = (g.var_degrees(), g.chk_degrees());
    let m = g.num_edges() as i128;
    if m == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let (mut s2, mut s3) = (0i128, 0i128);
    for &d in dv.iter().chain(&dc) {
        let d = d as i128;
        s2 += d * d;
        s3 += d * d * d;
    }
    let p: i128 = g.edges().map(|(v, c)| (dv[v] * dc[c]) as i128).sum();
    let den = 2 * m * s3 - s2 * s2;
    if den == 0 {
        return Err(GraphError::UndefinedAssortativity);
    }
    Ok((4 * m * p - s2 * s2) as f64 / den as f64)
}

/// `|(kv − k̄v) − (kc − k̄c)|^a`, with `0^0 = 1`.
pub fn joint_degree_weight(kv: usize, kc: usize, a: f64, kv_bar: f64, kc_bar: f64) -> Result<f64, GraphError> {
    if a.is_nan() || a < 0.0 {
        return Err(GraphError::NegativeExponent(a));
    }
    Ok(((kv as f64 - kv_bar) - (kc as f64 - kc_bar)).abs().powf(a))
}

/// Acceptance probabilities of the configuration model over the realised
/// degree ranges: weights divided by their maximum and, for assortative
/// targets, complemented.
#[derive(Debug, Clone)]
pub struct JointDegreeLaw {
    dv_min: usize,
    dc_min: usize,
    width: usize,
    table: Vec<f64>,
}

impl JointDegreeLaw {
    pub fn new(d1: &[usize], d2: &[usize], a: f64, complement: bool) -> Result<Self, GraphError> {
        let mean = |d: &[usize]| if d.is_empty() { 0.0 } else { d.iter().sum::<usize>() as f64 / d.len() as f64 };
        let (kv_bar, kc_bar) = (mean(d1), mean(d2));
        let range = |d: &[usize]| (d.iter().copied().min().unwrap_or(0), d.iter().copied().max().unwrap_or(0));
        let ((v0, v1), (c0, c1)) = (range(d1), range(d2));
        let width = c1 - c0 + 1;
        let mut table = Vec::with_capacity((v1 - v0 + 1) * width);
        for kv in v0..=v1 {
            for kc in c0..=c1 {
                table.push(joint_degree_weight(kv, kc, a, kv_bar, kc_bar)?);
            }
        }
        let max = table.iter().copied().fold(0.0, f64::max);
        for w in &mut table {
            // all-zero weights (every degree at its mean) degrade to uniform
            *w = if max > 0.0 { *w / max } else { 1.0 };
            if complement {
                *w = 1.0 - *w;
            }
        }
        Ok(JointDegreeLaw { dv_min: v0, dc_min: c0, width, table })
    }

    #[inline]
    pub fn probability(&self, kv: usize, kc: usize) -> f64 {
        self.table[(kv - self.dv_min) * self.width + (kc - self.dc_min)]
    }
}

/// Parameters of the assortativity-targeted configuration model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigModelParams {
    pub r_star: f64,
    pub epsilon: f64,
    pub a1: f64,
    pub a2: f64,
    /// Consecutive failed stub draws before restarting; `None` means `10·M`.
    #[serde(default)]
    pub t_max: Option<usize>,
    #[serde(default = "default_max_restarts")]
    pub max_restarts: usize,
    #[serde(default = "default_max_bisections")]
    pub max_bisections: usize,
    #[serde(default)]
    pub on_starvation: StarvationPolicy,
    pub seed: u64,
}

fn default_max_restarts() -> usize {
    3
}

fn default_max_bisections() -> usize {
    60
}

impl ConfigModelParams {
    pub fn new(r_star: f64, epsilon: f64, seed: u64) -> Self {
        ConfigModelParams {
            r_star,
            epsilon,
            a1: 0.0,
            a2: 5.0,
            t_max: None,
            max_restarts: default_max_restarts(),
            max_bisections: default_max_bisections(),
            on_starvation: StarvationPolicy::default(),
            seed,
        }
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { t_max: self.t_max, max_restarts: self.max_restarts, on_starvation: self.on_starvation }
    }
}

/// A generated graph and how it was obtained.
#[derive(Debug, Clone)]
pub struct ConfigModelOutcome {
    pub graph: BipartiteGraph,
    pub r_measured: f64,
    pub a_final: f64,
    pub bisections: usize,
    pub restarts: usize,
}

fn validate_degrees(d1: &[usize], d2: &[usize]) -> Result<usize, GraphError> {
    let (s1, s2) = (d1.iter().sum::<usize>(), d2.iter().sum::<usize>());
    if s1 != s2 {
        return Err(GraphError::StubImbalance { var: s1, chk: s2 });
    }
    if let Some((node, &degree)) = d1.iter().enumerate().find(|(_, &d)| d > d2.len()) {
        return Err(GraphError::DegreeTooLarge { node, degree, available: d2.len() });
    }
    if let Some((node, &degree)) = d2.iter().enumerate().find(|(_, &d)| d > d1.len()) {
        return Err(GraphError::DegreeTooLarge { node, degree, available: d1.len() });
    }
    Ok(s1)
}

/// What stub matching does after `t_max` consecutive rejected draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarvationPolicy {
    /// Discard the partial graph and start over.
    Restart,
    /// Finish the remaining stubs by switching: a leftover pair `(v, c)` and
    /// an existing edge `(v', c')` become `(v, c')` and `(v', c)`, accepted
    /// with probability `min(1, P(v,c')P(v',c)/P(v',c'))`. Restarts only if
    /// switching also fails `t_max` times in a row.
    #[default]
    Rewire,
}

/// Limits of a single graph build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Consecutive failed draws before giving up on a pass; `None` means `10·M`.
    pub t_max: Option<usize>,
    pub max_restarts: usize,
    pub on_starvation: StarvationPolicy,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { t_max: None, max_restarts: default_max_restarts(), on_starvation: StarvationPolicy::default() }
    }
}

struct Matching<'a> {
    d1: &'a [usize],
    d2: &'a [usize],
    law: &'a JointDegreeLaw,
    s1: Vec<usize>,
    s2: Vec<usize>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Matching<'_> {
    fn accept(&self, v: usize, c: usize, rng: &mut rng::Rng) -> bool {
        let p = 1.0 - rng.random::<f64>();
        p <= self.law.probability(self.d1[v], self.d2[c])
    }

    fn try_direct(&mut self, rng: &mut rng::Rng) -> bool {
        let i = rng.random_range(0..self.s1.len());
        let j = rng.random_range(0..self.s2.len());
        let (v, c) = (self.s1[i], self.s2[j]);
        if self.adj[v].contains(&c) || !self.accept(v, c, rng) {
            return false;
        }
        self.adj[v].push(c);
        self.edges.push((v, c));
        self.s1.swap_remove(i);
        self.s2.swap_remove(j);
        true
    }

    fn try_switch(&mut self, rng: &mut rng::Rng) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let i = rng.random_range(0..self.s1.len());
        let j = rng.random_range(0..self.s2.len());
        let e = rng.random_range(0..self.edges.len());
        let (v, c) = (self.s1[i], self.s2[j]);
        let (w, d) = self.edges[e];
        if v == w || c == d || self.adj[v].contains(&d) || self.adj[w].contains(&c) {
            return false;
        }
        let prob = |x: usize, y: usize| self.law.probability(self.d1[x], self.d2[y]);
        let ratio = prob(v, d) * prob(w, c) / prob(w, d);
        if 1.0 - rng.random::<f64>() > ratio {
            return false;
        }
        let pos = self.adj[w].iter().position(|&x| x == d).expect("edge is present");
        self.adj[w][pos] = c;
        self.adj[v].push(d);
        self.edges[e] = (v, d);
        self.edges.push((w, c));
        self.s1.swap_remove(i);
        self.s2.swap_remove(j);
        true
    }
}

/// One stub-matching pass; `None` when it starves.
fn match_stubs(
    d1: &[usize],
    d2: &[usize],
    law: &JointDegreeLaw,
    t_max: usize,
    policy: StarvationPolicy,
    rng: &mut rng::Rng,
) -> Option<Vec<Vec<usize>>> {
    let mut st = Matching {
        d1,
        d2,
        law,
        s1: d1.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect(),
        s2: d2.iter().enumerate().flat_map(|(c, &d)| std::iter::repeat_n(c, d)).collect(),
        adj: d1.iter().map(|&d| Vec::with_capacity(d)).collect(),
        edges: Vec::with_capacity(d1.iter().sum()),
    };
    let mut switching = false;
    while !st.s1.is_empty() && !st.s2.is_empty() {
        let mut t = 0;
        loop {
            let done = if switching { st.try_switch(rng) } else { st.try_direct(rng) };
            if done {
                break;
            }
            t += 1;
            if t >= t_max {
                if switching || policy == StarvationPolicy::Restart {
                    return None;
                }
                switching = true;
                t = 0;
            }
        }
    }
    let mut adj = st.adj;
    for a in &mut adj {
        a.sort_unstable();
    }
    Some(adj)
}

/// Build one graph with degree sequences `d1`, `d2` under the law with fixed
/// exponent `a`; returns the graph and the number of restarts it took.
/// `a = 0` without complement is uniform stub matching.
pub fn build_with_exponent(
    d1: &[usize],
    d2: &[usize],
    a: f64,
    complement: bool,
    options: &BuildOptions,
    seed: u64,
) -> Result<(BipartiteGraph, usize), GraphError> {
    let m = validate_degrees(d1, d2)?;
    let law = JointDegreeLaw::new(d1, d2, a, complement)?;
    build_attempts(d1, d2, &law, m, options, seed, 0).map_err(|restarts| GraphError::TooManyRestarts { a, restarts })
}

fn build_attempts(
    d1: &[usize],
    d2: &[usize],
    law: &JointDegreeLaw,
    m: usize,
    options: &BuildOptions,
    seed: u64,
    step: u64,
) -> Result<(BipartiteGraph, usize), usize> {
    let t_max = options.t_max.unwrap_or(10 * m).max(1);
    for restart in 0..=options.max_restarts {
        let mut rng = rng::stream(seed, &[step, restart as u64]);
        if let Some(adj) = match_stubs(d1, d2, law, t_max, options.on_starvation, &mut rng) {
            return Ok((BipartiteGraph::from_var_adjacency(d2.len(), adj), restart));
        }
    }
    Err(options.max_restarts)
}

/// Configuration model with a target assortativity `r*`: bisection on the
/// exponent `a` of the joint degree law, one graph per candidate `a`, until
/// the measured `r` is within `ε` of `r*`.
pub fn configuration_model(
    d1: &[usize],
    d2: &[usize],
    params: &ConfigModelParams,
) -> Result<ConfigModelOutcome, GraphError> {
    let m = validate_degrees(d1, d2)?;
    let (mut a1, mut a2) = (params.a1, params.a2);
    if !(a1.is_finite() && a2.is_finite() && 0.0 <= a1 && a1 < a2) {
        return Err(GraphError::InvalidBracket { a1, a2 });
    }
    if params.epsilon.is_nan() || params.epsilon <= 0.0 {
        return Err(GraphError::InvalidEpsilon(params.epsilon));
    }
    let complement = params.r_star > 0.0;
    if complement && d1.len() != d2.len() {
        return Err(GraphError::PositiveTargetUnsupported { n_var: d1.len(), n_chk: d2.len() });
    }
    let options = params.build_options();
    let mut restarts_total = 0;
    let mut best: Option<(f64, f64)> = None;
    let mut starved_at = None;
    let mut steps = 0;
    while steps < params.max_bisections.max(1) {
        let a = 0.5 * (a1 + a2);
        let law = JointDegreeLaw::new(d1, d2, a, complement)?;
        let built = build_attempts(d1, d2, &law, m, &options, params.seed, steps as u64);
        steps += 1;
        // Starvation means `a` asks for more correlation than the degree
        // sequences can realise: step back toward the neutral end.
        let overshoot = match built {
            Ok((graph, restarts)) => {
                restarts_total += restarts;
                let r = assortativity(&graph)?;
                if best.is_none_or(|(br, _)| (r - params.r_star).abs() < (br - params.r_star).abs()) {
                    best = Some((r, a));
                }
                if (r - params.r_star).abs() <= params.epsilon {
                    return Ok(ConfigModelOutcome {
                        graph,
                        r_measured: r,
                        a_final: a,
                        bisections: steps,
                        restarts: restarts_total,
                    });
                }
                if complement {
                    r > params.r_star
                } else {
                    r < params.r_star
                }
            }
            Err(restarts) => {
                restarts_total += restarts;
                starved_at = Some(a);
                true
            }
        };
        // r decreases with a for both laws; r > r* moves a up.
        if overshoot == complement {
            a1 = a;
        } else {
            a2 = a;
        }
        if a2 - a1 <= f64::EPSILON * a2.abs().max(1.0) {
            break;
        }
    }
    match (best, starved_at) {
        (Some((best_r, best_a)), _) => Err(GraphError::NotConverged { best_r, best_a, iterations: steps }),
        (None, Some(a)) => Err(GraphError::TooManyRestarts { a, restarts: options.max_restarts }),
        (None, None) => unreachable!("every step either builds a graph or starves"),
    }
}

/// Metadata written next to an exported graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub r_measured: Option<f64>,
    pub a_final: Option<f64>,
    pub seed: Option<u64>,
    pub d1_hash: String,
    pub d2_hash: String,
}

/// Hex SHA-256 of a degree sequence written as comma-separated decimals.
pub fn degree_sequence_hash(d: &[usize]) -> String {
    let text = d.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl GraphSidecar {
    pub fn for_graph(g: &BipartiteGraph, a_final: Option<f64>, seed: Option<u64>) -> Self {
        GraphSidecar {
            r_measured: assortativity(g).ok(),
            a_final,
            seed,
            d1_hash: degree_sequence_hash(&g.var_degrees()),
            d2_hash: degree_sequence_hash(&g.chk_degrees()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_bgm;
    use proptest::prelude::*;

    fn complete(a: usize, b: usize) -> BipartiteGraph {
        let edges: Vec<_> = (0..a).flat_map(|v| (0..b).map(move |c| (v, c))).collect();
        BipartiteGraph::from_edges(a, b, &edges).unwrap()
    }

    #[test]
    fn complete_bipartite_stats() {
        let g = complete(2, 2);
        let s = degree_stats::<f64>(&g).unwrap();
        assert_eq!(s.p, BTreeMap::from([(2, 1.0)]));
        assert_eq!(s.e, BTreeMap::from([((2, 2), 1.0)]));
        assert_eq!(s.sigma_q2, 0.0);
        assert_eq!(assortativity(&g), Err(GraphError::UndefinedAssortativity));
        assert_eq!(s.assortativity(), Err(GraphError::UndefinedAssortativity));
    }

    #[test]
    fn star_is_maximally_disassortative() {
        let g = complete(1, 3);
        let s = degree_stats::<f64>(&g).unwrap();
        assert_eq!(s.p, BTreeMap::from([(1, 0.75), (3, 0.25)]));
        assert_eq!(s.q, BTreeMap::from([(1, 0.5), (3, 0.5)]));
        assert_eq!(assortativity(&g).unwrap(), -1.0);
        assert!((s.assortativity().unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn path_stats() {
        let g = BipartiteGraph::from_edges(2, 1, &[(0, 0), (1, 0)]).unwrap();
        let s = degree_stats::<f64>(&g).unwrap();
        assert!((s.p[&1] - 2.0 / 3.0).abs() < 1e-15 && (s.p[&2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.e_var_chk, BTreeMap::from([((1, 2), 1.0)]));
        assert_eq!(s.e, BTreeMap::from([((1, 2), 0.5), ((2, 1), 0.5)]));
    }

    #[test]
    fn empty_and_invalid_graphs() {
        let g = BipartiteGraph::from_edges(3, 2, &[]).unwrap();
        assert_eq!(degree_stats::<f64>(&g), Err(GraphError::EmptyGraph));
        assert_eq!(g.to_generator(), BitMatrix::zeros(3, 2));
        assert!(matches!(BipartiteGraph::from_edges(2, 2, &[(0, 1), (0, 1)]), Err(GraphError::ParallelEdge { .. })));
        assert!(matches!(BipartiteGraph::from_edges(2, 2, &[(2, 1)]), Err(GraphError::NodeOutOfRange { .. })));
    }

    #[test]
    fn generator_round_trip() {
        assert_eq!(complete(2, 2).to_generator(), BitMatrix::from_dense(&[vec![1, 1], vec![1, 1]]).unwrap());
        let code = sample_bgm(60, 40, 0.1, 3).unwrap();
        let g = BipartiteGraph::from_generator(code.generator());
        assert_eq!(&g.to_generator(), code.generator());
        assert_eq!(g.var_degrees(), code.generator().row_weights());
        assert_eq!(g.chk_degrees(), code.generator().col_weights());
    }

    #[test]
    fn joint_degree_weight_examples() {
        assert_eq!(joint_degree_weight(12, 7, 2.6, 10.0, 5.0).unwrap(), 0.0);
        assert_eq!(joint_degree_weight(3, 9, 0.0, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(joint_degree_weight(4, 4, 0.0, 4.0, 4.0).unwrap(), 1.0);
        let w = joint_degree_weight(20, 5, 2.6, 10.24, 10.24).unwrap();
        assert!((w / 15f64.powf(2.6) - 1.0).abs() < 1e-12);
        assert!(joint_degree_weight(1, 2, -0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn law_is_normalised_and_complemented() {
        let d1 = [1, 2, 5];
        let d2 = [4, 4];
        let law = JointDegreeLaw::new(&d1, &d2, 1.5, false).unwrap();
        let co = JointDegreeLaw::new(&d1, &d2, 1.5, true).unwrap();
        let mut max = 0.0f64;
        for kv in 1..=5 {
            let p = law.probability(kv, 4);
            assert!((0.0..=1.0).contains(&p));
            assert!((co.probability(kv, 4) - (1.0 - p)).abs() < 1e-15);
            max = max.max(p);
        }
        assert_eq!(max, 1.0);
    }

    #[test]
    fn stub_validation() {
        let p = ConfigModelParams::new(-0.3, 0.05, 1);
        assert_eq!(
            configuration_model(&[2, 1], &[1, 1], &p).unwrap_err(),
            GraphError::StubImbalance { var: 3, chk: 2 }
        );
        assert!(matches!(
            configuration_model(&[3], &[1, 1, 1, 0], &ConfigModelParams::new(0.3, 0.05, 1)),
            Err(GraphError::PositiveTargetUnsupported { .. })
        ));
        assert!(matches!(
            configuration_model(&[3, 0], &[1, 1], &p),
            Err(GraphError::StubImbalance { .. } | GraphError::DegreeTooLarge { .. })
        ));
        let bad = ConfigModelParams { a1: 2.0, a2: 1.0, ..p.clone() };
        assert!(matches!(configuration_model(&[1], &[1], &bad), Err(GraphError::InvalidBracket { .. })));
        let bad = ConfigModelParams { epsilon: 0.0, ..p };
        assert!(matches!(configuration_model(&[1], &[1], &bad), Err(GraphError::InvalidEpsilon(_))));
    }

    fn bgm_degrees(k: usize, m: usize, rho: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
        degree_sequences(sample_bgm(k, m, rho, seed).unwrap().generator())
    }

    #[test]
    fn neutral_matching_preserves_degrees_and_is_near_zero() {
        let (d1, d2) = bgm_degrees(1024, 1024, 0.01, 11);
        let mut rs = Vec::new();
        for seed in 0..5 {
            let (g, _) = build_with_exponent(&d1, &d2, 0.0, false, &BuildOptions::default(), seed).unwrap();
            assert_eq!(g.var_degrees(), d1);
            assert_eq!(g.chk_degrees(), d2);
            rs.push(assortativity(&g).unwrap());
        }
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        // one graph has ~10⁴ edges; r fluctuates on the order of 1/√M
        assert!(mean.abs() < 0.03, "rs={rs:?}");
    }

    #[test]
    fn generation_is_deterministic() {
        let (d1, d2) = bgm_degrees(200, 200, 0.03, 2);
        let p = ConfigModelParams::new(-0.3, 0.05, 99);
        let a = configuration_model(&d1, &d2, &p).unwrap();
        let b = configuration_model(&d1, &d2, &p).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.r_measured, b.r_measured);
    }

    #[test]
    fn targets_are_met() {
        let (d1, d2) = bgm_degrees(1024, 1024, 0.01, 5);
        for r_star in [-0.5, -0.25, 0.2, 0.5] {
            let out = configuration_model(&d1, &d2, &ConfigModelParams::new(r_star, 0.02, 17)).unwrap();
            assert!((out.r_measured - r_star).abs() <= 0.02, "r*={r_star} got {}", out.r_measured);
            assert_eq!(assortativity(&out.graph).unwrap(), out.r_measured);
            assert_eq!(out.graph.var_degrees(), d1);
            assert_eq!(out.graph.chk_degrees(), d2);
        }
    }

    #[test]
    fn disassortative_response_is_monotone_in_a() {
        let (d1, d2) = bgm_degrees(1024, 1024, 0.01, 8);
        let mean_r = |a: f64| {
            (0..10)
                .map(|s| {
                    assortativity(&build_with_exponent(&d1, &d2, a, false, &BuildOptions::default(), s).unwrap().0)
                        .unwrap()
                })
                .sum::<f64>()
                / 10.0
        };
        let rs: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5].iter().map(|&a| mean_r(a)).collect();
        assert!(rs.windows(2).all(|w| w[1] <= w[0]), "rs={rs:?}");
    }

    #[test]
    fn literal_restart_policy_starves_on_equal_degree_leftovers() {
        // k = m makes the two mean degrees equal, so equal-degree pairs have
        // weight zero and plain restarts cannot place the last stubs.
        let (d1, d2) = bgm_degrees(1024, 1024, 0.01, 5);
        let restart = BuildOptions { on_starvation: StarvationPolicy::Restart, max_restarts: 1, ..Default::default() };
        assert!(matches!(
            build_with_exponent(&d1, &d2, 2.0, false, &restart, 0),
            Err(GraphError::TooManyRestarts { .. })
        ));
        assert!(build_with_exponent(&d1, &d2, 2.0, false, &BuildOptions::default(), 0).is_ok());
    }

    #[test]
    fn sidecar_hashes() {
        assert_eq!(degree_sequence_hash(&[]), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        let g = complete(1, 3);
        let s = GraphSidecar::for_graph(&g, Some(1.5), Some(4));
        assert_eq!(s.r_measured, Some(-1.0));
        assert_eq!(s.d2_hash, degree_sequence_hash(&[1, 1, 1]));
        let back: GraphSidecar = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    fn arb_graph() -> impl Strategy<Value = BipartiteGraph> {
        (1usize..12, 1usize..12).prop_flat_map(|(a, b)| {
            proptest::collection::vec(any::<bool>(), a * b).prop_map(move |bits| {
                let edges: Vec<_> = (0..a * b).filter(|&i| bits[i]).map(|i| (i / b, i % b)).collect();
                BipartiteGraph::from_edges(a, b, &edges).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn r_is_bounded_and_matches_distribution_form(g in arb_graph()) {
            if let Ok(r) = assortativity(&g) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
                let s = degree_stats::<f64>(&g).unwrap();
                prop_assert!((s.assortativity().unwrap() - r).abs() < 1e-9);
            }
            if let Ok(s) = degree_stats::<f64>(&g) {
                for total in [s.p.values().sum::<f64>(), s.q.values().sum::<f64>(), s.e.values().sum::<f64>()] {
                    prop_assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
