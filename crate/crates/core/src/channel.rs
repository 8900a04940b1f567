//! Binary-input output-symmetric memoryless channels.
//!
//! Information quantities are in bits. LLRs are natural-log
//! `ln P(y|0)/P(y|1)`. Every quantity that is an average over the output
//! given input 0 is computed as an expectation of a function of the LLR,
//! which is exact for the discrete channels and uses adaptive Gauss–Hermite
//! quadrature for BPSK-AWGN (where the LLR is Gaussian).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::rho_omega;
use crate::gf2::BitVec;
use crate::scalar::{log_add_exp, Real};
use crate::special::{adaptive_gaussian_expectation, binary_entropy};

/// Stand-in for infinite LLRs, in nats.
pub const DEFAULT_LLR_SATURATION: f64 = 40.0;

/// Agreement required between successive quadrature orders.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("received sequence does not come from a {0} channel")]
    OutputMismatch(&'static str),
    #[error("column weight must be >= 1 and row weight >= 2 (got dc = {dc}, dr = {dr})")]
    InvalidDegrees { dc: usize, dr: usize },
}

/// One channel output symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Output<T> {
    Bit(u8),
    Erasure,
    Real(T),
}

/// A received sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Received<T>(pub Vec<Output<T>>);

/// Per-position log-likelihood ratios `ln P(y|0)/P(y|1)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector<T>(pub Vec<T>);

impl<T> std::ops::Deref for LlrVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Real> LlrVector<T> {
    /// Hard decisions, negative LLR → 1.
    pub fn hard_decision(&self) -> BitVec {
        BitVec::from_bools(self.0.iter().map(|&l| l < T::zero()))
    }

    /// LLRs of a noiseless observation of `c` at magnitude `magnitude`.
    pub fn noiseless(c: &BitVec, magnitude: T) -> Self {
        LlrVector(c.iter().map(|b| if b { -magnitude } else { magnitude }).collect())
    }
}

/// BSC(p), BEC(ε) or BPSK over AWGN with noise standard deviation σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiosChannel<T> {
    Bsc { p: T },
    Bec { eps: T },
    BpskAwgn { sigma: T },
}

/// `σ = √(1/(2R·10^{EbN0/10}))` for unit-energy BPSK at rate `R`.
pub fn sigma_from_ebn0_db(ebn0_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt()
}

/// Inverse of [`sigma_from_ebn0_db`].
pub fn ebn0_db_from_sigma(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

/// Value of `E(p, R)` and the maximising `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPoint<T> {
    pub exponent: T,
    pub gamma: T,
}

impl<T: Real> BiosChannel<T> {
    pub fn bsc(p: T) -> Result<Self, ChannelError> {
        let v = p.as_f64();
        if !(0.0..=1.0).contains(&v) {
            return Err(ChannelError::InvalidParameter { name: "p", value: v, reason: "crossover must lie in [0, 1]" });
        }
        Ok(BiosChannel::Bsc { p })
    }

    pub fn bec(eps: T) -> Result<Self, ChannelError> {
        let v = eps.as_f64();
        if !(0.0..=1.0).contains(&v) {
            return Err(ChannelError::InvalidParameter { name: "eps", value: v, reason: "erasure must lie in [0, 1]" });
        }
        Ok(BiosChannel::Bec { eps })
    }

    pub fn awgn(sigma: T) -> Result<Self, ChannelError> {
        let v = sigma.as_f64();
        if !(v > 0.0 && v.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                name: "sigma",
                value: v,
                reason: "must be positive and finite",
            });
        }
        Ok(BiosChannel::BpskAwgn { sigma })
    }

    pub fn awgn_ebn0_db(ebn0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(ChannelError::InvalidParameter { name: "rate", value: rate, reason: "must lie in (0, 1]" });
        }
        Self::awgn(T::of(sigma_from_ebn0_db(ebn0_db, rate)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            BiosChannel::Bsc { .. } => "bsc",
            BiosChannel::Bec { .. } => "bec",
            BiosChannel::BpskAwgn { .. } => "awgn",
        }
    }

    /// Transition probability (mass or density) `P(y|x)`.
    pub fn transition(&self, y: Output<T>, x: u8) -> T {
        match (*self, y) {
            (BiosChannel::Bsc { p }, Output::Bit(b)) => {
                if b == x {
                    T::one() - p
                } else {
                    p
                }
            }
            (BiosChannel::Bec { eps }, Output::Erasure) => eps,
            (BiosChannel::Bec { eps }, Output::Bit(b)) => {
                if b == x {
                    T::one() - eps
                } else {
                    T::zero()
                }
            }
            (BiosChannel::BpskAwgn { sigma }, Output::Real(y)) => {
                let s = T::one() - T::of(2.0 * f64::from(x));
                let z = (y - s) / sigma;
                (-(z * z) * T::half()).exp() / (sigma * (T::two() * T::PI()).sqrt())
            }
            _ => T::zero(),
        }
    }

    /// Output involution `π` with `P(y|1) = P(π(y)|0)`.
    pub fn involution(&self, y: Output<T>) -> Output<T> {
        match y {
            Output::Bit(b) => Output::Bit(1 - b),
            Output::Erasure => Output::Erasure,
            Output::Real(v) => Output::Real(-v),
        }
    }

    /// Channel output for one input bit.
    pub fn sample_output<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Output<T> {
        match *self {
            BiosChannel::Bsc { p } => {
                let flip = rng.random::<f64>() < p.as_f64();
                Output::Bit(u8::from(bit ^ flip))
            }
            BiosChannel::Bec { eps } => {
                if rng.random::<f64>() < eps.as_f64() {
                    Output::Erasure
                } else {
                    Output::Bit(u8::from(bit))
                }
            }
            BiosChannel::BpskAwgn { sigma } => {
                let s = if bit { -T::one() } else { T::one() };
                let n: f64 = StandardNormal.sample(rng);
                Output::Real(s + sigma * T::of(n))
            }
        }
    }

    /// I.i.d. per-position transmission of `c`.
    pub fn transmit<R: Rng + ?Sized>(&self, c: &BitVec, rng: &mut R) -> Received<T> {
        Received(c.iter().map(|b| self.sample_output(b, rng)).collect())
    }

    /// LLR of one output symbol, saturated at `±saturation`.
    pub fn output_llr(&self, y: Output<T>, saturation: T) -> Result<T, ChannelError> {
        let l = match (*self, y) {
            (BiosChannel::Bsc { p }, Output::Bit(b)) => {
                let mag = ((T::one() - p) / p).ln();
                if b == 0 {
                    mag
                } else {
                    -mag
                }
            }
            (BiosChannel::Bec { .. }, Output::Erasure) => T::zero(),
            (BiosChannel::Bec { .. }, Output::Bit(b)) => {
                if b == 0 {
                    saturation
                } else {
                    -saturation
                }
            }
            (BiosChannel::BpskAwgn { sigma }, Output::Real(v)) => T::two() * v / (sigma * sigma),
            _ => return Err(ChannelError::OutputMismatch(self.name())),
        };
        Ok(if l.is_nan() { T::zero() } else { l.clamp_abs(saturation) })
    }

    pub fn llr(&self, received: &Received<T>) -> Result<LlrVector<T>, ChannelError> {
        self.llr_with_saturation(received, T::of(DEFAULT_LLR_SATURATION))
    }

    pub fn llr_with_saturation(&self, received: &Received<T>, saturation: T) -> Result<LlrVector<T>, ChannelError> {
        received.0.iter().map(|&y| self.output_llr(y, saturation)).collect::<Result<Vec<_>, _>>().map(LlrVector)
    }

    /// LLR of a fresh channel use with input `bit`.
    #[inline]
    pub fn sample_llr<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> T {
        self.output_llr(self.sample_output(bit, rng), T::of(DEFAULT_LLR_SATURATION))
            .expect("sampled output matches the channel")
    }

    /// Transmit `c` and write its LLRs into `out` without intermediate symbols.
    pub fn sample_llrs<R: Rng + ?Sized>(&self, c: &BitVec, rng: &mut R, out: &mut Vec<T>) {
        out.clear();
        out.extend(c.iter().map(|b| self.sample_llr(b, rng)));
    }

    /// `E[f(L) | x = 0]` where `L` is the (unsaturated) output LLR.
    pub fn expect_llr_given_zero(&self, f: impl Fn(T) -> T) -> T {
        match *self {
            BiosChannel::Bsc { p } => {
                let mag = ((T::one() - p) / p).ln();
                let mut acc = (T::one() - p) * f(mag);
                if p > T::zero() {
                    acc = acc + p * f(-mag);
                }
                acc
            }
            BiosChannel::Bec { eps } => {
                let mut acc = eps * f(T::zero());
                if eps < T::one() {
                    acc = acc + (T::one() - eps) * f(T::infinity());
                }
                acc
            }
            BiosChannel::BpskAwgn { sigma } => {
                // L = 2y/σ² with y ~ N(1, σ²)
                let s2 = sigma * sigma;
                adaptive_gaussian_expectation(T::two() / s2, T::two() / sigma, QUADRATURE_TOLERANCE, f)
            }
        }
    }

    /// `I₀(p) = Σ_y P(y|0) log₂(P(y|0)/P(y))` with `P(y) = (1−p)P(y|0) + pP(y|1)`.
    pub fn partial_mutual_information(&self, p: T) -> T {
        if p <= T::zero() {
            return T::zero();
        }
        let (ln_a, ln_b) = ((T::one() - p).ln(), p.ln());
        // P(y)/P(y|0) = (1−p) + p·e^{−L}
        let nats = self.expect_llr_given_zero(|l| -log_add_exp(ln_a, ln_b - l));
        nats * T::LOG2_E()
    }

    /// Capacity `I₀(1/2)`.
    pub fn capacity(&self) -> T {
        self.partial_mutual_information(T::half())
    }

    /// `E₀(p,γ) = −log₂ Σ_y P(y|0)^{1/(1+γ)} [(1−p)P(y|0)^{1/(1+γ)} + pP(y|1)^{1/(1+γ)}]^γ`.
    pub fn e0(&self, p: T, gamma: T) -> T {
        if gamma == T::zero() {
            return T::zero();
        }
        let s = T::one() / (T::one() + gamma);
        let (ln_a, ln_b) = ((T::one() - p).ln(), p.ln());
        // P(y|0)^s [(1−p)P(y|0)^s + pP(y|1)^s]^γ = P(y|0)·[(1−p) + p e^{−sL}]^γ
        let mean = self.expect_llr_given_zero(|l| {
            let inner = if l == T::infinity() { ln_a } else { log_add_exp(ln_a, ln_b - s * l) };
            (gamma * inner).exp()
        });
        -mean.log2()
    }

    /// `E(p,R) = max_{0≤γ≤1} E₀(p,γ) − γR`: a 32-point grid, then golden
    /// section around the best grid point down to `1e-8` in `γ`.
    pub fn partial_error_exponent(&self, p: T, rate: T) -> ExponentPoint<T> {
        let objective = |g: f64| (self.e0(p, T::of(g)) - T::of(g) * rate).as_f64();
        const GRID: usize = 32;
        let grid: Vec<f64> = (0..GRID).map(|i| i as f64 / (GRID - 1) as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&g| objective(g)).collect();
        let best = (0..GRID).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
        let mut lo = grid[best.saturating_sub(1)];
        let mut hi = grid[(best + 1).min(GRID - 1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (objective(x1), objective(x2));
        while hi - lo > 1e-8 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = objective(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = objective(x1);
            }
        }
        let mid = 0.5 * (lo + hi);
        let candidates = [(0.0, 0.0), (grid[best], vals[best]), (mid, objective(mid))];
        let (gamma, value) = candidates.into_iter().fold((0.0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        ExponentPoint { exponent: T::of(value.max(0.0)), gamma: T::of(gamma) }
    }
}

/// Upper bound on the BSC threshold of `(dc, dr)`-regular LDPC codes: the
/// largest `p ∈ (0, 1/2)` with `dr·H(p) < dc·H(ρ_dr(p))`,
/// `ρ_dr(p) = (1 − (1 − 2p)^dr)/2`, located to `1e-9` by bisection.
///
/// Returns `0` when no such `p` exists and `1/2` when the inequality holds on
/// the whole interval.
pub fn ldpc_threshold_bound(dc: usize, dr: usize) -> Result<f64, ChannelError> {
    if dc < 1 || dr < 2 {
        return Err(ChannelError::InvalidDegrees { dc, dr });
    }
    let margin = |p: f64| {
        let rho: f64 = rho_omega(p, dr as u64).expect("p in (0, 1/2]");
        dc as f64 * binary_entropy(rho) - dr as f64 * binary_entropy(p)
    };
    const STEPS: usize = 5000;
    let grid = |i: usize| 0.5 * i as f64 / STEPS as f64;
    let Some(last) = (1..STEPS).rev().find(|&i| margin(grid(i)) > 0.0) else {
        return Ok(0.0);
    };
    if last == STEPS - 1 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (grid(last), grid(last + 1));
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Channel as written in configuration files: `{"type": "bsc"|"bec"|"awgn", "param": x}`.
///
/// For AWGN, `param` is σ unless `unit` is `"ebn0_db"`, in which case it is
/// Eb/N0 in dB and `rate` converts it to σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(rename = "type")]
    pub kind: ChannelKind,
    pub param: f64,
    #[serde(default)]
    pub unit: ParamUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bsc,
    Bec,
    Awgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamUnit {
    #[default]
    Native,
    Sigma,
    #[serde(rename = "ebn0_db")]
    EbN0Db,
}

impl ChannelSpec {
    /// Build the channel with `param` overridden; `rate` is needed for Eb/N0.
    pub fn build_with<T: Real>(&self, param: f64, rate: f64) -> Result<BiosChannel<T>, ChannelError> {
        match (self.kind, self.unit) {
            (ChannelKind::Bsc, _) => BiosChannel::bsc(T::of(param)),
            (ChannelKind::Bec, _) => BiosChannel::bec(T::of(param)),
            (ChannelKind::Awgn, ParamUnit::EbN0Db) => BiosChannel::awgn_ebn0_db(param, rate),
            (ChannelKind::Awgn, _) => BiosChannel::awgn(T::of(param)),
        }
    }

    pub fn build<T: Real>(&self, rate: f64) -> Result<BiosChannel<T>, ChannelError> {
        self.build_with(self.param, rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    type Ch = BiosChannel<f64>;

    fn channels() -> Vec<Ch> {
        vec![Ch::bsc(0.1).unwrap(), Ch::bec(0.4).unwrap(), Ch::awgn(0.8).unwrap()]
    }

    /// Composite Simpson over ±14σ around both means.
    fn simpson_awgn(sigma: f64, intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = (-1.0 - 14.0 * sigma, 1.0 + 14.0 * sigma);
        let h = (b - a) / intervals as f64;
        let mut s = f(a) + f(b);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn symmetry_and_normalisation() {
        for ch in channels() {
            match ch {
                BiosChannel::BpskAwgn { sigma } => {
                    for i in -40..=40 {
                        let y = Output::Real(0.1 * i as f64);
                        assert!((ch.transition(y, 1) - ch.transition(ch.involution(y), 0)).abs() < 1e-15);
                    }
                    for x in 0..2u8 {
                        let mass = simpson_awgn(sigma, 20_000, |y| ch.transition(Output::Real(y), x));
                        assert!((mass - 1.0).abs() < 1e-9, "mass={mass}");
                    }
                }
                _ => {
                    let outs = [Output::Bit(0), Output::Bit(1), Output::Erasure];
                    for y in outs {
                        assert_eq!(ch.transition(y, 1), ch.transition(ch.involution(y), 0));
                    }
                    for x in 0..2u8 {
                        let mass: f64 = outs.iter().map(|&y| ch.transition(y, x)).sum();
                        assert!((mass - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn transmit_examples() {
        let mut rng = rng::seeded(1);
        let c: BitVec = "0110100".parse().unwrap();
        let tiny = Ch::awgn(1e-12).unwrap().transmit(&c, &mut rng);
        for (y, b) in tiny.0.iter().zip(c.iter()) {
            let Output::Real(v) = *y else { panic!() };
            assert!((v - if b { -1.0 } else { 1.0 }).abs() < 1e-10);
        }
        let clean = Ch::bsc(0.0).unwrap().transmit(&c, &mut rng);
        assert_eq!(clean.0, c.iter().map(|b| Output::Bit(u8::from(b))).collect::<Vec<_>>());
        let n = 1_000_000;
        let ch = Ch::bsc(0.1).unwrap();
        let flips = (0..n).filter(|_| ch.sample_output(false, &mut rng) == Output::Bit(1)).count();
        let rate = flips as f64 / n as f64;
        assert!((rate - 0.1).abs() < 3.0 * (0.09 / n as f64).sqrt(), "rate={rate}");
    }

    #[test]
    fn llr_examples() {
        let awgn = Ch::awgn(0.9).unwrap();
        let r = Received(vec![Output::Real(0.0), Output::Real(0.81 / 2.0)]);
        let l = awgn.llr(&r).unwrap();
        assert_eq!(l[0], 0.0);
        assert!((l[1] - 1.0).abs() < 1e-15);
        let bsc = Ch::bsc(0.1).unwrap();
        let l = bsc.llr(&Received(vec![Output::Bit(0), Output::Bit(1)])).unwrap();
        assert!((l[0] - 9f64.ln()).abs() < 1e-12 && (l[0] - 2.1972).abs() < 1e-4);
        assert_eq!(l[1], -l[0]);
        let perfect = Ch::bsc(0.0).unwrap().llr(&Received(vec![Output::Bit(0), Output::Bit(1)])).unwrap();
        assert_eq!(perfect.0, vec![DEFAULT_LLR_SATURATION, -DEFAULT_LLR_SATURATION]);
        let bec = Ch::bec(0.5).unwrap().llr(&Received(vec![Output::Erasure, Output::Bit(1)])).unwrap();
        assert_eq!(bec.0, vec![0.0, -DEFAULT_LLR_SATURATION]);
        assert!(matches!(bsc.llr(&Received(vec![Output::Real(0.3)])), Err(ChannelError::OutputMismatch("bsc"))));
    }

    #[test]
    fn constructors_validate() {
        assert!(Ch::bsc(1.2).is_err());
        assert!(Ch::bec(-0.1).is_err());
        assert!(Ch::awgn(0.0).is_err());
        assert!(Ch::awgn_ebn0_db(1.0, 0.0).is_err());
        let s = sigma_from_ebn0_db(0.0, 0.5);
        assert!((s - 1.0).abs() < 1e-15);
        assert!((ebn0_db_from_sigma(sigma_from_ebn0_db(2.5, 0.5), 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn partial_mutual_information_examples() {
        for ch in channels() {
            assert_eq!(ch.partial_mutual_information(0.0), 0.0);
        }
        let bsc = Ch::bsc(0.11).unwrap();
        assert!((bsc.capacity() - (1.0 - binary_entropy(0.11))).abs() < 1e-12);
        assert!((bsc.capacity() - 0.500_084).abs() < 1e-6);
        assert!((Ch::bec(0.5).unwrap().capacity() - 0.5).abs() < 1e-12);
        assert!((Ch::bec(0.3).unwrap().capacity() - 0.7).abs() < 1e-12);
        assert!((Ch::bsc(0.0).unwrap().capacity() - 1.0).abs() < 1e-12);
        // BSC closed form: I₀(p) = Σ_y P(y|0) log₂ P(y|0)/P(y)
        let (e, p) = (0.11_f64, 0.3_f64);
        let py0 = (1.0 - p) * (1.0 - e) + p * e;
        let py1 = (1.0 - p) * e + p * (1.0 - e);
        let want = (1.0 - e) * ((1.0 - e) / py0).log2() + e * (e / py1).log2();
        assert!((bsc.partial_mutual_information(p) - want).abs() < 1e-12);
    }

    #[test]
    fn awgn_capacity_agrees_with_simpson() {
        let sigma = 0.978_69;
        let ch = Ch::awgn(sigma).unwrap();
        let direct = |intervals| {
            simpson_awgn(sigma, intervals, |y| {
                let p0 = ch.transition(Output::Real(y), 0);
                let p1 = ch.transition(Output::Real(y), 1);
                if p0 == 0.0 {
                    0.0
                } else {
                    p0 * (p0 / (0.5 * p0 + 0.5 * p1)).log2()
                }
            })
        };
        let (coarse, fine) = (direct(4000), direct(8000));
        assert!((coarse - fine).abs() < 1e-6);
        assert!((ch.capacity() - fine).abs() < 1e-6, "gh={} simpson={}", ch.capacity(), fine);
        // rate-1/2 Shannon limit region
        assert!((ch.capacity() - 0.5).abs() < 0.01);
    }

    #[test]
    fn partial_mutual_information_strictly_increasing() {
        for ch in channels() {
            let mut prev = 0.0;
            for i in 1..=50 {
                let v = ch.partial_mutual_information(0.5 * i as f64 / 50.0);
                assert!(v > prev, "{ch:?} at {i}");
                prev = v;
            }
            assert!((prev - ch.capacity()).abs() < 1e-12);
        }
    }

    #[test]
    fn e0_examples() {
        for ch in channels() {
            for p in [0.1, 0.5] {
                assert_eq!(ch.e0(p, 0.0), 0.0);
                let slope = ch.e0(p, 1e-5) / 1e-5;
                let i0 = ch.partial_mutual_information(p);
                assert!((slope - i0).abs() < 1e-3, "{ch:?} p={p}: slope {slope} vs I0 {i0}");
            }
        }
        let eps = 0.1;
        let bsc = Ch::bsc(eps).unwrap();
        let outputs = [[1.0 - eps, eps], [eps, 1.0 - eps]];
        let cutoff = -(outputs.iter().map(|py| (0.5 * py[0].sqrt() + 0.5 * py[1].sqrt()).powi(2)).sum::<f64>()).log2();
        assert!((bsc.e0(0.5, 1.0) - cutoff).abs() < 1e-12);
    }

    #[test]
    fn e0_minus_gamma_r_is_concave() {
        for ch in channels() {
            for r in [0.0, 0.2] {
                let f = |g: f64| ch.e0(0.5, g) - g * r;
                let n = 40;
                for i in 1..n {
                    for j in (i + 1)..n {
                        let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                        let mid = 0.5 * (a + b);
                        assert!(f(mid) >= 0.5 * (f(a) + f(b)) - 1e-10, "{ch:?} r={r} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn partial_error_exponent_examples() {
        let bsc = Ch::bsc(0.1).unwrap();
        let i0 = bsc.partial_mutual_information(0.5);
        assert!(bsc.partial_error_exponent(0.5, 0.9 * i0).exponent > 0.0);
        assert!(bsc.partial_error_exponent(0.5, 1.5 * i0).exponent < 1e-12);
        // R = 0: E₀ increasing in γ, so the optimum sits at γ = 1
        for ch in channels() {
            let vals: Vec<f64> = (0..=20).map(|i| ch.e0(0.3, i as f64 / 20.0)).collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0]));
            let e = ch.partial_error_exponent(0.3, 0.0);
            assert!((e.exponent - ch.e0(0.3, 1.0)).abs() < 1e-9);
            assert!((e.gamma - 1.0).abs() < 1e-6);
        }
        // nonincreasing in R, and never below the γ = 0 value
        for ch in channels() {
            let mut prev = f64::INFINITY;
            for i in 0..=30 {
                let e = ch.partial_error_exponent(0.5, i as f64 * 0.04).exponent;
                assert!(e >= 0.0 && e <= prev + 1e-12);
                prev = e;
            }
        }
    }

    #[test]
    fn exponent_is_positive_below_partial_information() {
        for ch in channels() {
            for p in [0.05, 0.2, 0.5] {
                let i0 = ch.partial_mutual_information(p);
                assert!(ch.partial_error_exponent(p, 0.8 * i0).exponent > 0.0, "{ch:?} p={p}");
            }
        }
    }

    #[test]
    fn llr_distribution_is_symmetric() {
        // Two-sample KS: LLRs for input 0 against negated LLRs for input 1.
        let ch = Ch::awgn(0.9).unwrap();
        let mut rng = rng::seeded(5);
        let n = 1_000_000;
        let mut a: Vec<f64> = (0..n).map(|_| ch.sample_llr(false, &mut rng)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| -ch.sample_llr(true, &mut rng)).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / n as f64);
        }
        // 1% critical value: 1.628·√(2/n)
        assert!(d < 1.628 * (2.0 / n as f64).sqrt(), "ks={d}");
        let bsc = Ch::bsc(0.2).unwrap();
        let n0 = (0..200_000).filter(|_| bsc.sample_llr(false, &mut rng) < 0.0).count() as f64;
        let n1 = (0..200_000).filter(|_| bsc.sample_llr(true, &mut rng) > 0.0).count() as f64;
        assert!((n0 - n1).abs() < 4.0 * (2.0 * 200_000.0 * 0.16f64).sqrt());
    }

    #[test]
    fn threshold_bound_examples() {
        let p = ldpc_threshold_bound(3, 6).unwrap();
        assert!((p - 0.102).abs() <= 0.002, "p={p}");
        let defining = |dc: usize, dr: usize, p: f64| {
            let rho: f64 = rho_omega(p, dr as u64).unwrap();
            (dr as f64) * binary_entropy(p) < dc as f64 * binary_entropy(rho)
        };
        let q = ldpc_threshold_bound(4, 8).unwrap();
        assert!(defining(4, 8, q - 1e-4) && !defining(4, 8, q + 1e-4), "q={q}");
        assert!(q > 0.0 && q < 0.5);
        // dc = dr: H(p) = H(ρ_dr(p)) only at p = 1/2
        let r = ldpc_threshold_bound(5, 5).unwrap();
        assert_eq!(r, 0.5);
        let rho: f64 = rho_omega(r, 5).unwrap();
        assert!((binary_entropy(r) - binary_entropy(rho)).abs() < 1e-12);
        assert!(ldpc_threshold_bound(0, 6).is_err());
        assert!(ldpc_threshold_bound(3, 1).is_err());
    }

    #[test]
    fn spec_parses() {
        let s: ChannelSpec = serde_json::from_str(r#"{"type":"awgn","param":1.0,"unit":"ebn0_db"}"#).unwrap();
        let ch: Ch = s.build(0.5).unwrap();
        assert_eq!(ch, Ch::awgn(sigma_from_ebn0_db(1.0, 0.5)).unwrap());
        let s: ChannelSpec = serde_json::from_str(r#"{"type":"bsc","param":0.05}"#).unwrap();
        assert_eq!(s.build::<f64>(0.5).unwrap(), Ch::bsc(0.05).unwrap());
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"type":"foo","param":1}"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let ch = BiosChannel::<f32>::awgn(0.8).unwrap();
        let c64 = Ch::awgn(0.8).unwrap().capacity();
        assert!((ch.capacity() as f64 - c64).abs() < 1e-5);
    }
}
