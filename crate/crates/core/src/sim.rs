//! Monte Carlo BER/FER campaigns.
//!
//! Trial `t` of sweep point `p` draws everything (message, noise) from the
//! stream `rng::stream(seed, [p, t])`. Trials run in fixed-size batches on the
//! rayon pool and are accumulated in trial order, so the result is the same
//! for any thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{BiosChannel, ChannelError, ChannelKind, ChannelSpec, ParamUnit};
use crate::concat::{
    ConcatConfig, ConcatError, ConcatSchedule, ConcatScheme, ExtendedHammingCode, Interleaver, OuterSpec,
};
use crate::decode::{mld_exhaustive, BpConfig, BpDecoder, DecodeError, MLD_MAX_K};
use crate::ensemble::{sample_bgm, sample_fixed_row_weight, EnsembleError, SystematicCode};
use crate::gf2::BitVec;
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read code file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Concat(#[from] ConcatError),
}

/// Where the code comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CodeSpec {
    Bernoulli {
        k: usize,
        m: usize,
        rho: f64,
        seed: u64,
    },
    FixedRowWeight {
        k: usize,
        m: usize,
        w: usize,
        seed: u64,
    },
    /// Code file as written by `sample-code` or `graphgen`.
    File {
        path: PathBuf,
    },
}

impl CodeSpec {
    pub fn build(&self) -> Result<SystematicCode, SimError> {
        Ok(match self {
            CodeSpec::Bernoulli { k, m, rho, seed } => sample_bgm(*k, *m, *rho, *seed)?,
            CodeSpec::FixedRowWeight { k, m, w, seed } => sample_fixed_row_weight(*k, *m, *w, *seed)?,
            CodeSpec::File { path } => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.clone(), source })?;
                SystematicCode::from_code_text(&text)?.0
            }
        })
    }
}

/// Channel family; the parameter comes from the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepChannel {
    #[serde(rename = "type")]
    pub kind: ChannelKind,
    #[serde(default)]
    pub unit: ParamUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DecoderSpec {
    Bp(#[serde(default)] BpConfig),
    /// Exhaustive maximum likelihood, `k ≤ 24`.
    Mld,
    /// Sign of the systematic channel LLRs.
    Hard,
}

impl Default for DecoderSpec {
    fn default() -> Self {
        DecoderSpec::Bp(BpConfig::default())
    }
}

/// Stop at whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSpec {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopSpec {
    fn default() -> Self {
        StopSpec { min_frame_errors: 100, max_frames: 10_000_000 }
    }
}

fn default_batch() -> u64 {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub channel: SweepChannel,
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub decoder: DecoderSpec,
    pub seed: u64,
    /// Trials per parallel batch; results do not depend on it.
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        validate_run(&self.run_params())
    }

    pub fn run_params(&self) -> RunParams<'_> {
        RunParams {
            channel: self.channel,
            sweep: &self.sweep,
            stop: self.stop,
            seed: self.seed,
            batch_size: self.batch_size,
        }
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serialises").as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MinFrameErrors,
    MaxFrames,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MinFrameErrors => "min_frame_errors",
            StopReason::MaxFrames => "max_frames",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub param: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iters: f64,
    pub elapsed_s: f64,
    pub seed: u64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub k: usize,
    pub points: Vec<PointResult>,
}

/// Channel sweep and stopping rule shared by every campaign.
#[derive(Debug, Clone, Copy)]
pub struct RunParams<'a> {
    pub channel: SweepChannel,
    pub sweep: &'a [f64],
    pub stop: StopSpec,
    pub seed: u64,
    pub batch_size: u64,
}

fn validate_run(p: &RunParams) -> Result<(), SimError> {
    if p.sweep.is_empty() {
        return Err(SimError::Config("`sweep` must list at least one channel parameter".into()));
    }
    if let Some(x) = p.sweep.iter().find(|x| !x.is_finite()) {
        return Err(SimError::Config(format!("sweep value {x} is not finite")));
    }
    if p.stop.min_frame_errors < 1 {
        return Err(SimError::Config("`stop.min_frame_errors` must be at least 1".into()));
    }
    if p.stop.max_frames < 1 {
        return Err(SimError::Config("`stop.max_frames` must be at least 1".into()));
    }
    if p.batch_size < 1 {
        return Err(SimError::Config("`batch_size` must be at least 1".into()));
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Encoder/decoder pair driven by a campaign. `Worker` holds per-thread
/// decoder state.
pub trait Scheme<T: Real>: Sync {
    type Worker: Send;
    /// Number of message bits counted for the BER.
    fn info_len(&self) -> usize;
    fn block_len(&self) -> usize;
    fn worker(&self) -> Self::Worker;
    fn encode(&self, u: &BitVec) -> Result<BitVec, SimError>;
    /// Message decision and iterations spent.
    fn decide(&self, worker: &mut Self::Worker, llr: &[T]) -> Result<(BitVec, usize), SimError>;
}

/// A systematic code with one of the plain decoders.
pub struct CodeScheme<'a> {
    pub code: &'a SystematicCode,
    pub decoder: &'a DecoderSpec,
}

pub enum CodeWorker<T> {
    Bp(Box<BpDecoder<T>>, BpConfig),
    Mld,
    Hard,
}

impl<T: Real> Scheme<T> for CodeScheme<'_> {
    type Worker = CodeWorker<T>;

    fn info_len(&self) -> usize {
        self.code.k()
    }

    fn block_len(&self) -> usize {
        self.code.n()
    }

    fn worker(&self) -> CodeWorker<T> {
        match self.decoder {
            DecoderSpec::Bp(cfg) => CodeWorker::Bp(Box::new(BpDecoder::new(self.code)), *cfg),
            DecoderSpec::Mld => CodeWorker::Mld,
            DecoderSpec::Hard => CodeWorker::Hard,
        }
    }

    fn encode(&self, u: &BitVec) -> Result<BitVec, SimError> {
        Ok(self.code.encode(u)?)
    }

    fn decide(&self, worker: &mut CodeWorker<T>, llr: &[T]) -> Result<(BitVec, usize), SimError> {
        Ok(match worker {
            CodeWorker::Bp(dec, cfg) => {
                let out = dec.decode(llr, cfg)?;
                (out.hard_decision, out.iterations_used)
            }
            CodeWorker::Mld => (mld_exhaustive(self.code, llr)?, 0),
            CodeWorker::Hard => (BitVec::from_bools(llr[..self.code.k()].iter().map(|&l| l < T::zero())), 0),
        })
    }
}

/// Concatenated scheme with its iteration schedule.
pub struct ConcatRun {
    pub scheme: ConcatScheme,
    pub schedule: ConcatSchedule,
}

impl<T: Real> Scheme<T> for ConcatRun {
    type Worker = BpDecoder<T>;

    fn info_len(&self) -> usize {
        self.scheme.info_len()
    }

    fn block_len(&self) -> usize {
        self.scheme.codeword_len()
    }

    fn worker(&self) -> BpDecoder<T> {
        BpDecoder::new(&self.scheme.inner)
    }

    fn encode(&self, u: &BitVec) -> Result<BitVec, SimError> {
        Ok(self.scheme.encode(u)?)
    }

    fn decide(&self, worker: &mut BpDecoder<T>, llr: &[T]) -> Result<(BitVec, usize), SimError> {
        let out = self.scheme.decode(worker, llr, &self.schedule)?;
        Ok((out.info_decision, out.inner_iterations))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Trial {
    bit_errors: u64,
    iterations: u64,
}

fn run_trial<T: Real, S: Scheme<T>>(
    scheme: &S,
    channel: &BiosChannel<T>,
    worker: &mut S::Worker,
    llr: &mut Vec<T>,
    seed: u64,
    point: usize,
    trial: u64,
) -> Result<Trial, SimError> {
    let mut r = rng::stream(seed, &[point as u64, trial]);
    let u = BitVec::from_bools((0..scheme.info_len()).map(|_| r.random::<bool>()));
    let c = scheme.encode(&u)?;
    channel.sample_llrs(&c, &mut r, llr);
    let (decision, iterations) = scheme.decide(worker, llr)?;
    Ok(Trial { bit_errors: decision.distance(&u) as u64, iterations: iterations as u64 })
}

/// Run sweep point `point` until the stopping rule fires.
pub fn run_point<T: Real, S: Scheme<T>>(
    scheme: &S,
    channel: &BiosChannel<T>,
    params: &RunParams,
    point: usize,
) -> Result<PointResult, SimError> {
    let start = Instant::now();
    let (mut frames, mut bit_errors, mut frame_errors, mut iterations) = (0u64, 0u64, 0u64, 0u64);
    let stop = 'outer: loop {
        let end = (frames + params.batch_size).min(params.stop.max_frames);
        let batch: Vec<Trial> = (frames..end)
            .into_par_iter()
            .map_init(
                || (scheme.worker(), Vec::with_capacity(scheme.block_len())),
                |(worker, llr), t| run_trial(scheme, channel, worker, llr, params.seed, point, t),
            )
            .collect::<Result<_, _>>()?;
        for t in batch {
            frames += 1;
            bit_errors += t.bit_errors;
            frame_errors += u64::from(t.bit_errors > 0);
            iterations += t.iterations;
            if frame_errors >= params.stop.min_frame_errors {
                break 'outer StopReason::MinFrameErrors;
            }
        }
        if frames >= params.stop.max_frames {
            break StopReason::MaxFrames;
        }
    };
    let k = scheme.info_len() as f64;
    Ok(PointResult {
        param: params.sweep[point],
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / (frames as f64 * k),
        fer: frame_errors as f64 / frames as f64,
        avg_iters: iterations as f64 / frames as f64,
        elapsed_s: start.elapsed().as_secs_f64(),
        seed: params.seed,
        stop,
    })
}

/// Every sweep point in order; Eb/N0 uses the scheme's overall rate.
pub fn run_sweep<T: Real, S: Scheme<T>>(scheme: &S, params: &RunParams) -> Result<SimResult, SimError> {
    validate_run(params)?;
    let rate = scheme.info_len() as f64 / scheme.block_len() as f64;
    let points = params
        .sweep
        .iter()
        .enumerate()
        .map(|(p, &param)| {
            let spec = ChannelSpec { kind: params.channel.kind, param, unit: params.channel.unit };
            run_point(scheme, &spec.build_with::<T>(param, rate)?, params, p)
        })
        .collect::<Result<_, _>>()?;
    Ok(SimResult { k: scheme.info_len(), points })
}

/// Campaign on an already constructed code.
pub fn run_campaign_on<T: Real>(code: &SystematicCode, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    if matches!(cfg.decoder, DecoderSpec::Mld) && code.k() > MLD_MAX_K {
        return Err(SimError::Config(format!("decoder `mld` supports k ≤ {MLD_MAX_K}, code has k = {}", code.k())));
    }
    run_sweep::<T, _>(&CodeScheme { code, decoder: &cfg.decoder }, &cfg.run_params())
}

pub fn run_campaign<T: Real>(cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    run_campaign_on::<T>(&cfg.code.build()?, cfg)
}

/// Concatenated-system campaign configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcatSimConfig {
    pub concat: ConcatConfig,
    pub channel: SweepChannel,
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub stop: StopSpec,
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ConcatSimConfig {
    pub fn run_params(&self) -> RunParams<'_> {
        RunParams {
            channel: self.channel,
            sweep: &self.sweep,
            stop: self.stop,
            seed: self.seed,
            batch_size: self.batch_size,
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serialises").as_bytes())
    }
}

/// Resolve the outer code, inner code (sampled or read) and interleaver.
pub fn build_concat(cfg: &ConcatConfig) -> Result<ConcatScheme, SimError> {
    let OuterSpec::ExtHamming { r } = cfg.outer;
    let outer = ExtendedHammingCode::new(r)?;
    let inner_spec = &cfg.inner;
    let inner = match (inner_spec.rho, &inner_spec.graph_file) {
        (Some(rho), None) => sample_bgm(inner_spec.k, inner_spec.m, rho, inner_spec.seed)?,
        (None, Some(path)) => CodeSpec::File { path: path.clone() }.build()?,
        _ => return Err(SimError::Config("`inner` needs exactly one of `rho` or `graph_file`".into())),
    };
    if (inner.k(), inner.m()) != (inner_spec.k, inner_spec.m) {
        return Err(SimError::Config(format!(
            "inner code is {}×{} but the config declares k = {}, m = {}",
            inner.k(),
            inner.m(),
            inner_spec.k,
            inner_spec.m
        )));
    }
    let interleaver = Interleaver::random(inner.k(), cfg.interleaver_seed);
    Ok(ConcatScheme::new(outer, cfg.blocks, inner, interleaver)?)
}

pub fn run_concat_campaign<T: Real>(cfg: &ConcatSimConfig) -> Result<SimResult, SimError> {
    let scheme = build_concat(&cfg.concat)?;
    run_sweep::<T, _>(&ConcatRun { scheme, schedule: cfg.concat.schedule() }, &cfg.run_params())
}

/// CSV with a leading `#` line carrying the tool version and config hash.
/// Wall time is included only when `timing` is set, keeping the default
/// output reproducible byte for byte.
pub fn to_csv(result: &SimResult, config_hash: &str, timing: bool) -> String {
    let mut out = format!("# bgmlab {} config-sha256={config_hash}\n", env!("CARGO_PKG_VERSION"));
    out.push_str("param,frames,bit_errors,frame_errors,ber,fer,avg_iters,");
    if timing {
        out.push_str("elapsed_s,");
    }
    out.push_str("seed,stop\n");
    for p in &result.points {
        let _ = write!(
            out,
            "{},{},{},{},{:e},{:e},{},",
            p.param, p.frames, p.bit_errors, p.frame_errors, p.ber, p.fer, p.avg_iters
        );
        if timing {
            let _ = write!(out, "{:.3},", p.elapsed_s);
        }
        let _ = writeln!(out, "{},{}", p.seed, p.stop.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ber_lower_bound;
    use crate::gf2::BitMatrix;

    fn config(code: CodeSpec, kind: ChannelKind, sweep: Vec<f64>, decoder: DecoderSpec) -> SimConfig {
        SimConfig {
            code,
            channel: SweepChannel { kind, unit: ParamUnit::Native },
            sweep,
            stop: StopSpec::default(),
            decoder,
            seed: 11,
            batch_size: 256,
            output: None,
        }
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 64, m: 64, rho: 0.05, seed: 1 },
            ChannelKind::Bsc,
            vec![0.0],
            DecoderSpec::default(),
        );
        cfg.stop.max_frames = 2000;
        let res = run_campaign::<f64>(&cfg).unwrap();
        let p = &res.points[0];
        assert_eq!((p.frames, p.bit_errors, p.frame_errors, p.ber, p.fer), (2000, 0, 0, 0.0, 0.0));
        assert_eq!(p.stop, StopReason::MaxFrames);
    }

    #[test]
    fn uncoded_bsc_hard_decision_matches_p() {
        let code = SystematicCode::from_generator(BitMatrix::zeros(100, 0));
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 100, m: 0, rho: 0.1, seed: 0 },
            ChannelKind::Bsc,
            vec![0.07],
            DecoderSpec::Hard,
        );
        cfg.stop = StopSpec { min_frame_errors: u64::MAX, max_frames: 5000 };
        let p = run_campaign_on::<f64>(&code, &cfg).unwrap().points[0].clone();
        let n = 5000.0_f64 * 100.0;
        assert!((p.ber - 0.07).abs() < 3.0 * (0.07 * 0.93 / n).sqrt(), "{}", p.ber);
        assert_eq!(p.ber, p.bit_errors as f64 / (p.frames as f64 * 100.0));
    }

    #[test]
    fn stops_at_exact_frame_error_count() {
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 32, m: 32, rho: 0.1, seed: 2 },
            ChannelKind::Awgn,
            vec![1.0],
            DecoderSpec::default(),
        );
        cfg.stop.min_frame_errors = 37;
        let p = run_campaign::<f64>(&cfg).unwrap().points[0].clone();
        assert_eq!((p.frame_errors, p.stop), (37, StopReason::MinFrameErrors));
        assert!(p.bit_errors >= p.frame_errors);
    }

    #[test]
    fn identical_across_batch_sizes_and_threads() {
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 48, m: 48, rho: 0.08, seed: 3 },
            ChannelKind::Awgn,
            vec![0.7, 0.8],
            DecoderSpec::default(),
        );
        cfg.stop.min_frame_errors = 25;
        let strip = |mut r: SimResult| {
            r.points.iter_mut().for_each(|p| p.elapsed_s = 0.0);
            r
        };
        let base = strip(run_campaign::<f64>(&cfg).unwrap());
        cfg.batch_size = 7;
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let one = strip(serial.install(|| run_campaign::<f64>(&cfg)).unwrap());
        cfg.batch_size = 256;
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let many = strip(four.install(|| run_campaign::<f64>(&cfg)).unwrap());
        assert_eq!(base, one);
        assert_eq!(base, many);
        assert_eq!(to_csv(&base, &cfg.hash(), false), to_csv(&many, &cfg.hash(), false));
    }

    #[test]
    fn mld_campaign_respects_bound() {
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 6, m: 6, rho: 0.3, seed: 4 },
            ChannelKind::Awgn,
            vec![0.9],
            DecoderSpec::Mld,
        );
        cfg.stop = StopSpec { min_frame_errors: 2000, max_frames: 200_000 };
        let code = cfg.code.build().unwrap();
        let p = run_campaign::<f64>(&cfg).unwrap().points[0].clone();
        let se = (p.ber / (p.frames as f64 * 6.0)).sqrt();
        assert!(ber_lower_bound(&code, 0.9) <= p.ber + 3.0 * se);
    }

    #[test]
    fn validation_messages() {
        let mut cfg =
            config(CodeSpec::Bernoulli { k: 8, m: 8, rho: 0.1, seed: 0 }, ChannelKind::Awgn, vec![], DecoderSpec::Hard);
        assert!(run_campaign::<f64>(&cfg).unwrap_err().to_string().contains("sweep"));
        cfg.sweep = vec![1.0];
        cfg.stop.min_frame_errors = 0;
        assert!(run_campaign::<f64>(&cfg).unwrap_err().to_string().contains("min_frame_errors"));
        cfg.stop.min_frame_errors = 1;
        cfg.code = CodeSpec::Bernoulli { k: 30, m: 8, rho: 0.1, seed: 0 };
        cfg.decoder = DecoderSpec::Mld;
        assert!(run_campaign::<f64>(&cfg).is_err());
    }

    #[test]
    fn config_json_round_trip_and_hash() {
        let text = r#"{
            "code": {"construction": "fixed-row-weight", "k": 1024, "m": 1024, "w": 8, "seed": 5},
            "channel": {"type": "awgn", "unit": "ebn0_db"},
            "sweep": [2.0, 2.5],
            "decoder": {"type": "bp", "max_iterations": 30},
            "seed": 9
        }"#;
        let cfg: SimConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.stop, StopSpec::default());
        assert!(matches!(cfg.decoder, DecoderSpec::Bp(BpConfig { max_iterations: 30, .. })));
        let back: SimConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.hash().len(), 64);
        assert!(serde_json::from_str::<SimConfig>(&text.replace("\"seed\": 9", "\"seed\": 9, \"bogus\": 1")).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut cfg = config(
            CodeSpec::Bernoulli { k: 16, m: 16, rho: 0.1, seed: 0 },
            ChannelKind::Awgn,
            vec![0.5],
            DecoderSpec::default(),
        );
        cfg.stop.max_frames = 10;
        let res = run_campaign::<f32>(&cfg).unwrap();
        let csv = to_csv(&res, &cfg.hash(), false);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# bgmlab ") && lines[0].contains("config-sha256="));
        assert_eq!(lines[1], "param,frames,bit_errors,frame_errors,ber,fer,avg_iters,seed,stop");
        assert_eq!(lines.len(), 3);
        assert!(to_csv(&res, &cfg.hash(), true).lines().nth(1).unwrap().contains("elapsed_s"));
    }

    #[test]
    fn concat_campaign_runs_and_checks_inner_source() {
        let text = r#"{
            "concat": {"outer": {"type": "ext-hamming", "r": 4}, "blocks": 4,
                       "inner": {"k": 64, "m": 64, "rho": 0.06, "seed": 2}, "interleaver_seed": 3, "rounds": 2},
            "channel": {"type": "awgn"},
            "sweep": [0.7],
            "stop": {"min_frame_errors": 10, "max_frames": 300},
            "seed": 4
        }"#;
        let cfg: ConcatSimConfig = serde_json::from_str(text).unwrap();
        let a = run_concat_campaign::<f64>(&cfg).unwrap();
        let b = run_concat_campaign::<f64>(&cfg).unwrap();
        assert_eq!(to_csv(&a, &cfg.hash(), false), to_csv(&b, &cfg.hash(), false));
        assert_eq!(a.k, 44);
        let mut bad = cfg.clone();
        bad.concat.inner.rho = None;
        assert!(run_concat_campaign::<f64>(&bad).unwrap_err().to_string().contains("rho"));
        bad.concat.inner.rho = Some(0.06);
        bad.concat.inner.k = 60;
        assert!(run_concat_campaign::<f64>(&bad).is_err());
    }
}
