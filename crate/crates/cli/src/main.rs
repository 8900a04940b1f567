use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bgmlab_core::bounds::{ber_lower_bound, fer_lower_bound, fer_lower_bound_approx, greedy_orthogonal_list};
use bgmlab_core::channel::{
    ebn0_db_from_sigma, ldpc_threshold_bound, sigma_from_ebn0_db, BiosChannel, ChannelKind, ChannelSpec, ParamUnit,
};
use bgmlab_core::ensemble::{iowef, sample_bgm, sample_fixed_row_weight, Construction, SystematicCode};
use bgmlab_core::graph::{configuration_model, degree_sequences, ConfigModelParams, GraphSidecar, StarvationPolicy};
use bgmlab_core::popdyn::{law_from_ensemble, popdyn_run, EdgeDegreeLaw, PopdynConfig, CSV_HEADER};
use bgmlab_core::sim::{run_campaign, run_concat_campaign, to_csv, ConcatSimConfig, SimConfig};
use bgmlab_core::BitVec;

#[derive(Parser)]
#[command(name = "bgmlab", version, about = "Systematic BGM codes: sampling, decoding, bounds and simulation")]
struct Cli {
    /// Worker threads for Monte Carlo campaigns (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message with a code file: prints (u, uG) as a bit string.
    Encode {
        #[arg(long)]
        code: PathBuf,
        /// File of 0/1 characters; whitespace is ignored.
        #[arg(long)]
        message: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a generator matrix and write it as a code file.
    SampleCode {
        #[command(flatten)]
        code: SampleArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo BER/FER campaign from a JSON config.
    Simulate(CampaignArgs),
    /// Lower bounds on ML BER and FER over BPSK-AWGN.
    Bounds {
        #[command(flatten)]
        source: CodeSource,
        #[command(flatten)]
        grid: NoiseGrid,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ensemble-average input-output weight enumerator.
    Iowef {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rho: f64,
        /// Largest input weight tabulated (default k).
        #[arg(long)]
        max_input_weight: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Partial error exponent E(p, R) over a list of rates.
    Exponent {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Input law P(X = 1).
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Upper bound on the BSC threshold of (dc, dr)-regular LDPC codes.
    Threshold { dc: usize, dr: usize },
    /// Tanner graph with a target degree assortativity.
    Graphgen(GraphgenArgs),
    /// Degree-correlated population dynamics.
    Popdyn(PopdynArgs),
    /// Campaign for extended Hamming + BGM concatenation from a JSON config.
    ConcatSim(CampaignArgs),
}

#[derive(Args)]
#[group(id = "code_source", required = true, multiple = true)]
struct CodeSource {
    /// Code file to read.
    #[arg(long, group = "code_source", conflicts_with_all = ["k", "m", "rho", "w", "seed"])]
    code: Option<PathBuf>,
    #[arg(long, group = "code_source", requires = "m")]
    k: Option<usize>,
    #[arg(long, requires = "k")]
    m: Option<usize>,
    #[arg(long, conflicts_with = "w")]
    rho: Option<f64>,
    /// Fixed row weight of G.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl CodeSource {
    fn load(&self) -> Result<SystematicCode> {
        if let Some(path) = &self.code {
            return read_code(path);
        }
        let (k, m) = (self.k.expect("clap group"), self.m.expect("clap requires"));
        let seed = self.seed.context("sampling a code needs --seed")?;
        SampleArgs { k, m, rho: self.rho, w: self.w, seed }.sample().map(|(c, _)| c)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    /// Bernoulli density of G.
    #[arg(long, required_unless_present = "w", conflicts_with = "w")]
    rho: Option<f64>,
    /// Fixed row weight of G.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    seed: u64,
}

impl SampleArgs {
    fn sample(&self) -> Result<(SystematicCode, Construction)> {
        Ok(match (self.rho, self.w) {
            (Some(rho), None) => (sample_bgm(self.k, self.m, rho, self.seed)?, Construction::Bernoulli { rho }),
            (None, Some(w)) => {
                (sample_fixed_row_weight(self.k, self.m, w, self.seed)?, Construction::FixedRowWeight { w })
            }
            _ => bail!("give exactly one of --rho or --w"),
        })
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct NoiseGrid {
    /// Noise standard deviations.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    /// Eb/N0 values in dB, converted with the code rate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebn0_db: Vec<f64>,
}

#[derive(Args)]
struct CampaignArgs {
    config: PathBuf,
    /// Output CSV (default: the config's `output`, else stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Add a wall-time column (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long, value_enum)]
    channel: ChannelArg,
    /// Crossover (BSC), erasure probability (BEC) or σ (AWGN).
    #[arg(long)]
    param: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Bsc,
    Bec,
    Awgn,
}

impl ChannelArgs {
    fn build(&self) -> Result<BiosChannel<f64>> {
        let kind = match self.channel {
            ChannelArg::Bsc => ChannelKind::Bsc,
            ChannelArg::Bec => ChannelKind::Bec,
            ChannelArg::Awgn => ChannelKind::Awgn,
        };
        Ok(ChannelSpec { kind, param: self.param, unit: ParamUnit::Native }.build(1.0)?)
    }
}

#[derive(Args)]
struct GraphgenArgs {
    /// Variable degree sequence file (integers separated by commas or whitespace).
    #[arg(long, requires = "d2", conflicts_with_all = ["k", "rho"])]
    d1: Option<PathBuf>,
    /// Check degree sequence file.
    #[arg(long, requires = "d1")]
    d2: Option<PathBuf>,
    /// Take the degree sequences of a sampled BGM code instead.
    #[arg(long, requires_all = ["m", "rho", "code_seed"])]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    code_seed: Option<u64>,
    /// Target assortativity r*.
    #[arg(long, allow_hyphen_values = true)]
    r_star: f64,
    #[arg(long, default_value_t = 0.02)]
    epsilon: f64,
    /// Seed of the stub matching.
    #[arg(long)]
    seed: u64,
    /// Restart on starvation instead of finishing by edge switches.
    #[arg(long)]
    restart_on_starvation: bool,
    /// Matrix file; the JSON sidecar goes to `<output>.json`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct PopdynArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Regular LDPC degrees `dv,dc` (checks without channel).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["k", "m", "rho"])]
    regular: Option<Vec<usize>>,
    /// BGM ensemble law from k, m, rho, r*, a.
    #[arg(long, requires_all = ["m", "rho"])]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    r_star: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 100_000)]
    population: usize,
    #[arg(long, default_value_t = 50)]
    iterations: usize,
    #[arg(long)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read_code(path: &Path) -> Result<SystematicCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SystematicCode::from_code_text(&text).with_context(|| format!("parsing {}", path.display()))?.0)
}

fn read_degrees(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad degree {t:?} in {}", path.display())))
        .collect()
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn encode(code: &Path, message: &Path) -> Result<String> {
    let code = read_code(code)?;
    let text = fs::read_to_string(message).with_context(|| format!("reading {}", message.display()))?;
    let bits = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => bail!("message file holds {other:?}; expected 0/1"),
        })
        .collect::<Result<Vec<bool>>>()?;
    let c = code.encode(&BitVec::from_bools(bits))?;
    Ok(format!("{c}\n"))
}

fn bounds(code: &SystematicCode, grid: &NoiseGrid) -> String {
    let rate = code.k() as f64 / code.n() as f64;
    let sigmas: Vec<f64> = if grid.sigma.is_empty() {
        grid.ebn0_db.iter().map(|&db| sigma_from_ebn0_db(db, rate)).collect()
    } else {
        grid.sigma.clone()
    };
    let list = greedy_orthogonal_list(code);
    let mut out = String::from("sigma,ebn0_db,ber_bound,fer_bound,fer_approx\n");
    for s in sigmas {
        let _ = writeln!(
            out,
            "{s},{},{:e},{:e},{:e}",
            ebn0_db_from_sigma(s, rate),
            ber_lower_bound(code, s),
            fer_lower_bound(&list, s),
            fer_lower_bound_approx(code, s)
        );
    }
    out
}

fn iowef_csv(k: usize, m: usize, rho: f64, max_w: Option<usize>) -> Result<String> {
    let table = iowef(k, m, rho, max_w.unwrap_or(k))?;
    let mut out = String::from("i,j,coefficient\n");
    for i in 0..=table.max_input_weight() {
        for j in 0..=m {
            let _ = writeln!(out, "{i},{j},{:e}", table.coefficient(i, j));
        }
    }
    Ok(out)
}

fn exponent_csv(ch: &BiosChannel<f64>, p: f64, rates: &[f64]) -> String {
    let i0 = ch.partial_mutual_information(p);
    let mut out = String::from("rate,exponent,gamma,i0\n");
    for &r in rates {
        let e = ch.partial_error_exponent(p, r);
        let _ = writeln!(out, "{r},{:e},{},{i0}", e.exponent, e.gamma);
    }
    out
}

fn graphgen(args: &GraphgenArgs) -> Result<()> {
    let (d1, d2) = match (&args.d1, &args.d2, args.k) {
        (Some(a), Some(b), None) => (read_degrees(a)?, read_degrees(b)?),
        (None, None, Some(k)) => {
            let (m, rho, seed) = (args.m.expect("clap"), args.rho.expect("clap"), args.code_seed.expect("clap"));
            degree_sequences(sample_bgm(k, m, rho, seed)?.generator())
        }
        _ => bail!("give either --d1/--d2 or --k/--m/--rho/--code-seed"),
    };
    let mut params = ConfigModelParams::new(args.r_star, args.epsilon, args.seed);
    if args.restart_on_starvation {
        params.on_starvation = StarvationPolicy::Restart;
    }
    let outcome = configuration_model(&d1, &d2, &params)?;
    let code = SystematicCode::from_generator(outcome.graph.to_generator());
    fs::write(&args.output, code.to_code_text(Construction::Graph, Some(args.seed)))
        .with_context(|| format!("writing {}", args.output.display()))?;
    let sidecar = GraphSidecar::for_graph(&outcome.graph, Some(outcome.a_final), Some(args.seed));
    let mut json_path = args.output.clone().into_os_string();
    json_path.push(".json");
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", PathBuf::from(&json_path).display()))?;
    eprintln!("r = {:.4} at a = {:.4} after {} bisections", outcome.r_measured, outcome.a_final, outcome.bisections);
    Ok(())
}

fn popdyn(args: &PopdynArgs) -> Result<String> {
    let law = match (&args.regular, args.k) {
        (Some(d), None) => match d[..] {
            [dv, dc] => EdgeDegreeLaw::regular(dv, dc)?,
            _ => bail!("--regular takes two degrees, dv,dc"),
        },
        (None, Some(k)) => law_from_ensemble(k, args.m.expect("clap"), args.rho.expect("clap"), args.r_star, args.a)?,
        _ => bail!("give either --regular dv,dc or --k/--m/--rho"),
    };
    let stats =
        popdyn_run(&args.channel.build()?, &law, &PopdynConfig::new(args.population, args.iterations, args.seed))?;
    let mut out = format!("{CSV_HEADER}\n");
    for s in stats {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    Ok(out)
}

fn campaign(args: &CampaignArgs, concat: bool) -> Result<()> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let (csv, configured) = if concat {
        let cfg: ConcatSimConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
        let res = match args.precision {
            Precision::F64 => run_concat_campaign::<f64>(&cfg)?,
            Precision::F32 => run_concat_campaign::<f32>(&cfg)?,
        };
        (to_csv(&res, &cfg.hash(), args.timing), cfg.output)
    } else {
        let cfg: SimConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
        let res = match args.precision {
            Precision::F64 => run_campaign::<f64>(&cfg)?,
            Precision::F32 => run_campaign::<f32>(&cfg)?,
        };
        (to_csv(&res, &cfg.hash(), args.timing), cfg.output)
    };
    emit(args.output.as_deref().or(configured.as_deref()), &csv)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Encode { code, message, output } => emit(output.as_deref(), &encode(code, message)?),
        Command::SampleCode { code, output } => {
            let (c, construction) = code.sample()?;
            emit(output.as_deref(), &c.to_code_text(construction, Some(code.seed)))
        }
        Command::Simulate(args) => campaign(args, false),
        Command::Bounds { source, grid, output } => emit(output.as_deref(), &bounds(&source.load()?, grid)),
        Command::Iowef { k, m, rho, max_input_weight, output } => {
            emit(output.as_deref(), &iowef_csv(*k, *m, *rho, *max_input_weight)?)
        }
        Command::Exponent { channel, p, rates, output } => {
            emit(output.as_deref(), &exponent_csv(&channel.build()?, *p, rates))
        }
        Command::Threshold { dc, dr } => {
            println!("{:.6}", ldpc_threshold_bound(*dc, *dr)?);
            Ok(())
        }
        Command::Graphgen(args) => graphgen(args),
        Command::Popdyn(args) => emit(args.output.as_deref(), &popdyn(args)?),
        Command::ConcatSim(args) => campaign(args, true),
    }
}
