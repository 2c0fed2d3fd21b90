//! One function per subcommand; each returns a finished [`Report`].

use std::f64::consts::LN_2;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use scramble_core::circuits::{build_random_all_to_all, execute, run_layers, CircuitFamily, CircuitProgram};
use scramble_core::dense::{run_decoder, DecoderCircuit, DecoderSetup, NoiseModel};
use scramble_core::experiments::{page_curve, rmt_mean_deficit, rmt_rank_prob, sample_subset};
use scramble_core::graphstate::{graph_entropy_bits, hypercube, page_scrambling_fraction};
use scramble_core::haydenpreskill::{channel_state, mutual_info_a_rb, Placement};
use scramble_core::stats::{binomial_stderr, Histogram, Mean};
use scramble_core::{Basis, SeedStream, StabilizerTableau};

use crate::report::{Format, Report};

/// Largest register any tableau experiment will build.
pub const MAX_TABLEAU_QUBITS: usize = 1024;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values; exit code 2.
    Config(String),
    /// Request exceeds a simulator limit; exit code 3.
    Resource(String),
    /// Anything else, including failed output and engine disagreement.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Resource(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<scramble_core::Error> for CliError {
    fn from(e: scramble_core::Error) -> Self {
        match e {
            scramble_core::Error::ResourceCap(_) => CliError::Resource(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Master seed; every random draw derives from it.
    #[arg(long)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_family(s: &str) -> std::result::Result<CircuitFamily, String> {
    CircuitFamily::parse(s).map_err(|e| e.to_string())
}

fn parse_basis(s: &str) -> std::result::Result<Basis, String> {
    match s {
        "x" => Ok(Basis::X),
        "y" => Ok(Basis::Y),
        "z" => Ok(Basis::Z),
        other => Err(format!("unknown basis {other:?}, expected x, y or z")),
    }
}

fn parse_placement(s: &str) -> std::result::Result<Placement, String> {
    match s {
        "contiguous" => Ok(Placement::Contiguous),
        "random" => Ok(Placement::Random),
        other => Err(format!("unknown placement {other:?}")),
    }
}

fn parse_noise(s: &str) -> std::result::Result<NoiseModel, String> {
    match s {
        "depolarizing" => Ok(NoiseModel::Depolarizing),
        "dephasing" => Ok(NoiseModel::Dephasing),
        other => Err(format!("unknown noise model {other:?}")),
    }
}

fn parse_toggle(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn config<T: Serialize>(subcommand: &str, args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    v.as_object_mut().expect("arguments are a struct").insert("subcommand".into(), subcommand.into());
    v
}

/// `log2 n` for a power of two `n >= 4` within the tableau budget.
fn log2_width(n: usize) -> Result<usize> {
    if !n.is_power_of_two() || n < 4 {
        return Err(CliError::Config(format!("N={n} must be a power of two >= 4")));
    }
    if n > MAX_TABLEAU_QUBITS {
        return Err(CliError::Resource(format!("N={n} exceeds the limit {MAX_TABLEAU_QUBITS}")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn check_sizes(sizes: &[usize], lo: usize, hi: usize, what: &str) -> Result<()> {
    match sizes.iter().find(|&&s| s < lo || s > hi) {
        Some(s) => Err(CliError::Config(format!("{what}={s} outside {lo}..={hi}"))),
        None => Ok(()),
    }
}

/// Family member on `n` sites. Deterministic families are cut to `depth`
/// interaction layers; random ones are drawn with that depth.
fn build_circuit(
    family: CircuitFamily,
    n: usize,
    depth: Option<usize>,
    seeds: &SeedStream,
) -> Result<CircuitProgram> {
    let m = log2_width(n)?;
    let mut rng = seeds.child(&format!("circuit-N{n}")).rng(0);
    let program = family.build(m, depth, &mut rng)?;
    match (family, depth) {
        (CircuitFamily::Es | CircuitFamily::Qm, Some(t)) => Ok(program.truncated(t)?),
        _ => Ok(program),
    }
}

// ---------------------------------------------------------------- page-curve

#[derive(Args, Debug, Clone, Serialize)]
pub struct PageCurveArgs {
    #[arg(long = "N", default_value_t = 16)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, default_value = "es", value_parser = parse_family)]
    pub circuit: CircuitFamily,
    /// Interaction layers; the full circuit (or `2 log2 N` for random
    /// families) when absent.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Subsystem sizes; `1..=N/2` when absent.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
    #[arg(long, default_value = "z", value_parser = parse_basis)]
    pub basis: Basis,
    /// Final Page curves at N = 128 and 256 instead of `--N`.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn cmd_page_curve(args: &PageCurveArgs) -> Result<Report> {
    let widths = if args.full { vec![128, 256] } else { vec![args.n] };
    let seeds = SeedStream::new(args.common.seed, "page-curve");
    let mut report = Report::new(
        config("page-curve", args),
        &[
            "N",
            "circuit",
            "t",
            "size_A",
            "mean_S_bits",
            "mean_deficit_nats",
            "stderr_deficit_nats",
            "rmt_deficit_nats",
            "samples",
            "seed",
        ],
    );
    for n in widths {
        let program = build_circuit(args.circuit, n, args.depth, &seeds)?;
        let sizes: Vec<usize> = if args.sizes.is_empty() { (1..=n / 2).collect() } else { args.sizes.clone() };
        check_sizes(&sizes, 1, n, "|A|")?;
        let total = program.depth();
        let ends = program.interaction_ends();
        let sites: Vec<usize> = (0..n).collect();
        let mut state = StabilizerTableau::new_polarized(n, args.basis)?;
        for t in 0..=total {
            if t > 0 {
                let end = if t == total { program.layers().len() } else { ends[t] };
                run_layers(&program, ends[t - 1]..end, &mut state, &sites)?;
            }
            if args.full && t < total {
                continue;
            }
            let stats = page_curve(&state, &sizes, args.samples, &seeds.child(&format!("N{n}-t{t}")))?;
            for row in &stats.rows {
                let rmt = rmt_mean_deficit(n, row.size).ok().map(|d| d.closed_form_nats);
                report.push(vec![
                    n.into(),
                    args.circuit.name().into(),
                    t.into(),
                    row.size.into(),
                    row.entropy.mean().into(),
                    (row.deficit.mean() * LN_2).into(),
                    (row.deficit.stderr() * LN_2).into(),
                    rmt.into(),
                    row.samples().into(),
                    args.common.seed.into(),
                ]);
            }
        }
    }
    Ok(report)
}

// ----------------------------------------------------------------- hypercube

#[derive(Args, Debug, Clone, Serialize)]
pub struct HypercubeArgs {
    /// Hypercube dimension; `N = 2^m` vertices.
    #[arg(long, default_value_t = 7)]
    pub m: usize,
    /// Largest `|A|`; `N/8` when absent.
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Registers up to this size are cross-checked on every bipartition.
const EXHAUSTIVE_CROSSCHECK_QUBITS: usize = 16;

pub fn cmd_hypercube(args: &HypercubeArgs) -> Result<Report> {
    if args.m < 2 || args.m > 10 {
        return Err(CliError::Config(format!("m={} outside 2..=10", args.m)));
    }
    let n = 1usize << args.m;
    let max_size = args.max_size.unwrap_or((n / 8).max(1));
    check_sizes(&[max_size], 1, n, "max |A|")?;
    let seeds = SeedStream::new(args.common.seed, "hypercube");
    let graph = hypercube(args.m)?;
    let mut state = StabilizerTableau::new_polarized(n, Basis::X)?;
    let program = build_circuit(CircuitFamily::Qm, n, None, &seeds)?;
    execute(&program, &mut state, None)?;
    let view = state.entropy_view();

    let subsets: Vec<Vec<usize>> = if n <= EXHAUSTIVE_CROSSCHECK_QUBITS {
        (0u32..1 << n).map(|mask| (0..n).filter(|&q| mask >> q & 1 == 1).collect()).collect()
    } else {
        let stream = seeds.child("crosscheck");
        (0..args.samples.min(20_000) as u64)
            .map(|k| {
                use rand::Rng;
                let mut rng = stream.rng(k);
                let size = rng.gen_range(1..n);
                sample_subset(n, size, &mut rng)
            })
            .collect()
    };
    let mismatches = subsets
        .par_iter()
        .filter(|a| graph_entropy_bits(&graph, a).expect("subset is valid") != view.entropy_bits(a))
        .count();
    if mismatches > 0 {
        return Err(CliError::Runtime(format!(
            "circuit and graph constructions disagree on {mismatches} of {} bipartitions",
            subsets.len()
        )));
    }

    let table = page_scrambling_fraction(&graph, max_size, args.samples, &seeds.child("fractions"))?;
    let mut report = Report::new(
        config("hypercube", args),
        &["m", "N", "size_A", "eps", "count", "fraction", "samples_at_size", "seed"],
    );
    report.note("crosscheck_bipartitions", subsets.len());
    report.note("crosscheck_mismatches", mismatches);
    for row in &table {
        let h = &row.histogram;
        for eps in 0..=h.max_value().unwrap_or(0) {
            report.push(vec![
                args.m.into(),
                n.into(),
                row.size.into(),
                eps.into(),
                h.count(eps).into(),
                h.fraction(eps).into(),
                h.total().into(),
                args.common.seed.into(),
            ]);
        }
    }
    Ok(report)
}

// --------------------------------------------------------------- mutual-info

#[derive(Args, Debug, Clone, Serialize)]
pub struct MutualInfoArgs {
    #[arg(long = "N", default_value_t = 32)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, default_value = "es", value_parser = parse_family)]
    pub circuit: CircuitFamily,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Values of `|A|`.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
    /// Alice's inputs: sites `0..|A|` or a fresh random subset per sample.
    #[arg(long, default_value = "contiguous", value_parser = parse_placement)]
    pub placement: Placement,
    /// Fraction of the maximal `2|A|` bits defining `|R|_min`.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    /// Sweep N = 16, 32, 64, 128, 256 instead of `--N`.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn cmd_mutual_info(args: &MutualInfoArgs) -> Result<Report> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::Config(format!("threshold {} outside [0, 1]", args.threshold)));
    }
    let widths = if args.full { vec![16, 32, 64, 128, 256] } else { vec![args.n] };
    let seeds = SeedStream::new(args.common.seed, "mutual-info");
    let mut report = Report::new(
        config("mutual-info", args),
        &["N", "circuit", "t", "size_A", "size_R", "mean_I2_bits", "stderr", "samples", "seed"],
    );
    for n in widths {
        let program = build_circuit(args.circuit, n, args.depth, &seeds)?;
        check_sizes(&args.sizes, 1, n, "|A|")?;
        let cs = channel_state(&program)?;
        let stream = seeds.child(&format!("N{n}"));
        for &a in &args.sizes {
            let mut r_min = None;
            for r in 0..=n {
                let m: Mean = mutual_info_a_rb(&cs, a, r, args.samples, args.placement, &stream)?;
                if r_min.is_none() && m.mean() >= args.threshold * 2.0 * a as f64 {
                    r_min = Some(r);
                }
                report.push(vec![
                    n.into(),
                    args.circuit.name().into(),
                    program.depth().into(),
                    a.into(),
                    r.into(),
                    m.mean().into(),
                    m.stderr().into(),
                    m.count().into(),
                    args.common.seed.into(),
                ]);
            }
            report.note(format!("r_min_N{n}_a{a}"), r_min.expect("I(A:RB) = 2|A| at |R| = N"));
        }
    }
    Ok(report)
}

// ------------------------------------------------------------------- decoder

#[derive(Args, Debug, Clone, Serialize)]
pub struct DecoderArgs {
    #[arg(long = "N", default_value_t = 8)]
    #[serde(rename = "N")]
    pub n: usize,
    /// `es` or `nn` (the same gates without shuffles).
    #[arg(long, default_value = "es", value_parser = parse_family)]
    pub circuit: CircuitFamily,
    /// Interaction layers to sweep; `2 log2 N` when absent.
    #[arg(long, value_delimiter = ',')]
    pub depth: Vec<usize>,
    /// Values of `|A|`.
    #[arg(long, value_delimiter = ',', default_values_t = [1])]
    pub sizes: Vec<usize>,
    /// Error rates to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 60_000)]
    pub trajectories: usize,
    /// `on` or `off`: the pi/64 phase on idle bonds during CZ layers.
    #[arg(long, default_value = "on", value_parser = parse_toggle, action = clap::ArgAction::Set)]
    pub crosstalk: bool,
    #[arg(long, default_value = "depolarizing", value_parser = parse_noise)]
    pub noise: NoiseModel,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn cmd_decoder(args: &DecoderArgs) -> Result<Report> {
    let circuit = match args.circuit {
        CircuitFamily::Es => DecoderCircuit::Scrambling,
        CircuitFamily::Nn => DecoderCircuit::Unshuffled,
        other => return Err(CliError::Config(format!("decoder supports es and nn, not {}", other.name()))),
    };
    let m = log2_width(args.n)?;
    let depths = if args.depth.is_empty() { vec![2 * m] } else { args.depth.clone() };
    let seeds = SeedStream::new(args.common.seed, "decoder");
    let setups: Vec<DecoderSetup> = args
        .sizes
        .iter()
        .flat_map(|&a| depths.iter().flat_map(move |&t| args.p.iter().map(move |&p| (a, t, p))))
        .map(|(size_a, depth, p)| DecoderSetup {
            n: args.n,
            size_a,
            depth,
            p,
            crosstalk: args.crosstalk,
            noise: args.noise,
            circuit,
        })
        .collect();
    // Reject the whole sweep before any simulation starts.
    for s in &setups {
        s.validate()?;
    }
    let mut report = Report::new(
        config("decoder", args),
        &[
            "N",
            "circuit",
            "size_A",
            "size_R",
            "t",
            "p",
            "crosstalk",
            "P_EPR",
            "F_EPR",
            "delta",
            "stderr_F",
            "stderr_P",
            "stderr_delta",
            "F_mean",
            "trajectories",
            "seed",
        ],
    );
    for s in &setups {
        let stream = seeds.child(&format!("a{}-t{}-p{:?}", s.size_a, s.depth, s.p));
        let stats = run_decoder(s, args.trajectories, &stream)?;
        for row in &stats.rows {
            report.push(vec![
                s.n.into(),
                args.circuit.name().into(),
                s.size_a.into(),
                row.size_r.into(),
                s.depth.into(),
                s.p.into(),
                (if s.crosstalk { "on" } else { "off" }).into(),
                row.p_epr.into(),
                row.f_epr.into(),
                row.delta.into(),
                row.f_epr_stderr.into(),
                row.p_epr_stderr.into(),
                row.delta_stderr.into(),
                row.f_mean.into(),
                stats.trajectories.into(),
                args.common.seed.into(),
            ]);
        }
    }
    Ok(report)
}

// ----------------------------------------------------------------------- rmt

#[derive(Args, Debug, Clone, Serialize)]
pub struct RmtArgs {
    #[arg(long = "N", default_value_t = 16)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Values of `|A|` with `2|A| < N`; all of them when absent.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Random stabilizer states per size in the Monte-Carlo comparison.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Layers of the random all-to-all circuit preparing each state;
    /// `4 log2 N` when absent.
    #[arg(long)]
    pub depth: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn cmd_rmt(args: &RmtArgs) -> Result<Report> {
    let n = args.n;
    let m = log2_width(n)?;
    let sizes: Vec<usize> = if args.sizes.is_empty() { (1..=(n - 1) / 2).collect() } else { args.sizes.clone() };
    let depth = args.depth.unwrap_or(4 * m);
    let seeds = SeedStream::new(args.common.seed, "rmt");
    let mut report = Report::new(
        config("rmt", args),
        &[
            "N",
            "size_A",
            "eps",
            "rmt_prob",
            "mc_fraction",
            "mc_stderr",
            "rmt_mean_deficit_nats",
            "closed_form_nats",
            "mc_mean_deficit_nats",
            "mc_stderr_nats",
            "samples",
            "seed",
        ],
    );
    for &a in &sizes {
        let rmt = rmt_mean_deficit(n, a)?;
        let stream = seeds.child(&format!("a{a}"));
        let deficits: Vec<usize> = (0..args.samples as u64)
            .into_par_iter()
            .map(|k| -> Result<usize> {
                let mut rng = stream.rng(k);
                let program = build_random_all_to_all(n, depth, &mut rng)?;
                let mut state = StabilizerTableau::new_polarized(n, Basis::Z)?;
                execute(&program, &mut state, None)?;
                let subset = sample_subset(n, a, &mut rng);
                Ok(a - state.renyi2_entropy_bits(&subset)?)
            })
            .collect::<Result<_>>()?;
        let mut hist = Histogram::new();
        deficits.iter().for_each(|&d| hist.add(d));
        let mean: Mean = deficits.iter().map(|&d| d as f64 * LN_2).collect();
        for eps in 0..=a {
            let f = hist.fraction(eps);
            report.push(vec![
                n.into(),
                a.into(),
                eps.into(),
                rmt_rank_prob(n, a, eps)?.into(),
                f.into(),
                binomial_stderr(f, hist.total()).into(),
                rmt.eps_sum_nats.into(),
                rmt.closed_form_nats.into(),
                mean.mean().into(),
                mean.stderr().into(),
                hist.total().into(),
                args.common.seed.into(),
            ]);
        }
    }
    Ok(report)
}

impl Common {
    pub fn emit(&self, report: &Report) -> Result<()> {
        match &self.out {
            Some(path) => {
                let file = std::fs::File::create(path)?;
                report.write(self.format, std::io::BufWriter::new(file))?;
            }
            None => report.write(self.format, std::io::stdout().lock())?,
        }
        Ok(())
    }
}
