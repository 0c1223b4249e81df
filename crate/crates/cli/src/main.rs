use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use spreading_core::calculus::{
    classify_lp_sum, domination_matrix, find_gap_witness_among, lp_sum_combine, max_combo, weighted_sum_combo,
    SamplerConfig, SymNorm,
};
use spreading_core::encoder::EncoderState;
use spreading_core::lattice::FiniteLattice;
use spreading_core::lorentz::{powerset_diagram, WeightSeq};
use spreading_core::orlicz::{OrliczFunction, OrliczParams, Pattern};
use spreading_core::pwl::{check_submultiplicative, PwlFunction};
use spreading_core::submult::{
    build_incomparable_family_with, extend_fast, extend_fast_to, extend_slow, extend_slow_to, FamilyConfig,
    SubmultError,
};
use spreading_core::Rational;

#[derive(Parser)]
#[command(name = "spreading", version, about = "Constructions and order checks for sequence-space norms")]
struct Cli {
    /// Worker threads for parallel verifiers (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for samplers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = "SPREADING_OUT", default_value = "spreading-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend a normalized submultiplicative function.
    Extend(ExtendArgs),
    /// Build a family of pairwise incomparable fundamental functions.
    Incomparable {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        requests: u64,
        /// Give up once a breakpoint needs more bits than this.
        #[arg(long, default_value_t = 1 << 24)]
        max_bits: u64,
    },
    /// Domination diagram of the max-Lorentz norms over a power set.
    Powerset {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1")]
        p: Rational,
        #[arg(long, default_value_t = 1)]
        threshold: u64,
    },
    /// Encode a finite lattice as Orlicz patterns.
    Encode {
        /// JSON file, or one of `m3`, `n5`, `chain:N`, `powerset:N`.
        #[arg(long)]
        lattice: String,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate norms on vectors read from a file.
    Norm(NormArgs),
    /// Reversed-chain order of l_p-sums over an increasing exponent list.
    Chain {
        #[arg(long, value_delimiter = ',', default_value = "2,2.25,2.5,2.75,3")]
        p_list: Vec<f64>,
        /// Gap threshold for the block-witness scenario.
        #[arg(long, default_value_t = 2.0)]
        gap: f64,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value = "1/2")]
    tau: Rational,
    #[arg(long, default_value = "2")]
    r: Rational,
    #[arg(long, default_value = "5/2")]
    p: Rational,
}

impl ParamArgs {
    fn build(&self) -> Result<OrliczParams> {
        Ok(OrliczParams::validated(self.tau.clone(), self.r.clone(), self.p.clone())?)
    }
}

#[derive(Args)]
struct ExtendArgs {
    /// Input CSV (`x,S(x)` rows); the identity on [1,2] when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// One slowdown step with slope `--eps`.
    #[arg(long)]
    slow: bool,
    #[arg(long)]
    slow_to: Option<Rational>,
    #[arg(long)]
    eps: Option<Rational>,
    /// One speedup step.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    fast_to: Option<Rational>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Combine {
    Max,
    Sum,
    Lpsum,
}

#[derive(Args)]
struct NormArgs {
    /// `lp:Q`, `orlicz:RLE`, `lorentz:FILE.json` or `bundle:FILE.json:ELEMENT`; repeatable.
    #[arg(long = "norm", required = true)]
    norms: Vec<String>,
    /// Vectors, one per line, entries separated by commas or spaces.
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, value_enum)]
    combine: Option<Combine>,
    /// Constants `C_n` for `--combine sum`.
    #[arg(long, value_delimiter = ',')]
    constants: Vec<f64>,
    /// Coefficients `c_j` for `--combine lpsum`.
    #[arg(long, value_delimiter = ',')]
    coeffs: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    outer_p: f64,
    #[arg(long, default_value_t = 0.0)]
    c0: f64,
    #[command(flatten)]
    params: ParamArgs,
}

/// Command result: `Ok(true)` verified, `Ok(false)` verification failed.
type Outcome = Result<bool>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Extend(a) => cmd_extend(&cli.out, a),
        Command::Incomparable { count, requests, max_bits } => cmd_incomparable(&cli.out, *count, *requests, *max_bits),
        Command::Powerset { n, p, threshold } => cmd_powerset(&cli.out, *n, p, *threshold),
        Command::Encode { lattice, depth, params } => cmd_encode(&cli.out, lattice, *depth, params),
        Command::Norm(a) => cmd_norm(a),
        Command::Chain { p_list, gap } => cmd_chain(&cli.out, p_list, *gap, cli.seed),
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
}

fn cmd_extend(out: &Path, a: &ExtendArgs) -> Outcome {
    let mut f = match &a.input {
        Some(p) => PwlFunction::read_csv(std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?)?,
        None => PwlFunction::identity(),
    };
    f.validate()?;
    let mut steps = Vec::new();
    if a.slow {
        let eps = a.eps.as_ref().ok_or_else(|| anyhow!("--slow needs --eps"))?;
        f = extend_slow(&f, eps)?;
        steps.push(json!({"op": "slow", "eps": eps, "end": f.domain_end()}));
    }
    if let Some(target) = &a.slow_to {
        let eps = a.eps.as_ref().ok_or_else(|| anyhow!("--slow-to needs --eps"))?;
        let ext = extend_slow_to(&f, target, eps)?;
        let growth = ext.total_growth();
        steps.push(json!({"op": "slow_to", "target": target, "eps": eps, "growth": growth, "below_eps": &growth < eps}));
        f = ext.function;
    }
    if a.fast {
        let ext = extend_fast(&f)?;
        steps.push(json!({"op": "fast", "k": ext.k, "branch": ext.branch, "value": ext.function.value_at_end()}));
        f = ext.function;
    }
    if let Some(m) = &a.fast_to {
        let ext = extend_fast_to(&f, m)?;
        steps.push(json!({"op": "fast_to", "target": m, "iterations": ext.iterations(), "value": ext.function.value_at_end()}));
        f = ext.function;
    }
    let report = check_submultiplicative(&f);
    std::fs::create_dir_all(out)?;
    f.write_csv(std::fs::File::create(out.join("extended.csv"))?)?;
    write_json(out, "extend_report.json", &json!({"steps": steps, "breakpoints": f.len(), "check": report}))?;
    println!(
        "extend: {} breakpoints, end {:?}, {} pairs checked, {} violations",
        f.len(),
        f.domain_end(),
        report.pairs_checked,
        report.violations.len()
    );
    Ok(report.is_ok())
}

fn cmd_incomparable(out: &Path, count: usize, requests: u64, max_bits: u64) -> Outcome {
    let mut cfg = FamilyConfig::new(count, requests);
    cfg.max_bits = Some(max_bits);
    match build_incomparable_family_with(cfg) {
        Ok(fam) => {
            let ok = fam.verify_log().is_ok();
            fam.export(out)?;
            println!("incomparable: {} requests served, witnesses {}", fam.request_log().len(), verdict(ok));
            Ok(ok)
        }
        Err(e @ SubmultError::BudgetExceeded { .. }) => {
            write_json(out, "incomparable_report.json", &json!({"pass": false, "failure": e.to_string()}))?;
            println!("incomparable: FAIL: {e}");
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_powerset(out: &Path, n: usize, p: &Rational, threshold: u64) -> Outcome {
    let fam = build_incomparable_family_with(FamilyConfig::new(n, threshold))?;
    match powerset_diagram(&fam, n, p, threshold) {
        Ok(m) => {
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("powerset_matrix.json"), m.to_json() + "\n")?;
            println!("powerset: {} nodes, order-isomorphic", m.len());
            for (i, row) in m.leq_matrix().iter().enumerate() {
                let above: Vec<&str> = (0..m.len()).filter(|&j| j != i && row[j]).map(|j| m.nodes()[j].as_str()).collect();
                println!("  {} <= {}", m.nodes()[i], above.join(", "));
            }
            Ok(true)
        }
        Err(e @ spreading_core::lorentz::LorentzError::NotIsomorphic { .. }) => {
            println!("powerset: FAIL: {e}");
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn load_lattice(spec: &str) -> Result<FiniteLattice> {
    let builtin = |s: &str, prefix: &str| s.strip_prefix(prefix).map(|n| n.parse::<usize>());
    Ok(match spec {
        "m3" => FiniteLattice::m3(),
        "n5" => FiniteLattice::n5(),
        s if s.starts_with("chain:") => FiniteLattice::chain(builtin(s, "chain:").expect("prefix")?),
        s if s.starts_with("powerset:") => FiniteLattice::power_set(builtin(s, "powerset:").expect("prefix")?),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            FiniteLattice::parse_json(&text)?
        }
    })
}

fn cmd_encode(out: &Path, lattice: &str, depth: u32, params: &ParamArgs) -> Outcome {
    if depth == 0 {
        bail!("depth must be at least 1");
    }
    let lat = load_lattice(lattice)?;
    let state = EncoderState::run(lat, params.build()?, depth)?;
    let report = state.verify_properties();
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("encoder_bundle.json"), state.to_json() + "\n")?;
    write_json(out, "encoder_report.json", &report)?;
    println!(
        "encode: {} requests, horizon {}, {} subsets checked",
        report.requests, report.horizon.0, report.subsets_checked
    );
    for (name, c) in [("i", &report.i), ("ii", &report.ii), ("iii", &report.iii), ("iv", &report.iv), ("balance", &report.balance), ("shift", &report.shift)] {
        println!("  {name}: {}", verdict(c.pass));
    }
    println!("  order-isomorphic: {}", verdict(report.order_isomorphic));
    for (name, f) in report.failures() {
        println!("  {name} failure: {f}");
    }
    Ok(report.all_pass())
}

fn parse_norm(spec: &str, params: &OrliczParams) -> Result<SymNorm> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| anyhow!("norm `{spec}` lacks a `kind:` prefix"))?;
    Ok(match kind {
        "lp" => SymNorm::lp(rest.parse().with_context(|| format!("exponent in `{spec}`"))?)?,
        "orlicz" => SymNorm::Orlicz(OrliczFunction::new(params.clone(), rest.parse::<Pattern>()?)),
        "lorentz" => {
            let text = std::fs::read_to_string(rest).with_context(|| format!("reading {rest}"))?;
            SymNorm::Lorentz(serde_json::from_str::<WeightSeq>(&text)?)
        }
        "bundle" => {
            let (path, element) = rest.rsplit_once(':').ok_or_else(|| anyhow!("expected bundle:FILE:ELEMENT"))?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let state = EncoderState::from_json(&text)?;
            let idx = state
                .lattice()
                .names()
                .iter()
                .position(|n| n == element)
                .ok_or_else(|| anyhow!("no element `{element}` in {path}"))?;
            SymNorm::Orlicz(state.function(idx))
        }
        _ => bail!("unknown norm kind `{kind}`"),
    })
}

fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}", path.display(), ln + 1))?;
        out.push(v);
    }
    Ok(out)
}

fn cmd_norm(a: &NormArgs) -> Outcome {
    let params = a.params.build()?;
    let norms = a.norms.iter().map(|s| parse_norm(s, &params)).collect::<Result<Vec<_>>>()?;
    let norm = match a.combine {
        None if norms.len() == 1 => norms.into_iter().next().expect("one"),
        None => bail!("several --norm values need --combine"),
        Some(Combine::Max) => max_combo(norms),
        Some(Combine::Sum) => weighted_sum_combo(a.constants.clone(), norms)?,
        Some(Combine::Lpsum) => lp_sum_combine(a.coeffs.clone(), norms, a.outer_p, a.c0)?,
    };
    println!("index,value,residual");
    for (i, v) in read_vectors(&a.vectors)?.iter().enumerate() {
        let value = norm.eval(v)?;
        let residual = match &norm {
            SymNorm::Orlicz(m) if value > 0.0 => format!("{:e}", (m.modular_at(v, value)? - 1.0).abs()),
            _ => String::new(),
        };
        println!("{i},{value},{residual}");
    }
    Ok(true)
}

fn cmd_chain(out: &Path, p_list: &[f64], gap: f64, seed: u64) -> Outcome {
    let n = p_list.len();
    if n == 0 || n > 20 {
        bail!("p-list must have between 1 and 20 entries");
    }
    let mut classes = Vec::new();
    let mut ok = true;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let w = (1.0 / support.len() as f64).powf(1.0 / p_list[0]);
        let c: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { w } else { 0.0 }).collect();
        let cls = classify_lp_sum(&c, p_list)?;
        ok &= cls.index == support[0];
        classes.push(json!({"support": support, "class": cls}));
    }
    let nodes: Vec<(String, SymNorm)> =
        p_list.iter().map(|&q| Ok((format!("l_{q}"), SymNorm::lp(q)?))).collect::<Result<_>>()?;
    let cfg = SamplerConfig { seed, ..SamplerConfig::default() };
    let matrix = domination_matrix(&nodes, &cfg)?;
    let reversed = (0..n).all(|i| (0..n).all(|j| matrix.dominates(i, j) == (i >= j)));
    ok &= reversed;

    // Block witnesses separating l_{p_0} from the tail, then a weighted sum
    // dominating every member.
    let norms: Vec<SymNorm> = nodes.iter().map(|(_, s)| s.clone()).collect();
    let tail: Vec<usize> = (1..n).collect();
    let candidates: Vec<Rational> = (0..256).map(Rational::pow2).collect();
    let witness = if tail.is_empty() { None } else { find_gap_witness_among(&norms, &tail, gap, &candidates) };
    let constants: Vec<f64> = (1..=n).map(|k| 2f64.powi(k as i32)).collect();
    let combined = weighted_sum_combo(constants.clone(), norms)?;
    write_json(
        out,
        "chain_report.json",
        &json!({
            "p_list": p_list,
            "classes": classes,
            "reversed_chain": reversed,
            "gap_witness": witness,
            "weighted_sum_constants": constants,
            "weighted_sum_at_e1": combined.eval(&[1.0])?,
        }),
    )?;
    std::fs::write(out.join("chain_matrix.json"), matrix.to_json() + "\n")?;
    println!("chain: {} supports classified, reversed chain {}", classes.len(), verdict(reversed));
    if let Some(w) = witness {
        println!("  gap witness m = {} ratio {:.6}", w.m, w.ratio);
    }
    Ok(ok)
}
