//! Batch front end: reads JSON configs, runs one computation and writes
//! CSV or JSON artifacts.
//!
//! Exit codes: 0 success, 1 invalid input (JSON `{"error": ...}` on stderr),
//! 2 a verification that ran and failed.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use cifc_core::dmc_regions::{
    check_regime, counterexample_search, dmc_capacity_region, fme_equivalence_run,
    inner_bound_region, verify_counterexample, AuxAssignment, CapacitySearch, ChannelClass,
    CounterexampleSearch, Partition, Regime, RegimeCheck,
};
use cifc_core::dpc::{comparison_sweep, write_sweep, DpcConfig};
use cifc_core::gaussian::{
    classify_gaussian, region_mp_mixed, region_mp_vsi, region_mp_wi, region_ms_vsi,
    GaussianChannel, GaussianGrids, GaussianRegime,
};
use cifc_core::io::{read_json, write_json};
use cifc_core::{DmcChannel, Error, Frontier2D};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CIFC_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cifc",
    about = "Rate regions of multicast cognitive interference channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime of a Gaussian or discrete channel.
    Classify(Opts),
    /// Region CSV of a Gaussian channel, or the inner bound of an
    /// `{"aux", "channel"}` pair.
    Region(Opts),
    /// Common- vs multiple-description dirty-paper sweep.
    DpcCompare(Opts),
    /// Binning-system projection against the direct inner bound.
    VerifyFme(Opts),
    /// Regime capacity region of a discrete channel.
    DmcCapacity(Opts),
    /// Seeded search for a VSI channel that violates the weak condition.
    Counterexample(Opts),
}

/// Flags shared by all subcommands; each uses the ones it needs.
#[derive(Debug, Args)]
struct Opts {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    regime: Option<String>,
    /// Receiver split `W|S`, 1-based, e.g. "1,2|3".
    #[arg(long)]
    partition: Option<String>,
    /// verify-fme: only compare instances with a nonempty inner bound.
    #[arg(long)]
    nonempty: bool,
}

enum Failure {
    Invalid(Error),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Error> {
    match p {
        Some(p) if !p.as_os_str().is_empty() => Ok(p),
        _ => Err(Error::InvalidConfig(format!("--{flag} is required"))),
    }
}

fn partition(opts: &Opts) -> Result<Option<Partition>, Error> {
    opts.partition.as_deref().map(Partition::parse).transpose()
}

fn grids(opts: &Opts) -> GaussianGrids {
    opts.grid.map(GaussianGrids::uniform).unwrap_or_default()
}

fn write_frontier(path: &Path, f: &Frontier2D) -> Result<(), Error> {
    std::fs::write(path, f.to_csv())?;
    Ok(())
}

fn summary(f: &Frontier2D) -> Value {
    json!({ "points": f.points().len(), "r1_max": f.r1_max(), "r2_max": f.r2_max() })
}

fn read_value(opts: &Opts) -> Result<Value, Error> {
    read_json(required(&opts.input, "in")?)
}

fn is_gaussian(v: &Value) -> bool {
    v.get("class").is_some()
}

fn parse<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T, Error> {
    serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn regime_check(opts: &Opts, chan: &DmcChannel) -> RegimeCheck {
    RegimeCheck {
        samples: opts.samples.unwrap_or(RegimeCheck::default().samples),
        aux_card: chan.x1_size() * chan.x2_size() + 1,
        seed: opts.seed,
    }
}

fn classify(opts: &Opts) -> Outcome {
    let v = read_value(opts)?;
    let part = partition(opts)?;
    if is_gaussian(&v) {
        let chan: GaussianChannel = parse(v)?;
        let regime = classify_gaussian(&chan, part.as_ref())?;
        return Ok(json!({ "regime": regime.label() }));
    }
    let chan: DmcChannel = parse(v)?;
    let class = ChannelClass::infer(&chan);
    let candidates = match &opts.regime {
        Some(r) => vec![Regime::parse(r, opts.partition.as_deref())?],
        None => {
            let mut c = vec![Regime::Vsi, Regime::Vwi];
            c.extend(part.map(Regime::Mixed));
            c
        }
    };
    let check = regime_check(opts, &chan);
    let mut reports = Vec::new();
    let mut label = "none";
    for r in &candidates {
        let rep = check_regime(&chan, class, r, &check)?;
        let passed = rep.passed();
        reports.push(rep);
        if passed {
            label = r.label();
            break;
        }
    }
    Ok(json!({ "regime": label, "class": class, "checks": reports }))
}

fn gaussian_region(chan: &GaussianChannel, opts: &Opts) -> Result<Frontier2D, Error> {
    let part = partition(opts)?;
    let g = grids(opts);
    let regime = match &opts.regime {
        Some(r) => match r.to_ascii_lowercase().as_str() {
            "vsi" => GaussianRegime::Vsi,
            "wi" => GaussianRegime::Wi,
            "mixed" => GaussianRegime::Mixed,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown Gaussian regime `{other}`"
                )))
            }
        },
        None => classify_gaussian(chan, part.as_ref())?,
    };
    match (chan, regime) {
        (GaussianChannel::MultiPrimary(c), GaussianRegime::Vsi) => region_mp_vsi(c, g.rho),
        (GaussianChannel::MultiPrimary(c), GaussianRegime::Wi) => region_mp_wi(c, g),
        (GaussianChannel::MultiPrimary(c), GaussianRegime::Mixed) => {
            let p = part
                .ok_or_else(|| Error::InvalidPartition("mixed regime needs --partition".into()))?;
            region_mp_mixed(c, &p, g)
        }
        (GaussianChannel::MultiSecondary(c), GaussianRegime::Vsi) => region_ms_vsi(c, g.eta),
        (GaussianChannel::MultiSecondary(_), GaussianRegime::Wi) => Err(Error::WrongRegime(
            "weak multi-secondary bounds are produced by dpc-compare".into(),
        )),
        (_, r) => Err(Error::WrongRegime(format!(
            "no region formula for regime {}",
            r.label()
        ))),
    }
}

#[derive(Deserialize)]
struct InnerInput {
    aux: AuxAssignment,
    channel: DmcChannel,
}

fn region(opts: &Opts) -> Outcome {
    let out = required(&opts.out, "out")?;
    let v = read_value(opts)?;
    let f = if is_gaussian(&v) {
        gaussian_region(&parse(v)?, opts)?
    } else {
        let inp: InnerInput = parse(v)?;
        inner_bound_region(&inp.aux, &inp.channel)?
    };
    write_frontier(out, &f)?;
    Ok(summary(&f))
}

/// Default number of η rows in the sweep.
const SWEEP_ROWS: usize = 101;
const X_SCAN: usize = 64;

fn dpc_compare(opts: &Opts) -> Outcome {
    let out = required(&opts.out, "out")?;
    let cfg: DpcConfig = parse(read_value(opts)?)?;
    cfg.validate()?;
    let report = comparison_sweep(&cfg, opts.grid.unwrap_or(SWEEP_ROWS), X_SCAN)?;
    write_sweep(out, &cfg, &report)?;
    let body = json!({ "rows": report.rows.len(), "ordered": report.ordered, "max_md_gain": report.max_md_gain });
    if report.ordered {
        Ok(body)
    } else {
        Err(Failure::Verification(body))
    }
}

fn verify_fme(opts: &Opts) -> Outcome {
    let report = fme_equivalence_run(opts.samples.unwrap_or(100), opts.seed, opts.nonempty)?;
    let body = serde_json::to_value(&report).map_err(Error::from)?;
    if let Some(out) = &opts.out {
        write_json(out, &report)?;
    }
    if report.failed.is_empty() {
        Ok(body)
    } else {
        Err(Failure::Verification(body))
    }
}

fn dmc_capacity(opts: &Opts) -> Outcome {
    let out = required(&opts.out, "out")?;
    let chan: DmcChannel = parse(read_value(opts)?)?;
    let name = opts
        .regime
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--regime is required".into()))?;
    let regime = Regime::parse(name, opts.partition.as_deref())?;
    let d = CapacitySearch::default();
    let search = CapacitySearch {
        grid: opts.grid.unwrap_or(d.grid),
        samples: opts.samples.unwrap_or(d.samples),
        seed: opts.seed,
        ..d
    };
    let f = dmc_capacity_region(&chan, ChannelClass::infer(&chan), &regime, &search)?;
    write_frontier(out, &f)?;
    Ok(summary(&f))
}

fn counterexample(opts: &Opts) -> Outcome {
    let d = CounterexampleSearch::default();
    let cfg = CounterexampleSearch {
        budget: opts.budget.unwrap_or(d.budget),
        seed: opts.seed,
        ..d
    };
    match counterexample_search(&cfg)? {
        Some(w) => {
            let verified = verify_counterexample(&w)?;
            if let Some(out) = &opts.out {
                write_json(out, &w)?;
            }
            let body = json!({
                "found": true,
                "verified": verified,
                "channel_index": w.channel_index,
                "receiver": w.receiver,
                "margin": w.margin,
            });
            if verified {
                Ok(body)
            } else {
                Err(Failure::Verification(body))
            }
        }
        None => Err(Failure::Verification(
            json!({ "found": false, "budget": cfg.budget }),
        )),
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        // A pool built by an earlier call in this process stays in place.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

/// Runs one command; `argv[0]` is the program name.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads()
        .map_err(Failure::from)
        .and_then(|_| match &cli.command {
            Command::Classify(o) => classify(o),
            Command::Region(o) => region(o),
            Command::DpcCompare(o) => dpc_compare(o),
            Command::VerifyFme(o) => verify_fme(o),
            Command::DmcCapacity(o) => dmc_capacity(o),
            Command::Counterexample(o) => counterexample(o),
        });
    match result {
        Ok(v) => {
            print_json(&v);
            0
        }
        Err(Failure::Verification(v)) => {
            print_json(&v);
            2
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            1
        }
    }
}
