mod settings;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use unitscan_core::certify::{
    build_certificate, read_chain, verify_proof, write_chain, BuildError, BuildOptions, Proof,
};
use unitscan_core::cfrac::{self, CfError, DEFAULT_STEP_BUDGET};
use unitscan_core::cubic::{fundamentality_auto, parse_fixture, verify_unit_pair, Fundamentality};
use unitscan_core::pell::{
    analyze, check_witness, make_witness, mordell_bernoulli_check, read_witness, write_witness,
    PellError, WitnessVerdict, BERNOULLI_BOUND,
};
use unitscan_core::search::{self, Filter, Report, ScanControl, SearchConfig, SearchError};

use settings::Settings;

const FOUND: u8 = 0;
const REFUTED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;
const RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "unitscan", version, about = "Fundamental units, d | y searches and primality certificates")]
struct Cli {
    /// Settings file with `key = value` lines (default: $UNITSCAN_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Continued-fraction steps allowed per radicand
    #[arg(long, global = true)]
    step_budget: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide d | y for the fundamental unit x + yω of Q(√d)
    VerifyAac {
        d: u64,
        /// Residues modulo d only (default)
        #[arg(long, group = "route")]
        mod_only: bool,
        /// Exact unit by the matrix product tree
        #[arg(long, group = "route")]
        exact: bool,
        /// Pell witness file, checked against --cert
        #[arg(long, group = "route", requires = "cert")]
        witness: Option<PathBuf>,
        /// Chain file for d, or `trial` for d ≤ 10^6
        #[arg(long)]
        cert: Option<PathBuf>,
        /// With --exact, also write the Pell witness here
        #[arg(long, requires = "exact")]
        emit_witness: Option<PathBuf>,
    },
    /// Build or verify a primality certificate chain
    Certify {
        n: String,
        #[arg(long, conflicts_with = "verify")]
        build: bool,
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Known prime factor of n - 1 (repeatable)
        #[arg(long)]
        hint: Vec<String>,
        /// Chain file to write (default: stdout)
        #[arg(long, requires = "build")]
        out: Option<PathBuf>,
    },
    /// Check a Pell witness file against a certificate for its d
    Witness {
        file: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Unit invariants of d as one JSON line
    Analyze {
        d: u64,
        /// Externally computed class number, passed through
        #[arg(long)]
        h: Option<u64>,
    },
    /// Compare p | y with p | B_{(p-1)/2} for one prime or every p ≡ 1 (mod 4) in a range
    BernoulliCheck {
        #[arg(num_args = 1..=2, required = true)]
        range: Vec<u64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Scan [lo, hi] for d | y (and optionally d | 3y, d | Y)
    Search {
        lo: u64,
        hi: u64,
        /// squarefree | primes_1mod4 | primes_3mod4 | squarefree_congruence(r,m)
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        shards: Option<usize>,
        /// Comma list from y, threeY, bigY
        #[arg(long)]
        report: Option<String>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Chunks between checkpoint writes
        #[arg(long)]
        checkpoint_interval: Option<u64>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Record file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        abort_after_checkpoints: Option<u64>,
    },
    /// Pure cubic field units
    Cubic {
        #[command(subcommand)]
        cmd: CubicCmd,
    },
}

#[derive(Subcommand)]
enum CubicCmd {
    /// Check each fixture line's unit/inverse pair
    VerifyUnit {
        fixture: PathBuf,
        /// Also prove each unit is not a proper power
        #[arg(long)]
        fundamental: bool,
        /// Largest interval precision in bits
        #[arg(long)]
        precision_cap: Option<u32>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: USAGE, msg: msg.into() }
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure { code: RUNTIME, msg: msg.into() }
}

fn io_fail(path: &Path, e: io::Error) -> Failure {
    runtime(format!("{}: {e}", path.display()))
}

fn cf_fail(e: CfError) -> Failure {
    match e {
        CfError::PerfectSquare(_) | CfError::RadicandOutOfRange(_) => usage(e.to_string()),
        _ => runtime(e.to_string()),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { FOUND });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut st = Settings::load(cli.config.as_deref()).map_err(usage)?;
    let budget = st.resolve("step_budget", cli.step_budget, DEFAULT_STEP_BUDGET).map_err(usage)?;
    match cli.cmd {
        Cmd::VerifyAac { d, exact, witness, cert, emit_witness, .. } => {
            eprintln!("{}", st.describe());
            if let Some(w) = witness {
                let cert = cert.expect("clap enforces --cert");
                return witness_route(&w, &cert, Some(d));
            }
            if exact {
                verify_exact(d, budget, emit_witness.as_deref())
            } else {
                verify_mod(d, budget)
            }
        }
        Cmd::Certify { n, build, verify, hint, out } => {
            let n = parse_natural("n", &n)?;
            match (build, verify) {
                (_, Some(file)) => certify_verify(&n, &file),
                (true, None) => certify_build(&n, &hint, out.as_deref()),
                (false, None) => Err(usage("certify needs --build or --verify <file>")),
            }
        }
        Cmd::Witness { file, cert } => witness_route(&file, &cert, None),
        Cmd::Analyze { d, h } => {
            eprintln!("{}", st.describe());
            let row = analyze(d, h, budget).map_err(pell_fail)?;
            println!("{}", serde_json::to_string(&row).expect("serializable"));
            Ok(FOUND)
        }
        Cmd::BernoulliCheck { range, bound } => {
            let bound = st.resolve("bernoulli_bound", bound, BERNOULLI_BOUND).map_err(usage)?;
            eprintln!("{}", st.describe());
            bernoulli(&range, bound, budget)
        }
        Cmd::Search {
            lo,
            hi,
            filter,
            shards,
            report,
            checkpoint,
            checkpoint_interval,
            resume,
            out,
            abort_after_checkpoints,
        } => {
            let mut cfg = SearchConfig::new(lo, hi, Filter::Squarefree);
            let filter = filter.map(|f| f.parse::<Filter>()).transpose().map_err(usage)?;
            cfg.filter = st.resolve("filter", filter, Filter::Squarefree).map_err(usage)?;
            cfg.shards = st.resolve("shards", shards, cfg.shards).map_err(usage)?;
            let report = report.map(|r| r.parse::<Report>()).transpose().map_err(usage)?;
            cfg.report = st.resolve("report", report, Report::default()).map_err(usage)?;
            cfg.checkpoint_interval =
                st.resolve("checkpoint_interval", checkpoint_interval, cfg.checkpoint_interval).map_err(usage)?;
            cfg.step_budget = budget;
            eprintln!("{}", st.describe());
            run_search(&cfg, checkpoint.as_deref(), resume, out.as_deref(), abort_after_checkpoints)
        }
        Cmd::Cubic { cmd: CubicCmd::VerifyUnit { fixture, fundamental, precision_cap } } => {
            let cap = st.resolve("precision_cap", precision_cap, 4096).map_err(usage)?;
            eprintln!("{}", st.describe());
            cubic_verify(&fixture, fundamental, cap)
        }
    }
}

fn parse_natural(name: &str, s: &str) -> Result<BigUint, Failure> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(usage(format!("{name} must be a decimal natural number, got {s:?}")));
    }
    BigUint::from_str(s).map_err(|e| usage(format!("{name}: {e}")))
}

fn pell_fail(e: PellError) -> Failure {
    match e {
        PellError::Cf(c) => cf_fail(c),
        PellError::NotSquarefree(_) | PellError::OutOfRange(..) | PellError::NotOneModFour(_) => usage(e.to_string()),
        _ => runtime(e.to_string()),
    }
}

fn check_radicand(d: u64) -> Result<(), Failure> {
    if d < 2 {
        return Err(usage(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}

fn verify_mod(d: u64, budget: u64) -> Outcome {
    check_radicand(d)?;
    let r = match cfrac::unit_mod(d, d, budget) {
        Ok(r) => r,
        Err(CfError::StepBudgetExceeded { budget, .. }) => {
            println!("inconclusive: period not reached within {budget} steps");
            return Ok(INCONCLUSIVE);
        }
        Err(e) => return Err(cf_fail(e)),
    };
    let norm = r.norm;
    if r.y == 0 {
        println!("d | y (mod route): y ≡ 0 (mod {d}), period {}, norm {norm}", r.period);
        Ok(FOUND)
    } else {
        println!("y ≡ {} (mod {d}), period {}, norm {norm}", r.y, r.period);
        Ok(REFUTED)
    }
}

fn verify_exact(d: u64, budget: u64, emit: Option<&Path>) -> Outcome {
    check_radicand(d)?;
    let u = match cfrac::fundamental_unit(d, budget) {
        Ok(u) => u,
        Err(CfError::StepBudgetExceeded { budget, .. }) => {
            println!("inconclusive: period not reached within {budget} steps");
            return Ok(INCONCLUSIVE);
        }
        Err(e) => return Err(cf_fail(e)),
    };
    if !u.norm_form_matches() {
        return Err(runtime(format!("internal error: norm form check failed for d = {d}")));
    }
    let digits = unitscan_core::arith::decimal_digits(&u.y);
    let r = &u.y % d;
    let divides = r == BigUint::from(0u32);
    if divides {
        println!("d | y (exact route): y has {digits} digits, period {}, norm {}", u.period, u.norm);
    } else {
        println!("y ≡ {r} (mod {d}) (exact route): y has {digits} digits, period {}, norm {}", u.period, u.norm);
    }
    if let (Some(path), false) = (emit, divides) {
        eprintln!("no witness written to {}: d does not divide y", path.display());
    }
    if let (Some(path), true) = (emit, divides) {
        let w = make_witness(&u).map_err(pell_fail)?;
        let f = File::create(path).map_err(|e| io_fail(path, e))?;
        let mut f = BufWriter::new(f);
        write_witness(&w, &mut f).map_err(pell_fail)?;
        f.flush().map_err(|e| io_fail(path, e))?;
        eprintln!("witness written to {}", path.display());
    }
    Ok(if divides { FOUND } else { REFUTED })
}

/// `trial` means a trial-division proof for the witness's own `d`.
fn load_proof(cert: &Path, d: &BigUint) -> Result<Proof, Failure> {
    if cert.as_os_str() == "trial" {
        return Ok(Proof::Trial(d.clone()));
    }
    let text = fs::read_to_string(cert).map_err(|e| io_fail(cert, e))?;
    let mut chain = read_chain(&text).map_err(|e| runtime(format!("{}: {e}", cert.display())))?;
    Ok(Proof::Certificate(chain.pop().expect("chains are non-empty")))
}

fn witness_route(file: &Path, cert: &Path, expect_d: Option<u64>) -> Outcome {
    let f = File::open(file).map_err(|e| io_fail(file, e))?;
    let w = read_witness(f).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
    if let Some(d) = expect_d {
        if w.d != BigUint::from(d) {
            return Err(usage(format!("witness is for d = {}, not {d}", w.d)));
        }
    }
    let proof = load_proof(cert, &w.d)?;
    let verdict = check_witness(&w, &proof);
    println!("witness route for d = {}: {verdict}", w.d);
    Ok(match verdict {
        WitnessVerdict::ProvesDDividesY => FOUND,
        WitnessVerdict::BoundInconclusive(_) => INCONCLUSIVE,
        _ => REFUTED,
    })
}

fn certify_build(n: &BigUint, hints: &[String], out: Option<&Path>) -> Outcome {
    let mut opts = BuildOptions::default();
    for h in hints {
        opts.hints.push(parse_natural("hint", h)?);
    }
    let proof = match build_certificate(n, &opts) {
        Ok(p) => p,
        Err(e @ BuildError::NotProbablePrime(_)) => {
            println!("{e}");
            return Ok(REFUTED);
        }
        Err(e @ BuildError::HelperOutOfReach { .. }) => {
            println!("no certificate found: {e}");
            return Ok(INCONCLUSIVE);
        }
    };
    verify_proof(&proof).map_err(|e| runtime(format!("internal error: built proof fails: {e}")))?;
    let cert = match proof {
        Proof::Trial(_) => {
            println!("{n} is prime by trial division; no chain needed (use --cert trial)");
            return Ok(FOUND);
        }
        Proof::Certificate(c) => c,
    };
    let chain = write_chain(&cert);
    let links = read_chain(&chain).map(|c| c.len()).unwrap_or(0);
    match out {
        Some(path) => {
            fs::write(path, format!("{chain}\n")).map_err(|e| io_fail(path, e))?;
            println!("{n} is prime: {links}-link chain written to {}", path.display());
        }
        None => println!("{chain}"),
    }
    Ok(FOUND)
}

fn certify_verify(n: &BigUint, file: &Path) -> Outcome {
    let text = fs::read_to_string(file).map_err(|e| io_fail(file, e))?;
    let chain = read_chain(&text).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
    let root = chain.last().expect("chains are non-empty").clone();
    if &root.c != n {
        println!("rejected: chain proves {}, not {n}", root.c);
        return Ok(REFUTED);
    }
    match verify_proof(&Proof::Certificate(root)) {
        Ok(()) => {
            println!("verified: {n} is prime ({} links)", chain.len());
            Ok(FOUND)
        }
        Err(e) => {
            println!("rejected: {e}");
            Ok(REFUTED)
        }
    }
}

fn bernoulli(range: &[u64], bound: u64, budget: u64) -> Outcome {
    let primes: Vec<u64> = match *range {
        [p] => {
            if !unitscan_core::arith::is_probable_prime_u64(p) || p % 4 != 1 {
                return Err(usage(format!("{p} is not a prime ≡ 1 (mod 4)")));
            }
            vec![p]
        }
        [lo, hi] => {
            if lo > hi {
                return Err(usage(format!("empty range [{lo}, {hi}]")));
            }
            (lo.max(13)..=hi)
                .filter(|&p| p % 4 == 1 && unitscan_core::arith::is_probable_prime_u64(p))
                .collect()
        }
        _ => unreachable!("clap takes one or two values"),
    };
    let mut bad = Vec::new();
    let mut divisible = Vec::new();
    for &p in &primes {
        let c = mordell_bernoulli_check(p, bound, budget).map_err(pell_fail)?;
        if !c.consistent {
            bad.push(p);
        }
        if c.y_mod_p == 0 {
            divisible.push(p);
        }
    }
    if bad.is_empty() {
        println!("{} primes checked, all consistent; p | y for {} of them", primes.len(), divisible.len());
        Ok(FOUND)
    } else {
        println!("inconsistent for p in {bad:?}");
        Ok(REFUTED)
    }
}

fn run_search(
    cfg: &SearchConfig,
    checkpoint: Option<&Path>,
    resume: bool,
    out: Option<&Path>,
    abort_after: Option<u64>,
) -> Outcome {
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let start = Instant::now();
    let checkpoints = AtomicU64::new(0);
    let progress = |p: &search::Progress| {
        eprintln!(
            "[{:>8.2}s] next_d={} scanned={} hits={} overflows={}",
            start.elapsed().as_secs_f64(),
            p.next_d,
            p.scanned,
            p.hits,
            p.overflows
        );
        let n = checkpoints.fetch_add(1, Ordering::SeqCst) + 1;
        if abort_after == Some(n) {
            std::process::abort();
        }
    };
    let ctl = ScanControl { checkpoint, progress: Some(&progress), ..Default::default() };
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| io_fail(path, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = match (resume, checkpoint) {
        (true, Some(cp)) => search::resume(cfg, cp, &mut sink, &ctl),
        _ => search::scan(cfg, &mut sink, &ctl),
    };
    let report = result.map_err(|e| match e {
        SearchError::InvalidConfig(m) => usage(m),
        e => runtime(e.to_string()),
    })?;
    drop(sink);
    eprintln!("[{:>8.2}s] done: {}", start.elapsed().as_secs_f64(), report.summary);
    if out.is_some() {
        println!("{}", report.summary);
    }
    Ok(if report.summary.hits > 0 {
        FOUND
    } else if report.summary.overflows > 0 {
        INCONCLUSIVE
    } else {
        REFUTED
    })
}

fn cubic_verify(fixture: &Path, fundamental: bool, cap: u32) -> Outcome {
    let text = fs::read_to_string(fixture).map_err(|e| io_fail(fixture, e))?;
    let units = parse_fixture(&text).map_err(|e| runtime(format!("{}: {e}", fixture.display())))?;
    if units.is_empty() {
        return Err(usage(format!("{}: no fixtures", fixture.display())));
    }
    let mut code = FOUND;
    for f in &units {
        let pair = verify_unit_pair(&f.unit, &f.inverse);
        let mut line = format!("d={} {}: ", f.d, f.unit);
        if !pair {
            line.push_str("not a unit pair");
            code = REFUTED;
        } else {
            line.push_str("unit pair ok");
            if fundamental {
                let (v, prec) = fundamentality_auto(&f.unit, cap).map_err(|e| runtime(e.to_string()))?;
                line.push_str(&format!("; {v} ({prec} bits)"));
                match v {
                    Fundamentality::Fundamental => {}
                    Fundamentality::NotFundamental { .. } => code = REFUTED,
                    Fundamentality::NeedsMorePrecision if code == FOUND => code = INCONCLUSIVE,
                    Fundamentality::NeedsMorePrecision => {}
                }
            }
        }
        println!("{line}");
    }
    Ok(code)
}
