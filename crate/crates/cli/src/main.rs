use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ellrank::analyze::{analyze_with, exit, AnalyzeOptions, Report, TOOL};
use ellrank::certify::{reduce_mod_ell, stabilize_lattice, CertifyError, Criterion, DEFAULT_THRESHOLD_MULT};
use ellrank::grp::{composition_series_with, enumerate, GroupInstance, GrpError, DEFAULT_ORACLE_CAP};
use ellrank::instance::{parse_instance_file, Instance, InstanceError, ParsedInstance};
use ellrank::lietypes::{ChevalleyFamily, Family, LieTables, LieTypeTag, Mutation};
use ellrank::selftest::{self, SelftestConfig};

/// l-dimension and l-rank invariants of finite matrix groups.
#[derive(Parser)]
#[command(name = "ellrank", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Tuning {
    /// Largest group the composition route enumerates.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: u64,
    /// Seed for sampled Lie ranks.
    #[arg(long, default_value_t = 0x6e6f7269)]
    seed: u64,
    /// l counts as small when l <= M * dim; such results carry a flag.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_MULT)]
    threshold_mult: u64,
    /// Refuse to quotient by the Killing radical when l is small.
    #[arg(long)]
    strict: bool,
    /// Add wall-clock timings to the report (the output is then not reproducible).
    #[arg(long)]
    timings: bool,
}

impl Tuning {
    fn options(&self) -> AnalyzeOptions {
        let mut o = AnalyzeOptions {
            oracle_cap: self.oracle_cap,
            ..AnalyzeOptions::default()
        };
        o.envelope.rank.seed = self.seed;
        o.envelope.killing.threshold_mult = self.threshold_mult;
        o.envelope.killing.strict = self.strict;
        o
    }
}

#[derive(Subcommand)]
enum Command {
    /// Both routes and all certificates for an instance file.
    Analyze {
        instance: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// One certificate for an instance that declares its ambient group.
    Certify {
        instance: PathBuf,
        /// rank, typea, pertype or dim.
        #[arg(long)]
        criterion: Criterion,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Stabilize a lattice for a rational instance, reduce mod l, analyze.
    Reduce {
        instance: PathBuf,
        /// Defaults to the file's prime.
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long, default_value_t = 32)]
        max_iter: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Dimension and rank tables, and group orders over F_q.
    Tables {
        #[arg(long)]
        q: Option<u64>,
    },
    /// Composition factors and profile only.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: u64,
    },
    /// Run the built-in acceptance corpus.
    Selftest {
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
        #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        timings: bool,
        #[arg(long, hide = true)]
        inject_mutation: Option<Mutation>,
    },
}

/// A message for stderr and the code to leave with.
struct Failure(i32, String);

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        let code = match e {
            InstanceError::Io { .. } => exit::FAILURE,
            InstanceError::Schema(_) => exit::BAD_INPUT,
        };
        Failure(code, e.to_string())
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        let code = match &e {
            CertifyError::NonCompact { .. } => exit::NON_COMPACT,
            CertifyError::MissingAmbient
            | CertifyError::EmptyAmbient
            | CertifyError::NotIntegral { .. }
            | CertifyError::SingularReduction(_)
            | CertifyError::Shape(_) => exit::BAD_INPUT,
            CertifyError::Group(g) => grp_code(g),
            CertifyError::CrossCheckFailed { .. } => exit::FAILURE,
        };
        Failure(code, e.to_string())
    }
}

fn grp_code(e: &GrpError) -> i32 {
    match e {
        GrpError::CapExceeded { .. } | GrpError::TooWide { .. } | GrpError::DomainTooLarge { .. } => {
            exit::CAP_EXCEEDED
        }
        GrpError::UnknownFactor(_) => exit::UNKNOWN_FACTOR,
        GrpError::NoGenerators | GrpError::NotInvertible(_) | GrpError::SideMismatch { .. } | GrpError::Field(_) => {
            exit::BAD_INPUT
        }
    }
}

fn load(path: &Path) -> Result<ParsedInstance, Failure> {
    let parsed = parse_instance_file(path)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed)
}

fn finite(parsed: ParsedInstance) -> Result<(GroupInstance, String), Failure> {
    match parsed.instance {
        Instance::Finite(g) => Ok((g, parsed.digest)),
        Instance::Rational { .. } => Err(Failure(
            exit::BAD_INPUT,
            "rational instance: use `reduce` to pass through a lattice first".into(),
        )),
    }
}

fn threads_from_env() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NORI_RANK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure(exit::BAD_INPUT, format!("NORI_RANK_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure(exit::FAILURE, e.to_string()))
}

fn cmd_analyze(path: &Path, tuning: &Tuning, only: Option<Criterion>) -> Result<i32, Failure> {
    let (g, digest) = finite(load(path)?)?;
    if only.is_some() && g.ambient.is_none() {
        return Err(CertifyError::MissingAmbient.into());
    }
    let tables = LieTables::default();
    let mut analysis = analyze_with(&g, &tuning.options(), &tables)?;
    if let Some(c) = only {
        analysis.certificates.retain(|x| x.criterion == c);
    }
    let code = analysis.exit_code();
    print!("{}", Report::new(analysis, digest, tuning.timings).to_json());
    Ok(code)
}

fn cmd_reduce(path: &Path, ell: Option<u64>, max_iter: usize, tuning: &Tuning) -> Result<i32, Failure> {
    let parsed = load(path)?;
    let digest = parsed.digest;
    let Instance::Rational {
        prime,
        generators,
        ambient,
    } = parsed.instance
    else {
        return Err(Failure(exit::BAD_INPUT, "`reduce` takes a rational instance".into()));
    };
    let ell = match (ell, prime) {
        (Some(a), Some(b)) if a != b => {
            return Err(Failure(exit::BAD_INPUT, format!("--ell {a} contradicts the file's prime {b}")));
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Failure(exit::BAD_INPUT, "no prime: pass --ell".into())),
    };
    let lattice = stabilize_lattice(&generators, ell, max_iter)?;
    let mut g = reduce_mod_ell(&lattice.generators, ell)?;
    if let Some(a) = ambient {
        g = g.with_ambient(a.resolve(ell, 1));
    }
    let tables = LieTables::default();
    let analysis = analyze_with(&g, &tuning.options(), &tables)?;
    let code = analysis.exit_code();
    let mut report = Report::new(analysis, digest, tuning.timings);
    report.lattice = Some(lattice);
    print!("{}", report.to_json());
    Ok(code)
}

fn cmd_oracle(path: &Path, cap: u64) -> Result<i32, Failure> {
    let (g, digest) = finite(load(path)?)?;
    let tables = LieTables::default();
    let run = || -> Result<Value, GrpError> {
        let e = enumerate(&g, cap)?;
        let factors = composition_series_with(&e, g.ell(), &tables, cap)?;
        let profile = tables.rank_profile(&factors, g.ell());
        Ok(json!({
            "tool": TOOL,
            "input_digest": digest,
            "group_order": e.order(),
            "factors": factors,
            "profile": profile,
        }))
    };
    let v = run().map_err(|e| Failure(grp_code(&e), e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    Ok(exit::CLEAN)
}

fn cmd_tables(q: Option<u64>) -> Result<i32, Failure> {
    let tables = LieTables::default();
    let mut tags = Vec::new();
    for r in 1..=8 {
        tags.push(LieTypeTag::a(r));
    }
    for (fam, lo) in [(Family::B, 2), (Family::C, 2), (Family::D, 3)] {
        for r in lo..=8 {
            tags.push(LieTypeTag::new(fam, r).expect("valid rank"));
        }
    }
    for (fam, r) in [(Family::G2, 2), (Family::F4, 4), (Family::E6, 6), (Family::E7, 7), (Family::E8, 8)] {
        tags.push(LieTypeTag::new(fam, r).expect("valid rank"));
    }
    let types: Vec<Value> = tags
        .iter()
        .map(|&t| json!({"type": t.to_string(), "dim": tables.type_dim(t), "rank": tables.type_rank(t)}))
        .collect();
    let mut out = json!({ "tool": TOOL, "types": types });
    if let Some(q) = q {
        let families = [
            ChevalleyFamily::Sl(2),
            ChevalleyFamily::Sl(3),
            ChevalleyFamily::Sl(4),
            ChevalleyFamily::Sp(4),
            ChevalleyFamily::Sp(6),
            ChevalleyFamily::Su(3),
            ChevalleyFamily::Su(4),
            ChevalleyFamily::Spin(7),
            ChevalleyFamily::Spin(8),
        ];
        let mut orders = serde_json::Map::new();
        for fam in families {
            let v = match tables.chevalley_order(fam, q) {
                Ok(o) => Value::String(o.to_string()),
                Err(e) => return Err(Failure(exit::BAD_INPUT, e.to_string())),
            };
            orders.insert(fam.to_string(), v);
        }
        out["q"] = q.into();
        out["orders"] = orders.into();
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(exit::CLEAN)
}

fn cmd_selftest(only: Option<Vec<u32>>, seed: u64, timings: bool, mutation: Option<Mutation>) -> Result<i32, Failure> {
    let cfg = SelftestConfig {
        mutation,
        seed,
        ..SelftestConfig::default()
    };
    if let Some(bad) = only.iter().flatten().find(|id| !(1..=10).contains(*id)) {
        return Err(Failure(exit::BAD_INPUT, format!("no criterion {bad}")));
    }
    let outcomes = selftest::run(&cfg, only.as_deref());
    for o in &outcomes {
        println!("{}", o.line(timings));
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        exit::CLEAN
    } else {
        exit::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::BAD_INPUT } else { exit::CLEAN };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = threads_from_env().and_then(|()| match &cli.command {
        Command::Analyze { instance, tuning } => cmd_analyze(instance, tuning, None),
        Command::Certify {
            instance,
            criterion,
            tuning,
        } => cmd_analyze(instance, tuning, Some(*criterion)),
        Command::Reduce {
            instance,
            ell,
            max_iter,
            tuning,
        } => cmd_reduce(instance, *ell, *max_iter, tuning),
        Command::Tables { q } => cmd_tables(*q),
        Command::Oracle { instance, oracle_cap } => cmd_oracle(instance, *oracle_cap),
        Command::Selftest {
            only,
            seed,
            timings,
            inject_mutation,
        } => cmd_selftest(only.clone(), *seed, *timings, *inject_mutation),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
