use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tamelab::aec::{
    amalgamate, closure, is_member, random_triple, tameness_report, verify_amalgam, Subset,
    TripleParams,
};
use tamelab::cli::{emit_report, load_scenario, run_suite, Format, RunOptions, Scenario, Suite};
use tamelab::coherent::{
    decide_limit_iso, extract_sharp, is_coherent_system, verify_iso_on_truncation, CoherentSystem,
};
use tamelab::structures::{build_level, Side, StructureDump};
use tamelab::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Order,
    Functions,
    Sharp,
    Structures,
    Limit,
    Aec,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Order => Suite::Order,
            SuiteArg::Functions => Suite::Functions,
            SuiteArg::Sharp => Suite::Sharp,
            SuiteArg::Structures => Suite::Structures,
            SuiteArg::Limit => Suite::Limit,
            SuiteArg::Aec => Suite::Aec,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

/// Checks directed function families, the structures built from them, and
/// the class of structures they live in.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: FormatArg,
    #[arg(long, global = true)]
    level_bound: Option<usize>,
    /// Symbol of u_{f*} the filter markers map to.
    #[arg(long)]
    marker: Option<String>,
    #[arg(long)]
    oracle: Option<String>,
    /// Exit with 3 when a check was skipped.
    #[arg(long)]
    strict: bool,
    /// Seed for randomized amalgamation triples and corrupted assignments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run only claims whose id starts with this.
    #[arg(long)]
    claim: Option<String>,
    /// Record wall time per claim (the report is then not reproducible).
    #[arg(long)]
    timings: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Limit structures: coherent systems and the witness they yield.
    Limit {
        #[command(subcommand)]
        op: LimitOp,
    },
    /// Members of K, closures, amalgams and the type report.
    Aec {
        #[command(subcommand)]
        op: AecOp,
    },
    /// Print a level structure as JSON.
    Level {
        #[arg(long)]
        side: u8,
        #[arg(long)]
        d: String,
        /// The expanded structure with the J sort.
        #[arg(long)]
        expanded: bool,
    },
}

#[derive(Debug, Subcommand)]
enum LimitOp {
    Decide,
    Verify {
        #[arg(long)]
        system: PathBuf,
    },
    Extract,
}

#[derive(Debug, Subcommand)]
enum AecOp {
    Member {
        #[arg(long)]
        structure: PathBuf,
    },
    Closure {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        i: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        j: Vec<String>,
    },
    Amalgamate,
    TamenessReport,
}

fn print<T: Serialize>(value: &T) {
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(value).expect("serializes")
    );
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn need_scenario(cli: &Cli) -> Result<Scenario, Error> {
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| Error::Precondition("--scenario is required".into()))?;
    load_scenario(path)
}

fn run_command(cli: &Cli, command: &Command) -> Result<i32, Error> {
    match command {
        Command::Limit { op } => {
            let sc = need_scenario(cli)?;
            let fam = &sc.family;
            match op {
                LimitOp::Decide => print(&decide_limit_iso(fam)?.map(|s| s.to_doc(fam))),
                LimitOp::Extract => {
                    let sys = decide_limit_iso(fam)?
                        .ok_or_else(|| Error::Precondition("no coherent system".into()))?;
                    print(&extract_sharp(fam, &sys)?.to_doc(fam));
                }
                LimitOp::Verify { system } => {
                    let sys = CoherentSystem::from_doc(&read_json(system)?, fam)?;
                    let failure = is_coherent_system(fam, &sys)?;
                    let bound = cli.level_bound.unwrap_or(4);
                    let mut levels = Vec::new();
                    for d in 1..=bound {
                        let m = verify_iso_on_truncation(fam, &sys, d)?;
                        levels.push(serde_json::json!({ "d": d, "mismatches": m.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
                    }
                    print(&serde_json::json!({ "coherence_failure": failure, "levels": levels }));
                    return Ok(if failure.is_none() { 0 } else { 1 });
                }
            }
        }
        Command::Aec { op } => match op {
            AecOp::Member { structure } => {
                let m = read_json::<StructureDump>(structure)?.to_structure()?;
                let r = is_member(&m);
                print(&r);
                return Ok(if r.passed { 0 } else { 1 });
            }
            AecOp::Closure { structure, a, i, j } => {
                let m = read_json::<StructureDump>(structure)?.to_structure()?;
                let find = |labels: &[String], l: &String| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| Error::UnknownElement(l.clone()))
                };
                let mut x = Subset::default();
                for l in a {
                    x.a.insert(find(&m.a, l)?);
                }
                for l in i {
                    x.i.insert(find(&m.i, l)?);
                }
                for l in j {
                    x.j.insert(find(m.j.as_deref().unwrap_or(&[]), l)?);
                }
                print(&StructureDump::from_structure(&closure(&m, &x)?.structure));
            }
            AecOp::Amalgamate => {
                let (m0, m1, m2) = random_triple(cli.seed.unwrap_or(0), &TripleParams::default());
                let am = amalgamate(&m0, &m1, &m2)?;
                let r = verify_amalgam(&m0, &m1, &m2, &am);
                print(&serde_json::json!({
                    "m0": StructureDump::from_structure(&m0),
                    "m1": StructureDump::from_structure(&m1),
                    "m2": StructureDump::from_structure(&m2),
                    "mstar": StructureDump::from_structure(&am.mstar),
                    "renamed": am.renamed,
                    "report": r,
                }));
                return Ok(if r.passed() { 0 } else { 1 });
            }
            AecOp::TamenessReport => {
                let sc = need_scenario(cli)?;
                let r = tameness_report(
                    &sc.family,
                    cli.level_bound.unwrap_or(sc.options.level_bound),
                )?;
                print(&r);
                return Ok(if r.passed() { 0 } else { 1 });
            }
        },
        Command::Level { side, d, expanded } => {
            let sc = need_scenario(cli)?;
            let d = sc.family.regime().parse_index(d)?;
            let level = build_level(Side::from_number(*side)?, d, &sc.family, *expanded)?;
            print(&StructureDump::from_structure(level.structure()));
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<i32, Error> {
    if let Some(command) = &cli.command {
        return run_command(cli, command);
    }
    let sc = need_scenario(cli)?;
    let mut opts = RunOptions::from(&sc.options);
    if let Some(b) = cli.level_bound {
        opts.level_bound = b;
    }
    if let Some(m) = &cli.marker {
        opts.marker = Some(m.clone());
    }
    if let Some(o) = &cli.oracle {
        if o != "zero-residue" {
            return Err(Error::Domain(format!("unknown oracle `{o}`")));
        }
        opts.oracle = o.clone();
    }
    if let Some(s) = cli.seed {
        opts.seed = s;
    }
    opts.claim = cli.claim.clone();
    opts.timings = cli.timings;
    let report = run_suite(&sc, cli.suite.into(), &opts);
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    let _ = write!(std::io::stdout(), "{}", emit_report(&report, format));
    Ok(report.exit_code(cli.strict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
