mod common;
mod report;
mod run;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use qdouble::group::FiniteGroup;
use qdouble::protocols::depth::{depth_certificate, parse_sweep, Protocol};
use qdouble::protocols::gadgets::{CyclicGadget, GadgetMode};
use qdouble::protocols::prepare::BaseCase;
use serde_json::json;

use common::{usage, UsageError};
use report::Report;

#[derive(Parser)]
#[command(name = "qdouble", version, about = "Quantum double protocols: verification suites, seeded runs and depth certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite.
    Verify {
        /// ribbon-algebra, charge-orthogonality, kolemma, appendix-b, prep-fidelity,
        /// gadget-teleport, charge-adaptive-equivalence, depth-certificates or ground-space.
        suite: String,
        /// Group: Z<d>, S<n>, D<n> or a table file.
        #[arg(long)]
        group: Option<String>,
        /// Lattice size RxC.
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Depth certificate of a protocol over a size sweep.
    Depth {
        /// prepare, ribbon, charge, gadget-U, gadget-Delta, gadget-CX, gadget-CCU or ladder.
        #[arg(long)]
        protocol: String,
        /// `a..b`, `r0xc0..r1xc1` or a comma list; defaults to the protocol's sweep.
        #[arg(long)]
        sizes: Option<String>,
        /// Defaults to Z2 for prepare, gadgets and ladder, and S3 otherwise.
        #[arg(long)]
        group: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Teleported)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a saved JSON report, print its summary and confirm that it
    /// re-serializes byte-identically.
    Report { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Direct,
    Teleported,
}

impl From<Mode> for GadgetMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Direct => GadgetMode::Direct,
            Mode::Teleported => GadgetMode::Teleported,
        }
    }
}

fn depth_protocol(name: &str, group: Option<&str>, mode: GadgetMode) -> Result<Protocol> {
    let default = match name {
        "prepare" | "ladder" | "gadget-U" | "gadget-Delta" | "gadget-CX" => "Z2",
        _ => "S3",
    };
    let g: FiniteGroup = common::group(group.unwrap_or(default))?;
    let cyclic_d = || -> Result<usize> {
        let n = g.order();
        if (0..n).any(|a| g.element_order(a) == n) {
            Ok(n)
        } else {
            Err(usage(format!("{name} needs a cyclic group, got {}", g.name())))
        }
    };
    let gadget = |kind| -> Result<Protocol> { Ok(Protocol::Gadget { kind, d: cyclic_d()?, mode }) };
    match name {
        "prepare" => Ok(Protocol::Prepare { group: g.clone(), base: BaseCase::AncillaSyndrome }),
        "ribbon" => Ok(Protocol::Ribbon { group: g.clone() }),
        "charge" => Ok(Protocol::Charge { group: g.clone() }),
        "gadget-U" => gadget(CyclicGadget::PartialSum),
        "gadget-Delta" => gadget(CyclicGadget::SuccessiveDifference),
        "gadget-CX" => gadget(CyclicGadget::MultitargetCx),
        "gadget-CCU" => Ok(Protocol::Ccu { group: g.clone(), mode }),
        "ladder" => Ok(Protocol::Ladder { d: cyclic_d()? }),
        other => Err(usage(format!(
            "unknown protocol '{other}'; known: prepare, ribbon, charge, gadget-U, gadget-Delta, gadget-CX, gadget-CCU, ladder"
        ))),
    }
}

/// Returns the report and where to write it.
fn execute(cmd: Command) -> Result<(Report, Option<PathBuf>)> {
    let t = Instant::now();
    let (mut rep, out) = match cmd {
        Command::Verify { suite, group, lattice, seed, out } => {
            (suites::run(&suite, &suites::SuiteArgs { group, lattice, seed })?, out)
        }
        Command::Run { config } => {
            let cfg = run::load(&config)?;
            (run::run(&cfg)?, cfg.output.clone())
        }
        Command::Depth { protocol, sizes, group, mode, out } => {
            let p = depth_protocol(&protocol, group.as_deref(), mode.into())?;
            let sweep = match &sizes {
                Some(s) => parse_sweep(s).map_err(|e| usage(e.to_string()))?,
                None => p.default_sweep(),
            };
            let cert = depth_certificate(&p, &sweep).map_err(|e| usage(e.to_string()))?;
            let mut rep = Report::new("depth", json!({ "protocol": protocol, "sizes": sizes, "group": group }));
            rep.add_depth(&cert);
            (rep, out)
        }
        Command::Report { .. } => unreachable!("handled in main"),
    };
    rep.timings_ms.insert("total".into(), t.elapsed().as_secs_f64() * 1e3);
    Ok((rep, out))
}

fn exit_for(e: &anyhow::Error) -> ExitCode {
    let usage_like = e.downcast_ref::<UsageError>().is_some()
        || matches!(
            e.downcast_ref::<qdouble::Error>(),
            Some(qdouble::Error::TooLarge(..) | qdouble::Error::UsageError(_) | qdouble::Error::Parse { .. })
        );
    ExitCode::from(if usage_like { 2 } else { 1 })
}

fn check_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    let rep = Report::parse(&text).map_err(|e| usage(format!("report {}: {e}", path.display())))?;
    if rep.to_json() != text {
        return Err(usage(format!("{} does not re-serialize byte-identically", path.display())));
    }
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Report { path } = &cli.command {
        return match check_report(path) {
            Ok(rep) => {
                print!("{}", rep.summary());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                exit_for(&e)
            }
        };
    }
    match execute(cli.command) {
        Ok((rep, out)) => {
            print!("{}", rep.summary());
            if let Some(path) = out {
                if let Err(e) = rep.write(&path) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if rep.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
