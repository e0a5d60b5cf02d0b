//! `sslp`: run searches, build family codes and re-audit catalogs.
//!
//! Exit status: 0 on success, 1 when any record fails verification, 2 on
//! usage, input or I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sslp_core::audit::{full_audit, kl_check, transversal_check, AuditConfig, AuditReport, DEFAULT_TAU};
use sslp_core::catalog::{read_catalog_file, write_catalog_file, CatalogRecord, CodeRecord};
use sslp_core::codes::{assemble, transversal_action, z_expectations, Amplitude, LogicalCode};
use sslp_core::families::{
    build_642_code, build_even_parity_code, build_extrema_code, EvenParityFamilySpec, ExtremaFamilySpec,
};
use sslp_core::sweep::{max_order_summary, order_counts, run_sweep, HitRecord, SweepConfig};

#[derive(Parser)]
#[command(name = "sslp", version, about = "Search and audit codes with transversal diagonal gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate (m, w, S), solve and audit; write hits to a catalog.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m_min: u32,
        #[arg(long)]
        m_max: u32,
        /// Keep only residue sets with gcd(m, S) = 1.
        #[arg(long)]
        coprime: bool,
        /// Also accept candidates whose union distance exceeds 2.
        #[arg(long)]
        allow_larger_distance: bool,
        /// Denominator bound for the projection fallback (default 2·m·n).
        #[arg(long)]
        denom_bound: Option<u64>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-audit every record of a catalog.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Build a code from a closed-form family.
    Family {
        #[command(subcommand)]
        family: Family,
    },
    /// Print the records of a catalog in readable form.
    Show {
        #[arg(long = "in")]
        input: PathBuf,
        /// 0-based record index; all records when absent.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Per-order counts and maximum orders of a catalog.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Two-extremal-string codes: C₀ = {0ⁿ, 1ⁿ}, ⟨Zᵢ⟩ = 1 − 2s/m.
    Extrema {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform superpositions over even-parity residue classes.
    EvenParity {
        /// JSON object with n, m, w and S.
        #[arg(long)]
        spec_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The ((6,4,2)) code with a controlled-phase gate.
    C642 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Float,
    Rational,
    Both,
}

/// Verification failed; distinct from input errors.
struct Rejected;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Rejected)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Result<(), Rejected>> {
    match cli.command {
        Command::Sweep {
            n,
            k,
            m_min,
            m_max,
            coprime,
            allow_larger_distance,
            denom_bound,
            jobs,
            out,
        } => {
            let mut config = SweepConfig::new(n, k, m_min, m_max);
            config.coprime_filter = coprime;
            config.require_exact_distance_2 = !allow_larger_distance;
            config.denominator_bound = denom_bound;
            config.jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
            cmd_sweep(&config, out.as_deref()).map(Ok)
        }
        Command::Verify { input, mode, tau } => cmd_verify(&input, mode, tau),
        Command::Family { family } => cmd_family(family),
        Command::Show { input, index } => cmd_show(&input, index).map(Ok),
        Command::Summarize { input } => cmd_summarize(&input).map(Ok),
    }
}

fn cmd_sweep(config: &SweepConfig, out: Option<&Path>) -> Result<()> {
    let outcome = run_sweep(config)?;
    let s = &outcome.stats;
    println!(
        "n={} K={} m=[{}, {}]: {} weight vectors, {} screened candidates",
        config.n, config.k, config.m_min, config.m_max, s.weight_vectors, s.candidates
    );
    println!(
        "rejected: {} empty class, {} distance, {} infeasible; {} hits, {} flagged",
        s.empty_class, s.distance_rejected, s.infeasible, s.hits, s.flagged
    );
    print_order_summary(&outcome.hits);
    if let Some(path) = out {
        let records: Vec<CatalogRecord> = outcome
            .hits
            .into_iter()
            .map(CatalogRecord::Hit)
            .chain(outcome.flagged.into_iter().map(CatalogRecord::Flagged))
            .collect();
        let count = write_catalog_file(&records, path)?;
        println!("wrote {count} records to {}", path.display());
    }
    Ok(())
}

fn print_order_summary(hits: &[HitRecord]) {
    for ((n, k, order), count) in order_counts(hits) {
        println!("n={n} K={k} order {order:>2}: {count}");
    }
    for ((n, k), order) in max_order_summary(hits) {
        println!("max order n={n} K={k}: {order}");
    }
}

/// Audits one code in the requested mode; returns the failure lines.
fn audit_lines(code: &LogicalCode, mode: Mode, tau: f64) -> Vec<String> {
    let report = match mode {
        Mode::Both => return full_audit(code, &AuditConfig::float(tau)).failure_lines(),
        Mode::Float => AuditReport {
            malformed: None,
            float_kl: Some(kl_check(code, &AuditConfig::float(tau))),
            rational_kl: None,
            transversal: Some(transversal_check(code, &AuditConfig::rational())),
        },
        Mode::Rational => AuditReport {
            malformed: None,
            float_kl: None,
            rational_kl: Some(kl_check(code, &AuditConfig::rational())),
            transversal: Some(transversal_check(code, &AuditConfig::rational())),
        },
    };
    report.failure_lines()
}

fn verify_record(record: &CatalogRecord, mode: Mode, tau: f64) -> (String, Vec<String>) {
    match record {
        CatalogRecord::Hit(h) => {
            let code = match assemble(&h.params, &h.probabilities) {
                Ok(code) => code,
                Err(e) => return (String::new(), vec![format!("assemble: {e}")]),
            };
            let mut lines = audit_lines(&code, mode, tau);
            let gate = match transversal_action(&code) {
                Ok(action) => {
                    if action.order != h.order {
                        lines.push(format!("stored order {} but gate has order {}", h.order, action.order));
                    }
                    format!("{action}, order {}", action.order)
                }
                Err(e) => {
                    lines.push(format!("transversal: {e}"));
                    String::new()
                }
            };
            if z_expectations(&code) != h.z_expectations {
                lines.push("stored Z expectations differ from the code".into());
            }
            (gate, lines)
        }
        CatalogRecord::Code(c) => {
            let mut lines = audit_lines(&c.code, mode, tau);
            let gate = match transversal_action(&c.code) {
                Ok(action) => {
                    if c.order.is_some_and(|o| o != action.order) {
                        lines.push(format!("stored order {:?} but gate has order {}", c.order, action.order));
                    }
                    format!("{action}, order {}", action.order)
                }
                Err(e) => {
                    lines.push(format!("transversal: {e}"));
                    String::new()
                }
            };
            (gate, lines)
        }
        CatalogRecord::Flagged(f) => (String::new(), vec![format!("flagged at {}: {}", f.stage, f.reason)]),
    }
}

fn describe(record: &CatalogRecord) -> String {
    match record {
        CatalogRecord::Hit(h) => format!("hit {}", h.params),
        CatalogRecord::Code(c) => format!(
            "code {} n={} K={} m={} w={:?} S={:?}",
            c.label,
            c.code.n(),
            c.code.k(),
            c.code.m(),
            c.code.weights(),
            c.code.residues()
        ),
        CatalogRecord::Flagged(f) => format!("flagged {}", f.params),
    }
}

fn cmd_verify(input: &Path, mode: Mode, tau: f64) -> Result<Result<(), Rejected>> {
    if !(tau.is_finite() && tau >= 0.0) {
        bail!("tolerance must be a non-negative number");
    }
    let catalog = read_catalog_file(input)?;
    let mut failed = 0;
    for (i, record) in catalog.records.iter().enumerate() {
        let (gate, lines) = verify_record(record, mode, tau);
        let verdict = if lines.is_empty() { "accept" } else { "FLAG" };
        let gate = if gate.is_empty() { String::new() } else { format!(" {gate}") };
        println!("[{i}] {verdict} {}{gate}", describe(record));
        for line in &lines {
            println!("    {line}");
        }
        if !lines.is_empty() {
            failed += 1;
        }
    }
    println!("{} records, {} accepted, {} flagged", catalog.records.len(), catalog.records.len() - failed, failed);
    Ok(if failed == 0 { Ok(()) } else { Err(Rejected) })
}

fn cmd_family(family: Family) -> Result<Result<(), Rejected>> {
    let (label, code, out) = match family {
        Family::Extrema { n, m, s, out } => {
            let spec = ExtremaFamilySpec::new(n, m, s)?;
            if let Some(warning) = spec.screen_warning() {
                println!("warning: {warning}");
            }
            (format!("extrema n={n} m={m} s={s}"), build_extrema_code(&spec)?, out)
        }
        Family::EvenParity { spec_file, out } => {
            let text = fs::read_to_string(&spec_file).with_context(|| spec_file.display().to_string())?;
            let spec: EvenParityFamilySpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", spec_file.display()))?;
            let label = format!("even-parity n={} m={} w={:?} S={:?}", spec.n, spec.m, spec.w, spec.s);
            (label, build_even_parity_code(&spec)?, out)
        }
        Family::C642 { out } => ("c642".to_string(), build_642_code(), out),
    };
    let report = full_audit(&code, &AuditConfig::default());
    let action = transversal_action(&code).ok();
    println!("{label}: {} amplitudes", code.amplitude_count());
    if let Some(action) = &action {
        println!("gate {action}, order {}", action.order);
    }
    if let Some(z) = report.summary().lambda_z {
        println!("<Z_i> = {}", join(&z));
    }
    let accepted = report.accepted();
    println!("audit: {}", if accepted { "accept" } else { "FLAG" });
    for line in report.failure_lines() {
        println!("    {line}");
    }
    if let Some(path) = out {
        let record = CatalogRecord::Code(CodeRecord {
            label,
            order: action.map(|a| a.order),
            audit: Some(report.summary()),
            code,
        });
        write_catalog_file(&[record], &path)?;
        println!("wrote {}", path.display());
    }
    Ok(if accepted { Ok(()) } else { Err(Rejected) })
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn amplitude_text(a: &Amplitude) -> String {
    let sign = match (a.phase.num(), a.phase.den()) {
        (0, _) => "+".to_string(),
        (1, 2) => "-".to_string(),
        (num, den) => format!("+ e^(2πi·{num}/{den})"),
    };
    format!("{sign} √({})", a.radicand)
}

fn show_record(i: usize, record: &CatalogRecord) -> String {
    let mut s = format!("[{i}] {}\n", describe(record));
    match record {
        CatalogRecord::Hit(h) => {
            let action = sslp_core::codes::TransversalAction::from_residues(h.params.m(), h.params.residues());
            let _ = writeln!(s, "  classes {:?}, gate {action}, order {}", h.class_sizes, h.order);
            let _ = writeln!(s, "  <Z_i> = {}", join(&h.z_expectations[0]));
            for (j, block) in h.probabilities.blocks().iter().enumerate() {
                let terms: Vec<String> = block
                    .iter()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(x, p)| format!("+ √({p})|{x}>"))
                    .collect();
                let _ = writeln!(s, "  |{j}_L> = {}", terms.join(" ").trim_start_matches("+ "));
            }
            let _ = writeln!(s, "  audit accepted: {}", h.audit.accepted);
        }
        CatalogRecord::Code(c) => {
            for (j, state) in c.code.states().iter().enumerate() {
                let terms: Vec<String> = state
                    .iter()
                    .map(|(x, a)| format!("{}|{x}>", amplitude_text(a)))
                    .collect();
                let _ = writeln!(s, "  |{j}_L> = {}", terms.join(" ").trim_start_matches("+ "));
            }
            if let Some(order) = c.order {
                let _ = writeln!(s, "  order {order}");
            }
            if let Some(audit) = &c.audit {
                let _ = writeln!(s, "  audit accepted: {}", audit.accepted);
            }
        }
        CatalogRecord::Flagged(f) => {
            let _ = writeln!(s, "  stage {}: {}", f.stage, f.reason);
        }
    }
    s
}

fn cmd_show(input: &Path, index: Option<usize>) -> Result<()> {
    let catalog = read_catalog_file(input)?;
    match index {
        Some(i) => {
            let Some(record) = catalog.records.get(i) else {
                bail!("index {i} out of range ({} records)", catalog.records.len());
            };
            print!("{}", show_record(i, record));
        }
        None => {
            for (i, record) in catalog.records.iter().enumerate() {
                print!("{}", show_record(i, record));
            }
        }
    }
    Ok(())
}

fn cmd_summarize(input: &Path) -> Result<()> {
    let catalog = read_catalog_file(input)?;
    let hits: Vec<HitRecord> = catalog
        .records
        .iter()
        .filter_map(|r| match r {
            CatalogRecord::Hit(h) => Some(h.clone()),
            _ => None,
        })
        .collect();
    let codes = catalog.records.iter().filter(|r| matches!(r, CatalogRecord::Code(_))).count();
    let flagged = catalog.records.len() - hits.len() - codes;
    println!("{} hits, {codes} codes, {flagged} flagged", hits.len());
    print_order_summary(&hits);
    for (line, first) in &catalog.duplicates {
        println!("duplicate: line {line} repeats line {first}");
    }
    Ok(())
}
