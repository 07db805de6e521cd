//! Command-line front end.
//!
//! Subcommands: `run`, `audit-fairness`, `manipulate`, `reproduce`,
//! `check-class`. Every command emits a deterministic report (JSON by
//! default, CSV for tabular reproduction reports) and exits 0 on
//! success/pass, 1 when a checked guarantee is violated, and 2 on usage
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fairdiv::report::{
    chain_witness_json, emit_csv, factor_two_json, fairness_report_json, replay_json,
    replay_row, sha256_hex, stage_mapping_json, witness_json, Report, ReproRow, Status,
};
use fairdiv::{
    audit_alpha_ef1, audit_chain, best_manipulation, build_stage_mappings,
    envy_graph_hard_instances, instance_json, parse_allocation, parse_instance, parse_rational,
    phi, run_mechanism, run_mechanism_with_order, submodular_hard_instance, thm1_chain,
    thm4_chain, verify_factor_two_bound, xos_hard_instance, AuditFinding, Good, Mechanism,
    MisreportFamily, Rational, Valuation, ValuationClass,
};

#[derive(Parser)]
#[command(
    name = "fairdiv",
    about = "Fair-division mechanism laboratory",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    /// Report format; csv applies only to tabular reproduction reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized property commands; embedded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismArg {
    /// Round-robin by singleton value.
    Rr,
    /// Round-robin by marginal value.
    RrMarginal,
    /// Envy-graph procedure, goods in a fixed order.
    EgFixed,
    /// Envy-graph procedure, source picks its favorite good.
    EgFavorite,
}

impl From<MechanismArg> for Mechanism {
    fn from(arg: MechanismArg) -> Mechanism {
        match arg {
            MechanismArg::Rr => Mechanism::RoundRobin,
            MechanismArg::RrMarginal => Mechanism::RoundRobinMarginal,
            MechanismArg::EgFixed => Mechanism::EnvyGraph,
            MechanismArg::EgFavorite => Mechanism::EnvyGraphFavorite,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance file and report the allocation.
    Run {
        #[arg(long, value_enum)]
        mechanism: MechanismArg,
        #[arg(long)]
        instance: PathBuf,
        /// Good consumption order for eg-fixed, e.g. `3,1,2`.
        #[arg(long)]
        order: Option<String>,
        /// Also write the full execution trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check an allocation file against alpha-EF1 for an instance.
    AuditFairness {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        /// Fairness factor as `p/q`.
        #[arg(long)]
        alpha: String,
    },
    /// Search a misreport family for the agent's best manipulation.
    Manipulate {
        #[arg(long, value_enum)]
        mechanism: MechanismArg,
        #[arg(long)]
        instance: PathBuf,
        /// 1-based agent index.
        #[arg(long)]
        agent: usize,
        /// `all-orders`, `grid:STEP`, or `file:PATH`.
        #[arg(long)]
        family: String,
    },
    /// Replay a reference hard instance or proof chain and check the
    /// predicted ratio.
    #[command(subcommand)]
    Reproduce(Reproduce),
    /// Test one agent's valuation for membership in a valuation class.
    CheckClass {
        #[arg(long)]
        instance: PathBuf,
        /// 1-based agent index.
        #[arg(long)]
        agent: usize,
        /// additive | multiplicative | submodular | xos | subadditive | cancelable
        #[arg(long)]
        class: String,
    },
}

#[derive(Subcommand)]
enum Reproduce {
    /// Audit the first deviation chain against round-robin.
    Thm1,
    /// Audit the golden-ratio deviation chain against round-robin.
    Thm4,
    /// Replay the submodular hard instance for marginal round-robin.
    Thm5 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: u32,
        #[arg(long = "T")]
        t: u32,
    },
    /// Replay the XOS hard instance for round-robin.
    Xos {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
    },
    /// Replay both envy-graph hard instances.
    EnvyGraph {
        /// Epsilon as `p/q`.
        #[arg(long)]
        eps: String,
    },
    /// Emit the stage-by-stage bundle mapping for the known profitable
    /// round-robin manipulation, with the factor-2 bound check.
    Thm3Mapping,
}

/// Errors that should exit with the usage code.
struct UsageError(String);

impl<E: std::error::Error> From<E> for UsageError {
    fn from(e: E) -> Self {
        let mut msg = e.to_string();
        let mut source = e.source();
        while let Some(s) = source {
            msg.push_str(&format!(": {s}"));
            source = s.source();
        }
        UsageError(msg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match execute(&cli, command) {
        Ok(report) => match render(&cli, &report) {
            Ok(()) => ExitCode::from(report.status.exit_code() as u8),
            Err(err) => {
                eprintln!("error: {}", err.0);
                ExitCode::from(2)
            }
        },
        Err(err) => {
            eprintln!("error: {}", err.0);
            ExitCode::from(2)
        }
    }
}

fn render(cli: &Cli, report: &Report) -> Result<(), UsageError> {
    let text = match cli.format {
        Format::Json => report.to_json_string(),
        Format::Csv => emit_csv(report)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

/// Parses an instance file, prefixing errors with the file path.
fn load_instance(path: &Path) -> Result<(Vec<Valuation>, String), UsageError> {
    let text = read_file(path)?;
    let profile = parse_instance(&text)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    Ok((profile, sha256_hex(text.as_bytes())))
}

fn parse_alpha(s: &str) -> Result<Rational, UsageError> {
    parse_rational(s).map_err(UsageError)
}

fn execute(cli: &Cli, command: String) -> Result<Report, UsageError> {
    let report = |digest: Option<String>, results, status, rows| Report {
        command: command.clone(),
        input_digest: digest,
        seed: cli.seed,
        results,
        status,
        rows,
    };
    match &cli.command {
        Command::Run { mechanism, instance, order, trace } => {
            let (profile, digest) = load_instance(instance)?;
            let order: Option<Vec<Good>> = match order {
                Some(text) => Some(
                    text.split(',')
                        .map(|p| p.trim().parse::<Good>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| UsageError(format!("bad --order `{text}`")))?,
                ),
                None => None,
            };
            let run = run_mechanism_with_order(
                (*mechanism).into(),
                &profile,
                order.as_deref(),
            )?;
            if let Some(path) = trace {
                let text = serde_json::to_string_pretty(&run.trace).expect("trace serializes");
                std::fs::write(path, text)
                    .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            }
            let results = json!({
                "mechanism": Mechanism::from(*mechanism).to_string(),
                "allocation": fairdiv::allocation_json(&run.allocation),
            });
            Ok(report(Some(digest), results, Status::Pass, None))
        }
        Command::AuditFairness { instance, allocation, alpha } => {
            let (profile, digest) = load_instance(instance)?;
            let m = profile.first().map(Valuation::m).unwrap_or(0);
            let text = read_file(allocation)?;
            let alloc = parse_allocation(&text, m)
                .map_err(|e| UsageError(format!("{}: {e}", allocation.display())))?;
            let alpha = parse_alpha(alpha)?;
            let audit = audit_alpha_ef1(&profile, &alloc, &alpha);
            let status = Status::from_bool(audit.satisfied);
            Ok(report(Some(digest), fairness_report_json(&audit), status, None))
        }
        Command::Manipulate { mechanism, instance, agent, family } => {
            let (profile, digest) = load_instance(instance)?;
            let family = parse_family(family)?;
            let agent = agent
                .checked_sub(1)
                .ok_or_else(|| UsageError("--agent is 1-based".into()))?;
            let witness = best_manipulation((*mechanism).into(), &profile, agent, &family)?;
            let results = witness_json(&witness)?;
            Ok(report(Some(digest), results, Status::Pass, None))
        }
        Command::Reproduce(what) => reproduce(what, report),
        Command::CheckClass { instance, agent, class } => {
            let (profile, digest) = load_instance(instance)?;
            let class: ValuationClass =
                class.parse().map_err(|e: String| UsageError(e))?;
            let agent = agent
                .checked_sub(1)
                .ok_or_else(|| UsageError("--agent is 1-based".into()))?;
            let valuation = profile
                .get(agent)
                .ok_or_else(|| UsageError(format!("no agent {}", agent + 1)))?;
            let check = fairdiv::check_class(valuation, class)?;
            let results = json!({
                "class": check.class.to_string(),
                "holds": check.holds,
                "counterexample": check.counterexample.as_ref().map(|c| {
                    json!({
                        "s": c.s.iter().collect::<Vec<_>>(),
                        "t": c.t.as_ref().map(|t| t.iter().collect::<Vec<_>>()),
                        "good": c.good,
                    })
                }),
            });
            Ok(report(Some(digest), results, Status::from_bool(check.holds), None))
        }
    }
}

fn parse_family(text: &str) -> Result<MisreportFamily, UsageError> {
    if text == "all-orders" {
        return Ok(MisreportFamily::AllOrders);
    }
    if let Some(step) = text.strip_prefix("grid:") {
        let step = parse_rational(step).map_err(UsageError)?;
        return Ok(MisreportFamily::Grid { step });
    }
    if let Some(path) = text.strip_prefix("file:") {
        let (reports, _) = load_instance(Path::new(path))?;
        return Ok(MisreportFamily::explicit(reports));
    }
    Err(UsageError(format!(
        "bad --family `{text}`: expected all-orders, grid:STEP, or file:PATH"
    )))
}

fn reproduce(
    what: &Reproduce,
    report: impl Fn(Option<String>, serde_json::Value, Status, Option<Vec<ReproRow>>) -> Report,
) -> Result<Report, UsageError> {
    match what {
        Reproduce::Thm1 => {
            let chain = thm1_chain(&fairdiv::rational_int(5))?;
            let finding = audit_chain(
                Mechanism::RoundRobin,
                &chain,
                &fairdiv::rational(3, 5),
                &fairdiv::rational(3, 2),
            )?;
            let (results, status) = chain_report(&chain, &finding)?;
            Ok(report(None, results, status, None))
        }
        Reproduce::Thm4 => {
            let chain = thm4_chain(&fairdiv::rational_int(5), &fairdiv::rational(1, 100))?;
            let alpha = phi() - fairdiv::rational_int(1);
            let threshold = phi() - fairdiv::rational(1, 1_000_000_000);
            let finding = audit_chain(Mechanism::RoundRobin, &chain, &alpha, &threshold)?;
            let (results, status) = chain_report(&chain, &finding)?;
            Ok(report(None, results, status, None))
        }
        Reproduce::Thm5 { n, w, t } => {
            let inst = submodular_hard_instance(*n, *w, *t)?;
            let replay = inst.replay()?;
            let row = replay_row(&inst, &replay);
            let status = Status::from_bool(row.pass);
            Ok(report(None, replay_json(&inst, &replay)?, status, Some(vec![row])))
        }
        Reproduce::Xos { n, m } => {
            let inst = xos_hard_instance(*n, *m)?;
            let replay = inst.replay()?;
            let row = replay_row(&inst, &replay);
            let status = Status::from_bool(row.pass);
            Ok(report(None, replay_json(&inst, &replay)?, status, Some(vec![row])))
        }
        Reproduce::EnvyGraph { eps } => {
            let eps = parse_alpha(eps)?;
            let instances = envy_graph_hard_instances(&eps)?;
            let mut results = Vec::new();
            let mut rows = Vec::new();
            for inst in &instances {
                let replay = inst.replay()?;
                results.push(replay_json(inst, &replay)?);
                rows.push(replay_row(inst, &replay));
            }
            let status = Status::from_bool(rows.iter().all(|r| r.pass));
            Ok(report(None, json!({ "reproductions": results }), status, Some(rows)))
        }
        Reproduce::Thm3Mapping => {
            // The smallest known profitable round-robin manipulation: the
            // manipulator trades their 10-valued first pick to secure both
            // middle goods, moving from utility 18 to 19.
            let profile = vec![
                Valuation::additive_ints(&[10, 9, 8, 0]),
                Valuation::additive_ints(&[0, 10, 0, 9]),
            ];
            let witness = best_manipulation(
                Mechanism::RoundRobin,
                &profile,
                0,
                &MisreportFamily::AllOrders,
            )?;
            let truthful = run_mechanism(Mechanism::RoundRobin, &profile)?;
            let mut reported = profile.clone();
            reported[0] = witness.misreport.as_valuation(4);
            let manipulated = run_mechanism(Mechanism::RoundRobin, &reported)?;
            let mappings = build_stage_mappings(&profile[0], &truthful, &manipulated)?;
            let check = verify_factor_two_bound(&profile[0], &mappings, &manipulated)?;
            let status = Status::from_bool(check.bound_holds && witness.profitable());
            let results = json!({
                "instance": instance_json(&profile)?,
                "witness": witness_json(&witness)?,
                "stages": mappings.iter().map(stage_mapping_json).collect::<Vec<_>>(),
                "factor_two": factor_two_json(&check),
            });
            Ok(report(None, results, status, None))
        }
    }
}

/// Report body and verdict for a chain audit: pass when a deviation
/// meeting its claimed threshold was found.
fn chain_report(
    chain: &fairdiv::ProfileChain,
    finding: &AuditFinding,
) -> Result<(serde_json::Value, Status), UsageError> {
    let profiles = chain
        .profiles
        .iter()
        .map(|p| Ok(json!({ "name": p.name, "instance": instance_json(&p.profile)? })))
        .collect::<Result<Vec<_>, UsageError>>()?;
    let (finding_json, status) = match finding {
        AuditFinding::Deviation(w) => {
            let met = match w.ratio.as_finite() {
                Some(r) => *r >= w.claimed_ratio,
                None => true,
            };
            (json!({ "deviation": chain_witness_json(w) }), Status::from_bool(met))
        }
        AuditFinding::Unfair { profile, report } => (
            json!({ "unfair": { "profile": profile, "report": fairness_report_json(report) } }),
            Status::Pass,
        ),
    };
    Ok((json!({ "profiles": profiles, "finding": finding_json }), status))
}
