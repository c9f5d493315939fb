//! Batch CLI: enumerate weighted self-avoiding walks, estimate growth
//! constants, verify inequalities, and trace span-decomposition surgery.
//!
//! Every command reads one TOML config (see `configs/` at the repo root
//! for annotated examples), writes its artifacts under the config's
//! output directory, and exits 0 only if all requested checks passed.

mod artifacts;
mod cache;
mod config;
mod walkfile;

use anyhow::{anyhow, bail, Context, Result};
use bridgewalk::estimate::{estimate_constants, fekete_bounds};
use bridgewalk::height::check_holder;
use bridgewalk::surgery::{decompose, surgery_step, SurgeryError};
use bridgewalk::verify::{
    continuity_experiment, truncation_experiment, verify_inequalities, CheckResult, PropertyReport,
};
use bridgewalk::Walk;
use cache::{Cache, CacheStatus};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::Resolved;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bridgewalk",
    about = "Weighted self-avoiding walks, bridges and half-space walks on Cayley graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct Common {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for the enumeration (results are identical for any
    /// thread count).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Cache directory (default: $BRIDGEWALK_CACHE_DIR or
    /// .bridgewalk-cache beside the config).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Aggregate artifact format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Audit one in N cache hits by recomputing and byte-comparing.
    #[arg(long)]
    seed_audit: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate walks and write the binned aggregate table.
    Enumerate(Common),
    /// Certified bounds and point estimates for the growth constants.
    Estimate(Common),
    /// Run the full inequality suite against the enumerated table.
    Verify(Common),
    /// Continuity sandwiches between this config and [continuity].
    Continuity(Common),
    /// Truncation monotonicity and exactness over [truncation].eta_list.
    Truncation(Common),
    /// Decompose and surger the walks of [surgery].walks.
    SurgeryDemo(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&Common, Ctx) -> Result<bool>) = match &cli.command {
        Command::Enumerate(c) => (c, cmd_enumerate),
        Command::Estimate(c) => (c, cmd_estimate),
        Command::Verify(c) => (c, cmd_verify),
        Command::Continuity(c) => (c, cmd_continuity),
        Command::Truncation(c) => (c, cmd_truncation),
        Command::SurgeryDemo(c) => (c, cmd_surgery),
    };
    match setup(common).and_then(|ctx| run(common, ctx)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            // Config and schema problems exit 2, runtime failures exit 1.
            if e.to_string().contains("config") || e.downcast_ref::<toml::de::Error>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

struct Ctx {
    resolved: Resolved,
    cache: Cache,
    out_dir: PathBuf,
    audit: Option<u64>,
}

fn setup(common: &Common) -> Result<Ctx> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading config {:?}", common.config))?;
    let file = config::parse_config(&text).context("config")?;
    let config_dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut resolved = config::resolve(&file, &config_dir).context("config")?;
    resolved.cfg.threads = common.threads.max(1);
    let out_dir = common.out.clone().unwrap_or_else(|| resolved.out_dir.clone());
    let cache = Cache::new(cache::cache_dir(common.cache.as_deref(), &config_dir))?;
    Ok(Ctx {
        resolved,
        cache,
        out_dir,
        audit: common.seed_audit,
    })
}

fn table_for(ctx: &Ctx) -> Result<(bridgewalk::AggregateTable, CacheStatus)> {
    ctx.cache
        .get_or_compute(&ctx.resolved.cfg, &ctx.resolved.cfg.group, ctx.audit)
}

fn write_aggregates(
    common: &Common,
    out_dir: &Path,
    table: &bridgewalk::AggregateTable,
) -> Result<()> {
    if matches!(common.format, OutputFormat::Csv | OutputFormat::Both) {
        artifacts::write_atomic(&out_dir.join("aggregates.csv"), &artifacts::aggregates_csv(table))?;
    }
    if matches!(common.format, OutputFormat::Json | OutputFormat::Both) {
        artifacts::write_atomic(
            &out_dir.join("aggregates.json"),
            &artifacts::to_json_pretty(&table.to_dto())?,
        )?;
    }
    Ok(())
}

fn cmd_enumerate(common: &Common, ctx: Ctx) -> Result<bool> {
    let (table, status) = table_for(&ctx)?;
    write_aggregates(common, &ctx.out_dir, &table)?;
    println!(
        "enumerated {} walks into bins 0..={} ({} cache)",
        table.node_count,
        table.m_max,
        match status {
            CacheStatus::Miss => "cold",
            CacheStatus::Hit => "warm",
            CacheStatus::HitAudited => "warm, audited",
        }
    );
    Ok(true)
}

#[derive(Serialize)]
struct EstimateArtifact {
    config_digest: String,
    constants: bridgewalk::height::StructuralConstantsReport,
    bounds: bridgewalk::estimate::EstimateReport,
    estimates: bridgewalk::estimate::EstimateReport,
    holder: Option<bridgewalk::height::HolderReport>,
}

/// A configured Hölder certificate counts only if it provably covers the
/// whole support: analytically for the closed-form families, exhaustively
/// for finite supports.
fn holder_certified(resolved: &Resolved) -> (Option<bridgewalk::height::HolderReport>, bool) {
    match &resolved.holder {
        Some((eps, c)) => {
            let rep = check_holder(
                &resolved.cfg.weight,
                &resolved.cfg.length,
                &resolved.cfg.height,
                *eps,
                c,
                resolved.cfg.eta.as_ref(),
            );
            let certified = match rep.analytic_all_support {
                Some(v) => v,
                None => resolved.cfg.weight.has_finite_support() && rep.holds_on_checked_set,
            };
            (Some(rep), certified)
        }
        None => (None, false),
    }
}

fn cmd_estimate(common: &Common, ctx: Ctx) -> Result<bool> {
    let (table, _) = table_for(&ctx)?;
    write_aggregates(common, &ctx.out_dir, &table)?;
    let bounds = fekete_bounds(&table, &ctx.resolved.constants)?;
    let (holder_rep, certified) = holder_certified(&ctx.resolved);
    let estimates = estimate_constants(&table, certified)?;
    let mut caveats = Vec::new();
    if !bounds.graph_length_mode {
        caveats.push(
            "upper bounds need unit lengths and unit bins; only lower bounds are certified"
                .to_string(),
        );
    }
    let bounds_report = bounds.report(caveats);
    artifacts::write_atomic(
        &ctx.out_dir.join("sequences.csv"),
        &artifacts::sequences_csv(&estimates, &bounds_report),
    )?;
    let artifact = EstimateArtifact {
        config_digest: table.config_digest.clone(),
        constants: ctx.resolved.constants.report(),
        bounds: bounds_report,
        estimates,
        holder: holder_rep,
    };
    artifacts::write_atomic(
        &ctx.out_dir.join("estimate.json"),
        &artifacts::to_json_pretty(&artifact)?,
    )?;
    println!("estimate artifacts written to {:?}", ctx.out_dir);
    Ok(true)
}

fn print_report(report: &PropertyReport) {
    for check in &report.checks {
        let status = if check.skipped {
            "SKIP"
        } else if check.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{status} {} ({} instances) {}",
            check.name, check.instances, check.detail
        );
    }
    println!("overall: {}", if report.overall { "PASS" } else { "FAIL" });
}

fn write_report(ctx: &Ctx, name: &str, report: &PropertyReport) -> Result<()> {
    artifacts::write_atomic(
        &ctx.out_dir.join(name),
        &artifacts::to_json_pretty(report)?,
    )?;
    Ok(())
}

fn cmd_verify(common: &Common, ctx: Ctx) -> Result<bool> {
    let mut report = PropertyReport::default();
    let table = match table_for(&ctx) {
        Ok((table, status)) => {
            report.push(CheckResult {
                name: "cache-audit".into(),
                detail: format!("{status:?}"),
                instances: 1,
                passed: true,
                skipped: status == CacheStatus::Miss,
                worst_slack: None,
            });
            Some(table)
        }
        Err(e) if e.to_string().contains("cache audit failed") => {
            report.push(CheckResult {
                name: "cache-audit".into(),
                detail: e.to_string(),
                instances: 1,
                passed: false,
                skipped: false,
                worst_slack: None,
            });
            None
        }
        Err(e) => return Err(e),
    };

    let (holder_rep, certified) = holder_certified(&ctx.resolved);
    if let Some(rep) = &holder_rep {
        report.push(CheckResult {
            name: "holder-certificate-valid".into(),
            detail: format!(
                "epsilon = {}, C = {}, worst ratio {}",
                rep.epsilon, rep.c, rep.worst_ratio
            ),
            instances: rep.checked_steps as u64,
            passed: certified || rep.holds_on_checked_set,
            skipped: false,
            worst_slack: None,
        });
    }

    if let Some(table) = table {
        write_aggregates(common, &ctx.out_dir, &table)?;
        let holder_arg = ctx
            .resolved
            .holder
            .clone()
            .filter(|_| certified || holder_rep.as_ref().is_some_and(|r| r.holds_on_checked_set));
        let suite = verify_inequalities(&ctx.resolved.cfg, &table, &ctx.resolved.constants, holder_arg)?;
        for check in suite.checks {
            report.push(check);
        }
    }

    print_report(&report);
    write_report(&ctx, "report.json", &report)?;
    Ok(report.overall)
}

fn cmd_continuity(_common: &Common, ctx: Ctx) -> Result<bool> {
    let Some((other_weight, other_length, m_max)) = ctx.resolved.continuity.clone() else {
        bail!("config error: the continuity command needs a [continuity] section");
    };
    let report = continuity_experiment(
        &ctx.resolved.cfg.weight,
        &ctx.resolved.cfg.length,
        &other_weight,
        &other_length,
        &ctx.resolved.cfg.height,
        m_max,
        ctx.resolved.cfg.threads,
    )?;
    print_report(&report);
    write_report(&ctx, "report.json", &report)?;
    Ok(report.overall)
}

fn cmd_truncation(_common: &Common, ctx: Ctx) -> Result<bool> {
    let Some((eta_list, m)) = ctx.resolved.truncation.clone() else {
        bail!("config error: the truncation command needs a [truncation] section");
    };
    let report = truncation_experiment(
        &ctx.resolved.cfg.weight,
        &ctx.resolved.cfg.length,
        &ctx.resolved.cfg.height,
        &eta_list,
        m,
        ctx.resolved.cfg.threads,
    )?;
    print_report(&report);
    write_report(&ctx, "report.json", &report)?;
    Ok(report.overall)
}

#[derive(Serialize)]
struct SurgeryTrace {
    input: Vec<String>,
    heights: Vec<i64>,
    class: String,
    spans: Vec<i64>,
    cuts: Vec<usize>,
    output: Option<SurgeryOutput>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SurgeryOutput {
    vertices: Vec<String>,
    spans: Vec<i64>,
    weight: String,
    ell: String,
    connector: (usize, usize),
    inserted: usize,
}

fn cmd_surgery(_common: &Common, ctx: Ctx) -> Result<bool> {
    let Some((path, base)) = ctx.resolved.surgery.clone() else {
        bail!("config error: the surgery-demo command needs a [surgery] section");
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading walk file {path:?}"))?;
    let walks = walkfile::parse_walk_file(&ctx.resolved.cfg.group, &text)?;
    let mut traces = Vec::new();
    let mut ok = true;
    for steps in walks {
        let walk = Walk::from_steps(
            &ctx.resolved.cfg.group,
            &ctx.resolved.cfg.weight,
            &ctx.resolved.cfg.length,
            &ctx.resolved.cfg.height,
            base.clone(),
            steps,
        )
        .map_err(|e| anyhow!("walk file: {e}"))?;
        let deco = match decompose(&ctx.resolved.cfg.height, &walk) {
            Ok(d) => d,
            Err(e) => {
                ok = false;
                traces.push(SurgeryTrace {
                    input: walk.vertices.iter().map(|v| v.to_string()).collect(),
                    heights: walk.heights.clone(),
                    class: format!("{:?}", walk.class),
                    spans: vec![],
                    cuts: vec![],
                    output: None,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        let (output, error) = if deco.k() >= 2 {
            match surgery_step(
                &ctx.resolved.cfg.height,
                &ctx.resolved.constants,
                &ctx.resolved.cfg.weight,
                &ctx.resolved.cfg.length,
                &walk,
            ) {
                Ok(out) => (
                    Some(SurgeryOutput {
                        vertices: out.walk.vertices.iter().map(|v| v.to_string()).collect(),
                        spans: out.output_spans.clone(),
                        weight: bridgewalk::exact::format_rat(&out.walk.weight),
                        ell: bridgewalk::exact::format_rat(&out.walk.ell),
                        connector: out.connector,
                        inserted: out.inserted,
                    }),
                    None,
                ),
                Err(e @ (SurgeryError::Collision { .. } | SurgeryError::PostconditionViolated(_))) => {
                    ok = false;
                    (None, Some(e.to_string()))
                }
                Err(e) => {
                    ok = false;
                    (None, Some(e.to_string()))
                }
            }
        } else {
            (None, None)
        };
        traces.push(SurgeryTrace {
            input: walk.vertices.iter().map(|v| v.to_string()).collect(),
            heights: walk.heights.clone(),
            class: format!("{:?}", walk.class),
            spans: deco.spans,
            cuts: deco.cuts,
            output,
            error,
        });
    }
    artifacts::write_atomic(
        &ctx.out_dir.join("surgery.json"),
        &artifacts::to_json_pretty(&traces)?,
    )?;
    println!(
        "traced {} walks ({})",
        traces.len(),
        if ok { "all sound" } else { "failures present" }
    );
    Ok(ok)
}
