//! Command-line front end. Exit status: 0 when every check passes, 1 when
//! a check fails, 2 for unreadable or invalid input.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::generate_corpus;
use crate::decomp::induced_gog;
use crate::gog::{fundamental_presentation, reduce, GraphOfGroups, Merge, ReductionPolicy};
use crate::graph::spanning_tree;
use crate::io::{emit_annex, emit_instance, emit_quotient, parse_instance_unchecked, parse_instance_with, parse_quotient};
use crate::pgroup::GroupLimits;
use crate::quotient::OpenSubgroupSpec;
use crate::verify::{
    audit_decomposition, audit_instance, check_limitation, check_reduction_confluence, partition_diagnostics,
};
use crate::wilkes::{build_chain_gog, build_stage, verify_stage};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pgog", version, about = "Graphs of finite p-groups and their finite-index subgroups")]
struct Cli {
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    /// Largest group order to build.
    #[arg(long, global = true, default_value_t = GroupLimits::default().order_cap)]
    order_cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the graph-of-groups invariants of an instance file.
    Validate { instance: PathBuf },
    /// Collapse fictitious edges until the graph of groups is reduced.
    Reduce {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::Canonical)]
        order: Order,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the presentation of the fundamental group.
    Present { instance: PathBuf },
    /// Build the induced decomposition of the subgroup named by a quotient file.
    Decompose {
        instance: PathBuf,
        #[arg(long)]
        quotient: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the transversal (source object and representative of each new object).
        #[arg(long)]
        annex: Option<PathBuf>,
    },
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Build and check the stages of the tower construction.
    Wilkes(WilkesArgs),
    /// Generate and audit random instances.
    Corpus {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write each instance and its quotient file here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Compare edge counts of the reduced decomposition and the input.
    Limitation {
        instance: PathBuf,
        #[arg(long)]
        quotient: PathBuf,
    },
    /// Reduce in canonical and random orders and compare the results.
    Confluence {
        instance: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fixed and moved vertices under an index-p normal subgroup.
    Partition {
        instance: PathBuf,
        #[arg(long)]
        quotient: PathBuf,
    },
}

#[derive(Debug, Args)]
struct WilkesArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, conflicts_with = "emit_chain", required_unless_present = "emit_chain")]
    stage: Option<u32>,
    /// Emit the chain of the first M stages as an instance file.
    #[arg(long, value_name = "M")]
    emit_chain: Option<u32>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Order {
    Canonical,
    Random,
}

struct Invalid(String);

impl<E: Display> From<E> for Invalid {
    fn from(e: E) -> Self {
        Invalid(e.to_string())
    }
}

type Outcome = Result<i32, Invalid>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    json: bool,
    limits: GroupLimits,
}

impl Ctx<'_> {
    fn emit<T: Serialize>(&mut self, report: &T, text: impl FnOnce() -> String) -> Result<(), Invalid> {
        if self.json {
            writeln!(self.out, "{}", serde_json::to_string_pretty(report)?)?;
        } else {
            write!(self.out, "{}", text())?;
        }
        Ok(())
    }

    fn instance(&self, path: &Path) -> Result<GraphOfGroups, Invalid> {
        let text = read(path)?;
        parse_instance_with(&text, &self.limits).map_err(|e| Invalid(format!("{}: {e}", path.display())))
    }

    fn spec(&self, instance: &Path, quotient: &Path) -> Result<OpenSubgroupSpec, Invalid> {
        let g = Arc::new(self.instance(instance)?);
        parse_quotient(g, &read(quotient)?).map_err(|e| Invalid(format!("{}: {e}", quotient.display())))
    }
}

fn read(path: &Path) -> Result<String, Invalid> {
    std::fs::read_to_string(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Invalid> {
    std::fs::write(path, text).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FINDING
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

/// Run one command line, writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let mut ctx = Ctx { out, json: cli.json, limits: GroupLimits::with_cap(cli.order_cap) };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, ctx: &mut Ctx<'_>) -> Outcome {
    match command {
        Command::Validate { instance } => validate(ctx, &instance),
        Command::Reduce { instance, order, seed, output } => {
            let policy = match (order, seed) {
                (Order::Canonical, _) => ReductionPolicy::Canonical,
                (Order::Random, Some(s)) => ReductionPolicy::Random(s),
                (Order::Random, None) => return Err(Invalid("--order random requires --seed".into())),
            };
            reduce_cmd(ctx, &instance, policy, output.as_deref())
        }
        Command::Present { instance } => present(ctx, &instance),
        Command::Decompose { instance, quotient, output, annex } => {
            decompose(ctx, &instance, &quotient, output.as_deref(), annex.as_deref())
        }
        Command::Verify(VerifyCommand::Limitation { instance, quotient }) => limitation(ctx, &instance, &quotient),
        Command::Verify(VerifyCommand::Confluence { instance, trials, seed }) => {
            let seed = seed.ok_or_else(|| Invalid("verify confluence requires --seed".into()))?;
            confluence(ctx, &instance, trials, seed)
        }
        Command::Verify(VerifyCommand::Partition { instance, quotient }) => partition(ctx, &instance, &quotient),
        Command::Wilkes(args) => wilkes(ctx, args),
        Command::Corpus { count, seed, out_dir } => {
            let seed = seed.ok_or_else(|| Invalid("corpus requires --seed".into()))?;
            corpus(ctx, count, seed, out_dir.as_deref())
        }
    }
}

fn validate(ctx: &mut Ctx<'_>, path: &Path) -> Outcome {
    let text = read(path)?;
    let (g, report) = parse_instance_unchecked(&text, &ctx.limits)?;
    let ok = report.is_valid();
    #[derive(Serialize)]
    struct Out<'a> {
        valid: bool,
        vertices: usize,
        edges: usize,
        reduced: bool,
        violations: &'a [crate::gog::Violation],
    }
    let out = Out {
        valid: ok,
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        reduced: g.is_reduced(),
        violations: &report.violations,
    };
    ctx.emit(&out, || {
        let mut s = format!(
            "{}: {} vertices, {} edges, {}\n",
            path.display(),
            out.vertices,
            out.edges,
            if out.reduced { "reduced" } else { "not reduced" }
        );
        for v in out.violations {
            s.push_str(&format!("  violation: {v}\n"));
        }
        s.push_str(if ok { "valid\n" } else { "invalid\n" });
        s
    })?;
    Ok(status(ok))
}

fn reduce_cmd(ctx: &mut Ctx<'_>, path: &Path, policy: ReductionPolicy, output: Option<&Path>) -> Outcome {
    let g = ctx.instance(path)?;
    let r = reduce(&g, policy);
    let text = emit_instance(&r.gog);
    #[derive(Serialize)]
    struct Out<'a> {
        vertices: usize,
        edges: usize,
        merges: &'a [Merge],
    }
    match output {
        Some(o) => {
            write_file(o, &text)?;
            let out = Out { vertices: r.gog.vertex_count(), edges: r.gog.edge_count(), merges: &r.merges };
            ctx.emit(&out, || {
                let mut s = String::new();
                for m in out.merges {
                    s.push_str(&format!("collapsed {}: {} -> {}\n", m.edge, m.absorbed, m.survivor));
                }
                s.push_str(&format!("reduced: {} vertices, {} edges\n", out.vertices, out.edges));
                s
            })?;
        }
        None => write!(ctx.out, "{text}")?,
    }
    Ok(EXIT_PASS)
}

fn present(ctx: &mut Ctx<'_>, path: &Path) -> Outcome {
    let g = ctx.instance(path)?;
    let root = g.graph().vertices().min().ok_or_else(|| Invalid("empty graph".into()))?;
    let tree = spanning_tree(g.graph(), root)?;
    let pres = fundamental_presentation(&g, &tree, root)?;
    ctx.emit(&pres, || {
        let gens: Vec<String> = pres.generators.iter().map(ToString::to_string).collect();
        let mut s = format!("generators ({}): {}\n", gens.len(), gens.join(" "));
        s.push_str(&format!("relators ({}):\n", pres.relators.len()));
        for r in &pres.relators {
            s.push_str(&format!("  {}\n", r.word));
        }
        s
    })?;
    Ok(EXIT_PASS)
}

fn decompose(
    ctx: &mut Ctx<'_>,
    instance: &Path,
    quotient: &Path,
    output: Option<&Path>,
    annex: Option<&Path>,
) -> Outcome {
    let spec = ctx.spec(instance, quotient)?;
    let d = induced_gog(&spec)?;
    let audit = audit_decomposition(&d);
    let text = emit_instance(&d.delta0);
    if let Some(a) = annex {
        write_file(a, &emit_annex(&d.standard))?;
    }
    match output {
        Some(o) => {
            write_file(o, &text)?;
            #[derive(Serialize)]
            struct Out<'a> {
                index: usize,
                vertices: usize,
                edges: usize,
                audit: &'a crate::verify::DecompositionAudit,
            }
            let out = Out { index: spec.index, vertices: d.delta0.vertex_count(), edges: d.delta0.edge_count(), audit: &audit };
            ctx.emit(&out, || {
                format!(
                    "index {}: {} vertices, {} edges\nconnected {}\nboundaries injective {}\nedge stabilizers two-sided {}\nfibre accounting {}\n",
                    out.index,
                    out.vertices,
                    out.edges,
                    mark(audit.connected),
                    mark(audit.boundaries_injective),
                    mark(audit.two_sided),
                    mark(audit.accounting.iter().all(|a| a.ok)),
                )
            })?;
        }
        None => write!(ctx.out, "{text}")?,
    }
    Ok(status(audit.holds()))
}

fn limitation(ctx: &mut Ctx<'_>, instance: &Path, quotient: &Path) -> Outcome {
    let spec = ctx.spec(instance, quotient)?;
    let r = check_limitation(&spec)?;
    let findings = r.findings();
    ctx.emit(&r, || {
        let mut s = format!(
            "p={} index={} normal={}\nV_gamma={} E_gamma={}\nV_delta0={} E_delta0={}\nV_delta={} E_delta={}\n",
            r.p, r.index, r.normal, r.v_gamma, r.e_gamma, r.v_delta0, r.e_delta0, r.v_delta, r.e_delta
        );
        if let Some(ok) = r.holds_lower {
            s.push_str(&format!("E_delta >= E_gamma {}\n", mark(ok)));
        }
        if let Some(ok) = r.holds_strict {
            s.push_str(&format!("E_delta > E_gamma {}\n", mark(ok)));
        }
        s.push_str(&format!(
            "upper bounds {}\neuler characteristic {}\n",
            mark(r.holds_upper_edges && r.holds_upper_vertices && r.holds_upper_total),
            mark(r.euler_multiplicative)
        ));
        s
    })?;
    Ok(status(findings.is_empty()))
}

fn confluence(ctx: &mut Ctx<'_>, instance: &Path, trials: usize, seed: u64) -> Outcome {
    let g = ctx.instance(instance)?;
    let r = check_reduction_confluence(&g, trials, seed);
    ctx.emit(&r, || {
        let mut s = String::new();
        for o in &r.outcomes {
            let label = o.seed.map_or("canonical".to_string(), |s| format!("seed {s}"));
            s.push_str(&format!("{label}: {} vertices, {} edges\n", o.vertices, o.edges));
        }
        s.push_str(&format!("confluent {}\neuler characteristic {}\n", mark(r.confluent), mark(r.euler_preserved)));
        s
    })?;
    Ok(status(r.confluent && r.euler_preserved))
}

fn partition(ctx: &mut Ctx<'_>, instance: &Path, quotient: &Path) -> Outcome {
    let spec = ctx.spec(instance, quotient)?;
    let r = partition_diagnostics(&spec)?;
    ctx.emit(&r, || {
        let ids = |v: &[crate::graph::VertexId]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let mut s = format!("fixed: {}\nmoved: {}\n", ids(&r.v1), ids(&r.v2));
        for (e, c) in &r.edge_classes {
            s.push_str(&format!("{e}: {c:?}\n"));
        }
        s.push_str(&format!(
            "bound={} E_gamma={} E_delta={}\nE_gamma <= bound <= E_delta {}\n",
            r.bound,
            r.e_gamma,
            r.e_delta,
            mark(r.holds())
        ));
        s
    })?;
    Ok(status(r.holds()))
}

fn wilkes(ctx: &mut Ctx<'_>, args: WilkesArgs) -> Outcome {
    if let Some(m) = args.emit_chain {
        let g = build_chain_gog(args.p, m, &ctx.limits)?;
        let text = emit_instance(&g);
        match &args.output {
            Some(o) => {
                write_file(o, &text)?;
                writeln!(ctx.out, "chain of {m} stages: {} vertices, {} edges", g.vertex_count(), g.edge_count())?;
            }
            None => write!(ctx.out, "{text}")?,
        }
        return Ok(EXIT_PASS);
    }
    let n = args.stage.expect("clap requires --stage without --emit-chain");
    let stage = build_stage(args.p, n, &ctx.limits)?;
    let r = verify_stage(&stage);
    ctx.emit(&r, || {
        let mut s = format!(
            "p={} n={} |H|={} |K|={} |G|={} (expected p^{})\n",
            r.p, r.n, r.order_h, r.order_k, r.order_g, r.expected_exponent
        );
        for (name, ok) in &r.checks {
            s.push_str(&format!("  {name}: {}\n", mark(*ok)));
        }
        s
    })?;
    Ok(status(r.passed()))
}

#[derive(Serialize)]
struct CorpusLine {
    index: usize,
    seed: u64,
    p: u32,
    vertices: usize,
    edges: usize,
    subgroup_index: usize,
    e_delta: usize,
    findings: Vec<&'static str>,
}

fn corpus(ctx: &mut Ctx<'_>, count: usize, seed: u64, out_dir: Option<&Path>) -> Outcome {
    let instances = generate_corpus(count, seed);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Invalid(format!("{}: {e}", dir.display())))?;
        for inst in &instances {
            write_file(&dir.join(format!("instance_{:04}.json", inst.index)), &emit_instance(inst.gog()))?;
            write_file(&dir.join(format!("quotient_{:04}.json", inst.index)), &emit_quotient(&inst.spec))?;
        }
    }
    let lines: Vec<Result<CorpusLine, String>> = instances
        .par_iter()
        .map(|inst| {
            let a = audit_instance(&inst.spec).map_err(|e| format!("instance {}: {e}", inst.index))?;
            Ok(CorpusLine {
                index: inst.index,
                seed: inst.seed,
                p: inst.p(),
                vertices: inst.gog().vertex_count(),
                edges: inst.gog().edge_count(),
                subgroup_index: inst.spec.index,
                e_delta: a.limitation.e_delta,
                findings: a.findings(),
            })
        })
        .collect();
    let lines: Vec<CorpusLine> = lines.into_iter().collect::<Result<_, _>>().map_err(Invalid)?;
    let failed = lines.iter().filter(|l| !l.findings.is_empty()).count();
    ctx.emit(&lines, || {
        let mut s = String::new();
        for l in &lines {
            s.push_str(&format!(
                "{:4} p={} V={} E={} index={} E_delta={} {}\n",
                l.index,
                l.p,
                l.vertices,
                l.edges,
                l.subgroup_index,
                l.e_delta,
                if l.findings.is_empty() { "ok".to_string() } else { l.findings.join(", ") }
            ));
        }
        s.push_str(&format!("{} instances, {} with findings\n", lines.len(), failed));
        s
    })?;
    Ok(status(failed == 0))
}
