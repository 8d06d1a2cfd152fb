//! The `proq` command line: `run`, `compile`, `stats` and `generate`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use proq_core::cases::{bug_examples, build_shor, hhl_data, hhl_source, inject_bug, shor_source};
use proq_core::fmt::fmt_sig;
use proq_core::lang::{
    parse_program, print_program, semantic_function_observed, Executable, Mode, Program, Wire, DEFAULT_LOOP_CAP,
};
use proq_core::lower::{count_resources, emit_lowered, lower_program, LoweredAssertion, LoweredStep, ResourceCount};
use proq_core::numerics::ComplexMatrix;
use proq_core::states::{DensityOperator, StateVector};
use proq_core::stats::{theorem1_intervals, theorem2_report, AssertionCounts, DEFAULT_ALPHA};
use serde::Serialize;

use crate::campaign::{run_campaign, CampaignConfig};
use crate::report::{ReportInputs, RunReport, Sig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "proq", version, about = "Projection-based runtime assertions for quantum programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seeded debugging campaign and write a JSON report.
    Run(RunArgs),
    /// Lower every assertion to measurement-restricted form.
    Compile(CompileArgs),
    /// Print the confidence intervals for given shot and failure counts.
    Stats(StatsArgs),
    /// Write one of the built-in case-study programs.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Lowered,
    Direct,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Lowered => Mode::Lowered,
            ModeArg::Direct => Mode::Direct,
        }
    }
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    shots: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Declared error tolerance per assertion site, in program order.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = ModeArg::Lowered)]
    mode: ModeArg,
    /// Report path; the report goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Upper bound on the iterations of every loop.
    #[arg(long)]
    loop_cap: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the exact basis-state distribution arriving at this site as CSV.
    #[arg(long, value_name = "SITE")]
    dump_state: Option<String>,
    /// Destination of `--dump-state` (default `<SITE>.csv`).
    #[arg(long, requires = "dump_state")]
    dump_out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct CompileArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    site: Option<String>,
    /// Write the program with every assertion replaced by its lowered circuit.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Print the resource table.
    #[arg(long)]
    counts: bool,
}

#[derive(clap::Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    l: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, value_delimiter = ',')]
    failures: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    Shor,
    Hhl,
}

#[derive(clap::Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    case: CaseArg,
    /// Inject one of the named example bugs (Shor only).
    #[arg(long, value_parser = ["drop-h", "replace-cnot", "insert-x"])]
    bug: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Compile(a) => cmd_compile(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn load(path: &Path) -> anyhow::Result<(String, Program)> {
    let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let program = parse_program(&source).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    Ok((source, program))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    if a.shots == 0 {
        bail!("--shots must be positive");
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        bail!("--alpha must lie strictly between 0 and 1");
    }
    let (source, program) = load(&a.program)?;
    let mut exe = Executable::new(program, a.mode.into())?;
    if let Some(cap) = a.loop_cap {
        exe = exe.with_loop_cap(cap)?;
    }
    let config = CampaignConfig { shots: a.shots, seed: a.seed, jobs: a.jobs };
    let result = run_campaign(&exe, &config)?;
    let inputs = ReportInputs {
        source: &source,
        exe: &exe,
        seed: a.seed,
        alpha: a.alpha,
        epsilons: a.epsilons.as_deref(),
        loop_cap: a.loop_cap,
    };
    let report = RunReport::build(&inputs, &result)?;
    if let Some(site) = &a.dump_state {
        let csv = state_csv(&exe, site, a.loop_cap.unwrap_or(DEFAULT_LOOP_CAP))?;
        let path = a.dump_out.clone().unwrap_or_else(|| PathBuf::from(format!("{site}.csv")));
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    write_output(a.out.as_deref(), &report.to_json(), out)?;
    for s in &report.sites {
        writeln!(err, "{:<8} reached {:>8}  visits {:>8}  failures {:>8}", s.id, s.reached, s.visits, s.failures)?;
    }
    writeln!(
        err,
        "completed {}  loop-cap exceeded {}  shots {}",
        report.global.completed, report.global.loop_cap_exceeded, report.shots
    )?;
    Ok(if report.total_failures() > 0 || report.any_incorrect() { EXIT_FAILURES } else { EXIT_OK })
}

/// CSV of `(basis, probability)` for the program-register state arriving at
/// `site`, summed over every visit and normalized.
pub fn state_csv(exe: &Executable, site: &str, loop_cap: usize) -> anyhow::Result<String> {
    let index = exe.site_index(site).ok_or_else(|| anyhow!("no assertion site named {site}"))?;
    let n = exe.program().qubit_count;
    let mut acc: Option<ComplexMatrix> = None;
    let rho = DensityOperator::pure(&StateVector::zero(n));
    semantic_function_observed(exe, &rho, loop_cap, &mut |i, m| {
        if i == index {
            acc = Some(match acc.take() {
                Some(a) => &a + m,
                None => m.clone(),
            });
        }
    })?;
    let acc = acc.ok_or_else(|| anyhow!("site {site} is never reached"))?;
    let total = acc.trace().re;
    let mut csv = String::from("basis,probability\n");
    for k in 0..(1usize << n) {
        let p = if total > 0.0 { acc[(k, k)].re / total } else { 0.0 };
        let _ = writeln!(csv, "{:0width$b},{}", k, fmt_sig(p.max(0.0)), width = n);
    }
    Ok(csv)
}

fn wire_name(w: &Wire) -> String {
    match w {
        Wire::Qubit(q) => format!("q{q}"),
        Wire::Aux => String::from("aux"),
    }
}

fn describe(l: &LoweredAssertion, hand: bool, out: &mut String) {
    let qubits: Vec<String> = l.qubits.iter().map(|q| format!("q{q}")).collect();
    let origin = if hand { "hand circuit" } else { "automatic" };
    let _ = writeln!(out, "{} on {} ({origin})", l.site_id, qubits.join(", "));
    if l.is_abort_always() {
        let _ = writeln!(out, "  ABORT-ALWAYS");
        return;
    }
    if l.steps().is_empty() {
        let _ = writeln!(out, "  (no steps)");
    }
    for step in l.steps() {
        match step {
            LoweredStep::Apply { gate, wires, .. } => {
                let w: Vec<String> = wires.iter().map(wire_name).collect();
                let _ = writeln!(out, "  {} {}", gate.name(), w.join(", "));
            }
            LoweredStep::Check { wire, expect } => {
                let _ = writeln!(out, "  check {} expect {}", wire_name(wire), u8::from(*expect));
            }
        }
    }
}

/// Fixed-width resource table with one row per site.
pub fn counts_table(rows: &[(String, ResourceCount)]) -> String {
    let width = rows.iter().map(|(id, _)| id.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>7}  {:>3}",
        "site", "H", "CNOT", "other", "generic-U", "measure", "aux"
    );
    for (id, c) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>7}  {:>3}",
            id,
            c.h_gates,
            c.cnot_gates,
            c.other(),
            c.generic_unitaries,
            c.measurements,
            c.aux_qubits
        );
    }
    out
}

fn cmd_compile(a: &CompileArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (_, program) = load(&a.program)?;
    let lowered = lower_program(&program)?;
    if let Some(site) = &a.site {
        if !lowered.iter().any(|l| &l.site_id == site) {
            bail!("no assertion site named {site}");
        }
    }
    let selected: Vec<&LoweredAssertion> =
        lowered.iter().filter(|l| a.site.as_ref().is_none_or(|s| *s == l.site_id)).collect();
    let mut text = String::new();
    let mut rows = Vec::new();
    for l in &selected {
        let hand = program.site(&l.site_id).is_some_and(|s| s.circuit.is_some());
        describe(l, hand, &mut text);
        rows.push((l.site_id.clone(), count_resources(l, None)?));
    }
    if a.counts {
        text.push('\n');
        text.push_str(&counts_table(&rows));
    }
    out.write_all(text.as_bytes())?;
    if let Some(path) = &a.emit {
        let emitted = emit_lowered(&program, &lowered);
        std::fs::write(path, print_program(&emitted)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SegmentRecord {
    w_minus: Sig,
    w_center: Sig,
    w_plus: Sig,
    epsilon: Option<Sig>,
    verdict: Option<&'static str>,
}

#[derive(Serialize)]
struct Theorem2Record {
    segments: Vec<SegmentRecord>,
    delta: Sig,
}

#[derive(Serialize)]
struct StatsRecord {
    theorem1: crate::report::Theorem1Record,
    theorem2: Option<Theorem2Record>,
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let t1 = theorem1_intervals(a.l, a.k)?;
    let theorem1 = crate::report::Theorem1Record {
        d_interval: [Sig(0.0), Sig(t1.d_hi)],
        f_interval: [Sig(t1.f_lo), Sig(1.0)],
        well_sampled: t1.well_sampled,
    };
    let theorem2 = match &a.failures {
        None => {
            if a.epsilons.is_some() {
                bail!("--epsilons needs --failures");
            }
            None
        }
        Some(f) => {
            if f.len() as u64 != a.l {
                bail!("{} failure counts given for l = {}", f.len(), a.l);
            }
            let counts = AssertionCounts { failures: f.clone(), shots: a.k };
            let r = theorem2_report(&counts, a.epsilons.as_deref(), a.alpha)?;
            Some(Theorem2Record {
                segments: r
                    .segments
                    .iter()
                    .map(|s| SegmentRecord {
                        w_minus: Sig(s.w_minus),
                        w_center: Sig(s.w_center),
                        w_plus: Sig(s.w_plus),
                        epsilon: s.epsilon.map(Sig),
                        verdict: s.verdict.map(|v| v.as_str()),
                    })
                    .collect(),
                delta: Sig(r.delta),
            })
        }
    };
    let mut text = serde_json::to_string_pretty(&StatsRecord { theorem1, theorem2 })?;
    text.push('\n');
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

/// Source text of a built-in case study, optionally with a named bug injected.
pub fn case_source(case: &str, bug: Option<&str>) -> anyhow::Result<String> {
    match (case, bug) {
        ("shor", None) => Ok(shor_source()),
        ("hhl", None) => Ok(hhl_source(&hhl_data()?)),
        ("shor", Some(name)) => {
            let example = bug_examples().into_iter().find(|b| b.name == name).ok_or_else(|| anyhow!("unknown bug {name}"))?;
            Ok(print_program(&inject_bug(&build_shor(), &example.spec)?))
        }
        ("hhl", Some(_)) => bail!("bugs are defined for the Shor program only"),
        _ => bail!("unknown case {case}"),
    }
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let case = match a.case {
        CaseArg::Shor => "shor",
        CaseArg::Hhl => "hhl",
    };
    let text = case_source(case, a.bug.as_deref())?;
    write_output(a.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}
