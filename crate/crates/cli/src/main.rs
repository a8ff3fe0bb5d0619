//! `gadgetforge` command-line frontend. Pipelines pass files between
//! subcommands; `--json` switches stdout to one machine-readable object.
//!
//! Exit status: 0 on success, 1 when a checked property fails, 2 for usage
//! and input errors.

mod files;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use files::{read_json, Emit};
use gadgetforge::bounds::{
    bound_limit, bound_ratio, decimal_trunc, max01_from_atsp12_bound, render_table, GadgetCostProfile, Ratio,
};
use gadgetforge::gadgets::{make_parity_gadget, make_three_eq_gadget, verify_parity_gadget, verify_three_eq_gadget};
use gadgetforge::hybrid::{expand, generate_mini, Assignment, HybridInstance, MatchingMode, MaxE3LinInstance, MiniSpec, ThreeEqWiring};
use gadgetforge::oracle::{exact_opt, exhaustive_opt, SolveBudget, BUDGET_ENV};
use gadgetforge::reduce::{
    assignment_from_tour, audit_ledger, build, is_consistent, make_consistent, tour_from_assignment, InstanceFile,
    ReducedInstance, Regime,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gadgetforge", version, about = "Hybrid-problem reductions to bounded-metric TSP and ATSP")]
struct Cli {
    /// Print one JSON object on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a mini Hybrid instance or a random E3-LIN instance.
    Generate(GenerateArgs),
    /// Expand an E3-LIN instance into a Hybrid instance.
    Expand(IoArgs),
    /// Compile a Hybrid instance for one target problem.
    Reduce(ReduceArgs),
    /// Build the tour of an assignment.
    Tour(TourArgs),
    /// Read an assignment off a tour.
    Extract(TourFileArgs),
    /// Rewrite a tour into a consistent one that is no longer.
    Normalize(TourFileArgs),
    /// Exhaustively verify the gadgets.
    VerifyGadgets(VerifyArgs),
    /// Attribute a tour's length to gadget blocks.
    Audit(AuditArgs),
    /// Solve a reduced instance exactly.
    Solve(SolveArgs),
    /// Lower-bound arithmetic.
    Ratio(RatioArgs),
    /// Write the distance matrix of a reduced instance.
    Export(ExportArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["mini", "e3"])))]
struct GenerateArgs {
    /// Circle lengths of a mini instance, comma separated.
    #[arg(long, value_delimiter = ',')]
    mini: Option<Vec<usize>>,
    /// Generate a random E3-LIN instance instead.
    #[arg(long)]
    e3: bool,
    #[arg(long, value_enum, default_value = "deterministic")]
    matching: Matching,
    /// Number of three-variable equations of a mini instance.
    #[arg(long, default_value_t = 0)]
    three_eqs: usize,
    /// Variables of an E3-LIN instance.
    #[arg(long, default_value_t = 6)]
    vars: usize,
    /// Equations of an E3-LIN instance.
    #[arg(long, default_value_t = 4)]
    equations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Matching {
    Deterministic,
    Random,
    None,
}

#[derive(Args)]
struct IoArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    target: Regime,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("phi").required(true).args(["assignment", "zeros", "best"])))]
struct TourArgs {
    /// Reduced instance.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Use the all-zero assignment.
    #[arg(long)]
    zeros: bool,
    /// Use an optimal assignment found by brute force.
    #[arg(long)]
    best: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TourFileArgs {
    /// Reduced instance.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    tour: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Reduced instance.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    tour: PathBuf,
    /// List every block, not only those above their constant.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// A regime name or `all`.
    #[arg(long, default_value = "all")]
    regime: String,
}

#[derive(Args)]
struct SolveArgs {
    /// Reduced instance.
    #[arg(short, long)]
    input: PathBuf,
    /// Held-Karp dynamic programming (the default).
    #[arg(long, conflicts_with = "exhaustive")]
    exact: bool,
    /// Plain permutation search, at most 9 vertices.
    #[arg(long)]
    exhaustive: bool,
    /// Vertex cap; falls back to GADGETFORGE_BUDGET, then 20.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the optimal tour here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["table", "problem"])))]
struct RatioArgs {
    #[arg(long)]
    table: bool,
    /// With --table, print CSV.
    #[arg(long, requires = "table")]
    csv: bool,
    /// atsp12, atsp14, tsp12, tsp14 or max01.
    #[arg(long)]
    problem: Option<String>,
    /// Rational `p/q`, integer or decimal; omit with --k for the limit.
    #[arg(long, requires = "problem", requires = "k")]
    delta: Option<String>,
    #[arg(long, requires = "problem", requires = "delta")]
    k: Option<i64>,
}

#[derive(Args)]
struct ExportArgs {
    /// Reduced instance.
    #[arg(short, long)]
    input: PathBuf,
    /// TSPLIB full matrix (the default).
    #[arg(long, conflicts_with = "matrix")]
    tsplib: bool,
    /// JSON mirror of the distance matrix.
    #[arg(long)]
    matrix: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Successful run; `ok` is false when a checked property failed.
struct Outcome {
    ok: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome { ok: true }) => ExitCode::SUCCESS,
        Ok(Outcome { ok: false }) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Generate(a) => generate(a, json),
        Cmd::Expand(a) => {
            let e3: MaxE3LinInstance = read_json(&a.input)?;
            let h = expand(&e3)?;
            let report = hybrid_summary(&h);
            let text = format!("expanded {} equations into {} circles", e3.equations.len(), h.n());
            Emit::new(json, a.output).artifact("instance", &h)?.finish(report, text)
        }
        Cmd::Reduce(a) => {
            let h: HybridInstance = read_json(&a.input)?;
            let inst = build(&h, a.target)?;
            let report = json!({
                "target": a.target.name(),
                "vertices": inst.size(),
                "base": inst.base(),
                "slack": inst.slack(),
                "shape": shape_name(&h),
            });
            let text = format!(
                "{}: {} vertices, base {}, slack {} per violated equation",
                a.target,
                inst.size(),
                inst.base(),
                inst.slack()
            );
            Emit::new(json, a.output).artifact("instance", &inst.to_file())?.finish(report, text)
        }
        Cmd::Tour(a) => tour(a, json),
        Cmd::Extract(a) => extract(a, json),
        Cmd::Normalize(a) => normalize(a, json),
        Cmd::VerifyGadgets(a) => verify(a, json),
        Cmd::Audit(a) => audit(a, json),
        Cmd::Solve(a) => solve(a, json),
        Cmd::Ratio(a) => ratio(a, json),
        Cmd::Export(a) => export(a, json),
    }
}

fn shape_name(h: &HybridInstance) -> String {
    format!("{:?}", h.shape()).to_lowercase()
}

fn hybrid_summary(h: &HybridInstance) -> Value {
    json!({
        "circles": h.n(),
        "variables": h.var_count(),
        "m2": h.m2(),
        "m3": h.m3(),
        "shape": shape_name(h),
    })
}

fn load_instance(path: &PathBuf) -> Result<ReducedInstance> {
    let f: InstanceFile = read_json(path)?;
    ReducedInstance::from_file(&f).with_context(|| format!("instance {}", path.display()))
}

fn load_tour(inst: &ReducedInstance, path: &PathBuf) -> Result<gadgetforge::metric::Tour> {
    let tags: Vec<String> = read_json(path)?;
    let t = inst.tour_from_tags(&tags)?;
    gadgetforge::metric::validate_tour(inst.size(), &t)?;
    Ok(t)
}

fn generate(a: GenerateArgs, json: bool) -> Result<Outcome> {
    if a.e3 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let e3 = MaxE3LinInstance::random(a.vars, a.equations, &mut rng);
        let report = json!({ "variables": e3.occurrences().len(), "equations": e3.equations.len() });
        let text = format!("{} equations over {} variables", e3.equations.len(), e3.occurrences().len());
        return Emit::new(json, a.output).artifact("instance", &e3)?.finish(report, text);
    }
    let lengths = a.mini.expect("clap requires --mini or --e3");
    let spec = MiniSpec {
        circle_lengths: lengths,
        matching: match a.matching {
            Matching::Deterministic => MatchingMode::Deterministic,
            Matching::Random => MatchingMode::Random,
            Matching::None => MatchingMode::None,
        },
        three_eqs: ThreeEqWiring::Random(a.three_eqs),
    };
    let h = generate_mini(&spec, a.seed)?;
    let mut report = hybrid_summary(&h);
    let mut text = format!("{} circles, {} variables, m2 = {}, m3 = {}", h.n(), h.var_count(), h.m2(), h.m3());
    match h.max_sat_bruteforce() {
        Ok((_, u)) => {
            report["u_min"] = json!(u);
            text.push_str(&format!(", u_min = {u}"));
        }
        Err(_) => report["u_min"] = Value::Null,
    }
    Emit::new(json, a.output).artifact("instance", &h)?.finish(report, text)
}

fn tour(a: TourArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let h = inst.hybrid();
    let phi = if let Some(p) = &a.assignment {
        read_json::<Assignment>(p)?
    } else if a.zeros {
        Assignment::zeros(h)
    } else {
        h.max_sat_bruteforce()?.0
    };
    let t = tour_from_assignment(&inst, &phi)?;
    let len = inst.tour_length(&t)? as i64;
    let u = h.unsat_count(&phi)? as i64;
    let bound = inst.base() + inst.slack() * u;
    let ok = len <= bound;
    let report = json!({ "length": len, "unsat": u, "base": inst.base(), "bound": bound, "ok": ok });
    let text = format!("length {len}, unsat {u}, bound base + c·u = {bound}");
    Emit::new(json, a.output)
        .artifact("tour", &inst.tour_to_tags(&t))?
        .finish_with(report, text, ok)
}

fn extract(a: TourFileArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let t = load_tour(&inst, &a.tour)?;
    let before = inst.tour_length(&t)? as i64;
    let ex = assignment_from_tour(&inst, &t)?;
    let after = inst.tour_length(&ex.tour)? as i64;
    let sound = inst.slack() * ex.unsat as i64 <= after - inst.base();
    let ok = sound && after <= before;
    let report = json!({
        "unsat": ex.unsat,
        "length_before": before,
        "length_after": after,
        "base": inst.base(),
        "ok": ok,
    });
    let text = format!(
        "unsat {} from a tour of length {after} (was {before}); base {}",
        ex.unsat,
        inst.base()
    );
    Emit::new(json, a.output).artifact("assignment", &ex.assignment)?.finish_with(report, text, ok)
}

fn normalize(a: TourFileArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let t = load_tour(&inst, &a.tour)?;
    let before = inst.tour_length(&t)?;
    let out = make_consistent(&inst, &t)?;
    let after = inst.tour_length(&out)?;
    let consistent = is_consistent(&inst, &out);
    let ok = consistent && after <= before;
    let report = json!({ "length_before": before, "length_after": after, "consistent": consistent, "ok": ok });
    let text = format!(
        "length {before} -> {after}, {}",
        if consistent { "consistent" } else { "not consistent" }
    );
    Emit::new(json, a.output)
        .artifact("tour", &inst.tour_to_tags(&out))?
        .finish_with(report, text, ok)
}

fn verify(a: VerifyArgs, json: bool) -> Result<Outcome> {
    let regimes: Vec<Regime> = if a.regime == "all" {
        Regime::ALL.to_vec()
    } else {
        vec![a.regime.parse().map_err(|e: String| anyhow!(e))?]
    };
    let mut ok = true;
    let mut reports = Vec::new();
    let mut text = Vec::new();
    for r in regimes {
        let p = verify_parity_gadget(&make_parity_gadget(r))?;
        ok &= p.passed;
        text.push(format!("{:<28} {}", p.gadget, if p.passed { "pass" } else { "FAIL" }));
        reports.push(serde_json::to_value(&p)?);
        for neg in [false, true] {
            let t = verify_three_eq_gadget(&make_three_eq_gadget(r, neg), r.directed())?;
            ok &= t.passed;
            let consts = t.constants.map_or(String::new(), |(s, u)| format!(" (satisfied {s}, unsatisfied {u})"));
            text.push(format!(
                "{:<28} {}{consts}",
                t.gadget,
                if t.passed { "pass" } else { "FAIL" }
            ));
            for f in &t.failures {
                text.push(format!("  {f}"));
            }
            reports.push(serde_json::to_value(&t)?);
        }
    }
    Emit::new(json, None).finish_with(json!({ "ok": ok, "gadgets": reports }), text.join("\n"), ok)
}

fn audit(a: AuditArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let t = load_tour(&inst, &a.tour)?;
    let led = audit_ledger(&inst, &t)?;
    let ok = led.total() == Ratio::from_integer(led.tour_length as i64);
    let mut text = vec![format!(
        "length {} = base {} + {}; ledger total {}",
        led.tour_length,
        led.base,
        led.excess(),
        led.total()
    )];
    for e in &led.entries {
        if a.all || e.slack() != Ratio::from_integer(0) {
            text.push(format!("  {:<24} {:>6} (constant {})", e.block.to_string(), e.local.to_string(), e.constant));
        }
    }
    let report = json!({
        "tour_length": led.tour_length,
        "base": led.base,
        "total": led.total().to_string(),
        "consistent": is_consistent(&inst, &t),
        "entries": led
            .entries
            .iter()
            .map(|e| json!({ "block": e.block.to_string(), "local": e.local.to_string(), "constant": e.constant }))
            .collect::<Vec<_>>(),
        "ok": ok,
    });
    Emit::new(json, None).finish_with(report, text.join("\n"), ok)
}

fn solve(a: SolveArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let budget = match a.budget {
        Some(b) => SolveBudget::new(b),
        None => SolveBudget::dp_from_env(),
    };
    let (opt, t) = if a.exhaustive {
        exhaustive_opt(inst.metric(), budget)
    } else {
        exact_opt(inst.metric(), budget)
    }
    .with_context(|| format!("budget can be raised with --budget or {BUDGET_ENV}"))?;
    let excess = opt as i64 - inst.base();
    let report = json!({
        "optimum": opt,
        "base": inst.base(),
        "slack": inst.slack(),
        "implied_u_min": if excess % inst.slack() == 0 { json!(excess / inst.slack()) } else { Value::Null },
    });
    let text = format!("optimum {opt} (base {}, excess {excess})", inst.base());
    Emit::new(json, a.output)
        .artifact("tour", &inst.tour_to_tags(&t))?
        .finish(report, text)
}

fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let scale = 10i64.checked_pow(digits).ok_or_else(|| anyhow!("too many digits in {s}"))?;
        let neg = int.starts_with('-');
        let i: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse()? };
        let f: i64 = frac.parse()?;
        let v = i.abs() * scale + f;
        return Ok(Ratio::new(if neg { -v } else { v }, scale));
    }
    s.parse::<Ratio>().map_err(|e| anyhow!("bad rational {s:?}: {e}"))
}

fn ratio(a: RatioArgs, json: bool) -> Result<Outcome> {
    if a.table {
        let rows: Vec<Value> = gadgetforge::bounds::ratio_table()
            .iter()
            .map(|c| {
                json!({
                    "problem": c.problem,
                    "bound": c.bound.map(|b| b.label()),
                    "origin": format!("{:?}", c.origin).to_lowercase(),
                    "ratio": c.ratio.to_string(),
                    "decimal": c.decimal(),
                    "printed": c.printed,
                })
            })
            .collect();
        return Emit::new(json, None).finish(json!({ "table": rows }), render_table(a.csv).trim_end().to_string());
    }
    let name = a.problem.expect("clap requires --table or --problem");
    let (regime, max01) = match name.as_str() {
        "max01" => (Regime::Atsp12, true),
        other => (other.parse().map_err(|e: String| anyhow!(e))?, false),
    };
    let p = GadgetCostProfile::of(regime);
    let mut r = match (&a.delta, a.k) {
        (Some(d), Some(k)) => bound_ratio(&p, parse_ratio(d)?, k)?,
        _ => bound_limit(&p),
    };
    if max01 {
        if r <= Ratio::from_integer(1) {
            bail!("no gap left to transfer at this delta and k");
        }
        r = max01_from_atsp12_bound(r)?;
    }
    let report = json!({ "problem": name, "ratio": r.to_string(), "decimal": decimal_trunc(r, 5) });
    Emit::new(json, None).finish(report, format!("{name}: {r} ({})", decimal_trunc(r, 5)))
}

fn export(a: ExportArgs, json: bool) -> Result<Outcome> {
    let inst = load_instance(&a.input)?;
    let m = inst.metric();
    let name = format!("gadgetforge-{}", inst.regime());
    let mut emit = Emit::new(json, a.output);
    if a.matrix {
        let rows: Vec<Vec<u8>> = (0..m.size()).map(|u| (0..m.size()).map(|v| m.d(u, v)).collect()).collect();
        let doc = json!({ "name": name, "symmetric": m.symmetric(), "bound": m.bound(), "matrix": rows });
        emit = emit.artifact("matrix", &doc)?;
    } else {
        emit = emit.text_artifact("tsplib", m.to_tsplib(&name))?;
    }
    emit.finish(json!({ "vertices": m.size() }), format!("{} vertices", m.size()))
}
