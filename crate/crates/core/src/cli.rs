//! Command-line front end.
//!
//! Exit codes: 0 when the verdict is a pass (feasible, verified, consistent),
//! 1 when it is a fail (with a witness where one exists), 2 for usage, I/O
//! and format errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::CdsError;
use crate::instance::{parse_instance, CdsInstance, Feasibility, VertexId};
use crate::lp::{dual_certificate, shannon_bound, DualCertificate, Rational, ShannonBound};
use crate::oracle::{lemma_audit, oracle_edge_verdicts, tabulate, LemmaAudit, OracleEdge, DEFAULT_BUDGET};
use crate::scheme::{
    alignment_report, parse_scheme, qualified_chain_paths, rate_report, verify_linear, AlignmentReport,
    LinearScheme, RateReport, VerificationReport,
};
use crate::synthesis::{builtin_example1_instance, builtin_fig2_instance, builtin_fig2_scheme, synthesize};

pub const BUDGET_ENV: &str = "CDS_ENUM_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "cds", version, about = "Conditional disclosure of secrets: feasibility, schemes and bounds")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the instance admits rate 1/2.
    Check { instance: PathBuf },
    /// Build a rate-1/2 linear scheme.
    Synth {
        instance: PathBuf,
        #[arg(long)]
        reduce_randomness: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify a linear scheme against an instance.
    Verify {
        instance: PathBuf,
        scheme: PathBuf,
        /// Cross-check every edge by exhaustive enumeration.
        #[arg(long)]
        oracle: bool,
        /// Bound the capacity interval with the Shannon LP.
        #[arg(long)]
        bound: bool,
    },
    /// Shannon-type upper bound on the rate.
    Bound {
        instance: PathBuf,
        /// Restrict to the subgraph induced by these vertices.
        #[arg(long, value_delimiter = ',')]
        vertices: Option<Vec<String>>,
        #[arg(long)]
        certificate: bool,
        /// Print the LP, one constraint per line.
        #[arg(long)]
        dump: bool,
    },
    /// Entropy identities and alignment structure of a scheme.
    Audit {
        instance: PathBuf,
        scheme: PathBuf,
        /// Vertex path for the common-noise bound (default: qualified chains).
        #[arg(long, value_delimiter = ',')]
        path: Option<Vec<String>>,
    },
    /// Write a built-in instance and its scheme.
    Demo {
        name: Builtin,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Builtin {
    Fig2,
    Example1,
}

struct Outcome {
    code: i32,
    text: String,
    json: Value,
}

impl Outcome {
    fn new(pass: bool, text: String, json: Value) -> Self {
        Outcome { code: if pass { 0 } else { 1 }, text, json }
    }
}

/// Parses `argv` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let json = cli.json;
    match execute(cli.command) {
        Ok(o) => {
            let body = if json {
                let mut s = serde_json::to_string_pretty(&o.json).expect("json values serialize");
                s.push('\n');
                s
            } else {
                o.text
            };
            if out.write_all(body.as_bytes()).is_err() {
                return 2;
            }
            o.code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_instance(path: &Path) -> Result<CdsInstance, String> {
    parse_instance(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_scheme(path: &Path) -> Result<LinearScheme, String> {
    parse_scheme(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Enumeration budget, overridable through the environment.
pub fn enum_budget() -> Result<u128, String> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{BUDGET_ENV}: not a row count: {v:?}")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn cds(e: CdsError) -> String {
    e.to_string()
}

fn execute(cmd: Command) -> Result<Outcome, String> {
    match cmd {
        Command::Check { instance } => {
            let inst = load_instance(&instance)?;
            let (core, eliminated) = inst.normalize_degenerate();
            let verdict = core.half_rate_feasible().map_err(cds)?;
            let mut text = String::new();
            if !eliminated.is_empty() {
                let _ = writeln!(text, "eliminated (qualified edges only): {}", eliminated.join(","));
            }
            text.push_str(&render_feasibility(&core, &verdict));
            let mut js = feasibility_json(&core, &verdict);
            js["eliminated"] = json!(eliminated);
            Ok(Outcome::new(verdict.is_feasible(), text, js))
        }
        Command::Synth { instance, reduce_randomness, output } => {
            let inst = load_instance(&instance)?;
            let (core, _) = inst.normalize_degenerate();
            let verdict = core.half_rate_feasible().map_err(cds)?;
            if !verdict.is_feasible() {
                return Ok(Outcome::new(false, render_feasibility(&core, &verdict), feasibility_json(&core, &verdict)));
            }
            let sch = synthesize(&inst, reduce_randomness).map_err(cds)?;
            let file = sch.to_file_string();
            let summary = scheme_summary(&sch);
            let js = json!({
                "verdicts": {"feasible": true},
                "modulus": sch.modulus(),
                "secret_len": sch.secret_len(),
                "noise_len": sch.noise_len(),
                "signal_len": sch.max_signal_len(),
                "scheme": file,
            });
            let text = match output {
                Some(path) => {
                    write_file(&path, &file)?;
                    format!("{summary}\nwrote {}\n", path.display())
                }
                None => file,
            };
            Ok(Outcome::new(true, text, js))
        }
        Command::Verify { instance, scheme, oracle, bound } => {
            let inst = load_instance(&instance)?;
            let sch = load_scheme(&scheme)?;
            let report = verify_linear(&inst, &sch).map_err(cds)?;
            let mut text = render_verification(&report);
            let mut js = verification_json(&report);
            let mut pass = report.pass;
            if oracle {
                let table = tabulate(&sch, enum_budget()?).map_err(cds)?;
                let verdicts = oracle_edge_verdicts(&inst, &table).map_err(cds)?;
                let agree = report.edges.iter().zip(&verdicts).all(|(r, o)| r.ok == o.ok);
                text.push_str(&render_oracle(&verdicts, agree));
                js["oracle"] = oracle_json(&verdicts, agree);
                pass &= agree;
            }
            if report.pass {
                let converse = if bound { Some(shannon_bound(&inst).map_err(cds)?.rate_bound) } else { None };
                let rates = rate_report(&inst, &sch, converse).map_err(cds)?;
                text.push_str(&render_rates(&rates));
                text.push('\n');
                js["rates"] = rates_json(&rates);
            }
            Ok(Outcome::new(pass, text, js))
        }
        Command::Bound { instance, vertices, certificate, dump } => {
            let mut inst = load_instance(&instance)?;
            if let Some(names) = vertices {
                let keep: Vec<VertexId> =
                    names.iter().map(|n| inst.require_id(n.trim())).collect::<Result<_, _>>().map_err(cds)?;
                inst = inst.induced(&keep);
            }
            let b = shannon_bound(&inst).map_err(cds)?;
            let cert = if certificate { Some(dual_certificate(&b.solution, &b.lp).map_err(cds)?) } else { None };
            let mut text = render_bound(&b, cert.as_ref());
            if dump {
                text.push_str(&b.lp.dump());
            }
            let mut js = json!({
                "rate_bound": rational_json(&b.rate_bound),
                "secret_entropy": rational_json(&b.secret_entropy),
                "degenerate": b.degenerate,
                "variables": b.lp.var_count(),
                "constraints": b.lp.constraints.len(),
            });
            if let Some(c) = &cert {
                js["certificate"] = certificate_json(c);
            }
            Ok(Outcome::new(true, text, js))
        }
        Command::Audit { instance, scheme, path } => {
            let inst = load_instance(&instance)?;
            let sch = load_scheme(&scheme)?;
            let paths = match path {
                Some(names) => {
                    vec![names.iter().map(|n| inst.require_id(n.trim())).collect::<Result<Vec<_>, _>>().map_err(cds)?]
                }
                None => qualified_chain_paths(&inst),
            };
            let alignment = alignment_report(&inst, &sch, &paths).map_err(cds)?;
            let table = tabulate(&sch, enum_budget()?).map_err(cds)?;
            let (audit, skipped) = match lemma_audit(&inst, &table, sch.secret_len()) {
                Ok(a) => (Some(a), None),
                Err(e @ CdsError::NotHalfRate { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(cds(e)),
            };
            let mut text = String::new();
            match (&audit, &skipped) {
                (Some(a), _) => text.push_str(&render_audit(a)),
                (None, Some(why)) => {
                    let _ = writeln!(text, "lemma audit skipped: {why}");
                }
                _ => {}
            }
            text.push_str(&render_alignment(&alignment));
            let pass = audit.as_ref().is_none_or(LemmaAudit::passed) && alignment.consistent();
            let js = json!({
                "verdicts": {"pass": pass, "consistent": alignment.consistent()},
                "lemmas": audit.as_ref().map(audit_json),
                "lemma_audit_skipped": skipped,
                "alignment": alignment_json(&alignment),
            });
            Ok(Outcome::new(pass, text, js))
        }
        Command::Demo { name, output } => {
            let (stem, inst, sch) = match name {
                Builtin::Fig2 => ("fig2", builtin_fig2_instance(), builtin_fig2_scheme()),
                Builtin::Example1 => {
                    let inst = builtin_example1_instance();
                    let sch = synthesize(&inst, false).map_err(cds)?;
                    ("example1", inst, sch)
                }
            };
            std::fs::create_dir_all(&output).map_err(|e| format!("{}: {e}", output.display()))?;
            let ipath = output.join(format!("{stem}.cds"));
            let spath = output.join(format!("{stem}.scheme"));
            write_file(&ipath, &inst.to_file_string())?;
            write_file(&spath, &sch.to_file_string())?;
            let text = format!("wrote {}\nwrote {}\n", ipath.display(), spath.display());
            let js = json!({"instance": ipath.display().to_string(), "scheme": spath.display().to_string()});
            Ok(Outcome::new(true, text, js))
        }
    }
}

fn scheme_summary(sch: &LinearScheme) -> String {
    format!(
        "scheme over GF({}): L = {}, L_Z = {}, N = {}",
        sch.modulus(),
        sch.secret_len(),
        sch.noise_len(),
        sch.max_signal_len()
    )
}

pub fn rational_json(r: &Rational) -> Value {
    json!({"num": r.numer().to_string(), "den": r.denom().to_string()})
}

fn path_text(inst: &CdsInstance, path: &[VertexId]) -> String {
    format!("({})", inst.names(path).join(","))
}

pub fn render_feasibility(inst: &CdsInstance, f: &Feasibility) -> String {
    match f {
        Feasibility::Feasible => "FEASIBLE (capacity = 1/2)\n".to_string(),
        Feasibility::Infeasible { edge, path } => format!(
            "INFEASIBLE (capacity < 1/2)\ninternal qualified edge {{{},{}}}\nunqualified path {}\n",
            inst.name(edge.0),
            inst.name(edge.1),
            path_text(inst, &path.vertices)
        ),
    }
}

fn feasibility_json(inst: &CdsInstance, f: &Feasibility) -> Value {
    match f {
        Feasibility::Feasible => json!({"verdicts": {"feasible": true}, "witnesses": null}),
        Feasibility::Infeasible { edge, path } => json!({
            "verdicts": {"feasible": false},
            "witnesses": {
                "edge": [inst.name(edge.0), inst.name(edge.1)],
                "path": inst.names(&path.vertices),
            },
        }),
    }
}

pub fn render_verification(r: &VerificationReport) -> String {
    let mut s = format!("verification (L = {})\n", r.secret_len);
    for v in &r.vertices {
        let need = if v.required { "required" } else { "free" };
        let verdict = if v.passes() { "ok" } else { "LEAKS" };
        let _ = writeln!(s, "vertex {}: leakage {} ({need}) {verdict}", v.name, v.leakage);
    }
    for e in &r.edges {
        let verdict = if e.ok { "ok" } else { "FAIL" };
        let _ = writeln!(s, "edge {{{},{}}} {}: information {} {verdict}", e.v, e.u, e.kind.tag(), e.information);
    }
    s.push_str(if r.pass { "PASS\n" } else { "FAIL\n" });
    s
}

fn verification_json(r: &VerificationReport) -> Value {
    json!({
        "verdicts": {"pass": r.pass},
        "secret_len": r.secret_len,
        "vertices": r.vertices.iter().map(|v| json!({
            "name": v.name, "required": v.required, "leakage": v.leakage, "ok": v.passes(),
        })).collect::<Vec<_>>(),
        "edges": r.edges.iter().map(|e| json!({
            "edge": [e.v, e.u], "kind": e.kind.tag(), "information": e.information, "ok": e.ok,
        })).collect::<Vec<_>>(),
    })
}

fn render_oracle(verdicts: &[OracleEdge], agree: bool) -> String {
    let mut s = String::from("oracle\n");
    for e in verdicts {
        let _ = writeln!(s, "edge {{{},{}}} {}: {}", e.v, e.u, e.kind.tag(), if e.ok { "ok" } else { "FAIL" });
    }
    s.push_str(if agree { "oracle agrees with rank verdicts\n" } else { "ORACLE DISAGREES with rank verdicts\n" });
    s
}

fn oracle_json(verdicts: &[OracleEdge], agree: bool) -> Value {
    json!({
        "agree": agree,
        "edges": verdicts.iter().map(|e| json!({"edge": [e.v, e.u], "kind": e.kind.tag(), "ok": e.ok})).collect::<Vec<_>>(),
    })
}

/// `R = 2/5, R_Z = 4/9, bounds [2/5, 5/12]`.
pub fn render_rates(r: &RateReport) -> String {
    let rz = r.randomness_rate.as_ref().map_or_else(|| "none".to_string(), |x| x.to_string());
    format!("R = {}, R_Z = {}, bounds [{}, {}]", r.rate, rz, r.lower, r.upper)
}

fn rates_json(r: &RateReport) -> Value {
    json!({
        "rate": rational_json(&r.rate),
        "randomness_rate": r.randomness_rate.as_ref().map(rational_json),
        "lower": rational_json(&r.lower),
        "upper": rational_json(&r.upper),
    })
}

pub fn render_bound(b: &ShannonBound, cert: Option<&DualCertificate>) -> String {
    let mut s = format!("rate <= {}\n", b.rate_bound);
    let _ = writeln!(
        s,
        "max H(S) = {} over {} variables, {} constraints",
        b.secret_entropy,
        b.lp.var_count(),
        b.lp.constraints.len()
    );
    if b.degenerate {
        s.push_str("degenerate: H(S) unbounded, capped at the ground-set size\n");
    }
    if let Some(c) = cert {
        s.push_str(&c.render());
    }
    s
}

fn certificate_json(c: &DualCertificate) -> Value {
    json!({
        "bound": rational_json(&c.bound),
        "terms": c.terms.iter().map(|t| json!({
            "weight": rational_json(&t.weight), "constraint": t.text, "label": t.label,
        })).collect::<Vec<_>>(),
    })
}

pub fn render_audit(a: &LemmaAudit) -> String {
    let mut s = format!("lemma audit (L = {})\n", a.secret_len);
    for l in &a.lemmas {
        let verdict = if l.passed() { "ok" } else { "FAIL" };
        let _ = writeln!(s, "{}. {}: {} checked, {verdict}", l.id, l.statement, l.checked);
        for (set, value) in &l.failures {
            let _ = writeln!(s, "   violated on {{{}}}: {value}", set.join(","));
        }
    }
    s
}

fn audit_json(a: &LemmaAudit) -> Value {
    json!(a
        .lemmas
        .iter()
        .map(|l| json!({
            "id": l.id,
            "statement": l.statement,
            "checked": l.checked,
            "pass": l.passed(),
            "failures": l.failures.iter().map(|(set, v)| json!({"vertices": set, "value": v})).collect::<Vec<_>>(),
        }))
        .collect::<Vec<_>>())
}

pub fn render_alignment(a: &AlignmentReport) -> String {
    let mut s = format!("alignment (L = {})\n", a.secret_len);
    for (v, u, d) in &a.noise_overlaps {
        let verdict = if *d >= a.secret_len { "ok" } else { "BELOW L" };
        let _ = writeln!(s, "noise overlap {{{v},{u}}} = {d} {verdict}");
    }
    for (v, u, ok) in &a.signal_alignment {
        let _ = writeln!(s, "signal alignment {{{v},{u}}} {}", if *ok { "ok" } else { "VIOLATED" });
    }
    for p in &a.paths {
        let _ = writeln!(
            s,
            "path ({}): common noise dim {} >= bound {}",
            p.vertices.join(","),
            p.common_dim,
            p.lower_bound
        );
    }
    s.push_str(if a.consistent() { "CONSISTENT\n" } else { "INCONSISTENT\n" });
    s
}

fn alignment_json(a: &AlignmentReport) -> Value {
    json!({
        "secret_len": a.secret_len,
        "noise_overlaps": a.noise_overlaps.iter().map(|(v, u, d)| json!({"edge": [v, u], "dim": d})).collect::<Vec<_>>(),
        "signal_alignment": a.signal_alignment.iter().map(|(v, u, ok)| json!({"edge": [v, u], "aligned": ok})).collect::<Vec<_>>(),
        "paths": a.paths.iter().map(|p| json!({
            "vertices": p.vertices, "lower_bound": p.lower_bound, "common_dim": p.common_dim,
        })).collect::<Vec<_>>(),
    })
}
