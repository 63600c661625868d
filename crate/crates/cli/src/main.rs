use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hnn_core::braid::{danilevich_probe, theorem3_check, verify_braid_relations, verify_extension, SemidirectExtension};
use hnn_core::pingpong::{
    bounded_intersection_probe, free_product_oracle, theorem2_certificate, Certificate, HnnGroup,
    IntersectionEvidence, OracleBounds, OracleReport, ProbeBounds, SubgroupSpec, SupportMode,
};
use hnn_core::rewrite::{random_confluence_probe, ProbeFailure, RewriteTrace, RuleSet};
use hnn_core::syntax::{parse_presentation, preset, Alphabet, LoadedPresentation};
use hnn_core::words::{GeneratorId, Word};
use hnn_core::{p2, HnnPresentation};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "hnn", version, about = "Normal forms and free-subgroup certificates for HNN-extensions of free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in presentation: `gn <n>` or `p2 <n>`.
    #[arg(long, num_args = 2, value_names = ["KIND", "N"], conflicts_with = "file")]
    preset: Option<Vec<String>>,
    /// Presentation file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Structured output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct Bounds {
    #[arg(long, default_value_t = 6)]
    syllables: usize,
    #[arg(long, default_value_t = 2)]
    exp_range: u32,
    /// Generator syllables per factor.
    #[arg(long, default_value_t = 2)]
    max_uses: usize,
    #[arg(long, default_value_t = 50_000_000)]
    budget: u64,
}

impl Bounds {
    fn oracle(&self) -> OracleBounds {
        OracleBounds {
            syllables: self.syllables,
            exp_range: self.exp_range,
            max_gen_word_uses: self.max_uses,
            budget: self.budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normal form of a word.
    Nf {
        #[command(flatten)]
        src: Source,
        word: String,
        /// Print every rewriting step with its nu-vector.
        #[arg(long)]
        trace: bool,
    },
    /// Equality of two words.
    Eq {
        #[command(flatten)]
        src: Source,
        u: String,
        v: String,
    },
    /// List the compiled rewriting rules.
    Rules {
        #[command(flatten)]
        src: Source,
    },
    /// Check all critical pairs, and optionally run the random strategy probe.
    Confluence {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 40)]
        max_len: usize,
    },
    /// Ping-pong certificate for subgroups `--spec "A = w1; w2 @ x1 x2"`.
    PingpongCertify {
        #[command(flatten)]
        src: Source,
        #[arg(long = "spec", required = true)]
        specs: Vec<String>,
        /// `LABEL = w`: generators lie in the phi-orbit of w (gn/p2 presets).
        #[arg(long)]
        orbit: Vec<String>,
        /// `LABEL = reason`: trivial intersection with <Y> is proved elsewhere.
        #[arg(long)]
        external: Vec<String>,
        /// `LABEL`: bounded search for elements of <Y> in the subgroup.
        #[arg(long)]
        probe: Vec<String>,
        #[arg(long, default_value_t = 6)]
        probe_len: usize,
        #[arg(long, conflicts_with = "lax")]
        strict: bool,
        #[arg(long)]
        lax: bool,
        /// Also run the free-product oracle.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Brute-force check that the subgroups generate their free product.
    PingpongOracle {
        #[command(flatten)]
        src: Source,
        #[arg(long = "spec", required = true)]
        specs: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Verify phi and the braid relations of P2(n+1).
    BraidVerify {
        #[command(flatten)]
        src: Source,
    },
    /// Apply a power of phi to a word.
    BraidPhi {
        #[command(flatten)]
        src: Source,
        word: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        power: i64,
    },
    /// Freeness of <w_1, ..., w_{n-1}, t>.
    BraidCheckFree {
        #[command(flatten)]
        src: Source,
        #[arg(long = "w", required = true)]
        words: Vec<String>,
        #[arg(long, conflicts_with = "lax")]
        strict: bool,
        #[arg(long)]
        lax: bool,
        /// Also run the free-product oracle on <w_1>, ..., <w_{n-1}>, <t>.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Bounded search for relations in H * <t>.
    Danilevich {
        #[command(flatten)]
        src: Source,
        #[arg(long = "h")]
        generators: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
}

/// A user-facing failure: printed to stderr, exit code 2.
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Nf { src, word, trace } => nf(&src, &word, trace),
        Command::Eq { src, u, v } => eq(&src, &u, &v),
        Command::Rules { src } => rules(&src),
        Command::Confluence {
            src,
            random,
            seed,
            trials,
            max_len,
        } => confluence(&src, random.then_some((seed, trials, max_len))),
        Command::PingpongCertify {
            src,
            specs,
            orbit,
            external,
            probe,
            probe_len,
            strict: _,
            lax,
            oracle,
            bounds,
        } => pingpong_certify(&src, &specs, &orbit, &external, &probe, probe_len, mode(lax), oracle.then(|| bounds.oracle())),
        Command::PingpongOracle { src, specs, bounds } => pingpong_oracle(&src, &specs, &bounds.oracle()),
        Command::BraidVerify { src } => braid_verify(&src),
        Command::BraidPhi { src, word, power } => braid_phi(&src, &word, power),
        Command::BraidCheckFree {
            src,
            words,
            strict: _,
            lax,
            oracle,
            bounds,
        } => braid_check_free(&src, &words, mode(lax), oracle.then(|| bounds.oracle())),
        Command::Danilevich { src, generators, bounds } => danilevich(&src, &generators, &bounds.oracle()),
    }
}

fn mode(lax: bool) -> SupportMode {
    if lax {
        SupportMode::Lax
    } else {
        SupportMode::Strict
    }
}

fn load(src: &Source) -> Result<LoadedPresentation, Failure> {
    match (&src.preset, &src.file) {
        (Some(p), None) => {
            let n: u32 = p[1].parse().map_err(|_| Failure(format!("preset size `{}` is not a number", p[1])))?;
            Ok(preset(&p[0], n)?)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            parse_presentation(&text).map_err(|e| Failure(format!("{}:{e}", path.display())))
        }
        _ => Err(Failure("give a presentation with --preset <KIND> <N> or --file <PATH>".into())),
    }
}

fn extension(loaded: &LoadedPresentation) -> Result<&SemidirectExtension, Failure> {
    match loaded {
        LoadedPresentation::Semidirect { extension, .. } => Ok(extension),
        LoadedPresentation::Hnn(_) => Err(Failure("this command needs --preset p2 <n>".into())),
    }
}

fn parse(alphabet: &Alphabet, text: &str) -> Result<Word, Failure> {
    alphabet.parse_word(text).map_err(|e| Failure(format!("in `{text}`: {e}")))
}

fn emit(src: &Source, text: impl FnOnce() -> String, mut value: Value) {
    if src.json {
        value["schema"] = json!(SCHEMA);
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        let t = text();
        if t.ends_with('\n') {
            print!("{t}");
        } else {
            println!("{t}");
        }
    }
}

fn trace_lines(alphabet: &Alphabet, start: &Word, trace: &RewriteTrace) -> Vec<String> {
    let mut out = vec![format!("init {} nu={}", alphabet.format(start), hnn_core::NuVector::of(start))];
    for (k, s) in trace.steps.iter().enumerate() {
        out.push(format!("#{} pos={} rule={}/{} nu={}", k + 1, s.position, s.kind.number(), s.rule_id, s.nu_after));
    }
    let last = trace.steps.last().map_or(start, |s| &s.after);
    out.push(format!("final {}", alphabet.format(last)));
    out
}

fn trace_json(alphabet: &Alphabet, trace: &RewriteTrace) -> Value {
    Value::Array(
        trace
            .steps
            .iter()
            .map(|s| {
                json!({
                    "pos": s.position,
                    "kind": s.kind.number(),
                    "rule": s.rule_id,
                    "after": alphabet.format(&s.after),
                    "nu": s.nu_after.0,
                })
            })
            .collect(),
    )
}

fn nf(src: &Source, text: &str, with_trace: bool) -> Outcome {
    let loaded = load(src)?;
    let alphabet = loaded.alphabet();
    let w = parse(&alphabet, text)?;
    let (base_word, k, rules) = match &loaded {
        LoadedPresentation::Hnn(p) => (w.clone(), 0, RuleSet::compile(p)?),
        LoadedPresentation::Semidirect { extension, .. } => {
            let (g, k) = extension.pushed(&w)?;
            (g, k, extension.rules().clone())
        }
    };
    let (g, trace) = rules.normal_form(&base_word)?;
    let result = g.concat(&Word::power(GeneratorId::OUTER, k));
    emit(
        src,
        || {
            let mut lines = Vec::new();
            if with_trace {
                lines = trace_lines(&alphabet, &base_word, &trace);
                if k != 0 {
                    lines.push(format!("then {}", alphabet.format(&Word::power(GeneratorId::OUTER, k))));
                }
            }
            lines.push(alphabet.format(&result));
            lines.join("\n")
        },
        json!({
            "command": "nf",
            "input": alphabet.format(&w),
            "normal_form": alphabet.format(&result),
            "t_exponent": k,
            "steps": trace.len(),
            "trace": if with_trace { trace_json(&alphabet, &trace) } else { Value::Null },
        }),
    );
    Ok(0)
}

fn eq(src: &Source, u: &str, v: &str) -> Outcome {
    let loaded = load(src)?;
    let alphabet = loaded.alphabet();
    let (u, v) = (parse(&alphabet, u)?, parse(&alphabet, v)?);
    let equal = match &loaded {
        LoadedPresentation::Hnn(p) => RuleSet::compile(p)?.equal(&u, &v)?,
        LoadedPresentation::Semidirect { extension, .. } => extension.semidirect_equal(&u, &v)?,
    };
    emit(src, || equal.to_string(), json!({"command": "eq", "equal": equal}));
    Ok(if equal { 0 } else { 1 })
}

fn rules(src: &Source) -> Outcome {
    let loaded = load(src)?;
    let alphabet = loaded.alphabet();
    let rules = RuleSet::compile(loaded.presentation())?;
    let rows: Vec<(usize, u8, String, String)> = rules
        .rules()
        .iter()
        .enumerate()
        .map(|(id, r)| (id, r.kind.number(), alphabet.format(&r.lhs), alphabet.format(&r.rhs)))
        .collect();
    emit(
        src,
        || {
            rows.iter()
                .map(|(id, k, l, r)| format!("{id:>4} [{k}] {l} -> {r}"))
                .collect::<Vec<_>>()
                .join("\n")
        },
        json!({
            "command": "rules",
            "count": rows.len(),
            "rules": rows.iter().map(|(id, k, l, r)| json!({"id": id, "kind": k, "lhs": l, "rhs": r})).collect::<Vec<_>>(),
        }),
    );
    Ok(0)
}

fn confluence(src: &Source, random: Option<(u64, usize, usize)>) -> Outcome {
    let loaded = load(src)?;
    let alphabet = loaded.alphabet();
    let p = loaded.presentation();
    let report = RuleSet::compile(p)?.check_local_confluence();
    let fmt_nf = |w: &Option<Word>| w.as_ref().map_or("<step cap>".to_string(), |w| alphabet.format(w));
    let failures: Vec<Value> = report
        .failures
        .iter()
        .map(|f| {
            json!({
                "peak": alphabet.format(&f.pair.peak),
                "rules": [f.pair.left_rule, f.pair.right_rule],
                "left": fmt_nf(&f.left_nf),
                "right": fmt_nf(&f.right_nf),
            })
        })
        .collect();
    let mut text = vec![format!(
        "critical pairs: {} checked, {} not joinable",
        report.pairs_checked,
        report.failures.len()
    )];
    for f in report.failures.iter().take(10) {
        text.push(format!(
            "  peak {} (rules {}, {}): {} vs {}",
            alphabet.format(&f.pair.peak),
            f.pair.left_rule,
            f.pair.right_rule,
            fmt_nf(&f.left_nf),
            fmt_nf(&f.right_nf)
        ));
    }
    let mut ok = report.is_confluent();
    let mut probe_json = Value::Null;
    if let Some((seed, trials, max_len)) = random {
        let probe = random_confluence_probe(p, seed, trials, max_len)?;
        ok &= probe.passed();
        text.push(format!(
            "random probe: seed {seed}, {trials} words, {} steps checked, {} failures",
            probe.steps_checked,
            probe.failures.len()
        ));
        let describe = |f: &ProbeFailure| match f {
            ProbeFailure::Divergent { word, .. } => format!("divergent normal forms for {}", alphabet.format(word)),
            ProbeFailure::NuNotDecreasing { word, step } => {
                format!("nu did not decrease at step {step} for {}", alphabet.format(word))
            }
            ProbeFailure::StepCap { word } => format!("step cap reached for {}", alphabet.format(word)),
        };
        for f in probe.failures.iter().take(10) {
            text.push(format!("  {}", describe(f)));
        }
        probe_json = json!({
            "seed": seed,
            "trials": trials,
            "max_len": max_len,
            "steps_checked": probe.steps_checked,
            "failures": probe.failures.iter().map(describe).collect::<Vec<_>>(),
        });
    }
    text.push(if ok { "confluent".into() } else { "NOT confluent".into() });
    emit(
        src,
        || text.join("\n"),
        json!({
            "command": "confluence",
            "verdict": if ok { "pass" } else { "fail" },
            "pairs_checked": report.pairs_checked,
            "failures": failures,
            "probe": probe_json,
        }),
    );
    Ok(if ok { 0 } else { 1 })
}

/// `LABEL = w1; w2 @ x1 x2`
fn parse_spec(alphabet: &Alphabet, text: &str) -> Result<SubgroupSpec, Failure> {
    let (label, rest) = text
        .split_once('=')
        .ok_or_else(|| Failure(format!("spec `{text}`: expected `LABEL = w1; w2 @ support`")))?;
    let (gens, support) = rest.split_once('@').unwrap_or((rest, ""));
    let generators = gens
        .split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|g| parse(alphabet, g))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sup = Vec::new();
    for name in support.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let g = alphabet
            .resolve(name)
            .ok_or_else(|| Failure(format!("spec `{text}`: unknown generator `{name}` in support")))?;
        sup.push(g);
    }
    Ok(SubgroupSpec::new(label.trim(), generators, sup))
}

fn labelled<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str), Failure> {
    text.split_once('=')
        .map(|(l, r)| (l.trim(), r.trim()))
        .ok_or_else(|| Failure(format!("{what} `{text}`: expected `LABEL = ...`")))
}

fn certificate_json(c: &Certificate, command: &str, oracle: Option<&OracleReport>) -> Value {
    let mut v = serde_json::to_value(c).expect("serializable");
    v["command"] = json!(command);
    v["oracle"] = oracle.map_or(Value::Null, |r| serde_json::to_value(r).expect("serializable"));
    v
}

fn oracle_text(r: &OracleReport) -> String {
    let mut s = format!("oracle: {} ({} products checked)", r.verdict, r.checked);
    if let Some(w) = &r.witness {
        s.push_str(&format!("\n  witness: {} = 1", w.product));
    }
    if let Some(n) = &r.note {
        s.push_str(&format!("\n  note: {n}"));
    }
    s
}

/// Certificate verdict, demoted to refuted if the oracle contradicts it.
fn combined_exit(c: &Certificate, oracle: Option<&OracleReport>) -> i32 {
    match oracle {
        Some(r) if r.verdict == hnn_core::pingpong::OracleVerdict::Fail => 1,
        _ => c.verdict.exit_code(),
    }
}

#[allow(clippy::too_many_arguments)]
fn pingpong_certify(
    src: &Source,
    specs: &[String],
    orbit: &[String],
    external: &[String],
    probe: &[String],
    probe_len: usize,
    mode: SupportMode,
    oracle: Option<OracleBounds>,
) -> Outcome {
    let loaded = load(src)?;
    let p: &HnnPresentation = loaded.presentation();
    let alphabet = p.alphabet();
    let group = HnnGroup::new(p)?;
    let specs = specs.iter().map(|s| parse_spec(&alphabet, s)).collect::<Result<Vec<_>, _>>()?;
    let index = |label: &str| {
        specs
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Failure(format!("no spec labelled `{label}`")))
    };
    let mut evidence: Vec<Option<IntersectionEvidence>> = vec![None; specs.len()];
    if !orbit.is_empty() {
        let ext = match &loaded {
            LoadedPresentation::Semidirect { extension, .. } => extension.clone(),
            LoadedPresentation::Hnn(_) => {
                let n = p.stable_rank() + 1;
                match p2(n) {
                    Ok(ext) if ext.base() == p => ext,
                    _ => return Err(Failure("orbit evidence needs a gn or p2 preset (the map is phi)".into())),
                }
            }
        };
        for o in orbit {
            let (label, word) = labelled(o, "orbit")?;
            evidence[index(label)?] = Some(IntersectionEvidence::Orbit {
                map: ext.phi().clone(),
                inverse: Some(ext.phi_inverse().clone()),
                word: parse(&alphabet, word)?,
            });
        }
    }
    for e in external {
        let (label, why) = labelled(e, "external")?;
        evidence[index(label)?] = Some(IntersectionEvidence::External(why.to_string()));
    }
    for label in probe {
        let i = index(label.trim())?;
        let bounds = ProbeBounds {
            max_len: probe_len,
            ..ProbeBounds::default()
        };
        evidence[i] = Some(IntersectionEvidence::Probe(bounded_intersection_probe(&specs[i], &group, &bounds)));
    }
    let mut cert = theorem2_certificate(&specs, &evidence, &group, mode);
    let report = oracle.map(|b| {
        cert.oracle_bounds = Some(b);
        free_product_oracle(&specs, &group, &b)
    });
    emit(
        src,
        || {
            let mut s = cert.to_string();
            if let Some(r) = &report {
                s.push_str(&oracle_text(r));
            }
            s
        },
        certificate_json(&cert, "pingpong-certify", report.as_ref()),
    );
    Ok(combined_exit(&cert, report.as_ref()))
}

fn oracle_json(r: &OracleReport, command: &str, bounds: &OracleBounds) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    v["command"] = json!(command);
    v["bounds"] = serde_json::to_value(bounds).expect("serializable");
    v
}

fn pingpong_oracle(src: &Source, specs: &[String], bounds: &OracleBounds) -> Outcome {
    let loaded = load(src)?;
    let alphabet = loaded.alphabet();
    let specs = specs.iter().map(|s| parse_spec(&alphabet, s)).collect::<Result<Vec<_>, _>>()?;
    let report = match &loaded {
        LoadedPresentation::Hnn(p) => free_product_oracle(&specs, &HnnGroup::new(p)?, bounds),
        LoadedPresentation::Semidirect { extension, .. } => free_product_oracle(&specs, extension, bounds),
    };
    emit(
        src,
        || format!("{}\nbounds: {bounds}", oracle_text(&report)),
        oracle_json(&report, "pingpong-oracle", bounds),
    );
    Ok(report.verdict.exit_code())
}

fn braid_verify(src: &Source) -> Outcome {
    let loaded = load(src)?;
    let ext = extension(&loaded)?;
    let alphabet = ext.alphabet();
    let n = ext.base().stable_rank() + 1;
    let ext_report = verify_extension(ext);
    let rel = verify_braid_relations(n)?;
    let ok = ext_report.passed() && rel.passed();
    let mut lines = Vec::new();
    for c in &ext_report.checks {
        let mut line = format!("[{}] {}", if c.passed() { "pass" } else { "FAIL" }, c.name);
        if let Some(w) = &c.witness {
            line.push_str(&format!(" -- {w}"));
        }
        lines.push(line);
    }
    for c in &rel.checks {
        lines.push(format!(
            "[{}] {} (i={}, j={}): {}",
            if c.holds { "pass" } else { "FAIL" },
            c.family,
            c.i,
            c.j,
            alphabet.format(&c.relator)
        ));
    }
    lines.push(if ok { "all checks pass".into() } else { "some checks FAIL".into() });
    emit(
        src,
        || lines.join("\n"),
        json!({
            "command": "braid-verify",
            "verdict": if ok { "pass" } else { "fail" },
            "extension": ext_report.checks,
            "relations": rel.checks.iter().map(|c| json!({
                "family": c.family, "i": c.i, "j": c.j,
                "relator": alphabet.format(&c.relator), "holds": c.holds,
            })).collect::<Vec<_>>(),
        }),
    );
    Ok(if ok { 0 } else { 1 })
}

fn braid_phi(src: &Source, text: &str, power: i64) -> Outcome {
    let loaded = load(src)?;
    let ext = extension(&loaded)?;
    let alphabet = loaded.alphabet();
    let w = parse(&alphabet, text)?;
    let image = ext.phi_power(&w, power)?;
    emit(
        src,
        || alphabet.format(&image),
        json!({"command": "braid-phi", "power": power, "input": alphabet.format(&w), "image": alphabet.format(&image)}),
    );
    Ok(0)
}

fn braid_check_free(src: &Source, words: &[String], mode: SupportMode, oracle: Option<OracleBounds>) -> Outcome {
    let loaded = load(src)?;
    let ext = extension(&loaded)?;
    let alphabet = loaded.alphabet();
    let words = words.iter().map(|w| parse(&alphabet, w)).collect::<Result<Vec<_>, _>>()?;
    let mut cert = theorem3_check(ext, &words, mode)?;
    let report = oracle.map(|b| {
        cert.oracle_bounds = Some(b);
        free_product_oracle(&hnn_core::braid::theorem3_oracle_specs(ext, &words), ext, &b)
    });
    emit(
        src,
        || {
            let mut s = cert.to_string();
            if let Some(r) = &report {
                s.push_str(&oracle_text(r));
            }
            s
        },
        certificate_json(&cert, "braid-check-free", report.as_ref()),
    );
    Ok(combined_exit(&cert, report.as_ref()))
}

fn danilevich(src: &Source, generators: &[String], bounds: &OracleBounds) -> Outcome {
    let loaded = load(src)?;
    let ext = extension(&loaded)?;
    let alphabet = loaded.alphabet();
    let h = generators.iter().map(|w| parse(&alphabet, w)).collect::<Result<Vec<_>, _>>()?;
    let report = danilevich_probe(ext, &h, bounds)?;
    emit(
        src,
        || format!("{}\nbounds: {bounds}", oracle_text(&report)),
        oracle_json(&report, "danilevich", bounds),
    );
    Ok(report.verdict.exit_code())
}
