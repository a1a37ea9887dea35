//! Command-line front end. [`run`] is pure apart from writing `--out`, so the
//! binary and the tests share it.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::attacks::{
    attack_probabilities, verify_incidence_counts, verify_pair_lemma, verify_parameters, AttackReport,
    Incidence, IncidenceReport, PairLemmaReport, PairSampling, ParameterReport, Uniformity,
};
use crate::code::{build_code, validate_params, CodeInstance, CodeParams, ParamsDoc, ValidatedParams};
use crate::enumeration::{count_n_gated, count_n_oracle, gaussian_binomial, DEFAULT_ORACLE_BUDGET};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::FieldSpec;
use crate::report::csv_table;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check parameter feasibility
    Validate,
    /// Construct the code and emit its sets
    Build,
    /// Check set sizes and incidence counts
    Verify,
    /// Compute the five deception probabilities exhaustively
    Attack,
    /// Evaluate N(m, s; n) and the Gaussian binomial
    Count,
    /// Everything above in one document
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_modulus(s: &str) -> std::result::Result<u32, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("not an integer bit-vector: {e}"))
}

#[derive(Clone, Debug, Parser)]
#[command(name = "psauth", version, about = "Authentication codes with arbitration over GF(2^e)")]
pub struct RunConfig {
    pub command: Command,
    /// Field is GF(2^e)
    #[arg(long = "q-exp", default_value_t = 1)]
    pub q_exp: u32,
    /// Irreducible modulus as a bit-vector, decimal or 0x-prefixed
    #[arg(long, value_parser = parse_modulus)]
    pub modulus: Option<u32>,
    #[arg(long)]
    pub nu: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub m0: Option<usize>,
    #[arg(long)]
    pub s0: Option<usize>,
    /// Subspace dimension, `count` only
    #[arg(long)]
    pub m: Option<usize>,
    /// Symplectic space dimension, `count` only
    #[arg(long)]
    pub n: Option<usize>,
    /// Where to write the report document
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest number of subspaces the brute-force counter may visit
    #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
    pub oracle_budget: u64,
}

/// What a run produced. `document` is what `--out` receives.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub success: bool,
    pub stdout: String,
    pub document: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.success {
            0
        } else {
            1
        }
    }
}

fn field(cfg: &RunConfig) -> Result<FieldSpec> {
    match cfg.modulus {
        None => FieldSpec::new(cfg.q_exp),
        Some(m) => {
            let f = FieldSpec::with_modulus(m)?;
            if f.degree() != cfg.q_exp {
                return Err(Error::Invalid(format!(
                    "modulus {m:#x} has degree {}, but --q-exp is {}",
                    f.degree(),
                    cfg.q_exp
                )));
            }
            Ok(f)
        }
    }
}

fn required(v: Option<usize>, flag: &str, cmd: Command) -> Result<usize> {
    v.ok_or_else(|| Error::Invalid(format!("--{flag} is required for {cmd:?}").to_lowercase()))
}

fn code_params(cfg: &RunConfig) -> Result<CodeParams> {
    let c = cfg.command;
    Ok(CodeParams::new(
        field(cfg)?,
        required(cfg.nu, "nu", c)?,
        required(cfg.s, "s", c)?,
        required(cfg.m0, "m0", c)?,
        required(cfg.s0, "s0", c)?,
    ))
}

fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("report types serialize");
    s.push('\n');
    s
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs one command. Infeasible parameters and failed checks come back as an
/// unsuccessful [`Outcome`]; malformed input is an `Err`.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let exec = Exec::default();
    let outcome = match cfg.command {
        Command::Count => run_count(cfg, exec)?,
        cmd => {
            let p = code_params(cfg)?;
            match validate_params(p) {
                Err(diags) => invalid(cfg, &p, &diags),
                Ok(v) => match cmd {
                    Command::Validate => valid(cfg, &v),
                    Command::Build => run_build(cfg, &v, exec)?,
                    Command::Verify => run_verify(cfg, &v, exec)?,
                    Command::Attack => run_attack(cfg, &v, exec)?,
                    Command::Report => run_report(cfg, &v, exec)?,
                    Command::Count => unreachable!(),
                },
            }
        }
    };
    if let Some(path) = &cfg.out {
        std::fs::write(path, &outcome.document)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(outcome)
}

fn diag_rows(d: &[crate::code::Diagnostic], kind: &str) -> Vec<Vec<String>> {
    d.iter()
        .map(|d| vec![kind.to_string(), d.rule.to_string(), d.message.clone()])
        .collect()
}

fn invalid(cfg: &RunConfig, p: &CodeParams, diags: &[crate::code::Diagnostic]) -> Outcome {
    let mut stdout = format!("infeasible parameters: {p}\n");
    for d in diags {
        stdout += &format!("  error {d}\n");
    }
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "params": ParamsDoc::from(p),
            "valid": false,
            "errors": diags,
            "warnings": [],
        })),
        Format::Csv => csv_table(&["kind", "rule", "message"], &diag_rows(diags, "error")),
    };
    Outcome {
        success: false,
        stdout,
        document,
    }
}

fn valid(cfg: &RunConfig, v: &ValidatedParams) -> Outcome {
    let mut stdout = format!("valid parameters: {}\n", v.params());
    for w in v.warnings() {
        stdout += &format!("  warning {w}\n");
    }
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "params": ParamsDoc::from(v.params()),
            "valid": true,
            "errors": [],
            "warnings": v.warnings(),
        })),
        Format::Csv => csv_table(&["kind", "rule", "message"], &diag_rows(v.warnings(), "warning")),
    };
    Outcome {
        success: true,
        stdout,
        document,
    }
}

fn sizes_line(code: &CodeInstance) -> String {
    format!(
        "|S| = {}, |E_T| = {}, |E_R| = {}, |M| = {}\n",
        code.sources.len(),
        code.transmitter_rules.len(),
        code.receiver_rules.len(),
        code.messages.len()
    )
}

fn run_build(cfg: &RunConfig, v: &ValidatedParams, exec: Exec) -> Result<Outcome> {
    let code = build_code(v, exec)?;
    let stdout = format!("built code for {}\n{}", v.params(), sizes_line(&code));
    let document = match cfg.format {
        Format::Json => to_json(&code.to_document()),
        Format::Csv => {
            let d = code.to_document().sizes;
            csv_table(
                &["set", "size"],
                &[
                    vec!["sources".into(), d.sources],
                    vec!["transmitterRules".into(), d.transmitter_rules],
                    vec!["receiverRules".into(), d.receiver_rules],
                    vec!["messages".into(), d.messages],
                ],
            )
        }
    };
    Ok(Outcome {
        success: true,
        stdout,
        document,
    })
}

/// All verification results for one code.
struct Suite {
    parameters: ParameterReport,
    incidence: IncidenceReport,
    pairs: PairLemmaReport,
}

impl Suite {
    fn run(code: &CodeInstance, inc: &Incidence, budget: u64, exec: Exec) -> Result<Self> {
        Ok(Self {
            parameters: verify_parameters(code, budget, exec)?,
            incidence: verify_incidence_counts(code, inc, exec),
            pairs: verify_pair_lemma(code, inc, PairSampling::default_for(code), exec),
        })
    }

    /// The pair lemma only speaks about codes where two messages share a rule;
    /// with none it is reported but not failed.
    fn pairs_ok(&self) -> bool {
        self.pairs.pass || (self.pairs.checked_pairs == 0 && self.pairs.failure_count == 0)
    }

    fn pass(&self) -> bool {
        self.parameters.pass && self.incidence.pass() && self.pairs_ok()
    }

    fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.parameters.checks {
            out += &format!("{c}\n");
        }
        for u in self.incidence.all() {
            out += &uniformity_line(u);
        }
        let l = &self.pairs;
        let status = match (&l.reason, self.pairs_ok()) {
            (Some(r), _) => format!("SKIP pair lemma: {r}"),
            (None, ok) => format!(
                "{} pair lemma: {} of {} qualifying pairs checked, k in {:?}, {} failure(s)",
                pass_word(ok),
                l.checked_pairs,
                l.qualifying_pairs,
                l.by_k.keys().collect::<Vec<_>>(),
                l.failure_count
            ),
        };
        out + &status + "\n"
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .parameters
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), c.expected.clone(), c.observed.clone(), c.pass.to_string()])
            .collect();
        for u in self.incidence.all() {
            rows.push(vec![
                format!("count {} uniform", u.name),
                u.expected.to_string(),
                range(u),
                u.pass.to_string(),
            ]);
        }
        rows.push(vec![
            "pair lemma failures".into(),
            "0".into(),
            self.pairs.failure_count.to_string(),
            self.pairs_ok().to_string(),
        ]);
        rows
    }
}

fn range(u: &Uniformity) -> String {
    match (u.min, u.max) {
        (Some(a), Some(b)) if a == b => a.to_string(),
        (Some(a), Some(b)) => format!("{a}..{b}"),
        _ => "empty".into(),
    }
}

fn uniformity_line(u: &Uniformity) -> String {
    format!(
        "{} count {}: expected {} over {} objects, observed {}\n",
        pass_word(u.pass),
        u.name,
        u.expected,
        u.domain_size,
        range(u)
    )
}

fn run_verify(cfg: &RunConfig, v: &ValidatedParams, exec: Exec) -> Result<Outcome> {
    let code = build_code(v, exec)?;
    let inc = Incidence::compute(&code, exec);
    let suite = Suite::run(&code, &inc, cfg.oracle_budget, exec)?;
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "params": ParamsDoc::from(v.params()),
            "theorem1": suite.parameters,
            "lemma6": {"a": suite.incidence.a, "b": suite.incidence.b},
            "lemma8": {"c": suite.incidence.c, "d": suite.incidence.d},
            "lemma9": suite.incidence.between,
            "lemma10": suite.pairs,
        })),
        Format::Csv => csv_table(&["check", "expected", "observed", "pass"], &suite.rows()),
    };
    Ok(Outcome {
        success: suite.pass(),
        stdout: suite.summary(),
        document,
    })
}

fn attack_summary(r: &AttackReport) -> String {
    let mut out = String::new();
    for e in r.entries() {
        let line = match (&e.value, e.matches) {
            (Some(v), Some(m)) => format!(
                "{} {} = {} ({}), expected {}\n",
                pass_word(m),
                e.name,
                v,
                v.decimal(),
                e.expected
            ),
            _ => format!(
                "N/A  {} undefined: {}\n",
                e.name,
                e.reason.as_deref().unwrap_or("empty domain")
            ),
        };
        out += &line;
    }
    out
}

fn attack_rows(r: &AttackReport) -> Vec<Vec<String>> {
    r.entries()
        .iter()
        .map(|e| {
            vec![
                e.name.to_string(),
                e.value.map(|v| v.to_string()).unwrap_or_default(),
                e.value.map(|v| v.decimal()).unwrap_or_default(),
                e.expected.to_string(),
                e.matches.map(|m| m.to_string()).unwrap_or_default(),
            ]
        })
        .collect()
}

const ATTACK_HEADER: [&str; 5] = ["name", "fraction", "decimal", "expected", "match"];

fn run_attack(cfg: &RunConfig, v: &ValidatedParams, exec: Exec) -> Result<Outcome> {
    let code = build_code(v, exec)?;
    let inc = Incidence::compute(&code, exec);
    let report = attack_probabilities(&code, &inc, exec);
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "params": ParamsDoc::from(v.params()),
            "theorem2": report,
        })),
        Format::Csv => csv_table(&ATTACK_HEADER, &attack_rows(&report)),
    };
    Ok(Outcome {
        success: report.pass(),
        stdout: attack_summary(&report),
        document,
    })
}

fn run_report(cfg: &RunConfig, v: &ValidatedParams, exec: Exec) -> Result<Outcome> {
    let start = Instant::now();
    let code = build_code(v, exec)?;
    let inc = Incidence::compute(&code, exec);
    let suite = Suite::run(&code, &inc, cfg.oracle_budget, exec)?;
    let attacks = attack_probabilities(&code, &inc, exec);
    let millis = start.elapsed().as_millis();
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "params": ParamsDoc::from(v.params()),
            "theorem1": suite.parameters,
            "lemma6": {"a": suite.incidence.a, "b": suite.incidence.b},
            "lemma8": {"c": suite.incidence.c, "d": suite.incidence.d},
            "lemma9": suite.incidence.between,
            "lemma10": suite.pairs,
            "theorem2": attacks,
            "runtimeMillis": millis.to_string(),
        })),
        Format::Csv => {
            let mut rows = suite.rows();
            for r in attack_rows(&attacks) {
                rows.push(vec![
                    r[0].clone(),
                    r[3].clone(),
                    r[1].clone(),
                    if r[4].is_empty() { "n/a".into() } else { r[4].clone() },
                ]);
            }
            csv_table(&["check", "expected", "observed", "pass"], &rows)
        }
    };
    Ok(Outcome {
        success: suite.pass() && attacks.pass(),
        stdout: format!("{}{}{}", sizes_line(&code), suite.summary(), attack_summary(&attacks)),
        document,
    })
}

fn run_count(cfg: &RunConfig, exec: Exec) -> Result<Outcome> {
    let c = Command::Count;
    let (m, s, n) = (required(cfg.m, "m", c)?, required(cfg.s, "s", c)?, required(cfg.n, "n", c)?);
    let f = field(cfg)?;
    let count = count_n_gated(m, s, n, &f, cfg.oracle_budget, exec)?;
    let oracle = match count_n_oracle(m, s, n, &f, cfg.oracle_budget, exec) {
        Ok(x) => Some(x),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let gb = gaussian_binomial(n, m, f.order());
    let q = f.order();
    let mut stdout = format!("N(m={m}, s={s}; n={n}) = {count}\n");
    stdout += &format!("[{n} choose {m}]_{q} = {gb}\n");
    match &oracle {
        Some(o) => stdout += &format!("oracle agrees: {o}\n"),
        None => stdout += "oracle skipped: exceeds --oracle-budget\n",
    }
    let oracle_str = oracle.as_ref().map(ToString::to_string);
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "q": q.to_string(),
            "m": m,
            "s": s,
            "n": n,
            "countN": count.to_string(),
            "oracle": oracle_str.clone().map_or(Value::Null, Value::String),
            "gaussianBinomial": gb.to_string(),
        })),
        Format::Csv => csv_table(
            &["q", "m", "s", "n", "countN", "oracle", "gaussianBinomial"],
            &[vec![
                q.to_string(),
                m.to_string(),
                s.to_string(),
                n.to_string(),
                count.to_string(),
                oracle_str.unwrap_or_default(),
                gb.to_string(),
            ]],
        ),
    };
    Ok(Outcome {
        success: true,
        stdout,
        document,
    })
}
