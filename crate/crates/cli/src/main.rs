//! `bordism`: batch front end for the fixed-point realizability engine.
//!
//! Exit status: 0 on success or a realizable verdict, 1 on a certified
//! negative verdict (or a failing catalog), 2 on usage, parse or precision
//! errors.

use std::io::Read;
use std::process::ExitCode;

use bordism_core::borel::{euler_class, BorelSeries, LocalizedBorel, Obstruction, Weight};
use bordism_core::fixedring::FixedDatum;
use bordism_core::geometry::{catalog, phi_omega, underlying_class, CatalogBounds, ManifoldExpr};
use bordism_core::json;
use bordism_core::lazard::FormalSeries;
use bordism_core::realizability::{localize, realizable, Verdict};
use bordism_core::sexpr;
use bordism_core::{Error, MuElement, PowerSeries1, RingContext};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

const MAX_RANK: usize = 3;
const MAX_N: u32 = 12;
const MAX_D: u32 = 10;

#[derive(Parser, Debug)]
#[command(name = "bordism", version, about = "Exact fixed-point realizability for torus-equivariant complex bordism")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Torus rank r.
    #[arg(long = "r", global = true)]
    r: Option<usize>,

    /// Coefficient half-degree N (MU_* is truncated above it).
    #[arg(long = "N", global = true, default_value_t = 6)]
    n: u32,

    /// Borel degree D (C-degree through which series are computed).
    #[arg(long = "D", global = true, default_value_t = 5)]
    d: u32,

    /// Input expression.
    #[arg(long, global = true, conflicts_with = "file")]
    expr: Option<String>,

    /// Read the input expression from a file (default: standard input).
    #[arg(long, global = true)]
    file: Option<std::path::PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = InputFormat::Auto)]
    input: InputFormat,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,

    /// Basis for printed MU_* coefficients.
    #[arg(long, global = true, value_enum, default_value_t = Basis::Mischenko)]
    basis: Basis,

    /// Lift the default limits on r, N and D.
    #[arg(long, global = true)]
    allow_large: bool,

    /// Raise the default limits on N and D to this value.
    #[arg(long, env = "BORDISM_MAX_DEGREE", global = true, hide_env_values = true)]
    max_degree: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the formal group law, n-series and formal inverse through half-degree N.
    Fgl {
        /// n-series to print.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [2i64, -1])]
        series: Vec<i64>,
    },
    /// Print the Borel Euler class e(V) of a weight such as "(1,-2)".
    Euler { weight: Option<String> },
    /// Evaluate the geometric fixed-point map on a manifold expression.
    Phi,
    /// Apply the involution to a fixed-point datum.
    Antipode,
    /// Print the localized Borel image of a fixed-point datum.
    Localize,
    /// Decide realizability of a fixed-point datum (or of a manifold's image).
    Realizable,
    /// Run cone, integrality and augmentation checks over the test catalog.
    VerifyCatalog {
        /// Print one line per catalog entry.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Auto,
    Json,
    Sexpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Basis {
    Mischenko,
    Aij,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<bool, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

struct Config {
    rank: Option<usize>,
    d: u32,
    ctx: RingContext,
    input: InputFormat,
    output: OutputFormat,
    basis: Basis,
    source: Source,
}

enum Source {
    Expr(String),
    File(std::path::PathBuf),
    Stdin,
}

impl Config {
    fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let raise = cli.max_degree.unwrap_or(0);
        let (max_r, max_n, max_d) = if cli.allow_large {
            (usize::MAX, u32::MAX, u32::MAX)
        } else {
            (MAX_RANK, MAX_N.max(raise), MAX_D.max(raise))
        };
        let ack = "(pass --allow-large or set BORDISM_MAX_DEGREE to raise it)";
        if let Some(r) = cli.r {
            if r == 0 {
                return usage("--r must be at least 1");
            }
            if r > max_r {
                return usage(format!("--r {} exceeds the limit {} {}", r, max_r, ack));
            }
        }
        if cli.n == 0 {
            return usage("--N must be at least 1");
        }
        if cli.n > max_n {
            return usage(format!("--N {} exceeds the limit {} {}", cli.n, max_n, ack));
        }
        if cli.d > max_d {
            return usage(format!("--D {} exceeds the limit {} {}", cli.d, max_d, ack));
        }
        let source = match (&cli.expr, &cli.file) {
            (Some(e), _) => Source::Expr(e.clone()),
            (None, Some(f)) => Source::File(f.clone()),
            (None, None) => Source::Stdin,
        };
        Ok(Config {
            rank: cli.r,
            d: cli.d,
            ctx: RingContext::with_max(cli.n, max_n)?,
            input: cli.input,
            output: cli.output,
            basis: cli.basis,
            source,
        })
    }

    fn n(&self) -> u32 {
        self.ctx.n()
    }

    fn read_input(&self) -> Result<String, Failure> {
        let text = match &self.source {
            Source::Expr(e) => e.clone(),
            Source::File(p) => {
                std::fs::read_to_string(p).or_else(|e| usage(format!("cannot read {}: {}", p.display(), e)))?
            }
            Source::Stdin => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).or_else(|e| usage(format!("cannot read stdin: {}", e)))?;
                s
            }
        };
        if text.trim().is_empty() {
            return usage("no input: pass --expr, --file or pipe an expression on stdin");
        }
        Ok(text)
    }

    fn is_sexpr(&self, text: &str) -> bool {
        match self.input {
            InputFormat::Json => false,
            InputFormat::Sexpr => true,
            InputFormat::Auto => {
                let t = text.trim_start();
                t.starts_with('(') || t.trim_end() == "point"
            }
        }
    }

    fn rank_or(&self, found: Option<usize>) -> Result<usize, Failure> {
        match (self.rank, found) {
            (Some(a), Some(b)) if a != b => Err(Error::RankMismatch(b, a).into()),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Ok(1),
        }
    }

    fn mu(&self, x: &MuElement) -> String {
        match self.basis {
            Basis::Mischenko => x.to_string(),
            Basis::Aij => self.ctx.render_a1_basis(x),
        }
    }

    fn emit(&self, text: String, value: Value) {
        match self.output {
            OutputFormat::Text => println!("{}", text),
            OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&value).expect("serializable")),
        }
    }
}

enum Parsed {
    Datum(FixedDatum),
    Manifold(ManifoldExpr),
}

fn json_is_manifold(v: &Value) -> bool {
    match v {
        Value::String(s) => s == "point",
        Value::Array(items) => {
            matches!(items.first(), Some(Value::String(h)) if ["proj", "prod", "union"].contains(&h.as_str()))
        }
        _ => false,
    }
}

fn parse_input(cfg: &Config, want_manifold: bool) -> Result<Parsed, Failure> {
    let text = cfg.read_input()?;
    if cfg.is_sexpr(&text) {
        let s = sexpr::read(&text)?;
        let is_manifold = matches!(&s, sexpr::Sexp::Atom { .. })
            || matches!(&s, sexpr::Sexp::List { items, .. }
                if matches!(items.first(), Some(sexpr::Sexp::Atom { text, .. }) if ["proj", "prod", "union"].contains(&text.as_str())));
        if want_manifold || is_manifold {
            return Ok(Parsed::Manifold(sexpr::manifold_from_sexp(&s)?));
        }
        let rank = cfg.rank_or(sexp_rank(&s))?;
        return Ok(Parsed::Datum(sexpr::datum_from_sexp(&s, rank, cfg.n())?));
    }
    let v = json::parse(&text)?;
    if want_manifold || json_is_manifold(&v) {
        return Ok(Parsed::Manifold(json::manifold_from_json(&v)?));
    }
    let rank = cfg.rank_or(json_rank(&v))?;
    Ok(Parsed::Datum(json::datum_from_json(&v, rank, cfg.n())?))
}

/// Rank implied by the first weight mentioned in a JSON datum.
fn json_rank(v: &Value) -> Option<usize> {
    if let Some(r) = v.get("rank").and_then(Value::as_u64) {
        return Some(r as usize);
    }
    let terms: Vec<&Value> = match v {
        Value::Object(m) if m.contains_key("terms") => m["terms"].as_array()?.iter().collect(),
        Value::Array(ts) => ts.iter().collect(),
        other => vec![other],
    };
    terms.iter().find_map(|t| {
        let from_e = t.get("e").and_then(Value::as_object).and_then(|e| e.keys().next().cloned());
        let from_y = t
            .get("y")
            .and_then(Value::as_array)
            .and_then(|y| y.first())
            .and_then(|p| p.get(0))
            .and_then(|w| json::weight_from_json(w).ok())
            .map(|w| w.to_string());
        from_e.or(from_y).and_then(|w| w.parse::<Weight>().ok()).map(|w| w.rank())
    })
}

fn sexp_rank(s: &sexpr::Sexp) -> Option<usize> {
    use sexpr::Sexp;
    fn walk(s: &Sexp) -> Option<usize> {
        let Sexp::List { items, .. } = s else { return None };
        match items.first() {
            Some(Sexp::Atom { text, .. }) if text == "e" || text == "y" => match items.get(1) {
                Some(Sexp::List { items, .. }) => Some(items.len()),
                _ => None,
            },
            _ => items.iter().find_map(walk),
        }
    }
    walk(s)
}

fn datum_text(cfg: &Config, x: &FixedDatum) -> String {
    if cfg.basis == Basis::Mischenko {
        return x.to_string();
    }
    if x.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = x
        .terms()
        .map(|(m, c)| match c.as_rational() {
            Some(_) => FixedDatum::term(x.rank(), m.clone(), c.clone()).expect("rank").to_string(),
            None if m.is_one() => format!("({})", cfg.mu(c)),
            None => format!("({})*{}", cfg.mu(c), m),
        })
        .collect();
    let mut out = String::new();
    for (i, p) in parts.iter().enumerate() {
        match (i, p.strip_prefix('-')) {
            (0, _) => out.push_str(p),
            (_, Some(rest)) => out.push_str(&format!(" - {}", rest)),
            (_, None) => out.push_str(&format!(" + {}", p)),
        }
    }
    out
}

fn c_monomial(alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("C{}", i + 1) } else { format!("C{}^{}", i + 1, k) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn borel_terms_text(cfg: &Config, s: &BorelSeries) -> String {
    if s.is_empty() {
        return "0".into();
    }
    let mut items: Vec<_> = s.terms().collect();
    items.sort_by(|a, b| a.0.iter().sum::<u32>().cmp(&b.0.iter().sum::<u32>()).then(b.0.cmp(a.0)));
    let parts: Vec<String> = items.into_iter().map(|(m, c)| format!("({})*{}", cfg.mu(c), c_monomial(m))).collect();
    parts.join(" + ")
}

fn borel_text(cfg: &Config, s: &BorelSeries) -> String {
    match cfg.basis {
        Basis::Mischenko => s.to_string(),
        Basis::Aij => format!("{} + O(C^{})", borel_terms_text(cfg, s), s.trunc() + 1),
    }
}

fn localized_text(cfg: &Config, x: &LocalizedBorel) -> String {
    if cfg.basis == Basis::Mischenko {
        return x.to_string();
    }
    if x.denominator().is_empty() {
        return borel_text(cfg, x.numerator());
    }
    let den: Vec<String> = x
        .denominator()
        .iter()
        .map(|(w, k)| if *k == 1 { format!("e{}", w) } else { format!("e{}^{}", w, k) })
        .collect();
    format!("({}) / ({}) + O(C^{})", borel_terms_text(cfg, x.numerator()), den.join("*"), x.precision() + 1)
}

fn series_text(cfg: &Config, s: &PowerSeries1) -> String {
    if cfg.basis == Basis::Mischenko {
        return s.to_string();
    }
    let parts: Vec<String> = s
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| match k {
            0 => format!("({})", cfg.mu(c)),
            1 => format!("({})*x", cfg.mu(c)),
            _ => format!("({})*x^{}", cfg.mu(c), k),
        })
        .collect();
    let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
    format!("{} + O(x^{})", body, s.truncation() + 1)
}

fn series_json(s: &PowerSeries1) -> Value {
    Value::Array(s.coeffs().iter().map(json::mu_to_json).collect())
}

fn cmd_fgl(cfg: &Config, series: &[i64]) -> Outcome {
    let ctx = &cfg.ctx;
    let mut lines = vec![format!("F(x,y) = x + y + sum a(i,j) x^i y^j through half-degree {}", ctx.n())];
    let mut table = serde_json::Map::new();
    for (&(i, j), c) in ctx.fgl_table() {
        if i == 0 || j == 0 || i > j || c.is_zero() {
            continue;
        }
        lines.push(format!("a({},{}) = {}", i, j, cfg.mu(c)));
        table.insert(format!("({},{})", i, j), json::mu_to_json(c));
    }
    let mut ns = serde_json::Map::new();
    for &k in series {
        let s = ctx.n_series_1(k);
        lines.push(format!("[{}](x) = {}", k, series_text(cfg, &s)));
        ns.insert(k.to_string(), series_json(&s));
    }
    let inv = ctx.formal_inverse(&PowerSeries1::x(ctx.n() + 1, ctx.n()))?;
    lines.push(format!("i(x) = {}", series_text(cfg, &inv)));
    cfg.emit(lines.join("\n"), json!({"N": ctx.n(), "fgl": table, "n_series": ns, "inverse": series_json(&inv)}));
    Ok(true)
}

fn cmd_euler(cfg: &Config, weight: Option<&str>) -> Outcome {
    let text = match weight {
        Some(w) => w.to_string(),
        None => cfg.read_input()?,
    };
    let w: Weight = if text.trim_start().starts_with('"') || text.trim_start().starts_with('[') {
        json::weight_from_json(&json::parse(&text)?)?
    } else {
        text.trim().parse()?
    };
    cfg.rank_or(Some(w.rank()))?;
    let e = euler_class(&cfg.ctx, &w, cfg.d)?;
    cfg.emit(
        format!("e{} = {}", w, borel_text(cfg, &e)),
        json!({"weight": w.to_string(), "euler": json::borel_to_json(&e)}),
    );
    Ok(true)
}

fn manifold_datum(cfg: &Config, m: &ManifoldExpr) -> Result<FixedDatum, Failure> {
    let rank = cfg.rank_or(m.rank()?)?;
    Ok(phi_omega(&cfg.ctx, m, rank)?)
}

fn cmd_phi(cfg: &Config) -> Outcome {
    let Parsed::Manifold(m) = parse_input(cfg, true)? else { unreachable!("manifold requested") };
    let x = manifold_datum(cfg, &m)?;
    cfg.emit(datum_text(cfg, &x), json::datum_to_json(&x));
    Ok(true)
}

fn datum_input(cfg: &Config) -> Result<FixedDatum, Failure> {
    match parse_input(cfg, false)? {
        Parsed::Datum(x) => Ok(x),
        Parsed::Manifold(m) => manifold_datum(cfg, &m),
    }
}

fn cmd_antipode(cfg: &Config) -> Outcome {
    let x = datum_input(cfg)?.antipode();
    cfg.emit(datum_text(cfg, &x), json::datum_to_json(&x));
    Ok(true)
}

fn cmd_localize(cfg: &Config) -> Outcome {
    let loc = localize(&cfg.ctx, &datum_input(cfg)?, cfg.d)?;
    cfg.emit(localized_text(cfg, &loc), json::localized_to_json(&loc));
    Ok(true)
}

fn witness_text(cfg: &Config, o: &Obstruction) -> String {
    format!("{} at C-degree {}: ({})*{}", o.kind, o.degree, cfg.mu(&o.coefficient), c_monomial(&o.monomial))
}

fn verdict_text(cfg: &Config, v: &Verdict) -> String {
    let mut lines = vec![
        format!("realizable: {}", if v.realizable() { "yes" } else { "no" }),
        format!("cone: {}", if v.cone_ok() { "pass" } else { "fail" }),
    ];
    lines.push(match v.witness() {
        None => format!("integrality: pass through C-degree {}", v.precision()),
        Some((deg, w)) => format!("integrality: fail in degree {}: {}", deg, witness_text(cfg, w)),
    });
    if v.is_heterogeneous() {
        let degs: Vec<String> = v.components.iter().map(|c| c.degree.to_string()).collect();
        lines.push(format!("note: input is not homogeneous; judged in degrees {}", degs.join(", ")));
    }
    lines.push(match v.constant_term(cfg.n()) {
        Some(c) => format!("constant term: {}", cfg.mu(&c)),
        None => "constant term: none".into(),
    });
    if v.realizable() {
        lines.push(format!("claim: no obstruction through C-degree {} (truncation-bounded)", v.precision()));
    }
    lines.join("\n")
}

fn cmd_realizable(cfg: &Config) -> Outcome {
    let x = datum_input(cfg)?;
    let v = realizable(&cfg.ctx, &x, cfg.d)?;
    cfg.emit(verdict_text(cfg, &v), json::verdict_to_json(&v, cfg.n()));
    Ok(v.realizable())
}

struct EntryReport {
    manifold: ManifoldExpr,
    cone: bool,
    integral: bool,
    augmentation: bool,
    error: Option<String>,
}

fn check_entry(ctx: &RingContext, m: &ManifoldExpr, rank: usize, d: u32) -> EntryReport {
    let run = || -> bordism_core::Result<(bool, bool, bool)> {
        let x = phi_omega(ctx, m, rank)?;
        let v = realizable(ctx, &x, d)?;
        let aug = v.constant_term(ctx.n()) == Some(underlying_class(ctx, m)?);
        Ok((v.cone_ok(), v.integrality_ok(), aug))
    };
    match run() {
        Ok((cone, integral, augmentation)) => {
            EntryReport { manifold: m.clone(), cone, integral, augmentation, error: None }
        }
        Err(e) => EntryReport {
            manifold: m.clone(),
            cone: false,
            integral: false,
            augmentation: false,
            error: Some(e.to_string()),
        },
    }
}

fn cmd_verify_catalog(cfg: &Config, list: bool) -> Outcome {
    let rank = cfg.rank_or(None)?;
    let entries = catalog(rank, &CatalogBounds::default_for_rank(rank));
    let reports: Vec<EntryReport> = entries.par_iter().map(|m| check_entry(&cfg.ctx, m, rank, cfg.d)).collect();
    let count = |f: &dyn Fn(&EntryReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let (cone, integral, aug) = (count(&|r| r.cone), count(&|r| r.integral), count(&|r| r.augmentation));
    let total = reports.len();
    let pass = cone == total && integral == total && aug == total;

    let mark = |b: bool| if b { "ok" } else { "FAIL" };
    let mut lines = Vec::new();
    for r in &reports {
        let failed = !(r.cone && r.integral && r.augmentation);
        if list || failed {
            let mut line = format!(
                "{}  cone {}  integrality {}  augmentation {}",
                r.manifold,
                mark(r.cone),
                mark(r.integral),
                mark(r.augmentation)
            );
            if let Some(e) = &r.error {
                line.push_str(&format!("  error: {}", e));
            }
            lines.push(line);
        }
    }
    lines.push(format!("catalog r={} N={} D={}: {} manifolds", rank, cfg.n(), cfg.d, total));
    lines.push(format!("  cone containment: {}/{}", cone, total));
    lines.push(format!("  integrality:      {}/{}", integral, total));
    lines.push(format!("  augmentation:     {}/{}", aug, total));
    lines.push(if pass {
        "all pass".into()
    } else {
        format!("{} failing", count(&|r| !(r.cone && r.integral && r.augmentation)))
    });

    let failures: Vec<Value> = reports
        .iter()
        .filter(|r| !(r.cone && r.integral && r.augmentation))
        .map(|r| {
            json!({"manifold": json::manifold_to_json(&r.manifold), "cone_ok": r.cone,
                   "integral": r.integral, "augmentation": r.augmentation, "error": r.error})
        })
        .collect();
    cfg.emit(
        lines.join("\n"),
        json!({"rank": rank, "N": cfg.n(), "D": cfg.d, "total": total, "cone_ok": cone,
               "integral": integral, "augmentation": aug, "pass": pass, "failures": failures}),
    );
    Ok(pass)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = Config::from_cli(cli)?;
    match &cli.command {
        Command::Fgl { series } => cmd_fgl(&cfg, series),
        Command::Euler { weight } => cmd_euler(&cfg, weight.as_deref()),
        Command::Phi => cmd_phi(&cfg),
        Command::Antipode => cmd_antipode(&cfg),
        Command::Localize => cmd_localize(&cfg),
        Command::Realizable => cmd_realizable(&cfg),
        Command::VerifyCatalog { list } => cmd_verify_catalog(&cfg, *list),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
