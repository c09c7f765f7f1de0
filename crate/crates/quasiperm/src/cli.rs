//! The `quasiperm` command line.
//!
//! Exit codes: 0 on success, 1 when a mathematical check fails or a search comes
//! back empty, 2 on usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasiperm_core::classify::{
    self, Budget, ClassStatus, ClassifyError, HessianTable, ScanEntry, ScanReport, SetClass,
    SidedPerturbation, Verdict, Witness,
};
use quasiperm_core::flag::{
    builtin_certificate, builtin_certificates, check_linear_relations, verify_certificate, Certificate,
    CertificateReport, Definiteness,
};
use quasiperm_core::perm::pattern_density;
use quasiperm_core::perturbation::{
    cover_matrix, gradient_formula, gradient_symbolic, hessian, inertia, Inertia, SymmetricForm,
};
use quasiperm_core::rational::{approx, render};
use quasiperm_core::step::{blend_witness_for, step_densities, BlendInterval, BlendPolynomial};
use quasiperm_core::{PermSet, Permutation, Rational, RationalMatrix};
use serde_json::{json, Value};

use crate::fixtures::{fixtures_dir, witness_path, WitnessStore};
use crate::format::{
    load_certificate, load_matrix, load_set, load_symmetric, matrix_json, rat, rats, save_witness, set_json,
    FormatError, WitnessFile, SCHEMA,
};
use crate::mutation::mutate;
use crate::scan::parallel_scan;

#[derive(Debug, Parser)]
#[command(
    name = "quasiperm",
    version,
    about = "Exact checks for sets of 4-point permutation patterns"
)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Append decimal approximations, marked with `≈`.
    #[arg(long, global = true)]
    approx: bool,
    /// Worker threads for the parallel paths.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Default,
    Small,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Search budget preset.
    #[arg(long, value_enum, default_value = "default")]
    budget: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        match self.budget {
            Preset::Default => Budget::default(),
            Preset::Small => Budget::small(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Formula,
    Symbolic,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Density of a pattern in a permutation.
    Density {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        host: String,
    },
    /// Pattern densities of a step permuton.
    StepDensity {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, conflicts_with_all = ["set", "order"])]
        pattern: Option<String>,
        #[arg(long, conflicts_with = "order")]
        set: Option<String>,
        /// Every pattern of this order.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Cover matrix of a set.
    Cover {
        #[arg(long)]
        set: String,
    },
    /// Gradient of the density sum at the uniform permuton.
    Gradient {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value = "formula")]
        method: Method,
        /// Also compare the formula against the polynomial expansion.
        #[arg(long)]
        check: bool,
    },
    /// Hessian of the density sum at the uniform permuton, with its inertia.
    Hessian {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Inertia of a set's Hessian or of a symmetric matrix file.
    Inertia {
        #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
        set: Option<String>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Verify flag-algebra certificates (all built-ins by default).
    Certify {
        /// Built-in certificate name.
        name: Option<String>,
        /// Certificate JSON file instead of a built-in.
        #[arg(long, conflicts_with = "name")]
        file: Option<PathBuf>,
        /// Single-entry edit, e.g. `M[0][0]=-1` or `w1[0][[1]2[3]4]=2`.
        #[arg(long)]
        mutate: Vec<String>,
    },
    /// Linear relations among the transcribed flag vectors.
    Relations,
    /// Constant-cover classes of a given size.
    Enumerate {
        #[arg(long)]
        size: usize,
    },
    /// Constant-cover classes whose Hessian misses a sign.
    Exceptional,
    /// Forcing verdict with evidence.
    Classify {
        #[arg(long)]
        set: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Ignore stored witnesses.
        #[arg(long)]
        no_fixtures: bool,
    },
    /// Search for permutons on both sides of |S|/24.
    Search {
        #[arg(long)]
        set: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Store the witness in the fixtures directory.
        #[arg(long)]
        save: bool,
    },
    /// Crossing interval of the diagonal blend of two step permutons.
    Blend {
        #[arg(long)]
        set: String,
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        high: PathBuf,
        /// Bracket width 2^-bits.
        #[arg(long, default_value_t = 20)]
        bits: u32,
    },
    /// Classify all 2^24 subsets.
    Scan {
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        no_fixtures: bool,
        /// List every constant-cover class.
        #[arg(long)]
        classes: bool,
    },
}

struct Output {
    json: Value,
    text: String,
    ok: bool,
}

impl Output {
    fn new(json: Value, text: String, ok: bool) -> Self {
        Self { json, text, ok }
    }
}

struct Ctx {
    approx: bool,
}

impl Ctx {
    fn r(&self, v: &Rational) -> String {
        if self.approx {
            format!("{} (≈ {:.9})", render(v), approx(v))
        } else {
            render(v)
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn perm(text: &str, what: &str) -> Result<Permutation, Failure> {
    text.parse()
        .map_err(|e| Failure::Input(format!("{what} `{text}`: {e}")))
}

fn flat(rows: &[Vec<Rational>]) -> Value {
    Value::Array(rows.iter().map(|r| rats(r)).collect())
}

fn inertia_json(i: &Inertia) -> Value {
    json!({"pos": i.pos, "neg": i.neg, "zero": i.zero})
}

fn grid_text(rows: &[Vec<String>]) -> String {
    let width = rows
        .iter()
        .flatten()
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(1);
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|c| format!("{c:>width$}"))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn braces(s: PermSet) -> String {
    format!("{{{s}}}")
}

/// Runs the tool; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut notes = Vec::new();
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut notes)),
            Err(e) => Err(Failure::Usage(format!("--jobs {n}: {e}"))),
        },
        None => dispatch(&cli, &mut notes),
    };
    let _ = err.write_all(&notes);
    match result {
        Ok(output) => {
            if cli.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&output.json).expect("serializable")
                );
            } else {
                let _ = writeln!(out, "{}", output.text.trim_end());
            }
            if output.ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn dispatch(cli: &Cli, err: &mut Vec<u8>) -> Result<Output, Failure> {
    let ctx = Ctx { approx: cli.approx };
    match &cli.verb {
        Verb::Density { pattern, host } => density(&ctx, pattern, host),
        Verb::StepDensity {
            matrix,
            pattern,
            set,
            order,
        } => step_density(&ctx, matrix, pattern.as_deref(), set.as_deref(), *order),
        Verb::Cover { set } => cover(set),
        Verb::Gradient {
            set,
            n,
            method,
            check,
        } => gradient(&ctx, set, *n, *method, *check),
        Verb::Hessian { set, n } => hessian_verb(set, *n),
        Verb::Inertia { set, n, matrix } => inertia_verb(set.as_deref(), *n, matrix.as_deref()),
        Verb::Certify { name, file, mutate } => certify(&ctx, name.as_deref(), file.as_deref(), mutate),
        Verb::Relations => relations(),
        Verb::Enumerate { size } => enumerate(*size),
        Verb::Exceptional => exceptional(),
        Verb::Classify {
            set,
            budget,
            no_fixtures,
        } => classify_verb(&ctx, set, budget, *no_fixtures),
        Verb::Search { set, budget, save } => search(&ctx, set, budget, *save, err),
        Verb::Blend { set, low, high, bits } => blend(&ctx, set, low, high, *bits),
        Verb::Scan {
            budget,
            no_fixtures,
            classes,
        } => scan(budget, *no_fixtures, *classes),
    }
}

fn density(ctx: &Ctx, pattern: &str, host: &str) -> Result<Output, Failure> {
    let p = perm(pattern, "pattern")?;
    let h = perm(host, "host")?;
    let d = pattern_density(&p, &h);
    Ok(Output::new(
        json!({"schema": SCHEMA, "pattern": pattern, "host": host, "density": rat(&d)}),
        ctx.r(&d),
        true,
    ))
}

fn step_density(
    ctx: &Ctx,
    matrix: &Path,
    pattern: Option<&str>,
    set: Option<&str>,
    order: Option<usize>,
) -> Result<Output, Failure> {
    let a = load_matrix(matrix)?;
    if let Some(p) = pattern {
        let p = perm(p, "pattern")?;
        let d = quasiperm_core::step::step_density(&a, &p).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(Output::new(
            json!({"schema": SCHEMA, "n": a.order(), "pattern": p.to_string(), "density": rat(&d)}),
            ctx.r(&d),
            true,
        ));
    }
    if let Some(s) = set {
        let s = load_set(s)?;
        let sum = quasiperm_core::step::set_density_sum(&a, s);
        return Ok(Output::new(
            json!({"schema": SCHEMA, "n": a.order(), "set": set_json(s), "sum": rat(&sum)}),
            ctx.r(&sum),
            true,
        ));
    }
    let k = order.unwrap_or(4);
    let densities = step_densities(&a, k).map_err(|e| Failure::Usage(e.to_string()))?;
    let perms = Permutation::all(k);
    let text = perms
        .iter()
        .zip(&densities)
        .map(|(p, d)| format!("{:>width$}  {}", p.to_string(), ctx.r(d), width = k.max(1)))
        .collect::<Vec<_>>()
        .join("\n");
    let entries: Vec<Value> = perms
        .iter()
        .zip(&densities)
        .map(|(p, d)| json!({"pattern": p.to_string(), "density": rat(d)}))
        .collect();
    Ok(Output::new(
        json!({"schema": SCHEMA, "n": a.order(), "order": k, "densities": entries}),
        text,
        true,
    ))
}

fn cover(set: &str) -> Result<Output, Failure> {
    let s = load_set(set)?;
    let c = cover_matrix(s);
    let rows: Vec<Vec<String>> =
        c.0.iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
    let text = format!(
        "cover matrix of {} (rows: values 1..4, columns: positions 1..4)\n{}\nconstant: {}",
        braces(s),
        grid_text(&rows),
        c.is_constant()
    );
    Ok(Output::new(
        json!({"schema": SCHEMA, "set": set_json(s), "cover": c.0, "constant": c.is_constant()}),
        text,
        true,
    ))
}

fn check_order(n: usize) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::Usage(format!("--n {n}: block order must be at least 2")));
    }
    Ok(())
}

fn gradient(ctx: &Ctx, set: &str, n: usize, method: Method, check: bool) -> Result<Output, Failure> {
    check_order(n)?;
    let s = load_set(set)?;
    let g = match method {
        Method::Formula => gradient_formula(s, n),
        Method::Symbolic => gradient_symbolic(s, n),
    };
    let agrees = check.then(|| gradient_formula(s, n) == gradient_symbolic(s, n));
    let m = n - 1;
    let rows: Vec<Vec<String>> = g
        .chunks(m)
        .map(|r| r.iter().map(|v| ctx.r(v)).collect())
        .collect();
    let mut text = format!(
        "gradient at n = {n}, x[i][j] in row-major order\n{}",
        grid_text(&rows)
    );
    if let Some(a) = agrees {
        text.push_str(&format!("\nformula = expansion: {a}"));
    }
    let mut doc = json!({"schema": SCHEMA, "n": n, "index_order": "row-major", "gradient": rats(&g)});
    if let Some(a) = agrees {
        doc["formula_matches_expansion"] = json!(a);
    }
    Ok(Output::new(doc, text, agrees.unwrap_or(true)))
}

fn hessian_verb(set: &str, n: usize) -> Result<Output, Failure> {
    check_order(n)?;
    let s = load_set(set)?;
    let h = hessian(s, n);
    let i = inertia(&h);
    let rows = h.rows();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(render).collect()).collect();
    let text = format!(
        "Hessian at n = {n}, x[i][j] in row-major order\n{}\ninertia: {} positive, {} negative, {} zero",
        grid_text(&cells),
        i.pos,
        i.neg,
        i.zero
    );
    Ok(Output::new(
        json!({"schema": SCHEMA, "n": n, "index_order": "row-major", "hessian": flat(&rows), "inertia": inertia_json(&i)}),
        text,
        true,
    ))
}

fn inertia_verb(set: Option<&str>, n: usize, matrix: Option<&Path>) -> Result<Output, Failure> {
    let (form, label): (SymmetricForm, String) = match (set, matrix) {
        (_, Some(path)) => (load_symmetric(path)?, path.display().to_string()),
        (Some(set), None) => {
            check_order(n)?;
            let s = load_set(set)?;
            (hessian(s, n), format!("Hessian of {} at n = {n}", braces(s)))
        }
        (None, None) => return Err(Failure::Usage("inertia needs --set or --matrix".into())),
    };
    let i = inertia(&form);
    Ok(Output::new(
        json!({"schema": SCHEMA, "source": label, "order": form.order(), "inertia": inertia_json(&i)}),
        format!("{label}: {} positive, {} negative, {} zero", i.pos, i.neg, i.zero),
        true,
    ))
}

fn definiteness_json(d: &Definiteness) -> Value {
    match d {
        Definiteness::PositiveDefinite { minors } => json!({"verdict": d.label(), "minors": rats(minors)}),
        Definiteness::PositiveSemidefinite { inertia } | Definiteness::Indefinite { inertia } => {
            json!({"verdict": d.label(), "inertia": inertia_json(inertia)})
        }
    }
}

fn report_json(r: &CertificateReport, mutations: &[String]) -> Value {
    json!({
        "name": r.name,
        "pass": r.passed(),
        "scale": r.scale.as_ref().map(rat),
        "expected_scale": rat(&r.expected_scale),
        "definiteness": definiteness_json(&r.definiteness),
        "residuals": r.residuals.iter().map(|(p, v)| json!({"sigma": p.to_string(), "value": rat(v)})).collect::<Vec<_>>(),
        "failure": r.failure.as_ref().map(|f| f.to_string()),
        "mutations": mutations,
    })
}

fn report_text(ctx: &Ctx, c: &Certificate, r: &CertificateReport) -> String {
    let scale = r.scale.as_ref().map_or("none".to_string(), |s| ctx.r(s));
    let mut line = format!(
        "{:<6} {:<4}  scale {:<8} (expected {})  M {}",
        r.name,
        if r.passed() { "PASS" } else { "FAIL" },
        scale,
        render(&r.expected_scale),
        r.definiteness.label()
    );
    line.push_str(&format!("\n       {c}"));
    if let Some(f) = &r.failure {
        line.push_str(&format!("\n       failure: {f}"));
    }
    line
}

fn certify(
    ctx: &Ctx,
    name: Option<&str>,
    file: Option<&Path>,
    mutations: &[String],
) -> Result<Output, Failure> {
    let mut certs: Vec<Certificate> = match (name, file) {
        (_, Some(path)) => vec![load_certificate(path)?],
        (Some(n), None) => vec![builtin_certificate(n).ok_or_else(|| {
            let known: Vec<String> = builtin_certificates().into_iter().map(|c| c.name).collect();
            Failure::Usage(format!("unknown certificate `{n}` (known: {})", known.join(", ")))
        })?],
        (None, None) => builtin_certificates(),
    };
    if !mutations.is_empty() && certs.len() != 1 {
        return Err(Failure::Usage("--mutate needs a single certificate".into()));
    }
    for spec in mutations {
        certs[0] = mutate(&certs[0], spec).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let reports: Vec<CertificateReport> = certs.iter().map(verify_certificate).collect();
    let ok = reports.iter().all(CertificateReport::passed);
    let docs: Vec<Value> = reports.iter().map(|r| report_json(r, mutations)).collect();
    let json = if docs.len() == 1 {
        let mut d = docs[0].clone();
        d["schema"] = json!(SCHEMA);
        d
    } else {
        json!({"schema": SCHEMA, "pass": ok, "certificates": docs})
    };
    let text = certs
        .iter()
        .zip(&reports)
        .map(|(c, r)| report_text(ctx, c, r))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output::new(json, text, ok))
}

fn relations() -> Result<Output, Failure> {
    let (rels, failure) = match check_linear_relations() {
        Ok(r) => (r, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let text = if let Some(f) = &failure {
        format!("FAIL: {f}")
    } else {
        rels.iter()
            .map(|r| {
                let tag = match (r.holds, r.required) {
                    (true, _) => "holds",
                    (false, true) => "FAILS",
                    (false, false) => "does not hold (informational)",
                };
                format!("{:<34} {tag}", r.name)
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let docs: Vec<Value> = rels
        .iter()
        .map(|r| json!({"name": r.name, "holds": r.holds, "required": r.required}))
        .collect();
    Ok(Output::new(
        json!({"schema": SCHEMA, "pass": failure.is_none(), "relations": docs, "failure": failure}),
        text,
        failure.is_none(),
    ))
}

fn class_json(c: &SetClass) -> Value {
    json!({
        "representative": set_json(c.representative),
        "size": c.representative.len(),
        "orbit_size": c.orbit_size,
        "constant_cover": c.constant_cover,
    })
}

fn class_line(c: &SetClass) -> String {
    format!(
        "{:>2}  orbit {:>2}  {}",
        c.representative.len(),
        c.orbit_size,
        braces(c.representative)
    )
}

fn enumerate(size: usize) -> Result<Output, Failure> {
    let classes = classify::enumerate_constant_cover(size).map_err(|e| Failure::Usage(e.to_string()))?;
    let grouping = if size == 12 {
        "symmetry and complement"
    } else {
        "symmetry"
    };
    let mut text = format!(
        "{} constant-cover classes of size {size} up to {grouping}\n",
        classes.len()
    );
    text.push_str(&classes.iter().map(class_line).collect::<Vec<_>>().join("\n"));
    Ok(Output::new(
        json!({"schema": SCHEMA, "size": size, "grouping": grouping, "count": classes.len(), "classes": classes.iter().map(class_json).collect::<Vec<_>>()}),
        text,
        true,
    ))
}

fn exceptional() -> Result<Output, Failure> {
    let table = HessianTable::new();
    match classify::exceptional_sets_with(&table) {
        Ok(classes) => {
            let lines: Vec<String> = classes
                .iter()
                .map(|c| {
                    let i = inertia(&table.hessian(c.representative));
                    format!("{}  inertia ({}, {}, {})", class_line(c), i.pos, i.neg, i.zero)
                })
                .collect();
            let docs: Vec<Value> = classes
                .iter()
                .map(|c| {
                    let mut d = class_json(c);
                    d["inertia"] = inertia_json(&inertia(&table.hessian(c.representative)));
                    d
                })
                .collect();
            Ok(Output::new(
                json!({"schema": SCHEMA, "pass": true, "count": classes.len(), "classes": docs}),
                format!(
                    "{} exceptional classes, matching the printed list\n{}",
                    classes.len(),
                    lines.join("\n")
                ),
                true,
            ))
        }
        Err(e) => Ok(Output::new(
            json!({"schema": SCHEMA, "pass": false, "failure": e.to_string()}),
            format!("FAIL: {e}"),
            false,
        )),
    }
}

fn sides_json(n: usize, s: &SidedPerturbation) -> Value {
    json!({
        "n": n,
        "index_order": "row-major",
        "x_low": rats(s.x_low.coordinates()),
        "x_high": rats(s.x_high.coordinates()),
        "h_low": rat(&s.h_low),
        "h_high": rat(&s.h_high),
    })
}

fn interval_json(i: &BlendInterval) -> Value {
    json!({"lo": rat(&i.lo), "hi": rat(&i.hi), "f_lo": rat(&i.f_lo), "f_hi": rat(&i.f_hi), "width": rat(&i.width())})
}

fn polynomial_json(p: &BlendPolynomial) -> Value {
    rats(&p.coefficients)
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "low": matrix_json(&w.low),
        "high": matrix_json(&w.high),
        "low_sum": rat(&w.low_sum),
        "high_sum": rat(&w.high_sum),
        "low_source": w.low_source,
        "high_source": w.high_source,
        "polynomial": polynomial_json(&w.polynomial),
        "interval": interval_json(&w.interval),
    })
}

fn evidence_json(status: &ClassStatus) -> Value {
    match status {
        ClassStatus::Pending {
            low_found,
            high_found,
        } => json!({"low_found": low_found, "high_found": high_found}),
        ClassStatus::Verdict(v) => match v {
            Verdict::SigmaForcing {
                certificate,
                op,
                complemented,
            } => json!({"certificate": certificate, "op": op.name(), "complemented": complemented}),
            Verdict::NotForcingGradient(e) => {
                let mut d = sides_json(e.n, &e.sides);
                d["gradient"] = rats(&e.gradient);
                d
            }
            Verdict::NotForcingHessian(e) => {
                let mut d = sides_json(e.n, &e.sides);
                d["inertia"] = inertia_json(&e.inertia);
                d
            }
            Verdict::NotForcingWitness(w) => witness_json(w),
            Verdict::NotForcingTrivial { witness } => json!({"witness": matrix_json(witness)}),
        },
    }
}

fn entry_json(e: &ScanEntry) -> Value {
    json!({
        "representative": set_json(e.class.representative),
        "orbit_size": e.class.orbit_size,
        "verdict": e.status.label(),
        "evidence": evidence_json(&e.status),
    })
}

fn status_text(ctx: &Ctx, status: &ClassStatus) -> String {
    match status {
        ClassStatus::Pending {
            low_found,
            high_found,
        } => format!("pending (low side found: {low_found}, high side found: {high_found})"),
        ClassStatus::Verdict(v) => match v {
            Verdict::SigmaForcing {
                certificate,
                op,
                complemented,
            } => format!(
                "sigma-forcing: image of {certificate} under {}{}",
                op.name(),
                if *complemented { ", complemented" } else { "" }
            ),
            Verdict::NotForcingGradient(e) => format!(
                "not forcing (gradient at n = {}): h(-x) = {}, h(+x) = {}",
                e.n,
                ctx.r(&e.sides.h_low),
                ctx.r(&e.sides.h_high)
            ),
            Verdict::NotForcingHessian(e) => format!(
                "not forcing (Hessian at n = {}, inertia ({}, {}, {})): h = {} and {}",
                e.n,
                e.inertia.pos,
                e.inertia.neg,
                e.inertia.zero,
                ctx.r(&e.sides.h_low),
                ctx.r(&e.sides.h_high)
            ),
            Verdict::NotForcingWitness(w) => format!(
                "not forcing (witnesses): low {} from {}, high {} from {}, crossing in [{}, {}]",
                ctx.r(&w.low_sum),
                w.low_source,
                ctx.r(&w.high_sum),
                w.high_source,
                render(&w.interval.lo),
                render(&w.interval.hi)
            ),
            Verdict::NotForcingTrivial { .. } => "not forcing (trivial: the sum is constant)".into(),
        },
    }
}

fn load_store(no_fixtures: bool) -> Result<Option<WitnessStore>, Failure> {
    if no_fixtures {
        return Ok(None);
    }
    Ok(Some(WitnessStore::load(&fixtures_dir())?))
}

fn classify_verb(ctx: &Ctx, set: &str, budget: &BudgetArgs, no_fixtures: bool) -> Result<Output, Failure> {
    let s = load_set(set)?;
    let store = load_store(no_fixtures)?;
    let table = HessianTable::new();
    let class = SetClass {
        representative: s,
        orbit_size: SetClass::of(s, true).orbit_size,
        constant_cover: cover_matrix(s).is_constant(),
    };
    let supplied = store.as_ref().and_then(|st| st.lookup(s));
    let b = budget.budget();
    let entry = if supplied.is_none() && budget.seed != 0 {
        // An explicit seed drives the search directly.
        let status = match classify::classify_set_with(s, &b, budget.seed, &table) {
            Ok(v) => ClassStatus::Verdict(v),
            Err(ClassifyError::BudgetExhausted {
                low_found,
                high_found,
            }) => ClassStatus::Pending {
                low_found,
                high_found,
            },
            Err(e) => return Err(Failure::Input(e.to_string())),
        };
        ScanEntry { class, status }
    } else {
        classify::classify_class(class, supplied, &b, &table)
    };
    let ok = !matches!(entry.status, ClassStatus::Pending { .. });
    let mut doc = entry_json(&entry);
    doc["schema"] = json!(SCHEMA);
    Ok(Output::new(
        doc,
        format!("{}: {}", braces(s), status_text(ctx, &entry.status)),
        ok,
    ))
}

fn search(
    ctx: &Ctx,
    set: &str,
    budget: &BudgetArgs,
    save: bool,
    err: &mut Vec<u8>,
) -> Result<Output, Failure> {
    let s = load_set(set)?;
    let _ = writeln!(
        err,
        "searching for witnesses of {} (seed {})",
        braces(s),
        budget.seed
    );
    match classify::counterexample_search(s, &budget.budget(), budget.seed) {
        Ok(w) => {
            let mut doc = witness_json(&w);
            doc["schema"] = json!(SCHEMA);
            doc["set"] = set_json(s);
            doc["seed"] = json!(budget.seed);
            let mut text = format!(
                "low:  {} from {}\nhigh: {} from {}\ntarget {}; blend crosses in [{}, {}]",
                ctx.r(&w.low_sum),
                w.low_source,
                ctx.r(&w.high_sum),
                w.high_source,
                render(&classify::target_sum(s)),
                render(&w.interval.lo),
                render(&w.interval.hi)
            );
            if save {
                let dir = fixtures_dir();
                let path = witness_path(&dir, s);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| Failure::Input(format!("{}: {e}", parent.display())))?;
                }
                let file = WitnessFile {
                    set: s,
                    seed: budget.seed,
                    low: w.low.clone(),
                    high: w.high.clone(),
                    low_source: w.low_source.clone(),
                    high_source: w.high_source.clone(),
                };
                save_witness(&file, &path)?;
                text.push_str(&format!("\nsaved {}", path.display()));
                doc["saved"] = json!(path.display().to_string());
            }
            Ok(Output::new(doc, text, true))
        }
        Err(e) => Ok(Output::new(
            json!({"schema": SCHEMA, "set": set_json(s), "seed": budget.seed, "pass": false, "failure": e.to_string()}),
            format!("{}: {e}", braces(s)),
            false,
        )),
    }
}

fn blend(ctx: &Ctx, set: &str, low: &Path, high: &Path, bits: u32) -> Result<Output, Failure> {
    let s = load_set(set)?;
    let a1: RationalMatrix = load_matrix(low)?;
    let a2: RationalMatrix = load_matrix(high)?;
    let budget = Budget {
        blend_bits: bits,
        ..Budget::default()
    };
    let target = classify::target_sum(s);
    match blend_witness_for(s, &a1, &a2, &target, &budget.blend_tolerance()) {
        Ok((poly, interval)) => Ok(Output::new(
            json!({"schema": SCHEMA, "set": set_json(s), "target": rat(&target), "polynomial": polynomial_json(&poly), "interval": interval_json(&interval)}),
            format!(
                "f(λ) = {}\nf({}) = {}\nf({}) = {}\ntarget {}",
                poly.coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("({}) λ^{i}", render(c)))
                    .collect::<Vec<_>>()
                    .join(" + "),
                render(&interval.lo),
                ctx.r(&interval.f_lo),
                render(&interval.hi),
                ctx.r(&interval.f_hi),
                render(&target)
            ),
            true,
        )),
        Err(e) => Ok(Output::new(
            json!({"schema": SCHEMA, "set": set_json(s), "pass": false, "failure": e.to_string()}),
            format!("FAIL: {e}"),
            false,
        )),
    }
}

fn scan_json(r: &ScanReport, classes: bool) -> Value {
    let pending: Vec<Value> = r.pending().map(entry_json).collect();
    let mut doc = json!({
        "schema": SCHEMA,
        "classes": r.classes,
        "subsets": r.subsets,
        "gradient_classes": r.gradient_classes,
        "gradient_subsets": r.gradient_subsets,
        "constant_cover_classes": r.entries.len(),
        "forcing_count": r.forcing_sets.len(),
        "min_forcing_size": r.forcing_sets.iter().map(|s| s.len()).min(),
        "forcing_sets": r.forcing_sets.iter().map(|s| set_json(*s)).collect::<Vec<_>>(),
        "pending": pending,
    });
    if classes {
        doc["entries"] = Value::Array(r.entries.iter().map(entry_json).collect());
    }
    doc
}

fn scan(budget: &BudgetArgs, no_fixtures: bool, classes: bool) -> Result<Output, Failure> {
    let store = load_store(no_fixtures)?;
    // Progress goes straight to stderr so long scans show signs of life.
    let report = parallel_scan(&budget.budget(), store.as_ref(), &|m: &str| eprintln!("{m}"));
    let mut counts: std::collections::BTreeMap<&str, (usize, usize)> = Default::default();
    counts.insert("gradient", (report.gradient_classes, report.gradient_subsets));
    for e in &report.entries {
        let c = counts.entry(e.status.label()).or_default();
        c.0 += 1;
        c.1 += e.class.orbit_size;
    }
    let mut text = format!(
        "{} subsets in {} classes up to symmetry and complement\n",
        report.subsets, report.classes
    );
    for (label, (c, s)) in &counts {
        text.push_str(&format!("{label:<14} {c:>8} classes {s:>9} subsets\n"));
    }
    text.push_str(&format!(
        "sigma-forcing sets: {} (smallest size {})\n",
        report.forcing_sets.len(),
        report.forcing_sets.iter().map(|s| s.len()).min().unwrap_or(0)
    ));
    for s in &report.forcing_sets {
        text.push_str(&format!("  {}\n", braces(*s)));
    }
    if classes {
        for e in &report.entries {
            text.push_str(&format!("{}  {}\n", class_line(&e.class), e.status.label()));
        }
    }
    for e in report.pending() {
        text.push_str(&format!("PENDING {}\n", braces(e.class.representative)));
    }
    let ok = report.pending().next().is_none();
    Ok(Output::new(scan_json(&report, classes), text, ok))
}
