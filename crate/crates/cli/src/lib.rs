//! Batch front end: every verification as a subcommand producing a versioned JSON report.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hms_core::ainfty::{check_relations, cyclic_seed, extend_structure, invariants_ab, sign_twist};
use hms_core::category::{rat_text, Category, GradingData};
use hms_core::cover::{compare_three_way, lifts_json, CoverSpec};
use hms_core::hochschild::{closed_form_hh_dim, HHEngine, HHQuery, Truncation};
use hms_core::mf::{build_t, transfer_minimal_model, verify_a_equivalence, MfWeights};
use hms_core::tilde::compare_equivariant;
use hms_core::toric::{
    boundary_profile, build_fan, check_l_divisor, divisor_intersection_profile, dsg_hom_profile, k_minus_one_loops,
    CurveProfile,
};
use hms_core::twisted::convolution_iso_check;
use hms_core::{Field, HmsError, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "hms", version, about = "Exact checks for the cycle category, its A∞ deformations and mirrors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hochschild cohomology table against the closed form.
    Hh(RunArgs),
    /// A∞ extension of a seed, invariants, sign twist and convolution check.
    Ainfty(RunArgs),
    /// Matrix-factorization side: hom tables, transferred model, equivariant comparison.
    Mirror(RunArgs),
    /// Fans, walls, curve profiles, the divisor L and loop counts.
    Toric(RunArgs),
    /// Graded lifts on the cyclic cover and the three-way hom comparison.
    Cover(RunArgs),
    /// Rerun the configuration embedded in a report and diff against it.
    Golden(GoldenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Q (default) or a prime such as 32003.
    #[arg(long)]
    pub field: Option<String>,
    /// Number of objects (toric: largest n of the grid).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated p vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<i64>>,
    /// Comma-separated q vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<i64>>,
    /// Weights d1,d2,d3.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<i64>>,
    /// D = d1 + d2 + d3 (checked when given).
    #[arg(long = "D")]
    pub denom: Option<i64>,
    #[arg(long)]
    pub arity_cap: Option<usize>,
    #[arg(long)]
    pub weight_cap: Option<u32>,
    /// Weight cap for factorization hom spaces (defaults to the weight cap).
    #[arg(long)]
    pub poly_cap: Option<u32>,
    /// Seed a,b for the A∞ extension.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub seed: Option<Vec<String>>,
    /// Largest Hochschild degree in the table.
    #[arg(long)]
    pub d_max: Option<i64>,
    /// Include the full higher products in the report.
    #[arg(long)]
    pub dump: bool,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct GoldenArgs {
    pub path: std::path::PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Hh,
    Ainfty,
    Mirror,
    Toric,
    Cover,
}

/// Fully resolved configuration; embedded verbatim in every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<[i64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denom: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<i64>,
    #[serde(default)]
    pub dump: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Mismatch,
    Truncation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Mismatch => 1,
            Status::Truncation => 2,
        }
    }
}

/// Failures of an exact check are mismatches; failures of a stability check mean the
/// truncation was too small.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Exact,
    Stability,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub status: Status,
    pub checks: Vec<Check>,
    pub result: Value,
}

impl Report {
    fn new(config: RunConfig, checks: Vec<Check>, result: Value) -> Self {
        let failed = |k: CheckKind| checks.iter().any(|c| !c.passed && c.kind == k);
        let status = if failed(CheckKind::Exact) {
            Status::Mismatch
        } else if failed(CheckKind::Stability) {
            Status::Truncation
        } else {
            Status::Pass
        };
        Report { schema_version: SCHEMA_VERSION, config, status, checks, result }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:?}: {:?}", self.config.command, self.status);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            match &c.detail {
                Some(d) => {
                    let _ = writeln!(s, "[{tag}] {} ({d})", c.name);
                }
                None => {
                    let _ = writeln!(s, "[{tag}] {}", c.name);
                }
            }
        }
        s
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

fn exact(name: impl Into<String>, passed: bool, detail: Option<String>) -> Check {
    Check { name: name.into(), kind: CheckKind::Exact, passed, detail }
}

fn stability(name: impl Into<String>, passed: bool, detail: Option<String>) -> Check {
    Check { name: name.into(), kind: CheckKind::Stability, passed, detail }
}

/// Exit code for an error: 1 for mathematical failures, 2 for truncation, 3 for bad input.
pub fn error_exit_code(e: &HmsError) -> i32 {
    match e {
        HmsError::Mismatch(_) | HmsError::Obstruction { .. } | HmsError::Containment(_) => 1,
        HmsError::Truncation(_) => 2,
        HmsError::Constraint(_) | HmsError::Contract(_) | HmsError::Config(_) => 3,
    }
}

fn config_err(msg: impl Into<String>) -> HmsError {
    HmsError::Config(msg.into())
}

fn weights3(d: &[i64]) -> Result<[i64; 3], HmsError> {
    <[i64; 3]>::try_from(d).map_err(|_| config_err(format!("--d needs three entries, got {}", d.len())))
}

/// Fill defaults and validate flags for one subcommand.
pub fn resolve(kind: CommandKind, a: &RunArgs) -> Result<RunConfig, HmsError> {
    let field = Field::parse(a.field.as_deref().unwrap_or("Q"))?;
    let mut c = RunConfig {
        command: kind,
        field: field.to_string(),
        n: None,
        p: None,
        q: None,
        d: None,
        denom: None,
        arity_cap: None,
        weight_cap: None,
        poly_cap: None,
        seed: None,
        d_max: None,
        dump: a.dump,
    };
    let needs_d = matches!(kind, CommandKind::Mirror | CommandKind::Cover);
    if needs_d {
        let d = weights3(a.d.as_deref().unwrap_or(if kind == CommandKind::Mirror { &[1, 0, 0] } else { &[1, 1, 1] }))?;
        let sum: i64 = d.iter().sum();
        if let Some(dd) = a.denom {
            if dd != sum {
                return Err(config_err(format!("--D {dd} differs from d1 + d2 + d3 = {sum}")));
            }
        }
        c.d = Some(d);
        c.denom = Some(sum);
    } else if a.d.is_some() || a.denom.is_some() {
        return Err(config_err("--d/--D apply to the mirror and cover subcommands"));
    }
    match kind {
        CommandKind::Hh | CommandKind::Ainfty => {
            let n = a.n.unwrap_or_else(|| a.p.as_ref().map_or(3, Vec::len));
            let g = match (&a.p, &a.q) {
                (None, None) => GradingData::standard(n)?,
                (Some(p), Some(q)) => GradingData::integral(p.clone(), q.clone())?,
                _ => return Err(config_err("give both --p and --q or neither")),
            };
            if g.n != n {
                return Err(config_err(format!("--n {n} differs from the length of p")));
            }
            c.n = Some(n);
            c.p = Some(g.p);
            c.q = Some(g.q);
            if kind == CommandKind::Hh {
                c.arity_cap = Some(a.arity_cap.unwrap_or(20));
                c.weight_cap = Some(a.weight_cap.unwrap_or(12));
                let d_max = a.d_max.unwrap_or(6);
                if d_max < 2 {
                    return Err(config_err("--d-max must be at least 2"));
                }
                c.d_max = Some(d_max);
            } else {
                c.arity_cap = Some(a.arity_cap.unwrap_or(n + 4));
                c.weight_cap = Some(a.weight_cap.unwrap_or(12));
                let seed = a.seed.clone().unwrap_or_else(|| vec!["1".into(), "1".into()]);
                let seed: [String; 2] =
                    seed.try_into().map_err(|_| config_err("--seed needs exactly two scalars a,b"))?;
                for s in &seed {
                    Scalar::parse(field, s).ok_or_else(|| config_err(format!("cannot read {s} in {field}")))?;
                }
                c.seed = Some(seed);
            }
        }
        CommandKind::Mirror => {
            MfWeights::new(c.d.expect("set above"))?;
            c.arity_cap = Some(a.arity_cap.unwrap_or(5));
            c.weight_cap = Some(a.weight_cap.unwrap_or(8));
            c.poly_cap = Some(a.poly_cap.unwrap_or(c.weight_cap.expect("set")));
        }
        CommandKind::Cover => {
            CoverSpec::new(c.d.expect("set above"))?;
            c.weight_cap = Some(a.weight_cap.unwrap_or(8));
        }
        CommandKind::Toric => {
            let n = a.n.unwrap_or(10);
            if n < 3 {
                return Err(config_err("--n must be at least 3"));
            }
            c.n = Some(n);
            c.weight_cap = Some(a.weight_cap.unwrap_or(9));
        }
    }
    Ok(c)
}

pub fn run(c: &RunConfig) -> Result<Report, HmsError> {
    let field = Field::parse(&c.field)?;
    match c.command {
        CommandKind::Hh => cmd_hh(c, field),
        CommandKind::Ainfty => cmd_ainfty(c, field),
        CommandKind::Mirror => cmd_mirror(c, field),
        CommandKind::Toric => cmd_toric(c),
        CommandKind::Cover => cmd_cover(c, field),
    }
}

fn integral_category(c: &RunConfig) -> Result<Category, HmsError> {
    let (p, q) = (c.p.clone().unwrap_or_default(), c.q.clone().unwrap_or_default());
    Category::build(GradingData::integral(p, q)?)
}

fn trunc(c: &RunConfig) -> Truncation {
    Truncation { arity_cap: c.arity_cap.unwrap_or(0), weight_cap: c.weight_cap.unwrap_or(0) }
}

fn pair(x: &(Scalar, Scalar)) -> Value {
    json!([x.0.to_text(), x.1.to_text()])
}

pub fn cmd_hh(c: &RunConfig, field: Field) -> Result<Report, HmsError> {
    let cat = integral_category(c)?;
    let n = cat.n();
    let eng = HHEngine::new(cat, field);
    let t = trunc(c);
    let mut entries = Vec::new();
    let (mut wrong, mut unstable) = (Vec::new(), 0);
    for d in 2..=c.d_max.unwrap_or(6) {
        for j in (-3 * (n as i64 - 2))..=(d - 2) {
            let e = eng.hh_dim(&HHQuery { d, j, trunc: t })?;
            let expected = closed_form_hh_dim(n, d, j);
            if !e.stabilized {
                unstable += 1;
            } else if e.dim != expected {
                wrong.push(format!("HH^{d}(A)^{j} = {} (expected {expected})", e.dim));
            }
            entries.push(json!({"d": d, "j": j, "dim": e.dim, "stabilized": e.stabilized, "expected": expected}));
        }
    }
    let total = entries.len();
    let checks = vec![
        exact("closed form on stabilized entries", wrong.is_empty(), (!wrong.is_empty()).then(|| wrong.join("; "))),
        stability(
            "all entries stabilized at W−2",
            unstable == 0,
            Some(format!("{} of {total} stabilized", total - unstable)),
        ),
    ];
    let result = json!({"n": n, "p": c.p, "q": c.q, "entries": entries});
    Ok(Report::new(c.clone(), checks, result))
}

pub fn cmd_ainfty(c: &RunConfig, field: Field) -> Result<Report, HmsError> {
    let cat = integral_category(c)?;
    let n = cat.n();
    let seed = c.seed.clone().ok_or_else(|| config_err("missing seed"))?;
    let read = |s: &str| Scalar::parse(field, s).ok_or_else(|| config_err(format!("cannot read {s}")));
    let (a, b) = (read(&seed[0])?, read(&seed[1])?);
    let m = extend_structure(&cyclic_seed(&cat, field, &a, &b), trunc(c))?;
    let rel = check_relations(&m);
    let inv = invariants_ab(&m)?;
    let tw = sign_twist(&m);
    let rel_tw = check_relations(&tw);
    let inv_tw = invariants_ab(&tw)?;
    let conv = convolution_iso_check(&m)?;
    let want_tw = (a.clone(), if n % 2 == 0 { b.clone() } else { -&b });
    let zero_seed = a.is_zero() && b.is_zero();
    let mut checks = vec![
        exact("A∞ relations", rel.passed(), Some(format!("{} defects", rel.defects))),
        exact("invariants equal the seed", inv == (a.clone(), b.clone()), Some(format!("({}, {})", inv.0, inv.1))),
        exact("sign twist relations", rel_tw.passed(), None),
        exact(
            "sign twist maps (a,b) to (a,(−1)^n b)",
            inv_tw == want_tw,
            Some(format!("({}, {})", inv_tw.0, inv_tw.1)),
        ),
        exact("convolution identity equals a", conv == a, Some(conv.to_text())),
    ];
    if zero_seed {
        checks.push(exact("zero seed gives the zero extension", m.is_trivial(), None));
    }
    let nnz: Vec<Value> = m.higher.iter().map(|(k, mk)| json!({"k": k, "nnz": mk.nnz()})).collect();
    let mut result = json!({
        "n": n,
        "seed": seed,
        "invariants": pair(&inv),
        "twisted_invariants": pair(&inv_tw),
        "convolution": conv.to_text(),
        "relations": rel,
        "products": nnz,
        "weight_defects": m.weight_defects(),
    });
    if c.dump {
        result["structure"] = m.to_json();
    }
    Ok(Report::new(c.clone(), checks, result))
}

pub fn cmd_mirror(c: &RunConfig, field: Field) -> Result<Report, HmsError> {
    let weights = MfWeights::new(c.d.ok_or_else(|| config_err("missing d"))?)?;
    let t = trunc(c);
    let poly = c.poly_cap.unwrap_or(t.weight_cap);
    let mut checks = Vec::new();
    let fact: Vec<String> = (0..3).filter_map(|i| build_t(weights, i).check().err().map(|e| e.to_string())).collect();
    checks.push(exact("t² = W for T_1, T_2, T_3", fact.is_empty(), (!fact.is_empty()).then(|| fact.join("; "))));
    let eq = verify_a_equivalence(weights, poly, field)?;
    checks.push(exact(
        "hom cohomology equals A tables",
        eq.passed(),
        Some(format!("{} slices, {} products", eq.slices_checked, eq.products_checked)),
    ));
    let tr = transfer_minimal_model(weights, field, t)?;
    checks.push(exact("transferred m_2 equals composition", tr.m2_defects == 0, None));
    checks.push(exact("transferred A∞ relations", tr.relations.passed(), None));
    checks.push(exact(
        "transferred cyclic constants nonzero",
        !tr.raw_ab.0.is_zero() && !tr.raw_ab.1.is_zero(),
        Some(format!("({}, {})", tr.raw_ab.0, tr.raw_ab.1)),
    ));
    let one = (field.one(), field.one());
    let norm_inv = match &tr.normalized {
        Some(m) => Some(invariants_ab(m)?),
        None => None,
    };
    checks.push(exact("normalized invariants are (1,1)", norm_inv.as_ref() == Some(&one), None));
    let ext = extend_structure(&cyclic_seed(&tr.structure.cat, field, &field.one(), &field.one()), t)?;
    let ext_inv = invariants_ab(&ext)?;
    checks.push(exact(
        "extended seed invariants agree",
        norm_inv.as_ref() == Some(&ext_inv),
        Some(format!("({}, {})", ext_inv.0, ext_inv.1)),
    ));
    let mut result = json!({
        "d": weights.d,
        "D": weights.denom,
        "equivalence": eq.to_json(),
        "transfer": {
            "raw_invariants": pair(&tr.raw_ab),
            "normalized_invariants": norm_inv.as_ref().map(pair),
            "products": tr.structure.higher.iter().map(|(k, m)| json!({"k": k, "nnz": m.nnz()})).collect::<Vec<_>>(),
        },
        "extended_invariants": pair(&ext_inv),
    });
    if weights.denom > 1 {
        let (pairs, bad) = compare_equivariant(weights, poly, field)?;
        checks.push(exact(
            "equivariant cohomology equals Ã tables",
            bad.is_empty(),
            Some(format!(
                "{pairs} pairs{}",
                if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
            )),
        ));
        result["equivariant_pairs"] = json!(pairs);
    }
    if c.dump {
        result["transfer"]["structure"] = tr.structure.to_json();
    }
    Ok(Report::new(c.clone(), checks, result))
}

pub fn cmd_toric(c: &RunConfig) -> Result<Report, HmsError> {
    let n_max = c.n.unwrap_or(10);
    let w = c.weight_cap.unwrap_or(9);
    let mut fans = Vec::new();
    let (mut smooth, mut profiles, mut degrees, mut l_ok, mut loops_ok, mut homs) =
        (true, Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for n in 3..=n_max {
        let fan = build_fan(n)?;
        smooth &= fan.check().is_ok();
        let mut shapes = Vec::new();
        for i in 0..n {
            let shape = boundary_profile(&fan, i)?;
            shapes.push(json!({"divisor": i + 1, "compact_chain": shape.compact_chain, "shape": shape.description()}));
            for j in 0..n {
                if i == j {
                    continue;
                }
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                match divisor_intersection_profile(&fan, i, j)? {
                    CurveProfile::Affine if !adjacent => profiles.push(format!("n={n}: Γ_{}{} affine", i + 1, j + 1)),
                    CurveProfile::Compact { .. } | CurveProfile::Disjoint if adjacent => {
                        profiles.push(format!("n={n}: Γ_{}{} not affine", i + 1, j + 1))
                    }
                    CurveProfile::Compact { deg_i, deg_j } if (deg_i, deg_j) != (-1, -1) => {
                        degrees.push(format!("n={n}: Γ_{}{} degrees ({deg_i}, {deg_j})", i + 1, j + 1))
                    }
                    _ => {}
                }
                let h = dsg_hom_profile(&fan, i, j, w)?;
                if !h.matches() {
                    homs.push(format!("n={n}: Hom(E_{}, E_{})", i + 1, j + 1));
                }
            }
            if dsg_hom_profile(&fan, i, i, w).map(|h| !h.matches()).unwrap_or(true) {
                homs.push(format!("n={n}: End(E_{})", i + 1));
            }
        }
        let l = check_l_divisor(&fan);
        if !l.passed() {
            l_ok.push(format!("n={n}: {:?}", l.counterexamples));
        }
        let loops = k_minus_one_loops(&fan);
        if loops != 0 {
            loops_ok.push(format!("n={n}: {loops}"));
        }
        let mut fj = fan.to_json();
        fj["boundary"] = json!(shapes);
        fj["L"] = json!({"coefficients": l.coefficients, "curves_checked": l.curves_checked, "passed": l.passed()});
        fj["loops"] = json!(loops);
        fans.push(fj);
    }
    let detail = |v: &Vec<String>| (!v.is_empty()).then(|| v.join("; "));
    let checks = vec![
        exact("fans unimodular", smooth, None),
        exact("Γ_ij affine exactly for adjacent pairs", profiles.is_empty(), detail(&profiles)),
        exact("O(H_i) has degree −1 on compact Γ_ij", degrees.is_empty(), detail(&degrees)),
        exact("L restricts trivially", l_ok.is_empty(), detail(&l_ok)),
        exact("no K_{−1} loops", loops_ok.is_empty(), detail(&loops_ok)),
        exact("hom profiles match the cycle category", homs.is_empty(), detail(&homs)),
    ];
    Ok(Report::new(c.clone(), checks, json!({"n_max": n_max, "fans": fans})))
}

pub fn cmd_cover(c: &RunConfig, field: Field) -> Result<Report, HmsError> {
    let spec = CoverSpec::new(c.d.ok_or_else(|| config_err("missing d"))?)?;
    let w = c.weight_cap.unwrap_or(8);
    let r = compare_three_way(&spec, w, field)?;
    let g = spec.grading()?;
    let checks = vec![exact(
        "cover = Ã = equivariant dims on all pairs",
        r.passed(),
        Some(format!(
            "{} pairs{}",
            r.rows.len(),
            if r.passed() { String::new() } else { format!("; {}", r.mismatches.join("; ")) }
        )),
    )];
    let result = json!({
        "grading": {"p": g.p, "q": g.q, "D": g.denom},
        "phases": (0..3).map(|i| rat_text(spec.base_phase(i))).collect::<Vec<_>>(),
        "lifts": lifts_json(&spec),
        "comparison": r.to_json(),
    });
    Ok(Report::new(c.clone(), checks, result))
}

/// Path-level differences between two JSON values.
pub fn diff_json(expected: &Value, actual: &Value) -> Vec<String> {
    fn walk(path: &str, e: &Value, a: &Value, out: &mut Vec<String>) {
        match (e, a) {
            (Value::Object(x), Value::Object(y)) => {
                for (k, v) in x {
                    let p = format!("{path}.{k}");
                    match y.get(k) {
                        Some(w) => walk(&p, v, w, out),
                        None => out.push(format!("{p}: missing from rerun")),
                    }
                }
                for k in y.keys().filter(|k| !x.contains_key(*k)) {
                    out.push(format!("{path}.{k}: not in golden"));
                }
            }
            (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
                for (i, (v, w)) in x.iter().zip(y).enumerate() {
                    walk(&format!("{path}[{i}]"), v, w, out);
                }
            }
            _ if e == a => {}
            _ => out.push(format!("{path}: golden {e}, rerun {a}")),
        }
    }
    let mut out = Vec::new();
    walk("$", expected, actual, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoldenReport {
    pub path: String,
    pub identical: bool,
    pub differences: Vec<String>,
}

/// Rerun the configuration embedded in a golden report and diff.
pub fn check_golden(text: &str, path: &str) -> Result<GoldenReport, HmsError> {
    let golden: Value = serde_json::from_str(text).map_err(|e| config_err(format!("{path}: {e}")))?;
    let version = golden.get("schema_version").and_then(Value::as_u64);
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(config_err(format!("{path}: schema version {version:?}, expected {SCHEMA_VERSION}")));
    }
    let config: RunConfig = serde_json::from_value(golden["config"].clone())
        .map_err(|e| config_err(format!("{path}: bad embedded config: {e}")))?;
    let rerun = serde_json::to_value(run(&config)?).expect("report serializes");
    let differences = diff_json(&golden, &rerun);
    Ok(GoldenReport { path: path.into(), identical: differences.is_empty(), differences })
}

/// Run a parsed command line; returns the rendered output and the exit code.
pub fn execute(cli: Cli) -> (String, i32) {
    let (kind, args) = match cli.command {
        Command::Hh(a) => (CommandKind::Hh, a),
        Command::Ainfty(a) => (CommandKind::Ainfty, a),
        Command::Mirror(a) => (CommandKind::Mirror, a),
        Command::Toric(a) => (CommandKind::Toric, a),
        Command::Cover(a) => (CommandKind::Cover, a),
        Command::Golden(g) => {
            let text = match std::fs::read_to_string(&g.path) {
                Ok(t) => t,
                Err(e) => return (format!("error: cannot read {}: {e}\n", g.path.display()), 3),
            };
            return match check_golden(&text, &g.path.display().to_string()) {
                Ok(r) => {
                    let code = if r.identical { 0 } else { 1 };
                    let out = match g.format {
                        Format::Json => serde_json::to_string_pretty(&r).expect("serializes") + "\n",
                        Format::Text if r.identical => format!("{}: identical\n", r.path),
                        Format::Text => {
                            format!("{}: {} differences\n{}\n", r.path, r.differences.len(), r.differences.join("\n"))
                        }
                    };
                    (out, code)
                }
                Err(e) => (format!("error: {e}\n"), error_exit_code(&e)),
            };
        }
    };
    let result = resolve(kind, &args).and_then(|c| run(&c));
    match result {
        Ok(report) => {
            let text = report.render(args.format);
            let code = report.status.exit_code();
            match &args.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => (report.to_text(), code),
                    Err(e) => (format!("error: cannot write {}: {e}\n", path.display()), 3),
                },
                None => (text, code),
            }
        }
        Err(e) => (format!("error: {e}\n"), error_exit_code(&e)),
    }
}
