//! Command bodies. Each returns a report and whether every check passed.

use std::path::{Path, PathBuf};

use nilcurv::catalog::{self, check_facts, pairwise_traces, PAIRS};
use nilcurv::heisenberg::{build_clifford_j, CliffordModuleSpec};
use nilcurv::invariants::{
    closed_form_checks, closed_form_invariants, compare_reports, homogeneous_identities,
    oracle_invariants_for, CheckStatus, IdentityCheck, InvariantReport, TensorCache,
};
use nilcurv::isospec::{default_zbox, gordon_wilson_check, DEFAULT_RADIUS2};
use nilcurv::traceinv::{parse_spec, trace_invariant, NAMED_BASICS};
use nilcurv::{build_algebra, Error, InvariantId, JMap, OracleOptions, Rational};
use serde_json::{json, Map, Value};

use crate::report::Report;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable input file.
    Io(String),
    Usage(String),
    Lib(Error),
    /// Trace spec parse failure, echoed with a caret under the position.
    Spec { spec: String, error: Error },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Usage(_) => 2,
            CliError::Spec { .. } => 3,
            CliError::Lib(e) => match e {
                Error::TraceSpecParse { .. }
                | Error::RationalSyntax(_)
                | Error::JMapFormat(_)
                | Error::NotSkew { .. } => 3,
                Error::ResourceLimit(_) => 4,
                Error::ConflictingValues { .. } | Error::Consistency(_) | Error::DegenerateGram => 1,
                _ => 2,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Io(m) | CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
            CliError::Spec { spec, error } => {
                let pos = match error {
                    Error::TraceSpecParse { position, .. } => *position,
                    _ => 0,
                };
                format!("{error}\n  {spec}\n  {}^", " ".repeat(pos))
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where a j map comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Example(String),
    File(PathBuf),
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Source::Example(id) => id.clone(),
            Source::File(p) => p.display().to_string(),
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            Source::Example(id) => json!({ "example": id }),
            Source::File(p) => json!({ "file": p.display().to_string() }),
        }
    }

    pub fn load(&self) -> CliResult<JMap> {
        match self {
            Source::Example(id) => Ok(catalog::get(id)?.j),
            Source::File(p) => read_jmap(p),
        }
    }
}

fn read_jmap(path: &Path) -> CliResult<JMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(JMap::from_json(&text)?)
}

/// Two sources: a named catalog pair or two files.
pub fn pair_sources(pair: Option<&str>, files: Option<&[PathBuf]>) -> CliResult<(Source, Source)> {
    match (pair, files) {
        (Some(name), None) => {
            let &(_, x, y) = PAIRS
                .iter()
                .find(|p| p.0 == name)
                .ok_or_else(|| Error::UnknownId(name.to_string()))?;
            Ok((Source::Example(x.into()), Source::Example(y.into())))
        }
        (None, Some([a, b])) => Ok((Source::File(a.clone()), Source::File(b.clone()))),
        _ => Err(CliError::Usage("give either --pair NAME or --files A B".into())),
    }
}

fn rat(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn selected_ids(order: Option<u32>) -> Vec<InvariantId> {
    InvariantId::ALL
        .iter()
        .copied()
        .filter(|id| order.is_none_or(|o| id.order() == o))
        .collect()
}

/// Oracle values merged with every closed formula among `ids`.
fn full_report(label: &str, j: &JMap, ids: &[InvariantId], options: &OracleOptions) -> CliResult<InvariantReport> {
    let cache = TensorCache::new(build_algebra(j))?;
    let mut report = oracle_invariants_for(&cache, ids, options)?;
    report.manifold = label.to_string();
    let closed = closed_form_invariants(j);
    let mut selected = InvariantReport::new(label);
    for (id, entry) in &closed.values {
        if ids.contains(id) {
            for p in &entry.provenance {
                selected.insert(*id, entry.value.clone(), *p)?;
            }
        }
    }
    report.merge(&selected)?;
    Ok(report)
}

fn report_values(report: &InvariantReport) -> Value {
    let mut values = Map::new();
    for (id, entry) in &report.values {
        let provenance: Vec<Value> = entry
            .provenance
            .iter()
            .map(|p| serde_json::to_value(p).expect("serializable"))
            .collect();
        values.insert(id.to_string(), json!({ "value": rat(&entry.value), "provenance": provenance }));
    }
    Value::Object(values)
}

fn omitted(report: &InvariantReport) -> Value {
    Value::Object(
        report
            .omitted
            .iter()
            .map(|(id, why)| (id.to_string(), json!(why)))
            .collect(),
    )
}

fn shape(j: &JMap) -> Value {
    json!({ "m": j.m(), "r": j.r(), "dim": j.dim() })
}

fn options_value(options: &OracleOptions) -> Value {
    json!({
        "laplacian": format!("{:?}", options.laplacian).to_lowercase(),
        "max_laplacian_dim": options.max_laplacian_dim,
    })
}

pub fn invariants(source: &Source, order: Option<u32>, options: &OracleOptions) -> CliResult<(Report, bool)> {
    let j = source.load()?;
    let ids = selected_ids(order);
    let report = full_report(&source.label(), &j, &ids, options)?;
    let traces: Map<String, Value> = NAMED_BASICS
        .iter()
        .filter(|s| order.is_none_or(|o| 2 * parse_spec(s).expect("built-in").q() as u32 == o))
        .map(|s| Ok((format!("I_{s}"), rat(&trace_invariant(s, &j)?))))
        .collect::<CliResult<_>>()?;
    let mut inputs = source.describe();
    inputs["order"] = json!(order);
    inputs["options"] = options_value(options);
    let results = json!({
        "manifold": source.label(),
        "shape": shape(&j),
        "values": report_values(&report),
        "omitted": omitted(&report),
        "trace_invariants": traces,
    });
    Ok((Report::new("invariants", inputs, results), true))
}

pub fn compare(a: &Source, b: &Source, order: Option<u32>, options: &OracleOptions) -> CliResult<(Report, bool)> {
    let (ja, jb) = (a.load()?, b.load()?);
    if ja.dim() != jb.dim() {
        return Err(Error::Precondition(format!(
            "total dimensions differ: {} and {}",
            ja.dim(),
            jb.dim()
        ))
        .into());
    }
    let ids = selected_ids(order);
    let (ra, rb) = rayon::join(
        || full_report(&a.label(), &ja, &ids, options),
        || full_report(&b.label(), &jb, &ids, options),
    );
    let (ra, rb) = (ra?, rb?);
    let deltas = compare_reports(&ra, &rb);
    let mut values = Map::new();
    for d in &deltas {
        values.insert(
            d.id.to_string(),
            json!({
                "first": rat(&d.first),
                "second": rat(&d.second),
                "delta": rat(&d.delta),
                "differs": d.differs,
            }),
        );
    }
    let differing: Vec<String> = deltas.iter().filter(|d| d.differs).map(|d| d.id.to_string()).collect();
    let inputs = json!({
        "first": a.describe(),
        "second": b.describe(),
        "order": order,
        "options": options_value(options),
    });
    let results = json!({
        "first": a.label(),
        "second": b.label(),
        "shape": shape(&ja),
        "values": values,
        "differing": differing,
        "omitted": { "first": omitted(&ra), "second": omitted(&rb) },
    });
    Ok((Report::new("compare", inputs, results), true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scope {
    Lemmas,
    Identities,
    Catalog,
    All,
}

struct Checks(Vec<Value>);

impl Checks {
    fn push(&mut self, scope: &str, subject: &str, check: &IdentityCheck) {
        let mut v = json!({
            "scope": scope,
            "subject": subject,
            "check": check.id,
            "status": serde_json::to_value(&check.status).expect("serializable"),
        });
        if check.status == CheckStatus::Fail {
            v["lhs"] = json!(check.lhs.as_ref().map(Rational::to_string));
            v["rhs"] = json!(check.rhs.as_ref().map(Rational::to_string));
        }
        if let Some(note) = &check.note {
            v["note"] = json!(note);
        }
        self.0.push(v);
    }

    fn count(&self, status: &str) -> usize {
        self.0.iter().filter(|c| c["status"] == status).count()
    }
}

fn subjects(source: Option<&Source>) -> CliResult<Vec<(String, JMap)>> {
    match source {
        Some(s) => Ok(vec![(s.label(), s.load()?)]),
        None => catalog::ids()
            .into_iter()
            .map(|id| {
                let j = catalog::get(&id)?.j;
                Ok((id, j))
            })
            .collect(),
    }
}

pub fn verify(scope: Scope, source: Option<&Source>, options: &OracleOptions) -> CliResult<(Report, bool)> {
    let mut checks = Checks(Vec::new());
    let lemmas = matches!(scope, Scope::Lemmas | Scope::All);
    let identities = matches!(scope, Scope::Identities | Scope::All);
    if lemmas || identities {
        for (label, j) in subjects(source)? {
            let cache = TensorCache::new(build_algebra(&j))?;
            let oracle = oracle_invariants_for(&cache, InvariantId::ALL, options)?;
            if lemmas {
                for c in closed_form_checks(&j, &oracle) {
                    checks.push("lemmas", &label, &c);
                }
            }
            if identities {
                for c in homogeneous_identities(&oracle) {
                    checks.push("identities", &label, &c);
                }
            }
        }
    }
    if matches!(scope, Scope::Catalog | Scope::All) {
        for id in catalog::ids() {
            for f in check_facts(&catalog::get(&id)?)? {
                checks.push(
                    "catalog",
                    &id,
                    &IdentityCheck::compare(format!("fact {}", f.fact), f.actual, f.expected),
                );
            }
        }
        for (name, x, y) in PAIRS {
            let (a, b) = (catalog::get(x)?.j, catalog::get(y)?.j);
            let same = pairwise_traces(&a) == pairwise_traces(&b);
            let check = IdentityCheck {
                id: "Tr(j_Z j_W) agrees".into(),
                status: if same { CheckStatus::Pass } else { CheckStatus::Fail },
                lhs: None,
                rhs: None,
                note: None,
            };
            checks.push("catalog", name, &check);
        }
        for name in ["fourthree", "fivethree", "sixtwo"] {
            let (a, b) = catalog::pair(name)?;
            let rep = gordon_wilson_check(&a.j, &b.j, default_zbox(a.j.m()), &Rational::from_int(DEFAULT_RADIUS2))?;
            let check = IdentityCheck {
                id: "isospectrality hypotheses".into(),
                status: if rep.verdict { CheckStatus::Pass } else { CheckStatus::Fail },
                lhs: None,
                rhs: None,
                note: Some(rep.caveat),
            };
            checks.push("catalog", name, &check);
        }
    }
    let (passed, failed, skipped) = (checks.count("pass"), checks.count("fail"), checks.count("skipped"));
    let mut inputs = json!({
        "scope": format!("{scope:?}").to_lowercase(),
        "options": options_value(options),
    });
    if let Some(s) = source {
        inputs["source"] = s.describe();
    }
    let results = json!({
        "summary": { "passed": passed, "failed": failed, "skipped": skipped },
        "checks": checks.0,
    });
    Ok((Report::new("verify", inputs, results), failed == 0))
}

pub fn trace_inv(spec: &str, source: &Source) -> CliResult<(Report, bool)> {
    let parsed = parse_spec(spec).map_err(|error| CliError::Spec {
        spec: spec.to_string(),
        error,
    })?;
    let j = source.load()?;
    let value = nilcurv::traceinv::eval_trace_invariant(&parsed, &j);
    let mut inputs = source.describe();
    inputs["spec"] = json!(spec);
    let results = json!({
        "spec": parsed.to_string(),
        "order": 2 * parsed.q(),
        "value": rat(&value),
    });
    Ok((Report::new("trace-inv", inputs, results), true))
}

/// The j map of `ρ^r_(a,b)` as JSON text.
pub fn clifford(r: usize, a: usize, b: usize) -> CliResult<JMap> {
    let spec = CliffordModuleSpec::new(r, a, b).map_err(|e| match e {
        Error::Precondition(m) => CliError::Usage(m),
        other => CliError::Lib(other),
    })?;
    Ok(build_clifford_j(&spec)?)
}

pub fn clifford_written(path: &Path, j: &JMap, r: usize, a: usize, b: usize) -> CliResult<(Report, bool)> {
    std::fs::write(path, j.to_json())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    let inputs = json!({ "r": r, "a": a, "b": b, "out": path.display().to_string() });
    let results = json!({ "path": path.display().to_string(), "m": j.m(), "r": j.r() });
    Ok((Report::new("clifford", inputs, results), true))
}

pub fn gw_check(a: &Source, b: &Source, zbox: Option<usize>, radius2: &Rational) -> CliResult<(Report, bool)> {
    let (ja, jb) = (a.load()?, b.load()?);
    let zbox = zbox.unwrap_or_else(|| default_zbox(ja.m()));
    let rep = gordon_wilson_check(&ja, &jb, zbox, radius2)?;
    let inputs = json!({
        "first": a.describe(),
        "second": b.describe(),
        "zbox": zbox,
        "radius2": rat(radius2),
    });
    let results = serde_json::to_value(&rep).expect("serializable");
    Ok((Report::new("gw-check", inputs, results), rep.verdict))
}

pub fn catalog_list() -> CliResult<(Report, bool)> {
    let entries = catalog::ids()
        .into_iter()
        .map(|id| {
            let e = catalog::get(&id)?;
            Ok(json!({
                "id": e.id,
                "description": e.description,
                "m": e.j.m(),
                "r": e.j.r(),
                "partner": e.partner,
            }))
        })
        .collect::<CliResult<Vec<Value>>>()?;
    let pairs: Vec<Value> = PAIRS
        .iter()
        .map(|(name, x, y)| json!({ "name": name, "first": x, "second": y }))
        .collect();
    let results = json!({ "entries": entries, "pairs": pairs });
    Ok((Report::new("catalog list", json!({}), results), true))
}
