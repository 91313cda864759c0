//! Running a problem end to end and the JSON report it produces.
//!
//! Reports are canonical: they are rendered through `serde_json::Value`, whose
//! maps keep keys sorted, and every list follows the generator enumeration
//! order. Two runs on the same input produce byte-identical files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::deformation::{cross_validate, verify_lifted_complex, LiftedComplex, Verification};
use crate::error::{Error, Result};
use crate::massey::{HullResult, HullState, MasseyEngine, OrderLog, Stabilization};
use crate::matric::{GeneratorTable, MatricMonomial, MatricPoly, MonomialQuotient};
use crate::problem::{CochainSpec, Problem, ProblemSpec, RepresentativesSpec};
use crate::scalar::{self, Scalar};
use crate::yoneda::{Cochain, ExtBasis};

pub const REPORT_SCHEMA: &str = "ncdef.report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub problem: ProblemSpec,
    pub ext: ExtSection,
    pub hull: HullSection,
    pub orders: Vec<OrderSection>,
    pub certificate: Stabilization,
    pub versal_family: Vec<FamilyEntry>,
    pub verification: VerificationSection,
}

/// `ext1[i][j]` is the dimension of `Ext^1(M_{j+1}, M_{i+1})`, likewise `ext2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtSection {
    pub ext1: Vec<Vec<usize>>,
    pub ext2: Vec<Vec<usize>>,
    /// `supplied` or `computed`.
    pub source: String,
    pub representatives: RepresentativesSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub monomial: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationEntry {
    pub name: String,
    pub left: usize,
    pub right: usize,
    pub polynomial: String,
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullSection {
    pub generators: Vec<String>,
    pub obstructions: Vec<String>,
    pub relations: Vec<RelationEntry>,
    /// The order `n` of the final truncated hull `H_n`.
    pub order: usize,
    pub relation_degree: usize,
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub monomial: String,
    /// Coordinates over the Ext^2 basis of the monomial's type.
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSection {
    pub order: usize,
    pub products: Vec<ProductEntry>,
    pub cocycles_checked: usize,
    pub series_consistent: bool,
    pub basis: Vec<String>,
    pub nonzero_corrections: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub monomial: String,
    pub cochain: CochainSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSection {
    /// Orders whose defining system was checked as a lifted complex.
    pub orders_checked: Vec<usize>,
    pub lifted_complex_ok: bool,
    /// Restriction of each family to the previous truncation, where the bases allow it.
    pub restrictions_checked: usize,
}

/// Everything a run computed, before rendering.
pub struct RunOutput {
    pub report: Report,
    pub result: HullResult,
    pub basis: ExtBasis,
    pub table: GeneratorTable,
}

fn scalar_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(scalar::format).collect()
}

fn relation_entry(table: &GeneratorTable, id: usize, f: &MatricPoly) -> RelationEntry {
    let o = table.obstructions()[id];
    RelationEntry {
        name: table.relation_name(id),
        left: o.left + 1,
        right: o.right + 1,
        polynomial: f.format(table),
        terms: f.terms().map(|(m, c)| TermEntry { monomial: m.format(table), coefficient: scalar::format(c) }).collect(),
    }
}

fn order_section(table: &GeneratorTable, log: &OrderLog) -> OrderSection {
    let names = |ms: &[MatricMonomial]| ms.iter().map(|m| m.format(table)).collect();
    OrderSection {
        order: log.order,
        products: log
            .products
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(m, v)| ProductEntry { monomial: m.format(table), coefficients: scalar_strings(v) })
            .collect(),
        cocycles_checked: log.cocycles_checked,
        series_consistent: log.series_consistent,
        basis: names(&log.basis),
        nonzero_corrections: names(&log.nonzero_corrections),
    }
}

fn representatives(problem: &Problem, basis: &ExtBasis) -> RepresentativesSpec {
    let p = problem.p();
    let mut out = RepresentativesSpec::default();
    for i in 0..p {
        for j in 0..p {
            out.ext1.extend(basis.ext1(i, j).iter().map(|c| problem.cochain_to_spec(c)));
            out.ext2.extend(basis.ext2(i, j).iter().map(|c| problem.cochain_to_spec(c)));
        }
    }
    out
}

/// Ext computation, hull iteration with cross-validation at every order, and the report.
pub fn run(problem: &Problem) -> Result<RunOutput> {
    let yoneda = &problem.yoneda;
    let ext1 = yoneda.ext_table(1)?;
    let ext2 = yoneda.ext_table(2)?;
    let supplied = problem.spec.options.use_supplied_representatives && problem.spec.representatives.is_some();
    let basis = problem.ext_basis()?;
    let table = basis.generator_table();
    let order = problem.monomial_order(&table)?;
    let engine = MasseyEngine::new(yoneda, &basis, order, problem.spec.options.hull.clone())?;

    let mut orders_checked = Vec::new();
    let mut restrictions_checked = 0;
    let result = engine.compute_hull_with(|state: &HullState| {
        let (full, lower) = cross_validate(&engine, yoneda, state).map_err(|e| e.at_order(state.order(), None))?;
        for v in std::iter::once(&full).chain(lower.as_ref()) {
            if let Some((monomial, component)) = &v.failure {
                return Err(Error::FlatnessViolated { monomial: monomial.clone(), component: *component }
                    .at_order(state.order(), Some(monomial.clone())));
            }
        }
        restrictions_checked += lower.is_some() as usize;
        orders_checked.push(state.order());
        Ok(())
    })?;

    let state = &result.state;
    let report = Report {
        schema: REPORT_SCHEMA.into(),
        problem: problem.spec.clone(),
        ext: ExtSection {
            ext1,
            ext2,
            source: if supplied { "supplied" } else { "computed" }.into(),
            representatives: representatives(problem, &basis),
        },
        hull: HullSection {
            generators: (0..table.arrows().len()).map(|id| table.arrow_name(id)).collect(),
            obstructions: (0..table.obstructions().len()).map(|id| table.obstruction_name(id)).collect(),
            relations: state.series().iter().enumerate().map(|(id, f)| relation_entry(&table, id, f)).collect(),
            order: state.order(),
            relation_degree: state.relation_degree(),
            stabilized: result.stabilization.stabilized,
        },
        orders: state.log().iter().map(|l| order_section(&table, l)).collect(),
        certificate: result.stabilization.clone(),
        versal_family: state
            .quotient()
            .basis()
            .iter()
            .map(|m| FamilyEntry {
                monomial: m.format(&table),
                cochain: problem.cochain_to_spec(state.system().get(m).expect("basis monomials carry cochains")),
            })
            .collect(),
        verification: VerificationSection { orders_checked, lifted_complex_ok: true, restrictions_checked },
    };
    Ok(RunOutput { report, result, basis, table })
}

impl Report {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// The canonical byte form written to disk.
    pub fn to_canonical_json(&self) -> String {
        canonical(&self.to_value())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse { input: "report".into(), reason: e.to_string() })?;
        let schema = v.get("schema").and_then(Value::as_str).unwrap_or("");
        if schema != REPORT_SCHEMA {
            return Err(Error::SchemaMismatch { left: schema.into(), right: REPORT_SCHEMA.into() });
        }
        serde_json::from_value(v).map_err(|e| Error::Parse { input: "report".into(), reason: e.to_string() })
    }

    /// The human readable presentation of the hull.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = self.ext.ext1.len();
        out.push_str(&format!("problem: {}\n\n", self.problem.name));
        out.push_str(&ext_tables_text(&self.ext.ext1, &self.ext.ext2));
        out.push_str(&format!("\nExt representatives: {}\n", self.ext.source));
        out.push_str(&format!("\ngenerators ({}): {}\n", self.hull.generators.len(), self.hull.generators.join(" ")));
        for o in &self.orders {
            let nonzero: Vec<String> = o
                .products
                .iter()
                .filter(|e| e.coefficients.iter().any(|c| c != "0"))
                .map(|e| format!("<{}> = {}", e.monomial.replace('*', ", "), e.coefficients.join(", ")))
                .collect();
            out.push_str(&format!("\norder {} Massey products ({} nonzero)\n", o.order, nonzero.len()));
            for line in nonzero {
                out.push_str(&format!("  {line}\n"));
            }
        }
        let status = if self.hull.stabilized { "stabilized" } else { "not stabilized" };
        out.push_str(&format!(
            "\nhull over {p} points, relations up to degree {} ({status})\n",
            self.hull.relation_degree
        ));
        if self.hull.relations.is_empty() {
            out.push_str("  no relations\n");
        }
        for r in &self.hull.relations {
            out.push_str(&format!("  {} = {}\n", r.name, r.polynomial));
        }
        out.push_str(&format!("\nstabilization check at cutoff {}\n", self.certificate.cutoff));
        for line in &self.certificate.identity {
            out.push_str(&format!("  {line}\n"));
        }
        if let Some((m, c)) = &self.certificate.failure {
            out.push_str(&format!("  fails at {m}, component {c}\n"));
        }
        out.push_str(&format!(
            "\nversal family: {} cochains, lifted complex verified at orders {:?}\n",
            self.versal_family.len(),
            self.verification.orders_checked
        ));
        out
    }
}

pub fn ext_tables_text(ext1: &[Vec<usize>], ext2: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for (n, t) in [(1, ext1), (2, ext2)] {
        out.push_str(&format!("dim Ext^{n}(M_j, M_i), row i, column j\n"));
        for row in t {
            out.push_str("  ");
            out.push_str(&row.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// One differing leaf of two reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffEntry {
    pub path: String,
    pub left: Option<Value>,
    pub right: Option<Value>,
}

/// Field level difference of two reports with the same schema.
pub fn diff_reports(a: &Value, b: &Value) -> Result<Vec<DiffEntry>> {
    let schema = |v: &Value| v.get("schema").and_then(Value::as_str).unwrap_or("").to_string();
    if schema(a) != schema(b) {
        return Err(Error::SchemaMismatch { left: schema(a), right: schema(b) });
    }
    let mut out = Vec::new();
    diff_values("", Some(a), Some(b), &mut out);
    Ok(out)
}

fn diff_values(path: &str, a: Option<&Value>, b: Option<&Value>, out: &mut Vec<DiffEntry>) {
    let child = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match (a, b) {
        (Some(Value::Object(x)), Some(Value::Object(y))) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                diff_values(&child(k), x.get(k), y.get(k), out);
            }
        }
        (Some(Value::Array(x)), Some(Value::Array(y))) => {
            for k in 0..x.len().max(y.len()) {
                diff_values(&format!("{path}[{k}]"), x.get(k), y.get(k), out);
            }
        }
        (x, y) if x == y => {}
        (x, y) => out.push(DiffEntry { path: path.to_string(), left: x.cloned(), right: y.cloned() }),
    }
}

/// Outcome of re-checking a saved report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(name: &str, v: &Verification) -> ReportCheck {
    ReportCheck {
        name: name.into(),
        ok: v.ok,
        detail: match &v.failure {
            None => "d^2 = 0".into(),
            Some((z, m)) => format!("d^2 != 0 at {z}, component {m}"),
        },
    }
}

/// Rebuilds the problem stored in a report and re-verifies its claims with the
/// deformation checker: the versal family over `H_n`, and when the report
/// claims stabilization, the same family extended by zero over the larger truncation.
pub fn verify_report(report: &Report) -> Result<Vec<ReportCheck>> {
    let problem = Problem::build(report.problem.clone())?;
    let yoneda = &problem.yoneda;
    let mut checks = Vec::new();

    let table = GeneratorTable::new(report.ext.ext1.clone(), report.ext.ext2.clone())?;
    let reps = &report.ext.representatives;
    let mut cocycles = true;
    for c in reps.ext1.iter().chain(&reps.ext2) {
        cocycles &= yoneda.is_cocycle(&problem.cochain_from_spec(c)?)?;
    }
    checks.push(ReportCheck { name: "representatives".into(), ok: cocycles, detail: "Ext representatives are cocycles".into() });

    let mut relations = Vec::new();
    for (id, r) in report.hull.relations.iter().enumerate() {
        let o = table.obstructions().get(id).ok_or_else(|| Error::Invalid(format!("unexpected relation {}", r.name)))?;
        let mut f = MatricPoly::zero(o.left, o.right);
        for t in &r.terms {
            let c = scalar::parse(&t.coefficient).ok_or_else(|| Error::Parse { input: t.coefficient.clone(), reason: "not a rational".into() })?;
            f.add_term(MatricMonomial::parse(&table, &t.monomial)?, c)?;
        }
        relations.push(f);
    }
    let order = problem.monomial_order(&table)?;

    let family: BTreeMap<&str, Cochain> = report
        .versal_family
        .iter()
        .map(|e| Ok((e.monomial.as_str(), problem.cochain_from_spec(&e.cochain)?)))
        .collect::<Result<_>>()?;
    let lift_over = |q: &MonomialQuotient| -> Result<LiftedComplex> {
        let alg = q.to_algebra();
        let cochains = alg
            .elements()
            .iter()
            .map(|b| family.get(b.label.as_str()).cloned().unwrap_or_else(|| yoneda.zero(1, b.left, b.right)))
            .collect();
        LiftedComplex::new(yoneda, alg, cochains)
    };

    let hn = MonomialQuotient::build(&table, &relations, report.hull.order, &order)?;
    let covered = hn.basis().iter().all(|m| family.contains_key(m.format(&table).as_str()));
    checks.push(ReportCheck {
        name: "family basis".into(),
        ok: covered && hn.basis().len() == family.len(),
        detail: format!("{} cochains for a basis of {} monomials", family.len(), hn.basis().len()),
    });
    checks.push(check("versal family over H_n", &verify_lifted_complex(yoneda, &lift_over(&hn)?)?));

    if report.hull.stabilized {
        let t = MonomialQuotient::build(&table, &relations, report.certificate.cutoff, &order)?;
        checks.push(check("stabilization certificate", &verify_lifted_complex(yoneda, &lift_over(&t)?)?));
    }
    let bad_scalars = report.orders.iter().flat_map(|o| &o.products).flat_map(|p| &p.coefficients).any(|c| scalar::parse(c).is_none());
    checks.push(ReportCheck { name: "products".into(), ok: !bad_scalars, detail: "Massey product coefficients parse".into() });
    Ok(checks)
}
