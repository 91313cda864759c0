//! Acceptance criteria for the shipped presets.
//!
//! Prints one `PASS` or `FAIL` line per criterion and fails if any criterion does.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncdef::algebra::{Algebra, AlgebraElement};
use ncdef::deformation::LiftedComplex;
use ncdef::massey::{find_sign_rescaling, HullOptions, HullState, ImmediateMassey, MasseyEngine};
use ncdef::matric::{GeneratorTable, MatricMonomial, MatricPoly, MonomialOrder};
use ncdef::matrix::AlgMatrix;
use ncdef::problem::{Problem, ProblemSpec};
use ncdef::report::{run, verify_report};
use ncdef::scalar::{int, Scalar};
use ncdef::yoneda::{Cochain, ExtBasis, Yoneda};

/// Runtime limits per criterion, in seconds.
const LIMIT_EXT: f64 = 30.0;
const LIMIT_PRODUCTS: f64 = 60.0;
const LIMIT_HULL: f64 = 60.0;
const LIMIT_UNOBSTRUCTED: f64 = 5.0;
const LIMIT_PROPERTIES: f64 = 300.0;
const LIMIT_CONFLUENCE: f64 = 1.0;

/// Degree bound used for the Ext tables of criterion 1.
const EXT_DEGREE_BOUND: u32 = 6;
/// Highest order checked in the unobstructed case.
const UNOBSTRUCTED_MAX_ORDER: usize = 6;
/// Random cochains for the `d∘d = 0` check.
const RANDOM_COCHAINS: usize = 60;

const EXPECTED_EXT1: [(usize, usize); 8] = [(1, 2), (1, 3), (4, 2), (4, 3), (2, 1), (2, 4), (3, 1), (3, 4)];
const EXPECTED_EXT2: [(usize, usize); 4] = [(1, 4), (2, 3), (3, 2), (4, 1)];
const EXPECTED_PRODUCTS: [(&str, i64); 8] = [
    ("x12*x24", -1),
    ("x13*x34", 1),
    ("x21*x13", -1),
    ("x24*x43", 1),
    ("x31*x12", 1),
    ("x34*x42", -1),
    ("x42*x21", 1),
    ("x43*x31", -1),
];
const EXPECTED_RELATIONS: [&str; 4] = [
    "x13*x34 - x12*x24",
    "x24*x43 - x21*x13",
    "x31*x12 - x34*x42",
    "x42*x21 - x43*x31",
];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn weyl(degree_bound: Option<u32>) -> Problem {
    let mut spec = ProblemSpec::preset("weyl2-simple4").unwrap();
    if let Some(d) = degree_bound {
        spec.options.solver.degree_bound = d;
    }
    Problem::build(spec).unwrap()
}

fn expected_relations(table: &GeneratorTable) -> Vec<MatricPoly> {
    EXPECTED_RELATIONS
        .iter()
        .zip(table.obstructions())
        .map(|(text, o)| {
            let mut f = MatricPoly::zero(o.left, o.right);
            let (pos, neg) = text.split_once(" - ").unwrap();
            f.add_term(MatricMonomial::parse(table, pos).unwrap(), int(1)).unwrap();
            f.add_term(MatricMonomial::parse(table, neg).unwrap(), int(-1)).unwrap();
            f
        })
        .collect()
}

fn criterion_ext_tables() -> Outcome {
    let problem = weyl(Some(EXT_DEGREE_BOUND));
    for i in 1..=4 {
        for j in 1..=4 {
            // ext_dimension(a, b, n) is dim Ext^n(M_b, M_a)
            let d1 = problem.yoneda.ext_dimension(j - 1, i - 1, 1).map_err(s)?;
            let d2 = problem.yoneda.ext_dimension(j - 1, i - 1, 2).map_err(s)?;
            let want1 = EXPECTED_EXT1.contains(&(i, j)) as usize;
            let want2 = EXPECTED_EXT2.contains(&(i, j)) as usize;
            ensure(d1 == want1, format!("dim Ext^1(M{i}, M{j}) = {d1}, expected {want1}"))?;
            ensure(d2 == want2, format!("dim Ext^2(M{i}, M{j}) = {d2}, expected {want2}"))?;
        }
    }
    Ok(format!("16 + 16 dimensions exact at degree bound {EXT_DEGREE_BOUND}"))
}

fn products_of(engine: &MasseyEngine<'_>) -> Result<BTreeMap<String, Vec<Scalar>>, String> {
    let table = engine.table();
    Ok(engine.cup_products().map_err(s)?.into_iter().map(|(m, v)| (m.format(table), v)).collect())
}

fn criterion_products() -> Outcome {
    let problem = weyl(None);
    let supplied = problem.supplied_basis().map_err(s)?.ok_or("preset carries representatives")?;
    let table = supplied.generator_table();
    let order = problem.monomial_order(&table).map_err(s)?;
    let engine = MasseyEngine::new(&problem.yoneda, &supplied, order, HullOptions::default()).map_err(s)?;
    let products = products_of(&engine)?;
    ensure(products.len() == 16, format!("{} degree-2 monomials, expected 16", products.len()))?;
    for (m, v) in &products {
        let want: Vec<Scalar> = match EXPECTED_PRODUCTS.iter().find(|(n, _)| n == m) {
            Some((_, c)) => vec![int(*c)],
            None => vec![Scalar::zero(); v.len()],
        };
        ensure(v == &want, format!("<{m}> = {v:?}, expected {want:?}"))?;
    }

    let computed = problem.yoneda.compute_ext_basis().map_err(s)?;
    let engine = MasseyEngine::new(&problem.yoneda, &computed, MonomialOrder::natural(), HullOptions::default()).map_err(s)?;
    let hull = engine.compute_hull().map_err(s)?;
    let lambda = find_sign_rescaling(&table, &expected_relations(&table), hull.state.series())
        .ok_or("no rescaling matches the computed relations")?;
    let flips = lambda.iter().filter(|l| !l.is_one()).count();
    Ok(format!("8 signed products exact, 8 zero; computed representatives match after {flips} sign changes"))
}

fn criterion_hull() -> Outcome {
    let problem = weyl(None);
    let out = run(&problem).map_err(s)?;
    let hull = &out.report.hull;
    ensure(hull.stabilized, "not stabilized")?;
    ensure(hull.relation_degree == 2, format!("stabilized at relation degree {}", hull.relation_degree))?;
    let got: Vec<&str> = hull.relations.iter().map(|r| r.polynomial.as_str()).collect();
    ensure(got == EXPECTED_RELATIONS, format!("relations {got:?}"))?;

    // the certificate must be the single scalar identity 1 ⊗ (f14 + f23 + f32 + f41) = 0
    let cert = &out.report.certificate;
    ensure(cert.failure.is_none() && cert.identity.len() == 1, format!("certificate {:?}", cert.identity))?;
    let mut sum: BTreeMap<String, String> = BTreeMap::new();
    for r in &hull.relations {
        for t in &r.terms {
            sum.insert(t.monomial.clone(), t.coefficient.clone());
        }
    }
    let terms: BTreeMap<String, String> = cert
        .terms
        .iter()
        .inspect(|t| assert_eq!((t.component, t.row, t.col), (0, 0, 0)))
        .map(|t| (t.monomial.clone(), t.coefficient.clone()))
        .collect();
    ensure(terms == sum, "certificate terms differ from the sum of the relations")?;
    ensure(cert.identity[0].ends_with("= 0 in T"), cert.identity[0].clone())?;
    Ok(format!("4 relations exact; {}", cert.identity[0]))
}

fn criterion_unobstructed() -> Outcome {
    let mut spec = ProblemSpec::preset("poly1-point").unwrap();
    spec.options.hull = HullOptions { max_order: UNOBSTRUCTED_MAX_ORDER, stop_when_stabilized: false, ..Default::default() };
    let problem = Problem::build(spec).map_err(s)?;
    let ext = (problem.yoneda.ext_dimension(0, 0, 1).map_err(s)?, problem.yoneda.ext_dimension(0, 0, 2).map_err(s)?);
    ensure(ext == (1, 0), format!("Ext dims {ext:?}"))?;
    let basis = problem.ext_basis().map_err(s)?;
    let engine = MasseyEngine::new(&problem.yoneda, &basis, MonomialOrder::natural(), problem.spec.options.hull.clone()).map_err(s)?;
    let mut seen = Vec::new();
    let result = engine
        .compute_hull_with(|st: &HullState| {
            let relations_zero = st.series().iter().all(|f| f.is_zero());
            let all_monomials = st.quotient().basis().len() == st.order();
            seen.push((st.order(), relations_zero && all_monomials));
            Ok(())
        })
        .map_err(s)?;
    ensure(seen.iter().all(|(_, ok)| *ok), format!("orders {seen:?}"))?;
    ensure(result.state.relation_degree() == UNOBSTRUCTED_MAX_ORDER, format!("stopped at {}", result.state.relation_degree()))?;
    ensure(result.stabilization.stabilized, "final state not certified")?;
    Ok(format!("Ext^1 = 1, Ext^2 = 0, no relations at orders 2..={}", UNOBSTRUCTED_MAX_ORDER + 1))
}

fn random_element(alg: &Algebra, words: &[Vec<u16>], rng: &mut ChaCha8Rng) -> AlgebraElement {
    let mut a = AlgebraElement::zero();
    for _ in 0..rng.gen_range(0..3) {
        let w = words[rng.gen_range(0..words.len())].clone();
        a = a.add(&AlgebraElement::monomial(w, int(rng.gen_range(-3..=3))));
    }
    alg.normal_form(&a).unwrap()
}

fn random_cochain(y: &Yoneda, n: usize, i: usize, j: usize, words: &[Vec<u16>], rng: &mut ChaCha8Rng) -> Cochain {
    let res = y.resolutions();
    let comps = (0..=res.m_max() - n)
        .map(|m| {
            let (r, c) = (res.rank(j, m + n), res.rank(i, m));
            let mut mat = AlgMatrix::zero(r, c);
            for a in 0..r {
                for b in 0..c {
                    mat.set(a, b, random_element(y.algebra(), words, rng));
                }
            }
            mat
        })
        .collect();
    y.cochain(n, i, j, comps).unwrap()
}

fn arrow_cochains(engine: &MasseyEngine<'_>, state: &HullState, x: &MatricMonomial) -> BTreeMap<usize, Cochain> {
    x.arrows()
        .iter()
        .map(|&id| (id, state.system().get(&MatricMonomial::arrow(engine.table(), id)).unwrap().clone()))
        .collect()
}

fn criterion_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let problem = weyl(None);
    let y = &problem.yoneda;
    let words = y.algebra().normal_words(2);

    // (a) d∘d = 0
    for _ in 0..RANDOM_COCHAINS {
        let n = rng.gen_range(0..2);
        let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
        let c = random_cochain(y, n, i, j, &words, &mut rng);
        let dd = y.differential(&y.differential(&c).map_err(s)?).map_err(s)?;
        ensure(dd.is_zero(), "(a) d(d(c)) != 0")?;
    }

    let mut runs = Vec::new();
    for (name, supplied) in [("weyl2-simple4", true), ("weyl2-simple4", false), ("poly1-point", false)] {
        let mut spec = ProblemSpec::preset(name).unwrap();
        spec.options.use_supplied_representatives = supplied;
        runs.push(Problem::build(spec).map_err(s)?);
    }
    for problem in &runs {
        let y = &problem.yoneda;
        let basis = problem.ext_basis().map_err(s)?;
        let table = basis.generator_table();
        let order = problem.monomial_order(&table).map_err(s)?;
        let engine = MasseyEngine::new(y, &basis, order, HullOptions { stop_when_stabilized: false, max_order: 4, ..Default::default() })
            .map_err(s)?;
        let mut failures: Vec<String> = Vec::new();
        engine
            .compute_hull_with(|st: &HullState| {
                // (b) obstruction cocycles
                for (x, c) in engine.obstruction_cocycles(st)? {
                    if !y.is_cocycle(&c)? {
                        failures.push(format!("(b) y({}) is not a cocycle", x.format(&table)));
                    }
                }
                // (c) + (d) flatness at every basis monomial, computed independently of the engine
                let lifted = LiftedComplex::from_hull_state(y, st)?;
                let alg = lifted.algebra();
                for z in 0..alg.dim() {
                    let e = alg.element(z);
                    let mut sum = y.zero(2, e.left, e.right);
                    for (b1, b2, k) in alg.structure_constants(z) {
                        sum = sum.add(&y.compose(&lifted.cochains()[b1], &lifted.cochains()[b2])?.scale(&k))?;
                    }
                    if !sum.is_zero() {
                        failures.push(format!("(c/d) flatness fails at {} in order {}", e.label, st.order()));
                    }
                }
                // order coherence of the relations
                if !st.log().iter().all(|l| l.series_consistent) {
                    failures.push("series inconsistent".into());
                }
                Ok(())
            })
            .map_err(s)?;
        ensure(failures.is_empty(), failures.join("; "))?;

        // (e) independent verification of the final versal family
        let out = run(problem).map_err(s)?;
        for c in verify_report(&out.report).map_err(s)? {
            ensure(c.ok, format!("(e) {}: {}", c.name, c.detail))?;
        }
        // (f) determinism
        let again = run(problem).map_err(s)?;
        ensure(out.report.to_canonical_json() == again.report.to_canonical_json(), "(f) runs differ")?;
        // (h) projecting a basis element gives its unit vector
        check_projection(y, &basis)?;
    }

    // (g) cup-product bilinearity
    let problem = weyl(None);
    let y = &problem.yoneda;
    let basis = problem.supplied_basis().map_err(s)?.unwrap();
    let table = basis.generator_table();
    let engine = MasseyEngine::new(y, &basis, MonomialOrder::natural(), HullOptions::default()).map_err(s)?;
    let st = engine.init_order2().map_err(s)?;
    for x in ncdef::matric::monomials_of_degree(&table, 2) {
        let base = arrow_cochains(&engine, &st, &x);
        let value = |c: &BTreeMap<usize, Cochain>| match engine.immediate_massey(&x, c) {
            Ok(ImmediateMassey::Defined(v)) => Ok(v),
            other => Err(format!("(g) <{}> gave {other:?}", x.format(&table))),
        };
        let v0 = value(&base)?;
        let (a, b) = (int(rng.gen_range(1..6)), int(-rng.gen_range(1..6)));
        let mut scaled = base.clone();
        let ids = x.arrows();
        scaled.insert(ids[0], base[&ids[0]].scale(&a));
        scaled.insert(ids[1], base[&ids[1]].scale(&b));
        let want: Vec<Scalar> = v0.iter().map(|c| c * &a * &b).collect();
        ensure(value(&scaled)? == want, "(g) not bilinear under scaling")?;
        // adding a coboundary to the first factor changes nothing
        let first = &base[&ids[0]];
        let phi = random_cochain(y, 0, first.target(), first.source(), &words, &mut rng);
        let mut shifted = base.clone();
        shifted.insert(ids[0], first.add(&y.differential(&phi).map_err(s)?).map_err(s)?);
        ensure(value(&shifted)? == v0, "(g) not additive")?;
    }
    Ok(format!("(a) {RANDOM_COCHAINS} random cochains; (b)-(f), (h) on 3 runs; (g) on 16 monomials"))
}

fn check_projection(y: &Yoneda, basis: &ExtBasis) -> Result<(), String> {
    for i in 0..basis.p() {
        for j in 0..basis.p() {
            let cs = basis.ext2(i, j);
            for (l, c) in cs.iter().enumerate() {
                let proj = y.project(c, cs).map_err(s)?;
                let unit: Vec<Scalar> = (0..cs.len()).map(|k| if k == l { int(1) } else { int(0) }).collect();
                ensure(proj.coefficients == unit, "(h) projection is not a unit vector")?;
            }
        }
    }
    Ok(())
}

fn criterion_confluence() -> Outcome {
    let alg = Algebra::preset("weyl2").map_err(s)?;
    let overlaps = alg.overlap_witnesses().map_err(s)?;
    ensure(overlaps.len() == 4, format!("{} overlaps, expected 4", overlaps.len()))?;
    for o in &overlaps {
        ensure(o.left == o.right, format!("overlap {} does not resolve", alg.format_word(&o.word)))?;
    }
    let problem = weyl(None);
    let res = problem.yoneda.resolutions();
    for i in 0..res.len() {
        for p in res.compositions(i).map_err(s)? {
            ensure(p.is_zero(), format!("D_m D_(m+1) != 0 for M{}", i + 1))?;
        }
    }
    Ok("4 overlaps resolve; D_0 D_1 = 0 for all 4 resolutions".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, f64, fn() -> Outcome); 6] = [
        ("1 ext tables", LIMIT_EXT, criterion_ext_tables),
        ("2 order-2 Massey products", LIMIT_PRODUCTS, criterion_products),
        ("3 hull and certificate", LIMIT_HULL, criterion_hull),
        ("4 unobstructed point", LIMIT_UNOBSTRUCTED, criterion_unobstructed),
        ("5 property suites", LIMIT_PROPERTIES, criterion_properties),
        ("6 rewriting confluence", LIMIT_CONFLUENCE, criterion_confluence),
    ];
    let mut failed = Vec::new();
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs_f64(limit) => Err(format!("{msg}; took {elapsed:.2?}, limit {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} ({elapsed:.2?})"),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg} ({elapsed:.2?})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
